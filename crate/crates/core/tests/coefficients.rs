use proptest::prelude::*;
use spectral_coeffs::coefficients::{
    auto_truncate, truncated_coefficients, FourierCoefficients, QuadratureRule,
};
use spectral_coeffs::discretize::{assemble, build_mesh, Mesh};
use spectral_coeffs::eigensolve::{identify_zero_mode, lowest_eigenpairs, reflection_score};
use spectral_coeffs::oracle::drift_oracle;
use spectral_coeffs::potential::{make_potential, PotentialSpec};
use spectral_coeffs::{Error, Result};

struct Run {
    mesh: Mesh,
    eta: Vec<f64>,
    vectors: Vec<Vec<f64>>,
    series: spectral_coeffs::coefficients::CoefficientSeries,
}

fn run(spec: &PotentialSpec, n: usize, p: usize, modes: usize, rule: QuadratureRule) -> Result<Run> {
    let mesh = build_mesh(spec.domain_r(), n, p, 2 * p + 1)?;
    let op = assemble(&mesh, spec)?;
    let dec = lowest_eigenpairs(&op, modes + 1, 1e-8)?;
    let zero = identify_zero_mode(&dec, 1e-8)?;
    let f = FourierCoefficients::compute(&dec, spec, &mesh, rule)?;
    let series = truncated_coefficients(&dec, &zero, &f.eta, &f.omega, modes)?;
    Ok(Run {
        mesh,
        eta: f.eta,
        vectors: dec.eigenvectors,
        series,
    })
}

#[test]
fn quadratic_first_coefficient() {
    let spec = PotentialSpec::quadratic(1.0, 10.0).unwrap();
    let r = run(&spec, 200, 4, 6, QuadratureRule::CompositeRectangle).unwrap();
    assert!((r.eta[1] + 1.0).abs() < 1e-9);
    assert!(r.eta[2..].iter().all(|e| e.abs() < 1e-9));
    assert_eq!(auto_truncate(&r.series, 1e-10).unwrap(), 4);
}

#[test]
fn rules_agree_on_first_coefficient_default_mesh() {
    let spec = make_potential(1.0, 1.0, 0.0, 0, 10.0, 32).unwrap();
    let rect = run(&spec, 1000, 10, 3, QuadratureRule::CompositeRectangle).unwrap();
    let gauss = run(&spec, 1000, 10, 3, QuadratureRule::PerElementGauss).unwrap();
    let (a, b) = (rect.series.eta[0], gauss.series.eta[0]);
    assert!((a - b).abs() / b.abs() < 1e-6, "{a} vs {b}");
}

#[test]
fn case_a_truncation_and_parity() {
    let spec = make_potential(1.0, 1.0, 0.0, 0, 10.0, 32).unwrap();
    let r = run(&spec, 200, 10, 30, QuadratureRule::CompositeRectangle).unwrap();
    let n_auto = auto_truncate(&r.series, 1e-8).unwrap();
    assert!(n_auto <= 20, "N_auto = {n_auto}");
    for (k, x) in r.vectors.iter().enumerate() {
        let (_, parity) = reflection_score(&r.mesh, x).unwrap();
        if parity == 1 {
            assert!(r.eta[k].abs() < 1e-10, "k={k}: {}", r.eta[k]);
        }
    }
    assert!(matches!(auto_truncate(&r.series, 0.0), Err(Error::NoConvergence(_))));
}

#[test]
fn diffusion_grows_with_gamma() {
    let d: Vec<f64> = [1.0, 10.0, 50.0]
        .iter()
        .map(|&g| {
            let spec = make_potential(g, 1.0, 0.0, 0, 10.0, 32).unwrap();
            let r = run(&spec, 200, 10, 20, QuadratureRule::PerElementGauss).unwrap();
            *r.series.d_partial.last().unwrap()
        })
        .collect();
    assert!(d[0] < d[1] && d[1] < d[2], "{d:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn series_monotone_positive_and_near_oracle(
        gamma in 0.5f64..4.0,
        delta in 0.0f64..5.0,
        sigma in 0u8..2,
    ) {
        let spec = make_potential(gamma, 1.0, delta, sigma, 10.0, 32).unwrap();
        let r = run(&spec, 200, 8, 30, QuadratureRule::PerElementGauss).unwrap();
        let d = &r.series.d_partial;
        prop_assert!(d.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(*d.last().unwrap() > 0.0);
        let k = *r.series.k_partial.last().unwrap();
        let k_star = drift_oracle(&spec).unwrap().k_star;
        prop_assert!((k - k_star).abs() / k_star < 1e-6, "{} vs {}", k, k_star);
    }
}
