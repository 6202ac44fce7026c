//! The four subcommands as library calls.

use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use spectral_coeffs::coefficients::{truncated_coefficients, CoefficientSeries, FourierCoefficients};
use spectral_coeffs::discretize::{assemble, assemble_fd, build_mesh, DiscreteOperator, Mesh};
use spectral_coeffs::eigensolve::{
    identify_zero_mode, lowest_eigenpairs_with, symmetry_diagnostic, SpectralDecomposition,
    SymmetryScore, ZeroMode,
};
use spectral_coeffs::oracle::{drift_oracle, OracleResult};
use spectral_coeffs::potential::PotentialSpec;

use crate::config::{Format, RunConfig, SchemeKind, SweepParam};
use crate::output::{num, opt, write_all, Artifact};
use crate::plot::{Plot, Scale, Series};
use crate::{status_tag, CliError};

/// Number of eigenvalue columns in the sweep CSV (`lambda_0..lambda_5`).
const SWEEP_LAMBDAS: usize = 6;

/// Coefficient stage of a successful run.
#[derive(Debug, Clone)]
pub struct Coefficients {
    pub zero: ZeroMode,
    pub fourier: FourierCoefficients,
    pub series: CoefficientSeries,
    pub n_auto: usize,
    pub d: f64,
    pub k: f64,
    pub oracle: OracleResult,
    /// `|K - K*| / K*`.
    pub rel_err: f64,
}

/// Everything computed for one parameter point, kept even when a later
/// stage fails so sweeps can still report eigenvalues past a collapse.
#[derive(Debug)]
pub struct Evaluation {
    pub config: RunConfig,
    pub spec: Option<PotentialSpec>,
    pub mesh: Option<Mesh>,
    pub decomposition: Option<SpectralDecomposition>,
    pub symmetry: Vec<SymmetryScore>,
    pub outcome: Result<Coefficients, CliError>,
}

impl Evaluation {
    pub fn flags(&self) -> Vec<&'static str> {
        let mut f = Vec::new();
        if self.symmetry.iter().any(|s| s.broken) {
            f.push("symmetry_broken");
        }
        if let Ok(c) = &self.outcome {
            if c.rel_err > self.config.oracle_tol {
                f.push("drift_mismatch");
            }
        }
        f
    }
}

fn symmetry_of(dec: &SpectralDecomposition, mesh: &Mesh, spec: &PotentialSpec, s_tol: f64) -> Vec<SymmetryScore> {
    if spec.is_symmetric() {
        symmetry_diagnostic(dec, mesh, spec, s_tol).unwrap_or_default()
    } else {
        Vec::new()
    }
}

/// Runs the whole pipeline on one parameter point.
pub fn evaluate(config: &RunConfig) -> Evaluation {
    let mut ev = Evaluation {
        config: config.clone(),
        spec: None,
        mesh: None,
        decomposition: None,
        symmetry: Vec::new(),
        outcome: Err(CliError::config("not evaluated")),
    };
    ev.outcome = stages(config, &mut ev);
    ev
}

fn stages(c: &RunConfig, ev: &mut Evaluation) -> Result<Coefficients, CliError> {
    c.validate()?;
    let spec = c.potential()?;
    ev.spec = Some(spec.clone());
    let mesh = build_mesh(c.r, c.n_elements, c.degree, c.quad_degree)?;
    let op = assemble(&mesh, &spec)?;
    let dec = lowest_eigenpairs_with(&op, c.n_max + 1, c.tol, c.eigen_method()?)?;
    ev.symmetry = symmetry_of(&dec, &mesh, &spec, c.s_tol);
    let dec = ev.decomposition.insert(dec);
    let mesh = ev.mesh.insert(mesh);

    let zero = identify_zero_mode(dec, c.tol_zero)?;
    let fourier = FourierCoefficients::compute(dec, &spec, mesh, c.quadrature_rule()?)?;
    let series = truncated_coefficients(dec, &zero, &fourier.eta, &fourier.omega, c.n_max)?
        .with_auto_truncation(c.rel_tol)?;
    let n_auto = series.n_auto.unwrap_or(series.len());
    let oracle = drift_oracle(&spec)?;
    let (d, k) = (series.d(n_auto), series.k(n_auto));
    Ok(Coefficients {
        zero,
        fourier,
        n_auto,
        d,
        k,
        rel_err: (k - oracle.k_star).abs() / oracle.k_star.abs(),
        oracle,
        series,
    })
}

#[derive(Debug)]
pub struct SingleReport {
    pub config: RunConfig,
    pub spec: PotentialSpec,
    pub decomposition: SpectralDecomposition,
    pub symmetry: Vec<SymmetryScore>,
    pub coefficients: Coefficients,
    pub flags: Vec<&'static str>,
    pub files: Vec<PathBuf>,
}

impl SingleReport {
    /// `key,value` rows.
    pub fn summary_csv(&self) -> String {
        let c = &self.config;
        let co = &self.coefficients;
        let dec = &self.decomposition;
        let mut rows: Vec<(&str, String)> = vec![
            ("case", c.case.to_string()),
            ("vartheta", num(self.spec.vartheta())),
        ];
        if let Some(p) = self.spec.family_params() {
            rows.extend([
                ("gamma", num(p.gamma)),
                ("theta", num(p.theta)),
                ("delta", num(p.delta)),
                ("sigma", p.sigma.to_string()),
            ]);
        }
        rows.extend([
            ("R", num(c.r)),
            ("n_elements", c.n_elements.to_string()),
            ("degree", c.degree.to_string()),
            ("quad_degree", c.quad_degree.to_string()),
            ("dofs", dec.dim().to_string()),
            ("eigensolver", format!("{:?}", dec.method).to_lowercase()),
            ("rule", co.fourier.rule.tag().to_string()),
            ("mean_velocity", num(self.spec.mean_velocity())),
            ("zero_mode_index", co.zero.index.to_string()),
            ("zero_mode_lambda", num(dec.eigenvalues[co.zero.index])),
            ("spectral_gap", num(co.zero.gap)),
            ("max_backward_error", num(dec.backward_errors.iter().fold(0.0, |a, &b| a.max(b)))),
            ("orthonormality_error", num(dec.orthonormality_error)),
            ("n_max", co.series.len().to_string()),
            ("n_auto", co.n_auto.to_string()),
            ("D", num(co.d)),
            ("K", num(co.k)),
            ("K_star", num(co.oracle.k_star)),
            ("K_star_error_estimate", num(co.oracle.quad_error_estimate)),
            ("K_rectangle", num(co.oracle.k_rectangle)),
            ("rel_err", num(co.rel_err)),
        ]);
        for (i, s) in self.symmetry.iter().enumerate() {
            rows.push((["symmetry_score_0", "symmetry_score_1"][i], num(s.score)));
            rows.push((["parity_0", "parity_1"][i], s.parity.to_string()));
        }
        rows.push(("symmetry_broken", self.flags.contains(&"symmetry_broken").to_string()));
        rows.push(("drift_mismatch", self.flags.contains(&"drift_mismatch").to_string()));
        let mut s = String::from("key,value\n");
        for (k, v) in rows {
            let _ = writeln!(s, "{k},{v}");
        }
        s
    }
}

fn eigenvalue_csv(dec: &SpectralDecomposition) -> String {
    let mut s = String::from("index,lambda,residual,backward_error\n");
    for i in 0..dec.len() {
        let _ = writeln!(
            s,
            "{i},{},{},{}",
            num(dec.eigenvalues[i]),
            num(dec.residuals[i]),
            num(dec.backward_errors[i])
        );
    }
    s
}

fn to_bytes(f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing to memory");
    buf
}

fn paired(name: &str, plot: Plot) -> [Artifact; 2] {
    let mut log = plot.clone();
    log.y_scale = Scale::Log10;
    [
        Artifact::new(format!("{name}.svg"), plot.render()),
        Artifact::new(format!("{name}_log.svg"), log.render()),
    ]
}

/// Steps 1 to 5 on one point; writes nothing unless every stage succeeds.
pub fn run_single(config: &RunConfig) -> Result<SingleReport, CliError> {
    if config.is_sweep() {
        return Err(CliError::config("single run given a sweep; use the sweep subcommand"));
    }
    let formats = config.output_formats()?;
    let ev = evaluate(config);
    let flags = ev.flags();
    let coefficients = ev.outcome?;
    let (Some(spec), Some(decomposition)) = (ev.spec, ev.decomposition) else {
        unreachable!("successful evaluation keeps its stages");
    };
    let mut report = SingleReport {
        config: config.clone(),
        spec,
        decomposition,
        symmetry: ev.symmetry,
        coefficients,
        flags,
        files: Vec::new(),
    };

    let mut artifacts = Vec::new();
    if formats.contains(&Format::Csv) {
        let dec = &report.decomposition;
        artifacts.push(Artifact::new("eigenvalues.csv", eigenvalue_csv(dec)));
        artifacts.push(Artifact::new("eigenfunctions.csv", to_bytes(|b| dec.write_csv(b))));
        let series = &report.coefficients.series;
        artifacts.push(Artifact::new("coefficients.csv", to_bytes(|b| series.write_csv(b))));
        artifacts.push(Artifact::new("summary.csv", report.summary_csv()));
    }
    if formats.contains(&Format::Svg) {
        let s = &report.coefficients.series;
        let pts = |v: &[f64]| v.iter().enumerate().map(|(i, &y)| ((i + 1) as f64, y)).collect();
        artifacts.extend(paired(
            "partial_sums",
            Plot {
                title: "Truncated coefficients".into(),
                x_label: "N".into(),
                y_label: "partial sum".into(),
                y_scale: Scale::Linear,
                series: vec![
                    Series { label: "D^N".into(), points: pts(&s.d_partial) },
                    Series { label: "K^N".into(), points: pts(&s.k_partial) },
                ],
            },
        ));
    }
    report.files = write_all(&config.output_dir, &artifacts)?;
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub status: &'static str,
    pub message: Option<String>,
    pub mean_velocity: Option<f64>,
    pub lambdas: Vec<Option<f64>>,
    pub d: Option<f64>,
    pub k: Option<f64>,
    pub k_star: Option<f64>,
    pub rel_err: Option<f64>,
    pub n_auto: Option<usize>,
    pub symmetry_scores: Vec<Option<f64>>,
    pub flags: Vec<&'static str>,
}

impl SweepRow {
    fn from_evaluation(value: f64, ev: &Evaluation) -> Self {
        let lambdas = (0..SWEEP_LAMBDAS)
            .map(|i| ev.decomposition.as_ref().and_then(|d| d.eigenvalues.get(i).copied()))
            .collect();
        let ok = ev.outcome.as_ref().ok();
        SweepRow {
            value,
            status: ev.outcome.as_ref().err().map_or("ok", status_tag),
            message: ev.outcome.as_ref().err().map(|e| e.to_string()),
            mean_velocity: ev.spec.as_ref().map(|s| s.mean_velocity()),
            lambdas,
            d: ok.map(|c| c.d),
            k: ok.map(|c| c.k),
            k_star: ok.map(|c| c.oracle.k_star),
            rel_err: ok.map(|c| c.rel_err),
            n_auto: ok.map(|c| c.n_auto),
            symmetry_scores: (0..2).map(|i| ev.symmetry.get(i).map(|s| s.score)).collect(),
            flags: ev.flags(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepReport {
    pub param: SweepParam,
    pub rows: Vec<SweepRow>,
    pub files: Vec<PathBuf>,
}

impl SweepReport {
    /// Long format, one row per sweep value.
    pub fn to_csv(&self) -> String {
        let mut s = format!("{},status,V", self.param.name());
        for i in 0..SWEEP_LAMBDAS {
            let _ = write!(s, ",lambda_{i}");
        }
        s.push_str(",D,K,K_star,rel_err,n_auto,symmetry_score_0,symmetry_score_1,flags\n");
        for r in &self.rows {
            let _ = write!(s, "{},{},{}", num(r.value), r.status, opt(r.mean_velocity));
            for l in &r.lambdas {
                let _ = write!(s, ",{}", opt(*l));
            }
            let _ = write!(
                s,
                ",{},{},{},{},{}",
                opt(r.d),
                opt(r.k),
                opt(r.k_star),
                opt(r.rel_err),
                r.n_auto.map(|n| n.to_string()).unwrap_or_default()
            );
            for sc in &r.symmetry_scores {
                let _ = write!(s, ",{}", opt(*sc));
            }
            let _ = writeln!(s, ",{}", r.flags.join(";"));
        }
        s
    }

    fn column(&self, f: impl Fn(&SweepRow) -> Option<f64>) -> Vec<(f64, f64)> {
        self.rows
            .iter()
            .filter_map(|r| f(r).map(|y| (r.value, y)))
            .collect()
    }
}

/// SVG figures of a sweep: eigenvalues, coefficients and the relative drift
/// error, each as a linear and a log10 panel. Returns nothing unless `svg`
/// is among `formats`.
pub fn emit_plots(report: &SweepReport, formats: &[String]) -> Result<Vec<Artifact>, CliError> {
    let mut svg = false;
    for f in formats {
        svg |= f.parse::<Format>()? == Format::Svg;
    }
    if !svg {
        return Ok(Vec::new());
    }
    let x = report.param.name().to_string();
    let plot = |title: &str, y: &str, series: Vec<Series>| Plot {
        title: title.into(),
        x_label: x.clone(),
        y_label: y.into(),
        y_scale: Scale::Linear,
        series,
    };
    let lambdas = (1..SWEEP_LAMBDAS)
        .map(|j| Series {
            label: format!("lambda_{j}"),
            points: report.column(|r| r.lambdas[j]),
        })
        .collect();
    let coefficients = vec![
        Series { label: "D".into(), points: report.column(|r| r.d) },
        Series { label: "K".into(), points: report.column(|r| r.k) },
        Series { label: "K*".into(), points: report.column(|r| r.k_star) },
    ];
    let rel = vec![Series {
        label: "|K-K*|/K*".into(),
        points: report.column(|r| r.rel_err),
    }];
    let mut out = Vec::new();
    out.extend(paired("eigenvalues", plot("Eigenvalues", "lambda_j", lambdas)));
    out.extend(paired("coefficients", plot("Drift and diffusion", "coefficient", coefficients)));
    out.extend(paired("rel_err", plot("Relative drift error", "relative error", rel)));
    Ok(out)
}

/// Evaluates every sweep point concurrently and records failures per row.
pub fn run_sweep(config: &RunConfig) -> Result<SweepReport, CliError> {
    let (param, values) = config.sweep()?;
    config.output_formats()?;
    let rows: Vec<SweepRow> = values
        .par_iter()
        .map(|&v| SweepRow::from_evaluation(v, &evaluate(&config.at(param, v))))
        .collect();
    let mut report = SweepReport {
        param,
        rows,
        files: Vec::new(),
    };
    let mut artifacts = Vec::new();
    if config.output_formats()?.contains(&Format::Csv) {
        artifacts.push(Artifact::new("sweep.csv", report.to_csv()));
    }
    artifacts.extend(emit_plots(&report, &config.formats)?);
    report.files = write_all(&config.output_dir, &artifacts)?;
    Ok(report)
}

#[derive(Debug)]
pub struct EigsReport {
    pub decomposition: SpectralDecomposition,
    /// `Err` carries the collapse message; eigenvalues are still reported.
    pub zero: Result<ZeroMode, String>,
    pub symmetry: Vec<SymmetryScore>,
    pub files: Vec<PathBuf>,
}

/// Eigenpairs only, with the zero-mode and symmetry diagnostics reported
/// rather than enforced.
pub fn run_eigs(config: &RunConfig, dump_matrices: bool) -> Result<EigsReport, CliError> {
    if config.is_sweep() {
        return Err(CliError::config("eigs does not take a sweep"));
    }
    config.validate()?;
    let spec = config.potential()?;
    let (op, mesh): (DiscreteOperator, Option<Mesh>) = match config.scheme {
        SchemeKind::Fem => {
            let mesh = build_mesh(config.r, config.n_elements, config.degree, config.quad_degree)?;
            (assemble(&mesh, &spec)?, Some(mesh))
        }
        SchemeKind::Fd => (assemble_fd(config.r, config.fd_points, &spec)?, None),
    };
    let dec = lowest_eigenpairs_with(&op, config.n_max + 1, config.tol, config.eigen_method()?)?;
    let symmetry = mesh
        .as_ref()
        .map(|m| symmetry_of(&dec, m, &spec, config.s_tol))
        .unwrap_or_default();
    let zero = identify_zero_mode(&dec, config.tol_zero).map_err(|e| e.to_string());

    let mut artifacts = Vec::new();
    if config.output_formats()?.contains(&Format::Csv) {
        artifacts.push(Artifact::new("eigenvalues.csv", eigenvalue_csv(&dec)));
        artifacts.push(Artifact::new("eigenfunctions.csv", to_bytes(|b| dec.write_csv(b))));
    }
    if dump_matrices {
        artifacts.push(Artifact::new("operator.txt", to_bytes(|b| op.write_triplets(b))));
    }
    let files = write_all(&config.output_dir, &artifacts)?;
    Ok(EigsReport {
        decomposition: dec,
        zero,
        symmetry,
        files,
    })
}

/// The one-dimensional drift formula alone.
pub fn run_oracle(config: &RunConfig) -> Result<OracleResult, CliError> {
    if config.is_sweep() {
        return Err(CliError::config("oracle does not take a sweep"));
    }
    config.validate()?;
    Ok(drift_oracle(&config.potential()?)?)
}
