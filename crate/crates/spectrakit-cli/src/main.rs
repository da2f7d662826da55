//! Command-line front end: configure a kernel/basis/method, run the
//! computation, and emit a machine-readable table (CSV or JSON) with a
//! provenance block sufficient to re-run it.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 usage error.

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use spectrakit::*;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

// ---------------------------------------------------------------------------
// argument surface

#[derive(Parser, Debug)]
#[command(
    name = "spectrakit",
    about = "Eigenvalues of covariance operators of Gaussian processes",
    version
)]
struct Cli {
    /// JSON config file; command-line flags override its values.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output format.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output path; stdout when omitted.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Format {
    Csv,
    Json,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Emit {
    Spectrum,
    Cumulants,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "lowercase")]
enum Route {
    Eigen,
    Direct,
}

/// Kernel, basis, and discretization parameters shared by the spectral
/// commands.
#[derive(Args, Debug, Default, Clone)]
struct ModelArgs {
    /// Kernel id: cvm, hn2000, eks2021, bh_rho, k0_exp, k2001, ebnerkz,
    /// hjm_c, deh_k, vonmises, bhep.
    #[arg(long)]
    kernel: Option<String>,
    /// Concentration parameter of the vonmises kernel.
    #[arg(long)]
    tau: Option<f64>,
    /// Dimension of the bhep kernel (1..=3).
    #[arg(long)]
    d: Option<usize>,
    /// Basis family: legendre01, laguerre_exp, hermite_gauss,
    /// charlier_poisson, tensor_hermite. Inferred from the kernel's
    /// support when omitted.
    #[arg(long)]
    basis: Option<String>,
    /// Weight decay parameter of the exponential / Gaussian weights.
    #[arg(long)]
    gamma: Option<f64>,
    /// Poisson weight mean (charlier_poisson basis).
    #[arg(long)]
    rho: Option<f64>,
    /// Quadrature order override.
    #[arg(long)]
    quad_order: Option<usize>,
    /// Poisson truncation point override.
    #[arg(long)]
    charlier_v: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Rayleigh-Ritz spectrum (or cumulants) of a kernel.
    Rr {
        #[command(flatten)]
        model: ModelArgs,
        /// Basis size.
        #[arg(long)]
        n: Option<usize>,
        /// Comma-separated ascending basis sizes for a convergence sweep.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        /// Number of leading eigenvalues reported.
        #[arg(long)]
        top: Option<usize>,
        /// What to emit: the spectrum or the first four cumulants.
        #[arg(long, value_enum)]
        emit: Option<Emit>,
    },
    /// Symmetrized grid discretization cross-check.
    Grid {
        #[command(flatten)]
        model: ModelArgs,
        /// Truncation half-width (real line) or width (half line).
        #[arg(long)]
        a: Option<f64>,
        /// Grid resolution.
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// Monte Carlo Nystrom cross-check.
    Mc {
        #[command(flatten)]
        model: ModelArgs,
        /// Samples per replication.
        #[arg(long = "N")]
        n_samples: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        top: Option<usize>,
    },
    /// First four cumulants of the limit distribution.
    Cumulants {
        #[command(flatten)]
        model: ModelArgs,
        /// eigen: power traces of the Rayleigh-Ritz Gram matrix (needs
        /// --n); direct: kernel iterates on quadrature nodes.
        #[arg(long, value_enum)]
        route: Option<Route>,
        #[arg(long)]
        n: Option<usize>,
    },
    /// Quantile of sum(lambda_j N_j^2) by Imhof inversion.
    Quantile {
        /// Comma-separated eigenvalues.
        #[arg(long, value_delimiter = ',')]
        eigs: Option<Vec<f64>>,
        /// JSON file carrying eigenvalues (a spectrum emitted by this
        /// tool, or {"eigenvalues": [...]}).
        #[arg(long)]
        eigs_from: Option<PathBuf>,
        #[arg(long)]
        p: Option<f64>,
    },
    /// Upper tail probability P(W > x) by Imhof inversion.
    Tail {
        #[arg(long, value_delimiter = ',')]
        eigs: Option<Vec<f64>>,
        #[arg(long)]
        eigs_from: Option<PathBuf>,
        #[arg(long)]
        x: Option<f64>,
    },
    /// Approximate Bahadur slopes from a tabulated limit function b.
    Bahadur {
        /// Largest eigenvalue of the covariance operator.
        #[arg(long)]
        lambda1: Option<f64>,
        /// Tabulated b as comma-separated theta:value pairs,
        /// e.g. "0:0,0.1:0.052,0.2:0.101".
        #[arg(long)]
        b_table: Option<String>,
        /// Tabulated Kullback-Leibler distance K(theta), same syntax;
        /// enables the efficiency column.
        #[arg(long)]
        kl_table: Option<String>,
        /// Evaluation points; defaults to the thetas of --b-table.
        #[arg(long, value_delimiter = ',')]
        theta: Option<Vec<f64>>,
    },
    /// Re-run a named reference table; see --list.
    Reproduce {
        preset: Option<String>,
        /// List available presets.
        #[arg(long)]
        list: bool,
    },
}

// ---------------------------------------------------------------------------
// config file

/// JSON mirror of the command-line surface. Unknown keys are rejected.
#[derive(Deserialize, Debug, Default)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    command: Option<String>,
    kernel: Option<String>,
    tau: Option<f64>,
    d: Option<usize>,
    basis: Option<String>,
    gamma: Option<f64>,
    rho: Option<f64>,
    quad_order: Option<usize>,
    charlier_v: Option<usize>,
    n: Option<usize>,
    n_list: Option<Vec<usize>>,
    top: Option<usize>,
    emit: Option<Emit>,
    route: Option<Route>,
    a: Option<f64>,
    m: Option<usize>,
    #[serde(rename = "N")]
    n_samples: Option<usize>,
    reps: Option<usize>,
    seed: Option<u64>,
    eigs: Option<Vec<f64>>,
    eigs_from: Option<PathBuf>,
    p: Option<f64>,
    x: Option<f64>,
    lambda1: Option<f64>,
    b_table: Option<String>,
    kl_table: Option<String>,
    theta: Option<Vec<f64>>,
    preset: Option<String>,
    format: Option<Format>,
    output: Option<PathBuf>,
}

// ---------------------------------------------------------------------------
// errors

enum CliError {
    /// Bad flags, config, or parameterization.
    Usage(String),
    /// The computation itself failed.
    Numerical(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            // parameterization problems are usage errors; instability and
            // asymmetry are numerical failures
            Error::NotSymmetric(_) | Error::Unstable(_) => CliError::Numerical(e.to_string()),
            other => CliError::Usage(other.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

// ---------------------------------------------------------------------------
// output table

#[derive(Clone)]
enum Cell {
    Str(String),
    Int(u64),
    Num(f64),
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Str(s) if s.contains(',') || s.contains('"') => {
                format!("\"{}\"", s.replace('"', "\"\""))
            }
            Cell::Str(s) => s.clone(),
            Cell::Int(i) => i.to_string(),
            Cell::Num(x) => format!("{x:.9e}"),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            Cell::Str(s) => serde_json::Value::from(s.clone()),
            Cell::Int(i) => serde_json::Value::from(*i),
            Cell::Num(x) => serde_json::Value::from(*x),
        }
    }
}

struct Table {
    columns: Vec<String>,
    rows: Vec<Vec<Cell>>,
    provenance: serde_json::Value,
}

impl Table {
    fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => {
                let mut out = String::new();
                out.push_str(&format!("# provenance: {}\n", self.provenance));
                out.push_str(&self.columns.join(","));
                out.push('\n');
                for row in &self.rows {
                    let cells: Vec<String> = row.iter().map(Cell::csv).collect();
                    out.push_str(&cells.join(","));
                    out.push('\n');
                }
                out
            }
            Format::Json => {
                let rows: Vec<Vec<serde_json::Value>> = self
                    .rows
                    .iter()
                    .map(|r| r.iter().map(Cell::json).collect())
                    .collect();
                let doc = serde_json::json!({
                    "columns": self.columns,
                    "rows": rows,
                    "provenance": self.provenance,
                });
                let mut s = serde_json::to_string_pretty(&doc).unwrap();
                s.push('\n');
                s
            }
        }
    }
}

fn provenance_json(p: &ritz::Provenance) -> serde_json::Value {
    serde_json::to_value(p).unwrap()
}

// ---------------------------------------------------------------------------
// model resolution

struct Model {
    kernel: KernelSpec,
    basis: BasisFamily,
    opts: ritz::RitzOptions,
}

fn require<T>(v: Option<T>, name: &str) -> CliResult<T> {
    v.ok_or_else(|| CliError::usage(format!("missing required parameter: {name}")))
}

fn build_kernel(m: &ModelArgs) -> CliResult<KernelSpec> {
    let name = require(m.kernel.as_deref(), "kernel")?;
    let id = KernelId::from_name(name)
        .ok_or_else(|| CliError::usage(format!("unknown kernel: {name}")))?;
    let spec = match id {
        KernelId::VonMises => KernelSpec::von_mises(require(m.tau, "tau (vonmises kernel)")?)?,
        KernelId::Bhep => KernelSpec::bhep(require(m.d, "d (bhep kernel)")?)?,
        other => KernelSpec::new(other)?,
    };
    Ok(spec)
}

/// Basis from an explicit family name, or the natural family for the
/// kernel's support. `allow_zero_gamma` admits the flat half-line weight
/// used by the grid tables.
fn build_basis(m: &ModelArgs, kernel: &KernelSpec, allow_zero_gamma: bool) -> CliResult<BasisFamily> {
    let kind = match m.basis.as_deref() {
        Some("legendre01") => BasisKind::Legendre01,
        Some("laguerre_exp") => BasisKind::LaguerreExp,
        Some("hermite_gauss") => BasisKind::HermiteGauss,
        Some("charlier_poisson") => BasisKind::CharlierPoisson,
        Some("tensor_hermite") => BasisKind::TensorHermite,
        Some(other) => return Err(CliError::usage(format!("unknown basis: {other}"))),
        None => match kernel.support() {
            Support::Unit => BasisKind::Legendre01,
            Support::HalfLine => BasisKind::LaguerreExp,
            Support::Real => BasisKind::HermiteGauss,
            Support::Naturals => BasisKind::CharlierPoisson,
            Support::RealD(_) => BasisKind::TensorHermite,
        },
    };
    let basis = match kind {
        BasisKind::Legendre01 => BasisFamily::legendre01(),
        BasisKind::LaguerreExp => {
            let gamma = require(m.gamma, "gamma (laguerre_exp basis)")?;
            if gamma == 0.0 && allow_zero_gamma {
                let mut b = BasisFamily::laguerre_exp(1.0)?;
                b.gamma = Some(0.0);
                b
            } else {
                BasisFamily::laguerre_exp(gamma)?
            }
        }
        BasisKind::HermiteGauss => BasisFamily::hermite_gauss(require(m.gamma, "gamma (hermite_gauss basis)")?)?,
        BasisKind::CharlierPoisson => BasisFamily::charlier_poisson(require(m.rho, "rho (charlier_poisson basis)")?)?,
        BasisKind::TensorHermite => BasisFamily::tensor_hermite(
            require(m.gamma, "gamma (tensor_hermite basis)")?,
            kernel.dim(),
        )?,
    };
    let compatible = matches!(
        (kernel.support(), basis.support()),
        (Support::Real, Support::RealD(1)) | (Support::RealD(1), Support::Real)
    ) || kernel.support() == basis.support();
    if !compatible {
        return Err(CliError::usage(format!(
            "support mismatch: kernel lives on {}, basis on {}",
            kernel.support(),
            basis.support()
        )));
    }
    Ok(basis)
}

fn build_model(m: &ModelArgs, allow_zero_gamma: bool) -> CliResult<Model> {
    let kernel = build_kernel(m)?;
    let basis = build_basis(m, &kernel, allow_zero_gamma)?;
    Ok(Model {
        kernel,
        basis,
        opts: ritz::RitzOptions {
            quad_order: m.quad_order,
            charlier_v: m.charlier_v,
            top_m: None,
        },
    })
}

// ---------------------------------------------------------------------------
// commands

fn run_rr(
    model: &ModelArgs,
    n: Option<usize>,
    n_list: Option<Vec<usize>>,
    top: Option<usize>,
    emit: Option<Emit>,
) -> CliResult<Table> {
    let m = build_model(model, false)?;
    if let Some(list) = n_list {
        let top = top.unwrap_or(5);
        let rows = ritz::convergence_sweep(&m.kernel, &m.basis, &list, top, &m.opts)?;
        let mut columns = vec!["n".to_string()];
        columns.extend((1..=top).map(|i| format!("lambda{i}")));
        let last = ritz::rr_spectrum(&m.kernel, &m.basis, *list.last().unwrap(), &m.opts)?;
        let mut provenance = provenance_json(&last.provenance);
        provenance["n_list"] = serde_json::to_value(&list).unwrap();
        Ok(Table {
            columns,
            rows: rows
                .into_iter()
                .map(|(n, lams)| {
                    let mut row = vec![Cell::Int(n as u64)];
                    row.extend(lams.into_iter().map(Cell::Num));
                    row
                })
                .collect(),
            provenance,
        })
    } else {
        let n = require(n, "n")?;
        match emit.unwrap_or(Emit::Spectrum) {
            Emit::Spectrum => {
                let spec = ritz::rr_spectrum(&m.kernel, &m.basis, n, &m.opts)?;
                let top = top.unwrap_or(10).min(spec.eigenvalues.len());
                Ok(Table {
                    columns: vec!["rank".into(), "eigenvalue".into()],
                    rows: (0..top)
                        .map(|i| vec![Cell::Int(i as u64 + 1), Cell::Num(spec.eigenvalues[i])])
                        .collect(),
                    provenance: provenance_json(&spec.provenance),
                })
            }
            Emit::Cumulants => {
                let gram = ritz::gram_matrix(&m.kernel, &m.basis, n, &m.opts)?;
                let kappa = gram.cumulants();
                Ok(Table {
                    columns: vec![
                        "route".into(),
                        "kappa1".into(),
                        "kappa2".into(),
                        "kappa3".into(),
                        "kappa4".into(),
                    ],
                    rows: vec![{
                        let mut row = vec![Cell::Str("eigen".into())];
                        row.extend(kappa.into_iter().map(Cell::Num));
                        row
                    }],
                    provenance: provenance_json(&gram.provenance),
                })
            }
        }
    }
}

fn run_grid(model: &ModelArgs, a: Option<f64>, m: Option<usize>, top: Option<usize>) -> CliResult<Table> {
    let mdl = build_model(model, true)?;
    let cfg = alt::GridConfig {
        kernel: mdl.kernel,
        weight: mdl.basis,
        a: require(a, "a")?,
        m: require(m, "m")?,
        top_m: top,
    };
    let spec = alt::grid_spectrum(&cfg)?;
    let top = top.unwrap_or(10).min(spec.eigenvalues.len());
    Ok(Table {
        columns: vec!["rank".into(), "eigenvalue".into()],
        rows: (0..top)
            .map(|i| vec![Cell::Int(i as u64 + 1), Cell::Num(spec.eigenvalues[i])])
            .collect(),
        provenance: provenance_json(&spec.provenance),
    })
}

fn run_mc(
    model: &ModelArgs,
    n_samples: Option<usize>,
    reps: Option<usize>,
    seed: Option<u64>,
    top: Option<usize>,
) -> CliResult<Table> {
    let mdl = build_model(model, false)?;
    let cfg = alt::McConfig {
        kernel: mdl.kernel.clone(),
        weight: mdl.basis.clone(),
        n_samples: require(n_samples, "N")?,
        replications: reps.unwrap_or(1),
        seed: seed.unwrap_or(0),
        top_m: top.unwrap_or(5),
    };
    let summary = alt::mc_replicate(&cfg)?;
    let provenance = serde_json::json!({
        "method": "nystrom-mc",
        "kernel": mdl.kernel,
        "weight": mdl.basis,
        "N": cfg.n_samples,
        "replications": cfg.replications,
        "seed": cfg.seed,
    });
    Ok(Table {
        columns: vec!["rank".into(), "mean".into(), "sd".into()],
        rows: summary
            .stats
            .iter()
            .enumerate()
            .map(|(i, (mean, sd))| vec![Cell::Int(i as u64 + 1), Cell::Num(*mean), Cell::Num(*sd)])
            .collect(),
        provenance,
    })
}

fn run_cumulants(model: &ModelArgs, route: Option<Route>, n: Option<usize>) -> CliResult<Table> {
    let mdl = build_model(model, false)?;
    let (label, kappa, provenance) = match route.unwrap_or(Route::Eigen) {
        Route::Eigen => {
            let n = require(n, "n (eigen route)")?;
            let gram = ritz::gram_matrix(&mdl.kernel, &mdl.basis, n, &mdl.opts)?;
            let kappa = gram.cumulants();
            ("eigen", kappa, provenance_json(&gram.provenance))
        }
        Route::Direct => {
            let order = model.quad_order.unwrap_or(512);
            let rule = if mdl.basis.kind == BasisKind::CharlierPoisson {
                quad::charlier_rule(mdl.basis.rho.unwrap(), model.charlier_v)
            } else {
                quad::QuadratureRule::for_family(&mdl.basis, order, model.charlier_v)?
            };
            let set = dist::cumulants_direct(&mdl.kernel, &rule)?;
            let provenance = serde_json::json!({
                "method": "direct-iterates",
                "kernel": mdl.kernel,
                "weight": mdl.basis,
                "quad_order": rule.nodes.len(),
            });
            ("direct", set.kappa, provenance)
        }
    };
    Ok(Table {
        columns: vec![
            "route".into(),
            "kappa1".into(),
            "kappa2".into(),
            "kappa3".into(),
            "kappa4".into(),
        ],
        rows: vec![{
            let mut row = vec![Cell::Str(label.into())];
            row.extend(kappa.into_iter().map(Cell::Num));
            row
        }],
        provenance,
    })
}

/// Eigenvalues from --eigs or from a JSON file: either a spectrum table
/// emitted by this tool (rank/eigenvalue columns) or any object with an
/// "eigenvalues" array.
fn load_eigs(eigs: Option<Vec<f64>>, eigs_from: Option<PathBuf>) -> CliResult<Vec<f64>> {
    match (eigs, eigs_from) {
        (Some(v), None) => Ok(v),
        (None, Some(path)) => {
            let text = std::fs::read_to_string(&path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            let doc: serde_json::Value = serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("{} is not JSON: {e}", path.display())))?;
            if let Some(arr) = doc.get("eigenvalues").and_then(|v| v.as_array()) {
                return arr
                    .iter()
                    .map(|v| {
                        v.as_f64()
                            .ok_or_else(|| CliError::usage("non-numeric eigenvalue"))
                    })
                    .collect();
            }
            let cols = doc.get("columns").and_then(|v| v.as_array());
            let rows = doc.get("rows").and_then(|v| v.as_array());
            if let (Some(cols), Some(rows)) = (cols, rows) {
                if let Some(idx) = cols.iter().position(|c| c.as_str() == Some("eigenvalue")) {
                    return rows
                        .iter()
                        .map(|r| {
                            r.get(idx)
                                .and_then(|v| v.as_f64())
                                .ok_or_else(|| CliError::usage("non-numeric eigenvalue"))
                        })
                        .collect();
                }
            }
            Err(CliError::usage(format!(
                "{}: no \"eigenvalues\" array and no eigenvalue column",
                path.display()
            )))
        }
        (Some(_), Some(_)) => Err(CliError::usage("pass either --eigs or --eigs-from, not both")),
        (None, None) => Err(CliError::usage("missing required parameter: eigs or eigs-from")),
    }
}

fn tail_model(eigs: Vec<f64>) -> CliResult<dist::TailModel> {
    let mut sorted = eigs;
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(dist::TailModel::new(sorted)?)
}

fn run_quantile(eigs: Vec<f64>, p: f64) -> CliResult<Table> {
    let model = tail_model(eigs)?;
    let q = dist::quantile(&model, p).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(Table {
        columns: vec!["p".into(), "quantile".into()],
        rows: vec![vec![Cell::Num(p), Cell::Num(q)]],
        provenance: serde_json::json!({
            "method": "imhof-quantile",
            "eigenvalues": model.eigenvalues(),
        }),
    })
}

fn run_tail(eigs: Vec<f64>, x: f64) -> CliResult<Table> {
    let model = tail_model(eigs)?;
    let t = dist::imhof_tail(&model, x).map_err(|e| CliError::Numerical(e.to_string()))?;
    Ok(Table {
        columns: vec!["x".into(), "tail".into()],
        rows: vec![vec![Cell::Num(x), Cell::Num(t)]],
        provenance: serde_json::json!({
            "method": "imhof-tail",
            "eigenvalues": model.eigenvalues(),
        }),
    })
}

/// Parse "theta:value,theta:value,..." into sorted pairs.
fn parse_pairs(text: &str, name: &str) -> CliResult<Vec<(f64, f64)>> {
    let mut pairs = Vec::new();
    for chunk in text.split(',') {
        let (t, v) = chunk
            .split_once(':')
            .ok_or_else(|| CliError::usage(format!("{name}: expected theta:value, got {chunk:?}")))?;
        let t: f64 = t
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{name}: bad theta {t:?}")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| CliError::usage(format!("{name}: bad value {v:?}")))?;
        pairs.push((t, v));
    }
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
        return Err(CliError::usage(format!("{name}: duplicate theta")));
    }
    Ok(pairs)
}

/// Piecewise-linear interpolation; extrapolation is an error.
fn interpolate(pairs: &[(f64, f64)], t: f64) -> CliResult<f64> {
    let (lo, hi) = (pairs.first().unwrap().0, pairs.last().unwrap().0);
    if t < lo || t > hi {
        return Err(CliError::usage(format!(
            "theta {t} outside the tabulated range [{lo}, {hi}]"
        )));
    }
    let i = pairs.partition_point(|p| p.0 <= t).min(pairs.len() - 1);
    let (t0, v0) = pairs[i - 1];
    let (t1, v1) = pairs[i];
    Ok(v0 + (v1 - v0) * (t - t0) / (t1 - t0))
}

fn run_bahadur(
    lambda1: Option<f64>,
    b_table: Option<String>,
    kl_table: Option<String>,
    theta: Option<Vec<f64>>,
) -> CliResult<Table> {
    let lambda1 = require(lambda1, "lambda1")?;
    if !(lambda1 > 0.0) {
        return Err(CliError::usage("lambda1 must be positive"));
    }
    let b = parse_pairs(&require(b_table.as_deref(), "b-table")?, "b-table")?;
    if b.len() < 2 {
        return Err(CliError::usage("b-table needs at least two points"));
    }
    let kl = kl_table
        .as_deref()
        .map(|t| parse_pairs(t, "kl-table"))
        .transpose()?;
    let thetas: Vec<f64> = theta.unwrap_or_else(|| b.iter().map(|p| p.0).collect());
    let mut columns = vec!["theta".to_string(), "b".to_string(), "slope".to_string()];
    if kl.is_some() {
        columns.push("efficiency".to_string());
    }
    let mut rows = Vec::new();
    for t in thetas {
        let bv = interpolate(&b, t)?;
        let slope = bv * bv / lambda1;
        let mut row = vec![Cell::Num(t), Cell::Num(bv), Cell::Num(slope)];
        if let Some(kl) = &kl {
            let k = interpolate(kl, t)?;
            if !(k > 0.0) {
                return Err(CliError::usage(format!("K({t}) must be positive, got {k}")));
            }
            row.push(Cell::Num(slope / (2.0 * k)));
        }
        rows.push(row);
    }
    Ok(Table {
        columns,
        rows,
        provenance: serde_json::json!({
            "method": "bahadur-approx-slope",
            "lambda1": lambda1,
            "b_table": b,
            "kl_table": kl,
        }),
    })
}

// ---------------------------------------------------------------------------
// reproduce presets

mod presets;

// ---------------------------------------------------------------------------
// config merge and dispatch

fn merge<T>(flag: Option<T>, file: Option<T>) -> Option<T> {
    flag.or(file)
}

fn merge_model(mut m: ModelArgs, f: &FileConfig) -> ModelArgs {
    m.kernel = merge(m.kernel, f.kernel.clone());
    m.tau = merge(m.tau, f.tau);
    m.d = merge(m.d, f.d);
    m.basis = merge(m.basis, f.basis.clone());
    m.gamma = merge(m.gamma, f.gamma);
    m.rho = merge(m.rho, f.rho);
    m.quad_order = merge(m.quad_order, f.quad_order);
    m.charlier_v = merge(m.charlier_v, f.charlier_v);
    m
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Rr { .. } => "rr",
        Command::Grid { .. } => "grid",
        Command::Mc { .. } => "mc",
        Command::Cumulants { .. } => "cumulants",
        Command::Quantile { .. } => "quantile",
        Command::Tail { .. } => "tail",
        Command::Bahadur { .. } => "bahadur",
        Command::Reproduce { .. } => "reproduce",
    }
}

fn dispatch(cli: Cli, file: FileConfig) -> CliResult<(Table, Format, Option<PathBuf>)> {
    if let Some(cmd) = &file.command {
        if cmd != command_name(&cli.command) {
            return Err(CliError::usage(format!(
                "config file is for command {cmd:?}, invoked command is {:?}",
                command_name(&cli.command)
            )));
        }
    }
    let format = merge(cli.format, file.format).unwrap_or(Format::Csv);
    let output = merge(cli.output, file.output.clone());
    let table = match cli.command {
        Command::Rr { model, n, n_list, top, emit } => run_rr(
            &merge_model(model, &file),
            merge(n, file.n),
            merge(n_list, file.n_list.clone()),
            merge(top, file.top),
            merge(emit, file.emit),
        )?,
        Command::Grid { model, a, m, top } => run_grid(
            &merge_model(model, &file),
            merge(a, file.a),
            merge(m, file.m),
            merge(top, file.top),
        )?,
        Command::Mc { model, n_samples, reps, seed, top } => run_mc(
            &merge_model(model, &file),
            merge(n_samples, file.n_samples),
            merge(reps, file.reps),
            merge(seed, file.seed),
            merge(top, file.top),
        )?,
        Command::Cumulants { model, route, n } => run_cumulants(
            &merge_model(model, &file),
            merge(route, file.route),
            merge(n, file.n),
        )?,
        Command::Quantile { eigs, eigs_from, p } => {
            let eigs = load_eigs(merge(eigs, file.eigs.clone()), merge(eigs_from, file.eigs_from.clone()))?;
            run_quantile(eigs, require(merge(p, file.p), "p")?)?
        }
        Command::Tail { eigs, eigs_from, x } => {
            let eigs = load_eigs(merge(eigs, file.eigs.clone()), merge(eigs_from, file.eigs_from.clone()))?;
            run_tail(eigs, require(merge(x, file.x), "x")?)?
        }
        Command::Bahadur { lambda1, b_table, kl_table, theta } => run_bahadur(
            merge(lambda1, file.lambda1),
            merge(b_table, file.b_table.clone()),
            merge(kl_table, file.kl_table.clone()),
            merge(theta, file.theta.clone()),
        )?,
        Command::Reproduce { preset, list } => {
            if list {
                presets::list_table()
            } else {
                let name = require(merge(preset, file.preset.clone()), "preset")?;
                presets::run(&name)?
            }
        }
    };
    Ok((table, format, output))
}

fn real_main() -> CliResult<()> {
    if let Ok(threads) = std::env::var("SPECTRAKIT_THREADS") {
        let n: usize = threads
            .parse()
            .map_err(|_| CliError::usage(format!("SPECTRAKIT_THREADS must be a positive integer, got {threads:?}")))?;
        if n == 0 {
            return Err(CliError::usage("SPECTRAKIT_THREADS must be positive"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .ok();
    }
    let cli = Cli::parse();
    let file = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::usage(format!("cannot read {}: {e}", path.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::usage(format!("bad config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    let (table, format, output) = dispatch(cli, file)?;
    let rendered = table.render(format);
    match output {
        Some(path) => std::fs::write(&path, rendered)
            .map_err(|e| CliError::Numerical(format!("cannot write {}: {e}", path.display())))?,
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(rendered.as_bytes())
                .map_err(|e| CliError::Numerical(format!("cannot write to stdout: {e}")))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match real_main() {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
