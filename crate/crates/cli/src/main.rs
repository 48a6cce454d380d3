//! `pstlab`: build spin chains, certify perfect state transfer, evolve
//! walks, perform spectral surgery and analyze the X₂-Krawtchouk walk.

mod report;
mod spec;

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pstlab::pst::{
    certify_endpoint_pst_with, ese_scan, exhibits_ese, EseFinding, PstConfig, DEFAULT_MAX_DENOMINATOR, DEFAULT_TOL,
    FIDELITY_TOL, REFUTATION_GRID,
};
use pstlab::spectral::eigendecompose;
use pstlab::surgery::{christoffel_transform, surgery_chain};
use pstlab::walk::{default_time_grid, linspace};
use pstlab::xkrawtchouk::{
    build_band_hamiltonian, build_family, default_horizon, max_transfer_probability, perfect_return, x_amplitudes,
    DegreeEntry, PerfectReturn,
};
use pstlab::{Error, JacobiMatrix, Propagator, PstReport, SurgerySpec};
use serde::Serialize;

use crate::spec::ChainSpec;

#[derive(Parser)]
#[command(
    name = "pstlab",
    version,
    about = "Spin chains, orthogonal polynomials and perfect state transfer"
)]
struct Cli {
    /// Relative tolerance for the transfer criterion.
    #[arg(long, global = true, env = "PSTLAB_TOL")]
    tol: Option<f64>,
    /// Largest denominator accepted when reconstructing gap ratios.
    #[arg(long, global = true)]
    max_denominator: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Chain specification (JSON).
    spec: PathBuf,
    /// Write the output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Spectral data and a transfer certificate for a chain.
    Analyze(Common),
    /// CSV of the amplitude c_nm(t).
    Evolve {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        from: usize,
        #[arg(long)]
        to: usize,
        /// End of the time window; defaults to 2π over the smallest gap.
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 512)]
        points: usize,
    },
    /// Remove spectrum points, rebuild the chain and certify it.
    Surgery {
        #[command(flatten)]
        common: Common,
        /// Comma-separated spectrum indices (ascending order).
        #[arg(long, default_value = "")]
        remove: String,
    },
    /// Scan for early state exclusion before the transfer time.
    Ese {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4096)]
        grid: usize,
    },
    /// Build the X₂-Krawtchouk band Hamiltonian and analyze its walk.
    Xwalk {
        #[command(flatten)]
        common: Common,
        /// Source and target vertices (1-based) of the emitted series.
        #[arg(long, default_value_t = 1)]
        from: usize,
        #[arg(long)]
        to: Option<usize>,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = 16384)]
        points: usize,
        /// Write the amplitude series as CSV to this path.
        #[arg(long)]
        series: Option<PathBuf>,
    },
}

enum Failure {
    Validation(String),
    Numerical(String),
    Refused(String),
    NoTransfer(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Validation(_) => 2,
            Failure::Numerical(_) => 3,
            Failure::Refused(_) => 4,
            Failure::NoTransfer(_) => 5,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Validation(m) | Failure::Numerical(m) | Failure::Refused(m) | Failure::NoTransfer(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match &e {
            Error::SignViolation { .. } => Failure::Refused(e.to_string()),
            _ if e.is_numerical() => Failure::Numerical(e.to_string()),
            _ => Failure::Validation(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Validation(format!("i/o: {e}"))
    }
}

type Outcome<T> = Result<T, Failure>;

#[derive(Serialize)]
struct Tool {
    name: &'static str,
    version: &'static str,
}

const TOOL: Tool = Tool {
    name: "pstlab",
    version: env!("CARGO_PKG_VERSION"),
};

#[derive(Serialize)]
struct Tolerances {
    tol: f64,
    max_denominator: u64,
    refutation_grid: usize,
    fidelity_tol: f64,
}

impl From<&PstConfig> for Tolerances {
    fn from(c: &PstConfig) -> Self {
        Self {
            tol: c.tol,
            max_denominator: c.max_denominator,
            refutation_grid: c.refutation_grid,
            fidelity_tol: FIDELITY_TOL,
        }
    }
}

#[derive(Serialize)]
struct Chain {
    offdiag: Vec<f64>,
    diag: Vec<f64>,
}

#[derive(Serialize)]
struct Spectral {
    eigenvalues: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize)]
struct SurgeryBlock {
    removed: Vec<usize>,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

#[derive(Serialize)]
struct EseBlock {
    grid: usize,
    findings: Vec<EseFinding>,
    exclusion: bool,
}

#[derive(Serialize)]
struct ChainReport<'a> {
    tool: Tool,
    tolerances: Tolerances,
    input: &'a ChainSpec,
    #[serde(skip_serializing_if = "Option::is_none")]
    surgery: Option<SurgeryBlock>,
    chain: Chain,
    spectral: Spectral,
    pst: PstReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    ese: Option<EseBlock>,
}

#[derive(Serialize)]
struct FamilyBlock {
    #[serde(rename = "N")]
    n: usize,
    p: f64,
    degree_map: Vec<DegreeEntry>,
    grid: Vec<i64>,
    weights_hat: Vec<f64>,
    norms: Vec<f64>,
}

#[derive(Serialize)]
struct BandBlock {
    size: usize,
    entries: Vec<Vec<f64>>,
    spectrum_formula: Vec<f64>,
    off_band_max: f64,
    last_row_support: Vec<usize>,
}

#[derive(Serialize)]
struct TransferBlock {
    from: usize,
    to: usize,
    horizon: f64,
    points: usize,
    max_probability: f64,
    at_time: f64,
    perfect: bool,
}

#[derive(Serialize)]
struct SeriesRef {
    path: String,
    from: usize,
    to: usize,
    t_max: f64,
    points: usize,
}

#[derive(Serialize)]
struct XwalkReport<'a> {
    tool: Tool,
    tolerances: Tolerances,
    input: &'a ChainSpec,
    family: FamilyBlock,
    band: BandBlock,
    perfect_return: Option<PerfectReturn>,
    endpoint: TransferBlock,
    #[serde(skip_serializing_if = "Option::is_none")]
    series: Option<SeriesRef>,
}

fn load(path: &Path) -> Outcome<ChainSpec> {
    let text = std::fs::read_to_string(path).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))?;
    ChainSpec::parse(&text).map_err(|e| Failure::Validation(format!("{}: {e}", path.display())))
}

fn chain_of(spec: &ChainSpec, config: &PstConfig, command: &str) -> Outcome<JacobiMatrix> {
    spec.build(config)?.ok_or_else(|| {
        Failure::Validation(format!(
            "{command}: an xkrawtchouk spec describes a band matrix, not a chain; use `pstlab xwalk`"
        ))
    })
}

fn chain_report<'a>(spec: &'a ChainSpec, j: &JacobiMatrix, config: &PstConfig) -> Outcome<ChainReport<'a>> {
    let d = eigendecompose(j)?;
    let pst = certify_endpoint_pst_with(j, config)?;
    Ok(ChainReport {
        tool: TOOL,
        tolerances: config.into(),
        input: spec,
        surgery: None,
        chain: Chain {
            offdiag: j.offdiag().to_vec(),
            diag: j.diag().to_vec(),
        },
        spectral: Spectral {
            eigenvalues: d.eigenvalues,
            weights: d.weights,
        },
        pst,
        ese: None,
    })
}

fn analyze(common: &Common, config: &PstConfig) -> Outcome<String> {
    let spec = load(&common.spec)?;
    let j = chain_of(&spec, config, "analyze")?;
    Ok(report::to_json(&chain_report(&spec, &j, config)?))
}

fn evolve(
    common: &Common,
    config: &PstConfig,
    from: usize,
    to: usize,
    t_max: Option<f64>,
    points: usize,
) -> Outcome<String> {
    let spec = load(&common.spec)?;
    let j = chain_of(&spec, config, "evolve")?;
    let prop = Propagator::new(&j)?;
    let n = j.size();
    for (name, v) in [("--from", from), ("--to", to)] {
        if v >= n {
            return Err(Failure::Validation(format!(
                "{name} {v} is out of range for a chain of size {n}"
            )));
        }
    }
    let times = match t_max {
        Some(t) if !t.is_finite() || t < 0.0 => {
            return Err(Failure::Validation(format!(
                "--t-max {t} must be finite and non-negative"
            )))
        }
        Some(0.0) => vec![0.0],
        _ if points < 2 => return Err(Failure::Validation(format!("--points {points} must be at least 2"))),
        Some(t) => linspace(0.0, t, points),
        None => {
            let grid = default_time_grid(prop.decomposition());
            linspace(0.0, *grid.last().unwrap_or(&(2.0 * PI)), points)
        }
    };
    let mut csv = String::from("t,re,im,prob\n");
    for t in times {
        let c = prop.amplitude(from, to, t)?;
        let _ = writeln!(
            csv,
            "{},{},{},{}",
            report::float(t),
            report::float(c.re),
            report::float(c.im),
            report::float(c.norm_sqr())
        );
    }
    Ok(csv)
}

fn parse_indices(list: &str) -> Outcome<Vec<usize>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse()
                .map_err(|_| Failure::Validation(format!("--remove: `{s}` is not a spectrum index")))
        })
        .collect()
}

fn surgery(common: &Common, config: &PstConfig, remove: &str) -> Outcome<String> {
    let spec = load(&common.spec)?;
    let base = chain_of(&spec, config, "surgery")?;
    let removed = parse_indices(remove)?;
    if removed.is_empty() {
        return Ok(report::to_json(&chain_report(&spec, &base, config)?));
    }
    let transform = SurgerySpec::new(eigendecompose(&base)?, removed.clone())?;
    let (nodes, weights) = christoffel_transform(&transform)?;
    let (j, _) = surgery_chain(&base, &removed, config)?;
    let mut out = chain_report(&spec, &j, config)?;
    out.surgery = Some(SurgeryBlock {
        removed: transform.remove,
        nodes,
        weights,
    });
    Ok(report::to_json(&out))
}

fn ese(common: &Common, config: &PstConfig, grid: usize) -> Outcome<String> {
    let spec = load(&common.spec)?;
    let j = chain_of(&spec, config, "ese")?;
    let mut out = chain_report(&spec, &j, config)?;
    if !out.pst.has_pst {
        return Err(Failure::NoTransfer(
            "ESE undefined without PST: the chain does not certify endpoint transfer".into(),
        ));
    }
    let findings = ese_scan(&j, &out.pst, grid)?;
    out.ese = Some(EseBlock {
        grid,
        exclusion: exhibits_ese(&findings),
        findings,
    });
    Ok(report::to_json(&out))
}

#[allow(clippy::too_many_arguments)]
fn xwalk(
    common: &Common,
    config: &PstConfig,
    from: usize,
    to: Option<usize>,
    t_max: Option<f64>,
    points: usize,
    series: Option<&Path>,
) -> Outcome<String> {
    let spec = load(&common.spec)?;
    let ChainSpec::Xkrawtchouk { n, p } = spec else {
        return Err(Failure::Validation("xwalk needs an xkrawtchouk spec".into()));
    };
    if points < 2 {
        return Err(Failure::Validation(format!("--points {points} must be at least 2")));
    }
    let family = build_family(n, p)?;
    let band = build_band_hamiltonian(&family)?;
    let table = family.eigenvector_table();
    let size = family.size();
    let to = to.unwrap_or(size);
    for (name, v) in [("--from", from), ("--to", to)] {
        if v == 0 || v > size {
            return Err(Failure::Validation(format!("{name} {v} must lie in 1..={size}")));
        }
    }
    let horizon = default_horizon(&band);
    let ret = perfect_return(&band, &table, horizon, 200_000)?;
    let t_max = match t_max {
        Some(t) if !(t.is_finite() && t > 0.0) => {
            return Err(Failure::Validation(format!("--t-max {t} must be positive")))
        }
        Some(t) => t,
        None => ret.map_or(horizon, |r| 8.0 * r.time),
    };
    let (at_time, max_probability) = max_transfer_probability(&band, &table, 1, size, t_max, points)?;

    let series_ref = match series {
        Some(path) => {
            let s = x_amplitudes(&band, &table, from, to, &linspace(0.0, t_max, points))?;
            let mut csv = String::from("t,re,im,prob\n");
            for (t, c) in s.times.iter().zip(&s.values) {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    report::float(*t),
                    report::float(c.re),
                    report::float(c.im),
                    report::float(c.norm_sqr())
                );
            }
            report::emit(&csv, Some(path))?;
            Some(SeriesRef {
                path: path.display().to_string(),
                from,
                to,
                t_max,
                points,
            })
        }
        None => None,
    };

    let out = XwalkReport {
        tool: TOOL,
        tolerances: config.into(),
        input: &spec,
        family: FamilyBlock {
            n,
            p,
            degree_map: family.degree_map(),
            grid: family.grid().to_vec(),
            weights_hat: family.weights_hat().to_vec(),
            norms: family.norms().to_vec(),
        },
        band: BandBlock {
            size: band.size,
            entries: (0..band.size)
                .map(|r| band.entries.row(r).iter().copied().collect())
                .collect(),
            spectrum_formula: band.spectrum_formula.clone(),
            off_band_max: band.off_band_max,
            last_row_support: band.last_row_support.clone(),
        },
        perfect_return: ret,
        endpoint: TransferBlock {
            from: 1,
            to: size,
            horizon: t_max,
            points,
            max_probability,
            at_time,
            perfect: max_probability >= 1.0 - FIDELITY_TOL,
        },
        series: series_ref,
    };
    Ok(report::to_json(&out))
}

fn config(cli: &Cli) -> Outcome<PstConfig> {
    let tol = cli.tol.unwrap_or(DEFAULT_TOL);
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Failure::Validation(format!("tolerance {tol} must be positive")));
    }
    let max_denominator = cli.max_denominator.unwrap_or(DEFAULT_MAX_DENOMINATOR);
    if max_denominator == 0 {
        return Err(Failure::Validation("--max-denominator must be at least 1".into()));
    }
    Ok(PstConfig {
        tol,
        max_denominator,
        refutation_grid: REFUTATION_GRID,
    })
}

fn run(cli: &Cli) -> Outcome<()> {
    let config = config(cli)?;
    let (output, common) = match &cli.command {
        Command::Analyze(common) => (analyze(common, &config)?, common),
        Command::Evolve {
            common,
            from,
            to,
            t_max,
            points,
        } => (evolve(common, &config, *from, *to, *t_max, *points)?, common),
        Command::Surgery { common, remove } => (surgery(common, &config, remove)?, common),
        Command::Ese { common, grid } => (ese(common, &config, *grid)?, common),
        Command::Xwalk {
            common,
            from,
            to,
            t_max,
            points,
            series,
        } => (
            xwalk(common, &config, *from, *to, *t_max, *points, series.as_deref())?,
            common,
        ),
    };
    report::emit(&output, common.out.as_deref())?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
