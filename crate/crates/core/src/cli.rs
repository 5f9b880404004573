//! Command-line front end. Exit codes: 0 success, 1 computed result misses
//! its expectation, 2 usage, parse or input error.

use std::ffi::OsString;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::chain::{
    build_hamiltonian, check_mirror_condition, engineered_couplings, propagator, ChainSpec,
};
use crate::decompose::{closed_form, decompose, reconstruct, ProductDecomposition};
use crate::error::{Error, Result};
use crate::grape::{grape_optimize, GrapeConfig, InitialPulse, NmrSystemSpec};
use crate::linalg::{c, expm_hermitian, unitary_fidelity, CMatrix, MatrixJson};
use crate::mirror::{six_state_design, BellKind, SiteInput, TransferMode, TransferSetup};
use crate::pauli::{Letter, PauliString, SubgroupChain};
use crate::selftest::run_selftest;

pub const EXIT_OK: i32 = 0;
pub const EXIT_UNMET: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "spinmirror", version, about = "Mirror-inverting spin chains: spectra, transfer, Pauli decompositions and GRAPE pulses")]
pub struct Cli {
    /// Worker threads for parallel sections.
    #[arg(long, global = true, env = "SPINMIRROR_THREADS")]
    pub threads: Option<usize>,
    /// Machine-readable output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// More detail in the human summary (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    /// Suppress the human summary.
    #[arg(short, long, global = true)]
    pub quiet: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    /// Pulse table; `grape` only.
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Single-excitation spectrum and the mirror-inversion condition.
    Spectrum(SpectrumArgs),
    /// Product-of-Pauli-exponentials decomposition of a chain propagator or unitary.
    Decompose(DecomposeArgs),
    /// Single-site or Bell-pair transfer through a chain.
    Transfer(TransferArgs),
    /// Optimise a control pulse for a target gate.
    Grape(GrapeArgs),
    /// Seeded randomized consistency checks.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct ChainSource {
    /// Chain specification JSON.
    #[arg(long)]
    pub spec: Option<PathBuf>,
    /// Engineered chain with this many sites.
    #[arg(long)]
    pub n: Option<usize>,
}

impl ChainSource {
    fn load(&self) -> Result<ChainSpec> {
        match (&self.spec, self.n) {
            (Some(path), _) => ChainSpec::from_json(&read(path)?),
            (None, Some(n)) => ChainSpec::engineered(n),
            (None, None) => Err(Error::Validation("give --spec or --n".into())),
        }
    }
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    /// Evolution time.
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub time: f64,
    /// Exit 1 unless the mirror condition holds.
    #[arg(long)]
    pub expect_mirror: bool,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct DecomposeArgs {
    /// Chain specification JSON; the propagator at `--time` is decomposed.
    #[arg(long, group = "input")]
    pub spec: Option<PathBuf>,
    /// Engineered chain with this many sites.
    #[arg(long, group = "input")]
    pub n: Option<usize>,
    /// Unitary as a row-major JSON matrix of `[re, im]` pairs.
    #[arg(long, group = "input")]
    pub unitary: Option<PathBuf>,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub time: f64,
    /// Analytic factorisation of the engineered mirror propagator.
    #[arg(long, group = "method")]
    pub closed_form: bool,
    /// Numerical peeling down an automatically chosen subgroup chain (default).
    #[arg(long, group = "method")]
    pub auto_chain: bool,
    /// Numerical peeling down the subgroup chain in this JSON file.
    #[arg(long, group = "method")]
    pub levels: Option<PathBuf>,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Peeling trace JSON.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TransferArgs {
    #[command(flatten)]
    pub chain: ChainSource,
    #[arg(long, default_value_t = FRAC_PI_2)]
    pub time: f64,
    /// Source site (1-based).
    #[arg(long, conflicts_with = "bell", required_unless_present = "bell")]
    pub site: Option<usize>,
    /// Site input: ±x, ±y, ±z (pure kets, default -z) or x, y, z (deviation, default x).
    #[arg(long, requires = "site")]
    pub state: Option<String>,
    /// Bell pair as `a,b`, followed by the kind (phi+, phi-, psi+, psi-).
    #[arg(long, num_args = 2, value_names = ["A,B", "KIND"])]
    pub bell: Option<Vec<String>>,
    #[arg(long, default_value = "pure")]
    pub mode: String,
    /// Exit 1 below this fidelity.
    #[arg(long, default_value_t = 1.0 - 1e-9)]
    pub min_fidelity: f64,
    #[arg(short, long)]
    pub output: PathBuf,
}

#[derive(Debug, Args)]
pub struct GrapeArgs {
    /// Spin-system JSON; or use `--free-spins`.
    #[arg(long, conflicts_with = "free")]
    pub system: Option<PathBuf>,
    /// Number of uncoupled on-resonance spins, one channel each.
    #[arg(long = "free-spins", id = "free")]
    pub free_spins: Option<usize>,
    /// Target `exp(−iθP)` given as `WORD` or `WORD:θ` (θ defaults to π/2), or `identity`.
    #[arg(long, group = "target_src")]
    pub gate: Option<String>,
    /// Target from a decomposition JSON: the full product, or one factor with `--factor`.
    #[arg(long, group = "target_src")]
    pub target: Option<PathBuf>,
    /// 1-based factor index into `--target`.
    #[arg(long, requires = "target")]
    pub factor: Option<usize>,
    /// Target unitary as a row-major JSON matrix.
    #[arg(long, group = "target_src")]
    pub target_matrix: Option<PathBuf>,
    /// Optimiser settings JSON; individual flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub dt: Option<f64>,
    #[arg(long)]
    pub amp_cap: Option<f64>,
    #[arg(long)]
    pub max_iterations: Option<usize>,
    /// Comma-separated RF scale factors.
    #[arg(long, value_delimiter = ',')]
    pub rf_scales: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub init: Option<Init>,
    /// Exit 1 below this fidelity.
    #[arg(long, default_value_t = 0.99)]
    pub min_fidelity: f64,
    #[arg(short, long)]
    pub output: PathBuf,
    /// Extra pulse CSV alongside the JSON result.
    #[arg(long)]
    pub pulse_csv: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Init {
    Zero,
    Random,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Instances per property.
    #[arg(long, default_value_t = 100)]
    pub cases: usize,
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Parses `args` (program name first) and runs the command; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

/// Exit code for an error: computational failures are 1, bad input is 2.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::DecompositionFailed(_)
        | Error::Stall { .. }
        | Error::NoProperSubgroup(_)
        | Error::UndefinedMetric(_) => EXIT_UNMET,
        _ => EXIT_USAGE,
    }
}

pub fn execute(cli: &Cli) -> Result<i32> {
    if let Some(threads) = cli.threads {
        // only the first configuration in a process takes effect
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    if cli.format == Format::Csv && !matches!(cli.command, Command::Grape(_)) {
        return Err(Error::Validation("csv output is only available for grape".into()));
    }
    let out = Out { quiet: cli.quiet, verbose: cli.verbose };
    match &cli.command {
        Command::Spectrum(a) => spectrum(a, out),
        Command::Decompose(a) => decompose_cmd(a, out),
        Command::Transfer(a) => transfer(a, out),
        Command::Grape(a) => grape(a, cli.format, out),
        Command::Selftest(a) => selftest(a, out),
    }
}

#[derive(Debug, Clone, Copy)]
struct Out {
    quiet: bool,
    verbose: u8,
}

impl Out {
    fn say(&self, line: impl AsRef<str>) {
        if !self.quiet {
            println!("{}", line.as_ref());
        }
    }

    fn detail(&self, line: impl AsRef<str>) {
        if !self.quiet && self.verbose > 0 {
            println!("{}", line.as_ref());
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

fn read_matrix(path: &Path) -> Result<CMatrix> {
    serde_json::from_str::<MatrixJson>(&read(path)?)?.to_matrix()
}

fn spectrum(a: &SpectrumArgs, out: Out) -> Result<i32> {
    let spec = a.chain.load()?;
    let report = check_mirror_condition(&spec, a.time)?;
    write_json(&a.output, &report)?;
    out.say(format!(
        "N = {}  t = {}  mirror condition {}",
        report.n,
        report.time,
        if report.satisfied { "satisfied" } else { "not satisfied" }
    ));
    for m in &report.modes {
        let witness = m.witness.map_or("-".to_string(), |w| w.to_string());
        out.detail(format!(
            "  k = {:2}  λ = {:+.12}  parity {:+}  n = {witness}",
            m.label, m.eigenvalue, m.parity
        ));
    }
    Ok(if a.expect_mirror && !report.satisfied { EXIT_UNMET } else { EXIT_OK })
}

fn is_engineered(spec: &ChainSpec) -> Result<bool> {
    let ideal = engineered_couplings(spec.n_sites())?;
    Ok(spec.couplings().iter().zip(&ideal).all(|(a, b)| (a - b).abs() <= 1e-12)
        && spec.fields().iter().all(|h| *h == 0.0))
}

fn decompose_cmd(a: &DecomposeArgs, out: Out) -> Result<i32> {
    let spec = match (&a.spec, a.n, &a.unitary) {
        (Some(path), _, _) => Some(ChainSpec::from_json(&read(path)?)?),
        (None, Some(n), _) => Some(ChainSpec::engineered(n)?),
        (None, None, Some(_)) => None,
        _ => return Err(Error::Validation("give one of --spec, --n or --unitary".into())),
    };
    let u = match (&spec, &a.unitary) {
        (Some(spec), _) => propagator(&build_hamiltonian(spec)?, a.time)?,
        (None, Some(path)) => read_matrix(path)?,
        (None, None) => unreachable!(),
    };
    let (decomposition, trace) = if a.closed_form {
        let Some(spec) = &spec else {
            return Err(Error::Validation("--closed-form needs a chain, not a matrix".into()));
        };
        if !is_engineered(spec)? || (a.time - FRAC_PI_2).abs() > 1e-12 {
            return Err(Error::Domain(
                "the closed form covers the engineered chain at t = π/2 only".into(),
            ));
        }
        (closed_form(spec.n_sites())?, None)
    } else {
        let chain = match &a.levels {
            Some(path) => Some(serde_json::from_str::<SubgroupChain>(&read(path)?)?),
            None => None,
        };
        let (d, t) = decompose(&u, chain.as_ref())?;
        (d, Some(t))
    };
    let fidelity = unitary_fidelity(&reconstruct(&decomposition)?, &u);
    fs::write(&a.output, decomposition.to_json()? + "\n")?;
    if let (Some(path), Some(trace)) = (&a.trace, &trace) {
        write_json(path, trace)?;
    }
    out.say(format!(
        "{} factors, global phase {:+.6}{:+.6}i",
        decomposition.len(),
        decomposition.global_phase().re,
        decomposition.global_phase().im
    ));
    for f in decomposition.factors() {
        out.detail(format!("  exp(-i·{:+.12}·{})", f.angle, f.word));
    }
    out.say(format!("reconstruction fidelity {fidelity:.15}"));
    Ok(if fidelity >= 1.0 - crate::decompose::ROUND_TRIP_TOLERANCE { EXIT_OK } else { EXIT_UNMET })
}

fn site_input(state: &str, mode: TransferMode) -> Result<SiteInput> {
    match mode {
        TransferMode::Pure => six_state_design()
            .into_iter()
            .find(|(label, _)| *label == state.to_ascii_lowercase())
            .map(|(_, ket)| SiteInput::Ket(ket))
            .ok_or_else(|| Error::Parse(format!("unknown pure state {state:?} (±x, ±y, ±z)"))),
        TransferMode::Deviation => {
            let s = state.to_ascii_lowercase();
            let (sign, axis) = match s.strip_prefix('-') {
                Some(rest) => (-1.0, rest),
                None => (1.0, s.strip_prefix('+').unwrap_or(&s)),
            };
            let letter = match axis {
                "x" => Letter::X,
                "y" => Letter::Y,
                "z" => Letter::Z,
                _ => return Err(Error::Parse(format!("unknown deviation {state:?} (x, y, z)"))),
            };
            let sigma = PauliString::from_letters(&[letter])?.matrix()?;
            Ok(SiteInput::Deviation(sigma * c(sign, 0.0)))
        }
    }
}

fn parse_pair(text: &str) -> Result<(usize, usize)> {
    let bad = || Error::Parse(format!("Bell pair {text:?} must look like 1,2"));
    let (a, b) = text.split_once(',').ok_or_else(bad)?;
    Ok((a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?))
}

fn transfer(a: &TransferArgs, out: Out) -> Result<i32> {
    let mode: TransferMode = a.mode.parse()?;
    let setup = TransferSetup::new(a.chain.load()?, a.time)?;
    let report = match (&a.bell, a.site) {
        (Some(bell), _) => setup.entangled(parse_pair(&bell[0])?, bell[1].parse::<BellKind>()?, mode)?,
        (None, Some(site)) => {
            let default = if mode == TransferMode::Pure { "-z" } else { "x" };
            let input = site_input(a.state.as_deref().unwrap_or(default), mode)?;
            setup.single(site, &input)?
        }
        (None, None) => return Err(Error::Validation("give --site or --bell".into())),
    };
    write_json(&a.output, &report)?;
    let sites = |s: &[usize]| s.iter().map(usize::to_string).collect::<Vec<_>>().join(",");
    out.say(format!(
        "N = {}  ({}) -> ({})  F = {:.12}  c = {:.12}",
        report.n,
        sites(&report.source_sites),
        sites(&report.destination_sites),
        report.fidelity,
        report.attenuated_correlation
    ));
    if let (Some(i), Some(o), Some(p)) = (report.bell_input, report.bell_output, report.bell_overlap) {
        out.say(format!("Bell {i} arrives as {o} (overlap {p:.12})"));
    }
    if !report.exact_mirror {
        out.detail("propagator is not an exact mirror; sector phases were estimated");
    }
    Ok(if report.fidelity >= a.min_fidelity { EXIT_OK } else { EXIT_UNMET })
}

fn parse_gate(text: &str, n: usize) -> Result<CMatrix> {
    let dim = 1usize << n;
    if text.eq_ignore_ascii_case("identity") {
        return Ok(CMatrix::identity(dim, dim));
    }
    let (word, angle) = match text.split_once(':') {
        Some((w, t)) => {
            (w, t.trim().parse::<f64>().map_err(|_| Error::Parse(format!("bad angle in {text:?}")))?)
        }
        None => (text, FRAC_PI_2),
    };
    let p: PauliString = word.trim().parse()?;
    if p.n_sites() != n {
        return Err(Error::Dimension(format!("gate {word} acts on {} spins, system has {n}", p.n_sites())));
    }
    Ok(expm_hermitian(&p.matrix()?, angle))
}

fn grape(a: &GrapeArgs, format: Format, out: Out) -> Result<i32> {
    let system = match (&a.system, a.free_spins) {
        (Some(path), _) => NmrSystemSpec::from_json(&read(path)?)?,
        (None, Some(n)) => NmrSystemSpec::free(n)?,
        (None, None) => return Err(Error::Validation("give --system or --free-spins".into())),
    };
    let target = match (&a.gate, &a.target, &a.target_matrix) {
        (Some(g), _, _) => parse_gate(g, system.n)?,
        (_, Some(path), _) => {
            let d = ProductDecomposition::from_json(&read(path)?)?;
            match a.factor {
                Some(k) => {
                    let f = d.factors().get(k.wrapping_sub(1)).ok_or_else(|| {
                        Error::Validation(format!("factor {k} out of range 1..={}", d.len()))
                    })?;
                    expm_hermitian(&f.word.matrix()?, f.angle)
                }
                None => reconstruct(&d)?,
            }
        }
        (_, _, Some(path)) => read_matrix(path)?,
        _ => return Err(Error::Validation("give --gate, --target or --target-matrix".into())),
    };
    let mut config = match &a.config {
        Some(path) => serde_json::from_str::<GrapeConfig>(&read(path)?)?,
        None => GrapeConfig::default(),
    };
    if let Some(v) = a.steps {
        config.steps = v;
    }
    if let Some(v) = a.dt {
        config.dt = v;
    }
    if let Some(v) = a.amp_cap {
        config.amp_cap_hz = v;
    }
    if let Some(v) = a.max_iterations {
        config.max_iterations = v;
    }
    if let Some(v) = &a.rf_scales {
        config.rf_scales = v.clone();
    }
    match (a.init, a.seed) {
        (Some(Init::Zero), _) => config.initial = InitialPulse::Zero,
        (Some(Init::Random), seed) | (None, seed @ Some(_)) => {
            let fraction = match config.initial {
                InitialPulse::Random { fraction, .. } => fraction,
                _ => 0.5,
            };
            config.initial = InitialPulse::Random { seed: seed.unwrap_or(1), fraction };
        }
        (None, None) => {}
    }
    let result = grape_optimize(&system, &target, &config)?;
    match format {
        Format::Json => {
            write_json(&a.output, &result)?;
            if let Some(path) = &a.pulse_csv {
                result.pulse.write_csv(fs::File::create(path)?)?;
            }
        }
        Format::Csv => result.pulse.write_csv(fs::File::create(&a.output)?)?,
    }
    out.say(format!(
        "fidelity {:.9} after {} iterations ({} steps × {} s){}",
        result.fidelity,
        result.iterations,
        result.pulse.steps(),
        result.pulse.dt,
        if result.converged { ", converged" } else { "" }
    ));
    for (s, f) in result.rf_scales.iter().zip(&result.per_scale_fidelity) {
        out.detail(format!("  rf scale {s}: {f:.9}"));
    }
    Ok(if result.fidelity >= a.min_fidelity { EXIT_OK } else { EXIT_UNMET })
}

fn selftest(a: &SelftestArgs, out: Out) -> Result<i32> {
    let report = run_selftest(a.seed, a.cases)?;
    if let Some(path) = &a.output {
        write_json(path, &report)?;
    }
    for check in &report.checks {
        out.say(format!(
            "{} {} ({} cases, {} failures, worst {:e})",
            if check.passed() { "PASS" } else { "FAIL" },
            check.name,
            check.cases,
            check.failures,
            check.worst
        ));
    }
    Ok(if report.passed() { EXIT_OK } else { EXIT_UNMET })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_parsing() {
        let x = parse_gate("X", 1).unwrap();
        assert!((x[(0, 1)] - c(0.0, -1.0)).norm() < 1e-12);
        assert_eq!(parse_gate("identity", 2).unwrap(), CMatrix::identity(4, 4));
        assert!(parse_gate("XX", 1).is_err());
        assert!(parse_gate("X:abc", 1).is_err());
    }

    #[test]
    fn pair_parsing() {
        assert_eq!(parse_pair("1, 2").unwrap(), (1, 2));
        assert!(parse_pair("12").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&Error::Stall { w: 0.0, delta: 0.0 }), EXIT_UNMET);
        assert_eq!(exit_code(&Error::Parse("x".into())), EXIT_USAGE);
    }
}
