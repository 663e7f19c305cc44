//! The `gpcfid` command-line front end.
//!
//! Exit codes: 0 ok, 1 selftest failure, 2 parse or I/O error, 3 invalid
//! channel or trajectory, 4 problem too large.
//!
//! Reports are JSON with a [`RunManifest`] first. Wall-clock time is only
//! recorded with `--timing`, so identical inputs, seed and configuration
//! give byte-identical reports.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::channel::{choi_of_spectrum, ChannelError, ChannelSpec, GeneralizedPauliChannel, Spectrum};
use crate::dynamics::{self, DynamicsError, EvolutionKind, EvolutionSpec};
use crate::metrics::{self, FidelityReport};
use crate::mub::{MubError, MubFamily, BUILD_TOL};
use crate::oracle::{self, OracleConfig, OracleError, Sense};
use crate::sampling;

pub const TOOL_VERSION: &str = concat!("gpcfid ", env!("CARGO_PKG_VERSION"));

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Parse(String),
    #[error("{0}")]
    Invalid(String),
    #[error("{0}")]
    TooLarge(String),
    #[error("selftest failed: {0}")]
    SelftestFailed(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::SelftestFailed(_) => 1,
            CliError::Parse(_) | CliError::Io(_) => 2,
            CliError::Invalid(_) => 3,
            CliError::TooLarge(_) => 4,
        }
    }
}

impl From<MubError> for CliError {
    fn from(e: MubError) -> Self {
        match e {
            MubError::ValidationFailed(_) | MubError::UnsupportedDimension { .. } => {
                CliError::Invalid(e.to_string())
            }
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<ChannelError> for CliError {
    fn from(e: ChannelError) -> Self {
        match e {
            ChannelError::NotCptp { .. } | ChannelError::NotDensityMatrix(_) | ChannelError::FamilyMismatch => {
                CliError::Invalid(e.to_string())
            }
            ChannelError::TooLarge { .. } => CliError::TooLarge(e.to_string()),
            ChannelError::Mub(m) => m.into(),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

impl From<OracleError> for CliError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::TooLarge(_) => CliError::TooLarge(e.to_string()),
            OracleError::Channel(c) => c.into(),
            OracleError::BadConfig(_) => CliError::Parse(e.to_string()),
            OracleError::Linalg(_) => CliError::Invalid(e.to_string()),
        }
    }
}

impl From<DynamicsError> for CliError {
    fn from(e: DynamicsError) -> Self {
        match e {
            DynamicsError::InvalidTrajectory { .. } | DynamicsError::OutOfRange { .. } => {
                CliError::Invalid(e.to_string())
            }
            DynamicsError::Channel(c) => c.into(),
            _ => CliError::Parse(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "gpcfid", version, about = "Fidelity and output-norm analysis of generalized Pauli channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Print the built-in MUB family for a prime dimension.
    Mub(MubArgs),
    /// Check a channel spec or a MUB file.
    Validate(ValidateArgs),
    /// Closed-form report for a channel, optionally checked by the oracle.
    Analyze(AnalyzeArgs),
    /// Probe multiplicativity of f_max on a tensor power.
    Tensor(TensorArgs),
    /// Timeline of a dynamical map.
    Evolve(EvolveArgs),
    /// Reduced-scale verification suite.
    Selftest(SelftestArgs),
}

#[derive(Debug, Args)]
pub struct MubArgs {
    #[arg(long)]
    pub d: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    pub spec: PathBuf,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    pub spec: PathBuf,
    /// Cross-check every closed form by brute-force search.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = OracleConfig::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Emit diagnostics for a non-CPTP spec instead of failing.
    #[arg(long)]
    pub allow_noncptp: bool,
    /// Record wall-clock time in the manifest.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct TensorArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub restarts: Option<usize>,
    #[arg(long, default_value_t = OracleConfig::DEFAULT_SEED)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct EvolveArgs {
    pub spec: PathBuf,
    #[arg(long)]
    pub t_max: f64,
    #[arg(long)]
    pub steps: usize,
    /// Write the timeline CSV here instead of standard output.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write the summary JSON here. Without `--csv` the CSV goes to standard
    /// output and the summary is written only when this is set.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub timing: bool,
}

#[derive(Debug, Args)]
pub struct SelftestArgs {
    /// Dimensions to sweep, e.g. `--d 2,3,5`.
    #[arg(long, value_delimiter = ',', default_values_t = [2usize, 3])]
    pub d: Vec<usize>,
    #[arg(long, default_value_t = OracleConfig::DEFAULT_SEED)]
    pub seed: u64,
    /// Perturb the built-in family before validating it.
    #[arg(long, hide = true)]
    pub corrupt_mub: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunManifest {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub config: Value,
    pub tool_version: &'static str,
    /// SHA-256 over command, inputs, seed, config and version.
    pub run_digest: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_clock_seconds: Option<f64>,
}

impl RunManifest {
    pub fn new(command: &str, inputs: Vec<InputDigest>, seed: Option<u64>, config: Value) -> Self {
        let key = json!({
            "command": command,
            "inputs": inputs,
            "seed": seed,
            "config": config,
            "tool_version": TOOL_VERSION,
        });
        Self {
            command: command.into(),
            inputs,
            seed,
            config,
            tool_version: TOOL_VERSION,
            run_digest: hex::encode(Sha256::digest(key.to_string().as_bytes())),
            wall_clock_seconds: None,
        }
    }
}

fn digest_file(path: &Path) -> Result<InputDigest, CliError> {
    let bytes = fs::read(path)?;
    Ok(InputDigest {
        path: path.display().to_string(),
        sha256: hex::encode(Sha256::digest(&bytes)),
    })
}

fn base_dir(path: &Path) -> &Path {
    path.parent().unwrap_or(Path::new("."))
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => stdout.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("reports serialize");
    s.push('\n');
    s
}

fn finish_manifest(mut m: RunManifest, timing: bool, start: Instant) -> RunManifest {
    if timing {
        m.wall_clock_seconds = Some(start.elapsed().as_secs_f64());
    }
    m
}

/// Loads a channel spec and its MUB family, recording input digests.
fn load_channel_spec(path: &Path) -> Result<(ChannelSpec, Arc<MubFamily>, Vec<InputDigest>), CliError> {
    let mut inputs = vec![digest_file(path)?];
    let spec = ChannelSpec::load(path)?;
    if let Some(m) = &spec.mub_file {
        inputs.push(digest_file(&base_dir(path).join(m))?);
    }
    let fam = spec.family(base_dir(path))?;
    Ok((spec, fam, inputs))
}

fn channel_section(sp: &Spectrum) -> Value {
    let fa = sp.fujiwara_algoet();
    json!({
        "d": sp.dim(),
        "probabilities": sp.probabilities(),
        "eigenvalues": sp.lambdas(),
        "cptp": fa.passed,
        "slacks": { "lower": fa.lower_slack, "upper": fa.upper_slack },
    })
}

pub fn run(cli: Cli, stdout: &mut dyn Write) -> Result<(), CliError> {
    match cli.command {
        Command::Mub(a) => cmd_mub(&a, stdout),
        Command::Validate(a) => cmd_validate(&a, stdout),
        Command::Analyze(a) => cmd_analyze(&a, stdout),
        Command::Tensor(a) => cmd_tensor(&a, stdout),
        Command::Evolve(a) => cmd_evolve(&a, stdout),
        Command::Selftest(a) => cmd_selftest(&a, stdout),
    }
}

pub fn cmd_mub(a: &MubArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let fam = MubFamily::build(a.d)?;
    let mut text = fam.to_json_string();
    text.push('\n');
    emit(&text, a.out.as_deref(), stdout)
}

pub fn cmd_validate(a: &ValidateArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let text = fs::read_to_string(&a.spec)?;
    let value: Value = serde_json::from_str(&text).map_err(|e| CliError::Parse(e.to_string()))?;
    if value.get("bases").is_some() {
        let file = serde_json::from_value(value).map_err(|e| CliError::Parse(e.to_string()))?;
        let d_and_report = match MubFamily::from_file(file) {
            Ok(fam) => (fam.dim(), fam.validate(crate::mub::LOAD_TOL)),
            Err(MubError::ValidationFailed(r)) => (0, r),
            Err(e) => return Err(e.into()),
        };
        let (d, report) = d_and_report;
        emit(&to_json(&json!({ "kind": "mub", "d": d, "validation": report })), None, stdout)?;
        if !report.passed {
            return Err(CliError::Invalid(format!(
                "MUB family failed validation: unbiasedness residual {:e}, orthonormality residual {:e}",
                report.unbiasedness_residual, report.orthonormality_residual
            )));
        }
        return Ok(());
    }
    let (spec, fam, _) = load_channel_spec(&a.spec)?;
    let sp = spec.spectrum()?;
    let choi_min = choi_of_spectrum(&sp, &fam)?.min_eigenvalue().map_err(ChannelError::from)?;
    let mut section = channel_section(&sp);
    section["choi_min_eigenvalue"] = json!(choi_min);
    emit(&to_json(&json!({ "kind": "channel", "channel": section })), None, stdout)?;
    spec.build(fam)?;
    Ok(())
}

pub fn cmd_analyze(a: &AnalyzeArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let (spec, fam, inputs) = load_channel_spec(&a.spec)?;
    let sp = spec.spectrum()?;
    let cfg = OracleConfig::single_copy()
        .with_seed(a.seed)
        .with_restarts(a.restarts.unwrap_or(OracleConfig::single_copy().restarts));
    let config = json!({
        "oracle": a.oracle,
        "oracle_config": if a.oracle { serde_json::to_value(oracle::ReproStamp::from(&cfg)).expect("serializes") } else { Value::Null },
        "allow_noncptp": a.allow_noncptp,
    });
    let manifest = RunManifest::new("analyze", inputs, a.oracle.then_some(a.seed), config);

    let ch = match spec.build(fam.clone()) {
        Ok(ch) => ch,
        Err(e @ ChannelError::NotCptp { .. }) if a.allow_noncptp => {
            let fa = sp.fujiwara_algoet();
            let choi_min = choi_of_spectrum(&sp, &fam)?
                .min_eigenvalue()
                .map_err(ChannelError::from)?;
            let report = json!({
                "manifest": finish_manifest(manifest, a.timing, start),
                "channel": channel_section(&sp),
                "diagnostics": {
                    "error": e.to_string(),
                    "violated_bound": fa.violated_bound().map(|(b, _)| b),
                    "violation": fa.violated_bound().map(|(_, v)| v),
                    "choi_min_eigenvalue": choi_min,
                },
            });
            return emit(&to_json(&report), a.out.as_deref(), stdout);
        }
        Err(e) => return Err(e.into()),
    };

    let metrics_report = FidelityReport::closed_form(&ch);
    let oracle_section = if a.oracle {
        Some(oracle_section(&ch, &metrics_report, &cfg)?)
    } else {
        None
    };
    let mut report = json!({
        "manifest": Value::Null,
        "channel": channel_section(&ch.spectrum()),
        "metrics": metrics_report,
    });
    if let Some(o) = oracle_section {
        report["oracle"] = o;
    }
    report["manifest"] = serde_json::to_value(finish_manifest(manifest, a.timing, start)).expect("serializes");
    emit(&to_json(&report), a.out.as_deref(), stdout)
}

fn oracle_section(ch: &GeneralizedPauliChannel, closed: &FidelityReport, cfg: &OracleConfig) -> Result<Value, CliError> {
    let g = ch.as_generic();
    let starts = oracle::mub_starts(ch.family(), 1);
    let hi = oracle::oracle_self_fidelity(&g, Sense::Max, cfg, &starts)?;
    let lo = oracle::oracle_self_fidelity(&g, Sense::Min, cfg, &starts)?;
    let n2 = oracle::oracle_nu2(&g, cfg, &starts)?;
    let ni = oracle::oracle_nu_inf(&g, cfg, &starts)?;
    let pair = oracle::classify_nu_inf_pair(ch.family(), &ni);
    let residuals = json!({
        "f_max": hi.value - closed.f_max,
        "f_min": lo.value - closed.f_min,
        "nu2": n2.value - closed.nu2,
        "nu_inf": ni.value - closed.nu_inf,
    });
    let max_abs = [hi.value - closed.f_max, lo.value - closed.f_min, n2.value - closed.nu2, ni.value - closed.nu_inf]
        .iter()
        .fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(json!({
        "self_fidelity_max": hi,
        "self_fidelity_min": lo,
        "nu2": n2,
        "nu_inf": ni,
        "nu_inf_pair": pair,
        "residuals": residuals,
        "max_abs_residual": max_abs,
    }))
}

pub fn cmd_tensor(a: &TensorArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let (spec, fam, inputs) = load_channel_spec(&a.spec)?;
    let ch = spec.build(fam)?;
    let cfg = OracleConfig::tensor()
        .with_seed(a.seed)
        .with_restarts(a.restarts.unwrap_or(OracleConfig::tensor().restarts));
    let probe = oracle::tensor_multiplicativity_probe(&ch, a.n, &cfg)?;
    let (verdict, pass) = match probe.regime {
        oracle::Regime::CorollaryRegime => ("corollary regime", Some(probe.excess <= 1e-6)),
        oracle::Regime::OpenRegime => ("open regime", None),
    };
    let config = json!({ "n": a.n, "oracle_config": oracle::ReproStamp::from(&cfg) });
    let report = json!({
        "manifest": finish_manifest(RunManifest::new("tensor", inputs, Some(a.seed), config), a.timing, start),
        "channel": channel_section(&ch.spectrum()),
        "probe": {
            "n": probe.n,
            "estimate": probe.estimate,
            "baseline": probe.baseline,
            "excess": probe.excess,
            "verdict": verdict,
            "pass": pass,
            "flags": probe.flags,
            "oracle": probe.oracle,
        },
    });
    emit(&to_json(&report), a.out.as_deref(), stdout)
}

pub fn cmd_evolve(a: &EvolveArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    let start = Instant::now();
    let spec = EvolutionSpec::load(&a.spec)?;
    let inputs = vec![digest_file(&a.spec)?];
    let grid = dynamics::uniform_grid(a.t_max, a.steps)?;
    let entries = dynamics::timeline_report(&spec, &grid)?;
    let summary = dynamics::summarize(&entries);
    let exponential = matches!(spec.kind(), EvolutionKind::ExponentialRates(_));
    let contract_holds = summary.flags_hold
        && summary.max_fmax_nuinf_gap <= 1e-12
        && (!exponential || summary.fmax_nonincreasing);

    let mut csv_bytes = Vec::new();
    dynamics::write_timeline_csv(&entries, &mut csv_bytes)?;
    let config = json!({ "t_max": a.t_max, "steps": a.steps });
    let report = json!({
        "manifest": finish_manifest(RunManifest::new("evolve", inputs, None, config), a.timing, start),
        "d": spec.dim(),
        "kind": if exponential { "exponential_rates" } else { "sampled_trajectory" },
        "summary": summary,
        "contract_holds": contract_holds,
    });
    match &a.csv {
        Some(p) => {
            fs::write(p, &csv_bytes)?;
            emit(&to_json(&report), a.out.as_deref(), stdout)?;
        }
        None => {
            stdout.write_all(&csv_bytes)?;
            if let Some(p) = &a.out {
                fs::write(p, to_json(&report))?;
            }
        }
    }
    Ok(())
}

/// One selftest check.
#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

fn check(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> CheckOutcome {
    CheckOutcome {
        name: name.into(),
        passed,
        detail: detail.into(),
    }
}

/// Runs the reduced-scale suite for one dimension.
pub fn selftest_dimension(d: usize, seed: u64, corrupt_mub: bool) -> Result<Vec<CheckOutcome>, CliError> {
    let mut out = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ d as u64);
    let built = MubFamily::build(d)?;
    let candidate = if corrupt_mub {
        let mut bases = built.bases().to_vec();
        bases[1][0][0] *= crate::linalg::C64::from_polar(1.0, 0.3);
        bases[1][0][1] *= crate::linalg::C64::from_polar(1.0, -0.2);
        MubFamily::from_bases_unchecked(d, bases)?
    } else {
        built.clone()
    };
    let v = candidate.validate(BUILD_TOL);
    out.push(check(
        format!("d={d} mub"),
        v.passed,
        format!(
            "orthonormality residual {:e}, unbiasedness residual {:e}",
            v.orthonormality_residual, v.unbiasedness_residual
        ),
    ));
    let fam = Arc::new(built);

    let scan = oracle::cptp_equivalence_scan(d, &oracle::GridSpec::new(1200, 400, 400, rng.random()))?;
    out.push(check(
        format!("d={d} cptp-equivalence"),
        scan.disagreements == 0,
        format!("{} disagreements over {} spectra", scan.disagreements, scan.points),
    ));

    let mut eig = 0.0f64;
    let mut ident = 0.0f64;
    for _ in 0..20 {
        let ch = sampling::random_channel(fam.clone(), &mut rng);
        eig = eig.max(oracle::eigenrelation_check(&ch)?);
        ident = ident.max(metrics::nu2_fmax_identity(&ch).map_err(|e| CliError::Invalid(e.to_string()))?);
    }
    out.push(check(format!("d={d} eigenrelation"), eig <= 1e-12, format!("max residual {eig:e}")));
    out.push(check(format!("d={d} nu2-identity"), ident <= 1e-12, format!("max residual {ident:e}")));

    let cfg = OracleConfig::single_copy().with_restarts(64).with_seed(rng.random());
    let starts = oracle::mub_starts(&fam, 1);
    let (mut fid, mut n2, mut ninf) = (0.0f64, 0.0f64, 0.0f64);
    let mut uncertified_excess = 0.0f64;
    for i in 0..8 {
        let ch = if i % 2 == 0 {
            sampling::random_channel(fam.clone(), &mut rng)
        } else {
            sampling::random_nonnegative_channel(fam.clone(), &mut rng)
        };
        let g = ch.as_generic();
        let ext = metrics::f_extremes(&ch);
        let hi = oracle::oracle_self_fidelity(&g, Sense::Max, &cfg, &starts)?;
        let lo = oracle::oracle_self_fidelity(&g, Sense::Min, &cfg, &starts)?;
        fid = fid.max((hi.value - ext.f_max).abs()).max((lo.value - ext.f_min).abs());
        n2 = n2.max((oracle::oracle_nu2(&g, &cfg, &starts)?.value - metrics::nu2(&ch)).abs());
        let gap = oracle::oracle_nu_inf(&g, &cfg, &starts)?.value - metrics::nu_inf(&ch);
        if metrics::nu_inf_certified(&ch) {
            ninf = ninf.max(gap.abs());
        } else {
            uncertified_excess = uncertified_excess.max(gap);
        }
    }
    out.push(check(format!("d={d} oracle-fidelity"), fid <= 1e-6, format!("max |oracle - closed| {fid:e}")));
    out.push(check(format!("d={d} oracle-nu2"), n2 <= 1e-6, format!("max |oracle - closed| {n2:e}")));
    out.push(check(
        format!("d={d} oracle-nu-inf"),
        ninf <= 1e-6,
        format!(
            "max |oracle - closed| {ninf:e} on certified channels; largest excess on mixed-sign channels {uncertified_excess:e}"
        ),
    ));

    let mut expm = 0.0f64;
    for _ in 0..3 {
        let rates: Vec<f64> = (0..=d).map(|_| rng.random_range(0.0..1.5)).collect();
        let spec = EvolutionSpec::exponential(fam.clone(), rates)?;
        expm = expm.max(dynamics::expm_cross_check(&spec, &[0.0, 0.5, 1.0, 3.0])?);
    }
    out.push(check(format!("d={d} dynamics-expm"), expm <= 1e-9, format!("max gap {expm:e}")));
    Ok(out)
}

pub fn cmd_selftest(a: &SelftestArgs, stdout: &mut dyn Write) -> Result<(), CliError> {
    if a.d.is_empty() {
        return Err(CliError::Parse("--d needs at least one dimension".into()));
    }
    let mut failed = Vec::new();
    for &d in &a.d {
        for c in selftest_dimension(d, a.seed, a.corrupt_mub)? {
            writeln!(stdout, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
            if !c.passed {
                failed.push(format!("{} ({})", c.name, c.detail));
            }
        }
    }
    if failed.is_empty() {
        writeln!(stdout, "selftest passed")?;
        Ok(())
    } else {
        Err(CliError::SelftestFailed(failed.join("; ")))
    }
}
