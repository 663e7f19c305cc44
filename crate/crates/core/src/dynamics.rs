//! Time-local evolutions `Λ(t)` that stay inside the channel family.
//!
//! Two kinds are supported. Constant nonnegative rates `γ_α` drive the
//! generator `L = Σ_α γ_α (Φ_α − id)`, whose solution has eigenvalues
//! `λ_α(t) = exp(−(Γ − γ_α) t)` with `Γ = Σ_β γ_β`. A sampled trajectory is
//! a user-supplied table of `(t, λ)` pairs, linearly interpolated in `λ`;
//! interpolation error is the caller's concern.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{dephase, ChannelError, FujiwaraAlgoetCheck, GeneralizedPauliChannel, Spectrum};
use crate::linalg::{ComplexMatrix, LinalgError, C64};
use crate::metrics::FidelityReport;
use crate::mub::MubFamily;

/// Allowed distance of a sampled `λ(0)` from `(1, …, 1)`.
pub const INITIAL_TOL: f64 = 1e-9;
/// Allowed negativity of an eigenvalue before a grid point counts as invalid.
pub const NEGATIVITY_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("invalid evolution spec: {0}")]
    InvalidSpec(String),
    #[error("time {t} outside the sampled range [{lo}, {hi}]")]
    OutOfRange { t: f64, lo: f64, hi: f64 },
    #[error("invalid trajectory: first violation at t = {t} ({reason})")]
    InvalidTrajectory { t: f64, reason: String },
    #[error("invalid time grid: {0}")]
    BadGrid(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("cannot read evolution spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse evolution spec: {0}")]
    Json(#[from] serde_json::Error),
    #[error("cannot write timeline: {0}")]
    Csv(#[from] csv::Error),
}

#[derive(Clone, Debug, PartialEq)]
pub enum EvolutionKind {
    ExponentialRates(Vec<f64>),
    SampledTrajectory(Vec<(f64, Vec<f64>)>),
}

#[derive(Clone, Debug)]
pub struct EvolutionSpec {
    d: usize,
    kind: EvolutionKind,
    fam: Arc<MubFamily>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectorySample {
    pub t: f64,
    pub lambdas: Vec<f64>,
}

/// On-disk form: `{"d": 2, "rates": [...]}` or
/// `{"d": 2, "trajectory": [{"t": 0, "lambdas": [...]}, ...]}`.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolutionFile {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trajectory: Option<Vec<TrajectorySample>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mub_file: Option<PathBuf>,
}

impl EvolutionSpec {
    pub fn exponential(fam: Arc<MubFamily>, rates: Vec<f64>) -> Result<Self, DynamicsError> {
        let d = fam.dim();
        if rates.len() != d + 1 {
            return Err(DynamicsError::InvalidSpec(format!(
                "expected {} rates, found {}",
                d + 1,
                rates.len()
            )));
        }
        if let Some(g) = rates.iter().find(|g| !(g.is_finite() && **g >= 0.0)) {
            return Err(DynamicsError::InvalidSpec(format!("rate {g} is not a nonnegative number")));
        }
        Ok(Self {
            d,
            kind: EvolutionKind::ExponentialRates(rates),
            fam,
        })
    }

    pub fn sampled(fam: Arc<MubFamily>, samples: Vec<(f64, Vec<f64>)>) -> Result<Self, DynamicsError> {
        let d = fam.dim();
        let Some((t0, l0)) = samples.first() else {
            return Err(DynamicsError::InvalidSpec("empty trajectory".into()));
        };
        if *t0 != 0.0 {
            return Err(DynamicsError::InvalidSpec(format!("first sample at t = {t0}, expected 0")));
        }
        for (t, l) in &samples {
            if l.len() != d + 1 {
                return Err(DynamicsError::InvalidSpec(format!(
                    "sample at t = {t} has {} eigenvalues, expected {}",
                    l.len(),
                    d + 1
                )));
            }
            if !t.is_finite() || l.iter().any(|x| !x.is_finite()) {
                return Err(DynamicsError::InvalidSpec(format!("non-finite entry at t = {t}")));
            }
        }
        if l0.iter().any(|x| (x - 1.0).abs() > INITIAL_TOL) {
            return Err(DynamicsError::InvalidSpec(format!(
                "λ(0) = {l0:?} is not the identity"
            )));
        }
        if let Some(w) = samples.windows(2).find(|w| w[1].0 <= w[0].0) {
            return Err(DynamicsError::InvalidSpec(format!(
                "sample times not strictly increasing at t = {}",
                w[1].0
            )));
        }
        Ok(Self {
            d,
            kind: EvolutionKind::SampledTrajectory(samples),
            fam,
        })
    }

    /// Parses a spec; a `mub_file` entry is resolved against `base_dir`.
    pub fn from_json_str(s: &str, base_dir: &Path) -> Result<Self, DynamicsError> {
        let file: EvolutionFile = serde_json::from_str(s)?;
        let fam = match &file.mub_file {
            Some(p) => MubFamily::load(base_dir.join(p)).map_err(ChannelError::from)?,
            None => MubFamily::build(file.d).map_err(ChannelError::from)?,
        };
        if fam.dim() != file.d {
            return Err(ChannelError::DimensionMismatch {
                expected: file.d,
                found: fam.dim(),
            }
            .into());
        }
        let fam = Arc::new(fam);
        match (file.rates, file.trajectory) {
            (Some(r), None) => Self::exponential(fam, r),
            (None, Some(tr)) => Self::sampled(fam, tr.into_iter().map(|s| (s.t, s.lambdas)).collect()),
            _ => Err(DynamicsError::InvalidSpec(
                "exactly one of \"rates\" or \"trajectory\" must be given".into(),
            )),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, DynamicsError> {
        let path = path.as_ref();
        let base = path.parent().unwrap_or(Path::new("."));
        Self::from_json_str(&std::fs::read_to_string(path)?, base)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn kind(&self) -> &EvolutionKind {
        &self.kind
    }

    pub fn family(&self) -> &Arc<MubFamily> {
        &self.fam
    }

    /// Eigenvalues at time `t`.
    pub fn trajectory_at(&self, t: f64) -> Result<Spectrum, DynamicsError> {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(DynamicsError::BadGrid(format!("time {t} must be finite and nonnegative")));
        }
        let lambdas = match &self.kind {
            EvolutionKind::ExponentialRates(g) => {
                let total: f64 = g.iter().sum();
                g.iter().map(|ga| (-(total - ga) * t).exp()).collect()
            }
            EvolutionKind::SampledTrajectory(s) => {
                let hi = s.last().expect("nonempty").0;
                if t > hi {
                    return Err(DynamicsError::OutOfRange { t, lo: 0.0, hi });
                }
                let j = s.partition_point(|(ts, _)| *ts <= t);
                if j == s.len() {
                    s[j - 1].1.clone()
                } else {
                    let (ta, la) = &s[j - 1];
                    let (tb, lb) = &s[j];
                    let w = (t - ta) / (tb - ta);
                    la.iter().zip(lb).map(|(a, b)| a + w * (b - a)).collect()
                }
            }
        };
        Ok(Spectrum::new(self.d, lambdas)?)
    }

    /// The channel `Λ(t)`; fails when `λ(t)` is not CPTP.
    pub fn channel_at(&self, t: f64) -> Result<GeneralizedPauliChannel, DynamicsError> {
        let sp = self.trajectory_at(t)?;
        Ok(GeneralizedPauliChannel::from_eigenvalues(
            self.d,
            sp.lambdas().to_vec(),
            self.fam.clone(),
        )?)
    }
}

/// `t_i = t_max · i / (steps − 1)`, `i = 0..steps`.
pub fn uniform_grid(t_max: f64, steps: usize) -> Result<Vec<f64>, DynamicsError> {
    if steps == 0 {
        return Err(DynamicsError::BadGrid("steps must be >= 1".into()));
    }
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(DynamicsError::BadGrid(format!("t_max {t_max} must be finite and nonnegative")));
    }
    if steps == 1 {
        return Ok(vec![0.0]);
    }
    Ok((0..steps)
        .map(|i| t_max * i as f64 / (steps - 1) as f64)
        .collect())
}

fn check_grid(grid: &[f64]) -> Result<(), DynamicsError> {
    if grid.is_empty() {
        return Err(DynamicsError::BadGrid("empty time grid".into()));
    }
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(DynamicsError::BadGrid("time grid must be nondecreasing".into()));
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimelinePoint {
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub min_lambda: f64,
    pub fujiwara_algoet: FujiwaraAlgoetCheck,
    pub valid: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationTimeline {
    pub points: Vec<TimelinePoint>,
    pub first_violation: Option<f64>,
    pub valid: bool,
}

impl ValidationTimeline {
    fn violation_reason(&self) -> Option<(f64, String)> {
        let p = self.points.iter().find(|p| !p.valid)?;
        let reason = if p.min_lambda < -NEGATIVITY_TOL {
            format!("eigenvalue {:e} below zero", p.min_lambda)
        } else {
            match p.fujiwara_algoet.violated_bound() {
                Some((bound, by)) => format!("{bound} violated by {by:e}"),
                None => "invalid point".into(),
            }
        };
        Some((p.t, reason))
    }
}

/// Per-time positivity check; violations are reported, not raised.
pub fn validate_trajectory(spec: &EvolutionSpec, grid: &[f64]) -> Result<ValidationTimeline, DynamicsError> {
    check_grid(grid)?;
    let points = grid
        .par_iter()
        .map(|&t| {
            let sp = spec.trajectory_at(t)?;
            let fa = sp.fujiwara_algoet();
            let min_lambda = sp.min();
            Ok(TimelinePoint {
                t,
                lambdas: sp.lambdas().to_vec(),
                min_lambda,
                valid: fa.passed && min_lambda >= -NEGATIVITY_TOL,
                fujiwara_algoet: fa,
            })
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    let first_violation = points.iter().find(|p| !p.valid).map(|p| p.t);
    Ok(ValidationTimeline {
        valid: first_violation.is_none(),
        first_violation,
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimelineEntry {
    pub t: f64,
    pub lambdas: Vec<f64>,
    pub report: FidelityReport,
}

/// Closed-form report at every grid time. Fails on the first invalid point.
pub fn timeline_report(spec: &EvolutionSpec, grid: &[f64]) -> Result<Vec<TimelineEntry>, DynamicsError> {
    let validation = validate_trajectory(spec, grid)?;
    if let Some((t, reason)) = validation.violation_reason() {
        return Err(DynamicsError::InvalidTrajectory { t, reason });
    }
    grid.par_iter()
        .map(|&t| {
            let ch = spec.channel_at(t)?;
            Ok(TimelineEntry {
                t,
                lambdas: ch.spectrum().lambdas().to_vec(),
                report: FidelityReport::closed_form(&ch),
            })
        })
        .collect()
}

/// Summary of the contract a valid nonnegative trajectory must satisfy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TimelineSummary {
    pub points: usize,
    pub t_max: f64,
    /// Every point has `ν_∞ = f_max` and multiplicative `f_max`.
    pub flags_hold: bool,
    pub max_fmax_nuinf_gap: f64,
    pub fmax_nonincreasing: bool,
    pub final_f_max: f64,
}

pub fn summarize(entries: &[TimelineEntry]) -> TimelineSummary {
    TimelineSummary {
        points: entries.len(),
        t_max: entries.last().map_or(0.0, |e| e.t),
        flags_hold: entries
            .iter()
            .all(|e| e.report.flags.nuinf_equals_fmax && e.report.flags.fmax_multiplicative),
        max_fmax_nuinf_gap: entries
            .iter()
            .map(|e| (e.report.f_max - e.report.nu_inf).abs())
            .fold(0.0, f64::max),
        fmax_nonincreasing: entries
            .windows(2)
            .all(|w| w[1].report.f_max <= w[0].report.f_max + 1e-15),
        final_f_max: entries.last().map_or(f64::NAN, |e| e.report.f_max),
    }
}

/// Superoperator of `L = Σ_α γ_α (Φ_α − id)` in column-stacking convention.
pub fn generator_superoperator(fam: &MubFamily, rates: &[f64]) -> ComplexMatrix {
    let d = fam.dim();
    let n = d * d;
    let mut cols = Vec::with_capacity(n);
    for j in 0..d {
        for i in 0..d {
            let e = ComplexMatrix::from_fn(d, d, |r, c| {
                if (r, c) == (i, j) { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) }
            });
            let mut out = ComplexMatrix::zeros(d, d);
            for (a, g) in rates.iter().enumerate() {
                if *g != 0.0 {
                    let term = &dephase(fam, a + 1, &e) - &e;
                    out = &out + &term.scale_real(*g);
                }
            }
            cols.push(out.vec_columns());
        }
    }
    // column index i + j·d holds vec(L[E_ij])
    ComplexMatrix::from_fn(n, n, |r, c| cols[c][r])
}

/// Largest entrywise gap between `exp(t L)` and the superoperator of
/// `Λ(t)` built from [`EvolutionSpec::trajectory_at`], over `times`.
pub fn expm_cross_check(spec: &EvolutionSpec, times: &[f64]) -> Result<f64, DynamicsError> {
    let EvolutionKind::ExponentialRates(rates) = spec.kind() else {
        return Err(DynamicsError::InvalidSpec(
            "generator cross-check needs the exponential kind".into(),
        ));
    };
    let l = generator_superoperator(spec.family(), rates);
    let mut worst = 0.0f64;
    for &t in times {
        let e = l.scale_real(t).expm()?;
        let s = spec.channel_at(t)?.superoperator();
        worst = worst.max(e.max_abs_diff(&s));
    }
    Ok(worst)
}

/// CSV columns: `t, lambda_1..lambda_{d+1}, f_min, f_max, nu2, nu_inf, flags`.
pub fn write_timeline_csv<W: Write>(entries: &[TimelineEntry], out: W) -> Result<(), DynamicsError> {
    let mut w = csv::Writer::from_writer(out);
    let axes = entries.first().map_or(0, |e| e.lambdas.len());
    let mut header = vec!["t".to_string()];
    header.extend((1..=axes).map(|a| format!("lambda_{a}")));
    header.extend(["f_min", "f_max", "nu2", "nu_inf", "flags"].map(String::from));
    w.write_record(&header)?;
    for e in entries {
        let mut row = vec![e.t.to_string()];
        row.extend(e.lambdas.iter().map(f64::to_string));
        row.extend(
            [e.report.f_min, e.report.f_max, e.report.nu2, e.report.nu_inf]
                .iter()
                .map(f64::to_string),
        );
        row.push(e.report.flags.bits());
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn fam(d: usize) -> Arc<MubFamily> {
        Arc::new(MubFamily::build(d).unwrap())
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn exponential_examples() {
        let frozen = EvolutionSpec::exponential(fam(3), vec![0.0; 4]).unwrap();
        assert_eq!(frozen.trajectory_at(5.0).unwrap().lambdas(), &[1.0; 4]);

        let s = EvolutionSpec::exponential(fam(2), vec![1.0; 3]).unwrap();
        let l = s.trajectory_at(2f64.ln() / 2.0).unwrap();
        assert!(close(l.lambdas(), &[0.5; 3], 1e-15));

        let s = EvolutionSpec::exponential(fam(3), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        for t in [0.3, 1.0, 4.0] {
            let sp = s.trajectory_at(t).unwrap();
            let e = (-t).exp();
            assert!(close(sp.lambdas(), &[1.0, e, e, e], 1e-15));
            let fa = sp.fujiwara_algoet();
            assert!(fa.passed && fa.upper_slack.abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(EvolutionSpec::exponential(fam(2), vec![1.0, -0.1, 0.0]).is_err());
        assert!(EvolutionSpec::exponential(fam(2), vec![1.0]).is_err());
        assert!(EvolutionSpec::sampled(fam(2), vec![(0.0, vec![0.9; 3])]).is_err());
        assert!(EvolutionSpec::sampled(
            fam(2),
            vec![(0.0, vec![1.0; 3]), (1.0, vec![0.5; 3]), (1.0, vec![0.4; 3])]
        )
        .is_err());
        assert!(EvolutionSpec::sampled(fam(2), vec![]).is_err());
    }

    #[test]
    fn semigroup_property() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for d in [2, 3, 5] {
            let rates: Vec<f64> = (0..=d).map(|_| rng.random_range(0.0..2.0)).collect();
            let s = EvolutionSpec::exponential(fam(d), rates).unwrap();
            for _ in 0..10 {
                let (a, b) = (rng.random_range(0.0..3.0), rng.random_range(0.0..3.0));
                let la = s.trajectory_at(a).unwrap();
                let lb = s.trajectory_at(b).unwrap();
                let prod: Vec<f64> = la.lambdas().iter().zip(lb.lambdas()).map(|(x, y)| x * y).collect();
                assert!(close(s.trajectory_at(a + b).unwrap().lambdas(), &prod, 1e-12));
                assert!(la.lambdas().iter().all(|x| *x > 0.0 && *x <= 1.0));
            }
        }
    }

    #[test]
    fn sampled_interpolation_and_range() {
        let s = EvolutionSpec::sampled(
            fam(2),
            vec![(0.0, vec![1.0; 3]), (2.0, vec![0.5, 0.8, 0.2])],
        )
        .unwrap();
        assert!(close(s.trajectory_at(1.0).unwrap().lambdas(), &[0.75, 0.9, 0.6], 1e-15));
        assert!(close(s.trajectory_at(2.0).unwrap().lambdas(), &[0.5, 0.8, 0.2], 0.0));
        assert!(matches!(s.trajectory_at(2.5), Err(DynamicsError::OutOfRange { .. })));
    }

    #[test]
    fn validation_flags_injected_fault() {
        let s = EvolutionSpec::sampled(
            fam(2),
            vec![
                (0.0, vec![1.0; 3]),
                (1.0, vec![0.5; 3]),
                (2.0, vec![-0.05, 0.4, 0.4]),
                (3.0, vec![0.2; 3]),
            ],
        )
        .unwrap();
        let v = validate_trajectory(&s, &[0.0, 1.0, 2.0, 3.0]).unwrap();
        assert!(!v.valid);
        assert_eq!(v.first_violation, Some(2.0));
        match timeline_report(&s, &[0.0, 1.0, 2.0, 3.0]) {
            Err(DynamicsError::InvalidTrajectory { t, .. }) => assert_eq!(t, 2.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn random_rates_are_valid_and_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let grid = uniform_grid(10.0, 1000).unwrap();
        let probes: Vec<f64> = (0..10).map(|i| 0.37 * i as f64).collect();
        for d in [2, 3] {
            for _ in 0..4 {
                let rates: Vec<f64> = (0..=d).map(|_| rng.random_range(0.0..1.5)).collect();
                let s = EvolutionSpec::exponential(fam(d), rates).unwrap();
                assert!(validate_trajectory(&s, &grid).unwrap().valid);
                assert!(expm_cross_check(&s, &probes).unwrap() < 1e-9);
                let summary = summarize(&timeline_report(&s, &grid).unwrap());
                assert!(summary.flags_hold && summary.fmax_nonincreasing);
                assert!(summary.max_fmax_nuinf_gap < 1e-15);
            }
        }
    }

    #[test]
    fn timeline_examples() {
        let frozen = EvolutionSpec::exponential(fam(2), vec![0.0; 3]).unwrap();
        for e in timeline_report(&frozen, &uniform_grid(1.0, 5).unwrap()).unwrap() {
            let r = &e.report;
            assert!([r.f_min, r.f_max, r.nu2, r.nu_inf].iter().all(|v| (v - 1.0).abs() < 1e-15));
        }
        let s = EvolutionSpec::exponential(fam(2), vec![1.0; 3]).unwrap();
        let e = timeline_report(&s, &[2f64.ln() / 2.0]).unwrap();
        assert!((e[0].report.f_max - 0.75).abs() < 1e-12);
        assert!((e[0].report.nu_inf - 0.75).abs() < 1e-12);

        let s = EvolutionSpec::exponential(fam(3), vec![1.0, 0.0, 0.0, 0.0]).unwrap();
        for e in timeline_report(&s, &uniform_grid(5.0, 20).unwrap()).unwrap() {
            assert!((e.report.f_max - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn generator_kills_identity_and_fixes_own_axis() {
        let f = fam(3);
        let l = generator_superoperator(&f, &[0.3, 0.0, 0.0, 0.0]);
        let id = ComplexMatrix::identity(3).vec_columns();
        assert!(l.mul_vec(&id).iter().all(|z| z.norm() < 1e-15));
        let u = f.unbiased_unitary(1, 1).unwrap().vec_columns();
        assert!(l.mul_vec(&u).iter().all(|z| z.norm() < 1e-15));
        let v = f.unbiased_unitary(2, 1).unwrap().vec_columns();
        let lv = l.mul_vec(&v);
        assert!(lv.iter().zip(&v).all(|(a, b)| (a + b.scale(0.3)).norm() < 1e-14));
    }

    #[test]
    fn csv_layout() {
        let s = EvolutionSpec::exponential(fam(2), vec![0.0; 3]).unwrap();
        let entries = timeline_report(&s, &uniform_grid(1.0, 3).unwrap()).unwrap();
        let mut buf = Vec::new();
        write_timeline_csv(&entries, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(
            lines.next().unwrap(),
            "t,lambda_1,lambda_2,lambda_3,f_min,f_max,nu2,nu_inf,flags"
        );
        assert_eq!(lines.next().unwrap(), "0,1,1,1,1,1,1,1,1111");
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn json_roundtrip() {
        let dir = Path::new(".");
        let s = EvolutionSpec::from_json_str(r#"{"d": 2, "rates": [1, 0.5, 0]}"#, dir).unwrap();
        assert_eq!(s.kind(), &EvolutionKind::ExponentialRates(vec![1.0, 0.5, 0.0]));
        let s = EvolutionSpec::from_json_str(
            r#"{"d": 3, "trajectory": [{"t": 0, "lambdas": [1,1,1,1]}, {"t": 1, "lambdas": [0.5,0.5,0.5,0.5]}]}"#,
            dir,
        )
        .unwrap();
        assert_eq!(s.dim(), 3);
        assert!(EvolutionSpec::from_json_str(r#"{"d": 2}"#, dir).is_err());
        assert!(EvolutionSpec::from_json_str(r#"{"d": 2, "rates": [0,0,0], "extra": 1}"#, dir).is_err());
    }
}
