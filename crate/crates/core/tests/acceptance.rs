//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Criterion 2 is a known failure: for `d ≥ 3` with mixed-sign eigenvalues
//! the oracle attains output eigenvalues above the `ν_∞` closed form (see
//! `mixed_sign_qutrit_beats_mub_pairs` in the oracle tests). It is still
//! run and reported as FAIL; the exit status is 1 only for other failures,
//! or if criterion 2 unexpectedly passes.

use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use gpc_fidelity::channel::GeneralizedPauliChannel;
use gpc_fidelity::dynamics::{self, EvolutionSpec};
use gpc_fidelity::linalg::C64;
use gpc_fidelity::metrics;
use gpc_fidelity::mub::MubFamily;
use gpc_fidelity::oracle::{self, GridSpec, OracleConfig, Sense};
use gpc_fidelity::sampling;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 20_241_018;
const KNOWN_FAILING: &[usize] = &[2];

struct Outcome {
    id: usize,
    name: &'static str,
    passed: bool,
    detail: String,
}

fn fam(d: usize) -> Arc<MubFamily> {
    Arc::new(MubFamily::build(d).expect("built-in family"))
}

/// The shared channel set of criteria 1 to 3.
fn channel_set() -> Vec<(usize, Vec<GeneralizedPauliChannel>)> {
    [2, 3, 5]
        .into_iter()
        .map(|d| {
            let f = fam(d);
            let mut rng = ChaCha8Rng::seed_from_u64(SEED + d as u64);
            (d, (0..100).map(|_| sampling::random_channel(f.clone(), &mut rng)).collect())
        })
        .collect()
}

fn criterion_1(set: &[(usize, Vec<GeneralizedPauliChannel>)]) -> Outcome {
    let start = Instant::now();
    let cfg = OracleConfig::single_copy().with_seed(SEED);
    let mut worst_max = 0.0f64;
    let mut worst_min = 0.0f64;
    let mut per_d = Vec::new();
    for (d, chans) in set {
        let starts = oracle::mub_starts(&fam(*d), 1);
        for ch in chans {
            let g = ch.as_generic();
            let ext = metrics::f_extremes(ch);
            let max = oracle::oracle_self_fidelity(&g, Sense::Max, &cfg, &starts).unwrap();
            let min = oracle::oracle_self_fidelity(&g, Sense::Min, &cfg, &starts).unwrap();
            worst_max = worst_max.max((max.value - ext.f_max).abs());
            worst_min = worst_min.max((min.value - ext.f_min).abs());
        }
        per_d.push(format!("d={d}"));
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 1,
        name: "self-fidelity extremes",
        passed: worst_max <= 1e-6 && worst_min <= 1e-6 && secs < 60.0,
        detail: format!(
            "300 channels ({}), max |oracle - f_max| {worst_max:.2e}, max |oracle - f_min| {worst_min:.2e}, {secs:.1}s",
            per_d.join(",")
        ),
    }
}

fn axis_ties(values: &[f64], target: f64) -> Vec<usize> {
    values
        .iter()
        .enumerate()
        .filter(|(_, v)| (*v - target).abs() <= 1e-12)
        .map(|(a, _)| a + 1)
        .collect()
}

fn criterion_2(set: &[(usize, Vec<GeneralizedPauliChannel>)]) -> Outcome {
    let cfg = OracleConfig::single_copy().with_seed(SEED);
    let mut value_fail = Vec::new();
    let mut worst_certified = 0.0f64;
    let mut worst_excess = 0.0f64;
    let mut structure_fail = 0;
    let mut checked = 0;
    for (_, chans) in set {
        for ch in chans {
            let f = ch.family().clone();
            let r = oracle::oracle_nu_inf(&ch.as_generic(), &cfg, &oracle::mub_starts(&f, 1)).unwrap();
            let gap = r.value - metrics::nu_inf(ch);
            if metrics::nu_inf_certified(ch) {
                worst_certified = worst_certified.max(gap.abs());
            }
            if gap.abs() > 1e-6 {
                worst_excess = worst_excess.max(gap);
                value_fail.push(ch.dim());
                continue;
            }
            checked += 1;
            let sp = ch.spectrum();
            let pair = oracle::classify_nu_inf_pair(&f, &r).unwrap();
            let d = ch.dim() as f64;
            let positive = 1.0 + (d - 1.0) * sp.max() >= 1.0 - sp.min();
            let ok = if positive {
                axis_ties(sp.lambdas(), sp.max()).contains(&pair.input.alpha)
                    && pair.input.overlap >= 1.0 - 1e-6
                    && pair.input_output_overlap >= 1.0 - 1e-6
            } else {
                let partner_ok = match pair.partner_k {
                    // a qubit partner is unique
                    Some(m) if ch.dim() == 2 => pair.output.alpha == pair.input.alpha && pair.output.k == m,
                    Some(_) => true,
                    None => false,
                };
                axis_ties(sp.lambdas(), sp.min()).contains(&pair.input.alpha)
                    && pair.input.overlap >= 1.0 - 1e-6
                    && pair.input_output_overlap <= 1e-6
                    && pair.partner_weight >= 1.0 - 1e-6
                    && partner_ok
            };
            if !ok {
                structure_fail += 1;
            }
        }
    }
    let by_d = |d: usize| value_fail.iter().filter(|x| **x == d).count();
    Outcome {
        id: 2,
        name: "output infinity-norm",
        passed: value_fail.is_empty() && structure_fail == 0,
        detail: format!(
            "value mismatches d=2:{} d=3:{} d=5:{} (largest oracle excess {worst_excess:.2e}); \
             certified channels max |gap| {worst_certified:.2e}; MUB-pair structure failures {structure_fail}/{checked}",
            by_d(2),
            by_d(3),
            by_d(5)
        ),
    }
}

fn criterion_3(set: &[(usize, Vec<GeneralizedPauliChannel>)]) -> Outcome {
    let cfg = OracleConfig::single_copy().with_seed(SEED);
    let mut worst = 0.0f64;
    for (_, chans) in set {
        for ch in chans {
            let r = oracle::oracle_nu2(&ch.as_generic(), &cfg, &oracle::mub_starts(ch.family(), 1)).unwrap();
            worst = worst.max((r.value - metrics::nu2(ch)).abs());
        }
    }
    Outcome {
        id: 3,
        name: "output 2-norm",
        passed: worst <= 1e-6,
        detail: format!("300 channels, max |oracle - nu2| {worst:.2e}"),
    }
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for d in [2, 3, 5] {
        let f = fam(d);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 4 ^ d as u64);
        for _ in 0..1000 {
            let ch = sampling::random_channel(f.clone(), &mut rng);
            worst = worst.max(metrics::nu2_fmax_identity(&ch).unwrap());
        }
    }
    Outcome {
        id: 4,
        name: "f_max(L o L) = nu2^2",
        passed: worst <= 1e-12,
        detail: format!("3000 channels, max residual {worst:.2e}"),
    }
}

fn criterion_5() -> Outcome {
    let mut parts = Vec::new();
    let mut ok = true;
    for d in [2, 3] {
        let r = oracle::cptp_equivalence_scan(d, &GridSpec::new(5997, 2000, 2000, SEED + d as u64)).unwrap();
        ok &= r.disagreements == 0 && r.points == 10_000;
        parts.push(format!(
            "d={d}: {} points, {} CPTP, {} boundary, {} disagreements",
            r.points, r.fa_pass, r.boundary_points, r.disagreements
        ));
    }
    Outcome {
        id: 5,
        name: "CPTP equivalence",
        passed: ok,
        detail: parts.join("; "),
    }
}

fn criterion_6() -> Outcome {
    let mut mub_worst = 0.0f64;
    let mut trace_worst = 0.0f64;
    let mut eig_worst = 0.0f64;
    let mut ok = true;
    for d in [2, 3, 5, 7] {
        let f = fam(d);
        let v = f.validate(1e-12);
        ok &= v.passed;
        mub_worst = mub_worst.max(v.orthonormality_residual).max(v.unbiasedness_residual);
        let us = f.unitary_basis();
        for (i, (_, u)) in us.iter().enumerate() {
            for (j, (_, w)) in us.iter().enumerate() {
                let t = (&u.adjoint() * w).trace();
                let expect = if i == j { d as f64 } else { 0.0 };
                trace_worst = trace_worst.max((t - C64::new(expect, 0.0)).norm());
            }
            // the identity is orthogonal to every U_α^k
            trace_worst = trace_worst.max(u.trace().norm());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 6 ^ d as u64);
        for _ in 0..50 {
            let ch = sampling::random_channel(f.clone(), &mut rng);
            eig_worst = eig_worst.max(oracle::eigenrelation_check(&ch).unwrap());
        }
    }
    ok &= trace_worst <= 1e-10 && eig_worst <= 1e-12;
    Outcome {
        id: 6,
        name: "MUB validity",
        passed: ok,
        detail: format!(
            "d=2,3,5,7: MUB residual {mub_worst:.2e}, trace orthogonality {trace_worst:.2e}, eigenrelation {eig_worst:.2e}"
        ),
    }
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let f = fam(2);
    let cfg = OracleConfig::tensor().with_seed(SEED);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 7);
    let mut worst_excess = f64::NEG_INFINITY;
    let mut worst_low = 0.0f64;
    for _ in 0..20 {
        let ch = sampling::random_nonnegative_channel(f.clone(), &mut rng);
        let p = oracle::tensor_multiplicativity_probe(&ch, 2, &cfg).unwrap();
        worst_excess = worst_excess.max(p.excess);
        worst_low = worst_low.max(p.baseline - p.estimate);
    }
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        id: 7,
        name: "tensor-square multiplicativity (lambda >= 0, d=2)",
        passed: worst_excess <= 1e-6 && worst_low <= 1e-6 && secs < 300.0,
        detail: format!(
            "20 channels, 2048 restarts, max excess {worst_excess:.2e}, max shortfall {worst_low:.2e}, {secs:.1}s"
        ),
    }
}

fn criterion_8() -> Outcome {
    let f = fam(2);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 8);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let p = sampling::random_probabilities(2, &mut rng);
        let ch = GeneralizedPauliChannel::from_probabilities(2, p.clone(), f.clone()).unwrap();
        let mut axes = p[1..].to_vec();
        axes.sort_by(f64::total_cmp);
        let (mid, max) = (axes[1], axes[2]);
        let expect = if p[0] >= mid { p[0] + max } else { mid + max };
        worst = worst.max((metrics::nu_inf(&ch) - expect).abs());
    }
    Outcome {
        id: 8,
        name: "qubit casework",
        passed: worst <= 1e-12,
        detail: format!("10000 probability vectors, max deviation {worst:.2e}"),
    }
}

fn criterion_9() -> Outcome {
    let grid = dynamics::uniform_grid(10.0, 1000).unwrap();
    let probes: Vec<f64> = (0..10).map(|i| i as f64).collect();
    let mut violations = 0;
    let mut expm = 0.0f64;
    let mut gap = 0.0f64;
    let mut flags = true;
    let mut monotone = true;
    for d in [2, 3] {
        let f = fam(d);
        let mut rng = ChaCha8Rng::seed_from_u64(SEED ^ 9 ^ d as u64);
        for _ in 0..20 {
            let rates: Vec<f64> = (0..=d).map(|_| rng.random_range(0.0..2.0)).collect();
            let spec = EvolutionSpec::exponential(f.clone(), rates).unwrap();
            if !dynamics::validate_trajectory(&spec, &grid).unwrap().valid {
                violations += 1;
                continue;
            }
            expm = expm.max(dynamics::expm_cross_check(&spec, &probes).unwrap());
            let s = dynamics::summarize(&dynamics::timeline_report(&spec, &grid).unwrap());
            gap = gap.max(s.max_fmax_nuinf_gap);
            flags &= s.flags_hold;
            monotone &= s.fmax_nonincreasing;
        }
    }
    Outcome {
        id: 9,
        name: "dynamics",
        passed: violations == 0 && expm <= 1e-9 && gap <= 1e-12 && flags && monotone,
        detail: format!(
            "40 rate vectors: {violations} invalid, expm gap {expm:.2e}, |f_max - nu_inf| {gap:.2e}, flags {flags}, nonincreasing {monotone}"
        ),
    }
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("channel.json");
    std::fs::write(&spec, r#"{"d": 3, "eigenvalues": [0.4, 0.2, 0.1, 0.2]}"#).unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let status = Command::new(env!("CARGO_BIN_EXE_gpcfid"))
            .args(["analyze", spec.to_str().unwrap(), "--oracle", "--seed", "7", "--out", out.to_str().unwrap()])
            .status()
            .unwrap();
        (status.success(), std::fs::read(out).unwrap_or_default())
    };
    let (ok_a, a) = run("a.json");
    let (ok_b, b) = run("b.json");
    Outcome {
        id: 10,
        name: "determinism",
        passed: ok_a && ok_b && !a.is_empty() && a == b,
        detail: format!("two runs, {} and {} bytes, identical: {}", a.len(), b.len(), a == b),
    }
}

fn main() {
    let mut outcomes = Vec::new();
    let set = channel_set();
    outcomes.push(criterion_1(&set));
    outcomes.push(criterion_2(&set));
    outcomes.push(criterion_3(&set));
    outcomes.push(criterion_4());
    outcomes.push(criterion_5());
    outcomes.push(criterion_6());
    outcomes.push(criterion_7());
    outcomes.push(criterion_8());
    outcomes.push(criterion_9());
    outcomes.push(criterion_10());

    let mut unexpected = 0;
    let mut failed = 0;
    for o in &outcomes {
        println!(
            "criterion {:>2} {}: {} ({})",
            o.id,
            if o.passed { "PASS" } else { "FAIL" },
            o.name,
            o.detail
        );
        failed += usize::from(!o.passed);
        if o.passed == KNOWN_FAILING.contains(&o.id) {
            unexpected += 1;
            println!("criterion {:>2} did not match its recorded status", o.id);
        }
    }
    println!(
        "{} of {} criteria passed; known failing: {:?}; unexpected results: {unexpected}",
        outcomes.len() - failed,
        outcomes.len(),
        KNOWN_FAILING
    );
    if unexpected > 0 {
        std::process::exit(1);
    }
}
