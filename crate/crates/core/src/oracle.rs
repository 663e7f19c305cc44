//! Brute-force verification of the closed forms.
//!
//! The optimizers only see a superoperator. It is compiled once into a
//! real matrix `R` over an orthonormal Hermitian operator basis `{H_j}`
//! (`R_{jk} = Tr(H_j Λ[H_k])`), so for `P = |ψ⟩⟨ψ|` with coordinates
//! `r_j = Tr(H_j P)`:
//!
//! * `Tr(P Λ[P]) = rᵀ R r`
//! * `Tr(Λ[P]²) = |R r|²`
//! * `Tr(Q Λ[P]) = r(Q)ᵀ R r(P)`
//!
//! Pure-state searches run a coordinate-wise pattern search on the real
//! and imaginary parts of `ψ` from many starts. The first starts are the
//! supplied structured states (MUB vectors or their products), the rest are
//! Haar draws from a per-restart generator derived from the master seed, so
//! results do not depend on how many worker threads run the restarts.

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::channel::{choi_of_spectrum, ChannelError, GeneralizedPauliChannel, GenericChannel, Spectrum};
use crate::linalg::{inner, kron_vec, ComplexMatrix, LinalgError, C64};
use crate::metrics::{self, MultiplicativityFlags, PureState};
use crate::mub::MubFamily;
use crate::sampling;

/// Largest state dimension the optimizers accept.
pub const MAX_ORACLE_DIM: usize = 64;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error("problem too large: {0}")]
    TooLarge(String),
    #[error("invalid oracle configuration: {0}")]
    BadConfig(String),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleConfig {
    pub restarts: usize,
    /// Sweep (or alternation) cap per restart.
    pub max_iters: usize,
    /// A restart has converged once its step falls below this.
    pub step_tol: f64,
    /// Improvements smaller than this count as no progress.
    pub value_tol: f64,
    pub initial_step: f64,
    pub seed: u64,
}

impl OracleConfig {
    pub const DEFAULT_SEED: u64 = 0x0005_eed0_f91c;

    /// 256 restarts, for single-copy problems.
    pub fn single_copy() -> Self {
        Self {
            restarts: 256,
            max_iters: 500,
            step_tol: 1e-9,
            value_tol: 1e-10,
            initial_step: 0.5,
            seed: Self::DEFAULT_SEED,
        }
    }

    /// 2048 restarts, for tensor powers.
    pub fn tensor() -> Self {
        Self {
            restarts: 2048,
            ..Self::single_copy()
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_restarts(mut self, restarts: usize) -> Self {
        self.restarts = restarts;
        self
    }

    pub fn validate(&self) -> Result<(), OracleError> {
        if self.restarts == 0 {
            return Err(OracleError::BadConfig("restarts must be >= 1".into()));
        }
        if self.max_iters == 0 {
            return Err(OracleError::BadConfig("max_iters must be >= 1".into()));
        }
        if !(self.step_tol > 0.0 && self.value_tol > 0.0 && self.initial_step > self.step_tol) {
            return Err(OracleError::BadConfig(
                "tolerances must be positive and below the initial step".into(),
            ));
        }
        Ok(())
    }
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self::single_copy()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StartKind {
    Structured,
    Haar,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TraceSummary {
    pub restarts: usize,
    pub structured_starts: usize,
    pub converged: usize,
    pub total_iterations: usize,
    pub best_restart: usize,
    pub best_start: StartKind,
    /// Worst final objective over restarts (in the optimized sense).
    pub worst_final: f64,
    /// Every restart's objective sequence was nondecreasing.
    pub monotone: bool,
}

/// Everything needed to replay a run bit for bit.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReproStamp {
    pub seed: u64,
    pub restarts: usize,
    pub max_iters: usize,
    pub step_tol: f64,
    pub value_tol: f64,
    pub initial_step: f64,
}

impl From<&OracleConfig> for ReproStamp {
    fn from(c: &OracleConfig) -> Self {
        Self {
            seed: c.seed,
            restarts: c.restarts,
            max_iters: c.max_iters,
            step_tol: c.step_tol,
            value_tol: c.value_tol,
            initial_step: c.initial_step,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub value: f64,
    pub state: PureState,
    /// The output projector `Q` for `ν_∞`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual_state: Option<PureState>,
    pub trace: TraceSummary,
    pub stamp: ReproStamp,
}

/// Real quadratic-form representation of a Hermiticity-preserving map.
#[derive(Clone, Debug)]
pub struct CompiledMap {
    dim: usize,
    /// Row-major `n × n` with `n = dim²`.
    r: Vec<f64>,
    /// `(R + Rᵀ)/2`.
    r_sym: Vec<f64>,
}

impl CompiledMap {
    pub fn new(ch: &GenericChannel) -> Result<Self, OracleError> {
        let dim = ch.dim();
        if dim > MAX_ORACLE_DIM {
            return Err(OracleError::TooLarge(format!(
                "state dimension {dim} exceeds {MAX_ORACLE_DIM}"
            )));
        }
        let n = dim * dim;
        let basis: Vec<ComplexMatrix> = (0..n).map(|j| hermitian_basis_element(dim, j)).collect();
        let mut r = vec![0.0; n * n];
        for (k, hk) in basis.iter().enumerate() {
            let out = ch.apply(hk);
            for (j, hj) in basis.iter().enumerate() {
                r[j * n + k] = (hj * &out).trace().re;
            }
        }
        let mut r_sym = vec![0.0; n * n];
        for j in 0..n {
            for k in 0..n {
                r_sym[j * n + k] = 0.5 * (r[j * n + k] + r[k * n + j]);
            }
        }
        Ok(Self { dim, r, r_sym })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn n(&self) -> usize {
        self.dim * self.dim
    }

    /// `Tr(P Λ[P])` for the (not necessarily normalized) real coordinates `x`.
    fn fidelity(&self, x: &[f64], coords: &mut [f64]) -> f64 {
        let nn = norm_sq(x);
        hermitian_coords(self.dim, x, coords);
        quad_form(&self.r_sym, coords) / (nn * nn)
    }

    /// `Tr(Λ[P]²)` for the real coordinates `x`.
    fn purity(&self, x: &[f64], coords: &mut [f64]) -> f64 {
        let nn = norm_sq(x);
        hermitian_coords(self.dim, x, coords);
        let n = self.n();
        let mut acc = 0.0;
        for j in 0..n {
            let row = &self.r[j * n..(j + 1) * n];
            let s: f64 = row.iter().zip(coords.iter()).map(|(a, b)| a * b).sum();
            acc += s * s;
        }
        acc / (nn * nn)
    }

    /// `Λ[|ψ⟩⟨ψ|]` (or `Λ†[...]` when `adjoint`).
    fn output(&self, psi: &[C64], adjoint: bool) -> ComplexMatrix {
        let n = self.n();
        let mut coords = vec![0.0; n];
        hermitian_coords(self.dim, &to_real(psi), &mut coords);
        let out: Vec<f64> = (0..n)
            .map(|j| {
                (0..n)
                    .map(|k| {
                        let rjk = if adjoint { self.r[k * n + j] } else { self.r[j * n + k] };
                        rjk * coords[k]
                    })
                    .sum()
            })
            .collect();
        from_hermitian_coords(self.dim, &out)
    }
}

fn norm_sq(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn quad_form(m: &[f64], v: &[f64]) -> f64 {
    let n = v.len();
    let mut acc = 0.0;
    for j in 0..n {
        let row = &m[j * n..(j + 1) * n];
        let s: f64 = row.iter().zip(v).map(|(a, b)| a * b).sum();
        acc += v[j] * s;
    }
    acc
}

/// Orthonormal Hermitian basis: `E_ii` for `j < dim`, then for each pair
/// `i < l` the symmetric `(E_il + E_li)/√2` and antisymmetric
/// `i(E_il - E_li)/√2` elements.
fn hermitian_basis_element(dim: usize, j: usize) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    if j < dim {
        m[j * dim + j] = C64::new(1.0, 0.0);
    } else {
        let pair = (j - dim) / 2;
        let (i, l) = pair_index(dim, pair);
        if (j - dim).is_multiple_of(2) {
            m[i * dim + l] = C64::new(s, 0.0);
            m[l * dim + i] = C64::new(s, 0.0);
        } else {
            m[i * dim + l] = C64::new(0.0, s);
            m[l * dim + i] = C64::new(0.0, -s);
        }
    }
    ComplexMatrix::new(dim, dim, m).expect("square")
}

fn pair_index(dim: usize, mut p: usize) -> (usize, usize) {
    for i in 0..dim {
        let row = dim - 1 - i;
        if p < row {
            return (i, i + 1 + p);
        }
        p -= row;
    }
    unreachable!("pair index out of range")
}

/// `r_j = ⟨ψ|H_j|ψ⟩` with `ψ = x[..dim] + i x[dim..]`.
fn hermitian_coords(dim: usize, x: &[f64], coords: &mut [f64]) {
    let (re, im) = x.split_at(dim);
    let s2 = std::f64::consts::SQRT_2;
    for i in 0..dim {
        coords[i] = re[i] * re[i] + im[i] * im[i];
    }
    let mut j = dim;
    for i in 0..dim {
        for l in i + 1..dim {
            // z = conj(ψ_i) ψ_l
            let zr = re[i] * re[l] + im[i] * im[l];
            let zi = re[i] * im[l] - im[i] * re[l];
            coords[j] = s2 * zr;
            coords[j + 1] = -s2 * zi;
            j += 2;
        }
    }
}

fn from_hermitian_coords(dim: usize, c: &[f64]) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut m = vec![C64::new(0.0, 0.0); dim * dim];
    for i in 0..dim {
        m[i * dim + i] = C64::new(c[i], 0.0);
    }
    let mut j = dim;
    for i in 0..dim {
        for l in i + 1..dim {
            let (a, b) = (c[j] * s, c[j + 1] * s);
            m[i * dim + l] = C64::new(a, b);
            m[l * dim + i] = C64::new(a, -b);
            j += 2;
        }
    }
    ComplexMatrix::new(dim, dim, m).expect("square")
}

fn to_real(psi: &[C64]) -> Vec<f64> {
    psi.iter().map(|z| z.re).chain(psi.iter().map(|z| z.im)).collect()
}

fn to_complex(x: &[f64]) -> Vec<C64> {
    let dim = x.len() / 2;
    let n = norm_sq(x).sqrt();
    (0..dim).map(|i| C64::new(x[i] / n, x[dim + i] / n)).collect()
}

struct RestartOutcome {
    value: f64,
    state: Vec<C64>,
    dual: Option<Vec<C64>>,
    iterations: usize,
    converged: bool,
    monotone: bool,
    kind: StartKind,
}

fn restart_start(dim: usize, idx: usize, structured: &[Vec<C64>], seed: u64) -> (Vec<C64>, StartKind) {
    match structured.get(idx) {
        Some(s) => (s.clone(), StartKind::Structured),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(idx as u64);
            (sampling::haar_state(dim, &mut rng), StartKind::Haar)
        }
    }
}

fn run_restarts(
    cfg: &OracleConfig,
    dim: usize,
    structured: &[Vec<C64>],
    task: impl Fn(Vec<C64>, StartKind) -> RestartOutcome + Sync,
) -> Result<(Vec<RestartOutcome>, usize), OracleError> {
    cfg.validate()?;
    if let Some(bad) = structured.iter().find(|s| s.len() != dim) {
        return Err(OracleError::BadConfig(format!(
            "structured start of length {} for dimension {dim}",
            bad.len()
        )));
    }
    let outcomes: Vec<RestartOutcome> = (0..cfg.restarts)
        .into_par_iter()
        .map(|idx| {
            let (start, kind) = restart_start(dim, idx, structured, cfg.seed);
            task(start, kind)
        })
        .collect();
    let best = outcomes
        .iter()
        .enumerate()
        .fold(0, |best, (i, o)| if o.value > outcomes[best].value { i } else { best });
    Ok((outcomes, best))
}

fn finish(
    cfg: &OracleConfig,
    structured: usize,
    outcomes: Vec<RestartOutcome>,
    best: usize,
    sign: f64,
    transform: impl Fn(f64) -> f64,
) -> OracleResult {
    let trace = TraceSummary {
        restarts: outcomes.len(),
        structured_starts: structured.min(outcomes.len()),
        converged: outcomes.iter().filter(|o| o.converged).count(),
        total_iterations: outcomes.iter().map(|o| o.iterations).sum(),
        best_restart: best,
        best_start: outcomes[best].kind,
        worst_final: transform(
            sign * outcomes
                .iter()
                .map(|o| o.value)
                .fold(f64::INFINITY, f64::min),
        ),
        monotone: outcomes.iter().all(|o| o.monotone),
    };
    let o = &outcomes[best];
    OracleResult {
        value: transform(sign * o.value),
        state: PureState::normalized(o.state.clone()).expect("nonzero state"),
        dual_state: o
            .dual
            .clone()
            .map(|q| PureState::normalized(q).expect("nonzero state")),
        trace,
        stamp: cfg.into(),
    }
}

/// Coordinate pattern search maximizing `f` over unit vectors in `ℝ^{2·dim}`.
fn pattern_search(
    mut f: impl FnMut(&[f64]) -> f64,
    start: &[C64],
    cfg: &OracleConfig,
) -> (Vec<f64>, f64, usize, bool) {
    let mut x = to_real(start);
    let mut val = f(&x);
    let mut step = cfg.initial_step;
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        iterations += 1;
        let before = val;
        for i in 0..x.len() {
            for delta in [step, -step] {
                let old = x[i];
                x[i] = old + delta;
                let v = f(&x);
                if v > val {
                    val = v;
                    let n = norm_sq(&x).sqrt();
                    x.iter_mut().for_each(|c| *c /= n);
                    break;
                }
                x[i] = old;
            }
        }
        if val - before <= cfg.value_tol {
            step *= 0.5;
            if step < cfg.step_tol {
                return (x, val, iterations, true);
            }
        }
    }
    (x, val, iterations, false)
}

/// Extremizes `⟨ψ|Λ[|ψ⟩⟨ψ|]|ψ⟩` over unit vectors.
pub fn oracle_self_fidelity(
    ch: &GenericChannel,
    sense: Sense,
    cfg: &OracleConfig,
    structured: &[Vec<C64>],
) -> Result<OracleResult, OracleError> {
    let map = CompiledMap::new(ch)?;
    let sign = match sense {
        Sense::Max => 1.0,
        Sense::Min => -1.0,
    };
    let dim = map.dim();
    let (outcomes, best) = run_restarts(cfg, dim, structured, |start, kind| {
        let mut coords = vec![0.0; dim * dim];
        let (x, val, iterations, converged) = pattern_search(
            |x| sign * map.fidelity(x, &mut coords),
            &start,
            cfg,
        );
        RestartOutcome {
            value: val,
            state: to_complex(&x),
            dual: None,
            iterations,
            converged,
            monotone: true,
            kind,
        }
    })?;
    Ok(finish(cfg, structured.len(), outcomes, best, sign, |v| v))
}

/// Maximizes `‖Λ[P]‖_2 = sqrt(Tr Λ[P]²)` over pure inputs.
pub fn oracle_nu2(
    ch: &GenericChannel,
    cfg: &OracleConfig,
    structured: &[Vec<C64>],
) -> Result<OracleResult, OracleError> {
    let map = CompiledMap::new(ch)?;
    let dim = map.dim();
    let (outcomes, best) = run_restarts(cfg, dim, structured, |start, kind| {
        let mut coords = vec![0.0; dim * dim];
        let (x, val, iterations, converged) =
            pattern_search(|x| map.purity(x, &mut coords), &start, cfg);
        RestartOutcome {
            value: val,
            state: to_complex(&x),
            dual: None,
            iterations,
            converged,
            monotone: true,
            kind,
        }
    })?;
    Ok(finish(cfg, structured.len(), outcomes, best, 1.0, f64::sqrt))
}

fn top_eigen(m: &ComplexMatrix) -> Result<(f64, Vec<C64>), OracleError> {
    let eig = m.hermitian_eigensystem_tol(1e-9)?;
    Ok((eig.values[0], eig.vector(0)))
}

/// `max_{P,Q} Tr(Q Λ[P])` by alternating ascent: `Q` is the top eigenvector
/// of `Λ[P]`, then `P` the top eigenvector of `Λ†[Q]`, until the objective
/// stops improving. The reported pair is the last `(P, Q)` reached before
/// a non-improving update.
pub fn oracle_nu_inf(
    ch: &GenericChannel,
    cfg: &OracleConfig,
    structured: &[Vec<C64>],
) -> Result<OracleResult, OracleError> {
    let map = CompiledMap::new(ch)?;
    let dim = map.dim();
    let failure: std::sync::Mutex<Option<OracleError>> = std::sync::Mutex::new(None);
    let (outcomes, best) = run_restarts(cfg, dim, structured, |start, kind| {
        let run = || -> Result<RestartOutcome, OracleError> {
            let mut p = start.clone();
            let (mut val, mut q) = top_eigen(&map.output(&p, false))?;
            let mut history = vec![val];
            let mut iterations = 0;
            let mut converged = false;
            while iterations < cfg.max_iters {
                iterations += 1;
                let (v_p, p_next) = top_eigen(&map.output(&q, true))?;
                history.push(v_p);
                if v_p - val <= cfg.value_tol {
                    converged = true;
                    break;
                }
                let (v_q, q_next) = top_eigen(&map.output(&p_next, false))?;
                history.push(v_q);
                p = p_next;
                q = q_next;
                val = v_q;
            }
            let monotone = history.windows(2).all(|w| w[1] >= w[0] - 1e-12);
            Ok(RestartOutcome {
                value: val,
                state: p,
                dual: Some(q),
                iterations,
                converged,
                monotone,
                kind,
            })
        };
        run().unwrap_or_else(|e| {
            failure.lock().expect("poisoned").get_or_insert(e);
            RestartOutcome {
                value: f64::NEG_INFINITY,
                state: start,
                dual: None,
                iterations: 0,
                converged: false,
                monotone: false,
                kind,
            }
        })
    })?;
    if let Some(e) = failure.into_inner().expect("poisoned") {
        return Err(e);
    }
    Ok(finish(cfg, structured.len(), outcomes, best, 1.0, |v| v))
}

/// Every MUB vector, then (for `n > 1`) every `n`-fold product of them.
pub fn mub_starts(fam: &MubFamily, n: usize) -> Vec<Vec<C64>> {
    let singles: Vec<Vec<C64>> = fam.bases().iter().flatten().cloned().collect();
    let mut acc = singles.clone();
    for _ in 1..n {
        acc = acc
            .iter()
            .flat_map(|a| singles.iter().map(move |b| kron_vec(a, b)))
            .collect();
    }
    acc
}

pub fn random_pure_state<R: rand::Rng + ?Sized>(dim: usize, rng: &mut R) -> PureState {
    PureState::new(sampling::haar_state(dim, rng)).expect("normalized draw")
}

/// Nearest MUB vector to a state, lowest label on ties.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MubLabel {
    pub alpha: usize,
    pub k: usize,
    pub overlap: f64,
}

pub fn nearest_mub(fam: &MubFamily, psi: &PureState) -> MubLabel {
    let mut best = MubLabel {
        alpha: 1,
        k: 0,
        overlap: f64::NEG_INFINITY,
    };
    for (a, basis) in fam.bases().iter().enumerate() {
        for (k, v) in basis.iter().enumerate() {
            let o = inner(v, psi.amplitudes()).norm_sqr();
            if o > best.overlap {
                best = MubLabel {
                    alpha: a + 1,
                    k,
                    overlap: o,
                };
            }
        }
    }
    best
}

/// Which MUB structure a `ν_∞` optimizer pair has.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NuInfPair {
    pub input: MubLabel,
    pub output: MubLabel,
    /// `|⟨P|Q⟩|²`.
    pub input_output_overlap: f64,
    /// Weight of `Q` on the input's basis with vector `k` removed.
    pub partner_weight: f64,
    /// For an orthogonal pair, the partner index `m ≠ k` in the input's
    /// basis with the largest overlap with `Q`; lowest `m` among overlaps
    /// within [`PARTNER_TIE_TOL`]. For `d ≥ 3` the optimal `Q` may be any
    /// unit vector in the span of those partners, so only the weight is
    /// meaningful there; for qubits the partner is unique.
    pub partner_k: Option<usize>,
}

pub const PARTNER_TIE_TOL: f64 = 1e-9;

pub fn classify_nu_inf_pair(fam: &MubFamily, res: &OracleResult) -> Option<NuInfPair> {
    let q = res.dual_state.as_ref()?;
    let input = nearest_mub(fam, &res.state);
    let output = nearest_mub(fam, q);
    let pq = res.state.overlap(q);
    let basis = &fam.bases()[input.alpha - 1];
    let overlaps: Vec<f64> = basis
        .iter()
        .map(|v| inner(v, q.amplitudes()).norm_sqr())
        .collect();
    let partner_weight = overlaps
        .iter()
        .enumerate()
        .filter(|(m, _)| *m != input.k)
        .map(|(_, o)| o)
        .sum();
    let partner_k = (pq < 0.5).then(|| {
        let best = overlaps
            .iter()
            .enumerate()
            .filter(|(m, _)| *m != input.k)
            .map(|(_, o)| *o)
            .fold(f64::NEG_INFINITY, f64::max);
        (0..overlaps.len())
            .find(|&m| m != input.k && overlaps[m] >= best - PARTNER_TIE_TOL)
            .expect("d >= 2")
    });
    Some(NuInfPair {
        input,
        output,
        input_output_overlap: pq,
        partner_weight,
        partner_k,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `f_max` is multiplicative and the probe must find no excess.
    CorollaryRegime,
    /// Multiplicativity is not established; excess is recorded only.
    OpenRegime,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProbeReport {
    pub n: usize,
    pub estimate: f64,
    pub baseline: f64,
    pub excess: f64,
    pub regime: Regime,
    pub flags: MultiplicativityFlags,
    pub oracle: OracleResult,
}

/// Whether a tensor probe of order `n` at dimension `d` is within budget:
/// qubits up to `n = 3`, qutrits up to `n = 2`.
pub fn probe_allowed(d: usize, n: usize) -> bool {
    matches!((d, n), (2, 1..=3) | (3, 1..=2))
}

/// Oracle estimate of `f_max(Λ^{⊗n})` against the product baseline `f_max^n`.
pub fn tensor_multiplicativity_probe(
    ch: &GeneralizedPauliChannel,
    n: usize,
    cfg: &OracleConfig,
) -> Result<ProbeReport, OracleError> {
    if !probe_allowed(ch.dim(), n) {
        return Err(OracleError::TooLarge(format!(
            "tensor probe of order {n} at d = {} (supported: d = 2 with n <= 3, d = 3 with n <= 2)",
            ch.dim()
        )));
    }
    let t = ch.tensor_power(n)?;
    let starts = mub_starts(ch.family(), n);
    let oracle = oracle_self_fidelity(&t, Sense::Max, cfg, &starts)?;
    let baseline = metrics::f_extremes(ch).f_max.powi(n as i32);
    let flags = metrics::multiplicativity_class(ch);
    Ok(ProbeReport {
        n,
        estimate: oracle.value,
        baseline,
        excess: oracle.value - baseline,
        regime: if flags.fmax_multiplicative {
            Regime::CorollaryRegime
        } else {
            Regime::OpenRegime
        },
        flags,
        oracle,
    })
}

/// `max_{α,k} ‖Λ[U_α^k] - λ_α U_α^k‖_F` for a claimed spectrum.
pub fn eigenrelation_residual(ch: &GeneralizedPauliChannel, claimed: &Spectrum) -> Result<f64, OracleError> {
    let mut worst = 0.0f64;
    for ((alpha, _), u) in ch.family().unitary_basis() {
        let lam = claimed.lambdas()[alpha - 1];
        let r = &ch.apply(&u)? - &u.scale_real(lam);
        worst = worst.max(r.frobenius_norm());
    }
    Ok(worst)
}

pub fn eigenrelation_check(ch: &GeneralizedPauliChannel) -> Result<f64, OracleError> {
    eigenrelation_residual(ch, &ch.spectrum())
}

/// Grid for [`cptp_equivalence_scan`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    /// Uniform draws from `[-1, 1]^{d+1}`.
    pub uniform: usize,
    /// Simplex points with one weight set to zero (on a Fujiwara–Algoet face).
    pub boundary: usize,
    /// Points with one weight pushed negative by 1e-4..0.2.
    pub violating: usize,
    pub seed: u64,
    pub tol: f64,
}

impl GridSpec {
    pub fn new(uniform: usize, boundary: usize, violating: usize, seed: u64) -> Self {
        Self {
            uniform,
            boundary,
            violating,
            seed,
            tol: 1e-10,
        }
    }

    pub fn total(&self) -> usize {
        self.uniform + self.boundary + self.violating + 3
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScanReport {
    pub d: usize,
    pub points: usize,
    pub fa_pass: usize,
    pub choi_pass: usize,
    pub disagreements: usize,
    /// First few spectra on which the two tests disagreed.
    pub disagreement_examples: Vec<Vec<f64>>,
    pub boundary_points: usize,
    /// Largest `|min Choi eigenvalue|` over the boundary points.
    pub worst_boundary_choi_eigenvalue: f64,
    /// Largest `|smallest Fujiwara–Algoet slack|` over the boundary points.
    pub worst_boundary_fa_slack: f64,
}

/// Outcome of both positivity tests on one spectrum.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CptpComparison {
    pub fa_pass: bool,
    pub choi_pass: bool,
    pub min_fa_slack: f64,
    pub min_choi_eigenvalue: f64,
}

pub fn compare_cptp_tests(sp: &Spectrum, fam: &MubFamily, tol: f64) -> Result<CptpComparison, OracleError> {
    let fa = sp.fujiwara_algoet_tol(tol);
    let min_eig = choi_of_spectrum(sp, fam)?.min_eigenvalue()?;
    Ok(CptpComparison {
        fa_pass: fa.passed,
        choi_pass: min_eig >= -tol,
        min_fa_slack: fa.lower_slack.min(fa.upper_slack),
        min_choi_eigenvalue: min_eig,
    })
}

/// Compares the Fujiwara–Algoet inequalities with Choi positivity over
/// random, boundary and violating spectra (plus the identity, the fully
/// depolarizing channel and the isotropic lower-boundary point).
pub fn cptp_equivalence_scan(d: usize, grid: &GridSpec) -> Result<ScanReport, OracleError> {
    if grid.total() > 100_000 {
        return Err(OracleError::TooLarge(format!("{} grid points", grid.total())));
    }
    let fam = Arc::new(MubFamily::build(d).map_err(ChannelError::from)?);
    let mut rng = ChaCha8Rng::seed_from_u64(grid.seed);
    let df = d as f64;
    let mut points: Vec<(Vec<f64>, bool)> = vec![
        (vec![1.0; d + 1], false),
        (vec![0.0; d + 1], false),
        (vec![-1.0 / ((df - 1.0) * (df + 1.0)); d + 1], true),
    ];
    for _ in 0..grid.uniform {
        points.push((sampling::random_lambdas(d, &mut rng), false));
    }
    for _ in 0..grid.boundary {
        let mut p = sampling::random_probabilities(d, &mut rng);
        let zero = rand::Rng::random_range(&mut rng, 0..p.len());
        p[zero] = 0.0;
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        points.push((Spectrum::from_probabilities(d, &p)?.lambdas().to_vec(), true));
    }
    for _ in 0..grid.violating {
        let mut p = sampling::random_probabilities(d, &mut rng);
        let bad = rand::Rng::random_range(&mut rng, 0..p.len());
        let delta: f64 = rand::Rng::random_range(&mut rng, 1e-4..0.2);
        p[bad] = 0.0;
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x *= (1.0 + delta) / s);
        p[bad] = -delta;
        points.push((Spectrum::from_probabilities(d, &p)?.lambdas().to_vec(), false));
    }

    type Row = (Vec<f64>, bool, CptpComparison);
    let results: Vec<Result<Row, OracleError>> = points
        .into_par_iter()
        .map(|(l, boundary)| {
            let sp = Spectrum::new(d, l.clone())?;
            let cmp = compare_cptp_tests(&sp, &fam, grid.tol)?;
            Ok((l, boundary, cmp))
        })
        .collect();

    let mut report = ScanReport {
        d,
        points: 0,
        fa_pass: 0,
        choi_pass: 0,
        disagreements: 0,
        disagreement_examples: Vec::new(),
        boundary_points: 0,
        worst_boundary_choi_eigenvalue: 0.0,
        worst_boundary_fa_slack: 0.0,
    };
    for r in results {
        let (l, boundary, cmp) = r?;
        report.points += 1;
        report.fa_pass += cmp.fa_pass as usize;
        report.choi_pass += cmp.choi_pass as usize;
        if cmp.fa_pass != cmp.choi_pass {
            report.disagreements += 1;
            if report.disagreement_examples.len() < 5 {
                report.disagreement_examples.push(l);
            }
        }
        if boundary {
            report.boundary_points += 1;
            report.worst_boundary_choi_eigenvalue =
                report.worst_boundary_choi_eigenvalue.max(cmp.min_choi_eigenvalue.abs());
            report.worst_boundary_fa_slack = report.worst_boundary_fa_slack.max(cmp.min_fa_slack.abs());
        }
    }
    Ok(report)
}
