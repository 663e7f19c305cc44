//! Generalized Pauli channels.
//!
//! A channel is stored by its probability vector `p_0..p_{d+1}` over a
//! shared [`MubFamily`]. Its action is
//!
//! ```text
//! Λ[X] = (d p_0 - 1)/(d - 1) · X + d/(d - 1) · Σ_α p_α Φ_α[X],
//! Φ_α[X] = Σ_k P_k^{(α)} X P_k^{(α)},
//! ```
//!
//! and every `U_α^k` is an eigenoperator with eigenvalue
//! `λ_α = (d (p_0 + p_α) - 1)/(d - 1)`.
//!
//! Superoperators use column-stacking: `vec(X)[i + j·d] = X[i][j]`.

use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ComplexMatrix, LinalgError, C64, HERMITIAN_TOL};
use crate::mub::{MubError, MubFamily};

/// Slack on `p_α ≥ 0` and `Σ p_α = 1` for in-memory construction.
pub const PROB_TOL: f64 = 1e-12;
/// Slack on the Fujiwara–Algoet inequalities for in-memory construction.
pub const FA_TOL: f64 = 1e-12;
/// Normalization drift absorbed by the spec-file loader.
pub const LOAD_DRIFT_TOL: f64 = 1e-9;
/// Largest superoperator side length `d^{2n}` a tensor power may have.
pub const MAX_SUPEROP_SIDE: usize = 4096;

#[derive(Debug, Error)]
pub enum ChannelError {
    #[error("bad probabilities: {0}")]
    BadProbabilities(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("not CPTP: {bound} violated by {violation:e}")]
    NotCptp {
        bound: FaBound,
        violation: f64,
        check: FujiwaraAlgoetCheck,
    },
    #[error("channels are defined over different MUB families")]
    FamilyMismatch,
    #[error("tensor power too large: superoperator side {side} exceeds {max}")]
    TooLarge { side: usize, max: usize },
    #[error("not a density matrix: {0}")]
    NotDensityMatrix(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Mub(#[from] MubError),
    #[error("cannot read channel spec: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse channel spec: {0}")]
    Json(#[from] serde_json::Error),
}

/// The two sides of `-1/(d-1) ≤ Σ_β λ_β ≤ 1 + d·min_β λ_β`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FaBound {
    Lower,
    Upper,
}

impl fmt::Display for FaBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaBound::Lower => f.write_str("lower Fujiwara-Algoet bound (sum of eigenvalues >= -1/(d-1))"),
            FaBound::Upper => f.write_str("upper Fujiwara-Algoet bound (sum of eigenvalues <= 1 + d*min eigenvalue)"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FujiwaraAlgoetCheck {
    /// `Σλ + 1/(d-1)`; negative when the lower bound fails.
    pub lower_slack: f64,
    /// `1 + d·min λ - Σλ`; negative when the upper bound fails.
    pub upper_slack: f64,
    pub tol: f64,
    pub passed: bool,
}

impl FujiwaraAlgoetCheck {
    /// The more badly violated bound, if any.
    pub fn violated_bound(&self) -> Option<(FaBound, f64)> {
        let lower = (self.lower_slack < -self.tol).then_some((FaBound::Lower, -self.lower_slack));
        let upper = (self.upper_slack < -self.tol).then_some((FaBound::Upper, -self.upper_slack));
        match (lower, upper) {
            (Some(l), Some(u)) => Some(if l.1 >= u.1 { l } else { u }),
            (l, u) => l.or(u),
        }
    }
}

/// Channel eigenvalues `λ_1..λ_{d+1}`, each `(d-1)`-fold degenerate.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Spectrum {
    d: usize,
    lambdas: Vec<f64>,
}

impl Spectrum {
    pub fn new(d: usize, lambdas: Vec<f64>) -> Result<Self, ChannelError> {
        if d < 2 {
            return Err(ChannelError::DimensionMismatch {
                expected: 2,
                found: d,
            });
        }
        if lambdas.len() != d + 1 {
            return Err(ChannelError::DimensionMismatch {
                expected: d + 1,
                found: lambdas.len(),
            });
        }
        Ok(Self { d, lambdas })
    }

    /// `λ_α = (d (p_0 + p_α) - 1)/(d - 1)`; no validity checks on `probs`.
    pub fn from_probabilities(d: usize, probs: &[f64]) -> Result<Self, ChannelError> {
        if probs.len() != d + 2 {
            return Err(ChannelError::DimensionMismatch {
                expected: d + 2,
                found: probs.len(),
            });
        }
        let df = d as f64;
        let lambdas = probs[1..]
            .iter()
            .map(|pa| (df * (probs[0] + pa) - 1.0) / (df - 1.0))
            .collect();
        Self::new(d, lambdas)
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn lambdas(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn max(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.lambdas.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn sum(&self) -> f64 {
        self.lambdas.iter().sum()
    }

    /// Axis label (1-based) of the largest eigenvalue; lowest label wins ties.
    pub fn argmax(&self) -> usize {
        first_index_of(&self.lambdas, self.max())
    }

    /// Axis label (1-based) of the smallest eigenvalue; lowest label wins ties.
    pub fn argmin(&self) -> usize {
        first_index_of(&self.lambdas, self.min())
    }

    /// Inverse relation back to `p_0..p_{d+1}`.
    pub fn probabilities(&self) -> Vec<f64> {
        let df = self.d as f64;
        let sum = self.sum();
        let mut p = Vec::with_capacity(self.d + 2);
        p.push((1.0 + (df - 1.0) * sum) / (df * df));
        p.extend(
            self.lambdas
                .iter()
                .map(|l| (df - 1.0) * (1.0 + df * l - sum) / (df * df)),
        );
        p
    }

    pub fn fujiwara_algoet(&self) -> FujiwaraAlgoetCheck {
        self.fujiwara_algoet_tol(FA_TOL)
    }

    pub fn fujiwara_algoet_tol(&self, tol: f64) -> FujiwaraAlgoetCheck {
        let df = self.d as f64;
        let sum = self.sum();
        let lower_slack = sum + 1.0 / (df - 1.0);
        let upper_slack = 1.0 + df * self.min() - sum;
        FujiwaraAlgoetCheck {
            lower_slack,
            upper_slack,
            tol,
            passed: lower_slack >= -tol && upper_slack >= -tol,
        }
    }

    /// Elementwise product, the spectrum of a composition.
    pub fn product(&self, other: &Spectrum) -> Result<Spectrum, ChannelError> {
        if self.d != other.d {
            return Err(ChannelError::DimensionMismatch {
                expected: self.d,
                found: other.d,
            });
        }
        Ok(Spectrum {
            d: self.d,
            lambdas: self
                .lambdas
                .iter()
                .zip(&other.lambdas)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }
}

fn first_index_of(xs: &[f64], target: f64) -> usize {
    xs.iter().position(|&x| x == target).expect("target drawn from xs") + 1
}

/// Density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix(ComplexMatrix);

impl DensityMatrix {
    pub fn new(m: ComplexMatrix) -> Result<Self, ChannelError> {
        if !m.is_square() {
            return Err(ChannelError::NotDensityMatrix("not square".into()));
        }
        let asym = m.max_hermitian_asymmetry();
        if asym > HERMITIAN_TOL {
            return Err(ChannelError::NotDensityMatrix(format!(
                "Hermiticity residual {asym:e}"
            )));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > 1e-12 {
            return Err(ChannelError::NotDensityMatrix(format!("trace {tr}")));
        }
        let min = m.min_eigenvalue()?;
        if min < -1e-10 {
            return Err(ChannelError::NotDensityMatrix(format!(
                "negative eigenvalue {min:e}"
            )));
        }
        Ok(Self(m))
    }

    /// `|ψ⟩⟨ψ|` for a unit vector.
    pub fn pure(psi: &[C64]) -> Result<Self, ChannelError> {
        Self::new(ComplexMatrix::outer(psi))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(ComplexMatrix::identity(d).scale_real(1.0 / d as f64))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_inner(self) -> ComplexMatrix {
        self.0
    }
}

/// `Φ_α[X] = Σ_k ⟨ψ_k|X|ψ_k⟩ P_k` for axis `alpha` (1-based).
pub fn dephase(fam: &MubFamily, alpha: usize, x: &ComplexMatrix) -> ComplexMatrix {
    let d = fam.dim();
    let basis = &fam.bases()[alpha - 1];
    let weights: Vec<C64> = basis.iter().map(|v| x.expectation(v)).collect();
    ComplexMatrix::from_fn(d, d, |i, j| {
        basis
            .iter()
            .zip(&weights)
            .map(|(v, w)| w * v[i] * v[j].conj())
            .sum()
    })
}

/// The affine combination defining a generalized Pauli map, evaluated for
/// arbitrary real weights (negative weights give non-CP maps).
pub fn pauli_map_apply(fam: &MubFamily, probs: &[f64], x: &ComplexMatrix) -> ComplexMatrix {
    let d = fam.dim() as f64;
    let mut out = x.scale_real((d * probs[0] - 1.0) / (d - 1.0));
    for (alpha, p) in probs[1..].iter().enumerate() {
        if *p != 0.0 {
            out = &out + &dephase(fam, alpha + 1, x).scale_real(d * p / (d - 1.0));
        }
    }
    out
}

fn superoperator_from(d: usize, apply: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let n = d * d;
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    for j in 0..d {
        for i in 0..d {
            let col = i + j * d;
            let e = ComplexMatrix::outer_pair(&unit(d, i), &unit(d, j));
            for (row, v) in apply(&e).vec_columns().into_iter().enumerate() {
                data[row * n + col] = v;
            }
        }
    }
    ComplexMatrix::new(n, n, data).expect("square superoperator")
}

fn choi_from(d: usize, apply: impl Fn(&ComplexMatrix) -> ComplexMatrix) -> ComplexMatrix {
    let n = d * d;
    let mut data = vec![C64::new(0.0, 0.0); n * n];
    let scale = 1.0 / d as f64;
    for i in 0..d {
        for j in 0..d {
            let out = apply(&ComplexMatrix::outer_pair(&unit(d, i), &unit(d, j)));
            for a in 0..d {
                for b in 0..d {
                    data[(i * d + a) * n + (j * d + b)] = out.get(a, b) * scale;
                }
            }
        }
    }
    ComplexMatrix::new(n, n, data).expect("square Choi matrix")
}

fn unit(d: usize, i: usize) -> Vec<C64> {
    (0..d)
        .map(|k| C64::new(if k == i { 1.0 } else { 0.0 }, 0.0))
        .collect()
}

/// Choi matrix of the generalized Pauli map with spectrum `sp`, whether or
/// not it is completely positive.
pub fn choi_of_spectrum(sp: &Spectrum, fam: &MubFamily) -> Result<ComplexMatrix, ChannelError> {
    if sp.dim() != fam.dim() {
        return Err(ChannelError::DimensionMismatch {
            expected: fam.dim(),
            found: sp.dim(),
        });
    }
    let probs = sp.probabilities();
    Ok(choi_from(fam.dim(), |x| pauli_map_apply(fam, &probs, x)))
}

#[derive(Clone, Debug)]
pub struct GeneralizedPauliChannel {
    probs: Vec<f64>,
    fam: Arc<MubFamily>,
}

impl GeneralizedPauliChannel {
    pub fn from_probabilities(
        d: usize,
        probs: Vec<f64>,
        fam: Arc<MubFamily>,
    ) -> Result<Self, ChannelError> {
        if fam.dim() != d {
            return Err(ChannelError::DimensionMismatch {
                expected: d,
                found: fam.dim(),
            });
        }
        if probs.len() != d + 2 {
            return Err(ChannelError::DimensionMismatch {
                expected: d + 2,
                found: probs.len(),
            });
        }
        if let Some((i, p)) = probs.iter().enumerate().find(|(_, p)| **p < -PROB_TOL || !p.is_finite()) {
            return Err(ChannelError::BadProbabilities(format!("p_{i} = {p}")));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > PROB_TOL {
            return Err(ChannelError::BadProbabilities(format!("sum {sum} != 1")));
        }
        Ok(Self { probs, fam })
    }

    pub fn from_eigenvalues(
        d: usize,
        lambdas: Vec<f64>,
        fam: Arc<MubFamily>,
    ) -> Result<Self, ChannelError> {
        if fam.dim() != d {
            return Err(ChannelError::DimensionMismatch {
                expected: d,
                found: fam.dim(),
            });
        }
        let sp = Spectrum::new(d, lambdas)?;
        let check = sp.fujiwara_algoet();
        if let Some((bound, violation)) = check.violated_bound() {
            return Err(ChannelError::NotCptp {
                bound,
                violation,
                check,
            });
        }
        Ok(Self {
            probs: sp.probabilities(),
            fam,
        })
    }

    pub fn identity(fam: Arc<MubFamily>) -> Self {
        let d = fam.dim();
        let mut probs = vec![0.0; d + 2];
        probs[0] = 1.0;
        Self { probs, fam }
    }

    /// The channel sending every state to `𝕀/d`.
    pub fn completely_depolarizing(fam: Arc<MubFamily>) -> Self {
        let d = fam.dim();
        let sp = Spectrum::new(d, vec![0.0; d + 1]).expect("d + 1 eigenvalues");
        Self {
            probs: sp.probabilities(),
            fam,
        }
    }

    pub fn dim(&self) -> usize {
        self.fam.dim()
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probs
    }

    pub fn family(&self) -> &Arc<MubFamily> {
        &self.fam
    }

    pub fn spectrum(&self) -> Spectrum {
        Spectrum::from_probabilities(self.dim(), &self.probs).expect("length checked at construction")
    }

    /// `Λ[X]` for an arbitrary `d × d` operator.
    pub fn apply(&self, x: &ComplexMatrix) -> Result<ComplexMatrix, ChannelError> {
        if x.rows() != self.dim() || x.cols() != self.dim() {
            return Err(ChannelError::DimensionMismatch {
                expected: self.dim(),
                found: x.rows(),
            });
        }
        Ok(pauli_map_apply(&self.fam, &self.probs, x))
    }

    pub fn apply_state(&self, rho: &DensityMatrix) -> Result<DensityMatrix, ChannelError> {
        self.apply(rho.matrix()).map(DensityMatrix)
    }

    /// `S` with `vec(Λ[X]) = S · vec(X)` (column-stacking).
    pub fn superoperator(&self) -> ComplexMatrix {
        superoperator_from(self.dim(), |x| pauli_map_apply(&self.fam, &self.probs, x))
    }

    /// `J = (id ⊗ Λ)[|Ω⟩⟨Ω|]` with `|Ω⟩ = Σ_i |ii⟩/√d`, so `Tr J = 1`.
    pub fn choi(&self) -> ComplexMatrix {
        choi_from(self.dim(), |x| pauli_map_apply(&self.fam, &self.probs, x))
    }

    pub fn same_family(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.fam, &other.fam) || *self.fam == *other.fam
    }

    /// `self ∘ other`; eigenvalues multiply axis by axis.
    pub fn compose(&self, other: &Self) -> Result<Self, ChannelError> {
        if !self.same_family(other) {
            return Err(ChannelError::FamilyMismatch);
        }
        let sp = self.spectrum().product(&other.spectrum())?;
        Self::from_eigenvalues(self.dim(), sp.lambdas().to_vec(), self.fam.clone())
    }

    pub fn as_generic(&self) -> GenericChannel {
        GenericChannel {
            dim: self.dim(),
            superop: self.superoperator(),
        }
    }

    /// `Λ^{⊗n}` for `n ∈ {1, 2, 3}` as a generic superoperator.
    pub fn tensor_power(&self, n: usize) -> Result<GenericChannel, ChannelError> {
        if !(1..=3).contains(&n) {
            return Err(ChannelError::BadProbabilities(format!(
                "tensor power {n} not in 1..=3"
            )));
        }
        let side = self.dim().pow(2 * n as u32);
        if side > MAX_SUPEROP_SIDE {
            return Err(ChannelError::TooLarge {
                side,
                max: MAX_SUPEROP_SIDE,
            });
        }
        let single = self.as_generic();
        let mut acc = single.clone();
        for _ in 1..n {
            acc = acc.tensor(&single);
        }
        Ok(acc)
    }
}

/// A linear map on `dim × dim` operators given by its superoperator.
#[derive(Clone, Debug, PartialEq)]
pub struct GenericChannel {
    dim: usize,
    superop: ComplexMatrix,
}

impl GenericChannel {
    pub fn new(dim: usize, superop: ComplexMatrix) -> Result<Self, ChannelError> {
        if superop.rows() != dim * dim || superop.cols() != dim * dim {
            return Err(ChannelError::DimensionMismatch {
                expected: dim * dim,
                found: superop.rows(),
            });
        }
        Ok(Self { dim, superop })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn superoperator(&self) -> &ComplexMatrix {
        &self.superop
    }

    pub fn apply(&self, x: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix::from_vec_columns(self.dim, &self.superop.mul_vec(&x.vec_columns()))
    }

    /// The Hilbert–Schmidt adjoint map.
    pub fn adjoint(&self) -> GenericChannel {
        GenericChannel {
            dim: self.dim,
            superop: self.superop.adjoint(),
        }
    }

    /// `self ⊗ other` acting on `(dim_a · dim_b)`-dimensional operators.
    pub fn tensor(&self, other: &GenericChannel) -> GenericChannel {
        let (a, b) = (self.dim, other.dim);
        let dim = a * b;
        let n = dim * dim;
        let sa = &self.superop;
        let sb = &other.superop;
        let mut data = vec![C64::new(0.0, 0.0); n * n];
        // out[c + e·D][x + y·D] = S_A[c1 + e1·a][x1 + y1·a] · S_B[c2 + e2·b][x2 + y2·b]
        for e in 0..dim {
            for c in 0..dim {
                let row = c + e * dim;
                let ra = (c / b) + (e / b) * a;
                let rb = (c % b) + (e % b) * b;
                for y in 0..dim {
                    for x in 0..dim {
                        let col = x + y * dim;
                        let ca = (x / b) + (y / b) * a;
                        let cb = (x % b) + (y % b) * b;
                        data[row * n + col] = sa.get(ra, ca) * sb.get(rb, cb);
                    }
                }
            }
        }
        GenericChannel {
            dim,
            superop: ComplexMatrix::new(n, n, data).expect("square"),
        }
    }

    /// `max |Λ[𝕀] - 𝕀|`.
    pub fn unitality_residual(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim);
        self.apply(&id).max_abs_diff(&id)
    }

    /// `max |Tr Λ[E_ij] - δ_ij|` over matrix units, which covers every input.
    pub fn trace_preservation_residual(&self) -> f64 {
        let d = self.dim;
        let mut worst = 0.0f64;
        for j in 0..d {
            for i in 0..d {
                let col = i + j * d;
                let tr: C64 = (0..d).map(|k| self.superop.get(k + k * d, col)).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

pub fn channel_from_probabilities(
    d: usize,
    probs: Vec<f64>,
    fam: Arc<MubFamily>,
) -> Result<GeneralizedPauliChannel, ChannelError> {
    GeneralizedPauliChannel::from_probabilities(d, probs, fam)
}

pub fn channel_from_eigenvalues(
    d: usize,
    lambdas: Vec<f64>,
    fam: Arc<MubFamily>,
) -> Result<GeneralizedPauliChannel, ChannelError> {
    GeneralizedPauliChannel::from_eigenvalues(d, lambdas, fam)
}

pub fn spectrum_of(ch: &GeneralizedPauliChannel) -> Spectrum {
    ch.spectrum()
}

pub fn probabilities_of(sp: &Spectrum) -> Vec<f64> {
    sp.probabilities()
}

pub fn fujiwara_algoet_check(sp: &Spectrum) -> FujiwaraAlgoetCheck {
    sp.fujiwara_algoet()
}

pub fn apply_channel(
    ch: &GeneralizedPauliChannel,
    rho: &DensityMatrix,
) -> Result<DensityMatrix, ChannelError> {
    ch.apply_state(rho)
}

pub fn superoperator_of(ch: &GeneralizedPauliChannel) -> ComplexMatrix {
    ch.superoperator()
}

pub fn choi_of(ch: &GeneralizedPauliChannel) -> ComplexMatrix {
    ch.choi()
}

pub fn compose(
    a: &GeneralizedPauliChannel,
    b: &GeneralizedPauliChannel,
) -> Result<GeneralizedPauliChannel, ChannelError> {
    a.compose(b)
}

pub fn tensor_power(ch: &GeneralizedPauliChannel, n: usize) -> Result<GenericChannel, ChannelError> {
    ch.tensor_power(n)
}

/// Channel spec file: probabilities or eigenvalues, optional MUB file.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChannelSpec {
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probabilities: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenvalues: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mub_file: Option<PathBuf>,
}

impl ChannelSpec {
    pub fn from_json_str(s: &str) -> Result<Self, ChannelError> {
        let spec: ChannelSpec = serde_json::from_str(s)?;
        match (&spec.probabilities, &spec.eigenvalues) {
            (Some(_), None) | (None, Some(_)) => Ok(spec),
            _ => Err(ChannelError::BadProbabilities(
                "exactly one of \"probabilities\" or \"eigenvalues\" must be given".into(),
            )),
        }
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ChannelError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// The MUB family: `mub_file` resolved against `base_dir`, otherwise
    /// the built-in prime construction.
    pub fn family(&self, base_dir: &Path) -> Result<Arc<MubFamily>, ChannelError> {
        let fam = match &self.mub_file {
            Some(p) => MubFamily::load(base_dir.join(p))?,
            None => MubFamily::build(self.d)?,
        };
        if fam.dim() != self.d {
            return Err(ChannelError::DimensionMismatch {
                expected: self.d,
                found: fam.dim(),
            });
        }
        Ok(Arc::new(fam))
    }

    /// Probabilities renormalized when their sum drifts by at most
    /// [`LOAD_DRIFT_TOL`].
    fn normalized_probabilities(&self, probs: &[f64]) -> Result<Vec<f64>, ChannelError> {
        if probs.len() != self.d + 2 {
            return Err(ChannelError::DimensionMismatch {
                expected: self.d + 2,
                found: probs.len(),
            });
        }
        let sum: f64 = probs.iter().sum();
        if !sum.is_finite() || (sum - 1.0).abs() > LOAD_DRIFT_TOL {
            return Err(ChannelError::BadProbabilities(format!(
                "sum {sum} drifts from 1 by more than {LOAD_DRIFT_TOL:e}"
            )));
        }
        Ok(probs.iter().map(|p| p / sum).collect())
    }

    /// Spectrum described by the file, without any positivity check.
    pub fn spectrum(&self) -> Result<Spectrum, ChannelError> {
        match (&self.probabilities, &self.eigenvalues) {
            (Some(p), _) => Spectrum::from_probabilities(self.d, &self.normalized_probabilities(p)?),
            (None, Some(l)) => Spectrum::new(self.d, l.clone()),
            (None, None) => unreachable!("checked at parse time"),
        }
    }

    pub fn build(&self, fam: Arc<MubFamily>) -> Result<GeneralizedPauliChannel, ChannelError> {
        match (&self.probabilities, &self.eigenvalues) {
            (Some(p), _) => {
                let probs = self.normalized_probabilities(p)?;
                let sp = Spectrum::from_probabilities(self.d, &probs)?;
                // report a negative weight as the Fujiwara-Algoet bound it breaks
                let check = sp.fujiwara_algoet();
                if let Some((bound, violation)) = check.violated_bound() {
                    return Err(ChannelError::NotCptp {
                        bound,
                        violation,
                        check,
                    });
                }
                GeneralizedPauliChannel::from_probabilities(self.d, probs, fam)
            }
            (None, Some(l)) => GeneralizedPauliChannel::from_eigenvalues(self.d, l.clone(), fam),
            (None, None) => unreachable!("checked at parse time"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fam(d: usize) -> Arc<MubFamily> {
        Arc::new(MubFamily::build(d).unwrap())
    }

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn identity_from_probabilities() {
        let f = fam(2);
        let ch = GeneralizedPauliChannel::from_probabilities(2, vec![1., 0., 0., 0.], f).unwrap();
        assert_eq!(ch.spectrum().lambdas(), &[1., 1., 1.]);
        assert!(ch.superoperator().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-14);
    }

    #[test]
    fn depolarizing_d3() {
        let p = vec![1. / 9., 2. / 9., 2. / 9., 2. / 9., 2. / 9.];
        let ch = GeneralizedPauliChannel::from_probabilities(3, p, fam(3)).unwrap();
        assert!(ch.spectrum().lambdas().iter().all(|l| l.abs() < 1e-15));
        let sp = Spectrum::new(3, vec![0.0; 4]).unwrap();
        assert!(close(
            &sp.probabilities(),
            &[1. / 9., 2. / 9., 2. / 9., 2. / 9., 2. / 9.],
            1e-15
        ));
    }

    #[test]
    fn pauli_point_spectrum() {
        let ch = GeneralizedPauliChannel::from_probabilities(2, vec![0.7, 0.1, 0.1, 0.1], fam(2)).unwrap();
        assert!(close(ch.spectrum().lambdas(), &[0.6, 0.6, 0.6], 1e-15));
        let ch = GeneralizedPauliChannel::from_probabilities(2, vec![0.5, 0.5, 0., 0.], fam(2)).unwrap();
        assert!(close(ch.spectrum().lambdas(), &[1., 0., 0.], 1e-15));
        let check = ch.spectrum().fujiwara_algoet();
        assert!(check.passed && check.upper_slack.abs() < 1e-15);
    }

    #[test]
    fn bad_probabilities() {
        let f = fam(2);
        assert!(matches!(
            GeneralizedPauliChannel::from_probabilities(2, vec![1.1, -0.1, 0., 0.], f.clone()),
            Err(ChannelError::BadProbabilities(_))
        ));
        assert!(matches!(
            GeneralizedPauliChannel::from_probabilities(2, vec![0.5, 0.1, 0., 0.], f.clone()),
            Err(ChannelError::BadProbabilities(_))
        ));
        assert!(matches!(
            GeneralizedPauliChannel::from_probabilities(3, vec![1., 0., 0., 0., 0.], f),
            Err(ChannelError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn eigenvalue_constructor() {
        let t = 1.0 / 3.0;
        let ch = GeneralizedPauliChannel::from_eigenvalues(2, vec![-t, -t, -t], fam(2)).unwrap();
        assert!(close(ch.probabilities(), &[0., t, t, t], 1e-15));
        let check = ch.spectrum().fujiwara_algoet();
        assert!(check.passed && check.lower_slack.abs() < 1e-15);

        let ch = GeneralizedPauliChannel::from_eigenvalues(2, vec![1., 1., 1.], fam(2)).unwrap();
        assert!(close(ch.probabilities(), &[1., 0., 0., 0.], 1e-15));

        match GeneralizedPauliChannel::from_eigenvalues(3, vec![0.5, 0.2, -0.1, 0.3], fam(3)) {
            Err(ChannelError::NotCptp {
                bound, violation, ..
            }) => {
                assert_eq!(bound, FaBound::Upper);
                assert!((violation - 0.2).abs() < 1e-12);
            }
            other => panic!("expected NotCptp, got {other:?}"),
        }
    }

    #[test]
    fn fa_check_examples() {
        let c = Spectrum::new(2, vec![1., 1., 1.]).unwrap().fujiwara_algoet();
        assert!(c.passed && c.upper_slack == 0.0);
        let c = Spectrum::new(3, vec![0.5, 0.2, -0.1, 0.3]).unwrap().fujiwara_algoet();
        assert!(!c.passed);
        assert!((c.upper_slack + 0.2).abs() < 1e-12);
        let t = 1.0 / 3.0;
        let c = Spectrum::new(2, vec![-t, -t, -t]).unwrap().fujiwara_algoet();
        assert!(c.passed && c.lower_slack.abs() < 1e-15);
    }

    #[test]
    fn probability_roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut worst = 0.0f64;
        for i in 0..1000 {
            let d = [2, 3, 5, 7][i % 4];
            let sp = Spectrum::from_probabilities(d, &sampling::random_probabilities(d, &mut rng)).unwrap();
            let back = Spectrum::from_probabilities(d, &sp.probabilities()).unwrap();
            for (a, b) in sp.lambdas().iter().zip(back.lambdas()) {
                worst = worst.max((a - b).abs());
            }
        }
        assert!(worst <= 1e-12, "round trip deviation {worst:e}");
    }

    #[test]
    fn unitality_and_identity_action() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for d in [2, 3, 5] {
            let f = fam(d);
            let ch = sampling::random_channel(f.clone(), &mut rng);
            let out = ch.apply_state(&DensityMatrix::maximally_mixed(d)).unwrap();
            assert!(out.matrix().max_abs_diff(DensityMatrix::maximally_mixed(d).matrix()) < 1e-14);

            let id = GeneralizedPauliChannel::identity(f);
            let psi = sampling::haar_state(d, &mut rng);
            let rho = DensityMatrix::pure(&psi).unwrap();
            assert!(id.apply_state(&rho).unwrap().matrix().max_abs_diff(rho.matrix()) < 1e-14);

            let x = sampling::random_operator(d, &mut rng);
            let tr_in = x.trace();
            let tr_out = ch.apply(&x).unwrap().trace();
            assert!((tr_in - tr_out).norm() < 1e-12);
        }
    }

    #[test]
    fn output_is_density_matrix() {
        let mut rng = ChaCha8Rng::seed_from_u64(81);
        let f = fam(3);
        for _ in 0..20 {
            let ch = sampling::random_channel(f.clone(), &mut rng);
            let rho = DensityMatrix::pure(&sampling::haar_state(3, &mut rng)).unwrap();
            let out = ch.apply_state(&rho).unwrap();
            assert!(DensityMatrix::new(out.into_inner()).is_ok());
        }
    }

    #[test]
    fn fixed_point_on_preserved_axis() {
        let f = fam(2);
        let ch = GeneralizedPauliChannel::from_eigenvalues(2, vec![1., 0., 0.], f.clone()).unwrap();
        let p = f.projector(1, 0).unwrap();
        assert!(ch.apply(&p).unwrap().max_abs_diff(&p) < 1e-14);
    }

    #[test]
    fn eigen_relations_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in [2, 3, 5, 7] {
            let f = fam(d);
            let ch = sampling::random_channel(f.clone(), &mut rng);
            let sp = ch.spectrum();
            let s = ch.superoperator();
            for ((alpha, _), u) in f.unitary_basis() {
                let lam = sp.lambdas()[alpha - 1];
                let direct = &ch.apply(&u).unwrap() - &u.scale_real(lam);
                assert!(direct.frobenius_norm() <= 1e-12);
                let v = u.vec_columns();
                let sv = s.mul_vec(&v);
                let worst = sv
                    .iter()
                    .zip(&v)
                    .map(|(a, b)| (a - b * lam).norm())
                    .fold(0.0, f64::max);
                assert!(worst <= 1e-12);
            }
        }
    }

    #[test]
    fn superoperator_matches_apply() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for d in [2, 3] {
            let ch = sampling::random_channel(fam(d), &mut rng);
            let g = ch.as_generic();
            for _ in 0..20 {
                let h = sampling::random_hermitian(d, &mut rng);
                assert!(g.apply(&h).max_abs_diff(&ch.apply(&h).unwrap()) < 1e-10);
            }
        }
    }

    #[test]
    fn depolarizing_kills_traceless() {
        let ch = GeneralizedPauliChannel::completely_depolarizing(fam(2));
        let z = ComplexMatrix::diag(&[1.0, -1.0]);
        let out = ch.superoperator().mul_vec(&z.vec_columns());
        assert!(out.iter().all(|x| x.norm() < 1e-15));
    }

    #[test]
    fn choi_examples() {
        let f = fam(2);
        let j = GeneralizedPauliChannel::identity(f.clone()).choi();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let omega = vec![C64::new(s, 0.), C64::new(0., 0.), C64::new(0., 0.), C64::new(s, 0.)];
        assert!(j.max_abs_diff(&ComplexMatrix::outer(&omega)) < 1e-15);

        let j = GeneralizedPauliChannel::completely_depolarizing(fam(3)).choi();
        let target = ComplexMatrix::identity(3)
            .scale_real(1. / 3.)
            .kron(&ComplexMatrix::identity(3).scale_real(1. / 3.));
        assert!(j.max_abs_diff(&target) < 1e-15);

        let t = 1.0 / 3.0;
        let ch = GeneralizedPauliChannel::from_eigenvalues(2, vec![-t, -t, -t], f).unwrap();
        let j = ch.choi();
        assert!((j.trace().re - 1.0).abs() < 1e-14);
        assert!(j.min_eigenvalue().unwrap().abs() < 1e-10);
    }

    #[test]
    fn compose_examples() {
        let f = fam(2);
        let a = GeneralizedPauliChannel::from_probabilities(2, vec![0.7, 0.1, 0.1, 0.1], f.clone()).unwrap();
        let sq = a.compose(&a).unwrap();
        assert!(close(sq.spectrum().lambdas(), &[0.36, 0.36, 0.36], 1e-14));
        let id = GeneralizedPauliChannel::identity(f.clone());
        assert!(close(id.compose(&a).unwrap().probabilities(), a.probabilities(), 1e-14));

        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for d in [2, 3, 5] {
            let f = fam(d);
            let a = sampling::random_channel(f.clone(), &mut rng);
            let b = sampling::random_channel(f, &mut rng);
            let lhs = a.compose(&b).unwrap().superoperator();
            let rhs = &a.superoperator() * &b.superoperator();
            assert!(lhs.max_abs_diff(&rhs) < 1e-10);
        }
    }

    #[test]
    fn compose_rejects_foreign_family() {
        let f = fam(3);
        let rotated = crate::sampling::rotated_family(&f, &mut ChaCha8Rng::seed_from_u64(1));
        let a = GeneralizedPauliChannel::identity(f);
        let b = GeneralizedPauliChannel::identity(Arc::new(rotated));
        assert!(matches!(a.compose(&b), Err(ChannelError::FamilyMismatch)));
    }

    #[test]
    fn tensor_power_examples() {
        let f = fam(2);
        let ch = GeneralizedPauliChannel::from_probabilities(2, vec![0.7, 0.1, 0.1, 0.1], f.clone()).unwrap();
        assert_eq!(ch.tensor_power(1).unwrap(), ch.as_generic());

        let id2 = GeneralizedPauliChannel::identity(f.clone()).tensor_power(2).unwrap();
        assert!(id2.superoperator().max_abs_diff(&ComplexMatrix::identity(16)) < 1e-15);

        let dep = GeneralizedPauliChannel::completely_depolarizing(f).tensor_power(2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let a = sampling::haar_state(2, &mut rng);
        let b = sampling::haar_state(2, &mut rng);
        let rho = ComplexMatrix::outer(&crate::linalg::kron_vec(&a, &b));
        let out = dep.apply(&rho);
        assert!(out.max_abs_diff(&ComplexMatrix::identity(4).scale_real(0.25)) < 1e-14);
    }

    #[test]
    fn tensor_power_acts_as_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for (d, n) in [(2, 2), (2, 3), (3, 2)] {
            let ch = sampling::random_channel(fam(d), &mut rng);
            let t = ch.tensor_power(n).unwrap();
            assert!(t.unitality_residual() < 1e-12);
            assert!(t.trace_preservation_residual() < 1e-12);
            let xs: Vec<ComplexMatrix> = (0..n).map(|_| sampling::random_operator(d, &mut rng)).collect();
            let input = xs.iter().skip(1).fold(xs[0].clone(), |acc, x| acc.kron(x));
            let expect = xs
                .iter()
                .map(|x| ch.apply(x).unwrap())
                .reduce(|acc, y| acc.kron(&y))
                .unwrap();
            assert!(t.apply(&input).max_abs_diff(&expect) < 1e-12);
        }
    }

    #[test]
    fn tensor_guard() {
        let ch = GeneralizedPauliChannel::identity(fam(7));
        assert!(matches!(ch.tensor_power(3), Err(ChannelError::TooLarge { .. })));
        assert!(ch.tensor_power(4).is_err());
    }

    #[test]
    fn spec_file_parsing() {
        let s = r#"{"d": 2, "probabilities": [0.7, 0.1, 0.1, 0.1000000001]}"#;
        let spec = ChannelSpec::from_json_str(s).unwrap();
        let ch = spec.build(fam(2)).unwrap();
        assert!((ch.probabilities().iter().sum::<f64>() - 1.0).abs() < 1e-15);

        let s = r#"{"d": 2, "probabilities": [0.7, 0.1, 0.1, 0.2]}"#;
        let spec = ChannelSpec::from_json_str(s).unwrap();
        assert!(matches!(spec.build(fam(2)), Err(ChannelError::BadProbabilities(_))));

        let s = r#"{"d": 3, "eigenvalues": [0.5, 0.2, -0.1, 0.3]}"#;
        let spec = ChannelSpec::from_json_str(s).unwrap();
        assert!(matches!(spec.build(fam(3)), Err(ChannelError::NotCptp { .. })));

        assert!(ChannelSpec::from_json_str(r#"{"d": 2}"#).is_err());
        assert!(ChannelSpec::from_json_str(r#"{"d": 2, "eigenvalues": [1,1,1], "probabilities": [1,0,0,0]}"#).is_err());
    }
}
