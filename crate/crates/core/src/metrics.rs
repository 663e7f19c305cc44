//! Closed-form fidelity and output-norm quantities of a generalized Pauli
//! channel.
//!
//! With `λ_max`/`λ_min` the extreme channel eigenvalues:
//!
//! ```text
//! f_min = (1 + (d-1) λ_min)/d          f_max = (1 + (d-1) λ_max)/d
//! ν_2   = sqrt((1 + (d-1) max λ_α²)/d)
//! ν_∞   = max(1 + (d-1) λ_max, 1 - λ_min)/d
//! ```
//!
//! Ties between axes are broken toward the lowest axis label everywhere.

use serde::Serialize;
use thiserror::Error;

use crate::channel::{ChannelError, GeneralizedPauliChannel, Spectrum};
use crate::linalg::{inner, norm, ComplexMatrix, C64};
use crate::mub::MubFamily;
use crate::oracle::{self, OracleConfig, OracleError};

/// Slack toward `true` when a multiplicativity condition holds with equality.
pub const FLAG_SLACK: f64 = 1e-12;
/// Unit-norm tolerance for pure states.
pub const UNIT_TOL: f64 = 1e-12;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: channel acts on d = {expected}, state has length {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("state is not normalized: norm {0}")]
    NotUnit(f64),
    #[error("regularization order {0} not in 1..=3")]
    BadOrder(usize),
    #[error(transparent)]
    Channel(#[from] ChannelError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// A unit vector, optionally expanded in the unitary operator basis.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

/// Coefficients `x_{αk}` of `|ψ⟩⟨ψ| = (𝕀 + Σ x_{αk} U_α^k)/d`, indexed
/// `[α - 1][k - 1]`.
pub type UnitaryCoefficients = Vec<Vec<C64>>;

impl PureState {
    pub fn new(amplitudes: Vec<C64>) -> Result<Self, MetricsError> {
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > UNIT_TOL {
            return Err(MetricsError::NotUnit(n));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales a nonzero vector to unit norm.
    pub fn normalized(v: Vec<C64>) -> Result<Self, MetricsError> {
        let n = norm(&v);
        if n.is_nan() || n <= 0.0 || !n.is_finite() {
            return Err(MetricsError::NotUnit(n));
        }
        Ok(Self {
            amplitudes: v.into_iter().map(|z| z / n).collect(),
        })
    }

    /// The MUB vector `ψ_k^{(α)}`.
    pub fn mub(fam: &MubFamily, alpha: usize, k: usize) -> Result<Self, ChannelError> {
        Ok(Self {
            amplitudes: fam.vector(alpha, k)?.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn projector(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.amplitudes)
    }

    pub fn overlap(&self, other: &PureState) -> f64 {
        inner(&self.amplitudes, &other.amplitudes).norm_sqr()
    }

    /// `x_{αk} = Tr((U_α^k)† P) = ⟨ψ|(U_α^k)†|ψ⟩`.
    pub fn coefficients(&self, fam: &MubFamily) -> Result<UnitaryCoefficients, MetricsError> {
        if self.dim() != fam.dim() {
            return Err(MetricsError::DimensionMismatch {
                expected: fam.dim(),
                found: self.dim(),
            });
        }
        let d = fam.dim();
        Ok((1..=fam.num_axes())
            .map(|alpha| {
                (1..d)
                    .map(|k| {
                        let u = fam.unbiased_unitary(alpha, k).expect("in range");
                        u.expectation(&self.amplitudes).conj()
                    })
                    .collect()
            })
            .collect())
    }
}

/// `Σ_{α,k} |x_{αk}|²`, equal to `d - 1` for every pure state.
pub fn coefficient_weight(x: &UnitaryCoefficients) -> f64 {
    x.iter().flatten().map(|z| z.norm_sqr()).sum()
}

/// `Σ_{α,k} x_{αk} conj(y_{αk})`, equal to `d Tr(PQ) - 1`.
pub fn coefficient_overlap(x: &UnitaryCoefficients, y: &UnitaryCoefficients) -> C64 {
    x.iter()
        .flatten()
        .zip(y.iter().flatten())
        .map(|(a, b)| a * b.conj())
        .sum()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityExtremes {
    pub f_min: f64,
    pub f_max: f64,
    pub argmin_alpha: usize,
    pub argmax_alpha: usize,
    /// `p_0 + min_{α>0} p_α`.
    pub f_min_from_probabilities: f64,
    /// `p_0 + max_{α>0} p_α`.
    pub f_max_from_probabilities: f64,
}

impl FidelityExtremes {
    /// Disagreement between the eigenvalue and probability forms.
    pub fn form_residual(&self) -> f64 {
        (self.f_min - self.f_min_from_probabilities)
            .abs()
            .max((self.f_max - self.f_max_from_probabilities).abs())
    }
}

fn fidelity_of_eigenvalue(d: usize, lambda: f64) -> f64 {
    let df = d as f64;
    (1.0 + (df - 1.0) * lambda) / df
}

pub fn f_extremes(ch: &GeneralizedPauliChannel) -> FidelityExtremes {
    let sp = ch.spectrum();
    let d = ch.dim();
    let p = ch.probabilities();
    let rest = &p[1..];
    let pmin = rest.iter().copied().fold(f64::INFINITY, f64::min);
    let pmax = rest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    FidelityExtremes {
        f_min: fidelity_of_eigenvalue(d, sp.min()),
        f_max: fidelity_of_eigenvalue(d, sp.max()),
        argmin_alpha: sp.argmin(),
        argmax_alpha: sp.argmax(),
        f_min_from_probabilities: p[0] + pmin,
        f_max_from_probabilities: p[0] + pmax,
    }
}

fn check_state_dim(ch: &GeneralizedPauliChannel, psi: &PureState) -> Result<(), MetricsError> {
    if psi.dim() != ch.dim() {
        return Err(MetricsError::DimensionMismatch {
            expected: ch.dim(),
            found: psi.dim(),
        });
    }
    Ok(())
}

/// `Tr(P Λ[P]) = (1 + Σ_α λ_α Σ_k |x_{αk}|²)/d`.
pub fn pointwise_fidelity(ch: &GeneralizedPauliChannel, psi: &PureState) -> Result<f64, MetricsError> {
    check_state_dim(ch, psi)?;
    let x = psi.coefficients(ch.family())?;
    let sp = ch.spectrum();
    let weighted: f64 = sp
        .lambdas()
        .iter()
        .zip(&x)
        .map(|(l, row)| l * row.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    Ok((1.0 + weighted) / ch.dim() as f64)
}

/// `⟨ψ|Λ[|ψ⟩⟨ψ|]|ψ⟩` evaluated with matrices.
pub fn direct_fidelity(ch: &GeneralizedPauliChannel, psi: &PureState) -> Result<f64, MetricsError> {
    check_state_dim(ch, psi)?;
    let out = ch.apply(&psi.projector())?;
    Ok(out.expectation(psi.amplitudes()).re)
}

fn nu2_of(sp: &Spectrum) -> f64 {
    let df = sp.dim() as f64;
    let m = sp.lambdas().iter().map(|l| l * l).fold(0.0, f64::max);
    ((1.0 + (df - 1.0) * m) / df).sqrt()
}

pub fn nu2(ch: &GeneralizedPauliChannel) -> f64 {
    nu2_of(&ch.spectrum())
}

/// Axis whose MUB projectors attain `ν_2` (largest `λ_α²`, lowest label on ties).
pub fn nu2_argmax(ch: &GeneralizedPauliChannel) -> usize {
    let sp = ch.spectrum();
    let sq: Vec<f64> = sp.lambdas().iter().map(|l| l * l).collect();
    let m = sq.iter().copied().fold(0.0, f64::max);
    sq.iter().position(|&x| x == m).expect("nonempty") + 1
}

fn nu_inf_of(sp: &Spectrum) -> f64 {
    let df = sp.dim() as f64;
    (1.0 + (df - 1.0) * sp.max()).max(1.0 - sp.min()) / df
}

pub fn nu_inf(ch: &GeneralizedPauliChannel) -> f64 {
    nu_inf_of(&ch.spectrum())
}

/// Whether [`nu_inf`] is known to be the true maximum and not only the value
/// on MUB pairs: always for qubits, and for `d ≥ 3` when every `λ_α ≥ 0`
/// (then `Σ_α λ_α Σ_k x_αk ȳ_αk ≤ (d - 1) λ_max` by Cauchy–Schwarz). With
/// mixed signs and `d ≥ 3` non-MUB inputs can do strictly better.
pub fn nu_inf_certified(ch: &GeneralizedPauliChannel) -> bool {
    let sp = ch.spectrum();
    sp.dim() == 2 || sp.min() >= 0.0
}

/// `|f_max(Λ∘Λ) - ν_2(Λ)²|`; generalized Pauli channels are self-adjoint,
/// so `Λ†Λ = Λ∘Λ`.
pub fn nu2_fmax_identity(ch: &GeneralizedPauliChannel) -> Result<f64, MetricsError> {
    let sq = ch.compose(ch)?;
    let n2 = nu2(ch);
    Ok((f_extremes(&sq).f_max - n2 * n2).abs())
}

/// Which extremal quantities factorize over `Λ ⊗ Λ`.
///
/// `fmax_multiplicative` requires `λ_max ≥ |λ_min|` and
/// `fmin_multiplicative` requires `-λ_min ≥ |λ_max|`. These agree with the
/// modulus comparisons `|λ_max| ≥ |λ_min|` and `|λ_max| ≤ |λ_min|` except
/// when every eigenvalue equals the same nonzero `c`: then the channel is
/// depolarizing and a maximally entangled input beats every product state
/// (for `c < 0` on the maximum, for `0 < c < 1` on the minimum). The
/// identity (`c = 1`) is multiplicative on both.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MultiplicativityFlags {
    pub fmax_multiplicative: bool,
    pub fmin_multiplicative: bool,
    pub nuinf_equals_fmax: bool,
    pub nuinf_multiplicative: bool,
}

impl MultiplicativityFlags {
    /// Four-character bit string in field order, e.g. `"1011"`.
    pub fn bits(&self) -> String {
        [
            self.fmax_multiplicative,
            self.fmin_multiplicative,
            self.nuinf_equals_fmax,
            self.nuinf_multiplicative,
        ]
        .iter()
        .map(|b| if *b { '1' } else { '0' })
        .collect()
    }
}

fn flags_of(sp: &Spectrum) -> MultiplicativityFlags {
    let (hi, lo) = (sp.max(), sp.min());
    let df = sp.dim() as f64;
    let fmax = hi >= lo.abs() - FLAG_SLACK;
    let fmin = -lo >= hi.abs() - FLAG_SLACK || lo >= 1.0 - FLAG_SLACK;
    let eq = hi >= -lo / (df - 1.0) - FLAG_SLACK;
    MultiplicativityFlags {
        fmax_multiplicative: fmax,
        fmin_multiplicative: fmin,
        nuinf_equals_fmax: eq,
        nuinf_multiplicative: eq && fmax,
    }
}

pub fn multiplicativity_class(ch: &GeneralizedPauliChannel) -> MultiplicativityFlags {
    flags_of(&ch.spectrum())
}

/// Whether `ν_2` is attained on the MUB states attaining `f_max` / `f_min`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Attainment {
    pub nu2_argmax_alpha: usize,
    pub fmax_state_alpha: usize,
    pub fmin_state_alpha: usize,
    pub nu2_at_fmax_state: bool,
    pub nu2_at_fmin_state: bool,
}

/// Evaluates `‖Λ[P_0^{(α)}]‖_2` at the two extremal axes and compares with `ν_2`.
pub fn attainment(ch: &GeneralizedPauliChannel) -> Attainment {
    let ext = f_extremes(ch);
    let target = nu2(ch);
    let out_norm = |alpha: usize| {
        let p = ch.family().projector(alpha, 0).expect("axis in range");
        let out = ch.apply(&p).expect("dimension matches");
        (&out * &out).trace().re.sqrt()
    };
    Attainment {
        nu2_argmax_alpha: nu2_argmax(ch),
        fmax_state_alpha: ext.argmax_alpha,
        fmin_state_alpha: ext.argmin_alpha,
        nu2_at_fmax_state: (out_norm(ext.argmax_alpha) - target).abs() <= 1e-12,
        nu2_at_fmin_state: (out_norm(ext.argmin_alpha) - target).abs() <= 1e-12,
    }
}

#[derive(Clone, Debug)]
pub enum RegularizationMode {
    Closed,
    Oracle(OracleConfig),
}

/// `f_max^{(n)}`: exact where multiplicativity is established, otherwise
/// bounds.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegularizedFmax {
    Exact {
        value: f64,
    },
    Bracket {
        /// `f_max(Λ)`, attained by product states.
        lower: f64,
        /// `ν_∞(Λ)`.
        upper: f64,
        /// Largest `(oracle f_max(Λ^{⊗m}))^{1/m}` over `m ≤ n`, a lower
        /// bound on the asymptotic regularization.
        #[serde(skip_serializing_if = "Option::is_none")]
        oracle_lower: Option<f64>,
        /// `(m, oracle estimate of f_max(Λ^{⊗m}))` for each probed order.
        #[serde(skip_serializing_if = "Vec::is_empty")]
        oracle_estimates: Vec<(usize, f64)>,
    },
}

impl RegularizedFmax {
    /// The best lower bound carried by this value.
    pub fn lower_bound(&self) -> f64 {
        match self {
            RegularizedFmax::Exact { value } => *value,
            RegularizedFmax::Bracket {
                lower,
                oracle_lower,
                ..
            } => oracle_lower.map_or(*lower, |o| o.max(*lower)),
        }
    }
}

pub fn regularized_fmax(
    ch: &GeneralizedPauliChannel,
    n: usize,
    mode: &RegularizationMode,
) -> Result<RegularizedFmax, MetricsError> {
    if !(1..=3).contains(&n) {
        return Err(MetricsError::BadOrder(n));
    }
    let ext = f_extremes(ch);
    if multiplicativity_class(ch).fmax_multiplicative {
        return Ok(RegularizedFmax::Exact { value: ext.f_max });
    }
    let upper = nu_inf(ch);
    let (oracle_lower, oracle_estimates) = match mode {
        RegularizationMode::Closed => (None, Vec::new()),
        RegularizationMode::Oracle(cfg) => {
            let mut estimates = Vec::new();
            let mut best = ext.f_max;
            for m in 2..=n {
                let probe = oracle::tensor_multiplicativity_probe(ch, m, cfg)?;
                best = best.max(probe.estimate.powf(1.0 / m as f64));
                estimates.push((m, probe.estimate));
            }
            (Some(best), estimates)
        }
    };
    Ok(RegularizedFmax::Bracket {
        lower: ext.f_max,
        upper,
        oracle_lower,
        oracle_estimates,
    })
}

/// Every closed-form quantity for one channel.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FidelityReport {
    pub f_min: f64,
    pub f_max: f64,
    pub nu2: f64,
    pub nu_inf: f64,
    /// See [`nu_inf_certified`].
    pub nu_inf_certified: bool,
    pub argmin_alpha: usize,
    pub argmax_alpha: usize,
    pub flags: MultiplicativityFlags,
    pub attainment: Attainment,
    pub regularized_fmax: RegularizedFmax,
}

impl FidelityReport {
    pub fn closed_form(ch: &GeneralizedPauliChannel) -> Self {
        let ext = f_extremes(ch);
        Self {
            f_min: ext.f_min,
            f_max: ext.f_max,
            nu2: nu2(ch),
            nu_inf: nu_inf(ch),
            nu_inf_certified: nu_inf_certified(ch),
            argmin_alpha: ext.argmin_alpha,
            argmax_alpha: ext.argmax_alpha,
            flags: multiplicativity_class(ch),
            attainment: attainment(ch),
            regularized_fmax: regularized_fmax(ch, 1, &RegularizationMode::Closed)
                .expect("closed mode cannot fail"),
        }
    }

    /// `0 ≤ f_min ≤ f_max ≤ ν_∞ ≤ 1` up to `tol`.
    pub fn chain_holds(&self, tol: f64) -> bool {
        -tol <= self.f_min
            && self.f_min <= self.f_max + tol
            && self.f_max <= self.nu_inf + tol
            && self.nu_inf <= 1.0 + tol
    }
}
