//! Complete sets of mutually unbiased bases and the unitary operator basis
//! built from them.
//!
//! Axes are labelled `1..=d+1`. Axis 1 is always the computational basis.
//!
//! * `d = 2`: axis 2 is the σ_x eigenbasis `(|0⟩ ± |1⟩)/√2` and axis 3 the
//!   σ_y eigenbasis `(|0⟩ ± i|1⟩)/√2`, the `+` vector first. With this
//!   ordering `U_α^1` is σ_z, σ_x and σ_y for α = 1, 2, 3.
//! * odd prime `d`: axis `j + 1` (`j = 1..=d`) holds the vectors
//!   `ψ_k[l] = ω^{(j mod d) l² + k l} / √d`, so axis `d + 1` is the Fourier
//!   basis.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{inner, ComplexMatrix, C64};

/// Tolerance applied to freshly constructed families.
pub const BUILD_TOL: f64 = 1e-12;
/// Tolerance applied to families loaded from file.
pub const LOAD_TOL: f64 = 1e-10;
pub const MAX_BUILTIN_DIMENSION: usize = 31;

#[derive(Debug, Error)]
pub enum MubError {
    #[error("no built-in MUB construction for d = {d} (supported: primes 2..=31); supply a MUB file")]
    UnsupportedDimension { d: usize },
    #[error("{what} index {value} out of range {lo}..={hi}")]
    IndexOutOfRange {
        what: &'static str,
        value: usize,
        lo: usize,
        hi: usize,
    },
    #[error("MUB family failed validation: orthonormality residual {:e}, unbiasedness residual {:e} (tol {:e})", .0.orthonormality_residual, .0.unbiasedness_residual, .0.tol)]
    ValidationFailed(ValidationReport),
    #[error("malformed MUB family: {0}")]
    Malformed(String),
    #[error("cannot read MUB file: {0}")]
    Io(#[from] std::io::Error),
    #[error("cannot parse MUB file: {0}")]
    Json(#[from] serde_json::Error),
}

/// Worst-case residuals of the two MUB conditions.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub orthonormality_residual: f64,
    pub unbiasedness_residual: f64,
    pub tol: f64,
    pub passed: bool,
}

/// `d + 1` pairwise unbiased orthonormal bases of `ℂ^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MubFamily {
    d: usize,
    /// `bases[α - 1][k]` is the vector `ψ_k^{(α)}`.
    bases: Vec<Vec<Vec<C64>>>,
}

/// On-disk layout: every complex number is a `[re, im]` pair.
#[derive(Debug, Serialize, Deserialize)]
pub struct MubFile {
    pub d: usize,
    pub bases: Vec<Vec<Vec<[f64; 2]>>>,
}

pub fn is_prime(n: usize) -> bool {
    n >= 2 && (2..).take_while(|p| p * p <= n).all(|p| !n.is_multiple_of(p))
}

/// `ω^e` with `ω = e^{2πi/d}`; the exponent is reduced mod `d` first.
pub fn omega_pow(d: usize, e: i64) -> C64 {
    let r = e.rem_euclid(d as i64) as f64;
    C64::from_polar(1.0, 2.0 * PI * r / d as f64)
}

impl MubFamily {
    /// Built-in construction for prime `d`; validated at [`BUILD_TOL`].
    pub fn build(d: usize) -> Result<Self, MubError> {
        if !is_prime(d) || d > MAX_BUILTIN_DIMENSION {
            return Err(MubError::UnsupportedDimension { d });
        }
        let computational: Vec<Vec<C64>> = (0..d)
            .map(|k| {
                (0..d)
                    .map(|l| C64::new(if k == l { 1.0 } else { 0.0 }, 0.0))
                    .collect()
            })
            .collect();
        let mut bases = vec![computational];
        if d == 2 {
            let s = FRAC_1_SQRT_2;
            let c = |re, im| C64::new(re, im);
            bases.push(vec![vec![c(s, 0.), c(s, 0.)], vec![c(s, 0.), c(-s, 0.)]]);
            bases.push(vec![vec![c(s, 0.), c(0., s)], vec![c(s, 0.), c(0., -s)]]);
        } else {
            let norm = 1.0 / (d as f64).sqrt();
            for j in 1..=d {
                let a = (j % d) as i64;
                let basis = (0..d as i64)
                    .map(|k| {
                        (0..d as i64)
                            .map(|l| omega_pow(d, a * l * l + k * l) * norm)
                            .collect()
                    })
                    .collect();
                bases.push(basis);
            }
        }
        Self::from_bases(d, bases, BUILD_TOL)
    }

    /// Wraps and validates a complete family of `d + 1` bases.
    pub fn from_bases(d: usize, bases: Vec<Vec<Vec<C64>>>, tol: f64) -> Result<Self, MubError> {
        if bases.len() != d + 1 {
            return Err(MubError::Malformed(format!(
                "expected {} bases for d = {d}, got {}",
                d + 1,
                bases.len()
            )));
        }
        let fam = Self::from_bases_unchecked(d, bases)?;
        let report = fam.validate(tol);
        if !report.passed {
            return Err(MubError::ValidationFailed(report));
        }
        Ok(fam)
    }

    /// Wraps bases after checking shapes only. Any number of bases is
    /// accepted; use [`validate`](Self::validate) to inspect the result.
    pub fn from_bases_unchecked(d: usize, bases: Vec<Vec<Vec<C64>>>) -> Result<Self, MubError> {
        if d < 2 {
            return Err(MubError::Malformed(format!("dimension {d} < 2")));
        }
        for (a, basis) in bases.iter().enumerate() {
            if basis.len() != d || basis.iter().any(|v| v.len() != d) {
                return Err(MubError::Malformed(format!(
                    "basis {} is not {d} vectors of length {d}",
                    a + 1
                )));
            }
        }
        Ok(Self { d, bases })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// Number of stored bases (`d + 1` for a complete family).
    pub fn num_axes(&self) -> usize {
        self.bases.len()
    }

    pub fn bases(&self) -> &[Vec<Vec<C64>>] {
        &self.bases
    }

    fn check_axis(&self, alpha: usize) -> Result<(), MubError> {
        if alpha == 0 || alpha > self.bases.len() {
            return Err(MubError::IndexOutOfRange {
                what: "axis",
                value: alpha,
                lo: 1,
                hi: self.bases.len(),
            });
        }
        Ok(())
    }

    fn check_vector(&self, k: usize) -> Result<(), MubError> {
        if k >= self.d {
            return Err(MubError::IndexOutOfRange {
                what: "vector",
                value: k,
                lo: 0,
                hi: self.d - 1,
            });
        }
        Ok(())
    }

    /// `ψ_k^{(α)}` for axis `alpha ∈ 1..=d+1` and `k ∈ 0..d`.
    pub fn vector(&self, alpha: usize, k: usize) -> Result<&[C64], MubError> {
        self.check_axis(alpha)?;
        self.check_vector(k)?;
        Ok(&self.bases[alpha - 1][k])
    }

    /// `P_k^{(α)} = |ψ_k^{(α)}⟩⟨ψ_k^{(α)}|`.
    pub fn projector(&self, alpha: usize, k: usize) -> Result<ComplexMatrix, MubError> {
        Ok(ComplexMatrix::outer(self.vector(alpha, k)?))
    }

    /// `U_α^k = Σ_l ω^{kl} P_l^{(α)}` for `k ∈ 1..d`.
    pub fn unbiased_unitary(&self, alpha: usize, k: usize) -> Result<ComplexMatrix, MubError> {
        self.check_axis(alpha)?;
        if k == 0 || k >= self.d {
            return Err(MubError::IndexOutOfRange {
                what: "power",
                value: k,
                lo: 1,
                hi: self.d - 1,
            });
        }
        let d = self.d;
        let basis = &self.bases[alpha - 1];
        let phases: Vec<C64> = (0..d).map(|l| omega_pow(d, (k * l) as i64)).collect();
        Ok(ComplexMatrix::from_fn(d, d, |i, j| {
            basis
                .iter()
                .zip(&phases)
                .map(|(v, w)| w * v[i] * v[j].conj())
                .sum()
        }))
    }

    /// Every `U_α^k` in axis-major order, paired with its `(α, k)` label.
    pub fn unitary_basis(&self) -> Vec<((usize, usize), ComplexMatrix)> {
        let mut out = Vec::with_capacity(self.bases.len() * (self.d - 1));
        for alpha in 1..=self.bases.len() {
            for k in 1..self.d {
                let u = self.unbiased_unitary(alpha, k).expect("indices in range");
                out.push(((alpha, k), u));
            }
        }
        out
    }

    /// Worst-case orthonormality and unbiasedness residuals.
    pub fn validate(&self, tol: f64) -> ValidationReport {
        let d = self.d;
        let mut ortho = 0.0f64;
        for basis in &self.bases {
            for (k, u) in basis.iter().enumerate() {
                for (l, v) in basis.iter().enumerate() {
                    let target = if k == l { 1.0 } else { 0.0 };
                    ortho = ortho.max((inner(u, v) - target).norm());
                }
            }
        }
        let mut unbiased = 0.0f64;
        let inv_d = 1.0 / d as f64;
        for (a, basis_a) in self.bases.iter().enumerate() {
            for basis_b in &self.bases[a + 1..] {
                for u in basis_a {
                    for v in basis_b {
                        unbiased = unbiased.max((inner(u, v).norm_sqr() - inv_d).abs());
                    }
                }
            }
        }
        ValidationReport {
            orthonormality_residual: ortho,
            unbiasedness_residual: unbiased,
            tol,
            passed: ortho <= tol && unbiased <= tol,
        }
    }

    pub fn to_file(&self) -> MubFile {
        MubFile {
            d: self.d,
            bases: self
                .bases
                .iter()
                .map(|b| {
                    b.iter()
                        .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
                        .collect()
                })
                .collect(),
        }
    }

    /// Parses and re-validates a family at [`LOAD_TOL`].
    pub fn from_file(file: MubFile) -> Result<Self, MubError> {
        let bases = file
            .bases
            .into_iter()
            .map(|b| {
                b.into_iter()
                    .map(|v| v.into_iter().map(|[re, im]| C64::new(re, im)).collect())
                    .collect()
            })
            .collect();
        Self::from_bases(file.d, bases, LOAD_TOL)
    }

    pub fn from_json_str(s: &str) -> Result<Self, MubError> {
        Self::from_file(serde_json::from_str(s)?)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, MubError> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_json_string(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("MUB file serializes")
    }
}
