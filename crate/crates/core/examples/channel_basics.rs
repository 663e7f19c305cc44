//! Probabilities, eigenvalues and the positivity conditions of a channel.
//!
//! ```bash
//! cargo run --example channel_basics
//! ```

use std::sync::Arc;

use gpc_fidelity::channel::{GeneralizedPauliChannel, Spectrum};
use gpc_fidelity::linalg::ComplexMatrix;
use gpc_fidelity::mub::MubFamily;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fam = Arc::new(MubFamily::build(3)?);

    let ch = GeneralizedPauliChannel::from_probabilities(3, vec![0.4, 0.3, 0.1, 0.1, 0.1], fam.clone())?;
    let sp = ch.spectrum();
    println!("p      = {:?}", ch.probabilities());
    println!("lambda = {:?}", sp.lambdas());

    let fa = sp.fujiwara_algoet();
    println!("slacks: lower {:.3}, upper {:.3}", fa.lower_slack, fa.upper_slack);

    let choi = ch.choi();
    let eig = choi.hermitian_eigensystem()?;
    println!("Choi eigenvalues: {:.4?}", eig.values);

    // action on a basis projector of the second axis
    let p = fam.projector(2, 0)?;
    let out = ch.apply(&p)?;
    println!("Tr Λ[P] = {:.3}, <P|Λ[P]|P> = {:.3}", out.trace().re, (&p * &out).trace().re);

    let sq = ch.compose(&ch)?;
    println!("Λ∘Λ eigenvalues: {:?}", sq.spectrum().lambdas());

    // eigenvalues outside the positivity region are rejected with the broken bound
    let bad = Spectrum::new(3, vec![0.5, 0.2, -0.1, 0.3])?;
    if let Some((bound, by)) = bad.fujiwara_algoet().violated_bound() {
        println!("{:?}: {bound} violated by {by:.2}", bad.lambdas());
    }
    if let Err(e) = GeneralizedPauliChannel::from_eigenvalues(3, bad.lambdas().to_vec(), fam) {
        println!("rejected: {e}");
    }

    let rho = ComplexMatrix::identity(3).scale_real(1.0 / 3.0);
    assert!(ch.apply(&rho)?.max_abs_diff(&rho) < 1e-12);
    Ok(())
}
