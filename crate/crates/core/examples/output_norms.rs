//! Maximal output 2-norm and ∞-norm, with the brute-force values next to the
//! closed forms. The last channel has mixed-sign eigenvalues in d = 3, where
//! non-MUB inputs beat the MUB value of the ∞-norm.
//!
//! ```bash
//! cargo run --release --example output_norms
//! ```

use std::sync::Arc;

use gpc_fidelity::channel::GeneralizedPauliChannel;
use gpc_fidelity::metrics;
use gpc_fidelity::mub::MubFamily;
use gpc_fidelity::oracle::{self, OracleConfig};

fn show(ch: &GeneralizedPauliChannel, cfg: &OracleConfig) -> Result<(), Box<dyn std::error::Error>> {
    let starts = oracle::mub_starts(ch.family(), 1);
    let g = ch.as_generic();
    let n2 = oracle::oracle_nu2(&g, cfg, &starts)?;
    let ni = oracle::oracle_nu_inf(&g, cfg, &starts)?;
    println!("lambda = {:.4?}", ch.spectrum().lambdas());
    println!("  nu2:    closed {:.6}  oracle {:.6}", metrics::nu2(ch), n2.value);
    println!(
        "  nu_inf: closed {:.6}  oracle {:.6}  (certified: {})",
        metrics::nu_inf(ch),
        ni.value,
        metrics::nu_inf_certified(ch)
    );
    if let Some(pair) = oracle::classify_nu_inf_pair(ch.family(), &ni) {
        println!(
            "  optimal P near axis {} (overlap {:.4}), |<P|Q>|^2 = {:.4}",
            pair.input.alpha, pair.input.overlap, pair.input_output_overlap
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = OracleConfig::single_copy().with_seed(5);
    let f2 = Arc::new(MubFamily::build(2)?);
    let f3 = Arc::new(MubFamily::build(3)?);

    show(&GeneralizedPauliChannel::from_eigenvalues(2, vec![0.6, 0.6, 0.6], f2.clone())?, &cfg)?;
    show(&GeneralizedPauliChannel::from_eigenvalues(2, vec![-0.5, 0.1, 0.2], f2)?, &cfg)?;
    show(&GeneralizedPauliChannel::from_eigenvalues(3, vec![0.4, 0.2, 0.1, 0.2], f3.clone())?, &cfg)?;
    show(
        &GeneralizedPauliChannel::from_probabilities(
            3,
            vec![0.020048310806068476, 0.21042067481518012, 0.24561099374848355, 0.03029339666547832, 0.49362662396478957],
            f3,
        )?,
        &cfg,
    )?;
    Ok(())
}
