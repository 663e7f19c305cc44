//! Closed-form extremal fidelities checked against brute-force search.
//!
//! ```bash
//! cargo run --release --example fidelity_extrema
//! ```

use std::sync::Arc;

use gpc_fidelity::channel::GeneralizedPauliChannel;
use gpc_fidelity::metrics::{self, PureState};
use gpc_fidelity::mub::MubFamily;
use gpc_fidelity::oracle::{self, OracleConfig, Sense};
use gpc_fidelity::sampling;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fam = Arc::new(MubFamily::build(3)?);
    let ch = GeneralizedPauliChannel::from_eigenvalues(3, vec![0.4, 0.2, 0.1, 0.2], fam.clone())?;
    let ext = metrics::f_extremes(&ch);
    println!("f_max = {:.6} on axis {}", ext.f_max, ext.argmax_alpha);
    println!("f_min = {:.6} on axis {}", ext.f_min, ext.argmin_alpha);

    let psi = PureState::mub(&fam, ext.argmax_alpha, 0)?;
    println!("fidelity of ψ_0 on that axis: {:.6}", metrics::direct_fidelity(&ch, &psi)?);

    let cfg = OracleConfig::single_copy().with_seed(1);
    let g = ch.as_generic();
    let hi = oracle::oracle_self_fidelity(&g, Sense::Max, &cfg, &[])?;
    let lo = oracle::oracle_self_fidelity(&g, Sense::Min, &cfg, &[])?;
    println!(
        "oracle from {} Haar starts: max {:.9}, min {:.9}",
        hi.trace.restarts, hi.value, lo.value
    );
    println!("maximizer's nearest MUB vector: {:?}", oracle::nearest_mub(&fam, &hi.state));

    // random pure inputs stay inside the closed-form range
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (mut lo_seen, mut hi_seen) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..10_000 {
        let f = metrics::pointwise_fidelity(&ch, &oracle::random_pure_state(3, &mut rng))?;
        lo_seen = lo_seen.min(f);
        hi_seen = hi_seen.max(f);
    }
    println!("10^4 random inputs span [{lo_seen:.4}, {hi_seen:.4}]");

    let r = sampling::random_channel(fam, &mut rng);
    println!("random channel: {:?}", metrics::f_extremes(&r));
    Ok(())
}
