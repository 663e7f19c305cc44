//! Search for entangled inputs that beat product states on Λ⊗Λ.
//!
//! ```bash
//! cargo run --release --example tensor_probe
//! ```

use std::sync::Arc;

use gpc_fidelity::channel::GeneralizedPauliChannel;
use gpc_fidelity::metrics::{self, RegularizationMode};
use gpc_fidelity::mub::MubFamily;
use gpc_fidelity::oracle::{tensor_multiplicativity_probe, OracleConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fam = Arc::new(MubFamily::build(2)?);
    let cfg = OracleConfig::tensor().with_restarts(512).with_seed(9);
    let third = 1.0 / 3.0;

    for l in [vec![0.6, 0.6, 0.6], vec![0.5, 0.1, -0.3], vec![-third, -third, -third]] {
        let ch = GeneralizedPauliChannel::from_eigenvalues(2, l.clone(), fam.clone())?;
        let p = tensor_multiplicativity_probe(&ch, 2, &cfg)?;
        println!(
            "lambda {l:.3?}: flags {}, f_max^2 {:.6}, oracle {:.6}, excess {:+.2e} ({:?})",
            p.flags.bits(),
            p.baseline,
            p.estimate,
            p.excess,
            p.regime
        );
    }

    // the isotropic negative channel: a Bell pair keeps fidelity 1/3
    let ch = GeneralizedPauliChannel::from_eigenvalues(2, vec![-third; 3], fam)?;
    let r = metrics::regularized_fmax(&ch, 3, &RegularizationMode::Oracle(cfg))?;
    println!("{}", serde_json::to_string_pretty(&r)?);
    Ok(())
}
