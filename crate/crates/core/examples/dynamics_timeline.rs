//! A constant-rate semigroup: eigenvalue decay, positivity along the path,
//! the generator cross-check and a CSV timeline.
//!
//! ```bash
//! cargo run --example dynamics_timeline
//! ```

use std::sync::Arc;

use gpc_fidelity::dynamics::{self, EvolutionSpec};
use gpc_fidelity::mub::MubFamily;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let fam = Arc::new(MubFamily::build(3)?);
    let spec = EvolutionSpec::exponential(fam.clone(), vec![0.8, 0.1, 0.0, 0.3])?;

    let t = 2f64.ln();
    println!("lambda(ln 2) = {:.4?}", spec.trajectory_at(t)?.lambdas());

    let grid = dynamics::uniform_grid(5.0, 11)?;
    let v = dynamics::validate_trajectory(&spec, &grid)?;
    println!("valid on [0, 5]: {}", v.valid);
    println!("exp(tL) vs trajectory: {:.1e}", dynamics::expm_cross_check(&spec, &[0.5, 1.0, 4.0])?);

    let entries = dynamics::timeline_report(&spec, &grid)?;
    println!("{:?}", dynamics::summarize(&entries));
    dynamics::write_timeline_csv(&entries, std::io::stdout().lock())?;

    // a hand-made trajectory that leaves the channel set
    let bad = EvolutionSpec::sampled(
        fam,
        vec![(0.0, vec![1.0; 4]), (1.0, vec![0.5; 4]), (2.0, vec![-0.4, 0.5, 0.5, 0.5])],
    )?;
    let v = dynamics::validate_trajectory(&bad, &dynamics::uniform_grid(2.0, 21)?)?;
    println!("sampled trajectory: first violation at t = {:?}", v.first_violation);
    Ok(())
}
