//! Compare the Fujiwara–Algoet inequalities with Choi positivity on random,
//! boundary and deliberately violating spectra.
//!
//! ```bash
//! cargo run --release --example cptp_scan
//! ```

use std::sync::Arc;

use gpc_fidelity::channel::Spectrum;
use gpc_fidelity::mub::MubFamily;
use gpc_fidelity::oracle::{compare_cptp_tests, cptp_equivalence_scan, GridSpec};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in [2, 3, 5] {
        let r = cptp_equivalence_scan(d, &GridSpec::new(3000, 1000, 1000, 42))?;
        println!(
            "d={d}: {} spectra, {} CPTP, {} disagreements, boundary Choi eigenvalues within {:.1e}",
            r.points, r.fa_pass, r.disagreements, r.worst_boundary_choi_eigenvalue
        );
    }

    let fam = Arc::new(MubFamily::build(2)?);
    for l in [vec![1.0, 1.0, 1.0], vec![-1.0 / 3.0; 3], vec![0.5, 0.5, -0.1], vec![1.0, -1.0, 0.0]] {
        let c = compare_cptp_tests(&Spectrum::new(2, l.clone())?, &fam, 1e-10)?;
        println!(
            "{l:>6.3?}: FA {} Choi {} (slack {:+.3}, min eigenvalue {:+.3})",
            c.fa_pass, c.choi_pass, c.min_fa_slack, c.min_choi_eigenvalue
        );
    }
    Ok(())
}
