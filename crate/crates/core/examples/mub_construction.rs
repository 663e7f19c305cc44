//! Build the standard MUB families, check them, and round-trip one through
//! its JSON file format.
//!
//! ```bash
//! cargo run --example mub_construction
//! ```

use gpc_fidelity::linalg::C64;
use gpc_fidelity::mub::{MubFamily, BUILD_TOL};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for d in [2, 3, 5, 7] {
        let fam = MubFamily::build(d)?;
        let v = fam.validate(BUILD_TOL);
        println!(
            "d={d}: {} bases, orthonormality {:.1e}, unbiasedness {:.1e}",
            fam.num_axes(),
            v.orthonormality_residual,
            v.unbiasedness_residual
        );
    }

    // U_α^k = Σ_l ω^{kl} P_l^{(α)} are trace-orthogonal
    let fam = MubFamily::build(3)?;
    let us = fam.unitary_basis();
    let mut worst = 0.0f64;
    for (i, (_, u)) in us.iter().enumerate() {
        for (j, (_, w)) in us.iter().enumerate() {
            let expect = if i == j { 3.0 } else { 0.0 };
            worst = worst.max(((&u.adjoint() * w).trace() - C64::new(expect, 0.0)).norm());
        }
    }
    println!("d=3: {} unitaries, trace orthogonality residual {worst:.1e}", us.len());

    let text = fam.to_json_string();
    let back = MubFamily::from_json_str(&text)?;
    assert_eq!(back, fam);
    println!("JSON round trip: {} bytes", text.len());

    match MubFamily::build(4) {
        Err(e) => println!("d=4: {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
