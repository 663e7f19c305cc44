//! Full closed-form report for a channel spec, as the CLI emits it.
//!
//! ```bash
//! cargo run --example reports
//! ```

use gpc_fidelity::channel::ChannelSpec;
use gpc_fidelity::metrics::FidelityReport;
use std::path::Path;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let specs = [
        r#"{"d": 2, "probabilities": [0.7, 0.1, 0.1, 0.1]}"#,
        r#"{"d": 3, "eigenvalues": [0.4, 0.2, 0.1, 0.2]}"#,
        r#"{"d": 5, "eigenvalues": [-0.2, 0.1, 0.0, 0.05, -0.1, 0.1]}"#,
    ];
    for text in specs {
        let spec = ChannelSpec::from_json_str(text)?;
        let ch = spec.build(spec.family(Path::new("."))?)?;
        let r = FidelityReport::closed_form(&ch);
        println!("{text}");
        println!("  chain f_min <= f_max <= nu_inf <= 1: {}", r.chain_holds(1e-12));
        println!("{}", serde_json::to_string_pretty(&r)?);
    }
    Ok(())
}
