//! Reproducible input streams: families, closed-form moments, prefix stability.
//!
//! cargo run --release --example sources

use asclt::{SourceFamily, SourceSpec};

fn main() -> asclt::Result<()> {
    let families = [
        SourceFamily::Rademacher,
        SourceFamily::StandardizedUniform,
        SourceFamily::StandardizedTwoPoint(0.2),
        SourceFamily::StandardNormal,
        SourceFamily::StandardizedExponential,
        SourceFamily::from_parts("heterogeneous", Some("rademacher,normal,two_point:0.3"))?,
    ];
    println!("{:<40} {:>10} {:>10} {:>12} {:>10}", "family", "mean", "var", "E|X|^3", "tau");
    for family in families {
        let spec = SourceSpec::new(family.clone(), 42, 0)?;
        let x = spec.fill(200_000);
        let mean = x.iter().sum::<f64>() / x.len() as f64;
        let var = x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (x.len() - 1) as f64;
        let rep = spec.moment_report();
        let tau = rep.exp_moment_tau.map_or("-".to_string(), |t| format!("{t:.4}"));
        println!("{:<40} {mean:>10.4} {var:>10.4} {:>12.4} {tau:>10}", family.to_string(), rep.third_abs_moment);
    }

    // the first n values do not depend on how far the stream is read
    let spec = SourceSpec::new(SourceFamily::Rademacher, 7, 3)?;
    let short = spec.fill(10);
    let long = spec.fill(1_000_000);
    assert_eq!(short[..], long[..10]);
    assert_eq!(spec.sample(999_999), long[999_998]);
    println!("\nprefix of stream (seed 7, stream 3): {short:?}");
    println!("replica 5 of that stream starts {:?}", &spec.replica(5).fill(5));
    print!("\nconfig block:\n{}", spec.to_config_block());
    Ok(())
}
