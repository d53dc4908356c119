//! Periodogram ordinates and their exponential limit.
//!
//! cargo run --release --example periodogram

use asclt::spectra::{periodogram, periodogram_ecdf_distance, periodogram_ordinates};
use asclt::{SourceFamily, SourceSpec};

fn main() -> asclt::Result<()> {
    let spec = SourceSpec::new(SourceFamily::StandardizedUniform, 3, 0)?;
    let x = spec.fill(1024);
    let ords = periodogram_ordinates(&x)?;
    println!("I(2 pi k / n), k = 1..5: fast {:?}", &ords[..5]);
    let direct: Vec<f64> = (1..=5).map(|k| periodogram(&x, k)).collect::<asclt::Result<_>>()?;
    println!("                        direct {direct:?}");

    for family in [SourceFamily::StandardNormal, SourceFamily::Rademacher, SourceFamily::StandardizedExponential] {
        let spec = SourceSpec::new(family.clone(), 7, 0)?;
        let d: Vec<String> = [1usize << 8, 1 << 10, 1 << 12, 1 << 14]
            .iter()
            .map(|&n| periodogram_ecdf_distance(n, &spec).map(|v| format!("{v:.4}")))
            .collect::<asclt::Result<_>>()?;
        println!("{family:<12} sup |F_n - (1 - e^-x)| at n = 2^8..2^14: {}", d.join(" "));
    }
    Ok(())
}
