//! Symmetric and reverse circulant spectra by one DFT.
//!
//! cargo run --release --example circulant_spectra

use asclt::spectra::{circulant_eigen_dft, reverse_circulant_spectrum, symmetric_circulant_spectrum};
use asclt::{SourceFamily, SourceSpec};

fn main() -> asclt::Result<()> {
    println!("eigenvalues of circ(1, 2, 3, 2): {:?}", circulant_eigen_dft(&[1.0, 2.0, 3.0, 2.0]).iter().map(|z| z.re).collect::<Vec<_>>());

    let rad = SourceSpec::new(SourceFamily::Rademacher, 7, 0)?;
    for n in [257usize, 1025, 4097, 16385] {
        let sym = symmetric_circulant_spectrum(n, &rad, (0.0, 1.0))?;
        let rev = reverse_circulant_spectrum(n, &rad)?;
        println!(
            "n = {n:>6}: symmetric KS to normal {:.4} (exceptional {:?}), reverse KS to |x|e^(-x^2) law {:.4}",
            sym.ks_to_limit()?,
            sym.exceptional.iter().map(|v| format!("{v:.3}")).collect::<Vec<_>>(),
            rev.ks_to_limit()?
        );
    }

    // non-centred inputs: only the exceptional eigenvalue moves
    let exp = SourceSpec::new(SourceFamily::StandardizedExponential, 1, 0)?;
    let a = symmetric_circulant_spectrum(1001, &exp, (0.0, 1.0))?;
    let b = symmetric_circulant_spectrum(1001, &exp, (5.0, 1.0))?;
    println!("centering by 5: KS between ESDs {:.2e}, exceptional {:.3} -> {:.3}", a.esd()?.ks_between(&b.esd()?), a.exceptional[0], b.exceptional[0]);
    Ok(())
}
