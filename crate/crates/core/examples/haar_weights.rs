//! Haar-distributed orthogonal weights and the normal limit of `S = U X`.
//!
//! cargo run --release --example haar_weights

use asclt::empirical::normal_cdf;
use asclt::experiments::{asclt_trajectory, haar_stream, Schedule};
use asclt::weights::{check_conditions, sample_haar_orthogonal};
use asclt::{partial_sums, EmpiricalMeasure, SourceFamily, SourceSpec, SumPath, WeightKind};

fn main() -> asclt::Result<()> {
    let n = 512;
    let gauss = SourceSpec::new(SourceFamily::StandardNormal, 1, 0)?;
    let w = sample_haar_orthogonal(n, &gauss)?;
    let rep = check_conditions(&w, 1.0)?;
    println!("n = {n}: orthonormality residual {:.2e}, max |u| {:.4}", rep.eps_orth_u, rep.eps_entry_u);
    println!("  compare sqrt(log n / n) = {:.4}", ((n as f64).ln() / n as f64).sqrt());

    let x = SourceSpec::new(SourceFamily::StandardizedExponential, 2, 0)?.fill(n);
    let sums = partial_sums(&w, &x, SumPath::default(), None)?;
    let ks = EmpiricalMeasure::new(sums.s)?.ks_to(normal_cdf);
    println!("exponential inputs: KS(S, normal) = {ks:.4}");

    let rad = SourceSpec::new(SourceFamily::Rademacher, 7, 0)?;
    let sched = Schedule::new(vec![(128, 128), (256, 256), (512, 512), (1024, 1024)])?;
    let res = asclt_trajectory(&rad, &sched, WeightKind::HaarOrthogonal, SumPath::default())?;
    for p in &res.points {
        println!("rademacher n = {:>5}: KS = {:.4}", p.n, p.stat("ks").unwrap());
    }
    println!("matrix stream for n = 1024: {}", haar_stream(&rad, 1024).stream_id());
    Ok(())
}
