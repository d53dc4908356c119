//! Trigonometric weights: exact identities and almost-orthogonality residuals.
//!
//! cargo run --release --example trig_weights

use asclt::weights::{check_conditions, make_trig_pair, max_trig_rows, verify_trig_identities};

fn main() -> asclt::Result<()> {
    let w = make_trig_pair(8, 3)?;
    println!("U (3 x 8):");
    for k in 0..w.r() {
        let row: Vec<String> = w.u_row(k).iter().map(|v| format!("{v:+.4}")).collect();
        println!("  {}", row.join(" "));
    }

    println!("\n{:>7} {:>6} {:>12} {:>12} {:>12} {:>12}", "n", "r", "eps_entry_u", "eps_orth_u", "eps_cross", "identities");
    for n in [8usize, 127, 1024, 4096, 65536] {
        let r = max_trig_rows(n);
        let rep = check_conditions(&make_trig_pair(n, r)?, 1.0)?;
        let ids = verify_trig_identities(n, n as f64 * 2f64.powi(-46))?;
        println!(
            "{n:>7} {r:>6} {:>12.3e} {:>12.3e} {:>12.3e} {:>12.3e}",
            rep.eps_entry_u,
            rep.eps_orth_u,
            rep.eps_cross.unwrap(),
            ids.worst
        );
    }

    // r above floor((n-1)/2) is refused
    match make_trig_pair(16, 8) {
        Err(e) => println!("\nmake_trig_pair(16, 8): {e}"),
        Ok(_) => unreachable!(),
    }
    Ok(())
}
