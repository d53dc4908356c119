//! Driving the command-line front end from code with a config file.
//!
//! cargo run --release --example config_run

fn main() {
    let dir = std::env::temp_dir().join("asclt-config-run");
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("ldp.cfg");
    std::fs::write(&cfg, "# large-deviation run\nfamily = rademacher\nmaster_seed = 7\nn = 4096\nr = 32\na = 0.5\nreplicas = 20000\n").unwrap();
    let code = asclt::cli::run(["asclt", "ldp", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    println!("exit code {code}");

    // r above floor((n-1)/2) is a config error (exit code 2) naming the line
    std::fs::write(&cfg, "family = rademacher\nn = 64\nr = 40\n").unwrap();
    let code = asclt::cli::run(["asclt", "asclt", "--config", cfg.to_str().unwrap(), "--out", dir.to_str().unwrap()]);
    println!("exit code {code}");
}
