//! Drives the command-line front end in process: `theory`, `check --json`
//! and `run`, writing results to a temporary directory.

use netmtl::cli::run_cli;

fn main() {
    let dir = std::env::temp_dir().join("netmtl_cli_example");
    let config = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/configs/spectral_linear.json");
    let out = dir.to_str().expect("utf-8 temp dir");
    for args in [
        vec!["netmtl", "theory", "--config", config],
        vec!["netmtl", "check", "--config", config, "--json"],
        vec![
            "netmtl", "run", "--config", config, "--out", out, "--runs", "4", "--eta", "2",
        ],
    ] {
        let (mut stdout, mut stderr) = (Vec::new(), Vec::new());
        let code = run_cli(&args, &mut stdout, &mut stderr);
        println!("$ {} -> exit {code}", args[1..].join(" "));
        print!(
            "{}{}",
            String::from_utf8_lossy(&stdout),
            String::from_utf8_lossy(&stderr)
        );
    }
}
