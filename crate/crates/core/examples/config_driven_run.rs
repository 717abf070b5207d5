// Runs the same pipeline as the `qso` binary from a JSON config and writes
// its CSV and JSON outputs to a directory.
//
//     $ cargo run --release --example config_driven_run -- configs/all_half.json /tmp/all_half

use std::error::Error;
use std::path::PathBuf;

use volterra_qso::cli::{cmd_classify, cmd_fixed_points, cmd_simulate, ExperimentConfig};

fn main() -> Result<(), Box<dyn Error>> {
    let mut args = std::env::args().skip(1);
    let config = args.next().map(PathBuf::from).unwrap_or_else(|| "configs/all_half.json".into());
    let out = args.next().map(PathBuf::from).unwrap_or_else(|| std::env::temp_dir().join("qso_example"));
    std::fs::create_dir_all(&out)?;

    let cfg = ExperimentConfig::load(&config)?;
    let class = cmd_classify(&cfg, &out)?;
    println!("class {}", class.class);
    let fps = cmd_fixed_points(&cfg, &out)?;
    println!("{} fixed points", fps.records.len());
    let summary = cmd_simulate(&cfg, &out)?;
    for s in &summary.starts {
        println!(
            "start {}: route {:?}, escape-bound violations {:?} of {:?}",
            s.index, s.route_check, s.escape_bound_violations, s.escape_bound_checked
        );
    }
    println!("wrote {}", out.display());
    Ok(())
}
