// Compares Cesaro averages of two three-species operators: the cyclic map
// whose averages keep oscillating, and a mixed-sign map whose averages settle.
//
//     $ cargo run --release --example cesaro_ergodicity

use std::error::Error;

use volterra_qso::ergodic::{ergodic_verdict, run_trajectory, TrajectoryConfig, DELTA_CONV, DELTA_OSC};
use volterra_qso::qso::SkewMatrix;
use volterra_qso::simplex::SimplexPoint;

fn main() -> Result<(), Box<dyn Error>> {
    let start = SimplexPoint::validate(&[0.5, 0.3, 0.2])?;
    for (name, (a, b, c)) in [("cyclic (1, 1, 1)", (1.0, 1.0, 1.0)), ("mixed (0.5, -0.5, 0.5)", (0.5, -0.5, 0.5))] {
        let cfg = TrajectoryConfig::new(SkewMatrix::volterra3(a, b, c)?, start.clone(), 1 << 22);
        let r = run_trajectory(&cfg)?;
        let v = ergodic_verdict(&r.cesaro, DELTA_CONV, DELTA_OSC)?;

        println!("{name}");
        println!("  {:>9}  {:>10} {:>10} {:>10}", "n", "avg x1", "avg x2", "avg x3");
        let rows = r.cesaro[0].checkpoints.len();
        for k in (0..rows).step_by(3) {
            let n = r.cesaro[0].checkpoints[k].0;
            let avgs: Vec<String> = r.cesaro.iter().map(|s| format!("{:10.6}", s.checkpoints[k].1)).collect();
            println!("  {n:>9}  {}", avgs.join(" "));
        }
        let osc: Vec<String> = v.oscillation.iter().map(|o| format!("{o:.2e}")).collect();
        println!("  oscillation [{}] -> {:?}\n", osc.join(", "), v.verdict);
    }
    Ok(())
}
