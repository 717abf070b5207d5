// Runs an ensemble of seeded random starts in parallel and reports the
// spread of their Cesaro averages. Results do not depend on the thread count.
// Here I < 0, so the face point on Γ134 attracts and x2 dies out.
//
//     $ cargo run --release --example random_ensemble

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volterra_qso::classify::CanonicalParams;
use volterra_qso::ergodic::{run_ensemble, TrajectoryConfig};
use volterra_qso::simplex::SimplexPoint;

fn main() -> Result<(), Box<dyn Error>> {
    let params = CanonicalParams::from_array([0.6, 0.3, 0.2, 0.5, 0.4, 0.7]);
    println!("I = {:.3}", params.invariant_i());
    let a = params.to_matrix()?;
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let configs: Vec<TrajectoryConfig> = (0..16)
        .map(|_| TrajectoryConfig::new(a.clone(), SimplexPoint::random_interior(4, 0.01, &mut rng), 200_000))
        .collect();

    let one = run_ensemble(&configs, 1)?;
    let many = run_ensemble(&configs, 8)?;
    let mut identical = true;
    for (k, (r1, r8)) in one.into_iter().zip(many).enumerate() {
        let (r1, r8) = (r1?, r8?);
        identical &= r1.final_state == r8.final_state;
        let avgs: Vec<String> = r1.cesaro.iter().map(|s| format!("{:.4}", s.checkpoints.last().unwrap().1)).collect();
        println!("start {:>2}: averages [{}], {} sojourns", k + 1, avgs.join(", "), r1.sojourns.events.len());
    }
    println!("1 thread vs 8 threads identical: {identical}");
    Ok(())
}
