// Follows a class-3 trajectory around its heteroclinic cycle: the order of
// vertex visits, sojourn lengths near vertex 1, and the lower bound on each
// sojourn predicted from phi at entry.
//
//     $ cargo run --release --example sojourn_escape_bound

use std::error::Error;

use volterra_qso::classify::CanonicalParams;
use volterra_qso::ergodic::{
    c_abs, decade_windows, escape_bound_log, outside_fraction_trend, route_check, run_trajectory, sojourn_growth,
    TrajectoryConfig,
};
use volterra_qso::simplex::SimplexPoint;

fn main() -> Result<(), Box<dyn Error>> {
    let params = CanonicalParams::uniform(0.5);
    let eps = 0.05;
    let mut cfg = TrajectoryConfig::new(params.to_matrix()?, SimplexPoint::validate(&[0.4, 0.3, 0.2, 0.1])?, 1_000_000);
    cfg.epsilon = eps;
    let r = run_trajectory(&cfg)?;

    let visits: Vec<usize> = r.sojourns.visits().iter().map(|v| v + 1).collect();
    println!("first visits: {:?}", &visits[..visits.len().min(16)]);
    println!("route admissible: {}", route_check(&r.sojourns.visits()));
    println!("vertex-1 sojourns grow: {}", sojourn_growth(&r.sojourns, 0, 1)?);
    println!("C_abs = {}", c_abs(&params)?);

    println!("\n{:>8} {:>8} {:>12} {:>10}", "entry", "length", "ln phi", "bound");
    for e in r.sojourns.events.iter().filter(|e| e.vertex == 0 && e.is_complete()) {
        if let Some(lphi) = e.log_phi_at_entry {
            let bound = escape_bound_log(&params, eps, lphi)?;
            println!("{:>8} {:>8} {:>12.3} {:>10.1}", e.entry, e.length(r.steps), lphi, bound);
        }
    }

    println!("\nfraction of time outside all vertex boxes");
    for ((a, b), f) in outside_fraction_trend(&r.sojourns, &decade_windows(r.steps)) {
        println!("  [{a}, {b}): {f:.2e}");
    }
    Ok(())
}
