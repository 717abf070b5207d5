// Lists every fixed point of a 4x4 Volterra operator with its multipliers
// and type, then the monomial Lyapunov function of each repelling one.
//
//     $ cargo run --example fixed_point_inventory

use std::error::Error;

use volterra_qso::classify::CanonicalParams;
use volterra_qso::fixed_points::{all_fixed_points, repelling_point_lyapunov, FixedPointType};

fn main() -> Result<(), Box<dyn Error>> {
    let a = CanonicalParams::uniform(0.5).to_matrix()?;
    let inv = all_fixed_points(&a)?;

    for r in &inv.records {
        let point: Vec<String> = r.point.coords().iter().map(|v| format!("{v:.4}")).collect();
        let moduli: Vec<String> = r.moduli().iter().map(|v| format!("{v:.4}")).collect();
        println!(
            "{:<6} [{}]  |mu| = [{}]  {:?}{}",
            r.support.to_string(),
            point.join(", "),
            moduli.join(", "),
            r.kind,
            if r.continuum { " (continuum)" } else { "" }
        );
    }

    println!();
    for r in inv.records.iter().filter(|r| r.kind == FixedPointType::Repelling) {
        let f = repelling_point_lyapunov(r)?;
        println!("{}: F(x) = prod x_i^{:?}", r.support, f.exponents);
    }
    Ok(())
}
