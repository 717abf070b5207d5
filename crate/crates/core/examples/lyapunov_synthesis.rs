// Searches for exponents lambda that make prod x_i^lambda_i shrink by a fixed
// factor near every vertex, then watches it decay along a trajectory.
//
//     $ cargo run --release --example lyapunov_synthesis

use std::error::Error;

use volterra_qso::classify::CanonicalParams;
use volterra_qso::lyapunov::{
    build_b, synthesize, verify_along_trajectory, vertex_log_gains, DEFAULT_MIN_DECADE_DROP,
};
use volterra_qso::qso::SkewMatrix;
use volterra_qso::simplex::SimplexPoint;

fn main() -> Result<(), Box<dyn Error>> {
    let all_half = CanonicalParams::uniform(0.5).to_matrix()?;
    println!("b = {:?}", build_b(&all_half)?.b);
    println!("gains at lambda = (1, 1, 0.5, 1.5): {:?}", vertex_log_gains(&all_half, &[1.0, 1.0, 0.5, 1.5])?);

    let cases = [
        ("all 0.5", all_half),
        (
            "dominant row",
            SkewMatrix::new(&[
                vec![0.0, 0.9, 0.9, 0.9],
                vec![-0.9, 0.0, 0.5, -0.5],
                vec![-0.9, -0.5, 0.0, 0.5],
                vec![-0.9, 0.5, -0.5, 0.0],
            ])?,
        ),
        ("zero", SkewMatrix::zero(4)?),
    ];
    let start = SimplexPoint::validate(&[0.4, 0.3, 0.2, 0.1])?;
    for (name, a) in &cases {
        println!("\n{name}");
        let Some(c) = synthesize(a)? else {
            println!("  no strict candidate");
            continue;
        };
        println!("  lambda = {:?}", c.lambda);
        println!("  margin = {:.4}, vertex gains = {:?}", c.margin, c.vertex_gains);
        let rep = verify_along_trajectory(&c.lambda, a, &start, 1_000_000, DEFAULT_MIN_DECADE_DROP)?;
        for (n, l) in &rep.log_f {
            println!("  n = {n:>8}: ln F = {l:.3}");
        }
        println!("  {:?}", rep.verdict);
    }
    Ok(())
}
