// Builds the heredity tensor of a Volterra operator and checks that the
// general quadratic map agrees with x_k (1 + (Ax)_k).
//
//     $ cargo run --example tensor_tautology

use std::error::Error;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use volterra_qso::qso::{apply_volterra, SkewMatrix};
use volterra_qso::simplex::SimplexPoint;

fn main() -> Result<(), Box<dyn Error>> {
    let a = SkewMatrix::new(&[
        vec![0.0, 0.5, -0.3, 1.0],
        vec![-0.5, 0.0, 0.8, -0.2],
        vec![0.3, -0.8, 0.0, 0.6],
        vec![-1.0, 0.2, -0.6, 0.0],
    ])?;
    let p = a.to_tensor();
    println!("symmetric: {}, volterra: {}", p.is_symmetric(), p.is_volterra());
    println!("p_(12,1) = {}  p_(12,2) = {}", p.get(0, 1, 0), p.get(0, 1, 1));

    let back = p.to_skew()?;
    let err = (0..4)
        .flat_map(|i| (0..4).map(move |j| (i, j)))
        .map(|(i, j)| (back.get(i, j) - a.get(i, j)).abs())
        .fold(0.0, f64::max);
    println!("matrix recovered to {err:e}");

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let x = SimplexPoint::random_interior(4, 0.0, &mut rng);
        let general = p.apply(&x)?;
        let volterra = apply_volterra(&a, &x)?;
        worst = worst.max(general.max_abs_diff(&volterra));
    }
    println!("max |P(x) - V(x)| over 1000 points: {worst:e}");
    Ok(())
}
