// Sorts 4x4 skew-symmetric matrices into the three classes and recovers the
// canonical relabeling of class-3 input.
//
//     $ cargo run --example classify_matrix

use std::error::Error;

use volterra_qso::classify::{classify, CanonicalParams};
use volterra_qso::qso::SkewMatrix;

fn main() -> Result<(), Box<dyn Error>> {
    let canonical = CanonicalParams::from_array([0.5, 0.4, 0.3, 0.6, 0.2, 0.7]).to_matrix()?;
    // vertices relabeled 1->3, 2->1, 3->4, 4->2
    let perm = [2, 0, 3, 1];
    let mut rows = vec![vec![0.0; 4]; 4];
    for i in 0..4 {
        for j in 0..4 {
            rows[perm[i]][perm[j]] = canonical.get(i, j);
        }
    }

    let cases = [
        ("zero", SkewMatrix::zero(4)?),
        (
            "dominant row",
            SkewMatrix::new(&[
                vec![0.0, 0.9, 0.9, 0.9],
                vec![-0.9, 0.0, 0.5, -0.5],
                vec![-0.9, -0.5, 0.0, 0.5],
                vec![-0.9, 0.5, -0.5, 0.0],
            ])?,
        ),
        ("negated dominant row", SkewMatrix::new(&[
            vec![0.0, 0.9, 0.9, 0.9],
            vec![-0.9, 0.0, 0.5, -0.5],
            vec![-0.9, -0.5, 0.0, 0.5],
            vec![-0.9, 0.5, -0.5, 0.0],
        ])?
        .negated()),
        ("canonical", canonical),
        ("relabeled", SkewMatrix::new(&rows)?),
    ];

    for (name, a) in &cases {
        let r = classify(a)?;
        print!("{name:>22}: class {}", r.class.number());
        if let Some(w) = r.witness_row {
            print!(", witness row {}", w + 1);
        }
        if let (Some(p), Some(i)) = (r.permutation, r.invariant_i) {
            let labels: Vec<usize> = p.iter().map(|v| v + 1).collect();
            print!(", canonical order {labels:?}, I = {i:.4}");
        }
        println!();
    }
    Ok(())
}
