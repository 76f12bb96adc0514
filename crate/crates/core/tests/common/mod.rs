#![allow(dead_code)]

use adiaquant::instance::{families, ClauseKind, Literal, SatInstance};
use rand::seq::SliceRandom;
use rand::Rng;

fn two_bits(rng: &mut impl Rng, n: usize) -> (usize, usize) {
    let mut bits: Vec<usize> = (1..=n).collect();
    bits.shuffle(rng);
    (bits[0], bits[1])
}

/// A random instance over the agree/disagree/imply/or/one-bit vocabulary.
pub fn random_instance(rng: &mut impl Rng, max_bits: usize, max_clauses: usize) -> SatInstance {
    let n = rng.random_range(1..=max_bits);
    let m = rng.random_range(0..=max_clauses);
    let clauses = (0..m)
        .map(|_| {
            let kind = if n == 1 { rng.random_range(3..5) } else { rng.random_range(0..5) };
            match kind {
                0 => {
                    let (i, j) = two_bits(rng, n);
                    ClauseKind::Agree(i, j)
                }
                1 => {
                    let (i, j) = two_bits(rng, n);
                    ClauseKind::Disagree(i, j)
                }
                2 => {
                    let (i, j) = two_bits(rng, n);
                    ClauseKind::Imply(i, j)
                }
                3 => {
                    let width = rng.random_range(1..=3usize.min(n));
                    let mut bits: Vec<usize> = (1..=n).collect();
                    bits.shuffle(rng);
                    ClauseKind::Or(
                        bits[..width]
                            .iter()
                            .map(|&b| Literal(if rng.random() { b as i64 } else { -(b as i64) }))
                            .collect(),
                    )
                }
                _ => ClauseKind::OneBit(rng.random_range(1..=n), rng.random_range(0..=1)),
            }
        })
        .collect();
    SatInstance::new(n, clauses).expect("generated clauses are valid")
}

/// A ring of `n` bits with an even number of disagree clauses.
pub fn random_even_ring(rng: &mut impl Rng, n: usize) -> SatInstance {
    let mut disagree: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    if disagree.iter().filter(|&&d| d).count() % 2 == 1 {
        let k = rng.random_range(0..n);
        disagree[k] = !disagree[k];
    }
    families::ring(&disagree).expect("ring size is valid")
}
