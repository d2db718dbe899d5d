//! Seeded coefficient ensembles.

use num_complex::Complex64;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

type C64 = Complex64;

/// Independent stream per check, so a check's cases do not depend on which
/// other checks were selected.
pub fn stream(seed: u64, salt: &str) -> ChaCha8Rng {
    let h = salt
        .bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x0100_0000_01b3));
    ChaCha8Rng::seed_from_u64(seed ^ h)
}

pub fn real_box<R: Rng>(rng: &mut R, n: usize, half: f64) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-half..=half)).collect()
}

pub fn complex_box<R: Rng>(rng: &mut R, n: usize, half: f64) -> Vec<C64> {
    (0..n)
        .map(|_| C64::new(rng.gen_range(-half..=half), rng.gen_range(-half..=half)))
        .collect()
}

/// Random real head `a_1..a_{m-1}` satisfying the sign hypothesis: a random
/// `j <= m/2`, then `a_k >= 0` for `k < j`, `a_k <= 0` for `k > j`, free for
/// `k = j` (non-positive when `m = 4, j = 2`). Magnitudes in `[0, size]`.
pub fn hypothesis_head<R: Rng>(rng: &mut R, m: usize, size: f64) -> Vec<f64> {
    let j = rng.gen_range(1..=(m / 2).max(1));
    (1..m)
        .map(|k| {
            let x = rng.gen_range(0.0..=size);
            if k < j {
                x
            } else if k > j || (m == 4 && j == 2) {
                -x
            } else if rng.gen_bool(0.5) {
                x
            } else {
                -x
            }
        })
        .collect()
}
