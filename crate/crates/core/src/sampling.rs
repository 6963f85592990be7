//! Seeded random test objects.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::martingale::{cond_exp, Martingale};
use crate::space::{ProductFilteredSpace, RandomVariable, Weight};

/// Deterministic generator for one trial; distinct `(seed, trial)` pairs give
/// independent streams.
pub fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng
}

/// Independent uniform values in `[lo, hi)` at every point.
pub fn random_variable<R: Rng>(space: &Arc<ProductFilteredSpace>, rng: &mut R, lo: f64, hi: f64) -> RandomVariable {
    let values = (0..space.len()).map(|_| rng.gen_range(lo..hi)).collect();
    RandomVariable::from_raw(space.clone(), values)
}

/// Positive weight with values in `[0.1, 10)` on a log scale.
pub fn random_weight<R: Rng>(space: &Arc<ProductFilteredSpace>, rng: &mut R) -> Weight {
    let values = (0..space.len()).map(|_| 10f64.powf(rng.gen_range(-1.0..1.0))).collect();
    Weight::new(RandomVariable::from_raw(space.clone(), values)).expect("positive by construction")
}

/// Martingale with `d_0 f = 0`. Level `n` draws one value per `F_n`-atom,
/// scales it by a level amplitude `e^U`, `U ~ U(-1, 1)`, and subtracts its
/// `E_{n-1}` projection.
pub fn random_martingale<R: Rng>(space: &Arc<ProductFilteredSpace>, rng: &mut R) -> Martingale {
    let mut diffs = vec![RandomVariable::zeros(space)];
    for n in 1..=space.depth() {
        let amp = rng.gen_range(-1.0f64..1.0).exp();
        let table = space.table(n);
        let draws: Vec<f64> = (0..table.len()).map(|_| amp * rng.gen_range(-1.0..1.0)).collect();
        let raw = RandomVariable::from_raw(space.clone(), (0..space.len()).map(|i| draws[table.atom_of(i)]).collect());
        let mean = cond_exp(&raw, n - 1).expect("level in range");
        diffs.push(raw.sub(&mean));
    }
    Martingale::from_diffs_unchecked(space.clone(), diffs)
}

/// Martingale `d_n f = c_n r_n` where `r_n = ±1` according to the parity of
/// the level-`n` cell of the first coordinate, so `|d_n f|` and hence `S f` and
/// `s f` are deterministic. Needs every cell of the first coordinate to split
/// into pairs of equal weight (true for dyadic coordinates).
pub fn rademacher_martingale(space: &Arc<ProductFilteredSpace>, amplitudes: &[f64]) -> Result<Martingale> {
    let mut diffs = vec![RandomVariable::zeros(space)];
    let first = space.coord(0);
    for n in 1..=space.depth() {
        let c = amplitudes.get(n - 1).copied().unwrap_or(0.0);
        let sign = |i: usize| if first.cell_of(n, space.coord_index(i, 0)).is_multiple_of(2) { 1.0 } else { -1.0 };
        diffs.push(RandomVariable::new(space.clone(), (0..space.len()).map(|i| c * sign(i)).collect())?);
    }
    Martingale::from_diffs(diffs)
}

/// Predictable multipliers `b_0, ..., b_{N-1}` with values in `[-1, 1]`;
/// with `signs` every value is `±1`.
pub fn random_multipliers<R: Rng>(space: &Arc<ProductFilteredSpace>, rng: &mut R, signs: bool) -> Vec<RandomVariable> {
    (0..space.depth())
        .map(|k| {
            let table = space.table(k);
            let draws: Vec<f64> = (0..table.len())
                .map(|_| {
                    if signs {
                        if rng.gen_bool(0.5) {
                            1.0
                        } else {
                            -1.0
                        }
                    } else {
                        rng.gen_range(-1.0..=1.0)
                    }
                })
                .collect();
            RandomVariable::from_raw(space.clone(), (0..space.len()).map(|i| draws[table.atom_of(i)]).collect())
        })
        .collect()
}
