//! Conditional expectations, martingales, stopping times and stopped
//! martingales.
//!
//! Coordinates are indexed from zero in this API: coordinate `k` is the
//! `(k+1)`-th factor of the product.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::space::{AtomTable, ProductFilteredSpace, RandomVariable};

/// Tolerance for measurability and zero-mean checks, relative to
/// `max(1, sup |value|)`.
pub const MARTINGALE_TOL: f64 = 1e-9;

fn scaled_tol(v: &RandomVariable) -> f64 {
    MARTINGALE_TOL * v.sup_norm().max(1.0)
}

fn average_over(table: &AtomTable, g: &RandomVariable) -> RandomVariable {
    let probs = g.space().point_probs();
    let mut values = vec![0.0; g.len()];
    for atom in table.atoms() {
        let mass: f64 = atom.points.iter().map(|&p| g.get(p) * probs[p]).sum();
        let mean = mass / atom.prob;
        for &p in &atom.points {
            values[p] = mean;
        }
    }
    RandomVariable::from_raw(g.space().clone(), values)
}

/// `E_n g`.
pub fn cond_exp(g: &RandomVariable, n: usize) -> Result<RandomVariable> {
    Ok(average_over(g.space().level(n)?, g))
}

/// Conditional expectation onto the partial σ-algebra that sees coordinate
/// `k` at level `m` and every other coordinate fully.
pub fn partial_cond_exp(g: &RandomVariable, k: usize, m: usize) -> Result<RandomVariable> {
    Ok(average_over(g.space().partial_level(k, m)?, g))
}

/// A martingale stored through its differences `d_0 f, ..., d_N f`.
#[derive(Debug, Clone)]
pub struct Martingale {
    space: Arc<ProductFilteredSpace>,
    diffs: Vec<RandomVariable>,
}

impl Martingale {
    /// Validates adaptedness of each `d_n f` and `E_{n-1} d_n f = 0`.
    pub fn from_diffs(diffs: Vec<RandomVariable>) -> Result<Self> {
        let space = diffs.first().ok_or_else(|| Error::NotMartingale("no differences".into()))?.space().clone();
        if diffs.len() != space.depth() + 1 {
            return Err(Error::DimensionMismatch { expected: space.depth() + 1, found: diffs.len() });
        }
        for (n, d) in diffs.iter().enumerate() {
            d.check_same_space(&diffs[0])?;
            let tol = scaled_tol(d);
            if !d.is_measurable(n, tol) {
                return Err(Error::NotAdapted { level: n });
            }
            if n >= 1 && cond_exp(d, n - 1)?.sup_norm() > tol {
                return Err(Error::NotMartingale(format!("E_{} d_{n} f is not zero", n - 1)));
            }
        }
        Ok(Self { space, diffs })
    }

    pub(crate) fn from_diffs_unchecked(space: Arc<ProductFilteredSpace>, diffs: Vec<RandomVariable>) -> Self {
        debug_assert_eq!(diffs.len(), space.depth() + 1);
        Self { space, diffs }
    }

    /// `f_n = E_n g`, with `d_0 f = E_0 g`.
    pub fn from_terminal(g: &RandomVariable) -> Self {
        let space = g.space().clone();
        let levels: Vec<RandomVariable> = (0..=space.depth()).map(|n| average_over(space.table(n), g)).collect();
        let mut diffs = Vec::with_capacity(levels.len());
        diffs.push(levels[0].clone());
        for n in 1..levels.len() {
            diffs.push(levels[n].sub(&levels[n - 1]));
        }
        Self { space, diffs }
    }

    pub fn zero(space: &Arc<ProductFilteredSpace>) -> Self {
        Self { space: space.clone(), diffs: vec![RandomVariable::zeros(space); space.depth() + 1] }
    }

    pub fn space(&self) -> &Arc<ProductFilteredSpace> {
        &self.space
    }

    pub fn depth(&self) -> usize {
        self.space.depth()
    }

    pub fn diffs(&self) -> &[RandomVariable] {
        &self.diffs
    }

    /// `d_n f`; zero beyond the terminal level.
    pub fn diff(&self, n: usize) -> RandomVariable {
        self.diffs.get(n).cloned().unwrap_or_else(|| RandomVariable::zeros(&self.space))
    }

    /// `f_n`; equal to `f_N` for `n > N`.
    pub fn value(&self, n: usize) -> RandomVariable {
        let top = n.min(self.depth());
        let mut values = vec![0.0; self.space.len()];
        for d in &self.diffs[..=top] {
            for (v, x) in values.iter_mut().zip(d.values()) {
                *v += x;
            }
        }
        RandomVariable::from_raw(self.space.clone(), values)
    }

    /// `f_0, ..., f_N`.
    pub fn values(&self) -> Vec<RandomVariable> {
        let mut out = Vec::with_capacity(self.diffs.len());
        let mut acc = vec![0.0; self.space.len()];
        for d in &self.diffs {
            for (v, x) in acc.iter_mut().zip(d.values()) {
                *v += x;
            }
            out.push(RandomVariable::from_raw(self.space.clone(), acc.clone()));
        }
        out
    }

    pub fn terminal(&self) -> RandomVariable {
        self.value(self.depth())
    }

    pub fn starts_at_zero(&self) -> bool {
        self.diffs[0].sup_norm() <= MARTINGALE_TOL
    }

    /// `f - f_0`.
    pub fn centered(&self) -> Self {
        let mut diffs = self.diffs.clone();
        diffs[0] = RandomVariable::zeros(&self.space);
        Self { space: self.space.clone(), diffs }
    }

    pub fn add(&self, other: &Martingale) -> Self {
        let diffs = self.diffs.iter().zip(&other.diffs).map(|(a, b)| a.add(b)).collect();
        Self { space: self.space.clone(), diffs }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { space: self.space.clone(), diffs: self.diffs.iter().map(|d| d.scale(c)).collect() }
    }

    /// Largest pointwise gap `max_n |f_n - g_n|`.
    pub fn max_distance(&self, other: &Martingale) -> f64 {
        self.values().iter().zip(other.values()).fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(&b)))
    }
}

/// A stopping time; the level `N + 1` encodes `∞`.
#[derive(Debug, Clone, PartialEq)]
pub struct StoppingTime {
    levels: Vec<usize>,
    depth: usize,
}

impl StoppingTime {
    /// Validates that `{ν = n}` is a union of `F_n`-atoms for every finite `n`.
    /// Entries `None` are `∞`.
    pub fn new(space: &ProductFilteredSpace, levels: Vec<Option<usize>>) -> Result<Self> {
        if levels.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: levels.len() });
        }
        let depth = space.depth();
        let raw = levels
            .into_iter()
            .map(|l| match l {
                Some(n) if n > depth => Err(Error::InvalidStoppingTime(format!("level {n} beyond depth {depth}"))),
                Some(n) => Ok(n),
                None => Ok(depth + 1),
            })
            .collect::<Result<Vec<_>>>()?;
        let nu = Self { levels: raw, depth };
        nu.check(space)?;
        Ok(nu)
    }

    pub(crate) fn from_raw(levels: Vec<usize>, depth: usize) -> Self {
        Self { levels, depth }
    }

    fn check(&self, space: &ProductFilteredSpace) -> Result<()> {
        for n in 0..=self.depth {
            for atom in space.table(n).atoms() {
                let hits = atom.points.iter().filter(|&&p| self.levels[p] == n).count();
                if hits != 0 && hits != atom.points.len() {
                    return Err(Error::InvalidStoppingTime(format!("{{nu = {n}}} is not F_{n}-measurable")));
                }
            }
        }
        Ok(())
    }

    pub fn constant(space: &ProductFilteredSpace, level: Option<usize>) -> Result<Self> {
        Self::new(space, vec![level; space.len()])
    }

    pub fn infinite(space: &ProductFilteredSpace) -> Self {
        Self { levels: vec![space.depth() + 1; space.len()], depth: space.depth() }
    }

    pub fn get(&self, idx: usize) -> Option<usize> {
        let l = self.levels[idx];
        (l <= self.depth).then_some(l)
    }

    /// Level with `∞` encoded as `N + 1`.
    pub fn raw(&self, idx: usize) -> usize {
        self.levels[idx]
    }

    pub fn raw_levels(&self) -> &[usize] {
        &self.levels
    }

    pub fn is_finite_at(&self, idx: usize) -> bool {
        self.levels[idx] <= self.depth
    }

    /// `ν(ω) >= m` with `∞ >= m` for every `m`.
    pub fn reaches(&self, idx: usize, m: usize) -> bool {
        self.levels[idx] >= m
    }

    pub fn finite_indicator(&self, space: &Arc<ProductFilteredSpace>) -> RandomVariable {
        RandomVariable::indicator(space, |i| self.is_finite_at(i))
    }

    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Pointwise `self <= other`.
    pub fn le(&self, other: &StoppingTime) -> bool {
        self.levels.iter().zip(&other.levels).all(|(a, b)| a <= b)
    }
}

/// `f^ν_n = Σ_{m <= n} d_m f χ_{ν >= m}`.
pub fn stop(f: &Martingale, nu: &StoppingTime) -> Result<Martingale> {
    if nu.len() != f.space().len() || nu.depth != f.depth() {
        return Err(Error::SpaceMismatch);
    }
    let diffs = f
        .diffs()
        .iter()
        .enumerate()
        .map(|(m, d)| {
            let values = d.values().iter().enumerate().map(|(i, &v)| if nu.reaches(i, m) { v } else { 0.0 }).collect();
            RandomVariable::from_raw(f.space().clone(), values)
        })
        .collect();
    Ok(Martingale::from_diffs_unchecked(f.space().clone(), diffs))
}

/// `ν(ω) = min { n : seq[n + offset](ω) > threshold }`, `∞` if none.
///
/// The sequence is read as constant past its last entry, so `offset = 1`
/// applied to `s_0, ..., s_N` uses `s_{N+1} = s_N` at level `N`. The entry
/// used at level `n` must be `F_n`-measurable.
pub fn first_passage(seq: &[RandomVariable], threshold: f64, offset: usize) -> Result<StoppingTime> {
    let first = seq.first().ok_or_else(|| Error::InvalidParameter("empty sequence".into()))?;
    let space = first.space().clone();
    let depth = space.depth();
    let at = |n: usize| &seq[(n + offset).min(seq.len() - 1)];
    for n in 0..=depth {
        let v = at(n);
        v.check_same_space(first)?;
        if !v.is_measurable(n, scaled_tol(v)) {
            return Err(Error::NotAdapted { level: n });
        }
    }
    let levels =
        (0..space.len()).map(|i| (0..=depth).find(|&n| at(n).get(i) > threshold).unwrap_or(depth + 1)).collect();
    Ok(StoppingTime::from_raw(levels, depth))
}

/// Nondecreasing, nonnegative adapted sequence `λ_0, ..., λ_N`; `λ_∞ = λ_N`.
#[derive(Debug, Clone)]
pub struct AdaptedEnvelope {
    levels: Vec<RandomVariable>,
}

impl AdaptedEnvelope {
    pub fn new(levels: Vec<RandomVariable>) -> Result<Self> {
        let first = levels.first().ok_or_else(|| Error::InvalidEnvelope("empty envelope".into()))?;
        let depth = first.space().depth();
        if levels.len() != depth + 1 {
            return Err(Error::DimensionMismatch { expected: depth + 1, found: levels.len() });
        }
        for (n, l) in levels.iter().enumerate() {
            l.check_same_space(first)?;
            if !l.is_measurable(n, scaled_tol(l)) {
                return Err(Error::NotAdapted { level: n });
            }
            if l.min_value() < 0.0 {
                return Err(Error::InvalidEnvelope(format!("negative value at level {n}")));
            }
            if n > 0 && l.values().iter().zip(levels[n - 1].values()).any(|(a, b)| a < b) {
                return Err(Error::InvalidEnvelope(format!("decreases at level {n}")));
            }
        }
        Ok(Self { levels })
    }

    pub(crate) fn from_raw(levels: Vec<RandomVariable>) -> Self {
        Self { levels }
    }

    pub fn levels(&self) -> &[RandomVariable] {
        &self.levels
    }

    pub fn level(&self, n: usize) -> &RandomVariable {
        &self.levels[n.min(self.levels.len() - 1)]
    }

    pub fn terminal(&self) -> &RandomVariable {
        self.levels.last().unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::make_dyadic_space;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rv(space: &Arc<ProductFilteredSpace>, rng: &mut ChaCha8Rng) -> RandomVariable {
        RandomVariable::new(space.clone(), (0..space.len()).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    #[test]
    fn cond_exp_examples() {
        let s = make_dyadic_space(1, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let g = random_rv(&s, &mut rng);
        assert_eq!(cond_exp(&g, 2).unwrap().values(), g.values());
        let e0 = cond_exp(&g, 0).unwrap();
        assert!(e0.values().iter().all(|v| (v - g.expectation()).abs() < 1e-15));

        let chi = RandomVariable::indicator(&s, |i| i == 0);
        assert_eq!(cond_exp(&chi, 1).unwrap().values(), &[0.5, 0.5, 0.0, 0.0]);
        assert!(matches!(cond_exp(&chi, 3), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn partial_cond_exp_examples() {
        let s = make_dyadic_space(2, 1).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let g = random_rv(&s, &mut rng);
        assert_eq!(partial_cond_exp(&g, 0, 1).unwrap().values(), g.values());

        let avg = partial_cond_exp(&g, 1, 0).unwrap();
        for x in 0..2 {
            let mean = 0.5 * (g.get(x) + g.get(x + 2));
            assert!((avg.get(x) - mean).abs() < 1e-15 && (avg.get(x + 2) - mean).abs() < 1e-15);
        }

        let chi = RandomVariable::from_fn(&s, |m| if m[0] == 0 { 1.0 } else { 0.0 }).unwrap();
        assert!(partial_cond_exp(&chi, 0, 0).unwrap().values().iter().all(|&v| v == 0.5));
        assert!(matches!(partial_cond_exp(&g, 2, 0), Err(Error::CoordinateOutOfRange { .. })));
        assert!(matches!(partial_cond_exp(&g, 0, 2), Err(Error::LevelOutOfRange { .. })));
    }

    #[test]
    fn tower_and_factorisation() {
        let s = make_dyadic_space(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g = random_rv(&s, &mut rng);
        for n in 0..=3 {
            for m in 0..=3 {
                let lhs = cond_exp(&cond_exp(&g, m).unwrap(), n).unwrap();
                let rhs = cond_exp(&g, n.min(m)).unwrap();
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
            let composed = partial_cond_exp(&partial_cond_exp(&g, 0, n).unwrap(), 1, n).unwrap();
            assert!(composed.max_abs_diff(&cond_exp(&g, n).unwrap()) < 1e-12);
        }
    }

    #[test]
    fn from_terminal_examples() {
        let s = make_dyadic_space(1, 1).unwrap();
        let g = RandomVariable::new(s.clone(), vec![3.0, 1.0]).unwrap();
        let f = Martingale::from_terminal(&g);
        assert_eq!(f.diff(0).values(), &[2.0, 2.0]);
        assert_eq!(f.diff(1).values(), &[1.0, -1.0]);

        let c = Martingale::from_terminal(&RandomVariable::constant(&s, 4.0));
        assert_eq!(c.diff(1).sup_norm(), 0.0);

        let s3 = make_dyadic_space(2, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = random_rv(&s3, &mut rng);
        let f = Martingale::from_terminal(&g);
        assert!(f.terminal().max_abs_diff(&g) < 1e-12);
        assert!(Martingale::from_diffs(f.diffs().to_vec()).is_ok());
    }

    #[test]
    fn from_diffs_rejects_non_martingales() {
        let s = make_dyadic_space(1, 1).unwrap();
        let zero = RandomVariable::zeros(&s);
        let biased = RandomVariable::new(s.clone(), vec![1.0, 0.0]).unwrap();
        assert!(matches!(Martingale::from_diffs(vec![zero.clone(), biased]), Err(Error::NotMartingale(_))));
        let rough = RandomVariable::new(s.clone(), vec![1.0, -1.0]).unwrap();
        assert!(matches!(Martingale::from_diffs(vec![rough, zero]), Err(Error::NotAdapted { level: 0 })));
    }

    #[test]
    fn stopping_examples() {
        let s = make_dyadic_space(1, 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let f = Martingale::from_terminal(&random_rv(&s, &mut rng)).centered();
        let inf = StoppingTime::infinite(&s);
        assert!(stop(&f, &inf).unwrap().max_distance(&f) == 0.0);
        let zero = StoppingTime::constant(&s, Some(0)).unwrap();
        let stopped = stop(&f, &zero).unwrap();
        assert!(stopped.values().iter().all(|v| v.sup_norm() == 0.0));

        let nu = first_passage(&f.values().iter().map(RandomVariable::abs).collect::<Vec<_>>(), 0.3, 0).unwrap();
        let once = stop(&f, &nu).unwrap();
        let twice = stop(&once, &nu).unwrap();
        assert_eq!(once.max_distance(&twice), 0.0);
        assert!(Martingale::from_diffs(once.diffs().to_vec()).is_ok());
    }

    #[test]
    fn stopping_time_validation() {
        let s = make_dyadic_space(1, 2).unwrap();
        assert!(StoppingTime::new(&s, vec![Some(0), None, None, None]).is_err());
        assert!(StoppingTime::new(&s, vec![Some(1), Some(1), None, None]).is_ok());
        assert!(StoppingTime::new(&s, vec![Some(3), None, None, None]).is_err());
    }

    #[test]
    fn first_passage_examples() {
        let s = make_dyadic_space(1, 2).unwrap();
        let zeros = vec![RandomVariable::zeros(&s); 3];
        let nu = first_passage(&zeros, 1.0, 0).unwrap();
        assert!((0..4).all(|i| nu.get(i).is_none()));
        let twos = vec![RandomVariable::constant(&s, 2.0); 3];
        let nu = first_passage(&twos, 1.0, 0).unwrap();
        assert!((0..4).all(|i| nu.get(i) == Some(0)));

        let terminal = RandomVariable::new(s.clone(), vec![0.0, 2.0, 0.0, 0.0]).unwrap();
        let bad = vec![terminal.clone(), terminal.clone(), terminal];
        assert!(matches!(first_passage(&bad, 1.0, 0), Err(Error::NotAdapted { level: 0 })));
    }

    #[test]
    fn envelope_validation() {
        let s = make_dyadic_space(1, 1).unwrap();
        let a = RandomVariable::constant(&s, 1.0);
        let b = RandomVariable::new(s.clone(), vec![2.0, 1.0]).unwrap();
        assert!(AdaptedEnvelope::new(vec![a.clone(), b.clone()]).is_ok());
        assert!(AdaptedEnvelope::new(vec![b.clone(), b]).is_err());
        let c = RandomVariable::new(s.clone(), vec![2.0, 0.5]).unwrap();
        assert!(AdaptedEnvelope::new(vec![a, c]).is_err());
    }
}
