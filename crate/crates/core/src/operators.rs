//! Maximal, square and conditional square functions, coordinate maximal
//! operators, the Hardy quasi-norms, martingale transforms and the inequality
//! checks built from them.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::martingale::{cond_exp, partial_cond_exp, AdaptedEnvelope, Martingale, MARTINGALE_TOL};
use crate::mixed_norm::{mixed_norm, MixedExponent};
use crate::space::{CoordinateSpace, ProductFilteredSpace, RandomVariable, Weight};

fn running<F: Fn(f64, f64) -> f64>(seq: &[RandomVariable], step: F) -> Vec<RandomVariable> {
    let mut out: Vec<RandomVariable> = Vec::with_capacity(seq.len());
    for (n, v) in seq.iter().enumerate() {
        out.push(match n {
            0 => v.map(|x| step(0.0, x)),
            _ => out[n - 1].zip_with(v, &step),
        });
    }
    out
}

fn pick(seq: Vec<RandomVariable>, upto: Option<usize>) -> RandomVariable {
    let last = seq.len() - 1;
    seq.into_iter().nth(upto.map_or(last, |m| m.min(last))).unwrap()
}

/// `M_0 f, ..., M_N f` with `M_m f = max_{n <= m} |f_n|`.
pub fn maximal_sequence(f: &Martingale) -> Vec<RandomVariable> {
    running(&f.values(), |acc, x| acc.max(x.abs()))
}

/// `S_0 f, ..., S_N f`.
pub fn square_sequence(f: &Martingale) -> Vec<RandomVariable> {
    running(f.diffs(), |acc: f64, x: f64| acc.hypot(x))
}

/// `s_0 f, ..., s_N f` with `s_m f = (Σ_{n <= m} E_{n-1} |d_n f|^2)^{1/2}`.
/// The `n = 0` term uses `E_0` in place of `E_{-1}`.
pub fn cond_square_sequence(f: &Martingale) -> Vec<RandomVariable> {
    let terms: Vec<RandomVariable> = f
        .diffs()
        .iter()
        .enumerate()
        .map(|(n, d)| cond_exp(&d.mul(d), n.saturating_sub(1)).expect("level in range"))
        .collect();
    running(&terms, |acc, x| acc + x).into_iter().map(|v| v.map(|x| x.max(0.0).sqrt())).collect()
}

/// `M f`, or `M_m f` when `upto = Some(m)`.
pub fn maximal(f: &Martingale, upto: Option<usize>) -> RandomVariable {
    pick(maximal_sequence(f), upto)
}

/// `S f`, or `S_m f`.
pub fn square_function(f: &Martingale, upto: Option<usize>) -> RandomVariable {
    pick(square_sequence(f), upto)
}

/// `s f`, or `s_m f`.
pub fn cond_square_function(f: &Martingale, upto: Option<usize>) -> RandomVariable {
    pick(cond_square_sequence(f), upto)
}

/// `Σ_n |d_n f|`.
pub fn variation(f: &Martingale) -> RandomVariable {
    f.diffs().iter().fold(RandomVariable::zeros(f.space()), |acc, d| acc.add(&d.abs()))
}

/// `M_k g = max_m |E_{∞,..,m,..,∞} g|` with `m` in coordinate `k` (0-based).
pub fn coord_maximal(g: &RandomVariable, k: usize) -> Result<RandomVariable> {
    let mut out = g.abs();
    for m in 0..g.space().depth() {
        out = out.max(&partial_cond_exp(g, k, m)?.abs());
    }
    Ok(out)
}

/// `M̃ g = M_d ∘ ... ∘ M_1 g`.
pub fn tilde_maximal(g: &RandomVariable) -> RandomVariable {
    (0..g.space().dims()).fold(g.clone(), |acc, k| coord_maximal(&acc, k).expect("coordinate in range"))
}

/// `sup_n ‖f_n‖_p⃗`.
pub fn martingale_norm(f: &Martingale, p: &MixedExponent) -> Result<f64> {
    f.values().iter().try_fold(0.0f64, |m, v| Ok(m.max(mixed_norm(v, p)?)))
}

/// Smallest element of `Λ` with `next[n+1] <= λ_n`, where `next` is read as
/// constant past its last entry: `λ_n` is the running max over `m <= n` of
/// the per-`F_m`-atom maximum of `next[m+1]`.
fn minimal_envelope(next: &[RandomVariable]) -> AdaptedEnvelope {
    let space = next[0].space().clone();
    let depth = space.depth();
    let mut levels: Vec<RandomVariable> = Vec::with_capacity(depth + 1);
    for n in 0..=depth {
        let source = &next[(n + 1).min(depth)];
        let table = space.level(n).expect("level in range");
        let atom_max: Vec<f64> =
            table.atoms().iter().map(|a| a.points.iter().fold(0.0f64, |m, &i| m.max(source.get(i)))).collect();
        let mut values: Vec<f64> = (0..space.len()).map(|i| atom_max[table.atom_of(i)]).collect();
        if let Some(prev) = levels.last() {
            for (v, p) in values.iter_mut().zip(prev.values()) {
                *v = v.max(*p);
            }
        }
        levels.push(RandomVariable::new(space.clone(), values).expect("finite"));
    }
    AdaptedEnvelope::from_raw(levels)
}

/// Minimal `λ ∈ Λ` with `S_n f <= λ_{n-1}`.
pub fn minimal_q_envelope(f: &Martingale) -> AdaptedEnvelope {
    minimal_envelope(&square_sequence(f))
}

/// Minimal `λ ∈ Λ` with `|f_n| <= λ_{n-1}`.
pub fn minimal_p_envelope(f: &Martingale) -> AdaptedEnvelope {
    minimal_envelope(&f.values().iter().map(RandomVariable::abs).collect::<Vec<_>>())
}

pub fn q_value(f: &Martingale, p: &MixedExponent) -> Result<f64> {
    mixed_norm(minimal_q_envelope(f).terminal(), p)
}

pub fn p_value(f: &Martingale, p: &MixedExponent) -> Result<f64> {
    mixed_norm(minimal_p_envelope(f).terminal(), p)
}

/// `‖Σ_n |d_n f|‖_p⃗`.
pub fn g_value(f: &Martingale, p: &MixedExponent) -> Result<f64> {
    mixed_norm(&variation(f), p)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HardyNormReport {
    pub maximal: f64,
    pub square: f64,
    pub cond_square: f64,
    pub p_value: f64,
    pub q_value: f64,
    pub g_value: f64,
}

pub fn hardy_norms(f: &Martingale, p: &MixedExponent) -> Result<HardyNormReport> {
    Ok(HardyNormReport {
        maximal: mixed_norm(&maximal(f, None), p)?,
        square: mixed_norm(&square_function(f, None), p)?,
        cond_square: mixed_norm(&cond_square_function(f, None), p)?,
        p_value: p_value(f, p)?,
        q_value: q_value(f, p)?,
        g_value: g_value(f, p)?,
    })
}

/// Predictable multipliers `b_0, ..., b_{N-1}`.
#[derive(Debug, Clone)]
pub struct TransformMultipliers {
    b: Vec<RandomVariable>,
}

impl TransformMultipliers {
    pub fn new(space: &ProductFilteredSpace, b: Vec<RandomVariable>) -> Result<Self> {
        if b.len() != space.depth() {
            return Err(Error::DimensionMismatch { expected: space.depth(), found: b.len() });
        }
        for (k, bk) in b.iter().enumerate() {
            if !bk.space().same_as(space) {
                return Err(Error::SpaceMismatch);
            }
            if bk.sup_norm() > 1.0 {
                return Err(Error::InvalidMultiplier { index: k, reason: format!("|b| reaches {}", bk.sup_norm()) });
            }
            if !bk.is_measurable(k, MARTINGALE_TOL) {
                return Err(Error::InvalidMultiplier { index: k, reason: format!("not F_{k}-measurable") });
            }
        }
        Ok(Self { b })
    }

    pub fn constant(space: &Arc<ProductFilteredSpace>, c: f64) -> Result<Self> {
        Self::new(space, vec![RandomVariable::constant(space, c); space.depth()])
    }

    pub fn multipliers(&self) -> &[RandomVariable] {
        &self.b
    }
}

/// `d_k(Tf) = b_{k-1} d_k f` for `k >= 1`, `d_0(Tf) = 0`.
pub fn martingale_transform(f: &Martingale, b: &TransformMultipliers) -> Result<Martingale> {
    if b.b.len() != f.depth() || b.b.first().is_some_and(|b0| !b0.space().same_as(f.space())) {
        return Err(Error::SpaceMismatch);
    }
    let mut diffs = vec![RandomVariable::zeros(f.space())];
    diffs.extend(f.diffs()[1..].iter().zip(&b.b).map(|(d, bk)| d.mul(bk)));
    Ok(Martingale::from_diffs_unchecked(f.space().clone(), diffs))
}

/// `‖Σ_n E_n f_n‖_p⃗ / ‖Σ_n f_n‖_p⃗` with `0/0 = 0`; `fs[n]` is paired with
/// level `n`.
pub fn vector_inequality_ratio(fs: &[RandomVariable], p: &MixedExponent) -> Result<f64> {
    let first = fs.first().ok_or_else(|| Error::InvalidParameter("empty sequence".into()))?;
    let space = first.space();
    if fs.len() > space.depth() + 1 {
        return Err(Error::LevelOutOfRange { level: fs.len() - 1, depth: space.depth() });
    }
    let mut raw = RandomVariable::zeros(space);
    let mut projected = RandomVariable::zeros(space);
    for (n, fn_) in fs.iter().enumerate() {
        fn_.check_same_space(first)?;
        if fn_.min_value() < 0.0 {
            return Err(Error::InvalidParameter(format!("f_{n} takes negative values")));
        }
        raw = raw.add(fn_);
        projected = projected.add(&cond_exp(fn_, n)?);
    }
    let den = mixed_norm(&raw, p)?;
    let num = mixed_norm(&projected, p)?;
    Ok(if den == 0.0 { 0.0 } else { num / den })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakTypeCheck {
    pub lhs: f64,
    pub rhs: f64,
}

impl WeakTypeCheck {
    pub fn holds(&self, tol: f64) -> bool {
        self.lhs <= self.rhs + tol
    }
}

/// `ϱ ∫_{Mf > ϱ} φ dP` against `∫ |g| Mφ dP` for `f = (E_n g)`.
pub fn weighted_weak_type_check(g: &RandomVariable, phi: &Weight, rho: f64) -> Result<WeakTypeCheck> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::InvalidParameter(format!("threshold {rho} must be positive")));
    }
    g.check_same_space(phi.variable())?;
    let mf = maximal(&Martingale::from_terminal(g), None);
    let mphi = maximal(&Martingale::from_terminal(phi.variable()), None);
    let probs = g.space().point_probs();
    let lhs = rho * (0..g.len()).filter(|&i| mf.get(i) > rho).map(|i| phi.variable().get(i) * probs[i]).sum::<f64>();
    let rhs = g.abs().mul(&mphi).expectation();
    Ok(WeakTypeCheck { lhs, rhs })
}

/// Measured quantities of the two-dimensional Doob counterexample
/// `f_n(x,y) = Σ_{k=1}^n 2^{k/p} χ_{[2^-k, 2^-k+1)^2}(x,y)` with exponent
/// `(p, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CounterexampleReport {
    pub n: usize,
    pub p: f64,
    /// `‖f_n‖_{(p,∞)}`.
    pub norm_f: f64,
    /// `‖M f_n‖_{(p,∞)}`.
    pub maximal_norm: f64,
    /// `∫ |M f_n(x, y)|^p dx` for `y ∈ [0, 2^-n)`.
    pub inner_integral: f64,
    /// The lower bound `n / 4^p` on `inner_integral` that the averaging
    /// argument yields.
    pub inner_bound: f64,
}

impl CounterexampleReport {
    /// Lower bound on `‖M f_n‖_{(p,∞)}` implied by `inner_bound`.
    pub fn maximal_bound(&self) -> f64 {
        self.inner_bound.powf(1.0 / self.p)
    }
}

/// The counterexample function on a space whose two coordinates are either
/// dense dyadic or dyadic shells; `band(i)` maps a coordinate point to its
/// band `k` (`1..=n`) or `None` below `2^-n`.
fn counterexample_function(
    space: &Arc<ProductFilteredSpace>,
    n: usize,
    p: f64,
    band: impl Fn(usize) -> Option<usize>,
) -> RandomVariable {
    RandomVariable::from_fn(space, |m| match (band(m[0]), band(m[1])) {
        (Some(a), Some(b)) if a == b && a <= n => 2f64.powf(a as f64 / p),
        _ => 0.0,
    })
    .expect("finite")
}

fn dyadic_band(x: f64) -> Option<usize> {
    // x in [2^-k, 2^-k+1) exactly when k = ceil(-log2 x) for x > 0.
    (x > 0.0).then(|| (-x.log2()).ceil() as usize)
}

/// `f_n` on the dense space `dyadic(2, depth)`.
pub fn counterexample_dense(n: usize, p: f64, depth: usize) -> Result<(Arc<ProductFilteredSpace>, RandomVariable)> {
    check_counterexample_args(n, p, depth)?;
    let space = crate::space::make_dyadic_space(2, depth)?;
    let xs = space.coord(0).points().to_vec();
    let f = counterexample_function(&space, n, p, |i| dyadic_band(xs[i]).filter(|&k| k <= n));
    Ok((space, f))
}

fn check_counterexample_args(n: usize, p: f64, depth: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParameter(format!("p = {p} must lie in (1, ∞)")));
    }
    if depth < n {
        return Err(Error::InvalidParameter(format!("depth {depth} is smaller than n = {n}")));
    }
    Ok(())
}

fn counterexample_report(
    space: &Arc<ProductFilteredSpace>,
    f: &RandomVariable,
    n: usize,
    p: f64,
    tail_y: usize,
) -> Result<CounterexampleReport> {
    let exponent = MixedExponent::new(vec![p, f64::INFINITY])?;
    let mf = maximal(&Martingale::from_terminal(f), None);
    let stride = space.strides()[1];
    let probs = space.coord(0).probs();
    let inner_integral: f64 = (0..space.shape()[0]).map(|x| mf.get(x + tail_y * stride).powf(p) * probs[x]).sum();
    Ok(CounterexampleReport {
        n,
        p,
        norm_f: mixed_norm(f, &exponent)?,
        maximal_norm: mixed_norm(&mf, &exponent)?,
        inner_integral,
        inner_bound: n as f64 / 4f64.powf(p),
    })
}

/// Evaluates the counterexample on the product of two dyadic shells.
///
/// `f_n` is measurable with respect to the dyadic bands, and on band-measurable
/// functions the dyadic conditional expectations of `dyadic(2, N)`, `N >= n`,
/// act exactly as those of the shell space, so every reported number equals
/// its dense counterpart while the space has only `(n+1)^2` points.
pub fn doob_counterexample(n: usize, p: f64, depth: usize) -> Result<CounterexampleReport> {
    check_counterexample_args(n, p, depth)?;
    let shell = CoordinateSpace::dyadic_shell(n)?;
    let space = Arc::new(ProductFilteredSpace::new(vec![shell.clone(), shell])?);
    let f = counterexample_function(&space, n, p, |i| (i < n).then_some(i + 1));
    counterexample_report(&space, &f, n, p, n)
}

/// Same report computed on the dense grid `dyadic(2, depth)`.
pub fn doob_counterexample_dense(n: usize, p: f64, depth: usize) -> Result<CounterexampleReport> {
    let (space, f) = counterexample_dense(n, p, depth)?;
    counterexample_report(&space, &f, n, p, 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::{
        rademacher_martingale, random_martingale, random_multipliers, random_variable, random_weight, trial_rng,
    };
    use crate::space::make_dyadic_space;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    #[test]
    fn maximal_examples() {
        let s = make_dyadic_space(1, 2).unwrap();
        let c = Martingale::from_terminal(&RandomVariable::constant(&s, -3.0));
        assert!(maximal(&c, None).values().iter().all(|&v| v == 3.0));

        let chi = RandomVariable::indicator(&s, |i| i == 0);
        let f = Martingale::from_terminal(&chi);
        assert_eq!(f.values().iter().map(|v| v.get(0)).collect::<Vec<_>>(), vec![0.25, 0.5, 1.0]);
        assert_eq!(maximal(&f, None).get(0), 1.0);
        assert_eq!(maximal(&f, Some(1)).get(0), 0.5);
    }

    #[test]
    fn square_function_examples() {
        let s = make_dyadic_space(1, 2).unwrap();
        assert_eq!(square_function(&Martingale::zero(&s), None).sup_norm(), 0.0);
        let f = rademacher_martingale(&s, &[0.7, 0.0]).unwrap();
        assert!(square_function(&f, None).values().iter().all(|&v| close(v, 0.7, 1e-15)));

        let g = random_martingale(&make_dyadic_space(2, 3).unwrap(), &mut trial_rng(1, 0));
        let sq = square_function(&g, None);
        let direct = g.diffs().iter().fold(RandomVariable::zeros(g.space()), |a, d| a.add(&d.mul(d)));
        assert!(sq.mul(&sq).max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn cond_square_examples() {
        let s = make_dyadic_space(1, 1).unwrap();
        let d1 = RandomVariable::new(s.clone(), vec![0.3, -0.3]).unwrap();
        let f = Martingale::from_diffs(vec![RandomVariable::zeros(&s), d1]).unwrap();
        assert!(cond_square_function(&f, None).values().iter().all(|&v| close(v, 0.3, 1e-15)));
        assert!(cond_square_function(&f, None).max_abs_diff(&square_function(&f, None)) < 1e-15);

        let s3 = make_dyadic_space(2, 3).unwrap();
        let det = rademacher_martingale(&s3, &[1.0, -2.0, 0.5]).unwrap();
        assert!(cond_square_function(&det, None).max_abs_diff(&square_function(&det, None)) < 1e-12);
    }

    #[test]
    fn cond_square_is_predictable_and_energy_matches() {
        let s = make_dyadic_space(2, 3).unwrap();
        let mut rng = trial_rng(2, 0);
        for _ in 0..5 {
            let f = random_martingale(&s, &mut rng);
            let seq = cond_square_sequence(&f);
            for (m, sm) in seq.iter().enumerate().skip(1) {
                assert!(sm.is_measurable(m - 1, 1e-12));
            }
            let big = square_function(&f, None);
            let small = cond_square_function(&f, None);
            assert!(close(big.mul(&big).expectation(), small.mul(&small).expectation(), 1e-9));
        }
    }

    #[test]
    fn sequences_are_nondecreasing() {
        let s = make_dyadic_space(2, 3).unwrap();
        let f = random_martingale(&s, &mut trial_rng(3, 0));
        for seq in [maximal_sequence(&f), square_sequence(&f), cond_square_sequence(&f)] {
            for w in seq.windows(2) {
                assert!(w[0].values().iter().zip(w[1].values()).all(|(a, b)| a <= b));
            }
        }
    }

    #[test]
    fn coordinate_maximal_examples() {
        let s = make_dyadic_space(2, 2).unwrap();
        let g = RandomVariable::from_fn(&s, |m| 1.0 + m[0] as f64).unwrap();
        assert!(coord_maximal(&g, 1).unwrap().max_abs_diff(&g) == 0.0);
        let c = RandomVariable::constant(&s, -2.5);
        assert!(tilde_maximal(&c).values().iter().all(|&v| close(v, 2.5, 1e-15)));

        let mut rng = trial_rng(4, 0);
        for _ in 0..20 {
            let g = random_variable(&s, &mut rng, -1.0, 1.0);
            let mf = maximal(&Martingale::from_terminal(&g), None);
            let mt = tilde_maximal(&g);
            assert!(mf.values().iter().zip(mt.values()).all(|(a, b)| *a <= b + 1e-12));
        }
    }

    #[test]
    fn hardy_norms_of_zero_and_deterministic() {
        let s = make_dyadic_space(2, 2).unwrap();
        let p = MixedExponent::new(vec![1.5, 3.0]).unwrap();
        let r = hardy_norms(&Martingale::zero(&s), &p).unwrap();
        assert_eq!([r.maximal, r.square, r.cond_square, r.p_value, r.q_value, r.g_value], [0.0; 6]);

        let f = rademacher_martingale(&s, &[1.0, -0.5]).unwrap();
        let r = hardy_norms(&f, &p).unwrap();
        assert!(close(r.q_value, 1.25f64.sqrt(), 1e-12));
        assert!(close(r.q_value, r.square, 1e-12));
        assert!(close(r.square, r.cond_square, 1e-12));
        // f_2 takes the values ±0.5, ±1.5 inside every F_1-atom.
        assert!(close(r.p_value, 1.5, 1e-12));
    }

    #[test]
    fn envelopes_majorize() {
        let s = make_dyadic_space(2, 3).unwrap();
        let mut rng = trial_rng(5, 0);
        for _ in 0..20 {
            let f = random_martingale(&s, &mut rng);
            let q = minimal_q_envelope(&f);
            let pe = minimal_p_envelope(&f);
            assert!(AdaptedEnvelope::new(q.levels().to_vec()).is_ok());
            assert!(AdaptedEnvelope::new(pe.levels().to_vec()).is_ok());
            let sq = square_sequence(&f);
            let vals = f.values();
            for n in 1..=s.depth() {
                assert!(sq[n].values().iter().zip(q.level(n - 1).values()).all(|(a, b)| a <= b));
                assert!(vals[n].values().iter().zip(pe.level(n - 1).values()).all(|(a, b)| a.abs() <= *b));
            }
            let p = MixedExponent::new(vec![0.8, 2.0]).unwrap();
            let r = hardy_norms(&f, &p).unwrap();
            assert!(r.maximal <= r.p_value + 1e-12 && r.square <= r.q_value + 1e-12);
        }
    }

    #[test]
    fn transform_examples() {
        let s = make_dyadic_space(2, 2).unwrap();
        let f = Martingale::from_terminal(&random_variable(&s, &mut trial_rng(6, 0), -1.0, 1.0));
        let one = TransformMultipliers::constant(&s, 1.0).unwrap();
        assert!(martingale_transform(&f, &one).unwrap().max_distance(&f.centered()) < 1e-15);
        let zero = TransformMultipliers::constant(&s, 0.0).unwrap();
        assert_eq!(martingale_transform(&f, &zero).unwrap().terminal().sup_norm(), 0.0);

        let signs = TransformMultipliers::new(&s, random_multipliers(&s, &mut trial_rng(6, 1), true)).unwrap();
        let tf = martingale_transform(&f.centered(), &signs).unwrap();
        assert!(square_function(&tf, None).max_abs_diff(&square_function(&f.centered(), None)) < 1e-12);
        assert!(Martingale::from_diffs(tf.diffs().to_vec()).is_ok());

        assert!(TransformMultipliers::constant(&s, 1.5).is_err());
        let rough = vec![RandomVariable::indicator(&s, |i| i == 0), RandomVariable::zeros(&s)];
        assert!(matches!(TransformMultipliers::new(&s, rough), Err(Error::InvalidMultiplier { index: 0, .. })));
    }

    #[test]
    fn vector_ratio_examples() {
        let s = make_dyadic_space(2, 2).unwrap();
        let p = MixedExponent::new(vec![2.0, 2.0]).unwrap();
        let mut rng = trial_rng(7, 0);
        let adapted: Vec<RandomVariable> =
            (0..=2).map(|n| cond_exp(&random_variable(&s, &mut rng, 0.0, 1.0), n).unwrap()).collect();
        assert!(close(vector_inequality_ratio(&adapted, &p).unwrap(), 1.0, 1e-12));
        let mut last = vec![RandomVariable::zeros(&s); 2];
        last.push(random_variable(&s, &mut rng, 0.0, 1.0));
        assert!(close(vector_inequality_ratio(&last, &p).unwrap(), 1.0, 1e-12));
        assert_eq!(vector_inequality_ratio(&vec![RandomVariable::zeros(&s); 3], &p).unwrap(), 0.0);
    }

    #[test]
    fn weak_type_examples() {
        let s = make_dyadic_space(1, 4).unwrap();
        let mut rng = trial_rng(8, 0);
        let g = random_variable(&s, &mut rng, -1.0, 1.0);
        let phi = random_weight(&s, &mut rng);
        let above = weighted_weak_type_check(&g, &phi, g.sup_norm() * 1.01).unwrap();
        assert_eq!(above.lhs, 0.0);
        for j in 1..=20 {
            let rho = j as f64 / 20.0;
            assert!(weighted_weak_type_check(&g, &phi, rho).unwrap().holds(1e-9));
        }
        let unit = Weight::new(RandomVariable::constant(&s, 1.0)).unwrap();
        let c = weighted_weak_type_check(&g, &unit, 0.2).unwrap();
        assert!(close(c.rhs, g.abs().expectation(), 1e-12) && c.holds(1e-9));
        assert!(weighted_weak_type_check(&g, &phi, 0.0).is_err());
    }

    #[test]
    fn counterexample_shell_matches_dense() {
        for (n, p) in [(1, 2.0), (2, 2.0), (3, 3.0), (4, 1.5)] {
            let shell = doob_counterexample(n, p, n).unwrap();
            let dense = doob_counterexample_dense(n, p, n).unwrap();
            assert!(close(shell.norm_f, dense.norm_f, 1e-12));
            assert!(close(shell.maximal_norm, dense.maximal_norm, 1e-12));
            assert!(close(shell.inner_integral, dense.inner_integral, 1e-12));
        }
        let deeper = doob_counterexample_dense(3, 2.0, 5).unwrap();
        assert!(close(deeper.maximal_norm, doob_counterexample(3, 2.0, 5).unwrap().maximal_norm, 1e-12));
    }

    #[test]
    fn counterexample_small_cases() {
        let r = doob_counterexample(1, 2.0, 1).unwrap();
        assert!(close(r.norm_f, 1.0, 1e-12));
        // Only the level-0 average over the unit square (value sqrt(2)/4) sees the tail.
        assert!(close(r.inner_integral, 0.125, 1e-12));
        let r = doob_counterexample(4, 3.0, 4).unwrap();
        assert!(close(r.norm_f, 1.0, 1e-12));
        assert!(r.maximal_norm >= r.norm_f);
        assert!(r.inner_integral >= r.inner_bound);
        assert!(doob_counterexample(5, 2.0, 4).is_err());
        assert!(doob_counterexample(2, 1.0, 4).is_err());
    }
}
