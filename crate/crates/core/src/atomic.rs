//! Atoms, atomic decompositions of the Hardy spaces, the decomposition
//! quasi-norm, the Davis decomposition and the empirical equivalence report.
//!
//! All decompositions take `τ_k` from a first-passage rule at threshold `2^k`
//! and set
//!
//! ```text
//! μ_k = 3·2^k ‖χ_{τ_k<∞}‖_p⃗,    a^k = (f^{τ_{k+1}} - f^{τ_k}) / μ_k
//! ```
//!
//! with `a^k = 0` when `μ_k = 0`. On a finite space only the scales between
//! the smallest positive and the largest value of the driving sequence matter,
//! so `k` runs over that dyadic range padded by one scale below.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::martingale::{cond_exp, first_passage, stop, AdaptedEnvelope, Martingale, StoppingTime};
use crate::mixed_norm::{mixed_norm, MixedExponent};
use crate::operators::{
    cond_square_function, cond_square_sequence, g_value, hardy_norms, maximal, minimal_p_envelope, minimal_q_envelope,
    q_value, square_function, square_sequence, HardyNormReport,
};
use crate::space::{regularity_constant, ProductFilteredSpace, RandomVariable};

/// Tolerance used by atom validation and the pointwise certificates,
/// relative to `max(1, scale)`.
pub const ATOM_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AtomKind {
    /// Bounded through the conditional square function `s`.
    CondSquare,
    /// Bounded through the square function `S`.
    Square,
    /// Bounded through the maximal function `M`.
    Maximal,
}

impl AtomKind {
    fn operator(self, a: &Martingale) -> RandomVariable {
        match self {
            AtomKind::CondSquare => cond_square_function(a, None),
            AtomKind::Square => square_function(a, None),
            AtomKind::Maximal => maximal(a, None),
        }
    }
}

impl fmt::Display for AtomKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AtomKind::CondSquare => "s",
            AtomKind::Square => "S",
            AtomKind::Maximal => "M",
        })
    }
}

/// A terminal function `a` together with its stopping time.
#[derive(Debug, Clone)]
pub struct Atom {
    pub kind: AtomKind,
    pub values: RandomVariable,
    pub tau: StoppingTime,
}

impl Atom {
    pub fn martingale(&self) -> Martingale {
        Martingale::from_terminal(&self.values)
    }

    pub fn is_zero(&self) -> bool {
        self.values.sup_norm() == 0.0
    }

    /// `χ_{τ<∞}`.
    pub fn support(&self) -> RandomVariable {
        self.tau.finite_indicator(self.values.space())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AtomValidation {
    pub valid: bool,
    pub messages: Vec<String>,
    /// `max |E_n a|` over `n <= τ`.
    pub vanishing_residual: f64,
    /// `max op(a)` on `{τ < ∞}`.
    pub operator_sup: f64,
    /// `‖χ_{τ<∞}‖_p⃗^{-1}` (infinite when `τ ≡ ∞`).
    pub bound: f64,
}

/// Checks `E_n a = 0` for `n <= τ` and `‖op(a) χ_{τ<∞}‖_∞ <= ‖χ_{τ<∞}‖_p⃗^{-1}`.
pub fn validate_atom(atom: &Atom, p: &MixedExponent) -> Result<AtomValidation> {
    let space = atom.values.space();
    if atom.tau.len() != space.len() {
        return Err(Error::SpaceMismatch);
    }
    let tol = ATOM_TOL * atom.values.sup_norm().max(1.0);
    let m = atom.martingale();
    let mut messages = Vec::new();

    let mut vanishing_residual = 0.0f64;
    let mut first_bad: Option<usize> = None;
    for (n, fn_) in m.values().iter().enumerate() {
        for i in 0..space.len() {
            if atom.tau.reaches(i, n) {
                let r = fn_.get(i).abs();
                vanishing_residual = vanishing_residual.max(r);
                if r > tol && first_bad.is_none() {
                    first_bad = Some(n);
                }
            }
        }
    }
    if let Some(n) = first_bad {
        messages.push(format!("condition 1 violated at n={n}"));
    }

    let support = atom.support();
    let chi = mixed_norm(&support, p)?;
    let bound = if chi > 0.0 { 1.0 / chi } else { f64::INFINITY };
    let op = atom.kind.operator(&m);
    let operator_sup = (0..space.len()).filter(|&i| atom.tau.is_finite_at(i)).fold(0.0f64, |s, i| s.max(op.get(i)));
    if operator_sup > bound * (1.0 + ATOM_TOL) + ATOM_TOL {
        messages.push(format!("condition 2 violated: {}(a) reaches {operator_sup} > {bound}", atom.kind));
    }
    Ok(AtomValidation { valid: messages.is_empty(), messages, vanishing_residual, operator_sup, bound })
}

#[derive(Debug, Clone)]
pub struct AtomicTerm {
    pub k: i32,
    pub mu: f64,
    pub atom: Atom,
}

#[derive(Debug, Clone)]
pub struct AtomicDecomposition {
    pub terms: Vec<AtomicTerm>,
    pub t: f64,
    pub p: MixedExponent,
    space: Arc<ProductFilteredSpace>,
}

/// Result of checking a decomposition against the martingale it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct DecompositionCheck {
    /// `max_n ‖f_n - Σ_k μ_k E_n a^k‖_∞`.
    pub reconstruction_error: f64,
    /// `(k, messages)` for atoms failing validation.
    pub invalid_atoms: Vec<(i32, Vec<String>)>,
    /// Whether `τ_k <= τ_{k+1}` pointwise.
    pub monotone: bool,
}

impl DecompositionCheck {
    pub fn passed(&self, tol: f64) -> bool {
        self.reconstruction_error < tol && self.invalid_atoms.is_empty() && self.monotone
    }
}

impl AtomicDecomposition {
    pub fn empty(space: &Arc<ProductFilteredSpace>, p: MixedExponent, t: f64) -> Self {
        Self { terms: Vec::new(), t, p, space: space.clone() }
    }

    pub fn space(&self) -> &Arc<ProductFilteredSpace> {
        &self.space
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `Σ_k μ_k E_n a^k` for every level `n`.
    pub fn reconstruct(&self) -> Vec<RandomVariable> {
        let mut levels = vec![RandomVariable::zeros(&self.space); self.space.depth() + 1];
        for term in &self.terms {
            if term.mu == 0.0 || term.atom.is_zero() {
                continue;
            }
            for (acc, an) in levels.iter_mut().zip(term.atom.martingale().values()) {
                *acc = acc.add(&an.scale(term.mu));
            }
        }
        levels
    }

    pub fn reconstruction_error(&self, f: &Martingale) -> f64 {
        self.reconstruct().iter().zip(f.values()).fold(0.0, |m, (a, b)| m.max(a.max_abs_diff(&b)))
    }

    pub fn check(&self, f: &Martingale) -> Result<DecompositionCheck> {
        let mut invalid_atoms = Vec::new();
        for term in &self.terms {
            let v = validate_atom(&term.atom, &self.p)?;
            if !v.valid {
                invalid_atoms.push((term.k, v.messages));
            }
        }
        let monotone = self.terms.windows(2).all(|w| w[0].atom.tau.le(&w[1].atom.tau));
        Ok(DecompositionCheck { reconstruction_error: self.reconstruction_error(f), invalid_atoms, monotone })
    }

    /// `(k, μ_k, ‖χ_{τ_k<∞}‖_p⃗, ‖a^k‖_∞)` per term.
    pub fn manifest(&self) -> Result<Vec<(i32, f64, f64, f64)>> {
        self.terms
            .iter()
            .map(|term| Ok((term.k, term.mu, mixed_norm(&term.atom.support(), &self.p)?, term.atom.values.sup_norm())))
            .collect()
    }
}

/// `‖(Σ_k (μ_k χ_{τ_k<∞} / ‖χ_{τ_k<∞}‖_p⃗)^t)^{1/t}‖_p⃗`, skipping `μ_k = 0`.
pub fn decomposition_norm(dec: &AtomicDecomposition) -> Result<f64> {
    let mut acc = vec![0.0; dec.space.len()];
    for term in dec.terms.iter().filter(|t| t.mu > 0.0) {
        let support = term.atom.support();
        let chi = mixed_norm(&support, &dec.p)?;
        if chi == 0.0 {
            continue;
        }
        let level = (term.mu / chi).powf(dec.t);
        for (a, s) in acc.iter_mut().zip(support.values()) {
            *a += level * s;
        }
    }
    let aggregate = RandomVariable::new(dec.space.clone(), acc.into_iter().map(|v| v.powf(1.0 / dec.t)).collect())?;
    mixed_norm(&aggregate, &dec.p)
}

/// `t = min(1, p_min)`, halved when the decomposition needs `t < min(1, p_min)`.
pub fn default_t(p: &MixedExponent, strict: bool) -> f64 {
    let t = p.min().min(1.0);
    if strict {
        t / 2.0
    } else {
        t
    }
}

fn check_inputs(f: &Martingale, p: &MixedExponent, t: f64) -> Result<()> {
    if p.dims() != f.space().dims() {
        return Err(Error::DimensionMismatch { expected: f.space().dims(), found: p.dims() });
    }
    if !p.is_finite() {
        return Err(Error::InvalidExponent(format!("{p} must have finite entries")));
    }
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must lie in (0, 1]")));
    }
    if !f.starts_at_zero() {
        return Err(Error::NonzeroStart);
    }
    Ok(())
}

/// `[⌊log₂ min₊⌋ - 1, ⌈log₂ max⌉]` over all values of the sequence; `None`
/// if every value is zero.
fn scale_window(seq: &[RandomVariable]) -> Option<(i32, i32)> {
    let (lo, hi) = seq
        .iter()
        .flat_map(|v| v.values().iter().copied())
        .filter(|&v| v > 0.0)
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(v), hi.max(v)));
    (hi > 0.0).then(|| (lo.log2().floor() as i32 - 1, hi.log2().ceil() as i32))
}

fn threshold(k: i32) -> f64 {
    2f64.powi(k)
}

/// Builds `(μ_k, a^k, τ_k)` for `k = lo..=hi` from `taus[k - lo]`, which must
/// also hold `τ_{hi+1}`.
fn assemble(
    f: &Martingale,
    p: &MixedExponent,
    t: f64,
    kind: AtomKind,
    lo: i32,
    taus: Vec<StoppingTime>,
) -> Result<AtomicDecomposition> {
    let space = f.space();
    let stopped: Vec<RandomVariable> = taus.iter().map(|tau| Ok(stop(f, tau)?.terminal())).collect::<Result<_>>()?;
    let mut terms = Vec::with_capacity(taus.len() - 1);
    for (j, tau) in taus.iter().take(taus.len() - 1).enumerate() {
        let k = lo + j as i32;
        let chi = mixed_norm(&tau.finite_indicator(space), p)?;
        let mu = 3.0 * threshold(k) * chi;
        let values =
            if mu > 0.0 { stopped[j + 1].sub(&stopped[j]).scale(1.0 / mu) } else { RandomVariable::zeros(space) };
        terms.push(AtomicTerm { k, mu, atom: Atom { kind, values, tau: tau.clone() } });
    }
    Ok(AtomicDecomposition { terms, t, p: p.clone(), space: space.clone() })
}

/// Decomposition into `s`-atoms with `τ_k = inf{n : s_{n+1}(f) > 2^k}`.
pub fn decompose_s(f: &Martingale, p: &MixedExponent, t: f64) -> Result<AtomicDecomposition> {
    check_inputs(f, p, t)?;
    let seq = cond_square_sequence(f);
    let Some((lo, hi)) = scale_window(&seq) else {
        return Ok(AtomicDecomposition::empty(f.space(), p.clone(), t));
    };
    let taus = (lo..=hi + 1).map(|k| first_passage(&seq, threshold(k), 1)).collect::<Result<Vec<_>>>()?;
    assemble(f, p, t, AtomKind::CondSquare, lo, taus)
}

/// Whether `{τ_k < ∞} = {s(f) > 2^k}` for every term of `dec`.
pub fn level_sets_match(f: &Martingale, dec: &AtomicDecomposition) -> bool {
    let s = cond_square_function(f, None);
    dec.terms.iter().all(|term| {
        let level = threshold(term.k);
        (0..s.len()).all(|i| term.atom.tau.is_finite_at(i) == (s.get(i) > level))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvelopeKind {
    /// Envelope of `|f_n|`; atoms of kind `M`.
    P,
    /// Envelope of `S_n f`; atoms of kind `S`.
    Q,
}

/// Decomposition driven by the minimal predictable envelope with
/// `τ_k = inf{n : λ_n > 2^k}`.
pub fn decompose_envelope(
    f: &Martingale,
    p: &MixedExponent,
    t: f64,
    kind: EnvelopeKind,
) -> Result<AtomicDecomposition> {
    check_inputs(f, p, t)?;
    let (envelope, atom_kind) = match kind {
        EnvelopeKind::P => (minimal_p_envelope(f), AtomKind::Maximal),
        EnvelopeKind::Q => (minimal_q_envelope(f), AtomKind::Square),
    };
    decompose_with_envelope(f, p, t, &envelope, atom_kind)
}

/// Same construction for a caller-supplied envelope.
pub fn decompose_with_envelope(
    f: &Martingale,
    p: &MixedExponent,
    t: f64,
    envelope: &AdaptedEnvelope,
    kind: AtomKind,
) -> Result<AtomicDecomposition> {
    check_inputs(f, p, t)?;
    let seq = envelope.levels();
    let Some((lo, hi)) = scale_window(seq) else {
        return Ok(AtomicDecomposition::empty(f.space(), p.clone(), t));
    };
    let taus = (lo..=hi + 1).map(|k| first_passage(seq, threshold(k), 0)).collect::<Result<Vec<_>>>()?;
    assemble(f, p, t, kind, lo, taus)
}

/// Stopping-time comparison for one scale of the regular decomposition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleComparison {
    pub k: i32,
    /// `‖χ_{τ_k<∞}‖_p⃗`.
    pub tau_norm: f64,
    /// `‖χ_{ϱ_k<∞}‖_p⃗`.
    pub rho_norm: f64,
    /// `max_j P(Ī_{k,j}) / P(I_{k,j})` over nonempty `I_{k,j}`.
    pub cover_ratio: f64,
}

impl ScaleComparison {
    /// `tau_norm / rho_norm`, or `None` when both sets are empty.
    pub fn ratio(&self) -> Option<f64> {
        (self.rho_norm > 0.0).then(|| self.tau_norm / self.rho_norm)
    }
}

#[derive(Debug, Clone)]
pub struct RegularDecomposition {
    pub decomposition: AtomicDecomposition,
    pub regularity: f64,
    pub scales: Vec<ScaleComparison>,
}

impl RegularDecomposition {
    /// Whether `P(Ī_{k,j}) <= R P(I_{k,j})` at every scale.
    pub fn covers_bounded(&self) -> bool {
        self.scales.iter().all(|s| s.cover_ratio <= self.regularity * (1.0 + ATOM_TOL))
    }

    /// Largest observed `‖χ_{τ_k<∞}‖ / ‖χ_{ϱ_k<∞}‖`.
    pub fn max_stopping_ratio(&self) -> f64 {
        self.scales.iter().filter_map(ScaleComparison::ratio).fold(0.0, f64::max)
    }
}

/// Decomposition of `H^M` (`kind = Maximal`) or `H^S` (`kind = Square`) on a
/// regular space. `ϱ_k` is the first passage of `|f_n|` (or `S_n f`) above
/// `2^k`; `I_{k,j} = {ϱ_k = j}` is enlarged to `Ī_{k,j}`, the union of the
/// parent atoms of its `F_j`-atoms, and `τ_k = inf{n : x ∈ Ī_{k,n+1}}`.
pub fn decompose_regular(f: &Martingale, p: &MixedExponent, t: f64, kind: AtomKind) -> Result<RegularDecomposition> {
    check_inputs(f, p, t)?;
    if t >= p.min().min(1.0) {
        return Err(Error::InvalidParameter(format!("t = {t} must be below min(1, p_min) = {}", p.min().min(1.0))));
    }
    let seq: Vec<RandomVariable> = match kind {
        AtomKind::Maximal => f.values().iter().map(RandomVariable::abs).collect(),
        AtomKind::Square => square_sequence(f),
        AtomKind::CondSquare => {
            return Err(Error::InvalidParameter("regular decomposition takes kind M or S".into()));
        }
    };
    let space = f.space();
    let regularity = regularity_constant(space)?;
    if !regularity.is_regular() {
        return Err(Error::InvalidSpace("filtration is not regular".into()));
    }
    let Some((lo, hi)) = scale_window(&seq) else {
        return Ok(RegularDecomposition {
            decomposition: AtomicDecomposition::empty(space, p.clone(), t),
            regularity: regularity.constant,
            scales: Vec::new(),
        });
    };

    let depth = space.depth();
    let mut taus = Vec::new();
    let mut scales = Vec::new();
    for k in lo..=hi + 1 {
        let rho = first_passage(&seq, threshold(k), 0)?;
        // marked[j][b]: F_{j-1}-atom b belongs to Ī_{k,j}.
        let mut marked = vec![Vec::new(); depth + 1];
        let mut cover_ratio = 0.0f64;
        for j in 1..=depth {
            let parents = space.table(j - 1);
            let mut mark = vec![false; parents.len()];
            let mut set_prob = 0.0;
            for (a, atom) in space.table(j).atoms().iter().enumerate() {
                if rho.raw(atom.points[0]) == j {
                    mark[regularity.cover[j][a]] = true;
                    set_prob += atom.prob;
                }
            }
            let cover_prob: f64 = parents.atoms().iter().zip(&mark).filter(|(_, &m)| m).map(|(b, _)| b.prob).sum();
            if set_prob > 0.0 {
                cover_ratio = cover_ratio.max(cover_prob / set_prob);
            }
            marked[j] = mark;
        }
        let levels = (0..space.len())
            .map(|x| (0..depth).find(|&n| marked[n + 1][space.table(n).atom_of(x)]).unwrap_or(depth + 1))
            .collect();
        let tau = StoppingTime::from_raw(levels, depth);

        let tau_chi = tau.finite_indicator(space);
        let rho_chi = rho.finite_indicator(space);
        if k <= hi {
            scales.push(ScaleComparison {
                k,
                tau_norm: mixed_norm(&tau_chi, p)?,
                rho_norm: mixed_norm(&rho_chi, p)?,
                cover_ratio,
            });
        }
        taus.push(tau);
    }
    let decomposition = assemble(f, p, t, kind, lo, taus)?;
    Ok(RegularDecomposition { decomposition, regularity: regularity.constant, scales })
}

/// Largest excess `lhs - rhs` of each pointwise certificate in the Davis
/// decomposition (nonpositive when the certificate holds).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DavisCertificates {
    /// `|d_k f| χ_{λ_k > 2λ_{k-1}} <= 2(λ_k - λ_{k-1})`.
    pub large_jump: f64,
    /// `|d_k f| χ_{λ_k <= 2λ_{k-1}} <= 2λ_{k-1}`.
    pub small_jump: f64,
    /// `|d_k g| <= 4λ_{k-1}`.
    pub g_jump: f64,
}

impl DavisCertificates {
    pub fn hold(&self, tol: f64) -> bool {
        self.large_jump <= tol && self.small_jump <= tol && self.g_jump <= tol
    }
}

#[derive(Debug, Clone)]
pub struct DavisDecomposition {
    pub h: Martingale,
    pub g: Martingale,
    pub certificates: DavisCertificates,
    /// `max_n ‖f_n - h_n - g_n‖_∞`.
    pub split_error: f64,
    /// `‖h‖_G = ‖Σ |d_n h|‖_p⃗`.
    pub h_variation: f64,
    /// Q-value of `g`.
    pub g_q_value: f64,
    /// `‖f‖_{H^S}`.
    pub f_square: f64,
}

/// Splits `f = h + g` with `h` carrying the differences where the envelope
/// more than doubles. The default envelope is `λ_n = S_n f`.
pub fn davis_decompose(
    f: &Martingale,
    p: &MixedExponent,
    lambda: Option<&AdaptedEnvelope>,
) -> Result<DavisDecomposition> {
    if p.dims() != f.space().dims() {
        return Err(Error::DimensionMismatch { expected: f.space().dims(), found: p.dims() });
    }
    let space = f.space();
    let squares = square_sequence(f);
    let default;
    let lambda = match lambda {
        Some(l) => l,
        None => {
            default = AdaptedEnvelope::new(squares.clone())?;
            &default
        }
    };
    if lambda.levels().len() != space.depth() + 1 || !lambda.level(0).same_space(&squares[0]) {
        return Err(Error::SpaceMismatch);
    }
    if lambda.level(0).sup_norm() > 0.0 {
        return Err(Error::InvalidEnvelope("λ_0 must vanish".into()));
    }
    for (n, s) in squares.iter().enumerate() {
        let l = lambda.level(n);
        if s.values().iter().zip(l.values()).any(|(a, b)| *a > b + ATOM_TOL * b.max(1.0)) {
            return Err(Error::InvalidEnvelope(format!("S_{n} f exceeds λ_{n}")));
        }
    }

    let mut h_diffs = vec![RandomVariable::zeros(space)];
    let mut g_diffs = vec![RandomVariable::zeros(space)];
    let mut cert =
        DavisCertificates { large_jump: f64::NEG_INFINITY, small_jump: f64::NEG_INFINITY, g_jump: f64::NEG_INFINITY };
    for k in 1..=space.depth() {
        let d = &f.diffs()[k];
        let (now, before) = (lambda.level(k), lambda.level(k - 1));
        let big = now.zip_with(before, |a, b| if a > 2.0 * b { 1.0 } else { 0.0 });
        let large = d.mul(&big);
        let small = d.sub(&large);
        let dh = large.sub(&cond_exp(&large, k - 1)?);
        let dg = small.sub(&cond_exp(&small, k - 1)?);
        for i in 0..space.len() {
            let (lk, lb) = (now.get(i), before.get(i));
            cert.large_jump = cert.large_jump.max(large.get(i).abs() - 2.0 * (lk - lb));
            cert.small_jump = cert.small_jump.max(small.get(i).abs() - 2.0 * lb);
            cert.g_jump = cert.g_jump.max(dg.get(i).abs() - 4.0 * lb);
        }
        h_diffs.push(dh);
        g_diffs.push(dg);
    }
    if space.depth() == 0 {
        cert = DavisCertificates { large_jump: 0.0, small_jump: 0.0, g_jump: 0.0 };
    }
    let h = Martingale::from_diffs_unchecked(space.clone(), h_diffs);
    let g = Martingale::from_diffs_unchecked(space.clone(), g_diffs);
    let split_error = h.add(&g).max_distance(f);
    Ok(DavisDecomposition {
        h_variation: g_value(&h, p)?,
        g_q_value: q_value(&g, p)?,
        f_square: mixed_norm(&square_function(f, None), p)?,
        h,
        g,
        certificates: cert,
        split_error,
    })
}

/// Whether an inequality is asserted exactly or only reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Assertion {
    /// Holds with constant 1 (or a known explicit constant).
    Exact,
    /// Holds with some unspecified constant.
    Empirical,
}

/// One row of the equivalence report: the observed range of `lhs / rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceRow {
    pub name: &'static str,
    /// Hypotheses on `p⃗` (and the basis) under which the inequality is claimed.
    pub regime: &'static str,
    pub in_regime: bool,
    pub assertion: Assertion,
    pub samples: usize,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Samples where an exact inequality failed beyond tolerance.
    pub violations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub p: MixedExponent,
    pub regularity: f64,
    pub rows: Vec<EquivalenceRow>,
}

impl EquivalenceReport {
    pub fn exact_violations(&self) -> usize {
        self.rows.iter().filter(|r| r.assertion == Assertion::Exact).map(|r| r.violations).sum()
    }

    pub fn row(&self, name: &str) -> Option<&EquivalenceRow> {
        self.rows.iter().find(|r| r.name == name)
    }
}

struct Pair {
    name: &'static str,
    regime: &'static str,
    in_regime: bool,
    assertion: Assertion,
    measure: fn(&HardyNormReport) -> (f64, f64),
}

/// Ranges of the ratios between the Hardy quasi-norms over `samples`.
///
/// Inequalities with constant 1 (`H^M <= P`, `H^S <= Q`) are checked at
/// tolerance `1e-9`; so is the pointwise `S_n f <= R^{1/2} s_n f` on the
/// regular basis. All other rows only record the observed ratio range.
pub fn equivalence_report(samples: &[Martingale], p: &MixedExponent) -> Result<EquivalenceReport> {
    let space = samples.first().ok_or_else(|| Error::InvalidParameter("no samples".into()))?.space().clone();
    let regularity = regularity_constant(&space)?.constant;
    let finite = p.is_finite();
    let below_two = finite && p.entries().iter().all(|&x| x < 2.0);
    let bdg = p.within(1.0, f64::INFINITY) && finite || p.is_vector_admissible();
    let regular = regularity.is_finite();
    let five = |r: &HardyNormReport| [r.maximal, r.square, r.cond_square, r.p_value, r.q_value];

    let pairs = [
        Pair {
            name: "HM<=c*Hs",
            regime: "p<2",
            in_regime: below_two,
            assertion: Assertion::Empirical,
            measure: |r| (r.maximal, r.cond_square),
        },
        Pair {
            name: "HS<=c*Hs",
            regime: "p<2",
            in_regime: below_two,
            assertion: Assertion::Empirical,
            measure: |r| (r.square, r.cond_square),
        },
        Pair {
            name: "HM<=P",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Exact,
            measure: |r| (r.maximal, r.p_value),
        },
        Pair {
            name: "HS<=Q",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Exact,
            measure: |r| (r.square, r.q_value),
        },
        Pair {
            name: "HS<=c*P",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.square, r.p_value),
        },
        Pair {
            name: "HM<=c*Q",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.maximal, r.q_value),
        },
        Pair {
            name: "P<=c*Q",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.p_value, r.q_value),
        },
        Pair {
            name: "Q<=c*P",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.q_value, r.p_value),
        },
        Pair {
            name: "Hs<=c*P",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.cond_square, r.p_value),
        },
        Pair {
            name: "Hs<=c*Q",
            regime: "0<p<inf",
            in_regime: finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.cond_square, r.q_value),
        },
        Pair {
            name: "Q<=c*HS",
            regime: "regular",
            in_regime: regular && finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.q_value, r.square),
        },
        Pair {
            name: "P<=c*HM",
            regime: "regular",
            in_regime: regular && finite,
            assertion: Assertion::Empirical,
            measure: |r| (r.p_value, r.maximal),
        },
        Pair {
            name: "HS<=c*HM",
            regime: "1<p<inf or leading ones",
            in_regime: bdg,
            assertion: Assertion::Empirical,
            measure: |r| (r.square, r.maximal),
        },
        Pair {
            name: "HM<=c*HS",
            regime: "1<p<inf or leading ones",
            in_regime: bdg,
            assertion: Assertion::Empirical,
            measure: |r| (r.maximal, r.square),
        },
    ];

    let reports: Vec<HardyNormReport> = samples.iter().map(|f| hardy_norms(f, p)).collect::<Result<_>>()?;
    let mut rows: Vec<EquivalenceRow> = pairs
        .iter()
        .map(|pair| {
            let mut row = new_row(pair.name, pair.regime, pair.in_regime, pair.assertion);
            for r in &reports {
                let (lhs, rhs) = (pair.measure)(r);
                record(&mut row, lhs, rhs);
            }
            row
        })
        .collect();

    let mut spread = new_row("max/min of five", "regular", regular && finite, Assertion::Empirical);
    for r in &reports {
        let v = five(r);
        record(&mut spread, v.iter().copied().fold(0.0, f64::max), v.iter().copied().fold(f64::INFINITY, f64::min));
    }
    rows.push(spread);

    let mut pointwise = new_row("S_n<=sqrt(R)*s_n pointwise", "regular", regular, Assertion::Exact);
    let root = regularity.sqrt();
    for f in samples {
        let (big, small) = (square_sequence(f), cond_square_sequence(f));
        let (lhs, rhs) = big
            .iter()
            .zip(&small)
            .flat_map(|(b, s)| b.values().iter().zip(s.values()).map(|(x, y)| (*x, root * y)).collect::<Vec<_>>())
            .fold((0.0f64, f64::INFINITY), |(worst, best), (x, y)| {
                if y > 0.0 {
                    (worst.max(x / y), best.min(x / y))
                } else {
                    (worst.max(if x > 0.0 { f64::INFINITY } else { 0.0 }), best)
                }
            });
        pointwise.samples += 1;
        pointwise.max_ratio = pointwise.max_ratio.max(lhs);
        pointwise.min_ratio = pointwise.min_ratio.min(rhs);
        if lhs > 1.0 + ATOM_TOL {
            pointwise.violations += 1;
        }
    }
    rows.push(pointwise);

    Ok(EquivalenceReport { p: p.clone(), regularity, rows })
}

fn new_row(name: &'static str, regime: &'static str, in_regime: bool, assertion: Assertion) -> EquivalenceRow {
    EquivalenceRow {
        name,
        regime,
        in_regime,
        assertion,
        samples: 0,
        min_ratio: f64::INFINITY,
        max_ratio: 0.0,
        violations: 0,
    }
}

fn record(row: &mut EquivalenceRow, lhs: f64, rhs: f64) {
    if lhs == 0.0 && rhs == 0.0 {
        return;
    }
    let ratio = if rhs > 0.0 { lhs / rhs } else { f64::INFINITY };
    row.samples += 1;
    row.min_ratio = row.min_ratio.min(ratio);
    row.max_ratio = row.max_ratio.max(ratio);
    if row.assertion == Assertion::Exact && lhs > rhs + ATOM_TOL * rhs.max(1.0) {
        row.violations += 1;
    }
}

/// `‖f‖_{H^s}`, the reference norm for `s`-decompositions.
pub fn cond_square_norm(f: &Martingale, p: &MixedExponent) -> Result<f64> {
    mixed_norm(&cond_square_function(f, None), p)
}

/// `‖f‖_{H^M}`.
pub fn maximal_norm(f: &Martingale, p: &MixedExponent) -> Result<f64> {
    mixed_norm(&maximal(f, None), p)
}
