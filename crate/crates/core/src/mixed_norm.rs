//! Mixed `L_p⃗` quasi-norms.
//!
//! The norm is iterated: the `L_{p_1}` norm in `x_1` is taken first, then the
//! `L_{p_2}` norm of the result in `x_2`, and so on up to `x_d`. An infinite
//! entry takes the maximum over that coordinate (all weights are positive, so
//! the essential supremum is a plain maximum). Entries below one use the same
//! power formula and give a quasi-norm.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::space::{RandomVariable, Weight};

/// Exponent vector `p⃗ ∈ (0, ∞]^d`.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedExponent(Vec<f64>);

impl MixedExponent {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidExponent("empty exponent vector".into()));
        }
        if let Some(p) = entries.iter().find(|p| p.is_nan() || **p <= 0.0) {
            return Err(Error::InvalidExponent(format!("entry {p} is not in (0, inf]")));
        }
        Ok(Self(entries))
    }

    pub fn uniform(p: f64, d: usize) -> Result<Self> {
        Self::new(vec![p; d])
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn dims(&self) -> usize {
        self.0.len()
    }

    pub fn min(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|p| p.is_finite())
    }

    /// Whether every entry lies in the open interval `(lo, hi)`.
    pub fn within(&self, lo: f64, hi: f64) -> bool {
        self.0.iter().all(|&p| p > lo && p < hi)
    }

    /// `p⃗'` with `1/p_i + 1/p_i' = 1`; requires every `p_i >= 1`.
    pub fn conjugate(&self) -> Result<Self> {
        let entries = self
            .0
            .iter()
            .map(|&p| {
                if p < 1.0 {
                    Err(Error::InvalidExponent(format!("conjugate undefined for entry {p} < 1")))
                } else if p == 1.0 {
                    Ok(f64::INFINITY)
                } else if p.is_infinite() {
                    Ok(1.0)
                } else {
                    Ok(p / (p - 1.0))
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self(entries))
    }

    /// `p⃗ / α`.
    pub fn divide(&self, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidExponent(format!("cannot divide by {alpha}")));
        }
        Self::new(self.0.iter().map(|p| p / alpha).collect())
    }

    /// Leading infinite entries followed by entries in `(1, ∞)`; this covers
    /// `1 < p⃗ < ∞` (no infinite entries) as well.
    pub fn is_doob_admissible(&self) -> bool {
        let lead = self.0.iter().take_while(|p| p.is_infinite()).count();
        self.0[lead..].iter().all(|&p| p > 1.0 && p.is_finite())
    }

    /// Leading entries equal to one followed by entries in `(1, ∞)`.
    pub fn is_vector_admissible(&self) -> bool {
        let lead = self.0.iter().take_while(|&&p| p == 1.0).count();
        self.0[lead..].iter().all(|&p| p > 1.0 && p.is_finite())
    }

    /// Product of the scalar Doob constants `p_i / (p_i - 1)`.
    pub fn doob_constant(&self) -> f64 {
        self.0.iter().map(|&p| if p.is_infinite() { 1.0 } else { p / (p - 1.0) }).product()
    }
}

impl fmt::Display for MixedExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().map(|p| if p.is_infinite() { "inf".into() } else { p.to_string() }).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl FromStr for MixedExponent {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let trimmed = s.trim().trim_start_matches('(').trim_end_matches(')');
        let entries = trimmed
            .split(',')
            .map(|part| match part.trim() {
                "inf" | "infinity" | "∞" => Ok(f64::INFINITY),
                other => other.parse::<f64>().map_err(|_| Error::InvalidExponent(format!("cannot parse '{other}'"))),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }
}

/// Reduces the fastest axis of `values` (chunks of `weights.len()`) with the
/// weighted `L_p` norm.
pub(crate) fn reduce_axis(values: &[f64], weights: &[f64], p: f64) -> Vec<f64> {
    values
        .chunks(weights.len())
        .map(|chunk| {
            if p.is_infinite() {
                chunk.iter().fold(0.0f64, |m, v| m.max(v.abs()))
            } else {
                let sum: f64 = chunk.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum();
                sum.powf(1.0 / p)
            }
        })
        .collect()
}

fn check_dims(f: &RandomVariable, p: &MixedExponent) -> Result<()> {
    let d = f.space().dims();
    if p.dims() != d {
        return Err(Error::DimensionMismatch { expected: d, found: p.dims() });
    }
    Ok(())
}

/// Successive reductions `F_0 = |f|, F_1, ..., F_d` where `F_k` is the
/// `(p_1, ..., p_k)` norm over the first `k` coordinates.
fn reduction_chain(f: &RandomVariable, p: &MixedExponent) -> Vec<Vec<f64>> {
    let space = f.space();
    let mut chain = Vec::with_capacity(p.dims() + 1);
    chain.push(f.values().iter().map(|v| v.abs()).collect::<Vec<_>>());
    for (k, &pk) in p.entries().iter().enumerate() {
        let next = reduce_axis(chain.last().unwrap(), space.coord(k).probs(), pk);
        chain.push(next);
    }
    chain
}

/// `‖f‖_p⃗`.
pub fn mixed_norm(f: &RandomVariable, p: &MixedExponent) -> Result<f64> {
    check_dims(f, p)?;
    let space = f.space();
    let mut current: Vec<f64> = f.values().to_vec();
    for (k, &pk) in p.entries().iter().enumerate() {
        current = reduce_axis(&current, space.coord(k).probs(), pk);
    }
    Ok(current[0])
}

/// `E[f g]`.
pub fn pairing(f: &RandomVariable, g: &RandomVariable) -> Result<f64> {
    f.check_same_space(g)?;
    Ok(f.values().iter().zip(g.values()).zip(f.space().point_probs()).map(|((a, b), w)| a * b * w).sum())
}

/// A `g` with `‖g‖_p⃗' <= 1` and `E[f g] = ‖f‖_p⃗`.
///
/// Built coordinate by coordinate: along a finite coordinate the factor is
/// `(F_{k-1} / F_k)^{p_k - 1}`, along an infinite one it is a point mass on
/// the first maximising slice.
pub fn dual_extremal(f: &RandomVariable, p: &MixedExponent) -> Result<RandomVariable> {
    check_dims(f, p)?;
    if p.min() < 1.0 {
        return Err(Error::InvalidExponent(format!("duality needs p >= 1, got {p}")));
    }
    let space = f.space();
    let chain = reduction_chain(f, p);
    if chain[p.dims()][0] == 0.0 {
        return Ok(RandomVariable::zeros(space));
    }

    let mut factors: Vec<Vec<f64>> = Vec::with_capacity(p.dims());
    for (k, &pk) in p.entries().iter().enumerate() {
        let weights = space.coord(k).probs();
        let n = weights.len();
        let inner = &chain[k];
        let outer = &chain[k + 1];
        let mut h = vec![0.0; inner.len()];
        for (c, &norm) in outer.iter().enumerate() {
            if norm == 0.0 {
                continue;
            }
            let slice = &inner[c * n..(c + 1) * n];
            let out = &mut h[c * n..(c + 1) * n];
            if pk.is_infinite() {
                let best = slice.iter().position(|&v| v == norm).unwrap_or(0);
                out[best] = 1.0 / weights[best];
            } else {
                for (o, &v) in out.iter_mut().zip(slice) {
                    *o = (v / norm).powf(pk - 1.0);
                }
            }
        }
        factors.push(h);
    }

    let strides = space.strides();
    let values = f
        .values()
        .iter()
        .enumerate()
        .map(|(idx, &v)| {
            if v == 0.0 {
                return 0.0;
            }
            let mag: f64 = factors.iter().enumerate().map(|(k, h)| h[idx / strides[k]]).product();
            v.signum() * mag
        })
        .collect();
    RandomVariable::new(space.clone(), values)
}

/// `(E |f|^r w)^{1/r}`.
pub fn weighted_norm(f: &RandomVariable, r: f64, w: &Weight) -> Result<f64> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!("weighted norm exponent {r} must be finite and positive")));
    }
    f.check_same_space(w.variable())?;
    let sum: f64 = f
        .values()
        .iter()
        .zip(w.variable().values())
        .zip(f.space().point_probs())
        .map(|((v, wt), pr)| v.abs().powf(r) * wt * pr)
        .sum();
    Ok(sum.powf(1.0 / r))
}
