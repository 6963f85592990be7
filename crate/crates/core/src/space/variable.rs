use std::sync::Arc;

use super::ProductFilteredSpace;
use crate::error::{Error, Result};

/// A real function on the product points of a space.
#[derive(Debug, Clone)]
pub struct RandomVariable {
    space: Arc<ProductFilteredSpace>,
    values: Vec<f64>,
}

impl RandomVariable {
    pub fn new(space: Arc<ProductFilteredSpace>, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::DimensionMismatch { expected: space.len(), found: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { space, values })
    }

    pub(crate) fn from_raw(space: Arc<ProductFilteredSpace>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), space.len());
        Self { space, values }
    }

    pub fn constant(space: &Arc<ProductFilteredSpace>, c: f64) -> Self {
        Self { space: space.clone(), values: vec![c; space.len()] }
    }

    pub fn zeros(space: &Arc<ProductFilteredSpace>) -> Self {
        Self::constant(space, 0.0)
    }

    /// Builds a variable from its value at each multi-index `(i_1, ..., i_d)`.
    pub fn from_fn(space: &Arc<ProductFilteredSpace>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let values = (0..space.len()).map(|idx| f(&space.multi_index(idx))).collect();
        Self::new(space.clone(), values)
    }

    /// `χ_A` for `A = {idx : pred(idx)}`.
    pub fn indicator(space: &Arc<ProductFilteredSpace>, mut pred: impl FnMut(usize) -> bool) -> Self {
        let values = (0..space.len()).map(|idx| if pred(idx) { 1.0 } else { 0.0 }).collect();
        Self { space: space.clone(), values }
    }

    pub fn space(&self) -> &Arc<ProductFilteredSpace> {
        &self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn same_space(&self, other: &RandomVariable) -> bool {
        Arc::ptr_eq(&self.space, &other.space) || self.space.same_as(&other.space)
    }

    pub fn check_same_space(&self, other: &RandomVariable) -> Result<()> {
        if self.same_space(other) {
            Ok(())
        } else {
            Err(Error::SpaceMismatch)
        }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self { space: self.space.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    /// Pointwise combination; panics if the spaces differ.
    pub fn zip_with(&self, other: &RandomVariable, f: impl Fn(f64, f64) -> f64) -> Self {
        assert!(self.same_space(other), "random variables on different spaces");
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Self { space: self.space.clone(), values }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| c * v)
    }

    pub fn add(&self, other: &RandomVariable) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RandomVariable) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &RandomVariable) -> Self {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn max(&self, other: &RandomVariable) -> Self {
        self.zip_with(other, f64::max)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `max |f|`.
    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn expectation(&self) -> f64 {
        self.values.iter().zip(self.space.point_probs()).map(|(v, p)| v * p).sum()
    }

    /// Largest pointwise distance to `other`.
    pub fn max_abs_diff(&self, other: &RandomVariable) -> f64 {
        assert!(self.same_space(other), "random variables on different spaces");
        self.values.iter().zip(&other.values).fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Whether the variable is constant (within `tol`) on every atom of `F_n`.
    pub fn is_measurable(&self, n: usize, tol: f64) -> bool {
        if n > self.space.depth() {
            return false;
        }
        self.space.table(n).atoms().iter().all(|atom| {
            let first = self.values[atom.points[0]];
            atom.points.iter().all(|&p| (self.values[p] - first).abs() <= tol)
        })
    }
}

/// A strictly positive random variable used as a density.
#[derive(Debug, Clone)]
pub struct Weight(RandomVariable);

impl Weight {
    pub fn new(w: RandomVariable) -> Result<Self> {
        match w.values().iter().position(|&v| v <= 0.0) {
            Some(i) => Err(Error::InvalidWeight(format!("value {} at point {i} is not positive", w.get(i)))),
            None => Ok(Self(w)),
        }
    }

    pub fn variable(&self) -> &RandomVariable {
        &self.0
    }

    pub fn into_inner(self) -> RandomVariable {
        self.0
    }
}

impl AsRef<RandomVariable> for Weight {
    fn as_ref(&self) -> &RandomVariable {
        &self.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::make_dyadic_space;

    #[test]
    fn rejects_shape_and_nan() {
        let s = make_dyadic_space(2, 1).unwrap();
        assert!(matches!(RandomVariable::new(s.clone(), vec![0.0; 3]), Err(Error::DimensionMismatch { .. })));
        assert!(matches!(RandomVariable::new(s, vec![0.0, f64::NAN, 0.0, 0.0]), Err(Error::NonFinite(1))));
    }

    #[test]
    fn layout_is_first_coordinate_fastest() {
        let s = make_dyadic_space(2, 1).unwrap();
        let f = RandomVariable::from_fn(&s, |m| (m[0] + 10 * m[1]) as f64).unwrap();
        assert_eq!(f.values(), &[0.0, 1.0, 10.0, 11.0]);
    }

    #[test]
    fn weight_must_be_positive() {
        let s = make_dyadic_space(1, 1).unwrap();
        assert!(Weight::new(RandomVariable::new(s.clone(), vec![1.0, 0.0]).unwrap()).is_err());
        assert!(Weight::new(RandomVariable::new(s, vec![1.0, 0.5]).unwrap()).is_ok());
    }

    #[test]
    fn measurability() {
        let s = make_dyadic_space(1, 2).unwrap();
        let f = RandomVariable::new(s, vec![1.0, 1.0, 2.0, 2.0]).unwrap();
        assert!(f.is_measurable(1, 0.0));
        assert!(!f.is_measurable(0, 0.0));
        assert!(f.is_measurable(2, 0.0));
    }
}
