//! Finite filtered product probability spaces.
//!
//! A [`ProductFilteredSpace`] is the product of `d` [`CoordinateSpace`]s that
//! share a filtration depth `N`. Product points are stored with the first
//! coordinate varying fastest, so a value grid is laid out as
//! `values[i_1 + n_1 * (i_2 + n_2 * (...))]`. This is the order in which mixed
//! norms integrate (innermost `x_1`).
//!
//! Atom tables for every `F_n` and for every partial σ-algebra
//! `F_{∞,..,m,..,∞}` are built eagerly; the space is immutable afterwards.

mod coordinate;
mod variable;

use std::sync::Arc;

pub use coordinate::{CoordinateSpace, MASS_TOL};
pub use variable::{RandomVariable, Weight};

use crate::error::{Error, Result};

/// One atom of a finite σ-algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterAtom {
    pub points: Vec<usize>,
    pub prob: f64,
}

/// Atoms of one σ-algebra plus the point → atom lookup.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomTable {
    atom_of: Vec<usize>,
    atoms: Vec<FilterAtom>,
}

impl AtomTable {
    pub fn atoms(&self) -> &[FilterAtom] {
        &self.atoms
    }

    pub fn atom_of(&self, point: usize) -> usize {
        self.atom_of[point]
    }

    pub fn labels(&self) -> &[usize] {
        &self.atom_of
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductFilteredSpace {
    coords: Vec<CoordinateSpace>,
    shape: Vec<usize>,
    strides: Vec<usize>,
    point_probs: Vec<f64>,
    levels: Vec<AtomTable>,
    partial: Vec<Vec<AtomTable>>,
}

impl ProductFilteredSpace {
    pub fn new(coords: Vec<CoordinateSpace>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::InvalidSpace("product of zero coordinates".into()));
        }
        let depth = coords[0].depth();
        if let Some(k) = coords.iter().position(|c| c.depth() != depth) {
            return Err(Error::InvalidSpace(format!(
                "coordinate {} has depth {}, expected {depth}",
                k + 1,
                coords[k].depth()
            )));
        }
        let shape: Vec<usize> = coords.iter().map(CoordinateSpace::len).collect();
        let total = shape
            .iter()
            .try_fold(1usize, |acc, &n| acc.checked_mul(n))
            .filter(|&t| t <= 1 << 26)
            .ok_or_else(|| Error::InvalidSpace("product space too large".into()))?;
        let mut strides = Vec::with_capacity(shape.len());
        let mut s = 1;
        for &n in &shape {
            strides.push(s);
            s *= n;
        }

        let mut point_probs = vec![1.0; total];
        for (idx, p) in point_probs.iter_mut().enumerate() {
            for (k, c) in coords.iter().enumerate() {
                *p *= c.probs()[(idx / strides[k]) % shape[k]];
            }
        }

        let mut space = Self { coords, shape, strides, point_probs, levels: Vec::new(), partial: Vec::new() };
        space.levels = (0..=depth).map(|n| space.build_table(|_| Some(n))).collect();
        space.partial = (0..space.dims())
            .map(|k| (0..=depth).map(|m| space.build_table(|j| if j == k { Some(m) } else { None })).collect())
            .collect();
        Ok(space)
    }

    /// Builds the atom table of the product σ-algebra whose coordinate-`j`
    /// factor is the level `level(j)` partition, or singletons when `None`.
    fn build_table(&self, level: impl Fn(usize) -> Option<usize>) -> AtomTable {
        let radices: Vec<usize> = (0..self.dims())
            .map(|j| match level(j) {
                Some(n) => self.coords[j].cells(n).len(),
                None => self.shape[j],
            })
            .collect();
        let mut atom_of = vec![0; self.len()];
        for (idx, a) in atom_of.iter_mut().enumerate() {
            let mut id = 0;
            for j in (0..self.dims()).rev() {
                let i = self.coord_index(idx, j);
                let label = match level(j) {
                    Some(n) => self.coords[j].cell_of(n, i),
                    None => i,
                };
                id = id * radices[j] + label;
            }
            *a = id;
        }
        let count: usize = radices.iter().product();
        let mut atoms: Vec<FilterAtom> = (0..count).map(|_| FilterAtom { points: Vec::new(), prob: 1.0 }).collect();
        for (idx, &a) in atom_of.iter().enumerate() {
            atoms[a].points.push(idx);
        }
        for atom in &mut atoms {
            let first = atom.points[0];
            atom.prob = (0..self.dims())
                .map(|j| {
                    let i = self.coord_index(first, j);
                    match level(j) {
                        Some(n) => self.coords[j].cell_prob(n, self.coords[j].cell_of(n, i)),
                        None => self.coords[j].probs()[i],
                    }
                })
                .product();
        }
        AtomTable { atom_of, atoms }
    }

    pub fn dims(&self) -> usize {
        self.coords.len()
    }

    pub fn depth(&self) -> usize {
        self.coords[0].depth()
    }

    /// Number of product points.
    pub fn len(&self) -> usize {
        self.point_probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.point_probs.is_empty()
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn strides(&self) -> &[usize] {
        &self.strides
    }

    pub fn coords(&self) -> &[CoordinateSpace] {
        &self.coords
    }

    pub fn coord(&self, k: usize) -> &CoordinateSpace {
        &self.coords[k]
    }

    pub fn point_probs(&self) -> &[f64] {
        &self.point_probs
    }

    /// Index of product point `idx` along coordinate `k` (0-based).
    pub fn coord_index(&self, idx: usize, k: usize) -> usize {
        (idx / self.strides[k]) % self.shape[k]
    }

    pub fn multi_index(&self, idx: usize) -> Vec<usize> {
        (0..self.dims()).map(|k| self.coord_index(idx, k)).collect()
    }

    pub fn flat_index(&self, multi: &[usize]) -> usize {
        multi.iter().zip(&self.strides).map(|(i, s)| i * s).sum()
    }

    pub fn check_level(&self, level: usize) -> Result<()> {
        if level > self.depth() {
            return Err(Error::LevelOutOfRange { level, depth: self.depth() });
        }
        Ok(())
    }

    /// Atom table of `F_n`.
    pub fn level(&self, n: usize) -> Result<&AtomTable> {
        self.check_level(n)?;
        Ok(&self.levels[n])
    }

    /// Atom table of the partial σ-algebra with level `m` in coordinate `k`
    /// (0-based) and full resolution elsewhere.
    pub fn partial_level(&self, k: usize, m: usize) -> Result<&AtomTable> {
        if k >= self.dims() {
            return Err(Error::CoordinateOutOfRange { coord: k, dims: self.dims() });
        }
        self.check_level(m)?;
        Ok(&self.partial[k][m])
    }

    pub(crate) fn table(&self, n: usize) -> &AtomTable {
        &self.levels[n]
    }

    pub fn same_as(&self, other: &ProductFilteredSpace) -> bool {
        std::ptr::eq(self, other) || (self.shape == other.shape && self.coords == other.coords)
    }
}

/// The canonical regular test space: `d` copies of the dyadic coordinate of
/// depth `n`.
pub fn make_dyadic_space(d: usize, n: usize) -> Result<Arc<ProductFilteredSpace>> {
    if d == 0 {
        return Err(Error::InvalidSpace("dyadic space needs at least one coordinate".into()));
    }
    let coord = CoordinateSpace::dyadic(n)?;
    Ok(Arc::new(ProductFilteredSpace::new(vec![coord; d])?))
}

/// Atoms of `F_n`.
pub fn atoms_of(space: &ProductFilteredSpace, n: usize) -> Result<&[FilterAtom]> {
    Ok(space.level(n)?.atoms())
}

/// Regularity constant together with the cover map that witnesses it.
#[derive(Debug, Clone)]
pub struct Regularity {
    pub constant: f64,
    /// `cover[n][a]` is the `F_{n-1}`-atom containing `F_n`-atom `a`
    /// (`cover[0]` is empty).
    pub cover: Vec<Vec<usize>>,
}

impl Regularity {
    pub fn is_regular(&self) -> bool {
        self.constant.is_finite()
    }
}

/// Smallest `R` with `P(B) <= R P(A)` where `B` is the level `n-1` cover of
/// the level `n` atom `A`.
///
/// The smallest `F_{n-1}`-set containing an `F_n`-atom is its parent atom, so
/// the search only visits atoms.
pub fn regularity_constant(space: &ProductFilteredSpace) -> Result<Regularity> {
    if space.depth() == 0 {
        return Err(Error::InvalidSpace("regularity needs filtration depth at least 1".into()));
    }
    let mut constant: f64 = 1.0;
    let mut cover = vec![Vec::new()];
    for n in 1..=space.depth() {
        let parents = space.table(n - 1);
        let map: Vec<usize> = space
            .table(n)
            .atoms()
            .iter()
            .map(|a| {
                let b = parents.atom_of(a.points[0]);
                constant = constant.max(parents.atoms()[b].prob / a.prob);
                b
            })
            .collect();
        cover.push(map);
    }
    Ok(Regularity { constant, cover })
}
