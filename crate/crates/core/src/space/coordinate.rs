use crate::error::{Error, Result};

/// Tolerance on the total mass of a coordinate space.
pub const MASS_TOL: f64 = 1e-12;

/// One factor of a product space: finitely many weighted points together with
/// a refining sequence of partitions `P_0, ..., P_N` whose last element
/// separates points.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinateSpace {
    points: Vec<f64>,
    probs: Vec<f64>,
    partitions: Vec<Vec<Vec<usize>>>,
    cell_of: Vec<Vec<usize>>,
    cell_probs: Vec<Vec<f64>>,
}

impl CoordinateSpace {
    /// Builds a coordinate space from sample-point labels, weights and the
    /// partition sequence (each partition a list of cells, each cell a list of
    /// point indices).
    pub fn new(points: Vec<f64>, probs: Vec<f64>, partitions: Vec<Vec<Vec<usize>>>) -> Result<Self> {
        let size = probs.len();
        if size == 0 {
            return Err(Error::InvalidSpace("coordinate has no points".into()));
        }
        if points.len() != size {
            return Err(Error::InvalidSpace(format!("{} point labels for {} weights", points.len(), size)));
        }
        if let Some(i) = probs.iter().position(|&w| !(w.is_finite() && w > 0.0)) {
            return Err(Error::InvalidSpace(format!("weight {} at point {i} is not positive", probs[i])));
        }
        let mass: f64 = probs.iter().sum();
        if (mass - 1.0).abs() > MASS_TOL {
            return Err(Error::InvalidSpace(format!("weights sum to {mass}, not 1")));
        }
        if partitions.is_empty() {
            return Err(Error::InvalidSpace("filtration has no levels".into()));
        }

        let mut cell_of = Vec::with_capacity(partitions.len());
        let mut cell_probs = Vec::with_capacity(partitions.len());
        let mut partitions = partitions;
        for (level, cells) in partitions.iter_mut().enumerate() {
            let mut labels = vec![usize::MAX; size];
            for (c, cell) in cells.iter_mut().enumerate() {
                if cell.is_empty() {
                    return Err(Error::InvalidSpace(format!("empty cell {c} at level {level}")));
                }
                cell.sort_unstable();
                for &i in cell.iter() {
                    if i >= size {
                        return Err(Error::InvalidSpace(format!("point {i} out of range at level {level}")));
                    }
                    if labels[i] != usize::MAX {
                        return Err(Error::InvalidSpace(format!("point {i} appears twice at level {level}")));
                    }
                    labels[i] = c;
                }
            }
            if let Some(i) = labels.iter().position(|&l| l == usize::MAX) {
                return Err(Error::InvalidSpace(format!("point {i} not covered at level {level}")));
            }
            cell_probs.push(cells.iter().map(|cell| cell.iter().map(|&i| probs[i]).sum()).collect());
            cell_of.push(labels);
        }

        for level in 1..partitions.len() {
            for (c, cell) in partitions[level].iter().enumerate() {
                let parent = cell_of[level - 1][cell[0]];
                if cell.iter().any(|&i| cell_of[level - 1][i] != parent) {
                    return Err(Error::InvalidSpace(format!(
                        "cell {c} at level {level} does not refine level {}",
                        level - 1
                    )));
                }
            }
        }
        if partitions.last().unwrap().len() != size {
            return Err(Error::InvalidSpace("terminal partition does not separate points".into()));
        }

        Ok(Self { points, probs, partitions, cell_of, cell_probs })
    }

    /// `[0,1)` sampled at `2^depth` points; level `n` cells are the dyadic
    /// intervals of length `2^-n`.
    pub fn dyadic(depth: usize) -> Result<Self> {
        if depth == 0 {
            return Err(Error::InvalidSpace("dyadic depth must be at least 1".into()));
        }
        if depth > 24 {
            return Err(Error::InvalidSpace(format!("dyadic depth {depth} too large")));
        }
        let size = 1usize << depth;
        let points = (0..size).map(|i| i as f64 / size as f64).collect();
        let probs = vec![1.0 / size as f64; size];
        let partitions = (0..=depth)
            .map(|n| {
                let width = size >> n;
                (0..(1usize << n)).map(|c| (c * width..(c + 1) * width).collect()).collect()
            })
            .collect();
        Self::new(points, probs, partitions)
    }

    /// Lumped dyadic space of depth `n`: point `k-1` stands for the band
    /// `[2^-k, 2^-k+1)` (`k = 1..=n`) and point `n` for `[0, 2^-n)`.
    ///
    /// At level `m` the bands `1..=m` are singleton cells and everything below
    /// `2^-m` forms one cell, which is the image of the dyadic filtration on
    /// band-measurable sets.
    pub fn dyadic_shell(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpace("shell depth must be at least 1".into()));
        }
        let mut probs: Vec<f64> = (1..=n).map(|k| 0.5f64.powi(k as i32)).collect();
        probs.push(0.5f64.powi(n as i32));
        let mut points: Vec<f64> = (1..=n).map(|k| 0.5f64.powi(k as i32)).collect();
        points.push(0.0);
        let partitions = (0..=n)
            .map(|m| {
                let mut cells: Vec<Vec<usize>> = (0..m).map(|b| vec![b]).collect();
                cells.push((m..=n).collect());
                cells
            })
            .collect();
        Self::new(points, probs, partitions)
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Filtration depth `N` (index of the terminal partition).
    pub fn depth(&self) -> usize {
        self.partitions.len() - 1
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn cells(&self, level: usize) -> &[Vec<usize>] {
        &self.partitions[level]
    }

    pub fn partitions(&self) -> &[Vec<Vec<usize>>] {
        &self.partitions
    }

    pub fn cell_of(&self, level: usize, point: usize) -> usize {
        self.cell_of[level][point]
    }

    pub fn cell_prob(&self, level: usize, cell: usize) -> f64 {
        self.cell_probs[level][cell]
    }
}
