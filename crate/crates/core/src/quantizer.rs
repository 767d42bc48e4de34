//! Tail-bin uniform quantizers and nested grid pairs.
//!
//! A [`Grid`] with parameters (α, β, N) has representatives
//! `r_0 = α < r_1 < … < r_{N−2} = β < r_{N−1}` with equal inner spacing
//! `(β − α)/(N − 2)` and bins
//!
//! ```text
//! bin 0        (−∞, α]
//! bin j        (r_{j−1}, r_j]      1 ≤ j ≤ N − 2
//! bin N − 1    (β, +∞)
//! ```
//!
//! Bin indices are zero-based throughout the crate. Every boundary is right-closed.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    alpha: f64,
    beta: f64,
    bin_count: usize,
    representatives: Vec<f64>,
}

impl Grid {
    /// Builds a grid. The upper tail representative is fixed at `β + step`.
    pub fn new(alpha: f64, beta: f64, bin_count: usize) -> Result<Self> {
        if !alpha.is_finite() || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "grid edges must be finite, got ({alpha}, {beta})"
            )));
        }
        if alpha >= beta {
            return Err(Error::InvalidParameter(format!(
                "grid requires alpha < beta, got ({alpha}, {beta})"
            )));
        }
        if bin_count < 3 {
            return Err(Error::InvalidParameter(format!(
                "grid requires at least 3 bins, got {bin_count}"
            )));
        }
        let mut grid = Grid {
            alpha,
            beta,
            bin_count,
            representatives: Vec::new(),
        };
        let inner = grid.inner_bins();
        let mut reps: Vec<f64> = (0..=inner).map(|j| grid.edge(j)).collect();
        reps.push(beta + grid.step());
        grid.representatives = reps;
        Ok(grid)
    }

    /// Symmetric grid on [−range, range].
    pub fn symmetric(range: f64, bin_count: usize) -> Result<Self> {
        Self::new(-range, range, bin_count)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn bin_count(&self) -> usize {
        self.bin_count
    }

    /// Number of finite-width bins, `bin_count − 2`.
    pub fn inner_bins(&self) -> usize {
        self.bin_count - 2
    }

    pub fn step(&self) -> f64 {
        (self.beta - self.alpha) / self.inner_bins() as f64
    }

    pub fn representatives(&self) -> &[f64] {
        &self.representatives
    }

    pub fn representative(&self, bin: usize) -> f64 {
        self.representatives[bin]
    }

    /// Inner edge `r_j`, 0 ≤ j ≤ N − 2. Grids sharing (α, β) whose inner counts divide
    /// one another produce bit-identical shared edges, since `j/inner` is a correctly
    /// rounded quotient of integers.
    pub fn edge(&self, j: usize) -> f64 {
        let inner = self.inner_bins();
        debug_assert!(j <= inner);
        if j == inner {
            self.beta
        } else {
            self.alpha + (self.beta - self.alpha) * (j as f64 / inner as f64)
        }
    }

    /// The `N − 1` inner edges α = r_0 < … < r_{N−2} = β.
    pub fn inner_edges(&self) -> Vec<f64> {
        self.representatives[..self.bin_count - 1].to_vec()
    }

    /// Interval `(lo, hi]` covered by `bin`; tails use ±∞.
    pub fn bin_interval(&self, bin: usize) -> (f64, f64) {
        let last = self.bin_count - 1;
        match bin {
            0 => (f64::NEG_INFINITY, self.alpha),
            b if b == last => (self.beta, f64::INFINITY),
            b => (self.edge(b - 1), self.edge(b)),
        }
    }

    pub fn contains(&self, bin: usize, value: f64) -> bool {
        let (lo, hi) = self.bin_interval(bin);
        if bin == self.bin_count - 1 {
            value > lo
        } else {
            value > lo && value <= hi
        }
    }

    /// Zero-based index of the bin holding `value`.
    pub fn quantize(&self, value: f64) -> Result<usize> {
        if !value.is_finite() {
            return Err(Error::NonFinite(value));
        }
        Ok(self.quantize_finite(value))
    }

    #[inline]
    fn quantize_finite(&self, value: f64) -> usize {
        if value <= self.alpha {
            return 0;
        }
        if value > self.beta {
            return self.bin_count - 1;
        }
        let inner = self.inner_bins();
        let scaled = (value - self.alpha) / (self.beta - self.alpha) * inner as f64;
        let mut j = (scaled.ceil() as usize).clamp(1, inner);
        while j > 1 && value <= self.edge(j - 1) {
            j -= 1;
        }
        while j < inner && value > self.edge(j) {
            j += 1;
        }
        j
    }

    pub fn quantize_all(&self, values: &[f64]) -> Result<Vec<usize>> {
        values.iter().map(|&v| self.quantize(v)).collect()
    }
}

/// A fine grid (for U) whose every bin lies inside exactly one bin of the coarse grid (for V).
#[derive(Debug, Clone, PartialEq)]
pub struct NestedGridPair {
    fine: Grid,
    coarse: Grid,
    fine_to_coarse: Vec<usize>,
}

impl NestedGridPair {
    /// Validates the ⊆-or-disjoint relation between every fine and coarse bin.
    pub fn new(fine: Grid, coarse: Grid) -> Result<Self> {
        let mut fine_to_coarse = Vec::with_capacity(fine.bin_count());
        for i in 0..fine.bin_count() {
            let (a, b) = fine.bin_interval(i);
            let mut owner = None;
            for j in 0..coarse.bin_count() {
                let (c, d) = coarse.bin_interval(j);
                let inside = a >= c && b <= d;
                let disjoint = b <= c || a >= d;
                if inside {
                    owner = Some(j);
                } else if !disjoint {
                    return Err(Error::InvalidParameter(format!(
                        "fine bin {i} ({a}, {b}] straddles coarse bin {j} ({c}, {d}]"
                    )));
                }
            }
            match owner {
                Some(j) => fine_to_coarse.push(j),
                None => {
                    return Err(Error::InvalidParameter(format!(
                        "fine bin {i} is not contained in any coarse bin"
                    )))
                }
            }
        }
        Ok(Self {
            fine,
            coarse,
            fine_to_coarse,
        })
    }

    pub fn fine(&self) -> &Grid {
        &self.fine
    }

    pub fn coarse(&self) -> &Grid {
        &self.coarse
    }

    /// Coarse bin containing fine bin `i`.
    pub fn owner(&self, fine_bin: usize) -> usize {
        self.fine_to_coarse[fine_bin]
    }
}

/// Aligned pair on [−range, range]: the fine grid splits each coarse inner bin into
/// `refinement` equal parts.
pub fn build_nested_pair(range: f64, coarse_bins: usize, refinement: usize) -> Result<NestedGridPair> {
    if !(range.is_finite() && range > 0.0) {
        return Err(Error::InvalidParameter(format!("range must be positive, got {range}")));
    }
    if refinement == 0 {
        return Err(Error::InvalidParameter("refinement must be at least 1".into()));
    }
    let coarse = Grid::symmetric(range, coarse_bins)?;
    let fine = Grid::symmetric(range, (coarse_bins - 2) * refinement + 2)?;
    NestedGridPair::new(fine, coarse)
}

/// 0/1 matrix with entry (i, j) = 1 iff fine bin i ⊆ coarse bin j; stored row-wise one-hot.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestingMatrix {
    columns: Vec<usize>,
    cols: usize,
}

impl NestingMatrix {
    pub fn rows(&self) -> usize {
        self.columns.len()
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        if self.columns[i] == j {
            1.0
        } else {
            0.0
        }
    }

    /// Column of the single 1 in row `i`.
    pub fn column_of(&self, i: usize) -> usize {
        self.columns[i]
    }

    pub fn to_dense(&self) -> ndarray::Array2<f64> {
        ndarray::Array2::from_shape_fn((self.rows(), self.cols), |(i, j)| self.entry(i, j))
    }
}

pub fn nesting_matrix(pair: &NestedGridPair) -> NestingMatrix {
    NestingMatrix {
        columns: pair.fine_to_coarse.clone(),
        cols: pair.coarse.bin_count(),
    }
}

/// Grid parameters for (U, V, Y, X) driven by the U-grid bin count n′:
/// `β1 = √n′`, `n_v² = √n′`, `β2 = √n_v`, `n_y² = √n_v`, `β3 = √n_y`; every grid is
/// symmetric and the X-grid mirrors the Y-grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSchedule {
    pub n_u: usize,
    pub beta_u: f64,
    pub n_v: usize,
    pub beta_v: f64,
    pub n_y: usize,
    pub beta_y: f64,
    pub n_x: usize,
    pub beta_x: f64,
}

impl GridSchedule {
    pub fn u_grid(&self) -> Grid {
        Grid::symmetric(self.beta_u, self.n_u).expect("schedule counts validated")
    }
    pub fn v_grid(&self) -> Grid {
        Grid::symmetric(self.beta_v, self.n_v).expect("schedule counts validated")
    }
    pub fn y_grid(&self) -> Grid {
        Grid::symmetric(self.beta_y, self.n_y).expect("schedule counts validated")
    }
    pub fn x_grid(&self) -> Grid {
        Grid::symmetric(self.beta_x, self.n_x).expect("schedule counts validated")
    }
}

pub fn schedule(n_prime: usize) -> Result<GridSchedule> {
    let n_v = (n_prime as f64).sqrt().sqrt().round() as usize;
    let n_y = (n_v as f64).sqrt().sqrt().round() as usize;
    if n_prime < 3 || n_v < 3 || n_y < 3 {
        return Err(Error::InvalidParameter(format!(
            "n' = {n_prime} gives bin counts (n_v, n_y) = ({n_v}, {n_y}); all must be at least 3"
        )));
    }
    let beta_y = (n_y as f64).sqrt();
    Ok(GridSchedule {
        n_u: n_prime,
        beta_u: (n_prime as f64).sqrt(),
        n_v,
        beta_v: (n_v as f64).sqrt(),
        n_y,
        beta_y,
        n_x: n_y,
        beta_x: beta_y,
    })
}
