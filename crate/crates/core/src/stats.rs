//! Empirical estimators over quantized sequences: the bin-level transition matrix of
//! V given U, the conditional empirical CDF of Y given the X-bin, and the residual
//! between that CDF and its transition-matrix prediction.

use ndarray::Array2;

use crate::channel::{self, ChannelParams, SymbolPosterior};
use crate::error::{Error, Result};
use crate::quadrature::Integrator;
use crate::quantizer::Grid;

/// Empirical transition probabilities between two quantized sequences.
///
/// Rows with a positive count are stochastic; unobserved rows are all zero.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    pub entries: Array2<f64>,
    pub row_counts: Vec<usize>,
}

impl TransitionMatrix {
    pub fn rows(&self) -> usize {
        self.entries.nrows()
    }

    pub fn cols(&self) -> usize {
        self.entries.ncols()
    }

    pub fn observed_rows(&self) -> impl Iterator<Item = usize> + '_ {
        self.row_counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, _)| i)
    }
}

/// Entry (j, k) = #{i : u_i = j ∧ v_i = k} / #{i : u_i = j}, or 0 when row j is empty.
pub fn empirical_transition(
    u_bins: &[usize],
    v_bins: &[usize],
    dims: (usize, usize),
) -> Result<TransitionMatrix> {
    if u_bins.len() != v_bins.len() {
        return Err(Error::LengthMismatch {
            left: u_bins.len(),
            right: v_bins.len(),
        });
    }
    let (rows, cols) = dims;
    let mut counts = Array2::<f64>::zeros((rows, cols));
    let mut row_counts = vec![0usize; rows];
    for (&j, &k) in u_bins.iter().zip(v_bins) {
        if j >= rows {
            return Err(Error::IndexOutOfRange { index: j, dim: rows });
        }
        if k >= cols {
            return Err(Error::IndexOutOfRange { index: k, dim: cols });
        }
        counts[[j, k]] += 1.0;
        row_counts[j] += 1;
    }
    for (j, mut row) in counts.rows_mut().into_iter().enumerate() {
        if row_counts[j] > 0 {
            let denom = row_counts[j] as f64;
            row.mapv_inplace(|c| c / denom);
        }
    }
    Ok(TransitionMatrix {
        entries: counts,
        row_counts,
    })
}

/// Conditional empirical CDF of Y given the X-bin, evaluated at a fixed set of points.
/// `values[[m, k]]` is the fraction of samples in X-bin k with `y < t_m`.
#[derive(Debug, Clone, PartialEq)]
pub struct EmpiricalCdfTable {
    pub values: Array2<f64>,
    pub t_points: Vec<f64>,
    pub x_bin_counts: Vec<usize>,
}

pub(crate) fn check_increasing(t_points: &[f64]) -> Result<()> {
    if t_points.is_empty() {
        return Err(Error::InvalidParameter("t_points must be non-empty".into()));
    }
    for w in t_points.windows(2) {
        if w[0] >= w[1] || w[0].is_nan() || w[1].is_nan() {
            return Err(Error::InvalidParameter(format!(
                "t_points must be strictly increasing ({} then {})",
                w[0], w[1]
            )));
        }
    }
    Ok(())
}

pub fn empirical_cond_cdf(
    y: &[f64],
    x_bins: &[usize],
    t_points: &[f64],
    n_x_bins: usize,
) -> Result<EmpiricalCdfTable> {
    if y.len() != x_bins.len() {
        return Err(Error::LengthMismatch {
            left: y.len(),
            right: x_bins.len(),
        });
    }
    check_increasing(t_points)?;
    let n_t = t_points.len();
    // hist[[p, k]]: samples in X-bin k whose y lies in [t_{p-1}, t_p), i.e. the first
    // t-point strictly above y is t_p
    let mut hist = Array2::<usize>::zeros((n_t + 1, n_x_bins));
    let mut x_bin_counts = vec![0usize; n_x_bins];
    for (&yi, &k) in y.iter().zip(x_bins) {
        if k >= n_x_bins {
            return Err(Error::IndexOutOfRange { index: k, dim: n_x_bins });
        }
        let p = t_points.partition_point(|&t| t <= yi);
        hist[[p, k]] += 1;
        x_bin_counts[k] += 1;
    }
    let mut values = Array2::<f64>::zeros((n_t, n_x_bins));
    for k in 0..n_x_bins {
        if x_bin_counts[k] == 0 {
            continue;
        }
        let denom = x_bin_counts[k] as f64;
        let mut below = 0usize;
        for m in 0..n_t {
            below += hist[[m, k]];
            values[[m, k]] = below as f64 / denom;
        }
    }
    Ok(EmpiricalCdfTable {
        values,
        t_points: t_points.to_vec(),
        x_bin_counts,
    })
}

/// max over (m, k) of |F^n(t_m | x̃_k) − Σ_j Σ_l P(ũ_j | x̃_k)·ΔF(l | j)·F_{Y|V}(t_m | v̄_l)|.
///
/// * `p_u_given_x`: (U-bins × X-bins), see [`p_u_bin_given_x_bin`]
/// * `delta_f`: (U-bins × V-bins)
/// * `f_y_given_v_at_reps`: (t-points × V-bins), see [`f_y_given_v_table`]
pub fn convergence_residual(
    cdf: &EmpiricalCdfTable,
    p_u_given_x: &Array2<f64>,
    delta_f: &TransitionMatrix,
    f_y_given_v_at_reps: &Array2<f64>,
) -> Result<f64> {
    let (n_t, n_x) = cdf.values.dim();
    let (n_u, n_v) = delta_f.entries.dim();
    if p_u_given_x.dim() != (n_u, n_x) {
        return Err(Error::DimensionMismatch(format!(
            "P(U|X) is {:?}, expected ({n_u}, {n_x})",
            p_u_given_x.dim()
        )));
    }
    if f_y_given_v_at_reps.dim() != (n_t, n_v) {
        return Err(Error::DimensionMismatch(format!(
            "F(Y|V) table is {:?}, expected ({n_t}, {n_v})",
            f_y_given_v_at_reps.dim()
        )));
    }
    if delta_f.row_counts.iter().all(|&c| c == 0) || cdf.x_bin_counts.iter().all(|&c| c == 0) {
        return Err(Error::InvalidParameter(
            "residual needs at least one observed sample".into(),
        ));
    }
    // P(Ṽ = l | x̃_k) implied by the transition matrix: (X-bins × V-bins)
    let v_given_x = p_u_given_x.t().dot(&delta_f.entries);
    // predicted CDF: (t-points × X-bins)
    let predicted = f_y_given_v_at_reps.dot(&v_given_x.t());
    let residual = cdf
        .values
        .iter()
        .zip(predicted.iter())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    Ok(residual)
}

/// P(Ũ = j | X̃ = k) for the channel; columns sum to one.
///
/// U and X are conditionally independent given S, so the joint bin probability
/// reduces to Σ_s P(s)·P(U ∈ B_j | s)·P(X ∈ B_k | s), each factor a Gaussian CDF difference.
pub fn p_u_bin_given_x_bin(u_grid: &Grid, x_grid: &Grid, params: &ChannelParams) -> Result<Array2<f64>> {
    let mut out = Array2::<f64>::zeros((u_grid.bin_count(), x_grid.bin_count()));
    for k in 0..x_grid.bin_count() {
        let (xlo, xhi) = x_grid.bin_interval(k);
        let post = channel::posterior_s_given_x_interval(xlo, xhi, params);
        let mut col_sum = 0.0;
        for j in 0..u_grid.bin_count() {
            let (ulo, uhi) = u_grid.bin_interval(j);
            let p = post.u_interval_prob(ulo, uhi, params);
            out[[j, k]] = p;
            col_sum += p;
        }
        if (col_sum - 1.0).abs() > 1e-6 {
            return Err(Error::Quadrature {
                context: format!("P(U|X) column {k} sums to {col_sum}"),
                error_estimate: (col_sum - 1.0).abs(),
            });
        }
    }
    Ok(out)
}

/// One evaluation point per V-bin: the representative for inner bins and the conditional
/// mean of the U-marginal for the two tail bins.
pub fn v_bin_points(v_grid: &Grid, params: &ChannelParams, integrator: &Integrator) -> Result<Vec<f64>> {
    let last = v_grid.bin_count() - 1;
    let mut points = v_grid.representatives().to_vec();
    for bin in [0, last] {
        let (lo, hi) = v_grid.bin_interval(bin);
        let mass = SymbolPosterior::UNIFORM.u_interval_prob(lo, hi, params);
        let breaks = [-params.h1.abs(), params.h1.abs()];
        let first = integrator.integrate_with_breaks(|u| u * channel::pdf_u(u, params), lo, hi, &breaks)?;
        if mass > 1e-300 {
            let mean = first / mass;
            // keep the point inside its bin against quadrature round-off
            points[bin] = if bin == 0 { mean.min(hi) } else { mean.max(lo) };
        }
    }
    Ok(points)
}

/// F_{Y|V}(t_m | point_l) as a (t-points × V-bins) table.
pub fn f_y_given_v_table(t_points: &[f64], points: &[f64], params: &ChannelParams) -> Array2<f64> {
    Array2::from_shape_fn((t_points.len(), points.len()), |(m, l)| {
        channel::cdf_y_given_v(t_points[m], points[l], params)
    })
}
