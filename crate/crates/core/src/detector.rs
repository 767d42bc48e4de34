//! The decision statistic D^n, its honest-channel reference table, threshold
//! calibration and verdicts, the numeric manipulability check, and the
//! manipulation objective M(W) over bin-level transition arrays.

use std::cell::Cell;

use ndarray::{Array2, Array3};

use crate::channel::{self, ChannelParams, SymbolPosterior};
use crate::error::{Error, Result};
use crate::harness::{Arm, Experiment, GridConfig};
use crate::normal;
use crate::quadrature::Integrator;
use crate::quantizer::{Grid, NestingMatrix};
use crate::stats::{self, EmpiricalCdfTable};

/// Absolute tolerance for reference-table cells.
pub const REFERENCE_TOLERANCE: f64 = 1e-10;

/// P(S | X̃ = k) for every bin of the X-grid.
pub fn x_bin_posteriors(x_grid: &Grid, params: &ChannelParams) -> Vec<SymbolPosterior> {
    (0..x_grid.bin_count())
        .map(|k| {
            let (lo, hi) = x_grid.bin_interval(k);
            channel::posterior_s_given_x_interval(lo, hi, params)
        })
        .collect()
}

fn cdf_breaks(params: &ChannelParams, t: f64) -> Vec<f64> {
    let mut b = vec![-params.h1.abs(), params.h1.abs()];
    if params.h2 != 0.0 {
        b.push(t / params.h2);
    }
    b
}

/// ∫ f_{U|X̃}(u | bin) · F_{Y|V}(t | u) du for one bin posterior.
pub fn reference_cell(
    params: &ChannelParams,
    posterior: &SymbolPosterior,
    t: f64,
    integrator: &Integrator,
) -> Result<f64> {
    integrator.integrate_with_breaks(
        |u| posterior.u_density(u, params) * channel::cdf_y_given_v(t, u, params),
        f64::NEG_INFINITY,
        f64::INFINITY,
        &cdf_breaks(params, t),
    )
}

/// Honest-channel prediction of the conditional CDF of Y given the X-bin.
/// `values[[m, k]]` pairs t-point m with X-bin k; every X-bin is tabulated.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceTable {
    pub values: Array2<f64>,
    pub t_points: Vec<f64>,
    pub x_bins: usize,
}

pub fn reference_table(params: &ChannelParams, x_grid: &Grid, t_points: &[f64]) -> Result<ReferenceTable> {
    stats::check_increasing(t_points)?;
    let integrator = Integrator::default().with_tolerance(REFERENCE_TOLERANCE);
    let posts = x_bin_posteriors(x_grid, params);
    let mut values = Array2::zeros((t_points.len(), x_grid.bin_count()));
    for (k, post) in posts.iter().enumerate() {
        for (m, &t) in t_points.iter().enumerate() {
            let v = reference_cell(params, post, t, &integrator).map_err(|e| match e {
                Error::Quadrature { context, error_estimate } => Error::Quadrature {
                    context: format!("reference cell (t={t}, x-bin {k}): {context}"),
                    error_estimate,
                },
                other => other,
            })?;
            values[[m, k]] = v.clamp(0.0, 1.0);
        }
    }
    Ok(ReferenceTable {
        values,
        t_points: t_points.to_vec(),
        x_bins: x_grid.bin_count(),
    })
}

/// D^n = 1/((n_x − 2)(n_y − 2)) · Σ_{k < n_x − 1} Σ_m |F^n(t_m | x̃_k) − ref(m, k)|
///
/// n_x is the number of X-bins (columns) and n_y − 1 the number of t-points (rows);
/// the upper X tail bin is left out of the sum.
pub fn decision_statistic(cdf: &EmpiricalCdfTable, reference: &ReferenceTable) -> Result<f64> {
    if cdf.values.dim() != reference.values.dim() {
        return Err(Error::DimensionMismatch(format!(
            "empirical table {:?} vs reference {:?}",
            cdf.values.dim(),
            reference.values.dim()
        )));
    }
    if cdf.t_points != reference.t_points {
        return Err(Error::DimensionMismatch("t-points differ".into()));
    }
    let (n_t, n_x) = cdf.values.dim();
    let n_y = n_t + 1;
    if n_x < 3 || n_y < 3 {
        return Err(Error::DimensionMismatch(format!(
            "need at least 3 X-bins and 2 t-points, got {n_x} and {n_t}"
        )));
    }
    let mut sum = 0.0;
    for k in 0..n_x - 1 {
        for m in 0..n_t {
            sum += (cdf.values[[m, k]] - reference.values[[m, k]]).abs();
        }
    }
    Ok(sum / ((n_x - 2) as f64 * (n_y - 2) as f64))
}

/// Metadata describing how a threshold was obtained.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationRecord {
    pub honest_trials: usize,
    pub quantile: f64,
    pub grids: GridConfig,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectionPolicy {
    pub threshold: f64,
    pub calibration: Option<CalibrationRecord>,
}

impl DetectionPolicy {
    pub fn fixed(threshold: f64) -> Result<Self> {
        if !(threshold.is_finite() && threshold > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "threshold must be a positive finite number, got {threshold}"
            )));
        }
        Ok(Self {
            threshold,
            calibration: None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Honest,
    Malicious,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Honest => "honest",
            Verdict::Malicious => "malicious",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionOutcome {
    pub statistic: f64,
    pub threshold: f64,
    pub verdict: Verdict,
}

/// Minimum number of honest trials accepted by calibration.
pub const MIN_CALIBRATION_TRIALS: usize = 20;

/// The empirical `quantile` of `samples`: the ⌈q·N⌉-th smallest value, so at least
/// ⌈q·N⌉ samples are at or below it.
pub fn empirical_quantile(samples: &[f64], quantile: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::InvalidParameter("quantile of an empty sample".into()));
    }
    if !(quantile > 0.0 && quantile < 1.0) {
        return Err(Error::InvalidParameter(format!("quantile must lie in (0, 1), got {quantile}")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((quantile * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    Ok(sorted[rank - 1])
}

/// Threshold from honest-arm statistics.
pub fn calibrate_from_samples(
    honest: &[f64],
    quantile: f64,
    record: Option<CalibrationRecord>,
) -> Result<DetectionPolicy> {
    if honest.len() < MIN_CALIBRATION_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least {MIN_CALIBRATION_TRIALS} honest trials, got {}",
            honest.len()
        )));
    }
    let threshold = empirical_quantile(honest, quantile)?;
    let mut policy = DetectionPolicy::fixed(threshold)?;
    policy.calibration = record;
    Ok(policy)
}

/// Runs `honest_trials` honest-relay trials of `experiment` and sets the threshold at
/// the requested quantile of their D^n values.
pub fn calibrate_threshold(experiment: &Experiment, honest_trials: usize, quantile: f64) -> Result<DetectionPolicy> {
    if honest_trials < MIN_CALIBRATION_TRIALS {
        return Err(Error::InvalidParameter(format!(
            "calibration needs at least {MIN_CALIBRATION_TRIALS} honest trials, got {honest_trials}"
        )));
    }
    let honest = experiment.run_arm(Arm::Honest, honest_trials)?;
    let cfg = experiment.config();
    calibrate_from_samples(
        &honest,
        quantile,
        Some(CalibrationRecord {
            honest_trials,
            quantile,
            grids: cfg.grids.clone(),
            seed: cfg.seed,
        }),
    )
}

/// Malicious iff `statistic > threshold`.
pub fn detect(statistic: f64, policy: &DetectionPolicy) -> Result<DetectionOutcome> {
    if statistic.is_nan() {
        return Err(Error::NonFinite(statistic));
    }
    if statistic < 0.0 {
        return Err(Error::InvalidParameter(format!("statistic must be non-negative, got {statistic}")));
    }
    let verdict = if statistic > policy.threshold {
        Verdict::Malicious
    } else {
        Verdict::Honest
    };
    Ok(DetectionOutcome {
        statistic,
        threshold: policy.threshold,
        verdict,
    })
}

/// A conditional density Ψ(v | u) the relay could use to generate V from U.
pub trait TransitionKernel: Sync {
    fn density(&self, v: f64, u: f64) -> f64;

    /// Points where Ψ(· | u) concentrates mass, used to seed quadrature panels.
    fn breakpoints(&self, u: f64) -> Vec<f64>;
}

/// Ψ(v | u) = f_U(v): V is a fresh draw from the U-marginal.
#[derive(Debug, Clone, Copy)]
pub struct MarginalKernel {
    pub params: ChannelParams,
}

impl TransitionKernel for MarginalKernel {
    fn density(&self, v: f64, _u: f64) -> f64 {
        channel::pdf_u(v, &self.params)
    }

    fn breakpoints(&self, _u: f64) -> Vec<f64> {
        vec![-self.params.h1.abs(), self.params.h1.abs()]
    }
}

/// Ψ(v | u) = N(v; u + shift, width²). With `shift = 0` and a small width this
/// approximates the honest identity relay.
#[derive(Debug, Clone, Copy)]
pub struct GaussianKernel {
    pub width: f64,
    pub shift: f64,
}

impl GaussianKernel {
    pub fn new(width: f64, shift: f64) -> Result<Self> {
        if !(width.is_finite() && width > 0.0 && shift.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "gaussian kernel needs a positive width, got {width}"
            )));
        }
        Ok(Self { width, shift })
    }
}

impl TransitionKernel for GaussianKernel {
    fn density(&self, v: f64, u: f64) -> f64 {
        normal::pdf((v - u - self.shift) / self.width) / self.width
    }

    fn breakpoints(&self, u: f64) -> Vec<f64> {
        let c = u + self.shift;
        let s = self.width;
        vec![c - 8.0 * s, c - 2.0 * s, c, c + 2.0 * s, c + 8.0 * s]
    }
}

/// Probe points (x, y) at which the two sides of the manipulation identity are compared.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeGrid {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
}

impl ProbeGrid {
    pub fn uniform(lo: f64, hi: f64, points: usize) -> Self {
        let pts: Vec<f64> = if points <= 1 {
            vec![0.5 * (lo + hi)]
        } else {
            (0..points)
                .map(|i| lo + (hi - lo) * i as f64 / (points - 1) as f64)
                .collect()
        };
        Self {
            xs: pts.clone(),
            ys: pts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManipulabilityReport {
    pub max_gap: f64,
    pub worst_x: f64,
    pub worst_y: f64,
    pub manipulable_at_tol: bool,
}

const KERNEL_NORMALIZATION_TOL: f64 = 1e-4;

/// Compares ∫∫ f_{U|X}(u|x)·Ψ(v|u)·F_{Y|V}(y|v) du dv with ∫ f_{U|X}(u|x)·F_{Y|V}(y|u) du
/// over the probe grid. The kernel reproduces the honest observation law (the channel
/// is manipulable by it) when the largest gap is below `tol`.
pub fn check_manipulable<K: TransitionKernel + ?Sized>(
    params: &ChannelParams,
    kernel: &K,
    probe: &ProbeGrid,
    tol: f64,
) -> Result<ManipulabilityReport> {
    if probe.xs.is_empty() || probe.ys.is_empty() {
        return Err(Error::InvalidParameter("probe grid must be non-empty".into()));
    }
    let inner_q = Integrator::new(16, 1e-13);
    let outer_q = Integrator::new(16, 1e-11);

    for u in [-3.0, -1.5, 0.0, 0.7, 1.5, 3.0] {
        let mass = inner_q.integrate_with_breaks(
            |v| kernel.density(v, u),
            f64::NEG_INFINITY,
            f64::INFINITY,
            &kernel.breakpoints(u),
        )?;
        if (mass - 1.0).abs() > KERNEL_NORMALIZATION_TOL {
            return Err(Error::KernelNormalization { u, integral: mass });
        }
    }

    let mut report = ManipulabilityReport {
        max_gap: 0.0,
        worst_x: probe.xs[0],
        worst_y: probe.ys[0],
        manipulable_at_tol: false,
    };
    let mut outer_breaks = vec![-params.h1.abs(), params.h1.abs()];
    outer_breaks.dedup();
    for &x in &probe.xs {
        let post = channel::posterior_s_given_x(x, params);
        for &y in &probe.ys {
            let failure = Cell::new(None);
            let gap_integrand = |u: f64| {
                let weight = post.u_density(u, params);
                if weight == 0.0 {
                    return 0.0;
                }
                let forwarded = inner_q.integrate_with_breaks(
                    |v| kernel.density(v, u) * channel::cdf_y_given_v(y, v, params),
                    f64::NEG_INFINITY,
                    f64::INFINITY,
                    &kernel.breakpoints(u),
                );
                match forwarded {
                    Ok(val) => weight * (val - channel::cdf_y_given_v(y, u, params)),
                    Err(_) => {
                        if failure.get().is_none() {
                            failure.set(Some(u));
                        }
                        0.0
                    }
                }
            };
            let gap =
                outer_q.integrate_with_breaks(gap_integrand, f64::NEG_INFINITY, f64::INFINITY, &outer_breaks)?;
            if let Some(u) = failure.get() {
                return Err(Error::Quadrature {
                    context: format!("inner kernel integral at u={u}, probe (x={x}, y={y})"),
                    error_estimate: f64::NAN,
                });
            }
            let gap = gap.abs();
            if gap > report.max_gap {
                report.max_gap = gap;
                report.worst_x = x;
                report.worst_y = y;
            }
        }
    }
    report.manipulable_at_tol = report.max_gap < tol;
    Ok(report)
}

/// A bin-level relay behaviour `w[[i, j, k]]`: probability of forwarding into V-bin j
/// given U-bin i while the destination sees X-bin k.
#[derive(Debug, Clone)]
pub struct ManipulationObjectiveInput {
    pub w: Array3<f64>,
    pub u_grid: Grid,
    pub v_grid: Grid,
    pub params: ChannelParams,
}

impl ManipulationObjectiveInput {
    fn validate(&self, n_x: usize) -> Result<()> {
        let expect = (self.u_grid.bin_count(), self.v_grid.bin_count(), n_x);
        if self.w.dim() != expect {
            return Err(Error::DimensionMismatch(format!(
                "W is {:?}, expected {:?}",
                self.w.dim(),
                expect
            )));
        }
        if self.w.iter().any(|&p| !(0.0..=1.0).contains(&p)) {
            return Err(Error::InvalidParameter("W entries must lie in [0, 1]".into()));
        }
        for i in 0..expect.0 {
            for k in 0..expect.2 {
                let s: f64 = (0..expect.1).map(|j| self.w[[i, j, k]]).sum();
                if (s - 1.0).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "W slice (u-bin {i}, x-bin {k}) sums to {s}, not 1"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Repeats the nesting matrix along the X-bin axis.
pub fn lift_nesting_matrix(w0: &NestingMatrix, n_x: usize) -> Array3<f64> {
    Array3::from_shape_fn((w0.rows(), w0.cols(), n_x), |(i, j, _)| w0.entry(i, j))
}

/// Precomputed pieces of M(W) so that many W can be evaluated cheaply.
#[derive(Debug, Clone)]
pub struct ObjectiveEvaluator {
    scale: f64,
    reference: Array2<f64>,
    p_u_given_x: Array2<f64>,
    /// F_{Y|V}(t_m | v̄_{m,j,k}) indexed [m, j, k]
    f_bar: Array3<f64>,
    u_bins: usize,
    v_bins: usize,
    x_bins: usize,
}

impl ObjectiveEvaluator {
    pub fn new(
        params: &ChannelParams,
        u_grid: &Grid,
        v_grid: &Grid,
        x_grid: &Grid,
        t_points: &[f64],
    ) -> Result<Self> {
        stats::check_increasing(t_points)?;
        if t_points.len() < 2 {
            return Err(Error::InvalidParameter("objective needs at least two t-points".into()));
        }
        let integrator = Integrator::default().with_tolerance(REFERENCE_TOLERANCE);
        let reference = reference_table(params, x_grid, t_points)?.values;
        let p_u_given_x = stats::p_u_bin_given_x_bin(u_grid, x_grid, params)?;
        let posts = x_bin_posteriors(x_grid, params);
        let n_t = t_points.len();
        let (v_bins, x_bins) = (v_grid.bin_count(), x_grid.bin_count());
        let mut f_bar = Array3::zeros((n_t, v_bins, x_bins));
        for (k, post) in posts.iter().enumerate() {
            for j in 0..v_bins {
                let (lo, hi) = v_grid.bin_interval(j);
                let mass = post.u_interval_prob(lo, hi, params);
                for (m, &t) in t_points.iter().enumerate() {
                    f_bar[[m, j, k]] = if mass > 1e-300 {
                        let mut breaks = cdf_breaks(params, t);
                        breaks.retain(|b| *b > lo && *b < hi);
                        let num = integrator.integrate_with_breaks(
                            |u| post.u_density(u, params) * channel::cdf_y_given_v(t, u, params),
                            lo,
                            hi,
                            &breaks,
                        )?;
                        (num / mass).clamp(0.0, 1.0)
                    } else {
                        channel::cdf_y_given_v(t, v_grid.representative(j), params)
                    };
                }
            }
        }
        let span_y = t_points[n_t - 1] - t_points[0];
        let scale = (x_grid.beta() - x_grid.alpha()) / (x_bins - 2) as f64 * span_y / (n_t - 1) as f64;
        Ok(Self {
            scale,
            reference,
            p_u_given_x,
            f_bar,
            u_bins: u_grid.bin_count(),
            v_bins,
            x_bins,
        })
    }

    pub fn evaluate(&self, input: &ManipulationObjectiveInput) -> Result<f64> {
        input.validate(self.x_bins)?;
        if input.u_grid.bin_count() != self.u_bins || input.v_grid.bin_count() != self.v_bins {
            return Err(Error::DimensionMismatch("grids differ from the evaluator's".into()));
        }
        let w = &input.w;
        let n_t = self.reference.nrows();
        let mut total = 0.0;
        for k in 0..self.x_bins - 1 {
            // a_j = Σ_i P(ũ_i | x̃_k)·w_{i,j,k}
            let a: Vec<f64> = (0..self.v_bins)
                .map(|j| (0..self.u_bins).map(|i| self.p_u_given_x[[i, k]] * w[[i, j, k]]).sum())
                .collect();
            for m in 0..n_t {
                let predicted: f64 = a.iter().enumerate().map(|(j, aj)| aj * self.f_bar[[m, j, k]]).sum();
                let gap = self.reference[[m, k]] - predicted;
                total += gap * gap;
            }
        }
        Ok(self.scale * total)
    }
}

/// M(W): scaled sum over X-bins k < n_x − 1 and t-points m of the squared gap between
/// the honest reference and Σ_j Σ_i P(ũ_i | x̃_k)·w_{i,j,k}·F_{Y|V}(t_m | v̄_{m,j,k}).
pub fn manipulation_objective(
    input: &ManipulationObjectiveInput,
    t_points: &[f64],
    x_grid: &Grid,
) -> Result<f64> {
    input.validate(x_grid.bin_count())?;
    ObjectiveEvaluator::new(&input.params, &input.u_grid, &input.v_grid, x_grid, t_points)?.evaluate(input)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantizer::{build_nested_pair, nesting_matrix};

    fn c(h1: f64, h2: f64, h3: f64) -> ChannelParams {
        ChannelParams::new(h1, h2, h3).unwrap()
    }

    #[test]
    fn detect_tie_rule() {
        let p = DetectionPolicy::fixed(0.01).unwrap();
        assert_eq!(detect(0.0, &p).unwrap().verdict, Verdict::Honest);
        assert_eq!(detect(0.5, &p).unwrap().verdict, Verdict::Malicious);
        assert_eq!(detect(0.01, &p).unwrap().verdict, Verdict::Honest);
        assert!(detect(-1e-3, &p).is_err());
        assert!(DetectionPolicy::fixed(0.0).is_err());
    }

    #[test]
    fn quantile_and_calibration_from_samples() {
        let samples: Vec<f64> = (1..=200).map(|i| i as f64 / 1000.0).collect();
        let q = empirical_quantile(&samples, 0.99).unwrap();
        assert!(samples.iter().filter(|&&s| s <= q).count() >= 198);
        assert!(calibrate_from_samples(&samples[..19], 0.9, None).is_err());
        assert!(empirical_quantile(&samples, 1.0).is_err());
        let pol = calibrate_from_samples(&samples, 0.5, None).unwrap();
        assert_eq!(pol.threshold, 0.1);
    }

    #[test]
    fn reference_saturates_and_is_symmetric() {
        let p = c(1.0, 1.0, 1.0);
        let xg = Grid::symmetric(1.0, 3).unwrap(); // inner bin (−1, 1] straddles 0
        let t = reference_table(&p, &xg, &[0.0, 40.0]).unwrap();
        assert!((t.values[[0, 1]] - 0.5).abs() < 1e-10);
        for k in 0..3 {
            assert!((t.values[[1, k]] - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn reference_matches_closed_form() {
        // ∫ N(u; μ, 1)·Φ(t − h2·u) du = Φ((t − h2·μ)/√(1 + h2²))
        let p = c(0.8, 1.3, 0.6);
        let xg = Grid::symmetric(3.0, 8).unwrap();
        let ts = [-2.0, -0.5, 0.3, 1.7];
        let table = reference_table(&p, &xg, &ts).unwrap();
        let posts = x_bin_posteriors(&xg, &p);
        let s = (1.0 + p.h2 * p.h2).sqrt();
        for (k, post) in posts.iter().enumerate() {
            for (m, &t) in ts.iter().enumerate() {
                let expect = post.plus * normal::cdf((t - p.h2 * p.h1) / s)
                    + post.minus * normal::cdf((t + p.h2 * p.h1) / s);
                assert!((table.values[[m, k]] - expect).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn statistic_linearity_and_mismatch() {
        let ts = vec![-1.0, 0.0, 1.0];
        let values = Array2::from_shape_fn((3, 5), |(m, k)| 0.1 * (m + k) as f64 / 7.0);
        let reference = ReferenceTable {
            values: values.clone(),
            t_points: ts.clone(),
            x_bins: 5,
        };
        let mut cdf = EmpiricalCdfTable {
            values,
            t_points: ts.clone(),
            x_bin_counts: vec![1; 5],
        };
        assert_eq!(decision_statistic(&cdf, &reference).unwrap(), 0.0);
        cdf.values[[1, 2]] += 0.3;
        let d = decision_statistic(&cdf, &reference).unwrap();
        assert!((d - 0.3 / (3.0 * 2.0)).abs() < 1e-15);
        // the upper X tail column is not summed
        cdf.values[[1, 2]] -= 0.3;
        cdf.values[[0, 4]] += 0.5;
        assert!(decision_statistic(&cdf, &reference).unwrap() < 1e-15);

        let other = EmpiricalCdfTable {
            values: Array2::zeros((2, 5)),
            t_points: vec![0.0, 1.0],
            x_bin_counts: vec![1; 5],
        };
        assert!(decision_statistic(&other, &reference).is_err());
    }

    #[test]
    fn gaussian_kernel_rejects_bad_width() {
        assert!(GaussianKernel::new(0.0, 0.0).is_err());
        assert!(GaussianKernel::new(-1.0, 0.0).is_err());
    }

    struct Broken;
    impl TransitionKernel for Broken {
        fn density(&self, v: f64, u: f64) -> f64 {
            2.0 * normal::pdf(v - u)
        }
        fn breakpoints(&self, u: f64) -> Vec<f64> {
            vec![u]
        }
    }

    #[test]
    fn manipulability_rejects_unnormalised_kernel_and_empty_probe() {
        let p = c(1.0, 1.0, 1.0);
        let probe = ProbeGrid::uniform(-1.0, 1.0, 2);
        assert!(matches!(
            check_manipulable(&p, &Broken, &probe, 1e-3),
            Err(Error::KernelNormalization { .. })
        ));
        let empty = ProbeGrid { xs: vec![], ys: vec![0.0] };
        assert!(check_manipulable(&p, &MarginalKernel { params: p }, &empty, 1e-3).is_err());
    }

    #[test]
    fn marginal_kernel_gap_depends_on_direct_link() {
        let probe = ProbeGrid::uniform(-2.0, 2.0, 5);
        let p0 = c(1.0, 1.0, 0.0);
        let r = check_manipulable(&p0, &MarginalKernel { params: p0 }, &probe, 1e-6).unwrap();
        assert!(r.max_gap < 1e-6 && r.manipulable_at_tol, "{r:?}");
        let p1 = c(1.0, 1.0, 1.0);
        let r = check_manipulable(&p1, &MarginalKernel { params: p1 }, &probe, 1e-6).unwrap();
        assert!(r.max_gap > 0.01 && !r.manipulable_at_tol, "{r:?}");
    }

    #[test]
    fn near_identity_kernel_gap_shrinks_with_width() {
        let p = c(1.0, 1.0, 1.0);
        let probe = ProbeGrid::uniform(-2.0, 2.0, 5);
        let gaps: Vec<f64> = [1e-2, 1e-3, 1e-4]
            .iter()
            .map(|&w| check_manipulable(&p, &GaussianKernel::new(w, 0.0).unwrap(), &probe, 1e-3).unwrap().max_gap)
            .collect();
        assert!(gaps[2] < 1e-3);
        assert!(gaps[0] > gaps[1] && gaps[1] > gaps[2], "{gaps:?}");
    }

    fn small_setup() -> (ChannelParams, Grid, Grid, Grid, Vec<f64>, NestingMatrix) {
        let p = c(1.0, 1.0, 1.0);
        let pair = build_nested_pair(3.0, 8, 2).unwrap();
        let xg = Grid::symmetric(3.0, 8).unwrap();
        let yg = Grid::symmetric(3.0, 8).unwrap();
        let w0 = nesting_matrix(&pair);
        (p, pair.fine().clone(), pair.coarse().clone(), xg, yg.inner_edges(), w0)
    }

    #[test]
    fn objective_vanishes_at_nesting_matrix() {
        let (p, ug, vg, xg, ts, w0) = small_setup();
        let input = ManipulationObjectiveInput {
            w: lift_nesting_matrix(&w0, xg.bin_count()),
            u_grid: ug,
            v_grid: vg,
            params: p,
        };
        let m = manipulation_objective(&input, &ts, &xg).unwrap();
        assert!(m < 1e-12, "M(W0) = {m}");
    }

    #[test]
    fn objective_positive_for_uniform_w_and_rejects_bad_slices() {
        let (p, ug, vg, xg, ts, _) = small_setup();
        let nv = vg.bin_count();
        let mut input = ManipulationObjectiveInput {
            w: Array3::from_elem((ug.bin_count(), nv, xg.bin_count()), 1.0 / nv as f64),
            u_grid: ug,
            v_grid: vg,
            params: p,
        };
        assert!(manipulation_objective(&input, &ts, &xg).unwrap() > 0.0);
        input.w[[0, 0, 0]] += 0.1;
        assert!(manipulation_objective(&input, &ts, &xg).is_err());
    }
}
