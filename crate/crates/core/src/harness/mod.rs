//! Seeded Monte Carlo experiments: per-trial simulation of the full relay network,
//! the honest and attack arms, threshold calibration and KS comparison of the arms.

mod config;
mod presets;
mod report;

pub use config::{load_config, parse_config, ExperimentConfig, GridConfig, Grids, StrategyKind, KEYS};
pub use presets::{figure_grids, figure_preset, FigurePreset};
pub use report::{emit_report, ExperimentReport};

use rayon::prelude::*;

use crate::channel::{sample_transmission, sample_y};
use crate::detector::{self, DetectionPolicy, ReferenceTable};
use crate::error::{Error, Result};
use crate::relay::{apply_strategy, RelayStrategy};
use crate::stats::{empirical_cond_cdf, EmpiricalCdfTable};
use crate::streams::{trial_stream, StreamFamily};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Arm {
    Honest,
    Attack,
}

impl Arm {
    pub fn as_str(self) -> &'static str {
        match self {
            Arm::Honest => "honest",
            Arm::Attack => "attack",
        }
    }

    fn family(self) -> StreamFamily {
        match self {
            Arm::Honest => StreamFamily::Honest,
            Arm::Attack => StreamFamily::Attack,
        }
    }
}

/// A validated config with its grids and reference table built once.
#[derive(Debug, Clone)]
pub struct Experiment {
    config: ExperimentConfig,
    grids: Grids,
    t_points: Vec<f64>,
    reference: ReferenceTable,
    attack: RelayStrategy,
}

impl Experiment {
    pub fn new(config: ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let grids = config.grids.build()?;
        let t_points = grids.t_points();
        let reference = detector::reference_table(&config.params, &grids.x, &t_points)?;
        let attack = config.strategy.strategy();
        Ok(Self {
            config,
            grids,
            t_points,
            reference,
            attack,
        })
    }

    pub fn config(&self) -> &ExperimentConfig {
        &self.config
    }

    pub fn grids(&self) -> &Grids {
        &self.grids
    }

    pub fn t_points(&self) -> &[f64] {
        &self.t_points
    }

    pub fn reference(&self) -> &ReferenceTable {
        &self.reference
    }

    fn strategy_for(&self, arm: Arm) -> &RelayStrategy {
        match arm {
            Arm::Honest => &RelayStrategy::Honest,
            Arm::Attack => &self.attack,
        }
    }

    /// Empirical conditional CDF table for observed (x, y) pairs.
    pub fn empirical_table(&self, x: &[f64], y: &[f64]) -> Result<EmpiricalCdfTable> {
        let x_bins = self.grids.x.quantize_all(x)?;
        empirical_cond_cdf(y, &x_bins, &self.t_points, self.grids.x.bin_count())
    }

    /// D^n for observed (x, y) pairs.
    pub fn score_observations(&self, x: &[f64], y: &[f64]) -> Result<f64> {
        if x.is_empty() {
            return Err(Error::InvalidParameter("no observations".into()));
        }
        let table = self.empirical_table(x, y)?;
        detector::decision_statistic(&table, &self.reference)
    }

    /// Simulates one block on the stream (seed, arm, trial) and returns D^n.
    pub fn trial(&self, arm: Arm, trial: u64) -> Result<f64> {
        let mut rng = trial_stream(self.config.seed, arm.family(), trial);
        let params = &self.config.params;
        let rec = sample_transmission(self.config.n, params, &mut rng)?;
        let v = apply_strategy(&rec.u, self.strategy_for(arm), params, &mut rng)?;
        let y = sample_y(&v, params, &mut rng);
        self.score_observations(&rec.x, &y)
    }

    /// D^n for trials 0..count of one arm, in trial order.
    pub fn run_arm(&self, arm: Arm, count: usize) -> Result<Vec<f64>> {
        (0..count as u64)
            .into_par_iter()
            .map(|t| self.trial(arm, t))
            .collect()
    }

    /// The arm matching the configured strategy: honest configs use the honest arm.
    pub fn configured_arm(&self) -> Arm {
        if self.config.strategy == StrategyKind::Honest {
            Arm::Honest
        } else {
            Arm::Attack
        }
    }
}

/// D^n of trial `trial_index` under the configured strategy.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<f64> {
    let exp = Experiment::new(config.clone())?;
    exp.trial(exp.configured_arm(), trial_index)
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    if jobs == 0 {
        return f();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::InvalidParameter(format!("cannot start {jobs} workers: {e}")))?;
    pool.install(f)
}

/// Runs both arms of an already prepared experiment. `jobs = 0` uses the global pool.
pub fn run_prepared(exp: &Experiment, jobs: usize) -> Result<ExperimentReport> {
    with_pool(jobs, || {
        let trials = exp.config().trials;
        let honest = exp.run_arm(Arm::Honest, trials)?;
        let attack = exp.run_arm(Arm::Attack, trials)?;
        let cfg = exp.config();
        let policy = detector::calibrate_from_samples(
            &honest,
            cfg.quantile,
            Some(detector::CalibrationRecord {
                honest_trials: trials,
                quantile: cfg.quantile,
                grids: cfg.grids.clone(),
                seed: cfg.seed,
            }),
        )?;
        let ks = ks_distance(&honest, &attack)?;
        Ok(ExperimentReport::new(exp.config().clone(), honest, attack, policy, ks))
    })
}

pub fn run_experiment(config: &ExperimentConfig, jobs: usize) -> Result<ExperimentReport> {
    let exp = Experiment::new(config.clone())?;
    run_prepared(&exp, jobs)
}

/// Calibrates on the honest arm only.
pub fn run_calibration(config: &ExperimentConfig, jobs: usize) -> Result<DetectionPolicy> {
    let exp = Experiment::new(config.clone())?;
    with_pool(jobs, || detector::calibrate_threshold(&exp, config.trials, config.quantile))
}

/// Two-sample Kolmogorov–Smirnov distance sup_t |F_a(t) − F_b(t)|.
pub fn ks_distance(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::InvalidParameter("KS distance needs two non-empty samples".into()));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::NonFinite(f64::NAN));
    }
    let mut a = a.to_vec();
    let mut b = b.to_vec();
    a.sort_by(f64::total_cmp);
    b.sort_by(f64::total_cmp);
    let (na, nb) = (a.len() as f64, b.len() as f64);
    let (mut i, mut j) = (0usize, 0usize);
    let mut d: f64 = 0.0;
    while i < a.len() && j < b.len() {
        let t = a[i].min(b[j]);
        while i < a.len() && a[i] <= t {
            i += 1;
        }
        while j < b.len() && b[j] <= t {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    Ok(d)
}

/// Sorted sample with its empirical CDF values (i + 1)/N.
pub fn ecdf_points(sample: &[f64]) -> Vec<(f64, f64)> {
    let mut s = sample.to_vec();
    s.sort_by(f64::total_cmp);
    let n = s.len() as f64;
    s.into_iter()
        .enumerate()
        .map(|(i, v)| (v, (i + 1) as f64 / n))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::ChannelParams;

    #[test]
    fn ks_examples() {
        assert_eq!(ks_distance(&[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).unwrap(), 0.0);
        assert_eq!(ks_distance(&[1.0, 2.0], &[5.0, 6.0, 7.0]).unwrap(), 1.0);
        let d = ks_distance(&[1.0, 2.0, 3.0], &[2.0, 3.0, 4.0]).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-15);
        assert!(ks_distance(&[], &[1.0]).is_err());
        // ties across samples are resolved jointly
        assert_eq!(ks_distance(&[1.0, 1.0], &[1.0]).unwrap(), 0.0);
    }

    #[test]
    fn ecdf_is_sorted() {
        let pts = ecdf_points(&[0.3, 0.1, 0.2]);
        assert_eq!(pts.iter().map(|p| p.0).collect::<Vec<_>>(), vec![0.1, 0.2, 0.3]);
        assert_eq!(pts[2].1, 1.0);
    }

    fn cfg(strategy: StrategyKind) -> ExperimentConfig {
        ExperimentConfig::new(ChannelParams::new(1.0, 1.0, 1.0).unwrap(), 1000, 20, strategy).with_seed(3)
    }

    #[test]
    fn trials_are_deterministic() {
        let c = cfg(StrategyKind::Attack1);
        let a = run_trial(&c, 5).unwrap();
        let b = run_trial(&c, 5).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!(a > 0.0);
        assert_ne!(a, run_trial(&c, 6).unwrap());
    }

    #[test]
    fn honest_config_uses_honest_arm() {
        let c = cfg(StrategyKind::Honest);
        let exp = Experiment::new(c.clone()).unwrap();
        assert_eq!(run_trial(&c, 2).unwrap(), exp.trial(Arm::Honest, 2).unwrap());
    }

    #[test]
    fn report_rows_and_worker_independence() {
        let c = cfg(StrategyKind::Attack2);
        let r1 = run_experiment(&c, 1).unwrap();
        let r4 = run_experiment(&c, 4).unwrap();
        assert_eq!(r1.honest, r4.honest);
        assert_eq!(r1.attack, r4.attack);
        assert_eq!(r1.honest.len() + r1.attack.len(), 2 * c.trials);
        assert!((0.0..=1.0).contains(&r1.ks));
    }

    #[test]
    fn too_few_trials_for_calibration() {
        let mut c = cfg(StrategyKind::Attack1);
        c.trials = 5;
        assert!(run_experiment(&c, 1).is_err());
    }
}
