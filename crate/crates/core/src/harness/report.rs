use std::fs;
use std::path::{Path, PathBuf};

use super::{ecdf_points, Arm, ExperimentConfig};
use crate::detector::{self, DetectionPolicy};
use crate::error::Result;

/// Per-trial statistics of both arms with the calibrated policy.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub config: ExperimentConfig,
    pub honest: Vec<f64>,
    pub attack: Vec<f64>,
    pub policy: DetectionPolicy,
    pub ks: f64,
    pub version: &'static str,
}

impl ExperimentReport {
    pub fn new(config: ExperimentConfig, honest: Vec<f64>, attack: Vec<f64>, policy: DetectionPolicy, ks: f64) -> Self {
        Self {
            config,
            honest,
            attack,
            policy,
            ks,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn arm(&self, arm: Arm) -> &[f64] {
        match arm {
            Arm::Honest => &self.honest,
            Arm::Attack => &self.attack,
        }
    }

    pub fn ecdf(&self, arm: Arm) -> Vec<(f64, f64)> {
        ecdf_points(self.arm(arm))
    }

    /// True when every attack statistic exceeds every honest one.
    pub fn fully_separated(&self) -> bool {
        let max_h = self.honest.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let min_a = self.attack.iter().copied().fold(f64::INFINITY, f64::min);
        max_h < min_a
    }

    /// Fraction of attack trials flagged malicious.
    pub fn detection_rate(&self) -> f64 {
        let hits = self.attack.iter().filter(|&&d| d > self.policy.threshold).count();
        hits as f64 / self.attack.len().max(1) as f64
    }

    pub fn trials_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["arm", "trial", "seed", "d_n", "verdict"])?;
        let seed = self.config.seed.to_string();
        for arm in [Arm::Honest, Arm::Attack] {
            for (i, &d) in self.arm(arm).iter().enumerate() {
                let verdict = detector::detect(d, &self.policy)?.verdict;
                w.write_record([arm.as_str(), &i.to_string(), &seed, &d.to_string(), verdict.as_str()])?;
            }
        }
        into_string(w)
    }

    pub fn cdf_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["arm", "d_n_value", "ecdf"])?;
        for arm in [Arm::Honest, Arm::Attack] {
            for (v, p) in self.ecdf(arm) {
                w.write_record([arm.as_str(), &v.to_string(), &p.to_string()])?;
            }
        }
        into_string(w)
    }

    pub fn config_echo(&self) -> String {
        format!(
            "# byzrelay {}\n# threshold = {}\n# ks = {}\n{}",
            self.version,
            self.policy.threshold,
            self.ks,
            self.config.to_config_text()
        )
    }
}

fn into_string(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| e.into_error())?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

/// Writes `trials.csv`, `cdf.csv` and `config.txt` into `dir`, creating it if needed.
pub fn emit_report(report: &ExperimentReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let files = [
        ("trials.csv", report.trials_csv()?),
        ("cdf.csv", report.cdf_csv()?),
        ("config.txt", report.config_echo()),
    ];
    let mut written = Vec::with_capacity(files.len());
    for (name, body) in files {
        let path = dir.join(name);
        fs::write(&path, body)?;
        written.push(path);
    }
    Ok(written)
}
