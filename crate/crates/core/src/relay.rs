//! Relay forwarding behaviours and the attack-magnitude functional.
//!
//! A relay only sees its own observations U^n; every strategy here maps U^n to the
//! forwarded V^n without access to X^n or Y^n.

use std::fmt;
use std::sync::Arc;

use rand::{Rng, RngCore};

use crate::channel::{self, ChannelParams};
use crate::error::{Error, Result};
use crate::quantizer::{nesting_matrix, NestedGridPair};
use crate::stats::empirical_transition;

pub type MapFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
pub type KernelFn = Arc<dyn Fn(f64, &mut dyn RngCore) -> f64 + Send + Sync>;

/// How the relay produces V^n from U^n.
#[derive(Clone)]
pub enum RelayStrategy {
    /// V = U.
    Honest,
    /// V_i = U_i − 1 for odd i, V_i = 2·U_i − 1 for even i (1-based).
    Attack1,
    /// V_i drawn i.i.d. from the marginal of U, independent of U^n.
    Attack2,
    /// V_i = f(U_i).
    DeterministicMap(MapFn),
    /// V_i ~ Ψ(· | U_i), independently across i.
    IidKernel(KernelFn),
}

impl fmt::Debug for RelayStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelayStrategy::Honest => write!(f, "Honest"),
            RelayStrategy::Attack1 => write!(f, "Attack1"),
            RelayStrategy::Attack2 => write!(f, "Attack2"),
            RelayStrategy::DeterministicMap(_) => write!(f, "DeterministicMap(..)"),
            RelayStrategy::IidKernel(_) => write!(f, "IidKernel(..)"),
        }
    }
}

impl RelayStrategy {
    pub fn map<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        RelayStrategy::DeterministicMap(Arc::new(f))
    }

    pub fn kernel<F: Fn(f64, &mut dyn RngCore) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        RelayStrategy::IidKernel(Arc::new(f))
    }

    pub fn is_honest(&self) -> bool {
        matches!(self, RelayStrategy::Honest)
    }
}

pub fn apply_strategy<R: RngCore>(
    u: &[f64],
    strategy: &RelayStrategy,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if u.is_empty() {
        return Err(Error::InvalidParameter("relay input must be non-empty".into()));
    }
    let v = match strategy {
        RelayStrategy::Honest => u.to_vec(),
        RelayStrategy::Attack1 => u
            .iter()
            .enumerate()
            .map(|(i, &ui)| if i % 2 == 0 { ui - 1.0 } else { 2.0 * ui - 1.0 })
            .collect(),
        RelayStrategy::Attack2 => (0..u.len())
            .map(|_| channel::sample_u_marginal(params, rng))
            .collect(),
        RelayStrategy::DeterministicMap(f) => u.iter().map(|&ui| f(ui)).collect(),
        RelayStrategy::IidKernel(psi) => {
            let rng: &mut dyn RngCore = rng;
            u.iter().map(|&ui| psi(ui, &mut *rng)).collect()
        }
    };
    Ok(v)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MagnitudeMode {
    /// Sum only over U-bins that occur in the sample.
    #[default]
    ObservedRows,
    /// Sum over every U-bin; an unobserved row contributes |0 − W0 row| = 1.
    AllRows,
}

/// R = Σ_{i,j} |ΔF(j | i) − W0(i, j)|.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AttackMagnitude {
    pub value: f64,
    pub observed_rows: usize,
    pub mode: MagnitudeMode,
}

pub fn attack_magnitude(
    u: &[f64],
    v: &[f64],
    pair: &NestedGridPair,
    mode: MagnitudeMode,
) -> Result<AttackMagnitude> {
    if u.len() != v.len() {
        return Err(Error::LengthMismatch {
            left: u.len(),
            right: v.len(),
        });
    }
    let u_bins = pair.fine().quantize_all(u)?;
    let v_bins = pair.coarse().quantize_all(v)?;
    let dims = (pair.fine().bin_count(), pair.coarse().bin_count());
    let delta_f = empirical_transition(&u_bins, &v_bins, dims)?;
    let w0 = nesting_matrix(pair);

    let mut value = 0.0;
    let mut observed_rows = 0;
    for (i, row) in delta_f.entries.rows().into_iter().enumerate() {
        let observed = delta_f.row_counts[i] > 0;
        observed_rows += observed as usize;
        if !observed && mode == MagnitudeMode::ObservedRows {
            continue;
        }
        value += row
            .iter()
            .enumerate()
            .map(|(j, &p)| (p - w0.entry(i, j)).abs())
            .sum::<f64>();
    }
    Ok(AttackMagnitude {
        value,
        observed_rows,
        mode,
    })
}

/// Pearson correlation, used for independence checks on relay output.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len().min(b.len()) as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut cov, mut va, mut vb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

/// Draws a fresh sample from the U-marginal, e.g. for two-sample comparisons.
pub fn sample_u_marginal_block<R: Rng + ?Sized>(n: usize, params: &ChannelParams, rng: &mut R) -> Vec<f64> {
    (0..n).map(|_| channel::sample_u_marginal(params, rng)).collect()
}
