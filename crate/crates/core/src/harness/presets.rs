use super::{ExperimentConfig, GridConfig, StrategyKind};
use crate::channel::ChannelParams;
use crate::error::{Error, Result};

/// Pinned channel gains, strategy and block-length sweep of one figure.
#[derive(Debug, Clone, PartialEq)]
pub struct FigurePreset {
    pub figure: u8,
    pub params: ChannelParams,
    pub strategy: StrategyKind,
    pub block_lengths: Vec<usize>,
    pub grids: GridConfig,
}

/// Grids used by every figure preset: X and Y over ±3, with X-bins one unit wide so
/// that each X-bin expects at least about ten samples at n = 10^3 when h3 = 1.
pub fn figure_grids() -> GridConfig {
    GridConfig {
        n_x: 8,
        n_y: 22,
        n_u: 82,
        n_v: 42,
        range: 3.0,
        schedule: false,
    }
}

impl FigurePreset {
    /// One config per block length, sharing trials and seed.
    pub fn configs(&self, trials: usize, seed: u64) -> Vec<ExperimentConfig> {
        self.block_lengths
            .iter()
            .map(|&n| {
                ExperimentConfig::new(self.params, n, trials, self.strategy)
                    .with_seed(seed)
                    .with_grids(self.grids.clone())
            })
            .collect()
    }
}

pub fn figure_preset(figure: u8) -> Result<FigurePreset> {
    let (h3, strategy) = match figure {
        4 => (1.0, StrategyKind::Attack1),
        5 => (1.0, StrategyKind::Attack2),
        6 => (0.01, StrategyKind::Attack2),
        7 => (0.0, StrategyKind::Attack2),
        other => {
            return Err(Error::InvalidParameter(format!(
                "no preset for figure {other}; expected 4, 5, 6 or 7"
            )))
        }
    };
    let mut block_lengths = vec![100, 1_000, 10_000];
    if figure == 6 {
        block_lengths.push(100_000);
    }
    Ok(FigurePreset {
        figure,
        params: ChannelParams::new(1.0, 1.0, h3)?,
        strategy,
        block_lengths,
        grids: figure_grids(),
    })
}
