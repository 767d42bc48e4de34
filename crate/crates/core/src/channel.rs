//! Analytic densities, distribution functions and samplers for the three AWGN links
//! of the two-hop relay network:
//!
//! * source → relay: `U = h1·S + N_r`
//! * source → destination (direct, secured): `X = h3·S + N_d`
//! * relay → destination: `Y = h2·V + N'_d`
//!
//! All noises are independent standard Gaussians and `S` is uniform on {+1, −1}.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::normal;

/// Channel coefficients of the relay network. Noise variance is fixed at one on every link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelParams {
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
}

impl ChannelParams {
    pub fn new(h1: f64, h2: f64, h3: f64) -> Result<Self> {
        for h in [h1, h2, h3] {
            if !h.is_finite() {
                return Err(Error::NonFinite(h));
            }
        }
        Ok(Self { h1, h2, h3 })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SourceSymbol {
    Plus,
    Minus,
}

impl SourceSymbol {
    pub const ALL: [SourceSymbol; 2] = [SourceSymbol::Plus, SourceSymbol::Minus];

    #[inline]
    pub fn value(self) -> f64 {
        match self {
            SourceSymbol::Plus => 1.0,
            SourceSymbol::Minus => -1.0,
        }
    }

    pub fn sample<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random::<bool>() {
            SourceSymbol::Plus
        } else {
            SourceSymbol::Minus
        }
    }
}

/// Posterior probabilities of the source symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolPosterior {
    pub plus: f64,
    pub minus: f64,
}

impl SymbolPosterior {
    pub const UNIFORM: SymbolPosterior = SymbolPosterior { plus: 0.5, minus: 0.5 };

    pub fn get(&self, s: SourceSymbol) -> f64 {
        match s {
            SourceSymbol::Plus => self.plus,
            SourceSymbol::Minus => self.minus,
        }
    }

    fn from_log_odds(log_odds: f64) -> Self {
        // log_odds = ln P(+)/P(−)
        let plus = 1.0 / (1.0 + (-log_odds).exp());
        let minus = 1.0 / (1.0 + log_odds.exp());
        Self { plus, minus }
    }

    /// Mixture density Σ_s P(s)·f_{U|S}(u|s).
    pub fn u_density(&self, u: f64, params: &ChannelParams) -> f64 {
        self.plus * pdf_u_given_s(u, SourceSymbol::Plus, params)
            + self.minus * pdf_u_given_s(u, SourceSymbol::Minus, params)
    }

    /// Mixture probability that U falls in (lo, hi].
    pub fn u_interval_prob(&self, lo: f64, hi: f64, params: &ChannelParams) -> f64 {
        self.plus * normal::interval_prob(lo - params.h1, hi - params.h1)
            + self.minus * normal::interval_prob(lo + params.h1, hi + params.h1)
    }
}

/// Sample of one block transmission over the first hop and the direct link.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionRecord {
    pub s: Vec<SourceSymbol>,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
}

impl TransmissionRecord {
    pub fn len(&self) -> usize {
        self.s.len()
    }

    pub fn is_empty(&self) -> bool {
        self.s.is_empty()
    }
}

/// f_{U|S}(u|s)
pub fn pdf_u_given_s(u: f64, s: SourceSymbol, params: &ChannelParams) -> f64 {
    normal::pdf_shifted(u, params.h1 * s.value())
}

/// f_{X|S}(x|s)
pub fn pdf_x_given_s(x: f64, s: SourceSymbol, params: &ChannelParams) -> f64 {
    normal::pdf_shifted(x, params.h3 * s.value())
}

/// Marginal density of U, an equal-weight two-component mixture.
pub fn pdf_u(u: f64, params: &ChannelParams) -> f64 {
    SymbolPosterior::UNIFORM.u_density(u, params)
}

/// P(S | X = x); P(+1|x) = 1/(1 + exp(−2·h3·x)).
pub fn posterior_s_given_x(x: f64, params: &ChannelParams) -> SymbolPosterior {
    SymbolPosterior::from_log_odds(2.0 * params.h3 * x)
}

/// P(S | X ∈ (lo, hi]) from Gaussian interval probabilities.
///
/// Far in the tails both interval probabilities can underflow; the posterior then
/// falls back to the point posterior at the finite edge nearest the bulk.
pub fn posterior_s_given_x_interval(lo: f64, hi: f64, params: &ChannelParams) -> SymbolPosterior {
    let h3 = params.h3;
    let p_plus = normal::interval_prob(lo - h3, hi - h3);
    let p_minus = normal::interval_prob(lo + h3, hi + h3);
    let total = p_plus + p_minus;
    if total > 0.0 && total.is_finite() {
        return SymbolPosterior {
            plus: p_plus / total,
            minus: p_minus / total,
        };
    }
    let anchor = if lo.is_finite() && (hi.is_infinite() || lo > 0.0) {
        lo
    } else if hi.is_finite() {
        hi
    } else {
        0.0
    };
    posterior_s_given_x(anchor, params)
}

/// f_{U|X}(u|x) = Σ_s P(s|x)·f_{U|S}(u|s)
pub fn pdf_u_given_x(u: f64, x: f64, params: &ChannelParams) -> f64 {
    posterior_s_given_x(x, params).u_density(u, params)
}

/// F_{Y|V}(t|v) = Φ(t − h2·v)
pub fn cdf_y_given_v(t: f64, v: f64, params: &ChannelParams) -> f64 {
    normal::cdf(t - params.h2 * v)
}

/// Draws one value from the marginal of U.
pub fn sample_u_marginal<R: Rng + ?Sized>(params: &ChannelParams, rng: &mut R) -> f64 {
    let s = SourceSymbol::sample(rng);
    let g: f64 = rng.sample(StandardNormal);
    params.h1 * s.value() + g
}

/// Samples `n` source symbols and the matching relay and direct-link observations.
pub fn sample_transmission<R: Rng + ?Sized>(
    n: usize,
    params: &ChannelParams,
    rng: &mut R,
) -> Result<TransmissionRecord> {
    if n == 0 {
        return Err(Error::InvalidParameter("transmission length must be at least 1".into()));
    }
    let mut s = Vec::with_capacity(n);
    let mut u = Vec::with_capacity(n);
    let mut x = Vec::with_capacity(n);
    for _ in 0..n {
        let sym = SourceSymbol::sample(rng);
        let gu: f64 = rng.sample(StandardNormal);
        let gx: f64 = rng.sample(StandardNormal);
        u.push(params.h1 * sym.value() + gu);
        x.push(params.h3 * sym.value() + gx);
        s.push(sym);
    }
    Ok(TransmissionRecord { s, u, x })
}

/// Passes the forwarded sequence through the relay → destination link.
pub fn sample_y<R: Rng + ?Sized>(v: &[f64], params: &ChannelParams, rng: &mut R) -> Vec<f64> {
    v.iter()
        .map(|&vi| {
            let g: f64 = rng.sample(StandardNormal);
            params.h2 * vi + g
        })
        .collect()
}
