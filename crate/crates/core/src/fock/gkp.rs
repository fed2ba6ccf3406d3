//! Finite-energy GKP codewords in the number basis.
//!
//! The ideal codeword is a comb of position eigenstates at `q = (2s + mu)√π`.
//! Each tooth is replaced by a Gaussian of width `delta` and the comb is
//! weighted by a Gaussian envelope `exp(-delta² q_s² / 2)`.

use std::f64::consts::PI;

use ndarray::Array1;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{check_dim, FockVector, LEAKAGE_LIMIT};
use crate::error::{Result, SimError};

/// Largest lattice weight we are willing to drop.
const DROPPED_WEIGHT: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GkpParams {
    pub mu: u8,
    pub delta: f64,
    pub cutoff: usize,
    pub s_max: usize,
}

impl GkpParams {
    /// Parameters with the smallest `s_max` that satisfies the dropped-weight bound.
    pub fn new(mu: u8, delta: f64, cutoff: usize) -> Result<Self> {
        if !(delta.is_finite() && delta > 0.0) {
            return Err(SimError::InvalidParameter(format!("delta must be positive, got {delta}")));
        }
        let params = GkpParams { mu, delta, cutoff, s_max: Self::minimal_s_max(delta) };
        params.validate()?;
        Ok(params)
    }

    pub fn with_s_max(mut self, s_max: usize) -> Result<Self> {
        self.s_max = s_max;
        self.validate()?;
        Ok(self)
    }

    pub fn minimal_s_max(delta: f64) -> usize {
        // exp(-π δ² (2s + 2)² / 2) < DROPPED_WEIGHT
        let bound = (-2.0 * DROPPED_WEIGHT.ln() / (PI * delta * delta)).sqrt();
        let s = ((bound - 2.0) / 2.0).floor() + 1.0;
        s.max(0.0) as usize
    }

    /// Weight of the first lattice site outside `s_max`.
    pub fn dropped_weight(&self) -> f64 {
        let t = 2.0 * self.s_max as f64 + 2.0;
        (-PI * self.delta * self.delta * t * t / 2.0).exp()
    }

    pub fn validate(&self) -> Result<()> {
        if self.mu > 1 {
            return Err(SimError::InvalidParameter(format!("mu must be 0 or 1, got {}", self.mu)));
        }
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(SimError::InvalidParameter(format!("delta must be positive, got {}", self.delta)));
        }
        check_dim(self.cutoff, 8)?;
        if self.dropped_weight() >= DROPPED_WEIGHT {
            return Err(SimError::InvalidParameter(format!(
                "s_max = {} drops lattice weight {:e}",
                self.s_max,
                self.dropped_weight()
            )));
        }
        Ok(())
    }

    pub fn with_mu(mut self, mu: u8) -> Result<Self> {
        self.mu = mu;
        self.validate()?;
        Ok(self)
    }
}

/// Normalized Gaussian `exp(-(q - center)² / (2 width²))` in the number basis,
/// truncated to `n` levels (not renormalized after truncation).
///
/// Uses the overlap recursion
/// `(1 - r) √(k+1) c_{k+1} = r √k c_{k-1} + b c_k` with
/// `r = (1 - 1/width²)/2` and `b = center / (√2 width²)`.
pub fn squeezed_position_state(center: f64, width: f64, n: usize) -> Result<Array1<Complex64>> {
    check_dim(n, 1)?;
    if !(width.is_finite() && width > 0.0) {
        return Err(SimError::InvalidParameter(format!("width must be positive, got {width}")));
    }
    let w2 = width * width;
    let r = (1.0 - 1.0 / w2) / 2.0;
    let b = center / (2f64.sqrt() * w2);
    let a_quad = (1.0 + 1.0 / w2) / 2.0;
    // ⟨0|g⟩ for the unnormalized Gaussian, then divide by its norm (width √π)^{1/2}.
    let c0 = PI.powf(-0.25) * (PI / a_quad).sqrt() * (-center * center / (2.0 * (1.0 + w2))).exp()
        / (width * PI.sqrt()).sqrt();

    let mut c = vec![0.0f64; n];
    c[0] = c0;
    if n > 1 {
        c[1] = b * c0 / (1.0 - r);
    }
    for k in 1..n.saturating_sub(1) {
        let kf = k as f64;
        c[k + 1] = (r * kf.sqrt() * c[k - 1] + b * c[k]) / ((1.0 - r) * (kf + 1.0).sqrt());
    }
    Ok(Array1::from_iter(c.into_iter().map(|x| Complex64::new(x, 0.0))))
}

/// Normalized finite-energy codeword `|mu_delta⟩`.
pub fn gkp_codeword(params: &GkpParams) -> Result<FockVector> {
    params.validate()?;
    let n = params.cutoff;
    let mut amps = Array1::<Complex64>::zeros(n);
    let s_max = params.s_max as i64;
    for s in -s_max..=s_max {
        let q_s = (2.0 * s as f64 + params.mu as f64) * PI.sqrt();
        let weight = (-params.delta * params.delta * q_s * q_s / 2.0).exp();
        let tooth = squeezed_position_state(q_s, params.delta, n)?;
        amps.scaled_add(Complex64::new(weight, 0.0), &tooth);
    }
    let mut v = FockVector::from_amplitudes(amps)?;
    v.normalize();
    let leak = v.leakage();
    if leak >= LEAKAGE_LIMIT {
        return Err(SimError::TruncationRisk(format!(
            "GKP codeword leakage {leak:e} at cutoff {n}; raise the cutoff or the envelope delta"
        )));
    }
    Ok(v)
}
