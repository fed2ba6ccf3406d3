//! Textbook phase estimation: closed form and the n-qubit circuit.
//!
//! The eigenphase convention is `U|ψ⟩ = e^{-2iθ}|ψ⟩` with `θ = 2^{-n} π (ℓ + δ)`,
//! `ℓ ∈ {0, …, 2^n - 1}` and `δ ∈ [-1/2, 1/2)`; `θ` is read modulo `π`.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;

use super::QpeOutcome;
use crate::error::{Result, SimError};
use crate::hybrid::{argmax, hadamard, init_register, Preparation, RegisterState, SubsystemSpec};
use crate::phase_algebra::canonical_phase;

/// Largest register accepted by [`qpe_standard`].
pub const MAX_STANDARD_QUBITS: u32 = 10;

/// `(ℓ, δ)` for a phase `θ`.
pub fn ell_delta(n: u32, theta: f64) -> (usize, f64) {
    let size = 1usize << n;
    let x = theta / PI * size as f64;
    let nearest = (x + 0.5).floor();
    let delta = x - nearest;
    let ell = (nearest as i64).rem_euclid(size as i64) as usize;
    (ell, delta)
}

/// `θ` with `e^{-2iθ}` equal to `e^{i·loop_phase}`, reduced to `[0, π)`.
pub fn theta_from_loop_phase(loop_phase: f64) -> f64 {
    canonical_phase(-loop_phase) / 2.0
}

/// `p(k) = 2^{-2n} |Σ_j e^{2πi j (k - ℓ - δ)/2^n}|²` summed in closed form.
///
/// For `k ≠ ℓ` or `δ ≠ 0` this is `sin²(πδ) / (2^{2n} sin²(π(k - ℓ - δ)/2^n))`;
/// the removable point `k = ℓ, δ = 0` is exactly 1.
pub fn qpe_outcome_distribution(n: u32, theta: f64) -> Vec<f64> {
    let size = 1usize << n;
    let (ell, delta) = ell_delta(n, theta);
    let sf = size as f64;
    (0..size)
        .map(|k| {
            if delta == 0.0 {
                return if k == ell { 1.0 } else { 0.0 };
            }
            let offset = k as f64 - ell as f64 - delta;
            let num = (PI * delta).sin();
            let den = (PI * offset / sf).sin();
            num * num / (sf * sf * den * den)
        })
        .collect()
}

/// Quantum Fourier transform `|j⟩ ↦ 2^{-n/2} Σ_k e^{2πi jk/2^n}|k⟩` on qubits
/// `first .. first + n`, most significant first, from Hadamards, controlled
/// phases and a final reversal.
pub fn qft_qubits(state: &mut RegisterState, first: usize, n: usize) -> Result<()> {
    let h = hadamard();
    for t in 0..n {
        let target = first + t;
        state.apply_local(&h, target)?;
        for c in (t + 1)..n {
            let control = first + c;
            let angle = TAU / (1u64 << (c - t + 1)) as f64;
            let phase = Complex64::from_polar(1.0, angle);
            state.apply_diagonal(|d| if d[target] == 1 && d[control] == 1 { phase } else { Complex64::new(1.0, 0.0) });
        }
    }
    for t in 0..n / 2 {
        state.apply_swap(first + t, first + n - 1 - t)?;
    }
    Ok(())
}

/// Full circuit: `|+⟩^{⊗n}|1⟩`, controlled `U^{2^{n-1-k}}` from qubit `k`,
/// qubit QFT, exact readout of the first `n` qubits.
pub fn qpe_standard(n: u32, theta: f64) -> Result<QpeOutcome> {
    if n == 0 {
        return Err(SimError::InvalidParameter("n must be at least 1".into()));
    }
    if n > MAX_STANDARD_QUBITS {
        return Err(SimError::DimensionGuardExceeded { dim: 1 << (n + 1), limit: 1 << (MAX_STANDARD_QUBITS + 1) });
    }
    let width = n as usize;
    let specs = vec![SubsystemSpec::Qubit; width + 1];
    let mut preps = vec![Preparation::EqualSuperposition; width];
    preps.push(Preparation::Basis(1));
    let mut state = init_register(&specs, &preps)?;

    let eigen = width;
    for k in 0..width {
        let power = 1u64 << (width - 1 - k);
        let phase = Complex64::from_polar(1.0, -2.0 * theta * power as f64);
        let u = ndarray::Array2::from_diag(&ndarray::arr1(&[Complex64::new(1.0, 0.0), phase]));
        state.apply_controlled(k, eigen, &u)?;
    }
    qft_qubits(&mut state, 0, width)?;

    let readout: Vec<usize> = (0..width).collect();
    let distribution = state.marginal(&readout)?;
    let (ell, delta) = ell_delta(n, theta);
    Ok(QpeOutcome {
        n,
        theta,
        argmax: argmax(&distribution),
        distribution,
        ell,
        delta,
        post_mode_state: None,
        alpha_applications: 0,
        leakage_max: 0.0,
        heralded: None,
    })
}
