//! End-to-end protocols: superdense coding, textbook and one-shot phase
//! estimation, the cross-Kerr readout, and the Pauli-logging attack.

use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};
use crate::fock::{gkp_codeword, FockVector, GkpParams};
use crate::phase_algebra::{ComplexAmplitude, PauliLetter};

mod attack;
mod oneshot;
mod qpe;
mod superdense;

pub use attack::{attack_sweep, keystroke_attack, SweepCell, SweepRow};
pub use oneshot::{geometric_phase_channel, qpe_crosskerr, qpe_oneshot, GeometricPhaseOutput};
pub use qpe::{ell_delta, qft_qubits, qpe_outcome_distribution, qpe_standard, theta_from_loop_phase, MAX_STANDARD_QUBITS};
pub use superdense::{bits_to_string, decode_zz, parse_bits, superdense_dv, SuperdenseResult};

/// Initial state of the attacked mode.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ModeState {
    Gkp(GkpParams),
    Coherent { alpha: ComplexAmplitude, cutoff: usize },
    Vacuum { cutoff: usize },
}

impl ModeState {
    pub fn cutoff(&self) -> usize {
        match *self {
            ModeState::Gkp(p) => p.cutoff,
            ModeState::Coherent { cutoff, .. } | ModeState::Vacuum { cutoff } => cutoff,
        }
    }

    pub fn prepare(&self) -> Result<FockVector> {
        match *self {
            ModeState::Gkp(p) => gkp_codeword(&p),
            ModeState::Coherent { alpha, cutoff } => FockVector::coherent(alpha, cutoff),
            ModeState::Vacuum { cutoff } => FockVector::vacuum(cutoff),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Backend {
    /// Phases from the displacement group law; the mode is never discretized.
    ExactAlgebra,
    /// Dense simulation with the mode truncated to a number basis.
    Fock(ModeState),
}

/// How the phase-estimation ancilla is represented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ancilla {
    /// A `2^n`-level qudit.
    #[default]
    Qudit,
    /// An oscillator truncated at the given number of levels, at least `2^n`;
    /// only its lowest `2^n` levels are driven and read.
    Mode(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QpeConfig {
    pub n: u32,
    pub beta: ComplexAmplitude,
    pub backend: Backend,
    #[serde(default)]
    pub ancilla: Ancilla,
}

impl QpeConfig {
    pub fn exact(n: u32, beta: ComplexAmplitude) -> Self {
        QpeConfig { n, beta, backend: Backend::ExactAlgebra, ancilla: Ancilla::Qudit }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 || self.n > 16 {
            return Err(SimError::InvalidParameter(format!("n must be in 1..=16, got {}", self.n)));
        }
        if let Ancilla::Mode(m) = self.ancilla {
            if m < 1 << self.n {
                return Err(SimError::DimensionTooSmall { got: m, min: 1 << self.n });
            }
        }
        Ok(())
    }
}

/// Readout of the cross-Kerr register conditioned on finding mode `a` back
/// in its uniform superposition.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HeraldedReadout {
    pub distribution: Vec<f64>,
    pub success_probability: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QpeOutcome {
    pub n: u32,
    /// Eigenphase in `[0, π)` with `U = diag(1, e^{-2iθ})`.
    pub theta: f64,
    pub argmax: usize,
    pub distribution: Vec<f64>,
    pub ell: usize,
    pub delta: f64,
    #[serde(skip)]
    pub post_mode_state: Option<FockVector>,
    /// Number of times `D(alpha)` was applied during the run.
    pub alpha_applications: usize,
    pub leakage_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub heralded: Option<HeraldedReadout>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    OneShot,
    CrossKerr,
}

/// Whether the real-β and imaginary-β runs act on separate copies of the
/// mode or on one shared mode with a single `D(alpha)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodewordSharing {
    #[default]
    Independent,
    Shared,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttackConfig {
    pub n: u32,
    pub backend: Backend,
    #[serde(default)]
    pub variant: Variant,
    #[serde(default)]
    pub sharing: CodewordSharing,
    #[serde(default)]
    pub ancilla: Ancilla,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackReport {
    pub true_letter: PauliLetter,
    pub inferred_letter: PauliLetter,
    pub run_real: QpeOutcome,
    pub run_imag: QpeOutcome,
    /// Smallest fidelity of a post-attack mode against `D(alpha)|phi⟩`.
    pub codeword_fidelity: f64,
    pub leakage_max: f64,
    /// Smallest purity of a post-attack mode's reduced state.
    pub mode_purity: f64,
    pub alpha_applications: usize,
}
