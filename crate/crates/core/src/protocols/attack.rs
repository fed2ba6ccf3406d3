//! Recovering a logical Pauli letter from its displacement with two one-shot
//! phase-estimation runs, one with a real and one with an imaginary probe.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use super::oneshot::{run_probes, Run};
use super::{AttackConfig, AttackReport, Backend, CodewordSharing, ModeState};
use crate::error::{Result, SimError};
use crate::fock::{cached_displacement, fidelity, DisplacementMethod, FockVector, GkpParams};
use crate::phase_algebra::{canonical_phase, half_lattice, infer_letter, make_pauli, ComplexAmplitude, PauliLetter};

/// Loop phase read off a register outcome: `2θ = π k / 2^{n-1}`.
fn phase_from_outcome(k: usize, n: u32) -> f64 {
    canonical_phase(PI * k as f64 / (1u64 << (n - 1)) as f64)
}

/// `D(alpha)|phi⟩` from the closed-form matrix elements, normalized.
fn reference_state(alpha: ComplexAmplitude, mode: &ModeState) -> Result<FockVector> {
    let phi = mode.prepare()?;
    let d = cached_displacement(alpha, phi.dim(), DisplacementMethod::Analytic)?;
    let mut v = d.apply(&phi)?;
    v.normalize();
    Ok(v)
}

pub fn keystroke_attack(letter: PauliLetter, config: &AttackConfig) -> Result<AttackReport> {
    if config.n == 0 {
        return Err(SimError::InvalidParameter("n must be at least 1".into()));
    }
    let alpha = make_pauli(letter).alpha();
    let h = half_lattice();
    let beta_real = ComplexAmplitude::real(h)?;
    let beta_imag = ComplexAmplitude::imag(h)?;

    let runs: Vec<Run> = match config.sharing {
        CodewordSharing::Independent => vec![
            run_probes(config.n, &[beta_real], alpha, config.backend, config.variant, config.ancilla)?,
            run_probes(config.n, &[beta_imag], alpha, config.backend, config.variant, config.ancilla)?,
        ],
        CodewordSharing::Shared => {
            vec![run_probes(config.n, &[beta_real, beta_imag], alpha, config.backend, config.variant, config.ancilla)?]
        }
    };

    let (codeword_fidelity, mode_purity) = match config.backend {
        Backend::ExactAlgebra => (1.0, 1.0),
        Backend::Fock(mode) => {
            let reference = reference_state(alpha, &mode)?;
            let mut worst = 1.0f64;
            for run in &runs {
                let post = run.post_mode_state.as_ref().expect("Fock runs keep the mode");
                worst = worst.min(fidelity(post, &reference)?);
            }
            (worst.min(1.0), runs.iter().map(|r| r.mode_purity).fold(1.0, f64::min))
        }
    };
    let leakage_max = runs.iter().map(|r| r.leakage_max).fold(0.0, f64::max);
    let alpha_applications = runs.iter().map(|r| r.alpha_applications).sum();

    let mut outcomes = runs.into_iter().flat_map(|r| r.outcomes);
    let run_real = outcomes.next().expect("real probe");
    let run_imag = outcomes.next().expect("imaginary probe");
    let inferred_letter =
        infer_letter(phase_from_outcome(run_real.argmax, config.n), phase_from_outcome(run_imag.argmax, config.n))?;

    Ok(AttackReport {
        true_letter: letter,
        inferred_letter,
        run_real,
        run_imag,
        codeword_fidelity,
        leakage_max,
        mode_purity,
        alpha_applications,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepCell {
    pub letter: PauliLetter,
    pub delta: f64,
    pub cutoff: usize,
    pub n: u32,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub cell: SweepCell,
    pub report: Option<AttackReport>,
    pub error: Option<String>,
}

/// Cartesian sweep over letters × deltas × cutoffs × n, in that nesting order.
///
/// Each cell attacks the `mu = 0` codeword with the given envelope and cutoff,
/// using `base` for everything else; with an exact backend the envelope and
/// cutoff are carried along but unused. Rows come back in input order, and a
/// failing cell records its error instead of aborting the sweep.
pub fn attack_sweep(
    letters: &[PauliLetter],
    deltas: &[f64],
    cutoffs: &[usize],
    n_values: &[u32],
    base: &AttackConfig,
    threads: Option<usize>,
) -> Result<Vec<SweepRow>> {
    if letters.is_empty() || deltas.is_empty() || cutoffs.is_empty() || n_values.is_empty() {
        return Err(SimError::InvalidParameter("every sweep list must be non-empty".into()));
    }
    let mut cells = Vec::new();
    for &letter in letters {
        for &delta in deltas {
            for &cutoff in cutoffs {
                for &n in n_values {
                    cells.push(SweepCell { letter, delta, cutoff, n });
                }
            }
        }
    }
    let run_cell = |cell: &SweepCell| -> SweepRow {
        let attempt = (|| {
            let backend = match base.backend {
                Backend::ExactAlgebra => Backend::ExactAlgebra,
                Backend::Fock(_) => Backend::Fock(ModeState::Gkp(GkpParams::new(0, cell.delta, cell.cutoff)?)),
            };
            keystroke_attack(cell.letter, &AttackConfig { n: cell.n, backend, ..*base })
        })();
        match attempt {
            Ok(report) => SweepRow { cell: *cell, report: Some(report), error: None },
            Err(e) => SweepRow { cell: *cell, report: None, error: Some(e.to_string()) },
        }
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        builder = builder.num_threads(t);
    }
    let pool = builder.build().map_err(|e| SimError::InvalidParameter(format!("thread pool: {e}")))?;
    Ok(pool.install(|| cells.par_iter().map(run_cell).collect()))
}
