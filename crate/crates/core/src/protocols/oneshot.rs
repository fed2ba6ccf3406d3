//! One-shot phase estimation with an oscillator-style ancilla, and the
//! single-qubit geometric phase channel it is built from.
//!
//! Register layout per probe is `[a, b]` (Fourier readout) or `[a, a', b]`
//! (cross-Kerr readout); probes are laid out in order and the attacked mode,
//! when simulated, comes last.

use ndarray::Array2;
use num_complex::Complex64;

use super::qpe::{ell_delta, theta_from_loop_phase};
use super::{Ancilla, Backend, HeraldedReadout, QpeConfig, QpeOutcome, Variant};
use crate::error::{Result, SimError};
use crate::fock::{cached_displacement, DisplacementMethod, FockVector, LEAKAGE_LIMIT, TAU_TRUNC};
use crate::hybrid::{argmax, dft_matrix, init_register, Preparation, RegisterState, SubsystemSpec};
use crate::phase_algebra::{compose, loop_phase, ComplexAmplitude, PhasedDisplacement, TAU_AMP};

#[derive(Clone, Debug, PartialEq)]
pub struct GeometricPhaseOutput {
    pub qubit: [Complex64; 2],
    pub mode: FockVector,
    /// Second Schmidt weight of the qubit–mode split.
    pub residue: f64,
    pub leakage_max: f64,
}

fn leakage_guard(state: &RegisterState, mode: usize, worst: &mut f64) -> Result<()> {
    let leak = state.mode_leakage(mode)?;
    *worst = worst.max(leak);
    if leak >= LEAKAGE_LIMIT {
        return Err(SimError::TruncationRisk(format!(
            "mode leakage {leak:e} reached the limit {LEAKAGE_LIMIT:e}; raise the cutoff"
        )));
    }
    Ok(())
}

/// Controlled `D(beta)`, `D(alpha)` on the mode, controlled `D(-beta)`, with
/// the qubit–mode product structure of the result checked.
pub fn geometric_phase_channel(
    alpha: ComplexAmplitude,
    beta: ComplexAmplitude,
    psi: [Complex64; 2],
    phi: &FockVector,
) -> Result<GeometricPhaseOutput> {
    let n = phi.dim();
    let mut state = init_register(
        &[SubsystemSpec::Qubit, SubsystemSpec::Mode(n)],
        &[Preparation::Amplitudes(psi.to_vec()), Preparation::Fock(phi.clone())],
    )?;
    let mut leakage_max = 0.0;
    leakage_guard(&state, 1, &mut leakage_max)?;
    state.apply_qubit_controlled_displacement(0, 1, beta)?;
    leakage_guard(&state, 1, &mut leakage_max)?;
    let d_alpha = cached_displacement(alpha, n, DisplacementMethod::Exponential)?;
    state.apply_local(d_alpha.entries(), 1)?;
    leakage_guard(&state, 1, &mut leakage_max)?;
    state.apply_qubit_controlled_displacement(0, 1, -beta)?;
    leakage_guard(&state, 1, &mut leakage_max)?;

    let amps = state.amplitudes();
    let rows = [amps.slice(ndarray::s![..n]), amps.slice(ndarray::s![n..])];
    let dot = |x: usize, y: usize| -> Complex64 { rows[x].iter().zip(rows[y].iter()).map(|(a, b)| a.conj() * b).sum() };
    let (g00, g11, g01) = (dot(0, 0).re, dot(1, 1).re, dot(0, 1));
    // Eigenvalues of the 2×2 Gram matrix are the Schmidt weights.
    let tr = g00 + g11;
    let det = (g00 * g11 - g01.norm_sqr()).max(0.0);
    let residue = (tr - (tr * tr - 4.0 * det).max(0.0).sqrt()) / 2.0;
    if residue > TAU_TRUNC {
        return Err(SimError::EntanglementResidue(residue));
    }

    let lead = if g00 >= g11 { 0 } else { 1 };
    let norm = rows[lead].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let reference = rows[lead].mapv(|z| z / norm);
    let qubit = [0, 1].map(|r| reference.iter().zip(rows[r].iter()).map(|(a, b)| a.conj() * b).sum());
    let mode = FockVector::from_amplitudes(reference)?;
    Ok(GeometricPhaseOutput { qubit, mode, residue, leakage_max })
}

/// Phase-estimation probe: which subsystems it owns and its displacement.
struct Probe {
    a: usize,
    a_prime: Option<usize>,
    b: usize,
    beta: ComplexAmplitude,
}

/// Result of one register evolution with one or more probes sharing a single `D(alpha)`.
pub(crate) struct Run {
    pub outcomes: Vec<QpeOutcome>,
    pub post_mode_state: Option<FockVector>,
    pub mode_purity: f64,
    pub leakage_max: f64,
    pub alpha_applications: usize,
}

fn ancilla_spec(ancilla: Ancilla, size: usize) -> SubsystemSpec {
    match ancilla {
        Ancilla::Qudit => SubsystemSpec::Qudit(size),
        Ancilla::Mode(m) => SubsystemSpec::Mode(m),
    }
}

fn ancilla_prep(ancilla: Ancilla, size: usize) -> Preparation {
    match ancilla {
        Ancilla::Qudit => Preparation::EqualSuperposition,
        Ancilla::Mode(m) => {
            let mut v = vec![Complex64::new(0.0, 0.0); m];
            v[..size].fill(Complex64::new(1.0, 0.0));
            Preparation::Amplitudes(v)
        }
    }
}

/// `size`-point DFT on the lowest levels of a `dim`-level subsystem, identity above.
fn embedded_dft(size: usize, dim: usize, inverse: bool) -> Array2<Complex64> {
    let mut m = Array2::eye(dim);
    let f = dft_matrix(size);
    let f = if inverse { f.t().mapv(|z| z.conj()) } else { f };
    m.slice_mut(ndarray::s![..size, ..size]).assign(&f);
    m
}

/// The branch operator `D(-jβ)…D(α)…D(jβ)` for one basis state of the probe registers.
fn branch_operator(digits: &[usize], probes: &[Probe], alpha: ComplexAmplitude, size: usize) -> PhasedDisplacement {
    let shift = |p: &Probe, sign: f64| -> Option<PhasedDisplacement> {
        let j = digits[p.a];
        (digits[p.b] == 1 && j > 0 && j < size).then(|| PhasedDisplacement::displacement(p.beta.scale(sign * j as f64)))
    };
    let mut current = PhasedDisplacement::identity();
    for p in probes {
        if let Some(d) = shift(p, 1.0) {
            current = compose(&d, &current);
        }
    }
    current = compose(&PhasedDisplacement::displacement(alpha), &current);
    for p in probes.iter().rev() {
        if let Some(d) = shift(p, -1.0) {
            current = compose(&d, &current);
        }
    }
    current
}

pub(crate) fn run_probes(
    n: u32,
    betas: &[ComplexAmplitude],
    alpha: ComplexAmplitude,
    backend: Backend,
    variant: Variant,
    ancilla: Ancilla,
) -> Result<Run> {
    QpeConfig { n, beta: ComplexAmplitude::ZERO, backend, ancilla }.validate()?;
    let size = 1usize << n;

    let mut specs = Vec::new();
    let mut preps = Vec::new();
    let mut probes = Vec::new();
    for &beta in betas {
        let a = specs.len();
        specs.push(ancilla_spec(ancilla, size));
        preps.push(ancilla_prep(ancilla, size));
        let a_prime = (variant == Variant::CrossKerr).then(|| {
            specs.push(ancilla_spec(ancilla, size));
            preps.push(ancilla_prep(ancilla, size));
            specs.len() - 1
        });
        specs.push(SubsystemSpec::Qubit);
        preps.push(Preparation::Basis(1));
        probes.push(Probe { a, a_prime, b: specs.len() - 1, beta });
    }
    let mode = match backend {
        Backend::ExactAlgebra => None,
        Backend::Fock(ms) => {
            let phi = ms.prepare()?;
            specs.push(SubsystemSpec::Mode(phi.dim()));
            preps.push(Preparation::Fock(phi));
            Some(specs.len() - 1)
        }
    };
    let mut state = init_register(&specs, &preps)?;

    let mut leakage_max = 0.0;
    let mut alpha_applications = 0;
    match mode {
        Some(c) => {
            let cutoff = specs[c].dim();
            leakage_guard(&state, c, &mut leakage_max)?;
            for p in &probes {
                state.apply_number_controlled_displacement_levels(p.a, p.b, c, p.beta, 1, size)?;
                leakage_guard(&state, c, &mut leakage_max)?;
            }
            let d_alpha = cached_displacement(alpha, cutoff, DisplacementMethod::Exponential)?;
            state.apply_local(d_alpha.entries(), c)?;
            alpha_applications += 1;
            leakage_guard(&state, c, &mut leakage_max)?;
            for p in probes.iter().rev() {
                state.apply_number_controlled_displacement_levels(p.a, p.b, c, p.beta, -1, size)?;
                leakage_guard(&state, c, &mut leakage_max)?;
            }
        }
        None => {
            alpha_applications += 1;
            // Every branch must end in the same displacement for the mode to factor out.
            let mut mismatch = 0.0f64;
            state.apply_diagonal(|digits| {
                let op = branch_operator(digits, &probes, alpha, size);
                mismatch = mismatch.max((op.alpha().value() - alpha.value()).norm());
                Complex64::from_polar(1.0, op.phase())
            });
            if mismatch > TAU_AMP * (1.0 + alpha.norm()) {
                return Err(SimError::EntanglementResidue(mismatch));
            }
        }
    }

    let mut outcomes = Vec::with_capacity(probes.len());
    for p in &probes {
        let dim = specs[p.a].dim();
        let readout = match p.a_prime {
            None => {
                state.apply_local(&embedded_dft(size, dim, false), p.a)?;
                p.a
            }
            Some(ap) => {
                state.cross_kerr(p.a, ap, size)?;
                ap
            }
        };
        let distribution = state.marginal(&[readout])?[..size].to_vec();
        let heralded = match p.a_prime {
            None => None,
            Some(ap) => {
                let mut probe_state = state.clone();
                probe_state.apply_local(&embedded_dft(size, dim, true), p.a)?;
                let success_probability = probe_state.marginal(&[p.a])?[0];
                let conditioned = probe_state.collapse(p.a, 0)?;
                let distribution = conditioned.marginal(&[ap])?[..size].to_vec();
                Some(HeraldedReadout { distribution, success_probability })
            }
        };
        let theta = theta_from_loop_phase(loop_phase(alpha, p.beta));
        let (ell, delta) = ell_delta(n, theta);
        outcomes.push(QpeOutcome {
            n,
            theta,
            argmax: argmax(&distribution),
            distribution,
            ell,
            delta,
            post_mode_state: None,
            alpha_applications,
            leakage_max,
            heralded,
        });
    }

    let (post_mode_state, mode_purity) = match mode {
        None => (None, 1.0),
        Some(c) => (Some(dominant_mode_fiber(&state, specs[c].dim())?), state.purity(c)?),
    };
    for o in &mut outcomes {
        o.post_mode_state.clone_from(&post_mode_state);
    }
    Ok(Run { outcomes, post_mode_state, mode_purity, leakage_max, alpha_applications })
}

/// Mode amplitudes of the heaviest fiber of a register whose last factor is the mode.
fn dominant_mode_fiber(state: &RegisterState, cutoff: usize) -> Result<FockVector> {
    let amps = state.amplitudes().as_slice().expect("contiguous register");
    let best = amps
        .chunks(cutoff)
        .max_by(|x, y| {
            let nx: f64 = x.iter().map(|z| z.norm_sqr()).sum();
            let ny: f64 = y.iter().map(|z| z.norm_sqr()).sum();
            nx.total_cmp(&ny)
        })
        .expect("non-empty register");
    let mut v = FockVector::from_amplitudes(ndarray::Array1::from(best.to_vec()))?;
    v.normalize();
    Ok(v)
}

fn single(config: &QpeConfig, alpha: ComplexAmplitude, variant: Variant) -> Result<QpeOutcome> {
    config.validate()?;
    let run = run_probes(config.n, &[config.beta], alpha, config.backend, variant, config.ancilla)?;
    Ok(run.outcomes.into_iter().next().expect("one probe"))
}

/// Merged protocol: uniform ancilla, number-controlled `D(jβ)`, one `D(alpha)`,
/// the inverse controlled displacement, ancilla Fourier transform, exact readout.
pub fn qpe_oneshot(config: &QpeConfig, alpha: ComplexAmplitude) -> Result<QpeOutcome> {
    single(config, alpha, Variant::OneShot)
}

/// As [`qpe_oneshot`], with the Fourier transform replaced by a cross-Kerr
/// coupling to a second uniform ancilla `a'`, which is read out.
///
/// The outcome also carries the `a'` readout conditioned on `a` being found in
/// its uniform superposition.
pub fn qpe_crosskerr(config: &QpeConfig, alpha: ComplexAmplitude) -> Result<QpeOutcome> {
    single(config, alpha, Variant::CrossKerr)
}
