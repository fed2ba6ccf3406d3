//! Dense state vectors over ordered registers of qubits, qudits and truncated modes.
//!
//! Layout: subsystem 0 is the most significant factor, so the flat index of a
//! basis state `|d_0 d_1 … d_{m-1}⟩` is `Σ d_i · stride_i` with
//! `stride_i = Π_{k > i} dim_k`.
//!
//! Sampling uses `ChaCha8Rng::seed_from_u64(seed)` and draws one `f64` in
//! `[0, 1)` per measurement, so outcomes replicate across builds and platforms.

use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, SimError};
use crate::fock::{cached_displacement, check_displacement_range, leakage_levels, DisplacementMethod, FockVector};
use crate::phase_algebra::ComplexAmplitude;

/// Largest total register dimension we agree to allocate.
pub const DIMENSION_GUARD: usize = 1 << 24;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SubsystemSpec {
    Qubit,
    Qudit(usize),
    Mode(usize),
}

impl SubsystemSpec {
    pub fn dim(&self) -> usize {
        match *self {
            SubsystemSpec::Qubit => 2,
            SubsystemSpec::Qudit(d) | SubsystemSpec::Mode(d) => d,
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            SubsystemSpec::Qudit(d) if d < 2 => Err(SimError::DimensionTooSmall { got: d, min: 2 }),
            SubsystemSpec::Mode(n) if n < 1 => Err(SimError::DimensionTooSmall { got: n, min: 1 }),
            _ => Ok(()),
        }
    }
}

/// Initial state of one subsystem.
#[derive(Clone, Debug)]
pub enum Preparation {
    Basis(usize),
    /// `d^{-1/2} Σ_j |j⟩`; qubits and qudits only.
    EqualSuperposition,
    /// A single-mode state; modes only.
    Fock(FockVector),
    /// Arbitrary amplitudes, normalized on use.
    Amplitudes(Vec<Complex64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeasureMode {
    /// Full marginal; the collapsed state is the argmax branch.
    Exact,
    Sample(u64),
}

#[derive(Clone, Debug)]
pub struct MeasurementResult {
    pub outcome: usize,
    pub distribution: Vec<f64>,
    pub collapsed: RegisterState,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegisterState {
    specs: Vec<SubsystemSpec>,
    amps: Array1<Complex64>,
}

/// `d × d` discrete Fourier matrix with entries `d^{-1/2} e^{2πi jk/d}`.
pub fn dft_matrix(d: usize) -> Array2<Complex64> {
    let s = 1.0 / (d as f64).sqrt();
    Array2::from_shape_fn((d, d), |(k, j)| Complex64::from_polar(s, TAU * ((j * k) % d) as f64 / d as f64))
}

pub fn hadamard() -> Array2<Complex64> {
    let s = Complex64::new(FRAC_1_SQRT_2, 0.0);
    Array2::from_shape_vec((2, 2), vec![s, s, s, -s]).unwrap()
}

pub fn pauli_x() -> Array2<Complex64> {
    Array2::from_shape_vec((2, 2), vec![ZERO, ONE, ONE, ZERO]).unwrap()
}

pub fn pauli_y() -> Array2<Complex64> {
    let i = Complex64::new(0.0, 1.0);
    Array2::from_shape_vec((2, 2), vec![ZERO, -i, i, ZERO]).unwrap()
}

pub fn pauli_z() -> Array2<Complex64> {
    Array2::from_shape_vec((2, 2), vec![ONE, ZERO, ZERO, -ONE]).unwrap()
}

fn prepare_factor(spec: &SubsystemSpec, prep: &Preparation) -> Result<Vec<Complex64>> {
    let d = spec.dim();
    let mut v = vec![ZERO; d];
    match prep {
        Preparation::Basis(k) => {
            if *k >= d {
                return Err(SimError::BadAssignment(format!("basis index {k} outside dimension {d}")));
            }
            v[*k] = ONE;
        }
        Preparation::EqualSuperposition => {
            if matches!(spec, SubsystemSpec::Mode(_)) {
                return Err(SimError::BadAssignment("equal superposition requested for a mode".into()));
            }
            v.fill(Complex64::new(1.0 / (d as f64).sqrt(), 0.0));
        }
        Preparation::Fock(f) => {
            if !matches!(spec, SubsystemSpec::Mode(_)) {
                return Err(SimError::BadAssignment("Fock vector given for a non-mode subsystem".into()));
            }
            if f.dim() != d {
                return Err(SimError::DimensionMismatch { expected: d, got: f.dim() });
            }
            v.copy_from_slice(f.amplitudes().as_slice().expect("contiguous Fock vector"));
        }
        Preparation::Amplitudes(a) => {
            if a.len() != d {
                return Err(SimError::DimensionMismatch { expected: d, got: a.len() });
            }
            v.copy_from_slice(a);
        }
    }
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if !(norm.is_finite() && norm > 0.0) {
        return Err(SimError::BadAssignment("zero or non-finite preparation".into()));
    }
    v.iter_mut().for_each(|z| *z /= norm);
    Ok(v)
}

/// Product state `⊗_i prep_i`.
pub fn init_register(specs: &[SubsystemSpec], preps: &[Preparation]) -> Result<RegisterState> {
    if specs.is_empty() {
        return Err(SimError::BadAssignment("empty register".into()));
    }
    if specs.len() != preps.len() {
        return Err(SimError::BadAssignment(format!(
            "{} subsystems but {} preparations",
            specs.len(),
            preps.len()
        )));
    }
    let mut total = 1usize;
    for s in specs {
        s.validate()?;
        total = total
            .checked_mul(s.dim())
            .filter(|t| *t <= DIMENSION_GUARD)
            .ok_or(SimError::DimensionGuardExceeded { dim: total.saturating_mul(s.dim()), limit: DIMENSION_GUARD })?;
    }
    let mut amps = vec![ONE];
    for (spec, prep) in specs.iter().zip(preps) {
        let factor = prepare_factor(spec, prep)?;
        let mut next = Vec::with_capacity(amps.len() * factor.len());
        for a in &amps {
            next.extend(factor.iter().map(|f| a * f));
        }
        amps = next;
    }
    Ok(RegisterState { specs: specs.to_vec(), amps: Array1::from(amps) })
}

impl RegisterState {
    /// A register holding the given flat amplitudes, normalized.
    pub fn from_amplitudes(specs: &[SubsystemSpec], amps: Vec<Complex64>) -> Result<Self> {
        let mut total = 1usize;
        for s in specs {
            s.validate()?;
            total = total.saturating_mul(s.dim());
        }
        if specs.is_empty() || total > DIMENSION_GUARD {
            return Err(SimError::DimensionGuardExceeded { dim: total, limit: DIMENSION_GUARD });
        }
        if amps.len() != total {
            return Err(SimError::DimensionMismatch { expected: total, got: amps.len() });
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(SimError::BadAssignment("zero or non-finite amplitudes".into()));
        }
        Ok(RegisterState { specs: specs.to_vec(), amps: Array1::from_iter(amps.into_iter().map(|z| z / norm)) })
    }

    pub fn specs(&self) -> &[SubsystemSpec] {
        &self.specs
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_index(&self, idx: usize) -> Result<()> {
        if idx >= self.specs.len() {
            Err(SimError::IndexOutOfRange { index: idx, len: self.specs.len() })
        } else {
            Ok(())
        }
    }

    fn require_qubit(&self, idx: usize) -> Result<()> {
        self.check_index(idx)?;
        if self.specs[idx] == SubsystemSpec::Qubit {
            Ok(())
        } else {
            Err(SimError::NotAQubit(idx))
        }
    }

    fn stride(&self, idx: usize) -> usize {
        self.specs[idx + 1..].iter().map(SubsystemSpec::dim).product()
    }

    /// Digits of a flat basis index, most significant first.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.specs.len()];
        for (i, spec) in self.specs.iter().enumerate().rev() {
            out[i] = index % spec.dim();
            index /= spec.dim();
        }
        out
    }

    /// Apply a per-fiber operator along subsystem `target`.
    ///
    /// `choose` sees the digits of every other subsystem (the target's digit
    /// is zero) and returns the operator for that fiber, or `None` to leave it.
    fn apply_fibers<'a, F>(&mut self, target: usize, mut choose: F) -> Result<()>
    where
        F: FnMut(&[usize]) -> Result<Option<&'a Array2<Complex64>>>,
    {
        self.check_index(target)?;
        let d = self.specs[target].dim();
        let inner = self.stride(target);
        let outer = self.dim() / (d * inner);
        let mut fiber = vec![ZERO; d];
        for o in 0..outer {
            for i in 0..inner {
                let base = o * d * inner + i;
                let digits = self.digits(base);
                let Some(op) = choose(&digits)? else { continue };
                if op.nrows() != d || op.ncols() != d {
                    return Err(SimError::DimensionMismatch { expected: d, got: op.nrows() });
                }
                for (k, f) in fiber.iter_mut().enumerate() {
                    *f = self.amps[base + k * inner];
                }
                for r in 0..d {
                    let mut acc = ZERO;
                    for (c, f) in fiber.iter().enumerate() {
                        acc += op[[r, c]] * f;
                    }
                    self.amps[base + r * inner] = acc;
                }
            }
        }
        Ok(())
    }

    /// Multiply every basis amplitude by `phase(digits)`.
    pub fn apply_diagonal<F>(&mut self, mut phase: F)
    where
        F: FnMut(&[usize]) -> Complex64,
    {
        for idx in 0..self.amps.len() {
            let digits = self.digits(idx);
            self.amps[idx] *= phase(&digits);
        }
    }

    pub fn apply_local(&mut self, op: &Array2<Complex64>, idx: usize) -> Result<()> {
        self.check_index(idx)?;
        let d = self.specs[idx].dim();
        if op.nrows() != d || op.ncols() != d {
            return Err(SimError::DimensionMismatch { expected: d, got: op.nrows() });
        }
        self.apply_fibers(idx, |_| Ok(Some(op)))
    }

    /// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ op` with a qubit control.
    pub fn apply_controlled(&mut self, control: usize, target: usize, op: &Array2<Complex64>) -> Result<()> {
        self.require_qubit(control)?;
        self.check_index(target)?;
        if control == target {
            return Err(SimError::BadAssignment("control and target coincide".into()));
        }
        self.apply_fibers(target, |digits| Ok((digits[control] == 1).then_some(op)))
    }

    pub fn apply_cnot(&mut self, control: usize, target: usize) -> Result<()> {
        self.require_qubit(target)?;
        let x = pauli_x();
        self.apply_controlled(control, target, &x)
    }

    pub fn apply_swap(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_index(a)?;
        self.check_index(b)?;
        if self.specs[a] != self.specs[b] {
            return Err(SimError::DimensionMismatch { expected: self.specs[a].dim(), got: self.specs[b].dim() });
        }
        if a == b {
            return Ok(());
        }
        let (sa, sb) = (self.stride(a), self.stride(b));
        let mut swapped = self.amps.clone();
        for idx in 0..self.amps.len() {
            let digits = self.digits(idx);
            let (da, db) = (digits[a], digits[b]);
            let target = idx - da * sa - db * sb + db * sa + da * sb;
            swapped[target] = self.amps[idx];
        }
        self.amps = swapped;
        Ok(())
    }

    fn require_mode(&self, idx: usize) -> Result<usize> {
        self.check_index(idx)?;
        match self.specs[idx] {
            SubsystemSpec::Mode(n) => Ok(n),
            other => Err(SimError::BadAssignment(format!("subsystem {idx} is {other:?}, not a mode"))),
        }
    }

    /// `|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ D(beta)`.
    pub fn apply_qubit_controlled_displacement(
        &mut self,
        control: usize,
        mode: usize,
        beta: ComplexAmplitude,
    ) -> Result<()> {
        self.require_qubit(control)?;
        let n = self.require_mode(mode)?;
        let d = cached_displacement(beta, n, DisplacementMethod::Exponential)?;
        self.apply_fibers(mode, |digits| Ok((digits[control] == 1).then_some(d.entries())))
    }

    /// `Σ_j |j⟩⟨j| ⊗ (|0⟩⟨0| ⊗ I + |1⟩⟨1| ⊗ D(sign · j · beta))`.
    pub fn apply_number_controlled_displacement(
        &mut self,
        qudit: usize,
        qubit: usize,
        mode: usize,
        beta: ComplexAmplitude,
        sign: i32,
    ) -> Result<()> {
        self.check_index(qudit)?;
        let levels = self.specs[qudit].dim();
        self.apply_number_controlled_displacement_levels(qudit, qubit, mode, beta, sign, levels)
    }

    /// As [`Self::apply_number_controlled_displacement`], driving only control
    /// levels `j < levels`; fibers with higher `j` are left alone.
    pub fn apply_number_controlled_displacement_levels(
        &mut self,
        qudit: usize,
        qubit: usize,
        mode: usize,
        beta: ComplexAmplitude,
        sign: i32,
        levels: usize,
    ) -> Result<()> {
        if sign != 1 && sign != -1 {
            return Err(SimError::InvalidParameter(format!("sign must be +1 or -1, got {sign}")));
        }
        self.check_index(qudit)?;
        self.require_qubit(qubit)?;
        let n = self.require_mode(mode)?;
        let levels = levels.clamp(1, self.specs[qudit].dim());
        check_displacement_range(beta.scale((levels - 1) as f64), n)?;
        let ops = (0..levels)
            .map(|j| cached_displacement(beta.scale((sign * j as i32) as f64), n, DisplacementMethod::Exponential))
            .collect::<Result<Vec<_>>>()?;
        self.apply_fibers(mode, |digits| {
            let j = digits[qudit];
            Ok((digits[qubit] == 1 && j > 0 && j < levels).then(|| ops[j].entries()))
        })
    }

    pub fn qft_qudit(&mut self, idx: usize) -> Result<()> {
        self.check_index(idx)?;
        match self.specs[idx] {
            SubsystemSpec::Qudit(d) => self.apply_local(&dft_matrix(d), idx),
            SubsystemSpec::Qubit => self.apply_local(&dft_matrix(2), idx),
            SubsystemSpec::Mode(n) => Err(SimError::DimensionMismatch { expected: 0, got: n }),
        }
    }

    /// `exp(2πi/d · n_a ⊗ n_b)`, diagonal in the joint number basis.
    pub fn cross_kerr(&mut self, a: usize, b: usize, d: usize) -> Result<()> {
        self.check_index(a)?;
        self.check_index(b)?;
        if a == b || d == 0 {
            return Err(SimError::BadAssignment("cross-Kerr needs two distinct subsystems and d > 0".into()));
        }
        self.apply_diagonal(|digits| {
            let jk = (digits[a] as u128 * digits[b] as u128) % d as u128;
            Complex64::from_polar(1.0, TAU * jk as f64 / d as f64)
        });
        Ok(())
    }

    /// Joint distribution of the listed subsystems, flattened most significant first.
    pub fn marginal(&self, indices: &[usize]) -> Result<Vec<f64>> {
        for &i in indices {
            self.check_index(i)?;
        }
        let size: usize = indices.iter().map(|&i| self.specs[i].dim()).product();
        let mut dist = vec![0.0; size];
        for (idx, a) in self.amps.iter().enumerate() {
            let p = a.norm_sqr();
            if p == 0.0 {
                continue;
            }
            let digits = self.digits(idx);
            let key = indices.iter().fold(0, |acc, &i| acc * self.specs[i].dim() + digits[i]);
            dist[key] += p;
        }
        Ok(dist)
    }

    /// Reduced density matrix of one subsystem.
    pub fn reduced_density(&self, idx: usize) -> Result<Array2<Complex64>> {
        self.check_index(idx)?;
        let d = self.specs[idx].dim();
        let inner = self.stride(idx);
        let outer = self.dim() / (d * inner);
        let mut rho = Array2::zeros((d, d));
        for o in 0..outer {
            for i in 0..inner {
                let base = o * d * inner + i;
                for r in 0..d {
                    let ar = self.amps[base + r * inner];
                    if ar == ZERO {
                        continue;
                    }
                    for c in 0..d {
                        rho[[r, c]] += ar * self.amps[base + c * inner].conj();
                    }
                }
            }
        }
        Ok(rho)
    }

    /// `Tr ρ²` of one subsystem.
    pub fn purity(&self, idx: usize) -> Result<f64> {
        let rho = self.reduced_density(idx)?;
        Ok(rho.iter().map(|z| z.norm_sqr()).sum())
    }

    /// `⟨ψ|ρ_idx|ψ⟩` for a pure reference state on one subsystem.
    pub fn subsystem_fidelity(&self, idx: usize, reference: &[Complex64]) -> Result<f64> {
        self.check_index(idx)?;
        let d = self.specs[idx].dim();
        if reference.len() != d {
            return Err(SimError::DimensionMismatch { expected: d, got: reference.len() });
        }
        let inner = self.stride(idx);
        let outer = self.dim() / (d * inner);
        let mut total = 0.0;
        for o in 0..outer {
            for i in 0..inner {
                let base = o * d * inner + i;
                let overlap: Complex64 =
                    (0..d).map(|k| reference[k].conj() * self.amps[base + k * inner]).sum();
                total += overlap.norm_sqr();
            }
        }
        Ok(total)
    }

    /// Probability mass of a mode's reduced state in its top `⌈N/10⌉` levels.
    pub fn mode_leakage(&self, idx: usize) -> Result<f64> {
        let n = self.require_mode(idx)?;
        let dist = self.marginal(&[idx])?;
        Ok(dist[n - leakage_levels(n)..].iter().sum())
    }

    /// Largest leakage over every mode in the register.
    pub fn max_mode_leakage(&self) -> f64 {
        self.specs
            .iter()
            .enumerate()
            .filter(|(_, s)| matches!(s, SubsystemSpec::Mode(_)))
            .map(|(i, _)| self.mode_leakage(i).unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    /// Project subsystem `idx` onto `|outcome⟩` and renormalize.
    pub fn collapse(&self, idx: usize, outcome: usize) -> Result<RegisterState> {
        self.check_index(idx)?;
        let d = self.specs[idx].dim();
        if outcome >= d {
            return Err(SimError::BadAssignment(format!("outcome {outcome} outside dimension {d}")));
        }
        let inner = self.stride(idx);
        let mut amps = self.amps.clone();
        for (flat, a) in amps.iter_mut().enumerate() {
            if (flat / inner) % d != outcome {
                *a = ZERO;
            }
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            amps.mapv_inplace(|z| z / norm);
        }
        Ok(RegisterState { specs: self.specs.clone(), amps })
    }

    pub fn measure(&self, idx: usize, mode: MeasureMode) -> Result<MeasurementResult> {
        let mut distribution = self.marginal(&[idx])?;
        let total: f64 = distribution.iter().sum();
        if total > 0.0 {
            distribution.iter_mut().for_each(|p| *p /= total);
        }
        let outcome = match mode {
            MeasureMode::Exact => argmax(&distribution),
            MeasureMode::Sample(seed) => sample_index(&distribution, seed),
        };
        let collapsed = self.collapse(idx, outcome)?;
        Ok(MeasurementResult { outcome, distribution, collapsed })
    }
}

/// First index of the largest entry.
pub fn argmax(values: &[f64]) -> usize {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
        .0
}

/// Inverse-CDF draw with a seeded ChaCha8 stream.
pub fn sample_index(distribution: &[f64], seed: u64) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (i, p) in distribution.iter().enumerate() {
        acc += p;
        if u < acc {
            return i;
        }
    }
    // Rounding can leave acc slightly below 1; fall back to the last supported outcome.
    distribution.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}
