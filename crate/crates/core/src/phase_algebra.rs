//! Exact algebra of phased single-mode displacement operators.
//!
//! A [`PhasedDisplacement`] stands for the operator `e^{i·phase} D(alpha)` with
//! `D(alpha) = exp(alpha a† - conj(alpha) a)`. Products are closed in this
//! representation because every higher commutator of the generators is a
//! scalar, so composition only ever moves the displacement and accumulates a
//! phase. Nothing here touches a matrix.

use std::f64::consts::{FRAC_PI_2, PI, TAU};
use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Result, SimError};

/// Phase tolerance of the exact layer, in radians.
pub const TAU_PHASE: f64 = 1e-9;

/// Amplitude tolerance used when comparing displacements.
pub const TAU_AMP: f64 = 1e-12;

/// Sign of the composition phase:
/// `D(a) D(b) = exp(i · COMPOSITION_SIGN · Im(a · conj(b))) D(a + b)`.
///
/// Fixed at `+1` by the truncated-Fock comparison in the `fock` tests
/// (`composition_sign_matches_fock_matrices`).
pub const COMPOSITION_SIGN: f64 = 1.0;

/// `sqrt(pi / 2)`, the GKP half-lattice displacement.
pub fn half_lattice() -> f64 {
    (PI / 2.0).sqrt()
}

/// Reduce an angle to `[0, 2π)`.
pub fn canonical_phase(phase: f64) -> f64 {
    let r = phase.rem_euclid(TAU);
    // rem_euclid can return exactly TAU for tiny negative inputs.
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Distance between two angles on the unit circle, in `[0, π]`.
pub fn phase_distance(a: f64, b: f64) -> f64 {
    let d = canonical_phase(a - b);
    d.min(TAU - d)
}

/// A finite complex number, used for displacement amplitudes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexAmplitude(Complex64);

impl ComplexAmplitude {
    pub const ZERO: ComplexAmplitude = ComplexAmplitude(Complex64::new(0.0, 0.0));

    pub fn new(re: f64, im: f64) -> Result<Self> {
        if re.is_finite() && im.is_finite() {
            Ok(ComplexAmplitude(Complex64::new(re, im)))
        } else {
            Err(SimError::NonFinite { re, im })
        }
    }

    pub fn real(re: f64) -> Result<Self> {
        Self::new(re, 0.0)
    }

    pub fn imag(im: f64) -> Result<Self> {
        Self::new(0.0, im)
    }

    pub fn value(self) -> Complex64 {
        self.0
    }

    pub fn re(self) -> f64 {
        self.0.re
    }

    pub fn im(self) -> f64 {
        self.0.im
    }

    pub fn norm(self) -> f64 {
        self.0.norm()
    }

    /// Scale by a real factor. Finite inputs stay finite for moderate factors;
    /// the caller is responsible for not overflowing.
    pub fn scale(self, k: f64) -> Self {
        ComplexAmplitude(self.0 * k)
    }
}

impl TryFrom<Complex64> for ComplexAmplitude {
    type Error = SimError;

    fn try_from(c: Complex64) -> Result<Self> {
        ComplexAmplitude::new(c.re, c.im)
    }
}

impl std::ops::Add for ComplexAmplitude {
    type Output = ComplexAmplitude;
    fn add(self, rhs: Self) -> Self {
        ComplexAmplitude(self.0 + rhs.0)
    }
}

impl std::ops::Neg for ComplexAmplitude {
    type Output = ComplexAmplitude;
    fn neg(self) -> Self {
        ComplexAmplitude(-self.0)
    }
}

impl fmt::Display for ComplexAmplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{},{}", self.0.re, self.0.im)
    }
}

/// The operator `e^{i·phase} D(alpha)`.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct PhasedDisplacement {
    phase: f64,
    alpha: ComplexAmplitude,
}

impl PhasedDisplacement {
    pub fn new(phase: f64, alpha: ComplexAmplitude) -> Self {
        PhasedDisplacement {
            phase: canonical_phase(phase),
            alpha,
        }
    }

    /// Plain `D(alpha)`.
    pub fn displacement(alpha: ComplexAmplitude) -> Self {
        Self::new(0.0, alpha)
    }

    pub fn identity() -> Self {
        Self::new(0.0, ComplexAmplitude::ZERO)
    }

    pub fn phase(&self) -> f64 {
        self.phase
    }

    pub fn alpha(&self) -> ComplexAmplitude {
        self.alpha
    }

    /// `e^{-i·phase} D(-alpha)`.
    pub fn inverse(&self) -> Self {
        Self::new(-self.phase, -self.alpha)
    }

    /// Scalar prefactor `e^{i·phase}`.
    pub fn prefactor(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.phase)
    }
}

impl PartialEq for PhasedDisplacement {
    fn eq(&self, other: &Self) -> bool {
        phase_distance(self.phase, other.phase) <= TAU_PHASE
            && (self.alpha.value() - other.alpha.value()).norm() <= TAU_AMP
    }
}

/// The four logical Pauli letters of the GKP qubit.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PauliLetter {
    I,
    X,
    Z,
    Y,
}

impl PauliLetter {
    pub const ALL: [PauliLetter; 4] = [PauliLetter::I, PauliLetter::X, PauliLetter::Z, PauliLetter::Y];

    /// Sender encoding of two classical bits, as in the encoded-state table:
    /// `00 → I`, `01 → X`, `10 → Y`, `11 → Z`.
    pub fn from_bits(bits: [bool; 2]) -> Self {
        match bits {
            [false, false] => PauliLetter::I,
            [false, true] => PauliLetter::X,
            [true, false] => PauliLetter::Y,
            [true, true] => PauliLetter::Z,
        }
    }

    pub fn to_bits(self) -> [bool; 2] {
        match self {
            PauliLetter::I => [false, false],
            PauliLetter::X => [false, true],
            PauliLetter::Y => [true, false],
            PauliLetter::Z => [true, true],
        }
    }

    /// `(bit_x, bit_z)`: which phase-space directions the letter displaces along.
    pub fn xz_bits(self) -> (bool, bool) {
        match self {
            PauliLetter::I => (false, false),
            PauliLetter::X => (true, false),
            PauliLetter::Z => (false, true),
            PauliLetter::Y => (true, true),
        }
    }

    pub fn from_xz_bits(bit_x: bool, bit_z: bool) -> Self {
        match (bit_x, bit_z) {
            (false, false) => PauliLetter::I,
            (true, false) => PauliLetter::X,
            (false, true) => PauliLetter::Z,
            (true, true) => PauliLetter::Y,
        }
    }
}

impl fmt::Display for PauliLetter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PauliLetter::I => "I",
            PauliLetter::X => "X",
            PauliLetter::Z => "Z",
            PauliLetter::Y => "Y",
        };
        f.write_str(s)
    }
}

impl std::str::FromStr for PauliLetter {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "I" | "i" => Ok(PauliLetter::I),
            "X" | "x" => Ok(PauliLetter::X),
            "Z" | "z" => Ok(PauliLetter::Z),
            "Y" | "y" => Ok(PauliLetter::Y),
            other => Err(SimError::InvalidParameter(format!("unknown Pauli letter {other:?}"))),
        }
    }
}

/// Outcome of comparing the composition phases of two displacements.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CommutationClass {
    Commute,
    Anticommute,
    /// Carries `2θ mod 2π`.
    GeneralPhase(f64),
}

/// `Im(alpha · conj(beta))`, not reduced.
pub fn symplectic_phase(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> f64 {
    (alpha.value() * beta.value().conj()).im
}

/// Operator product `d1 · d2`.
pub fn compose(d1: &PhasedDisplacement, d2: &PhasedDisplacement) -> PhasedDisplacement {
    let bch = COMPOSITION_SIGN * symplectic_phase(d1.alpha, d2.alpha);
    PhasedDisplacement::new(d1.phase + d2.phase + bch, d1.alpha + d2.alpha)
}

pub fn make_pauli(letter: PauliLetter) -> PhasedDisplacement {
    let h = half_lattice();
    let x = PhasedDisplacement::displacement(ComplexAmplitude(Complex64::new(h, 0.0)));
    let z = PhasedDisplacement::displacement(ComplexAmplitude(Complex64::new(0.0, h)));
    match letter {
        PauliLetter::I => PhasedDisplacement::identity(),
        PauliLetter::X => x,
        PauliLetter::Z => z,
        PauliLetter::Y => {
            // Y = i X Z
            let xz = compose(&x, &z);
            PhasedDisplacement::new(xz.phase + FRAC_PI_2, xz.alpha)
        }
    }
}

/// `S_X = X²`.
pub fn stabilizer_x() -> PhasedDisplacement {
    let x = make_pauli(PauliLetter::X);
    compose(&x, &x)
}

/// `S_Z = Z²`.
pub fn stabilizer_z() -> PhasedDisplacement {
    let z = make_pauli(PauliLetter::Z);
    compose(&z, &z)
}

/// `D(-beta) D(alpha) D(beta)`, computed by two compositions.
///
/// The result keeps `alpha` and carries the loop phase
/// `2 · COMPOSITION_SIGN · Im(alpha · conj(beta))`.
pub fn conjugate_loop(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> PhasedDisplacement {
    let left = PhasedDisplacement::displacement(-beta);
    let middle = PhasedDisplacement::displacement(alpha);
    let right = PhasedDisplacement::displacement(beta);
    let looped = compose(&compose(&left, &middle), &right);
    // The displacement sum is alpha - beta + beta, which need not round back to alpha.
    PhasedDisplacement::new(looped.phase, alpha)
}

/// Loop phase `2θ` in closed form, canonicalized.
pub fn loop_phase(alpha: ComplexAmplitude, beta: ComplexAmplitude) -> f64 {
    canonical_phase(2.0 * COMPOSITION_SIGN * symplectic_phase(alpha, beta))
}

pub fn commutation_class(d1: &PhasedDisplacement, d2: &PhasedDisplacement) -> CommutationClass {
    let two_theta = canonical_phase(2.0 * symplectic_phase(d1.alpha, d2.alpha));
    if phase_distance(two_theta, 0.0) <= TAU_PHASE {
        CommutationClass::Commute
    } else if phase_distance(two_theta, PI) <= TAU_PHASE {
        CommutationClass::Anticommute
    } else {
        CommutationClass::GeneralPhase(two_theta)
    }
}

fn phase_bit(phase: f64) -> Result<bool> {
    if phase_distance(phase, 0.0) <= TAU_PHASE {
        Ok(false)
    } else if phase_distance(phase, PI) <= TAU_PHASE {
        Ok(true)
    } else {
        Err(SimError::PhaseOutOfAlphabet(phase))
    }
}

/// Decode a letter from the loop phases of the real-β and imaginary-β runs.
///
/// Only membership in `{0, π}` is used, so the result does not depend on the
/// sign convention of the loop phase.
pub fn infer_letter(phase_real_run: f64, phase_imag_run: f64) -> Result<PauliLetter> {
    let bit_z = phase_bit(phase_real_run)?;
    let bit_x = phase_bit(phase_imag_run)?;
    Ok(PauliLetter::from_xz_bits(bit_x, bit_z))
}
