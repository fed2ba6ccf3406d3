//! Single-mode numerics in a truncated number basis `|0⟩ … |N-1⟩`.

mod expm;
mod gkp;

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use ndarray::{Array1, Array2};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::phase_algebra::ComplexAmplitude;

pub use expm::expm;
pub use gkp::{gkp_codeword, squeezed_position_state, GkpParams};

/// Normalization tolerance.
pub const TAU_NORM: f64 = 1e-12;

/// Truncation tolerance on the low-energy subspace.
pub const TAU_TRUNC: f64 = 1e-8;

/// Largest acceptable leakage before a run is declared untrustworthy.
pub const LEAKAGE_LIMIT: f64 = 1e-6;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_dim(n: usize, min: usize) -> Result<()> {
    if n < min {
        Err(SimError::DimensionTooSmall { got: n, min })
    } else {
        Ok(())
    }
}

/// Number of top levels counted by [`FockVector::leakage`].
pub fn leakage_levels(n: usize) -> usize {
    n.div_ceil(10)
}

/// Amplitudes of a single mode over `|0⟩ … |N-1⟩`.
#[derive(Clone, Debug, PartialEq)]
pub struct FockVector {
    amps: Array1<Complex64>,
}

impl FockVector {
    pub fn from_amplitudes(amps: Array1<Complex64>) -> Result<Self> {
        check_dim(amps.len(), 1)?;
        Ok(FockVector { amps })
    }

    pub fn number_state(n: usize, level: usize) -> Result<Self> {
        check_dim(n, 1)?;
        if level >= n {
            return Err(SimError::DimensionMismatch { expected: n, got: level + 1 });
        }
        let mut amps = Array1::zeros(n);
        amps[level] = ONE;
        Ok(FockVector { amps })
    }

    pub fn vacuum(n: usize) -> Result<Self> {
        Self::number_state(n, 0)
    }

    /// Coherent state `|alpha⟩` from its number-basis series, renormalized
    /// after truncation.
    pub fn coherent(alpha: ComplexAmplitude, n: usize) -> Result<Self> {
        check_dim(n, 1)?;
        let a = alpha.value();
        let mut amps = Array1::zeros(n);
        let mut c = Complex64::new((-a.norm_sqr() / 2.0).exp(), 0.0);
        amps[0] = c;
        for k in 1..n {
            c = c * a / (k as f64).sqrt();
            amps[k] = c;
        }
        let mut v = FockVector { amps };
        v.normalize();
        Ok(v)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<Complex64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> Array1<Complex64> {
        self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalize(&mut self) {
        let norm = self.norm();
        if norm > 0.0 {
            self.amps.mapv_inplace(|z| z / norm);
        }
    }

    /// Probability mass in the top `⌈N/10⌉` levels.
    pub fn leakage(&self) -> f64 {
        let n = self.dim();
        self.amps
            .iter()
            .skip(n - leakage_levels(n))
            .map(|z| z.norm_sqr())
            .sum()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &FockVector) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum())
    }
}

/// Dense `N × N` operator on one mode.
#[derive(Clone, Debug, PartialEq)]
pub struct ModeOperator {
    entries: Array2<Complex64>,
}

impl ModeOperator {
    pub fn from_matrix(entries: Array2<Complex64>) -> Result<Self> {
        if entries.nrows() != entries.ncols() {
            return Err(SimError::DimensionMismatch { expected: entries.nrows(), got: entries.ncols() });
        }
        Ok(ModeOperator { entries })
    }

    pub fn identity(n: usize) -> Self {
        ModeOperator { entries: Array2::eye(n) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &Array2<Complex64> {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.entries[[row, col]]
    }

    pub fn dagger(&self) -> ModeOperator {
        ModeOperator { entries: self.entries.t().mapv(|z| z.conj()) }
    }

    pub fn scaled(&self, c: Complex64) -> ModeOperator {
        ModeOperator { entries: &self.entries * c }
    }

    pub fn matmul(&self, other: &ModeOperator) -> Result<ModeOperator> {
        if self.dim() != other.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), got: other.dim() });
        }
        Ok(ModeOperator { entries: self.entries.dot(&other.entries) })
    }

    /// `[self, other]`.
    pub fn commutator(&self, other: &ModeOperator) -> Result<ModeOperator> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ModeOperator { entries: ab.entries - ba.entries })
    }

    pub fn apply(&self, v: &FockVector) -> Result<FockVector> {
        if self.dim() != v.dim() {
            return Err(SimError::DimensionMismatch { expected: self.dim(), got: v.dim() });
        }
        Ok(FockVector { amps: self.entries.dot(&v.amps) })
    }

    /// Largest entrywise deviation from `other` over the leading `block × block` corner.
    pub fn max_block_deviation(&self, other: &ModeOperator, block: usize) -> f64 {
        let b = block.min(self.dim()).min(other.dim());
        let mut worst = 0.0f64;
        for i in 0..b {
            for j in 0..b {
                worst = worst.max((self.entries[[i, j]] - other.entries[[i, j]]).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| (self.entries[[i, j]] - self.entries[[j, i]].conj()).norm() <= tol))
    }
}

/// Annihilation operator `a` with `⟨n-1|a|n⟩ = √n`.
pub fn ladder_lower(n: usize) -> Result<ModeOperator> {
    check_dim(n, 2)?;
    let mut m = Array2::zeros((n, n));
    for k in 1..n {
        m[[k - 1, k]] = Complex64::new((k as f64).sqrt(), 0.0);
    }
    Ok(ModeOperator { entries: m })
}

pub fn ladder_raise(n: usize) -> Result<ModeOperator> {
    Ok(ladder_lower(n)?.dagger())
}

/// `(q, p)` with `q = (a + a†)/√2` and `p = (a - a†)/(i√2)`.
pub fn quadratures(n: usize) -> Result<(ModeOperator, ModeOperator)> {
    let a = ladder_lower(n)?;
    let ad = a.dagger();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let q = ModeOperator { entries: (&a.entries + &ad.entries) * Complex64::new(s, 0.0) };
    // 1/(i√2) = -i/√2
    let p = ModeOperator { entries: (&a.entries - &ad.entries) * Complex64::new(0.0, -s) };
    Ok((q, p))
}

pub fn number_operator(n: usize) -> Result<ModeOperator> {
    check_dim(n, 1)?;
    let diag = Array1::from_iter((0..n).map(|k| Complex64::new(k as f64, 0.0)));
    Ok(ModeOperator { entries: Array2::from_diag(&diag) })
}

/// How a displacement matrix is built.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum DisplacementMethod {
    /// Matrix exponential of the truncated generator `alpha a† - conj(alpha) a`.
    /// Exactly unitary on the truncated space.
    Exponential,
    /// Closed-form matrix elements via associated Laguerre polynomials.
    Analytic,
}

/// Rejects displacements that push too much weight towards the cutoff.
pub fn check_displacement_range(alpha: ComplexAmplitude, n: usize) -> Result<()> {
    if alpha.value().norm_sqr() > n as f64 / 4.0 {
        return Err(SimError::TruncationRisk(format!(
            "|alpha|^2 = {:.4} exceeds N/4 = {:.2}",
            alpha.value().norm_sqr(),
            n as f64 / 4.0
        )));
    }
    Ok(())
}

pub fn displacement_matrix(
    alpha: ComplexAmplitude,
    n: usize,
    method: DisplacementMethod,
) -> Result<ModeOperator> {
    check_dim(n, 8)?;
    check_displacement_range(alpha, n)?;
    let entries = match method {
        DisplacementMethod::Exponential => displacement_exponential(alpha.value(), n),
        DisplacementMethod::Analytic => displacement_analytic(alpha.value(), n),
    };
    Ok(ModeOperator { entries })
}

fn displacement_exponential(alpha: Complex64, n: usize) -> Array2<Complex64> {
    if alpha == ZERO {
        return Array2::eye(n);
    }
    let mut generator = Array2::zeros((n, n));
    for k in 1..n {
        let s = (k as f64).sqrt();
        // alpha a†: ⟨k|a†|k-1⟩ = √k ; -conj(alpha) a: ⟨k-1|a|k⟩ = √k
        generator[[k, k - 1]] = alpha * s;
        generator[[k - 1, k]] = -alpha.conj() * s;
    }
    expm(&generator)
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn displacement_analytic(alpha: Complex64, n: usize) -> Array2<Complex64> {
    let x = alpha.norm_sqr();
    if x == 0.0 {
        return Array2::eye(n);
    }
    let ln_r = alpha.norm().ln();
    let arg = alpha.arg();
    let lnf = ln_factorials(n);
    let mut m = Array2::zeros((n, n));
    for k in 0..n {
        // L_j^{(k)}(x) for j = 0, 1, … by the three-term recurrence.
        let kf = k as f64;
        let mut prev = 0.0;
        let mut cur = 1.0;
        for lo in 0..(n - k) {
            if lo == 1 {
                prev = cur;
                cur = 1.0 + kf - x;
            } else if lo > 1 {
                let j = (lo - 1) as f64;
                let next = ((2.0 * j + 1.0 + kf - x) * cur - (j + kf) * prev) / (j + 1.0);
                prev = cur;
                cur = next;
            }
            let log_mag = 0.5 * (lnf[lo] - lnf[lo + k]) + kf * ln_r - x / 2.0;
            let mag = log_mag.exp() * cur;
            // Below the diagonal the power is alpha^k; above it (-conj(alpha))^k.
            m[[lo + k, lo]] = Complex64::from_polar(mag, kf * arg);
            if k > 0 {
                m[[lo, lo + k]] = Complex64::from_polar(mag, kf * (std::f64::consts::PI - arg));
            }
        }
    }
    m
}

type CacheKey = (DisplacementMethod, u64, u64, usize);

fn cache() -> &'static RwLock<HashMap<CacheKey, Arc<ModeOperator>>> {
    static CACHE: OnceLock<RwLock<HashMap<CacheKey, Arc<ModeOperator>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// [`displacement_matrix`] behind a process-wide table shared by all threads.
pub fn cached_displacement(
    alpha: ComplexAmplitude,
    n: usize,
    method: DisplacementMethod,
) -> Result<Arc<ModeOperator>> {
    // Normalize -0.0 so that it hits the same slot as 0.0.
    let key = (method, (alpha.re() + 0.0).to_bits(), (alpha.im() + 0.0).to_bits(), n);
    if let Some(op) = cache().read().expect("displacement cache poisoned").get(&key) {
        return Ok(Arc::clone(op));
    }
    let op = Arc::new(displacement_matrix(alpha, n, method)?);
    let mut table = cache().write().expect("displacement cache poisoned");
    Ok(Arc::clone(table.entry(key).or_insert(op)))
}

/// `|⟨v1|v2⟩|²`.
pub fn fidelity(v1: &FockVector, v2: &FockVector) -> Result<f64> {
    Ok(v1.inner(v2)?.norm_sqr())
}

/// `⟨v|op|v⟩`.
pub fn expectation(op: &ModeOperator, v: &FockVector) -> Result<ComplexAmplitude> {
    let ov = op.apply(v)?;
    ComplexAmplitude::try_from(v.inner(&ov)?)
}
