//! Spectral matrices, the bound-state energy ladder, and radial
//! wavefunctions.
//!
//! Normalizing the radial channel functions χᵢ(r) = 𝒩ᵢ r^{Kᵢ+n} e^{λr}
//! (𝒩ᵢ² = (2|λ|)^{2Kᵢ+2n+3Nₑ}/Γ(2Kᵢ+2n+3Nₑ)) turns the generalized
//! eigenproblem of the factorization chain into an ordinary symmetric one:
//! all powers of 2|λ| cancel and the rung-n matrix
//!
//!   Ã(n)ᵢⱼ = Γ(Kᵢ+Kⱼ+2n+3Nₑ)/√(Γ(2Kᵢ+2n+3Nₑ)Γ(2Kⱼ+2n+3Nₑ))
//!            · 2Wᵢⱼ/(Kᵢ+Kⱼ+3Nₑ−1+2n)
//!
//! no longer depends on λ. Its lowest eigenvalue λₙ₊₁ fixes the (n+1)-th
//! bound state: Eₙ₊₁ = −½λₙ₊₁², Ψₙ(r) = Σᵢ Cᵢ 𝒩ᵢ r^{Kᵢ+n} e^{λₙ₊₁ r} Yᵢ.
//! Γ-ratios are evaluated in the log domain (direct factorials overflow
//! near K ≈ 80); on the diagonal the three log terms cancel exactly in
//! IEEE arithmetic, which keeps the one-electron ladder exact.
//!
//! `variational_oracle` reaches the same λ by a deliberately different
//! route — raw Â(λ), B̂(λ) matrices in plain factorial arithmetic, reduced
//! by B̂^{−1/2}, self-consistency imposed by bisection — and serves as the
//! cross-check on the pre-cancelled form.

use crate::hyperbasis::{enumerate_basis, BasisPolicy, BasisSet, TermLabel};
use crate::ladder::build_alpha;
use crate::linalg::{sym_eigen, Matrix};
use crate::potential::{assemble_w, PotentialMatrix, QuadratureSpec};
use crate::special::ln_factorial;
use crate::{Error, Result};

/// ln Γ(k) for integer k ≥ 1, exact at the factorial chain.
fn ln_gamma_int(k: u32) -> f64 {
    ln_factorial(u64::from(k) - 1)
}

/// Rung-n spectral matrix Ã(n) from an assembled potential matrix; n ≥ 0.
///
/// Entries are filled for i ≤ j and mirrored, so the result is bitwise
/// symmetric. Diagonal Γ-ratios cancel to exp(0) = 1 exactly.
pub fn build_spectral_matrix(n: usize, w: &PotentialMatrix) -> Matrix {
    let basis = &w.basis;
    let three_ne = 3 * basis.term.ne;
    let shift = 2 * n as u32;
    let dim = basis.len();
    let mut a = Matrix::zeros(dim);
    for i in 0..dim {
        let ki = basis.indices[i].k;
        let lg_i = ln_gamma_int(2 * ki + shift + three_ne);
        for j in i..dim {
            let kj = basis.indices[j].k;
            let lg_j = ln_gamma_int(2 * kj + shift + three_ne);
            let lg_sum = ln_gamma_int(ki + kj + shift + three_ne);
            let ratio = (lg_sum - 0.5 * lg_i - 0.5 * lg_j).exp();
            let den = f64::from(ki + kj + three_ne - 1 + shift);
            let entry = ratio * 2.0 * w.w[(i, j)] / den;
            a[(i, j)] = entry;
            a[(j, i)] = entry;
        }
    }
    a
}

/// Flip the vector so its first significant component (|c| above
/// 1e−12·max|c|) is positive; ties in degenerate subspaces become
/// deterministic this way.
fn sign_fix(c: &mut [f64]) {
    let scale = c.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    for x in c.iter() {
        if x.abs() > 1e-12 * scale {
            if *x < 0.0 {
                for y in c.iter_mut() {
                    *y = -*y;
                }
            }
            return;
        }
    }
}

/// Algebraically smallest eigenvalue and its unit eigenvector, sign-fixed.
///
/// `rung` only labels the error when the eigenvalue comes out non-negative
/// (the truncated basis then supports no bound state at that rung). The
/// eigenpair is rejected unless ‖AC − λC‖₂ ≤ 1e−12·‖A‖₂.
pub fn lowest_eigenvalue(a: &Matrix, rung: u32) -> Result<(f64, Vec<f64>)> {
    let eig = sym_eigen(a)?;
    let lambda = eig.values[0];
    let mut c = eig.vectors.column(0);

    let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::EigenFailed("zero eigenvector".into()));
    }
    for x in c.iter_mut() {
        *x /= norm;
    }
    sign_fix(&mut c);

    let ac = a.mul_vec(&c);
    let resid =
        ac.iter().zip(&c).map(|(y, x)| (y - lambda * x).powi(2)).sum::<f64>().sqrt();
    let spec_norm = eig.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if resid > 1e-12 * spec_norm.max(f64::MIN_POSITIVE) {
        return Err(Error::EigenFailed(format!(
            "eigenpair residual {resid:.3e} exceeds 1e-12 * ||A||"
        )));
    }

    if lambda >= 0.0 {
        return Err(Error::NoBoundState { rung, lambda });
    }
    Ok((lambda, c))
}

/// One bound state of a term: rung n (0 = lowest), exponential slope λ < 0,
/// E = −½λ², and the unit-norm, sign-fixed channel coefficients.
#[derive(Debug, Clone)]
pub struct BoundState {
    pub n: usize,
    pub lambda: f64,
    pub energy: f64,
    pub c: Vec<f64>,
}

/// Where and why the ladder stopped early.
#[derive(Debug, Clone, Copy)]
pub struct Truncation {
    pub rung: u32,
    pub lambda: f64,
}

/// Bound states of one term, lowest first, with the basis they share.
#[derive(Debug, Clone)]
pub struct SpectrumResult {
    pub basis: BasisSet,
    pub states: Vec<BoundState>,
    /// Set when some rung had no bound state; `states` holds the rungs
    /// below it.
    pub truncated: Option<Truncation>,
}

/// Walk rungs n = 0..=n_max over one assembled Ŵ.
///
/// A rung whose lowest eigenvalue is non-negative truncates the ladder:
/// earlier states are kept and the truncation is recorded rather than
/// returned as an error (callers decide how loudly to fail).
pub fn energy_ladder_from_w(w: &PotentialMatrix, n_max: usize) -> Result<SpectrumResult> {
    let mut states = Vec::with_capacity(n_max + 1);
    let mut truncated = None;
    for n in 0..=n_max {
        let a = build_spectral_matrix(n, w);
        match lowest_eigenvalue(&a, n as u32) {
            Ok((lambda, c)) => {
                states.push(BoundState { n, lambda, energy: -0.5 * lambda * lambda, c })
            }
            Err(Error::NoBoundState { rung, lambda }) => {
                truncated = Some(Truncation { rung, lambda });
                break;
            }
            Err(e) => return Err(e),
        }
    }
    Ok(SpectrumResult { basis: w.basis.clone(), states, truncated })
}

/// Convenience wrapper: enumerate the basis, assemble Ŵ, walk the ladder.
pub fn energy_ladder(
    term: &TermLabel,
    policy: &BasisPolicy,
    n_max: usize,
    quad: &QuadratureSpec,
) -> Result<SpectrumResult> {
    let basis = enumerate_basis(term, policy)?;
    let w = assemble_w(&basis, quad)?;
    energy_ladder_from_w(&w, n_max)
}

/// Radial factor of one bound state: Ψₙ(r) = Σᵢ Cᵢ 𝒩ᵢ r^{Kᵢ+n} e^{λr},
/// evaluated channel by channel in the log domain.
#[derive(Debug, Clone)]
pub struct RadialWavefunction {
    pub lambda: f64,
    pub ne: u32,
    pub rung: usize,
    /// Channel coefficients (the eigenvector C).
    pub coeff: Vec<f64>,
    /// Channel powers Kᵢ + n.
    pub power: Vec<u32>,
    /// ln 𝒩ᵢ with 𝒩ᵢ² = (2|λ|)^{2Kᵢ+2n+3Nₑ}/Γ(2Kᵢ+2n+3Nₑ).
    ln_norm: Vec<f64>,
}

impl RadialWavefunction {
    pub fn channels(&self) -> usize {
        self.coeff.len()
    }

    /// Ψₙ(r) for r ≥ 0. Finite everywhere: positive powers vanish at the
    /// origin, λ < 0 kills the tail.
    pub fn eval(&self, r: f64) -> f64 {
        assert!(r.is_finite() && r >= 0.0, "radius must be finite and non-negative");
        if r == 0.0 {
            // only a zero-power channel reaches the origin
            return self
                .coeff
                .iter()
                .zip(&self.power)
                .zip(&self.ln_norm)
                .filter(|((_, &p), _)| p == 0)
                .map(|((c, _), ln_n)| c * ln_n.exp())
                .sum();
        }
        let ln_r = r.ln();
        let mut sum = 0.0;
        for ((&c, &p), &ln_n) in self.coeff.iter().zip(&self.power).zip(&self.ln_norm) {
            if c == 0.0 {
                continue;
            }
            let mag = (c.abs().ln() + ln_n + f64::from(p) * ln_r + self.lambda * r).exp();
            sum += if c < 0.0 { -mag } else { mag };
        }
        sum
    }
}

/// Channel data for one bound state over its basis.
pub fn radial_wavefunction(state: &BoundState, basis: &BasisSet) -> RadialWavefunction {
    assert!(state.lambda < 0.0, "bound states carry lambda < 0");
    assert_eq!(state.c.len(), basis.len(), "state and basis dimensions differ");
    let ne = basis.term.ne;
    let two_lam = (2.0 * state.lambda.abs()).ln();
    let n = state.n as u32;
    let mut power = Vec::with_capacity(basis.len());
    let mut ln_norm = Vec::with_capacity(basis.len());
    for idx in &basis.indices {
        let p = idx.k + n;
        let arg = 2 * p + 3 * ne;
        power.push(p);
        ln_norm.push(0.5 * (f64::from(arg) * two_lam - ln_gamma_int(arg)));
    }
    RadialWavefunction {
        lambda: state.lambda,
        ne,
        rung: state.n,
        coeff: state.c.clone(),
        power,
        ln_norm,
    }
}

/// ⟨Ψₐ|Ψ_b⟩ over the measure r^{3Nₑ−1} dr, in closed form.
///
/// Channel harmonics are orthonormal, so only equal-channel radial
/// integrals survive: Σᵢ CₐᵢC_bᵢ 𝒩ₐᵢ𝒩_bᵢ Γ(pₐᵢ+p_bᵢ+3Nₑ)/|λₐ+λ_b|^{pₐᵢ+p_bᵢ+3Nₑ}.
pub fn state_overlap(a: &RadialWavefunction, b: &RadialWavefunction) -> f64 {
    assert_eq!(a.ne, b.ne, "states must describe the same system");
    assert_eq!(a.channels(), b.channels(), "states must share a basis");
    let ln_s = (a.lambda + b.lambda).abs().ln();
    let mut total = 0.0;
    for ch in 0..a.channels() {
        debug_assert_eq!(
            a.power[ch] - a.rung as u32,
            b.power[ch] - b.rung as u32,
            "channel K values differ"
        );
        let c = a.coeff[ch] * b.coeff[ch];
        if c == 0.0 {
            continue;
        }
        let arg = a.power[ch] + b.power[ch] + 3 * a.ne;
        let ln_mag = c.abs().ln()
            + a.ln_norm[ch]
            + b.ln_norm[ch]
            + ln_gamma_int(arg)
            - f64::from(arg) * ln_s;
        total += if c < 0.0 { -ln_mag.exp() } else { ln_mag.exp() };
    }
    total
}

/// An orthonormal recombination of ladder states.
///
/// Row k of `transform` expands output state k over input states 0..=k
/// (lower triangular — the usual sequential Gram–Schmidt shape, computed
/// stably as the inverse Cholesky factor of the overlap matrix).
#[derive(Debug, Clone)]
pub struct OrthonormalSet {
    /// Gram matrix of the raw input states.
    pub overlap: Matrix,
    /// Lower-triangular map from inputs to orthonormal outputs.
    pub transform: Matrix,
}

impl OrthonormalSet {
    /// Gram matrix of the outputs, T·S·Tᵀ in closed form; identity within
    /// 1e−10 for any healthy input set.
    pub fn gram(&self) -> Matrix {
        let t = &self.transform;
        let st = self.overlap.mul(&transpose(t));
        t.mul(&st)
    }

    /// Evaluate output state k at radius r.
    pub fn eval(&self, k: usize, inputs: &[RadialWavefunction], r: f64) -> f64 {
        assert_eq!(inputs.len(), self.transform.dim());
        let mut sum = 0.0;
        for (m, wf) in inputs.iter().enumerate().take(k + 1) {
            sum += self.transform[(k, m)] * wf.eval(r);
        }
        sum
    }
}

fn transpose(m: &Matrix) -> Matrix {
    Matrix::from_fn(m.dim(), |i, j| m[(j, i)])
}

/// Cholesky factor of a symmetric positive-definite matrix; pivots at or
/// below 1e−12 mean the states are (numerically) linearly dependent.
fn cholesky(s: &Matrix) -> Result<Matrix> {
    let m = s.dim();
    let mut l = Matrix::zeros(m);
    for i in 0..m {
        for j in 0..=i {
            let mut sum = s[(i, j)];
            for k in 0..j {
                sum -= l[(i, k)] * l[(j, k)];
            }
            if i == j {
                if sum <= 1e-12 {
                    return Err(Error::DegenerateStates(format!(
                        "Gram pivot {sum:.3e} at state {i}"
                    )));
                }
                l[(i, i)] = sum.sqrt();
            } else {
                l[(i, j)] = sum / l[(j, j)];
            }
        }
    }
    Ok(l)
}

/// Orthonormalize ladder states against the hyper-radial measure.
///
/// Overlaps come from the closed-form Γ integrals; the returned transform
/// is L⁻¹ for the Cholesky factor L of the overlap matrix, so output k is
/// a combination of inputs 0..=k and the set is ordered like the input.
pub fn orthogonalize_states(states: &[RadialWavefunction]) -> Result<OrthonormalSet> {
    assert!(!states.is_empty(), "need at least one state");
    let m = states.len();
    let mut s = Matrix::zeros(m);
    for i in 0..m {
        for j in i..m {
            let v = state_overlap(&states[i], &states[j]);
            s[(i, j)] = v;
            s[(j, i)] = v;
        }
    }
    let l = cholesky(&s)?;
    // forward-substitute L·T = I column by column; T is lower triangular
    let mut t = Matrix::zeros(m);
    for c in 0..m {
        t[(c, c)] = 1.0 / l[(c, c)];
        for r in (c + 1)..m {
            let mut acc = 0.0;
            for k in c..r {
                acc += l[(r, k)] * t[(k, c)];
            }
            t[(r, c)] = -acc / l[(r, r)];
        }
    }
    Ok(OrthonormalSet { overlap: s, transform: t })
}

/// Independent route to the ground-state exponent: minimize the Rayleigh
/// quotient over trial functions Σᵢ Cᵢ r^{Kᵢ} e^{λr}.
///
/// At each scan λ the raw matrices Âᵢⱼ = Γ(Kᵢ+Kⱼ+3Nₑ)/(2|λ|)^{Kᵢ+Kⱼ+3Nₑ}·α₁ᵢⱼ
/// and B̂ᵢᵢ = Γ(2Kᵢ+3Nₑ)/(2|λ|)^{2Kᵢ+3Nₑ} are built in plain factorial
/// arithmetic (no log-Γ, no pre-cancellation) and reduced by B̂^{−1/2}; the
/// self-consistent point where the lowest eigenvalue equals the scan λ is
/// found by bisection on λ ∈ (−10Z, −10⁻³Z). Small bases only — factorials
/// overflow two digits past K ≈ 80.
pub fn variational_oracle(
    term: &TermLabel,
    policy: &BasisPolicy,
    quad: &QuadratureSpec,
) -> Result<(f64, Vec<f64>)> {
    assert!(term.z > 0.0, "oracle needs an attractive nucleus");
    let basis = enumerate_basis(term, policy)?;
    assert!(basis.len() <= 64, "oracle is for validation-size bases");
    let w = assemble_w(&basis, quad)?;
    let alpha = build_alpha(1, &w);

    let gamma_int = |k: u32| -> f64 {
        let mut p = 1.0;
        for i in 2..k {
            p *= f64::from(i);
        }
        p
    };
    let three_ne = 3 * term.ne;
    let dim = basis.len();
    let lowest_of = |lam: f64| -> Result<(f64, Vec<f64>)> {
        let two_lam = 2.0 * lam.abs();
        let b_diag: Vec<f64> = basis
            .indices
            .iter()
            .map(|idx| {
                let arg = 2 * idx.k + three_ne;
                gamma_int(arg) / two_lam.powi(arg as i32)
            })
            .collect();
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let arg = basis.indices[i].k + basis.indices[j].k + three_ne;
                let a_ij = gamma_int(arg) / two_lam.powi(arg as i32) * alpha[(i, j)];
                let v = a_ij / (b_diag[i] * b_diag[j]).sqrt();
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        let eig = sym_eigen(&m)?;
        let mut c = eig.vectors.column(0);
        sign_fix(&mut c);
        Ok((eig.values[0], c))
    };

    let (mut lo, mut hi) = (-10.0 * term.z, -1e-3 * term.z);
    let g_lo = lowest_of(lo)?.0 - lo;
    let g_hi = lowest_of(hi)?.0 - hi;
    if g_lo <= 0.0 || g_hi >= 0.0 {
        return Err(Error::NoFixedPoint { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break; // interval at floating-point resolution
        }
        let g_mid = lowest_of(mid)?.0 - mid;
        if g_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 * hi.abs() {
            break;
        }
    }
    let lam = 0.5 * (lo + hi);
    let (_, c) = lowest_of(lam)?;
    Ok((lam, c))
}
