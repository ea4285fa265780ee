//! Hyperspherical basis for the reduced two-electron ¹S problem (and its
//! trivial one-electron degeneration).
//!
//! Coordinates: hyperradius r with r₁ = r·sinη, r₂ = r·cosη, η ∈ [0, π/2],
//! and x = cosθ₁₂ the inter-electron angle cosine. After integrating the
//! trivial Euler angles, an S-state harmonic is
//!
//!   Y_{Kℓ}(η, x) = N_{Kℓ} · (sinη cosη)^ℓ · P_m^{(ℓ+1/2, ℓ+1/2)}(cos 2η) · P_ℓ(x)
//!
//! with m = (K − 2ℓ)/2, under the reduced volume weight cos²η sin²η dη dx.
//! Exchange symmetry of the spatially symmetric singlet keeps only even K
//! with (K/2 − ℓ) even. The grand angular operator has eigenvalue K(K + 4)
//! on Y_{Kℓ} (K(K + 3Ne − 2) in general).
//!
//! Normalization constants are fixed numerically against the reduced weight
//! (quadrature converged far past the harmonic's trigonometric degree), so
//! the basis is orthonormal to machine precision.

use crate::linalg::Matrix;
use crate::quadrature::GaussLegendre;
use crate::special::{jacobi_p, legendre_p};
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::sync::OnceLock;

/// Spectroscopic sector of a run. Spin quantum numbers are stored doubled
/// (`s2` = 2S, `sz2` = 2Sz) so half-integer spins stay exact integers.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct TermLabel {
    /// Electron count: 1 or 2.
    pub ne: u32,
    /// Nuclear charge; ≥ 0 (0 is a diagnostics-only, purely repulsive system).
    pub z: f64,
    /// Total orbital angular momentum L.
    pub l: u32,
    /// Magnetic quantum number M.
    pub m: i32,
    /// Doubled total spin 2S.
    pub s2: u32,
    /// Doubled spin projection 2Sz.
    pub sz2: i32,
    /// Spatial parity, +1 or −1.
    pub parity: i8,
}

impl TermLabel {
    /// One-electron ion: term of given ℓ, S = 1/2, parity (−1)^ℓ.
    pub fn hydrogenic(z: f64, ell: u32) -> Result<TermLabel> {
        let t = TermLabel {
            ne: 1,
            z,
            l: ell,
            m: 0,
            s2: 1,
            sz2: 1,
            parity: if ell.is_multiple_of(2) { 1 } else { -1 },
        };
        t.validate()?;
        Ok(t)
    }

    /// Two-electron ¹Sᵉ ground sector (L = M = S = Sz = 0, even parity).
    pub fn singlet_s(z: f64) -> Result<TermLabel> {
        let t = TermLabel { ne: 2, z, l: 0, m: 0, s2: 0, sz2: 0, parity: 1 };
        t.validate()?;
        Ok(t)
    }

    /// Check the label is one of the supported sectors.
    pub fn validate(&self) -> Result<()> {
        if !self.z.is_finite() || self.z < 0.0 {
            return Err(Error::InvalidTerm(format!(
                "nuclear charge must be finite and >= 0, got {}",
                self.z
            )));
        }
        match self.ne {
            1 => {
                let want_parity = if self.l.is_multiple_of(2) { 1 } else { -1 };
                if self.s2 != 1 || self.sz2.abs() != 1 {
                    return Err(Error::InvalidTerm(
                        "one-electron term needs S = 1/2, Sz = ±1/2".into(),
                    ));
                }
                if self.parity != want_parity {
                    return Err(Error::InvalidTerm(format!(
                        "one-electron parity must be (-1)^l = {want_parity}"
                    )));
                }
                if self.m.unsigned_abs() > self.l {
                    return Err(Error::InvalidTerm("|M| must not exceed L".into()));
                }
            }
            2 => {
                if self.l != 0 || self.m != 0 || self.s2 != 0 || self.sz2 != 0 || self.parity != 1
                {
                    return Err(Error::InvalidTerm(
                        "two-electron support is limited to the  ¹Sᵉ sector \
                         (L = M = S = Sz = 0, parity +1)"
                            .into(),
                    ));
                }
            }
            other => {
                return Err(Error::InvalidTerm(format!(
                    "supported electron counts are 1 and 2, got {other}"
                )));
            }
        }
        Ok(())
    }
}

/// One hyperspherical harmonic: grand angular momentum K and per-electron
/// orbital momentum ℓ. For one-electron terms the index degenerates to
/// K ≡ ℓ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize)]
pub struct HHIndex {
    pub k: u32,
    pub ell: u32,
}

impl HHIndex {
    pub fn new(k: u32, ell: u32) -> HHIndex {
        HHIndex { k, ell }
    }

    /// Jacobi order m = (K − 2ℓ)/2 of the η-polynomial (two-electron case).
    pub fn jacobi_order(&self) -> u32 {
        (self.k - 2 * self.ell) / 2
    }

    /// Validity for the two-electron ¹S sector: K even, ℓ ≤ K/2, and the
    /// exchange rule (K/2 − ℓ) even.
    fn validate_singlet_s(&self) -> Result<()> {
        if !self.k.is_multiple_of(2) {
            return Err(Error::InvalidIndex(format!(
                "K must be even in the ¹S sector, got K = {}",
                self.k
            )));
        }
        if self.ell > self.k / 2 {
            return Err(Error::InvalidIndex(format!(
                "need ell <= K/2, got (K, ell) = ({}, {})",
                self.k, self.ell
            )));
        }
        if !(self.k / 2 - self.ell).is_multiple_of(2) {
            return Err(Error::InvalidIndex(format!(
                "exchange symmetry requires (K/2 - ell) even, got (K, ell) = ({}, {})",
                self.k, self.ell
            )));
        }
        Ok(())
    }
}

/// How a basis is selected.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BasisPolicy {
    /// Every allowed (K, ℓ) with K ≤ Kmax.
    FullToKmax(u32),
    /// Only the ℓ = 0, K ≡ 0 (mod 4) family up to Kmax. These carry the
    /// bulk of the S-state correlation energy at large K.
    MainOnly(u32),
    /// An explicit user list (validated, de-duplicated order enforced).
    Explicit(Vec<(u32, u32)>),
}

impl BasisPolicy {
    /// Stable short form used in cache keys and reports.
    pub fn key_string(&self) -> String {
        match self {
            BasisPolicy::FullToKmax(k) => format!("full{k}"),
            BasisPolicy::MainOnly(k) => format!("main{k}"),
            BasisPolicy::Explicit(list) => {
                let mut s = String::from("explicit");
                for (k, l) in list {
                    s.push_str(&format!("-{k}.{l}"));
                }
                s
            }
        }
    }
}

/// An ordered basis of harmonics for one term.
#[derive(Debug, Clone)]
pub struct BasisSet {
    pub term: TermLabel,
    pub policy: BasisPolicy,
    pub indices: Vec<HHIndex>,
}

impl BasisSet {
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Largest K present.
    pub fn kmax(&self) -> u32 {
        self.indices.iter().map(|i| i.k).max().unwrap_or(0)
    }

    /// Largest ℓ present.
    pub fn ell_max(&self) -> u32 {
        self.indices.iter().map(|i| i.ell).max().unwrap_or(0)
    }
}

/// Enumerate the basis for a term under a policy.
///
/// Ordering is ascending (K, ℓ) always. For one-electron terms every policy
/// yields the single index K ≡ ℓ = L (the radial ladder carries the whole
/// spectrum there).
pub fn enumerate_basis(term: &TermLabel, policy: &BasisPolicy) -> Result<BasisSet> {
    term.validate()?;
    if term.ne == 1 {
        let idx = HHIndex::new(term.l, term.l);
        if let BasisPolicy::Explicit(list) = policy {
            if list.as_slice() != [(term.l, term.l)] {
                return Err(Error::InvalidBasis(format!(
                    "one-electron basis is the single index ({}, {})",
                    term.l, term.l
                )));
            }
        }
        return Ok(BasisSet { term: term.clone(), policy: policy.clone(), indices: vec![idx] });
    }

    let indices = match policy {
        BasisPolicy::FullToKmax(kmax) => {
            if kmax % 2 != 0 {
                return Err(Error::InvalidBasis(format!(
                    "Kmax must be even (parity), got {kmax}"
                )));
            }
            let mut out = Vec::new();
            for k in (0..=*kmax).step_by(2) {
                let half = k / 2;
                let start = half % 2; // exchange rule: ell ≡ K/2 (mod 2)
                let mut ell = start;
                while ell <= half {
                    out.push(HHIndex::new(k, ell));
                    ell += 2;
                }
            }
            out
        }
        BasisPolicy::MainOnly(kmax) => {
            if kmax % 2 != 0 {
                return Err(Error::InvalidBasis(format!(
                    "Kmax must be even (parity), got {kmax}"
                )));
            }
            (0..=*kmax).step_by(4).map(|k| HHIndex::new(k, 0)).collect()
        }
        BasisPolicy::Explicit(list) => {
            if list.is_empty() {
                return Err(Error::InvalidBasis("explicit basis list is empty".into()));
            }
            let mut out: Vec<HHIndex> =
                list.iter().map(|&(k, ell)| HHIndex::new(k, ell)).collect();
            for idx in &out {
                idx.validate_singlet_s()?;
            }
            out.sort();
            for w in out.windows(2) {
                if w[0] == w[1] {
                    return Err(Error::InvalidBasis(format!(
                        "duplicate index ({}, {})",
                        w[0].k, w[0].ell
                    )));
                }
            }
            out
        }
    };
    Ok(BasisSet { term: term.clone(), policy: policy.clone(), indices })
}

/// Reduced volume weight at (η, x): cos²η sin²η. The weight is flat in x
/// (the Legendre measure); the argument is kept for signature symmetry with
/// the integrands it multiplies.
pub fn reduced_measure(eta: f64, _x: f64) -> f64 {
    let sc = eta.sin() * eta.cos();
    sc * sc
}

/// Unnormalized η-part (sinη cosη)^ℓ P_m^{(ℓ+1/2, ℓ+1/2)}(cos 2η).
pub(crate) fn eta_part_unnormalized(index: HHIndex, eta: f64) -> f64 {
    let alpha = index.ell as f64 + 0.5;
    let sc = eta.sin() * eta.cos();
    sc.powi(index.ell as i32) * jacobi_p(index.jacobi_order(), alpha, alpha, (2.0 * eta).cos())
}

/// Internal high-order rule for normalization integrals: 128 Gauss–Legendre
/// points on each of [0, π/4] and [π/4, π/2]. Converged to machine precision
/// for every K this solver reaches (trigonometric degree ≲ 250).
fn norm_rule() -> &'static GaussLegendre {
    static RULE: OnceLock<GaussLegendre> = OnceLock::new();
    RULE.get_or_init(|| GaussLegendre::new(128))
}

/// Normalization constant N_{Kℓ} making Y_{Kℓ} unit-norm under
/// cos²η sin²η dη dx.
pub fn normalization_constant(index: HHIndex) -> f64 {
    let rule = norm_rule();
    let mut eta_int = 0.0;
    for (a, b) in [(0.0, FRAC_PI_4), (FRAC_PI_4, FRAC_PI_2)] {
        eta_int += rule.integrate(a, b, |eta| {
            let f = eta_part_unnormalized(index, eta);
            f * f * reduced_measure(eta, 0.0)
        });
    }
    let x_int = 2.0 / (2.0 * index.ell as f64 + 1.0); // ∫ P_ℓ² dx, exact
    1.0 / (eta_int * x_int).sqrt()
}

/// Point value of the normalized harmonic Y_{Kℓ}(η, x).
pub fn hh_evaluate(index: HHIndex, eta: f64, x: f64) -> f64 {
    debug_assert!((0.0..=FRAC_PI_2).contains(&eta), "eta out of range: {eta}");
    debug_assert!((-1.0..=1.0).contains(&x), "x out of range: {x}");
    normalization_constant(index) * eta_part_unnormalized(index, eta) * legendre_p(index.ell, x)
}

/// Gram matrix ⟨Y_i | Y_j⟩ of a basis under the stated quadrature: η by
/// Gauss–Legendre on the (optionally split) interval, x exactly through
/// Legendre orthogonality. Orthonormality failures reveal an under-resolved
/// η rule.
pub fn gram_matrix(basis: &BasisSet, quad: &crate::potential::QuadratureSpec) -> Result<Matrix> {
    if basis.is_empty() {
        return Err(Error::InvalidBasis("empty basis".into()));
    }
    quad.validate()?;
    let n = basis.len();
    let (etas, wms) = quad.eta_nodes_and_weights(1);
    // Normalized η-part of every channel at every node.
    let table: Vec<Vec<f64>> = basis
        .indices
        .iter()
        .map(|&idx| {
            let nk = normalization_constant(idx);
            etas.iter().map(|&eta| nk * eta_part_unnormalized(idx, eta)).collect()
        })
        .collect();
    let mut g = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let (li, lj) = (basis.indices[i].ell, basis.indices[j].ell);
            if li != lj {
                continue; // exact Legendre orthogonality in x
            }
            let x_int = 2.0 / (2.0 * li as f64 + 1.0);
            let mut s = 0.0;
            for ((fi, fj), wm) in table[i].iter().zip(&table[j]).zip(&wms) {
                s += fi * fj * wm;
            }
            let v = s * x_int;
            g[(i, j)] = v;
            g[(j, i)] = v;
        }
    }
    Ok(g)
}

/// Finite-difference grid for the grand-angular-operator check, strictly
/// interior to (0, π/2) with room for a 5-point stencil.
#[derive(Debug, Clone, Copy)]
pub struct FdGrid {
    pub eta_min: f64,
    pub eta_max: f64,
    pub step: f64,
}

impl FdGrid {
    pub fn new(eta_min: f64, eta_max: f64, step: f64) -> Result<FdGrid> {
        let g = FdGrid { eta_min, eta_max, step };
        if !(step > 0.0 && step.is_finite()) {
            return Err(Error::InvalidGrid(format!("step must be positive, got {step}")));
        }
        if eta_min - 2.0 * step <= 0.0 || eta_max + 2.0 * step >= FRAC_PI_2 {
            return Err(Error::InvalidGrid(
                "grid (with stencil margin 2h) must stay inside (0, π/2)".into(),
            ));
        }
        if eta_min >= eta_max {
            return Err(Error::InvalidGrid("eta_min must be below eta_max".into()));
        }
        Ok(g)
    }

    /// Default check grid: [0.05, π/2 − 0.05] at 10⁻³ spacing.
    pub fn default_check() -> FdGrid {
        FdGrid::new(0.05, FRAC_PI_2 - 0.05, 1e-3).expect("static grid is valid")
    }
}

/// Apply the reduced grand angular operator to the η-part of Y_{Kℓ} by
/// 5-point central differences and return the worst relative deviation from
/// the eigenvalue K(K + 4):
///
///   max |Λ²Y − K(K+4)·Y|  /  (|K(K+4)|·max|Y| + ε)
///
/// The angular x-factor is already an eigenfunction, so only the η operator
///   −∂² − (4 cos2η / sin2η) ∂ + ℓ(ℓ+1)(1/sin²η + 1/cos²η)
/// acts. A constant harmonic (K = 0) gives exactly zero residual.
pub fn lambda2_check(index: HHIndex, grid: FdGrid) -> Result<f64> {
    index.validate_singlet_s()?;
    FdGrid::new(grid.eta_min, grid.eta_max, grid.step)?;
    let nk = normalization_constant(index);
    let f = |eta: f64| nk * eta_part_unnormalized(index, eta);
    let eig = (index.k * (index.k + 4)) as f64;
    let ll1 = (index.ell * (index.ell + 1)) as f64;
    let h = grid.step;

    let mut max_num = 0.0f64;
    let mut max_f = 0.0f64;
    let steps = ((grid.eta_max - grid.eta_min) / h).floor() as usize;
    for i in 0..=steps {
        let eta = grid.eta_min + h * i as f64;
        let (fm2, fm1, f0, fp1, fp2) =
            (f(eta - 2.0 * h), f(eta - h), f(eta), f(eta + h), f(eta + 2.0 * h));
        let d1 = (-fp2 + 8.0 * fp1 - 8.0 * fm1 + fm2) / (12.0 * h);
        let d2 = (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
        let coef = 4.0 * (2.0 * eta).cos() / (2.0 * eta).sin();
        let (s, c) = (eta.sin(), eta.cos());
        let lam2 = -d2 - coef * d1 + ll1 * (1.0 / (s * s) + 1.0 / (c * c)) * f0;
        max_num = max_num.max((lam2 - eig * f0).abs());
        max_f = max_f.max(f0.abs());
    }
    Ok(max_num / (eig.abs() * max_f + 1e-30))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singlet(z: f64) -> TermLabel {
        TermLabel::singlet_s(z).unwrap()
    }

    #[test]
    fn full_basis_enumeration_matches_known_lists() {
        let b = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(4)).unwrap();
        let want = [(0, 0), (2, 1), (4, 0), (4, 2)];
        assert_eq!(
            b.indices,
            want.map(|(k, l)| HHIndex::new(k, l)).to_vec(),
            "full basis to Kmax = 4"
        );
        let b6 = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(6)).unwrap();
        let want6 = [(0, 0), (2, 1), (4, 0), (4, 2), (6, 1), (6, 3)];
        assert_eq!(b6.indices, want6.map(|(k, l)| HHIndex::new(k, l)).to_vec());
    }

    #[test]
    fn exchange_rule_excludes_antisymmetric_indices() {
        // (6, 2) has K/2 − ℓ = 1 odd: spatially antisymmetric, not in ¹S.
        let b = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(12)).unwrap();
        assert!(!b.indices.contains(&HHIndex::new(6, 2)));
        for idx in &b.indices {
            assert_eq!((idx.k / 2 - idx.ell) % 2, 0, "index ({}, {})", idx.k, idx.ell);
        }
    }

    #[test]
    fn basis_sizes_follow_closed_form_counts() {
        // Count of allowed (K, ℓ) with K ≤ Kmax is Σ_{j=0}^{Kmax/2} (⌊j/2⌋+1).
        for (kmax, want) in [(0u32, 1usize), (4, 4), (8, 9), (12, 16), (20, 36), (40, 121)] {
            let b = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(kmax)).unwrap();
            assert_eq!(b.len(), want, "Kmax = {kmax}");
        }
    }

    #[test]
    fn main_family_is_multiples_of_four() {
        let b = enumerate_basis(&singlet(2.0), &BasisPolicy::MainOnly(12)).unwrap();
        let want = [(0, 0), (4, 0), (8, 0), (12, 0)];
        assert_eq!(b.indices, want.map(|(k, l)| HHIndex::new(k, l)).to_vec());
    }

    #[test]
    fn odd_kmax_is_rejected() {
        for policy in [BasisPolicy::FullToKmax(7), BasisPolicy::MainOnly(9)] {
            assert!(matches!(
                enumerate_basis(&singlet(2.0), &policy),
                Err(Error::InvalidBasis(_))
            ));
        }
    }

    #[test]
    fn explicit_lists_are_validated_sorted_and_deduplicated() {
        let ok = enumerate_basis(
            &singlet(2.0),
            &BasisPolicy::Explicit(vec![(4, 0), (0, 0), (4, 2)]),
        )
        .unwrap();
        assert_eq!(
            ok.indices,
            vec![HHIndex::new(0, 0), HHIndex::new(4, 0), HHIndex::new(4, 2)],
            "explicit list is sorted ascending (K, ℓ)"
        );
        // Violations: odd K, ℓ > K/2, broken exchange rule, duplicate, empty.
        for bad in [
            vec![(3, 0)],
            vec![(4, 3)],
            vec![(6, 2)],
            vec![(0, 0), (0, 0)],
            vec![],
        ] {
            assert!(
                enumerate_basis(&singlet(2.0), &BasisPolicy::Explicit(bad.clone())).is_err(),
                "expected rejection of {bad:?}"
            );
        }
    }

    #[test]
    fn one_electron_basis_degenerates_to_single_index() {
        for ell in 0..4 {
            let t = TermLabel::hydrogenic(1.0, ell).unwrap();
            let b = enumerate_basis(&t, &BasisPolicy::FullToKmax(20)).unwrap();
            assert_eq!(b.indices, vec![HHIndex::new(ell, ell)]);
        }
    }

    #[test]
    fn unsupported_terms_are_rejected() {
        // Triplet S for two electrons, and a 3-electron count.
        let mut t = singlet(2.0);
        t.s2 = 2;
        assert!(t.validate().is_err());
        let mut t3 = singlet(2.0);
        t3.ne = 3;
        assert!(t3.validate().is_err());
        assert!(TermLabel::singlet_s(-1.0).is_err());
    }

    #[test]
    fn measure_value_at_diagonal_and_total_volume() {
        assert!((reduced_measure(FRAC_PI_4, 0.3) - 0.25).abs() < 1e-15);
        // ∫ cos²η sin²η dη over [0, π/2] = π/16; flat x doubles it: π/8.
        let rule = GaussLegendre::new(64);
        let vol = 2.0 * rule.integrate(0.0, FRAC_PI_2, |eta| reduced_measure(eta, 0.0));
        assert!((vol - std::f64::consts::PI / 8.0).abs() < 1e-14, "volume {vol}");
    }

    /// Independent 2-D tensor-product quadrature of ⟨Y_a | Y_b⟩ through the
    /// public point evaluator only.
    fn overlap_2d_oracle(a: HHIndex, b: HHIndex) -> f64 {
        let eta_rule = GaussLegendre::new(96);
        let x_rule = GaussLegendre::new(32);
        let mut total = 0.0;
        for (lo, hi) in [(0.0, FRAC_PI_4), (FRAC_PI_4, FRAC_PI_2)] {
            total += eta_rule.integrate(lo, hi, |eta| {
                let wm = reduced_measure(eta, 0.0);
                x_rule.integrate(-1.0, 1.0, |x| hh_evaluate(a, eta, x) * hh_evaluate(b, eta, x))
                    * wm
            });
        }
        total
    }

    #[test]
    fn harmonics_are_orthonormal_under_the_reduced_measure() {
        let picks = [
            HHIndex::new(0, 0),
            HHIndex::new(2, 1),
            HHIndex::new(4, 0),
            HHIndex::new(4, 2),
            HHIndex::new(8, 2),
            HHIndex::new(12, 4),
        ];
        for (i, &a) in picks.iter().enumerate() {
            for &b in &picks[i..] {
                let got = overlap_2d_oracle(a, b);
                let want = if a == b { 1.0 } else { 0.0 };
                assert!(
                    (got - want).abs() < 1e-12,
                    "⟨({},{})|({},{})⟩ = {got}",
                    a.k,
                    a.ell,
                    b.k,
                    b.ell
                );
            }
        }
    }

    #[test]
    fn gram_matrix_is_identity_at_default_quadrature() {
        let quad = crate::potential::QuadratureSpec::default();
        let b = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(8)).unwrap();
        let g = gram_matrix(&b, &quad).unwrap();
        let defect = g.max_abs_diff(&Matrix::identity(b.len()));
        assert!(defect < 1e-12, "Gram defect {defect}");
    }

    #[test]
    fn coarse_quadrature_shows_up_in_the_gram_matrix() {
        let quad = crate::potential::QuadratureSpec {
            eta_nodes: 4,
            ..crate::potential::QuadratureSpec::default()
        };
        let b = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(12)).unwrap();
        let g = gram_matrix(&b, &quad).unwrap();
        let defect = g.max_abs_diff(&Matrix::identity(b.len()));
        assert!(defect > 1e-10, "4-node rule cannot resolve K = 12, defect {defect}");
    }

    #[test]
    fn lambda2_residual_is_exactly_zero_for_the_constant_harmonic() {
        let r = lambda2_check(HHIndex::new(0, 0), FdGrid::default_check()).unwrap();
        assert_eq!(r, 0.0, "K = 0 harmonic is constant; stencils vanish exactly");
    }

    #[test]
    fn lambda2_eigenvalue_holds_on_a_fine_grid() {
        for (k, ell) in [(4u32, 0u32), (4, 2), (2, 1), (8, 0), (12, 2)] {
            let r = lambda2_check(HHIndex::new(k, ell), FdGrid::default_check()).unwrap();
            assert!(
                r <= 1e-4,
                "Λ² residual for ({k}, {ell}) = {r:.3e}, eigenvalue {}",
                k * (k + 4)
            );
        }
    }

    #[test]
    fn lambda2_grid_must_stay_interior() {
        assert!(FdGrid::new(0.0, 1.0, 1e-3).is_err());
        assert!(FdGrid::new(0.001, 1.0, 1e-3).is_err(), "2h margin violated");
        assert!(FdGrid::new(0.05, FRAC_PI_2, 1e-3).is_err());
        assert!(FdGrid::new(0.5, 0.4, 1e-3).is_err());
    }

    /// (n+1)-th divided difference of a degree-≤n polynomial vanishes; use it
    /// to pin the polynomial degrees of the harmonic.
    fn divided_difference(points: &[(f64, f64)]) -> f64 {
        let mut coef: Vec<f64> = points.iter().map(|p| p.1).collect();
        for level in 1..points.len() {
            for i in (level..points.len()).rev() {
                coef[i] =
                    (coef[i] - coef[i - 1]) / (points[i].0 - points[i - level].0);
            }
        }
        *coef.last().unwrap()
    }

    #[test]
    fn polynomial_degrees_match_the_quantum_numbers() {
        for (k, ell) in [(8u32, 0u32), (8, 2), (12, 2), (10, 1)] {
            let idx = HHIndex::new(k, ell);
            let m = idx.jacobi_order();

            // Degree in t = cos2η after removing the (sinη cosη)^ℓ prefactor:
            // the (m+1)-th divided difference over m+2 points must vanish.
            let pts: Vec<(f64, f64)> = (0..(m + 2))
                .map(|i| {
                    let t = -0.9 + 1.8 * i as f64 / (m + 1) as f64;
                    let eta = 0.5 * (t.acos());
                    let sc = eta.sin() * eta.cos();
                    (t, eta_part_unnormalized(idx, eta) / sc.powi(ell as i32))
                })
                .collect();
            let dd = divided_difference(&pts);
            assert!(dd.abs() < 1e-8, "({k},{ell}): η-degree exceeds m = {m}, dd = {dd:.3e}");

            // Degree in x at fixed η is ℓ.
            let eta0 = 0.7;
            let pts: Vec<(f64, f64)> = (0..(ell + 2))
                .map(|i| {
                    let x = -0.8 + 1.6 * i as f64 / (ell + 1) as f64;
                    (x, hh_evaluate(idx, eta0, x))
                })
                .collect();
            let dd = divided_difference(&pts);
            assert!(dd.abs() < 1e-8, "({k},{ell}): x-degree exceeds ℓ, dd = {dd:.3e}");
        }
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(20)).unwrap();
        let b = enumerate_basis(&singlet(2.0), &BasisPolicy::FullToKmax(20)).unwrap();
        assert_eq!(a.indices, b.indices);
    }
}
