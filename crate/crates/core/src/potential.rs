//! Angular matrix of the Coulomb interaction.
//!
//! With r₁ = r sinη, r₂ = r cosη and x = cosθ₁₂, the full potential scales
//! as V = W(Ω)/r with the purely angular
//!
//!   W(η, x) = −Z/sinη − Z/cosη + 1/√(1 − sin2η · x).
//!
//! Matrix elements over the harmonics are assembled as:
//! - electron–nucleus part: diagonal in ℓ (the x-orthogonality is exact);
//!   the reduced weight cos²η sin²η cancels both 1/sinη and 1/cosη, so the
//!   η-integrand is smooth.
//! - electron–electron part: Legendre multipole expansion
//!   1/r₁₂ = Σ_q (r_<^q / r_>^{q+1}) P_q(x). The x-integrals are exact
//!   triple products ∫P_{ℓi} P_q P_{ℓj}; the triangle rule |ℓi−ℓj| ≤ q ≤
//!   ℓi+ℓj (with ℓi+ℓj+q even) makes the q-sum finite, so the expansion is
//!   exact, not truncated. The η-integral has a kink at η = π/4 where the
//!   electrons swap r_< ↔ r_>; the quadrature splits there by default.
//!
//! One-electron terms reduce to W = −Z·I exactly (no quadrature involved).
//!
//! Every assembly runs twice (η nodes doubled the second time) and must
//! agree to 1e−10, else it reports non-convergence instead of returning a
//! silently wrong matrix.

use crate::hyperbasis::{eta_part_unnormalized, normalization_constant, BasisSet};
use crate::linalg::Matrix;
use crate::quadrature::GaussLegendre;
use crate::special::ln_factorial;
use crate::{Error, Result};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

/// Angular quadrature controls.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct QuadratureSpec {
    /// Gauss–Legendre points per η interval (per subinterval when split).
    pub eta_nodes: u32,
    /// Split the η integral at π/4, the r₁ = r₂ kink of the e–e kernel.
    pub split_at_diagonal: bool,
    /// Cap on the multipole order q. None means the exact triangle-rule
    /// bound 2·ℓmax; a lower cap truncates the e–e sum (diagnostics only).
    pub qmax_override: Option<u32>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { eta_nodes: 64, split_at_diagonal: true, qmax_override: None }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(2..=4096).contains(&self.eta_nodes) {
            return Err(Error::Config(format!(
                "eta_nodes must lie in [2, 4096], got {}",
                self.eta_nodes
            )));
        }
        Ok(())
    }

    /// η nodes with weights that already include the reduced measure
    /// cos²η sin²η. `multiplier` scales the node count (convergence checks).
    pub(crate) fn eta_nodes_and_weights(&self, multiplier: u32) -> (Vec<f64>, Vec<f64>) {
        let rule = GaussLegendre::new(self.eta_nodes * multiplier);
        let spans: &[(f64, f64)] = if self.split_at_diagonal {
            &[(0.0, FRAC_PI_4), (FRAC_PI_4, FRAC_PI_2)]
        } else {
            &[(0.0, FRAC_PI_2)]
        };
        let mut etas = Vec::new();
        let mut weights = Vec::new();
        for &(a, b) in spans {
            let (xs, ws) = rule.mapped(a, b);
            for (x, w) in xs.into_iter().zip(ws) {
                let sc = x.sin() * x.cos();
                etas.push(x);
                weights.push(w * sc * sc);
            }
        }
        (etas, weights)
    }
}

/// ∫_{−1}^{1} P_{l1}(x) P_q(x) P_{l2}(x) dx, exactly (closed 3j² form).
///
/// Zero unless |l1 − l2| ≤ q ≤ l1 + l2 and l1 + q + l2 is even; otherwise
/// equal to 2·(3j-symbol with zero projections)², evaluated with
/// log-factorials. ∫P_a P_b dx = 2δ_ab/(2a+1) is the q = 0 special case.
pub fn legendre_triple(l1: u32, q: u32, l2: u32) -> f64 {
    let (a, b, c) = (l1 as i64, q as i64, l2 as i64);
    if (a + b + c) % 2 != 0 || c < (a - b).abs() || c > a + b {
        return 0.0;
    }
    let s = (a + b + c) / 2;
    let lf = |n: i64| ln_factorial(n as u64);
    let ln3j2 = lf(2 * s - 2 * a) + lf(2 * s - 2 * b) + lf(2 * s - 2 * c) - lf(2 * s + 1)
        + 2.0 * (lf(s) - lf(s - a) - lf(s - b) - lf(s - c));
    2.0 * ln3j2.exp()
}

/// Assembled angular matrix for one basis.
#[derive(Debug, Clone)]
pub struct PotentialMatrix {
    pub basis: BasisSet,
    pub quad: QuadratureSpec,
    pub w: Matrix,
}

/// Assemble W over the basis.
///
/// Two-electron assemblies are verified by node doubling (max element change
/// ≤ 1e−10 required) and checked for attractive dominance (diagonal < 0) at
/// Z ≥ 2. One-electron terms return −Z·I exactly.
pub fn assemble_w(basis: &BasisSet, quad: &QuadratureSpec) -> Result<PotentialMatrix> {
    quad.validate()?;
    if basis.is_empty() {
        return Err(Error::InvalidBasis("empty basis".into()));
    }
    if basis.term.ne == 1 {
        let mut w = Matrix::zeros(basis.len());
        for i in 0..basis.len() {
            w[(i, i)] = -basis.term.z;
        }
        return Ok(PotentialMatrix { basis: basis.clone(), quad: quad.clone(), w });
    }

    let w = assemble_at(basis, quad, 1);
    let w_fine = assemble_at(basis, quad, 2);
    let max_delta = w.max_abs_diff(&w_fine);
    if max_delta > 1e-10 {
        return Err(Error::QuadratureNotConverged { eta_nodes: quad.eta_nodes, max_delta });
    }
    if basis.term.z >= 2.0 {
        for i in 0..basis.len() {
            assert!(
                w[(i, i)] < 0.0,
                "attractive dominance violated at Z = {}: W[{i},{i}] = {}",
                basis.term.z,
                w[(i, i)]
            );
        }
    }
    Ok(PotentialMatrix { basis: basis.clone(), quad: quad.clone(), w })
}

/// One full assembly pass at a given node multiplier. Fixed summation order
/// throughout: results are bit-reproducible.
fn assemble_at(basis: &BasisSet, quad: &QuadratureSpec, multiplier: u32) -> Matrix {
    let n = basis.len();
    let z = basis.term.z;
    let (etas, wms) = quad.eta_nodes_and_weights(multiplier);

    // Normalized η-parts of every channel at every node.
    let chan: Vec<Vec<f64>> = basis
        .indices
        .iter()
        .map(|&idx| {
            let nk = normalization_constant(idx);
            etas.iter().map(|&eta| nk * eta_part_unnormalized(idx, eta)).collect()
        })
        .collect();

    // Kernels at every node: e–n (weight already cancels the poles), and the
    // multipole radial factors r_<^q / r_>^{q+1} for every q we can need.
    let ven: Vec<f64> = etas.iter().map(|&eta| -z * (1.0 / eta.sin() + 1.0 / eta.cos())).collect();
    let exact_qmax = 2 * basis.ell_max();
    let qcap = quad.qmax_override.unwrap_or(exact_qmax).min(exact_qmax);
    let kq: Vec<Vec<f64>> = (0..=qcap)
        .map(|q| {
            etas.iter()
                .map(|&eta| {
                    let (s, c) = (eta.sin(), eta.cos());
                    let (lo, hi) = if s <= c { (s, c) } else { (c, s) };
                    (lo / hi).powi(q as i32) / hi
                })
                .collect()
        })
        .collect();

    let mut w = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let (li, lj) = (basis.indices[i].ell, basis.indices[j].ell);
            let mut elem = 0.0;
            if li == lj {
                let x_int = 2.0 / (2.0 * li as f64 + 1.0);
                let mut s = 0.0;
                for k in 0..etas.len() {
                    s += chan[i][k] * chan[j][k] * ven[k] * wms[k];
                }
                elem += s * x_int;
            }
            let mut q = li.abs_diff(lj);
            while q <= (li + lj).min(qcap) {
                let x_int = legendre_triple(li, q, lj);
                let mut s = 0.0;
                let kqv = &kq[q as usize];
                for k in 0..etas.len() {
                    s += chan[i][k] * chan[j][k] * kqv[k] * wms[k];
                }
                elem += x_int * s;
                q += 2;
            }
            w[(i, j)] = elem;
            w[(j, i)] = elem;
        }
    }
    w
}

// ─── On-disk cache ──────────────────────────────────────────────────────────
//
// Versioned little-endian binary: magic, version, the full key (so a renamed
// file cannot masquerade as another basis), dimension, the upper triangle of
// W as raw f64 bits, and an FNV-1a checksum of the payload. Exact bit storage
// keeps warm runs byte-identical to cold ones.

const CACHE_MAGIC: &[u8; 4] = b"HLWC";
const CACHE_VERSION: u32 = 1;

/// Identifies one W matrix on disk.
#[derive(Debug, Clone, PartialEq)]
pub struct CacheKey {
    pub ne: u32,
    pub z: f64,
    pub policy: String,
    pub eta_nodes: u32,
    pub split_at_diagonal: bool,
    pub qmax_override: Option<u32>,
}

impl CacheKey {
    pub fn new(basis: &BasisSet, quad: &QuadratureSpec) -> CacheKey {
        CacheKey {
            ne: basis.term.ne,
            z: basis.term.z,
            policy: basis.policy.key_string(),
            eta_nodes: quad.eta_nodes,
            split_at_diagonal: quad.split_at_diagonal,
            qmax_override: quad.qmax_override,
        }
    }

    /// Deterministic file name. Z enters by exact bit pattern.
    pub fn file_name(&self) -> String {
        format!(
            "w-ne{}-z{:016x}-{}-eta{}-split{}-q{}.v{}.bin",
            self.ne,
            self.z.to_bits(),
            self.policy,
            self.eta_nodes,
            u8::from(self.split_at_diagonal),
            self.qmax_override.map_or("auto".to_string(), |q| q.to_string()),
            CACHE_VERSION,
        )
    }

    fn header_bytes(&self) -> Vec<u8> {
        let mut h = Vec::new();
        h.extend_from_slice(&self.ne.to_le_bytes());
        h.extend_from_slice(&self.z.to_bits().to_le_bytes());
        h.extend_from_slice(&(self.policy.len() as u32).to_le_bytes());
        h.extend_from_slice(self.policy.as_bytes());
        h.extend_from_slice(&self.eta_nodes.to_le_bytes());
        h.push(u8::from(self.split_at_diagonal));
        h.extend_from_slice(&self.qmax_override.unwrap_or(u32::MAX).to_le_bytes());
        h
    }
}

fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf2_9ce4_8422_2325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

/// How a matrix was obtained by `load_or_assemble`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CacheOutcome {
    /// No cache directory configured.
    Disabled,
    /// Assembled now and stored.
    Cold,
    /// Loaded from a verified cache file.
    Warm,
}

/// Write W to `dir` under the key's file name.
pub fn write_cache(dir: &Path, key: &CacheKey, w: &Matrix) -> Result<PathBuf> {
    std::fs::create_dir_all(dir)?;
    let dim = w.dim();
    let mut payload = Vec::with_capacity(dim * (dim + 1) / 2 * 8);
    for i in 0..dim {
        for j in i..dim {
            payload.extend_from_slice(&w[(i, j)].to_bits().to_le_bytes());
        }
    }
    let mut bytes = Vec::new();
    bytes.extend_from_slice(CACHE_MAGIC);
    bytes.extend_from_slice(&CACHE_VERSION.to_le_bytes());
    bytes.extend_from_slice(&key.header_bytes());
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    bytes.extend_from_slice(&payload);
    bytes.extend_from_slice(&fnv1a64(&payload).to_le_bytes());
    let path = dir.join(key.file_name());
    let mut f = std::fs::File::create(&path)?;
    f.write_all(&bytes)?;
    Ok(path)
}

/// Load W for a key. Ok(None) when absent or written by an older format
/// version (callers recompute); CacheCorrupt when present but damaged or
/// inconsistent with the key.
pub fn read_cache(dir: &Path, key: &CacheKey) -> Result<Option<Matrix>> {
    let path = dir.join(key.file_name());
    let mut bytes = Vec::new();
    match std::fs::File::open(&path) {
        Ok(mut f) => {
            f.read_to_end(&mut bytes)?;
        }
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => return Ok(None),
        Err(e) => return Err(e.into()),
    }
    let corrupt = |why: &str| Error::CacheCorrupt(format!("{}: {why}", path.display()));
    if bytes.len() < 8 || &bytes[0..4] != CACHE_MAGIC {
        return Err(corrupt("bad magic"));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != CACHE_VERSION {
        return Ok(None); // stale format: recompute and overwrite
    }
    let header = key.header_bytes();
    let header_end = 8 + header.len();
    if bytes.len() < header_end + 4 {
        return Err(corrupt("truncated header"));
    }
    if bytes[8..header_end] != header[..] {
        return Err(corrupt("key mismatch"));
    }
    let dim = u32::from_le_bytes(bytes[header_end..header_end + 4].try_into().unwrap()) as usize;
    let n_entries = dim * (dim + 1) / 2;
    let payload_end = header_end + 4 + n_entries * 8;
    if bytes.len() != payload_end + 8 {
        return Err(corrupt("wrong length"));
    }
    let payload = &bytes[header_end + 4..payload_end];
    let stored_sum = u64::from_le_bytes(bytes[payload_end..].try_into().unwrap());
    if fnv1a64(payload) != stored_sum {
        return Err(corrupt("checksum mismatch"));
    }
    let mut w = Matrix::zeros(dim);
    let mut off = 0;
    for i in 0..dim {
        for j in i..dim {
            let bits = u64::from_le_bytes(payload[off..off + 8].try_into().unwrap());
            let v = f64::from_bits(bits);
            w[(i, j)] = v;
            w[(j, i)] = v;
            off += 8;
        }
    }
    Ok(Some(w))
}

/// Cache-aware assembly. A verified hit skips assembly entirely and is
/// bit-identical to what assembly would produce (exact bits are stored).
pub fn load_or_assemble(
    basis: &BasisSet,
    quad: &QuadratureSpec,
    cache_dir: Option<&Path>,
) -> Result<(PotentialMatrix, CacheOutcome)> {
    let Some(dir) = cache_dir else {
        return Ok((assemble_w(basis, quad)?, CacheOutcome::Disabled));
    };
    let key = CacheKey::new(basis, quad);
    if let Some(w) = read_cache(dir, &key)? {
        if w.dim() != basis.len() {
            return Err(Error::CacheCorrupt(format!(
                "{}: dimension {} does not match basis size {}",
                dir.join(key.file_name()).display(),
                w.dim(),
                basis.len()
            )));
        }
        return Ok((
            PotentialMatrix { basis: basis.clone(), quad: quad.clone(), w },
            CacheOutcome::Warm,
        ));
    }
    let pm = assemble_w(basis, quad)?;
    write_cache(dir, &key, &pm.w)?;
    Ok((pm, CacheOutcome::Cold))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hyperbasis::{enumerate_basis, BasisPolicy, TermLabel};
    use crate::special::legendre_p;
    use crate::linalg::sym_eigen;

    fn singlet_basis(z: f64, kmax: u32) -> BasisSet {
        enumerate_basis(&TermLabel::singlet_s(z).unwrap(), &BasisPolicy::FullToKmax(kmax))
            .unwrap()
    }

    /// Exact Gauss–Legendre oracle for the triple product: degree l1+q+l2,
    /// so (l1+q+l2)/2 + 1 points are already exact.
    fn triple_gl_oracle(l1: u32, q: u32, l2: u32) -> f64 {
        let rule = GaussLegendre::new((l1 + q + l2) / 2 + 2);
        rule.integrate(-1.0, 1.0, |x| {
            legendre_p(l1, x) * legendre_p(q, x) * legendre_p(l2, x)
        })
    }

    #[test]
    fn legendre_triple_known_values() {
        assert!((legendre_triple(0, 0, 0) - 2.0).abs() < 1e-15);
        assert!((legendre_triple(1, 0, 1) - 2.0 / 3.0).abs() < 1e-14);
        assert!((legendre_triple(1, 1, 0) - 2.0 / 3.0).abs() < 1e-14);
        assert!((legendre_triple(1, 1, 2) - 4.0 / 15.0).abs() < 1e-14);
        assert!((legendre_triple(2, 2, 2) - 4.0 / 35.0).abs() < 1e-14);
        // Parity and triangle violations vanish identically.
        assert_eq!(legendre_triple(1, 1, 1), 0.0);
        assert_eq!(legendre_triple(0, 2, 0), 0.0);
        assert_eq!(legendre_triple(5, 1, 2), 0.0);
    }

    #[test]
    fn legendre_triple_matches_exact_quadrature() {
        for l1 in 0..=8 {
            for q in 0..=8 {
                for l2 in 0..=8 {
                    let got = legendre_triple(l1, q, l2);
                    let want = triple_gl_oracle(l1, q, l2);
                    assert!(
                        (got - want).abs() < 1e-12 * want.abs().max(1.0),
                        "({l1}, {q}, {l2}): closed {got} vs quadrature {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn one_electron_matrix_is_minus_z_exactly() {
        for (z, ell) in [(1.0, 0u32), (2.0, 1), (3.0, 2)] {
            let t = TermLabel::hydrogenic(z, ell).unwrap();
            let b = enumerate_basis(&t, &BasisPolicy::FullToKmax(0)).unwrap();
            let pm = assemble_w(&b, &QuadratureSpec::default()).unwrap();
            assert_eq!(pm.w.dim(), 1);
            assert_eq!(pm.w[(0, 0)], -z, "exact by construction, no quadrature");
        }
    }

    #[test]
    fn w00_matches_the_closed_form() {
        // ⟨00|W|00⟩ integrates in closed form: (8/(3π))(√2 − 4Z).
        for z in [0.0, 1.0, 2.0] {
            let b = singlet_basis(z, 0);
            let pm = assemble_w(&b, &QuadratureSpec::default()).unwrap();
            let want = 8.0 / (3.0 * std::f64::consts::PI) * (2.0f64.sqrt() - 4.0 * z);
            assert!(
                (pm.w[(0, 0)] - want).abs() < 1e-12,
                "Z = {z}: W00 = {} vs closed form {want}",
                pm.w[(0, 0)]
            );
        }
    }

    /// Independent route: 2-D tensor-product Gauss–Legendre on the raw
    /// potential (no multipole expansion), n×n nodes per η subinterval.
    /// The e–e kernel's integrable singularity at (π/4, 1) limits plain
    /// tensor rules to O(n⁻²) (measured: ~6e−5 at n = 200 on ℓ > 0 pairs).
    fn w_element_2d_oracle(b: &BasisSet, i: usize, j: usize, n: u32) -> f64 {
        let (eta_rule, x_rule) = (GaussLegendre::new(n), GaussLegendre::new(n));
        let z = b.term.z;
        let (ii, jj) = (b.indices[i], b.indices[j]);
        let (ni, nj) = (normalization_constant(ii), normalization_constant(jj));
        let mut total = 0.0;
        for (lo, hi) in [(0.0, FRAC_PI_4), (FRAC_PI_4, FRAC_PI_2)] {
            total += eta_rule.integrate(lo, hi, |eta| {
                let wm = crate::hyperbasis::reduced_measure(eta, 0.0);
                let fi = ni * eta_part_unnormalized(ii, eta);
                let fj = nj * eta_part_unnormalized(jj, eta);
                let s2eta = (2.0 * eta).sin();
                x_rule.integrate(-1.0, 1.0, |x| {
                    let w = -z / eta.sin() - z / eta.cos() + 1.0 / (1.0 - s2eta * x).sqrt();
                    legendre_p(ii.ell, x) * w * legendre_p(jj.ell, x)
                }) * wm * fi * fj
            });
        }
        total
    }

    #[test]
    fn multipole_route_matches_direct_2d_quadrature() {
        // Representative entries: the main diagonal, an e–n-coupled pair
        // (same ℓ), and e–e-only pairs (different ℓ). The tensor oracle's own
        // h² error is removed by Richardson extrapolation of the 200- and
        // 400-node values, leaving it sharp to ~1e−7.
        let b = singlet_basis(2.0, 4); // [(0,0), (2,1), (4,0), (4,2)]
        let pm = assemble_w(&b, &QuadratureSpec::default()).unwrap();
        for (i, j) in [(0, 0), (0, 1), (0, 2), (1, 1), (1, 3), (3, 3)] {
            let coarse = w_element_2d_oracle(&b, i, j, 200);
            let fine = w_element_2d_oracle(&b, i, j, 400);
            let want = fine + (fine - coarse) / 3.0;
            let got = pm.w[(i, j)];
            assert!(
                (got - want).abs() < 1e-6,
                "W[{i},{j}] = {got} vs direct 2-D {want} (raw {fine})"
            );
        }
    }

    #[test]
    fn assembly_is_symmetric_and_deterministic() {
        let b = singlet_basis(2.0, 12);
        let pm1 = assemble_w(&b, &QuadratureSpec::default()).unwrap();
        let pm2 = assemble_w(&b, &QuadratureSpec::default()).unwrap();
        assert_eq!(pm1.w.max_asymmetry(), 0.0, "mirrored by construction");
        assert_eq!(pm1.w.max_abs_diff(&pm2.w), 0.0, "bit-identical reassembly");
    }

    #[test]
    fn unsplit_quadrature_fails_the_convergence_check() {
        // The e–e kernel kink at η = π/4 defeats a straddling rule: node
        // doubling keeps moving the answer well above the 1e−10 gate.
        let b = singlet_basis(2.0, 4);
        let quad = QuadratureSpec { split_at_diagonal: false, ..QuadratureSpec::default() };
        match assemble_w(&b, &quad) {
            Err(Error::QuadratureNotConverged { max_delta, .. }) => {
                assert!(max_delta > 1e-10);
            }
            other => panic!("expected QuadratureNotConverged, got {other:?}"),
        }
    }

    #[test]
    fn attractive_dominance_holds_for_helium() {
        let b = singlet_basis(2.0, 12);
        let pm = assemble_w(&b, &QuadratureSpec::default()).unwrap();
        for i in 0..b.len() {
            assert!(pm.w[(i, i)] < 0.0, "W[{i},{i}] = {}", pm.w[(i, i)]);
        }
    }

    #[test]
    fn pure_repulsion_is_positive_semidefinite_but_not_entrywise() {
        // Z = 0 leaves only 1/r₁₂: a positive operator, so the matrix is PSD
        // with positive diagonal. Entrywise positivity does NOT hold: the
        // (0,0)–(4,0) element is negative because 1/r_> peaks at η = π/4
        // exactly where the K = 4 Jacobi factor is negative.
        let b = singlet_basis(0.0, 8);
        let pm = assemble_w(&b, &QuadratureSpec::default()).unwrap();
        for i in 0..b.len() {
            assert!(pm.w[(i, i)] > 0.0, "diagonal W[{i},{i}] = {}", pm.w[(i, i)]);
        }
        let eig = sym_eigen(&pm.w).unwrap();
        assert!(eig.values[0] > -1e-12, "lowest eigenvalue {}", eig.values[0]);
        let i00 = 0;
        let i40 = b.indices.iter().position(|&x| x == crate::hyperbasis::HHIndex::new(4, 0)).unwrap();
        assert!(
            pm.w[(i00, i40)] < -1e-3,
            "expected a clearly negative off-diagonal, got {}",
            pm.w[(i00, i40)]
        );
    }

    #[test]
    fn default_qmax_equals_triangle_bound() {
        let b = singlet_basis(2.0, 8);
        let pm_auto = assemble_w(&b, &QuadratureSpec::default()).unwrap();
        let pm_capped = assemble_w(
            &b,
            &QuadratureSpec { qmax_override: Some(2 * b.ell_max()), ..QuadratureSpec::default() },
        )
        .unwrap();
        assert_eq!(pm_auto.w.max_abs_diff(&pm_capped.w), 0.0);
        // A hard truncation at q = 0 visibly changes ℓ > 0 elements.
        let pm_trunc = assemble_w(
            &b,
            &QuadratureSpec { qmax_override: Some(0), ..QuadratureSpec::default() },
        )
        .unwrap();
        assert!(pm_auto.w.max_abs_diff(&pm_trunc.w) > 1e-3);
    }

    #[test]
    fn cache_roundtrip_is_bit_exact() {
        let dir = tempfile::tempdir().unwrap();
        let b = singlet_basis(2.0, 8);
        let quad = QuadratureSpec::default();
        let (pm_cold, outcome) = load_or_assemble(&b, &quad, Some(dir.path())).unwrap();
        assert_eq!(outcome, CacheOutcome::Cold);
        let (pm_warm, outcome) = load_or_assemble(&b, &quad, Some(dir.path())).unwrap();
        assert_eq!(outcome, CacheOutcome::Warm);
        assert_eq!(pm_cold.w.max_abs_diff(&pm_warm.w), 0.0, "warm load is bit-exact");
    }

    #[test]
    fn distinct_keys_do_not_collide() {
        let dir = tempfile::tempdir().unwrap();
        let b8 = singlet_basis(2.0, 8);
        let b4 = singlet_basis(2.0, 4);
        let quad = QuadratureSpec::default();
        load_or_assemble(&b8, &quad, Some(dir.path())).unwrap();
        let (pm4, outcome) = load_or_assemble(&b4, &quad, Some(dir.path())).unwrap();
        assert_eq!(outcome, CacheOutcome::Cold, "different Kmax is a different key");
        assert_eq!(pm4.w.dim(), 4);
    }

    #[test]
    fn corrupted_cache_files_are_reported() {
        let dir = tempfile::tempdir().unwrap();
        let b = singlet_basis(2.0, 4);
        let quad = QuadratureSpec::default();
        let key = CacheKey::new(&b, &quad);
        let (_, _) = load_or_assemble(&b, &quad, Some(dir.path())).unwrap();
        let path = dir.path().join(key.file_name());

        // Flip one payload byte: checksum must catch it.
        let mut bytes = std::fs::read(&path).unwrap();
        let mid = bytes.len() - 16;
        bytes[mid] ^= 0xFF;
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(read_cache(dir.path(), &key), Err(Error::CacheCorrupt(_))));

        // Truncation.
        let (_, _) = {
            std::fs::remove_file(&path).unwrap();
            load_or_assemble(&b, &quad, Some(dir.path())).unwrap()
        };
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 9]).unwrap();
        assert!(matches!(read_cache(dir.path(), &key), Err(Error::CacheCorrupt(_))));

        // Bad magic.
        std::fs::write(&path, b"NOPE").unwrap();
        assert!(matches!(read_cache(dir.path(), &key), Err(Error::CacheCorrupt(_))));
    }

    #[test]
    fn stale_cache_version_triggers_silent_recompute() {
        let dir = tempfile::tempdir().unwrap();
        let b = singlet_basis(2.0, 4);
        let quad = QuadratureSpec::default();
        let key = CacheKey::new(&b, &quad);
        load_or_assemble(&b, &quad, Some(dir.path())).unwrap();
        let path = dir.path().join(key.file_name());
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[4..8].copy_from_slice(&999u32.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        assert!(read_cache(dir.path(), &key).unwrap().is_none(), "stale = miss, not corrupt");
        let (_, outcome) = load_or_assemble(&b, &quad, Some(dir.path())).unwrap();
        assert_eq!(outcome, CacheOutcome::Cold);
    }
}
