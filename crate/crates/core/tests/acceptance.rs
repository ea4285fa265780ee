//! Acceptance gate: one test per shipping criterion, each printing a single
//! pass/fail line with the measured numbers next to its pinned tolerance.
//!
//! The three helium Kmax = 40 criteria share one heavy fixture (a convergence
//! sweep and a four-state spectrum run) through a OnceLock; the sweep warms
//! the W cache that the spectrum run then loads.

use std::path::PathBuf;
use std::sync::OnceLock;
use std::time::Instant;

use hyperladder::hyperbasis::{enumerate_basis, lambda2_check, BasisPolicy, FdGrid, TermLabel};
use hyperladder::ladder::{verify_factorization_identities, LadderMatrices};
use hyperladder::pipeline::{
    self, BasisSection, CacheSection, ConvergePoint, OutputSection, Overrides, QuadratureSection,
    RunConfig, SpectrumReport, SystemSection, TermSection,
};
use hyperladder::potential::{assemble_w, QuadratureSpec};
use hyperladder::quadrature::GaussLegendre;
use hyperladder::spectral::{
    build_spectral_matrix, energy_ladder, lowest_eigenvalue, orthogonalize_states,
    radial_wavefunction, state_overlap, variational_oracle,
};

fn helium_config(kmax: u32, n_max: usize, out: PathBuf, cache: PathBuf, format: &str) -> RunConfig {
    RunConfig {
        format_version: 1,
        system: SystemSection { ne: 2, z: 2.0 },
        term: TermSection::default(),
        basis: BasisSection { policy: "full".into(), kmax: Some(kmax), indices: None },
        n_max,
        quadrature: QuadratureSection::default(),
        cache: CacheSection { dir: Some(cache) },
        output: OutputSection { path: out, format: format.into() },
    }
}

struct HeavyRuns {
    sweep: Vec<ConvergePoint>,
    sweep_seconds: f64,
    report40: SpectrumReport,
    spectrum_seconds: f64,
}

/// Kmax sweep {0, 4, ..., 40} plus the full_to_Kmax(40), n ≤ 3 spectrum.
fn heavy() -> &'static HeavyRuns {
    static CELL: OnceLock<HeavyRuns> = OnceLock::new();
    CELL.get_or_init(|| {
        let dir = tempfile::tempdir().expect("tempdir");
        let cache = dir.path().join("cache");
        let kmax_list: Vec<u32> = (0..=10).map(|i| 4 * i).collect();

        let cfg = helium_config(40, 0, dir.path().join("sweep.csv"), cache.clone(), "csv");
        let run = pipeline::validate(&cfg, &Overrides::default()).expect("sweep config");
        let t0 = Instant::now();
        let sweep = pipeline::cmd_converge(&run, &kmax_list).expect("sweep run");
        let sweep_seconds = t0.elapsed().as_secs_f64();
        assert!(!sweep.truncated(), "helium must bind its ground state at every Kmax");

        let cfg = helium_config(40, 3, dir.path().join("he40.json"), cache, "structured");
        let run = pipeline::validate(&cfg, &Overrides::default()).expect("spectrum config");
        let t0 = Instant::now();
        let out = pipeline::cmd_spectrum(&run).expect("spectrum run");
        let spectrum_seconds = t0.elapsed().as_secs_f64();
        assert!(!out.truncated(), "helium must bind four states at Kmax = 40");

        HeavyRuns { sweep: sweep.report.points, sweep_seconds, report40: out.report, spectrum_seconds }
    })
}

#[test]
fn criterion_1_hydrogen_exactness() {
    let t0 = Instant::now();
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    let mut levels = 0usize;
    for q in [1.0, 2.0, 3.0] {
        for ell in 0..=2u32 {
            let term = TermLabel::hydrogenic(q, ell).unwrap();
            let spectrum =
                energy_ladder(&term, &BasisPolicy::FullToKmax(ell), 9, &quad).unwrap();
            assert_eq!(spectrum.states.len(), 10, "hydrogen ladder must not truncate");
            for st in &spectrum.states {
                let nr = (st.n as f64) + f64::from(ell) + 1.0;
                worst = worst.max((st.energy + q * q / (2.0 * nr * nr)).abs());
                levels += 1;
            }
        }
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-12;
    println!(
        "criterion 1: {} — hydrogen ladder vs closed-form spectrum, max |dE| = {worst:.2e} \
         (tolerance 1e-12, {levels} levels, {secs:.2} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "max |dE| = {worst:.3e} exceeds 1e-12");
}

#[test]
fn criterion_2_factorization_identities() {
    let t0 = Instant::now();
    let term = TermLabel::singlet_s(2.0).unwrap();
    let basis = enumerate_basis(&term, &BasisPolicy::FullToKmax(20)).unwrap();
    let w = assemble_w(&basis, &QuadratureSpec::default()).unwrap();
    let (mut r1, mut r2) = (0.0f64, 0.0f64);
    for n in 1..=5usize {
        let lm = LadderMatrices::build(n, &w);
        let (a, b) = verify_factorization_identities(&lm, &w);
        r1 = r1.max(a);
        r2 = r2.max(b);
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = r1 <= 1e-10 && r2 <= 1e-10;
    println!(
        "criterion 2: {} — rung identities on the Kmax = 20 basis, anticommutator residual \
         {r1:.2e}, beta-shift residual {r2:.2e} (tolerance 1e-10, rungs 1..5, {secs:.2} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "residuals {r1:.3e}, {r2:.3e} exceed 1e-10");
}

#[test]
fn criterion_3_harmonic_suite() {
    let t0 = Instant::now();
    let term = TermLabel::singlet_s(2.0).unwrap();
    let quad = QuadratureSpec::default();

    let basis20 = enumerate_basis(&term, &BasisPolicy::FullToKmax(20)).unwrap();
    let g = hyperladder::hyperbasis::gram_matrix(&basis20, &quad).unwrap();
    let mut gram_dev = 0.0f64;
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let want = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((g[(i, j)] - want).abs());
        }
    }

    let basis12 = enumerate_basis(&term, &BasisPolicy::FullToKmax(12)).unwrap();
    let mut lam_dev = 0.0f64;
    for &idx in &basis12.indices {
        lam_dev = lam_dev.max(lambda2_check(idx, FdGrid::default_check()).unwrap());
    }

    let secs = t0.elapsed().as_secs_f64();
    let pass = gram_dev <= 1e-10 && lam_dev <= 1e-4;
    println!(
        "criterion 3: {} — Gram(Kmax = 20) off identity by {gram_dev:.2e} (tolerance 1e-10); \
         grand-angular residual {lam_dev:.2e} over all K <= 12 (tolerance 1e-4) ({secs:.2} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "gram {gram_dev:.3e} (limit 1e-10) / lambda2 {lam_dev:.3e} (limit 1e-4)");
}

#[test]
fn criterion_4_helium_ground_state() {
    let h = heavy();
    let e1 = h.report40.states[0].energy_hartree;
    let reference = -2.9037175;
    let delta = (e1 - reference).abs();
    let pass = delta <= 0.02;
    println!(
        "criterion 4: {} — E1(Kmax = 40) = {e1:.7} vs published {reference}, |delta| = \
         {delta:.4} (tolerance 0.02, {:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        h.spectrum_seconds
    );
    assert!(
        pass,
        "E1(Kmax = 40) = {e1:.7} misses the published {reference} by {delta:.4} Hartree \
         (tolerance 0.02); the shared-exponent ladder ansatz saturates near -2.5936 — \
         see README, accuracy notes"
    );
}

#[test]
fn criterion_5_convergence_monotonicity() {
    let h = heavy();
    let points = &h.sweep;
    assert_eq!(points.len(), 11, "sweep must cover Kmax = 0, 4, ..., 40");
    let mut monotone = true;
    for pair in points.windows(2) {
        if pair[1].e1_hartree > pair[0].e1_hartree + 1e-12 {
            monotone = false;
        }
    }
    let e20 = points.iter().find(|p| p.kmax == 20).unwrap().e1_hartree;
    let e40 = points.iter().find(|p| p.kmax == 40).unwrap().e1_hartree;
    let plateau = (e40 - e20).abs();
    let pass = monotone && plateau <= 0.05;
    println!(
        "criterion 5: {} — E1 non-increasing over Kmax = 0..40: {monotone}; |E1(40) - E1(20)| \
         = {plateau:.2e} (tolerance 0.05, {:.1} s)",
        if pass { "PASS" } else { "FAIL" },
        h.sweep_seconds
    );
    assert!(pass, "monotone = {monotone}, plateau = {plateau:.3e} (limit 0.05)");
}

#[test]
fn criterion_6_excited_ladder() {
    let h = heavy();
    let states = &h.report40.states;
    assert_eq!(states.len(), 4, "Kmax = 40 must bind rungs 0..3");
    let (e2, e3, e4) =
        (states[1].energy_hartree, states[2].energy_hartree, states[3].energy_hartree);

    // Hard gate: a strictly rising, still-bound excited ladder.
    let ordered = e2 < e3 && e3 < e4 && e4 < 0.0;

    // Soft gate: proximity to the published energies. A miss is acceptable
    // if and only if the run's own report flags the deviation.
    let refs = [-2.144954, -2.06033, -2.0318];
    let deltas: Vec<f64> =
        [e2, e3, e4].iter().zip(&refs).map(|(e, r)| (e - r).abs()).collect();
    let soft = deltas.iter().all(|d| *d <= 0.06);
    let flagged = h
        .report40
        .reference
        .as_ref()
        .map(|r| {
            r.any_outside_tolerance
                && r.rows.iter().all(|row| {
                    row.within_tolerance == (row.delta_hartree.abs() <= row.tolerance_hartree)
                })
        })
        .unwrap_or(false);
    let pass = ordered && (soft || flagged);
    println!(
        "criterion 6: {} — ladder E2 = {e2:.7} < E3 = {e3:.7} < E4 = {e4:.7} < 0: {ordered}; \
         published-reference deltas {:.4}/{:.4}/{:.4} vs soft tolerance 0.06{}",
        if pass { "PASS" } else { "FAIL" },
        deltas[0],
        deltas[1],
        deltas[2],
        if soft {
            ""
        } else if flagged {
            " — outside, deviation flagged in the structured report"
        } else {
            " — outside and NOT flagged"
        }
    );
    assert!(ordered, "excited ladder must rise strictly and stay bound: {e2} {e3} {e4}");
    assert!(
        soft || flagged,
        "soft-gate miss (deltas {deltas:?}) requires the report to flag the deviation"
    );
}

#[test]
fn criterion_7_oracle_equivalence() {
    let t0 = Instant::now();
    let term = TermLabel::singlet_s(2.0).unwrap();
    let quad = QuadratureSpec::default();
    let mut worst = 0.0f64;
    for kmax in [4u32, 8, 12] {
        let policy = BasisPolicy::FullToKmax(kmax);
        let basis = enumerate_basis(&term, &policy).unwrap();
        let w = assemble_w(&basis, &quad).unwrap();
        let (lam_spectral, _) = lowest_eigenvalue(&build_spectral_matrix(0, &w), 0).unwrap();
        let (lam_oracle, _) = variational_oracle(&term, &policy, &quad).unwrap();
        worst = worst.max((lam_spectral - lam_oracle).abs());
    }
    let secs = t0.elapsed().as_secs_f64();
    let pass = worst <= 1e-8;
    println!(
        "criterion 7: {} — closed-form route vs scanned Rayleigh quotient, max |d lambda| = \
         {worst:.2e} (tolerance 1e-8, Kmax in {{4, 8, 12}}, {secs:.2} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "lambda routes disagree by {worst:.3e} (limit 1e-8)");
}

#[test]
fn criterion_8_orthogonalization() {
    let t0 = Instant::now();
    let term = TermLabel::hydrogenic(1.0, 0).unwrap();
    let quad = QuadratureSpec::default();
    let spectrum = energy_ladder(&term, &BasisPolicy::FullToKmax(0), 3, &quad).unwrap();
    let wfs: Vec<_> =
        spectrum.states.iter().map(|s| radial_wavefunction(s, &spectrum.basis)).collect();

    // Closed-form overlaps against straight quadrature on two Gauss-Legendre
    // panels wide enough for the slowest e^{-r/4} tail.
    let rule = GaussLegendre::new(200);
    let mut overlap_dev = 0.0f64;
    for i in 0..wfs.len() {
        for j in i..wfs.len() {
            let mut numeric = 0.0;
            for (a, b) in [(0.0, 60.0), (60.0, 400.0)] {
                let (xs, ws) = rule.mapped(a, b);
                for (x, w) in xs.iter().zip(&ws) {
                    numeric += wfs[i].eval(*x) * wfs[j].eval(*x) * x * x * w;
                }
            }
            overlap_dev = overlap_dev.max((state_overlap(&wfs[i], &wfs[j]) - numeric).abs());
        }
    }

    let set = orthogonalize_states(&wfs).unwrap();
    let g = set.gram();
    let mut gram_dev = 0.0f64;
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let want = if i == j { 1.0 } else { 0.0 };
            gram_dev = gram_dev.max((g[(i, j)] - want).abs());
        }
    }

    let secs = t0.elapsed().as_secs_f64();
    let pass = overlap_dev <= 1e-8 && gram_dev <= 1e-10;
    println!(
        "criterion 8: {} — closed-form vs quadrature overlaps |dS| = {overlap_dev:.2e} \
         (tolerance 1e-8); orthogonalized Gram off identity by {gram_dev:.2e} \
         (tolerance 1e-10) ({secs:.2} s)",
        if pass { "PASS" } else { "FAIL" }
    );
    assert!(pass, "overlap dev {overlap_dev:.3e} (limit 1e-8) / gram dev {gram_dev:.3e} (limit 1e-10)");
}

#[test]
fn criterion_9_determinism() {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut all_equal = true;
    for format in ["csv", "structured"] {
        // Separate cache per format so each one starts genuinely cold (the
        // cache key is the basis and quadrature, not the output format).
        let cache = dir.path().join(format!("cache-{format}"));
        let out = dir.path().join(format!("table.{format}"));
        let cfg = helium_config(8, 1, out.clone(), cache.clone(), format);
        let run = pipeline::validate(&cfg, &Overrides::default()).unwrap();
        // First run assembles (cold cache), second loads (warm); the report
        // bytes may not depend on which happened.
        let cold = pipeline::cmd_spectrum(&run).unwrap();
        let cold_bytes = std::fs::read(&out).unwrap();
        let warm = pipeline::cmd_spectrum(&run).unwrap();
        let warm_bytes = std::fs::read(&out).unwrap();
        assert_eq!(cold.cache, pipeline::CacheOutcome::Cold, "first {format} run must assemble");
        assert_eq!(warm.cache, pipeline::CacheOutcome::Warm, "second {format} run must hit cache");
        all_equal &= cold.rendered.as_bytes() == cold_bytes.as_slice();
        all_equal &= warm.rendered.as_bytes() == warm_bytes.as_slice();
        all_equal &= cold_bytes == warm_bytes;
    }
    let secs = t0.elapsed().as_secs_f64();
    println!(
        "criterion 9: {} — repeated runs byte-identical across cold/warm cache, csv and \
         structured ({secs:.2} s)",
        if all_equal { "PASS" } else { "FAIL" }
    );
    assert!(all_equal, "outputs differ between identical runs");
}
