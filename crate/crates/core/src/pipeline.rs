//! Run orchestration: versioned TOML config in, deterministic reports out.
//!
//! A run is described by one [`RunConfig`]. Validation maps the raw sections
//! onto the typed term/basis/quadrature structures and resolves flag and
//! environment overrides; the commands then assemble Ŵ (through the cache
//! when one is configured), walk the energy ladder, and render the result as
//! a flat CSV table or a structured JSON report.
//!
//! Rendered output is byte-deterministic for a fixed (config, code version):
//! timings and cache outcomes are returned to the caller for stderr logging
//! and never enter the report.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::hyperbasis::{
    enumerate_basis, gram_matrix, lambda2_check, BasisPolicy, FdGrid, HHIndex, TermLabel,
};
use crate::ladder::{verify_factorization_identities, LadderMatrices};
use crate::linalg::{sym_eigen, Matrix};
use crate::potential::{assemble_w, load_or_assemble, PotentialMatrix, QuadratureSpec};
pub use crate::potential::CacheOutcome;
use crate::spectral::{
    build_spectral_matrix, energy_ladder_from_w, lowest_eigenvalue, orthogonalize_states,
    radial_wavefunction, variational_oracle, SpectrumResult,
};
use crate::Result;

/// Config schema version accepted by this build.
pub const FORMAT_VERSION: u32 = 1;

/// Environment fallback for the cache directory (weakest override).
pub const CACHE_DIR_ENV: &str = "HYPERLADDER_CACHE_DIR";

/// Exact header of the spectrum CSV table.
pub const CSV_HEADER: &str = "n,lambda_au,energy_hartree,basis_size,Kmax";

/// Exact header of the convergence-sweep CSV table.
pub const CONVERGE_CSV_HEADER: &str = "Kmax,basis_size,E1_hartree,delta_hartree";

// ---------------------------------------------------------------------------
// Config surface

/// One run, as written by the user. Unknown keys are errors: a typo in a
/// tolerance-bearing field must not silently fall back to a default.
#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub format_version: u32,
    pub system: SystemSection,
    #[serde(default)]
    pub term: TermSection,
    pub basis: BasisSection,
    /// Highest rung to solve; states n = 0..=n_max.
    pub n_max: usize,
    #[serde(default)]
    pub quadrature: QuadratureSection,
    #[serde(default)]
    pub cache: CacheSection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SystemSection {
    /// Electron count: 1 (hydrogenic) or 2 (helium-like ¹S).
    pub ne: u32,
    /// Nuclear charge in units of e (≥ 0; 0 is allowed and simply unbinds).
    pub z: f64,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    /// Orbital momentum of a one-electron run. Two-electron runs are ¹S
    /// only and require ell = 0.
    #[serde(default)]
    pub ell: u32,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct BasisSection {
    /// "full" (all allowed (K, ℓ) up to kmax), "main" (ℓ = 0, K ≡ 0 mod 4
    /// up to kmax), or "explicit" (the given index list).
    pub policy: String,
    #[serde(default)]
    pub kmax: Option<u32>,
    /// (K, ℓ) pairs; only with policy = "explicit".
    #[serde(default)]
    pub indices: Option<Vec<(u32, u32)>>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct QuadratureSection {
    pub eta_nodes: u32,
    pub split_at_diagonal: bool,
}

impl Default for QuadratureSection {
    fn default() -> Self {
        let d = QuadratureSpec::default();
        QuadratureSection { eta_nodes: d.eta_nodes, split_at_diagonal: d.split_at_diagonal }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CacheSection {
    /// Directory for assembled-Ŵ cache files. None disables the cache
    /// unless the CLI flag or `HYPERLADDER_CACHE_DIR` supplies one.
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub path: PathBuf,
    /// "csv" or "structured".
    #[serde(default = "default_format")]
    pub format: String,
}

fn default_format() -> String {
    "csv".into()
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        RunConfig::from_toml_str(&text)
    }
}

/// Output table style.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Structured,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Result<OutputFormat> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "structured" => Ok(OutputFormat::Structured),
            other => {
                Err(Error::Config(format!("format must be \"csv\" or \"structured\", got {other:?}")))
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Structured => "structured",
        }
    }
}

/// Command-line overrides; every field beats the corresponding config value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub output: Option<PathBuf>,
    pub format: Option<String>,
    pub cache_dir: Option<PathBuf>,
}

/// Cache-directory precedence: CLI flag, then config, then environment.
pub fn resolve_cache_dir(
    flag: Option<PathBuf>,
    config: Option<PathBuf>,
    env: Option<std::ffi::OsString>,
) -> Option<PathBuf> {
    flag.or(config).or_else(|| env.filter(|v| !v.is_empty()).map(PathBuf::from))
}

/// A validated run: typed structures plus the effective config echo.
#[derive(Debug, Clone)]
pub struct ValidatedRun {
    pub term: TermLabel,
    pub policy: BasisPolicy,
    pub n_max: usize,
    pub quad: QuadratureSpec,
    pub cache_dir: Option<PathBuf>,
    pub output: PathBuf,
    pub format: OutputFormat,
    /// Config with overrides folded in; echoed verbatim into reports.
    pub config: RunConfig,
}

/// Validate a config against this build and fold in the overrides.
///
/// Everything that can be rejected is rejected here, before any file is
/// touched: a failed validation must leave no partial output behind.
pub fn validate(config: &RunConfig, over: &Overrides) -> Result<ValidatedRun> {
    if config.format_version != FORMAT_VERSION {
        return Err(Error::Config(format!(
            "format_version {} not supported (this build reads {FORMAT_VERSION})",
            config.format_version
        )));
    }

    let term = match config.system.ne {
        1 => TermLabel::hydrogenic(config.system.z, config.term.ell)?,
        2 => {
            if config.term.ell != 0 {
                return Err(Error::Config(format!(
                    "two-electron runs are ¹S only; term.ell must be 0, got {}",
                    config.term.ell
                )));
            }
            TermLabel::singlet_s(config.system.z)?
        }
        other => {
            return Err(Error::Config(format!("system.ne must be 1 or 2, got {other}")));
        }
    };

    let b = &config.basis;
    let policy = match b.policy.as_str() {
        "full" | "main" => {
            if b.indices.is_some() {
                return Err(Error::Config(format!(
                    "basis.indices is only valid with policy = \"explicit\" (policy is {:?})",
                    b.policy
                )));
            }
            let kmax = b.kmax.ok_or_else(|| {
                Error::Config(format!("policy {:?} requires basis.kmax", b.policy))
            })?;
            if b.policy == "full" {
                BasisPolicy::FullToKmax(kmax)
            } else {
                BasisPolicy::MainOnly(kmax)
            }
        }
        "explicit" => {
            if b.kmax.is_some() {
                return Err(Error::Config(
                    "basis.kmax is meaningless with policy = \"explicit\"; list the indices".into(),
                ));
            }
            let list = b
                .indices
                .clone()
                .ok_or_else(|| Error::Config("policy \"explicit\" requires basis.indices".into()))?;
            BasisPolicy::Explicit(list)
        }
        other => {
            return Err(Error::Config(format!(
                "basis.policy must be \"full\", \"main\" or \"explicit\", got {other:?}"
            )));
        }
    };
    // Cheap structural check now; commands re-enumerate for real.
    enumerate_basis(&term, &policy)?;

    if config.n_max > 64 {
        return Err(Error::Config(format!(
            "n_max = {} is past any resolvable rung; the ceiling is 64",
            config.n_max
        )));
    }

    let quad = QuadratureSpec {
        eta_nodes: config.quadrature.eta_nodes,
        split_at_diagonal: config.quadrature.split_at_diagonal,
        qmax_override: None,
    };
    quad.validate()?;

    let format = OutputFormat::parse(
        over.format.as_deref().unwrap_or(config.output.format.as_str()),
    )?;
    let output = over.output.clone().unwrap_or_else(|| config.output.path.clone());
    let cache_dir = resolve_cache_dir(
        over.cache_dir.clone(),
        config.cache.dir.clone(),
        std::env::var_os(CACHE_DIR_ENV),
    );

    let mut echo = config.clone();
    echo.output.path = output.clone();
    echo.output.format = format.name().into();
    echo.cache.dir = cache_dir.clone();

    Ok(ValidatedRun { term, policy, n_max: config.n_max, quad, cache_dir, output, format, config: echo })
}

// ---------------------------------------------------------------------------
// Spectrum command

/// One solved bound state as reported.
#[derive(Debug, Clone, Serialize)]
pub struct StateRow {
    pub n: usize,
    pub lambda_au: f64,
    pub energy_hartree: f64,
    /// Up to three channels by descending |coefficient| (ties by index).
    pub leading_channels: Vec<ChannelWeight>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ChannelWeight {
    pub k: u32,
    pub ell: u32,
    pub coefficient: f64,
}

/// Orthonormality of the emitted states after Gram–Schmidt.
#[derive(Debug, Clone, Serialize)]
pub struct OrthoSummary {
    pub states: usize,
    /// max |⟨ψ̃ₙ|ψ̃ₘ⟩ − δₙₘ| over the orthogonalized set.
    pub max_gram_deviation: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct TruncationNote {
    /// First rung whose lowest eigenvalue was non-negative.
    pub rung: u32,
    pub lambda_au: f64,
}

/// Published variational reference energies (Pekeris-class calculations) for
/// the helium ¹S ladder, with the deviation window each row is held to:
/// 0.02 Ha for the ground state, 0.06 Ha for the excited states.
pub const HELIUM_1S_REFERENCE: [(f64, f64); 4] =
    [(-2.9037175, 0.02), (-2.144954, 0.06), (-2.06033, 0.06), (-2.0318, 0.06)];

#[derive(Debug, Clone, Serialize)]
pub struct ReferenceRow {
    pub n: usize,
    pub reference_hartree: f64,
    pub computed_hartree: f64,
    pub delta_hartree: f64,
    pub tolerance_hartree: f64,
    pub within_tolerance: bool,
}

/// Comparison of computed energies against the published references. Present
/// only where references exist (two electrons, Z = 2).
#[derive(Debug, Clone, Serialize)]
pub struct ReferenceComparison {
    pub description: &'static str,
    pub rows: Vec<ReferenceRow>,
    /// True when any row misses its window — the headline deviation flag.
    pub any_outside_tolerance: bool,
}

/// Everything a spectrum run produces, in report order.
#[derive(Debug, Clone, Serialize)]
pub struct SpectrumReport {
    pub format_version: u32,
    pub config: RunConfig,
    pub basis_size: usize,
    pub kmax: u32,
    pub states: Vec<StateRow>,
    pub orthogonality: Option<OrthoSummary>,
    pub truncated: Option<TruncationNote>,
    pub reference: Option<ReferenceComparison>,
}

/// Wall-clock of one pipeline phase (stderr material; never in reports).
#[derive(Debug, Clone)]
pub struct Phase {
    pub name: &'static str,
    pub seconds: f64,
}

/// A finished command: the report, the exact bytes written, and the side
/// information the CLI logs to stderr.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub report: SpectrumReport,
    pub rendered: String,
    pub cache: CacheOutcome,
    pub timings: Vec<Phase>,
}

impl RunOutput {
    /// The run stopped before n_max because a rung failed to bind.
    pub fn truncated(&self) -> bool {
        self.report.truncated.is_some()
    }
}

fn leading_channels(c: &[f64], indices: &[HHIndex]) -> Vec<ChannelWeight> {
    let mut order: Vec<usize> = (0..c.len()).collect();
    order.sort_by(|&i, &j| {
        c[j].abs().partial_cmp(&c[i].abs()).expect("finite coefficients").then(i.cmp(&j))
    });
    order
        .into_iter()
        .take(3)
        .map(|i| ChannelWeight { k: indices[i].k, ell: indices[i].ell, coefficient: c[i] })
        .collect()
}

fn orthogonality_summary(spectrum: &SpectrumResult) -> Result<Option<OrthoSummary>> {
    if spectrum.states.is_empty() {
        return Ok(None);
    }
    let wfs: Vec<_> =
        spectrum.states.iter().map(|s| radial_wavefunction(s, &spectrum.basis)).collect();
    let set = orthogonalize_states(&wfs)?;
    let g = set.gram();
    let mut dev = 0.0f64;
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - want).abs());
        }
    }
    Ok(Some(OrthoSummary { states: spectrum.states.len(), max_gram_deviation: dev }))
}

fn reference_comparison(run: &ValidatedRun, states: &[StateRow]) -> Option<ReferenceComparison> {
    if run.term.ne != 2 || run.term.z != 2.0 || states.is_empty() {
        return None;
    }
    let rows: Vec<ReferenceRow> = states
        .iter()
        .zip(HELIUM_1S_REFERENCE.iter())
        .map(|(s, &(reference, tol))| {
            let delta = s.energy_hartree - reference;
            ReferenceRow {
                n: s.n,
                reference_hartree: reference,
                computed_hartree: s.energy_hartree,
                delta_hartree: delta,
                tolerance_hartree: tol,
                within_tolerance: delta.abs() <= tol,
            }
        })
        .collect();
    let any_outside_tolerance = rows.iter().any(|r| !r.within_tolerance);
    Some(ReferenceComparison {
        description: "published high-precision variational energies, helium ¹S ladder",
        rows,
        any_outside_tolerance,
    })
}

fn build_report(run: &ValidatedRun, spectrum: &SpectrumResult) -> Result<SpectrumReport> {
    // Invariant of the ladder: energies rise strictly toward zero. A
    // violation means the eigensolver or the assembly is broken.
    for pair in spectrum.states.windows(2) {
        if pair[1].energy <= pair[0].energy {
            return Err(Error::EigenFailed(format!(
                "ladder energies must increase strictly: E(n={}) = {:.9} after E(n={}) = {:.9}",
                pair[1].n, pair[1].energy, pair[0].n, pair[0].energy
            )));
        }
    }
    let states: Vec<StateRow> = spectrum
        .states
        .iter()
        .map(|s| StateRow {
            n: s.n,
            lambda_au: s.lambda,
            energy_hartree: s.energy,
            leading_channels: leading_channels(&s.c, &spectrum.basis.indices),
        })
        .collect();
    let orthogonality = orthogonality_summary(spectrum)?;
    let reference = reference_comparison(run, &states);
    Ok(SpectrumReport {
        format_version: FORMAT_VERSION,
        config: run.config.clone(),
        basis_size: spectrum.basis.len(),
        kmax: spectrum.basis.kmax(),
        states,
        orthogonality,
        truncated: spectrum
            .truncated
            .as_ref()
            .map(|t| TruncationNote { rung: t.rung, lambda_au: t.lambda }),
        reference,
    })
}

/// Solve the configured term and write the spectrum table to `run.output`.
///
/// A rung that fails to bind truncates the table instead of erroring; the
/// partial report is still written and `RunOutput::truncated` is set (the
/// CLI maps that to its NO_BOUND_STATE exit code).
pub fn cmd_spectrum(run: &ValidatedRun) -> Result<RunOutput> {
    let t0 = Instant::now();
    let basis = enumerate_basis(&run.term, &run.policy)?;
    let (w, cache) = load_or_assemble(&basis, &run.quad, run.cache_dir.as_deref())?;
    let assemble_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    let spectrum = energy_ladder_from_w(&w, run.n_max)?;
    let report = build_report(run, &spectrum)?;
    let solve_s = t1.elapsed().as_secs_f64();

    let rendered = match run.format {
        OutputFormat::Csv => render_csv(&report),
        OutputFormat::Structured => render_structured(&report)?,
    };
    std::fs::write(&run.output, &rendered)?;
    Ok(RunOutput {
        report,
        rendered,
        cache,
        timings: vec![
            Phase { name: "assemble", seconds: assemble_s },
            Phase { name: "solve", seconds: solve_s },
        ],
    })
}

/// Flat table: one row per bound state, exact header [`CSV_HEADER`].
pub fn render_csv(report: &SpectrumReport) -> String {
    let mut out = String::with_capacity(64 * (report.states.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for s in &report.states {
        writeln!(
            out,
            "{},{:.12e},{:.12e},{},{}",
            s.n, s.lambda_au, s.energy_hartree, report.basis_size, report.kmax
        )
        .expect("write to String cannot fail");
    }
    out
}

/// Structured report: pretty JSON, trailing newline, stable field order.
pub fn render_structured<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| Error::Config(format!("report serialization failed: {e}")))?;
    s.push('\n');
    Ok(s)
}

// ---------------------------------------------------------------------------
// Convergence sweep

#[derive(Debug, Clone, Serialize)]
pub struct ConvergePoint {
    pub kmax: u32,
    pub basis_size: usize,
    pub e1_hartree: f64,
    /// E₁ change from the previous row; 0 on the first.
    pub delta_hartree: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvergeReport {
    pub format_version: u32,
    pub config: RunConfig,
    pub kmax_list: Vec<u32>,
    pub points: Vec<ConvergePoint>,
    pub truncated: Option<TruncationNote>,
}

#[derive(Debug, Clone)]
pub struct ConvergeOutput {
    pub report: ConvergeReport,
    pub rendered: String,
    pub timings: Vec<Phase>,
}

impl ConvergeOutput {
    pub fn truncated(&self) -> bool {
        self.report.truncated.is_some()
    }
}

/// Ground-state energy versus Kmax for the configured term.
///
/// The list must be strictly ascending (this subsumes duplicate rejection);
/// the basis policy keeps its family and only the cutoff is swept, so an
/// explicit index list cannot be swept. E₁(Kmax) is checked to be
/// non-increasing — enlarging a variational space can only help — and a
/// violation is reported as an eigensolver fault, not tolerated.
pub fn cmd_converge(run: &ValidatedRun, kmax_list: &[u32]) -> Result<ConvergeOutput> {
    if kmax_list.is_empty() {
        return Err(Error::Config("kmax list is empty".into()));
    }
    for pair in kmax_list.windows(2) {
        if pair[1] <= pair[0] {
            return Err(Error::Config(format!(
                "kmax list must be strictly ascending, got {} after {}",
                pair[1], pair[0]
            )));
        }
    }
    let family = |k: u32| -> Result<BasisPolicy> {
        match &run.policy {
            BasisPolicy::FullToKmax(_) => Ok(BasisPolicy::FullToKmax(k)),
            BasisPolicy::MainOnly(_) => Ok(BasisPolicy::MainOnly(k)),
            BasisPolicy::Explicit(_) => Err(Error::Config(
                "converge sweeps Kmax; an explicit index list has no Kmax to sweep".into(),
            )),
        }
    };

    let t0 = Instant::now();
    let mut points: Vec<ConvergePoint> = Vec::with_capacity(kmax_list.len());
    let mut truncated = None;
    for &kmax in kmax_list {
        let basis = enumerate_basis(&run.term, &family(kmax)?)?;
        let (w, _) = load_or_assemble(&basis, &run.quad, run.cache_dir.as_deref())?;
        let spectrum = energy_ladder_from_w(&w, 0)?;
        let Some(ground) = spectrum.states.first() else {
            let t = spectrum.truncated.expect("no state implies a truncation record");
            truncated = Some(TruncationNote { rung: t.rung, lambda_au: t.lambda });
            break;
        };
        let e1 = ground.energy;
        if let Some(prev) = points.last() {
            if e1 > prev.e1_hartree + 1e-12 {
                return Err(Error::EigenFailed(format!(
                    "E1 must not rise with Kmax: {:.9} at Kmax {} after {:.9} at Kmax {}",
                    e1, kmax, prev.e1_hartree, prev.kmax
                )));
            }
        }
        let delta = points.last().map_or(0.0, |p| e1 - p.e1_hartree);
        points.push(ConvergePoint { kmax, basis_size: basis.len(), e1_hartree: e1, delta_hartree: delta });
    }
    let sweep_s = t0.elapsed().as_secs_f64();

    let report = ConvergeReport {
        format_version: FORMAT_VERSION,
        config: run.config.clone(),
        kmax_list: kmax_list.to_vec(),
        points,
        truncated,
    };
    let rendered = match run.format {
        OutputFormat::Csv => render_converge_csv(&report),
        OutputFormat::Structured => render_structured(&report)?,
    };
    std::fs::write(&run.output, &rendered)?;
    Ok(ConvergeOutput {
        report,
        rendered,
        timings: vec![Phase { name: "sweep", seconds: sweep_s }],
    })
}

/// Plot-ready table: x = Kmax, y = E₁; exact header [`CONVERGE_CSV_HEADER`].
pub fn render_converge_csv(report: &ConvergeReport) -> String {
    let mut out = String::with_capacity(64 * (report.points.len() + 1));
    out.push_str(CONVERGE_CSV_HEADER);
    out.push('\n');
    for p in &report.points {
        writeln!(out, "{},{},{:.12e},{:.12e}", p.kmax, p.basis_size, p.e1_hartree, p.delta_hartree)
            .expect("write to String cannot fail");
    }
    out
}

// ---------------------------------------------------------------------------
// Matrix dump

/// Debug dump of the rung-n operators over the configured basis.
#[derive(Debug, Clone, Serialize)]
pub struct MatrixDump {
    pub format_version: u32,
    pub config: RunConfig,
    /// Rung index n ≥ 1.
    pub rung: u32,
    /// (K, ℓ) per channel, in matrix order.
    pub channels: Vec<(u32, u32)>,
    pub w: Vec<Vec<f64>>,
    /// Diagonal of β̂ₙ.
    pub beta: Vec<f64>,
    pub alpha: Vec<Vec<f64>>,
    pub a: Vec<Vec<f64>>,
    /// Symmetric spectral matrix whose lowest eigenvalue is λₙ.
    pub spectral: Vec<Vec<f64>>,
    /// All its eigenvalues, ascending; the ones above the lowest diagnose
    /// how far the rung is from losing its next bound state.
    pub spectral_eigenvalues: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct DumpOutput {
    pub dump: MatrixDump,
    pub rendered: String,
    pub cache: CacheOutcome,
}

fn matrix_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.dim()).map(|i| (0..m.dim()).map(|j| m[(i, j)]).collect()).collect()
}

/// Build and serialize Ŵ, β̂ₙ, α̂ₙ, âₙ and the spectral matrix of rung n.
/// Always structured JSON; written to `run.output`.
pub fn cmd_dump_matrices(run: &ValidatedRun, rung: u32) -> Result<DumpOutput> {
    if rung == 0 {
        return Err(Error::Config("rung counts from 1".into()));
    }
    let basis = enumerate_basis(&run.term, &run.policy)?;
    let (w, cache) = load_or_assemble(&basis, &run.quad, run.cache_dir.as_deref())?;
    let lm = LadderMatrices::build(rung as usize, &w);
    let spectral = build_spectral_matrix(rung as usize - 1, &w);
    let eig = sym_eigen(&spectral)?;
    let dump = MatrixDump {
        format_version: FORMAT_VERSION,
        config: run.config.clone(),
        rung,
        channels: basis.indices.iter().map(|i| (i.k, i.ell)).collect(),
        w: matrix_rows(&w.w),
        beta: lm.beta.clone(),
        alpha: matrix_rows(&lm.alpha),
        a: matrix_rows(&lm.a),
        spectral: matrix_rows(&spectral),
        spectral_eigenvalues: eig.values,
    };
    let rendered = render_structured(&dump)?;
    std::fs::write(&run.output, &rendered)?;
    Ok(DumpOutput { dump, rendered, cache })
}

// ---------------------------------------------------------------------------
// Self-test

/// Faults injectable into the self-test, for exercising its detectors from
/// test code. The CLI never injects one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelftestFault {
    /// Scale every Γ-ratio entering the spectral matrix by (1 + 10⁻⁶),
    /// imitating a defective ratio routine. Only the spectral checks see Γ
    /// ratios, so exactly those must trip.
    GammaRatio,
}

#[derive(Debug, Clone)]
pub struct SelftestCheck {
    pub name: &'static str,
    pub ok: bool,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub checks: Vec<SelftestCheck>,
}

impl SelftestReport {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    /// One machine-readable line per check (`ok <name> <detail>` or
    /// `FAIL <name> <detail>`) plus a summary line. Fully deterministic.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let tag = if c.ok { "ok" } else { "FAIL" };
            writeln!(out, "{tag} {} {}", c.name, c.detail).expect("write to String cannot fail");
        }
        let passed = self.checks.iter().filter(|c| c.ok).count();
        let verdict = if self.all_ok() { "ok" } else { "FAIL" };
        writeln!(out, "selftest: {verdict} ({passed}/{})", self.checks.len())
            .expect("write to String cannot fail");
        out
    }
}

/// Built-in consistency checks: hydrogen exactness, factorization
/// identities, basis Gram identity, grand-angular eigenvalue residuals, and
/// the two-route oracle equivalence. Each runs to completion; an error
/// inside a check marks it failed rather than aborting the rest.
pub fn run_selftest(fault: Option<SelftestFault>) -> SelftestReport {
    let gamma_scale = match fault {
        Some(SelftestFault::GammaRatio) => 1.0 + 1e-6,
        None => 1.0,
    };
    // The injected fault multiplies the spectral matrix entrywise, exactly
    // what a miscomputed Γ-ratio would do to every channel pair.
    let spectral_lambda = |w: &PotentialMatrix, n: usize| -> Result<f64> {
        let mut a = build_spectral_matrix(n, w);
        if gamma_scale != 1.0 {
            for i in 0..a.dim() {
                for j in 0..a.dim() {
                    a[(i, j)] *= gamma_scale;
                }
            }
        }
        lowest_eigenvalue(&a, n as u32).map(|(lambda, _)| lambda)
    };
    let quad = QuadratureSpec::default();
    let mut checks = Vec::with_capacity(5);

    checks.push(match hydrogen_exactness(&spectral_lambda, &quad) {
        Ok((worst, levels)) => SelftestCheck {
            name: "hydrogen_exactness",
            ok: worst <= 1e-12,
            detail: if worst <= 1e-12 {
                format!("max |E - E_Bohr| = {worst:.1e} over {levels} levels")
            } else {
                format!("max |E - E_Bohr| = {worst:.1e} exceeds 1e-12")
            },
        },
        Err(e) => SelftestCheck { name: "hydrogen_exactness", ok: false, detail: format!("errored: {e}") },
    });

    checks.push(match factorization_residuals(&quad) {
        Ok((r1, r2)) => {
            let ok = r1 <= 1e-10 && r2 <= 1e-10;
            SelftestCheck {
                name: "factorization_identities",
                ok,
                detail: format!(
                    "max residuals {r1:.1e} (anticommutator), {r2:.1e} (beta shift){}",
                    if ok { "" } else { "; limit 1e-10" }
                ),
            }
        }
        Err(e) => SelftestCheck {
            name: "factorization_identities",
            ok: false,
            detail: format!("errored: {e}"),
        },
    });

    checks.push(match gram_deviation(&quad) {
        Ok(dev) => SelftestCheck {
            name: "gram_identity",
            ok: dev <= 1e-10,
            detail: format!("max |G - I| = {dev:.1e}{}", if dev <= 1e-10 { "" } else { "; limit 1e-10" }),
        },
        Err(e) => SelftestCheck { name: "gram_identity", ok: false, detail: format!("errored: {e}") },
    });

    checks.push(match lambda2_residuals(&quad) {
        Ok(worst) => SelftestCheck {
            name: "lambda2_residuals",
            ok: worst <= 1e-4,
            detail: format!(
                "max relative residual = {worst:.1e}{}",
                if worst <= 1e-4 { "" } else { "; limit 1e-4" }
            ),
        },
        Err(e) => SelftestCheck { name: "lambda2_residuals", ok: false, detail: format!("errored: {e}") },
    });

    checks.push(match oracle_gap(&spectral_lambda, &quad) {
        Ok(gap) => SelftestCheck {
            name: "oracle_equivalence",
            ok: gap <= 1e-8,
            detail: format!(
                "|lambda_spectral - lambda_variational| = {gap:.1e}{}",
                if gap <= 1e-8 { "" } else { "; limit 1e-8" }
            ),
        },
        Err(e) => SelftestCheck { name: "oracle_equivalence", ok: false, detail: format!("errored: {e}") },
    });

    SelftestReport { checks }
}

fn hydrogen_exactness(
    spectral_lambda: &dyn Fn(&PotentialMatrix, usize) -> Result<f64>,
    quad: &QuadratureSpec,
) -> Result<(f64, usize)> {
    let mut worst = 0.0f64;
    let mut levels = 0usize;
    for q in [1.0, 2.0, 3.0] {
        for ell in 0..=2u32 {
            let term = TermLabel::hydrogenic(q, ell)?;
            let basis = enumerate_basis(&term, &BasisPolicy::FullToKmax(ell))?;
            let w = assemble_w(&basis, quad)?;
            for n in 0..=5usize {
                let lambda = spectral_lambda(&w, n)?;
                let nr = (n as f64) + f64::from(ell) + 1.0;
                let e_bohr = -q * q / (2.0 * nr * nr);
                worst = worst.max((-0.5 * lambda * lambda - e_bohr).abs());
                levels += 1;
            }
        }
    }
    Ok((worst, levels))
}

fn factorization_residuals(quad: &QuadratureSpec) -> Result<(f64, f64)> {
    let term = TermLabel::singlet_s(2.0)?;
    let basis = enumerate_basis(&term, &BasisPolicy::FullToKmax(8))?;
    let w = assemble_w(&basis, quad)?;
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for n in 1..=3usize {
        let lm = LadderMatrices::build(n, &w);
        let (r1, r2) = verify_factorization_identities(&lm, &w);
        worst1 = worst1.max(r1);
        worst2 = worst2.max(r2);
    }
    Ok((worst1, worst2))
}

fn gram_deviation(quad: &QuadratureSpec) -> Result<f64> {
    let term = TermLabel::singlet_s(2.0)?;
    let basis = enumerate_basis(&term, &BasisPolicy::FullToKmax(8))?;
    let g = gram_matrix(&basis, quad)?;
    let mut dev = 0.0f64;
    for i in 0..g.dim() {
        for j in 0..g.dim() {
            let want = if i == j { 1.0 } else { 0.0 };
            dev = dev.max((g[(i, j)] - want).abs());
        }
    }
    Ok(dev)
}

fn lambda2_residuals(_quad: &QuadratureSpec) -> Result<f64> {
    let term = TermLabel::singlet_s(2.0)?;
    let basis = enumerate_basis(&term, &BasisPolicy::FullToKmax(8))?;
    let grid = FdGrid::default_check();
    let mut worst = 0.0f64;
    for &idx in &basis.indices {
        worst = worst.max(lambda2_check(idx, grid)?);
    }
    Ok(worst)
}

fn oracle_gap(
    spectral_lambda: &dyn Fn(&PotentialMatrix, usize) -> Result<f64>,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let term = TermLabel::singlet_s(2.0)?;
    let policy = BasisPolicy::FullToKmax(4);
    let basis = enumerate_basis(&term, &policy)?;
    let w = assemble_w(&basis, quad)?;
    let spectral = spectral_lambda(&w, 0)?;
    let (variational, _) = variational_oracle(&term, &policy, quad)?;
    Ok((spectral - variational).abs())
}
