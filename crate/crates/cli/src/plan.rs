//! Experiment plans: the validated, hashable description of one CLI run.
//!
//! A plan is parsed from a TOML or JSON config file plus command-line
//! overrides.  Every field the suites consume is validated here so that a
//! plan that parses is a plan that can run.

use betadyn_core::beta_core::{Beta, BetaVector};
use betadyn_core::dimension_functions::DimensionFunction;
use betadyn_core::hitset_geometry::LipschitzMap;
use betadyn_core::series_classifier::ApproxFunction;
use serde::{Deserialize, Serialize};

/// One per-axis rate function ψ(n) = exp(a0 + a1·n + a2·n²)·n^q.
#[derive(Clone, Copy, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PsiSpec {
    pub a0: f64,
    pub a1: f64,
    pub a2: f64,
    pub q: f64,
}

/// One per-axis Lipschitz target map.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, tag = "kind", rename_all = "snake_case")]
pub enum MapSpec {
    Constant { value: f64 },
    Identity,
    Affine { slope: f64, offset: f64 },
}

impl MapSpec {
    pub fn build(&self) -> betadyn_core::Result<LipschitzMap> {
        match self {
            MapSpec::Constant { value } => LipschitzMap::constant(*value),
            MapSpec::Identity => Ok(LipschitzMap::identity()),
            MapSpec::Affine { slope, offset } => LipschitzMap::affine(*slope, *offset),
        }
    }
}

/// The raw config file schema.  All fields are optional; each mode states
/// which ones it needs and suites fall back to built-in defaults, so that
/// `verify-all` runs without any config at all.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PlanFile {
    /// Bases β_1 ≤ … ≤ β_d (each > 1; exact binary doubles).
    pub betas: Vec<f64>,
    /// Dimension function, e.g. "r^0.9" or "r^1.5*log^-0.2".
    pub f: Option<String>,
    /// Per-axis rate functions, one per base.
    pub psi: Vec<PsiSpec>,
    /// Per-axis target maps; defaults to h ≡ 0 on every axis.
    pub maps: Vec<MapSpec>,
    /// Exponent t for the w2star family ψ(n) = β^(−tn).
    pub t: Option<f64>,
    /// Single level n (enumerate mode).
    pub n: Option<u32>,
    /// Inclusive level range [lo, hi] for scans and series sums.
    pub n_range: Option<[u32; 2]>,
    /// Monte-Carlo / ball-scan sample count.
    pub samples: Option<usize>,
    /// Window [a, b) ⊆ [0, 1) for enumeration and window measures.
    pub window: Option<[f64; 2]>,
    /// classify target: "rectangle" (default) or "multiplicative";
    /// enumerate target: "all" (default) or "full".
    pub target: Option<String>,
    /// Exact rational rate for the exact union engine: "1/n" or "1/n^2".
    pub psi_exact: Option<String>,
    /// Neighborhood widths for cover-scaling mode.
    pub deltas: Vec<f64>,
    /// Hyperboloid exponent s ∈ (1, 2) for cover-scaling mode.
    pub s: Option<f64>,
    /// Hyperboloid anchor in [0,1]² for cover-scaling mode.
    pub center: Vec<f64>,
}

/// A validated plan: the raw file plus the run parameters that affect
/// results.  Serializable and hashable; the hash goes into every report.
#[derive(Clone, Debug, Serialize)]
pub struct ExperimentPlan {
    pub mode: String,
    pub seed: u64,
    pub precision_bits: usize,
    pub jobs: usize,
    pub file: PlanFile,
}

/// A schema problem with the config path that caused it.
#[derive(Debug)]
pub struct PlanError(pub String);

impl std::fmt::Display for PlanError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl std::error::Error for PlanError {}

fn usage(msg: impl Into<String>) -> PlanError {
    PlanError(msg.into())
}

/// Parses a config file (TOML by default, JSON for `.json`) into a raw
/// [`PlanFile`], reporting unknown keys and type mismatches with paths.
pub fn parse_plan_text(text: &str, json: bool) -> Result<PlanFile, PlanError> {
    if json {
        serde_json::from_str(text).map_err(|e| usage(format!("config parse error: {e}")))
    } else {
        toml::from_str(text).map_err(|e| usage(format!("config parse error: {e}")))
    }
}

impl ExperimentPlan {
    /// Validates every supplied field eagerly; fields a mode does not use
    /// must still be well-formed so that the plan hash names one unambiguous
    /// experiment.
    pub fn new(
        mode: &str,
        file: PlanFile,
        seed: u64,
        precision_bits: usize,
        jobs: usize,
    ) -> Result<Self, PlanError> {
        let plan = ExperimentPlan {
            mode: mode.to_string(),
            seed,
            precision_bits,
            jobs: jobs.max(1),
            file,
        };
        if precision_bits < 32 || precision_bits > 8192 {
            return Err(usage(format!("precision-bits must lie in [32, 8192], got {precision_bits}")));
        }
        if !plan.file.betas.is_empty() {
            plan.betas()?;
        }
        if !plan.file.psi.is_empty() {
            plan.psis()?;
        }
        if plan.file.f.is_some() {
            plan.dimension_function()?;
        }
        for m in &plan.file.maps {
            m.build().map_err(|e| usage(format!("maps: {e}")))?;
        }
        if let Some([lo, hi]) = plan.file.n_range {
            if lo == 0 || hi < lo {
                return Err(usage(format!("n_range must satisfy 1 <= lo <= hi, got [{lo}, {hi}]")));
            }
        }
        if let Some([a, b]) = plan.file.window {
            if !(0.0..1.0).contains(&a) || !(a..=1.0).contains(&b) {
                return Err(usage(format!("window must satisfy 0 <= a < b <= 1, got [{a}, {b}]")));
            }
        }
        if let Some(t) = plan.file.target.as_deref() {
            if !["rectangle", "multiplicative", "all", "full"].contains(&t) {
                return Err(usage(format!(
                    "target must be one of rectangle|multiplicative|all|full, got '{t}'"
                )));
            }
        }
        if let Some(p) = plan.file.psi_exact.as_deref() {
            if !["1/n", "1/n^2"].contains(&p) {
                return Err(usage(format!("psi_exact must be '1/n' or '1/n^2', got '{p}'")));
            }
        }
        for &d in &plan.file.deltas {
            if !(d > 0.0 && d <= 1.0) {
                return Err(usage(format!("deltas must lie in (0, 1], got {d}")));
            }
        }
        Ok(plan)
    }

    pub fn betas(&self) -> Result<BetaVector, PlanError> {
        if self.file.betas.is_empty() {
            return Err(usage("this mode needs 'betas' in the config"));
        }
        let mut v = Vec::new();
        for &b in &self.file.betas {
            v.push(
                Beta::from_f64(b, self.precision_bits)
                    .map_err(|e| usage(format!("betas: {e}")))?,
            );
        }
        BetaVector::new(v).map_err(|e| match e {
            betadyn_core::Error::Domain(m) => usage(m),
            other => usage(other.to_string()),
        })
    }

    pub fn psis(&self) -> Result<Vec<ApproxFunction>, PlanError> {
        if self.file.psi.is_empty() {
            return Err(usage("this mode needs 'psi' entries in the config"));
        }
        self.file
            .psi
            .iter()
            .map(|p| {
                ApproxFunction::new(p.a0, p.a1, p.a2, p.q).map_err(|e| usage(format!("psi: {e}")))
            })
            .collect()
    }

    pub fn dimension_function(&self) -> Result<DimensionFunction, PlanError> {
        let text = self
            .file
            .f
            .as_deref()
            .ok_or_else(|| usage("this mode needs 'f' (e.g. \"r^0.9\") in the config"))?;
        DimensionFunction::parse(text).map_err(|e| {
            let msg = e.to_string();
            if msg.contains("invalid exponents") || msg.contains("nondecreasing") {
                usage(format!("dimension function must be nondecreasing: got '{text}'"))
            } else {
                usage(msg)
            }
        })
    }

    /// The per-axis maps, defaulting to h ≡ 0 when none are configured.
    pub fn maps(&self, d: usize) -> Result<Vec<LipschitzMap>, PlanError> {
        if self.file.maps.is_empty() {
            return (0..d)
                .map(|_| LipschitzMap::constant(0.0).map_err(|e| usage(e.to_string())))
                .collect();
        }
        if self.file.maps.len() != d {
            return Err(usage(format!(
                "got {} maps for {d} bases; supply one per base or none",
                self.file.maps.len()
            )));
        }
        self.file.maps.iter().map(|m| m.build().map_err(|e| usage(e.to_string()))).collect()
    }

    /// Deterministic content hash of the plan (FNV-1a over the canonical
    /// JSON serialization, which preserves struct field order).
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("plan serializes");
        let mut h: u64 = 0xcbf29ce484222325;
        for b in text.as_bytes() {
            h ^= u64::from(*b);
            h = h.wrapping_mul(0x100000001b3);
        }
        format!("{h:016x}")
    }
}
