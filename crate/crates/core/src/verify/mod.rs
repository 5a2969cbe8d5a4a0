//! Sampling-based verification of the family's curvature properties.
//!
//! A [`Scenario`] fixes the parameters, the structure triple, the sampling
//! plan and the tolerances. [`theorem1_suite`] evaluates every selected
//! check at every sample point and aggregates the residuals into a
//! [`VerificationReport`]; with a fixed seed the report is reproducible
//! byte for byte (see [`serialize_report`]).

mod proof;
mod report;
mod sweep;

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::ab::{ab_tensors, r00_from};
use crate::error::{Error, Result};
use crate::family::{
    assemble_finsler, closed_form_k, constant_b_rigidity, deform_and_killing, positivity_check, structure_residuals,
    AlphaBetaFields, AlphaBetaMetric, FamilyFields, FamilyParams, StructureData, PRIMITIVE_TOL,
};
use crate::geometry::{bh_volume_factor, curvature_sample, CurvatureSample, FinslerFunction, QuadratureConfig};

pub use proof::{proof_chain_from, ProofScalars, LOCUS_MARGIN, PROOF_CHAIN_NAMES};
pub use report::{serialize_report, CheckSummary, Environment, ReportFormat, Summary, Verdict, VerificationReport};
pub use sweep::{sweep, sweep_csv, SweepRow, SweepValues};

pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the number of worker threads (`0` = auto).
pub const THREADS_ENV: &str = "FINSLER_THREADS";

/// The checks a scenario can select.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CheckKind {
    /// Cauchy–Riemann and flow equations of the structure triple.
    Structure,
    /// Positivity verdict agrees with the sampled convexity inequalities.
    Positivity,
    /// `|S|/F`.
    SCurvature,
    /// Spread of `K(x, y)` over directions.
    Einstein,
    /// Numeric `K` against the closed form.
    ClosedFormK,
    /// Closed form against `K` rebuilt from `λ` and `s_m s^m`.
    ClosedFormConsistency,
    R00,
    /// `r̃_ij` after the Killing deformation.
    Killing,
    /// Deviation of `R^i_k` from the scalar-flag form.
    ScalarFlag,
    ProofChain,
    /// `|K|`.
    RicciFlat,
    /// `|λ|` and `|b_{i|j}|` for constant `B`.
    ConstantB,
}

impl CheckKind {
    pub const ALL: [CheckKind; 12] = [
        CheckKind::Structure,
        CheckKind::Positivity,
        CheckKind::SCurvature,
        CheckKind::Einstein,
        CheckKind::ClosedFormK,
        CheckKind::ClosedFormConsistency,
        CheckKind::R00,
        CheckKind::Killing,
        CheckKind::ScalarFlag,
        CheckKind::ProofChain,
        CheckKind::RicciFlat,
        CheckKind::ConstantB,
    ];

    /// Checks run when a scenario does not select any.
    pub const DEFAULT: [CheckKind; 10] = [
        CheckKind::Structure,
        CheckKind::Positivity,
        CheckKind::SCurvature,
        CheckKind::Einstein,
        CheckKind::ClosedFormK,
        CheckKind::ClosedFormConsistency,
        CheckKind::R00,
        CheckKind::Killing,
        CheckKind::ScalarFlag,
        CheckKind::ProofChain,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Structure => "structure",
            CheckKind::Positivity => "positivity",
            CheckKind::SCurvature => "s_curvature",
            CheckKind::Einstein => "einstein",
            CheckKind::ClosedFormK => "closed_form_k",
            CheckKind::ClosedFormConsistency => "closed_form_consistency",
            CheckKind::R00 => "r00",
            CheckKind::Killing => "killing",
            CheckKind::ScalarFlag => "scalar_flag",
            CheckKind::ProofChain => "proof_chain",
            CheckKind::RicciFlat => "ricci_flat",
            CheckKind::ConstantB => "constant_b",
        }
    }

    pub fn from_name(name: &str) -> Option<CheckKind> {
        CheckKind::ALL.into_iter().find(|c| c.name() == name)
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            CheckKind::Structure => 1e-9,
            CheckKind::Positivity => 0.0,
            CheckKind::SCurvature | CheckKind::RicciFlat => 1e-7,
            CheckKind::Einstein | CheckKind::ClosedFormK | CheckKind::ScalarFlag | CheckKind::ProofChain => 1e-6,
            CheckKind::ClosedFormConsistency | CheckKind::R00 | CheckKind::Killing => 1e-8,
            CheckKind::ConstantB => 1e-9,
        }
    }

    fn needs_curvature(self) -> bool {
        matches!(
            self,
            CheckKind::SCurvature
                | CheckKind::Einstein
                | CheckKind::ClosedFormK
                | CheckKind::ClosedFormConsistency
                | CheckKind::ScalarFlag
                | CheckKind::ProofChain
                | CheckKind::RicciFlat
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingMode {
    /// `count` admissible points drawn uniformly from the domain box.
    Random { count: usize },
    /// The admissible nodes of an `nx × ny` grid over the box.
    Grid { nx: usize, ny: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Sampling {
    pub mode: SamplingMode,
    pub seed: u64,
    /// Directions per point: two thirds equally spaced, one third random.
    pub directions: usize,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling { mode: SamplingMode::Random { count: 200 }, seed: 0, directions: 24 }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub params: FamilyParams,
    pub structure: StructureData,
    pub sampling: Sampling,
    /// Overrides keyed by check name; a proof-chain entry may be addressed
    /// as `proof_chain.<name>`.
    pub tolerances: BTreeMap<String, f64>,
    /// Empty selects [`CheckKind::DEFAULT`].
    pub checks: Vec<CheckKind>,
}

impl Scenario {
    pub fn new(name: impl Into<String>, params: FamilyParams, structure: StructureData) -> Self {
        Scenario {
            name: name.into(),
            params,
            structure,
            sampling: Sampling::default(),
            tolerances: BTreeMap::new(),
            checks: Vec::new(),
        }
    }

    pub fn selected_checks(&self) -> Vec<CheckKind> {
        let mut v = if self.checks.is_empty() { CheckKind::DEFAULT.to_vec() } else { self.checks.clone() };
        v.sort();
        v.dedup();
        v
    }

    pub fn tolerance(&self, check: CheckKind, sub: Option<&str>) -> f64 {
        if let Some(sub) = sub {
            if let Some(t) = self.tolerances.get(&format!("{}.{sub}", check.name())) {
                return *t;
            }
        }
        self.tolerances.get(check.name()).copied().unwrap_or(check.default_tolerance())
    }

    pub fn validate(&self) -> Result<()> {
        for (k, v) in &self.tolerances {
            let base = k.split_once('.').map_or(k.as_str(), |(b, _)| b);
            let known = match k.split_once('.') {
                None => CheckKind::from_name(k).is_some(),
                Some((_, sub)) => base == "proof_chain" && PROOF_CHAIN_NAMES.contains(&sub),
            };
            if !known {
                return Err(Error::Config(format!("unknown tolerance key `{k}`")));
            }
            if !(*v >= 0.0) {
                return Err(Error::Config(format!("tolerance `{k}` must be non-negative, got {v}")));
            }
        }
        if self.sampling.directions < 3 {
            return Err(Error::Config("at least 3 directions per point are required".into()));
        }
        match self.sampling.mode {
            SamplingMode::Random { count } if count == 0 => Err(Error::Config("sample count must be positive".into())),
            SamplingMode::Grid { nx, ny } if nx == 0 || ny == 0 => {
                Err(Error::Config("grid dimensions must be positive".into()))
            }
            _ => Ok(()),
        }
    }
}

/// Unit directions for one point: `n − n/3` equally spaced, `n/3` random.
pub fn sample_directions(n: usize, rng: &mut impl Rng) -> Vec<[f64; 2]> {
    let equal = n - n / 3;
    let mut out: Vec<[f64; 2]> = (0..equal)
        .map(|j| {
            let t = std::f64::consts::TAU * j as f64 / equal as f64;
            [t.cos(), t.sin()]
        })
        .collect();
    for _ in 0..n / 3 {
        let t = rng.gen_range(0.0..std::f64::consts::TAU);
        out.push([t.cos(), t.sin()]);
    }
    out
}

fn point_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

/// Sample points of a scenario and the number of excluded candidates.
pub fn sample_points(sc: &Scenario) -> Result<(Vec<[f64; 2]>, usize)> {
    let fields = FamilyFields::new(sc.params, sc.structure.clone());
    match sc.sampling.mode {
        SamplingMode::Grid { nx, ny } => {
            let all = sc.structure.domain.grid(nx, ny);
            let total = all.len();
            let pts: Vec<_> = all.into_iter().filter(|x| fields.admissible(*x)).collect();
            let excluded = total - pts.len();
            Ok((pts, excluded))
        }
        SamplingMode::Random { count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(sc.sampling.seed);
            let [a, b, c, d] = sc.structure.domain.bounds;
            let mut pts = Vec::with_capacity(count);
            let mut excluded = 0;
            let limit = 1000 * count.max(1);
            while pts.len() < count {
                if pts.len() + excluded >= limit {
                    return Err(Error::Config(format!(
                        "found only {} admissible points in {limit} draws",
                        pts.len()
                    )));
                }
                let x = [a + (b - a) * rng.gen::<f64>(), c + (d - c) * rng.gen::<f64>()];
                if fields.admissible(x) {
                    pts.push(x);
                } else {
                    excluded += 1;
                }
            }
            Ok((pts, excluded))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Outcome {
    Value(f64),
    Skipped,
    Failed(String),
}

impl<E: std::fmt::Display> From<std::result::Result<f64, E>> for Outcome {
    fn from(r: std::result::Result<f64, E>) -> Self {
        match r {
            Ok(v) => Outcome::Value(v),
            Err(e) => Outcome::Failed(e.to_string()),
        }
    }
}

struct PointResult {
    outcomes: Vec<(String, Outcome)>,
    k_mean: Option<f64>,
}

fn max_of(it: impl IntoIterator<Item = f64>) -> f64 {
    it.into_iter().fold(0.0f64, |m, v| if v.is_nan() { f64::INFINITY } else { m.max(v) })
}

fn evaluate_point(
    sc: &Scenario,
    checks: &[CheckKind],
    f: &AlphaBetaMetric<FamilyFields>,
    index: usize,
    x: [f64; 2],
) -> PointResult {
    let p = &sc.params;
    let mut out: Vec<(String, Outcome)> = Vec::new();
    let mut push = |k: &str, o: Outcome| out.push((k.to_string(), o));

    let mut rng = point_rng(sc.sampling.seed, index);
    let dirs = sample_directions(sc.sampling.directions, &mut rng);

    let samples: Option<std::result::Result<Vec<CurvatureSample>, Error>> =
        checks.iter().any(|c| c.needs_curvature()).then(|| {
            let vol = bh_volume_factor(f, x)?;
            dirs.iter().map(|y| curvature_sample(f, x, *y, Some(&vol))).collect()
        });
    let k_mean = match &samples {
        Some(Ok(s)) => Some(s.iter().map(|c| c.flag).sum::<f64>() / s.len() as f64),
        _ => None,
    };
    let pair = f.fields.pair(x);
    let tensors = pair.as_ref().map_err(Clone::clone).and_then(|(rm, of)| ab_tensors(rm, of));
    let closed = closed_form_k(p, &sc.structure, x);

    let with_samples = |g: &dyn Fn(&[CurvatureSample]) -> Result<f64>| -> Outcome {
        match &samples {
            Some(Ok(s)) => g(s).into(),
            Some(Err(e)) => Outcome::Failed(e.to_string()),
            None => Outcome::Failed("curvature not evaluated".into()),
        }
    };

    for &check in checks {
        match check {
            CheckKind::Structure => {
                push(check.name(), structure_residuals(&sc.structure, x).map(max_of).into());
            }
            CheckKind::Positivity => {
                let o = sc.structure.b.value(x).map(|b2| {
                    let v = positivity_check(p, b2.max(0.0).sqrt());
                    let agree = v.pd == v.sampled_positive();
                    let certified = !v.pd || v.polynomial_min.iter().all(|m| *m > 0.0);
                    if agree && certified && v.pd {
                        0.0
                    } else {
                        1.0
                    }
                });
                push(check.name(), o.into());
            }
            CheckKind::SCurvature => {
                push(check.name(), with_samples(&|s| Ok(max_of(s.iter().map(|c| (c.s / c.f).abs())))));
            }
            CheckKind::Einstein => {
                push(
                    check.name(),
                    with_samples(&|s| {
                        let mean = s.iter().map(|c| c.flag).sum::<f64>() / s.len() as f64;
                        Ok(max_of(s.iter().map(|c| (c.flag - mean).abs() / (1.0 + mean.abs()))))
                    }),
                );
            }
            CheckKind::ClosedFormK => {
                let o = match &closed {
                    Ok(kc) => with_samples(&|s| Ok(max_of(s.iter().map(|c| (c.flag - kc).abs() / kc.abs().max(1.0))))),
                    Err(e) => Outcome::Failed(e.to_string()),
                };
                push(check.name(), o);
            }
            CheckKind::ClosedFormConsistency => {
                let o = match (&closed, &tensors, &pair) {
                    (Ok(kc), Ok(t), Ok((rm, _))) => {
                        let ps = ProofScalars::new(p, t.b2, t.theta, rm.lambda, t.s_norm_sq());
                        if ps.locus.abs() < LOCUS_MARGIN || t.b2 <= 1e-10 {
                            Outcome::Skipped
                        } else {
                            Outcome::Value((ps.flag_curvature(p) - kc).abs() / kc.abs().max(1.0))
                        }
                    }
                    (Err(e), _, _) | (_, Err(e), _) => Outcome::Failed(e.to_string()),
                    (_, _, Err(e)) => Outcome::Failed(e.to_string()),
                };
                push(check.name(), o);
            }
            CheckKind::R00 => {
                push(check.name(), tensors.as_ref().map_err(Clone::clone).and_then(|t| r00_from(t, p)).into());
            }
            CheckKind::Killing => {
                let o = pair.as_ref().map_err(Clone::clone).and_then(|(rm, of)| deform_and_killing(p, rm, of));
                push(check.name(), o.map(|(_, r)| r).into());
            }
            CheckKind::ScalarFlag => {
                push(check.name(), with_samples(&|s| Ok(max_of(s.iter().map(|c| c.flag_residual)))));
            }
            CheckKind::RicciFlat => {
                push(check.name(), with_samples(&|s| Ok(max_of(s.iter().map(|c| c.flag.abs())))));
            }
            CheckKind::ConstantB => {
                let o = constant_b_rigidity(p, &sc.structure, x).map(|r| r.flatness.max(r.parallel));
                push(check.name(), o.into());
            }
            CheckKind::ProofChain => {
                let per_name = proof_chain_point(sc, &samples, &tensors, &pair, x);
                for (name, o) in per_name {
                    push(&format!("proof_chain.{name}"), o);
                }
            }
        }
    }
    PointResult { outcomes: out, k_mean }
}

type PairResult = Result<(crate::ab::RiemannData, crate::ab::OneFormData)>;

fn proof_chain_point(
    sc: &Scenario,
    samples: &Option<Result<Vec<CurvatureSample>>>,
    tensors: &Result<crate::ab::ABTensorSet>,
    pair: &PairResult,
    x: [f64; 2],
) -> Vec<(&'static str, Outcome)> {
    let fail_all = |msg: String| PROOF_CHAIN_NAMES.iter().map(|n| (*n, Outcome::Failed(msg.clone()))).collect();
    let (s, t, rm) = match (samples, tensors, pair) {
        (Some(Ok(s)), Ok(t), Ok((rm, _))) => (s, t, rm),
        (Some(Err(e)), _, _) | (_, Err(e), _) | (_, _, Err(e)) => return fail_all(e.to_string()),
        (None, _, _) => return fail_all("curvature not evaluated".into()),
    };
    let sp = match sc.structure.point(x) {
        Ok(sp) => sp,
        Err(e) => return fail_all(e.to_string()),
    };
    let mut worst: BTreeMap<&'static str, f64> = BTreeMap::new();
    for c in s {
        match proof_chain_from(&sc.params, t, rm.lambda, &sp, c.flag, c.y) {
            Ok(map) => {
                for (k, v) in map {
                    let e = worst.entry(k).or_insert(0.0);
                    *e = max_of([*e, v]);
                }
            }
            Err(Error::DegenerateDenominator(_) | Error::DegenerateForm(_)) => {
                return PROOF_CHAIN_NAMES.iter().map(|n| (*n, Outcome::Skipped)).collect();
            }
            Err(e) => return fail_all(e.to_string()),
        }
    }
    PROOF_CHAIN_NAMES.iter().map(|n| (*n, Outcome::Value(worst.get(n).copied().unwrap_or(0.0)))).collect()
}

/// Worker count from [`THREADS_ENV`]; `None` means rayon's default.
fn thread_count() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Err(_) => Ok(None),
        Ok(s) => {
            let n: usize = s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{THREADS_ENV} must be a non-negative integer, got `{s}`")))?;
            Ok((n > 0).then_some(n))
        }
    }
}

/// Runs a closure on a pool sized by [`THREADS_ENV`].
pub fn with_pool<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_count()? {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Default)]
struct Acc {
    max: f64,
    sum: f64,
    samples: usize,
    skipped: usize,
    errors: usize,
    worst: Option<[f64; 2]>,
    first_error: Option<String>,
}

/// Evaluates the selected checks over the scenario's sample points.
pub fn theorem1_suite(sc: &Scenario) -> Result<VerificationReport> {
    sc.validate()?;
    let checks = sc.selected_checks();
    let (points, excluded) = sample_points(sc)?;
    let f = assemble_finsler(sc.params, sc.structure.clone());
    let results: Vec<PointResult> = with_pool(|| {
        points.par_iter().enumerate().map(|(i, x)| evaluate_point(sc, &checks, &f, i, *x)).collect()
    })?;

    let mut accs: BTreeMap<String, Acc> = BTreeMap::new();
    for c in &checks {
        if *c == CheckKind::ProofChain {
            for n in PROOF_CHAIN_NAMES {
                accs.entry(format!("proof_chain.{n}")).or_default();
            }
        } else {
            accs.entry(c.name().to_string()).or_default();
        }
    }
    let mut k_abs: Vec<f64> = Vec::new();
    for (x, r) in points.iter().zip(&results) {
        if let Some(k) = r.k_mean {
            k_abs.push(k.abs());
        }
        for (name, o) in &r.outcomes {
            let acc = accs.entry(name.clone()).or_default();
            match o {
                Outcome::Skipped => acc.skipped += 1,
                Outcome::Value(v) => {
                    acc.samples += 1;
                    let v = if v.is_nan() { f64::INFINITY } else { *v };
                    acc.sum += v;
                    if acc.worst.is_none() || v > acc.max {
                        acc.max = v;
                        acc.worst = Some(*x);
                    }
                }
                Outcome::Failed(msg) => {
                    acc.samples += 1;
                    acc.errors += 1;
                    acc.sum = f64::INFINITY;
                    if acc.max < f64::INFINITY || acc.worst.is_none() {
                        acc.max = f64::INFINITY;
                        acc.worst = Some(*x);
                    }
                    acc.first_error.get_or_insert_with(|| msg.clone());
                }
            }
        }
    }

    let checks_out = accs
        .into_iter()
        .map(|(name, a)| {
            let (base, sub) = match name.split_once('.') {
                Some((b, s)) => (b, Some(s)),
                None => (name.as_str(), None),
            };
            let kind = CheckKind::from_name(base).expect("known check");
            let tolerance = sc.tolerance(kind, sub);
            let mean = if a.samples == 0 { 0.0 } else { a.sum / a.samples as f64 };
            let max = if a.samples == 0 { 0.0 } else { a.max };
            CheckSummary {
                verdict: if max <= tolerance { Verdict::Pass } else { Verdict::Fail },
                name,
                max,
                mean,
                tolerance,
                samples: a.samples,
                skipped: a.skipped,
                errors: a.errors,
                worst: a.worst,
                first_error: a.first_error,
            }
        })
        .collect();

    let summary = (!k_abs.is_empty()).then(|| Summary {
        k_min_abs: k_abs.iter().copied().fold(f64::INFINITY, f64::min),
        k_max_abs: k_abs.iter().copied().fold(0.0, f64::max),
    });

    Ok(VerificationReport {
        schema_version: SCHEMA_VERSION,
        environment: environment(sc, points.len(), excluded),
        checks: checks_out,
        summary,
    })
}

/// The environment block of a report for `sc`.
pub fn environment(sc: &Scenario, points: usize, excluded: usize) -> Environment {
    let q = QuadratureConfig::default();
    let (xo, yo) = crate::jet::JetSpace::curvature().orders();
    Environment {
        scenario: sc.name.clone(),
        seed: sc.sampling.seed,
        k1: sc.params.k1(),
        k2: sc.params.k2(),
        eps: sc.params.eps().value(),
        jet_orders: [xo, yo],
        quadrature_rel_tol: q.rel_tol,
        quadrature_min_nodes: q.min_nodes,
        quadrature_max_nodes: q.max_nodes,
        primitive_tol: PRIMITIVE_TOL,
        points,
        excluded_points: excluded,
        directions: sc.sampling.directions,
        version: env!("CARGO_PKG_VERSION").to_string(),
    }
}

/// Named proof-chain residuals at a single `(x, y)`.
pub fn proof_chain_residuals(sc: &Scenario, x: [f64; 2], y: [f64; 2]) -> Result<BTreeMap<&'static str, f64>> {
    let f = assemble_finsler(sc.params, sc.structure.clone());
    let (rm, of) = f.fields.pair(x)?;
    let t = ab_tensors(&rm, &of)?;
    let k = curvature_sample(&f, x, y, None)?.flag;
    let sp = sc.structure.point(x)?;
    proof_chain_from(&sc.params, &t, rm.lambda, &sp, k, y)
}

/// Flag curvature of the scenario's metric at `(x, y)`.
pub fn numeric_flag_curvature(sc: &Scenario, x: [f64; 2], y: [f64; 2]) -> Result<f64> {
    let f = assemble_finsler(sc.params, sc.structure.clone());
    if !f.admissible(x, y) {
        return Err(Error::Domain(format!("x={x:?} outside the admissible domain")));
    }
    Ok(curvature_sample(&f, x, y, None)?.flag)
}
