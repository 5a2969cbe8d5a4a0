use std::collections::BTreeMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::expr::ScalarField;
use crate::family::{polynomial_parts, Domain, Exclusion, FamilyParams, Sign, StructureData};
use crate::verify::{CheckKind, Sampling, SamplingMode, Scenario};

/// Version of the scenario file format accepted by [`parse_scenario`].
pub const SCENARIO_SCHEMA_VERSION: u32 = 1;

/// The on-disk scenario document. Unknown keys are rejected at every level.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    #[serde(default)]
    pub schema_version: Option<u32>,
    #[serde(default)]
    pub name: Option<String>,
    pub params: ParamsSpec,
    pub structure: StructureSpec,
    pub domain: DomainSpec,
    #[serde(default)]
    pub sampling: Option<SamplingSpec>,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    #[serde(default)]
    pub checks: Vec<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsSpec {
    pub k1: f64,
    pub k2: f64,
    pub eps: f64,
}

/// Either `f_poly` (coefficients `[re, im]` of `f(z) = u + i v` in
/// increasing degree) or the expression pair `u`, `v`; `B` is always an
/// expression.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    #[serde(default)]
    pub f_poly: Option<Vec<[f64; 2]>>,
    #[serde(default)]
    pub u: Option<String>,
    #[serde(default)]
    pub v: Option<String>,
    #[serde(rename = "B")]
    pub b: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainSpec {
    /// `[x1min, x1max, x2min, x2max]`.
    #[serde(rename = "box")]
    pub bounds: [f64; 4],
    #[serde(default)]
    pub exclusions: Vec<ExclusionSpec>,
}

/// `{"type": "disc" | "exterior", "center": [x1, x2], "radius": r}`.
// A plain struct rather than an internally tagged enum: tagged enums buffer
// their content, which loses floats under serde_json's arbitrary precision.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExclusionSpec {
    #[serde(rename = "type")]
    pub kind: String,
    pub center: [f64; 2],
    pub radius: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    /// `"random"` or `"grid"`.
    pub mode: String,
    #[serde(default)]
    pub count: Option<usize>,
    #[serde(default)]
    pub grid: Option<[usize; 2]>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub directions: Option<usize>,
}

fn field(text: &str, what: &str) -> Result<ScalarField> {
    ScalarField::parse(text).map_err(|e| Error::Config(format!("structure.{what}: {e}")))
}

impl ScenarioFile {
    /// Validates the document and builds the scenario. The structure
    /// equations are not enforced here; they are a check of the suite.
    pub fn into_scenario(self, default_name: &str) -> Result<Scenario> {
        if let Some(v) = self.schema_version {
            if v != SCENARIO_SCHEMA_VERSION {
                return Err(Error::Config(format!("unsupported schema_version {v}")));
            }
        }
        let eps = Sign::from_f64(self.params.eps)?;
        let params = FamilyParams::new(self.params.k1, self.params.k2, eps)
            .map_err(|e| Error::Config(format!("params: {e}")))?;

        let s = self.structure;
        let (u, v) = match (s.f_poly, s.u, s.v) {
            (Some(c), None, None) => {
                if c.is_empty() {
                    return Err(Error::Config("structure.f_poly must not be empty".into()));
                }
                polynomial_parts(&c)
            }
            (None, Some(u), Some(v)) => (field(&u, "u")?, field(&v, "v")?),
            _ => return Err(Error::Config("structure needs either `f_poly` or both `u` and `v`".into())),
        };
        let b = field(&s.b, "B")?;

        let exclusions = self
            .domain
            .exclusions
            .iter()
            .map(|e| {
                let (center, radius) = (e.center, e.radius);
                if !(radius >= 0.0) {
                    return Err(Error::Config(format!("exclusion radius must be non-negative, got {radius}")));
                }
                match e.kind.as_str() {
                    "disc" => Ok(Exclusion::Disc { center, radius }),
                    "exterior" => Ok(Exclusion::Exterior { center, radius }),
                    k => Err(Error::Config(format!("unknown exclusion type `{k}`"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let domain = Domain::new(self.domain.bounds, exclusions)?;

        let mut sampling = Sampling::default();
        if let Some(sp) = self.sampling {
            sampling.mode = match (sp.mode.as_str(), sp.count, sp.grid) {
                ("random", count, None) => SamplingMode::Random { count: count.unwrap_or(200) },
                ("grid", None, Some([nx, ny])) => SamplingMode::Grid { nx, ny },
                ("random", _, Some(_)) => return Err(Error::Config("sampling.grid requires mode \"grid\"".into())),
                ("grid", Some(_), _) => return Err(Error::Config("sampling.count requires mode \"random\"".into())),
                ("grid", None, None) => return Err(Error::Config("sampling mode \"grid\" requires `grid`".into())),
                (m, _, _) => return Err(Error::Config(format!("unknown sampling mode `{m}`"))),
            };
            if let Some(seed) = sp.seed {
                sampling.seed = seed;
            }
            if let Some(d) = sp.directions {
                sampling.directions = d;
            }
        }

        let checks = self
            .checks
            .iter()
            .map(|c| CheckKind::from_name(c).ok_or_else(|| Error::Config(format!("unknown check `{c}`"))))
            .collect::<Result<Vec<_>>>()?;

        let mut sc = Scenario::new(self.name.unwrap_or_else(|| default_name.to_string()), params, StructureData::new(u, v, b, domain));
        sc.sampling = sampling;
        sc.tolerances = self.tolerances;
        sc.checks = checks;
        sc.validate()?;
        Ok(sc)
    }
}

/// Byte offset of a 1-based `(line, column)` position in `text`.
fn byte_offset(text: &[u8], line: usize, column: usize) -> usize {
    let start: usize = text.split(|b| *b == b'\n').take(line.saturating_sub(1)).map(|l| l.len() + 1).sum();
    (start + column.saturating_sub(1)).min(text.len())
}

/// Parses and validates a scenario document. JSON errors report the byte
/// offset of the problem.
pub fn parse_scenario(text: &[u8], default_name: &str) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_slice(text).map_err(|e| {
        let offset = byte_offset(text, e.line(), e.column());
        Error::Config(format!("invalid scenario JSON at byte {offset} (line {}, column {}): {e}", e.line(), e.column()))
    })?;
    file.into_scenario(default_name)
}
