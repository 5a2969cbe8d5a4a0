use serde_json::{Map, Number, Value};

/// `pass` iff the largest residual is within tolerance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckSummary {
    pub name: String,
    pub max: f64,
    pub mean: f64,
    pub tolerance: f64,
    pub verdict: Verdict,
    /// Points that produced a residual (including failed evaluations).
    pub samples: usize,
    /// Points deliberately not evaluated (degenerate loci).
    pub skipped: usize,
    /// Points at which evaluation raised an error; these count as `+∞`.
    pub errors: usize,
    /// Point with the largest residual.
    pub worst: Option<[f64; 2]>,
    pub first_error: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Environment {
    pub scenario: String,
    pub seed: u64,
    pub k1: f64,
    pub k2: f64,
    pub eps: f64,
    pub jet_orders: [usize; 2],
    pub quadrature_rel_tol: f64,
    pub quadrature_min_nodes: usize,
    pub quadrature_max_nodes: usize,
    pub primitive_tol: f64,
    pub points: usize,
    pub excluded_points: usize,
    pub directions: usize,
    pub version: String,
}

/// Extremes of `|K|` (direction-averaged) over the sample points.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub k_min_abs: f64,
    pub k_max_abs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub environment: Environment,
    /// Sorted by name.
    pub checks: Vec<CheckSummary>,
    pub summary: Option<Summary>,
}

impl VerificationReport {
    /// A report with no checks.
    pub fn empty(environment: Environment) -> Self {
        VerificationReport { schema_version: super::SCHEMA_VERSION, environment, checks: Vec::new(), summary: None }
    }

    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.verdict == Verdict::Pass)
    }

    pub fn check(&self, name: &str) -> Option<&CheckSummary> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckSummary> {
        self.checks.iter().filter(|c| c.verdict == Verdict::Fail)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    CsvSummary,
}

/// 17 significant digits; non-finite values become `"inf"`, `"-inf"` or
/// `"nan"`.
pub(crate) fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.into()
    } else {
        format!("{v:.16e}")
    }
}

fn num(v: f64) -> Value {
    if v.is_finite() {
        Value::Number(format_float(v).parse::<Number>().expect("formatted float is a JSON number"))
    } else {
        Value::String(format_float(v))
    }
}

fn obj(entries: Vec<(&str, Value)>) -> Value {
    let mut m = Map::new();
    for (k, v) in entries {
        m.insert(k.to_string(), v);
    }
    Value::Object(m)
}

fn point(p: Option<[f64; 2]>) -> Value {
    p.map_or(Value::Null, |p| Value::Array(vec![num(p[0]), num(p[1])]))
}

fn to_json(r: &VerificationReport) -> Value {
    let e = &r.environment;
    let env = obj(vec![
        ("scenario", Value::String(e.scenario.clone())),
        ("seed", Value::from(e.seed)),
        ("k1", num(e.k1)),
        ("k2", num(e.k2)),
        ("eps", num(e.eps)),
        ("jet_orders", Value::Array(e.jet_orders.iter().map(|o| Value::from(*o)).collect())),
        (
            "quadrature",
            obj(vec![
                ("rel_tol", num(e.quadrature_rel_tol)),
                ("min_nodes", Value::from(e.quadrature_min_nodes)),
                ("max_nodes", Value::from(e.quadrature_max_nodes)),
                ("primitive_tol", num(e.primitive_tol)),
            ]),
        ),
        ("points", Value::from(e.points)),
        ("excluded_points", Value::from(e.excluded_points)),
        ("directions", Value::from(e.directions)),
        ("version", Value::String(e.version.clone())),
    ]);
    let mut checks = Map::new();
    for c in &r.checks {
        checks.insert(
            c.name.clone(),
            obj(vec![
                ("max", num(c.max)),
                ("mean", num(c.mean)),
                ("tolerance", num(c.tolerance)),
                ("verdict", Value::String(c.verdict.as_str().into())),
                ("samples", Value::from(c.samples)),
                ("skipped", Value::from(c.skipped)),
                ("errors", Value::from(c.errors)),
                ("worst_point", point(c.worst)),
                ("first_error", c.first_error.clone().map_or(Value::Null, Value::String)),
            ]),
        );
    }
    let summary = r.summary.map_or(Value::Null, |s| {
        obj(vec![("k_min_abs", num(s.k_min_abs)), ("k_max_abs", num(s.k_max_abs))])
    });
    obj(vec![
        ("schema_version", Value::from(r.schema_version)),
        ("environment", env),
        ("checks", Value::Object(checks)),
        ("summary", summary),
        ("all_passed", Value::Bool(r.all_passed())),
    ])
}

fn to_csv(r: &VerificationReport) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let header = [
        "check", "max", "mean", "tolerance", "verdict", "samples", "skipped", "errors", "worst_x1", "worst_x2",
    ];
    w.write_record(header).expect("in-memory write");
    for c in &r.checks {
        let (wx, wy) = c.worst.map_or((String::new(), String::new()), |p| (format_float(p[0]), format_float(p[1])));
        w.write_record([
            c.name.clone(),
            format_float(c.max),
            format_float(c.mean),
            format_float(c.tolerance),
            c.verdict.as_str().to_string(),
            c.samples.to_string(),
            c.skipped.to_string(),
            c.errors.to_string(),
            wx,
            wy,
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

/// Deterministic serialization: sorted keys, floats at 17 significant
/// digits.
pub fn serialize_report(r: &VerificationReport, format: ReportFormat) -> Vec<u8> {
    match format {
        ReportFormat::Json => {
            let mut out = serde_json::to_vec_pretty(&to_json(r)).expect("JSON values always serialize");
            out.push(b'\n');
            out
        }
        ReportFormat::CsvSummary => to_csv(r),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn env() -> Environment {
        Environment {
            scenario: "t".into(),
            seed: 3,
            k1: -1.0,
            k2: 0.0,
            eps: 1.0,
            jet_orders: [2, 4],
            quadrature_rel_tol: 1e-11,
            quadrature_min_nodes: 32,
            quadrature_max_nodes: 16384,
            primitive_tol: 1e-12,
            points: 0,
            excluded_points: 0,
            directions: 24,
            version: "0".into(),
        }
    }

    #[test]
    fn empty_report_is_valid_json() {
        let bytes = serialize_report(&VerificationReport::empty(env()), ReportFormat::Json);
        let v: Value = serde_json::from_slice(&bytes).unwrap();
        assert_eq!(v["schema_version"], 1);
        assert_eq!(v["environment"]["seed"], 3);
        assert!(v["checks"].as_object().unwrap().is_empty());
        let text = String::from_utf8(bytes).unwrap();
        assert!(text.contains("\"k1\": -1.0000000000000000e+0"), "{text}");
    }

    #[test]
    fn keys_are_sorted() {
        let text = String::from_utf8(serialize_report(&VerificationReport::empty(env()), ReportFormat::Json)).unwrap();
        let a = text.find("\"all_passed\"").unwrap();
        let c = text.find("\"checks\"").unwrap();
        let e = text.find("\"environment\"").unwrap();
        assert!(a < c && c < e);
    }

    #[test]
    fn non_finite_floats() {
        assert_eq!(format_float(f64::INFINITY), "inf");
        assert_eq!(format_float(0.1), "1.0000000000000001e-1");
    }
}
