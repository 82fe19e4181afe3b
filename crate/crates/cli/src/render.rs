//! Text rendering shared by every subcommand: 15-significant-digit numbers,
//! hand-assembled JSON objects (so numbers keep that exact spelling) and CSV rows.

use interfere_core::identities::IdentityReport;
use interfere_core::OccupationVector;

const SIG_DIGITS: i32 = 15;

/// Formats with 15 significant digits, trailing zeros removed. Magnitudes
/// below `1e-4` or at least `1e15` use exponent notation. The result is a
/// valid JSON number for finite input.
pub fn num(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let sci = format!("{:.*e}", (SIG_DIGITS - 1) as usize, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..SIG_DIGITS).contains(&exp) {
        return format!("{}e{exp}", trim_zeros(mantissa));
    }
    let decimals = (SIG_DIGITS - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// JSON number, or `null` for NaN and infinities.
pub fn json_num(x: f64) -> String {
    if x.is_finite() {
        num(x)
    } else {
        "null".into()
    }
}

pub fn json_str(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

pub fn json_pattern(v: &OccupationVector) -> String {
    format!("[{}]", v.join(","))
}

/// Insertion-ordered JSON object whose values are already-rendered JSON.
#[derive(Debug, Default)]
pub struct JsonObject {
    fields: Vec<(String, String)>,
}

impl JsonObject {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn raw(mut self, key: &str, value: impl Into<String>) -> Self {
        self.fields.push((key.to_string(), value.into()));
        self
    }

    pub fn num(self, key: &str, x: f64) -> Self {
        self.raw(key, json_num(x))
    }

    pub fn int(self, key: &str, n: usize) -> Self {
        self.raw(key, n.to_string())
    }

    pub fn str(self, key: &str, s: &str) -> Self {
        self.raw(key, json_str(s))
    }

    pub fn bool(self, key: &str, b: bool) -> Self {
        self.raw(key, b.to_string())
    }

    pub fn pattern(self, key: &str, v: Option<&OccupationVector>) -> Self {
        self.raw(key, v.map_or_else(|| "null".to_string(), json_pattern))
    }

    pub fn render(&self) -> String {
        let body: Vec<String> = self.fields.iter().map(|(k, v)| format!("{}:{v}", json_str(k))).collect();
        format!("{{{}}}", body.join(","))
    }
}

pub const REPORT_CSV_HEADER: &str = "identity,N,input,output,residual,passed";

/// One identity report together with the patterns it was evaluated on.
#[derive(Debug, Clone)]
pub struct Record {
    pub modes: usize,
    pub input: Option<OccupationVector>,
    pub output: Option<OccupationVector>,
    pub report: IdentityReport,
}

impl Record {
    pub fn json(&self) -> JsonObject {
        let r = &self.report;
        JsonObject::new()
            .str("identity", &r.identity_name)
            .int("N", self.modes)
            .pattern("input", self.input.as_ref())
            .pattern("output", self.output.as_ref())
            .num("residual", r.residual)
            .num("raw_residual", r.raw_residual)
            .int("term_count", r.term_count)
            .num("normalizer", r.normalizer)
            .num("tolerance", r.tolerance)
            .bool("passed", r.passed)
    }

    pub fn csv(&self) -> String {
        let token = |v: &Option<OccupationVector>| v.as_ref().map(OccupationVector::token).unwrap_or_default();
        format!(
            "{},{},{},{},{},{}",
            self.report.identity_name,
            self.modes,
            token(&self.input),
            token(&self.output),
            num(self.report.residual),
            self.report.passed
        )
    }
}
