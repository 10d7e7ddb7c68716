//! JSON form of an analysis report and its published schema.

use serde::{Deserialize, Serialize};
use serde_json::Value;
use taubounds::estimator::IntervalPair;
use taubounds::{AnalysisReport, TauInterval};

use crate::CliError;

pub const SCHEMA: &str = include_str!("../schema/report.schema.json");

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Interval {
    pub lower: f64,
    pub upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub raw: Interval,
    pub clipped: Interval,
    pub se: Option<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Summary {
    pub p: [f64; 4],
    pub m1: Option<f64>,
    pub l1: Option<f64>,
    pub m2: Option<f64>,
    pub m3: Option<f64>,
    pub m1_theta: Option<f64>,
    pub l1_theta: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Ties {
    pub x: usize,
    pub y: usize,
}

/// Field order here is the order in the emitted JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportJson {
    pub n: usize,
    pub pattern_counts: [u64; 4],
    pub p_hat: [f64; 4],
    pub summary: Option<Summary>,
    pub worst_case: Bounds,
    pub refined: Option<Bounds>,
    pub decision: String,
    pub margins_mode: String,
    pub theta: Option<f64>,
    pub guard_k: f64,
    pub ties: Ties,
    pub seed: u64,
    pub tool_version: String,
}

fn interval(t: &TauInterval) -> Interval {
    Interval {
        lower: t.lower,
        upper: t.upper,
    }
}

fn bounds(pair: &IntervalPair) -> Bounds {
    let se = match (pair.raw.se_lower, pair.raw.se_upper) {
        (Some(lower), Some(upper)) => Some(Interval { lower, upper }),
        _ => None,
    };
    Bounds {
        raw: interval(&pair.raw),
        clipped: interval(&pair.clipped),
        se,
    }
}

impl From<&AnalysisReport> for ReportJson {
    fn from(r: &AnalysisReport) -> Self {
        let summary = r.summary.as_ref().map(|s| Summary {
            p: s.p,
            m1: s.m1,
            l1: s.l1,
            m2: s.m2,
            m3: s.m3,
            m1_theta: r.theta_summary.as_ref().and_then(|t| t.m1_theta),
            l1_theta: r.theta_summary.as_ref().and_then(|t| t.l1_theta),
        });
        ReportJson {
            n: r.n,
            pattern_counts: r.pattern_counts,
            p_hat: r.p_hat,
            summary,
            worst_case: bounds(&r.worst_case),
            refined: r.refined.as_ref().map(bounds),
            decision: r.decision.as_str().to_string(),
            margins_mode: r.margins_mode.to_string(),
            theta: r.theta,
            guard_k: r.guard_k,
            ties: Ties {
                x: r.tied_x,
                y: r.tied_y,
            },
            seed: r.seed,
            tool_version: TOOL_VERSION.to_string(),
        }
    }
}

/// Check a JSON value against the published report schema.
pub fn validate(value: &Value) -> Result<(), CliError> {
    let schema: Value = serde_json::from_str(SCHEMA).expect("embedded schema is valid JSON");
    let validator = jsonschema::validator_for(&schema).expect("embedded schema compiles");
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| format!("{} at {}", e, e.instance_path()))
        .collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(CliError::Internal(format!(
            "report does not match its schema: {}",
            errors.join("; ")
        )))
    }
}

/// Serialize, validate against the schema and check the strict round trip.
pub fn to_json(report: &AnalysisReport) -> Result<String, CliError> {
    let json = ReportJson::from(report);
    let value = serde_json::to_value(&json).map_err(|e| CliError::Internal(e.to_string()))?;
    validate(&value)?;
    // Serialize the struct, not the `Value`, so fields keep declaration order.
    let text = serde_json::to_string_pretty(&json).map_err(|e| CliError::Internal(e.to_string()))?;
    let back: ReportJson =
        serde_json::from_str(&text).map_err(|e| CliError::Internal(e.to_string()))?;
    if back != json {
        return Err(CliError::Internal("report does not survive a JSON round trip".into()));
    }
    Ok(text + "\n")
}

pub fn to_plain(report: &AnalysisReport) -> String {
    let mut s = String::new();
    let line = |s: &mut String, k: &str, v: String| s.push_str(&format!("{k:<16}{v}\n"));
    line(&mut s, "n", report.n.to_string());
    line(
        &mut s,
        "patterns",
        format!(
            "complete {}  only-x {}  only-y {}  missing {}",
            report.pattern_counts[0], report.pattern_counts[1], report.pattern_counts[2], report.pattern_counts[3]
        ),
    );
    line(&mut s, "margins", report.margins_mode.to_string());
    let fmt = |p: &IntervalPair| {
        let se = match (p.raw.se_lower, p.raw.se_upper) {
            (Some(a), Some(b)) => format!("  se ({a:.4}, {b:.4})"),
            _ => String::new(),
        };
        format!(
            "[{:.4}, {:.4}]  raw [{:.4}, {:.4}]{se}",
            p.clipped.lower, p.clipped.upper, p.raw.lower, p.raw.upper
        )
    };
    line(&mut s, "worst case", fmt(&report.worst_case));
    match (&report.refined, report.theta) {
        (Some(r), Some(t)) => line(&mut s, &format!("refined ({t})"), fmt(r)),
        _ => line(&mut s, "refined", "-".into()),
    }
    line(&mut s, "decision", report.decision.as_str().to_string());
    s
}
