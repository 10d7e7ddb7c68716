//! Population bounds for the three benchmark scenarios against their
//! reference values, under both covariate conventions.

use serde::Serialize;
use taubounds::{
    clip, decide, population_bounds, true_tau, BenchmarkScenario, CovariateScale, Decision,
    TauInterval,
};

use crate::report::TOOL_VERSION;
use crate::CliError;

pub const DEFAULT_TOLERANCE: f64 = 0.02;
pub const STRICT_TOLERANCE: f64 = 0.005;
const TRUE_TAU_DRAWS: usize = 1_000_000;

#[derive(Debug, Clone, Serialize)]
pub struct IntervalOut {
    pub lower: f64,
    pub upper: f64,
    pub se_lower: Option<f64>,
    pub se_upper: Option<f64>,
}

impl From<&TauInterval> for IntervalOut {
    fn from(t: &TauInterval) -> Self {
        Self {
            lower: t.lower,
            upper: t.upper,
            se_lower: t.se_lower,
            se_upper: t.se_upper,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    /// `refined.lower` or `refined.upper`.
    pub bound: &'static str,
    pub target: f64,
    pub estimate: f64,
    pub deviation: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ScenarioResult {
    pub scenario: &'static str,
    pub rho: f64,
    pub gamma: [[f64; 2]; 4],
    pub p: [f64; 4],
    pub true_tau: f64,
    pub theta_dgp: f64,
    pub theta_warning: Option<String>,
    pub worst_case: IntervalOut,
    pub refined: IntervalOut,
    pub worst_case_decision: &'static str,
    pub decision: &'static str,
    pub expected_decision: &'static str,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ConventionResult {
    pub covariate_scale: &'static str,
    pub scenarios: Vec<ScenarioResult>,
    pub matched: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReproduceReport {
    pub draws: usize,
    pub seed: u64,
    pub theta: f64,
    pub tolerance: f64,
    pub conventions: Vec<ConventionResult>,
    /// Conventions under which every scenario passed.
    pub matched_conventions: Vec<&'static str>,
    pub tool_version: &'static str,
}

impl ReproduceReport {
    pub fn any_matched(&self) -> bool {
        !self.matched_conventions.is_empty()
    }
}

pub fn expected_decision(s: BenchmarkScenario) -> Decision {
    match s {
        BenchmarkScenario::P1 => Decision::DependenceNegative,
        BenchmarkScenario::P2 => Decision::DependencePositive,
        BenchmarkScenario::P3 => Decision::Inconclusive,
    }
}

fn check(bound: &'static str, target: f64, estimate: f64, tolerance: f64) -> Check {
    let deviation = estimate - target;
    Check {
        bound,
        target,
        estimate,
        deviation,
        within_tolerance: deviation.abs() <= tolerance,
    }
}

pub fn run_scenario(
    scenario: BenchmarkScenario,
    scale: CovariateScale,
    draws: usize,
    seed: u64,
    tolerance: f64,
) -> Result<ScenarioResult, CliError> {
    let cfg = scenario.config(scale);
    let pop = population_bounds(&cfg, scenario.theta(), draws, seed)?;
    let tau = true_tau(&cfg, draws.min(TRUE_TAU_DRAWS), seed)?;
    let decision = decide(&clip(&pop.refined)?);
    let worst_decision = decide(&clip(&pop.worst_case)?);
    let targets = scenario.targets();
    let mut checks = Vec::new();
    if let Some(t) = targets.refined_lower {
        checks.push(check("refined.lower", t, pop.refined.lower, tolerance));
    }
    if let Some(t) = targets.refined_upper {
        checks.push(check("refined.upper", t, pop.refined.upper, tolerance));
    }
    let expected = expected_decision(scenario);
    let pass = checks.iter().all(|c| c.within_tolerance) && decision == expected;
    Ok(ScenarioResult {
        scenario: scenario.name(),
        rho: scenario.rho(),
        gamma: scenario.gamma(),
        p: pop.p,
        true_tau: tau,
        theta_dgp: pop.theta_dgp.value,
        theta_warning: pop.theta_warning.clone(),
        worst_case: (&pop.worst_case).into(),
        refined: (&pop.refined).into(),
        worst_case_decision: worst_decision.as_str(),
        decision: decision.as_str(),
        expected_decision: expected.as_str(),
        checks,
        pass,
    })
}

pub fn run(draws: usize, seed: u64, tolerance: f64) -> Result<ReproduceReport, CliError> {
    let mut conventions = Vec::new();
    for scale in [CovariateScale::Uniform01, CovariateScale::NormalScore] {
        let scenarios = BenchmarkScenario::ALL
            .iter()
            .map(|&s| run_scenario(s, scale, draws, seed, tolerance))
            .collect::<Result<Vec<_>, _>>()?;
        let matched = scenarios.iter().all(|s| s.pass);
        conventions.push(ConventionResult {
            covariate_scale: scale.as_str(),
            scenarios,
            matched,
        });
    }
    let matched_conventions = conventions
        .iter()
        .filter(|c| c.matched)
        .map(|c| c.covariate_scale)
        .collect();
    Ok(ReproduceReport {
        draws,
        seed,
        theta: BenchmarkScenario::THETA,
        tolerance,
        conventions,
        matched_conventions,
        tool_version: TOOL_VERSION,
    })
}

fn opt(v: Option<f64>) -> String {
    v.map_or("-".into(), |v| format!("{v:.4}"))
}

pub fn to_plain(r: &ReproduceReport) -> String {
    let mut s = format!(
        "draws {}  seed {}  theta {}  tolerance {}\n",
        r.draws, r.seed, r.theta, r.tolerance
    );
    for c in &r.conventions {
        s.push_str(&format!("\ncovariate scale: {}\n", c.covariate_scale));
        s.push_str(&format!(
            "{:<4}{:>9}{:>20}{:>20}{:>22}{:>22}  {}\n",
            "", "tau", "worst case", "refined", "decision", "expected", "result"
        ));
        for sc in &c.scenarios {
            let wc = format!("[{:.4}, {:.4}]", sc.worst_case.lower, sc.worst_case.upper);
            let rf = format!("[{:.4}, {:.4}]", sc.refined.lower, sc.refined.upper);
            s.push_str(&format!(
                "{:<4}{:>9.4}{:>20}{:>20}{:>22}{:>22}  {}\n",
                sc.scenario,
                sc.true_tau,
                wc,
                rf,
                sc.decision,
                sc.expected_decision,
                if sc.pass { "pass" } else { "FAIL" }
            ));
            for ch in &sc.checks {
                s.push_str(&format!(
                    "      {} target {} estimate {:.4} deviation {:+.4}{}\n",
                    ch.bound,
                    ch.target,
                    ch.estimate,
                    ch.deviation,
                    if ch.within_tolerance { "" } else { "  (outside tolerance)" }
                ));
            }
            s.push_str(&format!(
                "      se lower {} upper {}\n",
                opt(sc.refined.se_lower),
                opt(sc.refined.se_upper)
            ));
            if let Some(w) = &sc.theta_warning {
                s.push_str(&format!("      warning: {w}\n"));
            }
        }
    }
    s.push_str(&format!(
        "\nmatched conventions: {}\n",
        if r.matched_conventions.is_empty() {
            "none".to_string()
        } else {
            r.matched_conventions.join(", ")
        }
    ));
    s
}
