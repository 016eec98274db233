use std::fmt;
use std::str::FromStr;

use fraxion::{
    bed_uniform_checked, effects_equal, min_total_dose, oar_effect, oracle_solve, p1_thresholds,
    p2_thresholds, solve_p1_with, solve_p2_with, tumor_effect, verify, DoseGroup, FraxionError,
    OracleConfig, OracleProblem, ProblemParams, Protocol, SolutionReport, SolverConfig,
};
use serde_json::{json, Value};

use crate::error::CliError;
use crate::output::{pretty, regime_name, table, Precision};
use crate::problem::{ProblemFile, ProblemKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Human,
    Machine,
}

#[derive(Debug, Clone, Copy)]
pub struct Settings {
    pub format: Format,
    pub precision: Precision,
    pub solver: SolverConfig,
}

/// Rendered text plus the process exit code.
#[derive(Debug)]
pub struct Output {
    pub text: String,
    pub code: i32,
}

impl Output {
    fn ok(text: String) -> Self {
        Self { text, code: 0 }
    }
}

enum Solved {
    Report(Box<SolutionReport<f64>>),
    Infeasible(String),
}

fn solve_file(file: &ProblemFile, cfg: &SolverConfig) -> Result<Solved, CliError> {
    let result = match file.problem_kind {
        ProblemKind::P1 => solve_p1_with(&file.params()?, file.gamma_value()?, cfg),
        ProblemKind::P2 => solve_p2_with(&file.params()?, file.gamma_value()?, cfg),
        ProblemKind::P3 => min_total_dose(&file.query()?),
        ProblemKind::Bed => {
            return Err(CliError::Validation("problem_kind = \"bed\" is handled by the `bed` command".into()))
        }
    };
    match result {
        Ok(r) => Ok(Solved::Report(Box::new(r))),
        Err(e @ (FraxionError::Infeasible { .. } | FraxionError::InfeasibleN { .. })) => {
            Ok(Solved::Infeasible(e.to_string()))
        }
        Err(e) => Err(e.into()),
    }
}

struct Effects {
    tumor: f64,
    oar: Option<f64>,
    total: f64,
    regime: Option<&'static str>,
}

fn effects(file: &ProblemFile, p: &Protocol<f64>) -> Result<Effects, CliError> {
    Ok(match file.problem_kind {
        ProblemKind::P1 | ProblemKind::P2 => {
            let params = file.params()?;
            Effects {
                tumor: tumor_effect(&params.tumor, p),
                oar: Some(oar_effect(&params, p)),
                total: p.total_dose(),
                regime: Some(regime_name(params.regime())),
            }
        }
        _ => Effects {
            tumor: tumor_effect(&file.tumor()?, p),
            oar: None,
            total: p.total_dose(),
            regime: None,
        },
    })
}

fn solve_json(file: &ProblemFile, solved: &Solved, prec: Precision) -> Result<Value, CliError> {
    let mut v = json!({
        "problem": file.problem_kind.to_string(),
        "status": "infeasible",
        "case": null,
        "regime": null,
        "n_opt": null,
        "protocol": null,
        "protocol_text": null,
        "objective_primary": null,
        "objective_secondary": null,
        "tumor_effect": null,
        "oar_effect": null,
        "total_dose": null,
        "constraint_active": null,
        "thresholds": null,
        "alternates": [],
        "message": null,
    });
    match solved {
        Solved::Infeasible(msg) => v["message"] = json!(msg),
        Solved::Report(r) => {
            let e = effects(file, &r.protocol)?;
            v["status"] = json!("solved");
            v["case"] = json!(r.case.name());
            v["regime"] = json!(e.regime);
            v["n_opt"] = json!(r.n_opt);
            v["protocol"] = prec.protocol(&r.protocol);
            v["protocol_text"] = json!(prec.protocol_text(&r.protocol));
            v["objective_primary"] = prec.num(r.objective_primary);
            v["objective_secondary"] = prec.num(r.objective_secondary);
            v["tumor_effect"] = prec.num(e.tumor);
            v["oar_effect"] = e.oar.map_or(Value::Null, |x| prec.num(x));
            v["total_dose"] = prec.num(e.total);
            v["constraint_active"] = json!(r.constraint_active);
            v["thresholds"] = json!({
                "lambda": prec.num(r.thresholds.lambda),
                "rho": prec.num(r.thresholds.rho),
                "omega": prec.num(r.thresholds.omega),
            });
            v["alternates"] = r
                .alternates
                .iter()
                .map(|a| json!({ "n": a.n, "protocol": prec.protocol(&a.protocol) }))
                .collect();
        }
    }
    Ok(v)
}

fn solve_human(file: &ProblemFile, solved: &Solved, prec: Precision) -> Result<String, CliError> {
    let r = match solved {
        Solved::Infeasible(msg) => {
            return Ok(table(&[("problem", file.problem_kind.to_string()), ("status", "infeasible".into()), ("reason", msg.clone())]))
        }
        Solved::Report(r) => r,
    };
    let e = effects(file, &r.protocol)?;
    let t = &r.thresholds;
    let mut rows = vec![
        ("problem", file.problem_kind.to_string()),
        ("case", r.case.name().to_string()),
    ];
    if let Some(regime) = e.regime {
        rows.push(("regime", format!("{regime} (omega = {} Gy)", prec.text(t.omega))));
    }
    rows.push(("N", r.n_opt.to_string()));
    rows.push(("protocol", prec.protocol_text(&r.protocol)));
    rows.push(("E_T", prec.text(e.tumor)));
    if let Some(oar) = e.oar {
        rows.push(("E_OAR", prec.text(oar)));
    }
    rows.push(("total dose", format!("{} Gy", prec.text(e.total))));
    rows.push(("constraint", if r.constraint_active { "active" } else { "inactive" }.into()));
    rows.push(("lambda, rho", format!("{}, {}", prec.text(t.lambda), prec.text(t.rho))));
    let alt = match r.alternates.first() {
        None => "none".to_string(),
        Some(a) => format!("{} (first: {})", r.alternates.len(), prec.protocol_text(&a.protocol)),
    };
    rows.push(("alternates", alt));
    Ok(table(&rows))
}

pub fn solve(file: &ProblemFile, s: &Settings) -> Result<Output, CliError> {
    let solved = solve_file(file, &s.solver)?;
    let text = match s.format {
        Format::Machine => pretty(&solve_json(file, &solved, s.precision)?),
        Format::Human => solve_human(file, &solved, s.precision)?,
    };
    let code = match solved {
        Solved::Report(_) => 0,
        Solved::Infeasible(_) => 2,
    };
    Ok(Output { text, code })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepParam {
    Gamma,
    Delta,
    #[value(name = "alpha_t")]
    AlphaT,
    #[value(name = "beta_t")]
    BetaT,
    #[value(name = "alpha_0")]
    Alpha0,
    #[value(name = "beta_0")]
    Beta0,
    #[value(name = "d_min")]
    DMin,
    #[value(name = "d_max")]
    DMax,
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepParam::Gamma => "gamma",
            SweepParam::Delta => "delta",
            SweepParam::AlphaT => "alpha_t",
            SweepParam::BetaT => "beta_t",
            SweepParam::Alpha0 => "alpha_0",
            SweepParam::Beta0 => "beta_0",
            SweepParam::DMin => "d_min",
            SweepParam::DMax => "d_max",
        })
    }
}

#[derive(Debug, Clone, Copy)]
pub struct SweepSpec {
    pub param: SweepParam,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl SweepSpec {
    pub fn new(param: SweepParam, start: f64, stop: f64, steps: usize) -> Result<Self, CliError> {
        if !(start.is_finite() && stop.is_finite()) || start >= stop {
            return Err(CliError::Validation(format!("sweep needs start < stop, got {start} and {stop}")));
        }
        if steps < 2 {
            return Err(CliError::Validation(format!("sweep needs at least 2 steps, got {steps}")));
        }
        Ok(Self { param, start, stop, steps })
    }

    pub fn values(&self) -> Vec<f64> {
        let last = (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| {
                if i + 1 == self.steps {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / last
                }
            })
            .collect()
    }
}

fn with_param(file: &ProblemFile, param: SweepParam, x: f64) -> Result<ProblemFile, CliError> {
    let mut f = file.clone();
    let needs_oar = matches!(param, SweepParam::Delta | SweepParam::Alpha0 | SweepParam::Beta0);
    if needs_oar && f.oar.is_none() {
        return Err(CliError::Validation(format!(
            "cannot sweep {param} for problem_kind = \"{}\"",
            file.problem_kind
        )));
    }
    match param {
        SweepParam::Gamma => f.gamma = Some(x),
        SweepParam::Delta => f.delta = Some(x),
        SweepParam::AlphaT => f.tumor.alpha = x,
        SweepParam::BetaT => f.tumor.beta = x,
        SweepParam::Alpha0 => f.oar.as_mut().expect("checked").alpha = x,
        SweepParam::Beta0 => f.oar.as_mut().expect("checked").beta = x,
        SweepParam::DMin => f.d_min = Some(x),
        SweepParam::DMax => f.d_max = Some(x),
    }
    f.validate()
        .map_err(|e| CliError::Validation(format!("{param} = {x}: {e}")))?;
    Ok(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Trend {
    Constant,
    NonDecreasing,
    NonIncreasing,
    NotMonotone,
}

fn trend(ns: &[u64]) -> Trend {
    let up = ns.windows(2).all(|w| w[0] <= w[1]);
    let down = ns.windows(2).all(|w| w[0] >= w[1]);
    match (up, down) {
        (true, true) => Trend::Constant,
        (true, false) => Trend::NonDecreasing,
        (false, true) => Trend::NonIncreasing,
        (false, false) => Trend::NotMonotone,
    }
}

impl fmt::Display for Trend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Trend::Constant => "constant",
            Trend::NonDecreasing => "non-decreasing",
            Trend::NonIncreasing => "non-increasing",
            Trend::NotMonotone => "not monotone",
        })
    }
}

/// One CSV row per swept value and a `#` summary line on N̄.
pub fn sweep(file: &ProblemFile, spec: &SweepSpec, s: &Settings) -> Result<Output, CliError> {
    if file.problem_kind == ProblemKind::Bed {
        return Err(CliError::Validation("sweeps need problem_kind p1, p2 or p3".into()));
    }
    let values = spec.values();
    let files = values
        .iter()
        .map(|&x| with_param(file, spec.param, x))
        .collect::<Result<Vec<_>, _>>()?;

    let prec = s.precision;
    let mut out = String::from("param,value,status,n_opt,case,objective_primary,objective_secondary,omega_sign\n");
    let mut ns = Vec::new();
    for (x, f) in values.iter().zip(&files) {
        let sign = match f.problem_kind {
            ProblemKind::P1 | ProblemKind::P2 => f.params()?.regime().sign().to_string(),
            _ => String::new(),
        };
        let row = match solve_file(f, &s.solver)? {
            Solved::Report(r) => {
                ns.push(r.n_opt);
                format!(
                    "{},{},solved,{},{},{},{},{sign}",
                    spec.param,
                    prec.text(*x),
                    r.n_opt,
                    r.case.name(),
                    prec.text(r.objective_primary),
                    prec.text(r.objective_secondary),
                )
            }
            Solved::Infeasible(_) => format!("{},{},infeasible,,,,,{sign}", spec.param, prec.text(*x)),
        };
        out.push_str(&row);
        out.push('\n');
    }
    let summary = if ns.is_empty() {
        "no feasible rows".to_string()
    } else {
        trend(&ns).to_string()
    };
    out.push_str(&format!(
        "# n_opt over increasing {}: {summary} ({} of {} rows solved)\n",
        spec.param,
        ns.len(),
        values.len()
    ));
    Ok(Output::ok(out))
}

#[derive(Debug, Clone, Copy)]
pub struct OracleSettings {
    pub grid_step: f64,
    pub max_n: u64,
}

/// Parses `"NxD + NxD"` (also accepts `×`).
pub fn parse_protocol(s: &str) -> Result<Protocol<f64>, CliError> {
    let bad = || CliError::Validation(format!("cannot parse protocol `{s}`, expected e.g. 1x1.0+6x6.0"));
    let groups = s
        .trim()
        .trim_end_matches("Gy")
        .split('+')
        .map(|part| {
            let part = part.trim();
            let (n, d) = part.split_once(['x', '×', '*']).ok_or_else(bad)?;
            let n = u64::from_str(n.trim()).map_err(|_| bad())?;
            let d = f64::from_str(d.trim()).map_err(|_| bad())?;
            Ok(DoseGroup::new(n, d))
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    Ok(Protocol::new(groups)?)
}

fn oracle_problem(file: &ProblemFile) -> Result<(OracleProblem<f64>, ProblemParams<f64>), CliError> {
    let params = file.params()?;
    let gamma = file.gamma_value()?;
    let problem = match file.problem_kind {
        ProblemKind::P1 => OracleProblem::P1 { params, gamma },
        ProblemKind::P2 => OracleProblem::P2 { params, gamma },
        _ => return Err(CliError::Validation("verify supports problem_kind p1 and p2".into())),
    };
    Ok((problem, params))
}

/// Largest N that can matter: beyond ⌊ρ₀⌋ P1 is infeasible, beyond ⌈ρ_T⌉ P2
/// only adds minimum-dose fractions.
fn relevant_max_n(problem: &OracleProblem<f64>) -> Result<u64, CliError> {
    let eps = 1e-9;
    Ok(match problem {
        OracleProblem::P1 { params, gamma } => {
            let rho = p1_thresholds(params, *gamma)?.rho;
            (rho + eps * rho.max(1.0)).floor().max(1.0) as u64
        }
        OracleProblem::P2 { params, gamma } => {
            let rho = p2_thresholds(params, *gamma)?.rho;
            (rho - eps * rho.max(1.0)).ceil().max(1.0) as u64
        }
    })
}

pub fn verify_command(
    file: &ProblemFile,
    oracle: &OracleSettings,
    inject: Option<&str>,
    s: &Settings,
) -> Result<Output, CliError> {
    let (problem, params) = oracle_problem(file)?;
    if !(oracle.grid_step.is_finite() && oracle.grid_step > 0.0) {
        return Err(CliError::Validation(format!("--oracle-step must be > 0, got {}", oracle.grid_step)));
    }
    if oracle.max_n == 0 {
        return Err(CliError::Validation("--oracle-max-n must be >= 1".into()));
    }
    let mut report = match solve_file(file, &s.solver)? {
        Solved::Report(r) => *r,
        Solved::Infeasible(msg) => return Err(CliError::Infeasible(msg)),
    };
    if let Some(text) = inject {
        let p = parse_protocol(text)?;
        report.n_opt = p.fractions();
        report.objective_primary = problem.objective(&p);
        report.objective_secondary = match problem {
            OracleProblem::P1 { .. } => oar_effect(&params, &p),
            OracleProblem::P2 { .. } => tumor_effect(&params.tumor, &p),
        };
        report.protocol = p;
    }

    let diag = verify(&report, &problem, 1e-6);
    let prec = s.precision;
    let max_n = relevant_max_n(&problem)?;
    let mut oracle_json = Value::Null;
    let mut oracle_ok = true;
    let note = if max_n > oracle.max_n {
        Some(format!("exhaustive search skipped: relevant N up to {max_n} exceeds --oracle-max-n {}", oracle.max_n))
    } else {
        let cfg = OracleConfig::new(oracle.grid_step, oracle.max_n, 1..=max_n)?;
        let r = oracle_solve(&problem, &cfg)?.with_analytic(&problem, report.objective_primary);
        let gap = r.gap_vs_analytic.expect("gap set");
        let bound = problem.lipschitz(r.best_n.max(report.n_opt)) * oracle.grid_step;
        let floor = -1e-9 * report.objective_primary.abs().max(1.0);
        oracle_ok = gap >= floor && gap <= bound;
        oracle_json = json!({
            "grid_step": oracle.grid_step,
            "n_range": [1, max_n],
            "best_n": r.best_n,
            "best_protocol": prec.protocol(&r.best_protocol),
            "best_objective": prec.num(r.best_objective),
            "gap": prec.num(gap),
            "gap_bound": prec.num(bound),
            "evaluations": r.evaluations,
            "ok": oracle_ok,
        });
        None
    };
    let passed = diag.passed() && oracle_ok;

    let text = match s.format {
        Format::Machine => {
            let mv = diag.improving_move.map_or(Value::Null, |m| {
                json!({ "from": prec.num(m.from), "to": prec.num(m.to), "gain": prec.num(m.gain) })
            });
            pretty(&json!({
                "problem": file.problem_kind.to_string(),
                "case": report.case.name(),
                "n_opt": report.n_opt,
                "protocol": prec.protocol(&report.protocol),
                "protocol_text": prec.protocol_text(&report.protocol),
                "objective_primary": prec.num(report.objective_primary),
                "checks": {
                    "bounds_ok": diag.bounds_ok,
                    "feasible": diag.feasible,
                    "slack": prec.num(diag.slack),
                    "expected_active": diag.expected_active,
                    "observed_active": diag.observed_active,
                    "reported_active": diag.reported_active,
                    "activity_ok": diag.activity_ok,
                    "objective_consistent": diag.objective_consistent,
                    "local_ok": diag.local_ok(),
                    "improving_move": mv,
                },
                "oracle": oracle_json,
                "oracle_note": note,
                "passed": passed,
            }))
        }
        Format::Human => {
            let mark = |ok: bool| if ok { "pass" } else { "FAIL" }.to_string();
            let mut rows = vec![
                ("problem", file.problem_kind.to_string()),
                ("protocol", prec.protocol_text(&report.protocol)),
                ("bounds", mark(diag.bounds_ok)),
                ("feasibility", format!("{} (slack {})", mark(diag.feasible), prec.text(diag.slack))),
                (
                    "activity",
                    format!(
                        "{} (expected {}, observed {}, reported {})",
                        mark(diag.activity_ok),
                        diag.expected_active,
                        diag.observed_active,
                        diag.reported_active
                    ),
                ),
                ("objective", mark(diag.objective_consistent)),
                ("local moves", mark(diag.local_ok())),
            ];
            match (&note, &oracle_json) {
                (Some(n), _) => rows.push(("oracle", n.clone())),
                (None, v) => rows.push((
                    "oracle",
                    format!(
                        "{} (best N {}, gap {} <= {})",
                        mark(oracle_ok),
                        v["best_n"],
                        v["gap"],
                        v["gap_bound"]
                    ),
                )),
            }
            rows.push(("result", if passed { "PASS".into() } else { "FAIL".into() }));
            table(&rows)
        }
    };
    Ok(Output { text, code: if passed { 0 } else { 3 } })
}

pub fn bed(file: &ProblemFile, s: &Settings) -> Result<Output, CliError> {
    if file.problem_kind != ProblemKind::Bed {
        return Err(CliError::Validation("the `bed` command needs problem_kind = \"bed\"".into()));
    }
    let tumor = file.tumor()?;
    let b = file.bed.expect("validated");
    let bounds = file.bounds_opt()?;
    let conv = bed_uniform_checked(&tumor, b.n, b.d, b.n_target, bounds.as_ref())?;
    let source = Protocol::uniform(b.n, b.d)?;
    let target = Protocol::uniform(b.n_target, conv.dose)?;
    let e_source = tumor_effect(&tumor, &source);
    let e_target = tumor_effect(&tumor, &target);
    let equal = effects_equal(&tumor, &source, &target, 1e-9);
    let prec = s.precision;
    let text = match s.format {
        Format::Machine => pretty(&json!({
            "problem": "bed",
            "status": "solved",
            "n": b.n,
            "d": prec.num(b.d),
            "n_target": b.n_target,
            "dose": prec.num(conv.dose),
            "effect_source": prec.num(e_source),
            "effect_target": prec.num(e_target),
            "effects_equal": equal,
            "within_bounds": conv.within_bounds,
        })),
        Format::Human => {
            let mut rows = vec![
                ("source", format!("{} × {} Gy  (E_T = {})", b.n, prec.text(b.d), prec.text(e_source))),
                ("target", format!("{} × {} Gy  (E_T = {})", b.n_target, prec.text(conv.dose), prec.text(e_target))),
            ];
            if let Some(w) = conv.within_bounds {
                rows.push(("bounds", if w { "within" } else { "OUTSIDE [d_min, d_max]" }.into()));
            }
            table(&rows)
        }
    };
    Ok(Output::ok(text))
}
