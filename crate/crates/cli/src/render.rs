//! Text and JSON views for the read commands.

use std::fmt::Write;

use aic_core::graph::GraphExport;
use aic_core::validation::has_errors;
use aic_core::{
    compute_factor_report, export_graph, get_step, list_steps, validate_session, Assertion,
    ChainLink, ChainTrace, FactorReport, Finding, Outcome, Session, SessionStatus, Severity,
    StepDefinition, StepStatus,
};
use serde::Serialize;

use crate::to_json;

pub fn status(s: &SessionStatus) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "session   {} ({})", s.name, s.session_id);
    let _ = writeln!(out, "version   {}", s.version);
    let _ = writeln!(out, "threshold {}", s.config.red_flag_threshold);
    let _ = writeln!(
        out,
        "state     {}",
        if s.finished {
            "finished"
        } else {
            "in progress"
        }
    );
    out.push('\n');
    for st in &s.steps {
        let _ = writeln!(
            out,
            "{}  {:<12} {:>2} current  {:>2} superseded  {}",
            st.index, st.status, st.current_assertions, st.superseded_assertions, st.name
        );
    }
    if !s.stale_steps.is_empty() {
        let stale: Vec<String> = s.stale_steps.iter().map(u8::to_string).collect();
        let _ = writeln!(out, "\nstale steps: {}", stale.join(", "));
    }
    let _ = writeln!(
        out,
        "\nfindings: {} ({} errors)",
        s.pending_findings, s.error_findings
    );
    out
}

#[derive(Serialize)]
struct StepListing<'a> {
    #[serde(flatten)]
    definition: &'a StepDefinition,
    #[serde(skip_serializing_if = "Option::is_none")]
    status: Option<StepStatus>,
}

fn listing(session: Option<&Session>) -> Vec<StepListing<'static>> {
    list_steps()
        .iter()
        .map(|d| StepListing {
            definition: d,
            status: session
                .and_then(|s| s.step(d.index).ok())
                .map(|st| st.status),
        })
        .collect()
}

pub fn steps_json(session: Option<&Session>) -> String {
    to_json(&listing(session))
}

pub fn steps(session: Option<&Session>) -> String {
    let mut out = String::new();
    for l in listing(session) {
        let d = l.definition;
        match l.status {
            Some(st) => {
                let _ = writeln!(out, "Step {}: {} [{st}]", d.index, d.name);
            }
            None => {
                let _ = writeln!(out, "Step {}: {}", d.index, d.name);
            }
        }
        let _ = writeln!(out, "  Question:   {}", d.predictive_question);
        let _ = writeln!(out, "  Prompt:     {}", d.guiding_prompt);
        let _ = writeln!(out, "  Completion: {}\n", d.completion_criterion);
    }
    out
}

#[derive(Serialize)]
pub struct StepView<'a> {
    definition: &'static StepDefinition,
    status: StepStatus,
    current: Vec<&'a Assertion>,
    superseded: Vec<&'a Assertion>,
}

impl<'a> StepView<'a> {
    pub fn new(session: &'a Session, step: u8) -> aic_core::Result<Self> {
        let definition = get_step(step)?;
        let in_step = || {
            session
                .assertions()
                .iter()
                .filter(move |a| a.step_index == step)
        };
        Ok(StepView {
            definition,
            status: session.step(step)?.status,
            current: in_step().filter(|a| a.is_current()).collect(),
            superseded: in_step().filter(|a| !a.is_current()).collect(),
        })
    }
}

pub fn step_view(v: &StepView<'_>) -> String {
    let d = v.definition;
    let mut out = String::new();
    let _ = writeln!(out, "Step {}: {} [{}]\n", d.index, d.name, v.status);
    let _ = writeln!(out, "Question:   {}", d.predictive_question);
    let _ = writeln!(out, "Prompt:     {}", d.guiding_prompt);
    let _ = writeln!(out, "Completion: {}\n", d.completion_criterion);
    if v.current.is_empty() {
        let _ = writeln!(out, "No current assertions.");
    }
    for a in &v.current {
        let _ = writeln!(
            out,
            "{} (revision {}):\n{}\n",
            a.id,
            a.revision,
            indent(&a.text)
        );
    }
    if !v.superseded.is_empty() {
        let _ = writeln!(out, "Superseded:");
        for a in &v.superseded {
            let _ = writeln!(
                out,
                "{} (revision {}):\n{}\n",
                a.id,
                a.revision,
                indent(&a.text)
            );
        }
    }
    out
}

fn indent(text: &str) -> String {
    text.trim_end()
        .lines()
        .map(|l| format!("  {l}"))
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn findings(findings: &[Finding]) -> String {
    let mut out = String::new();
    for f in findings {
        let _ = writeln!(
            out,
            "{:<7} {:<18} {:<10} {}",
            f.severity, f.code, f.entity, f.message
        );
    }
    let errors = findings
        .iter()
        .filter(|f| f.severity == Severity::Error)
        .count();
    let _ = writeln!(out, "{errors} errors, {} warnings", findings.len() - errors);
    out
}

pub fn chain(trace: &ChainTrace) -> String {
    let mut out = String::new();
    for link in trace.links() {
        let _ = match link {
            ChainLink::Purpose { id, kind } => writeln!(out, "{id:<10} {kind} purpose"),
            ChainLink::Action { id, kind } => writeln!(out, "{id:<10} {kind} action"),
        };
    }
    match trace {
        ChainTrace::Complete { .. } => out.push_str("chain complete\n"),
        ChainTrace::Broken { findings: fs, .. } => {
            out.push_str("chain broken\n");
            out.push_str(&findings(fs));
        }
    }
    out
}

pub fn factors(report: &FactorReport) -> String {
    let mut out = String::new();
    let width = report
        .entries
        .iter()
        .map(|e| e.token.len())
        .max()
        .unwrap_or(0)
        .max(5);
    let _ = writeln!(
        out,
        "{:<4}  {:<width$}  {:>9}  {:<16}  steps",
        "rank", "token", "frequency", "class"
    );
    for (i, e) in report.entries.iter().enumerate() {
        let steps: Vec<String> = e.steps.iter().map(u8::to_string).collect();
        let _ = writeln!(
            out,
            "{:<4}  {:<width$}  {:>9}  {:<16}  {}",
            i + 1,
            e.token,
            e.frequency,
            e.classification,
            steps.join(",")
        );
    }
    let _ = writeln!(
        out,
        "\n{} factors, {} mentions, red-flag threshold {}",
        report.total_factors, report.total_mentions, report.threshold
    );
    out
}

pub fn graph(g: &GraphExport) -> String {
    let mut out = String::new();
    for n in &g.nodes {
        let _ = writeln!(
            out,
            "node {:<8} {:?} {}: {}",
            n.id, n.node_type, n.kind, n.label
        );
    }
    for e in &g.edges {
        let _ = writeln!(out, "edge {} -{:?}-> {}", e.from, e.relation, e.to);
    }
    out
}

/// Everything the Markdown report shows, as data.
#[derive(Serialize)]
pub struct ReportJson {
    status: SessionStatus,
    findings: Vec<Finding>,
    has_errors: bool,
    factors: FactorReport,
    graph: GraphExport,
}

impl ReportJson {
    pub fn new(s: &Session) -> aic_core::Result<Self> {
        let findings = validate_session(s);
        Ok(ReportJson {
            status: s.status(),
            has_errors: has_errors(&findings),
            findings,
            factors: compute_factor_report(s, s.config().red_flag_threshold)?,
            graph: export_graph(s),
        })
    }
}

pub fn outcome(o: &Outcome) -> String {
    match o {
        Outcome::System(s) => format!("system {} ({})\n", s.id, s.name),
        Outcome::Aspect(a) => format!("aspect {} ({})\n", a.id, a.token),
        Outcome::Purpose(p) => format!("purpose {} ({} of {})\n", p.id, p.kind, p.owner_system),
        Outcome::Action(a) => format!("action {} ({} by {})\n", a.id, a.kind, a.source_system),
        Outcome::Assertion(a) => format!(
            "assertion {} (step {}, revision {})\n",
            a.id, a.step_index, a.revision
        ),
        Outcome::Step(s) => format!("step {} {}\n", s.index, s.status),
    }
}
