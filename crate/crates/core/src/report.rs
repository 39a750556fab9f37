//! Markdown report of a session.

use std::fmt::Write;

use crate::catalog::list_steps;
use crate::engine::PRIME_PURPOSE_STEP;
use crate::factors::{compute_factor_report, FactorReport};
use crate::model::{Assertion, PurposeKind};
use crate::session::{RevisionKind, Session};
use crate::validation::{validate_session, Finding};

/// Renders the report. Output depends only on session state.
pub fn render_report(session: &Session) -> String {
    let findings = validate_session(session);
    let factors = compute_factor_report(session, session.config().red_flag_threshold)
        .expect("session thresholds are validated at creation and load");
    let mut out = String::new();
    header(&mut out, session);
    for def in list_steps() {
        step_section(&mut out, session, def.index);
    }
    findings_section(&mut out, &findings);
    factor_section(&mut out, &factors);
    red_flag_section(&mut out, &factors);
    out
}

fn header(out: &mut String, s: &Session) {
    let _ = writeln!(out, "# AIC articulation: {}\n", s.name());
    let _ = writeln!(out, "- Session: `{}`", s.id());
    let _ = writeln!(out, "- Version: {}", s.version());
    let _ = writeln!(
        out,
        "- Red-flag threshold: {}",
        s.config().red_flag_threshold
    );
    let state = if s.is_finished() {
        "finished"
    } else {
        "in progress"
    };
    let _ = writeln!(out, "- State: {state}\n");
}

fn step_section(out: &mut String, s: &Session, index: u8) {
    let def = crate::catalog::get_step(index).expect("catalog covers every step");
    let status = s.step(index).expect("sessions have every step").status;
    let _ = writeln!(out, "## Step {index}: {} ({status})\n", def.name);
    let _ = writeln!(
        out,
        "**Predictive question:** {}\n",
        def.predictive_question
    );
    let _ = writeln!(out, "**Guiding prompt:** {}\n", def.guiding_prompt);
    let _ = writeln!(
        out,
        "**Completion criterion:** {}\n",
        def.completion_criterion
    );

    let _ = writeln!(out, "### Current assertions\n");
    let current: Vec<&Assertion> = s.current_assertions(index).collect();
    if current.is_empty() {
        let _ = writeln!(out, "_None._\n");
    } else {
        for a in current {
            assertion_item(out, a);
        }
        out.push('\n');
    }

    if index == PRIME_PURPOSE_STEP {
        let primaries: Vec<_> = s
            .purposes()
            .iter()
            .filter(|p| p.kind == PurposeKind::Primary)
            .collect();
        if !primaries.is_empty() {
            let _ = writeln!(out, "### Primary purposes\n");
            for p in primaries {
                let owner = s
                    .system(&p.owner_system)
                    .map_or(p.owner_system.as_str(), |sys| sys.name.as_str());
                let _ = writeln!(
                    out,
                    "- `{}` ({}) {owner}: {}",
                    p.id, p.status, p.verb_phrase
                );
            }
            out.push('\n');
        }
    }

    let superseded: Vec<&Assertion> = s
        .assertions()
        .iter()
        .filter(|a| a.step_index == index && !a.is_current())
        .collect();
    let events: Vec<_> = s
        .revision_log()
        .iter()
        .filter(|e| e.step_index == index)
        .collect();
    let _ = writeln!(out, "### Revision history\n");
    if superseded.is_empty() && events.is_empty() {
        let _ = writeln!(out, "_None._\n");
        return;
    }
    for a in superseded {
        assertion_item(out, a);
    }
    for e in events {
        let mut line = format!("- {} {}", e.timestamp, kind_label(e.kind));
        if let Some(subject) = &e.subject {
            let _ = write!(line, " `{subject}`");
        }
        if let Some(next) = &e.replaced_by {
            let _ = write!(line, " -> `{next}`");
        }
        if let Some(r) = &e.rationale {
            let _ = write!(line, ": {}", one_line(r));
        }
        let _ = writeln!(out, "{line}");
    }
    out.push('\n');
}

fn assertion_item(out: &mut String, a: &Assertion) {
    let _ = writeln!(
        out,
        "- `{}` (revision {}, {}): {}",
        a.id,
        a.revision,
        a.status,
        indent_continuation(&a.text)
    );
    if let Some(r) = &a.revision_rationale {
        let _ = writeln!(out, "  - Rationale: {}", one_line(r));
    }
}

fn findings_section(out: &mut String, findings: &[Finding]) {
    let _ = writeln!(out, "## Validation findings\n");
    if findings.is_empty() {
        let _ = writeln!(out, "_No findings._\n");
        return;
    }
    let _ = writeln!(out, "| Code | Severity | Entity | Message |");
    let _ = writeln!(out, "|---|---|---|---|");
    for f in findings {
        let _ = writeln!(
            out,
            "| {} | {} | `{}` | {} |",
            f.code,
            f.severity,
            f.entity,
            cell(&f.message)
        );
    }
    out.push('\n');
}

fn factor_section(out: &mut String, report: &FactorReport) {
    let _ = writeln!(out, "## Factors\n");
    if report.entries.is_empty() {
        let _ = writeln!(out, "_No factors mentioned._\n");
        return;
    }
    let _ = writeln!(
        out,
        "| Rank | Factor | Frequency | Steps | Classification |"
    );
    let _ = writeln!(out, "|---|---|---|---|---|");
    for (rank, e) in report.entries.iter().enumerate() {
        let steps: Vec<String> = e.steps.iter().map(u8::to_string).collect();
        let _ = writeln!(
            out,
            "| {} | `{}` | {} | {} | {} |",
            rank + 1,
            e.token,
            e.frequency,
            steps.join(", "),
            e.classification
        );
    }
    let _ = writeln!(
        out,
        "\n{} distinct factors, {} mentions.\n",
        report.total_factors, report.total_mentions
    );
}

fn red_flag_section(out: &mut String, report: &FactorReport) {
    let _ = writeln!(out, "## Red flags\n");
    let flags: Vec<_> = report.red_flags().collect();
    if flags.is_empty() {
        let _ = writeln!(out, "_None._");
        return;
    }
    let _ = writeln!(
        out,
        "Rarely mentioned factors (at most {} mention{}) are potential sources of surprising emergence:\n",
        report.threshold,
        if report.threshold == 1 { "" } else { "s" }
    );
    for e in flags {
        let _ = writeln!(
            out,
            "- `{}` ({} mention{})",
            e.token,
            e.frequency,
            if e.frequency == 1 { "" } else { "s" }
        );
    }
}

fn one_line(text: &str) -> String {
    text.split_whitespace().collect::<Vec<_>>().join(" ")
}

fn indent_continuation(text: &str) -> String {
    text.trim_end().lines().collect::<Vec<_>>().join("\n  ")
}

fn cell(text: &str) -> String {
    one_line(text).replace('|', "\\|")
}

fn kind_label(kind: RevisionKind) -> &'static str {
    match kind {
        RevisionKind::AssertionRevised => "assertion revised",
        RevisionKind::PrimePurposeRevised => "primary purpose revised",
        RevisionKind::StepReconfirmed => "step reconfirmed",
    }
}
