mod args;
mod render;

use std::fs::{File, OpenOptions};
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use aic_core::document::{read_session_file, write_session_file};
use aic_core::validation::has_errors;
use aic_core::{
    compute_factor_report, export_graph, render_report, validate_chain, validate_session, EntityId,
    Mutation, Session, SessionConfig, SystemClock, Timestamp,
};
use aic_server::{router, CorsPolicy, Store};
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, TextInput};

#[derive(Debug, thiserror::Error)]
enum CliError {
    #[error(transparent)]
    Engine(aic_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl CliError {
    fn exit_code(&self) -> u8 {
        use aic_core::Error as E;
        match self {
            CliError::Engine(
                E::Parse { .. }
                | E::UnsupportedVersion { .. }
                | E::InvalidDocument(_)
                | E::Io { .. },
            ) => 2,
            CliError::Engine(_) => 1,
            CliError::Usage(_) | CliError::Io { .. } => 2,
        }
    }
}

impl From<aic_core::Error> for CliError {
    fn from(e: aic_core::Error) -> Self {
        CliError::Engine(e)
    }
}

type Result<T> = std::result::Result<T, CliError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = io::stdout().lock();
    match run(cli.command, &mut out) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            let _ = out.flush();
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}

fn run(command: Command, out: &mut impl Write) -> Result<u8> {
    let text = match command {
        Command::Init {
            path,
            name,
            threshold,
        } => {
            if path.exists() {
                return Err(CliError::Usage(format!(
                    "{} already exists",
                    path.display()
                )));
            }
            let session = Session::create(
                &name,
                SessionConfig {
                    red_flag_threshold: threshold,
                },
            )?;
            write_session_file(&path, &session)?;
            format!("created session {} in {}\n", session.id(), path.display())
        }
        Command::Status { path, json } => {
            let status = load(&path)?.status();
            if json.json {
                to_json(&status)
            } else {
                render::status(&status)
            }
        }
        Command::Steps { path, json } => {
            let session = path.as_deref().map(load).transpose()?;
            if json.json {
                render::steps_json(session.as_ref())
            } else {
                render::steps(session.as_ref())
            }
        }
        Command::StepOpen { path, step, json } => {
            let session = load(&path)?;
            let view = render::StepView::new(&session, step)?;
            if json.json {
                to_json(&view)
            } else {
                render::step_view(&view)
            }
        }
        Command::StepSubmit {
            path,
            step,
            text,
            refs,
        } => {
            let m = Mutation::SubmitAssertion {
                step,
                text: read_text(text)?,
                referenced_entities: refs.into_iter().map(EntityId::new).collect(),
            };
            mutate(&path, vec![m])?
        }
        Command::StepComplete { path, step } => {
            mutate(&path, vec![Mutation::CompleteStep { step }])?
        }
        Command::StepRevise {
            path,
            step,
            assertion,
            rationale,
            text,
        } => {
            let m = Mutation::ReviseAssertion {
                step,
                assertion: EntityId::new(assertion),
                text: read_text(text)?,
                rationale,
            };
            mutate(&path, vec![m])?
        }
        Command::StepReconfirm { path, step } => {
            mutate(&path, vec![Mutation::ReconfirmStep { step }])?
        }
        Command::Validate {
            path,
            purpose,
            json,
        } => {
            let session = load(&path)?;
            if let Some(p) = purpose {
                let trace = validate_chain(&session, &EntityId::new(p))?;
                let text = if json.json {
                    to_json(&trace)
                } else {
                    render::chain(&trace)
                };
                out.write_all(text.as_bytes()).map_err(stdout_err)?;
                return Ok(if trace.is_complete() { 0 } else { 1 });
            }
            let findings = validate_session(&session);
            let text = if json.json {
                to_json(&findings)
            } else {
                render::findings(&findings)
            };
            out.write_all(text.as_bytes()).map_err(stdout_err)?;
            return Ok(if has_errors(&findings) { 1 } else { 0 });
        }
        Command::Factors {
            path,
            threshold,
            json,
        } => {
            let session = load(&path)?;
            let report = compute_factor_report(
                &session,
                threshold.unwrap_or(session.config().red_flag_threshold),
            )?;
            if json.json {
                to_json(&report)
            } else {
                render::factors(&report)
            }
        }
        Command::Report { path, json } => {
            let session = load(&path)?;
            if json.json {
                to_json(&render::ReportJson::new(&session)?)
            } else {
                render_report(&session)
            }
        }
        Command::Graph { path, json } => {
            let graph = export_graph(&load(&path)?);
            if json.json {
                to_json(&graph)
            } else {
                render::graph(&graph)
            }
        }
        Command::Apply { path, mutation } => {
            let raw = match mutation {
                Some(m) => m,
                None => read_stdin()?,
            };
            mutate(&path, parse_mutations(&raw)?)?
        }
        Command::Serve { bind, dir, cors } => {
            serve(&bind, dir, &cors)?;
            String::new()
        }
    };
    out.write_all(text.as_bytes()).map_err(stdout_err)?;
    Ok(0)
}

fn stdout_err(e: io::Error) -> CliError {
    CliError::Io {
        path: "<stdout>".into(),
        source: e,
    }
}

fn to_json<T: Serialize>(value: &T) -> String {
    String::from_utf8(aic_core::document::to_canonical_json(value)).expect("JSON is UTF-8")
}

fn load(path: &Path) -> Result<Session> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "no session document at {}",
            path.display()
        )));
    }
    Ok(read_session_file(path)?.session)
}

fn read_stdin() -> Result<String> {
    let mut buf = String::new();
    io::stdin()
        .read_to_string(&mut buf)
        .map_err(|e| CliError::Io {
            path: "<stdin>".into(),
            source: e,
        })?;
    Ok(buf)
}

fn read_text(input: TextInput) -> Result<String> {
    let text = match input.text {
        Some(t) => t,
        None => read_stdin()?,
    };
    if text.trim().is_empty() {
        return Err(CliError::Usage(
            "no assertion text given (use --text or stdin)".into(),
        ));
    }
    Ok(text)
}

fn parse_mutations(raw: &str) -> Result<Vec<Mutation>> {
    let value: serde_json::Value = serde_json::from_str(raw)
        .map_err(|e| CliError::Usage(format!("invalid mutation JSON: {e}")))?;
    let list = match value {
        serde_json::Value::Array(items) => items,
        single => vec![single],
    };
    list.into_iter()
        .map(|v| {
            serde_json::from_value(v).map_err(|e| CliError::Usage(format!("invalid mutation: {e}")))
        })
        .collect()
}

/// Holds an exclusive advisory lock on `<path>.lock` while alive.
struct SessionLock(File);

impl SessionLock {
    fn acquire(path: &Path) -> Result<Self> {
        let mut lock_path = path.as_os_str().to_owned();
        lock_path.push(".lock");
        let lock_path = PathBuf::from(lock_path);
        let file = OpenOptions::new()
            .create(true)
            .truncate(false)
            .write(true)
            .open(&lock_path)
            .map_err(|e| CliError::Io {
                path: lock_path.clone(),
                source: e,
            })?;
        file.lock().map_err(|e| CliError::Io {
            path: lock_path,
            source: e,
        })?;
        Ok(SessionLock(file))
    }
}

impl Drop for SessionLock {
    fn drop(&mut self) {
        let _ = self.0.unlock();
    }
}

/// Applies all mutations or none, then rewrites the document atomically.
fn mutate(path: &Path, mutations: Vec<Mutation>) -> Result<String> {
    if !path.is_file() {
        return Err(CliError::Usage(format!(
            "no session document at {}",
            path.display()
        )));
    }
    let _lock = SessionLock::acquire(path)?;
    let mut session = load(path)?;
    let now = Timestamp::now();
    let mut lines = String::new();
    for m in mutations {
        let outcome = session.apply(m, now)?;
        lines.push_str(&render::outcome(&outcome));
    }
    write_session_file(path, &session)?;
    lines.push_str(&format!("version {}\n", session.version()));
    Ok(lines)
}

fn serve(bind: &str, dir: PathBuf, cors: &str) -> Result<()> {
    if !dir.is_dir() {
        return Err(CliError::Usage(format!(
            "storage directory {} does not exist",
            dir.display()
        )));
    }
    let runtime = tokio::runtime::Runtime::new().map_err(|e| CliError::Io {
        path: dir.clone(),
        source: e,
    })?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| CliError::Usage(format!("cannot bind {bind}: {e}")))?;
        let addr = listener
            .local_addr()
            .map_err(|e| CliError::Usage(e.to_string()))?;
        eprintln!("serving sessions from {} on http://{addr}", dir.display());
        let store = Arc::new(Store::new(dir.clone(), Arc::new(SystemClock)));
        aic_server::serve(listener, router(store, &CorsPolicy::parse(cors)))
            .await
            .map_err(|e| CliError::Io {
                path: dir,
                source: e,
            })
    })
}
