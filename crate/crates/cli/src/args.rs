use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "aic",
    version,
    about = "Work through an AIC-based chain-of-thought articulation"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct JsonFlag {
    /// Print machine-readable JSON instead of text.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Args)]
pub struct TextInput {
    /// Assertion text; read from stdin when omitted.
    #[arg(long)]
    pub text: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Create a new session document.
    Init {
        path: PathBuf,
        #[arg(long)]
        name: String,
        /// Frequencies at or below this are red flags.
        #[arg(long, env = "AIC_RED_FLAG_THRESHOLD", default_value_t = aic_core::session::DEFAULT_RED_FLAG_THRESHOLD)]
        threshold: u32,
    },
    /// Show step states and finding counts.
    Status {
        path: PathBuf,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// List the eight steps, with their states when a session is given.
    Steps {
        path: Option<PathBuf>,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Show one step's question, prompt, state and assertions.
    StepOpen {
        path: PathBuf,
        step: u8,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Submit an assertion to a step.
    StepSubmit {
        path: PathBuf,
        step: u8,
        #[command(flatten)]
        text: TextInput,
        /// Entity the assertion refers to; repeatable.
        #[arg(long = "ref", value_name = "ID")]
        refs: Vec<String>,
    },
    /// Mark a step complete and open the next one.
    StepComplete { path: PathBuf, step: u8 },
    /// Replace a current assertion with a revised one.
    StepRevise {
        path: PathBuf,
        step: u8,
        assertion: String,
        #[arg(long)]
        rationale: String,
        #[command(flatten)]
        text: TextInput,
    },
    /// Confirm a stale step without changing it.
    StepReconfirm { path: PathBuf, step: u8 },
    /// Check the session; exits 1 on any error-severity finding.
    Validate {
        path: PathBuf,
        /// Trace the chain from this purpose instead.
        #[arg(long)]
        purpose: Option<String>,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Rank the factors mentioned in current assertions.
    Factors {
        path: PathBuf,
        #[arg(long)]
        threshold: Option<u32>,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Render the Markdown report.
    Report {
        path: PathBuf,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Print the purpose/action graph.
    Graph {
        path: PathBuf,
        #[command(flatten)]
        json: JsonFlag,
    },
    /// Apply JSON mutations (one object or an array) all-or-nothing.
    Apply {
        path: PathBuf,
        /// Mutation JSON; read from stdin when omitted.
        #[arg(long)]
        mutation: Option<String>,
    },
    /// Run the HTTP service.
    Serve {
        #[arg(long, env = "AIC_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
        /// Directory holding one document per session.
        #[arg(long, env = "AIC_DIR", default_value = ".")]
        dir: PathBuf,
        /// Allowed browser origins: empty for none, `*` for any, or a comma-separated list.
        #[arg(long, env = "AIC_CORS", default_value = "")]
        cors: String,
    },
}
