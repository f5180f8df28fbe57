//! Command-line interface.
//!
//! Settings merge as flags > environment > config file > defaults. The config
//! file is TOML:
//!
//! ```toml
//! backend = "http"
//!
//! [session]
//! max_iterations = 3
//! communication_level = "effective"
//!
//! [llm]
//! base_url = "https://api.openai.com/v1"
//! model = "gpt-3.5-turbo"
//! ```
//!
//! Exit codes: 0 success, 1 runtime error, 2 usage or validation error,
//! 3 clarification gain below `--require-gain`.

use std::ffi::OsString;
use std::io::{BufRead, Write};
use std::net::SocketAddr;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::backend::{scripted_from_file, BackendPair, HttpBackend, HttpConfig};
use crate::config::{CommunicationLevel, SessionConfig};
use crate::error::{ConfigError, SessionError};
use crate::eval::{aggregate, load_suite, run_suite, scripted_pair, CheckOptions, RunOptions};
use crate::fixtures;
use crate::prompting::{Answer, AnswerOrigin};
use crate::service::{self, AppState, ServiceConfig};
use crate::session::{
    advance, load_transcript, new_session, record_answers, save_transcript, AnswerSource, PendingQuestion,
    ProblemDescription, RoundReply, SessionStatus, SessionTranscript,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_GAIN: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "clarifier", version, about = "Code generation with clarifying questions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run an interactive session.
    Run {
        /// Problem description, or `@path` to read it from a file.
        description: String,
        #[command(flatten)]
        common: CommonArgs,
        /// Write the transcript here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Print a stored transcript. Never contacts a backend.
    Replay {
        transcript: PathBuf,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Run a task suite with and without clarification.
    Eval {
        suite: PathBuf,
        #[command(flatten)]
        common: CommonArgs,
        /// Report and transcripts go here.
        #[arg(long, default_value = "eval-out")]
        out: PathBuf,
        /// Allow `external_command` checks to run.
        #[arg(long)]
        allow_exec: bool,
        /// Seconds before an external check is killed.
        #[arg(long, default_value_t = 30)]
        exec_timeout: u64,
        /// Worker threads; defaults to the number of CPUs.
        #[arg(long)]
        jobs: Option<usize>,
        /// Exit with code 3 when the gain is below this value.
        #[arg(long)]
        require_gain: Option<f64>,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
    /// Serve the HTTP API.
    Serve {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Directory with the web UI; served from `/`.
        #[arg(long)]
        static_dir: Option<PathBuf>,
        /// Write every session transcript here.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Print the effective configuration.
    Config {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Format::Pretty)]
        format: Format,
    },
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    /// TOML config file.
    #[arg(long, env = "CLARIFIER_CONFIG")]
    config: Option<PathBuf>,
    #[arg(long, value_enum, env = "CLARIFIER_BACKEND")]
    backend: Option<BackendKind>,
    /// Response script for the scripted backend. For `eval`, a directory of
    /// per-task scripts (default `<suite>/scripts`).
    #[arg(long, env = "CLARIFIER_SCRIPT")]
    script: Option<PathBuf>,
    #[arg(long, env = "CLARIFIER_MAX_ITERATIONS")]
    max_iterations: Option<u32>,
    #[arg(long, value_enum, env = "CLARIFIER_LEVEL")]
    level: Option<CommunicationLevel>,
    /// Questions per round at the effective level.
    #[arg(long, env = "CLARIFIER_QUESTIONS")]
    questions: Option<u32>,
    #[arg(long, env = "LLM_BASE_URL")]
    base_url: Option<String>,
    #[arg(long, env = "LLM_MODEL")]
    model: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Machine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    #[default]
    Scripted,
    Http,
}

impl ValueEnum for CommunicationLevel {
    fn value_variants<'a>() -> &'a [Self] {
        &[
            CommunicationLevel::Under,
            CommunicationLevel::Effective,
            CommunicationLevel::Over,
        ]
    }

    fn to_possible_value(&self) -> Option<clap::builder::PossibleValue> {
        Some(clap::builder::PossibleValue::new(self.as_str()))
    }
}

/// Effective settings after merging every source.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub backend: BackendKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub script: Option<PathBuf>,
    pub session: SessionConfig,
    pub llm: HttpConfig,
}

impl CliConfig {
    /// Reads a TOML config file.
    pub fn from_file(path: &Path) -> Result<CliConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        toml::from_str(&text).map_err(|e| ConfigError::Parse {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
    }

    fn merge(args: &CommonArgs) -> Result<CliConfig, ConfigError> {
        let mut cfg = match &args.config {
            Some(path) => CliConfig::from_file(path)?,
            None => CliConfig::default(),
        };
        if let Some(b) = args.backend {
            cfg.backend = b;
        }
        if let Some(s) = &args.script {
            cfg.script = Some(s.clone());
        }
        if let Some(n) = args.max_iterations {
            cfg.session.max_iterations = n;
        }
        if let Some(l) = args.level {
            cfg.session.communication_level = l;
        }
        if let Some(n) = args.questions {
            cfg.session.questions_per_round = n;
        }
        if let Some(u) = &args.base_url {
            cfg.llm.base_url = u.clone();
        }
        if let Some(m) = &args.model {
            cfg.llm.model = m.clone();
        }
        if let Ok(key) = std::env::var("LLM_API_KEY") {
            if !key.is_empty() {
                cfg.llm.api_key = Some(key);
            }
        }
        cfg.session.validate()?;
        Ok(cfg)
    }

    /// Backends for one session.
    fn backends(&self) -> Result<BackendPair, Failure> {
        match self.backend {
            BackendKind::Http => Ok(BackendPair::Shared(Arc::new(HttpBackend::new(self.llm.clone())))),
            BackendKind::Scripted => {
                let script = self
                    .script
                    .as_deref()
                    .ok_or_else(|| Failure::usage("the scripted backend needs --script"))?;
                let backend = scripted_from_file(resolve_script(script)).map_err(|e| Failure::usage(e.to_string()))?;
                Ok(BackendPair::Shared(Arc::new(backend)))
            }
        }
    }
}

/// A bare name like `golden.fib` also finds the shipped fixture script.
fn resolve_script(path: &Path) -> PathBuf {
    if path.exists() {
        return path.to_path_buf();
    }
    let shipped = fixtures::fixtures_dir().join(format!("{}.json", path.display()));
    if shipped.is_file() {
        shipped
    } else {
        path.to_path_buf()
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            message: message.into(),
        }
    }

    fn runtime(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_RUNTIME,
            message: message.into(),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::usage(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::runtime(e.to_string())
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdin = std::io::stdin();
    run(
        std::env::args_os(),
        &mut stdin.lock(),
        &mut std::io::stdout(),
        &mut std::io::stderr(),
    )
}

/// Runs one command line against the given streams and returns the exit code.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let sink: &mut dyn Write = if e.use_stderr() { stderr } else { stdout };
            let _ = write!(sink, "{}", e.render());
            return code;
        }
    };
    let outcome = match cli.command {
        Command::Run {
            description,
            common,
            out,
            format,
        } => cmd_run(&description, &common, out.as_deref(), format, stdin, stdout, stderr),
        Command::Replay { transcript, format } => cmd_replay(&transcript, format, stdout),
        Command::Eval {
            suite,
            common,
            out,
            allow_exec,
            exec_timeout,
            jobs,
            require_gain,
            format,
        } => {
            let check = CheckOptions {
                allow_exec,
                exec_timeout: std::time::Duration::from_secs(exec_timeout),
            };
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            cmd_eval(
                &suite,
                &common,
                RunOptions { out_dir: out, check },
                jobs,
                require_gain,
                format,
                stdout,
                stderr,
            )
        }
        Command::Serve {
            common,
            port,
            host,
            static_dir,
            out_dir,
        } => cmd_serve(&common, &host, port, static_dir, out_dir, stderr),
        Command::Config { common, format } => cmd_config(&common, format, stdout),
    };
    match outcome {
        Ok(code) => code,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

fn read_description(arg: &str) -> Result<ProblemDescription, Failure> {
    let text = match arg.strip_prefix('@') {
        Some(path) => std::fs::read_to_string(path).map_err(|e| Failure::usage(format!("cannot read {path}: {e}")))?,
        None => arg.to_string(),
    };
    ProblemDescription::new(text).map_err(|e| Failure::usage(e.to_string()))
}

/// Reads one line per question: text answers, an empty line skips, `/stop`
/// ends the session. End of input skips everything that is left.
struct Interactive<'a> {
    input: &'a mut dyn BufRead,
    prompt: &'a mut dyn Write,
}

impl AnswerSource for Interactive<'_> {
    fn answer_round(&mut self, pending: &[PendingQuestion]) -> RoundReply {
        let mut reply = RoundReply::default();
        let _ = writeln!(self.prompt, "{}", format::ANSWER_HINT);
        for p in pending {
            let _ = write!(self.prompt, "{}", format::answer_prompt(p));
            let _ = self.prompt.flush();
            let mut line = String::new();
            let text = match self.input.read_line(&mut line) {
                Ok(0) | Err(_) => String::new(),
                Ok(_) => line.trim().to_string(),
            };
            if text == "/stop" {
                reply.stop = true;
                break;
            }
            reply.answers.push(if text.is_empty() {
                Answer::skipped(p.question_ref.clone())
            } else {
                Answer {
                    question_ref: p.question_ref.clone(),
                    text,
                    source: AnswerOrigin::Human,
                }
            });
        }
        reply
    }
}

fn cmd_run(
    description: &str,
    common: &CommonArgs,
    out: Option<&Path>,
    format: Format,
    stdin: &mut dyn BufRead,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let desc = read_description(description)?;
    let cfg = CliConfig::merge(common)?;
    let backends = cfg.backends()?;
    let mut session = new_session(desc, cfg.session.clone()).map_err(|e| Failure::usage(e.to_string()))?;

    // Machine mode keeps stdout for the final document.
    let chatter: &mut dyn Write = if format == Format::Machine { stderr } else { stdout };
    let result = drive(&mut session, &backends, stdin, chatter);
    if let Err(e) = &result {
        session.status = SessionStatus::Failed;
        let _ = writeln!(chatter, "error: {e}");
    }
    if let Some(path) = out {
        session.write_to(path).map_err(|e| Failure::runtime(e.to_string()))?;
    }
    match format {
        Format::Pretty => {
            write!(chatter, "{}", format::summary(&session))?;
            if let Some(path) = out {
                writeln!(chatter, "transcript written to {}", path.display())?;
            }
        }
        Format::Machine => stdout.write_all(&save_transcript(&session))?,
    }
    Ok(if result.is_ok() { EXIT_OK } else { EXIT_RUNTIME })
}

fn drive(
    session: &mut SessionTranscript,
    backends: &BackendPair,
    stdin: &mut dyn BufRead,
    out: &mut dyn Write,
) -> Result<(), SessionError> {
    while session.status.is_active() {
        let pending = advance(session, backends.coder(), backends.communicator())?;
        if let Some(rev) = session.latest_revision() {
            let _ = write!(out, "{}", format::revision(rev));
        }
        if pending.is_empty() {
            continue;
        }
        let _ = write!(out, "{}", format::pending(&pending));
        let reply = Interactive {
            input: &mut *stdin,
            prompt: &mut *out,
        }
        .answer_round(&pending);
        record_answers(session, &pending, reply)?;
    }
    Ok(())
}

fn cmd_replay(path: &Path, format: Format, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let bytes = std::fs::read(path).map_err(|e| Failure::runtime(format!("cannot read {}: {e}", path.display())))?;
    let session = load_transcript(&bytes).map_err(|e| Failure::runtime(format!("{}: {e}", path.display())))?;
    match format {
        Format::Machine => stdout.write_all(&bytes)?,
        Format::Pretty => write!(stdout, "{}", format::history(&session))?,
    }
    Ok(EXIT_OK)
}

#[allow(clippy::too_many_arguments)]
fn cmd_eval(
    suite: &Path,
    common: &CommonArgs,
    opts: RunOptions,
    jobs: usize,
    require_gain: Option<f64>,
    format: Format,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = CliConfig::merge(common)?;
    let tasks = load_suite(suite).map_err(|e| Failure::usage(e.to_string()))?;
    if tasks.is_empty() {
        writeln!(stderr, "warning: no tasks in {}", suite.display())?;
    }

    let results = match cfg.backend {
        BackendKind::Scripted => {
            let dir = cfg.script.clone().unwrap_or_else(|| suite.join("scripts"));
            run_suite(
                &tasks,
                &cfg.session,
                |t| scripted_pair(&dir, &t.id).map_err(|e| e.to_string()),
                &opts,
                jobs,
            )
        }
        BackendKind::Http => {
            let pair = cfg.backends()?;
            run_suite(&tasks, &cfg.session, |_| Ok(pair.fresh()), &opts, jobs)
        }
    };
    let report = aggregate(&results).map_err(|e| Failure::runtime(e.to_string()))?;
    std::fs::create_dir_all(&opts.out_dir)?;
    let report_path = opts.out_dir.join("report.json");
    std::fs::write(&report_path, report.to_json())?;

    match format {
        Format::Pretty => {
            write!(stdout, "{}", report.render_table())?;
            writeln!(stdout, "report written to {}", report_path.display())?;
        }
        Format::Machine => write!(stdout, "{}", report.to_json())?,
    }

    if report.errored_arms > 0 {
        for r in results.iter().filter(|r| r.error.is_some()) {
            writeln!(
                stderr,
                "error: {} ({}): {}",
                r.task_id,
                r.arm,
                r.error.as_deref().unwrap_or_default()
            )?;
        }
        return Ok(EXIT_RUNTIME);
    }
    if let Some(min) = require_gain {
        if report.clarification_gain < min {
            writeln!(
                stderr,
                "clarification gain {:.3} is below the required {min:.3}",
                report.clarification_gain
            )?;
            return Ok(EXIT_GAIN);
        }
    }
    Ok(EXIT_OK)
}

fn cmd_serve(
    common: &CommonArgs,
    host: &str,
    port: u16,
    static_dir: Option<PathBuf>,
    out_dir: Option<PathBuf>,
    stderr: &mut dyn Write,
) -> Result<i32, Failure> {
    let cfg = CliConfig::merge(common)?;
    let backends = cfg.backends()?;
    let addr: SocketAddr = format!("{host}:{port}")
        .parse()
        .map_err(|e| Failure::usage(format!("bad address {host}:{port}: {e}")))?;
    let service = ServiceConfig {
        backends,
        defaults: cfg.session,
        out_dir,
        static_dir,
    };

    let runtime = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    let listener = runtime
        .block_on(tokio::net::TcpListener::bind(addr))
        .map_err(|e| Failure::runtime(format!("cannot bind {addr}: {e}")))?;
    writeln!(stderr, "listening on http://{}", listener.local_addr()?)?;
    runtime.block_on(service::serve(listener, AppState::new(service), async {
        let _ = tokio::signal::ctrl_c().await;
    }))?;
    Ok(EXIT_OK)
}

fn cmd_config(common: &CommonArgs, format: Format, stdout: &mut dyn Write) -> Result<i32, Failure> {
    let cfg = CliConfig::merge(common)?;
    match format {
        Format::Pretty => {
            let text = toml::to_string(&cfg).map_err(|e| Failure::runtime(e.to_string()))?;
            write!(stdout, "{text}")?;
        }
        Format::Machine => writeln!(
            stdout,
            "{}",
            serde_json::to_string_pretty(&cfg).expect("config serializes")
        )?,
    }
    Ok(EXIT_OK)
}

/// Every user-facing rendering lives here.
pub mod format {
    use std::fmt::Write as _;

    use crate::session::{CodeRevision, PendingQuestion, QAExchange, SessionTranscript};
    use crate::topic::QuestionTopic;

    pub const ANSWER_HINT: &str = "Answer each question. An empty line skips it, /stop ends the session.";

    pub fn answer_prompt(p: &PendingQuestion) -> String {
        format!("[{}] > ", p.question_ref)
    }

    fn fenced(code: &str, lang: Option<&str>) -> String {
        format!("```{}\n{}\n```\n", lang.unwrap_or(""), code.trim_end())
    }

    pub fn revision(rev: &CodeRevision) -> String {
        format!(
            "\n--- revision {} ---\n{}",
            rev.iteration,
            fenced(&rev.code, rev.language_hint.as_deref())
        )
    }

    /// Groups consecutive items under their topic label.
    fn grouped<T>(items: &[T], topic: impl Fn(&T) -> &QuestionTopic, mut line: impl FnMut(&mut String, &T)) -> String {
        let mut out = String::new();
        let mut current: Option<&QuestionTopic> = None;
        for item in items {
            let t = topic(item);
            if current != Some(t) {
                let _ = writeln!(out, "{}{}:", if current.is_some() { "\n" } else { "" }, t.label());
                current = Some(t);
            }
            line(&mut out, item);
        }
        out
    }

    /// Questions awaiting answers, grouped by topic.
    pub fn pending(pending: &[PendingQuestion]) -> String {
        let body = grouped(
            pending,
            |p| &p.question.topic,
            |out, p| {
                let _ = writeln!(out, "  [{}] {}", p.question_ref, p.question.text);
            },
        );
        format!("\nClarifying questions:\n\n{body}\n")
    }

    fn exchange_line(out: &mut String, ex: &QAExchange) {
        let answer = match &ex.answer {
            Some(a) if a.is_skipped() => "(skipped)".to_string(),
            Some(a) => a.text.clone(),
            None => "(unanswered)".to_string(),
        };
        let _ = writeln!(
            out,
            "  [{}] {}\n      -> {}",
            ex.question_ref(),
            ex.question.text,
            answer
        );
    }

    /// Full session history for `replay`.
    pub fn history(s: &SessionTranscript) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "Problem: {}", s.description.text());
        let c = &s.config_snapshot;
        let _ = writeln!(
            out,
            "Config: max_iterations={} level={} questions_per_round={}",
            c.max_iterations, c.communication_level, c.questions_per_round
        );
        for rev in &s.revisions {
            out.push_str(&revision(rev));
            let asked: Vec<&QAExchange> = s
                .exchanges
                .iter()
                .filter(|e| e.asked_at_iteration == rev.iteration)
                .collect();
            if !asked.is_empty() {
                out.push_str("\nQuestions:\n");
                out.push_str(&grouped(&asked, |e| &e.question.topic, |o, e| exchange_line(o, e)));
            }
        }
        let _ = writeln!(out, "\nStatus: {}", s.status);
        out
    }

    /// Closing lines of an interactive run.
    pub fn summary(s: &SessionTranscript) -> String {
        let answered = s
            .exchanges
            .iter()
            .filter(|e| e.answer.as_ref().is_some_and(|a| !a.is_skipped()))
            .count();
        let mut out = String::new();
        if let Some(rev) = s.latest_revision() {
            let _ = write!(
                out,
                "\nFinal code:\n{}",
                fenced(&rev.code, rev.language_hint.as_deref())
            );
        }
        let _ = writeln!(
            out,
            "\nStatus: {} after {} revision(s), {} question(s) asked, {} answered",
            s.status,
            s.revisions.len(),
            s.questions_asked(),
            answered
        );
        out
    }
}
