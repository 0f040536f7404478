//! `polidoxa`: run the service, or drive one.
//!
//! Exit codes: 0 success, 1 internal or I/O failure, 2 usage, 3 validation,
//! 4 unauthenticated, 5 forbidden, 6 not found, 7 conflict,
//! 8 connectivity. Failures print a JSON error object on stderr.

mod backend;
mod render;

use std::io::{Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use backend::{Backend, CliError, Local, Remote, Req};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polidoxa_core::QuarantineConfig;
use polidoxa_service::{
    BootstrapAdmin, CandidateRequest, CoefficientPatch, ExpertsQuery, LoginRequest, RegisterRequest,
    SearchQuery, Service, ServiceConfig, SystemClock, TrustQuery, TrustValue, ValidateRequest,
};

#[derive(Debug, Parser)]
#[command(name = "polidoxa", version, about = "Trust-ranked social search")]
#[command(group(clap::ArgGroup::new("target").required(true).args(["endpoint", "data_dir"])))]
struct Cli {
    /// Base URL of a running service.
    #[arg(long, env = "POLIDOXA_ENDPOINT", global = true)]
    endpoint: Option<String>,

    /// Work in-process on this data directory.
    #[arg(long, env = "POLIDOXA_DATA_DIR", global = true)]
    data_dir: Option<PathBuf>,

    /// Session token from `login`.
    #[arg(long, env = "POLIDOXA_TOKEN", global = true, hide_env_values = true)]
    token: Option<String>,

    /// Local mode: act as this user.
    #[arg(long = "as", value_name = "USER", global = true)]
    as_user: Option<String>,

    #[arg(long, value_enum, default_value_t = Output::Table, global = true)]
    output: Output,

    #[command(flatten)]
    service: ServiceArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Output {
    Table,
    Json,
}

/// Settings for `serve` and local mode.
#[derive(Debug, Args)]
struct ServiceArgs {
    /// `handle:credential` of the administrator created on first start.
    #[arg(long, env = "POLIDOXA_BOOTSTRAP_ADMIN", global = true, hide_env_values = true)]
    bootstrap_admin: Option<BootstrapAdmin>,

    /// Longest accepted post, in characters.
    #[arg(long, env = "POLIDOXA_MAX_LEN", global = true, default_value_t = 140)]
    max_len: usize,

    #[arg(long, env = "POLIDOXA_APPROVAL_QUORUM", global = true, default_value_t = 3)]
    approval_quorum: usize,

    #[arg(long, env = "POLIDOXA_FLAG_QUORUM", global = true, default_value_t = 3)]
    flag_quorum: usize,

    /// Pheromone evaporation rate.
    #[arg(long, env = "POLIDOXA_RHO", global = true, default_value_t = 0.1)]
    rho: f64,

    /// Pheromone deposited per observation.
    #[arg(long, env = "POLIDOXA_DEPOSIT", global = true, default_value_t = 1.0)]
    deposit: f64,

    /// Tab-separated `word<TAB>+|-` lexicon; a built-in list otherwise.
    #[arg(long, env = "POLIDOXA_LEXICON", global = true)]
    lexicon: Option<PathBuf>,

    /// Lifetime of a validation token.
    #[arg(long, env = "POLIDOXA_REGISTRATION_TTL_HOURS", global = true, default_value_t = 24)]
    registration_ttl_hours: i64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the HTTP service (prints the bound address as JSON).
    Serve {
        #[arg(long, env = "POLIDOXA_BIND", default_value = "127.0.0.1:8080")]
        bind: String,
    },
    /// Start a registration; prints the validation token.
    Register {
        handle: String,
        #[arg(long)]
        credential: String,
        #[arg(long)]
        email: Option<String>,
        #[arg(long)]
        contact_handle: Option<String>,
        #[arg(long)]
        external_id: Option<String>,
    },
    Validate {
        token: String,
    },
    /// Prints a session whose token goes in --token or POLIDOXA_TOKEN.
    Login {
        handle: String,
        #[arg(long)]
        credential: String,
    },
    Follow {
        contact: String,
    },
    #[command(subcommand)]
    Ingest(IngestCmd),
    Search {
        #[arg(required = true, num_args = 1..)]
        query: Vec<String>,
        #[arg(long, value_parser = ["static", "dynamic"])]
        mode: Option<String>,
        #[arg(long)]
        from: Option<String>,
        #[arg(long)]
        to: Option<String>,
        /// Comma-separated contacts to restrict results to.
        #[arg(long)]
        friends: Option<String>,
        #[arg(long)]
        page: Option<String>,
        /// Evaluate activity counters at this instant instead of now.
        #[arg(long)]
        as_of: Option<String>,
    },
    #[command(subcommand)]
    Trust(TrustCmd),
    #[command(subcommand, name = "topic-trust")]
    TopicTrust(TopicTrustCmd),
    Experts {
        topic: String,
        #[arg(long)]
        threshold: Option<String>,
    },
    #[command(subcommand)]
    Coeff(CoeffCmd),
    #[command(subcommand)]
    Quarantine(QuarantineCmd),
    /// Polarity forecast over posts containing a word.
    Forecast {
        stream: String,
    },
    /// Snapshot every store into a directory (local mode).
    Export {
        dir: PathBuf,
    },
}

#[derive(Debug, Subcommand)]
enum IngestCmd {
    /// JSON Lines posts; `-` reads stdin.
    Posts { file: PathBuf },
    /// JSON Lines activity events; `-` reads stdin.
    Events { file: PathBuf },
    /// Graph records (`user`, `follow`, `topic_trust`); `-` reads stdin.
    Graph { file: PathBuf },
}

#[derive(Debug, Subcommand)]
enum TrustCmd {
    Set {
        contact: String,
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    Get {
        contact: String,
        /// Decay for indirect contacts: linear or inverse_square.
        #[arg(long)]
        decay: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
enum TopicTrustCmd {
    Set {
        contact: String,
        topic: String,
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
    Get {
        contact: String,
        topic: String,
    },
}

#[derive(Debug, Subcommand)]
enum CoeffCmd {
    Get,
    Set {
        name: String,
        #[arg(allow_hyphen_values = true)]
        value: String,
    },
}

#[derive(Debug, Clone, Args)]
struct Identity {
    candidate: String,
    #[arg(long)]
    email: Option<String>,
    #[arg(long)]
    contact_handle: Option<String>,
    #[arg(long)]
    external_id: Option<String>,
}

impl Identity {
    fn request(self) -> CandidateRequest {
        CandidateRequest {
            candidate: self.candidate,
            contact_handle: self.contact_handle,
            email: self.email.unwrap_or_default(),
            external_id: self.external_id.unwrap_or_default(),
        }
    }
}

#[derive(Debug, Subcommand)]
enum QuarantineCmd {
    List,
    /// Seed a founding member (administrators).
    Found(Identity),
    /// Put a candidate into quarantine (trusted members).
    Submit(Identity),
    Approve { candidate: String },
    Flag { candidate: String },
}

impl ServiceArgs {
    fn config(&self, data_dir: Option<PathBuf>) -> ServiceConfig {
        ServiceConfig {
            data_dir,
            max_len: self.max_len,
            quarantine: QuarantineConfig {
                approval_quorum: self.approval_quorum,
                flag_quorum: self.flag_quorum,
            },
            rho: self.rho,
            deposit: self.deposit,
            registration_ttl: chrono::Duration::hours(self.registration_ttl_hours),
            bootstrap_admin: self.bootstrap_admin.clone(),
            lexicon: self.lexicon.clone(),
        }
    }
}

fn read_input(path: &PathBuf) -> Result<String, CliError> {
    let mut s = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::Io(format!("stdin: {e}")))?;
    } else {
        s = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(s)
}

fn backend(cli: &Cli) -> Result<Backend, CliError> {
    if let Some(endpoint) = &cli.endpoint {
        let base = reqwest::Url::parse(endpoint)
            .map_err(|e| CliError::Usage(format!("bad endpoint `{endpoint}`: {e}")))?;
        return Ok(Backend::Remote(Remote {
            client: reqwest::blocking::Client::new(),
            base,
            token: cli.token.clone(),
        }));
    }
    let svc = Service::open(cli.service.config(cli.data_dir.clone()), Arc::new(SystemClock))?;
    Ok(Backend::Local(Box::new(Local {
        svc,
        as_user: cli.as_user.clone(),
        token: cli.token.clone(),
    })))
}

fn serve(cli: &Cli, bind: &str) -> Result<(), CliError> {
    if cli.endpoint.is_some() {
        return Err(CliError::Usage("serve needs --data-dir, not --endpoint".into()));
    }
    let svc = Arc::new(Service::open(cli.service.config(cli.data_dir.clone()), Arc::new(SystemClock))?);
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError::Io(e.to_string()))?;
    rt.block_on(async {
        let listener = tokio::net::TcpListener::bind(bind)
            .await
            .map_err(|e| CliError::Io(format!("bind {bind}: {e}")))?;
        let addr = listener.local_addr().map_err(|e| CliError::Io(e.to_string()))?;
        let mut out = std::io::stdout();
        let _ = writeln!(out, "{}", serde_json::json!({ "listening": addr.to_string() }));
        let _ = out.flush();
        polidoxa_service::http::serve(svc, listener)
            .await
            .map_err(|e| CliError::Io(e.to_string()))
    })
}

fn run(cli: &Cli) -> Result<String, CliError> {
    if let Command::Serve { bind } = &cli.command {
        serve(cli, bind)?;
        return Ok(String::new());
    }
    let b = backend(cli)?;
    match &cli.command {
        Command::Serve { .. } => unreachable!("handled above"),
        Command::Register {
            handle,
            credential,
            email,
            contact_handle,
            external_id,
        } => {
            let req = RegisterRequest {
                handle: handle.clone(),
                credential: credential.clone(),
                contact_handle: contact_handle.clone(),
                email: email.clone().unwrap_or_default(),
                external_id: external_id.clone().unwrap_or_default(),
            };
            b.call(Req::post(&["register"]).json(&req), |l| l.svc.register(req.clone()))
        }
        Command::Validate { token } => {
            let req = ValidateRequest { token: token.clone() };
            b.call(Req::post(&["validate"]).json(&req), |l| l.svc.validate(req.clone()))
        }
        Command::Login { handle, credential } => {
            let req = LoginRequest {
                handle: handle.clone(),
                credential: credential.clone(),
            };
            b.call(Req::post(&["login"]).json(&req), |l| l.svc.login(req.clone()))
        }
        Command::Follow { contact } => b.call(Req::post(&["follow", contact]), |l| {
            l.svc.follow(&l.caller()?, contact)
        }),
        Command::Ingest(cmd) => {
            let (kind, file) = match cmd {
                IngestCmd::Posts { file } => ("posts", file),
                IngestCmd::Events { file } => ("events", file),
                IngestCmd::Graph { file } => ("graph", file),
            };
            let body = read_input(file)?;
            let req = Req::post(&["ingest", kind]).body(body.clone());
            match cmd {
                IngestCmd::Posts { .. } => b.call(req, |l| l.svc.ingest_posts(&l.caller()?, &body)),
                IngestCmd::Events { .. } => b.call(req, |l| l.svc.ingest_events(&l.caller()?, &body)),
                IngestCmd::Graph { .. } => b.call(req, |l| l.svc.ingest_graph(&l.caller()?, &body)),
            }
        }
        Command::Search {
            query,
            mode,
            from,
            to,
            friends,
            page,
            as_of,
        } => {
            let q = SearchQuery {
                q: Some(query.join(" ")),
                mode: mode.clone(),
                from: from.clone(),
                to: to.clone(),
                friends: friends.clone(),
                page: page.clone(),
                as_of: as_of.clone(),
            };
            let req = Req::get(&["search"])
                .param("q", q.q.as_ref())
                .param("mode", q.mode.as_ref())
                .param("from", q.from.as_ref())
                .param("to", q.to.as_ref())
                .param("friends", q.friends.as_ref())
                .param("page", q.page.as_ref())
                .param("as_of", q.as_of.as_ref());
            b.call(req, |l| l.svc.search(&l.caller()?, q.clone()))
        }
        Command::Trust(TrustCmd::Set { contact, value }) => {
            let body = TrustValue { value: value.parse().map_err(polidoxa_service::ApiError::from)? };
            b.call(Req::put(&["trust", contact]).json(&body), |l| {
                l.svc.put_trust(&l.caller()?, contact, body.clone())
            })
        }
        Command::Trust(TrustCmd::Get { contact, decay }) => {
            let q = TrustQuery { decay: decay.clone() };
            b.call(Req::get(&["trust", contact]).param("decay", decay.as_ref()), |l| {
                l.svc.get_trust(&l.caller()?, contact, q.clone())
            })
        }
        Command::TopicTrust(TopicTrustCmd::Set { contact, topic, value }) => {
            let body = TrustValue { value: value.parse().map_err(polidoxa_service::ApiError::from)? };
            b.call(Req::put(&["topic-trust", contact, topic]).json(&body), |l| {
                l.svc.put_topic_trust(&l.caller()?, contact, topic, body.clone())
            })
        }
        Command::TopicTrust(TopicTrustCmd::Get { contact, topic }) => {
            b.call(Req::get(&["topic-trust", contact, topic]), |l| {
                l.svc.get_topic_trust(&l.caller()?, contact, topic)
            })
        }
        Command::Experts { topic, threshold } => {
            let q = ExpertsQuery {
                topic: Some(topic.clone()),
                threshold: threshold.clone(),
            };
            let req = Req::get(&["experts"])
                .param("topic", q.topic.as_ref())
                .param("threshold", q.threshold.as_ref());
            b.call(req, |l| l.svc.experts(&l.caller()?, q.clone()))
        }
        Command::Coeff(CoeffCmd::Get) => {
            b.call(Req::get(&["admin", "coefficients"]), |l| l.svc.get_coefficients(&l.caller()?))
        }
        Command::Coeff(CoeffCmd::Set { name, value }) => {
            let patch: CoefficientPatch = [(name.clone(), serde_json::Value::String(value.clone()))].into();
            b.call(Req::put(&["admin", "coefficients"]).json(&patch), |l| {
                l.svc.put_coefficients(&l.caller()?, patch.clone())
            })
        }
        Command::Quarantine(QuarantineCmd::List) => {
            b.call(Req::get(&["quarantine"]), |l| l.svc.quarantine_list(&l.caller()?))
        }
        Command::Quarantine(QuarantineCmd::Found(id)) => {
            let req = id.clone().request();
            b.call(Req::post(&["quarantine", "found"]).json(&req), |l| {
                l.svc.quarantine_found(&l.caller()?, req.clone())
            })
        }
        Command::Quarantine(QuarantineCmd::Submit(id)) => {
            let req = id.clone().request();
            b.call(Req::post(&["quarantine", "submit"]).json(&req), |l| {
                l.svc.quarantine_submit(&l.caller()?, req.clone())
            })
        }
        Command::Quarantine(QuarantineCmd::Approve { candidate }) => {
            b.call(Req::post(&["quarantine", candidate, "approve"]), |l| {
                l.svc.quarantine_approve(&l.caller()?, candidate)
            })
        }
        Command::Quarantine(QuarantineCmd::Flag { candidate }) => {
            b.call(Req::post(&["quarantine", candidate, "flag"]), |l| {
                l.svc.quarantine_flag(&l.caller()?, candidate)
            })
        }
        Command::Forecast { stream } => {
            b.call(Req::get(&["forecast", stream]), |l| l.svc.forecast(&l.caller()?, stream))
        }
        Command::Export { dir } => match &b {
            Backend::Local(l) => Ok(serde_json::to_string(&l.svc.export_to(dir)?).expect("reports serialize")),
            Backend::Remote(_) => Err(CliError::Usage("export needs --data-dir".into())),
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .init();
    match run(&cli) {
        Ok(body) if body.is_empty() => ExitCode::SUCCESS,
        Ok(body) => {
            match cli.output {
                Output::Json => println!("{body}"),
                Output::Table => print!("{}", render::render(&body)),
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("{}", e.to_json());
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
