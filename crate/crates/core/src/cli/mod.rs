//! `anchorscan` command-line interface.
//!
//! Exit codes: 0 success or all intact, 1 usage, config or analysis error,
//! 2 tampered, 3 not logged, 4 unverifiable, 5 ledger submission failure.
//! With `--json` every code path prints exactly one JSON document on stdout.

pub mod config;

use std::fs::File;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use crate::analyzer::{Corpus, ReferenceAnalyzer, Ruleset, TargetFixture};
use crate::bench::{self, BenchConfig};
use crate::coordinator::{self, AnchorState, Store, WorkflowError, WorkflowOptions, WorkflowResult};
use crate::digest::Digest;
use crate::fsutil::write_atomic;
use crate::ledger::rpc::{RpcLedger, tx::Wallet};
use crate::ledger::{AccountId, Ledger, LedgerTx, SimChain, SimLedger, TxId};
use crate::verifier::{self, Verdict, VerdictState, VerifyError};
pub use config::{BackendKind, CliConfig, ConfigError, Overrides};

pub mod exit {
    pub const OK: i32 = 0;
    pub const ERROR: i32 = 1;
    pub const TAMPERED: i32 = super::verifier::exit::TAMPERED;
    pub const NOT_LOGGED: i32 = super::verifier::exit::NOT_LOGGED;
    pub const UNVERIFIABLE: i32 = super::verifier::exit::UNVERIFIABLE;
    pub const LEDGER: i32 = 5;
}

/// Simulator state file inside the store directory.
pub const SIM_STATE_FILE: &str = "ledger-sim.json";
const LOCK_FILE: &str = ".lock";

#[derive(Debug, Parser)]
#[command(name = "anchorscan", version, about = "Vulnerability analysis with ledger-anchored reports")]
pub struct Cli {
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Store directory (overrides config and ANCHORSCAN_STORE).
    #[arg(long, global = true)]
    pub store: Option<PathBuf>,
    /// Ledger backend.
    #[arg(long, global = true, value_enum)]
    pub backend: Option<BackendKind>,
    /// Seed for the simulated chain and the benches.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Print one JSON document instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Analyze targets, anchor each report digest and store the report.
    Scan(ScanArgs),
    /// Check stored reports against the ledger.
    Verify(VerifyArgs),
    /// Anchor a raw digest.
    Log {
        /// 32-byte digest, hex.
        digest: Digest,
    },
    /// Run the overhead and latency benches.
    Bench(BenchArgs),
    /// Score the reference analyzer against a labeled corpus.
    Metrics {
        /// Corpus directory containing targets/ and truth/.
        #[arg(long)]
        corpus: Option<PathBuf>,
    },
    /// Inspect or drive the ledger.
    #[command(subcommand)]
    Ledger(LedgerCommand),
}

#[derive(Debug, Args)]
pub struct ScanArgs {
    /// Target fixture files, or corpus directories containing targets/.
    #[arg(required = true)]
    pub targets: Vec<PathBuf>,
    /// Wait until every anchoring transaction is final (advances the
    /// simulated clock) and record the final state in the index.
    #[arg(long)]
    pub settle: bool,
}

#[derive(Debug, Args)]
#[group(required = true, multiple = false)]
pub struct VerifyArgs {
    /// Report file to verify.
    pub path: Option<PathBuf>,
    /// Verify every report in the store.
    #[arg(long)]
    pub all: bool,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Bench config file; defaults to the config's `bench` entry, then the
    /// built-in parameters.
    #[arg(long = "bench-config")]
    pub bench_config: Option<PathBuf>,
    /// Number of workflow runs (at least 30).
    #[arg(long)]
    pub runs: Option<usize>,
    /// Skip the latency bench.
    #[arg(long)]
    pub overhead_only: bool,
}

#[derive(Debug, Subcommand)]
pub enum LedgerCommand {
    /// Print the stored entry for a digest.
    Inspect { digest: Digest },
    /// Print the state of a transaction.
    Tx { tx_id: TxId },
    /// Print backend status.
    Status,
    /// Simulator only: run until every transaction is final.
    Settle,
    /// Simulator only: advance the virtual clock.
    Advance {
        /// Milliseconds.
        ms: u64,
    },
}

/// A command failure with its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub details: Option<Value>,
}

impl CliError {
    fn new(code: i32, kind: &'static str, message: impl std::fmt::Display) -> Self {
        Self { code, kind, message: message.to_string(), details: None }
    }

    fn usage(message: impl std::fmt::Display) -> Self {
        Self::new(exit::ERROR, "usage", message)
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::new(exit::ERROR, "config", e)
    }
}

/// Result of a command: exit code, JSON body and text rendering.
#[derive(Debug)]
pub struct Output {
    pub code: i32,
    pub json: Value,
    pub text: String,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Self { code: exit::OK, json, text }
    }
}

/// Parse `args`, run the command and print its output. Returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let json = args.iter().skip(1).any(|a| a == "--json");
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return exit::OK;
            }
            if json {
                let err = CliError::usage(e.render().to_string().trim_end());
                println!("{}", error_json(&err));
            } else {
                eprint!("{}", e.render());
            }
            return exit::ERROR;
        }
    };
    let json = cli.json;
    match execute(&cli) {
        Ok(out) => {
            if json {
                let mut body = out.json;
                if let Value::Object(m) = &mut body {
                    m.insert("ok".into(), Value::Bool(out.code == exit::OK));
                    m.insert("exit_code".into(), out.code.into());
                }
                println!("{body}");
            } else if !out.text.is_empty() {
                println!("{}", out.text);
            }
            out.code
        }
        Err(err) => {
            if json {
                println!("{}", error_json(&err));
            } else {
                eprintln!("error: {}", err.message);
            }
            err.code
        }
    }
}

fn error_json(err: &CliError) -> Value {
    let mut e = json!({ "kind": err.kind, "message": err.message });
    if let Some(d) = &err.details {
        e["details"] = d.clone();
    }
    json!({ "ok": false, "exit_code": err.code, "error": e })
}

pub fn execute(cli: &Cli) -> Result<Output, CliError> {
    let overrides = Overrides { store: cli.store.clone(), backend: cli.backend, seed: cli.seed };
    let config = CliConfig::load(cli.config.as_deref(), &overrides)?;
    match &cli.command {
        Command::Scan(args) => cmd_scan(&config, args),
        Command::Verify(args) => cmd_verify(&config, args),
        Command::Log { digest } => cmd_log(&config, digest),
        Command::Bench(args) => cmd_bench(&config, args, cli.seed),
        Command::Metrics { corpus } => cmd_metrics(&config, corpus.as_deref()),
        Command::Ledger(sub) => cmd_ledger(&config, sub),
    }
}

/// Exclusive advisory lock on the store, held for the life of the value.
struct StoreLock(#[allow(dead_code)] Option<File>);

fn lock_store(root: &Path, create: bool) -> Result<StoreLock, CliError> {
    if !root.is_dir() {
        if !create {
            return Ok(StoreLock(None));
        }
        std::fs::create_dir_all(root).map_err(|e| CliError::new(exit::ERROR, "store", e))?;
    }
    let path = root.join(LOCK_FILE);
    let file = File::options()
        .create(true)
        .truncate(false)
        .write(true)
        .open(&path)
        .map_err(|e| CliError::new(exit::ERROR, "store", format!("{}: {e}", path.display())))?;
    file.lock().map_err(|e| CliError::new(exit::ERROR, "store", format!("locking {}: {e}", path.display())))?;
    Ok(StoreLock(Some(file)))
}

enum Backend {
    Sim { ledger: SimLedger, state: PathBuf },
    Rpc(RpcLedger),
}

impl Backend {
    fn open(config: &CliConfig) -> Result<Self, CliError> {
        match config.backend {
            BackendKind::Sim => {
                let state = config.store.join(SIM_STATE_FILE);
                let chain = match std::fs::read(&state) {
                    Ok(bytes) => serde_json::from_slice::<SimChain>(&bytes).map_err(|e| {
                        CliError::new(exit::ERROR, "ledger", format!("{}: {e}", state.display()))
                    })?,
                    Err(e) if e.kind() == std::io::ErrorKind::NotFound => SimChain::new(config.chain.clone())
                        .map_err(|e| CliError::new(exit::ERROR, "config", e))?,
                    Err(e) => return Err(CliError::new(exit::ERROR, "ledger", format!("{}: {e}", state.display()))),
                };
                Ok(Backend::Sim { ledger: SimLedger::from_chain(chain), state })
            }
            BackendKind::Rpc => {
                let rpc = config.rpc.as_ref().expect("rpc settings resolved with the backend");
                let key = std::env::var(&rpc.private_key_env).map_err(|_| {
                    CliError::new(exit::ERROR, "config", format!("rpc backend needs a signing key in ${}", rpc.private_key_env))
                })?;
                let wallet = Wallet::from_hex(&key).map_err(|e| CliError::new(exit::ERROR, "config", e))?;
                let ledger =
                    RpcLedger::new(rpc.config.clone(), wallet).map_err(|e| CliError::new(exit::ERROR, "config", e))?;
                Ok(Backend::Rpc(ledger))
            }
        }
    }

    fn ledger(&self) -> &dyn Ledger {
        match self {
            Backend::Sim { ledger, .. } => ledger,
            Backend::Rpc(l) => l,
        }
    }

    fn auditor(&self, config: &CliConfig) -> AccountId {
        match (config.auditor, self) {
            (Some(a), _) => a,
            (None, Backend::Rpc(l)) => l.address(),
            (None, Backend::Sim { .. }) => config::DEFAULT_AUDITOR,
        }
    }

    fn sim(&self) -> Result<&SimLedger, CliError> {
        match self {
            Backend::Sim { ledger, .. } => Ok(ledger),
            Backend::Rpc(_) => Err(CliError::usage("this command needs the sim backend")),
        }
    }

    fn save(&self) -> Result<(), CliError> {
        if let Backend::Sim { ledger, state } = self {
            let bytes = serde_json::to_vec(&*ledger.read()).expect("chain serializes");
            write_atomic(state, &bytes)
                .map_err(|e| CliError::new(exit::ERROR, "ledger", format!("{}: {e}", state.display())))?;
        }
        Ok(())
    }

    /// Drive `tx_id` to a final state: advance the simulator, or poll the node.
    fn await_final(&self, tx_id: &TxId) -> Result<LedgerTx, CliError> {
        let ledger_err = |e| CliError::new(exit::LEDGER, "ledger", e);
        match self {
            Backend::Sim { ledger, .. } => ledger.await_final(tx_id).map_err(ledger_err),
            Backend::Rpc(l) => {
                let deadline = Instant::now() + Duration::from_secs(120);
                loop {
                    let tx = l.tx(tx_id).map_err(ledger_err)?;
                    if tx.status.is_final() || Instant::now() > deadline {
                        return Ok(tx);
                    }
                    std::thread::sleep(Duration::from_secs(2));
                }
            }
        }
    }
}

fn load_ruleset(config: &CliConfig) -> Result<Ruleset, CliError> {
    match &config.ruleset {
        Some(p) => Ruleset::load(p).map_err(|e| CliError::new(exit::ERROR, "config", e)),
        None => Ok(Ruleset::default()),
    }
}

fn load_targets(paths: &[PathBuf]) -> Result<Vec<(PathBuf, TargetFixture)>, CliError> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() {
            let corpus = Corpus::load(p).map_err(|e| CliError::new(exit::ERROR, "fixture", e))?;
            out.extend(corpus.entries.into_iter().map(|e| (e.path, e.target)));
        } else {
            let bytes = std::fs::read(p)
                .map_err(|e| CliError::new(exit::ERROR, "fixture", format!("{}: {e}", p.display())))?;
            let target = TargetFixture::from_json(&bytes)
                .map_err(|e| CliError::new(exit::ERROR, "fixture", format!("{}: {e}", p.display())))?;
            out.push((p.clone(), target));
        }
    }
    Ok(out)
}

fn status_str(tx: Option<&LedgerTx>) -> String {
    tx.map(|t| t.status.to_string()).unwrap_or_else(|| "not submitted".into())
}

fn scan_json(r: &WorkflowResult) -> Value {
    let note = match &r.anchor {
        AnchorState::Submitted => Value::Null,
        AnchorState::AlreadyAnchored { .. } => "already anchored".into(),
        AnchorState::SubmitFailed { error } => format!("anchoring failed: {error}").into(),
    };
    json!({
        "target": r.report.target_ref,
        "report_id": r.report.report_id,
        "digest": r.digest,
        "report_path": r.report_path,
        "findings": r.report.findings.len(),
        "tx": r.tx,
        "anchor": r.anchor,
        "note": note,
        "started_at": r.started_at,
        "completed_at": r.completed_at,
    })
}

fn scan_text(r: &WorkflowResult) -> String {
    let mut s = format!(
        "{}\n  report:  {}\n  digest:  {}\n  tx:      {} ({})",
        r.report.target_ref,
        r.report_path.display(),
        r.digest,
        r.tx.as_ref().map(|t| t.tx_id.to_string()).unwrap_or_else(|| "-".into()),
        status_str(r.tx.as_ref()),
    );
    match &r.anchor {
        AnchorState::Submitted => {}
        AnchorState::AlreadyAnchored { entry } => {
            s.push_str("\n  note:    already anchored");
            if let Some(e) = entry {
                s.push_str(&format!(" by {} at {}", e.auditor, e.timestamp));
            }
        }
        AnchorState::SubmitFailed { error } => s.push_str(&format!("\n  note:    anchoring failed: {error}")),
    }
    s
}

fn cmd_scan(config: &CliConfig, args: &ScanArgs) -> Result<Output, CliError> {
    let targets = load_targets(&args.targets)?;
    let analyzer = ReferenceAnalyzer::new(load_ruleset(config)?);
    let _lock = lock_store(&config.store, true)?;
    let backend = Backend::open(config)?;
    let store = Store::open(&config.store).map_err(|e| CliError::new(exit::ERROR, "store", e))?;
    let options = WorkflowOptions::new(backend.auditor(config));

    let mut results = Vec::new();
    let mut failure = None;
    for (_, target) in &targets {
        match coordinator::run_workflow(target, &analyzer, backend.ledger(), &store, &options) {
            Ok(r) => results.push(r),
            Err(e) => {
                let code = match e {
                    WorkflowError::Ledger { .. } | WorkflowError::Reverted { .. } => exit::LEDGER,
                    _ => exit::ERROR,
                };
                if let Some(r) = e.result() {
                    results.push(r.clone());
                }
                let kind = if code == exit::LEDGER { "ledger" } else { "analysis" };
                failure = Some(CliError::new(code, kind, format!("{}: {e}", target.target_id)));
                break;
            }
        }
    }

    if args.settle && failure.is_none() {
        for r in &mut results {
            if let Some(tx) = &r.tx {
                if !tx.status.is_final() {
                    let done = backend.await_final(&tx.tx_id)?;
                    store
                        .update_tx(&r.report.report_id, done.clone())
                        .map_err(|e| CliError::new(exit::ERROR, "store", e))?;
                    r.tx = Some(done);
                }
            }
        }
    }
    backend.save()?;

    if let Some(mut err) = failure {
        err.details = Some(json!({ "results": results.iter().map(scan_json).collect::<Vec<_>>() }));
        return Err(err);
    }
    let text = results.iter().map(scan_text).collect::<Vec<_>>().join("\n");
    Ok(Output::ok(json!({ "command": "scan", "results": results.iter().map(scan_json).collect::<Vec<_>>() }), text))
}

fn verdict_text(label: &str, v: &Result<Verdict, VerifyError>) -> String {
    match v {
        Ok(v) => match &v.state {
            VerdictState::Intact { digest, entry } => {
                format!("{label}: intact {digest} (logged by {} at {})", entry.auditor, entry.timestamp)
            }
            VerdictState::Tampered { expected, actual, reason } => format!(
                "{label}: TAMPERED\n  expected: {}\n  actual:   {actual}\n  reason:   {reason}",
                expected.map(|d| d.to_string()).unwrap_or_else(|| "-".into())
            ),
            VerdictState::NotLogged { digest } => format!("{label}: not logged {digest}"),
        },
        Err(e) => format!("{label}: {e}"),
    }
}

fn verdict_json(v: &Result<Verdict, VerifyError>) -> Value {
    match v {
        Ok(v) => serde_json::to_value(v).expect("verdict serializes"),
        Err(e) => json!({ "state": "unverifiable", "error": e.to_string() }),
    }
}

fn cmd_verify(config: &CliConfig, args: &VerifyArgs) -> Result<Output, CliError> {
    let _lock = lock_store(&config.store, false)?;
    let backend = Backend::open(config)?;
    let store = Store::at(&config.store);
    let ledger = backend.ledger();

    let outcomes: Vec<(String, Result<Verdict, VerifyError>)> = if args.all {
        verifier::verify_store(&store, ledger)
            .map_err(|e| CliError::new(exit::ERROR, "store", e))?
            .into_iter()
            .map(|(id, v)| (id.to_string(), v))
            .collect()
    } else {
        let path = args.path.as_ref().expect("clap requires path or --all");
        let expected = expected_digest(&store, path).map_err(|e| CliError::new(exit::ERROR, "store", e))?;
        vec![(path.display().to_string(), verifier::verify_file(path, expected.as_ref(), ledger))]
    };
    let code = verifier::exit_code(outcomes.iter().map(|(_, v)| v));
    let text = outcomes.iter().map(|(l, v)| verdict_text(l, v)).collect::<Vec<_>>().join("\n");
    let verdicts: Vec<Value> = outcomes
        .iter()
        .map(|(label, v)| {
            let mut j = verdict_json(v);
            j["subject"] = label.clone().into();
            j
        })
        .collect();
    Ok(Output { code, json: json!({ "command": "verify", "verdicts": verdicts }), text })
}

/// Digest the index recorded for `path`, when `path` is a file in the store.
fn expected_digest(store: &Store, path: &Path) -> Result<Option<Digest>, coordinator::StoreError> {
    let (Ok(file), Ok(root)) = (path.canonicalize(), store.root().canonicalize()) else {
        return Ok(None);
    };
    if file.parent() != Some(root.as_path()) {
        return Ok(None);
    }
    let name = file.file_name().map(|n| n.to_string_lossy().into_owned());
    Ok(store.index()?.into_values().find(|e| Some(&e.file) == name.as_ref()).map(|e| e.digest))
}

fn tx_text(tx: &LedgerTx) -> String {
    let ms = |v: Option<u64>| v.map(|v| v.to_string()).unwrap_or_else(|| "-".into());
    format!(
        "tx {}\n  payload:    {}\n  auditor:    {}\n  status:     {}\n  submitted:  {}\n  propagated: {}\n  confirmed:  {}",
        tx.tx_id,
        tx.payload_hash,
        tx.auditor,
        tx.status,
        ms(tx.submitted_at),
        ms(tx.propagated_at),
        ms(tx.confirmed_at)
    )
}

fn cmd_log(config: &CliConfig, digest: &Digest) -> Result<Output, CliError> {
    let _lock = lock_store(&config.store, true)?;
    let backend = Backend::open(config)?;
    let ledger = backend.ledger();
    let outcome = ledger
        .submit_log(digest, &backend.auditor(config))
        .and_then(|tx| if tx.status.is_final() { Ok(tx) } else { ledger.await_propagation(&tx.tx_id) });
    backend.save()?;
    let tx = outcome.map_err(|e| CliError::new(exit::LEDGER, "ledger", e))?;
    if let crate::ledger::TxStatus::Reverted { reason } = &tx.status {
        let mut err = CliError::new(exit::LEDGER, "reverted", reason);
        err.details = Some(json!({ "tx": tx }));
        return Err(err);
    }
    Ok(Output::ok(json!({ "command": "log", "tx": tx }), tx_text(&tx)))
}

fn cmd_bench(config: &CliConfig, args: &BenchArgs, seed: Option<u64>) -> Result<Output, CliError> {
    let bench_err = |e| CliError::new(exit::ERROR, "bench", e);
    let mut bench_config = match args.bench_config.as_ref().or(config.bench.as_ref()) {
        Some(p) => BenchConfig::load(p).map_err(bench_err)?,
        None => BenchConfig::default(),
    };
    if let Some(s) = seed {
        bench_config = bench_config.with_seed(s);
    }
    if let Some(n) = args.runs {
        bench_config.runs = n;
    }
    let overhead = bench::run_overhead_bench(&bench_config).map_err(bench_err)?;
    let mut text = overhead.to_string();
    let latency = if args.overhead_only {
        None
    } else {
        let l = bench::run_latency_bench(&bench_config, bench_config.runs).map_err(bench_err)?;
        text.push_str("\n\n");
        text.push_str(&l.to_string());
        Some(l)
    };
    Ok(Output::ok(json!({ "command": "bench", "overhead": overhead, "latency": latency }), text))
}

fn cmd_metrics(config: &CliConfig, corpus: Option<&Path>) -> Result<Output, CliError> {
    let dir = corpus.unwrap_or(&config.corpus);
    let m = bench::run_corpus_metrics(dir, &load_ruleset(config)?)
        .map_err(|e| CliError::new(exit::ERROR, "metrics", e))?;
    let json = json!({
        "command": "metrics",
        "targets": m.targets,
        "tp": m.metrics.counts.tp,
        "fp": m.metrics.counts.fp,
        "fn": m.metrics.counts.fn_,
        "precision": m.metrics.precision.to_string(),
        "recall": m.metrics.recall.to_string(),
        "f1": m.metrics.f1.to_string(),
    });
    Ok(Output::ok(json, m.to_string()))
}

fn refresh_index(store: &Store, ledger: &dyn Ledger) -> Result<(), CliError> {
    let store_err = |e| CliError::new(exit::ERROR, "store", e);
    if !store.root().is_dir() {
        return Ok(());
    }
    for (id, entry) in store.index().map_err(store_err)? {
        if let Some(tx_id) = entry.tx_id {
            if let Ok(tx) = ledger.tx(&tx_id) {
                store.update_tx(&id, tx).map_err(store_err)?;
            }
        }
    }
    Ok(())
}

fn cmd_ledger(config: &CliConfig, sub: &LedgerCommand) -> Result<Output, CliError> {
    let mutating = matches!(sub, LedgerCommand::Settle | LedgerCommand::Advance { .. });
    let _lock = lock_store(&config.store, mutating)?;
    let backend = Backend::open(config)?;
    let ledger = backend.ledger();
    let ledger_err = |e| CliError::new(exit::LEDGER, "ledger", e);
    match sub {
        LedgerCommand::Inspect { digest } => match ledger.get_log(digest) {
            Ok(Some(entry)) => {
                let text = format!(
                    "hash:      {}\ntimestamp: {}\nauditor:   {}\nverified:  {}",
                    entry.report_hash, entry.timestamp, entry.auditor, entry.verified
                );
                Ok(Output::ok(json!({ "command": "ledger inspect", "entry": entry }), text))
            }
            Ok(None) => Ok(Output {
                code: exit::NOT_LOGGED,
                json: json!({ "command": "ledger inspect", "entry": null, "digest": digest }),
                text: format!("{digest}: not logged"),
            }),
            Err(e) => Err(CliError::new(exit::UNVERIFIABLE, "ledger", e)),
        },
        LedgerCommand::Tx { tx_id } => match ledger.tx(tx_id) {
            Ok(tx) => Ok(Output::ok(json!({ "command": "ledger tx", "tx": tx }), tx_text(&tx))),
            Err(crate::ledger::LedgerError::UnknownTx(_)) => Ok(Output {
                code: exit::NOT_LOGGED,
                json: json!({ "command": "ledger tx", "tx": null, "tx_id": tx_id }),
                text: format!("{tx_id}: unknown transaction"),
            }),
            Err(e) => Err(ledger_err(e)),
        },
        LedgerCommand::Status => match &backend {
            Backend::Sim { ledger, state } => {
                let chain = ledger.read();
                let json = json!({
                    "command": "ledger status",
                    "backend": "sim",
                    "state_file": state,
                    "clock_ms": chain.now_ms(),
                    "entries": chain.contract().len(),
                    "events": chain.contract().events().len(),
                    "transactions": chain.txs().count(),
                    "in_flight": chain.in_flight(),
                    "config": chain.config(),
                });
                let text = format!(
                    "backend: sim\nclock:   {} ms\nentries: {}\ntxs:     {} ({} in flight)",
                    chain.now_ms(),
                    chain.contract().len(),
                    chain.txs().count(),
                    chain.in_flight()
                );
                Ok(Output::ok(json, text))
            }
            Backend::Rpc(l) => {
                let rpc = &config.rpc.as_ref().expect("rpc settings").config;
                let json = json!({
                    "command": "ledger status",
                    "backend": "rpc",
                    "url": rpc.url,
                    "chain_id": rpc.chain_id,
                    "contract": rpc.contract,
                    "signer": l.address(),
                });
                let text = format!("backend: rpc\nurl:      {}\ncontract: {}\nsigner:   {}", rpc.url, rpc.contract, l.address());
                Ok(Output::ok(json, text))
            }
        },
        LedgerCommand::Settle | LedgerCommand::Advance { .. } => {
            let sim = backend.sim()?;
            let events = match sub {
                LedgerCommand::Advance { ms } => sim.advance_time(*ms),
                _ => sim.settle(),
            };
            backend.save()?;
            refresh_index(&Store::at(&config.store), ledger)?;
            let text = format!("{} events, clock {} ms", events.len(), sim.now_ms());
            Ok(Output::ok(json!({ "command": "ledger", "events": events, "clock_ms": sim.now_ms() }), text))
        }
    }
}
