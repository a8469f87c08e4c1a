//! Timing and detection benchmarks under virtual time.
//!
//! Workflow phases whose real cost depends on the external analysis engine or
//! network are sampled from configured distributions; hashing and
//! recomputation are measured on real bytes. Propagation and confirmation
//! come from the simulated chain's transaction lifecycle.

mod latency;
mod overhead;

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::analyzer::{Analyzer, Corpus, CorpusError, Counts, DetectionMetrics, MetricsError, ReferenceAnalyzer, Ruleset};
use crate::ledger::{ChainConfig, LedgerError, TruncatedNormal};
pub use latency::{run_latency_bench, synthetic_report, LatencyReport};
pub use overhead::{run_overhead_bench, BenchReport};

/// Smallest run count accepted by the benches.
pub const MIN_RUNS: usize = 30;

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("invalid bench config: {0}")]
    Config(String),
    #[error("reading bench config {path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("malformed bench config: {0}")]
    Toml(#[from] toml::de::Error),
    #[error(transparent)]
    Ledger(#[from] LedgerError),
    #[error(transparent)]
    Corpus(#[from] CorpusError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("analysis failed on {target}: {reason}")]
    Analysis { target: String, reason: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LatencyOp {
    Analysis,
    ReportGen,
    Hash,
    TxConstruct,
    TxSign,
    Propagation,
    Confirmation,
    Retrieval,
    Recompute,
}

impl LatencyOp {
    /// Row label used in human and JSON output. Durations are always in ms.
    pub fn row_name(&self) -> &'static str {
        match self {
            LatencyOp::Analysis => "Analysis Execution",
            LatencyOp::ReportGen => "Report Generation",
            LatencyOp::Hash => "SHA-256 Hash Computation",
            LatencyOp::TxConstruct => "Transaction Construction",
            LatencyOp::TxSign => "Transaction Signing",
            LatencyOp::Propagation => "Network Propagation (Fuji)",
            LatencyOp::Confirmation => "Block Confirmation (avg)",
            LatencyOp::Retrieval => "On-chain Hash Retrieval",
            LatencyOp::Recompute => "Local Hash Recomputation",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatencySample {
    pub op: LatencyOp,
    pub duration_ms: f64,
}

/// Mean and sample standard deviation of one operation's durations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OpStats {
    pub op: LatencyOp,
    pub row: String,
    pub mean_ms: f64,
    pub std_ms: f64,
    pub n: usize,
}

impl OpStats {
    pub fn from_samples(op: LatencyOp, samples: &[f64]) -> Self {
        let n = samples.len();
        let mean_ms = if n == 0 { 0.0 } else { samples.iter().sum::<f64>() / n as f64 };
        let std_ms = if n < 2 {
            0.0
        } else {
            (samples.iter().map(|x| (x - mean_ms).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt()
        };
        Self { op, row: op.row_name().to_owned(), mean_ms, std_ms, n }
    }

    pub fn std_error_ms(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            self.std_ms / (self.n as f64).sqrt()
        }
    }
}

/// Analysis and report-generation distributions for one workflow variant.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkflowParams {
    pub analysis_s: TruncatedNormal,
    pub report_gen_ms: TruncatedNormal,
}

/// Client-side costs of the anchoring path, in milliseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnchorLatency {
    pub hash_ms: TruncatedNormal,
    pub tx_construct_ms: TruncatedNormal,
    pub tx_sign_ms: TruncatedNormal,
    pub retrieval_ms: TruncatedNormal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub seed: u64,
    pub runs: usize,
    /// Size of the synthetic report hashed by the latency bench.
    #[serde(default = "default_report_bytes")]
    pub report_bytes: usize,
    pub baseline: WorkflowParams,
    pub augmented: WorkflowParams,
    pub latency: AnchorLatency,
    pub chain: ChainConfig,
}

fn default_report_bytes() -> usize {
    10 * 1024
}

const SHIPPED_BENCH: &str = include_str!("../../../../config/bench.toml");

impl Default for BenchConfig {
    fn default() -> Self {
        Self::from_toml(SHIPPED_BENCH).expect("shipped bench config is valid")
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self, BenchError> {
        let config: BenchConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| BenchError::Io { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    /// Override the bench seed and the chain seed together.
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self.chain.rng_seed = seed;
        self
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        if self.runs < MIN_RUNS {
            return Err(BenchError::Config(format!("runs must be at least {MIN_RUNS}, got {}", self.runs)));
        }
        let dists = [
            ("baseline.analysis_s", &self.baseline.analysis_s),
            ("baseline.report_gen_ms", &self.baseline.report_gen_ms),
            ("augmented.analysis_s", &self.augmented.analysis_s),
            ("augmented.report_gen_ms", &self.augmented.report_gen_ms),
            ("latency.hash_ms", &self.latency.hash_ms),
            ("latency.tx_construct_ms", &self.latency.tx_construct_ms),
            ("latency.tx_sign_ms", &self.latency.tx_sign_ms),
            ("latency.retrieval_ms", &self.latency.retrieval_ms),
        ];
        for (name, d) in dists {
            d.validate().map_err(|m| BenchError::Config(format!("{name}: {m}")))?;
        }
        self.chain.validate()?;
        Ok(())
    }
}

/// Aggregate detection metrics over a corpus, plus per-target counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorpusMetrics {
    pub targets: usize,
    pub metrics: DetectionMetrics,
    pub per_target: Vec<(String, Counts)>,
}

/// Score the reference analyzer over every target in `dir`.
pub fn run_corpus_metrics(dir: &Path, ruleset: &Ruleset) -> Result<CorpusMetrics, BenchError> {
    let corpus = Corpus::load_with_truth(dir)?;
    let analyzer = ReferenceAnalyzer::new(ruleset.clone());
    let mut total = Counts::default();
    let mut per_target = Vec::with_capacity(corpus.entries.len());
    for entry in &corpus.entries {
        let target = &entry.target;
        let findings = analyzer.analyze(target).map_err(|e| BenchError::Analysis {
            target: target.target_id.clone(),
            reason: e.to_string(),
        })?;
        let truth = entry.truth.as_ref().expect("load_with_truth guarantees truth");
        let counts = crate::analyzer::metrics::count_matches(&target.target_id, &findings, truth)?;
        total += counts;
        per_target.push((target.target_id.clone(), counts));
    }
    Ok(CorpusMetrics {
        targets: corpus.entries.len(),
        metrics: DetectionMetrics::from_counts(total),
        per_target,
    })
}

impl fmt::Display for CorpusMetrics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = &self.metrics;
        writeln!(f, "{:<12} {:>10}", "Metric", "Value")?;
        writeln!(f, "{:<12} {:>10}", "Targets", self.targets)?;
        writeln!(f, "{:<12} {:>10}", "TP", m.counts.tp)?;
        writeln!(f, "{:<12} {:>10}", "FP", m.counts.fp)?;
        writeln!(f, "{:<12} {:>10}", "FN", m.counts.fn_)?;
        writeln!(f, "{:<12} {:>10}", "Precision", m.precision.to_string())?;
        writeln!(f, "{:<12} {:>10}", "Recall", m.recall.to_string())?;
        write!(f, "{:<12} {:>10}", "F1", m.f1.to_string())
    }
}
