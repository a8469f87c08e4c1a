use std::fmt;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BenchConfig, BenchError, LatencyOp, OpStats, MIN_RUNS};
use crate::digest::Digest;
use crate::ledger::{AccountId, Ledger, SimLedger};
use crate::report::{
    self, AnalysisReport, AnalyzerMeta, Finding, Phase, PhaseArtifact, ReportId, VulnClass, SCHEMA_VERSION,
};

/// Per-operation latency statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatencyReport {
    pub seed: u64,
    pub n: usize,
    pub report_bytes: usize,
    pub ops: Vec<OpStats>,
}

impl LatencyReport {
    pub fn op(&self, op: LatencyOp) -> Option<&OpStats> {
        self.ops.iter().find(|s| s.op == op)
    }
}

/// A valid report whose canonical encoding is at least `min_bytes` long
/// (padding goes into one finding's remediation text).
pub fn synthetic_report(min_bytes: usize) -> AnalysisReport {
    let mut r = AnalysisReport {
        report_id: ReportId::from_bytes([0x5a; 16]),
        target_ref: "synthetic".into(),
        phase_artifacts: Phase::ALL
            .iter()
            .map(|&phase| PhaseArtifact {
                phase,
                artifact_digest: Digest::of(format!("{phase:?}").as_bytes()),
                summary: format!("{phase:?}"),
            })
            .collect(),
        findings: vec![Finding {
            vuln_class: VulnClass::Other,
            location: "/".into(),
            severity: 0,
            confidence: 0,
            remediation: String::new(),
        }],
        analyzer_meta: AnalyzerMeta { name: "synthetic".into(), version: "0".into(), temperature: 0 },
        created_at: 1,
        schema_version: SCHEMA_VERSION,
    };
    let base = report::canonicalize(&r).expect("valid").len();
    r.findings[0].remediation = "x".repeat(min_bytes.saturating_sub(base));
    r
}

fn time_ms(f: impl FnOnce()) -> f64 {
    let t = Instant::now();
    f();
    t.elapsed().as_secs_f64() * 1e3
}

/// Measure hashing on a synthetic report of `config.report_bytes` and sample
/// the remaining operations.
///
/// - Hash: canonicalize and hash the report (real time).
/// - Recompute: hash the already-serialized bytes (real time).
/// - Transaction construction, signing and retrieval: sampled.
/// - Propagation and confirmation: from the simulated chain's lifecycle.
pub fn run_latency_bench(config: &BenchConfig, n: usize) -> Result<LatencyReport, BenchError> {
    config.validate()?;
    if n < MIN_RUNS {
        return Err(BenchError::Config(format!("n must be at least {MIN_RUNS}, got {n}")));
    }
    let report = synthetic_report(config.report_bytes);
    let bytes = report::canonicalize(&report).expect("synthetic report is valid");
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x006c_6174_656e_6379);
    let ledger = SimLedger::new(config.chain.clone())?;
    let auditor = AccountId([0xbe; 20]);

    let mut hash = Vec::with_capacity(n);
    let mut recompute = Vec::with_capacity(n);
    let mut construct = Vec::with_capacity(n);
    let mut sign = Vec::with_capacity(n);
    let mut retrieval = Vec::with_capacity(n);
    let mut tx_ids = Vec::with_capacity(n);
    for i in 0..n {
        hash.push(time_ms(|| {
            std::hint::black_box(report::hash_report(std::hint::black_box(&report)).expect("valid"));
        }));
        recompute.push(time_ms(|| {
            std::hint::black_box(Digest::of(std::hint::black_box(&bytes)));
        }));
        construct.push(config.latency.tx_construct_ms.sample(&mut rng));
        sign.push(config.latency.tx_sign_ms.sample(&mut rng));
        retrieval.push(config.latency.retrieval_ms.sample(&mut rng));
        let payload = Digest::of(&[bytes.as_slice(), &(i as u64).to_le_bytes()].concat());
        // Settle each sample so it never waits behind its predecessor's nonce.
        tx_ids.push(ledger.submit_log(&payload, &auditor)?.tx_id);
        ledger.settle();
    }

    let (mut propagation, mut confirmation) = (Vec::with_capacity(n), Vec::with_capacity(n));
    for id in &tx_ids {
        let tx = ledger.tx(id)?;
        let (s, p, c) = (tx.submitted_at, tx.propagated_at, tx.confirmed_at);
        if let (Some(s), Some(p)) = (s, p) {
            propagation.push((p - s) as f64);
        }
        if let (Some(p), Some(c)) = (p, c) {
            confirmation.push((c - p) as f64);
        }
    }

    Ok(LatencyReport {
        seed: config.seed,
        n,
        report_bytes: bytes.len(),
        ops: vec![
            OpStats::from_samples(LatencyOp::Hash, &hash),
            OpStats::from_samples(LatencyOp::TxConstruct, &construct),
            OpStats::from_samples(LatencyOp::TxSign, &sign),
            OpStats::from_samples(LatencyOp::Propagation, &propagation),
            OpStats::from_samples(LatencyOp::Confirmation, &confirmation),
            OpStats::from_samples(LatencyOp::Recompute, &recompute),
            OpStats::from_samples(LatencyOp::Retrieval, &retrieval),
        ],
    })
}

impl fmt::Display for LatencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{:<32} {:>22}", "Operation", "Latency (ms)")?;
        for s in &self.ops {
            let digits = if s.mean_ms < 1.0 { 4 } else if s.mean_ms < 100.0 { 2 } else { 0 };
            writeln!(f, "{:<32} {:>22}", s.row, format!("{:.digits$} ± {:.digits$}", s.mean_ms, s.std_ms))?;
        }
        write!(f, "n: {}, report bytes: {}, seed: {}", self.n, self.report_bytes, self.seed)
    }
}
