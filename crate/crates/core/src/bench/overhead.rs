use std::fmt;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest as _, Sha256};

use super::{BenchConfig, BenchError, LatencyOp, OpStats, MIN_RUNS};
use crate::digest::Digest;
use crate::ledger::sampling::sample_paired;
use crate::ledger::{AccountId, Ledger, SimLedger};

const BENCH_AUDITOR: AccountId = AccountId([0xbe; 20]);

/// Baseline vs. integrity-augmented workflow timing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub seed: u64,
    pub runs: usize,
    pub baseline: Vec<OpStats>,
    pub augmented: Vec<OpStats>,
    pub baseline_total_s: f64,
    pub augmented_total_s: f64,
    /// `(augmented_total_s - baseline_total_s) / baseline_total_s * 100`.
    pub overhead_pct: f64,
}

impl BenchReport {
    pub fn op(&self, op: LatencyOp) -> Option<&OpStats> {
        self.augmented.iter().find(|s| s.op == op)
    }
}

pub(super) fn overhead_pct(baseline: f64, augmented: f64) -> f64 {
    (augmented - baseline) / baseline * 100.0
}

fn payload(seed: u64, run: usize) -> Digest {
    let mut h = Sha256::new();
    h.update(b"anchorscan/bench-payload/v1");
    h.update(seed.to_le_bytes());
    h.update((run as u64).to_le_bytes());
    Digest::from_bytes(h.finalize().into())
}

/// Simulate `config.runs` baseline and augmented workflows.
///
/// Each run draws one standard score for analysis time and one for report
/// generation, shared by the baseline and augmented variants. The augmented
/// workflow adds hashing, transaction construction and signing, then submits
/// to a simulated chain and completes when the transaction propagates.
/// Confirmation latency is recorded but not part of the total.
pub fn run_overhead_bench(config: &BenchConfig) -> Result<BenchReport, BenchError> {
    config.validate()?;
    let n = config.runs;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ledger = SimLedger::new(config.chain.clone())?;
    let lat = &config.latency;

    let mut samples: [Vec<f64>; 9] = Default::default();
    let col = |op: LatencyOp| op as usize;
    let (mut base_analysis, mut base_report) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let (mut base_total, mut aug_total) = (Vec::with_capacity(n), Vec::with_capacity(n));
    let mut tx_ids = Vec::with_capacity(n);

    for run in 0..n {
        let (ab, aa) = sample_paired(&config.baseline.analysis_s, &config.augmented.analysis_s, &mut rng);
        let (rb, ra) = sample_paired(&config.baseline.report_gen_ms, &config.augmented.report_gen_ms, &mut rng);
        let hash = lat.hash_ms.sample(&mut rng);
        let construct = lat.tx_construct_ms.sample(&mut rng);
        let sign = lat.tx_sign_ms.sample(&mut rng);

        let (ab, aa) = (ab * 1_000.0, aa * 1_000.0);
        base_analysis.push(ab);
        base_report.push(rb);
        base_total.push(ab + rb);

        let pre_submit = aa + ra + hash + construct + sign;
        ledger.advance_time(pre_submit.round() as u64);
        let tx = ledger.submit_log(&payload(config.seed, run), &BENCH_AUDITOR)?;
        let tx = ledger.await_propagation(&tx.tx_id)?;
        let propagation = (tx.propagated_at.unwrap_or_default() - tx.submitted_at.unwrap_or_default()) as f64;
        tx_ids.push(tx.tx_id);

        samples[col(LatencyOp::Analysis)].push(aa);
        samples[col(LatencyOp::ReportGen)].push(ra);
        samples[col(LatencyOp::Hash)].push(hash);
        samples[col(LatencyOp::TxConstruct)].push(construct);
        samples[col(LatencyOp::TxSign)].push(sign);
        samples[col(LatencyOp::Propagation)].push(propagation);
        aug_total.push(pre_submit + propagation);
    }

    ledger.settle();
    for id in &tx_ids {
        let tx = ledger.tx(id)?;
        if let (Some(p), Some(c)) = (tx.propagated_at, tx.confirmed_at) {
            samples[col(LatencyOp::Confirmation)].push((c - p) as f64);
        }
    }

    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    let baseline_total_s = mean(&base_total) / 1_000.0;
    let augmented_total_s = mean(&aug_total) / 1_000.0;
    let augmented = [
        LatencyOp::Analysis,
        LatencyOp::ReportGen,
        LatencyOp::Hash,
        LatencyOp::TxConstruct,
        LatencyOp::TxSign,
        LatencyOp::Propagation,
        LatencyOp::Confirmation,
    ]
    .into_iter()
    .map(|op| OpStats::from_samples(op, &samples[col(op)]))
    .collect();

    debug_assert!(n >= MIN_RUNS);
    Ok(BenchReport {
        seed: config.seed,
        runs: n,
        baseline: vec![
            OpStats::from_samples(LatencyOp::Analysis, &base_analysis),
            OpStats::from_samples(LatencyOp::ReportGen, &base_report),
        ],
        augmented,
        baseline_total_s,
        augmented_total_s,
        overhead_pct: overhead_pct(baseline_total_s, augmented_total_s),
    })
}

fn row(f: &mut fmt::Formatter<'_>, name: &str, base: &str, aug: &str) -> fmt::Result {
    writeln!(f, "{name:<32} {base:>18} {aug:>18}")
}

fn pm(s: &OpStats, scale: f64, digits: usize) -> String {
    format!("{:.digits$} ± {:.digits$}", s.mean_ms / scale, s.std_ms / scale)
}

impl fmt::Display for BenchReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        row(f, "Metric", "Baseline", "Augmented")?;
        let find = |v: &[OpStats], op| v.iter().find(|s| s.op == op).cloned();
        for (op, label, scale, digits) in [
            (LatencyOp::Analysis, "Analysis Execution (s)", 1_000.0, 2),
            (LatencyOp::ReportGen, "Report Generation (ms)", 1.0, 1),
        ] {
            let b = find(&self.baseline, op).map(|s| pm(&s, scale, digits)).unwrap_or_default();
            let a = find(&self.augmented, op).map(|s| pm(&s, scale, digits)).unwrap_or_default();
            row(f, label, &b, &a)?;
        }
        row(f, "Total Workflow Time (s)", &format!("{:.2}", self.baseline_total_s), &format!("{:.2}", self.augmented_total_s))?;
        row(f, "Overhead (%)", "--", &format!("{:.1}", self.overhead_pct))?;
        writeln!(f)?;
        writeln!(f, "{:<32} {:>18}", "Operation", "Latency (ms)")?;
        for s in &self.augmented {
            if matches!(s.op, LatencyOp::Analysis | LatencyOp::ReportGen) {
                continue;
            }
            let digits = if s.mean_ms < 100.0 { 2 } else { 0 };
            writeln!(f, "{:<32} {:>18}", s.row, pm(s, 1.0, digits))?;
        }
        write!(f, "runs: {}, seed: {}", self.runs, self.seed)
    }
}
