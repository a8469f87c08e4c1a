mod support;

use std::collections::BTreeSet;

use anchorscan::analyzer::{
    Analyzer, Corpus, Endpoint, Op, ReferenceAnalyzer, Signal, TargetFixture, TargetKind,
};
use anchorscan::coordinator::{run_workflow, RetryPolicy, Store, WorkflowOptions};
use anchorscan::digest::Digest;
use anchorscan::ledger::{AccountId, ChainConfig, Ledger, SimChain, TxStatus};
use anchorscan::report::{self, VulnClass};
use anchorscan::verifier;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde_json::Value;
use support::{bank_target, repo_root};

const ALICE: AccountId = AccountId([0xa1; 20]);
const BOB: AccountId = AccountId([0xb0; 20]);

fn golden() -> Vec<u8> {
    std::fs::read(repo_root().join("fixtures/reports/contract-000-bank.report.json")).unwrap()
}

/// Serialize `v` as pretty-ish JSON with object keys in a seeded random order.
fn shuffled_json(v: &Value, rng: &mut rand_chacha::ChaCha8Rng) -> String {
    match v {
        Value::Object(m) => {
            let mut keys: Vec<&String> = m.keys().collect();
            keys.shuffle(rng);
            let parts: Vec<String> = keys
                .into_iter()
                .map(|k| format!("{}: {}", Value::String(k.clone()), shuffled_json(&m[k], rng)))
                .collect();
            format!("{{ {} }}", parts.join(",\n "))
        }
        Value::Array(a) => format!("[{}]", a.iter().map(|x| shuffled_json(x, rng)).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    /// Key order and whitespace in the input never change the digest.
    #[test]
    fn canonical_form_ignores_construction_order(seed in any::<u64>()) {
        let bytes = golden();
        let value: Value = serde_json::from_slice(&bytes).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let text = shuffled_json(&value, &mut rng);
        let parsed = report::parse(text.as_bytes()).unwrap();
        prop_assert_eq!(report::canonicalize(&parsed).unwrap(), bytes.clone());
        prop_assert_eq!(report::hash_report(&parsed).unwrap(), Digest::of(&bytes));
    }

    /// Any single-byte change to a stored report is never verified intact.
    #[test]
    fn single_byte_mutation_never_verifies(pos in 0usize..1_000_000, xor in 1u8..=255) {
        let bytes = golden();
        let ledger = anchorscan::ledger::SimLedger::new(ChainConfig::instant()).unwrap();
        let digest = Digest::of(&bytes);
        ledger.submit_log(&digest, &ALICE).unwrap();
        ledger.settle();
        let mut m = bytes.clone();
        let pos = pos % m.len();
        m[pos] ^= xor;
        let stored = verifier::verify(&m, Some(&digest), &ledger).unwrap();
        prop_assert!(stored.is_tampered());
        let loose = verifier::verify(&m, None, &ledger).unwrap();
        prop_assert!(!loose.is_intact());
    }

    /// Same config and submission schedule give the same trace, byte for byte.
    #[test]
    fn simulator_is_deterministic(
        seed in any::<u64>(),
        schedule in prop::collection::vec((0u8..5, any::<bool>(), 0u64..20_000), 1..30),
    ) {
        let run = || {
            let mut chain = SimChain::new(ChainConfig::fuji().with_seed(seed)).unwrap();
            for (h, alice, gap) in &schedule {
                chain.submit_log(Digest::of(&[*h]), if *alice { ALICE } else { BOB });
                chain.advance_time(*gap);
            }
            chain.settle();
            serde_json::to_vec(&chain).unwrap()
        };
        prop_assert_eq!(run(), run());
    }

    /// At most one entry per hash; one LogMinted per successful transaction;
    /// every duplicate reverts with the contract's reason.
    #[test]
    fn write_once_and_append_only(
        schedule in prop::collection::vec((0u8..5, any::<bool>(), 0u64..20_000), 1..40),
    ) {
        let mut chain = SimChain::new(ChainConfig::fuji()).unwrap();
        let mut seen_events = Vec::new();
        for (h, alice, gap) in &schedule {
            chain.submit_log(Digest::of(&[*h]), if *alice { ALICE } else { BOB });
            chain.advance_time(*gap);
            let events = chain.contract().events().to_vec();
            prop_assert!(events.starts_with(&seen_events), "event log was rewritten");
            seen_events = events;
        }
        chain.settle();
        let hashes: BTreeSet<Digest> = schedule.iter().map(|(h, _, _)| Digest::of(&[*h])).collect();
        prop_assert_eq!(chain.contract().len(), hashes.len());
        let ok = chain.txs().filter(|t| t.status == TxStatus::Confirmed).count();
        prop_assert_eq!(chain.contract().events().len(), ok);
        for t in chain.txs() {
            prop_assert!(t.status == TxStatus::Confirmed || t.status.is_duplicate_revert(), "{:?}", t.status);
        }
    }

    /// The anchored payload is the hash of exactly the bytes on disk.
    #[test]
    fn anchor_payload_matches_persisted_bytes(
        signals in prop::collection::vec(prop::collection::btree_set(signal(), 0..4), 1..6),
        captured_at in 1u64..4_000_000_000,
    ) {
        let target = TargetFixture {
            target_id: "prop".into(),
            kind: TargetKind::WebEndpointSet,
            captured_at,
            endpoints: signals
                .into_iter()
                .enumerate()
                .map(|(i, s)| Endpoint { path: format!("/p{i}"), signals: s })
                .collect(),
            contract_ir: None,
        };
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let ledger = anchorscan::ledger::SimLedger::new(ChainConfig::instant()).unwrap();
        let r = run_workflow(&target, &ReferenceAnalyzer::default(), &ledger, &store, &options()).unwrap();
        let on_disk = std::fs::read(&r.report_path).unwrap();
        prop_assert_eq!(r.tx.unwrap().payload_hash, Digest::of(&on_disk));
        prop_assert_eq!(store.entry(&r.report.report_id).unwrap().digest, Digest::of(&on_disk));
    }

    /// The analyzer's findings do not depend on which targets ran before.
    #[test]
    fn analyzer_is_order_independent(seed in any::<u64>()) {
        let corpus = shipped_corpus();
        let analyzer = ReferenceAnalyzer::default();
        let mut order: Vec<usize> = (0..corpus.entries.len()).collect();
        order.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        for i in order.into_iter().take(20) {
            let t = &corpus.entries[i].target;
            prop_assert_eq!(analyzer.analyze(t).unwrap(), fresh_findings(t));
        }
    }
}

fn fresh_findings(t: &TargetFixture) -> Vec<anchorscan::report::Finding> {
    ReferenceAnalyzer::default().analyze(t).unwrap()
}

fn shipped_corpus() -> Corpus {
    Corpus::load_with_truth(&repo_root().join("fixtures")).unwrap()
}

fn signal() -> impl Strategy<Value = Signal> {
    prop_oneof![
        Just(Signal::ReflectsInput),
        Just(Signal::SqlErrorOnQuote),
        Just(Signal::SequentialIdAccess),
        Just(Signal::VerboseStacktrace),
        Just(Signal::DirectoryListing),
        Just(Signal::MissingSecurityHeaders),
    ]
}

fn options() -> WorkflowOptions {
    WorkflowOptions { auditor: ALICE, retry: RetryPolicy { attempts: 1, backoff: std::time::Duration::ZERO } }
}

/// Independent oracle: is there an index pair i < j with an external call at
/// i and a state write at j?
fn oracle_reentrant(ops: &[Op]) -> bool {
    (0..ops.len()).any(|i| {
        matches!(ops[i], Op::ExternalCall) && (i + 1..ops.len()).any(|j| matches!(ops[j], Op::StateWrite(_)))
    })
}

#[test]
fn reentrancy_rule_matches_oracle_on_all_short_sequences() {
    let alphabet =
        [Op::ExternalCall, Op::StateWrite("x".into()), Op::StateRead("x".into()), Op::Require, Op::Emit];
    let analyzer = ReferenceAnalyzer::default();
    let mut checked = 0;
    let mut frontier: Vec<Vec<Op>> = vec![vec![]];
    for _ in 0..5 {
        let mut next = Vec::new();
        for seq in &frontier {
            for op in &alphabet {
                let mut s = seq.clone();
                s.push(op.clone());
                let mut t = bank_target("enum");
                t.contract_ir.as_mut().unwrap().functions[0].ops = s.clone();
                let flagged = analyzer.analyze(&t).unwrap().iter().any(|f| f.vuln_class == VulnClass::Reentrancy);
                assert_eq!(flagged, oracle_reentrant(&s), "{s:?}");
                checked += 1;
                next.push(s);
            }
        }
        frontier = next;
    }
    assert_eq!(checked, 5 + 25 + 125 + 625 + 3125);
}

#[test]
fn perfect_rules_score_one_and_empty_corpus_is_undefined() {
    use anchorscan::analyzer::Ratio;
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir_all(dir.path().join("targets")).unwrap();
    let m = anchorscan::bench::run_corpus_metrics(dir.path(), &Default::default()).unwrap();
    assert_eq!((m.metrics.precision, m.metrics.recall, m.metrics.f1), (Ratio::Undefined, Ratio::Undefined, Ratio::Undefined));

    // Label exactly what the analyzer reports.
    std::fs::create_dir_all(dir.path().join("truth")).unwrap();
    let src = shipped_corpus();
    for e in src.entries.iter().take(25) {
        let labels: BTreeSet<_> = fresh_findings(&e.target)
            .into_iter()
            .map(|f| anchorscan::analyzer::Label { vuln_class: f.vuln_class, location: f.location })
            .collect();
        let truth = anchorscan::analyzer::GroundTruth { target_id: e.target.target_id.clone(), labels };
        std::fs::copy(&e.path, dir.path().join("targets").join(e.path.file_name().unwrap())).unwrap();
        std::fs::write(
            anchorscan::analyzer::corpus::truth_path(dir.path(), &e.target.target_id),
            serde_json::to_vec(&truth).unwrap(),
        )
        .unwrap();
    }
    let m = anchorscan::bench::run_corpus_metrics(dir.path(), &Default::default()).unwrap();
    let one = Ratio::Defined(10_000);
    assert_eq!((m.metrics.precision, m.metrics.recall, m.metrics.f1), (one, one, one));
}

#[test]
fn verification_never_mutates_store_or_ledger() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let ledger = anchorscan::ledger::SimLedger::new(ChainConfig::fuji()).unwrap();
    for i in 0..3 {
        run_workflow(&bank_target(&format!("b{i}")), &ReferenceAnalyzer::default(), &ledger, &store, &options()).unwrap();
    }
    ledger.settle();
    let snapshot = |d: &std::path::Path| {
        let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(d)
            .unwrap()
            .map(|e| e.unwrap().path())
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
            .collect();
        files.sort();
        files
    };
    let (files, chain) = (snapshot(dir.path()), ledger.snapshot());
    let verdicts = verifier::verify_store(&store, &ledger).unwrap();
    assert!(verdicts.iter().all(|(_, v)| v.as_ref().unwrap().is_intact()));
    assert_eq!(snapshot(dir.path()), files);
    assert_eq!(ledger.snapshot(), chain);
}

#[test]
fn one_of_three_mutated_gives_exactly_one_tampered() {
    let dir = tempfile::tempdir().unwrap();
    let store = Store::open(dir.path()).unwrap();
    let ledger = anchorscan::ledger::SimLedger::new(ChainConfig::fuji()).unwrap();
    let results: Vec<_> = (0..3)
        .map(|i| run_workflow(&bank_target(&format!("b{i}")), &ReferenceAnalyzer::default(), &ledger, &store, &options()).unwrap())
        .collect();
    ledger.settle();
    let victim = &results[1];
    let mut bytes = std::fs::read(&victim.report_path).unwrap();
    let pos = bytes.iter().position(|b| *b == b'w').unwrap();
    bytes[pos] = b'W';
    std::fs::write(&victim.report_path, bytes).unwrap();
    let verdicts = verifier::verify_store(&store, &ledger).unwrap();
    let tampered: Vec<_> = verdicts.iter().filter(|(_, v)| v.as_ref().unwrap().is_tampered()).map(|(id, _)| *id).collect();
    assert_eq!(tampered, vec![victim.report.report_id]);
    assert_eq!(verifier::exit_code(verdicts.iter().map(|(_, v)| v)), verifier::exit::TAMPERED);
}

#[test]
fn completion_does_not_wait_for_confirmation() {
    let completion = |confirm_mean: f64| {
        let mut config = ChainConfig::fuji().with_seed(42);
        config.confirmation_ms = anchorscan::ledger::TruncatedNormal::new(confirm_mean, 0.0);
        let ledger = anchorscan::ledger::SimLedger::new(config).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let store = Store::open(dir.path()).unwrap();
        let r = run_workflow(&bank_target("bank"), &ReferenceAnalyzer::default(), &ledger, &store, &options()).unwrap();
        assert_eq!(r.tx.as_ref().unwrap().status, TxStatus::Propagated);
        (r.started_at, r.completed_at)
    };
    let base = completion(0.0);
    assert_eq!(completion(14_200.0), base);
    assert_eq!(completion(60_000.0), base);
}
