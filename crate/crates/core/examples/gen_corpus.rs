//! Regenerate the synthetic labeled corpus under `fixtures/`.
//!
//! 50 web targets with 10 endpoints each and 100 contracts with 3 functions
//! each. Every (endpoint, class) and contract function slot is assigned one
//! outcome against the reference ruleset, so the aggregate counts are exactly
//! tp=1599, fp=451, fn=351 (precision 0.7800, recall 0.8200).
//!
//! Usage: `cargo run -p anchorscan --example gen_corpus [-- <dir>]`

use std::collections::BTreeSet;
use std::path::Path;

use anchorscan::analyzer::{
    ContractFunction, ContractIr, Endpoint, GroundTruth, Label, Op, Signal, TargetFixture, TargetKind,
};
use anchorscan::report::VulnClass;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 0x636f_7270_7573;
const WEB_TARGETS: usize = 50;
const ENDPOINTS: usize = 10;
const CONTRACTS: usize = 100;
const FUNCTIONS: usize = 3;
const CAPTURED_AT: u64 = 1_735_689_600;

// (tp, fp, fn) per target kind; totals 1599 / 451 / 351.
const WEB_COUNTS: (usize, usize, usize) = (1449, 411, 321);
const CONTRACT_COUNTS: (usize, usize, usize) = (150, 40, 30);

const PATHS: &[&str] = &[
    "/", "/login", "/logout", "/register", "/search", "/profile", "/settings", "/cart", "/checkout",
    "/orders", "/admin", "/upload", "/download", "/reset-password", "/api/v1/users", "/api/v1/users/{id}",
    "/api/v1/orders/{id}", "/api/v1/invoices/{id}", "/api/v1/search", "/api/v1/comments", "/static/",
    "/backup/", "/debug", "/status", "/feedback", "/messages/{id}", "/reports/{id}", "/export", "/news",
    "/help",
];

const CLASSES: [VulnClass; 5] =
    [VulnClass::Xss, VulnClass::Sqli, VulnClass::Idor, VulnClass::InfoDisclosure, VulnClass::Other];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Tp,
    Fp,
    Fn,
    Clean,
}

fn outcomes(total: usize, (tp, fp, fn_): (usize, usize, usize), rng: &mut ChaCha8Rng) -> Vec<Outcome> {
    let mut v = [(Outcome::Tp, tp), (Outcome::Fp, fp), (Outcome::Fn, fn_)]
        .into_iter()
        .flat_map(|(o, n)| std::iter::repeat_n(o, n))
        .collect::<Vec<_>>();
    assert!(v.len() <= total);
    v.resize(total, Outcome::Clean);
    v.shuffle(rng);
    v
}

fn signal_for(class: VulnClass, rng: &mut ChaCha8Rng) -> Vec<Signal> {
    match class {
        VulnClass::Xss => vec![Signal::ReflectsInput],
        VulnClass::Sqli => vec![Signal::SqlErrorOnQuote],
        VulnClass::Idor => vec![Signal::SequentialIdAccess],
        VulnClass::InfoDisclosure => match rand::Rng::gen_range(rng, 0..3) {
            0 => vec![Signal::VerboseStacktrace],
            1 => vec![Signal::DirectoryListing],
            _ => vec![Signal::VerboseStacktrace, Signal::DirectoryListing],
        },
        _ => vec![Signal::MissingSecurityHeaders],
    }
}

fn web_targets(rng: &mut ChaCha8Rng) -> Vec<(TargetFixture, GroundTruth)> {
    let slots = outcomes(WEB_TARGETS * ENDPOINTS * CLASSES.len(), WEB_COUNTS, rng);
    let mut slots = slots.into_iter();
    (0..WEB_TARGETS)
        .map(|t| {
            let target_id = format!("web-{t:03}");
            let mut paths = PATHS.to_vec();
            paths.shuffle(rng);
            let mut labels = BTreeSet::new();
            let endpoints = paths[..ENDPOINTS]
                .iter()
                .map(|&path| {
                    let mut signals = BTreeSet::new();
                    for class in CLASSES {
                        let o = slots.next().expect("enough slots");
                        if matches!(o, Outcome::Tp | Outcome::Fp) {
                            signals.extend(signal_for(class, rng));
                        }
                        if matches!(o, Outcome::Tp | Outcome::Fn) {
                            labels.insert(Label { vuln_class: class, location: path.into() });
                        }
                    }
                    Endpoint { path: path.into(), signals }
                })
                .collect();
            let target = TargetFixture {
                target_id: target_id.clone(),
                kind: TargetKind::WebEndpointSet,
                captured_at: CAPTURED_AT + t as u64 * 3_600,
                endpoints,
                contract_ir: None,
            };
            (target, GroundTruth { target_id, labels })
        })
        .collect()
}

fn state(v: &str) -> (Op, Op) {
    (Op::StateRead(v.into()), Op::StateWrite(v.into()))
}

/// Op list and candidate names for a contract function with outcome `o`.
fn function_shape(o: Outcome, k: usize) -> (Vec<Op>, &'static [&'static str]) {
    let var = ["balances", "shares", "deposits", "credit"][k % 4];
    let (read, write) = state(var);
    match o {
        // Call-then-write on the guarded balance: reentrant and labeled.
        Outcome::Tp => (vec![read, Op::Require, Op::ExternalCall, write, Op::Emit], &["withdraw", "redeem", "claim", "exit"]),
        // Call-then-write of a bookkeeping counter only: flagged, not labeled.
        Outcome::Fp => (
            vec![Op::Require, Op::ExternalCall, Op::StateWrite("lastPayout".into()), Op::Emit],
            &["payout", "notify", "sweep", "ping"],
        ),
        // Reentrant through a sibling function's write: labeled, not flagged.
        Outcome::Fn => (vec![read, Op::Require, Op::ExternalCall, Op::Emit], &["flashLoan", "callback", "execute", "relay"]),
        Outcome::Clean => (vec![read, Op::Require, write, Op::ExternalCall, Op::Emit], &["deposit", "transfer", "stake", "unstake"]),
    }
}

fn contract_targets(rng: &mut ChaCha8Rng) -> Vec<(TargetFixture, GroundTruth)> {
    // Slot 0 is the classic single-function reentrancy case.
    let (tp, fp, fn_) = CONTRACT_COUNTS;
    let rest = outcomes(CONTRACTS * FUNCTIONS - 1, (tp - 1, fp, fn_), rng);
    let mut slots = std::iter::once(Outcome::Tp).chain(rest);
    (0..CONTRACTS)
        .map(|c| {
            let target_id = if c == 0 { "contract-000-bank".to_owned() } else { format!("contract-{c:03}") };
            let mut labels = BTreeSet::new();
            let mut functions: Vec<ContractFunction> = Vec::new();
            for j in 0..FUNCTIONS {
                let o = slots.next().expect("enough slots");
                let (ops, names) = if c == 0 && j == 0 {
                    (vec![Op::StateRead("balances".into()), Op::ExternalCall, Op::StateWrite("balances".into())], &["withdraw"][..])
                } else {
                    function_shape(o, c + j)
                };
                let name = names
                    .iter()
                    .map(|n| n.to_string())
                    .chain((1..).map(|i| format!("{}{i}", names[0])))
                    .find(|n| functions.iter().all(|f| &f.name != n))
                    .expect("unbounded names");
                if matches!(o, Outcome::Tp | Outcome::Fn) {
                    labels.insert(Label { vuln_class: VulnClass::Reentrancy, location: name.clone() });
                }
                functions.push(ContractFunction { name, ops });
            }
            let target = TargetFixture {
                target_id: target_id.clone(),
                kind: TargetKind::SmartContract,
                captured_at: CAPTURED_AT + (WEB_TARGETS + c) as u64 * 3_600,
                endpoints: vec![],
                contract_ir: Some(ContractIr { functions }),
            };
            (target, GroundTruth { target_id, labels })
        })
        .collect()
}

fn write_json(path: &Path, value: &impl serde::Serialize) {
    let mut text = serde_json::to_string_pretty(value).expect("serializes");
    text.push('\n');
    std::fs::write(path, text).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
}

fn main() {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "fixtures".into());
    let dir = Path::new(&dir);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let mut all = web_targets(&mut rng);
    all.extend(contract_targets(&mut rng));

    for sub in ["targets", "truth"] {
        let d = dir.join(sub);
        if d.exists() {
            for e in std::fs::read_dir(&d).expect("listing") {
                let p = e.expect("entry").path();
                if p.extension().is_some_and(|x| x == "json") {
                    std::fs::remove_file(p).expect("remove stale fixture");
                }
            }
        }
        std::fs::create_dir_all(&d).expect("create dir");
    }
    for (target, truth) in &all {
        write_json(&dir.join("targets").join(format!("{}.json", target.target_id)), target);
        write_json(&anchorscan::analyzer::corpus::truth_path(dir, &truth.target_id), truth);
    }

    let m = anchorscan::bench::run_corpus_metrics(dir, &Default::default()).expect("corpus scores");
    println!("{m}");
    let c = &m.metrics.counts;
    assert_eq!((c.tp, c.fp, c.fn_), (1599, 451, 351), "corpus counts drifted");
}
