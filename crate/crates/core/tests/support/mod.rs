#![allow(dead_code)]

pub mod mock_node;

use anchorscan::analyzer::{ContractFunction, ContractIr, Op, TargetFixture, TargetKind};
use anchorscan::ledger::rpc::tx::Wallet;
use anchorscan::ledger::rpc::{RpcConfig, RpcLedger};

pub fn rpc_ledger(node: &mock_node::MockNode) -> RpcLedger {
    let config = RpcConfig {
        url: node.url().to_owned(),
        chain_id: mock_node::CHAIN_ID,
        contract: mock_node::CONTRACT,
        gas_limit: 120_000,
        confirmations_required: 1,
        timeout_ms: 2_000,
    };
    RpcLedger::new(config, Wallet::from_hex(mock_node::DEV_KEY).unwrap()).unwrap()
}

pub fn bank_target(id: &str) -> TargetFixture {
    TargetFixture {
        target_id: id.into(),
        kind: TargetKind::SmartContract,
        captured_at: 1_735_689_600,
        endpoints: vec![],
        contract_ir: Some(ContractIr {
            functions: vec![ContractFunction {
                name: "withdraw".into(),
                ops: vec![Op::StateRead("balances".into()), Op::ExternalCall, Op::StateWrite("balances".into())],
            }],
        }),
    }
}

/// Repository root (two levels above the core crate).
pub fn repo_root() -> std::path::PathBuf {
    std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}
