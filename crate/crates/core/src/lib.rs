//! Vulnerability analysis with ledger-anchored, tamper-evident reports.
//!
//! A target is analyzed in five phases, the resulting report is serialized
//! canonically and hashed, and the digest is written once to a log contract.
//! Anyone holding the report can later recompute the digest and compare it
//! with the anchored one.

pub mod analyzer;
pub mod bench;
pub mod cli;
pub mod coordinator;
pub mod digest;
pub mod fsutil;
pub mod ledger;
pub mod report;
pub mod verifier;

pub use digest::Digest;
