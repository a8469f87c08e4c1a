//! Operator configuration: one TOML file, overridable by `ANCHORSCAN_*`
//! environment variables, then by command-line flags.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::ledger::rpc::RpcConfig;
use crate::ledger::{AccountId, ChainConfig};

pub const ENV_PREFIX: &str = "ANCHORSCAN_";
pub const DEFAULT_AUDITOR: AccountId = AccountId([
    0x5c, 0xa1, 0xab, 0x1e, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00, 0x00,
    0x00, 0x00, 0x00, 0x01,
]);

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("reading config {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config {path}: {source}")]
    Toml { path: PathBuf, source: toml::de::Error },
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    Sim,
    Rpc,
}

/// `[rpc]` section. The signing key is read from the environment variable
/// named by `private_key_env`, never from the file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RpcSection {
    pub url: Option<String>,
    pub chain_id: Option<u64>,
    pub contract: Option<AccountId>,
    pub gas_limit: Option<u64>,
    pub confirmations_required: Option<u64>,
    pub timeout_ms: Option<u64>,
    pub private_key_env: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    store: Option<PathBuf>,
    backend: Option<BackendKind>,
    auditor: Option<AccountId>,
    ruleset: Option<PathBuf>,
    bench: Option<PathBuf>,
    corpus: Option<PathBuf>,
    chain: Option<ChainConfig>,
    rpc: Option<RpcSection>,
}

#[derive(Debug, Clone)]
pub struct RpcSettings {
    pub config: RpcConfig,
    pub private_key_env: String,
}

/// Fully resolved configuration.
#[derive(Debug, Clone)]
pub struct CliConfig {
    pub store: PathBuf,
    pub backend: BackendKind,
    /// Explicit auditor; with the rpc backend it defaults to the signer.
    pub auditor: Option<AccountId>,
    pub ruleset: Option<PathBuf>,
    pub bench: Option<PathBuf>,
    pub corpus: PathBuf,
    pub chain: ChainConfig,
    pub rpc: Option<RpcSettings>,
}

/// Flag values that take precedence over file and environment.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub store: Option<PathBuf>,
    pub backend: Option<BackendKind>,
    pub seed: Option<u64>,
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_absolute() {
        p
    } else {
        base.join(p)
    }
}

fn parse_env<T: std::str::FromStr>(env: &dyn Fn(&str) -> Option<String>, key: &str) -> Result<Option<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    match env(key) {
        None => Ok(None),
        Some(v) => v
            .parse()
            .map(Some)
            .map_err(|e| ConfigError::Invalid(format!("{ENV_PREFIX}{key}={v:?}: {e}"))),
    }
}

impl CliConfig {
    /// Load from `path` (if given) with process environment overrides.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<Self, ConfigError> {
        Self::load_with_env(path, overrides, &|key| std::env::var(format!("{ENV_PREFIX}{key}")).ok())
    }

    /// `env` maps an unprefixed key (e.g. `STORE`) to its value.
    pub fn load_with_env(
        path: Option<&Path>,
        overrides: &Overrides,
        env: &dyn Fn(&str) -> Option<String>,
    ) -> Result<Self, ConfigError> {
        let (file, base) = match path {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|source| ConfigError::Io { path: p.to_owned(), source })?;
                let file: FileConfig = toml::from_str(&text)
                    .map_err(|source| ConfigError::Toml { path: p.to_owned(), source })?;
                (file, p.parent().map(Path::to_owned).unwrap_or_default())
            }
            None => (FileConfig::default(), PathBuf::new()),
        };

        let store = overrides
            .store
            .clone()
            .or_else(|| env("STORE").map(PathBuf::from))
            .unwrap_or_else(|| resolve(&base, file.store.unwrap_or_else(|| "store".into())));
        let backend = match overrides.backend {
            Some(b) => b,
            None => match env("BACKEND").as_deref() {
                Some("sim") => BackendKind::Sim,
                Some("rpc") => BackendKind::Rpc,
                Some(other) => {
                    return Err(ConfigError::Invalid(format!("{ENV_PREFIX}BACKEND must be sim or rpc, got {other:?}")))
                }
                None => file.backend.unwrap_or(BackendKind::Sim),
            },
        };
        let auditor = parse_env(env, "AUDITOR")?.or(file.auditor);
        let ruleset = env("RULESET").map(PathBuf::from).or_else(|| file.ruleset.map(|p| resolve(&base, p)));
        let bench = env("BENCH").map(PathBuf::from).or_else(|| file.bench.map(|p| resolve(&base, p)));
        let corpus = env("CORPUS")
            .map(PathBuf::from)
            .unwrap_or_else(|| resolve(&base, file.corpus.unwrap_or_else(|| "fixtures".into())));

        let mut chain = file.chain.unwrap_or_else(ChainConfig::fuji);
        if let Some(seed) = overrides.seed.or(parse_env(env, "SEED")?) {
            chain.rng_seed = seed;
        }
        chain.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;

        let rpc = match backend {
            BackendKind::Sim => None,
            BackendKind::Rpc => {
                let section = file.rpc.unwrap_or_default();
                let missing = |what: &str| ConfigError::Invalid(format!("rpc backend needs {what}"));
                let url = env("RPC_URL").or(section.url).ok_or_else(|| missing("rpc.url or ANCHORSCAN_RPC_URL"))?;
                let chain_id = parse_env(env, "CHAIN_ID")?
                    .or(section.chain_id)
                    .ok_or_else(|| missing("rpc.chain_id or ANCHORSCAN_CHAIN_ID"))?;
                let contract = parse_env(env, "CONTRACT")?
                    .or(section.contract)
                    .ok_or_else(|| missing("rpc.contract or ANCHORSCAN_CONTRACT"))?;
                Some(RpcSettings {
                    config: RpcConfig {
                        url,
                        chain_id,
                        contract,
                        gas_limit: section.gas_limit.unwrap_or(120_000),
                        confirmations_required: section.confirmations_required.unwrap_or(1),
                        timeout_ms: section.timeout_ms.unwrap_or(10_000),
                    },
                    private_key_env: section.private_key_env.unwrap_or_else(|| format!("{ENV_PREFIX}PRIVATE_KEY")),
                })
            }
        };

        for (what, p) in [("ruleset", &ruleset), ("bench", &bench)] {
            if let Some(p) = p {
                if !p.is_file() {
                    return Err(ConfigError::Invalid(format!("{what} file {} does not exist", p.display())));
                }
            }
        }
        Ok(Self { store, backend, auditor, ruleset, bench, corpus, chain, rpc })
    }
}
