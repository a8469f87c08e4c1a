//! On-disk fixture corpus: `<dir>/targets/*.json` plus
//! `<dir>/truth/<target_id>.json` for each target.

use std::path::{Path, PathBuf};

use super::fixture::{FixtureError, GroundTruth, TargetFixture};

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("reading {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Fixture { path: PathBuf, source: FixtureError },
    #[error("no ground truth for target {target_id} (expected {path})")]
    MissingTruth { target_id: String, path: PathBuf },
    #[error("duplicate target id {0}")]
    DuplicateTarget(String),
}

#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub path: PathBuf,
    pub target: TargetFixture,
    pub truth: Option<GroundTruth>,
}

#[derive(Debug, Clone, Default)]
pub struct Corpus {
    pub entries: Vec<CorpusEntry>,
}

fn read(path: &Path) -> Result<Vec<u8>, CorpusError> {
    std::fs::read(path).map_err(|source| CorpusError::Io { path: path.to_owned(), source })
}

impl Corpus {
    /// Load targets sorted by file name. Truth files are optional here;
    /// use [`Corpus::load_with_truth`] when scoring.
    pub fn load(dir: &Path) -> Result<Self, CorpusError> {
        let targets_dir = dir.join("targets");
        let listing = std::fs::read_dir(&targets_dir)
            .map_err(|source| CorpusError::Io { path: targets_dir.clone(), source })?;
        let mut paths: Vec<PathBuf> = listing
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        paths.sort();

        let mut entries = Vec::with_capacity(paths.len());
        let mut ids = std::collections::HashSet::new();
        for path in paths {
            let target = TargetFixture::from_json(&read(&path)?)
                .map_err(|source| CorpusError::Fixture { path: path.clone(), source })?;
            if !ids.insert(target.target_id.clone()) {
                return Err(CorpusError::DuplicateTarget(target.target_id));
            }
            let truth_path = truth_path(dir, &target.target_id);
            let truth = if truth_path.exists() {
                let truth = GroundTruth::from_json(&read(&truth_path)?)
                    .map_err(|source| CorpusError::Fixture { path: truth_path.clone(), source })?;
                truth
                    .validate_against(&target)
                    .map_err(|source| CorpusError::Fixture { path: truth_path.clone(), source })?;
                Some(truth)
            } else {
                None
            };
            entries.push(CorpusEntry { path, target, truth });
        }
        Ok(Self { entries })
    }

    /// Like [`Corpus::load`] but every target must have ground truth.
    pub fn load_with_truth(dir: &Path) -> Result<Self, CorpusError> {
        let corpus = Self::load(dir)?;
        if let Some(e) = corpus.entries.iter().find(|e| e.truth.is_none()) {
            return Err(CorpusError::MissingTruth {
                target_id: e.target.target_id.clone(),
                path: truth_path(dir, &e.target.target_id),
            });
        }
        Ok(corpus)
    }
}

pub fn truth_path(dir: &Path, target_id: &str) -> PathBuf {
    dir.join("truth").join(format!("{target_id}.json"))
}
