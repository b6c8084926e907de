//! On-disk invariant store: one record document per file under
//! `{root}/p{p}_n{n}_m{m_1-…-m_n}/{label}.json`.

use std::fs;
use std::path::{Path, PathBuf};

use crate::arith::FieldParams;
use crate::error::{Error, Result};
use crate::format::to_json;
use crate::invariants::{delta_label, delta_star, delta_star_label, HamiltonianPair, InvariantRecord, PipelineResult, RecordDocument};
use crate::symmetric::DeltaOptions;

/// Environment variable naming the default store directory.
pub const STORE_ENV: &str = "CARTAN_STORE";

#[derive(Clone, Debug)]
pub struct Store {
    root: PathBuf,
}

impl Store {
    pub fn new(root: impl Into<PathBuf>) -> Self {
        Store { root: root.into() }
    }

    pub fn from_env() -> Option<Self> {
        std::env::var_os(STORE_ENV).filter(|v| !v.is_empty()).map(Store::new)
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn dir(&self, params: &FieldParams) -> PathBuf {
        let m: Vec<String> = params.m().iter().map(u32::to_string).collect();
        self.root.join(format!("p{}_n{}_m{}", params.p(), params.n(), m.join("-")))
    }

    pub fn path(&self, params: &FieldParams, label: &str) -> PathBuf {
        self.dir(params).join(format!("{label}.json"))
    }

    pub fn save(&self, record: &InvariantRecord, params: &FieldParams) -> Result<PathBuf> {
        let path = self.path(params, record.label());
        fs::create_dir_all(self.dir(params))?;
        let tmp = path.with_extension("json.tmp");
        fs::write(&tmp, to_json(&record.to_document()?)?)?;
        fs::rename(&tmp, &path)?;
        Ok(path)
    }

    /// Loads and verifies a stored record; `Ok(None)` if absent.
    pub fn load(&self, pair: &HamiltonianPair, label: &str, opts: &DeltaOptions) -> Result<Option<InvariantRecord>> {
        let path = self.path(pair.h.params(), label);
        if !path.exists() {
            return Ok(None);
        }
        read_record(&path, pair, opts).map(Some)
    }
}

pub fn read_record_document(path: &Path) -> Result<RecordDocument> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Malformed(format!("{}: {e}", path.display())))
}

/// Reads a record file and verifies it against `pair`.
pub fn read_record(path: &Path, pair: &HamiltonianPair, opts: &DeltaOptions) -> Result<InvariantRecord> {
    InvariantRecord::from_document(&read_record_document(path)?, pair, opts)
}

/// [`delta_star`] that verifies a stored record instead of recomputing when
/// one exists, and stores fresh records.
pub fn delta_star_stored(pair: &HamiltonianPair, i: u32, opts: &DeltaOptions, store: Option<&Store>) -> Result<PipelineResult> {
    let Some(store) = store else { return delta_star(pair, i, opts) };
    for label in [delta_label(i), delta_star_label(i)] {
        if let Some(record) = store.load(pair, &label, opts)? {
            return Ok(PipelineResult::Record(record));
        }
    }
    let result = delta_star(pair, i, opts)?;
    if let PipelineResult::Record(r) = &result {
        store.save(r, pair.h.params())?;
    }
    Ok(result)
}
