use std::collections::HashMap;
use std::path::Path;

use timt_core::{load_dataset, CorpusError, TimtRecord};

/// A loaded dataset addressable by record id.
#[derive(Debug, Clone)]
pub struct Dataset {
    /// File stem of the source path; requests refer to the dataset by it.
    pub name: String,
    records: Vec<TimtRecord>,
    by_id: HashMap<String, usize>,
}

impl Dataset {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, CorpusError> {
        let path = path.as_ref();
        let name = path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Ok(Self::from_records(name, load_dataset(path)?))
    }

    /// Record ids must be unique; `load_dataset` guarantees it.
    pub fn from_records(name: impl Into<String>, records: Vec<TimtRecord>) -> Self {
        let by_id = records
            .iter()
            .enumerate()
            .map(|(i, r)| (r.id.clone(), i))
            .collect();
        Dataset {
            name: name.into(),
            records,
            by_id,
        }
    }

    pub fn get(&self, id: &str) -> Option<&TimtRecord> {
        self.by_id.get(id).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[TimtRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }
}
