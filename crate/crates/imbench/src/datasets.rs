//! Named benchmark datasets and where their edge lists live.

use std::path::{Path, PathBuf};

use crate::config::DatasetRef;

/// Registry name, file name under the data directory, expected vertex and edge counts.
pub const REGISTRY: &[(&str, &str, usize, usize)] = &[
    ("karate", "karate.txt", 34, 78),
    ("dolphin", "dolphins.txt", 62, 159),
    ("books", "polbooks.txt", 105, 441),
    ("email-eu-core", "email-Eu-core.txt", 1005, 16064),
    ("facebook-artist", "artist_edges.csv", 50515, 819306),
];

/// `$IMBENCH_DATA` if set, otherwise the workspace `data/` directory.
pub fn default_data_dir() -> PathBuf {
    std::env::var_os("IMBENCH_DATA")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data"))
}

pub fn lookup(name: &str) -> Option<(&'static str, usize, usize)> {
    REGISTRY
        .iter()
        .find(|(n, ..)| n.eq_ignore_ascii_case(name))
        .map(|&(_, file, n, m)| (file, n, m))
}

/// Registry names map into `data_dir`; anything else is taken as a path and
/// named after its file stem.
pub fn resolve(spec: &str, data_dir: &Path) -> DatasetRef {
    if let Some((file, ..)) = lookup(spec) {
        return DatasetRef {
            name: spec.to_ascii_lowercase(),
            path: data_dir.join(file),
        };
    }
    let path = PathBuf::from(spec);
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| spec.to_owned());
    DatasetRef { name, path }
}
