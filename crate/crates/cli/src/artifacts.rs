//! Artifact persistence. Every write goes through a temp-file-and-rename
//! so a crashed run never leaves a half-written model, tree, or dataset
//! at its final path.

use std::io::{self, Write as _};
use std::path::{Path, PathBuf};

use thiserror::Error;
use vp_ddm::{MlpModel, ModelIoError};
use vp_srv::{DecisionTree, TreeIoError};

#[derive(Debug, Error)]
pub enum ArtifactError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path}: {source}")]
    Model {
        path: PathBuf,
        #[source]
        source: ModelIoError,
    },
    #[error("{path}: {source}")]
    Tree {
        path: PathBuf,
        #[source]
        source: TreeIoError,
    },
}

impl ArtifactError {
    fn io(path: &Path, source: io::Error) -> Self {
        Self::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Writes `bytes` to `path` atomically: parent directories are created,
/// the content lands in a hidden sibling temp file, and a rename makes
/// it visible in one step.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let dir = match path.parent() {
        Some(parent) if !parent.as_os_str().is_empty() => parent,
        _ => Path::new("."),
    };
    std::fs::create_dir_all(dir)?;
    let name = path
        .file_name()
        .ok_or_else(|| io::Error::new(io::ErrorKind::InvalidInput, "path has no file name"))?;
    let tmp = dir.join(format!(
        ".{}.{}.tmp",
        name.to_string_lossy(),
        std::process::id()
    ));
    let mut file = std::fs::File::create(&tmp)?;
    file.write_all(bytes)?;
    file.sync_all()?;
    drop(file);
    std::fs::rename(&tmp, path)
}

pub fn save_model(path: &Path, model: &MlpModel) -> Result<(), ArtifactError> {
    write_atomic(path, &model.to_bytes()).map_err(|e| ArtifactError::io(path, e))
}

pub fn load_model(path: &Path) -> Result<MlpModel, ArtifactError> {
    let bytes = std::fs::read(path).map_err(|e| ArtifactError::io(path, e))?;
    MlpModel::from_bytes(&bytes).map_err(|source| ArtifactError::Model {
        path: path.to_path_buf(),
        source,
    })
}

pub fn save_tree(path: &Path, tree: &DecisionTree) -> Result<(), ArtifactError> {
    write_atomic(path, &tree.to_bytes()).map_err(|e| ArtifactError::io(path, e))
}

pub fn load_tree(path: &Path) -> Result<DecisionTree, ArtifactError> {
    let bytes = std::fs::read(path).map_err(|e| ArtifactError::io(path, e))?;
    DecisionTree::from_bytes(&bytes).map_err(|source| ArtifactError::Tree {
        path: path.to_path_buf(),
        source,
    })
}

/// Writes one entry per line with a trailing newline.
pub fn save_lines(path: &Path, lines: &[String]) -> Result<(), ArtifactError> {
    let mut text = lines.join("\n");
    if !text.is_empty() {
        text.push('\n');
    }
    write_atomic(path, text.as_bytes()).map_err(|e| ArtifactError::io(path, e))
}

/// Reads a line-per-entry file, skipping blank lines.
pub fn load_lines(path: &Path) -> Result<Vec<String>, ArtifactError> {
    let text = std::fs::read_to_string(path).map_err(|e| ArtifactError::io(path, e))?;
    Ok(text
        .lines()
        .map(str::trim_end)
        .filter(|l| !l.is_empty())
        .map(String::from)
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn atomic_write_leaves_no_temp_files() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("nested/deeper/artifact.bin");
        write_atomic(&path, b"payload").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"payload");

        let visible: Vec<_> = std::fs::read_dir(path.parent().unwrap())
            .unwrap()
            .map(|e| e.unwrap().file_name())
            .collect();
        assert_eq!(visible.len(), 1, "temp file must be gone: {visible:?}");
    }

    #[test]
    fn atomic_write_replaces_existing_content() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("artifact.bin");
        write_atomic(&path, b"old").unwrap();
        write_atomic(&path, b"new").unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), b"new");
    }

    #[test]
    fn model_round_trip_is_bit_identical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.bin");
        let model = MlpModel::zeros(5);
        save_model(&path, &model).unwrap();
        let loaded = load_model(&path).unwrap();
        assert_eq!(loaded.to_bytes(), model.to_bytes());
    }

    #[test]
    fn lines_round_trip_skips_blanks() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.txt");
        save_lines(&path, &["get a.txt".into(), "get b.txt".into()]).unwrap();
        assert_eq!(
            load_lines(&path).unwrap(),
            vec!["get a.txt".to_string(), "get b.txt".to_string()]
        );
        assert!(std::fs::read_to_string(&path).unwrap().ends_with('\n'));
    }

    #[test]
    fn load_errors_carry_the_path() {
        let message = load_model(Path::new("/nonexistent/model.bin"))
            .unwrap_err()
            .to_string();
        assert!(message.contains("/nonexistent/model.bin"));
    }
}
