use std::io::Write;
use std::path::Path;

use anyhow::Context;

/// Writes a set of files into `dir` so that either all of them appear or
/// none do: contents are staged in a sibling temporary directory and each
/// file is moved into place by rename once everything is on disk.
pub fn write_all_atomic(dir: &Path, files: &[(&str, Vec<u8>)]) -> anyhow::Result<()> {
    let parent = match dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => std::env::current_dir()?,
    };
    std::fs::create_dir_all(&parent).with_context(|| format!("creating {}", parent.display()))?;
    let staging = tempfile::Builder::new()
        .prefix(".qbm-staging-")
        .tempdir_in(&parent)
        .with_context(|| format!("creating staging directory in {}", parent.display()))?;
    for (name, bytes) in files {
        let mut f = std::fs::File::create(staging.path().join(name))?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for (name, _) in files {
        std::fs::rename(staging.path().join(name), dir.join(name))
            .with_context(|| format!("moving {name} into {}", dir.display()))?;
    }
    Ok(())
}

pub fn json_bytes<T: serde::Serialize>(value: &T) -> anyhow::Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(value)?;
    out.push(b'\n');
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn writes_every_file_and_cleans_staging() {
        let root = tempfile::tempdir().unwrap();
        let dir = root.path().join("run");
        write_all_atomic(&dir, &[("a.txt", b"one".to_vec()), ("b.txt", b"two".to_vec())]).unwrap();
        assert_eq!(std::fs::read(dir.join("a.txt")).unwrap(), b"one");
        assert_eq!(std::fs::read(dir.join("b.txt")).unwrap(), b"two");
        let leftovers: Vec<_> = std::fs::read_dir(root.path())
            .unwrap()
            .filter_map(|e| e.ok())
            .filter(|e| e.file_name().to_string_lossy().starts_with(".qbm-staging-"))
            .collect();
        assert!(leftovers.is_empty());
    }

    #[test]
    fn overwrites_existing_files() {
        let root = tempfile::tempdir().unwrap();
        write_all_atomic(root.path(), &[("x.json", b"1".to_vec())]).unwrap();
        write_all_atomic(root.path(), &[("x.json", b"2".to_vec())]).unwrap();
        assert_eq!(std::fs::read(root.path().join("x.json")).unwrap(), b"2");
    }
}
