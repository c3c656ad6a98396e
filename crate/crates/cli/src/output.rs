use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};

/// Files staged next to their destination and renamed into place together,
/// so a failed run leaves no partial artifacts behind.
pub struct Staged {
    dir: PathBuf,
    files: Vec<(PathBuf, PathBuf)>,
}

impl Staged {
    pub fn new(dir: &Path) -> Result<Self> {
        fs::create_dir_all(dir).with_context(|| format!("creating output directory {}", dir.display()))?;
        Ok(Staged {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn add(&mut self, name: &str, contents: &str) -> Result<()> {
        let tmp = self.dir.join(format!(".{name}.partial"));
        fs::write(&tmp, contents).with_context(|| format!("writing {}", tmp.display()))?;
        self.files.push((tmp, self.dir.join(name)));
        Ok(())
    }

    pub fn commit(mut self) -> Result<Vec<PathBuf>> {
        let mut done = Vec::new();
        for (tmp, dest) in std::mem::take(&mut self.files) {
            fs::rename(&tmp, &dest).with_context(|| format!("moving {} into place", dest.display()))?;
            done.push(dest);
        }
        Ok(done)
    }
}

impl Drop for Staged {
    fn drop(&mut self) {
        for (tmp, _) in &self.files {
            let _ = fs::remove_file(tmp);
        }
    }
}
