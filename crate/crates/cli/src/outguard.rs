//! Removes partially written artifacts when a command fails.

use std::path::{Path, PathBuf};

/// Collects the paths a command writes; unless `disarm` is called, every
/// registered file is deleted on drop.
#[derive(Debug, Default)]
pub struct OutputGuard {
    paths: Vec<PathBuf>,
    armed: bool,
}

impl OutputGuard {
    pub fn new() -> Self {
        Self { paths: Vec::new(), armed: true }
    }

    pub fn register(&mut self, path: &Path) {
        self.paths.push(path.to_path_buf());
    }

    /// Keep the outputs: the run succeeded.
    pub fn disarm(mut self) {
        self.armed = false;
    }
}

impl Drop for OutputGuard {
    fn drop(&mut self) {
        if !self.armed {
            return;
        }
        for p in &self.paths {
            let _ = std::fs::remove_file(p);
        }
    }
}
