use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use reim_core::{save_model, ModelFile};

/// Single JSON object on stderr; always the last line the binary prints there.
pub fn error_line(kind: &str, message: &str) {
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message.trim() }));
}

/// Output directory. Every written path is echoed to stdout.
pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(root: &Path) -> anyhow::Result<Self> {
        fs::create_dir_all(root).map_err(reim_core::Error::from)
            .with_context(|| format!("creating {}", root.display()))?;
        Ok(OutDir { root: root.to_path_buf() })
    }

    fn announce(&self, path: &Path) {
        println!("{}", path.display());
    }

    pub fn text(&mut self, name: &str, contents: &str) -> anyhow::Result<()> {
        let path = self.root.join(name);
        fs::write(&path, contents).map_err(reim_core::Error::from)
            .with_context(|| format!("writing {}", path.display()))?;
        self.announce(&path);
        Ok(())
    }

    pub fn json(&mut self, name: &str, value: &serde_json::Value) -> anyhow::Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.text(name, &text)
    }

    pub fn model(&mut self, name: &str, file: &ModelFile) -> anyhow::Result<()> {
        let path = self.root.join(name);
        save_model(&path, file).with_context(|| format!("writing {}", path.display()))?;
        self.announce(&path);
        Ok(())
    }
}

/// CSV number with 6 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.5e}")
}
