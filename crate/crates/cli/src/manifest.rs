use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use strandcodes::Error;

use crate::Io;

/// Random traces are drawn from this generator, seeded with `seed`.
pub const GENERATOR: &str = "ChaCha8 (rand_chacha 0.3), seed_from_u64";

/// Everything needed to repeat a run: the argument vector is replayed as is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub argv: Vec<String>,
    pub parameters: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub generator: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    pub version: String,
    /// Parameter conditions that do not hold (only reported in unsafe mode).
    pub violations: Vec<String>,
}

impl RunManifest {
    pub fn new(
        subcommand: &str,
        argv: Vec<String>,
        io: &Option<Io>,
        parameters: Vec<(String, String)>,
        seed: Option<u64>,
        violations: Vec<String>,
    ) -> Self {
        let path = |p: &Option<std::path::PathBuf>| p.as_ref().map(|p| p.display().to_string());
        RunManifest {
            subcommand: subcommand.to_string(),
            argv,
            parameters: parameters.into_iter().collect(),
            seed,
            generator: GENERATOR.to_string(),
            input: io.as_ref().and_then(|io| path(&io.input)),
            output: io.as_ref().and_then(|io| path(&io.output)),
            version: strandcodes::VERSION.to_string(),
            violations,
        }
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        let text = serde_json::to_string_pretty(self).expect("manifest serializes") + "\n";
        fs::write(path, text).map_err(|e| Error::param(format!("cannot write {}: {e}", path.display())))
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let text =
            fs::read_to_string(path).map_err(|e| Error::param(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}
