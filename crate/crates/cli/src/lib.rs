//! Config handling, experiment dispatch and result files for the `plateaulab` binary.

pub mod config;
pub mod output;

use std::path::Path;
use std::time::Instant;

use plateaulab_core::experiments::{run_experiment, ExperimentConfig};

pub use config::{parse_config, render_config, validate_config, ConfigReport};
pub use output::{read_records, verify_manifest, RunManifest};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const SEED_ENV: &str = "PLATEAULAB_SEED";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid config:\n{0}")]
    Config(ConfigReport),
    #[error("{0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Config(_) => 1,
            Self::Runtime(_) => 2,
        }
    }
}

impl From<plateaulab_core::Error> for CliError {
    fn from(e: plateaulab_core::Error) -> Self {
        Self::Runtime(e.to_string())
    }
}

/// Picks the base seed: `--seed` beats the environment, which beats the config.
pub fn resolve_seed(
    config_seed: u64,
    env: Option<&str>,
    flag: Option<u64>,
) -> Result<u64, CliError> {
    if let Some(seed) = flag {
        return Ok(seed);
    }
    match env.map(str::trim) {
        None | Some("") => Ok(config_seed),
        Some(raw) => raw.parse().map_err(|_| {
            CliError::Config(ConfigReport::single(
                SEED_ENV,
                format!("expected an unsigned integer, got {raw:?}"),
            ))
        }),
    }
}

fn write_file(dir: &Path, name: &str, bytes: &[u8]) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes)
        .map_err(|e| CliError::Runtime(format!("writing {}: {e}", path.display())))
}

/// Runs `cfg` and writes the CSV tables plus `manifest.json` into `out_dir`.
pub fn run(cfg: &ExperimentConfig, out_dir: &Path) -> Result<RunManifest, CliError> {
    let start = Instant::now();
    let issues = cfg.issues();
    if !issues.is_empty() {
        return Err(CliError::Config(ConfigReport { issues }));
    }
    cfg.check_resources()?;
    std::fs::create_dir_all(out_dir)
        .map_err(|e| CliError::Runtime(format!("creating {}: {e}", out_dir.display())))?;

    let mut out = run_experiment(cfg)?;
    out.records.sort_by_key(|r| (r.n_h, r.instance));

    let mut files = vec![
        (
            output::RECORDS_FILE,
            output::records_csv(&out.records, cfg.experiment.is_gradient())?,
        ),
        (output::SUMMARY_FILE, output::summary_csv(&out.summary)?),
    ];
    if let Some(fit) = &out.fit {
        files.push((output::FIT_FILE, output::fit_csv(cfg.model, fit)?));
    }
    let mut checksums = std::collections::BTreeMap::new();
    for (name, bytes) in &files {
        write_file(out_dir, name, bytes)?;
        checksums.insert(name.to_string(), output::sha256_hex(bytes));
    }

    let manifest = RunManifest {
        config: cfg.clone(),
        version: VERSION.to_string(),
        base_seed: cfg.seed,
        checksums,
        duration_seconds: start.elapsed().as_secs_f64(),
    };
    let json = serde_json::to_string_pretty(&manifest)
        .map_err(|e| CliError::Runtime(format!("serializing manifest: {e}")))?;
    write_file(out_dir, output::MANIFEST_FILE, json.as_bytes())?;
    Ok(manifest)
}
