//! Pipeline configuration: a TOML file plus per-run flag overrides.
//! Every default is documented in `docs/defaults.md`.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Deserialize;

use feedhunt::TimeWindow;

pub const MIN_MEMORY_BUDGET: usize = 64 << 20;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    /// External-sort memory budget in bytes.
    pub memory_budget: usize,
    pub temp_dir: Option<PathBuf>,
    pub taxonomy: Option<PathBuf>,
    pub filetype_mapping: Option<PathBuf>,
    /// 0 means one worker per core.
    pub threads: usize,
    pub low_threshold: u32,
    pub high_threshold: u32,
    pub cdist: u32,
    pub hac_threshold: f64,
    pub hac_limit: usize,
    pub fud_threshold: u32,
    pub fud_grace: i64,
    pub window: WindowConfig,
    pub gaps: Vec<WindowConfig>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindowConfig {
    pub start: i64,
    pub end: i64,
}

impl From<WindowConfig> for TimeWindow {
    fn from(w: WindowConfig) -> Self {
        TimeWindow::new(w.start, w.end)
    }
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 42,
            memory_budget: 1 << 30,
            temp_dir: None,
            taxonomy: None,
            filetype_mapping: None,
            threads: 0,
            low_threshold: feedhunt::hunting::DEFAULT_LOW_THRESHOLD,
            high_threshold: feedhunt::hunting::DEFAULT_HIGH_THRESHOLD,
            cdist: feedhunt::cluster::DEFAULT_CDIST,
            hac_threshold: 0.8,
            hac_limit: feedhunt::cluster::DEFAULT_HAC_LIMIT,
            fud_threshold: feedhunt::hunting::DEFAULT_FUD_THRESHOLD,
            fud_grace: feedhunt::hunting::DEFAULT_FUD_GRACE_SECS,
            window: WindowConfig { start: i64::MIN, end: i64::MAX },
            gaps: Vec::new(),
        }
    }
}

impl PipelineConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let mut config = match path {
            Some(p) => {
                let text =
                    fs::read_to_string(p).with_context(|| format!("reading config {}", p.display()))?;
                toml::from_str(&text).with_context(|| format!("parsing config {}", p.display()))?
            }
            None => Self::default(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&mut self) -> Result<()> {
        if self.window.start >= self.window.end {
            bail!("window start must be before window end");
        }
        if self.memory_budget < MIN_MEMORY_BUDGET {
            bail!("memory budget must be at least {} bytes (64 MiB)", MIN_MEMORY_BUDGET);
        }
        if self.low_threshold > self.high_threshold {
            bail!("low detection threshold must not exceed the high one");
        }
        if !(0.0..=1.0).contains(&self.hac_threshold) {
            bail!("hac threshold must be in [0, 1]");
        }
        if self.fud_grace < 0 {
            bail!("grace period must be non-negative");
        }
        for g in &self.gaps {
            if g.start >= g.end {
                bail!("gap interval start must be before its end");
            }
        }
        Ok(())
    }

    pub fn window(&self) -> TimeWindow {
        self.window.into()
    }

    pub fn gaps(&self) -> Vec<TimeWindow> {
        self.gaps.iter().map(|&g| g.into()).collect()
    }
}

/// Parses `start..end,start..end` gap lists from the command line.
pub fn parse_gaps(text: &str) -> Result<Vec<WindowConfig>> {
    let mut out = Vec::new();
    for part in text.split(',').filter(|p| !p.trim().is_empty()) {
        let (start, end) =
            part.split_once("..").with_context(|| format!("gap {part:?} is not start..end"))?;
        out.push(WindowConfig {
            start: start.trim().parse().with_context(|| format!("bad gap start in {part:?}"))?,
            end: end.trim().parse().with_context(|| format!("bad gap end in {part:?}"))?,
        });
    }
    Ok(out)
}
