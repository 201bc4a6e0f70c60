//! Run configuration: a single TOML file plus flag overrides. Paths in the
//! file resolve relative to the file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use ownet_core::netgraph::ScopeConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("invalid config {path}: {message}")]
    Invalid { path: String, message: String },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    out_dir: Option<PathBuf>,
    currency: Option<String>,
    share_threshold: Option<f64>,
    division_table: Option<PathBuf>,
    boundaries: PathBuf,
    /// City set for flows/sectors/ca; empty or omitted means every FUA.
    analysis_cities: Option<Vec<String>>,
    scope: RawScope,
    #[serde(rename = "snapshot")]
    snapshots: Vec<RawSnapshot>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScope {
    focal: String,
    capital: String,
    domestic_country: String,
    eu_countries: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSnapshot {
    year: i32,
    firms: PathBuf,
    links: PathBuf,
    /// Per-vintage monetary label; falls back to the run-level currency.
    currency: Option<String>,
}

/// Input files for one data vintage. Currency is a snapshot-level
/// declaration; values are never converted between vintages.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotFiles {
    pub year: i32,
    pub firms: PathBuf,
    pub links: PathBuf,
    pub currency: String,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub out_dir: PathBuf,
    /// Opaque monetary label carried into summaries; values stay in
    /// thousands of this currency throughout.
    pub currency: String,
    /// Links with share_pct below this are dropped after parsing.
    pub share_threshold: f64,
    pub division_table: Option<PathBuf>,
    pub boundaries: PathBuf,
    pub analysis_cities: Vec<String>,
    pub scope: ScopeConfig,
    pub snapshots: Vec<SnapshotFiles>,
}

/// Flag overrides on top of the config file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub years: Vec<i32>,
    pub focal: Option<String>,
    pub capital: Option<String>,
    pub out: Option<PathBuf>,
    pub share_threshold: Option<f64>,
    pub division_table: Option<PathBuf>,
}

pub fn load_config(path: &Path, overrides: &Overrides) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let raw: RawConfig = toml::from_str(&text).map_err(|e| ConfigError::Invalid {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    let invalid = |message: String| ConfigError::Invalid {
        path: path.display().to_string(),
        message,
    };

    let base = path.parent().unwrap_or_else(|| Path::new("."));
    let resolve = |p: &Path| -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };

    let focal = overrides.focal.clone().unwrap_or(raw.scope.focal);
    let capital = overrides.capital.clone().unwrap_or(raw.scope.capital);
    let scope = ScopeConfig::new(
        focal,
        capital,
        raw.scope.domestic_country,
        raw.scope.eu_countries,
    )
    .map_err(|e| invalid(e.to_string()))?;

    let run_currency = raw.currency.unwrap_or_else(|| "unspecified".to_string());
    let mut snapshots: Vec<SnapshotFiles> = raw
        .snapshots
        .into_iter()
        .map(|s| SnapshotFiles {
            year: s.year,
            firms: resolve(&s.firms),
            links: resolve(&s.links),
            currency: s.currency.unwrap_or_else(|| run_currency.clone()),
        })
        .collect();
    if snapshots.is_empty() {
        return Err(invalid("at least one [[snapshot]] is required".to_string()));
    }
    snapshots.sort_by_key(|s| s.year);
    for pair in snapshots.windows(2) {
        if pair[0].year == pair[1].year {
            return Err(invalid(format!("duplicate snapshot year {}", pair[0].year)));
        }
    }
    if !overrides.years.is_empty() {
        for year in &overrides.years {
            if !snapshots.iter().any(|s| s.year == *year) {
                return Err(invalid(format!("--year {year} is not in the config")));
            }
        }
        snapshots.retain(|s| overrides.years.contains(&s.year));
    }

    let share_threshold = overrides
        .share_threshold
        .or(raw.share_threshold)
        .unwrap_or(0.0);
    if !(0.0..=100.0).contains(&share_threshold) {
        return Err(invalid(format!(
            "share_threshold {share_threshold} outside [0, 100]"
        )));
    }

    Ok(RunConfig {
        out_dir: overrides
            .out
            .clone()
            .unwrap_or_else(|| resolve(&raw.out_dir.unwrap_or_else(|| PathBuf::from("out")))),
        currency: run_currency,
        share_threshold,
        division_table: overrides
            .division_table
            .clone()
            .or(raw.division_table.as_deref().map(resolve)),
        boundaries: resolve(&raw.boundaries),
        analysis_cities: raw.analysis_cities.unwrap_or_default(),
        scope,
        snapshots,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_config(dir: &Path, body: &str) -> PathBuf {
        let path = dir.join("run.toml");
        let mut f = std::fs::File::create(&path).unwrap();
        f.write_all(body.as_bytes()).unwrap();
        path
    }

    const BASE: &str = r#"
boundaries = "fua.geojson"
currency = "EUR"

[scope]
focal = "avonford"
capital = "carlton"
domestic_country = "XA"
eu_countries = ["XB"]

[[snapshot]]
year = 2016
firms = "firms_2016.csv"
links = "links_2016.csv"

[[snapshot]]
year = 2010
firms = "firms_2010.csv"
links = "links_2010.csv"
"#;

    #[test]
    fn loads_and_resolves_relative_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), BASE);
        let cfg = load_config(&path, &Overrides::default()).unwrap();
        assert_eq!(cfg.boundaries, dir.path().join("fua.geojson"));
        assert_eq!(cfg.out_dir, dir.path().join("out"));
        assert_eq!(cfg.snapshots.len(), 2);
        // Sorted by year.
        assert_eq!(cfg.snapshots[0].year, 2010);
        assert_eq!(cfg.share_threshold, 0.0);
        assert_eq!(cfg.scope.focal_fua_id, "avonford");
        assert!(cfg.scope.domestic_outside_eu());
    }

    #[test]
    fn overrides_win() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_config(dir.path(), BASE);
        let overrides = Overrides {
            years: vec![2016],
            focal: Some("brookhaven".to_string()),
            out: Some(PathBuf::from("/tmp/elsewhere")),
            share_threshold: Some(25.0),
            ..Default::default()
        };
        let cfg = load_config(&path, &overrides).unwrap();
        assert_eq!(cfg.snapshots.len(), 1);
        assert_eq!(cfg.snapshots[0].year, 2016);
        assert_eq!(cfg.scope.focal_fua_id, "brookhaven");
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/elsewhere"));
        assert_eq!(cfg.share_threshold, 25.0);
    }

    #[test]
    fn rejects_bad_configs() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_config(&dir.path().join("missing.toml"), &Overrides::default()),
            Err(ConfigError::Io { .. })
        ));

        let same = BASE.replace("capital = \"carlton\"", "capital = \"avonford\"");
        let path = write_config(dir.path(), &same);
        assert!(load_config(&path, &Overrides::default()).is_err());

        let path = write_config(dir.path(), BASE);
        let overrides = Overrides {
            years: vec![1999],
            ..Default::default()
        };
        assert!(load_config(&path, &overrides).is_err());
    }
}
