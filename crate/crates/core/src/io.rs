//! CSV and JSON artifacts of a run directory:
//! `resolved-config.json`, `series.csv`, `snapshots/`, `summary.json`.

use crate::analysis::AnalysisReport;
use crate::config::{read_json, ConfigError, ExperimentConfig};
use crate::exponents::ProblemParams;
use crate::gridop::{Field, RadialGrid};
use crate::solver::{SeriesRow, SimulationResult, Snapshot, SolverConfig, Termination};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Fs {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Csv {
        path: String,
        line: usize,
        message: String,
    },
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

fn fs_err(path: &Path) -> impl FnOnce(std::io::Error) -> IoError + '_ {
    move |source| IoError::Fs {
        path: path.display().to_string(),
        source,
    }
}

pub const FIELD_HEADER: &str = "r,u";
pub const SERIES_HEADER: &str = "t,max_u,support_radius,mass";

pub fn field_csv(grid: &RadialGrid, field: &Field) -> String {
    let mut s = String::with_capacity(48 * field.len() + 8);
    s.push_str(FIELD_HEADER);
    s.push('\n');
    for (r, u) in grid.centers().iter().zip(&field.values) {
        let _ = writeln!(s, "{r:.16e},{u:.16e}");
    }
    s
}

pub fn series_csv(series: &[SeriesRow]) -> String {
    let mut s = String::with_capacity(96 * series.len() + 32);
    s.push_str(SERIES_HEADER);
    s.push('\n');
    for row in series {
        let _ = writeln!(
            s,
            "{:.16e},{:.16e},{:.16e},{:.16e}",
            row.t, row.max_u, row.support_radius, row.mass
        );
    }
    s
}

/// Parses a CSV with the given header into rows of `width` numbers.
pub fn parse_csv(text: &str, header: &str, path: &Path) -> Result<Vec<Vec<f64>>, IoError> {
    let err = |line: usize, message: String| IoError::Csv {
        path: path.display().to_string(),
        line,
        message,
    };
    let mut lines = text.lines();
    let first = lines.next().unwrap_or("");
    if first.trim() != header {
        return Err(err(1, format!("expected header `{header}`, found `{first}`")));
    }
    let width = header.split(',').count();
    let mut rows = Vec::new();
    for (k, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let vals: Result<Vec<f64>, _> = line.split(',').map(|v| v.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| err(k + 2, e.to_string()))?;
        if vals.len() != width {
            return Err(err(k + 2, format!("expected {width} columns, found {}", vals.len())));
        }
        rows.push(vals);
    }
    Ok(rows)
}

pub fn read_series(path: &Path) -> Result<Vec<SeriesRow>, IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    Ok(parse_csv(&text, SERIES_HEADER, path)?
        .into_iter()
        .map(|v| SeriesRow {
            t: v[0],
            max_u: v[1],
            support_radius: v[2],
            mass: v[3],
        })
        .collect())
}

pub fn read_field(path: &Path) -> Result<(Vec<f64>, Vec<f64>), IoError> {
    let text = fs::read_to_string(path).map_err(fs_err(path))?;
    Ok(parse_csv(&text, FIELD_HEADER, path)?
        .into_iter()
        .map(|v| (v[0], v[1]))
        .unzip())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SnapshotEntry {
    pub file: String,
    pub t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub params: ProblemParams,
    pub cfg: SolverConfig,
    pub termination: Termination,
    #[serde(rename = "T_e_est")]
    pub t_e_est: Option<f64>,
    pub steps: u64,
    pub dt_min: f64,
    pub dt_max: f64,
    pub sup_norm0: f64,
    pub snapshots: Vec<SnapshotEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub analysis: Option<serde_json::Value>,
}

fn write(path: &Path, contents: &str) -> Result<(), IoError> {
    fs::write(path, contents).map_err(fs_err(path))
}

/// Writes a complete run directory.
pub fn write_run_dir(
    dir: &Path,
    config: &ExperimentConfig,
    cfg: &SolverConfig,
    result: &SimulationResult,
    analysis: Option<&AnalysisReport>,
) -> Result<RunSummary, IoError> {
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir).map_err(fs_err(&snap_dir))?;
    write(&dir.join("resolved-config.json"), &serde_json::to_string_pretty(config)?)?;
    write(&dir.join("series.csv"), &series_csv(&result.series))?;
    let every = config.output.snapshot_every;
    let mut entries = Vec::new();
    if every > 0 {
        for (k, snap) in result.snapshots.iter().enumerate().filter(|(k, _)| k % every == 0) {
            let file = format!("snap_{k:05}.csv");
            write(&snap_dir.join(&file), &field_csv(&result.grid, &snap.field))?;
            entries.push(SnapshotEntry { file, t: snap.t });
        }
    }
    let summary = RunSummary {
        params: result.params,
        cfg: cfg.clone(),
        termination: result.termination,
        t_e_est: result.t_e_est,
        steps: result.steps,
        dt_min: result.dt_min,
        dt_max: result.dt_max,
        sup_norm0: result.sup_norm0,
        snapshots: entries,
        analysis: analysis.map(serde_json::to_value).transpose()?,
    };
    write(&dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    Ok(summary)
}

/// Reads a run directory back into a `SimulationResult`.
pub fn load_run_dir(dir: &Path) -> Result<(ExperimentConfig, RunSummary, SimulationResult), IoError> {
    let config: ExperimentConfig = read_json(&dir.join("resolved-config.json"))?;
    let summary: RunSummary = read_json(&dir.join("summary.json"))?;
    let grid = RadialGrid::new(summary.params.dim(), config.grid.r_max, config.grid.m).map_err(|e| {
        IoError::Config(ConfigError::Invalid(e.to_string()))
    })?;
    let series = read_series(&dir.join("series.csv"))?;
    let mut snapshots = Vec::new();
    for e in &summary.snapshots {
        let path = dir.join("snapshots").join(&e.file);
        let (_, u) = read_field(&path)?;
        let field = Field::from_values(&grid, u).map_err(|err| IoError::Csv {
            path: path.display().to_string(),
            line: 0,
            message: err.to_string(),
        })?;
        snapshots.push(Snapshot { t: e.t, field });
    }
    let result = SimulationResult {
        params: summary.params,
        grid,
        series,
        snapshots,
        t_e_est: summary.t_e_est,
        termination: summary.termination,
        steps: summary.steps,
        dt_min: summary.dt_min,
        dt_max: summary.dt_max,
        sup_norm0: summary.sup_norm0,
        tol_ext: summary.cfg.tol_ext,
        tol_pos: summary.cfg.tol_pos,
    };
    Ok((config, summary, result))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let grid = RadialGrid::new(2, 3.0, 17).unwrap();
        let f = Field::from_fn(&grid, |r| (1.0 + r * r).powf(-0.3) / 7.0);
        let text = field_csv(&grid, &f);
        assert!(text.starts_with("r,u\n"));
        let rows = parse_csv(&text, FIELD_HEADER, Path::new("x")).unwrap();
        for (row, (&r, &u)) in rows.iter().zip(grid.centers().iter().zip(&f.values)) {
            assert_eq!(row[0], r);
            assert_eq!(row[1], u);
        }
    }

    #[test]
    fn bad_header_and_column_count() {
        let p = Path::new("s.csv");
        assert!(parse_csv("t,u\n1,2\n", SERIES_HEADER, p).is_err());
        match parse_csv("r,u\n1,2,3\n", FIELD_HEADER, p) {
            Err(IoError::Csv { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
    }
}
