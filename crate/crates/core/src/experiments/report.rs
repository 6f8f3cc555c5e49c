use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::dataset::DatasetSpec;
use crate::error::{Error, Result};
use crate::evaluation::EvalResult;
use crate::ingestion::csvio;

pub const RESULTS_CSV: &str = "results.csv";
pub const RESULTS_MD: &str = "results.md";
pub const LAG_CURVE_CSV: &str = "lag_curve.csv";
pub const CONFIG_FILE: &str = "config.resolved";

pub const RESULTS_HEADER: [&str; 10] = [
    "dataset",
    "strategy_s2",
    "strategy_s1",
    "orbit",
    "era5_lag",
    "r2",
    "rmse",
    "mae",
    "n_samples",
    "seed",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    E1,
    E2,
    E3,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::E1 => "E1",
            Self::E2 => "E2",
            Self::E3 => "E3",
        }
    }

    pub fn title(self) -> &'static str {
        match self {
            Self::E1 => "Modality and temporal matching",
            Self::E2 => "ERA5 lookback window",
            Self::E3 => "Foundation-model embeddings versus hand-crafted features",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum RowOutcome {
    Scored(EvalResult),
    Skipped(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub label: String,
    pub spec: DatasetSpec,
    pub n_columns: usize,
    pub outcome: RowOutcome,
}

impl ReportRow {
    pub fn result(&self) -> Option<&EvalResult> {
        match &self.outcome {
            RowOutcome::Scored(r) => Some(r),
            RowOutcome::Skipped(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentReport {
    pub kind: ExperimentKind,
    pub rows: Vec<ReportRow>,
    pub seed: u64,
    pub folds: usize,
    /// Resolved configuration snapshot.
    pub config: String,
}

impl ExperimentReport {
    pub fn row(&self, label: &str) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    pub fn scored(&self) -> impl Iterator<Item = (&ReportRow, &EvalResult)> {
        self.rows.iter().filter_map(|r| r.result().map(|e| (r, e)))
    }
}

/// Four decimals, ties to even on the exact binary value.
pub fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

/// One line of `results.csv`.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultLine {
    pub dataset: String,
    pub strategy_s2: String,
    pub strategy_s1: String,
    pub orbit: String,
    pub era5_lag: usize,
    /// Empty for skipped rows.
    pub metrics: Option<(String, String, String)>,
    pub n_samples: usize,
    pub seed: u64,
}

impl ResultLine {
    fn from_row(row: &ReportRow, seed: u64) -> Self {
        let r = row.result();
        Self {
            dataset: row.label.clone(),
            strategy_s2: row.spec.s2_label().into(),
            strategy_s1: row.spec.s1_label().into(),
            orbit: row.spec.orbit_label().into(),
            era5_lag: row.spec.era5_lookback,
            metrics: r.map(|r| (fmt4(r.r2), fmt4(r.rmse), fmt4(r.mae))),
            n_samples: r.map_or(0, |r| r.n_samples),
            seed,
        }
    }

    fn fields(&self) -> Vec<String> {
        let (r2, rmse, mae) = self.metrics.clone().unwrap_or_default();
        vec![
            self.dataset.clone(),
            self.strategy_s2.clone(),
            self.strategy_s1.clone(),
            self.orbit.clone(),
            self.era5_lag.to_string(),
            r2,
            rmse,
            mae,
            self.n_samples.to_string(),
            self.seed.to_string(),
        ]
    }
}

fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let csv_err = |e: csv::Error| Error::Load {
        path: path.to_path_buf(),
        line: 0,
        message: e.to_string(),
    };
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header).map_err(csv_err)?;
    for row in rows {
        w.write_record(&row).map_err(csv_err)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Aligned Markdown table of `lines`.
pub fn render_table(lines: &[ResultLine]) -> String {
    let header = ["Dataset", "R²", "RMSE", "MAE", "n"];
    let cells: Vec<[String; 5]> = lines
        .iter()
        .map(|l| {
            let (r2, rmse, mae) = l
                .metrics
                .clone()
                .unwrap_or_else(|| ("skipped".into(), "-".into(), "-".into()));
            [l.dataset.clone(), r2, rmse, mae, l.n_samples.to_string()]
        })
        .collect();
    let mut widths = header.map(|h| h.chars().count());
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let pad = |s: &str, w: usize, left: bool| {
        let fill = " ".repeat(w - s.chars().count());
        if left {
            format!("{s}{fill}")
        } else {
            format!("{fill}{s}")
        }
    };
    let mut out = String::new();
    let line = |cells: Vec<String>| format!("| {} |\n", cells.join(" | "));
    out.push_str(&line(
        header.iter().enumerate().map(|(i, h)| pad(h, widths[i], i == 0)).collect(),
    ));
    out.push_str(&line(
        widths
            .iter()
            .enumerate()
            .map(|(i, &w)| if i == 0 { format!(":{}", "-".repeat(w - 1)) } else { format!("{}:", "-".repeat(w - 1)) })
            .collect(),
    ));
    for row in &cells {
        out.push_str(&line(row.iter().enumerate().map(|(i, c)| pad(c, widths[i], i == 0)).collect()));
    }
    out
}

/// Writes `results.csv`, `results.md`, `config.resolved` and, for the lookback
/// sweep, `lag_curve.csv`.
pub fn emit_report(report: &ExperimentReport, out_dir: &Path) -> Result<()> {
    if report.rows.is_empty() {
        return Err(Error::invalid("report", "no rows to write"));
    }
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let lines: Vec<ResultLine> = report.rows.iter().map(|r| ResultLine::from_row(r, report.seed)).collect();
    write_csv(&out_dir.join(RESULTS_CSV), &RESULTS_HEADER, lines.iter().map(ResultLine::fields))?;

    let mut md = String::new();
    let _ = writeln!(md, "# {}: {}\n", report.kind.as_str(), report.kind.title());
    let _ = writeln!(
        md,
        "Pooled out-of-fold metrics from station-grouped {}-fold cross-validation, seed {}. \
         RMSE and MAE in m³/m³. Every row includes ERA5 variables.\n",
        report.folds, report.seed
    );
    md.push_str(&render_table(&lines));
    let skipped: Vec<String> = report
        .rows
        .iter()
        .filter_map(|r| match &r.outcome {
            RowOutcome::Skipped(why) => Some(format!("- {}: {why}\n", r.label)),
            RowOutcome::Scored(_) => None,
        })
        .collect();
    if !skipped.is_empty() {
        md.push_str("\nSkipped rows:\n\n");
        md.extend(skipped);
    }
    let md_path = out_dir.join(RESULTS_MD);
    fs::write(&md_path, md).map_err(|e| Error::io(&md_path, e))?;

    let cfg_path = out_dir.join(CONFIG_FILE);
    fs::write(&cfg_path, &report.config).map_err(|e| Error::io(&cfg_path, e))?;

    if report.kind == ExperimentKind::E2 {
        let rows = report.scored().map(|(row, r)| {
            vec![row.spec.era5_lookback.to_string(), fmt4(r.r2), fmt4(r.rmse), fmt4(r.mae)]
        });
        write_csv(&out_dir.join(LAG_CURVE_CSV), &["lag", "r2", "rmse", "mae"], rows)?;
    }
    Ok(())
}

/// Reads `results.csv` from a report directory.
pub fn read_results(dir: &Path) -> Result<Vec<ResultLine>> {
    let path = dir.join(RESULTS_CSV);
    let rows = csvio::open(&path, &RESULTS_HEADER)?;
    let mut out = Vec::new();
    rows.for_each(|_, rec| {
        let int = |i: usize, name: &str| -> Result<u64> {
            rec[i]
                .parse()
                .map_err(|_| Error::invalid(name, format!("{:?} is not an integer", &rec[i])))
        };
        let metrics = if rec[5].is_empty() {
            None
        } else {
            Some((rec[5].to_string(), rec[6].to_string(), rec[7].to_string()))
        };
        out.push(ResultLine {
            dataset: rec[0].to_string(),
            strategy_s2: rec[1].to_string(),
            strategy_s1: rec[2].to_string(),
            orbit: rec[3].to_string(),
            era5_lag: int(4, "era5_lag")? as usize,
            metrics,
            n_samples: int(8, "n_samples")? as usize,
            seed: int(9, "seed")?,
        });
        Ok(())
    })?;
    Ok(out)
}
