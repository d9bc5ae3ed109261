//! Run results, their aggregates, and the files they are written to.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use cyclewalk::TrainRecord;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};
use crate::preset::ExperimentPreset;

#[derive(Clone, Debug, PartialEq)]
pub struct SampleResult {
    pub id: usize,
    pub final_distance: f64,
    pub updates_run: u64,
    pub records: Vec<TrainRecord>,
    /// `a^(0) − a^(1)` in `(−π, π]` when the variant carries site phases.
    pub phase_difference: Option<f64>,
}

impl SampleResult {
    /// Distance at each grid point; an early stop holds its last value.
    pub fn distance_curve(&self, grid: &[u64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(grid.len());
        let mut recs = self.records.iter().peekable();
        let mut last = f64::NAN;
        for &u in grid {
            while let Some(r) = recs.next_if(|r| r.update <= u) {
                last = r.distance;
            }
            out.push(last);
        }
        out
    }
}

/// Header fields echoed into `summary.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub preset: String,
    pub seed: u64,
    pub spec: SpecEcho,
    #[serde(rename = "T")]
    pub steps: usize,
    pub eta: f64,
    pub variant: String,
    pub target: String,
    pub max_updates: u64,
    pub eval_every: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecEcho {
    pub n: usize,
    pub delta0: i64,
    pub delta1: i64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunReport {
    pub header: RunHeader,
    pub samples: Vec<SampleResult>,
}

/// Average and worst distance per grid point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Aggregate {
    pub avg: Vec<f64>,
    pub worst: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HistogramBin {
    /// Exclusive lower edge; `None` for the first bin, which starts at 0 inclusive.
    pub lower: Option<f64>,
    /// Inclusive upper edge; `None` for the overflow bin.
    pub upper: Option<f64>,
    pub count: usize,
}

/// Decade edges `1e-16, 1e-15, …, 1e0`.
pub fn default_edges() -> Vec<f64> {
    (-16..=0).map(|k| 10f64.powi(k)).collect()
}

/// Bins `[0, e0], (e0, e1], …, (e_last, ∞)`.
pub fn histogram(values: &[f64], edges: &[f64]) -> Vec<HistogramBin> {
    let mut bins: Vec<HistogramBin> = (0..=edges.len())
        .map(|k| HistogramBin {
            lower: k.checked_sub(1).map(|j| edges[j]),
            upper: edges.get(k).copied(),
            count: 0,
        })
        .collect();
    for &v in values {
        let k = edges.partition_point(|&e| e < v);
        bins[k].count += 1;
    }
    bins
}

/// Fraction of values strictly above each threshold.
pub fn exceedance(values: &[f64], thresholds: &[f64]) -> Vec<f64> {
    thresholds
        .iter()
        .map(|&x| values.iter().filter(|&&v| v > x).count() as f64 / values.len() as f64)
        .collect()
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        0.5 * (v[m - 1] + v[m])
    }
}

impl RunReport {
    pub fn new(preset: &ExperimentPreset, samples: Vec<SampleResult>) -> Self {
        Self {
            header: RunHeader {
                preset: preset.name.clone(),
                seed: preset.seed,
                spec: SpecEcho {
                    n: preset.spec.sites(),
                    delta0: preset.spec.delta0(),
                    delta1: preset.spec.delta1(),
                },
                steps: preset.steps,
                eta: preset.eta,
                variant: preset.variant.name().to_string(),
                target: preset.target.name().to_string(),
                max_updates: preset.max_updates,
                eval_every: preset.eval_every,
            },
            samples,
        }
    }

    /// Evaluation points `0, k, 2k, …` up to the update budget.
    pub fn grid(&self) -> Vec<u64> {
        (0..=self.header.max_updates)
            .step_by(self.header.eval_every as usize)
            .collect()
    }

    pub fn final_distances(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.final_distance).collect()
    }

    pub fn aggregate(&self) -> Aggregate {
        let grid = self.grid();
        let curves: Vec<Vec<f64>> = self
            .samples
            .iter()
            .map(|s| s.distance_curve(&grid))
            .collect();
        let count = curves.len() as f64;
        let avg = (0..grid.len())
            .map(|i| curves.iter().map(|c| c[i]).sum::<f64>() / count)
            .collect();
        let worst = (0..grid.len())
            .map(|i| {
                curves
                    .iter()
                    .map(|c| c[i])
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect();
        Aggregate { avg, worst }
    }

    /// Concatenates runs that share an evaluation grid.
    pub fn merge(reports: Vec<RunReport>) -> Result<RunReport> {
        let mut iter = reports.into_iter();
        let mut merged = iter
            .next()
            .ok_or_else(|| CliError::Validation("nothing to summarize".into()))?;
        for r in iter {
            if r.grid() != merged.grid() {
                return Err(CliError::Validation(format!(
                    "evaluation grids differ: `{}` uses every {} up to {}, `{}` uses every {} up to {}",
                    merged.header.preset,
                    merged.header.eval_every,
                    merged.header.max_updates,
                    r.header.preset,
                    r.header.eval_every,
                    r.header.max_updates
                )));
            }
            merged.samples.extend(r.samples);
        }
        Ok(merged)
    }

    /// Writes the deterministic outputs (everything except timing).
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        self.write_trace(&dir.join("trace.csv"))?;
        self.write_tables(dir)?;
        if self.samples.iter().any(|s| s.phase_difference.is_some()) {
            self.write_phases(&dir.join("phases.csv"))?;
        }
        let summary = Summary {
            header: self.header.clone(),
            samples: self
                .samples
                .iter()
                .map(|s| SampleSummary {
                    id: s.id,
                    final_distance: s.final_distance,
                    updates_run: s.updates_run,
                })
                .collect(),
            aggregate: self.aggregate(),
        };
        write_json(&dir.join("summary.json"), &summary)
    }

    /// Aggregate series, histogram and exceedance curve.
    pub fn write_tables(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(CliError::io(dir))?;
        let grid = self.grid();
        let agg = self.aggregate();
        let mut w = csv_writer(&dir.join("aggregate.csv"))?;
        write_row(&mut w, dir, ["update", "avg", "worst"].map(String::from))?;
        for (i, u) in grid.iter().enumerate() {
            write_row(
                &mut w,
                dir,
                [
                    u.to_string(),
                    agg.avg[i].to_string(),
                    agg.worst[i].to_string(),
                ],
            )?;
        }
        flush(w, dir)?;

        let finals = self.final_distances();
        let edges = default_edges();
        let path = dir.join("histogram.csv");
        let mut w = csv_writer(&path)?;
        write_row(
            &mut w,
            &path,
            ["lower", "upper", "count", "fraction"].map(String::from),
        )?;
        let edge_text =
            |e: Option<f64>, missing: &str| e.map_or(missing.to_string(), |e| format!("{e:e}"));
        for bin in histogram(&finals, &edges) {
            write_row(
                &mut w,
                &path,
                [
                    edge_text(bin.lower, "0"),
                    edge_text(bin.upper, "inf"),
                    bin.count.to_string(),
                    (bin.count as f64 / finals.len() as f64).to_string(),
                ],
            )?;
        }
        flush(w, &path)?;

        let path = dir.join("exceedance.csv");
        let mut w = csv_writer(&path)?;
        write_row(
            &mut w,
            &path,
            ["threshold", "fraction_above"].map(String::from),
        )?;
        for (x, f) in edges.iter().zip(exceedance(&finals, &edges)) {
            write_row(&mut w, &path, [format!("{x:e}"), f.to_string()])?;
        }
        flush(w, &path)
    }

    fn write_trace(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        write_row(
            &mut w,
            path,
            ["update", "loss", "distance", "sample"].map(String::from),
        )?;
        for s in &self.samples {
            for r in &s.records {
                write_row(
                    &mut w,
                    path,
                    [
                        r.update.to_string(),
                        r.loss.to_string(),
                        r.distance.to_string(),
                        s.id.to_string(),
                    ],
                )?;
            }
        }
        flush(w, path)
    }

    fn write_phases(&self, path: &Path) -> Result<()> {
        let mut w = csv_writer(path)?;
        write_row(
            &mut w,
            path,
            ["sample", "phase_difference", "final_distance"].map(String::from),
        )?;
        for s in &self.samples {
            if let Some(d) = s.phase_difference {
                write_row(
                    &mut w,
                    path,
                    [
                        s.id.to_string(),
                        d.to_string(),
                        s.final_distance.to_string(),
                    ],
                )?;
            }
        }
        flush(w, path)
    }

    /// Reads back a directory written by [`RunReport::write`].
    pub fn load(dir: &Path) -> Result<RunReport> {
        let path = dir.join("summary.json");
        let text = fs::read_to_string(&path).map_err(CliError::io(&path))?;
        let summary: Summary = serde_json::from_str(&text).map_err(CliError::parse(&path))?;

        let mut records: BTreeMap<usize, Vec<TrainRecord>> = BTreeMap::new();
        let path = dir.join("trace.csv");
        let mut reader = csv::Reader::from_path(&path).map_err(CliError::parse(&path))?;
        for row in reader.deserialize::<TraceRow>() {
            let row = row.map_err(CliError::parse(&path))?;
            records.entry(row.sample).or_default().push(TrainRecord {
                update: row.update,
                loss: row.loss,
                distance: row.distance,
            });
        }

        let mut phases: BTreeMap<usize, f64> = BTreeMap::new();
        let path = dir.join("phases.csv");
        if path.exists() {
            let mut reader = csv::Reader::from_path(&path).map_err(CliError::parse(&path))?;
            for row in reader.deserialize::<PhaseRow>() {
                let row = row.map_err(CliError::parse(&path))?;
                phases.insert(row.sample, row.phase_difference);
            }
        }

        let samples = summary
            .samples
            .into_iter()
            .map(|s| SampleResult {
                id: s.id,
                final_distance: s.final_distance,
                updates_run: s.updates_run,
                records: records.remove(&s.id).unwrap_or_default(),
                phase_difference: phases.get(&s.id).copied(),
            })
            .collect();
        Ok(RunReport {
            header: summary.header,
            samples,
        })
    }
}

/// Writes each run to `dir/T<steps>/` and the stacked series to `dir/sweep.csv`.
pub fn write_sweep(reports: &[RunReport], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let path = dir.join("sweep.csv");
    let mut w = csv_writer(&path)?;
    write_row(
        &mut w,
        &path,
        ["T", "update", "avg", "worst"].map(String::from),
    )?;
    for report in reports {
        let steps = report.header.steps;
        report.write(&dir.join(format!("T{steps}")))?;
        let agg = report.aggregate();
        for (i, u) in report.grid().iter().enumerate() {
            write_row(
                &mut w,
                &path,
                [
                    steps.to_string(),
                    u.to_string(),
                    agg.avg[i].to_string(),
                    agg.worst[i].to_string(),
                ],
            )?;
        }
    }
    flush(w, &path)
}

#[derive(Serialize, Deserialize)]
struct Summary {
    #[serde(flatten)]
    header: RunHeader,
    samples: Vec<SampleSummary>,
    aggregate: Aggregate,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SampleSummary {
    id: usize,
    final_distance: f64,
    updates_run: u64,
}

#[derive(Deserialize)]
struct TraceRow {
    update: u64,
    loss: f64,
    distance: f64,
    sample: usize,
}

#[derive(Deserialize)]
struct PhaseRow {
    sample: usize,
    phase_difference: f64,
    #[allow(dead_code)]
    final_distance: f64,
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(CliError::parse(path))?;
    text.push('\n');
    fs::write(path, text).map_err(CliError::io(path))
}

pub(crate) fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    let file = fs::File::create(path).map_err(CliError::io(path))?;
    Ok(csv::Writer::from_writer(file))
}

pub(crate) fn write_row<const N: usize>(
    w: &mut csv::Writer<fs::File>,
    path: &Path,
    row: [String; N],
) -> Result<()> {
    w.write_record(&row).map_err(|e| csv_error(path, e))
}

pub(crate) fn flush(mut w: csv::Writer<fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(CliError::io(path))
}

fn csv_error(path: &Path, e: csv::Error) -> CliError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => CliError::Io {
            path: path.to_path_buf(),
            source,
        },
        other => CliError::Parse {
            path: path.to_path_buf(),
            message: format!("{other:?}"),
        },
    }
}
