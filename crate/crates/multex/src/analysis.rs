//! Statistics over simulation runs: tagged-particle covariances and
//! empirical-measure concentration with jackknife standard errors, report
//! rows per system size, and the summary verdict on chaotic behavior.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::rng::substream_seed;
use crate::sim::{SweepRun, TrajectoryRecord, TAGGED_PER_CLASS};

/// Statistic label for the covariance of two tagged particles of one class.
pub const WITHIN_CLASS_COVARIANCE: &str = "within_class_covariance";
/// Statistic label for the covariance of tagged particles across classes.
pub const CROSS_CLASS_COVARIANCE: &str = "cross_class_covariance";
/// Statistic label for the spread of the empirical measure across runs.
pub const EMV_CONCENTRATION: &str = "emv_concentration";

/// A point estimate with a jackknife standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub stderr: f64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample covariance with denominator `n - 1`; zero when fewer than two
/// pairs remain (the leave-one-out edge case at two replications).
fn sample_covariance(pairs: &[(f64, f64)]) -> f64 {
    if pairs.len() < 2 {
        return 0.0;
    }
    let mx = mean(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
    let my = mean(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
    pairs
        .iter()
        .map(|(x, y)| (x - mx) * (y - my))
        .sum::<f64>()
        / (pairs.len() - 1) as f64
}

/// Sample standard deviation with denominator `n - 1`; zero when fewer
/// than two values remain.
fn sample_std(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let m = mean(values);
    (values.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt()
}

/// Leave-one-out jackknife standard error of an estimator.
fn jackknife<T: Copy>(samples: &[T], estimator: impl Fn(&[T]) -> f64) -> f64 {
    let r = samples.len();
    let mut leave_one_out = Vec::with_capacity(r);
    let mut buffer = Vec::with_capacity(r - 1);
    for skip in 0..r {
        buffer.clear();
        buffer.extend(
            samples
                .iter()
                .enumerate()
                .filter(|&(i, _)| i != skip)
                .map(|(_, &v)| v),
        );
        leave_one_out.push(estimator(&buffer));
    }
    let m = mean(&leave_one_out);
    let sum_squares: f64 = leave_one_out.iter().map(|v| (v - m).powi(2)).sum();
    ((r - 1) as f64 / r as f64 * sum_squares).sqrt()
}

/// Sample covariance of paired observations across replications, with a
/// jackknife standard error. Requires at least two pairs.
pub fn covariance_estimate(xs: &[f64], ys: &[f64]) -> Result<Estimate> {
    if xs.len() != ys.len() {
        return Err(Error::ShapeMismatch(format!(
            "{} x-values paired with {} y-values",
            xs.len(),
            ys.len()
        )));
    }
    if xs.len() < 2 {
        return Err(Error::TooFewReplications {
            need: 2,
            got: xs.len(),
        });
    }
    let pairs: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    Ok(Estimate {
        value: sample_covariance(&pairs),
        stderr: jackknife(&pairs, sample_covariance),
    })
}

/// Sample standard deviation across replications, with a jackknife
/// standard error. Requires at least two values.
pub fn concentration_estimate(values: &[f64]) -> Result<Estimate> {
    if values.len() < 2 {
        return Err(Error::TooFewReplications {
            need: 2,
            got: values.len(),
        });
    }
    Ok(Estimate {
        value: sample_std(values),
        stderr: jackknife(values, sample_std),
    })
}

/// One report line: a statistic at one system size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportRow {
    pub n: usize,
    pub statistic: String,
    pub class_i: usize,
    pub class_j: usize,
    pub estimate: f64,
    pub stderr: f64,
    pub replications: usize,
}

fn check_uniform_records(records: &[TrajectoryRecord]) -> Result<(usize, usize)> {
    let first = records
        .first()
        .ok_or_else(|| Error::MalformedInput("run with no replications".into()))?;
    let steps = first.emv.len();
    let classes = first.class_sizes.len();
    for record in records {
        if record.emv.len() != steps
            || record.tagged.len() != steps
            || record.class_sizes.len() != classes
        {
            return Err(Error::MalformedInput(
                "replications disagree on steps or classes".into(),
            ));
        }
    }
    Ok((steps, classes))
}

/// Final-step statistics for every run in a sweep: per class the
/// covariance of tagged particles 0 and 1, per class pair the covariance
/// of their tagged particles 0, and per class the concentration of the
/// symbol-1 frequency, each with jackknife standard errors.
pub fn report_from_runs(runs: &[SweepRun]) -> Result<Vec<ReportRow>> {
    if runs.is_empty() || runs.windows(2).any(|w| w[0].n >= w[1].n) {
        return Err(Error::UnsortedSweep);
    }
    let mut rows = Vec::new();
    for run in runs {
        let (steps, classes) = check_uniform_records(&run.records)?;
        let last = steps - 1;
        let replications = run.records.len();
        let tagged = |class: usize, particle: usize| -> Vec<f64> {
            run.records
                .iter()
                .map(|r| f64::from(r.tagged[last][class][particle]))
                .collect()
        };
        for i in 0..classes {
            let estimate = covariance_estimate(&tagged(i, 0), &tagged(i, 1))?;
            rows.push(ReportRow {
                n: run.n,
                statistic: WITHIN_CLASS_COVARIANCE.into(),
                class_i: i,
                class_j: i,
                estimate: estimate.value,
                stderr: estimate.stderr,
                replications,
            });
        }
        for i in 0..classes {
            for j in (i + 1)..classes {
                let estimate = covariance_estimate(&tagged(i, 0), &tagged(j, 0))?;
                rows.push(ReportRow {
                    n: run.n,
                    statistic: CROSS_CLASS_COVARIANCE.into(),
                    class_i: i,
                    class_j: j,
                    estimate: estimate.value,
                    stderr: estimate.stderr,
                    replications,
                });
            }
        }
        for i in 0..classes {
            let frequencies: Vec<f64> =
                run.records.iter().map(|r| r.emv[last][i][1]).collect();
            let estimate = concentration_estimate(&frequencies)?;
            rows.push(ReportRow {
                n: run.n,
                statistic: EMV_CONCENTRATION.into(),
                class_i: i,
                class_j: i,
                estimate: estimate.value,
                stderr: estimate.stderr,
                replications,
            });
        }
    }
    Ok(rows)
}

/// Writes report rows as CSV with 17-significant-digit floats.
pub fn write_report_csv(path: &Path, rows: &[ReportRow]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    writeln!(out, "n,statistic,class_i,class_j,estimate,stderr,replications")?;
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{:.16e},{:.16e},{}",
            row.n, row.statistic, row.class_i, row.class_j, row.estimate, row.stderr,
            row.replications
        )?;
    }
    out.flush()?;
    Ok(())
}

fn malformed(path: &Path, message: impl std::fmt::Display) -> Error {
    Error::MalformedInput(format!("{}: {message}", path.display()))
}

fn parse_field<T: std::str::FromStr>(path: &Path, line: usize, text: &str) -> Result<T> {
    text.parse()
        .map_err(|_| malformed(path, format!("line {line}: cannot parse {text:?}")))
}

/// Parses the `# seed=<u64> sizes=(<n>,<n>,..)` comment line.
fn parse_comment(path: &Path, line: &str) -> Result<(u64, Vec<usize>)> {
    let rest = line
        .strip_prefix("# ")
        .ok_or_else(|| malformed(path, "missing `# seed=.. sizes=..` comment line"))?;
    let mut seed = None;
    let mut sizes = None;
    for token in rest.split_whitespace() {
        if let Some(value) = token.strip_prefix("seed=") {
            seed = Some(parse_field(path, 1, value)?);
        } else if let Some(value) = token.strip_prefix("sizes=") {
            let inner = value
                .strip_prefix('(')
                .and_then(|v| v.strip_suffix(')'))
                .ok_or_else(|| malformed(path, "sizes must look like (10,10)"))?;
            let parsed: Result<Vec<usize>> = inner
                .split(',')
                .map(|v| parse_field(path, 1, v.trim()))
                .collect();
            sizes = Some(parsed?);
        }
    }
    match (seed, sizes) {
        (Some(seed), Some(sizes)) if !sizes.is_empty() => Ok((seed, sizes)),
        _ => Err(malformed(path, "comment line must carry seed= and sizes=")),
    }
}

struct CsvBody {
    seed: u64,
    sizes: Vec<usize>,
    rows: Vec<Vec<String>>,
}

fn read_csv_body(path: &Path, expected_header: &str) -> Result<CsvBody> {
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines();
    let comment = lines
        .next()
        .transpose()?
        .ok_or_else(|| malformed(path, "empty file"))?;
    let (seed, sizes) = parse_comment(path, &comment)?;
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| malformed(path, "missing header row"))?;
    if header != expected_header {
        return Err(malformed(
            path,
            format!("header {header:?}, expected {expected_header:?}"),
        ));
    }
    let columns = expected_header.split(',').count();
    let mut rows = Vec::new();
    for (index, line) in lines.enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<String> = line.split(',').map(str::to_owned).collect();
        if fields.len() != columns {
            return Err(malformed(
                path,
                format!("line {}: {} fields, expected {columns}", index + 3, fields.len()),
            ));
        }
        rows.push(fields);
    }
    if rows.is_empty() {
        return Err(malformed(path, "no data rows"));
    }
    Ok(CsvBody { seed, sizes, rows })
}

/// Dense grid filler that rejects duplicate and missing entries.
struct Grid<T> {
    cells: Vec<Option<T>>,
    dims: [usize; 4],
}

impl<T: Copy> Grid<T> {
    fn new(dims: [usize; 4]) -> Self {
        Grid {
            cells: vec![None; dims.iter().product()],
            dims,
        }
    }

    fn offset(&self, index: [usize; 4]) -> Option<usize> {
        let mut offset = 0;
        for (i, d) in index.iter().zip(self.dims) {
            if *i >= d {
                return None;
            }
            offset = offset * d + i;
        }
        Some(offset)
    }

    fn fill(&mut self, index: [usize; 4], value: T) -> std::result::Result<(), String> {
        let offset = self
            .offset(index)
            .ok_or_else(|| format!("index {index:?} out of range"))?;
        if self.cells[offset].is_some() {
            return Err(format!("duplicate entry at {index:?}"));
        }
        self.cells[offset] = Some(value);
        Ok(())
    }

    fn get(&self, index: [usize; 4]) -> std::result::Result<T, String> {
        self.offset(index)
            .and_then(|o| self.cells[o])
            .ok_or_else(|| format!("missing entry at {index:?}"))
    }
}

/// Reads the trajectory/tagged CSV pair written for one run and rebuilds
/// its records exactly; per-replication seeds are reconstructed from the
/// file seed by the same substream rule the simulator uses.
pub fn read_run_pair(trajectories: &Path, tagged: &Path) -> Result<(u64, Vec<TrajectoryRecord>)> {
    let emv_body = read_csv_body(trajectories, "replication,step,class,symbol,frequency")?;
    let tag_body = read_csv_body(tagged, "replication,step,class,particle,state")?;
    if emv_body.seed != tag_body.seed || emv_body.sizes != tag_body.sizes {
        return Err(malformed(tagged, "seed or sizes disagree with the trajectory file"));
    }
    let seed = emv_body.seed;
    let classes = emv_body.sizes.len();

    let mut replications = 0usize;
    let mut steps = 0usize;
    let parse_key = |path: &Path, fields: &[String]| -> Result<[usize; 4]> {
        Ok([
            parse_field(path, 0, &fields[0])?,
            parse_field(path, 0, &fields[1])?,
            parse_field(path, 0, &fields[2])?,
            parse_field(path, 0, &fields[3])?,
        ])
    };
    let mut emv_rows = Vec::with_capacity(emv_body.rows.len());
    for fields in &emv_body.rows {
        let key = parse_key(trajectories, fields)?;
        let value: f64 = parse_field(trajectories, 0, &fields[4])?;
        replications = replications.max(key[0] + 1);
        steps = steps.max(key[1] + 1);
        emv_rows.push((key, value));
    }
    let mut tag_rows = Vec::with_capacity(tag_body.rows.len());
    for fields in &tag_body.rows {
        let key = parse_key(tagged, fields)?;
        let value: u8 = parse_field(tagged, 0, &fields[4])?;
        if value > 1 {
            return Err(malformed(tagged, format!("state {value} is not binary")));
        }
        replications = replications.max(key[0] + 1);
        steps = steps.max(key[1] + 1);
        tag_rows.push((key, value));
    }

    let mut emv_grid = Grid::new([replications, steps, classes, 2]);
    for (key, value) in emv_rows {
        emv_grid.fill(key, value).map_err(|m| malformed(trajectories, m))?;
    }
    let mut tag_grid = Grid::new([replications, steps, classes, TAGGED_PER_CLASS]);
    for (key, value) in tag_rows {
        tag_grid.fill(key, value).map_err(|m| malformed(tagged, m))?;
    }

    let mut records = Vec::with_capacity(replications);
    for r in 0..replications {
        let mut emv = Vec::with_capacity(steps);
        let mut tags = Vec::with_capacity(steps);
        for t in 0..steps {
            let mut emv_classes = Vec::with_capacity(classes);
            let mut tag_classes = Vec::with_capacity(classes);
            for i in 0..classes {
                let freqs: Result<Vec<f64>> = (0..2)
                    .map(|s| emv_grid.get([r, t, i, s]).map_err(|m| malformed(trajectories, m)))
                    .collect();
                emv_classes.push(freqs?);
                let states: Result<Vec<u8>> = (0..TAGGED_PER_CLASS)
                    .map(|p| tag_grid.get([r, t, i, p]).map_err(|m| malformed(tagged, m)))
                    .collect();
                tag_classes.push(states?);
            }
            emv.push(emv_classes);
            tags.push(tag_classes);
        }
        records.push(TrajectoryRecord {
            replication: r,
            seed: substream_seed(seed, r as u64),
            class_sizes: emv_body.sizes.clone(),
            emv,
            tagged: tags,
        });
    }
    Ok((seed, records))
}

/// Trajectory file name for a sweep entry at size `n`.
pub fn trajectory_file_name(n: usize) -> String {
    format!("trajectories_n{n}.csv")
}

/// Tagged file name for a sweep entry at size `n`.
pub fn tagged_file_name(n: usize) -> String {
    format!("tagged_n{n}.csv")
}

/// Discovers and reads every `trajectories_n<N>.csv` / `tagged_n<N>.csv`
/// pair in a directory, sorted by `N`. Class sizes must be uniform and
/// match the `N` in the file name.
pub fn read_sweep_dir(dir: &Path) -> Result<Vec<SweepRun>> {
    let mut found: Vec<(usize, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let entry = entry?;
        let name = entry.file_name();
        let Some(name) = name.to_str() else { continue };
        if let Some(n) = name
            .strip_prefix("trajectories_n")
            .and_then(|rest| rest.strip_suffix(".csv"))
            .and_then(|digits| digits.parse::<usize>().ok())
        {
            found.push((n, entry.path()));
        }
    }
    if found.is_empty() {
        return Err(Error::MalformedInput(format!(
            "no trajectories_n<N>.csv files in {}",
            dir.display()
        )));
    }
    found.sort();
    let mut runs = Vec::with_capacity(found.len());
    for (n, trajectory_path) in found {
        let tagged_path = dir.join(tagged_file_name(n));
        if !tagged_path.exists() {
            return Err(Error::MalformedInput(format!(
                "{} has no matching {}",
                trajectory_path.display(),
                tagged_file_name(n)
            )));
        }
        let (seed, records) = read_run_pair(&trajectory_path, &tagged_path)?;
        if records[0].class_sizes.iter().any(|&size| size != n) {
            return Err(malformed(
                &trajectory_path,
                format!("class sizes {:?} do not match file name size {n}", records[0].class_sizes),
            ));
        }
        runs.push(SweepRun { n, seed, records });
    }
    Ok(runs)
}

/// First-versus-last comparison of one statistic across the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayEntry {
    pub statistic: String,
    pub class_i: usize,
    pub class_j: usize,
    pub n_first: usize,
    pub estimate_first: f64,
    pub stderr_first: f64,
    pub n_last: usize,
    pub estimate_last: f64,
    pub stderr_last: f64,
}

/// Verdict over a sweep: per-check flags, per-statistic decay details, and
/// the overall pass bit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub n_values: Vec<usize>,
    pub replications: usize,
    pub seeds: Vec<u64>,
    pub flags: BTreeMap<String, bool>,
    pub decay: Vec<DecayEntry>,
    pub all_pass: bool,
}

/// Builds the summary verdict for a sweep from its report rows.
///
/// Flags: `terminal_independence` requires every covariance at the
/// largest size to sit within four standard errors of zero;
/// `no_covariance_growth` (multi-size sweeps only) requires the largest
/// size's covariance magnitudes not to exceed the smallest size's by more
/// than twice the combined standard error; `concentration_decreasing`
/// (multi-size sweeps only) requires the empirical-measure spread to
/// decrease strictly at every size increase.
pub fn summarize(runs: &[SweepRun], rows: &[ReportRow]) -> Result<Summary> {
    if runs.is_empty() {
        return Err(Error::UnsortedSweep);
    }
    let replications = runs[0].records.len();
    if runs.iter().any(|r| r.records.len() != replications) {
        return Err(Error::MalformedInput(
            "sweep entries disagree on replication count".into(),
        ));
    }
    let n_values: Vec<usize> = runs.iter().map(|r| r.n).collect();
    let seeds: Vec<u64> = runs.iter().map(|r| r.seed).collect();
    let max_n = *n_values.last().expect("non-empty sweep");

    let mut groups: BTreeMap<(String, usize, usize), Vec<&ReportRow>> = BTreeMap::new();
    for row in rows {
        groups
            .entry((row.statistic.clone(), row.class_i, row.class_j))
            .or_default()
            .push(row);
    }
    for group in groups.values_mut() {
        group.sort_by_key(|row| row.n);
    }

    let mut flags = BTreeMap::new();
    let terminal = rows
        .iter()
        .filter(|row| row.n == max_n && row.statistic.ends_with("covariance"))
        .all(|row| row.estimate.abs() <= 4.0 * row.stderr);
    flags.insert("terminal_independence".to_string(), terminal);

    if n_values.len() > 1 {
        let no_growth = groups
            .iter()
            .filter(|((statistic, _, _), _)| statistic.ends_with("covariance"))
            .all(|(_, group)| {
                let first = group.first().expect("non-empty group");
                let last = group.last().expect("non-empty group");
                let combined = (first.stderr.powi(2) + last.stderr.powi(2)).sqrt();
                last.estimate.abs() <= first.estimate.abs() + 2.0 * combined
            });
        flags.insert("no_covariance_growth".to_string(), no_growth);

        let concentrating = groups
            .iter()
            .filter(|((statistic, _, _), _)| statistic == EMV_CONCENTRATION)
            .all(|(_, group)| {
                group
                    .windows(2)
                    .all(|pair| pair[1].estimate < pair[0].estimate)
            });
        flags.insert("concentration_decreasing".to_string(), concentrating);
    }

    let decay = groups
        .iter()
        .map(|((statistic, class_i, class_j), group)| {
            let first = group.first().expect("non-empty group");
            let last = group.last().expect("non-empty group");
            DecayEntry {
                statistic: statistic.clone(),
                class_i: *class_i,
                class_j: *class_j,
                n_first: first.n,
                estimate_first: first.estimate,
                stderr_first: first.stderr,
                n_last: last.n,
                estimate_last: last.estimate,
                stderr_last: last.stderr,
            }
        })
        .collect();

    let all_pass = flags.values().all(|&pass| pass);
    Ok(Summary {
        n_values,
        replications,
        seeds,
        flags,
        decay,
        all_pass,
    })
}

/// Writes the summary as pretty-printed JSON.
pub fn write_summary_json(path: &Path, summary: &Summary) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, summary)
        .map_err(|e| Error::MalformedInput(format!("summary JSON: {e}")))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}
