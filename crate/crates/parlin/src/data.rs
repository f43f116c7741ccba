//! Synthetic flight-delay data, CSV ingestion and row selection.
//!
//! The CSV format is deliberately narrow: UTF-8, LF line endings, a
//! mandatory header that must match the schema byte for byte, and plain
//! `.`-decimal reals written with Rust's shortest round-trip formatting.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use parlin_core::{ColumnStats, CoreError, PartitionSpec, Sample};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TARGET_COLUMN: &str = "delay_minutes";
pub const DEFAULT_RECORD_COUNT: u64 = 2_702_218;
pub const DEFAULT_NOISE_SIGMA: f64 = 13.149;

const READ_BUFFER: usize = 1 << 20;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error("header mismatch: expected `{expected}`, found `{found}`")]
    HeaderMismatch { expected: String, found: String },

    #[error("row {row}, column `{column}`: `{value}` is not a finite number")]
    NonNumeric { row: u64, column: String, value: String },

    #[error("row {row} has {found} cells, expected {expected}")]
    RowWidth { row: u64, expected: usize, found: usize },

    #[error("rows [{start}, {end}) are out of bounds for a file with {rows} rows")]
    OutOfBounds { start: u64, end: u64, rows: u64 },

    #[error("column `{column}` is constant over the selected rows")]
    ConstantColumn { column: String },

    #[error("invalid dataset spec: {0}")]
    InvalidSpec(String),

    #[error(transparent)]
    Core(#[from] CoreError),
}

pub type Result<T, E = DataError> = std::result::Result<T, E>;

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> DataError + '_ {
    move |source| DataError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// How one synthetic feature column is drawn.
#[derive(Debug, Clone, Copy)]
enum Draw {
    /// Uniform integer in `lo..=hi`, stored as a real.
    Int(i64, i64),
    Uniform(f64, f64),
    Normal(f64, f64),
    /// `Normal(a)` with probability `1 - p`, else `Normal(b)`.
    Mixture(f64, (f64, f64), (f64, f64)),
}

impl Draw {
    fn sample(self, rng: &mut ChaCha8Rng) -> f64 {
        match self {
            Draw::Int(lo, hi) => rng.random_range(lo..=hi) as f64,
            Draw::Uniform(lo, hi) => rng.random_range(lo..hi),
            Draw::Normal(mean, sd) => mean + sd * rng.sample::<f64, _>(StandardNormal),
            Draw::Mixture(p, a, b) => {
                let (mean, sd) = if rng.random::<f64>() < p { b } else { a };
                mean + sd * rng.sample::<f64, _>(StandardNormal)
            }
        }
    }
}

/// Built-in columns: name, generator and default true weight.
const FLIGHT_COLUMNS: [(&str, Draw, f64); 8] = [
    ("day_of_week", Draw::Int(1, 7), 0.6),
    ("month", Draw::Int(1, 12), 0.35),
    ("scheduled_departure_hour", Draw::Int(5, 23), 0.55),
    ("distance_miles", Draw::Uniform(100.0, 2800.0), 0.003),
    ("carrier_index", Draw::Int(0, 13), -0.4),
    ("origin_congestion_score", Draw::Normal(0.5, 0.2), 12.0),
    ("weather_severity_score", Draw::Mixture(0.15, (1.0, 0.5), (6.0, 2.0)), 2.0),
    ("days_to_holiday", Draw::Int(0, 60), -0.08),
];

fn column_draw(j: usize) -> Draw {
    FLIGHT_COLUMNS.get(j).map_or(Draw::Normal(0.0, 1.0), |c| c.1)
}

pub fn default_weights(n_features: usize) -> Vec<f64> {
    (0..n_features)
        .map(|j| FLIGHT_COLUMNS.get(j).map_or(1.0, |c| c.2))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CsvSchema {
    /// Feature names followed by the target column.
    pub columns: Vec<String>,
}

impl CsvSchema {
    /// The flight schema for `n_features` columns; extra columns beyond the
    /// built-in eight are named `feature_<j>`.
    pub fn flight(n_features: usize) -> Self {
        let columns = (0..n_features)
            .map(|j| {
                FLIGHT_COLUMNS
                    .get(j)
                    .map_or_else(|| format!("feature_{}", j + 1), |c| c.0.to_string())
            })
            .chain(std::iter::once(TARGET_COLUMN.to_string()))
            .collect();
        Self { columns }
    }

    pub fn from_features<S: Into<String>>(features: impl IntoIterator<Item = S>) -> Self {
        let columns = features
            .into_iter()
            .map(Into::into)
            .chain(std::iter::once(TARGET_COLUMN.to_string()))
            .collect();
        Self { columns }
    }

    pub fn n_features(&self) -> usize {
        self.columns.len().saturating_sub(1)
    }

    pub fn header(&self) -> String {
        self.columns.join(",")
    }

    pub fn validate(&self) -> Result<()> {
        if self.columns.len() < 2 {
            return Err(DataError::InvalidSpec("schema needs at least one feature column".into()));
        }
        if self.columns.last().map(String::as_str) != Some(TARGET_COLUMN) {
            return Err(DataError::InvalidSpec(format!("last column must be `{TARGET_COLUMN}`")));
        }
        if let Some(bad) = self
            .columns
            .iter()
            .find(|c| c.is_empty() || c.contains([',', '\n', '\r', '"']))
        {
            return Err(DataError::InvalidSpec(format!("invalid column name `{bad}`")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DatasetSpec {
    pub n_records: u64,
    pub n_features: usize,
    /// Minutes.
    pub true_intercept: f64,
    /// Minutes per feature unit; `None` uses the built-in weights.
    pub true_weights: Option<Vec<f64>>,
    /// Minutes.
    pub noise_sigma: f64,
    pub seed: u64,
}

impl Default for DatasetSpec {
    fn default() -> Self {
        Self {
            n_records: DEFAULT_RECORD_COUNT,
            n_features: FLIGHT_COLUMNS.len(),
            true_intercept: 10.0,
            true_weights: None,
            noise_sigma: DEFAULT_NOISE_SIGMA,
            seed: 2019,
        }
    }
}

impl DatasetSpec {
    pub fn weights(&self) -> Vec<f64> {
        self.true_weights
            .clone()
            .unwrap_or_else(|| default_weights(self.n_features))
    }

    pub fn schema(&self) -> CsvSchema {
        CsvSchema::flight(self.n_features)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_records < 2 {
            return Err(DataError::InvalidSpec("n_records must be at least 2".into()));
        }
        if self.n_features == 0 {
            return Err(DataError::InvalidSpec("n_features must be at least 1".into()));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(DataError::InvalidSpec("noise_sigma must be finite and non-negative".into()));
        }
        let w = self.weights();
        if w.len() != self.n_features {
            return Err(DataError::InvalidSpec(format!(
                "true_weights has {} entries for {} features",
                w.len(),
                self.n_features
            )));
        }
        if !self.true_intercept.is_finite() || w.iter().any(|v| !v.is_finite()) {
            return Err(DataError::InvalidSpec("true coefficients must be finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerateSummary {
    pub rows: u64,
    pub path: String,
    /// CRC-32 of the file bytes.
    pub checksum: u32,
    pub seed: u64,
}

struct ChecksumWriter<W> {
    inner: W,
    crc: crc32fast::Hasher,
}

impl<W: Write> Write for ChecksumWriter<W> {
    fn write(&mut self, buf: &[u8]) -> io::Result<usize> {
        let n = self.inner.write(buf)?;
        self.crc.update(&buf[..n]);
        Ok(n)
    }

    fn flush(&mut self) -> io::Result<()> {
        self.inner.flush()
    }
}

/// Streams `spec.n_records` rows to `path`. Rows are drawn one at a time
/// from a single seeded stream, so the bytes depend only on the spec.
pub fn generate_synthetic(spec: &DatasetSpec, path: &Path) -> Result<GenerateSummary> {
    spec.validate()?;
    let schema = spec.schema();
    let weights = spec.weights();
    let draws: Vec<Draw> = (0..spec.n_features).map(column_draw).collect();

    let file = File::create(path).map_err(io_err(path))?;
    let mut out = ChecksumWriter {
        inner: BufWriter::with_capacity(READ_BUFFER, file),
        crc: crc32fast::Hasher::new(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut features = vec![0.0; spec.n_features];
    let mut line = String::with_capacity(256);

    writeln!(out, "{}", schema.header()).map_err(io_err(path))?;
    for _ in 0..spec.n_records {
        let mut target = spec.true_intercept;
        for ((x, draw), w) in features.iter_mut().zip(&draws).zip(&weights) {
            *x = draw.sample(&mut rng);
            target += w * *x;
        }
        let noise: f64 = rng.sample(StandardNormal);
        target += spec.noise_sigma * noise;

        line.clear();
        for x in &features {
            line.push_str(&x.to_string());
            line.push(',');
        }
        line.push_str(&target.to_string());
        line.push('\n');
        out.write_all(line.as_bytes()).map_err(io_err(path))?;
    }
    out.flush().map_err(io_err(path))?;

    Ok(GenerateSummary {
        rows: spec.n_records,
        path: path.display().to_string(),
        checksum: out.crc.finalize(),
        seed: spec.seed,
    })
}

/// Line-oriented reader positioned after a validated header.
struct RowReader {
    path: PathBuf,
    reader: BufReader<File>,
    buf: Vec<u8>,
    row: u64,
}

impl RowReader {
    fn open(path: &Path, schema: &CsvSchema) -> Result<Self> {
        let file = File::open(path).map_err(io_err(path))?;
        let mut reader = BufReader::with_capacity(READ_BUFFER, file);
        let mut header = Vec::new();
        reader.read_until(b'\n', &mut header).map_err(io_err(path))?;
        if header.last() == Some(&b'\n') {
            header.pop();
        }
        let expected = schema.header();
        if header != expected.as_bytes() {
            return Err(DataError::HeaderMismatch {
                expected,
                found: String::from_utf8_lossy(&header).into_owned(),
            });
        }
        Ok(Self {
            path: path.to_path_buf(),
            reader,
            buf: Vec::with_capacity(256),
            row: 0,
        })
    }

    /// Advances to the next row; `false` at end of file.
    fn next_row(&mut self) -> Result<bool> {
        self.buf.clear();
        let n = self
            .reader
            .read_until(b'\n', &mut self.buf)
            .map_err(io_err(&self.path))?;
        if n == 0 {
            return Ok(false);
        }
        if self.buf.last() == Some(&b'\n') {
            self.buf.pop();
        }
        self.row += 1;
        Ok(true)
    }

    /// Parses the current row (index `self.row - 1`).
    fn parse(&self, schema: &CsvSchema) -> Result<Sample> {
        let row = self.row - 1;
        let width = schema.columns.len();
        let mut features = Vec::with_capacity(width - 1);
        let mut target = 0.0;
        let mut cells = 0;
        for (j, cell) in self.buf.split(|b| *b == b',').enumerate() {
            cells += 1;
            if j >= width {
                continue;
            }
            let value = std::str::from_utf8(cell)
                .ok()
                .and_then(|s| s.parse::<f64>().ok())
                .filter(|v| v.is_finite())
                .ok_or_else(|| DataError::NonNumeric {
                    row,
                    column: schema.columns[j].clone(),
                    value: String::from_utf8_lossy(cell).into_owned(),
                })?;
            if j + 1 == width {
                target = value;
            } else {
                features.push(value);
            }
        }
        if cells != width {
            return Err(DataError::RowWidth {
                row,
                expected: width,
                found: cells,
            });
        }
        Ok(Sample::new(features, target))
    }
}

pub fn check_header(path: &Path, schema: &CsvSchema) -> Result<()> {
    RowReader::open(path, schema).map(drop)
}

/// Number of data rows (header excluded) after validating the header.
pub fn count_rows(path: &Path, schema: &CsvSchema) -> Result<u64> {
    let mut reader = RowReader::open(path, schema)?;
    let mut rows = 0;
    loop {
        let chunk = reader.reader.fill_buf().map_err(io_err(path))?;
        if chunk.is_empty() {
            break;
        }
        let len = chunk.len();
        rows += chunk.iter().filter(|b| **b == b'\n').count() as u64;
        let unterminated = chunk[len - 1] != b'\n';
        reader.reader.consume(len);
        if unterminated && reader.reader.fill_buf().map_err(io_err(path))?.is_empty() {
            rows += 1;
        }
    }
    Ok(rows)
}

/// Rows `[row_start, row_end)` in file order.
pub fn load_partition(path: &Path, schema: &CsvSchema, part: &PartitionSpec) -> Result<Vec<Sample>> {
    let out_of_bounds = |rows| DataError::OutOfBounds {
        start: part.row_start,
        end: part.row_end,
        rows,
    };
    if part.row_start > part.row_end {
        return Err(out_of_bounds(0));
    }
    let mut reader = RowReader::open(path, schema)?;
    let mut samples = Vec::with_capacity(part.len() as usize);
    while reader.row < part.row_end {
        if !reader.next_row()? {
            return Err(out_of_bounds(reader.row));
        }
        if reader.row > part.row_start {
            samples.push(reader.parse(schema)?);
        }
    }
    Ok(samples)
}

/// Rows at the given indices, returned in ascending index order. Only the
/// selected rows are parsed.
pub fn load_rows(path: &Path, schema: &CsvSchema, indices: &[usize]) -> Result<Vec<Sample>> {
    let mut wanted = indices.to_vec();
    wanted.sort_unstable();
    wanted.dedup();
    let mut reader = RowReader::open(path, schema)?;
    let mut samples = Vec::with_capacity(wanted.len());
    for &idx in &wanted {
        while reader.row <= idx as u64 {
            if !reader.next_row()? {
                return Err(DataError::OutOfBounds {
                    start: idx as u64,
                    end: idx as u64 + 1,
                    rows: reader.row,
                });
            }
        }
        samples.push(reader.parse(schema)?);
    }
    Ok(samples)
}

/// Per-column mean and population standard deviation over the given rows.
pub fn column_stats(path: &Path, schema: &CsvSchema, train_indices: &[usize]) -> Result<ColumnStats> {
    if train_indices.is_empty() {
        return Err(DataError::Core(CoreError::Empty));
    }
    let rows = load_rows(path, schema, train_indices)?;
    let d = schema.n_features();
    let n = rows.len() as f64;
    let mut mean = vec![0.0; d];
    for s in &rows {
        for (m, x) in mean.iter_mut().zip(&s.features) {
            *m += x;
        }
    }
    mean.iter_mut().for_each(|m| *m /= n);
    let mut var = vec![0.0; d];
    for s in &rows {
        for ((v, x), m) in var.iter_mut().zip(&s.features).zip(&mean) {
            *v += (x - m) * (x - m);
        }
    }
    let stddev: Vec<f64> = var.iter().map(|v| (v / n).sqrt()).collect();
    if let Some(j) = stddev.iter().position(|s| *s == 0.0) {
        return Err(DataError::ConstantColumn {
            column: schema.columns[j].clone(),
        });
    }
    Ok(ColumnStats::new(mean, stddev)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use parlin_core::{compute_gram_partial, make_partitions, merge_gram, solve_normal, train_test_split, GramPartial};

    fn write(dir: &Path, name: &str, contents: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, contents).unwrap();
        p
    }

    fn small_spec(n: u64, sigma: f64) -> DatasetSpec {
        DatasetSpec {
            n_records: n,
            noise_sigma: sigma,
            seed: 99,
            ..DatasetSpec::default()
        }
    }

    #[test]
    fn flight_schema_header() {
        let s = CsvSchema::flight(8);
        assert_eq!(
            s.header(),
            "day_of_week,month,scheduled_departure_hour,distance_miles,carrier_index,\
             origin_congestion_score,weather_severity_score,days_to_holiday,delay_minutes"
        );
        assert_eq!(CsvSchema::flight(9).columns[8], "feature_9");
        assert!(s.validate().is_ok());
        assert!(CsvSchema { columns: vec!["x".into()] }.validate().is_err());
    }

    #[test]
    fn noiseless_file_recovers_true_coefficients() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let spec = small_spec(1000, 0.0);
        let summary = generate_synthetic(&spec, &path).unwrap();
        assert_eq!(summary.rows, 1000);
        let schema = spec.schema();
        let all = load_partition(&path, &schema, &PartitionSpec { partition_id: 0, row_start: 0, row_end: 1000 }).unwrap();
        let fit = solve_normal(&compute_gram_partial(8, &all).unwrap(), 0.0).unwrap().coefficients;
        let truth = std::iter::once(spec.true_intercept).chain(spec.weights());
        for (got, want) in fit.to_theta().iter().zip(truth) {
            assert!((got - want).abs() <= 1e-9 * want.abs(), "{got} vs {want}");
        }
    }

    #[test]
    fn generation_is_byte_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let spec = small_spec(500, DEFAULT_NOISE_SIGMA);
        let a = generate_synthetic(&spec, &dir.path().join("a.csv")).unwrap();
        let b = generate_synthetic(&spec, &dir.path().join("b.csv")).unwrap();
        assert_eq!(a.checksum, b.checksum);
        assert_eq!(
            std::fs::read(dir.path().join("a.csv")).unwrap(),
            std::fs::read(dir.path().join("b.csv")).unwrap()
        );
        let bytes = std::fs::read(dir.path().join("a.csv")).unwrap();
        assert_eq!(crc32fast::hash(&bytes), a.checksum);
        let c = generate_synthetic(&DatasetSpec { seed: 100, ..spec }, &dir.path().join("c.csv")).unwrap();
        assert_ne!(a.checksum, c.checksum);
    }

    #[test]
    fn partition_ranges_concatenate() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let spec = small_spec(1000, 5.0);
        generate_synthetic(&spec, &path).unwrap();
        let schema = spec.schema();
        let part = |s, e| PartitionSpec { partition_id: 0, row_start: s, row_end: e };
        let mut halves = load_partition(&path, &schema, &part(0, 500)).unwrap();
        halves.extend(load_partition(&path, &schema, &part(500, 1000)).unwrap());
        let whole = load_partition(&path, &schema, &part(0, 1000)).unwrap();
        assert_eq!(halves, whole);
        assert_eq!(whole.len() as u64, count_rows(&path, &schema).unwrap());
        assert!(whole.iter().all(|s| s.is_finite()));
        assert!(matches!(
            load_partition(&path, &schema, &part(990, 1001)),
            Err(DataError::OutOfBounds { rows: 1000, .. })
        ));
    }

    #[test]
    fn three_way_partials_merge_to_full_partial() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let spec = small_spec(900, DEFAULT_NOISE_SIGMA);
        generate_synthetic(&spec, &path).unwrap();
        let schema = spec.schema();
        let full = load_partition(&path, &schema, &PartitionSpec { partition_id: 0, row_start: 0, row_end: 900 }).unwrap();
        let full = compute_gram_partial(8, &full).unwrap();
        let merged = make_partitions(900, 3)
            .unwrap()
            .iter()
            .map(|p| compute_gram_partial(8, &load_partition(&path, &schema, p).unwrap()).unwrap())
            .fold(GramPartial::zero(8), |acc, p| merge_gram(&acc, &p).unwrap());
        for (x, y) in merged.a.iter().zip(&full.a).chain(merged.b.iter().zip(&full.b)) {
            assert!((x - y).abs() <= 1e-12 * y.abs().max(1e-300), "{x} vs {y}");
        }
    }

    #[test]
    fn load_rows_selects_in_file_order() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.csv", "a,delay_minutes\n1,10\n2,20\n3,30\n4,40");
        let schema = CsvSchema::from_features(["a"]);
        let rows = load_rows(&p, &schema, &[3, 0, 2]).unwrap();
        let targets: Vec<f64> = rows.iter().map(|s| s.target).collect();
        assert_eq!(targets, [10.0, 30.0, 40.0]);
        assert_eq!(count_rows(&p, &schema).unwrap(), 4);
        assert!(matches!(load_rows(&p, &schema, &[4]), Err(DataError::OutOfBounds { .. })));
    }

    #[test]
    fn header_mismatch_reports_both_sides() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.csv", "a,delay\n1,2\n");
        match count_rows(&p, &CsvSchema::from_features(["a"])) {
            Err(DataError::HeaderMismatch { expected, found }) => {
                assert_eq!(expected, "a,delay_minutes");
                assert_eq!(found, "a,delay");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_cells_report_row_and_column() {
        let dir = tempfile::tempdir().unwrap();
        let schema = CsvSchema::from_features(["a", "b"]);
        let p = write(dir.path(), "d.csv", "a,b,delay_minutes\n1,2,3\n4,x,6\n");
        let all = PartitionSpec { partition_id: 0, row_start: 0, row_end: 2 };
        match load_partition(&p, &schema, &all) {
            Err(DataError::NonNumeric { row, column, value }) => {
                assert_eq!((row, column.as_str(), value.as_str()), (1, "b", "x"));
            }
            other => panic!("{other:?}"),
        }
        let p = write(dir.path(), "e.csv", "a,b,delay_minutes\n1,NaN,3\n");
        assert!(matches!(load_rows(&p, &schema, &[0]), Err(DataError::NonNumeric { .. })));
        let p = write(dir.path(), "f.csv", "a,b,delay_minutes\n1,2\n");
        assert!(matches!(load_rows(&p, &schema, &[0]), Err(DataError::RowWidth { found: 2, .. })));
    }

    #[test]
    fn constant_column_is_named() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.csv", "a,b,delay_minutes\n1,5,0\n2,5,0\n3,5,0\n");
        let schema = CsvSchema::from_features(["a", "b"]);
        match column_stats(&p, &schema, &[0, 1, 2]) {
            Err(DataError::ConstantColumn { column }) => assert_eq!(column, "b"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn column_stats_hand_values() {
        let dir = tempfile::tempdir().unwrap();
        let p = write(dir.path(), "d.csv", "a,b,delay_minutes\n1,-2.5,0\n2,2.5,0\n3,-2.5,0\n4,2.5,0\n");
        let schema = CsvSchema::from_features(["a", "b"]);
        let s = column_stats(&p, &schema, &[0, 1, 2]).unwrap();
        assert_eq!(s.mean[0], 2.0);
        assert!((s.stddev[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((s.stddev[0] - 0.8165).abs() < 1e-4);
        let all = column_stats(&p, &schema, &[0, 1, 2, 3]).unwrap();
        assert!(all.mean[1].abs() <= 1e-12 * 2.5);
    }

    #[test]
    fn file_stats_agree_with_gram_moments() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let spec = small_spec(2000, DEFAULT_NOISE_SIGMA);
        generate_synthetic(&spec, &path).unwrap();
        let schema = spec.schema();
        let split = train_test_split(2000, 0.7, 5).unwrap();
        let from_file = column_stats(&path, &schema, &split.train).unwrap();
        let rows = load_rows(&path, &schema, &split.train).unwrap();
        let from_gram = ColumnStats::from_gram(&compute_gram_partial(8, &rows).unwrap()).unwrap();
        for j in 0..8 {
            assert!((from_file.mean[j] - from_gram.mean[j]).abs() <= 1e-9 * from_file.mean[j].abs().max(1.0));
            assert!((from_file.stddev[j] - from_gram.stddev[j]).abs() <= 1e-6 * from_file.stddev[j]);
        }
    }

    #[test]
    fn invalid_specs() {
        assert!(DatasetSpec { n_records: 1, ..DatasetSpec::default() }.validate().is_err());
        assert!(DatasetSpec { n_features: 0, ..DatasetSpec::default() }.validate().is_err());
        assert!(DatasetSpec { noise_sigma: -1.0, ..DatasetSpec::default() }.validate().is_err());
        assert!(DatasetSpec { true_weights: Some(vec![1.0]), ..DatasetSpec::default() }.validate().is_err());
        let dir = tempfile::tempdir().unwrap();
        let err = generate_synthetic(&DatasetSpec::default(), &dir.path().join("missing/x.csv")).unwrap_err();
        assert!(matches!(err, DataError::Io { .. }));
    }
}
