use std::path::PathBuf;

use parlin_core::{
    compute_gradient_partial, compute_gram_partial, predict, rmse, train_test_split, GramPartial, ModelCoefficients,
    PartitionSpec, Sample,
};

use super::Result;
use crate::data::{self, CsvSchema};
use crate::protocol::Scope;

/// The rows one worker owns: a train range and a test range over the
/// seeded split. Rows are read from the shared file on first use.
#[derive(Debug)]
pub struct Shard {
    path: PathBuf,
    schema: CsvSchema,
    n_records: u64,
    split_seed: u64,
    split_ratio: f64,
    train_part: PartitionSpec,
    test_part: PartitionSpec,
    train: Option<Vec<Sample>>,
    test: Option<Vec<Sample>>,
}

impl Shard {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        path: PathBuf,
        schema: CsvSchema,
        n_records: u64,
        split_seed: u64,
        split_ratio: f64,
        train_part: PartitionSpec,
        test_part: PartitionSpec,
    ) -> Self {
        Self {
            path,
            schema,
            n_records,
            split_seed,
            split_ratio,
            train_part,
            test_part,
            train: None,
            test: None,
        }
    }

    /// Checks that the file opens and carries the expected header.
    pub fn check_dataset(&self) -> Result<()> {
        self.schema.validate()?;
        Ok(data::check_header(&self.path, &self.schema)?)
    }

    fn load(&mut self, scope: Scope) -> Result<&[Sample]> {
        let loaded = match scope {
            Scope::Train => self.train.is_some(),
            Scope::Test => self.test.is_some(),
        };
        if !loaded {
            let split = train_test_split(self.n_records as usize, self.split_ratio, self.split_seed)?;
            let (indices, part) = match scope {
                Scope::Train => (split.train, self.train_part),
                Scope::Test => (split.test, self.test_part),
            };
            let selected = indices.get(part.range()).ok_or(data::DataError::OutOfBounds {
                start: part.row_start,
                end: part.row_end,
                rows: indices.len() as u64,
            })?;
            let rows = data::load_rows(&self.path, &self.schema, selected)?;
            log::debug!("loaded {} {:?} rows from {}", rows.len(), scope, self.path.display());
            match scope {
                Scope::Train => self.train = Some(rows),
                Scope::Test => self.test = Some(rows),
            }
        }
        Ok(match scope {
            Scope::Train => self.train.as_deref().unwrap_or_default(),
            Scope::Test => self.test.as_deref().unwrap_or_default(),
        })
    }

    pub fn gram(&mut self, scope: Scope) -> Result<GramPartial> {
        let d = self.schema.n_features();
        Ok(compute_gram_partial(d, self.load(scope)?)?)
    }

    pub fn gradient(&mut self, theta: &ModelCoefficients) -> Result<(Vec<f64>, u64)> {
        Ok(compute_gradient_partial(self.load(Scope::Train)?, theta)?)
    }

    /// Squared error of `theta` over the test rows.
    pub fn sse(&mut self, theta: &ModelCoefficients) -> Result<(f64, u64)> {
        let rows = self.load(Scope::Test)?;
        let predictions = rows
            .iter()
            .map(|s| predict(theta, &s.features))
            .collect::<Result<Vec<f64>, _>>()?;
        let observations: Vec<f64> = rows.iter().map(|s| s.target).collect();
        let report = rmse(&predictions, &observations)?;
        Ok((report.sse, report.n_test))
    }
}
