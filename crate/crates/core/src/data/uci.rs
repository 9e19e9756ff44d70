//! Conversion of the UCI distribution files into headed CSVs.
//!
//! The German credit file is space separated with coded categorical values
//! (`A11`, `A93`, ...) and no header. Adult ships as a training file and a
//! test file; the test file starts with a `|1x3 Cross validator` line and its
//! labels carry a trailing period.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::DataError;

pub const GERMAN_COLUMNS: [&str; 21] = [
    "checking_status",
    "duration",
    "credit_history",
    "purpose",
    "amount",
    "savings_status",
    "employment",
    "installment_rate",
    "personal_status",
    "other_parties",
    "residence_since",
    "property",
    "age",
    "other_payment_plans",
    "housing",
    "existing_credits",
    "job",
    "num_dependents",
    "own_telephone",
    "foreign_worker",
    "risk",
];

pub const ADULT_COLUMNS: [&str; 15] = [
    "age",
    "workclass",
    "fnlwgt",
    "education",
    "education_num",
    "marital_status",
    "occupation",
    "relationship",
    "race",
    "sex",
    "capital_gain",
    "capital_loss",
    "hours_per_week",
    "native_country",
    "income",
];

const UCI_BASE: &str = "https://archive.ics.uci.edu/ml/machine-learning-databases";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetId {
    German,
    Adult,
}

impl DatasetId {
    /// Record count of the full distribution.
    pub fn expected_records(self) -> usize {
        match self {
            DatasetId::German => 1000,
            DatasetId::Adult => 48_842,
        }
    }

    /// Distribution file names, in the order [`convert`] expects them.
    pub fn source_files(self) -> &'static [&'static str] {
        match self {
            DatasetId::German => &["german.data"],
            DatasetId::Adult => &["adult.data", "adult.test"],
        }
    }

    pub fn source_urls(self) -> Vec<String> {
        let dir = match self {
            DatasetId::German => "statlog/german",
            DatasetId::Adult => "adult",
        };
        self.source_files()
            .iter()
            .map(|f| format!("{UCI_BASE}/{dir}/{f}"))
            .collect()
    }

    /// File name of the headed CSV inside a data directory.
    pub fn csv_name(self) -> &'static str {
        match self {
            DatasetId::German => "german.csv",
            DatasetId::Adult => "adult.csv",
        }
    }

    pub fn csv_path(self, dir: &Path) -> PathBuf {
        dir.join(self.csv_name())
    }

    pub fn provenance_path(self, dir: &Path) -> PathBuf {
        dir.join(format!("{}.fetch.json", self.name()))
    }

    pub fn name(self) -> &'static str {
        match self {
            DatasetId::German => "german",
            DatasetId::Adult => "adult",
        }
    }
}

impl fmt::Display for DatasetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DatasetId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "german" => Ok(DatasetId::German),
            "adult" => Ok(DatasetId::Adult),
            other => Err(format!("unknown dataset `{other}` (expected german or adult)")),
        }
    }
}

/// Converts the raw distribution files (ordered as [`DatasetId::source_files`])
/// into a headed CSV. Returns the CSV text and its record count.
pub fn convert(id: DatasetId, files: &[&str]) -> Result<(String, usize), DataError> {
    if files.len() != id.source_files().len() {
        return Err(DataError::Invalid(format!(
            "{id} needs {} source files, got {}",
            id.source_files().len(),
            files.len()
        )));
    }
    let (columns, split_comma): (&[&str], bool) = match id {
        DatasetId::German => (&GERMAN_COLUMNS, false),
        DatasetId::Adult => (&ADULT_COLUMNS, true),
    };
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(columns)?;
    let mut records = 0;
    for (file, name) in files.iter().zip(id.source_files()) {
        for (lineno, line) in file.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('|') {
                continue;
            }
            let fields: Vec<&str> = if split_comma {
                line.split(',').map(str::trim).collect()
            } else {
                line.split_whitespace().collect()
            };
            if fields.len() != columns.len() {
                return Err(DataError::Malformed {
                    path: name.to_string(),
                    row: lineno + 1,
                    message: format!("expected {} fields, found {}", columns.len(), fields.len()),
                });
            }
            w.write_record(&fields)?;
            records += 1;
        }
    }
    let bytes = w.into_inner().map_err(|e| DataError::Invalid(e.to_string()))?;
    Ok((String::from_utf8(bytes).expect("csv output is utf-8"), records))
}

/// Metadata written next to a fetched dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FetchProvenance {
    pub dataset: DatasetId,
    pub sources: Vec<String>,
    pub source_bytes: Vec<usize>,
    pub records: usize,
    pub csv: String,
}

/// Converts `files`, checks the record count and writes `<dest>/<id>.csv`
/// plus `<dest>/<id>.fetch.json`.
///
/// On a count mismatch nothing is left behind and [`DataError::Integrity`]
/// is returned.
pub fn install(
    id: DatasetId,
    sources: &[String],
    files: &[Vec<u8>],
    dest: &Path,
) -> Result<FetchProvenance, DataError> {
    let text: Vec<String> = files
        .iter()
        .map(|b| String::from_utf8_lossy(b).into_owned())
        .collect();
    let refs: Vec<&str> = text.iter().map(String::as_str).collect();
    let (csv_text, records) = convert(id, &refs)?;
    std::fs::create_dir_all(dest).map_err(|e| DataError::io(dest, e))?;
    let csv_path = id.csv_path(dest);
    std::fs::write(&csv_path, &csv_text).map_err(|e| DataError::io(&csv_path, e))?;
    if records != id.expected_records() {
        let _ = std::fs::remove_file(&csv_path);
        return Err(DataError::Integrity {
            dataset: id.to_string(),
            expected: id.expected_records(),
            found: records,
        });
    }
    let prov = FetchProvenance {
        dataset: id,
        sources: sources.to_vec(),
        source_bytes: files.iter().map(Vec::len).collect(),
        records,
        csv: id.csv_name().to_string(),
    };
    let side = id.provenance_path(dest);
    let json = serde_json::to_string_pretty(&prov)?;
    std::fs::write(&side, json + "\n").map_err(|e| DataError::io(&side, e))?;
    Ok(prov)
}

#[cfg(test)]
mod tests {
    use super::*;

    const GERMAN_LINE: &str =
        "A11 6 A34 A43 1169 A65 A75 4 A93 A101 4 A121 67 A143 A152 2 A173 1 A192 A201 1\n";

    #[test]
    fn adult_test_header_and_blank_lines_are_skipped() {
        let train = "39, State-gov, 77516, Bachelors, 13, Never-married, Adm-clerical, \
                     Not-in-family, White, Male, 2174, 0, 40, United-States, <=50K\n\n";
        let test = "|1x3 Cross validator\n25, Private, 226802, 11th, 7, Never-married, \
                    Machine-op-inspct, Own-child, Black, Male, 0, 0, 40, United-States, <=50K.\n";
        let (csv, n) = convert(DatasetId::Adult, &[train, test]).unwrap();
        assert_eq!(n, 2);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], ADULT_COLUMNS.join(","));
        assert!(lines[2].ends_with("<=50K."));
    }

    #[test]
    fn wrong_count_removes_file() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![GERMAN_LINE.repeat(3).into_bytes()];
        let err = install(DatasetId::German, &["local".into()], &files, dir.path()).unwrap_err();
        assert!(matches!(err, DataError::Integrity { found: 3, .. }));
        assert!(!DatasetId::German.csv_path(dir.path()).exists());
    }

    #[test]
    fn full_count_is_installed() {
        let dir = tempfile::tempdir().unwrap();
        let files = vec![GERMAN_LINE.repeat(1000).into_bytes()];
        let prov = install(DatasetId::German, &["local".into()], &files, dir.path()).unwrap();
        assert_eq!(prov.records, 1000);
        assert!(dir.path().join("german.fetch.json").exists());
    }

    #[test]
    fn field_count_is_checked() {
        assert!(convert(DatasetId::German, &["A11 6 A34\n"]).is_err());
    }
}
