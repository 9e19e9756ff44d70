//! Typed loading of headed CSV files.

use std::path::Path;

use super::DataError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnSchema {
    pub name: &'static str,
    pub kind: ColumnKind,
    /// Rows with a missing value in a used column are dropped.
    pub used: bool,
}

impl ColumnSchema {
    pub const fn numeric(name: &'static str, used: bool) -> Self {
        Self {
            name,
            kind: ColumnKind::Numeric,
            used,
        }
    }

    pub const fn categorical(name: &'static str, used: bool) -> Self {
        Self {
            name,
            kind: ColumnKind::Categorical,
            used,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    /// Missing values in unused columns are NaN.
    Numeric(Vec<f64>),
    Categorical(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawColumn {
    pub name: String,
    pub data: ColumnData,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    pub source: String,
    pub columns: Vec<RawColumn>,
    pub rows: usize,
    /// Rows removed because a used column had a missing value.
    pub dropped_rows: usize,
}

impl RawTable {
    fn column(&self, name: &str) -> Result<&RawColumn, DataError> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .ok_or_else(|| DataError::Schema {
                path: self.source.clone(),
                missing: vec![name.to_string()],
                extra: vec![],
            })
    }

    pub fn numeric(&self, name: &str) -> Result<&[f64], DataError> {
        match &self.column(name)?.data {
            ColumnData::Numeric(v) => Ok(v),
            ColumnData::Categorical(_) => Err(DataError::Invalid(format!(
                "column `{name}` of {} is categorical",
                self.source
            ))),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<&[String], DataError> {
        match &self.column(name)?.data {
            ColumnData::Categorical(v) => Ok(v),
            ColumnData::Numeric(_) => Err(DataError::Invalid(format!(
                "column `{name}` of {} is numeric",
                self.source
            ))),
        }
    }
}

fn is_missing(field: &str) -> bool {
    field.is_empty() || field == "?"
}

/// Loads a headed CSV whose header contains exactly the schema's columns, in
/// any order.
pub fn load_csv(path: &Path, schema: &[ColumnSchema]) -> Result<RawTable, DataError> {
    let source = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| DataError::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(std::io::BufReader::new(file));
    let header: Vec<String> = reader.headers()?.iter().map(str::to_string).collect();

    let missing: Vec<String> = schema
        .iter()
        .filter(|c| !header.iter().any(|h| h == c.name))
        .map(|c| c.name.to_string())
        .collect();
    let extra: Vec<String> = header
        .iter()
        .filter(|h| !schema.iter().any(|c| c.name == h.as_str()))
        .cloned()
        .collect();
    if !missing.is_empty() || !extra.is_empty() {
        return Err(DataError::Schema {
            path: source,
            missing,
            extra,
        });
    }
    let positions: Vec<usize> = schema
        .iter()
        .map(|c| header.iter().position(|h| h == c.name).unwrap())
        .collect();

    let mut columns: Vec<ColumnData> = schema
        .iter()
        .map(|c| match c.kind {
            ColumnKind::Numeric => ColumnData::Numeric(Vec::new()),
            ColumnKind::Categorical => ColumnData::Categorical(Vec::new()),
        })
        .collect();
    let mut rows = 0;
    let mut dropped = 0;
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let skip = schema
            .iter()
            .zip(&positions)
            .any(|(c, &p)| c.used && is_missing(&record[p]));
        if skip {
            dropped += 1;
            continue;
        }
        for ((c, &p), out) in schema.iter().zip(&positions).zip(columns.iter_mut()) {
            let field = &record[p];
            match out {
                ColumnData::Numeric(v) => {
                    let parsed = if is_missing(field) {
                        f64::NAN
                    } else {
                        field.parse().map_err(|_| DataError::Malformed {
                            path: source.clone(),
                            row: line + 1,
                            message: format!("`{field}` in column `{}` is not numeric", c.name),
                        })?
                    };
                    v.push(parsed);
                }
                ColumnData::Categorical(v) => v.push(field.to_string()),
            }
        }
        rows += 1;
    }
    Ok(RawTable {
        source,
        columns: schema
            .iter()
            .zip(columns)
            .map(|(c, data)| RawColumn {
                name: c.name.to_string(),
                data,
            })
            .collect(),
        rows,
        dropped_rows: dropped,
    })
}
