//! German credit risk preprocessing.
//!
//! Output features, in order: `age` (years), `job` (0 unskilled
//! non-resident .. 3 highly qualified), `amount`, `duration` (months) and
//! `gender` (male = 1). The target is 1 for a bad credit risk. `gender` is
//! the protected attribute.

use std::path::Path;

use super::raw::{load_csv, ColumnSchema, RawTable};
use super::{DataError, Dataset, Feature, FeatureKind, Provenance};

pub const VERSION: &str = "german-v1";

pub const SCHEMA: [ColumnSchema; 21] = [
    ColumnSchema::categorical("checking_status", false),
    ColumnSchema::numeric("duration", true),
    ColumnSchema::categorical("credit_history", false),
    ColumnSchema::categorical("purpose", false),
    ColumnSchema::numeric("amount", true),
    ColumnSchema::categorical("savings_status", false),
    ColumnSchema::categorical("employment", false),
    ColumnSchema::numeric("installment_rate", false),
    ColumnSchema::categorical("personal_status", true),
    ColumnSchema::categorical("other_parties", false),
    ColumnSchema::numeric("residence_since", false),
    ColumnSchema::categorical("property", false),
    ColumnSchema::numeric("age", true),
    ColumnSchema::categorical("other_payment_plans", false),
    ColumnSchema::categorical("housing", false),
    ColumnSchema::numeric("existing_credits", false),
    ColumnSchema::categorical("job", true),
    ColumnSchema::numeric("num_dependents", false),
    ColumnSchema::categorical("own_telephone", false),
    ColumnSchema::categorical("foreign_worker", false),
    ColumnSchema::numeric("risk", true),
];

pub const PROTECTED: &str = "gender";

pub fn load(path: &Path) -> Result<Dataset, DataError> {
    preprocess(&load_csv(path, &SCHEMA)?)
}

fn job_level(code: &str) -> Option<f64> {
    match code {
        "A171" => Some(0.0),
        "A172" => Some(1.0),
        "A173" => Some(2.0),
        "A174" => Some(3.0),
        _ => None,
    }
}

fn is_male(code: &str) -> Option<f64> {
    match code {
        "A91" | "A93" | "A94" => Some(1.0),
        "A92" | "A95" => Some(0.0),
        _ => None,
    }
}

pub fn preprocess(raw: &RawTable) -> Result<Dataset, DataError> {
    let age = raw.numeric("age")?;
    let job = raw.categorical("job")?;
    let amount = raw.numeric("amount")?;
    let duration = raw.numeric("duration")?;
    let status = raw.categorical("personal_status")?;
    let risk = raw.numeric("risk")?;

    let bad = |row: usize, message: String| DataError::Malformed {
        path: raw.source.clone(),
        row,
        message,
    };
    let mut x = Vec::with_capacity(raw.rows * 5);
    let mut y = Vec::with_capacity(raw.rows);
    for i in 0..raw.rows {
        let j = job_level(&job[i]).ok_or_else(|| bad(i, format!("unknown job code `{}`", job[i])))?;
        let g = is_male(&status[i])
            .ok_or_else(|| bad(i, format!("unknown personal status `{}`", status[i])))?;
        x.extend_from_slice(&[age[i], j, amount[i], duration[i], g]);
        y.push(match risk[i] as i64 {
            1 => 0,
            2 => 1,
            _ => return Err(bad(i, format!("risk must be 1 or 2, found {}", risk[i]))),
        });
    }
    let features = vec![
        Feature::new("age", FeatureKind::Continuous),
        Feature::new("job", FeatureKind::Ordinal),
        Feature::new("amount", FeatureKind::Continuous),
        Feature::new("duration", FeatureKind::Continuous),
        Feature::new(PROTECTED, FeatureKind::Boolean),
    ];
    let mut data = Dataset::new(features, x, y)?.with_protected(PROTECTED)?;
    let (lo, hi) = age.iter().fold((f64::MAX, f64::MIN), |(l, h), &a| (l.min(a), h.max(a)));
    data.provenance = Provenance {
        source: raw.source.clone(),
        dropped_rows: raw.dropped_rows,
        version: VERSION.into(),
        seed: None,
        notes: vec![format!("age range [{lo}, {hi}]")],
    };
    Ok(data)
}
