//! Adult income preprocessing.
//!
//! Twelve features, in order:
//!
//! | feature | encoding |
//! |---|---|
//! | `age` | continuous |
//! | `race` | White = 1, other = 0 |
//! | `sex` | Male = 1, Female = 0 |
//! | `education` | 1 below high school, 2 HS-grad, 3 some college or associate, 4 bachelors, 5 masters / professional / doctorate |
//! | `native_country` | United-States = 1 |
//! | `marital_status` | 1 for a married couple (civilian or armed-forces spouse present) |
//! | `relationship` | 1 husband or wife, 2 own child, 3 other relative, 4 not in family, 5 unmarried |
//! | `employment` | 1 government, 2 private, 3 self-employed, 4 without pay, 5 never worked |
//! | `fnlwgt` | continuous |
//! | `capital_loss` | 1 if positive |
//! | `capital_gain` | 1 if positive |
//! | `hours_per_week` | continuous |
//!
//! The target is 1 for income above 50K; test-file labels with a trailing
//! period are accepted. `race` is the protected attribute. Rows with `?` in
//! any used column are dropped.

use std::path::Path;

use super::raw::{load_csv, ColumnSchema, RawTable};
use super::{DataError, Dataset, Feature, FeatureKind, Provenance};

pub const VERSION: &str = "adult-v1";

pub const SCHEMA: [ColumnSchema; 15] = [
    ColumnSchema::numeric("age", true),
    ColumnSchema::categorical("workclass", true),
    ColumnSchema::numeric("fnlwgt", true),
    ColumnSchema::categorical("education", true),
    ColumnSchema::numeric("education_num", false),
    ColumnSchema::categorical("marital_status", true),
    ColumnSchema::categorical("occupation", false),
    ColumnSchema::categorical("relationship", true),
    ColumnSchema::categorical("race", true),
    ColumnSchema::categorical("sex", true),
    ColumnSchema::numeric("capital_gain", true),
    ColumnSchema::numeric("capital_loss", true),
    ColumnSchema::numeric("hours_per_week", true),
    ColumnSchema::categorical("native_country", true),
    ColumnSchema::categorical("income", true),
];

pub const PROTECTED: &str = "race";

pub fn load(path: &Path) -> Result<Dataset, DataError> {
    preprocess(&load_csv(path, &SCHEMA)?)
}

pub fn education_level(s: &str) -> Option<f64> {
    Some(match s {
        "Preschool" | "1st-4th" | "5th-6th" | "7th-8th" | "9th" | "10th" | "11th" | "12th" => 1.0,
        "HS-grad" => 2.0,
        "Some-college" | "Assoc-voc" | "Assoc-acdm" => 3.0,
        "Bachelors" => 4.0,
        "Masters" | "Prof-school" | "Doctorate" => 5.0,
        _ => return None,
    })
}

pub fn relationship_level(s: &str) -> Option<f64> {
    Some(match s {
        "Husband" | "Wife" => 1.0,
        "Own-child" => 2.0,
        "Other-relative" => 3.0,
        "Not-in-family" => 4.0,
        "Unmarried" => 5.0,
        _ => return None,
    })
}

pub fn employment_level(s: &str) -> Option<f64> {
    Some(match s {
        "Federal-gov" | "State-gov" | "Local-gov" => 1.0,
        "Private" => 2.0,
        "Self-emp-inc" | "Self-emp-not-inc" => 3.0,
        "Without-pay" => 4.0,
        "Never-worked" => 5.0,
        _ => return None,
    })
}

pub fn high_income(s: &str) -> Option<u8> {
    match s.trim_end_matches('.') {
        ">50K" => Some(1),
        "<=50K" => Some(0),
        _ => None,
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn preprocess(raw: &RawTable) -> Result<Dataset, DataError> {
    let age = raw.numeric("age")?;
    let workclass = raw.categorical("workclass")?;
    let fnlwgt = raw.numeric("fnlwgt")?;
    let education = raw.categorical("education")?;
    let marital = raw.categorical("marital_status")?;
    let relationship = raw.categorical("relationship")?;
    let race = raw.categorical("race")?;
    let sex = raw.categorical("sex")?;
    let gain = raw.numeric("capital_gain")?;
    let loss = raw.numeric("capital_loss")?;
    let hours = raw.numeric("hours_per_week")?;
    let country = raw.categorical("native_country")?;
    let income = raw.categorical("income")?;

    let unknown = |row: usize, column: &str, value: &str| DataError::Malformed {
        path: raw.source.clone(),
        row,
        message: format!("unknown {column} value `{value}`"),
    };
    let mut x = Vec::with_capacity(raw.rows * 12);
    let mut y = Vec::with_capacity(raw.rows);
    for i in 0..raw.rows {
        let edu = education_level(&education[i])
            .ok_or_else(|| unknown(i, "education", &education[i]))?;
        let rel = relationship_level(&relationship[i])
            .ok_or_else(|| unknown(i, "relationship", &relationship[i]))?;
        let emp = employment_level(&workclass[i])
            .ok_or_else(|| unknown(i, "workclass", &workclass[i]))?;
        let target = high_income(&income[i]).ok_or_else(|| unknown(i, "income", &income[i]))?;
        x.extend_from_slice(&[
            age[i],
            flag(race[i] == "White"),
            flag(sex[i] == "Male"),
            edu,
            flag(country[i] == "United-States"),
            flag(matches!(marital[i].as_str(), "Married-civ-spouse" | "Married-AF-spouse")),
            rel,
            emp,
            fnlwgt[i],
            flag(loss[i] > 0.0),
            flag(gain[i] > 0.0),
            hours[i],
        ]);
        y.push(target);
    }
    use FeatureKind::*;
    let features = [
        ("age", Continuous),
        ("race", Boolean),
        ("sex", Boolean),
        ("education", Ordinal),
        ("native_country", Boolean),
        ("marital_status", Boolean),
        ("relationship", Ordinal),
        ("employment", Ordinal),
        ("fnlwgt", Continuous),
        ("capital_loss", Boolean),
        ("capital_gain", Boolean),
        ("hours_per_week", Continuous),
    ]
    .into_iter()
    .map(|(n, k)| Feature::new(n, k))
    .collect();
    let mut data = Dataset::new(features, x, y)?.with_protected(PROTECTED)?;
    data.provenance = Provenance {
        source: raw.source.clone(),
        dropped_rows: raw.dropped_rows,
        version: VERSION.into(),
        seed: None,
        notes: Vec::new(),
    };
    Ok(data)
}
