//! Group fairness metrics, ROC-AUC and the baseline mitigation strategies.
//!
//! Hard predictions use `p >= 0.5`. Group `s = 1` is the reference group in
//! every ratio and difference.

use serde::{Deserialize, Serialize};

use crate::data::{undersample_to_equal, DataError, Dataset};
use crate::model::{predict_proba, MlpParams};
use crate::Error;

pub const THRESHOLD: f64 = 0.5;

/// A metric whose estimate would rest on an empty group or a zero
/// denominator.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{metric} is undefined: {reason}")]
pub struct UndefinedMetric {
    pub metric: &'static str,
    pub reason: String,
}

fn undefined(metric: &'static str, reason: impl Into<String>) -> UndefinedMetric {
    UndefinedMetric {
        metric,
        reason: reason.into(),
    }
}

pub fn threshold(probs: &[f64]) -> Vec<u8> {
    probs.iter().map(|&p| u8::from(p >= THRESHOLD)).collect()
}

/// Positive-prediction rate over rows selected by `keep`; `None` if no row is.
fn rate(pred: &[u8], keep: impl Fn(usize) -> bool) -> Option<(f64, usize)> {
    let (mut n, mut pos) = (0usize, 0usize);
    for (i, &p) in pred.iter().enumerate() {
        if keep(i) {
            n += 1;
            pos += p as usize;
        }
    }
    (n > 0).then(|| (pos as f64 / n as f64, n))
}

/// `P(Y_hat = 1 | s = 0) / P(Y_hat = 1 | s = 1)`.
pub fn disparate_impact(pred: &[u8], s: &[u8]) -> Result<f64, UndefinedMetric> {
    assert_eq!(pred.len(), s.len());
    let (r0, _) = rate(pred, |i| s[i] == 0).ok_or_else(|| undefined("DI", "group s=0 is empty"))?;
    let (r1, _) = rate(pred, |i| s[i] == 1).ok_or_else(|| undefined("DI", "group s=1 is empty"))?;
    if r1 == 0.0 {
        return Err(undefined("DI", "group s=1 has no positive predictions"));
    }
    Ok(r0 / r1)
}

/// Average of the true-positive-rate and false-positive-rate differences
/// between group 0 and group 1.
pub fn equalized_odds_diff(pred: &[u8], s: &[u8], y: &[u8]) -> Result<f64, UndefinedMetric> {
    assert!(pred.len() == s.len() && s.len() == y.len());
    let cell = |g: u8, label: u8| {
        rate(pred, |i| s[i] == g && y[i] == label)
            .map(|(r, _)| r)
            .ok_or_else(|| undefined("EO", format!("cell s={g}, y={label} is empty")))
    };
    let tpr = cell(0, 1)? - cell(1, 1)?;
    let fpr = cell(0, 0)? - cell(1, 0)?;
    Ok(0.5 * (tpr + fpr))
}

/// `P(Y_hat = 1 | s = 1)` after setting feature `s_col` to 0 on the `s = 1`
/// rows, minus the same rate before the change.
pub fn counterfactual_fairness(
    params: &MlpParams,
    data: &Dataset,
    s_col: usize,
) -> Result<f64, Error> {
    let ids: Vec<usize> = (0..data.n()).filter(|&i| data.get(i, s_col) == 1.0).collect();
    if ids.is_empty() {
        return Err(undefined("CF", "no rows with s=1").into());
    }
    let group = data.select(&ids);
    let before = threshold(&predict_proba(params, &group)?);
    let after = threshold(&predict_proba(params, &group.with_column_value(s_col, 0.0))?);
    let n = ids.len() as f64;
    let count = |v: &[u8]| v.iter().map(|&p| p as usize).sum::<usize>() as f64;
    Ok(count(&after) / n - count(&before) / n)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn roc_auc(scores: &[f64], y: &[u8]) -> Result<f64, UndefinedMetric> {
    assert_eq!(scores.len(), y.len());
    let n_pos = y.iter().filter(|&&v| v == 1).count();
    let n_neg = y.len() - n_pos;
    if n_pos == 0 || n_neg == 0 {
        return Err(undefined("ROC-AUC", "only one class present"));
    }
    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].total_cmp(&scores[b]));
    // Twice the Mann-Whitney count, kept integral.
    let mut twice: u64 = 0;
    let mut neg_below: u64 = 0;
    let mut k = 0;
    while k < order.len() {
        let mut end = k;
        while end < order.len() && scores[order[end]] == scores[order[k]] {
            end += 1;
        }
        let pos = order[k..end].iter().filter(|&&i| y[i] == 1).count() as u64;
        let neg = (end - k) as u64 - pos;
        twice += 2 * pos * neg_below + pos * neg;
        neg_below += neg;
        k = end;
    }
    Ok(twice as f64 / (2 * n_pos * n_neg) as f64)
}

/// Training view without the protected column.
pub fn unawareness(data: &Dataset) -> Result<Dataset, Error> {
    let col = protected_column(data)?;
    Ok(data.drop_column(col))
}

/// Randomly drops rows of the larger protected group until both groups have
/// the same size.
pub fn undersample(data: &Dataset, seed: u64) -> Result<Dataset, Error> {
    let s = protected_values(data)?;
    let group = |g: u8| -> Vec<usize> { (0..data.n()).filter(|&i| s[i] == g).collect() };
    let (a, b) = (group(0), group(1));
    if a.is_empty() || b.is_empty() {
        return Err(DataError::Invalid("undersampling needs both protected groups".into()).into());
    }
    Ok(data.select(&undersample_to_equal(a, b, seed)))
}

/// Reweighing weights `N_s N_y / (N N_{s,y})` per row.
pub fn reweigh(data: &Dataset) -> Result<Vec<f64>, Error> {
    let s = protected_values(data)?;
    let y = data.targets();
    let n = data.n() as f64;
    let mut cells = [[0usize; 2]; 2];
    for (&si, &yi) in s.iter().zip(y) {
        cells[si as usize][yi as usize] += 1;
    }
    for (g, row) in cells.iter().enumerate() {
        for (label, &c) in row.iter().enumerate() {
            if c == 0 {
                return Err(undefined("reweighing", format!("cell s={g}, y={label} is empty")).into());
            }
        }
    }
    let n_s = |g: usize| (cells[g][0] + cells[g][1]) as f64;
    let n_y = |label: usize| (cells[0][label] + cells[1][label]) as f64;
    Ok(s.iter()
        .zip(y)
        .map(|(&si, &yi)| {
            let (g, label) = (si as usize, yi as usize);
            n_s(g) * n_y(label) / (n * cells[g][label] as f64)
        })
        .collect())
}

fn protected_values(data: &Dataset) -> Result<&[u8], Error> {
    data.protected()
        .map(|p| p.values.as_slice())
        .ok_or_else(|| Error::Config("dataset has no protected attribute".into()))
}

fn protected_column(data: &Dataset) -> Result<usize, Error> {
    data.protected()
        .and_then(|p| p.column)
        .ok_or_else(|| Error::Config("protected attribute is not a training feature".into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupCounts {
    /// `cells[s][y]`.
    pub cells: [[usize; 2]; 2],
}

impl GroupCounts {
    pub fn of(s: &[u8], y: &[u8]) -> Self {
        let mut cells = [[0; 2]; 2];
        for (&si, &yi) in s.iter().zip(y) {
            cells[si as usize][yi as usize] += 1;
        }
        Self { cells }
    }

    pub fn group(&self, s: usize) -> usize {
        self.cells[s][0] + self.cells[s][1]
    }
}

/// Test-set metrics of one model. A metric whose estimate has an empty group
/// is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FairnessReport {
    pub method: String,
    pub lambda: Option<f64>,
    pub roc_auc: Option<f64>,
    pub di: Option<f64>,
    pub eo: Option<f64>,
    /// Signed; 0 means predictions never change when `s` goes from 1 to 0.
    pub cf: Option<f64>,
    pub counts: GroupCounts,
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl FairnessReport {
    pub const CSV_HEADER: &'static str = "method,lambda,roc_auc,di,eo,cf";

    /// Evaluates a model on `test`. When the protected attribute is not among
    /// the model's inputs the counterfactual change is 0 by construction.
    pub fn evaluate(
        params: &MlpParams,
        test: &Dataset,
        method: impl Into<String>,
        lambda: Option<f64>,
    ) -> Result<Self, Error> {
        let s = protected_values(test)?;
        let probs = predict_proba(params, test)?;
        let pred = threshold(&probs);
        let y = test.targets();
        let cf = match test.protected().and_then(|p| p.column) {
            Some(col) => match counterfactual_fairness(params, test, col) {
                Ok(v) => Some(v),
                Err(Error::Metric(_)) => None,
                Err(e) => return Err(e),
            },
            None => s.contains(&1).then_some(0.0),
        };
        Ok(Self {
            method: method.into(),
            lambda,
            roc_auc: roc_auc(&probs, y).ok(),
            di: disparate_impact(&pred, s).ok(),
            eo: equalized_odds_diff(&pred, s, y).ok(),
            cf,
            counts: GroupCounts::of(s, y),
        })
    }

    /// `method,lambda,roc_auc,di,eo,cf`; undefined values are empty.
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.method,
            cell(self.lambda),
            cell(self.roc_auc),
            cell(self.di),
            cell(self.eo),
            cell(self.cf)
        )
    }
}
