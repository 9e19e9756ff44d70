//! Local feature importance: epsilon-rule LRP through the network and the
//! closed-form importance of a linear model.
//!
//! Both produce a vector in `[0, 1]^d` by normalizing absolute relevances by
//! their maximum. Built on a [`Tape`](crate::autodiff::Tape) the whole
//! computation is differentiable with respect to the network weights.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Eval, Graph, NumericalError};
use crate::model::{forward_on, MlpParams, Network, Trace};

/// Stabilizer of the LRP denominators.
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Maximum absolute relevance below which the importance is all zeros.
pub const DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ImportanceError {
    #[error("unknown or inapplicable importance method `{0}`")]
    UnknownMethod(String),
    #[error(transparent)]
    Numerical(#[from] NumericalError),
}

impl ImportanceError {
    pub(crate) fn map_numerical(self, f: impl FnOnce(NumericalError) -> NumericalError) -> Self {
        match self {
            ImportanceError::Numerical(e) => ImportanceError::Numerical(f(e)),
            other => other,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImportanceMethod {
    Lrp,
    Linear,
}

impl fmt::Display for ImportanceMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ImportanceMethod::Lrp => "lrp",
            ImportanceMethod::Linear => "linear",
        })
    }
}

impl FromStr for ImportanceMethod {
    type Err = ImportanceError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "lrp" => Ok(ImportanceMethod::Lrp),
            "linear" => Ok(ImportanceMethod::Linear),
            other => Err(ImportanceError::UnknownMethod(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImportanceVector {
    pub values: Vec<f64>,
    pub method: ImportanceMethod,
}

fn sign(v: f64) -> f64 {
    if v >= 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// Epsilon-rule relevances of the inputs, starting from `R = logit`.
///
/// Each layer redistributes `R_j = sum_k a_j w_jk / (z_k + eps sign(z_k)) R_k`
/// where `z_k` includes the bias; the bias itself receives no relevance.
/// Inactive hidden units and zero inputs carry exactly zero relevance and are
/// not recorded.
pub fn lrp_on<G: Graph>(
    g: &mut G,
    net: &Network<G::Value>,
    trace: &Trace<G::Value>,
    x: &[f64],
    epsilon: f64,
) -> autodiff::Result<Vec<G::Value>> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let logit = g.value(trace.logit);
    let stab = g.constant(epsilon * sign(logit));
    let denom = g.add(trace.logit, stab)?;
    let ratio = g.div(trace.logit, denom)?;

    // factor_k = R_k / (z_k + eps sign(z_k)) for active units
    let mut factors = Vec::with_capacity(net.hidden);
    for k in 0..net.hidden {
        if g.value(trace.a1[k]) == 0.0 {
            continue;
        }
        let contrib = g.mul(trace.a1[k], net.w2[k])?;
        let r_k = g.mul(contrib, ratio)?;
        let z = g.value(trace.z1[k]);
        let stab = g.constant(epsilon * sign(z));
        let zden = g.add(trace.z1[k], stab)?;
        factors.push((k, g.div(r_k, zden)?));
    }

    let mut out = Vec::with_capacity(net.input_dim);
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 || factors.is_empty() {
            out.push(g.constant(0.0));
            continue;
        }
        let mut acc: Option<G::Value> = None;
        for &(k, f) in &factors {
            let t = g.mul(net.w1[k * net.input_dim + j], f)?;
            acc = Some(match acc {
                None => t,
                Some(a) => g.add(a, t)?,
            });
        }
        out.push(g.scale(acc.unwrap(), xj)?);
    }
    for (j, &r) in out.iter().enumerate() {
        let v = g.value(r);
        if !v.is_finite() {
            return Err(NumericalError::new(autodiff::OpTag::Div, &[v])
                .with_context(format!("relevance of input {j}")));
        }
    }
    Ok(out)
}

/// Untaped LRP relevances.
pub fn lrp_relevances(
    params: &MlpParams,
    x: &[f64],
    epsilon: f64,
) -> Result<Vec<f64>, NumericalError> {
    let net = params.lift(&mut Eval);
    let trace = forward_on(&mut Eval, &net, x)?;
    lrp_on(&mut Eval, &net, &trace, x, epsilon)
}

/// `I_i = |R_i| / max_j |R_j|`, or all zeros when the maximum is below
/// [`DEGENERATE`]. The maximum is a chain of `max2`, so its gradient goes to
/// the lowest index among tied coordinates.
pub fn normalize_on<G: Graph>(g: &mut G, raw: &[G::Value]) -> autodiff::Result<Vec<G::Value>> {
    assert!(!raw.is_empty(), "importance needs at least one feature");
    let abs: Vec<G::Value> = raw.iter().map(|&r| g.abs(r)).collect::<Result<_, _>>()?;
    let mut max = abs[0];
    for &a in &abs[1..] {
        max = g.max2(max, a)?;
    }
    if g.value(max) < DEGENERATE {
        return Ok(abs.iter().map(|_| g.constant(0.0)).collect());
    }
    abs.iter().map(|&a| g.div(a, max)).collect()
}

pub fn normalize_importance(raw: &[f64], method: ImportanceMethod) -> ImportanceVector {
    ImportanceVector {
        values: normalize_on(&mut Eval, raw).expect("normalization of finite values is finite"),
        method,
    }
}

/// Importance of a linear predictor `sum_i w_i x_i`: `|w| / max |w_i|`,
/// independent of the instance.
pub fn linear_importance(weights: &[f64]) -> ImportanceVector {
    normalize_importance(weights, ImportanceMethod::Linear)
}

/// Importance of one instance under `method` on a graph.
///
/// The network is never linear, so [`ImportanceMethod::Linear`] is rejected.
pub fn importance_on<G: Graph>(
    g: &mut G,
    net: &Network<G::Value>,
    trace: &Trace<G::Value>,
    x: &[f64],
    method: ImportanceMethod,
    epsilon: f64,
) -> Result<Vec<G::Value>, ImportanceError> {
    match method {
        ImportanceMethod::Lrp => {
            let raw = lrp_on(g, net, trace, x, epsilon)?;
            Ok(normalize_on(g, &raw)?)
        }
        ImportanceMethod::Linear => Err(ImportanceError::UnknownMethod(
            "linear (the network has a nonlinear hidden layer)".into(),
        )),
    }
}

pub fn importance(
    params: &MlpParams,
    x: &[f64],
    method: ImportanceMethod,
) -> Result<ImportanceVector, ImportanceError> {
    let net = params.lift(&mut Eval);
    let trace = forward_on(&mut Eval, &net, x)?;
    let values = importance_on(&mut Eval, &net, &trace, x, method, DEFAULT_EPSILON)?;
    Ok(ImportanceVector { values, method })
}

/// Mean importance per feature over all rows of `data`.
pub fn mean_importance(
    params: &MlpParams,
    data: &crate::data::Dataset,
    method: ImportanceMethod,
) -> Result<Vec<f64>, ImportanceError> {
    let mut sum = vec![0.0; data.d()];
    for i in 0..data.n() {
        let imp = importance(params, data.row(i), method)?;
        for (s, v) in sum.iter_mut().zip(imp.values) {
            *s += v;
        }
    }
    let n = data.n().max(1) as f64;
    Ok(sum.into_iter().map(|s| s / n).collect())
}
