//! One-hidden-layer ReLU classifier with a sigmoid output, trained by plain
//! SGD on binary cross-entropy plus an optional importance-constraint loss.

use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Eval, Graph, NumericalError, Tape};
use crate::constraints::ConstraintSet;
use crate::data::Dataset;
use crate::importance;
use crate::Error;

/// Lower and upper bound applied to probabilities before taking logs.
pub const PROB_CLAMP: f64 = 1e-7;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub hidden_units: usize,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
}

impl MlpConfig {
    /// Setup used for German credit: 16 hidden units, learning rate 0.01.
    pub fn german(input_dim: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_units: 16,
            learning_rate: 0.01,
            epochs: 10,
            batch_size: 1,
            seed,
        }
    }

    /// Setup used for Adult: 4 hidden units, learning rate 0.1, batch size 1.
    pub fn adult(input_dim: usize, seed: u64) -> Self {
        Self {
            input_dim,
            hidden_units: 4,
            learning_rate: 0.1,
            epochs: 10,
            batch_size: 1,
            seed,
        }
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fail = |m: &str| Err(Error::Config(m.to_string()));
        if self.input_dim == 0 {
            return fail("input_dim must be at least 1");
        }
        if self.hidden_units == 0 {
            return fail("hidden_units must be at least 1");
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail("learning_rate must be positive");
        }
        if self.batch_size == 0 {
            return fail("batch_size must be at least 1");
        }
        Ok(())
    }
}

/// Weights of the network; `w1` is `hidden x input_dim`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpParams {
    pub input_dim: usize,
    pub hidden: usize,
    pub w1: Vec<f64>,
    pub b1: Vec<f64>,
    pub w2: Vec<f64>,
    pub b2: f64,
}

/// The network's weights lifted into some [`Graph`].
#[derive(Debug, Clone)]
pub struct Network<V> {
    pub input_dim: usize,
    pub hidden: usize,
    pub w1: Vec<V>,
    pub b1: Vec<V>,
    pub w2: Vec<V>,
    pub b2: V,
}

impl<V: Copy> Network<V> {
    /// Inverse of the coordinate layout of [`MlpParams::to_flat`].
    pub fn from_flat(input_dim: usize, hidden: usize, flat: &[V]) -> Self {
        let (a, b, c) = (hidden * input_dim, hidden * input_dim + hidden, hidden * (input_dim + 2));
        assert_eq!(flat.len(), c + 1, "flat parameter vector has the wrong length");
        Self {
            input_dim,
            hidden,
            w1: flat[..a].to_vec(),
            b1: flat[a..b].to_vec(),
            w2: flat[b..c].to_vec(),
            b2: flat[c],
        }
    }
}

/// Intermediate values of one forward pass.
#[derive(Debug, Clone)]
pub struct Trace<V> {
    /// Hidden pre-activations including the bias.
    pub z1: Vec<V>,
    pub a1: Vec<V>,
    pub logit: V,
    pub prob: V,
}

impl MlpParams {
    /// Glorot-uniform weights and zero biases, reproducible from the seed.
    pub fn init(config: &MlpConfig) -> Result<Self, Error> {
        config.validate()?;
        let (d, h) = (config.input_dim, config.hidden_units);
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let bound1 = (6.0 / (d + h) as f64).sqrt();
        let bound2 = (6.0 / (h + 1) as f64).sqrt();
        let w1 = (0..h * d).map(|_| rng.gen_range(-bound1..=bound1)).collect();
        let w2 = (0..h).map(|_| rng.gen_range(-bound2..=bound2)).collect();
        Ok(Self {
            input_dim: d,
            hidden: h,
            w1,
            b1: vec![0.0; h],
            w2,
            b2: 0.0,
        })
    }

    pub fn zeros(input_dim: usize, hidden: usize) -> Self {
        Self {
            input_dim,
            hidden,
            w1: vec![0.0; hidden * input_dim],
            b1: vec![0.0; hidden],
            w2: vec![0.0; hidden],
            b2: 0.0,
        }
    }

    pub fn num_params(&self) -> usize {
        self.hidden * self.input_dim + 2 * self.hidden + 1
    }

    /// Coordinates in the order `w1`, `b1`, `w2`, `b2`.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.num_params());
        v.extend_from_slice(&self.w1);
        v.extend_from_slice(&self.b1);
        v.extend_from_slice(&self.w2);
        v.push(self.b2);
        v
    }

    pub fn from_flat(input_dim: usize, hidden: usize, flat: &[f64]) -> Self {
        let (a, b, c) = (hidden * input_dim, hidden * input_dim + hidden, hidden * (input_dim + 2));
        assert_eq!(flat.len(), c + 1, "flat parameter vector has the wrong length");
        Self {
            input_dim,
            hidden,
            w1: flat[..a].to_vec(),
            b1: flat[a..b].to_vec(),
            w2: flat[b..c].to_vec(),
            b2: flat[c],
        }
    }

    pub fn w1_at(&self, unit: usize, feature: usize) -> f64 {
        self.w1[unit * self.input_dim + feature]
    }

    /// Registers every weight as a leaf of `g` with its flat coordinate.
    pub fn lift<G: Graph>(&self, g: &mut G) -> Network<G::Value> {
        let mut coord = 0;
        let mut leaf = |g: &mut G, v: f64| {
            let out = g.leaf(coord, v);
            coord += 1;
            out
        };
        let w1 = self.w1.iter().map(|&v| leaf(g, v)).collect();
        let b1 = self.b1.iter().map(|&v| leaf(g, v)).collect();
        let w2 = self.w2.iter().map(|&v| leaf(g, v)).collect();
        let b2 = leaf(g, self.b2);
        Network {
            input_dim: self.input_dim,
            hidden: self.hidden,
            w1,
            b1,
            w2,
            b2,
        }
    }

    fn check_finite(&self) -> Result<(), NumericalError> {
        if self.to_flat().iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(NumericalError::new(autodiff::OpTag::Param, &[]))
        }
    }
}

/// `z1 = W1 x + b1`, `a1 = relu(z1)`, `logit = w2 . a1 + b2`, `p = sigmoid(logit)`.
///
/// Input coordinates equal to zero contribute nothing and are skipped, which
/// leaves values and gradients unchanged.
pub fn forward_on<G: Graph>(
    g: &mut G,
    net: &Network<G::Value>,
    x: &[f64],
) -> autodiff::Result<Trace<G::Value>> {
    assert_eq!(x.len(), net.input_dim, "input has the wrong dimension");
    let mut z1 = Vec::with_capacity(net.hidden);
    let mut a1 = Vec::with_capacity(net.hidden);
    for k in 0..net.hidden {
        let row = &net.w1[k * net.input_dim..(k + 1) * net.input_dim];
        let mut acc = net.b1[k];
        for (&w, &xi) in row.iter().zip(x) {
            if xi != 0.0 {
                let t = g.scale(w, xi)?;
                acc = g.add(acc, t)?;
            }
        }
        z1.push(acc);
        a1.push(g.relu(acc)?);
    }
    let mut logit = net.b2;
    for k in 0..net.hidden {
        let t = g.mul(net.w2[k], a1[k])?;
        logit = g.add(logit, t)?;
    }
    let prob = g.sigmoid(logit)?;
    Ok(Trace {
        z1,
        a1,
        logit,
        prob,
    })
}

/// Untaped forward pass returning `(logit, probability)`.
pub fn forward(params: &MlpParams, x: &[f64]) -> Result<(f64, f64), NumericalError> {
    let net = params.lift(&mut Eval);
    let t = forward_on(&mut Eval, &net, x)?;
    Ok((t.logit, t.prob))
}

pub fn predict_proba(params: &MlpParams, data: &Dataset) -> Result<Vec<f64>, NumericalError> {
    let net = params.lift(&mut Eval);
    (0..data.n())
        .map(|i| forward_on(&mut Eval, &net, data.row(i)).map(|t| t.prob))
        .collect()
}

/// Binary cross-entropy of a clamped probability.
pub fn bce_on<G: Graph>(g: &mut G, p: G::Value, y: u8) -> autodiff::Result<G::Value> {
    let lo = g.constant(PROB_CLAMP);
    let hi = g.constant(1.0 - PROB_CLAMP);
    let p = g.max2(p, lo)?;
    let p = g.min2(p, hi)?;
    let q = if y == 1 {
        p
    } else {
        let one = g.constant(1.0);
        g.sub(one, p)?
    };
    let l = g.log(q)?;
    g.neg(l)
}

pub fn bce_loss(p: f64, y: u8) -> f64 {
    bce_on(&mut Eval, p, y).expect("clamped probability has a finite log")
}

/// Per-epoch training statistics.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub mean_risk: f64,
    pub mean_constraint_loss: f64,
    /// Training-sample mean of the LRP importance per feature, evaluated
    /// before each update.
    pub mean_importance: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Trained {
    pub params: MlpParams,
    pub history: Vec<EpochStats>,
}

/// The training objective of one batch, `mean(w_i * BCE_i) + L_I`, on any
/// graph. [`train`] minimizes exactly this; it is exposed for gradient checks.
pub fn objective_on<G: Graph>(
    g: &mut G,
    net: &Network<G::Value>,
    rows: &[&[f64]],
    labels: &[u8],
    weights: Option<&[f64]>,
    constraints: Option<&ConstraintSet>,
) -> Result<G::Value, Error> {
    if rows.is_empty() || rows.len() != labels.len() {
        return Err(Error::Config("objective needs one label per row".into()));
    }
    let mut risks = Vec::with_capacity(rows.len());
    let mut imps = Vec::with_capacity(rows.len());
    for (i, (&x, &y)) in rows.iter().zip(labels).enumerate() {
        let trace = forward_on(g, net, x)?;
        let mut loss = bce_on(g, trace.prob, y)?;
        if let Some(w) = weights {
            loss = g.scale(loss, w[i])?;
        }
        risks.push(loss);
        imps.push(match constraints {
            Some(c) if c.applies_to(y) => {
                Some(importance::importance_on(g, net, &trace, x, c.method, c.epsilon)?)
            }
            _ => None,
        });
    }
    let total = g.sum(&risks)?;
    let risk = g.scale(total, 1.0 / rows.len() as f64)?;
    match constraints {
        Some(c) => {
            let li = c.loss_on(g, labels, &imps)?;
            Ok(g.add(risk, li)?)
        }
        None => Ok(risk),
    }
}

/// Plain SGD on `mean(w_i * BCE_i) + sum_k lambda_k (1 - Phi_k)` over each
/// batch. Samples are reshuffled every epoch with a generator seeded from
/// `config.seed`.
pub fn train(
    init: MlpParams,
    data: &Dataset,
    config: &MlpConfig,
    constraints: Option<&ConstraintSet>,
    sample_weights: Option<&[f64]>,
) -> Result<Trained, Error> {
    config.validate()?;
    if data.n() == 0 {
        return Err(Error::Config("training set is empty".into()));
    }
    if data.d() != init.input_dim || config.input_dim != init.input_dim {
        return Err(Error::Config(format!(
            "model expects {} inputs, data has {}",
            init.input_dim,
            data.d()
        )));
    }
    if let Some(w) = sample_weights {
        if w.len() != data.n() {
            return Err(Error::Config("one sample weight per row is required".into()));
        }
    }
    if let Some(set) = constraints {
        set.validate(data.d())?;
    }
    let eps = constraints.map_or(importance::DEFAULT_EPSILON, |c| c.epsilon);

    let mut params = init;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(1);
    let mut order: Vec<usize> = (0..data.n()).collect();
    let mut tape = Tape::with_capacity(8192);
    let mut history = Vec::with_capacity(config.epochs);
    let d = data.d();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut risk_sum = 0.0;
        let mut constraint_sum = 0.0;
        let mut importance_sum = vec![0.0; d];
        let mut steps = 0;
        for (step, batch) in order.chunks(config.batch_size).enumerate() {
            let ctx = |e: NumericalError| e.with_context(format!("epoch {epoch}, step {step}"));
            tape.clear();
            let net = params.lift(&mut tape);
            let mut risks = Vec::with_capacity(batch.len());
            let mut sample_importance = Vec::with_capacity(batch.len());
            for &i in batch {
                let x = data.row(i);
                let y = data.targets()[i];
                let trace = forward_on(&mut tape, &net, x).map_err(ctx)?;
                let mut loss = bce_on(&mut tape, trace.prob, y).map_err(ctx)?;
                if let Some(w) = sample_weights {
                    loss = tape.scale(loss, w[i]).map_err(ctx)?;
                }
                risks.push(loss);

                let needed = constraints.is_some_and(|c| c.applies_to(y));
                if needed {
                    let method = constraints.map(|c| c.method).unwrap();
                    let imp = importance::importance_on(&mut tape, &net, &trace, x, method, eps)
                        .map_err(|e| e.map_numerical(ctx))?;
                    for (s, &v) in importance_sum.iter_mut().zip(&imp) {
                        *s += tape.value(v);
                    }
                    sample_importance.push(Some(imp));
                } else {
                    let plain = params.lift(&mut Eval);
                    let t = forward_on(&mut Eval, &plain, x).map_err(ctx)?;
                    let raw = importance::lrp_on(&mut Eval, &plain, &t, x, eps).map_err(ctx)?;
                    let imp = importance::normalize_on(&mut Eval, &raw).map_err(ctx)?;
                    for (s, v) in importance_sum.iter_mut().zip(imp) {
                        *s += v;
                    }
                    sample_importance.push(None);
                }
            }
            let total_risk = tape.sum(&risks).map_err(ctx)?;
            let risk = tape.scale(total_risk, 1.0 / batch.len() as f64).map_err(ctx)?;
            let mut total = risk;
            let mut constraint_value = 0.0;
            if let Some(set) = constraints {
                let labels: Vec<u8> = batch.iter().map(|&i| data.targets()[i]).collect();
                let li = set
                    .loss_on(&mut tape, &labels, &sample_importance)
                    .map_err(ctx)?;
                constraint_value = tape.value(li);
                total = tape.add(total, li).map_err(ctx)?;
            }
            let grads = tape.backward(total).map_err(ctx)?;
            let g = grads.as_slice();
            let mut flat = params.to_flat();
            for (p, &gi) in flat.iter_mut().zip(g) {
                *p -= config.learning_rate * gi;
            }
            params = MlpParams::from_flat(params.input_dim, params.hidden, &flat);
            params.check_finite().map_err(ctx)?;

            risk_sum += tape.value(risk);
            constraint_sum += constraint_value;
            steps += 1;
        }
        let n = data.n() as f64;
        history.push(EpochStats {
            epoch,
            mean_risk: risk_sum / steps as f64,
            mean_constraint_loss: constraint_sum / steps as f64,
            mean_importance: importance_sum.iter().map(|s| s / n).collect(),
        });
    }
    Ok(Trained { params, history })
}

/// Serialized model: configuration plus flat weight arrays. Weights are
/// written with 17 significant digits so they read back bit for bit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub config: MlpConfig,
    pub feature_names: Vec<String>,
    #[serde(with = "exact")]
    pub w1: Vec<f64>,
    #[serde(with = "exact")]
    pub b1: Vec<f64>,
    #[serde(with = "exact")]
    pub w2: Vec<f64>,
    #[serde(with = "exact::scalar")]
    pub b2: f64,
}

impl Checkpoint {
    pub fn new(config: &MlpConfig, feature_names: Vec<String>, params: &MlpParams) -> Self {
        Self {
            config: config.clone(),
            feature_names,
            w1: params.w1.clone(),
            b1: params.b1.clone(),
            w2: params.w2.clone(),
            b2: params.b2,
        }
    }

    pub fn params(&self) -> Result<MlpParams, Error> {
        let (d, h) = (self.config.input_dim, self.config.hidden_units);
        if self.w1.len() != d * h || self.b1.len() != h || self.w2.len() != h {
            return Err(Error::Config("checkpoint weight shapes do not match its config".into()));
        }
        Ok(MlpParams {
            input_dim: d,
            hidden: h,
            w1: self.w1.clone(),
            b1: self.b1.clone(),
            w2: self.w2.clone(),
            b2: self.b2,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("checkpoint serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        serde_json::from_str(s).map_err(|e| Error::Config(format!("bad checkpoint: {e}")))
    }

    pub fn save(&self, path: &Path) -> Result<(), Error> {
        std::fs::write(path, self.to_json() + "\n")
            .map_err(|e| crate::data::DataError::io(path, e).into())
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        let s = std::fs::read_to_string(path).map_err(|e| crate::data::DataError::io(path, e))?;
        Self::from_json(&s)
    }
}

mod exact {
    use serde::de::Deserialize;
    use serde::ser::{SerializeSeq, Serializer};
    use serde_json::value::RawValue;

    fn raw(v: f64) -> Box<RawValue> {
        RawValue::from_string(format!("{v:.16e}")).expect("scientific notation is valid JSON")
    }

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        let mut seq = s.serialize_seq(Some(values.len()))?;
        for &v in values {
            seq.serialize_element(&raw(v))?;
        }
        seq.end()
    }

    pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        Vec::<f64>::deserialize(d)
    }

    pub mod scalar {
        use super::*;

        pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
            serde::Serialize::serialize(&raw(*v), s)
        }

        pub fn deserialize<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
            f64::deserialize(d)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{toy, Dataset};
    use proptest::prelude::*;

    fn cfg(d: usize, h: usize, seed: u64) -> MlpConfig {
        MlpConfig {
            input_dim: d,
            hidden_units: h,
            learning_rate: 0.1,
            epochs: 10,
            batch_size: 1,
            seed,
        }
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let a = MlpParams::init(&cfg(5, 16, 1)).unwrap();
        assert_eq!(a, MlpParams::init(&cfg(5, 16, 1)).unwrap());
        assert_ne!(a, MlpParams::init(&cfg(5, 16, 2)).unwrap());
        assert_eq!(a.w1.len(), 80);
        let bound = (6.0f64 / 21.0).sqrt();
        assert!(a.w1.iter().all(|w| w.abs() <= bound));
        assert!(a.b1.iter().all(|&b| b == 0.0) && a.b2 == 0.0);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let mut c = cfg(2, 0, 0);
        assert!(matches!(MlpParams::init(&c), Err(Error::Config(_))));
        c.hidden_units = 2;
        c.learning_rate = 0.0;
        assert!(c.validate().is_err());
        c.learning_rate = 0.1;
        c.batch_size = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn zero_weights_give_even_odds() {
        let p = MlpParams::zeros(3, 4);
        assert_eq!(forward(&p, &[1.0, -2.0, 7.0]).unwrap(), (0.0, 0.5));
    }

    #[test]
    fn hand_evaluated_forward() {
        let p = MlpParams {
            input_dim: 2,
            hidden: 1,
            w1: vec![1.0, 0.0],
            b1: vec![0.0],
            w2: vec![1.0],
            b2: 0.0,
        };
        let (logit, prob) = forward(&p, &[2.0, 9.0]).unwrap();
        assert_eq!(logit, 2.0);
        assert_eq!(prob, 1.0 / (1.0 + (-2.0f64).exp()));
    }

    #[test]
    fn taped_forward_matches_plain() {
        let p = MlpParams::init(&cfg(5, 7, 3)).unwrap();
        let x = [0.3, -1.2, 0.0, 2.5, 1.0];
        let mut tape = Tape::new();
        let net = p.lift(&mut tape);
        let t = forward_on(&mut tape, &net, &x).unwrap();
        let (logit, prob) = forward(&p, &x).unwrap();
        assert!((tape.value(t.logit) - logit).abs() <= 1e-15);
        assert!((tape.value(t.prob) - prob).abs() <= 1e-15);
    }

    #[test]
    fn bce_values() {
        assert!((bce_loss(0.5, 0) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!((bce_loss(0.5, 1) - std::f64::consts::LN_2).abs() < 1e-15);
        assert!(bce_loss(1e-9, 0).is_finite());
        assert!(bce_loss(1e-9, 1).is_finite());
        assert!((bce_loss(0.9, 1) - 0.10536051565782628).abs() < 1e-12);
    }

    fn separable() -> Dataset {
        // y = 1 iff x0 + x1 > 0, rows on a grid away from the boundary
        let mut rows = Vec::new();
        let mut y = Vec::new();
        for i in -5..=5 {
            for j in -5..=5 {
                let (a, b) = (i as f64 * 0.4, j as f64 * 0.4);
                if (a + b).abs() < 0.3 {
                    continue;
                }
                rows.push(vec![a, b]);
                y.push((a + b > 0.0) as u8);
            }
        }
        let refs: Vec<&[f64]> = rows.iter().map(|r| r.as_slice()).collect();
        toy(&refs, &y, &["a", "b"])
    }

    fn accuracy(p: &MlpParams, data: &Dataset) -> f64 {
        let probs = predict_proba(p, data).unwrap();
        let hits = probs
            .iter()
            .zip(data.targets())
            .filter(|(&pr, &y)| (pr >= 0.5) as u8 == y)
            .count();
        hits as f64 / data.n() as f64
    }

    #[test]
    fn toy_set_is_linearly_separable() {
        // brute-force scan of directions and offsets
        let data = separable();
        let found = (0..360).any(|deg| {
            let t = (deg as f64).to_radians();
            (-20..=20).any(|o| {
                let off = o as f64 * 0.1;
                (0..data.n()).all(|i| {
                    let r = data.row(i);
                    let s = t.cos() * r[0] + t.sin() * r[1] - off;
                    (s > 0.0) == (data.targets()[i] == 1)
                })
            })
        });
        assert!(found);
    }

    #[test]
    fn learns_separable_toy_set() {
        let data = separable();
        let c = cfg(2, 8, 5);
        let trained = train(MlpParams::init(&c).unwrap(), &data, &c, None, None).unwrap();
        assert!(accuracy(&trained.params, &data) >= 0.95);
        assert_eq!(trained.history.len(), 10);
        assert!(trained.history.iter().all(|h| h.mean_risk.is_finite()));
    }

    #[test]
    fn unit_weights_equal_unweighted_run() {
        let data = separable();
        let c = cfg(2, 4, 9);
        let init = MlpParams::init(&c).unwrap();
        let a = train(init.clone(), &data, &c, None, None).unwrap();
        let ones = vec![1.0; data.n()];
        let b = train(init, &data, &c, None, Some(&ones)).unwrap();
        assert_eq!(a.params, b.params);
    }

    #[test]
    fn single_step_matches_finite_difference_gradient() {
        let data = separable().select(&[0, 7, 30, 55]);
        let mut c = cfg(2, 3, 4);
        c.epochs = 1;
        c.batch_size = data.n();
        let init = MlpParams::init(&c).unwrap();
        let trained = train(init.clone(), &data, &c, None, None).unwrap();

        let mean_bce = |flat: &[f64]| {
            let p = MlpParams::from_flat(2, 3, flat);
            let probs = predict_proba(&p, &data).unwrap();
            probs
                .iter()
                .zip(data.targets())
                .map(|(&pr, &y)| bce_loss(pr, y))
                .sum::<f64>()
                / data.n() as f64
        };
        let flat = init.to_flat();
        let after = trained.params.to_flat();
        let h = 1e-6;
        for k in 0..flat.len() {
            let mut up = flat.clone();
            let mut down = flat.clone();
            up[k] += h;
            down[k] -= h;
            let fd = (mean_bce(&up) - mean_bce(&down)) / (2.0 * h);
            let expected = flat[k] - c.learning_rate * fd;
            assert!((after[k] - expected).abs() <= 1e-4, "coordinate {k}");
        }
    }

    #[test]
    fn constrained_step_follows_the_objective() {
        let data = separable().select(&[1, 8, 31, 56, 70]);
        let mut c = cfg(2, 4, 9);
        c.epochs = 1;
        c.batch_size = data.n();
        let set = ConstraintSet::parse(&["I[b] < 0.1"], &data.feature_names(), 0.4).unwrap();
        let weights = [0.5, 1.0, 2.0, 1.5, 1.0];
        let init = MlpParams::init(&c).unwrap();
        let trained = train(init.clone(), &data, &c, Some(&set), Some(&weights)).unwrap();

        let rows: Vec<&[f64]> = (0..data.n()).map(|i| data.row(i)).collect();
        let mut tape = Tape::new();
        let net = init.lift(&mut tape);
        let obj = objective_on(&mut tape, &net, &rows, data.targets(), Some(&weights), Some(&set))
            .unwrap();
        let g = tape.backward(obj).unwrap().into_vec();
        for ((a, w), gi) in trained.params.to_flat().iter().zip(init.to_flat()).zip(g) {
            assert!((a - (w - c.learning_rate * gi)).abs() <= 1e-14);
        }
    }

    #[test]
    fn checkpoint_round_trips_bit_exactly() {
        let c = cfg(3, 5, 77);
        let mut p = MlpParams::init(&c).unwrap();
        p.b2 = -0.1 - 0.2;
        p.b1[0] = 1e-300;
        let ck = Checkpoint::new(&c, vec!["a".into(), "b".into(), "c".into()], &p);
        let json = ck.to_json();
        let back = Checkpoint::from_json(&json).unwrap();
        let q = back.params().unwrap();
        for (x, y) in p.to_flat().iter().zip(q.to_flat()) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        assert_eq!(back, ck);
    }

    proptest! {
        #[test]
        fn checkpoint_preserves_arbitrary_weights(w in prop::collection::vec(-1e6f64..1e6, 4)) {
            let c = cfg(1, 1, 0);
            let p = MlpParams::from_flat(1, 1, &w);
            let back = Checkpoint::from_json(&Checkpoint::new(&c, vec!["x".into()], &p).to_json())
                .unwrap()
                .params()
                .unwrap();
            prop_assert_eq!(p.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
                            back.to_flat().iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        }
    }
}
