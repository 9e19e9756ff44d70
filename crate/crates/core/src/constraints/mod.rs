//! Logical constraints on feature importances and their fuzzy-logic loss.
//!
//! An atom `I[i] < c` is relaxed to the violation
//! `l = max(I_i - c, 0) / (1 - c)` and the truth degree `1 - mu * l`; atoms are
//! combined with a [`TNorm`]. Over a batch the formula is grounded as the mean
//! truth `Phi` of the instances passing its label filter, and the loss is
//! `lambda * (1 - Phi)`.
//!
//! ```
//! use ctfi::constraints::{atom_violation, parse_formula};
//!
//! let names = vec!["age".to_string(), "gender".to_string()];
//! let f = parse_formula("I[gender] < 0.1", &names).unwrap();
//! let ctfi::constraints::Expr::Atom(atom) = f.expr else { unreachable!() };
//! assert!((atom_violation(0.55, &atom) - 0.5).abs() < 1e-12);
//! ```

mod parse;
mod tnorm;

pub use parse::parse_formula;
pub use tnorm::TNorm;

use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Eval, Graph, NumericalError, OpTag};
use crate::data::{pearson, Dataset};
use crate::importance::{self, ImportanceError, ImportanceMethod};
use crate::model::MlpParams;
use crate::Error;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstraintError {
    #[error("constraint parse error at position {position}: {message}")]
    Parse { position: usize, message: String },
    #[error("unknown feature `{name}` at position {position}")]
    UnknownFeature { name: String, position: usize },
    #[error("invalid constraint: {0}")]
    Invalid(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Below,
    Above,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub feature: usize,
    pub direction: Direction,
    pub threshold: f64,
    /// Multiplier `mu` on the violation, in `[0, 1]`.
    pub strength: f64,
}

impl Atom {
    pub fn below(feature: usize, threshold: f64) -> Self {
        Self {
            feature,
            direction: Direction::Below,
            threshold,
            strength: 1.0,
        }
    }

    pub fn above(feature: usize, threshold: f64) -> Self {
        Self {
            feature,
            direction: Direction::Above,
            threshold,
            strength: 1.0,
        }
    }

    pub fn with_strength(mut self, mu: f64) -> Self {
        self.strength = mu;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        let c = self.threshold;
        let ok = match self.direction {
            Direction::Below => (0.0..1.0).contains(&c),
            Direction::Above => c > 0.0 && c <= 1.0,
        };
        if !ok {
            let range = match self.direction {
                Direction::Below => "[0, 1)",
                Direction::Above => "(0, 1]",
            };
            return Err(format!("threshold {c} outside {range}"));
        }
        if !(0.0..=1.0).contains(&self.strength) {
            return Err(format!("strength {} outside [0, 1]", self.strength));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Atom(Atom),
    Not(Box<Expr>),
    And(Box<Expr>, Box<Expr>),
    Or(Box<Expr>, Box<Expr>),
    Implies(Box<Expr>, Box<Expr>),
}

impl Expr {
    /// Left-nested conjunction; `None` for an empty list.
    pub fn all(mut parts: Vec<Expr>) -> Option<Expr> {
        if parts.is_empty() {
            return None;
        }
        let first = parts.remove(0);
        Some(
            parts
                .into_iter()
                .fold(first, |acc, e| Expr::And(Box::new(acc), Box::new(e))),
        )
    }

    pub fn atoms(&self) -> Vec<&Atom> {
        let mut out = Vec::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms<'a>(&'a self, out: &mut Vec<&'a Atom>) {
        match self {
            Expr::Atom(a) => out.push(a),
            Expr::Not(e) => e.collect_atoms(out),
            Expr::And(a, b) | Expr::Or(a, b) | Expr::Implies(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }
}

/// Restricts grounding to instances with this ground-truth label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DomainFilter {
    pub label: u8,
}

impl DomainFilter {
    pub fn admits(&self, y: u8) -> bool {
        y == self.label
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintFormula {
    pub expr: Expr,
    pub filter: Option<DomainFilter>,
    pub lambda: f64,
}

impl ConstraintFormula {
    pub fn new(expr: Expr) -> Self {
        Self {
            expr,
            filter: None,
            lambda: 1.0,
        }
    }

    pub fn with_lambda(mut self, lambda: f64) -> Self {
        self.lambda = lambda;
        self
    }

    pub fn with_filter(mut self, filter: Option<DomainFilter>) -> Self {
        self.filter = filter;
        self
    }

    pub fn admits(&self, y: u8) -> bool {
        self.filter.is_none_or(|f| f.admits(y))
    }

    pub fn validate(&self, d: usize) -> Result<(), ConstraintError> {
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            return Err(ConstraintError::Invalid(format!(
                "lambda must be finite and non-negative, got {}",
                self.lambda
            )));
        }
        for atom in self.expr.atoms() {
            if atom.feature >= d {
                return Err(ConstraintError::Invalid(format!(
                    "feature index {} out of range for {d} features",
                    atom.feature
                )));
            }
            atom.validate().map_err(ConstraintError::Invalid)?;
        }
        Ok(())
    }
}

pub fn atom_violation_on<G: Graph>(
    g: &mut G,
    importance: G::Value,
    atom: &Atom,
) -> autodiff::Result<G::Value> {
    let c = g.constant(atom.threshold);
    let zero = g.constant(0.0);
    let (gap, width) = match atom.direction {
        Direction::Below => (g.sub(importance, c)?, 1.0 - atom.threshold),
        Direction::Above => (g.sub(c, importance)?, atom.threshold),
    };
    let hinge = g.max2(gap, zero)?;
    let w = g.constant(width);
    g.div(hinge, w)
}

/// `tau = 1 - mu * l`.
pub fn atom_truth_on<G: Graph>(
    g: &mut G,
    importance: G::Value,
    atom: &Atom,
) -> autodiff::Result<G::Value> {
    let l = atom_violation_on(g, importance, atom)?;
    let weighted = g.scale(l, atom.strength)?;
    let one = g.constant(1.0);
    g.sub(one, weighted)
}

pub fn atom_violation(importance: f64, atom: &Atom) -> f64 {
    atom_violation_on(&mut Eval, importance, atom).expect("hinge of a finite value")
}

pub fn atom_truth(importance: f64, atom: &Atom) -> f64 {
    atom_truth_on(&mut Eval, importance, atom).expect("hinge of a finite value")
}

pub fn eval_expr_on<G: Graph>(
    g: &mut G,
    expr: &Expr,
    importance: &[G::Value],
    tnorm: TNorm,
) -> autodiff::Result<G::Value> {
    match expr {
        Expr::Atom(a) => atom_truth_on(g, importance[a.feature], a),
        Expr::Not(e) => {
            let v = eval_expr_on(g, e, importance, tnorm)?;
            let one = g.constant(1.0);
            g.sub(one, v)
        }
        Expr::And(a, b) => {
            let x = eval_expr_on(g, a, importance, tnorm)?;
            let y = eval_expr_on(g, b, importance, tnorm)?;
            tnorm.and_on(g, x, y)
        }
        Expr::Or(a, b) => {
            let x = eval_expr_on(g, a, importance, tnorm)?;
            let y = eval_expr_on(g, b, importance, tnorm)?;
            tnorm.or_on(g, x, y)
        }
        Expr::Implies(a, b) => {
            let x = eval_expr_on(g, a, importance, tnorm)?;
            let y = eval_expr_on(g, b, importance, tnorm)?;
            let one = g.constant(1.0);
            let not_x = g.sub(one, x)?;
            tnorm.or_on(g, not_x, y)
        }
    }
}

/// Truth degree of a formula for one importance vector.
pub fn eval_formula(formula: &ConstraintFormula, importance: &[f64], tnorm: TNorm) -> f64 {
    eval_expr_on(&mut Eval, &formula.expr, importance, tnorm).expect("truth of finite values")
}

fn missing_importance() -> NumericalError {
    NumericalError::new(OpTag::Custom, &[])
        .with_context("importance was not computed for a constrained instance")
}

/// Mean truth over the instances admitted by the formula's filter; `1` when
/// none are. `importances[i]` must be present for every admitted instance.
pub fn ground_forall_on<G: Graph>(
    g: &mut G,
    formula: &ConstraintFormula,
    tnorm: TNorm,
    labels: &[u8],
    importances: &[Option<Vec<G::Value>>],
) -> autodiff::Result<G::Value> {
    let mut truths = Vec::new();
    for (&y, imp) in labels.iter().zip(importances) {
        if !formula.admits(y) {
            continue;
        }
        let imp = imp.as_ref().ok_or_else(missing_importance)?;
        truths.push(eval_expr_on(g, &formula.expr, imp, tnorm)?);
    }
    if truths.is_empty() {
        return Ok(g.constant(1.0));
    }
    let total = g.sum(&truths)?;
    g.scale(total, 1.0 / truths.len() as f64)
}

/// `lambda * (1 - Phi)`.
pub fn constraint_loss_on<G: Graph>(
    g: &mut G,
    formula: &ConstraintFormula,
    tnorm: TNorm,
    labels: &[u8],
    importances: &[Option<Vec<G::Value>>],
) -> autodiff::Result<G::Value> {
    let phi = ground_forall_on(g, formula, tnorm, labels, importances)?;
    let one = g.constant(1.0);
    let gap = g.sub(one, phi)?;
    g.scale(gap, formula.lambda)
}

fn plain_importances(
    formula: &ConstraintFormula,
    params: &MlpParams,
    data: &Dataset,
    method: ImportanceMethod,
) -> Result<Vec<Option<Vec<f64>>>, ImportanceError> {
    (0..data.n())
        .map(|i| {
            if formula.admits(data.targets()[i]) {
                importance::importance(params, data.row(i), method).map(|v| Some(v.values))
            } else {
                Ok(None)
            }
        })
        .collect()
}

/// Untaped grounding of `formula` over every row of `data`.
pub fn ground_forall(
    formula: &ConstraintFormula,
    params: &MlpParams,
    data: &Dataset,
    tnorm: TNorm,
    method: ImportanceMethod,
) -> Result<f64, ImportanceError> {
    let imps = plain_importances(formula, params, data, method)?;
    Ok(ground_forall_on(&mut Eval, formula, tnorm, data.targets(), &imps)?)
}

/// Untaped `lambda * (1 - Phi)` over every row of `data`.
pub fn constraint_loss(
    formula: &ConstraintFormula,
    params: &MlpParams,
    data: &Dataset,
    tnorm: TNorm,
    method: ImportanceMethod,
) -> Result<f64, ImportanceError> {
    let imps = plain_importances(formula, params, data, method)?;
    Ok(constraint_loss_on(&mut Eval, formula, tnorm, data.targets(), &imps)?)
}

/// `|rho(s, i)|` for every feature, with `1` at `s` itself.
pub fn correlated_strengths(data: &Dataset, protected: usize) -> Vec<f64> {
    let s = data.column(protected);
    (0..data.d())
        .map(|i| {
            if i == protected {
                1.0
            } else {
                pearson(&s, &data.column(i)).abs()
            }
        })
        .collect()
}

/// Per-feature strengths `lambda_i = lambda_s * |rho(s, i)|`.
pub fn correlated_lambdas(data: &Dataset, protected: usize, lambda_s: f64) -> Vec<f64> {
    correlated_strengths(data, protected)
        .into_iter()
        .map(|mu| lambda_s * mu)
        .collect()
}

/// Conjunction of `I[i] < 0` with strength `|rho(s, i)|` over all features
/// (protected first, at full strength), at global strength `lambda_s`.
/// Uncorrelated features are left out.
pub fn correlated_formula(data: &Dataset, protected: usize, lambda_s: f64) -> ConstraintFormula {
    let mu = correlated_strengths(data, protected);
    let mut atoms = vec![Expr::Atom(Atom::below(protected, 0.0))];
    for (i, &m) in mu.iter().enumerate() {
        if i != protected && m > 0.0 {
            atoms.push(Expr::Atom(Atom::below(i, 0.0).with_strength(m)));
        }
    }
    ConstraintFormula::new(Expr::all(atoms).expect("at least the protected atom")).with_lambda(lambda_s)
}

/// Formulas applied together during training.
///
/// Formulas with the same filter and strength are conjoined into one formula
/// before grounding; the losses of distinct groups are added.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub formulas: Vec<ConstraintFormula>,
    pub tnorm: TNorm,
    pub method: ImportanceMethod,
    pub epsilon: f64,
}

impl ConstraintSet {
    pub fn new(formulas: Vec<ConstraintFormula>) -> Self {
        Self {
            formulas,
            tnorm: TNorm::Product,
            method: ImportanceMethod::Lrp,
            epsilon: importance::DEFAULT_EPSILON,
        }
    }

    /// Parses each text and assigns every formula strength `lambda`.
    pub fn parse<S: AsRef<str>>(
        texts: &[S],
        names: &[String],
        lambda: f64,
    ) -> Result<Self, ConstraintError> {
        let formulas = texts
            .iter()
            .map(|t| parse_formula(t.as_ref(), names).map(|f| f.with_lambda(lambda)))
            .collect::<Result<_, _>>()?;
        Ok(Self::new(formulas))
    }

    pub fn with_tnorm(mut self, tnorm: TNorm) -> Self {
        self.tnorm = tnorm;
        self
    }

    pub fn validate(&self, d: usize) -> Result<(), Error> {
        if self.method == ImportanceMethod::Linear {
            return Err(Error::Config(
                "constraints on the network need an importance method other than linear".into(),
            ));
        }
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        for f in &self.formulas {
            f.validate(d)?;
        }
        Ok(())
    }

    /// Whether any formula with a positive strength grounds over label `y`.
    pub fn applies_to(&self, y: u8) -> bool {
        self.formulas.iter().any(|f| f.lambda > 0.0 && f.admits(y))
    }

    /// Groups with `lambda > 0`, each conjoined into one formula.
    pub fn merged(&self) -> Vec<ConstraintFormula> {
        let mut groups: Vec<(Option<DomainFilter>, f64, Vec<Expr>)> = Vec::new();
        for f in self.formulas.iter().filter(|f| f.lambda > 0.0) {
            match groups
                .iter_mut()
                .find(|(filter, lambda, _)| *filter == f.filter && *lambda == f.lambda)
            {
                Some(g) => g.2.push(f.expr.clone()),
                None => groups.push((f.filter, f.lambda, vec![f.expr.clone()])),
            }
        }
        groups
            .into_iter()
            .map(|(filter, lambda, exprs)| {
                ConstraintFormula::new(Expr::all(exprs).expect("group is nonempty"))
                    .with_filter(filter)
                    .with_lambda(lambda)
            })
            .collect()
    }

    /// Total constraint loss of one batch.
    pub fn loss_on<G: Graph>(
        &self,
        g: &mut G,
        labels: &[u8],
        importances: &[Option<Vec<G::Value>>],
    ) -> autodiff::Result<G::Value> {
        let mut terms = Vec::new();
        for f in self.merged() {
            terms.push(constraint_loss_on(g, &f, self.tnorm, labels, importances)?);
        }
        g.sum(&terms)
    }
}
