//! Scalar reverse-mode automatic differentiation.
//!
//! A [`Tape`] records every scalar operation of one forward evaluation as a
//! node holding its value and the local partial derivatives with respect to
//! its parents. [`Tape::backward`] then accumulates adjoints in reverse
//! creation order, which is a valid reverse topological order because parents
//! are always created before their children.
//!
//! Model code is written once against the [`Graph`] trait and runs either on a
//! tape (to obtain gradients) or on [`Eval`] (plain `f64` arithmetic). Both
//! implementations perform the same floating point operations, so taped and
//! untaped evaluations agree bit for bit.
//!
//! ```
//! use ctfi::autodiff::{Graph, Tape};
//!
//! let mut tape = Tape::new();
//! let x = tape.param(0, 2.0);
//! let y = tape.param(1, 3.0);
//! let xy = tape.mul(x, y).unwrap();
//! let root = tape.add(xy, x).unwrap();
//! let grads = tape.backward(root).unwrap();
//! assert_eq!(grads.get(0), 4.0);
//! assert_eq!(grads.get(1), 2.0);
//! ```

use std::fmt;

pub mod check;

pub use check::{grad_check, GradCheckReport};

/// Operation recorded on a tape node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OpTag {
    Const,
    Param,
    Add,
    Sub,
    Mul,
    Div,
    Neg,
    Abs,
    Max2,
    Relu,
    Exp,
    Log,
    Sigmoid,
    /// Caller-supplied value and partials, see [`Tape::custom`].
    Custom,
}

impl fmt::Display for OpTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            OpTag::Const => "const",
            OpTag::Param => "param",
            OpTag::Add => "add",
            OpTag::Sub => "sub",
            OpTag::Mul => "mul",
            OpTag::Div => "div",
            OpTag::Neg => "neg",
            OpTag::Abs => "abs",
            OpTag::Max2 => "max2",
            OpTag::Relu => "relu",
            OpTag::Exp => "exp",
            OpTag::Log => "log",
            OpTag::Sigmoid => "sigmoid",
            OpTag::Custom => "custom",
        };
        f.write_str(name)
    }
}

/// A value or adjoint left the finite reals, or an operation was applied
/// outside its domain.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("numerical error in `{op}` with operands {operands:?}{}", context_suffix(.context))]
pub struct NumericalError {
    pub op: OpTag,
    pub operands: Vec<f64>,
    pub context: Option<String>,
}

fn context_suffix(context: &Option<String>) -> String {
    match context {
        Some(c) => format!(" ({c})"),
        None => String::new(),
    }
}

impl NumericalError {
    pub fn new(op: OpTag, operands: &[f64]) -> Self {
        Self {
            op,
            operands: operands.to_vec(),
            context: None,
        }
    }

    /// Attaches a location description such as `epoch 3, step 17`.
    pub fn with_context(mut self, context: impl Into<String>) -> Self {
        self.context = Some(context.into());
        self
    }
}

pub type Result<T> = std::result::Result<T, NumericalError>;

/// Handle to a node on a [`Tape`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var(u32);

impl Var {
    pub fn id(self) -> usize {
        self.0 as usize
    }
}

/// Snapshot of one tape node.
#[derive(Debug, Clone, PartialEq)]
pub struct TapeNode {
    pub id: usize,
    pub value: f64,
    pub adjoint: f64,
    pub op: OpTag,
    pub parents: Vec<(usize, f64)>,
}

/// Arithmetic over some scalar representation.
///
/// Every fallible operation reports a [`NumericalError`] when its result is
/// not finite or its operand is outside the domain (`div` by zero, `log` of a
/// non-positive number).
pub trait Graph {
    type Value: Copy;

    fn constant(&mut self, v: f64) -> Self::Value;
    /// Leaf for parameter coordinate `coord`; differentiable on a tape.
    fn leaf(&mut self, coord: usize, v: f64) -> Self::Value;
    fn value(&self, x: Self::Value) -> f64;

    fn add(&mut self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn sub(&mut self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn mul(&mut self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn div(&mut self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    fn neg(&mut self, a: Self::Value) -> Result<Self::Value>;
    /// `abs'(0) = 0`.
    fn abs(&mut self, a: Self::Value) -> Result<Self::Value>;
    /// Routes the gradient to the larger argument; ties go to `a`.
    fn max2(&mut self, a: Self::Value, b: Self::Value) -> Result<Self::Value>;
    /// `relu'(0) = 0`.
    fn relu(&mut self, a: Self::Value) -> Result<Self::Value>;
    fn exp(&mut self, a: Self::Value) -> Result<Self::Value>;
    fn log(&mut self, a: Self::Value) -> Result<Self::Value>;
    fn sigmoid(&mut self, a: Self::Value) -> Result<Self::Value>;

    /// `min(a, b)` as `-max2(-a, -b)`; ties go to `a`.
    fn min2(&mut self, a: Self::Value, b: Self::Value) -> Result<Self::Value> {
        let na = self.neg(a)?;
        let nb = self.neg(b)?;
        let m = self.max2(na, nb)?;
        self.neg(m)
    }

    /// Multiplication by a constant, `k * a`.
    fn scale(&mut self, a: Self::Value, k: f64) -> Result<Self::Value>;

    /// Left fold with `add`; the empty sum is the constant 0.
    fn sum(&mut self, terms: &[Self::Value]) -> Result<Self::Value> {
        let mut iter = terms.iter();
        let Some(&first) = iter.next() else {
            return Ok(self.constant(0.0));
        };
        iter.try_fold(first, |acc, &t| self.add(acc, t))
    }
}

fn finite(op: OpTag, v: f64, operands: &[f64]) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(NumericalError::new(op, operands))
    }
}

fn sigmoid_f64(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// Plain `f64` evaluation without recording anything.
#[derive(Debug, Default, Clone, Copy)]
pub struct Eval;

impl Graph for Eval {
    type Value = f64;

    fn constant(&mut self, v: f64) -> f64 {
        v
    }

    fn leaf(&mut self, _coord: usize, v: f64) -> f64 {
        v
    }

    fn value(&self, x: f64) -> f64 {
        x
    }

    fn scale(&mut self, a: f64, k: f64) -> Result<f64> {
        finite(OpTag::Mul, k * a, &[k, a])
    }

    fn add(&mut self, a: f64, b: f64) -> Result<f64> {
        finite(OpTag::Add, a + b, &[a, b])
    }

    fn sub(&mut self, a: f64, b: f64) -> Result<f64> {
        finite(OpTag::Sub, a - b, &[a, b])
    }

    fn mul(&mut self, a: f64, b: f64) -> Result<f64> {
        finite(OpTag::Mul, a * b, &[a, b])
    }

    fn div(&mut self, a: f64, b: f64) -> Result<f64> {
        if b == 0.0 {
            return Err(NumericalError::new(OpTag::Div, &[a, b]));
        }
        finite(OpTag::Div, a / b, &[a, b])
    }

    fn neg(&mut self, a: f64) -> Result<f64> {
        finite(OpTag::Neg, -a, &[a])
    }

    fn abs(&mut self, a: f64) -> Result<f64> {
        finite(OpTag::Abs, a.abs(), &[a])
    }

    fn max2(&mut self, a: f64, b: f64) -> Result<f64> {
        finite(OpTag::Max2, if a >= b { a } else { b }, &[a, b])
    }

    fn relu(&mut self, a: f64) -> Result<f64> {
        finite(OpTag::Relu, if a > 0.0 { a } else { 0.0 }, &[a])
    }

    fn exp(&mut self, a: f64) -> Result<f64> {
        finite(OpTag::Exp, a.exp(), &[a])
    }

    fn log(&mut self, a: f64) -> Result<f64> {
        if !(a > 0.0) {
            return Err(NumericalError::new(OpTag::Log, &[a]));
        }
        finite(OpTag::Log, a.ln(), &[a])
    }

    fn sigmoid(&mut self, a: f64) -> Result<f64> {
        finite(OpTag::Sigmoid, sigmoid_f64(a), &[a])
    }
}

/// Dynamic computation graph over scalars.
///
/// Nodes are stored in creation order with dense ids. Parent edges are kept in
/// a flat CSR layout: node `i` owns `edges[offsets[i]..offsets[i + 1]]`.
#[derive(Debug, Clone)]
pub struct Tape {
    values: Vec<f64>,
    ops: Vec<OpTag>,
    offsets: Vec<u32>,
    edges: Vec<(u32, f64)>,
    adjoints: Vec<f64>,
    params: Vec<(usize, Var)>,
    num_coords: usize,
}

impl Default for Tape {
    fn default() -> Self {
        Self::new()
    }
}

impl Tape {
    pub fn new() -> Self {
        Self::with_capacity(0)
    }

    pub fn with_capacity(nodes: usize) -> Self {
        let mut offsets = Vec::with_capacity(nodes + 1);
        offsets.push(0);
        Self {
            values: Vec::with_capacity(nodes),
            ops: Vec::with_capacity(nodes),
            offsets,
            edges: Vec::with_capacity(nodes * 2),
            adjoints: Vec::new(),
            params: Vec::new(),
            num_coords: 0,
        }
    }

    /// Number of nodes recorded so far.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Drops all nodes and parameters while keeping the allocations.
    pub fn clear(&mut self) {
        self.values.clear();
        self.ops.clear();
        self.offsets.truncate(1);
        self.edges.clear();
        self.adjoints.clear();
        self.params.clear();
        self.num_coords = 0;
    }

    fn push(&mut self, op: OpTag, value: f64, parents: &[(Var, f64)]) -> Var {
        let id = self.values.len();
        assert!(id < u32::MAX as usize, "tape node limit exceeded");
        self.values.push(value);
        self.ops.push(op);
        self.edges
            .extend(parents.iter().map(|&(p, d)| (p.0, d)));
        self.offsets.push(self.edges.len() as u32);
        Var(id as u32)
    }

    /// Registers a differentiable leaf for parameter coordinate `coord`.
    pub fn param(&mut self, coord: usize, value: f64) -> Var {
        let v = self.push(OpTag::Param, value, &[]);
        self.params.push((coord, v));
        self.num_coords = self.num_coords.max(coord + 1);
        v
    }

    /// Records a node with an explicit value and explicit local partials.
    ///
    /// Parents must already be on this tape, which keeps the graph acyclic.
    pub fn custom(&mut self, value: f64, parents: &[(Var, f64)]) -> Result<Var> {
        if !value.is_finite() || parents.iter().any(|(_, d)| !d.is_finite()) {
            let operands: Vec<f64> = parents.iter().map(|&(p, _)| self.val(p)).collect();
            return Err(NumericalError::new(OpTag::Custom, &operands));
        }
        assert!(parents.iter().all(|(p, _)| p.id() < self.len()));
        Ok(self.push(OpTag::Custom, value, parents))
    }

    fn val(&self, v: Var) -> f64 {
        self.values[v.id()]
    }

    /// Inspects a node; adjoints are those of the most recent backward pass.
    pub fn node(&self, v: Var) -> TapeNode {
        let i = v.id();
        let (lo, hi) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
        TapeNode {
            id: i,
            value: self.values[i],
            adjoint: self.adjoints.get(i).copied().unwrap_or(0.0),
            op: self.ops[i],
            parents: self.edges[lo..hi]
                .iter()
                .map(|&(p, d)| (p as usize, d))
                .collect(),
        }
    }

    /// Reverse sweep from `root`.
    ///
    /// Every node on the tape is visited exactly once, from the newest to the
    /// oldest. Parameters that do not influence `root` get gradient 0.
    pub fn backward(&mut self, root: Var) -> Result<Gradients> {
        let n = self.values.len();
        self.adjoints.clear();
        self.adjoints.resize(n, 0.0);
        self.adjoints[root.id()] = 1.0;
        let mut visited = 0;
        for i in (0..n).rev() {
            visited += 1;
            let adj = self.adjoints[i];
            if !adj.is_finite() {
                return Err(NumericalError::new(self.ops[i], &[self.values[i], adj])
                    .with_context(format!("adjoint of node {i}")));
            }
            if adj == 0.0 {
                continue;
            }
            let (lo, hi) = (self.offsets[i] as usize, self.offsets[i + 1] as usize);
            for &(p, d) in &self.edges[lo..hi] {
                self.adjoints[p as usize] += adj * d;
            }
        }
        let mut grads = vec![0.0; self.num_coords];
        for &(coord, v) in &self.params {
            grads[coord] += self.adjoints[v.id()];
        }
        Ok(Gradients {
            values: grads,
            nodes_visited: visited,
        })
    }
}

/// Gradient of a root with respect to registered parameter coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    values: Vec<f64>,
    nodes_visited: usize,
}

impl Gradients {
    /// Gradient for `coord`; coordinates never registered are 0.
    pub fn get(&self, coord: usize) -> f64 {
        self.values.get(coord).copied().unwrap_or(0.0)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.values
    }

    /// Number of nodes the reverse sweep went through.
    pub fn nodes_visited(&self) -> usize {
        self.nodes_visited
    }
}

impl Graph for Tape {
    type Value = Var;

    fn constant(&mut self, v: f64) -> Var {
        self.push(OpTag::Const, v, &[])
    }

    fn leaf(&mut self, coord: usize, v: f64) -> Var {
        self.param(coord, v)
    }

    fn value(&self, x: Var) -> f64 {
        self.val(x)
    }

    fn scale(&mut self, a: Var, k: f64) -> Result<Var> {
        let x = self.val(a);
        let v = finite(OpTag::Mul, k * x, &[k, x])?;
        Ok(self.push(OpTag::Mul, v, &[(a, k)]))
    }

    fn add(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.val(a), self.val(b));
        let v = finite(OpTag::Add, x + y, &[x, y])?;
        Ok(self.push(OpTag::Add, v, &[(a, 1.0), (b, 1.0)]))
    }

    fn sub(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.val(a), self.val(b));
        let v = finite(OpTag::Sub, x - y, &[x, y])?;
        Ok(self.push(OpTag::Sub, v, &[(a, 1.0), (b, -1.0)]))
    }

    fn mul(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.val(a), self.val(b));
        let v = finite(OpTag::Mul, x * y, &[x, y])?;
        Ok(self.push(OpTag::Mul, v, &[(a, y), (b, x)]))
    }

    fn div(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.val(a), self.val(b));
        if y == 0.0 {
            return Err(NumericalError::new(OpTag::Div, &[x, y]));
        }
        let v = finite(OpTag::Div, x / y, &[x, y])?;
        let db = finite(OpTag::Div, -v / y, &[x, y])?;
        Ok(self.push(OpTag::Div, v, &[(a, 1.0 / y), (b, db)]))
    }

    fn neg(&mut self, a: Var) -> Result<Var> {
        let x = self.val(a);
        Ok(self.push(OpTag::Neg, -x, &[(a, -1.0)]))
    }

    fn abs(&mut self, a: Var) -> Result<Var> {
        let x = self.val(a);
        let d = if x > 0.0 {
            1.0
        } else if x < 0.0 {
            -1.0
        } else {
            0.0
        };
        Ok(self.push(OpTag::Abs, x.abs(), &[(a, d)]))
    }

    fn max2(&mut self, a: Var, b: Var) -> Result<Var> {
        let (x, y) = (self.val(a), self.val(b));
        if x >= y {
            Ok(self.push(OpTag::Max2, x, &[(a, 1.0), (b, 0.0)]))
        } else {
            Ok(self.push(OpTag::Max2, y, &[(a, 0.0), (b, 1.0)]))
        }
    }

    fn relu(&mut self, a: Var) -> Result<Var> {
        let x = self.val(a);
        if x > 0.0 {
            Ok(self.push(OpTag::Relu, x, &[(a, 1.0)]))
        } else {
            Ok(self.push(OpTag::Relu, 0.0, &[(a, 0.0)]))
        }
    }

    fn exp(&mut self, a: Var) -> Result<Var> {
        let x = self.val(a);
        let v = finite(OpTag::Exp, x.exp(), &[x])?;
        Ok(self.push(OpTag::Exp, v, &[(a, v)]))
    }

    fn log(&mut self, a: Var) -> Result<Var> {
        let x = self.val(a);
        if !(x > 0.0) {
            return Err(NumericalError::new(OpTag::Log, &[x]));
        }
        let v = finite(OpTag::Log, x.ln(), &[x])?;
        let d = finite(OpTag::Log, 1.0 / x, &[x])?;
        Ok(self.push(OpTag::Log, v, &[(a, d)]))
    }

    fn sigmoid(&mut self, a: Var) -> Result<Var> {
        let x = self.val(a);
        let s = sigmoid_f64(x);
        Ok(self.push(OpTag::Sigmoid, s, &[(a, s * (1.0 - s))]))
    }
}
