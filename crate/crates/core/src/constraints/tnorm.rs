use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::autodiff::{self, Eval, Graph};

/// Fuzzy conjunction; each comes with its dual conorm for disjunction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TNorm {
    /// `ab`, paired with the probabilistic sum `a + b - ab`.
    #[default]
    Product,
    /// Goedel: `min(a, b)`, paired with `max(a, b)`.
    Minimum,
    /// `max(a + b - 1, 0)`, paired with `min(a + b, 1)`.
    Lukasiewicz,
}

impl TNorm {
    pub fn and_on<G: Graph>(self, g: &mut G, a: G::Value, b: G::Value) -> autodiff::Result<G::Value> {
        match self {
            TNorm::Product => g.mul(a, b),
            TNorm::Minimum => g.min2(a, b),
            TNorm::Lukasiewicz => {
                let s = g.add(a, b)?;
                let one = g.constant(1.0);
                let t = g.sub(s, one)?;
                let zero = g.constant(0.0);
                g.max2(t, zero)
            }
        }
    }

    pub fn or_on<G: Graph>(self, g: &mut G, a: G::Value, b: G::Value) -> autodiff::Result<G::Value> {
        match self {
            TNorm::Product => {
                let s = g.add(a, b)?;
                let p = g.mul(a, b)?;
                g.sub(s, p)
            }
            TNorm::Minimum => g.max2(a, b),
            TNorm::Lukasiewicz => {
                let s = g.add(a, b)?;
                let one = g.constant(1.0);
                g.min2(s, one)
            }
        }
    }

    pub fn and(self, a: f64, b: f64) -> f64 {
        self.and_on(&mut Eval, a, b).expect("t-norm of unit values is finite")
    }

    pub fn or(self, a: f64, b: f64) -> f64 {
        self.or_on(&mut Eval, a, b).expect("t-conorm of unit values is finite")
    }
}

impl fmt::Display for TNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TNorm::Product => "product",
            TNorm::Minimum => "minimum",
            TNorm::Lukasiewicz => "lukasiewicz",
        })
    }
}

impl FromStr for TNorm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "product" => Ok(TNorm::Product),
            "minimum" | "godel" | "goedel" => Ok(TNorm::Minimum),
            "lukasiewicz" => Ok(TNorm::Lukasiewicz),
            other => Err(format!(
                "unknown t-norm `{other}` (expected product, minimum or lukasiewicz)"
            )),
        }
    }
}
