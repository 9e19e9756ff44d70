//! Central finite-difference gradient checking.

use std::fmt;

use super::{Graph, Result, Tape, Var};

/// Smallest denominator of the relative error. Central differences cannot
/// resolve gradients much below this from roundoff in the function values.
pub const FLOOR: f64 = 1e-6;

/// Per-coordinate comparison between `backward()` and central differences.
#[derive(Debug, Clone, PartialEq)]
pub struct GradCheckReport {
    pub analytic: Vec<f64>,
    pub numeric: Vec<f64>,
    /// `|analytic - numeric| / max(|analytic|, |numeric|, FLOOR)`.
    pub rel_errors: Vec<f64>,
    pub tolerance: f64,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.rel_errors.iter().copied().fold(0.0, f64::max)
    }

    /// Coordinate with the largest relative error.
    pub fn worst(&self) -> Option<usize> {
        self.rel_errors
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
    }

    /// Coordinates whose relative error exceeds the tolerance.
    pub fn failing(&self) -> Vec<usize> {
        self.rel_errors
            .iter()
            .enumerate()
            .filter(|(_, &e)| e > self.tolerance)
            .map(|(i, _)| i)
            .collect()
    }

    pub fn passed(&self) -> bool {
        self.max_rel_error() <= self.tolerance
    }
}

impl fmt::Display for GradCheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.passed() {
            return write!(
                f,
                "gradient check passed: max rel. error {:.3e} <= {:.1e}",
                self.max_rel_error(),
                self.tolerance
            );
        }
        write!(f, "gradient check failed at coordinates")?;
        for i in self.failing() {
            write!(
                f,
                " [{i}: backward {:.6e}, finite diff {:.6e}, rel. error {:.3e}]",
                self.analytic[i], self.numeric[i], self.rel_errors[i]
            )?;
        }
        Ok(())
    }
}

pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    let scale = analytic.abs().max(numeric.abs()).max(FLOOR);
    (analytic - numeric).abs() / scale
}

/// Compares the tape gradient of `f` at `params` with central differences.
///
/// `f` receives a fresh tape and one parameter node per coordinate (registered
/// with coordinate ids `0..params.len()`) and returns the scalar root. It must
/// be deterministic.
pub fn grad_check<F>(f: F, params: &[f64], step: f64, tolerance: f64) -> Result<GradCheckReport>
where
    F: Fn(&mut Tape, &[Var]) -> Result<Var>,
{
    assert!(step > 0.0, "finite-difference step must be positive");
    let eval = |values: &[f64]| -> Result<(Tape, Var)> {
        let mut tape = Tape::new();
        let vars: Vec<Var> = values
            .iter()
            .enumerate()
            .map(|(i, &v)| tape.param(i, v))
            .collect();
        let root = f(&mut tape, &vars)?;
        Ok((tape, root))
    };

    let (mut tape, root) = eval(params)?;
    let grads = tape.backward(root)?;
    let analytic: Vec<f64> = (0..params.len()).map(|i| grads.get(i)).collect();

    let mut numeric = Vec::with_capacity(params.len());
    let mut shifted = params.to_vec();
    for i in 0..params.len() {
        shifted[i] = params[i] + step;
        let (t, r) = eval(&shifted)?;
        let up = t.value(r);
        shifted[i] = params[i] - step;
        let (t, r) = eval(&shifted)?;
        let down = t.value(r);
        shifted[i] = params[i];
        numeric.push((up - down) / (2.0 * step));
    }

    let rel_errors = analytic
        .iter()
        .zip(&numeric)
        .map(|(&a, &n)| relative_error(a, n))
        .collect();
    Ok(GradCheckReport {
        analytic,
        numeric,
        rel_errors,
        tolerance,
    })
}
