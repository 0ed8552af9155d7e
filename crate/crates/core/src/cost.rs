//! The canonical reciprocal cost `J(x) = (x + 1/x)/2 - 1` and checks of the
//! identities it satisfies.
//!
//! `J` is defined on positive ratios. In the log coordinate `t = ln x` it is
//! `cosh(t) - 1`, which is what [`log_lift`] evaluates.

use thiserror::Error;

/// Default tolerance for one-sided identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Default tolerance for two-sided residuals such as the composition law.
pub const RESIDUAL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CostError {
    #[error("ratio must be positive and finite, got {0}")]
    Domain(f64),
    #[error("calibration ratio is a limit at t = 0, not a value")]
    CalibrationAtZero,
    #[error("argument must be finite, got {0}")]
    NonFinite(f64),
    #[error("invalid parameter: {0}")]
    Parameter(&'static str),
    #[error("no convergence after {iterations} iterations (last iterate {last})")]
    IterationLimit { iterations: usize, last: f64 },
}

/// A dimensionless ratio `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct Ratio(f64);

impl Ratio {
    pub fn new(value: f64) -> Result<Self, CostError> {
        if value.is_finite() && value > 0.0 {
            Ok(Ratio(value))
        } else {
            Err(CostError::Domain(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub fn recip(self) -> Ratio {
        Ratio(1.0 / self.0)
    }
}

impl TryFrom<f64> for Ratio {
    type Error = CostError;

    fn try_from(value: f64) -> Result<Self, Self::Error> {
        Ratio::new(value)
    }
}

/// A nonnegative cost value.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct CostValue(f64);

impl CostValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `J(x) = (x + 1/x)/2 - 1`.
///
/// Evaluated as `(x - 1)^2 / (2x)`, which is algebraically identical but
/// keeps full relative precision near `x = 1` and is never negative.
pub fn eval_cost(x: Ratio) -> CostValue {
    let x = x.value();
    let d = x - 1.0;
    CostValue(d * d / (2.0 * x))
}

/// Convenience wrapper validating a raw `f64`.
pub fn cost(x: f64) -> Result<f64, CostError> {
    Ok(eval_cost(Ratio::new(x)?).value())
}

/// `F(xy) + F(x/y) - 2F(x)F(y) - 2F(x) - 2F(y)`, zero in exact arithmetic.
pub fn composition_residual(x: Ratio, y: Ratio) -> f64 {
    let (xv, yv) = (x.value(), y.value());
    let f = |r: f64| eval_cost(Ratio(r)).value();
    let (fx, fy) = (f(xv), f(yv));
    f(xv * yv) + f(xv / yv) - 2.0 * fx * fy - 2.0 * fx - 2.0 * fy
}

/// `cosh(t) - 1`, computed as `2 sinh^2(t/2)` to avoid cancellation near 0.
pub fn log_lift(t: f64) -> Result<CostValue, CostError> {
    if !t.is_finite() {
        return Err(CostError::NonFinite(t));
    }
    let s = (t / 2.0).sinh();
    Ok(CostValue(2.0 * s * s))
}

/// `2 (cosh(t) - 1) / t^2`, which tends to 1 as `t -> 0`.
pub fn calibration_ratio(t: f64) -> Result<f64, CostError> {
    if t == 0.0 {
        return Err(CostError::CalibrationAtZero);
    }
    let lifted = log_lift(t)?.value();
    Ok(2.0 * lifted / (t * t))
}

/// Iterates `x <- 1 + 1/x` from `x0` until successive iterates differ by at
/// most `tol`. The limit is the golden ratio for every positive start.
pub fn fixed_point_phi(x0: Ratio, tol: f64, max_iter: usize) -> Result<Ratio, CostError> {
    if tol.is_nan() || tol <= 0.0 || !tol.is_finite() {
        return Err(CostError::Parameter("tol must be positive and finite"));
    }
    if max_iter == 0 {
        return Err(CostError::Parameter("max_iter must be at least 1"));
    }
    let mut x = x0.value();
    for _ in 0..max_iter {
        let next = 1.0 + 1.0 / x;
        if (next - x).abs() <= tol {
            debug_assert!((next * next - next - 1.0).abs() <= 10.0 * tol);
            return Ok(Ratio(next));
        }
        x = next;
    }
    Err(CostError::IterationLimit {
        iterations: max_iter,
        last: x,
    })
}

/// Perfect-balance predicate: `J(x) <= tol`.
pub fn bal(x: Ratio, tol: f64) -> bool {
    eval_cost(x).value() <= tol
}

/// `J(x) < infinity`, which for this `J` holds exactly on finite positive `x`.
pub fn exists(x: f64) -> bool {
    x.is_finite() && x > 0.0
}

/// `n` points spaced uniformly in `ln x` over `[lo, hi]`, endpoints included.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let step = (b - a) / (n - 1) as f64;
            (0..n).map(|i| (a + step * i as f64).exp()).collect()
        }
    }
}

/// Worst-case residuals of the cost identities over a log grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridReport {
    pub points: usize,
    /// `max |J(x) - J(1/x)| / max(1, J(x))`
    pub reciprocity: f64,
    /// `max |residual(x, y)| / (1 + |F(xy)| + |F(x/y)|)` over grid pairs
    pub composition: f64,
    /// `min J(x)` over the grid
    pub min_cost: f64,
    /// `max |calibration_ratio(t) - 1| / t^2` over `t` in {1e-2, 1e-3, 1e-4}
    pub calibration: f64,
}

impl GridReport {
    pub fn passes(&self) -> bool {
        self.reciprocity <= IDENTITY_TOL
            && self.composition <= RESIDUAL_TOL
            && self.min_cost >= -1e-15
            && self.calibration <= 0.1
    }
}

/// Evaluates the reciprocity, composition and nonnegativity identities on an
/// `n`-point log grid over `[lo, hi]` (composition on the full `n x n` grid).
pub fn check_grid(n: usize, lo: f64, hi: f64) -> Result<GridReport, CostError> {
    Ratio::new(lo)?;
    Ratio::new(hi)?;
    if n == 0 {
        return Err(CostError::Parameter("grid must have at least one point"));
    }
    let grid = log_grid(lo, hi, n);
    let mut reciprocity = 0.0f64;
    let mut min_cost = f64::INFINITY;
    for &x in &grid {
        let r = Ratio(x);
        let j = eval_cost(r).value();
        let jr = eval_cost(r.recip()).value();
        reciprocity = reciprocity.max((j - jr).abs() / j.max(1.0));
        min_cost = min_cost.min(j);
    }
    let mut composition = 0.0f64;
    for &x in &grid {
        for &y in &grid {
            let res = composition_residual(Ratio(x), Ratio(y));
            let scale = 1.0 + cost(x * y)?.abs() + cost(x / y)?.abs();
            composition = composition.max(res.abs() / scale);
        }
    }
    let mut calibration = 0.0f64;
    for t in [1e-2, 1e-3, 1e-4] {
        let c = calibration_ratio(t)?;
        calibration = calibration.max((c - 1.0).abs() / (t * t));
    }
    Ok(GridReport {
        points: n,
        reciprocity,
        composition,
        min_cost,
        calibration,
    })
}
