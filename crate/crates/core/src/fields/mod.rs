//! Space-time grids, sampled scalar fields and finite-difference calculus.
//!
//! A [`ScalarField`] stores samples on a [`GridSpec`] (row = time index `n`,
//! column = space index `j`). Fields built from formulas can carry a
//! [`ClosedForm`] with exact partial derivatives; `diff_x`/`diff_t` use it
//! when present and fall back to second-order stencils otherwise.

mod closed_form;
mod family;

pub use closed_form::ClosedForm;
pub(crate) use family::shared_grid;
pub use family::{
    read_coefficient_csv, sample_family, write_coefficient_csv, CoefficientSet, ConstantValues, Family,
    SecondFormCoeffs, CSV_HEADER,
};

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Tensor grid over `[x_min, x_max] × [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawGrid", deny_unknown_fields)]
pub struct GridSpec {
    x_min: f64,
    x_max: f64,
    t_min: f64,
    t_max: f64,
    nx: usize,
    nt: usize,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    x_min: f64,
    x_max: f64,
    t_min: f64,
    t_max: f64,
    nx: usize,
    nt: usize,
}

impl TryFrom<RawGrid> for GridSpec {
    type Error = Error;
    fn try_from(r: RawGrid) -> Result<Self> {
        GridSpec::new(r.x_min, r.x_max, r.nx, r.t_min, r.t_max, r.nt)
    }
}

impl GridSpec {
    pub fn new(x_min: f64, x_max: f64, nx: usize, t_min: f64, t_max: f64, nt: usize) -> Result<Self> {
        let bad = |msg: String| Err(Error::InvalidGrid(msg));
        if nx < 3 {
            return bad(format!("nx must be at least 3 (got {nx})"));
        }
        if nt < 3 {
            return bad(format!("nt must be at least 3 (got {nt})"));
        }
        if !(x_min.is_finite() && x_max.is_finite() && x_max > x_min) {
            return bad(format!("x_max must exceed x_min (got [{x_min}, {x_max}])"));
        }
        if !(t_min.is_finite() && t_max.is_finite() && t_max > t_min) {
            return bad(format!("t_max must exceed t_min (got [{t_min}, {t_max}])"));
        }
        Ok(GridSpec { x_min, x_max, t_min, t_max, nx, nt })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }
    pub fn x_max(&self) -> f64 {
        self.x_max
    }
    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn nx(&self) -> usize {
        self.nx
    }
    pub fn nt(&self) -> usize {
        self.nt
    }

    pub fn dx(&self) -> f64 {
        (self.x_max - self.x_min) / (self.nx - 1) as f64
    }

    pub fn dt(&self) -> f64 {
        (self.t_max - self.t_min) / (self.nt - 1) as f64
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x_min + j as f64 * self.dx()
    }

    pub fn t(&self, n: usize) -> f64 {
        self.t_min + n as f64 * self.dt()
    }

    pub fn len(&self) -> usize {
        self.nx * self.nt
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn index(&self, j: usize, n: usize) -> usize {
        n * self.nx + j
    }

    pub fn contains(&self, j: usize, n: usize) -> bool {
        j < self.nx && n < self.nt
    }

    pub fn check_node(&self, j: usize, n: usize) -> Result<usize> {
        if self.contains(j, n) {
            Ok(self.index(j, n))
        } else {
            Err(Error::IndexOutOfRange { j, n, nx: self.nx, nt: self.nt })
        }
    }

    pub fn is_interior(&self, j: usize, n: usize) -> bool {
        j > 0 && n > 0 && j + 1 < self.nx && n + 1 < self.nt
    }

    /// Same extents, different sample counts.
    pub fn with_resolution(&self, nx: usize, nt: usize) -> Result<Self> {
        GridSpec::new(self.x_min, self.x_max, nx, self.t_min, self.t_max, nt)
    }

    /// Swap the roles of `x` and `t`.
    pub fn transposed(&self) -> Self {
        GridSpec {
            x_min: self.t_min,
            x_max: self.t_max,
            t_min: self.x_min,
            t_max: self.x_max,
            nx: self.nt,
            nt: self.nx,
        }
    }

    /// Iterate `(j, n, x, t)` in storage order.
    pub fn nodes(&self) -> impl Iterator<Item = (usize, usize, f64, f64)> + '_ {
        (0..self.nt).flat_map(move |n| (0..self.nx).map(move |j| (j, n, self.x(j), self.t(n))))
    }
}

/// How the partial derivatives entering a computation were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeStrategy {
    Exact,
    FiniteDifference,
    Mixed,
}

impl DerivativeStrategy {
    /// Strategy used when differentiating every field in `fields` once.
    pub fn of<'a>(fields: impl IntoIterator<Item = &'a ScalarField>) -> Self {
        let (mut exact, mut fd) = (false, false);
        for f in fields {
            if f.has_closed_derivative() {
                exact = true;
            } else {
                fd = true;
            }
        }
        match (exact, fd) {
            (true, false) => DerivativeStrategy::Exact,
            (false, _) => DerivativeStrategy::FiniteDifference,
            (true, true) => DerivativeStrategy::Mixed,
        }
    }
}

/// Samples of a real function of `(x, t)` on a grid.
#[derive(Clone)]
pub struct ScalarField {
    grid: GridSpec,
    values: Vec<f64>,
    closed: Option<ClosedForm>,
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ScalarField")
            .field("grid", &self.grid)
            .field("closed_form", &self.closed)
            .field("max_abs", &self.max_abs())
            .finish()
    }
}

impl ScalarField {
    pub fn from_values(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!("{} values for a {}x{} grid", values.len(), grid.nx, grid.nt)));
        }
        Ok(ScalarField { grid, values, closed: None })
    }

    /// Sample `f(x, t)` with no derivative information attached.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> f64) -> Self {
        let values = grid.nodes().map(|(_, _, x, t)| f(x, t)).collect();
        ScalarField { grid, values, closed: None }
    }

    pub fn from_closed_form(grid: GridSpec, closed: ClosedForm) -> Self {
        let values = grid.nodes().map(|(_, _, x, t)| closed.value(x, t)).collect();
        ScalarField { grid, values, closed: Some(closed) }
    }

    pub fn constant(grid: GridSpec, c: f64) -> Self {
        ScalarField::from_closed_form(grid, ClosedForm::constant(c))
    }

    pub fn zeros(grid: GridSpec) -> Self {
        ScalarField::constant(grid, 0.0)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn closed_form(&self) -> Option<&ClosedForm> {
        self.closed.as_ref()
    }

    pub fn has_closed_derivative(&self) -> bool {
        self.closed.as_ref().is_some_and(|c| c.order() >= 1)
    }

    #[inline]
    pub fn at(&self, j: usize, n: usize) -> f64 {
        self.values[self.grid.index(j, n)]
    }

    /// Time level `n` as a slice over `j`.
    pub fn level(&self, n: usize) -> &[f64] {
        let nx = self.grid.nx;
        &self.values[n * nx..(n + 1) * nx]
    }

    /// Drop closed-form information, forcing finite differences downstream.
    pub fn sampled_only(&self) -> Self {
        ScalarField { grid: self.grid, values: self.values.clone(), closed: None }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |acc, v| acc.max(v.abs()))
    }

    /// Root mean square over nodes not on the grid boundary.
    pub fn rms_interior(&self) -> f64 {
        let g = &self.grid;
        let mut sum = 0.0;
        let mut count = 0usize;
        for n in 1..g.nt - 1 {
            for j in 1..g.nx - 1 {
                let v = self.at(j, n);
                sum += v * v;
                count += 1;
            }
        }
        (sum / count as f64).sqrt()
    }

    fn zip_with(&self, other: &ScalarField, op: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        assert_eq!(self.grid, other.grid, "field arithmetic across different grids");
        self.values.iter().zip(&other.values).map(|(a, b)| op(*a, *b)).collect()
    }

    pub fn add(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.zip_with(other, |a, b| a + b),
            closed: self.closed.as_ref().zip(other.closed.as_ref()).map(|(a, b)| a.add(b)),
        }
    }

    pub fn sub(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.zip_with(other, |a, b| a - b),
            closed: self.closed.as_ref().zip(other.closed.as_ref()).map(|(a, b)| a.add(&b.scale(-1.0))),
        }
    }

    pub fn mul(&self, other: &ScalarField) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.zip_with(other, |a, b| a * b),
            closed: self.closed.as_ref().zip(other.closed.as_ref()).map(|(a, b)| a.mul(b)),
        }
    }

    pub fn scale(&self, c: f64) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
            closed: self.closed.as_ref().map(|a| a.scale(c)),
        }
    }

    /// `g ∘ self`; closed form kept via the chain rule when `g'`, `g''` are given.
    pub fn compose(&self, g: [fn(f64) -> f64; 3]) -> ScalarField {
        ScalarField {
            grid: self.grid,
            values: self.values.iter().map(|v| g[0](*v)).collect(),
            closed: self.closed.as_ref().map(|a| a.compose(g)),
        }
    }

    /// Pointwise map with no derivative bookkeeping.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> ScalarField {
        ScalarField { grid: self.grid, values: self.values.iter().map(|v| f(*v)).collect(), closed: None }
    }

    /// ∂f/∂x.
    pub fn diff_x(&self) -> ScalarField {
        match self.closed.as_ref().and_then(ClosedForm::diff_x) {
            Some(d) => ScalarField::from_closed_form(self.grid, d),
            None => self.stencil(Axis::X),
        }
    }

    /// ∂f/∂t.
    pub fn diff_t(&self) -> ScalarField {
        match self.closed.as_ref().and_then(ClosedForm::diff_t) {
            Some(d) => ScalarField::from_closed_form(self.grid, d),
            None => self.stencil(Axis::T),
        }
    }

    fn stencil(&self, axis: Axis) -> ScalarField {
        let g = self.grid;
        let (len, stride, h, lines, line_stride) = match axis {
            Axis::X => (g.nx, 1, g.dx(), g.nt, g.nx),
            Axis::T => (g.nt, g.nx, g.dt(), g.nx, 1),
        };
        let mut out = vec![0.0; g.len()];
        let inv = 1.0 / (2.0 * h);
        for line in 0..lines {
            let base = line * line_stride;
            let f = |i: usize| self.values[base + i * stride];
            out[base] = (-3.0 * f(0) + 4.0 * f(1) - f(2)) * inv;
            for i in 1..len - 1 {
                out[base + i * stride] = (f(i + 1) - f(i - 1)) * inv;
            }
            let last = len - 1;
            out[base + last * stride] = (3.0 * f(last) - 4.0 * f(last - 1) + f(last - 2)) * inv;
        }
        ScalarField { grid: g, values: out, closed: None }
    }
}

#[derive(Clone, Copy)]
enum Axis {
    X,
    T,
}
