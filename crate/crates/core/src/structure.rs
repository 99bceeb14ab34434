//! Connection forms, the structure-equation residuals, curvature and the
//! three fundamental forms.
//!
//! Every one-form is stored as its `(dt, dx)` coefficient pair. The
//! structure residuals are evaluated term by term in the printed layout
//! rather than a simplified equivalent, so a report certifies exactly the
//! five equations below:
//!
//! ```text
//! eq1: u12_x - v12_t + u23 v13 - u13 v23
//! eq2: u13_x - v13_t + u12 v23 - u23 v12
//! eq3: u23_x - v23_t + (h11 h22 - h²)(u13 v12 - u12 v13)
//! eq4: (h11 u12 + h u13)_x - (h11 v12 + h v13)_t + u23 (h v12 + h22 v13) - v23 (h u12 + h22 u13)
//! eq5: (h u12 + h22 u13)_x - (h v12 + h22 v13)_t + v23 (h11 u12 + h u13) - u23 (h11 v12 + h v13)
//! ```

use serde::{Deserialize, Serialize};

use crate::fields::{shared_grid, CoefficientSet, DerivativeStrategy, GridSpec, ScalarField, SecondFormCoeffs};
use crate::Result;

/// A one-form `a dt + b dx`.
#[derive(Debug, Clone)]
pub struct OneForm {
    pub dt: ScalarField,
    pub dx: ScalarField,
}

impl OneForm {
    pub fn new(dt: ScalarField, dx: ScalarField) -> Self {
        OneForm { dt, dx }
    }

    /// Coefficient of `dt ∧ dx` in `d(a dt + b dx) = (b_t - a_x) dt ∧ dx`.
    pub fn exterior_derivative(&self) -> ScalarField {
        self.dx.diff_t().sub(&self.dt.diff_x())
    }

    /// Coefficient of `dt ∧ dx` in `self ∧ other`.
    pub fn wedge(&self, other: &OneForm) -> ScalarField {
        self.dt.mul(&other.dx).sub(&self.dx.mul(&other.dt))
    }

    pub fn neg(&self) -> OneForm {
        OneForm { dt: self.dt.scale(-1.0), dx: self.dx.scale(-1.0) }
    }
}

/// `ω₁, ω₂` (coframe) and `ω₁₂, ω₁₃, ω₂₃` (connection); `ω₃ = 0`.
#[derive(Debug, Clone)]
pub struct FormBundle {
    pub omega1: OneForm,
    pub omega2: OneForm,
    pub omega12: OneForm,
    pub omega13: OneForm,
    pub omega23: OneForm,
}

impl FormBundle {
    pub fn grid(&self) -> &GridSpec {
        self.omega1.dt.grid()
    }
}

/// `ω₁₃ = h11 ω₁ + h ω₂` and `ω₂₃ = h ω₁ + h22 ω₂`, coefficient by coefficient.
pub(crate) fn normal_connection(c: &CoefficientSet, s: &SecondFormCoeffs) -> (OneForm, OneForm) {
    let combo = |a: &ScalarField, x: &ScalarField, b: &ScalarField, y: &ScalarField| a.mul(x).add(&b.mul(y));
    let omega13 = OneForm::new(combo(&s.h11, &c.u12, &s.h, &c.u13), combo(&s.h11, &c.v12, &s.h, &c.v13));
    let omega23 = OneForm::new(combo(&s.h, &c.u12, &s.h22, &c.u13), combo(&s.h, &c.v12, &s.h22, &c.v13));
    (omega13, omega23)
}

pub fn build_forms(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<FormBundle> {
    shared_grid(c, s)?;
    let (omega13, omega23) = normal_connection(c, s);
    Ok(FormBundle {
        omega1: OneForm::new(c.u12.clone(), c.v12.clone()),
        omega2: OneForm::new(c.u13.clone(), c.v13.clone()),
        omega12: OneForm::new(c.u23.clone(), c.v23.clone()),
        omega13,
        omega23,
    })
}

/// Max-abs and interior RMS of one residual field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquationResidual {
    pub equation: String,
    pub max_abs: f64,
    pub rms_interior: f64,
}

/// Per-equation residual norms over a grid.
///
/// The pointwise residual fields are kept alongside the norms but are not
/// serialized.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ResidualReport {
    pub grid: GridSpec,
    pub derivative_strategy: DerivativeStrategy,
    pub residuals: Vec<EquationResidual>,
    #[serde(skip)]
    fields: Vec<ScalarField>,
}

impl ResidualReport {
    pub fn from_fields(grid: GridSpec, strategy: DerivativeStrategy, fields: Vec<(String, ScalarField)>) -> Self {
        let residuals = fields
            .iter()
            .map(|(label, f)| EquationResidual {
                equation: label.clone(),
                max_abs: f.max_abs(),
                rms_interior: f.rms_interior(),
            })
            .collect();
        ResidualReport {
            grid,
            derivative_strategy: strategy,
            residuals,
            fields: fields.into_iter().map(|(_, f)| f).collect(),
        }
    }

    pub fn get(&self, label: &str) -> Option<&EquationResidual> {
        self.residuals.iter().find(|r| r.equation == label)
    }

    /// Pointwise residual for `label`; absent on deserialized reports.
    pub fn field(&self, label: &str) -> Option<&ScalarField> {
        let i = self.residuals.iter().position(|r| r.equation == label)?;
        self.fields.get(i)
    }

    pub fn max_abs(&self) -> f64 {
        self.residuals.iter().fold(0.0, |acc, r| acc.max(r.max_abs))
    }

    pub fn all_finite(&self) -> bool {
        self.residuals.iter().all(|r| r.max_abs.is_finite() && r.rms_interior.is_finite())
    }
}

pub const STRUCTURE_LABELS: [&str; 5] = ["eq1", "eq2", "eq3", "eq4", "eq5"];

pub fn residuals_structure(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<ResidualReport> {
    let grid = shared_grid(c, s)?;
    let (omega13, omega23) = normal_connection(c, s);
    let strategy = DerivativeStrategy::of([
        &c.u12,
        &c.v12,
        &c.u13,
        &c.v13,
        &c.u23,
        &c.v23,
        &omega13.dt,
        &omega13.dx,
        &omega23.dt,
        &omega23.dx,
    ]);

    let (u12_x, v12_t) = (c.u12.diff_x(), c.v12.diff_t());
    let (u13_x, v13_t) = (c.u13.diff_x(), c.v13.diff_t());
    let (u23_x, v23_t) = (c.u23.diff_x(), c.v23.diff_t());
    let (p_x, r_t) = (omega13.dt.diff_x(), omega13.dx.diff_t());
    let (q_x, s_t) = (omega23.dt.diff_x(), omega23.dx.diff_t());

    let per_node: Vec<[f64; 5]> = (0..grid.len())
        .map(|i| {
            let [u12, u13, u23, v12, v13, v23] =
                [&c.u12, &c.u13, &c.u23, &c.v12, &c.v13, &c.v23].map(|f| f.values()[i]);
            let (h11, h22, h) = (s.h11.values()[i], s.h22.values()[i], s.h.values()[i]);
            [
                u12_x.values()[i] - v12_t.values()[i] + u23 * v13 - u13 * v23,
                u13_x.values()[i] - v13_t.values()[i] + u12 * v23 - u23 * v12,
                u23_x.values()[i] - v23_t.values()[i] + (h11 * h22 - h * h) * (u13 * v12 - u12 * v13),
                p_x.values()[i] - r_t.values()[i] + u23 * (h * v12 + h22 * v13) - v23 * (h * u12 + h22 * u13),
                q_x.values()[i] - s_t.values()[i] + v23 * (h11 * u12 + h * u13) - u23 * (h11 * v12 + h * v13),
            ]
        })
        .collect();
    let fields = STRUCTURE_LABELS
        .iter()
        .enumerate()
        .map(|(k, label)| {
            let v = per_node.iter().map(|r| r[k]).collect();
            Ok((label.to_string(), ScalarField::from_values(grid, v)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_fields(grid, strategy, fields))
}

/// Mean curvature `H` and Gaussian (total) curvature `K`.
#[derive(Debug, Clone)]
pub struct CurvatureFields {
    pub mean: ScalarField,
    pub gaussian: ScalarField,
}

pub fn curvatures(s: &SecondFormCoeffs) -> CurvatureFields {
    CurvatureFields { mean: s.h11.add(&s.h22).scale(0.5), gaussian: s.h11.mul(&s.h22).sub(&s.h.mul(&s.h)) }
}

/// Symmetric quadratic form `a dt² + 2b dt dx + c dx²`.
#[derive(Debug, Clone)]
pub struct QuadraticForm {
    pub dtdt: ScalarField,
    pub dtdx: ScalarField,
    pub dxdx: ScalarField,
}

impl QuadraticForm {
    /// `Σ αₖ βₖ` (symmetric product of one-forms).
    fn symmetric_product(pairs: &[(&OneForm, &OneForm)]) -> QuadraticForm {
        let sum = |f: &dyn Fn(&OneForm, &OneForm) -> ScalarField| {
            pairs.iter().map(|(a, b)| f(a, b)).reduce(|acc, x| acc.add(&x)).expect("non-empty")
        };
        QuadraticForm {
            dtdt: sum(&|a, b| a.dt.mul(&b.dt)),
            dtdx: sum(&|a, b| a.dt.mul(&b.dx).add(&a.dx.mul(&b.dt)).scale(0.5)),
            dxdx: sum(&|a, b| a.dx.mul(&b.dx)),
        }
    }
}

/// First, second and third fundamental forms.
#[derive(Debug, Clone)]
pub struct FundamentalForms {
    pub first: QuadraticForm,
    pub second: QuadraticForm,
    pub third: QuadraticForm,
}

pub fn first_fundamental_coeffs(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<FundamentalForms> {
    let f = build_forms(c, s)?;
    Ok(FundamentalForms {
        first: QuadraticForm::symmetric_product(&[(&f.omega1, &f.omega1), (&f.omega2, &f.omega2)]),
        second: QuadraticForm::symmetric_product(&[(&f.omega1, &f.omega13), (&f.omega2, &f.omega23)]),
        third: QuadraticForm::symmetric_product(&[(&f.omega13, &f.omega13), (&f.omega23, &f.omega23)]),
    })
}
