//! Block SO(6) Lax pair, zero-curvature residuals and the matching constraint.
//!
//! `U = U₁ ⊕ U₂`, `V = V₁ ⊕ V₂` with
//!
//! ```text
//! U₁ = skew(u12, u13, u23)                          V₁ = skew(v12, v13, v23)
//! U₂ = skew(h11 u12 + h u13, h u12 + h22 u13, u23)  V₂ = skew(h11 v12 + h v13, h v12 + h22 v13, v23)
//! ```
//!
//! The six independent slots of `U_x - V_t + [U, V]` are compared with the
//! structure residuals as
//!
//! | structure | Lax slot    |
//! |-----------|-------------|
//! | eq1       | `block1_12` |
//! | eq2       | `block1_13` |
//! | eq3       | `block2_23` |
//! | eq4       | `block2_12` |
//! | eq5       | `block2_13` |
//!
//! and `block1_23` is the extra equation. `block1_23 - block2_23` equals
//! `(1 - K)(u13 v12 - u12 v13)`, so the two versions agree exactly when
//! `(u12 v13 - u13 v12)(h² - h11 h22 + 1) = 0`. The (2,3) slot of
//! `[U₂, V₂]` is `(h11 h22 - h²)(u13 v12 - u12 v13)`, which is the form used
//! for the curvature-weighted equation throughout.

use serde::{Deserialize, Serialize};

use crate::algebra::{block_diag, skew_from_triple, Mat3, Matrix6, SkewTriple};
use crate::fields::{shared_grid, CoefficientSet, DerivativeStrategy, ScalarField, SecondFormCoeffs};
use crate::structure::{normal_connection, residuals_structure, ResidualReport};
use crate::{Error, Result};

pub const LAX_LABELS: [&str; 6] = ["block1_12", "block1_13", "block1_23", "block2_12", "block2_13", "block2_23"];

/// Structure equation label paired with its Lax slot.
pub const EQUIVALENCE_PAIRS: [(&str, &str); 5] =
    [("eq1", "block1_12"), ("eq2", "block1_13"), ("eq3", "block2_23"), ("eq4", "block2_12"), ("eq5", "block2_13")];

/// Label of the block-1 versus block-2 (2,3) comparison.
pub const SLOT23_LABEL: &str = "block1_23-block2_23";

/// Default branch threshold for closed-form scenarios.
pub const CLOSED_FORM_THRESHOLD: f64 = 1e-10;
/// Default branch threshold for sampled (CSV) scenarios.
pub const SAMPLED_THRESHOLD: f64 = 1e-6;
/// Nodes with `|u12|` at or below this are excluded from the coefficient-branch substitution.
pub const U12_GUARD: f64 = 1e-6;

/// The fixed rotation relating the frame connection to the second block:
/// `U₂ = P Ω_t Pᵀ`, `V₂ = P Ω_x Pᵀ`.
pub const FRAME_TO_LAX: Mat3 = Mat3([[0.0, 0.0, 1.0], [-1.0, 0.0, 0.0], [0.0, -1.0, 0.0]]);

/// U and V at one node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LaxPairAt {
    pub u: Matrix6,
    pub v: Matrix6,
}

/// Slot fields of one antisymmetric 3x3 block.
struct BlockFields<'a>([&'a ScalarField; 3]);

impl BlockFields<'_> {
    fn at(&self, i: usize) -> SkewTriple {
        SkewTriple::new(self.0[0].values()[i], self.0[1].values()[i], self.0[2].values()[i])
    }
}

/// Entry fields of `U₁, U₂, V₁, V₂`.
struct LaxFields {
    omega13: crate::structure::OneForm,
    omega23: crate::structure::OneForm,
}

impl LaxFields {
    fn new(c: &CoefficientSet, s: &SecondFormCoeffs) -> Self {
        let (omega13, omega23) = normal_connection(c, s);
        LaxFields { omega13, omega23 }
    }

    fn u<'a>(&'a self, c: &'a CoefficientSet) -> [BlockFields<'a>; 2] {
        [BlockFields([&c.u12, &c.u13, &c.u23]), BlockFields([&self.omega13.dt, &self.omega23.dt, &c.u23])]
    }

    fn v<'a>(&'a self, c: &'a CoefficientSet) -> [BlockFields<'a>; 2] {
        [BlockFields([&c.v12, &c.v13, &c.v23]), BlockFields([&self.omega13.dx, &self.omega23.dx, &c.v23])]
    }
}

fn compose(blocks: &[BlockFields<'_>; 2], i: usize) -> Matrix6 {
    block_diag(skew_from_triple(blocks[0].at(i)), skew_from_triple(blocks[1].at(i)))
}

pub fn build_lax_at(c: &CoefficientSet, s: &SecondFormCoeffs, j: usize, n: usize) -> Result<LaxPairAt> {
    let grid = shared_grid(c, s)?;
    let i = grid.check_node(j, n)?;
    let lf = LaxFields::new(c, s);
    Ok(LaxPairAt { u: compose(&lf.u(c), i), v: compose(&lf.v(c), i) })
}

/// The six independent slots of `U_x - V_t + [U, V]` at every node.
pub fn zero_curvature_residuals(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<ResidualReport> {
    let grid = shared_grid(c, s)?;
    let lf = LaxFields::new(c, s);
    let (u, v) = (lf.u(c), lf.v(c));
    let strategy = DerivativeStrategy::of(u.iter().chain(v.iter()).flat_map(|b| b.0));

    let diff = |blocks: &[BlockFields<'_>; 2], along_x: bool| -> Vec<ScalarField> {
        blocks.iter().flat_map(|b| b.0).map(|f| if along_x { f.diff_x() } else { f.diff_t() }).collect()
    };
    let (ux, vt) = (diff(&u, true), diff(&v, false));
    let ux_blocks = [BlockFields([&ux[0], &ux[1], &ux[2]]), BlockFields([&ux[3], &ux[4], &ux[5]])];
    let vt_blocks = [BlockFields([&vt[0], &vt[1], &vt[2]]), BlockFields([&vt[3], &vt[4], &vt[5]])];

    const SLOTS: [(usize, usize); 6] = [(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)];
    let per_node: Vec<[f64; 6]> = (0..grid.len())
        .map(|i| {
            let (um, vm) = (compose(&u, i), compose(&v, i));
            let r = compose(&ux_blocks, i) - compose(&vt_blocks, i) + um.commutator(&vm);
            SLOTS.map(|(a, b)| r.0[a][b])
        })
        .collect();
    let fields = LAX_LABELS
        .iter()
        .enumerate()
        .map(|(k, label)| {
            let vals = per_node.iter().map(|r| r[k]).collect();
            Ok((label.to_string(), ScalarField::from_values(grid, vals)?))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResidualReport::from_fields(grid, strategy, fields))
}

/// Pointwise `(u12 v13 - u13 v12)(h² - h11 h22 + 1)`.
pub fn constraint_field(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<ScalarField> {
    let grid = shared_grid(c, s)?;
    let (bracket, curvature) = constraint_factors(c, s);
    ScalarField::from_values(grid, bracket.iter().zip(&curvature).map(|(a, b)| a * b).collect())
}

/// `(u12 v13 - u13 v12, h² - h11 h22 + 1)` pointwise.
fn constraint_factors(c: &CoefficientSet, s: &SecondFormCoeffs) -> (Vec<f64>, Vec<f64>) {
    let n = c.grid().len();
    let v = |f: &ScalarField, i: usize| f.values()[i];
    let bracket = (0..n).map(|i| v(&c.u12, i) * v(&c.v13, i) - v(&c.u13, i) * v(&c.v12, i)).collect();
    let curvature = (0..n).map(|i| v(&s.h, i) * v(&s.h, i) - v(&s.h11, i) * v(&s.h22, i) + 1.0).collect();
    (bracket, curvature)
}

/// Which factor of the matching constraint vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `u12 v13 - u13 v12 = 0`
    CoefficientBranch,
    /// `h11 h22 - h² = 1`
    CurvatureOneBranch,
    Both,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchClass {
    pub branch: Branch,
    /// `max |u12 v13 - u13 v12|`
    pub coefficient_factor_max: f64,
    /// `max |h11 h22 - h² - 1|`
    pub curvature_factor_max: f64,
    pub threshold: f64,
}

impl BranchClass {
    pub fn constraint_holds(&self) -> bool {
        self.branch != Branch::Neither
    }
}

pub fn classify_branch(c: &CoefficientSet, s: &SecondFormCoeffs, threshold: f64) -> Result<BranchClass> {
    shared_grid(c, s)?;
    if !(threshold > 0.0 && threshold.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "threshold",
            reason: format!("must be positive (got {threshold})"),
        });
    }
    let (bracket, curvature) = constraint_factors(c, s);
    let max_abs = |v: &[f64]| v.iter().fold(0.0f64, |acc, x| acc.max(x.abs()));
    let (coef, curv) = (max_abs(&bracket), max_abs(&curvature));
    let branch = match (coef <= threshold, curv <= threshold) {
        (true, true) => Branch::Both,
        (true, false) => Branch::CoefficientBranch,
        (false, true) => Branch::CurvatureOneBranch,
        (false, false) => Branch::Neither,
    };
    Ok(BranchClass { branch, coefficient_factor_max: coef, curvature_factor_max: curv, threshold })
}

/// Side-by-side structure and Lax residuals with their pointwise discrepancies.
#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub structure: ResidualReport,
    pub lax: ResidualReport,
    /// One entry per [`EQUIVALENCE_PAIRS`] (labelled `eqK~blockB_IJ`) followed by [`SLOT23_LABEL`].
    pub comparison: ResidualReport,
}

impl EquivalenceReport {
    pub fn max_pair_discrepancy(&self) -> f64 {
        self.comparison.residuals.iter().filter(|r| r.equation != SLOT23_LABEL).fold(0.0, |a, r| a.max(r.max_abs))
    }

    pub fn slot23_difference(&self) -> f64 {
        self.comparison.get(SLOT23_LABEL).map_or(f64::NAN, |r| r.max_abs)
    }
}

pub fn equivalence_report(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<EquivalenceReport> {
    let structure = residuals_structure(c, s)?;
    let lax = zero_curvature_residuals(c, s)?;
    let field = |r: &ResidualReport, l: &str| r.field(l).expect("label present").clone();
    let mut comparison: Vec<(String, ScalarField)> = EQUIVALENCE_PAIRS
        .iter()
        .map(|(eq, slot)| (format!("{eq}~{slot}"), field(&structure, eq).sub(&field(&lax, slot))))
        .collect();
    comparison.push((SLOT23_LABEL.to_string(), field(&lax, "block1_23").sub(&field(&lax, "block2_23"))));
    let comparison = ResidualReport::from_fields(structure.grid, lax.derivative_strategy, comparison);
    Ok(EquivalenceReport { structure, lax, comparison })
}

/// Result of substituting `v13 = u13 v12 / u12` (the coefficient branch).
#[derive(Debug, Clone)]
pub struct CoefficientBranchCheck {
    pub substituted: CoefficientSet,
    /// Nodes with `|u12| <= U12_GUARD`, left out of the comparison.
    pub excluded_nodes: usize,
    /// `max |block1_23 - (u23_x - v23_t)|` over included nodes.
    pub block1_vs_common: f64,
    /// `max |block2_23 - (u23_x - v23_t)|` over included nodes.
    pub block2_vs_common: f64,
}

pub fn coefficient_branch_substitution(c: &CoefficientSet, s: &SecondFormCoeffs) -> Result<CoefficientBranchCheck> {
    let grid = shared_grid(c, s)?;
    let keep: Vec<bool> = c.u12.values().iter().map(|u| u.abs() > U12_GUARD).collect();
    let v13: Vec<f64> = (0..grid.len())
        .map(|i| if keep[i] { c.u13.values()[i] * c.v12.values()[i] / c.u12.values()[i] } else { c.v13.values()[i] })
        .collect();
    let substituted = CoefficientSet { v13: ScalarField::from_values(grid, v13)?, ..c.clone() };
    let lax = zero_curvature_residuals(&substituted, s)?;
    let common = c.u23.diff_x().sub(&c.v23.diff_t());
    let worst = |label: &str| {
        let f = lax.field(label).expect("label present");
        (0..grid.len()).filter(|&i| keep[i]).map(|i| (f.values()[i] - common.values()[i]).abs()).fold(0.0, f64::max)
    };
    Ok(CoefficientBranchCheck {
        excluded_nodes: keep.iter().filter(|k| !**k).count(),
        block1_vs_common: worst("block1_23"),
        block2_vs_common: worst("block2_23"),
        substituted,
    })
}
