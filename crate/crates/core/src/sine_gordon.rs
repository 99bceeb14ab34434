//! The sine-Gordon reduction `φ_tt - φ_xx = -sin φ`.
//!
//! With `u12 = cos(φ/2)`, `v13 = sin(φ/2)`, `u13 = v12 = 0`, `u23 = φ_x/2`,
//! `v23 = φ_t/2` and `h11 = h22 = 1`, `h = 0`, every structure equation
//! reduces to this PDE. This module supplies the exact kink, the coefficient
//! mapping, an explicit three-level solver and the energy diagnostic.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::fields::{ClosedForm, CoefficientSet, GridSpec, ScalarField, SecondFormCoeffs};
use crate::fmt::float;
use crate::{Error, Result};

/// Kink velocity `v` (`|v| < 1`) and center offset `x0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawKink")]
pub struct KinkParams {
    v: f64,
    x0: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawKink {
    v: f64,
    #[serde(default)]
    x0: f64,
}

impl TryFrom<RawKink> for KinkParams {
    type Error = Error;
    fn try_from(r: RawKink) -> Result<Self> {
        KinkParams::new(r.v, r.x0)
    }
}

impl KinkParams {
    pub fn new(v: f64, x0: f64) -> Result<Self> {
        if !(v.is_finite() && v.abs() < 1.0) {
            return Err(Error::InvalidParameter {
                name: "v",
                reason: format!("kink speed must satisfy |v| < 1 (got {v})"),
            });
        }
        if !x0.is_finite() {
            return Err(Error::InvalidParameter { name: "x0", reason: format!("must be finite (got {x0})") });
        }
        Ok(KinkParams { v, x0 })
    }

    pub fn static_at(x0: f64) -> Self {
        KinkParams { v: 0.0, x0 }
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    /// Lorentz factor `1/√(1 - v²)`.
    pub fn gamma(&self) -> f64 {
        1.0 / (1.0 - self.v * self.v).sqrt()
    }

    fn xi(&self, x: f64, t: f64) -> f64 {
        self.gamma() * (x - self.v * t - self.x0)
    }

    /// Energy of the kink, `8γ`.
    pub fn energy(&self) -> f64 {
        8.0 * self.gamma()
    }
}

/// `4 atan(exp(γ (x - v t - x0)))`.
pub fn kink(x: f64, t: f64, p: &KinkParams) -> f64 {
    4.0 * p.xi(x, t).exp().atan()
}

/// The kink with closed-form partial derivatives through total order 3.
pub fn kink_closed_form(p: KinkParams) -> ClosedForm {
    ClosedForm::new(3, move |x, t, i, k| {
        let xi = p.xi(x, t);
        let g = p.gamma();
        if i + k == 0 {
            return 4.0 * xi.exp().atan();
        }
        let sech = 1.0 / xi.cosh();
        let tanh = xi.tanh();
        // d^m φ / dξ^m
        let dm = match i + k {
            1 => 2.0 * sech,
            2 => -2.0 * sech * tanh,
            3 => 2.0 * sech * tanh * tanh - 2.0 * sech * sech * sech,
            _ => unreachable!(),
        };
        g.powi(i as i32) * (-g * p.v).powi(k as i32) * dm
    })
}

pub fn kink_field(grid: GridSpec, p: KinkParams) -> ScalarField {
    ScalarField::from_closed_form(grid, kink_closed_form(p))
}

/// The coefficient mapping of the reduction; closed forms propagate from `phi`.
pub fn coefficients_from_phi(phi: &ScalarField) -> (CoefficientSet, SecondFormCoeffs) {
    let grid = *phi.grid();
    let half = phi.scale(0.5);
    let u12 = half.compose([f64::cos, |v| -v.sin(), |v| -v.cos()]);
    let v13 = half.compose([f64::sin, f64::cos, |v| -v.sin()]);
    let coeffs = CoefficientSet {
        u12,
        u13: ScalarField::zeros(grid),
        u23: phi.diff_x().scale(0.5),
        v12: ScalarField::zeros(grid),
        v13,
        v23: phi.diff_t().scale(0.5),
    };
    (coeffs, SecondFormCoeffs::uniform(grid, 1.0, 1.0, 0.0))
}

/// Nodes where the induced metric `cos²(φ/2) dt² + sin²(φ/2) dx²` is close to degenerate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DegeneracyWarning {
    pub guard: f64,
    pub nodes: usize,
    pub min_abs_cos_half: f64,
    pub min_abs_sin_half: f64,
}

pub fn metric_degeneracy(phi: &ScalarField, guard: f64) -> Option<DegeneracyWarning> {
    let (mut nodes, mut min_cos, mut min_sin) = (0, f64::INFINITY, f64::INFINITY);
    for &p in phi.values() {
        let (c, s) = ((0.5 * p).cos().abs(), (0.5 * p).sin().abs());
        min_cos = min_cos.min(c);
        min_sin = min_sin.min(s);
        if c < guard || s < guard {
            nodes += 1;
        }
    }
    (nodes > 0).then_some(DegeneracyWarning { guard, nodes, min_abs_cos_half: min_cos, min_abs_sin_half: min_sin })
}

/// Initial data at `t_min`.
#[derive(Debug, Clone)]
pub enum InitialData {
    /// φ at the first two time levels.
    TwoLevels { first: Vec<f64>, second: Vec<f64> },
    /// φ and φ_t at `t_min`; the second level comes from a Taylor start.
    ValueAndVelocity { phi: Vec<f64>, phi_t: Vec<f64> },
}

/// Dirichlet data at `x_min` and `x_max`.
#[derive(Debug, Clone)]
pub enum Boundary {
    Constant {
        left: f64,
        right: f64,
    },
    /// Traces of the exact kink.
    Kink(KinkParams),
    /// One value per time level.
    Traces {
        left: Vec<f64>,
        right: Vec<f64>,
    },
}

impl Boundary {
    fn at(&self, grid: &GridSpec, n: usize) -> (f64, f64) {
        match self {
            Boundary::Constant { left, right } => (*left, *right),
            Boundary::Kink(p) => {
                let t = grid.t(n);
                (kink(grid.x_min(), t, p), kink(grid.x_max(), t, p))
            }
            Boundary::Traces { left, right } => (left[n], right[n]),
        }
    }
}

/// Solver input: grid (x layout and time step), initial data, boundary data.
#[derive(Debug, Clone)]
pub struct SGState {
    grid: GridSpec,
    initial: InitialData,
    boundary: Boundary,
    cfl: f64,
}

pub const DEFAULT_CFL: f64 = 0.5;

impl SGState {
    pub fn new(grid: GridSpec, initial: InitialData, boundary: Boundary, cfl: f64) -> Result<Self> {
        let nx = grid.nx();
        let ratio = grid.dt() / grid.dx();
        if cfl.is_nan() || cfl <= 0.0 || ratio > cfl {
            return Err(Error::Cfl { ratio, bound: cfl });
        }
        let levels: [&Vec<f64>; 2] = match &initial {
            InitialData::TwoLevels { first, second } => [first, second],
            InitialData::ValueAndVelocity { phi, phi_t } => [phi, phi_t],
        };
        if levels.iter().any(|l| l.len() != nx) {
            return Err(Error::InvalidParameter { name: "initial", reason: format!("each level needs {nx} values") });
        }
        if levels.iter().any(|l| l.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidParameter { name: "initial", reason: "non-finite initial data".into() });
        }
        if let Boundary::Traces { left, right } = &boundary {
            if left.len() < grid.nt() || right.len() < grid.nt() {
                return Err(Error::InvalidParameter {
                    name: "boundary",
                    reason: format!("traces need {} levels", grid.nt()),
                });
            }
        }
        Ok(SGState { grid, initial, boundary, cfl })
    }

    /// Exact kink data (value and velocity) with kink boundary traces.
    pub fn kink(grid: GridSpec, p: KinkParams, cfl: f64) -> Result<Self> {
        let closed = kink_closed_form(p);
        let t0 = grid.t_min();
        let xs: Vec<f64> = (0..grid.nx()).map(|j| grid.x(j)).collect();
        let phi = xs.iter().map(|&x| closed.value(x, t0)).collect();
        let phi_t = xs.iter().map(|&x| closed.eval(x, t0, 0, 1).expect("order 3")).collect();
        SGState::new(grid, InitialData::ValueAndVelocity { phi, phi_t }, Boundary::Kink(p), cfl)
    }

    /// φ ≡ 0 with zero boundaries.
    pub fn zero(grid: GridSpec, cfl: f64) -> Result<Self> {
        let nx = grid.nx();
        SGState::new(
            grid,
            InitialData::TwoLevels { first: vec![0.0; nx], second: vec![0.0; nx] },
            Boundary::Constant { left: 0.0, right: 0.0 },
            cfl,
        )
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn cfl(&self) -> f64 {
        self.cfl
    }
}

/// Advance `n_steps` time steps; the result lives on the state's grid
/// truncated to `n_steps + 1` levels.
pub fn evolve(state: &SGState, n_steps: usize) -> Result<ScalarField> {
    let g = state.grid;
    if n_steps < 2 || n_steps >= g.nt() {
        return Err(Error::InvalidParameter {
            name: "n_steps",
            reason: format!("must lie in [2, {}] (got {n_steps})", g.nt() - 1),
        });
    }
    let out_grid = GridSpec::new(g.x_min(), g.x_max(), g.nx(), g.t_min(), g.t(n_steps), n_steps + 1)?;
    let nx = g.nx();
    let (dx, dt) = (g.dx(), g.dt());
    let r2 = (dt / dx) * (dt / dx);
    let dt2 = dt * dt;

    let mut values = Vec::with_capacity(nx * (n_steps + 1));
    let (first, second) = match &state.initial {
        InitialData::TwoLevels { first, second } => (first.clone(), second.clone()),
        InitialData::ValueAndVelocity { phi, phi_t } => {
            let mut next = vec![0.0; nx];
            for j in 1..nx - 1 {
                let phi_xx = (phi[j + 1] - 2.0 * phi[j] + phi[j - 1]) / (dx * dx);
                next[j] = phi[j] + dt * phi_t[j] + 0.5 * dt2 * (phi_xx - phi[j].sin());
            }
            (next[0], next[nx - 1]) = state.boundary.at(&g, 1);
            (phi.clone(), next)
        }
    };
    values.extend_from_slice(&first);
    values.extend_from_slice(&second);

    for n in 1..n_steps {
        let (prev, cur) = (&values[(n - 1) * nx..n * nx], &values[n * nx..(n + 1) * nx]);
        let mut next = vec![0.0; nx];
        for j in 1..nx - 1 {
            next[j] = 2.0 * cur[j] - prev[j] + r2 * (cur[j + 1] - 2.0 * cur[j] + cur[j - 1]) - dt2 * cur[j].sin();
        }
        (next[0], next[nx - 1]) = state.boundary.at(&g, n + 1);
        if let Some(node) = next.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step: n + 1, node });
        }
        values.extend_from_slice(&next);
    }
    ScalarField::from_values(out_grid, values)
}

/// Energy `∫ φ_t²/2 + φ_x²/2 + (1 - cos φ) dx` between two consecutive levels.
///
/// `φ_t` is the two-level difference; `φ_x` and the potential are evaluated
/// on the average of the two levels, so the value sits at the half step.
pub fn energy(current: &[f64], previous: &[f64], grid: &GridSpec) -> f64 {
    let nx = current.len();
    debug_assert_eq!(nx, previous.len());
    let (dx, dt) = (grid.dx(), grid.dt());
    let mid: Vec<f64> = current.iter().zip(previous).map(|(a, b)| 0.5 * (a + b)).collect();
    let density = |j: usize| {
        let phi_t = (current[j] - previous[j]) / dt;
        let phi_x = match j {
            0 => (-3.0 * mid[0] + 4.0 * mid[1] - mid[2]) / (2.0 * dx),
            j if j == nx - 1 => (3.0 * mid[j] - 4.0 * mid[j - 1] + mid[j - 2]) / (2.0 * dx),
            j => (mid[j + 1] - mid[j - 1]) / (2.0 * dx),
        };
        0.5 * phi_t * phi_t + 0.5 * phi_x * phi_x + (1.0 - mid[j].cos())
    };
    let interior: f64 = (1..nx - 1).map(density).sum();
    dx * (interior + 0.5 * (density(0) + density(nx - 1)))
}

/// `(t_{n-1/2}, energy)` for every pair of consecutive levels.
pub fn energy_series(phi: &ScalarField) -> Vec<(f64, f64)> {
    let g = phi.grid();
    (1..g.nt()).map(|n| (0.5 * (g.t(n - 1) + g.t(n)), energy(phi.level(n), phi.level(n - 1), g))).collect()
}

/// Maximum relative deviation of an energy series from its first value.
pub fn relative_energy_drift(series: &[(f64, f64)]) -> f64 {
    let e0 = series.first().map_or(0.0, |p| p.1);
    let dev = series.iter().fold(0.0f64, |acc, (_, e)| acc.max((e - e0).abs()));
    if e0 == 0.0 {
        dev
    } else {
        dev / e0.abs()
    }
}

/// Max-abs difference between a solution and the kink over all nodes.
pub fn max_error_vs_kink(phi: &ScalarField, p: &KinkParams) -> f64 {
    phi.grid().nodes().map(|(j, n, x, t)| (phi.at(j, n) - kink(x, t, p)).abs()).fold(0.0, f64::max)
}

/// Write `x,t,phi` rows for every `stride`-th time level.
pub fn write_phi_csv(mut w: impl Write, phi: &ScalarField, stride: usize) -> Result<()> {
    let g = phi.grid();
    writeln!(w, "x,t,phi")?;
    for n in (0..g.nt()).step_by(stride.max(1)) {
        for j in 0..g.nx() {
            writeln!(w, "{},{},{}", float(g.x(j)), float(g.t(n)), float(phi.at(j, n)))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::structure::curvatures;

    #[test]
    fn kink_values() {
        let p = KinkParams::new(0.0, 0.0).unwrap();
        assert!((kink(0.0, 0.0, &p) - std::f64::consts::PI).abs() < 1e-15);
        assert!((kink(1.0, 0.0, &p) - 4.0 * std::f64::consts::E.atan()).abs() < 1e-15);
        assert!((kink(1.0, 0.0, &p) - 4.8731).abs() < 1e-4);
        assert!((kink(60.0, 0.0, &p) - 2.0 * std::f64::consts::PI).abs() < 1e-15);
        assert!(kink(-60.0, 0.0, &p).abs() < 1e-24);
        assert!(KinkParams::new(1.0, 0.0).is_err());
        assert!(KinkParams::new(-1.2, 0.0).is_err());
    }

    #[test]
    fn kink_satisfies_the_pde_by_finite_differences() {
        // oracle: 4th-order central differences of the closed-form value
        for v in [0.0, 0.5, -0.8] {
            let p = KinkParams::new(v, 0.3).unwrap();
            let h = 1e-3;
            for &(x, t) in &[(0.1, 0.2), (-1.3, 0.7), (2.0, -0.4)] {
                let f = |x: f64, t: f64| kink(x, t, &p);
                let d2 =
                    |a: f64, b: f64, c: f64, d: f64, e: f64| (-a + 16.0 * b - 30.0 * c + 16.0 * d - e) / (12.0 * h * h);
                let c = f(x, t);
                let xx = d2(f(x - 2.0 * h, t), f(x - h, t), c, f(x + h, t), f(x + 2.0 * h, t));
                let tt = d2(f(x, t - 2.0 * h), f(x, t - h), c, f(x, t + h), f(x, t + 2.0 * h));
                assert!((tt - xx + c.sin()).abs() < 1e-6, "v={v} ({x},{t}): {}", tt - xx + c.sin());
            }
        }
    }

    #[test]
    fn kink_closed_form_derivatives_match_finite_differences() {
        let p = KinkParams::new(0.4, -0.5).unwrap();
        let cf = kink_closed_form(p);
        let h = 1e-5;
        let (x, t) = (0.3, 0.9);
        let fx = |i: usize, k: usize, x: f64, t: f64| cf.eval(x, t, i, k).unwrap();
        for &(i, k) in &[(0, 0), (1, 0), (0, 1), (2, 0), (1, 1)] {
            let dx = (fx(i, k, x + h, t) - fx(i, k, x - h, t)) / (2.0 * h);
            let dt = (fx(i, k, x, t + h) - fx(i, k, x, t - h)) / (2.0 * h);
            assert!((dx - fx(i + 1, k, x, t)).abs() < 1e-8);
            assert!((dt - fx(i, k + 1, x, t)).abs() < 1e-8);
        }
    }

    #[test]
    fn reduction_at_origin() {
        let g = GridSpec::new(-1.0, 1.0, 3, 0.0, 1.0, 3).unwrap();
        let (c, s) = coefficients_from_phi(&kink_field(g, KinkParams::static_at(0.0)));
        let at = |f: &ScalarField| f.at(1, 0);
        let got = [at(&c.u12), at(&c.u13), at(&c.u23), at(&c.v12), at(&c.v13), at(&c.v23)];
        let expected = [0.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        for (a, b) in got.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15, "{got:?}");
        }
        let k = curvatures(&s).gaussian;
        assert!(k.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn reduction_of_zero_field() {
        let g = GridSpec::new(-1.0, 1.0, 5, 0.0, 1.0, 4).unwrap();
        let (c, s) = coefficients_from_phi(&ScalarField::zeros(g));
        assert!(c.u12.values().iter().all(|&v| v == 1.0));
        for f in [&c.u13, &c.u23, &c.v12, &c.v13, &c.v23] {
            assert_eq!(f.max_abs(), 0.0);
        }
        assert!(curvatures(&s).gaussian.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn reduced_identities_hold_with_closed_forms() {
        let g = GridSpec::new(-3.0, 3.0, 31, -1.0, 1.0, 11).unwrap();
        let phi = kink_field(g, KinkParams::new(0.6, 0.2).unwrap());
        let (c, _) = coefficients_from_phi(&phi);
        // (cos(φ/2))_x + u23 sin(φ/2) = 0 and -(sin(φ/2))_t + cos(φ/2) v23 = 0
        let first = c.u12.diff_x().add(&c.u23.mul(&c.v13));
        let second = c.v13.diff_t().scale(-1.0).add(&c.u12.mul(&c.v23));
        assert!(first.max_abs() <= 1e-12);
        assert!(second.max_abs() <= 1e-12);
    }

    fn static_run(dx: f64) -> f64 {
        let nx = (20.0 / dx).round() as usize + 1;
        let nt = (1.0 / (0.5 * dx)).round() as usize + 1;
        let g = GridSpec::new(-10.0, 10.0, nx, 0.0, 1.0, nt).unwrap();
        let p = KinkParams::static_at(0.0);
        let phi = evolve(&SGState::kink(g, p, DEFAULT_CFL).unwrap(), nt - 1).unwrap();
        max_error_vs_kink(&phi, &p)
    }

    #[test]
    fn static_kink_stays_put() {
        let err = static_run(0.01);
        assert!(err <= 5e-4, "error {err}");
    }

    #[test]
    fn zero_data_is_a_fixed_point() {
        let g = GridSpec::new(-1.0, 1.0, 21, 0.0, 1.0, 41).unwrap();
        let phi = evolve(&SGState::zero(g, DEFAULT_CFL).unwrap(), 40).unwrap();
        assert_eq!(phi.max_abs(), 0.0);
        assert!(energy_series(&phi).iter().all(|&(_, e)| e == 0.0));
    }

    #[test]
    fn scheme_converges_at_second_order() {
        // moving kink so the error is not dominated by the static profile
        let run = |dx: f64| {
            let nx = (8.0 / dx).round() as usize + 1;
            let nt = (1.0 / (0.5 * dx)).round() as usize + 1;
            let g = GridSpec::new(-4.0, 4.0, nx, 0.0, 1.0, nt).unwrap();
            let p = KinkParams::new(0.5, 0.0).unwrap();
            max_error_vs_kink(&evolve(&SGState::kink(g, p, DEFAULT_CFL).unwrap(), nt - 1).unwrap(), &p)
        };
        let e = [run(0.04), run(0.02), run(0.01)];
        for w in e.windows(2) {
            let ratio = w[0] / w[1];
            assert!((3.2..=4.8).contains(&ratio), "ratio {ratio} from {e:?}");
        }
    }

    #[test]
    fn cfl_violation_is_rejected() {
        let g = GridSpec::new(-1.0, 1.0, 21, 0.0, 1.0, 11).unwrap(); // dt = dx = 0.1
        assert!(matches!(SGState::zero(g, DEFAULT_CFL), Err(Error::Cfl { .. })));
    }

    #[test]
    fn blow_up_is_reported() {
        let g = GridSpec::new(-1.0, 1.0, 5, 0.0, 1.0, 11).unwrap();
        let mut first = vec![0.0; 5];
        first[2] = f64::MAX;
        let state = SGState::new(
            g,
            InitialData::TwoLevels { first: first.clone(), second: first.iter().map(|v| -v).collect() },
            Boundary::Constant { left: 0.0, right: 0.0 },
            1.0,
        )
        .unwrap();
        assert!(matches!(evolve(&state, 10), Err(Error::NonFinite { .. })));
    }

    #[test]
    fn static_kink_energy_is_eight() {
        let g = GridSpec::new(-20.0, 20.0, 4001, 0.0, 1.0, 3).unwrap();
        let phi = kink_field(g, KinkParams::static_at(0.0));
        let e = energy(phi.level(1), phi.level(0), &g);
        assert!((e - 8.0).abs() <= 1e-4, "energy {e}");
        let zero = vec![0.0; 4001];
        assert_eq!(energy(&zero, &zero, &g), 0.0);
    }

    #[test]
    fn moving_kink_energy_is_boosted() {
        let p = KinkParams::new(0.5, 0.0).unwrap();
        let g = GridSpec::new(-20.0, 20.0, 4001, 0.0, 0.005, 2 + 1).unwrap();
        let phi = kink_field(g, p);
        let e = energy(phi.level(1), phi.level(0), &g);
        assert!((e - 8.0 / (1.0f64 - 0.25).sqrt()).abs() <= 1e-3, "energy {e}");
        assert!((p.energy() - 8.0 / 0.75f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn degeneracy_guard_flags_half_angle_zeros() {
        let g = GridSpec::new(-2.0, 2.0, 41, 0.0, 1.0, 3).unwrap();
        let w = metric_degeneracy(&kink_field(g, KinkParams::static_at(0.0)), 0.05).unwrap();
        assert!(w.nodes > 0);
        assert!(w.min_abs_cos_half < 1e-15);
        let far = GridSpec::new(5.0, 6.0, 11, 0.0, 1.0, 3).unwrap();
        let w = metric_degeneracy(&kink_field(far, KinkParams::static_at(0.0)), 0.05).unwrap();
        assert!(w.min_abs_sin_half < 0.05);
        let mid = GridSpec::new(0.5, 1.0, 11, 0.0, 1.0, 3).unwrap();
        assert!(metric_degeneracy(&kink_field(mid, KinkParams::static_at(0.0)), 0.05).is_none());
    }

    #[test]
    fn phi_csv_layout() {
        let g = GridSpec::new(0.0, 1.0, 3, 0.0, 1.0, 5).unwrap();
        let mut buf = Vec::new();
        write_phi_csv(&mut buf, &ScalarField::zeros(g), 2).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "x,t,phi");
        assert_eq!(lines.len(), 1 + 3 * 3);
        assert_eq!(lines[1], "0,0,0");
        assert_eq!(lines[4], "0,0.5,0");
    }
}
