//! Frame transport, surface reconstruction and discrete fundamental forms.
//!
//! Frames are stored with rows `(e₁, e₂, e₃)` and obey `E_t = Ω_t E`,
//! `E_x = Ω_x E` with
//!
//! ```text
//! Ω_t = skew(u23, h11 u12 + h u13, h u12 + h22 u13)
//! Ω_x = skew(v23, h11 v12 + h v13, h v12 + h22 v13)
//! ```
//!
//! (the second Lax block up to the fixed conjugation
//! [`FRAME_TO_LAX`](crate::laxpair::FRAME_TO_LAX)). Each step is an exact
//! rotation `exp(Δ Ω_mid)`, so orthonormality never drifts.
//!
//! Sweep order: along `t` at `x_min`, then along `x` at every time level.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::algebra::{rodrigues_exp, Mat3, Rotation3, SkewTriple};
use crate::fields::{shared_grid, CoefficientSet, GridSpec, ScalarField, SecondFormCoeffs};
use crate::fmt::float;
use crate::structure::normal_connection;
use crate::{Error, Result};

/// Ω_t and Ω_x slot triples at every node.
struct Connection {
    along_t: Vec<SkewTriple>,
    along_x: Vec<SkewTriple>,
}

impl Connection {
    fn new(c: &CoefficientSet, s: &SecondFormCoeffs) -> Self {
        let (o13, o23) = normal_connection(c, s);
        let triples = |a: &ScalarField, b: &ScalarField, d: &ScalarField| {
            (0..a.values().len()).map(|i| SkewTriple::new(a.values()[i], b.values()[i], d.values()[i])).collect()
        };
        Connection { along_t: triples(&c.u23, &o13.dt, &o23.dt), along_x: triples(&c.v23, &o13.dx, &o23.dx) }
    }
}

/// One exponential step across an edge with midpoint coefficients.
fn step(frame: Rotation3, from: SkewTriple, to: SkewTriple, delta: f64) -> Rotation3 {
    rodrigues_exp(from.lerp_mid(to).scale(delta)) * frame
}

/// Frame at every grid node.
#[derive(Debug, Clone)]
pub struct FrameField {
    grid: GridSpec,
    frames: Vec<Rotation3>,
}

impl FrameField {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn at(&self, j: usize, n: usize) -> &Rotation3 {
        &self.frames[self.grid.index(j, n)]
    }

    pub fn frames(&self) -> &[Rotation3] {
        &self.frames
    }

    /// Largest orthonormality defect over all nodes.
    pub fn max_defect(&self) -> f64 {
        self.frames.iter().map(Rotation3::defect).fold(0.0, f64::max)
    }

    /// Largest `|det - 1|` over all nodes.
    pub fn max_det_error(&self) -> f64 {
        self.frames.iter().map(|r| (r.matrix().det() - 1.0).abs()).fold(0.0, f64::max)
    }
}

pub fn propagate_frames(c: &CoefficientSet, s: &SecondFormCoeffs, seed: Mat3) -> Result<FrameField> {
    let grid = shared_grid(c, s)?;
    let seed = Rotation3::new(seed)?;
    let conn = Connection::new(c, s);
    let (nx, nt) = (grid.nx(), grid.nt());
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut frames = vec![Rotation3::IDENTITY; grid.len()];
    frames[0] = seed;
    for n in 0..nt - 1 {
        let (a, b) = (grid.index(0, n), grid.index(0, n + 1));
        frames[b] = step(frames[a], conn.along_t[a], conn.along_t[b], dt);
    }
    for n in 0..nt {
        for j in 0..nx - 1 {
            let (a, b) = (grid.index(j, n), grid.index(j + 1, n));
            frames[b] = step(frames[a], conn.along_x[a], conn.along_x[b], dx);
        }
    }
    Ok(FrameField { grid, frames })
}

/// Frobenius distance between the corner frames reached by sweeping `t`
/// then `x`, and `x` then `t`, from `(x_min, t_min)` to `(x_max, t_max)`.
pub fn path_defect(c: &CoefficientSet, s: &SecondFormCoeffs, seed: Mat3) -> Result<f64> {
    let grid = shared_grid(c, s)?;
    let seed = Rotation3::new(seed)?;
    let conn = Connection::new(c, s);
    let (nx, nt) = (grid.nx(), grid.nt());
    let (dx, dt) = (grid.dx(), grid.dt());
    let sweep_t = |mut e: Rotation3, j: usize| {
        for n in 0..nt - 1 {
            let (a, b) = (grid.index(j, n), grid.index(j, n + 1));
            e = step(e, conn.along_t[a], conn.along_t[b], dt);
        }
        e
    };
    let sweep_x = |mut e: Rotation3, n: usize| {
        for j in 0..nx - 1 {
            let (a, b) = (grid.index(j, n), grid.index(j + 1, n));
            e = step(e, conn.along_x[a], conn.along_x[b], dx);
        }
        e
    };
    let path_a = sweep_x(sweep_t(seed, 0), nt - 1);
    let path_b = sweep_t(sweep_x(seed, 0), nx - 1);
    Ok((*path_a.matrix() - *path_b.matrix()).frobenius())
}

/// Immersion points on the grid's quad lattice.
#[derive(Debug, Clone)]
pub struct SurfaceMesh {
    grid: GridSpec,
    positions: Vec<[f64; 3]>,
    normals: Option<Vec<[f64; 3]>>,
}

impl SurfaceMesh {
    /// Mesh from an explicit parametrization `(x, t) ↦ point`.
    pub fn from_fn(grid: GridSpec, f: impl Fn(f64, f64) -> [f64; 3]) -> Self {
        SurfaceMesh { grid, positions: grid.nodes().map(|(_, _, x, t)| f(x, t)).collect(), normals: None }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn at(&self, j: usize, n: usize) -> [f64; 3] {
        self.positions[self.grid.index(j, n)]
    }

    pub fn positions(&self) -> &[[f64; 3]] {
        &self.positions
    }

    /// Frame normals `e₃`, when the mesh came from a reconstruction.
    pub fn normals(&self) -> Option<&[[f64; 3]]> {
        self.normals.as_deref()
    }

    /// Wavefront OBJ: one vertex per node, two triangles per grid cell.
    pub fn write_obj(&self, mut w: impl Write) -> Result<()> {
        let (nx, nt) = (self.grid.nx(), self.grid.nt());
        for p in &self.positions {
            writeln!(w, "v {} {} {}", float(p[0]), float(p[1]), float(p[2]))?;
        }
        let id = |j: usize, n: usize| self.grid.index(j, n) + 1;
        for n in 0..nt - 1 {
            for j in 0..nx - 1 {
                let (a, b, c, d) = (id(j, n), id(j + 1, n), id(j + 1, n + 1), id(j, n + 1));
                writeln!(w, "f {a} {b} {c}")?;
                writeln!(w, "f {a} {c} {d}")?;
            }
        }
        Ok(())
    }

    /// `j,n,X,Y,Z` rows.
    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        writeln!(w, "j,n,X,Y,Z")?;
        for (j, n, _, _) in self.grid.nodes() {
            let p = self.at(j, n);
            writeln!(w, "{j},{n},{},{},{}", float(p[0]), float(p[1]), float(p[2]))?;
        }
        Ok(())
    }
}

fn axpy(acc: [f64; 3], a: f64, v: [f64; 3]) -> [f64; 3] {
    [acc[0] + a * v[0], acc[1] + a * v[1], acc[2] + a * v[2]]
}

/// Integrate `x_t = u12 e₁ + u13 e₂`, `x_x = v12 e₁ + v13 e₂` with the
/// midpoint rule along the propagation sweeps, starting at the origin.
pub fn reconstruct_surface(frames: &FrameField, c: &CoefficientSet) -> Result<SurfaceMesh> {
    let grid = *c.check()?;
    if grid != frames.grid {
        return Err(Error::GridMismatch);
    }
    let (nx, nt) = (grid.nx(), grid.nt());
    let (dx, dt) = (grid.dx(), grid.dt());
    let mut positions = vec![[0.0; 3]; grid.len()];

    // Half-step frame: the edge's end frame rotated back by half the step.
    let midpoint = |a: usize, b: usize, first: &ScalarField, second: &ScalarField| {
        let (fa, fb) = (&frames.frames[a], &frames.frames[b]);
        let mid_frame = half_way(fa, fb);
        let c1 = 0.5 * (first.values()[a] + first.values()[b]);
        let c2 = 0.5 * (second.values()[a] + second.values()[b]);
        axpy(axpy([0.0; 3], c1, mid_frame.frame_vector(0)), c2, mid_frame.frame_vector(1))
    };
    for n in 0..nt - 1 {
        let (a, b) = (grid.index(0, n), grid.index(0, n + 1));
        positions[b] = axpy(positions[a], dt, midpoint(a, b, &c.u12, &c.u13));
    }
    for n in 0..nt {
        for j in 0..nx - 1 {
            let (a, b) = (grid.index(j, n), grid.index(j + 1, n));
            positions[b] = axpy(positions[a], dx, midpoint(a, b, &c.v12, &c.v13));
        }
    }
    let normals = frames.frames.iter().map(|r| r.frame_vector(2)).collect();
    Ok(SurfaceMesh { grid, positions, normals: Some(normals) })
}

/// Geodesic midpoint of two nearby rotations, `exp(½ log(B Aᵀ)) A`.
fn half_way(a: &Rotation3, b: &Rotation3) -> Rotation3 {
    let rel = *b.matrix() * a.matrix().transpose();
    // log of a rotation close to identity: angle from the trace, generator from the antisymmetric part
    let cos = ((rel[(0, 0)] + rel[(1, 1)] + rel[(2, 2)] - 1.0) * 0.5).clamp(-1.0, 1.0);
    let angle = cos.acos();
    let factor = if angle < 1e-6 { 0.5 } else { 0.5 * angle / angle.sin() };
    let gen = SkewTriple::new(rel[(0, 1)] - rel[(1, 0)], rel[(0, 2)] - rel[(2, 0)], rel[(1, 2)] - rel[(2, 1)]);
    rodrigues_exp(gen.scale(0.5 * factor)) * *a
}

/// Fundamental-form coefficients and curvature at one node.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeForms {
    pub e: f64,
    pub f: f64,
    pub g: f64,
    pub l: f64,
    pub m: f64,
    pub n: f64,
    pub gaussian: f64,
    pub mean: f64,
}

/// Smallest `EG - F²` treated as non-degenerate.
pub const DEGENERACY_THRESHOLD: f64 = 1e-8;

/// Discrete forms at interior nodes; `None` on the boundary and at degenerate nodes.
#[derive(Debug, Clone)]
pub struct DiscreteForms {
    grid: GridSpec,
    nodes: Vec<Option<NodeForms>>,
    degenerate: Vec<bool>,
}

impl DiscreteForms {
    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn at(&self, j: usize, n: usize) -> Option<&NodeForms> {
        self.nodes[self.grid.index(j, n)].as_ref()
    }

    pub fn is_degenerate(&self, j: usize, n: usize) -> bool {
        self.degenerate[self.grid.index(j, n)]
    }

    pub fn degenerate_count(&self) -> usize {
        self.degenerate.iter().filter(|d| **d).count()
    }

    /// `(j, n, forms)` for every evaluated node.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, &NodeForms)> + '_ {
        self.grid.nodes().filter_map(move |(j, n, _, _)| self.at(j, n).map(|f| (j, n, f)))
    }
}

fn sub(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn scaled(a: [f64; 3], s: f64) -> [f64; 3] {
    [a[0] * s, a[1] * s, a[2] * s]
}

pub fn discrete_forms(mesh: &SurfaceMesh) -> Result<DiscreteForms> {
    let g = mesh.grid;
    if g.nx() < 5 || g.nt() < 5 {
        return Err(Error::InvalidGrid(format!("discrete forms need at least 5x5 nodes (got {}x{})", g.nx(), g.nt())));
    }
    let (dx, dt) = (g.dx(), g.dt());
    let mut nodes = vec![None; g.len()];
    let mut degenerate = vec![false; g.len()];
    for n in 1..g.nt() - 1 {
        for j in 1..g.nx() - 1 {
            let p = |dj: isize, dn: isize| mesh.at((j as isize + dj) as usize, (n as isize + dn) as usize);
            let c = p(0, 0);
            let x_t = scaled(sub(p(0, 1), p(0, -1)), 0.5 / dt);
            let x_x = scaled(sub(p(1, 0), p(-1, 0)), 0.5 / dx);
            let x_tt = scaled(sub(p(0, 1), sub(scaled(c, 2.0), p(0, -1))), 1.0 / (dt * dt));
            let x_xx = scaled(sub(p(1, 0), sub(scaled(c, 2.0), p(-1, 0))), 1.0 / (dx * dx));
            let x_tx = scaled(sub(sub(p(1, 1), p(1, -1)), sub(p(-1, 1), p(-1, -1))), 0.25 / (dx * dt));
            let (e, f, gg) = (dot(x_t, x_t), dot(x_t, x_x), dot(x_x, x_x));
            let det = e * gg - f * f;
            if det < DEGENERACY_THRESHOLD {
                degenerate[g.index(j, n)] = true;
                continue;
            }
            let normal = cross(x_t, x_x);
            // The chart normal flips wherever x_t or x_x reverses; follow the frame's e₃ instead.
            let sign = match &mesh.normals {
                Some(frame_normals) if dot(normal, frame_normals[g.index(j, n)]) < 0.0 => -1.0,
                _ => 1.0,
            };
            let normal = scaled(normal, sign / dot(normal, normal).sqrt());
            let (l, m, nn) = (dot(x_tt, normal), dot(x_tx, normal), dot(x_xx, normal));
            nodes[g.index(j, n)] = Some(NodeForms {
                e,
                f,
                g: gg,
                l,
                m,
                n: nn,
                gaussian: (l * nn - m * m) / det,
                mean: (e * nn - 2.0 * f * m + gg * l) / (2.0 * det),
            });
        }
    }
    if nodes.iter().all(Option::is_none) {
        return Err(Error::AllDegenerate);
    }
    Ok(DiscreteForms { grid: g, nodes, degenerate })
}

/// Discrete curvature compared with the analytic `K` field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSummary {
    pub evaluated_nodes: usize,
    pub degenerate_nodes: usize,
    pub mean_gaussian: f64,
    pub mean_mean_curvature: f64,
    pub max_abs_gaussian_deviation: f64,
    pub max_rel_gaussian_deviation: f64,
}

pub fn curvature_summary(forms: &DiscreteForms, analytic_k: &ScalarField) -> CurvatureSummary {
    let (mut count, mut sum_k, mut sum_h, mut max_abs, mut max_rel) = (0usize, 0.0, 0.0, 0.0f64, 0.0f64);
    for (j, n, f) in forms.iter() {
        let k = analytic_k.at(j, n);
        let dev = (f.gaussian - k).abs();
        count += 1;
        sum_k += f.gaussian;
        sum_h += f.mean;
        max_abs = max_abs.max(dev);
        max_rel = max_rel.max(dev / k.abs().max(1.0));
    }
    CurvatureSummary {
        evaluated_nodes: count,
        degenerate_nodes: forms.degenerate_count(),
        mean_gaussian: sum_k / count as f64,
        mean_mean_curvature: sum_h / count as f64,
        max_abs_gaussian_deviation: max_abs,
        max_rel_gaussian_deviation: max_rel,
    }
}
