//! P1 finite elements for `Delta v = g` on the planar domain, with Dirichlet
//! or Neumann data, on a boundary-fitted polar mesh.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::angle::RationalAngle;
use crate::error::{Error, Result};
use crate::geometry::RadialBoundary;
use crate::io::{num, CsvTable};
use crate::sparse::{solve_cyclic_tridiagonal, solve_spd, CsrMatrix};

/// Relative residual targeted by the linear solver.
pub const SOLVER_TOL: f64 = 1e-12;

/// Relative residual above which a solve counts as failed.
pub const SOLVER_ACCEPT: f64 = 1e-9;

/// Seven-point rule of degree 5 on a triangle: barycentric coordinates and
/// weights summing to one.
fn radon_rule() -> [([f64; 3], f64); 7] {
    let r = 15f64.sqrt();
    let (a1, b1) = ((6.0 - r) / 21.0, (9.0 + 2.0 * r) / 21.0);
    let (a2, b2) = ((6.0 + r) / 21.0, (9.0 - 2.0 * r) / 21.0);
    let (w1, w2) = ((155.0 - r) / 1200.0, (155.0 + r) / 1200.0);
    let c = 1.0 / 3.0;
    [
        ([c, c, c], 9.0 / 40.0),
        ([a1, a1, b1], w1),
        ([a1, b1, a1], w1),
        ([b1, a1, a1], w1),
        ([a2, a2, b2], w2),
        ([a2, b2, a2], w2),
        ([b2, a2, a2], w2),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundaryEdge {
    pub a: usize,
    pub b: usize,
    pub theta_a: RationalAngle,
    pub theta_b: RationalAngle,
    /// Triangle owning the edge.
    pub triangle: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TriMesh {
    pub nodes: Vec<[f64; 2]>,
    /// Counterclockwise index triples.
    pub triangles: Vec<[usize; 3]>,
    /// Boundary edges in increasing `theta`, edge `j` from node `j` to `j+1`.
    pub boundary_edges: Vec<BoundaryEdge>,
    pub n_theta: usize,
    pub n_r: usize,
    /// Smallest rotation (in angular steps) that maps the mesh onto itself.
    pub period: usize,
}

impl TriMesh {
    pub fn boundary_nodes(&self) -> impl Iterator<Item = usize> + '_ {
        self.boundary_edges.iter().map(|e| e.a)
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.triangle_area(t)).sum()
    }

    pub fn barycenter(&self, t: usize) -> [f64; 2] {
        let [a, b, c] = self.triangles[t].map(|i| self.nodes[i]);
        [(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]
    }

    /// Smallest interior angle in degrees.
    pub fn min_angle_deg(&self) -> f64 {
        let mut worst = f64::INFINITY;
        for tri in &self.triangles {
            let p = tri.map(|i| self.nodes[i]);
            for k in 0..3 {
                let (o, u, v) = (p[k], p[(k + 1) % 3], p[(k + 2) % 3]);
                let (ux, uy, vx, vy) = (u[0] - o[0], u[1] - o[1], v[0] - o[0], v[1] - o[1]);
                let ang = (ux * vy - uy * vx).atan2(ux * vx + uy * vy).abs();
                worst = worst.min(ang.to_degrees());
            }
        }
        worst
    }

    /// Index of the triangle obtained by rotating `t` by `k` angular steps.
    pub fn rotate_triangle(&self, t: usize, k: usize) -> usize {
        let n = self.n_theta;
        if t < n {
            return (t + k) % n;
        }
        let rel = t - n;
        let (block, within) = (rel / (2 * n), rel % (2 * n));
        let (j, side) = (within / 2, within % 2);
        n + block * 2 * n + 2 * ((j + k) % n) + side
    }

    /// Conformity, positive areas and boundary nodes on `r = F(theta)`.
    pub fn validate(&self, boundary: &RadialBoundary) -> Result<()> {
        let mut edges = std::collections::HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            if self.triangle_area(t) <= 0.0 {
                return Err(Error::InvalidMesh(format!("triangle {t} has nonpositive area")));
            }
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                let key = (a.min(b), a.max(b));
                let c = edges.entry(key).or_insert(0usize);
                *c += 1;
                if *c > 2 {
                    return Err(Error::InvalidMesh(format!("edge {key:?} shared by > 2 triangles")));
                }
            }
        }
        for e in &self.boundary_edges {
            let [x, y] = self.nodes[e.a];
            let r = boundary.radius(e.theta_a);
            if (x.hypot(y) - r).abs() > 1e-12 {
                return Err(Error::InvalidMesh(format!("boundary node {} is off the curve", e.a)));
            }
        }
        Ok(())
    }
}

/// Graded reference radius, `rho(1) = 1` and `rho'(1) = 1/3`.
fn graded_radius(s: f64) -> f64 {
    s * (5.0 - 2.0 * s) / 3.0
}

/// Structured mesh: the reference disk with `n_r` graded rings of `n_theta`
/// nodes, mapped by `(rho, theta) -> rho F(theta) (cos theta, sin theta)`.
pub fn mesh_polar(boundary: &RadialBoundary, n_theta: usize, n_r: usize) -> Result<TriMesh> {
    if n_theta < 16 || n_theta % 8 != 0 {
        return Err(Error::param("n_theta", format!("must be >= 16 and a multiple of 8, got {n_theta}")));
    }
    if n_r < 4 {
        return Err(Error::param("n_r", format!("must be >= 4, got {n_r}")));
    }
    let nt = n_theta as u64;
    let angles: Vec<RationalAngle> = (0..nt).map(|j| RationalAngle::new(j, nt)).collect::<Result<_>>()?;
    let radii: Vec<f64> = angles.iter().map(|&a| boundary.radius(a)).collect();
    if let Some(j) = radii.iter().position(|&r| !(r > 0.0)) {
        return Err(Error::InvalidMesh(format!("F({j}/{n_theta} turns) = {} is not positive", radii[j])));
    }
    let trig: Vec<(f64, f64)> = angles.iter().map(|a| a.radians().sin_cos()).collect();

    let node = |i: usize, j: usize| 1 + (i - 1) * n_theta + (j % n_theta);
    let mut nodes = Vec::with_capacity(1 + n_theta * n_r);
    nodes.push([0.0, 0.0]);
    for i in 1..=n_r {
        let rho = graded_radius(i as f64 / n_r as f64);
        for j in 0..n_theta {
            let (s, c) = trig[j];
            let r = if i == n_r { radii[j] } else { rho * radii[j] };
            nodes.push([r * c, r * s]);
        }
    }
    let mut triangles = Vec::with_capacity(n_theta * (2 * n_r - 1));
    for j in 0..n_theta {
        triangles.push([0, node(1, j), node(1, j + 1)]);
    }
    for i in 1..n_r {
        for j in 0..n_theta {
            let (in0, in1, out0, out1) = (node(i, j), node(i, j + 1), node(i + 1, j), node(i + 1, j + 1));
            triangles.push([in0, out0, out1]);
            triangles.push([in0, out1, in1]);
        }
    }
    let last_block = n_theta + (n_r - 2) * 2 * n_theta;
    let boundary_edges = (0..n_theta)
        .map(|j| BoundaryEdge {
            a: node(n_r, j),
            b: node(n_r, j + 1),
            theta_a: angles[j],
            theta_b: angles[(j + 1) % n_theta],
            triangle: last_block + 2 * j,
        })
        .collect();
    let period = mesh_period(boundary, n_theta);
    Ok(TriMesh {
        nodes,
        triangles,
        boundary_edges,
        n_theta,
        n_r,
        period,
    })
}

/// `n_theta / b_1` when `b_1` divides `n_theta` (every `b_k` is a multiple of
/// `b_1`), 1 for the disk, and `n_theta` otherwise.
fn mesh_period(boundary: &RadialBoundary, n_theta: usize) -> usize {
    let params = boundary.params();
    if params.terms() == 0 {
        return 1;
    }
    let e1 = params.exponent(1);
    if e1 < 63 && n_theta % (1usize << e1) == 0 {
        n_theta >> e1
    } else {
        n_theta
    }
}

// ---------------------------------------------------------------------------
// right-hand sides

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum RhsSpec {
    ConstantOne,
    /// `alpha x1 x2 + beta (x1^2 - x2^2)`.
    HarmonicQuadratic { alpha: f64, beta: f64 },
    /// Nodal samples, interpolated piecewise linearly.
    Custom { samples: Vec<f64> },
}

impl RhsSpec {
    /// `g` at a point of triangle `t` with barycentric coordinates `lam`.
    fn eval(&self, mesh: &TriMesh, t: usize, x: [f64; 2], lam: [f64; 3]) -> f64 {
        match self {
            RhsSpec::ConstantOne => 1.0,
            RhsSpec::HarmonicQuadratic { alpha, beta } => {
                alpha * x[0] * x[1] + beta * (x[0] * x[0] - x[1] * x[1])
            }
            RhsSpec::Custom { samples } => {
                let tri = mesh.triangles[t];
                (0..3).map(|k| lam[k] * samples[tri[k]]).sum()
            }
        }
    }

    /// `grad g` for the analytic kinds.
    pub fn gradient(&self, x: [f64; 2]) -> Option<[f64; 2]> {
        match self {
            RhsSpec::ConstantOne => Some([0.0, 0.0]),
            RhsSpec::HarmonicQuadratic { alpha, beta } => Some([
                alpha * x[1] + 2.0 * beta * x[0],
                alpha * x[0] - 2.0 * beta * x[1],
            ]),
            RhsSpec::Custom { .. } => None,
        }
    }

    fn validate(&self, mesh: &TriMesh) -> Result<()> {
        if let RhsSpec::Custom { samples } = self {
            if samples.len() != mesh.nodes.len() {
                return Err(Error::LengthMismatch {
                    left: samples.len(),
                    right: mesh.nodes.len(),
                });
            }
        }
        Ok(())
    }
}

/// `int h(x, g(x))` over the mesh with the degree-5 rule.
fn integrate<F>(mesh: &TriMesh, rhs: &RhsSpec, h: F) -> f64
where
    F: Fn(usize, [f64; 2], [f64; 3], f64) -> f64 + Sync,
{
    let rule = radon_rule();
    let parts: Vec<f64> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let p = mesh.triangles[t].map(|i| mesh.nodes[i]);
            let area = mesh.triangle_area(t);
            rule.iter()
                .map(|&(lam, w)| {
                    let x = [
                        lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                        lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                    ];
                    w * area * h(t, x, lam, rhs.eval(mesh, t, x, lam))
                })
                .sum()
        })
        .collect();
    parts.iter().sum()
}

/// `(int g, int |g|)` over the mesh.
pub fn rhs_integrals(mesh: &TriMesh, rhs: &RhsSpec) -> (f64, f64) {
    (
        integrate(mesh, rhs, |_, _, _, g| g),
        integrate(mesh, rhs, |_, _, _, g| g.abs()),
    )
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeumannRhs {
    pub rhs: RhsSpec,
    /// `(int x1 x2, int x1^2 - x2^2)`.
    pub moments: [f64; 2],
    /// `|int g|` for the returned data.
    pub compatibility_residual: f64,
}

/// Harmonic quadratic with vanishing mean over the mesh.
pub fn choose_neumann_rhs(mesh: &TriMesh) -> NeumannRhs {
    let one = RhsSpec::ConstantOne;
    let m1 = integrate(mesh, &one, |_, x, _, _| x[0] * x[1]);
    let m2 = integrate(mesh, &one, |_, x, _, _| x[0] * x[0] - x[1] * x[1]);
    let norm = m1.hypot(m2);
    let (alpha, beta) = if norm <= 1e-12 { (1.0, 0.0) } else { (-m2 / norm, m1 / norm) };
    let rhs = RhsSpec::HarmonicQuadratic { alpha, beta };
    let compatibility_residual = rhs_integrals(mesh, &rhs).0.abs();
    NeumannRhs {
        rhs,
        moments: [m1, m2],
        compatibility_residual,
    }
}

// ---------------------------------------------------------------------------
// solve

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FemSolution {
    pub bc: BoundaryCondition,
    pub rhs: RhsSpec,
    pub values: Vec<f64>,
    /// Constant gradient on each triangle.
    pub gradients: Vec<[f64; 2]>,
    /// Constant subtracted to reach zero mean (Neumann), else 0.
    pub gauge: f64,
    /// Lagrange multiplier of the mean constraint (Neumann), else 0.
    pub multiplier: f64,
    pub iterations: usize,
    pub rel_residual: f64,
    /// `A v + b` with `b_i = int g phi_i`, the discrete boundary flux functional.
    #[serde(skip)]
    flux_residual: Vec<f64>,
}

impl FemSolution {
    pub fn flux_residual(&self) -> &[f64] {
        &self.flux_residual
    }
}

fn local_gradients(p: [[f64; 2]; 3]) -> ([[f64; 2]; 3], f64) {
    let area2 = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[2][0] - p[0][0]) * (p[1][1] - p[0][1]);
    let g = |a: [f64; 2], b: [f64; 2]| [(a[1] - b[1]) / area2, (b[0] - a[0]) / area2];
    ([g(p[1], p[2]), g(p[2], p[0]), g(p[0], p[1])], 0.5 * area2)
}

struct Assembly {
    stiffness: CsrMatrix,
    load: Vec<f64>,
    mass_rows: Vec<f64>,
}

fn assemble(mesh: &TriMesh, rhs: &RhsSpec) -> Assembly {
    let rule = radon_rule();
    let locals: Vec<([[f64; 3]; 3], [f64; 3], f64)> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let p = mesh.triangles[t].map(|i| mesh.nodes[i]);
            let (g, area) = local_gradients(p);
            let mut k = [[0.0; 3]; 3];
            for a in 0..3 {
                for b in 0..3 {
                    k[a][b] = area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
                }
            }
            let mut f = [0.0; 3];
            for &(lam, w) in &rule {
                let x = [
                    lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                    lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                ];
                let gv = rhs.eval(mesh, t, x, lam);
                for a in 0..3 {
                    f[a] += w * area * gv * lam[a];
                }
            }
            (k, f, area)
        })
        .collect();
    let n = mesh.nodes.len();
    let mut trip = Vec::with_capacity(9 * mesh.triangles.len());
    let mut load = vec![0.0; n];
    let mut mass_rows = vec![0.0; n];
    for (tri, (k, f, area)) in mesh.triangles.iter().zip(&locals) {
        for a in 0..3 {
            load[tri[a]] += f[a];
            mass_rows[tri[a]] += area / 3.0;
            for b in 0..3 {
                trip.push((tri[a], tri[b], k[a][b]));
            }
        }
    }
    Assembly {
        stiffness: CsrMatrix::from_triplets(n, trip),
        load,
        mass_rows,
    }
}

/// Galerkin solution of `Delta v = g`, i.e. `int grad v . grad w = -int g w`
/// for test functions `w` vanishing on the boundary (Dirichlet) or for all
/// `w` (Neumann, with zero mean enforced by a multiplier).
pub fn solve(mesh: &TriMesh, rhs: &RhsSpec, bc: BoundaryCondition) -> Result<FemSolution> {
    rhs.validate(mesh)?;
    let asm = assemble(mesh, rhs);
    let n = mesh.nodes.len();
    let mut values = vec![0.0; n];
    let (mut gauge, mut multiplier) = (0.0, 0.0);
    let stats;
    match bc {
        BoundaryCondition::Dirichlet => {
            let mut on_boundary = vec![false; n];
            for i in mesh.boundary_nodes() {
                on_boundary[i] = true;
            }
            let free: Vec<usize> = (0..n).filter(|&i| !on_boundary[i]).collect();
            let a = asm.stiffness.submatrix(&free);
            let b: Vec<f64> = free.iter().map(|&i| -asm.load[i]).collect();
            let (x, st) = solve_spd(&a, &b, SOLVER_TOL, SOLVER_ACCEPT)?;
            for (&i, v) in free.iter().zip(x) {
                values[i] = v;
            }
            stats = st;
        }
        BoundaryCondition::Neumann => {
            let (total, l1) = rhs_integrals(mesh, rhs);
            if total.abs() > 1e-10 * l1.max(f64::MIN_POSITIVE) {
                return Err(Error::Incompatible {
                    integral: total,
                    tolerance: 1e-10 * l1,
                });
            }
            let load_sum: f64 = asm.load.iter().sum();
            let mass_sum: f64 = asm.mass_rows.iter().sum();
            multiplier = load_sum / mass_sum;
            // pin the center node; the compatible system then fixes the rest
            let free: Vec<usize> = (1..n).collect();
            let a = asm.stiffness.submatrix(&free);
            let b: Vec<f64> = free
                .iter()
                .map(|&i| -asm.load[i] + multiplier * asm.mass_rows[i])
                .collect();
            let (x, st) = solve_spd(&a, &b, SOLVER_TOL, SOLVER_ACCEPT)?;
            for (&i, v) in free.iter().zip(x) {
                values[i] = v;
            }
            let mean = values.iter().zip(&asm.mass_rows).map(|(v, m)| v * m).sum::<f64>() / mass_sum;
            gauge = mean;
            for v in &mut values {
                *v -= mean;
            }
            stats = st;
        }
    }
    let gradients = mesh
        .triangles
        .iter()
        .map(|tri| {
            let (g, _) = local_gradients(tri.map(|i| mesh.nodes[i]));
            let u = tri.map(|i| values[i]);
            [
                g[0][0] * u[0] + g[1][0] * u[1] + g[2][0] * u[2],
                g[0][1] * u[0] + g[1][1] * u[1] + g[2][1] * u[2],
            ]
        })
        .collect();
    let av = asm.stiffness.matvec(&values);
    let flux_residual = av.iter().zip(&asm.load).map(|(a, b)| a + b).collect();
    Ok(FemSolution {
        bc,
        rhs: rhs.clone(),
        values,
        gradients,
        gauge,
        multiplier,
        iterations: stats.iterations,
        rel_residual: stats.rel_residual,
        flux_residual,
    })
}

/// `int v` over the mesh.
pub fn solution_mean_integral(mesh: &TriMesh, sol: &FemSolution) -> f64 {
    mesh.triangles
        .iter()
        .enumerate()
        .map(|(t, tri)| mesh.triangle_area(t) * tri.iter().map(|&i| sol.values[i]).sum::<f64>() / 3.0)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    pub h1_semi: f64,
}

/// Errors against an exact solution `x -> (v, grad v)`, with the degree-5 rule.
pub fn error_norms<F>(mesh: &TriMesh, sol: &FemSolution, exact: F) -> ErrorNorms
where
    F: Fn([f64; 2]) -> (f64, [f64; 2]) + Sync,
{
    let rule = radon_rule();
    let parts: Vec<[f64; 2]> = (0..mesh.triangles.len())
        .into_par_iter()
        .map(|t| {
            let tri = mesh.triangles[t];
            let p = tri.map(|i| mesh.nodes[i]);
            let area = mesh.triangle_area(t);
            let gh = sol.gradients[t];
            let mut acc = [0.0; 2];
            for &(lam, w) in &rule {
                let x = [
                    lam[0] * p[0][0] + lam[1] * p[1][0] + lam[2] * p[2][0],
                    lam[0] * p[0][1] + lam[1] * p[1][1] + lam[2] * p[2][1],
                ];
                let vh: f64 = (0..3).map(|k| lam[k] * sol.values[tri[k]]).sum();
                let (v, g) = exact(x);
                acc[0] += w * area * (vh - v).powi(2);
                acc[1] += w * area * ((gh[0] - g[0]).powi(2) + (gh[1] - g[1]).powi(2));
            }
            acc
        })
        .collect();
    let (l2, h1) = parts.iter().fold((0.0, 0.0), |(a, b), p| (a + p[0], b + p[1]));
    ErrorNorms {
        l2: l2.sqrt(),
        h1_semi: h1.sqrt(),
    }
}

// ---------------------------------------------------------------------------
// boundary flux

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundaryFlux {
    /// Edge midpoint angles in radians.
    pub theta: Vec<f64>,
    /// Consistent flux at boundary nodes (node `j` at `theta = 2*pi*j/n_theta`).
    pub nodal: Vec<f64>,
    /// Consistent flux at edge midpoints.
    pub consistent: Vec<f64>,
    /// `n_e . grad v` on the triangle owning each edge.
    pub raw: Vec<f64>,
    /// Edge lengths of the boundary polygon.
    pub edge_length: Vec<f64>,
    /// Trace of `v` at edge midpoints.
    pub trace: Vec<f64>,
}

impl BoundaryFlux {
    /// `sum lambda ds` with the piecewise-linear consistent flux.
    pub fn integral(&self) -> f64 {
        self.consistent.iter().zip(&self.edge_length).map(|(l, h)| l * h).sum()
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new("lacuna.boundary_flux/1", &["theta", "trace", "flux", "raw_flux", "ds"]);
        for j in 0..self.theta.len() {
            t.push(vec![
                num(self.theta[j]),
                num(self.trace[j]),
                num(self.consistent[j]),
                num(self.raw[j]),
                num(self.edge_length[j]),
            ]);
        }
        t
    }
}

fn edge_normal(mesh: &TriMesh, e: &BoundaryEdge) -> ([f64; 2], f64) {
    let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
    let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
    let len = dx.hypot(dy);
    ([dy / len, -dx / len], len)
}

/// Consistent flux `lambda` from `M_b lambda = A v + b` on boundary rows,
/// with `M_b` the boundary mass matrix, plus the raw gradient trace.
pub fn boundary_flux(sol: &FemSolution, mesh: &TriMesh) -> Result<BoundaryFlux> {
    let nb = mesh.boundary_edges.len();
    let mut len = Vec::with_capacity(nb);
    let mut raw = Vec::with_capacity(nb);
    let mut theta = Vec::with_capacity(nb);
    let mut trace = Vec::with_capacity(nb);
    for (j, e) in mesh.boundary_edges.iter().enumerate() {
        let (n, h) = edge_normal(mesh, e);
        let g = sol.gradients[e.triangle];
        len.push(h);
        raw.push(n[0] * g[0] + n[1] * g[1]);
        theta.push(TAU * (j as f64 + 0.5) / nb as f64);
        trace.push(0.5 * (sol.values[e.a] + sol.values[e.b]));
    }
    // node j sits between edge j-1 and edge j
    let diag: Vec<f64> = (0..nb).map(|j| (len[(j + nb - 1) % nb] + len[j]) / 3.0).collect();
    let lower: Vec<f64> = (0..nb).map(|j| len[(j + nb - 1) % nb] / 6.0).collect();
    let upper: Vec<f64> = (0..nb).map(|j| len[j] / 6.0).collect();
    let rhs: Vec<f64> = mesh.boundary_edges.iter().map(|e| sol.flux_residual[e.a]).collect();
    let nodal = solve_cyclic_tridiagonal(&lower, &diag, &upper, &rhs)?;
    let consistent = (0..nb).map(|j| 0.5 * (nodal[j] + nodal[(j + 1) % nb])).collect();
    Ok(BoundaryFlux {
        theta,
        nodal,
        consistent,
        raw,
        edge_length: len,
        trace,
    })
}

// ---------------------------------------------------------------------------
// Green identities

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GreenReport {
    pub bc: BoundaryCondition,
    /// Dirichlet: `sum lambda ds`. Neumann: `-sum v d_n g ds`.
    pub value: f64,
    /// Dirichlet: `int g`. Neumann: `int g^2`. Both over the mesh.
    pub target: f64,
    /// `|value - target| / |target|`, or `None` when the target vanishes.
    pub rel_error: Option<f64>,
}

pub fn green_checks(sol: &FemSolution, mesh: &TriMesh, flux: &BoundaryFlux) -> Result<GreenReport> {
    let (value, target) = match sol.bc {
        BoundaryCondition::Dirichlet => (flux.integral(), rhs_integrals(mesh, &sol.rhs).0),
        BoundaryCondition::Neumann => {
            // v is linear and d_n g is linear along each edge: Simpson is exact
            let mut acc = 0.0;
            for e in &mesh.boundary_edges {
                let (n, h) = edge_normal(mesh, e);
                let (pa, pb) = (mesh.nodes[e.a], mesh.nodes[e.b]);
                let pm = [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])];
                let dn = |x: [f64; 2]| -> Result<f64> {
                    let g = sol.rhs.gradient(x).ok_or_else(|| {
                        Error::param("rhs", "Neumann identity needs an analytic right-hand side")
                    })?;
                    Ok(n[0] * g[0] + n[1] * g[1])
                };
                let (va, vb) = (sol.values[e.a], sol.values[e.b]);
                acc += h / 6.0 * (va * dn(pa)? + 2.0 * (va + vb) * dn(pm)? + vb * dn(pb)?);
            }
            let g2 = integrate(mesh, &sol.rhs, |_, _, _, g| g * g);
            (-acc, g2)
        }
    };
    Ok(GreenReport {
        bc: sol.bc,
        value,
        target,
        rel_error: (target != 0.0).then(|| ((value - target) / target).abs()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lacunary::{LacunaryParams, GAMMA_REFERENCE};

    fn disk() -> RadialBoundary {
        RadialBoundary::new(LacunaryParams::demo(7, 0, GAMMA_REFERENCE).unwrap())
    }

    #[test]
    fn radon_rule_is_degree_five() {
        let rule = radon_rule();
        // int over the reference triangle of l1^a l2^b = a! b! 2 / (a+b+2)! times area
        let fact = |n: u32| (1..=n).map(|k| k as f64).product::<f64>();
        for a in 0..=5u32 {
            for b in 0..=(5 - a) {
                let q: f64 = rule.iter().map(|&(l, w)| w * l[0].powi(a as i32) * l[1].powi(b as i32)).sum();
                let exact = 2.0 * fact(a) * fact(b) / fact(a + b + 2);
                assert!((q - exact).abs() < 1e-14, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn disk_mesh_structure() {
        let m = mesh_polar(&disk(), 16, 4).unwrap();
        assert_eq!(m.nodes.len(), 1 + 16 * 4);
        assert_eq!(m.triangles.len(), 16 * 7);
        assert_eq!(m.boundary_edges.len(), 16);
        m.validate(&disk()).unwrap();
        assert!(mesh_polar(&disk(), 20, 4).is_err());
        assert!(mesh_polar(&disk(), 16, 3).is_err());
        assert!(m.min_angle_deg() > 15.0);
        for t in [0, 5, 16, 40, 111] {
            let r = m.rotate_triangle(t, 3);
            let (a, b) = (m.barycenter(t), m.barycenter(r));
            let phi = TAU * 3.0 / 16.0;
            let rot = [a[0] * phi.cos() - a[1] * phi.sin(), a[0] * phi.sin() + a[1] * phi.cos()];
            assert!((rot[0] - b[0]).abs() < 1e-12 && (rot[1] - b[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn neumann_rhs_and_incompatibility() {
        let m = mesh_polar(&disk(), 32, 8).unwrap();
        let nr = choose_neumann_rhs(&m);
        assert_eq!(nr.rhs, RhsSpec::HarmonicQuadratic { alpha: 1.0, beta: 0.0 });
        assert!(nr.compatibility_residual < 1e-14);
        assert!(matches!(
            solve(&m, &RhsSpec::ConstantOne, BoundaryCondition::Neumann),
            Err(Error::Incompatible { .. })
        ));
    }

    #[test]
    fn dirichlet_disk_flux_and_conservation() {
        let m = mesh_polar(&disk(), 128, 32).unwrap();
        let sol = solve(&m, &RhsSpec::ConstantOne, BoundaryCondition::Dirichlet).unwrap();
        assert!(sol.rel_residual <= 1e-11);
        let interior_max = m.nodes.iter().enumerate().filter(|(i, _)| *i < 1 + 128 * 31).map(|(i, _)| sol.values[i]).fold(f64::MIN, f64::max);
        assert!(interior_max < 0.0);
        let flux = boundary_flux(&sol, &m).unwrap();
        for l in &flux.consistent {
            assert!((l - 0.5).abs() < 0.025, "lambda = {l}");
        }
        let g = green_checks(&sol, &m, &flux).unwrap();
        assert!((g.value - g.target).abs() < 1e-10);
    }

    #[test]
    fn neumann_disk_zero_mean_and_weak_flux() {
        let m = mesh_polar(&disk(), 64, 16).unwrap();
        let rhs = RhsSpec::HarmonicQuadratic { alpha: 1.0, beta: 0.0 };
        let sol = solve(&m, &rhs, BoundaryCondition::Neumann).unwrap();
        assert!(solution_mean_integral(&m, &sol).abs() < 1e-10);
        let flux = boundary_flux(&sol, &m).unwrap();
        assert!(flux.nodal.iter().all(|l| l.abs() < 1e-9));
        let g = green_checks(&sol, &m, &flux).unwrap();
        assert!((g.target - std::f64::consts::PI / 24.0).abs() < 2e-3);
        assert!(g.rel_error.unwrap() < 0.05);
    }

    #[test]
    fn zero_rhs_gives_zero() {
        let m = mesh_polar(&disk(), 16, 4).unwrap();
        let rhs = RhsSpec::Custom { samples: vec![0.0; m.nodes.len()] };
        for bc in [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann] {
            let sol = solve(&m, &rhs, bc).unwrap();
            assert!(sol.values.iter().all(|&v| v == 0.0));
            let flux = boundary_flux(&sol, &m).unwrap();
            assert_eq!(flux.integral(), 0.0);
        }
    }
}
