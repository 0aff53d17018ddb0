//! Fractional seminorms of solution gradients and boundary fluxes, swept over
//! truncation order and resolution and compared with the disk.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use crate::error::{Error, Result};
use crate::geometry::{area, normal_at, trace_relation_tangentialcase, RadialBoundary};
use crate::io::{num, opt, CsvTable};
use crate::lacunary::{LacunaryParams, Mode, GAMMA_REFERENCE};
use crate::poisson::{
    boundary_flux, choose_neumann_rhs, green_checks, mesh_polar, solve, BoundaryCondition, BoundaryFlux,
    FemSolution, GreenReport, RhsSpec, TriMesh,
};
use crate::reduce::{tiled_sums, DEFAULT_TILE};
use crate::separation::{abs_pow, gagliardo_1d, SeminormSpec};

/// Spec grid of the default sweep.
pub const DEFAULT_SPECS: [(f64, f64); 4] = [(1.0, 0.25), (2.0, 0.25), (2.0, 0.5), (4.0, 0.1)];

/// Absolute floor below which changes of a control diagnostic count as noise.
pub const CONTROL_NOISE_FLOOR: f64 = 1e-3;

// ---------------------------------------------------------------------------
// interior seminorm

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradSeminorm {
    pub p: f64,
    pub epsilon: f64,
    /// `s = 1/p + eps`.
    pub order: f64,
    pub value: f64,
    /// Contribution of vertex-sharing pairs (local model), as a p-th power.
    pub near: f64,
    /// Contribution of separated pairs, as a p-th power.
    pub far: f64,
    /// Order of the rotation group used to fold the double sum.
    pub symmetry: usize,
}

/// Rotation group order `g` and sign such that the gradient field satisfies
/// `grad v(R T) = sign * R grad v(T)` for the rotation `R` by `2*pi/g`.
fn gradient_symmetry(mesh: &TriMesh, grads: &[[f64; 2]]) -> usize {
    let full = mesh.n_theta / mesh.period;
    let scale = grads.iter().map(|g| g[0].hypot(g[1])).fold(0.0, f64::max);
    let tol = 1e-8 * scale.max(f64::MIN_POSITIVE);
    let mut candidates = vec![full];
    for c in [4, 2] {
        if c < full && full % c == 0 {
            candidates.push(c);
        }
    }
    for g in candidates {
        if g < 2 {
            continue;
        }
        let k = mesh.n_theta / g;
        let phi = TAU / g as f64;
        let (s, c) = phi.sin_cos();
        for sign in [1.0, -1.0] {
            let ok = (0..grads.len()).all(|t| {
                let [x, y] = grads[t];
                let r = mesh.rotate_triangle(t, k);
                let want = [sign * (c * x - s * y), sign * (s * x + c * y)];
                (grads[r][0] - want[0]).abs() <= tol && (grads[r][1] - want[1]).abs() <= tol
            });
            if ok {
                return g;
            }
        }
    }
    1
}

/// Triangles with angular index below `n_theta / g`: a fundamental sector.
fn sector(mesh: &TriMesh, g: usize) -> Vec<usize> {
    let width = mesh.n_theta / g;
    let n = mesh.n_theta;
    (0..mesh.triangles.len())
        .filter(|&t| {
            let j = if t < n { t } else { ((t - n) % (2 * n)) / 2 };
            j < width
        })
        .collect()
}

/// Number of kernel evaluations `grad_seminorm_2d` needs on this field.
pub fn grad_seminorm_cost(mesh: &TriMesh, sol: &FemSolution) -> f64 {
    let g = gradient_symmetry(mesh, &sol.gradients);
    let t = mesh.triangles.len() as f64;
    t * t / g as f64
}

/// Gagliardo seminorm of order `s = 1/p + eps` of the piecewise constant
/// gradient, for every spec with `s < 1`.
///
/// Separated triangle pairs contribute `|T||T'| |g_T - g_T'|^p / d^(2 + s p)`
/// with `d` the barycenter distance. Pairs sharing a vertex are replaced by
/// the integral of `L_T^p r^(p - 2 - s p)` over a disk of the patch's area,
/// where `L_T` is the mean jump slope across the edges of `T`.
pub fn grad_seminorm_2d(sol: &FemSolution, mesh: &TriMesh, specs: &[SeminormSpec]) -> Result<Vec<GradSeminorm>> {
    grad_seminorm_folded(sol, mesh, specs, gradient_symmetry(mesh, &sol.gradients))
}

fn grad_seminorm_folded(
    sol: &FemSolution,
    mesh: &TriMesh,
    specs: &[SeminormSpec],
    g: usize,
) -> Result<Vec<GradSeminorm>> {
    for spec in specs {
        let s = spec.order_gradient();
        if !(s > 0.0 && s < 1.0) {
            return Err(Error::param("spec", format!("order 1/p + eps = {s} lies outside (0, 1)")));
        }
    }
    let nt = mesh.triangles.len();
    let grads = &sol.gradients;
    let bary: Vec<[f64; 2]> = (0..nt).map(|t| mesh.barycenter(t)).collect();
    let areas: Vec<f64> = (0..nt).map(|t| mesh.triangle_area(t)).collect();

    let mut node_tris: Vec<Vec<usize>> = vec![Vec::new(); mesh.nodes.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for &i in tri {
            node_tris[i].push(t);
        }
    }
    let neighbours: Vec<Vec<usize>> = (0..nt)
        .map(|t| {
            let mut v: Vec<usize> = mesh.triangles[t].iter().flat_map(|&i| node_tris[i].iter().copied()).filter(|&u| u != t).collect();
            v.sort_unstable();
            v.dedup();
            v
        })
        .collect();
    let shares_edge = |a: usize, b: usize| {
        let (ta, tb) = (mesh.triangles[a], mesh.triangles[b]);
        ta.iter().filter(|i| tb.contains(i)).count() == 2
    };
    let dist = |a: usize, b: usize| (bary[a][0] - bary[b][0]).hypot(bary[a][1] - bary[b][1]);
    let jump = |a: usize, b: usize| (grads[a][0] - grads[b][0]).hypot(grads[a][1] - grads[b][1]);

    let mut out = Vec::with_capacity(specs.len());
    let sec = sector(mesh, g);
    for chunk in specs.chunks(4) {
        let k = chunk.len();
        let expo: Vec<(f64, f64)> = chunk.iter().map(|s| (s.p, 0.5 * (2.0 + s.order_gradient() * s.p))).collect();
        let far = tiled_sums::<4, _>(sec.len(), DEFAULT_TILE, |idx| {
            let t = sec[idx];
            let mut acc = [0.0; 4];
            let (gt, bt, at) = (grads[t], bary[t], areas[t]);
            let nb = &neighbours[t];
            let mut next_nb = 0;
            for u in 0..nt {
                if u == t {
                    continue;
                }
                if next_nb < nb.len() && nb[next_nb] == u {
                    next_nb += 1;
                    continue;
                }
                let (dx, dy) = (bt[0] - bary[u][0], bt[1] - bary[u][1]);
                let d2 = dx * dx + dy * dy;
                let j2 = (gt[0] - grads[u][0]).powi(2) + (gt[1] - grads[u][1]).powi(2);
                if j2 == 0.0 {
                    continue;
                }
                let w = at * areas[u];
                let ld = d2.ln();
                for (a, &(p, e)) in acc.iter_mut().zip(&expo) {
                    let jp = if p == 2.0 {
                        j2
                    } else if p == 4.0 {
                        j2 * j2
                    } else {
                        j2.powf(0.5 * p)
                    };
                    *a += w * jp * (-e * ld).exp();
                }
            }
            acc
        });
        for (i, spec) in chunk.iter().enumerate().take(k) {
            let (p, s) = (spec.p, spec.order_gradient());
            let a = p * (1.0 - s);
            let near: f64 = (0..nt)
                .map(|t| {
                    let edge_nb: Vec<usize> = neighbours[t].iter().copied().filter(|&u| shares_edge(t, u)).collect();
                    if edge_nb.is_empty() {
                        return 0.0;
                    }
                    let lp = edge_nb.iter().map(|&u| abs_pow(jump(t, u) / dist(t, u), p)).sum::<f64>() / edge_nb.len() as f64;
                    let patch = areas[t] + neighbours[t].iter().map(|&u| areas[u]).sum::<f64>();
                    let rho = (patch / PI).sqrt();
                    areas[t] * lp * TAU * rho.powf(a) / a
                })
                .sum();
            let far_total = far[i] * g as f64;
            out.push(GradSeminorm {
                p,
                epsilon: spec.epsilon,
                order: s,
                value: (near + far_total).powf(1.0 / p),
                near,
                far: far_total,
                symmetry: g,
            });
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// boundary diagnostics

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxSeminorm {
    pub value: f64,
    /// Set when `n_theta < 8 b_1`.
    pub under_resolved: bool,
}

fn resolves_first_term(boundary: &RadialBoundary, n: usize) -> bool {
    let params = boundary.params();
    if params.terms() == 0 {
        return true;
    }
    let e1 = params.exponent(1);
    e1 < 60 && n >= 8usize << e1
}

/// `W^{eps,p}` seminorm of `theta -> lambda(theta) ds/dtheta` on the boundary.
pub fn flux_seminorm(flux: &BoundaryFlux, spec: SeminormSpec, boundary: &RadialBoundary) -> Result<FluxSeminorm> {
    let n = flux.consistent.len();
    let dtheta = TAU / n as f64;
    let samples: Vec<f64> = flux.consistent.iter().zip(&flux.edge_length).map(|(l, h)| l * h / dtheta).collect();
    Ok(FluxSeminorm {
        value: gagliardo_1d(&samples, spec)?,
        under_resolved: !resolves_first_term(boundary, n),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceCertificate {
    /// `max |a f - b|` over boundary nodes.
    pub max_residual: f64,
    /// `max_residual * n_theta`.
    pub scaled_residual: f64,
    /// `(|a|, |b|)` per spec.
    pub seminorms: Vec<(f64, f64)>,
}

/// Tangential-case relation for the boundary gradient of a Dirichlet solution.
///
/// The gradient at boundary node `j` is the mean of the gradients on the two
/// boundary triangles adjacent to it.
pub fn trace_relation_certify(
    sol: &FemSolution,
    mesh: &TriMesh,
    boundary: &RadialBoundary,
    specs: &[SeminormSpec],
) -> Result<TraceCertificate> {
    if sol.bc != BoundaryCondition::Dirichlet {
        return Err(Error::WrongBoundaryCondition(
            "the tangential relation needs a Dirichlet solution".into(),
        ));
    }
    let nb = mesh.boundary_edges.len();
    let mut u1 = Vec::with_capacity(nb);
    let mut u2 = Vec::with_capacity(nb);
    for j in 0..nb {
        let (prev, cur) = (mesh.boundary_edges[(j + nb - 1) % nb].triangle, mesh.boundary_edges[j].triangle);
        u1.push(0.5 * (sol.gradients[prev][0] + sol.gradients[cur][0]));
        u2.push(0.5 * (sol.gradients[prev][1] + sol.gradients[cur][1]));
    }
    let pair = trace_relation_tangentialcase(&u1, &u2, boundary)?;
    let max_residual = pair.residual(boundary)?;
    let seminorms = specs
        .iter()
        .map(|&s| Ok((gagliardo_1d(&pair.a, s)?, gagliardo_1d(&pair.b, s)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TraceCertificate {
        max_residual,
        scaled_residual: max_residual * nb as f64,
        seminorms,
    })
}

/// Largest `|n x grad v|` over boundary nodes using the exact normal; zero
/// for a field that is exactly normal.
pub fn tangential_defect(u1: &[f64], u2: &[f64], boundary: &RadialBoundary) -> Result<f64> {
    let angles = crate::geometry::boundary_angles(u1.len() as u64)?;
    Ok(angles
        .iter()
        .zip(u1.iter().zip(u2))
        .map(|(&th, (&a, &b))| {
            let n = normal_at(th, boundary);
            (n.n1 * b - n.n2 * a).abs()
        })
        .fold(0.0, f64::max))
}

// ---------------------------------------------------------------------------
// sweep

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepCase {
    pub m: usize,
    pub n_theta: usize,
    pub n_r: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPlan {
    pub q: u32,
    pub gamma: f64,
    pub mode: Mode,
    pub cases: Vec<SweepCase>,
    pub specs: Vec<SeminormSpec>,
    /// Cases whose interior seminorm would need more kernel evaluations
    /// than this report it as absent.
    pub grad_pair_budget: f64,
}

impl SweepPlan {
    /// `M in {0, 1, 2}`, `n_theta in {256, 512, 1024}`, `n_r = n_theta / 8`, at
    /// `q = 2`: the smallest base whose first two frequencies (4 and 16) are
    /// resolved by all three meshes.
    pub fn default_plan() -> Self {
        let mut cases = Vec::new();
        for n_theta in [256, 512, 1024] {
            for m in 0..=2 {
                cases.push(SweepCase { m, n_theta, n_r: n_theta / 8 });
            }
        }
        SweepPlan {
            q: 2,
            gamma: GAMMA_REFERENCE,
            mode: Mode::Demo,
            cases,
            specs: DEFAULT_SPECS.iter().map(|&(p, e)| SeminormSpec { p, epsilon: e }).collect(),
            grad_pair_budget: 1.2e9,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.cases.is_empty() || self.specs.is_empty() {
            return Err(Error::param("plan", "needs at least one case and one spec"));
        }
        for s in &self.specs {
            SeminormSpec::new(s.p, s.epsilon)?;
        }
        for c in &self.cases {
            if !self.cases.iter().any(|k| k.m == 0 && k.n_theta == c.n_theta && k.n_r == c.n_r) {
                return Err(Error::param(
                    "plan",
                    format!("no M = 0 control at n_theta = {}, n_r = {}", c.n_theta, c.n_r),
                ));
            }
        }
        LacunaryParams::new(self.q, self.cases.iter().map(|c| c.m).max().unwrap_or(0), self.gamma, self.mode)?;
        Ok(())
    }

    pub fn params(&self, m: usize) -> Result<LacunaryParams> {
        LacunaryParams::new(self.q, m, self.gamma, self.mode)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecRow {
    pub p: f64,
    pub epsilon: f64,
    pub flux_seminorm: f64,
    pub grad_seminorm: Option<f64>,
    pub grad_near: Option<f64>,
    pub grad_far: Option<f64>,
    pub trace_a_seminorm: f64,
    pub trace_b_seminorm: f64,
    pub flux_growth: Option<f64>,
    pub grad_growth: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case: SweepCase,
    pub domain_area: f64,
    pub mesh_area: f64,
    pub min_angle_deg: f64,
    pub flux_under_resolved: bool,
    pub dirichlet: GreenReport,
    pub neumann: GreenReport,
    pub neumann_alpha_beta: [f64; 2],
    pub trace_residual: f64,
    pub trace_scaled_residual: f64,
    pub grad_symmetry: usize,
    pub specs: Vec<SpecRow>,
}

impl CaseReport {
    pub fn dirichlet_flux(&self) -> f64 {
        self.dirichlet.value
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvariantCheck {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupReport {
    pub q: u32,
    pub mode: Mode,
    pub gamma: f64,
    pub cases: Vec<CaseReport>,
    pub invariants: Vec<InvariantCheck>,
}

impl BlowupReport {
    pub fn all_pass(&self) -> bool {
        self.invariants.iter().all(|c| c.pass)
    }

    pub fn case(&self, m: usize, n_theta: usize) -> Option<&CaseReport> {
        self.cases.iter().find(|c| c.case.m == m && c.case.n_theta == n_theta)
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            "lacuna.blowup/1",
            &[
                "q", "m", "n_theta", "n_r", "p", "epsilon", "flux_seminorm", "flux_growth", "grad_seminorm",
                "grad_growth", "grad_near", "grad_far", "trace_a_seminorm", "trace_b_seminorm", "trace_residual",
                "dirichlet_flux", "domain_area", "neumann_identity", "neumann_target",
            ],
        );
        for c in &self.cases {
            for s in &c.specs {
                t.push(vec![
                    self.q.to_string(),
                    c.case.m.to_string(),
                    c.case.n_theta.to_string(),
                    c.case.n_r.to_string(),
                    num(s.p),
                    num(s.epsilon),
                    num(s.flux_seminorm),
                    opt(s.flux_growth),
                    opt(s.grad_seminorm),
                    opt(s.grad_growth),
                    opt(s.grad_near),
                    opt(s.grad_far),
                    num(s.trace_a_seminorm),
                    num(s.trace_b_seminorm),
                    num(c.trace_residual),
                    num(c.dirichlet.value),
                    num(c.domain_area),
                    num(c.neumann.value),
                    num(c.neumann.target),
                ]);
            }
        }
        t
    }
}

fn run_case(plan: &SweepPlan, case: SweepCase) -> Result<CaseReport> {
    let boundary = RadialBoundary::new(plan.params(case.m)?);
    let mesh = mesh_polar(&boundary, case.n_theta, case.n_r)?;
    let domain_area = area(&boundary, (case.n_theta as u64).max(1024) * 4)?.area;

    let dir = solve(&mesh, &RhsSpec::ConstantOne, BoundaryCondition::Dirichlet)?;
    let dir_flux = boundary_flux(&dir, &mesh)?;
    let dirichlet = green_checks(&dir, &mesh, &dir_flux)?;

    let nrhs = choose_neumann_rhs(&mesh);
    let neu = solve(&mesh, &nrhs.rhs, BoundaryCondition::Neumann)?;
    let neu_flux = boundary_flux(&neu, &mesh)?;
    let neumann = green_checks(&neu, &mesh, &neu_flux)?;
    let neumann_alpha_beta = match nrhs.rhs {
        RhsSpec::HarmonicQuadratic { alpha, beta } => [alpha, beta],
        _ => unreachable!("choose_neumann_rhs returns a harmonic quadratic"),
    };

    let cert = trace_relation_certify(&dir, &mesh, &boundary, &plan.specs)?;
    let interior: Vec<SeminormSpec> = plan.specs.iter().copied().filter(|s| s.order_gradient() < 1.0).collect();
    let grad_symmetry = gradient_symmetry(&mesh, &dir.gradients);
    let cost = grad_seminorm_cost(&mesh, &dir);
    let grads = if !interior.is_empty() && cost <= plan.grad_pair_budget {
        grad_seminorm_2d(&dir, &mesh, &interior)?
    } else {
        Vec::new()
    };

    let mut specs = Vec::with_capacity(plan.specs.len());
    let mut under = false;
    for (i, &s) in plan.specs.iter().enumerate() {
        let fs = flux_seminorm(&dir_flux, s, &boundary)?;
        under |= fs.under_resolved;
        let g = grads.iter().find(|g| g.p == s.p && g.epsilon == s.epsilon);
        specs.push(SpecRow {
            p: s.p,
            epsilon: s.epsilon,
            flux_seminorm: fs.value,
            grad_seminorm: g.map(|g| g.value),
            grad_near: g.map(|g| g.near),
            grad_far: g.map(|g| g.far),
            trace_a_seminorm: cert.seminorms[i].0,
            trace_b_seminorm: cert.seminorms[i].1,
            flux_growth: None,
            grad_growth: None,
        });
    }
    Ok(CaseReport {
        case,
        domain_area,
        mesh_area: mesh.total_area(),
        min_angle_deg: mesh.min_angle_deg(),
        flux_under_resolved: under,
        dirichlet,
        neumann,
        neumann_alpha_beta,
        trace_residual: cert.max_residual,
        trace_scaled_residual: cert.scaled_residual,
        grad_symmetry,
        specs,
    })
}

fn ratio(value: f64, control: f64) -> Option<f64> {
    (control > 0.0).then(|| value / control)
}

pub fn run_sweep(plan: &SweepPlan) -> Result<BlowupReport> {
    plan.validate()?;
    let mut cases = plan
        .cases
        .par_iter()
        .map(|&c| {
            run_case(plan, c).map_err(|e| Error::Case {
                terms: c.m,
                n_theta: c.n_theta,
                n_r: c.n_r,
                source: Box::new(e),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let controls: Vec<CaseReport> = cases.iter().filter(|c| c.case.m == 0).cloned().collect();
    for c in &mut cases {
        let ctrl = controls
            .iter()
            .find(|k| k.case.n_theta == c.case.n_theta && k.case.n_r == c.case.n_r)
            .expect("validated plan has matched controls");
        for (row, base) in c.specs.iter_mut().zip(&ctrl.specs) {
            row.flux_growth = ratio(row.flux_seminorm, base.flux_seminorm);
            row.grad_growth = match (row.grad_seminorm, base.grad_seminorm) {
                (Some(v), Some(b)) => ratio(v, b),
                _ => None,
            };
        }
    }
    let mut report = BlowupReport {
        q: plan.q,
        mode: plan.mode,
        gamma: plan.gamma,
        cases,
        invariants: Vec::new(),
    };
    report.invariants = check_invariants(&report);
    Ok(report)
}

fn resolutions(report: &BlowupReport) -> Vec<usize> {
    let mut r: Vec<usize> = report.cases.iter().map(|c| c.case.n_theta).collect();
    r.sort_unstable();
    r.dedup();
    r
}

fn orders(values: &[(usize, f64)]) -> Vec<f64> {
    values
        .windows(2)
        .map(|w| (w[0].1 / w[1].1).ln() / (w[1].0 as f64 / w[0].0 as f64).ln())
        .collect()
}

/// Observed orders of the trace residual between consecutive resolutions, per `M >= 1`.
pub fn trace_orders(report: &BlowupReport) -> Vec<(usize, Vec<f64>)> {
    let mut ms: Vec<usize> = report.cases.iter().map(|c| c.case.m).filter(|&m| m > 0).collect();
    ms.sort_unstable();
    ms.dedup();
    ms.into_iter()
        .map(|m| {
            let mut v: Vec<(usize, f64)> = report
                .cases
                .iter()
                .filter(|c| c.case.m == m)
                .map(|c| (c.case.n_theta, c.trace_residual))
                .collect();
            v.sort_by_key(|x| x.0);
            (m, orders(&v))
        })
        .collect()
}

pub fn check_invariants(report: &BlowupReport) -> Vec<InvariantCheck> {
    let mut out = Vec::new();
    let mut push = |name: &str, pass: bool, detail: String| {
        out.push(InvariantCheck {
            name: name.into(),
            pass,
            detail,
        })
    };
    let finite = report.cases.iter().all(|c| {
        c.specs.iter().all(|s| {
            [Some(s.flux_seminorm), s.grad_seminorm, Some(s.trace_a_seminorm), Some(s.trace_b_seminorm)]
                .iter()
                .flatten()
                .all(|v| v.is_finite() && *v >= 0.0)
        }) && c.trace_residual.is_finite()
    });
    push("finite_nonnegative", finite, String::new());

    let res = resolutions(report);
    if res.len() >= 2 {
        let (a, b) = (res[res.len() - 2], res[res.len() - 1]);
        if let (Some(ca), Some(cb)) = (report.case(0, a), report.case(0, b)) {
            let mut worst = String::new();
            let mut pass = true;
            let mut check = |what: String, x: f64, y: f64| {
                let ok = (x - y).abs() <= 0.1 * x.abs().max(y.abs()) + CONTROL_NOISE_FLOOR;
                if !ok {
                    pass = false;
                    worst = format!("{what}: {x} -> {y}");
                }
            };
            check("dirichlet_flux".into(), ca.dirichlet.value, cb.dirichlet.value);
            check("neumann_identity".into(), ca.neumann.value, cb.neumann.value);
            for (sa, sb) in ca.specs.iter().zip(&cb.specs) {
                check(format!("flux_seminorm[p={},eps={}]", sa.p, sa.epsilon), sa.flux_seminorm, sb.flux_seminorm);
                if let (Some(x), Some(y)) = (sa.grad_seminorm, sb.grad_seminorm) {
                    check(format!("grad_seminorm[p={},eps={}]", sa.p, sa.epsilon), x, y);
                }
            }
            push("control_flatness", pass, worst);
        }
    }

    let mut growth = true;
    let mut detail = String::new();
    for &n in &res {
        let mut col: Vec<(usize, f64)> = report
            .cases
            .iter()
            .filter(|c| c.case.n_theta == n)
            .filter_map(|c| {
                c.specs
                    .iter()
                    .find(|s| s.p == 2.0 && s.epsilon == 0.25)
                    .map(|s| (c.case.m, s.flux_seminorm))
            })
            .collect();
        col.sort_by_key(|x| x.0);
        if col.windows(2).any(|w| w[1].1 <= w[0].1) {
            growth = false;
            detail = format!("n_theta = {n}: {col:?}");
        }
    }
    push("flux_growth[p=2,eps=0.25]", growth, detail);

    let min_flux = report.cases.iter().map(|c| c.dirichlet.value).fold(f64::INFINITY, f64::min);
    push("nonvanishing_flux", min_flux >= 0.9 * PI, format!("min = {min_flux}"));

    let worst_green = report
        .cases
        .iter()
        .map(|c| ((c.dirichlet.value - c.domain_area) / c.domain_area).abs())
        .fold(0.0, f64::max);
    push("dirichlet_green", worst_green <= 0.05, format!("max rel. deviation = {worst_green}"));

    let ords = trace_orders(report);
    let trace_ok = ords.iter().all(|(_, o)| o.iter().all(|&x| x >= 0.9));
    push("trace_order", trace_ok, format!("{ords:?}"));
    out
}
