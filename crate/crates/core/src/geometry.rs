//! The planar domain `r < F(theta)`, its normals and trace relations, and the
//! two families of higher-dimensional domains built on it.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::angle::{RationalAngle, DEFAULT_GRID};
use crate::error::{Error, Result};
use crate::io::{num, CsvTable};
use crate::lacunary::{eval_f, eval_radius, LacunaryParams, Mode};
use crate::reduce::par_max;

/// Floating-point allowance added to every membership band.
const MEMBERSHIP_EPS: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialBoundary {
    params: LacunaryParams,
}

impl RadialBoundary {
    pub fn new(params: LacunaryParams) -> Self {
        RadialBoundary { params }
    }

    pub fn params(&self) -> &LacunaryParams {
        &self.params
    }

    /// `F(theta)`.
    pub fn radius(&self, theta: RationalAngle) -> f64 {
        eval_radius(theta, &self.params)
    }

    /// `f(theta) = F'(theta)` for the truncated series.
    pub fn derivative(&self, theta: RationalAngle) -> f64 {
        eval_f(theta, &self.params)
    }

    /// `ds/dtheta = sqrt(F^2 + f^2)`.
    pub fn arclength_element(&self, theta: RationalAngle) -> f64 {
        self.radius(theta).hypot(self.derivative(theta))
    }

    /// Upper bound for `|f|`, and hence the Lipschitz constant of `F`.
    pub fn slope_bound(&self) -> f64 {
        self.params.amplitude_sum()
    }

    /// Check `1/2 < F < 3/2` on `n` uniform angles.
    pub fn validate(&self, n: u64) -> Result<()> {
        for j in 0..n {
            let theta = RationalAngle::new(j, n)?;
            let r = self.radius(theta);
            if !(r > 0.5 && r < 1.5) {
                return Err(Error::param(
                    "boundary",
                    format!("F({j}/{n} turns) = {r} leaves (1/2, 3/2)"),
                ));
            }
        }
        Ok(())
    }

    /// Tristate membership of `(x1, x2)` in `r < F(theta)`.
    pub fn contains(&self, x1: f64, x2: f64) -> Result<Membership> {
        self.contains_scaled(x1, x2, 1.0)
    }

    /// Membership in `scale * omega` for `scale > 0`.
    fn contains_scaled(&self, x1: f64, x2: f64, scale: f64) -> Result<Membership> {
        let r = x1.hypot(x2);
        if !r.is_finite() {
            return Err(Error::param("point", "coordinates must be finite"));
        }
        let (theta, snap) = RationalAngle::snap(x2.atan2(x1), DEFAULT_GRID)?;
        let edge = scale * self.radius(theta);
        let band = scale * self.slope_bound() * snap + MEMBERSHIP_EPS;
        Ok(Membership::classify(edge - r, band))
    }

    /// `n` boundary points `(theta, x1, x2)` at `theta = 2*pi*j/n`.
    pub fn polyline_csv(&self, n: u64) -> Result<CsvTable> {
        let mut t = CsvTable::new("lacuna.boundary/1", &["theta", "x1", "x2"]);
        for j in 0..n {
            let theta = RationalAngle::new(j, n)?;
            let (s, c) = theta.radians().sin_cos();
            let r = self.radius(theta);
            t.push(vec![num(theta.radians()), num(r * c), num(r * s)]);
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Membership {
    Inside,
    Outside,
    /// Within the snap and rounding tolerance of the boundary.
    Indeterminate,
}

impl Membership {
    /// Classify from the signed gap `edge - r` and its uncertainty.
    fn classify(gap: f64, band: f64) -> Self {
        if gap > band {
            Membership::Inside
        } else if gap < -band {
            Membership::Outside
        } else {
            Membership::Indeterminate
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Membership::Inside => "inside",
            Membership::Outside => "outside",
            Membership::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalVector {
    pub n1: f64,
    pub n2: f64,
}

impl NormalVector {
    pub fn dot(&self, v1: f64, v2: f64) -> f64 {
        self.n1 * v1 + self.n2 * v2
    }
}

/// Outward unit normal of `r = F(theta)`.
pub fn normal_at(theta: RationalAngle, boundary: &RadialBoundary) -> NormalVector {
    let big = boundary.radius(theta);
    let f = boundary.derivative(theta);
    let (s, c) = theta.radians().sin_cos();
    let norm = big.hypot(f);
    NormalVector {
        n1: (big * c + f * s) / norm,
        n2: (big * s - f * c) / norm,
    }
}

/// Tangent `d/dtheta (F cos, F sin)`, not normalized.
pub fn tangent_at(theta: RationalAngle, boundary: &RadialBoundary) -> (f64, f64) {
    let big = boundary.radius(theta);
    let f = boundary.derivative(theta);
    let (s, c) = theta.radians().sin_cos();
    (f * c - big * s, f * s + big * c)
}

/// Boundary samples of a coefficient pair on the uniform grid `j/n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePair {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl TracePair {
    /// `max_j |a_j f(theta_j) - b_j|`.
    pub fn residual(&self, boundary: &RadialBoundary) -> Result<f64> {
        crate::separation::separation_residual(&self.a, &self.b, boundary.params())
    }
}

fn trace_relation(
    u1: &[f64],
    u2: &[f64],
    boundary: &RadialBoundary,
    rule: impl Fn(f64, f64, f64, f64, f64) -> (f64, f64),
) -> Result<TracePair> {
    if u1.len() != u2.len() {
        return Err(Error::LengthMismatch {
            left: u1.len(),
            right: u2.len(),
        });
    }
    let n = u1.len() as u64;
    let mut a = Vec::with_capacity(u1.len());
    let mut b = Vec::with_capacity(u1.len());
    for (j, (&v1, &v2)) in u1.iter().zip(u2).enumerate() {
        let theta = RationalAngle::new(j as u64, n)?;
        let (s, c) = theta.radians().sin_cos();
        let (aj, bj) = rule(v1, v2, c, s, boundary.radius(theta));
        a.push(aj);
        b.push(bj);
    }
    Ok(TracePair { a, b })
}

/// `a = u2 cos - u1 sin`, `b = (u1 cos + u2 sin) F`.
///
/// `a f - b = -sqrt(F^2 + f^2) (n . u)`, so a vanishing normal trace gives `a f = b`.
pub fn trace_relation_normalcase(
    u1: &[f64],
    u2: &[f64],
    boundary: &RadialBoundary,
) -> Result<TracePair> {
    trace_relation(u1, u2, boundary, |v1, v2, c, s, big| {
        (v2 * c - v1 * s, (v1 * c + v2 * s) * big)
    })
}

/// `a = u1 cos + u2 sin`, `b = -F (u2 cos - u1 sin)`.
///
/// `a f - b = sqrt(F^2 + f^2) (n1 u2 - n2 u1)`, so a vanishing tangential
/// trace gives `a f = b`.
pub fn trace_relation_tangentialcase(
    u1: &[f64],
    u2: &[f64],
    boundary: &RadialBoundary,
) -> Result<TracePair> {
    trace_relation(u1, u2, boundary, |v1, v2, c, s, big| {
        (v1 * c + v2 * s, -big * (v2 * c - v1 * s))
    })
}

// ---------------------------------------------------------------------------
// cutoffs

/// `P(s) = 6 s^3 - 8 s^4 + 3 s^5`: `P(0) = 0`, `P(1) = 1`, `P'(0) = P''(0) = 0`,
/// `P'(1) = 1`, `P''(1) = 0`, and `P' > 0` on `(0, 1]`.
fn blend(s: f64) -> [f64; 3] {
    let s2 = s * s;
    [
        s2 * s * (6.0 - 8.0 * s + 3.0 * s2),
        s2 * (18.0 - 32.0 * s + 15.0 * s2),
        s * (36.0 - 96.0 * s + 60.0 * s2),
    ]
}

/// `S(s) = 35 s^4 - 84 s^5 + 70 s^6 - 20 s^7`, flat to third order at both ends.
fn smoothstep(s: f64) -> [f64; 3] {
    let s2 = s * s;
    let s3 = s2 * s;
    [
        s2 * s2 * (35.0 - 84.0 * s + 70.0 * s2 - 20.0 * s3),
        s3 * (140.0 - 420.0 * s + 420.0 * s2 - 140.0 * s3),
        s2 * (420.0 - 1680.0 * s + 2100.0 * s2 - 840.0 * s3),
    ]
}

/// The profile `mu` and the bump `chi`.
///
/// `mu = 1` on `[0, 1]`, a quintic blend down to `mu(4) = -1`, then linear
/// with slope `-2/3`. It is C^2 and strictly decreasing on `(1, inf)`.
/// `chi = 1` on `[0, 1/2]` and `0` on `[1, inf)`, joined by a degree-7
/// smoothstep (C^3).
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct CutoffPair;

impl CutoffPair {
    /// `(mu, mu', mu'')` at `t >= 0`.
    pub fn mu_jet(&self, t: f64) -> [f64; 3] {
        if t <= 1.0 {
            [1.0, 0.0, 0.0]
        } else if t <= 4.0 {
            let [p, dp, ddp] = blend((t - 1.0) / 3.0);
            [1.0 - 2.0 * p, -2.0 * dp / 3.0, -2.0 * ddp / 9.0]
        } else {
            [-1.0 - 2.0 * (t - 4.0) / 3.0, -2.0 / 3.0, 0.0]
        }
    }

    pub fn mu(&self, t: f64) -> f64 {
        self.mu_jet(t)[0]
    }

    /// `(chi, chi', chi'')` at `t >= 0`.
    pub fn chi_jet(&self, t: f64) -> [f64; 3] {
        if t <= 0.5 {
            [1.0, 0.0, 0.0]
        } else if t < 1.0 {
            let [s, ds, dds] = smoothstep(2.0 * t - 1.0);
            [1.0 - s, -2.0 * ds, -4.0 * dds]
        } else {
            [0.0, 0.0, 0.0]
        }
    }

    pub fn chi(&self, t: f64) -> f64 {
        self.chi_jet(t)[0]
    }

    /// Laplacian in `z in R^(d-2)` of `chi(|z|)`: `chi'' + (d-3)/|z| chi'`.
    pub fn laplacian_chi(&self, rho: f64, dim: usize) -> f64 {
        let [_, d1, d2] = self.chi_jet(rho);
        if d1 == 0.0 {
            return d2;
        }
        d2 + (dim as f64 - 3.0) / rho * d1
    }

    /// Plateaus, signs, supports and continuity of second derivatives,
    /// checked on a grid of spacing `h` over `[0, 6]`.
    pub fn validate(&self, h: f64) -> Result<()> {
        let fail = |what: String| Err(Error::CutoffInvariant(what));
        let n = (6.0 / h).ceil() as usize;
        for i in 0..=n {
            let t = i as f64 * h;
            let [m, dm, _] = self.mu_jet(t);
            if t <= 1.0 && m != 1.0 {
                return fail(format!("mu({t}) = {m}, expected 1"));
            }
            if t >= 4.0 && m > 0.0 {
                return fail(format!("mu({t}) = {m} > 0"));
            }
            if t >= 2.0 && dm >= 0.0 {
                return fail(format!("mu'({t}) = {dm} is not negative"));
            }
            let c = self.chi(t);
            if t < 0.5 && c != 1.0 {
                return fail(format!("chi({t}) = {c}, expected 1"));
            }
            if t >= 1.0 && c != 0.0 {
                return fail(format!("chi({t}) = {c}, expected 0"));
            }
        }
        // Second differences against the analytic second derivative, at and
        // around the knots.
        let step = 1e-4;
        let mut probes: Vec<f64> = (0..=n).map(|i| i as f64 * h + 0.5 * step).collect();
        probes.extend([0.5, 1.0, 4.0]);
        for t in probes {
            if t < step {
                continue;
            }
            for (name, jet) in [
                ("mu", &(|x| self.mu_jet(x)) as &dyn Fn(f64) -> [f64; 3]),
                ("chi", &|x| self.chi_jet(x)),
            ] {
                let fd = (jet(t + step)[0] - 2.0 * jet(t)[0] + jet(t - step)[0]) / (step * step);
                let an = jet(t)[2];
                if (fd - an).abs() > 1e-2 * (1.0 + an.abs()) {
                    return fail(format!("{name}'' at {t}: difference quotient {fd}, formula {an}"));
                }
                // a continuous second derivative has a jump that shrinks with the step
                let jump = (jet(t + step)[2] - jet(t - step)[2]).abs();
                let wide = (jet(t + 10.0 * step)[2] - jet(t - 10.0 * step)[2]).abs();
                if jump > 0.2 * wide + 1e-9 {
                    return fail(format!("{name}'' jumps by {jump} at {t}"));
                }
            }
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// higher-dimensional domains

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    /// `r^2 / F(theta)^2 + |z|^2 < 1`.
    Ellipsoidal,
    /// `r^2 < mu(|z|^2) F(theta)^2`.
    Cylindrical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Domain3d {
    pub variant: Variant,
    pub boundary: RadialBoundary,
    pub cutoffs: CutoffPair,
    /// Ambient dimension `d >= 3`; points are `(x1, x2, z)` with `z in R^(d-2)`.
    pub dim: usize,
}

impl Domain3d {
    pub fn new(variant: Variant, boundary: RadialBoundary, dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(Error::param("dim", format!("must be >= 3, got {dim}")));
        }
        Ok(Domain3d {
            variant,
            boundary,
            cutoffs: CutoffPair,
            dim,
        })
    }

    /// The factor `c(|z|)` with section `c * omega` at height `z`, if positive.
    pub fn section_scale(&self, z_norm_sq: f64) -> Option<f64> {
        let s = match self.variant {
            Variant::Ellipsoidal => 1.0 - z_norm_sq,
            Variant::Cylindrical => self.cutoffs.mu(z_norm_sq),
        };
        (s > 0.0).then(|| s.sqrt())
    }

    pub fn contains(&self, point: &[f64]) -> Result<Membership> {
        if point.len() != self.dim {
            return Err(Error::LengthMismatch {
                left: point.len(),
                right: self.dim,
            });
        }
        let z2: f64 = point[2..].iter().map(|z| z * z).sum();
        match self.section_scale(z2) {
            Some(scale) => self.boundary.contains_scaled(point[0], point[1], scale),
            None => Ok(Membership::Outside),
        }
    }

    pub fn classify(&self, points: &[Vec<f64>]) -> Result<Vec<Membership>> {
        points.par_iter().map(|p| self.contains(p)).collect()
    }

    /// Point cloud `(x1, x2, z1.., inside)`.
    pub fn point_cloud_csv(&self, points: &[Vec<f64>]) -> Result<CsvTable> {
        let flags = self.classify(points)?;
        let mut cols = vec!["x1".to_string(), "x2".to_string()];
        cols.extend((1..=self.dim - 2).map(|i| format!("z{i}")));
        cols.push("inside".into());
        let col_refs: Vec<&str> = cols.iter().map(|s| s.as_str()).collect();
        let mut t = CsvTable::new("lacuna.point_cloud/1", &col_refs);
        for (p, m) in points.iter().zip(flags) {
            let mut row: Vec<String> = p.iter().map(|&v| num(v)).collect();
            row.push(m.as_str().into());
            t.push(row);
        }
        Ok(t)
    }
}

/// Uniform grid over a square `[-half, half]^2` and radial `|z|` values in `[0, z_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionGrid {
    pub nx: usize,
    pub half_width: f64,
    pub nz: usize,
    pub z_max: f64,
}

impl ExtensionGrid {
    pub fn hx(&self) -> f64 {
        2.0 * self.half_width / (self.nx - 1) as f64
    }

    pub fn hz(&self) -> f64 {
        self.z_max / (self.nz - 1) as f64
    }

    pub fn x(&self, i: usize) -> f64 {
        -self.half_width + i as f64 * self.hx()
    }

    pub fn z(&self, k: usize) -> f64 {
        k as f64 * self.hz()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionResidual {
    /// `max |Delta_h v - g|` over interior nodes.
    pub max_residual: f64,
    /// The same maximum over nodes whose `z`-stencil lies in `|z| <= 1/2`, where `chi = 1`.
    pub plateau_residual: f64,
    /// `max |v| + |g|` over nodes with `|z| >= 1`.
    pub support_residual: f64,
}

/// Discrete check of `Delta v = g` for `v = v0(x) chi(|z|)` and
/// `g = g0 chi + v0 Delta_z chi`.
///
/// `v0`, `g0` hold samples on the `nx * nx` grid (row-major in `x2`), and
/// `mask` marks the nodes of `omega`. The Laplacian is the 5-point stencil in
/// `x` plus the radial stencil `v'' + (d-3)/rho v'` in `|z|`, applied where
/// all `x`-neighbours are in the mask and `rho > 0`.
pub fn extension_identity_check(
    grid: ExtensionGrid,
    v0: &[f64],
    g0: &[f64],
    mask: &[bool],
    cutoffs: &CutoffPair,
    dim: usize,
) -> Result<ExtensionResidual> {
    let nn = grid.nx * grid.nx;
    for len in [v0.len(), g0.len(), mask.len()] {
        if len != nn {
            return Err(Error::LengthMismatch { left: len, right: nn });
        }
    }
    if grid.nx < 3 || grid.nz < 3 || dim < 3 {
        return Err(Error::param("grid", "need nx, nz >= 3 and d >= 3"));
    }
    cutoffs.validate(1e-2)?;
    let (hx, hz) = (grid.hx(), grid.hz());
    let nx = grid.nx;
    let interior: Vec<usize> = (0..nn)
        .filter(|&idx| {
            let (i, j) = (idx % nx, idx / nx);
            i > 0
                && j > 0
                && i + 1 < nx
                && j + 1 < nx
                && [idx, idx - 1, idx + 1, idx - nx, idx + nx].iter().all(|&k| mask[k])
        })
        .collect();
    let lap_x: Vec<f64> = interior
        .iter()
        .map(|&idx| (v0[idx - 1] + v0[idx + 1] + v0[idx - nx] + v0[idx + nx] - 4.0 * v0[idx]) / (hx * hx))
        .collect();
    let dm3 = dim as f64 - 3.0;
    let chi: Vec<f64> = (0..grid.nz).map(|k| cutoffs.chi(grid.z(k))).collect();

    let residual_at = |k: usize| -> f64 {
        let rho = grid.z(k);
        let c = chi[k];
        let lap_chi_h = (chi[k + 1] - 2.0 * c + chi[k - 1]) / (hz * hz)
            + dm3 / rho * (chi[k + 1] - chi[k - 1]) / (2.0 * hz);
        let lap_chi = cutoffs.laplacian_chi(rho, dim);
        interior
            .iter()
            .zip(&lap_x)
            .map(|(&idx, &lx)| {
                let lap_v = lx * c + v0[idx] * lap_chi_h;
                let g = g0[idx] * c + v0[idx] * lap_chi;
                (lap_v - g).abs()
            })
            .fold(0.0, f64::max)
    };
    let ks: Vec<usize> = (1..grid.nz - 1).collect();
    let max_residual = par_max(ks.len(), |i| residual_at(ks[i])).max(0.0);
    let plateau: Vec<usize> = ks.iter().copied().filter(|&k| grid.z(k + 1) <= 0.5).collect();
    let plateau_residual = par_max(plateau.len(), |i| residual_at(plateau[i])).max(0.0);
    let mut support_residual: f64 = 0.0;
    for k in (0..grid.nz).filter(|&k| grid.z(k) >= 1.0) {
        let rho = grid.z(k);
        let (c, lc) = (cutoffs.chi(rho), cutoffs.laplacian_chi(rho, dim));
        for idx in 0..nn {
            support_residual = support_residual.max((v0[idx] * c).abs() + (g0[idx] * c + v0[idx] * lc).abs());
        }
    }
    Ok(ExtensionResidual {
        max_residual,
        plateau_residual,
        support_residual,
    })
}

// ---------------------------------------------------------------------------
// area

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub area: f64,
    pub n: u64,
    /// Relative change from the rule on `n/2` points.
    pub rel_change: f64,
    /// Set when `n < 64 b_1`, which leaves the first oscillation unresolved.
    pub under_resolved: bool,
}

fn area_rule(boundary: &RadialBoundary, n: u64) -> Result<f64> {
    let mut s = 0.0;
    for j in 0..n {
        let r = boundary.radius(RationalAngle::new(j, n)?);
        s += r * r;
    }
    Ok(PI * s / n as f64)
}

/// `|omega| = 1/2 int F^2 dtheta` by the periodic trapezoid rule on `n` points.
pub fn area(boundary: &RadialBoundary, n: u64) -> Result<AreaEstimate> {
    if n < 4 {
        return Err(Error::param("n", "need at least 4 points"));
    }
    let a = area_rule(boundary, n)?;
    let coarse = area_rule(boundary, n / 2)?;
    let params = boundary.params();
    let under_resolved = params.terms() > 0 && {
        let e1 = params.exponent(1);
        e1 >= 58 || n < 64u64 << e1
    };
    Ok(AreaEstimate {
        area: a,
        n,
        rel_change: ((a - coarse) / a).abs(),
        under_resolved,
    })
}

/// `pi (1 + sum c_k)^2 + (pi/2) sum c_k^2` with `c_k = a_k / b_k`.
pub fn area_closed_form(params: &LacunaryParams) -> f64 {
    let c: Vec<f64> = (1..=params.terms()).map(|k| params.radial_amplitude(k)).collect();
    let s: f64 = c.iter().sum();
    let s2: f64 = c.iter().map(|x| x * x).sum();
    PI * (1.0 + s) * (1.0 + s) + 0.5 * PI * s2
}

/// Upper bound of `F - 1` used for the strict-mode sanity bound on the area.
pub fn strict_area_bound(params: &LacunaryParams) -> Option<f64> {
    (params.mode() == Mode::Strict).then(|| {
        let e = crate::lacunary::radius_excess_bound(params.q());
        PI * ((1.0 + e) * (1.0 + e) - 1.0)
    })
}

/// Uniform angles as turns, for callers that sample fields on the boundary.
pub fn boundary_angles(n: u64) -> Result<Vec<RationalAngle>> {
    (0..n).map(|j| RationalAngle::new(j, n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lacunary::GAMMA_REFERENCE;

    fn boundary(q: u32, m: usize) -> RadialBoundary {
        RadialBoundary::new(LacunaryParams::demo(q, m, GAMMA_REFERENCE).unwrap())
    }

    fn radius_f64(theta: f64, q: u32, m: usize) -> f64 {
        let mut r = 1.0;
        for k in 1..=m {
            let b = 2f64.powi(q.pow(k as u32) as i32);
            r += (q as f64).powi(-(k as i32)) * (1.0 - (b * theta).cos()) / b;
        }
        r
    }

    #[test]
    fn disk_normal_is_radial() {
        let b = boundary(7, 0);
        for j in 0..32 {
            let th = RationalAngle::new(j, 32).unwrap();
            let n = normal_at(th, &b);
            let (s, c) = th.radians().sin_cos();
            assert!((n.n1 - c).abs() < 1e-15 && (n.n2 - s).abs() < 1e-15);
        }
    }

    #[test]
    fn normal_matches_finite_difference() {
        let b = boundary(7, 1);
        let th = RationalAngle::new(1, 8).unwrap();
        let t = th.radians();
        let step = 1e-6;
        let pt = |x: f64| {
            let r = radius_f64(x, 7, 1);
            (r * x.cos(), r * x.sin())
        };
        let (p0, p1) = (pt(t - step), pt(t + step));
        let (tx, ty) = (p1.0 - p0.0, p1.1 - p0.1);
        let len = tx.hypot(ty);
        let (n1, n2) = (ty / len, -tx / len);
        let n = normal_at(th, &b);
        assert!((n.n1 - n1).abs() < 1e-5 && (n.n2 - n2).abs() < 1e-5);
    }

    #[test]
    fn normal_is_unit_and_orthogonal() {
        for (q, m) in [(2, 3), (7, 2), (3, 2)] {
            let b = boundary(q, m);
            for j in 0..997u64 {
                let th = RationalAngle::new(j, 997).unwrap();
                let n = normal_at(th, &b);
                let (t1, t2) = tangent_at(th, &b);
                assert!((n.n1.hypot(n.n2) - 1.0).abs() < 1e-12);
                assert!(n.dot(t1, t2).abs() < 1e-12 * t1.hypot(t2));
                let (s, c) = th.radians().sin_cos();
                assert!(n.dot(c, s) > 0.0);
            }
        }
    }

    fn fields(b: &RadialBoundary, n: u64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mut n1 = vec![];
        let mut n2 = vec![];
        let mut ds = vec![];
        for th in boundary_angles(n).unwrap() {
            let nv = normal_at(th, b);
            n1.push(nv.n1);
            n2.push(nv.n2);
            ds.push(b.arclength_element(th));
        }
        (n1, n2, ds)
    }

    #[test]
    fn trace_relations() {
        let b = boundary(2, 3);
        let n = 512;
        let (n1, n2, ds) = fields(&b, n);
        let t1: Vec<f64> = n2.iter().map(|v| -v).collect();
        let t2 = n1.clone();
        let zero = vec![0.0; n as usize];
        // tangent field satisfies the normal condition
        assert!(trace_relation_normalcase(&t1, &t2, &b).unwrap().residual(&b).unwrap() < 1e-12);
        // normal field: a f - b = -ds
        let p = trace_relation_normalcase(&n1, &n2, &b).unwrap();
        let f: Vec<f64> = boundary_angles(n).unwrap().iter().map(|&t| b.derivative(t)).collect();
        for j in 0..n as usize {
            assert!((p.a[j] * f[j] - p.b[j] + ds[j]).abs() < 1e-12);
        }
        // scaled normal field satisfies the tangential condition
        let l1: Vec<f64> = n1.iter().map(|v| 3.0 * v).collect();
        let l2: Vec<f64> = n2.iter().map(|v| 3.0 * v).collect();
        assert!(trace_relation_tangentialcase(&l1, &l2, &b).unwrap().residual(&b).unwrap() < 1e-12);
        let p = trace_relation_tangentialcase(&t1, &t2, &b).unwrap();
        for j in 0..n as usize {
            assert!((p.a[j] * f[j] - p.b[j] - ds[j]).abs() < 1e-12);
        }
        let p = trace_relation_normalcase(&zero, &zero, &b).unwrap();
        assert!(p.a.iter().chain(&p.b).all(|&v| v == 0.0));
        assert!(trace_relation_normalcase(&zero, &zero[1..], &b).is_err());
    }

    #[test]
    fn disk_tangential_with_normal_field() {
        let b = boundary(7, 0);
        let (n1, n2, _) = fields(&b, 64);
        let p = trace_relation_tangentialcase(&n1, &n2, &b).unwrap();
        for j in 0..64 {
            assert!((p.a[j] - 1.0).abs() < 1e-15 && p.b[j].abs() < 1e-15);
        }
    }

    #[test]
    fn cutoffs_hold_invariants() {
        let c = CutoffPair;
        c.validate(1e-3).unwrap();
        assert_eq!(c.mu(4.0), -1.0);
        assert_eq!(c.chi(0.5), 1.0);
        assert_eq!(c.chi(1.0), 0.0);
        assert_eq!(c.laplacian_chi(0.3, 5), 0.0);
    }

    #[test]
    fn membership_basics() {
        let b = boundary(7, 1);
        assert_eq!(b.contains(0.0, 0.0).unwrap(), Membership::Inside);
        assert_eq!(b.contains(0.99, 0.0).unwrap(), Membership::Inside);
        assert_eq!(b.contains(1.6, 0.1).unwrap(), Membership::Outside);
        assert_eq!(b.contains(1.0, 0.0).unwrap(), Membership::Indeterminate);
        let cyl = Domain3d::new(Variant::Cylindrical, b.clone(), 3).unwrap();
        assert_eq!(cyl.contains(&[0.0, 0.0, 1.5]).unwrap(), Membership::Inside);
        assert_eq!(cyl.contains(&[0.0, 0.0, 2.0]).unwrap(), Membership::Outside);
        assert!(cyl.contains(&[0.0, 0.0]).is_err());
        assert!(Domain3d::new(Variant::Ellipsoidal, b, 2).is_err());
    }

    #[test]
    fn area_cases() {
        let disk = area(&boundary(7, 0), 64).unwrap();
        assert!((disk.area - PI).abs() < 1e-14);
        let b = boundary(2, 2);
        let est = area(&b, 4096).unwrap();
        let exact = area_closed_form(b.params());
        assert!(((est.area - exact) / exact).abs() < 1e-13);
        assert!(!est.under_resolved);
        assert!(area(&b, 128).unwrap().under_resolved);
    }

    #[test]
    fn extension_plateau_and_support() {
        let grid = ExtensionGrid {
            nx: 41,
            half_width: 1.0,
            nz: 61,
            z_max: 1.5,
        };
        let v0: Vec<f64> = (0..41 * 41)
            .map(|idx| {
                let (x, y) = (grid.x(idx % 41), grid.x(idx / 41));
                x * x + y * y
            })
            .collect();
        let g0 = vec![4.0; v0.len()];
        let mask = vec![true; v0.len()];
        let r = extension_identity_check(grid, &v0, &g0, &mask, &CutoffPair, 3).unwrap();
        assert!(r.plateau_residual < 1e-11);
        assert_eq!(r.support_residual, 0.0);
        assert!(r.max_residual > r.plateau_residual);
    }
}
