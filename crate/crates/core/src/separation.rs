//! Fractional seminorm integrals of the lacunary series.
//!
//! The central quantity is the contribution of the dyadic interval
//! `I_m = [1/b_m, 2/b_m]` to `int |f(x+h) - f(x)|^p h^-(1+p eps) dh`. It is
//! always computed in the rescaled variable `t = b_m h`, because the
//! `h`-interval is narrower than `2^-49` already for `q = 7`.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, TAU};

use crate::angle::{centered_turns, mulmod, pow2_mod, sin_cos_turns, RationalAngle};
use crate::error::{Error, Result};
use crate::io::{num, CsvTable};
use crate::lacunary::{eval_f, LacunaryParams};
use crate::logmag::LogMagnitude;
use crate::quadrature::GaussLegendre;
use crate::reduce::{tiled_sum, DEFAULT_TILE};

/// Odd prime modulus for quadrature nodes; 2 is a primitive root, so the
/// shifts `2^E t` of the higher terms do not alias onto a short cycle.
pub const NODE_MODULUS: u64 = 999_999_999_999_999_989;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormSpec {
    pub p: f64,
    pub epsilon: f64,
}

impl SeminormSpec {
    pub fn new(p: f64, epsilon: f64) -> Result<Self> {
        if !(p >= 1.0 && p.is_finite()) {
            return Err(Error::param("p", format!("must be >= 1, got {p}")));
        }
        if !(epsilon > 0.0 && epsilon < 1.0) {
            return Err(Error::param("epsilon", format!("must lie in (0, 1), got {epsilon}")));
        }
        Ok(SeminormSpec { p, epsilon })
    }

    /// Smoothness order measured on a boundary curve.
    pub fn order_1d(&self) -> f64 {
        self.epsilon
    }

    /// Order `1/p + eps` at which the gradient of a solution is measured.
    pub fn order_gradient(&self) -> f64 {
        1.0 / self.p + self.epsilon
    }
}

impl Default for SeminormSpec {
    fn default() -> Self {
        SeminormSpec {
            p: 2.0,
            epsilon: 0.25,
        }
    }
}

#[inline]
pub(crate) fn abs_pow(x: f64, p: f64) -> f64 {
    let a = x.abs();
    if p == 1.0 {
        a
    } else if p == 2.0 {
        a * a
    } else if p == 4.0 {
        let s = a * a;
        s * s
    } else {
        a.powf(p)
    }
}

/// Composite Gauss-Legendre rule on `t in [1, 2]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct IntervalQuadrature {
    pub panels: usize,
    pub points: usize,
}

impl Default for IntervalQuadrature {
    fn default() -> Self {
        IntervalQuadrature {
            panels: 64,
            points: 16,
        }
    }
}

impl IntervalQuadrature {
    pub fn doubled(&self) -> Self {
        IntervalQuadrature {
            panels: self.panels * 2,
            points: self.points,
        }
    }

    /// Nodes snapped to `2*pi*R/D` with `D = NODE_MODULUS`, paired with their weights.
    fn nodes(&self) -> Vec<(u64, f64, f64)> {
        GaussLegendre::new(self.points)
            .composite(1.0, 2.0, self.panels)
            .into_iter()
            .map(|(t, w)| {
                let r = (t / TAU * NODE_MODULUS as f64).round() as u64;
                let t_exact = TAU * (r as f64 / NODE_MODULUS as f64);
                (r, t_exact, w)
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub m: usize,
    pub p: f64,
    pub epsilon: f64,
    /// `log2 int_{I_m} |f(x+h) - f(x)|^p h^-(1+p eps) dh`.
    pub value_log2: f64,
    /// `log2 (gamma^p a_m^p b_m^(p eps))`.
    pub lower_bound_log2: f64,
    /// The integral divided by `a_m^p b_m^(p eps)`.
    pub normalized: f64,
    /// `J_1 / (a_m b_m^eps)`: contribution of the `m`-th term alone.
    pub j1: f64,
    /// Minkowski sum over `k < m`, normalized like `j1`.
    pub j2_below: f64,
    /// Minkowski sum over `m < k <= M`, normalized like `j1`.
    pub j2_above: f64,
    pub pass: bool,
}

impl IntervalEstimate {
    pub fn value(&self) -> LogMagnitude {
        LogMagnitude::from_log2(self.value_log2)
    }

    pub fn lower_bound(&self) -> LogMagnitude {
        LogMagnitude::from_log2(self.lower_bound_log2)
    }
}

pub fn interval_integral(
    x: RationalAngle,
    m: usize,
    spec: SeminormSpec,
    params: &LacunaryParams,
) -> Result<IntervalEstimate> {
    interval_integral_with(x, m, spec, params, IntervalQuadrature::default())
}

pub fn interval_integral_with(
    x: RationalAngle,
    m: usize,
    spec: SeminormSpec,
    params: &LacunaryParams,
    quad: IntervalQuadrature,
) -> Result<IntervalEstimate> {
    let terms = params.terms();
    if m == 0 || m > terms {
        return Err(Error::TermAbsent { m, terms });
    }
    let (p, eps) = (spec.p, spec.epsilon);
    let q = params.q() as f64;
    let e_m = params.exponent(m);

    struct Term {
        weight: f64,
        base_turns: f64,
        base_sin: f64,
        kind: Shift,
    }
    enum Shift {
        Below(f64), // radians per unit t
        Same,
        Above(u64), // 2^(e_k - e_m) mod D
    }
    let term_data: Vec<Term> = (1..=terms)
        .map(|k| {
            let e_k = params.exponent(k);
            let base_turns = centered_turns(x.dyadic_multiple(e_k), x.denominator());
            let kind = match k.cmp(&m) {
                std::cmp::Ordering::Less => Shift::Below((-((e_m - e_k) as f64)).exp2()),
                std::cmp::Ordering::Equal => Shift::Same,
                std::cmp::Ordering::Greater => Shift::Above(pow2_mod(e_k - e_m, NODE_MODULUS)),
            };
            Term {
                weight: q.powi(m as i32 - k as i32),
                base_turns,
                base_sin: sin_cos_turns(base_turns).0,
                kind,
            }
        })
        .collect();

    let nodes = quad.nodes();
    let mut total = 0.0;
    let mut per_term = vec![0.0; terms];
    for &(r, t, w) in &nodes {
        let kernel = w * t.powf(-(1.0 + p * eps));
        let mut diff = 0.0;
        for (k, term) in term_data.iter().enumerate() {
            let d = match term.kind {
                Shift::Below(scale) => {
                    let delta = t * scale;
                    let theta = TAU * term.base_turns;
                    2.0 * (theta + 0.5 * delta).cos() * (0.5 * delta).sin()
                }
                Shift::Same => {
                    let turns = term.base_turns + r as f64 / NODE_MODULUS as f64;
                    sin_cos_turns(turns).0 - term.base_sin
                }
                Shift::Above(mult) => {
                    let shift = mulmod(mult, r, NODE_MODULUS) as f64 / NODE_MODULUS as f64;
                    sin_cos_turns(term.base_turns + shift).0 - term.base_sin
                }
            };
            let d = term.weight * d;
            per_term[k] += kernel * abs_pow(d, p);
            diff += d;
        }
        total += kernel * abs_pow(diff, p);
    }

    let root = |v: f64| v.powf(1.0 / p);
    let j1 = root(per_term[m - 1]);
    let j2_below: f64 = per_term[..m - 1].iter().map(|&v| root(v)).sum();
    let j2_above: f64 = per_term[m..].iter().map(|&v| root(v)).sum();

    let scale_log2 = p * (eps * e_m as f64 - params.log2_amplitude(m).abs());
    let value_log2 = total.log2() + scale_log2;
    let lower_bound_log2 = p * params.gamma().log2() + scale_log2;
    Ok(IntervalEstimate {
        m,
        p,
        epsilon: eps,
        value_log2,
        lower_bound_log2,
        normalized: total,
        j1,
        j2_below,
        j2_above,
        pass: value_log2 >= lower_bound_log2,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaSweep {
    pub estimates: Vec<IntervalEstimate>,
    /// `log2 sum_{m <= M}` of the interval values.
    pub partial_sum_log2: f64,
    /// `log2 (M (gamma eps ln 2)^p)`.
    pub floor_log2: f64,
}

impl LemmaSweep {
    pub fn all_pass(&self) -> bool {
        self.estimates.iter().all(|e| e.pass) && self.partial_sum_log2 >= self.floor_log2
    }

    pub fn to_csv(&self) -> CsvTable {
        let mut t = CsvTable::new(
            "lacuna.lemma_sweep/1",
            &["m", "p", "epsilon", "value_log2", "lower_bound_log2", "pass"],
        );
        for e in &self.estimates {
            t.push(vec![
                e.m.to_string(),
                num(e.p),
                num(e.epsilon),
                num(e.value_log2),
                num(e.lower_bound_log2),
                e.pass.to_string(),
            ]);
        }
        t
    }
}

/// Interval estimates for `m = 1..=M` without asserting the bounds.
pub fn lemma_sweep_report(
    x: RationalAngle,
    spec: SeminormSpec,
    params: &LacunaryParams,
    quad: IntervalQuadrature,
) -> Result<LemmaSweep> {
    let terms = params.terms();
    if terms == 0 {
        return Err(Error::param("terms", "the sweep needs M >= 1"));
    }
    let estimates = (1..=terms)
        .map(|m| interval_integral_with(x, m, spec, params, quad))
        .collect::<Result<Vec<_>>>()?;
    let partial_sum_log2 = LogMagnitude::sum(estimates.iter().map(|e| e.value())).log2_value;
    let floor_log2 =
        (terms as f64).log2() + spec.p * (params.gamma() * spec.epsilon * LN_2).log2();
    Ok(LemmaSweep {
        estimates,
        partial_sum_log2,
        floor_log2,
    })
}

/// Interval estimates for `m = 1..=M`, failing on the first `m` where the
/// integral falls below `gamma^p a_m^p b_m^(p eps)`.
pub fn lemma_lowerbound_sweep(
    x: RationalAngle,
    spec: SeminormSpec,
    params: &LacunaryParams,
) -> Result<LemmaSweep> {
    let sweep = lemma_sweep_report(x, spec, params, IntervalQuadrature::default())?;
    for e in &sweep.estimates {
        if !e.pass {
            return Err(Error::LowerBoundViolated {
                m: e.m,
                detail: format!(
                    "normalized value {:e} < gamma^p = {:e}; J1 = {:e}, J2 = {:e} + {:e}",
                    e.normalized,
                    params.gamma().powf(spec.p),
                    e.j1,
                    e.j2_below,
                    e.j2_above
                ),
            });
        }
    }
    if sweep.partial_sum_log2 < sweep.floor_log2 {
        return Err(Error::LowerBoundViolated {
            m: params.terms(),
            detail: format!(
                "partial sum 2^{} below M (gamma eps ln 2)^p = 2^{}",
                sweep.partial_sum_log2, sweep.floor_log2
            ),
        });
    }
    Ok(sweep)
}

/// Gagliardo seminorm `(int_T int_T |u(y)-u(x)|^p / |y-x|^(1+p eps))^(1/p)`
/// of uniform periodic samples.
///
/// Each distance cell pairs the sampled difference with the exact integral
/// of the kernel weight under the local model `|u(y)-u(x)| ~ L |y-x|`. The
/// diagonal cell uses `L^p` averaged from the two one-sided difference
/// quotients; dropping it would discard the part of the integral that grows
/// for rough samples.
pub fn gagliardo_1d(samples: &[f64], spec: SeminormSpec) -> Result<f64> {
    let n = samples.len();
    if n < 16 {
        return Err(Error::param("samples", format!("need >= 16 samples, got {n}")));
    }
    let (p, eps) = (spec.p, spec.epsilon);
    let h = TAU / n as f64;
    let half = (n - 1) / 2;
    // |u(x+r) - u(x)|^p r^-(1+p eps) behaves like (|du|/r)^p r^(alpha-1) with
    // alpha = p (1 - eps); integrating r^(alpha-1) exactly over each cell keeps the
    // near-diagonal singularity out of the quadrature error.
    let alpha = p * (1.0 - eps);
    let cell = |a: f64, b: f64| (b.powf(alpha) - a.powf(alpha)) / alpha;
    let weights: Vec<f64> = (0..=n / 2)
        .map(|k| {
            let kf = k as f64;
            let w = if k == 0 {
                2.0 * cell(0.0, 0.5 * h)
            } else if 2 * k == n {
                2.0 * cell((kf - 0.5) * h, kf * h)
            } else {
                cell((kf - 0.5) * h, (kf + 0.5) * h)
            };
            h * w / (h * kf.max(1.0)).powf(p)
        })
        .collect();
    let even_mid = if n % 2 == 0 { Some(n / 2) } else { None };

    let sum = tiled_sum(n, DEFAULT_TILE, |i| {
        let ui = samples[i];
        let mut acc = 0.0;
        for k in 1..=half {
            acc += 2.0 * abs_pow(samples[(i + k) % n] - ui, p) * weights[k];
        }
        if let Some(k) = even_mid {
            acc += abs_pow(samples[(i + k) % n] - ui, p) * weights[k];
        }
        let right = abs_pow(samples[(i + 1) % n] - ui, p);
        let left = abs_pow(ui - samples[(i + n - 1) % n], p);
        acc + 0.5 * (right + left) * weights[0]
    });
    Ok(sum.powf(1.0 / p))
}

/// `max_j |a_j f(x_j) - b_j|` on the uniform grid `x_j = 2*pi*j/n`.
pub fn separation_residual(a: &[f64], b: &[f64], params: &LacunaryParams) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    let n = a.len() as u64;
    let mut worst: f64 = 0.0;
    for (j, (&aj, &bj)) in a.iter().zip(b).enumerate() {
        let x = RationalAngle::new(j as u64, n)?;
        worst = worst.max((aj * eval_f(x, params) - bj).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lacunary::GAMMA_REFERENCE;

    fn demo(q: u32, m: usize) -> LacunaryParams {
        LacunaryParams::demo(q, m, GAMMA_REFERENCE).unwrap()
    }

    #[test]
    fn spec_validation() {
        assert!(SeminormSpec::new(2.0, 0.25).is_ok());
        assert!(SeminormSpec::new(0.5, 0.25).is_err());
        assert!(SeminormSpec::new(2.0, 1.0).is_err());
        assert!(SeminormSpec::new(2.0, 0.0).is_err());
    }

    #[test]
    fn absent_terms_are_rejected() {
        let spec = SeminormSpec::default();
        let x = RationalAngle::zero();
        assert!(matches!(
            interval_integral(x, 1, spec, &demo(7, 0)),
            Err(Error::TermAbsent { .. })
        ));
        assert!(interval_integral(x, 3, spec, &demo(7, 2)).is_err());
        assert!(lemma_lowerbound_sweep(x, spec, &demo(7, 0)).is_err());
    }

    #[test]
    fn frozen_q7_pair() {
        // I = int_1^2 |7 sin(2^-42 t) + sin t|^2 t^-1.5 dt (mpmath, 30 digits)
        const NORMALIZED: f64 = 0.527_848_447_738_172_4;
        let spec = SeminormSpec::new(2.0, 0.25).unwrap();
        let est = interval_integral(RationalAngle::zero(), 2, spec, &demo(7, 2)).unwrap();
        assert!(((est.normalized - NORMALIZED) / NORMALIZED).abs() < 1e-10);
        let scale = 2.0 * (0.25 * 49.0 - 2.0 * 7f64.log2());
        assert!((est.value_log2 - (NORMALIZED.log2() + scale)).abs() < 1e-9);
        assert!((est.lower_bound_log2 - (2.0 * GAMMA_REFERENCE.log2() + scale)).abs() < 1e-12);
        assert!(est.pass);
    }

    #[test]
    fn j1_dominates_five_gamma() {
        let spec = SeminormSpec::new(1.0, 0.05).unwrap();
        for j in [0u64, 17, 100, 250] {
            let x = RationalAngle::new(j, 360).unwrap();
            let est = interval_integral(x, 1, spec, &demo(7, 1)).unwrap();
            assert!(est.j1 >= 5.0 * GAMMA_REFERENCE, "j={j} j1={}", est.j1);
            assert_eq!(est.j2_below, 0.0);
            assert_eq!(est.j2_above, 0.0);
        }
    }

    #[test]
    fn gagliardo_of_constant_is_zero() {
        let spec = SeminormSpec::default();
        assert_eq!(gagliardo_1d(&[3.5; 64], spec).unwrap(), 0.0);
        assert!(gagliardo_1d(&[0.0; 15], spec).is_err());
    }

    #[test]
    fn gagliardo_is_homogeneous() {
        let spec = SeminormSpec::new(1.5, 0.3).unwrap();
        let u: Vec<f64> = (0..200).map(|i| ((i as f64) * 0.1).sin() + 0.2 * ((i * i) as f64).cos()).collect();
        let cu: Vec<f64> = u.iter().map(|v| -2.5 * v).collect();
        let a = gagliardo_1d(&u, spec).unwrap();
        let b = gagliardo_1d(&cu, spec).unwrap();
        assert!((b - 2.5 * a).abs() < 1e-12 * b);
    }

    #[test]
    fn gagliardo_of_sine_converges() {
        let sine = |n: usize| -> Vec<f64> { (0..n).map(|i| (TAU * i as f64 / n as f64).sin()).collect() };
        // mpmath quadrature of 8 pi int_0^pi sin^2(r/2) r^-(1+p eps) dr and its p = 1 analogue
        let cases = [(2.0, 0.25, 4.076_747_958_511_702), (1.0, 0.5, 26.180_335_271_870_104)];
        for (p, eps, exact) in cases {
            let spec = SeminormSpec::new(p, eps).unwrap();
            let coarse = (gagliardo_1d(&sine(512), spec).unwrap() - exact).abs();
            let fine = (gagliardo_1d(&sine(4096), spec).unwrap() - exact).abs();
            assert!(fine < 1e-4 * exact, "p={p} err={fine}");
            assert!(fine < coarse);
        }
    }

    #[test]
    fn residual_cases() {
        let p = demo(7, 2);
        let n = 64;
        let zeros = vec![0.0; n];
        assert_eq!(separation_residual(&zeros, &zeros, &p).unwrap(), 0.0);
        let ones = vec![1.0; n];
        let f: Vec<f64> = (0..n)
            .map(|j| eval_f(RationalAngle::new(j as u64, n as u64).unwrap(), &p))
            .collect();
        assert_eq!(separation_residual(&ones, &f, &p).unwrap(), 0.0);
        assert!(separation_residual(&ones, &zeros[..10], &p).is_err());
    }
}
