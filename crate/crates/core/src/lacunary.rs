//! The lacunary series `f(x) = sum_k q^-k sin(2^(q^k) x)` and its primitive
//! `F(x) = 1 + int_0^x f`.
//!
//! Frequencies `b_k = 2^(q^k)` are never materialized: a term is described
//! by its exponent `q^k`, angles are reduced with [`RationalAngle`], and all
//! magnitude comparisons run on base-2 logarithms.

use serde::{Deserialize, Serialize};
use std::f64::consts::{LN_2, PI, TAU};

use crate::angle::{centered_turns, RationalAngle};
use crate::error::{Error, Result};
use crate::logmag::LogMagnitude;
use crate::quadrature::GaussLegendre;

/// Regression value of the separation constant
/// `gamma = 1/5 min_z int_1^2 |sin(z+t) - sin z| t^-2 dt`.
///
/// Frozen from an independent adaptive-quadrature computation and
/// re-derived in the tests by a dense tensor-grid oracle.
pub const GAMMA_REFERENCE: f64 = 0.015_418_918_659_584_096;

/// Smallest base admitted in strict mode (`q^2 2^(1-q) < 1`).
pub const STRICT_MIN_Q: u32 = 7;

/// Default `(p, epsilon)` grid for the divergence-condition check.
pub const SUMINF_GRID: [(f64, f64); 9] = [
    (1.0, 0.05),
    (1.0, 0.25),
    (1.0, 0.5),
    (2.0, 0.05),
    (2.0, 0.25),
    (2.0, 0.5),
    (4.0, 0.05),
    (4.0, 0.25),
    (4.0, 0.5),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// All of the growth conditions must hold.
    Strict,
    /// Small bases for visualization; conditions are reported, not enforced.
    Demo,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LacunaryParams {
    q: u32,
    terms: usize,
    gamma: f64,
    mode: Mode,
    #[serde(skip)]
    exponents: Vec<u64>,
}

impl LacunaryParams {
    pub fn new(q: u32, terms: usize, gamma: f64, mode: Mode) -> Result<Self> {
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::param("gamma", format!("must be positive, got {gamma}")));
        }
        if q < 2 {
            return Err(Error::param("q", format!("must be >= 2, got {q}")));
        }
        if mode == Mode::Strict {
            if q < STRICT_MIN_Q {
                return Err(Error::param(
                    "q",
                    format!("strict mode needs q >= {STRICT_MIN_Q}, got {q}"),
                ));
            }
            if 1.0 / (q as f64 - 1.0) > gamma {
                return Err(Error::param(
                    "q",
                    format!("strict mode needs 1/(q-1) <= gamma = {gamma}, got q = {q}"),
                ));
            }
        }
        let exponents = (1..=terms)
            .map(|k| frequency_exponent(q, k))
            .collect::<Result<Vec<_>>>()?;
        Ok(LacunaryParams {
            q,
            terms,
            gamma,
            mode,
            exponents,
        })
    }

    pub fn strict(q: u32, terms: usize, gamma: f64) -> Result<Self> {
        Self::new(q, terms, gamma, Mode::Strict)
    }

    pub fn demo(q: u32, terms: usize, gamma: f64) -> Result<Self> {
        Self::new(q, terms, gamma, Mode::Demo)
    }

    /// Same base and constant, different truncation.
    pub fn with_terms(&self, terms: usize) -> Result<Self> {
        Self::new(self.q, terms, self.gamma, self.mode)
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Truncation order `M`.
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// `q^k`, i.e. `log2 b_k`, for `1 <= k <= M`.
    pub fn exponent(&self, k: usize) -> u64 {
        self.exponents[k - 1]
    }

    /// `a_k = q^-k`.
    pub fn amplitude(&self, k: usize) -> f64 {
        (self.q as f64).powi(-(k as i32))
    }

    pub fn log2_amplitude(&self, k: usize) -> f64 {
        -(k as f64) * (self.q as f64).log2()
    }

    /// `sum_{k <= M} a_k`, a Lipschitz bound for the truncated `F`.
    pub fn amplitude_sum(&self) -> f64 {
        (1..=self.terms).map(|k| self.amplitude(k)).sum()
    }

    /// `a_k / b_k`, the radial amplitude of the `k`-th term of `F`.
    pub fn radial_amplitude(&self, k: usize) -> f64 {
        (self.log2_amplitude(k) - self.exponent(k) as f64).exp2()
    }
}

/// `q^k` with overflow detection.
pub fn frequency_exponent(q: u32, k: usize) -> Result<u64> {
    let k32 = u32::try_from(k).map_err(|_| Error::ExponentOverflow { q, k })?;
    (q as u64)
        .checked_pow(k32)
        .ok_or(Error::ExponentOverflow { q, k })
}

/// Bound `2^(1-q)/(q-1)` on `|F - 1|`.
pub fn radius_excess_bound(q: u32) -> f64 {
    (1.0 - q as f64).exp2() / (q as f64 - 1.0)
}

// ---------------------------------------------------------------------------
// gamma

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaEstimate {
    pub gamma: f64,
    /// Minimizing `z` in `[0, 2*pi)`.
    pub z_min: f64,
    pub quad_points: usize,
    pub z_grid: usize,
    /// Relative change against the previous (half-resolution) pass.
    pub rel_change: f64,
}

/// `int_1^2 |sin(z+t) - sin z| t^-2 dt`, split at the kinks of the absolute value.
pub fn gamma_integral(z: f64, rule: &GaussLegendre) -> f64 {
    // |sin(z+t) - sin z| = 2 |sin(t/2)| |cos(z + t/2)|; kinks at z + t/2 = pi/2 + k pi.
    let mut cuts = vec![1.0];
    let k_lo = ((z + 0.5 - PI / 2.0) / PI).floor() as i64 - 1;
    for k in k_lo..=k_lo + 3 {
        let t = 2.0 * (PI / 2.0 + k as f64 * PI - z);
        if t > 1.0 && t < 2.0 {
            cuts.push(t);
        }
    }
    cuts.push(2.0);
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2)
        .map(|w| {
            rule.integrate(w[0], w[1], |t| {
                2.0 * (0.5 * t).sin().abs() * (z + 0.5 * t).cos().abs() / (t * t)
            })
        })
        .sum()
}

fn gamma_pass(quad_points: usize, z_grid: usize) -> (f64, f64) {
    let rule = GaussLegendre::new(quad_points);
    let dz = TAU / z_grid as f64;
    let (mut best_i, mut best) = (0usize, f64::INFINITY);
    for i in 0..z_grid {
        let v = gamma_integral(i as f64 * dz, &rule);
        if v < best {
            best = v;
            best_i = i;
        }
    }
    // golden-section refinement on the bracketing cell pair
    let (mut a, mut b) = ((best_i as f64 - 1.0) * dz, (best_i as f64 + 1.0) * dz);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (gamma_integral(c, &rule), gamma_integral(d, &rule));
    while b - a > 1e-11 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = gamma_integral(c, &rule);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = gamma_integral(d, &rule);
        }
    }
    let z = 0.5 * (a + b);
    let v = gamma_integral(z, &rule).min(best);
    (v / 5.0, z.rem_euclid(TAU))
}

/// Evaluate `gamma`, doubling both resolutions until two passes agree to `1e-6`.
pub fn compute_gamma(quad_points: usize, z_grid: usize) -> Result<GammaEstimate> {
    if quad_points < 64 {
        return Err(Error::param("quad_points", "must be >= 64"));
    }
    if z_grid < 256 {
        return Err(Error::param("z_grid", "must be >= 256"));
    }
    const MAX_DOUBLINGS: usize = 6;
    let (mut qp, mut zg) = (quad_points, z_grid);
    let (mut prev, _) = gamma_pass(qp, zg);
    let mut last_change = f64::NAN;
    for _ in 0..MAX_DOUBLINGS {
        qp *= 2;
        zg *= 2;
        let (gamma, z_min) = gamma_pass(qp, zg);
        let rel_change = ((gamma - prev) / gamma).abs();
        if rel_change <= 1e-6 {
            return Ok(GammaEstimate {
                gamma,
                z_min,
                quad_points: qp,
                z_grid: zg,
                rel_change,
            });
        }
        last_change = rel_change;
        prev = gamma;
    }
    Err(Error::NonConvergence {
        what: "gamma",
        detail: format!("relative change {last_change:e} after {MAX_DOUBLINGS} doublings"),
    })
}

/// Smallest `q >= 7` with `1/(q-1) <= gamma`.
pub fn choose_q(gamma: f64) -> u32 {
    assert!(gamma > 0.0, "gamma must be positive");
    let mut q = STRICT_MIN_Q;
    while 1.0 / (q as f64 - 1.0) > gamma {
        q += 1;
    }
    q
}

// ---------------------------------------------------------------------------
// condition checks

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionEntry {
    pub condition: String,
    pub m: usize,
    pub lhs_log2: f64,
    pub rhs_log2: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ConditionReport {
    pub entries: Vec<ConditionEntry>,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.entries.iter().all(|e| e.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionEntry> {
        self.entries.iter().filter(|e| !e.pass)
    }

    /// First violated inequality as a structured error.
    pub fn ensure(&self) -> Result<()> {
        match self.failures().next() {
            None => Ok(()),
            Some(e) => {
                let (name, extra) = match e.condition.split_once('[') {
                    Some((n, rest)) => (n.to_string(), format!(" ({}", rest.replace(']', ")"))),
                    None => (e.condition.clone(), String::new()),
                };
                Err(Error::ConditionViolated {
                    condition: name,
                    m: e.m,
                    extra,
                    lhs_log2: e.lhs_log2,
                    rhs_log2: e.rhs_log2,
                })
            }
        }
    }
}

/// `log2(a_k b_k) = q^k - k log2 q`.
fn log2_ab(q: u32, k: usize) -> Result<f64> {
    Ok(frequency_exponent(q, k)? as f64 - k as f64 * (q as f64).log2())
}

/// `log2 s_m` with `s_m = (sum_{k<m} a_k b_k) / (a_m b_m)`.
pub fn log2_s(q: u32, m: usize) -> Result<f64> {
    let mut num = LogMagnitude::ZERO;
    for k in 1..m {
        num = num.add(LogMagnitude::from_log2(log2_ab(q, k)?));
    }
    Ok(num.log2_value - log2_ab(q, m)?)
}

/// Check the three growth conditions in log space for
/// `2 <= m <= max(M, 8)` and the default `(p, epsilon)` grid.
pub fn check_conditions(params: &LacunaryParams) -> Result<ConditionReport> {
    check_conditions_on(params, &SUMINF_GRID)
}

pub fn check_conditions_on(
    params: &LacunaryParams,
    grid: &[(f64, f64)],
) -> Result<ConditionReport> {
    let q = params.q;
    let qf = q as f64;
    let log2_gamma = params.gamma.log2();
    let m_max = params.terms.max(8);
    let mut entries = Vec::new();

    let floor_lhs = 2.0 * qf.log2() + 1.0 - qf;
    entries.push(ConditionEntry {
        condition: "induction_base".into(),
        m: 0,
        lhs_log2: floor_lhs,
        rhs_log2: 0.0,
        pass: floor_lhs < 0.0,
    });

    for m in 2..=m_max {
        let s = log2_s(q, m)?;
        entries.push(ConditionEntry {
            condition: "c_minus".into(),
            m,
            lhs_log2: s,
            rhs_log2: log2_gamma,
            pass: s <= log2_gamma,
        });
    }
    for m in 2..=m_max {
        let s = log2_s(q, m)?;
        let bound = -(qf - 1.0).log2();
        entries.push(ConditionEntry {
            condition: "c_minus_induction".into(),
            m,
            lhs_log2: s,
            rhs_log2: bound,
            pass: s < bound,
        });
    }

    // sum_{k>m} a_k / a_m = 1/(q-1) for every m
    let tail = -(qf - 1.0).log2();
    entries.push(ConditionEntry {
        condition: "c_plus".into(),
        m: 1,
        lhs_log2: tail,
        rhs_log2: log2_gamma,
        pass: tail <= log2_gamma,
    });

    for &(p, eps) in grid {
        if !(p >= 1.0 && eps > 0.0) {
            return Err(Error::param("grid", format!("need p >= 1, eps > 0; got ({p}, {eps})")));
        }
        let rhs = p * (eps * LN_2).log2();
        for m in 1..=m_max {
            let lhs = p * (eps * frequency_exponent(q, m)? as f64 - m as f64 * qf.log2());
            entries.push(ConditionEntry {
                condition: format!("suminf[p={p},eps={eps}]"),
                m,
                lhs_log2: lhs,
                rhs_log2: rhs,
                pass: lhs >= rhs,
            });
        }
    }
    Ok(ConditionReport { entries })
}

// ---------------------------------------------------------------------------
// series evaluation

/// `f_M(x) = sum_{k<=M} a_k sin(b_k x)`.
pub fn eval_f(x: RationalAngle, params: &LacunaryParams) -> f64 {
    (1..=params.terms)
        .map(|k| params.amplitude(k) * x.dyadic_sin_cos(params.exponent(k)).0)
        .sum()
}

/// `F(x) - 1 = sum_k a_k (1 - cos(b_k x)) / b_k`, without the cancellation of `F - 1`.
pub fn eval_radius_excess(x: RationalAngle, params: &LacunaryParams) -> f64 {
    (1..=params.terms)
        .map(|k| {
            let t = centered_turns(x.dyadic_multiple(params.exponent(k)), x.denominator());
            let s = (PI * t).sin();
            2.0 * s * s * params.radial_amplitude(k)
        })
        .sum()
}

/// `F(x) = 1 + int_0^x f_M`.
pub fn eval_radius(x: RationalAngle, params: &LacunaryParams) -> f64 {
    1.0 + eval_radius_excess(x, params)
}

/// A value `mantissa * 2^scale_log2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaledValue {
    pub mantissa: f64,
    pub scale_log2: f64,
}

impl ScaledValue {
    pub fn value(&self) -> f64 {
        self.mantissa * self.scale_log2.exp2()
    }
}

/// Derivative of the truncated series, `sum_k a_k b_k cos(b_k x)`, scaled by `b_M`.
///
/// Only the truncation is differentiable; the full series is not.
pub fn eval_f_prime_scaled(x: RationalAngle, params: &LacunaryParams) -> ScaledValue {
    if params.terms == 0 {
        return ScaledValue {
            mantissa: 0.0,
            scale_log2: 0.0,
        };
    }
    let top = params.exponent(params.terms);
    let mantissa = (1..=params.terms)
        .map(|k| {
            let shift = -((top - params.exponent(k)) as f64);
            params.amplitude(k) * shift.exp2() * x.dyadic_sin_cos(params.exponent(k)).1
        })
        .sum();
    ScaledValue {
        mantissa,
        scale_log2: top as f64,
    }
}

/// Derivative of the truncated series in plain f64.
pub fn eval_f_prime_truncated(x: RationalAngle, params: &LacunaryParams) -> Result<f64> {
    if params.terms == 0 {
        return Ok(0.0);
    }
    let lead = log2_ab(params.q, params.terms)?;
    if lead >= 1023.0 {
        return Err(Error::MagnitudeOverflow { log2: lead });
    }
    Ok((1..=params.terms)
        .map(|k| {
            let b = (params.exponent(k) as f64).exp2();
            params.amplitude(k) * b * x.dyadic_sin_cos(params.exponent(k)).1
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angle::DEFAULT_GRID;

    fn demo(q: u32, m: usize) -> LacunaryParams {
        LacunaryParams::demo(q, m, GAMMA_REFERENCE).unwrap()
    }

    #[test]
    fn strict_mode_validation() {
        assert!(LacunaryParams::strict(66, 2, GAMMA_REFERENCE).is_ok());
        assert!(LacunaryParams::strict(65, 2, GAMMA_REFERENCE).is_err());
        assert!(LacunaryParams::strict(7, 2, 1.0).is_ok());
        assert!(LacunaryParams::strict(6, 2, 1.0).is_err());
        assert!(LacunaryParams::demo(3, 2, GAMMA_REFERENCE).is_ok());
        assert!(LacunaryParams::demo(1, 2, 1.0).is_err());
        assert!(LacunaryParams::demo(3, 2, 0.0).is_err());
        assert!(LacunaryParams::demo(3, 2, f64::NAN).is_err());
    }

    #[test]
    fn exponent_overflow_is_reported() {
        assert!(matches!(
            LacunaryParams::demo(1000, 8, 1.0),
            Err(Error::ExponentOverflow { .. })
        ));
    }

    #[test]
    fn choose_q_examples() {
        assert_eq!(choose_q(1.0), 7);
        assert_eq!(choose_q(0.05), 21);
        assert_eq!(choose_q(GAMMA_REFERENCE), 66);
    }

    #[test]
    fn gamma_bounds() {
        let rule = GaussLegendre::new(64);
        for i in 0..64 {
            let z = i as f64 * TAU / 64.0;
            let v = gamma_integral(z, &rule);
            assert!(v > 0.0 && v <= 1.0, "z={z} v={v}");
        }
    }

    #[test]
    fn compute_gamma_converges_to_reference() {
        let est = compute_gamma(64, 256).unwrap();
        assert!(est.gamma <= 0.2 && est.gamma > 0.0);
        assert!(((est.gamma - GAMMA_REFERENCE) / GAMMA_REFERENCE).abs() < 1e-6);
        assert!(compute_gamma(32, 256).is_err());
        assert!(compute_gamma(64, 100).is_err());
    }

    #[test]
    fn s2_for_q7() {
        let want = (896.0f64 / 2f64.powi(49)).log2();
        assert!((log2_s(7, 2).unwrap() - want).abs() < 1e-12);
    }

    #[test]
    fn s_m_decreases_in_q() {
        for m in 2..=5 {
            let mut prev = f64::INFINITY;
            for q in 7..=20 {
                let s = log2_s(q, m).unwrap();
                assert!(s < prev, "q={q} m={m}");
                prev = s;
            }
        }
    }

    #[test]
    fn strict_conditions_pass() {
        let params = LacunaryParams::strict(66, 2, GAMMA_REFERENCE).unwrap();
        let report = check_conditions(&params).unwrap();
        assert!(report.all_pass(), "{:?}", report.failures().collect::<Vec<_>>());
        assert!(report.ensure().is_ok());
        let s2 = report
            .entries
            .iter()
            .find(|e| e.condition == "c_minus" && e.m == 2)
            .unwrap();
        assert!(s2.lhs_log2 < -4000.0);
    }

    #[test]
    fn small_q_fails_with_named_condition() {
        let report = check_conditions(&demo(3, 2)).unwrap();
        assert!(!report.all_pass());
        match report.ensure() {
            Err(Error::ConditionViolated { condition, .. }) => assert_eq!(condition, "induction_base"),
            other => panic!("{other:?}"),
        }
        let cm = report.entries.iter().find(|e| e.condition == "c_minus" && e.m == 2).unwrap();
        assert!(!cm.pass);
        // s_2 = (8/3) / (512/9) = 3/64
        assert!((cm.lhs_log2 - (3.0f64 / 64.0).log2()).abs() < 1e-12);
    }

    #[test]
    fn suminf_floor_q7() {
        let params = LacunaryParams::demo(7, 2, GAMMA_REFERENCE).unwrap();
        let report = check_conditions(&params).unwrap();
        let e = report
            .entries
            .iter()
            .find(|e| e.condition == "suminf[p=2,eps=0.5]" && e.m == 1)
            .unwrap();
        assert!((e.rhs_log2.exp2() - 0.120_113).abs() < 1e-5);
        assert!(e.pass);
        // the closed-form tail equals 1/6 for q = 7
        let cp = report.entries.iter().find(|e| e.condition == "c_plus").unwrap();
        assert!((cp.lhs_log2.exp2() - 1.0 / 6.0).abs() < 1e-15);
        assert!(!cp.pass);
    }

    #[test]
    fn series_at_zero() {
        let p = demo(7, 3);
        assert_eq!(eval_f(RationalAngle::zero(), &p), 0.0);
        assert_eq!(eval_radius(RationalAngle::zero(), &p), 1.0);
        let x = RationalAngle::new(0, 360).unwrap();
        assert_eq!(eval_f(x, &p), 0.0);
    }

    #[test]
    fn second_term_uses_reduced_angle() {
        let p1 = demo(7, 1);
        let p2 = demo(7, 2);
        let x = RationalAngle::new(1, 360).unwrap();
        let term2 = eval_f(x, &p2) - eval_f(x, &p1);
        let want = (TAU * 272.0 / 360.0).sin() / 49.0;
        assert!((term2 - want).abs() < 1e-16);
    }

    #[test]
    fn empty_truncation_is_the_disk() {
        let p = demo(7, 0);
        for j in [0, 1, 17, 359] {
            let x = RationalAngle::new(j, 360).unwrap();
            assert_eq!(eval_f(x, &p), 0.0);
            assert_eq!(eval_radius(x, &p), 1.0);
            assert_eq!(eval_f_prime_truncated(x, &p).unwrap(), 0.0);
        }
    }

    #[test]
    fn derivative_examples() {
        let p1 = demo(7, 1);
        assert_eq!(eval_f_prime_truncated(RationalAngle::zero(), &p1).unwrap(), 128.0 / 7.0);
        let p2 = demo(7, 2);
        let want = 128.0 / 7.0 + 2f64.powi(49) / 49.0;
        let got = eval_f_prime_truncated(RationalAngle::zero(), &p2).unwrap();
        assert!(((got - want) / want).abs() < 1e-15);
        let scaled = eval_f_prime_scaled(RationalAngle::zero(), &p2);
        assert!(((scaled.value() - want) / want).abs() < 1e-15);
        let p4 = demo(7, 4);
        assert!(matches!(
            eval_f_prime_truncated(RationalAngle::zero(), &p4),
            Err(Error::MagnitudeOverflow { .. })
        ));
        let s4 = eval_f_prime_scaled(RationalAngle::zero(), &p4);
        assert_eq!(s4.scale_log2, 2401.0);
        assert!((s4.mantissa - 1.0 / 2401.0).abs() < 1e-15);
    }

    #[test]
    fn derivative_matches_finite_difference_for_small_q() {
        let p = demo(2, 3);
        let n = DEFAULT_GRID;
        for j in [1u64, 1000, 123_456_789] {
            let x = RationalAngle::new(j, n).unwrap();
            let h = 1e-6;
            let xr = x.radians();
            let f = |t: f64| -> f64 {
                (1..=3).map(|k| p.amplitude(k) * ((p.exponent(k) as f64).exp2() * t).sin()).sum()
            };
            let fd = (f(xr + h) - f(xr - h)) / (2.0 * h);
            let d = eval_f_prime_truncated(x, &p).unwrap();
            assert!((fd - d).abs() < 1e-5 * (1.0 + d.abs()), "{fd} {d}");
        }
    }

    #[test]
    fn reflection_identities() {
        // f(2 pi - x) = -f(x): every b_k is even and sine is odd.
        let p = demo(7, 4);
        let n = DEFAULT_GRID;
        for j in [1u64, 17, 99_999, n / 3 + 5] {
            let x = RationalAngle::new(j, n).unwrap();
            let f1 = eval_f(x, &p);
            let f2 = eval_f(x.reflected(), &p);
            assert!((f1 + f2).abs() <= 1e-14, "{f1} {f2}");
            let r1 = eval_radius(x, &p);
            let r2 = eval_radius(x.reflected(), &p);
            assert!((r1 - r2).abs() <= 1e-14);
        }
    }

    #[test]
    fn radius_is_periodic() {
        let p = demo(5, 3);
        let n = 4096;
        let a = eval_radius(RationalAngle::new(0, n).unwrap(), &p);
        let b = eval_radius(RationalAngle::new(n, n).unwrap(), &p);
        assert_eq!(a, b);
        assert_eq!(a, 1.0);
    }
}
