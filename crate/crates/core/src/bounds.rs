//! Closed-form probability bounds and predictions.

use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;

use crate::error::{invalid, Error, Result};

/// `h(u) = (1+u)ln(1+u) - u`.
pub fn bennett_h(u: f64) -> Result<f64> {
    if !(u >= 0.0) {
        return Err(invalid(format!("h(u) needs u >= 0, got {u}")));
    }
    Ok((1.0 + u) * u.ln_1p() - u)
}

fn check_q(q: f64) -> Result<()> {
    if !(q > 0.0 && q < 1.0) {
        return Err(invalid(format!("q must lie in (0, 1), got {q}")));
    }
    Ok(())
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        return Err(invalid("n must be positive"));
    }
    Ok(())
}

/// Upper bound on each of `P(S > qn + t)` and `P(S < qn - t)` for
/// `S ~ Binomial(n, q)`, clipped to 1.
pub fn bennett_tail(n: u64, q: f64, t: f64) -> Result<f64> {
    check_n(n)?;
    check_q(q)?;
    if !(t >= 0.0) {
        return Err(invalid(format!("t must be nonnegative, got {t}")));
    }
    let var = n as f64 * q * (1.0 - q);
    let rho = q.max(1.0 - q);
    let h = bennett_h(t * rho / var)?;
    Ok((-var / (rho * rho) * h).exp().min(1.0))
}

/// Bound on `P(S > (q+ε)n)` and `P(S < (q-ε)n)`, for `0 < ε <= q <= 1/2`.
pub fn bennett_tail_eps(n: u64, q: f64, eps: f64) -> Result<f64> {
    check_n(n)?;
    check_q(q)?;
    if !(eps > 0.0 && eps <= q && q <= 0.5) {
        return Err(invalid(format!("need 0 < eps <= q <= 1/2, got eps = {eps}, q = {q}")));
    }
    let nf = n as f64;
    Ok((-nf * eps * eps / (2.0 * q * (1.0 - q)) * (1.0 - eps / (3.0 * q))).exp())
}

/// Bound on `P(S > (τ+1)qn)`, for `q <= 1/2` and `τ > e`.
pub fn bennett_tail_tau(n: u64, q: f64, tau: f64) -> Result<f64> {
    check_n(n)?;
    check_q(q)?;
    if q > 0.5 || !(tau > std::f64::consts::E) {
        return Err(invalid(format!("need q <= 1/2 and tau > e, got q = {q}, tau = {tau}")));
    }
    Ok(bennett_tail_tau_log(n, q, tau).exp())
}

/// Natural log of [`bennett_tail_tau`]; useful once the bound underflows.
pub fn bennett_tail_tau_log(n: u64, q: f64, tau: f64) -> f64 {
    -tau * (tau.ln() - 1.0) * q * n as f64
}

/// Bound `4·exp(-t²pn/4)` on `P(‖M - EM‖ >= 2t√(np))`, valid for `t >= 30`
/// and `4 ln n / n <= p <= 1/4`. Returned as a natural log.
pub fn norm_tail_bound_log(n: u64, p: f64, t: f64) -> Result<f64> {
    check_n(n)?;
    let nf = n as f64;
    if t < 30.0 {
        return Err(Error::Regime(format!("norm tail bound needs t >= 30, got {t}")));
    }
    if p < 4.0 * nf.ln() / nf || p > 0.25 {
        return Err(Error::Regime(format!(
            "norm tail bound needs 4 ln n / n <= p <= 1/4, got p = {p}"
        )));
    }
    Ok(4f64.ln() - t * t * p * nf / 4.0)
}

/// Which evaluation produced a zero row/column probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroLineMethod {
    InclusionExclusion,
    CoverageRecursion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroLineProbability {
    pub value: f64,
    pub method: ZeroLineMethod,
    /// `(S₊ + S₋) / |S₊ - S₋|` of the alternating sum.
    pub cancellation: f64,
}

/// Largest dimension accepted by [`zero_rowcol_exact`].
pub const ZERO_LINE_MAX_N: usize = 1000;

/// Estimated relative rounding error above which the alternating sum is
/// abandoned for the cancellation-free recursion.
pub const CANCELLATION_TOLERANCE: f64 = 1e-10;

/// `P{M has a zero row or a zero column}` for an `n x n` Bernoulli(`p`) matrix.
pub fn zero_rowcol_exact(n: usize, p: f64) -> Result<f64> {
    zero_rowcol_exact_detailed(n, p).map(|z| z.value)
}

/// [`zero_rowcol_exact`] together with the evaluation route taken.
///
/// The inclusion–exclusion sum
/// `-Σ_{(i,j)≠(0,0)} (-1)^{i+j} C(n,i) C(n,j) (1-p)^{ni+nj-ij}`
/// is accumulated in log space with positive and negative terms kept apart.
/// When the two halves nearly cancel, the probability is recomputed with a
/// recursion over the number of still-uncovered columns, all of whose terms
/// are nonnegative.
pub fn zero_rowcol_exact_detailed(n: usize, p: f64) -> Result<ZeroLineProbability> {
    if n == 0 || n > ZERO_LINE_MAX_N {
        return Err(Error::BudgetExceeded(format!(
            "zero_rowcol_exact supports 1 <= n <= {ZERO_LINE_MAX_N}, got {n}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    if p == 0.0 || p == 1.0 {
        let value = if p == 0.0 { 1.0 } else { 0.0 };
        return Ok(ZeroLineProbability {
            value,
            method: ZeroLineMethod::InclusionExclusion,
            cancellation: 1.0,
        });
    }
    let (value, cancellation) = inclusion_exclusion(n, p);
    let rel_err = cancellation * f64::EPSILON * ((n + 1) * (n + 1) - 1) as f64;
    if rel_err.is_finite() && rel_err <= CANCELLATION_TOLERANCE && value <= 1.0 {
        return Ok(ZeroLineProbability {
            value,
            method: ZeroLineMethod::InclusionExclusion,
            cancellation,
        });
    }
    Ok(ZeroLineProbability {
        value: coverage_recursion(n, p),
        method: ZeroLineMethod::CoverageRecursion,
        cancellation,
    })
}

/// Alternating sum in log space; returns the value and `(S₊ + S₋) / |S₊ - S₋|`.
fn inclusion_exclusion(n: usize, p: f64) -> (f64, f64) {
    let lq = (-p).ln_1p();
    let nn = n as u64;
    let ln_c: Vec<f64> = (0..=nn).map(|k| ln_binomial(nn, k)).collect();
    let mut pos = Vec::with_capacity((n + 1) * (n + 1) / 2);
    let mut neg = Vec::with_capacity((n + 1) * (n + 1) / 2);
    for i in 0..=n {
        for j in 0..=n {
            if i == 0 && j == 0 {
                continue;
            }
            let e = (n * i + n * j - i * j) as f64;
            let t = ln_c[i] + ln_c[j] + e * lq;
            if (i + j) % 2 == 1 {
                pos.push(t);
            } else {
                neg.push(t);
            }
        }
    }
    let sp = log_sum_exp(&pos);
    let sn = log_sum_exp(&neg);
    if sp > sn {
        let diff = sp + (-(sn - sp).exp()).ln_1p();
        (diff.exp(), (sp.exp() + sn.exp()) / diff.exp())
    } else {
        (0.0, f64::INFINITY)
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// `P{zero row} + P{no zero row, some zero column}`.
///
/// Rows are revealed one at a time; `dp[u]` is the probability that every
/// row so far is nonzero and exactly `u` columns are still all-zero. A row
/// hits `b` of the `u` open columns with probability `C(u,b)p^b(1-p)^{u-b}`,
/// and for `b = 0` it must carry a one among the `n - u` covered columns.
fn coverage_recursion(n: usize, p: f64) -> f64 {
    let lp = p.ln();
    let lq = (-p).ln_1p();
    let mut trans = vec![vec![0.0; n + 1]; n + 1];
    for (u, row) in trans.iter_mut().enumerate() {
        for (b, t) in row.iter_mut().enumerate().take(u + 1).skip(1) {
            *t = (ln_binomial(u as u64, b as u64) + b as f64 * lp + (u - b) as f64 * lq).exp();
        }
        row[0] = (u as f64 * lq).exp() * -((n - u) as f64 * lq).exp_m1();
    }
    let mut dp = vec![0.0; n + 1];
    dp[n] = 1.0;
    let mut next = vec![0.0; n + 1];
    for _ in 0..n {
        next.iter_mut().for_each(|v| *v = 0.0);
        for u in 0..=n {
            let mass = dp[u];
            if mass == 0.0 {
                continue;
            }
            for b in 0..=u {
                next[u - b] += mass * trans[u][b];
            }
        }
        std::mem::swap(&mut dp, &mut next);
    }
    let x = (n as f64 * lq).exp();
    let zero_row = -(n as f64 * (-x).ln_1p()).exp_m1();
    zero_row + dp[1..].iter().sum::<f64>()
}

/// `2 - 2(1 - (1-p)^n)^n - 4n²(1-p)^{2n-1}`, returned raw (it may be negative).
pub fn zero_rowcol_lower_bound(n: usize, p: f64) -> f64 {
    let nf = n as f64;
    let lq = (-p).ln_1p();
    let x = (nf * lq).exp();
    let first = -2.0 * (nf * (-x).ln_1p()).exp_m1();
    let second = 4.0 * nf * nf * ((2.0 * nf - 1.0) * lq).exp();
    first - second
}

/// Leading-order singularity prediction `2n(1-p)^n`.
pub fn singularity_prediction(n: usize, p: f64) -> f64 {
    2.0 * n as f64 * (n as f64 * (-p).ln_1p()).exp()
}

/// Natural log of the net cardinality bound
/// `2^10 √p n² / (ε² √m) · (9β/ε)^m · C(n, m)`.
pub fn net_cardinality_log(n: usize, m: usize, p: f64, eps: f64, beta: f64) -> Result<f64> {
    if m == 0 || m > n {
        return Err(invalid(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    if !(p > 0.0 && p <= 1.0 && eps > 0.0 && beta > 0.0) {
        return Err(invalid("need p in (0, 1] and positive eps, beta"));
    }
    let (nf, mf) = (n as f64, m as f64);
    Ok(
        10.0 * std::f64::consts::LN_2 + 0.5 * p.ln() + 2.0 * nf.ln() - 2.0 * eps.ln() - 0.5 * mf.ln()
            + mf * (9.0 * beta / eps).ln()
            + ln_binomial(n as u64, m as u64),
    )
}

/// Position of `(n, p)` relative to the window `C ln n <= np`, `p <= 1/C`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeCheck {
    pub n: usize,
    pub p: f64,
    pub c: f64,
    pub np_over_logn: f64,
    pub in_theorem_regime: bool,
}

pub fn regime_check(n: usize, p: f64, c: f64) -> Result<RegimeCheck> {
    if !(c >= 1.0) {
        return Err(invalid(format!("C must be at least 1, got {c}")));
    }
    let nf = n as f64;
    let np = nf * p;
    let np_over_logn = np / nf.ln();
    let in_theorem_regime = c * nf.ln() <= np && p <= 1.0 / c;
    Ok(RegimeCheck {
        n,
        p,
        c,
        np_over_logn,
        in_theorem_regime,
    })
}

/// One line of the bounds table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundsRow {
    pub n: usize,
    pub p: f64,
    /// `None` above [`ZERO_LINE_MAX_N`].
    pub zero_rowcol_exact: Option<f64>,
    pub zero_rowcol_lower_bound: f64,
    pub singularity_prediction: f64,
    pub exact_over_prediction: Option<f64>,
    pub np_over_logn: f64,
    pub in_theorem_regime: bool,
}

pub fn bounds_row(n: usize, p: f64, c: f64) -> Result<BoundsRow> {
    if n == 0 || !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("need n >= 1 and p in (0, 1), got n = {n}, p = {p}")));
    }
    let exact = if n <= ZERO_LINE_MAX_N {
        Some(zero_rowcol_exact(n, p)?)
    } else {
        None
    };
    let prediction = singularity_prediction(n, p);
    let regime = regime_check(n, p, c)?;
    Ok(BoundsRow {
        n,
        p,
        zero_rowcol_exact: exact,
        zero_rowcol_lower_bound: zero_rowcol_lower_bound(n, p),
        singularity_prediction: prediction,
        exact_over_prediction: exact.map(|e| e / prediction),
        np_over_logn: regime.np_over_logn,
        in_theorem_regime: regime.in_theorem_regime,
    })
}

pub const BOUNDS_CSV_HEADER: &str =
    "n,p,zero_rowcol_exact,zero_rowcol_lower_bound,singularity_prediction,exact_over_prediction,np_over_logn,in_theorem_regime";

impl BoundsRow {
    pub fn to_csv(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        format!(
            "{},{},{},{:e},{:e},{},{},{}",
            self.n,
            self.p,
            opt(self.zero_rowcol_exact),
            self.zero_rowcol_lower_bound,
            self.singularity_prediction,
            opt(self.exact_over_prediction),
            self.np_over_logn,
            self.in_theorem_regime
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn h_values() {
        assert_eq!(bennett_h(0.0).unwrap(), 0.0);
        assert_relative_eq!(bennett_h(2.5).unwrap(), 3.5 * 3.5f64.ln() - 2.5, max_relative = 1e-14);
        assert!((bennett_h(2.5).unwrap() - 1.88467).abs() < 1e-5);
        assert!((bennett_h(1.0).unwrap() - 0.38629).abs() < 1e-5);
        assert!(bennett_h(-0.1).is_err());
    }

    #[test]
    fn tail_plug_ins() {
        let log = bennett_tail_tau_log(1000, 0.1, 7.0);
        assert_relative_eq!(log, -700.0 * (7f64.ln() - 1.0), max_relative = 1e-14);
        assert!((log + 662.14).abs() < 0.01, "{log}");
        assert_eq!(bennett_tail_tau(1000, 0.1, 7.0).unwrap(), log.exp());
        assert!(bennett_tail_tau(1000, 0.1, 2.0).is_err());
        assert!(bennett_tail_tau(1000, 0.6, 7.0).is_err());

        assert_eq!(bennett_tail(100, 0.3, 0.0).unwrap(), 1.0);
        let e = bennett_tail_eps(100, 0.2, 0.1).unwrap();
        assert_relative_eq!(e, (-(1.0f64 / 0.32) * (5.0 / 6.0)).exp(), max_relative = 1e-12);
        assert!(bennett_tail_eps(100, 0.2, 0.3).is_err());
        assert!(bennett_tail_eps(100, 0.6, 0.1).is_err());
    }

    #[test]
    fn zero_line_small_cases() {
        for p in [0.1, 0.5, 0.9] {
            assert_relative_eq!(zero_rowcol_exact(1, p).unwrap(), 1.0 - p, max_relative = 1e-12);
        }
        assert!((zero_rowcol_exact(2, 0.5).unwrap() - 0.5625).abs() < 1e-14);
        assert!(zero_rowcol_exact(ZERO_LINE_MAX_N, 0.5).is_ok());
        assert!(zero_rowcol_exact(ZERO_LINE_MAX_N + 1, 0.5).is_err());
    }

    #[test]
    fn both_routes_agree() {
        for (n, p) in [(10, 0.3), (40, 0.1), (80, 0.08), (150, 0.05)] {
            let (ie, cancellation) = inclusion_exclusion(n, p);
            assert!(cancellation < 1e3, "n={n} p={p} cancellation={cancellation}");
            assert_relative_eq!(ie, coverage_recursion(n, p), max_relative = 1e-10);
        }
        let small_p = zero_rowcol_exact_detailed(100, 0.001).unwrap();
        assert_eq!(small_p.method, ZeroLineMethod::CoverageRecursion);
        assert!(small_p.value > 0.99 && small_p.value <= 1.0);
    }

    #[test]
    fn prediction_and_lower_bound() {
        assert!((singularity_prediction(100, 0.1) - 5.312e-3).abs() < 1e-6);
        assert_eq!(singularity_prediction(7, 0.0), 14.0);
        assert!((zero_rowcol_lower_bound(2, 0.5) + 1.125).abs() < 1e-14);
        // Near p = 1 the bound is positive but negligible.
        let lb = zero_rowcol_lower_bound(10, 0.999);
        assert!(lb > 0.0 && lb < 1e-28 && lb <= zero_rowcol_exact(10, 0.999).unwrap());
    }

    #[test]
    fn net_bound() {
        let direct = (1024.0 * 0.1 * 1e4 / 10f64.sqrt()).ln() + 10.0 * 9f64.ln() + ln_binomial(100, 10);
        assert_relative_eq!(
            net_cardinality_log(100, 10, 0.01, 1.0, 1.0).unwrap(),
            direct,
            max_relative = 1e-12
        );
        assert!(net_cardinality_log(5, 6, 0.1, 1.0, 1.0).is_err());
    }

    #[test]
    fn regimes() {
        let r = regime_check(10_000, 0.01, 5.0).unwrap();
        assert!(r.in_theorem_regime);
        assert!((r.np_over_logn - 100.0 / 10_000f64.ln()).abs() < 1e-12);
        assert!(!regime_check(10_000, 0.5, 5.0).unwrap().in_theorem_regime);
        assert!(!regime_check(10, 0.01, 5.0).unwrap().in_theorem_regime);
        assert!(regime_check(10, 0.01, 0.5).is_err());
    }
}
