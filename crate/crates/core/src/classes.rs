//! Vector classes and the classifier.
//!
//! Vectors are compared through their order statistics: `x*_i` is the `i`-th
//! largest absolute value (1-based) and `σ_x` the permutation realising it,
//! with ties broken by lowest index. `x#` is the signed non-increasing
//! rearrangement. The set `ϒ_n(r)` holds the vectors with `x*_{⌊rn⌋} = 1`.
//!
//! In the general mode a vector is normalised into `ϒ_n(r)` and then tested,
//! in order, for gradual non-constant behaviour (`V_n`), for a steep jump on
//! the ladder (`T0`, `T1_j`, `T2`, `T3`) and for membership in an `R` class.
//! In the constant-p mode the steep and `R` tests are replaced by the
//! `B1`..`B4` classes evaluated on `x/‖x‖`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{invalid, Error, Result};

/// Tolerance used when checking that a vector is normalised.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Number of interior points of the geometric `k` grid in the `R` scan.
pub const R_GRID_POINTS: usize = 62;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GrowthFunction {
    /// `g(t) = (2t)^{3/2}`.
    ConstP,
    /// `(2t)^{3/2}` below `64pn`, `exp(ln²(2t))` from there on.
    General { p: f64, n: usize },
}

impl GrowthFunction {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            GrowthFunction::ConstP => (2.0 * t).powf(1.5),
            GrowthFunction::General { p, n } => {
                if t < 64.0 * p * n as f64 {
                    (2.0 * t).powf(1.5)
                } else {
                    (2.0 * t).ln().powi(2).exp()
                }
            }
        }
    }

    /// `ln g(t)`, finite where `g` itself overflows.
    pub fn ln_eval(&self, t: f64) -> f64 {
        match *self {
            GrowthFunction::General { p, n } if t >= 64.0 * p * n as f64 => (2.0 * t).ln().powi(2),
            _ => 1.5 * (2.0 * t).ln(),
        }
    }

    /// `Σ_j j 2^{-j} ln g(2^j)` truncated after `terms` terms, the logarithm
    /// of the product bounded by `K3`.
    pub fn product_log(&self, terms: u32) -> f64 {
        (1..=terms)
            .map(|j| j as f64 * 0.5f64.powi(j as i32) * self.ln_eval(2f64.powi(j as i32)))
            .sum()
    }
}

/// First `(a, t)` on the grids with `g(a t) < g(t) + a`, if any.
pub fn growth_condition_violation(g: &GrowthFunction, a_grid: &[f64], t_grid: &[f64]) -> Option<(f64, f64)> {
    for &a in a_grid {
        for &t in t_grid {
            if a >= 2.0 && t >= 1.0 && g.eval(a * t) < g.eval(t) + a {
                return Some((a, t));
            }
        }
    }
    None
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClassifierMode {
    General,
    ConstantP { m: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassifierConfig {
    pub n: usize,
    pub p: f64,
    pub r: f64,
    pub delta: f64,
    pub rho: f64,
    pub c_tau: f64,
    /// Width constant of the shifted sparse sets.
    pub c0: f64,
    /// Constant in `β_p = √p / C_0` and in the `R` flatness ratio.
    pub big_c0: f64,
    pub growth: GrowthFunction,
    pub mode: ClassifierMode,
}

impl ClassifierConfig {
    pub fn new(n: usize, p: f64) -> Self {
        let r = 0.01;
        Self {
            n,
            p,
            r,
            delta: r / 3.01,
            rho: 0.1,
            c_tau: 100.0,
            c0: 1e-3,
            big_c0: 20.0,
            growth: GrowthFunction::General { p, n },
            mode: ClassifierMode::General,
        }
    }

    pub fn constant_p(n: usize, p: f64, m: usize) -> Self {
        Self {
            growth: GrowthFunction::ConstP,
            mode: ClassifierMode::ConstantP { m },
            ..Self::new(n, p)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |x: f64| x > 0.0 && x.is_finite();
        if self.n < 2 {
            return Err(invalid(format!("n must be at least 2, got {}", self.n)));
        }
        if !(self.p > 0.0 && self.p < 1.0) {
            return Err(invalid(format!("p must lie in (0, 1), got {}", self.p)));
        }
        if !(self.r > 0.0 && self.r < 1.0) {
            return Err(invalid(format!("r must lie in (0, 1), got {}", self.r)));
        }
        if !(self.delta > 0.0 && self.delta < self.r / 3.0) {
            return Err(invalid(format!("delta must lie in (0, r/3), got {}", self.delta)));
        }
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(invalid(format!("rho must lie in (0, 1), got {}", self.rho)));
        }
        if !(positive(self.c_tau) && positive(self.c0) && positive(self.big_c0)) {
            return Err(invalid("C_tau, c0 and C0 must be positive"));
        }
        if let ClassifierMode::ConstantP { m } = self.mode {
            if m == 0 || m > self.n {
                return Err(invalid(format!("m must lie in [1, n], got {m}")));
            }
        }
        if self.upsilon_rank() < 2 {
            return Err(Error::Regime(format!(
                "floor(r n) = {} is below 2",
                self.upsilon_rank()
            )));
        }
        Ok(())
    }

    /// `⌊rn⌋`.
    pub fn upsilon_rank(&self) -> usize {
        floor_rank(self.r, self.n)
    }

    /// `⌈δn⌉`.
    pub fn cond2_rank(&self) -> usize {
        (self.delta * self.n as f64).ceil() as usize
    }

    /// `β_p = √p / C_0`.
    pub fn beta_p(&self) -> f64 {
        self.p.sqrt() / self.big_c0
    }
}

fn floor_rank(r: f64, n: usize) -> usize {
    (r * n as f64).floor() as usize
}

/// One link of the steep chain: the class holds when
/// `x*_{high_rank} > factor · x*_{low_rank}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SteepTest {
    pub label: Label,
    pub high_rank: usize,
    pub low_rank: usize,
    pub factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SteepLadder {
    pub d: f64,
    pub ell0: usize,
    pub s0: usize,
    /// `n_0, ..., n_{s0+3}`.
    pub ranks: Vec<usize>,
    pub kappa: f64,
}

impl SteepLadder {
    pub fn new(n: usize, p: f64, r: f64) -> Result<Self> {
        crate::matrix::validate_np(n, p)?;
        if !(p < 1.0) || p == 0.0 {
            return Err(invalid(format!("p must lie in (0, 1), got {p}")));
        }
        let d = p * n as f64;
        let ell0_real = (d / (4.0 * (1.0 / p).ln())).floor();
        if ell0_real < 2.0 {
            return Err(Error::Regime(format!("ell0 = {ell0_real} is below 2 (pn = {d})")));
        }
        let ell0 = ell0_real as usize;
        let target = 1.0 / (64.0 * p);
        let mut s0 = 0usize;
        while (ell0 as f64).powi(s0 as i32) <= target {
            s0 += 1;
        }
        let mut ranks = vec![2usize];
        for j in 1..=s0 {
            ranks.push(30 * ell0.pow(j as u32 - 1));
        }
        let last = *ranks.last().expect("nonempty");
        let candidate = target.floor() as usize;
        ranks.push(if candidate >= 15 * last { candidate } else { last });
        ranks.push((n as f64 / p).sqrt().floor() as usize);
        ranks.push(floor_rank(r, n));
        if ranks[s0 + 2] <= ranks[s0 + 1] {
            return Err(Error::Regime(format!(
                "n_(s0+2) = {} does not exceed n_(s0+1) = {}",
                ranks[s0 + 2],
                ranks[s0 + 1]
            )));
        }
        if let Some(&big) = ranks.iter().find(|&&k| k > n || k == 0) {
            return Err(Error::Regime(format!("ladder rank {big} outside [1, {n}]")));
        }
        Ok(Self {
            d,
            ell0,
            s0,
            ranks,
            kappa: (6.0 * d).ln() / (ell0 as f64).ln(),
        })
    }

    /// The chain `T0, T1_1, ..., T1_{s0+1}, T2, T3` in evaluation order.
    pub fn tests(&self, c_tau: f64) -> Vec<SteepTest> {
        let jump = 6.0 * self.d;
        let mut out = vec![SteepTest {
            label: Label::T0,
            high_rank: 1,
            low_rank: 2,
            factor: jump,
        }];
        for j in 1..=self.s0 + 1 {
            out.push(SteepTest {
                label: Label::T1(j),
                high_rank: self.ranks[j - 1],
                low_rank: self.ranks[j],
                factor: jump,
            });
        }
        let wide = c_tau * self.d.sqrt();
        for (label, j) in [(Label::T2, self.s0 + 2), (Label::T3, self.s0 + 3)] {
            out.push(SteepTest {
                label,
                high_rank: self.ranks[j - 1],
                low_rank: self.ranks[j],
                factor: wide,
            });
        }
        out
    }

    /// Admissible `k` for the `R` classes: `n_{s0+1} < k <= n / ln² d`.
    pub fn r_range(&self, n: usize) -> Option<(usize, usize)> {
        let lo = self.ranks[self.s0 + 1] + 1;
        let ln_d = self.d.ln();
        let hi = if ln_d > 1.0 {
            (n as f64 / (ln_d * ln_d)).floor() as usize
        } else {
            n
        };
        let hi = hi.min(n);
        (lo <= hi).then_some((lo, hi))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Vn,
    T0,
    T1(usize),
    T2,
    T3,
    R1(usize),
    R2(usize),
    B1,
    B2,
    B3(usize),
    B4(usize),
    Unclassified,
}

impl Label {
    /// The label without its index, used for histograms.
    pub fn family(&self) -> &'static str {
        match self {
            Label::Vn => "Vn",
            Label::T0 => "T0",
            Label::T1(_) => "T1",
            Label::T2 => "T2",
            Label::T3 => "T3",
            Label::R1(_) => "R1",
            Label::R2(_) => "R2",
            Label::B1 => "B1",
            Label::B2 => "B2",
            Label::B3(_) => "B3",
            Label::B4(_) => "B4",
            Label::Unclassified => "unclassified",
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::T1(j) | Label::R1(j) | Label::R2(j) | Label::B3(j) | Label::B4(j) => {
                write!(f, "{}_{j}", self.family())
            }
            _ => f.write_str(self.family()),
        }
    }
}

impl Serialize for Label {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// Certificate that `x` lies in `U(m, γ)`: off the `excluded` coordinates
/// every entry is within `γ/√n` of `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UWitness {
    pub excluded: Vec<usize>,
    pub lambda: f64,
    pub gamma: f64,
}

impl UWitness {
    pub fn verify(&self, x: &[f64], m: usize) -> bool {
        let n = x.len();
        let mut seen = vec![false; n];
        for &i in &self.excluded {
            if i >= n || seen[i] {
                return false;
            }
            seen[i] = true;
        }
        let width = self.gamma / (n as f64).sqrt();
        self.excluded.len() == m.min(n)
            && self.lambda.abs() <= 2.0 / (m as f64).sqrt()
            && x.iter()
                .zip(&seen)
                .all(|(&v, &out)| out || (v - self.lambda).abs() <= width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// `V_n`: `max_{Q2} x <= min_{Q1} x - ρ`, and every `x*_i <= g(n/i)`.
    Gradual {
        q1: Vec<usize>,
        q2: Vec<usize>,
        gap: f64,
    },
    /// Steep classes: `high > factor · low`.
    Jump {
        high_rank: usize,
        low_rank: usize,
        high: f64,
        low: f64,
        factor: f64,
    },
    /// `R` classes on the tail `A = [k, n]`.
    Flat {
        k: usize,
        tail_norm: f64,
        tail_max: f64,
        ac_lambda: Option<f64>,
    },
    /// `B1`: `x*_1 > 6pn x*_2` on the unit vector.
    Spike {
        x1: f64,
        x2: f64,
    },
    /// `B2`, `B3_k`, `B4_k`: `level` is `x*_1`, `‖Qx‖` or `x*_2` respectively.
    Shifted {
        level: f64,
        u: UWitness,
    },
    None,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassLabel {
    pub label: Label,
    /// The scale `x*_{⌊rn⌋}` divided out, or `None` when it vanishes.
    pub normalization: Option<f64>,
    pub witness: Witness,
    /// Tests evaluated and failed before the matching one.
    pub chain: Vec<Label>,
}

/// Result of scaling into `ϒ_n(r)`.
#[derive(Debug, Clone, PartialEq)]
pub enum Upsilon {
    Normalized { vector: Vec<f64>, scale: f64 },
    Degenerate,
}

fn check_finite(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(invalid("vector has non-finite entries"));
    }
    Ok(())
}

/// Indices sorted by decreasing magnitude, ties by lowest index.
pub fn magnitude_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    idx
}

/// Indices sorted by decreasing signed value, ties by lowest index.
pub fn signed_order(x: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..x.len()).collect();
    idx.sort_by(|&a, &b| x[b].total_cmp(&x[a]));
    idx
}

/// `x*_1 >= x*_2 >= ... >= x*_n`, stored 0-based.
pub fn order_statistics(x: &[f64]) -> Vec<f64> {
    let mut mags: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    mags.sort_by(|a, b| b.total_cmp(a));
    mags
}

pub fn normalize_upsilon(x: &[f64], r: f64) -> Result<Upsilon> {
    check_finite(x)?;
    let n = x.len();
    if !(r > 0.0 && r < 1.0) {
        return Err(invalid(format!("r must lie in (0, 1), got {r}")));
    }
    if (n as f64) < (1.0 / r).ceil() {
        return Err(invalid(format!("n = {n} is below ceil(1/r)")));
    }
    if x.iter().all(|&v| v == 0.0) {
        return Err(Error::ZeroVector);
    }
    let scale = order_statistics(x)[floor_rank(r, n) - 1];
    if scale == 0.0 {
        return Ok(Upsilon::Degenerate);
    }
    Ok(Upsilon::Normalized {
        vector: x.iter().map(|v| v / scale).collect(),
        scale,
    })
}

fn check_upsilon(mags: &[f64], r: f64) -> Result<()> {
    let k = floor_rank(r, mags.len());
    if k == 0 || (mags[k - 1] - 1.0).abs() > NORMALIZATION_TOL {
        return Err(Error::Unnormalized(format!("x*_floor(rn) must equal 1 (rank {k})")));
    }
    Ok(())
}

/// First rank `i` (1-based) with `x*_i > g(n/i)`.
pub fn gradual_violation(x: &[f64], g: &GrowthFunction) -> Option<usize> {
    gradual_violation_sorted(&order_statistics(x), g)
}

fn gradual_violation_sorted(mags: &[f64], g: &GrowthFunction) -> Option<usize> {
    let n = mags.len() as f64;
    (1..=mags.len()).find(|&i| mags[i - 1] > g.eval(n / i as f64))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cond2Witness {
    pub q1: Vec<usize>,
    pub q2: Vec<usize>,
    pub gap: f64,
}

/// Tests `x#_k - x#_{n-k+1} >= ρ` with `k = ⌈δn⌉`; on success `Q1` and `Q2`
/// are the top and bottom `k` positions of the signed rearrangement.
pub fn cond2_witness(x: &[f64], delta: f64, rho: f64) -> Option<Cond2Witness> {
    let n = x.len();
    let k = ((delta * n as f64).ceil() as usize).max(1);
    if k > n {
        return None;
    }
    let order = signed_order(x);
    let gap = x[order[k - 1]] - x[order[n - k]];
    (gap >= rho).then(|| Cond2Witness {
        q1: order[..k].to_vec(),
        q2: order[n - k..].to_vec(),
        gap,
    })
}

/// Membership in `V_n`; the witness carries `Q1`, `Q2`.
pub fn in_vn(x: &[f64], cfg: &ClassifierConfig) -> Result<Option<Cond2Witness>> {
    check_finite(x)?;
    let mags = order_statistics(x);
    check_upsilon(&mags, cfg.r)?;
    if gradual_violation_sorted(&mags, &cfg.growth).is_some() {
        return Ok(None);
    }
    Ok(cond2_witness(x, cfg.delta, cfg.rho))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlmostConstantWitness {
    pub a: Vec<usize>,
    pub lambda: f64,
}

/// For `x` in `ϒ_n(r)` failing cond2: the middle block `A` of the signed
/// rearrangement (positions `k < i <= n-k`) together with `λ = ±1` such that
/// `|x_i - λ| < ρ` on `A` and `|A| > n - ⌊rn⌋`.
pub fn ac_cond2_witness(x: &[f64], cfg: &ClassifierConfig) -> Option<AlmostConstantWitness> {
    let n = x.len();
    let k = cfg.cond2_rank();
    if 2 * k >= n {
        return None;
    }
    let order = signed_order(x);
    let a = order[k..n - k].to_vec();
    let lambda = if x[a[0]] > 0.0 { 1.0 } else { -1.0 };
    let ok = a.len() + floor_rank(cfg.r, n) > n && a.iter().all(|&i| (x[i] - lambda).abs() < cfg.rho);
    ok.then_some(AlmostConstantWitness { a, lambda })
}

/// Membership in `AC(ρ)`: returns `λ = ±x*_{⌊rn⌋}` with
/// `#{i : |x_i - λ| <= ρ|λ|} > n - ⌊rn⌋`.
pub fn in_ac(x: &[f64], cfg: &ClassifierConfig) -> Option<f64> {
    let n = x.len();
    let k = floor_rank(cfg.r, n);
    if k == 0 {
        return None;
    }
    let level = order_statistics(x)[k - 1];
    ac_count_lambda(x, level, cfg.rho, k)
}

fn ac_count_lambda(x: &[f64], level: f64, rho: f64, k: usize) -> Option<f64> {
    [level, -level].into_iter().find(|&lambda| ac_holds(x, lambda, rho, k))
}

fn ac_holds(x: &[f64], lambda: f64, rho: f64, k: usize) -> bool {
    let close = x.iter().filter(|&&v| (v - lambda).abs() <= rho * lambda.abs()).count();
    close + k > x.len()
}

/// Membership in `U(m, γ)`: some `n - m` coordinates lie within `γ/√n` of a
/// common `λ` with `|λ| <= 2/√m`.
pub fn in_u(x: &[f64], m: usize, gamma: f64) -> Option<UWitness> {
    let n = x.len();
    if m >= n {
        return Some(UWitness {
            excluded: (0..n).collect(),
            lambda: 0.0,
            gamma,
        });
    }
    let cap = if m == 0 { f64::INFINITY } else { 2.0 / (m as f64).sqrt() };
    let width = gamma / (n as f64).sqrt();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let keep = n - m;
    for start in 0..=m {
        let lo = (x[order[start + keep - 1]] - width).max(-cap);
        let hi = (x[order[start]] + width).min(cap);
        if lo <= hi {
            let lambda = if lo <= 0.0 && 0.0 <= hi { 0.0 } else { 0.5 * (lo + hi) };
            let mut excluded: Vec<usize> = order[..start].iter().chain(&order[start + keep..]).copied().collect();
            excluded.sort_unstable();
            let w = UWitness {
                excluded,
                lambda,
                gamma,
            };
            // Rounding can still push a boundary entry one ulp outside.
            if w.verify(x, m) {
                return Some(w);
            }
        }
    }
    None
}

/// Zeroes the largest-magnitude coordinate (lowest index on ties).
pub fn q_drop_max(x: &[f64]) -> Vec<f64> {
    let mut out = x.to_vec();
    if let Some(&i) = magnitude_order(x).first() {
        out[i] = 0.0;
    }
    out
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Membership in `V(β)`: `‖x‖_∞ <= 1` and `‖Qx‖ <= β`.
pub fn in_vbeta(x: &[f64], beta: f64) -> bool {
    x.iter().all(|v| v.abs() <= 1.0) && norm(&q_drop_max(x)) <= beta
}

/// `|||x|||² = ‖P x‖² + pn ⟨x, e⟩²` with `e = 1/√n` and `P` the projection
/// onto `e^⊥`.
pub fn triple_norm(x: &[f64], p: f64) -> f64 {
    let n = x.len() as f64;
    if x.is_empty() {
        return 0.0;
    }
    let mean = x.iter().sum::<f64>() / n;
    let perp: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let along = mean * mean * n;
    (perp + p * n * along).sqrt()
}

/// Evaluates the steep chain on order statistics; returns the matching test
/// and the labels of the tests that failed before it.
fn steep_chain(mags: &[f64], tests: &[SteepTest]) -> (Option<SteepTest>, Vec<Label>) {
    let mut failed = Vec::new();
    for t in tests {
        if steep_holds(mags, t) {
            return (Some(*t), failed);
        }
        failed.push(t.label);
    }
    (None, failed)
}

fn steep_holds(mags: &[f64], t: &SteepTest) -> bool {
    mags[t.high_rank - 1] > t.factor * mags[t.low_rank - 1]
}

pub fn classify_steep(x: &[f64], ladder: &SteepLadder, cfg: &ClassifierConfig) -> Result<Option<Label>> {
    check_finite(x)?;
    if ladder.ranks.iter().any(|&k| k > x.len()) {
        return Err(invalid("ladder does not fit the vector length"));
    }
    Ok(steep_chain(&order_statistics(x), &ladder.tests(cfg.c_tau))
        .0
        .map(|t| t.label))
}

/// `Σ_{i >= k} x*_i²` for every `k` (1-based), with a trailing zero.
fn tail_squares(mags: &[f64]) -> Vec<f64> {
    let mut tail = vec![0.0; mags.len() + 2];
    for i in (1..=mags.len()).rev() {
        tail[i] = tail[i + 1] + mags[i - 1] * mags[i - 1];
    }
    tail
}

fn r_holds(x: &[f64], mags: &[f64], tail: &[f64], k: usize, s: u8, cfg: &ClassifierConfig, d: f64) -> Option<Witness> {
    let n = mags.len() as f64;
    let tail_norm = tail[k].sqrt();
    let tail_max = mags[k - 1];
    if tail_norm < cfg.big_c0 / cfg.p.sqrt() * tail_max {
        return None;
    }
    let ac_lambda = match s {
        1 => {
            if !(tail_norm >= (n / 2.0).sqrt() && tail_norm <= cfg.c_tau * (d * n).sqrt()) {
                return None;
            }
            Some(in_ac(x, cfg)?)
        }
        _ => {
            if !(tail_norm >= 2.0 * n.sqrt() / cfg.r && tail_norm <= cfg.c_tau * cfg.c_tau * d * n.sqrt()) {
                return None;
            }
            None
        }
    };
    Some(Witness::Flat {
        k,
        tail_norm,
        tail_max,
        ac_lambda,
    })
}

/// Membership in `R_k^s` (the exclusion of the steep classes is left to the
/// caller).
pub fn in_r(x: &[f64], k: usize, s: u8, ladder: &SteepLadder, cfg: &ClassifierConfig) -> Result<bool> {
    check_finite(x)?;
    let mags = order_statistics(x);
    check_upsilon(&mags, cfg.r)?;
    if !matches!(s, 1 | 2) {
        return Err(invalid(format!("s must be 1 or 2, got {s}")));
    }
    match ladder.r_range(x.len()) {
        Some((lo, hi)) if (lo..=hi).contains(&k) => {}
        _ => return Err(invalid(format!("k = {k} outside the admissible range"))),
    }
    Ok(r_holds(x, &mags, &tail_squares(&mags), k, s, cfg, ladder.d).is_some())
}

/// `k` values scanned for the `R` classes: both endpoints plus a geometric
/// grid in between.
pub fn r_grid(lo: usize, hi: usize) -> Vec<usize> {
    let mut ks = vec![lo, hi];
    let ratio = (hi as f64 / lo as f64).ln();
    for i in 1..=R_GRID_POINTS {
        let k = (lo as f64 * (ratio * i as f64 / (R_GRID_POINTS + 1) as f64).exp()).round() as usize;
        ks.push(k.clamp(lo, hi));
    }
    ks.sort_unstable();
    ks.dedup();
    ks
}

/// `a_1 = start`, `a_{k+1} = 3 a_k` while below `1/3`, then the first value in
/// `[1/3, 1)` if any, then `1`.
fn tripling_ladder(start: f64) -> Vec<f64> {
    let mut out = Vec::new();
    let mut v = start;
    while v < 1.0 / 3.0 {
        out.push(v);
        v *= 3.0;
    }
    if v < 1.0 {
        out.push(v);
    }
    out.push(1.0);
    out
}

pub fn lambda_ladder(n: usize, p: f64) -> Vec<f64> {
    tripling_ladder(1.0 / (6.0 * p * n as f64))
}

pub fn mu_ladder(n: usize, p: f64, beta_p: f64) -> Vec<f64> {
    tripling_ladder(beta_p / (6.0 * p * n as f64))
}

fn ladder_slot(ladder: &[f64], v: f64) -> Option<usize> {
    ladder.windows(2).position(|w| w[0] <= v && v < w[1]).map(|i| i + 1)
}

fn check_unit(x: &[f64]) -> Result<()> {
    let nx = norm(x);
    if (nx - 1.0).abs() > 1e-10 {
        return Err(Error::Unnormalized(format!("Euclidean norm is {nx}")));
    }
    Ok(())
}

/// Constant-p classes of a unit vector, or `None`.
pub fn classify_constp(x: &[f64], m: usize, cfg: &ClassifierConfig) -> Result<Option<(Label, Witness)>> {
    check_finite(x)?;
    check_unit(x)?;
    if m == 0 || m > x.len() {
        return Err(invalid(format!("m must lie in [1, n], got {m}")));
    }
    let n = x.len();
    let pn = cfg.p * n as f64;
    let beta = cfg.beta_p();
    let mags = order_statistics(x);
    let (x1, x2) = (mags[0], mags.get(1).copied().unwrap_or(0.0));
    if x1 > 6.0 * pn * x2 {
        return Ok(Some((Label::B1, Witness::Spike { x1, x2 })));
    }
    if x1 <= beta {
        return Ok(in_u(x, m, cfg.c0).map(|u| (Label::B2, Witness::Shifted { level: x1, u })));
    }
    let q_norm = norm(&q_drop_max(x));
    if x2 <= beta * q_norm {
        let ladder = lambda_ladder(n, cfg.p);
        let Some(k) = ladder_slot(&ladder, q_norm) else {
            return Ok(None);
        };
        return Ok(in_u(x, m, cfg.c0 * ladder[k - 1]).map(|u| (Label::B3(k), Witness::Shifted { level: q_norm, u })));
    }
    let ladder = mu_ladder(n, cfg.p, beta);
    let Some(k) = ladder_slot(&ladder, x2) else {
        return Ok(None);
    };
    let gamma = cfg.c0 * ladder[k - 1] / (1.0 + (1.0 / cfg.p).ln()).sqrt();
    Ok(in_u(x, m, gamma).map(|u| (Label::B4(k), Witness::Shifted { level: x2, u })))
}

/// A validated configuration together with its ladder.
#[derive(Debug, Clone)]
pub struct Classifier {
    cfg: ClassifierConfig,
    ladder: Option<SteepLadder>,
    tests: Vec<SteepTest>,
}

impl Classifier {
    pub fn new(cfg: ClassifierConfig) -> Result<Self> {
        cfg.validate()?;
        let (ladder, tests) = match cfg.mode {
            ClassifierMode::General => {
                let ladder = SteepLadder::new(cfg.n, cfg.p, cfg.r)?;
                let tests = ladder.tests(cfg.c_tau);
                (Some(ladder), tests)
            }
            ClassifierMode::ConstantP { .. } => (None, Vec::new()),
        };
        Ok(Self { cfg, ladder, tests })
    }

    pub fn config(&self) -> &ClassifierConfig {
        &self.cfg
    }

    pub fn ladder(&self) -> Option<&SteepLadder> {
        self.ladder.as_ref()
    }

    fn check_input(&self, x: &[f64]) -> Result<()> {
        check_finite(x)?;
        if x.len() != self.cfg.n {
            return Err(invalid(format!(
                "vector length {} differs from n = {}",
                x.len(),
                self.cfg.n
            )));
        }
        Ok(())
    }

    pub fn classify(&self, x: &[f64]) -> Result<ClassLabel> {
        self.check_input(x)?;
        let (v, scale) = match normalize_upsilon(x, self.cfg.r)? {
            Upsilon::Normalized { vector, scale } => (vector, Some(scale)),
            Upsilon::Degenerate => (x.to_vec(), None),
        };
        let mags = order_statistics(&v);
        let mut chain = Vec::new();
        let done = |label, witness, chain| {
            Ok(ClassLabel {
                label,
                normalization: scale,
                witness,
                chain,
            })
        };
        if scale.is_some() {
            if gradual_violation_sorted(&mags, &self.cfg.growth).is_none() {
                if let Some(w) = cond2_witness(&v, self.cfg.delta, self.cfg.rho) {
                    return done(
                        Label::Vn,
                        Witness::Gradual {
                            q1: w.q1,
                            q2: w.q2,
                            gap: w.gap,
                        },
                        chain,
                    );
                }
            }
            chain.push(Label::Vn);
        }
        if let ClassifierMode::ConstantP { m } = self.cfg.mode {
            let nx = norm(x);
            let unit: Vec<f64> = x.iter().map(|a| a / nx).collect();
            return match classify_constp(&unit, m, &self.cfg)? {
                Some((label, witness)) => done(label, witness, chain),
                None => done(Label::Unclassified, Witness::None, chain),
            };
        }
        let (hit, failed) = steep_chain(&mags, &self.tests);
        chain.extend(failed);
        if let Some(t) = hit {
            let witness = Witness::Jump {
                high_rank: t.high_rank,
                low_rank: t.low_rank,
                high: mags[t.high_rank - 1],
                low: mags[t.low_rank - 1],
                factor: t.factor,
            };
            return done(t.label, witness, chain);
        }
        if scale.is_some() {
            let ladder = self.ladder.as_ref().expect("general mode has a ladder");
            if let Some((lo, hi)) = ladder.r_range(self.cfg.n) {
                let tail = tail_squares(&mags);
                for k in r_grid(lo, hi) {
                    for s in [1u8, 2] {
                        if let Some(w) = r_holds(&v, &mags, &tail, k, s, &self.cfg, ladder.d) {
                            let label = if s == 1 { Label::R1(k) } else { Label::R2(k) };
                            return done(label, w, chain);
                        }
                    }
                }
            }
        }
        done(Label::Unclassified, Witness::None, chain)
    }

    /// Re-checks the defining inequality of `label` on `x`, and that every
    /// test recorded in the chain indeed fails.
    pub fn verify(&self, x: &[f64], label: &ClassLabel) -> Result<bool> {
        self.check_input(x)?;
        let v = match normalize_upsilon(x, self.cfg.r)? {
            Upsilon::Normalized { vector, .. } => vector,
            Upsilon::Degenerate => x.to_vec(),
        };
        let mags = order_statistics(&v);
        let normalized = label.normalization.is_some();
        for failed in &label.chain {
            let fails = match failed {
                Label::Vn => {
                    !normalized
                        || gradual_violation_sorted(&mags, &self.cfg.growth).is_some()
                        || cond2_witness(&v, self.cfg.delta, self.cfg.rho).is_none()
                }
                other => match self.tests.iter().find(|t| t.label == *other) {
                    Some(t) => !steep_holds(&mags, t),
                    None => false,
                },
            };
            if !fails {
                return Ok(false);
            }
        }
        let n = self.cfg.n;
        let ok = match (&label.label, &label.witness) {
            (Label::Vn, Witness::Gradual { q1, q2, gap }) => {
                let need = self.cfg.delta * n as f64;
                let valid = |q: &Vec<usize>| q.len() as f64 >= need && q.iter().all(|&i| i < n);
                if !(normalized && valid(q1) && valid(q2)) {
                    return Ok(false);
                }
                let min_q1 = q1.iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
                let max_q2 = q2.iter().map(|&i| v[i]).fold(f64::NEG_INFINITY, f64::max);
                gradual_violation_sorted(&mags, &self.cfg.growth).is_none()
                    && max_q2 <= min_q1 - self.cfg.rho
                    && (min_q1 - max_q2 - gap).abs() <= 1e-12 * gap.abs().max(1.0)
            }
            (
                Label::T0 | Label::T1(_) | Label::T2 | Label::T3,
                Witness::Jump {
                    high_rank,
                    low_rank,
                    factor,
                    ..
                },
            ) => match self.tests.iter().find(|t| t.label == label.label) {
                Some(t) => {
                    t.high_rank == *high_rank && t.low_rank == *low_rank && t.factor == *factor && steep_holds(&mags, t)
                }
                None => false,
            },
            (Label::R1(k) | Label::R2(k), Witness::Flat { k: wk, ac_lambda, .. }) => {
                let s = if matches!(label.label, Label::R1(_)) { 1 } else { 2 };
                let ladder = match &self.ladder {
                    Some(l) => l,
                    None => return Ok(false),
                };
                let in_range = ladder.r_range(n).is_some_and(|(lo, hi)| (lo..=hi).contains(k));
                let ac_ok = match (s, ac_lambda) {
                    (1, Some(l)) => {
                        let k_up = self.cfg.upsilon_rank();
                        (l.abs() - mags[k_up - 1]).abs() == 0.0 && ac_holds(&v, *l, self.cfg.rho, k_up)
                    }
                    (2, None) => true,
                    _ => false,
                };
                normalized
                    && wk == k
                    && in_range
                    && ac_ok
                    && r_holds(&v, &mags, &tail_squares(&mags), *k, s, &self.cfg, ladder.d).is_some()
            }
            (Label::B1 | Label::B2 | Label::B3(_) | Label::B4(_), w) => self.verify_constp(x, label.label, w),
            (Label::Unclassified, Witness::None) => true,
            _ => false,
        };
        Ok(ok)
    }

    fn verify_constp(&self, x: &[f64], label: Label, w: &Witness) -> bool {
        let ClassifierMode::ConstantP { m } = self.cfg.mode else {
            return false;
        };
        let nx = norm(x);
        let u: Vec<f64> = x.iter().map(|a| a / nx).collect();
        let n = u.len();
        let pn = self.cfg.p * n as f64;
        let beta = self.cfg.beta_p();
        let mags = order_statistics(&u);
        let (x1, x2) = (mags[0], mags.get(1).copied().unwrap_or(0.0));
        let not_b1 = x1 <= 6.0 * pn * x2;
        let q_norm = norm(&q_drop_max(&u));
        match (label, w) {
            (Label::B1, Witness::Spike { .. }) => !not_b1,
            (Label::B2, Witness::Shifted { u: uw, .. }) => {
                not_b1 && x1 <= beta && uw.gamma == self.cfg.c0 && uw.verify(&u, m)
            }
            (Label::B3(k), Witness::Shifted { u: uw, .. }) => {
                let ladder = lambda_ladder(n, self.cfg.p);
                not_b1
                    && x1 > beta
                    && x2 <= beta * q_norm
                    && k >= 1
                    && k < ladder.len()
                    && ladder[k - 1] <= q_norm
                    && q_norm < ladder[k]
                    && uw.gamma == self.cfg.c0 * ladder[k - 1]
                    && uw.verify(&u, m)
            }
            (Label::B4(k), Witness::Shifted { u: uw, .. }) => {
                let ladder = mu_ladder(n, self.cfg.p, beta);
                not_b1
                    && x1 > beta
                    && x2 > beta * q_norm
                    && k >= 1
                    && k < ladder.len()
                    && ladder[k - 1] <= x2
                    && x2 < ladder[k]
                    && uw.verify(&u, m)
            }
            _ => false,
        }
    }
}

pub fn classify(x: &[f64], cfg: &ClassifierConfig) -> Result<ClassLabel> {
    Classifier::new(*cfg)?.classify(x)
}

/// Draws a vector of `ϒ_n(r)`: independent random signs times magnitudes
/// from one of several families (Gaussian, uniform, Pareto, Gaussian with a
/// few large spikes, sparse Gaussian, exponential decay), then normalised.
pub fn sample_upsilon<R: Rng + ?Sized>(n: usize, r: f64, rng: &mut R) -> Result<Vec<f64>> {
    let k = floor_rank(r, n);
    if k == 0 || !(r < 1.0) {
        return Err(invalid(format!("floor(r n) must be positive, got r = {r}, n = {n}")));
    }
    let gauss = |rng: &mut R| rng.sample::<f64, _>(StandardNormal).abs();
    let mut mags: Vec<f64> = match rng.random_range(0..6u8) {
        0 => (0..n).map(|_| gauss(rng)).collect(),
        1 => (0..n).map(|_| 1.0 - rng.random::<f64>()).collect(),
        2 => {
            let a = rng.random_range(0.2..1.5);
            (0..n).map(|_| (1.0 - rng.random::<f64>()).powf(-a)).collect()
        }
        3 => {
            let mut v: Vec<f64> = (0..n).map(|_| gauss(rng)).collect();
            for _ in 0..rng.random_range(1..=3usize) {
                let i = rng.random_range(0..n);
                v[i] *= 10f64.powf(rng.random_range(1.0..6.0));
            }
            v
        }
        4 => {
            let support = rng.random_range(k..=(3 * k).min(n));
            let mut v = vec![0.0; n];
            for slot in v.iter_mut().take(support) {
                *slot = 1.0 - rng.random::<f64>();
            }
            v.shuffle(rng);
            v
        }
        _ => {
            let rate = rng.random_range(0.5..20.0);
            let mut v: Vec<f64> = (0..n).map(|i| (-rate * i as f64 / n as f64).exp()).collect();
            v.shuffle(rng);
            v
        }
    };
    for m in mags.iter_mut() {
        if rng.random::<bool>() {
            *m = -*m;
        }
    }
    match normalize_upsilon(&mags, r)? {
        Upsilon::Normalized { vector, .. } => Ok(vector),
        Upsilon::Degenerate => Err(invalid("sampled vector is degenerate")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn r_config() -> ClassifierConfig {
        ClassifierConfig {
            big_c0: 4.0,
            ..ClassifierConfig::new(2000, 0.05)
        }
    }

    #[test]
    fn normalization_examples() {
        let ones = vec![1.0; 300];
        assert_eq!(
            normalize_upsilon(&ones, 0.01).unwrap(),
            Upsilon::Normalized {
                vector: ones.clone(),
                scale: 1.0
            }
        );
        let twos = vec![2.0; 300];
        assert_eq!(
            normalize_upsilon(&twos, 0.01).unwrap(),
            Upsilon::Normalized {
                vector: ones,
                scale: 2.0
            }
        );
        let mut e1 = vec![0.0; 300];
        e1[0] = 1.0;
        assert_eq!(normalize_upsilon(&e1, 0.01).unwrap(), Upsilon::Degenerate);
        assert!(matches!(normalize_upsilon(&[0.0; 300], 0.01), Err(Error::ZeroVector)));
        assert!(normalize_upsilon(&[1.0; 50], 0.01).is_err());
    }

    #[test]
    fn ladder_at_desk_scale() {
        let l = SteepLadder::new(2000, 0.02, 0.01).unwrap();
        assert_eq!((l.ell0, l.s0), (2, 0));
        assert_eq!(l.ranks, vec![2, 2, 316, 20]);
        assert_relative_eq!(l.kappa, 240f64.ln() / 2f64.ln());
        assert_eq!(l.r_range(2000), Some((3, 146)));
        let l = SteepLadder::new(2000, 0.05, 0.01).unwrap();
        assert_eq!((l.ell0, l.s0), (8, 0));
        assert_eq!(l.ranks, vec![2, 2, 200, 20]);
        assert!(matches!(SteepLadder::new(100, 0.05, 0.01), Err(Error::Regime(_))));
    }

    #[test]
    fn ladder_with_steps() {
        // pn = 1200, ln(1/p) ≈ 6.21: ell0 = 48, 1/(64p) = 7.8, so s0 = 1.
        let l = SteepLadder::new(600_000, 0.002, 0.01).unwrap();
        assert_eq!((l.ell0, l.s0), (48, 1));
        assert_eq!(l.ranks[..2], [2, 30]);
        // floor(7.8) < 15·30, so n_2 repeats n_1.
        assert_eq!(l.ranks[2], 30);
        assert_eq!(l.ranks[3], (600_000f64 / 0.002).sqrt().floor() as usize);
        assert_eq!(l.tests(100.0).len(), 5);
    }

    #[test]
    fn vn_examples() {
        let cfg = ClassifierConfig::new(2000, 0.02);
        let mut x = vec![0.0; 2000];
        for v in x.iter_mut().take(100) {
            *v = 1.0;
        }
        let w = in_vn(&x, &cfg).unwrap().unwrap();
        assert_eq!(w.q1.len(), 7);
        assert!(w.q1.iter().all(|&i| x[i] == 1.0) && w.q2.iter().all(|&i| x[i] == 0.0));
        assert_eq!(in_vn(&vec![1.0; 2000], &cfg).unwrap(), None);
        let mut spike = x.clone();
        spike[5] = 2.0 * cfg.growth.eval(2000.0);
        assert_eq!(in_vn(&spike, &cfg).unwrap(), None);
        assert!(matches!(in_vn(&vec![3.0; 2000], &cfg), Err(Error::Unnormalized(_))));
    }

    #[test]
    fn steep_examples() {
        // d = 10 with a ladder that fits n = 20.
        let ladder = SteepLadder {
            d: 10.0,
            ell0: 2,
            s0: 0,
            ranks: vec![2, 2, 10, 5],
            kappa: 1.0,
        };
        let cfg = ClassifierConfig::new(20, 0.5);
        let mut x = vec![1.0; 20];
        x[0] = 100.0;
        assert_eq!(classify_steep(&x, &ladder, &cfg).unwrap(), Some(Label::T0));
        assert_eq!(classify_steep(&[1.0; 20], &ladder, &cfg).unwrap(), None);
    }

    #[test]
    fn constant_vector_is_r1() {
        let cfg = r_config();
        let classifier = Classifier::new(cfg).unwrap();
        let ladder = classifier.ladder().unwrap().clone();
        let ones = vec![1.0; 2000];
        assert!(in_r(&ones, 50, 1, &ladder, &cfg).unwrap());
        assert!(!in_r(&ones, 50, 2, &ladder, &cfg).unwrap());
        let label = classifier.classify(&ones).unwrap();
        assert_eq!(label.label, Label::R1(3));
        assert_eq!(
            label.chain,
            vec![Label::Vn, Label::T0, Label::T1(1), Label::T2, Label::T3]
        );
        assert!(classifier.verify(&ones, &label).unwrap());
        assert!(in_r(&ones, 2, 1, &ladder, &cfg).is_err());
    }

    #[test]
    fn spike_tail_is_not_flat() {
        let cfg = r_config();
        let ladder = SteepLadder::new(2000, 0.05, 0.01).unwrap();
        let mut x = vec![0.0; 2000];
        for v in x.iter_mut().take(20) {
            *v = 1.0;
        }
        assert!(!in_r(&x, 20, 1, &ladder, &cfg).unwrap());
        assert!(!in_r(&x, 20, 2, &ladder, &cfg).unwrap());
    }

    #[test]
    fn small_ops() {
        assert_eq!(q_drop_max(&[3.0, -5.0, 2.0]), vec![3.0, 0.0, 2.0]);
        assert_eq!(q_drop_max(&[4.0, -4.0]), vec![0.0, -4.0]);
        let w = in_u(&[0.0; 10], 3, 0.1).unwrap();
        assert_eq!(w.lambda, 0.0);
        assert_relative_eq!(
            triple_norm(&[1.0; 50], 0.1),
            (0.1f64 * 50.0).sqrt() * 50f64.sqrt(),
            max_relative = 1e-12
        );
        assert_relative_eq!(triple_norm(&[1.0, -1.0], 0.3), 2f64.sqrt(), max_relative = 1e-12);
        assert!(in_vbeta(&[1.0, 0.1, -0.1], 0.2));
        assert!(!in_vbeta(&[1.0, 0.3, -0.1], 0.2));
        assert!(!in_vbeta(&[1.5, 0.0], 1.0));
    }

    #[test]
    fn ac_membership() {
        let cfg = ClassifierConfig::new(200, 0.1);
        let mut x = vec![1.0; 200];
        x[0] = -7.0;
        assert_eq!(in_ac(&x, &cfg), Some(1.0));
        let alternating: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert_eq!(in_ac(&alternating, &cfg), None);
    }

    #[test]
    fn constant_p_examples() {
        let cfg = ClassifierConfig::constant_p(1000, 0.5, 10);
        let mut e1 = vec![0.0; 1000];
        e1[0] = 1.0;
        assert_eq!(classify_constp(&e1, 10, &cfg).unwrap().unwrap().0, Label::B1);
        let flat = vec![1.0 / 1000f64.sqrt(); 1000];
        let (label, w) = classify_constp(&flat, 10, &cfg).unwrap().unwrap();
        assert_eq!(label, Label::B2);
        let Witness::Shifted { u, .. } = w else {
            panic!("unexpected witness")
        };
        assert_eq!(u.lambda, flat[0]);

        let (a, eps) = (1.0, 1e-4);
        let mut x = vec![eps; 1000];
        x[0] = a;
        x[1] = a;
        let nx = norm(&x);
        let x: Vec<f64> = x.iter().map(|v| v / nx).collect();
        let mu = mu_ladder(1000, 0.5, cfg.beta_p());
        let k = ladder_slot(&mu, x[1]).unwrap();
        assert_eq!(classify_constp(&x, 10, &cfg).unwrap().unwrap().0, Label::B4(k));
        assert!(classify_constp(&[1.0, 1.0], 1, &cfg).is_err());
    }

    #[test]
    fn classifier_constant_mode_verifies() {
        let cfg = ClassifierConfig::constant_p(1000, 0.5, 10);
        let c = Classifier::new(cfg).unwrap();
        let mut rng = crate::matrix::trial_rng(3, 0);
        for _ in 0..50 {
            let x = sample_upsilon(1000, cfg.r, &mut rng).unwrap();
            let label = c.classify(&x).unwrap();
            assert!(c.verify(&x, &label).unwrap(), "{label:?}");
        }
    }

    #[test]
    fn ladders() {
        let l = tripling_ladder(0.01);
        assert_eq!(l.len(), 6);
        assert_relative_eq!(l[4], 0.81);
        assert_eq!(*l.last().unwrap(), 1.0);
        assert_eq!(tripling_ladder(2.0), vec![1.0]);
        assert_eq!(ladder_slot(&l, 0.5), Some(4));
        assert_eq!(ladder_slot(&l, 1.0), None);
    }

    #[test]
    fn growth_functions() {
        let a: Vec<f64> = (0..20).map(|i| 2f64 * 1.5f64.powi(i)).collect();
        let t: Vec<f64> = (0..40).map(|i| 1.3f64.powi(i)).collect();
        for g in [GrowthFunction::ConstP, GrowthFunction::General { p: 0.02, n: 2000 }] {
            assert_eq!(growth_condition_violation(&g, &a, &t), None);
            assert!(g.eval(1.0) >= 1.0);
            assert!(g.product_log(200).is_finite());
        }
        let g = GrowthFunction::General { p: 0.01, n: 100 };
        assert_relative_eq!(g.eval(63.0), 126f64.powf(1.5));
        assert_relative_eq!(g.eval(64.0), 128f64.ln().powi(2).exp());
    }

    #[test]
    fn label_text() {
        assert_eq!(Label::T1(2).to_string(), "T1_2");
        assert_eq!(Label::Unclassified.to_string(), "unclassified");
        assert_eq!(serde_json::to_string(&Label::R1(40)).unwrap(), "\"R1_40\"");
    }

    #[test]
    fn grid_bounds() {
        let g = r_grid(3, 147);
        assert_eq!((g[0], *g.last().unwrap()), (3, 147));
        assert!(g.len() <= 64);
        assert_eq!(r_grid(5, 5), vec![5]);
    }
}
