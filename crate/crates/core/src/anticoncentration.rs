//! Concentration functions and the u-degree.
//!
//! The u-degree of `v` with parameters `(m, K1, K2)` is the largest `t` such
//! that the average over sequences of disjoint blocks `S_1, ..., S_m` (each of
//! size `⌊n/m⌋`) of
//!
//! ```text
//! ∫_{-t}^{t} ∏_i ψ_{K2}( | mean_{w ∈ S_i} exp(2πi v_w s / √m) | ) ds
//! ```
//!
//! stays below `K1`. The normalizing constant `A_nm` times the number of such
//! sequences is exactly one, so the weighted sum over all sequences is a plain
//! average, which [`u_degree_estimate`] approximates by sampling sequences.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};
use statrs::function::factorial::{ln_binomial, ln_factorial};

use crate::error::{invalid, Error, Result};
use crate::matrix::trial_rng;
use crate::stats::{mean_and_stderr, wilson_interval, Interval, Z_95};

/// C² smoothing of `max(1/K2, t)`.
///
/// On `[a, b] = [1/(2K2), 1/K2]` the function is the quintic Hermite
/// interpolant with value, slope and curvature `(1/K2, 0, 0)` at `a` and
/// `(1/K2, 1, 0)` at `b`. With `u = (t - a)/(b - a)` it reads
/// `1/K2 + (b - a)·(-3u⁵ + 7u⁴ - 4u³)`. The correction term is never positive
/// and never below `-(1 - u)(b - a)`, so `t <= ψ(t) <= 1/K2` on the blend, and
/// its slope stays in `[-0.512, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SmoothingPsi {
    k2: f64,
}

impl SmoothingPsi {
    pub fn new(k2: f64) -> Result<Self> {
        if !(k2 >= 1.0) || !k2.is_finite() {
            return Err(invalid(format!("K2 must be at least 1, got {k2}")));
        }
        Ok(Self { k2 })
    }

    pub fn k2(&self) -> f64 {
        self.k2
    }

    fn blend(&self) -> (f64, f64) {
        (0.5 / self.k2, 1.0 / self.k2)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let (a, b) = self.blend();
        if t <= a {
            return b;
        }
        if t >= b {
            return t;
        }
        let h = b - a;
        let u = (t - a) / h;
        let u3 = u * u * u;
        b + h * u3 * (-3.0 * u * u + 7.0 * u - 4.0)
    }

    /// First derivative.
    pub fn derivative(&self, t: f64) -> f64 {
        let (a, b) = self.blend();
        if t <= a {
            return 0.0;
        }
        if t >= b {
            return 1.0;
        }
        let u = (t - a) / (b - a);
        u * u * (-15.0 * u * u + 28.0 * u - 12.0)
    }

    /// Second derivative.
    pub fn second_derivative(&self, t: f64) -> f64 {
        let (a, b) = self.blend();
        if t <= a || t >= b {
            return 0.0;
        }
        let u = (t - a) / (b - a);
        u * (-60.0 * u * u + 84.0 * u - 24.0) / (b - a)
    }
}

pub fn psi_eval(psi: &SmoothingPsi, t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(invalid(format!("psi is defined for t >= 0, got {t}")));
    }
    Ok(psi.eval(t))
}

/// `ln A_nm = m·ln(⌊n/m⌋!) + ln((n - m⌊n/m⌋)!) - ln(n!)`.
pub fn a_nm_log(n: usize, m: usize) -> Result<f64> {
    if m == 0 || m > n {
        return Err(invalid(format!("need 1 <= m <= n, got m = {m}, n = {n}")));
    }
    let b = (n / m) as u64;
    let rest = (n - m * (n / m)) as u64;
    Ok(m as f64 * ln_factorial(b) + ln_factorial(rest) - ln_factorial(n as u64))
}

/// Largest number of enumerated supports accepted by [`levy_q_fixed_support`].
pub const FIXED_SUPPORT_BUDGET: f64 = 1e7;

/// Largest dimension accepted by [`levy_q_iid`].
pub const IID_MAX_N: usize = 24;

fn tie_tolerance(v: &[f64]) -> f64 {
    8.0 * f64::EPSILON * v.iter().map(|x| x.abs()).sum::<f64>()
}

/// Maximum total weight of sorted points inside a closed window of width `w`.
fn max_window_weight(points: &mut [(f64, f64)], w: f64) -> f64 {
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut best = 0.0f64;
    let mut acc = 0.0;
    let mut lo = 0;
    for hi in 0..points.len() {
        acc += points[hi].1;
        while points[hi].0 - points[lo].0 > w {
            acc -= points[lo].1;
            lo += 1;
        }
        best = best.max(acc);
    }
    best
}

fn max_window_count(sums: &mut [f64], w: f64) -> usize {
    sums.sort_by(f64::total_cmp);
    let mut best = 0;
    let mut lo = 0;
    for hi in 0..sums.len() {
        while sums[hi] - sums[lo] > w {
            lo += 1;
        }
        best = best.max(hi - lo + 1);
    }
    best
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau >= 0.0) {
        return Err(invalid(format!("tau must be nonnegative, got {tau}")));
    }
    Ok(())
}

/// `Q(Σ v_i X_i, τ)` where `X` is uniform over 0/1 vectors with exactly `m`
/// ones, by enumerating all `C(n, m)` supports.
pub fn levy_q_fixed_support(v: &[f64], m: usize, tau: f64) -> Result<f64> {
    let n = v.len();
    check_tau(tau)?;
    if m > n {
        return Err(invalid(format!("need m <= n, got m = {m}, n = {n}")));
    }
    let count = ln_binomial(n as u64, m as u64).exp();
    if count > FIXED_SUPPORT_BUDGET * (1.0 + 1e-9) {
        return Err(Error::BudgetExceeded(format!(
            "C({n}, {m}) = {count:.3e} supports exceeds the enumeration budget; use the sampled estimate"
        )));
    }
    let mut sums = Vec::with_capacity(count.round() as usize);
    enumerate_sums(v, m, 0, 0.0, &mut sums);
    let best = max_window_count(&mut sums, 2.0 * tau + tie_tolerance(v));
    Ok(best as f64 / sums.len() as f64)
}

fn enumerate_sums(v: &[f64], remaining: usize, start: usize, acc: f64, out: &mut Vec<f64>) {
    if remaining == 0 {
        out.push(acc);
        return;
    }
    for i in start..=v.len() - remaining {
        enumerate_sums(v, remaining - 1, i + 1, acc + v[i], out);
    }
}

/// Sampled concentration estimate with a Wilson interval on the best window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LevyEstimate {
    pub estimate: f64,
    pub interval: Interval,
    pub samples: u64,
}

/// Default number of supports drawn by [`levy_q_fixed_support_mc`].
pub const LEVY_MC_SAMPLES: u64 = 1_000_000;

/// Monte Carlo version of [`levy_q_fixed_support`] for large `C(n, m)`.
///
/// The best window is chosen on the same sample it is evaluated on, so the
/// estimate is biased slightly upward.
pub fn levy_q_fixed_support_mc<R: RngCore + ?Sized>(
    v: &[f64],
    m: usize,
    tau: f64,
    samples: u64,
    rng: &mut R,
) -> Result<LevyEstimate> {
    let n = v.len();
    check_tau(tau)?;
    if m > n || samples == 0 {
        return Err(invalid(format!("need m <= n and samples > 0, got m = {m}, n = {n}")));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    let mut sums = Vec::with_capacity(samples as usize);
    for _ in 0..samples {
        let (chosen, _) = idx.partial_shuffle(rng, m);
        sums.push(chosen.iter().map(|&i| v[i]).sum::<f64>());
    }
    let best = max_window_count(&mut sums, 2.0 * tau + tie_tolerance(v)) as u64;
    Ok(LevyEstimate {
        estimate: best as f64 / samples as f64,
        interval: wilson_interval(best, samples, Z_95),
        samples,
    })
}

/// `Q(Σ v_i b_i, τ)` for i.i.d. Bernoulli(`p`) `b_i`, by enumerating all
/// `2^n` outcomes.
pub fn levy_q_iid(v: &[f64], p: f64, tau: f64) -> Result<f64> {
    let n = v.len();
    check_tau(tau)?;
    if n > IID_MAX_N {
        return Err(Error::BudgetExceeded(format!(
            "levy_q_iid enumerates 2^n outcomes; n = {n} > {IID_MAX_N}"
        )));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(invalid(format!("p must lie in [0, 1], got {p}")));
    }
    let weight: Vec<f64> = (0..=n)
        .map(|k| p.powi(k as i32) * (1.0 - p).powi((n - k) as i32))
        .collect();
    let mut sums = vec![0.0f64; 1 << n];
    for mask in 1usize..1 << n {
        let low = mask.trailing_zeros() as usize;
        sums[mask] = sums[mask & (mask - 1)] + v[low];
    }
    let mut points: Vec<(f64, f64)> = sums
        .into_iter()
        .enumerate()
        .map(|(mask, s)| (s, weight[mask.count_ones() as usize]))
        .collect();
    Ok(max_window_weight(&mut points, 2.0 * tau + tie_tolerance(v)).min(1.0))
}

/// Parameters of the u-degree estimator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UDegreeParams {
    pub m: usize,
    pub k1: f64,
    pub k2: f64,
    /// Number of sampled block sequences.
    pub partition_samples: usize,
    /// Grid step as a fraction of the Lipschitz-derived maximum step.
    pub quad_step_factor: f64,
    /// Integration ceiling; estimates that reach it are censored. Defaults
    /// to `max(K1, 4√m)`, above both `K1/2` (the value for constant vectors)
    /// and the `√m` lower bound for gradual vectors.
    pub t_max: f64,
    /// Refuse to integrate on more grid points than this.
    pub max_grid_points: usize,
    pub seed: u64,
}

impl UDegreeParams {
    pub const DEFAULT_K1: f64 = 10.0;
    pub const DEFAULT_K2: f64 = 8.0;

    pub fn new(m: usize) -> Self {
        Self {
            m,
            k1: Self::DEFAULT_K1,
            k2: Self::DEFAULT_K2,
            partition_samples: 16,
            quad_step_factor: 1.0,
            t_max: Self::DEFAULT_K1.max(4.0 * (m as f64).sqrt()),
            max_grid_points: 1 << 22,
            seed: 0,
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.m == 0 || 2 * self.m > n {
            return Err(invalid(format!("need 1 <= m <= n/2, got m = {}, n = {n}", self.m)));
        }
        if !(self.k1 >= 1.0) || !(self.k2 >= 1.0) {
            return Err(invalid("K1 and K2 must be at least 1"));
        }
        if self.partition_samples == 0 || !(self.quad_step_factor > 0.0) || !(self.t_max > 0.0) {
            return Err(invalid(
                "partition_samples, quad_step_factor and t_max must be positive",
            ));
        }
        Ok(())
    }

    /// Grid step bound `quad_step_factor / (8 K2 π ‖v‖∞ m)`.
    pub fn step_bound(&self, v: &[f64]) -> f64 {
        let vmax = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let vmax = if vmax > 0.0 { vmax } else { 1.0 };
        self.quad_step_factor / (8.0 * self.k2 * PI * vmax * self.m as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UDegreeEstimate {
    /// Interpolated crossing point.
    pub ud: f64,
    /// Last grid point where the averaged integral is at most `K1`.
    pub ud_lower: f64,
    /// First grid point where it exceeds `K1` (or `t_max` when censored).
    pub ud_upper: f64,
    /// Averaged integral at `ud_lower`.
    pub integral_at_ud: f64,
    /// Standard error of that average over the sampled sequences.
    pub integral_stderr: f64,
    pub samples_used: usize,
    pub censored: bool,
    pub grid_step: f64,
    pub params: UDegreeParams,
}

/// Disjoint blocks of size `⌊n/m⌋` from a uniformly random permutation.
pub fn sample_blocks<R: RngCore + ?Sized>(n: usize, m: usize, rng: &mut R) -> Vec<Vec<usize>> {
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let b = n / m;
    perm.chunks_exact(b).take(m).map(|c| c.to_vec()).collect()
}

fn check_blocks(n: usize, m: usize, blocks: &[Vec<usize>]) -> Result<()> {
    if blocks.len() != m {
        return Err(Error::MalformedPartition(format!(
            "expected {m} blocks, got {}",
            blocks.len()
        )));
    }
    let b = n / m;
    let mut seen = vec![false; n];
    for (k, block) in blocks.iter().enumerate() {
        if block.len() != b {
            return Err(Error::MalformedPartition(format!(
                "block {k} has {} elements, expected {b}",
                block.len()
            )));
        }
        for &w in block {
            if w >= n || std::mem::replace(&mut seen[w], true) {
                return Err(Error::MalformedPartition(format!("index {w} out of range or repeated")));
            }
        }
    }
    Ok(())
}

/// `∏_i ψ_{K2}(| mean_{w ∈ S_i} exp(2πi v_w s / √m) |)`.
pub fn ud_integrand(v: &[f64], params: &UDegreeParams, blocks: &[Vec<usize>], s: f64) -> Result<f64> {
    if params.m == 0 || params.m > v.len() {
        return Err(invalid(format!("need 1 <= m <= n, got m = {}", params.m)));
    }
    check_blocks(v.len(), params.m, blocks)?;
    let psi = SmoothingPsi::new(params.k2)?;
    let scale = 2.0 * PI * s / (params.m as f64).sqrt();
    Ok(blocks
        .iter()
        .map(|block| {
            let z: Complex64 = block.iter().map(|&w| Complex64::cis(scale * v[w])).sum();
            psi.eval(z.norm() / block.len() as f64)
        })
        .product())
}

/// Recompute phasors exactly after this many rotations.
const RESYNC_EVERY: usize = 64;

/// One sampled block sequence, with equal values merged inside each block.
struct BlockPhasors {
    values: Vec<f64>,
    weights: Vec<f64>,
    bounds: Vec<usize>,
    phasor: Vec<Complex64>,
    rotor: Vec<Complex64>,
}

impl BlockPhasors {
    fn new(v: &[f64], blocks: &[Vec<usize>], omega: f64, h: f64) -> Self {
        let mut values = Vec::new();
        let mut weights = Vec::new();
        let mut bounds = vec![0];
        for block in blocks {
            let mut vals: Vec<f64> = block.iter().map(|&w| v[w]).collect();
            vals.sort_by(f64::total_cmp);
            let inv = 1.0 / vals.len() as f64;
            for x in vals {
                if values.len() > *bounds.last().unwrap() && *values.last().unwrap() == x {
                    *weights.last_mut().unwrap() += inv;
                } else {
                    values.push(x);
                    weights.push(inv);
                }
            }
            bounds.push(values.len());
        }
        let phasor = vec![Complex64::new(1.0, 0.0); values.len()];
        let rotor = values.iter().map(|&x| Complex64::cis(omega * x * h)).collect();
        Self {
            values,
            weights,
            bounds,
            phasor,
            rotor,
        }
    }

    fn eval(&self, psi: &SmoothingPsi) -> f64 {
        self.bounds
            .windows(2)
            .map(|w| {
                let z: Complex64 = (w[0]..w[1]).map(|k| self.phasor[k] * self.weights[k]).sum();
                psi.eval(z.norm())
            })
            .product()
    }

    fn advance(&mut self, omega: f64, s_next: f64, step: usize) {
        if step % RESYNC_EVERY == 0 {
            for (z, &x) in self.phasor.iter_mut().zip(&self.values) {
                *z = Complex64::cis(omega * x * s_next);
            }
        } else {
            for (z, r) in self.phasor.iter_mut().zip(&self.rotor) {
                *z *= r;
            }
        }
    }
}

/// Estimates the u-degree of `v`.
///
/// Block sequence `j` is drawn from the stream `(params.seed, j)`. The
/// averaged integral `2∫₀ᵗ` (the integrand is even in `s`) is accumulated
/// with the trapezoid rule on a uniform grid no coarser than
/// [`UDegreeParams::step_bound`]. Because the integrand is nonnegative the
/// integral is monotone in `t`, so a single forward scan finds the first grid
/// cell where it crosses `K1`; the crossing is located inside the cell by
/// linear interpolation.
pub fn u_degree_estimate(v: &[f64], params: &UDegreeParams) -> Result<UDegreeEstimate> {
    let n = v.len();
    params.validate(n)?;
    if v.iter().any(|x| !x.is_finite()) {
        return Err(invalid("vector has non-finite entries"));
    }
    let psi = SmoothingPsi::new(params.k2)?;
    let cells = (params.t_max / params.step_bound(v)).ceil().max(1.0);
    if cells > params.max_grid_points as f64 {
        return Err(Error::BudgetExceeded(format!(
            "integration up to t_max = {} needs {cells:.3e} grid points (limit {})",
            params.t_max, params.max_grid_points
        )));
    }
    let cells = cells as usize;
    let h = params.t_max / cells as f64;
    let omega = 2.0 * PI / (params.m as f64).sqrt();
    let samples = params.partition_samples;
    let mut states: Vec<BlockPhasors> = (0..samples)
        .map(|j| {
            let mut rng = trial_rng(params.seed, j as u64);
            BlockPhasors::new(v, &sample_blocks(n, params.m, &mut rng), omega, h)
        })
        .collect();
    let mut prev: Vec<f64> = states.iter().map(|s| s.eval(&psi)).collect();
    let mut cum = vec![0.0; samples];
    let mut mean_prev = 0.0;
    for k in 1..=cells {
        for s in states.iter_mut() {
            s.advance(omega, k as f64 * h, k);
        }
        let mut next_cum = cum.clone();
        for (j, s) in states.iter().enumerate() {
            let f = s.eval(&psi);
            next_cum[j] += h * (prev[j] + f);
            prev[j] = f;
        }
        let mean_next = next_cum.iter().sum::<f64>() / samples as f64;
        if mean_next > params.k1 {
            let t0 = (k - 1) as f64 * h;
            let frac = (params.k1 - mean_prev) / (mean_next - mean_prev);
            let (_, stderr) = mean_and_stderr(&cum);
            return Ok(UDegreeEstimate {
                ud: t0 + frac.clamp(0.0, 1.0) * h,
                ud_lower: t0,
                ud_upper: k as f64 * h,
                integral_at_ud: mean_prev,
                integral_stderr: stderr,
                samples_used: samples,
                censored: false,
                grid_step: h,
                params: *params,
            });
        }
        cum = next_cum;
        mean_prev = mean_next;
    }
    let (_, stderr) = mean_and_stderr(&cum);
    Ok(UDegreeEstimate {
        ud: params.t_max,
        ud_lower: params.t_max,
        ud_upper: params.t_max,
        integral_at_ud: mean_prev,
        integral_stderr: stderr,
        samples_used: samples,
        censored: true,
        grid_step: h,
        params: *params,
    })
}

/// Unbiased rounding of `v` to the lattice `(1/k)ℤⁿ`.
///
/// `Y_i = ⌊k v_i⌋/k` with probability `⌊k v_i⌋ - k v_i + 1`, otherwise
/// `(⌊k v_i⌋ + 1)/k`. Coordinates already on the lattice are kept as is.
pub fn randomized_round<R: RngCore + ?Sized>(v: &[f64], k: u64, rng: &mut R) -> Result<Vec<f64>> {
    if k == 0 {
        return Err(invalid("k must be positive"));
    }
    let kf = k as f64;
    Ok(v.iter()
        .map(|&x| {
            let kx = kf * x;
            let r = kx.round();
            if (kx - r).abs() <= 4.0 * f64::EPSILON * kx.abs().max(1.0) {
                return x;
            }
            let fl = kx.floor();
            let p_down = fl - kx + 1.0;
            if rng.random::<f64>() < p_down {
                fl / kf
            } else {
                (fl + 1.0) / kf
            }
        })
        .collect())
}
