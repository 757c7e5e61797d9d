//! Exact singularity and rank over the rationals.
//!
//! Determinants are computed modulo random 62-bit primes. A nonzero residue
//! proves the matrix nonsingular. Zero residues modulo distinct primes whose
//! product exceeds twice the Hadamard bound prove the determinant is zero.

use num_bigint::BigInt;
use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::SparseBinaryMatrix;

const MR_BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    base %= q;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, q);
        }
        base = mul_mod(base, base, q);
        exp >>= 1;
    }
    acc
}

/// Deterministic primality test for 64-bit integers.
///
/// Miller–Rabin with the first twelve prime bases has no false positives
/// below 3.3·10²⁴, which covers every `u64`.
pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    for &b in &MR_BASES {
        if q % b == 0 {
            return q == b;
        }
    }
    let s = (q - 1).trailing_zeros();
    let d = (q - 1) >> s;
    'bases: for &a in &MR_BASES {
        let mut x = pow_mod(a, d, q);
        if x == 1 || x == q - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, q);
            if x == q - 1 {
                continue 'bases;
            }
        }
        return false;
    }
    true
}

/// Uniformly random prime in `[2^61, 2^62)`.
pub fn random_prime<R: RngCore + ?Sized>(rng: &mut R) -> u64 {
    loop {
        let candidate = rng.random_range((1u64 << 61)..(1u64 << 62)) | 1;
        if is_prime(candidate) {
            return candidate;
        }
    }
}

trait Field {
    fn modulus(&self) -> u64;
    fn bit_value(&self, one: bool) -> u64;
    fn mul(&self, a: u64, b: u64) -> u64;
    fn inv(&self, a: u64) -> u64;
    fn to_canonical(&self, a: u64) -> u64;

    #[inline(always)]
    fn sub(&self, a: u64, b: u64) -> u64 {
        let (d, borrow) = a.overflowing_sub(b);
        if borrow {
            d.wrapping_add(self.modulus())
        } else {
            d
        }
    }

    fn neg(&self, a: u64) -> u64 {
        if a == 0 {
            0
        } else {
            self.modulus() - a
        }
    }
}

/// Arithmetic modulo any prime through 128-bit remainders.
struct PlainField {
    q: u64,
}

impl Field for PlainField {
    fn modulus(&self) -> u64 {
        self.q
    }
    fn bit_value(&self, one: bool) -> u64 {
        u64::from(one) % self.q
    }
    fn mul(&self, a: u64, b: u64) -> u64 {
        mul_mod(a, b, self.q)
    }
    fn inv(&self, a: u64) -> u64 {
        pow_mod(a, self.q - 2, self.q)
    }
    fn to_canonical(&self, a: u64) -> u64 {
        a
    }
}

/// Montgomery arithmetic modulo an odd prime below 2^62, with R = 2^64.
struct MontgomeryField {
    q: u64,
    q_neg_inv: u64,
    r_mod_q: u64,
}

impl MontgomeryField {
    fn new(q: u64) -> Self {
        debug_assert!(q % 2 == 1 && q < 1 << 62);
        let mut inv: u64 = q;
        for _ in 0..5 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(q.wrapping_mul(inv)));
        }
        let r_mod_q = ((1u128 << 64) % q as u128) as u64;
        Self {
            q,
            q_neg_inv: inv.wrapping_neg(),
            r_mod_q,
        }
    }

    #[inline(always)]
    fn redc(&self, t: u128) -> u64 {
        let m = (t as u64).wrapping_mul(self.q_neg_inv);
        let u = ((t + m as u128 * self.q as u128) >> 64) as u64;
        if u >= self.q {
            u - self.q
        } else {
            u
        }
    }
}

impl Field for MontgomeryField {
    fn modulus(&self) -> u64 {
        self.q
    }
    fn bit_value(&self, one: bool) -> u64 {
        if one {
            self.r_mod_q
        } else {
            0
        }
    }
    #[inline(always)]
    fn mul(&self, a: u64, b: u64) -> u64 {
        self.redc(a as u128 * b as u128)
    }
    fn inv(&self, a: u64) -> u64 {
        let mut acc = self.r_mod_q;
        let mut base = a;
        let mut exp = self.q - 2;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }
    fn to_canonical(&self, a: u64) -> u64 {
        self.redc(a as u128)
    }
}

#[cfg(test)]
impl MontgomeryField {
    fn encode(&self, a: u64) -> u64 {
        mul_mod(a % self.q, self.r_mod_q, self.q)
    }
}

struct Elimination {
    det: u64,
    rank: usize,
}

/// Row reduction over GF(q) on a dense copy of `m`.
///
/// Pivots are the first nonzero entry in each column. When `stop_on_zero`
/// is set the reduction stops at the first column without a pivot, which is
/// all a determinant needs.
fn eliminate<F: Field>(f: &F, m: &SparseBinaryMatrix, stop_on_zero: bool) -> Elimination {
    let n = m.n();
    let mut a = vec![f.bit_value(false); n * n];
    let one = f.bit_value(true);
    for &(i, j) in m.ones() {
        a[i * n + j] = one;
    }
    let mut det = one;
    let mut rank = 0;
    let mut pivot_nz: Vec<usize> = Vec::with_capacity(n);
    for col in 0..n {
        let Some(pr) = (rank..n).find(|&r| a[r * n + col] != 0) else {
            det = 0;
            if stop_on_zero {
                break;
            }
            continue;
        };
        if pr != rank {
            for c in col..n {
                a.swap(pr * n + c, rank * n + c);
            }
            det = f.neg(det);
        }
        let pivot = a[rank * n + col];
        det = f.mul(det, pivot);
        let pivot_inv = f.inv(pivot);
        pivot_nz.clear();
        pivot_nz.extend((col + 1..n).filter(|&c| a[rank * n + c] != 0));
        let (top, bottom) = a.split_at_mut((rank + 1) * n);
        let pivot_row = &top[rank * n..];
        for row in bottom.chunks_exact_mut(n) {
            let lead = row[col];
            if lead == 0 {
                continue;
            }
            let factor = f.mul(lead, pivot_inv);
            row[col] = 0;
            for &c in &pivot_nz {
                row[c] = f.sub(row[c], f.mul(factor, pivot_row[c]));
            }
        }
        rank += 1;
    }
    if rank < n {
        det = 0;
    }
    Elimination {
        det: f.to_canonical(det),
        rank,
    }
}

fn eliminate_mod(m: &SparseBinaryMatrix, q: u64, stop_on_zero: bool) -> Elimination {
    if q % 2 == 1 && q < 1 << 62 {
        eliminate(&MontgomeryField::new(q), m, stop_on_zero)
    } else {
        eliminate(&PlainField { q }, m, stop_on_zero)
    }
}

fn check_prime(q: u64) -> Result<()> {
    if q >= 1 << 62 || !is_prime(q) {
        return Err(Error::NotPrime(q));
    }
    Ok(())
}

/// `det(m) mod q` for a prime `q < 2^62`.
pub fn det_mod_prime(m: &SparseBinaryMatrix, q: u64) -> Result<u64> {
    check_prime(q)?;
    Ok(eliminate_mod(m, q, true).det)
}

/// Rank of `m` over GF(q) for a prime `q < 2^62`.
pub fn rank_mod_prime(m: &SparseBinaryMatrix, q: u64) -> Result<usize> {
    check_prime(q)?;
    Ok(eliminate_mod(m, q, false).rank)
}

/// `log2` of the Hadamard bound `∏ ‖row_i‖`; `-∞` when a row is empty.
pub fn hadamard_log2(m: &SparseBinaryMatrix) -> f64 {
    m.row_counts()
        .iter()
        .map(|&c| {
            if c == 0 {
                f64::NEG_INFINITY
            } else {
                0.5 * (c as f64).log2()
            }
        })
        .sum()
}

/// How a [`SingularityVerdict`] was reached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictMethod {
    EarlyNonzeroModP,
    CrtCertifiedZero,
    RankDeficient,
}

/// Exact singular/nonsingular decision with its certificate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityVerdict {
    pub singular: bool,
    pub method: VerdictMethod,
    pub primes_used: Vec<u64>,
    pub det_residues: Vec<u64>,
    /// `None` stands for `-∞` (an empty row).
    pub hadamard_log2_bound: Option<f64>,
    pub rank: Option<usize>,
}

impl SingularityVerdict {
    /// Checks the internal consistency of the certificate.
    pub fn is_consistent(&self, n: usize) -> bool {
        let rank_ok = self.rank.map_or(true, |r| self.singular == (r < n));
        let method_ok = match self.method {
            VerdictMethod::EarlyNonzeroModP => !self.singular && self.det_residues.last().is_some_and(|&r| r != 0),
            VerdictMethod::CrtCertifiedZero => {
                self.singular
                    && self.det_residues.iter().all(|&r| r == 0)
                    && match self.hadamard_log2_bound {
                        Some(h) => certified_bits(&self.primes_used) > h + 1.0,
                        None => true,
                    }
            }
            VerdictMethod::RankDeficient => self.singular,
        };
        rank_ok && method_ok && self.primes_used.len() == self.det_residues.len()
    }
}

/// Guaranteed lower bound on `log2` of the product of the primes.
fn certified_bits(primes: &[u64]) -> f64 {
    primes.iter().map(|&q| (63 - q.leading_zeros()) as f64).sum()
}

/// Safety margin over a floating-point `log2` bound.
fn margin(bits: f64) -> f64 {
    bits + 1.0 + 1e-9 * bits.abs().max(1.0)
}

/// Decides singularity exactly, drawing primes from the thread-local RNG.
///
/// The verdict does not depend on which primes are drawn.
pub fn decide_singular(m: &SparseBinaryMatrix) -> SingularityVerdict {
    decide_singular_with_rng(m, &mut rand::rng())
}

/// Decides singularity exactly, drawing primes from `rng`.
pub fn decide_singular_with_rng<R: RngCore + ?Sized>(m: &SparseBinaryMatrix, rng: &mut R) -> SingularityVerdict {
    let n = m.n();
    let h = hadamard_log2(m);
    if m.has_zero_line() {
        return SingularityVerdict {
            singular: true,
            method: VerdictMethod::RankDeficient,
            primes_used: Vec::new(),
            det_residues: Vec::new(),
            hadamard_log2_bound: None,
            rank: None,
        };
    }
    let target = margin(h);
    let mut primes = Vec::new();
    let mut residues = Vec::new();
    loop {
        let q = random_prime(rng);
        if primes.contains(&q) {
            continue;
        }
        let det = eliminate_mod(m, q, true).det;
        primes.push(q);
        residues.push(det);
        if det != 0 {
            return SingularityVerdict {
                singular: false,
                method: VerdictMethod::EarlyNonzeroModP,
                primes_used: primes,
                det_residues: residues,
                hadamard_log2_bound: Some(h),
                rank: Some(n),
            };
        }
        if certified_bits(&primes) > target {
            return SingularityVerdict {
                singular: true,
                method: VerdictMethod::CrtCertifiedZero,
                primes_used: primes,
                det_residues: residues,
                hadamard_log2_bound: Some(h),
                rank: None,
            };
        }
    }
}

/// Exact rank over the rationals, drawing primes from the thread-local RNG.
pub fn rank_over_rationals(m: &SparseBinaryMatrix) -> usize {
    rank_over_rationals_with_rng(m, &mut rand::rng())
}

/// Exact rank over the rationals.
///
/// Rank modulo a prime never exceeds the rational rank. If it equals `r`
/// modulo distinct primes whose product exceeds twice the largest possible
/// `(r+1)`-minor, every such minor vanishes and the rank is exactly `r`. Two
/// primes that disagree send the matrix to fraction-free elimination.
pub fn rank_over_rationals_with_rng<R: RngCore + ?Sized>(m: &SparseBinaryMatrix, rng: &mut R) -> usize {
    let n = m.n();
    let mut primes: Vec<u64> = Vec::new();
    let mut rank = None;
    loop {
        let q = random_prime(rng);
        if primes.contains(&q) {
            continue;
        }
        let r = eliminate_mod(m, q, false).rank;
        match rank {
            None => rank = Some(r),
            Some(prev) if prev != r => return bareiss_rank(m),
            _ => {}
        }
        primes.push(q);
        if r == n || m.nnz() == 0 {
            return r;
        }
        if certified_bits(&primes) > margin(minor_log2_bound(m, r + 1)) {
            return r;
        }
    }
}

/// `log2` bound on every `k x k` minor: product of the `k` largest row norms.
fn minor_log2_bound(m: &SparseBinaryMatrix, k: usize) -> f64 {
    let mut counts = m.row_counts().to_vec();
    counts.sort_unstable_by(|a, b| b.cmp(a));
    counts.iter().take(k).map(|&c| 0.5 * (c.max(1) as f64).log2()).sum()
}

/// Rank by fraction-free (Bareiss) elimination over the integers.
pub fn bareiss_rank(m: &SparseBinaryMatrix) -> usize {
    let n = m.n();
    let mut a: Vec<Vec<BigInt>> = m
        .to_dense()
        .into_iter()
        .map(|row| row.into_iter().map(BigInt::from).collect())
        .collect();
    let mut prev = BigInt::from(1);
    let mut rank = 0;
    for col in 0..n {
        let Some(pr) = (rank..n).find(|&r| a[r][col] != BigInt::ZERO) else {
            continue;
        };
        a.swap(pr, rank);
        for i in rank + 1..n {
            for j in col + 1..n {
                let v = &a[rank][col] * &a[i][j] - &a[i][col] * &a[rank][j];
                a[i][j] = v / &prev;
            }
            a[i][col] = BigInt::ZERO;
        }
        prev = a[rank][col].clone();
        rank += 1;
    }
    rank
}
