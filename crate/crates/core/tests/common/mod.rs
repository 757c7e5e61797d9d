//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Determinant by cofactor expansion along the first row.
pub fn cofactor_det(a: &[Vec<i64>]) -> i64 {
    let n = a.len();
    match n {
        0 => 1,
        1 => a[0][0],
        _ => {
            let mut total = 0;
            for (j, &a0j) in a[0].iter().enumerate() {
                if a0j == 0 {
                    continue;
                }
                let minor: Vec<Vec<i64>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, &v)| v)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1 } else { -1 };
                total += sign * a0j * cofactor_det(&minor);
            }
            total
        }
    }
}

pub fn dense_i64(rows: &[Vec<u8>]) -> Vec<Vec<i64>> {
    rows.iter().map(|r| r.iter().map(|&v| v as i64).collect()).collect()
}

/// Rank over the rationals by exact Gaussian elimination.
pub fn rational_rank(rows: &[Vec<u8>]) -> usize {
    let mut a: Vec<Vec<BigRational>> = rows
        .iter()
        .map(|r| r.iter().map(|&v| BigRational::from_integer(BigInt::from(v))).collect())
        .collect();
    let n = a.len();
    let cols = if n == 0 { 0 } else { a[0].len() };
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..n).find(|&r| !a[r][c].is_zero()) else {
            continue;
        };
        a.swap(rank, piv);
        for r in 0..n {
            if r != rank && !a[r][c].is_zero() {
                let f = &a[r][c] / &a[rank][c];
                for k in c..cols {
                    let delta = &f * &a[rank][k];
                    a[r][k] -= delta;
                }
            }
        }
        rank += 1;
    }
    rank
}

/// Singular values by one-sided Jacobi rotations, in decreasing order.
pub fn jacobi_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    // Work on columns.
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| rows.iter().map(|r| r[j]).collect()).collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                let alpha: f64 = cols[i].iter().map(|v| v * v).sum();
                let beta: f64 = cols[j].iter().map(|v| v * v).sum();
                let gamma: f64 = cols[i].iter().zip(&cols[j]).map(|(a, b)| a * b).sum();
                if gamma == 0.0 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..n {
                    let (a, b) = (cols[i][k], cols[j][k]);
                    cols[i][k] = c * a - s * b;
                    cols[j][k] = s * a + c * b;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let mut sv: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt())
        .collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// Exact probability of a zero row or column for `p = num/den`, by
/// inclusion–exclusion over the sets of empty rows and columns.
pub fn zero_line_rational(n: usize, num: i64, den: i64) -> BigRational {
    let q = BigRational::new(BigInt::from(den - num), BigInt::from(den));
    let mut none_empty = BigRational::zero();
    for i in 0..=n {
        for j in 0..=n {
            let cells = (i * n + j * n - i * j) as i32;
            let term =
                BigRational::from_integer(binomial(n, i) * binomial(n, j)) * num_traits::pow(q.clone(), cells as usize);
            if (i + j) % 2 == 0 {
                none_empty += term;
            } else {
                none_empty -= term;
            }
        }
    }
    BigRational::one() - none_empty
}

pub fn rational_to_f64(x: &BigRational) -> f64 {
    // Scale to keep enough bits when the value is tiny.
    let scale = BigInt::from(10u32).pow(40);
    let scaled = (x * BigRational::from_integer(scale.clone())).round().to_integer();
    let v: f64 = scaled.to_string().parse().expect("integer text");
    if x.is_negative() && v > 0.0 {
        -v / 1e40
    } else {
        v / 1e40
    }
}

/// Probability that a 2x2 Bernoulli(p) matrix is singular, by enumeration.
pub fn singular_probability_2x2(p: f64) -> f64 {
    (0u32..16)
        .filter(|bits| {
            let e = |k: u32| ((bits >> k) & 1) as i64;
            e(0) * e(3) - e(1) * e(2) == 0
        })
        .map(|bits| {
            let ones = bits.count_ones() as i32;
            p.powi(ones) * (1.0 - p).powi(4 - ones)
        })
        .sum()
}

/// All `n x n` 0/1 matrices, row-major bit order.
pub fn all_binary(n: usize) -> impl Iterator<Item = Vec<Vec<u8>>> {
    (0u64..1 << (n * n)).map(move |bits| {
        (0..n)
            .map(|i| (0..n).map(|j| ((bits >> (i * n + j)) & 1) as u8).collect())
            .collect()
    })
}
