//! Sparse 0/1 matrices: sampling, storage and structural queries.
//!
//! Randomness is fully determined by a `(seed, trial_index)` pair. The
//! generator is ChaCha20 keyed by `seed` (expanded with
//! [`SeedableRng::seed_from_u64`]) with the 64-bit stream id set to
//! `trial_index`, so every trial owns an independent stream and trials can be
//! generated in any order or on any thread.

use std::collections::HashMap;
use std::sync::OnceLock;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Human-readable description of the per-trial stream derivation, recorded
/// in experiment outputs.
pub const RNG_SCHEME: &str = "chacha20: key=seed_from_u64(seed), stream=trial_index";

/// Below this success probability the sampler skips over zero cells with
/// geometric jumps instead of drawing every entry.
pub const GEOMETRIC_SKIP_MAX_P: f64 = 0.05;

/// Random stream for trial `trial_index` of an experiment seeded with `seed`.
pub fn trial_rng(seed: u64, trial_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(trial_index);
    rng
}

/// Distribution parameters of one random matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BernoulliParams {
    pub n: usize,
    pub p: f64,
    pub seed: u64,
    pub trial_index: u64,
}

impl BernoulliParams {
    pub fn new(n: usize, p: f64, seed: u64, trial_index: u64) -> Result<Self> {
        let params = Self {
            n,
            p,
            seed,
            trial_index,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        validate_np(self.n, self.p)
    }
}

pub(crate) fn validate_np(n: usize, p: f64) -> Result<()> {
    if n == 0 {
        return Err(invalid("dimension n must be positive"));
    }
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("p must lie in (0, 1), got {p}")));
    }
    Ok(())
}

/// Square 0/1 matrix stored as a sorted list of the positions of its ones.
#[derive(Debug, Clone)]
pub struct SparseBinaryMatrix {
    n: usize,
    ones: Vec<(usize, usize)>,
    row_counts: Vec<usize>,
    col_counts: Vec<usize>,
    row_offsets: OnceLock<Vec<usize>>,
}

impl PartialEq for SparseBinaryMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.ones == other.ones
    }
}

impl Eq for SparseBinaryMatrix {}

impl SparseBinaryMatrix {
    /// Builds a matrix from the positions of its ones (any order).
    ///
    /// Out-of-range or repeated positions are rejected.
    pub fn from_ones(n: usize, mut ones: Vec<(usize, usize)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMatrix("dimension must be positive".into()));
        }
        if let Some(&(i, j)) = ones.iter().find(|&&(i, j)| i >= n || j >= n) {
            return Err(Error::InvalidMatrix(format!(
                "entry ({i}, {j}) out of range for n = {n}"
            )));
        }
        ones.sort_unstable();
        if let Some(w) = ones.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::InvalidMatrix(format!("duplicate entry {:?}", w[0])));
        }
        Ok(Self::from_sorted_unchecked(n, ones))
    }

    pub(crate) fn from_sorted_unchecked(n: usize, ones: Vec<(usize, usize)>) -> Self {
        let mut row_counts = vec![0; n];
        let mut col_counts = vec![0; n];
        for &(i, j) in &ones {
            row_counts[i] += 1;
            col_counts[j] += 1;
        }
        Self {
            n,
            ones,
            row_counts,
            col_counts,
            row_offsets: OnceLock::new(),
        }
    }

    /// Builds a matrix from dense rows; any nonzero entry counts as a one.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let n = rows.len();
        let mut ones = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(Error::InvalidMatrix(format!(
                    "row {i} has length {} but the matrix has {n} rows",
                    row.len()
                )));
            }
            ones.extend(row.iter().enumerate().filter(|(_, &v)| v != 0).map(|(j, _)| (i, j)));
        }
        Self::from_ones(n, ones)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_sorted_unchecked(n, (0..n).map(|i| (i, i)).collect())
    }

    pub fn all_ones(n: usize) -> Self {
        Self::from_sorted_unchecked(n, (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).collect())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Positions of the ones, ascending lexicographic.
    pub fn ones(&self) -> &[(usize, usize)] {
        &self.ones
    }

    pub fn nnz(&self) -> usize {
        self.ones.len()
    }

    pub fn row_counts(&self) -> &[usize] {
        &self.row_counts
    }

    pub fn col_counts(&self) -> &[usize] {
        &self.col_counts
    }

    fn offsets(&self) -> &[usize] {
        self.row_offsets.get_or_init(|| {
            let mut offsets = Vec::with_capacity(self.n + 1);
            offsets.push(0);
            let mut acc = 0;
            for &c in &self.row_counts {
                acc += c;
                offsets.push(acc);
            }
            offsets
        })
    }

    /// Column indices of the ones in row `i`, ascending.
    pub fn row_support(&self, i: usize) -> impl ExactSizeIterator<Item = usize> + '_ {
        let offsets = self.offsets();
        self.ones[offsets[i]..offsets[i + 1]].iter().map(|&(_, j)| j)
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        let offsets = self.offsets();
        self.ones[offsets[i]..offsets[i + 1]].binary_search(&(i, j)).is_ok()
    }

    pub fn to_dense(&self) -> Vec<Vec<u8>> {
        let mut dense = vec![vec![0u8; self.n]; self.n];
        for &(i, j) in &self.ones {
            dense[i][j] = 1;
        }
        dense
    }

    pub fn transpose(&self) -> Self {
        let mut ones: Vec<_> = self.ones.iter().map(|&(i, j)| (j, i)).collect();
        ones.sort_unstable();
        Self {
            n: self.n,
            ones,
            row_counts: self.col_counts.clone(),
            col_counts: self.row_counts.clone(),
            row_offsets: OnceLock::new(),
        }
    }

    /// `y = M x`.
    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j) in &self.ones {
            y[i] += x[j];
        }
    }

    /// `y = Mᵀ x`.
    pub fn mul_transpose_vec(&self, x: &[f64], y: &mut [f64]) {
        y.iter_mut().for_each(|v| *v = 0.0);
        for &(i, j) in &self.ones {
            y[j] += x[i];
        }
    }

    /// Zero rows and columns, and pairs of equal nonzero rows and columns.
    pub fn structural_scan(&self) -> WitnessReport {
        let zero_rows = zero_indices(&self.row_counts);
        let zero_cols = zero_indices(&self.col_counts);
        let dup_row_pairs = duplicate_pairs(self);
        let dup_col_pairs = duplicate_pairs(&self.transpose());
        let has_structural_witness =
            !(zero_rows.is_empty() && zero_cols.is_empty() && dup_row_pairs.is_empty() && dup_col_pairs.is_empty());
        WitnessReport {
            zero_rows,
            zero_cols,
            dup_row_pairs,
            dup_col_pairs,
            has_structural_witness,
        }
    }

    /// True when some row or column is empty. Cheaper than a full scan.
    pub fn has_zero_line(&self) -> bool {
        self.row_counts.contains(&0) || self.col_counts.contains(&0)
    }
}

fn zero_indices(counts: &[usize]) -> Vec<usize> {
    counts
        .iter()
        .enumerate()
        .filter(|(_, &c)| c == 0)
        .map(|(i, _)| i)
        .collect()
}

/// Groups nonempty rows by their support and emits every pair inside a group.
fn duplicate_pairs(m: &SparseBinaryMatrix) -> Vec<(usize, usize)> {
    let mut keyed: HashMap<Vec<usize>, Vec<usize>> = HashMap::new();
    for i in 0..m.n {
        if m.row_counts[i] == 0 {
            continue;
        }
        keyed.entry(m.row_support(i).collect()).or_default().push(i);
    }
    let mut pairs = Vec::new();
    for rows in keyed.values() {
        for (a, &r1) in rows.iter().enumerate() {
            for &r2 in &rows[a + 1..] {
                pairs.push((r1.min(r2), r1.max(r2)));
            }
        }
    }
    pairs.sort_unstable();
    pairs
}

/// Structural reasons for singularity found by [`SparseBinaryMatrix::structural_scan`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub zero_rows: Vec<usize>,
    pub zero_cols: Vec<usize>,
    pub dup_row_pairs: Vec<(usize, usize)>,
    pub dup_col_pairs: Vec<(usize, usize)>,
    pub has_structural_witness: bool,
}

/// Samples the matrix determined by `params`.
pub fn generate(params: &BernoulliParams) -> Result<SparseBinaryMatrix> {
    params.validate()?;
    let mut rng = trial_rng(params.seed, params.trial_index);
    Ok(sample(params.n, params.p, &mut rng))
}

/// Samples an `n x n` Bernoulli(`p`) matrix from an explicit stream.
pub fn generate_with_rng<R: RngCore>(n: usize, p: f64, rng: &mut R) -> Result<SparseBinaryMatrix> {
    validate_np(n, p)?;
    Ok(sample(n, p, rng))
}

fn sample<R: RngCore>(n: usize, p: f64, rng: &mut R) -> SparseBinaryMatrix {
    let cells = (n as u64) * (n as u64);
    let mut ones = Vec::with_capacity(((cells as f64) * p * 1.1) as usize + 8);
    if p <= GEOMETRIC_SKIP_MAX_P {
        // Gap before the next one is Geometric(p) on {0, 1, ...}.
        let log_q = (-p).ln_1p();
        let mut pos: u64 = 0;
        loop {
            let u: f64 = 1.0 - rng.random::<f64>();
            let gap = (u.ln() / log_q).floor();
            if gap >= (cells - pos) as f64 {
                break;
            }
            pos += gap as u64;
            ones.push(((pos / n as u64) as usize, (pos % n as u64) as usize));
            pos += 1;
            if pos >= cells {
                break;
            }
        }
    } else {
        for i in 0..n {
            for j in 0..n {
                if rng.random::<f64>() < p {
                    ones.push((i, j));
                }
            }
        }
    }
    SparseBinaryMatrix::from_sorted_unchecked(n, ones)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_duplicates(rows: &[Vec<u8>]) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..rows.len() {
            for b in a + 1..rows.len() {
                if rows[a] == rows[b] && rows[a].iter().any(|&v| v != 0) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    #[test]
    fn degenerate_probabilities() {
        for t in 0..100 {
            let m = generate(&BernoulliParams::new(3, 1e-12, 7, t).unwrap()).unwrap();
            assert_eq!(m.nnz(), 0);
            let m = generate(&BernoulliParams::new(3, 1.0 - 1e-12, 7, t).unwrap()).unwrap();
            assert_eq!(m.nnz(), 9);
        }
    }

    #[test]
    fn rejects_bad_params() {
        assert!(BernoulliParams::new(0, 0.5, 0, 0).is_err());
        assert!(BernoulliParams::new(3, 0.0, 0, 0).is_err());
        assert!(BernoulliParams::new(3, 1.0, 0, 0).is_err());
        assert!(BernoulliParams::new(3, f64::NAN, 0, 0).is_err());
    }

    #[test]
    fn reproducible() {
        for p in [0.01, 0.3] {
            let params = BernoulliParams::new(40, p, 99, 5).unwrap();
            assert_eq!(generate(&params).unwrap().ones(), generate(&params).unwrap().ones());
            let other = BernoulliParams {
                trial_index: 6,
                ..params
            };
            assert_ne!(generate(&params).unwrap().ones(), generate(&other).unwrap().ones());
        }
    }

    #[test]
    fn transpose_examples() {
        assert_eq!(
            SparseBinaryMatrix::identity(3).transpose(),
            SparseBinaryMatrix::identity(3)
        );
        let m = SparseBinaryMatrix::from_ones(2, vec![(0, 1)]).unwrap();
        assert_eq!(m.transpose().ones(), &[(1, 0)]);
        let r = generate(&BernoulliParams::new(30, 0.2, 1, 1).unwrap()).unwrap();
        assert_eq!(r.row_counts(), r.transpose().col_counts());
        assert_eq!(r.transpose().transpose(), r);
    }

    #[test]
    fn scan_examples() {
        let id = SparseBinaryMatrix::identity(3).structural_scan();
        assert!(!id.has_structural_witness);

        let m = SparseBinaryMatrix::from_ones(3, vec![(0, 0), (1, 0)]).unwrap();
        let w = m.structural_scan();
        assert_eq!(w.zero_rows, vec![2]);
        assert_eq!(w.zero_cols, vec![1, 2]);
        assert_eq!(w.dup_row_pairs, vec![(0, 1)]);
        assert!(w.dup_col_pairs.is_empty());
        assert!(w.has_structural_witness);

        let w = SparseBinaryMatrix::all_ones(4).structural_scan();
        assert!(w.zero_rows.is_empty() && w.zero_cols.is_empty());
        assert_eq!(w.dup_row_pairs.len(), 6);
        assert_eq!(w.dup_col_pairs.len(), 6);
    }

    #[test]
    fn scan_matches_pairwise_comparison() {
        for seed in 0..500u64 {
            let n = 1 + (seed % 8) as usize;
            let p = [0.15, 0.3, 0.5, 0.7][(seed % 4) as usize];
            let m = generate(&BernoulliParams::new(n, p, seed, 0).unwrap()).unwrap();
            let w = m.structural_scan();
            let dense = m.to_dense();
            assert_eq!(w.dup_row_pairs, brute_duplicates(&dense));
            let dense_t = m.transpose().to_dense();
            assert_eq!(w.dup_col_pairs, brute_duplicates(&dense_t));
            for i in 0..n {
                assert_eq!(w.zero_rows.contains(&i), m.row_counts()[i] == 0);
                assert_eq!(w.zero_cols.contains(&i), m.col_counts()[i] == 0);
            }
        }
    }

    #[test]
    fn from_ones_validates() {
        assert!(SparseBinaryMatrix::from_ones(2, vec![(0, 2)]).is_err());
        assert!(SparseBinaryMatrix::from_ones(2, vec![(0, 1), (0, 1)]).is_err());
        let m = SparseBinaryMatrix::from_ones(2, vec![(1, 1), (0, 1)]).unwrap();
        assert_eq!(m.ones(), &[(0, 1), (1, 1)]);
        assert!(m.get(1, 1) && !m.get(1, 0));
        assert_eq!(m.row_support(0).collect::<Vec<_>>(), vec![1]);
    }
}
