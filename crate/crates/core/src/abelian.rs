//! Integer matrices, Smith normal form, and abelianization invariants.
//!
//! Entries are arbitrary-precision: pivoting can inflate intermediate values
//! well beyond the input range.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

use crate::presentation::Presentation;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MatrixError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, entries: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    /// Builds a matrix from rows; every row must have length `cols`.
    pub fn from_rows(cols: usize, rows: &[Vec<i64>]) -> Result<Self, MatrixError> {
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            if r.len() != cols {
                return Err(MatrixError::DimensionMismatch { expected: cols, got: r.len() });
            }
            for (j, &x) in r.iter().enumerate() {
                m.set(i, j, BigInt::from(x));
            }
        }
        Ok(m)
    }

    /// Rows as whitespace-separated integers, one row per line. Blank lines
    /// and `#` comments are skipped.
    pub fn parse(text: &str) -> Result<Self, MatrixError> {
        let mut rows: Vec<Vec<i64>> = Vec::new();
        let mut cols = None;
        for (ln, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row: Vec<i64> = line
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|_| MatrixError::Parse {
                        line: ln + 1,
                        msg: format!("`{t}` is not an integer"),
                    })
                })
                .collect::<Result<_, _>>()?;
            match cols {
                None => cols = Some(row.len()),
                Some(c) if c != row.len() => {
                    return Err(MatrixError::Parse {
                        line: ln + 1,
                        msg: format!("expected {c} entries, found {}", row.len()),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        Self::from_rows(cols.unwrap_or(0), &rows)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> &BigInt {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigInt) {
        self.entries[i * self.cols + j] = v;
    }

    pub fn mul(&self, other: &IntMatrix) -> Result<IntMatrix, MatrixError> {
        if self.cols != other.rows {
            return Err(MatrixError::DimensionMismatch { expected: self.cols, got: other.rows });
        }
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let v = out.get(i, j) + a * other.get(k, j);
                    out.set(i, j, v);
                }
            }
        }
        Ok(out)
    }

    /// Determinant by fraction-free (Bareiss) elimination. Square matrices only.
    pub fn determinant(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut a: Vec<Vec<BigInt>> =
            (0..n).map(|i| (0..n).map(|j| self.get(i, j).clone()).collect()).collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if a[k][k].is_zero() {
                match (k + 1..n).find(|&i| !a[i][k].is_zero()) {
                    Some(i) => {
                        a.swap(k, i);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let v = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
                    a[i][j] = v;
                }
            }
            prev = a[k][k].clone();
        }
        sign * a[n - 1][n - 1].clone()
    }

    pub fn is_diagonal(&self) -> bool {
        (0..self.rows).all(|i| (0..self.cols).all(|j| i == j || self.get(i, j).is_zero()))
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] -= q * row[src]
    fn row_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = self.get(dst, j) - q * self.get(src, j);
            self.set(dst, j, v);
        }
    }

    /// col[dst] -= q * col[src]
    fn col_sub(&mut self, dst: usize, src: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = self.get(i, dst) - q * self.get(i, src);
            self.set(i, dst, v);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -self.get(r, j);
            self.set(r, j, v);
        }
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self.get(i, j).to_string()).collect();
            writeln!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

/// `U · A · V = D` with `U`, `V` unimodular and `D` diagonal with a
/// divisibility chain of nonnegative entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    pub fn diagonal(&self) -> Vec<BigInt> {
        (0..self.d.rows.min(self.d.cols)).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|x| !x.is_zero()).count()
    }
}

/// Smith normal form by gcd-driven row and column reduction, choosing the
/// pivot of least absolute value in the remaining block.
pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let (m, n) = (a.rows, a.cols);
    let mut d = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);

    for t in 0..m.min(n) {
        loop {
            // Least nonzero |entry| in the block [t.., t..].
            let mut best: Option<(usize, usize)> = None;
            for i in t..m {
                for j in t..n {
                    let x = d.get(i, j);
                    if x.is_zero() {
                        continue;
                    }
                    if best.is_none_or(|(bi, bj)| x.abs() < d.get(bi, bj).abs()) {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                // Remaining block is zero.
                return finish(u, d, v);
            };
            d.swap_rows(t, pi);
            u.swap_rows(t, pi);
            d.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..m {
                if d.get(i, t).is_zero() {
                    continue;
                }
                let q = d.get(i, t).div_floor(d.get(t, t));
                d.row_sub(i, t, &q);
                u.row_sub(i, t, &q);
                if !d.get(i, t).is_zero() {
                    clean = false;
                }
            }
            for j in t + 1..n {
                if d.get(t, j).is_zero() {
                    continue;
                }
                let q = d.get(t, j).div_floor(d.get(t, t));
                d.col_sub(j, t, &q);
                v.col_sub(j, t, &q);
                if !d.get(t, j).is_zero() {
                    clean = false;
                }
            }
            if !clean {
                continue;
            }
            // Pivot must divide the whole remaining block; otherwise fold an
            // offending row into row t and repeat.
            let p = d.get(t, t).clone();
            let bad = (t + 1..m).find(|&i| (t + 1..n).any(|j| !d.get(i, j).is_multiple_of(&p)));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    d.row_sub(t, i, &minus_one);
                    u.row_sub(t, i, &minus_one);
                }
                None => break,
            }
        }
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    finish(u, d, v)
}

fn finish(mut u: IntMatrix, mut d: IntMatrix, v: IntMatrix) -> SnfResult {
    for t in 0..d.rows.min(d.cols) {
        if d.get(t, t).is_negative() {
            d.negate_row(t);
            u.negate_row(t);
        }
    }
    SnfResult { u, d, v }
}

/// Free rank plus torsion coefficients (each ≥ 2, in divisibility order).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AbelianInvariants {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl AbelianInvariants {
    pub fn torsion_u64(&self) -> Vec<u64> {
        self.torsion.iter().map(|x| x.to_u64().unwrap_or(u64::MAX)).collect()
    }

    pub fn is_free_abelian(&self) -> bool {
        self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianInvariants {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts: Vec<String> = self.torsion.iter().map(|t| format!("Z/{t}")).collect();
        if self.free_rank > 0 {
            parts.push(if self.free_rank == 1 { "Z".into() } else { format!("Z^{}", self.free_rank) });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

/// Matrix whose rows are the exponent-sum vectors of the relators.
pub fn exponent_matrix(p: &Presentation) -> IntMatrix {
    let rank = p.alphabet().len();
    let rows: Vec<Vec<i64>> = p.relators().iter().map(|r| r.exponent_sums(rank)).collect();
    IntMatrix::from_rows(rank, &rows).expect("exponent vectors have alphabet length")
}

pub fn invariants_of(a: &IntMatrix) -> AbelianInvariants {
    let snf = smith_normal_form(a);
    let diag = snf.diagonal();
    let rank = diag.iter().filter(|x| !x.is_zero()).count();
    AbelianInvariants {
        free_rank: a.cols - rank,
        torsion: diag.into_iter().filter(|x| !x.is_zero() && !x.is_one()).collect(),
    }
}

/// `Z^|A|` modulo the exponent-sum rows of the relators.
pub fn abelianization(p: &Presentation) -> AbelianInvariants {
    invariants_of(&exponent_matrix(p))
}

/// Whether `v` lies in the integer row span of `a`.
pub fn lattice_membership(v: &[i64], a: &IntMatrix) -> Result<bool, MatrixError> {
    if v.len() != a.cols {
        return Err(MatrixError::DimensionMismatch { expected: a.cols, got: v.len() });
    }
    let snf = smith_normal_form(a);
    // x A = v  <=>  y D = v V  with y = x U⁻¹ ranging over all integer vectors.
    let row = IntMatrix::from_rows(v.len(), &[v.to_vec()])?;
    let c = row.mul(&snf.v)?;
    let diag = snf.diagonal();
    for j in 0..a.cols {
        let cj = c.get(0, j);
        let dj = diag.get(j).cloned().unwrap_or_else(BigInt::zero);
        let ok = if dj.is_zero() { cj.is_zero() } else { cj.is_multiple_of(&dj) };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_i64(r: &SnfResult) -> Vec<i64> {
        r.diagonal().iter().map(|x| x.to_i64().unwrap()).collect()
    }

    fn check(a: &IntMatrix, r: &SnfResult) {
        assert_eq!(r.u.mul(a).unwrap().mul(&r.v).unwrap(), r.d);
        assert!(r.d.is_diagonal());
        assert_eq!(r.u.determinant().abs(), BigInt::one());
        assert_eq!(r.v.determinant().abs(), BigInt::one());
    }

    #[test]
    fn snf_examples() {
        let a = IntMatrix::from_rows(1, &[vec![0]]).unwrap();
        let r = smith_normal_form(&a);
        check(&a, &r);
        assert_eq!(diag_i64(&r), vec![0]);

        let a = IntMatrix::from_rows(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        let r = smith_normal_form(&a);
        check(&a, &r);
        assert_eq!(diag_i64(&r), vec![1, 6]);

        let a = IntMatrix::from_rows(2, &[vec![2, 4], vec![6, 8]]).unwrap();
        let r = smith_normal_form(&a);
        check(&a, &r);
        assert_eq!(diag_i64(&r), vec![2, 4]);
    }

    #[test]
    fn snf_empty_and_rectangular() {
        for (rows, cols) in [(0, 0), (0, 3), (2, 0)] {
            let a = IntMatrix::zeros(rows, cols);
            let r = smith_normal_form(&a);
            check(&a, &r);
        }
        let a = IntMatrix::from_rows(3, &[vec![4, 6, 10]]).unwrap();
        let r = smith_normal_form(&a);
        check(&a, &r);
        assert_eq!(diag_i64(&r), vec![2]);
    }

    #[test]
    fn lattice_examples() {
        let a = IntMatrix::from_rows(1, &[vec![2]]).unwrap();
        assert!(!lattice_membership(&[1], &a).unwrap());
        assert!(lattice_membership(&[4], &a).unwrap());
        let a = IntMatrix::from_rows(2, &[vec![2, 0], vec![0, 3]]).unwrap();
        assert!(!lattice_membership(&[1, 1], &a).unwrap());
        assert!(lattice_membership(&[4, -3], &a).unwrap());
        assert!(matches!(
            lattice_membership(&[1], &a),
            Err(MatrixError::DimensionMismatch { .. })
        ));
        let empty = IntMatrix::zeros(0, 2);
        assert!(lattice_membership(&[0, 0], &empty).unwrap());
        assert!(!lattice_membership(&[0, 1], &empty).unwrap());
    }

    #[test]
    fn parse_matrix() {
        let m = IntMatrix::parse("# c\n1 2\n3 4\n").unwrap();
        assert_eq!((m.rows(), m.cols()), (2, 2));
        assert_eq!(m.determinant(), BigInt::from(-2));
        assert!(IntMatrix::parse("1 2\n3\n").is_err());
        assert!(IntMatrix::parse("1 x\n").is_err());
    }
}
