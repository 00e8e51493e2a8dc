//! Dense matrices over a finite field, with elimination-based determinant
//! and rank, submatrix extraction, and a plain-text fixture format.

use std::fmt::Write as _;
use std::sync::Arc;

use crate::gf::{Elem, Field};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum MatError {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("index out of range")]
    IndexOutOfRange,
    #[error("empty row or column selection")]
    EmptySelection,
    #[error("malformed matrix text: {0}")]
    Parse(String),
}

/// Row-major dense matrix over a [`Field`]. Values are immutable after
/// construction; all operations are pure and return fresh matrices.
#[derive(Clone)]
pub struct MatGF {
    field: Arc<Field>,
    rows: usize,
    cols: usize,
    data: Vec<u32>,
}

impl MatGF {
    /// Builds a matrix from row-major codes. Panics if the data length does
    /// not match or any code is out of range; matrices are always built from
    /// already-validated codes.
    pub fn from_codes(field: Arc<Field>, rows: usize, cols: usize, data: Vec<u32>) -> MatGF {
        assert!(rows >= 1 && cols >= 1, "matrix dimensions must be >= 1");
        assert_eq!(data.len(), rows * cols, "data length mismatch");
        let q = field.q();
        assert!(
            data.iter().all(|&c| (c as u64) < q),
            "element code out of range for GF({q})"
        );
        MatGF {
            field,
            rows,
            cols,
            data,
        }
    }

    pub fn zeros(field: Arc<Field>, rows: usize, cols: usize) -> MatGF {
        MatGF::from_codes(field, rows, cols, vec![0; rows * cols])
    }

    pub fn identity(field: Arc<Field>, n: usize) -> MatGF {
        let mut data = vec![0u32; n * n];
        for i in 0..n {
            data[i * n + i] = 1;
        }
        MatGF::from_codes(field, n, n, data)
    }

    pub fn field(&self) -> &Arc<Field> {
        &self.field
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> Elem {
        self.field.elem(self.code(r, c) as u64).unwrap()
    }

    #[inline]
    pub fn code(&self, r: usize, c: usize) -> u32 {
        assert!(r < self.rows && c < self.cols);
        self.data[r * self.cols + c]
    }

    pub fn codes(&self) -> &[u32] {
        &self.data
    }

    pub fn set_code(&mut self, r: usize, c: usize, code: u32) {
        assert!(r < self.rows && c < self.cols);
        assert!((code as u64) < self.field.q());
        self.data[r * self.cols + c] = code;
    }

    pub fn transpose(&self) -> MatGF {
        let mut data = vec![0u32; self.rows * self.cols];
        for r in 0..self.rows {
            for c in 0..self.cols {
                data[c * self.rows + r] = self.code(r, c);
            }
        }
        MatGF::from_codes(self.field.clone(), self.cols, self.rows, data)
    }

    pub fn matmul(&self, other: &MatGF) -> MatGF {
        assert_eq!(self.cols, other.rows, "shape mismatch");
        let f = &self.field;
        let mut out = vec![0u32; self.rows * other.cols];
        for i in 0..self.rows {
            for j in 0..other.cols {
                let mut acc = 0u32;
                for k in 0..self.cols {
                    acc = f.add_c(acc, f.mul_c(self.code(i, k), other.code(k, j)));
                }
                out[i * other.cols + j] = acc;
            }
        }
        MatGF::from_codes(self.field.clone(), self.rows, other.cols, out)
    }

    /// Horizontal concatenation [self | other].
    pub fn hconcat(&self, other: &MatGF) -> MatGF {
        assert_eq!(self.rows, other.rows, "row count mismatch");
        let cols = self.cols + other.cols;
        let mut data = Vec::with_capacity(self.rows * cols);
        for r in 0..self.rows {
            data.extend_from_slice(&self.data[r * self.cols..(r + 1) * self.cols]);
            data.extend_from_slice(&other.data[r * other.cols..(r + 1) * other.cols]);
        }
        MatGF::from_codes(self.field.clone(), self.rows, cols, data)
    }

    /// Determinant via Gaussian elimination; sizes 1..=4 use cofactor
    /// expansion since census callers hit those billions of times.
    pub fn det(&self) -> Result<Elem, MatError> {
        if self.rows != self.cols {
            return Err(MatError::NotSquare {
                rows: self.rows,
                cols: self.cols,
            });
        }
        Ok(self
            .field
            .elem(det_codes(&self.field, &self.data, self.rows) as u64)
            .unwrap())
    }

    pub fn rank(&self) -> usize {
        let f = &self.field;
        let mut work = self.data.clone();
        let (rows, cols) = (self.rows, self.cols);
        let mut rank = 0;
        for col in 0..cols {
            // first nonzero pivot below the current rank row, in row order
            let pivot = (rank..rows).find(|&r| work[r * cols + col] != 0);
            let Some(pr) = pivot else { continue };
            work.swap_chunks(rank, pr, cols);
            let pinv = f.inv_c(work[rank * cols + col]);
            for r in rank + 1..rows {
                let factor = f.mul_c(work[r * cols + col], pinv);
                if factor != 0 {
                    for c in col..cols {
                        let sub = f.mul_c(factor, work[rank * cols + c]);
                        work[r * cols + c] = f.sub_c(work[r * cols + c], sub);
                    }
                }
            }
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }

    /// Gauss-Jordan inverse; None when singular.
    pub fn inverse(&self) -> Option<MatGF> {
        if self.rows != self.cols {
            return None;
        }
        let n = self.rows;
        let f = &self.field;
        let mut work = self.data.clone();
        let mut inv = MatGF::identity(self.field.clone(), n).data;
        for col in 0..n {
            let pr = (col..n).find(|&r| work[r * n + col] != 0)?;
            if pr != col {
                for c in 0..n {
                    work.swap(col * n + c, pr * n + c);
                    inv.swap(col * n + c, pr * n + c);
                }
            }
            let pinv = f.inv_c(work[col * n + col]);
            for c in 0..n {
                work[col * n + c] = f.mul_c(work[col * n + c], pinv);
                inv[col * n + c] = f.mul_c(inv[col * n + c], pinv);
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let factor = work[r * n + col];
                if factor != 0 {
                    for c in 0..n {
                        work[r * n + c] =
                            f.sub_c(work[r * n + c], f.mul_c(factor, work[col * n + c]));
                        inv[r * n + c] =
                            f.sub_c(inv[r * n + c], f.mul_c(factor, inv[col * n + c]));
                    }
                }
            }
        }
        Some(MatGF::from_codes(self.field.clone(), n, n, inv))
    }

    /// New matrix of the selected rows × columns; index lists must be
    /// strictly increasing and in range.
    pub fn submatrix(&self, row_idx: &[usize], col_idx: &[usize]) -> Result<MatGF, MatError> {
        if row_idx.is_empty() || col_idx.is_empty() {
            return Err(MatError::EmptySelection);
        }
        let increasing = |v: &[usize]| v.windows(2).all(|w| w[0] < w[1]);
        assert!(
            increasing(row_idx) && increasing(col_idx),
            "index lists must be strictly increasing"
        );
        if *row_idx.last().unwrap() >= self.rows || *col_idx.last().unwrap() >= self.cols {
            return Err(MatError::IndexOutOfRange);
        }
        let mut data = Vec::with_capacity(row_idx.len() * col_idx.len());
        for &r in row_idx {
            for &c in col_idx {
                data.push(self.code(r, c));
            }
        }
        Ok(MatGF::from_codes(
            self.field.clone(),
            row_idx.len(),
            col_idx.len(),
            data,
        ))
    }

    /// The s×s contiguous block whose bottom-right corner sits at the
    /// 1-based position (i, j).
    pub fn contiguous_submatrix(&self, i: usize, j: usize, s: usize) -> Result<MatGF, MatError> {
        if i < 1 || j < 1 || i > self.rows || j > self.cols || s < 1 || s > i.min(j) {
            return Err(MatError::IndexOutOfRange);
        }
        let rows: Vec<usize> = (i - s..i).collect();
        let cols: Vec<usize> = (j - s..j).collect();
        self.submatrix(&rows, &cols)
    }

    /// Fixture text format: first line "q rows cols", then one line per row
    /// of space-separated codes. Round-trips bit-exactly.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{} {} {}", self.field.q(), self.rows, self.cols).unwrap();
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| self.code(r, c).to_string())
                .collect();
            writeln!(out, "{}", row.join(" ")).unwrap();
        }
        out
    }

    pub fn from_text(text: &str) -> Result<MatGF, MatError> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| MatError::Parse("empty".into()))?;
        let head: Vec<u64> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| MatError::Parse(format!("bad header token {t:?}"))))
            .collect::<Result<_, _>>()?;
        let [q, rows, cols] = head[..] else {
            return Err(MatError::Parse("header must be \"q rows cols\"".into()));
        };
        let field = Arc::new(
            Field::new(q).map_err(|e| MatError::Parse(format!("bad field order: {e}")))?,
        );
        let mut data = Vec::with_capacity((rows * cols) as usize);
        for line in lines.take(rows as usize) {
            for tok in line.split_whitespace() {
                let code: u64 = tok
                    .parse()
                    .map_err(|_| MatError::Parse(format!("bad code {tok:?}")))?;
                if code >= q {
                    return Err(MatError::Parse(format!("code {code} out of range")));
                }
                data.push(code as u32);
            }
        }
        if data.len() != (rows * cols) as usize {
            return Err(MatError::Parse("wrong number of entries".into()));
        }
        Ok(MatGF::from_codes(field, rows as usize, cols as usize, data))
    }
}

impl std::fmt::Debug for MatGF {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "MatGF(GF({}), {}x{}, {:?})",
            self.field.q(),
            self.rows,
            self.cols,
            self.data
        )
    }
}

impl PartialEq for MatGF {
    fn eq(&self, other: &Self) -> bool {
        self.field.q() == other.field.q()
            && self.rows == other.rows
            && self.cols == other.cols
            && self.data == other.data
    }
}

trait SwapChunks {
    fn swap_chunks(&mut self, a: usize, b: usize, width: usize);
}

impl SwapChunks for Vec<u32> {
    fn swap_chunks(&mut self, a: usize, b: usize, width: usize) {
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        let (left, right) = self.split_at_mut(hi * width);
        left[lo * width..(lo + 1) * width].swap_with_slice(&mut right[..width]);
    }
}

/// Determinant over raw codes; `n` is the side length and `data` row-major
/// of length n*n. Sizes 1-4 are expanded by cofactors, larger sizes
/// eliminate in place with the first nonzero pivot per column.
pub(crate) fn det_codes(f: &Field, data: &[u32], n: usize) -> u32 {
    match n {
        0 => 1,
        1 => data[0],
        2 => det2(f, data[0], data[1], data[2], data[3]),
        3 => det3(f, data),
        4 => det4(f, data),
        5..=12 => {
            // stack copy; this path runs inside Monte Carlo inner loops
            let mut work = [0u32; 144];
            work[..n * n].copy_from_slice(data);
            det_eliminate(f, &mut work[..n * n], n)
        }
        _ => det_eliminate(f, &mut data.to_vec(), n),
    }
}

#[inline]
fn det2(f: &Field, a: u32, b: u32, c: u32, d: u32) -> u32 {
    f.sub_c(f.mul_c(a, d), f.mul_c(b, c))
}

#[inline]
fn det3(f: &Field, m: &[u32]) -> u32 {
    let c0 = f.mul_c(m[0], det2(f, m[4], m[5], m[7], m[8]));
    let c1 = f.mul_c(m[1], det2(f, m[3], m[5], m[6], m[8]));
    let c2 = f.mul_c(m[2], det2(f, m[3], m[4], m[6], m[7]));
    f.add_c(f.sub_c(c0, c1), c2)
}

#[inline]
fn det4(f: &Field, m: &[u32]) -> u32 {
    // Laplace expansion along the first row over 3x3 cofactors.
    let minor = |c: usize| {
        let mut sub = [0u32; 9];
        let mut k = 0;
        for r in 1..4 {
            for cc in 0..4 {
                if cc != c {
                    sub[k] = m[r * 4 + cc];
                    k += 1;
                }
            }
        }
        det3(f, &sub)
    };
    let t0 = f.mul_c(m[0], minor(0));
    let t1 = f.mul_c(m[1], minor(1));
    let t2 = f.mul_c(m[2], minor(2));
    let t3 = f.mul_c(m[3], minor(3));
    f.sub_c(f.add_c(f.sub_c(t0, t1), t2), t3)
}

fn det_eliminate(f: &Field, work: &mut [u32], n: usize) -> u32 {
    let mut det = 1u32;
    for col in 0..n {
        let Some(pr) = (col..n).find(|&r| work[r * n + col] != 0) else {
            return 0;
        };
        if pr != col {
            for c in 0..n {
                work.swap(col * n + c, pr * n + c);
            }
            det = f.neg_c(det);
        }
        let pivot = work[col * n + col];
        det = f.mul_c(det, pivot);
        let pinv = f.inv_c(pivot);
        for r in col + 1..n {
            let factor = f.mul_c(work[r * n + col], pinv);
            if factor != 0 {
                for c in col..n {
                    let sub = f.mul_c(factor, work[col * n + c]);
                    work[r * n + c] = f.sub_c(work[r * n + c], sub);
                }
            }
        }
    }
    det
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(q: u64, rows: usize, cols: usize, data: &[u32]) -> MatGF {
        MatGF::from_codes(Arc::new(Field::new(q).unwrap()), rows, cols, data.to_vec())
    }

    #[test]
    fn det_2x2_examples() {
        assert_eq!(mat(5, 2, 2, &[1, 1, 1, 2]).det().unwrap().code(), 1);
        assert_eq!(mat(5, 2, 2, &[1, 2, 2, 4]).det().unwrap().code(), 0);
    }

    #[test]
    fn det_identity() {
        let f = Arc::new(Field::new(2).unwrap());
        assert_eq!(MatGF::identity(f, 3).det().unwrap().code(), 1);
    }

    #[test]
    fn det_rejects_rectangular() {
        assert_eq!(
            mat(5, 2, 3, &[1, 1, 1, 1, 2, 3]).det(),
            Err(MatError::NotSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn rank_examples() {
        assert_eq!(mat(2, 2, 3, &[1, 0, 1, 0, 1, 1]).rank(), 2);
        assert_eq!(mat(3, 2, 2, &[0, 0, 0, 0]).rank(), 0);
        assert_eq!(mat(5, 2, 2, &[1, 2, 2, 4]).rank(), 1);
    }

    #[test]
    fn det_nonzero_iff_full_rank_exhaustive() {
        // all 2x2 and 3x3 matrices over GF(2) and GF(3)
        for q in [2u64, 3] {
            let f = Arc::new(Field::new(q).unwrap());
            for n in [2usize, 3] {
                let total = q.pow((n * n) as u32);
                for enc in 0..total {
                    let mut data = Vec::with_capacity(n * n);
                    let mut e = enc;
                    for _ in 0..n * n {
                        data.push((e % q) as u32);
                        e /= q;
                    }
                    let m = MatGF::from_codes(f.clone(), n, n, data);
                    let nonsingular = m.det().unwrap().code() != 0;
                    assert_eq!(nonsingular, m.rank() == n, "q={q} n={n} enc={enc}");
                }
            }
        }
    }

    #[test]
    fn gf2_nonsingular_2x2_count_is_6_of_16() {
        // brute force; matches q^{k^2} * (1 - 1/q)(1 - 1/q^2) = 16 * 3/8
        let f = Arc::new(Field::new(2).unwrap());
        let mut nonsingular = 0;
        for enc in 0..16u32 {
            let data = vec![enc & 1, (enc >> 1) & 1, (enc >> 2) & 1, (enc >> 3) & 1];
            if MatGF::from_codes(f.clone(), 2, 2, data).det().unwrap().code() != 0 {
                nonsingular += 1;
            }
        }
        assert_eq!(nonsingular, 6);
    }

    #[test]
    fn det_larger_than_cofactor_fastpath() {
        // 5x5 Cauchy-like nonsingular matrix vs a singular one, exercising
        // the elimination route.
        let f = Arc::new(Field::new(11).unwrap());
        let xs = [0u32, 1, 2, 3, 4];
        let ys = [5u32, 6, 7, 8, 9];
        let mut data = Vec::new();
        for &x in &xs {
            for &y in &ys {
                data.push(f.inv_c(f.sub_c(x, y)));
            }
        }
        let m = MatGF::from_codes(f.clone(), 5, 5, data);
        assert_ne!(m.det().unwrap().code(), 0);

        let mut rows_equal = m.clone();
        for c in 0..5 {
            let v = rows_equal.code(0, c);
            rows_equal.set_code(1, c, v);
        }
        assert_eq!(rows_equal.det().unwrap().code(), 0);
    }

    #[test]
    fn submatrix_selection() {
        let m = mat(7, 3, 3, &[0, 1, 2, 3, 4, 5, 6, 0, 1]);
        let sub = m.submatrix(&[1, 2], &[0, 1]).unwrap();
        assert_eq!(sub.codes(), &[3, 4, 6, 0]);
        let full = m.submatrix(&[0, 1, 2], &[0, 1, 2]).unwrap();
        assert_eq!(full, m);
        assert_eq!(
            m.submatrix(&[], &[0]).unwrap_err(),
            MatError::EmptySelection
        );
        assert_eq!(
            m.submatrix(&[0, 3], &[0]).unwrap_err(),
            MatError::IndexOutOfRange
        );
    }

    #[test]
    fn submatrix_five_columns_of_wide_matrix() {
        // a 5x5 block picked out of a 5x16 matrix by column selection
        let f = Arc::new(Field::new(7).unwrap());
        let data: Vec<u32> = (0..80).map(|i| (i % 7) as u32).collect();
        let m = MatGF::from_codes(f, 5, 16, data);
        let sub = m.submatrix(&[0, 1, 2, 3, 4], &[0, 4, 7, 11, 13]).unwrap();
        assert_eq!(sub.rows(), 5);
        assert_eq!(sub.cols(), 5);
        for r in 0..5 {
            for (sc, &mc) in [0usize, 4, 7, 11, 13].iter().enumerate() {
                assert_eq!(sub.code(r, sc), m.code(r, mc));
            }
        }
    }

    #[test]
    fn submatrix_composes() {
        let m = mat(5, 4, 5, &[
            0, 1, 2, 3, 4,
            1, 2, 3, 4, 0,
            2, 3, 4, 0, 1,
            3, 4, 0, 1, 2,
        ]);
        let first = m.submatrix(&[0, 2, 3], &[1, 2, 4]).unwrap();
        let second = first.submatrix(&[0, 2], &[0, 2]).unwrap();
        let direct = m.submatrix(&[0, 3], &[1, 4]).unwrap();
        assert_eq!(second, direct);
    }

    #[test]
    fn contiguous_anchoring() {
        // 9x9 matrix with distinct-ish entries; anchor (5,7), s=4 selects
        // rows 2..5 x cols 4..7 (1-based).
        let f = Arc::new(Field::new(97).unwrap());
        let data: Vec<u32> = (0..81).map(|i| i as u32).collect();
        let m = MatGF::from_codes(f, 9, 9, data);
        let b = m.contiguous_submatrix(5, 7, 4).unwrap();
        assert_eq!(b.rows(), 4);
        assert_eq!(b.code(0, 0), m.code(1, 3));
        assert_eq!(b.code(3, 3), m.code(4, 6));

        assert_eq!(m.contiguous_submatrix(1, 1, 1).unwrap().codes(), &[0]);
        let whole = m.contiguous_submatrix(9, 9, 9).unwrap();
        assert_eq!(whole, m);
        assert!(m.contiguous_submatrix(3, 5, 4).is_err());
    }

    #[test]
    fn det_transpose_and_row_scaling() {
        let f = Arc::new(Field::new(7).unwrap());
        let m = MatGF::from_codes(f.clone(), 3, 3, vec![1, 2, 3, 4, 5, 6, 1, 1, 2]);
        assert_eq!(m.det().unwrap(), m.transpose().det().unwrap());
        // scaling one row by c multiplies det by c
        for c in 1..7u32 {
            let mut scaled = m.clone();
            for j in 0..3 {
                scaled.set_code(1, j, f.mul_c(c, m.code(1, j)));
            }
            assert_eq!(
                scaled.det().unwrap().code(),
                f.mul_c(c, m.det().unwrap().code())
            );
        }
    }

    #[test]
    fn text_roundtrip() {
        let m = mat(9, 2, 3, &[0, 8, 3, 5, 1, 7]);
        let text = m.to_text();
        assert_eq!(text, "9 2 3\n0 8 3\n5 1 7\n");
        let back = MatGF::from_text(&text).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn text_parse_errors() {
        assert!(MatGF::from_text("").is_err());
        assert!(MatGF::from_text("6 1 1\n0\n").is_err()); // not a prime power
        assert!(MatGF::from_text("5 1 2\n0\n").is_err()); // missing entry
        assert!(MatGF::from_text("5 1 1\n7\n").is_err()); // code out of range
    }
}
