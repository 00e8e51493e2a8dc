//! Regularity predicates and constructions: super-regular and contiguous
//! super-regular tests, corner decompositions, bad values, MDS generator
//! checks, and Cauchy matrices.
//!
//! A matrix is super-regular (SR) when every square submatrix, over every
//! row/column selection, is nonsingular; contiguous super-regular (CSR)
//! when every contiguous square block is nonsingular. SR implies CSR. For
//! rectangular inputs the CSR predicate generalizes the square definition
//! to "every contiguous square block nonsingular"; that extension is ours,
//! not part of the source definitions.

use std::sync::Arc;

use crate::gf::{Elem, Field};
use crate::mat::{det_codes, MatGF};

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum RegError {
    #[error("matrix too small for a corner decomposition")]
    TooSmall,
    #[error("interior matrix is singular; the bad value is not unique")]
    SingularInterior,
    #[error("x and y parameters must be pairwise distinct")]
    NotDistinct,
    #[error("generator matrix is rank deficient")]
    RankDeficient,
}

/// Which regularity predicate a census or estimate runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum Kind {
    #[serde(rename = "SR")]
    Sr,
    #[serde(rename = "CSR")]
    Csr,
}

impl std::fmt::Display for Kind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Kind::Sr => "SR",
            Kind::Csr => "CSR",
        })
    }
}

/// Visits the k-subsets of 0..n in lexicographic order; the callback
/// returns false to stop early. Returns false iff stopped early.
pub(crate) fn for_each_combination(
    n: usize,
    k: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> bool {
    debug_assert!(k >= 1 && k <= n);
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        if !visit(&idx) {
            return false;
        }
        // rightmost index that can still advance
        let mut i = k;
        while i > 0 {
            i -= 1;
            if idx[i] < n - k + i {
                idx[i] += 1;
                for j in i + 1..k {
                    idx[j] = idx[j - 1] + 1;
                }
                break;
            }
            if i == 0 {
                return true;
            }
        }
    }
}

/// True iff every square submatrix of `m` (all sizes, all row/column
/// selections) is nonsingular. Sizes ascend and index sets are visited
/// lexicographically so the cheap small rejections fire first.
pub fn is_super_regular(m: &MatGF) -> bool {
    let f = m.field();
    let (rows, cols) = (m.rows(), m.cols());
    let mut buf = Vec::with_capacity(rows.min(cols) * rows.min(cols));
    for s in 1..=rows.min(cols) {
        let mut all_ok = true;
        for_each_combination(rows, s, |r_idx| {
            for_each_combination(cols, s, |c_idx| {
                buf.clear();
                for &r in r_idx {
                    for &c in c_idx {
                        buf.push(m.code(r, c));
                    }
                }
                if det_codes(f, &buf, s) == 0 {
                    all_ok = false;
                }
                all_ok
            });
            all_ok
        });
        if !all_ok {
            return false;
        }
    }
    true
}

/// True iff every contiguous square block of `m` is nonsingular; raster
/// scan over anchors with early exit.
pub fn is_contiguous_super_regular(m: &MatGF) -> bool {
    let f = m.field();
    let (rows, cols) = (m.rows(), m.cols());
    let mut buf = Vec::with_capacity(rows.min(cols) * rows.min(cols));
    for i in 1..=rows {
        for j in 1..=cols {
            for s in 1..=i.min(j) {
                buf.clear();
                for r in i - s..i {
                    for c in j - s..j {
                        buf.push(m.code(r, c));
                    }
                }
                if det_codes(f, &buf, s) == 0 {
                    return false;
                }
            }
        }
    }
    true
}

/// The (B̄, u, v) split of a square matrix: interior block, bottom row
/// without its corner, right column without its corner.
#[derive(Debug, Clone)]
pub struct CornerDecomposition {
    pub bbar: MatGF,
    pub u: Vec<Elem>,
    pub v: Vec<Elem>,
}

pub fn corner_decomposition(b: &MatGF) -> Result<CornerDecomposition, RegError> {
    let n = b.rows();
    assert_eq!(n, b.cols(), "corner decomposition requires a square matrix");
    if n < 2 {
        return Err(RegError::TooSmall);
    }
    let idx: Vec<usize> = (0..n - 1).collect();
    let bbar = b.submatrix(&idx, &idx).unwrap();
    let u: Vec<Elem> = (0..n - 1).map(|c| b.get(n - 1, c)).collect();
    let v: Vec<Elem> = (0..n - 1).map(|r| b.get(r, n - 1)).collect();
    Ok(CornerDecomposition { bbar, u, v })
}

/// The unique corner entry X(B) = uᵗ B̄⁻¹ v that makes B singular, when the
/// interior B̄ is nonsingular. For a 1×1 matrix the bad value is 0. When
/// B̄ is singular the bad value is not unique (there are either none or q
/// of them) and `SingularInterior` is returned.
pub fn bad_value(b: &MatGF) -> Result<Elem, RegError> {
    let n = b.rows();
    assert_eq!(n, b.cols(), "bad value requires a square matrix");
    let f = b.field();
    if n == 1 {
        return Ok(f.zero());
    }
    let interior: Vec<u32> = {
        let mut codes = Vec::with_capacity((n - 1) * (n - 1));
        for r in 0..n - 1 {
            for c in 0..n - 1 {
                codes.push(b.code(r, c));
            }
        }
        codes
    };
    let rhs: Vec<u32> = (0..n - 1).map(|r| b.code(r, n - 1)).collect();
    let w = solve_codes(f, interior, rhs, n - 1).ok_or(RegError::SingularInterior)?;
    let mut x = 0u32;
    for (c, wc) in w.iter().enumerate() {
        x = f.add_c(x, f.mul_c(b.code(n - 1, c), *wc));
    }
    Ok(f.elem(x as u64).unwrap())
}

/// Solves A w = b over the field; returns None when A is singular.
pub(crate) fn solve_codes(
    f: &Field,
    mut a: Vec<u32>,
    mut b: Vec<u32>,
    n: usize,
) -> Option<Vec<u32>> {
    for col in 0..n {
        let pr = (col..n).find(|&r| a[r * n + col] != 0)?;
        if pr != col {
            for c in 0..n {
                a.swap(col * n + c, pr * n + c);
            }
            b.swap(col, pr);
        }
        let pinv = f.inv_c(a[col * n + col]);
        for r in col + 1..n {
            let factor = f.mul_c(a[r * n + col], pinv);
            if factor != 0 {
                for c in col..n {
                    let sub = f.mul_c(factor, a[col * n + c]);
                    a[r * n + c] = f.sub_c(a[r * n + c], sub);
                }
                b[r] = f.sub_c(b[r], f.mul_c(factor, b[col]));
            }
        }
    }
    // back substitution
    let mut w = vec![0u32; n];
    for r in (0..n).rev() {
        let mut acc = b[r];
        for c in r + 1..n {
            acc = f.sub_c(acc, f.mul_c(a[r * n + c], w[c]));
        }
        w[r] = f.mul_c(acc, f.inv_c(a[r * n + r]));
    }
    Some(w)
}

/// Bad values of the anchored blocks at a position, one per block size.
#[derive(Debug, Clone)]
pub struct BadValueSet {
    /// 1-based anchor position.
    pub anchor: (usize, usize),
    /// `values[t]` is the bad value of the (t+1)×(t+1) anchored block.
    pub values: Vec<Elem>,
    /// True iff every block interior was nonsingular, so each block has
    /// exactly one bad value and `values` is complete.
    pub all_defined: bool,
}

/// Computes the bad value of each square block anchored at the 1-based
/// position (i, j), stopping at the first block whose interior is singular.
pub fn bad_values_at(m: &MatGF, i: usize, j: usize) -> BadValueSet {
    assert!(i >= 1 && j >= 1 && i <= m.rows() && j <= m.cols());
    let mut values = Vec::with_capacity(i.min(j));
    let mut all_defined = true;
    for t in 1..=i.min(j) {
        let block = m.contiguous_submatrix(i, j, t).unwrap();
        match bad_value(&block) {
            Ok(x) => values.push(x),
            Err(RegError::SingularInterior) => {
                all_defined = false;
                break;
            }
            Err(_) => unreachable!(),
        }
    }
    BadValueSet {
        anchor: (i, j),
        values,
        all_defined,
    }
}

/// True iff every k columns of the k×n generator are linearly independent,
/// i.e. the generated [n,k] code is MDS.
pub fn is_mds_generator(g: &MatGF) -> Result<bool, RegError> {
    let (k, n) = (g.rows(), g.cols());
    assert!(k <= n, "generator must have at least as many columns as rows");
    if g.rank() < k {
        return Err(RegError::RankDeficient);
    }
    let f = g.field();
    let mut buf = Vec::with_capacity(k * k);
    let ok = for_each_combination(n, k, |c_idx| {
        buf.clear();
        for r in 0..k {
            for &c in c_idx {
                buf.push(g.code(r, c));
            }
        }
        det_codes(f, &buf, k) != 0
    });
    Ok(ok)
}

/// The k×k matrix with entries (x_i - y_j)⁻¹; guaranteed super-regular
/// when the 2k parameters are distinct.
pub fn cauchy_matrix(field: Arc<Field>, xs: &[Elem], ys: &[Elem]) -> Result<MatGF, RegError> {
    assert_eq!(xs.len(), ys.len(), "need k x-parameters and k y-parameters");
    let mut seen: Vec<u32> = xs.iter().chain(ys.iter()).map(|e| e.code()).collect();
    seen.sort_unstable();
    if seen.windows(2).any(|w| w[0] == w[1]) {
        return Err(RegError::NotDistinct);
    }
    let k = xs.len();
    let f = &field;
    let mut data = Vec::with_capacity(k * k);
    for &x in xs {
        for &y in ys {
            data.push(f.inv_c(f.sub_c(x.code(), y.code())));
        }
    }
    Ok(MatGF::from_codes(field.clone(), k, k, data))
}
