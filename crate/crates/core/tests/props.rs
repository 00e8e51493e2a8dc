//! Property tests for the algebraic invariants that hold across arbitrary
//! inputs rather than specific fixtures.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use superreg_core::gf::Field;
use superreg_core::mat::MatGF;
use superreg_core::ratpoly::lagrange_monic;
use superreg_core::regularity::{is_contiguous_super_regular, is_super_regular};

fn small_field() -> impl Strategy<Value = u64> {
    prop::sample::select(vec![2u64, 3, 4, 5, 7, 8, 9, 11, 13, 16])
}

fn matrix(max_dim: usize) -> impl Strategy<Value = MatGF> {
    (small_field(), 1..=max_dim, 1..=max_dim).prop_flat_map(|(q, rows, cols)| {
        prop::collection::vec(0..q as u32, rows * cols).prop_map(move |data| {
            MatGF::from_codes(Arc::new(Field::new(q).unwrap()), rows, cols, data)
        })
    })
}

fn square_matrix(max_dim: usize) -> impl Strategy<Value = MatGF> {
    (small_field(), 1..=max_dim).prop_flat_map(|(q, n)| {
        prop::collection::vec(0..q as u32, n * n)
            .prop_map(move |data| MatGF::from_codes(Arc::new(Field::new(q).unwrap()), n, n, data))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn det_invariant_under_transpose(m in square_matrix(5)) {
        prop_assert_eq!(m.det().unwrap(), m.transpose().det().unwrap());
    }

    #[test]
    fn det_scales_with_row_scaling(m in square_matrix(4), scale in 1u32.., row in 0usize..4) {
        let f = m.field().clone();
        let q = f.q() as u32;
        let scale = scale % (q - 1) + 1;
        let row = row % m.rows();
        let mut scaled = m.clone();
        for c in 0..m.cols() {
            scaled.set_code(row, c, f.mul_c(scale, m.code(row, c)));
        }
        prop_assert_eq!(
            scaled.det().unwrap().code(),
            f.mul_c(scale, m.det().unwrap().code())
        );
    }

    #[test]
    fn det_nonzero_iff_full_rank(m in square_matrix(5)) {
        prop_assert_eq!(m.det().unwrap().code() != 0, m.rank() == m.rows());
    }

    #[test]
    fn text_format_roundtrips(m in matrix(5)) {
        let back = MatGF::from_text(&m.to_text()).unwrap();
        prop_assert_eq!(back, m);
    }

    #[test]
    fn predicates_invariant_under_transpose(m in square_matrix(4)) {
        let t = m.transpose();
        prop_assert_eq!(is_super_regular(&m), is_super_regular(&t));
        prop_assert_eq!(is_contiguous_super_regular(&m), is_contiguous_super_regular(&t));
    }

    #[test]
    fn super_regular_implies_contiguous(m in square_matrix(4)) {
        if is_super_regular(&m) {
            prop_assert!(is_contiguous_super_regular(&m));
        }
    }

    #[test]
    fn submatrix_composition(m in matrix(6)) {
        // taking every other row/column twice equals the direct selection
        let rows: Vec<usize> = (0..m.rows()).step_by(2).collect();
        let cols: Vec<usize> = (0..m.cols()).collect();
        let first = m.submatrix(&rows, &cols).unwrap();
        let rows2: Vec<usize> = (0..first.rows()).collect();
        let cols2: Vec<usize> = (0..first.cols()).step_by(2).collect();
        let second = first.submatrix(&rows2, &cols2).unwrap();
        let direct_cols: Vec<usize> = (0..m.cols()).step_by(2).collect();
        let direct = m.submatrix(&rows, &direct_cols).unwrap();
        prop_assert_eq!(second, direct);
    }

    #[test]
    fn monic_interpolation_hits_points(
        points in prop::collection::btree_map(-100i64..100, -10_000i64..10_000, 1..=9)
    ) {
        let pts: Vec<(BigInt, BigInt)> = points
            .iter()
            .map(|(&a, &b)| (BigInt::from(a), BigInt::from(b)))
            .collect();
        let p = lagrange_monic(&pts, pts.len()).unwrap();
        prop_assert!(p.is_monic());
        prop_assert_eq!(p.degree(), Some(pts.len()));
        for (a, b) in &pts {
            let v = p.eval(&BigRational::from_integer(a.clone()));
            prop_assert_eq!(v, BigRational::from_integer(b.clone()));
        }
    }
}
