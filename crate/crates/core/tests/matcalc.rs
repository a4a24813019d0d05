mod common;

use common::{random_matrix, random_spd, random_sym, rng};
use proptest::prelude::*;
use segfisher::matcalc::{eigh, kron, logdet_pd, vec, vec_triple_product};
use segfisher::{Error, Matrix, SpdMatrix, SymMatrix};

fn matrix_strategy(rows: usize, cols: usize) -> impl Strategy<Value = Matrix> {
    proptest::collection::vec(-3.0f64..3.0, rows * cols)
        .prop_map(move |data| Matrix::from_row_major(rows, cols, data).unwrap())
}

fn sym_strategy(d: usize) -> impl Strategy<Value = SymMatrix> {
    matrix_strategy(d, d).prop_map(|m| SymMatrix::symmetrize(m.add(&m.transpose()).unwrap().scale(0.5)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn vec_of_triple_product(a in matrix_strategy(2, 3), b in matrix_strategy(3, 4), c in matrix_strategy(4, 2)) {
        let direct = vec(&a.matmul(&b).unwrap().matmul(&c).unwrap());
        let via_kron = vec_triple_product(&a, &b, &c).unwrap();
        for (x, y) in direct.iter().zip(&via_kron) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }

    #[test]
    fn kron_mixed_product(a in matrix_strategy(2, 2), b in matrix_strategy(3, 3), c in matrix_strategy(2, 2), d in matrix_strategy(3, 3)) {
        let lhs = kron(&a, &b).matmul(&kron(&c, &d)).unwrap();
        let rhs = kron(&a.matmul(&c).unwrap(), &b.matmul(&d).unwrap());
        prop_assert!(lhs.max_abs_diff(&rhs).unwrap() <= 1e-10 * (1.0 + rhs.max_abs()));
    }

    #[test]
    fn eigh_reconstructs(s in sym_strategy(4)) {
        let e = eigh(&s).unwrap();
        let back = e.reassemble(e.values.iter().copied());
        prop_assert!(back.max_abs_diff(&s).unwrap() <= 1e-12 * (1.0 + s.max_abs()));
        let qtq = e.vectors.transpose().matmul(&e.vectors).unwrap();
        prop_assert!(qtq.max_abs_diff(&Matrix::identity(4)).unwrap() <= 1e-13);
        prop_assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn sqrt_psd_squares_back(g in matrix_strategy(3, 3)) {
        let s = SymMatrix::symmetrize(g.matmul(&g.transpose()).unwrap());
        let r = s.sqrt_psd().unwrap();
        prop_assert!(r.matmul(&r).unwrap().max_abs_diff(&s).unwrap() <= 1e-10 * (1.0 + s.max_abs()));
        prop_assert!(r.eigh().unwrap().values[0] >= -1e-12);
    }
}

#[test]
fn eigh_matches_two_by_two_formula() {
    let s = SymMatrix::new(Matrix::from_rows(&[[2.0, 1.0], [1.0, 2.0]])).unwrap();
    assert_eq!(
        eigh(&s)
            .unwrap()
            .values
            .iter()
            .map(|v| (v * 1e12).round() / 1e12)
            .collect::<Vec<_>>(),
        vec![1.0, 3.0]
    );
}

#[test]
fn cholesky_logdet_equals_eigenvalue_sum() {
    let mut r = rng(11);
    for d in 1..=6 {
        let s = random_spd(d, 0.5, &mut r);
        let by_eig: f64 = s.eigh().unwrap().values.iter().map(|l| l.ln()).sum();
        assert!((logdet_pd(&s) - by_eig).abs() < 1e-11 * (1.0 + by_eig.abs()));
        let inv = s.inverse();
        assert!(inv.matmul(&s).unwrap().max_abs_diff(&Matrix::identity(d)).unwrap() < 1e-11);
    }
}

#[test]
fn not_positive_definite_is_reported() {
    let s = SymMatrix::diag(&[1.0, -1.0]);
    assert!(matches!(SpdMatrix::new(s.clone()), Err(Error::NotPositiveDefinite)));
    assert!(!s.is_pd());
    assert!(matches!(s.sqrt_psd(), Err(Error::Domain(_))));
}

#[test]
fn asymmetric_input_is_rejected() {
    let m = Matrix::from_rows(&[[1.0, 2.0], [0.0, 1.0]]);
    assert!(SymMatrix::new(m).is_err());
    let mut r = rng(3);
    let g = random_matrix(3, &mut r);
    assert!(SymMatrix::new(g).is_err());
    assert!(SymMatrix::new(random_sym(3, &mut r).into_matrix()).is_ok());
}

#[test]
fn symmetric_json_round_trip() {
    let s = SymMatrix::new(Matrix::from_rows(&[[1.0, 0.5], [0.5, 2.0]])).unwrap();
    let text = serde_json::to_string(&s).unwrap();
    assert_eq!(text, r#"{"rows":2,"cols":2,"data":[1.0,0.5,0.5,2.0]}"#);
    let back: SymMatrix = serde_json::from_str(&text).unwrap();
    assert_eq!(back, s);
    let bad: Result<SymMatrix, _> = serde_json::from_str(r#"{"rows":2,"cols":2,"data":[1,2,3,4]}"#);
    assert!(bad.is_err());
}

#[test]
fn psd_clamp_accepts_tiny_negative_eigenvalues() {
    let s = SymMatrix::diag(&[1.0, -1e-12]);
    let r = s.sqrt_psd().unwrap();
    assert_eq!(r[(1, 1)], 0.0);
}
