use proptest::prelude::*;

use ma2certify_core::eigenperturb::{
    conjugate_to_general, derivatives_at_diagonal, eigen2x2_closed_form, eigen_decompose, fd_eigen_derivatives,
};
use ma2certify_core::SymmetricMatrix;

fn sym(n: usize) -> impl Strategy<Value = SymmetricMatrix> {
    prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |v| {
        let mut d = vec![0.0; n * n];
        for p in 0..n {
            for q in 0..n {
                d[p * n + q] = if p <= q { v[p * n + q] } else { v[q * n + p] };
            }
        }
        SymmetricMatrix::new(n, d).unwrap()
    })
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn decomposition_is_orthonormal_and_descending(w in sym(4)) {
        let e = eigen_decompose(&w).unwrap();
        prop_assert!(e.eigenvalues.windows(2).all(|p| p[0] >= p[1]));
        for i in 0..4 {
            let wv = w.mul_vec(&e.eigenvectors[i]);
            for (a, b) in wv.iter().zip(&e.eigenvectors[i]) {
                prop_assert!((a - e.eigenvalues[i] * b).abs() < 1e-12);
            }
            for j in 0..4 {
                let expect = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot(&e.eigenvectors[i], &e.eigenvectors[j]) - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn closed_form_matches_generic(w in sym(2)) {
        let g = eigen_decompose(&w).unwrap();
        prop_assume!(g.gap > 1e-6);
        let c = eigen2x2_closed_form(&w).unwrap();
        for k in 0..2 {
            prop_assert!((c.eigenvalues[k] - g.eigenvalues[k]).abs() < 1e-12);
            prop_assert!((dot(&c.eigenvectors[k], &g.eigenvectors[k]).abs() - 1.0).abs() < 1e-12);
        }
    }

    /// Trace of the first-order eigenvalue derivative sums to the identity
    /// direction: d/dε λ_k(W + εI) = 1.
    #[test]
    fn shift_direction_moves_eigenvalues_rigidly(w in sym(3)) {
        let e = eigen_decompose(&w).unwrap();
        prop_assume!(e.gap_of(0) > 0.1);
        let d = conjugate_to_general(&w, 0).unwrap();
        let (l1, t1) = d.first_directional(&SymmetricMatrix::identity(3).unwrap());
        let (l2, t2) = d.second_directional(&SymmetricMatrix::identity(3).unwrap());
        prop_assert!((l1 - 1.0).abs() < 1e-10);
        prop_assert!(l2.abs() < 1e-9);
        prop_assert!(t1.iter().chain(&t2).all(|v| v.abs() < 1e-9));
    }

    /// The first-order eigenvector derivative stays orthogonal to the eigenvector.
    #[test]
    fn unit_norm_is_preserved_to_first_order(w in sym(3), e in sym(3)) {
        let sys = eigen_decompose(&w).unwrap();
        prop_assume!(sys.gap_of(0) > 0.1);
        let d = conjugate_to_general(&w, 0).unwrap();
        let (_, t1) = d.first_directional(&e);
        prop_assert!(dot(&t1, &sys.eigenvectors[0]).abs() < 1e-9);
    }

    #[test]
    fn general_kernel_agrees_with_finite_differences(w in sym(3)) {
        let sys = eigen_decompose(&w).unwrap();
        prop_assume!(sys.gap_of(1) > 0.3);
        let exact = conjugate_to_general(&w, 1).unwrap().fold();
        let fd = fd_eigen_derivatives(&w, 1, 1e-5).unwrap();
        let (e1, e2) = exact.relative_errors(&fd);
        prop_assert!(e1 < 1e-6, "first {}", e1);
        prop_assert!(e2 < 1e-3, "second {}", e2);
    }
}

#[test]
fn diagonal_kernel_worked_values() {
    // diag(3, 1): dλ/dW11 = 1 for the top pair, and the vector turns toward
    // e2 at rate 1/(λ1 - λ2) under W21.
    let w = SymmetricMatrix::diagonal(&[3.0, 1.0]).unwrap();
    let d = derivatives_at_diagonal(&w, 0).unwrap();
    assert_eq!(d.d_lambda[[0, 0]], 1.0);
    assert_eq!(d.d_lambda[[1, 1]], 0.0);
    assert_eq!(d.d_tau[[1, 1, 0]], 0.5);
    let folded = d.fold();
    let fd = fd_eigen_derivatives(&w, 0, 1e-5).unwrap();
    let (e1, e2) = folded.relative_errors(&fd);
    assert!(e1 < 1e-8 && e2 < 1e-4, "{e1} {e2}");
}
