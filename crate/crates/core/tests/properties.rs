//! Property tests for invariants that hold on all inputs:
//! KL-projection feasibility and dual structure, the rescaling lemma,
//! best-approximation of the continued-fraction rounding, and exact
//! skew-symmetry of wedges.

use majscale::blapps::wedge;
use majscale::exactla::{gr_from_i64, gram_schmidt, rank, ExactMat};
use majscale::permproj::{in_permutahedron, kl_project, MajorizationTarget};
use majscale::shrunk::continued_fraction_round;
use num_rational::BigRational;
use num_traits::Signed;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn kl_projection_invariants(
        q in prop::collection::vec(0.0..5.0f64, 1..9),
        raw_alpha in prop::collection::vec(0.01..2.0f64, 1..9),
        eps_probe in 0.01..0.5f64,
    ) {
        let n = q.len().min(raw_alpha.len());
        let q = &q[..n];
        let mut alpha = raw_alpha[..n].to_vec();
        alpha.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let target = MajorizationTarget::new(alpha).unwrap();
        let proj = kl_project(q, &target).unwrap();
        // primal feasibility and nonnegative divergence
        prop_assert!(in_permutahedron(&proj.p, &target, 1e-9));
        prop_assert!(proj.divergence >= 0.0);
        // dual is nonincreasing and nonnegative
        for w in proj.dual_x.windows(2) {
            prop_assert!(w[0] >= w[1] - 1e-12);
        }
        prop_assert!(proj.dual_x.iter().all(|&x| x >= 0.0));
        // rescaling lemma at the divergence-implied accuracy
        let eps = (2.0 * proj.divergence / target.first()).sqrt().max(eps_probe);
        let scaled: Vec<f64> = q.iter().map(|&v| v * (-eps).exp()).collect();
        prop_assert!(in_permutahedron(&scaled, &target, 1e-9));
    }

    #[test]
    fn cf_round_is_best(x in -0.999..0.999f64, bound in 1u64..30) {
        let got = continued_fraction_round(x, bound).unwrap();
        prop_assert!(got.denom().abs() <= num_bigint::BigInt::from(bound).into());
        let target = BigRational::from_float(x).unwrap();
        let err = (&got - &target).abs();
        for q in 1..=bound {
            let p = (x * q as f64).round() as i64;
            let cand = BigRational::new(p.into(), (q as i64).into());
            prop_assert!(err <= (&cand - &target).abs() + BigRational::new(0.into(), 1.into()),
                "better candidate {cand} for x = {x}");
        }
    }

    #[test]
    fn wedge_is_skew_and_low_rank(
        a in prop::collection::vec(-3i64..=3, 2..5),
        b in prop::collection::vec(-3i64..=3, 2..5),
    ) {
        let n = a.len().min(b.len());
        let av: Vec<_> = a[..n].iter().map(|&v| gr_from_i64(v, 0)).collect();
        let bv: Vec<_> = b[..n].iter().map(|&v| gr_from_i64(v, 0)).collect();
        let w = wedge(&av, &bv);
        // exactly skew-symmetric
        for i in 0..n {
            for j in 0..n {
                prop_assert_eq!(w.at(i, j).clone(), gr_from_i64(0, 0) - w.at(j, i).clone());
            }
        }
        prop_assert!(rank(&w) <= 2);
    }

    #[test]
    fn exact_projector_laws(
        entries in prop::collection::vec((-2i64..=2, -2i64..=2), 8),
    ) {
        // two vectors in C^4; skip dependent inputs
        let v1: Vec<_> = entries[..4].iter().map(|&(re, im)| gr_from_i64(re, im)).collect();
        let v2: Vec<_> = entries[4..8].iter().map(|&(re, im)| gr_from_i64(re, im)).collect();
        let m = ExactMat::from_columns(4, &[v1.clone(), v2.clone()]);
        prop_assume!(rank(&m) == 2);
        let (_, p) = gram_schmidt(&[v1.clone(), v2.clone()]).unwrap();
        prop_assert_eq!(p.mul(&p), p.clone());
        prop_assert!(p.is_hermitian());
        prop_assert_eq!(p.mul_vec(&v1), v1);
    }
}
