//! Randomized invariants over the public API: spectrum agreement, symmetry
//! and reduction identities of the quadratic forms, feasibility interval
//! consistency, and structural properties of the generalized Schur
//! complement.

use proptest::prelude::*;
use relaybounds_core::{
    build_cov, eigen_sym, eigenvalues_closed_expanded, gen_schur, is_feasible, phi, psi,
    quad_form_ones, rho12_feasible_interval, zeta_interval, CorrelationParams, Cut, IndexSet,
    SymMatrix,
};

fn corr(rho1: f64, rho2: f64, rho12: f64) -> CorrelationParams {
    CorrelationParams::new(rho1, rho2, rho12).unwrap()
}

/// Relay count together with a correlation triple strictly inside the
/// positive-definite region, so the conditional forms stay well defined.
fn feasible_instance(n_max: usize) -> impl Strategy<Value = (usize, CorrelationParams)> {
    (1..=n_max)
        .prop_flat_map(|n_relays| {
            let lo = -0.9 / (n_relays as f64 - 1.0).max(1.0);
            (Just(n_relays), lo..0.95f64, lo..0.95f64).prop_flat_map(move |(n, rho1, rho2)| {
                let (_, hi) = rho12_feasible_interval(n, rho1, rho2)
                    .unwrap()
                    .expect("interval exists when intra correlations exceed -1/(N-1)");
                let cap = (hi * 0.9).max(1e-9);
                (Just(n), Just(rho1), Just(rho2), -cap..cap)
            })
        })
        .prop_map(|(n, rho1, rho2, rho12)| (n, corr(rho1, rho2, rho12)))
}

fn any_corr() -> impl Strategy<Value = CorrelationParams> {
    (-1.0..=1.0f64, -1.0..=1.0f64, -1.0..=1.0f64)
        .prop_map(|(rho1, rho2, rho12)| corr(rho1, rho2, rho12))
}

/// Random symmetric PSD matrix `G^T G` with entries of moderate size.
fn psd_matrix(dim: usize) -> impl Strategy<Value = SymMatrix> {
    prop::collection::vec(-1.0..1.0f64, dim * dim).prop_map(move |g| {
        SymMatrix::from_fn(dim, |i, j| {
            (0..dim).map(|k| g[k * dim + i] * g[k * dim + j]).sum()
        })
    })
}

/// Picks a cut for `n_relays` out of raw generator values.
fn pick_cut(n_relays: usize, raw_n: usize, raw_m: usize) -> Cut {
    let n = raw_n % (n_relays + 1);
    let m = raw_m % (n_relays + 1);
    if n == 0 && m > 0 {
        Cut::new(1, m)
    } else {
        Cut::new(n, m)
    }
}

proptest! {
    #[test]
    fn closed_spectrum_matches_dense(n_relays in 1..=8usize, c in any_corr()) {
        let closed = eigenvalues_closed_expanded(n_relays, c).unwrap();
        let dense = eigen_sym(&build_cov(n_relays, c).unwrap()).unwrap();
        prop_assert_eq!(closed.len(), dense.len());
        for (a, b) in closed.iter().zip(dense.iter()) {
            prop_assert!((a - b).abs() < 1e-9, "c={} closed={:?} dense={:?}", c, closed, dense);
        }
    }

    #[test]
    fn phi_is_even_in_cross_correlation(
        inst in feasible_instance(5),
        raw_n in 0..64usize,
        raw_m in 0..64usize,
    ) {
        let (n_relays, c) = inst;
        let cut = pick_cut(n_relays, raw_n, raw_m);
        let hi = rho12_feasible_interval(n_relays, c.rho1, c.rho2).unwrap().unwrap().1;
        for rho12 in [0.2 * hi, 0.6 * hi, 0.9 * hi] {
            let plus = phi(n_relays, cut, corr(c.rho1, c.rho2, rho12));
            let minus = phi(n_relays, cut, corr(c.rho1, c.rho2, -rho12));
            match (plus, minus) {
                (Ok(p), Ok(q)) => prop_assert!(
                    (p - q).abs() <= 1e-12 * p.abs().max(1.0),
                    "cut={} rho12={} p={} q={}", cut, rho12, p, q
                ),
                (Err(_), Err(_)) => {}
                (p, q) => prop_assert!(false, "parity mismatch: {:?} vs {:?}", p, q),
            }
        }
    }

    #[test]
    fn phi_reduces_to_psi_without_cross_correlation(
        n_relays in 1..=5usize,
        raw_n in 0..64usize,
        raw_m in 0..64usize,
        rho1 in -0.2..0.95f64,
        rho2 in -0.2..0.95f64,
    ) {
        let cut = pick_cut(n_relays, raw_n, raw_m);
        let v = phi(n_relays, cut, corr(rho1, rho2, 0.0)).unwrap();
        let w = psi(n_relays, cut.m, rho2).unwrap();
        prop_assert!((v - w).abs() <= 1e-12 * w.abs().max(1.0), "phi={} psi={}", v, w);
    }

    #[test]
    fn phi_nonnegative_on_feasible_region(
        inst in feasible_instance(5),
        raw_n in 0..64usize,
        raw_m in 0..64usize,
    ) {
        let (n_relays, c) = inst;
        let cut = pick_cut(n_relays, raw_n, raw_m);
        if let Ok(v) = phi(n_relays, cut, c) {
            prop_assert!(v >= -1e-10, "phi={} at N={} cut={} c={}", v, n_relays, cut, c);
        }
    }

    #[test]
    fn feasible_interval_consistent_with_spectrum(
        n_relays in 1..=6usize,
        rho1 in -1.0..=1.0f64,
        rho2 in -1.0..=1.0f64,
    ) {
        let interval = rho12_feasible_interval(n_relays, rho1, rho2).unwrap();
        prop_assume!(interval.is_some());
        let (lo, hi) = interval.unwrap();
        prop_assert!((lo + hi).abs() < 1e-15, "interval is symmetric");
        // The admissible box cap never exceeds the spectral cap.
        let z = zeta_interval(n_relays, rho1, rho2).unwrap();
        prop_assert!(z.hi <= hi + 1e-12);
        for rho12 in [lo, 0.0, hi] {
            if rho12.abs() <= 1.0 {
                prop_assert!(is_feasible(n_relays, corr(rho1, rho2, rho12), 1e-9).unwrap());
            }
        }
        let a = 1.0 + (n_relays as f64 - 1.0) * rho1;
        let b = 1.0 + (n_relays as f64 - 1.0) * rho2;
        prop_assume!(a * b > 1e-4);
        let beyond = hi + 1e-3;
        if beyond <= 1.0 {
            prop_assert!(!is_feasible(n_relays, corr(rho1, rho2, beyond), 0.0).unwrap());
        }
    }

    #[test]
    fn gen_schur_of_psd_is_psd(
        m in (2..=6usize).prop_flat_map(psd_matrix),
        mask in prop::collection::vec(0..3u8, 6),
    ) {
        let dim = m.dim();
        let target: Vec<usize> = (0..dim).filter(|&i| mask[i] == 1).collect();
        let cond: Vec<usize> = (0..dim).filter(|&i| mask[i] == 2).collect();
        prop_assume!(!target.is_empty());
        let s = gen_schur(&m, &IndexSet::new(target).unwrap(), &IndexSet::new(cond).unwrap()).unwrap();
        let eig = eigen_sym(&s).unwrap();
        let scale = m.max_abs().max(1.0);
        prop_assert!(eig[0] >= -1e-8 * scale, "min eigenvalue {}", eig[0]);
        // The all-ones form of a PSD matrix is nonnegative.
        prop_assert!(quad_form_ones(&s) >= -1e-8 * scale);
    }

    #[test]
    fn gen_schur_quadform_is_permutation_invariant(
        m in (2..=6usize).prop_flat_map(psd_matrix),
        mask in prop::collection::vec(0..3u8, 6),
        perm in Just((0..6usize).collect::<Vec<_>>()).prop_shuffle(),
    ) {
        let dim = m.dim();
        let target: Vec<usize> = (0..dim).filter(|&i| mask[i] == 1).collect();
        let cond: Vec<usize> = (0..dim).filter(|&i| mask[i] == 2).collect();
        prop_assume!(!target.is_empty());
        let p: Vec<usize> = perm.into_iter().filter(|&i| i < dim).collect();
        let pm = SymMatrix::from_fn(dim, |i, j| m.get(p[i], p[j]));
        // Index i of pm holds row p[i] of m, so sets map through the inverse.
        let mut inv = vec![0usize; dim];
        for (i, &pi) in p.iter().enumerate() {
            inv[pi] = i;
        }
        let tgt_p: Vec<usize> = target.iter().map(|&i| inv[i]).collect();
        let cond_p: Vec<usize> = cond.iter().map(|&i| inv[i]).collect();
        let q1 = quad_form_ones(
            &gen_schur(&m, &IndexSet::new(target).unwrap(), &IndexSet::new(cond).unwrap()).unwrap(),
        );
        let q2 = quad_form_ones(
            &gen_schur(&pm, &IndexSet::new(tgt_p).unwrap(), &IndexSet::new(cond_p).unwrap()).unwrap(),
        );
        prop_assert!((q1 - q2).abs() <= 1e-9 * q1.abs().max(1.0), "{} vs {}", q1, q2);
    }

    #[test]
    fn principal_submatrix_eigenvalues_interlace(
        m in (2..=7usize).prop_flat_map(psd_matrix),
        drop in 0..7usize,
    ) {
        let dim = m.dim();
        let drop = drop % dim;
        let keep: Vec<usize> = (0..dim).filter(|&i| i != drop).collect();
        let sub = m.principal_submatrix(&IndexSet::new(keep).unwrap()).unwrap();
        let big = eigen_sym(&m).unwrap();
        let small = eigen_sym(&sub).unwrap();
        let tol = 1e-8 * m.max_abs().max(1.0);
        for k in 0..small.len() {
            prop_assert!(big[k] <= small[k] + tol, "lower interlace at {}", k);
            prop_assert!(small[k] <= big[k + 1] + tol, "upper interlace at {}", k);
        }
    }

    #[test]
    fn cut_validation_enforces_shape(
        n_relays in 1..=6usize,
        n in 0..8usize,
        m in 0..8usize,
    ) {
        let ok = Cut::new(n, m).validate(n_relays).is_ok();
        prop_assert_eq!(ok, n <= n_relays && m <= n_relays, "cut=({}, {})", n, m);
        // The optimization domain additionally drops cuts whose first-layer
        // source side is empty while the second is not.
        let listed = relaybounds_core::enumerate_cuts(n_relays)
            .into_iter()
            .any(|c| c == Cut::new(n, m));
        prop_assert_eq!(listed, ok && !(n == 0 && m > 0));
    }
}
