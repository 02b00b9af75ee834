//! Frozen-value and dual-route checks through the public API: every closed
//! form is pinned to hand-computed numbers and re-derived against the dense
//! pseudoinverse-Schur oracle on deterministic inputs.

use relaybounds_core::{
    build_cov, eigen_sym, eigenvalues_closed_expanded, is_feasible, layered_bound, mu, nd_bound,
    phi, phi_special, psi, schur_oracle_quadform, CorrelationParams, Cut, Lemma2Variant, LogBase,
    OptimizerConfig, OracleLayer, Rho12Mode,
};

fn corr(rho1: f64, rho2: f64, rho12: f64) -> CorrelationParams {
    CorrelationParams::new(rho1, rho2, rho12).unwrap()
}

#[test]
fn psi_hand_values_stay_frozen() {
    assert!((psi(2, 1, 0.5).unwrap() - 0.75).abs() < 1e-15);
    assert!((psi(3, 1, 0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
    // Full-cut form is linear in rho: N(1 + (N-1) rho).
    for n_relays in 1..=6usize {
        for k in -10..10 {
            let rho = k as f64 / 10.0;
            let expect = n_relays as f64 * (1.0 + (n_relays as f64 - 1.0) * rho);
            assert!((psi(n_relays, n_relays, rho).unwrap() - expect).abs() < 1e-12);
        }
    }
}

#[test]
fn phi_hand_values_stay_frozen() {
    let v = phi(2, Cut::new(1, 1), corr(0.0, 0.0, 0.5)).unwrap();
    assert!((v - 2.0 / 3.0).abs() < 1e-15, "got {v}");
    let v = phi(3, Cut::new(1, 1), corr(0.2, 0.1, 0.3)).unwrap();
    assert!((v - 0.84375).abs() < 1e-15, "got {v}");
}

#[test]
fn mu_hand_values_stay_frozen() {
    assert!((mu(3, 0.0) - 1.0).abs() < 1e-15);
    assert!(mu(5, 0.0).abs() < 1e-15);
    for n_relays in 1..=6 {
        assert!(mu(n_relays, 1.0).abs() < 1e-12);
        assert!(mu(1, 0.3).abs() < 1e-15);
    }
}

/// Deterministic feasible parameter sets: a small lattice filtered through
/// the feasibility predicate, far from degeneracy surfaces.
fn lattice(n_relays: usize) -> Vec<CorrelationParams> {
    let mut out = Vec::new();
    for &rho1 in &[-0.2, 0.0, 0.3, 0.7] {
        for &rho2 in &[-0.1, 0.2, 0.6] {
            for &rho12 in &[-0.25, 0.0, 0.15, 0.3] {
                let c = corr(rho1, rho2, rho12);
                if is_feasible(n_relays, c, 0.0).unwrap_or(false) {
                    out.push(c);
                }
            }
        }
    }
    out
}

#[test]
fn closed_forms_match_dense_oracle_on_lattice() {
    for n_relays in 1..=4usize {
        for n in 0..=n_relays {
            for m in 0..=n_relays {
                if n == 0 && m > 0 {
                    continue;
                }
                let cut = Cut::new(n, m);
                for c in lattice(n_relays) {
                    let or1 = schur_oracle_quadform(n_relays, cut, c, OracleLayer::Layer1).unwrap();
                    let ps = psi(n_relays, n, c.rho1).unwrap();
                    assert!(
                        (ps - or1).abs() <= 1e-10 * or1.abs().max(1.0),
                        "psi N={n_relays} cut=({n},{m}) c={c} closed={ps} oracle={or1}"
                    );
                    let or2 = schur_oracle_quadform(n_relays, cut, c, OracleLayer::Layer2).unwrap();
                    let ph = phi(n_relays, cut, c).unwrap();
                    assert!(
                        (ph - or2).abs() <= 1e-10 * or2.abs().max(1.0),
                        "phi N={n_relays} cut=({n},{m}) c={c} closed={ph} oracle={or2}"
                    );
                }
            }
        }
    }
}

#[test]
fn boundary_patterns_match_oracle_at_degenerate_points() {
    // Next-to-full cut at the negative cross-correlation endpoint.
    let c = corr(0.4, 0.0, -1.0);
    let cut = Cut::new(1, 1);
    let sp = phi_special(2, cut, c).unwrap();
    let or = schur_oracle_quadform(2, cut, c, OracleLayer::Layer2).unwrap();
    assert!(
        (sp - or).abs() <= 1e-10 * or.abs().max(1.0),
        "got {sp} vs {or}"
    );
    assert!((sp - 0.75).abs() < 1e-12);
    // Same pattern one size up.
    let c = corr(0.9, 0.6, -1.0);
    let cut = Cut::new(2, 2);
    let sp = phi_special(3, cut, c).unwrap();
    let or = schur_oracle_quadform(3, cut, c, OracleLayer::Layer2).unwrap();
    assert!((sp - or).abs() <= 1e-10 * or.abs().max(1.0));
    assert!((sp - mu(3, 0.6)).abs() < 1e-12);
    assert!((sp - 0.64).abs() < 1e-12);
    // Full second layer with saturated first layer.
    let c = corr(1.0, 0.5, 0.3);
    let sp = phi_special(2, Cut::new(1, 2), c).unwrap();
    let or = schur_oracle_quadform(2, Cut::new(1, 2), c, OracleLayer::Layer2).unwrap();
    assert!((sp - or).abs() <= 1e-10 * or.abs().max(1.0));
    assert!((sp - 2.64).abs() < 1e-12);
    // Everything saturated: interior cuts collapse to zero.
    let c = corr(1.0, 1.0, 1.0);
    for cut in [Cut::new(1, 1), Cut::new(2, 1)] {
        let sp = phi_special(3, cut, c).unwrap();
        let or = schur_oracle_quadform(3, cut, c, OracleLayer::Layer2).unwrap();
        assert!(sp.abs() < 1e-12 && or.abs() < 1e-8, "got {sp} vs {or}");
    }
}

#[test]
fn closed_spectrum_single_relay_hand_values() {
    let eig = eigenvalues_closed_expanded(1, corr(0.9, -0.4, 0.25)).unwrap();
    assert_eq!(eig.len(), 2);
    assert!((eig[0] - 0.75).abs() < 1e-12);
    assert!((eig[1] - 1.25).abs() < 1e-12);
    // Identity case: all eigenvalues are one.
    let eig = eigenvalues_closed_expanded(3, corr(0.0, 0.0, 0.0)).unwrap();
    assert!(eig.iter().all(|&v| (v - 1.0).abs() < 1e-14));
}

#[test]
fn closed_spectrum_matches_dense_on_lattice() {
    for n_relays in 1..=6usize {
        for c in lattice(n_relays) {
            let closed = eigenvalues_closed_expanded(n_relays, c).unwrap();
            let dense = eigen_sym(&build_cov(n_relays, c).unwrap()).unwrap();
            for (a, b) in closed.iter().zip(dense.iter()) {
                assert!(
                    (a - b).abs() < 1e-9,
                    "N={n_relays} c={c}: {closed:?} vs {dense:?}"
                );
            }
        }
    }
}

#[test]
fn anchor_bounds_single_relay_unit_gains() {
    let cfg = OptimizerConfig::new(1e-2, 1e-7, LogBase::Two, Rho12Mode::Zero).unwrap();
    let d = nd_bound(1, 1.0, 1.0, &cfg).unwrap();
    assert!((d.value - 0.5).abs() < 1e-6, "diamond {}", d.value);
    for mode in [Rho12Mode::Zero, Rho12Mode::Joint] {
        let cfg = OptimizerConfig::new(1e-2, 1e-7, LogBase::Two, mode).unwrap();
        let b = layered_bound(1, 1.0, 1.0, 1.0, Lemma2Variant::Min, &cfg).unwrap();
        assert!((b.value - 0.5).abs() < 1e-6, "layered {mode:?} {}", b.value);
    }
}
