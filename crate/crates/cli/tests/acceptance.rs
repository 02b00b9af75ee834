//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single PASS line on success (visible with `--nocapture`); a failure shows
//! up as the test's own failure output.

use std::process::Command;
use std::time::{Duration, Instant};

use relaybounds_core::{
    enumerate_cuts, layered_bound, nd_bound, phi, psi, verify_eigen, verify_lemma3, verify_limits,
    verify_maxima, verify_oracle, verify_timeshare_onesided, CorrelationParams, Lemma2Variant,
    LogBase, OptimizerConfig, Rho12Mode,
};

fn cfg(grid: f64, refine: f64, mode: Rho12Mode) -> OptimizerConfig {
    OptimizerConfig::new(grid, refine, LogBase::Two, mode).expect("valid config")
}

#[test]
fn criterion_1_oracle_equivalence() {
    let start = Instant::now();
    let report = verify_oracle(5, 1000, 42).expect("oracle suite runs");
    let elapsed = start.elapsed();
    assert!(
        report.pass(),
        "quadratic forms disagree with the pseudoinverse oracle:\n{}",
        report.render()
    );
    assert!(
        elapsed < Duration::from_secs(10),
        "oracle suite took {elapsed:?}"
    );
    println!("criterion 1 PASS: oracle equivalence, 1000 samples per form, N <= 5, {elapsed:?}");
}

#[test]
fn criterion_2_reduction_at_zero_cross_correlation() {
    let tol = 1e-12;
    let mut checked = 0usize;
    for n_relays in 1..=5usize {
        for cut in enumerate_cuts(n_relays) {
            for i1 in -10..=10i32 {
                for i2 in -10..=10i32 {
                    let rho1 = f64::from(i1) / 10.0;
                    let rho2 = f64::from(i2) / 10.0;
                    let c = CorrelationParams::new(rho1, rho2, 0.0).unwrap();
                    let lhs = phi(n_relays, cut, c);
                    let rhs = psi(n_relays, cut.m, rho2);
                    match (lhs, rhs) {
                        (Ok(a), Ok(b)) => {
                            assert!(
                                (a - b).abs() <= tol,
                                "N={n_relays} cut=({},{}) rho=({rho1},{rho2}): {a} vs {b}",
                                cut.n,
                                cut.m
                            );
                            checked += 1;
                        }
                        (Err(_), Err(_)) => {}
                        (a, b) => panic!(
                            "degeneracy mismatch at N={n_relays} cut=({},{}) \
                             rho=({rho1},{rho2}): {a:?} vs {b:?}",
                            cut.n, cut.m
                        ),
                    }
                }
            }
        }
    }
    println!(
        "criterion 2 PASS: phi at rho12=0 equals psi(m, rho2) within {tol} \
         on {checked} grid points"
    );
}

#[test]
fn criterion_3_evenness_and_maxima() {
    let report = verify_maxima(5, 500, 42).expect("maxima suite runs");
    assert!(
        report.pass(),
        "evenness / derivative / dominance checks failed:\n{}",
        report.render()
    );
    println!(
        "criterion 3 PASS: evenness 1e-12, first derivative 1e-6, \
         curvature 1e-4 rel and nonpositive, zero point dominates"
    );
}

#[test]
fn criterion_4_joint_optimization_matches_zero() {
    let mut gains = Vec::new();
    for &a in &[0.1, 1.0, 10.0] {
        for &b in &[0.1, 1.0, 10.0] {
            for &c in &[0.1, 1.0, 10.0] {
                gains.push([a, b, c]);
            }
        }
    }
    let start = Instant::now();
    let report = verify_lemma3(3, &gains, &cfg(1e-2, 1e-8, Rho12Mode::Joint))
        .expect("joint-vs-zero suite runs");
    let elapsed = start.elapsed();
    assert!(
        report.pass(),
        "joint maximization beat the zero-cross-correlation bound:\n{}",
        report.render()
    );
    assert!(elapsed < Duration::from_secs(180), "suite took {elapsed:?}");
    println!(
        "criterion 4 PASS: N <= 3, 27 gain triples, joint within \
         max(2 refine_tol, 1e-6) of zero mode, {elapsed:?}"
    );
}

#[test]
fn criterion_5_special_values_and_limits() {
    let report = verify_limits(5).expect("limits suite runs");
    assert!(
        report.pass(),
        "special-case values or limit classifications failed:\n{}",
        report.render()
    );
    println!("criterion 5 PASS: degenerate-pattern values match the oracle, limits classify");
}

#[test]
fn criterion_6_eigenvalue_forms() {
    let report = verify_eigen(8, 1000, 42).expect("eigen suite runs");
    assert!(
        report.pass(),
        "closed-form spectrum disagrees with the dense eigensolver:\n{}",
        report.render()
    );
    println!("criterion 6 PASS: closed-form spectra within 1e-9 of dense solves, N <= 8");
}

#[test]
fn criterion_7_anchor_values() {
    let zero = cfg(1e-3, 1e-8, Rho12Mode::Zero);
    let d1 = nd_bound(1, 1.0, 1.0, &zero).expect("single relay diamond");
    assert!(
        (d1.value - 0.5).abs() <= 1e-6,
        "diamond N=1 value {}",
        d1.value
    );

    let l1 =
        layered_bound(1, 1.0, 1.0, 1.0, Lemma2Variant::Min, &zero).expect("single relay two-layer");
    assert!(
        (l1.value - 0.5).abs() <= 1e-6,
        "two-layer N=1 value {}",
        l1.value
    );

    let target = 1.160964047443681; // log2(5) / 2
    let d2 = nd_bound(2, 1e6, 1.0, &zero).expect("strong first hop diamond");
    assert!(
        (d2.value - target).abs() <= 2.0 * zero.grid_step,
        "diamond N=2 value {} vs {target}",
        d2.value
    );
    println!(
        "criterion 7 PASS: half-bit anchors at N=1, strong-first-hop N=2 \
         within 2 grid steps of log2(5)/2"
    );
}

#[test]
fn criterion_8_one_sided_symmetrization() {
    let report = verify_timeshare_onesided(2, 200, 42, &cfg(1e-2, 1e-6, Rho12Mode::Zero))
        .expect("symmetrization suite runs");
    assert!(
        report.pass(),
        "an unstructured matrix beat the structured bound by more than 1e-6:\n{}",
        report.render()
    );
    println!("criterion 8 PASS: 200 random unit-diagonal PSD matrices stay within 1e-6");
}

#[test]
fn criterion_9_byte_identical_cli_output() {
    let bin = env!("CARGO_BIN_EXE_relaybounds");
    let runs: [&[&str]; 2] = [
        &[
            "verify",
            "--suite",
            "oracle",
            "--seed",
            "42",
            "--samples",
            "50",
            "--nmax",
            "3",
        ],
        &[
            "layered",
            "--relays",
            "2",
            "--r1",
            "10",
            "--r2",
            "1",
            "--r3",
            "1",
            "--variant",
            "min",
            "--rho12-mode",
            "joint",
            "--grid",
            "1e-2",
            "--format",
            "json",
        ],
    ];
    for args in runs {
        let out1 = Command::new(bin).args(args).output().expect("first run");
        let out2 = Command::new(bin).args(args).output().expect("second run");
        assert!(out1.status.success(), "{args:?} failed: {out1:?}");
        assert_eq!(out1.status.code(), out2.status.code(), "{args:?}");
        assert_eq!(out1.stdout, out2.stdout, "stdout differs for {args:?}");
    }
    println!("criterion 9 PASS: repeated runs are byte-identical on stdout");
}
