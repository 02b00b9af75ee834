//! The structured `2N x 2N` correlation matrix and its feasibility region.
//!
//! Index layout: entries `0..N` are the first-layer relays, `N..2N` the
//! second-layer relays. The matrix has unit diagonal, `rho1` between distinct
//! first-layer entries, `rho2` between distinct second-layer entries, and
//! `rho12` between every cross-layer pair.
//!
//! The spectrum is known in closed form: `1 - rho1` and `1 - rho2` each with
//! multiplicity `N - 1`, plus the two eigenvalues of the aggregate block
//! `[[1+(N-1)rho1, N rho12], [N rho12, 1+(N-1)rho2]]`. Feasibility (positive
//! semidefiniteness) is therefore equivalent to `rho1, rho2 <= 1`, both
//! `1+(N-1)rho_i >= 0`, and `N^2 rho12^2 <= (1+(N-1)rho1)(1+(N-1)rho2)`.
//!
//! Two descriptions of the admissible cross correlation coexist here and do
//! not coincide: the box interval [`zeta_interval`] (`[-1, min(a,b)/N]`) and
//! the exact PSD interval [`rho12_feasible_interval`]
//! (`[-sqrt(ab)/N, sqrt(ab)/N]`). The box is looser at the bottom and tighter
//! at the top. Optimizers intersect the two rather than picking one.

use crate::error::Error;
use crate::linalg::SymMatrix;
use crate::Result;

/// Default absolute tolerance on the minimum eigenvalue in feasibility tests.
/// Entries are O(1) and several degenerate cases of interest sit exactly on
/// the PSD boundary, so the slack only needs to absorb rounding.
pub const FEASIBILITY_TOL: f64 = 1e-12;

/// Network size and channel gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Relays per layer (`N >= 1`).
    pub relays: usize,
    /// Source-to-first-layer channel gain (`> 0`).
    pub r1: f64,
    /// First-to-second-layer channel gain (`> 0`).
    pub r2: f64,
    /// Second-layer-to-destination channel gain (`> 0`).
    pub r3: f64,
}

impl NetworkParams {
    /// Validated constructor.
    pub fn new(relays: usize, r1: f64, r2: f64, r3: f64) -> Result<Self> {
        if relays == 0 {
            return Err(Error::invalid("relay count must be at least 1"));
        }
        for (name, g) in [("r1", r1), ("r2", r2), ("r3", r3)] {
            if !(g > 0.0) || !g.is_finite() {
                return Err(Error::invalid(format!(
                    "gain {name} must be positive and finite, got {g}"
                )));
            }
        }
        Ok(NetworkParams { relays, r1, r2, r3 })
    }
}

/// Correlation triple `(rho1, rho2, rho12)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrelationParams {
    /// Intra-correlation of the first layer.
    pub rho1: f64,
    /// Intra-correlation of the second layer.
    pub rho2: f64,
    /// Cross-layer correlation.
    pub rho12: f64,
}

impl CorrelationParams {
    /// Validated constructor: each component must lie in `[-1, 1]`.
    pub fn new(rho1: f64, rho2: f64, rho12: f64) -> Result<Self> {
        for (name, v) in [("rho1", rho1), ("rho2", rho2), ("rho12", rho12)] {
            if !(-1.0..=1.0).contains(&v) {
                return Err(Error::invalid(format!(
                    "{name} must lie in [-1, 1], got {v}"
                )));
            }
        }
        Ok(CorrelationParams { rho1, rho2, rho12 })
    }

    /// Unvalidated constructor for internal grids whose coordinates are
    /// in-range by construction.
    pub(crate) fn new_unchecked(rho1: f64, rho2: f64, rho12: f64) -> Self {
        CorrelationParams { rho1, rho2, rho12 }
    }
}

impl std::fmt::Display for CorrelationParams {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "(rho1={}, rho2={}, rho12={})",
            self.rho1, self.rho2, self.rho12
        )
    }
}

/// Admissible cross-correlation box interval `[-1, min(a, b) / N]` where
/// `a = 1+(N-1)rho1` and `b = 1+(N-1)rho2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZetaInterval {
    /// Lower endpoint (always -1).
    pub lo: f64,
    /// Upper endpoint `min(a, b) / N`.
    pub hi: f64,
}

impl ZetaInterval {
    /// True when `x` lies in the closed interval.
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Builds the structured correlation matrix for `n_relays` per layer.
pub fn build_cov(n_relays: usize, c: CorrelationParams) -> Result<SymMatrix> {
    if n_relays == 0 {
        return Err(Error::invalid("relay count must be at least 1"));
    }
    let n = n_relays;
    Ok(SymMatrix::from_fn(2 * n, |i, j| {
        if i == j {
            1.0
        } else {
            match (i < n, j < n) {
                (true, true) => c.rho1,
                (false, false) => c.rho2,
                _ => c.rho12,
            }
        }
    }))
}

/// The box interval for the cross correlation: `[-1, min(a, b) / N]`.
pub fn zeta_interval(n_relays: usize, rho1: f64, rho2: f64) -> Result<ZetaInterval> {
    if n_relays == 0 {
        return Err(Error::invalid("relay count must be at least 1"));
    }
    let n = n_relays as f64;
    let a = 1.0 + (n - 1.0) * rho1;
    let b = 1.0 + (n - 1.0) * rho2;
    Ok(ZetaInterval {
        lo: -1.0,
        hi: a.min(b) / n,
    })
}

/// Exact positive-semidefiniteness interval for the cross correlation at
/// fixed `(rho1, rho2)`: `[-sqrt(ab)/N, sqrt(ab)/N]` with `a = 1+(N-1)rho1`,
/// `b = 1+(N-1)rho2`. Returns `None` when either aggregate coefficient is
/// negative or an intra correlation exceeds 1 (no cross correlation makes the
/// matrix PSD there).
pub fn rho12_feasible_interval(
    n_relays: usize,
    rho1: f64,
    rho2: f64,
) -> Result<Option<(f64, f64)>> {
    if n_relays == 0 {
        return Err(Error::invalid("relay count must be at least 1"));
    }
    let n = n_relays as f64;
    if rho1 > 1.0 || rho2 > 1.0 {
        return Ok(None);
    }
    let a = 1.0 + (n - 1.0) * rho1;
    let b = 1.0 + (n - 1.0) * rho2;
    if a < 0.0 || b < 0.0 {
        return Ok(None);
    }
    let half = (a * b).sqrt() / n;
    Ok(Some((-half, half)))
}

/// Closed-form spectrum of the structured matrix as ascending
/// `(eigenvalue, multiplicity)` groups with exactly equal values merged.
///
/// `1 - rho1` and `1 - rho2` each appear `N - 1` times; the remaining two
/// eigenvalues are those of the aggregate block
/// `[[1+(N-1)rho1, N rho12], [N rho12, 1+(N-1)rho2]]`. Total multiplicity
/// is `2N`. The simpler expressions `1 - N rho12 + (N-1) rho_i` sometimes
/// quoted for the aggregate pair are exact only when `rho1 == rho2`; see
/// [`eigenvalues_equal_rho_forms`].
pub fn eigenvalues_closed(n_relays: usize, c: CorrelationParams) -> Result<Vec<(f64, usize)>> {
    if n_relays == 0 {
        return Err(Error::invalid("relay count must be at least 1"));
    }
    let n = n_relays as f64;
    let a = 1.0 + (n - 1.0) * c.rho1;
    let b = 1.0 + (n - 1.0) * c.rho2;
    let mid = 0.5 * (a + b);
    let disc = (0.5 * (a - b)).hypot(n * c.rho12);
    let mut groups: Vec<(f64, usize)> = Vec::with_capacity(4);
    if n_relays > 1 {
        groups.push((1.0 - c.rho1, n_relays - 1));
        groups.push((1.0 - c.rho2, n_relays - 1));
    }
    groups.push((mid - disc, 1));
    groups.push((mid + disc, 1));
    groups.sort_by(|x, y| x.0.partial_cmp(&y.0).expect("finite eigenvalues"));
    let mut merged: Vec<(f64, usize)> = Vec::with_capacity(groups.len());
    for (val, mult) in groups {
        match merged.last_mut() {
            Some(last) if last.0 == val => last.1 += mult,
            _ => merged.push((val, mult)),
        }
    }
    Ok(merged)
}

/// [`eigenvalues_closed`] expanded to a flat ascending list of `2N` values,
/// convenient for elementwise comparison against a dense eigensolve.
pub fn eigenvalues_closed_expanded(n_relays: usize, c: CorrelationParams) -> Result<Vec<f64>> {
    let groups = eigenvalues_closed(n_relays, c)?;
    Ok(groups
        .into_iter()
        .flat_map(|(v, k)| std::iter::repeat(v).take(k))
        .collect())
}

/// The simplified aggregate-eigenvalue expressions
/// `1 - N rho12 + (N-1) rho_i`, exact members of the spectrum when
/// `rho1 == rho2` (or `rho12 == 0`), and approximations otherwise.
///
/// Returned as `[with rho1, with rho2]` so callers can measure their distance
/// to the true spectrum.
pub fn eigenvalues_equal_rho_forms(n_relays: usize, c: CorrelationParams) -> [f64; 2] {
    let n = n_relays as f64;
    [
        1.0 - n * c.rho12 + (n - 1.0) * c.rho1,
        1.0 - n * c.rho12 + (n - 1.0) * c.rho2,
    ]
}

/// True when the structured matrix is positive semidefinite within the
/// absolute tolerance `tol` (min eigenvalue `>= -tol`), using the closed-form
/// spectrum. Pass [`FEASIBILITY_TOL`] unless a caller has a reason not to.
pub fn is_feasible(n_relays: usize, c: CorrelationParams, tol: f64) -> Result<bool> {
    if tol < 0.0 {
        return Err(Error::invalid("feasibility tolerance must be nonnegative"));
    }
    let groups = eigenvalues_closed(n_relays, c)?;
    Ok(groups[0].0 >= -tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::eigen_sym;

    fn cp(rho1: f64, rho2: f64, rho12: f64) -> CorrelationParams {
        CorrelationParams::new(rho1, rho2, rho12).unwrap()
    }

    #[test]
    fn build_cov_layout() {
        let q = build_cov(2, cp(0.5, 0.1, 0.3)).unwrap();
        assert_eq!(q.dim(), 4);
        assert_eq!(q.get(0, 0), 1.0);
        assert_eq!(q.get(0, 1), 0.5);
        assert_eq!(q.get(2, 3), 0.1);
        assert_eq!(q.get(0, 2), 0.3);
        assert_eq!(q.get(1, 3), 0.3);
    }

    #[test]
    fn zeta_examples() {
        // Uncorrelated layers with two relays: hi = 1/2.
        let z = zeta_interval(2, 0.0, 0.0).unwrap();
        assert_eq!(z.lo, -1.0);
        assert_eq!(z.hi, 0.5);
        // Fully correlated first layer, uncorrelated second, three relays:
        // min(3, 1)/3 = 1/3.
        let z = zeta_interval(3, 1.0, 0.0).unwrap();
        assert_eq!(z.lo, -1.0);
        assert!((z.hi - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zeta_contains_zero_for_nonnegative_rho() {
        for &(r1, r2) in &[(0.0, 0.0), (0.3, 0.9), (1.0, 0.2)] {
            let z = zeta_interval(4, r1, r2).unwrap();
            assert!(z.contains(0.0));
            assert!(z.lo >= -1.0 && z.hi <= 1.0);
        }
    }

    #[test]
    fn feasibility_examples() {
        assert!(is_feasible(2, cp(0.0, 0.0, 0.0), FEASIBILITY_TOL).unwrap());
        // Cross correlation 0.6 with two relays pushes an aggregate
        // eigenvalue to 1 - 1.2 < 0.
        assert!(!is_feasible(2, cp(0.0, 0.0, 0.6), FEASIBILITY_TOL).unwrap());
        // The all-ones matrix is PSD (rank one).
        assert!(is_feasible(2, cp(1.0, 1.0, 1.0), FEASIBILITY_TOL).unwrap());
    }

    #[test]
    fn identity_spectrum_merges_to_one_group() {
        let groups = eigenvalues_closed(2, cp(0.0, 0.0, 0.0)).unwrap();
        assert_eq!(groups, vec![(1.0, 4)]);
    }

    #[test]
    fn closed_spectrum_matches_dense_smoke() {
        let c = cp(0.5, 0.1, 0.3);
        let closed = eigenvalues_closed_expanded(2, c).unwrap();
        let dense = eigen_sym(&build_cov(2, c).unwrap()).unwrap();
        assert_eq!(closed.len(), dense.len());
        for (x, y) in closed.iter().zip(dense.iter()) {
            assert!((x - y).abs() < 1e-12, "closed {closed:?} dense {dense:?}");
        }
    }

    #[test]
    fn single_relay_spectrum_has_no_repeated_parts() {
        let closed = eigenvalues_closed_expanded(1, cp(0.9, -0.4, 0.25)).unwrap();
        assert_eq!(closed.len(), 2);
        assert!((closed[0] - 0.75).abs() < 1e-15);
        assert!((closed[1] - 1.25).abs() < 1e-15);
    }

    #[test]
    fn equal_rho_forms_are_spectrum_members_when_rhos_match() {
        let c = cp(0.4, 0.4, 0.2);
        let forms = eigenvalues_equal_rho_forms(3, c);
        let spectrum = eigenvalues_closed_expanded(3, c).unwrap();
        for f in forms {
            assert!(
                spectrum.iter().any(|l| (l - f).abs() < 1e-12),
                "form {f} missing from {spectrum:?}"
            );
        }
    }

    #[test]
    fn psd_interval_vs_box_interval() {
        // a = 1, b = 1.9 at N = 2: box top 0.5 < sqrt(1.9)/2 ~ 0.689,
        // box bottom -1 < -0.689.
        let (lo, hi) = rho12_feasible_interval(2, 0.0, 0.9).unwrap().unwrap();
        let z = zeta_interval(2, 0.0, 0.9).unwrap();
        assert!(z.lo < lo);
        assert!(z.hi < hi);
        // Exact PSD interval must agree with the eigenvalue test at its edge.
        assert!(is_feasible(2, cp(0.0, 0.9, hi), FEASIBILITY_TOL).unwrap());
        assert!(!is_feasible(2, cp(0.0, 0.9, hi + 1e-6), FEASIBILITY_TOL).unwrap());
    }

    #[test]
    fn validation_errors() {
        assert!(NetworkParams::new(0, 1.0, 1.0, 1.0).is_err());
        assert!(NetworkParams::new(2, 0.0, 1.0, 1.0).is_err());
        assert!(CorrelationParams::new(1.5, 0.0, 0.0).is_err());
        assert!(build_cov(0, cp(0.0, 0.0, 0.0)).is_err());
        assert!(is_feasible(2, cp(0.0, 0.0, 0.0), -1.0).is_err());
    }
}
