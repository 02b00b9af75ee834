//! Dense symmetric linear algebra: the independent oracle.
//!
//! Everything here works on explicit matrices and makes no use of the
//! structured closed forms elsewhere in the crate, so it can serve as the
//! reference route when validating them. Matrices are tiny (at most
//! `2N x 2N` for a few dozen relays), so a cyclic Jacobi eigensolver is both
//! simple and accurate: it converges quadratically and keeps symmetric
//! matrices symmetric by construction.

use crate::error::Error;
use crate::Result;

/// Default relative rank tolerance for [`pinv`]: eigenvalues with magnitude
/// below `RANK_TOL_REL * max|eigenvalue|` are treated as zero.
pub const RANK_TOL_REL: f64 = 1e-10;

/// Maximum Jacobi sweeps before giving up. Quadratic convergence settles
/// well-scaled matrices of this size in under ten sweeps.
const MAX_JACOBI_SWEEPS: usize = 64;

/// Dense symmetric matrix with full row-major storage.
#[derive(Debug, Clone, PartialEq)]
pub struct SymMatrix {
    dim: usize,
    data: Vec<f64>,
}

impl SymMatrix {
    /// Zero matrix of dimension `dim`.
    pub fn zeros(dim: usize) -> Self {
        SymMatrix {
            dim,
            data: vec![0.0; dim * dim],
        }
    }

    /// Identity matrix of dimension `dim`.
    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.data[i * dim + i] = 1.0;
        }
        m
    }

    /// Build from a symmetric generator: entry `(i, j)` is `f(i, j)`.
    /// Only `i <= j` is sampled; the transpose entry is mirrored.
    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let v = f(i, j);
                m.data[i * dim + j] = v;
                m.data[j * dim + i] = v;
            }
        }
        m
    }

    /// Build from row-major entries, validating symmetry to `1e-12`.
    pub fn from_rows(dim: usize, rows: &[f64]) -> Result<Self> {
        if rows.len() != dim * dim {
            return Err(Error::invalid(format!(
                "expected {} entries for a {dim} x {dim} matrix, got {}",
                dim * dim,
                rows.len()
            )));
        }
        for i in 0..dim {
            for j in (i + 1)..dim {
                let a = rows[i * dim + j];
                let b = rows[j * dim + i];
                if (a - b).abs() > 1e-12 {
                    return Err(Error::invalid(format!(
                        "asymmetric input: entry ({i},{j}) = {a} but ({j},{i}) = {b}"
                    )));
                }
            }
        }
        Ok(SymMatrix {
            dim,
            data: rows.to_vec(),
        })
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Entry `(i, j)`.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Set entry `(i, j)` and its mirror `(j, i)`.
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.dim + j] = v;
        self.data[j * self.dim + i] = v;
    }

    /// Row-major view of all entries.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Largest absolute entry (0 for the empty matrix).
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()))
    }

    /// Principal submatrix on `rows` (also used as columns).
    pub fn principal_submatrix(&self, rows: &IndexSet) -> Result<Self> {
        rows.check_bounds(self.dim)?;
        let k = rows.len();
        let mut out = SymMatrix::zeros(k);
        for (a, &i) in rows.as_slice().iter().enumerate() {
            for (b, &j) in rows.as_slice().iter().enumerate() {
                out.data[a * k + b] = self.get(i, j);
            }
        }
        Ok(out)
    }
}

/// Sorted set of distinct matrix indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IndexSet {
    idx: Vec<usize>,
}

impl IndexSet {
    /// Build from arbitrary indices; sorts and rejects duplicates.
    pub fn new(mut idx: Vec<usize>) -> Result<Self> {
        idx.sort_unstable();
        if idx.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::invalid("index set contains duplicates"));
        }
        Ok(IndexSet { idx })
    }

    /// The empty set.
    pub fn empty() -> Self {
        IndexSet { idx: Vec::new() }
    }

    /// Contiguous range `[start, end)`.
    pub fn from_range(range: std::ops::Range<usize>) -> Self {
        IndexSet {
            idx: range.collect(),
        }
    }

    /// Number of indices.
    pub fn len(&self) -> usize {
        self.idx.len()
    }

    /// True when no indices are present.
    pub fn is_empty(&self) -> bool {
        self.idx.is_empty()
    }

    /// Sorted indices.
    pub fn as_slice(&self) -> &[usize] {
        &self.idx
    }

    /// True when `self` and `other` share no index.
    pub fn is_disjoint(&self, other: &IndexSet) -> bool {
        // Both sides are sorted; walk them like a merge.
        let (mut a, mut b) = (0, 0);
        while a < self.idx.len() && b < other.idx.len() {
            match self.idx[a].cmp(&other.idx[b]) {
                std::cmp::Ordering::Less => a += 1,
                std::cmp::Ordering::Greater => b += 1,
                std::cmp::Ordering::Equal => return false,
            }
        }
        true
    }

    fn check_bounds(&self, dim: usize) -> Result<()> {
        if let Some(&max) = self.idx.last() {
            if max >= dim {
                return Err(Error::invalid(format!(
                    "index {max} out of bounds for dimension {dim}"
                )));
            }
        }
        Ok(())
    }
}

/// Eigenvalues of a symmetric matrix, ascending.
pub fn eigen_sym(m: &SymMatrix) -> Result<Vec<f64>> {
    let (mut vals, _) = jacobi(m, false)?;
    vals.sort_by(|a, b| a.partial_cmp(b).expect("eigenvalues are finite"));
    Ok(vals)
}

/// Moore-Penrose pseudoinverse with the default relative rank tolerance
/// [`RANK_TOL_REL`].
pub fn pinv(m: &SymMatrix) -> Result<SymMatrix> {
    pinv_with_tol(m, RANK_TOL_REL)
}

/// Moore-Penrose pseudoinverse via spectral decomposition.
///
/// Eigenvalues with `|lambda| <= rank_tol_rel * max|lambda|` are treated as
/// exact zeros and dropped from the inverse (for the zero matrix the
/// pseudoinverse is zero). The result is exactly symmetric.
pub fn pinv_with_tol(m: &SymMatrix, rank_tol_rel: f64) -> Result<SymMatrix> {
    if !(rank_tol_rel > 0.0) {
        return Err(Error::invalid(format!(
            "rank tolerance must be positive, got {rank_tol_rel}"
        )));
    }
    let n = m.dim;
    if n == 0 {
        return Ok(SymMatrix::zeros(0));
    }
    let (vals, vecs) = jacobi(m, true)?;
    let vecs = vecs.expect("jacobi returns vectors when requested");
    let max_abs = vals.iter().fold(0.0_f64, |acc, &x| acc.max(x.abs()));
    let cutoff = rank_tol_rel * max_abs;
    let mut out = SymMatrix::zeros(n);
    // out = sum over kept eigenpairs of v v^T / lambda; vectors are columns
    // of `vecs`.
    for (k, &lambda) in vals.iter().enumerate() {
        if lambda.abs() <= cutoff {
            continue;
        }
        let inv = 1.0 / lambda;
        for i in 0..n {
            let vi = vecs[i * n + k];
            for j in i..n {
                let add = inv * vi * vecs[j * n + k];
                out.data[i * n + j] += add;
                if i != j {
                    out.data[j * n + i] += add;
                }
            }
        }
    }
    Ok(out)
}

/// Generalized Schur complement `Q_TT - Q_TC pinv(Q_CC) Q_CT`.
///
/// `target` and `conditioning` must be disjoint, in-bounds index sets. An
/// empty conditioning set returns `Q_TT` unchanged; an empty target set
/// returns the `0 x 0` matrix (whose all-ones quadratic form is 0).
pub fn gen_schur(m: &SymMatrix, target: &IndexSet, conditioning: &IndexSet) -> Result<SymMatrix> {
    target.check_bounds(m.dim)?;
    conditioning.check_bounds(m.dim)?;
    if !target.is_disjoint(conditioning) {
        return Err(Error::invalid("target and conditioning index sets overlap"));
    }
    let t = target.as_slice();
    let c = conditioning.as_slice();
    let (nt, nc) = (t.len(), c.len());
    if nt == 0 {
        return Ok(SymMatrix::zeros(0));
    }
    let mut out = m.principal_submatrix(target)?;
    if nc == 0 {
        return Ok(out);
    }
    let p = pinv(&m.principal_submatrix(conditioning)?)?;
    // w = Q_TC * pinv(Q_CC), shape nt x nc.
    let mut w = vec![0.0; nt * nc];
    for (a, &ti) in t.iter().enumerate() {
        for k in 0..nc {
            let mut acc = 0.0;
            for (j, &cj) in c.iter().enumerate() {
                acc += m.get(ti, cj) * p.get(j, k);
            }
            w[a * nc + k] = acc;
        }
    }
    for (a, &_ti) in t.iter().enumerate() {
        for (b, &tj) in t.iter().enumerate().skip(a) {
            let mut acc = 0.0;
            for (k, &ck) in c.iter().enumerate() {
                acc += w[a * nc + k] * m.get(tj, ck);
            }
            let v = out.get(a, b) - acc;
            out.set(a, b, v);
        }
    }
    Ok(out)
}

/// Quadratic form of the all-ones vector: the sum of all entries.
pub fn quad_form_ones(m: &SymMatrix) -> f64 {
    m.data.iter().sum()
}

/// Cyclic Jacobi eigendecomposition. Returns unsorted eigenvalues and,
/// when `want_vectors`, the orthogonal matrix of eigenvectors as columns
/// (row-major `n x n`).
fn jacobi(m: &SymMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<Vec<f64>>)> {
    let n = m.dim;
    if n == 0 {
        return Ok((Vec::new(), want_vectors.then(Vec::new)));
    }
    let mut a = m.data.clone();
    let mut v = if want_vectors {
        let mut id = vec![0.0; n * n];
        for i in 0..n {
            id[i * n + i] = 1.0;
        }
        Some(id)
    } else {
        None
    };

    let frob: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let stop = 1e-15 * frob.max(f64::MIN_POSITIVE);

    for _sweep in 0..MAX_JACOBI_SWEEPS {
        let off: f64 = {
            let mut s = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    s += 2.0 * a[p * n + q] * a[p * n + q];
                }
            }
            s.sqrt()
        };
        if off <= stop {
            let vals = (0..n).map(|i| a[i * n + i]).collect();
            return Ok((vals, v));
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq.abs() <= 1e-300 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                // Smaller-angle rotation root, stable for large |theta|.
                let t = theta.signum() / (theta.abs() + (1.0 + theta * theta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                if let Some(vm) = v.as_mut() {
                    for k in 0..n {
                        let vkp = vm[k * n + p];
                        let vkq = vm[k * n + q];
                        vm[k * n + p] = c * vkp - s * vkq;
                        vm[k * n + q] = s * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Err(Error::Numerical(format!(
        "Jacobi eigensolver did not converge in {MAX_JACOBI_SWEEPS} sweeps (dim {n})"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn approx(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn eigen_of_2x2_equicorrelated() {
        // [[1, 1/2], [1/2, 1]] has spectrum {1/2, 3/2}.
        let m = SymMatrix::from_rows(2, &[1.0, 0.5, 0.5, 1.0]).unwrap();
        let e = eigen_sym(&m).unwrap();
        assert!(approx(e[0], 0.5, 1e-14), "got {e:?}");
        assert!(approx(e[1], 1.5, 1e-14), "got {e:?}");
    }

    #[test]
    fn eigen_of_empty_and_single() {
        let e = eigen_sym(&SymMatrix::zeros(0)).unwrap();
        assert!(e.is_empty());
        let m = SymMatrix::from_rows(1, &[3.25]).unwrap();
        assert_eq!(eigen_sym(&m).unwrap(), vec![3.25]);
    }

    #[test]
    fn pinv_of_singular_rank_one() {
        // [[1,-1],[-1,1]] has spectrum {0, 2}; its pseudoinverse is the same
        // rank-one pattern scaled by 1/4.
        let m = SymMatrix::from_rows(2, &[1.0, -1.0, -1.0, 1.0]).unwrap();
        let p = pinv(&m).unwrap();
        let expect = [0.25, -0.25, -0.25, 0.25];
        for (got, want) in p.as_slice().iter().zip(expect) {
            assert!(approx(*got, want, 1e-13), "pinv {:?}", p.as_slice());
        }
    }

    #[test]
    fn pinv_matches_inverse_when_nonsingular() {
        let m = SymMatrix::from_rows(3, &[2.0, 0.3, 0.1, 0.3, 1.5, -0.2, 0.1, -0.2, 1.1]).unwrap();
        let p = pinv(&m).unwrap();
        // m * p should be the identity.
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    acc += m.get(i, k) * p.get(k, j);
                }
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(approx(acc, want, 1e-12), "(m p)[{i}{j}] = {acc}");
            }
        }
    }

    #[test]
    fn pinv_of_zero_matrix_is_zero() {
        let p = pinv(&SymMatrix::zeros(3)).unwrap();
        assert!(p.as_slice().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gen_schur_empty_conditioning_returns_target_block() {
        let m = SymMatrix::from_rows(2, &[1.0, 0.3, 0.3, 1.0]).unwrap();
        let t = IndexSet::new(vec![0]).unwrap();
        let s = gen_schur(&m, &t, &IndexSet::empty()).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.get(0, 0), 1.0);
    }

    #[test]
    fn gen_schur_empty_target_quadform_is_zero() {
        let m = SymMatrix::identity(3);
        let c = IndexSet::new(vec![0, 2]).unwrap();
        let s = gen_schur(&m, &IndexSet::empty(), &c).unwrap();
        assert_eq!(s.dim(), 0);
        assert_eq!(quad_form_ones(&s), 0.0);
    }

    #[test]
    fn gen_schur_rejects_overlap() {
        let m = SymMatrix::identity(3);
        let t = IndexSet::new(vec![0, 1]).unwrap();
        let c = IndexSet::new(vec![1, 2]).unwrap();
        assert!(gen_schur(&m, &t, &c).is_err());
    }

    #[test]
    fn index_set_rejects_duplicates() {
        assert!(IndexSet::new(vec![1, 1]).is_err());
    }

    #[test]
    fn quad_form_ones_sums_entries() {
        let m = SymMatrix::from_rows(2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert_eq!(quad_form_ones(&m), 9.0);
    }
}
