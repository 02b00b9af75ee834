//! Closed-form conditional quadratic forms for the structured correlation
//! matrix, their degenerate-case table, and the pseudoinverse evaluator that
//! serves as an independent check on every closed form.
//!
//! For a cut `(n, m)` the quantity of interest is the all-ones quadratic form
//! of a conditional covariance: `m` second-layer relays conditioned on the
//! complementary `N-n` first-layer and `N-m` second-layer relays (`phi`), or
//! `n` first-layer relays conditioned on the remaining `N-n` within the layer
//! (`psi`). Exchangeability collapses both to scalar formulas in the sizes
//! and the correlation triple.
//!
//! Every closed form here was frozen against [`schur_oracle_quadform`], which
//! computes the same quantity from first principles (dense submatrices and a
//! spectral pseudoinverse). Two printed-form ambiguities are resolved that
//! way: the sign inside the `psi` denominator (see [`psi_with_sign`]) and the
//! mixed term of the second derivative (see [`d2phi_at_zero`]).

use crate::covariance::{build_cov, CorrelationParams};
use crate::error::Error;
use crate::linalg::{gen_schur, quad_form_ones, IndexSet, SymMatrix};
use crate::Result;

/// Absolute threshold below which a closed-form denominator is treated as
/// degenerate. The degenerate parameter points are known exactly, so this
/// only needs to absorb rounding in O(1) quantities; evaluation then routes
/// to [`phi_special`] or errors out rather than amplifying noise.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A cut `(n, m)`: `n` first-layer and `m` second-layer relays on the source
/// side. The complementary sizes `N-n` and `N-m` are what the quadratic forms
/// condition on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cut {
    /// Source-side first-layer count, in `[0, N]`.
    pub n: usize,
    /// Source-side second-layer count, in `[0, N]`.
    pub m: usize,
}

impl Cut {
    pub fn new(n: usize, m: usize) -> Self {
        Cut { n, m }
    }

    /// Errors unless `n <= N` and `m <= N`.
    pub fn validate(&self, n_relays: usize) -> Result<()> {
        if n_relays == 0 {
            return Err(Error::invalid("relay count must be at least 1"));
        }
        if self.n > n_relays || self.m > n_relays {
            return Err(Error::invalid(format!(
                "cut ({}, {}) out of range for {} relays per layer",
                self.n, self.m, n_relays
            )));
        }
        Ok(())
    }
}

impl std::fmt::Display for Cut {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.n, self.m)
    }
}

/// Sign convention inside the `psi` denominator `1 +/- (N-n-1) rho`.
///
/// The two conventions circulate because the expression is easy to mistype;
/// conditioning on `N-n` exchangeable variables gives `1 + (N-n-1) rho`, and
/// the pseudoinverse oracle confirms the plus sign on random inputs. The
/// minus variant is kept so tests can demonstrate that it disagrees with the
/// oracle; nothing else should use it.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PsiDenomSign {
    Plus,
    Minus,
}

/// Single-layer quadratic form: `n` relays of a layer with intra-correlation
/// `rho`, conditioned on the remaining `N - n`.
///
/// `psi(N, n, rho) = n (1 + (n-1) rho - n (N-n) rho^2 / (1 + (N-n-1) rho))`.
pub fn psi(n_relays: usize, n: usize, rho: f64) -> Result<f64> {
    psi_with_sign(n_relays, n, rho, PsiDenomSign::Plus)
}

/// [`psi`] with an explicit denominator sign convention. See
/// [`PsiDenomSign`]; production code always wants `Plus`.
pub fn psi_with_sign(n_relays: usize, n: usize, rho: f64, sign: PsiDenomSign) -> Result<f64> {
    Cut::new(n, 0).validate(n_relays)?;
    if n == 0 {
        return Ok(0.0);
    }
    let nf = n as f64;
    let p = (n_relays - n) as f64;
    let mut inner = 1.0 + (nf - 1.0) * rho;
    if n_relays > n {
        let denom = match sign {
            PsiDenomSign::Plus => 1.0 + (p - 1.0) * rho,
            PsiDenomSign::Minus => 1.0 - (p - 1.0) * rho,
        };
        if denom.abs() < DEGENERACY_TOL {
            return Err(Error::degenerate(
                "psi conditioning denominator",
                denom,
                DEGENERACY_TOL,
                format!("N={n_relays}, n={n}, rho={rho}"),
            ));
        }
        inner -= nf * p * rho * rho / denom;
    }
    Ok(nf * inner)
}

/// Cross-layer quadratic form for cut `(n, m)`, fully expanded:
///
/// ```text
/// phi = m (1 + (m-1) rho2)
///       - m^2 p rho12^2 X
///       - m^2 p^2 q rho12^4 E X^2
///       + 2 m^2 q p rho2 rho12^2 E X
///       - m^2 q rho2^2 E
/// ```
///
/// with `p = N-n`, `q = N-m`, `X = 1/S`, `S = 1+(p-1) rho1`,
/// `E = S/D`, `D = S T - q p rho12^2`, `T = 1+(q-1) rho2` (and `E = 1/T`
/// when the cross term is structurally absent, i.e. `p = 0` or `rho12 = 0`,
/// where `S/D` cancels to `1/T`).
///
/// Terms whose structural coefficient is zero are skipped before their
/// denominators are touched, so e.g. `rho12 = 0` reduces exactly to
/// `psi(N, m, rho2)` and `m = N` never evaluates `E`. The degenerate-pattern
/// table [`phi_special`] is consulted first; remaining zero denominators are
/// genuine undefined points and error out.
pub fn phi(n_relays: usize, cut: Cut, c: CorrelationParams) -> Result<f64> {
    cut.validate(n_relays)?;
    if let Some(v) = phi_special(n_relays, cut, c) {
        return Ok(v);
    }
    phi_expanded(n_relays, cut, c)
}

/// The expanded closed form without the degenerate-pattern table.
fn phi_expanded(n_relays: usize, cut: Cut, c: CorrelationParams) -> Result<f64> {
    let m = cut.m;
    if m == 0 {
        // Every term carries a factor m.
        return Ok(0.0);
    }
    let mf = m as f64;
    let p_count = n_relays - cut.n;
    let q_count = n_relays - cut.m;
    let p = p_count as f64;
    let q = q_count as f64;
    let r12sq = c.rho12 * c.rho12;
    // The cross term is live only if there are first-layer relays to
    // condition on and the layers are actually cross-correlated.
    let cross_live = p_count > 0 && c.rho12 != 0.0;

    let mut val = mf * (1.0 + (mf - 1.0) * c.rho2);
    let mut s = f64::NAN;
    let mut x = 0.0;
    if cross_live {
        s = 1.0 + (p - 1.0) * c.rho1;
        if s.abs() < DEGENERACY_TOL {
            return Err(Error::degenerate(
                "phi first-layer denominator",
                s,
                DEGENERACY_TOL,
                format!("N={n_relays}, cut={cut}, c={c}"),
            ));
        }
        x = 1.0 / s;
        val -= mf * mf * p * r12sq * x;
    }
    let needs_e = q_count > 0 && (c.rho2 != 0.0 || cross_live);
    if needs_e {
        let t = 1.0 + (q - 1.0) * c.rho2;
        let e = if cross_live {
            let d = s * t - q * p * r12sq;
            if d.abs() < DEGENERACY_TOL {
                return Err(Error::degenerate(
                    "phi joint denominator",
                    d,
                    DEGENERACY_TOL,
                    format!("N={n_relays}, cut={cut}, c={c}"),
                ));
            }
            s / d
        } else {
            if t.abs() < DEGENERACY_TOL {
                return Err(Error::degenerate(
                    "phi second-layer denominator",
                    t,
                    DEGENERACY_TOL,
                    format!("N={n_relays}, cut={cut}, c={c}"),
                ));
            }
            1.0 / t
        };
        if cross_live {
            val -= mf * mf * p * p * q * r12sq * r12sq * e * x * x;
            val += 2.0 * mf * mf * q * p * c.rho2 * r12sq * e * x;
        }
        val -= mf * mf * q * c.rho2 * c.rho2 * e;
    }
    Ok(val)
}

/// Degenerate-pattern table for `phi`, checked in priority order. Returns
/// `None` when no pattern applies and the caller should use the expanded
/// closed form. Each value equals the pseudoinverse evaluator's output at
/// the pattern point (the inverse in the conditional form is replaced by a
/// generalized inverse there).
///
/// Patterns, first match wins:
/// (a) `n = m = 0` -> 0 (empty target, by convention);
/// (b) `n = m = N` -> `N (1 + (N-1) rho2)` (nothing to condition on);
/// (c) `n < N`, `m = N`, `rho1 = 1` -> `N (1 + (N-1) rho2 - N rho12^2)`;
/// (d) `n = N`, `m < N`, `rho2 = 1` -> 0;
/// (e) remaining cuts at `rho1 = rho2 = rho12 = 1` -> 0;
/// (f) `n = m = N-1`, `rho12 = -1` -> `mu(N, rho2)`.
pub fn phi_special(n_relays: usize, cut: Cut, c: CorrelationParams) -> Option<f64> {
    let nn = n_relays;
    let nf = nn as f64;
    let Cut { n, m } = cut;
    if n == 0 && m == 0 {
        return Some(0.0);
    }
    if n == nn && m == nn {
        return Some(nf * (1.0 + (nf - 1.0) * c.rho2));
    }
    if n < nn && m == nn && c.rho1 == 1.0 {
        return Some(nf * (1.0 + (nf - 1.0) * c.rho2 - nf * c.rho12 * c.rho12));
    }
    if n == nn && m < nn && c.rho2 == 1.0 {
        return Some(0.0);
    }
    // Reaching here the source side is neither empty nor everything.
    if c.rho1 == 1.0 && c.rho2 == 1.0 && c.rho12 == 1.0 {
        return Some(0.0);
    }
    if n + 1 == nn && m + 1 == nn && c.rho12 == -1.0 {
        return Some(mu(nn, c.rho2));
    }
    None
}

/// Value of the cut `(N-1, N-1)` quadratic form at the cross-correlation
/// endpoint (pattern (f) of [`phi_special`]):
///
/// `mu(N, rho2) = (N-1) (1 + (N-2) rho2 - (N-1) (1 + rho2)^2 / 4)`.
///
/// Positive exactly when `(N-5)/(N-1) < rho2 < 1`. Note the two-sided limit
/// of `phi` toward the endpoint diverges to negative infinity for
/// `rho2 < 1`, while this on-the-point value stays finite; [`limit_checks`]
/// demonstrates the mismatch.
pub fn mu(n_relays: usize, rho2: f64) -> f64 {
    let nf = n_relays as f64;
    let s = 1.0 + rho2;
    (nf - 1.0) * (1.0 + (nf - 2.0) * rho2 - (nf - 1.0) * s * s / 4.0)
}

/// Which conditional quadratic form [`schur_oracle_quadform`] computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleLayer {
    /// `n` first-layer relays conditioned on the remaining `N-n` of that
    /// layer; the reference for [`psi`].
    Layer1,
    /// `m` second-layer relays conditioned on the complement of the cut
    /// (sizes `N-n` and `N-m`); the reference for [`phi`].
    Layer2,
}

/// First-principles evaluation of the conditional quadratic forms: build the
/// structured matrix, take the generalized Schur complement of the target
/// block with a spectral pseudoinverse, and sum its entries.
///
/// Index choices are canonical (first `n` of layer 1, first `m` of layer 2);
/// exchangeability makes any other choice equivalent, which a property test
/// confirms by randomizing the subsets.
pub fn schur_oracle_quadform(
    n_relays: usize,
    cut: Cut,
    c: CorrelationParams,
    layer: OracleLayer,
) -> Result<f64> {
    cut.validate(n_relays)?;
    match layer {
        OracleLayer::Layer1 => {
            let q = SymMatrix::from_fn(n_relays, |i, j| if i == j { 1.0 } else { c.rho1 });
            let target = IndexSet::from_range(0..cut.n);
            let cond = IndexSet::from_range(cut.n..n_relays);
            Ok(quad_form_ones(&gen_schur(&q, &target, &cond)?))
        }
        OracleLayer::Layer2 => {
            let q = build_cov(n_relays, c)?;
            let target = IndexSet::from_range(n_relays..n_relays + cut.m);
            let mut idx: Vec<usize> = (cut.n..n_relays).collect();
            idx.extend(n_relays + cut.m..2 * n_relays);
            let cond = IndexSet::new(idx)?;
            Ok(quad_form_ones(&gen_schur(&q, &target, &cond)?))
        }
    }
}

/// The lettered entries of the structured inverse of the conditioning block,
/// exposed so tests can pin each intermediate step, not just the end result.
///
/// The conditioning block is `[[A, B], [B', Dm]]` with `A` the `p x p`
/// first-layer part (`p = N-n`), `Dm` the `q x q` second-layer part
/// (`q = N-m`), and `B` the constant `rho12` cross part. By exchangeability
/// every sub-block of the inverse is constant-diagonal/constant-off-diagonal:
///
/// - `x`, `y`: diagonal and off-diagonal entries of `A^-1`;
/// - `z`: the constant entry of `B' A^-1 B`; `u = 1 - z`, `v = rho2 - z` the
///   diagonal/off-diagonal entries of the inner complement `Dm - B' A^-1 B`;
/// - `e`, `f`: diagonal and off-diagonal entries of its inverse;
/// - `w`: the constant entry of `B (Dm - B' A^-1 B)^-1 B'`;
/// - `h`, `i`: the constant entries of `B (Dm - B' A^-1 B)^-1` and
///   `B' A^-1`;
/// - `alpha_a`, `beta_a`: diagonal and off-diagonal entries of the assembled
///   top-left block `A^-1 + A^-1 B (Dm - B' A^-1 B)^-1 B' A^-1`;
/// - `alpha_b`, `alpha_c`: the constant entries of the assembled off-diagonal
///   blocks (equal, since the inverse of a symmetric matrix is symmetric);
/// - `gamma`: the per-pair conditional correction
///   `[rho12 1', rho2 1'] M [rho12 1; rho2 1]` with `M` the assembled
///   inverse, so that `phi = m (1 + (m-1) rho2) - m^2 gamma`.
///
/// Empty blocks contribute zero entries. Row-sum identities that tests rely
/// on: `x + (p-1) y = 1/S` and `e + (q-1) f = S/D` (`1/T` when the cross
/// part is absent), in the notation of [`phi`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurIntermediates {
    pub n_relays: usize,
    pub cut: Cut,
    pub c: CorrelationParams,
    pub x: f64,
    pub y: f64,
    pub z: f64,
    pub u: f64,
    pub v: f64,
    pub w: f64,
    pub e: f64,
    pub f: f64,
    pub h: f64,
    pub i: f64,
    pub alpha_a: f64,
    pub beta_a: f64,
    pub alpha_b: f64,
    pub alpha_c: f64,
    pub gamma: f64,
}

impl SchurIntermediates {
    /// Computes every lettered entry. Stricter than [`phi`] about
    /// degeneracy: the individual entries `x`, `y`, `e`, `f` blow up at
    /// `rho1 = 1` or `rho2 = 1` (where only their row sums stay finite), so
    /// those points error here even though `phi` may be fine.
    pub fn compute(n_relays: usize, cut: Cut, c: CorrelationParams) -> Result<Self> {
        cut.validate(n_relays)?;
        let p_count = n_relays - cut.n;
        let q_count = n_relays - cut.m;
        let p = p_count as f64;
        let q = q_count as f64;
        let params = || format!("N={n_relays}, cut={cut}, c={c}");

        let (x, y) = match p_count {
            0 => (0.0, 0.0),
            1 => (1.0, 0.0),
            _ => {
                // den1 = (1 - rho1)(1 + (p-1) rho1), the two eigenvalues of
                // the within-layer block that the inverse divides by.
                let den1 = -(p - 1.0) * c.rho1 * c.rho1 + (p - 2.0) * c.rho1 + 1.0;
                if den1.abs() < DEGENERACY_TOL {
                    return Err(Error::degenerate(
                        "first-layer block inverse",
                        den1,
                        DEGENERACY_TOL,
                        params(),
                    ));
                }
                (((p - 2.0) * c.rho1 + 1.0) / den1, -c.rho1 / den1)
            }
        };
        let row_x = x + (p - 1.0) * y;

        let z = if p_count > 0 {
            p * c.rho12 * c.rho12 * row_x
        } else {
            0.0
        };
        let u = 1.0 - z;
        let v = c.rho2 - z;

        let (e, f) = match q_count {
            0 => (0.0, 0.0),
            1 => {
                if u.abs() < DEGENERACY_TOL {
                    return Err(Error::degenerate(
                        "inner complement inverse",
                        u,
                        DEGENERACY_TOL,
                        params(),
                    ));
                }
                (1.0 / u, 0.0)
            }
            _ => {
                let den2 = -(q - 1.0) * v * v + (q - 2.0) * u * v + u * u;
                if den2.abs() < DEGENERACY_TOL {
                    return Err(Error::degenerate(
                        "inner complement inverse",
                        den2,
                        DEGENERACY_TOL,
                        params(),
                    ));
                }
                (((q - 2.0) * v + u) / den2, -v / den2)
            }
        };
        let row_e = e + (q - 1.0) * f;

        let cross = p_count > 0 && q_count > 0;
        let w = if cross {
            q * c.rho12 * c.rho12 * row_e
        } else {
            0.0
        };
        // B (Dm - B' A^-1 B)^-1 and B' A^-1 have constant entries; the
        // assembled off-diagonal blocks scale them by the opposite row sum.
        let h = if cross { c.rho12 * row_e } else { 0.0 };
        let i = if cross { c.rho12 * row_x } else { 0.0 };
        let alpha_b = if cross { -h * row_x } else { 0.0 };
        let alpha_c = if cross { -i * row_e } else { 0.0 };
        let (alpha_a, beta_a) = if p_count > 0 {
            (x + w * row_x * row_x, y + w * row_x * row_x)
        } else {
            (0.0, 0.0)
        };

        let r12sq = c.rho12 * c.rho12;
        let gamma = r12sq * p * (alpha_a + (p - 1.0) * beta_a)
            + c.rho12 * c.rho2 * p * q * (alpha_b + alpha_c)
            + c.rho2 * c.rho2 * q * row_e;

        Ok(SchurIntermediates {
            n_relays,
            cut,
            c,
            x,
            y,
            z,
            u,
            v,
            w,
            e,
            f,
            h,
            i,
            alpha_a,
            beta_a,
            alpha_b,
            alpha_c,
            gamma,
        })
    }

    /// Row sum `x + (p-1) y`, closed form `1 / (1 + (p-1) rho1)`.
    pub fn row_sum_first(&self) -> f64 {
        let p = (self.n_relays - self.cut.n) as f64;
        self.x + (p - 1.0) * self.y
    }

    /// Row sum `e + (q-1) f`, closed form `S / D` (or `1/T` without a cross
    /// part).
    pub fn row_sum_second(&self) -> f64 {
        let q = (self.n_relays - self.cut.m) as f64;
        self.e + (q - 1.0) * self.f
    }

    /// `phi` assembled through `gamma` instead of the expanded formula;
    /// tests compare the two routes.
    pub fn phi_via_gamma(&self) -> f64 {
        let m = self.cut.m as f64;
        m * (1.0 + (m - 1.0) * self.c.rho2 - m * self.gamma)
    }
}

/// Closed-form second derivative of `phi` in the cross correlation at
/// `rho12 = 0`:
///
/// `-2 m^2 p X (1 - q rho2 / T)^2`
///
/// (notation as in [`phi`]). Zero when `m = 0` or `p = 0`; never positive
/// when `X >= 0`, which combined with the vanishing first derivative makes
/// `rho12 = 0` a maximum over the feasible range.
///
/// A tempting simplification `2 m^2 p X (-1 - q^2 rho2^2 / T^2)` drops the
/// mixed product of the two first-order factors and disagrees with a finite
/// difference of `phi` whenever `q rho2 != 0`; a test documents the gap. The
/// perfect-square form above is the one the finite difference confirms.
pub fn d2phi_at_zero(n_relays: usize, cut: Cut, rho1: f64, rho2: f64) -> Result<f64> {
    cut.validate(n_relays)?;
    let m = cut.m;
    let p_count = n_relays - cut.n;
    if m == 0 || p_count == 0 {
        return Ok(0.0);
    }
    let mf = m as f64;
    let p = p_count as f64;
    let q_count = n_relays - cut.m;
    let q = q_count as f64;
    let s = 1.0 + (p - 1.0) * rho1;
    if s.abs() < DEGENERACY_TOL {
        return Err(Error::degenerate(
            "curvature first-layer denominator",
            s,
            DEGENERACY_TOL,
            format!("N={n_relays}, cut={cut}, rho1={rho1}, rho2={rho2}"),
        ));
    }
    let x = 1.0 / s;
    let factor = if q_count > 0 {
        let t = 1.0 + (q - 1.0) * rho2;
        if t.abs() < DEGENERACY_TOL {
            return Err(Error::degenerate(
                "curvature second-layer denominator",
                t,
                DEGENERACY_TOL,
                format!("N={n_relays}, cut={cut}, rho1={rho1}, rho2={rho2}"),
            ));
        }
        1.0 - q * rho2 / t
    } else {
        1.0
    };
    Ok(-2.0 * mf * mf * p * x * factor * factor)
}

/// One endpoint approach: fixed intra correlations, cross correlation driven
/// to `endpoint` (+1 or -1) along `endpoint * (1 - 10^-k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitPath {
    pub rho1: f64,
    pub rho2: f64,
    pub endpoint: f64,
}

/// How a sampled sequence relates to the on-the-endpoint pattern value.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitClass {
    /// Every sample gap fits the allowance schedule; the sequence approaches
    /// the pattern value.
    MatchesSpecial,
    /// Gaps grow without bound; the on-the-endpoint value is an isolated
    /// finite value, not a limit.
    Divergent,
    /// Neither behavior is clear cut (or a sample was undefined).
    Undetermined,
}

/// Samples and classification along one [`LimitPath`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitOutcome {
    pub path: LimitPath,
    /// `(rho12, phi)` per step; `None` where `phi` is undefined.
    pub samples: Vec<(f64, Option<f64>)>,
    /// Allowed gap per step: `N^2 * 10^(1-k) + 1e-9`, matching the known
    /// approach rate `O(N^2 (1 - rho12^2))` of the convergent families.
    pub allowed: Vec<f64>,
    /// Pattern value at the endpoint.
    pub special_value: Option<f64>,
    /// True when the pattern value was taken from the opposite endpoint:
    /// the closed form depends on the cross correlation only through its
    /// square, so a pattern entry at one sign applies to both.
    pub mirrored_special: bool,
    pub class: LimitClass,
}

/// Endpoint-approach report for one cut; see [`limit_checks`].
#[derive(Debug, Clone, PartialEq)]
pub struct LimitReport {
    pub n_relays: usize,
    pub cut: Cut,
    pub outcomes: Vec<LimitOutcome>,
}

impl std::fmt::Display for LimitReport {
    fn fmt(&self, fm: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(fm, "limit report: N={} cut={}", self.n_relays, self.cut)?;
        for o in &self.outcomes {
            let cls = match o.class {
                LimitClass::MatchesSpecial => "matches-endpoint-value",
                LimitClass::Divergent => "divergent",
                LimitClass::Undetermined => "undetermined",
            };
            let endpoint = match o.special_value {
                Some(s) => format!("{s}"),
                None => "none".to_string(),
            };
            writeln!(
                fm,
                "  rho1={} rho2={} rho12->{:+}: {} (endpoint value {}{})",
                o.path.rho1,
                o.path.rho2,
                o.path.endpoint,
                cls,
                endpoint,
                if o.mirrored_special { ", mirrored" } else { "" },
            )?;
            for (idx, (r12, val)) in o.samples.iter().enumerate() {
                let rendered = match val {
                    Some(v) => format!("{v:.6e}"),
                    None => "undefined".to_string(),
                };
                writeln!(
                    fm,
                    "    rho12={:+.9}: phi={} (allowed gap {:.1e})",
                    r12, rendered, o.allowed[idx]
                )?;
            }
        }
        Ok(())
    }
}

/// Evaluates `phi` along cross-correlation endpoint approaches and reports
/// whether each sequence approaches the degenerate-pattern value.
///
/// Paths: both endpoints at `rho1 = rho2 = 1` for every cut (the convergent
/// families), plus both endpoints at `rho1 = rho2 = 0.5` when the cut is
/// `(N-1, N-1)` (the divergent family: the sequence runs to negative
/// infinity while the on-the-endpoint value `mu` stays finite). Steps use
/// `k = 3..=8`; the closed form is evaluated as-is, feasibility of the path
/// points is irrelevant here.
pub fn limit_checks(n_relays: usize, cut: Cut) -> Result<LimitReport> {
    cut.validate(n_relays)?;
    let mut paths = vec![
        LimitPath {
            rho1: 1.0,
            rho2: 1.0,
            endpoint: 1.0,
        },
        LimitPath {
            rho1: 1.0,
            rho2: 1.0,
            endpoint: -1.0,
        },
    ];
    if n_relays >= 2 && cut.n + 1 == n_relays && cut.m + 1 == n_relays {
        for endpoint in [1.0, -1.0] {
            paths.push(LimitPath {
                rho1: 0.5,
                rho2: 0.5,
                endpoint,
            });
        }
    }

    let nf = n_relays as f64;
    let outcomes = paths
        .into_iter()
        .map(|path| {
            let mut samples = Vec::new();
            let mut allowed = Vec::new();
            for k in 3..=8 {
                let r12 = path.endpoint * (1.0 - 10f64.powi(-k));
                let c = CorrelationParams::new_unchecked(path.rho1, path.rho2, r12);
                samples.push((r12, phi(n_relays, cut, c).ok()));
                allowed.push(nf * nf * 10f64.powi(1 - k) + 1e-9);
            }
            let at = |endpoint: f64| {
                phi_special(
                    n_relays,
                    cut,
                    CorrelationParams::new_unchecked(path.rho1, path.rho2, endpoint),
                )
            };
            let (special_value, mirrored_special) = match at(path.endpoint) {
                Some(s) => (Some(s), false),
                None => (at(-path.endpoint), true),
            };
            let class = classify(&samples, &allowed, special_value);
            LimitOutcome {
                path,
                samples,
                allowed,
                special_value,
                mirrored_special,
                class,
            }
        })
        .collect();

    Ok(LimitReport {
        n_relays,
        cut,
        outcomes,
    })
}

fn classify(samples: &[(f64, Option<f64>)], allowed: &[f64], special: Option<f64>) -> LimitClass {
    let Some(s) = special else {
        return LimitClass::Undetermined;
    };
    let mut gaps = Vec::with_capacity(samples.len());
    for (_, v) in samples {
        match v {
            Some(v) => gaps.push((v - s).abs()),
            None => return LimitClass::Undetermined,
        }
    }
    if gaps.iter().zip(allowed).all(|(g, a)| g <= a) {
        return LimitClass::MatchesSpecial;
    }
    let tail = &gaps[gaps.len() - 3..];
    if tail.windows(2).all(|w| w[1] > w[0]) && *gaps.last().unwrap() > 1e3 {
        return LimitClass::Divergent;
    }
    LimitClass::Undetermined
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cp(rho1: f64, rho2: f64, rho12: f64) -> CorrelationParams {
        CorrelationParams::new(rho1, rho2, rho12).unwrap()
    }

    #[test]
    fn psi_frozen_values() {
        // Empty target.
        assert_eq!(psi(4, 0, 0.7).unwrap(), 0.0);
        // Full layer: no conditioning, plain column sums.
        assert!((psi(3, 3, 0.2).unwrap() - 3.0 * 1.4).abs() < 1e-15);
        // Two relays, half correlation: 1 - 0.5^2 / 1 = 0.75.
        assert!((psi(2, 1, 0.5).unwrap() - 0.75).abs() < 1e-15);
    }

    #[test]
    fn psi_matches_oracle_and_minus_sign_does_not() {
        for &(nn, n, rho) in &[(3usize, 1usize, 0.5f64), (4, 2, -0.2), (5, 3, 0.9)] {
            let oracle =
                schur_oracle_quadform(nn, Cut::new(n, 0), cp(rho, 0.0, 0.0), OracleLayer::Layer1)
                    .unwrap();
            let plus = psi(nn, n, rho).unwrap();
            assert!(
                (plus - oracle).abs() < 1e-10,
                "N={nn} n={n} rho={rho}: {plus} vs {oracle}"
            );
            let minus = psi_with_sign(nn, n, rho, PsiDenomSign::Minus).unwrap();
            assert!(
                (minus - oracle).abs() > 1e-3,
                "minus variant unexpectedly agrees at N={nn} n={n} rho={rho}"
            );
        }
    }

    #[test]
    fn psi_degenerate_denominator() {
        // N=3, n=1: denominator 1 + rho vanishes at rho = -1.
        let err = psi(3, 1, -1.0).unwrap_err();
        assert!(err.to_string().contains("degenerate"));
    }

    #[test]
    fn phi_frozen_values() {
        // Hand-checked: S=1, T=1, D=3/4, E=4/3; 1 - 1/4 - 1/12 = 2/3.
        assert!((phi(2, Cut::new(1, 1), cp(0.0, 0.0, 0.5)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        // Hand-checked against a symmetric solve of the conditioning system.
        assert!((phi(3, Cut::new(1, 1), cp(0.2, 0.1, 0.3)).unwrap() - 0.84375).abs() < 1e-12);
    }

    #[test]
    fn phi_reduces_to_psi_without_cross_correlation() {
        for nn in 1..=5usize {
            for n in 0..=nn {
                for m in 0..=nn {
                    for &(r1, r2) in &[(0.3, -0.2), (0.9, 0.6), (-0.1, 0.0)] {
                        let f = phi(nn, Cut::new(n, m), cp(r1, r2, 0.0)).unwrap();
                        let s = psi(nn, m, r2).unwrap();
                        assert!(
                            (f - s).abs() < 1e-12,
                            "N={nn} cut=({n},{m}) r2={r2}: {f} vs {s}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn phi_matches_oracle_on_feasible_samples() {
        // A few deterministic nondegenerate feasible points per size.
        let cs = [
            cp(0.3, 0.2, 0.1),
            cp(0.0, 0.0, 0.2),
            cp(0.6, -0.1, -0.15),
            cp(-0.2, 0.5, 0.05),
        ];
        for nn in 1..=4usize {
            for n in 0..=nn {
                for m in 0..=nn {
                    for c in cs {
                        if !crate::covariance::is_feasible(nn, c, 1e-12).unwrap() {
                            continue;
                        }
                        let cut = Cut::new(n, m);
                        let f = phi(nn, cut, c).unwrap();
                        let o = schur_oracle_quadform(nn, cut, c, OracleLayer::Layer2).unwrap();
                        assert!((f - o).abs() < 1e-10, "N={nn} cut={cut} c={c}: {f} vs {o}");
                    }
                }
            }
        }
    }

    #[test]
    fn phi_special_patterns() {
        // (a) empty.
        assert_eq!(phi_special(3, Cut::new(0, 0), cp(0.9, 0.9, 0.9)), Some(0.0));
        // (b) full: N(1+(N-1) rho2).
        assert_eq!(phi_special(3, Cut::new(3, 3), cp(0.0, 0.5, 0.0)), Some(6.0));
        // (c) m=N with rho1=1.
        let v = phi_special(2, Cut::new(1, 2), cp(1.0, 0.5, 0.3)).unwrap();
        assert!((v - 2.0 * (1.5 - 2.0 * 0.09)).abs() < 1e-15);
        // (d) n=N with rho2=1.
        assert_eq!(phi_special(2, Cut::new(2, 1), cp(0.3, 1.0, 0.2)), Some(0.0));
        // (e) all-ones.
        assert_eq!(phi_special(3, Cut::new(1, 2), cp(1.0, 1.0, 1.0)), Some(0.0));
        // (f) next-to-full cut at the negative endpoint.
        let v = phi_special(3, Cut::new(2, 2), cp(0.4, 0.0, -1.0)).unwrap();
        assert!((v - 1.0).abs() < 1e-15, "mu(3,0) = 1, got {v}");
        // No pattern.
        assert_eq!(phi_special(3, Cut::new(1, 2), cp(0.5, 0.5, 0.5)), None);
    }

    #[test]
    fn phi_special_values_match_pseudoinverse_oracle() {
        let cases = [
            (2usize, Cut::new(0, 0), cp(0.7, 0.7, 0.7)),
            (3, Cut::new(3, 3), cp(0.2, 0.5, 0.1)),
            (2, Cut::new(1, 2), cp(1.0, 0.5, 0.3)),
            (3, Cut::new(3, 1), cp(0.3, 1.0, 0.2)),
            (3, Cut::new(1, 2), cp(1.0, 1.0, 1.0)),
            (2, Cut::new(1, 1), cp(0.4, 0.0, -1.0)),
            (3, Cut::new(2, 2), cp(0.9, 0.6, -1.0)),
        ];
        for (nn, cut, c) in cases {
            let s = phi_special(nn, cut, c).expect("pattern expected");
            let o = schur_oracle_quadform(nn, cut, c, OracleLayer::Layer2).unwrap();
            assert!((s - o).abs() < 1e-10, "N={nn} cut={cut} c={c}: {s} vs {o}");
        }
    }

    #[test]
    fn mu_frozen_values() {
        assert_eq!(mu(1, 0.3), 0.0);
        assert!((mu(3, 1.0)).abs() < 1e-15);
        assert!((mu(3, 0.0) - 1.0).abs() < 1e-15);
        assert!((mu(5, 0.0)).abs() < 1e-15);
        // Positive strictly inside ((N-5)/(N-1), 1).
        assert!(mu(5, 0.5) > 0.0);
        assert!(mu(5, -0.1) < 0.0);
    }

    #[test]
    fn phi_genuinely_undefined_points_error() {
        // Next-to-full cut at +1 is not in the pattern table (only -1 is)
        // and the joint denominator vanishes.
        assert!(phi(2, Cut::new(1, 1), cp(0.5, 0.5, 1.0)).is_err());
        // Interior joint-denominator zero away from any pattern.
        assert!(phi(3, Cut::new(1, 1), cp(0.0, 0.0, 0.5)).is_err());
        // First-layer denominator zero with a live cross term.
        assert!(phi(3, Cut::new(1, 1), cp(-1.0, 0.3, 0.1)).is_err());
    }

    #[test]
    fn intermediates_identities_and_gamma_route() {
        let cases = [
            (3usize, Cut::new(1, 1), cp(0.2, 0.1, 0.3)),
            (4, Cut::new(2, 1), cp(0.5, -0.2, 0.15)),
            (5, Cut::new(1, 3), cp(-0.1, 0.4, 0.1)),
            (2, Cut::new(1, 1), cp(0.0, 0.0, 0.5)),
            (4, Cut::new(4, 2), cp(0.3, 0.6, 0.2)),
            (4, Cut::new(2, 4), cp(0.3, 0.6, 0.2)),
        ];
        for (nn, cut, c) in cases {
            let si = SchurIntermediates::compute(nn, cut, c).unwrap();
            let p = (nn - cut.n) as f64;
            let q = (nn - cut.m) as f64;
            if nn > cut.n {
                let s = 1.0 + (p - 1.0) * c.rho1;
                assert!(
                    (si.row_sum_first() - 1.0 / s).abs() < 1e-12,
                    "first row sum at N={nn} cut={cut}"
                );
            }
            if nn > cut.m {
                let s = 1.0 + (p - 1.0) * c.rho1;
                let t = 1.0 + (q - 1.0) * c.rho2;
                let expect = if nn > cut.n && c.rho12 != 0.0 {
                    s / (s * t - q * p * c.rho12 * c.rho12)
                } else {
                    1.0 / t
                };
                assert!(
                    (si.row_sum_second() - expect).abs() < 1e-12,
                    "second row sum at N={nn} cut={cut}"
                );
            }
            // Symmetry of the assembled inverse.
            assert!((si.alpha_b - si.alpha_c).abs() < 1e-12);
            // The two assembly routes agree.
            let direct = phi(nn, cut, c).unwrap();
            assert!(
                (si.phi_via_gamma() - direct).abs() < 1e-10,
                "gamma route at N={nn} cut={cut}: {} vs {direct}",
                si.phi_via_gamma()
            );
        }
    }

    #[test]
    fn intermediates_reject_blowup_points() {
        // rho1 = 1 with p >= 2: x and y individually blow up.
        assert!(SchurIntermediates::compute(3, Cut::new(1, 1), cp(1.0, 0.2, 0.1)).is_err());
    }

    #[test]
    fn oracle_layer2_examples() {
        // Empty target.
        assert_eq!(
            schur_oracle_quadform(3, Cut::new(0, 0), cp(0.5, 0.5, 0.2), OracleLayer::Layer2)
                .unwrap(),
            0.0
        );
        // Layer-1 reference value.
        let v = schur_oracle_quadform(2, Cut::new(1, 0), cp(0.5, 0.0, 0.0), OracleLayer::Layer1)
            .unwrap();
        assert!((v - 0.75).abs() < 1e-12);
    }

    fn fd2_phi(nn: usize, cut: Cut, rho1: f64, rho2: f64, hstep: f64) -> f64 {
        let at = |r12: f64| phi(nn, cut, cp(rho1, rho2, r12)).unwrap();
        (at(hstep) - 2.0 * at(0.0) + at(-hstep)) / (hstep * hstep)
    }

    #[test]
    fn d2phi_frozen_and_matches_finite_difference() {
        let d = d2phi_at_zero(2, Cut::new(1, 1), 0.0, 0.0).unwrap();
        assert!((d + 2.0).abs() < 1e-12);
        for &(nn, cut, r1, r2) in &[
            (2usize, Cut::new(1, 1), 0.0, 0.0),
            (2, Cut::new(1, 1), 0.0, 0.5),
            (3, Cut::new(1, 2), 0.3, 0.4),
            (4, Cut::new(2, 3), -0.2, 0.7),
        ] {
            let closed = d2phi_at_zero(nn, cut, r1, r2).unwrap();
            let fd = fd2_phi(nn, cut, r1, r2, 1e-4);
            let denom = closed.abs().max(1e-6);
            assert!(
                ((closed - fd) / denom).abs() < 1e-4,
                "N={nn} cut={cut} rho=({r1},{r2}): closed {closed} fd {fd}"
            );
        }
    }

    #[test]
    fn d2phi_zero_cases_and_sign() {
        assert_eq!(d2phi_at_zero(3, Cut::new(1, 0), 0.5, 0.5).unwrap(), 0.0);
        assert_eq!(d2phi_at_zero(3, Cut::new(3, 2), 0.5, 0.5).unwrap(), 0.0);
        for &(r1, r2) in &[(0.0, 0.0), (0.5, 0.9), (-0.3, 0.2)] {
            let d = d2phi_at_zero(4, Cut::new(2, 2), r1, r2).unwrap();
            assert!(d <= 0.0, "rho=({r1},{r2}) gave {d}");
        }
    }

    #[test]
    fn d2phi_dropped_mixed_term_variant_disagrees_with_finite_difference() {
        // The simplification that loses the mixed product term.
        let naive = |nn: usize, cut: Cut, r1: f64, r2: f64| {
            let p = (nn - cut.n) as f64;
            let q = (nn - cut.m) as f64;
            let mf = cut.m as f64;
            let x = 1.0 / (1.0 + (p - 1.0) * r1);
            let t = 1.0 + (q - 1.0) * r2;
            2.0 * mf * mf * p * x * (-1.0 - q * q * r2 * r2 / (t * t))
        };
        let (nn, cut, r1, r2) = (2usize, Cut::new(1, 1), 0.0, 0.5);
        let fd = fd2_phi(nn, cut, r1, r2, 1e-4);
        let wrong = naive(nn, cut, r1, r2);
        let right = d2phi_at_zero(nn, cut, r1, r2).unwrap();
        assert!((wrong - fd).abs() > 1.0, "variant {wrong} vs fd {fd}");
        assert!((right - fd).abs() < 1e-4 * right.abs().max(1e-6));
        assert!((right + 0.5).abs() < 1e-8, "closed value should be -0.5");
    }

    #[test]
    fn limits_converge_for_all_cuts_at_full_intra_correlation() {
        for nn in 1..=3usize {
            for n in 0..=nn {
                for m in 0..=nn {
                    let rep = limit_checks(nn, Cut::new(n, m)).unwrap();
                    for o in rep.outcomes.iter().take(2) {
                        assert_eq!(
                            o.class,
                            LimitClass::MatchesSpecial,
                            "N={nn} cut=({n},{m}) path {:?}",
                            o.path
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn limits_diverge_for_next_to_full_cut() {
        let rep = limit_checks(2, Cut::new(1, 1)).unwrap();
        assert_eq!(rep.outcomes.len(), 4);
        for o in rep.outcomes.iter().skip(2) {
            assert_eq!(o.class, LimitClass::Divergent, "path {:?}", o.path);
            let s = o.special_value.expect("pattern value present");
            assert!((s - mu(2, 0.5)).abs() < 1e-15);
        }
        // Full-cut sequence sits at the constant N(1+(N-1)rho2) = N^2.
        let rep = limit_checks(2, Cut::new(2, 2)).unwrap();
        assert_eq!(rep.outcomes[0].special_value, Some(4.0));
        assert_eq!(rep.outcomes[0].class, LimitClass::MatchesSpecial);
    }

    #[test]
    fn evenness_in_cross_correlation() {
        for &(nn, n, m) in &[(2usize, 1usize, 1usize), (3, 2, 1), (4, 1, 3)] {
            for &r12 in &[0.05, 0.1, 0.2] {
                let a = phi(nn, Cut::new(n, m), cp(0.4, 0.3, r12)).unwrap();
                let b = phi(nn, Cut::new(n, m), cp(0.4, 0.3, -r12)).unwrap();
                assert!((a - b).abs() < 1e-12);
            }
        }
    }
}
