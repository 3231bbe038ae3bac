//! Normed real vector spaces and points of their completion.
//!
//! A point of the completion `F` of a space `S` is represented by a Cauchy
//! sequence in `S` together with a modulus of convergence `eps -> N`: every
//! pair of terms with index at least `N` is within `eps`. Passing to the
//! limit, the term `x_N` is then within `eps` of the point itself, which is
//! all the operations below rely on.

use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::polyfun::{Polynomial, DEFAULT_SUP_TOL};

/// Default tolerance for completion-level queries.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Operations required of a real normed vector space with binary64 scalars.
pub trait NormedSpace: Clone + Send + Sync {
    fn zero() -> Self;
    fn add(&self, other: &Self) -> Self;
    fn scale(&self, s: f64) -> Self;
    fn norm(&self) -> f64;

    fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    fn distance(&self, other: &Self) -> f64 {
        self.sub(other).norm()
    }

    /// `||a - b|| <= tol * max(1, ||a||, ||b||)`.
    fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        let scale = 1f64.max(self.norm()).max(other.norm());
        self.distance(other) <= tol * scale
    }
}

impl NormedSpace for f64 {
    fn zero() -> Self {
        0.0
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn scale(&self, s: f64) -> Self {
        s * self
    }

    fn norm(&self) -> f64 {
        self.abs()
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }
}

impl NormedSpace for Polynomial {
    fn zero() -> Self {
        Polynomial::zero()
    }

    fn add(&self, other: &Self) -> Self {
        Polynomial::add(self, other)
    }

    fn scale(&self, s: f64) -> Self {
        Polynomial::scale(self, s)
    }

    /// Sup norm on `[0, 1]`, certified to [`DEFAULT_SUP_TOL`].
    fn norm(&self) -> f64 {
        self.sup_norm(DEFAULT_SUP_TOL).value
    }

    fn sub(&self, other: &Self) -> Self {
        Polynomial::sub(self, other)
    }
}

type Generator<S> = Arc<dyn Fn(usize) -> Result<S> + Send + Sync>;
type Modulus = Arc<dyn Fn(f64) -> usize + Send + Sync>;

/// A point of the completion, given by a representative Cauchy sequence and its modulus.
///
/// Both closures must be pure. The modulus must be monotone: a smaller
/// tolerance never yields a smaller index.
pub struct CompletionPoint<S> {
    generator: Generator<S>,
    modulus: Modulus,
}

impl<S> Clone for CompletionPoint<S> {
    fn clone(&self) -> Self {
        CompletionPoint {
            generator: Arc::clone(&self.generator),
            modulus: Arc::clone(&self.modulus),
        }
    }
}

impl<S> fmt::Debug for CompletionPoint<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompletionPoint").finish_non_exhaustive()
    }
}

impl<S: NormedSpace + 'static> CompletionPoint<S> {
    pub fn new<G, M>(generator: G, modulus: M) -> Self
    where
        G: Fn(usize) -> Result<S> + Send + Sync + 'static,
        M: Fn(f64) -> usize + Send + Sync + 'static,
    {
        CompletionPoint {
            generator: Arc::new(generator),
            modulus: Arc::new(modulus),
        }
    }

    /// The image of `v` under the embedding `S -> F`.
    pub fn constant(v: S) -> Self {
        CompletionPoint::new(move |_| Ok(v.clone()), |_| 0)
    }

    /// `s * p`, with the modulus rescaled accordingly.
    pub fn scaled(&self, s: f64) -> Self {
        let inner = self.clone();
        let m = self.clone();
        CompletionPoint::new(
            move |n| inner.element(n).map(|x| x.scale(s)),
            move |eps| {
                if s == 0.0 {
                    0
                } else {
                    m.modulus(eps / s.abs())
                }
            },
        )
    }

    pub fn element(&self, n: usize) -> Result<S> {
        (self.generator)(n)
    }

    pub fn modulus(&self, eps: f64) -> usize {
        (self.modulus)(eps)
    }

    /// Checks the modulus on a finite sample: for each `eps`, all pairs among
    /// `N(eps) .. N(eps) + span` must be within `eps`.
    pub fn check_modulus(&self, tolerances: &[f64], span: usize) -> Result<()> {
        for &eps in tolerances {
            let start = self.modulus(eps);
            let terms = (start..=start + span)
                .map(|n| self.element(n))
                .collect::<Result<Vec<_>>>()?;
            for (i, a) in terms.iter().enumerate() {
                for (j, b) in terms.iter().enumerate().skip(i + 1) {
                    let gap = a.distance(b);
                    if gap > eps {
                        return Err(Error::contract(format!(
                            "gap {gap:e} between terms {} and {} exceeds {eps:e}",
                            start + i,
                            start + j
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Norm of the limit, `lim ||x_n||`, to within `tol`.
pub fn norm_limit<S: NormedSpace + 'static>(p: &CompletionPoint<S>, tol: f64) -> Result<f64> {
    check_tol(tol)?;
    Ok(p.element(p.modulus(0.5 * tol))?.norm())
}

/// Distance between two completion points, to within `tol`.
pub fn completion_distance<S: NormedSpace + 'static>(
    p: &CompletionPoint<S>,
    q: &CompletionPoint<S>,
    tol: f64,
) -> Result<f64> {
    check_tol(tol)?;
    let n = p.modulus(0.5 * tol).max(q.modulus(0.5 * tol));
    Ok(p.element(n)?.distance(&q.element(n)?))
}

fn check_tol(tol: f64) -> Result<()> {
    if tol > 0.0 && tol.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(format!("tolerance must be positive, got {tol}")))
    }
}

/// `2^{-(2k+3)}`, the tail bound certified for the `k`-th extracted term.
pub fn fast_tail_bound(k: usize) -> f64 {
    0.5f64.powi(2 * k as i32 + 3)
}

/// `2^{-2k}`, the bound on consecutive extracted gaps.
pub fn fast_gap_bound(k: usize) -> f64 {
    0.5f64.powi(2 * k as i32)
}

/// A fast-Cauchy subsequence `x_{n_1}, x_{n_2}, ...` with `||y - x_{n_k}|| <= 2^{-(2k+3)}`.
///
/// Terms are numbered from 1 as in the construction that consumes them.
#[derive(Clone, Debug, PartialEq)]
pub struct FastCauchyWitness<S> {
    indices: Vec<usize>,
    points: Vec<S>,
}

impl<S: NormedSpace> FastCauchyWitness<S> {
    /// Assembles a witness from already-extracted terms, checking the gap bounds.
    pub fn from_terms(indices: Vec<usize>, points: Vec<S>) -> Result<Self> {
        let w = FastCauchyWitness { indices, points };
        w.validate()?;
        Ok(w)
    }

    pub fn depth(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[usize] {
        &self.indices
    }

    /// Index `n_k` in the original sequence, `k >= 1`.
    pub fn index(&self, k: usize) -> usize {
        self.indices[k - 1]
    }

    /// The extracted term `x_{n_k}`, `k >= 1`.
    pub fn point(&self, k: usize) -> &S {
        &self.points[k - 1]
    }

    pub fn points(&self) -> &[S] {
        &self.points
    }

    pub fn tail_bound(&self, k: usize) -> f64 {
        fast_tail_bound(k)
    }

    /// Re-checks the consecutive gap bound `||x_{n_k} - x_{n_{k-1}}|| <= 2^{-2k}`.
    pub fn validate(&self) -> Result<()> {
        if self.indices.is_empty() || self.indices.len() != self.points.len() {
            return Err(Error::contract("witness has no terms or mismatched lengths"));
        }
        if self.indices.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::contract("witness indices are not strictly increasing"));
        }
        for k in 2..=self.depth() {
            let gap = self.point(k).distance(self.point(k - 1));
            if gap > fast_gap_bound(k) {
                return Err(Error::contract(format!(
                    "gap {gap:e} at k = {k} exceeds 2^-{}",
                    2 * k
                )));
            }
        }
        Ok(())
    }
}

/// Extracts `depth` terms with `n_k = modulus(2^{-(2k+3)})`, forced strictly increasing.
///
/// Only the modulus is used: `||y - x_N(eps)|| <= eps` follows from the Cauchy
/// bound in the limit, so the unknown limit `y` is never needed.
pub fn extract_fast_cauchy<S: NormedSpace + 'static>(
    p: &CompletionPoint<S>,
    depth: usize,
) -> Result<FastCauchyWitness<S>> {
    if depth == 0 {
        return Err(Error::domain("extraction depth must be at least 1"));
    }
    let mut indices: Vec<usize> = Vec::with_capacity(depth);
    let mut points = Vec::with_capacity(depth);
    let mut last_raw = 0;
    for k in 1..=depth {
        let raw = p.modulus(fast_tail_bound(k));
        if k > 1 && raw < last_raw {
            return Err(Error::contract(format!(
                "modulus is not monotone: {raw} at 2^-{} after {last_raw}",
                2 * k + 3
            )));
        }
        last_raw = raw;
        let n = match indices.last() {
            Some(&prev) => raw.max(prev + 1),
            None => raw,
        };
        let x = p.element(n)?;
        if let Some(prev) = points.last() {
            let gap = S::distance(&x, prev);
            if gap > fast_gap_bound(k) {
                return Err(Error::contract(format!(
                    "extracted gap {gap:e} at k = {k} exceeds 2^-{}; modulus is inconsistent",
                    2 * k
                )));
            }
        }
        indices.push(n);
        points.push(x);
    }
    Ok(FastCauchyWitness { indices, points })
}

/// The exponential as a point of `C([0, 1])`: partial sums `sum_{k<=n} t^k/k!`
/// with modulus `min { m : 2/(m+1)! <= eps }` (capped at the factorial limit).
pub fn exp_series_point() -> CompletionPoint<Polynomial> {
    CompletionPoint::new(
        |n| {
            crate::polyfun::exp_partial(n).map_err(|e| Error::Evaluation {
                index: n,
                reason: e.to_string(),
            })
        },
        exp_series_modulus,
    )
}

/// Smallest `m` with `2/(m+1)! <= eps`, since `sum_{k>m} 1/k! <= 2/(m+1)!`.
pub fn exp_series_modulus(eps: f64) -> usize {
    let mut bound = 2.0; // 2/(m+1)! at m = 0
    let mut m = 0;
    while bound > eps && m < crate::polyfun::MAX_FACTORIAL_ORDER {
        m += 1;
        bound /= (m + 1) as f64;
    }
    m
}
