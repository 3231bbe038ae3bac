//! Real polynomials on `[0, 1]` under the sup norm.
//!
//! This is the incomplete space `E` in which the counterexample lives. The
//! representation is a dense ascending coefficient vector with trailing zeros
//! trimmed at exactly `0.0`, so `degree` is an exact integer invariant.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Default enclosure width for [`Polynomial::sup_norm`].
pub const DEFAULT_SUP_TOL: f64 = 1e-12;

/// Largest `n` for which `n!` is a finite binary64 value.
pub const MAX_FACTORIAL_ORDER: usize = 170;

const SEED_INTERVALS: usize = 128;
const MAX_REFINEMENTS: usize = 200_000;

/// A polynomial function `t -> a_0 + a_1 t + ... + a_d t^d` restricted to `[0, 1]`.
///
/// The empty coefficient list is the zero polynomial (written θ elsewhere).
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

/// Certified enclosure of a sup norm: the true value lies in `[value, value + radius]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SupNormResult {
    pub value: f64,
    pub radius: f64,
}

impl SupNormResult {
    pub fn upper(&self) -> f64 {
        self.value + self.radius
    }
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { coeffs: Vec::new() }
    }

    /// Builds a polynomial from ascending coefficients, trimming trailing exact zeros.
    pub fn from_coefficients(mut coeffs: Vec<f64>) -> Self {
        while coeffs.last() == Some(&0.0) {
            coeffs.pop();
        }
        Polynomial { coeffs }
    }

    /// The monomial `e_n : t -> t^n`.
    pub fn monomial(n: usize) -> Self {
        let mut coeffs = vec![0.0; n + 1];
        coeffs[n] = 1.0;
        Polynomial { coeffs }
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coeffs
    }

    /// Coefficient of `t^k`; zero beyond the stored degree.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// Degree of the polynomial, `-1` for the zero polynomial.
    pub fn degree(&self) -> isize {
        self.coeffs.len() as isize - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn add(&self, other: &Polynomial) -> Polynomial {
        let (long, short) = if self.coeffs.len() >= other.coeffs.len() {
            (&self.coeffs, &other.coeffs)
        } else {
            (&other.coeffs, &self.coeffs)
        };
        let mut coeffs = long.clone();
        for (c, s) in coeffs.iter_mut().zip(short) {
            *c += s;
        }
        Polynomial::from_coefficients(coeffs)
    }

    pub fn sub(&self, other: &Polynomial) -> Polynomial {
        self.add(&other.neg())
    }

    pub fn scale(&self, s: f64) -> Polynomial {
        Polynomial::from_coefficients(self.coeffs.iter().map(|c| s * c).collect())
    }

    /// Coefficientwise sign flip; exact in binary64.
    pub fn neg(&self) -> Polynomial {
        Polynomial {
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    /// Horner evaluation. Meaningful on `[0, 1]`; other `t` are accepted but uncertified.
    pub fn eval(&self, t: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * t + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::from_coefficients(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    /// Largest absolute coefficient difference, a convenient exactness metric.
    pub fn max_coefficient_gap(&self, other: &Polynomial) -> f64 {
        let len = self.coeffs.len().max(other.coeffs.len());
        (0..len)
            .map(|k| (self.coefficient(k) - other.coefficient(k)).abs())
            .fold(0.0, f64::max)
    }

    /// Certified sup norm on `[0, 1]`.
    ///
    /// A lower bound comes from the 129-point Chebyshev–Lobatto grid. The
    /// grid cells are then refined branch-and-bound style: each cell carries
    /// an upper bound on `|p|`, the smaller of the Lipschitz envelope built
    /// from `max|p'| <= sum k |a_k|` and the Taylor enclosure at the cell
    /// midpoint. Refinement stops once the largest upper bound is within
    /// `tol` of the best sampled value.
    ///
    /// Rounding in the evaluation itself is not tracked, so the enclosure is
    /// certified up to a few ulps of `sum |a_k|`.
    pub fn sup_norm(&self, tol: f64) -> SupNormResult {
        assert!(tol > 0.0, "sup_norm tolerance must be positive");
        match self.coeffs.len() {
            0 => {
                return SupNormResult {
                    value: 0.0,
                    radius: 0.0,
                }
            }
            1 => {
                return SupNormResult {
                    value: self.coeffs[0].abs(),
                    radius: 0.0,
                }
            }
            _ => {}
        }

        let lipschitz: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| k as f64 * c.abs())
            .sum();

        let grid: Vec<f64> = (0..=SEED_INTERVALS)
            .map(|j| match j {
                0 => 0.0,
                SEED_INTERVALS => 1.0,
                _ => {
                    0.5 - 0.5 * (j as f64 * std::f64::consts::PI / SEED_INTERVALS as f64).cos()
                }
            })
            .collect();
        let values: Vec<f64> = grid.iter().map(|&t| self.eval(t).abs()).collect();
        let mut lower = values.iter().copied().fold(0.0, f64::max);

        let mut heap = BinaryHeap::with_capacity(2 * SEED_INTERVALS);
        for j in 0..SEED_INTERVALS {
            heap.push(self.cell(grid[j], grid[j + 1], values[j], values[j + 1], lipschitz));
        }

        let mut refinements = 0;
        while let Some(cell) = heap.pop() {
            if cell.upper - lower <= tol || refinements >= MAX_REFINEMENTS {
                return SupNormResult {
                    value: lower,
                    radius: (cell.upper - lower).max(0.0),
                };
            }
            let mid = 0.5 * (cell.lo + cell.hi);
            if mid <= cell.lo || mid >= cell.hi {
                // Cell is one ulp wide: its endpoints are the only points in it.
                continue;
            }
            refinements += 1;
            let fm = self.eval(mid).abs();
            lower = lower.max(fm);
            heap.push(self.cell(cell.lo, mid, cell.f_lo, fm, lipschitz));
            heap.push(self.cell(mid, cell.hi, fm, cell.f_hi, lipschitz));
        }
        SupNormResult {
            value: lower,
            radius: 0.0,
        }
    }

    fn cell(&self, lo: f64, hi: f64, f_lo: f64, f_hi: f64, lipschitz: f64) -> Cell {
        let half = 0.5 * (hi - lo);
        let envelope = 0.5 * (f_lo + f_hi) + lipschitz * half;
        let upper = envelope.min(self.taylor_bound(lo + half, half));
        Cell {
            lo,
            hi,
            f_lo,
            f_hi,
            upper,
        }
    }

    /// Bound on `|p(mid + s)|` for `|s| <= half`, from the coefficients of `p(mid + s)`.
    fn taylor_bound(&self, mid: f64, half: f64) -> f64 {
        let mut shifted = self.coeffs.clone();
        let d = shifted.len() - 1;
        for i in 0..d {
            for j in (i..d).rev() {
                shifted[j] += mid * shifted[j + 1];
            }
        }
        shifted.iter().rev().fold(0.0, |acc, c| acc * half + c.abs())
    }
}

#[derive(Debug)]
struct Cell {
    lo: f64,
    hi: f64,
    f_lo: f64,
    f_hi: f64,
    upper: f64,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Cell {}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        self.upper
            .total_cmp(&other.upper)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// `1/n!` by iterated division, `c_k = c_{k-1} / k`.
pub fn inv_factorial(n: usize) -> Result<f64> {
    if n > MAX_FACTORIAL_ORDER {
        return Err(Error::range(format!(
            "1/{n}! requested, order limit is {MAX_FACTORIAL_ORDER}"
        )));
    }
    Ok((1..=n).fold(1.0, |c, k| c / k as f64))
}

/// Exponential partial sum `sum_{k<=n} t^k / k!`.
pub fn exp_partial(n: usize) -> Result<Polynomial> {
    if n > MAX_FACTORIAL_ORDER {
        return Err(Error::range(format!(
            "exp partial sum of order {n} exceeds {MAX_FACTORIAL_ORDER}"
        )));
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    let mut c = 1.0;
    coeffs.push(c);
    for k in 1..=n {
        c /= k as f64;
        coeffs.push(c);
    }
    Ok(Polynomial::from_coefficients(coeffs))
}

/// Sup-norm distance from `exp_partial(n)` to `exp` on `[0, 1]`, i.e. `e - sum_{k<=n} 1/k!`.
///
/// Summed from the smallest term upwards; terms past `170!` are below binary64 resolution.
pub fn exp_remainder_sup(n: usize) -> Result<f64> {
    if n > MAX_FACTORIAL_ORDER {
        return Err(Error::range(format!(
            "remainder of order {n} exceeds {MAX_FACTORIAL_ORDER}"
        )));
    }
    let mut terms = Vec::with_capacity(MAX_FACTORIAL_ORDER + 1);
    let mut c = 1.0;
    terms.push(c);
    for k in 1..=MAX_FACTORIAL_ORDER {
        c /= k as f64;
        terms.push(c);
    }
    Ok(terms[n + 1..].iter().rev().sum())
}

impl fmt::Display for Polynomial {
    /// Comma-separated ascending coefficients in shortest round-trip form; θ is empty.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (k, c) in self.coeffs.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for Polynomial {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(Polynomial::zero());
        }
        s.split(',')
            .map(|tok| {
                tok.trim()
                    .parse::<f64>()
                    .map_err(|e| Error::domain(format!("bad coefficient {tok:?}: {e}")))
            })
            .collect::<Result<Vec<_>>>()
            .map(Polynomial::from_coefficients)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn naive_eval(p: &Polynomial, t: f64) -> f64 {
        p.coefficients()
            .iter()
            .enumerate()
            .map(|(k, c)| c * t.powi(k as i32))
            .sum()
    }

    fn factorial_tail(n: usize) -> f64 {
        // independent of inv_factorial: products, largest term first
        let mut total = 0.0;
        for k in (n + 1)..=30 {
            let fact: f64 = (1..=k).map(|i| i as f64).product();
            total += 1.0 / fact;
        }
        total
    }

    #[test]
    fn monomials() {
        assert_eq!(Polynomial::monomial(0).coefficients(), &[1.0]);
        assert_eq!(Polynomial::monomial(3).eval(0.5), 0.125);
        assert_eq!(Polynomial::monomial(7).degree(), 7);
        assert_eq!(Polynomial::monomial(2).eval(0.25), 0.0625);
    }

    #[test]
    fn vector_operations_trim_to_zero() {
        let e1 = Polynomial::monomial(1);
        assert!(e1.add(&e1.scale(-1.0)).is_zero());
        assert!(Polynomial::monomial(5).scale(0.0).is_zero());
        assert_eq!(Polynomial::monomial(0).add(&e1).eval(1.0), 2.0);
        assert_eq!(Polynomial::zero().degree(), -1);
        assert_eq!(Polynomial::zero().eval(0.3), 0.0);
    }

    #[test]
    fn trimming_only_removes_exact_zeros() {
        let p = Polynomial::from_coefficients(vec![1.0, 1e-300, 0.0, -0.0]);
        assert_eq!(p.degree(), 1);
    }

    #[test]
    fn exp_partial_values() {
        assert_eq!(exp_partial(0).unwrap().coefficients(), &[1.0]);
        assert_eq!(exp_partial(2).unwrap().coefficients(), &[1.0, 1.0, 0.5]);
        let p4 = exp_partial(4).unwrap().eval(1.0);
        assert!((p4 - 65.0 / 24.0).abs() < 1e-15);
        assert!(matches!(exp_partial(171), Err(Error::Range(_))));
    }

    #[test]
    fn exp_partial_sup_norm_is_value_at_one() {
        let expected: f64 = (0..=10)
            .map(|k| 1.0 / (1..=k).map(|i| i as f64).product::<f64>())
            .sum();
        let s = exp_partial(10).unwrap().sup_norm(DEFAULT_SUP_TOL);
        assert!((s.value - expected).abs() <= 1e-12);
        assert!((s.value - std::f64::consts::E).abs() < 1e-6);
    }

    #[test]
    fn remainder_values() {
        assert!((exp_remainder_sup(4).unwrap() - factorial_tail(4)).abs() < 1e-16);
        assert!((exp_remainder_sup(4).unwrap() - 0.0099485).abs() < 1e-7);
        assert!((exp_remainder_sup(0).unwrap() - factorial_tail(0)).abs() < 1e-15);
        assert!((exp_remainder_sup(0).unwrap() - (std::f64::consts::E - 1.0)).abs() < 1e-15);
        assert_eq!(exp_remainder_sup(170).unwrap(), 0.0);
        assert!(exp_remainder_sup(171).is_err());
    }

    #[test]
    fn remainder_strictly_decreasing() {
        let r: Vec<f64> = (0..=170).map(|n| exp_remainder_sup(n).unwrap()).collect();
        assert!(r.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sup_norm_examples() {
        for n in 0..=60 {
            let s = Polynomial::monomial(n).sup_norm(DEFAULT_SUP_TOL);
            assert_eq!(s.value, 1.0, "n = {n}");
            assert!(s.radius <= DEFAULT_SUP_TOL);
        }
        let z = Polynomial::zero().sup_norm(1e-12);
        assert_eq!((z.value, z.radius), (0.0, 0.0));
        let affine = Polynomial::from_coefficients(vec![-1.0, 2.0]);
        let oracle = affine.eval(0.0).abs().max(affine.eval(1.0).abs());
        assert_eq!(affine.sup_norm(1e-12).value, oracle);
    }

    #[test]
    fn sup_norm_interior_maximum() {
        // 4t(1-t) peaks at t = 1/2 with value 1
        let bump = Polynomial::from_coefficients(vec![0.0, 4.0, -4.0]);
        let s = bump.sup_norm(1e-12);
        assert!(s.value <= 1.0 && 1.0 <= s.upper() + 1e-15);
        assert!((s.value - 1.0).abs() <= 1e-12);
        // t - t^3 peaks off-grid at 1/sqrt(3)
        let p = Polynomial::from_coefficients(vec![0.0, 1.0, 0.0, -1.0]);
        let exact = 2.0 / (3.0 * 3f64.sqrt());
        let s = p.sup_norm(1e-12);
        assert!(s.value <= exact + 1e-15 && exact <= s.upper() + 1e-15);
        assert!(s.radius <= 1e-12);
    }

    #[test]
    fn serialization_round_trip() {
        let p = Polynomial::from_coefficients(vec![0.1, -3.0, 0.0, 0.25]);
        assert_eq!(p.to_string(), "0.1,-3,0,0.25");
        let tiny = Polynomial::from_coefficients(vec![1e-300, 1.0 / 3.0]);
        assert_eq!(tiny.to_string().parse::<Polynomial>().unwrap(), tiny);
        assert_eq!("".parse::<Polynomial>().unwrap(), Polynomial::zero());
        assert!("1,x".parse::<Polynomial>().is_err());
    }

    fn coeff_vec() -> impl Strategy<Value = Vec<f64>> {
        prop::collection::vec(-10.0f64..10.0, 0..=13)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn horner_matches_power_sum(c in coeff_vec(), t in 0.0f64..=1.0) {
            let p = Polynomial::from_coefficients(c);
            let scale: f64 = p.coefficients().iter().map(|c| c.abs()).sum::<f64>().max(1.0);
            prop_assert!((p.eval(t) - naive_eval(&p, t)).abs() <= 1e-12 * scale);
        }

        #[test]
        fn sup_norm_triangle(a in coeff_vec(), b in coeff_vec()) {
            let p = Polynomial::from_coefficients(a);
            let q = Polynomial::from_coefficients(b);
            let lhs = p.add(&q).sup_norm(DEFAULT_SUP_TOL);
            let rp = p.sup_norm(DEFAULT_SUP_TOL);
            let rq = q.sup_norm(DEFAULT_SUP_TOL);
            prop_assert!(lhs.value <= rp.upper() + rq.upper() + 1e-12);
        }

        #[test]
        fn sup_norm_homogeneity(a in coeff_vec(), s in -5.0f64..5.0) {
            let p = Polynomial::from_coefficients(a);
            let base = p.sup_norm(DEFAULT_SUP_TOL);
            let scaled = p.scale(s).sup_norm(DEFAULT_SUP_TOL);
            let slack = s.abs() * base.radius + scaled.radius + 1e-12;
            prop_assert!((scaled.value - s.abs() * base.value).abs() <= slack);
        }

        #[test]
        fn nonnegative_coefficients_peak_at_one(c in prop::collection::vec(0.0f64..3.0, 1..=20)) {
            let p = Polynomial::from_coefficients(c);
            let s = p.sup_norm(DEFAULT_SUP_TOL);
            prop_assert!((s.value - p.eval(1.0)).abs() <= DEFAULT_SUP_TOL);
        }

        #[test]
        fn sup_norm_dominates_samples(c in coeff_vec(), t in 0.0f64..=1.0) {
            let p = Polynomial::from_coefficients(c);
            prop_assert!(p.eval(t).abs() <= p.sup_norm(DEFAULT_SUP_TOL).upper() + 1e-12);
        }
    }
}
