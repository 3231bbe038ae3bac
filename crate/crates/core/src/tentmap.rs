//! The tent-map counterexample `f : [-1, 1] -> E` and the general construction.
//!
//! On the dyadic block `I_n = [2^-(n+1), 2^-n]` the function is a tent with
//! peak `2^(n+2)/n!` at `3 * 2^-(n+2)` carrying the monomial `e_n`, so its
//! integral over `I_n` is `e_n / n!`. The function is odd and `f(0) = θ`.
//!
//! The general construction replaces `e_n / n!` by the increments of a
//! fast-Cauchy sequence in any normed space, giving a piecewise-affine path
//! whose integral over `[2^-n, 1]` is the `n`-th term.

use crate::error::{Error, Result};
use crate::polyfun::{inv_factorial, Polynomial, MAX_FACTORIAL_ORDER};
use crate::vecspace::{FastCauchyWitness, NormedSpace};

/// Deepest block whose endpoints and peak are all representable in binary64.
pub const MAX_BLOCK: usize = 1072;

/// Default truncation depth for the general construction.
pub const DEFAULT_DEPTH: usize = 24;

/// `2^-k`, exact for `k <= 1074`.
pub fn pow2_neg(k: usize) -> f64 {
    match k {
        0..=1022 => f64::from_bits(((1023 - k) as u64) << 52),
        1023..=1074 => f64::from_bits(1u64 << (1074 - k)),
        _ => 0.0,
    }
}

/// The block `I_n = [2^-(n+1), 2^-n]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DyadicBlock {
    index: usize,
}

impl DyadicBlock {
    pub fn new(index: usize) -> Result<Self> {
        if index > MAX_BLOCK {
            return Err(Error::range(format!("block {index} exceeds {MAX_BLOCK}")));
        }
        Ok(DyadicBlock { index })
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn lower(&self) -> f64 {
        pow2_neg(self.index + 1)
    }

    pub fn upper(&self) -> f64 {
        pow2_neg(self.index)
    }

    /// Peak abscissa `3 * 2^-(n+2)`.
    pub fn peak(&self) -> f64 {
        3.0 * pow2_neg(self.index + 2)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower() <= x && x <= self.upper()
    }
}

/// Binary exponent of a positive finite `x` and whether `x` is a power of two.
fn binary_exponent(x: f64) -> (i32, bool) {
    let bits = x.to_bits();
    let exp_bits = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    if exp_bits == 0 {
        // subnormal: value is mantissa * 2^-1074
        let lead = 63 - mantissa.leading_zeros() as i32;
        (lead - 1074, mantissa.is_power_of_two())
    } else {
        (exp_bits - 1023, mantissa == 0)
    }
}

/// Index `n` of the block `I_n` containing `x`, for `0 < x <= 1`.
///
/// At a power of two `2^-k` the lower-lying block `I_k` is returned; both
/// adjacent tents vanish there.
pub fn block_index(x: f64) -> Result<usize> {
    if !(x > 0.0 && x <= 1.0) {
        return Err(Error::domain(format!("block lookup needs 0 < x <= 1, got {x}")));
    }
    let (e, exact) = binary_exponent(x);
    let n = if exact { -e } else { -e - 1 };
    Ok(n as usize)
}

/// `2^(2n+4) / n!` computed as `16 * prod_{k<=n} 4/k`.
pub fn tent_scale(n: usize) -> f64 {
    (1..=n).fold(16.0, |s, k| s * 4.0 / k as f64)
}

/// Peak value `2^(n+2) / n!` of the tent on `I_n`.
pub fn peak_value(n: usize) -> f64 {
    tent_scale(n) * pow2_neg(n + 2)
}

/// Scalar coefficient of `e_n` in `f(x)` for `x` in `I_n`.
pub fn tent_coefficient(n: usize, x: f64) -> Result<f64> {
    let block = DyadicBlock::new(n)?;
    if !block.contains(x) {
        return Err(Error::domain(format!(
            "x = {x} lies outside block {n} = [{}, {}]",
            block.lower(),
            block.upper()
        )));
    }
    let s = tent_scale(n);
    Ok(if x <= block.peak() {
        s * (x - block.lower())
    } else {
        s * (block.upper() - x)
    })
}

/// Builds `f(x)` from a coefficient rule `(n, x) -> c`, giving `c * e_n` on `I_n`.
///
/// [`evaluate_f`] uses [`tent_coefficient`]; the verification suite swaps in
/// perturbed rules.
pub fn evaluate_with<C>(x: f64, coefficient: C) -> Result<Polynomial>
where
    C: Fn(usize, f64) -> Result<f64>,
{
    if !(x.abs() <= 1.0) {
        return Err(Error::domain(format!("f is defined on [-1, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(Polynomial::zero());
    }
    if x < 0.0 {
        return evaluate_with(-x, coefficient).map(|p| p.neg());
    }
    let n = block_index(x)?;
    let c = coefficient(n, x)?;
    if c == 0.0 {
        return Ok(Polynomial::zero());
    }
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = c;
    Ok(Polynomial::from_coefficients(coeffs))
}

/// The counterexample `f(x)` as an element of `E`.
pub fn evaluate_f(x: f64) -> Result<Polynomial> {
    evaluate_with(x, tent_coefficient)
}

/// The surface `Φ(x, t) = f(x)(t)` on `[-1, 1] x [0, 1]`.
pub fn phi(x: f64, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::domain(format!("t must lie in [0, 1], got {t}")));
    }
    Ok(evaluate_f(x)?.eval(t))
}

/// `∫_{I_n} f = e_n / n!`.
pub fn block_integral(n: usize) -> Result<Polynomial> {
    let c = inv_factorial(n)?;
    let mut coeffs = vec![0.0; n + 1];
    coeffs[n] = c;
    Ok(Polynomial::from_coefficients(coeffs))
}

/// Scalar `∫_x^{2^-n} c(s) ds` of the tent coefficient on `I_n`, for `x` in `I_n`.
fn tent_upper_area(n: usize, x: f64) -> Result<f64> {
    let block = DyadicBlock::new(n)?;
    let s = tent_scale(n);
    Ok(if x >= block.peak() {
        let w = block.upper() - x;
        0.5 * s * w * w
    } else {
        let w = x - block.lower();
        inv_factorial(n)? - 0.5 * s * w * w
    })
}

/// Exact `∫_a^1 f` in `E`, for `0 < a <= 1`.
///
/// Whole blocks above `a` contribute `e_k / k!`; the block containing `a`
/// contributes the closed-form area of the remaining part of its tent.
pub fn integral_from(a: f64) -> Result<Polynomial> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::domain(format!(
            "integral_from needs 0 < a <= 1, got {a}; the integral from 0 lies outside E"
        )));
    }
    let n = block_index(a)?;
    if n > MAX_FACTORIAL_ORDER {
        return Err(Error::range(format!(
            "lower limit {a} reaches block {n}, beyond order {MAX_FACTORIAL_ORDER}"
        )));
    }
    let mut coeffs = Vec::with_capacity(n + 1);
    for k in 0..n {
        coeffs.push(inv_factorial(k)?);
    }
    coeffs.push(tent_upper_area(n, a)?);
    Ok(Polynomial::from_coefficients(coeffs))
}

/// Exact `∫_a^b f` in `E` when it exists there, for `-1 <= a < b <= 1`.
///
/// Returns `Ok(None)` when exactly one endpoint is `0`: the integral is then
/// `±(exp - partial sum)`, which lies in the completion but not in `E`.
pub fn exact_integral(a: f64, b: f64) -> Result<Option<Polynomial>> {
    if !(-1.0 <= a && a < b && b <= 1.0) {
        return Err(Error::domain(format!("need -1 <= a < b <= 1, got [{a}, {b}]")));
    }
    // F(x) = ∫_0^x f is even, so ∫_a^b f = F(|b|) - F(|a|)
    let (lo, hi) = (a.abs(), b.abs());
    if lo == hi {
        return Ok(Some(Polynomial::zero()));
    }
    if lo == 0.0 || hi == 0.0 {
        return Ok(None);
    }
    let between = |u: f64, v: f64| -> Result<Polynomial> {
        Ok(integral_from(u)?.sub(&integral_from(v)?))
    };
    Ok(Some(if lo < hi {
        between(lo, hi)?
    } else {
        between(hi, lo)?.neg()
    }))
}

/// All tent breakpoints of `f` in `[a, b]`, including `a` and `b`, sorted.
///
/// The interval must stay away from `0`, where breakpoints accumulate.
pub fn tent_breakpoints(a: f64, b: f64) -> Result<Vec<f64>> {
    if !(a < b) || a.abs() > 1.0 || b.abs() > 1.0 || (a <= 0.0 && b >= 0.0) {
        return Err(Error::domain(format!(
            "breakpoints need [{a}, {b}] inside [-1, 0) or (0, 1]"
        )));
    }
    if b < 0.0 {
        let mut pts: Vec<f64> = tent_breakpoints(-b, -a)?.into_iter().map(|x| -x).collect();
        pts.reverse();
        return Ok(pts);
    }
    let mut pts = vec![a];
    for n in (block_index(b)?..=block_index(a)?).rev() {
        let block = DyadicBlock::new(n)?;
        for x in [block.lower(), block.peak(), block.upper()] {
            if a < x && x < b && *pts.last().unwrap() < x {
                pts.push(x);
            }
        }
    }
    pts.push(b);
    Ok(pts)
}

/// One affine piece of a path: linear interpolation between endpoint vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineSegment<S> {
    pub start: f64,
    pub end: f64,
    pub at_start: S,
    pub at_end: S,
}

impl<S: NormedSpace> AffineSegment<S> {
    pub fn value_at(&self, x: f64) -> S {
        if x == self.start {
            return self.at_start.clone();
        }
        if x == self.end {
            return self.at_end.clone();
        }
        let width = self.end - self.start;
        self.at_start
            .scale((self.end - x) / width)
            .add(&self.at_end.scale((x - self.start) / width))
    }

    /// Exact integral over `[start, x]` by the trapezoid rule, `x` in the segment.
    fn integral_to(&self, x: f64) -> S {
        let v = self.value_at(x);
        self.at_start.add(&v).scale(0.5 * (x - self.start))
    }

    fn integral(&self) -> S {
        self.at_start.add(&self.at_end).scale(0.5 * (self.end - self.start))
    }
}

/// A continuous, odd, piecewise-affine path `[-1, 1] -> S`.
///
/// Segments are stored for `[0, 1]`; negative arguments use oddness.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseAffineVectorPath<S> {
    segments: Vec<AffineSegment<S>>,
    depth: usize,
}

impl<S: NormedSpace> PiecewiseAffineVectorPath<S> {
    /// Validates ordering, contiguity, continuity and `path(0) = 0`.
    pub fn new(segments: Vec<AffineSegment<S>>, depth: usize) -> Result<Self> {
        let (first, last) = match (segments.first(), segments.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(Error::contract("a path needs at least one segment")),
        };
        if first.start != 0.0 || last.end != 1.0 {
            return Err(Error::contract("segments must cover [0, 1]"));
        }
        if first.at_start.norm() != 0.0 {
            return Err(Error::contract("an odd path must vanish at 0"));
        }
        if let Some(s) = segments.iter().find(|s| !(s.start < s.end)) {
            return Err(Error::contract(format!(
                "empty segment [{}, {}]",
                s.start, s.end
            )));
        }
        for pair in segments.windows(2) {
            if pair[0].end != pair[1].start {
                return Err(Error::contract(format!(
                    "segments not contiguous at {} / {}",
                    pair[0].end, pair[1].start
                )));
            }
            if pair[0].at_end.distance(&pair[1].at_start) != 0.0 {
                return Err(Error::contract(format!(
                    "path is discontinuous at {}",
                    pair[0].end
                )));
            }
        }
        Ok(PiecewiseAffineVectorPath { segments, depth })
    }

    /// Tents of unit integral on `[2^-k, 2^-(k-1)]` carrying `increments[k-1]`,
    /// zero below `2^-depth` where `depth = increments.len()`.
    ///
    /// The block-`k` tent peaks at `3 * 2^-(k+1)` with value `2^(k+1) * d_k`,
    /// so `∫_{2^-n}^1 path = d_1 + ... + d_n`.
    pub fn from_dyadic_increments(increments: &[S]) -> Result<Self> {
        let depth = increments.len();
        if depth == 0 {
            return Err(Error::domain("depth must be at least 1"));
        }
        if depth > MAX_BLOCK {
            return Err(Error::range(format!("depth {depth} exceeds {MAX_BLOCK}")));
        }
        let mut segments = Vec::with_capacity(2 * depth + 1);
        segments.push(AffineSegment {
            start: 0.0,
            end: pow2_neg(depth),
            at_start: S::zero(),
            at_end: S::zero(),
        });
        for k in (1..=depth).rev() {
            let lo = pow2_neg(k);
            let hi = pow2_neg(k - 1);
            let peak = 3.0 * pow2_neg(k + 1);
            let top = increments[k - 1].scale(2f64.powi(k as i32 + 1));
            segments.push(AffineSegment {
                start: lo,
                end: peak,
                at_start: S::zero(),
                at_end: top.clone(),
            });
            segments.push(AffineSegment {
                start: peak,
                end: hi,
                at_start: top,
                at_end: S::zero(),
            });
        }
        PiecewiseAffineVectorPath::new(segments, depth)
    }

    pub fn segments(&self) -> &[AffineSegment<S>] {
        &self.segments
    }

    /// Number of dyadic blocks carried before the path is pinned to zero.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Breakpoints on `[0, 1]`, ascending.
    pub fn breakpoints(&self) -> Vec<f64> {
        std::iter::once(0.0)
            .chain(self.segments.iter().map(|s| s.end))
            .collect()
    }

    fn segment_at(&self, x: f64) -> &AffineSegment<S> {
        let i = self.segments.partition_point(|s| s.end < x);
        &self.segments[i.min(self.segments.len() - 1)]
    }

    pub fn evaluate(&self, x: f64) -> Result<S> {
        if !(x.abs() <= 1.0) {
            return Err(Error::domain(format!("path is defined on [-1, 1], got {x}")));
        }
        if x < 0.0 {
            return Ok(self.segment_at(-x).value_at(-x).scale(-1.0));
        }
        Ok(self.segment_at(x).value_at(x))
    }

    /// Exact `∫_a^b path`, `0 <= a <= b <= 1`, summed from the top segment down.
    fn integral_positive(&self, a: f64, b: f64) -> S {
        let mut total = S::zero();
        for seg in self.segments.iter().rev() {
            if seg.end <= a || seg.start >= b {
                continue;
            }
            let piece = match (seg.start >= a, seg.end <= b) {
                (true, true) => seg.integral(),
                (true, false) => seg.integral_to(b),
                (false, true) => seg.integral().sub(&seg.integral_to(a)),
                (false, false) => seg.integral_to(b).sub(&seg.integral_to(a)),
            };
            total = total.add(&piece);
        }
        total
    }

    /// Exact `∫_a^b path` for `-1 <= a <= b <= 1`.
    pub fn integral(&self, a: f64, b: f64) -> Result<S> {
        if !(-1.0 <= a && a <= b && b <= 1.0) {
            return Err(Error::domain(format!("need -1 <= a <= b <= 1, got [{a}, {b}]")));
        }
        // the primitive from 0 is even
        let (lo, hi) = (a.abs(), b.abs());
        Ok(if lo <= hi {
            self.integral_positive(lo, hi)
        } else {
            self.integral_positive(hi, lo).scale(-1.0)
        })
    }
}

/// The general construction over any space: an odd continuous piecewise-affine
/// path with `∫_{2^-n}^1 path = x_n`, truncated below `2^-depth`.
pub fn build_general_f<S: NormedSpace>(
    witness: &FastCauchyWitness<S>,
    depth: usize,
) -> Result<PiecewiseAffineVectorPath<S>> {
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    if witness.depth() < depth {
        return Err(Error::contract(format!(
            "witness has {} terms, {depth} requested",
            witness.depth()
        )));
    }
    witness.validate()?;
    let mut increments = Vec::with_capacity(depth);
    increments.push(witness.point(1).clone());
    for k in 2..=depth {
        increments.push(witness.point(k).sub(witness.point(k - 1)));
    }
    PiecewiseAffineVectorPath::from_dyadic_increments(&increments)
}

/// `∫_{2^-n}^1 path`, which telescopes to the `n`-th witness term.
pub fn general_integral_from_dyadic<S: NormedSpace>(
    path: &PiecewiseAffineVectorPath<S>,
    n: usize,
) -> Result<S> {
    if n > path.depth() {
        return Err(Error::range(format!(
            "n = {n} is below the truncation depth {}",
            path.depth()
        )));
    }
    path.integral(pow2_neg(n), 1.0)
}
