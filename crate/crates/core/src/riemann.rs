//! Tagged partitions and vector-valued Riemann sums.
//!
//! Sums are reduced with a fixed mirror-symmetric pairwise tree: the tree
//! for a reversed term list is the mirror image of the original, so a sum
//! whose terms are antisymmetric (`t_{k+1-i} = -t_i`) cancels to exactly
//! zero. Terms are evaluated in parallel; the reduction order does not
//! depend on scheduling.

use std::fmt;
use std::io;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::vecspace::NormedSpace;

const PARALLEL_REDUCE_MIN: usize = 4096;

/// How each subinterval picks its tag.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TagRule {
    Left,
    Right,
    Midpoint,
    /// Uniform tags drawn from a ChaCha8 stream with this seed.
    Random(u64),
}

impl TagRule {
    /// Parses `left`, `right`, `midpoint` or `random`; `random` takes `seed`.
    pub fn parse_with_seed(name: &str, seed: u64) -> Result<Self> {
        match name {
            "left" => Ok(TagRule::Left),
            "right" => Ok(TagRule::Right),
            "midpoint" | "mid" => Ok(TagRule::Midpoint),
            "random" => Ok(TagRule::Random(seed)),
            other => Err(Error::domain(format!("unknown tag rule {other:?}"))),
        }
    }
}

impl FromStr for TagRule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TagRule::parse_with_seed(s, 0)
    }
}

impl fmt::Display for TagRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TagRule::Left => f.write_str("left"),
            TagRule::Right => f.write_str("right"),
            TagRule::Midpoint => f.write_str("midpoint"),
            TagRule::Random(seed) => write!(f, "random({seed})"),
        }
    }
}

/// `n + 1` equally spaced points from `a` to `b`, endpoints exact.
///
/// Interior points are `(a (n - i) + b i) / n`, which is exactly
/// antisymmetric when `a = -b`.
pub fn uniform_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    let nf = n as f64;
    (0..=n)
        .map(|i| match i {
            0 => a,
            _ if i == n => b,
            _ => (a * (n - i) as f64 + b * i as f64) / nf,
        })
        .collect()
}

/// Breakpoints `a = t_0 < ... < t_k = b` with one tag per subinterval.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedPartition {
    breakpoints: Vec<f64>,
    tags: Vec<f64>,
}

impl TaggedPartition {
    pub fn new(breakpoints: Vec<f64>, tags: Vec<f64>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::domain("a partition needs at least two breakpoints"));
        }
        if tags.len() != breakpoints.len() - 1 {
            return Err(Error::domain(format!(
                "{} tags for {} subintervals",
                tags.len(),
                breakpoints.len() - 1
            )));
        }
        if breakpoints.iter().any(|t| !t.is_finite()) {
            return Err(Error::domain("breakpoints must be finite"));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| !(w[0] < w[1])) {
            return Err(Error::domain(format!(
                "breakpoints not strictly increasing at {} -> {}",
                w[0], w[1]
            )));
        }
        for (i, &tag) in tags.iter().enumerate() {
            if !(breakpoints[i] <= tag && tag <= breakpoints[i + 1]) {
                return Err(Error::domain(format!(
                    "tag {tag} outside [{}, {}]",
                    breakpoints[i],
                    breakpoints[i + 1]
                )));
            }
        }
        Ok(TaggedPartition { breakpoints, tags })
    }

    /// Tags the given breakpoints according to `rule`.
    pub fn from_breakpoints(breakpoints: Vec<f64>, rule: TagRule) -> Result<Self> {
        let tags = match rule {
            TagRule::Left => breakpoints.windows(2).map(|w| w[0]).collect(),
            TagRule::Right => breakpoints.windows(2).map(|w| w[1]).collect(),
            TagRule::Midpoint => breakpoints.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect(),
            TagRule::Random(seed) => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                breakpoints
                    .windows(2)
                    .map(|w| {
                        let u: f64 = rng.gen();
                        (w[0] + u * (w[1] - w[0])).min(w[1])
                    })
                    .collect()
            }
        };
        TaggedPartition::new(breakpoints, tags)
    }

    /// `n` equal subintervals of `[a, b]`, breakpoints from [`uniform_grid`].
    pub fn regular(a: f64, b: f64, n: usize, rule: TagRule) -> Result<Self> {
        if !(a < b) {
            return Err(Error::domain(format!("need a < b, got [{a}, {b}]")));
        }
        if n == 0 {
            return Err(Error::domain("a regular partition needs N >= 1"));
        }
        TaggedPartition::from_breakpoints(uniform_grid(a, b, n), rule)
    }

    /// Splits every subinterval into `per_cell` equal pieces, re-tagged by `rule`.
    pub fn refine(&self, per_cell: usize, rule: TagRule) -> Result<Self> {
        if per_cell == 0 {
            return Err(Error::domain("refinement factor must be at least 1"));
        }
        let mut pts = Vec::with_capacity(self.len() * per_cell + 1);
        for w in self.breakpoints.windows(2) {
            for j in 0..per_cell {
                pts.push(if j == 0 {
                    w[0]
                } else {
                    (w[0] * (per_cell - j) as f64 + w[1] * j as f64) / per_cell as f64
                });
            }
        }
        pts.push(self.end());
        TaggedPartition::from_breakpoints(pts, rule)
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn tags(&self) -> &[f64] {
        &self.tags
    }

    /// Number of subintervals.
    pub fn len(&self) -> usize {
        self.tags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tags.is_empty()
    }

    pub fn start(&self) -> f64 {
        self.breakpoints[0]
    }

    pub fn end(&self) -> f64 {
        self.breakpoints[self.breakpoints.len() - 1]
    }

    pub fn widths(&self) -> impl Iterator<Item = f64> + '_ {
        self.breakpoints.windows(2).map(|w| w[1] - w[0])
    }

    pub fn mesh(&self) -> f64 {
        self.widths().fold(0.0, f64::max)
    }
}

/// Mirror-symmetric pairwise sum; see the module docs.
pub fn mirror_sum<S: NormedSpace>(terms: &[S]) -> S {
    match terms.len() {
        0 => S::zero(),
        1 => terms[0].clone(),
        len => {
            let half = len / 2;
            let (left, right) = (&terms[..half], &terms[len - half..]);
            let (l, r) = if len >= PARALLEL_REDUCE_MIN {
                rayon::join(|| mirror_sum(left), || mirror_sum(right))
            } else {
                (mirror_sum(left), mirror_sum(right))
            };
            let outer = l.add(&r);
            if len % 2 == 1 {
                outer.add(&terms[half])
            } else {
                outer
            }
        }
    }
}

/// `sum_i (t_i - t_{i-1}) * path(tag_i)`.
pub fn riemann_sum<S, F>(path: &F, partition: &TaggedPartition) -> Result<S>
where
    S: NormedSpace,
    F: Fn(f64) -> Result<S> + Sync,
{
    let bp = partition.breakpoints();
    let terms: Vec<Result<S>> = partition
        .tags()
        .par_iter()
        .enumerate()
        .with_min_len(256)
        .map(|(i, &tag)| path(tag).map(|v| v.scale(bp[i + 1] - bp[i])))
        .collect();
    let terms = terms.into_iter().collect::<Result<Vec<S>>>()?;
    Ok(mirror_sum(&terms))
}

/// Outcome of a refinement run. Never a claim that a limit exists in the space.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    CauchyWithinTolerance,
    BudgetExhausted,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::CauchyWithinTolerance => "cauchy-within-tolerance",
            Verdict::BudgetExhausted => "budget-exhausted",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub sum_norm: f64,
    pub gap_prev: Option<f64>,
    pub dist_ref: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    pub tol: f64,
    pub verdict: Verdict,
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl ConvergenceReport {
    /// Builds the report from sums already computed along `schedule`.
    pub fn from_sums<S: NormedSpace>(
        schedule: &[usize],
        sums: &[S],
        reference: Option<&S>,
        tol: f64,
    ) -> Self {
        let mut rows = Vec::with_capacity(sums.len());
        for (i, (n, s)) in schedule.iter().zip(sums).enumerate() {
            rows.push(ConvergenceRow {
                n: *n,
                sum_norm: s.norm(),
                gap_prev: (i > 0).then(|| s.distance(&sums[i - 1])),
                dist_ref: reference.map(|r| s.distance(r)),
            });
        }
        let verdict = match rows.last().and_then(|r| r.gap_prev) {
            Some(gap) if gap <= tol => Verdict::CauchyWithinTolerance,
            _ => Verdict::BudgetExhausted,
        };
        ConvergenceReport { rows, tol, verdict }
    }

    /// CSV with header `N,sum_norm,gap_prev,dist_ref`; missing values are empty.
    pub fn write_csv<W: io::Write>(&self, out: W) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["N", "sum_norm", "gap_prev", "dist_ref"])?;
        for r in &self.rows {
            w.write_record([
                r.n.to_string(),
                r.sum_norm.to_string(),
                fmt_opt(r.gap_prev),
                fmt_opt(r.dist_ref),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn check_schedule(schedule: &[usize]) -> Result<()> {
    if schedule.is_empty() {
        return Err(Error::domain("schedule is empty"));
    }
    if schedule.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::domain("schedule must be strictly increasing"));
    }
    Ok(())
}

/// Regular Riemann sums of `path` over `[a, b]` at every resolution in `schedule`.
pub fn sums_along<S, F>(path: &F, a: f64, b: f64, rule: TagRule, schedule: &[usize]) -> Result<Vec<S>>
where
    S: NormedSpace,
    F: Fn(f64) -> Result<S> + Sync,
{
    check_schedule(schedule)?;
    schedule
        .iter()
        .map(|&n| riemann_sum(path, &TaggedPartition::regular(a, b, n, rule)?))
        .collect()
}

/// Runs regular sums along `schedule` and reports norms, consecutive gaps and,
/// when given, the distance to `reference`. The verdict is Cauchy when the
/// last consecutive gap is within `tol`.
pub fn refine_until_cauchy<S, F>(
    path: &F,
    a: f64,
    b: f64,
    rule: TagRule,
    tol: f64,
    schedule: &[usize],
    reference: Option<&S>,
) -> Result<ConvergenceReport>
where
    S: NormedSpace,
    F: Fn(f64) -> Result<S> + Sync,
{
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let sums = sums_along(path, a, b, rule, schedule)?;
    Ok(ConvergenceReport::from_sums(schedule, &sums, reference, tol))
}

/// Known integrals over `[a, c]`, `[c, b]` and `[a, b]`, where available.
#[derive(Clone, Debug, PartialEq)]
pub struct ExactIntegrals<S> {
    pub left: Option<S>,
    pub right: Option<S>,
    pub total: Option<S>,
}

impl<S> Default for ExactIntegrals<S> {
    fn default() -> Self {
        ExactIntegrals {
            left: None,
            right: None,
            total: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaslesReport<S> {
    pub n: usize,
    /// Sum over `[a, b]` at resolution `2N`.
    pub total: S,
    /// Sum over `[a, c]` at resolution `N`.
    pub left: S,
    /// Sum over `[c, b]` at resolution `N`.
    pub right: S,
    /// `||total - (left + right)||`.
    pub discrepancy: f64,
    pub additive: bool,
    pub left_dist_exact: Option<f64>,
    pub right_dist_exact: Option<f64>,
    pub total_dist_exact: Option<f64>,
}

/// Compares the sum over `[a, b]` (resolution `2N`) with the sums over `[a, c]`
/// and `[c, b]` (resolution `N` each).
#[allow(clippy::too_many_arguments)]
pub fn chasles_check<S, F>(
    path: &F,
    a: f64,
    c: f64,
    b: f64,
    n: usize,
    rule: TagRule,
    tol: f64,
    exact: &ExactIntegrals<S>,
) -> Result<ChaslesReport<S>>
where
    S: NormedSpace,
    F: Fn(f64) -> Result<S> + Sync,
{
    if !(a < c && c < b) {
        return Err(Error::domain(format!("need a < c < b, got {a}, {c}, {b}")));
    }
    if !(tol > 0.0) {
        return Err(Error::domain(format!("tolerance must be positive, got {tol}")));
    }
    let total = riemann_sum(path, &TaggedPartition::regular(a, b, 2 * n, rule)?)?;
    let left = riemann_sum(path, &TaggedPartition::regular(a, c, n, rule)?)?;
    let right = riemann_sum(path, &TaggedPartition::regular(c, b, n, rule)?)?;
    let discrepancy = total.distance(&left.add(&right));
    let dist = |sum: &S, exact: &Option<S>| exact.as_ref().map(|e| sum.distance(e));
    Ok(ChaslesReport {
        n,
        discrepancy,
        additive: discrepancy <= tol,
        left_dist_exact: dist(&left, &exact.left),
        right_dist_exact: dist(&right, &exact.right),
        total_dist_exact: dist(&total, &exact.total),
        total,
        left,
        right,
    })
}
