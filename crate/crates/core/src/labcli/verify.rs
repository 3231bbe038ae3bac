//! The invariant suite run by `chasles-lab verify`.
//!
//! Every check is named and independent. The tent coefficient used by the
//! checks that sum `f` numerically can be perturbed through
//! [`VerifyOptions::peak_scale`], which is how the suite is mutation-tested.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::polyfun::{exp_partial, exp_remainder_sup, Polynomial, DEFAULT_SUP_TOL};
use crate::riemann::{chasles_check, riemann_sum, ExactIntegrals, TagRule, TaggedPartition};
use crate::tentmap::{
    block_index, block_integral, build_general_f, evaluate_f, evaluate_with, exact_integral,
    general_integral_from_dyadic, integral_from, pow2_neg, tent_breakpoints, tent_coefficient,
    DyadicBlock,
};
use crate::vecspace::{
    completion_distance, exp_series_point, extract_fast_cauchy, fast_gap_bound, norm_limit,
    CompletionPoint, NormedSpace,
};

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyOptions {
    /// Multiplier applied to every tent coefficient; `1.0` is the faithful map.
    pub peak_scale: f64,
    pub depth: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            peak_scale: 1.0,
            depth: crate::tentmap::DEFAULT_DEPTH,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

struct Ctx<'a> {
    opts: &'a VerifyOptions,
}

impl Ctx<'_> {
    fn f(&self, x: f64) -> Result<Polynomial> {
        let scale = self.opts.peak_scale;
        evaluate_with(x, |n, x| tent_coefficient(n, x).map(|c| c * scale))
    }

    fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.opts.seed)
    }
}

fn ensure(cond: bool, ok: impl Into<String>, bad: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(ok.into())
    } else {
        Err(bad())
    }
}

macro_rules! core {
    ($e:expr) => {
        $e.map_err(|e| e.to_string())?
    };
}

fn check_norm_limit_constant(_: &Ctx) -> Outcome {
    let v = Polynomial::from_coefficients(vec![0.5, -2.0, 1.0]);
    let got = core!(norm_limit(&CompletionPoint::constant(v.clone()), 1e-9));
    ensure(got == v.norm(), "exact", || format!("{got} != {}", v.norm()))
}

fn check_norm_limit_exp(_: &Ctx) -> Outcome {
    let got = core!(norm_limit(&exp_series_point(), 1e-6));
    let err = (got - std::f64::consts::E).abs();
    ensure(err <= 1e-6, format!("|err| = {err:.2e}"), || format!("|err| = {err:e}"))
}

fn check_completion_triangle(_: &Ctx) -> Outcome {
    let tol = 1e-8;
    let pts = [
        exp_series_point(),
        exp_series_point().scaled(-2.0),
        CompletionPoint::constant(Polynomial::monomial(3)),
    ];
    for p in &pts {
        for q in &pts {
            for r in &pts {
                let pr = core!(completion_distance(p, r, tol));
                let pq = core!(completion_distance(p, q, tol));
                let qr = core!(completion_distance(q, r, tol));
                if pr > pq + qr + 2.0 * tol {
                    return Err(format!("{pr} > {pq} + {qr}"));
                }
            }
        }
    }
    Ok("27 triples".into())
}

fn check_fast_extraction(_: &Ctx) -> Outcome {
    let w = core!(extract_fast_cauchy(&exp_series_point(), 12));
    for k in 2..=12 {
        let gap = w.point(k).distance(w.point(k - 1));
        if gap > fast_gap_bound(k) {
            return Err(format!("k = {k}: gap {gap:e}"));
        }
    }
    Ok(format!("indices {:?}", w.indices()))
}

fn check_monomial_norms(_: &Ctx) -> Outcome {
    for n in 0..=60 {
        let s = Polynomial::monomial(n).sup_norm(DEFAULT_SUP_TOL);
        if s.value != 1.0 {
            return Err(format!("||e_{n}|| = {}", s.value));
        }
    }
    Ok("n <= 60".into())
}

fn random_poly(rng: &mut ChaCha8Rng) -> Polynomial {
    let d = rng.gen_range(0..=12);
    Polynomial::from_coefficients((0..=d).map(|_| rng.gen_range(-5.0..5.0)).collect())
}

fn check_norm_axioms(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    for _ in 0..200 {
        let (p, q) = (random_poly(&mut rng), random_poly(&mut rng));
        let s: f64 = rng.gen_range(-4.0..4.0);
        let (np, nq) = (p.sup_norm(DEFAULT_SUP_TOL), q.sup_norm(DEFAULT_SUP_TOL));
        let npq = p.add(&q).sup_norm(DEFAULT_SUP_TOL);
        if npq.value > np.upper() + nq.upper() + 1e-12 {
            return Err(format!("triangle fails for {p} and {q}"));
        }
        let ns = p.scale(s).sup_norm(DEFAULT_SUP_TOL);
        if (ns.value - s.abs() * np.value).abs() > ns.radius + s.abs() * np.radius + 1e-12 {
            return Err(format!("homogeneity fails for {p}, s = {s}"));
        }
    }
    Ok("200 random pairs".into())
}

fn check_nonnegative_sup(_: &Ctx) -> Outcome {
    for n in 0..=40 {
        let p = core!(exp_partial(n));
        let s = p.sup_norm(DEFAULT_SUP_TOL).value;
        if (s - p.eval(1.0)).abs() > DEFAULT_SUP_TOL {
            return Err(format!("n = {n}"));
        }
    }
    Ok("exp partial sums n <= 40".into())
}

fn check_remainder_decreasing(_: &Ctx) -> Outcome {
    let r = (0..=170)
        .map(exp_remainder_sup)
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.to_string())?;
    ensure(r.windows(2).all(|w| w[1] < w[0]), "n <= 170", || {
        "remainder not strictly decreasing".into()
    })
}

fn check_block_lookup(_: &Ctx) -> Outcome {
    for n in 0..=1000 {
        let b = core!(DyadicBlock::new(n));
        let inside = core!(block_index(b.peak()));
        let at_top = core!(block_index(b.upper()));
        if inside != n || at_top != n {
            return Err(format!("block {n}: {inside}, {at_top}"));
        }
    }
    Ok("blocks 0..=1000".into())
}

fn check_peak_values(ctx: &Ctx) -> Outcome {
    for n in 0..=170usize {
        let direct = 2f64.powi(n as i32 + 2) / (1..=n).map(|i| i as f64).product::<f64>();
        let b = core!(DyadicBlock::new(n));
        let got = core!(ctx.f(b.peak())).norm();
        if (got - direct).abs() > 1e-12 * direct {
            return Err(format!("n = {n}: {got} vs {direct}"));
        }
    }
    Ok("2^(n+2)/n! for n <= 170".into())
}

fn check_continuity_at_zero(ctx: &Ctx) -> Outcome {
    for n in 10..=200 {
        let b = core!(DyadicBlock::new(n));
        let peak = core!(ctx.f(b.peak())).norm();
        if peak >= 0.005 {
            return Err(format!("peak on I_{n} is {peak}"));
        }
    }
    Ok("peaks < 0.005 for n >= 10".into())
}

fn check_oddness(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    for _ in 0..10_000 {
        let x: f64 = rng.gen_range(-1.0..=1.0);
        let s = core!(evaluate_f(x)).add(&core!(evaluate_f(-x)));
        if !s.is_zero() {
            return Err(format!("f({x}) + f(-{x}) = {s}"));
        }
    }
    Ok("10^4 samples".into())
}

fn check_block_integrals(ctx: &Ctx) -> Outcome {
    for n in 0..=20 {
        let b = core!(DyadicBlock::new(n));
        let coarse = core!(TaggedPartition::new(
            vec![b.lower(), b.peak(), b.upper()],
            vec![b.lower(), b.upper()]
        ));
        let p = core!(coarse.refine(8, TagRule::Midpoint));
        let sum = core!(riemann_sum(&|x| ctx.f(x), &p));
        let gap = sum.max_coefficient_gap(&core!(block_integral(n)));
        if gap > 1e-15 {
            return Err(format!("I_{n}: coefficient gap {gap:e}"));
        }
    }
    Ok("n <= 20 within 1e-15".into())
}

fn check_partial_integrals(_: &Ctx) -> Outcome {
    for n in 0..=20 {
        let got = core!(integral_from(pow2_neg(n + 1)));
        let want = core!(exp_partial(n));
        let same_bits = got.coefficients().len() == want.coefficients().len()
            && got
                .coefficients()
                .iter()
                .zip(want.coefficients())
                .all(|(a, b)| a.to_bits() == b.to_bits());
        if !same_bits {
            return Err(format!("n = {n}"));
        }
    }
    Ok("bitwise for n <= 20".into())
}

fn check_degree_growth(_: &Ctx) -> Outcome {
    for n in 0..=20usize {
        let p = core!(integral_from(pow2_neg(n + 1)));
        if p.degree() != n as isize {
            return Err(format!("degree {} at n = {n}", p.degree()));
        }
        if n > 0 {
            let prev = core!(integral_from(pow2_neg(n)));
            let gap = p.distance(&prev);
            let want = core!(crate::polyfun::inv_factorial(n));
            if (gap - want).abs() > 1e-15 {
                return Err(format!("gap {gap} vs 1/{n}!"));
            }
        }
    }
    Ok("degrees 0..=20, gaps 1/n!".into())
}

fn check_interval_additivity(ctx: &Ctx) -> Outcome {
    let mut rng = ctx.rng();
    for _ in 0..300 {
        let u: f64 = rng.gen_range(1e-5..=1.0);
        let v: f64 = rng.gen_range(1e-5..=1.0);
        if u == v {
            continue;
        }
        let (a, c) = (u.min(v), u.max(v));
        let pts = core!(tent_breakpoints(a, c));
        let p = core!(TaggedPartition::from_breakpoints(pts, TagRule::Midpoint));
        let piece = core!(riemann_sum(&|x| ctx.f(x), &p));
        let gap = core!(integral_from(a)).max_coefficient_gap(&piece.add(&core!(integral_from(c))));
        if gap > 1e-14 {
            return Err(format!("[{a}, {c}]: gap {gap:e}"));
        }
    }
    Ok("300 random splits".into())
}

fn check_general_integrals(ctx: &Ctx) -> Outcome {
    let depth = ctx.opts.depth;
    let w = core!(extract_fast_cauchy(&exp_series_point(), depth));
    let path = core!(build_general_f(&w, depth));
    for n in 1..=depth {
        let got = core!(general_integral_from_dyadic(&path, n));
        let err = got.distance(w.point(n));
        if err > 1e-12 * w.point(n).norm() {
            return Err(format!("n = {n}: error {err:e}"));
        }
    }
    Ok(format!("n <= {depth}"))
}

fn check_general_block_bound(ctx: &Ctx) -> Outcome {
    let depth = ctx.opts.depth;
    let w = core!(extract_fast_cauchy(&exp_series_point(), depth));
    let path = core!(build_general_f(&w, depth));
    for n in 2..=depth {
        let peak = core!(path.evaluate(3.0 * pow2_neg(n + 1))).norm();
        if peak > 2f64.powi(1 - n as i32) {
            return Err(format!("block {n}: {peak}"));
        }
    }
    Ok(format!("blocks 2..={depth}"))
}

fn affine(x: f64) -> Result<Polynomial> {
    Ok(Polynomial::monomial(1).scale(x))
}

fn check_lemma(_: &Ctx) -> Outcome {
    let e = Polynomial::monomial(1);
    for m in 0..=16 {
        let n = 1usize << m;
        let p = core!(TaggedPartition::regular(0.0, 1.0, n, TagRule::Right));
        let s = core!(riemann_sum(&affine, &p));
        let gap = s.max_coefficient_gap(&e.scale((n + 1) as f64 / (2 * n) as f64));
        if gap > 1e-15 {
            return Err(format!("N = {n}: {gap:e}"));
        }
    }
    Ok("N = 1 .. 2^16".into())
}

fn check_symmetric_cancellation(ctx: &Ctx) -> Outcome {
    for n in (2..=512).step_by(2) {
        let p = core!(TaggedPartition::regular(-1.0, 1.0, n, TagRule::Midpoint));
        let s = core!(riemann_sum(&|x| ctx.f(x), &p));
        if !s.is_zero() {
            return Err(format!("N = {n}: {s}"));
        }
    }
    Ok("even N <= 512".into())
}

fn check_tag_sandwich(_: &Ctx) -> Outcome {
    let path = |x: f64| Ok(x.powi(3) + x);
    for n in 1..=64 {
        let sum = |rule| -> std::result::Result<f64, String> {
            let p = TaggedPartition::regular(-1.0, 2.0, n, rule).map_err(|e| e.to_string())?;
            riemann_sum(&path, &p).map_err(|e| e.to_string())
        };
        let (l, m, r) = (sum(TagRule::Left)?, sum(TagRule::Midpoint)?, sum(TagRule::Right)?);
        if !(l <= m && m <= r) {
            return Err(format!("N = {n}: {l}, {m}, {r}"));
        }
    }
    Ok("N <= 64".into())
}

fn check_determinism(ctx: &Ctx) -> Outcome {
    let rule = TagRule::Random(ctx.opts.seed);
    let p = core!(TaggedPartition::regular(-1.0, 1.0, 5000, rule));
    let q = core!(TaggedPartition::regular(-1.0, 1.0, 5000, rule));
    let a = core!(riemann_sum(&evaluate_f, &p));
    let b = core!(riemann_sum(&evaluate_f, &q));
    let bits = |s: &Polynomial| s.coefficients().iter().map(|c| c.to_bits()).collect::<Vec<_>>();
    ensure(bits(&a) == bits(&b), "bitwise", || "sums differ".into())
}

fn check_scaling(_: &Ctx) -> Outcome {
    let p = core!(TaggedPartition::regular(0.0, 1.0, 1000, TagRule::Midpoint));
    for s in [-3.0, 0.5, 7.25] {
        let scaled = |x: f64| evaluate_f(x).map(|v| v.scale(s));
        let lhs = core!(riemann_sum(&scaled, &p));
        let rhs = core!(riemann_sum(&evaluate_f, &p)).scale(s);
        let gap = lhs.max_coefficient_gap(&rhs);
        if gap > 1e-14 * s.abs() {
            return Err(format!("s = {s}: {gap:e}"));
        }
    }
    Ok("3 scalars".into())
}

fn check_convergence_to_exp(ctx: &Ctx) -> Outcome {
    let reference = core!(exp_partial(40));
    let mut prev = f64::INFINITY;
    for m in 4..=12 {
        let p = core!(TaggedPartition::regular(0.0, 1.0, 1 << m, TagRule::Midpoint));
        let d = core!(riemann_sum(&|x| ctx.f(x), &p)).distance(&reference);
        if d > prev {
            return Err(format!("distance rose at 2^{m}: {d}"));
        }
        prev = d;
    }
    ensure(prev < 1e-2, format!("final distance {prev:.3e}"), || {
        format!("final distance {prev}")
    })
}

fn check_chasles_inner(ctx: &Ctx) -> Outcome {
    let exact = ExactIntegrals {
        left: core!(exact_integral(0.25, 0.5)),
        right: core!(exact_integral(0.5, 1.0)),
        total: core!(exact_integral(0.25, 1.0)),
    };
    let r = core!(chasles_check(
        &|x| ctx.f(x),
        0.25,
        0.5,
        1.0,
        1 << 10,
        TagRule::Midpoint,
        1e-3,
        &exact
    ));
    let worst = r
        .left_dist_exact
        .unwrap_or(f64::INFINITY)
        .max(r.right_dist_exact.unwrap_or(f64::INFINITY));
    ensure(
        r.additive && worst <= 1e-3,
        format!("discrepancy {:.2e}", r.discrepancy),
        || format!("discrepancy {}, piece error {worst}", r.discrepancy),
    )
}

fn check_chasles_across_zero(ctx: &Ctx) -> Outcome {
    let mut last_degree = -2;
    for m in 1..=10 {
        let r = core!(chasles_check(
            &|x| ctx.f(x),
            -1.0,
            0.0,
            1.0,
            1 << m,
            TagRule::Midpoint,
            1e-9,
            &ExactIntegrals::default()
        ));
        if !r.total.is_zero() {
            return Err(format!("total at N = 2^{m} is {}", r.total));
        }
        let d = r.right.degree();
        if d <= last_degree || r.left.degree() != d {
            return Err(format!("degrees stalled at N = 2^{m}"));
        }
        last_degree = d;
    }
    Ok(format!("total θ, half degree reaches {last_degree}"))
}

type CheckFn = fn(&Ctx) -> Outcome;

const CHECKS: &[(&str, CheckFn)] = &[
    ("vecspace.norm_limit_constant", check_norm_limit_constant),
    ("vecspace.norm_limit_exp", check_norm_limit_exp),
    ("vecspace.completion_triangle", check_completion_triangle),
    ("vecspace.fast_cauchy_gaps", check_fast_extraction),
    ("polyfun.monomial_sup_norm", check_monomial_norms),
    ("polyfun.norm_axioms", check_norm_axioms),
    ("polyfun.nonnegative_sup_at_one", check_nonnegative_sup),
    ("polyfun.remainder_decreasing", check_remainder_decreasing),
    ("tentmap.block_lookup", check_block_lookup),
    ("tentmap.peak_values", check_peak_values),
    ("tentmap.continuity_at_zero", check_continuity_at_zero),
    ("tentmap.oddness", check_oddness),
    ("tentmap.block_integrals", check_block_integrals),
    ("tentmap.partial_integrals", check_partial_integrals),
    ("tentmap.degree_growth", check_degree_growth),
    ("tentmap.interval_additivity", check_interval_additivity),
    ("tentmap.general_integrals", check_general_integrals),
    ("tentmap.general_block_bound", check_general_block_bound),
    ("riemann.lemma_right_tags", check_lemma),
    ("riemann.symmetric_cancellation", check_symmetric_cancellation),
    ("riemann.tag_rule_sandwich", check_tag_sandwich),
    ("riemann.determinism", check_determinism),
    ("riemann.scaling_equivariance", check_scaling),
    ("riemann.convergence_to_exp", check_convergence_to_exp),
    ("riemann.chasles_inner", check_chasles_inner),
    ("riemann.chasles_across_zero", check_chasles_across_zero),
];

pub fn check_names() -> Vec<&'static str> {
    CHECKS.iter().map(|(name, _)| *name).collect()
}

pub fn run_suite(opts: &VerifyOptions) -> Vec<CheckResult> {
    let ctx = Ctx { opts };
    CHECKS
        .iter()
        .map(|(name, check)| {
            let (passed, detail) = match check(&ctx) {
                Ok(d) => (true, d),
                Err(d) => (false, d),
            };
            CheckResult {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

/// Fixed-width pass/fail table.
pub fn render_table(results: &[CheckResult]) -> String {
    let width = results.iter().map(|r| r.name.len()).max().unwrap_or(0);
    let mut out = String::new();
    for r in results {
        let status = if r.passed { "PASS" } else { "FAIL" };
        let _ = writeln!(out, "{status}  {:width$}  {}", r.name, r.detail);
    }
    let passed = results.iter().filter(|r| r.passed).count();
    let _ = writeln!(out, "{passed}/{} checks passed", results.len());
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clean_suite_passes() {
        let results = run_suite(&VerifyOptions::default());
        assert!(results.len() >= 20);
        let failed: Vec<_> = results.iter().filter(|r| !r.passed).collect();
        assert!(failed.is_empty(), "{}", render_table(&results));
    }

    #[test]
    fn peak_fault_is_caught() {
        let results = run_suite(&VerifyOptions {
            peak_scale: 1.01,
            ..Default::default()
        });
        let block = results
            .iter()
            .find(|r| r.name == "tentmap.block_integrals")
            .unwrap();
        assert!(!block.passed);
    }
}
