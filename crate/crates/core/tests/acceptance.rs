//! End-to-end acceptance run. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any criterion fails.

use std::fs;
use std::path::Path;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use chasles_core::labcli::{cmd_chasles, cmd_converge, cmd_frames, cmd_surface, ExperimentConfig};
use chasles_core::polyfun::{exp_partial, Polynomial, DEFAULT_SUP_TOL};
use chasles_core::riemann::{riemann_sum, TagRule, TaggedPartition};
use chasles_core::tentmap::{
    block_integral, build_general_f, evaluate_f, general_integral_from_dyadic, integral_from,
    pow2_neg, DyadicBlock,
};
use chasles_core::vecspace::{exp_series_point, extract_fast_cauchy, fast_gap_bound};
use chasles_core::NormedSpace;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn within(limit: Duration, start: Instant) -> Result<Duration, String> {
    let took = start.elapsed();
    if took < limit {
        Ok(took)
    } else {
        Err(format!("took {took:?}, limit {limit:?}"))
    }
}

fn s<T, E: std::fmt::Display>(r: Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn inv_fact(n: usize) -> f64 {
    1.0 / (1..=n).map(|k| k as f64).product::<f64>()
}

/// Textbook tent value on the positive half, kept separate from the library.
fn oracle_f(x: f64) -> Vec<f64> {
    let mut n = 0usize;
    while x < 0.5f64.powi(n as i32 + 1) {
        n += 1;
    }
    let lo = 0.5f64.powi(n as i32 + 1);
    let hi = 2.0 * lo;
    let peak = 3.0 * lo / 2.0;
    let height = 2f64.powi(n as i32 + 2) * inv_fact(n);
    let c = if x <= peak {
        height * (x - lo) / (peak - lo)
    } else {
        height * (hi - x) / (hi - peak)
    };
    let mut v = vec![0.0; n + 1];
    v[n] = c;
    v
}

fn c1_lemma() -> Outcome {
    let start = Instant::now();
    let e = Polynomial::monomial(1);
    let path = |x: f64| Ok(e.scale(x));
    let mut worst = 0.0f64;
    for m in 0..=16 {
        let n = 1usize << m;
        let p = s(TaggedPartition::regular(0.0, 1.0, n, TagRule::Right))?;
        let sum = s(riemann_sum(&path, &p))?;
        let want = (n + 1) as f64 / (2 * n) as f64;
        let gap = (0..=1).map(|k| (sum.coefficient(k) - [0.0, want][k]).abs()).fold(0.0, f64::max);
        worst = worst.max(gap);
    }
    let took = within(Duration::from_secs(1), start)?;
    check(worst <= 1e-15, format!("max coefficient error {worst:.1e}, {took:.2?}"))
}

fn c2_block_integrals() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for n in 0..=20 {
        let b = s(DyadicBlock::new(n))?;
        let coarse = s(TaggedPartition::new(
            vec![b.lower(), b.peak(), b.upper()],
            vec![b.lower(), b.upper()],
        ))?;
        let p = s(coarse.refine(16, TagRule::Midpoint))?;
        let numeric: Polynomial = s(riemann_sum(&evaluate_f, &p))?;
        let closed = s(block_integral(n))?;
        let mut e = vec![0.0; n + 1];
        e[n] = inv_fact(n);
        let oracle = Polynomial::from_coefficients(e);
        worst = worst
            .max(numeric.max_coefficient_gap(&closed))
            .max(closed.max_coefficient_gap(&oracle));
    }
    let took = within(Duration::from_secs(1), start)?;
    check(worst <= 1e-15, format!("max coefficient error {worst:.1e}, {took:.2?}"))
}

fn c3_partial_integrals() -> Outcome {
    for n in 0..=20 {
        let got = s(integral_from(pow2_neg(n + 1)))?;
        let want = s(exp_partial(n))?;
        let bits = |p: &Polynomial| p.coefficients().iter().map(|c| c.to_bits()).collect::<Vec<_>>();
        if bits(&got) != bits(&want) {
            return Err(format!("n = {n}: {got} vs {want}"));
        }
        let oracle_gap = (0..=n).map(|k| (got.coefficient(k) - inv_fact(k)).abs()).fold(0.0, f64::max);
        if oracle_gap > 1e-15 {
            return Err(format!("n = {n}: off 1/k! by {oracle_gap:e}"));
        }
    }
    Ok("bitwise equal for n <= 20".into())
}

fn c4_convergence() -> Outcome {
    let start = Instant::now();
    let dir = s(tempfile::tempdir())?;
    let cfg = ExperimentConfig {
        schedule: (8..=14).map(|m| 1usize << m).collect(),
        ..Default::default()
    };
    let report = s(cmd_converge(&cfg, &dir.path().join("c.csv")))?;
    let dists: Vec<f64> = report.rows.iter().map(|r| r.dist_ref.unwrap()).collect();
    if dists.windows(2).any(|w| w[1] > w[0]) {
        return Err(format!("distance column rises: {dists:?}"));
    }
    let d14 = *dists.last().unwrap();

    // Independent run at N = 2^18 with its own tent formula and a plain fold.
    let n = 1usize << 18;
    let h = 1.0 / n as f64;
    let mut acc = vec![0.0f64; 24];
    for i in 0..n {
        let x = (i as f64 + 0.5) * h;
        for (k, c) in oracle_f(x).into_iter().enumerate() {
            acc[k] += h * c;
        }
    }
    let oracle = Polynomial::from_coefficients(acc);
    let sigma14 = s(riemann_sum(&evaluate_f, &s(TaggedPartition::regular(0.0, 1.0, 1 << 14, TagRule::Midpoint))?))?;
    let measured = sigma14.sub(&oracle).sup_norm(DEFAULT_SUP_TOL).value;
    let took = within(Duration::from_secs(60), start)?;
    check(
        d14 <= 1.5 * measured,
        format!("d(2^14) = {d14:.3e}, oracle-measured {measured:.3e}, ratio {:.3}, {took:.2?}", d14 / measured),
    )
}

fn c5_symmetric_zero() -> Outcome {
    for n in (2..=1usize << 14).step_by(2) {
        let p = s(TaggedPartition::regular(-1.0, 1.0, n, TagRule::Midpoint))?;
        let sum: Polynomial = s(riemann_sum(&evaluate_f, &p))?;
        if !sum.coefficients().iter().all(|&c| c == 0.0) {
            return Err(format!("N = {n}: {sum}"));
        }
    }
    Ok("θ for every even N <= 2^14".into())
}

fn c6_non_membership() -> Outcome {
    let mut prev: Option<Polynomial> = None;
    for n in 0..=20usize {
        let p = s(integral_from(pow2_neg(n + 1)))?;
        if p.degree() != n as isize {
            return Err(format!("degree {} at n = {n}", p.degree()));
        }
        if let Some(q) = &prev {
            let gap = p.distance(q);
            if (gap - inv_fact(n)).abs() > 1e-15 {
                return Err(format!("gap {gap:e} vs 1/{n}!"));
            }
        }
        prev = Some(p);
    }
    Ok("degree n and gap 1/n! for n <= 20".into())
}

fn c7_general() -> Outcome {
    let depth = 12;
    let w = s(extract_fast_cauchy(&exp_series_point(), depth))?;
    for k in 2..=depth {
        let gap = w.point(k).distance(w.point(k - 1));
        if gap > fast_gap_bound(k) {
            return Err(format!("witness gap {gap:e} at k = {k}"));
        }
    }
    let path = s(build_general_f(&w, depth))?;
    let mut worst_rel = 0.0f64;
    let mut worst_peak = 0.0f64;
    for n in 1..=depth {
        let got = s(general_integral_from_dyadic(&path, n))?;
        worst_rel = worst_rel.max(got.distance(w.point(n)) / w.point(n).norm());
        if n >= 2 {
            let peak = s(path.evaluate(3.0 * pow2_neg(n + 1)))?.norm();
            worst_peak = worst_peak.max(peak / 2f64.powi(1 - n as i32));
        }
    }
    check(
        worst_rel <= 1e-12 && worst_peak <= 1.0,
        format!("relative error {worst_rel:.1e}, max peak / 2^(1-n) = {worst_peak:.3}, indices {:?}", w.indices()),
    )
}

fn c8_continuity() -> Outcome {
    let mut worst_rel = 0.0f64;
    for n in 0..=170usize {
        let b = s(DyadicBlock::new(n))?;
        let measured = s(evaluate_f(b.peak()))?.sup_norm(DEFAULT_SUP_TOL).value;
        let want = 2f64.powi(n as i32 + 2) * inv_fact(n);
        worst_rel = worst_rel.max((measured - want).abs() / want);
        for j in 0..=32 {
            let x = b.lower() + (b.upper() - b.lower()) * j as f64 / 32.0;
            if s(evaluate_f(x))?.norm() > want * (1.0 + 1e-12) {
                return Err(format!("||f({x})|| exceeds peak on I_{n}"));
            }
        }
    }
    let mut max_tail = 0.0f64;
    for n in 10..=1000usize {
        let b = s(DyadicBlock::new(n))?;
        max_tail = max_tail.max(s(evaluate_f(b.peak()))?.norm());
    }
    check(
        worst_rel <= 1e-12 && max_tail < 0.005,
        format!("peak relative error {worst_rel:.1e}, max peak for n >= 10 is {max_tail:.3e}"),
    )
}

fn c9_chasles() -> Outcome {
    let dir = s(tempfile::tempdir())?;
    let inner = ExperimentConfig {
        a: 0.25,
        c: 0.5,
        b: 1.0,
        n: 1 << 12,
        ..Default::default()
    };
    let r = s(cmd_chasles(&inner, &dir.path().join("inner.csv")))?;
    let last = r.last();
    let e0 = Polynomial::monomial(0);
    let e1 = Polynomial::monomial(1);
    let (dl, dr) = (r.left.distance(&e1), r.right.distance(&e0));
    if !(last.discrepancy <= 1e-3 && dl <= 1e-3 && dr <= 1e-3) {
        return Err(format!("discrepancy {:e}, pieces {dl:e} {dr:e}", last.discrepancy));
    }

    let across = ExperimentConfig {
        a: -1.0,
        c: 0.0,
        b: 1.0,
        n: 1 << 12,
        ..Default::default()
    };
    let x = s(cmd_chasles(&across, &dir.path().join("across.csv")))?;
    if !x.total.is_zero() || x.rows.iter().any(|row| row.total_degree != -1) {
        return Err(format!("total over [-1, 1] is {}", x.total));
    }
    let degrees: Vec<isize> = x.rows.iter().map(|row| row.right_degree).collect();
    let left_match = x.rows.iter().all(|row| row.left_degree == row.right_degree);
    check(
        left_match && degrees.windows(2).all(|w| w[1] > w[0]),
        format!("inner discrepancy {:.1e}, pieces {dl:.1e}/{dr:.1e}; across-zero total θ, half degrees {degrees:?}", last.discrepancy),
    )
}

fn read_dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

fn c10_determinism() -> Outcome {
    let dir = s(tempfile::tempdir())?;
    let cfg = ExperimentConfig {
        xres: 100,
        tres: 50,
        schedule: vec![2, 8, 32, 128],
        tags: "random".into(),
        seed: 7,
        ..Default::default()
    };
    let p = dir.path();
    s(cmd_surface(&cfg, &p.join("s1.csv")))?;
    s(cmd_surface(&cfg, &p.join("s2.csv")))?;
    s(cmd_frames(&cfg, &p.join("f1")))?;
    s(cmd_frames(&cfg, &p.join("f2")))?;
    let same_surface = fs::read(p.join("s1.csv")).unwrap() == fs::read(p.join("s2.csv")).unwrap();
    let (f1, f2) = (read_dir_bytes(&p.join("f1")), read_dir_bytes(&p.join("f2")));
    check(
        same_surface && f1 == f2 && f1.len() == 4,
        format!("surface and {} frame files byte-identical", f1.len()),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 lemma reproduction", c1_lemma),
        ("2 block integrals", c2_block_integrals),
        ("3 partial integrals", c3_partial_integrals),
        ("4 uniform convergence toward exp", c4_convergence),
        ("5 zero integral on [-1,1]", c5_symmetric_zero),
        ("6 non-membership witness", c6_non_membership),
        ("7 general construction", c7_general),
        ("8 continuity at 0", c8_continuity),
        ("9 chasles checker", c9_chasles),
        ("10 determinism", c10_determinism),
    ];
    let mut failed = 0;
    for (name, run) in criteria {
        match run() {
            Ok(d) => println!("criterion {name}: PASS ({d})"),
            Err(d) => {
                failed += 1;
                println!("criterion {name}: FAIL ({d})");
            }
        }
    }
    println!("{}/10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
