//! Data emitters for the surface, animation frames, convergence runs and the
//! additivity checker.
//!
//! Numbers are written in Rust's shortest round-trip decimal form, so every
//! file is bit-faithful and byte-identical across runs with the same config.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Interval};
use super::LabError;
use crate::error::Error;
use crate::polyfun::{exp_partial, Polynomial};
use crate::riemann::{
    chasles_check, riemann_sum, sums_along, uniform_grid, ConvergenceReport, ExactIntegrals,
    TaggedPartition,
};
use crate::tentmap::{evaluate_f, exact_integral};
use crate::vecspace::NormedSpace;

/// Order of the exponential partial sum used as the positive-half reference.
pub const EXP_REFERENCE_ORDER: usize = 40;

fn create(path: &Path) -> Result<BufWriter<File>, LabError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|source| LabError::Io {
            path: dir.to_path_buf(),
            source,
        })?;
    }
    File::create(path)
        .map(BufWriter::new)
        .map_err(|source| LabError::Io {
            path: path.to_path_buf(),
            source,
        })
}

fn finish(mut w: BufWriter<File>, path: &Path) -> Result<(), LabError> {
    w.flush().map_err(|source| LabError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn io_err(path: &Path) -> impl Fn(std::io::Error) -> LabError + '_ {
    move |source| LabError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Writes `x,t,phi` over the `(xres+1) x (tres+1)` grid on `[-1, 1] x [0, 1]`.
///
/// Returns the number of data rows.
pub fn cmd_surface(cfg: &ExperimentConfig, out: &Path) -> Result<usize, LabError> {
    let xs = uniform_grid(-1.0, 1.0, cfg.xres);
    let ts = uniform_grid(0.0, 1.0, cfg.tres);
    let blocks: Vec<String> = xs
        .par_iter()
        .map(|&x| {
            let fx = evaluate_f(x)?;
            let mut block = String::new();
            for &t in &ts {
                block.push_str(&format!("{x},{t},{}\n", fx.eval(t)));
            }
            Ok(block)
        })
        .collect::<Result<_, Error>>()?;
    let mut w = create(out)?;
    w.write_all(b"x,t,phi\n").map_err(io_err(out))?;
    for block in &blocks {
        w.write_all(block.as_bytes()).map_err(io_err(out))?;
    }
    finish(w, out)?;
    Ok(xs.len() * ts.len())
}

/// A sampled element of `E`: serialized coefficients plus its graph on `sample_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledPolynomial {
    pub coefficients: String,
    pub degree: isize,
    pub graph: Vec<f64>,
}

impl SampledPolynomial {
    fn new(p: &Polynomial, ts: &[f64]) -> Self {
        SampledPolynomial {
            coefficients: p.to_string(),
            degree: p.degree(),
            graph: ts.iter().map(|&t| p.eval(t)).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameTerm {
    pub tag: f64,
    pub width: f64,
    pub value: SampledPolynomial,
}

/// One animation frame: the tagged values `f(x_i)` and their Riemann sum.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Frame {
    pub index: usize,
    pub n: usize,
    pub interval: [f64; 2],
    pub tag_rule: String,
    pub sample_t: Vec<f64>,
    pub terms: Vec<FrameTerm>,
    pub sum: SampledPolynomial,
    pub sum_sup_norm: f64,
}

pub fn build_frame(cfg: &ExperimentConfig, index: usize, n: usize) -> Result<Frame, LabError> {
    let (a, b) = cfg.interval.bounds();
    let rule = cfg.tag_rule()?;
    let partition = TaggedPartition::regular(a, b, n, rule)?;
    let ts = uniform_grid(0.0, 1.0, cfg.samples - 1);
    let sum: Polynomial = riemann_sum(&evaluate_f, &partition)?;
    let terms = partition
        .tags()
        .iter()
        .zip(partition.widths())
        .map(|(&tag, width)| {
            Ok(FrameTerm {
                tag,
                width,
                value: SampledPolynomial::new(&evaluate_f(tag)?, &ts),
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    Ok(Frame {
        index,
        n,
        interval: [a, b],
        tag_rule: rule.to_string(),
        sum_sup_norm: sum.norm(),
        sum: SampledPolynomial::new(&sum, &ts),
        sample_t: ts,
        terms,
    })
}

/// Writes one JSON frame per resolution in the schedule into `outdir`.
pub fn cmd_frames(cfg: &ExperimentConfig, outdir: &Path) -> Result<Vec<PathBuf>, LabError> {
    fs::create_dir_all(outdir).map_err(io_err(outdir))?;
    let mut written = Vec::with_capacity(cfg.schedule.len());
    for (index, &n) in cfg.schedule.iter().enumerate() {
        let frame = build_frame(cfg, index, n)?;
        let path = outdir.join(format!("frame_{index:03}_N{n}.json"));
        let mut w = create(&path)?;
        serde_json::to_writer(&mut w, &frame)?;
        w.write_all(b"\n").map_err(io_err(&path))?;
        finish(w, &path)?;
        written.push(path);
    }
    Ok(written)
}

/// Limit reference for each interval: `exp` (as a degree-40 partial sum) on
/// `[0, 1]`, its negative on `[-1, 0]` and `θ` on `[-1, 1]`.
pub fn interval_reference(interval: Interval) -> Result<Polynomial, Error> {
    Ok(match interval {
        Interval::Full => Polynomial::zero(),
        Interval::Positive => exp_partial(EXP_REFERENCE_ORDER)?,
        Interval::Negative => exp_partial(EXP_REFERENCE_ORDER)?.neg(),
    })
}

/// Runs the schedule over the chosen interval and writes the convergence CSV.
pub fn cmd_converge(cfg: &ExperimentConfig, out: &Path) -> Result<ConvergenceReport, LabError> {
    let (a, b) = cfg.interval.bounds();
    let reference = interval_reference(cfg.interval)?;
    let sums: Vec<Polynomial> = sums_along(&evaluate_f, a, b, cfg.tag_rule()?, &cfg.schedule)?;
    let report = ConvergenceReport::from_sums(&cfg.schedule, &sums, Some(&reference), cfg.tol);
    let w = create(out)?;
    report.write_csv(w)?;
    Ok(report)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaslesRow {
    pub n: usize,
    pub total_norm: f64,
    pub left_norm: f64,
    pub right_norm: f64,
    pub discrepancy: f64,
    pub additive: bool,
    pub total_degree: isize,
    pub left_degree: isize,
    pub right_degree: isize,
    pub total_dist_exact: Option<f64>,
    pub left_dist_exact: Option<f64>,
    pub right_dist_exact: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChaslesSummary {
    pub a: f64,
    pub c: f64,
    pub b: f64,
    pub rows: Vec<ChaslesRow>,
    /// Closed-form integrals in `E`; `None` where the integral lies outside `E`.
    pub exact: ExactIntegrals<Polynomial>,
    pub total: Polynomial,
    pub left: Polynomial,
    pub right: Polynomial,
}

impl ChaslesSummary {
    pub fn last(&self) -> &ChaslesRow {
        self.rows.last().expect("chasles summary has at least one row")
    }
}

/// Resolutions `2, 4, 8, ...` below `n`, followed by `n`.
pub fn chasles_schedule(n: usize) -> Vec<usize> {
    let mut sched: Vec<usize> = std::iter::successors(Some(2usize), |k| k.checked_mul(2))
        .take_while(|&k| k < n)
        .collect();
    sched.push(n);
    sched
}

/// Runs the additivity check over `[a, c] ∪ [c, b]` at each resolution of
/// [`chasles_schedule`] and writes one CSV row per resolution.
pub fn cmd_chasles(cfg: &ExperimentConfig, out: &Path) -> Result<ChaslesSummary, LabError> {
    let (a, c, b) = (cfg.a, cfg.c, cfg.b);
    if !(-1.0 <= a && a < c && c < b && b <= 1.0) {
        return Err(Error::Domain(format!("need -1 <= a < c < b <= 1, got {a}, {c}, {b}")).into());
    }
    let rule = cfg.tag_rule()?;
    let exact = ExactIntegrals {
        left: exact_integral(a, c)?,
        right: exact_integral(c, b)?,
        total: exact_integral(a, b)?,
    };
    let mut rows = Vec::new();
    let mut last = None;
    for n in chasles_schedule(cfg.n) {
        let r = chasles_check(&evaluate_f, a, c, b, n, rule, cfg.tol, &exact)?;
        rows.push(ChaslesRow {
            n,
            total_norm: r.total.norm(),
            left_norm: r.left.norm(),
            right_norm: r.right.norm(),
            discrepancy: r.discrepancy,
            additive: r.additive,
            total_degree: r.total.degree(),
            left_degree: r.left.degree(),
            right_degree: r.right.degree(),
            total_dist_exact: r.total_dist_exact,
            left_dist_exact: r.left_dist_exact,
            right_dist_exact: r.right_dist_exact,
        });
        last = Some(r);
    }
    let last = last.expect("schedule is nonempty");

    let mut w = csv::Writer::from_writer(create(out)?);
    w.write_record([
        "N",
        "total_norm",
        "left_norm",
        "right_norm",
        "discrepancy",
        "additive",
        "total_degree",
        "left_degree",
        "right_degree",
        "total_dist_exact",
        "left_dist_exact",
        "right_dist_exact",
    ])?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in &rows {
        w.write_record([
            r.n.to_string(),
            r.total_norm.to_string(),
            r.left_norm.to_string(),
            r.right_norm.to_string(),
            r.discrepancy.to_string(),
            r.additive.to_string(),
            r.total_degree.to_string(),
            r.left_degree.to_string(),
            r.right_degree.to_string(),
            opt(r.total_dist_exact),
            opt(r.left_dist_exact),
            opt(r.right_dist_exact),
        ])?;
    }
    w.flush().map_err(io_err(out))?;

    Ok(ChaslesSummary {
        a,
        c,
        b,
        rows,
        exact,
        total: last.total,
        left: last.left,
        right: last.right,
    })
}
