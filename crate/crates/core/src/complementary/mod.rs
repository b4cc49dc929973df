//! Complementary averaging.
//!
//! Given a continuous, strictly increasing mean `K` that is invariant for a
//! mapping `M`, and a nonempty index set `S`, there is exactly one mean
//! `K_S(M)` such that replacing every coordinate `M_i` (`i ∈ S`) by it keeps
//! `K` invariant. At a point `x` its value is the root of
//! `f(α) = K(T(α)) - K(x)`, where `T(α)` carries `α` on `S` and `M_i(x)`
//! elsewhere; the root lies between the smallest and largest `M_i(x)` over
//! `S` and is found by bisection on that bracket.

mod closure;

use std::collections::BTreeMap;
use std::sync::Arc;

use serde::Serialize;

pub use closure::{
    closure_generate, closure_generate_with, ClosureNode, ClosureOptions, ClosureTree, CoordinateMean, DedupKind,
    DedupMode, DEFAULT_BUDGET, DEFAULT_MAX_DEPTH, FINGERPRINT_SAMPLES,
};

use crate::checks;
use crate::domain::{Domain, SampleConfig, ABS_FLOOR};
use crate::error::{MeanError, Result};
use crate::expr::{min_max, IndexSet, MeanExpr, MeanVector};
use crate::invariance::IterationConfig;

/// Bracket checks allow this many tolerances of slack before failing.
const BRACKET_SLACK: f64 = 10.0;

/// `K`, `M` and `S` for one complementary average. Evaluates as `K_S(M)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplementSpec {
    kernel: MeanExpr,
    mapping: MeanVector,
    subset: IndexSet,
}

impl ComplementSpec {
    /// Validates arities and `S`, and checks on samples that `K` is strictly
    /// increasing in each variable.
    pub fn new(kernel: MeanExpr, mapping: MeanVector, subset: IndexSet) -> Result<Self> {
        let spec = Self::new_unchecked(kernel, mapping, subset)?;
        ensure_strictly_monotone(&spec.kernel, spec.mapping.arity())?;
        Ok(spec)
    }

    /// As [`ComplementSpec::new`] without the sampled monotonicity check.
    pub fn new_unchecked(kernel: MeanExpr, mapping: MeanVector, subset: IndexSet) -> Result<Self> {
        if subset.is_empty() {
            return Err(MeanError::EmptySubset);
        }
        subset.check_within(mapping.arity())?;
        kernel.check_arity(mapping.arity())?;
        Ok(ComplementSpec { kernel, mapping, subset })
    }

    pub fn kernel(&self) -> &MeanExpr {
        &self.kernel
    }

    pub fn mapping(&self) -> &MeanVector {
        &self.mapping
    }

    pub fn subset(&self) -> IndexSet {
        self.subset
    }

    pub fn arity(&self) -> usize {
        self.mapping.arity()
    }

    pub fn value(&self, x: &[f64], cfg: &IterationConfig) -> Result<f64> {
        complement_value(self, x, cfg)
    }
}

/// Sample configuration used for the strict-monotonicity precondition on `K`.
fn monotonicity_samples(kernel: &MeanExpr) -> SampleConfig {
    let domain = if kernel.needs_positive() { Domain::open(0.0, 10.0) } else { Domain::open(-10.0, 10.0) };
    SampleConfig::new(32, 42, domain)
}

pub(crate) fn ensure_strictly_monotone(kernel: &MeanExpr, p: usize) -> Result<()> {
    let report = checks::check_monotone(kernel, p, &monotonicity_samples(kernel), true)?;
    if report.holds {
        Ok(())
    } else {
        Err(MeanError::InvalidSpec(format!(
            "kernel {kernel} is not strictly increasing: {}",
            report.detail.unwrap_or_default()
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Bracket {
    pub lo: f64,
    pub hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Solution {
    pub value: f64,
    pub bracket: Bracket,
    pub target: f64,
    /// `|f(value) - target|`.
    pub residual: f64,
    pub iterations: usize,
    /// Per-step bound `max(|f(lo) - target|, |f(hi) - target|)` over the
    /// current bracket. Empty unless tracing was requested.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub residual_bounds: Vec<f64>,
}

enum Outcome {
    Solved(Solution),
    OutOfRange { f_lo: f64, f_hi: f64 },
}

/// Bisection for `f(α) = target` on `[lo, hi]`. The direction of `f` is read
/// from the endpoints. Targets within the slack of an endpoint value resolve
/// to that endpoint.
fn bisect<F>(f: F, target: f64, lo: f64, hi: f64, cfg: &IterationConfig, trace: bool) -> Result<Outcome>
where
    F: Fn(f64) -> Result<f64>,
{
    let bracket = Bracket { lo, hi };
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a)?, f(b)?);
    let increasing = fb >= fa;
    let (f_small, f_large) = if increasing { (fa, fb) } else { (fb, fa) };
    let slack = BRACKET_SLACK * cfg.tol * target.abs().max(1.0);
    if target < f_small - slack || target > f_large + slack {
        return Ok(Outcome::OutOfRange { f_lo: fa, f_hi: fb });
    }
    let done = |value: f64, fv: f64, iterations: usize, bounds: Vec<f64>| {
        Outcome::Solved(Solution {
            value,
            bracket,
            target,
            residual: (fv - target).abs(),
            iterations,
            residual_bounds: bounds,
        })
    };
    // Endpoint hits, including targets inside the slack band.
    if target <= f_small {
        let (v, fv) = if increasing { (a, fa) } else { (b, fb) };
        return Ok(done(v, fv, 0, Vec::new()));
    }
    if target >= f_large {
        let (v, fv) = if increasing { (b, fb) } else { (a, fa) };
        return Ok(done(v, fv, 0, Vec::new()));
    }
    let residual_tol = cfg.tol * target.abs().max(ABS_FLOOR);
    let mut bounds = Vec::new();
    let mut iterations = 0;
    while iterations < cfg.max_iter {
        if trace {
            bounds.push((fa - target).abs().max((fb - target).abs()));
        }
        let mid = a + 0.5 * (b - a);
        if mid <= a || mid >= b {
            break;
        }
        let fm = f(mid)?;
        iterations += 1;
        if (fm - target).abs() <= residual_tol {
            return Ok(done(mid, fm, iterations, bounds));
        }
        if (fm < target) == increasing {
            a = mid;
            fa = fm;
        } else {
            b = mid;
            fb = fm;
        }
        if b - a <= cfg.tol * a.abs().max(b.abs()).max(1.0) {
            break;
        }
    }
    if trace {
        bounds.push((fa - target).abs().max((fb - target).abs()));
    }
    let (v, fv) = if (fa - target).abs() <= (fb - target).abs() { (a, fa) } else { (b, fb) };
    Ok(done(v, fv, iterations, bounds))
}

fn section_point(s: IndexSet, alpha: f64, others: &[f64]) -> Vec<f64> {
    others.iter().enumerate().map(|(i, &v)| if s.contains(i) { alpha } else { v }).collect()
}

fn solve_complement(spec: &ComplementSpec, x: &[f64], cfg: &IterationConfig, trace: bool) -> Result<Solution> {
    spec.mapping.check_input(x)?;
    let target = spec.kernel.eval(x)?;
    let mx = spec.mapping.apply(x)?;
    let selected: Vec<f64> = spec.subset.iter().map(|i| mx[i]).collect();
    let (lo, hi) = min_max(&selected);
    let f = |alpha: f64| spec.kernel.eval(&section_point(spec.subset, alpha, &mx));
    match bisect(f, target, lo, hi, cfg, trace)? {
        Outcome::Solved(s) => Ok(s),
        Outcome::OutOfRange { f_lo, f_hi } => Err(MeanError::NotInvariant { x: x.to_vec(), f_lo, f_hi, target }),
    }
}

/// `K_S(M)(x)`. Always inside `[min_{i∈S} M_i(x), max_{i∈S} M_i(x)]`.
pub fn complement_value(spec: &ComplementSpec, x: &[f64], cfg: &IterationConfig) -> Result<f64> {
    solve_complement(spec, x, cfg, false).map(|s| s.value)
}

/// Full solver output for `K_S(M)(x)`, including the per-step residual bounds.
pub fn complement_solution(spec: &ComplementSpec, x: &[f64], cfg: &IterationConfig) -> Result<Solution> {
    solve_complement(spec, x, cfg, true)
}

/// The mean `K_S(M)` as an expression node.
pub fn complement_mean(spec: &ComplementSpec) -> MeanExpr {
    MeanExpr::Complement(Arc::new(spec.clone()))
}

/// `𝐊_S(M)`: `K_S(M)` on `S`, `M_i` elsewhere.
pub fn build_ks_mapping(spec: &ComplementSpec) -> MeanVector {
    let node = complement_mean(spec);
    let means = (0..spec.arity())
        .map(|i| if spec.subset.contains(i) { node.clone() } else { spec.mapping[i].clone() })
        .collect();
    MeanVector::new(means).expect("coordinates share the arity of the original mapping")
}

/// The dual `K_S*(M)`: the complement over `ℕ_p ∖ S` taken with respect to `𝐊_S(M)`.
pub fn dual_complement(spec: &ComplementSpec) -> Result<MeanExpr> {
    let p = spec.arity();
    if spec.subset.is_full(p) {
        return Err(MeanError::SIsFull);
    }
    let dual =
        ComplementSpec::new_unchecked(spec.kernel.clone(), build_ks_mapping(spec), spec.subset.complement_in(p))?;
    Ok(complement_mean(&dual))
}

/// Solves `K(T(α)) = K(x)` over the full range `[min x, max x]`, where `T`
/// carries `α` on `S` and `fixed[i](x)` elsewhere. Fails with
/// [`MeanError::NoSolutionInRange`] when no mean value completes the mapping
/// at `x`.
pub fn solve_completion(
    kernel: &MeanExpr,
    fixed: &BTreeMap<usize, MeanExpr>,
    s: IndexSet,
    x: &[f64],
    cfg: &IterationConfig,
) -> Result<f64> {
    let p = x.len();
    if s.is_empty() {
        return Err(MeanError::EmptySubset);
    }
    s.check_within(p)?;
    kernel.check_arity(p)?;
    for i in 0..p {
        if s.contains(i) == fixed.contains_key(&i) {
            return Err(MeanError::InvalidSpec(format!(
                "coordinate {} must be either in S or fixed, not both or neither",
                i + 1
            )));
        }
    }
    if let Some(&i) = fixed.keys().find(|&&i| i >= p) {
        return Err(MeanError::InvalidIndex { index: i + 1, arity: p });
    }
    let target = kernel.eval(x)?;
    let mut others = vec![0.0; p];
    for (&i, expr) in fixed {
        others[i] = expr.eval(x)?;
    }
    let (lo, hi) = min_max(x);
    let f = |alpha: f64| kernel.eval(&section_point(s, alpha, &others));
    match bisect(f, target, lo, hi, cfg, false)? {
        Outcome::Solved(sol) => Ok(sol.value),
        Outcome::OutOfRange { f_lo, f_hi } => Err(MeanError::NoSolutionInRange { lo, hi, f_lo, f_hi, target }),
    }
}
