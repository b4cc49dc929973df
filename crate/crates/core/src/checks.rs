//! Sampled structural checks on mean expressions.
//!
//! These are statistical certificates over deterministic samples, never
//! proofs. Each report carries a witness when the property fails.

use itertools::Itertools;
use serde::Serialize;

use crate::domain::{approx_eq, SampleConfig};
use crate::error::{MeanError, Result};
use crate::expr::{min_max, MeanExpr, MeanVector};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundsReport {
    /// Largest amount by which `min x <= M(x) <= max x` is violated; 0 for means.
    pub max_violation: f64,
    pub witness: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub holds: bool,
    /// First sampled input at which the property failed. For symmetry checks
    /// this is the permuted vector; for monotonicity the unbumped one.
    pub witness: Option<Vec<f64>>,
    pub detail: Option<String>,
}

impl CheckReport {
    fn pass() -> Self {
        CheckReport { holds: true, witness: None, detail: None }
    }

    fn fail(witness: Vec<f64>, detail: String) -> Self {
        CheckReport { holds: false, witness: Some(witness), detail: Some(detail) }
    }
}

fn arity_for(expr: &MeanExpr, p: usize) -> Result<usize> {
    expr.check_arity(p)?;
    Ok(p)
}

/// Largest violation of the mean bounds over samples (corner probes included).
pub fn check_mean_bounds(expr: &MeanExpr, p: usize, cfg: &SampleConfig) -> Result<BoundsReport> {
    let p = arity_for(expr, p)?;
    let mut worst = 0.0f64;
    let mut witness = None;
    for x in cfg.points_with_corners(p) {
        let v = expr.eval(&x)?;
        let (lo, hi) = min_max(&x);
        let violation = (lo - v).max(v - hi).max(0.0);
        if violation > worst {
            worst = violation;
            witness = Some(x);
        }
    }
    Ok(BoundsReport { max_violation: worst, witness })
}

/// `min x < M(x) < max x` at every sampled nonconstant `x`.
pub fn check_strict_mean(expr: &MeanExpr, p: usize, cfg: &SampleConfig) -> Result<CheckReport> {
    let p = arity_for(expr, p)?;
    for x in cfg.points_with_corners(p) {
        let (lo, hi) = min_max(&x);
        if lo == hi {
            continue;
        }
        let v = expr.eval(&x)?;
        if !(lo < v && v < hi) {
            return Ok(CheckReport::fail(x, format!("value {v} not strictly inside [{lo}, {hi}]")));
        }
    }
    Ok(CheckReport::pass())
}

/// Permutations tried per sample: all of them up to `p = 6`, otherwise the
/// cyclic shifts and adjacent transpositions.
fn permutations(p: usize) -> Vec<Vec<usize>> {
    if p <= 6 {
        return (0..p).permutations(p).collect();
    }
    let mut out: Vec<Vec<usize>> = (1..p).map(|k| (0..p).map(|i| (i + k) % p).collect()).collect();
    for i in 0..p - 1 {
        let mut t: Vec<usize> = (0..p).collect();
        t.swap(i, i + 1);
        out.push(t);
    }
    out
}

pub fn check_symmetric(expr: &MeanExpr, p: usize, cfg: &SampleConfig) -> Result<CheckReport> {
    let p = arity_for(expr, p)?;
    let perms = permutations(p);
    for x in cfg.points_with_corners(p) {
        let base = expr.eval(&x)?;
        for perm in &perms {
            let y: Vec<f64> = perm.iter().map(|&i| x[i]).collect();
            let v = expr.eval(&y)?;
            if !approx_eq(base, v, cfg.tol) {
                return Ok(CheckReport::fail(y, format!("{v} at permuted input vs {base} at {x:?}")));
            }
        }
    }
    Ok(CheckReport::pass())
}

/// Bumps each coordinate by `1e-3 · max(1, |x_i|)` (downwards when the bump
/// would leave the domain) and checks the value moves in the same direction.
/// `strict` requires a change larger than the comparison tolerance.
pub fn check_monotone(expr: &MeanExpr, p: usize, cfg: &SampleConfig, strict: bool) -> Result<CheckReport> {
    let p = arity_for(expr, p)?;
    for x in cfg.points_with_corners(p) {
        let base = expr.eval(&x)?;
        for i in 0..p {
            let delta = 1e-3 * x[i].abs().max(1.0);
            let mut y = x.clone();
            let up = cfg.domain.contains(x[i] + delta);
            y[i] = if up { x[i] + delta } else { x[i] - delta };
            if !cfg.domain.contains(y[i]) {
                continue;
            }
            let v = expr.eval(&y)?;
            let (low, high) = if up { (base, v) } else { (v, base) };
            let slack = cfg.tol * low.abs().max(high.abs());
            let ok = if strict { high - low > slack } else { high - low >= -slack };
            if !ok {
                return Ok(CheckReport::fail(
                    x,
                    format!("coordinate {} bump moved the value from {low} to {high}", i + 1),
                ));
            }
        }
    }
    Ok(CheckReport::pass())
}

/// `(max x - min x) - (max M(x) - min M(x))`; positive values certify the
/// contraction hypothesis at `x`.
pub fn contraction_gap(m: &MeanVector, x: &[f64]) -> Result<f64> {
    m.check_input(x)?;
    let (lo, hi) = min_max(x);
    if lo == hi {
        return Err(MeanError::ConstantInput);
    }
    let y = m.apply(x)?;
    let (ylo, yhi) = min_max(&y);
    Ok((hi - lo) - (yhi - ylo))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Domain;
    use crate::expr::IndexSet;
    use crate::rational::Rational;

    fn cfg() -> SampleConfig {
        SampleConfig::new(200, 42, Domain::open(0.0, 10.0))
    }

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    #[test]
    fn bounds_examples() {
        assert_eq!(check_mean_bounds(&MeanExpr::Arithmetic, 3, &cfg()).unwrap().max_violation, 0.0);
        assert_eq!(check_mean_bounds(&MeanExpr::BetaType, 3, &cfg()).unwrap().max_violation, 0.0);
        let out = check_mean_bounds(&MeanExpr::HFamily(r(2, 1)), 2, &cfg()).unwrap();
        assert!(out.max_violation > 0.0);
        let w = out.witness.unwrap();
        let v = MeanExpr::HFamily(r(2, 1)).eval(&w).unwrap();
        assert!(v > w[0].max(w[1]));
    }

    #[test]
    fn symmetry_examples() {
        assert!(check_symmetric(&MeanExpr::Geometric, 3, &cfg()).unwrap().holds);
        assert!(check_symmetric(&MeanExpr::GiniF, 3, &cfg()).unwrap().holds);
        let proj = check_symmetric(&MeanExpr::Projection(1), 3, &cfg()).unwrap();
        assert!(!proj.holds && proj.witness.is_some());
        let sub = MeanExpr::SubsetArithmetic(IndexSet::one_based(&[1, 2]).unwrap());
        assert!(!check_symmetric(&sub, 3, &cfg()).unwrap().holds);
    }

    #[test]
    fn monotonicity_examples() {
        assert!(check_monotone(&MeanExpr::Arithmetic, 3, &cfg(), true).unwrap().holds);
        assert!(check_monotone(&MeanExpr::Min, 3, &cfg(), false).unwrap().holds);
        let strict_min = check_monotone(&MeanExpr::Min, 3, &cfg(), true).unwrap();
        assert!(!strict_min.holds && strict_min.witness.is_some());
        assert!(check_monotone(&MeanExpr::HFamily(r(1, 4)), 3, &cfg(), true).unwrap().holds);
        assert!(check_monotone(&MeanExpr::BetaType, 4, &cfg(), true).unwrap().holds);
        assert!(check_monotone(&MeanExpr::GiniF, 3, &cfg(), true).unwrap().holds);
    }

    #[test]
    fn gap_examples() {
        let ag = MeanVector::new(vec![MeanExpr::Arithmetic, MeanExpr::Geometric]).unwrap();
        assert!((contraction_gap(&ag, &[1.0, 4.0]).unwrap() - 2.5).abs() < 1e-15);
        let id = MeanVector::new(vec![MeanExpr::Projection(0), MeanExpr::Projection(1)]).unwrap();
        assert_eq!(contraction_gap(&id, &[1.0, 4.0]).unwrap(), 0.0);
        let ah = MeanVector::new(vec![MeanExpr::Arithmetic, MeanExpr::Harmonic]).unwrap();
        assert!((contraction_gap(&ah, &[1.0, 4.0]).unwrap() - 2.1).abs() < 1e-15);
        assert!(matches!(contraction_gap(&ah, &[2.0, 2.0]), Err(MeanError::ConstantInput)));
        let mm = MeanVector::new(vec![MeanExpr::Min, MeanExpr::Max]).unwrap();
        assert_eq!(contraction_gap(&mm, &[1.0, 4.0]).unwrap(), 0.0);
    }

    #[test]
    fn strict_window_for_the_family() {
        for p in [2usize, 3, 5] {
            let lower = crate::hfamily::beta_exponent(p);
            for alpha in [lower, Rational::ZERO, r(1, 2), Rational::ONE] {
                let rep = check_strict_mean(&MeanExpr::HFamily(alpha), p, &cfg()).unwrap();
                assert!(rep.holds, "p={p} alpha={alpha}: {rep:?}");
            }
            for alpha in [lower.checked_sub(r(1, 2)).unwrap(), r(3, 2)] {
                let rep = check_strict_mean(&MeanExpr::HFamily(alpha), p, &cfg()).unwrap();
                assert!(!rep.holds && rep.witness.is_some(), "p={p} alpha={alpha}");
            }
        }
    }
}
