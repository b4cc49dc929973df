//! Iteration of mean-type mappings towards the diagonal.
//!
//! When every off-diagonal point is strictly contracted
//! (`max M(x) - min M(x) < max x - min x`), the iterates `Mⁿ(x)` converge to
//! `(K(x), …, K(x))` where `K` is the unique mean with `K ∘ M = K`. The
//! engine does not verify that hypothesis; it iterates and reports.

use serde::Serialize;

use crate::domain::{SampleConfig, ABS_FLOOR};
use crate::error::{MeanError, Result};
use crate::expr::{min_max, MeanExpr, MeanVector};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IterationConfig {
    /// Relative diameter tolerance; also the bisection tolerance for complements.
    pub tol: f64,
    pub max_iter: usize,
    pub keep_trace: bool,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig { tol: 1e-13, max_iter: 10_000, keep_trace: false }
    }
}

impl IterationConfig {
    pub fn with_tol(mut self, tol: f64) -> Self {
        assert!(tol > 0.0, "tolerance must be positive");
        self.tol = tol;
        self
    }

    pub fn with_trace(mut self) -> Self {
        self.keep_trace = true;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        assert!(max_iter >= 1);
        self.max_iter = max_iter;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IterationReport {
    pub limit: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diameter: f64,
    #[serde(rename = "final")]
    pub final_iterate: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trace: Option<Vec<Vec<f64>>>,
}

impl IterationReport {
    /// Trace as CSV, one iterate per row: `step,x1,…,xp`.
    pub fn trace_csv(&self) -> Result<String> {
        let rows: Vec<&Vec<f64>> = match &self.trace {
            Some(t) => t.iter().collect(),
            None => vec![&self.final_iterate],
        };
        let p = self.final_iterate.len();
        let mut w = csv::Writer::from_writer(Vec::new());
        let header: Vec<String> = std::iter::once("step".to_string()).chain((1..=p).map(|i| format!("x{i}"))).collect();
        let io = |e: csv::Error| MeanError::InvalidSpec(format!("csv: {e}"));
        w.write_record(&header).map_err(io)?;
        let first_step = if self.trace.is_some() { 0 } else { self.iterations };
        for (k, row) in rows.iter().enumerate() {
            let rec: Vec<String> =
                std::iter::once((first_step + k).to_string()).chain(row.iter().map(|v| format!("{v:?}"))).collect();
            w.write_record(&rec).map_err(io)?;
        }
        let bytes = w.into_inner().map_err(|e| MeanError::InvalidSpec(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

fn check_domain(m: &MeanVector, x: &[f64]) -> Result<()> {
    m.check_input(x)?;
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(MeanError::DomainViolation(format!("non-finite input {v}")));
    }
    if m.iter().any(MeanExpr::needs_positive) {
        if let Some(v) = x.iter().find(|&&v| v <= 0.0) {
            return Err(MeanError::DomainViolation(format!("mapping requires positive inputs, got {v}")));
        }
    }
    Ok(())
}

fn converged(diameter: f64, x: &[f64], tol: f64) -> bool {
    let scale = x.iter().fold(1.0f64, |s, v| s.max(v.abs()));
    diameter <= tol * scale
}

/// Iterates `x, M(x), M(M(x)), …` synchronously until the relative diameter
/// drops below `cfg.tol`. Hitting `cfg.max_iter` yields
/// [`MeanError::NotConverged`] carrying the partial report.
pub fn iterate_mapping(m: &MeanVector, x: &[f64], cfg: &IterationConfig) -> Result<IterationReport> {
    check_domain(m, x)?;
    let (lo0, hi0) = min_max(x);
    let mut current = x.to_vec();
    let mut trace = cfg.keep_trace.then(|| vec![current.clone()]);
    let mut iterations = 0;
    loop {
        let (lo, hi) = min_max(&current);
        let diameter = hi - lo;
        let done = converged(diameter, &current, cfg.tol);
        if done || iterations >= cfg.max_iter {
            let report = IterationReport {
                limit: (0.5 * (lo + hi)).clamp(lo0, hi0),
                iterations,
                converged: done,
                diameter,
                final_iterate: current,
                trace,
            };
            return if done { Ok(report) } else { Err(MeanError::NotConverged(Box::new(report))) };
        }
        current = m.apply(&current)?;
        iterations += 1;
        if let Some(t) = trace.as_mut() {
            t.push(current.clone());
        }
    }
}

/// Value at `x` of the unique `M`-invariant mean.
pub fn invariant_mean_value(m: &MeanVector, x: &[f64], cfg: &IterationConfig) -> Result<f64> {
    iterate_mapping(m, x, cfg).map(|r| r.limit)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvarianceReport {
    /// Largest `|K(M(x)) - K(x)| / max(1, |K(x)|)` over the samples.
    pub max_residual: f64,
    pub witness: Option<Vec<f64>>,
    pub samples: usize,
}

/// Residual `|K(M(x)) - K(x)| / max(1, |K(x)|)` at a single point.
pub fn invariance_residual(k: &MeanExpr, m: &MeanVector, x: &[f64]) -> Result<f64> {
    let kx = k.eval(x)?;
    let kmx = k.eval(&m.apply(x)?)?;
    Ok((kmx - kx).abs() / kx.abs().max(1.0).max(ABS_FLOOR))
}

/// Sampled check of `K ∘ M = K`.
pub fn check_invariance(k: &MeanExpr, m: &MeanVector, cfg: &SampleConfig) -> Result<InvarianceReport> {
    check_invariance_at(k, m, &cfg.points(m.arity()))
}

pub fn check_invariance_at(k: &MeanExpr, m: &MeanVector, points: &[Vec<f64>]) -> Result<InvarianceReport> {
    k.check_arity(m.arity())?;
    let mut worst = 0.0f64;
    let mut witness = None;
    for x in points {
        let r = invariance_residual(k, m, x)?;
        if r > worst {
            worst = r;
            witness = Some(x.clone());
        }
    }
    Ok(InvarianceReport { max_residual: worst, witness, samples: points.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{approx_eq, Domain};

    fn mv(v: Vec<MeanExpr>) -> MeanVector {
        MeanVector::new(v).unwrap()
    }

    /// Independent AGM oracle in plain f64 (the acceptance suite carries the
    /// 60-digit version).
    fn agm(mut a: f64, mut b: f64) -> f64 {
        for _ in 0..40 {
            let (na, nb) = (0.5 * (a + b), (a * b).sqrt());
            a = na;
            b = nb;
        }
        a
    }

    #[test]
    fn gauss_agm() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::Geometric]);
        let r = iterate_mapping(&m, &[1.0, 2.0], &IterationConfig::default()).unwrap();
        assert!(r.converged);
        assert!((r.limit - 1.456791031046907).abs() < 1e-13);
        assert!((r.limit - agm(1.0, 2.0)).abs() < 1e-14);
    }

    #[test]
    fn arithmetic_harmonic_converges_to_geometric() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::Harmonic]);
        let v = invariant_mean_value(&m, &[1.0, 4.0], &IterationConfig::default()).unwrap();
        assert!(approx_eq(v, 2.0, 1e-13));
    }

    #[test]
    fn diagonal_start_takes_no_steps() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::Geometric, MeanExpr::Harmonic]);
        let r = iterate_mapping(&m, &[5.0, 5.0, 5.0], &IterationConfig::default()).unwrap();
        assert_eq!((r.limit, r.iterations), (5.0, 0));
    }

    #[test]
    fn three_variable_gini_mapping() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::GiniF, MeanExpr::Harmonic]);
        let v = invariant_mean_value(&m, &[1.0, 2.0, 3.0], &IterationConfig::default()).unwrap();
        assert!(approx_eq(v, 6f64.cbrt(), 1e-12));
    }

    #[test]
    fn beta_mapping_has_geometric_limit() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::BetaType, MeanExpr::BetaType]);
        let v = invariant_mean_value(&m, &[1.0, 2.0, 3.0], &IterationConfig::default()).unwrap();
        assert!(approx_eq(v, 6f64.cbrt(), 1e-12));
    }

    #[test]
    fn min_max_does_not_converge() {
        let m = mv(vec![MeanExpr::Min, MeanExpr::Max]);
        let cfg = IterationConfig::default().with_max_iter(100);
        match iterate_mapping(&m, &[1.0, 4.0], &cfg) {
            Err(MeanError::NotConverged(r)) => {
                assert!(!r.converged);
                assert_eq!(r.iterations, 100);
                assert_eq!(r.diameter, 3.0);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }

    #[test]
    fn identical_coordinates_finish_in_one_step() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::Arithmetic]);
        let r = iterate_mapping(&m, &[1.0, 4.0], &IterationConfig::default()).unwrap();
        assert_eq!((r.limit, r.iterations), (2.5, 1));
    }

    #[test]
    fn domain_errors_surface() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::Geometric]);
        assert!(matches!(
            iterate_mapping(&m, &[-1.0, 2.0], &IterationConfig::default()),
            Err(MeanError::DomainViolation(_))
        ));
        assert!(matches!(
            iterate_mapping(&m, &[1.0, 2.0, 3.0], &IterationConfig::default()),
            Err(MeanError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn trace_and_csv() {
        let m = mv(vec![MeanExpr::Arithmetic, MeanExpr::Harmonic]);
        let cfg = IterationConfig::default().with_trace();
        let r = iterate_mapping(&m, &[1.0, 4.0], &cfg).unwrap();
        let trace = r.trace.as_ref().unwrap();
        assert_eq!(trace.len(), r.iterations + 1);
        assert_eq!(trace[1], vec![2.5, 1.6]);
        let csv = r.trace_csv().unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("step,x1,x2"));
        assert_eq!(lines.next(), Some("0,1.0,4.0"));
        assert_eq!(lines.next(), Some("1,2.5,1.6"));
        let json = serde_json::to_value(&r).unwrap();
        assert!(json.get("trace").is_some());
        let plain = iterate_mapping(&m, &[1.0, 4.0], &IterationConfig::default()).unwrap();
        assert!(serde_json::to_value(&plain).unwrap().get("trace").is_none());
    }

    #[test]
    fn invariance_examples() {
        let cfg = SampleConfig::new(500, 42, Domain::open(0.0, 10.0));
        let ah = mv(vec![MeanExpr::Arithmetic, MeanExpr::Harmonic]);
        assert!(check_invariance(&MeanExpr::Geometric, &ah, &cfg).unwrap().max_residual < 1e-12);
        let afh = mv(vec![MeanExpr::Arithmetic, MeanExpr::GiniF, MeanExpr::Harmonic]);
        assert!(check_invariance(&MeanExpr::Geometric, &afh, &cfg).unwrap().max_residual < 1e-12);
        let ag = mv(vec![MeanExpr::Arithmetic, MeanExpr::Geometric]);
        let bad = check_invariance(&MeanExpr::Arithmetic, &ag, &cfg).unwrap();
        assert!(bad.max_residual > 0.0 && bad.witness.is_some());
        let at = invariance_residual(&MeanExpr::Arithmetic, &ag, &[1.0, 4.0]).unwrap();
        assert!(approx_eq(at, 0.25 / 2.5, 1e-15));
    }
}
