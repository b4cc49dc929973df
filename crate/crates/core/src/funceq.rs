//! Solutions of `F ∘ M = F`.
//!
//! For a strictly monotone homogeneous mapping `M` with invariant mean `K`,
//! the continuous solutions are exactly `F = φ ∘ K` with `φ(t) = F(t, …, t)`,
//! and `F ∘ M = F` holds iff `F ∘ 𝐊_S(M) = F` for every nonempty `S`. This
//! module builds such functions and measures all three conditions on samples.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::complementary::{build_ks_mapping, ensure_strictly_monotone, ComplementSpec};
use crate::domain::{approx_eq, SampleConfig};
use crate::error::{MeanError, Result};
use crate::expr::{IndexSet, MeanExpr, MeanVector};

/// Scalar functions `φ`, continuous on `(0, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScalarFuncSpec {
    Identity,
    Log,
    Exp,
    Power {
        r: f64,
    },
    /// `t ↦ a·t + b`.
    Affine {
        a: f64,
        b: f64,
    },
    /// Applied left to right: `parts[0]` first.
    Compose {
        parts: Vec<ScalarFuncSpec>,
    },
}

impl ScalarFuncSpec {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let v = match self {
            ScalarFuncSpec::Identity => t,
            ScalarFuncSpec::Log if t > 0.0 => t.ln(),
            ScalarFuncSpec::Log => {
                return Err(MeanError::DomainViolation(format!("log of {t}")));
            }
            ScalarFuncSpec::Exp => t.exp(),
            ScalarFuncSpec::Power { r } if t > 0.0 || r.fract() == 0.0 => t.powf(*r),
            ScalarFuncSpec::Power { r } => {
                return Err(MeanError::DomainViolation(format!("{t} raised to {r}")));
            }
            ScalarFuncSpec::Affine { a, b } => a * t + b,
            ScalarFuncSpec::Compose { parts } => {
                return parts.iter().try_fold(t, |acc, f| f.eval(acc));
            }
        };
        Ok(v)
    }
}

/// A real function of `p` variables.
pub trait MultiFunction {
    /// Number of variables, when fixed.
    fn arity(&self) -> Option<usize>;
    fn eval(&self, x: &[f64]) -> Result<f64>;
}

impl MultiFunction for MeanExpr {
    fn arity(&self) -> Option<usize> {
        self.fixed_arity()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        MeanExpr::eval(self, x)
    }
}

/// Wraps a closure as an opaque function for negative tests.
pub struct FnHandle<F: Fn(&[f64]) -> f64> {
    pub arity: Option<usize>,
    pub f: F,
}

impl<F: Fn(&[f64]) -> f64> MultiFunction for FnHandle<F> {
    fn arity(&self) -> Option<usize> {
        self.arity
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        Ok((self.f)(x))
    }
}

/// `F = φ ∘ K`. `K` may be [`MeanExpr::Invariant`] when it has no closed form.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantFunction {
    pub phi: ScalarFuncSpec,
    #[serde(rename = "K")]
    pub kernel: MeanExpr,
}

impl MultiFunction for InvariantFunction {
    fn arity(&self) -> Option<usize> {
        self.kernel.fixed_arity()
    }

    fn eval(&self, x: &[f64]) -> Result<f64> {
        self.phi.eval(self.kernel.eval(x)?)
    }
}

pub fn build_f(phi: ScalarFuncSpec, kernel: MeanExpr) -> InvariantFunction {
    InvariantFunction { phi, kernel }
}

/// `F = φ ∘ K` with `K` the invariant mean of `m`, realized by iteration.
pub fn build_f_iterated(phi: ScalarFuncSpec, m: MeanVector) -> InvariantFunction {
    InvariantFunction { phi, kernel: MeanExpr::Invariant(m) }
}

/// The diagonal restriction `t ↦ F(t, …, t)`.
pub struct DiagonalPhi<'a> {
    f: &'a dyn MultiFunction,
    p: usize,
}

impl DiagonalPhi<'_> {
    pub fn eval(&self, t: f64) -> Result<f64> {
        self.f.eval(&vec![t; self.p])
    }

    pub fn tabulate(&self, grid: &[f64]) -> Result<TabulatedPhi> {
        let mut ts = grid.to_vec();
        ts.sort_by(f64::total_cmp);
        ts.dedup();
        let values = ts.iter().map(|&t| self.eval(t)).collect::<Result<Vec<_>>>()?;
        Ok(TabulatedPhi { ts, values })
    }
}

/// Sampled `φ` with piecewise-linear interpolation between grid points.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TabulatedPhi {
    pub ts: Vec<f64>,
    pub values: Vec<f64>,
}

impl TabulatedPhi {
    pub fn eval(&self, t: f64) -> Result<f64> {
        let (first, last) = match (self.ts.first(), self.ts.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(MeanError::DomainViolation("empty table".into())),
        };
        if !(first..=last).contains(&t) {
            return Err(MeanError::DomainViolation(format!("{t} outside [{first}, {last}]")));
        }
        let k = self.ts.partition_point(|&s| s < t);
        if self.ts[k] == t {
            return Ok(self.values[k]);
        }
        let (t0, t1) = (self.ts[k - 1], self.ts[k]);
        let w = (t - t0) / (t1 - t0);
        Ok(self.values[k - 1] * (1.0 - w) + self.values[k] * w)
    }
}

/// `φ(t) := F(t, …, t)` for a `p`-variable `F`.
pub fn extract_phi(f: &dyn MultiFunction, p: usize) -> Result<DiagonalPhi<'_>> {
    if let Some(q) = f.arity() {
        if q != p {
            return Err(MeanError::ArityMismatch { expected: q, got: p });
        }
    }
    Ok(DiagonalPhi { f, p })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolutionReport {
    /// `max |F(M(x)) - F(x)|`.
    pub eq2_residual: f64,
    pub eq2_witness: Option<Vec<f64>>,
    /// `max |F(𝐊_S(M)(x)) - F(x)|`, keyed by the bitmask of `S`.
    pub eq3_residuals: BTreeMap<u64, f64>,
    /// `max |F(x) - φ(K(x))|` with `φ` the diagonal restriction of `F`.
    pub representation_residual: f64,
    /// Sampled check that `K` and every `M_i` are homogeneous; the
    /// characterization is only claimed under that hypothesis.
    pub homogeneous: bool,
    pub samples: usize,
}

impl SolutionReport {
    pub fn max_eq3(&self) -> f64 {
        self.eq3_residuals.values().copied().fold(0.0, f64::max)
    }

    /// All three residuals at most `tol`.
    pub fn is_solution(&self, tol: f64) -> bool {
        self.eq2_residual <= tol && self.max_eq3() <= tol && self.representation_residual <= tol
    }

    /// Residual table as CSV: `check,S,residual`.
    pub fn to_csv(&self) -> Result<String> {
        let io = |e: csv::Error| MeanError::InvalidSpec(format!("csv: {e}"));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["check", "S", "residual"]).map_err(io)?;
        w.write_record(["eq2", "", &format!("{:?}", self.eq2_residual)]).map_err(io)?;
        for (mask, r) in &self.eq3_residuals {
            w.write_record(["eq3", &IndexSet::from_mask(*mask).to_string(), &format!("{r:?}")]).map_err(io)?;
        }
        w.write_record(["representation", "", &format!("{:?}", self.representation_residual)]).map_err(io)?;
        let bytes = w.into_inner().map_err(|e| MeanError::InvalidSpec(format!("csv: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

pub fn verify_solution(
    f: &dyn MultiFunction,
    m: &MeanVector,
    kernel: &MeanExpr,
    cfg: &SampleConfig,
) -> Result<SolutionReport> {
    verify_solution_at(f, m, kernel, &cfg.points(m.arity()))
}

fn homogeneous(e: &MeanExpr, points: &[Vec<f64>]) -> Result<bool> {
    for x in points {
        let scaled: Vec<f64> = x.iter().map(|v| 2.0 * v).collect();
        if !approx_eq(e.eval(&scaled)?, 2.0 * e.eval(x)?, 1e-9) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// As [`verify_solution`] at explicit points.
pub fn verify_solution_at(
    f: &dyn MultiFunction,
    m: &MeanVector,
    kernel: &MeanExpr,
    points: &[Vec<f64>],
) -> Result<SolutionReport> {
    let p = m.arity();
    kernel.check_arity(p)?;
    if let Some(q) = f.arity() {
        if q != p {
            return Err(MeanError::ArityMismatch { expected: p, got: q });
        }
    }
    ensure_strictly_monotone(kernel, p)?;
    let phi = extract_phi(f, p)?;

    let mut eq2_residual = 0.0f64;
    let mut eq2_witness = None;
    let mut representation_residual = 0.0f64;
    for x in points {
        let fx = f.eval(x)?;
        let r = (f.eval(&m.apply(x)?)? - fx).abs();
        if r > eq2_residual {
            eq2_residual = r;
            eq2_witness = Some(x.clone());
        }
        representation_residual = representation_residual.max((fx - phi.eval(kernel.eval(x)?)?).abs());
    }

    let mut eq3_residuals = BTreeMap::new();
    for s in IndexSet::nonempty_subsets(p) {
        let spec = ComplementSpec::new_unchecked(kernel.clone(), m.clone(), s)?;
        let ks = build_ks_mapping(&spec);
        let mut worst = 0.0f64;
        for x in points {
            worst = worst.max((f.eval(&ks.apply(x)?)? - f.eval(x)?).abs());
        }
        eq3_residuals.insert(s.mask(), worst);
    }

    let probe: Vec<Vec<f64>> = points.iter().take(16).cloned().collect();
    let mut is_homogeneous = homogeneous(kernel, &probe)?;
    for e in m.iter() {
        is_homogeneous = is_homogeneous && homogeneous(e, &probe)?;
    }

    Ok(SolutionReport {
        eq2_residual,
        eq2_witness,
        eq3_residuals,
        representation_residual,
        homogeneous: is_homogeneous,
        samples: points.len(),
    })
}
