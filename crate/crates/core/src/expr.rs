//! The mean-expression language and its evaluation semantics.
//!
//! A [`MeanExpr`] is arity-polymorphic: most variants evaluate on vectors of
//! any length `p`, a few pin the arity (the three-variable Gini mean, and
//! nodes that carry a mapping). A [`MeanVector`] fixes `p` and holds one
//! expression per coordinate.
//!
//! Indices in the Rust API are 0-based. The JSON format and the CLI use
//! 1-based indices.

use std::fmt;
use std::sync::Arc;

use crate::complementary::ComplementSpec;
use crate::error::{MeanError, Result};
use crate::hfamily;
use crate::invariance::{self, IterationConfig};
use crate::rational::Rational;

/// A set of coordinate positions, stored as a bitmask (at most 64 coordinates).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct IndexSet(u64);

impl IndexSet {
    pub const MAX_ARITY: usize = 64;

    pub fn empty() -> Self {
        IndexSet(0)
    }

    /// `{0, .., p-1}`.
    pub fn full(p: usize) -> Self {
        assert!(p <= Self::MAX_ARITY);
        if p == 64 {
            IndexSet(u64::MAX)
        } else {
            IndexSet((1u64 << p) - 1)
        }
    }

    pub fn from_mask(mask: u64) -> Self {
        IndexSet(mask)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(indices: I) -> Result<Self> {
        let mut mask = 0u64;
        for i in indices {
            if i >= Self::MAX_ARITY {
                return Err(MeanError::InvalidIndex { index: i, arity: Self::MAX_ARITY });
            }
            mask |= 1 << i;
        }
        Ok(IndexSet(mask))
    }

    /// Builds a set from 1-based positions, as written in the JSON format.
    pub fn one_based(indices: &[usize]) -> Result<Self> {
        if let Some(&i) = indices.iter().find(|&&i| i == 0) {
            return Err(MeanError::InvalidIndex { index: i, arity: Self::MAX_ARITY });
        }
        Self::from_indices(indices.iter().map(|i| i - 1))
    }

    pub fn mask(&self) -> u64 {
        self.0
    }

    pub fn is_empty(&self) -> bool {
        self.0 == 0
    }

    pub fn len(&self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        i < Self::MAX_ARITY && self.0 & (1 << i) != 0
    }

    pub fn is_full(&self, p: usize) -> bool {
        *self == Self::full(p)
    }

    /// Positions in `{0, .., p-1}` not in `self`.
    pub fn complement_in(&self, p: usize) -> Self {
        IndexSet(Self::full(p).0 & !self.0)
    }

    /// Largest position plus one, or 0 for the empty set.
    pub fn span(&self) -> usize {
        64 - self.0.leading_zeros() as usize
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        (0..Self::MAX_ARITY).filter(move |&i| self.contains(i))
    }

    pub fn to_one_based(&self) -> Vec<usize> {
        self.iter().map(|i| i + 1).collect()
    }

    pub fn check_within(&self, p: usize) -> Result<()> {
        if self.span() > p {
            return Err(MeanError::InvalidIndex { index: self.span(), arity: p });
        }
        Ok(())
    }

    /// Every nonempty subset of `{0, .., p-1}` in ascending bitmask order.
    pub fn nonempty_subsets(p: usize) -> impl Iterator<Item = IndexSet> {
        assert!(p < Self::MAX_ARITY);
        (1..(1u64 << p)).map(IndexSet)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_one_based().iter().map(|i| i.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MeanExpr {
    Arithmetic,
    Geometric,
    Harmonic,
    /// Power mean of exponent `r`; `r = 0` evaluates as the geometric mean.
    Power(f64),
    Min,
    Max,
    /// The `i`-th coordinate (0-based).
    Projection(usize),
    /// Arithmetic mean of the coordinates in the set.
    SubsetArithmetic(IndexSet),
    /// `(x₁⋯x_p)^((1-α)/p) · ((x₁+⋯+x_p)/p)^α`.
    HFamily(Rational),
    /// `(p·x₁⋯x_p / (x₁+⋯+x_p))^(1/(p-1))`, equal to `HFamily(-1/(p-1))`.
    BetaType,
    /// `(x₂x₃ + x₃x₁ + x₁x₂) / (x₁ + x₂ + x₃)`, three variables only.
    GiniF,
    /// The complementary average `K_S(M)`, solved numerically on evaluation.
    Complement(Arc<ComplementSpec>),
    /// The unique invariant mean of a mapping, realized by iterating it.
    Invariant(MeanVector),
}

impl MeanExpr {
    pub fn complement(node: ComplementSpec) -> Self {
        MeanExpr::Complement(Arc::new(node))
    }

    /// Arity pinned by the variant, if any.
    pub fn fixed_arity(&self) -> Option<usize> {
        match self {
            MeanExpr::GiniF => Some(3),
            MeanExpr::Complement(c) => Some(c.mapping().arity()),
            MeanExpr::Invariant(m) => Some(m.arity()),
            _ => None,
        }
    }

    pub fn check_arity(&self, p: usize) -> Result<()> {
        if p == 0 {
            return Err(MeanError::ArityMismatch { expected: 1, got: 0 });
        }
        if let Some(expected) = self.fixed_arity() {
            if expected != p {
                return Err(MeanError::ArityMismatch { expected, got: p });
            }
        }
        match self {
            MeanExpr::Projection(i) if *i >= p => Err(MeanError::InvalidIndex { index: *i + 1, arity: p }),
            MeanExpr::SubsetArithmetic(s) => {
                if s.is_empty() {
                    return Err(MeanError::EmptySubset);
                }
                s.check_within(p)
            }
            MeanExpr::BetaType if p < 2 => Err(MeanError::ArityMismatch { expected: 2, got: p }),
            _ => Ok(()),
        }
    }

    /// Whether evaluation requires strictly positive inputs.
    pub fn needs_positive(&self) -> bool {
        match self {
            MeanExpr::Arithmetic
            | MeanExpr::Min
            | MeanExpr::Max
            | MeanExpr::Projection(_)
            | MeanExpr::SubsetArithmetic(_) => false,
            MeanExpr::Geometric
            | MeanExpr::Harmonic
            | MeanExpr::Power(_)
            | MeanExpr::HFamily(_)
            | MeanExpr::BetaType
            | MeanExpr::GiniF => true,
            MeanExpr::Complement(c) => c.kernel().needs_positive() || c.mapping().iter().any(MeanExpr::needs_positive),
            MeanExpr::Invariant(m) => m.iter().any(MeanExpr::needs_positive),
        }
    }

    /// Whether the variant is known to satisfy `min x <= M(x) <= max x` at arity `p`.
    pub fn is_mean_at(&self, p: usize) -> bool {
        match self {
            MeanExpr::HFamily(alpha) => hfamily::in_mean_window(p, *alpha),
            _ => true,
        }
    }

    fn validate_input(&self, x: &[f64]) -> Result<()> {
        self.check_arity(x.len())?;
        if let Some(v) = x.iter().find(|v| !v.is_finite()) {
            return Err(MeanError::DomainViolation(format!("non-finite input {v}")));
        }
        if self.needs_positive() {
            if let Some(v) = x.iter().find(|&&v| v <= 0.0) {
                return Err(MeanError::DomainViolation(format!("{self} requires positive inputs, got {v}")));
            }
        }
        Ok(())
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        self.validate_input(x)?;
        let (lo, hi) = min_max(x);
        if lo == hi {
            return Ok(lo);
        }
        let p = x.len();
        let pf = p as f64;
        let v = match self {
            MeanExpr::Arithmetic => x.iter().sum::<f64>() / pf,
            MeanExpr::Geometric => geometric(x),
            MeanExpr::Harmonic => pf / x.iter().map(|v| v.recip()).sum::<f64>(),
            MeanExpr::Power(r) if *r == 0.0 => geometric(x),
            MeanExpr::Power(r) => (x.iter().map(|v| v.powf(*r)).sum::<f64>() / pf).powf(r.recip()),
            MeanExpr::Min => lo,
            MeanExpr::Max => hi,
            MeanExpr::Projection(i) => x[*i],
            MeanExpr::SubsetArithmetic(s) => s.iter().map(|i| x[i]).sum::<f64>() / s.len() as f64,
            MeanExpr::HFamily(alpha) => hfamily::hfam_unchecked(alpha.to_f64(), x),
            MeanExpr::BetaType => hfamily::beta_unchecked(x),
            MeanExpr::GiniF => {
                let (a, b, c) = (x[0], x[1], x[2]);
                (b * c + c * a + a * b) / (a + b + c)
            }
            MeanExpr::Complement(c) => c.value(x, &IterationConfig::default())?,
            MeanExpr::Invariant(m) => invariance::invariant_mean_value(m, x, &IterationConfig::default())?,
        };
        if v.is_nan() {
            return Err(MeanError::DomainViolation(format!("{self} evaluated to NaN")));
        }
        if self.is_mean_at(p) {
            Ok(v.clamp(lo, hi))
        } else {
            Ok(v)
        }
    }
}

fn geometric(x: &[f64]) -> f64 {
    (x.iter().map(|v| v.ln()).sum::<f64>() / x.len() as f64).exp()
}

pub(crate) fn min_max(x: &[f64]) -> (f64, f64) {
    x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

impl fmt::Display for MeanExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MeanExpr::Arithmetic => write!(f, "A"),
            MeanExpr::Geometric => write!(f, "G"),
            MeanExpr::Harmonic => write!(f, "H"),
            MeanExpr::Power(r) => write!(f, "Pow[{r}]"),
            MeanExpr::Min => write!(f, "min"),
            MeanExpr::Max => write!(f, "max"),
            MeanExpr::Projection(i) => write!(f, "P{}", i + 1),
            MeanExpr::SubsetArithmetic(s) => write!(f, "A{s}"),
            MeanExpr::HFamily(a) => write!(f, "Hf[{a}]"),
            MeanExpr::BetaType => write!(f, "B"),
            MeanExpr::GiniF => write!(f, "F"),
            MeanExpr::Complement(c) => write!(f, "{}_{}({})", c.kernel(), c.subset(), c.mapping()),
            MeanExpr::Invariant(m) => write!(f, "Inv({m})"),
        }
    }
}

/// A mean-type mapping `M = (M₁, …, M_p)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MeanVector {
    means: Arc<Vec<MeanExpr>>,
}

impl MeanVector {
    pub fn new(means: Vec<MeanExpr>) -> Result<Self> {
        let p = means.len();
        if p < 2 {
            return Err(MeanError::ArityMismatch { expected: 2, got: p });
        }
        if p > IndexSet::MAX_ARITY - 1 {
            return Err(MeanError::ArityMismatch { expected: IndexSet::MAX_ARITY - 1, got: p });
        }
        for m in &means {
            m.check_arity(p)?;
        }
        Ok(MeanVector { means: Arc::new(means) })
    }

    /// `p` copies of the same expression.
    pub fn uniform(expr: MeanExpr, p: usize) -> Result<Self> {
        Self::new(vec![expr; p])
    }

    pub fn arity(&self) -> usize {
        self.means.len()
    }

    pub fn get(&self, i: usize) -> &MeanExpr {
        &self.means[i]
    }

    pub fn iter(&self) -> std::slice::Iter<'_, MeanExpr> {
        self.means.iter()
    }

    pub fn as_slice(&self) -> &[MeanExpr] {
        &self.means
    }

    pub fn check_input(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.arity() {
            return Err(MeanError::ArityMismatch { expected: self.arity(), got: x.len() });
        }
        Ok(())
    }

    /// `M(x) = (M₁(x), …, M_p(x))`.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.check_input(x)?;
        self.means.iter().map(|m| m.eval(x)).collect()
    }
}

impl std::ops::Index<usize> for MeanVector {
    type Output = MeanExpr;

    fn index(&self, i: usize) -> &MeanExpr {
        &self.means[i]
    }
}

impl fmt::Display for MeanVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.means.iter().map(|m| m.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}
