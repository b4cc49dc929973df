//! The family `H_{p,α}(x) = g^(1-α) · a^α`, with `g` the geometric and `a`
//! the arithmetic mean of `x`, and its exact exponent calculus.
//!
//! Under the geometric mean the family composes by averaging exponents:
//! `G ∘ (H_{α₁}, …, H_{α_p}) = H_{(α₁+⋯+α_p)/p}`. So `G` is invariant for the
//! mapping exactly when the exponents sum to zero, and the `G`-complementary
//! average of the coordinates in `S` is `H_β` with `β` the mean of
//! `{α_i : i ∈ S}`. Closures of exponent vectors under that rule are
//! enumerated here with exact rationals.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::domain::SampleConfig;
use crate::error::{MeanError, Result};
use crate::expr::{IndexSet, MeanExpr, MeanVector};
use crate::invariance;
use crate::rational::Rational;

/// Default node cap for exponent closures.
pub const DEFAULT_BUDGET: usize = 10_000;
/// Default depth for exponent closures.
pub const DEFAULT_MAX_DEPTH: usize = 6;

/// `-1/(p-1)`, the exponent of the Beta-type mean.
pub fn beta_exponent(p: usize) -> Rational {
    assert!(p >= 2, "Beta-type mean needs p >= 2");
    Rational::new(-1, p as i64 - 1).expect("nonzero denominator")
}

/// `α ∈ [-1/(p-1), 1]`, the window where `H_{p,α}` is a strict mean.
pub fn in_mean_window(p: usize, alpha: Rational) -> bool {
    if p < 2 {
        return true;
    }
    alpha >= beta_exponent(p) && alpha <= Rational::ONE
}

pub(crate) fn hfam_unchecked(alpha: f64, x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let log_g = x.iter().map(|v| v.ln()).sum::<f64>() / n;
    let log_a = (x.iter().sum::<f64>() / n).ln();
    ((1.0 - alpha) * log_g + alpha * log_a).exp()
}

pub(crate) fn beta_unchecked(x: &[f64]) -> f64 {
    hfam_unchecked(-1.0 / (x.len() as f64 - 1.0), x)
}

fn check_len(p: usize, x: &[f64]) -> Result<()> {
    if p < 2 {
        return Err(MeanError::ArityMismatch { expected: 2, got: p });
    }
    if x.len() != p {
        return Err(MeanError::ArityMismatch { expected: p, got: x.len() });
    }
    Ok(())
}

/// Evaluates `H_{p,α}` at a positive vector of length `p`.
pub fn hfam_eval(p: usize, alpha: Rational, x: &[f64]) -> Result<f64> {
    check_len(p, x)?;
    MeanExpr::HFamily(alpha).eval(x)
}

/// Evaluates the Beta-type mean `B_p` at a positive vector of length `p`.
pub fn beta_eval(p: usize, x: &[f64]) -> Result<f64> {
    check_len(p, x)?;
    MeanExpr::BetaType.eval(x)
}

/// Exponent vector `(α₁, …, α_p)` standing for the mapping `(H_{p,α₁}, …, H_{p,α_p})`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawExponentVector")]
pub struct ExponentVector {
    p: usize,
    alphas: Vec<Rational>,
}

#[derive(Deserialize)]
struct RawExponentVector {
    p: usize,
    alphas: Vec<Rational>,
}

impl TryFrom<RawExponentVector> for ExponentVector {
    type Error = MeanError;

    fn try_from(raw: RawExponentVector) -> Result<Self> {
        if raw.alphas.len() != raw.p {
            return Err(MeanError::ArityMismatch { expected: raw.p, got: raw.alphas.len() });
        }
        ExponentVector::new(raw.alphas)
    }
}

impl ExponentVector {
    pub fn new(alphas: Vec<Rational>) -> Result<Self> {
        let p = alphas.len();
        if !(2..IndexSet::MAX_ARITY).contains(&p) {
            return Err(MeanError::ArityMismatch { expected: 2, got: p });
        }
        Ok(ExponentVector { p, alphas })
    }

    /// `(1, -1/(p-1), …, -1/(p-1))`, i.e. `(A, B_p, …, B_p)`.
    pub fn beta_root(p: usize) -> Self {
        let mut alphas = vec![beta_exponent(p); p];
        alphas[0] = Rational::ONE;
        ExponentVector { p, alphas }
    }

    pub fn arity(&self) -> usize {
        self.p
    }

    pub fn alphas(&self) -> &[Rational] {
        &self.alphas
    }

    pub fn sum(&self) -> Result<Rational> {
        Rational::sum(self.alphas.iter().copied())
    }

    pub fn is_zero_sum(&self) -> Result<bool> {
        Ok(self.sum()?.is_zero())
    }

    pub fn to_mapping(&self) -> MeanVector {
        MeanVector::new(self.alphas.iter().map(|&a| MeanExpr::HFamily(a)).collect())
            .expect("arity validated on construction")
    }
}

impl std::fmt::Display for ExponentVector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.alphas.iter().map(|a| a.to_string()).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// Exponent of `G ∘ (H_{α₁}, …, H_{α_p})`, namely `(α₁+⋯+α_p)/p`.
pub fn compose_under_g(alphas: &ExponentVector) -> Result<Rational> {
    alphas.sum()?.checked_div(Rational::integer(alphas.p as i64))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CompositionReport {
    /// Exponents sum to zero.
    pub symbolic: bool,
    /// Largest sampled `|G(H(x)) - G(x)| / max(1, G(x))`.
    pub residual: f64,
    pub witness: Option<Vec<f64>>,
    /// The symbolic verdict and `residual < cfg.tol` agree.
    pub consistent: bool,
}

/// Checks `G ∘ (H_{α₁}, …, H_{α_p}) = G` both exactly (zero exponent sum)
/// and numerically on samples.
pub fn check_composition(alphas: &ExponentVector, cfg: &SampleConfig) -> Result<CompositionReport> {
    let symbolic = alphas.is_zero_sum()?;
    let report = invariance::check_invariance(&MeanExpr::Geometric, &alphas.to_mapping(), cfg)?;
    Ok(CompositionReport {
        symbolic,
        residual: report.max_residual,
        witness: report.witness,
        consistent: symbolic == (report.max_residual < cfg.tol),
    })
}

/// Replaces `α_i` for `i ∈ S` by `β = (1/|S|) Σ_{i∈S} α_i`.
pub fn symbolic_complement(alphas: &ExponentVector, s: IndexSet) -> Result<ExponentVector> {
    if s.is_empty() {
        return Err(MeanError::EmptySubset);
    }
    s.check_within(alphas.p)?;
    let total = alphas.sum()?;
    if !total.is_zero() {
        return Err(MeanError::NonInvariantRoot(total.to_string()));
    }
    let beta = Rational::sum(s.iter().map(|i| alphas.alphas[i]))?.checked_div(Rational::integer(s.len() as i64))?;
    let mut out = alphas.clone();
    for i in s.iter() {
        out.alphas[i] = beta;
    }
    Ok(out)
}

/// Identifies `expr` as a member `H_{p,α}` of the family at arity `p`, if it is
/// one: the arithmetic and geometric means, `B_p`, the harmonic mean at
/// `p = 2`, and `G`-complements of family mappings with zero exponent sum.
pub fn exponent_of(expr: &MeanExpr, p: usize) -> Option<Rational> {
    match expr {
        MeanExpr::Arithmetic => Some(Rational::ONE),
        MeanExpr::Geometric => Some(Rational::ZERO),
        MeanExpr::Power(r) if *r == 0.0 => Some(Rational::ZERO),
        MeanExpr::Power(r) if *r == 1.0 => Some(Rational::ONE),
        MeanExpr::HFamily(a) => Some(*a),
        MeanExpr::BetaType if p >= 2 => Some(beta_exponent(p)),
        MeanExpr::Harmonic if p == 2 => Some(Rational::integer(-1)),
        MeanExpr::Complement(c) if *c.kernel() == MeanExpr::Geometric => {
            let parent = exponent_vector_of(c.mapping())?;
            let child = symbolic_complement(&parent, c.subset()).ok()?;
            c.subset().iter().next().map(|i| child.alphas[i])
        }
        _ => None,
    }
}

/// Exponent vector of a mapping whose coordinates all belong to the family.
pub fn exponent_vector_of(m: &MeanVector) -> Option<ExponentVector> {
    let p = m.arity();
    let alphas = m.iter().map(|e| exponent_of(e, p)).collect::<Option<Vec<_>>>()?;
    ExponentVector::new(alphas).ok()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureEntry {
    pub id: usize,
    pub parent: Option<usize>,
    #[serde(rename = "S")]
    pub subset: Option<IndexSet>,
    pub depth: usize,
    pub alphas: ExponentVector,
}

/// Exponent vectors reachable from a root by repeated symbolic complements.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymbolicClosure {
    pub p: usize,
    pub max_depth: usize,
    pub root: ExponentVector,
    pub nodes: Vec<ClosureEntry>,
}

impl SymbolicClosure {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn vectors(&self) -> impl Iterator<Item = &ExponentVector> {
        self.nodes.iter().map(|n| &n.alphas)
    }

    pub fn contains(&self, v: &ExponentVector) -> bool {
        self.vectors().any(|w| w == v)
    }

    /// Adds a vector without checking how it was reached.
    pub fn push_unchecked(&mut self, alphas: ExponentVector) {
        let id = self.nodes.len();
        self.nodes.push(ClosureEntry { id, parent: None, subset: None, depth: 0, alphas });
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph closure {\n  node [shape=box];\n");
        for n in &self.nodes {
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, n.alphas);
        }
        for n in &self.nodes {
            if let (Some(parent), Some(s)) = (n.parent, n.subset) {
                let _ = writeln!(out, "  n{parent} -> n{} [label=\"S={s}\"];", n.id);
            }
        }
        out.push_str("}\n");
        out
    }
}

/// Breadth-first closure of `(A, B_p, …, B_p)` under symbolic complements.
pub fn closure_enumerate(p: usize, max_depth: usize) -> Result<SymbolicClosure> {
    if p < 2 {
        return Err(MeanError::ArityMismatch { expected: 2, got: p });
    }
    closure_enumerate_from(&ExponentVector::beta_root(p), max_depth, DEFAULT_BUDGET)
}

/// Breadth-first closure of any zero-sum root. Children of a node are taken
/// over nonempty subsets in ascending bitmask order, so ids are reproducible.
pub fn closure_enumerate_from(root: &ExponentVector, max_depth: usize, budget: usize) -> Result<SymbolicClosure> {
    let total = root.sum()?;
    if !total.is_zero() {
        return Err(MeanError::NonInvariantRoot(total.to_string()));
    }
    let p = root.arity();
    let mut seen: HashMap<ExponentVector, usize> = HashMap::new();
    let mut nodes = vec![ClosureEntry { id: 0, parent: None, subset: None, depth: 0, alphas: root.clone() }];
    seen.insert(root.clone(), 0);
    let mut cursor = 0;
    while cursor < nodes.len() {
        let (depth, parent) = (nodes[cursor].depth, nodes[cursor].alphas.clone());
        if depth < max_depth {
            for s in IndexSet::nonempty_subsets(p) {
                let child = symbolic_complement(&parent, s)?;
                if seen.contains_key(&child) {
                    continue;
                }
                if nodes.len() >= budget {
                    return Err(MeanError::BudgetExceeded(budget));
                }
                let id = nodes.len();
                seen.insert(child.clone(), id);
                nodes.push(ClosureEntry { id, parent: Some(cursor), subset: Some(s), depth: depth + 1, alphas: child });
            }
        }
        cursor += 1;
    }
    Ok(SymbolicClosure { p, max_depth, root: root.clone(), nodes })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: usize,
    pub alphas: ExponentVector,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub holds: bool,
    pub violation: Option<Violation>,
}

impl VerificationReport {
    fn from_violation(violation: Option<Violation>) -> Self {
        VerificationReport { holds: violation.is_none(), violation }
    }
}

pub fn largest_prime_factor(mut n: u64) -> u64 {
    let mut largest = 1;
    let mut f = 2;
    while f * f <= n {
        while n.is_multiple_of(f) {
            largest = f;
            n /= f;
        }
        f += 1;
    }
    if n > 1 {
        largest = n;
    }
    largest
}

/// Every exponent denominator factors over primes `<= p`.
pub fn verify_denominators(closure: &SymbolicClosure) -> VerificationReport {
    let p = closure.p as u64;
    let violation = closure.nodes.iter().find_map(|n| {
        n.alphas.alphas().iter().find(|a| largest_prime_factor(a.denom() as u64) > p).map(|a| Violation {
            node: n.id,
            alphas: n.alphas.clone(),
            reason: format!("denominator of {a} has a prime factor above {p}"),
        })
    });
    VerificationReport::from_violation(violation)
}

/// Every vector sums to zero and has all entries in `[-1/(p-1), 1]`.
pub fn verify_membership(closure: &SymbolicClosure) -> Result<VerificationReport> {
    for n in &closure.nodes {
        let sum = n.alphas.sum()?;
        let reason = if !sum.is_zero() {
            Some(format!("exponents sum to {sum}"))
        } else {
            n.alphas
                .alphas()
                .iter()
                .find(|&&a| !in_mean_window(closure.p, a))
                .map(|a| format!("{a} lies outside [{}, 1]", beta_exponent(closure.p)))
        };
        if let Some(reason) = reason {
            return Ok(VerificationReport::from_violation(Some(Violation {
                node: n.id,
                alphas: n.alphas.clone(),
                reason,
            })));
        }
    }
    Ok(VerificationReport::from_violation(None))
}

/// Numeric check of the composition identity on samples; returns the largest
/// relative deviation.
pub fn composition_residual(alphas: &ExponentVector, cfg: &SampleConfig) -> Result<f64> {
    let composed = compose_under_g(alphas)?;
    let mapping = alphas.to_mapping();
    let mut worst: f64 = 0.0;
    for x in cfg.points(alphas.p) {
        let lhs = MeanExpr::Geometric.eval(&mapping.apply(&x)?)?;
        let rhs = hfam_eval(alphas.p, composed, &x)?;
        worst = worst.max(crate::domain::rel_diff(lhs, rhs));
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{approx_eq, Domain};

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d).unwrap()
    }

    fn ev(v: &[(i64, i64)]) -> ExponentVector {
        ExponentVector::new(v.iter().map(|&(n, d)| r(n, d)).collect()).unwrap()
    }

    #[test]
    fn evaluation_examples() {
        let x = [1.0, 2.0, 3.0];
        assert!(approx_eq(hfam_eval(3, Rational::ONE, &x).unwrap(), 2.0, 1e-15));
        assert!(approx_eq(hfam_eval(3, r(-1, 2), &x).unwrap(), 3f64.sqrt(), 1e-15));
        assert!(approx_eq(hfam_eval(3, r(1, 4), &x).unwrap(), 12f64.powf(0.25), 1e-15));
        assert!(approx_eq(beta_eval(2, &[1.0, 4.0]).unwrap(), 1.6, 1e-15));
        assert!(approx_eq(beta_eval(3, &x).unwrap(), 3f64.sqrt(), 1e-15));
        assert_eq!(beta_eval(3, &[2.5, 2.5, 2.5]).unwrap(), 2.5);
        assert!(matches!(hfam_eval(3, Rational::ONE, &[1.0, 0.0, 2.0]), Err(MeanError::DomainViolation(_))));
        assert!(matches!(beta_eval(3, &[1.0, 2.0]), Err(MeanError::ArityMismatch { .. })));
    }

    #[test]
    fn beta_matches_family_member_to_a_few_ulps() {
        let cfg = SampleConfig::new(1000, 5, Domain::open(0.0, 10.0));
        for p in 2..=6 {
            for x in cfg.points(p) {
                let b = beta_eval(p, &x).unwrap();
                let h = hfam_eval(p, beta_exponent(p), &x).unwrap();
                assert!((b - h).abs() <= 4.0 * f64::EPSILON * b, "p={p} {x:?}: {b} vs {h}");
            }
        }
    }

    #[test]
    fn composition_examples() {
        assert_eq!(compose_under_g(&ev(&[(1, 1), (-1, 2), (-1, 2)])).unwrap(), Rational::ZERO);
        assert_eq!(compose_under_g(&ev(&[(1, 1), (1, 1)])).unwrap(), Rational::ONE);
        assert_eq!(compose_under_g(&ev(&[(1, 1), (0, 1), (-1, 2)])).unwrap(), r(1, 6));
    }

    #[test]
    fn composition_identity_holds_numerically() {
        let cfg = SampleConfig::new(200, 9, Domain::open(0.0, 10.0));
        for v in [ev(&[(1, 1), (0, 1), (-1, 2)]), ev(&[(3, 2), (-2, 1), (1, 4), (1, 3)])] {
            assert!(composition_residual(&v, &cfg).unwrap() < 1e-12);
        }
    }

    #[test]
    fn composition_examples_are_consistent() {
        let cfg = SampleConfig::new(200, 42, Domain::open(0.0, 10.0));
        let root = check_composition(&ev(&[(1, 1), (-1, 2), (-1, 2)]), &cfg).unwrap();
        assert!(root.symbolic && root.consistent && root.residual < 1e-12);
        let off = check_composition(&ev(&[(1, 1), (0, 1), (0, 1)]), &cfg).unwrap();
        assert!(!off.symbolic && off.consistent && off.residual > 0.0);
        assert!(off.witness.is_some());
        let zero = check_composition(&ev(&[(0, 1), (0, 1), (0, 1)]), &cfg).unwrap();
        assert!(zero.symbolic && zero.consistent);
        // G∘(A,G,G) = H_{1/3} differs from G at (1,2,3).
        let x = [1.0, 2.0, 3.0];
        let lhs = MeanExpr::Geometric.eval(&ev(&[(1, 1), (0, 1), (0, 1)]).to_mapping().apply(&x).unwrap()).unwrap();
        assert!(approx_eq(lhs, hfam_eval(3, r(1, 3), &x).unwrap(), 1e-14));
        assert!((lhs - MeanExpr::Geometric.eval(&x).unwrap()).abs() > 1e-3);
    }

    #[test]
    fn symbolic_complement_examples() {
        let root = ExponentVector::beta_root(3);
        assert_eq!(
            symbolic_complement(&root, IndexSet::one_based(&[1, 2]).unwrap()).unwrap(),
            ev(&[(1, 4), (1, 4), (-1, 2)])
        );
        assert_eq!(symbolic_complement(&root, IndexSet::one_based(&[2, 3]).unwrap()).unwrap(), root);
        assert_eq!(symbolic_complement(&root, IndexSet::full(3)).unwrap(), ev(&[(0, 1), (0, 1), (0, 1)]));
        assert!(matches!(symbolic_complement(&root, IndexSet::empty()), Err(MeanError::EmptySubset)));
        assert!(matches!(
            symbolic_complement(&ev(&[(1, 1), (0, 1)]), IndexSet::full(2)),
            Err(MeanError::NonInvariantRoot(_))
        ));
    }

    #[test]
    fn enumeration_examples() {
        let two = closure_enumerate(2, 3).unwrap();
        assert_eq!(two.len(), 2);
        assert!(two.contains(&ev(&[(1, 1), (-1, 1)])));
        assert!(two.contains(&ev(&[(0, 1), (0, 1)])));

        let three = closure_enumerate(3, 1).unwrap();
        let found: Vec<_> = three.vectors().cloned().collect();
        assert_eq!(
            found,
            vec![
                ExponentVector::beta_root(3),
                ev(&[(1, 4), (1, 4), (-1, 2)]),
                ev(&[(1, 4), (-1, 2), (1, 4)]),
                ev(&[(0, 1), (0, 1), (0, 1)]),
            ]
        );
        assert_eq!(three.nodes[1].subset.unwrap().to_one_based(), vec![1, 2]);
    }

    #[test]
    fn denominators_and_membership() {
        let c = closure_enumerate(3, 4).unwrap();
        assert!(verify_denominators(&c).holds);
        assert!(verify_membership(&c).unwrap().holds);
        assert!(verify_denominators(&closure_enumerate(2, 5).unwrap()).holds);
        let mut bad = closure_enumerate(3, 1).unwrap();
        bad.push_unchecked(ev(&[(1, 5), (-1, 5), (0, 1)]));
        let report = verify_denominators(&bad);
        assert!(!report.holds);
        assert_eq!(report.violation.unwrap().node, 4);
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(
            closure_enumerate_from(&ExponentVector::beta_root(4), 6, 10),
            Err(MeanError::BudgetExceeded(10))
        ));
    }

    #[test]
    fn exponent_identification() {
        assert_eq!(exponent_of(&MeanExpr::BetaType, 4), Some(r(-1, 3)));
        assert_eq!(exponent_of(&MeanExpr::Harmonic, 2), Some(r(-1, 1)));
        assert_eq!(exponent_of(&MeanExpr::Harmonic, 3), None);
        assert_eq!(exponent_of(&MeanExpr::GiniF, 3), None);
    }

    #[test]
    fn prime_factors() {
        assert_eq!(largest_prime_factor(1), 1);
        assert_eq!(largest_prime_factor(12), 3);
        assert_eq!(largest_prime_factor(35), 7);
        assert_eq!(largest_prime_factor(97), 97);
    }

    #[test]
    fn exponent_vector_json() {
        let v = ev(&[(1, 4), (-1, 2), (1, 4)]);
        let json = serde_json::to_string(&v).unwrap();
        assert_eq!(json, r#"{"p":3,"alphas":[{"num":1,"den":4},{"num":-1,"den":2},{"num":1,"den":4}]}"#);
        let back: ExponentVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
        assert!(serde_json::from_str::<ExponentVector>(r#"{"p":3,"alphas":[{"num":1,"den":1}]}"#).is_err());
    }
}
