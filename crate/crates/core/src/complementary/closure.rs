//! Breadth-first closure of a mapping under complementary averaging.
//!
//! Starting from `M`, every node spawns `𝐊_S(node)` for each nonempty `S`
//! in ascending bitmask order. Mappings are compared by value: exactly by
//! exponent vector when the kernel is `G` and the root lies in the
//! `H`-family, otherwise by fingerprints (evaluations at seeded sample
//! vectors compared to `1e-9` relative).

use std::fmt::Write as _;

use serde::Serialize;

use super::{build_ks_mapping, ensure_strictly_monotone, ComplementSpec};
use crate::domain::{approx_eq, SampleConfig};
use crate::error::{MeanError, Result};
use crate::expr::{IndexSet, MeanExpr, MeanVector};
use crate::hfamily::{self, ExponentVector};
use crate::invariance;
use crate::rational::Rational;

pub const DEFAULT_MAX_DEPTH: usize = 6;
pub const DEFAULT_BUDGET: usize = 10_000;
pub const FINGERPRINT_SAMPLES: usize = 16;
pub const FINGERPRINT_TOL: f64 = 1e-9;
/// Largest sampled invariance residual accepted for the root mapping.
pub const ROOT_INVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupMode {
    /// Exact exponent vectors when available, fingerprints otherwise.
    Auto,
    /// Fingerprints only.
    Numeric,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosureOptions {
    pub max_depth: usize,
    pub budget: usize,
    pub dedup: DedupMode,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions { max_depth: DEFAULT_MAX_DEPTH, budget: DEFAULT_BUDGET, dedup: DedupMode::Auto }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureNode {
    pub id: usize,
    pub parent: Option<usize>,
    #[serde(rename = "S")]
    pub subset: Option<IndexSet>,
    pub depth: usize,
    pub mapping: MeanVector,
    /// One row per coordinate: values at the fingerprint samples.
    pub fingerprint: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exponents: Option<ExponentVector>,
}

/// A distinct coordinate mean of the family, with the first node where it appears.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoordinateMean {
    pub node: usize,
    pub coordinate: usize,
    pub mean: MeanExpr,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Rational>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosureTree {
    pub kernel: MeanExpr,
    pub dedup: DedupKind,
    pub max_depth: usize,
    pub nodes: Vec<ClosureNode>,
    /// The distinct coordinate means across all nodes.
    pub coordinate_means: Vec<CoordinateMean>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DedupKind {
    Symbolic,
    Numeric,
}

impl ClosureTree {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn root(&self) -> &ClosureNode {
        &self.nodes[0]
    }

    /// Whether some node's fingerprint matches the given mapping's.
    pub fn contains_mapping(&self, m: &MeanVector, samples: &[Vec<f64>]) -> Result<bool> {
        let fp = fingerprint(m, samples)?;
        Ok(self.nodes.iter().any(|n| same_fingerprint(&n.fingerprint, &fp)))
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph closure {\n  node [shape=box];\n");
        for n in &self.nodes {
            let label = match &n.exponents {
                Some(e) => format!("{}: H{}", n.id, e),
                None => format!("{}: {}", n.id, short_label(&n.mapping)),
            };
            let _ = writeln!(out, "  n{} [label=\"{}\"];", n.id, label.replace('"', "'"));
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

fn short_label(m: &MeanVector) -> String {
    let parts: Vec<String> = m
        .iter()
        .map(|e| match e {
            MeanExpr::Complement(c) => format!("{}_{}(·)", c.kernel(), c.subset()),
            other => other.to_string(),
        })
        .collect();
    format!("({})", parts.join(", "))
}

fn fingerprint(m: &MeanVector, samples: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    m.iter().map(|e| coordinate_fingerprint(e, samples)).collect()
}

fn coordinate_fingerprint(e: &MeanExpr, samples: &[Vec<f64>]) -> Result<Vec<f64>> {
    samples.iter().map(|x| e.eval(x)).collect()
}

fn same_row(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(&u, &v)| approx_eq(u, v, FINGERPRINT_TOL))
}

fn same_fingerprint(a: &[Vec<f64>], b: &[Vec<f64>]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(u, v)| same_row(u, v))
}

/// Closure of `M` under `K`-complementary averaging, up to `max_depth` steps.
pub fn closure_generate(k: &MeanExpr, m: &MeanVector, max_depth: usize, cfg: &SampleConfig) -> Result<ClosureTree> {
    let opts = ClosureOptions { max_depth, ..ClosureOptions::default() };
    closure_generate_with(k, m, &opts, cfg)
}

pub fn closure_generate_with(
    k: &MeanExpr,
    m: &MeanVector,
    opts: &ClosureOptions,
    cfg: &SampleConfig,
) -> Result<ClosureTree> {
    let p = m.arity();
    k.check_arity(p)?;
    ensure_strictly_monotone(k, p)?;
    let check = invariance::check_invariance(k, m, cfg)?;
    if check.max_residual > ROOT_INVARIANCE_TOL {
        let x = check.witness.unwrap_or_default();
        let target = k.eval(&x)?;
        let image = k.eval(&m.apply(&x)?)?;
        return Err(MeanError::NotInvariant { x, f_lo: image, f_hi: image, target });
    }

    let samples = SampleConfig { count: FINGERPRINT_SAMPLES, ..*cfg }.points(p);
    let symbolic = match opts.dedup {
        DedupMode::Auto if *k == MeanExpr::Geometric => {
            hfamily::exponent_vector_of(m).filter(|e| e.is_zero_sum().unwrap_or(false))
        }
        _ => None,
    };
    let dedup = if symbolic.is_some() { DedupKind::Symbolic } else { DedupKind::Numeric };

    let mut nodes = vec![ClosureNode {
        id: 0,
        parent: None,
        subset: None,
        depth: 0,
        mapping: m.clone(),
        fingerprint: fingerprint(m, &samples)?,
        exponents: symbolic,
    }];
    let mut cursor = 0;
    while cursor < nodes.len() {
        if nodes[cursor].depth < opts.max_depth {
            for s in IndexSet::nonempty_subsets(p) {
                let parent = &nodes[cursor];
                let exponents = match &parent.exponents {
                    Some(e) => Some(hfamily::symbolic_complement(e, s)?),
                    None => None,
                };
                if let Some(e) = &exponents {
                    if nodes.iter().any(|n| n.exponents.as_ref() == Some(e)) {
                        continue;
                    }
                }
                let spec = ComplementSpec::new_unchecked(k.clone(), parent.mapping.clone(), s)?;
                let mapping = build_ks_mapping(&spec);
                let column = coordinate_fingerprint(&mapping[s.iter().next().expect("nonempty")], &samples)?;
                let fp: Vec<Vec<f64>> = (0..p)
                    .map(|i| if s.contains(i) { column.clone() } else { parent.fingerprint[i].clone() })
                    .collect();
                if exponents.is_none() && nodes.iter().any(|n| same_fingerprint(&n.fingerprint, &fp)) {
                    continue;
                }
                if nodes.len() >= opts.budget {
                    return Err(MeanError::BudgetExceeded(opts.budget));
                }
                let (id, depth) = (nodes.len(), parent.depth + 1);
                nodes.push(ClosureNode {
                    id,
                    parent: Some(cursor),
                    subset: Some(s),
                    depth,
                    mapping,
                    fingerprint: fp,
                    exponents,
                });
            }
        }
        cursor += 1;
    }

    let mut coordinate_means: Vec<CoordinateMean> = Vec::new();
    let mut rows: Vec<&Vec<f64>> = Vec::new();
    for n in &nodes {
        for i in 0..p {
            let alpha = n.exponents.as_ref().map(|e| e.alphas()[i]);
            let seen = match alpha {
                Some(a) => coordinate_means.iter().any(|c| c.alpha == Some(a)),
                None => rows.iter().any(|r| same_row(r, &n.fingerprint[i])),
            };
            if !seen {
                rows.push(&n.fingerprint[i]);
                coordinate_means.push(CoordinateMean {
                    node: n.id,
                    coordinate: i + 1,
                    mean: n.mapping[i].clone(),
                    alpha,
                });
            }
        }
    }

    Ok(ClosureTree { kernel: k.clone(), dedup, max_depth: opts.max_depth, nodes, coordinate_means })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complementary::dual_complement;
    use crate::domain::Domain;

    fn mv(v: Vec<MeanExpr>) -> MeanVector {
        MeanVector::new(v).unwrap()
    }

    fn cfg() -> SampleConfig {
        SampleConfig::new(64, 42, Domain::open(0.0, 10.0))
    }

    fn abb() -> MeanVector {
        mv(vec![MeanExpr::Arithmetic, MeanExpr::BetaType, MeanExpr::BetaType])
    }

    #[test]
    fn two_variable_closure() {
        let ah = mv(vec![MeanExpr::Arithmetic, MeanExpr::Harmonic]);
        for dedup in [DedupMode::Auto, DedupMode::Numeric] {
            let opts = ClosureOptions { max_depth: 2, dedup, ..Default::default() };
            let tree = closure_generate_with(&MeanExpr::Geometric, &ah, &opts, &cfg()).unwrap();
            assert_eq!(tree.len(), 2, "{dedup:?}");
            let g = &tree.nodes[1];
            assert_eq!(g.subset, Some(IndexSet::full(2)));
            let x = [1.0, 4.0];
            for v in g.mapping.apply(&x).unwrap() {
                assert!(approx_eq(v, 2.0, 1e-12));
            }
        }
    }

    #[test]
    fn three_variable_depth_one() {
        for dedup in [DedupMode::Auto, DedupMode::Numeric] {
            let opts = ClosureOptions { max_depth: 1, dedup, ..Default::default() };
            let tree = closure_generate_with(&MeanExpr::Geometric, &abb(), &opts, &cfg()).unwrap();
            assert_eq!(tree.len(), 4, "{dedup:?}");
            let subsets: Vec<Vec<usize>> = tree.nodes[1..].iter().map(|n| n.subset.unwrap().to_one_based()).collect();
            assert_eq!(subsets, vec![vec![1, 2], vec![1, 3], vec![1, 2, 3]]);
        }
    }

    #[test]
    fn numeric_and_symbolic_dedup_agree_at_depth_two() {
        let sym = closure_generate(&MeanExpr::Geometric, &abb(), 2, &cfg()).unwrap();
        let opts = ClosureOptions { max_depth: 2, dedup: DedupMode::Numeric, ..Default::default() };
        let num = closure_generate_with(&MeanExpr::Geometric, &abb(), &opts, &cfg()).unwrap();
        assert_eq!(sym.dedup, DedupKind::Symbolic);
        assert_eq!(num.dedup, DedupKind::Numeric);
        assert_eq!(sym.len(), num.len());
        assert_eq!(sym.coordinate_means.len(), num.coordinate_means.len());
        let exact = hfamily::closure_enumerate(3, 2).unwrap();
        assert_eq!(sym.len(), exact.len());
    }

    #[test]
    fn non_invariant_root_is_rejected() {
        let ag = mv(vec![MeanExpr::Arithmetic, MeanExpr::Geometric]);
        assert!(matches!(closure_generate(&MeanExpr::Arithmetic, &ag, 1, &cfg()), Err(MeanError::NotInvariant { .. })));
    }

    #[test]
    fn budget_cap() {
        let opts = ClosureOptions { max_depth: 3, budget: 3, dedup: DedupMode::Auto };
        assert!(matches!(
            closure_generate_with(&MeanExpr::Geometric, &abb(), &opts, &cfg()),
            Err(MeanError::BudgetExceeded(3))
        ));
    }

    #[test]
    fn dual_mapping_appears_in_the_closure() {
        let tree = closure_generate(&MeanExpr::Geometric, &abb(), 2, &cfg()).unwrap();
        let spec = ComplementSpec::new(MeanExpr::Geometric, abb(), IndexSet::one_based(&[2, 3]).unwrap()).unwrap();
        let ks = build_ks_mapping(&spec);
        let dual = dual_complement(&spec).unwrap();
        let star = mv(vec![dual, ks[1].clone(), ks[2].clone()]);
        let samples = SampleConfig { count: FINGERPRINT_SAMPLES, ..cfg() }.points(3);
        assert!(tree.contains_mapping(&star, &samples).unwrap());
    }

    #[test]
    fn dot_output() {
        let ah = mv(vec![MeanExpr::Arithmetic, MeanExpr::Harmonic]);
        let tree = closure_generate(&MeanExpr::Geometric, &ah, 2, &cfg()).unwrap();
        let dot = tree.to_dot();
        assert!(dot.starts_with("digraph closure {"));
        assert!(dot.contains("n0 -> n1 [label=\"S={1,2}\"]"));
    }
}
