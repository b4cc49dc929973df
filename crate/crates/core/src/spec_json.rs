//! JSON mean-spec format.
//!
//! One object per mean, tagged by `"kind"`:
//!
//! ```json
//! {"kind": "hfamily", "alpha": {"num": 1, "den": 4}}
//! {"kind": "complement", "K": {"kind": "geometric"},
//!  "M": [{"kind": "arithmetic"}, {"kind": "harmonic"}], "S": [2]}
//! ```
//!
//! Indices (`"i"`, `"S"`) are 1-based. A mean-type mapping is a JSON array
//! of mean-specs.

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::complementary::ComplementSpec;
use crate::error::{MeanError, Result};
use crate::expr::{IndexSet, MeanExpr, MeanVector};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MeanSpec {
    Arithmetic,
    Geometric,
    Harmonic,
    Power {
        r: f64,
    },
    Min,
    Max,
    Projection {
        i: usize,
    },
    SubsetArithmetic {
        #[serde(rename = "S")]
        s: Vec<usize>,
    },
    Hfamily {
        alpha: Rational,
    },
    Beta,
    GiniF,
    Complement {
        #[serde(rename = "K")]
        k: Box<MeanSpec>,
        #[serde(rename = "M")]
        m: Vec<MeanSpec>,
        #[serde(rename = "S")]
        s: Vec<usize>,
    },
    Invariant {
        #[serde(rename = "M")]
        m: Vec<MeanSpec>,
    },
}

impl From<&MeanExpr> for MeanSpec {
    fn from(e: &MeanExpr) -> Self {
        match e {
            MeanExpr::Arithmetic => MeanSpec::Arithmetic,
            MeanExpr::Geometric => MeanSpec::Geometric,
            MeanExpr::Harmonic => MeanSpec::Harmonic,
            MeanExpr::Power(r) => MeanSpec::Power { r: *r },
            MeanExpr::Min => MeanSpec::Min,
            MeanExpr::Max => MeanSpec::Max,
            MeanExpr::Projection(i) => MeanSpec::Projection { i: i + 1 },
            MeanExpr::SubsetArithmetic(s) => MeanSpec::SubsetArithmetic { s: s.to_one_based() },
            MeanExpr::HFamily(a) => MeanSpec::Hfamily { alpha: *a },
            MeanExpr::BetaType => MeanSpec::Beta,
            MeanExpr::GiniF => MeanSpec::GiniF,
            MeanExpr::Complement(c) => MeanSpec::Complement {
                k: Box::new(c.kernel().into()),
                m: c.mapping().iter().map(MeanSpec::from).collect(),
                s: c.subset().to_one_based(),
            },
            MeanExpr::Invariant(m) => MeanSpec::Invariant { m: m.iter().map(MeanSpec::from).collect() },
        }
    }
}

fn mapping_from_specs(specs: &[MeanSpec]) -> Result<MeanVector> {
    MeanVector::new(specs.iter().map(MeanExpr::try_from).collect::<Result<Vec<_>>>()?)
}

impl TryFrom<&MeanSpec> for MeanExpr {
    type Error = MeanError;

    fn try_from(spec: &MeanSpec) -> Result<Self> {
        Ok(match spec {
            MeanSpec::Arithmetic => MeanExpr::Arithmetic,
            MeanSpec::Geometric => MeanExpr::Geometric,
            MeanSpec::Harmonic => MeanExpr::Harmonic,
            MeanSpec::Power { r } if r.is_finite() => MeanExpr::Power(*r),
            MeanSpec::Power { r } => return Err(MeanError::InvalidSpec(format!("power exponent {r}"))),
            MeanSpec::Min => MeanExpr::Min,
            MeanSpec::Max => MeanExpr::Max,
            MeanSpec::Projection { i } if *i >= 1 => MeanExpr::Projection(i - 1),
            MeanSpec::Projection { i } => {
                return Err(MeanError::InvalidIndex { index: *i, arity: IndexSet::MAX_ARITY })
            }
            MeanSpec::SubsetArithmetic { s } => {
                let set = IndexSet::one_based(s)?;
                if set.is_empty() {
                    return Err(MeanError::EmptySubset);
                }
                MeanExpr::SubsetArithmetic(set)
            }
            MeanSpec::Hfamily { alpha } => MeanExpr::HFamily(*alpha),
            MeanSpec::Beta => MeanExpr::BetaType,
            MeanSpec::GiniF => MeanExpr::GiniF,
            MeanSpec::Complement { k, m, s } => MeanExpr::complement(ComplementSpec::new(
                MeanExpr::try_from(k.as_ref())?,
                mapping_from_specs(m)?,
                IndexSet::one_based(s)?,
            )?),
            MeanSpec::Invariant { m } => MeanExpr::Invariant(mapping_from_specs(m)?),
        })
    }
}

impl Serialize for MeanExpr {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        MeanSpec::from(self).serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for MeanExpr {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let spec = MeanSpec::deserialize(d)?;
        MeanExpr::try_from(&spec).map_err(serde::de::Error::custom)
    }
}

impl Serialize for MeanVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for MeanVector {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let specs = Vec::<MeanSpec>::deserialize(d)?;
        mapping_from_specs(&specs).map_err(serde::de::Error::custom)
    }
}

impl Serialize for IndexSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.collect_seq(self.to_one_based())
    }
}

impl<'de> Deserialize<'de> for IndexSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let ix = Vec::<usize>::deserialize(d)?;
        IndexSet::one_based(&ix).map_err(serde::de::Error::custom)
    }
}

fn json_err(e: serde_json::Error) -> MeanError {
    MeanError::InvalidSpec(e.to_string())
}

pub fn parse_mean(json: &str) -> Result<MeanExpr> {
    let spec: MeanSpec = serde_json::from_str(json).map_err(json_err)?;
    MeanExpr::try_from(&spec)
}

pub fn parse_mapping(json: &str) -> Result<MeanVector> {
    let specs: Vec<MeanSpec> = serde_json::from_str(json).map_err(json_err)?;
    mapping_from_specs(&specs)
}

pub fn mean_to_json(e: &MeanExpr) -> String {
    serde_json::to_string(e).expect("mean-specs always serialize")
}

pub fn mapping_to_json(m: &MeanVector) -> String {
    serde_json::to_string(m).expect("mean-specs always serialize")
}
