use std::collections::BTreeMap;
use std::fmt;

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::grouprings::AbelianGroup;

use super::CellQuery;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Rule {
    Fbound,
    Thm45,
    Cor46,
    Thm48,
    Thm410,
    Thm412,
    Cor415,
    IcwReduction,
    OrbitDiophantine,
    Idempotent,
    WeilDivisibility,
    Manual,
}

impl Rule {
    pub const ALL: [Rule; 12] = [
        Rule::Fbound,
        Rule::Thm45,
        Rule::Cor46,
        Rule::Thm48,
        Rule::Thm410,
        Rule::Thm412,
        Rule::Cor415,
        Rule::IcwReduction,
        Rule::OrbitDiophantine,
        Rule::Idempotent,
        Rule::WeilDivisibility,
        Rule::Manual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Fbound => "FBOUND",
            Rule::Thm45 => "THM45",
            Rule::Cor46 => "COR46",
            Rule::Thm48 => "THM48",
            Rule::Thm410 => "THM410",
            Rule::Thm412 => "THM412",
            Rule::Cor415 => "COR415",
            Rule::IcwReduction => "ICW_REDUCTION",
            Rule::OrbitDiophantine => "ORBIT_DIOPHANTINE",
            Rule::Idempotent => "IDEMPOTENT",
            Rule::WeilDivisibility => "WEIL_DIVISIBILITY",
            Rule::Manual => "MANUAL",
        }
    }

    pub fn parse(s: &str) -> Option<Rule> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name().eq_ignore_ascii_case(s))
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Conclusion {
    Nonexistent,
    Inconclusive,
}

/// The outcome of one rule on one query, with everything needed to re-check
/// the hypotheses.
#[derive(Debug, Clone, PartialEq)]
pub struct Certificate {
    pub query: CellQuery,
    pub rule: Rule,
    pub params: BTreeMap<String, Value>,
    pub conclusion: Conclusion,
}

impl Certificate {
    pub fn nonexistent(q: &CellQuery, rule: Rule) -> Certificate {
        Certificate {
            query: q.clone(),
            rule,
            params: BTreeMap::new(),
            conclusion: Conclusion::Nonexistent,
        }
    }

    pub fn inconclusive(q: &CellQuery, rule: Rule, reason: &str) -> Certificate {
        Certificate {
            query: q.clone(),
            rule,
            params: BTreeMap::new(),
            conclusion: Conclusion::Inconclusive,
        }
        .param("reason", reason)
    }

    pub fn param(mut self, key: &str, value: impl Serialize) -> Certificate {
        self.params.insert(
            key.to_string(),
            serde_json::to_value(value).expect("serializable param"),
        );
        self
    }

    pub fn is_nonexistent(&self) -> bool {
        self.conclusion == Conclusion::Nonexistent
    }

    pub fn get_u64(&self, key: &str) -> Option<u64> {
        self.params.get(key)?.as_u64()
    }

    pub fn get_group(&self, key: &str) -> Option<AbelianGroup> {
        let cs: Vec<u64> = serde_json::from_value(self.params.get(key)?.clone()).ok()?;
        Some(AbelianGroup::from_cyclic_factors(&cs))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("certificate serializes")
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut m = serde_json::Map::new();
        if self.query.group.is_cyclic() {
            m.insert("v".into(), json!(self.query.group.order()));
        } else {
            m.insert("group".into(), json!(self.query.group.factors()));
        }
        m.insert("n".into(), json!(self.query.n));
        m.insert("a".into(), json!(self.query.a));
        m.insert("rule".into(), json!(self.rule));
        m.insert("params".into(), json!(self.params));
        m.insert("conclusion".into(), json!(self.conclusion));
        Value::Object(m).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Certificate {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Certificate, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            v: Option<u64>,
            group: Option<Vec<u64>>,
            n: u64,
            #[serde(default = "one")]
            a: u64,
            rule: Rule,
            #[serde(default)]
            params: BTreeMap<String, Value>,
            conclusion: Conclusion,
        }
        fn one() -> u64 {
            1
        }
        let raw = Raw::deserialize(d)?;
        let group = match (raw.v, raw.group) {
            (Some(v), None) if v >= 1 => AbelianGroup::cyclic(v),
            (None, Some(g)) => AbelianGroup::new(g).map_err(D::Error::custom)?,
            _ => {
                return Err(D::Error::custom(
                    "exactly one of \"v\" and \"group\" is required",
                ))
            }
        };
        if raw.n == 0 || raw.a == 0 {
            return Err(D::Error::custom("n and a must be positive"));
        }
        Ok(Certificate {
            query: CellQuery {
                group,
                n: raw.n,
                a: raw.a,
            },
            rule: raw.rule,
            params: raw.params,
            conclusion: raw.conclusion,
        })
    }
}

/// Re-derive a NONEXISTENT conclusion from the recorded parameters alone.
/// INCONCLUSIVE certificates claim nothing and always re-check.
pub fn recheck(c: &Certificate) -> bool {
    if !c.is_nonexistent() {
        return true;
    }
    let q = &c.query;
    match c.rule {
        Rule::Fbound => super::recheck_fbound(c),
        Rule::Thm45 | Rule::Cor46 | Rule::Thm48 | Rule::Thm410 | Rule::Thm412 | Rule::Cor415 => {
            super::multiplier::recheck(c)
        }
        Rule::IcwReduction | Rule::OrbitDiophantine => super::reduction::recheck(c),
        Rule::Idempotent | Rule::WeilDivisibility => super::battery::recheck_weil(c),
        Rule::Manual => c.params.contains_key("source") && q.n > 1,
    }
}
