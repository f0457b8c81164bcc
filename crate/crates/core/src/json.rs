//! JSON forms of the library types. Every integer is a decimal string so
//! arbitrarily large denominators survive any consumer; object keys come out
//! in a fixed order.

use std::collections::BTreeSet;

use num_bigint::BigUint;
use serde::Serialize;
use serde_json::Value;
use thiserror::Error;

use crate::construct::ConstructionTrace;
use crate::model::{Decomposition, Term};
use crate::numeric::Rational;
use crate::search::{LengthResult, Prop6Instance, SearchResult};
use crate::verifier::FaithfulnessReport;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JsonError {
    #[error("invalid JSON: {0}")]
    Syntax(String),
    #[error("expected {0}")]
    Shape(String),
    #[error("{0:?} is not a positive decimal integer")]
    Integer(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FractionJson {
    pub num: String,
    pub den: String,
}

impl FractionJson {
    pub fn from_rational(r: &Rational) -> Self {
        FractionJson {
            num: r.numer().to_string(),
            den: r.denom().to_string(),
        }
    }

    pub fn from_term(t: &Term) -> Self {
        FractionJson {
            num: t.num().to_string(),
            den: t.den().to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecompositionJson {
    pub target: FractionJson,
    pub terms: Vec<FractionJson>,
}

impl From<&Decomposition> for DecompositionJson {
    fn from(d: &Decomposition) -> Self {
        DecompositionJson {
            target: FractionJson::from_rational(d.target()),
            terms: d.terms().iter().map(FractionJson::from_term).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationJson {
    pub coefficients: Vec<String>,
    pub value: FractionJson,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReportJson {
    pub faithful: bool,
    pub method: String,
    pub combos_examined: String,
    pub violation: Option<ViolationJson>,
}

impl From<&FaithfulnessReport> for ReportJson {
    fn from(r: &FaithfulnessReport) -> Self {
        ReportJson {
            faithful: r.faithful,
            method: r.method.as_str().to_string(),
            combos_examined: r.combos_examined.to_string(),
            violation: r.violation.as_ref().map(|v| ViolationJson {
                coefficients: v.coefficients.iter().map(|c| c.to_string()).collect(),
                value: FractionJson::from_rational(&v.value),
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct BezoutJson {
    pub y: String,
    pub x: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceJson {
    pub primes_used: Vec<String>,
    pub avoided: Vec<String>,
    pub bezout: Option<BezoutJson>,
    pub progression_steps: String,
    pub branch: Option<String>,
    pub residue: Option<String>,
    pub applied_scaling: Option<String>,
    pub special_case: Option<String>,
    pub seed: String,
}

fn strings(v: &[BigUint]) -> Vec<String> {
    v.iter().map(|x| x.to_string()).collect()
}

impl From<&ConstructionTrace> for TraceJson {
    fn from(t: &ConstructionTrace) -> Self {
        TraceJson {
            primes_used: strings(&t.primes_used),
            avoided: strings(&t.avoided),
            bezout: t.bezout.as_ref().map(|b| BezoutJson {
                y: b.y.to_string(),
                x: b.x.to_string(),
            }),
            progression_steps: t.progression_steps.to_string(),
            branch: t.branch.map(|b| b.as_str().to_string()),
            residue: t.residue.as_ref().map(|r| r.to_string()),
            applied_scaling: t.applied_scaling.as_ref().map(|c| c.to_string()),
            special_case: t.special_case.map(|s| s.as_str().to_string()),
            seed: t.seed.to_string(),
        }
    }
}

pub fn rational_set(set: &BTreeSet<Rational>) -> Vec<FractionJson> {
    set.iter().map(FractionJson::from_rational).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LengthJson {
    pub length: String,
    pub found: Option<DecompositionJson>,
    pub exhausted: bool,
    pub combos: String,
    pub candidates: String,
    pub undecided: String,
}

impl From<&LengthResult> for LengthJson {
    fn from(l: &LengthResult) -> Self {
        LengthJson {
            length: l.length.to_string(),
            found: l.found.as_ref().map(DecompositionJson::from),
            exhausted: l.exhausted,
            combos: l.combos.to_string(),
            candidates: l.candidates.to_string(),
            undecided: l.undecided.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SearchJson {
    pub m: String,
    pub n: String,
    pub max_length: String,
    pub max_denominator: String,
    pub combo_cap: String,
    pub lengths: Vec<LengthJson>,
}

impl From<&SearchResult> for SearchJson {
    fn from(r: &SearchResult) -> Self {
        SearchJson {
            m: r.m.to_string(),
            n: r.n.to_string(),
            max_length: r.budget.max_length.to_string(),
            max_denominator: r.budget.max_denominator.to_string(),
            combo_cap: r.budget.combo_cap.to_string(),
            lengths: r.lengths.iter().map(LengthJson::from).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InstanceJson {
    pub m: String,
    pub n: String,
    pub y2: String,
    pub y: String,
    pub x: String,
    pub decomposition: DecompositionJson,
    pub condition: bool,
    pub report: ReportJson,
}

impl From<&Prop6Instance> for InstanceJson {
    fn from(i: &Prop6Instance) -> Self {
        InstanceJson {
            m: i.m.to_string(),
            n: i.n.to_string(),
            y2: i.y2.to_string(),
            y: i.y.to_string(),
            x: i.x.to_string(),
            decomposition: DecompositionJson::from(&i.decomposition),
            condition: i.condition,
            report: ReportJson::from(&i.report),
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn to_string<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable");
    s.push('\n');
    s
}

fn integer(v: &Value, what: &str) -> Result<BigUint, JsonError> {
    let text = match v {
        Value::String(s) => s.trim().to_string(),
        Value::Number(n) if n.is_u64() => n.to_string(),
        _ => return Err(JsonError::Shape(format!("{what} as a decimal string"))),
    };
    match text.parse::<BigUint>() {
        Ok(x) if x > BigUint::from(0u32) => Ok(x),
        _ => Err(JsonError::Integer(text)),
    }
}

fn fraction(v: &Value, what: &str) -> Result<(BigUint, BigUint), JsonError> {
    let obj = v
        .as_object()
        .ok_or_else(|| JsonError::Shape(format!("{what} as an object with num and den")))?;
    let num = obj
        .get("num")
        .ok_or_else(|| JsonError::Shape(format!("{what}.num")))?;
    let den = obj
        .get("den")
        .ok_or_else(|| JsonError::Shape(format!("{what}.den")))?;
    Ok((integer(num, &format!("{what}.num"))?, integer(den, &format!("{what}.den"))?))
}

/// Reads a decomposition from its JSON form, also accepting it wrapped in a
/// `decomposition` or `combined` field (as produced by `decompose`).
/// Terms keep their written form; validity is not checked here.
pub fn parse_decomposition(text: &str) -> Result<Decomposition, JsonError> {
    let value: Value = serde_json::from_str(text).map_err(|e| JsonError::Syntax(e.to_string()))?;
    decomposition_from_value(&value)
}

pub fn decomposition_from_value(value: &Value) -> Result<Decomposition, JsonError> {
    let obj = value
        .as_object()
        .ok_or_else(|| JsonError::Shape("a JSON object".into()))?;
    if !obj.contains_key("terms") {
        for key in ["decomposition", "combined"] {
            if let Some(inner) = obj.get(key) {
                return decomposition_from_value(inner);
            }
        }
        return Err(JsonError::Shape("an object with target and terms".into()));
    }
    let (m, n) = fraction(
        obj.get("target")
            .ok_or_else(|| JsonError::Shape("target".into()))?,
        "target",
    )?;
    let terms = obj
        .get("terms")
        .and_then(Value::as_array)
        .ok_or_else(|| JsonError::Shape("terms as an array".into()))?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let (a, b) = fraction(t, &format!("terms[{i}]"))?;
            Ok(Term::new(a, b).expect("positive parts"))
        })
        .collect::<Result<Vec<_>, JsonError>>()?;
    Ok(Decomposition::new(Rational::from_parts(&m, &n), terms))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::decomposition_from;
    use crate::verifier::verify;

    #[test]
    fn decomposition_round_trip() {
        let d = decomposition_from((7, 3), &[(4, 5), (6, 7), (48, 71), (1, 7455)]);
        let text = to_string(&DecompositionJson::from(&d));
        assert!(text.contains("\"7455\""));
        assert_eq!(parse_decomposition(&text).unwrap(), d);
    }

    #[test]
    fn wrapped_inputs_are_accepted() {
        let d = decomposition_from((2, 3), &[(1, 2), (1, 6)]);
        let inner = serde_json::to_value(DecompositionJson::from(&d)).unwrap();
        for key in ["decomposition", "combined"] {
            let wrapped = serde_json::json!({ key: inner.clone(), "strategy": "x" });
            assert_eq!(decomposition_from_value(&wrapped).unwrap(), d);
        }
    }

    #[test]
    fn written_numerators_survive() {
        let text = r#"{"target":{"num":"1","den":"2"},"terms":[{"num":"2","den":"8"},{"num":"1","den":"4"}]}"#;
        let d = parse_decomposition(text).unwrap();
        assert_eq!(d.terms()[0].num(), &BigUint::from(2u32));
    }

    #[test]
    fn malformed_inputs_are_rejected() {
        assert!(matches!(parse_decomposition("{"), Err(JsonError::Syntax(_))));
        assert!(matches!(parse_decomposition("[]"), Err(JsonError::Shape(_))));
        let zero = r#"{"target":{"num":"1","den":"2"},"terms":[{"num":"0","den":"2"}]}"#;
        assert!(matches!(parse_decomposition(zero), Err(JsonError::Integer(_))));
        let neg = r#"{"target":{"num":"1","den":"2"},"terms":[{"num":"-1","den":"2"}]}"#;
        assert!(matches!(parse_decomposition(neg), Err(JsonError::Integer(_))));
    }

    #[test]
    fn report_serializes_violation() {
        let d = decomposition_from((5, 6), &[(1, 2), (1, 3)]);
        let json = ReportJson::from(&verify(&d).unwrap());
        let text = to_string(&json);
        assert!(text.contains("\"faithful\": false"));
        assert_eq!(json.violation.unwrap().coefficients, vec!["1", "0"]);
    }
}
