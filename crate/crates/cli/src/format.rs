//! The fibration file format: UTF-8 JSON documents with a fixed field
//! layout, all curve-class entries as decimal strings to preserve
//! arbitrary precision. Emission is canonical (fixed key order, pretty
//! printed), so parse/emit round-trips are byte-identical.

use num_bigint::BigInt;
use serde_json::{json, Map, Value};
use std::str::FromStr;
use thiserror::Error;

use fibercalc_core::error::FibrationError;
use fibercalc_core::fibration::{
    Asserted, Body, DeclaredInvariants, Fibration, FibrationKind, Section,
};
use fibercalc_core::linalg::AbelianGroup;
use fibercalc_core::monodromy::{
    CurveClass, Handle, MonodromyFactorization, SpElement, TwistLetter,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("parse error: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema violation at {path}: {message}")]
    Schema { path: String, message: String },
    #[error("invalid fibration: {0}")]
    Fibration(#[from] FibrationError),
}

impl FormatError {
    fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        FormatError::Schema {
            path: path.into(),
            message: message.into(),
        }
    }

    /// True when the document parsed but the described object is
    /// mathematically inadmissible (relation failure, contradictory
    /// declarations) rather than malformed.
    pub fn is_mathematical(&self) -> bool {
        matches!(
            self,
            FormatError::Fibration(
                FibrationError::RelationFails(_)
                    | FibrationError::ContradictoryDeclaration(_)
                    | FibrationError::EmptyCriticalLocus
                    | FibrationError::BundleWithCycles(_)
            )
        )
    }
}

/// Free-form document metadata.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Meta {
    pub name: String,
    pub citation: String,
}

fn get<'v>(map: &'v Map<String, Value>, path: &str, key: &str) -> Result<&'v Value, FormatError> {
    map.get(key)
        .ok_or_else(|| FormatError::at(format!("{}.{}", path, key), "missing field"))
}

fn as_object<'v>(v: &'v Value, path: &str) -> Result<&'v Map<String, Value>, FormatError> {
    v.as_object()
        .ok_or_else(|| FormatError::at(path, "expected an object"))
}

fn as_array<'v>(v: &'v Value, path: &str) -> Result<&'v Vec<Value>, FormatError> {
    v.as_array()
        .ok_or_else(|| FormatError::at(path, "expected an array"))
}

fn as_string<'v>(v: &'v Value, path: &str) -> Result<&'v str, FormatError> {
    v.as_str()
        .ok_or_else(|| FormatError::at(path, "expected a string"))
}

fn as_bool(v: &Value, path: &str) -> Result<bool, FormatError> {
    v.as_bool()
        .ok_or_else(|| FormatError::at(path, "expected a boolean"))
}

fn as_i64(v: &Value, path: &str) -> Result<i64, FormatError> {
    v.as_i64()
        .ok_or_else(|| FormatError::at(path, "expected an integer"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize, FormatError> {
    let n = as_i64(v, path)?;
    usize::try_from(n).map_err(|_| FormatError::at(path, "expected a non-negative integer"))
}

fn parse_bigint(v: &Value, path: &str) -> Result<BigInt, FormatError> {
    let s = as_string(v, path)?;
    BigInt::from_str(s.trim()).map_err(|_| {
        FormatError::at(
            path,
            format!("expected a decimal-string integer, got {:?}", s),
        )
    })
}

fn parse_letter(v: &Value, path: &str, genus: usize) -> Result<TwistLetter, FormatError> {
    let map = as_object(v, path)?;
    let class_path = format!("{}.class", path);
    let class_vals = as_array(get(map, path, "class")?, &class_path)?;
    let klass: Vec<BigInt> = class_vals
        .iter()
        .enumerate()
        .map(|(i, e)| parse_bigint(e, &format!("{}[{}]", class_path, i)))
        .collect::<Result<_, _>>()?;
    let power = as_i64(get(map, path, "power")?, &format!("{}.power", path))?;
    let separating = as_bool(
        get(map, path, "separating")?,
        &format!("{}.separating", path),
    )?;
    let class = CurveClass::new(genus, klass, separating)
        .map_err(|e| FormatError::at(path, e.to_string()))?;
    Ok(TwistLetter::new(class, power))
}

fn parse_word(v: &Value, path: &str, genus: usize) -> Result<Vec<TwistLetter>, FormatError> {
    as_array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, l)| parse_letter(l, &format!("{}[{}]", path, i), genus))
        .collect()
}

fn parse_h1(v: &Value, path: &str) -> Result<AbelianGroup, FormatError> {
    let map = as_object(v, path)?;
    let rank = as_usize(get(map, path, "rank")?, &format!("{}.rank", path))?;
    let torsion_path = format!("{}.torsion", path);
    let torsion: Vec<BigInt> = as_array(get(map, path, "torsion")?, &torsion_path)?
        .iter()
        .enumerate()
        .map(|(i, t)| {
            let p = format!("{}[{}]", torsion_path, i);
            match t {
                Value::Number(_) => as_i64(t, &p).map(BigInt::from),
                Value::String(_) => parse_bigint(t, &p),
                _ => Err(FormatError::at(p, "expected an integer")),
            }
        })
        .collect::<Result<_, _>>()?;
    Ok(AbelianGroup::from_invariants(rank, &torsion))
}

/// Parse a fibration document. Structural checks come first with
/// field-level paths; the core constructor then enforces the homological
/// relation and declaration cross-checks.
pub fn parse_fibration(text: &str) -> Result<(Fibration, Meta), FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let root = as_object(&value, "$")?;
    let kind = match as_string(get(root, "$", "kind")?, "$.kind")? {
        "bundle" => FibrationKind::Bundle,
        "lefschetz" => FibrationKind::Lefschetz,
        other => {
            return Err(FormatError::at(
                "$.kind",
                format!("expected \"bundle\" or \"lefschetz\", got {:?}", other),
            ))
        }
    };
    let fiber_genus = as_usize(get(root, "$", "fiber_genus")?, "$.fiber_genus")?;
    let base_genus = as_usize(get(root, "$", "base_genus")?, "$.base_genus")?;
    let body_tag = as_string(get(root, "$", "body")?, "$.body")?;
    let genus_cap = match body_tag {
        "explicit" => 256, // dense 2g x 2g matrices back every computation
        _ => 1_000_000,
    };
    if fiber_genus > genus_cap || base_genus > genus_cap {
        return Err(FormatError::at(
            "$.fiber_genus",
            format!("genus beyond the supported bound {}", genus_cap),
        ));
    }
    let body = match body_tag {
        "explicit" => {
            let handles_path = "$.handles";
            let handles: Vec<Handle> = as_array(get(root, "$", "handles")?, handles_path)?
                .iter()
                .enumerate()
                .map(|(i, h)| {
                    let path = format!("{}[{}]", handles_path, i);
                    let map = as_object(h, &path)?;
                    Ok(Handle {
                        alpha: parse_word(
                            get(map, &path, "alpha")?,
                            &format!("{}.alpha", path),
                            fiber_genus,
                        )?,
                        beta: parse_word(
                            get(map, &path, "beta")?,
                            &format!("{}.beta", path),
                            fiber_genus,
                        )?,
                    })
                })
                .collect::<Result<_, FormatError>>()?;
            let vanishing_cycles = parse_word(
                get(root, "$", "vanishing_cycles")?,
                "$.vanishing_cycles",
                fiber_genus,
            )?;
            Body::Explicit(MonodromyFactorization {
                fiber_genus,
                base_genus,
                handles,
                vanishing_cycles,
            })
        }
        "opaque" => {
            let signature = match get(root, "$", "signature")? {
                Value::Null => None,
                v => Some(as_i64(v, "$.signature")?),
            };
            Body::Opaque(DeclaredInvariants {
                euler: as_i64(get(root, "$", "euler")?, "$.euler")?,
                signature,
                h1: parse_h1(get(root, "$", "h1")?, "$.h1")?,
                fiber_primitive: as_bool(get(root, "$", "fiber_primitive")?, "$.fiber_primitive")?,
                nontorsion_fiber_curve_exists: as_bool(
                    get(root, "$", "nontorsion_fiber_curve_exists")?,
                    "$.nontorsion_fiber_curve_exists",
                )?,
                torsion_fiber_curve_exists: as_bool(
                    get(root, "$", "torsion_fiber_curve_exists")?,
                    "$.torsion_fiber_curve_exists",
                )?,
                source: as_string(get(root, "$", "source")?, "$.source")?.to_string(),
            })
        }
        other => {
            return Err(FormatError::at(
                "$.body",
                format!("expected \"explicit\" or \"opaque\", got {:?}", other),
            ))
        }
    };
    let sections: Vec<Section> = as_array(get(root, "$", "sections")?, "$.sections")?
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let path = format!("$.sections[{}]", i);
            let map = as_object(s, &path)?;
            Ok(Section {
                self_intersection: as_i64(
                    get(map, &path, "self_intersection")?,
                    &format!("{}.self_intersection", path),
                )?,
                splits_base: as_bool(
                    get(map, &path, "splits_base")?,
                    &format!("{}.splits_base", path),
                )?,
            })
        })
        .collect::<Result<_, FormatError>>()?;
    let asserted = match root.get("asserted") {
        None => Asserted::default(),
        Some(v) => {
            let path = "$.asserted";
            let map = as_object(v, path)?;
            let disjoint_path = format!("{}.disjoint_pairs", path);
            let disjoint_pairs = as_array(get(map, path, "disjoint_pairs")?, &disjoint_path)?
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let pp = format!("{}[{}]", disjoint_path, i);
                    let pair = as_array(p, &pp)?;
                    if pair.len() != 2 {
                        return Err(FormatError::at(pp, "expected a pair of indices"));
                    }
                    Ok((
                        as_usize(&pair[0], &format!("{}[0]", pp))?,
                        as_usize(&pair[1], &format!("{}[1]", pp))?,
                    ))
                })
                .collect::<Result<_, FormatError>>()?;
            Asserted {
                relatively_minimal: as_bool(
                    get(map, path, "relatively_minimal")?,
                    &format!("{}.relatively_minimal", path),
                )?,
                mcg_valid: as_bool(get(map, path, "mcg_valid")?, &format!("{}.mcg_valid", path))?,
                disjoint_pairs,
                fiber_primitive_override: match map.get("fiber_primitive_override") {
                    Some(v) => as_bool(v, &format!("{}.fiber_primitive_override", path))?,
                    None => false,
                },
                minimal: match map.get("minimal") {
                    Some(v) => as_bool(v, &format!("{}.minimal", path))?,
                    None => false,
                },
            }
        }
    };
    let meta = match root.get("meta") {
        None => Meta::default(),
        Some(v) => {
            let map = as_object(v, "$.meta")?;
            Meta {
                name: map
                    .get("name")
                    .and_then(|n| n.as_str())
                    .unwrap_or("")
                    .to_string(),
                citation: map
                    .get("citation")
                    .and_then(|c| c.as_str())
                    .unwrap_or("")
                    .to_string(),
            }
        }
    };
    let fibration = Fibration::new(kind, fiber_genus, base_genus, body, sections, asserted)?;
    Ok((fibration, meta))
}

fn letter_value(letter: &TwistLetter) -> Value {
    let class: Vec<Value> = letter
        .class
        .klass()
        .iter()
        .map(|e| Value::String(e.to_string()))
        .collect();
    json!({
        "class": class,
        "power": letter.power,
        "separating": letter.class.is_separating(),
    })
}

fn h1_value(group: &AbelianGroup) -> Value {
    let torsion: Vec<Value> = group
        .torsion()
        .iter()
        .map(|d| match d.to_string().parse::<i64>() {
            Ok(n) => json!(n),
            Err(_) => Value::String(d.to_string()),
        })
        .collect();
    json!({ "rank": group.rank(), "torsion": torsion })
}

/// Canonical document for a fibration: fixed key order, two-space pretty
/// printing, decimal-string class entries.
pub fn fibration_value(f: &Fibration, meta: &Meta) -> Value {
    let mut root = Map::new();
    root.insert("kind".into(), json!(f.kind.as_str()));
    root.insert("fiber_genus".into(), json!(f.fiber_genus));
    root.insert("base_genus".into(), json!(f.base_genus));
    match &f.body {
        Body::Explicit(fact) => {
            root.insert("body".into(), json!("explicit"));
            let handles: Vec<Value> = fact
                .handles
                .iter()
                .map(|h| {
                    json!({
                        "alpha": h.alpha.iter().map(letter_value).collect::<Vec<_>>(),
                        "beta": h.beta.iter().map(letter_value).collect::<Vec<_>>(),
                    })
                })
                .collect();
            root.insert("handles".into(), Value::Array(handles));
            root.insert(
                "vanishing_cycles".into(),
                Value::Array(fact.vanishing_cycles.iter().map(letter_value).collect()),
            );
        }
        Body::Opaque(d) => {
            root.insert("body".into(), json!("opaque"));
            root.insert("euler".into(), json!(d.euler));
            root.insert(
                "signature".into(),
                match d.signature {
                    Some(s) => json!(s),
                    None => Value::Null,
                },
            );
            root.insert("h1".into(), h1_value(&d.h1));
            root.insert("fiber_primitive".into(), json!(d.fiber_primitive));
            root.insert(
                "nontorsion_fiber_curve_exists".into(),
                json!(d.nontorsion_fiber_curve_exists),
            );
            root.insert(
                "torsion_fiber_curve_exists".into(),
                json!(d.torsion_fiber_curve_exists),
            );
            root.insert("source".into(), json!(d.source));
        }
    }
    let sections: Vec<Value> = f
        .sections
        .iter()
        .map(|s| json!({ "self_intersection": s.self_intersection, "splits_base": s.splits_base }))
        .collect();
    root.insert("sections".into(), Value::Array(sections));
    let mut asserted = Map::new();
    asserted.insert(
        "relatively_minimal".into(),
        json!(f.asserted.relatively_minimal),
    );
    asserted.insert("mcg_valid".into(), json!(f.asserted.mcg_valid));
    asserted.insert(
        "disjoint_pairs".into(),
        Value::Array(
            f.asserted
                .disjoint_pairs
                .iter()
                .map(|(a, b)| json!([a, b]))
                .collect(),
        ),
    );
    if f.asserted.fiber_primitive_override {
        asserted.insert("fiber_primitive_override".into(), json!(true));
    }
    if f.asserted.minimal {
        asserted.insert("minimal".into(), json!(true));
    }
    root.insert("asserted".into(), Value::Object(asserted));
    root.insert(
        "meta".into(),
        json!({ "name": meta.name, "citation": meta.citation }),
    );
    Value::Object(root)
}

pub fn emit_fibration(f: &Fibration, meta: &Meta) -> String {
    let mut text = serde_json::to_string_pretty(&fibration_value(f, meta))
        .expect("fibration documents always serialize");
    text.push('\n');
    text
}

/// Parse a symplectic twist matrix document: {"matrix": [[decimal-string]]}.
pub fn parse_twist(text: &str, genus: usize) -> Result<SpElement, FormatError> {
    let value: Value = serde_json::from_str(text)?;
    let root = as_object(&value, "$")?;
    let rows = as_array(get(root, "$", "matrix")?, "$.matrix")?;
    let n = 2 * genus;
    if rows.len() != n {
        return Err(FormatError::at(
            "$.matrix",
            format!(
                "expected {} rows for genus {}, got {}",
                n,
                genus,
                rows.len()
            ),
        ));
    }
    let mut m = fibercalc_core::linalg::IntMatrix::zero(n, n);
    for (i, row) in rows.iter().enumerate() {
        let path = format!("$.matrix[{}]", i);
        let entries = as_array(row, &path)?;
        if entries.len() != n {
            return Err(FormatError::at(&path, format!("expected {} entries", n)));
        }
        for (j, e) in entries.iter().enumerate() {
            let p = format!("{}[{}]", path, j);
            let v = match e {
                Value::Number(_) => BigInt::from(as_i64(e, &p)?),
                _ => parse_bigint(e, &p)?,
            };
            m.set(i, j, v);
        }
    }
    SpElement::new(genus, m).map_err(|e| FormatError::at("$.matrix", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use fibercalc_core::construct::{build_block, BlockFamily, BlockSpec};

    #[test]
    fn round_trip_block() {
        let q = build_block(&BlockSpec::new(BlockFamily::Q, 3, 9, 5)).unwrap();
        let meta = Meta {
            name: "q3_9_m5".into(),
            citation: "".into(),
        };
        let text = emit_fibration(&q, &meta);
        let (parsed, parsed_meta) = parse_fibration(&text).unwrap();
        assert_eq!(parsed, q);
        assert_eq!(parsed_meta, meta);
        assert_eq!(emit_fibration(&parsed, &parsed_meta), text);
    }

    #[test]
    fn lefschetz_without_cycles_rejected() {
        let text = r#"{
            "kind": "lefschetz", "fiber_genus": 2, "base_genus": 1,
            "body": "explicit",
            "handles": [{"alpha": [], "beta": []}],
            "vanishing_cycles": [],
            "sections": [],
            "asserted": {"relatively_minimal": false, "mcg_valid": false, "disjoint_pairs": []},
            "meta": {"name": "", "citation": ""}
        }"#;
        let err = parse_fibration(text).unwrap_err();
        assert!(err.is_mathematical());
        assert!(err.to_string().contains("critical locus"));
    }

    #[test]
    fn truncated_document_reports_position() {
        let err = parse_fibration("{\"kind\": \"bundle\", \"fiber_genus\":").unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("parse error"), "{}", msg);
    }

    #[test]
    fn malformed_documents_error_without_panicking() {
        let cases = [
            "",
            "null",
            "[]",
            "{}",
            r#"{"kind": "bundle"}"#,
            r#"{"kind": 7, "fiber_genus": 1, "base_genus": 0, "body": "explicit"}"#,
            r#"{"kind": "bundle", "fiber_genus": -1, "base_genus": 0, "body": "explicit"}"#,
            r#"{"kind": "bundle", "fiber_genus": 999999999, "base_genus": 0, "body": "explicit",
                "handles": [], "vanishing_cycles": [], "sections": []}"#,
            r#"{"kind": "bundle", "fiber_genus": 1, "base_genus": 0, "body": "weird"}"#,
            r#"{"kind": "bundle", "fiber_genus": 1, "base_genus": 0, "body": "opaque",
                "euler": 0, "signature": "no", "h1": {"rank": 0, "torsion": []},
                "fiber_primitive": true, "nontorsion_fiber_curve_exists": false,
                "torsion_fiber_curve_exists": true, "source": "x", "sections": []}"#,
            r#"{"kind": "bundle", "fiber_genus": 1, "base_genus": 0, "body": "explicit",
                "handles": [{"alpha": [{"class": ["1"], "power": 1, "separating": false}], "beta": []}],
                "vanishing_cycles": [], "sections": []}"#,
        ];
        for text in cases {
            assert!(parse_fibration(text).is_err(), "{:?}", text);
        }
    }

    #[test]
    fn arbitrary_precision_entries_round_trip() {
        use fibercalc_core::monodromy::CurveClass;
        use num_bigint::BigInt;
        use std::str::FromStr;
        // a primitive class with an entry far beyond machine words
        let huge = BigInt::from_str("340282366920938463463374607431768211457").unwrap();
        let klass = vec![huge, BigInt::from(1), BigInt::from(0), BigInt::from(0)];
        let a = CurveClass::new(2, klass, false).unwrap();
        let spec = BlockSpec::new(BlockFamily::Q, 2, 2, 7).with_curves(a, None);
        let q = build_block(&spec).unwrap();
        let meta = Meta {
            name: "huge".into(),
            citation: "".into(),
        };
        let text = emit_fibration(&q, &meta);
        let (parsed, _) = parse_fibration(&text).unwrap();
        assert_eq!(parsed, q);
        assert_eq!(emit_fibration(&parsed, &meta), text);
        // declared torsion beyond i64 is emitted as a string and survives
        let h1_doc = h1_value(&fibercalc_core::linalg::AbelianGroup::from_invariants(
            1,
            &[BigInt::from_str("18446744073709551629").unwrap()],
        ));
        let parsed_h1 = parse_h1(&h1_doc, "$.h1").unwrap();
        assert_eq!(
            parsed_h1.torsion(),
            &[BigInt::from_str("18446744073709551629").unwrap()]
        );
    }

    #[test]
    fn schema_violation_has_field_path() {
        let text = r#"{"kind": "bundle", "fiber_genus": 1, "base_genus": 0, "body": "explicit",
            "handles": [], "vanishing_cycles": [{"class": ["1", "bad"], "power": 1, "separating": false}],
            "sections": [], "asserted": {"relatively_minimal": false, "mcg_valid": false, "disjoint_pairs": []}}"#;
        let err = parse_fibration(text).unwrap_err();
        assert!(
            err.to_string().contains("vanishing_cycles[0].class[1]"),
            "{}",
            err
        );
    }
}
