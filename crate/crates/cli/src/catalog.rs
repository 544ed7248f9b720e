//! Catalog persistence: one file per entry plus an index file, atomic
//! write-temp-then-rename, and the built-in entries (elementary blocks,
//! elliptic words, literature seeds) resolved from id patterns.

use serde_json::{json, Value};
use std::fs;
use std::path::{Path, PathBuf};
use thiserror::Error;

use fibercalc_core::construct::{build_block, BlockFamily, BlockSpec};
use fibercalc_core::fibration::{Asserted, Body, Fibration, FibrationKind, Section};
use fibercalc_core::invariants::invariant_report;
use fibercalc_core::meyer::elliptic_word;
use fibercalc_core::monodromy::MonodromyFactorization;
use fibercalc_core::seeds;

use crate::format::{parse_fibration, FormatError, Meta};
use crate::report::invariant_report_value;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("catalog io: {0}")]
    Io(#[from] std::io::Error),
    #[error("duplicate catalog id {0:?}")]
    DuplicateId(String),
    #[error("unknown catalog id {0:?}")]
    UnknownId(String),
    #[error("corrupt catalog entry {id:?}: {message}")]
    Corrupt { id: String, message: String },
    #[error(transparent)]
    Format(#[from] FormatError),
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Provenance {
    BuiltIn,
    User,
}

impl Provenance {
    pub fn as_str(&self) -> &'static str {
        match self {
            Provenance::BuiltIn => "built-in",
            Provenance::User => "user",
        }
    }
}

pub struct CatalogEntry {
    pub id: String,
    pub fibration: Fibration,
    pub meta: Meta,
    pub provenance: Provenance,
    /// Advisory cache verification outcome: Some(message) when the cached
    /// report did not match recomputation.
    pub cache_warning: Option<String>,
}

pub struct Catalog {
    dir: PathBuf,
}

const INDEX_FILE: &str = "index.json";

impl Catalog {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Catalog { dir: dir.into() }
    }

    fn index_path(&self) -> PathBuf {
        self.dir.join(INDEX_FILE)
    }

    fn entry_path(&self, id: &str) -> PathBuf {
        self.dir.join(format!("{}.entry.json", id))
    }

    fn read_index(&self) -> Result<Vec<(String, String)>, CatalogError> {
        let path = self.index_path();
        if !path.exists() {
            return Ok(Vec::new());
        }
        let text = fs::read_to_string(&path)?;
        let value: Value = serde_json::from_str(&text).map_err(|e| CatalogError::Corrupt {
            id: INDEX_FILE.into(),
            message: e.to_string(),
        })?;
        let entries = value
            .get("entries")
            .and_then(|e| e.as_array())
            .ok_or_else(|| CatalogError::Corrupt {
                id: INDEX_FILE.into(),
                message: "missing entries array".into(),
            })?;
        let mut out = Vec::new();
        for e in entries {
            let id = e.get("id").and_then(|v| v.as_str()).unwrap_or_default();
            let file = e.get("file").and_then(|v| v.as_str()).unwrap_or_default();
            if id.is_empty() || file.is_empty() {
                return Err(CatalogError::Corrupt {
                    id: INDEX_FILE.into(),
                    message: "entry without id or file".into(),
                });
            }
            out.push((id.to_string(), file.to_string()));
        }
        Ok(out)
    }

    /// Atomic write: temp file in the same directory, then rename.
    fn write_atomic(&self, path: &Path, contents: &str) -> Result<(), CatalogError> {
        let tmp = path.with_extension("tmp");
        fs::write(&tmp, contents)?;
        fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Store an entry. The entry file lands before the index references
    /// it, so a crash in between never leaves the index pointing at a
    /// half-written file.
    pub fn store(
        &self,
        id: &str,
        fibration: &Fibration,
        meta: &Meta,
        provenance: Provenance,
    ) -> Result<(), CatalogError> {
        if !valid_id(id) {
            return Err(CatalogError::Corrupt {
                id: id.to_string(),
                message: "ids are lowercase alphanumerics, '-', '_', '.'".into(),
            });
        }
        fs::create_dir_all(&self.dir)?;
        let mut index = self.read_index()?;
        if index.iter().any(|(existing, _)| existing == id) {
            return Err(CatalogError::DuplicateId(id.to_string()));
        }
        let report = invariant_report(fibration)
            .ok()
            .map(|r| invariant_report_value(&r));
        let doc = json!({
            "id": id,
            "provenance": provenance.as_str(),
            "fibration": crate::format::fibration_value(fibration, meta),
            "report": report,
        });
        let file_name = format!("{}.entry.json", id);
        let mut text = serde_json::to_string_pretty(&doc).expect("entry documents serialize");
        text.push('\n');
        self.write_atomic(&self.entry_path(id), &text)?;
        index.push((id.to_string(), file_name));
        index.sort();
        let index_doc = json!({
            "entries": index
                .iter()
                .map(|(id, file)| json!({ "id": id, "file": file }))
                .collect::<Vec<_>>(),
        });
        let mut index_text =
            serde_json::to_string_pretty(&index_doc).expect("index documents serialize");
        index_text.push('\n');
        self.write_atomic(&self.index_path(), &index_text)?;
        Ok(())
    }

    /// Load an entry: stored entries first, then the built-in patterns.
    /// A cached report that disagrees with recomputation is reported in
    /// the entry, not fatal.
    pub fn load(&self, id: &str) -> Result<CatalogEntry, CatalogError> {
        let index = self.read_index()?;
        if let Some((_, file)) = index.iter().find(|(eid, _)| eid == id) {
            let path = self.dir.join(file);
            let text = fs::read_to_string(&path)?;
            let doc: Value = serde_json::from_str(&text).map_err(|e| CatalogError::Corrupt {
                id: id.to_string(),
                message: e.to_string(),
            })?;
            let fib_value = doc.get("fibration").ok_or_else(|| CatalogError::Corrupt {
                id: id.to_string(),
                message: "entry lacks a fibration document".into(),
            })?;
            let fib_text = serde_json::to_string(fib_value).expect("value serializes");
            let (fibration, meta) = parse_fibration(&fib_text)?;
            let provenance = match doc.get("provenance").and_then(|p| p.as_str()) {
                Some("built-in") => Provenance::BuiltIn,
                _ => Provenance::User,
            };
            let cache_warning = match doc.get("report") {
                None | Some(Value::Null) => None,
                Some(cached) => match invariant_report(&fibration) {
                    Ok(fresh) => {
                        let fresh_value = invariant_report_value(&fresh);
                        if &fresh_value != cached {
                            Some(format!(
                                "cached report differs from recomputation for {:?}",
                                id
                            ))
                        } else {
                            None
                        }
                    }
                    Err(e) => Some(format!("cached report cannot be recomputed: {}", e)),
                },
            };
            return Ok(CatalogEntry {
                id: id.to_string(),
                fibration,
                meta,
                provenance,
                cache_warning,
            });
        }
        match builtin(id) {
            Some(Ok((fibration, meta))) => Ok(CatalogEntry {
                id: id.to_string(),
                fibration,
                meta,
                provenance: Provenance::BuiltIn,
                cache_warning: None,
            }),
            Some(Err(e)) => Err(CatalogError::Corrupt {
                id: id.to_string(),
                message: e,
            }),
            None => Err(CatalogError::UnknownId(id.to_string())),
        }
    }

    pub fn stored_ids(&self) -> Result<Vec<String>, CatalogError> {
        Ok(self.read_index()?.into_iter().map(|(id, _)| id).collect())
    }
}

fn valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '-' || c == '_' || c == '.')
}

/// Built-in id patterns, resolved on demand.
pub const BUILTIN_PATTERNS: &[(&str, &str)] = &[
    ("p-{g}-{h}", "trivial bundle P(g,h)"),
    (
        "q-{g}-{h}-m{m}",
        "twisted bundle Q_m(g,h) on the standard a_1",
    ),
    (
        "r-{g}-{h}-m{m}",
        "twisted bundle R_m(g,h) on the standard a_1, a_2",
    ),
    (
        "elliptic-E{n}",
        "elliptic Lefschetz fibration E(n), 12n twists",
    ),
    (
        "korkmaz-Y{g}",
        "genus-g Lefschetz fibration over S^2 (declared)",
    ),
    (
        "korkmaz-Yn{g}-{n}",
        "twisted fiber sum with pi_1 = Z + Z/n (declared)",
    ),
    (
        "bryan-donagi-X{n}",
        "signature-8(n^3-n)/3 bundle, genera ((4n-2)n^2+1, 2)",
    ),
    (
        "bryan-donagi-X{n}-companion",
        "the same manifold fibered with genera (2n^2+1, 2n)",
    ),
    (
        "ekkos-genus3-h{h}",
        "genus-3 seed bundle template (signature required)",
    ),
];

fn builtin(id: &str) -> Option<Result<(Fibration, Meta), String>> {
    let make_meta = |name: &str, citation: &str| Meta {
        name: name.to_string(),
        citation: citation.to_string(),
    };
    if let Some(rest) = id.strip_prefix("p-") {
        let (g, h) = parse_two(rest)?;
        return Some(
            build_block(&BlockSpec::new(BlockFamily::P, g, h, 1))
                .map(|f| (f, make_meta(id, "trivial product bundle")))
                .map_err(|e| e.to_string()),
        );
    }
    if let Some(rest) = id.strip_prefix("q-") {
        let (g, h, m) = parse_two_m(rest)?;
        return Some(
            build_block(&BlockSpec::new(BlockFamily::Q, g, h, m))
                .map(|f| (f, make_meta(id, "elementary twisted bundle")))
                .map_err(|e| e.to_string()),
        );
    }
    if let Some(rest) = id.strip_prefix("r-") {
        let (g, h, m) = parse_two_m(rest)?;
        return Some(
            build_block(&BlockSpec::new(BlockFamily::R, g, h, m))
                .map(|f| (f, make_meta(id, "elementary twisted bundle")))
                .map_err(|e| e.to_string()),
        );
    }
    if let Some(n) = id.strip_prefix("elliptic-E") {
        let n: usize = n.parse().ok()?;
        if n == 0 {
            return Some(Err("E(n) requires n >= 1".into()));
        }
        let fact = MonodromyFactorization {
            fiber_genus: 1,
            base_genus: 0,
            handles: vec![],
            vanishing_cycles: elliptic_word(n),
        };
        return Some(
            Fibration::new(
                FibrationKind::Lefschetz,
                1,
                0,
                Body::Explicit(fact),
                vec![Section {
                    self_intersection: -(n as i64),
                    splits_base: true,
                }],
                Asserted {
                    relatively_minimal: true,
                    mcg_valid: true,
                    ..Asserted::default()
                },
            )
            .map(|f| (f, make_meta(id, "elliptic surface, 12n-twist word")))
            .map_err(|e| e.to_string()),
        );
    }
    if let Some(rest) = id.strip_prefix("korkmaz-Yn") {
        let (g, n) = parse_dash_pair(rest)?;
        return Some(
            seeds::korkmaz_yn(g, n as i64)
                .map(|f| (f, make_meta(id, "Korkmaz, IMRN 2001")))
                .map_err(|e| e.to_string()),
        );
    }
    if let Some(g) = id.strip_prefix("korkmaz-Y") {
        let g: usize = g.parse().ok()?;
        return Some(
            seeds::korkmaz_y(g)
                .map(|f| (f, make_meta(id, "Korkmaz, IMRN 2001")))
                .map_err(|e| e.to_string()),
        );
    }
    if let Some(rest) = id.strip_prefix("bryan-donagi-X") {
        let (n_str, companion) = match rest.strip_suffix("-companion") {
            Some(n) => (n, true),
            None => (rest, false),
        };
        let n: usize = n_str.parse().ok()?;
        return Some(
            seeds::bryan_donagi(n)
                .map(|(primary, comp)| {
                    let f = if companion { comp } else { primary };
                    (
                        f,
                        make_meta(
                            id,
                            "Bryan-Donagi, GAFA 2002; companion record shares all invariants",
                        ),
                    )
                })
                .map_err(|e| e.to_string()),
        );
    }
    if let Some(h) = id.strip_prefix("ekkos-genus3-h") {
        let h: usize = h.parse().ok()?;
        return Some(
            seeds::ekkos_template(h)
                .map(|f| {
                    (
                        f,
                        make_meta(
                            id,
                            "template: fill in the declared signature from the source \
                             (Endo-Korkmaz-Kotschick-Ozbagci-Stipsicz)",
                        ),
                    )
                })
                .map_err(|e| e.to_string()),
        );
    }
    None
}

fn parse_two(rest: &str) -> Option<(usize, usize)> {
    let mut parts = rest.split('-');
    let g = parts.next()?.parse().ok()?;
    let h = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((g, h))
}

fn parse_two_m(rest: &str) -> Option<(usize, usize, i64)> {
    let mut parts = rest.split('-');
    let g = parts.next()?.parse().ok()?;
    let h = parts.next()?.parse().ok()?;
    let m = parts.next()?.strip_prefix('m')?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((g, h, m))
}

fn parse_dash_pair(rest: &str) -> Option<(usize, usize)> {
    let mut parts = rest.split('-');
    let g = parts.next()?.parse().ok()?;
    let n = parts.next()?.parse().ok()?;
    if parts.next().is_some() {
        return None;
    }
    Some((g, n))
}

/// Resolve a command-line input: an existing file path, else a catalog id.
pub fn resolve_input(
    catalog: &Catalog,
    input: &str,
) -> Result<(Fibration, Meta, Option<String>), CatalogError> {
    let path = Path::new(input);
    if path.exists() {
        let text = fs::read_to_string(path)?;
        let (fibration, meta) = parse_fibration(&text)?;
        return Ok((fibration, meta, None));
    }
    let entry = catalog.load(input)?;
    Ok((entry.fibration, entry.meta, entry.cache_warning))
}

/// Write a document atomically next to its destination.
pub fn write_output(path: &Path, contents: &str) -> Result<(), CatalogError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)?;
        }
    }
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}
