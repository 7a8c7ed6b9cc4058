//! Map-spec, frame-sample and report documents (schema version 1).
//!
//! Parsing reports three classes of failure with distinct codes: syntax
//! ([`Error::Malformed`]), unknown versions ([`Error::UnsupportedSchema`]),
//! shape problems ([`Error::Schema`]) and matrices or vectors that violate
//! their mathematical invariants ([`Error::InvariantViolation`]).

use std::collections::BTreeMap;

use num_complex::Complex;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use super::canonical::to_canonical_bytes;
use super::oracle::{Adversarial, AdversarialKind, MapOracle, Table};
use crate::error::{Error, Result};
use crate::gleason::{FitReport, FrameSample};
use crate::projspace::{projector, UnitVector};
use crate::rng::PRNG_ALGORITHM;
use crate::scalar::{lit, to_f64, CMatrix, CVector, Real};
use crate::tolerance::Tolerances;
use crate::uhlhorn::{PipelineFailure, PipelineReport, StageEntry};
use crate::wigner::SymmetryOperator;

pub const SCHEMA_VERSION: u64 = 1;

/// A complex number as `[re, im]`.
pub type ComplexPair = [f64; 2];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairDocument {
    #[serde(rename = "in")]
    pub input: Vec<ComplexPair>,
    pub out: Vec<ComplexPair>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorDocument {
    pub name: String,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default)]
    pub seed: u64,
}

/// Serde image of a map-spec document. Nested `components` of a composed
/// map omit `schema_version`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapSpecDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub schema_version: Option<u64>,
    pub dim: usize,
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<Vec<Vec<ComplexPair>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub antilinear: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pairs: Option<Vec<PairDocument>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<GeneratorDocument>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub components: Option<Vec<MapSpecDocument>>,
    /// Seed the document was generated from; informational only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

fn read_json(bytes: &[u8]) -> Result<Value> {
    let text = std::str::from_utf8(bytes).map_err(|e| Error::Malformed(e.to_string()))?;
    serde_json::from_str(text).map_err(|e| Error::Malformed(e.to_string()))
}

fn check_version(value: &Value) -> Result<()> {
    let obj = value
        .as_object()
        .ok_or_else(|| Error::Schema("top level must be an object".into()))?;
    match obj.get("schema_version") {
        None => Err(Error::Schema("missing field `schema_version`".into())),
        Some(v) => match v.as_u64() {
            Some(SCHEMA_VERSION) => Ok(()),
            Some(other) => Err(Error::UnsupportedSchema(other)),
            None => Err(Error::Schema(
                "`schema_version` must be a non-negative integer".into(),
            )),
        },
    }
}

fn decode<D: serde::de::DeserializeOwned>(value: Value) -> Result<D> {
    serde_json::from_value(value).map_err(|e| Error::Schema(e.to_string()))
}

/// Parses a map-spec document under default tolerances.
pub fn parse_mapspec<T: Real>(bytes: &[u8]) -> Result<MapOracle<T>> {
    parse_mapspec_with(bytes, &Tolerances::default())
}

/// Parses and validates a map-spec document. Matrices are checked for
/// unitarity within `tol.herm` and vectors for unit norm within `tol.unit`.
pub fn parse_mapspec_with<T: Real>(bytes: &[u8], tol: &Tolerances<T>) -> Result<MapOracle<T>> {
    let value = read_json(bytes)?;
    check_version(&value)?;
    let doc: MapSpecDocument = decode(value)?;
    oracle_from_document(&doc, tol)
}

fn forbid(present: bool, field: &str, kind: &str) -> Result<()> {
    if present {
        Err(Error::Schema(format!(
            "field `{field}` is not allowed for kind `{kind}`"
        )))
    } else {
        Ok(())
    }
}

fn require<'a, X>(field: &'a Option<X>, name: &str, kind: &str) -> Result<&'a X> {
    field
        .as_ref()
        .ok_or_else(|| Error::Schema(format!("kind `{kind}` requires field `{name}`")))
}

/// Builds the oracle described by an already decoded document.
pub fn oracle_from_document<T: Real>(
    doc: &MapSpecDocument,
    tol: &Tolerances<T>,
) -> Result<MapOracle<T>> {
    let kind = doc.kind.as_str();
    if doc.dim < 3 {
        return Err(Error::Schema(format!(
            "dim must be at least 3, found {}",
            doc.dim
        )));
    }
    let has = (
        doc.matrix.is_some(),
        doc.antilinear.is_some(),
        doc.pairs.is_some(),
        doc.generator.is_some(),
        doc.components.is_some(),
    );
    match kind {
        "induced" => {
            forbid(has.2, "pairs", kind)?;
            forbid(has.3, "generator", kind)?;
            forbid(has.4, "components", kind)?;
            let m = matrix_from_rows::<T>(require(&doc.matrix, "matrix", kind)?, doc.dim)?;
            let s = SymmetryOperator::new(m, doc.antilinear.unwrap_or(false), tol)
                .map_err(|e| Error::InvariantViolation(e.to_string()))?;
            Ok(MapOracle::Induced(s))
        }
        "tabulated" => {
            forbid(has.0, "matrix", kind)?;
            forbid(has.1, "antilinear", kind)?;
            forbid(has.3, "generator", kind)?;
            forbid(has.4, "components", kind)?;
            let pairs = require(&doc.pairs, "pairs", kind)?
                .iter()
                .map(|p| {
                    Ok((
                        unit_vector(&p.input, doc.dim, tol)?,
                        unit_vector(&p.out, doc.dim, tol)?,
                    ))
                })
                .collect::<Result<Vec<_>>>()?;
            if pairs.is_empty() {
                return Err(Error::Schema("`pairs` must not be empty".into()));
            }
            Ok(MapOracle::Tabulated(Table::new(doc.dim, pairs)?))
        }
        "composed" => {
            forbid(has.0, "matrix", kind)?;
            forbid(has.1, "antilinear", kind)?;
            forbid(has.2, "pairs", kind)?;
            forbid(has.3, "generator", kind)?;
            let parts = require(&doc.components, "components", kind)?
                .iter()
                .map(|c| {
                    if c.schema_version.is_some() {
                        return Err(Error::Schema(
                            "components must not carry `schema_version`".into(),
                        ));
                    }
                    if c.dim != doc.dim {
                        return Err(Error::Schema(format!(
                            "component dim {} differs from dim {}",
                            c.dim, doc.dim
                        )));
                    }
                    oracle_from_document(c, tol)
                })
                .collect::<Result<Vec<_>>>()?;
            MapOracle::composed(parts)
        }
        "adversarial" => {
            forbid(has.0, "matrix", kind)?;
            forbid(has.1, "antilinear", kind)?;
            forbid(has.2, "pairs", kind)?;
            forbid(has.4, "components", kind)?;
            let g = require(&doc.generator, "generator", kind)?;
            let generator = AdversarialKind::from_name(&g.name, &g.params)?;
            Ok(MapOracle::Adversarial(Adversarial::new(
                generator, doc.dim, g.seed,
            )?))
        }
        other => Err(Error::Schema(format!("unknown kind `{other}`"))),
    }
}

fn complex<T: Real>(z: &ComplexPair) -> Result<Complex<T>> {
    if z.iter().all(|x| x.is_finite()) {
        Ok(Complex::new(lit(z[0]), lit(z[1])))
    } else {
        Err(Error::Schema("complex entries must be finite".into()))
    }
}

fn matrix_from_rows<T: Real>(rows: &[Vec<ComplexPair>], dim: usize) -> Result<CMatrix<T>> {
    if rows.len() != dim || rows.iter().any(|r| r.len() != dim) {
        return Err(Error::Schema(format!("`matrix` must be {dim}×{dim}")));
    }
    let mut m = CMatrix::<T>::zeros(dim, dim);
    for (r, row) in rows.iter().enumerate() {
        for (c, z) in row.iter().enumerate() {
            m[(r, c)] = complex(z)?;
        }
    }
    Ok(m)
}

fn unit_vector<T: Real>(
    entries: &[ComplexPair],
    dim: usize,
    tol: &Tolerances<T>,
) -> Result<UnitVector<T>> {
    if entries.len() != dim {
        return Err(Error::Schema(format!(
            "vectors must have {dim} entries, found {}",
            entries.len()
        )));
    }
    let v = entries
        .iter()
        .map(complex)
        .collect::<Result<Vec<Complex<T>>>>()?;
    UnitVector::new(CVector::from_vec(v), tol).map_err(|e| Error::InvariantViolation(e.to_string()))
}

fn pair<T: Real>(z: Complex<T>) -> ComplexPair {
    [to_f64(z.re), to_f64(z.im)]
}

pub fn matrix_rows<T: Real>(m: &CMatrix<T>) -> Vec<Vec<ComplexPair>> {
    (0..m.nrows())
        .map(|r| (0..m.ncols()).map(|c| pair(m[(r, c)])).collect())
        .collect()
}

pub fn vector_entries<T: Real>(v: &CVector<T>) -> Vec<ComplexPair> {
    v.iter().map(|&z| pair(z)).collect()
}

/// The document describing `oracle`.
pub fn document_of<T: Real>(oracle: &MapOracle<T>) -> MapSpecDocument {
    let mut doc = nested_document(oracle);
    doc.schema_version = Some(SCHEMA_VERSION);
    doc
}

fn nested_document<T: Real>(oracle: &MapOracle<T>) -> MapSpecDocument {
    use super::oracle::ProjectionMap;
    let mut doc = MapSpecDocument {
        schema_version: None,
        dim: oracle.dim(),
        kind: oracle.kind_name().to_string(),
        matrix: None,
        antilinear: None,
        pairs: None,
        generator: None,
        components: None,
        seed: None,
    };
    match oracle {
        MapOracle::Induced(s) => {
            doc.matrix = Some(matrix_rows(s.matrix()));
            doc.antilinear = Some(s.is_antilinear());
        }
        MapOracle::Tabulated(t) => {
            doc.pairs = Some(
                t.pairs()
                    .iter()
                    .map(|(a, b)| PairDocument {
                        input: vector_entries(a.entries()),
                        out: vector_entries(b.entries()),
                    })
                    .collect(),
            );
        }
        MapOracle::Composed(parts) => {
            doc.components = Some(parts.iter().map(nested_document).collect());
        }
        MapOracle::Adversarial(a) => {
            doc.generator = Some(GeneratorDocument {
                name: a.kind().name().to_string(),
                params: a.kind().params(),
                seed: a.seed(),
            });
        }
    }
    doc
}

fn to_value<S: Serialize>(s: &S) -> Value {
    serde_json::to_value(s).expect("documents serialize to JSON")
}

/// Canonical bytes of a map-spec document.
pub fn serialize_document(doc: &MapSpecDocument) -> Vec<u8> {
    to_canonical_bytes(&to_value(doc))
}

/// Canonical bytes of the document describing `oracle`.
pub fn serialize_mapspec<T: Real>(oracle: &MapOracle<T>) -> Vec<u8> {
    serialize_document(&document_of(oracle))
}

fn stage_log_value(log: &[StageEntry]) -> Value {
    Value::Array(
        log.iter()
            .map(|e| {
                let mut obj = Map::new();
                obj.insert("stage".into(), json!(e.stage));
                obj.insert("passed".into(), json!(e.passed));
                obj.insert(
                    "max_deviation".into(),
                    e.max_deviation.map_or(Value::Null, |d| json!(d)),
                );
                if let Some(block) = &e.block {
                    obj.insert("block".into(), json!(block));
                }
                Value::Object(obj)
            })
            .collect(),
    )
}

fn linearity(antilinear: bool) -> &'static str {
    if antilinear {
        "antiunitary"
    } else {
        "unitary"
    }
}

/// Report of a successful pipeline run as a JSON value.
pub fn report_value<T: Real>(r: &PipelineReport<T>) -> Value {
    let blocks: Vec<Value> = r
        .blocks
        .iter()
        .map(|b| {
            json!({
                "block": b.block.one_based(),
                "linearity": linearity(b.operator.is_antilinear()),
                "phases": b.phases().into_iter().map(pair).collect::<Vec<_>>(),
                "max_deviation": to_f64(b.max_deviation),
            })
        })
        .collect();
    json!({
        "schema_version": SCHEMA_VERSION,
        "status": "ok",
        "prng": PRNG_ALGORITHM,
        "seed": r.options.seed,
        "dim": r.dim,
        "stage_log": stage_log_value(&r.stage_log),
        "linearity": linearity(r.global.is_antilinear()),
        "matrix": matrix_rows(r.global.matrix()),
        "max_deviation": to_f64(r.final_check.max_deviation),
        "verified_pairs": r.final_check.verified_pairs,
        "gate": {
            "sampled": true,
            "random_pairs": r.options.gate_pairs,
            "pairs_checked": r.gate_pairs_checked,
        },
        "aligner": matrix_rows(r.aligner.matrix()),
        "blocks": blocks,
    })
}

/// Report of a failed pipeline run as a JSON value.
pub fn failure_value(f: &PipelineFailure) -> Value {
    json!({
        "schema_version": SCHEMA_VERSION,
        "status": "error",
        "prng": PRNG_ALGORITHM,
        "seed": f.options.seed,
        "dim": f.dim,
        "stage_log": stage_log_value(&f.stage_log),
        "error_code": f.error.code(),
        "error_stage": f.stage,
        "message": f.error.to_string(),
    })
}

/// Canonical bytes of a success report.
pub fn serialize_report<T: Real>(r: &PipelineReport<T>) -> Vec<u8> {
    to_canonical_bytes(&report_value(r))
}

/// Canonical bytes of a failure report.
pub fn serialize_failure(f: &PipelineFailure) -> Vec<u8> {
    to_canonical_bytes(&failure_value(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleDocument {
    pub vector: Vec<ComplexPair>,
    pub value: f64,
}

/// Frame-function samples: `{schema_version, dim, samples: [{vector, value}]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FrameSampleDocument {
    pub schema_version: u64,
    pub dim: usize,
    pub samples: Vec<SampleDocument>,
}

/// Parses a frame-sample document into `(dim, samples)`.
pub fn parse_frame_samples<T: Real>(
    bytes: &[u8],
    tol: &Tolerances<T>,
) -> Result<(usize, Vec<FrameSample<T>>)> {
    let value = read_json(bytes)?;
    check_version(&value)?;
    let doc: FrameSampleDocument = decode(value)?;
    if doc.dim == 0 {
        return Err(Error::Schema("dim must be positive".into()));
    }
    let samples = doc
        .samples
        .iter()
        .map(|s| {
            if !s.value.is_finite() {
                return Err(Error::Schema("sample values must be finite".into()));
            }
            let p = projector(&unit_vector(&s.vector, doc.dim, tol)?);
            FrameSample::new(p, lit(s.value), tol)
                .map_err(|e| Error::InvariantViolation(e.to_string()))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((doc.dim, samples))
}

/// Canonical bytes of a frame-sample document built from unit vectors.
pub fn serialize_frame_samples<T: Real>(dim: usize, samples: &[(UnitVector<T>, T)]) -> Vec<u8> {
    let doc = FrameSampleDocument {
        schema_version: SCHEMA_VERSION,
        dim,
        samples: samples
            .iter()
            .map(|(v, x)| SampleDocument {
                vector: vector_entries(v.entries()),
                value: to_f64(*x),
            })
            .collect(),
    };
    to_canonical_bytes(&to_value(&doc))
}

/// Canonical bytes of a fit result; failures keep their diagnostic number.
pub fn serialize_fit<T: Real>(dim: usize, fit: &Result<FitReport<T>>) -> Vec<u8> {
    let value = match fit {
        Ok(r) => json!({
            "schema_version": SCHEMA_VERSION,
            "status": "ok",
            "dim": dim,
            "density": matrix_rows(r.density.matrix()),
            "residual": to_f64(r.residual),
            "eigen_floor": to_f64(r.eigen_floor),
        }),
        Err(e) => {
            let mut obj = json!({
                "schema_version": SCHEMA_VERSION,
                "status": "error",
                "dim": dim,
                "error_code": e.code(),
                "message": e.to_string(),
            });
            let extra = match e {
                Error::InconsistentSamples { residual } => Some(("residual", *residual)),
                Error::NegativeSpectrum { eigen_floor } => Some(("eigen_floor", *eigen_floor)),
                Error::DesignDeficient { sigma_min } => Some(("sigma_min", *sigma_min)),
                Error::TraceDeficit { trace } => Some(("trace", *trace)),
                _ => None,
            };
            if let (Some((k, v)), Some(map)) = (extra, obj.as_object_mut()) {
                map.insert(k.into(), json!(v));
            }
            obj
        }
    };
    to_canonical_bytes(&value)
}
