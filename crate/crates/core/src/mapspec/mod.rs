//! Map oracles, adversarial generators and document serialization.

pub mod canonical;
pub mod document;
pub mod oracle;

pub use canonical::{format_float, to_canonical_bytes, to_canonical_string};
pub use document::{
    document_of, failure_value, oracle_from_document, parse_frame_samples, parse_mapspec,
    parse_mapspec_with, report_value, serialize_document, serialize_failure, serialize_fit,
    serialize_frame_samples, serialize_mapspec, serialize_report, FrameSampleDocument,
    GeneratorDocument, MapSpecDocument, PairDocument, SampleDocument, SCHEMA_VERSION,
};
pub use oracle::{
    adversarial_oracle, induced_oracle, Adversarial, AdversarialKind, FnMap, MapOracle,
    ProjectionMap, Table, MATCH_RADIUS,
};
