//! JSON documents for tensors and metrics.
//!
//! Tensor documents list nonzero entries by index; omitted indices are
//! zero. The canonical form sorts entries by index, omits zeros and prints
//! each field in the core's s-expression syntax.

use std::collections::BTreeMap;
use std::fmt;

use cochain_core::spacetime::{builtin_metric, IsotropicMetric, MetricKind};
use cochain_core::{
    CochainElement, EqualityPolicy, Error as CoreError, Rational, ScalarField, ScalarFunction,
    Space, Tensor,
};
use serde::{Deserialize, Serialize};

use crate::sexpr::{self, parse_number, Scope};

#[derive(Debug, Clone, PartialEq)]
pub enum DocError {
    /// Malformed JSON, with its line and column.
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    /// Well-formed JSON that does not fit the schema; `path` locates the
    /// offending value, e.g. `entries[2].index[0]`.
    Schema { path: String, message: String },
    /// The document claims a space its tensor is not a member of.
    Membership(CoreError),
}

impl fmt::Display for DocError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DocError::Json {
                line,
                column,
                message,
            } => write!(f, "invalid JSON at line {line}, column {column}: {message}"),
            DocError::Schema { path, message } => write!(f, "schema error at {path}: {message}"),
            DocError::Membership(e) => write!(f, "membership error: {e}"),
        }
    }
}

impl std::error::Error for DocError {}

fn schema<T>(path: impl Into<String>, message: impl Into<String>) -> Result<T, DocError> {
    Err(DocError::Schema {
        path: path.into(),
        message: message.into(),
    })
}

fn json_error(e: serde_json::Error) -> DocError {
    DocError::Json {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SpaceTag {
    K,
    G,
    #[serde(rename = "generic")]
    Generic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EntryDoc {
    pub index: Vec<usize>,
    pub expr: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TensorDoc {
    pub dim: usize,
    pub rank: usize,
    pub space: SpaceTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grade: Option<usize>,
    #[serde(default)]
    pub entries: Vec<EntryDoc>,
}

/// A parsed tensor document: the dense tensor, the space it claims, and
/// the validated cochain when it claims one.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTensor {
    pub tensor: Tensor<ScalarField>,
    pub space: Option<Space>,
    pub element: Option<CochainElement<ScalarField>>,
}

/// Parse a tensor document. Documents claiming K or G are validated.
pub fn parse_tensor(json: &str) -> Result<ParsedTensor, DocError> {
    let doc: TensorDoc = serde_json::from_str(json).map_err(json_error)?;
    if doc.dim == 0 {
        return schema("dim", "must be at least 1");
    }
    let space = match (&doc.space, doc.grade) {
        (SpaceTag::Generic, _) => None,
        (_, None) => return schema("grade", "required when space is K or G"),
        (SpaceTag::K, Some(q)) => Some(Space::K(q)),
        (SpaceTag::G, Some(q)) => Some(Space::G(q)),
    };
    if let Some(s) = space {
        if s.rank() != doc.rank {
            return schema(
                "rank",
                format!("{s} has rank {}, document says {}", s.rank(), doc.rank),
            );
        }
    }
    let mut tensor = Tensor::zeros(doc.dim, doc.rank);
    let mut seen = BTreeMap::new();
    for (n, entry) in doc.entries.iter().enumerate() {
        let path = format!("entries[{n}]");
        if entry.index.len() != doc.rank {
            return schema(
                format!("{path}.index"),
                format!("expected {} indices, found {}", doc.rank, entry.index.len()),
            );
        }
        if let Some(k) = entry.index.iter().position(|&i| i >= doc.dim) {
            return schema(
                format!("{path}.index[{k}]"),
                format!("{} out of range for dim {}", entry.index[k], doc.dim),
            );
        }
        if let Some(first) = seen.insert(entry.index.clone(), n) {
            return schema(
                format!("{path}.index"),
                format!("duplicates entries[{first}]"),
            );
        }
        let expr = sexpr::parse(&entry.expr, Scope::Coordinates { dim: doc.dim })
            .or_else(|e| schema(format!("{path}.expr"), e.to_string()))?;
        let field = ScalarField::from_expr(expr, doc.dim)
            .or_else(|e| schema(format!("{path}.expr"), e.to_string()))?;
        tensor.set(&entry.index, field);
    }
    let element = space
        .map(|s| CochainElement::new(tensor.clone(), s, &EqualityPolicy::default()))
        .transpose()
        .map_err(|e| match e {
            CoreError::InvalidMember { .. } => DocError::Membership(e),
            other => DocError::Schema {
                path: "entries".into(),
                message: other.to_string(),
            },
        })?;
    Ok(ParsedTensor {
        tensor,
        space,
        element,
    })
}

/// Canonical document for a tensor, tagged with `space` when given.
pub fn tensor_doc<S: ScalarFunction + fmt::Display>(
    tensor: &Tensor<S>,
    space: Option<Space>,
) -> TensorDoc {
    let entries = tensor
        .indexed()
        .filter(|(_, e)| !e.is_structurally_zero())
        .map(|(index, e)| EntryDoc {
            index,
            expr: e.to_string(),
        })
        .collect();
    let (tag, grade) = match space {
        None => (SpaceTag::Generic, None),
        Some(Space::K(q)) => (SpaceTag::K, Some(q)),
        Some(Space::G(q)) => (SpaceTag::G, Some(q)),
    };
    TensorDoc {
        dim: tensor.dim(),
        rank: tensor.rank(),
        space: tag,
        grade,
        entries,
    }
}

pub fn emit_tensor<S: ScalarFunction + fmt::Display>(
    tensor: &Tensor<S>,
    space: Option<Space>,
) -> String {
    serde_json::to_string_pretty(&tensor_doc(tensor, space))
        .expect("tensor documents always serialize")
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
enum NumberText {
    Text(String),
    Int(i64),
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricDoc {
    name: String,
    #[serde(default)]
    params: BTreeMap<String, NumberText>,
    f: Option<String>,
    g: Option<String>,
    #[serde(rename = "H")]
    h: Option<String>,
}

/// Metric choice as given on the command line or in a metric document.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct MetricArgs {
    pub name: String,
    pub h: Option<String>,
    pub f: Option<String>,
    pub g: Option<String>,
    pub mass: Option<String>,
    pub omega: Option<String>,
}

pub fn parse_metric_doc(json: &str) -> Result<MetricArgs, DocError> {
    let doc: MetricDoc = serde_json::from_str(json).map_err(json_error)?;
    let mut args = MetricArgs {
        name: doc.name,
        h: doc.h,
        f: doc.f,
        g: doc.g,
        ..MetricArgs::default()
    };
    for (key, value) in doc.params {
        let text = match value {
            NumberText::Text(s) => s,
            NumberText::Int(n) => n.to_string(),
        };
        match key.as_str() {
            "mass" => args.mass = Some(text),
            "omega" => args.omega = Some(text),
            other => return schema(format!("params.{other}"), "unknown parameter"),
        }
    }
    Ok(args)
}

fn expr_arg(
    path: &str,
    text: &Option<String>,
    scope: Scope,
) -> Result<Option<cochain_core::Expr>, DocError> {
    text.as_deref()
        .map(|s| sexpr::parse(s, scope).or_else(|e| schema(path, e.to_string())))
        .transpose()
}

fn rational_arg(path: &str, text: &Option<String>) -> Result<Rational, DocError> {
    match text {
        None => schema(path, "required"),
        Some(s) => parse_number(s.trim())
            .map_or_else(|| schema(path, format!("not a rational number: '{s}'")), Ok),
    }
}

/// Build the metric described by `args`.
pub fn build_metric(args: &MetricArgs) -> Result<IsotropicMetric, DocError> {
    let h = expr_arg("H", &args.h, Scope::Spatial)?;
    let f = expr_arg("f", &args.f, Scope::Profile)?;
    let g = expr_arg("g", &args.g, Scope::Profile)?;
    let unused = |names: &[(&str, bool)]| -> Result<(), DocError> {
        match names.iter().find(|(_, present)| *present) {
            Some((n, _)) => schema(*n, format!("not used by metric '{}'", args.name)),
            None => Ok(()),
        }
    };
    let kind = match args.name.as_str() {
        "mp" => {
            unused(&[
                ("f", f.is_some()),
                ("g", g.is_some()),
                ("mass", args.mass.is_some()),
                ("omega", args.omega.is_some()),
            ])?;
            MetricKind::Mp { h }
        }
        "extreme_rn" => {
            unused(&[
                ("H", h.is_some()),
                ("f", f.is_some()),
                ("g", g.is_some()),
                ("omega", args.omega.is_some()),
            ])?;
            let mass = if args.mass.is_none() {
                Rational::from_integer(1.into())
            } else {
                rational_arg("mass", &args.mass)?
            };
            MetricKind::ExtremeRn { mass }
        }
        "schwarzschild" => {
            unused(&[
                ("H", h.is_some()),
                ("f", f.is_some()),
                ("g", g.is_some()),
                ("mass", args.mass.is_some()),
            ])?;
            let omega = if args.omega.is_none() {
                Rational::from_integer(4.into())
            } else {
                rational_arg("omega", &args.omega)?
            };
            MetricKind::Schwarzschild { omega }
        }
        "flat" => {
            unused(&[
                ("H", h.is_some()),
                ("f", f.is_some()),
                ("g", g.is_some()),
                ("mass", args.mass.is_some()),
                ("omega", args.omega.is_some()),
            ])?;
            MetricKind::Flat
        }
        "custom" => {
            unused(&[
                ("mass", args.mass.is_some()),
                ("omega", args.omega.is_some()),
            ])?;
            match (f, g, h) {
                (Some(f), Some(g), Some(h)) => MetricKind::Custom { f, g, h },
                _ => return schema("custom", "needs f, g and H"),
            }
        }
        other => return schema("name", format!("unknown metric '{other}'")),
    };
    builtin_metric(kind).or_else(|e| schema("metric", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use cochain_core::field::integer;
    use cochain_core::Point;

    const K2: &str = r#"{
  "dim": 2,
  "rank": 3,
  "space": "K",
  "grade": 2,
  "entries": [
    {
      "index": [
        0,
        1,
        0
      ],
      "expr": "1"
    },
    {
      "index": [
        1,
        0,
        0
      ],
      "expr": "-1"
    }
  ]
}"#;

    #[test]
    fn canonical_documents_round_trip() {
        let parsed = parse_tensor(K2).unwrap();
        assert_eq!(parsed.space, Some(Space::K(2)));
        assert_eq!(emit_tensor(&parsed.tensor, parsed.space), K2);
    }

    #[test]
    fn space_tags_use_the_documented_spelling() {
        assert!(parse_tensor(&K2.replace("\"K\"", "\"k\"")).is_err());
        let generic = r#"{"dim": 1, "rank": 0, "space": "generic", "entries": [{"index": [], "expr": "x0"}]}"#;
        assert_eq!(parse_tensor(generic).unwrap().space, None);
    }

    #[test]
    fn sparse_document_fills_zeros() {
        let doc = r#"{"dim": 3, "rank": 3, "space": "generic", "entries": [{"index": [0, 1, 2], "expr": "(* x0 x1)"}]}"#;
        let t = parse_tensor(doc).unwrap().tensor;
        assert_eq!(t.entries().len(), 27);
        assert_eq!(
            t.entries()
                .iter()
                .filter(|e| e.is_structurally_zero())
                .count(),
            26
        );
        let v = t
            .get(&[0, 1, 2])
            .evaluate(&Point::from_ints(&[2, 3, 0]))
            .unwrap();
        assert_eq!(v.exact().unwrap(), &integer(6));
    }

    #[test]
    fn non_member_claims_are_rejected() {
        // symmetric rank-3 tensor: leading slots not skew
        let doc = r#"{"dim": 2, "rank": 3, "space": "K", "grade": 2, "entries": [{"index": [0, 0, 0], "expr": "x0"}]}"#;
        assert!(matches!(parse_tensor(doc), Err(DocError::Membership(_))));
        // skew in the leading pair but with nonzero total alternation
        let doc = r#"{"dim": 3, "rank": 3, "space": "K", "grade": 2, "entries": [
            {"index": [0, 1, 2], "expr": "1"}, {"index": [1, 0, 2], "expr": "-1"}]}"#;
        assert!(matches!(parse_tensor(doc), Err(DocError::Membership(_))));
    }

    #[test]
    fn schema_errors_name_the_path() {
        let bad_index = r#"{"dim": 2, "rank": 2, "space": "generic", "entries": [{"index": [0, 0], "expr": "1"}, {"index": [0, 5], "expr": "1"}]}"#;
        match parse_tensor(bad_index) {
            Err(DocError::Schema { path, .. }) => assert_eq!(path, "entries[1].index[1]"),
            other => panic!("unexpected {other:?}"),
        }
        let bad_expr = r#"{"dim": 2, "rank": 1, "space": "generic", "entries": [{"index": [0], "expr": "(+ x0 y)"}]}"#;
        match parse_tensor(bad_expr) {
            Err(DocError::Schema { path, message }) => {
                assert_eq!(path, "entries[0].expr");
                assert!(message.contains("column 7"), "{message}");
            }
            other => panic!("unexpected {other:?}"),
        }
        let wrong_rank = r#"{"dim": 2, "rank": 2, "space": "K", "grade": 2}"#;
        assert!(matches!(
            parse_tensor(wrong_rank),
            Err(DocError::Schema { .. })
        ));
    }

    #[test]
    fn malformed_json_reports_position() {
        match parse_tensor("{\"dim\": 2,\n \"rank\": }") {
            Err(DocError::Json { line, column, .. }) => {
                assert_eq!(line, 2);
                assert!(column > 0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn metric_documents() {
        let doc = r#"{"name": "schwarzschild", "params": {"omega": "4"}}"#;
        let m = build_metric(&parse_metric_doc(doc).unwrap()).unwrap();
        assert_eq!(m.name(), "schwarzschild");
        let doc = r#"{"name": "custom", "f": "(^ H -2)", "g": "(^ H 2)", "H": "(+ 2 x1)"}"#;
        assert!(build_metric(&parse_metric_doc(doc).unwrap()).is_ok());
        let doc = r#"{"name": "extreme_rn", "params": {"mass": "-1"}}"#;
        assert!(build_metric(&parse_metric_doc(doc).unwrap()).is_err());
        let doc = r#"{"name": "mp", "params": {"charge": 1}}"#;
        assert!(parse_metric_doc(doc).is_err());
        let doc = r#"{"name": "mp", "H": "(+ 1 t)"}"#;
        match build_metric(&parse_metric_doc(doc).unwrap()) {
            Err(DocError::Schema { path, .. }) => assert_eq!(path, "H"),
            other => panic!("unexpected {other:?}"),
        }
    }
}
