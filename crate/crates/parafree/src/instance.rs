//! The instance file format: a JSON document describing vertices with their
//! generators and edges with trivial or infinite cyclic edge groups.
//!
//! ```json
//! {"vertices": [{"id": "U", "generators": ["a", "b"]}],
//!  "edges": [{"id": "t", "from": "U", "to": "U", "edge_group": "Z",
//!             "u": "a", "v": "b"}]}
//! ```

use serde::Deserialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::graph::{Edge, EdgeKind, GraphOfGroups, ValidationError, Vertex};
use crate::normal_form::{MixedItem, MixedWord};
use crate::words::{parse_tokens, Alphabet, Letter, Word, WordParseError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum InstanceError {
    #[error("input is not valid UTF-8")]
    Utf8,
    #[error("JSON syntax error at byte {offset} (line {line}, column {column}): {message}")]
    Json { offset: usize, line: usize, column: usize, message: String },
    #[error("{path}: word syntax error at byte {position}: {message}")]
    WordSyntax { path: String, position: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
    #[error(transparent)]
    Validation(#[from] ValidationError),
}

impl InstanceError {
    /// Diagnostic object written to standard error by the CLI.
    pub fn to_json(&self) -> Value {
        match self {
            InstanceError::Utf8 => json!({"error": "utf8"}),
            InstanceError::Json { offset, line, column, message } => json!({
                "error": "json",
                "offset": offset,
                "line": line,
                "column": column,
                "message": message,
            }),
            InstanceError::WordSyntax { path, position, message } => json!({
                "error": "word_syntax",
                "path": path,
                "position": position,
                "message": message,
            }),
            InstanceError::Field { path, message } => json!({
                "error": "field",
                "path": path,
                "message": message,
            }),
            InstanceError::Validation(e) => json!({
                "error": "validation",
                "message": e.to_string(),
            }),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    vertices: Vec<RawVertex>,
    #[serde(default)]
    edges: Vec<RawEdge>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawVertex {
    id: String,
    generators: Vec<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    id: String,
    from: String,
    to: String,
    edge_group: String,
    #[serde(default)]
    u: Option<String>,
    #[serde(default)]
    v: Option<String>,
}

fn byte_offset(text: &str, line: usize, column: usize) -> usize {
    let mut offset = 0;
    for (i, l) in text.split('\n').enumerate() {
        if i + 1 == line {
            return offset + column.saturating_sub(1).min(l.len());
        }
        offset += l.len() + 1;
    }
    text.len()
}

/// Parses and validates an instance document.
pub fn parse_instance(bytes: &[u8]) -> Result<GraphOfGroups, InstanceError> {
    let text = std::str::from_utf8(bytes).map_err(|_| InstanceError::Utf8)?;
    let raw: RawInstance = serde_json::from_str(text).map_err(|e| InstanceError::Json {
        offset: byte_offset(text, e.line(), e.column()),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;

    let mut vertices = Vec::with_capacity(raw.vertices.len());
    for (i, rv) in raw.vertices.iter().enumerate() {
        let alphabet = Alphabet::new(rv.generators.iter().cloned()).map_err(|e| {
            InstanceError::Field {
                path: format!("vertices[{i}].generators"),
                message: e.to_string(),
            }
        })?;
        vertices.push(Vertex { id: rv.id.clone(), alphabet });
    }

    let mut edges = Vec::with_capacity(raw.edges.len());
    for (i, re) in raw.edges.iter().enumerate() {
        let kind = match re.edge_group.as_str() {
            "trivial" => EdgeKind::Trivial,
            "Z" => EdgeKind::InfiniteCyclic,
            other => {
                return Err(InstanceError::Field {
                    path: format!("edges[{i}].edge_group"),
                    message: format!("expected \"trivial\" or \"Z\", found \"{other}\""),
                });
            }
        };
        let parse_side = |side: char, text: &Option<String>, vertex: &str| {
            let path = format!("edges[{i}].{side}");
            match (kind, text) {
                (EdgeKind::Trivial, Some(_)) => Err(InstanceError::Field {
                    path,
                    message: "must be absent for a trivial edge group".into(),
                }),
                (EdgeKind::Trivial, None) => Ok(None),
                (EdgeKind::InfiniteCyclic, None) => {
                    Err(InstanceError::Field { path: format!("edges[{i}].{side}"), message: "missing".into() })
                }
                (EdgeKind::InfiniteCyclic, Some(word_text)) => {
                    let vertex = vertices
                        .iter()
                        .find(|vx| vx.id == *vertex)
                        .ok_or_else(|| InstanceError::Field {
                            path: path.clone(),
                            message: format!("edge endpoint `{vertex}` is not a vertex"),
                        })?;
                    let word = crate::words::parse_word(&vertex.alphabet, word_text).map_err(
                        |WordParseError { position, message }| InstanceError::WordSyntax {
                            path: path.clone(),
                            position,
                            message,
                        },
                    )?;
                    Ok(Some(word))
                }
            }
        };
        let u = parse_side('u', &re.u, &re.from)?;
        let v = parse_side('v', &re.v, &re.to)?;
        edges.push(Edge {
            id: re.id.clone(),
            from: re.from.clone(),
            to: re.to.clone(),
            kind,
            u,
            v,
        });
    }

    Ok(GraphOfGroups::new(vertices, edges)?)
}

/// Canonical JSON rendering of an instance; `parse_instance` of the output
/// reproduces the instance.
pub fn instance_to_json(g: &GraphOfGroups) -> Value {
    let vertices: Vec<Value> = g
        .vertices()
        .iter()
        .map(|v| json!({"id": v.id, "generators": v.alphabet.names()}))
        .collect();
    let edges: Vec<Value> = g
        .edges()
        .iter()
        .map(|e| {
            let from_alphabet = &g.vertices()[g.vertex_index(&e.from).unwrap()].alphabet;
            let to_alphabet = &g.vertices()[g.vertex_index(&e.to).unwrap()].alphabet;
            match e.kind {
                EdgeKind::Trivial => json!({
                    "id": e.id, "from": e.from, "to": e.to, "edge_group": "trivial",
                }),
                EdgeKind::InfiniteCyclic => json!({
                    "id": e.id, "from": e.from, "to": e.to, "edge_group": "Z",
                    "u": e.u.as_ref().unwrap().display(from_alphabet).to_string(),
                    "v": e.v.as_ref().unwrap().display(to_alphabet).to_string(),
                }),
            }
        })
        .collect();
    json!({"vertices": vertices, "edges": edges})
}

/// Parses a mixed word over the instance: generator tokens resolve into
/// vertex factors, edge-id tokens into stable letters.
pub fn parse_mixed_word(g: &GraphOfGroups, text: &str) -> Result<MixedWord, WordParseError> {
    enum Token {
        Gen { vertex: usize, gen: usize },
        Edge(usize),
    }
    let lookup = |name: &str, pos: usize| -> Result<Token, WordParseError> {
        for (vi, v) in g.vertices().iter().enumerate() {
            if let Some(gi) = v.alphabet.index_of(name) {
                return Ok(Token::Gen { vertex: vi, gen: gi });
            }
        }
        if let Some(ei) = g.edge_index(name) {
            return Ok(Token::Edge(ei));
        }
        Err(WordParseError {
            position: pos,
            message: format!("unknown generator or edge `{name}`"),
        })
    };
    // Encode both families into one index space for the shared tokenizer:
    // vertex generators first, edge indices after them.
    let mut vertex_base = vec![0usize; g.vertices().len()];
    let mut acc = 0usize;
    for (vi, v) in g.vertices().iter().enumerate() {
        vertex_base[vi] = acc;
        acc += v.alphabet.rank();
    }
    let edge_base = acc;
    let letters = parse_tokens(text, &mut |name, pos| {
        lookup(name, pos).map(|t| match t {
            Token::Gen { vertex, gen } => vertex_base[vertex] + gen,
            Token::Edge(e) => edge_base + e,
        })
    })?;

    let mut items: Vec<MixedItem> = Vec::new();
    for l in letters {
        if l.gen >= edge_base {
            items.push(MixedItem::Stable { edge: l.gen - edge_base, sign: l.sign });
            continue;
        }
        // Ranks are at least one, so the offsets are strictly increasing.
        let vi = vertex_base.partition_point(|&off| off <= l.gen) - 1;
        let letter = Letter::new(l.gen - vertex_base[vi], l.sign);
        match items.last_mut() {
            Some(MixedItem::Factor { vertex, word }) if *vertex == vi => {
                *word = word.concat(&Word::reduced([letter]));
            }
            _ => items.push(MixedItem::Factor { vertex: vi, word: Word::reduced([letter]) }),
        }
    }
    Ok(MixedWord { items })
}
