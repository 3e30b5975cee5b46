//! Byte-stable JSON rendering of verdicts, certificates and witnesses.
//!
//! All objects are built as `serde_json::Value` maps, which sort keys, and
//! integers that might exceed 53 bits are emitted as decimal strings.

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use serde_json::{json, Map, Value};

use crate::criteria::{Determination, Evidence, TraceStep, Verdict};
use crate::graph::{abelianization, expected_rank, GraphOfGroups};
use crate::witness::{NilWitness, SearchBounds};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const SAFE_INTEGER: i64 = (1 << 53) - 1;

/// Numbers within the 53-bit window stay JSON numbers; anything bigger is a
/// decimal string so consumers never lose precision.
pub fn big_to_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) if (-SAFE_INTEGER..=SAFE_INTEGER).contains(&v) => json!(v),
        _ => json!(x.to_string()),
    }
}

fn bigs_to_json(xs: &[BigInt]) -> Value {
    Value::Array(xs.iter().map(big_to_json).collect())
}

pub fn bounds_to_json(b: &SearchBounds) -> Value {
    json!({
        "dims": b.dims,
        "primes": b.primes,
        "exhaustive_cap": b.exhaustive_cap,
        "sample_count": b.sample_count,
        "seed": b.seed,
    })
}

pub fn witness_to_json(w: &NilWitness) -> Value {
    let images: Map<String, Value> = w
        .images
        .iter()
        .map(|(name, m)| (name.clone(), json!(m.full_matrix())))
        .collect();
    json!({
        "n": w.n,
        "p": w.p,
        "images": images,
        "edge": w.edge,
        "surviving_word": w.surviving_word,
        "checked_relations": w.checked_relations,
    })
}

fn determination_to_json(d: &Determination) -> Value {
    json!({
        "value": d.value.label(),
        "evidence": evidence_to_json(&d.evidence),
    })
}

fn evidence_to_json(e: &Evidence) -> Value {
    match e {
        Evidence::FreeVertexGroups { count } => json!({
            "kind": "free_vertex_groups",
            "vertices": count,
        }),
        Evidence::AbelianInvariants { free_rank, expected, torsion, stable_letters } => json!({
            "kind": "abelian_invariants",
            "free_rank": free_rank,
            "expected_rank": expected,
            "torsion": bigs_to_json(torsion),
            "stable_letters": stable_letters,
        }),
        Evidence::ClassGcd { coords, gcd, certificate } => json!({
            "kind": "class_gcd",
            "coords": bigs_to_json(coords),
            "gcd": big_to_json(gcd),
            "certificate": certificate.as_ref().map(|c| bigs_to_json(c)),
        }),
        Evidence::TorsionObstruction { torsion } => json!({
            "kind": "torsion_obstruction",
            "torsion": bigs_to_json(torsion),
        }),
        Evidence::Root { word, conjugator, root, exponent, syntactic } => json!({
            "kind": "root",
            "word": word,
            "conjugator": conjugator,
            "root": root,
            "exponent": exponent,
            "syntactic": syntactic,
        }),
        Evidence::Disjunction { first, second } => json!({
            "kind": "either",
            "first": determination_to_json(first),
            "second": determination_to_json(second),
        }),
        Evidence::DecompositionTrace { steps } => json!({
            "kind": "decomposition_trace",
            "steps": steps.iter().map(trace_step_to_json).collect::<Vec<_>>(),
        }),
        Evidence::PerEdge { edges } => json!({
            "kind": "per_edge",
            "edges": edges
                .iter()
                .map(|(id, d)| json!({"edge": id, "determination": determination_to_json(d)}))
                .collect::<Vec<_>>(),
        }),
        Evidence::ModPrimeSurvivor { prime } => json!({
            "kind": "abelian_survivor",
            "prime": prime,
        }),
        Evidence::Witness(w) => json!({
            "kind": "witness",
            "witness": witness_to_json(w),
        }),
        Evidence::DescentObstruction { generator, u_exponent, v_exponent } => json!({
            "kind": "descent_obstruction",
            "generator": generator,
            "u_exponent": u_exponent,
            "v_exponent": v_exponent,
        }),
        Evidence::AbelianIndependence { u_image, v_image, det } => json!({
            "kind": "abelian_independence",
            "u_image": u_image,
            "v_image": v_image,
            "det": det,
        }),
        Evidence::SearchExhausted { bounds, fully_enumerated, skipped } => json!({
            "kind": "search_exhausted",
            "bounds": bounds_to_json(bounds),
            "fully_enumerated": fully_enumerated
                .iter()
                .map(|(n, p)| json!([n, p]))
                .collect::<Vec<_>>(),
            "skipped": skipped,
        }),
        Evidence::SubVerdicts { parts } => json!({
            "kind": "sub_verdicts",
            "parts": parts
                .iter()
                .map(|(label, v)| json!({"part": label, "verdict": verdict_to_json(v, None)}))
                .collect::<Vec<_>>(),
        }),
        Evidence::Reduction { reduced, trivial } => json!({
            "kind": "reduction",
            "reduced": reduced,
            "trivial": trivial,
        }),
        Evidence::Inconclusive { reason } => json!({
            "kind": "inconclusive",
            "reason": reason,
        }),
    }
}

fn trace_step_to_json(s: &TraceStep) -> Value {
    json!({
        "removed_edge": s.removed_edge,
        "shape": s.shape,
        "test": s.test.as_ref().map(determination_to_json),
    })
}

/// The full report for a `check` run: condition values as plain strings,
/// detailed evidence in the certificate.
pub fn verdict_to_json(v: &Verdict, bounds: Option<&SearchBounds>) -> Value {
    let conditions: Map<String, Value> = v
        .conditions
        .iter()
        .map(|(id, d)| (id.clone(), json!(d.value.label())))
        .collect();
    let certificate: Map<String, Value> = v
        .conditions
        .iter()
        .map(|(id, d)| (id.clone(), determination_to_json(d)))
        .collect();
    let mut out = Map::new();
    out.insert("verdict".into(), json!(v.status.label()));
    out.insert("conditions".into(), Value::Object(conditions));
    out.insert("certificate".into(), Value::Object(certificate));
    if let Some(b) = bounds {
        out.insert("bounds_used".into(), bounds_to_json(b));
    }
    out.insert("tool_version".into(), json!(TOOL_VERSION));
    Value::Object(out)
}

pub fn abelianization_to_json(g: &GraphOfGroups) -> Value {
    let ab = abelianization(g);
    json!({
        "expected_rank": expected_rank(g),
        "free_rank": ab.invariants.free_rank,
        "stable_letters": ab.stable_letters,
        "torsion": bigs_to_json(&ab.invariants.torsion),
        "tool_version": TOOL_VERSION,
    })
}

/// Canonical one-line rendering with a trailing newline.
pub fn to_stable_string(v: &Value) -> String {
    let mut s = serde_json::to_string(v).expect("report values serialize");
    s.push('\n');
    s
}
