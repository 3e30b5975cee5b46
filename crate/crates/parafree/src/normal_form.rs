//! Word-problem oracle for one-level amalgams and HNN extensions over free
//! groups with cyclic edge subgroups: reduced factor sequences on the amalgam
//! side, pinch elimination on the HNN side.
//!
//! Nested (multi-edge) instances are declared out of scope and reported as
//! `Unknown` rather than risking an unsound reduction.

use thiserror::Error;

use crate::criteria::{Determination, Evidence};
use crate::graph::{EdgeKind, GraphOfGroups};
use crate::words::{primitive_root, Alphabet, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NormalFormError {
    #[error("mixed word syntax error: {0}")]
    Syntax(String),
}

/// One token of a word in a one-edge fundamental group: a factor from a
/// vertex group or a signed stable letter.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum MixedItem {
    Factor { vertex: usize, word: Word },
    Stable { edge: usize, sign: i8 },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MixedWord {
    pub items: Vec<MixedItem>,
}

impl MixedWord {
    pub fn inverse(&self) -> MixedWord {
        MixedWord {
            items: self
                .items
                .iter()
                .rev()
                .map(|item| match item {
                    MixedItem::Factor { vertex, word } => MixedItem::Factor {
                        vertex: *vertex,
                        word: word.inverse(),
                    },
                    MixedItem::Stable { edge, sign } => MixedItem::Stable { edge: *edge, sign: -sign },
                })
                .collect(),
        }
    }

    pub fn concat(&self, other: &MixedWord) -> MixedWord {
        MixedWord {
            items: self.items.iter().chain(other.items.iter()).cloned().collect(),
        }
    }

    /// Renders against a graph: factors use vertex alphabets, stable letters
    /// use edge ids.
    pub fn display(&self, g: &GraphOfGroups) -> String {
        let mut parts: Vec<String> = Vec::new();
        for item in &self.items {
            match item {
                MixedItem::Factor { vertex, word } => {
                    if !word.is_empty() {
                        parts.push(word.display(&g.vertices()[*vertex].alphabet).to_string());
                    }
                }
                MixedItem::Stable { edge, sign } => {
                    let id = &g.edges()[*edge].id;
                    parts.push(if *sign > 0 { id.clone() } else { format!("{id}^-1") });
                }
            }
        }
        parts.join(" ")
    }
}

/// A reduced mixed word together with the exact triviality answer.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NormalForm {
    pub word: MixedWord,
    pub trivial: bool,
}

/// Returns `k` with `w = u^k` in the free group, or `None` when `w` lies
/// outside the cyclic subgroup generated by `u`. The exponent `k = 0` occurs
/// exactly for the empty word.
pub fn cyclic_membership(w: &Word, u: &Word) -> Option<i64> {
    assert!(!u.is_empty(), "cyclic subgroup generator must be nontrivial");
    if w.is_empty() {
        return Some(0);
    }
    let ru = primitive_root(u).expect("nonempty generator");
    let shifted = w.conjugate_by(&ru.conjugator.inverse());
    let s = &ru.root;
    if !shifted.len().is_multiple_of(s.len()) {
        return None;
    }
    let m = (shifted.len() / s.len()) as i64;
    let m = if shifted == s.pow(m) {
        m
    } else if shifted == s.pow(-m) {
        -m
    } else {
        return None;
    };
    (m % ru.exponent as i64 == 0).then(|| m / ru.exponent as i64)
}

/// The cyclic (possibly trivial) subgroup a factor is pinched against.
#[derive(Clone, Copy)]
enum EdgeSubgroup<'a> {
    Trivial,
    Cyclic(&'a Word),
}

impl EdgeSubgroup<'_> {
    fn member(&self, w: &Word) -> Option<i64> {
        match self {
            EdgeSubgroup::Trivial => w.is_empty().then_some(0),
            EdgeSubgroup::Cyclic(u) => cyclic_membership(w, u),
        }
    }

    fn power(&self, k: i64) -> Word {
        match self {
            EdgeSubgroup::Trivial => Word::empty(),
            EdgeSubgroup::Cyclic(u) => u.pow(k),
        }
    }
}

/// Splits a mixed word into base factors separated by stable-letter signs:
/// `b0 t^{s1} b1 t^{s2} ... bk`.
fn to_segments(
    base: &Alphabet,
    mw: &MixedWord,
) -> Result<(Vec<Word>, Vec<i8>), NormalFormError> {
    let mut bases = vec![Word::empty()];
    let mut signs: Vec<i8> = Vec::new();
    let mut seen_edge: Option<usize> = None;
    for item in &mw.items {
        match item {
            MixedItem::Factor { word, .. } => {
                word.check_rank(base.rank())
                    .map_err(|e| NormalFormError::Syntax(e.to_string()))?;
                let last = bases.last_mut().unwrap();
                *last = last.concat(word);
            }
            MixedItem::Stable { edge, sign } => {
                if *seen_edge.get_or_insert(*edge) != *edge {
                    return Err(NormalFormError::Syntax(
                        "mixed word crosses more than one stable letter".into(),
                    ));
                }
                signs.push(*sign);
                bases.push(Word::empty());
            }
        }
    }
    Ok((bases, signs))
}

fn britton_with(
    base: &Alphabet,
    u: EdgeSubgroup<'_>,
    v: EdgeSubgroup<'_>,
    edge: usize,
    mw: &MixedWord,
) -> Result<NormalForm, NormalFormError> {
    let (mut bases, mut signs) = to_segments(base, mw)?;
    'scan: loop {
        for i in 0..signs.len().saturating_sub(1) {
            let (pinched, replacement) = if signs[i] == 1 && signs[i + 1] == -1 {
                (u.member(&bases[i + 1]), &v)
            } else if signs[i] == -1 && signs[i + 1] == 1 {
                (v.member(&bases[i + 1]), &u)
            } else {
                continue;
            };
            if let Some(k) = pinched {
                let merged = bases[i].concat(&replacement.power(k)).concat(&bases[i + 2]);
                bases.splice(i..=i + 2, [merged]);
                signs.drain(i..=i + 1);
                continue 'scan;
            }
        }
        break;
    }
    let trivial = signs.is_empty() && bases[0].is_empty();
    let mut items = Vec::new();
    for (i, b) in bases.iter().enumerate() {
        if !b.is_empty() {
            items.push(MixedItem::Factor { vertex: 0, word: b.clone() });
        }
        if i < signs.len() {
            items.push(MixedItem::Stable { edge, sign: signs[i] });
        }
    }
    Ok(NormalForm { word: MixedWord { items }, trivial })
}

/// Pinch elimination for a one-vertex HNN presentation `t u t^-1 = v`:
/// subwords `t u^k t^-1` become `v^k` and `t^-1 v^k t` become `u^k` until no
/// pinch remains. Triviality is then exact.
pub fn britton_reduce(
    base: &Alphabet,
    u: &Word,
    v: &Word,
    mw: &MixedWord,
) -> Result<NormalForm, NormalFormError> {
    britton_with(base, EdgeSubgroup::Cyclic(u), EdgeSubgroup::Cyclic(v), 0, mw)
}

fn amalgam_with(
    left: &Alphabet,
    right: &Alphabet,
    u: EdgeSubgroup<'_>,
    v: EdgeSubgroup<'_>,
    mw: &MixedWord,
) -> Result<NormalForm, NormalFormError> {
    let mut factors: Vec<(usize, Word)> = Vec::new();
    for item in &mw.items {
        match item {
            MixedItem::Factor { vertex, word } => {
                if *vertex > 1 {
                    return Err(NormalFormError::Syntax("factor outside the two sides".into()));
                }
                let alphabet = if *vertex == 0 { left } else { right };
                word.check_rank(alphabet.rank())
                    .map_err(|e| NormalFormError::Syntax(e.to_string()))?;
                factors.push((*vertex, word.clone()));
            }
            MixedItem::Stable { .. } => {
                return Err(NormalFormError::Syntax(
                    "stable letters do not occur in an amalgam".into(),
                ));
            }
        }
    }
    normalize(&mut factors);
    loop {
        if factors.len() < 2 {
            break;
        }
        let hit = factors.iter().enumerate().find_map(|(i, (side, w))| {
            let sub = if *side == 0 { &u } else { &v };
            sub.member(w).map(|k| (i, k))
        });
        match hit {
            Some((i, k)) => {
                let other_side = 1 - factors[i].0;
                let other = if other_side == 0 { &u } else { &v };
                factors[i] = (other_side, other.power(k));
                normalize(&mut factors);
            }
            None => break,
        }
    }
    let trivial = factors.is_empty();
    let items = factors
        .into_iter()
        .map(|(vertex, word)| MixedItem::Factor { vertex, word })
        .collect();
    Ok(NormalForm { word: MixedWord { items }, trivial })
}

fn normalize(factors: &mut Vec<(usize, Word)>) {
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < factors.len() {
            if factors[i].1.is_empty() {
                factors.remove(i);
                changed = true;
                continue;
            }
            if i + 1 < factors.len() && factors[i].0 == factors[i + 1].0 {
                let merged = factors[i].1.concat(&factors[i + 1].1);
                factors[i].1 = merged;
                factors.remove(i + 1);
                changed = true;
                continue;
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }
}

/// Reduced sequences for an amalgam `left *_{u=v} right`: factors lying in
/// the glued cyclic subgroup are rewritten to the other side and merged until
/// the sequence is reduced. Triviality is then exact.
pub fn amalgam_reduce(
    left: &Alphabet,
    right: &Alphabet,
    u: &Word,
    v: &Word,
    mw: &MixedWord,
) -> Result<NormalForm, NormalFormError> {
    amalgam_with(left, right, EdgeSubgroup::Cyclic(u), EdgeSubgroup::Cyclic(v), mw)
}

/// Exact nontriviality for instances with at most one edge; `Unknown` beyond
/// that scope.
pub fn is_nontrivial(g: &GraphOfGroups, mw: &MixedWord) -> Determination {
    match g.edges() {
        [] => {
            let mut word = Word::empty();
            for item in &mw.items {
                match item {
                    MixedItem::Factor { word: w, .. } => word = word.concat(w),
                    MixedItem::Stable { .. } => {
                        return Determination::unknown(Evidence::Inconclusive {
                            reason: "stable letter without a matching edge".into(),
                        });
                    }
                }
            }
            reduction_verdict(
                !word.is_empty(),
                word.display(&g.vertices()[0].alphabet).to_string(),
            )
        }
        [e] => {
            let from = g.vertex_index(&e.from).unwrap();
            let to = g.vertex_index(&e.to).unwrap();
            let (su, sv) = match e.kind {
                EdgeKind::Trivial => (EdgeSubgroup::Trivial, EdgeSubgroup::Trivial),
                EdgeKind::InfiniteCyclic => (
                    EdgeSubgroup::Cyclic(e.u.as_ref().unwrap()),
                    EdgeSubgroup::Cyclic(e.v.as_ref().unwrap()),
                ),
            };
            let result = if from == to {
                britton_with(&g.vertices()[from].alphabet, su, sv, 0, mw)
            } else {
                // Map factor vertex indices onto sides of the amalgam.
                let mut sided = Vec::with_capacity(mw.items.len());
                for item in &mw.items {
                    match item {
                        MixedItem::Factor { vertex, word } => {
                            let side = if *vertex == from {
                                0
                            } else if *vertex == to {
                                1
                            } else {
                                return Determination::unknown(Evidence::Inconclusive {
                                    reason: "factor vertex outside the edge".into(),
                                });
                            };
                            sided.push(MixedItem::Factor { vertex: side, word: word.clone() });
                        }
                        MixedItem::Stable { .. } => {
                            return Determination::unknown(Evidence::Inconclusive {
                                reason: "stable letter on a tree edge".into(),
                            });
                        }
                    }
                }
                amalgam_with(
                    &g.vertices()[from].alphabet,
                    &g.vertices()[to].alphabet,
                    su,
                    sv,
                    &MixedWord { items: sided },
                )
                .map(|nf| NormalForm {
                    word: nf.word.sides_to_vertices(from, to),
                    trivial: nf.trivial,
                })
            };
            match result {
                Ok(nf) => reduction_verdict(!nf.trivial, nf.word.display(g)),
                Err(e) => Determination::unknown(Evidence::Inconclusive { reason: e.to_string() }),
            }
        }
        _ => Determination::unknown(Evidence::Inconclusive {
            reason: "exact reduction covers at most one edge".into(),
        }),
    }
}

impl MixedWord {
    /// Maps the amalgam reducer's side indices 0/1 back to vertex indices.
    fn sides_to_vertices(self, from: usize, to: usize) -> MixedWord {
        MixedWord {
            items: self
                .items
                .into_iter()
                .map(|item| match item {
                    MixedItem::Factor { vertex, word } => MixedItem::Factor {
                        vertex: if vertex == 0 { from } else { to },
                        word,
                    },
                    other => other,
                })
                .collect(),
        }
    }
}

fn reduction_verdict(nontrivial: bool, reduced: String) -> Determination {
    let evidence = Evidence::Reduction { reduced, trivial: !nontrivial };
    if nontrivial {
        Determination::yes(evidence)
    } else {
        Determination::no(evidence)
    }
}
