//! The graph-of-groups data model: validation, spanning trees, presentations
//! of the fundamental group, abelianization, the rank formula, and
//! edge-removal decomposition into amalgam or HNN shape.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_bigint::BigInt;
use thiserror::Error;

use crate::lattice::{CokernelForm, CokernelInvariants, IntMatrix};
use crate::words::{Alphabet, Letter, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("graph of groups needs at least one vertex")]
    EmptyGraph,
    #[error("underlying graph is not connected")]
    DisconnectedGraph,
    #[error("duplicate identifier `{0}`")]
    DuplicateId(String),
    #[error("edge `{edge}` references unknown vertex `{vertex}`")]
    UnknownVertexRef { edge: String, vertex: String },
    #[error("edge `{edge}`: attaching word `{side}` reduces to the identity")]
    TrivialEdgeWord { edge: String, side: char },
    #[error("edge `{edge}`: attaching word `{side}` required for an infinite cyclic edge group")]
    MissingEdgeWord { edge: String, side: char },
    #[error("edge `{edge}`: attaching words are not allowed on a trivial edge group")]
    UnexpectedEdgeWord { edge: String },
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{edge}`: {source}")]
    BadEdgeWord { edge: String, source: WordError },
    #[error(transparent)]
    Word(#[from] WordError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeKind {
    Trivial,
    InfiniteCyclic,
}

#[derive(Clone, Debug)]
pub struct Vertex {
    pub id: String,
    pub alphabet: Alphabet,
}

/// A directed edge: `u` is a word in the source vertex group, `v` in the
/// target vertex group. Loops read both words over the same alphabet.
#[derive(Clone, Debug)]
pub struct Edge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub u: Option<Word>,
    pub v: Option<Word>,
}

/// A validated finite connected graph of groups with free vertex groups and
/// cyclic edge groups. Immutable after construction.
#[derive(Clone, Debug)]
pub struct GraphOfGroups {
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
}

impl GraphOfGroups {
    /// Validates connectivity, identifier uniqueness, reference integrity and
    /// nontriviality of attaching words.
    pub fn new(vertices: Vec<Vertex>, edges: Vec<Edge>) -> Result<Self, ValidationError> {
        if vertices.is_empty() {
            return Err(ValidationError::EmptyGraph);
        }
        let mut seen: BTreeSet<&str> = BTreeSet::new();
        for v in &vertices {
            if !seen.insert(&v.id) {
                return Err(ValidationError::DuplicateId(v.id.clone()));
            }
            for name in v.alphabet.names() {
                if !seen.insert(name) {
                    return Err(ValidationError::DuplicateId(name.clone()));
                }
            }
        }
        for e in &edges {
            if !seen.insert(&e.id) {
                return Err(ValidationError::DuplicateId(e.id.clone()));
            }
        }
        let vertex_index: BTreeMap<&str, usize> =
            vertices.iter().enumerate().map(|(i, v)| (v.id.as_str(), i)).collect();
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !vertex_index.contains_key(end.as_str()) {
                    return Err(ValidationError::UnknownVertexRef {
                        edge: e.id.clone(),
                        vertex: end.clone(),
                    });
                }
            }
            match e.kind {
                EdgeKind::Trivial => {
                    if e.u.is_some() || e.v.is_some() {
                        return Err(ValidationError::UnexpectedEdgeWord { edge: e.id.clone() });
                    }
                }
                EdgeKind::InfiniteCyclic => {
                    for (side, word, vertex) in [('u', &e.u, &e.from), ('v', &e.v, &e.to)] {
                        let Some(word) = word else {
                            return Err(ValidationError::MissingEdgeWord {
                                edge: e.id.clone(),
                                side,
                            });
                        };
                        let rank = vertices[vertex_index[vertex.as_str()]].alphabet.rank();
                        word.check_rank(rank).map_err(|source| ValidationError::BadEdgeWord {
                            edge: e.id.clone(),
                            source,
                        })?;
                        let reduced = Word::reduced(word.letters().iter().copied());
                        if reduced.is_empty() {
                            return Err(ValidationError::TrivialEdgeWord {
                                edge: e.id.clone(),
                                side,
                            });
                        }
                    }
                }
            }
        }
        // Store attaching words freely reduced.
        let edges: Vec<Edge> = edges
            .into_iter()
            .map(|mut e| {
                e.u = e.u.map(|w| Word::reduced(w.letters().iter().copied()));
                e.v = e.v.map(|w| Word::reduced(w.letters().iter().copied()));
                e
            })
            .collect();
        let g = GraphOfGroups { vertices, edges };
        if !g.is_connected() {
            return Err(ValidationError::DisconnectedGraph);
        }
        Ok(g)
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_index(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn edge_index(&self, id: &str) -> Option<usize> {
        self.edges.iter().position(|e| e.id == id)
    }

    pub fn total_vertex_rank(&self) -> usize {
        self.vertices.iter().map(|v| v.alphabet.rank()).sum()
    }

    pub fn cyclic_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.kind == EdgeKind::InfiniteCyclic).count()
    }

    /// One free vertex group and nothing glued on.
    pub fn is_single_free_vertex(&self) -> bool {
        self.vertices.len() == 1 && self.edges.is_empty()
    }

    fn is_connected(&self) -> bool {
        let mut visited = vec![false; self.vertices.len()];
        let mut queue = VecDeque::new();
        visited[0] = true;
        queue.push_back(0);
        while let Some(cur) = queue.pop_front() {
            for e in &self.edges {
                let a = self.vertex_index(&e.from).unwrap();
                let b = self.vertex_index(&e.to).unwrap();
                for (x, y) in [(a, b), (b, a)] {
                    if x == cur && !visited[y] {
                        visited[y] = true;
                        queue.push_back(y);
                    }
                }
            }
        }
        visited.into_iter().all(|v| v)
    }
}

/// Deterministic spanning tree: breadth-first search from the
/// lexicographically least vertex id, exploring incident edges in
/// lexicographic id order.
pub fn spanning_tree(g: &GraphOfGroups) -> BTreeSet<String> {
    let start = g
        .vertices()
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.id.cmp(&b.1.id))
        .map(|(i, _)| i)
        .expect("validated graph has a vertex");
    let mut incident: Vec<Vec<usize>> = vec![Vec::new(); g.vertices().len()];
    for (i, e) in g.edges().iter().enumerate() {
        let a = g.vertex_index(&e.from).unwrap();
        let b = g.vertex_index(&e.to).unwrap();
        incident[a].push(i);
        if b != a {
            incident[b].push(i);
        }
    }
    for list in incident.iter_mut() {
        list.sort_by(|&x, &y| g.edges()[x].id.cmp(&g.edges()[y].id));
    }
    let mut tree = BTreeSet::new();
    let mut visited = vec![false; g.vertices().len()];
    visited[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for &ei in &incident[cur] {
            let e = &g.edges()[ei];
            let a = g.vertex_index(&e.from).unwrap();
            let b = g.vertex_index(&e.to).unwrap();
            let other = if a == cur { b } else { a };
            if !visited[other] {
                visited[other] = true;
                tree.insert(e.id.clone());
                queue.push_back(other);
            }
        }
    }
    tree
}

/// A finite presentation of the fundamental group: the union of the vertex
/// alphabets plus one stable letter per non-tree edge, with one relator per
/// infinite cyclic edge (tree edges identify the two attaching words, non-tree
/// edges conjugate them by the stable letter).
#[derive(Clone, Debug)]
pub struct Presentation {
    pub alphabet: Alphabet,
    vertex_offset: Vec<usize>,
    stable: BTreeMap<String, usize>,
    pub relators: Vec<Relator>,
}

#[derive(Clone, Debug)]
pub struct Relator {
    pub edge: String,
    pub word: Word,
}

impl Presentation {
    /// Assembles a presentation directly; used for synthetic extensions that
    /// do not come from a graph (the stable-letter table stays empty).
    pub(crate) fn from_parts(
        alphabet: Alphabet,
        vertex_offset: Vec<usize>,
        relators: Vec<Relator>,
    ) -> Presentation {
        Presentation { alphabet, vertex_offset, stable: BTreeMap::new(), relators }
    }

    pub fn rank(&self) -> usize {
        self.alphabet.rank()
    }

    pub fn vertex_offset(&self, vertex_index: usize) -> usize {
        self.vertex_offset[vertex_index]
    }

    pub(crate) fn vertex_offsets(&self) -> &[usize] {
        &self.vertex_offset
    }

    /// Embeds a vertex word into the presentation alphabet.
    pub fn vertex_word(&self, vertex_index: usize, w: &Word) -> Word {
        w.shift(self.vertex_offset[vertex_index])
    }

    pub fn stable_letter(&self, edge_id: &str) -> Option<usize> {
        self.stable.get(edge_id).copied()
    }

    pub fn stable_letter_count(&self) -> usize {
        self.stable.len()
    }

    /// Rows are the abelianized relators over the presentation generators.
    pub fn relation_matrix(&self) -> IntMatrix {
        let n = self.rank();
        if self.relators.is_empty() {
            return IntMatrix::empty_rows(n);
        }
        IntMatrix::from_rows(
            self.relators
                .iter()
                .map(|r| {
                    crate::words::exponent_vector(&r.word, n)
                        .into_iter()
                        .map(BigInt::from)
                        .collect()
                })
                .collect(),
        )
    }

    pub fn abelianized(&self) -> CokernelForm {
        CokernelForm::new(&self.relation_matrix())
    }
}

pub fn presentation(g: &GraphOfGroups) -> Presentation {
    let tree = spanning_tree(g);
    let mut names: Vec<String> = Vec::new();
    let mut vertex_offset = Vec::with_capacity(g.vertices().len());
    for v in g.vertices() {
        vertex_offset.push(names.len());
        names.extend(v.alphabet.names().iter().cloned());
    }
    let mut stable = BTreeMap::new();
    for e in g.edges() {
        if !tree.contains(&e.id) {
            stable.insert(e.id.clone(), names.len());
            names.push(e.id.clone());
        }
    }
    let alphabet = Alphabet::new(names).expect("validated identifiers form an alphabet");
    let mut relators = Vec::new();
    for e in g.edges() {
        if e.kind != EdgeKind::InfiniteCyclic {
            continue;
        }
        let from = g.vertex_index(&e.from).unwrap();
        let to = g.vertex_index(&e.to).unwrap();
        let u = e.u.as_ref().unwrap().shift(vertex_offset[from]);
        let v = e.v.as_ref().unwrap().shift(vertex_offset[to]);
        let word = match stable.get(&e.id) {
            None => u.concat(&v.inverse()),
            Some(&t) => {
                let t_pos = Word::reduced([Letter::pos(t)]);
                let t_neg = Word::reduced([Letter::neg(t)]);
                t_pos.concat(&u).concat(&t_neg).concat(&v.inverse())
            }
        };
        relators.push(Relator { edge: e.id.clone(), word });
    }
    Presentation { alphabet, vertex_offset, stable, relators }
}

/// Abelianization invariants of the fundamental group, with the free
/// stable-letter summand already included.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AbelianizationResult {
    pub invariants: CokernelInvariants,
    pub stable_letters: usize,
}

pub fn abelianization(g: &GraphOfGroups) -> AbelianizationResult {
    let pres = presentation(g);
    let stable_letters = pres.stable_letter_count();
    AbelianizationResult {
        invariants: pres.abelianized().invariants,
        stable_letters,
    }
}

/// The rank the abelianization must have for the group to be parafree:
/// total vertex rank minus the cyclic edge count minus the graph Euler
/// characteristic `|V| - |E| - 1` (geometric edge count).
pub fn expected_rank(g: &GraphOfGroups) -> i64 {
    let ranks: i64 = g.total_vertex_rank() as i64;
    let cyclic = g.cyclic_edge_count() as i64;
    let chi = g.vertices().len() as i64 - g.edges().len() as i64 - 1;
    ranks - cyclic - chi
}

/// Result of removing one edge: either the graph splits into two sides glued
/// along the edge (amalgam shape) or it stays connected and the edge
/// contributes a stable letter (HNN shape). Attaching words are re-expressed
/// over the presentation generators of the piece containing them.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub removed_edge: String,
    pub kind: EdgeKind,
    pub shape: Shape,
}

#[derive(Clone, Debug)]
pub enum Shape {
    Amalgam {
        left: GraphOfGroups,
        right: GraphOfGroups,
        /// `(u, v)` over the left/right presentation alphabets; absent for a
        /// trivial edge group.
        words: Option<(Word, Word)>,
    },
    Hnn {
        base: GraphOfGroups,
        /// `(u, v)` over the base presentation alphabet; absent for a trivial
        /// edge group.
        words: Option<(Word, Word)>,
    },
}

fn induced_subgraph(g: &GraphOfGroups, keep: &[bool], skip_edge: usize) -> GraphOfGroups {
    let vertices: Vec<Vertex> = g
        .vertices()
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, v)| v.clone())
        .collect();
    let edges: Vec<Edge> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|(i, e)| {
            *i != skip_edge
                && keep[g.vertex_index(&e.from).unwrap()]
                && keep[g.vertex_index(&e.to).unwrap()]
        })
        .map(|(_, e)| e.clone())
        .collect();
    GraphOfGroups::new(vertices, edges).expect("induced component stays valid")
}

fn component_of(g: &GraphOfGroups, start: usize, skip_edge: usize) -> Vec<bool> {
    let mut visited = vec![false; g.vertices().len()];
    visited[start] = true;
    let mut queue = VecDeque::from([start]);
    while let Some(cur) = queue.pop_front() {
        for (i, e) in g.edges().iter().enumerate() {
            if i == skip_edge {
                continue;
            }
            let a = g.vertex_index(&e.from).unwrap();
            let b = g.vertex_index(&e.to).unwrap();
            for (x, y) in [(a, b), (b, a)] {
                if x == cur && !visited[y] {
                    visited[y] = true;
                    queue.push_back(y);
                }
            }
        }
    }
    visited
}

pub fn decompose(g: &GraphOfGroups, edge_id: &str) -> Result<Decomposition, ValidationError> {
    let ei = g
        .edge_index(edge_id)
        .ok_or_else(|| ValidationError::UnknownEdge(edge_id.to_string()))?;
    let e = &g.edges()[ei];
    let from = g.vertex_index(&e.from).unwrap();
    let to = g.vertex_index(&e.to).unwrap();
    let from_side = component_of(g, from, ei);
    if from_side[to] {
        // Still connected: HNN shape over everything minus the edge.
        let base = induced_subgraph(g, &vec![true; g.vertices().len()], ei);
        let words = e.kind_words(&base, &e.from, &e.to);
        Ok(Decomposition {
            removed_edge: e.id.clone(),
            kind: e.kind,
            shape: Shape::Hnn { base, words },
        })
    } else {
        let left = induced_subgraph(g, &from_side, ei);
        let right_side: Vec<bool> = from_side.iter().map(|b| !b).collect();
        let right = induced_subgraph(g, &right_side, ei);
        let words = match e.kind {
            EdgeKind::Trivial => None,
            EdgeKind::InfiniteCyclic => {
                let lp = presentation(&left);
                let rp = presentation(&right);
                let u = lp.vertex_word(left.vertex_index(&e.from).unwrap(), e.u.as_ref().unwrap());
                let v = rp.vertex_word(right.vertex_index(&e.to).unwrap(), e.v.as_ref().unwrap());
                Some((u, v))
            }
        };
        Ok(Decomposition {
            removed_edge: e.id.clone(),
            kind: e.kind,
            shape: Shape::Amalgam { left, right, words },
        })
    }
}

impl Edge {
    fn kind_words(&self, base: &GraphOfGroups, from: &str, to: &str) -> Option<(Word, Word)> {
        match self.kind {
            EdgeKind::Trivial => None,
            EdgeKind::InfiniteCyclic => {
                let pres = presentation(base);
                let u = pres.vertex_word(base.vertex_index(from).unwrap(), self.u.as_ref().unwrap());
                let v = pres.vertex_word(base.vertex_index(to).unwrap(), self.v.as_ref().unwrap());
                Some((u, v))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::words::parse_word;
    use num_bigint::BigInt;

    pub(crate) fn vertex(id: &str, gens: &[&str]) -> Vertex {
        Vertex {
            id: id.into(),
            alphabet: Alphabet::new(gens.iter().copied()).unwrap(),
        }
    }

    pub(crate) fn z_edge(
        id: &str,
        from: &str,
        to: &str,
        g: &[Vertex],
        u: &str,
        v: &str,
    ) -> Edge {
        let fa = &g.iter().find(|x| x.id == from).unwrap().alphabet;
        let ta = &g.iter().find(|x| x.id == to).unwrap().alphabet;
        Edge {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::InfiniteCyclic,
            u: Some(parse_word(fa, u).unwrap()),
            v: Some(parse_word(ta, v).unwrap()),
        }
    }

    pub(crate) fn trivial_edge(id: &str, from: &str, to: &str) -> Edge {
        Edge {
            id: id.into(),
            from: from.into(),
            to: to.into(),
            kind: EdgeKind::Trivial,
            u: None,
            v: None,
        }
    }

    pub(crate) fn trefoil() -> GraphOfGroups {
        let vs = vec![vertex("U", &["a"]), vertex("V", &["b"])];
        let es = vec![z_edge("e1", "U", "V", &vs, "a^2", "b^3")];
        GraphOfGroups::new(vs, es).unwrap()
    }

    #[test]
    fn validate_accepts_single_vertex() {
        let g = GraphOfGroups::new(vec![vertex("U", &["a", "b"])], vec![]).unwrap();
        assert!(g.is_single_free_vertex());
    }

    #[test]
    fn validate_rejects_trivial_attaching_word() {
        let vs = vec![vertex("U", &["a"]), vertex("V", &["b"])];
        let u = parse_word(&vs[0].alphabet, "a a^-1").unwrap();
        let v = parse_word(&vs[1].alphabet, "b").unwrap();
        let e = Edge {
            id: "e1".into(),
            from: "U".into(),
            to: "V".into(),
            kind: EdgeKind::InfiniteCyclic,
            u: Some(u),
            v: Some(v),
        };
        let err = GraphOfGroups::new(vs, vec![e]).unwrap_err();
        assert!(matches!(err, ValidationError::TrivialEdgeWord { .. }));
    }

    #[test]
    fn validate_rejects_unknown_vertex() {
        let vs = vec![vertex("U", &["a"])];
        let e = trivial_edge("e1", "U", "Z");
        let err = GraphOfGroups::new(vs, vec![e]).unwrap_err();
        assert!(matches!(err, ValidationError::UnknownVertexRef { .. }));
    }

    #[test]
    fn validate_rejects_disconnected() {
        let vs = vec![vertex("U", &["a"]), vertex("V", &["b"])];
        let err = GraphOfGroups::new(vs, vec![]).unwrap_err();
        assert_eq!(err, ValidationError::DisconnectedGraph);
    }

    #[test]
    fn validate_rejects_duplicate_ids() {
        let vs = vec![vertex("U", &["a"]), vertex("V", &["a"])];
        let es = vec![trivial_edge("e1", "U", "V")];
        let err = GraphOfGroups::new(vs, es).unwrap_err();
        assert_eq!(err, ValidationError::DuplicateId("a".into()));
    }

    #[test]
    fn spanning_tree_examples() {
        // Path A - B - C: both edges.
        let vs = vec![vertex("A", &["a"]), vertex("B", &["b"]), vertex("C", &["c"])];
        let es = vec![trivial_edge("e1", "A", "B"), trivial_edge("e2", "B", "C")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        assert_eq!(spanning_tree(&g).len(), 2);

        // Single vertex with a loop: loops never enter the tree.
        let vs = vec![vertex("A", &["a"])];
        let es = vec![z_edge("e1", "A", "A", &vs, "a", "a^2")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        assert!(spanning_tree(&g).is_empty());

        // Triangle explored from A in lexicographic edge order.
        let vs = vec![vertex("A", &["a"]), vertex("B", &["b"]), vertex("C", &["c"])];
        let es = vec![
            trivial_edge("e1", "A", "B"),
            trivial_edge("e2", "A", "C"),
            trivial_edge("e3", "B", "C"),
        ];
        let g = GraphOfGroups::new(vs, es).unwrap();
        let tree = spanning_tree(&g);
        assert_eq!(tree, BTreeSet::from(["e1".to_string(), "e2".to_string()]));
    }

    #[test]
    fn abelianization_examples() {
        // Trefoil: Z^2 / (2, -3) is free of rank 1.
        let ab = abelianization(&trefoil());
        assert_eq!(ab.invariants.free_rank, 1);
        assert!(ab.invariants.torsion.is_empty());
        assert_eq!(ab.stable_letters, 0);

        // Loop on F(a,b) with u = a, v = b: rank 2 plus the stable letter.
        let vs = vec![vertex("U", &["a", "b"])];
        let es = vec![z_edge("t", "U", "U", &vs, "a", "b")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        let ab = abelianization(&g);
        assert_eq!(ab.invariants.free_rank, 2);
        assert!(ab.invariants.torsion.is_empty());
        assert_eq!(ab.stable_letters, 1);

        // Loop on <a> with u = a, v = a^-1: Z/2 + Z(t).
        let vs = vec![vertex("U", &["a"])];
        let es = vec![z_edge("t", "U", "U", &vs, "a", "a^-1")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        let ab = abelianization(&g);
        assert_eq!(ab.invariants.free_rank, 1);
        assert_eq!(ab.invariants.torsion, vec![BigInt::from(2)]);
    }

    #[test]
    fn expected_rank_examples() {
        // F2 glued to F2 along one cyclic edge: 4 - 1 - (2 - 1 - 1) = 3.
        let vs = vec![vertex("U", &["a", "b"]), vertex("V", &["c", "d"])];
        let es = vec![z_edge("e1", "U", "V", &vs, "a", "c")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        assert_eq!(expected_rank(&g), 3);

        // Cyclic loop on F2: 2 - 1 - (1 - 1 - 1) = 2.
        let vs = vec![vertex("U", &["a", "b"])];
        let es = vec![z_edge("t", "U", "U", &vs, "a", "b")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        assert_eq!(expected_rank(&g), 2);

        // Lone F3 vertex: 3.
        let g = GraphOfGroups::new(vec![vertex("U", &["x", "y", "z"])], vec![]).unwrap();
        assert_eq!(expected_rank(&g), 3);
    }

    #[test]
    fn decompose_tree_edge_gives_amalgam() {
        let g = trefoil();
        let dec = decompose(&g, "e1").unwrap();
        match dec.shape {
            Shape::Amalgam { left, right, words } => {
                assert_eq!(left.vertices()[0].id, "U");
                assert_eq!(right.vertices()[0].id, "V");
                let (u, v) = words.unwrap();
                assert_eq!(u.len(), 2);
                assert_eq!(v.len(), 3);
            }
            _ => panic!("expected amalgam"),
        }
    }

    #[test]
    fn decompose_loop_gives_hnn() {
        let vs = vec![vertex("U", &["a"])];
        let es = vec![z_edge("t", "U", "U", &vs, "a", "a^2")];
        let g = GraphOfGroups::new(vs, es).unwrap();
        let dec = decompose(&g, "t").unwrap();
        match dec.shape {
            Shape::Hnn { base, words } => {
                assert!(base.is_single_free_vertex());
                let (u, v) = words.unwrap();
                assert_eq!(u.len(), 1);
                assert_eq!(v.len(), 2);
            }
            _ => panic!("expected hnn"),
        }
    }

    #[test]
    fn decompose_parallel_edge_stays_connected() {
        let vs = vec![vertex("U", &["a"]), vertex("V", &["b"])];
        let es = vec![
            z_edge("e1", "U", "V", &vs, "a", "b"),
            z_edge("e2", "U", "V", &vs, "a^2", "b^2"),
        ];
        let g = GraphOfGroups::new(vs, es).unwrap();
        let dec = decompose(&g, "e2").unwrap();
        match dec.shape {
            Shape::Hnn { base, .. } => assert_eq!(base.edges().len(), 1),
            _ => panic!("expected hnn"),
        }
        assert!(decompose(&g, "nope").is_err());
    }

    #[test]
    fn decomposition_preserves_abelianization() {
        use crate::lattice::{cokernel_invariants, IntMatrix};
        use crate::words::exponent_vector;

        // Rebuild a relation matrix from the pieces and compare invariants.
        let check = |g: &GraphOfGroups, edge: &str| {
            let want = abelianization(g).invariants;
            let dec = decompose(g, edge).unwrap();
            let (rows, ambient) = match &dec.shape {
                Shape::Amalgam { left, right, words } => {
                    let lp = presentation(left);
                    let rp = presentation(right);
                    let n = lp.rank() + rp.rank();
                    let mut rows: Vec<Vec<BigInt>> = Vec::new();
                    for r in &lp.relators {
                        let mut row = exponent_vector(&r.word, lp.rank());
                        row.extend(vec![0; rp.rank()]);
                        rows.push(row.into_iter().map(BigInt::from).collect());
                    }
                    for r in &rp.relators {
                        let mut row = vec![0; lp.rank()];
                        row.extend(exponent_vector(&r.word, rp.rank()));
                        rows.push(row.into_iter().map(BigInt::from).collect());
                    }
                    if let Some((u, v)) = words {
                        let mut row = exponent_vector(u, lp.rank());
                        row.extend(exponent_vector(v, rp.rank()).iter().map(|x| -x));
                        rows.push(row.into_iter().map(BigInt::from).collect());
                    }
                    (rows, n)
                }
                Shape::Hnn { base, words } => {
                    let bp = presentation(base);
                    let n = bp.rank() + 1;
                    let mut rows: Vec<Vec<BigInt>> = Vec::new();
                    for r in &bp.relators {
                        let mut row = exponent_vector(&r.word, bp.rank());
                        row.push(0);
                        rows.push(row.into_iter().map(BigInt::from).collect());
                    }
                    if let Some((u, v)) = words {
                        let mut row: Vec<i64> = exponent_vector(u, bp.rank())
                            .iter()
                            .zip(exponent_vector(v, bp.rank()))
                            .map(|(x, y)| x - y)
                            .collect();
                        row.push(0);
                        rows.push(row.into_iter().map(BigInt::from).collect());
                    }
                    (rows, n)
                }
            };
            let mat = if rows.is_empty() {
                IntMatrix::empty_rows(ambient)
            } else {
                IntMatrix::from_rows(rows)
            };
            let got = cokernel_invariants(&mat, ambient).unwrap();
            assert_eq!(got, want, "edge {edge}");
        };

        check(&trefoil(), "e1");

        let vs = vec![vertex("U", &["a", "b"]), vertex("V", &["c"])];
        let es = vec![
            z_edge("e1", "U", "V", &vs, "a b", "c^2"),
            z_edge("e2", "V", "U", &vs, "c", "b"),
        ];
        let g = GraphOfGroups::new(vs, es).unwrap();
        check(&g, "e1");
        check(&g, "e2");

        // Randomized sweep over small mixed graphs, every edge removed once.
        let mut rng = crate::rng::SplitMix64::new(0xDEC0);
        let mut done = 0;
        while done < 30 {
            let vs = vec![vertex("U", &["a", "b"]), vertex("V", &["c"])];
            let mut es = Vec::new();
            for i in 0..1 + rng.below(3) {
                let (from, to) = match rng.below(4) {
                    0 => ("U", "V"),
                    1 => ("V", "U"),
                    2 => ("U", "U"),
                    _ => ("V", "V"),
                };
                let id = format!("e{i}");
                if rng.below(4) == 0 {
                    es.push(trivial_edge(&id, from, to));
                } else {
                    let pick = |rng: &mut crate::rng::SplitMix64, rank: usize| loop {
                        let len = 1 + rng.below(3) as usize;
                        let letters: Vec<Letter> = (0..len)
                            .map(|_| {
                                Letter::new(
                                    rng.below(rank as u64) as usize,
                                    if rng.below(2) == 0 { 1 } else { -1 },
                                )
                            })
                            .collect();
                        let w = Word::reduced(letters);
                        if !w.is_empty() {
                            break w;
                        }
                    };
                    let ur = if from == "U" { 2 } else { 1 };
                    let vr = if to == "U" { 2 } else { 1 };
                    let u = pick(&mut rng, ur);
                    let v = pick(&mut rng, vr);
                    es.push(Edge {
                        id,
                        from: from.into(),
                        to: to.into(),
                        kind: EdgeKind::InfiniteCyclic,
                        u: Some(u),
                        v: Some(v),
                    });
                }
            }
            let Ok(g) = GraphOfGroups::new(vs, es) else {
                continue;
            };
            for e in g.edges() {
                check(&g, &e.id);
            }
            done += 1;
        }
    }
}
