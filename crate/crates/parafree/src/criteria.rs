//! Three-valued checkers for parafreeness of amalgams, HNN extensions and
//! general graphs of groups with free vertex groups and cyclic edge groups.
//!
//! Four conditions are evaluated and aggregated by three-valued conjunction:
//!
//! 1. vertex groups parafree (free by construction for direct input; full
//!    recursive verdicts for composite pieces),
//! 2. torsion-free abelianization of the expected rank (exact, via Smith
//!    normal form),
//! 3. per removed edge, at least one attaching word is not a proper power in
//!    its piece (exact on free vertices, sound tiers on composite pieces),
//! 4. per cyclic edge, the edge generator survives in some finite nilpotent
//!    quotient (tiered: abelian quotient, descent obstruction, rank-two
//!    determinant test, bounded unitriangular search).
//!
//! A `Parafree` or `NotParafree` status always rests on checkable evidence;
//! anything the tiers cannot settle stays `Unknown`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::graph::{
    decompose, expected_rank, presentation, EdgeKind, GraphOfGroups, Presentation, Relator, Shape,
};
use crate::lattice::{gcd_of, is_primitive_vector, primitivity_certificate, CokernelForm, IntMatrix};
use crate::normal_form::{is_nontrivial, MixedItem, MixedWord};
use crate::witness::{search_core, survivor_prime, NilWitness, SearchBounds, SearchOutcome};
use crate::words::{exponent_vector, primitive_root, Alphabet, Word, WordError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CheckError {
    #[error("attaching word `{side}` is trivial in its group")]
    TrivialWord { side: char },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// Kleene three-valued truth: `No` dominates conjunction, `Yes` dominates
/// disjunction, `Unknown` absorbs the rest.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Value3 {
    Yes,
    No,
    Unknown,
}

impl Value3 {
    pub fn and(self, other: Value3) -> Value3 {
        match (self, other) {
            (Value3::No, _) | (_, Value3::No) => Value3::No,
            (Value3::Yes, Value3::Yes) => Value3::Yes,
            _ => Value3::Unknown,
        }
    }

    pub fn or(self, other: Value3) -> Value3 {
        match (self, other) {
            (Value3::Yes, _) | (_, Value3::Yes) => Value3::Yes,
            (Value3::No, Value3::No) => Value3::No,
            _ => Value3::Unknown,
        }
    }

    pub fn all<I: IntoIterator<Item = Value3>>(values: I) -> Value3 {
        values.into_iter().fold(Value3::Yes, Value3::and)
    }

    pub fn label(self) -> &'static str {
        match self {
            Value3::Yes => "yes",
            Value3::No => "no",
            Value3::Unknown => "unknown",
        }
    }
}

/// One condition outcome together with its checkable evidence.
#[derive(Clone, Debug)]
pub struct Determination {
    pub value: Value3,
    pub evidence: Evidence,
}

impl Determination {
    pub fn yes(evidence: Evidence) -> Self {
        Determination { value: Value3::Yes, evidence }
    }

    pub fn no(evidence: Evidence) -> Self {
        Determination { value: Value3::No, evidence }
    }

    pub fn unknown(evidence: Evidence) -> Self {
        Determination { value: Value3::Unknown, evidence }
    }

    pub fn is_yes(&self) -> bool {
        self.value == Value3::Yes
    }

    pub fn is_no(&self) -> bool {
        self.value == Value3::No
    }

    pub fn is_unknown(&self) -> bool {
        self.value == Value3::Unknown
    }

    /// Three-valued disjunction keeping both branches as evidence.
    pub fn or2(first: Determination, second: Determination) -> Determination {
        Determination {
            value: first.value.or(second.value),
            evidence: Evidence::Disjunction {
                first: Box::new(first),
                second: Box::new(second),
            },
        }
    }
}

/// Structured reasons behind a determination. Everything here can be
/// re-validated without re-running the checker.
#[derive(Clone, Debug)]
pub enum Evidence {
    /// Vertex groups are finitely generated free, hence parafree.
    FreeVertexGroups { count: usize },
    /// Abelianization invariants against the expected rank.
    AbelianInvariants {
        free_rank: i64,
        expected: i64,
        torsion: Vec<BigInt>,
        stable_letters: usize,
    },
    /// Free-quotient coordinates of a class and their gcd; gcd 1 certifies
    /// primitivity (with a Bezout certificate), gcd 0 a vanishing class.
    ClassGcd {
        coords: Vec<BigInt>,
        gcd: BigInt,
        certificate: Option<Vec<BigInt>>,
    },
    /// The ambient abelianization has torsion, so primitivity of a class is
    /// not decided by the free quotient alone.
    TorsionObstruction { torsion: Vec<BigInt> },
    /// A root decomposition `word = conjugator root^exponent conjugator^-1`.
    /// `syntactic` marks a decomposition of a presentation word rather than
    /// of an element of a free group.
    Root {
        word: String,
        conjugator: String,
        root: String,
        exponent: u32,
        syntactic: bool,
    },
    /// Both branches of an either/or condition.
    Disjunction {
        first: Box<Determination>,
        second: Box<Determination>,
    },
    /// Edge-removal trace: one step per edge, nested pieces flattened in
    /// depth-first order.
    DecompositionTrace { steps: Vec<TraceStep> },
    /// Per-cyclic-edge outcomes, in lexicographic edge order.
    PerEdge { edges: Vec<(String, Determination)> },
    /// The class survives in the abelianization modulo this prime.
    ModPrimeSurvivor { prime: u32 },
    /// An explicit homomorphism into a unitriangular group.
    Witness(NilWitness),
    /// A conjugation loop doubling a power of a rank-one generator forces the
    /// edge word into every term of the lower central series.
    DescentObstruction {
        generator: String,
        u_exponent: i64,
        v_exponent: i64,
    },
    /// Rank-two base: the attaching words are independent in the
    /// abelianization iff this determinant is nonzero.
    AbelianIndependence {
        u_image: Vec<i64>,
        v_image: Vec<i64>,
        det: i64,
    },
    /// Search ran out of bounds (or was skipped because the verdict was
    /// already settled); lists fully enumerated (n, p) targets.
    SearchExhausted {
        bounds: SearchBounds,
        fully_enumerated: Vec<(u8, u32)>,
        skipped: bool,
    },
    /// Recursive verdicts for the pieces of a decomposition.
    SubVerdicts { parts: Vec<(String, Verdict)> },
    /// Output of an exact normal-form reduction.
    Reduction { reduced: String, trivial: bool },
    /// An honest dead end: which sub-test stayed undecided.
    Inconclusive { reason: String },
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    pub removed_edge: String,
    pub shape: &'static str,
    /// `None` for trivial edge groups: removing them imposes no condition.
    pub test: Option<Determination>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Status {
    Parafree,
    NotParafree,
    Unknown,
}

impl Status {
    pub fn from_value(v: Value3) -> Status {
        match v {
            Value3::Yes => Status::Parafree,
            Value3::No => Status::NotParafree,
            Value3::Unknown => Status::Unknown,
        }
    }

    pub fn as_value(self) -> Value3 {
        match self {
            Status::Parafree => Value3::Yes,
            Status::NotParafree => Value3::No,
            Status::Unknown => Value3::Unknown,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Status::Parafree => "parafree",
            Status::NotParafree => "not_parafree",
            Status::Unknown => "unknown",
        }
    }
}

/// Aggregated verdict: `Parafree` iff every condition is `Yes`,
/// `NotParafree` iff some condition is `No`, `Unknown` otherwise.
#[derive(Clone, Debug)]
pub struct Verdict {
    pub status: Status,
    pub conditions: BTreeMap<String, Determination>,
}

impl Verdict {
    fn aggregate(conditions: BTreeMap<String, Determination>) -> Verdict {
        let status = Status::from_value(Value3::all(conditions.values().map(|d| d.value)));
        Verdict { status, conditions }
    }

    pub fn condition(&self, id: &str) -> Option<&Determination> {
        self.conditions.get(id)
    }
}

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub bounds: SearchBounds,
    pub workers: usize,
    /// Preferred edge-removal order; lexicographic by id when empty.
    pub edge_order: Vec<String>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            bounds: SearchBounds::default(),
            workers: 1,
            edge_order: Vec::new(),
        }
    }
}

/// Proper-power test for an element given as a word over the presentation
/// generators of `g`. Exact on a lone free vertex. On composite pieces:
/// a primitive image in the free quotient of the abelianization rules powers
/// out, an explicit syntactic power rules them in, anything else is Unknown.
pub fn not_proper_power_in(g: &GraphOfGroups, w: &Word) -> Determination {
    let pres = presentation(g);
    if w.is_empty() {
        return Determination::unknown(Evidence::Inconclusive {
            reason: "proper-power test requires a nontrivial element".into(),
        });
    }
    if g.is_single_free_vertex() {
        let rd = primitive_root(w).expect("nonempty word");
        let evidence = root_evidence(&pres.alphabet, w, &rd, false);
        return if rd.exponent >= 2 {
            Determination::no(evidence)
        } else {
            Determination::yes(evidence)
        };
    }
    let form = pres.abelianized();
    let x = to_big(&exponent_vector(w, pres.rank()));
    let free_coords = form.free_projection(&form.class_coords(&x));
    if is_primitive_vector(&free_coords) {
        let certificate = primitivity_certificate(&free_coords);
        return Determination::yes(Evidence::ClassGcd {
            gcd: BigInt::one(),
            coords: free_coords,
            certificate,
        });
    }
    let rd = primitive_root(w).expect("nonempty word");
    if rd.exponent >= 2 {
        return Determination::no(root_evidence(&pres.alphabet, w, &rd, true));
    }
    Determination::unknown(Evidence::Inconclusive {
        reason: "not settled by abelianized primitivity or a syntactic power".into(),
    })
}

fn root_evidence(
    alphabet: &Alphabet,
    w: &Word,
    rd: &crate::words::RootDecomposition,
    syntactic: bool,
) -> Evidence {
    Evidence::Root {
        word: w.display(alphabet).to_string(),
        conjugator: rd.conjugator.display(alphabet).to_string(),
        root: rd.root.display(alphabet).to_string(),
        exponent: rd.exponent,
        syntactic,
    }
}

fn to_big(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

/// Primitivity of a class in a cokernel, as a three-valued determination.
/// The zero class counts as a proper power. With ambient torsion only the
/// primitive case is decided (the free quotient is still a homomorphism).
fn class_primitivity(form: &CokernelForm, x: &[BigInt]) -> Determination {
    let coords = form.class_coords(x);
    let free_coords = form.free_projection(&coords);
    let gcd = gcd_of(&free_coords);
    if form.is_zero_class(&coords) {
        return Determination::no(Evidence::ClassGcd {
            coords: free_coords,
            gcd: BigInt::zero(),
            certificate: None,
        });
    }
    if gcd.is_one() {
        let certificate = primitivity_certificate(&free_coords);
        return Determination::yes(Evidence::ClassGcd { coords: free_coords, gcd, certificate });
    }
    if form.is_torsion_free() {
        return Determination::no(Evidence::ClassGcd { coords: free_coords, gcd, certificate: None });
    }
    Determination::unknown(Evidence::TorsionObstruction {
        torsion: form.invariants.torsion.clone(),
    })
}

/// Full check for a finite graph of groups with free vertex groups and
/// cyclic edge groups. Panics if `opts.bounds` are malformed; use
/// `SearchBounds::validate` to check user-supplied bounds first.
pub fn check_gog(g: &GraphOfGroups, opts: &CheckOptions) -> Verdict {
    opts.bounds.validate().expect("search bounds must be valid");
    let mut conditions = BTreeMap::new();
    conditions.insert(
        "cond1".to_string(),
        Determination::yes(Evidence::FreeVertexGroups { count: g.vertices().len() }),
    );

    let pres = presentation(g);
    let form = pres.abelianized();
    let expected = expected_rank(g);
    let free_rank = form.invariants.free_rank as i64;
    let stable_letters = pres.stable_letter_count();
    let ab_evidence = Evidence::AbelianInvariants {
        free_rank,
        expected,
        torsion: form.invariants.torsion.clone(),
        stable_letters,
    };
    let cond2 = if !form.invariants.torsion.is_empty() || free_rank != expected {
        Determination::no(ab_evidence)
    } else {
        Determination::yes(ab_evidence)
    };
    conditions.insert("cond2".to_string(), cond2);

    conditions.insert("cond3".to_string(), centralizer_condition(g, opts));

    let settled_no = conditions.values().any(|d| d.is_no());
    conditions.insert(
        "cond4".to_string(),
        edge_survival_condition(g, &pres, &form, opts, !settled_no),
    );

    Verdict::aggregate(conditions)
}

fn pick_edge(g: &GraphOfGroups, opts: &CheckOptions) -> String {
    for id in &opts.edge_order {
        if g.edge_index(id).is_some() {
            return id.clone();
        }
    }
    g.edges()
        .iter()
        .map(|e| e.id.clone())
        .min()
        .expect("caller ensures at least one edge")
}

/// Mechanization of the cyclic-centralizer condition: peel edges off one at
/// a time and require, at every step with a cyclic edge group, that at least
/// one attaching word is not a proper power in its piece.
fn centralizer_condition(g: &GraphOfGroups, opts: &CheckOptions) -> Determination {
    let mut steps = Vec::new();
    let value = centralizer_scan(g, opts, &mut steps);
    Determination { value, evidence: Evidence::DecompositionTrace { steps } }
}

fn centralizer_scan(g: &GraphOfGroups, opts: &CheckOptions, steps: &mut Vec<TraceStep>) -> Value3 {
    if g.edges().is_empty() {
        return Value3::Yes;
    }
    let edge_id = pick_edge(g, opts);
    let dec = decompose(g, &edge_id).expect("edge picked from the graph");
    match dec.shape {
        Shape::Amalgam { left, right, words } => {
            let test = words.map(|(u, v)| {
                Determination::or2(not_proper_power_in(&left, &u), not_proper_power_in(&right, &v))
            });
            let step_value = test.as_ref().map_or(Value3::Yes, |t| t.value);
            steps.push(TraceStep { removed_edge: edge_id, shape: "amalgam", test });
            step_value
                .and(centralizer_scan(&left, opts, steps))
                .and(centralizer_scan(&right, opts, steps))
        }
        Shape::Hnn { base, words } => {
            let test = words.map(|(u, v)| {
                Determination::or2(not_proper_power_in(&base, &u), not_proper_power_in(&base, &v))
            });
            let step_value = test.as_ref().map_or(Value3::Yes, |t| t.value);
            steps.push(TraceStep { removed_edge: edge_id, shape: "hnn", test });
            step_value.and(centralizer_scan(&base, opts, steps))
        }
    }
}

/// Survival of every cyclic edge word in some finite nilpotent quotient.
fn edge_survival_condition(
    g: &GraphOfGroups,
    pres: &Presentation,
    form: &CokernelForm,
    opts: &CheckOptions,
    mut allow_search: bool,
) -> Determination {
    let mut edge_ids: Vec<&str> = g
        .edges()
        .iter()
        .filter(|e| e.kind == EdgeKind::InfiniteCyclic)
        .map(|e| e.id.as_str())
        .collect();
    edge_ids.sort();
    let mut per_edge = Vec::new();
    let mut value = Value3::Yes;
    for id in edge_ids {
        let det = survival_for_edge(g, pres, form, id, opts, allow_search);
        if det.is_no() {
            allow_search = false;
        }
        value = value.and(det.value);
        per_edge.push((id.to_string(), det));
    }
    Determination { value, evidence: Evidence::PerEdge { edges: per_edge } }
}

fn signed_power_of_single_generator(w: &Word) -> i64 {
    w.letters().iter().map(|l| l.sign as i64).sum()
}

fn survival_for_edge(
    g: &GraphOfGroups,
    pres: &Presentation,
    form: &CokernelForm,
    edge_id: &str,
    opts: &CheckOptions,
    allow_search: bool,
) -> Determination {
    let e = &g.edges()[g.edge_index(edge_id).unwrap()];
    let from = g.vertex_index(&e.from).unwrap();
    let u = pres.vertex_word(from, e.u.as_ref().unwrap());
    let x = to_big(&exponent_vector(&u, pres.rank()));

    if let Some(prime) = survivor_prime(form, &x) {
        return Determination::yes(Evidence::ModPrimeSurvivor { prime });
    }

    // Conjugation loop on a rank-one vertex with exponent ratio two: the
    // relation t a^n t^-1 = a^{2n} gives a^n = [t, a^n], so a^n sits in every
    // lower-central term and dies in every nilpotent quotient.
    if e.from == e.to {
        let vertex = &g.vertices()[from];
        if vertex.alphabet.rank() == 1 {
            let n1 = signed_power_of_single_generator(e.u.as_ref().unwrap());
            let n2 = signed_power_of_single_generator(e.v.as_ref().unwrap());
            if n2 == 2 * n1 || n1 == 2 * n2 {
                return Determination::no(Evidence::DescentObstruction {
                    generator: vertex.alphabet.name(0).to_string(),
                    u_exponent: n1,
                    v_exponent: n2,
                });
            }
        }
        // A single conjugation loop on a rank-two free vertex: survival is
        // decided exactly by independence of the two attaching words in the
        // abelianization of the base.
        if g.vertices().len() == 1 && g.edges().len() == 1 && g.vertices()[0].alphabet.rank() == 2 {
            return determinant_independence(e.u.as_ref().unwrap(), e.v.as_ref().unwrap());
        }
    }

    if allow_search {
        match search_core(pres, &u, &opts.bounds, opts.workers).expect("validated bounds") {
            SearchOutcome::Found(mut w) => {
                w.edge = Some(edge_id.to_string());
                Determination::yes(Evidence::Witness(w))
            }
            SearchOutcome::NoWitnessUpToBound { fully_enumerated } => {
                Determination::unknown(Evidence::SearchExhausted {
                    bounds: opts.bounds.clone(),
                    fully_enumerated,
                    skipped: false,
                })
            }
        }
    } else {
        Determination::unknown(Evidence::SearchExhausted {
            bounds: opts.bounds.clone(),
            fully_enumerated: Vec::new(),
            skipped: true,
        })
    }
}

fn determinant_independence(u: &Word, v: &Word) -> Determination {
    let a = exponent_vector(u, 2);
    let b = exponent_vector(v, 2);
    let det = a[0] * b[1] - a[1] * b[0];
    let evidence = Evidence::AbelianIndependence { u_image: a, v_image: b, det };
    if det != 0 {
        Determination::yes(evidence)
    } else {
        Determination::no(evidence)
    }
}

fn require_nontrivial(g: &GraphOfGroups, w: &Word, side: char) -> Result<(), CheckError> {
    let pres = presentation(g);
    w.check_rank(pres.rank())?;
    if w.is_empty() || is_nontrivial(g, &presentation_word_to_mixed(g, &pres, w)).is_no() {
        return Err(CheckError::TrivialWord { side });
    }
    Ok(())
}

/// Splits a presentation word into vertex factors and stable letters so the
/// exact one-level reducers can look at it.
fn presentation_word_to_mixed(g: &GraphOfGroups, pres: &Presentation, w: &Word) -> MixedWord {
    let mut items: Vec<MixedItem> = Vec::new();
    for l in w.letters() {
        let mut placed = false;
        for (vi, vertex) in g.vertices().iter().enumerate() {
            let off = pres.vertex_offset(vi);
            if l.gen >= off && l.gen < off + vertex.alphabet.rank() {
                let letter = crate::words::Letter::new(l.gen - off, l.sign);
                match items.last_mut() {
                    Some(MixedItem::Factor { vertex, word }) if *vertex == vi => {
                        *word = word.concat(&Word::reduced([letter]));
                    }
                    _ => items.push(MixedItem::Factor {
                        vertex: vi,
                        word: Word::reduced([letter]),
                    }),
                }
                placed = true;
                break;
            }
        }
        if !placed {
            // Stable letter: locate the edge by generator name.
            let name = pres.alphabet.name(l.gen);
            let edge = g.edge_index(name).expect("stable letters are edge ids");
            items.push(MixedItem::Stable { edge, sign: l.sign });
        }
    }
    MixedWord { items }
}

/// Checker for a one-edge amalgam `left *_{u=v} right` of two graph-of-groups
/// pieces; `u` and `v` are words over the piece presentations.
pub fn check_amalgam(
    left: &GraphOfGroups,
    right: &GraphOfGroups,
    u: &Word,
    v: &Word,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    require_nontrivial(left, u, 'u')?;
    require_nontrivial(right, v, 'v')?;
    let lp = presentation(left);
    let rp = presentation(right);

    let lv = check_gog(left, opts);
    let rv = check_gog(right, opts);
    let cond1 = Determination {
        value: lv.status.as_value().and(rv.status.as_value()),
        evidence: Evidence::SubVerdicts {
            parts: vec![("left".to_string(), lv), ("right".to_string(), rv)],
        },
    };

    // Abelianization of the free product: block-diagonal relation matrix.
    let n = lp.rank() + rp.rank();
    let mut rows: Vec<Vec<BigInt>> = Vec::new();
    for r in &lp.relators {
        let mut row = to_big(&exponent_vector(&r.word, lp.rank()));
        row.extend(std::iter::repeat_n(BigInt::zero(), rp.rank()));
        rows.push(row);
    }
    for r in &rp.relators {
        let mut row: Vec<BigInt> = std::iter::repeat_n(BigInt::zero(), lp.rank()).collect();
        row.extend(to_big(&exponent_vector(&r.word, rp.rank())));
        rows.push(row);
    }
    let matrix = if rows.is_empty() {
        IntMatrix::empty_rows(n)
    } else {
        IntMatrix::from_rows(rows)
    };
    let form = CokernelForm::new(&matrix);
    let mut x = to_big(&exponent_vector(u, lp.rank()));
    x.extend(exponent_vector(v, rp.rank()).iter().map(|&c| BigInt::from(-c)));
    let cond2 = class_primitivity(&form, &x);

    let cond3 = Determination::or2(not_proper_power_in(left, u), not_proper_power_in(right, v));

    let mut conditions = BTreeMap::new();
    conditions.insert("cond1".to_string(), cond1);
    conditions.insert("cond2".to_string(), cond2);
    conditions.insert("cond3".to_string(), cond3);
    Ok(Verdict::aggregate(conditions))
}

/// Checker for a cyclic HNN extension of a graph-of-groups piece, with the
/// stable letter conjugating `u` to `v`. The rank-two determinant shortcut
/// is enabled; `check_hnn_generic` runs the generic tiers only.
pub fn check_hnn(
    base: &GraphOfGroups,
    u: &Word,
    v: &Word,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    check_hnn_impl(base, u, v, opts, true)
}

/// The generic condition-four tiers without the rank-two determinant
/// shortcut; used to cross-validate the shortcut.
pub fn check_hnn_generic(
    base: &GraphOfGroups,
    u: &Word,
    v: &Word,
    opts: &CheckOptions,
) -> Result<Verdict, CheckError> {
    check_hnn_impl(base, u, v, opts, false)
}

fn check_hnn_impl(
    base: &GraphOfGroups,
    u: &Word,
    v: &Word,
    opts: &CheckOptions,
    use_determinant: bool,
) -> Result<Verdict, CheckError> {
    require_nontrivial(base, u, 'u')?;
    require_nontrivial(base, v, 'v')?;
    let pres = presentation(base);

    let bv = check_gog(base, opts);
    let cond1 = Determination {
        value: bv.status.as_value(),
        evidence: Evidence::SubVerdicts { parts: vec![("base".to_string(), bv)] },
    };

    // Difference class in the abelianization of the base.
    let form = pres.abelianized();
    let x: Vec<BigInt> = exponent_vector(u, pres.rank())
        .iter()
        .zip(exponent_vector(v, pres.rank()))
        .map(|(a, b)| BigInt::from(a - b))
        .collect();
    let cond2 = class_primitivity(&form, &x);

    let cond3 = Determination::or2(not_proper_power_in(base, u), not_proper_power_in(base, v));

    let settled_no = cond1.is_no() || cond2.is_no() || cond3.is_no();
    let cond4 = hnn_survival(base, &pres, u, v, opts, use_determinant, !settled_no);

    let mut conditions = BTreeMap::new();
    conditions.insert("cond1".to_string(), cond1);
    conditions.insert("cond2".to_string(), cond2);
    conditions.insert("cond3".to_string(), cond3);
    conditions.insert("cond4".to_string(), cond4);
    Ok(Verdict::aggregate(conditions))
}

/// Extends a presentation by a fresh stable letter with relation
/// `t u t^-1 = v`.
fn extended_presentation(pres: &Presentation, u: &Word, v: &Word) -> Presentation {
    let mut names: Vec<String> = pres.alphabet.names().to_vec();
    let stable = fresh_name(&names);
    names.push(stable.clone());
    let alphabet = Alphabet::new(names).expect("fresh name keeps the alphabet valid");
    let t = alphabet.rank() - 1;
    let t_pos = Word::reduced([crate::words::Letter::pos(t)]);
    let t_neg = Word::reduced([crate::words::Letter::neg(t)]);
    let relator = t_pos.concat(u).concat(&t_neg).concat(&v.inverse());
    let mut relators: Vec<Relator> = pres.relators.clone();
    relators.push(Relator { edge: stable, word: relator });
    Presentation::from_parts(alphabet, pres.vertex_offsets().to_vec(), relators)
}

fn fresh_name(names: &[String]) -> String {
    if !names.iter().any(|n| n == "t") {
        return "t".to_string();
    }
    (0..)
        .map(|i| format!("t{i}"))
        .find(|c| !names.iter().any(|n| n == c))
        .unwrap()
}

fn hnn_survival(
    base: &GraphOfGroups,
    pres: &Presentation,
    u: &Word,
    v: &Word,
    opts: &CheckOptions,
    use_determinant: bool,
    allow_search: bool,
) -> Determination {
    let ext = extended_presentation(pres, u, v);
    let wform = ext.abelianized();
    let mut x = to_big(&exponent_vector(u, pres.rank()));
    x.push(BigInt::zero());
    if let Some(prime) = survivor_prime(&wform, &x) {
        return Determination::yes(Evidence::ModPrimeSurvivor { prime });
    }

    if base.is_single_free_vertex() {
        let rank = base.vertices()[0].alphabet.rank();
        if rank == 1 {
            let n1 = signed_power_of_single_generator(u);
            let n2 = signed_power_of_single_generator(v);
            if n2 == 2 * n1 || n1 == 2 * n2 {
                return Determination::no(Evidence::DescentObstruction {
                    generator: base.vertices()[0].alphabet.name(0).to_string(),
                    u_exponent: n1,
                    v_exponent: n2,
                });
            }
        }
        if rank == 2 && use_determinant {
            return determinant_independence(u, v);
        }
    }

    if allow_search {
        let survivor = u.clone();
        match search_core(&ext, &survivor, &opts.bounds, opts.workers).expect("validated bounds") {
            SearchOutcome::Found(w) => Determination::yes(Evidence::Witness(w)),
            SearchOutcome::NoWitnessUpToBound { fully_enumerated } => {
                Determination::unknown(Evidence::SearchExhausted {
                    bounds: opts.bounds.clone(),
                    fully_enumerated,
                    skipped: false,
                })
            }
        }
    } else {
        Determination::unknown(Evidence::SearchExhausted {
            bounds: opts.bounds.clone(),
            fully_enumerated: Vec::new(),
            skipped: true,
        })
    }
}
