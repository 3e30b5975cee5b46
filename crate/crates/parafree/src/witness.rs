//! Search for finite nilpotent quotients in which a designated edge word
//! survives: homomorphisms from a graph-of-groups presentation into upper
//! unitriangular groups over prime fields.
//!
//! The search is a positive semi-decision: a returned witness is always
//! independently checkable, while bound exhaustion is a value, never
//! evidence of absence.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicU64, Ordering};

use num_bigint::BigInt;
use thiserror::Error;

use crate::criteria::{Determination, Evidence};
use crate::graph::{presentation, EdgeKind, GraphOfGroups, Presentation};
use crate::lattice::CokernelForm;
use crate::rng::SplitMix64;
use crate::ut::{group_order, UtElement, MAX_DIM, MIN_DIM};
use crate::words::{exponent_vector, Alphabet, Word};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("unknown generator `{0}` in word")]
    UnknownGenerator(String),
    #[error("images use mixed dimensions or primes")]
    IncompatibleTargets,
    #[error("no images supplied")]
    EmptyImages,
    #[error("edge `{0}` does not carry an infinite cyclic edge group")]
    EdgeNotCyclic(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("invalid search bounds: {0}")]
    BadBounds(String),
}

/// Primes tried by the abelian tier. Any class that is nonzero in the
/// abelianization with content below 14 survives modulo one of these.
pub const ABELIAN_TIER_PRIMES: [u32; 6] = [2, 3, 5, 7, 11, 13];

pub fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

/// Exploration bounds for the witness search. Identical bounds and seed give
/// identical results regardless of the worker count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SearchBounds {
    pub dims: Vec<u8>,
    pub primes: Vec<u32>,
    pub exhaustive_cap: u64,
    pub sample_count: u64,
    pub seed: u64,
}

impl Default for SearchBounds {
    fn default() -> Self {
        SearchBounds {
            dims: vec![3, 4],
            primes: vec![2, 3, 5],
            exhaustive_cap: 10_000_000,
            sample_count: 100_000,
            seed: 0,
        }
    }
}

impl SearchBounds {
    pub fn validate(&self) -> Result<(), WitnessError> {
        if self.dims.is_empty() {
            return Err(WitnessError::BadBounds("no dimensions".into()));
        }
        for &n in &self.dims {
            if !(MIN_DIM..=MAX_DIM).contains(&n) {
                return Err(WitnessError::BadBounds(format!(
                    "dimension {n} outside {MIN_DIM}..={MAX_DIM}"
                )));
            }
        }
        if self.primes.is_empty() {
            return Err(WitnessError::BadBounds("no primes".into()));
        }
        for &p in &self.primes {
            if !is_prime(p) {
                return Err(WitnessError::BadBounds(format!("{p} is not prime")));
            }
        }
        if self.exhaustive_cap == 0 {
            return Err(WitnessError::BadBounds("zero enumeration cap".into()));
        }
        Ok(())
    }
}

/// A homomorphism into UT(n, F_p) under which every presentation relation
/// holds and the designated word survives.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NilWitness {
    pub n: u8,
    pub p: u32,
    pub images: BTreeMap<String, UtElement>,
    /// Edge whose attaching word survives, when the search came from a graph.
    pub edge: Option<String>,
    /// The surviving word rendered over the presentation generators.
    pub surviving_word: String,
    /// Edge ids of the relations satisfied by the images.
    pub checked_relations: Vec<String>,
}

#[derive(Clone, Debug)]
pub enum SearchOutcome {
    Found(NilWitness),
    /// No witness within bounds; lists the (n, p) targets whose full
    /// homomorphism space was enumerated.
    NoWitnessUpToBound { fully_enumerated: Vec<(u8, u32)> },
}

/// Evaluates a word over named generators. All images must share (n, p).
pub fn eval_word(
    images: &BTreeMap<String, UtElement>,
    alphabet: &Alphabet,
    w: &Word,
) -> Result<UtElement, WitnessError> {
    let mut iter = images.values();
    let Some(first) = iter.next() else {
        return Err(WitnessError::EmptyImages);
    };
    if !iter.all(|m| m.compatible(first)) {
        return Err(WitnessError::IncompatibleTargets);
    }
    let mut acc = UtElement::identity(first.dim(), first.prime());
    for l in w.letters() {
        let name = alphabet.name(l.gen);
        let img = images
            .get(name)
            .ok_or_else(|| WitnessError::UnknownGenerator(name.to_string()))?;
        acc = if l.sign > 0 { acc.mul(img) } else { acc.mul(&img.inverse()) };
    }
    Ok(acc)
}

fn eval_indexed(images: &[UtElement], inverses: &[UtElement], w: &Word, n: u8, p: u32) -> UtElement {
    let mut acc = UtElement::identity(n, p);
    for l in w.letters() {
        let img = if l.sign > 0 { &images[l.gen] } else { &inverses[l.gen] };
        acc = acc.mul(img);
    }
    acc
}

/// First prime of the abelian tier modulo which the class of `x` survives.
pub(crate) fn survivor_prime(form: &CokernelForm, x: &[BigInt]) -> Option<u32> {
    let coords = form.class_coords(x);
    ABELIAN_TIER_PRIMES
        .iter()
        .copied()
        .find(|&p| form.survives_mod_prime(&coords, p))
}

/// Decides survival of an edge word in the abelianization: a nonzero image
/// modulo a small prime exhibits a finite abelian (hence nilpotent) quotient.
pub fn abelian_witness(g: &GraphOfGroups, edge: &str) -> Result<Determination, WitnessError> {
    let (pres, u) = embedded_edge_word(g, edge)?;
    let form = pres.abelianized();
    let x: Vec<BigInt> = exponent_vector(&u, pres.rank())
        .into_iter()
        .map(BigInt::from)
        .collect();
    Ok(match survivor_prime(&form, &x) {
        Some(p) => Determination::yes(Evidence::ModPrimeSurvivor { prime: p }),
        None => Determination::unknown(Evidence::Inconclusive {
            reason: format!(
                "edge word vanishes in the abelianization modulo every prime up to {}",
                ABELIAN_TIER_PRIMES.last().unwrap()
            ),
        }),
    })
}

fn embedded_edge_word(g: &GraphOfGroups, edge: &str) -> Result<(Presentation, Word), WitnessError> {
    let ei = g
        .edge_index(edge)
        .ok_or_else(|| WitnessError::UnknownEdge(edge.to_string()))?;
    let e = &g.edges()[ei];
    if e.kind != EdgeKind::InfiniteCyclic {
        return Err(WitnessError::EdgeNotCyclic(edge.to_string()));
    }
    let pres = presentation(g);
    let from = g.vertex_index(&e.from).unwrap();
    let u = pres.vertex_word(from, e.u.as_ref().unwrap());
    Ok((pres, u))
}

pub(crate) struct RawHit {
    pub n: u8,
    pub p: u32,
    pub images: Vec<UtElement>,
}

/// Deterministic bounded search over homomorphism tuples: for each (n, p) in
/// bounds order, generator-image tuples are enumerated in lexicographic order
/// of their concatenated entry vectors up to the cap, then sampled from the
/// seed. The accepted tuple is the earliest in that sequence, independent of
/// the worker count.
pub(crate) fn search_core(
    pres: &Presentation,
    survivor: &Word,
    bounds: &SearchBounds,
    workers: usize,
) -> Result<SearchOutcome, WitnessError> {
    bounds.validate()?;
    let gens = pres.rank();
    let relators: Vec<&Word> = pres.relators.iter().map(|r| &r.word).collect();
    let workers = workers.max(1);
    let mut fully = Vec::new();
    for &n in &bounds.dims {
        for &p in &bounds.primes {
            let order = group_order(n, p);
            let total: Option<u128> = (0..gens).try_fold(1u128, |acc, _| acc.checked_mul(order as u128));
            let exhaustive_end: u64 = match total {
                Some(t) if t <= bounds.exhaustive_cap as u128 => t as u64,
                _ => bounds.exhaustive_cap,
            };
            let check_tuple = |images: &[UtElement]| -> bool {
                let inverses: Vec<UtElement> = images.iter().map(UtElement::inverse).collect();
                relators
                    .iter()
                    .all(|r| eval_indexed(images, &inverses, r, n, p).is_identity())
                    && !eval_indexed(images, &inverses, survivor, n, p).is_identity()
            };
            let decode = |idx: u64| -> Vec<UtElement> {
                let mut rest = idx;
                let mut images = vec![UtElement::identity(n, p); gens];
                for g in (0..gens).rev() {
                    images[g] = UtElement::from_index(n, p, rest % order);
                    rest /= order;
                }
                images
            };
            if let Some(idx) = scan_first(0, exhaustive_end, workers, &|i| check_tuple(&decode(i))) {
                return Ok(SearchOutcome::Found(raw_to_witness(pres, survivor, RawHit {
                    n,
                    p,
                    images: decode(idx),
                })));
            }
            let exhausted_all = total.is_some_and(|t| t <= bounds.exhaustive_cap as u128);
            if exhausted_all {
                fully.push((n, p));
                continue;
            }
            // Sampling phase: tuples drawn uniformly from the whole space.
            // Each ordinal seeds its own generator, so the stream is fixed by
            // (seed, n, p, ordinal) alone and workers need no shared state.
            let phase_seed = bounds.seed ^ ((n as u64) << 56) ^ ((p as u64) << 32);
            let sample_images = |ord: u64| -> Vec<UtElement> {
                let mut rng = SplitMix64::new(phase_seed.wrapping_add(ord));
                (0..gens)
                    .map(|_| UtElement::from_index(n, p, rng.below(order)))
                    .collect()
            };
            if let Some(ord) = scan_first(0, bounds.sample_count, workers, &|i| {
                check_tuple(&sample_images(i))
            }) {
                return Ok(SearchOutcome::Found(raw_to_witness(pres, survivor, RawHit {
                    n,
                    p,
                    images: sample_images(ord),
                })));
            }
        }
    }
    Ok(SearchOutcome::NoWitnessUpToBound { fully_enumerated: fully })
}

fn raw_to_witness(pres: &Presentation, survivor: &Word, hit: RawHit) -> NilWitness {
    let images: BTreeMap<String, UtElement> = pres
        .alphabet
        .names()
        .iter()
        .cloned()
        .zip(hit.images.iter().copied())
        .collect();
    NilWitness {
        n: hit.n,
        p: hit.p,
        images,
        edge: None,
        surviving_word: survivor.display(&pres.alphabet).to_string(),
        checked_relations: pres.relators.iter().map(|r| r.edge.clone()).collect(),
    }
}

/// Earliest position in `[start, end)` whose tuple satisfies `check`,
/// scanned by `workers` threads. Workers race but the minimum wins, so the
/// result never depends on scheduling.
fn scan_first(start: u64, end: u64, workers: usize, check: &(dyn Fn(u64) -> bool + Sync)) -> Option<u64> {
    if start >= end {
        return None;
    }
    let span = end - start;
    if workers <= 1 || span < 4096 {
        return (start..end).find(|&i| check(i));
    }
    let workers = workers.min(span as usize).min(64);
    let chunk = span.div_ceil(workers as u64);
    let best = AtomicU64::new(u64::MAX);
    std::thread::scope(|scope| {
        for w in 0..workers as u64 {
            let lo = start + w * chunk;
            let hi = (lo + chunk).min(end);
            let best = &best;
            scope.spawn(move || {
                for i in lo..hi {
                    if i % 1024 == 0 && best.load(Ordering::Relaxed) < lo {
                        return;
                    }
                    if check(i) {
                        best.fetch_min(i, Ordering::Relaxed);
                        return;
                    }
                }
            });
        }
    });
    match best.load(Ordering::Relaxed) {
        u64::MAX => None,
        i => Some(i),
    }
}

pub fn search_witness(
    g: &GraphOfGroups,
    edge: &str,
    bounds: &SearchBounds,
) -> Result<SearchOutcome, WitnessError> {
    search_witness_with_workers(g, edge, bounds, 1)
}

pub fn search_witness_with_workers(
    g: &GraphOfGroups,
    edge: &str,
    bounds: &SearchBounds,
    workers: usize,
) -> Result<SearchOutcome, WitnessError> {
    let (pres, u) = embedded_edge_word(g, edge)?;
    let outcome = search_core(&pres, &u, bounds, workers)?;
    Ok(match outcome {
        SearchOutcome::Found(mut w) => {
            w.edge = Some(edge.to_string());
            SearchOutcome::Found(w)
        }
        other => other,
    })
}

/// Re-checks a witness from scratch: every presentation relation must hold
/// and the edge word must stay away from the identity.
pub fn verify_witness(g: &GraphOfGroups, w: &NilWitness) -> bool {
    let Some(edge) = &w.edge else {
        return false;
    };
    let Ok((pres, u)) = embedded_edge_word(g, edge) else {
        return false;
    };
    if w.images.len() != pres.rank() {
        return false;
    }
    for name in pres.alphabet.names() {
        let Some(img) = w.images.get(name) else {
            return false;
        };
        if img.dim() != w.n || img.prime() != w.p {
            return false;
        }
    }
    for relator in &pres.relators {
        match eval_word(&w.images, &pres.alphabet, &relator.word) {
            Ok(m) if m.is_identity() => {}
            _ => return false,
        }
    }
    match eval_word(&w.images, &pres.alphabet, &u) {
        Ok(m) => !m.is_identity(),
        Err(_) => false,
    }
}
