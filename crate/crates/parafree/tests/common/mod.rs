//! Shared generators and independent oracles for the integration suites.
//! Oracles here deliberately avoid the library's optimized code paths.

#![allow(dead_code)]

use num_bigint::BigInt;
use num_traits::{One, Zero};

use parafree::graph::{Edge, EdgeKind, GraphOfGroups, Vertex};
use parafree::lattice::IntMatrix;
use parafree::rng::SplitMix64;
use parafree::words::{Alphabet, Letter, Word};

pub fn random_reduced_word(rng: &mut SplitMix64, rank: usize, max_len: usize) -> Word {
    loop {
        let len = 1 + rng.below(max_len as u64) as usize;
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
            return w;
        }
    }
}

/// Brute-force primitive root: for each divisor of the cyclically reduced
/// length, test whether the core is that prefix repeated.
pub fn oracle_root(word: &Word) -> (Word, u32) {
    let (core, _) = parafree::words::cyclic_reduce(word);
    let n = core.len();
    assert!(n > 0, "oracle needs a nontrivial word");
    for d in 1..=n {
        if n % d != 0 {
            continue;
        }
        let prefix = Word::reduced(core.letters()[..d].iter().copied());
        let mut repeated: Vec<Letter> = Vec::with_capacity(n);
        for _ in 0..n / d {
            repeated.extend_from_slice(prefix.letters());
        }
        if repeated == core.letters() {
            return (prefix, (n / d) as u32);
        }
    }
    unreachable!("a word always repeats its full length");
}

pub fn oracle_is_proper_power(word: &Word) -> bool {
    oracle_root(word).1 >= 2
}

/// Cofactor-expansion determinant, independent of the Smith machinery.
pub fn oracle_det(m: &IntMatrix) -> BigInt {
    let n = m.rows();
    assert_eq!(n, m.cols());
    if n == 0 {
        return BigInt::one();
    }
    if n == 1 {
        return m.get(0, 0).clone();
    }
    let mut acc = BigInt::zero();
    for j in 0..n {
        if m.get(0, j).is_zero() {
            continue;
        }
        let mut sub = IntMatrix::zero(n - 1, n - 1);
        for r in 1..n {
            let mut cc = 0;
            for c in 0..n {
                if c != j {
                    sub.set(r - 1, cc, m.get(r, c).clone());
                    cc += 1;
                }
            }
        }
        let term = m.get(0, j) * oracle_det(&sub);
        if j % 2 == 0 {
            acc += term;
        } else {
            acc -= term;
        }
    }
    acc
}

/// gcd of all k x k minors.
pub fn oracle_determinantal_divisor(m: &IntMatrix, k: usize) -> BigInt {
    use num_integer::Integer;
    fn subsets(n: usize, k: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            subsets(n, k, i + 1, cur, out);
            cur.pop();
        }
    }
    let mut row_sets = Vec::new();
    subsets(m.rows(), k, 0, &mut Vec::new(), &mut row_sets);
    let mut col_sets = Vec::new();
    subsets(m.cols(), k, 0, &mut Vec::new(), &mut col_sets);
    let mut g = BigInt::zero();
    for rs in &row_sets {
        for cs in &col_sets {
            let mut sub = IntMatrix::zero(k, k);
            for (i, &r) in rs.iter().enumerate() {
                for (j, &c) in cs.iter().enumerate() {
                    sub.set(i, j, m.get(r, c).clone());
                }
            }
            g = g.gcd(&oracle_det(&sub));
        }
    }
    g
}

pub fn vertex(id: &str, gens: &[String]) -> Vertex {
    Vertex {
        id: id.to_string(),
        alphabet: Alphabet::new(gens.iter().cloned()).unwrap(),
    }
}

pub fn gen_names(prefix: &str, count: usize) -> Vec<String> {
    (0..count).map(|i| format!("{prefix}{i}")).collect()
}

pub fn cyclic_edge(id: &str, from: &str, to: &str, u: Word, v: Word) -> Edge {
    Edge {
        id: id.to_string(),
        from: from.to_string(),
        to: to.to_string(),
        kind: EdgeKind::InfiniteCyclic,
        u: Some(u),
        v: Some(v),
    }
}

pub fn trivial_edge(id: &str, from: &str, to: &str) -> Edge {
    Edge {
        id: id.to_string(),
        from: from.to_string(),
        to: to.to_string(),
        kind: EdgeKind::Trivial,
        u: None,
        v: None,
    }
}

/// Random connected graph of groups with only trivial edge groups:
/// a random spanning tree plus a few extra edges (loops allowed).
pub fn random_free_graph(rng: &mut SplitMix64) -> GraphOfGroups {
    let v_count = 1 + rng.below(5) as usize;
    let vertices: Vec<Vertex> = (0..v_count)
        .map(|i| {
            let rank = 1 + rng.below(3) as usize;
            vertex(&format!("V{i}"), &gen_names(&format!("v{i}g"), rank))
        })
        .collect();
    let mut edges = Vec::new();
    for i in 1..v_count {
        let parent = rng.below(i as u64) as usize;
        edges.push(trivial_edge(
            &format!("e{}", edges.len()),
            &format!("V{parent}"),
            &format!("V{i}"),
        ));
    }
    for _ in 0..rng.below(4) {
        let a = rng.below(v_count as u64) as usize;
        let b = rng.below(v_count as u64) as usize;
        edges.push(trivial_edge(
            &format!("e{}", edges.len()),
            &format!("V{a}"),
            &format!("V{b}"),
        ));
    }
    GraphOfGroups::new(vertices, edges).unwrap()
}

/// A non-proper-power word, certified by the brute-force oracle.
pub fn random_non_power_word(rng: &mut SplitMix64, rank: usize, max_len: usize) -> Word {
    loop {
        let w = random_reduced_word(rng, rank, max_len);
        if !oracle_is_proper_power(&w) {
            return w;
        }
    }
}

pub fn big_vec(xs: &[i64]) -> Vec<BigInt> {
    xs.iter().map(|&x| BigInt::from(x)).collect()
}

/// Re-parses a rendered word over an alphabet reconstructed from its own
/// tokens (plus the tokens of sibling strings), so certificate words can be
/// checked without access to the original presentation.
pub fn reparse_with_shared_alphabet(strings: &[&str]) -> Vec<Word> {
    let mut names: Vec<String> = strings
        .iter()
        .flat_map(|s| s.split_whitespace())
        .map(|token| token.split('^').next().unwrap().to_string())
        .collect();
    names.sort();
    names.dedup();
    if names.is_empty() {
        // An empty certificate word parses over any alphabet.
        names.push("x".to_string());
    }
    let alphabet = Alphabet::new(names).expect("certificate tokens are identifiers");
    strings
        .iter()
        .map(|s| parafree::words::parse_word(&alphabet, s).expect("certificate words parse"))
        .collect()
}

/// Independent re-validation of refutation evidence: every `No` leaf must be
/// checkable by direct recomputation, with no reference to the checker.
pub fn revalidate_no_evidence(det: &parafree::criteria::Determination) {
    use num_integer::Integer;
    use parafree::criteria::Evidence;
    if !det.is_no() {
        // Recurse anyway: a No may hide below an Unknown disjunction.
        if let Evidence::Disjunction { first, second } = &det.evidence {
            revalidate_no_evidence(first);
            revalidate_no_evidence(second);
        }
        return;
    }
    match &det.evidence {
        Evidence::Root { word, conjugator, root, exponent, .. } => {
            assert!(*exponent >= 2, "a refuting root must be a proper power");
            let parsed = reparse_with_shared_alphabet(&[word, conjugator, root]);
            let (w, c, r) = (&parsed[0], &parsed[1], &parsed[2]);
            let rebuilt = r.pow(*exponent as i64).conjugate_by(c);
            assert_eq!(&rebuilt, w, "root decomposition must reassemble the word");
        }
        Evidence::ClassGcd { coords, gcd, .. } => {
            let mut g = BigInt::zero();
            for c in coords {
                g = g.gcd(c);
            }
            assert_eq!(&g, gcd, "stored gcd must match the coordinates");
            assert!(
                gcd.is_zero() || *gcd >= BigInt::from(2),
                "a refuting class is zero or imprimitive"
            );
        }
        Evidence::AbelianInvariants { free_rank, expected, torsion, .. } => {
            assert!(
                !torsion.is_empty() || free_rank != expected,
                "abelian refutation needs torsion or a rank defect"
            );
        }
        Evidence::DescentObstruction { u_exponent, v_exponent, .. } => {
            assert!(
                *v_exponent == 2 * u_exponent || *u_exponent == 2 * v_exponent,
                "descent obstruction needs an exponent ratio of two"
            );
        }
        Evidence::AbelianIndependence { u_image, v_image, det: d } => {
            let recomputed = u_image[0] * v_image[1] - u_image[1] * v_image[0];
            assert_eq!(recomputed, *d);
            assert_eq!(*d, 0, "a refuting independence test has determinant zero");
        }
        Evidence::Disjunction { first, second } => {
            // Both branches refuted.
            assert!(first.is_no() && second.is_no());
            revalidate_no_evidence(first);
            revalidate_no_evidence(second);
        }
        Evidence::DecompositionTrace { steps } => {
            let failing = steps
                .iter()
                .filter_map(|s| s.test.as_ref())
                .any(|t| t.is_no());
            assert!(failing, "a refuted trace must contain a failing step");
            for step in steps {
                if let Some(test) = &step.test {
                    revalidate_no_evidence(test);
                }
            }
        }
        Evidence::PerEdge { edges } => {
            assert!(edges.iter().any(|(_, d)| d.is_no()));
            for (_, d) in edges {
                revalidate_no_evidence(d);
            }
        }
        Evidence::SubVerdicts { parts } => {
            let failing = parts
                .iter()
                .any(|(_, v)| v.status == parafree::criteria::Status::NotParafree);
            assert!(failing, "a refuted recursion must contain a refuted piece");
            for (_, v) in parts {
                for d in v.conditions.values() {
                    revalidate_no_evidence(d);
                }
            }
        }
        Evidence::Reduction { trivial, .. } => assert!(*trivial),
        other => panic!("refutation carries unexpected evidence {other:?}"),
    }
}
