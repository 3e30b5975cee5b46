//! Acceptance suite: one test per criterion, each printing a pass line and
//! holding its stated time budget. All checks are exact integer assertions;
//! random families are generated from fixed seeds.

mod common;

use std::time::Instant;

use num_bigint::BigInt;
use num_traits::{One, Zero};

use common::*;
use parafree::criteria::{
    check_gog, check_hnn, check_hnn_generic, CheckOptions, Evidence, Status,
};
use parafree::graph::{abelianization, expected_rank, GraphOfGroups};
use parafree::lattice::{smith_normal_form, IntMatrix};
use parafree::normal_form::{is_nontrivial, MixedItem, MixedWord};
use parafree::report::{to_stable_string, witness_to_json};
use parafree::rng::SplitMix64;
use parafree::ut::{group_order, UtElement};
use parafree::witness::{
    search_witness, search_witness_with_workers, verify_witness, SearchBounds, SearchOutcome,
};
use parafree::words::{exponent_vector, parse_word, Letter, Word};

fn pass(criterion: u32, started: Instant, budget_s: u64, what: &str) {
    let elapsed = started.elapsed();
    println!(
        "acceptance criterion {criterion}: PASS ({} ms) — {what}",
        elapsed.as_millis()
    );
    assert!(
        elapsed.as_secs() < budget_s,
        "criterion {criterion} FAIL: took {:?}, budget {budget_s}s",
        elapsed
    );
}

fn search_opts(cap: u64, samples: u64, seed: u64) -> CheckOptions {
    CheckOptions {
        bounds: SearchBounds {
            dims: vec![3],
            primes: vec![2, 3, 5],
            exhaustive_cap: cap,
            sample_count: samples,
            seed,
        },
        workers: 1,
        edge_order: Vec::new(),
    }
}

/// Criterion 1: positive amalgam family. Random one-edge amalgams of free
/// groups with non-power attaching words and primitive joint image must be
/// certified parafree with abelianization rank r1 + r2 - 1.
#[test]
fn criterion_1_amalgam_positive_family() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xA11CE);
    let opts = search_opts(50_000, 50_000, 0xA11CE);
    for i in 0..100 {
        let r1 = 1 + rng.below(3) as usize;
        let r2 = 1 + rng.below(3) as usize;
        let (u, v) = loop {
            let u = random_non_power_word(&mut rng, r1, 6);
            let v = random_non_power_word(&mut rng, r2, 6);
            let mut joint = exponent_vector(&u, r1);
            joint.extend(exponent_vector(&v, r2).iter().map(|x| -x));
            if parafree::lattice::is_primitive_vector(&big_vec(&joint)) {
                break (u, v);
            }
        };
        let vs = vec![
            vertex("U", &gen_names("x", r1)),
            vertex("V", &gen_names("y", r2)),
        ];
        let g = GraphOfGroups::new(vs, vec![cyclic_edge("e1", "U", "V", u, v)]).unwrap();
        let verdict = check_gog(&g, &opts);
        assert_eq!(
            verdict.status,
            Status::Parafree,
            "criterion 1 FAIL: instance {i} not certified: {verdict:?}"
        );
        let ab = abelianization(&g);
        assert_eq!(ab.invariants.free_rank, r1 + r2 - 1, "criterion 1 FAIL: rank");
        assert!(ab.invariants.torsion.is_empty(), "criterion 1 FAIL: torsion");
    }
    pass(1, started, 10, "100 positive amalgams certified with exact rank");
}

/// Criterion 2: necessity refutations with checkable evidence.
#[test]
fn criterion_2_necessity_refutations() {
    let started = Instant::now();
    let opts = CheckOptions::default();

    // Trefoil: both attaching words are proper powers.
    {
        let one = Instant::now();
        let vs = vec![vertex("U", &gen_names("a", 1)), vertex("V", &gen_names("b", 1))];
        let u = parse_word(&vs[0].alphabet, "a0^2").unwrap();
        let v = parse_word(&vs[1].alphabet, "b0^3").unwrap();
        let g = GraphOfGroups::new(vs, vec![cyclic_edge("e1", "U", "V", u, v)]).unwrap();
        let verdict = check_gog(&g, &opts);
        assert_eq!(verdict.status, Status::NotParafree, "criterion 2 FAIL: trefoil");
        let cond3 = verdict.condition("cond3").unwrap();
        assert!(cond3.is_no());
        let Evidence::DecompositionTrace { steps } = &cond3.evidence else {
            panic!("criterion 2 FAIL: expected a trace");
        };
        let test = steps[0].test.as_ref().unwrap();
        let Evidence::Disjunction { first, second } = &test.evidence else {
            panic!("criterion 2 FAIL: expected both branches");
        };
        for (branch, want_exp) in [(first, 2u32), (second, 3u32)] {
            let Evidence::Root { exponent, .. } = &branch.evidence else {
                panic!("criterion 2 FAIL: expected root evidence");
            };
            assert_eq!(*exponent, want_exp, "criterion 2 FAIL: trefoil exponents");
            assert!(*exponent >= 2);
        }
        assert!(one.elapsed().as_secs() < 1, "criterion 2 FAIL: trefoil over 1s");
    }

    // Inverting loop: torsion [2] in the abelianization.
    {
        let one = Instant::now();
        let vs = vec![vertex("U", &gen_names("a", 1))];
        let u = parse_word(&vs[0].alphabet, "a0").unwrap();
        let v = parse_word(&vs[0].alphabet, "a0^-1").unwrap();
        let g = GraphOfGroups::new(vs, vec![cyclic_edge("t", "U", "U", u, v)]).unwrap();
        let verdict = check_gog(&g, &opts);
        assert_eq!(verdict.status, Status::NotParafree, "criterion 2 FAIL: inverting loop");
        let cond2 = verdict.condition("cond2").unwrap();
        assert!(cond2.is_no());
        let Evidence::AbelianInvariants { torsion, .. } = &cond2.evidence else {
            panic!("criterion 2 FAIL: expected abelian evidence");
        };
        assert_eq!(torsion, &vec![BigInt::from(2)], "criterion 2 FAIL: torsion [2]");
        assert!(one.elapsed().as_secs() < 1, "criterion 2 FAIL: loop over 1s");
    }

    // Doubling-versus-tripling loop: both words proper powers.
    {
        let one = Instant::now();
        let vs = vec![vertex("U", &gen_names("a", 1))];
        let u = parse_word(&vs[0].alphabet, "a0^2").unwrap();
        let v = parse_word(&vs[0].alphabet, "a0^3").unwrap();
        let g = GraphOfGroups::new(vs, vec![cyclic_edge("t", "U", "U", u, v)]).unwrap();
        let verdict = check_gog(&g, &opts);
        assert_eq!(verdict.status, Status::NotParafree, "criterion 2 FAIL: (2,3) loop");
        assert!(verdict.condition("cond3").unwrap().is_no());
        assert!(one.elapsed().as_secs() < 1, "criterion 2 FAIL: (2,3) loop over 1s");
    }

    // Doubling loop: killed by the descent obstruction on condition 4.
    {
        let one = Instant::now();
        let vs = vec![vertex("U", &gen_names("a", 1))];
        let u = parse_word(&vs[0].alphabet, "a0").unwrap();
        let v = parse_word(&vs[0].alphabet, "a0^2").unwrap();
        let g = GraphOfGroups::new(vs, vec![cyclic_edge("t", "U", "U", u, v)]).unwrap();
        let verdict = check_gog(&g, &opts);
        assert_eq!(verdict.status, Status::NotParafree, "criterion 2 FAIL: doubling loop");
        let cond4 = verdict.condition("cond4").unwrap();
        assert!(cond4.is_no());
        let Evidence::PerEdge { edges } = &cond4.evidence else {
            panic!("criterion 2 FAIL: expected per-edge evidence");
        };
        assert!(
            matches!(edges[0].1.evidence, Evidence::DescentObstruction { .. }),
            "criterion 2 FAIL: expected the descent obstruction"
        );
        assert!(one.elapsed().as_secs() < 1, "criterion 2 FAIL: doubling loop over 1s");
    }

    pass(2, started, 10, "four refutations with exact evidence, each under 1s");
}

/// Criterion 3: the rank-two determinant shortcut is total and agrees with
/// the generic tiers wherever those are definite.
#[test]
fn criterion_3_rank_two_shortcut_exactness() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xC0513);
    let opts = search_opts(30_000, 30_000, 0xC0513);
    let base = GraphOfGroups::new(vec![vertex("U", &gen_names("x", 2))], vec![]).unwrap();
    let mut generic_definite = 0;
    for i in 0..200 {
        let u = random_reduced_word(&mut rng, 2, 8);
        let v = random_reduced_word(&mut rng, 2, 8);
        let fast = check_hnn(&base, &u, &v, &opts).unwrap();
        assert_ne!(
            fast.status,
            Status::Unknown,
            "criterion 3 FAIL: shortcut returned unknown on instance {i}"
        );
        let generic = check_hnn_generic(&base, &u, &v, &opts).unwrap();
        if generic.status != Status::Unknown {
            generic_definite += 1;
            assert_eq!(
                fast.status, generic.status,
                "criterion 3 FAIL: disagreement on instance {i}"
            );
        }
    }
    assert!(generic_definite > 0, "criterion 3 FAIL: generic path never definite");
    pass(
        3,
        started,
        30,
        &format!(
            "200 rank-two instances: shortcut total, agrees with the generic tiers \
             on all {generic_definite} definite ones"
        ),
    );
}

/// Criterion 4: graphs with only trivial edge groups are free, certified
/// parafree, with the free-product rank formula and Euler bookkeeping.
#[test]
fn criterion_4_free_case_oracle() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0xF4EE);
    let opts = CheckOptions::default();
    for i in 0..200 {
        let g = random_free_graph(&mut rng);
        let verdict = check_gog(&g, &opts);
        assert_eq!(verdict.status, Status::Parafree, "criterion 4 FAIL: instance {i}");
        let ab = abelianization(&g);
        let rank_sum = g.total_vertex_rank() as i64;
        let v_count = g.vertices().len() as i64;
        let e_count = g.edges().len() as i64;
        let want = rank_sum + e_count - v_count + 1;
        assert_eq!(ab.invariants.free_rank as i64, want, "criterion 4 FAIL: rank");
        assert!(ab.invariants.torsion.is_empty(), "criterion 4 FAIL: torsion");
        // Cross-check against the expected-rank formula with chi = V - E - 1.
        assert_eq!(expected_rank(&g), want, "criterion 4 FAIL: expected rank");
    }
    pass(4, started, 10, "200 free-case graphs certified with the exact rank formula");
}

/// Criterion 5: the primitive-root computation agrees with the brute-force
/// divisor-scan oracle on every freely reduced word of length <= 12 over two
/// generators.
#[test]
fn criterion_5_primitive_root_oracle_equivalence() {
    let started = Instant::now();
    let letters = [Letter::pos(0), Letter::neg(0), Letter::pos(1), Letter::neg(1)];
    let mut stack: Vec<Vec<Letter>> = vec![Vec::new()];
    let mut count: u64 = 0;
    while let Some(cur) = stack.pop() {
        if !cur.is_empty() {
            let word = Word::reduced(cur.iter().copied());
            debug_assert_eq!(word.len(), cur.len());
            let got = parafree::words::primitive_root(&word).unwrap();
            let (root, exponent) = oracle_root(&word);
            assert_eq!(got.exponent, exponent, "criterion 5 FAIL: exponent on {cur:?}");
            assert_eq!(got.root, root, "criterion 5 FAIL: root on {cur:?}");
            count += 1;
        }
        if cur.len() < 12 {
            for &l in &letters {
                if cur.last().is_some_and(|t| t.gen == l.gen && t.sign == -l.sign) {
                    continue;
                }
                let mut next = cur.clone();
                next.push(l);
                stack.push(next);
            }
        }
    }
    // All freely reduced words of length 1..=12 over rank 2.
    assert_eq!(count, 4 * (3u64.pow(12) - 1) / 2, "criterion 5 FAIL: enumeration size");
    pass(5, started, 60, "exhaustive oracle agreement on all words of length <= 12");
}

/// Criterion 6: Smith form validity on random matrices: exact transform
/// identity, unimodularity, divisibility chain, determinantal divisors.
#[test]
fn criterion_6_smith_form_validity() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x51F);
    for i in 0..500 {
        let rows: Vec<Vec<i64>> = (0..5)
            .map(|_| (0..5).map(|_| rng.below(21) as i64 - 10).collect())
            .collect();
        let m = IntMatrix::from_i64_rows(&rows);
        let snf = smith_normal_form(&m);
        assert_eq!(snf.u.mul(&m).mul(&snf.v), snf.d, "criterion 6 FAIL: identity on {i}");
        assert!(
            oracle_det(&snf.u).magnitude() == BigInt::one().magnitude()
                && oracle_det(&snf.v).magnitude() == BigInt::one().magnitude(),
            "criterion 6 FAIL: transforms not unimodular on {i}"
        );
        let diag = snf.diagonal();
        for w in diag.windows(2) {
            if w[0].is_zero() {
                assert!(w[1].is_zero(), "criterion 6 FAIL: zero ordering on {i}");
            } else {
                assert!((&w[1] % &w[0]).is_zero(), "criterion 6 FAIL: chain on {i}");
            }
        }
        for k in 1..=3usize {
            let dk = oracle_determinantal_divisor(&m, k);
            let prod: BigInt = diag[..k].iter().product();
            assert_eq!(prod, dk, "criterion 6 FAIL: determinantal divisor k={k} on {i}");
        }
    }
    pass(6, started, 30, "500 random matrices: transforms, chain and divisors all exact");
}

/// Criterion 7: witness soundness, determinism across worker counts, and
/// exhaustive agreement on the doubling loop.
#[test]
fn criterion_7_witness_soundness_and_determinism() {
    let started = Instant::now();
    let mut rng = SplitMix64::new(0x717);
    let bounds = SearchBounds {
        dims: vec![3],
        primes: vec![2, 3],
        exhaustive_cap: 100_000,
        sample_count: 2_000,
        seed: 0x717,
    };

    // Soundness: every witness found over fuzzed instances re-verifies.
    let mut found = 0;
    for i in 0..100 {
        let g = random_cyclic_instance(&mut rng, i);
        let Some(edge) = g
            .edges()
            .iter()
            .find(|e| e.kind == parafree::graph::EdgeKind::InfiniteCyclic)
            .map(|e| e.id.clone())
        else {
            continue;
        };
        if let SearchOutcome::Found(w) = search_witness(&g, &edge, &bounds).unwrap() {
            assert!(verify_witness(&g, &w), "criterion 7 FAIL: witness {i} does not verify");
            found += 1;
        }
    }
    assert!(found >= 30, "criterion 7 FAIL: too few witnesses to be meaningful ({found})");

    // Determinism: byte-identical witness reports across runs and workers.
    let mut rng = SplitMix64::new(0x717);
    for i in 0..10 {
        let g = random_cyclic_instance(&mut rng, 1000 + i);
        let Some(edge) = g
            .edges()
            .iter()
            .find(|e| e.kind == parafree::graph::EdgeKind::InfiniteCyclic)
            .map(|e| e.id.clone())
        else {
            continue;
        };
        let render = |outcome: SearchOutcome| match outcome {
            SearchOutcome::Found(w) => to_stable_string(&witness_to_json(&w)),
            SearchOutcome::NoWitnessUpToBound { fully_enumerated } => {
                format!("none {fully_enumerated:?}")
            }
        };
        let baseline = render(search_witness_with_workers(&g, &edge, &bounds, 1).unwrap());
        for workers in [1, 2, 4] {
            for _ in 0..2 {
                let again =
                    render(search_witness_with_workers(&g, &edge, &bounds, workers).unwrap());
                assert_eq!(baseline, again, "criterion 7 FAIL: nondeterministic report");
            }
        }
    }

    // Doubling loop: bounded search is empty, matching the brute-force
    // enumeration of all image pairs in UT(3,2) and UT(3,3).
    let vs = vec![vertex("U", &gen_names("a", 1))];
    let u = parse_word(&vs[0].alphabet, "a0").unwrap();
    let v = parse_word(&vs[0].alphabet, "a0^2").unwrap();
    let g = GraphOfGroups::new(vs, vec![cyclic_edge("t", "U", "U", u, v)]).unwrap();
    match search_witness(&g, "t", &bounds).unwrap() {
        SearchOutcome::NoWitnessUpToBound { fully_enumerated } => {
            assert_eq!(fully_enumerated, vec![(3, 2), (3, 3)], "criterion 7 FAIL: exhaustion");
        }
        SearchOutcome::Found(w) => panic!("criterion 7 FAIL: impossible witness {w:?}"),
    }
    for p in [2u32, 3] {
        let order = group_order(3, p);
        let mut witnesses = 0u64;
        for ai in 0..order {
            let a = UtElement::from_index(3, p, ai);
            if a.is_identity() {
                continue;
            }
            for ti in 0..order {
                let t = UtElement::from_index(3, p, ti);
                let lhs = t.mul(&a).mul(&t.inverse());
                if lhs == a.mul(&a) {
                    witnesses += 1;
                }
            }
        }
        assert_eq!(witnesses, 0, "criterion 7 FAIL: oracle found a witness at (3,{p})");
    }

    pass(7, started, 120, "witness soundness, worker determinism and exhaustive agreement");
}

fn random_cyclic_instance(rng: &mut SplitMix64, salt: u64) -> GraphOfGroups {
    let _ = salt;
    loop {
        let two_vertices = rng.below(2) == 0;
        let result = if two_vertices {
            let vs = vec![vertex("U", &gen_names("x", 1 + rng.below(2) as usize)),
                          vertex("V", &gen_names("y", 1 + rng.below(2) as usize))];
            let u = random_reduced_word(rng, vs[0].alphabet.rank(), 3);
            let v = random_reduced_word(rng, vs[1].alphabet.rank(), 3);
            GraphOfGroups::new(vs, vec![cyclic_edge("e1", "U", "V", u, v)])
        } else {
            let vs = vec![vertex("U", &gen_names("x", 1 + rng.below(2) as usize))];
            let rank = vs[0].alphabet.rank();
            let u = random_reduced_word(rng, rank, 3);
            let v = random_reduced_word(rng, rank, 3);
            GraphOfGroups::new(vs, vec![cyclic_edge("t", "U", "U", u, v)])
        };
        if let Ok(g) = result {
            return g;
        }
    }
}

/// Every refutation's evidence re-validates by direct recomputation,
/// independent of the checker: roots reassemble by multiplication, gcds are
/// recomputed, determinants re-evaluated.
#[test]
fn refutation_evidence_revalidates() {
    let mut rng = SplitMix64::new(0x5EAF);
    let opts = search_opts(20_000, 5_000, 0x5EAF);
    let mut refuted = 0;
    for _ in 0..300 {
        let g = random_cyclic_instance(&mut rng, 0);
        let verdict = check_gog(&g, &opts);
        if verdict.status != Status::NotParafree {
            continue;
        }
        refuted += 1;
        assert!(
            verdict.conditions.values().any(|d| d.is_no()),
            "refutation without a failing condition"
        );
        for det in verdict.conditions.values() {
            revalidate_no_evidence(det);
        }
    }
    assert!(refuted >= 50, "need a meaningful refutation sample, got {refuted}");
}

/// Criterion 8: Britton-based triviality in the conjugation loop agrees with
/// plain free reduction after eliminating the conjugated generator.
#[test]
fn criterion_8_normal_form_oracle() {
    let started = Instant::now();
    let vs = vec![vertex("U", &["a".to_string(), "b".to_string()])];
    let u = parse_word(&vs[0].alphabet, "a").unwrap();
    let v = parse_word(&vs[0].alphabet, "b").unwrap();
    let g = GraphOfGroups::new(vs, vec![cyclic_edge("t", "U", "U", u, v)]).unwrap();

    // With b = t a t^-1 eliminated, the group is free on {a, t}; map mixed
    // words over {a, b, t} into that free group (letter 0 = a, letter 1 = t)
    // and compare triviality.
    let to_free = |mw: &MixedWord| -> Word {
        let mut letters: Vec<Letter> = Vec::new();
        for item in &mw.items {
            match item {
                MixedItem::Factor { word, .. } => {
                    for l in word.letters() {
                        if l.gen == 0 {
                            letters.push(Letter::new(0, l.sign));
                        } else {
                            // b^s -> t a^s t^-1
                            letters.push(Letter::pos(1));
                            letters.push(Letter::new(0, l.sign));
                            letters.push(Letter::neg(1));
                        }
                    }
                }
                MixedItem::Stable { sign, .. } => letters.push(Letter::new(1, *sign)),
            }
        }
        Word::reduced(letters)
    };

    let mut rng = SplitMix64::new(0x8A8);
    for i in 0..1000 {
        let mut items = Vec::new();
        for _ in 0..rng.below(21) {
            if rng.below(3) == 0 {
                items.push(MixedItem::Stable {
                    edge: 0,
                    sign: if rng.below(2) == 0 { 1 } else { -1 },
                });
            } else {
                let letter = Letter::new(
                    rng.below(2) as usize,
                    if rng.below(2) == 0 { 1 } else { -1 },
                );
                items.push(MixedItem::Factor { vertex: 0, word: Word::reduced([letter]) });
            }
        }
        let mw = MixedWord { items };
        let det = is_nontrivial(&g, &mw);
        assert!(!det.is_unknown(), "criterion 8 FAIL: reducer gave up on {i}");
        let oracle_trivial = to_free(&mw).is_empty();
        assert_eq!(
            det.is_no(),
            oracle_trivial,
            "criterion 8 FAIL: disagreement on instance {i}: {mw:?}"
        );
        let doubled = mw.concat(&mw.inverse());
        assert!(
            is_nontrivial(&g, &doubled).is_no(),
            "criterion 8 FAIL: w * w^-1 not trivial on {i}"
        );
    }
    pass(8, started, 10, "1000 mixed words: Britton triviality matches the free-group oracle");
}
