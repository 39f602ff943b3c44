mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use scd_core::chainfam::{
    admissible_points, families_to_chains, parse_family_file, print_family_file, AffineForm, Bound,
    ChainFamily, ChainSegment, Constraint, FamilyError, Region, Relation,
};
use scd_core::fixtures;
use scd_core::lattice::{check_scd, enumerate, LatticeVector};

fn point(pairs: &[(&str, i64)]) -> BTreeMap<String, i64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

fn vector(c: &[u32], n: u32) -> LatticeVector {
    LatticeVector::new(c.to_vec(), n).unwrap()
}

#[test]
fn fixtures_decompose_for_small_n() {
    for (name, fams) in [("l1", fixtures::l1()), ("l2", fixtures::l2())] {
        let m = fams[0].m;
        for n in 0..=12 {
            let chains = families_to_chains(&fams, n).unwrap();
            let v = check_scd(&chains, m, n).unwrap();
            assert!(
                v.passed(),
                "{name} n={n}: {:?}",
                v.witnesses().collect::<Vec<_>>()
            );
        }
    }
}

#[test]
fn l2_chain_counts() {
    let fams = fixtures::l2();
    assert_eq!(families_to_chains(&fams, 4).unwrap().len(), 3);
    let l1 = families_to_chains(&fixtures::l1(), 0).unwrap();
    assert_eq!(l1.len(), 1);
    assert_eq!(l1[0].len(), 1);
}

#[test]
fn dropping_a_chain_leaves_a_missing_vector() {
    let mut chains = families_to_chains(&fixtures::l2(), 2).unwrap();
    chains.retain(|c| c.first() != &vector(&[1, 1], 2));
    let v = check_scd(&chains, 2, 2).unwrap();
    assert!(!v.passed());
    assert_eq!(
        v.covering.unwrap_err().to_string(),
        "vector (1,1) is not covered"
    );
}

#[test]
fn demo_chains_match_the_worked_examples() {
    let demo = fixtures::demo6();
    let p01 = demo.iter().find(|f| f.name == "p01like").unwrap();
    let c = p01.instantiate(&point(&[("n", 2), ("h", 0)])).unwrap();
    let want: Vec<LatticeVector> = [
        [0, 0, 0, 0, 1, 1],
        [0, 0, 0, 1, 1, 1],
        [0, 0, 1, 1, 1, 1],
        [0, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 1, 1],
        [1, 1, 1, 1, 1, 2],
        [1, 1, 1, 1, 2, 2],
        [1, 1, 1, 2, 2, 2],
        [1, 1, 2, 2, 2, 2],
    ]
    .iter()
    .map(|c| vector(c, 2))
    .collect();
    assert_eq!(c.elements(), &want[..]);
    assert!(c.is_saturated() && c.is_symmetric());

    let cc0 = demo.iter().find(|f| f.name == "cc0like").unwrap();
    let c = cc0.instantiate(&point(&[("n", 1), ("h", 0)])).unwrap();
    assert_eq!(c.len(), 7);
    assert_eq!(c.elements(), &enumerate(6, 1).unwrap()[..]);
    assert!(c.is_saturated() && c.is_symmetric());
    assert!(check_scd(&[c], 6, 1).unwrap().passed());
}

#[test]
fn admissible_point_examples() {
    let i = AffineForm::var("i");
    let j = AffineForm::var("j");
    let min = Constraint::new(
        i.clone(),
        Relation::Le,
        Bound::Min(vec![j.clone(), AffineForm::constant(2)]),
    )
    .unwrap();
    let r = Region::new(vec!["i".into(), "j".into()], vec![min]);
    let pts = admissible_points(&r, &point(&[("i", 2), ("j", 2)]));
    let got: Vec<(i64, i64)> = pts.iter().map(|p| (p["i"], p["j"])).collect();
    assert_eq!(got, vec![(0, 0), (0, 1), (0, 2), (1, 1), (1, 2), (2, 2)]);

    let free = Region::new(vec!["i".into()], vec![]);
    assert_eq!(admissible_points(&free, &point(&[("i", 3)])).len(), 4);

    let none = Region::new(
        vec!["i".into()],
        vec![
            Constraint::ge(i.clone(), AffineForm::constant(1)),
            Constraint::le(i, AffineForm::constant(0)),
        ],
    );
    assert!(admissible_points(&none, &point(&[("i", 5)])).is_empty());
}

#[test]
fn unbounded_region_is_reported() {
    let text = "family u\nm 1\nparams n j\nsegment t 0 .. n : (t)\nend\n";
    let fams = parse_family_file(text).unwrap();
    assert!(matches!(
        families_to_chains(&fams, 2),
        Err(FamilyError::Unbounded { .. })
    ));
}

#[test]
fn empty_chain_is_an_error() {
    let text = "family e\nm 1\nparams n\nsegment t 1 .. 0 : (t)\nend\n";
    let fams = parse_family_file(text).unwrap();
    assert!(matches!(
        fams[0].instantiate(&point(&[("n", 0)])),
        Err(FamilyError::EmptyChain { .. })
    ));
}

#[test]
fn invalid_template_names_segment_and_runner() {
    let text = "family bad\nm 2\nparams n\nsegment t 0 .. n : (n, t)\nend\n";
    let fams = parse_family_file(text).unwrap();
    match fams[0].instantiate(&point(&[("n", 2)])) {
        Err(FamilyError::Malformed { segment, t, .. }) => assert_eq!((segment, t), (0, 0)),
        other => panic!("{other:?}"),
    }
}

#[test]
fn consecutive_elements_differ_by_one_step() {
    for fams in [fixtures::l2(), fixtures::demo6()] {
        for n in 0..=5 {
            let Ok(chains) = families_to_chains(&fams, n) else {
                continue;
            };
            for c in chains {
                for w in c.elements().windows(2) {
                    let diff: Vec<i64> = w[0]
                        .coords()
                        .iter()
                        .zip(w[1].coords())
                        .map(|(a, b)| i64::from(*b) - i64::from(*a))
                        .collect();
                    assert_eq!(diff.iter().filter(|d| **d != 0).count(), 1);
                    assert_eq!(diff.iter().sum::<i64>(), 1);
                }
            }
        }
    }
}

const NAMES: [&str; 3] = ["n", "i", "j"];

fn affine() -> impl Strategy<Value = AffineForm> {
    (
        -3i64..=3,
        prop::collection::vec((0usize..3, -2i64..=2), 0..3),
    )
        .prop_map(|(c, terms)| {
            let mut f = AffineForm::constant(c);
            for (k, a) in terms {
                f.add_term(NAMES[k], a);
            }
            f
        })
}

fn constraint() -> impl Strategy<Value = Constraint> {
    (affine(), 0u8..5, prop::collection::vec(affine(), 1..4)).prop_map(|(left, kind, args)| {
        match kind {
            0 => Constraint::le(left, args[0].clone()),
            1 => Constraint::ge(left, args[0].clone()),
            2 => Constraint::eq(left, args[0].clone()),
            3 => Constraint::new(left, Relation::Le, Bound::Min(args)).unwrap(),
            _ => Constraint::new(left, Relation::Ge, Bound::Max(args)).unwrap(),
        }
    })
}

fn family(idx: usize) -> impl Strategy<Value = ChainFamily> {
    (
        1usize..4,
        prop::collection::vec(constraint(), 0..3),
        1usize..3,
    )
        .prop_flat_map(move |(m, constraints, nseg)| {
            let segment = (affine(), affine(), prop::collection::vec(affine(), m..=m)).prop_map(
                |(lo, hi, template)| ChainSegment {
                    runner: "t".into(),
                    lo,
                    hi,
                    template,
                },
            );
            prop::collection::vec(segment, nseg..=nseg).prop_map(move |segments| ChainFamily {
                name: format!("f{idx}"),
                m,
                region: Region::new(
                    NAMES.iter().map(|s| s.to_string()).collect(),
                    constraints.clone(),
                ),
                segments,
            })
        })
}

proptest! {
    #[test]
    fn print_then_parse_is_identity(fams in (family(0), family(1))) {
        let fams = vec![fams.0, fams.1];
        let text = print_family_file(&fams);
        prop_assert_eq!(parse_family_file(&text).unwrap(), fams);
    }

    #[test]
    fn admissible_points_grow_with_bounds(seed in any::<u64>(), b in 0i64..4, extra in 0i64..3) {
        let mut rng = common::rng(seed);
        let pm = common::random_region(&mut rng);
        let small = admissible_points(&pm.region, &common::bounds_map(&pm.region, b));
        let large = admissible_points(&pm.region, &common::bounds_map(&pm.region, b + extra));
        for p in &small {
            prop_assert!(large.contains(p));
        }
        let mut sorted = large.clone();
        sorted.sort_by_key(|p| pm.region.params.iter().map(|k| p[k]).collect::<Vec<_>>());
        prop_assert_eq!(sorted, large);
    }
}

#[test]
fn shipped_fixtures_round_trip() {
    for name in ["l1", "l2", "demo6"] {
        let fams = fixtures::load(name).unwrap().unwrap();
        assert_eq!(parse_family_file(&print_family_file(&fams)).unwrap(), fams);
    }
}
