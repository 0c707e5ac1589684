use std::collections::BTreeSet;
use std::sync::Arc;

use proptest::prelude::*;

use gengauge::builders::oracle::{enumerate_bundle_morphisms, enumerate_ggts, OracleBounds};
use gengauge::builders::random::{random_bundle, random_groupoid, random_hs, random_setting, relabel_bundle, GeneratorSpec};
use gengauge::bundle::first_point_section;
use gengauge::hs::{enumerate_hs_ggts, enumerate_hs_morphisms};
use gengauge::{
    check_division_invariance, ggt_to_morphism, identity_ggt, invert_ggt, morphism_to_ggt, pullback_bundle, star,
    trivialize, validate_bundle, validate_ggt, verify_division_properties, verify_hs_division_properties, BaseId,
    BundleTables, Error, Ggt, HsMorphism, PointId, PrincipalBundle,
};

fn bundles(seed: u64, count: usize) -> Vec<Arc<PrincipalBundle>> {
    let spec = GeneratorSpec::new(seed);
    let (g, base) = random_setting(&spec).unwrap();
    (0..count as u64)
        .map(|i| Arc::new(random_bundle(g.clone(), base.clone(), &spec.with_seed(seed ^ ((i + 1) * 0x51))).unwrap()))
        .collect()
}

fn key(k: &Ggt) -> Vec<Option<u32>> {
    k.values().iter().map(|v| v.map(|a| a.index() as u32)).collect()
}

fn hs_pair(seed: u64) -> Option<(Arc<HsMorphism>, Arc<HsMorphism>)> {
    let spec = GeneratorSpec { max_objects: 2, max_total: 12, ..GeneratorSpec::new(seed) };
    let g = Arc::new(random_groupoid(&spec).ok()?);
    let h = Arc::new(random_groupoid(&spec.with_seed(seed ^ 0xABCD)).ok()?);
    let a = match random_hs(g.clone(), h.clone(), &spec) {
        Ok(a) => a,
        Err(Error::Unsatisfiable(_)) => return None,
        Err(e) => panic!("{e}"),
    };
    // A second morphism with the same groupoids; the relabelled copy guarantees
    // at least one connecting arrow.
    let b = random_hs(g, h, &spec.with_seed(seed + 1)).unwrap_or_else(|_| a.clone());
    Some((Arc::new(a), Arc::new(b)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn division_laws_hold(seed in any::<u64>()) {
        let b = &bundles(seed, 1)[0];
        prop_assert!(validate_bundle(b).is_ok());
        prop_assert!(verify_division_properties(b).is_ok());
        for (p, q) in b.fibred_pairs() {
            prop_assert_eq!(b.act(p, b.div(p, q)), Some(q));
        }
    }

    #[test]
    fn corrupted_action_entry_is_caught(seed in any::<u64>(), pick in any::<prop::sample::Index>(), to in any::<prop::sample::Index>()) {
        let b = &bundles(seed, 1)[0];
        let g = b.groupoid().clone();
        let mut t: BundleTables = b.to_tables();
        let i = pick.index(t.act.len());
        let other: Vec<&String> = t.total.iter().filter(|n| **n != t.act[i].2).collect();
        prop_assume!(!other.is_empty());
        t.act[i].2 = other[to.index(other.len())].clone();
        // Tables that cannot even be indexed are rejected too.
        if let Ok(bad) = PrincipalBundle::from_tables(g, &t) {
            prop_assert!(!validate_bundle(&bad).is_ok());
        }
    }

    #[test]
    fn trivialization_round_trips(seed in any::<u64>()) {
        let b = &bundles(seed, 1)[0];
        let iso = trivialize(b, &first_point_section(b).unwrap()).unwrap();
        prop_assert_eq!(iso.restricted.point_count(), iso.trivial.point_count());
        for p in iso.restricted.point_ids() {
            prop_assert_eq!(iso.backward[iso.forward[p.index()].index()], p);
        }
        // Pulling back along the identity of the base changes nothing but names.
        let ids: Vec<BaseId> = b.base_ids().collect();
        let pb = pullback_bundle(b, b.base().clone(), &ids).unwrap();
        prop_assert!(validate_bundle(&pb).is_ok());
        prop_assert_eq!(pb.point_count(), b.point_count());
    }

    #[test]
    fn correspondence_is_a_bijection(seed in any::<u64>()) {
        let bs = bundles(seed, 2);
        let bounds = OracleBounds::default();
        let ms = enumerate_bundle_morphisms(&bs[0], &bs[1], &bounds).unwrap();
        let ks = enumerate_ggts(&bs[0], &bs[1], &bounds).unwrap();
        prop_assert_eq!(ms.len(), ks.len());
        let from_ms: BTreeSet<_> = ms.iter().map(|s| key(&morphism_to_ggt(s).unwrap())).collect();
        let oracle: BTreeSet<_> = ks.iter().map(key).collect();
        prop_assert_eq!(from_ms, oracle);
        for s in &ms {
            prop_assert!(check_division_invariance(s).is_ok());
            let back = ggt_to_morphism(&morphism_to_ggt(s).unwrap()).unwrap();
            prop_assert_eq!(back.map(), s.map());
        }
        for k in &ks {
            prop_assert!(validate_ggt(k).is_ok());
            let back = morphism_to_ggt(&ggt_to_morphism(k).unwrap()).unwrap();
            prop_assert!(back.same_values(k));
        }
    }

    #[test]
    fn composition_matches_star(seed in any::<u64>()) {
        let bs = bundles(seed, 3);
        let bounds = OracleBounds::default();
        let m12 = enumerate_bundle_morphisms(&bs[0], &bs[1], &bounds).unwrap();
        let m23 = enumerate_bundle_morphisms(&bs[1], &bs[2], &bounds).unwrap();
        for s12 in m12.iter().take(4) {
            for s23 in m23.iter().take(4) {
                let lhs = morphism_to_ggt(&s23.after(s12).unwrap()).unwrap();
                let rhs = star(&morphism_to_ggt(s23).unwrap(), &morphism_to_ggt(s12).unwrap()).unwrap();
                prop_assert!(lhs.same_values(&rhs));
            }
            let k = morphism_to_ggt(s12).unwrap();
            let id = identity_ggt(&bs[0]).unwrap();
            prop_assert!(star(&invert_ggt(&k), &k).unwrap().same_values(&id));
            prop_assert!(star(&k, &id).unwrap().same_values(&k));
        }
    }

    #[test]
    fn oracle_counts_survive_relabelling(seed in any::<u64>(), shift in any::<prop::sample::Index>()) {
        let bs = bundles(seed, 2);
        let bounds = OracleBounds::default();
        let n = bs[1].point_count();
        let r = shift.index(n);
        let order: Vec<PointId> = (0..n).map(|i| PointId::from((i + r) % n)).rev().collect();
        let names = (0..n).map(|i| format!("r{i}")).collect();
        let moved = Arc::new(relabel_bundle(&bs[1], &order, names).unwrap());
        prop_assert!(validate_bundle(&moved).is_ok());
        prop_assert_eq!(
            enumerate_bundle_morphisms(&bs[0], &bs[1], &bounds).unwrap().len(),
            enumerate_bundle_morphisms(&bs[0], &moved, &bounds).unwrap().len()
        );
        prop_assert_eq!(
            enumerate_ggts(&bs[0], &bs[1], &bounds).unwrap().len(),
            enumerate_ggts(&bs[0], &moved, &bounds).unwrap().len()
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn hs_division_is_invariant_and_counts_agree(seed in any::<u64>()) {
        let Some((a, b)) = hs_pair(seed) else { return Ok(()) };
        prop_assert!(verify_hs_division_properties(&a).is_ok());
        let bounds = OracleBounds::default();
        let ms = enumerate_hs_morphisms(&a, &b, &bounds).unwrap();
        let ks = enumerate_hs_ggts(&a, &b, &bounds).unwrap();
        prop_assert_eq!(ms.len(), ks.len());
        let from_ms: BTreeSet<_> = ms.iter().map(|s| key(&morphism_to_ggt(s).unwrap())).collect();
        prop_assert_eq!(from_ms, ks.iter().map(key).collect::<BTreeSet<_>>());
    }
}

#[test]
fn unit_bundle_division_is_inverse_then_product() {
    use gengauge::builders::fixtures::LibraryGroup;
    for lg in LibraryGroup::ALL {
        let g = Arc::new(lg.groupoid());
        let b = gengauge::unit_bundle(g.clone());
        for (p, q) in b.fibred_pairs() {
            let (x, y) = (g.arrow(b.point_name(p)).unwrap(), g.arrow(b.point_name(q)).unwrap());
            assert_eq!(g.arrow_name(b.div(p, q)), g.arrow_name(g.mul(g.inverse(x), y)));
        }
    }
}
