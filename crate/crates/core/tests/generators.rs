use std::sync::Arc;

use gengauge::builders::fixtures::{make_action_groupoid, make_gauge_groupoid_example};
use gengauge::builders::random::{
    random_base, random_bundle, random_group_action, random_groupoid, random_hs, random_morphism, random_setting, GeneratorSpec,
};
use gengauge::{validate_bundle, validate_groupoid, validate_hs, validate_morphism, Error};

#[test]
fn random_groupoids_validate_and_respect_bounds() {
    for seed in 0..1000 {
        let spec = GeneratorSpec::new(seed);
        let g = random_groupoid(&spec).unwrap();
        assert!(validate_groupoid(&g).is_ok(), "seed {seed}");
        assert!(g.object_count() <= spec.max_objects);
        assert!(g.arrow_count() <= spec.max_arrows);
    }
}

#[test]
fn random_bundles_validate_and_respect_bounds() {
    for seed in 0..1000 {
        let spec = GeneratorSpec::new(seed);
        let (g, base) = random_setting(&spec).unwrap();
        let b = random_bundle(g, base, &spec.with_seed(seed + 1)).unwrap();
        assert!(validate_bundle(&b).is_ok(), "seed {seed}");
        assert!(b.point_count() <= spec.max_total);
        assert!(b.base().len() <= spec.max_base);
    }
}

#[test]
fn random_morphisms_and_hs_validate() {
    for seed in 0..300 {
        let spec = GeneratorSpec { max_objects: 2, ..GeneratorSpec::new(seed) };
        let g = Arc::new(random_groupoid(&spec).unwrap());
        let h = Arc::new(random_groupoid(&spec.with_seed(seed + 7919)).unwrap());
        let m = random_morphism(g.clone(), h.clone(), &spec).unwrap();
        assert!(validate_morphism(&m).is_ok(), "seed {seed}");
        match random_hs(g, h, &spec) {
            Ok(hs) => assert!(validate_hs(&hs).is_ok(), "seed {seed}"),
            Err(Error::Unsatisfiable(_)) => {}
            Err(e) => panic!("seed {seed}: {e}"),
        }
    }
}

#[test]
fn generation_is_deterministic() {
    for seed in [0, 1, 42, 9999] {
        let spec = GeneratorSpec::new(seed);
        let a = random_groupoid(&spec).unwrap().to_tables();
        let b = random_groupoid(&spec).unwrap().to_tables();
        assert_eq!(a, b);
        let (g, base) = random_setting(&spec).unwrap();
        let x = random_bundle(g.clone(), base.clone(), &spec).unwrap().to_tables();
        let y = random_bundle(g, base, &spec).unwrap().to_tables();
        assert_eq!(x, y);
    }
}

#[test]
fn random_action_groupoids_validate() {
    for seed in 0..200 {
        let (group, points, act) = random_group_action(&GeneratorSpec::new(seed)).unwrap();
        let g = make_action_groupoid(&group, &points, &act).unwrap();
        assert!(validate_groupoid(&g).is_ok());
        assert_eq!(g.arrow_count(), group.arrow_count() * points.len());
    }
}

#[test]
fn random_ordinary_gauge_groupoids_validate() {
    use gengauge::builders::fixtures::LibraryGroup;
    for seed in 0..100 {
        let spec = GeneratorSpec::new(seed);
        let group = Arc::new(LibraryGroup::ALL[seed as usize % 6].groupoid());
        let base = random_base(&GeneratorSpec { max_base: 2, ..spec }).unwrap();
        let b = random_bundle(group.clone(), base, &spec).unwrap();
        let g = make_gauge_groupoid_example(&b).unwrap();
        assert!(validate_groupoid(&g).is_ok());
        let n = b.point_count();
        assert_eq!(g.arrow_count(), n * n / group.arrow_count());
    }
}

#[test]
fn zero_bounds_are_unsatisfiable() {
    let spec = GeneratorSpec { max_objects: 0, ..GeneratorSpec::new(1) };
    assert!(matches!(random_groupoid(&spec), Err(Error::Unsatisfiable(_))));
}
