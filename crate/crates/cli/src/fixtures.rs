//! The shipped fixture documents, by file name.

use std::sync::Arc;

use gengauge::action::{ActionTables, Side};
use gengauge::builders::fixtures::{fixture_groupoids, group_s3, pair, z2};
use gengauge::hs::identity_hs;
use gengauge::{
    identity_ggt, trivial_bundle, unit_bundle, BundleMorphism, GroupoidMorphism, Labels, ObjectId,
};

use crate::document::{ActionBody, Document};

fn pairs(xs: &[(&str, &str)]) -> Vec<(String, String)> {
    xs.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn triples(xs: &[(&str, &str, &str)]) -> Vec<(String, String, String)> {
    xs.iter().map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string())).collect()
}

/// Every fixture as `(file name, document)`, in a fixed order.
pub fn builtin() -> Vec<(String, Document)> {
    let mut out: Vec<(String, Document)> = fixture_groupoids()
        .into_iter()
        .map(|(name, g)| (format!("{name}.gpd"), Document::groupoid(&g)))
        .collect();

    let z = Arc::new(z2());
    out.push((
        "z2-swap.act".into(),
        Document::Action(ActionBody {
            groupoid: z.to_tables(),
            action: ActionTables {
                side: Side::Left,
                points: vec!["0".into(), "1".into()],
                momentum: pairs(&[("0", "*"), ("1", "*")]),
                act: triples(&[("e", "0", "0"), ("e", "1", "1"), ("a", "0", "1"), ("a", "1", "0")]),
            },
        }),
    ));
    out.push(("z2-identity.mor".into(), Document::morphism(&GroupoidMorphism::identity(z.clone()))));

    let unit_z2 = Arc::new(unit_bundle(z.clone()));
    out.push(("unit-z2.bnd".into(), Document::bundle(&unit_z2)));
    out.push(("unit-s3.bnd".into(), Document::bundle(&unit_bundle(Arc::new(group_s3())))));
    out.push(("unit-pair2.bnd".into(), Document::bundle(&unit_bundle(Arc::new(pair(2))))));
    let base = Labels::new("base point", ["u", "v"]).expect("distinct");
    let trivial = trivial_bundle(z.clone(), base, &[ObjectId(0), ObjectId(0)]).expect("trivial bundle");
    out.push(("trivial-z2.bnd".into(), Document::bundle(&trivial)));

    let id = BundleMorphism::identity(unit_z2.clone());
    out.push(("unit-z2-identity.bmor".into(), Document::bundle_morphism(&id)));
    out.push((
        "unit-z2-identity.ggt".into(),
        Document::ggt(&identity_ggt(&unit_z2).expect("unit bundle is principal")),
    ));

    let hz = identity_hs(z);
    out.push(("identity-z2.hs".into(), Document::hs(&hz)));
    out.push(("identity-pair2.hs".into(), Document::hs(&identity_hs(Arc::new(pair(2))))));
    let hid = BundleMorphism::identity(hz.bundle().clone());
    out.push(("identity-z2.hsm".into(), Document::hs_morphism(&hz, &hz, &hid)));
    out
}
