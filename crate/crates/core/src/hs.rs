//! Hilsum–Skandalis morphisms: principal `H`-bundles over the objects of `G`
//! carrying a commuting left `G`-action whose momentum is the projection.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::action::{validate_action, GroupoidAction, Side};
use crate::builders::oracle::{enumerate_bundle_morphisms, enumerate_ggts, OracleBounds};
use crate::bundle::{
    fibred_pairs, fibred_product, product_bundle, pullback_bundle, unit_bundle, validate_bundle,
    verify_division_properties, PrincipalBundle,
};
use crate::error::{Error, Result};
use crate::gauge::{
    enumerate_gauge_maps, ggt_to_morphism, morphism_to_ggt, same_bundle, validate_bundle_morphism,
    validate_gauge_transformation, validate_ggt, BundleMorphism, GaugeGroupoid, GaugeTransformation, Ggt,
    GroupPresentation,
};
use crate::groupoid::{product_groupoid, same_groupoid, FiniteGroupoid, ProductIndex};
use crate::ids::{pair_label, ArrowId, BaseId, ObjectId, PointId};
use crate::morphism::GroupoidMorphism;
use crate::report::ValidationReport;
use crate::witness;

/// Left action entries `[g, p, g·p]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LeftActionTables {
    pub left_act: Vec<(String, String, String)>,
}

/// An HS morphism `G → H`.
#[derive(Debug, Clone)]
pub struct HsMorphism {
    bundle: Arc<PrincipalBundle>,
    left: GroupoidAction,
}

impl HsMorphism {
    /// `left_act[p * |arrows(G)| + g] = g·p`. The bundle's base must list the
    /// objects of `G` in the same order.
    pub fn new(left: Arc<FiniteGroupoid>, bundle: Arc<PrincipalBundle>, left_act: Vec<Option<PointId>>) -> Result<Self> {
        if bundle.base() != left.object_labels() {
            return Err(Error::Mismatch(
                "the bundle base must be the object set of the left groupoid".into(),
            ));
        }
        let momentum = bundle.point_ids().map(|p| ObjectId(bundle.projection(p).0)).collect();
        let action = GroupoidAction::new(left, Side::Left, bundle.total().clone(), momentum, left_act)?;
        Ok(HsMorphism { bundle, left: action })
    }

    pub fn from_tables(left: Arc<FiniteGroupoid>, bundle: Arc<PrincipalBundle>, t: &LeftActionTables) -> Result<Self> {
        let n = left.arrow_count();
        let mut act = vec![None; bundle.point_count() * n];
        for (g, p, q) in &t.left_act {
            let gi = left.arrow(g)?;
            let pi = bundle.point(p)?;
            let qi = bundle.point(q)?;
            let slot = &mut act[pi.index() * n + gi.index()];
            if slot.is_some() {
                return Err(Error::DuplicateEntry {
                    map: "left_act".into(),
                    key: format!("({g},{p})"),
                });
            }
            *slot = Some(qi);
        }
        Self::new(left, bundle, act)
    }

    pub fn to_tables(&self) -> LeftActionTables {
        LeftActionTables {
            left_act: self.left.to_tables().act,
        }
    }

    /// The acting groupoid `G`.
    pub fn left_groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.left.groupoid()
    }

    /// The structure groupoid `H`.
    pub fn right_groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.bundle.groupoid()
    }

    pub fn bundle(&self) -> &Arc<PrincipalBundle> {
        &self.bundle
    }

    pub fn left_action(&self) -> &GroupoidAction {
        &self.left
    }

    /// `g · p`, if defined.
    #[inline]
    pub fn left_act(&self, g: ArrowId, p: PointId) -> Option<PointId> {
        self.left.apply(g, p)
    }

    /// Arrows of `G` that can act on `p` (source `π(p)`).
    pub fn left_acting(&self, p: PointId) -> &[ArrowId] {
        self.left.acting_arrows(p)
    }

    fn left_vec(&self) -> Vec<Option<PointId>> {
        let g = self.left_groupoid();
        let mut v = vec![None; self.bundle.point_count() * g.arrow_count()];
        for p in self.bundle.point_ids() {
            for &x in self.left_acting(p) {
                v[p.index() * g.arrow_count() + x.index()] = self.left_act(x, p);
            }
        }
        v
    }
}

fn shares_groupoids(a: &HsMorphism, b: &HsMorphism) -> Result<()> {
    if !same_groupoid(a.left_groupoid(), b.left_groupoid()) || !same_groupoid(a.right_groupoid(), b.right_groupoid()) {
        return Err(Error::Mismatch("HS morphisms act between different groupoids".into()));
    }
    Ok(())
}

/// Checks that `h` is an HS morphism.
///
/// Reports bundle rules, the left-action rules as `hs.left-*`,
/// `hs.momentum-invariant` (`ε(g·p) = ε(p)`) and `hs.compatibility`
/// (`(g·p)·h = g·(p·h)`, witness `(g, p, h)`).
pub fn validate_hs(h: &HsMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("HS morphism");
    r.merge(validate_bundle(&h.bundle));
    for v in validate_action(&h.left).violations {
        let rule = match v.rule {
            "action.total" => "hs.left-total",
            "action.momentum" => "hs.left-momentum",
            "action.unit" => "hs.left-unit",
            "action.composition" => "hs.left-composition",
            other => other,
        };
        r.push(rule, v.witness, v.message);
    }
    let (b, gl, gr) = (&*h.bundle, h.left_groupoid(), h.right_groupoid());
    for p in b.point_ids() {
        for &g in h.left_acting(p) {
            let Some(gp) = h.left_act(g, p) else { continue };
            if b.momentum(gp) != b.momentum(p) {
                r.push(
                    "hs.momentum-invariant",
                    witness![gl.arrow_name(g), b.point_name(p)],
                    "ε(g·p) differs from ε(p)",
                );
                continue;
            }
            for &x in b.acting_arrows(p) {
                let lhs = b.act(gp, x);
                let rhs = b.act(p, x).and_then(|px| h.left_act(g, px));
                if lhs != rhs || lhs.is_none() {
                    r.push(
                        "hs.compatibility",
                        witness![gl.arrow_name(g), b.point_name(p), gr.arrow_name(x)],
                        "(g·p)·h differs from g·(p·h)",
                    );
                }
            }
        }
    }
    r
}

/// The HS morphism of a groupoid morphism `Φ: G → H`.
///
/// Points are `(x,h)` with `φ(x) = t(h)`; `π(x,h) = x`, `ε(x,h) = s(h)`,
/// `(x,h)·h' = (x,h·h')` and `g·(x,h) = (t(g), Φ(g)·h)`.
pub fn hs_from_groupoid_morphism(m: &GroupoidMorphism) -> Result<HsMorphism> {
    let (gl, gr) = (m.domain(), m.codomain());
    let unit = unit_bundle(gr.clone());
    let f: Vec<BaseId> = gl.object_ids().map(|x| BaseId(m.object(x).0)).collect();
    let bundle = Arc::new(pullback_bundle(&unit, gl.object_labels().clone(), &f)?);
    let n = gl.arrow_count();
    let mut act = vec![None; bundle.point_count() * n];
    // Pullback points are listed by x, then by the unit fibre of φ(x).
    let mut pos = vec![vec![None; gr.arrow_count()]; gl.object_count()];
    let mut i = 0;
    for x in gl.object_ids() {
        for &h in unit.fiber(BaseId(m.object(x).0)) {
            pos[x.index()][h.index()] = Some(PointId::from(i));
            i += 1;
        }
    }
    for x in gl.object_ids() {
        for &h in unit.fiber(BaseId(m.object(x).0)) {
            let p = pos[x.index()][h.index()].expect("indexed");
            for &g in gl.arrows_from(x) {
                let img = gr
                    .compose(m.arrow(g), ArrowId(h.0))
                    .ok_or_else(|| Error::Integrity("Φ(g)·h is not composable; is Φ a morphism?".into()))?;
                act[p.index() * n + g.index()] = pos[gl.target(g).index()][img.index()];
            }
        }
    }
    HsMorphism::new(gl.clone(), bundle, act)
}

/// The product HS morphism `G1 × G2 → H1 × H2`.
pub fn hs_product(h1: &HsMorphism, h2: &HsMorphism) -> Result<HsMorphism> {
    let bundle = Arc::new(product_bundle(&h1.bundle, &h2.bundle));
    let (g1, g2) = (h1.left_groupoid(), h2.left_groupoid());
    let gl = Arc::new(product_groupoid(g1, g2));
    let ix = ProductIndex::of(g1, g2);
    let n2 = h2.bundle.point_count();
    let na = gl.arrow_count();
    let mut act = vec![None; bundle.point_count() * na];
    for p1 in h1.bundle.point_ids() {
        for &x1 in h1.left_acting(p1) {
            let Some(q1) = h1.left_act(x1, p1) else { continue };
            for p2 in h2.bundle.point_ids() {
                for &x2 in h2.left_acting(p2) {
                    let Some(q2) = h2.left_act(x2, p2) else { continue };
                    let p = p1.index() * n2 + p2.index();
                    act[p * na + ix.arrow(x1, x2).index()] = Some(PointId::from(q1.index() * n2 + q2.index()));
                }
            }
        }
    }
    HsMorphism::new(gl, bundle, act)
}

/// The fibred product `H1 ⊙ H2`, an HS morphism `G → H × H` with the
/// diagonal left action `g·(p, p̃) = (g·p, g·p̃)`.
pub fn hs_fibred_product(h1: &HsMorphism, h2: &HsMorphism) -> Result<HsMorphism> {
    shares_groupoids(h1, h2)?;
    let bundle = Arc::new(fibred_product(&h1.bundle, &h2.bundle)?);
    let pairs = fibred_pairs(&h1.bundle, &h2.bundle);
    let n2 = h2.bundle.point_count();
    let mut pos = vec![None; h1.bundle.point_count() * n2];
    for (i, &(p, q)) in pairs.iter().enumerate() {
        pos[p.index() * n2 + q.index()] = Some(PointId::from(i));
    }
    let gl = h1.left_groupoid().clone();
    let na = gl.arrow_count();
    let mut act = vec![None; pairs.len() * na];
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &g in h1.left_acting(p) {
            if let (Some(gp), Some(gq)) = (h1.left_act(g, p), h2.left_act(g, q)) {
                act[i * na + g.index()] = pos[gp.index() * n2 + gq.index()];
            }
        }
    }
    HsMorphism::new(gl, bundle, act)
}

/// Division-map properties of the underlying bundle, plus `G`-invariance
/// `φ(g·p1, g·p2) = φ(p1, p2)` (`hs.division-invariant`, witness `(g, p1, p2)`).
pub fn verify_hs_division_properties(h: &HsMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("HS division map");
    r.merge(verify_division_properties(&h.bundle));
    let b = &*h.bundle;
    let gl = h.left_groupoid();
    let gr = h.right_groupoid();
    for (p, q) in b.fibred_pairs() {
        let Ok(phi) = b.division(p, q) else { continue };
        for &g in h.left_acting(p) {
            let (Some(gp), Some(gq)) = (h.left_act(g, p), h.left_act(g, q)) else {
                continue;
            };
            match b.division(gp, gq) {
                Ok(v) if v == phi => {}
                Ok(v) => r.push(
                    "hs.division-invariant",
                    witness![gl.arrow_name(g), b.point_name(p), b.point_name(q)],
                    format!("φ(g·p, g·q) = {} but φ(p,q) = {}", gr.arrow_name(v), gr.arrow_name(phi)),
                ),
                Err(e) => r.push(
                    "hs.division-invariant",
                    witness![gl.arrow_name(g), b.point_name(p), b.point_name(q)],
                    e.to_string(),
                ),
            }
        }
    }
    r
}

fn check_endpoints(h1: &HsMorphism, h2: &HsMorphism, source: &Arc<PrincipalBundle>, target: &Arc<PrincipalBundle>) -> Result<()> {
    shares_groupoids(h1, h2)?;
    if !same_bundle(&h1.bundle, source) || !same_bundle(&h2.bundle, target) {
        return Err(Error::Mismatch("map does not run between the given HS morphisms".into()));
    }
    Ok(())
}

/// Whether `σ(g·p) = g·σ(p)` everywhere.
pub fn is_left_equivariant(h1: &HsMorphism, h2: &HsMorphism, s: &BundleMorphism) -> bool {
    left_equivariance_report(h1, h2, s).is_ok()
}

fn left_equivariance_report(h1: &HsMorphism, h2: &HsMorphism, s: &BundleMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("left equivariance");
    let gl = h1.left_groupoid();
    for p in h1.bundle.point_ids() {
        for &g in h1.left_acting(p) {
            let Some(gp) = h1.left_act(g, p) else { continue };
            if h2.left_act(g, s.apply(p)) != Some(s.apply(gp)) {
                r.push(
                    "hs-morphism.left-equivariance",
                    witness![gl.arrow_name(g), h1.bundle.point_name(p)],
                    "σ(g·p) differs from g·σ(p)",
                );
            }
        }
    }
    r
}

/// Whether `K(g·p1, g·p2) = K(p1, p2)` everywhere.
pub fn is_left_invariant(h1: &HsMorphism, h2: &HsMorphism, k: &Ggt) -> bool {
    left_invariance_report(h1, h2, k).is_ok()
}

fn left_invariance_report(h1: &HsMorphism, h2: &HsMorphism, k: &Ggt) -> ValidationReport {
    let mut r = ValidationReport::new("left invariance");
    let gl = h1.left_groupoid();
    for (p1, p2) in k.pairs() {
        for &g in h1.left_acting(p1) {
            let (Some(a), Some(b)) = (h1.left_act(g, p1), h2.left_act(g, p2)) else {
                continue;
            };
            if k.get(a, b) != Some(k.value(p1, p2)) {
                r.push(
                    "hs-ggt.invariance",
                    witness![gl.arrow_name(g), h1.bundle.point_name(p1), h2.bundle.point_name(p2)],
                    "K(g·p1, g·p2) differs from K(p1, p2)",
                );
            }
        }
    }
    r
}

/// Bundle-morphism rules plus `hs-morphism.left-equivariance` (witness `(g, p)`).
pub fn validate_hs_morphism(h1: &HsMorphism, h2: &HsMorphism, s: &BundleMorphism) -> Result<ValidationReport> {
    check_endpoints(h1, h2, s.source(), s.target())?;
    let mut r = validate_bundle_morphism(s);
    r.subject = "HS morphism map".into();
    r.merge(left_equivariance_report(h1, h2, s));
    Ok(r)
}

/// GGT rules plus `hs-ggt.invariance` (witness `(g, p1, p2)`).
pub fn validate_hs_ggt(h1: &HsMorphism, h2: &HsMorphism, k: &Ggt) -> Result<ValidationReport> {
    check_endpoints(h1, h2, k.source(), k.target())?;
    let mut r = validate_ggt(k);
    r.subject = "HS generalized gauge transformation".into();
    r.merge(left_invariance_report(h1, h2, k));
    Ok(r)
}

/// `K_σ` for a map of HS morphisms; a left-equivariant `σ` must give a
/// `G`-invariant `K_σ`, which is checked.
pub fn hs_morphism_to_ggt(h1: &HsMorphism, h2: &HsMorphism, s: &BundleMorphism) -> Result<Ggt> {
    check_endpoints(h1, h2, s.source(), s.target())?;
    let k = morphism_to_ggt(s)?;
    if is_left_equivariant(h1, h2, s) && !is_left_invariant(h1, h2, &k) {
        return Err(Error::Integrity("K_σ of a left-equivariant σ is not G-invariant".into()));
    }
    Ok(k)
}

/// `σ_K` for an HS GGT; a `G`-invariant `K` must give a left-equivariant
/// `σ_K`, which is checked.
pub fn hs_ggt_to_morphism(h1: &HsMorphism, h2: &HsMorphism, k: &Ggt) -> Result<BundleMorphism> {
    check_endpoints(h1, h2, k.source(), k.target())?;
    let s = ggt_to_morphism(k)?;
    if is_left_invariant(h1, h2, k) && !is_left_equivariant(h1, h2, &s) {
        return Err(Error::Integrity("σ_K of a G-invariant K is not left-equivariant".into()));
    }
    Ok(s)
}

/// All left-equivariant bundle morphisms between two HS morphisms.
pub fn enumerate_hs_morphisms(h1: &Arc<HsMorphism>, h2: &Arc<HsMorphism>, bounds: &OracleBounds) -> Result<Vec<BundleMorphism>> {
    shares_groupoids(h1, h2)?;
    Ok(enumerate_bundle_morphisms(&h1.bundle, &h2.bundle, bounds)?
        .into_iter()
        .filter(|s| is_left_equivariant(h1, h2, s))
        .collect())
}

/// All `G`-invariant GGTs between two HS morphisms.
pub fn enumerate_hs_ggts(h1: &Arc<HsMorphism>, h2: &Arc<HsMorphism>, bounds: &OracleBounds) -> Result<Vec<Ggt>> {
    shares_groupoids(h1, h2)?;
    Ok(enumerate_ggts(&h1.bundle, &h2.bundle, bounds)?
        .into_iter()
        .filter(|k| is_left_invariant(h1, h2, k))
        .collect())
}

/// The HS gauge group: gauge transformations `G` of the underlying bundle
/// with `G(g·p) = G(p)`.
pub fn hs_gauge_group(h: &HsMorphism) -> Result<GroupPresentation> {
    let b = &*h.bundle;
    let gr = h.right_groupoid();
    let mut elements = Vec::new();
    for values in enumerate_gauge_maps(b)? {
        let gt = GaugeTransformation { values };
        if !validate_gauge_transformation(b, &gt)?.is_ok() {
            continue;
        }
        let invariant = b.point_ids().all(|p| {
            h.left_acting(p)
                .iter()
                .all(|&g| h.left_act(g, p).is_none_or(|gp| gt.values[gp.index()] == gt.values[p.index()]))
        });
        if invariant {
            elements.push(gt.values);
        }
    }
    let unit = b.point_ids().map(|p| gr.unit(b.momentum(p))).collect();
    GroupPresentation::pointwise(gr, elements, unit)
}

/// The groupoid of `G`-invariant GGTs between HS morphisms sharing `G` and `H`.
///
/// Export fails if ⋆ or inversion leaves the invariant arrows.
pub fn build_hs_gauge_groupoid(hs: Vec<(String, Arc<HsMorphism>)>, bounds: &OracleBounds) -> Result<GaugeGroupoid> {
    if let Some((_, first)) = hs.first() {
        for (_, h) in &hs[1..] {
            shares_groupoids(first, h)?;
        }
    }
    let list: Vec<Arc<HsMorphism>> = hs.iter().map(|(_, h)| h.clone()).collect();
    let bundles = hs.iter().map(|(n, h)| (n.clone(), h.bundle.clone())).collect();
    GaugeGroupoid::build(bundles, bounds, |i, j, k| is_left_invariant(&list[i], &list[j], k))
}

/// The identity HS morphism of `G`: the unit bundle with the left regular action.
pub fn identity_hs(g: Arc<FiniteGroupoid>) -> HsMorphism {
    hs_from_groupoid_morphism(&GroupoidMorphism::identity(g)).expect("identity is a morphism")
}

/// Relabels points of an HS morphism by a new list of names, index for index.
pub fn relabel_hs(h: &HsMorphism, bundle: Arc<PrincipalBundle>) -> Result<HsMorphism> {
    if bundle.point_count() != h.bundle.point_count() {
        return Err(Error::Mismatch("relabelled bundle has a different size".into()));
    }
    HsMorphism::new(h.left_groupoid().clone(), bundle, h.left_vec())
}

/// Point names of a fibred product HS morphism, `(p,q)`.
pub fn fibred_point_name(h1: &HsMorphism, h2: &HsMorphism, p: PointId, q: PointId) -> String {
    pair_label(h1.bundle.point_name(p), h2.bundle.point_name(q))
}
