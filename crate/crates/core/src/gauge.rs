//! Bundle morphisms, generalized gauge transformations (GGTs) and the
//! correspondence between them, gauge groups, and the groupoid of GGTs.
//!
//! A GGT `K` between bundles `P1` and `P2` over the same base assigns to every
//! pair `(p1, p2)` in the same fibre an arrow `K(p1,p2): ε1(p1) → ε2(p2)` with
//! `K(p1·g1, p2·g2) = g2⁻¹ · K(p1,p2) · g1`.

use std::collections::HashMap;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::builders::oracle::{enumerate_ggts, OracleBounds};
use crate::bundle::{check_same_base_and_groupoid, PrincipalBundle};
use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::ids::{total_map, ArrowId, Labels, ObjectId, PointId};
use crate::report::ValidationReport;
use crate::witness;

/// Whether two shared bundles are the same bundle.
pub fn same_bundle(a: &Arc<PrincipalBundle>, b: &Arc<PrincipalBundle>) -> bool {
    Arc::ptr_eq(a, b) || a.same_structure(b)
}

/// Map tables of a bundle morphism: `[p, σ(p)]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMorphismTables {
    pub map: Vec<(String, String)>,
}

/// Value tables of a GGT: `[p1, p2, K(p1,p2)]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgtTables {
    pub values: Vec<(String, String, String)>,
}

impl BundleMorphismTables {
    pub fn canonical(mut self) -> Self {
        self.map.sort();
        self
    }
}

impl GgtTables {
    pub fn canonical(mut self) -> Self {
        self.values.sort();
        self
    }
}

/// A total map `σ: P1 → P2` between bundles with the same base and groupoid.
#[derive(Debug, Clone)]
pub struct BundleMorphism {
    source: Arc<PrincipalBundle>,
    target: Arc<PrincipalBundle>,
    map: Vec<PointId>,
}

impl BundleMorphism {
    pub fn new(source: Arc<PrincipalBundle>, target: Arc<PrincipalBundle>, map: Vec<PointId>) -> Result<Self> {
        check_same_base_and_groupoid(&source, &target)?;
        if map.len() != source.point_count() {
            return Err(Error::NotTotal {
                map: "bundle morphism".into(),
                missing: format!("{} of {} points", map.len(), source.point_count()),
            });
        }
        if map.iter().any(|q| q.index() >= target.point_count()) {
            return Err(Error::InvalidInput("bundle morphism leaves the target total space".into()));
        }
        Ok(BundleMorphism { source, target, map })
    }

    pub fn from_tables(source: Arc<PrincipalBundle>, target: Arc<PrincipalBundle>, t: &BundleMorphismTables) -> Result<Self> {
        let map = total_map("bundle morphism", source.total(), "point", target.total(), "point", &t.map)?
            .into_iter()
            .map(PointId)
            .collect();
        Self::new(source, target, map)
    }

    pub fn to_tables(&self) -> BundleMorphismTables {
        BundleMorphismTables {
            map: self
                .source
                .point_ids()
                .map(|p| (self.source.point_name(p).to_string(), self.target.point_name(self.apply(p)).to_string()))
                .collect(),
        }
    }

    pub fn identity(b: Arc<PrincipalBundle>) -> Self {
        let map = b.point_ids().collect();
        BundleMorphism {
            source: b.clone(),
            target: b,
            map,
        }
    }

    pub fn source(&self) -> &Arc<PrincipalBundle> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PrincipalBundle> {
        &self.target
    }

    pub fn map(&self) -> &[PointId] {
        &self.map
    }

    #[inline]
    pub fn apply(&self, p: PointId) -> PointId {
        self.map[p.index()]
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &BundleMorphism) -> Result<BundleMorphism> {
        if !same_bundle(first.target(), &self.source) {
            return Err(Error::Mismatch("bundle morphisms are not composable".into()));
        }
        Self::new(
            first.source.clone(),
            self.target.clone(),
            first.map.iter().map(|&p| self.apply(p)).collect(),
        )
    }

    /// The inverse map, if `σ` is a bijection.
    pub fn inverse(&self) -> Result<BundleMorphism> {
        let mut inv = vec![None; self.target.point_count()];
        for p in self.source.point_ids() {
            let slot = &mut inv[self.apply(p).index()];
            if slot.is_some() {
                return Err(Error::Integrity("bundle morphism is not injective".into()));
            }
            *slot = Some(p);
        }
        let map = inv
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Integrity("bundle morphism is not surjective".into()))?;
        Self::new(self.target.clone(), self.source.clone(), map)
    }

    pub fn is_bijective(&self) -> bool {
        self.inverse().is_ok()
    }
}

/// Checks `π2∘σ = π1` (`bundle-morphism.fibre`), `ε2∘σ = ε1`
/// (`bundle-morphism.momentum`) and `σ(p·g) = σ(p)·g`
/// (`bundle-morphism.equivariance`).
pub fn validate_bundle_morphism(s: &BundleMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("bundle morphism");
    let (p1, p2) = (&*s.source, &*s.target);
    let g = p1.groupoid();
    for p in p1.point_ids() {
        let q = s.apply(p);
        if p2.base_name(p2.projection(q)) != p1.base_name(p1.projection(p)) {
            r.push(
                "bundle-morphism.fibre",
                witness![p1.point_name(p)],
                format!("σ(p) = {} lies in another fibre", p2.point_name(q)),
            );
        }
        if p2.momentum(q) != p1.momentum(p) {
            r.push(
                "bundle-morphism.momentum",
                witness![p1.point_name(p)],
                "ε2(σ(p)) differs from ε1(p)",
            );
        }
        for &x in p1.acting_arrows(p) {
            let Some(px) = p1.act(p, x) else { continue };
            if p2.act(q, x) != Some(s.apply(px)) {
                r.push(
                    "bundle-morphism.equivariance",
                    witness![p1.point_name(p), g.arrow_name(x)],
                    "σ(p·g) differs from σ(p)·g",
                );
            }
        }
    }
    r
}

/// A generalized gauge transformation from `P1` to `P2`, stored densely over
/// `P1 × P2` and defined exactly on the fibred pairs.
#[derive(Debug, Clone)]
pub struct Ggt {
    source: Arc<PrincipalBundle>,
    target: Arc<PrincipalBundle>,
    values: Vec<Option<ArrowId>>,
}

impl Ggt {
    /// Builds a GGT from `values[p1 * |P2| + p2]`, which must be present
    /// exactly on fibred pairs.
    pub fn new(source: Arc<PrincipalBundle>, target: Arc<PrincipalBundle>, values: Vec<Option<ArrowId>>) -> Result<Self> {
        check_same_base_and_groupoid(&source, &target)?;
        let n2 = target.point_count();
        if values.len() != source.point_count() * n2 {
            return Err(Error::InvalidInput("GGT table has the wrong shape".into()));
        }
        let na = source.groupoid().arrow_count();
        for p in source.point_ids() {
            for q in target.point_ids() {
                let fibred = source.base_name(source.projection(p)) == target.base_name(target.projection(q));
                match (values[p.index() * n2 + q.index()], fibred) {
                    (Some(a), true) if a.index() < na => {}
                    (Some(_), true) => return Err(Error::InvalidInput("GGT value is not an arrow".into())),
                    (None, false) => {}
                    (None, true) => {
                        return Err(Error::NotTotal {
                            map: "ggt".into(),
                            missing: format!("({},{})", source.point_name(p), target.point_name(q)),
                        })
                    }
                    (Some(_), false) => {
                        return Err(Error::OffDomain {
                            map: "ggt".into(),
                            entry: format!("({},{})", source.point_name(p), target.point_name(q)),
                        })
                    }
                }
            }
        }
        Ok(Ggt { source, target, values })
    }

    /// Builds a GGT by evaluating `f` on every fibred pair.
    pub fn from_fn(
        source: Arc<PrincipalBundle>,
        target: Arc<PrincipalBundle>,
        mut f: impl FnMut(PointId, PointId) -> Result<ArrowId>,
    ) -> Result<Self> {
        check_same_base_and_groupoid(&source, &target)?;
        let n2 = target.point_count();
        let mut values = vec![None; source.point_count() * n2];
        for p in source.point_ids() {
            let m = target.base_point(source.base_name(source.projection(p)))?;
            for &q in target.fiber(m) {
                values[p.index() * n2 + q.index()] = Some(f(p, q)?);
            }
        }
        Ok(Ggt { source, target, values })
    }

    pub fn from_tables(source: Arc<PrincipalBundle>, target: Arc<PrincipalBundle>, t: &GgtTables) -> Result<Self> {
        let n2 = target.point_count();
        let mut values = vec![None; source.point_count() * n2];
        for (a, b, k) in &t.values {
            let p = source.point(a)?;
            let q = target.point(b)?;
            let x = source.groupoid().arrow(k)?;
            let slot = &mut values[p.index() * n2 + q.index()];
            if slot.is_some() {
                return Err(Error::DuplicateEntry {
                    map: "ggt".into(),
                    key: format!("({a},{b})"),
                });
            }
            *slot = Some(x);
        }
        Self::new(source, target, values)
    }

    pub fn to_tables(&self) -> GgtTables {
        let g = self.source.groupoid();
        GgtTables {
            values: self
                .pairs()
                .map(|(p, q)| {
                    (
                        self.source.point_name(p).to_string(),
                        self.target.point_name(q).to_string(),
                        g.arrow_name(self.value(p, q)).to_string(),
                    )
                })
                .collect(),
        }
    }

    pub fn source(&self) -> &Arc<PrincipalBundle> {
        &self.source
    }

    pub fn target(&self) -> &Arc<PrincipalBundle> {
        &self.target
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.source.groupoid()
    }

    /// The dense value table, `None` off the fibred pairs.
    pub fn values(&self) -> &[Option<ArrowId>] {
        &self.values
    }

    pub fn get(&self, p1: PointId, p2: PointId) -> Option<ArrowId> {
        self.values[p1.index() * self.target.point_count() + p2.index()]
    }

    /// `K(p1, p2)`; panics off the fibred pairs.
    #[inline]
    pub fn value(&self, p1: PointId, p2: PointId) -> ArrowId {
        self.get(p1, p2).unwrap_or_else(|| {
            panic!(
                "({},{}) is not a fibred pair",
                self.source.point_name(p1),
                self.target.point_name(p2)
            )
        })
    }

    /// The fibred pairs `(p1, p2)` in index order.
    pub fn pairs(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        let n2 = self.target.point_count();
        self.values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_some())
            .map(move |(i, _)| (PointId::from(i / n2), PointId::from(i % n2)))
    }

    /// Pointwise equality over the same bundles.
    pub fn same_values(&self, other: &Ggt) -> bool {
        self.values == other.values && same_bundle(&self.source, &other.source) && same_bundle(&self.target, &other.target)
    }
}

/// Checks `s(K(p1,p2)) = ε1(p1)` (`ggt.source`), `t(K(p1,p2)) = ε2(p2)`
/// (`ggt.target`) and `K(p1·g1, p2·g2) = g2⁻¹·K(p1,p2)·g1` (`ggt.equivariance`).
pub fn validate_ggt(k: &Ggt) -> ValidationReport {
    let mut r = ValidationReport::new("generalized gauge transformation");
    let (b1, b2) = (&*k.source, &*k.target);
    let g = &**b1.groupoid();
    for (p1, p2) in k.pairs() {
        let v = k.value(p1, p2);
        let w = || witness![b1.point_name(p1), b2.point_name(p2)];
        if g.source(v) != b1.momentum(p1) {
            r.push("ggt.source", w(), format!("source of {} is not ε1(p1)", g.arrow_name(v)));
        }
        if g.target(v) != b2.momentum(p2) {
            r.push("ggt.target", w(), format!("target of {} is not ε2(p2)", g.arrow_name(v)));
        }
        for &g1 in b1.acting_arrows(p1) {
            let Some(q1) = b1.act(p1, g1) else { continue };
            for &g2 in b2.acting_arrows(p2) {
                let Some(q2) = b2.act(p2, g2) else { continue };
                let expected = g.compose(g.inverse(g2), v).and_then(|x| g.compose(x, g1));
                if k.get(q1, q2) != expected || expected.is_none() {
                    r.push(
                        "ggt.equivariance",
                        witness![b1.point_name(p1), b2.point_name(p2), g.arrow_name(g1), g.arrow_name(g2)],
                        "K(p1·g1, p2·g2) differs from g2⁻¹·K(p1,p2)·g1",
                    );
                }
            }
        }
    }
    r
}

/// `K_σ(p1, p2) = φ_{P2}(p2, σ(p1))`.
pub fn morphism_to_ggt(s: &BundleMorphism) -> Result<Ggt> {
    let b2 = s.target.clone();
    Ggt::from_fn(s.source.clone(), s.target.clone(), |p1, p2| b2.division(p2, s.apply(p1)))
}

/// `σ_K(p1) = p2 · K(p1, p2)`, using the least `p2` of the fibre and checking
/// that every other choice agrees.
pub fn ggt_to_morphism(k: &Ggt) -> Result<BundleMorphism> {
    let (b1, b2) = (&k.source, &k.target);
    let mut map = Vec::with_capacity(b1.point_count());
    for p1 in b1.point_ids() {
        let m = b2.base_point(b1.base_name(b1.projection(p1)))?;
        let mut image = None;
        for &p2 in b2.fiber(m) {
            let q = b2.act(p2, k.value(p1, p2)).ok_or_else(|| {
                Error::Integrity(format!(
                    "{} · K({},{}) is undefined",
                    b2.point_name(p2),
                    b1.point_name(p1),
                    b2.point_name(p2)
                ))
            })?;
            match image {
                None => image = Some(q),
                Some(prev) if prev == q => {}
                Some(prev) => {
                    return Err(Error::Integrity(format!(
                        "p2 · K({}, p2) depends on p2: {} vs {}",
                        b1.point_name(p1),
                        b2.point_name(prev),
                        b2.point_name(q)
                    )))
                }
            }
        }
        map.push(image.ok_or_else(|| Error::Integrity("empty fibre".into()))?);
    }
    BundleMorphism::new(b1.clone(), b2.clone(), map)
}

/// `K̃(p2, p1) = K(p1, p2)⁻¹`, a GGT from `P2` to `P1`.
pub fn invert_ggt(k: &Ggt) -> Ggt {
    let g = k.groupoid().clone();
    Ggt::from_fn(k.target.clone(), k.source.clone(), |p2, p1| Ok(g.inverse(k.value(p1, p2))))
        .expect("inverse of a GGT is total on fibred pairs")
}

/// `(K23 ⋆ K12)(p1, p3) = K23(p2, p3) · K12(p1, p2)`.
///
/// Evaluates at the least `p2` of the fibre and checks every other `p2`
/// gives the same arrow.
pub fn star(k23: &Ggt, k12: &Ggt) -> Result<Ggt> {
    if !same_bundle(&k12.target, &k23.source) {
        return Err(Error::Mismatch("middle bundles of ⋆ differ".into()));
    }
    let g = k12.groupoid().clone();
    let mid = k12.target.clone();
    Ggt::from_fn(k12.source.clone(), k23.target.clone(), |p1, p3| {
        let m = mid.base_point(k12.source.base_name(k12.source.projection(p1)))?;
        let mut out = None;
        for &p2 in mid.fiber(m) {
            let v = g.compose(k23.value(p2, p3), k12.value(p1, p2)).ok_or_else(|| {
                Error::Integrity(format!("K23(p2,p3)·K12(p1,p2) is not composable at p2 = {}", mid.point_name(p2)))
            })?;
            match out {
                None => out = Some(v),
                Some(prev) if prev == v => {}
                Some(_) => {
                    return Err(Error::Integrity(format!(
                        "⋆ depends on the middle point at ({},{})",
                        k12.source.point_name(p1),
                        k23.target.point_name(p3)
                    )))
                }
            }
        }
        out.ok_or_else(|| Error::Integrity("empty fibre".into()))
    })
}

/// The unit for ⋆ at `P`: `K(p, q) = φ_P(q, p)`.
pub fn identity_ggt(b: &Arc<PrincipalBundle>) -> Result<Ggt> {
    Ggt::from_fn(b.clone(), b.clone(), |p, q| b.division(q, p))
}

/// An ordinary gauge transformation `G: P → G` of one bundle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaugeTransformation {
    pub values: Vec<ArrowId>,
}

/// Checks `G(p) ∈ G_{ε(p),ε(p)}` (`gauge.isotropy`) and
/// `G(p·g) = g⁻¹·G(p)·g` (`gauge.equivariance`).
pub fn validate_gauge_transformation(b: &PrincipalBundle, gt: &GaugeTransformation) -> Result<ValidationReport> {
    if gt.values.len() != b.point_count() {
        return Err(Error::NotTotal {
            map: "gauge transformation".into(),
            missing: format!("{} of {} points", gt.values.len(), b.point_count()),
        });
    }
    let g = &**b.groupoid();
    let mut r = ValidationReport::new("gauge transformation");
    for p in b.point_ids() {
        let v = gt.values[p.index()];
        if g.source(v) != b.momentum(p) || g.target(v) != b.momentum(p) {
            r.push(
                "gauge.isotropy",
                witness![b.point_name(p)],
                format!("{} is not a loop at ε(p)", g.arrow_name(v)),
            );
            continue;
        }
        for &x in b.acting_arrows(p) {
            let Some(px) = b.act(p, x) else { continue };
            let expected = g.compose(g.inverse(x), v).and_then(|y| g.compose(y, x));
            if expected != Some(gt.values[px.index()]) {
                r.push(
                    "gauge.equivariance",
                    witness![b.point_name(p), g.arrow_name(x)],
                    "G(p·g) differs from g⁻¹·G(p)·g",
                );
            }
        }
    }
    Ok(r)
}

/// `K_G(p, q) = φ(p, q)⁻¹ · G(p)`.
pub fn gauge_to_ggt(b: &Arc<PrincipalBundle>, gt: &GaugeTransformation) -> Result<Ggt> {
    let g = b.groupoid().clone();
    Ggt::from_fn(b.clone(), b.clone(), |p, q| {
        let phi = b.division(p, q)?;
        g.compose(g.inverse(phi), gt.values[p.index()])
            .ok_or_else(|| Error::Integrity("φ(p,q)⁻¹·G(p) is not composable".into()))
    })
}

/// Restriction of a GGT on `P ⊙ P` to the diagonal.
pub fn ggt_to_gauge(k: &Ggt) -> Result<GaugeTransformation> {
    if !same_bundle(&k.source, &k.target) {
        return Err(Error::Mismatch("diagonal restriction needs a GGT from a bundle to itself".into()));
    }
    Ok(GaugeTransformation {
        values: k.source.point_ids().map(|p| k.value(p, p)).collect(),
    })
}

/// A finite group given by its elements (pointwise maps `P → arrows`) and
/// multiplication table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupPresentation {
    pub elements: Vec<Vec<ArrowId>>,
    /// `product[a][b]` is the index of `a·b`.
    pub product: Vec<Vec<usize>>,
    pub unit: usize,
    pub inverse: Vec<usize>,
}

impl GroupPresentation {
    /// Closes `elements` under the pointwise product of `g`, failing if the
    /// set is not a group under it.
    pub fn pointwise(g: &FiniteGroupoid, elements: Vec<Vec<ArrowId>>, unit: Vec<ArrowId>) -> Result<Self> {
        let index: HashMap<&[ArrowId], usize> = elements.iter().enumerate().map(|(i, e)| (e.as_slice(), i)).collect();
        let find = |v: &[ArrowId]| {
            index
                .get(v)
                .copied()
                .ok_or_else(|| Error::Integrity("gauge group is not closed under the pointwise product".into()))
        };
        let mul = |a: &[ArrowId], b: &[ArrowId]| -> Result<Vec<ArrowId>> {
            a.iter()
                .zip(b)
                .map(|(&x, &y)| g.compose(x, y).ok_or_else(|| Error::Integrity("pointwise product undefined".into())))
                .collect()
        };
        let mut product = Vec::with_capacity(elements.len());
        for a in &elements {
            let row = elements
                .iter()
                .map(|b| find(&mul(a, b)?))
                .collect::<Result<Vec<_>>>()?;
            product.push(row);
        }
        let unit = find(&unit)?;
        let inverse = elements
            .iter()
            .map(|a| find(&a.iter().map(|&x| g.inverse(x)).collect::<Vec<_>>()))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupPresentation {
            elements,
            product,
            unit,
            inverse,
        })
    }

    /// The multiplication table of a one-object groupoid.
    pub fn of_group(g: &FiniteGroupoid) -> Result<Self> {
        if g.object_count() != 1 {
            return Err(Error::InvalidInput("expected a one-object groupoid".into()));
        }
        let elements: Vec<Vec<ArrowId>> = g.arrow_ids().map(|a| vec![a]).collect();
        Self::pointwise(g, elements, vec![g.unit(ObjectId(0))])
    }

    pub fn order(&self) -> usize {
        self.elements.len()
    }

    /// Exports as a one-object groupoid with arrows `g0`, `g1`, ….
    pub fn to_groupoid(&self) -> Result<FiniteGroupoid> {
        let names: Vec<String> = (0..self.order()).map(|i| format!("g{i}")).collect();
        crate::builders::fixtures::make_group_groupoid(&names, &self.product)
    }

    /// An isomorphism `self → other` as an index map, if one exists.
    pub fn find_isomorphism(&self, other: &GroupPresentation) -> Option<Vec<usize>> {
        let n = self.order();
        if n != other.order() {
            return None;
        }
        let mut map = vec![usize::MAX; n];
        let mut used = vec![false; n];
        map[self.unit] = other.unit;
        used[other.unit] = true;
        fn extend(a: &GroupPresentation, b: &GroupPresentation, map: &mut [usize], used: &mut [bool], next: usize) -> bool {
            let n = a.order();
            let Some(x) = (next..n).find(|&x| map[x] == usize::MAX) else {
                return true;
            };
            for y in 0..n {
                if used[y] {
                    continue;
                }
                map[x] = y;
                used[y] = true;
                let consistent = (0..n).filter(|&u| map[u] != usize::MAX).all(|u| {
                    [(u, x), (x, u)].into_iter().all(|(s, t)| {
                        let st = a.product[s][t];
                        map[st] == usize::MAX || map[st] == b.product[map[s]][map[t]]
                    })
                });
                if consistent && extend(a, b, map, used, x + 1) {
                    return true;
                }
                map[x] = usize::MAX;
                used[y] = false;
            }
            false
        }
        extend(self, other, &mut map, &mut used, 0).then_some(map)
    }
}

/// All maps `G: P → arrows` with loop values and `G(p·g) = g⁻¹·G(p)·g`,
/// enumerated from one base point per fibre.
pub(crate) fn enumerate_gauge_maps(b: &PrincipalBundle) -> Result<Vec<Vec<ArrowId>>> {
    let g = &**b.groupoid();
    let mut per_fibre: Vec<Vec<Vec<(PointId, ArrowId)>>> = Vec::new();
    for m in b.base_ids() {
        let p0 = *b
            .fiber(m)
            .first()
            .ok_or_else(|| Error::InvalidInput(format!("empty fibre over {}", b.base_name(m))))?;
        let x = b.momentum(p0);
        let mut options = Vec::new();
        for c in g.hom(x, x) {
            let mut assignment = Vec::new();
            for &a in b.acting_arrows(p0) {
                let q = b.act(p0, a).ok_or_else(|| Error::Integrity("bundle action undefined".into()))?;
                assignment.push((q, g.mul3(g.inverse(a), c, a)));
            }
            options.push(assignment);
        }
        per_fibre.push(options);
    }
    let mut out = vec![vec![None; b.point_count()]];
    for options in per_fibre {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for partial in &out {
            'option: for opt in &options {
                let mut v: Vec<Option<ArrowId>> = partial.clone();
                for &(q, a) in opt {
                    match v[q.index()] {
                        Some(prev) if prev != a => continue 'option,
                        _ => v[q.index()] = Some(a),
                    }
                }
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter()
        .map(|v| {
            v.into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| Error::Integrity("fibre not covered by the action".into()))
        })
        .collect()
}

/// The gauge group of a bundle: all gauge transformations with the pointwise
/// product and unit `p ↦ 1_{ε(p)}`.
pub fn gauge_group(b: &PrincipalBundle) -> Result<GroupPresentation> {
    let g = &**b.groupoid();
    let mut elements = Vec::new();
    for values in enumerate_gauge_maps(b)? {
        let gt = GaugeTransformation { values };
        if validate_gauge_transformation(b, &gt)?.is_ok() {
            elements.push(gt.values);
        }
    }
    let unit = b.point_ids().map(|p| g.unit(b.momentum(p))).collect();
    GroupPresentation::pointwise(g, elements, unit)
}

/// Checks `φ_{P2}(σ(p), σ(q)) = φ_{P1}(p, q)` on every fibred pair of `P1`
/// (rule `division-invariance`).
pub fn check_division_invariance(s: &BundleMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("division invariance");
    let (b1, b2) = (&*s.source, &*s.target);
    let g = b1.groupoid();
    for (p, q) in b1.fibred_pairs() {
        let w = witness![b1.point_name(p), b1.point_name(q)];
        let lhs = b2.division(s.apply(p), s.apply(q));
        let rhs = b1.division(p, q);
        match (lhs, rhs) {
            (Ok(a), Ok(b)) if a == b => {}
            (Ok(a), Ok(b)) => r.push(
                "division-invariance",
                w,
                format!("φ2(σp,σq) = {} but φ1(p,q) = {}", g.arrow_name(a), g.arrow_name(b)),
            ),
            (Err(e), _) | (_, Err(e)) => r.push("division-invariance", w, e.to_string()),
        }
    }
    r
}

/// One arrow of a gauge groupoid: a GGT between two of its bundles.
#[derive(Debug, Clone)]
pub struct GaugeArrow {
    pub source: usize,
    pub target: usize,
    pub ggt: Ggt,
}

/// The groupoid whose objects are bundles and whose arrows are the GGTs
/// between them, with ⋆ as composition.
#[derive(Debug, Clone)]
pub struct GaugeGroupoid {
    pub names: Vec<String>,
    pub bundles: Vec<Arc<PrincipalBundle>>,
    pub arrows: Vec<GaugeArrow>,
    index: HashMap<(usize, usize, Vec<Option<ArrowId>>), usize>,
}

impl GaugeGroupoid {
    /// Collects every GGT between the listed bundles that `keep` accepts.
    pub fn build(
        bundles: Vec<(String, Arc<PrincipalBundle>)>,
        bounds: &OracleBounds,
        keep: impl Fn(usize, usize, &Ggt) -> bool,
    ) -> Result<Self> {
        if bundles.is_empty() {
            return Err(Error::InvalidInput("a gauge groupoid needs at least one bundle".into()));
        }
        for (_, b) in &bundles[1..] {
            check_same_base_and_groupoid(&bundles[0].1, b)?;
        }
        Labels::new("bundle", bundles.iter().map(|(n, _)| n.clone()))?;
        let (names, bundles): (Vec<_>, Vec<_>) = bundles.into_iter().unzip();
        let mut arrows = Vec::new();
        let mut index = HashMap::new();
        for i in 0..bundles.len() {
            for j in 0..bundles.len() {
                for ggt in enumerate_ggts(&bundles[i], &bundles[j], bounds)? {
                    if keep(i, j, &ggt) {
                        index.insert((i, j, ggt.values.clone()), arrows.len());
                        arrows.push(GaugeArrow {
                            source: i,
                            target: j,
                            ggt,
                        });
                    }
                }
            }
        }
        Ok(GaugeGroupoid {
            names,
            bundles,
            arrows,
            index,
        })
    }

    /// Index of the interned arrow with this content, if any.
    pub fn lookup(&self, source: usize, target: usize, k: &Ggt) -> Option<usize> {
        self.index.get(&(source, target, k.values.clone())).copied()
    }

    pub fn arrow_name(&self, i: usize) -> String {
        let a = &self.arrows[i];
        let nth = self.arrows[..i]
            .iter()
            .filter(|b| b.source == a.source && b.target == a.target)
            .count();
        format!("{}->{}#{}", self.names[a.source], self.names[a.target], nth)
    }

    /// Exports as a finite groupoid: `s(K) = P1`, `t(K) = P2`, unit
    /// `identity_ggt`, inverse `invert_ggt`, composition `⋆`.
    ///
    /// Fails if ⋆, the unit or the inverse leave the interned arrow set.
    pub fn export(&self) -> Result<FiniteGroupoid> {
        let n = self.arrows.len();
        let missing = |what: &str| Error::Integrity(format!("{what} is not among the gauge groupoid arrows"));
        let mut unit = Vec::with_capacity(self.bundles.len());
        for (i, b) in self.bundles.iter().enumerate() {
            let id = identity_ggt(b)?;
            unit.push(ArrowId::from(self.lookup(i, i, &id).ok_or_else(|| missing("identity_ggt"))?));
        }
        let mut inverse = Vec::with_capacity(n);
        for a in &self.arrows {
            let inv = invert_ggt(&a.ggt);
            inverse.push(ArrowId::from(
                self.lookup(a.target, a.source, &inv).ok_or_else(|| missing("invert_ggt"))?,
            ));
        }
        let mut compose = vec![None; n * n];
        for (i, later) in self.arrows.iter().enumerate() {
            for (j, first) in self.arrows.iter().enumerate() {
                if later.source != first.target {
                    continue;
                }
                let k = star(&later.ggt, &first.ggt)?;
                let c = self.lookup(first.source, later.target, &k).ok_or_else(|| missing("⋆ product"))?;
                compose[i * n + j] = Some(ArrowId::from(c));
            }
        }
        Ok(FiniteGroupoid::from_parts(
            Labels::new("object", self.names.iter().cloned())?,
            Labels::from_distinct((0..n).map(|i| self.arrow_name(i))),
            self.arrows.iter().map(|a| ObjectId::from(a.source)).collect(),
            self.arrows.iter().map(|a| ObjectId::from(a.target)).collect(),
            unit,
            inverse,
            compose,
        ))
    }

    /// The diagonal restrictions of the loops at bundle `i`, in arrow order.
    pub fn isotropy_elements(&self, i: usize) -> Result<Vec<Vec<ArrowId>>> {
        self.arrows
            .iter()
            .filter(|a| a.source == i && a.target == i)
            .map(|a| ggt_to_gauge(&a.ggt).map(|g| g.values))
            .collect()
    }
}

/// The gauge groupoid of a family of bundles over one base and groupoid.
pub fn build_gauge_groupoid(bundles: Vec<(String, Arc<PrincipalBundle>)>, bounds: &OracleBounds) -> Result<GaugeGroupoid> {
    GaugeGroupoid::build(bundles, bounds, |_, _, _| true)
}
