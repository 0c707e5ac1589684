//! Finite groupoids as explicit structure tables.
//!
//! Composition follows the convention `g1 · g2` = "g1 after g2": it is defined
//! exactly when `source(g1) == target(g2)`, and then
//! `source(g1·g2) = source(g2)`, `target(g1·g2) = target(g1)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ids::{pair_label, total_map, ArrowId, Labels, ObjectId};
use crate::report::ValidationReport;
use crate::witness;

/// Raw, serializable structure tables of a groupoid.
///
/// Maps are entry lists; `compose` lists `[g1, g2, g1·g2]` triples.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GroupoidTables {
    pub objects: Vec<String>,
    pub arrows: Vec<String>,
    pub source: Vec<(String, String)>,
    pub target: Vec<(String, String)>,
    pub unit: Vec<(String, String)>,
    pub inverse: Vec<(String, String)>,
    pub compose: Vec<(String, String, String)>,
}

impl GroupoidTables {
    /// Sorts every id list and entry list.
    pub fn canonical(mut self) -> Self {
        self.objects.sort();
        self.arrows.sort();
        self.source.sort();
        self.target.sort();
        self.unit.sort();
        self.inverse.sort();
        self.compose.sort();
        self
    }
}

/// A finite groupoid. Immutable after construction.
///
/// Construction only checks that the tables are well formed (known ids, total
/// maps, no duplicate entries); the groupoid axioms are checked by
/// [`validate_groupoid`]. Operations documented as requiring a valid groupoid
/// may panic on invalid input.
#[derive(Debug, Clone)]
pub struct FiniteGroupoid {
    objects: Labels,
    arrows: Labels,
    source: Vec<ObjectId>,
    target: Vec<ObjectId>,
    unit: Vec<ArrowId>,
    inverse: Vec<ArrowId>,
    compose: Vec<Option<ArrowId>>,
    by_source: Vec<Vec<ArrowId>>,
    by_target: Vec<Vec<ArrowId>>,
}

impl FiniteGroupoid {
    /// Assembles a groupoid from indexed parts. `compose` is row-major over
    /// `(g1, g2)`.
    pub(crate) fn from_parts(
        objects: Labels,
        arrows: Labels,
        source: Vec<ObjectId>,
        target: Vec<ObjectId>,
        unit: Vec<ArrowId>,
        inverse: Vec<ArrowId>,
        compose: Vec<Option<ArrowId>>,
    ) -> Self {
        let n = arrows.len();
        debug_assert_eq!(compose.len(), n * n);
        let mut by_source = vec![Vec::new(); objects.len()];
        let mut by_target = vec![Vec::new(); objects.len()];
        for g in 0..n {
            by_source[source[g].index()].push(ArrowId::from(g));
            by_target[target[g].index()].push(ArrowId::from(g));
        }
        FiniteGroupoid {
            objects,
            arrows,
            source,
            target,
            unit,
            inverse,
            compose,
            by_source,
            by_target,
        }
    }

    /// Indexes raw tables. Fails on dangling ids, duplicate or missing entries
    /// of total maps, and duplicate composition entries.
    pub fn from_tables(t: &GroupoidTables) -> Result<Self> {
        let objects = Labels::new("object", t.objects.iter().cloned())?;
        let arrows = Labels::new("arrow", t.arrows.iter().cloned())?;
        let obj = |v: Vec<u32>| v.into_iter().map(ObjectId).collect::<Vec<_>>();
        let arr = |v: Vec<u32>| v.into_iter().map(ArrowId).collect::<Vec<_>>();
        let source = obj(total_map("source", &arrows, "arrow", &objects, "object", &t.source)?);
        let target = obj(total_map("target", &arrows, "arrow", &objects, "object", &t.target)?);
        let unit = arr(total_map("unit", &objects, "object", &arrows, "arrow", &t.unit)?);
        let inverse = arr(total_map("inverse", &arrows, "arrow", &arrows, "arrow", &t.inverse)?);
        let n = arrows.len();
        let mut compose = vec![None; n * n];
        for (a, b, c) in &t.compose {
            let ai = arrows.lookup("arrow", a, "compose")?;
            let bi = arrows.lookup("arrow", b, "compose")?;
            let ci = arrows.lookup("arrow", c, "compose")?;
            let slot = &mut compose[ai * n + bi];
            if slot.is_some() {
                return Err(Error::DuplicateEntry {
                    map: "compose".into(),
                    key: format!("({a},{b})"),
                });
            }
            *slot = Some(ArrowId::from(ci));
        }
        Ok(Self::from_parts(
            objects, arrows, source, target, unit, inverse, compose,
        ))
    }

    /// Indexes and validates; fails with the full report if any axiom fails.
    pub fn validated(t: &GroupoidTables) -> Result<Self> {
        let g = Self::from_tables(t)?;
        validate_groupoid(&g).into_result()?;
        Ok(g)
    }

    pub fn to_tables(&self) -> GroupoidTables {
        let a = |g: ArrowId| self.arrow_name(g).to_string();
        let o = |x: ObjectId| self.object_name(x).to_string();
        let mut compose = Vec::new();
        for g1 in self.arrow_ids() {
            for g2 in self.arrow_ids() {
                if let Some(g3) = self.compose(g1, g2) {
                    compose.push((a(g1), a(g2), a(g3)));
                }
            }
        }
        GroupoidTables {
            objects: self.objects.names().to_vec(),
            arrows: self.arrows.names().to_vec(),
            source: self.arrow_ids().map(|g| (a(g), o(self.source(g)))).collect(),
            target: self.arrow_ids().map(|g| (a(g), o(self.target(g)))).collect(),
            unit: self.object_ids().map(|x| (o(x), a(self.unit(x)))).collect(),
            inverse: self.arrow_ids().map(|g| (a(g), a(self.inverse(g)))).collect(),
            compose,
        }
    }

    pub fn object_count(&self) -> usize {
        self.objects.len()
    }

    pub fn arrow_count(&self) -> usize {
        self.arrows.len()
    }

    pub fn object_labels(&self) -> &Labels {
        &self.objects
    }

    pub fn arrow_labels(&self) -> &Labels {
        &self.arrows
    }

    pub fn object_ids(&self) -> impl Iterator<Item = ObjectId> + Clone {
        (0..self.objects.len()).map(ObjectId::from)
    }

    pub fn arrow_ids(&self) -> impl Iterator<Item = ArrowId> + Clone {
        (0..self.arrows.len()).map(ArrowId::from)
    }

    pub fn object_name(&self, x: ObjectId) -> &str {
        self.objects.name(x.index())
    }

    pub fn arrow_name(&self, g: ArrowId) -> &str {
        self.arrows.name(g.index())
    }

    pub fn object(&self, name: &str) -> Result<ObjectId> {
        self.objects
            .lookup("object", name, "groupoid")
            .map(ObjectId::from)
    }

    pub fn arrow(&self, name: &str) -> Result<ArrowId> {
        self.arrows.lookup("arrow", name, "groupoid").map(ArrowId::from)
    }

    #[inline]
    pub fn source(&self, g: ArrowId) -> ObjectId {
        self.source[g.index()]
    }

    #[inline]
    pub fn target(&self, g: ArrowId) -> ObjectId {
        self.target[g.index()]
    }

    #[inline]
    pub fn unit(&self, x: ObjectId) -> ArrowId {
        self.unit[x.index()]
    }

    #[inline]
    pub fn inverse(&self, g: ArrowId) -> ArrowId {
        self.inverse[g.index()]
    }

    /// The composition table entry for `(g1, g2)`, if any.
    #[inline]
    pub fn compose(&self, g1: ArrowId, g2: ArrowId) -> Option<ArrowId> {
        self.compose[g1.index() * self.arrows.len() + g2.index()]
    }

    /// `g1 · g2` for a composable pair of a valid groupoid.
    ///
    /// Panics if the pair has no composition entry.
    #[inline]
    pub fn mul(&self, g1: ArrowId, g2: ArrowId) -> ArrowId {
        self.compose(g1, g2).unwrap_or_else(|| {
            panic!(
                "arrows {} and {} are not composable",
                self.arrow_name(g1),
                self.arrow_name(g2)
            )
        })
    }

    /// `g1 · g2 · g3`.
    #[inline]
    pub fn mul3(&self, g1: ArrowId, g2: ArrowId, g3: ArrowId) -> ArrowId {
        self.mul(self.mul(g1, g2), g3)
    }

    #[inline]
    pub fn composable(&self, g1: ArrowId, g2: ArrowId) -> bool {
        self.source(g1) == self.target(g2)
    }

    /// Arrows with the given source.
    pub fn arrows_from(&self, x: ObjectId) -> &[ArrowId] {
        &self.by_source[x.index()]
    }

    /// Arrows with the given target.
    pub fn arrows_into(&self, x: ObjectId) -> &[ArrowId] {
        &self.by_target[x.index()]
    }

    /// Arrows from `x` to `y`.
    pub fn hom(&self, x: ObjectId, y: ObjectId) -> impl Iterator<Item = ArrowId> + '_ {
        self.by_source[x.index()]
            .iter()
            .copied()
            .filter(move |&g| self.target(g) == y)
    }

    /// Structural equality up to the order in which ids are listed.
    pub fn same_structure(&self, other: &FiniteGroupoid) -> bool {
        if self.objects == other.objects && self.arrows == other.arrows {
            return self.source == other.source
                && self.target == other.target
                && self.unit == other.unit
                && self.inverse == other.inverse
                && self.compose == other.compose;
        }
        if !self.objects.same_set(&other.objects) || !self.arrows.same_set(&other.arrows) {
            return false;
        }
        self.to_tables().canonical() == other.to_tables().canonical()
    }
}

/// True if both handles denote the same groupoid.
pub fn same_groupoid(a: &Arc<FiniteGroupoid>, b: &Arc<FiniteGroupoid>) -> bool {
    Arc::ptr_eq(a, b) || a.same_structure(b)
}

/// Checks every groupoid axiom exhaustively and lists all violations.
///
/// Rules: `groupoid.composition-domain` (entries exist exactly on composable
/// pairs), `groupoid.composition-endpoints`, `groupoid.unit-endpoints`,
/// `groupoid.left-unit`, `groupoid.right-unit`, `groupoid.inverse-endpoints`,
/// `groupoid.inverse-target`, `groupoid.inverse-source`,
/// `groupoid.associativity`. Derived checks (`groupoid.involutive-inverse`,
/// `groupoid.target-surjective`) run only when the axioms hold.
pub fn validate_groupoid(g: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new("groupoid");
    let an = |a: ArrowId| g.arrow_name(a);
    let on = |x: ObjectId| g.object_name(x);

    for g1 in g.arrow_ids() {
        for g2 in g.arrow_ids() {
            match (g.composable(g1, g2), g.compose(g1, g2)) {
                (true, None) => r.push(
                    "groupoid.composition-domain",
                    witness![an(g1), an(g2)],
                    "composable pair has no composition entry",
                ),
                (false, Some(_)) => r.push(
                    "groupoid.composition-domain",
                    witness![an(g1), an(g2)],
                    "composition entry for a non-composable pair",
                ),
                (true, Some(g3)) => {
                    if g.source(g3) != g.source(g2) || g.target(g3) != g.target(g1) {
                        r.push(
                            "groupoid.composition-endpoints",
                            witness![an(g1), an(g2)],
                            format!(
                                "{} has endpoints {}->{}, expected {}->{}",
                                an(g3),
                                on(g.source(g3)),
                                on(g.target(g3)),
                                on(g.source(g2)),
                                on(g.target(g1))
                            ),
                        );
                    }
                }
                (false, None) => {}
            }
        }
    }

    for x in g.object_ids() {
        let e = g.unit(x);
        if g.source(e) != x || g.target(e) != x {
            r.push(
                "groupoid.unit-endpoints",
                witness![on(x)],
                format!("unit {} is not a loop at {}", an(e), on(x)),
            );
        }
    }

    for a in g.arrow_ids() {
        let lu = g.unit(g.target(a));
        if g.compose(lu, a).is_some_and(|c| c != a) {
            r.push(
                "groupoid.left-unit",
                witness![an(a)],
                format!("{} · {} != {}", an(lu), an(a), an(a)),
            );
        }
        let ru = g.unit(g.source(a));
        if g.compose(a, ru).is_some_and(|c| c != a) {
            r.push(
                "groupoid.right-unit",
                witness![an(a)],
                format!("{} · {} != {}", an(a), an(ru), an(a)),
            );
        }
        let inv = g.inverse(a);
        if g.source(inv) != g.target(a) || g.target(inv) != g.source(a) {
            r.push(
                "groupoid.inverse-endpoints",
                witness![an(a)],
                format!("inverse {} has the wrong endpoints", an(inv)),
            );
        }
        if g.compose(a, inv).is_some_and(|c| c != g.unit(g.target(a))) {
            r.push(
                "groupoid.inverse-target",
                witness![an(a)],
                format!("{} · {} is not the unit at the target", an(a), an(inv)),
            );
        }
        if g.compose(inv, a).is_some_and(|c| c != g.unit(g.source(a))) {
            r.push(
                "groupoid.inverse-source",
                witness![an(a)],
                format!("{} · {} is not the unit at the source", an(inv), an(a)),
            );
        }
    }

    for g2 in g.arrow_ids() {
        for &g1 in g.arrows_from(g.target(g2)) {
            let Some(g12) = g.compose(g1, g2) else { continue };
            for &g3 in g.arrows_into(g.source(g2)) {
                let Some(g23) = g.compose(g2, g3) else { continue };
                let (Some(lhs), Some(rhs)) = (g.compose(g12, g3), g.compose(g1, g23)) else {
                    continue;
                };
                if lhs != rhs {
                    r.push(
                        "groupoid.associativity",
                        witness![an(g1), an(g2), an(g3)],
                        format!("(g1·g2)·g3 = {} but g1·(g2·g3) = {}", an(lhs), an(rhs)),
                    );
                }
            }
        }
    }

    if r.violations.is_empty() {
        for a in g.arrow_ids() {
            if g.inverse(g.inverse(a)) != a {
                r.push_derived(
                    "groupoid.involutive-inverse",
                    witness![an(a)],
                    "inverse is not an involution",
                );
            }
        }
        for x in g.object_ids() {
            if g.arrows_into(x).is_empty() {
                r.push_derived(
                    "groupoid.target-surjective",
                    witness![on(x)],
                    "no arrow has this target",
                );
            }
        }
    }
    r
}

/// Indexes raw tables and validates them. Malformed tables are an error, not a violation.
pub fn validate_groupoid_tables(t: &GroupoidTables) -> Result<ValidationReport> {
    Ok(validate_groupoid(&FiniteGroupoid::from_tables(t)?))
}

/// The isotropy group at `x`: the one-object groupoid of loops at `x`.
pub fn isotropy_group(g: &FiniteGroupoid, x: ObjectId) -> Result<FiniteGroupoid> {
    if x.index() >= g.object_count() {
        return Err(Error::UnknownId {
            kind: "object".into(),
            id: x.to_string(),
            context: "isotropy_group".into(),
        });
    }
    let loops: Vec<ArrowId> = g.hom(x, x).collect();
    let mut pos = vec![None; g.arrow_count()];
    for (i, &a) in loops.iter().enumerate() {
        pos[a.index()] = Some(ArrowId::from(i));
    }
    let n = loops.len();
    let mut compose = vec![None; n * n];
    for (i, &a) in loops.iter().enumerate() {
        for (j, &b) in loops.iter().enumerate() {
            compose[i * n + j] = g.compose(a, b).and_then(|c| pos[c.index()]);
        }
    }
    let here = |a: ArrowId| pos[a.index()].expect("isotropy arrow");
    Ok(FiniteGroupoid::from_parts(
        Labels::from_distinct([g.object_name(x)]),
        Labels::from_distinct(loops.iter().map(|&a| g.arrow_name(a))),
        vec![ObjectId(0); n],
        vec![ObjectId(0); n],
        vec![here(g.unit(x))],
        loops.iter().map(|&a| here(g.inverse(a))).collect(),
        compose,
    ))
}

/// Index arithmetic for a product groupoid built by [`product_groupoid`].
///
/// Arrow `(g, h)` has index `g * |arrows(H)| + h`; objects likewise.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ProductIndex {
    pub left_arrows: usize,
    pub right_arrows: usize,
    pub left_objects: usize,
    pub right_objects: usize,
}

impl ProductIndex {
    pub fn of(g: &FiniteGroupoid, h: &FiniteGroupoid) -> Self {
        ProductIndex {
            left_arrows: g.arrow_count(),
            right_arrows: h.arrow_count(),
            left_objects: g.object_count(),
            right_objects: h.object_count(),
        }
    }

    #[inline]
    pub fn arrow(&self, g: ArrowId, h: ArrowId) -> ArrowId {
        ArrowId::from(g.index() * self.right_arrows + h.index())
    }

    #[inline]
    pub fn split_arrow(&self, a: ArrowId) -> (ArrowId, ArrowId) {
        (
            ArrowId::from(a.index() / self.right_arrows),
            ArrowId::from(a.index() % self.right_arrows),
        )
    }

    #[inline]
    pub fn object(&self, x: ObjectId, y: ObjectId) -> ObjectId {
        ObjectId::from(x.index() * self.right_objects + y.index())
    }

    #[inline]
    pub fn split_object(&self, o: ObjectId) -> (ObjectId, ObjectId) {
        (
            ObjectId::from(o.index() / self.right_objects),
            ObjectId::from(o.index() % self.right_objects),
        )
    }
}

/// The product groupoid `G × H` with componentwise structure.
///
/// Arrow and object ids are `(left,right)` pairs; see [`ProductIndex`] for the
/// index layout.
pub fn product_groupoid(g: &FiniteGroupoid, h: &FiniteGroupoid) -> FiniteGroupoid {
    let ix = ProductIndex::of(g, h);
    let mut objects = Vec::with_capacity(g.object_count() * h.object_count());
    for x in g.object_ids() {
        for y in h.object_ids() {
            objects.push(pair_label(g.object_name(x), h.object_name(y)));
        }
    }
    let n = g.arrow_count() * h.arrow_count();
    let mut arrows = Vec::with_capacity(n);
    let mut source = Vec::with_capacity(n);
    let mut target = Vec::with_capacity(n);
    let mut inverse = Vec::with_capacity(n);
    for a in g.arrow_ids() {
        for b in h.arrow_ids() {
            arrows.push(pair_label(g.arrow_name(a), h.arrow_name(b)));
            source.push(ix.object(g.source(a), h.source(b)));
            target.push(ix.object(g.target(a), h.target(b)));
            inverse.push(ix.arrow(g.inverse(a), h.inverse(b)));
        }
    }
    let unit = g
        .object_ids()
        .flat_map(|x| h.object_ids().map(move |y| (x, y)))
        .map(|(x, y)| ix.arrow(g.unit(x), h.unit(y)))
        .collect();
    let mut compose = vec![None; n * n];
    for a1 in g.arrow_ids() {
        for a2 in g.arrow_ids() {
            let Some(a3) = g.compose(a1, a2) else { continue };
            for b1 in h.arrow_ids() {
                for b2 in h.arrow_ids() {
                    if let Some(b3) = h.compose(b1, b2) {
                        let i = ix.arrow(a1, b1).index();
                        let j = ix.arrow(a2, b2).index();
                        compose[i * n + j] = Some(ix.arrow(a3, b3));
                    }
                }
            }
        }
    }
    FiniteGroupoid::from_parts(
        Labels::from_distinct(objects),
        Labels::from_distinct(arrows),
        source,
        target,
        unit,
        inverse,
        compose,
    )
}
