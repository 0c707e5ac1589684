//! Principal bundles with a finite structure groupoid, and their division map.
//!
//! A bundle is a right action of `G` on a total set `P` with momentum `ε`,
//! together with a projection `π: P → M` onto a base. It is principal when
//! `π` is onto, invariant under the action, and `G` acts freely and
//! transitively on every fibre. The division map `φ(p, q)` is then the unique
//! arrow with `q = p · φ(p, q)`.

use std::sync::{Arc, OnceLock};

use serde::{Deserialize, Serialize};

use crate::action::{validate_action, GroupoidAction, Side};
use crate::error::{Error, Result};
use crate::groupoid::{product_groupoid, same_groupoid, FiniteGroupoid, ProductIndex};
use crate::ids::{pair_label, total_map, ArrowId, BaseId, Labels, ObjectId, PointId};
use crate::report::ValidationReport;
use crate::witness;

/// Raw bundle tables; `act` entries are `[p, g, p·g]`.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleTables {
    pub total: Vec<String>,
    pub base: Vec<String>,
    pub projection: Vec<(String, String)>,
    pub momentum: Vec<(String, String)>,
    pub act: Vec<(String, String, String)>,
}

impl BundleTables {
    pub fn canonical(mut self) -> Self {
        self.total.sort();
        self.base.sort();
        self.projection.sort();
        self.momentum.sort();
        self.act.sort();
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Division {
    Unique(ArrowId),
    Missing,
    Multiple,
}

/// A (candidate) principal bundle. Immutable after construction apart from
/// the lazily filled division table.
#[derive(Debug)]
pub struct PrincipalBundle {
    action: GroupoidAction,
    base: Labels,
    projection: Vec<BaseId>,
    fibers: Vec<Vec<PointId>>,
    division: OnceLock<Vec<Option<Division>>>,
}

impl Clone for PrincipalBundle {
    fn clone(&self) -> Self {
        PrincipalBundle {
            action: self.action.clone(),
            base: self.base.clone(),
            projection: self.projection.clone(),
            fibers: self.fibers.clone(),
            division: OnceLock::new(),
        }
    }
}

impl PrincipalBundle {
    /// Assembles a bundle from indexed parts; `act[p * arrows + g] = p·g`.
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        total: Labels,
        base: Labels,
        projection: Vec<BaseId>,
        momentum: Vec<ObjectId>,
        act: Vec<Option<PointId>>,
    ) -> Result<Self> {
        if projection.len() != total.len() {
            return Err(Error::NotTotal {
                map: "projection".into(),
                missing: format!("{} of {} points", projection.len(), total.len()),
            });
        }
        if projection.iter().any(|m| m.index() >= base.len()) {
            return Err(Error::InvalidInput("projection outside the base".into()));
        }
        let action = GroupoidAction::new(groupoid, Side::Right, total, momentum, act)?;
        let mut fibers = vec![Vec::new(); base.len()];
        for (p, m) in projection.iter().enumerate() {
            fibers[m.index()].push(PointId::from(p));
        }
        Ok(PrincipalBundle {
            action,
            base,
            projection,
            fibers,
            division: OnceLock::new(),
        })
    }

    pub fn from_tables(groupoid: Arc<FiniteGroupoid>, t: &BundleTables) -> Result<Self> {
        let total = Labels::new("point", t.total.iter().cloned())?;
        let base = Labels::new("base point", t.base.iter().cloned())?;
        let projection = total_map("projection", &total, "point", &base, "base point", &t.projection)?
            .into_iter()
            .map(BaseId)
            .collect();
        let momentum = total_map(
            "momentum",
            &total,
            "point",
            groupoid.object_labels(),
            "object",
            &t.momentum,
        )?
        .into_iter()
        .map(ObjectId)
        .collect();
        let n = groupoid.arrow_count();
        let mut act = vec![None; total.len() * n];
        for (p, g, q) in &t.act {
            let pi = total.lookup("point", p, "act")?;
            let gi = groupoid.arrow_labels().lookup("arrow", g, "act")?;
            let qi = total.lookup("point", q, "act")?;
            let slot = &mut act[pi * n + gi];
            if slot.is_some() {
                return Err(Error::DuplicateEntry {
                    map: "act".into(),
                    key: format!("({p},{g})"),
                });
            }
            *slot = Some(PointId::from(qi));
        }
        Self::new(groupoid, total, base, projection, momentum, act)
    }

    pub fn to_tables(&self) -> BundleTables {
        let a = self.action.to_tables();
        BundleTables {
            total: a.points,
            base: self.base.names().to_vec(),
            projection: self
                .point_ids()
                .map(|p| (self.point_name(p).to_string(), self.base_name(self.projection(p)).to_string()))
                .collect(),
            momentum: a.momentum,
            act: a.act,
        }
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        self.action.groupoid()
    }

    /// The underlying right action.
    pub fn action(&self) -> &GroupoidAction {
        &self.action
    }

    pub fn total(&self) -> &Labels {
        self.action.points()
    }

    pub fn base(&self) -> &Labels {
        &self.base
    }

    pub fn point_count(&self) -> usize {
        self.action.point_count()
    }

    pub fn point_ids(&self) -> impl Iterator<Item = PointId> + Clone {
        self.action.point_ids()
    }

    pub fn base_ids(&self) -> impl Iterator<Item = BaseId> + Clone {
        (0..self.base.len()).map(BaseId::from)
    }

    pub fn point_name(&self, p: PointId) -> &str {
        self.action.point_name(p)
    }

    pub fn base_name(&self, m: BaseId) -> &str {
        self.base.name(m.index())
    }

    pub fn point(&self, name: &str) -> Result<PointId> {
        self.action.point(name)
    }

    pub fn base_point(&self, name: &str) -> Result<BaseId> {
        self.base.lookup("base point", name, "bundle").map(BaseId::from)
    }

    #[inline]
    pub fn projection(&self, p: PointId) -> BaseId {
        self.projection[p.index()]
    }

    #[inline]
    pub fn momentum(&self, p: PointId) -> ObjectId {
        self.action.momentum(p)
    }

    /// `p · g`, if defined.
    #[inline]
    pub fn act(&self, p: PointId, g: ArrowId) -> Option<PointId> {
        self.action.apply(g, p)
    }

    /// `p · g` on a valid bundle; panics where the action is undefined.
    #[inline]
    pub fn mul(&self, p: PointId, g: ArrowId) -> PointId {
        self.act(p, g).unwrap_or_else(|| {
            panic!(
                "{} · {} is undefined",
                self.point_name(p),
                self.groupoid().arrow_name(g)
            )
        })
    }

    /// Arrows that can act on `p` (those with target `ε(p)`).
    pub fn acting_arrows(&self, p: PointId) -> &[ArrowId] {
        self.action.acting_arrows(p)
    }

    pub fn fiber(&self, m: BaseId) -> &[PointId] {
        &self.fibers[m.index()]
    }

    /// The fibre containing `p`.
    pub fn fiber_of(&self, p: PointId) -> &[PointId] {
        self.fiber(self.projection(p))
    }

    pub fn same_fiber(&self, p: PointId, q: PointId) -> bool {
        self.projection(p) == self.projection(q)
    }

    /// All pairs `(p, q)` with `π(p) = π(q)`, fibre by fibre.
    pub fn fibred_pairs(&self) -> impl Iterator<Item = (PointId, PointId)> + '_ {
        self.fibers
            .iter()
            .flat_map(|f| f.iter().flat_map(move |&p| f.iter().map(move |&q| (p, q))))
    }

    fn division_table(&self) -> &[Option<Division>] {
        self.division.get_or_init(|| {
            let n = self.point_count();
            let mut table = vec![None; n * n];
            for p in self.point_ids() {
                for &q in self.fiber_of(p) {
                    table[p.index() * n + q.index()] = Some(Division::Missing);
                }
                for &g in self.acting_arrows(p) {
                    let Some(q) = self.act(p, g) else { continue };
                    let Some(slot) = table[p.index() * n + q.index()].as_mut() else {
                        continue;
                    };
                    *slot = match *slot {
                        Division::Missing => Division::Unique(g),
                        _ => Division::Multiple,
                    };
                }
            }
            table
        })
    }

    /// The division map `φ(p, q)`: the unique `g` with `q = p · g`.
    pub fn division(&self, p: PointId, q: PointId) -> Result<ArrowId> {
        if !self.same_fiber(p, q) {
            return Err(Error::NotSameFiber {
                p: self.point_name(p).to_string(),
                q: self.point_name(q).to_string(),
            });
        }
        let fiber = self.base_name(self.projection(p));
        match self.division_table()[p.index() * self.point_count() + q.index()] {
            Some(Division::Unique(g)) => Ok(g),
            Some(Division::Missing) => Err(Error::Integrity(format!(
                "no arrow carries {} to {} in fibre {fiber}",
                self.point_name(p),
                self.point_name(q)
            ))),
            Some(Division::Multiple) => Err(Error::Integrity(format!(
                "several arrows carry {} to {} in fibre {fiber}",
                self.point_name(p),
                self.point_name(q)
            ))),
            None => unreachable!("same-fibre pairs are always tabulated"),
        }
    }

    /// `φ(p, q)` on a valid bundle; panics otherwise.
    #[inline]
    pub fn div(&self, p: PointId, q: PointId) -> ArrowId {
        self.division(p, q).unwrap_or_else(|e| panic!("{e}"))
    }

    /// Structural equality up to listing order.
    pub fn same_structure(&self, other: &PrincipalBundle) -> bool {
        same_groupoid(self.groupoid(), other.groupoid())
            && self.to_tables().canonical() == other.to_tables().canonical()
    }
}

/// The division map `φ_B(p, q)`.
pub fn division_map(b: &PrincipalBundle, p: PointId, q: PointId) -> Result<ArrowId> {
    b.division(p, q)
}

/// Checks that `b` is a principal bundle.
///
/// Besides the right-action rules (`action.*`), reports
/// `bundle.projection-surjective`, `bundle.projection-invariant`,
/// `bundle.bijection-undefined`, `bundle.free` and `bundle.transitive`; the
/// last three name the fibre as the first witness element.
pub fn validate_bundle(b: &PrincipalBundle) -> ValidationReport {
    let mut r = ValidationReport::new("principal bundle");
    let g = &**b.groupoid();
    let mut action_report = validate_action(b.action());
    r.violations.append(&mut action_report.violations);

    for m in b.base_ids() {
        if b.fiber(m).is_empty() {
            r.push(
                "bundle.projection-surjective",
                witness![b.base_name(m)],
                "empty fibre",
            );
        }
    }
    for p in b.point_ids() {
        for &x in b.acting_arrows(p) {
            if let Some(q) = b.act(p, x) {
                if !b.same_fiber(p, q) {
                    r.push(
                        "bundle.projection-invariant",
                        witness![b.point_name(p), g.arrow_name(x)],
                        format!("p·g = {} leaves the fibre", b.point_name(q)),
                    );
                }
            }
        }
    }
    // (p, g) ↦ (p, p·g) must be a bijection onto the fibred pairs.
    for m in b.base_ids() {
        let fname = b.base_name(m);
        for &p in b.fiber(m) {
            let mut hit: Vec<Option<ArrowId>> = vec![None; b.point_count()];
            for &x in b.acting_arrows(p) {
                match b.act(p, x) {
                    None => r.push(
                        "bundle.bijection-undefined",
                        witness![fname, b.point_name(p), g.arrow_name(x)],
                        format!("fibre {fname}: the action is undefined at this pair"),
                    ),
                    Some(q) if b.same_fiber(p, q) => {
                        if let Some(prev) = hit[q.index()] {
                            r.push(
                                "bundle.free",
                                witness![fname, b.point_name(p), g.arrow_name(prev), g.arrow_name(x)],
                                format!(
                                    "fibre {fname}: two arrows carry the point to {}",
                                    b.point_name(q)
                                ),
                            );
                        } else {
                            hit[q.index()] = Some(x);
                        }
                    }
                    Some(_) => {}
                }
            }
            for &q in b.fiber(m) {
                if hit[q.index()].is_none() {
                    r.push(
                        "bundle.transitive",
                        witness![fname, b.point_name(p), b.point_name(q)],
                        format!("fibre {fname}: no arrow carries p to q"),
                    );
                }
            }
        }
    }
    r
}

/// Checks the four division-map properties exhaustively, plus the defining
/// equation `p · φ(p, q) = q`.
///
/// Rules: `division.defined`, `division.defining-equation`,
/// `division.endpoints`, `division.diagonal`, `division.inverse`,
/// `division.equivariance` (`φ(p·g1, q·g2) = g1⁻¹ · φ(p, q) · g2`).
/// Safe to run on invalid bundles.
pub fn verify_division_properties(b: &PrincipalBundle) -> ValidationReport {
    let mut r = ValidationReport::new("division map");
    let g = &**b.groupoid();
    let pn = |p: PointId| b.point_name(p);
    let an = |a: ArrowId| g.arrow_name(a);
    for (p, q) in b.fibred_pairs() {
        let phi = match b.division(p, q) {
            Ok(phi) => phi,
            Err(e) => {
                r.push("division.defined", witness![pn(p), pn(q)], e.to_string());
                continue;
            }
        };
        if b.act(p, phi) != Some(q) {
            r.push(
                "division.defining-equation",
                witness![pn(p), pn(q)],
                "p · φ(p,q) != q",
            );
        }
        if g.target(phi) != b.momentum(p) || g.source(phi) != b.momentum(q) {
            r.push(
                "division.endpoints",
                witness![pn(p), pn(q)],
                format!("φ(p,q) = {} is not an arrow ε(q) → ε(p)", an(phi)),
            );
        }
        if p == q && phi != g.unit(b.momentum(p)) {
            r.push(
                "division.diagonal",
                witness![pn(p)],
                format!("φ(p,p) = {} is not a unit", an(phi)),
            );
        }
        if let Ok(back) = b.division(q, p) {
            if g.inverse(back) != phi {
                r.push(
                    "division.inverse",
                    witness![pn(p), pn(q)],
                    "φ(p,q) != φ(q,p)⁻¹",
                );
            }
        }
        for &g1 in b.acting_arrows(p) {
            let Some(pg) = b.act(p, g1) else { continue };
            let left = g.compose(g.inverse(g1), phi);
            for &g2 in b.acting_arrows(q) {
                let Some(qg) = b.act(q, g2) else { continue };
                let expected = left.and_then(|l| g.compose(l, g2));
                let actual = b.division(pg, qg).ok();
                if actual.is_none() || actual != expected {
                    r.push(
                        "division.equivariance",
                        witness![pn(p), pn(q), an(g1), an(g2)],
                        match actual {
                            Some(a) => format!("φ(p·g1, q·g2) = {} differs from g1⁻¹·φ(p,q)·g2", an(a)),
                            None => "φ(p·g1, q·g2) is undefined".to_string(),
                        },
                    );
                }
            }
        }
    }
    r
}

/// The unit bundle of `G`: `G` acting on its own arrows by right
/// multiplication, projected by the target map, with momentum the source map.
pub fn unit_bundle(g: Arc<FiniteGroupoid>) -> PrincipalBundle {
    let n = g.arrow_count();
    let mut act = vec![None; n * n];
    for h in g.arrow_ids() {
        for &x in g.arrows_into(g.source(h)) {
            act[h.index() * n + x.index()] = g.compose(h, x).map(|r| PointId(r.0));
        }
    }
    PrincipalBundle::new(
        g.clone(),
        g.arrow_labels().clone(),
        g.object_labels().clone(),
        g.arrow_ids().map(|h| BaseId(g.target(h).0)).collect(),
        g.arrow_ids().map(|h| g.source(h)).collect(),
        act,
    )
    .expect("unit bundle is well formed")
}

/// Pulls `b` back along `f: M → N` (`f[m]` is a base point of `b`).
///
/// The total space is `{(m, p) : f(m) = π(p)}`, listed by `m` then by `p`
/// within the fibre, with ids `(m,p)`.
pub fn pullback_bundle(b: &PrincipalBundle, base: Labels, f: &[BaseId]) -> Result<PrincipalBundle> {
    if f.len() != base.len() {
        return Err(Error::NotTotal {
            map: "pullback map".into(),
            missing: format!("{} of {} base points", f.len(), base.len()),
        });
    }
    if f.iter().any(|n| n.index() >= b.base().len()) {
        return Err(Error::InvalidInput("pullback map leaves the base".into()));
    }
    let mut pairs = Vec::new();
    let mut pos = vec![vec![None; b.point_count()]; base.len()];
    for (m, &n) in f.iter().enumerate() {
        for &p in b.fiber(n) {
            pos[m][p.index()] = Some(PointId::from(pairs.len()));
            pairs.push((m, p));
        }
    }
    let g = b.groupoid();
    let na = g.arrow_count();
    let mut act = vec![None; pairs.len() * na];
    for (i, &(m, p)) in pairs.iter().enumerate() {
        for &x in b.acting_arrows(p) {
            act[i * na + x.index()] = b.act(p, x).and_then(|q| pos[m][q.index()]);
        }
    }
    let total = Labels::new(
        "point",
        pairs.iter().map(|&(m, p)| pair_label(base.name(m), b.point_name(p))),
    )?;
    PrincipalBundle::new(
        g.clone(),
        total,
        base,
        pairs.iter().map(|&(m, _)| BaseId::from(m)).collect(),
        pairs.iter().map(|&(_, p)| b.momentum(p)).collect(),
        act,
    )
}

/// The trivial bundle `α*U_G` over `base`, with points `(m,g)` for `α(m) = t(g)`.
pub fn trivial_bundle(g: Arc<FiniteGroupoid>, base: Labels, alpha: &[ObjectId]) -> Result<PrincipalBundle> {
    let unit = unit_bundle(g);
    let f: Vec<BaseId> = alpha.iter().map(|x| BaseId(x.0)).collect();
    pullback_bundle(&unit, base, &f)
}

/// The restriction of `b` to the base points in `subset` (in the given order).
pub fn restrict_bundle(b: &PrincipalBundle, subset: &[BaseId]) -> Result<PrincipalBundle> {
    let mut points = Vec::new();
    let mut pos = vec![None; b.point_count()];
    for &m in subset {
        if m.index() >= b.base().len() {
            return Err(Error::InvalidInput("restriction leaves the base".into()));
        }
        for &p in b.fiber(m) {
            if pos[p.index()].is_some() {
                return Err(Error::InvalidInput("repeated base point in restriction".into()));
            }
            pos[p.index()] = Some(PointId::from(points.len()));
            points.push(p);
        }
    }
    let mut base_pos = vec![None; b.base().len()];
    for (i, &m) in subset.iter().enumerate() {
        base_pos[m.index()] = Some(BaseId::from(i));
    }
    let g = b.groupoid();
    let na = g.arrow_count();
    let mut act = vec![None; points.len() * na];
    for (i, &p) in points.iter().enumerate() {
        for &x in b.acting_arrows(p) {
            act[i * na + x.index()] = b.act(p, x).and_then(|q| pos[q.index()]);
        }
    }
    PrincipalBundle::new(
        g.clone(),
        Labels::from_distinct(points.iter().map(|&p| b.point_name(p))),
        Labels::from_distinct(subset.iter().map(|&m| b.base_name(m))),
        points
            .iter()
            .map(|&p| base_pos[b.projection(p).index()].expect("restricted"))
            .collect(),
        points.iter().map(|&p| b.momentum(p)).collect(),
        act,
    )
}

/// An isomorphism between the restriction of a bundle to `U` and a trivial
/// bundle over `U`, with both directions tabulated.
#[derive(Debug, Clone)]
pub struct BundleIso {
    pub restricted: PrincipalBundle,
    pub trivial: PrincipalBundle,
    /// `restricted → trivial`, `p ↦ (π(p), φ(σ(π(p)), p))`.
    pub forward: Vec<PointId>,
    /// `trivial → restricted`, `(m, g) ↦ σ(m) · g`.
    pub backward: Vec<PointId>,
}

/// Trivializes `b` over the base points of `section` using that section.
///
/// `section` lists `(m, σ(m))`; each `σ(m)` must lie over `m`. The returned
/// maps are checked to be mutually inverse, fibre-preserving and equivariant.
pub fn trivialize(b: &PrincipalBundle, section: &[(BaseId, PointId)]) -> Result<BundleIso> {
    for &(m, p) in section {
        if p.index() >= b.point_count() || b.projection(p) != m {
            return Err(Error::InvalidInput(format!(
                "not a section: σ({}) = {} does not lie over {}",
                b.base_name(m),
                b.total().names().get(p.index()).map_or("?", |s| s.as_str()),
                b.base_name(m)
            )));
        }
    }
    let subset: Vec<BaseId> = section.iter().map(|&(m, _)| m).collect();
    let restricted = restrict_bundle(b, &subset)?;
    let g = b.groupoid().clone();
    let alpha: Vec<ObjectId> = section.iter().map(|&(_, p)| b.momentum(p)).collect();
    let trivial = trivial_bundle(g.clone(), restricted.base().clone(), &alpha)?;

    // σ in the restricted bundle's indexing.
    let sigma: Vec<PointId> = section
        .iter()
        .map(|&(_, p)| restricted.point(b.point_name(p)))
        .collect::<Result<_>>()?;
    // Trivial bundle points are (m, g): locate them by (base index, arrow).
    let mut triv_index = vec![None; restricted.base().len() * g.arrow_count()];
    for u in restricted.base_ids() {
        let n = g.arrow_count();
        for &x in g.arrows_into(alpha[u.index()]) {
            let name = pair_label(restricted.base_name(u), g.arrow_name(x));
            triv_index[u.index() * n + x.index()] = Some(trivial.point(&name)?);
        }
    }

    let mut forward = Vec::with_capacity(restricted.point_count());
    for p in restricted.point_ids() {
        let m = restricted.projection(p);
        let phi = restricted.division(sigma[m.index()], p)?;
        let idx = triv_index[m.index() * g.arrow_count() + phi.index()]
            .ok_or_else(|| Error::Integrity("division value outside the trivial fibre".into()))?;
        forward.push(idx);
    }
    let mut backward = vec![PointId(0); trivial.point_count()];
    for u in restricted.base_ids() {
        for &x in g.arrows_into(alpha[u.index()]) {
            let t = triv_index[u.index() * g.arrow_count() + x.index()].expect("indexed");
            backward[t.index()] = restricted
                .act(sigma[u.index()], x)
                .ok_or_else(|| Error::Integrity("section point cannot be moved by g".into()))?;
        }
    }

    for p in restricted.point_ids() {
        if backward[forward[p.index()].index()] != p {
            return Err(Error::Integrity(format!(
                "trivialization does not round-trip at {}",
                restricted.point_name(p)
            )));
        }
        if trivial.projection(forward[p.index()]) != restricted.projection(p) {
            return Err(Error::Integrity("trivialization is not fibre-preserving".into()));
        }
        for &x in restricted.acting_arrows(p) {
            let lhs = restricted.act(p, x).map(|q| forward[q.index()]);
            let rhs = trivial.act(forward[p.index()], x);
            if lhs != rhs {
                return Err(Error::Integrity(format!(
                    "trivialization is not equivariant at ({},{})",
                    restricted.point_name(p),
                    g.arrow_name(x)
                )));
            }
        }
    }
    for t in trivial.point_ids() {
        if forward[backward[t.index()].index()] != t {
            return Err(Error::Integrity("trivialization does not round-trip".into()));
        }
    }
    Ok(BundleIso {
        restricted,
        trivial,
        forward,
        backward,
    })
}

/// A section over the whole base choosing the first point of every fibre.
pub fn first_point_section(b: &PrincipalBundle) -> Result<Vec<(BaseId, PointId)>> {
    b.base_ids()
        .map(|m| {
            b.fiber(m)
                .first()
                .map(|&p| (m, p))
                .ok_or_else(|| Error::InvalidInput(format!("empty fibre over {}", b.base_name(m))))
        })
        .collect()
}

/// The product bundle over `M1 × M2` with structure groupoid `G1 × G2`.
///
/// Point `(p1,p2)` has index `p1 * |P2| + p2`.
pub fn product_bundle(b1: &PrincipalBundle, b2: &PrincipalBundle) -> PrincipalBundle {
    let (g1, g2) = (b1.groupoid(), b2.groupoid());
    let gg = Arc::new(product_groupoid(g1, g2));
    let ix = ProductIndex::of(g1, g2);
    let n2 = b2.point_count();
    let nb2 = b2.base().len();
    let mut total = Vec::new();
    let mut projection = Vec::new();
    let mut momentum = Vec::new();
    for p1 in b1.point_ids() {
        for p2 in b2.point_ids() {
            total.push(pair_label(b1.point_name(p1), b2.point_name(p2)));
            projection.push(BaseId::from(b1.projection(p1).index() * nb2 + b2.projection(p2).index()));
            momentum.push(ix.object(b1.momentum(p1), b2.momentum(p2)));
        }
    }
    let na = gg.arrow_count();
    let mut act = vec![None; total.len() * na];
    for p1 in b1.point_ids() {
        for &x1 in b1.acting_arrows(p1) {
            let Some(q1) = b1.act(p1, x1) else { continue };
            for p2 in b2.point_ids() {
                for &x2 in b2.acting_arrows(p2) {
                    let Some(q2) = b2.act(p2, x2) else { continue };
                    let p = p1.index() * n2 + p2.index();
                    act[p * na + ix.arrow(x1, x2).index()] =
                        Some(PointId::from(q1.index() * n2 + q2.index()));
                }
            }
        }
    }
    let mut base = Vec::new();
    for m1 in b1.base_ids() {
        for m2 in b2.base_ids() {
            base.push(pair_label(b1.base_name(m1), b2.base_name(m2)));
        }
    }
    PrincipalBundle::new(
        gg,
        Labels::from_distinct(total),
        Labels::from_distinct(base),
        projection,
        momentum,
        act,
    )
    .expect("product bundle is well formed")
}

/// Pairs `(p, p̃)` of the fibred product, in the order used by [`fibred_product`].
pub fn fibred_pairs(b1: &PrincipalBundle, b2: &PrincipalBundle) -> Vec<(PointId, PointId)> {
    let mut out = Vec::new();
    for p in b1.point_ids() {
        for &q in b2.fiber(b1.projection(p)) {
            out.push((p, q));
        }
    }
    out
}

/// Checks that two bundles share structure groupoid and base.
pub fn check_same_base_and_groupoid(b1: &PrincipalBundle, b2: &PrincipalBundle) -> Result<()> {
    if !same_groupoid(b1.groupoid(), b2.groupoid()) {
        return Err(Error::Mismatch("bundles have different structure groupoids".into()));
    }
    if b1.base() != b2.base() {
        return Err(Error::Mismatch("bundles have different bases".into()));
    }
    Ok(())
}

/// The fibred product `P ⊙ P̃` over the common base, with structure groupoid `G × G`.
///
/// `gg` may supply a prebuilt `product_groupoid(G, G)`; otherwise one is built.
pub fn fibred_product_over(
    b1: &PrincipalBundle,
    b2: &PrincipalBundle,
    gg: Option<Arc<FiniteGroupoid>>,
) -> Result<PrincipalBundle> {
    check_same_base_and_groupoid(b1, b2)?;
    let g = b1.groupoid();
    let gg = gg.unwrap_or_else(|| Arc::new(product_groupoid(g, g)));
    let ix = ProductIndex::of(g, g);
    let pairs = fibred_pairs(b1, b2);
    let mut pos = vec![None; b1.point_count() * b2.point_count()];
    for (i, &(p, q)) in pairs.iter().enumerate() {
        pos[p.index() * b2.point_count() + q.index()] = Some(PointId::from(i));
    }
    let na = gg.arrow_count();
    let mut act = vec![None; pairs.len() * na];
    for (i, &(p, q)) in pairs.iter().enumerate() {
        for &x in b1.acting_arrows(p) {
            let Some(px) = b1.act(p, x) else { continue };
            for &y in b2.acting_arrows(q) {
                let Some(qy) = b2.act(q, y) else { continue };
                act[i * na + ix.arrow(x, y).index()] = pos[px.index() * b2.point_count() + qy.index()];
            }
        }
    }
    PrincipalBundle::new(
        gg,
        Labels::from_distinct(pairs.iter().map(|&(p, q)| pair_label(b1.point_name(p), b2.point_name(q)))),
        b1.base().clone(),
        pairs.iter().map(|&(p, _)| b1.projection(p)).collect(),
        pairs
            .iter()
            .map(|&(p, q)| ix.object(b1.momentum(p), b2.momentum(q)))
            .collect(),
        act,
    )
}

/// The fibred product `P ⊙ P̃`.
pub fn fibred_product(b1: &PrincipalBundle, b2: &PrincipalBundle) -> Result<PrincipalBundle> {
    fibred_product_over(b1, b2, None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{generalized_conjugation_over, validate_equivariant_map, ConjugationVariant, EquivariantMap};
    use crate::builders::fixtures::{group_s3, pair, z2};
    use crate::morphism::GroupoidMorphism;

    fn unit(g: FiniteGroupoid) -> PrincipalBundle {
        unit_bundle(Arc::new(g))
    }

    #[test]
    fn unit_bundles_validate() {
        for g in [z2(), pair(2), group_s3()] {
            let b = unit(g);
            assert!(validate_bundle(&b).is_ok());
            assert!(verify_division_properties(&b).is_ok());
        }
    }

    #[test]
    fn unit_bundle_fibres() {
        let b = unit(z2());
        assert_eq!(b.base().len(), 1);
        assert_eq!(b.fiber(BaseId(0)).len(), 2);

        let b = unit(pair(2));
        let names = |m: &str| -> Vec<&str> {
            b.fiber(b.base_point(m).unwrap()).iter().map(|&p| b.point_name(p)).collect()
        };
        assert_eq!(names("0"), ["(0,0)", "(0,1)"]);
        assert_eq!(names("1"), ["(1,0)", "(1,1)"]);
    }

    #[test]
    fn unit_bundle_division_is_inverse_times() {
        for g in [z2(), pair(3), group_s3()] {
            let g = Arc::new(g);
            let b = unit_bundle(g.clone());
            for (p, q) in b.fibred_pairs() {
                let expected = g.mul(g.inverse(ArrowId(p.0)), ArrowId(q.0));
                assert_eq!(b.div(p, q), expected);
            }
        }
    }

    #[test]
    fn pair2_division_example() {
        let b = unit(pair(2));
        let p = b.point("(0,1)").unwrap();
        let q = b.point("(0,0)").unwrap();
        let phi = division_map(&b, p, q).unwrap();
        assert_eq!(b.groupoid().arrow_name(phi), "(1,0)");
    }

    #[test]
    fn division_across_fibres_is_an_error() {
        let b = unit(pair(2));
        let p = b.point("(0,1)").unwrap();
        let q = b.point("(1,1)").unwrap();
        assert!(matches!(division_map(&b, p, q), Err(Error::NotSameFiber { .. })));
    }

    #[test]
    fn removing_a_point_breaks_the_bijection_in_that_fibre() {
        let b = unit(pair(2));
        let mut t = b.to_tables();
        let gone = "(1,0)";
        t.total.retain(|p| p != gone);
        t.projection.retain(|(p, _)| p != gone);
        t.momentum.retain(|(p, _)| p != gone);
        t.act.retain(|(p, _, q)| p != gone && q != gone);
        let broken = PrincipalBundle::from_tables(b.groupoid().clone(), &t).unwrap();
        let r = validate_bundle(&broken);
        assert!(!r.has_rule("bundle.transitive"));
        let hits: Vec<_> = r.violations_of("bundle.bijection-undefined").collect();
        assert!(!hits.is_empty());
        assert!(hits.iter().all(|v| v.witness[0] == "1"));
        // Non-principal input: division raises an integrity error, never a value.
        let p = broken.point("(1,1)").unwrap();
        assert!(broken.division(p, p).is_ok());
    }

    #[test]
    fn corrupted_action_breaks_division_equivariance() {
        let b = unit(z2());
        let mut t = b.to_tables();
        for e in &mut t.act {
            if e.0 == "e" && e.1 == "a" {
                e.2 = "e".into();
            }
        }
        let broken = PrincipalBundle::from_tables(b.groupoid().clone(), &t).unwrap();
        let r = verify_division_properties(&broken);
        assert!(r.has_rule("division.equivariance"));
        assert!(r.has_rule("division.defined"));
        let p = broken.point("e").unwrap();
        assert!(matches!(broken.division(p, p), Err(Error::Integrity(_))));
    }

    #[test]
    fn division_map_is_equivariant_into_right_conjugation() {
        let g = Arc::new(z2());
        let b = unit_bundle(g.clone());
        let pp = fibred_product(&b, &b).unwrap();
        let conj = generalized_conjugation_over(&g, pp.groupoid().clone(), ConjugationVariant::Right);
        let map: Vec<PointId> = fibred_pairs(&b, &b)
            .into_iter()
            .map(|(p, q)| PointId(b.div(p, q).0))
            .collect();
        let id = GroupoidMorphism::identity(pp.groupoid().clone());
        let r = validate_equivariant_map(EquivariantMap {
            from: pp.action(),
            to: &conj,
            map: &map,
            morphism: &id,
        })
        .unwrap();
        assert!(r.is_ok(), "{r}");
    }

    #[test]
    fn pullback_examples() {
        let b = unit(pair(2));
        let id: Vec<BaseId> = b.base_ids().collect();
        let pb = pullback_bundle(&b, b.base().clone(), &id).unwrap();
        assert_eq!(pb.point_count(), b.point_count());
        assert!(validate_bundle(&pb).is_ok());
        for (p, q) in b.fibred_pairs() {
            let m = b.base_name(b.projection(p));
            let pp = pb.point(&pair_label(m, b.point_name(p))).unwrap();
            let qq = pb.point(&pair_label(m, b.point_name(q))).unwrap();
            assert_eq!(pb.div(pp, qq), b.div(p, q));
        }

        let base = Labels::new("base point", ["u", "v", "w"]).unwrap();
        let constant = vec![BaseId(0); 3];
        let pb = pullback_bundle(&b, base, &constant).unwrap();
        assert!(validate_bundle(&pb).is_ok());
        for m in pb.base_ids() {
            assert_eq!(pb.fiber(m).len(), b.fiber(BaseId(0)).len());
        }
    }

    #[test]
    fn trivial_bundle_points() {
        let g = Arc::new(pair(2));
        let base = Labels::new("base point", ["u", "v"]).unwrap();
        let alpha = [g.object("0").unwrap(), g.object("0").unwrap()];
        let t = trivial_bundle(g.clone(), base, &alpha).unwrap();
        let mut names: Vec<_> = t.total().names().to_vec();
        names.sort();
        assert_eq!(names, ["(u,(0,0))", "(u,(0,1))", "(v,(0,0))", "(v,(0,1))"]);
        assert!(validate_bundle(&t).is_ok());
    }

    #[test]
    fn trivialize_unit_bundle_with_unit_section_is_identity() {
        let g = Arc::new(pair(2));
        let b = unit_bundle(g.clone());
        let section: Vec<_> = g
            .object_ids()
            .map(|x| (BaseId(x.0), PointId(g.unit(x).0)))
            .collect();
        let iso = trivialize(&b, &section).unwrap();
        for p in iso.restricted.point_ids() {
            let name = iso.trivial.point_name(iso.forward[p.index()]);
            let m = iso.restricted.base_name(iso.restricted.projection(p));
            assert_eq!(name, pair_label(m, iso.restricted.point_name(p)));
        }
    }

    #[test]
    fn trivialize_pair2_example() {
        let b = unit(pair(2));
        let s0 = (b.base_point("0").unwrap(), b.point("(0,1)").unwrap());
        let s1 = (b.base_point("1").unwrap(), b.point("(1,0)").unwrap());
        let iso = trivialize(&b, &[s0, s1]).unwrap();
        let p = iso.restricted.point("(0,0)").unwrap();
        assert_eq!(iso.trivial.point_name(iso.forward[p.index()]), "(0,(1,0))");
    }

    #[test]
    fn trivialize_rejects_non_sections() {
        let b = unit(pair(2));
        let bad = (b.base_point("0").unwrap(), b.point("(1,0)").unwrap());
        assert!(matches!(trivialize(&b, &[bad]), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn product_bundle_division_is_componentwise() {
        let b1 = unit(z2());
        let b2 = unit(pair(2));
        let pb = product_bundle(&b1, &b2);
        assert!(validate_bundle(&pb).is_ok());
        let ix = ProductIndex::of(b1.groupoid(), b2.groupoid());
        let n2 = b2.point_count() as u32;
        for (p, q) in pb.fibred_pairs() {
            let (p1, p2) = (PointId(p.0 / n2), PointId(p.0 % n2));
            let (q1, q2) = (PointId(q.0 / n2), PointId(q.0 % n2));
            assert_eq!(pb.div(p, q), ix.arrow(b1.div(p1, q1), b2.div(p2, q2)));
        }
        for m in pb.base_ids() {
            assert_eq!(pb.fiber(m).len(), 2 * 2);
        }
    }

    #[test]
    fn fibred_product_examples() {
        let b = unit(z2());
        let ff = fibred_product(&b, &b).unwrap();
        assert_eq!(ff.point_count(), 4);
        assert!(validate_bundle(&ff).is_ok());

        let b = unit(pair(2));
        let ff = fibred_product(&b, &b).unwrap();
        assert!(validate_bundle(&ff).is_ok());
        for m in ff.base_ids() {
            assert_eq!(ff.fiber(m).len(), 4);
        }
    }

    #[test]
    fn fibred_product_rejects_mismatches() {
        let a = unit(z2());
        let b = unit(pair(2));
        assert!(matches!(fibred_product(&a, &b), Err(Error::Mismatch(_))));
    }
}
