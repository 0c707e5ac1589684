//! Left and right groupoid actions on finite sets, freeness and transitivity,
//! the generalized conjugation actions of `G × G` on `G`, and (twisted)
//! equivariant maps.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::{product_groupoid, same_groupoid, FiniteGroupoid, ProductIndex};
use crate::ids::{total_map, ArrowId, Labels, ObjectId, PointId};
use crate::morphism::GroupoidMorphism;
use crate::report::ValidationReport;
use crate::witness;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `g · m`, defined when `source(g) = J(m)`.
    Left,
    /// `m · g`, defined when `target(g) = J(m)`.
    Right,
}

/// Raw action tables. `act` entries are `[g, m, g·m]` for a left action and
/// `[m, g, m·g]` for a right action.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionTables {
    pub side: Side,
    pub points: Vec<String>,
    pub momentum: Vec<(String, String)>,
    pub act: Vec<(String, String, String)>,
}

impl ActionTables {
    pub fn canonical(mut self) -> Self {
        self.points.sort();
        self.momentum.sort();
        self.act.sort();
        self
    }
}

/// A groupoid action on a finite carrier, with momentum map `J`.
///
/// The action table may be partial on its domain (validation flags that), but
/// never has entries outside it.
#[derive(Debug, Clone)]
pub struct GroupoidAction {
    groupoid: Arc<FiniteGroupoid>,
    side: Side,
    points: Labels,
    momentum: Vec<ObjectId>,
    act: Vec<Option<PointId>>,
}

impl GroupoidAction {
    /// Builds an action from an indexed table, `act[m * arrows + g]`.
    pub fn new(
        groupoid: Arc<FiniteGroupoid>,
        side: Side,
        points: Labels,
        momentum: Vec<ObjectId>,
        act: Vec<Option<PointId>>,
    ) -> Result<Self> {
        let n = groupoid.arrow_count();
        if momentum.len() != points.len() {
            return Err(Error::NotTotal {
                map: "momentum".into(),
                missing: format!("{} of {} points", momentum.len(), points.len()),
            });
        }
        if act.len() != points.len() * n {
            return Err(Error::InvalidInput("action table has the wrong shape".into()));
        }
        let a = GroupoidAction {
            groupoid,
            side,
            points,
            momentum,
            act,
        };
        for m in a.point_ids() {
            for g in a.groupoid.arrow_ids() {
                if let Some(r) = a.act[m.index() * n + g.index()] {
                    if r.index() >= a.points.len() {
                        return Err(Error::InvalidInput("action result out of range".into()));
                    }
                    if !a.in_domain(g, m) {
                        return Err(Error::OffDomain {
                            map: "act".into(),
                            entry: a.entry_label(g, m),
                        });
                    }
                }
            }
        }
        Ok(a)
    }

    pub fn from_tables(groupoid: Arc<FiniteGroupoid>, t: &ActionTables) -> Result<Self> {
        let points = Labels::new("point", t.points.iter().cloned())?;
        let momentum = total_map(
            "momentum",
            &points,
            "point",
            groupoid.object_labels(),
            "object",
            &t.momentum,
        )?
        .into_iter()
        .map(ObjectId)
        .collect();
        let n = groupoid.arrow_count();
        let mut act = vec![None; points.len() * n];
        for (x, y, r) in &t.act {
            let (g, m) = match t.side {
                Side::Left => (x, y),
                Side::Right => (y, x),
            };
            let gi = groupoid.arrow_labels().lookup("arrow", g, "act")?;
            let mi = points.lookup("point", m, "act")?;
            let ri = points.lookup("point", r, "act")?;
            let slot = &mut act[mi * n + gi];
            if slot.is_some() {
                return Err(Error::DuplicateEntry {
                    map: "act".into(),
                    key: format!("({x},{y})"),
                });
            }
            *slot = Some(PointId::from(ri));
        }
        Self::new(groupoid, t.side, points, momentum, act)
    }

    pub fn to_tables(&self) -> ActionTables {
        let mut act = Vec::new();
        for m in self.point_ids() {
            for g in self.groupoid.arrow_ids() {
                if let Some(r) = self.apply(g, m) {
                    let (gn, mn, rn) = (
                        self.groupoid.arrow_name(g).to_string(),
                        self.point_name(m).to_string(),
                        self.point_name(r).to_string(),
                    );
                    act.push(match self.side {
                        Side::Left => (gn, mn, rn),
                        Side::Right => (mn, gn, rn),
                    });
                }
            }
        }
        ActionTables {
            side: self.side,
            points: self.points.names().to_vec(),
            momentum: self
                .point_ids()
                .map(|m| {
                    (
                        self.point_name(m).to_string(),
                        self.groupoid.object_name(self.momentum(m)).to_string(),
                    )
                })
                .collect(),
            act,
        }
    }

    pub fn groupoid(&self) -> &Arc<FiniteGroupoid> {
        &self.groupoid
    }

    pub fn side(&self) -> Side {
        self.side
    }

    pub fn points(&self) -> &Labels {
        &self.points
    }

    pub fn point_count(&self) -> usize {
        self.points.len()
    }

    pub fn point_ids(&self) -> impl Iterator<Item = PointId> + Clone {
        (0..self.points.len()).map(PointId::from)
    }

    pub fn point_name(&self, m: PointId) -> &str {
        self.points.name(m.index())
    }

    pub fn point(&self, name: &str) -> Result<PointId> {
        self.points.lookup("point", name, "carrier").map(PointId::from)
    }

    #[inline]
    pub fn momentum(&self, m: PointId) -> ObjectId {
        self.momentum[m.index()]
    }

    /// Whether `(g, m)` lies in the action domain.
    #[inline]
    pub fn in_domain(&self, g: ArrowId, m: PointId) -> bool {
        let end = match self.side {
            Side::Left => self.groupoid.source(g),
            Side::Right => self.groupoid.target(g),
        };
        end == self.momentum(m)
    }

    /// `g · m` (left) or `m · g` (right); `None` off the domain or where the
    /// table has no entry.
    #[inline]
    pub fn apply(&self, g: ArrowId, m: PointId) -> Option<PointId> {
        self.act[m.index() * self.groupoid.arrow_count() + g.index()]
    }

    /// Arrows that can act on `m`.
    pub fn acting_arrows(&self, m: PointId) -> &[ArrowId] {
        match self.side {
            Side::Left => self.groupoid.arrows_from(self.momentum(m)),
            Side::Right => self.groupoid.arrows_into(self.momentum(m)),
        }
    }

    /// All arrows carrying `m` to `m2`.
    pub fn transporters(&self, m: PointId, m2: PointId) -> Vec<ArrowId> {
        self.acting_arrows(m)
            .iter()
            .copied()
            .filter(|&g| self.apply(g, m) == Some(m2))
            .collect()
    }

    fn entry_label(&self, g: ArrowId, m: PointId) -> String {
        let (gn, mn) = (self.groupoid.arrow_name(g), self.point_name(m));
        match self.side {
            Side::Left => format!("({gn},{mn})"),
            Side::Right => format!("({mn},{gn})"),
        }
    }

    fn entry_witness(&self, g: ArrowId, m: PointId) -> Vec<String> {
        let (gn, mn) = (self.groupoid.arrow_name(g), self.point_name(m));
        match self.side {
            Side::Left => witness![gn, mn],
            Side::Right => witness![mn, gn],
        }
    }
}

/// Checks the three action axioms and totality on the action domain.
///
/// Rules: `action.total`, `action.momentum`, `action.composition`, `action.unit`.
pub fn validate_action(a: &GroupoidAction) -> ValidationReport {
    let mut r = ValidationReport::new(match a.side {
        Side::Left => "left action",
        Side::Right => "right action",
    });
    let g = &*a.groupoid;
    for m in a.point_ids() {
        for &x in a.acting_arrows(m) {
            match a.apply(x, m) {
                None => r.push(
                    "action.total",
                    a.entry_witness(x, m),
                    "no action entry on the action domain",
                ),
                Some(res) => {
                    let expected = match a.side {
                        Side::Left => g.target(x),
                        Side::Right => g.source(x),
                    };
                    if a.momentum(res) != expected {
                        r.push(
                            "action.momentum",
                            a.entry_witness(x, m),
                            format!(
                                "momentum of the result is {}, expected {}",
                                g.object_name(a.momentum(res)),
                                g.object_name(expected)
                            ),
                        );
                    }
                }
            }
        }
        match a.apply(g.unit(a.momentum(m)), m) {
            Some(res) if res == m => {}
            Some(res) => r.push(
                "action.unit",
                witness![a.point_name(m)],
                format!("unit sends the point to {}", a.point_name(res)),
            ),
            None => {}
        }
    }
    // Left: g1·(g2·m) = (g1·g2)·m. Right: (m·g1)·g2 = m·(g1·g2).
    for m in a.point_ids() {
        for &first in a.acting_arrows(m) {
            let Some(m1) = a.apply(first, m) else { continue };
            for &second in a.acting_arrows(m1) {
                let Some(m2) = a.apply(second, m1) else { continue };
                let combined = match a.side {
                    Side::Left => g.compose(second, first),
                    Side::Right => g.compose(first, second),
                };
                let Some(c) = combined else { continue };
                let Some(direct) = a.apply(c, m) else { continue };
                if direct != m2 {
                    let w = match a.side {
                        Side::Left => {
                            witness![g.arrow_name(second), g.arrow_name(first), a.point_name(m)]
                        }
                        Side::Right => {
                            witness![a.point_name(m), g.arrow_name(first), g.arrow_name(second)]
                        }
                    };
                    r.push(
                        "action.composition",
                        w,
                        format!(
                            "stepwise action gives {}, composite gives {}",
                            a.point_name(m2),
                            a.point_name(direct)
                        ),
                    );
                }
            }
        }
    }
    r
}

/// Outcome of a yes/no structural test, with a counterexample when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Verdict {
    pub holds: bool,
    pub counterexample: Option<Vec<String>>,
}

impl Verdict {
    fn yes() -> Self {
        Verdict {
            holds: true,
            counterexample: None,
        }
    }

    fn no(w: Vec<String>) -> Self {
        Verdict {
            holds: false,
            counterexample: Some(w),
        }
    }
}

/// Free: `g·m = m` implies `g` is the unit at `J(m)`. Counterexample `(g, m)`.
pub fn is_free(a: &GroupoidAction) -> Verdict {
    let g = &*a.groupoid;
    for m in a.point_ids() {
        let unit = g.unit(a.momentum(m));
        for &x in a.acting_arrows(m) {
            if x != unit && a.apply(x, m) == Some(m) {
                return Verdict::no(a.entry_witness(x, m));
            }
        }
    }
    Verdict::yes()
}

/// Transitive: every ordered pair of points is joined by some arrow.
/// Counterexample `(m, m')`.
///
/// When the action is also free, the joining arrow is checked to be unique;
/// a failure there is reported as a counterexample `(m, m', "not unique")`.
pub fn is_transitive(a: &GroupoidAction) -> Verdict {
    let free = is_free(a).holds;
    for m in a.point_ids() {
        for m2 in a.point_ids() {
            let found = a.transporters(m, m2);
            if found.is_empty() {
                return Verdict::no(witness![a.point_name(m), a.point_name(m2)]);
            }
            if free && found.len() > 1 {
                return Verdict::no(witness![a.point_name(m), a.point_name(m2), "not unique"]);
            }
        }
    }
    Verdict::yes()
}

/// The four generalized conjugation actions of `G × G` on the arrows of `G`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConjugationVariant {
    /// Left, momentum `(t(g), s(g))`, `(g1,g2)·g3 = g1·g3·g2⁻¹`.
    Left,
    /// Left, momentum `(s(g), t(g))`, `(g1,g2)·g3 = g2·g3·g1⁻¹`.
    LeftBar,
    /// Right, momentum `(t(g), s(g))`, `g3·(g1,g2) = g1⁻¹·g3·g2`.
    Right,
    /// Right, momentum `(s(g), t(g))`, `g3·(g1,g2) = g2⁻¹·g3·g1`.
    RightBar,
}

impl ConjugationVariant {
    pub const ALL: [ConjugationVariant; 4] = [
        ConjugationVariant::Left,
        ConjugationVariant::LeftBar,
        ConjugationVariant::Right,
        ConjugationVariant::RightBar,
    ];
}

/// Builds a generalized conjugation action on the arrows of `g`.
///
/// The acting groupoid is a fresh `G × G`; see [`product_groupoid`].
pub fn generalized_conjugation(g: &FiniteGroupoid, variant: ConjugationVariant) -> GroupoidAction {
    let gg = Arc::new(product_groupoid(g, g));
    generalized_conjugation_over(g, gg, variant)
}

/// As [`generalized_conjugation`], acting through a caller-supplied `G × G`
/// (which must be `product_groupoid(g, g)`).
pub fn generalized_conjugation_over(
    g: &FiniteGroupoid,
    gg: Arc<FiniteGroupoid>,
    variant: ConjugationVariant,
) -> GroupoidAction {
    use ConjugationVariant::*;
    let ix = ProductIndex::of(g, g);
    let plain = |h: ArrowId| ix.object(g.target(h), g.source(h));
    let barred = |h: ArrowId| ix.object(g.source(h), g.target(h));
    let momentum: Vec<ObjectId> = g
        .arrow_ids()
        .map(|h| match variant {
            Left | Right => plain(h),
            LeftBar | RightBar => barred(h),
        })
        .collect();
    let side = match variant {
        Left | LeftBar => Side::Left,
        Right | RightBar => Side::Right,
    };
    let n = gg.arrow_count();
    let mut act = vec![None; g.arrow_count() * n];
    for h in g.arrow_ids() {
        let j = momentum[h.index()];
        let pairs = match side {
            Side::Left => gg.arrows_from(j),
            Side::Right => gg.arrows_into(j),
        };
        for &pair in pairs {
            let (g1, g2) = ix.split_arrow(pair);
            let inv = |x| g.inverse(x);
            let res = match variant {
                Left => g.mul3(g1, h, inv(g2)),
                LeftBar => g.mul3(g2, h, inv(g1)),
                Right => g.mul3(inv(g1), h, g2),
                RightBar => g.mul3(inv(g2), h, g1),
            };
            act[h.index() * n + pair.index()] = Some(PointId(res.0));
        }
    }
    GroupoidAction::new(
        gg,
        side,
        Labels::from_distinct(g.arrow_labels().names().iter().cloned()),
        momentum,
        act,
    )
    .expect("conjugation table is in its domain")
}

/// A twisted equivariant map `(Θ, Φ, φ)` between two actions on the same side.
#[derive(Debug, Clone, Copy)]
pub struct EquivariantMap<'a> {
    pub from: &'a GroupoidAction,
    pub to: &'a GroupoidAction,
    pub map: &'a [PointId],
    pub morphism: &'a GroupoidMorphism,
}

/// Checks `J_N ∘ Θ = φ ∘ J_M` (`equivariant.momentum`) and
/// `Θ(g·m) = Φ(g)·Θ(m)` (`equivariant.action`).
pub fn validate_equivariant_map(w: EquivariantMap<'_>) -> Result<ValidationReport> {
    if w.from.side != w.to.side {
        return Err(Error::Mismatch("actions act from different sides".into()));
    }
    if w.map.len() != w.from.point_count() {
        return Err(Error::NotTotal {
            map: "equivariant map".into(),
            missing: format!("{} of {} points", w.map.len(), w.from.point_count()),
        });
    }
    if !same_groupoid(w.morphism.domain(), &w.from.groupoid)
        || !same_groupoid(w.morphism.codomain(), &w.to.groupoid)
    {
        return Err(Error::Mismatch(
            "morphism does not connect the acting groupoids".into(),
        ));
    }
    let mut r = ValidationReport::new("equivariant map");
    for m in w.from.point_ids() {
        let image = w.map[m.index()];
        if w.to.momentum(image) != w.morphism.object(w.from.momentum(m)) {
            r.push(
                "equivariant.momentum",
                witness![w.from.point_name(m)],
                "momentum of the image differs from the image of the momentum",
            );
        }
    }
    for m in w.from.point_ids() {
        for &g in w.from.acting_arrows(m) {
            let Some(gm) = w.from.apply(g, m) else { continue };
            let lhs = w.map[gm.index()];
            let rhs = w.to.apply(w.morphism.arrow(g), w.map[m.index()]);
            if rhs != Some(lhs) {
                r.push(
                    "equivariant.action",
                    w.from.entry_witness(g, m),
                    format!("Θ(g·m) = {} differs from Φ(g)·Θ(m)", w.to.point_name(lhs)),
                );
            }
        }
    }
    Ok(r)
}

/// The action of a groupoid on itself by left or right multiplication.
///
/// Left: momentum `t`, `g · h = g·h`. Right: momentum `s`, `h · g = h·g`.
pub fn regular_action(g: Arc<FiniteGroupoid>, side: Side) -> GroupoidAction {
    let n = g.arrow_count();
    let momentum = g
        .arrow_ids()
        .map(|h| match side {
            Side::Left => g.target(h),
            Side::Right => g.source(h),
        })
        .collect();
    let mut act = vec![None; n * n];
    for h in g.arrow_ids() {
        for x in g.arrow_ids() {
            let res = match side {
                Side::Left => g.compose(x, h),
                Side::Right => g.compose(h, x),
            };
            act[h.index() * n + x.index()] = res.map(|r| PointId(r.0));
        }
    }
    let points = Labels::from_distinct(g.arrow_labels().names().iter().cloned());
    GroupoidAction::new(g, side, points, momentum, act).expect("regular action is in its domain")
}
