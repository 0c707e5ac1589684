//! Small named groupoids and the constructions they come from: groups,
//! pair groupoids, action groupoids and gauge groupoids of ordinary
//! principal bundles.

use std::collections::HashMap;

use crate::bundle::{trivial_bundle, validate_bundle, PrincipalBundle};
use crate::error::{Error, Result};
use crate::groupoid::{validate_groupoid, FiniteGroupoid};
use crate::ids::{pair_label, ArrowId, Labels, ObjectId, PointId};
use crate::report::ValidationReport;
use crate::witness;

/// Name of the single object of a group viewed as a groupoid.
pub const GROUP_OBJECT: &str = "*";

/// A group as a one-object groupoid, from its multiplication table
/// (`table[a][b]` is the index of `a·b`).
///
/// The unit and inverses are read off the table where possible; anything
/// that is not a group table is rejected with the validator's report.
pub fn make_group_groupoid(elements: &[String], table: &[Vec<usize>]) -> Result<FiniteGroupoid> {
    let n = elements.len();
    if n == 0 {
        return Err(Error::InvalidInput("a group has at least one element".into()));
    }
    if table.len() != n || table.iter().any(|row| row.len() != n || row.iter().any(|&c| c >= n)) {
        return Err(Error::InvalidInput(format!(
            "multiplication table must be {n}×{n} over the element list"
        )));
    }
    let arrows = Labels::new("arrow", elements.iter().cloned())?;
    let unit = (0..n)
        .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
        .unwrap_or(0);
    let inverse = (0..n)
        .map(|x| {
            let inv = (0..n).find(|&y| table[x][y] == unit).unwrap_or(x);
            ArrowId::from(inv)
        })
        .collect();
    let compose = table
        .iter()
        .flat_map(|row| row.iter().map(|&c| Some(ArrowId::from(c))))
        .collect();
    let g = FiniteGroupoid::from_parts(
        Labels::from_distinct([GROUP_OBJECT]),
        arrows,
        vec![ObjectId(0); n],
        vec![ObjectId(0); n],
        vec![ArrowId::from(unit)],
        inverse,
        compose,
    );
    validate_groupoid(&g).into_result()?;
    Ok(g)
}

/// The pair groupoid on `{0, …, n-1}`: one arrow `(x,y)` from `y` to `x`,
/// composing as `(x,y)·(y,z) = (x,z)`.
pub fn make_pair_groupoid(n: usize) -> Result<FiniteGroupoid> {
    if n == 0 {
        return Err(Error::InvalidInput("pair groupoid needs at least one object".into()));
    }
    let objects: Vec<String> = (0..n).map(|i| i.to_string()).collect();
    let arrow = |x: usize, y: usize| ArrowId::from(x * n + y);
    let mut arrows = Vec::with_capacity(n * n);
    let mut source = Vec::with_capacity(n * n);
    let mut target = Vec::with_capacity(n * n);
    let mut inverse = Vec::with_capacity(n * n);
    for x in 0..n {
        for y in 0..n {
            arrows.push(pair_label(&objects[x], &objects[y]));
            target.push(ObjectId::from(x));
            source.push(ObjectId::from(y));
            inverse.push(arrow(y, x));
        }
    }
    let mut compose = vec![None; n * n * n * n];
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                compose[arrow(x, y).index() * n * n + arrow(y, z).index()] = Some(arrow(x, z));
            }
        }
    }
    Ok(FiniteGroupoid::from_parts(
        Labels::from_distinct(objects),
        Labels::from_distinct(arrows),
        source,
        target,
        (0..n).map(|x| arrow(x, x)).collect(),
        inverse,
        compose,
    ))
}

/// Checks that `act[g][m]` is a left action of the group `g` on `points`.
///
/// Rules: `group-action.unit`, `group-action.composition`.
pub fn validate_group_action(group: &FiniteGroupoid, points: &Labels, act: &[Vec<usize>]) -> Result<ValidationReport> {
    if group.object_count() != 1 {
        return Err(Error::InvalidInput("expected a one-object groupoid".into()));
    }
    let np = points.len();
    if act.len() != group.arrow_count() || act.iter().any(|row| row.len() != np || row.iter().any(|&q| q >= np)) {
        return Err(Error::InvalidInput("action table must be |G|×|M| over the point list".into()));
    }
    let mut r = ValidationReport::new("group action");
    let e = group.unit(ObjectId(0));
    for m in 0..np {
        if act[e.index()][m] != m {
            r.push("group-action.unit", witness![points.name(m)], "the unit moves the point");
        }
    }
    for g in group.arrow_ids() {
        for h in group.arrow_ids() {
            let gh = group.mul(g, h);
            for m in 0..np {
                if act[g.index()][act[h.index()][m]] != act[gh.index()][m] {
                    r.push(
                        "group-action.composition",
                        witness![group.arrow_name(g), group.arrow_name(h), points.name(m)],
                        "g·(h·m) differs from (gh)·m",
                    );
                }
            }
        }
    }
    Ok(r)
}

/// The action groupoid `G ⋉ M` of a left group action, `act[g][m] = g·m`.
///
/// Arrows are `(g,m)` from `m` to `g·m`; `(g1,m1)·(g2,m2) = (g1g2,m2)`
/// when `m1 = g2·m2`.
pub fn make_action_groupoid(group: &FiniteGroupoid, points: &[String], act: &[Vec<usize>]) -> Result<FiniteGroupoid> {
    let labels = Labels::new("point", points.iter().cloned())?;
    validate_group_action(group, &labels, act)?.into_result()?;
    let np = points.len();
    let ng = group.arrow_count();
    let arrow = |g: ArrowId, m: usize| ArrowId::from(g.index() * np + m);
    let mut arrows = Vec::with_capacity(ng * np);
    let mut source = Vec::with_capacity(ng * np);
    let mut target = Vec::with_capacity(ng * np);
    let mut inverse = Vec::with_capacity(ng * np);
    for g in group.arrow_ids() {
        for m in 0..np {
            arrows.push(pair_label(group.arrow_name(g), &points[m]));
            source.push(ObjectId::from(m));
            target.push(ObjectId::from(act[g.index()][m]));
            inverse.push(arrow(group.inverse(g), act[g.index()][m]));
        }
    }
    let n = ng * np;
    let mut compose = vec![None; n * n];
    for g1 in group.arrow_ids() {
        for g2 in group.arrow_ids() {
            let g12 = group.mul(g1, g2);
            for m2 in 0..np {
                let m1 = act[g2.index()][m2];
                compose[arrow(g1, m1).index() * n + arrow(g2, m2).index()] = Some(arrow(g12, m2));
            }
        }
    }
    let e = group.unit(ObjectId(0));
    let g = FiniteGroupoid::from_parts(
        labels,
        Labels::from_distinct(arrows),
        source,
        target,
        (0..np).map(|m| arrow(e, m)).collect(),
        inverse,
        compose,
    );
    validate_groupoid(&g).into_result()?;
    Ok(g)
}

/// The gauge groupoid `(P × P)/G` of an ordinary principal bundle, given as
/// a principal bundle whose structure groupoid has a single object.
///
/// Arrows are the orbits of the diagonal action, labelled `[p,q]` by their
/// least representative; `[p,q]` runs from `π(q)` to `π(p)` and
/// `[p1,q1]·[q1·g,q2] = [p1,q2·g⁻¹]`.
pub fn make_gauge_groupoid_example(b: &PrincipalBundle) -> Result<FiniteGroupoid> {
    let g = b.groupoid();
    if g.object_count() != 1 {
        return Err(Error::InvalidInput("the structure groupoid must be a group".into()));
    }
    validate_bundle(b).into_result()?;
    let np = b.point_count();
    let orbit_key = |p: PointId, q: PointId| p.index() * np + q.index();
    let mut orbit_of: Vec<Option<usize>> = vec![None; np * np];
    let mut reps: Vec<(PointId, PointId)> = Vec::new();
    for p in b.point_ids() {
        for q in b.point_ids() {
            if orbit_of[orbit_key(p, q)].is_some() {
                continue;
            }
            let id = reps.len();
            reps.push((p, q));
            for x in g.arrow_ids() {
                orbit_of[orbit_key(b.mul(p, x), b.mul(q, x))] = Some(id);
            }
        }
    }
    let n = reps.len();
    let orbit = |p: PointId, q: PointId| ArrowId::from(orbit_of[orbit_key(p, q)].expect("all pairs lie in an orbit"));
    let mut compose = vec![None; n * n];
    for (i, &(p1, q1)) in reps.iter().enumerate() {
        for (j, &(p2, q2)) in reps.iter().enumerate() {
            if !b.same_fiber(q1, p2) {
                continue;
            }
            // (p2, q2) ~ (q1, q2·x⁻¹) where p2 = q1·x.
            let x = b.div(q1, p2);
            compose[i * n + j] = Some(orbit(p1, b.mul(q2, g.inverse(x))));
        }
    }
    let mut unit = Vec::with_capacity(b.base().len());
    for m in b.base_ids() {
        let p = b.fiber(m)[0];
        unit.push(orbit(p, p));
    }
    let g = FiniteGroupoid::from_parts(
        b.base().clone(),
        Labels::from_distinct(reps.iter().map(|&(p, q)| format!("[{},{}]", b.point_name(p), b.point_name(q)))),
        reps.iter().map(|&(_, q)| crate::ids::ObjectId(b.projection(q).0)).collect(),
        reps.iter().map(|&(p, _)| crate::ids::ObjectId(b.projection(p).0)).collect(),
        unit,
        reps.iter().map(|&(p, q)| orbit(q, p)).collect(),
        compose,
    );
    validate_groupoid(&g).into_result()?;
    Ok(g)
}

/// The groups used as building blocks by the random generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LibraryGroup {
    Trivial,
    Z2,
    Z3,
    Z4,
    Z2xZ2,
    S3,
}

impl LibraryGroup {
    pub const ALL: [LibraryGroup; 6] = [
        LibraryGroup::Trivial,
        LibraryGroup::Z2,
        LibraryGroup::Z3,
        LibraryGroup::Z4,
        LibraryGroup::Z2xZ2,
        LibraryGroup::S3,
    ];

    pub fn order(self) -> usize {
        match self {
            LibraryGroup::Trivial => 1,
            LibraryGroup::Z2 => 2,
            LibraryGroup::Z3 => 3,
            LibraryGroup::Z4 | LibraryGroup::Z2xZ2 => 4,
            LibraryGroup::S3 => 6,
        }
    }

    /// Element names and multiplication table; element 0 is the unit.
    pub fn table(self) -> (Vec<String>, Vec<Vec<usize>>) {
        match self {
            LibraryGroup::Trivial => (vec!["e".into()], vec![vec![0]]),
            LibraryGroup::Z2 => (vec!["e".into(), "a".into()], cyclic(2)),
            LibraryGroup::Z3 => (names(["e", "r", "r2"]), cyclic(3)),
            LibraryGroup::Z4 => (names(["e", "r", "r2", "r3"]), cyclic(4)),
            LibraryGroup::Z2xZ2 => (
                names(["e", "a", "b", "ab"]),
                (0..4).map(|x| (0..4).map(|y| x ^ y).collect()).collect(),
            ),
            LibraryGroup::S3 => s3_table(),
        }
    }

    pub fn groupoid(self) -> FiniteGroupoid {
        let (names, table) = self.table();
        make_group_groupoid(&names, &table).expect("library tables are groups")
    }
}

fn names<const N: usize>(xs: [&str; N]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn cyclic(n: usize) -> Vec<Vec<usize>> {
    (0..n).map(|x| (0..n).map(|y| (x + y) % n).collect()).collect()
}

/// S3 as permutations of {0,1,2}, `(a·b)(i) = a(b(i))`.
fn s3_table() -> (Vec<String>, Vec<Vec<usize>>) {
    let perms: [([usize; 3], &str); 6] = [
        ([0, 1, 2], "e"),
        ([1, 0, 2], "(01)"),
        ([2, 1, 0], "(02)"),
        ([0, 2, 1], "(12)"),
        ([1, 2, 0], "(012)"),
        ([2, 0, 1], "(021)"),
    ];
    let index: HashMap<[usize; 3], usize> = perms.iter().enumerate().map(|(i, (p, _))| (*p, i)).collect();
    let table = perms
        .iter()
        .map(|(a, _)| {
            perms
                .iter()
                .map(|(b, _)| index[&[a[b[0]], a[b[1]], a[b[2]]]])
                .collect()
        })
        .collect();
    (perms.iter().map(|(_, n)| n.to_string()).collect(), table)
}

/// Z2 with arrows `e` and `a` on the object `*`.
pub fn z2() -> FiniteGroupoid {
    LibraryGroup::Z2.groupoid()
}

pub fn group_s3() -> FiniteGroupoid {
    LibraryGroup::S3.groupoid()
}

pub fn pair(n: usize) -> FiniteGroupoid {
    make_pair_groupoid(n).expect("n is positive")
}

/// Z2 acting on {0, 1} by swapping.
pub fn action_groupoid_swap() -> FiniteGroupoid {
    let z = z2();
    let a = z.arrow("a").expect("Z2 has a").index();
    let mut act = vec![vec![0, 1]; 2];
    act[a] = vec![1, 0];
    make_action_groupoid(&z, &names(["0", "1"]), &act).expect("swap is an action")
}

/// Gauge groupoid of the trivial Z2-bundle over the two points `u`, `v`.
pub fn gauge_groupoid_trivial_z2() -> FiniteGroupoid {
    let z = std::sync::Arc::new(z2());
    let base = Labels::new("base point", ["u", "v"]).expect("distinct");
    let b = trivial_bundle(z, base, &[ObjectId(0), ObjectId(0)]).expect("trivial bundle");
    make_gauge_groupoid_example(&b).expect("trivial bundle is principal")
}

/// The named groupoid fixtures, in a fixed order.
pub fn fixture_groupoids() -> Vec<(&'static str, FiniteGroupoid)> {
    vec![
        ("z2", z2()),
        ("s3", group_s3()),
        ("pair2", pair(2)),
        ("pair3", pair(3)),
        ("z2-swap", action_groupoid_swap()),
        ("gauge-z2-trivial", gauge_groupoid_trivial_z2()),
    ]
}

/// Error unless `g` passes validation; for use where a report is expected.
pub fn require_valid(g: &FiniteGroupoid) -> Result<()> {
    let r = validate_groupoid(g);
    if r.is_ok() {
        Ok(())
    } else {
        Err(Error::invalid("groupoid", r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::groupoid::isotropy_group;
    use crate::unit_bundle;
    use std::sync::Arc;

    #[test]
    fn library_groups_validate() {
        for k in LibraryGroup::ALL {
            let g = k.groupoid();
            assert_eq!(g.arrow_count(), k.order());
            assert!(validate_groupoid(&g).is_ok());
        }
    }

    #[test]
    fn s3_is_nonabelian() {
        let s = group_s3();
        assert_eq!(s.arrow_count(), 6);
        let a = s.arrow("(01)").unwrap();
        let b = s.arrow("(12)").unwrap();
        assert_ne!(s.mul(a, b), s.mul(b, a));
    }

    #[test]
    fn broken_associativity_is_rejected() {
        let (names, mut table) = LibraryGroup::Z3.table();
        // r·r := e keeps unit and inverses plausible but breaks associativity.
        table[1][1] = 0;
        match make_group_groupoid(&names, &table) {
            Err(Error::Invalid { report, .. }) => assert!(report.has_rule("groupoid.associativity")),
            other => panic!("expected rejection, got {other:?}"),
        }
    }

    #[test]
    fn pair_groupoids() {
        assert_eq!(pair(1).arrow_count(), 1);
        assert_eq!(pair(2).arrow_count(), 4);
        let p3 = pair(3);
        assert_eq!(p3.arrow_count(), 9);
        assert!(validate_groupoid(&p3).is_ok());
        for x in p3.object_ids() {
            assert_eq!(isotropy_group(&p3, x).unwrap().arrow_count(), 1);
        }
        assert!(make_pair_groupoid(0).is_err());
    }

    #[test]
    fn action_groupoids() {
        let g = action_groupoid_swap();
        assert_eq!(g.arrow_count(), 4);
        for x in g.object_ids() {
            assert_eq!(isotropy_group(&g, x).unwrap().arrow_count(), 1);
        }
        let z = z2();
        let trivial = make_action_groupoid(&z, &names(["0"]), &[vec![0], vec![0]]).unwrap();
        assert_eq!(trivial.arrow_count(), 2);
        assert_eq!(trivial.object_count(), 1);
    }

    #[test]
    fn non_action_is_rejected() {
        let z = z2();
        let a = z.arrow("a").unwrap().index();
        let mut act = vec![vec![0, 1]; 2];
        act[a] = vec![1, 1];
        assert!(make_action_groupoid(&z, &names(["0", "1"]), &act).is_err());
    }

    #[test]
    fn gauge_groupoid_of_group_over_a_point_is_the_group() {
        let b = unit_bundle(Arc::new(group_s3()));
        let g = make_gauge_groupoid_example(&b).unwrap();
        assert_eq!(g.object_count(), 1);
        assert_eq!(g.arrow_count(), 6);
    }

    #[test]
    fn gauge_groupoid_of_trivial_z2_bundle() {
        let g = gauge_groupoid_trivial_z2();
        assert_eq!(g.object_count(), 2);
        assert_eq!(g.arrow_count(), 8);
        assert!(validate_groupoid(&g).is_ok());
    }

    #[test]
    fn fixtures_validate() {
        for (name, g) in fixture_groupoids() {
            assert!(require_valid(&g).is_ok(), "{name}");
        }
    }
}
