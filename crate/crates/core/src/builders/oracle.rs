//! Brute-force enumeration of bundle morphisms and GGTs.
//!
//! Both enumerators work fibre by fibre from a chosen base point and extend
//! by equivariance. They deliberately avoid the division map and the
//! correspondence maps of [`crate::gauge`], so they can be used to check them.

use std::sync::Arc;

use crate::bundle::{check_same_base_and_groupoid, PrincipalBundle};
use crate::error::{Error, Result};
use crate::gauge::{BundleMorphism, Ggt};
use crate::ids::{ArrowId, PointId};

/// Environment variable holding default oracle bounds, e.g.
/// `total=16,arrows=36,base=6`. Missing keys keep their defaults.
pub const BOUNDS_ENV: &str = "GENGAUGE_ORACLE_BOUNDS";

/// Size limits beyond which the oracles refuse to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleBounds {
    /// Points per bundle.
    pub max_total: usize,
    pub max_arrows: usize,
    pub max_base: usize,
}

impl Default for OracleBounds {
    fn default() -> Self {
        OracleBounds {
            max_total: 16,
            max_arrows: 36,
            max_base: 6,
        }
    }
}

impl OracleBounds {
    /// Parses `key=value` pairs separated by commas.
    pub fn parse(spec: &str) -> Result<Self> {
        let mut b = OracleBounds::default();
        for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidInput(format!("bound `{part}` is not key=value")))?;
            let v: usize = v
                .trim()
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bound `{part}` is not a number")))?;
            match k.trim() {
                "total" => b.max_total = v,
                "arrows" => b.max_arrows = v,
                "base" => b.max_base = v,
                other => return Err(Error::InvalidInput(format!("unknown bound `{other}`"))),
            }
        }
        Ok(b)
    }

    /// Defaults overridden by [`BOUNDS_ENV`] when it is set.
    pub fn from_env() -> Result<Self> {
        match std::env::var(BOUNDS_ENV) {
            Ok(s) => Self::parse(&s),
            Err(_) => Ok(Self::default()),
        }
    }

    /// Refuses bundles outside the bounds.
    pub fn check(&self, b: &PrincipalBundle) -> Result<()> {
        let checks = [
            ("total space size", b.point_count(), self.max_total),
            ("arrow count", b.groupoid().arrow_count(), self.max_arrows),
            ("base size", b.base().len(), self.max_base),
        ];
        for (what, actual, bound) in checks {
            if actual > bound {
                return Err(Error::BoundExceeded {
                    what: what.into(),
                    actual,
                    bound,
                });
            }
        }
        Ok(())
    }
}

/// Cartesian product of per-fibre partial assignments, merged into full
/// tables of length `len`. Conflicting merges are dropped.
fn combine<T: Copy + PartialEq>(len: usize, per_fibre: Vec<Vec<Vec<(usize, T)>>>) -> Vec<Vec<T>> {
    let mut out: Vec<Vec<Option<T>>> = vec![vec![None; len]];
    for options in per_fibre {
        let mut next = Vec::with_capacity(out.len() * options.len());
        for partial in &out {
            'opt: for opt in &options {
                let mut v = partial.clone();
                for &(i, x) in opt {
                    match v[i] {
                        Some(prev) if prev != x => continue 'opt,
                        _ => v[i] = Some(x),
                    }
                }
                next.push(v);
            }
        }
        out = next;
    }
    out.into_iter()
        .filter_map(|v| v.into_iter().collect::<Option<Vec<T>>>())
        .collect()
}

/// Every bundle morphism `P1 → P2`, sorted by image table.
///
/// For each base point, the first point `p` of the `P1`-fibre is sent to each
/// `q` of the `P2`-fibre with `ε2(q) = ε1(p)`; the rest of the fibre follows
/// from `σ(p·g) = q·g`. Candidates that are ill-defined, not total, or not
/// globally equivariant are discarded.
pub fn enumerate_bundle_morphisms(
    p1: &Arc<PrincipalBundle>,
    p2: &Arc<PrincipalBundle>,
    bounds: &OracleBounds,
) -> Result<Vec<BundleMorphism>> {
    check_same_base_and_groupoid(p1, p2)?;
    bounds.check(p1)?;
    bounds.check(p2)?;
    let mut per_fibre = Vec::new();
    for m in p1.base_ids() {
        let Some(&p) = p1.fiber(m).first() else {
            return Ok(Vec::new());
        };
        let mut options = Vec::new();
        'cand: for &q in p2.fiber(m) {
            if p2.momentum(q) != p1.momentum(p) {
                continue;
            }
            let mut assign: Vec<Option<PointId>> = vec![None; p1.point_count()];
            for &g in p1.acting_arrows(p) {
                let (Some(pg), Some(qg)) = (p1.act(p, g), p2.act(q, g)) else {
                    continue 'cand;
                };
                match assign[pg.index()] {
                    Some(prev) if prev != qg => continue 'cand,
                    _ => assign[pg.index()] = Some(qg),
                }
            }
            if p1.fiber(m).iter().any(|x| assign[x.index()].is_none()) {
                continue;
            }
            options.push(
                assign
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| v.map(|v| (i, v)))
                    .collect::<Vec<_>>(),
            );
        }
        per_fibre.push(options);
    }
    let mut maps: Vec<Vec<PointId>> = combine(p1.point_count(), per_fibre)
        .into_iter()
        .filter(|map| {
            p1.point_ids().all(|x| {
                let y = map[x.index()];
                p2.projection(y) == p1.projection(x)
                    && p2.momentum(y) == p1.momentum(x)
                    && p1
                        .acting_arrows(x)
                        .iter()
                        .all(|&g| p1.act(x, g).map(|xg| map[xg.index()]) == p2.act(y, g))
            })
        })
        .collect();
    maps.sort();
    maps.dedup();
    maps.into_iter()
        .map(|map| BundleMorphism::new(p1.clone(), p2.clone(), map))
        .collect()
}

/// Every GGT `P1 → P2`, sorted by value table.
///
/// The `G²`-action on `P1 ⊙ P2` is transitive on each fibre, so one
/// representative `(p1, p2)` per base point suffices: every arrow
/// `k: ε1(p1) → ε2(p2)` is tried and extended by
/// `K(p1·g1, p2·g2) = g2⁻¹·k·g1`.
pub fn enumerate_ggts(p1: &Arc<PrincipalBundle>, p2: &Arc<PrincipalBundle>, bounds: &OracleBounds) -> Result<Vec<Ggt>> {
    check_same_base_and_groupoid(p1, p2)?;
    bounds.check(p1)?;
    bounds.check(p2)?;
    let g = &**p1.groupoid();
    let n2 = p2.point_count();
    let mut per_fibre = Vec::new();
    for m in p1.base_ids() {
        let (Some(&a), Some(&b)) = (p1.fiber(m).first(), p2.fiber(m).first()) else {
            return Ok(Vec::new());
        };
        let mut options = Vec::new();
        'cand: for k in g.hom(p1.momentum(a), p2.momentum(b)) {
            let mut assign: Vec<Option<ArrowId>> = vec![None; p1.point_count() * n2];
            for &g1 in p1.acting_arrows(a) {
                for &g2 in p2.acting_arrows(b) {
                    let (Some(x), Some(y)) = (p1.act(a, g1), p2.act(b, g2)) else {
                        continue 'cand;
                    };
                    let Some(v) = g.compose(g.inverse(g2), k).and_then(|t| g.compose(t, g1)) else {
                        continue 'cand;
                    };
                    let slot = &mut assign[x.index() * n2 + y.index()];
                    match *slot {
                        Some(prev) if prev != v => continue 'cand,
                        _ => *slot = Some(v),
                    }
                }
            }
            let covered = p1
                .fiber(m)
                .iter()
                .all(|x| p2.fiber(m).iter().all(|y| assign[x.index() * n2 + y.index()].is_some()));
            if !covered {
                continue;
            }
            options.push(
                assign
                    .iter()
                    .enumerate()
                    .filter_map(|(i, v)| v.map(|v| (i, v)))
                    .collect::<Vec<_>>(),
            );
        }
        per_fibre.push(options);
    }
    // Full tables over P1 × P2 with a sentinel off the fibred pairs.
    let off = ArrowId(u32::MAX);
    let mut base: Vec<(usize, ArrowId)> = Vec::new();
    for x in p1.point_ids() {
        for y in p2.point_ids() {
            if p1.projection(x) != p2.projection(y) {
                base.push((x.index() * n2 + y.index(), off));
            }
        }
    }
    per_fibre.push(vec![base]);
    let mut tables = combine(p1.point_count() * n2, per_fibre);
    tables.retain(|t| {
        t.iter().enumerate().all(|(i, &v)| {
            if v == off {
                return true;
            }
            let (x, y) = (PointId::from(i / n2), PointId::from(i % n2));
            g.source(v) == p1.momentum(x) && g.target(v) == p2.momentum(y)
        })
    });
    tables.sort();
    tables.dedup();
    tables
        .into_iter()
        .map(|t| {
            let values = t.into_iter().map(|v| (v != off).then_some(v)).collect();
            Ggt::new(p1.clone(), p2.clone(), values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::fixtures::{pair, z2};
    use crate::bundle::{trivial_bundle, unit_bundle};
    use crate::ids::{Labels, ObjectId};

    #[test]
    fn unit_z2_has_two_of_each() {
        let b = Arc::new(unit_bundle(Arc::new(z2())));
        let d = OracleBounds::default();
        assert_eq!(enumerate_bundle_morphisms(&b, &b, &d).unwrap().len(), 2);
        assert_eq!(enumerate_ggts(&b, &b, &d).unwrap().len(), 2);
    }

    #[test]
    fn unit_pair2_has_one_morphism() {
        let b = Arc::new(unit_bundle(Arc::new(pair(2))));
        let d = OracleBounds::default();
        assert_eq!(enumerate_bundle_morphisms(&b, &b, &d).unwrap().len(), 1);
        assert_eq!(enumerate_ggts(&b, &b, &d).unwrap().len(), 1);
    }

    #[test]
    fn disconnected_momenta_admit_nothing() {
        // Pair2 minus its connecting arrows: two trivial groups.
        let g = Arc::new(
            crate::groupoid::FiniteGroupoid::validated(&crate::groupoid::GroupoidTables {
                objects: vec!["0".into(), "1".into()],
                arrows: vec!["u0".into(), "u1".into()],
                source: vec![("u0".into(), "0".into()), ("u1".into(), "1".into())],
                target: vec![("u0".into(), "0".into()), ("u1".into(), "1".into())],
                unit: vec![("0".into(), "u0".into()), ("1".into(), "u1".into())],
                inverse: vec![("u0".into(), "u0".into()), ("u1".into(), "u1".into())],
                compose: vec![
                    ("u0".into(), "u0".into(), "u0".into()),
                    ("u1".into(), "u1".into(), "u1".into()),
                ],
            })
            .unwrap(),
        );
        let base = Labels::new("base point", ["m"]).unwrap();
        let b0 = Arc::new(trivial_bundle(g.clone(), base.clone(), &[ObjectId(0)]).unwrap());
        let b1 = Arc::new(trivial_bundle(g, base, &[ObjectId(1)]).unwrap());
        let d = OracleBounds::default();
        assert!(enumerate_bundle_morphisms(&b0, &b1, &d).unwrap().is_empty());
        assert!(enumerate_ggts(&b0, &b1, &d).unwrap().is_empty());
    }

    #[test]
    fn bounds_refuse_explicitly() {
        let b = Arc::new(unit_bundle(Arc::new(pair(5))));
        let d = OracleBounds::default();
        assert!(matches!(
            enumerate_ggts(&b, &b, &d),
            Err(Error::BoundExceeded { .. })
        ));
    }

    #[test]
    fn bounds_parse() {
        let b = OracleBounds::parse("total=8, base=2").unwrap();
        assert_eq!(b, OracleBounds { max_total: 8, max_arrows: 36, max_base: 2 });
        assert!(OracleBounds::parse("size=3").is_err());
        assert!(OracleBounds::parse("total").is_err());
    }
}
