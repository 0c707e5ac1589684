//! Seeded random generators of valid groupoids, bundles and HS morphisms.
//!
//! All generators draw from a ChaCha8 stream seeded by [`GeneratorSpec::seed`],
//! so identical generator settings give identical structures on every platform.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::builders::fixtures::{make_pair_groupoid, LibraryGroup};
use crate::bundle::{trivial_bundle, PrincipalBundle};
use crate::error::{Error, Result};
use crate::groupoid::{product_groupoid, FiniteGroupoid};
use crate::hs::{hs_from_groupoid_morphism, HsMorphism};
use crate::ids::{ArrowId, Labels, ObjectId, PointId};
use crate::morphism::GroupoidMorphism;

/// Seed and size bounds for the generators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GeneratorSpec {
    pub seed: u64,
    pub max_objects: usize,
    /// Largest block group drawn from the library.
    pub max_group_order: usize,
    pub max_arrows: usize,
    pub max_base: usize,
    /// Largest bundle total space.
    pub max_total: usize,
}

impl GeneratorSpec {
    pub fn new(seed: u64) -> Self {
        GeneratorSpec {
            seed,
            ..Default::default()
        }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed)
    }

    /// Settings with the same bounds and another seed.
    pub fn with_seed(self, seed: u64) -> Self {
        GeneratorSpec { seed, ..self }
    }

    fn check(&self) -> Result<()> {
        if self.max_objects == 0 || self.max_group_order == 0 || self.max_arrows == 0 || self.max_base == 0 || self.max_total == 0 {
            return Err(Error::Unsatisfiable("all bounds must be positive".into()));
        }
        Ok(())
    }
}

impl Default for GeneratorSpec {
    fn default() -> Self {
        GeneratorSpec {
            seed: 0,
            max_objects: 3,
            max_group_order: 6,
            max_arrows: 36,
            max_base: 3,
            max_total: 16,
        }
    }
}

/// Disjoint union of groupoids, labels prefixed by the part number.
pub fn disjoint_union(parts: &[FiniteGroupoid]) -> FiniteGroupoid {
    let mut objects = Vec::new();
    let mut arrows = Vec::new();
    let (mut source, mut target, mut unit, mut inverse) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    let n: usize = parts.iter().map(|g| g.arrow_count()).sum();
    let mut compose = vec![None; n * n];
    let (mut obase, mut abase) = (0usize, 0usize);
    for (i, g) in parts.iter().enumerate() {
        let oa = |x: ObjectId| ObjectId::from(obase + x.index());
        let aa = |a: ArrowId| ArrowId::from(abase + a.index());
        for x in g.object_ids() {
            objects.push(format!("{i}:{}", g.object_name(x)));
            unit.push(aa(g.unit(x)));
        }
        for a in g.arrow_ids() {
            arrows.push(format!("{i}:{}", g.arrow_name(a)));
            source.push(oa(g.source(a)));
            target.push(oa(g.target(a)));
            inverse.push(aa(g.inverse(a)));
            for &b in g.arrows_into(g.source(a)) {
                compose[aa(a).index() * n + aa(b).index()] = g.compose(a, b).map(aa);
            }
        }
        obase += g.object_count();
        abase += g.arrow_count();
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

/// Reorders objects and arrows: position `i` of the result holds old object
/// `objects[i]` (resp. arrow `arrows[i]`). Labels are kept.
pub fn permute_groupoid(g: &FiniteGroupoid, objects: &[ObjectId], arrows: &[ArrowId]) -> FiniteGroupoid {
    let mut onew = vec![ObjectId(0); g.object_count()];
    for (i, &x) in objects.iter().enumerate() {
        onew[x.index()] = ObjectId::from(i);
    }
    let mut anew = vec![ArrowId(0); g.arrow_count()];
    for (i, &a) in arrows.iter().enumerate() {
        anew[a.index()] = ArrowId::from(i);
    }
    let n = g.arrow_count();
    let mut compose = vec![None; n * n];
    for a in g.arrow_ids() {
        for &b in g.arrows_into(g.source(a)) {
            compose[anew[a.index()].index() * n + anew[b.index()].index()] = g.compose(a, b).map(|c| anew[c.index()]);
        }
    }
    FiniteGroupoid::from_parts(
        Labels::from_distinct(objects.iter().map(|&x| g.object_name(x))),
        Labels::from_distinct(arrows.iter().map(|&a| g.arrow_name(a))),
        arrows.iter().map(|&a| onew[g.source(a).index()]).collect(),
        arrows.iter().map(|&a| onew[g.target(a).index()]).collect(),
        objects.iter().map(|&x| anew[g.unit(x).index()]).collect(),
        arrows.iter().map(|&a| anew[g.inverse(a).index()]).collect(),
        compose,
    )
}

/// A disjoint union of blocks `Pair(k) × G` with `G` from the library,
/// listed in a shuffled order.
pub fn random_groupoid(spec: &GeneratorSpec) -> Result<FiniteGroupoid> {
    spec.check()?;
    let mut rng = spec.rng();
    let groups: Vec<LibraryGroup> = LibraryGroup::ALL
        .into_iter()
        .filter(|g| g.order() <= spec.max_group_order)
        .collect();
    let objects = rng.gen_range(1..=spec.max_objects);
    let mut remaining_objects = objects;
    let mut remaining_arrows = spec.max_arrows;
    let mut blocks = Vec::new();
    while remaining_objects > 0 {
        let sizes: Vec<usize> = (1..=remaining_objects).filter(|k| k * k <= remaining_arrows).collect();
        let Some(&k) = sizes.choose(&mut rng) else { break };
        let fitting: Vec<LibraryGroup> = groups
            .iter()
            .copied()
            .filter(|g| k * k * g.order() <= remaining_arrows)
            .collect();
        let group = *fitting.choose(&mut rng).expect("the trivial group always fits");
        blocks.push(product_groupoid(&make_pair_groupoid(k)?, &group.groupoid()));
        remaining_objects -= k;
        remaining_arrows -= k * k * group.order();
    }
    if blocks.is_empty() {
        return Err(Error::Unsatisfiable("no block fits the arrow bound".into()));
    }
    let union = disjoint_union(&blocks);
    let mut objects: Vec<ObjectId> = union.object_ids().collect();
    let mut arrows: Vec<ArrowId> = union.arrow_ids().collect();
    objects.shuffle(&mut rng);
    arrows.shuffle(&mut rng);
    Ok(permute_groupoid(&union, &objects, &arrows))
}

/// Reorders and renames the points of a bundle: position `i` holds old point
/// `order[i]` under the name `names[i]`.
pub fn relabel_bundle(b: &PrincipalBundle, order: &[PointId], names: Vec<String>) -> Result<PrincipalBundle> {
    let n = b.point_count();
    if order.len() != n || names.len() != n {
        return Err(Error::InvalidInput("relabelling must cover every point".into()));
    }
    let mut new_of = vec![None; n];
    for (i, &p) in order.iter().enumerate() {
        new_of[p.index()] = Some(PointId::from(i));
    }
    let new_of: Vec<PointId> = new_of
        .into_iter()
        .collect::<Option<_>>()
        .ok_or_else(|| Error::InvalidInput("relabelling is not a permutation".into()))?;
    let na = b.groupoid().arrow_count();
    let mut act = vec![None; n * na];
    for (i, &p) in order.iter().enumerate() {
        for &g in b.acting_arrows(p) {
            act[i * na + g.index()] = b.act(p, g).map(|q| new_of[q.index()]);
        }
    }
    PrincipalBundle::new(
        b.groupoid().clone(),
        Labels::new("point", names)?,
        b.base().clone(),
        order.iter().map(|&p| b.projection(p)).collect(),
        order.iter().map(|&p| b.momentum(p)).collect(),
        act,
    )
}

/// A random permutation of the points, with fresh names `prefix0`, `prefix1`, ….
fn shuffle_points<R: Rng>(b: &PrincipalBundle, prefix: &str, rng: &mut R) -> Result<(PrincipalBundle, Vec<PointId>)> {
    let mut order: Vec<PointId> = b.point_ids().collect();
    order.shuffle(rng);
    let names = (0..order.len()).map(|i| format!("{prefix}{i}")).collect();
    Ok((relabel_bundle(b, &order, names)?, order))
}

/// A base `m0, m1, …` of random size in `1..=max_base`.
pub fn random_base(spec: &GeneratorSpec) -> Result<Labels> {
    spec.check()?;
    let mut rng = spec.rng();
    let n = rng.gen_range(1..=spec.max_base);
    Labels::new("base point", (0..n).map(|i| format!("m{i}")))
}

/// A random groupoid together with a base small enough that every bundle
/// `α*U_G` over it fits within `max_total`.
pub fn random_setting(spec: &GeneratorSpec) -> Result<(Arc<FiniteGroupoid>, Labels)> {
    let g = random_groupoid(spec)?;
    let largest = g.object_ids().map(|x| g.arrows_into(x).len()).max().unwrap_or(1);
    let cap = spec.max_base.min(spec.max_total / largest);
    if cap == 0 {
        return Err(Error::Unsatisfiable(format!(
            "a fibre of {largest} points exceeds the total bound {}",
            spec.max_total
        )));
    }
    let mut rng = spec.with_seed(spec.seed ^ 0x5EED_BA5E).rng();
    let n = rng.gen_range(1..=cap);
    let base = Labels::new("base point", (0..n).map(|i| format!("m{i}")))?;
    Ok((Arc::new(g), base))
}

/// `α*U_G` for a random `α: base → objects`, with points shuffled and renamed.
///
/// Fails if no `α` keeps the total space within `max_total`.
pub fn random_bundle(g: Arc<FiniteGroupoid>, base: Labels, spec: &GeneratorSpec) -> Result<PrincipalBundle> {
    spec.check()?;
    let mut rng = spec.rng();
    let fibre = |x: ObjectId| g.arrows_into(x).len();
    let smallest = g.object_ids().map(fibre).min().unwrap_or(0);
    if g.object_count() == 0 || smallest * base.len() > spec.max_total {
        return Err(Error::Unsatisfiable(format!(
            "{} base points with fibres of at least {smallest} exceed {} points",
            base.len(),
            spec.max_total
        )));
    }
    let mut alpha = Vec::with_capacity(base.len());
    let mut budget = spec.max_total;
    for i in 0..base.len() {
        let reserve = smallest * (base.len() - i - 1);
        let options: Vec<ObjectId> = g.object_ids().filter(|&x| fibre(x) + reserve <= budget).collect();
        let x = *options.choose(&mut rng).expect("the smallest fibre always fits");
        budget -= fibre(x);
        alpha.push(x);
    }
    let t = trivial_bundle(g, base, &alpha)?;
    Ok(shuffle_points(&t, "p", &mut rng)?.0)
}

/// Connected components of `g`, each as a list of objects with the first as root.
fn components(g: &FiniteGroupoid) -> Vec<Vec<ObjectId>> {
    let mut seen = vec![false; g.object_count()];
    let mut out = Vec::new();
    for x in g.object_ids() {
        if seen[x.index()] {
            continue;
        }
        let mut comp = vec![x];
        seen[x.index()] = true;
        for &a in g.arrows_from(x) {
            let y = g.target(a);
            if !seen[y.index()] {
                seen[y.index()] = true;
                comp.push(y);
            }
        }
        out.push(comp);
    }
    out
}

/// A random group homomorphism between isotropy groups, found by
/// backtracking over shuffled candidates. The trivial map always works.
fn random_hom<R: Rng>(
    g: &FiniteGroupoid,
    dom: &[ArrowId],
    h: &FiniteGroupoid,
    cod: &[ArrowId],
    rng: &mut R,
) -> Vec<ArrowId> {
    let pos = |a: ArrowId| dom.iter().position(|&b| b == a).expect("closed");
    let mut image: Vec<Option<ArrowId>> = vec![None; dom.len()];
    fn go<R: Rng>(
        i: usize,
        g: &FiniteGroupoid,
        dom: &[ArrowId],
        h: &FiniteGroupoid,
        cod: &[ArrowId],
        image: &mut Vec<Option<ArrowId>>,
        pos: &dyn Fn(ArrowId) -> usize,
        rng: &mut R,
    ) -> bool {
        if i == dom.len() {
            return true;
        }
        let mut cands = cod.to_vec();
        cands.shuffle(rng);
        for c in cands {
            image[i] = Some(c);
            // Every product whose three factors are now assigned.
            let ok = (0..=i).all(|a| {
                (0..=i).all(|b| {
                    let ab = pos(g.mul(dom[a], dom[b]));
                    match (image[a], image[b], image[ab]) {
                        (Some(x), Some(y), Some(z)) => h.mul(x, y) == z,
                        _ => true,
                    }
                })
            });
            if ok && go(i + 1, g, dom, h, cod, image, pos, rng) {
                return true;
            }
        }
        image[i] = None;
        false
    }
    let found = go(0, g, dom, h, cod, &mut image, &pos, rng);
    debug_assert!(found);
    image.into_iter().map(|x| x.expect("assigned")).collect()
}

/// A random groupoid morphism `g → h`.
///
/// Per component of `g`: a root image, images of a spanning family of arrows
/// out of the root, and a random homomorphism of the root isotropy group;
/// every other arrow is transported through the spanning arrows.
pub fn random_morphism(g: Arc<FiniteGroupoid>, h: Arc<FiniteGroupoid>, spec: &GeneratorSpec) -> Result<GroupoidMorphism> {
    spec.check()?;
    let mut rng = spec.rng();
    if h.object_count() == 0 {
        return Err(Error::Unsatisfiable("codomain has no objects".into()));
    }
    let mut object_map = vec![ObjectId(0); g.object_count()];
    let mut arrow_map = vec![ArrowId(0); g.arrow_count()];
    for comp in components(&g) {
        let x0 = comp[0];
        let y0 = ObjectId::from(rng.gen_range(0..h.object_count()));
        // Spanning arrows x0 → x and their images y0 → φ(x).
        let mut span = vec![None; g.object_count()];
        for &x in &comp {
            let a = g.hom(x0, x).next().expect("connected");
            let a = if x == x0 { g.unit(x0) } else { a };
            let outs: Vec<ArrowId> = h.arrows_from(y0).to_vec();
            let b = if x == x0 { h.unit(y0) } else { *outs.choose(&mut rng).expect("units exist") };
            object_map[x.index()] = h.target(b);
            span[x.index()] = Some((a, b));
        }
        let dom: Vec<ArrowId> = g.hom(x0, x0).collect();
        let cod: Vec<ArrowId> = h.hom(y0, y0).collect();
        let rho = random_hom(&g, &dom, &h, &cod, &mut rng);
        for &x in &comp {
            for &y in &comp {
                let (ax, bx) = span[x.index()].expect("spanned");
                let (ay, by) = span[y.index()].expect("spanned");
                for a in g.hom(x, y) {
                    let loop_ = g.mul3(g.inverse(ay), a, ax);
                    let r = rho[dom.iter().position(|&d| d == loop_).expect("loop at root")];
                    arrow_map[a.index()] = h.mul3(by, r, h.inverse(bx));
                }
            }
        }
    }
    GroupoidMorphism::new(g, h, arrow_map, object_map)
}

/// `hs_from_groupoid_morphism` of a random morphism, with points shuffled and
/// renamed. Retries other seeds within the same bounds if the total is too large.
pub fn random_hs(g: Arc<FiniteGroupoid>, h: Arc<FiniteGroupoid>, spec: &GeneratorSpec) -> Result<HsMorphism> {
    spec.check()?;
    let mut rng = spec.rng();
    for attempt in 0..32u64 {
        let sub = spec.with_seed(spec.seed.wrapping_mul(0x9E37_79B9).wrapping_add(attempt));
        let m = random_morphism(g.clone(), h.clone(), &sub)?;
        let hs = hs_from_groupoid_morphism(&m)?;
        if hs.bundle().point_count() > spec.max_total {
            continue;
        }
        let (bundle, order) = shuffle_points(hs.bundle(), "q", &mut rng)?;
        let mut new_of = vec![PointId(0); order.len()];
        for (i, &p) in order.iter().enumerate() {
            new_of[p.index()] = PointId::from(i);
        }
        let na = g.arrow_count();
        let mut act = vec![None; order.len() * na];
        for (i, &p) in order.iter().enumerate() {
            for &x in hs.left_acting(p) {
                act[i * na + x.index()] = hs.left_act(x, p).map(|q| new_of[q.index()]);
            }
        }
        return HsMorphism::new(g, Arc::new(bundle), act);
    }
    Err(Error::Unsatisfiable(format!(
        "no HS morphism with at most {} points found",
        spec.max_total
    )))
}

/// A random left action of a library group: a disjoint union of coset
/// spaces `G/K`. Returns the group, point names and `act[g][m]`.
pub fn random_group_action(spec: &GeneratorSpec) -> Result<(FiniteGroupoid, Vec<String>, Vec<Vec<usize>>)> {
    spec.check()?;
    let mut rng = spec.rng();
    let groups: Vec<LibraryGroup> = LibraryGroup::ALL
        .into_iter()
        .filter(|g| g.order() <= spec.max_group_order)
        .collect();
    let group = groups.choose(&mut rng).expect("the trivial group always fits").groupoid();
    let n = group.arrow_count();
    let subgroups: Vec<Vec<ArrowId>> = (1u32..(1 << n))
        .map(|mask| group.arrow_ids().filter(|a| mask & (1 << a.0) != 0).collect::<Vec<_>>())
        .filter(|s| s.iter().all(|&a| s.iter().all(|&b| s.contains(&group.mul(a, b)))))
        .collect();
    let orbits = rng.gen_range(1..=spec.max_objects);
    // Each point is a coset gK, tagged with its orbit.
    let mut members: Vec<(usize, Vec<ArrowId>)> = Vec::new();
    for orbit in 0..orbits {
        let k = subgroups.choose(&mut rng).expect("the whole group is a subgroup");
        for g in group.arrow_ids() {
            let mut c: Vec<ArrowId> = k.iter().map(|&x| group.mul(g, x)).collect();
            c.sort();
            if !members.contains(&(orbit, c.clone())) {
                members.push((orbit, c));
            }
        }
    }
    let points: Vec<String> = (0..members.len()).map(|i| format!("c{i}")).collect();
    let mut act = vec![vec![0; points.len()]; n];
    for g in group.arrow_ids() {
        for (m, (orbit, coset)) in members.iter().enumerate() {
            let mut moved: Vec<ArrowId> = coset.iter().map(|&x| group.mul(g, x)).collect();
            moved.sort();
            let target = members
                .iter()
                .position(|(o, c)| o == orbit && *c == moved)
                .expect("cosets are permuted");
            act[g.index()][m] = target;
        }
    }
    Ok((group, points, act))
}
