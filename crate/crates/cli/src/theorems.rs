//! Validators per document kind and the seeded theorem suite.

use std::collections::BTreeSet;
use std::sync::Arc;

use gengauge::builders::fixtures::LibraryGroup;
use gengauge::builders::oracle::{enumerate_bundle_morphisms, enumerate_ggts, OracleBounds};
use gengauge::builders::random::{random_bundle, random_groupoid, random_hs, random_setting, GeneratorSpec};
use gengauge::hs::{enumerate_hs_ggts, enumerate_hs_morphisms};
use gengauge::{
    build_gauge_groupoid, build_hs_gauge_groupoid, check_division_invariance, gauge_group, ggt_to_morphism,
    morphism_to_ggt, star, unit_bundle, validate_action, validate_bundle, validate_bundle_morphism, validate_ggt,
    validate_groupoid, validate_hs, validate_hs_morphism, validate_morphism, verify_division_properties,
    verify_hs_division_properties, ArrowId, Error, FiniteGroupoid, Ggt, GroupPresentation, HsMorphism,
    PrincipalBundle, ValidationReport,
};

use crate::document::Loaded;
use crate::report::{Check, Report};

fn groupoid_report(label: &str, g: &FiniteGroupoid) -> ValidationReport {
    let mut r = ValidationReport::new(label);
    r.merge(validate_groupoid(g));
    r
}

fn bundle_report(b: &PrincipalBundle) -> ValidationReport {
    let mut r = groupoid_report("bundle", b.groupoid());
    let own = validate_bundle(b);
    let principal = own.is_ok();
    r.merge(own);
    if principal && r.is_ok() {
        r.merge(verify_division_properties(b));
    }
    r
}

fn hs_report(h: &HsMorphism) -> ValidationReport {
    let mut r = groupoid_report("HS morphism", h.left_groupoid());
    r.merge(validate_groupoid(h.right_groupoid()));
    let own = validate_hs(h);
    let fine = own.is_ok() && r.is_ok();
    r.merge(own);
    if fine {
        r.merge(verify_hs_division_properties(h));
    }
    r
}

/// Runs every validator that applies to a loaded document.
pub fn validate_loaded(l: &Loaded) -> ValidationReport {
    match l {
        Loaded::Groupoid(g) => validate_groupoid(g),
        Loaded::Morphism(m) => {
            let mut r = groupoid_report("groupoid morphism", m.domain());
            if !Arc::ptr_eq(m.domain(), m.codomain()) {
                r.merge(validate_groupoid(m.codomain()));
            }
            r.merge(validate_morphism(m));
            r
        }
        Loaded::Action(a) => {
            let mut r = groupoid_report("action", a.groupoid());
            r.merge(validate_action(a));
            r
        }
        Loaded::Bundle(b) => bundle_report(b),
        Loaded::BundleMorphism(s) => {
            let mut r = bundle_report(s.source());
            if !Arc::ptr_eq(s.source(), s.target()) {
                r.merge(bundle_report(s.target()));
            }
            r.merge(validate_bundle_morphism(s));
            r
        }
        Loaded::Ggt(k) => {
            let mut r = bundle_report(k.source());
            if !Arc::ptr_eq(k.source(), k.target()) {
                r.merge(bundle_report(k.target()));
            }
            r.merge(validate_ggt(k));
            r
        }
        Loaded::Hs(h) => hs_report(h),
        Loaded::HsMorphism(h1, h2, s) => {
            let mut r = hs_report(h1);
            r.merge(hs_report(h2));
            match validate_hs_morphism(h1, h2, s) {
                Ok(own) => r.merge(own),
                Err(e) => r.push("hs-morphism.shape", vec![], e.to_string()),
            }
            r
        }
    }
}

/// Seed and size knobs of the theorem suite.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Settings {
    pub seed: u64,
    /// Largest bundle total space generated.
    pub max_size: usize,
}

impl Default for Settings {
    fn default() -> Self {
        Settings { seed: 42, max_size: 16 }
    }
}

impl Settings {
    fn spec(&self, tag: u64, i: u64) -> GeneratorSpec {
        let seed = self
            .seed
            .wrapping_mul(0x9E37_79B9_7F4A_7C15)
            .wrapping_add(tag.wrapping_mul(1_000_003))
            .wrapping_add(i);
        GeneratorSpec {
            max_total: self.max_size,
            ..GeneratorSpec::new(seed)
        }
    }

    fn bounds(&self) -> OracleBounds {
        let d = OracleBounds::default();
        OracleBounds {
            max_total: d.max_total.max(self.max_size),
            ..d
        }
    }

    /// `count` families of `size` bundles sharing a groupoid and base.
    fn families(&self, tag: u64, count: usize, size: usize) -> Vec<Vec<Arc<PrincipalBundle>>> {
        let mut out = Vec::with_capacity(count);
        let mut i = 0u64;
        while out.len() < count && i < 100 * count as u64 {
            let spec = self.spec(tag, i);
            i += 1;
            let Ok((g, base)) = random_setting(&spec) else { continue };
            let family: Option<Vec<_>> = (0..size as u64)
                .map(|j| random_bundle(g.clone(), base.clone(), &spec.with_seed(spec.seed ^ ((j + 1) * 0x51))).ok())
                .map(|b| b.map(Arc::new))
                .collect();
            if let Some(f) = family {
                out.push(f);
            }
        }
        out
    }

    /// `count` pairs of HS morphisms between the same two groupoids.
    fn hs_pairs(&self, tag: u64, count: usize) -> Vec<(Arc<HsMorphism>, Arc<HsMorphism>)> {
        let mut out = Vec::with_capacity(count);
        let mut i = 0u64;
        while out.len() < count && i < 50 * count as u64 {
            let spec = GeneratorSpec {
                max_objects: 2,
                ..self.spec(tag, i)
            };
            i += 1;
            let (Ok(g), Ok(h)) = (random_groupoid(&spec), random_groupoid(&spec.with_seed(spec.seed ^ 0xABCD))) else {
                continue;
            };
            let (g, h) = (Arc::new(g), Arc::new(h));
            let Ok(a) = random_hs(g.clone(), h.clone(), &spec) else { continue };
            let b = random_hs(g, h, &spec.with_seed(spec.seed.wrapping_add(1))).unwrap_or_else(|_| a.clone());
            out.push((Arc::new(a), Arc::new(b)));
        }
        out
    }
}

fn key(k: &Ggt) -> Vec<Option<ArrowId>> {
    k.values().to_vec()
}

fn names(b: &PrincipalBundle, w: &[gengauge::PointId]) -> Vec<String> {
    w.iter().map(|&p| b.point_name(p).to_string()).collect()
}

/// Compares the oracle lists of one pair: equal counts, equal images under
/// the correspondence, and round trips in both directions.
fn correspondence(
    c: &mut Check,
    inv: &mut Check,
    instance: &str,
    ms: &[gengauge::BundleMorphism],
    ks: &[Ggt],
) -> Result<(), Error> {
    c.instances += 1;
    if ms.len() != ks.len() {
        c.fail(
            instance,
            "correspondence.count",
            vec![ms.len().to_string(), ks.len().to_string()],
            "morphism and GGT counts differ",
        );
    }
    let image: BTreeSet<_> = ms.iter().map(|s| morphism_to_ggt(s).map(|k| key(&k))).collect::<Result<_, _>>()?;
    let oracle: BTreeSet<_> = ks.iter().map(key).collect();
    if image != oracle {
        c.fail(instance, "correspondence.image", vec![], "K_σ over all σ differs from the enumerated GGTs");
    }
    for s in ms {
        let back = ggt_to_morphism(&morphism_to_ggt(s)?)?;
        if back.map() != s.map() {
            c.fail(instance, "correspondence.round-trip", names(s.source(), s.map()), "σ_(K_σ) differs from σ");
        }
        inv.instances += 1;
        inv.absorb(instance, &check_division_invariance(s));
    }
    for k in ks {
        let back = morphism_to_ggt(&ggt_to_morphism(k)?)?;
        if !back.same_values(k) {
            c.fail(instance, "correspondence.round-trip", vec![], "K_(σ_K) differs from K");
        }
    }
    Ok(())
}

fn failed(c: &mut Check, instance: &str, e: Error) {
    c.fail(instance, "error", vec![], e.to_string());
}

/// Runs the full suite: fixture axioms, then each theorem on seeded random
/// instances. `fixtures` holds each fixture's name and load outcome.
pub fn check_theorems(fixtures: &[(String, Result<Loaded, String>)], settings: Settings) -> Report {
    let mut report = Report::new("check-theorems");
    let bounds = settings.bounds();

    let mut fx = Check::new("fixture-axioms", "every fixture satisfies the axioms of its kind");
    for (name, loaded) in fixtures {
        fx.instances += 1;
        match loaded {
            Ok(l) => fx.absorb(name, &validate_loaded(l)),
            Err(e) => fx.fail(name, "document.schema", vec![], e.clone()),
        }
    }
    report.push(fx);

    let mut div = Check::new(
        "division-map-properties",
        "the division map is defined on fibre pairs, endpoint-correct, unital, inverse-symmetric, equivariant, and p·φ(p,q) = q",
    );
    for (i, f) in settings.families(1, 100, 1).into_iter().enumerate() {
        let b = &f[0];
        let inst = format!("bundle#{i}");
        div.instances += 1;
        div.absorb(&inst, &validate_bundle(b));
        div.absorb(&inst, &verify_division_properties(b));
        for (p, q) in b.fibred_pairs() {
            match b.division(p, q) {
                Ok(g) if b.act(p, g) == Some(q) => {}
                _ => div.fail(&inst, "division.recovers", names(b, &[p, q]), "p·φ(p,q) differs from q"),
            }
        }
    }
    report.push(div);

    let mut unit = Check::new("unit-bundle-division", "on a unit bundle φ(g,h) = g⁻¹·h");
    let mut groupoids: Vec<(String, Arc<FiniteGroupoid>)> = LibraryGroup::ALL
        .iter()
        .map(|lg| (format!("{lg:?}"), Arc::new(lg.groupoid())))
        .collect();
    for (name, l) in fixtures {
        if let Ok(Loaded::Groupoid(g)) = l {
            if validate_groupoid(g).is_ok() {
                groupoids.push((name.clone(), g.clone()));
            }
        }
    }
    for (name, g) in &groupoids {
        unit.instances += 1;
        let b = unit_bundle(g.clone());
        for (p, q) in b.fibred_pairs() {
            // Points of the unit bundle are the arrows themselves.
            let (Ok(x), Ok(y)) = (g.arrow(b.point_name(p)), g.arrow(b.point_name(q))) else {
                unit.fail(name, "division.unit-formula", names(&b, &[p, q]), "unit bundle point is not an arrow");
                continue;
            };
            let expected = g.compose(g.inverse(x), y);
            if b.division(p, q).ok() != expected {
                unit.fail(name, "division.unit-formula", names(&b, &[p, q]), "φ(g,h) differs from g⁻¹·h");
            }
        }
    }
    report.push(unit);

    let mut corr = Check::new(
        "morphism-ggt-correspondence",
        "σ ↦ K_σ and K ↦ σ_K are mutually inverse bijections between bundle morphisms and GGTs",
    );
    let mut inv = Check::new("division-invariance", "every bundle morphism satisfies φ2(σ(p),σ(q)) = φ1(p,q)");
    for (i, f) in settings.families(2, 50, 2).into_iter().enumerate() {
        let inst = format!("pair#{i}");
        let run = || -> Result<_, Error> {
            Ok((
                enumerate_bundle_morphisms(&f[0], &f[1], &bounds)?,
                enumerate_ggts(&f[0], &f[1], &bounds)?,
            ))
        };
        match run().and_then(|(ms, ks)| correspondence(&mut corr, &mut inv, &inst, &ms, &ks)) {
            Ok(()) => {}
            Err(e) => failed(&mut corr, &inst, e),
        }
    }
    report.push(corr);
    report.push(inv);

    let mut func = Check::new("ggt-composition", "K_(σ23∘σ12) = K23 ⋆ K12");
    for (i, f) in settings.families(3, 20, 3).into_iter().enumerate() {
        let inst = format!("triple#{i}");
        let run = |func: &mut Check| -> Result<(), Error> {
            let m12 = enumerate_bundle_morphisms(&f[0], &f[1], &bounds)?;
            let m23 = enumerate_bundle_morphisms(&f[1], &f[2], &bounds)?;
            for s12 in m12.iter().take(3) {
                for s23 in m23.iter().take(3) {
                    func.instances += 1;
                    let lhs = morphism_to_ggt(&s23.after(s12)?)?;
                    let rhs = star(&morphism_to_ggt(s23)?, &morphism_to_ggt(s12)?)?;
                    if !lhs.same_values(&rhs) {
                        func.fail(&inst, "ggt.functoriality", vec![], "K of a composite differs from the ⋆ product");
                    }
                }
            }
            Ok(())
        };
        if let Err(e) = run(&mut func) {
            failed(&mut func, &inst, e);
        }
    }
    report.push(func);

    let mut gg = Check::new(
        "gauge-groupoid",
        "GGTs between bundles over one base form a groupoid under ⋆ whose isotropy at P is the gauge group of P",
    );
    for (i, f) in settings
        .families(4, 12, 3)
        .into_iter()
        .enumerate()
        .map(|(i, f)| (i, f[..1 + i % 3].to_vec()))
    {
        let inst = format!("family#{i}");
        gg.instances += 1;
        let named = f.iter().enumerate().map(|(j, b)| (format!("P{j}"), b.clone())).collect();
        let run = |gg: &mut Check| -> Result<(), Error> {
            let gpd = build_gauge_groupoid(named, &bounds)?;
            gg.absorb(&inst, &validate_groupoid(&gpd.export()?));
            for (j, b) in f.iter().enumerate() {
                let iso: BTreeSet<_> = gpd.isotropy_elements(j)?.into_iter().collect();
                let gau: BTreeSet<_> = gauge_group(b)?.elements.into_iter().collect();
                if iso != gau {
                    gg.fail(&inst, "gauge.isotropy-is-gauge-group", vec![format!("P{j}")], "isotropy differs from the gauge group");
                }
            }
            Ok(())
        };
        if let Err(e) = run(&mut gg) {
            failed(&mut gg, &inst, e);
        }
    }
    for lg in [LibraryGroup::Z2, LibraryGroup::S3] {
        gg.instances += 1;
        let inst = format!("unit-{lg:?}");
        let g = lg.groupoid();
        let run = || -> Result<bool, Error> {
            let gau = gauge_group(&unit_bundle(Arc::new(g.clone())))?;
            let own = GroupPresentation::of_group(&g)?;
            Ok(gau.order() == g.arrow_count() && gau.find_isomorphism(&own).is_some())
        };
        match run() {
            Ok(true) => {}
            Ok(false) => gg.fail(&inst, "gauge.unit-bundle", vec![], "gauge group of the unit bundle is not the group"),
            Err(e) => failed(&mut gg, &inst, e),
        }
    }
    report.push(gg);

    let mut hdiv = Check::new("hs-division-invariance", "the division map of an HS morphism is invariant under the left action");
    let mut hcorr = Check::new(
        "hs-morphism-ggt-correspondence",
        "HS morphisms between two HS bundles correspond to invariant GGTs",
    );
    let mut hgg = Check::new(
        "hs-gauge-groupoid",
        "invariant GGTs form a wide subgroupoid of the gauge groupoid of the underlying bundles",
    );
    for (i, (a, b)) in settings.hs_pairs(5, 30).into_iter().enumerate() {
        let inst = format!("hs#{i}");
        hdiv.instances += 1;
        hdiv.absorb(&inst, &validate_hs(&a));
        hdiv.absorb(&inst, &verify_hs_division_properties(&a));
        hcorr.instances += 1;
        hgg.instances += 1;
        let run = |hcorr: &mut Check, hgg: &mut Check| -> Result<(), Error> {
            let ms = enumerate_hs_morphisms(&a, &b, &bounds)?;
            let ks = enumerate_hs_ggts(&a, &b, &bounds)?;
            if ms.len() != ks.len() {
                hcorr.fail(
                    &inst,
                    "hs-correspondence.count",
                    vec![ms.len().to_string(), ks.len().to_string()],
                    "HS morphism and invariant GGT counts differ",
                );
            }
            let image: BTreeSet<_> = ms.iter().map(|s| morphism_to_ggt(s).map(|k| key(&k))).collect::<Result<_, _>>()?;
            if image != ks.iter().map(key).collect() {
                hcorr.fail(&inst, "hs-correspondence.image", vec![], "K_σ over HS morphisms differs from the invariant GGTs");
            }
            let family = vec![("A".to_string(), a.clone()), ("B".to_string(), b.clone())];
            let hs_gpd = build_hs_gauge_groupoid(family, &bounds)?;
            hgg.absorb(&inst, &validate_groupoid(&hs_gpd.export()?));
            let full = build_gauge_groupoid(
                vec![("A".into(), a.bundle().clone()), ("B".into(), b.bundle().clone())],
                &bounds,
            )?;
            for (n, arrow) in hs_gpd.arrows.iter().enumerate() {
                if full.lookup(arrow.source, arrow.target, &arrow.ggt).is_none() {
                    hgg.fail(&inst, "hs-gauge.subset", vec![hs_gpd.arrow_name(n)], "arrow missing from the bundle gauge groupoid");
                }
            }
            Ok(())
        };
        if let Err(e) = run(&mut hcorr, &mut hgg) {
            failed(&mut hcorr, &inst, e);
        }
    }
    report.push(hdiv);
    report.push(hcorr);
    report.push(hgg);

    report.result = serde_json::json!({ "seed": settings.seed, "max_size": settings.max_size });
    report
}
