//! Acceptance suite: one PASS/FAIL line per criterion, with pinned limits.
//!
//! Runs without the libtest harness so the lines always reach the output.

use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;
use std::process::Command;
use std::sync::Arc;
use std::time::{Duration, Instant};

use gengauge::builders::fixtures::{fixture_groupoids, LibraryGroup};
use gengauge::builders::oracle::{enumerate_bundle_morphisms, enumerate_ggts, OracleBounds};
use gengauge::builders::random::{random_bundle, random_groupoid, random_hs, random_setting, GeneratorSpec};
use gengauge::hs::{enumerate_hs_ggts, enumerate_hs_morphisms};
use gengauge::{
    build_gauge_groupoid, build_hs_gauge_groupoid, check_division_invariance, gauge_group, ggt_to_morphism,
    morphism_to_ggt, unit_bundle, validate_bundle, validate_groupoid, verify_division_properties,
    verify_hs_division_properties, FiniteGroupoid, GroupPresentation, GroupoidTables, HsMorphism, PrincipalBundle,
};
use gengauge_cli::document::{load, serialize, Document};
use gengauge_cli::fixtures::builtin;
use gengauge_cli::theorems::validate_loaded;

const LIMIT_1: Duration = Duration::from_secs(5);
const LIMIT_2: Duration = Duration::from_secs(30);
const LIMIT_3: Duration = Duration::from_secs(60);
const LIMIT_6: Duration = Duration::from_secs(60);
const MAX_TOTAL: usize = 16;

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("took {t:.2?}, limit {limit:?}"))
}

/// Raw string tables, used to re-check witnesses without the library.
struct Raw {
    source: HashMap<String, String>,
    target: HashMap<String, String>,
    unit: HashMap<String, String>,
    inverse: HashMap<String, String>,
    compose: HashMap<(String, String), String>,
    arrows: Vec<String>,
}

impl Raw {
    fn of(t: &GroupoidTables) -> Self {
        Raw {
            source: t.source.iter().cloned().collect(),
            target: t.target.iter().cloned().collect(),
            unit: t.unit.iter().cloned().collect(),
            inverse: t.inverse.iter().cloned().collect(),
            compose: t.compose.iter().map(|(a, b, c)| ((a.clone(), b.clone()), c.clone())).collect(),
            arrows: t.arrows.clone(),
        }
    }

    fn mul(&self, a: &str, b: &str) -> Option<&String> {
        self.compose.get(&(a.to_string(), b.to_string()))
    }

    /// Whether the named axiom really fails at the witness.
    fn fails(&self, rule: &str, w: &[String]) -> bool {
        let s = |a: &str| &self.source[a];
        let t = |a: &str| &self.target[a];
        match (rule, w) {
            ("groupoid.composition-domain", [a, b]) => (s(a) == t(b)) != self.mul(a, b).is_some(),
            ("groupoid.composition-endpoints", [a, b]) => {
                self.mul(a, b).is_some_and(|c| s(c) != s(b) || t(c) != t(a))
            }
            ("groupoid.unit-endpoints", [x]) => s(&self.unit[x]) != x || t(&self.unit[x]) != x,
            ("groupoid.left-unit", [a]) => self.mul(&self.unit[t(a)], a).is_some_and(|c| c != a),
            ("groupoid.right-unit", [a]) => self.mul(a, &self.unit[s(a)]).is_some_and(|c| c != a),
            ("groupoid.inverse-endpoints", [a]) => {
                let i = &self.inverse[a];
                s(i) != t(a) || t(i) != s(a)
            }
            ("groupoid.inverse-target", [a]) => {
                self.mul(a, &self.inverse[a]).is_some_and(|c| *c != self.unit[t(a)])
            }
            ("groupoid.inverse-source", [a]) => {
                self.mul(&self.inverse[a], a).is_some_and(|c| *c != self.unit[s(a)])
            }
            ("groupoid.associativity", [a, b, c]) => {
                let lhs = self.mul(a, b).and_then(|ab| self.mul(ab, c));
                let rhs = self.mul(b, c).and_then(|bc| self.mul(a, bc));
                matches!((lhs, rhs), (Some(l), Some(r)) if l != r)
            }
            ("groupoid.involutive-inverse", [a]) => self.inverse[&self.inverse[a]] != *a,
            ("groupoid.target-surjective", [x]) => !self.arrows.iter().any(|a| t(a) == x),
            _ => false,
        }
    }
}

/// Every table with one entry's value replaced by another id of the right kind.
fn mutations(t: &GroupoidTables) -> Vec<(String, GroupoidTables)> {
    let mut out = Vec::new();
    let swap = |vals: &[String], cur: &str| vals.iter().filter(|v| *v != cur).cloned().collect::<Vec<_>>();
    for i in 0..t.arrows.len() {
        for v in swap(&t.objects, &t.source[i].1) {
            let mut m = t.clone();
            m.source[i].1 = v.clone();
            out.push((format!("source[{}] := {v}", t.source[i].0), m));
        }
        for v in swap(&t.objects, &t.target[i].1) {
            let mut m = t.clone();
            m.target[i].1 = v.clone();
            out.push((format!("target[{}] := {v}", t.target[i].0), m));
        }
        for v in swap(&t.arrows, &t.inverse[i].1) {
            let mut m = t.clone();
            m.inverse[i].1 = v.clone();
            out.push((format!("inverse[{}] := {v}", t.inverse[i].0), m));
        }
    }
    for i in 0..t.objects.len() {
        for v in swap(&t.arrows, &t.unit[i].1) {
            let mut m = t.clone();
            m.unit[i].1 = v.clone();
            out.push((format!("unit[{}] := {v}", t.unit[i].0), m));
        }
    }
    for i in 0..t.compose.len() {
        for v in swap(&t.arrows, &t.compose[i].2) {
            let mut m = t.clone();
            m.compose[i].2 = v.clone();
            out.push((format!("compose[{},{}] := {v}", t.compose[i].0, t.compose[i].1), m));
        }
    }
    out
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut killed = 0;
    let fixtures = fixture_groupoids();
    for (name, g) in &fixtures {
        let r = validate_groupoid(g);
        ensure(r.is_ok(), || format!("fixture {name} rejected: {:?}", r.violations))?;
        let t = g.to_tables();
        for (what, m) in mutations(&t) {
            let mg = FiniteGroupoid::from_tables(&m).map_err(|e| format!("{name} {what}: {e}"))?;
            let r = validate_groupoid(&mg);
            ensure(!r.is_ok(), || format!("{name}: mutation {what} accepted"))?;
            let raw = Raw::of(&m);
            for v in r.violations.iter().chain(&r.derived) {
                ensure(raw.fails(v.rule, &v.witness), || {
                    format!("{name} {what}: witness {:?} does not exhibit {}", v.witness, v.rule)
                })?;
            }
            killed += 1;
        }
    }
    within(start, LIMIT_1)?;
    Ok(format!(
        "{} fixtures valid; {killed} single-entry mutations rejected, every witness re-checked ({:.2?})",
        fixtures.len(),
        start.elapsed()
    ))
}

fn random_bundles(count: usize, tag: u64) -> Vec<Arc<PrincipalBundle>> {
    (0..count as u64)
        .map(|i| {
            let spec = GeneratorSpec::new(tag * 10_000 + i);
            let (g, base) = random_setting(&spec).expect("satisfiable setting");
            Arc::new(random_bundle(g, base, &spec.with_seed(spec.seed + 1)).expect("bundle fits"))
        })
        .collect()
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0usize;
    for (i, b) in random_bundles(100, 2).iter().enumerate() {
        ensure(b.point_count() <= MAX_TOTAL, || format!("bundle {i} has {} points", b.point_count()))?;
        ensure(validate_bundle(b).is_ok(), || format!("bundle {i} is not principal"))?;
        let r = verify_division_properties(b);
        ensure(r.is_ok(), || format!("bundle {i}: {:?}", r.violations))?;
        for (p, q) in b.fibred_pairs() {
            let g = b.division(p, q).map_err(|e| e.to_string())?;
            ensure(b.act(p, g) == Some(q), || format!("bundle {i}: p·φ(p,q) != q"))?;
            pairs += 1;
        }
    }
    let mut groupoids: Vec<FiniteGroupoid> = LibraryGroup::ALL.iter().map(|g| g.groupoid()).collect();
    groupoids.extend(fixture_groupoids().into_iter().map(|(_, g)| g));
    groupoids.extend((0..50).map(|s| random_groupoid(&GeneratorSpec::new(20_000 + s)).expect("groupoid")));
    let units = groupoids.len();
    for g in groupoids {
        let g = Arc::new(g);
        let b = unit_bundle(g.clone());
        for (p, q) in b.fibred_pairs() {
            let (x, y) = (g.arrow(b.point_name(p)).unwrap(), g.arrow(b.point_name(q)).unwrap());
            let expected = g.compose(g.inverse(x), y);
            ensure(b.division(p, q).ok() == expected, || {
                format!("unit bundle: φ({},{}) != g⁻¹h", b.point_name(p), b.point_name(q))
            })?;
        }
    }
    within(start, LIMIT_2)?;
    Ok(format!(
        "100 random bundles, {pairs} fibre pairs, zero violations; φ = g⁻¹h on {units} unit bundles ({:.2?})",
        start.elapsed()
    ))
}

struct PairRun {
    morphisms: Vec<gengauge::BundleMorphism>,
}

fn criterion_3_and_4() -> (Outcome, Outcome) {
    let start = Instant::now();
    let bounds = OracleBounds::default();
    let mut runs = Vec::new();
    let mut nonempty = 0;
    let mut total = 0;
    let three = (|| -> Result<(), String> {
        for i in 0..50u64 {
            let spec = GeneratorSpec::new(30_000 + i);
            let (g, base) = random_setting(&spec).map_err(|e| e.to_string())?;
            let a = Arc::new(random_bundle(g.clone(), base.clone(), &spec.with_seed(spec.seed + 1)).unwrap());
            let b = Arc::new(random_bundle(g, base, &spec.with_seed(spec.seed + 2)).unwrap());
            let ms = enumerate_bundle_morphisms(&a, &b, &bounds).map_err(|e| e.to_string())?;
            let ks = enumerate_ggts(&a, &b, &bounds).map_err(|e| e.to_string())?;
            ensure(ms.len() == ks.len(), || format!("pair {i}: {} morphisms vs {} GGTs", ms.len(), ks.len()))?;
            for s in &ms {
                let back = ggt_to_morphism(&morphism_to_ggt(s).unwrap()).unwrap();
                ensure(back.map() == s.map(), || format!("pair {i}: σ_(K_σ) != σ"))?;
            }
            for k in &ks {
                let back = morphism_to_ggt(&ggt_to_morphism(k).unwrap()).unwrap();
                ensure(back.same_values(k), || format!("pair {i}: K_(σ_K) != K"))?;
            }
            if !ms.is_empty() {
                nonempty += 1;
            }
            total += ms.len();
            runs.push(PairRun { morphisms: ms });
        }
        ensure(nonempty >= 10, || format!("only {nonempty} pairs have any morphism"))?;
        within(start, LIMIT_3)
    })();
    let three = three.map(|()| {
        format!(
            "50 pairs, {total} morphisms = {total} GGTs, {nonempty} pairs non-empty, both round trips exact ({:.2?})",
            start.elapsed()
        )
    });
    let four = (|| -> Outcome {
        ensure(!runs.is_empty(), || "no morphisms from criterion 3".into())?;
        let mut n = 0;
        for run in &runs {
            for s in &run.morphisms {
                let r = check_division_invariance(s);
                ensure(r.is_ok(), || format!("{:?}", r.violations))?;
                n += 1;
            }
        }
        Ok(format!("φ2∘(σ×σ) = φ1 for all {n} morphisms"))
    })();
    (three, four)
}

fn criterion_5() -> Outcome {
    let start = Instant::now();
    let bounds = OracleBounds::default();
    let mut arrows = 0;
    for i in 0..15u64 {
        let spec = GeneratorSpec::new(50_000 + i);
        let (g, base) = random_setting(&spec).map_err(|e| e.to_string())?;
        let size = 1 + (i as usize % 3);
        let family: Vec<(String, Arc<PrincipalBundle>)> = (0..size as u64)
            .map(|j| {
                let b = random_bundle(g.clone(), base.clone(), &spec.with_seed(spec.seed * 7 + j)).unwrap();
                (format!("P{j}"), Arc::new(b))
            })
            .collect();
        let gg = build_gauge_groupoid(family.clone(), &bounds).map_err(|e| e.to_string())?;
        let exported = gg.export().map_err(|e| e.to_string())?;
        let r = validate_groupoid(&exported);
        ensure(r.is_ok(), || format!("family {i}: {:?}", r.violations))?;
        arrows += exported.arrow_count();
        for (j, (_, b)) in family.iter().enumerate() {
            let iso: BTreeSet<_> = gg.isotropy_elements(j).map_err(|e| e.to_string())?.into_iter().collect();
            let gau: BTreeSet<_> = gauge_group(b).map_err(|e| e.to_string())?.elements.into_iter().collect();
            ensure(iso == gau, || format!("family {i}: isotropy at P{j} differs from the gauge group"))?;
        }
    }
    for lg in [LibraryGroup::Z2, LibraryGroup::S3] {
        let g = lg.groupoid();
        let gau = gauge_group(&unit_bundle(Arc::new(g.clone()))).map_err(|e| e.to_string())?;
        ensure(gau.order() == lg.order(), || format!("{lg:?}: gauge group has {} elements", gau.order()))?;
        let own = GroupPresentation::of_group(&g).map_err(|e| e.to_string())?;
        ensure(gau.find_isomorphism(&own).is_some(), || format!("{lg:?}: gauge group is not isomorphic"))?;
    }
    Ok(format!(
        "15 families of 1 to 3 bundles ({arrows} arrows) export validator-clean, isotropy = gauge group; Z2, S3 recovered ({:.2?})",
        start.elapsed()
    ))
}

fn hs_instance(i: u64) -> Option<(Arc<HsMorphism>, Arc<HsMorphism>)> {
    let spec = GeneratorSpec {
        max_objects: 2,
        ..GeneratorSpec::new(60_000 + i)
    };
    let g = Arc::new(random_groupoid(&spec).ok()?);
    let h = Arc::new(random_groupoid(&spec.with_seed(spec.seed ^ 0xABCD)).ok()?);
    let a = random_hs(g.clone(), h.clone(), &spec).ok()?;
    let b = random_hs(g, h, &spec.with_seed(spec.seed + 1)).unwrap_or_else(|_| a.clone());
    Some((Arc::new(a), Arc::new(b)))
}

fn criterion_6() -> Outcome {
    let start = Instant::now();
    let bounds = OracleBounds::default();
    let mut found = 0;
    let mut total = 0;
    let mut i = 0;
    while found < 30 {
        ensure(i < 300, || format!("only {found} HS instances generated"))?;
        let Some((a, b)) = hs_instance(i) else {
            i += 1;
            continue;
        };
        i += 1;
        found += 1;
        for h in [&a, &b] {
            let r = verify_hs_division_properties(h);
            ensure(r.is_ok(), || format!("hs {i}: {:?}", r.violations))?;
        }
        let ms = enumerate_hs_morphisms(&a, &b, &bounds).map_err(|e| e.to_string())?;
        let ks = enumerate_hs_ggts(&a, &b, &bounds).map_err(|e| e.to_string())?;
        ensure(ms.len() == ks.len(), || format!("hs {i}: {} vs {}", ms.len(), ks.len()))?;
        total += ms.len();
        let family = vec![("A".to_string(), a.clone()), ("B".to_string(), b.clone())];
        let hg = build_hs_gauge_groupoid(family, &bounds).map_err(|e| e.to_string())?;
        let r = validate_groupoid(&hg.export().map_err(|e| e.to_string())?);
        ensure(r.is_ok(), || format!("hs {i}: {:?}", r.violations))?;
        let full = build_gauge_groupoid(
            vec![("A".into(), a.bundle().clone()), ("B".into(), b.bundle().clone())],
            &bounds,
        )
        .map_err(|e| e.to_string())?;
        for arrow in &hg.arrows {
            ensure(full.lookup(arrow.source, arrow.target, &arrow.ggt).is_some(), || {
                format!("hs {i}: invariant GGT missing from the bundle gauge groupoid")
            })?;
        }
    }
    within(start, LIMIT_6)?;
    Ok(format!(
        "30 HS instances: division invariant, {total} HS morphisms = {total} invariant GGTs, HS gauge groupoid ⊆ gauge groupoid ({:.2?})",
        start.elapsed()
    ))
}

fn gengauge(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let out = Command::new(env!("CARGO_BIN_EXE_gengauge"))
        .args(args)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), out.stdout, out.stderr)
}

/// The first single-entry change to a fixture's own tables that the library
/// rejects, as corrupted file text.
fn corrupt(doc: &Document) -> Option<String> {
    let v: serde_json::Value = serde_json::from_str(&serialize(doc)).ok()?;
    let tables: &[&[&str]] = &[
        &["body", "compose"],
        &["body", "action", "act"],
        &["body", "map", "arrow_map"],
        &["body", "bundle", "act"],
        &["body", "morphism", "map"],
        &["body", "ggt", "values"],
        &["body", "left_action", "left_act"],
    ];
    for path in tables {
        let Some(list) = path.iter().try_fold(&v, |v, k| v.get(*k)) else { continue };
        let list = list.as_array()?;
        // Candidate replacement values: every value appearing in the last column.
        let values: BTreeSet<String> = list
            .iter()
            .filter_map(|e| e.as_array()?.last()?.as_str().map(String::from))
            .collect();
        for (i, e) in list.iter().enumerate() {
            let last = e.as_array()?.len() - 1;
            for val in &values {
                let mut m = v.clone();
                let slot = path.iter().fold(&mut m, |m, k| &mut m[*k]);
                if slot[i][last].as_str() == Some(val) {
                    continue;
                }
                slot[i][last] = val.clone().into();
                let text = serde_json::to_string_pretty(&m).ok()?;
                if let Ok(l) = load(&text) {
                    if !validate_loaded(&l).is_ok() {
                        return Some(text);
                    }
                }
            }
        }
    }
    None
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (r1, r2) = (dir.path().join("r1.json"), dir.path().join("r2.json"));
    let (c1, o1, _) = gengauge(&["check-theorems", "--seed", "42", "--report", r1.to_str().unwrap()]);
    let (c2, o2, _) = gengauge(&["check-theorems", "--seed", "42", "--report", r2.to_str().unwrap()]);
    ensure(c1 == 0 && c2 == 0, || format!("exit codes {c1}, {c2}"))?;
    ensure(o1 == o2, || "stdout differs between runs".into())?;
    let (j1, j2) = (fs::read(&r1).unwrap(), fs::read(&r2).unwrap());
    ensure(j1 == j2, || "JSON reports differ between runs".into())?;

    let fixtures = builtin();
    let write_all = |d: &Path| {
        for (name, doc) in &fixtures {
            fs::write(d.join(name), serialize(doc)).unwrap();
        }
    };
    let clean = dir.path().join("clean");
    fs::create_dir(&clean).unwrap();
    write_all(&clean);
    let (c, _, _) = gengauge(&["check-theorems", "--seed", "42", "--fixtures", clean.to_str().unwrap()]);
    ensure(c == 0, || format!("clean fixture directory exits {c}"))?;

    let results: Vec<Result<(), String>> = std::thread::scope(|scope| {
        let handles: Vec<_> = fixtures
            .iter()
            .enumerate()
            .map(|(i, (name, doc))| {
                let d = dir.path().join(format!("bad{i}"));
                let write_all = &write_all;
                scope.spawn(move || -> Result<(), String> {
                    fs::create_dir(&d).unwrap();
                    write_all(&d);
                    let text = corrupt(doc).ok_or_else(|| format!("no rejected mutation of {name}"))?;
                    fs::write(d.join(name), text).unwrap();
                    let report = d.join("report.json.out");
                    let (code, _, err) = gengauge(&[
                        "check-theorems",
                        "--seed",
                        "42",
                        "--fixtures",
                        d.to_str().unwrap(),
                        "--report",
                        report.to_str().unwrap(),
                    ]);
                    ensure(code == 1, || format!("corrupted {name}: exit {code}"))?;
                    let err = String::from_utf8_lossy(&err);
                    ensure(err.contains("fixture-axioms") && err.contains(name.as_str()), || {
                        format!("corrupted {name}: witness does not name the file and statement: {err}")
                    })?;
                    let json: serde_json::Value = serde_json::from_slice(&fs::read(&report).unwrap()).unwrap();
                    let check = json["checks"]
                        .as_array()
                        .and_then(|cs| cs.iter().find(|c| c["id"] == "fixture-axioms"))
                        .ok_or("report lacks fixture-axioms")?;
                    let named = check["violations"]
                        .as_array()
                        .is_some_and(|vs| !vs.is_empty() && vs.iter().all(|v| v["instance"] == name.as_str()));
                    ensure(named, || format!("corrupted {name}: violations do not point at it"))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker")).collect()
    });
    for r in results {
        r?;
    }
    // The report itself is canonical JSON.
    let reparsed: serde_json::Value = serde_json::from_slice(&j1).unwrap();
    ensure(
        gengauge_cli::document::to_canonical_json(&reparsed).into_bytes() == j1,
        || "report is not canonical".into(),
    )?;
    Ok(format!(
        "check-theorems --seed 42 byte-identical twice, exit 0; each of {} corrupted fixtures exits 1 naming fixture-axioms ({:.2?})",
        fixtures.len(),
        start.elapsed()
    ))
}

fn main() {
    let (three, four) = criterion_3_and_4();
    let results = [
        (1, "axiom validators and mutation witnesses", criterion_1()),
        (2, "division map", criterion_2()),
        (3, "morphism/GGT correspondence", three),
        (4, "division invariance", four),
        (5, "gauge groupoid", criterion_5()),
        (6, "HS layer", criterion_6()),
        (7, "CLI determinism", criterion_7()),
    ];
    let mut failed = 0;
    for (n, name, r) in &results {
        match r {
            Ok(msg) => println!("criterion {n} PASS {name}: {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n} FAIL {name}: {msg}");
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
