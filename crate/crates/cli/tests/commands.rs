use std::fs;
use std::path::PathBuf;

use gengauge_cli::run;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../fixtures")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn gengauge(args: &[&str]) -> (i32, String, String) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("gengauge").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

#[test]
fn validate_pair2_exits_zero() {
    let (code, out, _) = gengauge(&["validate", &fixture("pair2.gpd")]);
    assert_eq!(code, 0);
    assert!(out.ends_with("pair2.gpd: ok\n"));
}

#[test]
fn divide_in_the_unit_z2_bundle() {
    let (code, out, _) = gengauge(&["divide", &fixture("unit-z2.bnd"), "e", "a"]);
    assert_eq!((code, out.as_str()), (0, "a\n"));
    let (code, out, _) = gengauge(&["divide", &fixture("unit-z2.bnd"), "a", "a"]);
    assert_eq!((code, out.as_str()), (0, "e\n"));
}

#[test]
fn dividing_across_fibres_is_a_usage_error() {
    let (code, _, err) = gengauge(&["divide", &fixture("trivial-z2.bnd"), "(u,e)", "(v,e)"]);
    assert_eq!(code, 2);
    assert!(err.contains("different fibres"));
}

#[test]
fn parse_errors_exit_two_with_position() {
    let dir = tempfile::tempdir().unwrap();
    let text = fs::read_to_string(fixture("pair2.gpd")).unwrap();
    let cut = dir.path().join("cut.gpd");
    fs::write(&cut, &text[..text.len() - 20]).unwrap();
    let (code, _, err) = gengauge(&["validate", cut.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("syntax error at line"), "{err}");

    let v2 = dir.path().join("v2.gpd");
    fs::write(&v2, text.replace("\"version\": \"1\"", "\"version\": \"7\"")).unwrap();
    let (code, _, err) = gengauge(&["validate", v2.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("version mismatch"), "{err}");
}

#[test]
fn invalid_structure_exits_one_with_witness() {
    let dir = tempfile::tempdir().unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&fs::read_to_string(fixture("z2.gpd")).unwrap()).unwrap();
    // a·a := a breaks the inverse law and associativity.
    for entry in v["body"]["compose"].as_array_mut().unwrap() {
        if entry[0] == "a" && entry[1] == "a" {
            entry[2] = "a".into();
        }
    }
    let bad = dir.path().join("bad.gpd");
    fs::write(&bad, v.to_string()).unwrap();
    let report = dir.path().join("r.json");
    let (code, out, err) = gengauge(&["validate", bad.to_str().unwrap(), "--report", report.to_str().unwrap()]);
    assert_eq!(code, 1);
    assert!(out.contains("INVALID"));
    assert!(err.contains("groupoid.inverse-target"), "{err}");
    let json: serde_json::Value = serde_json::from_str(&fs::read_to_string(report).unwrap()).unwrap();
    assert_eq!(json["ok"], false);
}

#[test]
fn morphisms_and_gauge_groups_of_fixtures() {
    let (code, out, _) = gengauge(&["morphisms", &fixture("unit-s3.bnd"), &fixture("unit-s3.bnd")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("6 morphisms, 6 GGTs"));
    let (code, out, _) = gengauge(&["morphisms", &fixture("unit-pair2.bnd"), &fixture("unit-pair2.bnd")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("1 morphisms, 1 GGTs"));
    let (code, out, _) = gengauge(&["gauge-group", &fixture("unit-s3.bnd")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("order 6"));
    let (code, out, _) = gengauge(&["hs-gauge-group", &fixture("identity-pair2.hs")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("order 1"));
}

#[test]
fn ggt_operations_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let id = dir.path().join("id.ggt");
    let (code, _, _) = gengauge(&["ggt", "identity", &fixture("trivial-z2.bnd"), "-o", id.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (_, composed, _) = gengauge(&["ggt", "compose", id.to_str().unwrap(), id.to_str().unwrap()]);
    let (_, inverted, _) = gengauge(&["ggt", "invert", id.to_str().unwrap()]);
    let original = fs::read_to_string(&id).unwrap();
    assert_eq!(composed, original);
    assert_eq!(inverted, original);
    let (_, shipped, _) = gengauge(&["ggt", "identity", &fixture("unit-z2.bnd")]);
    assert_eq!(shipped, fs::read_to_string(fixture("unit-z2-identity.ggt")).unwrap());
}

#[test]
fn gauge_groupoid_export_validates() {
    let dir = tempfile::tempdir().unwrap();
    let out_file = dir.path().join("gg.gpd");
    let (code, out, _) = gengauge(&[
        "gauge-groupoid",
        &fixture("unit-z2.bnd"),
        "--export",
        out_file.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    assert!(out.starts_with("1 objects, 2 arrows"));
    assert_eq!(gengauge(&["validate", out_file.to_str().unwrap()]).0, 0);
    let (code, out, _) = gengauge(&["gauge-groupoid", &fixture("identity-z2.hs")]);
    assert_eq!(code, 0);
    assert!(out.starts_with("1 objects, 2 arrows"));
}

#[test]
fn gen_is_deterministic_and_valid() {
    let dir = tempfile::tempdir().unwrap();
    for what in ["groupoid", "bundle", "hs"] {
        let (c1, a, _) = gengauge(&["gen", what, "--seed", "11"]);
        let (c2, b, _) = gengauge(&["gen", what, "--seed", "11"]);
        assert_eq!((c1, c2), (0, 0));
        assert_eq!(a, b);
        let f = dir.path().join(what);
        fs::write(&f, a).unwrap();
        assert_eq!(gengauge(&["validate", f.to_str().unwrap()]).0, 0, "{what}");
    }
}

#[test]
fn check_theorems_lists_every_statement() {
    let (code, out, _) = gengauge(&["check-theorems", "--seed", "42", "--max-size", "12"]);
    assert_eq!(code, 0, "{out}");
    for id in [
        "fixture-axioms",
        "division-map-properties",
        "unit-bundle-division",
        "morphism-ggt-correspondence",
        "division-invariance",
        "ggt-composition",
        "gauge-groupoid",
        "hs-division-invariance",
        "hs-morphism-ggt-correspondence",
        "hs-gauge-groupoid",
    ] {
        assert!(out.contains(&format!("PASS {id} (")), "{id} missing");
    }
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(gengauge(&["frobnicate"]).0, 2);
    assert_eq!(gengauge(&["divide", &fixture("unit-z2.bnd")]).0, 2);
    assert_eq!(gengauge(&["divide", &fixture("pair2.gpd"), "e", "a"]).0, 2);
    assert_eq!(gengauge(&["--help"]).0, 0);
}
