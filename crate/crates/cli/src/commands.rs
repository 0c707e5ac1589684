//! Command-line parsing and dispatch.
//!
//! Exit codes: 0 when every check passes, 1 when a validator or theorem
//! check reports a violation, 2 for usage, parse and precondition errors.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use gengauge::builders::oracle::{enumerate_bundle_morphisms, enumerate_ggts, OracleBounds};
use gengauge::builders::random::{random_bundle, random_groupoid, random_hs, random_setting, GeneratorSpec};
use gengauge::hs::{enumerate_hs_ggts, enumerate_hs_morphisms};
use gengauge::{
    build_gauge_groupoid, build_hs_gauge_groupoid, gauge_group, hs_gauge_group, identity_ggt, invert_ggt,
    morphism_to_ggt, star, validate_groupoid, Error, GaugeGroupoid, GroupPresentation, HsMorphism, PrincipalBundle,
};

use crate::document::{self, serialize, Document, Loaded};
use crate::fixtures;
use crate::report::{Check, Report};
use crate::theorems::{self, validate_loaded, Settings};

#[derive(Parser, Debug)]
#[command(name = "gengauge", version, about = "Validate finite groupoid gauge structures and check the gauge theorems")]
struct Cli {
    /// Also write the report as canonical JSON to this file.
    #[arg(long, global = true, value_name = "FILE")]
    report: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Validate documents of any kind.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
    /// Print the division φ(p,q) of two points of a bundle.
    Divide { bundle: PathBuf, p: String, q: String },
    /// Enumerate morphisms and GGTs between two bundles (or two HS morphisms).
    Morphisms { source: PathBuf, target: PathBuf },
    /// Compose, invert or build identity GGTs.
    Ggt {
        #[command(subcommand)]
        op: GgtOp,
    },
    /// The gauge group of a bundle.
    GaugeGroup { bundle: PathBuf },
    /// The gauge group of an HS morphism.
    HsGaugeGroup { hs: PathBuf },
    /// The gauge groupoid of bundles (or HS morphisms) over one base.
    GaugeGroupoid {
        #[arg(required = true)]
        files: Vec<PathBuf>,
        /// Write the groupoid as a document.
        #[arg(long, value_name = "FILE")]
        export: Option<PathBuf>,
    },
    /// Generate a random valid structure.
    Gen {
        what: GenKind,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        max_objects: usize,
        #[arg(long, default_value_t = 6)]
        max_group_order: usize,
        #[arg(long, default_value_t = 3)]
        max_base: usize,
        #[arg(long, default_value_t = 16)]
        max_total: usize,
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// Run the theorem suite on the fixtures and seeded random instances.
    CheckTheorems {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Largest total space of generated bundles.
        #[arg(long, default_value_t = 16, value_parser = clap::value_parser!(u64).range(1..=64))]
        max_size: u64,
        /// Read fixtures from this directory instead of the built-in set.
        #[arg(long, value_name = "DIR")]
        fixtures: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum GgtOp {
    /// `K23 ⋆ K12`.
    Compose {
        later: PathBuf,
        first: PathBuf,
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// `K̃`, with `K̃(p2,p1) = K(p1,p2)⁻¹`.
    Invert {
        ggt: PathBuf,
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
    /// The identity GGT `φ_P⁻¹` of a bundle.
    Identity {
        bundle: PathBuf,
        #[arg(long, short, value_name = "FILE")]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum GenKind {
    Groupoid,
    Bundle,
    Hs,
}

/// A failure that ends the command with exit code 2.
#[derive(Debug)]
struct Usage(String);

impl From<Error> for Usage {
    fn from(e: Error) -> Self {
        Usage(e.to_string())
    }
}

type Outcome = Result<(Report, String), Usage>;

fn read(path: &Path) -> Result<String, Usage> {
    fs::read_to_string(path).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<Loaded, Usage> {
    document::load(&read(path)?).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn write(path: &Path, text: &str) -> Result<(), Usage> {
    fs::write(path, text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn expect_bundle(path: &Path) -> Result<Arc<PrincipalBundle>, Usage> {
    match load(path)? {
        Loaded::Bundle(b) => Ok(b),
        _ => Err(Usage(format!("{}: expected a bundle document", path.display()))),
    }
}

fn expect_hs(path: &Path) -> Result<Arc<HsMorphism>, Usage> {
    match load(path)? {
        Loaded::Hs(h) => Ok(h),
        _ => Err(Usage(format!("{}: expected an hs document", path.display()))),
    }
}

/// Validates an input before a computation; a failing input ends the
/// command with its violations.
fn precheck(report: &mut Report, name: &Path, l: &Loaded) -> bool {
    let mut c = Check::new("input-axioms", "inputs satisfy the axioms of their kind");
    c.instances = 1;
    c.absorb(&name.display().to_string(), &validate_loaded(l));
    let ok = c.ok();
    report.push(c);
    ok
}

fn emit(doc: &Document, out: &Option<PathBuf>) -> Result<String, Usage> {
    let text = serialize(doc);
    match out {
        Some(path) => {
            write(path, &text)?;
            Ok(format!("wrote {}\n", path.display()))
        }
        None => Ok(text),
    }
}

fn group_text(g: &GroupPresentation) -> String {
    let mut s = format!("order {}\n", g.order());
    for row in &g.product {
        let cells: Vec<String> = row.iter().map(|x| x.to_string()).collect();
        s.push_str(&cells.join(" "));
        s.push('\n');
    }
    s
}

fn group_json(g: &GroupPresentation, name: impl Fn(usize) -> Vec<String>) -> serde_json::Value {
    json!({
        "order": g.order(),
        "unit": g.unit,
        "elements": (0..g.order()).map(name).collect::<Vec<_>>(),
        "product": g.product,
    })
}

fn validate(files: &[PathBuf]) -> Outcome {
    let mut report = Report::new("validate");
    let mut text = String::new();
    for f in files {
        let l = load(f)?;
        let mut c = Check::new("input-axioms", "inputs satisfy the axioms of their kind");
        c.instances = 1;
        c.absorb(&f.display().to_string(), &validate_loaded(&l));
        text.push_str(&format!("{}: {}\n", f.display(), if c.ok() { "ok" } else { "INVALID" }));
        report.push(c);
    }
    Ok((report, text))
}

fn divide(path: &Path, p: &str, q: &str) -> Outcome {
    let mut report = Report::new("divide");
    let b = expect_bundle(path)?;
    if !precheck(&mut report, path, &Loaded::Bundle(b.clone())) {
        return Ok((report, String::new()));
    }
    let (pi, qi) = (b.point(p)?, b.point(q)?);
    let g = b.division(pi, qi)?;
    let name = b.groupoid().arrow_name(g).to_string();
    report.result = json!({ "p": p, "q": q, "division": name });
    Ok((report, format!("{name}\n")))
}

fn morphisms(source: &Path, target: &Path) -> Outcome {
    let mut report = Report::new("morphisms");
    let (a, b) = (load(source)?, load(target)?);
    if !precheck(&mut report, source, &a) | !precheck(&mut report, target, &b) {
        return Ok((report, String::new()));
    }
    let bounds = OracleBounds::from_env()?;
    let (ms, ks) = match (&a, &b) {
        (Loaded::Bundle(x), Loaded::Bundle(y)) => (
            enumerate_bundle_morphisms(x, y, &bounds)?,
            enumerate_ggts(x, y, &bounds)?,
        ),
        (Loaded::Hs(x), Loaded::Hs(y)) => (enumerate_hs_morphisms(x, y, &bounds)?, enumerate_hs_ggts(x, y, &bounds)?),
        _ => return Err(Usage("expected two bundle documents or two hs documents".into())),
    };
    let mut c = Check::new("morphism-ggt-correspondence", "morphisms and GGTs are equinumerous and correspond");
    c.instances = 1;
    if ms.len() != ks.len() {
        c.fail(
            "inputs",
            "correspondence.count",
            vec![ms.len().to_string(), ks.len().to_string()],
            "morphism and GGT counts differ",
        );
    }
    for s in &ms {
        let k = morphism_to_ggt(s)?;
        if !ks.iter().any(|x| x.same_values(&k)) {
            c.fail("inputs", "correspondence.image", vec![], "K_σ is not among the enumerated GGTs");
        }
    }
    report.push(c);
    let maps: Vec<Vec<(String, String)>> = ms
        .iter()
        .map(|s| {
            let mut m = s.to_tables().map;
            m.sort();
            m
        })
        .collect();
    let mut text = format!("{} morphisms, {} GGTs\n", ms.len(), ks.len());
    for (i, m) in maps.iter().enumerate() {
        let cells: Vec<String> = m.iter().map(|(p, q)| format!("{p}->{q}")).collect();
        text.push_str(&format!("σ{i}: {}\n", cells.join(" ")));
    }
    report.result = json!({ "morphisms": ms.len(), "ggts": ks.len(), "maps": maps });
    Ok((report, text))
}

fn ggt(op: &GgtOp) -> Outcome {
    let mut report = Report::new("ggt");
    let (doc, out) = match op {
        GgtOp::Compose { later, first, out } => {
            let (Loaded::Ggt(k23), Loaded::Ggt(k12)) = (load(later)?, load(first)?) else {
                return Err(Usage("compose expects two ggt documents".into()));
            };
            if !precheck(&mut report, later, &Loaded::Ggt(k23.clone()))
                | !precheck(&mut report, first, &Loaded::Ggt(k12.clone()))
            {
                return Ok((report, String::new()));
            }
            (Document::ggt(&star(&k23, &k12)?), out)
        }
        GgtOp::Invert { ggt, out } => {
            let Loaded::Ggt(k) = load(ggt)? else {
                return Err(Usage("invert expects a ggt document".into()));
            };
            if !precheck(&mut report, ggt, &Loaded::Ggt(k.clone())) {
                return Ok((report, String::new()));
            }
            (Document::ggt(&invert_ggt(&k)), out)
        }
        GgtOp::Identity { bundle, out } => {
            let b = expect_bundle(bundle)?;
            if !precheck(&mut report, bundle, &Loaded::Bundle(b.clone())) {
                return Ok((report, String::new()));
            }
            (Document::ggt(&identity_ggt(&b)?), out)
        }
    };
    let text = emit(&doc, out)?;
    Ok((report, text))
}

fn gauge_group_cmd(path: &Path, hs: bool) -> Outcome {
    let mut report = Report::new(if hs { "hs-gauge-group" } else { "gauge-group" });
    let (loaded, b) = if hs {
        let h = expect_hs(path)?;
        let b = h.bundle().clone();
        (Loaded::Hs(h), b)
    } else {
        let b = expect_bundle(path)?;
        (Loaded::Bundle(b.clone()), b)
    };
    if !precheck(&mut report, path, &loaded) {
        return Ok((report, String::new()));
    }
    let g = match &loaded {
        Loaded::Hs(h) => hs_gauge_group(h)?,
        _ => gauge_group(&b)?,
    };
    let name = |i: usize| -> Vec<String> {
        b.point_ids()
            .map(|p| format!("{}:{}", b.point_name(p), b.groupoid().arrow_name(g.elements[i][p.index()])))
            .collect()
    };
    report.result = group_json(&g, name);
    Ok((report, group_text(&g)))
}

fn gauge_groupoid_cmd(files: &[PathBuf], export: &Option<PathBuf>) -> Outcome {
    let mut report = Report::new("gauge-groupoid");
    let loaded: Vec<(PathBuf, Loaded)> = files.iter().map(|f| Ok((f.clone(), load(f)?))).collect::<Result<_, Usage>>()?;
    let mut fine = true;
    for (f, l) in &loaded {
        fine &= precheck(&mut report, f, l);
    }
    if !fine {
        return Ok((report, String::new()));
    }
    let bounds = OracleBounds::from_env()?;
    let stem = |f: &Path| f.file_stem().map_or_else(|| f.display().to_string(), |s| s.to_string_lossy().into_owned());
    let gpd: GaugeGroupoid = if loaded.iter().all(|(_, l)| matches!(l, Loaded::Bundle(_))) {
        let bundles = loaded
            .iter()
            .map(|(f, l)| match l {
                Loaded::Bundle(b) => (stem(f), b.clone()),
                _ => unreachable!(),
            })
            .collect();
        build_gauge_groupoid(bundles, &bounds)?
    } else if loaded.iter().all(|(_, l)| matches!(l, Loaded::Hs(_))) {
        let hs = loaded
            .iter()
            .map(|(f, l)| match l {
                Loaded::Hs(h) => (stem(f), h.clone()),
                _ => unreachable!(),
            })
            .collect();
        build_hs_gauge_groupoid(hs, &bounds)?
    } else {
        return Err(Usage("expected only bundle documents or only hs documents".into()));
    };
    let exported = gpd.export()?;
    let mut c = Check::new("gauge-groupoid", "the GGTs form a groupoid under ⋆");
    c.instances = 1;
    c.absorb("gauge groupoid", &validate_groupoid(&exported));
    report.push(c);
    let mut text = format!("{} objects, {} arrows\n", exported.object_count(), exported.arrow_count());
    if let Some(path) = export {
        write(path, &serialize(&Document::groupoid(&exported)))?;
        text.push_str(&format!("wrote {}\n", path.display()));
    }
    report.result = json!({ "objects": exported.object_count(), "arrows": exported.arrow_count() });
    Ok((report, text))
}

fn gen(what: GenKind, spec: GeneratorSpec, out: &Option<PathBuf>) -> Outcome {
    let doc = match what {
        GenKind::Groupoid => Document::groupoid(&random_groupoid(&spec)?),
        GenKind::Bundle => {
            let (g, base) = random_setting(&spec)?;
            Document::bundle(&random_bundle(g, base, &spec)?)
        }
        GenKind::Hs => {
            let g = Arc::new(random_groupoid(&spec)?);
            let h = Arc::new(random_groupoid(&spec.with_seed(spec.seed ^ 0xABCD))?);
            Document::hs(&random_hs(g, h, &spec)?)
        }
    };
    Ok((Report::new("gen"), emit(&doc, out)?))
}

/// Loads every file of a fixture directory, in name order.
type Fixtures = Vec<(String, Result<Loaded, String>)>;

fn fixture_dir(dir: &Path) -> Result<Fixtures, Usage> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Usage(format!("{}: {e}", dir.display())))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    names.sort();
    names
        .into_iter()
        .map(|p| {
            let name = p.file_name().map_or_else(String::new, |n| n.to_string_lossy().into_owned());
            let text = read(&p)?;
            Ok((name, document::load(&text).map_err(|e| e.to_string())))
        })
        .collect()
}

fn check(seed: u64, max_size: u64, dir: &Option<PathBuf>) -> Outcome {
    let fixtures = match dir {
        Some(d) => fixture_dir(d)?,
        None => fixtures::builtin()
            .into_iter()
            .map(|(n, d)| (n, document::build(&d).map_err(|e| e.to_string())))
            .collect(),
    };
    let settings = Settings {
        seed,
        max_size: max_size as usize,
    };
    let report = theorems::check_theorems(&fixtures, settings);
    let mut text = format!("check-theorems seed={seed} max-size={max_size}\n");
    text.push_str(&report.render_checks());
    text.push_str(if report.ok { "all checks passed\n" } else { "some checks FAILED\n" });
    Ok((report, text))
}

fn dispatch(cli: &Cli) -> Outcome {
    match &cli.command {
        Command::Validate { files } => validate(files),
        Command::Divide { bundle, p, q } => divide(bundle, p, q),
        Command::Morphisms { source, target } => morphisms(source, target),
        Command::Ggt { op } => ggt(op),
        Command::GaugeGroup { bundle } => gauge_group_cmd(bundle, false),
        Command::HsGaugeGroup { hs } => gauge_group_cmd(hs, true),
        Command::GaugeGroupoid { files, export } => gauge_groupoid_cmd(files, export),
        Command::Gen {
            what,
            seed,
            max_objects,
            max_group_order,
            max_base,
            max_total,
            out,
        } => gen(
            *what,
            GeneratorSpec {
                seed: *seed,
                max_objects: *max_objects,
                max_group_order: *max_group_order,
                max_base: *max_base,
                max_total: *max_total,
                ..GeneratorSpec::default()
            },
            out,
        ),
        Command::CheckTheorems { seed, max_size, fixtures } => check(*seed, *max_size, fixtures),
    }
}

/// Runs one command line, writing human output to `out` and diagnostics to
/// `err`. Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            if code == 0 {
                let _ = out.write_all(text.as_bytes());
            } else {
                let _ = err.write_all(text.as_bytes());
            }
            return if code == 0 { 0 } else { 2 };
        }
    };
    match dispatch(&cli) {
        Err(Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Ok((report, text)) => {
            let _ = out.write_all(text.as_bytes());
            if !report.ok {
                let _ = err.write_all(report.render_checks().as_bytes());
            }
            if let Some(path) = &cli.report {
                if let Err(Usage(msg)) = write(path, &report.to_json()) {
                    let _ = writeln!(err, "error: {msg}");
                    return 2;
                }
            }
            if report.ok {
                0
            } else {
                1
            }
        }
    }
}
