//! The wire format: `{kind, version, body}` JSON documents.
//!
//! Every body is self-contained (a bundle carries its groupoid, a GGT carries
//! both bundles), so a single file can be validated on its own. Output is
//! canonical: keys sorted, id and entry lists sorted, two-space indentation.

use std::fmt;
use std::sync::Arc;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use gengauge::action::ActionTables;
use gengauge::gauge::{BundleMorphismTables, GgtTables};
use gengauge::hs::LeftActionTables;
use gengauge::{
    BundleMorphism, BundleTables, Error, FiniteGroupoid, Ggt, GroupoidAction, GroupoidMorphism, GroupoidTables,
    HsMorphism, MorphismTables, PrincipalBundle,
};

pub const VERSION: &str = "1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Kind {
    Groupoid,
    Morphism,
    Action,
    Bundle,
    BundleMorphism,
    Ggt,
    Hs,
    HsMorphism,
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = serde_json::to_value(self).expect("kind serializes");
        f.write_str(v.as_str().expect("kind is a string"))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismBody {
    pub domain: GroupoidTables,
    pub codomain: GroupoidTables,
    pub map: MorphismTables,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActionBody {
    pub groupoid: GroupoidTables,
    pub action: ActionTables,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleBody {
    pub groupoid: GroupoidTables,
    pub bundle: BundleTables,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleMorphismBody {
    pub source: BundleBody,
    pub target: BundleBody,
    pub morphism: BundleMorphismTables,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GgtBody {
    pub source: BundleBody,
    pub target: BundleBody,
    pub ggt: GgtTables,
}

/// An HS morphism `G → H`: `left` is `G`, `bundle` is the principal
/// `H`-bundle over the objects of `G`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsBody {
    pub left: GroupoidTables,
    pub bundle: BundleBody,
    pub left_action: LeftActionTables,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HsMorphismBody {
    pub source: HsBody,
    pub target: HsBody,
    pub morphism: BundleMorphismTables,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Groupoid(GroupoidTables),
    Morphism(MorphismBody),
    Action(ActionBody),
    Bundle(BundleBody),
    BundleMorphism(BundleMorphismBody),
    Ggt(GgtBody),
    Hs(HsBody),
    HsMorphism(HsMorphismBody),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    Syntax { line: usize, column: usize, message: String },
    Schema { path: String, message: String },
    Version { found: String },
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseError::Syntax { line, column, message } => {
                write!(f, "syntax error at line {line}, column {column}: {message}")
            }
            ParseError::Schema { path, message } => write!(f, "schema error at {path}: {message}"),
            ParseError::Version { found } => {
                write!(f, "version mismatch: found {found:?}, this tool reads version {VERSION:?}")
            }
        }
    }
}

impl std::error::Error for ParseError {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Envelope<B> {
    #[allow(dead_code)]
    kind: Kind,
    #[allow(dead_code)]
    version: String,
    body: B,
}

fn schema(path: impl Into<String>, message: impl fmt::Display) -> ParseError {
    ParseError::Schema {
        path: path.into(),
        message: message.to_string(),
    }
}

fn typed<B: DeserializeOwned>(text: &str) -> Result<B, ParseError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    match serde_path_to_error::deserialize::<_, Envelope<B>>(de) {
        Ok(e) => Ok(e.body),
        Err(e) => {
            let path = e.path().to_string();
            Err(schema(path, e.into_inner()))
        }
    }
}

/// Parses a document, checking syntax, envelope, version and body schema.
pub fn parse(text: &str) -> Result<Document, ParseError> {
    let v: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string().split(" at line").next().unwrap_or_default().to_string(),
    })?;
    let obj = v.as_object().ok_or_else(|| schema(".", "expected an object with kind, version and body"))?;
    match obj.get("version") {
        Some(Value::String(s)) if s == VERSION => {}
        Some(Value::String(s)) => return Err(ParseError::Version { found: s.clone() }),
        Some(_) => return Err(schema("version", "expected a string")),
        None => return Err(schema(".", "missing field `version`")),
    }
    let kind: Kind = match obj.get("kind") {
        Some(k) => serde_json::from_value(k.clone()).map_err(|e| schema("kind", e))?,
        None => return Err(schema(".", "missing field `kind`")),
    };
    Ok(match kind {
        Kind::Groupoid => Document::Groupoid(typed(text)?),
        Kind::Morphism => Document::Morphism(typed(text)?),
        Kind::Action => Document::Action(typed(text)?),
        Kind::Bundle => Document::Bundle(typed(text)?),
        Kind::BundleMorphism => Document::BundleMorphism(typed(text)?),
        Kind::Ggt => Document::Ggt(typed(text)?),
        Kind::Hs => Document::Hs(typed(text)?),
        Kind::HsMorphism => Document::HsMorphism(typed(text)?),
    })
}

impl BundleBody {
    fn canonical(self) -> Self {
        BundleBody {
            groupoid: self.groupoid.canonical(),
            bundle: self.bundle.canonical(),
        }
    }
}

impl HsBody {
    fn canonical(self) -> Self {
        HsBody {
            left: self.left.canonical(),
            bundle: self.bundle.canonical(),
            left_action: LeftActionTables {
                left_act: sorted(self.left_action.left_act),
            },
        }
    }
}

fn sorted<T: Ord>(mut v: Vec<T>) -> Vec<T> {
    v.sort();
    v
}

impl Document {
    pub fn kind(&self) -> Kind {
        match self {
            Document::Groupoid(_) => Kind::Groupoid,
            Document::Morphism(_) => Kind::Morphism,
            Document::Action(_) => Kind::Action,
            Document::Bundle(_) => Kind::Bundle,
            Document::BundleMorphism(_) => Kind::BundleMorphism,
            Document::Ggt(_) => Kind::Ggt,
            Document::Hs(_) => Kind::Hs,
            Document::HsMorphism(_) => Kind::HsMorphism,
        }
    }

    /// Sorts every id list and entry list.
    pub fn canonical(self) -> Self {
        match self {
            Document::Groupoid(t) => Document::Groupoid(t.canonical()),
            Document::Morphism(b) => Document::Morphism(MorphismBody {
                domain: b.domain.canonical(),
                codomain: b.codomain.canonical(),
                map: b.map.canonical(),
            }),
            Document::Action(b) => Document::Action(ActionBody {
                groupoid: b.groupoid.canonical(),
                action: b.action.canonical(),
            }),
            Document::Bundle(b) => Document::Bundle(b.canonical()),
            Document::BundleMorphism(b) => Document::BundleMorphism(BundleMorphismBody {
                source: b.source.canonical(),
                target: b.target.canonical(),
                morphism: b.morphism.canonical(),
            }),
            Document::Ggt(b) => Document::Ggt(GgtBody {
                source: b.source.canonical(),
                target: b.target.canonical(),
                ggt: b.ggt.canonical(),
            }),
            Document::Hs(b) => Document::Hs(b.canonical()),
            Document::HsMorphism(b) => Document::HsMorphism(HsMorphismBody {
                source: b.source.canonical(),
                target: b.target.canonical(),
                morphism: b.morphism.canonical(),
            }),
        }
    }

    fn body_value(&self) -> Value {
        let v = match self {
            Document::Groupoid(b) => serde_json::to_value(b),
            Document::Morphism(b) => serde_json::to_value(b),
            Document::Action(b) => serde_json::to_value(b),
            Document::Bundle(b) => serde_json::to_value(b),
            Document::BundleMorphism(b) => serde_json::to_value(b),
            Document::Ggt(b) => serde_json::to_value(b),
            Document::Hs(b) => serde_json::to_value(b),
            Document::HsMorphism(b) => serde_json::to_value(b),
        };
        v.expect("tables serialize")
    }

    pub fn groupoid(g: &FiniteGroupoid) -> Self {
        Document::Groupoid(g.to_tables())
    }

    pub fn morphism(m: &GroupoidMorphism) -> Self {
        Document::Morphism(MorphismBody {
            domain: m.domain().to_tables(),
            codomain: m.codomain().to_tables(),
            map: m.to_tables(),
        })
    }

    pub fn action(a: &GroupoidAction) -> Self {
        Document::Action(ActionBody {
            groupoid: a.groupoid().to_tables(),
            action: a.to_tables(),
        })
    }

    pub fn bundle(b: &PrincipalBundle) -> Self {
        Document::Bundle(bundle_body(b))
    }

    pub fn bundle_morphism(s: &BundleMorphism) -> Self {
        Document::BundleMorphism(BundleMorphismBody {
            source: bundle_body(s.source()),
            target: bundle_body(s.target()),
            morphism: s.to_tables(),
        })
    }

    pub fn ggt(k: &Ggt) -> Self {
        Document::Ggt(GgtBody {
            source: bundle_body(k.source()),
            target: bundle_body(k.target()),
            ggt: k.to_tables(),
        })
    }

    pub fn hs(h: &HsMorphism) -> Self {
        Document::Hs(hs_body(h))
    }

    pub fn hs_morphism(h1: &HsMorphism, h2: &HsMorphism, s: &BundleMorphism) -> Self {
        Document::HsMorphism(HsMorphismBody {
            source: hs_body(h1),
            target: hs_body(h2),
            morphism: s.to_tables(),
        })
    }
}

fn bundle_body(b: &PrincipalBundle) -> BundleBody {
    BundleBody {
        groupoid: b.groupoid().to_tables(),
        bundle: b.to_tables(),
    }
}

fn hs_body(h: &HsMorphism) -> HsBody {
    HsBody {
        left: h.left_groupoid().to_tables(),
        bundle: bundle_body(h.bundle()),
        left_action: h.to_tables(),
    }
}

/// Canonical bytes: sorted keys, sorted lists, trailing newline.
pub fn serialize(doc: &Document) -> String {
    let doc = doc.clone().canonical();
    let v = serde_json::json!({
        "kind": doc.kind(),
        "version": VERSION,
        "body": doc.body_value(),
    });
    to_canonical_json(&v)
}

/// Pretty JSON with object keys in sorted order and a trailing newline.
pub fn to_canonical_json(v: &Value) -> String {
    // serde_json's map is ordered by key unless `preserve_order` is enabled.
    let mut s = serde_json::to_string_pretty(v).expect("values serialize");
    s.push('\n');
    s
}

/// Built structures of a document.
#[derive(Debug, Clone)]
pub enum Loaded {
    Groupoid(Arc<FiniteGroupoid>),
    Morphism(GroupoidMorphism),
    Action(GroupoidAction),
    Bundle(Arc<PrincipalBundle>),
    BundleMorphism(BundleMorphism),
    Ggt(Ggt),
    Hs(Arc<HsMorphism>),
    HsMorphism(Arc<HsMorphism>, Arc<HsMorphism>, BundleMorphism),
}

/// Attaches a document path to an indexing error, pointing at the offending
/// entry when the error names one.
fn at<T>(path: &str, tables: &impl Serialize, r: gengauge::Result<T>) -> Result<T, ParseError> {
    r.map_err(|e| {
        let v = serde_json::to_value(tables).unwrap_or(Value::Null);
        let entry = |map: &str, id: &str| -> Option<String> {
            let list = v.get(map)?.as_array()?;
            let i = list.iter().position(|item| match item {
                Value::Array(xs) => xs.iter().any(|x| x.as_str() == Some(id)),
                other => other.as_str() == Some(id),
            })?;
            Some(format!("{path}.{map}[{i}]"))
        };
        let located = match &e {
            Error::UnknownId { id, context, .. } => entry(context, id),
            Error::DuplicateEntry { map, .. } | Error::NotTotal { map, .. } | Error::OffDomain { map, .. } => {
                Some(if v.get(map).is_some() { format!("{path}.{map}") } else { path.to_string() })
            }
            _ => None,
        };
        schema(located.unwrap_or_else(|| path.to_string()), e)
    })
}

/// Builds structures, reusing one handle for structurally equal groupoids
/// and bundles so that both sides of a morphism share them.
#[derive(Default)]
struct Builder {
    groupoids: Vec<(GroupoidTables, Arc<FiniteGroupoid>)>,
    bundles: Vec<(BundleBody, Arc<PrincipalBundle>)>,
}

impl Builder {
    fn groupoid(&mut self, path: &str, t: &GroupoidTables) -> Result<Arc<FiniteGroupoid>, ParseError> {
        let key = t.clone().canonical();
        if let Some((_, g)) = self.groupoids.iter().find(|(k, _)| *k == key) {
            return Ok(g.clone());
        }
        let g = Arc::new(at(path, t, FiniteGroupoid::from_tables(t))?);
        self.groupoids.push((key, g.clone()));
        Ok(g)
    }

    fn bundle(&mut self, path: &str, b: &BundleBody) -> Result<Arc<PrincipalBundle>, ParseError> {
        let key = b.clone().canonical();
        if let Some((_, x)) = self.bundles.iter().find(|(k, _)| *k == key) {
            return Ok(x.clone());
        }
        let g = self.groupoid(&format!("{path}.groupoid"), &b.groupoid)?;
        let x = Arc::new(at(
            &format!("{path}.bundle"),
            &b.bundle,
            PrincipalBundle::from_tables(g, &b.bundle),
        )?);
        self.bundles.push((key, x.clone()));
        Ok(x)
    }

    fn hs(&mut self, path: &str, b: &HsBody) -> Result<Arc<HsMorphism>, ParseError> {
        let left = self.groupoid(&format!("{path}.left"), &b.left)?;
        let bundle = self.bundle(&format!("{path}.bundle"), &b.bundle)?;
        Ok(Arc::new(at(
            &format!("{path}.left_action"),
            &b.left_action,
            HsMorphism::from_tables(left, bundle, &b.left_action),
        )?))
    }
}

/// Indexes every table of a document. Dangling ids, missing or duplicate
/// entries become schema errors naming the path of the offending entry.
pub fn build(doc: &Document) -> Result<Loaded, ParseError> {
    let mut bd = Builder::default();
    Ok(match doc {
        Document::Groupoid(t) => Loaded::Groupoid(bd.groupoid("body", t)?),
        Document::Morphism(b) => {
            let d = bd.groupoid("body.domain", &b.domain)?;
            let c = bd.groupoid("body.codomain", &b.codomain)?;
            Loaded::Morphism(at("body.map", &b.map, GroupoidMorphism::from_tables(d, c, &b.map))?)
        }
        Document::Action(b) => {
            let g = bd.groupoid("body.groupoid", &b.groupoid)?;
            Loaded::Action(at("body.action", &b.action, GroupoidAction::from_tables(g, &b.action))?)
        }
        Document::Bundle(b) => Loaded::Bundle(bd.bundle("body", b)?),
        Document::BundleMorphism(b) => {
            let s = bd.bundle("body.source", &b.source)?;
            let t = bd.bundle("body.target", &b.target)?;
            Loaded::BundleMorphism(at(
                "body.morphism",
                &b.morphism,
                BundleMorphism::from_tables(s, t, &b.morphism),
            )?)
        }
        Document::Ggt(b) => {
            let s = bd.bundle("body.source", &b.source)?;
            let t = bd.bundle("body.target", &b.target)?;
            Loaded::Ggt(at("body.ggt", &b.ggt, Ggt::from_tables(s, t, &b.ggt))?)
        }
        Document::Hs(b) => Loaded::Hs(bd.hs("body", b)?),
        Document::HsMorphism(b) => {
            let h1 = bd.hs("body.source", &b.source)?;
            let h2 = bd.hs("body.target", &b.target)?;
            let s = at(
                "body.morphism",
                &b.morphism,
                BundleMorphism::from_tables(h1.bundle().clone(), h2.bundle().clone(), &b.morphism),
            )?;
            Loaded::HsMorphism(h1, h2, s)
        }
    })
}

/// Parses and builds in one step.
pub fn load(text: &str) -> Result<Loaded, ParseError> {
    build(&parse(text)?)
}
