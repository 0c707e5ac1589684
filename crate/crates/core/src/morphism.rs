//! Groupoid morphisms `(Φ, φ)`: an arrow map and an object map.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::groupoid::FiniteGroupoid;
use crate::ids::{total_map, ArrowId, ObjectId};
use crate::report::ValidationReport;
use crate::witness;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MorphismTables {
    pub arrow_map: Vec<(String, String)>,
    pub object_map: Vec<(String, String)>,
}

impl MorphismTables {
    pub fn canonical(mut self) -> Self {
        self.arrow_map.sort();
        self.object_map.sort();
        self
    }
}

#[derive(Debug, Clone)]
pub struct GroupoidMorphism {
    domain: Arc<FiniteGroupoid>,
    codomain: Arc<FiniteGroupoid>,
    arrow_map: Vec<ArrowId>,
    object_map: Vec<ObjectId>,
}

impl GroupoidMorphism {
    /// Builds a morphism from total maps. Fails if either map is not total.
    pub fn new(
        domain: Arc<FiniteGroupoid>,
        codomain: Arc<FiniteGroupoid>,
        arrow_map: Vec<ArrowId>,
        object_map: Vec<ObjectId>,
    ) -> Result<Self> {
        if arrow_map.len() != domain.arrow_count() {
            return Err(Error::NotTotal {
                map: "arrow_map".into(),
                missing: format!("{} of {} arrows mapped", arrow_map.len(), domain.arrow_count()),
            });
        }
        if object_map.len() != domain.object_count() {
            return Err(Error::NotTotal {
                map: "object_map".into(),
                missing: format!(
                    "{} of {} objects mapped",
                    object_map.len(),
                    domain.object_count()
                ),
            });
        }
        if arrow_map.iter().any(|a| a.index() >= codomain.arrow_count())
            || object_map.iter().any(|x| x.index() >= codomain.object_count())
        {
            return Err(Error::InvalidInput("morphism maps outside its codomain".into()));
        }
        Ok(GroupoidMorphism {
            domain,
            codomain,
            arrow_map,
            object_map,
        })
    }

    pub fn from_tables(
        domain: Arc<FiniteGroupoid>,
        codomain: Arc<FiniteGroupoid>,
        t: &MorphismTables,
    ) -> Result<Self> {
        let arrow_map = total_map(
            "arrow_map",
            domain.arrow_labels(),
            "arrow",
            codomain.arrow_labels(),
            "arrow",
            &t.arrow_map,
        )?
        .into_iter()
        .map(ArrowId)
        .collect();
        let object_map = total_map(
            "object_map",
            domain.object_labels(),
            "object",
            codomain.object_labels(),
            "object",
            &t.object_map,
        )?
        .into_iter()
        .map(ObjectId)
        .collect();
        Self::new(domain, codomain, arrow_map, object_map)
    }

    pub fn to_tables(&self) -> MorphismTables {
        MorphismTables {
            arrow_map: self
                .domain
                .arrow_ids()
                .map(|g| {
                    (
                        self.domain.arrow_name(g).to_string(),
                        self.codomain.arrow_name(self.arrow(g)).to_string(),
                    )
                })
                .collect(),
            object_map: self
                .domain
                .object_ids()
                .map(|x| {
                    (
                        self.domain.object_name(x).to_string(),
                        self.codomain.object_name(self.object(x)).to_string(),
                    )
                })
                .collect(),
        }
    }

    pub fn identity(g: Arc<FiniteGroupoid>) -> Self {
        let arrow_map = g.arrow_ids().collect();
        let object_map = g.object_ids().collect();
        GroupoidMorphism {
            domain: g.clone(),
            codomain: g,
            arrow_map,
            object_map,
        }
    }

    /// The inclusion of `sub` into `sup`, matching ids by name.
    pub fn inclusion(sub: Arc<FiniteGroupoid>, sup: Arc<FiniteGroupoid>) -> Result<Self> {
        let arrow_map = sub
            .arrow_ids()
            .map(|g| sup.arrow(sub.arrow_name(g)))
            .collect::<Result<_>>()?;
        let object_map = sub
            .object_ids()
            .map(|x| sup.object(sub.object_name(x)))
            .collect::<Result<_>>()?;
        Self::new(sub, sup, arrow_map, object_map)
    }

    pub fn domain(&self) -> &Arc<FiniteGroupoid> {
        &self.domain
    }

    pub fn codomain(&self) -> &Arc<FiniteGroupoid> {
        &self.codomain
    }

    #[inline]
    pub fn arrow(&self, g: ArrowId) -> ArrowId {
        self.arrow_map[g.index()]
    }

    #[inline]
    pub fn object(&self, x: ObjectId) -> ObjectId {
        self.object_map[x.index()]
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &GroupoidMorphism) -> Result<GroupoidMorphism> {
        if !crate::groupoid::same_groupoid(first.codomain(), &self.domain) {
            return Err(Error::Mismatch("morphisms are not composable".into()));
        }
        Self::new(
            first.domain.clone(),
            self.codomain.clone(),
            first.arrow_map.iter().map(|&g| self.arrow(g)).collect(),
            first.object_map.iter().map(|&x| self.object(x)).collect(),
        )
    }
}

/// Checks the compatibility of `(Φ, φ)` with source, target, unit and
/// composition. Compatibility with inversion is derived and reported in
/// [`ValidationReport::derived`].
pub fn validate_morphism(m: &GroupoidMorphism) -> ValidationReport {
    let mut r = ValidationReport::new("groupoid morphism");
    let (d, c) = (&*m.domain, &*m.codomain);
    for g in d.arrow_ids() {
        let img = m.arrow(g);
        if c.source(img) != m.object(d.source(g)) {
            r.push(
                "morphism.source",
                witness![d.arrow_name(g)],
                "source of the image differs from the image of the source",
            );
        }
        if c.target(img) != m.object(d.target(g)) {
            r.push(
                "morphism.target",
                witness![d.arrow_name(g)],
                "target of the image differs from the image of the target",
            );
        }
    }
    for x in d.object_ids() {
        if m.arrow(d.unit(x)) != c.unit(m.object(x)) {
            r.push(
                "morphism.unit",
                witness![d.object_name(x)],
                "unit is not mapped to a unit",
            );
        }
    }
    for g1 in d.arrow_ids() {
        for &g2 in d.arrows_into(d.source(g1)) {
            let Some(g12) = d.compose(g1, g2) else { continue };
            let lhs = m.arrow(g12);
            match c.compose(m.arrow(g1), m.arrow(g2)) {
                Some(rhs) if rhs == lhs => {}
                Some(rhs) => r.push(
                    "morphism.multiplicative",
                    witness![d.arrow_name(g1), d.arrow_name(g2)],
                    format!(
                        "image of the product is {}, product of the images is {}",
                        c.arrow_name(lhs),
                        c.arrow_name(rhs)
                    ),
                ),
                None => r.push(
                    "morphism.multiplicative",
                    witness![d.arrow_name(g1), d.arrow_name(g2)],
                    "images of a composable pair are not composable",
                ),
            }
        }
    }
    for g in d.arrow_ids() {
        if m.arrow(d.inverse(g)) != c.inverse(m.arrow(g)) {
            r.push_derived(
                "morphism.inverse",
                witness![d.arrow_name(g)],
                "image of the inverse is not the inverse of the image",
            );
        }
    }
    r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builders::fixtures::{pair, z2};
    use crate::groupoid::isotropy_group;

    #[test]
    fn identity_is_valid() {
        let g = Arc::new(pair(3));
        assert!(validate_morphism(&GroupoidMorphism::identity(g)).is_ok());
    }

    #[test]
    fn isotropy_inclusion_is_valid() {
        let p = Arc::new(pair(2));
        let iso = Arc::new(isotropy_group(&p, p.object("0").unwrap()).unwrap());
        let inc = GroupoidMorphism::inclusion(iso, p).unwrap();
        assert!(validate_morphism(&inc).is_ok());
    }

    #[test]
    fn swapping_units_breaks_multiplicativity_at_a_a() {
        let z = Arc::new(z2());
        let e = z.arrow("e").unwrap();
        let a = z.arrow("a").unwrap();
        let mut arrow_map = vec![ArrowId(0); 2];
        arrow_map[e.index()] = a;
        arrow_map[a.index()] = e;
        let m = GroupoidMorphism::new(z.clone(), z, arrow_map, vec![ObjectId(0)]).unwrap();
        let r = validate_morphism(&m);
        assert!(r
            .violations_of("morphism.multiplicative")
            .any(|v| v.witness == ["a", "a"]));
    }

    #[test]
    fn non_total_map_is_an_error() {
        let z = Arc::new(z2());
        let t = MorphismTables {
            arrow_map: vec![("e".into(), "e".into())],
            object_map: vec![("*".into(), "*".into())],
        };
        assert!(matches!(
            GroupoidMorphism::from_tables(z.clone(), z, &t),
            Err(Error::NotTotal { .. })
        ));
    }
}
