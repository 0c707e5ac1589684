//! Finite groupoids, principal groupoid bundles, generalized gauge
//! transformations and Hilsum–Skandalis morphisms, computed exactly on
//! explicit tables.
//!
//! Every structure is built from string-labelled tables and indexed
//! internally by dense ids. Validators return a [`ValidationReport`] listing
//! every violated rule with a witness, so a failing check always says where.

pub mod action;
pub mod builders;
pub mod bundle;
pub mod error;
pub mod gauge;
pub mod groupoid;
pub mod hs;
pub mod ids;
pub mod morphism;
pub mod report;

pub use action::{
    generalized_conjugation, is_free, is_transitive, regular_action, validate_action,
    validate_equivariant_map, ActionTables, ConjugationVariant, EquivariantMap, GroupoidAction,
    Side, Verdict,
};
pub use bundle::{
    division_map, fibred_product, product_bundle, pullback_bundle, trivial_bundle, trivialize,
    unit_bundle, validate_bundle, verify_division_properties, BundleIso, BundleTables,
    PrincipalBundle,
};
pub use error::{Error, Result};
pub use groupoid::{
    isotropy_group, product_groupoid, validate_groupoid, FiniteGroupoid, GroupoidTables,
};
pub use ids::{ArrowId, BaseId, Labels, ObjectId, PointId};
pub use morphism::{validate_morphism, GroupoidMorphism, MorphismTables};
pub use report::{ValidationReport, Violation};
pub use gauge::{
    build_gauge_groupoid, check_division_invariance, gauge_group, ggt_to_morphism, identity_ggt,
    invert_ggt, morphism_to_ggt, star, validate_bundle_morphism, validate_gauge_transformation,
    validate_ggt, BundleMorphism, GaugeGroupoid, Ggt, GroupPresentation,
};
pub use hs::{
    build_hs_gauge_groupoid, hs_fibred_product, hs_from_groupoid_morphism, hs_gauge_group,
    hs_ggt_to_morphism, hs_morphism_to_ggt, hs_product, validate_hs, validate_hs_ggt,
    validate_hs_morphism, verify_hs_division_properties, HsMorphism,
};
