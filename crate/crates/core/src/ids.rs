//! Dense index newtypes and labelled id sets.
//!
//! Every structure in the crate keeps opaque string ids at its boundary and
//! dense `u32` indices internally. A [`Labels`] value owns the mapping between
//! the two.

use std::collections::HashMap;
use std::fmt;

use crate::error::{Error, Result};

macro_rules! index_type {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u32);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0 as usize
            }
        }

        impl From<usize> for $name {
            #[inline]
            fn from(i: usize) -> Self {
                $name(u32::try_from(i).expect("index overflow"))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}#{}", stringify!($name), self.0)
            }
        }
    };
}

index_type!(
    /// An object of a finite groupoid.
    ObjectId
);
index_type!(
    /// An arrow of a finite groupoid.
    ArrowId
);
index_type!(
    /// A point of a carrier set (action carrier or bundle total space).
    PointId
);
index_type!(
    /// A point of a bundle base.
    BaseId
);

/// An ordered set of distinct string ids.
#[derive(Debug, Clone, Default)]
pub struct Labels {
    names: Vec<String>,
    index: HashMap<String, u32>,
}

impl Labels {
    /// Builds a label set, rejecting duplicates. `kind` names the set in errors.
    pub fn new<I, S>(kind: &str, names: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut labels = Labels::default();
        for name in names {
            let name = name.into();
            if labels.index.contains_key(&name) {
                return Err(Error::DuplicateId {
                    kind: kind.to_string(),
                    id: name,
                });
            }
            labels.index.insert(name.clone(), labels.names.len() as u32);
            labels.names.push(name);
        }
        Ok(labels)
    }

    /// Builds a label set from names already known to be distinct.
    pub(crate) fn from_distinct<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Labels::new("label", names).expect("labels must be distinct")
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn get(&self, name: &str) -> Option<usize> {
        self.index.get(name).map(|&i| i as usize)
    }

    /// Looks up `name`, producing an unknown-id error tagged with `kind` and `context`.
    pub fn lookup(&self, kind: &str, name: &str, context: &str) -> Result<usize> {
        self.get(name).ok_or_else(|| Error::UnknownId {
            kind: kind.to_string(),
            id: name.to_string(),
            context: context.to_string(),
        })
    }

    /// True when both sets contain the same names, in any order.
    pub fn same_set(&self, other: &Labels) -> bool {
        self.len() == other.len() && self.names.iter().all(|n| other.index.contains_key(n))
    }
}

impl PartialEq for Labels {
    fn eq(&self, other: &Self) -> bool {
        self.names == other.names
    }
}

impl Eq for Labels {}

/// Label of a pair in a product construction.
pub fn pair_label(a: &str, b: &str) -> String {
    format!("({a},{b})")
}

/// Builds a total map from an entry list, checking ids and totality.
///
/// `keys` and `values` resolve the two columns; `map` names the table in errors.
pub(crate) fn total_map(
    map: &str,
    keys: &Labels,
    key_kind: &str,
    values: &Labels,
    value_kind: &str,
    entries: &[(String, String)],
) -> Result<Vec<u32>> {
    let mut out: Vec<Option<u32>> = vec![None; keys.len()];
    for (k, v) in entries {
        let ki = keys.lookup(key_kind, k, map)?;
        let vi = values.lookup(value_kind, v, map)?;
        if out[ki].is_some() {
            return Err(Error::DuplicateEntry {
                map: map.to_string(),
                key: k.clone(),
            });
        }
        out[ki] = Some(vi as u32);
    }
    out.into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::NotTotal {
                map: map.to_string(),
                missing: keys.name(i).to_string(),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicate_labels_rejected() {
        let err = Labels::new("arrow", ["e", "a", "e"]).unwrap_err();
        assert!(matches!(err, Error::DuplicateId { .. }));
    }

    #[test]
    fn total_map_reports_missing_and_dangling() {
        let keys = Labels::new("arrow", ["e", "a"]).unwrap();
        let vals = Labels::new("object", ["*"]).unwrap();
        let missing = total_map("source", &keys, "arrow", &vals, "object", &[("e".into(), "*".into())]);
        assert!(matches!(missing, Err(Error::NotTotal { .. })));
        let dangling = total_map(
            "source",
            &keys,
            "arrow",
            &vals,
            "object",
            &[("e".into(), "*".into()), ("a".into(), "x".into())],
        );
        assert!(matches!(dangling, Err(Error::UnknownId { .. })));
    }
}
