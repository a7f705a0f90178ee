//! Structured vertex tokens for generated graphs.

use std::fmt;

use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

/// Coordinates of a vertex in a generated graph.
///
/// Lattice points are integer tuples, tree vertices are paths from the root,
/// glued vertices carry a copy tag and product vertices one site per factor.
/// Ordering is the derived lexicographic order and is used for id assignment.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Site {
    Lattice(Vec<i64>),
    Tree(Vec<u32>),
    Glued(u32, Box<Site>),
    Product(Vec<Site>),
}

impl Site {
    /// Innermost lattice coordinates, if any.
    pub fn lattice_coords(&self) -> Option<&[i64]> {
        match self {
            Site::Lattice(c) => Some(c),
            Site::Glued(_, inner) => inner.lattice_coords(),
            _ => None,
        }
    }

    /// Translate the innermost lattice coordinates by `offset`.
    pub fn translated(&self, offset: &[i64]) -> Option<Site> {
        match self {
            Site::Lattice(c) if c.len() == offset.len() => {
                Some(Site::Lattice(c.iter().zip(offset).map(|(a, b)| a + b).collect()))
            }
            Site::Glued(copy, inner) => {
                inner.translated(offset).map(|s| Site::Glued(*copy, Box::new(s)))
            }
            _ => None,
        }
    }

    /// Parse a site from its JSON form (`[1,0]`, `{"tree":[0]}`, `{"glued":[1,[0,0]]}`).
    pub fn parse(text: &str) -> Option<Site> {
        serde_json::from_str(text).ok()
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Site::Lattice(c) => {
                write!(f, "(")?;
                for (i, x) in c.iter().enumerate() {
                    if i > 0 {
                        write!(f, ",")?;
                    }
                    write!(f, "{x}")?;
                }
                write!(f, ")")
            }
            Site::Tree(path) => {
                write!(f, "t")?;
                for k in path {
                    write!(f, ".{k}")?;
                }
                Ok(())
            }
            Site::Glued(copy, inner) => write!(f, "g{copy}:{inner}"),
            Site::Product(parts) => {
                write!(f, "<")?;
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{p}")?;
                }
                write!(f, ">")
            }
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum SiteRepr {
    Lattice(Vec<i64>),
    Tagged(TaggedSite),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
enum TaggedSite {
    Tree(Vec<u32>),
    Glued((u32, Box<Site>)),
    Product(Vec<Site>),
}

impl Serialize for Site {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let repr = match self {
            Site::Lattice(c) => SiteRepr::Lattice(c.clone()),
            Site::Tree(p) => SiteRepr::Tagged(TaggedSite::Tree(p.clone())),
            Site::Glued(c, inner) => SiteRepr::Tagged(TaggedSite::Glued((*c, inner.clone()))),
            Site::Product(parts) => SiteRepr::Tagged(TaggedSite::Product(parts.clone())),
        };
        repr.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Site {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let repr = SiteRepr::deserialize(deserializer)
            .map_err(|_| de::Error::custom("expected a site: [ints], {\"tree\":[..]}, {\"glued\":[copy, site]} or {\"product\":[..]}"))?;
        Ok(match repr {
            SiteRepr::Lattice(c) => Site::Lattice(c),
            SiteRepr::Tagged(TaggedSite::Tree(p)) => Site::Tree(p),
            SiteRepr::Tagged(TaggedSite::Glued((c, inner))) => Site::Glued(c, inner),
            SiteRepr::Tagged(TaggedSite::Product(parts)) => Site::Product(parts),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_forms_roundtrip() {
        let sites = [
            Site::Lattice(vec![1, -2, 0]),
            Site::Tree(vec![0, 2]),
            Site::Glued(1, Box::new(Site::Lattice(vec![3, 0]))),
            Site::Product(vec![Site::Lattice(vec![1]), Site::Tree(vec![])]),
        ];
        for s in sites {
            let text = serde_json::to_string(&s).unwrap();
            assert_eq!(Site::parse(&text), Some(s));
        }
        assert_eq!(serde_json::to_string(&Site::Lattice(vec![1, 2])).unwrap(), "[1,2]");
    }

    #[test]
    fn display_and_translate() {
        let s = Site::Glued(1, Box::new(Site::Lattice(vec![2, 0])));
        assert_eq!(s.to_string(), "g1:(2,0)");
        assert_eq!(s.translated(&[1, 0]).unwrap().to_string(), "g1:(3,0)");
        assert_eq!(Site::Tree(vec![]).to_string(), "t");
        assert!(Site::Tree(vec![]).translated(&[1]).is_none());
    }
}
