//! JSON file formats for spaces, simplicial sets, hypercovers and presheaves.
//!
//! Opens are written as lists of point names; simplices as `id` (nondegenerate)
//! or `id@v0,v1,...` (the degeneracy's values).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::descent::{DescentError, SetPresheaf};
use crate::homotopy::{CounterexampleFixture, FinitePoset, HomotopyError, PosetMap};
use crate::hypercover::{Hypercover, HypercoverError};
use crate::simplicial::{Extent, FiniteTypeSimplicialSet, SimplexRef, SimplicialError};
use crate::topology::{Basis, FiniteSpace, OpenSet, TopologyError};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Hypercover(#[from] HypercoverError),
    #[error(transparent)]
    Descent(#[from] DescentError),
    #[error(transparent)]
    Homotopy(#[from] HomotopyError),
    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = FormatError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis: Option<Vec<Vec<String>>>,
}

fn names(space: &FiniteSpace, set: OpenSet) -> Vec<String> {
    space.point_names(set)
}

fn subset(space: &FiniteSpace, pts: &[String]) -> Result<OpenSet> {
    Ok(space.subset(pts.iter().map(String::as_str))?)
}

impl SpaceFile {
    pub fn from_space(space: &FiniteSpace, basis: Option<&Basis>) -> Self {
        Self {
            points: space.names().to_vec(),
            opens: space.opens().iter().map(|&o| names(space, o)).collect(),
            basis: basis.map(|b| b.members().iter().map(|&m| names(space, m)).collect()),
        }
    }

    /// The family as written, without checking the topology axioms.
    pub fn to_space_unchecked(&self) -> Result<FiniteSpace> {
        let bare = FiniteSpace::new(self.points.clone(), [])?;
        let opens = self.opens.iter().map(|o| subset(&bare, o)).collect::<Result<Vec<_>>>()?;
        Ok(FiniteSpace::new(self.points.clone(), opens)?)
    }

    pub fn to_space(&self) -> Result<FiniteSpace> {
        let space = self.to_space_unchecked()?;
        space.require_topology()?;
        Ok(space)
    }

    /// The declared basis, or the minimal basis when none is given.
    pub fn to_basis(&self, space: &FiniteSpace) -> Result<Basis> {
        match &self.basis {
            None => Ok(space.minimal_basis()),
            Some(members) => {
                let members = members.iter().map(|m| subset(space, m)).collect::<Result<Vec<_>>>()?;
                Ok(Basis::new(space, members)?)
            }
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplexEntry {
    pub label: String,
    #[serde(default)]
    pub faces: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimplicialSetFile {
    pub max_dim: usize,
    pub extent: Extent,
    /// Nondegenerate simplices per dimension.
    pub simplices: Vec<Vec<SimplexEntry>>,
}

impl SimplicialSetFile {
    pub fn from_complex(k: &FiniteTypeSimplicialSet) -> Self {
        let simplices = (0..=k.max_dim())
            .map(|d| {
                (0..k.count(d))
                    .map(|id| SimplexEntry {
                        label: k.label(d, id).into(),
                        faces: k.nondegenerate_faces(d, id).iter().map(|f| f.to_string()).collect(),
                    })
                    .collect()
            })
            .collect();
        Self { max_dim: k.max_dim(), extent: k.extent(), simplices }
    }

    pub fn to_complex(&self) -> Result<FiniteTypeSimplicialSet> {
        let mut labels = Vec::with_capacity(self.simplices.len());
        let mut faces = Vec::with_capacity(self.simplices.len());
        for (d, level) in self.simplices.iter().enumerate() {
            labels.push(level.iter().map(|e| e.label.clone()).collect());
            let level_faces = level
                .iter()
                .map(|e| {
                    e.faces.iter().map(|f| SimplexRef::parse(f, d.saturating_sub(1))).collect::<Result<Vec<_>, _>>()
                })
                .collect::<Result<Vec<_>, _>>()?;
            faces.push(level_faces);
        }
        Ok(FiniteTypeSimplicialSet::new(self.max_dim, self.extent, labels, faces)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HypercoverFile {
    pub space: SpaceFile,
    pub target: Vec<String>,
    pub spine: SimplicialSetFile,
    /// Open of each nondegenerate simplex, by dimension and id.
    pub assignment: Vec<Vec<Vec<String>>>,
}

impl HypercoverFile {
    pub fn from_hypercover(h: &Hypercover) -> Self {
        let space = h.space();
        Self {
            space: SpaceFile::from_space(space, None),
            target: names(space, h.target()),
            spine: SimplicialSetFile::from_complex(h.spine()),
            assignment: h.assignment().iter().map(|l| l.iter().map(|&o| names(space, o)).collect()).collect(),
        }
    }

    pub fn to_hypercover(&self) -> Result<Hypercover> {
        let space = self.space.to_space()?;
        let spine = self.spine.to_complex()?;
        let target = subset(&space, &self.target)?;
        let assignment = self
            .assignment
            .iter()
            .map(|l| l.iter().map(|o| subset(&space, o)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Ok(Hypercover::new(spine, space, target, assignment)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ValueEntry {
    pub open: Vec<String>,
    pub elements: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RestrictionEntry {
    pub from: Vec<String>,
    pub to: Vec<String>,
    /// Image of each element of the source value, in order.
    pub map: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresheafFile {
    pub values: Vec<ValueEntry>,
    /// Restrictions along enough pairs to generate the rest by composition.
    pub restrictions: Vec<RestrictionEntry>,
}

impl PresheafFile {
    pub fn from_presheaf(f: &SetPresheaf) -> Self {
        let space = f.space();
        let values = f.values().map(|(u, v)| ValueEntry { open: names(space, u), elements: v.to_vec() }).collect();
        let restrictions = f
            .generating_restrictions()
            .into_iter()
            .map(|(u, v, map)| RestrictionEntry {
                from: names(space, u),
                to: names(space, v),
                map: map.iter().map(|&y| f.element_name(v, y)).collect(),
            })
            .collect();
        Self { values, restrictions }
    }

    pub fn to_presheaf(&self, space: &FiniteSpace) -> Result<SetPresheaf> {
        let mut index = Vec::with_capacity(self.values.len());
        let mut values = Vec::with_capacity(self.values.len());
        for v in &self.values {
            let u = subset(space, &v.open)?;
            let mut sorted = v.elements.clone();
            sorted.sort();
            if sorted.windows(2).any(|w| w[0] == w[1]) {
                return Err(FormatError::Invalid(format!("repeated element in the value on {}", space.show(u))));
            }
            index.push(u);
            values.push((u, v.elements.clone()));
        }
        let lookup = |u: OpenSet| {
            values
                .iter()
                .find(|(o, _)| *o == u)
                .map(|(_, e)| e)
                .ok_or_else(|| FormatError::Invalid(format!("no value on {}", space.show(u))))
        };
        let mut gens = Vec::with_capacity(self.restrictions.len());
        for r in &self.restrictions {
            let (from, to) = (subset(space, &r.from)?, subset(space, &r.to)?);
            let target = lookup(to)?;
            let map = r
                .map
                .iter()
                .map(|y| {
                    target.iter().position(|e| e == y).ok_or_else(|| {
                        FormatError::Invalid(format!("{y} is not an element of the value on {}", space.show(to)))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            gens.push((from, to, map));
        }
        Ok(SetPresheaf::from_generators(space, &index, values, gens)?)
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetFile {
    pub elements: Vec<String>,
    /// Generating relations `a <= b`.
    pub relations: Vec<(String, String)>,
}

impl PosetFile {
    pub fn from_poset(p: &FinitePoset) -> Self {
        Self {
            elements: p.labels().to_vec(),
            relations: p.covering_pairs().into_iter().map(|(a, b)| (p.label(a).into(), p.label(b).into())).collect(),
        }
    }

    pub fn to_poset(&self) -> Result<FinitePoset> {
        let labels: Vec<&str> = self.elements.iter().map(String::as_str).collect();
        let pairs: Vec<(&str, &str)> = self.relations.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
        Ok(FinitePoset::from_relations(&labels, &pairs)?)
    }
}

/// An order-preserving map, given by element labels.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PosetMapFile {
    pub source: PosetFile,
    pub target: PosetFile,
    /// `(a, f(a))` for every source element.
    pub map: Vec<(String, String)>,
    /// Source object for the induced map on slices; used by the
    /// counterexample command only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub v: Option<String>,
}

impl PosetMapFile {
    pub fn from_fixture(fixture: &CounterexampleFixture) -> Self {
        let f = &fixture.map;
        Self {
            source: PosetFile::from_poset(f.source()),
            target: PosetFile::from_poset(f.target()),
            map: (0..f.source().len())
                .map(|a| (f.source().label(a).into(), f.target().label(f.apply(a)).into()))
                .collect(),
            v: Some(f.source().label(fixture.v).into()),
        }
    }

    pub fn to_map(&self) -> Result<PosetMap> {
        let source = self.source.to_poset()?;
        let target = self.target.to_poset()?;
        let mut values = vec![None; source.len()];
        for (a, b) in &self.map {
            let ia = source.position(a).ok_or_else(|| HomotopyError::UnknownElement(a.clone()))?;
            let ib = target.position(b).ok_or_else(|| HomotopyError::UnknownElement(b.clone()))?;
            values[ia] = Some(ib);
        }
        let values = values
            .into_iter()
            .enumerate()
            .map(|(a, v)| v.ok_or_else(|| FormatError::Invalid(format!("no image for {}", source.label(a)))))
            .collect::<Result<Vec<_>>>()?;
        Ok(PosetMap::new(source, target, values)?)
    }

    pub fn to_fixture(&self) -> Result<CounterexampleFixture> {
        let map = self.to_map()?;
        let v = self.v.as_deref().ok_or_else(|| FormatError::Invalid("missing field `v`".into()))?;
        let v = map.source().position(v).ok_or_else(|| HomotopyError::UnknownElement(v.into()))?;
        Ok(CounterexampleFixture { map, v })
    }
}
