//! Finite topological spaces, bases and cover slices.
//!
//! Points are numbered `0..n` with `n <= 64`; an open set is a bitmask.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TopologyError {
    #[error("at most 64 points are supported, found {0}")]
    TooManyPoints(usize),
    #[error("unknown point `{0}`")]
    UnknownPoint(String),
    #[error("duplicate point name `{0}`")]
    DuplicatePoint(String),
    #[error("{0} is not an open set of the space")]
    NotOpen(String),
    #[error("the topology is invalid: {0}")]
    InvalidTopology(TopologyWitness),
    #[error("{0} is not a basis member")]
    NotBasisMember(String),
    #[error("the family does not cover {target}: union is {union}")]
    NotACover { target: String, union: String },
    #[error("{member} is not contained in {target}")]
    NotContained { member: String, target: String },
    #[error("{0} is not a union of basis members")]
    NotABasis(String),
}

pub type Result<T, E = TopologyError> = std::result::Result<T, E>;

/// A subset of the points of a finite space.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct OpenSet(pub u64);

impl OpenSet {
    pub const EMPTY: OpenSet = OpenSet(0);

    pub fn full(points: usize) -> Self {
        if points == 64 {
            OpenSet(u64::MAX)
        } else {
            OpenSet((1u64 << points) - 1)
        }
    }

    pub fn singleton(p: usize) -> Self {
        OpenSet(1 << p)
    }

    pub fn from_points(points: impl IntoIterator<Item = usize>) -> Self {
        OpenSet(points.into_iter().fold(0, |acc, p| acc | 1 << p))
    }

    pub fn bits(self) -> u64 {
        self.0
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn contains(self, p: usize) -> bool {
        self.0 >> p & 1 == 1
    }

    pub fn is_subset(self, other: OpenSet) -> bool {
        self.0 & !other.0 == 0
    }

    pub fn union(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0 | other.0)
    }

    pub fn intersection(self, other: OpenSet) -> OpenSet {
        OpenSet(self.0 & other.0)
    }

    pub fn points(self) -> impl Iterator<Item = usize> {
        (0..64).filter(move |&p| self.contains(p))
    }
}

impl fmt::Debug for OpenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.points().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Sets ordered by size, then bit pattern. Every order extending inclusion
/// works for the enumerations here; this one is stable across runs.
impl PartialOrd for OpenSet {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for OpenSet {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.len(), self.0).cmp(&(other.len(), other.0))
    }
}

/// Why a family of subsets fails to be a topology.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TopologyWitness {
    MissingEmpty,
    MissingFull,
    MissingUnion { left: Vec<String>, right: Vec<String>, union: Vec<String> },
    MissingIntersection { left: Vec<String>, right: Vec<String>, intersection: Vec<String> },
}

impl fmt::Display for TopologyWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::MissingEmpty => write!(f, "the empty set is not open"),
            Self::MissingFull => write!(f, "the whole space is not open"),
            Self::MissingUnion { left, right, union } => {
                write!(f, "{{{}}} ∪ {{{}}} = {{{}}} is missing", left.join(","), right.join(","), union.join(","))
            }
            Self::MissingIntersection { left, right, intersection } => write!(
                f,
                "{{{}}} ∩ {{{}}} = {{{}}} is missing",
                left.join(","),
                right.join(","),
                intersection.join(",")
            ),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteSpace {
    names: Vec<String>,
    opens: Vec<OpenSet>,
}

impl FiniteSpace {
    /// Records the family as given; see [`FiniteSpace::verify_topology`].
    pub fn new(names: Vec<String>, opens: impl IntoIterator<Item = OpenSet>) -> Result<Self> {
        if names.len() > 64 {
            return Err(TopologyError::TooManyPoints(names.len()));
        }
        for (i, n) in names.iter().enumerate() {
            if names[..i].contains(n) {
                return Err(TopologyError::DuplicatePoint(n.clone()));
            }
        }
        let full = OpenSet::full(names.len());
        let mut opens: Vec<OpenSet> = opens.into_iter().collect();
        if let Some(bad) = opens.iter().find(|o| !o.is_subset(full)) {
            return Err(TopologyError::UnknownPoint(format!("{bad:?}")));
        }
        opens.sort();
        opens.dedup();
        Ok(Self { names, opens })
    }

    /// Builds and validates a space from named point lists.
    pub fn from_named(names: &[&str], opens: &[&[&str]]) -> Result<Self> {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        let mut sets = Vec::with_capacity(opens.len());
        for o in opens {
            sets.push(Self::parse_points(&names, o.iter().copied())?);
        }
        let space = Self::new(names, sets)?;
        space.require_topology()?;
        Ok(space)
    }

    fn parse_points<'a>(names: &[String], pts: impl IntoIterator<Item = &'a str>) -> Result<OpenSet> {
        let mut set = OpenSet::EMPTY;
        for p in pts {
            let idx = names.iter().position(|n| n == p).ok_or_else(|| TopologyError::UnknownPoint(p.into()))?;
            set = set.union(OpenSet::singleton(idx));
        }
        Ok(set)
    }

    /// The subset named by a list of points (not necessarily open).
    pub fn subset<'a>(&self, pts: impl IntoIterator<Item = &'a str>) -> Result<OpenSet> {
        Self::parse_points(&self.names, pts)
    }

    /// Like [`FiniteSpace::subset`], but fails unless the subset is open.
    pub fn open<'a>(&self, pts: impl IntoIterator<Item = &'a str>) -> Result<OpenSet> {
        let set = self.subset(pts)?;
        self.require_open(set)?;
        Ok(set)
    }

    pub fn require_open(&self, set: OpenSet) -> Result<()> {
        if self.is_open(set) {
            Ok(())
        } else {
            Err(TopologyError::NotOpen(self.show(set)))
        }
    }

    pub fn point_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn full(&self) -> OpenSet {
        OpenSet::full(self.names.len())
    }

    /// All open sets, ordered by size.
    pub fn opens(&self) -> &[OpenSet] {
        &self.opens
    }

    pub fn is_open(&self, set: OpenSet) -> bool {
        self.opens.binary_search(&set).is_ok()
    }

    /// Nonempty opens contained in `u`.
    pub fn opens_below(&self, u: OpenSet) -> Vec<OpenSet> {
        self.opens.iter().copied().filter(|o| !o.is_empty() && o.is_subset(u)).collect()
    }

    pub fn point_names(&self, set: OpenSet) -> Vec<String> {
        set.points().map(|p| self.names[p].clone()).collect()
    }

    /// `{a,b}`-style rendering.
    pub fn show(&self, set: OpenSet) -> String {
        format!("{{{}}}", self.point_names(set).join(","))
    }

    /// First violation of the topology axioms, if any.
    pub fn verify_topology(&self) -> Option<TopologyWitness> {
        if !self.is_open(OpenSet::EMPTY) {
            return Some(TopologyWitness::MissingEmpty);
        }
        if !self.is_open(self.full()) {
            return Some(TopologyWitness::MissingFull);
        }
        for (i, &a) in self.opens.iter().enumerate() {
            for &b in &self.opens[i + 1..] {
                if !self.is_open(a.union(b)) {
                    return Some(TopologyWitness::MissingUnion {
                        left: self.point_names(a),
                        right: self.point_names(b),
                        union: self.point_names(a.union(b)),
                    });
                }
                if !self.is_open(a.intersection(b)) {
                    return Some(TopologyWitness::MissingIntersection {
                        left: self.point_names(a),
                        right: self.point_names(b),
                        intersection: self.point_names(a.intersection(b)),
                    });
                }
            }
        }
        None
    }

    pub fn require_topology(&self) -> Result<()> {
        match self.verify_topology() {
            None => Ok(()),
            Some(w) => Err(TopologyError::InvalidTopology(w)),
        }
    }

    /// The smallest open set containing `p`.
    pub fn minimal_neighborhood(&self, p: usize) -> OpenSet {
        self.opens
            .iter()
            .filter(|o| o.contains(p))
            .fold(self.full(), |acc, &o| acc.intersection(o))
    }

    /// The basis of minimal neighbourhoods `U_x`.
    pub fn minimal_basis(&self) -> Basis {
        let members: Vec<OpenSet> = (0..self.point_count()).map(|p| self.minimal_neighborhood(p)).collect();
        Basis::new(self, members).expect("minimal neighbourhoods form a basis")
    }

    /// `O(X)` minus the empty set, as a basis.
    pub fn all_opens_basis(&self) -> Basis {
        Basis::new(self, self.opens.clone()).expect("the opens form a basis")
    }

    /// The Sierpinski space `{∅, {p}, {p,q}}`.
    pub fn sierpinski() -> Self {
        Self::from_named(&["p", "q"], &[&[], &["p"], &["p", "q"]]).unwrap()
    }

    /// The four-point pseudocircle with minimal opens `{a}`, `{b}`,
    /// `{a,b,c}`, `{a,b,d}`.
    pub fn pseudocircle() -> Self {
        Self::from_named(
            &["a", "b", "c", "d"],
            &[&[], &["a"], &["b"], &["a", "b"], &["a", "b", "c"], &["a", "b", "d"], &["a", "b", "c", "d"]],
        )
        .unwrap()
    }

    pub fn discrete(names: &[&str]) -> Self {
        let n = names.len();
        let opens = (0..1u64 << n).map(OpenSet);
        Self::new(names.iter().map(|s| s.to_string()).collect(), opens).unwrap()
    }
}

/// A basis of a finite space. The empty set is never a member.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Basis {
    space: FiniteSpace,
    members: Vec<OpenSet>,
}

impl Basis {
    /// Drops `∅` and duplicates; fails unless every member is open and every
    /// open is a union of members.
    pub fn new(space: &FiniteSpace, members: impl IntoIterator<Item = OpenSet>) -> Result<Self> {
        let mut members: Vec<OpenSet> = members.into_iter().filter(|m| !m.is_empty()).collect();
        members.sort();
        members.dedup();
        for &m in &members {
            space.require_open(m)?;
        }
        for &o in space.opens() {
            let union = members.iter().filter(|m| m.is_subset(o)).fold(OpenSet::EMPTY, |a, &m| a.union(m));
            if union != o {
                return Err(TopologyError::NotABasis(space.show(o)));
            }
        }
        Ok(Self { space: space.clone(), members })
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn members(&self) -> &[OpenSet] {
        &self.members
    }

    pub fn contains(&self, set: OpenSet) -> bool {
        self.members.binary_search(&set).is_ok()
    }

    pub fn position(&self, set: OpenSet) -> Option<usize> {
        self.members.binary_search(&set).ok()
    }

    /// Members contained in `u`.
    pub fn members_below(&self, u: OpenSet) -> Vec<OpenSet> {
        self.members.iter().copied().filter(|m| m.is_subset(u)).collect()
    }

    /// A pair of members whose nonempty intersection is not a member.
    pub fn intersection_witness(&self) -> Option<(OpenSet, OpenSet, OpenSet)> {
        for (i, &a) in self.members.iter().enumerate() {
            for &b in &self.members[i + 1..] {
                let c = a.intersection(b);
                if !c.is_empty() && !self.contains(c) {
                    return Some((a, b, c));
                }
            }
        }
        None
    }

    pub fn is_intersection_stable(&self) -> bool {
        self.intersection_witness().is_none()
    }

    /// Members `U` with `U ⊆ B_i` for some cover member `B_i` of `b0`.
    pub fn cover_slice(&self, b0: OpenSet, cover: &[OpenSet]) -> Result<CoverSlice> {
        let mut union = OpenSet::EMPTY;
        for &c in cover {
            if !self.contains(c) {
                return Err(TopologyError::NotBasisMember(self.space.show(c)));
            }
            if !c.is_subset(b0) {
                return Err(TopologyError::NotContained { member: self.space.show(c), target: self.space.show(b0) });
            }
            union = union.union(c);
        }
        if union != b0 {
            return Err(TopologyError::NotACover { target: self.space.show(b0), union: self.space.show(union) });
        }
        let members = self.members.iter().copied().filter(|m| cover.iter().any(|c| m.is_subset(*c))).collect();
        Ok(CoverSlice { members })
    }

    /// All families of members covering `b0`, as sorted member lists.
    pub fn covers_of(&self, b0: OpenSet) -> Vec<Vec<OpenSet>> {
        let below = self.members_below(b0);
        covering_subfamilies(&below, b0)
    }
}

/// Sub-families of `sets` whose union is `target`, in a fixed order.
pub fn covering_subfamilies(sets: &[OpenSet], target: OpenSet) -> Vec<Vec<OpenSet>> {
    assert!(sets.len() < 24, "too many sets to enumerate covers");
    let mut out = Vec::new();
    for mask in 1u32..1 << sets.len() {
        let family: Vec<OpenSet> = (0..sets.len()).filter(|i| mask >> i & 1 == 1).map(|i| sets[i]).collect();
        if family.iter().fold(OpenSet::EMPTY, |a, &s| a.union(s)) == target {
            out.push(family);
        }
    }
    if target.is_empty() {
        out.insert(0, Vec::new());
    }
    out
}

/// The downward-closed sub-poset `B/{B_i}` of a basis.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoverSlice {
    members: Vec<OpenSet>,
}

impl CoverSlice {
    pub fn members(&self) -> &[OpenSet] {
        &self.members
    }
}

/// `P_fin({V_i})`: intersections over nonempty finite index sets, ordered by
/// size.
pub fn pfin_closure(opens: &[OpenSet]) -> Vec<OpenSet> {
    let mut out: Vec<OpenSet> = opens.to_vec();
    let mut i = 0;
    // close under pairwise intersection; finite lattice so this terminates
    while i < out.len() {
        for j in 0..i {
            let c = out[i].intersection(out[j]);
            if !out.contains(&c) {
                out.push(c);
            }
        }
        i += 1;
    }
    out.sort();
    out.dedup();
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FilteredWitness {
    /// `V` lies below some `V_i` but no element of `P_fin` contains it.
    EmptyOverSet { v: Vec<String> },
    /// Two elements above `V` without a common lower bound above `V`.
    NoLowerBound { v: Vec<String>, left: Vec<String>, right: Vec<String> },
}

/// For every `V ∈ O(X)/{V_i}`, checks that `{W ∈ P_fin : V ⊆ W}` is
/// nonempty and downward directed.
pub fn check_pfin_filtered_slices(space: &FiniteSpace, cover: &[OpenSet]) -> Option<FilteredWitness> {
    let pfin = pfin_closure(cover);
    for &v in space.opens() {
        if !cover.iter().any(|c| v.is_subset(*c)) {
            continue;
        }
        let above: Vec<OpenSet> = pfin.iter().copied().filter(|w| v.is_subset(*w)).collect();
        if above.is_empty() {
            return Some(FilteredWitness::EmptyOverSet { v: space.point_names(v) });
        }
        for (i, &a) in above.iter().enumerate() {
            for &b in &above[i + 1..] {
                let has_bound = above.iter().any(|w| w.is_subset(a) && w.is_subset(b));
                if !has_bound {
                    return Some(FilteredWitness::NoLowerBound {
                        v: space.point_names(v),
                        left: space.point_names(a),
                        right: space.point_names(b),
                    });
                }
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn topology_examples() {
        assert!(FiniteSpace::sierpinski().verify_topology().is_none());
        assert!(FiniteSpace::pseudocircle().verify_topology().is_none());
        let bad = FiniteSpace::new(vec!["p".into(), "q".into()], [OpenSet(0), OpenSet(1), OpenSet(2)]).unwrap();
        match bad.verify_topology() {
            Some(TopologyWitness::MissingFull) => {}
            other => panic!("unexpected {other:?}"),
        }
        let bad = FiniteSpace::new(vec!["p".into(), "q".into()], [OpenSet(0), OpenSet(1), OpenSet(2), OpenSet(3)])
            .unwrap();
        assert!(bad.verify_topology().is_none());
        let bad = FiniteSpace::new(
            vec!["p".into(), "q".into(), "r".into()],
            [OpenSet(0), OpenSet(1), OpenSet(2), OpenSet(7)],
        )
        .unwrap();
        match bad.verify_topology() {
            Some(TopologyWitness::MissingUnion { union, .. }) => assert_eq!(union, vec!["p", "q"]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn minimal_bases() {
        let s = FiniteSpace::sierpinski();
        let b = s.minimal_basis();
        assert_eq!(b.members(), &[s.open(["p"]).unwrap(), s.full()]);
        let x = FiniteSpace::pseudocircle();
        let b = x.minimal_basis();
        let names: Vec<String> = b.members().iter().map(|&m| x.show(m)).collect();
        assert_eq!(names, vec!["{a}", "{b}", "{a,b,c}", "{a,b,d}"]);
        let d = FiniteSpace::discrete(&["p", "q"]);
        assert_eq!(d.minimal_basis().members().len(), 2);
    }

    #[test]
    fn intersection_stability() {
        let x = FiniteSpace::pseudocircle();
        assert!(x.all_opens_basis().is_intersection_stable());
        let (a, b, c) = x.minimal_basis().intersection_witness().unwrap();
        assert_eq!((x.show(a), x.show(b), x.show(c)), ("{a,b,c}".into(), "{a,b,d}".into(), "{a,b}".into()));
        assert!(FiniteSpace::sierpinski().minimal_basis().is_intersection_stable());
    }

    #[test]
    fn basis_rejects_non_bases() {
        let x = FiniteSpace::pseudocircle();
        let err = Basis::new(&x, [x.open(["a"]).unwrap(), x.full()]).unwrap_err();
        assert!(matches!(err, TopologyError::NotABasis(_)));
        let err = Basis::new(&x, [x.subset(["c"]).unwrap()]).unwrap_err();
        assert!(matches!(err, TopologyError::NotOpen(_)));
    }

    #[test]
    fn cover_slices() {
        let x = FiniteSpace::pseudocircle();
        let b = x.minimal_basis();
        let abc = x.open(["a", "b", "c"]).unwrap();
        let abd = x.open(["a", "b", "d"]).unwrap();
        let slice = b.cover_slice(x.full(), &[abc, abd]).unwrap();
        assert_eq!(slice.members(), b.members());
        let slice = b.cover_slice(abc, &[abc]).unwrap();
        assert_eq!(slice.members().len(), 3);
        assert!(matches!(b.cover_slice(x.full(), &[abc]), Err(TopologyError::NotACover { .. })));
        let empty = b.cover_slice(OpenSet::EMPTY, &[]).unwrap();
        assert!(empty.members().is_empty());
    }

    #[test]
    fn pfin_examples() {
        let x = FiniteSpace::pseudocircle();
        let abc = x.open(["a", "b", "c"]).unwrap();
        let abd = x.open(["a", "b", "d"]).unwrap();
        assert_eq!(pfin_closure(&[abc]), vec![abc]);
        assert_eq!(pfin_closure(&[abc, abd]), vec![x.open(["a", "b"]).unwrap(), abc, abd]);
        let d = FiniteSpace::discrete(&["p", "q"]);
        let p = d.open(["p"]).unwrap();
        let q = d.open(["q"]).unwrap();
        assert_eq!(pfin_closure(&[p, q]), vec![OpenSet::EMPTY, p, q]);
    }

    #[test]
    fn pfin_slices_are_filtered() {
        let x = FiniteSpace::pseudocircle();
        for &u in x.opens() {
            for cover in covering_subfamilies(&x.opens_below(u), u) {
                assert!(check_pfin_filtered_slices(&x, &cover).is_none());
            }
        }
    }
}
