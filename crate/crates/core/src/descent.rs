//! Set-valued presheaves on finite posets of opens and descent checks.
//!
//! A [`SetPresheaf`] is indexed by a family of nonempty opens; the empty open
//! is never stored and always evaluates to the one-point set.
//!
//! Limits over the category of simplices of a hypercover are computed from
//! vertex and edge data only. A compatible family assigns `x_σ ∈ F(U_σ)` to
//! every simplex with `x_σ` the restriction of `x_τ` whenever `τ` is a face of
//! `σ`, so each `x_σ` is the restriction of the component at any of its
//! vertices. The family is therefore determined by its vertex components, and
//! it exists iff any two vertices of a simplex restrict to the same element
//! over it. For vertices `i, j` of `σ` that restriction factors through the
//! edge `{i, j}` of `σ`, so agreement along nondegenerate edges suffices.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::hypercover::{cech_from_cover, refine_to_basis, Hypercover, HypercoverError};
use crate::topology::{covering_subfamilies, pfin_closure, Basis, FiniteSpace, OpenSet, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DescentError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Hypercover(#[from] HypercoverError),
    #[error("no value is given on {0}")]
    MissingValue(String),
    #[error("{0} is listed twice")]
    DuplicateOpen(String),
    #[error("no restriction from {from} to {to} is given or implied")]
    MissingRestriction { from: String, to: String },
    #[error("{to} is not strictly contained in {from}")]
    NotARestriction { from: String, to: String },
    #[error("restriction from {from} to {to} has {found} entries, expected {expected}")]
    RestrictionShape { from: String, to: String, expected: usize, found: usize },
    #[error("restriction from {from} to {to} sends an element outside the target")]
    RestrictionRange { from: String, to: String },
    #[error("restrictions from {from} to {to} disagree along different paths")]
    NotFunctorial { from: String, to: String },
}

pub type Result<T, E = DescentError> = std::result::Result<T, E>;

/// Where an open lives in a presheaf: the implicit point over `∅`, or an
/// index position.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Slot {
    Empty,
    At(usize),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SetPresheaf {
    space: FiniteSpace,
    index: Vec<OpenSet>,
    values: Vec<Vec<String>>,
    /// `(u, v)` with `index[v] ⊊ index[u]`.
    restrictions: HashMap<(usize, usize), Vec<usize>>,
}

impl SetPresheaf {
    fn sorted_index(space: &FiniteSpace, index: &[OpenSet]) -> Result<Vec<OpenSet>> {
        let mut sorted = index.to_vec();
        sorted.sort();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(DescentError::DuplicateOpen(space.show(w[0])));
            }
        }
        for &u in &sorted {
            space.require_open(u)?;
            if u.is_empty() {
                return Err(DescentError::NotARestriction { from: space.show(u), to: space.show(u) });
            }
        }
        Ok(sorted)
    }

    /// Builds from the restriction function on every strict pair, checking
    /// ranges and functoriality.
    pub fn from_table(
        space: &FiniteSpace,
        index: &[OpenSet],
        values: impl Fn(OpenSet) -> Vec<String>,
        restrict: impl Fn(OpenSet, OpenSet) -> Vec<usize>,
    ) -> Result<Self> {
        let index = Self::sorted_index(space, index)?;
        let values: Vec<Vec<String>> = index.iter().map(|&u| values(u)).collect();
        let mut restrictions = HashMap::new();
        for (u, &uo) in index.iter().enumerate() {
            for (v, &vo) in index.iter().enumerate() {
                if v != u && vo.is_subset(uo) {
                    restrictions.insert((u, v), restrict(uo, vo));
                }
            }
        }
        let f = Self { space: space.clone(), index, values, restrictions };
        f.validate()?;
        Ok(f)
    }

    /// Builds from restrictions along some strict pairs, composing to obtain
    /// the rest and rejecting path-dependent composites.
    pub fn from_generators(
        space: &FiniteSpace,
        index: &[OpenSet],
        values: Vec<(OpenSet, Vec<String>)>,
        generators: Vec<(OpenSet, OpenSet, Vec<usize>)>,
    ) -> Result<Self> {
        let index = Self::sorted_index(space, index)?;
        let mut vals = vec![None; index.len()];
        for (u, elems) in values {
            let p = index.binary_search(&u).map_err(|_| DescentError::MissingValue(space.show(u)))?;
            vals[p] = Some(elems);
        }
        let values = vals
            .into_iter()
            .enumerate()
            .map(|(i, v)| v.ok_or_else(|| DescentError::MissingValue(space.show(index[i]))))
            .collect::<Result<Vec<_>>>()?;
        let mut gens: HashMap<usize, Vec<(usize, Vec<usize>)>> = HashMap::new();
        for (from, to, map) in generators {
            let u = index.binary_search(&from).map_err(|_| DescentError::MissingValue(space.show(from)))?;
            let v = index.binary_search(&to).map_err(|_| DescentError::MissingValue(space.show(to)))?;
            if u == v || !to.is_subset(from) {
                return Err(DescentError::NotARestriction { from: space.show(from), to: space.show(to) });
            }
            gens.entry(u).or_default().push((v, map));
        }
        let mut f = Self { space: space.clone(), index, values, restrictions: HashMap::new() };
        for (u, gs) in &gens {
            for (v, map) in gs {
                f.check_map(*u, *v, map)?;
            }
        }
        for u in 0..f.index.len() {
            for v in 0..f.index.len() {
                if v == u || !f.index[v].is_subset(f.index[u]) {
                    continue;
                }
                let mut found: Option<Vec<usize>> = None;
                for (w, map) in gens.get(&u).into_iter().flatten() {
                    if !f.index[v].is_subset(f.index[*w]) {
                        continue;
                    }
                    let candidate = if *w == v {
                        map.clone()
                    } else {
                        let down = &f.restrictions[&(*w, v)];
                        map.iter().map(|&x| down[x]).collect()
                    };
                    match &found {
                        None => found = Some(candidate),
                        Some(prev) if *prev != candidate => {
                            return Err(DescentError::NotFunctorial {
                                from: space.show(f.index[u]),
                                to: space.show(f.index[v]),
                            })
                        }
                        _ => {}
                    }
                }
                let map = found.ok_or_else(|| DescentError::MissingRestriction {
                    from: space.show(f.index[u]),
                    to: space.show(f.index[v]),
                })?;
                f.restrictions.insert((u, v), map);
            }
        }
        Ok(f)
    }

    fn check_map(&self, u: usize, v: usize, map: &[usize]) -> Result<()> {
        let (from, to) = (self.space.show(self.index[u]), self.space.show(self.index[v]));
        if map.len() != self.values[u].len() {
            return Err(DescentError::RestrictionShape {
                from,
                to,
                expected: self.values[u].len(),
                found: map.len(),
            });
        }
        if map.iter().any(|&x| x >= self.values[v].len()) {
            return Err(DescentError::RestrictionRange { from, to });
        }
        Ok(())
    }

    fn validate(&self) -> Result<()> {
        for (&(u, v), map) in &self.restrictions {
            self.check_map(u, v, map)?;
        }
        for (&(u, v), uv) in &self.restrictions {
            for w in 0..self.index.len() {
                if w == v || !self.index[w].is_subset(self.index[v]) {
                    continue;
                }
                let vw = &self.restrictions[&(v, w)];
                let uw = &self.restrictions[&(u, w)];
                if uv.iter().map(|&x| vw[x]).ne(uw.iter().copied()) {
                    return Err(DescentError::NotFunctorial {
                        from: self.space.show(self.index[u]),
                        to: self.space.show(self.index[w]),
                    });
                }
            }
        }
        Ok(())
    }

    /// The constant presheaf with `k` elements.
    pub fn constant(space: &FiniteSpace, index: &[OpenSet], k: usize) -> Result<Self> {
        Self::from_table(space, index, |_| (0..k).map(|i| i.to_string()).collect(), |_, _| (0..k).collect())
    }

    /// `U ↦ maps(U, {0,1})`, restriction by precomposition. Elements are
    /// named by their values on the points of `U` in order.
    pub fn maps_to_two(space: &FiniteSpace, index: &[OpenSet]) -> Result<Self> {
        fn name(u: OpenSet, x: usize) -> String {
            (0..u.len()).map(|i| if x >> i & 1 == 1 { '1' } else { '0' }).collect()
        }
        fn restrict(u: OpenSet, v: OpenSet, x: usize) -> usize {
            let upts: Vec<usize> = u.points().collect();
            v.points().enumerate().fold(0, |acc, (j, p)| {
                let i = upts.iter().position(|&q| q == p).expect("subset");
                acc | (x >> i & 1) << j
            })
        }
        Self::from_table(
            space,
            index,
            |u| (0..1usize << u.len()).map(|x| name(u, x)).collect(),
            |u, v| (0..1usize << u.len()).map(|x| restrict(u, v, x)).collect(),
        )
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    /// The indexing opens, ordered by size.
    pub fn index(&self) -> &[OpenSet] {
        &self.index
    }

    pub fn is_defined_on(&self, u: OpenSet) -> bool {
        u.is_empty() || self.index.binary_search(&u).is_ok()
    }

    fn slot(&self, u: OpenSet) -> Result<Slot> {
        if u.is_empty() {
            return Ok(Slot::Empty);
        }
        self.index.binary_search(&u).map(Slot::At).map_err(|_| DescentError::MissingValue(self.space.show(u)))
    }

    fn slot_size(&self, s: Slot) -> usize {
        match s {
            Slot::Empty => 1,
            Slot::At(i) => self.values[i].len(),
        }
    }

    fn slot_restrict(&self, from: Slot, to: Slot, x: usize) -> usize {
        match (from, to) {
            (_, Slot::Empty) => 0,
            (Slot::At(u), Slot::At(v)) if u == v => x,
            (Slot::At(u), Slot::At(v)) => self.restrictions[&(u, v)][x],
            (Slot::Empty, Slot::At(_)) => unreachable!("nonempty open inside the empty one"),
        }
    }

    /// The elements of `F(u)`; `F(∅)` is a point.
    pub fn value(&self, u: OpenSet) -> Result<Vec<String>> {
        Ok(match self.slot(u)? {
            Slot::Empty => vec!["*".into()],
            Slot::At(i) => self.values[i].clone(),
        })
    }

    pub fn size(&self, u: OpenSet) -> Result<usize> {
        Ok(self.slot_size(self.slot(u)?))
    }

    pub fn element_name(&self, u: OpenSet, x: usize) -> String {
        match self.slot(u) {
            Ok(Slot::At(i)) => self.values[i][x].clone(),
            _ => "*".into(),
        }
    }

    pub fn restrict(&self, u: OpenSet, v: OpenSet, x: usize) -> Result<usize> {
        if !v.is_subset(u) {
            return Err(DescentError::NotARestriction { from: self.space.show(u), to: self.space.show(v) });
        }
        Ok(self.slot_restrict(self.slot(u)?, self.slot(v)?, x))
    }

    /// The presheaf on a sub-family of the index.
    pub fn restrict_to(&self, index: &[OpenSet]) -> Result<SetPresheaf> {
        let mut restrictions = HashMap::new();
        let new_index = Self::sorted_index(&self.space, index)?;
        let old: Vec<usize> = new_index
            .iter()
            .map(|&u| self.index.binary_search(&u).map_err(|_| DescentError::MissingValue(self.space.show(u))))
            .collect::<Result<_>>()?;
        for (u, &ou) in old.iter().enumerate() {
            for (v, &ov) in old.iter().enumerate() {
                if let Some(map) = self.restrictions.get(&(ou, ov)) {
                    restrictions.insert((u, v), map.clone());
                }
            }
        }
        Ok(SetPresheaf {
            space: self.space.clone(),
            index: new_index,
            values: old.iter().map(|&o| self.values[o].clone()).collect(),
            restrictions,
        })
    }

    /// Copy with one restriction entry overwritten, unchecked. Test fixtures
    /// use this to break descent while keeping the table shape.
    pub fn with_restriction_entry_unchecked(&self, from: OpenSet, to: OpenSet, x: usize, y: usize) -> Self {
        let mut g = self.clone();
        let u = g.index.binary_search(&from).expect("indexed");
        let v = g.index.binary_search(&to).expect("indexed");
        g.restrictions.get_mut(&(u, v)).expect("strict pair")[x] = y;
        g
    }

    /// Restriction maps along covering pairs of the index, for serialization.
    pub fn generating_restrictions(&self) -> Vec<(OpenSet, OpenSet, Vec<usize>)> {
        let mut out = Vec::new();
        for (u, &uo) in self.index.iter().enumerate() {
            for v in hasse_below(&self.index, u) {
                out.push((uo, self.index[v], self.restrictions[&(u, v)].clone()));
            }
        }
        out
    }

    pub fn values(&self) -> impl Iterator<Item = (OpenSet, &[String])> {
        self.index.iter().copied().zip(self.values.iter().map(Vec::as_slice))
    }

    fn render_family(&self, objects: &[OpenSet], family: &[usize]) -> Vec<String> {
        objects
            .iter()
            .zip(family)
            .map(|(&o, &x)| format!("{}={}", self.space.show(o), self.element_name(o, x)))
            .collect()
    }
}

/// Index positions immediately below `u` in the inclusion order.
fn hasse_below(index: &[OpenSet], u: usize) -> Vec<usize> {
    let below: Vec<usize> =
        (0..index.len()).filter(|&v| v != u && index[v].is_subset(index[u])).collect();
    below
        .iter()
        .copied()
        .filter(|&v| !below.iter().any(|&w| w != v && index[v].is_subset(index[w])))
        .collect()
}

/// An element of a limit: one component per index object, in the order the
/// objects were given.
pub type MatchingFamily = Vec<usize>;

/// Compatible families over `objects` under inclusion, sorted.
pub fn limit_over_poset(f: &SetPresheaf, objects: &[OpenSet]) -> Result<Vec<MatchingFamily>> {
    let slots: Vec<Slot> = objects.iter().map(|&o| f.slot(o)).collect::<Result<_>>()?;
    let mut order: Vec<usize> = (0..objects.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(objects[i].len()));
    // for each position in `order`, the earlier positions whose object contains it
    let parents: Vec<Vec<usize>> = order
        .iter()
        .enumerate()
        .map(|(k, &j)| order[..k].iter().copied().filter(|&i| objects[j].is_subset(objects[i])).collect())
        .collect();
    let mut out = Vec::new();
    let mut cur = vec![0usize; objects.len()];
    fn rec(
        k: usize,
        f: &SetPresheaf,
        slots: &[Slot],
        order: &[usize],
        parents: &[Vec<usize>],
        cur: &mut Vec<usize>,
        out: &mut Vec<MatchingFamily>,
    ) {
        if k == order.len() {
            out.push(cur.clone());
            return;
        }
        let j = order[k];
        let forced: Vec<usize> = parents[k].iter().map(|&i| f.slot_restrict(slots[i], slots[j], cur[i])).collect();
        if let Some(&first) = forced.first() {
            if forced.iter().all(|&x| x == first) {
                cur[j] = first;
                rec(k + 1, f, slots, order, parents, cur, out);
            }
            return;
        }
        for x in 0..f.slot_size(slots[j]) {
            cur[j] = x;
            rec(k + 1, f, slots, order, parents, cur, out);
        }
    }
    rec(0, f, &slots, &order, &parents, &mut cur, &mut out);
    out.sort();
    Ok(out)
}

/// The limit of `F ∘ U` over the category of simplices, as vertex families
/// compatible along nondegenerate edges.
pub fn limit_over_hypercover(f: &SetPresheaf, h: &Hypercover) -> Result<Vec<MatchingFamily>> {
    let k = h.spine();
    let nv = k.count(0);
    let vslots: Vec<Slot> = h.assignment()[0].iter().map(|&o| f.slot(o)).collect::<Result<_>>()?;
    // constraints checked when the later endpoint is assigned
    let mut checks: Vec<Vec<(usize, Slot)>> = vec![Vec::new(); nv];
    if k.max_dim() >= 1 {
        for e in 0..k.count(1) {
            let faces = k.nondegenerate_faces(1, e);
            let (v1, v0) = (faces[0].core(), faces[1].core());
            let eslot = f.slot(h.assignment()[1][e])?;
            if v0 == v1 {
                continue;
            }
            let (lo, hi) = if v0 < v1 { (v0, v1) } else { (v1, v0) };
            checks[hi].push((lo, eslot));
        }
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; nv];
    fn rec(
        v: usize,
        f: &SetPresheaf,
        vslots: &[Slot],
        checks: &[Vec<(usize, Slot)>],
        cur: &mut Vec<usize>,
        out: &mut Vec<MatchingFamily>,
    ) {
        if v == vslots.len() {
            out.push(cur.clone());
            return;
        }
        for x in 0..f.slot_size(vslots[v]) {
            cur[v] = x;
            let ok = checks[v].iter().all(|&(w, e)| {
                f.slot_restrict(vslots[v], e, x) == f.slot_restrict(vslots[w], e, cur[w])
            });
            if ok {
                rec(v + 1, f, vslots, checks, cur, out);
            }
        }
    }
    rec(0, f, &vslots, &checks, &mut cur, &mut out);
    Ok(out)
}

/// Why a comparison map failed to be a bijection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BijectionFailure {
    NotInjective { left: String, right: String, family: Vec<String> },
    NotSurjective { family: Vec<String> },
    /// The restrictions of one element are not compatible; only possible
    /// when the restriction maps themselves are not functorial.
    IncompatibleImage { element: String, family: Vec<String> },
}

/// Checks that `x ↦ image[x]` is a bijection onto `families` (sorted).
fn check_bijection(
    image: &[MatchingFamily],
    families: &[MatchingFamily],
    name: impl Fn(usize) -> String,
    render: impl Fn(&[usize]) -> Vec<String>,
) -> Option<BijectionFailure> {
    let mut hit: Vec<Option<usize>> = vec![None; families.len()];
    for (x, fam) in image.iter().enumerate() {
        let Ok(pos) = families.binary_search(fam) else {
            return Some(BijectionFailure::IncompatibleImage { element: name(x), family: render(fam) });
        };
        if let Some(y) = hit[pos] {
            return Some(BijectionFailure::NotInjective { left: name(y), right: name(x), family: render(fam) });
        }
        hit[pos] = Some(x);
    }
    hit.iter()
        .position(Option::is_none)
        .map(|pos| BijectionFailure::NotSurjective { family: render(&families[pos]) })
}

/// `F(target) -> lim_{objects} F` is a bijection.
fn comparison_over_poset(f: &SetPresheaf, target: OpenSet, objects: &[OpenSet]) -> Result<Option<BijectionFailure>> {
    let families = limit_over_poset(f, objects)?;
    let image: Vec<MatchingFamily> = (0..f.size(target)?)
        .map(|x| objects.iter().map(|&o| f.restrict(target, o, x)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    Ok(check_bijection(&image, &families, |x| f.element_name(target, x), |fam| f.render_family(objects, fam)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SheafWitness {
    pub target: Vec<String>,
    pub cover: Vec<Vec<String>>,
    pub failure: BijectionFailure,
}

/// Sheaf condition on a basis over every basis cover of every member.
pub fn check_sheaf_on_basis(f: &SetPresheaf, basis: &Basis) -> Result<Option<SheafWitness>> {
    let space = basis.space();
    for &b in basis.members() {
        for cover in basis.covers_of(b) {
            let slice = basis.cover_slice(b, &cover)?;
            if let Some(failure) = comparison_over_poset(f, b, slice.members())? {
                return Ok(Some(SheafWitness {
                    target: space.point_names(b),
                    cover: cover.iter().map(|&c| space.point_names(c)).collect(),
                    failure,
                }));
            }
        }
    }
    Ok(None)
}

/// A named hypercover of a basis member, as consumed by the hypersheaf check.
#[derive(Clone, Debug)]
pub struct SuiteEntry {
    pub name: String,
    pub hypercover: Hypercover,
}

/// The generated hypercover suite for a basis:
/// Čech hypercovers of every basis cover of every member (refined to the
/// basis when some nonempty intersection is not a member), the refined
/// trivial hypercover of every member, and every refined basis cover of the
/// whole space restricted below each member.
pub fn hypersheaf_suite(basis: &Basis, truncation: usize) -> Result<Vec<SuiteEntry>> {
    let space = basis.space();
    let show_cover = |cover: &[OpenSet]| cover.iter().map(|&c| space.show(c)).collect::<Vec<_>>().join(",");
    let in_basis = |o: OpenSet| o.is_empty() || basis.contains(o);
    let mut suite = Vec::new();
    for &b in basis.members() {
        for cover in basis.covers_of(b) {
            let cech = cech_from_cover(space, b, &cover, truncation)?;
            let direct = cech.assignment().iter().flatten().all(|&o| in_basis(o));
            let (name, hypercover) = if direct {
                (format!("cech {} of {}", show_cover(&cover), space.show(b)), cech)
            } else {
                let r = refine_to_basis(&cech, basis, truncation)?;
                (format!("refined cech {} of {}", show_cover(&cover), space.show(b)), r.hypercover().clone())
            };
            suite.push(SuiteEntry { name, hypercover });
        }
        let trivial = refine_to_basis(&Hypercover::trivial(space, b)?, basis, truncation)?;
        suite.push(SuiteEntry {
            name: format!("refined trivial of {}", space.show(b)),
            hypercover: trivial.hypercover().clone(),
        });
    }
    let full = space.full();
    for cover in covering_subfamilies(basis.members(), full) {
        if cover.len() < 2 {
            continue;
        }
        let r = refine_to_basis(&cech_from_cover(space, full, &cover, truncation)?, basis, truncation)?;
        for &b in basis.members() {
            let below = r.restrict_below(b)?;
            suite.push(SuiteEntry {
                name: format!("refined cech {} below {}", show_cover(&cover), space.show(b)),
                hypercover: below.hypercover().clone(),
            });
        }
    }
    Ok(suite)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HypersheafWitness {
    pub hypercover: String,
    pub target: Vec<String>,
    pub failure: BijectionFailure,
}

/// `F(target) -> lim F ∘ U` is a bijection for one hypercover.
pub fn hypercover_comparison(f: &SetPresheaf, h: &Hypercover) -> Result<Option<BijectionFailure>> {
    let families = limit_over_hypercover(f, h)?;
    let b = h.target();
    let verts = &h.assignment()[0];
    let image: Vec<MatchingFamily> = (0..f.size(b)?)
        .map(|x| verts.iter().map(|&o| f.restrict(b, o, x)).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    Ok(check_bijection(&image, &families, |x| f.element_name(b, x), |fam| f.render_family(verts, fam)))
}

/// Hyperdescent along every hypercover in the suite; the first failure wins.
pub fn check_hypersheaf(f: &SetPresheaf, suite: &[SuiteEntry]) -> Result<Option<HypersheafWitness>> {
    for entry in suite {
        if let Some(failure) = hypercover_comparison(f, &entry.hypercover)? {
            return Ok(Some(HypersheafWitness {
                hypercover: entry.name.clone(),
                target: f.space().point_names(entry.hypercover.target()),
                failure,
            }));
        }
    }
    Ok(None)
}

/// Pointwise right Kan extension of a basis presheaf to all nonempty opens.
#[derive(Clone, Debug)]
pub struct KanExtension {
    presheaf: SetPresheaf,
    /// Per open (in `presheaf.index()` order): the basis members below it and
    /// the sorted families over them.
    families: Vec<(Vec<OpenSet>, Vec<MatchingFamily>)>,
}

impl KanExtension {
    pub fn presheaf(&self) -> &SetPresheaf {
        &self.presheaf
    }

    /// The family in `RKE(u)` matching the given components, if any.
    fn position(&self, u: OpenSet, family: &[usize]) -> Option<usize> {
        let p = self.presheaf.index().binary_search(&u).ok()?;
        self.families[p].1.binary_search(&family.to_vec()).ok()
    }

    fn members_below(&self, u: OpenSet) -> &[OpenSet] {
        let p = self.presheaf.index().binary_search(&u).expect("indexed");
        &self.families[p].0
    }
}

pub fn right_kan_extend(f: &SetPresheaf, basis: &Basis) -> Result<KanExtension> {
    let space = basis.space();
    let index: Vec<OpenSet> = space.opens().iter().copied().filter(|o| !o.is_empty()).collect();
    let mut families = Vec::with_capacity(index.len());
    for &u in &index {
        let below = basis.members_below(u);
        let fams = limit_over_poset(f, &below)?;
        families.push((below, fams));
    }
    let lookup: HashMap<OpenSet, usize> = index.iter().enumerate().map(|(i, &u)| (u, i)).collect();
    let presheaf = SetPresheaf::from_table(
        space,
        &index,
        |u| {
            let (below, fams) = &families[lookup[&u]];
            fams.iter().map(|fam| f.render_family(below, fam).join(";")).collect()
        },
        |u, v| {
            let (ubelow, ufams) = &families[lookup[&u]];
            let (vbelow, vfams) = &families[lookup[&v]];
            let keep: Vec<usize> =
                vbelow.iter().map(|m| ubelow.iter().position(|n| n == m).expect("members below v are below u")).collect();
            ufams
                .iter()
                .map(|fam| {
                    let sub: Vec<usize> = keep.iter().map(|&i| fam[i]).collect();
                    vfams.binary_search(&sub).expect("restricted family is matching")
                })
                .collect()
        },
    )?;
    Ok(KanExtension { presheaf, families })
}

/// `G(u) -> RKE(u)`, `x ↦ (G(u ⊇ b)(x))_b`, for every open `u` where `G` is
/// defined; `None` when all are bijections.
pub fn canonical_comparison(g: &SetPresheaf, ext: &KanExtension) -> Result<Option<(OpenSet, BijectionFailure)>> {
    for &u in ext.presheaf().index() {
        if !g.is_defined_on(u) {
            continue;
        }
        let below = ext.members_below(u);
        let image: Vec<MatchingFamily> = (0..g.size(u)?)
            .map(|x| below.iter().map(|&b| g.restrict(u, b, x)).collect::<Result<_>>())
            .collect::<Result<_>>()?;
        let p = ext.presheaf().index().binary_search(&u).expect("indexed");
        let fams = &ext.families[p].1;
        let failure = check_bijection(&image, fams, |x| g.element_name(u, x), |fam| g.render_family(below, fam));
        if let Some(failure) = failure {
            return Ok(Some((u, failure)));
        }
    }
    Ok(None)
}

/// Naturality of `G -> RKE` on every strict pair where `G` is defined.
pub fn comparison_is_natural(g: &SetPresheaf, ext: &KanExtension) -> Result<Option<(OpenSet, OpenSet)>> {
    let rke = ext.presheaf();
    for &u in g.index() {
        for &v in g.index() {
            if u == v || !v.is_subset(u) {
                continue;
            }
            for x in 0..g.size(u)? {
                let phi_u: Vec<usize> =
                    ext.members_below(u).iter().map(|&b| g.restrict(u, b, x)).collect::<Result<_>>()?;
                let y = g.restrict(u, v, x)?;
                let phi_v: Vec<usize> =
                    ext.members_below(v).iter().map(|&b| g.restrict(v, b, y)).collect::<Result<_>>()?;
                let across = ext.position(u, &phi_u).map(|p| rke.restrict(u, v, p)).transpose()?;
                if across.is_none() || across != ext.position(v, &phi_v) {
                    return Ok(Some((u, v)));
                }
            }
        }
    }
    Ok(None)
}

/// `lim_{O(X)/{V_i}} F -> lim_{P_fin({V_i})} F` is a bijection. Both
/// posets exclude `∅`.
pub fn cofinality_instance(f: &SetPresheaf, cover: &[OpenSet]) -> Result<Option<BijectionFailure>> {
    let space = f.space();
    let slice: Vec<OpenSet> =
        space.opens().iter().copied().filter(|o| !o.is_empty() && cover.iter().any(|c| o.is_subset(*c))).collect();
    let pfin: Vec<OpenSet> = pfin_closure(cover).into_iter().filter(|o| !o.is_empty()).collect();
    let big = limit_over_poset(f, &slice)?;
    let small = limit_over_poset(f, &pfin)?;
    let keep: Vec<usize> = pfin.iter().map(|p| slice.iter().position(|s| s == p).expect("P_fin ⊆ slice")).collect();
    let image: Vec<MatchingFamily> = big.iter().map(|fam| keep.iter().map(|&i| fam[i]).collect()).collect();
    Ok(check_bijection(&image, &small, |x| f.render_family(&slice, &big[x]).join(";"), |fam| f.render_family(&pfin, fam)))
}

/// One way of extending a partial presheaf over a new open.
#[derive(Clone, Debug)]
struct NodeChoice {
    size: usize,
    /// Full restriction table to every strictly smaller indexed open.
    maps: Vec<(usize, Vec<usize>)>,
}

/// Enumerates or samples presheaves on a fixed index with value sizes
/// `0..=cap`, building opens from small to large.
pub struct PresheafEnumerator {
    space: FiniteSpace,
    index: Vec<OpenSet>,
    cap: usize,
    prune_covers: Vec<Vec<Vec<OpenSet>>>,
}

impl PresheafEnumerator {
    pub fn new(space: &FiniteSpace, index: &[OpenSet], cap: usize) -> Result<Self> {
        let index = SetPresheaf::sorted_index(space, index)?;
        let prune_covers = vec![Vec::new(); index.len()];
        Ok(Self { space: space.clone(), index, cap, prune_covers })
    }

    /// Discards partial presheaves violating the Čech condition for covers by
    /// strictly smaller indexed opens. Only sound as a hypersheaf filter when
    /// the index is closed under nonempty intersections.
    pub fn with_cech_pruning(mut self) -> Self {
        for (u, &uo) in self.index.iter().enumerate() {
            let smaller: Vec<OpenSet> = self.index.iter().copied().filter(|&o| o != uo && o.is_subset(uo)).collect();
            self.prune_covers[u] = covering_subfamilies(&smaller, uo);
        }
        self
    }

    fn empty_state(&self) -> SetPresheaf {
        SetPresheaf {
            space: self.space.clone(),
            index: self.index.clone(),
            values: vec![Vec::new(); self.index.len()],
            restrictions: HashMap::new(),
        }
    }

    fn options(&self, state: &mut SetPresheaf, u: usize) -> Vec<NodeChoice> {
        let lower = hasse_below(&self.index, u);
        let below: Vec<usize> = (0..u).filter(|&v| self.index[v].is_subset(self.index[u])).collect();
        let mut out = Vec::new();
        for size in 0..=self.cap {
            // odometer over one map per Hasse-lower neighbour
            let targets: Vec<usize> = lower.iter().map(|&v| state.values[v].len()).collect();
            if size > 0 && targets.contains(&0) {
                continue;
            }
            let digits = size * lower.len();
            let radix: Vec<usize> = targets.iter().flat_map(|&t| std::iter::repeat_n(t, size)).collect();
            let mut counter = vec![0usize; digits];
            loop {
                let gens: Vec<&[usize]> = (0..lower.len()).map(|i| &counter[i * size..(i + 1) * size]).collect();
                if let Some(choice) = self.assemble(state, size, &lower, &below, &gens) {
                    if self.passes_pruning(state, u, &choice) {
                        out.push(choice);
                    }
                }
                let mut i = 0;
                while i < digits {
                    counter[i] += 1;
                    if counter[i] < radix[i] {
                        break;
                    }
                    counter[i] = 0;
                    i += 1;
                }
                if i == digits {
                    break;
                }
            }
        }
        out
    }

    fn assemble(
        &self,
        state: &SetPresheaf,
        size: usize,
        lower: &[usize],
        below: &[usize],
        gens: &[&[usize]],
    ) -> Option<NodeChoice> {
        let mut maps = Vec::with_capacity(below.len());
        for &v in below {
            let mut found: Option<Vec<usize>> = None;
            for (k, &w) in lower.iter().enumerate() {
                if !self.index[v].is_subset(self.index[w]) {
                    continue;
                }
                let cand: Vec<usize> = if w == v {
                    gens[k].to_vec()
                } else {
                    let down = &state.restrictions[&(w, v)];
                    gens[k].iter().map(|&x| down[x]).collect()
                };
                match &found {
                    None => found = Some(cand),
                    Some(prev) if *prev != cand => return None,
                    _ => {}
                }
            }
            maps.push((v, found.expect("every smaller open lies under a Hasse neighbour")));
        }
        Some(NodeChoice { size, maps })
    }

    fn apply(state: &mut SetPresheaf, u: usize, choice: &NodeChoice) {
        state.values[u] = (0..choice.size).map(|i| i.to_string()).collect();
        for (v, map) in &choice.maps {
            state.restrictions.insert((u, *v), map.clone());
        }
    }

    fn undo(state: &mut SetPresheaf, u: usize, choice: &NodeChoice) {
        state.values[u].clear();
        for (v, _) in &choice.maps {
            state.restrictions.remove(&(u, *v));
        }
    }

    fn passes_pruning(&self, state: &mut SetPresheaf, u: usize, choice: &NodeChoice) -> bool {
        if self.prune_covers[u].is_empty() {
            return true;
        }
        Self::apply(state, u, choice);
        let uo = self.index[u];
        let ok = self.prune_covers[u].iter().all(|cover| {
            let mut objects = cover.clone();
            for (i, &a) in cover.iter().enumerate() {
                for &b in &cover[i + 1..] {
                    let c = a.intersection(b);
                    if !c.is_empty() && !objects.contains(&c) {
                        objects.push(c);
                    }
                }
            }
            matches!(comparison_over_poset(state, uo, &objects), Ok(None))
        });
        Self::undo(state, u, choice);
        ok
    }

    /// Every presheaf on the index with values of size at most `cap`.
    pub fn exhaustive(&self) -> Vec<SetPresheaf> {
        let mut out = Vec::new();
        let mut state = self.empty_state();
        self.dfs(0, &mut state, &mut out);
        out
    }

    fn dfs(&self, u: usize, state: &mut SetPresheaf, out: &mut Vec<SetPresheaf>) {
        if u == self.index.len() {
            out.push(state.clone());
            return;
        }
        for choice in self.options(state, u) {
            Self::apply(state, u, &choice);
            self.dfs(u + 1, state, out);
            Self::undo(state, u, &choice);
        }
    }

    /// `count` presheaves drawn by choosing uniformly among the extensions at
    /// each open; dead ends restart the draw.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<SetPresheaf> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        while out.len() < count {
            let mut state = self.empty_state();
            let mut complete = true;
            for u in 0..self.index.len() {
                let opts = self.options(&mut state, u);
                match opts.choose(&mut rng) {
                    Some(choice) => Self::apply(&mut state, u, choice),
                    None => {
                        complete = false;
                        break;
                    }
                }
            }
            if complete {
                out.push(state);
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundtripConfig {
    pub cap: usize,
    /// `0` enumerates basis presheaves exhaustively.
    pub samples: usize,
    pub seed: u64,
    pub truncation: usize,
}

impl Default for RoundtripConfig {
    fn default() -> Self {
        Self { cap: 2, samples: 0, seed: 0, truncation: 1 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundtripFailure {
    pub stage: String,
    pub presheaf: usize,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RoundtripReport {
    pub config: RoundtripConfig,
    pub basis_suite_size: usize,
    pub space_suite_size: usize,
    pub basis_presheaves: usize,
    pub basis_hypersheaves: usize,
    pub space_presheaves: usize,
    pub space_hypersheaves: usize,
    pub claimed_hypersheaves: usize,
    pub failures: Vec<RoundtripFailure>,
}

impl RoundtripReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Restriction to the basis against right Kan extension, both ways.
///
/// Basis presheaves are enumerated (or sampled) with values of size at most
/// `cap` and filtered to hypersheaves; each extension must be a hypersheaf on
/// `O(X)` and restrict back bijectively and naturally. Hypersheaves on `O(X)`
/// are enumerated exhaustively at the same cap and compared with the
/// extension of their restriction. Presheaves in `claimed` are asserted to be
/// basis hypersheaves, so failing the filter is itself a failure.
pub fn roundtrip_theorem_check(
    basis: &Basis,
    config: &RoundtripConfig,
    claimed: &[SetPresheaf],
) -> Result<RoundtripReport> {
    let space = basis.space();
    let all_opens = space.all_opens_basis();
    let basis_suite = hypersheaf_suite(basis, config.truncation)?;
    let space_suite = hypersheaf_suite(&all_opens, config.truncation)?;
    let mut failures = Vec::new();

    let enumerator = PresheafEnumerator::new(space, basis.members(), config.cap)?;
    let generated =
        if config.samples == 0 { enumerator.exhaustive() } else { enumerator.sample(config.samples, config.seed) };
    let basis_presheaves = generated.len();
    let mut basis_hypersheaves = 0;
    let mut claimed_hypersheaves = 0;
    let candidates = generated.iter().map(|f| (false, f)).chain(claimed.iter().map(|f| (true, f)));
    for (i, (is_claim, f)) in candidates.enumerate() {
        if let Some(w) = check_hypersheaf(f, &basis_suite)? {
            if is_claim {
                failures.push(RoundtripFailure {
                    stage: "claimed basis hypersheaf".into(),
                    presheaf: i,
                    detail: serde_json::to_string(&w).expect("serializable"),
                });
            }
            continue;
        }
        if is_claim {
            claimed_hypersheaves += 1;
        } else {
            basis_hypersheaves += 1;
        }
        let ext = right_kan_extend(f, basis)?;
        if let Some(w) = check_hypersheaf(ext.presheaf(), &space_suite)? {
            failures.push(RoundtripFailure {
                stage: "extension is a hypersheaf".into(),
                presheaf: i,
                detail: serde_json::to_string(&w).expect("serializable"),
            });
        }
        if let Some((u, w)) = canonical_comparison(f, &ext)? {
            failures.push(RoundtripFailure {
                stage: "restriction of the extension".into(),
                presheaf: i,
                detail: format!("{}: {}", space.show(u), serde_json::to_string(&w).expect("serializable")),
            });
        }
        if let Some((u, v)) = comparison_is_natural(f, &ext)? {
            failures.push(RoundtripFailure {
                stage: "naturality of the restriction".into(),
                presheaf: i,
                detail: format!("{} ⊇ {}", space.show(u), space.show(v)),
            });
        }
    }

    let index: Vec<OpenSet> = all_opens.members().to_vec();
    let space_presheaves = PresheafEnumerator::new(space, &index, config.cap)?.with_cech_pruning().exhaustive();
    let mut space_hypersheaves = 0;
    for (i, g) in space_presheaves.iter().enumerate() {
        if check_hypersheaf(g, &space_suite)?.is_some() {
            continue;
        }
        space_hypersheaves += 1;
        let restricted = g.restrict_to(basis.members())?;
        let ext = right_kan_extend(&restricted, basis)?;
        if let Some((u, w)) = canonical_comparison(g, &ext)? {
            failures.push(RoundtripFailure {
                stage: "extension of the restriction".into(),
                presheaf: i,
                detail: format!("{}: {}", space.show(u), serde_json::to_string(&w).expect("serializable")),
            });
        }
    }

    Ok(RoundtripReport {
        config: config.clone(),
        basis_suite_size: basis_suite.len(),
        space_suite_size: space_suite.len(),
        basis_presheaves,
        basis_hypersheaves,
        space_presheaves: space_presheaves.len(),
        space_hypersheaves,
        claimed_hypersheaves,
        failures,
    })
}
