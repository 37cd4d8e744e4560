//! Hypercovers of finite spaces and their refinements along a basis.
//!
//! A [`Hypercover`] is a spine `K` with an open `U(σ)` for each
//! nondegenerate simplex; degenerate simplices inherit the open of their core.
//! The covering condition asks that, for every sphere `τ: ∂Δ^n -> K`, the
//! opens of the fillers of `τ` cover the intersection of the facet opens, and
//! that the vertex opens cover the target.
//!
//! [`RefinedHypercover`] decorates each `n`-simplex `σ` with a choice of basis
//! member `O(A)` for every nonempty `A ⊆ [n]`, inclusion-reversing in `A`, with
//! `O(A) ⊆ U(ι_A^*σ)`. Its assigned open is `O([n])`.

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

use crate::fin::{FinError, FinMap, SymElement, SymmetricSet};
use crate::simplicial::{
    BoundarySphere, Extent, FillerIndex, FiniteTypeSimplicialSet, ModelComplex, MonotoneMap, SequenceModel,
    SimplexRef, SimplicialError, SimplicialModel,
};
use crate::topology::{Basis, FiniteSpace, OpenSet, TopologyError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HypercoverError {
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Fin(#[from] FinError),
    #[error("assignment has {found} opens in dimension {dim}, spine has {expected} simplices")]
    AssignmentShape { dim: usize, expected: usize, found: usize },
    #[error("simplex {id} of dimension {dim} is assigned {open}, which is not below its face {face} ({face_open})")]
    NotFunctorial { dim: usize, id: usize, face: usize, open: String, face_open: String },
    #[error("simplex {id} of dimension {dim} is assigned {open}, outside the target {target}")]
    OutsideTarget { dim: usize, id: usize, open: String, target: String },
    #[error("the covering condition fails: {0}")]
    NotAHypercover(String),
    #[error("the basis belongs to a different space")]
    BasisMismatch,
}

pub type Result<T, E = HypercoverError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Hypercover {
    spine: FiniteTypeSimplicialSet,
    space: FiniteSpace,
    target: OpenSet,
    assignment: Vec<Vec<OpenSet>>,
}

impl Hypercover {
    /// Validates shape, openness, containment in the target and
    /// functoriality (`U(σ) ⊆ U(∂_i σ)`).
    pub fn new(
        spine: FiniteTypeSimplicialSet,
        space: FiniteSpace,
        target: OpenSet,
        assignment: Vec<Vec<OpenSet>>,
    ) -> Result<Self> {
        space.require_open(target)?;
        if assignment.len() != spine.max_dim() + 1 {
            return Err(HypercoverError::AssignmentShape {
                dim: assignment.len(),
                expected: spine.max_dim() + 1,
                found: assignment.len(),
            });
        }
        for (d, level) in assignment.iter().enumerate() {
            if level.len() != spine.count(d) {
                return Err(HypercoverError::AssignmentShape { dim: d, expected: spine.count(d), found: level.len() });
            }
            for (id, &o) in level.iter().enumerate() {
                space.require_open(o)?;
                if !o.is_subset(target) {
                    return Err(HypercoverError::OutsideTarget {
                        dim: d,
                        id,
                        open: space.show(o),
                        target: space.show(target),
                    });
                }
            }
        }
        let h = Self { spine, space, target, assignment };
        h.check_functorial()?;
        Ok(h)
    }

    fn new_unchecked(
        spine: FiniteTypeSimplicialSet,
        space: FiniteSpace,
        target: OpenSet,
        assignment: Vec<Vec<OpenSet>>,
    ) -> Self {
        Self { spine, space, target, assignment }
    }

    fn check_functorial(&self) -> Result<()> {
        for d in 1..=self.spine.max_dim() {
            for id in 0..self.spine.count(d) {
                let open = self.assignment[d][id];
                for (i, face) in self.spine.nondegenerate_faces(d, id).iter().enumerate() {
                    let face_open = self.open_of(face);
                    if !open.is_subset(face_open) {
                        return Err(HypercoverError::NotFunctorial {
                            dim: d,
                            id,
                            face: i,
                            open: self.space.show(open),
                            face_open: self.space.show(face_open),
                        });
                    }
                }
            }
        }
        Ok(())
    }

    /// The trivial hypercover `Δ^0 ↦ u`.
    pub fn trivial(space: &FiniteSpace, u: OpenSet) -> Result<Self> {
        Self::new(crate::simplicial::point(), space.clone(), u, vec![vec![u]])
    }

    pub fn spine(&self) -> &FiniteTypeSimplicialSet {
        &self.spine
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    /// The open being covered.
    pub fn target(&self) -> OpenSet {
        self.target
    }

    pub fn assignment(&self) -> &[Vec<OpenSet>] {
        &self.assignment
    }

    pub fn open_of(&self, x: &SimplexRef) -> OpenSet {
        self.assignment[x.core_dim()][x.core()]
    }

    /// A copy with one assigned open replaced, without revalidation.
    pub fn with_assignment_unchecked(&self, dim: usize, id: usize, open: OpenSet) -> Self {
        let mut h = self.clone();
        h.assignment[dim][id] = open;
        h
    }

    /// Default verification bound: one above the top nondegenerate dimension.
    pub fn default_check_bound(&self) -> usize {
        let top = self.spine.top_dim().unwrap_or(0) + 1;
        match self.spine.extent() {
            Extent::Complete => top,
            Extent::Truncated => top.min(self.spine.max_dim()),
        }
    }

    /// Evaluates the covering condition in dimensions `0..=n_max`.
    pub fn check(&self, n_max: usize) -> Result<HypercoverCheck> {
        self.spine.ensure_dim(n_max)?;
        let vertex_union = (0..self.spine.count(0)).fold(OpenSet::EMPTY, |a, v| a.union(self.assignment[0][v]));
        if vertex_union != self.target {
            return Ok(HypercoverCheck {
                checked_up_to: n_max,
                failure: Some(HypercoverWitness { n: 0, sphere: None, lhs: vertex_union, rhs: self.target }),
            });
        }
        for n in 1..=n_max {
            let index = FillerIndex::new(&self.spine, n)?;
            for sphere in self.spine.boundary_spheres(n)? {
                let rhs = sphere.facets().iter().fold(self.target, |a, t| a.intersection(self.open_of(t)));
                let lhs = index.fillers(&sphere).iter().fold(OpenSet::EMPTY, |a, x| a.union(self.open_of(x)));
                if lhs != rhs {
                    return Ok(HypercoverCheck {
                        checked_up_to: n_max,
                        failure: Some(HypercoverWitness { n, sphere: Some(sphere), lhs, rhs }),
                    });
                }
            }
        }
        Ok(HypercoverCheck { checked_up_to: n_max, failure: None })
    }

    /// The cone `U^+` with tip value the target.
    pub fn cone_extension(&self) -> ConeDiagram<'_> {
        ConeDiagram { hypercover: self, tip: self.target }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercoverCheck {
    pub checked_up_to: usize,
    pub failure: Option<HypercoverWitness>,
}

impl HypercoverCheck {
    pub fn holds(&self) -> bool {
        self.failure.is_none()
    }
}

/// A failing instance of the covering condition: `lhs` is the union over
/// fillers, `rhs` the intersection over facets (the target when `n = 0`).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HypercoverWitness {
    pub n: usize,
    pub sphere: Option<BoundarySphere>,
    pub lhs: OpenSet,
    pub rhs: OpenSet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WitnessRecord {
    pub n: usize,
    pub sphere: Option<Vec<String>>,
    pub fillers_union: Vec<String>,
    pub facets_intersection: Vec<String>,
}

impl HypercoverWitness {
    pub fn record(&self, space: &FiniteSpace) -> WitnessRecord {
        WitnessRecord {
            n: self.n,
            sphere: self.sphere.as_ref().map(|s| s.facets().iter().map(|f| f.to_string()).collect()),
            fillers_union: space.point_names(self.lhs),
            facets_intersection: space.point_names(self.rhs),
        }
    }

    pub fn describe(&self, space: &FiniteSpace) -> String {
        match &self.sphere {
            None => format!("vertex opens cover {} instead of {}", space.show(self.lhs), space.show(self.rhs)),
            Some(s) => {
                let facets: Vec<String> = s.facets().iter().map(|f| f.to_string()).collect();
                format!(
                    "n={} sphere ({}): fillers cover {}, facets intersect to {}",
                    self.n,
                    facets.join(" "),
                    space.show(self.lhs),
                    space.show(self.rhs)
                )
            }
        }
    }
}

/// `U^+: (Δ/K)^◁ -> O(X)^op`; the cone point is the empty simplex.
pub struct ConeDiagram<'a> {
    hypercover: &'a Hypercover,
    tip: OpenSet,
}

impl ConeDiagram<'_> {
    pub fn tip(&self) -> OpenSet {
        self.tip
    }

    /// `None` addresses the cone point.
    pub fn value(&self, x: Option<&SimplexRef>) -> OpenSet {
        x.map_or(self.tip, |x| self.hypercover.open_of(x))
    }
}

/// The Čech hypercover of `target` for the indexed family `opens`, with
/// spine the nerve of the chaotic groupoid on the index set.
pub fn cech_from_cover(space: &FiniteSpace, target: OpenSet, opens: &[OpenSet], max_dim: usize) -> Result<Hypercover> {
    space.require_open(target)?;
    let mut union = OpenSet::EMPTY;
    for &o in opens {
        space.require_open(o)?;
        if !o.is_subset(target) {
            return Err(TopologyError::NotContained { member: space.show(o), target: space.show(target) }.into());
        }
        union = union.union(o);
    }
    if union != target {
        return Err(TopologyError::NotACover { target: space.show(target), union: space.show(union) }.into());
    }
    let k = opens.len();
    let model = SequenceModel::new(vec![vec![true; k]; k], (0..k).map(|i| i.to_string()).collect());
    let extent = if k <= 1 { Extent::Complete } else { Extent::Truncated };
    let built = ModelComplex::build(&model, max_dim, extent);
    let assignment = (0..=max_dim)
        .map(|d| {
            built
                .level(d)
                .iter()
                .map(|seq| seq.iter().fold(target, |a, &i| a.intersection(opens[i])))
                .collect()
        })
        .collect();
    let h = Hypercover::new(built.into_complex(), space.clone(), target, assignment)?;
    let check = h.check(max_dim)?;
    if let Some(w) = check.failure {
        return Err(HypercoverError::NotAHypercover(w.describe(space)));
    }
    Ok(h)
}

/// Nonempty subsets of `[n]` as bitmasks, by size then value.
pub(crate) fn subset_masks(n: usize) -> Vec<u64> {
    let mut masks: Vec<u64> = (1..1u64 << (n + 1)).collect();
    masks.sort_by_key(|m| (m.count_ones(), *m));
    masks
}

pub(crate) fn mask_points(mask: u64) -> Vec<usize> {
    (0..64).filter(|i| mask >> i & 1 == 1).collect()
}

/// Image of a subset of `[k]` under a map of ordinals.
fn image_mask(values: &[usize], mask: u64) -> u64 {
    values.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).fold(0, |a, (_, &v)| a | 1 << v)
}

/// All inclusion-reversing `O` on nonempty subsets of `[n]` with
/// `lower ⊆ O(A) ⊆ bound[A]`, values in `members`. `O` is stored at index
/// `mask - 1`.
pub(crate) fn decorations(n: usize, bound: &[OpenSet], members: &[OpenSet], lower: OpenSet) -> Vec<Vec<OpenSet>> {
    let masks = subset_masks(n);
    let candidates: Vec<OpenSet> = members.iter().copied().filter(|m| lower.is_subset(*m)).collect();
    let mut out = Vec::new();
    let mut cur = vec![OpenSet::EMPTY; masks.len()];
    fn rec(
        pos: usize,
        masks: &[u64],
        bound: &[OpenSet],
        candidates: &[OpenSet],
        cur: &mut Vec<OpenSet>,
        out: &mut Vec<Vec<OpenSet>>,
    ) {
        if pos == masks.len() {
            out.push(cur.clone());
            return;
        }
        let mask = masks[pos];
        let mut allowed = bound[(mask - 1) as usize];
        if mask.count_ones() >= 2 {
            for i in mask_points(mask) {
                allowed = allowed.intersection(cur[(mask & !(1 << i)) as usize - 1]);
            }
        }
        for &c in candidates {
            if c.is_subset(allowed) {
                cur[(mask - 1) as usize] = c;
                rec(pos + 1, masks, bound, candidates, cur, out);
            }
        }
    }
    rec(0, &masks, bound, &candidates, &mut cur, &mut out);
    out
}

/// A simplex `(σ, O)` of a refinement.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RefinedSimplex {
    pub sigma: SimplexRef,
    /// `O(A)` at index `mask(A) - 1`.
    pub decoration: Vec<OpenSet>,
}

impl RefinedSimplex {
    pub fn dim(&self) -> usize {
        self.sigma.dim()
    }

    pub fn value(&self, mask: u64) -> OpenSet {
        self.decoration[(mask - 1) as usize]
    }

    /// `O([n])`.
    pub fn top(&self) -> OpenSet {
        *self.decoration.last().expect("nonempty decoration")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
struct Bounds {
    /// `O(A) ⊆ upper` for all `A`.
    upper: OpenSet,
    /// `lower ⊆ O(A)` for all `A`.
    lower: OpenSet,
}

struct RefinementModel<'a> {
    base: &'a Hypercover,
    basis: &'a Basis,
    bounds: Bounds,
}

impl RefinementModel<'_> {
    /// `U(ι_A^*σ) ∩ upper` for every nonempty `A`.
    fn bounds_for(&self, sigma: &SimplexRef) -> Vec<OpenSet> {
        let n = sigma.dim();
        let k = self.base.spine();
        (1..1u64 << (n + 1))
            .map(|mask| {
                let iota = MonotoneMap::with_image(n, &mask_points(mask)).expect("sorted");
                self.base.open_of(&k.pullback_unchecked(sigma, &iota)).intersection(self.bounds.upper)
            })
            .collect()
    }
}

impl SimplicialModel for RefinementModel<'_> {
    type Simplex = RefinedSimplex;

    fn simplices(&self, d: usize) -> Vec<RefinedSimplex> {
        let mut out = Vec::new();
        for sigma in self.base.spine().simplices(d).expect("within truncation") {
            let bound = self.bounds_for(&sigma);
            for decoration in decorations(d, &bound, self.basis.members(), self.bounds.lower) {
                out.push(RefinedSimplex { sigma: sigma.clone(), decoration });
            }
        }
        out
    }

    fn pullback(&self, x: &RefinedSimplex, alpha: &MonotoneMap) -> RefinedSimplex {
        let sigma = self.base.spine().pullback_unchecked(&x.sigma, alpha);
        let decoration = (1..1u64 << (alpha.source_dim() + 1))
            .map(|mask| x.value(image_mask(alpha.values(), mask)))
            .collect();
        RefinedSimplex { sigma, decoration }
    }

    fn label(&self, x: &RefinedSimplex) -> String {
        let space = self.base.space();
        let opens: Vec<String> = x.decoration.iter().map(|&o| space.show(o)).collect();
        format!("{}|{}", x.sigma, opens.join(";"))
    }
}

/// `(K^B, U^B)` with its projection to `K`.
#[derive(Clone, Debug)]
pub struct RefinedHypercover {
    base: Hypercover,
    basis: Basis,
    bounds: Bounds,
    truncation: usize,
    built: ModelComplex<RefinedSimplex>,
    hypercover: Hypercover,
}

impl RefinedHypercover {
    /// Builds levels `0..=truncation` exhaustively.
    pub fn new(base: &Hypercover, basis: &Basis, truncation: usize) -> Result<Self> {
        if basis.space() != base.space() {
            return Err(HypercoverError::BasisMismatch);
        }
        base.spine().ensure_dim(truncation)?;
        let bounds = Bounds { upper: base.target(), lower: OpenSet::EMPTY };
        Ok(Self::build(base.clone(), basis.clone(), bounds, base.target(), truncation))
    }

    fn build(base: Hypercover, basis: Basis, bounds: Bounds, target: OpenSet, truncation: usize) -> Self {
        let model = RefinementModel { base: &base, basis: &basis, bounds };
        let built = ModelComplex::build(&model, truncation, Extent::Truncated);
        let assignment = (0..=truncation).map(|d| built.level(d).iter().map(RefinedSimplex::top).collect()).collect();
        let hypercover =
            Hypercover::new_unchecked(built.complex().clone(), base.space().clone(), target, assignment);
        Self { base, basis, bounds, truncation, built, hypercover }
    }

    fn model(&self) -> RefinementModel<'_> {
        RefinementModel { base: &self.base, basis: &self.basis, bounds: self.bounds }
    }

    pub fn base(&self) -> &Hypercover {
        &self.base
    }

    pub fn basis(&self) -> &Basis {
        &self.basis
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }

    /// `(K^B, U^B)` as a hypercover.
    pub fn hypercover(&self) -> &Hypercover {
        &self.hypercover
    }

    pub fn spine(&self) -> &FiniteTypeSimplicialSet {
        self.hypercover.spine()
    }

    /// The decorated simplex behind a normal form of `K^B`.
    pub fn element(&self, x: &SimplexRef) -> RefinedSimplex {
        self.built.realize(&self.model(), x)
    }

    /// Normal form in `K^B` of a decorated simplex.
    pub fn normal_form(&self, x: &RefinedSimplex) -> SimplexRef {
        self.built.decompose(&self.model(), x, x.dim())
    }

    /// `π`: the underlying simplex of `K`.
    pub fn project(&self, x: &SimplexRef) -> SimplexRef {
        self.element(x).sigma
    }

    /// Every simplex of level `n`, degenerate ones included.
    pub fn level(&self, n: usize) -> Vec<RefinedSimplex> {
        assert!(n <= self.truncation);
        let mut all = self.model().simplices(n);
        all.sort();
        all
    }

    pub fn level_cardinalities(&self) -> Vec<usize> {
        (0..=self.truncation).map(|n| self.spine().count(n)).collect()
    }

    /// Checks that `π` commutes with faces and `U^B ⊆ U ∘ π`, on every
    /// nondegenerate simplex.
    pub fn check_projection(&self) -> std::result::Result<(), String> {
        let k = self.spine();
        for d in 0..=self.truncation {
            for id in 0..k.count(d) {
                let x = SimplexRef::nondegenerate(d, id);
                let elem = self.element(&x);
                if !elem.top().is_subset(self.base.open_of(&elem.sigma)) {
                    return Err(format!("U^B exceeds U∘π on {}", k.label(d, id)));
                }
                if d == 0 {
                    continue;
                }
                for i in 0..=d {
                    let face = k.face(&x, i).map_err(|e| e.to_string())?;
                    let down = self.base.spine().face(&elem.sigma, i).map_err(|e| e.to_string())?;
                    if self.project(&face) != down {
                        return Err(format!("π does not commute with d{i} on {}", k.label(d, id)));
                    }
                }
            }
        }
        Ok(())
    }

    /// `K^B_{⊂B}`: simplices with every `O(A) ⊆ b0`, as a hypercover of `b0`.
    pub fn restrict_below(&self, b0: OpenSet) -> Result<RefinedHypercover> {
        if !self.basis.contains(b0) {
            return Err(TopologyError::NotBasisMember(self.base.space().show(b0)).into());
        }
        let bounds = Bounds { upper: self.bounds.upper.intersection(b0), lower: self.bounds.lower };
        let target = self.hypercover.target().intersection(b0);
        Ok(Self::build(self.base.clone(), self.basis.clone(), bounds, target, self.truncation))
    }

    /// `K^B_{B⊂}`: the simplices whose assigned open contains `b0`.
    pub fn super_slice(&self, b0: OpenSet) -> FiniteTypeSimplicialSet {
        let bounds = Bounds { upper: self.bounds.upper, lower: self.bounds.lower.union(b0) };
        let model = RefinementModel { base: &self.base, basis: &self.basis, bounds };
        ModelComplex::build(&model, self.truncation, Extent::Truncated).into_complex()
    }
}

pub fn refine_to_basis(h: &Hypercover, basis: &Basis, truncation: usize) -> Result<RefinedHypercover> {
    RefinedHypercover::new(h, basis, truncation)
}

/// `K̃^B`: each level of a refinement ordered by pointwise inclusion of
/// decorations over a common simplex.
#[derive(Clone, Debug)]
pub struct CategorifiedRefinement {
    levels: Vec<Vec<RefinedSimplex>>,
}

impl CategorifiedRefinement {
    pub fn new(r: &RefinedHypercover) -> Self {
        Self { levels: (0..=r.truncation()).map(|n| r.level(n)).collect() }
    }

    pub fn level(&self, n: usize) -> &[RefinedSimplex] {
        &self.levels[n]
    }

    /// `a ≤ b` iff same simplex and `a.O(A) ⊆ b.O(A)` for all `A`.
    pub fn leq(a: &RefinedSimplex, b: &RefinedSimplex) -> bool {
        a.sigma == b.sigma && a.decoration.iter().zip(&b.decoration).all(|(x, y)| x.is_subset(*y))
    }

    /// Index pairs `(i, j)` with `level[i] ≤ level[j]`, `i != j`.
    pub fn order_pairs(&self, n: usize) -> Vec<(usize, usize)> {
        let level = &self.levels[n];
        let mut out = Vec::new();
        for (i, a) in level.iter().enumerate() {
            for (j, b) in level.iter().enumerate() {
                if i != j && Self::leq(a, b) {
                    out.push((i, j));
                }
            }
        }
        out
    }

    pub fn is_antisymmetric(&self, n: usize) -> bool {
        let level = &self.levels[n];
        level.iter().enumerate().all(|(i, a)| {
            level.iter().enumerate().all(|(j, b)| i == j || !(Self::leq(a, b) && Self::leq(b, a)))
        })
    }
}

pub fn categorify(r: &RefinedHypercover) -> CategorifiedRefinement {
    CategorifiedRefinement::new(r)
}

/// An element `([σ, f], O)` of `S(K)^B`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SymRefinedElement {
    pub class: SymElement,
    pub decoration: Vec<OpenSet>,
}

impl SymRefinedElement {
    pub fn top(&self) -> OpenSet {
        *self.decoration.last().expect("nonempty decoration")
    }
}

/// `S(K)^B` on levels `0..=truncation`.
#[derive(Clone, Debug)]
pub struct SymRefinement {
    sym: SymmetricSet,
    levels: Vec<Vec<SymRefinedElement>>,
}

impl SymRefinement {
    pub fn new(r: &RefinedHypercover) -> Result<Self> {
        let base = r.base();
        let k = base.spine();
        let sym = SymmetricSet::new(k, r.truncation())?;
        let mut levels = Vec::with_capacity(r.truncation() + 1);
        for n in 0..=r.truncation() {
            let mut level = Vec::new();
            for class in sym.level(n) {
                let core = class.core_simplex();
                let m = class.core_dim();
                let bound: Vec<OpenSet> = (1..1u64 << (n + 1))
                    .map(|mask| {
                        let img = class.surj().image_mask(mask);
                        let iota = MonotoneMap::with_image(m, &mask_points(img)).expect("sorted");
                        base.open_of(&k.pullback_unchecked(&core, &iota)).intersection(r.bounds.upper)
                    })
                    .collect();
                for decoration in decorations(n, &bound, r.basis().members(), r.bounds.lower) {
                    level.push(SymRefinedElement { class: class.clone(), decoration });
                }
            }
            level.sort();
            levels.push(level);
        }
        Ok(Self { sym, levels })
    }

    pub fn level(&self, n: usize) -> &[SymRefinedElement] {
        &self.levels[n]
    }

    pub fn contains(&self, e: &SymRefinedElement) -> bool {
        self.levels.get(e.class.level()).is_some_and(|l| l.binary_search(e).is_ok())
    }

    /// `h^*([σ, f], O) = ([σ, f ∘ h], O ∘ h_*)`.
    pub fn act(&self, e: &SymRefinedElement, h: &FinMap) -> Result<SymRefinedElement> {
        let class = self.sym.act(&e.class, h)?;
        let decoration = (1..1u64 << (h.source_dim() + 1))
            .map(|mask| e.decoration[(h.image_mask(mask) - 1) as usize])
            .collect();
        Ok(SymRefinedElement { class, decoration })
    }

    /// `(σ, O) ↦ ([σ, id], O)`.
    pub fn embed(&self, x: &RefinedSimplex) -> Result<SymRefinedElement> {
        Ok(SymRefinedElement { class: self.sym.class_of(&x.sigma)?, decoration: x.decoration.clone() })
    }

    /// Evaluates the square `Δ/K^B -> Fin/S(K)^B -> B^op` against `U^B`
    /// pointwise: the embedding lands in `S(K)^B`, commutes with cofaces and
    /// codegeneracies, and preserves the assigned open.
    pub fn check_square(&self, r: &RefinedHypercover) -> std::result::Result<usize, String> {
        let model = r.model();
        let mut checked = 0;
        for n in 0..=r.truncation().min(self.levels.len() - 1) {
            for x in r.level(n) {
                let e = self.embed(&x).map_err(|e| e.to_string())?;
                if !self.contains(&e) {
                    return Err(format!("embedding of {x:?} is not an element of S(K)^B"));
                }
                if e.top() != x.top() {
                    return Err(format!("assigned opens differ on {x:?}"));
                }
                let mut maps = Vec::new();
                if n >= 1 {
                    maps.extend((0..=n).map(|i| MonotoneMap::coface(n, i)));
                }
                if n < r.truncation() {
                    maps.extend((0..=n).map(|j| MonotoneMap::codegeneracy(n, j)));
                }
                for alpha in maps {
                    let down = self.embed(&model.pullback(&x, &alpha)).map_err(|e| e.to_string())?;
                    let across = self.act(&e, &FinMap::from(&alpha)).map_err(|e| e.to_string())?;
                    if down != across {
                        return Err(format!("naturality fails on {x:?} along {alpha:?}"));
                    }
                }
                checked += 1;
            }
        }
        Ok(checked)
    }
}

pub fn sym_refine(r: &RefinedHypercover) -> Result<SymRefinement> {
    SymRefinement::new(r)
}

/// Every refinement in `hs` keyed by target, for quick lookup.
pub fn by_target(hs: &[Hypercover]) -> HashMap<OpenSet, Vec<usize>> {
    let mut map: HashMap<OpenSet, Vec<usize>> = HashMap::new();
    for (i, h) in hs.iter().enumerate() {
        map.entry(h.target()).or_default().push(i);
    }
    map
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo() -> (FiniteSpace, OpenSet, OpenSet) {
        let x = FiniteSpace::pseudocircle();
        let abc = x.open(["a", "b", "c"]).unwrap();
        let abd = x.open(["a", "b", "d"]).unwrap();
        (x, abc, abd)
    }

    #[test]
    fn trivial_hypercover_passes() {
        let (x, abc, _) = pseudo();
        for u in [x.full(), abc, OpenSet::EMPTY] {
            let h = Hypercover::trivial(&x, u).unwrap();
            assert!(h.check(3).unwrap().holds());
            assert_eq!(h.cone_extension().tip(), u);
        }
    }

    #[test]
    fn cech_of_pseudocircle() {
        let (x, abc, abd) = pseudo();
        let h = cech_from_cover(&x, x.full(), &[abc, abd], 3).unwrap();
        assert_eq!(h.assignment()[0], vec![abc, abd]);
        assert_eq!(h.spine().label(1, 0), "0,1");
        assert_eq!(h.assignment()[1][0], x.open(["a", "b"]).unwrap());
        assert!(h.check(3).unwrap().holds());
        assert_eq!(h.cone_extension().tip(), x.full());
        // cone tip for a subspace cover
        let a = x.open(["a"]).unwrap();
        let b = x.open(["b"]).unwrap();
        let ab = a.union(b);
        let h = cech_from_cover(&x, ab, &[a, b], 2).unwrap();
        assert_eq!(h.cone_extension().tip(), ab);
    }

    #[test]
    fn shrunk_edge_fails_with_witness() {
        let (x, abc, abd) = pseudo();
        let h = cech_from_cover(&x, x.full(), &[abc, abd], 3).unwrap();
        let a = x.open(["a"]).unwrap();
        let mutated = h.with_assignment_unchecked(1, 0, a);
        let check = mutated.check(3).unwrap();
        let w = check.failure.unwrap();
        assert_eq!(w.n, 1);
        let sphere = w.sphere.unwrap();
        assert_eq!(sphere.facets(), &[SimplexRef::nondegenerate(0, 1), SimplexRef::nondegenerate(0, 0)]);
        assert_eq!(w.lhs, a);
        assert_eq!(w.rhs, x.open(["a", "b"]).unwrap());
    }

    #[test]
    fn cech_edge_cases() {
        let x = FiniteSpace::discrete(&["p", "q", "r"]);
        let singletons: Vec<OpenSet> = (0..3).map(OpenSet::singleton).collect();
        let h = cech_from_cover(&x, x.full(), &singletons, 2).unwrap();
        for d in 1..=2 {
            assert!(h.assignment()[d].iter().all(|o| o.is_empty()));
        }
        let single = cech_from_cover(&x, x.full(), &[x.full()], 3).unwrap();
        assert_eq!(single.spine().count(0), 1);
        assert_eq!(single.spine().count(1), 0);
        let err = cech_from_cover(&x, x.full(), &singletons[..2], 2).unwrap_err();
        assert!(matches!(err, HypercoverError::Topology(TopologyError::NotACover { .. })));
    }

    #[test]
    fn functoriality_is_enforced() {
        let (x, abc, abd) = pseudo();
        let h = cech_from_cover(&x, x.full(), &[abc, abd], 1).unwrap();
        let mut assignment = h.assignment().to_vec();
        assignment[1][0] = x.full();
        let err = Hypercover::new(h.spine().clone(), x.clone(), x.full(), assignment).unwrap_err();
        assert!(matches!(err, HypercoverError::NotFunctorial { .. }));
    }

    #[test]
    fn refinement_of_trivial_hypercover() {
        let (x, abc, _) = pseudo();
        let basis = x.minimal_basis();
        let h = Hypercover::trivial(&x, x.full()).unwrap();
        let r = refine_to_basis(&h, &basis, 2).unwrap();
        assert_eq!(r.spine().count(0), 4);
        let all = x.all_opens_basis();
        let r_all = refine_to_basis(&h, &all, 1).unwrap();
        assert_eq!(r_all.spine().count(0), x.opens().len() - 1);
        let below = r.restrict_below(abc).unwrap();
        let tops: Vec<String> =
            (0..below.spine().count(0)).map(|v| x.show(below.hypercover().assignment()[0][v])).collect();
        assert_eq!(tops, vec!["{a}", "{b}", "{a,b,c}"]);
        assert!(below.hypercover().check(2).unwrap().holds());
    }

    #[test]
    fn refinement_of_cech_edges() {
        let (x, abc, abd) = pseudo();
        let h = cech_from_cover(&x, x.full(), &[abc, abd], 2).unwrap();
        let r = refine_to_basis(&h, &x.minimal_basis(), 2).unwrap();
        let a = x.open(["a"]).unwrap();
        let b = x.open(["b"]).unwrap();
        let edge01 = SimplexRef::nondegenerate(1, 0);
        let mut seen = 0;
        for elem in r.level(1) {
            if elem.sigma == edge01 {
                assert!(elem.top() == a || elem.top() == b);
                seen += 1;
            }
        }
        assert!(seen > 0);
        assert!(r.hypercover().check(2).unwrap().holds());
        r.check_projection().unwrap();
    }

    #[test]
    fn categorified_order() {
        let (x, _, _) = pseudo();
        let h = Hypercover::trivial(&x, x.full()).unwrap();
        let r = refine_to_basis(&h, &x.minimal_basis(), 1).unwrap();
        let c = categorify(&r);
        let a = x.open(["a"]).unwrap();
        let abc = x.open(["a", "b", "c"]).unwrap();
        let lo = c.level(0).iter().position(|e| e.top() == a).unwrap();
        let hi = c.level(0).iter().position(|e| e.top() == abc).unwrap();
        assert!(c.order_pairs(0).contains(&(lo, hi)));
        assert!(!c.order_pairs(0).contains(&(hi, lo)));
        assert!(c.is_antisymmetric(0) && c.is_antisymmetric(1));
    }

    #[test]
    fn sym_refinement_square() {
        let (x, abc, abd) = pseudo();
        let h = cech_from_cover(&x, x.full(), &[abc, abd], 2).unwrap();
        let r = refine_to_basis(&h, &x.minimal_basis(), 2).unwrap();
        let s = sym_refine(&r).unwrap();
        assert_eq!(s.level(0).len(), r.level(0).len());
        assert!(s.check_square(&r).unwrap() > 0);
    }

    #[test]
    fn sym_refinement_over_a_point() {
        let (x, _, _) = pseudo();
        let h = Hypercover::trivial(&x, x.full()).unwrap();
        let basis = x.minimal_basis();
        let r = refine_to_basis(&h, &basis, 2).unwrap();
        let s = sym_refine(&r).unwrap();
        for n in 0..=2 {
            let bound = vec![x.full(); (1 << (n + 1)) - 1];
            let expected = decorations(n, &bound, basis.members(), OpenSet::EMPTY).len();
            assert_eq!(s.level(n).len(), expected);
        }
    }

    #[test]
    fn super_slices() {
        let (x, _, _) = pseudo();
        let h = Hypercover::trivial(&x, x.full()).unwrap();
        let r = refine_to_basis(&h, &x.minimal_basis(), 2).unwrap();
        let a = x.open(["a"]).unwrap();
        let k = r.super_slice(a);
        assert!(!k.is_empty());
        assert!(k.is_trivial_kan_up_to(2).unwrap().holds);
        let (_, abc, abd) = pseudo();
        let cech = cech_from_cover(&x, x.full(), &[abc, abd], 1).unwrap();
        let r = refine_to_basis(&cech, &x.minimal_basis(), 1).unwrap();
        assert!(r.super_slice(x.full()).is_empty());
    }
}
