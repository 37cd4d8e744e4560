//! Finite-type simplicial sets.
//!
//! A [`FiniteTypeSimplicialSet`] stores only its nondegenerate simplices,
//! numbered per dimension, together with their faces. Every simplex, degenerate
//! or not, is addressed by a [`SimplexRef`]: a surjective monotone map paired
//! with a nondegenerate core, i.e. its Eilenberg–Zilber decomposition. Two
//! simplices are equal exactly when their references compare equal.
//!
//! Complexes carry an explicit truncation. A [`Extent::Complete`] complex has
//! no nondegenerate simplices above `max_dim` and can be queried in any
//! dimension; a [`Extent::Truncated`] one is only known up to `max_dim` and
//! queries past that bound fail with [`SimplicialError::BeyondTruncation`].
//!
//! Complexes that arise from a concrete description (nerves, Čech nerves,
//! refinements, ...) are built through [`SimplicialModel`], which only has to
//! list all simplices of a dimension and implement pullback along monotone
//! maps. Nondegenerate simplices and the normal form are then recovered
//! generically.

use std::collections::HashMap;
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimplicialError {
    #[error("values {values:?} do not define a monotone map into [{target_dim}]")]
    NotMonotone { values: Vec<usize>, target_dim: usize },
    #[error("cannot compose a map into [{left_source}] after a map into [{right_target}]")]
    NotComposable { left_source: usize, right_target: usize },
    #[error("face index {index} out of range for a {dim}-simplex")]
    FaceIndex { index: usize, dim: usize },
    #[error("dimension {dim} lies beyond the truncation bound {max_dim}")]
    BeyondTruncation { dim: usize, max_dim: usize },
    #[error("no nondegenerate {dim}-simplex with id {id}")]
    UnknownSimplex { dim: usize, id: usize },
    #[error("degeneracy {0:?} is not surjective")]
    NotSurjective(Vec<usize>),
    #[error("simplex {id} in dimension {dim}: {reason}")]
    MalformedFace { dim: usize, id: usize, reason: String },
    #[error("simplicial identity fails on simplex {id} of dimension {dim}: d{i} d{j} != d{jm} d{i}", jm = j - 1)]
    IdentityViolation { dim: usize, id: usize, i: usize, j: usize },
    #[error("invalid boundary sphere: {0}")]
    InvalidSphere(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T, E = SimplicialError> = std::result::Result<T, E>;

/// A weakly increasing map `[source_dim] -> [target_dim]` of ordinals.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MonotoneMap {
    target_dim: usize,
    values: Vec<usize>,
}

impl fmt::Debug for MonotoneMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}->[{}]", self.values, self.target_dim)
    }
}

impl MonotoneMap {
    pub fn new(target_dim: usize, values: Vec<usize>) -> Result<Self> {
        let ok = !values.is_empty()
            && values.windows(2).all(|w| w[0] <= w[1])
            && values.iter().all(|&v| v <= target_dim);
        if !ok {
            return Err(SimplicialError::NotMonotone { values, target_dim });
        }
        Ok(Self { target_dim, values })
    }

    pub(crate) fn new_unchecked(target_dim: usize, values: Vec<usize>) -> Self {
        debug_assert!(values.windows(2).all(|w| w[0] <= w[1]));
        Self { target_dim, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(n, (0..=n).collect())
    }

    /// The coface `[n-1] -> [n]` skipping `i`.
    pub fn coface(n: usize, i: usize) -> Self {
        assert!(n >= 1 && i <= n);
        Self::new_unchecked(n, (0..n).map(|k| if k < i { k } else { k + 1 }).collect())
    }

    /// The codegeneracy `[n+1] -> [n]` hitting `j` twice.
    pub fn codegeneracy(n: usize, j: usize) -> Self {
        assert!(j <= n);
        Self::new_unchecked(n, (0..=n + 1).map(|k| if k <= j { k } else { k - 1 }).collect())
    }

    /// The constant map `[source_dim] -> [target_dim]` at `value`.
    pub fn constant(source_dim: usize, target_dim: usize, value: usize) -> Self {
        assert!(value <= target_dim);
        Self::new_unchecked(target_dim, vec![value; source_dim + 1])
    }

    /// The increasing injection with the given (sorted, nonempty) image.
    pub fn with_image(target_dim: usize, image: &[usize]) -> Result<Self> {
        if image.windows(2).any(|w| w[0] >= w[1]) {
            return Err(SimplicialError::NotMonotone { values: image.to_vec(), target_dim });
        }
        Self::new(target_dim, image.to_vec())
    }

    pub fn source_dim(&self) -> usize {
        self.values.len() - 1
    }

    pub fn target_dim(&self) -> usize {
        self.target_dim
    }

    pub fn values(&self) -> &[usize] {
        &self.values
    }

    pub fn apply(&self, i: usize) -> usize {
        self.values[i]
    }

    /// `self ∘ other`: first `other`, then `self`.
    pub fn compose(&self, other: &MonotoneMap) -> Result<MonotoneMap> {
        if other.target_dim != self.source_dim() {
            return Err(SimplicialError::NotComposable {
                left_source: self.source_dim(),
                right_target: other.target_dim,
            });
        }
        Ok(Self::new_unchecked(
            self.target_dim,
            other.values.iter().map(|&v| self.values[v]).collect(),
        ))
    }

    pub fn is_surjective(&self) -> bool {
        self.values[0] == 0
            && *self.values.last().unwrap() == self.target_dim
            && self.values.windows(2).all(|w| w[1] - w[0] <= 1)
    }

    pub fn is_injective(&self) -> bool {
        self.values.windows(2).all(|w| w[0] < w[1])
    }

    pub fn is_identity(&self) -> bool {
        self.target_dim == self.source_dim() && self.is_injective()
    }

    /// Splits `self` as `mono ∘ epi` with `epi` surjective and `mono` injective.
    pub fn epi_mono(&self) -> (MonotoneMap, MonotoneMap) {
        let mut image: Vec<usize> = self.values.clone();
        image.dedup();
        let p = image.len() - 1;
        let mut epi = Vec::with_capacity(self.values.len());
        let mut k = 0;
        for &v in &self.values {
            while image[k] != v {
                k += 1;
            }
            epi.push(k);
        }
        (Self::new_unchecked(p, epi), Self::new_unchecked(self.target_dim, image))
    }
}

/// All surjective monotone maps `[n] -> [m]`, in lexicographic order of values.
pub fn surjections(n: usize, m: usize) -> Vec<MonotoneMap> {
    let mut out = Vec::new();
    if m > n {
        return out;
    }
    // choose the m steps among the n gaps
    fn rec(n: usize, m: usize, pos: usize, cur: &mut Vec<usize>, out: &mut Vec<MonotoneMap>) {
        if pos == n + 1 {
            if *cur.last().unwrap() == m {
                out.push(MonotoneMap::new_unchecked(m, cur.clone()));
            }
            return;
        }
        let last = *cur.last().unwrap();
        cur.push(last);
        rec(n, m, pos + 1, cur, out);
        cur.pop();
        if last < m {
            cur.push(last + 1);
            rec(n, m, pos + 1, cur, out);
            cur.pop();
        }
    }
    let mut cur = vec![0];
    rec(n, m, 1, &mut cur, &mut out);
    out
}

/// All monotone maps `[n] -> [m]`.
pub fn monotone_maps(n: usize, m: usize) -> Vec<MonotoneMap> {
    let mut out = Vec::new();
    fn rec(n: usize, m: usize, cur: &mut Vec<usize>, out: &mut Vec<MonotoneMap>) {
        if cur.len() == n + 1 {
            out.push(MonotoneMap::new_unchecked(m, cur.clone()));
            return;
        }
        let lo = cur.last().copied().unwrap_or(0);
        for v in lo..=m {
            cur.push(v);
            rec(n, m, cur, out);
            cur.pop();
        }
    }
    rec(n, m, &mut Vec::new(), &mut out);
    out
}

/// A simplex in Eilenberg–Zilber normal form: `degeneracy^*(core)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct SimplexRef {
    degeneracy: MonotoneMap,
    core: usize,
}

impl SimplexRef {
    pub fn new(degeneracy: MonotoneMap, core: usize) -> Result<Self> {
        if !degeneracy.is_surjective() {
            return Err(SimplicialError::NotSurjective(degeneracy.values));
        }
        Ok(Self { degeneracy, core })
    }

    /// The nondegenerate simplex `core` of dimension `dim` itself.
    pub fn nondegenerate(dim: usize, core: usize) -> Self {
        Self { degeneracy: MonotoneMap::identity(dim), core }
    }

    pub fn dim(&self) -> usize {
        self.degeneracy.source_dim()
    }

    pub fn core_dim(&self) -> usize {
        self.degeneracy.target_dim()
    }

    pub fn core(&self) -> usize {
        self.core
    }

    pub fn degeneracy(&self) -> &MonotoneMap {
        &self.degeneracy
    }

    pub fn is_degenerate(&self) -> bool {
        self.dim() != self.core_dim()
    }

    fn sort_key(&self) -> (usize, usize, usize, &[usize]) {
        (self.dim(), self.core_dim(), self.core, self.degeneracy.values())
    }
}

impl PartialOrd for SimplexRef {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for SimplexRef {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.sort_key().cmp(&other.sort_key())
    }
}

impl fmt::Debug for SimplexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Textual form `id` for a nondegenerate simplex, `id@v0,v1,...` otherwise.
impl fmt::Display for SimplexRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_degenerate() {
            let vals: Vec<String> = self.degeneracy.values().iter().map(|v| v.to_string()).collect();
            write!(f, "{}@{}", self.core, vals.join(","))
        } else {
            write!(f, "{}", self.core)
        }
    }
}

impl SimplexRef {
    /// Parses the textual form; a bare id needs the simplex dimension.
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let bad = || SimplicialError::Parse(format!("bad simplex reference `{text}`"));
        match text.split_once('@') {
            None => Ok(Self::nondegenerate(dim, text.trim().parse().map_err(|_| bad())?)),
            Some((core, vals)) => {
                let core = core.trim().parse().map_err(|_| bad())?;
                let values: Vec<usize> = vals
                    .split(',')
                    .map(|v| v.trim().parse().map_err(|_| bad()))
                    .collect::<Result<_>>()?;
                if values.len() != dim + 1 {
                    return Err(bad());
                }
                let target = *values.last().unwrap();
                let degeneracy = MonotoneMap::new(target, values)?;
                Self::new(degeneracy, core)
            }
        }
    }
}

impl Serialize for SimplexRef {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A map `∂Δ^n -> K`, given by its facets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct BoundarySphere {
    facets: Vec<SimplexRef>,
}

impl BoundarySphere {
    pub fn new(k: &FiniteTypeSimplicialSet, facets: Vec<SimplexRef>) -> Result<Self> {
        let n = facets.len().checked_sub(1).filter(|&n| n >= 1).ok_or_else(|| {
            SimplicialError::InvalidSphere("a sphere needs at least two facets".into())
        })?;
        for t in &facets {
            if t.dim() != n - 1 {
                return Err(SimplicialError::InvalidSphere(format!("facet {t} is not of dimension {}", n - 1)));
            }
            k.check_ref(t)?;
        }
        for j in 0..=n {
            for i in 0..j {
                if n >= 2 && k.face(&facets[j], i)? != k.face(&facets[i], j - 1)? {
                    return Err(SimplicialError::InvalidSphere(format!(
                        "d{i} of facet {j} differs from d{} of facet {i}",
                        j - 1
                    )));
                }
            }
        }
        Ok(Self { facets })
    }

    pub fn dim(&self) -> usize {
        self.facets.len() - 1
    }

    pub fn facets(&self) -> &[SimplexRef] {
        &self.facets
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Extent {
    /// No nondegenerate simplices above `max_dim`.
    Complete,
    /// Only the `max_dim`-skeleton is known.
    Truncated,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FiniteTypeSimplicialSet {
    max_dim: usize,
    extent: Extent,
    labels: Vec<Vec<String>>,
    /// `faces[d][id][i]` is the i-th face of the nondegenerate simplex `id` in
    /// dimension `d >= 1`; `faces[0]` holds empty lists.
    faces: Vec<Vec<Vec<SimplexRef>>>,
}

impl FiniteTypeSimplicialSet {
    /// Builds a complex from explicit face tables and verifies it: face
    /// dimensions, references, and the simplicial identities.
    pub fn new(
        max_dim: usize,
        extent: Extent,
        labels: Vec<Vec<String>>,
        faces: Vec<Vec<Vec<SimplexRef>>>,
    ) -> Result<Self> {
        if labels.len() != max_dim + 1 || faces.len() != max_dim + 1 {
            return Err(SimplicialError::Parse(format!(
                "expected {} dimension tables, found {} label and {} face tables",
                max_dim + 1,
                labels.len(),
                faces.len()
            )));
        }
        for d in 0..=max_dim {
            if labels[d].len() != faces[d].len() {
                return Err(SimplicialError::Parse(format!("dimension {d}: label and face counts differ")));
            }
        }
        let k = Self { max_dim, extent, labels, faces };
        for d in 0..=max_dim {
            for (id, fs) in k.faces[d].iter().enumerate() {
                let expected = if d == 0 { 0 } else { d + 1 };
                if fs.len() != expected {
                    return Err(SimplicialError::MalformedFace {
                        dim: d,
                        id,
                        reason: format!("expected {expected} faces, found {}", fs.len()),
                    });
                }
                for f in fs {
                    if f.dim() + 1 != d {
                        return Err(SimplicialError::MalformedFace {
                            dim: d,
                            id,
                            reason: format!("face {f} has dimension {}", f.dim()),
                        });
                    }
                    k.check_ref(f).map_err(|e| SimplicialError::MalformedFace {
                        dim: d,
                        id,
                        reason: e.to_string(),
                    })?;
                }
            }
        }
        k.verify_identities()?;
        Ok(k)
    }

    pub(crate) fn new_unchecked(
        max_dim: usize,
        extent: Extent,
        labels: Vec<Vec<String>>,
        faces: Vec<Vec<Vec<SimplexRef>>>,
    ) -> Self {
        Self { max_dim, extent, labels, faces }
    }

    /// Checks `d_i d_j = d_{j-1} d_i` for `i < j` on every nondegenerate simplex.
    pub fn verify_identities(&self) -> Result<()> {
        for d in 2..=self.max_dim {
            for id in 0..self.count(d) {
                let x = SimplexRef::nondegenerate(d, id);
                for j in 0..=d {
                    let dj = self.face(&x, j)?;
                    for i in 0..j {
                        let dj_then_i = self.face(&dj, i)?;
                        let di = self.face(&x, i)?;
                        if dj_then_i != self.face(&di, j - 1)? {
                            return Err(SimplicialError::IdentityViolation { dim: d, id, i, j });
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn max_dim(&self) -> usize {
        self.max_dim
    }

    pub fn extent(&self) -> Extent {
        self.extent
    }

    /// Number of nondegenerate simplices in dimension `d`.
    pub fn count(&self, d: usize) -> usize {
        self.faces.get(d).map_or(0, Vec::len)
    }

    pub fn label(&self, d: usize, id: usize) -> &str {
        &self.labels[d][id]
    }

    pub fn labels(&self, d: usize) -> &[String] {
        self.labels.get(d).map_or(&[], Vec::as_slice)
    }

    pub fn is_empty(&self) -> bool {
        self.count(0) == 0
    }

    /// Highest dimension carrying a nondegenerate simplex.
    pub fn top_dim(&self) -> Option<usize> {
        (0..=self.max_dim).rev().find(|&d| self.count(d) > 0)
    }

    /// Fails when dimension `d` is not determined by the stored data.
    pub fn ensure_dim(&self, d: usize) -> Result<()> {
        if self.extent == Extent::Truncated && d > self.max_dim {
            return Err(SimplicialError::BeyondTruncation { dim: d, max_dim: self.max_dim });
        }
        Ok(())
    }

    pub fn check_ref(&self, x: &SimplexRef) -> Result<()> {
        self.ensure_dim(x.dim())?;
        if x.core >= self.count(x.core_dim()) {
            return Err(SimplicialError::UnknownSimplex { dim: x.core_dim(), id: x.core });
        }
        Ok(())
    }

    pub fn nondegenerate_faces(&self, d: usize, id: usize) -> &[SimplexRef] {
        &self.faces[d][id]
    }

    /// `alpha^*(x)` for a monotone `alpha: [k] -> [dim x]`, in normal form.
    pub fn pullback(&self, x: &SimplexRef, alpha: &MonotoneMap) -> Result<SimplexRef> {
        self.check_ref(x)?;
        self.ensure_dim(alpha.source_dim())?;
        Ok(self.pullback_unchecked(x, alpha))
    }

    pub(crate) fn pullback_unchecked(&self, x: &SimplexRef, alpha: &MonotoneMap) -> SimplexRef {
        let comp = x
            .degeneracy
            .compose(alpha)
            .expect("pullback along a map into the simplex dimension");
        let (epi, mono) = comp.epi_mono();
        let face = self.core_face(x.core_dim(), x.core, &mono);
        SimplexRef {
            degeneracy: face.degeneracy.compose(&epi).expect("composable"),
            core: face.core,
        }
    }

    /// `mono^*` of the nondegenerate simplex `(m, id)`.
    fn core_face(&self, m: usize, id: usize, mono: &MonotoneMap) -> SimplexRef {
        let p = mono.source_dim();
        if p == m {
            return SimplexRef::nondegenerate(m, id);
        }
        // mono = coface(m, j) ∘ rest, with j the first value it misses
        let vals = mono.values();
        let j = (0..=m).find(|v| !vals.contains(v)).expect("proper injection misses a value");
        let rest = MonotoneMap::new_unchecked(
            m - 1,
            vals.iter().map(|&v| if v < j { v } else { v - 1 }).collect(),
        );
        let face = &self.faces[m][id][j];
        self.pullback_unchecked(face, &rest)
    }

    /// The `i`-th face of `x`.
    pub fn face(&self, x: &SimplexRef, i: usize) -> Result<SimplexRef> {
        let d = x.dim();
        if d == 0 || i > d {
            return Err(SimplicialError::FaceIndex { index: i, dim: d });
        }
        self.check_ref(x)?;
        Ok(self.pullback_unchecked(x, &MonotoneMap::coface(d, i)))
    }

    /// The `j`-th degeneracy `s_j x`.
    pub fn degeneracy(&self, x: &SimplexRef, j: usize) -> Result<SimplexRef> {
        let d = x.dim();
        if j > d {
            return Err(SimplicialError::FaceIndex { index: j, dim: d });
        }
        self.pullback(x, &MonotoneMap::codegeneracy(d, j))
    }

    pub fn boundary(&self, x: &SimplexRef) -> Result<Vec<SimplexRef>> {
        (0..=x.dim()).map(|i| self.face(x, i)).collect()
    }

    /// The simplex `alpha_k^* ... alpha_1^* core`, where the word lists
    /// `alpha_1, ..., alpha_k` in the order they are applied.
    pub fn normalize(&self, word: &[MonotoneMap], core_dim: usize, core: usize) -> Result<SimplexRef> {
        let mut x = SimplexRef::nondegenerate(core_dim, core);
        self.check_ref(&x)?;
        for alpha in word {
            if alpha.target_dim() != x.dim() {
                return Err(SimplicialError::NotComposable {
                    left_source: x.dim(),
                    right_target: alpha.target_dim(),
                });
            }
            x = self.pullback(&x, alpha)?;
        }
        Ok(x)
    }

    /// The vertices `x(0), ..., x(d)` of a simplex.
    pub fn vertices(&self, x: &SimplexRef) -> Vec<usize> {
        (0..=x.dim())
            .map(|i| self.pullback_unchecked(x, &MonotoneMap::constant(0, x.dim(), i)).core)
            .collect()
    }

    /// Every simplex of dimension `d`, degenerate ones included, in the
    /// canonical order.
    pub fn simplices(&self, d: usize) -> Result<Vec<SimplexRef>> {
        self.ensure_dim(d)?;
        let mut out = Vec::new();
        for m in 0..=d.min(self.max_dim) {
            for s in surjections(d, m) {
                for core in 0..self.count(m) {
                    out.push(SimplexRef { degeneracy: s.clone(), core });
                }
            }
        }
        out.sort();
        Ok(out)
    }

    /// Every map `∂Δ^n -> K`, in lexicographic order of facets.
    pub fn boundary_spheres(&self, n: usize) -> Result<Vec<BoundarySphere>> {
        if n == 0 {
            return Err(SimplicialError::InvalidSphere("spheres start in dimension 1".into()));
        }
        self.ensure_dim(n - 1)?;
        let facets = self.simplices(n - 1)?;
        if n == 1 {
            let mut out = Vec::with_capacity(facets.len() * facets.len());
            for a in &facets {
                for b in &facets {
                    out.push(BoundarySphere { facets: vec![a.clone(), b.clone()] });
                }
            }
            return Ok(out);
        }
        let faces: Vec<Vec<SimplexRef>> =
            facets.iter().map(|t| self.boundary(t)).collect::<Result<_>>()?;
        // prefix[j] groups facets by their first j faces
        let mut prefix: Vec<HashMap<&[SimplexRef], Vec<usize>>> = vec![HashMap::new(); n + 1];
        for (idx, fs) in faces.iter().enumerate() {
            for (j, map) in prefix.iter_mut().enumerate().skip(1) {
                map.entry(&fs[..j]).or_default().push(idx);
            }
        }
        let mut out = Vec::new();
        let mut chosen: Vec<usize> = Vec::with_capacity(n + 1);
        let mut key: Vec<SimplexRef> = Vec::with_capacity(n + 1);
        fn rec<'a>(
            n: usize,
            facets: &[SimplexRef],
            faces: &'a [Vec<SimplexRef>],
            prefix: &[HashMap<&'a [SimplexRef], Vec<usize>>],
            chosen: &mut Vec<usize>,
            key: &mut Vec<SimplexRef>,
            out: &mut Vec<BoundarySphere>,
        ) {
            let j = chosen.len();
            if j == n + 1 {
                out.push(BoundarySphere { facets: chosen.iter().map(|&c| facets[c].clone()).collect() });
                return;
            }
            let candidates: Vec<usize> = if j == 0 {
                (0..facets.len()).collect()
            } else {
                // d_i τ_j = d_{j-1} τ_i for i < j
                key.clear();
                key.extend(chosen.iter().map(|&c| faces[c][j - 1].clone()));
                match prefix[j].get(key.as_slice()) {
                    Some(v) => v.clone(),
                    None => return,
                }
            };
            for c in candidates {
                chosen.push(c);
                rec(n, facets, faces, prefix, chosen, key, out);
                chosen.pop();
            }
        }
        rec(n, &facets, &faces, &prefix, &mut chosen, &mut key, &mut out);
        Ok(out)
    }

    /// All `n`-simplices whose boundary is `sphere`.
    pub fn fillers(&self, sphere: &BoundarySphere) -> Result<Vec<SimplexRef>> {
        let index = FillerIndex::new(self, sphere.dim())?;
        Ok(index.fillers(sphere).to_vec())
    }

    /// Whether every sphere of dimension `1..=n_max` has a filler (and K is
    /// nonempty). Returns the first unfilled sphere on failure.
    pub fn is_trivial_kan_up_to(&self, n_max: usize) -> Result<KanCheck> {
        if self.is_empty() {
            return Ok(KanCheck { holds: false, checked_up_to: n_max, failure: None });
        }
        self.ensure_dim(n_max)?;
        for n in 1..=n_max {
            let index = FillerIndex::new(self, n)?;
            for sphere in self.boundary_spheres(n)? {
                if index.fillers(&sphere).is_empty() {
                    return Ok(KanCheck { holds: false, checked_up_to: n_max, failure: Some(sphere) });
                }
            }
        }
        Ok(KanCheck { holds: true, checked_up_to: n_max, failure: None })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct KanCheck {
    pub holds: bool,
    pub checked_up_to: usize,
    /// `None` with `holds == false` means the complex is empty.
    pub failure: Option<BoundarySphere>,
}

/// All `n`-simplices of a complex grouped by boundary.
pub struct FillerIndex {
    n: usize,
    by_boundary: HashMap<Vec<SimplexRef>, Vec<SimplexRef>>,
}

impl FillerIndex {
    pub fn new(k: &FiniteTypeSimplicialSet, n: usize) -> Result<Self> {
        let mut by_boundary: HashMap<Vec<SimplexRef>, Vec<SimplexRef>> = HashMap::new();
        for x in k.simplices(n)? {
            by_boundary.entry(k.boundary(&x)?).or_default().push(x);
        }
        Ok(Self { n, by_boundary })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn fillers(&self, sphere: &BoundarySphere) -> &[SimplexRef] {
        debug_assert_eq!(sphere.dim(), self.n);
        self.by_boundary.get(&sphere.facets).map_or(&[], Vec::as_slice)
    }
}

/// A simplicial set described by its simplices and their pullbacks.
pub trait SimplicialModel {
    type Simplex: Clone + Eq + Hash + Ord + fmt::Debug;

    /// All simplices of dimension `d`, degenerate ones included.
    fn simplices(&self, d: usize) -> Vec<Self::Simplex>;

    /// `alpha^*(x)`.
    fn pullback(&self, x: &Self::Simplex, alpha: &MonotoneMap) -> Self::Simplex;

    fn label(&self, x: &Self::Simplex) -> String {
        format!("{x:?}")
    }
}

/// A complex built from a model, keeping the correspondence between model
/// simplices and normal forms.
#[derive(Clone, Debug)]
pub struct ModelComplex<S> {
    complex: FiniteTypeSimplicialSet,
    nondeg: Vec<Vec<S>>,
    ids: HashMap<S, (usize, usize)>,
}

impl<S: Clone + Eq + Hash + Ord + fmt::Debug> ModelComplex<S> {
    pub fn build<M>(model: &M, max_dim: usize, extent: Extent) -> Self
    where
        M: SimplicialModel<Simplex = S>,
    {
        let mut nondeg: Vec<Vec<S>> = Vec::with_capacity(max_dim + 1);
        let mut ids: HashMap<S, (usize, usize)> = HashMap::new();
        let mut labels = Vec::with_capacity(max_dim + 1);
        let mut faces = Vec::with_capacity(max_dim + 1);
        for d in 0..=max_dim {
            let mut all = model.simplices(d);
            all.sort();
            all.dedup();
            let level: Vec<S> =
                all.into_iter().filter(|x| degenerate_directions(model, x, d).is_empty()).collect();
            let mut level_faces = Vec::with_capacity(level.len());
            for x in &level {
                let fs = if d == 0 {
                    Vec::new()
                } else {
                    (0..=d)
                        .map(|i| {
                            let y = model.pullback(x, &MonotoneMap::coface(d, i));
                            decompose_with(model, &ids, &y, d - 1)
                        })
                        .collect()
                };
                level_faces.push(fs);
            }
            for (id, x) in level.iter().enumerate() {
                ids.insert(x.clone(), (d, id));
            }
            labels.push(level.iter().map(|x| model.label(x)).collect());
            faces.push(level_faces);
            nondeg.push(level);
        }
        let complex = FiniteTypeSimplicialSet::new_unchecked(max_dim, extent, labels, faces);
        Self { complex, nondeg, ids }
    }

    pub fn complex(&self) -> &FiniteTypeSimplicialSet {
        &self.complex
    }

    pub fn into_complex(self) -> FiniteTypeSimplicialSet {
        self.complex
    }

    /// The model simplex behind the nondegenerate simplex `(d, id)`.
    pub fn nondegenerate(&self, d: usize, id: usize) -> &S {
        &self.nondeg[d][id]
    }

    pub fn level(&self, d: usize) -> &[S] {
        self.nondeg.get(d).map_or(&[], Vec::as_slice)
    }

    /// Normal form of a model simplex of dimension `d`.
    pub fn decompose<M>(&self, model: &M, x: &S, d: usize) -> SimplexRef
    where
        M: SimplicialModel<Simplex = S>,
    {
        decompose_with(model, &self.ids, x, d)
    }

    /// The model simplex denoted by a normal form.
    pub fn realize<M>(&self, model: &M, x: &SimplexRef) -> S
    where
        M: SimplicialModel<Simplex = S>,
    {
        let core = &self.nondeg[x.core_dim()][x.core()];
        if x.is_degenerate() {
            model.pullback(core, x.degeneracy())
        } else {
            core.clone()
        }
    }

    pub fn id_of(&self, x: &S) -> Option<(usize, usize)> {
        self.ids.get(x).copied()
    }
}

/// Indices `j` with `x` in the image of `s_j`.
fn degenerate_directions<M: SimplicialModel>(model: &M, x: &M::Simplex, d: usize) -> Vec<usize> {
    (0..d)
        .filter(|&j| {
            // x = s_j^* y iff x = (δ^j s^j)^* x
            let collapse = MonotoneMap::coface(d, j)
                .compose(&MonotoneMap::codegeneracy(d - 1, j))
                .expect("composable");
            model.pullback(x, &collapse) == *x
        })
        .collect()
}

fn decompose_with<M: SimplicialModel>(
    model: &M,
    ids: &HashMap<M::Simplex, (usize, usize)>,
    x: &M::Simplex,
    d: usize,
) -> SimplexRef {
    let dirs = degenerate_directions(model, x, d);
    let values: Vec<usize> = (0..=d).map(|i| i - dirs.iter().filter(|&&j| j < i).count()).collect();
    let m = d - dirs.len();
    let surj = MonotoneMap::new_unchecked(m, values);
    let mut section = Vec::with_capacity(m + 1);
    for (i, &v) in surj.values().iter().enumerate() {
        if section.len() == v {
            section.push(i);
        }
    }
    let core = model.pullback(x, &MonotoneMap::new_unchecked(d, section));
    let &(cd, id) = ids
        .get(&core)
        .unwrap_or_else(|| panic!("core {core:?} of {x:?} missing from the nondegenerate table"));
    debug_assert_eq!(cd, m);
    SimplexRef { degeneracy: surj, core: id }
}

type ImageFilter = Box<dyn Fn(&[usize]) -> bool + Send + Sync>;

/// Simplices are vertex sequences `v_0 ~ v_1 ~ ... ~ v_d` for a reflexive,
/// transitive relation `~`, optionally filtered by a predicate on the image
/// set (which must be closed under subsets). Covers nerves of posets and
/// preorders, Čech nerves, `Δ^n`, `∂Δ^n` and horns.
pub struct SequenceModel {
    related: Vec<Vec<bool>>,
    labels: Vec<String>,
    image_filter: Option<ImageFilter>,
}

impl SequenceModel {
    pub fn new(related: Vec<Vec<bool>>, labels: Vec<String>) -> Self {
        let n = related.len();
        assert_eq!(labels.len(), n);
        for a in 0..n {
            assert!(related[a][a], "relation must be reflexive");
            for b in 0..n {
                for c in 0..n {
                    assert!(!(related[a][b] && related[b][c]) || related[a][c], "relation must be transitive");
                }
            }
        }
        Self { related, labels, image_filter: None }
    }

    /// Keeps only sequences whose image (sorted, deduplicated) passes `filter`.
    pub fn with_image_filter(mut self, filter: impl Fn(&[usize]) -> bool + Send + Sync + 'static) -> Self {
        self.image_filter = Some(Box::new(filter));
        self
    }

    pub fn vertex_count(&self) -> usize {
        self.related.len()
    }
}

impl SimplicialModel for SequenceModel {
    type Simplex = Vec<usize>;

    fn simplices(&self, d: usize) -> Vec<Vec<usize>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(d + 1);
        fn rec(m: &SequenceModel, d: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == d + 1 {
                if let Some(f) = &m.image_filter {
                    let mut img = cur.clone();
                    img.sort_unstable();
                    img.dedup();
                    if !f(&img) {
                        return;
                    }
                }
                out.push(cur.clone());
                return;
            }
            for v in 0..m.related.len() {
                if cur.last().is_none_or(|&u| m.related[u][v]) {
                    cur.push(v);
                    rec(m, d, cur, out);
                    cur.pop();
                }
            }
        }
        rec(self, d, &mut cur, &mut out);
        out
    }

    fn pullback(&self, x: &Vec<usize>, alpha: &MonotoneMap) -> Vec<usize> {
        alpha.values().iter().map(|&i| x[i]).collect()
    }

    fn label(&self, x: &Vec<usize>) -> String {
        x.iter().map(|&v| self.labels[v].as_str()).collect::<Vec<_>>().join(",")
    }
}

fn chain_model(n: usize) -> SequenceModel {
    let related = (0..=n).map(|a| (0..=n).map(|b| a <= b).collect()).collect();
    SequenceModel::new(related, (0..=n).map(|v| v.to_string()).collect())
}

/// The standard simplex `Δ^n`.
pub fn standard_simplex(n: usize) -> FiniteTypeSimplicialSet {
    ModelComplex::build(&chain_model(n), n, Extent::Complete).into_complex()
}

/// The point `Δ^0`.
pub fn point() -> FiniteTypeSimplicialSet {
    standard_simplex(0)
}

/// The boundary `∂Δ^n`, `n >= 1`.
pub fn boundary_of_simplex(n: usize) -> FiniteTypeSimplicialSet {
    assert!(n >= 1);
    let model = chain_model(n).with_image_filter(move |img| img.len() <= n);
    ModelComplex::build(&model, n - 1, Extent::Complete).into_complex()
}

/// The horn `Λ^n_k`.
pub fn horn(n: usize, k: usize) -> FiniteTypeSimplicialSet {
    assert!(n >= 1 && k <= n);
    let model = chain_model(n).with_image_filter(move |img| {
        img.len() < n || (img.len() == n && img.contains(&k))
    });
    ModelComplex::build(&model, n - 1, Extent::Complete).into_complex()
}
