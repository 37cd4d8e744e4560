//! The category `Fin` of standard finite sets and symmetrization.
//!
//! `S(K)` extends a simplicial set `K` from `Δ^op` to `Fin^op`. An element at
//! level `n` is a class of pairs `(σ, f)` with `σ ∈ K_m` and `f: ⟨n⟩ -> ⟨m⟩`
//! an arbitrary map, modulo `(σ, g ∘ f) ~ (g^*σ, f)` for monotone `g`. Each
//! class has exactly one representative with `σ` nondegenerate and `f`
//! surjective; [`SymmetricSet`] stores only those.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::simplicial::{
    Extent, FiniteTypeSimplicialSet, ModelComplex, MonotoneMap, SequenceModel, SimplexRef,
    SimplicialError,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FinError {
    #[error("values {values:?} do not define a map into ⟨{target_dim}⟩")]
    OutOfRange { values: Vec<usize>, target_dim: usize },
    #[error("cannot compose: ⟨{left_source}⟩ expected, found ⟨{right_target}⟩")]
    NotComposable { left_source: usize, right_target: usize },
    #[error("dimension mismatch: simplex of dimension {simplex_dim}, map into ⟨{map_target}⟩")]
    DimensionMismatch { simplex_dim: usize, map_target: usize },
    #[error("level mismatch: element at level {level}, map into ⟨{map_target}⟩")]
    LevelMismatch { level: usize, map_target: usize },
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
}

pub type Result<T, E = FinError> = std::result::Result<T, E>;

/// A map `⟨source_dim⟩ -> ⟨target_dim⟩` of finite sets `{0, ..., n}`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct FinMap {
    target_dim: usize,
    values: Vec<usize>,
}

impl fmt::Debug for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}->⟨{}⟩", self.values, self.target_dim)
    }
}

impl FinMap {
    pub fn new(target_dim: usize, values: Vec<usize>) -> Result<Self> {
        if values.is_empty() || values.iter().any(|&v| v > target_dim) {
            return Err(FinError::OutOfRange { values, target_dim });
        }
        Ok(Self { target_dim, values })
    }

    fn new_unchecked(target_dim: usize, values: Vec<usize>) -> Self {
        Self { target_dim, values }
    }

    pub fn identity(n: usize) -> Self {
        Self::new_unchecked(n, (0..=n).collect())
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

    /// `self ∘ other`.
    pub fn compose(&self, other: &FinMap) -> Result<FinMap> {
        if other.target_dim != self.source_dim() {
            return Err(FinError::NotComposable {
                left_source: self.source_dim(),
                right_target: other.target_dim,
            });
        }
        Ok(Self::new_unchecked(self.target_dim, other.values.iter().map(|&v| self.values[v]).collect()))
    }

    pub fn is_surjective(&self) -> bool {
        let mut hit = vec![false; self.target_dim + 1];
        for &v in &self.values {
            hit[v] = true;
        }
        hit.into_iter().all(|h| h)
    }

    pub fn is_monotone(&self) -> bool {
        self.values.windows(2).all(|w| w[0] <= w[1])
    }

    /// The image, sorted.
    pub fn image(&self) -> Vec<usize> {
        let mut img = self.values.clone();
        img.sort_unstable();
        img.dedup();
        img
    }

    /// Image of a subset given as a bitmask over the source.
    pub fn image_mask(&self, mask: u64) -> u64 {
        self.values
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .fold(0, |acc, (_, &v)| acc | 1 << v)
    }

    pub fn as_monotone(&self) -> Option<MonotoneMap> {
        MonotoneMap::new(self.target_dim, self.values.clone()).ok().filter(|_| self.is_monotone())
    }

    /// `f = f_i ∘ f_s` with `f_i` strictly increasing onto `im f` and `f_s`
    /// surjective.
    pub fn factorize(&self) -> (MonotoneMap, FinMap) {
        let image = self.image();
        let surj = self.values.iter().map(|v| image.binary_search(v).unwrap()).collect();
        let p = image.len() - 1;
        (
            MonotoneMap::with_image(self.target_dim, &image).expect("sorted image"),
            Self::new_unchecked(p, surj),
        )
    }
}

impl From<&MonotoneMap> for FinMap {
    fn from(m: &MonotoneMap) -> Self {
        Self::new_unchecked(m.target_dim(), m.values().to_vec())
    }
}

/// All maps `⟨n⟩ -> ⟨m⟩`, lexicographically.
pub fn fin_maps(n: usize, m: usize) -> Vec<FinMap> {
    let mut out = Vec::new();
    let mut cur = vec![0; n + 1];
    loop {
        out.push(FinMap::new_unchecked(m, cur.clone()));
        let mut i = n as isize;
        while i >= 0 && cur[i as usize] == m {
            cur[i as usize] = 0;
            i -= 1;
        }
        if i < 0 {
            return out;
        }
        cur[i as usize] += 1;
    }
}

/// All surjections `⟨n⟩ -> ⟨m⟩`.
pub fn fin_surjections(n: usize, m: usize) -> Vec<FinMap> {
    if m > n {
        return Vec::new();
    }
    fin_maps(n, m).into_iter().filter(FinMap::is_surjective).collect()
}

/// A minimal representative `[core, surj]` of an element of `S(K)_level`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct SymElement {
    core_dim: usize,
    core: usize,
    surj: FinMap,
}

impl SymElement {
    pub fn level(&self) -> usize {
        self.surj.source_dim()
    }

    pub fn core_dim(&self) -> usize {
        self.core_dim
    }

    pub fn core(&self) -> usize {
        self.core
    }

    pub fn surj(&self) -> &FinMap {
        &self.surj
    }

    pub fn core_simplex(&self) -> SimplexRef {
        SimplexRef::nondegenerate(self.core_dim, self.core)
    }
}

/// `R(σ, f) = (\overline{f_i^*σ}, s_{f_i^*σ} ∘ f_s)`.
pub fn minimal_representative(k: &FiniteTypeSimplicialSet, sigma: &SimplexRef, f: &FinMap) -> Result<SymElement> {
    if f.target_dim() != sigma.dim() {
        return Err(FinError::DimensionMismatch { simplex_dim: sigma.dim(), map_target: f.target_dim() });
    }
    let (fi, fs) = f.factorize();
    let tau = k.pullback(sigma, &fi)?;
    let surj = FinMap::from(tau.degeneracy()).compose(&fs)?;
    Ok(SymElement { core_dim: tau.core_dim(), core: tau.core(), surj })
}

/// `S(K)` restricted to levels `0..=max_level`.
#[derive(Clone, Debug)]
pub struct SymmetricSet {
    complex: FiniteTypeSimplicialSet,
    levels: Vec<Vec<SymElement>>,
}

impl SymmetricSet {
    pub fn new(k: &FiniteTypeSimplicialSet, max_level: usize) -> Result<Self> {
        k.ensure_dim(max_level)?;
        let levels = (0..=max_level)
            .map(|n| {
                let mut level = Vec::new();
                for m in 0..=n.min(k.max_dim()) {
                    for surj in fin_surjections(n, m) {
                        for core in 0..k.count(m) {
                            level.push(SymElement { core_dim: m, core, surj: surj.clone() });
                        }
                    }
                }
                level.sort();
                level
            })
            .collect();
        Ok(Self { complex: k.clone(), levels })
    }

    pub fn complex(&self) -> &FiniteTypeSimplicialSet {
        &self.complex
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn level(&self, n: usize) -> &[SymElement] {
        self.levels.get(n).map_or(&[], Vec::as_slice)
    }

    pub fn cardinality(&self, n: usize) -> usize {
        self.level(n).len()
    }

    pub fn position(&self, e: &SymElement) -> Option<usize> {
        self.level(e.level()).binary_search(e).ok()
    }

    /// `h^* e` for `h: ⟨k⟩ -> ⟨level e⟩`, in minimal form.
    pub fn act(&self, e: &SymElement, h: &FinMap) -> Result<SymElement> {
        if h.target_dim() != e.level() {
            return Err(FinError::LevelMismatch { level: e.level(), map_target: h.target_dim() });
        }
        minimal_representative(&self.complex, &e.core_simplex(), &e.surj.compose(h)?)
    }

    /// The class of `(σ, id)`.
    pub fn class_of(&self, sigma: &SimplexRef) -> Result<SymElement> {
        minimal_representative(&self.complex, sigma, &FinMap::identity(sigma.dim()))
    }

    /// Level-indexed tables of `(core id, surjection word)`.
    pub fn to_table(&self) -> SymmetricSetTable {
        SymmetricSetTable {
            levels: self
                .levels
                .iter()
                .map(|l| l.iter().map(|e| (e.core_dim, e.core, e.surj.values.clone())).collect())
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
pub struct SymmetricSetTable {
    /// Per level: `(core dimension, core id, surjection values)`.
    pub levels: Vec<Vec<(usize, usize, Vec<usize>)>>,
}

pub fn symmetrize(k: &FiniteTypeSimplicialSet, max_level: usize) -> Result<SymmetricSet> {
    SymmetricSet::new(k, max_level)
}

/// `C^f`: simplices are maps `g: ⟨m⟩ -> ⟨n⟩` with `f ∘ g` weakly increasing,
/// truncated at dimension `max_dim`.
pub fn build_cf(f: &FinMap, max_dim: usize) -> FiniteTypeSimplicialSet {
    let n = f.source_dim();
    let related = (0..=n).map(|a| (0..=n).map(|b| f.apply(a) <= f.apply(b)).collect()).collect();
    let model = SequenceModel::new(related, (0..=n).map(|v| v.to_string()).collect());
    // equal values of f make every dimension carry nondegenerate simplices
    let extent = if f.image().len() == n + 1 && max_dim >= n { Extent::Complete } else { Extent::Truncated };
    ModelComplex::build(&model, max_dim, extent).into_complex()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simplicial::{point, standard_simplex};

    fn fm(target: usize, v: &[usize]) -> FinMap {
        FinMap::new(target, v.to_vec()).unwrap()
    }

    #[test]
    fn factorize_examples() {
        let (fi, fs) = FinMap::identity(2).factorize();
        assert!(fi.is_identity());
        assert_eq!(fs, FinMap::identity(2));
        let (fi, fs) = fm(3, &[3, 1, 3]).factorize();
        assert_eq!(fi.values(), &[1, 3]);
        assert_eq!(fi.target_dim(), 3);
        assert_eq!(fs, fm(1, &[1, 0, 1]));
    }

    #[test]
    fn minimal_representative_examples() {
        let k = standard_simplex(1);
        let edge = SimplexRef::nondegenerate(1, 0);
        let swap = fm(1, &[1, 0]);
        let e = minimal_representative(&k, &edge, &swap).unwrap();
        assert_eq!((e.core_dim(), e.surj()), (1, &swap));

        let v = SimplexRef::nondegenerate(0, 1);
        let s0v = k.degeneracy(&v, 0).unwrap();
        let e = minimal_representative(&k, &s0v, &FinMap::identity(1)).unwrap();
        assert_eq!((e.core_dim(), e.core(), e.surj()), (0, 1, &fm(0, &[0, 0])));

        assert!(matches!(
            minimal_representative(&k, &edge, &FinMap::identity(2)),
            Err(FinError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn small_cardinalities() {
        let s = symmetrize(&point(), 3).unwrap();
        assert!((0..=3).all(|n| s.cardinality(n) == 1));
        let s = symmetrize(&standard_simplex(1), 1).unwrap();
        assert_eq!(s.cardinality(0), 2);
        assert_eq!(s.cardinality(1), 4);
    }

    #[test]
    fn swap_is_an_involution() {
        let s = symmetrize(&standard_simplex(1), 1).unwrap();
        let e = s.class_of(&SimplexRef::nondegenerate(1, 0)).unwrap();
        let swap = fm(1, &[1, 0]);
        let once = s.act(&e, &swap).unwrap();
        assert_ne!(once, e);
        assert_eq!(s.act(&once, &swap).unwrap(), e);
        assert_eq!(s.act(&e, &FinMap::identity(1)).unwrap(), e);
        assert!(s.act(&e, &FinMap::identity(2)).is_err());
    }

    #[test]
    fn cf_examples() {
        let constant = fm(0, &[0, 0, 0]);
        let c = build_cf(&constant, 2);
        assert_eq!(c.count(0), 3);
        let c = build_cf(&FinMap::identity(1), 2);
        assert_eq!(c.count(1), 1);
        assert_eq!(c.label(1, 0), "0,1");
        assert_eq!(c.count(2), 0);
    }

    #[test]
    fn fin_map_counts() {
        assert_eq!(fin_maps(2, 1).len(), 8);
        assert_eq!(fin_surjections(2, 1).len(), 6);
        assert_eq!(fin_surjections(1, 2).len(), 0);
    }
}
