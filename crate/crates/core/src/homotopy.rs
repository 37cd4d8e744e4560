//! Finite posets, nerves, integral homology, beat-point dismantling and
//! coinitiality checks.
//!
//! Contractibility verdicts are sound but incomplete: `Contractible` comes
//! with a dismantling certificate, `Obstructed` with a nonzero reduced
//! homology group, and everything else is `Unknown`.

use serde::Serialize;
use thiserror::Error;

use crate::fin::{fin_maps, FinError, FinMap, SymElement, SymmetricSet};
use crate::simplicial::{
    Extent, FiniteTypeSimplicialSet, ModelComplex, MonotoneMap, SequenceModel, SimplexRef, SimplicialError,
    SimplicialModel,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum HomotopyError {
    #[error(transparent)]
    Simplicial(#[from] SimplicialError),
    #[error(transparent)]
    Fin(#[from] FinError),
    #[error("order is not reflexive at {0}")]
    NotReflexive(String),
    #[error("order is not antisymmetric: {0} and {1}")]
    NotAntisymmetric(String, String),
    #[error("order is not transitive: {0} <= {1} <= {2}")]
    NotTransitive(String, String, String),
    #[error("unknown element {0}")]
    UnknownElement(String),
    #[error("duplicate element {0}")]
    DuplicateElement(String),
    #[error("map is not order-preserving: {0} <= {1} but images are not comparable that way")]
    NotMonotone(String, String),
    #[error("map has {found} values, source has {expected} elements")]
    MapShape { expected: usize, found: usize },
    #[error("integer overflow in Smith normal form")]
    Overflow,
}

pub type Result<T, E = HomotopyError> = std::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FinitePoset {
    labels: Vec<String>,
    leq: Vec<Vec<bool>>,
}

impl FinitePoset {
    pub fn new(labels: Vec<String>, leq: Vec<Vec<bool>>) -> Result<Self> {
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(HomotopyError::DuplicateElement(l.clone()));
            }
        }
        let p = Self { labels, leq };
        let n = p.len();
        for a in 0..n {
            if !p.leq[a][a] {
                return Err(HomotopyError::NotReflexive(p.labels[a].clone()));
            }
            for b in 0..n {
                if a != b && p.leq[a][b] && p.leq[b][a] {
                    return Err(HomotopyError::NotAntisymmetric(p.labels[a].clone(), p.labels[b].clone()));
                }
                for c in 0..n {
                    if p.leq[a][b] && p.leq[b][c] && !p.leq[a][c] {
                        return Err(HomotopyError::NotTransitive(
                            p.labels[a].clone(),
                            p.labels[b].clone(),
                            p.labels[c].clone(),
                        ));
                    }
                }
            }
        }
        Ok(p)
    }

    /// The order generated by `pairs` (`a <= b`), transitively closed.
    pub fn from_relations(labels: &[&str], pairs: &[(&str, &str)]) -> Result<Self> {
        let labels: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let find = |s: &str| labels.iter().position(|l| l == s).ok_or_else(|| HomotopyError::UnknownElement(s.into()));
        let n = labels.len();
        let mut leq = vec![vec![false; n]; n];
        for (a, row) in leq.iter_mut().enumerate() {
            row[a] = true;
        }
        for &(a, b) in pairs {
            leq[find(a)?][find(b)?] = true;
        }
        for k in 0..n {
            for a in 0..n {
                for b in 0..n {
                    if leq[a][k] && leq[k][b] {
                        leq[a][b] = true;
                    }
                }
            }
        }
        Self::new(labels, leq)
    }

    /// `0 < 1 < ... < n-1`.
    pub fn chain(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let leq = (0..n).map(|a| (0..n).map(|b| a <= b).collect()).collect();
        Self { labels, leq }
    }

    pub fn antichain(n: usize) -> Self {
        let labels = (0..n).map(|i| i.to_string()).collect();
        let leq = (0..n).map(|a| (0..n).map(|b| a == b).collect()).collect();
        Self { labels, leq }
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn label(&self, a: usize) -> &str {
        &self.labels[a]
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn leq(&self, a: usize, b: usize) -> bool {
        self.leq[a][b]
    }

    pub fn lt(&self, a: usize, b: usize) -> bool {
        a != b && self.leq[a][b]
    }

    /// Covering pairs `a < b`, for display and serialization.
    pub fn covering_pairs(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt(a, b) && !(0..n).any(|c| self.lt(a, c) && self.lt(c, b)) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// The induced sub-poset on `elements`, in the given order.
    pub fn induced(&self, elements: &[usize]) -> FinitePoset {
        FinitePoset {
            labels: elements.iter().map(|&a| self.labels[a].clone()).collect(),
            leq: elements.iter().map(|&a| elements.iter().map(|&b| self.leq[a][b]).collect()).collect(),
        }
    }

    /// Length of the longest strict chain, counted in elements.
    pub fn height(&self) -> usize {
        let n = self.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&a| (0..n).filter(|&b| self.lt(b, a)).count());
        let mut longest = vec![1usize; n];
        for (k, &a) in order.iter().enumerate() {
            for &b in &order[..k] {
                if self.lt(b, a) {
                    longest[a] = longest[a].max(longest[b] + 1);
                }
            }
        }
        longest.into_iter().max().unwrap_or(0)
    }
}

/// The nerve truncated at `max_dim`; complete when no strict chain is longer.
pub fn nerve(p: &FinitePoset, max_dim: usize) -> FiniteTypeSimplicialSet {
    let model = SequenceModel::new(p.leq.clone(), p.labels.clone());
    let extent = if p.height() <= max_dim + 1 { Extent::Complete } else { Extent::Truncated };
    ModelComplex::build(&model, max_dim, extent).into_complex()
}

/// A reduced integral homology group `Z^rank ⊕ ⊕ Z/t`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyGroup {
    /// `-1` is the augmentation degree, nonzero only for the empty complex.
    pub degree: isize,
    pub rank: usize,
    pub torsion: Vec<u64>,
    /// False when the next chain group lies beyond the truncation, so the
    /// computed group may be larger than the true one.
    pub exact: bool,
}

impl HomologyGroup {
    pub fn is_zero(&self) -> bool {
        self.rank == 0 && self.torsion.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HomologyReport {
    pub groups: Vec<HomologyGroup>,
}

impl HomologyReport {
    /// First exact nonzero group.
    pub fn first_obstruction(&self) -> Option<&HomologyGroup> {
        self.groups.iter().find(|g| g.exact && !g.is_zero())
    }

    pub fn vanishes(&self) -> bool {
        self.groups.iter().all(HomologyGroup::is_zero)
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.groups.iter().map(|g| g.rank).collect()
    }
}

/// Nonzero invariant factors of an integer matrix.
pub fn smith_invariants(mut a: Vec<Vec<i128>>) -> Result<Vec<u128>> {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut out = Vec::new();
    let mut t = 0;
    while t < rows.min(cols) {
        // pivot of least absolute value
        let mut best: Option<(usize, usize)> = None;
        for (i, row) in a.iter().enumerate().skip(t) {
            for (j, &x) in row.iter().enumerate().skip(t) {
                if x != 0 && best.is_none_or(|(bi, bj)| x.abs() < a[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        a.swap(t, pi);
        for row in a.iter_mut() {
            row.swap(t, pj);
        }
        loop {
            let p = a[t][t];
            let mut dirty = false;
            for i in t + 1..rows {
                if a[i][t] != 0 {
                    let q = a[i][t] / p;
                    let (top, rest) = a.split_at_mut(i);
                    for (x, &y) in rest[0][t..].iter_mut().zip(&top[t][t..]) {
                        *x = x.checked_sub(q.checked_mul(y).ok_or(HomotopyError::Overflow)?).ok_or(HomotopyError::Overflow)?;
                    }
                    if a[i][t] != 0 {
                        dirty = true;
                    }
                }
            }
            for j in t + 1..cols {
                if a[t][j] != 0 {
                    let q = a[t][j] / p;
                    for row in a.iter_mut().skip(t) {
                        let y = row[t];
                        row[j] = row[j].checked_sub(q.checked_mul(y).ok_or(HomotopyError::Overflow)?).ok_or(HomotopyError::Overflow)?;
                    }
                    if a[t][j] != 0 {
                        dirty = true;
                    }
                }
            }
            if dirty {
                // move the smallest remainder in row/column t to the pivot
                let mut best = (t, t);
                for i in t..rows {
                    if a[i][t] != 0 && a[i][t].abs() < a[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t..cols {
                    if a[t][j] != 0 && a[t][j].abs() < a[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                a.swap(t, best.0);
                for row in a.iter_mut() {
                    row.swap(t, best.1);
                }
                continue;
            }
            // divisibility of the remaining block
            let p = a[t][t];
            let bad = (t + 1..rows).find(|&i| a[i][t + 1..].iter().any(|&x| x % p != 0));
            match bad {
                Some(i) => {
                    let (top, rest) = a.split_at_mut(i);
                    for (x, &y) in top[t][t..].iter_mut().zip(&rest[0][t..]) {
                        *x = x.checked_add(y).ok_or(HomotopyError::Overflow)?;
                    }
                }
                None => break,
            }
        }
        out.push(a[t][t].unsigned_abs());
        t += 1;
    }
    Ok(out)
}

/// Boundary matrix `C_d -> C_{d-1}` on normalized chains (rows: `d-1`).
fn boundary_matrix(k: &FiniteTypeSimplicialSet, d: usize) -> Vec<Vec<i128>> {
    let mut m = vec![vec![0i128; k.count(d)]; k.count(d - 1)];
    for id in 0..k.count(d) {
        for (i, face) in k.nondegenerate_faces(d, id).iter().enumerate() {
            if !face.is_degenerate() {
                let row = &mut m[face.core()];
                row[id] += if i % 2 == 0 { 1 } else { -1 };
            }
        }
    }
    m
}

/// Reduced integral homology in degrees `-1..=max_degree`.
pub fn homology(k: &FiniteTypeSimplicialSet, max_degree: usize) -> Result<HomologyReport> {
    let complete = k.extent() == Extent::Complete;
    let count = |d: usize| if d <= k.max_dim() { k.count(d) } else { 0 };
    let available = |d: usize| complete || d <= k.max_dim();
    // invariant factors of ∂_d for d = 0..=max_degree+1, ∂_0 the augmentation
    let mut factors: Vec<Option<Vec<u128>>> = Vec::with_capacity(max_degree + 2);
    for d in 0..=max_degree + 1 {
        if !available(d) {
            factors.push(None);
        } else if d == 0 {
            let n = count(0);
            factors.push(Some(if n == 0 { Vec::new() } else { vec![1] }));
        } else if count(d) == 0 || count(d - 1) == 0 {
            factors.push(Some(Vec::new()));
        } else {
            factors.push(Some(smith_invariants(boundary_matrix(k, d))?));
        }
    }
    let mut groups = Vec::with_capacity(max_degree + 2);
    // degree -1: Z modulo the image of the augmentation
    let aug = factors[0].as_ref().map_or(0, Vec::len);
    groups.push(HomologyGroup { degree: -1, rank: 1 - aug, torsion: Vec::new(), exact: true });
    for q in 0..=max_degree {
        let out_rank = factors[q].as_ref().map_or(0, Vec::len);
        let (in_rank, torsion, exact) = match &factors[q + 1] {
            Some(f) => (f.len(), f.iter().filter(|&&x| x > 1).map(|&x| x as u64).collect(), true),
            None => (0, Vec::new(), false),
        };
        let rank = count(q) - out_rank - in_rank;
        groups.push(HomologyGroup { degree: q as isize, rank, torsion, exact });
    }
    Ok(HomologyReport { groups })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BeatKind {
    /// The strict down-set has a maximum.
    Down,
    /// The strict up-set has a minimum.
    Up,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BeatRemoval {
    pub element: String,
    pub kind: BeatKind,
    /// The extremum of the strict down- or up-set.
    pub through: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BeatReduction {
    /// Surviving elements, as indices into the input poset.
    pub core: Vec<usize>,
    pub removals: Vec<BeatRemoval>,
}

fn beat_witness(p: &FinitePoset, alive: &[usize], x: usize) -> Option<(BeatKind, usize)> {
    let down: Vec<usize> = alive.iter().copied().filter(|&y| p.lt(y, x)).collect();
    if let Some(&m) = down.iter().find(|&&m| down.iter().all(|&y| p.leq(y, m))) {
        return Some((BeatKind::Down, m));
    }
    let up: Vec<usize> = alive.iter().copied().filter(|&y| p.lt(x, y)).collect();
    up.iter().find(|&&m| up.iter().all(|&y| p.leq(m, y))).map(|&m| (BeatKind::Up, m))
}

/// Removes beat points, smallest index first, until none remain.
pub fn beat_point_reduce(p: &FinitePoset) -> BeatReduction {
    let mut alive: Vec<usize> = (0..p.len()).collect();
    let mut removals = Vec::new();
    'outer: loop {
        for (pos, &x) in alive.iter().enumerate() {
            if let Some((kind, m)) = beat_witness(p, &alive, x) {
                removals.push(BeatRemoval { element: p.label(x).into(), kind, through: p.label(m).into() });
                alive.remove(pos);
                continue 'outer;
            }
        }
        break;
    }
    BeatReduction { core: alive, removals }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum ContractibilityVerdict {
    Contractible { removals: Vec<BeatRemoval>, point: String },
    Obstructed { degree: isize, rank: usize, torsion: Vec<u64> },
    Unknown { checked_through: usize },
}

impl ContractibilityVerdict {
    pub fn is_contractible(&self) -> bool {
        matches!(self, Self::Contractible { .. })
    }

    pub fn is_obstructed(&self) -> bool {
        matches!(self, Self::Obstructed { .. })
    }

    fn from_homology(h: &HomologyReport, checked_through: usize) -> Self {
        match h.first_obstruction() {
            Some(g) => Self::Obstructed { degree: g.degree, rank: g.rank, torsion: g.torsion.clone() },
            None => Self::Unknown { checked_through },
        }
    }
}

/// Dismantling first, then reduced homology of the core through
/// `homology_degree`.
pub fn is_weakly_contractible(p: &FinitePoset, homology_degree: usize) -> Result<ContractibilityVerdict> {
    if p.is_empty() {
        return Ok(ContractibilityVerdict::Obstructed { degree: -1, rank: 1, torsion: Vec::new() });
    }
    let red = beat_point_reduce(p);
    if red.core.len() == 1 {
        return Ok(ContractibilityVerdict::Contractible {
            point: p.label(red.core[0]).into(),
            removals: red.removals,
        });
    }
    let core = p.induced(&red.core);
    let h = homology(&nerve(&core, homology_degree + 1), homology_degree)?;
    Ok(ContractibilityVerdict::from_homology(&h, homology_degree))
}

/// An order-preserving map between finite posets.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PosetMap {
    source: FinitePoset,
    target: FinitePoset,
    values: Vec<usize>,
}

impl PosetMap {
    pub fn new(source: FinitePoset, target: FinitePoset, values: Vec<usize>) -> Result<Self> {
        if values.len() != source.len() {
            return Err(HomotopyError::MapShape { expected: source.len(), found: values.len() });
        }
        if let Some(&bad) = values.iter().find(|&&v| v >= target.len()) {
            return Err(HomotopyError::UnknownElement(bad.to_string()));
        }
        for a in 0..source.len() {
            for b in 0..source.len() {
                if source.leq(a, b) && !target.leq(values[a], values[b]) {
                    return Err(HomotopyError::NotMonotone(source.label(a).into(), source.label(b).into()));
                }
            }
        }
        Ok(Self { source, target, values })
    }

    /// Sends each source element to the target element with the same label.
    pub fn by_label(source: FinitePoset, target: FinitePoset) -> Result<Self> {
        let values = source
            .labels()
            .iter()
            .map(|l| target.position(l).ok_or_else(|| HomotopyError::UnknownElement(l.clone())))
            .collect::<Result<_>>()?;
        Self::new(source, target, values)
    }

    pub fn identity(p: &FinitePoset) -> Self {
        Self { source: p.clone(), target: p.clone(), values: (0..p.len()).collect() }
    }

    pub fn source(&self) -> &FinitePoset {
        &self.source
    }

    pub fn target(&self) -> &FinitePoset {
        &self.target
    }

    pub fn apply(&self, a: usize) -> usize {
        self.values[a]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// `f/b`: source elements with `f(a) <= b`.
    Over,
    /// `b/f`: source elements with `b <= f(a)`.
    Under,
}

/// The comma poset and the source indices it consists of.
pub fn slice_category(f: &PosetMap, b: usize, side: Side) -> (FinitePoset, Vec<usize>) {
    let members: Vec<usize> = (0..f.source.len())
        .filter(|&a| match side {
            Side::Over => f.target.leq(f.apply(a), b),
            Side::Under => f.target.leq(b, f.apply(a)),
        })
        .collect();
    (f.source.induced(&members), members)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregate {
    Coinitial,
    NotCoinitial,
    Unknown,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CommaVerdict {
    pub object: String,
    pub comma: Vec<String>,
    pub verdict: ContractibilityVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoinitialReport {
    pub aggregate: Aggregate,
    pub verdicts: Vec<CommaVerdict>,
}

impl CoinitialReport {
    /// Target objects whose comma poset is empty.
    pub fn empty_commas(&self) -> Vec<&str> {
        self.verdicts.iter().filter(|v| v.comma.is_empty()).map(|v| v.object.as_str()).collect()
    }
}

/// Every `f/b` weakly contractible.
pub fn check_coinitial(f: &PosetMap, homology_degree: usize) -> Result<CoinitialReport> {
    let mut verdicts = Vec::with_capacity(f.target.len());
    for b in 0..f.target.len() {
        let (comma, members) = slice_category(f, b, Side::Over);
        verdicts.push(CommaVerdict {
            object: f.target.label(b).into(),
            comma: members.iter().map(|&a| f.source.label(a).to_string()).collect(),
            verdict: is_weakly_contractible(&comma, homology_degree)?,
        });
    }
    let aggregate = if verdicts.iter().all(|v| v.verdict.is_contractible()) {
        Aggregate::Coinitial
    } else if verdicts.iter().any(|v| v.verdict.is_obstructed()) {
        Aggregate::NotCoinitial
    } else {
        Aggregate::Unknown
    };
    Ok(CoinitialReport { aggregate, verdicts })
}

/// `I → J` together with an object `v` of `I`; the induced functor is
/// `I_{/v} → J_{/f(v)}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CounterexampleFixture {
    pub map: PosetMap,
    pub v: usize,
}

impl CounterexampleFixture {
    /// `I = {0, 0', 1, 2}` with `0 < 1`, `0 < 2`, `0' < 1`, and
    /// `J = {0, 0', 1, 2}` with `0 < 1 < 2`, `0' < 1`; `v = 2`.
    pub fn standard() -> Self {
        let labels = ["0", "0'", "1", "2"];
        let i = FinitePoset::from_relations(&labels, &[("0", "1"), ("0", "2"), ("0'", "1")]).expect("poset");
        let j = FinitePoset::from_relations(&labels, &[("0", "1"), ("1", "2"), ("0'", "1")]).expect("poset");
        Self { map: PosetMap::by_label(i, j).expect("monotone"), v: 3 }
    }

    /// `I_{/v} → J_{/f(v)}`.
    pub fn induced(&self) -> PosetMap {
        let f = &self.map;
        let fv = f.apply(self.v);
        let src: Vec<usize> = (0..f.source.len()).filter(|&a| f.source.leq(a, self.v)).collect();
        let tgt: Vec<usize> = (0..f.target.len()).filter(|&b| f.target.leq(b, fv)).collect();
        let values = src.iter().map(|&a| tgt.iter().position(|&b| b == f.apply(a)).expect("f preserves order")).collect();
        PosetMap { source: f.source.induced(&src), target: f.target.induced(&tgt), values }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CounterexampleReport {
    pub v: String,
    pub base: CoinitialReport,
    pub induced: CoinitialReport,
    pub empty_comma_witness: Option<String>,
    /// Base coinitial and induced map not coinitial through an empty comma.
    pub reproduced: bool,
}

pub fn run_counterexample(fixture: &CounterexampleFixture, homology_degree: usize) -> Result<CounterexampleReport> {
    let base = check_coinitial(&fixture.map, homology_degree)?;
    let induced = check_coinitial(&fixture.induced(), homology_degree)?;
    let empty_comma_witness = induced.empty_commas().first().map(|s| s.to_string());
    let reproduced = base.aggregate == Aggregate::Coinitial
        && induced.aggregate == Aggregate::NotCoinitial
        && empty_comma_witness.is_some();
    Ok(CounterexampleReport {
        v: fixture.map.source.label(fixture.v).into(),
        base,
        induced,
        empty_comma_witness,
        reproduced,
    })
}

/// `H_m = {(τ ∈ K_m, h: ⟨m⟩ → ⟨n⟩) : [τ, id] = h^* e}`, whose category of
/// simplices is the slice `(Δ/K)/e`.
struct SliceModel<'a> {
    sym: &'a SymmetricSet,
    e: &'a SymElement,
}

impl SimplicialModel for SliceModel<'_> {
    type Simplex = (SimplexRef, FinMap);

    fn simplices(&self, m: usize) -> Vec<(SimplexRef, FinMap)> {
        let k = self.sym.complex();
        let mut out = Vec::new();
        let maps = fin_maps(m, self.e.level());
        for tau in k.simplices(m).expect("complete spine") {
            let class = self.sym.class_of(&tau).expect("valid simplex");
            for h in &maps {
                if self.sym.act(self.e, h).expect("matching level") == class {
                    out.push((tau.clone(), h.clone()));
                }
            }
        }
        out
    }

    fn pullback(&self, x: &(SimplexRef, FinMap), alpha: &MonotoneMap) -> (SimplexRef, FinMap) {
        let k = self.sym.complex();
        let h = x.1.compose(&FinMap::from(alpha)).expect("composable");
        (k.pullback(&x.0, alpha).expect("valid simplex"), h)
    }

    fn label(&self, x: &(SimplexRef, FinMap)) -> String {
        let h: Vec<String> = x.1.values().iter().map(|v| v.to_string()).collect();
        format!("{}|{}", x.0, h.join(","))
    }
}

fn show_sym(e: &SymElement) -> String {
    let f: Vec<String> = e.surj().values().iter().map(|v| v.to_string()).collect();
    format!("[{}:{}, ({})]", e.core_dim(), e.core(), f.join(","))
}

/// If `H` agrees with the nerve of the preorder spanned by its edges through
/// dimension `max_dim`, the poset quotient of that preorder.
fn preorder_quotient(model: &SliceModel<'_>, max_dim: usize) -> Option<FinitePoset> {
    let verts = {
        let mut v = model.simplices(0);
        v.sort();
        v
    };
    let n = verts.len();
    let vertex_of = |x: &(SimplexRef, FinMap), i: usize, m: usize| {
        let y = model.pullback(x, &MonotoneMap::constant(0, m, i));
        verts.binary_search(&y).expect("vertex")
    };
    let mut rel = vec![vec![false; n]; n];
    for x in model.simplices(1) {
        rel[vertex_of(&x, 0, 1)][vertex_of(&x, 1, 1)] = true;
    }
    for a in 0..n {
        if !rel[a][a] {
            return None;
        }
        for b in 0..n {
            for c in 0..n {
                if rel[a][b] && rel[b][c] && !rel[a][c] {
                    return None;
                }
            }
        }
    }
    for m in 1..=max_dim {
        let mut tuples: Vec<Vec<usize>> =
            model.simplices(m).iter().map(|x| (0..=m).map(|i| vertex_of(x, i, m)).collect()).collect();
        let total = tuples.len();
        tuples.sort();
        tuples.dedup();
        // chains of length m+1 in the preorder
        let mut ways = vec![1u128; n];
        for _ in 0..m {
            ways = (0..n).map(|a| (0..n).filter(|&b| rel[a][b]).map(|b| ways[b]).sum()).collect();
        }
        let chains: u128 = ways.iter().sum();
        if tuples.len() != total || total as u128 != chains {
            return None;
        }
    }
    // quotient by mutual relation
    let mut class = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for a in 0..n {
        if class[a] == usize::MAX {
            for b in a..n {
                if rel[a][b] && rel[b][a] {
                    class[b] = reps.len();
                }
            }
            reps.push(a);
        }
    }
    let labels = reps.iter().map(|&a| model.label(&verts[a])).collect();
    let leq = reps.iter().map(|&a| reps.iter().map(|&b| rel[a][b]).collect()).collect();
    FinitePoset::new(labels, leq).ok()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SliceVerdict {
    pub level: usize,
    pub class: String,
    /// Nondegenerate simplex counts of the slice complex by dimension.
    pub simplices: Vec<usize>,
    pub homology: Vec<HomologyGroup>,
    /// Dimension through which the slice was matched against a preorder
    /// nerve, when a dismantling certificate is given.
    pub preorder_verified_through: Option<usize>,
    pub verdict: ContractibilityVerdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SymCoinitialReport {
    pub level_bound: usize,
    pub homology_degree: usize,
    pub slices: Vec<SliceVerdict>,
    pub obstructed: usize,
}

/// Verdicts on `(Δ/K)/e` for every class `e` of `S(K)` at levels up to
/// `level_bound`. `K` must be complete.
pub fn verify_sym_coinitiality_instance(
    k: &FiniteTypeSimplicialSet,
    level_bound: usize,
    homology_degree: usize,
) -> Result<SymCoinitialReport> {
    let sym = SymmetricSet::new(k, level_bound)?;
    let max_dim = homology_degree + 1;
    let mut slices = Vec::new();
    for n in 0..=level_bound {
        for e in sym.level(n) {
            let model = SliceModel { sym: &sym, e };
            let h = ModelComplex::build(&model, max_dim, Extent::Truncated).into_complex();
            let hom = homology(&h, homology_degree)?;
            let mut verified = None;
            let verdict = match hom.first_obstruction() {
                Some(g) => ContractibilityVerdict::Obstructed { degree: g.degree, rank: g.rank, torsion: g.torsion.clone() },
                None => match preorder_quotient(&model, max_dim) {
                    Some(q) => match is_weakly_contractible(&q, homology_degree)? {
                        c @ ContractibilityVerdict::Contractible { .. } => {
                            verified = Some(max_dim);
                            c
                        }
                        _ => ContractibilityVerdict::Unknown { checked_through: homology_degree },
                    },
                    None => ContractibilityVerdict::Unknown { checked_through: homology_degree },
                },
            };
            slices.push(SliceVerdict {
                level: n,
                class: show_sym(e),
                simplices: (0..=max_dim).map(|d| h.count(d)).collect(),
                homology: hom.groups,
                preorder_verified_through: verified,
                verdict,
            });
        }
    }
    let obstructed = slices.iter().filter(|s| s.verdict.is_obstructed()).count();
    Ok(SymCoinitialReport { level_bound, homology_degree, slices, obstructed })
}
