//! Brute-force reference computations shared by the integration and
//! acceptance tests. Each one works from definitions only and avoids the
//! library's normal forms and reductions.

#![allow(dead_code)]

use std::collections::HashMap;

use hyperdescent::descent::SetPresheaf;
use hyperdescent::fin::{fin_maps, FinMap};
use hyperdescent::hypercover::Hypercover;
use hyperdescent::simplicial::{monotone_maps, FiniteTypeSimplicialSet, MonotoneMap, SimplexRef};

/// Union-find over arbitrary hashable keys.
pub struct Classes<K> {
    ids: HashMap<K, usize>,
    parent: Vec<usize>,
}

impl<K: std::hash::Hash + Eq + Clone> Classes<K> {
    pub fn new() -> Self {
        Self { ids: HashMap::new(), parent: Vec::new() }
    }

    fn id(&mut self, k: &K) -> usize {
        if let Some(&i) = self.ids.get(k) {
            return i;
        }
        let i = self.parent.len();
        self.parent.push(i);
        self.ids.insert(k.clone(), i);
        i
    }

    pub fn find(&mut self, k: &K) -> usize {
        let mut i = self.id(k);
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    pub fn union(&mut self, a: &K, b: &K) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
        }
    }

    pub fn keys(&self) -> Vec<K> {
        self.ids.keys().cloned().collect()
    }
}

/// Pairs `(σ, f)` with `σ ∈ K_m` and `f: ⟨n⟩ → ⟨m⟩`, `m ≤ n`, identified
/// along `(σ, g∘f) ~ (g^*σ, f)` for every monotone `g`.
pub fn symmetrization_classes(k: &FiniteTypeSimplicialSet, n: usize) -> Classes<(SimplexRef, FinMap)> {
    let mut classes = Classes::new();
    let top = n.min(k.max_dim());
    for m in 0..=top {
        for sigma in k.simplices(m).unwrap() {
            for f in fin_maps(n, m) {
                classes.find(&(sigma.clone(), f));
            }
        }
    }
    for m in 0..=top {
        for sigma in k.simplices(m).unwrap() {
            for mp in 0..=top {
                for g in monotone_maps(mp, m) {
                    let pulled = k.pullback(&sigma, &g).unwrap();
                    let g_fin = FinMap::from(&g);
                    for f in fin_maps(n, mp) {
                        let composed = g_fin.compose(&f).unwrap();
                        classes.union(&(sigma.clone(), composed), &(pulled.clone(), f));
                    }
                }
            }
        }
    }
    classes
}

/// The limit of `F ∘ U` over every simplex of dimension at most `max_dim`,
/// degenerate ones included, with all face and degeneracy constraints.
/// Returns the vertex components of the compatible families, sorted.
pub fn truncated_simplex_category_limit(f: &SetPresheaf, h: &Hypercover, max_dim: usize) -> Vec<Vec<usize>> {
    let k = h.spine();
    let mut nodes: Vec<SimplexRef> = Vec::new();
    for d in 0..=max_dim.min(k.max_dim()) {
        nodes.extend(k.simplices(d).unwrap());
    }
    let pos: HashMap<SimplexRef, usize> = nodes.iter().cloned().enumerate().map(|(i, x)| (x, i)).collect();
    // (finer, coarser): x_finer is the restriction of x_coarser
    let mut edges: Vec<(usize, usize)> = Vec::new();
    for (i, x) in nodes.iter().enumerate() {
        let d = x.dim();
        if d >= 1 {
            for j in 0..=d {
                let face = k.pullback(x, &MonotoneMap::coface(d, j)).unwrap();
                edges.push((i, pos[&face]));
            }
        }
        if d < max_dim.min(k.max_dim()) {
            for j in 0..=d {
                let degen = k.pullback(x, &MonotoneMap::codegeneracy(d, j)).unwrap();
                edges.push((pos[&degen], i));
            }
        }
    }
    let opens: Vec<_> = nodes.iter().map(|x| h.open_of(x)).collect();
    // each constraint is checked once both ends are assigned
    let mut checks: Vec<Vec<(usize, usize)>> = vec![Vec::new(); nodes.len()];
    for (fine, coarse) in edges {
        checks[fine.max(coarse)].push((fine, coarse));
    }
    let mut out = Vec::new();
    let mut cur = vec![0usize; nodes.len()];
    fn rec(
        i: usize,
        f: &SetPresheaf,
        opens: &[hyperdescent::OpenSet],
        checks: &[Vec<(usize, usize)>],
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
        vertices: usize,
    ) {
        if i == opens.len() {
            out.push(cur[..vertices].to_vec());
            return;
        }
        for x in 0..f.size(opens[i]).unwrap() {
            cur[i] = x;
            let ok = checks[i].iter().all(|&(fine, coarse)| {
                f.restrict(opens[coarse], opens[fine], cur[coarse]).unwrap() == cur[fine]
            });
            if ok {
                rec(i + 1, f, opens, checks, cur, out, vertices);
            }
        }
    }
    rec(0, f, &opens, &checks, &mut cur, &mut out, k.count(0));
    out.sort();
    out.dedup();
    out
}

/// Rank of an integer matrix modulo a prime.
pub fn rank_mod_p(rows: &[Vec<i64>], p: i64) -> usize {
    let mut a: Vec<Vec<i64>> = rows.iter().map(|r| r.iter().map(|x| x.rem_euclid(p)).collect()).collect();
    let cols = a.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..a.len()).find(|&r| a[r][c] != 0) else { continue };
        a.swap(rank, piv);
        let inv = pow_mod(a[rank][c], p - 2, p);
        for x in a[rank].iter_mut() {
            *x = *x * inv % p;
        }
        let pivot = a[rank].clone();
        for (r, row) in a.iter_mut().enumerate() {
            if r != rank && row[c] != 0 {
                let factor = row[c];
                for (x, &y) in row.iter_mut().zip(&pivot) {
                    *x = (*x - factor * y).rem_euclid(p);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn pow_mod(mut b: i64, mut e: i64, p: i64) -> i64 {
    let mut r = 1;
    b %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % p;
        }
        b = b * b % p;
        e >>= 1;
    }
    r
}

/// Reduced Betti numbers mod `p` in degrees `0..=max_degree` of the order
/// complex of a relation, from strict chains enumerated directly.
pub fn poset_betti_mod_p(leq: &[Vec<bool>], max_degree: usize, p: i64) -> Vec<usize> {
    let n = leq.len();
    let lt = |a: usize, b: usize| a != b && leq[a][b];
    let mut chains: Vec<Vec<Vec<usize>>> = vec![(0..n).map(|a| vec![a]).collect()];
    for d in 1..=max_degree + 1 {
        let next = chains[d - 1]
            .iter()
            .flat_map(|c| (0..n).filter(|&b| lt(*c.last().unwrap(), b)).map(move |b| [c.clone(), vec![b]].concat()))
            .collect();
        chains.push(next);
    }
    let boundary_rank = |d: usize| -> usize {
        if d == 0 {
            return usize::from(n > 0);
        }
        let index: HashMap<&Vec<usize>, usize> = chains[d - 1].iter().enumerate().map(|(i, c)| (c, i)).collect();
        let mut m = vec![vec![0i64; chains[d].len()]; chains[d - 1].len()];
        for (j, c) in chains[d].iter().enumerate() {
            for i in 0..c.len() {
                let mut face = c.clone();
                face.remove(i);
                m[index[&face]][j] += if i % 2 == 0 { 1 } else { -1 };
            }
        }
        rank_mod_p(&m, p)
    };
    (0..=max_degree).map(|q| chains[q].len() - boundary_rank(q) - boundary_rank(q + 1)).collect()
}
