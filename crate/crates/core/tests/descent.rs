mod oracles;

use hyperdescent::descent::{
    canonical_comparison, check_hypersheaf, check_sheaf_on_basis, cofinality_instance, comparison_is_natural,
    hypersheaf_suite, limit_over_hypercover, limit_over_poset, right_kan_extend, PresheafEnumerator, SetPresheaf,
};
use hyperdescent::hypercover::{cech_from_cover, refine_to_basis, Hypercover};
use hyperdescent::topology::covering_subfamilies;
use hyperdescent::{FiniteSpace, OpenSet};
use proptest::prelude::*;

fn all_opens(x: &FiniteSpace) -> Vec<OpenSet> {
    x.all_opens_basis().members().to_vec()
}

/// Compatible tuples over `objects` by running through the whole product.
fn product_limit(f: &SetPresheaf, objects: &[OpenSet]) -> Vec<Vec<usize>> {
    let sizes: Vec<usize> = objects.iter().map(|&o| f.size(o).unwrap()).collect();
    let mut out = Vec::new();
    let mut tuple = vec![0; objects.len()];
    if sizes.contains(&0) {
        return out;
    }
    loop {
        let compatible = (0..objects.len()).all(|i| {
            (0..objects.len()).all(|j| {
                i == j || !objects[j].is_subset(objects[i]) || f.restrict(objects[i], objects[j], tuple[i]).unwrap() == tuple[j]
            })
        });
        if compatible {
            out.push(tuple.clone());
        }
        let mut i = 0;
        loop {
            if i == tuple.len() {
                out.sort();
                return out;
            }
            tuple[i] += 1;
            if tuple[i] < sizes[i] {
                break;
            }
            tuple[i] = 0;
            i += 1;
        }
    }
}

fn space_suite(x: &FiniteSpace, seed: u64) -> Vec<SetPresheaf> {
    let index = all_opens(x);
    let mut suite = PresheafEnumerator::new(x, &index, 1).unwrap().exhaustive();
    suite.extend(PresheafEnumerator::new(x, &index, 2).unwrap().sample(24, seed));
    suite.push(SetPresheaf::maps_to_two(x, &index).unwrap());
    suite
}

#[test]
fn poset_limits_match_product_enumeration() {
    let x = FiniteSpace::pseudocircle();
    let opens = all_opens(&x);
    for f in space_suite(&x, 1) {
        for mask in 1u32..1 << opens.len() {
            let objects: Vec<OpenSet> = (0..opens.len()).filter(|i| mask >> i & 1 == 1).map(|i| opens[i]).collect();
            let mut fast = limit_over_poset(&f, &objects).unwrap();
            fast.sort();
            assert_eq!(fast, product_limit(&f, &objects));
        }
    }
}

#[test]
fn edge_reduction_matches_truncated_limit() {
    let mut checked = 0;
    for x in [FiniteSpace::sierpinski(), FiniteSpace::pseudocircle()] {
        let suite = space_suite(&x, 5);
        let mut hs: Vec<Hypercover> = Vec::new();
        for &u in x.opens() {
            for cover in covering_subfamilies(&x.opens_below(u), u).into_iter().filter(|c| c.len() <= 3) {
                hs.push(cech_from_cover(&x, u, &cover, 2).unwrap());
            }
        }
        let refined = refine_to_basis(&Hypercover::trivial(&x, x.full()).unwrap(), &x.minimal_basis(), 2).unwrap();
        hs.push(refined.hypercover().clone());
        for h in &hs {
            for f in suite.iter().step_by(3) {
                assert_eq!(limit_over_hypercover(f, h).unwrap(), oracles::truncated_simplex_category_limit(f, h, 2));
                checked += 1;
            }
        }
    }
    assert!(checked > 100);
}

#[test]
fn hypersheaves_on_all_opens_are_basis_sheaves() {
    let x = FiniteSpace::pseudocircle();
    let index = all_opens(&x);
    let suite = hypersheaf_suite(&x.all_opens_basis(), 1).unwrap();
    let minimal = x.minimal_basis();
    let mut sheaves = 0;
    for g in PresheafEnumerator::new(&x, &index, 2).unwrap().with_cech_pruning().exhaustive() {
        if check_hypersheaf(&g, &suite).unwrap().is_some() {
            continue;
        }
        sheaves += 1;
        assert_eq!(check_sheaf_on_basis(&g, &x.all_opens_basis()).unwrap(), None);
        let restricted = g.restrict_to(minimal.members()).unwrap();
        assert_eq!(check_sheaf_on_basis(&restricted, &minimal).unwrap(), None);
        let ext = right_kan_extend(&restricted, &minimal).unwrap();
        assert_eq!(canonical_comparison(&g, &ext).unwrap(), None);
        assert_eq!(comparison_is_natural(&g, &ext).unwrap(), None);
    }
    assert!(sheaves > 0);
}

#[test]
fn maps_to_two_is_a_hypersheaf() {
    for x in [FiniteSpace::sierpinski(), FiniteSpace::pseudocircle()] {
        let f = SetPresheaf::maps_to_two(&x, &all_opens(&x)).unwrap();
        let suite = hypersheaf_suite(&x.all_opens_basis(), 1).unwrap();
        assert_eq!(check_hypersheaf(&f, &suite).unwrap(), None);
        assert_eq!(f.size(x.full()).unwrap(), 1 << x.point_count());
    }
}

#[test]
fn constant_presheaf_fails_on_disconnected_cover() {
    // {a} and {b} cover {a,b} with empty overlap, so F({a,b}) must be F(a) × F(b)
    let x = FiniteSpace::pseudocircle();
    let f = SetPresheaf::constant(&x, &all_opens(&x), 2).unwrap();
    let w = check_sheaf_on_basis(&f, &x.all_opens_basis()).unwrap().unwrap();
    assert_eq!(w.target, vec!["a", "b"]);
}

#[test]
fn cofinality_holds_for_every_cover() {
    let x = FiniteSpace::pseudocircle();
    for f in space_suite(&x, 3) {
        for &u in x.opens() {
            for cover in covering_subfamilies(&x.opens_below(u), u) {
                assert_eq!(cofinality_instance(&f, &cover).unwrap(), None);
            }
        }
    }
}

#[test]
fn kan_extension_of_minimal_basis_presheaf() {
    let x = FiniteSpace::pseudocircle();
    let basis = x.minimal_basis();
    let f = SetPresheaf::constant(&x, basis.members(), 3).unwrap();
    let ext = right_kan_extend(&f, &basis).unwrap();
    // RKE({a,b}) = F(a) × F(b)
    let ab = x.open(["a", "b"]).unwrap();
    assert_eq!(ext.presheaf().size(ab).unwrap(), 9);
    // RKE(X): compatible (F(abc), F(abd)) pairs through a and b are the diagonal
    assert_eq!(ext.presheaf().size(x.full()).unwrap(), 3);
    assert_eq!(canonical_comparison(&f, &ext).unwrap(), None);
}

#[test]
fn exhaustive_sierpinski_count() {
    let x = FiniteSpace::sierpinski();
    assert_eq!(PresheafEnumerator::new(&x, &all_opens(&x), 2).unwrap().exhaustive().len(), 11);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn sampling_is_seed_deterministic(seed in any::<u64>()) {
        let x = FiniteSpace::pseudocircle();
        let e = PresheafEnumerator::new(&x, x.minimal_basis().members(), 2).unwrap();
        let a = e.sample(5, seed);
        let b = e.sample(5, seed);
        prop_assert_eq!(a.len(), 5);
        prop_assert!(a.iter().zip(&b).all(|(p, q)| p.generating_restrictions() == q.generating_restrictions()));
    }

    #[test]
    fn restriction_is_functorial(seed in any::<u64>()) {
        let x = FiniteSpace::pseudocircle();
        let index = all_opens(&x);
        for f in PresheafEnumerator::new(&x, &index, 2).unwrap().sample(2, seed) {
            for &u in &index {
                for &v in index.iter().filter(|v| v.is_subset(u)) {
                    for &w in index.iter().filter(|w| w.is_subset(v)) {
                        for s in 0..f.size(u).unwrap() {
                            let step = f.restrict(v, w, f.restrict(u, v, s).unwrap()).unwrap();
                            prop_assert_eq!(step, f.restrict(u, w, s).unwrap());
                        }
                    }
                }
            }
        }
    }
}
