mod oracles;

use std::collections::HashMap;

use hyperdescent::fin::{build_cf, fin_maps, fin_surjections, minimal_representative, symmetrize, FinMap};
use hyperdescent::homotopy::homology;
use hyperdescent::simplicial::{boundary_of_simplex, horn, monotone_maps, point, standard_simplex};
use hyperdescent::FiniteTypeSimplicialSet;
use proptest::prelude::*;

fn complexes() -> Vec<(&'static str, FiniteTypeSimplicialSet)> {
    vec![
        ("point", point()),
        ("Δ1", standard_simplex(1)),
        ("∂Δ1", boundary_of_simplex(1)),
        ("Λ2,1", horn(2, 1)),
        ("∂Δ3", boundary_of_simplex(3)),
    ]
}

#[test]
fn representatives_are_class_invariants() {
    for (name, k) in complexes() {
        for n in 0..=2 {
            let mut classes = oracles::symmetrization_classes(&k, n);
            let mut seen: HashMap<usize, _> = HashMap::new();
            for (sigma, f) in classes.keys() {
                let class = classes.find(&(sigma.clone(), f.clone()));
                let r = minimal_representative(&k, &sigma, &f).unwrap();
                let prev = seen.entry(class).or_insert_with(|| r.clone());
                assert_eq!(*prev, r, "{name} level {n}");
            }
            let sym = symmetrize(&k, n).unwrap();
            assert_eq!(sym.cardinality(n), seen.len(), "{name} level {n}");
        }
    }
}

#[test]
fn stored_elements_are_fixed_points() {
    for (name, k) in complexes() {
        let sym = symmetrize(&k, 3.min(k.max_dim())).unwrap();
        for n in 0..=sym.max_level() {
            for e in sym.level(n) {
                let again = minimal_representative(&k, &e.core_simplex(), e.surj()).unwrap();
                assert_eq!(&again, e, "{name}");
                assert!(e.surj().is_surjective());
            }
        }
    }
}

#[test]
fn action_is_functorial() {
    let k = horn(2, 1);
    let sym = symmetrize(&k, 2).unwrap();
    for n in 0..=2 {
        for e in sym.level(n) {
            for m in 0..=2 {
                for h in fin_maps(m, n) {
                    let he = sym.act(e, &h).unwrap();
                    assert!(sym.position(&he).is_some());
                    for l in 0..=1 {
                        for g in fin_maps(l, m) {
                            let lhs = sym.act(&he, &g).unwrap();
                            let rhs = sym.act(e, &h.compose(&g).unwrap()).unwrap();
                            assert_eq!(lhs, rhs);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn identity_acts_trivially() {
    let k = standard_simplex(2);
    let sym = symmetrize(&k, 2).unwrap();
    for n in 0..=2 {
        for e in sym.level(n) {
            assert_eq!(&sym.act(e, &FinMap::identity(n)).unwrap(), e);
        }
    }
}

#[test]
fn class_of_nondegenerate_simplex_has_identity_word() {
    let k = boundary_of_simplex(2);
    let sym = symmetrize(&k, 2).unwrap();
    for d in 0..=1 {
        for sigma in k.simplices(d).unwrap().into_iter().filter(|s| !s.is_degenerate()) {
            let e = sym.class_of(&sigma).unwrap();
            assert_eq!(e.core_simplex(), sigma);
            assert_eq!(e.surj(), &FinMap::identity(d));
        }
    }
}

#[test]
fn level_sizes_count_surjections() {
    // |S(K)_n| = Σ_m |K_m^nd| · #surjections ⟨n⟩ → ⟨m⟩
    let k = boundary_of_simplex(2);
    let sym = symmetrize(&k, 3).unwrap();
    for n in 0..=3 {
        let expected: usize = (0..=n.min(k.max_dim())).map(|m| k.count(m) * fin_surjections(n, m).len()).sum();
        assert_eq!(sym.cardinality(n), expected);
    }
}

#[test]
fn factorization_matches_brute_force() {
    for n in 0..=3 {
        for m in 0..=3 {
            for f in fin_maps(n, m) {
                let (fi, fs) = f.factorize();
                assert!(fi.is_injective() && fs.is_surjective());
                assert_eq!(FinMap::from(&fi).compose(&fs).unwrap(), f);
                // unique among all monotone injections and surjections
                let found = monotone_maps(fs.target_dim(), m)
                    .into_iter()
                    .filter(|i| i.is_injective())
                    .flat_map(|i| fin_surjections(n, fs.target_dim()).into_iter().map(move |s| (i.clone(), s)))
                    .filter(|(i, s)| FinMap::from(i).compose(s).unwrap() == f)
                    .count();
                assert_eq!(found, 1);
            }
        }
    }
}

#[test]
fn cf_of_identity_is_a_simplex() {
    let k = build_cf(&FinMap::identity(2), 3);
    assert_eq!((0..=3).map(|d| k.count(d)).collect::<Vec<_>>(), vec![3, 3, 1, 0]);
}

#[test]
fn cf_of_constant_map_is_contractible_but_large() {
    let f = FinMap::new(0, vec![0, 0]).unwrap();
    let k = build_cf(&f, 3);
    // every sequence in {0,1} without repeats is nondegenerate
    assert_eq!((0..=3).map(|d| k.count(d)).collect::<Vec<_>>(), vec![2, 2, 2, 2]);
    let h = homology(&k, 2).unwrap();
    assert!(h.groups.iter().all(|g| g.exact && g.is_zero()));
}

proptest! {
    #[test]
    fn representative_respects_monotone_reparametrization(
        n in 0usize..3,
        seed in 0usize..1000,
    ) {
        // R(σ, f ∘ g) = R(g^*σ, f) for a monotone g
        let k = standard_simplex(2);
        let maps = monotone_maps(n, 2);
        let g = &maps[seed % maps.len()];
        let sigma = k.simplices(2).unwrap()[0].clone();
        let fs = fin_maps(n, n);
        let f = &fs[seed % fs.len()];
        let lhs = minimal_representative(&k, &sigma, &FinMap::from(g).compose(f).unwrap()).unwrap();
        let rhs = minimal_representative(&k, &k.pullback(&sigma, g).unwrap(), f).unwrap();
        prop_assert_eq!(lhs, rhs);
    }
}
