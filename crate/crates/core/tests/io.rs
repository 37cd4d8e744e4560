use hyperdescent::descent::PresheafEnumerator;
use hyperdescent::homotopy::CounterexampleFixture;
use hyperdescent::hypercover::{cech_from_cover, refine_to_basis, Hypercover};
use hyperdescent::io::{HypercoverFile, PosetMapFile, PresheafFile, SimplicialSetFile, SpaceFile};
use hyperdescent::simplicial::{boundary_of_simplex, horn, standard_simplex};
use hyperdescent::FiniteSpace;
use proptest::prelude::*;

fn reparse<T: serde::Serialize + serde::de::DeserializeOwned>(value: &T) -> T {
    serde_json::from_str(&serde_json::to_string(value).unwrap()).unwrap()
}

#[test]
fn simplicial_sets_round_trip() {
    for k in [standard_simplex(2), boundary_of_simplex(3), horn(3, 0)] {
        let file = reparse(&SimplicialSetFile::from_complex(&k));
        assert_eq!(file.to_complex().unwrap(), k);
    }
}

#[test]
fn hypercovers_round_trip() {
    let x = FiniteSpace::pseudocircle();
    let abc = x.open(["a", "b", "c"]).unwrap();
    let abd = x.open(["a", "b", "d"]).unwrap();
    let cech = cech_from_cover(&x, x.full(), &[abc, abd], 3).unwrap();
    let refined = refine_to_basis(&Hypercover::trivial(&x, x.full()).unwrap(), &x.minimal_basis(), 2).unwrap();
    for h in [cech, refined.hypercover().clone()] {
        let file = reparse(&HypercoverFile::from_hypercover(&h));
        assert_eq!(file.to_hypercover().unwrap(), h);
    }
}

#[test]
fn counterexample_fixture_round_trips() {
    let fixture = CounterexampleFixture::standard();
    let file = reparse(&PosetMapFile::from_fixture(&fixture));
    assert_eq!(file.to_fixture().unwrap(), fixture);
}

#[test]
fn unknown_fields_are_rejected() {
    assert!(SpaceFile::parse(r#"{"points":[],"opens":[[]],"extra":1}"#).is_err());
    assert!(PresheafFile::parse(r#"{"values":[],"restrictions":[],"x":[]}"#).is_err());
}

#[test]
fn space_file_keeps_declared_basis() {
    let x = FiniteSpace::pseudocircle();
    let b = x.all_opens_basis();
    let file = reparse(&SpaceFile::from_space(&x, Some(&b)));
    let y = file.to_space().unwrap();
    assert_eq!(file.to_basis(&y).unwrap().members(), b.members());
}

#[test]
fn spaces_round_trip() {
    for x in [FiniteSpace::sierpinski(), FiniteSpace::pseudocircle(), FiniteSpace::discrete(&["p", "q"])] {
        let y = reparse(&SpaceFile::from_space(&x, None)).to_space().unwrap();
        assert_eq!(y.opens(), x.opens());
        assert_eq!(y.names(), x.names());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn presheaves_round_trip(seed in any::<u64>(), on_basis in any::<bool>()) {
        let x = FiniteSpace::pseudocircle();
        let index = if on_basis { x.minimal_basis().members().to_vec() } else { x.all_opens_basis().members().to_vec() };
        for f in PresheafEnumerator::new(&x, &index, 2).unwrap().sample(3, seed) {
            let g = reparse(&PresheafFile::from_presheaf(&f)).to_presheaf(&x).unwrap();
            prop_assert_eq!(g.index(), f.index());
            for &u in f.index() {
                prop_assert_eq!(g.value(u).unwrap(), f.value(u).unwrap());
                for &v in f.index().iter().filter(|v| v.is_subset(u)) {
                    for s in 0..f.size(u).unwrap() {
                        prop_assert_eq!(g.restrict(u, v, s).unwrap(), f.restrict(u, v, s).unwrap());
                    }
                }
            }
        }
    }
}
