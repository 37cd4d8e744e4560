use hyperdescent::hypercover::{categorify, cech_from_cover, refine_to_basis, sym_refine, Hypercover};
use hyperdescent::topology::covering_subfamilies;
use hyperdescent::{FiniteSpace, OpenSet, SimplexRef};
use proptest::prelude::*;
use std::sync::OnceLock;

/// Covering condition from the face maps alone: spheres are enumerated as
/// tuples satisfying `d_i y_j = d_{j-1} y_i` for `i < j`.
fn covering_condition_oracle(h: &Hypercover, n_max: usize) -> bool {
    let k = h.spine();
    let verts = (0..k.count(0)).fold(OpenSet::EMPTY, |a, v| a.union(h.assignment()[0][v]));
    if verts != h.target() {
        return false;
    }
    for n in 1..=n_max {
        let lower = k.simplices(n - 1).unwrap();
        let upper = k.simplices(n).unwrap();
        let mut tuple = Vec::new();
        if !spheres_ok(h, &lower, &upper, n, &mut tuple) {
            return false;
        }
    }
    true
}

fn spheres_ok(h: &Hypercover, lower: &[SimplexRef], upper: &[SimplexRef], n: usize, tuple: &mut Vec<SimplexRef>) -> bool {
    let k = h.spine();
    if tuple.len() == n + 1 {
        let rhs = tuple.iter().fold(h.target(), |a, y| a.intersection(h.open_of(y)));
        let lhs = upper
            .iter()
            .filter(|x| (0..=n).all(|i| k.face(x, i).unwrap() == tuple[i]))
            .fold(OpenSet::EMPTY, |a, x| a.union(h.open_of(x)));
        return lhs == rhs;
    }
    let j = tuple.len();
    for y in lower {
        let fits = (0..j).all(|i| n < 2 || k.face(y, i).unwrap() == k.face(&tuple[i], j - 1).unwrap());
        if fits {
            tuple.push(y.clone());
            let ok = spheres_ok(h, lower, upper, n, tuple);
            tuple.pop();
            if !ok {
                return false;
            }
        }
    }
    true
}

fn pseudocircle_cechs(max_dim: usize) -> Vec<Hypercover> {
    let x = FiniteSpace::pseudocircle();
    let mut out = Vec::new();
    for &u in x.opens() {
        for cover in covering_subfamilies(&x.opens_below(u), u) {
            if cover.len() <= 3 {
                out.push(cech_from_cover(&x, u, &cover, max_dim).unwrap());
            }
        }
    }
    out
}

#[test]
fn cech_hypercovers_agree_with_oracle() {
    for h in pseudocircle_cechs(3) {
        assert!(h.check(3).unwrap().holds());
        assert!(covering_condition_oracle(&h, 3));
    }
}

#[test]
fn mutations_agree_with_oracle() {
    let x = FiniteSpace::pseudocircle();
    let mut caught = 0;
    for h in pseudocircle_cechs(2) {
        for d in 0..=1 {
            for id in 0..h.spine().count(d) {
                for &smaller in &x.opens_below(h.assignment()[d][id]) {
                    let m = h.with_assignment_unchecked(d, id, smaller);
                    let check = m.check(2).unwrap();
                    assert_eq!(check.holds(), covering_condition_oracle(&m, 2));
                    if let Some(w) = check.failure {
                        assert_ne!(w.lhs, w.rhs);
                        caught += 1;
                    }
                }
            }
        }
    }
    assert!(caught > 0);
}

#[test]
fn refinement_lands_below_projection() {
    let x = FiniteSpace::pseudocircle();
    let basis = x.minimal_basis();
    for h in pseudocircle_cechs(2).into_iter().filter(|h| h.target() == x.full() && h.spine().count(0) <= 2) {
        let r = refine_to_basis(&h, &basis, 2).unwrap();
        for n in 0..=2 {
            for x in r.spine().simplices(n).unwrap() {
                let below = r.hypercover().open_of(&x);
                let above = h.open_of(&r.project(&x));
                assert!(below.is_subset(above));
                assert!(basis.contains(below));
            }
        }
        assert!(covering_condition_oracle(r.hypercover(), 2));
    }
}

#[test]
fn categorified_levels_are_partial_orders() {
    let x = FiniteSpace::pseudocircle();
    let r = refine_to_basis(&Hypercover::trivial(&x, x.full()).unwrap(), &x.minimal_basis(), 2).unwrap();
    let c = categorify(&r);
    for n in 0..=2 {
        assert!(c.is_antisymmetric(n));
        let pairs = c.order_pairs(n);
        for &(a, b) in &pairs {
            for &(b2, e) in &pairs {
                if b == b2 && a != e {
                    assert!(pairs.contains(&(a, e)), "order not transitive");
                }
            }
        }
    }
}

#[test]
fn symmetric_refinement_square_commutes() {
    let x = FiniteSpace::pseudocircle();
    let abc = x.open(["a", "b", "c"]).unwrap();
    let abd = x.open(["a", "b", "d"]).unwrap();
    let h = cech_from_cover(&x, x.full(), &[abc, abd], 2).unwrap();
    let r = refine_to_basis(&h, &x.minimal_basis(), 2).unwrap();
    let s = sym_refine(&r).unwrap();
    let checked = s.check_square(&r).unwrap();
    assert!(checked > 0);
    assert!(s.level(1).len() >= r.level(1).len());
}

#[test]
fn restriction_below_a_member_is_a_hypercover_of_it() {
    let x = FiniteSpace::pseudocircle();
    let basis = x.minimal_basis();
    let r = refine_to_basis(&Hypercover::trivial(&x, x.full()).unwrap(), &basis, 2).unwrap();
    for &b in basis.members() {
        let below = r.restrict_below(b).unwrap();
        assert_eq!(below.hypercover().target(), b);
        assert!(below.hypercover().check(2).unwrap().holds());
        assert!(covering_condition_oracle(below.hypercover(), 2));
    }
}

#[test]
fn cone_tip_is_the_target() {
    let x = FiniteSpace::sierpinski();
    let h = Hypercover::trivial(&x, x.full()).unwrap();
    assert_eq!(h.cone_extension().tip(), x.full());
    assert_eq!(h.cone_extension().value(None), x.full());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn check_agrees_with_oracle_on_random_assignments(
        cover_pick in 0usize..64,
        edits in proptest::collection::vec((0usize..2, 0usize..16, 0usize..8), 1..4),
    ) {
        let x = FiniteSpace::pseudocircle();
        static CECHS: OnceLock<Vec<Hypercover>> = OnceLock::new();
        let hs = CECHS.get_or_init(|| pseudocircle_cechs(2));
        let mut h = hs[cover_pick % hs.len()].clone();
        for (d, id, o) in edits {
            let count = h.spine().count(d);
            if count == 0 {
                continue;
            }
            let id = id % count;
            let mut choices = x.opens_below(h.assignment()[d][id]);
            choices.push(OpenSet::EMPTY);
            h = h.with_assignment_unchecked(d, id, choices[o % choices.len()]);
        }
        prop_assert_eq!(h.check(2).unwrap().holds(), covering_condition_oracle(&h, 2));
    }
}
