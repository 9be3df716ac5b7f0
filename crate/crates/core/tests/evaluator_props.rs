mod common;

use std::sync::Arc;

use common::{context, tree, Reference};
use fidelset_core::evaluator::{EvalContext, NegationPolicy};
use fidelset_core::fidel::builtin::{self, h3_star, m3, saturated_chain};
use fidelset_core::formula::{Formula, Term};
use fidelset_core::lattice::Embedding;
use fidelset_core::names::{enumerate_universe, hat_embed, transport, HfSet, NameId, NameStore, DEFAULT_CEILING};
use fidelset_core::zfcheck::{generate_templates, sample_template};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const STANDARD: NegationPolicy = NegationPolicy::StandardLeibniz;

fn x() -> Term {
    Term::var("x")
}

fn equality_pair_laws(c: &EvalContext, u: NameId, v: NameId) {
    let a = c.algebra();
    let store = c.store();
    assert_eq!(c.equality(u, u), a.top());
    for &(x, ux) in store.entries(u).iter() {
        assert!(a.leq(ux, c.membership(x, u)));
    }
    assert_eq!(c.equality(u, v), c.equality(v, u));
}

fn equality_triple_laws(c: &EvalContext, u: NameId, v: NameId, w: NameId) {
    let a = c.algebra();
    assert!(a.leq(a.meet(c.equality(u, v), c.equality(v, w)), c.equality(u, w)));
    assert!(a.leq(a.meet(c.equality(u, v), c.membership(u, w)), c.membership(v, w)));
}

#[test]
fn equality_laws_exhaustive_at_rank_2() {
    for s in [
        m3(),
        h3_star(),
        saturated_chain(4),
        builtin::by_name("boolean4").unwrap(),
    ] {
        let c = context(s, STANDARD, 2);
        let names = c.universe().names().to_vec();
        for &u in &names {
            for &v in &names {
                equality_pair_laws(&c, u, v);
                for &w in &names {
                    equality_triple_laws(&c, u, v, w);
                }
            }
        }
    }
}

#[test]
fn equality_laws_sampled_at_rank_3() {
    let c = context(m3(), STANDARD, 3);
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    for _ in 0..10_000 {
        let (u, v, w) = (
            c.universe().sample(&mut rng),
            c.universe().sample(&mut rng),
            c.universe().sample(&mut rng),
        );
        equality_pair_laws(&c, u, v);
        equality_triple_laws(&c, u, v, w);
    }
}

#[test]
fn truth_values_match_reference_recursion() {
    for s in [
        m3(),
        h3_star(),
        saturated_chain(4),
        builtin::by_name("boolean4").unwrap(),
    ] {
        let c = context(s, STANDARD, 2);
        let r = Reference::new(c.algebra());
        let trees: Vec<_> = c.universe().names().iter().map(|&n| (n, tree(c.store(), n))).collect();
        for (u, tu) in &trees {
            for (v, tv) in &trees {
                assert_eq!(c.membership(*u, *v), r.member(tu, tv));
                assert_eq!(c.equality(*u, *v), r.equal(tu, tv));
            }
        }
    }
    let c = context(m3(), STANDARD, 3);
    let r = Reference::new(c.algebra());
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for _ in 0..300 {
        let (u, v) = (c.universe().sample(&mut rng), c.universe().sample(&mut rng));
        let (tu, tv) = (tree(c.store(), u), tree(c.store(), v));
        assert_eq!(c.membership(u, v), r.member(&tu, &tv));
        assert_eq!(c.equality(u, v), r.equal(&tu, &tv));
    }
}

#[test]
fn bounded_quantifiers_equal_their_unfolding() {
    let c = context(m3(), STANDARD, 2);
    let names = c.universe().names().to_vec();
    let templates = generate_templates(1, &names);
    for &u in &names {
        for phi in &templates {
            let exists = Formula::exists("x", Formula::and(Formula::member(x(), u), phi.clone()));
            assert_eq!(
                c.eval(&exists).unwrap(),
                c.eval(&Formula::bexists("x", u, phi.clone())).unwrap()
            );
            let forall = Formula::forall("x", Formula::implies(Formula::member(x(), u), phi.clone()));
            assert_eq!(
                c.eval(&forall).unwrap(),
                c.eval(&Formula::bforall("x", u, phi.clone())).unwrap()
            );
        }
    }
}

/// Two contexts over one store, at bounds `k` and `k + 1`.
fn nested(k: usize) -> (EvalContext, EvalContext) {
    let s = Arc::new(m3());
    let store = Arc::new(NameStore::new(s.algebra().clone()));
    let lo = Arc::new(enumerate_universe(&store, k, DEFAULT_CEILING).unwrap());
    let hi = Arc::new(enumerate_universe(&store, k + 1, DEFAULT_CEILING).unwrap());
    (
        EvalContext::new(s.clone(), store.clone(), lo, STANDARD).unwrap(),
        EvalContext::new(s, store, hi, STANDARD).unwrap(),
    )
}

fn check_monotone(lo: &EvalContext, hi: &EvalContext, phi: &Formula) {
    let a = lo.algebra();
    let e = Formula::exists("x", phi.clone());
    let f = Formula::forall("x", phi.clone());
    assert!(a.leq(lo.eval(&e).unwrap(), hi.eval(&e).unwrap()));
    assert!(a.leq(hi.eval(&f).unwrap(), lo.eval(&f).unwrap()));
}

#[test]
fn unbounded_quantifiers_are_monotone_in_the_bound() {
    let (lo, hi) = nested(1);
    for phi in generate_templates(2, lo.universe().names()) {
        check_monotone(&lo, &hi, &phi);
    }
    let (lo, hi) = nested(2);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..300 {
        let phi = sample_template(&mut rng, 2, lo.universe().names());
        check_monotone(&lo, &hi, &phi);
    }
}

#[test]
fn negation_free_formulas_ignore_the_policy() {
    let std_ctx = context(h3_star(), STANDARD, 2);
    let alg_ctx = {
        let store = std_ctx.store().clone();
        EvalContext::new(
            std_ctx.structure().clone(),
            store,
            std_ctx.universe().clone(),
            NegationPolicy::AlgebraicOp,
        )
        .unwrap()
    };
    let names = std_ctx.universe().names().to_vec();
    for phi in generate_templates(1, &names)
        .into_iter()
        .filter(Formula::is_negation_free)
    {
        for &u in &names {
            let f = phi.substitute("x", &Term::Const(u));
            assert_eq!(std_ctx.eval(&f).unwrap(), alg_ctx.eval(&f).unwrap());
        }
    }
}

#[test]
fn restricted_formulas_are_absolute_for_substructures() {
    let sub = context(saturated_chain(2), STANDARD, 2);
    let sup = context(m3(), STANDARD, 2);
    let emb = Embedding::by_labels(sub.algebra(), sup.algebra(), &[("0", "0"), ("1", "1")]).unwrap();
    assert!(sub.structure().is_substructure_of(sup.structure(), &emb));
    let names = sub.universe().names().to_vec();
    let images: Vec<NameId> = names
        .iter()
        .map(|&n| transport(sub.store(), sup.store(), &emb, n).unwrap())
        .collect();
    let lower = generate_templates(1, &names);
    let upper = generate_templates(1, &images);
    assert_eq!(lower.len(), upper.len());
    for (phi, psi) in lower.iter().zip(&upper) {
        if !phi.is_negation_free() {
            continue;
        }
        for (&u, &u_img) in names.iter().zip(&images) {
            let a = sub.eval(&phi.substitute("x", &Term::Const(u))).unwrap();
            let b = sup.eval(&psi.substitute("x", &Term::Const(u_img))).unwrap();
            assert_eq!(emb.apply(a), b);
        }
    }
}

#[test]
fn hat_lemma() {
    let c = context(m3(), STANDARD, 2);
    let store = c.store();
    let a = c.algebra();
    let sets = HfSet::all_up_to_depth(3);
    let hats: Vec<NameId> = sets.iter().map(|s| hat_embed(store, s)).collect();
    for (s, &hs) in sets.iter().zip(&hats) {
        for &u in c.universe().names() {
            let join = a.big_join(s.elements().map(|x| c.equality(u, hat_embed(store, x))));
            assert_eq!(c.membership(u, hs), join);
        }
        for (t, &ht) in sets.iter().zip(&hats) {
            assert_eq!(t.contains(s), c.membership(hs, ht) == a.top());
            assert_eq!(s == t, c.equality(hs, ht) == a.top());
        }
    }
}

#[test]
fn results_do_not_depend_on_memo_state_or_order() {
    let names_of = |c: &EvalContext| c.universe().names().to_vec();
    let warm = context(h3_star(), NegationPolicy::AlgebraicOp, 2);
    let names = names_of(&warm);
    let formulas: Vec<Formula> = generate_templates(1, &names)
        .iter()
        .flat_map(|phi| names.iter().map(move |&u| phi.substitute("x", &Term::Const(u))))
        .collect();
    let forward: Vec<_> = formulas.iter().map(|f| warm.eval(f).unwrap()).collect();
    let again: Vec<_> = formulas.iter().map(|f| warm.eval(f).unwrap()).collect();
    assert_eq!(forward, again);
    warm.clear_memo();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut order: Vec<usize> = (0..formulas.len()).collect();
    for i in (1..order.len()).rev() {
        order.swap(i, rng.random_range(0..=i));
    }
    for &i in &order {
        assert_eq!(warm.eval(&formulas[i]).unwrap(), forward[i]);
    }
}
