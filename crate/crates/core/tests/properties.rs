use proptest::prelude::*;

use ludics::behaviours::{
    check_pure, check_regular, const_behaviour, down, plus_pos, tensor_pos, up, visitable_paths, BehaviourExpr,
};
use ludics::datatypes::{bool_pattern, interpret, list_pattern, nat_pattern, DataPattern, Env};
use ludics::functional::{impurity_criterion, impurity_witness, Criterion, FuncType};
use ludics::gen::{gen_signature, DesignGen};
use ludics::multidesign::{compatible, cut, interaction_path, Compatibility};
use ludics::paths::{completion, dual, is_path, is_path_of, is_well_bracketed, paths_of};
use ludics::reduction::{is_orthogonal, obs_leq};
use ludics::syntax::{alpha_eq, parse_design_infer, render_design, Signature};

fn small_behaviour(i: usize) -> BehaviourExpr {
    let cb = || const_behaviour("b").unwrap();
    match i % 4 {
        0 => cb(),
        1 => interpret(&bool_pattern(), &Env::new(), 0).unwrap(),
        2 => up(down(cb())),
        _ => tensor_pos(cb(), const_behaviour("c").unwrap()),
    }
}

fn func_leaf(b: bool) -> FuncType {
    if b {
        FuncType::bool()
    } else {
        FuncType::name("u")
    }
}

fn func_type() -> impl Strategy<Value = FuncType> {
    any::<bool>().prop_map(func_leaf).prop_recursive(2, 8, 2, |inner| {
        (inner.clone(), inner, 0..3u8).prop_map(|(a, b, op)| match op {
            0 => FuncType::plus(a, b),
            1 => FuncType::tensor(a, b),
            _ => FuncType::limp(a, b),
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dual_is_an_involution(seed in any::<u64>()) {
        let s = DesignGen::new(seed).path(4, 10);
        let d = dual(&s).unwrap();
        prop_assert!(is_path(&d));
        prop_assert_eq!(dual(&d).unwrap(), s);
    }

    #[test]
    fn render_then_parse(seed in any::<u64>()) {
        let mut g = DesignGen::new(seed);
        g.cuts = 0.2;
        for d in [g.atomic_positive(4), g.atomic_negative(4)] {
            let back = parse_design_infer(&render_design(&d), &mut Signature::new()).unwrap();
            prop_assert!(alpha_eq(&back, &d), "{}", render_design(&d));
        }
    }

    #[test]
    fn orthogonal_iff_interaction_converges(seed in any::<u64>()) {
        let (p, n) = DesignGen::new(seed).atomic_pair(4);
        let path = interaction_path(&p, &n).unwrap();
        prop_assert_eq!(is_orthogonal(&p, &n).unwrap(), path.is_some());
        if let Some(s) = path {
            prop_assert!(is_path_of(&s, &p).unwrap());
            prop_assert!(is_path_of(&dual(&s).unwrap(), &n).unwrap());
        }
    }

    #[test]
    fn completion_is_above_the_design(seed in any::<u64>()) {
        let mut g = DesignGen::new(seed);
        let d = g.atomic_negative(3);
        for s in paths_of(&d, 8).unwrap() {
            let c = completion(&s, &gen_signature()).unwrap();
            prop_assert!(is_path_of(&s, &c).unwrap());
            prop_assert!(obs_leq(&d, &c));
        }
    }

    #[test]
    fn cut_commutes(seed in any::<u64>()) {
        let mut g = DesignGen::new(seed);
        g.cuts = 0.2;
        let (d, e) = g.multi_pair(3);
        prop_assume!(compatible(&d, &e) != Compatibility::Incompatible);
        let (de, ed) = (cut(&d, &e).unwrap(), cut(&e, &d).unwrap());
        prop_assert_eq!(de.negatives.len(), ed.negatives.len());
        for (x, n) in &de.negatives {
            prop_assert!(alpha_eq(n, &ed.negatives[x]));
        }
        match (&de.positive, &ed.positive) {
            (Some(p), Some(q)) => prop_assert!(alpha_eq(p, q)),
            (None, None) => {}
            _ => prop_assert!(false, "polarity differs"),
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn regularity_and_purity_are_stable(i in 0usize..4, j in 0usize..4, tensor in any::<bool>()) {
        let (a, b) = (small_behaviour(i), small_behaviour(j));
        let c = if tensor { tensor_pos(a, b) } else { plus_pos(a, b) };
        prop_assert!(check_regular(&c, 0, 10).unwrap().holds());
        prop_assert!(check_pure(&c, 0, 10).unwrap().holds());
    }

    #[test]
    fn kleene_levels_grow(level in 0usize..3, list in any::<bool>()) {
        let p = if list { list_pattern(&DataPattern::Name("b".into())) } else { nat_pattern() };
        let lo = interpret(&p, &Env::new(), level).unwrap();
        let hi = interpret(&p, &Env::new(), level + 1).unwrap();
        let vlo = visitable_paths(&lo, level, 12).unwrap();
        let vhi = visitable_paths(&hi, level + 1, 12).unwrap();
        prop_assert!(vlo.iter().all(|s| vhi.binary_search(s).is_ok()));
    }

    #[test]
    fn criterion_is_sound(t in func_type()) {
        let b = t.compile().unwrap();
        let pure = check_pure(&b, 3, 16).unwrap().holds();
        match impurity_criterion(&t) {
            Criterion::Pure => prop_assert!(pure, "{t}"),
            Criterion::Impure(d) => {
                prop_assert!(!pure, "{t}");
                prop_assert_eq!(d.rebuild(), t.clone());
                let w = impurity_witness(&t).unwrap();
                prop_assert!(w.s.daimon_ended() && !is_well_bracketed(&w.s));
            }
        }
    }
}
