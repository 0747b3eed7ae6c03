use lingame_core::game::{
    atom_protocol, dual, interpret, materialize, tensor_p, tensor_with_serialization, Serialization,
};
use lingame_core::proofs::{search, RuleSet};
use lingame_core::semantics::{random_formula, random_protocol, valid_naive, AtomPool, ValidityConfig};
use lingame_core::strategy::{oracle, server_wins};
use lingame_core::{parse, AtomEnv, BangMode, Formula, Sequent};
use proptest::prelude::*;

const ATOMS: [&str; 4] = ["a", "b", "c", "d"];

fn formula() -> impl Strategy<Value = Formula> {
    any::<u64>().prop_map(|seed| random_formula(6, &ATOMS, seed))
}

fn tree() -> impl Strategy<Value = lingame_core::ExplicitTree> {
    (0usize..=6, 0usize..=3, any::<u64>()).prop_map(|(d, b, seed)| random_protocol(d, b, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn render_then_parse_is_identity(f in formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    #[test]
    fn dualize_is_an_involution(f in formula()) {
        prop_assert_eq!(f.dualize().dualize(), f.normalize());
        prop_assert!(f.normalize().is_nnf());
    }

    #[test]
    fn normalization_keeps_atoms(f in formula()) {
        prop_assert_eq!(f.normalize().atoms(), f.atoms());
        prop_assert_eq!(f.dualize().atoms(), f.atoms());
    }

    #[test]
    fn suite_games_are_determined(t in tree()) {
        let p = atom_protocol(&t).unwrap();
        prop_assert!(server_wins(&p) || server_wins(&dual(&p)));
    }

    #[test]
    fn memoized_solver_matches_oracle(t in tree()) {
        let p = atom_protocol(&t).unwrap();
        prop_assert_eq!(server_wins(&p), oracle::naive_server_wins(&p));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn tensor_serialization_does_not_change_winner(s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = atom_protocol(&random_protocol(3, 3, s1)).unwrap();
        let b = atom_protocol(&random_protocol(3, 3, s2)).unwrap();
        let left = tensor_with_serialization(&a, &b, Serialization::LeftmostFirst);
        let right = tensor_with_serialization(&a, &b, Serialization::RightmostFirst);
        prop_assert_eq!(server_wins(&left), server_wins(&right));
        prop_assert_eq!(server_wins(&left), server_wins(&tensor_p(&a, &b)));
    }

    #[test]
    fn sequents_are_multisets(f in formula(), g in formula(), h in formula()) {
        let one = Sequent::new([f.clone(), g.clone(), h.clone()]);
        let other = Sequent::new([h, f, g]);
        prop_assert_eq!(one, other);
    }

    #[test]
    fn syntactic_dual_is_role_swap(seed in any::<u64>(), pick in any::<u64>()) {
        let f = random_formula(3, &["a", "b"], seed);
        let pool = AtomPool::standard();
        let mut env = AtomEnv::new();
        for (i, a) in f.atoms().into_iter().enumerate() {
            let idx = (pick as usize).wrapping_add(i * 7) % pool.len();
            env.insert(a, pool.games[idx].tree.clone());
        }
        let p = interpret(&f, &env, 1, BangMode::Consistent).unwrap();
        let q = interpret(&Formula::dual(f), &env, 1, BangMode::Consistent).unwrap();
        if let (Ok(dp), Ok(tq)) = (materialize(&dual(&p), 50_000), materialize(&q, 50_000)) {
            prop_assert_eq!(dp, tq);
        }
    }
}

#[test]
fn proved_sequents_are_pool_valid() {
    let cfg = ValidityConfig {
        sample_limit: 300,
        ..ValidityConfig::default()
    };
    let pool = AtomPool::standard();
    let mut proved = 0;
    for seed in 0..4000u64 {
        let f = random_formula(3, &["a", "b"], seed);
        if f.connective_count() > 7 || f.to_string().contains(['!', '?']) {
            continue;
        }
        if search(&Sequent::new([f.clone()]), &RuleSet::mall(), &[]).is_proved() {
            proved += 1;
            let v = valid_naive(&f, &pool, &cfg);
            assert!(v.is_valid(), "{f} proved but {v}");
        }
    }
    assert!(proved >= 20, "only {proved} provable samples");
}

#[test]
fn countermodels_are_reproducible() {
    let pool = AtomPool::standard();
    let cfg = ValidityConfig {
        sample_limit: 50,
        seed: 99,
        ..ValidityConfig::default()
    };
    let f = parse("a * b -o a").unwrap();
    let first = valid_naive(&f, &pool, &cfg);
    assert!(!first.is_valid());
    assert_eq!(valid_naive(&f, &pool, &cfg), first);
}
