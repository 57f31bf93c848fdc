use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use nanomu::generate::{random_phrase, GenConfig};
use nanomu::magnus::{phi_series, ComponentGen, Exponent, MagnusSeries, SignedPhrase, SignedWord};
use nanomu::moves::{apply_move, enumerate_sites, fresh_letters, MoveKind};
use nanomu::{builtin_virtual, builtin_welded, isomorphic, parse_nanophrase, render_nanophrase, validate, Letter, Nanophrase, Symbol};

fn phrase_from_seed(seed: u64, min_components: usize) -> Nanophrase {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let alpha: Vec<Symbol> = builtin_virtual().alpha().iter().cloned().collect();
    let cfg = GenConfig {
        min_components,
        max_components: 4,
        max_letters: 8,
    };
    random_phrase(&mut rng, &alpha, &cfg)
}

/// Renames every letter through a seeded permutation of fresh names.
fn renamed(p: &Nanophrase, seed: u64) -> Nanophrase {
    let mut names: Vec<Letter> = (0..p.letter_count()).map(|k| Letter::new(format!("R{k}")).unwrap()).collect();
    names.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let map: BTreeMap<&Letter, Letter> = p.letters().zip(names).collect();
    let proj = p.projections().iter().map(|(l, s)| (map[l].clone(), s.clone())).collect();
    let comps = p
        .components()
        .iter()
        .map(|c| c.iter().map(|l| map[l].clone()).collect())
        .collect();
    Nanophrase::new(proj, comps).unwrap()
}

fn word_strategy(vars: usize) -> impl Strategy<Value = SignedWord<ComponentGen>> {
    prop::collection::vec((1..=vars, any::<bool>()), 0..8).prop_map(|v| {
        SignedWord::from_pairs(
            v.into_iter()
                .map(|(g, plus)| (ComponentGen(g), if plus { Exponent::Plus } else { Exponent::Minus })),
        )
    })
}

fn series_strategy(vars: usize, bound: usize) -> impl Strategy<Value = MagnusSeries> {
    prop::collection::vec((prop::collection::vec(1..=vars, 0..=bound), -4i64..=4), 0..10).prop_map(move |terms| {
        let mut s = MagnusSeries::zero(vars, bound);
        for (m, c) in terms {
            s.set_coefficient(&m, c);
        }
        s
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(seed in any::<u64>()) {
        let p = phrase_from_seed(seed, 0);
        let text = render_nanophrase(&p);
        let back = parse_nanophrase(&text).unwrap();
        prop_assert_eq!(&back, &p);
        prop_assert_eq!(render_nanophrase(&back), text);
    }

    #[test]
    fn json_round_trip(seed in any::<u64>()) {
        let p = phrase_from_seed(seed, 0);
        let back: Nanophrase = serde_json::from_str(&serde_json::to_string(&p).unwrap()).unwrap();
        prop_assert_eq!(back, p);
    }

    #[test]
    fn isomorphism_is_an_equivalence(seed in any::<u64>(), r1 in any::<u64>(), r2 in any::<u64>()) {
        let p = phrase_from_seed(seed, 1);
        let q = renamed(&p, r1);
        let r = renamed(&q, r2);
        prop_assert!(isomorphic(&p, &p));
        prop_assert!(isomorphic(&p, &q) && isomorphic(&q, &p));
        prop_assert!(isomorphic(&q, &r) && isomorphic(&p, &r));
        let other = phrase_from_seed(seed.wrapping_add(1), 1);
        prop_assert_eq!(isomorphic(&p, &other), isomorphic(&other, &p));
    }

    #[test]
    fn series_multiplication_is_associative(
        a in series_strategy(3, 4), b in series_strategy(3, 4), c in series_strategy(3, 4)
    ) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
    }

    #[test]
    fn phi_is_multiplicative(u in word_strategy(3), v in word_strategy(3), bound in 0usize..5) {
        let lhs = phi_series(&u.concat(&v), 3, bound);
        let rhs = &phi_series(&u, 3, bound) * &phi_series(&v, 3, bound);
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn phi_of_inverse_is_inverse(w in word_strategy(3), bound in 0usize..5) {
        let s = phi_series(&w, 3, bound);
        prop_assert_eq!(s.inverse().unwrap(), phi_series(&w.inverse(), 3, bound));
    }

    #[test]
    fn rho_commutes_with_inversion(seed in any::<u64>(), picks in prop::collection::vec((any::<prop::sample::Index>(), any::<bool>()), 0..6), q in 2usize..5) {
        let p = phrase_from_seed(seed, 2);
        let sp = SignedPhrase::new(&p).unwrap();
        let pool: Vec<Letter> = (1..=p.component_count())
            .flat_map(|i| sp.signed_component(i).unwrap().letters().iter().map(|l| l.base.clone()).collect::<Vec<_>>())
            .collect();
        prop_assume!(!pool.is_empty());
        let x = SignedWord::from_pairs(picks.iter().map(|(ix, plus)| {
            (ix.get(&pool).clone(), if *plus { Exponent::Plus } else { Exponent::Minus })
        }));
        prop_assert_eq!(sp.rho_word(&x.inverse(), q).unwrap(), sp.rho_word(&x, q).unwrap().inverse());
    }

    #[test]
    fn every_move_output_is_valid(seed in any::<u64>(), welded in any::<bool>()) {
        let h = if welded { builtin_welded() } else { builtin_virtual() };
        let p = phrase_from_seed(seed, 1);
        let fresh = fresh_letters(&p, 2);
        for site in enumerate_sites(&p, &h, &MoveKind::ALL) {
            let site = if site.kind.is_insertion() {
                let k = if site.kind == MoveKind::H1Insert { 1 } else { 2 };
                site.bind(fresh[..k].to_vec(), Symbol::new("a-").unwrap())
            } else {
                site
            };
            let q = apply_move(&p, &h, &site).unwrap();
            prop_assert!(validate(&q, &h).is_empty());
            prop_assert_eq!(q.component_count(), p.component_count());
        }
    }

    #[test]
    fn h3_twice_is_identity(seed in any::<u64>()) {
        let h = builtin_welded();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = nanomu::generate::planted_h3(&mut rng, &h, &GenConfig::default(), seed % 2 == 0).unwrap();
        for site in enumerate_sites(&p, &h, &[MoveKind::H3, MoveKind::H3ext]) {
            let q = apply_move(&p, &h, &site).unwrap();
            let back: Vec<Nanophrase> = enumerate_sites(&q, &h, &[site.kind])
                .into_iter()
                .filter(|s| s.direction != site.direction && s.params.erased == site.params.erased)
                .map(|s| apply_move(&q, &h, &s).unwrap())
                .collect();
            prop_assert!(back.contains(&p));
        }
    }
}
