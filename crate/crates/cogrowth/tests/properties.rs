//! Randomized law checks, reproducible via the `COGROWTH_SEED` environment
//! variable (decimal u64; defaults to a fixed constant).

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cogrowth::automata::{automaton_to_nrational, dfa_all_words, Dfa};
use cogrowth::engine::{
    cogrowth_dp, cogrowth_dp_unpruned, cogrowth_oracle, mu_decode, phi_encode, sigma_alphabet,
};
use cogrowth::group::{bs_group, dihedral_infinite, free_abelian, free_group, GroupDatum};
use cogrowth::series::TruncatedSeries;

fn rng() -> ChaCha8Rng {
    let seed =
        std::env::var("COGROWTH_SEED").ok().and_then(|s| s.parse().ok()).unwrap_or(0xC0C0A);
    ChaCha8Rng::seed_from_u64(seed)
}

fn builtin_groups() -> Vec<GroupDatum> {
    vec![
        free_abelian(1).unwrap(),
        free_abelian(2).unwrap(),
        free_group(1).unwrap(),
        free_group(2).unwrap(),
        bs_group(1).unwrap(),
        bs_group(2).unwrap(),
        dihedral_infinite(),
    ]
}

fn random_series(rng: &mut ChaCha8Rng, vars: usize, cap: u32) -> TruncatedSeries {
    let mut s = TruncatedSeries::zero(vars, cap);
    for _ in 0..rng.gen_range(0..10) {
        let e: Vec<u32> = (0..vars).map(|_| rng.gen_range(0..=cap)).collect();
        s.add_term(&e, rng.gen_range(-6i64..=6).into());
    }
    s
}

#[test]
fn series_ring_axioms() {
    let mut rng = rng();
    for _ in 0..300 {
        let vars = rng.gen_range(1..4);
        let cap = rng.gen_range(2..8);
        let a = random_series(&mut rng, vars, cap);
        let b = random_series(&mut rng, vars, cap);
        let c = random_series(&mut rng, vars, cap);
        let one = TruncatedSeries::one(vars, cap);
        assert_eq!(a.add(&b).unwrap(), b.add(&a).unwrap());
        assert_eq!(a.add(&b).unwrap().add(&c).unwrap(), a.add(&b.add(&c).unwrap()).unwrap());
        assert_eq!(a.mul(&b).unwrap(), b.mul(&a).unwrap());
        assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        assert_eq!(a.mul(&one).unwrap(), a);
        assert_eq!(
            a.add(&b).unwrap().mul(&c).unwrap(),
            a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap()
        );
        assert_eq!(a.sub(&a).unwrap(), TruncatedSeries::zero(vars, cap));
    }
}

#[test]
fn quasi_inverse_fixed_point() {
    let mut rng = rng();
    for _ in 0..150 {
        let vars = rng.gen_range(1..3);
        let cap = rng.gen_range(2..8);
        let mut h = random_series(&mut rng, vars, cap);
        h.add_term(&vec![0; vars], -h.coeff(&vec![0; vars])); // kill constant term
        let q = h.quasi_inverse().unwrap();
        // q = 1 + h q, the defining identity of 1/(1 - h).
        let rhs = TruncatedSeries::one(vars, cap).add(&h.mul(&q).unwrap()).unwrap();
        assert_eq!(q, rhs);
    }
}

#[test]
fn diagonal_commutes_with_addition_and_matches_filter() {
    let mut rng = rng();
    for _ in 0..150 {
        let vars = rng.gen_range(2..4);
        let cap = rng.gen_range(2..8);
        let a = random_series(&mut rng, vars, cap);
        let b = random_series(&mut rng, vars, cap);
        let sum_then = a.add(&b).unwrap().primitive_diagonal(0, 1).unwrap();
        let then_sum = a
            .primitive_diagonal(0, 1)
            .unwrap()
            .add(&b.primitive_diagonal(0, 1).unwrap())
            .unwrap();
        assert_eq!(sum_then, then_sum);
        // An always-true filter is plain coefficient collection in z.
        let collected = a.filtered_diagonal_sum(cap, |_| true);
        let univariate = a.univariate_in_last();
        for (l, c) in collected.iter().enumerate() {
            assert_eq!(*c, univariate.coeff(&[l as u32]), "length {l}");
        }
    }
}

#[test]
fn phi_mu_left_inverse_law() {
    let mut rng = rng();
    let groups = builtin_groups();
    for _ in 0..500 {
        let g = &groups[rng.gen_range(0..groups.len())];
        let sigma = sigma_alphabet(g);
        let len = rng.gen_range(0..15);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..g.alphabet_size())).collect();
        let u = phi_encode(g, &w).unwrap();
        assert_eq!(mu_decode(&sigma, &u).unwrap(), w, "{}", g.id);
    }
}

#[test]
fn evaluate_splits_over_concatenation() {
    let mut rng = rng();
    let groups = builtin_groups();
    for _ in 0..500 {
        let g = &groups[rng.gen_range(0..groups.len())];
        let len = rng.gen_range(0..15);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..g.alphabet_size())).collect();
        let cut = rng.gen_range(0..=len);
        let left = g.evaluate(&w[..cut]).unwrap();
        let rest = g.evaluate_from(left.coset, &w[cut..]).unwrap();
        let whole = g.evaluate(&w).unwrap();
        assert_eq!(whole.h, left.h.mul(&rest.h).unwrap(), "{}", g.id);
        assert_eq!(whole.coset, rest.coset, "{}", g.id);
    }
}

/// A random complete DFA over the given alphabet, with at least one
/// accepting state reachable sometimes and sometimes not — both are fine.
fn random_dfa(rng: &mut ChaCha8Rng, alphabet: usize) -> Dfa {
    let states = rng.gen_range(1..5);
    let delta =
        (0..states).map(|_| (0..alphabet).map(|_| rng.gen_range(0..states)).collect()).collect();
    let accepting = (0..states).map(|_| rng.gen_bool(0.5)).collect();
    Dfa { alphabet, states, start: rng.gen_range(0..states), accepting, delta }
}

#[test]
fn pruned_dp_equals_unpruned_and_oracle() {
    let mut rng = rng();
    let groups = builtin_groups();
    for g in &groups {
        let r = dfa_all_words(g.alphabet_size());
        let pruned = cogrowth_dp(g, &r, 8, "all").unwrap();
        let unpruned = cogrowth_dp_unpruned(g, &r, 8, "all").unwrap();
        let oracle = cogrowth_oracle(g, &r, 8, "all").unwrap();
        assert_eq!(pruned.coefficients, unpruned.coefficients, "{}", g.id);
        assert_eq!(pruned.coefficients, oracle.coefficients, "{}", g.id);
    }
    // Same law under random regular language constraints.
    for _ in 0..20 {
        let g = &groups[rng.gen_range(0..groups.len())];
        let r = random_dfa(&mut rng, g.alphabet_size());
        let pruned = cogrowth_dp(g, &r, 7, "dfa").unwrap();
        let unpruned = cogrowth_dp_unpruned(g, &r, 7, "dfa").unwrap();
        let oracle = cogrowth_oracle(g, &r, 7, "dfa").unwrap();
        assert_eq!(pruned.coefficients, unpruned.coefficients, "{}", g.id);
        assert_eq!(pruned.coefficients, oracle.coefficients, "{}", g.id);
    }
}

#[test]
fn state_elimination_is_nonnegative_and_counts() {
    let mut rng = rng();
    for _ in 0..25 {
        let alphabet = rng.gen_range(1..4);
        let d = random_dfa(&mut rng, alphabet);
        let series = automaton_to_nrational(&d).eval(alphabet + 1, 12).unwrap();
        assert!(series.all_nonnegative());
        let counts = d.count_words(6);
        let uni = series.univariate_in_last();
        for (l, c) in counts.iter().enumerate() {
            let want: BigInt = c.clone().into();
            assert_eq!(uni.coeff(&[l as u32]), want, "length {l}");
        }
    }
}

#[test]
fn sigma_encoding_respects_lengths_and_legality() {
    let mut rng = rng();
    let groups = builtin_groups();
    for _ in 0..200 {
        let g = &groups[rng.gen_range(0..groups.len())];
        let sigma = sigma_alphabet(g);
        let len = rng.gen_range(0..12);
        let w: Vec<usize> = (0..len).map(|_| rng.gen_range(0..g.alphabet_size())).collect();
        let u = phi_encode(g, &w).unwrap();
        assert_eq!(u.len(), w.len());
        // Each letter's recorded coset is the state reached by the prefix.
        let mut coset = 0;
        for (i, &a) in u.iter().enumerate() {
            let letter = &sigma.letters[a];
            assert_eq!(letter.coset, coset, "{} position {i}", g.id);
            coset = letter.next;
        }
    }
}
