//! Deterministic finite automata with total transition functions, the
//! closure constructions the cogrowth machinery needs (intersection and
//! inverse letter homomorphism), and state elimination into an N-rational
//! expression.
//!
//! Symbols are `0..alphabet` indices; callers keep the symbol names.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::group::GroupDatum;
use crate::series::NRationalExpr;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("unknown symbol {0} (alphabet has {1} letters)")]
    UnknownSymbol(usize, usize),
    #[error("alphabet mismatch: {0} vs {1}")]
    AlphabetMismatch(usize, usize),
    #[error("letter {0} has no involution partner")]
    MissingInvolution(usize),
    #[error("letter map sends {0} to {1}, outside the target alphabet of {2}")]
    UnmappedLetter(usize, usize, usize),
}

/// Deterministic finite automaton over symbols `0..alphabet` with a total
/// transition function `delta[state][symbol]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dfa {
    pub alphabet: usize,
    pub states: usize,
    pub start: usize,
    pub accepting: Vec<bool>,
    pub delta: Vec<Vec<usize>>,
}

impl Dfa {
    /// Runs the unique path for `word`; true iff it ends accepting.
    pub fn run(&self, word: &[usize]) -> Result<bool, AutomatonError> {
        let mut q = self.start;
        for &a in word {
            if a >= self.alphabet {
                return Err(AutomatonError::UnknownSymbol(a, self.alphabet));
            }
            q = self.delta[q][a];
        }
        Ok(self.accepting[q])
    }

    pub fn step(&self, state: usize, symbol: usize) -> usize {
        self.delta[state][symbol]
    }

    /// States from which some accepting state is reachable.  Configurations
    /// outside this set can never contribute an accepted word.
    pub fn coaccessible(&self) -> Vec<bool> {
        let mut coacc = self.accepting.clone();
        loop {
            let mut changed = false;
            for q in 0..self.states {
                if !coacc[q] && self.delta[q].iter().any(|&r| coacc[r]) {
                    coacc[q] = true;
                    changed = true;
                }
            }
            if !changed {
                return coacc;
            }
        }
    }

    /// Number of accepted words per length `0..=max_len` (dynamic-programming
    /// oracle for the state-elimination construction).
    pub fn count_words(&self, max_len: usize) -> Vec<BigUint> {
        let mut layer = vec![BigUint::zero(); self.states];
        layer[self.start] = BigUint::one();
        let mut counts = Vec::with_capacity(max_len + 1);
        for _ in 0..=max_len {
            let accepted = layer
                .iter()
                .zip(&self.accepting)
                .filter(|(_, &acc)| acc)
                .map(|(c, _)| c)
                .sum();
            counts.push(accepted);
            let mut next = vec![BigUint::zero(); self.states];
            for q in 0..self.states {
                if layer[q].is_zero() {
                    continue;
                }
                for a in 0..self.alphabet {
                    let r = self.delta[q][a];
                    next[r] += &layer[q];
                }
            }
            layer = next;
        }
        counts
    }
}

/// Single-state DFA accepting every word.
pub fn dfa_all_words(alphabet: usize) -> Dfa {
    Dfa {
        alphabet,
        states: 1,
        start: 0,
        accepting: vec![true],
        delta: vec![vec![0; alphabet]],
    }
}

/// Last-letter DFA for the freely reduced words: state 0 remembers "no last
/// letter", state `1 + i` remembers letter `i`, and reading the involution
/// partner of the last letter falls into a dead state.
pub fn dfa_reduced_words(
    alphabet: usize,
    involution: &[Option<usize>],
) -> Result<Dfa, AutomatonError> {
    assert_eq!(involution.len(), alphabet);
    for (i, inv) in involution.iter().enumerate() {
        if inv.is_none() {
            return Err(AutomatonError::MissingInvolution(i));
        }
    }
    let dead = alphabet + 1;
    let states = alphabet + 2;
    let mut delta = Vec::with_capacity(states);
    delta.push((0..alphabet).map(|a| a + 1).collect());
    for last in 0..alphabet {
        let row = (0..alphabet)
            .map(|a| if involution[last] == Some(a) { dead } else { a + 1 })
            .collect();
        delta.push(row);
    }
    delta.push(vec![dead; alphabet]);
    let mut accepting = vec![true; states];
    accepting[dead] = false;
    Ok(Dfa { alphabet, states, start: 0, accepting, delta })
}

/// Product automaton accepting the intersection of the two languages.
pub fn product_intersection(d1: &Dfa, d2: &Dfa) -> Result<Dfa, AutomatonError> {
    if d1.alphabet != d2.alphabet {
        return Err(AutomatonError::AlphabetMismatch(d1.alphabet, d2.alphabet));
    }
    let states = d1.states * d2.states;
    let pack = |q1: usize, q2: usize| q1 * d2.states + q2;
    let mut delta = Vec::with_capacity(states);
    let mut accepting = Vec::with_capacity(states);
    for q1 in 0..d1.states {
        for q2 in 0..d2.states {
            delta.push(
                (0..d1.alphabet).map(|a| pack(d1.delta[q1][a], d2.delta[q2][a])).collect(),
            );
            accepting.push(d1.accepting[q1] && d2.accepting[q2]);
        }
    }
    Ok(Dfa {
        alphabet: d1.alphabet,
        states,
        start: pack(d1.start, d2.start),
        accepting,
        delta,
    })
}

/// Inverse image under a letter map `sigma -> x`: the new automaton reads a
/// symbol of the source alphabet and moves as `d` would on its image.
pub fn inverse_letter_hom(d: &Dfa, letter_map: &[usize]) -> Result<Dfa, AutomatonError> {
    for (s, &x) in letter_map.iter().enumerate() {
        if x >= d.alphabet {
            return Err(AutomatonError::UnmappedLetter(s, x, d.alphabet));
        }
    }
    let delta = (0..d.states)
        .map(|q| letter_map.iter().map(|&x| d.delta[q][x]).collect())
        .collect();
    Ok(Dfa {
        alphabet: letter_map.len(),
        states: d.states,
        start: d.start,
        accepting: d.accepting.clone(),
        delta,
    })
}

/// Automaton over the coset-labelled alphabet accepting exactly the images
/// `phi(w)` of words whose element lies in the subgroup `H`.
///
/// One state per coset plus a sink; the letter `sigma_{i,j}` (index
/// `i * d + j`) is legal only from the state of coset `j` and moves to the
/// table's next coset.  The identity coset is the start and only accepting
/// state.
pub fn phi_automaton(g: &GroupDatum) -> Dfa {
    let d = g.cosets;
    let s = g.alphabet_size();
    let sink = d;
    let states = d + 1;
    let mut delta = vec![vec![sink; s * d]; states];
    for i in 0..s {
        for j in 0..d {
            delta[j][i * d + j] = g.table[i][j].next;
        }
    }
    let mut accepting = vec![false; states];
    accepting[0] = true;
    Dfa { alphabet: s * d, states, start: 0, accepting, delta }
}

/// Converts the automaton into an N-rational expression over one variable
/// per letter plus a length variable `z` (last).  The coefficient of
/// `x^k z^l` in the truncated evaluation counts the accepted words with
/// letter multiset `k` (and thus length `l`).
///
/// States are eliminated by ascending index with the star-semiring identity
/// `F_q = (a_qq)^* (c_q + sum a_qr F_r)`, using only sums, products, and
/// quasi-inverse, so the output is N-rational by construction.
pub fn automaton_to_nrational(d: &Dfa) -> NRationalExpr {
    let vars = d.alphabet + 1;
    let letter_monomial = |a: usize| {
        let mut expo = vec![0u32; vars];
        expo[a] = 1;
        expo[vars - 1] = 1; // z
        NRationalExpr::monomial(vars, &expo, 1u32.into())
    };

    // F_q = c[q] + sum_r coef[q][r] F_r
    let mut coef: Vec<Vec<NRationalExpr>> =
        vec![vec![NRationalExpr::zero(vars); d.states]; d.states];
    let mut c: Vec<NRationalExpr> = (0..d.states)
        .map(|q| if d.accepting[q] { NRationalExpr::one(vars) } else { NRationalExpr::zero(vars) })
        .collect();
    for q in 0..d.states {
        for a in 0..d.alphabet {
            let r = d.delta[q][a];
            let entry = std::mem::replace(&mut coef[q][r], NRationalExpr::zero(vars));
            coef[q][r] = add_expr(entry, letter_monomial(a));
        }
    }

    for q in 0..d.states {
        // Solve row q: F_q = (a_qq)^* (c_q + sum_{r != q} a_qr F_r).
        let self_loop = std::mem::replace(&mut coef[q][q], NRationalExpr::zero(vars));
        if !self_loop.is_zero_poly() {
            let star = NRationalExpr::quasi_inverse(self_loop);
            c[q] = mul_expr(star.clone(), c[q].clone());
            for r in 0..d.states {
                if r != q && !coef[q][r].is_zero_poly() {
                    coef[q][r] = mul_expr(star.clone(), coef[q][r].clone());
                }
            }
        }
        // Substitute the solved F_q into every other row.
        for p in 0..d.states {
            if p == q || coef[p][q].is_zero_poly() {
                continue;
            }
            let weight = std::mem::replace(&mut coef[p][q], NRationalExpr::zero(vars));
            c[p] = add_expr(c[p].clone(), mul_expr(weight.clone(), c[q].clone()));
            for r in 0..d.states {
                if r != q && !coef[q][r].is_zero_poly() {
                    let entry = std::mem::replace(&mut coef[p][r], NRationalExpr::zero(vars));
                    coef[p][r] =
                        add_expr(entry, mul_expr(weight.clone(), coef[q][r].clone()));
                }
            }
        }
    }
    c.swap_remove(d.start)
}

fn add_expr(a: NRationalExpr, b: NRationalExpr) -> NRationalExpr {
    if a.is_zero_poly() {
        b
    } else if b.is_zero_poly() {
        a
    } else {
        NRationalExpr::sum(vec![a, b])
    }
}

fn mul_expr(a: NRationalExpr, b: NRationalExpr) -> NRationalExpr {
    if a.is_zero_poly() || b.is_zero_poly() {
        return NRationalExpr::zero(1);
    }
    NRationalExpr::product(vec![a, b])
}
