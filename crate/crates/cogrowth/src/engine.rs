//! Cogrowth computation engines.
//!
//! Words over the generator alphabet `X` are lifted to the coset-labelled
//! alphabet `Sigma` (one letter per generator/coset pair, carrying the
//! subgroup element the pair contributes).  On top of that sit four
//! independent ways of counting the words of each length that represent the
//! group identity:
//!
//! * [`cogrowth_oracle`] — exhaustive enumeration, the ground truth;
//! * [`cogrowth_dp`] — layered dynamic programming over (automaton state,
//!   reduction stack, lattice vector) configurations;
//! * [`theorem_a_pipeline`] — the letter-count series of the stack-filtered
//!   language, summed over the kernel of the lattice system;
//! * [`theorem_b_pipeline`] — the same sum computed from N-rational
//!   expressions (automaton elimination times the kernel generating
//!   function), available when the free rank is zero.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};
use thiserror::Error;

use crate::automata::{
    automaton_to_nrational, inverse_letter_hom, phi_automaton, product_intersection,
    AutomatonError, Dfa,
};
use crate::group::{FreeWord, GroupDatum, GroupError, HElement};
use crate::semilinear::{DioSystem, SemilinearError};
use crate::series::{SeriesError, TruncatedSeries};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Automaton(#[from] AutomatonError),
    #[error(transparent)]
    Series(#[from] SeriesError),
    #[error(transparent)]
    Semilinear(#[from] SemilinearError),
    #[error("sigma letter {0} out of range (alphabet has {1} letters)")]
    UnknownSigmaLetter(usize, usize),
    #[error("engine requires free rank 0, group has m = {0}")]
    FreeRankNotZero(usize),
    #[error("configuration count {0} exceeds the memory budget")]
    MemoryBudget(usize),
    #[error("lattice vector coordinate overflowed")]
    VectorOverflow,
    #[error("internal cross-check failed: {0}")]
    Mismatch(String),
}

/// One coset-labelled letter: generator `gen` read at coset `coset`
/// contributes `h` to the subgroup part and moves to coset `next`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaLetter {
    pub gen: usize,
    pub coset: usize,
    pub h: HElement,
    pub next: usize,
}

/// The full decorated alphabet, indexed as `gen * d + coset`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SigmaAlphabet {
    pub letters: Vec<SigmaLetter>,
    pub d: usize,
    pub s: usize,
    pub n: usize,
    pub m: usize,
}

impl SigmaAlphabet {
    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn index(&self, gen: usize, coset: usize) -> usize {
        gen * self.d + coset
    }

    /// Strips the coset decoration from one letter.
    pub fn mu(&self, sigma: usize) -> Result<usize, EngineError> {
        if sigma >= self.letters.len() {
            return Err(EngineError::UnknownSigmaLetter(sigma, self.letters.len()));
        }
        Ok(self.letters[sigma].gen)
    }

    /// The whole letter map `sigma -> x`, for automaton preimages.
    pub fn mu_map(&self) -> Vec<usize> {
        self.letters.iter().map(|l| l.gen).collect()
    }

    /// The homogeneous system whose kernel is the set of letter multisets
    /// with zero total lattice contribution: row `r`, column `c` holds the
    /// `r`-th lattice coordinate of letter `c`.
    pub fn dio_system(&self) -> DioSystem {
        let matrix = (0..self.n)
            .map(|r| self.letters.iter().map(|l| l.h.abelian[r]).collect())
            .collect();
        DioSystem::new(matrix, self.letters.len())
    }
}

/// Builds the decorated alphabet from the cocycle table.
pub fn sigma_alphabet(g: &GroupDatum) -> SigmaAlphabet {
    let d = g.cosets;
    let s = g.alphabet_size();
    let mut letters = Vec::with_capacity(s * d);
    for gen in 0..s {
        for coset in 0..d {
            let cell = &g.table[gen][coset];
            letters.push(SigmaLetter { gen, coset, h: cell.h.clone(), next: cell.next });
        }
    }
    SigmaAlphabet { letters, d, s, n: g.n, m: g.m }
}

/// Decorates each letter of `w` with the coset of the preceding prefix.
pub fn phi_encode(g: &GroupDatum, w: &[usize]) -> Result<Vec<usize>, GroupError> {
    let s = g.alphabet_size();
    let d = g.cosets;
    let mut coset = 0;
    let mut out = Vec::with_capacity(w.len());
    for &i in w {
        if i >= s {
            return Err(GroupError::UnknownGenerator(i, s));
        }
        out.push(i * d + coset);
        coset = g.table[i][coset].next;
    }
    Ok(out)
}

/// Removes the coset decorations (defined on all decorated words, not only
/// the coset-labelled ones).
pub fn mu_decode(a: &SigmaAlphabet, u: &[usize]) -> Result<Vec<usize>, EngineError> {
    u.iter().map(|&sigma| a.mu(sigma)).collect()
}

/// Automaton over the decorated alphabet accepting exactly the encodings
/// `phi(w)` of words `w` accepted by `r` whose element lies in the subgroup:
/// the intersection of the coset-labelling language with the preimage of
/// `r` under the decoration-stripping map.
pub fn l_r_automaton(g: &GroupDatum, r: &Dfa) -> Result<Dfa, EngineError> {
    let s = g.alphabet_size();
    if r.alphabet != s {
        return Err(AutomatonError::AlphabetMismatch(r.alphabet, s).into());
    }
    let sigma = sigma_alphabet(g);
    let pre = inverse_letter_hom(r, &sigma.mu_map())?;
    Ok(product_intersection(&phi_automaton(g), &pre)?)
}

/// Deterministic membership test for the stack-filtered language: the
/// automaton run of [`l_r_automaton`] plus a free-reduction stack that must
/// come back empty.
pub fn d_r_membership(g: &GroupDatum, r: &Dfa, u: &[usize]) -> Result<bool, EngineError> {
    let sigma = sigma_alphabet(g);
    let lr = l_r_automaton(g, r)?;
    let mut stack = FreeWord::empty();
    for &a in u {
        if a >= sigma.len() {
            return Err(EngineError::UnknownSigmaLetter(a, sigma.len()));
        }
        stack = stack.concat(&sigma.letters[a].h.free);
    }
    Ok(lr.run(u)? && stack.is_empty())
}

/// Cogrowth coefficients `c_0..c_N` with provenance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CogrowthReport {
    pub group: String,
    pub language: String,
    pub engine: String,
    /// Largest length for which the coefficients are exact.
    pub faithful: usize,
    pub coefficients: Vec<BigUint>,
}

impl fmt::Display for CogrowthReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "# group={} language={} engine={} faithful={}",
            self.group, self.language, self.engine, self.faithful
        )?;
        for (n, c) in self.coefficients.iter().enumerate() {
            writeln!(f, "{n}\t{c}")?;
        }
        Ok(())
    }
}

/// Ground-truth engine: enumerate every word over `X` up to `max_len`,
/// filter by `r`-membership and triviality.  Exponential by design.
pub fn cogrowth_oracle(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<CogrowthReport, EngineError> {
    let s = g.alphabet_size();
    if r.alphabet != s {
        return Err(AutomatonError::AlphabetMismatch(r.alphabet, s).into());
    }
    let mut counts = vec![BigUint::zero(); max_len + 1];
    let identity = HElement::identity(g.n);
    oracle_dfs(g, r, r.start, 0, &identity, 0, max_len, &mut counts)?;
    Ok(CogrowthReport {
        group: g.id.clone(),
        language: language.to_string(),
        engine: "oracle".to_string(),
        faithful: max_len,
        coefficients: counts,
    })
}

#[allow(clippy::too_many_arguments)]
fn oracle_dfs(
    g: &GroupDatum,
    r: &Dfa,
    state: usize,
    coset: usize,
    h: &HElement,
    depth: usize,
    max_len: usize,
    counts: &mut [BigUint],
) -> Result<(), EngineError> {
    if r.accepting[state] && coset == 0 && h.is_identity() {
        counts[depth] += 1u32;
    }
    if depth == max_len {
        return Ok(());
    }
    for i in 0..g.alphabet_size() {
        let cell = &g.table[i][coset];
        let h2 = h.mul(&cell.h)?;
        oracle_dfs(g, r, r.delta[state][i], cell.next, &h2, depth + 1, max_len, counts)?;
    }
    Ok(())
}

/// Layered dynamic programming over configurations
/// `(automaton state, reduction stack, lattice vector)`, with sound pruning
/// of configurations that cannot come back to the identity in the letters
/// remaining.
pub fn cogrowth_dp(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<CogrowthReport, EngineError> {
    dp_engine(g, r, max_len, language, true)
}

/// The same computation with pruning disabled; exists so tests can certify
/// that pruning never changes a coefficient.
pub fn cogrowth_dp_unpruned(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<CogrowthReport, EngineError> {
    dp_engine(g, r, max_len, language, false)
}

fn dp_engine(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
    prune: bool,
) -> Result<CogrowthReport, EngineError> {
    const MAX_CONFIGS: usize = 8_000_000;
    let sigma = sigma_alphabet(g);
    let lr = l_r_automaton(g, r)?;
    let coacc = lr.coaccessible();
    // Per-letter bounds for pruning: one letter appends at most `cmax` stack
    // symbols (so can cancel at most that many) and moves lattice coordinate
    // `j` by at most `amax[j]`.
    let cmax = sigma.letters.iter().map(|l| l.h.free.len()).max().unwrap_or(0);
    let amax: Vec<i64> = (0..g.n)
        .map(|j| sigma.letters.iter().map(|l| l.h.abelian[j].abs()).max().unwrap_or(0))
        .collect();

    type Key = (usize, FreeWord, Vec<i64>);
    let mut layer: HashMap<Key, BigUint> = HashMap::new();
    layer.insert((lr.start, FreeWord::empty(), vec![0i64; g.n]), BigUint::one());
    let mut coefficients = Vec::with_capacity(max_len + 1);
    for len in 0..=max_len {
        let mut c = BigUint::zero();
        for ((q, w, v), count) in &layer {
            if lr.accepting[*q] && w.is_empty() && v.iter().all(|&x| x == 0) {
                c += count;
            }
        }
        coefficients.push(c);
        if len == max_len {
            break;
        }
        let remaining = (max_len - len - 1) as u64;
        let mut next: HashMap<Key, BigUint> = HashMap::new();
        for ((q, w, v), count) in &layer {
            for (a, letter) in sigma.letters.iter().enumerate() {
                let q2 = lr.delta[*q][a];
                if !coacc[q2] {
                    continue;
                }
                let w2 = w.concat(&letter.h.free);
                let mut v2 = v.clone();
                for (x, &dv) in v2.iter_mut().zip(&letter.h.abelian) {
                    *x = x.checked_add(dv).ok_or(EngineError::VectorOverflow)?;
                }
                if prune && !returnable(&w2, &v2, remaining, cmax, &amax) {
                    continue;
                }
                *next.entry((q2, w2, v2)).or_default() += count;
            }
        }
        if next.len() > MAX_CONFIGS {
            return Err(EngineError::MemoryBudget(next.len()));
        }
        layer = next;
    }
    Ok(CogrowthReport {
        group: g.id.clone(),
        language: language.to_string(),
        engine: "dp".to_string(),
        faithful: max_len,
        coefficients,
    })
}

/// Can a configuration with this stack and vector still reach the identity
/// within `remaining` letters?  Cancelling the stack needs at least
/// `ceil(|stack| / cmax)` letters and zeroing coordinate `j` at least
/// `ceil(|v_j| / amax_j)`; a single letter can make progress on both at
/// once, so the sound combined bound is the maximum, not the sum.
fn returnable(w: &FreeWord, v: &[i64], remaining: u64, cmax: usize, amax: &[i64]) -> bool {
    if !w.is_empty() {
        if cmax == 0 {
            return false;
        }
        if w.len().div_ceil(cmax) as u64 > remaining {
            return false;
        }
    }
    for (x, &a) in v.iter().zip(amax) {
        if *x != 0 {
            if a == 0 {
                return false;
            }
            if x.unsigned_abs().div_ceil(a.unsigned_abs()) > remaining {
                return false;
            }
        }
    }
    true
}

/// The multivariate letter-count series of the stack-filtered language: the
/// coefficient of `x^k z^l` counts its words of length `l` with letter
/// multiset `k`.  Computed by the layered DP with full exponent tracking.
fn d_r_count_series(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
) -> Result<TruncatedSeries, EngineError> {
    const MAX_CONFIGS: usize = 8_000_000;
    let sigma = sigma_alphabet(g);
    let p = sigma.len();
    let lr = l_r_automaton(g, r)?;
    let coacc = lr.coaccessible();
    let cmax = sigma.letters.iter().map(|l| l.h.free.len()).max().unwrap_or(0);

    // A word of length l contributes total degree 2l (letters plus z).
    let mut series = TruncatedSeries::zero(p + 1, 2 * max_len as u32);
    type Key = (usize, FreeWord, Vec<u32>);
    let mut layer: HashMap<Key, BigUint> = HashMap::new();
    layer.insert((lr.start, FreeWord::empty(), vec![0u32; p]), BigUint::one());
    for len in 0..=max_len {
        for ((q, w, k), count) in &layer {
            if lr.accepting[*q] && w.is_empty() {
                let mut expo = k.clone();
                expo.push(len as u32);
                series.add_term(&expo, BigInt::from(count.clone()));
            }
        }
        if len == max_len {
            break;
        }
        let remaining = (max_len - len - 1) as u64;
        let mut next: HashMap<Key, BigUint> = HashMap::new();
        for ((q, w, k), count) in &layer {
            for (a, letter) in sigma.letters.iter().enumerate() {
                let q2 = lr.delta[*q][a];
                if !coacc[q2] {
                    continue;
                }
                let w2 = w.concat(&letter.h.free);
                if !w2.is_empty() && (cmax == 0 || w2.len().div_ceil(cmax) as u64 > remaining)
                {
                    continue;
                }
                let mut k2 = k.clone();
                k2[a] += 1;
                *next.entry((q2, w2, k2)).or_default() += count;
            }
        }
        if next.len() > MAX_CONFIGS {
            return Err(EngineError::MemoryBudget(next.len()));
        }
        layer = next;
    }
    Ok(series)
}

/// Cogrowth via the letter-count series of the stack-filtered language:
/// `c_l` sums the coefficients of `x^k z^l` over the multisets `k` in the
/// kernel of the lattice system (the matched-exponent reading of the
/// y-block construction).  The literal y-block series is built at a small
/// degree and asserted equal.
pub fn theorem_a_pipeline(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<CogrowthReport, EngineError> {
    let sigma = sigma_alphabet(g);
    let sys = sigma.dio_system();
    let series = d_r_count_series(g, r, max_len)?;
    let coefficients = kernel_filtered_coefficients(&series, &sys, max_len)?;

    // Literal cross-check: the padded product construction at a degree
    // where its (2p+1)-variable truncation is affordable.
    let literal_len = if sigma.len() <= 4 { max_len.min(4) } else { max_len.min(2) };
    let literal = literal_diagonal(&series, &sys, sigma.len(), literal_len)?;
    for (l, lit) in literal.iter().enumerate() {
        if *lit != coefficients[l] {
            return Err(EngineError::Mismatch(format!(
                "literal diagonal disagrees at length {l}: {lit} vs {}",
                coefficients[l]
            )));
        }
    }

    Ok(CogrowthReport {
        group: g.id.clone(),
        language: language.to_string(),
        engine: "theorem-a".to_string(),
        faithful: max_len,
        coefficients,
    })
}

/// Cogrowth for free rank 0 via N-rational expressions: the letter-count
/// series comes from automaton state elimination instead of the DP, and the
/// kernel generating function from the semilinear decomposition; both are
/// evaluated as truncated series with every coefficient nonnegative by
/// construction.
pub fn theorem_b_pipeline(
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<CogrowthReport, EngineError> {
    if g.m != 0 {
        return Err(EngineError::FreeRankNotZero(g.m));
    }
    let sigma = sigma_alphabet(g);
    let p = sigma.len();
    let lr = l_r_automaton(g, r)?;
    let f_l = automaton_to_nrational(&lr).eval(p + 1, 2 * max_len as u32)?;
    if !f_l.all_nonnegative() {
        return Err(EngineError::Mismatch("negative coefficient in language series".into()));
    }

    let sys = sigma.dio_system();
    let dec = sys.simple_decomposition(12)?;
    // The kernel generating function must be an exact 0/1 indicator of the
    // solution set up to the verification degree.
    let f_z = dec.nrational_of(p)?.eval(p, 12)?;
    let mut solutions = sys.enumerate_solutions(12);
    solutions.sort();
    let support: Vec<Vec<u64>> = f_z
        .terms()
        .map(|(e, c)| {
            if c != &BigInt::one() {
                return Err(EngineError::Mismatch(format!(
                    "kernel series coefficient {c} at {e:?} is not 1"
                )));
            }
            Ok(e.iter().map(|&x| x as u64).collect())
        })
        .collect::<Result<_, _>>()?;
    if support != solutions {
        return Err(EngineError::Mismatch(
            "kernel series support differs from enumerated solutions".into(),
        ));
    }

    let coefficients = kernel_filtered_coefficients(&f_l, &sys, max_len)?;
    let literal_len = if p <= 4 { max_len.min(4) } else { max_len.min(2) };
    let literal = literal_diagonal(&f_l, &sys, p, literal_len)?;
    for (l, lit) in literal.iter().enumerate() {
        if *lit != coefficients[l] {
            return Err(EngineError::Mismatch(format!(
                "literal diagonal disagrees at length {l}: {lit} vs {}",
                coefficients[l]
            )));
        }
    }

    Ok(CogrowthReport {
        group: g.id.clone(),
        language: language.to_string(),
        engine: "theorem-b".to_string(),
        faithful: max_len,
        coefficients,
    })
}

/// Sums, per length, the coefficients whose letter multiset lies in the
/// kernel of the lattice system.
fn kernel_filtered_coefficients(
    series: &TruncatedSeries,
    sys: &DioSystem,
    max_len: usize,
) -> Result<Vec<BigUint>, EngineError> {
    let raw = series.filtered_diagonal_sum(max_len as u32, |k| {
        let z: Vec<u64> = k.iter().map(|&x| x as u64).collect();
        sys.z_membership(&z).unwrap_or(false)
    });
    raw.into_iter()
        .map(|c| {
            c.to_biguint()
                .ok_or_else(|| EngineError::Mismatch("negative cogrowth coefficient".into()))
        })
        .collect()
}

/// The padded-product construction made literal: multiply the letter-count
/// series (x-block), the kernel indicator (y-block), and the pairing factor
/// `prod_j 1/(1 - x_j y_j)`, all boxed at `n_a` per variable, then take the
/// matched-exponent diagonal.  Exponential in the variable count, hence
/// only run at small `n_a` as a cross-check.
fn literal_diagonal(
    word_series: &TruncatedSeries,
    sys: &DioSystem,
    p: usize,
    n_a: usize,
) -> Result<Vec<BigUint>, EngineError> {
    let vars = 2 * p + 1;
    let cap = (vars * n_a) as u32;
    let box_cap = n_a as u32;

    let mut fx = TruncatedSeries::zero(vars, cap).with_var_cap(box_cap);
    for (e, c) in word_series.terms() {
        let mut expo = vec![0u32; vars];
        expo[..p].copy_from_slice(&e[..p]);
        expo[vars - 1] = e[p];
        fx.add_term(&expo, c.clone());
    }

    let dec = sys.simple_decomposition((2 * n_a).max(8) as u64)?;
    let fz_small = dec.nrational_of(p)?.eval_boxed(p, (p * n_a) as u32, box_cap)?;
    let mut fy = TruncatedSeries::zero(vars, cap).with_var_cap(box_cap);
    for (e, c) in fz_small.terms() {
        let mut expo = vec![0u32; vars];
        expo[p..2 * p].copy_from_slice(e);
        fy.add_term(&expo, c.clone());
    }

    let mut pair = TruncatedSeries::one(vars, cap).with_var_cap(box_cap);
    for j in 0..p {
        let mut geo = TruncatedSeries::zero(vars, cap).with_var_cap(box_cap);
        for t in 0..=box_cap {
            let mut e = vec![0u32; vars];
            e[j] = t;
            e[p + j] = t;
            geo.add_term(&e, BigInt::one());
        }
        pair = pair.mul(&geo)?;
    }

    let b = pair.mul(&fx)?.mul(&fy)?;
    if !b.all_nonnegative() {
        return Err(EngineError::Mismatch("negative coefficient in padded product".into()));
    }
    let diag = b.complete_diagonal();
    debug_assert!(diag.cap() as usize >= n_a);
    (0..=n_a)
        .map(|l| {
            diag.coeff(&[l as u32])
                .to_biguint()
                .ok_or_else(|| EngineError::Mismatch("negative diagonal coefficient".into()))
        })
        .collect()
}
