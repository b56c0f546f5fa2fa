//! Sparse truncated multivariate power series and N-rational expressions.
//!
//! A [`TruncatedSeries`] stores integer coefficients for exponent vectors up
//! to a total-degree cap (and, optionally, a per-variable cap used by the
//! diagonal pipelines).  All arithmetic is exact on arbitrary-precision
//! integers.
//!
//! An [`NRationalExpr`] is an expression tree built from polynomials with
//! nonnegative integer coefficients, sums, products, and the quasi-inverse
//! `1/(1 - h)` with `h(0,...,0) = 0`.  Evaluating such an expression at any
//! truncation yields a series with nonnegative coefficients.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SeriesError {
    #[error("variable count mismatch: {0} vs {1}")]
    VarMismatch(usize, usize),
    #[error("quasi-inverse argument has nonzero constant term")]
    NonzeroConstantTerm,
    #[error("diagonal indices out of range or not i < j: ({0}, {1})")]
    BadDiagonalIndices(usize, usize),
    #[error("exponent vector has wrong length: expected {0}, got {1}")]
    BadExponentLength(usize, usize),
}

/// Sparse multivariate power series with a total-degree truncation cap.
///
/// Invariants: every stored exponent vector has length `vars`, total degree
/// at most `cap` (and stays within `var_cap` per variable when set), and no
/// explicit zero coefficient is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TruncatedSeries {
    vars: usize,
    cap: u32,
    var_cap: Option<u32>,
    terms: BTreeMap<Vec<u32>, BigInt>,
}

impl TruncatedSeries {
    /// The zero series in `vars` variables, truncated at total degree `cap`.
    pub fn zero(vars: usize, cap: u32) -> Self {
        TruncatedSeries { vars, cap, var_cap: None, terms: BTreeMap::new() }
    }

    /// The constant series 1.
    pub fn one(vars: usize, cap: u32) -> Self {
        Self::monomial(vars, cap, &vec![0; vars], BigInt::one())
            .expect("zero exponent vector is always admissible")
    }

    /// A single term `coeff * x^expo`.
    pub fn monomial(
        vars: usize,
        cap: u32,
        expo: &[u32],
        coeff: BigInt,
    ) -> Result<Self, SeriesError> {
        if expo.len() != vars {
            return Err(SeriesError::BadExponentLength(vars, expo.len()));
        }
        let mut s = Self::zero(vars, cap);
        s.add_term(expo, coeff);
        Ok(s)
    }

    /// Restricts every variable exponent to `var_cap` in addition to the
    /// total-degree cap.  Terms already beyond the box are dropped.
    pub fn with_var_cap(mut self, var_cap: u32) -> Self {
        self.var_cap = Some(var_cap);
        self.terms.retain(|e, _| e.iter().all(|&k| k <= var_cap));
        self
    }

    pub fn vars(&self) -> usize {
        self.vars
    }

    pub fn cap(&self) -> u32 {
        self.cap
    }

    pub fn var_cap(&self) -> Option<u32> {
        self.var_cap
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Coefficient of `x^expo` (zero when absent).
    pub fn coeff(&self, expo: &[u32]) -> BigInt {
        self.terms.get(expo).cloned().unwrap_or_else(BigInt::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigInt)> {
        self.terms.iter()
    }

    fn admits(&self, expo: &[u32]) -> bool {
        let deg: u32 = expo.iter().sum();
        if deg > self.cap {
            return false;
        }
        match self.var_cap {
            Some(vc) => expo.iter().all(|&k| k <= vc),
            None => true,
        }
    }

    /// Adds `coeff` to the coefficient of `x^expo`, dropping the term when it
    /// exceeds the caps or cancels to zero.
    pub fn add_term(&mut self, expo: &[u32], coeff: BigInt) {
        debug_assert_eq!(expo.len(), self.vars);
        if coeff.is_zero() || !self.admits(expo) {
            return;
        }
        let entry = self.terms.entry(expo.to_vec()).or_insert_with(BigInt::zero);
        *entry += coeff;
        if entry.is_zero() {
            self.terms.remove(expo);
        }
    }

    fn merged_caps(&self, other: &Self) -> Result<(u32, Option<u32>), SeriesError> {
        if self.vars != other.vars {
            return Err(SeriesError::VarMismatch(self.vars, other.vars));
        }
        let cap = self.cap.min(other.cap);
        let var_cap = match (self.var_cap, other.var_cap) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        };
        Ok((cap, var_cap))
    }

    pub fn add(&self, other: &Self) -> Result<Self, SeriesError> {
        let (cap, var_cap) = self.merged_caps(other)?;
        let mut out = TruncatedSeries { vars: self.vars, cap, var_cap, terms: BTreeMap::new() };
        for (e, c) in self.terms.iter().chain(other.terms.iter()) {
            out.add_term(e, c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self, SeriesError> {
        let (cap, var_cap) = self.merged_caps(other)?;
        let mut out = TruncatedSeries { vars: self.vars, cap, var_cap, terms: BTreeMap::new() };
        for (e, c) in self.terms.iter() {
            out.add_term(e, c.clone());
        }
        for (e, c) in other.terms.iter() {
            out.add_term(e, -c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self, SeriesError> {
        let (cap, var_cap) = self.merged_caps(other)?;
        let mut out = TruncatedSeries { vars: self.vars, cap, var_cap, terms: BTreeMap::new() };
        // Iterate the smaller operand on the outside; the convolution is
        // quadratic in term counts so skip pairs that overflow the caps early.
        let (small, large) =
            if self.terms.len() <= other.terms.len() { (self, other) } else { (other, self) };
        let mut expo = vec![0u32; self.vars];
        for (ea, ca) in small.terms.iter() {
            let da: u32 = ea.iter().sum();
            if da > cap {
                continue;
            }
            for (eb, cb) in large.terms.iter() {
                let db: u32 = eb.iter().sum();
                if da + db > cap {
                    continue;
                }
                let mut ok = true;
                for i in 0..self.vars {
                    expo[i] = ea[i] + eb[i];
                    if let Some(vc) = var_cap {
                        if expo[i] > vc {
                            ok = false;
                            break;
                        }
                    }
                }
                if ok {
                    out.add_term(&expo, ca * cb);
                }
            }
        }
        Ok(out)
    }

    /// Geometric series `1/(1 - h)` expanded to the cap.  Requires a zero
    /// constant term so that `h^k` has minimum degree `k`.
    pub fn quasi_inverse(&self) -> Result<Self, SeriesError> {
        if !self.coeff(&vec![0; self.vars]).is_zero() {
            return Err(SeriesError::NonzeroConstantTerm);
        }
        let mut out = TruncatedSeries {
            vars: self.vars,
            cap: self.cap,
            var_cap: self.var_cap,
            terms: BTreeMap::new(),
        };
        out.add_term(&vec![0; self.vars], BigInt::one());
        let mut power = out.clone();
        for _ in 1..=self.cap {
            power = power.mul(self)?;
            if power.is_zero() {
                break;
            }
            out = out.add(&power)?;
        }
        Ok(out)
    }

    /// Selects the terms where the exponents of variables `i` and `j` agree
    /// and removes variable `j`.
    pub fn primitive_diagonal(&self, i: usize, j: usize) -> Result<Self, SeriesError> {
        if i >= j || j >= self.vars {
            return Err(SeriesError::BadDiagonalIndices(i, j));
        }
        let mut out = TruncatedSeries {
            vars: self.vars - 1,
            cap: self.cap,
            var_cap: self.var_cap,
            terms: BTreeMap::new(),
        };
        for (e, c) in self.terms.iter() {
            if e[i] == e[j] {
                let mut reduced = Vec::with_capacity(self.vars - 1);
                reduced.extend_from_slice(&e[..j]);
                reduced.extend_from_slice(&e[j + 1..]);
                out.add_term(&reduced, c.clone());
            }
        }
        Ok(out)
    }

    /// Largest `k` for which the coefficient of `z^k` in the complete
    /// diagonal is exact: the monomial `(k,...,k)` has total degree `p*k`,
    /// so it must fit under both caps.
    pub fn faithful_diagonal_degree(&self) -> u32 {
        if self.vars == 0 {
            return self.cap;
        }
        let by_total = self.cap / self.vars as u32;
        match self.var_cap {
            Some(vc) => by_total.min(vc),
            None => by_total,
        }
    }

    /// The univariate series of matched-exponent coefficients `a(k,...,k)`,
    /// truncated at the faithful degree.
    pub fn complete_diagonal(&self) -> Self {
        let faithful = self.faithful_diagonal_degree();
        let mut out = TruncatedSeries::zero(1, faithful);
        if self.vars == 0 {
            // A zero-variable series is a constant.
            if let Some(c) = self.terms.get(&Vec::new()) {
                out.add_term(&[0], c.clone());
            }
            return out;
        }
        for (e, c) in self.terms.iter() {
            let k = e[0];
            if k <= faithful && e.iter().all(|&x| x == k) {
                out.add_term(&[k], c.clone());
            }
        }
        out
    }

    /// For a series over variables `(x_1..x_p, z)`, sums the coefficients of
    /// `x^k z^l` over all `k` passing `member`, for each `l <= max_len`.
    ///
    /// This is the matched-exponent shortcut for the y-block construction:
    /// multiplying by an indicator series in `y` and taking the complete
    /// diagonal selects exactly these terms.
    pub fn filtered_diagonal_sum<F>(&self, max_len: u32, member: F) -> Vec<BigInt>
    where
        F: Fn(&[u32]) -> bool,
    {
        assert!(self.vars >= 1, "need at least the z variable");
        let p = self.vars - 1;
        let mut out = vec![BigInt::zero(); max_len as usize + 1];
        for (e, c) in self.terms.iter() {
            let l = e[p];
            if l <= max_len && member(&e[..p]) {
                out[l as usize] += c;
            }
        }
        out
    }

    /// Substitutes 1 for every x-variable of a `(x_1..x_p, z)` series,
    /// keeping `z`.
    pub fn univariate_in_last(&self) -> Self {
        assert!(self.vars >= 1);
        let p = self.vars - 1;
        let mut out = TruncatedSeries::zero(1, self.cap);
        for (e, c) in self.terms.iter() {
            out.add_term(&[e[p]], c.clone());
        }
        out
    }

    /// True when every stored coefficient is nonnegative.
    pub fn all_nonnegative(&self) -> bool {
        self.terms.values().all(|c| !c.is_negative())
    }
}

impl fmt::Display for TruncatedSeries {
    /// One `exponent-vector: coefficient` line per term, sorted.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (e, c) in self.terms.iter() {
            let expo: Vec<String> = e.iter().map(|k| k.to_string()).collect();
            writeln!(f, "{}: {}", expo.join(","), c)?;
        }
        Ok(())
    }
}

/// Expression tree for N-rational series.
#[derive(Clone, Debug)]
pub enum NRationalExpr {
    /// Polynomial with nonnegative integer coefficients.
    Poly { vars: usize, terms: BTreeMap<Vec<u32>, BigInt> },
    Sum(Vec<NRationalExpr>),
    Product(Vec<NRationalExpr>),
    /// `1/(1 - h)` where `h` must have zero constant term.
    QuasiInverse(Box<NRationalExpr>),
}

impl NRationalExpr {
    pub fn zero(vars: usize) -> Self {
        NRationalExpr::Poly { vars, terms: BTreeMap::new() }
    }

    pub fn one(vars: usize) -> Self {
        Self::monomial(vars, &vec![0; vars], 1u32.into())
    }

    /// Single-term polynomial.  Negative coefficients are not representable;
    /// callers pass counts.
    pub fn monomial(vars: usize, expo: &[u32], coeff: BigInt) -> Self {
        assert_eq!(expo.len(), vars);
        assert!(!coeff.is_negative(), "N-rational polynomials have nonnegative coefficients");
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(expo.to_vec(), coeff);
        }
        NRationalExpr::Poly { vars, terms }
    }

    pub fn sum(terms: Vec<NRationalExpr>) -> Self {
        NRationalExpr::Sum(terms)
    }

    pub fn product(factors: Vec<NRationalExpr>) -> Self {
        NRationalExpr::Product(factors)
    }

    pub fn quasi_inverse(inner: NRationalExpr) -> Self {
        NRationalExpr::QuasiInverse(Box::new(inner))
    }

    pub fn is_zero_poly(&self) -> bool {
        matches!(self, NRationalExpr::Poly { terms, .. } if terms.is_empty())
    }

    /// Evaluates the expression as a truncated series.  The quasi-inverse
    /// constant-term invariant is checked as evaluation reaches each node.
    pub fn eval(&self, vars: usize, cap: u32) -> Result<TruncatedSeries, SeriesError> {
        self.eval_impl(vars, cap, None)
    }

    /// Like [`eval`](Self::eval) with an additional per-variable cap.
    pub fn eval_boxed(
        &self,
        vars: usize,
        cap: u32,
        var_cap: u32,
    ) -> Result<TruncatedSeries, SeriesError> {
        self.eval_impl(vars, cap, Some(var_cap))
    }

    fn eval_impl(
        &self,
        vars: usize,
        cap: u32,
        var_cap: Option<u32>,
    ) -> Result<TruncatedSeries, SeriesError> {
        let base = |mut s: TruncatedSeries| {
            if let Some(vc) = var_cap {
                s = s.with_var_cap(vc);
            }
            s
        };
        match self {
            NRationalExpr::Poly { vars: pv, terms } => {
                // The zero polynomial is variable-agnostic.
                if *pv != vars && !terms.is_empty() {
                    return Err(SeriesError::VarMismatch(*pv, vars));
                }
                let mut s = base(TruncatedSeries::zero(vars, cap));
                for (e, c) in terms {
                    s.add_term(e, c.clone());
                }
                Ok(s)
            }
            NRationalExpr::Sum(parts) => {
                let mut acc = base(TruncatedSeries::zero(vars, cap));
                for p in parts {
                    acc = acc.add(&p.eval_impl(vars, cap, var_cap)?)?;
                }
                Ok(acc)
            }
            NRationalExpr::Product(parts) => {
                let mut acc = base(TruncatedSeries::one(vars, cap));
                for p in parts {
                    if acc.is_zero() {
                        break;
                    }
                    acc = acc.mul(&p.eval_impl(vars, cap, var_cap)?)?;
                }
                Ok(acc)
            }
            NRationalExpr::QuasiInverse(inner) => {
                inner.eval_impl(vars, cap, var_cap)?.quasi_inverse()
            }
        }
    }
}

/// Renders with variables `y1..yk`, quasi-inverses as `1/(1 - h)`.
impl fmt::Display for NRationalExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn monomial_str(expo: &[u32], coeff: &BigInt) -> String {
            let mut factors: Vec<String> = Vec::new();
            for (i, &e) in expo.iter().enumerate() {
                match e {
                    0 => {}
                    1 => factors.push(format!("y{}", i + 1)),
                    _ => factors.push(format!("y{}^{e}", i + 1)),
                }
            }
            if factors.is_empty() {
                coeff.to_string()
            } else if *coeff == BigInt::from(1u32) {
                factors.join(" ")
            } else {
                format!("{coeff} {}", factors.join(" "))
            }
        }
        // `wrap` parenthesizes sums inside products.
        fn go(e: &NRationalExpr, f: &mut fmt::Formatter<'_>, wrap: bool) -> fmt::Result {
            match e {
                NRationalExpr::Poly { terms, .. } => {
                    if terms.is_empty() {
                        return write!(f, "0");
                    }
                    let body: Vec<String> =
                        terms.iter().map(|(e, c)| monomial_str(e, c)).collect();
                    if wrap && body.len() > 1 {
                        write!(f, "({})", body.join(" + "))
                    } else {
                        write!(f, "{}", body.join(" + "))
                    }
                }
                NRationalExpr::Sum(parts) => {
                    if parts.is_empty() {
                        return write!(f, "0");
                    }
                    if wrap && parts.len() > 1 {
                        write!(f, "(")?;
                    }
                    for (i, p) in parts.iter().enumerate() {
                        if i > 0 {
                            write!(f, " + ")?;
                        }
                        go(p, f, false)?;
                    }
                    if wrap && parts.len() > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                NRationalExpr::Product(parts) => {
                    // Skip unit factors (the constant-one polynomial).
                    let is_one = |p: &NRationalExpr| match p {
                        NRationalExpr::Poly { terms, .. } => {
                            terms.len() == 1
                                && terms.iter().all(|(e, c)| {
                                    e.iter().all(|&x| x == 0) && *c == BigInt::from(1u32)
                                })
                        }
                        _ => false,
                    };
                    let kept: Vec<&NRationalExpr> =
                        parts.iter().filter(|p| !is_one(p)).collect();
                    if kept.is_empty() {
                        return write!(f, "1");
                    }
                    for (i, p) in kept.into_iter().enumerate() {
                        if i > 0 {
                            write!(f, " * ")?;
                        }
                        go(p, f, true)?;
                    }
                    Ok(())
                }
                NRationalExpr::QuasiInverse(inner) => {
                    write!(f, "1/(1 - ")?;
                    go(inner, f, false)?;
                    write!(f, ")")
                }
            }
        }
        go(self, f, false)
    }
}
