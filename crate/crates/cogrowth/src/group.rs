//! Group data: generators, cosets, and the cocycle table.
//!
//! A [`GroupDatum`] describes a group `G` with finite generating set `X`
//! containing a finite-index normal subgroup `H = Z^n x F_m`.  For every
//! generator `x` and coset representative `t_j`, the table stores the pair
//! `(h, t_j')` with `t_j x = h t_j'` and `h` in `H`.  Evaluating a word
//! accumulates these factors left to right, so a word represents the group
//! identity exactly when the accumulated `H`-element is trivial and the
//! coset returns to the identity coset.
//!
//! The datum is user supplied (file or builder).  It is evidence-checked by
//! [`GroupDatum::validate`], not proved consistent: relators and involution
//! pairs are evaluated from every coset.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GroupError {
    #[error("abelian rank mismatch: {0} vs {1}")]
    RankMismatch(usize, usize),
    #[error("unknown generator index {0} (alphabet has {1} letters)")]
    UnknownGenerator(usize, usize),
    #[error("unknown generator name `{0}`")]
    UnknownName(String),
    #[error("coset index {0} out of range 1..={1}")]
    BadCoset(usize, usize),
    #[error("builder requires a positive argument, got {0}")]
    NonPositive(i64),
    #[error("builder supports at most 26 named generators, got {0}")]
    TooManyGenerators(usize),
}

/// One signed letter of a free-group word: generator `gen` (0-based among
/// `s_1..s_m`), possibly inverted.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeLetter {
    pub gen: usize,
    pub inverse: bool,
}

impl FreeLetter {
    pub fn inverted(self) -> Self {
        FreeLetter { gen: self.gen, inverse: !self.inverse }
    }

    fn cancels(self, other: FreeLetter) -> bool {
        self.gen == other.gen && self.inverse != other.inverse
    }
}

/// A freely reduced word over the free factor's generators.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FreeWord(Vec<FreeLetter>);

impl FreeWord {
    pub fn empty() -> Self {
        FreeWord(Vec::new())
    }

    /// Builds a word from raw letters, performing free reduction.
    pub fn from_letters<I: IntoIterator<Item = FreeLetter>>(letters: I) -> Self {
        let mut w = FreeWord::empty();
        for l in letters {
            w.push(l);
        }
        w
    }

    /// Appends one letter, cancelling against the current last letter.
    pub fn push(&mut self, letter: FreeLetter) {
        match self.0.last() {
            Some(&last) if last.cancels(letter) => {
                self.0.pop();
            }
            _ => self.0.push(letter),
        }
    }

    /// Concatenation followed by free reduction.
    pub fn concat(&self, other: &FreeWord) -> FreeWord {
        let mut out = self.clone();
        for &l in &other.0 {
            out.push(l);
        }
        out
    }

    /// Reverse-and-flip inverse.
    pub fn inverse(&self) -> FreeWord {
        FreeWord(self.0.iter().rev().map(|l| l.inverted()).collect())
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn letters(&self) -> &[FreeLetter] {
        &self.0
    }

    /// Largest generator index used, if any (for rank checks).
    pub fn max_generator(&self) -> Option<usize> {
        self.0.iter().map(|l| l.gen).max()
    }
}

impl fmt::Display for FreeWord {
    /// Letters as `s1`, `s2^-1`, ...; the empty word prints as `-`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "-");
        }
        let parts: Vec<String> = self
            .0
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("s{}^-1", l.gen + 1)
                } else {
                    format!("s{}", l.gen + 1)
                }
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

/// An element of `H = Z^n x F_m`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HElement {
    pub abelian: Vec<i64>,
    pub free: FreeWord,
}

impl HElement {
    pub fn identity(n: usize) -> Self {
        HElement { abelian: vec![0; n], free: FreeWord::empty() }
    }

    pub fn is_identity(&self) -> bool {
        self.abelian.iter().all(|&c| c == 0) && self.free.is_empty()
    }

    /// Componentwise sum of the abelian parts; free parts concatenated and
    /// freely reduced.
    pub fn mul(&self, other: &HElement) -> Result<HElement, GroupError> {
        if self.abelian.len() != other.abelian.len() {
            return Err(GroupError::RankMismatch(self.abelian.len(), other.abelian.len()));
        }
        let abelian = self.abelian.iter().zip(&other.abelian).map(|(a, b)| a + b).collect();
        Ok(HElement { abelian, free: self.free.concat(&other.free) })
    }

    pub fn inverse(&self) -> HElement {
        HElement {
            abelian: self.abelian.iter().map(|c| -c).collect(),
            free: self.free.inverse(),
        }
    }
}

/// A named generator and the index of its formal inverse, when declared.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub inverse: Option<usize>,
}

/// One cocycle-table cell: `t_j x_i = h * t_next`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TableCell {
    pub h: HElement,
    pub next: usize,
}

/// Finite description of `G` with normal subgroup `H = Z^n x F_m` of index
/// `d`.  Coset indices are 0-based internally; coset 0 is the identity coset
/// (displayed 1-based in files and reports).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupDatum {
    pub n: usize,
    pub m: usize,
    pub generators: Vec<Generator>,
    pub cosets: usize,
    /// `table[i][j]` is the cell for generator `i` at coset `j`.
    pub table: Vec<Vec<TableCell>>,
    /// Words over the generators expected to evaluate to the identity.
    pub relators: Vec<Vec<usize>>,
    /// Identifier used in reports (`bs:2`, `file:...`).
    pub id: String,
}

/// Outcome of [`GroupDatum::evaluate`]: the accumulated `H`-part and the
/// final coset of the word.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Evaluation {
    pub h: HElement,
    pub coset: usize,
}

impl GroupDatum {
    pub fn alphabet_size(&self) -> usize {
        self.generators.len()
    }

    pub fn generator_index(&self, name: &str) -> Result<usize, GroupError> {
        self.generators
            .iter()
            .position(|g| g.name == name)
            .ok_or_else(|| GroupError::UnknownName(name.to_string()))
    }

    /// Parses a whitespace-separated word of generator names.
    pub fn word_from_names(&self, names: &str) -> Result<Vec<usize>, GroupError> {
        names.split_whitespace().map(|t| self.generator_index(t)).collect()
    }

    /// Maps each generator to its formal inverse; `None` when some letter
    /// has no declared inverse.
    pub fn involution(&self) -> Option<Vec<usize>> {
        self.generators.iter().map(|g| g.inverse).collect()
    }

    /// Evaluates a word from the identity coset.
    pub fn evaluate(&self, word: &[usize]) -> Result<Evaluation, GroupError> {
        self.evaluate_from(0, word)
    }

    /// Evaluates a word starting at an arbitrary coset: the result is the
    /// `H`-part and coset of `t_j * w` relative to `t_j`.
    pub fn evaluate_from(&self, coset: usize, word: &[usize]) -> Result<Evaluation, GroupError> {
        if coset >= self.cosets {
            return Err(GroupError::BadCoset(coset + 1, self.cosets));
        }
        let mut h = HElement::identity(self.n);
        let mut c = coset;
        for &g in word {
            let cell = self
                .table
                .get(g)
                .ok_or(GroupError::UnknownGenerator(g, self.generators.len()))?
                .get(c)
                .expect("table is total by construction");
            h = h.mul(&cell.h)?;
            c = cell.next;
        }
        Ok(Evaluation { h, coset: c })
    }

    /// True iff the word represents the group identity.
    pub fn is_trivial(&self, word: &[usize]) -> Result<bool, GroupError> {
        let ev = self.evaluate(word)?;
        Ok(ev.coset == 0 && ev.h.is_identity())
    }

    /// Runs the consistency evidence checks: relators and involution pairs
    /// must evaluate trivially from every coset, and every coset must be
    /// reachable from the identity coset.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();

        // Structural: ranks inside every cell.
        for (i, row) in self.table.iter().enumerate() {
            for (j, cell) in row.iter().enumerate() {
                if cell.h.abelian.len() != self.n {
                    report.failures.push(format!(
                        "cell ({}, coset {}): abelian rank {} != {}",
                        self.generators[i].name,
                        j + 1,
                        cell.h.abelian.len(),
                        self.n
                    ));
                }
                if let Some(g) = cell.h.free.max_generator() {
                    if g >= self.m {
                        report.failures.push(format!(
                            "cell ({}, coset {}): free letter s{} exceeds rank {}",
                            self.generators[i].name,
                            j + 1,
                            g + 1,
                            self.m
                        ));
                    }
                }
                if cell.next >= self.cosets {
                    report.failures.push(format!(
                        "cell ({}, coset {}): next coset {} out of range",
                        self.generators[i].name,
                        j + 1,
                        cell.next + 1
                    ));
                }
            }
        }
        if !report.failures.is_empty() {
            return report;
        }

        // Reachability of every coset from coset 1.
        let mut seen = vec![false; self.cosets];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(c) = stack.pop() {
            for row in &self.table {
                let next = row[c].next;
                if !seen[next] {
                    seen[next] = true;
                    stack.push(next);
                }
            }
        }
        for (j, s) in seen.iter().enumerate() {
            if !s {
                report.warnings.push(format!("coset {} unreachable from coset 1", j + 1));
            }
        }

        // A word w with w-bar = 1 must evaluate to (identity, j) from every
        // coset j, since t_j * w = t_j.
        let check_trivial_word = |word: &[usize], label: &str, report: &mut ValidationReport| {
            for j in 0..self.cosets {
                match self.evaluate_from(j, word) {
                    Ok(ev) if ev.coset == j && ev.h.is_identity() => {}
                    Ok(ev) => report.failures.push(format!(
                        "{label} does not evaluate trivially from coset {}: ends at coset {} with h = {:?}",
                        j + 1,
                        ev.coset + 1,
                        ev.h
                    )),
                    Err(e) => report.failures.push(format!("{label}: {e}")),
                }
            }
        };

        let mut evidence = false;
        for (i, g) in self.generators.iter().enumerate() {
            if let Some(inv) = g.inverse {
                evidence = true;
                let name = &g.name;
                let other = &self.generators[inv].name;
                check_trivial_word(&[i, inv], &format!("involution pair {name} {other}"), &mut report);
            }
        }
        for (k, r) in self.relators.iter().enumerate() {
            evidence = true;
            let pretty: Vec<&str> = r.iter().map(|&i| self.generators[i].name.as_str()).collect();
            check_trivial_word(r, &format!("relator #{} ({})", k + 1, pretty.join(" ")), &mut report);
        }
        if !evidence {
            report
                .warnings
                .push("no group-consistency evidence: datum has no relators and no involution".into());
        }
        report
    }
}

/// Validation outcome; failures carry the witness word.
#[derive(Clone, Debug, Default)]
pub struct ValidationReport {
    pub failures: Vec<String>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for fail in &self.failures {
            writeln!(f, "FAIL: {fail}")?;
        }
        for warn in &self.warnings {
            writeln!(f, "warn: {warn}")?;
        }
        if self.failures.is_empty() {
            writeln!(f, "all checks passed")?;
        }
        Ok(())
    }
}

fn letter_names(count: usize) -> Result<Vec<char>, GroupError> {
    if count > 26 {
        return Err(GroupError::TooManyGenerators(count));
    }
    Ok(('a'..='z').take(count).collect())
}

/// Free abelian group `Z^n` with generating set `{a, a^-1, b, b^-1, ...}`.
pub fn free_abelian(n: usize) -> Result<GroupDatum, GroupError> {
    let names = letter_names(n)?;
    let mut generators = Vec::new();
    let mut table = Vec::new();
    for (k, &c) in names.iter().enumerate() {
        for sign in [1i64, -1] {
            let idx = generators.len();
            let name = if sign > 0 { c.to_string() } else { format!("{c}^-1") };
            let inv = if sign > 0 { idx + 1 } else { idx - 1 };
            generators.push(Generator { name, inverse: Some(inv) });
            let mut abelian = vec![0i64; n];
            abelian[k] = sign;
            table.push(vec![TableCell {
                h: HElement { abelian, free: FreeWord::empty() },
                next: 0,
            }]);
        }
    }
    // Commutators as relators: [g_i, g_j] = 1 for i < j.
    let mut relators = Vec::new();
    for i in 0..n {
        for j in (i + 1)..n {
            let (gi, gj) = (2 * i, 2 * j);
            relators.push(vec![gi, gj, gi + 1, gj + 1]);
        }
    }
    Ok(GroupDatum {
        n,
        m: 0,
        generators,
        cosets: 1,
        table,
        relators,
        id: format!("z:{n}"),
    })
}

/// Free group `F_m` with generating set `{a, a^-1, b, b^-1, ...}`.
pub fn free_group(m: usize) -> Result<GroupDatum, GroupError> {
    let names = letter_names(m)?;
    let mut generators = Vec::new();
    let mut table = Vec::new();
    for (k, &c) in names.iter().enumerate() {
        for inverse in [false, true] {
            let idx = generators.len();
            let name = if inverse { format!("{c}^-1") } else { c.to_string() };
            let inv = if inverse { idx - 1 } else { idx + 1 };
            generators.push(Generator { name, inverse: Some(inv) });
            table.push(vec![TableCell {
                h: HElement {
                    abelian: Vec::new(),
                    free: FreeWord::from_letters([FreeLetter { gen: k, inverse }]),
                },
                next: 0,
            }]);
        }
    }
    Ok(GroupDatum {
        n: 0,
        m,
        generators,
        cosets: 1,
        table,
        relators: Vec::new(),
        id: format!("free:{m}"),
    })
}

/// Infinite dihedral group `<r, s | s^2 = 1, s r s = r^-1>`, virtually `Z`
/// via the index-2 subgroup `<r>`.  Alphabet `{r, r^-1, s}`.
pub fn dihedral_infinite() -> GroupDatum {
    let generators = vec![
        Generator { name: "r".into(), inverse: Some(1) },
        Generator { name: "r^-1".into(), inverse: Some(0) },
        Generator { name: "s".into(), inverse: Some(2) },
    ];
    let h = |k: i64| HElement { abelian: vec![k], free: FreeWord::empty() };
    let table = vec![
        // r: commutes past 1, conjugates to r^-1 past s.
        vec![TableCell { h: h(1), next: 0 }, TableCell { h: h(-1), next: 1 }],
        vec![TableCell { h: h(-1), next: 0 }, TableCell { h: h(1), next: 1 }],
        // s: flips the coset.
        vec![TableCell { h: h(0), next: 1 }, TableCell { h: h(0), next: 0 }],
    ];
    GroupDatum {
        n: 1,
        m: 0,
        generators,
        cosets: 2,
        table,
        // s s = 1 is covered by the involution; s r s r = 1 pins the action.
        relators: vec![vec![2, 0, 2, 0]],
        id: "dihedral".into(),
    }
}

/// Baumslag-Solitar group `BS(N,N) = <a, t | t a^N t^-1 = a^N>` with the
/// standard alphabet `{a, a^-1, t, t^-1}`.
///
/// `BS(N,N)` contains `Z x F_N` as an index-`N` normal subgroup: the centre
/// `Z = <a^N>`, the free factor generated by `s_{j+1} = a^j t a^-j` for
/// `j = 0..N-1`, and coset representatives `{1, a, ..., a^{N-1}}`.
pub fn bs_group(big_n: usize) -> Result<GroupDatum, GroupError> {
    if big_n < 1 {
        return Err(GroupError::NonPositive(big_n as i64));
    }
    let n = big_n;
    let generators = vec![
        Generator { name: "a".into(), inverse: Some(1) },
        Generator { name: "a^-1".into(), inverse: Some(0) },
        Generator { name: "t".into(), inverse: Some(3) },
        Generator { name: "t^-1".into(), inverse: Some(2) },
    ];
    let vec_h = |k: i64| HElement { abelian: vec![k], free: FreeWord::empty() };
    let free_h = |gen: usize, inverse: bool| HElement {
        abelian: vec![0],
        free: FreeWord::from_letters([FreeLetter { gen, inverse }]),
    };
    let mut table = vec![Vec::new(); 4];
    for j in 0..n {
        // a^j * a = a^{j+1}, wrapping through the centre generator a^N.
        table[0].push(if j + 1 < n {
            TableCell { h: vec_h(0), next: j + 1 }
        } else {
            TableCell { h: vec_h(1), next: 0 }
        });
        // a^j * a^-1 = a^{j-1}.
        table[1].push(if j > 0 {
            TableCell { h: vec_h(0), next: j - 1 }
        } else {
            TableCell { h: vec_h(-1), next: n - 1 }
        });
        // a^j * t = (a^j t a^-j) * a^j = s_{j+1} a^j.
        table[2].push(TableCell { h: free_h(j, false), next: j });
        table[3].push(TableCell { h: free_h(j, true), next: j });
    }
    // Relator t a^N t^-1 a^-N.
    let mut relator = vec![2];
    relator.extend(std::iter::repeat(0).take(n));
    relator.push(3);
    relator.extend(std::iter::repeat(1).take(n));
    Ok(GroupDatum {
        n: 1,
        m: n,
        generators,
        cosets: n,
        table,
        relators: vec![relator],
        id: format!("bs:{n}"),
    })
}
