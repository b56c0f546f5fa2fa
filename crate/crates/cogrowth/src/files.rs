//! Line-oriented UTF-8 file formats: group data, automata, grammars, and
//! linear systems, with dump functions for round trips.  `#` starts a
//! comment; blank lines are ignored; every parse error carries the line
//! number.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::automata::Dfa;
use crate::grammar::{Cfg, GrammarError, Sym};
use crate::group::{FreeLetter, FreeWord, Generator, GroupDatum, HElement, TableCell};
use crate::semilinear::{DioSystem, SemilinearDecomposition};

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {msg}")]
pub struct ParseError {
    pub line: usize,
    pub msg: String,
}

fn err<T>(line: usize, msg: impl Into<String>) -> Result<T, ParseError> {
    Err(ParseError { line, msg: msg.into() })
}

/// Content lines with their 1-based numbers, comments and blanks stripped.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.split('#').next().unwrap_or("").trim();
        (!line.is_empty()).then_some((i + 1, line))
    })
}

fn parse_int<T: std::str::FromStr>(line: usize, tok: &str, what: &str) -> Result<T, ParseError> {
    tok.parse().or_else(|_| err(line, format!("invalid {what} `{tok}`")))
}

fn keyed<'a>(line: usize, tok: &'a str, key: &str) -> Result<&'a str, ParseError> {
    tok.strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or(ParseError { line, msg: format!("expected `{key}=...`, got `{tok}`") })
}

/// Parses `s3` / `s1^-1` tokens, comma-separated; `-` is the empty word.
fn parse_free_word(line: usize, field: &str, m: usize) -> Result<FreeWord, ParseError> {
    if field == "-" || field.is_empty() {
        return Ok(FreeWord::empty());
    }
    let mut letters = Vec::new();
    for tok in field.split(',') {
        let (body, inverse) = match tok.strip_suffix("^-1") {
            Some(b) => (b, true),
            None => (tok, false),
        };
        let Some(num) = body.strip_prefix('s') else {
            return err(line, format!("invalid free-word letter `{tok}`"));
        };
        let gen: usize = parse_int(line, num, "free-generator index")?;
        if gen == 0 || gen > m {
            return err(line, format!("free generator s{gen} out of range 1..{m}"));
        }
        letters.push(FreeLetter { gen: gen - 1, inverse });
    }
    Ok(FreeWord::from_letters(letters))
}

fn parse_vec(line: usize, field: &str, n: usize) -> Result<Vec<i64>, ParseError> {
    let entries: Vec<i64> = if field == "-" || field.is_empty() {
        Vec::new()
    } else {
        field
            .split(',')
            .map(|t| parse_int(line, t, "vector entry"))
            .collect::<Result<_, _>>()?
    };
    if entries.len() != n {
        return err(line, format!("vector has {} entries, expected {n}", entries.len()));
    }
    Ok(entries)
}

fn format_vec(v: &[i64]) -> String {
    if v.is_empty() {
        "-".to_string()
    } else {
        v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
    }
}

/// Parses a group datum file:
///
/// ```text
/// group n=<int> m=<int> d=<int>
/// gen <name> [inv=<name>]
/// cell <gen-name> <coset> -> <coset> vec=<c1,...,cn> free=<word>
/// relator <gen-name> ...
/// ```
///
/// Cosets are 1-based with coset 1 the identity coset; the table must be
/// total.  `id` is the identifier used in reports.
pub fn parse_group(text: &str, id: &str) -> Result<GroupDatum, ParseError> {
    let mut header: Option<(usize, usize, usize)> = None;
    let mut gen_lines: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut cell_lines: Vec<(usize, Vec<&str>)> = Vec::new();
    let mut relator_lines: Vec<(usize, Vec<&str>)> = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "group" => {
                if toks.len() != 4 || header.is_some() {
                    return err(ln, "expected one `group n=<int> m=<int> d=<int>` line");
                }
                let n = parse_int(ln, keyed(ln, toks[1], "n")?, "n")?;
                let m = parse_int(ln, keyed(ln, toks[2], "m")?, "m")?;
                let d: usize = parse_int(ln, keyed(ln, toks[3], "d")?, "d")?;
                if d == 0 {
                    return err(ln, "coset count d must be positive");
                }
                header = Some((n, m, d));
            }
            "gen" => gen_lines.push((ln, toks[1..].to_vec())),
            "cell" => cell_lines.push((ln, toks[1..].to_vec())),
            "relator" => relator_lines.push((ln, toks[1..].to_vec())),
            other => return err(ln, format!("unknown directive `{other}`")),
        }
    }
    let Some((n, m, d)) = header else {
        return err(0, "missing `group` header line");
    };

    let mut generators = Vec::new();
    let mut pending_inv: Vec<(usize, usize, String)> = Vec::new();
    for (ln, toks) in &gen_lines {
        if toks.is_empty() || toks.len() > 2 {
            return err(*ln, "expected `gen <name> [inv=<name>]`");
        }
        let name = toks[0].to_string();
        if generators.iter().any(|g: &Generator| g.name == name) {
            return err(*ln, format!("duplicate generator `{name}`"));
        }
        if let Some(tok) = toks.get(1) {
            pending_inv.push((*ln, generators.len(), keyed(*ln, tok, "inv")?.to_string()));
        }
        generators.push(Generator { name, inverse: None });
    }
    if generators.is_empty() {
        return err(0, "no generators declared");
    }
    for (ln, idx, inv_name) in pending_inv {
        let Some(j) = generators.iter().position(|g| g.name == inv_name) else {
            return err(ln, format!("inverse `{inv_name}` is not a declared generator"));
        };
        generators[idx].inverse = Some(j);
    }
    let s = generators.len();

    let mut cells: BTreeMap<(usize, usize), TableCell> = BTreeMap::new();
    for (ln, toks) in &cell_lines {
        // <gen-name> <coset> -> <coset> vec=<...> free=<...>
        if toks.len() != 6 || toks[2] != "->" {
            return err(*ln, "expected `cell <gen> <coset> -> <coset> vec=<...> free=<...>`");
        }
        let Some(gen) = generators.iter().position(|g| g.name == toks[0]) else {
            return err(*ln, format!("unknown generator `{}`", toks[0]));
        };
        let from: usize = parse_int(*ln, toks[1], "coset")?;
        let to: usize = parse_int(*ln, toks[3], "coset")?;
        if from == 0 || from > d || to == 0 || to > d {
            return err(*ln, format!("coset out of range 1..{d}"));
        }
        let abelian = parse_vec(*ln, keyed(*ln, toks[4], "vec")?, n)?;
        let free = parse_free_word(*ln, keyed(*ln, toks[5], "free")?, m)?;
        if cells
            .insert((gen, from - 1), TableCell { h: HElement { abelian, free }, next: to - 1 })
            .is_some()
        {
            return err(*ln, format!("duplicate cell for `{}` at coset {from}", toks[0]));
        }
    }
    let mut table = Vec::with_capacity(s);
    for gen in 0..s {
        let mut row = Vec::with_capacity(d);
        for coset in 0..d {
            let Some(cell) = cells.remove(&(gen, coset)) else {
                return err(
                    0,
                    format!(
                        "missing cell for generator `{}` at coset {}",
                        generators[gen].name,
                        coset + 1
                    ),
                );
            };
            row.push(cell);
        }
        table.push(row);
    }

    let mut relators = Vec::new();
    for (ln, toks) in &relator_lines {
        let word = toks
            .iter()
            .map(|name| {
                generators
                    .iter()
                    .position(|g| &g.name == name)
                    .ok_or(ParseError { line: *ln, msg: format!("unknown generator `{name}`") })
            })
            .collect::<Result<Vec<_>, _>>()?;
        relators.push(word);
    }

    Ok(GroupDatum { n, m, generators, cosets: d, table, relators, id: id.to_string() })
}

/// Writes a group datum in the format [`parse_group`] reads.
pub fn dump_group(g: &GroupDatum) -> String {
    let mut out = format!("group n={} m={} d={}\n", g.n, g.m, g.cosets);
    for gen in &g.generators {
        match gen.inverse {
            Some(j) => {
                out += &format!("gen {} inv={}\n", gen.name, g.generators[j].name);
            }
            None => out += &format!("gen {}\n", gen.name),
        }
    }
    for (i, row) in g.table.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            out += &format!(
                "cell {} {} -> {} vec={} free={}\n",
                g.generators[i].name,
                j + 1,
                cell.next + 1,
                format_vec(&cell.h.abelian),
                cell.h.free
            );
        }
    }
    for r in &g.relators {
        let names: Vec<&str> = r.iter().map(|&i| g.generators[i].name.as_str()).collect();
        out += &format!("relator {}\n", names.join(" "));
    }
    out
}

/// A DFA together with its symbol names, as read from a file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DfaFile {
    pub symbols: Vec<String>,
    pub dfa: Dfa,
}

impl DfaFile {
    /// Reindexes the automaton so symbol `i` is `names[i]`; every name must
    /// be in the file's alphabet.
    pub fn remap_to(&self, names: &[String]) -> Result<Dfa, ParseError> {
        let map: Vec<usize> = names
            .iter()
            .map(|n| {
                self.symbols
                    .iter()
                    .position(|s| s == n)
                    .ok_or(ParseError { line: 0, msg: format!("symbol `{n}` not in DFA alphabet") })
            })
            .collect::<Result<_, _>>()?;
        let delta = self
            .dfa
            .delta
            .iter()
            .map(|row| map.iter().map(|&x| row[x]).collect())
            .collect();
        Ok(Dfa {
            alphabet: names.len(),
            states: self.dfa.states,
            start: self.dfa.start,
            accepting: self.dfa.accepting.clone(),
            delta,
        })
    }
}

/// Parses a DFA file:
///
/// ```text
/// alphabet <sym> <sym> ...
/// states <int>
/// start <int>
/// accept <int> ...
/// trans <state> <sym> <state>
/// ```
///
/// States are 0-based.  Missing transitions go to an implicit non-accepting
/// dead state.
pub fn parse_dfa(text: &str) -> Result<DfaFile, ParseError> {
    let mut symbols: Option<Vec<String>> = None;
    let mut states: Option<usize> = None;
    let mut start = 0usize;
    let mut accept: Vec<usize> = Vec::new();
    let mut trans: Vec<(usize, usize, String, usize)> = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "alphabet" => symbols = Some(toks[1..].iter().map(|s| s.to_string()).collect()),
            "states" if toks.len() == 2 => states = Some(parse_int(ln, toks[1], "state count")?),
            "start" if toks.len() == 2 => start = parse_int(ln, toks[1], "start state")?,
            "accept" => {
                for t in &toks[1..] {
                    accept.push(parse_int(ln, t, "accepting state")?);
                }
            }
            "trans" if toks.len() == 4 => {
                let from = parse_int(ln, toks[1], "state")?;
                let to = parse_int(ln, toks[3], "state")?;
                trans.push((ln, from, toks[2].to_string(), to));
            }
            other => return err(ln, format!("unknown or malformed directive `{other}`")),
        }
    }
    let Some(symbols) = symbols else {
        return err(0, "missing `alphabet` line");
    };
    let Some(declared) = states else {
        return err(0, "missing `states` line");
    };
    if declared == 0 {
        return err(0, "state count must be positive");
    }
    if start >= declared {
        return err(0, format!("start state {start} out of range 0..{declared}"));
    }
    // Reserve an extra dead state for missing cells.
    let dead = declared;
    let mut delta = vec![vec![dead; symbols.len()]; declared + 1];
    for a in 0..symbols.len() {
        delta[dead][a] = dead;
    }
    for (ln, from, sym, to) in trans {
        let Some(a) = symbols.iter().position(|s| *s == sym) else {
            return err(ln, format!("symbol `{sym}` not in alphabet"));
        };
        if from >= declared || to >= declared {
            return err(ln, format!("state out of range 0..{declared}"));
        }
        delta[from][a] = to;
    }
    let mut accepting = vec![false; declared + 1];
    for q in accept {
        if q >= declared {
            return err(0, format!("accepting state {q} out of range 0..{declared}"));
        }
        accepting[q] = true;
    }
    Ok(DfaFile {
        symbols: symbols.clone(),
        dfa: Dfa { alphabet: symbols.len(), states: declared + 1, start, accepting, delta },
    })
}

/// Writes a DFA in the format [`parse_dfa`] reads.
pub fn dump_dfa(file: &DfaFile) -> String {
    let d = &file.dfa;
    let mut out = format!("alphabet {}\n", file.symbols.join(" "));
    out += &format!("states {}\nstart {}\n", d.states, d.start);
    let accepting: Vec<String> = (0..d.states)
        .filter(|&q| d.accepting[q])
        .map(|q| q.to_string())
        .collect();
    out += &format!("accept {}\n", accepting.join(" "));
    for q in 0..d.states {
        for (a, sym) in file.symbols.iter().enumerate() {
            out += &format!("trans {q} {sym} {}\n", d.delta[q][a]);
        }
    }
    out
}

/// Parses a grammar file:
///
/// ```text
/// terminal <sym> ...
/// nonterminal <sym> ...
/// start <sym>
/// rule <NT> -> <sym> ... | eps
/// ```
///
/// `|` separates alternative bodies; the keyword `eps` is the empty body.
pub fn parse_grammar(text: &str) -> Result<Cfg, ParseError> {
    let mut terminals: Vec<String> = Vec::new();
    let mut nonterminals: Vec<String> = Vec::new();
    let mut start: Option<(usize, String)> = None;
    let mut rule_lines: Vec<(usize, Vec<String>)> = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "terminal" => terminals.extend(toks[1..].iter().map(|s| s.to_string())),
            "nonterminal" => nonterminals.extend(toks[1..].iter().map(|s| s.to_string())),
            "start" if toks.len() == 2 => start = Some((ln, toks[1].to_string())),
            "rule" => rule_lines.push((ln, toks[1..].iter().map(|s| s.to_string()).collect())),
            other => return err(ln, format!("unknown or malformed directive `{other}`")),
        }
    }
    let Some((start_ln, start_name)) = start else {
        return err(0, "missing `start` line");
    };
    let Some(start_idx) = nonterminals.iter().position(|n| *n == start_name) else {
        return err(start_ln, format!("start symbol `{start_name}` is not a nonterminal"));
    };
    let lookup = |ln: usize, name: &str| -> Result<Sym, ParseError> {
        if let Some(i) = nonterminals.iter().position(|n| n == name) {
            Ok(Sym::N(i))
        } else if let Some(i) = terminals.iter().position(|t| t == name) {
            Ok(Sym::T(i))
        } else {
            err(ln, format!("undeclared symbol `{name}`"))
        }
    };
    let mut rules = Vec::new();
    for (ln, toks) in &rule_lines {
        if toks.len() < 2 || toks[1] != "->" {
            return err(*ln, "expected `rule <NT> -> <body>`");
        }
        let Some(head) = nonterminals.iter().position(|n| *n == toks[0]) else {
            return err(*ln, format!("rule head `{}` is not a nonterminal", toks[0]));
        };
        for alt in toks[2..].split(|t| t == "|") {
            let body = if alt.iter().map(String::as_str).eq(["eps"]) {
                Vec::new()
            } else {
                alt.iter().map(|t| lookup(*ln, t)).collect::<Result<_, _>>()?
            };
            rules.push((head, body));
        }
    }
    Cfg::new(terminals, nonterminals, start_idx, rules).map_err(|e: GrammarError| ParseError {
        line: 0,
        msg: e.to_string(),
    })
}

/// Writes a grammar in the format [`parse_grammar`] reads.
pub fn dump_grammar(g: &Cfg) -> String {
    let mut out = String::new();
    if !g.terminals.is_empty() {
        out += &format!("terminal {}\n", g.terminals.join(" "));
    }
    out += &format!("nonterminal {}\n", g.nonterminals.join(" "));
    out += &format!("start {}\n", g.nonterminals[g.start]);
    for (head, body) in &g.rules {
        let rhs = if body.is_empty() {
            "eps".to_string()
        } else {
            body.iter()
                .map(|s| match *s {
                    Sym::T(i) => g.terminals[i].as_str(),
                    Sym::N(i) => g.nonterminals[i].as_str(),
                })
                .collect::<Vec<_>>()
                .join(" ")
        };
        out += &format!("rule {} -> {rhs}\n", g.nonterminals[*head]);
    }
    out
}

/// Parses a linear system file: `rows <n> cols <k>` then one
/// `row <c1> ... <ck>` line per row.
pub fn parse_system(text: &str) -> Result<DioSystem, ParseError> {
    let mut dims: Option<(usize, usize)> = None;
    let mut rows: Vec<Vec<i64>> = Vec::new();
    for (ln, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        match toks[0] {
            "rows" if toks.len() == 4 && toks[2] == "cols" => {
                dims = Some((
                    parse_int(ln, toks[1], "row count")?,
                    parse_int(ln, toks[3], "column count")?,
                ));
            }
            "row" => {
                let Some((_, cols)) = dims else {
                    return err(ln, "`row` before `rows ... cols ...` header");
                };
                let entries: Vec<i64> = toks[1..]
                    .iter()
                    .map(|t| parse_int(ln, t, "matrix entry"))
                    .collect::<Result<_, _>>()?;
                if entries.len() != cols {
                    return err(ln, format!("row has {} entries, expected {cols}", entries.len()));
                }
                rows.push(entries);
            }
            other => return err(ln, format!("unknown or malformed directive `{other}`")),
        }
    }
    let Some((n, cols)) = dims else {
        return err(0, "missing `rows ... cols ...` header");
    };
    if rows.len() != n {
        return err(0, format!("expected {n} rows, found {}", rows.len()));
    }
    Ok(DioSystem::new(rows, cols))
}

/// Writes a linear system in the format [`parse_system`] reads.
pub fn dump_system(sys: &DioSystem) -> String {
    let mut out = format!("rows {} cols {}\n", sys.rows, sys.cols);
    for row in &sys.matrix {
        let entries: Vec<String> = row.iter().map(|c| c.to_string()).collect();
        out += &format!("row {}\n", entries.join(" "));
    }
    out
}

fn format_uvec(v: &[u64]) -> String {
    v.iter().map(|c| c.to_string()).collect::<Vec<_>>().join(",")
}

/// One `part base=<vec> periods=<vec;vec;...>` line per linear set.
pub fn format_decomposition(dec: &SemilinearDecomposition) -> String {
    let mut out = String::new();
    for p in &dec.parts {
        let periods: Vec<String> = p.periods.iter().map(|u| format_uvec(u)).collect();
        out += &format!("part base={} periods={}\n", format_uvec(&p.base), periods.join(";"));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{bs_group, dihedral_infinite, free_abelian, free_group};

    #[test]
    fn group_round_trip_builtins() {
        for g in [
            free_abelian(2).unwrap(),
            free_group(2).unwrap(),
            bs_group(2).unwrap(),
            dihedral_infinite(),
        ] {
            let text = dump_group(&g);
            let back = parse_group(&text, &g.id).unwrap();
            assert_eq!(back, g, "{}", g.id);
        }
    }

    #[test]
    fn group_parse_reports_line_numbers() {
        let text = "group n=1 m=0 d=1\ngen a inv=b\ngen b inv=a\ncell a 1 -> 9 vec=1 free=-\n";
        let e = parse_group(text, "t").unwrap_err();
        assert_eq!(e.line, 4);
        assert!(e.msg.contains("coset out of range"));

        let missing = "group n=0 m=0 d=1\ngen a\n";
        let e = parse_group(missing, "t").unwrap_err();
        assert!(e.msg.contains("missing cell"));

        let bad_header = "gen a\n";
        assert!(parse_group(bad_header, "t").is_err());
    }

    #[test]
    fn group_parse_free_words_and_vectors() {
        let text = "\
# index-2 example
group n=1 m=2 d=2
gen x
cell x 1 -> 2 vec=3 free=s1,s2^-1
cell x 2 -> 1 vec=-2 free=-
";
        let g = parse_group(text, "t").unwrap();
        assert_eq!(g.table[0][0].h.abelian, vec![3]);
        assert_eq!(g.table[0][0].h.free.to_string(), "s1,s2^-1");
        assert_eq!(g.table[0][1].next, 0);
        assert!(g.table[0][1].h.free.is_empty());
    }

    #[test]
    fn dfa_round_trip_and_dead_state() {
        let text = "\
alphabet a b
states 2
start 0
accept 1
trans 0 a 1
trans 1 b 0
";
        let f = parse_dfa(text).unwrap();
        // One declared-missing cell plus the implicit dead state.
        assert_eq!(f.dfa.states, 3);
        assert!(f.dfa.run(&[0, 1, 0]).unwrap());
        assert!(!f.dfa.run(&[0, 0]).unwrap()); // falls into the dead state
        let back = parse_dfa(&dump_dfa(&f)).unwrap();
        // The dump declares the dead state explicitly, which adds one more.
        assert_eq!(back.dfa.states, 4);
        for w in [vec![], vec![0], vec![0, 1], vec![0, 0], vec![1, 0, 1]] {
            assert_eq!(f.dfa.run(&w).unwrap(), back.dfa.run(&w).unwrap(), "{w:?}");
        }
    }

    #[test]
    fn dfa_remap_by_name() {
        let text = "\
alphabet b a
states 1
start 0
accept 0
trans 0 a 0
trans 0 b 0
";
        let f = parse_dfa(text).unwrap();
        let remapped = f.remap_to(&["a".into(), "b".into()]).unwrap();
        assert_eq!(remapped.alphabet, 2);
        assert!(f.remap_to(&["c".into()]).is_err());
    }

    #[test]
    fn grammar_round_trip() {
        let g = crate::grammar::free_trivial_grammar(2).unwrap();
        let text = dump_grammar(&g);
        let back = parse_grammar(&text).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn grammar_parse_alternatives_and_eps() {
        let text = "\
terminal a b
nonterminal S
start S
rule S -> a S b | eps
";
        let g = parse_grammar(text).unwrap();
        assert_eq!(g.rules.len(), 2);
        assert!(g.rules.iter().any(|(_, body)| body.is_empty()));
        assert!(crate::grammar::count_derivations(&g, &[0, 0, 1, 1]).unwrap() == 1u32.into());
    }

    #[test]
    fn grammar_parse_errors() {
        let e = parse_grammar("nonterminal S\nstart S\nrule S -> q\n").unwrap_err();
        assert_eq!(e.line, 3);
        assert!(parse_grammar("terminal a\nstart S\n").is_err());
    }

    #[test]
    fn system_round_trip() {
        let sys = DioSystem::new(vec![vec![1, 1, -2], vec![0, 3, -1]], 3);
        let back = parse_system(&dump_system(&sys)).unwrap();
        assert_eq!(back, sys);
        let e = parse_system("rows 1 cols 2\nrow 1\n").unwrap_err();
        assert_eq!(e.line, 2);
    }

    #[test]
    fn decomposition_report_format() {
        let sys = DioSystem::new(vec![vec![1, -1]], 2);
        let dec = sys.simple_decomposition(8).unwrap();
        assert_eq!(format_decomposition(&dec), "part base=0,0 periods=1,1\n");
    }
}
