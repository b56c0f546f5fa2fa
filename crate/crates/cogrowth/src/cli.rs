//! Command-line front end: resolve group and language specifications, run
//! engines, cross-verify, and emit reports.
//!
//! Exit statuses are a stable contract for scripting: 0 success, 1 engine
//! or verification disagreement, 2 input error.

use std::fs;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::automata::Dfa;
use crate::automata::{dfa_all_words, dfa_reduced_words};
use crate::engine::{
    cogrowth_dp, cogrowth_oracle, theorem_a_pipeline, theorem_b_pipeline, CogrowthReport,
    EngineError,
};
use crate::files::{dump_group, parse_dfa, parse_group, parse_system};
use crate::group::{bs_group, dihedral_infinite, free_abelian, free_group, GroupDatum};

#[derive(Parser)]
#[command(name = "cogrowth", version, about = "Cogrowth series coefficients of groups with a finite-index Z^n x F_m subgroup")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Compute coefficients c_0..c_N and write a report.
    Compute {
        /// Built-in (`z:<n>`, `free:<m>`, `bs:<N>`, `dihedral`) or `file:<path>`.
        #[arg(long)]
        group: String,
        /// `all`, `reduced`, or `dfa:<path>`.
        #[arg(long, default_value = "all")]
        language: String,
        /// Largest word length N.
        #[arg(long)]
        max_len: usize,
        /// `oracle`, `dp`, `theorem-a`, `theorem-b`, or `all`.
        #[arg(long, default_value = "dp")]
        engine: String,
        /// Report destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write the resolved group datum to this path.
        #[arg(long)]
        dump: Option<PathBuf>,
    },
    /// Run every applicable engine and check that all coefficients agree.
    Verify {
        #[arg(long)]
        group: String,
        #[arg(long, default_value = "all")]
        language: String,
        #[arg(long)]
        max_len: usize,
    },
    /// Decompose a homogeneous linear system's solution monoid and print the
    /// Hilbert basis, the simple parts, and the rational expression.
    Semilinear {
        /// System file (`rows <n> cols <k>` header plus `row` lines).
        #[arg(long)]
        system: PathBuf,
        /// Verify the decomposition against enumeration up to this total degree.
        #[arg(long, default_value_t = 12)]
        degree_bound: u64,
    },
    /// Write a built-in or file group datum in the group file format.
    Dump {
        #[arg(long)]
        group: String,
        /// Destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

/// A failure with its exit status: 1 disagreement, 2 input error.
#[derive(Debug)]
pub struct CliFailure {
    pub code: i32,
    pub message: String,
}

fn input_err<T>(message: impl Into<String>) -> Result<T, CliFailure> {
    Err(CliFailure { code: 2, message: message.into() })
}

fn disagreement<T>(message: impl Into<String>) -> Result<T, CliFailure> {
    Err(CliFailure { code: 1, message: message.into() })
}

impl From<EngineError> for CliFailure {
    fn from(e: EngineError) -> Self {
        let code = if matches!(e, EngineError::Mismatch(_)) { 1 } else { 2 };
        CliFailure { code, message: e.to_string() }
    }
}

/// Resolves a group specification to a validated datum.
pub fn load_group(spec: &str) -> Result<GroupDatum, CliFailure> {
    let g = if let Some(path) = spec.strip_prefix("file:") {
        let text = fs::read_to_string(path)
            .map_err(|e| CliFailure { code: 2, message: format!("{path}: {e}") })?;
        parse_group(&text, &format!("file:{path}"))
            .map_err(|e| CliFailure { code: 2, message: format!("{path}: {e}") })?
    } else if let Some(n) = spec.strip_prefix("z:") {
        let n = parse_usize(n, spec)?;
        free_abelian(n).map_err(|e| CliFailure { code: 2, message: e.to_string() })?
    } else if let Some(m) = spec.strip_prefix("free:") {
        let m = parse_usize(m, spec)?;
        free_group(m).map_err(|e| CliFailure { code: 2, message: e.to_string() })?
    } else if let Some(n) = spec.strip_prefix("bs:") {
        let n = parse_usize(n, spec)?;
        bs_group(n).map_err(|e| CliFailure { code: 2, message: e.to_string() })?
    } else if spec == "dihedral" {
        dihedral_infinite()
    } else {
        return input_err(format!("unknown group specification `{spec}`"));
    };
    let report = g.validate();
    if !report.passed() {
        return input_err(format!(
            "group `{}` failed validation:\n{}",
            g.id,
            report.failures.join("\n")
        ));
    }
    Ok(g)
}

fn parse_usize(tok: &str, spec: &str) -> Result<usize, CliFailure> {
    tok.parse().or_else(|_| input_err(format!("bad integer in group specification `{spec}`")))
}

/// Resolves a language specification to a DFA over the group's alphabet.
pub fn load_language(spec: &str, g: &GroupDatum) -> Result<Dfa, CliFailure> {
    match spec {
        "all" => Ok(dfa_all_words(g.alphabet_size())),
        "reduced" => {
            let Some(inv) = g.involution() else {
                return input_err(format!(
                    "language `reduced` needs every generator of `{}` to have a declared inverse",
                    g.id
                ));
            };
            let pairs: Vec<Option<usize>> = inv.into_iter().map(Some).collect();
            dfa_reduced_words(g.alphabet_size(), &pairs)
                .map_err(|e| CliFailure { code: 2, message: e.to_string() })
        }
        _ => {
            let Some(path) = spec.strip_prefix("dfa:") else {
                return input_err(format!("unknown language specification `{spec}`"));
            };
            let text = fs::read_to_string(path)
                .map_err(|e| CliFailure { code: 2, message: format!("{path}: {e}") })?;
            let file = parse_dfa(&text)
                .map_err(|e| CliFailure { code: 2, message: format!("{path}: {e}") })?;
            let names: Vec<String> = g.generators.iter().map(|gen| gen.name.clone()).collect();
            file.remap_to(&names)
                .map_err(|e| CliFailure { code: 2, message: format!("{path}: {e}") })
        }
    }
}

fn run_engine(
    name: &str,
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<CogrowthReport, CliFailure> {
    let report = match name {
        "oracle" => cogrowth_oracle(g, r, max_len, language)?,
        "dp" => cogrowth_dp(g, r, max_len, language)?,
        "theorem-a" => theorem_a_pipeline(g, r, max_len, language)?,
        "theorem-b" => {
            if g.m != 0 {
                return input_err(format!(
                    "engine theorem-b needs free rank 0, group `{}` has m = {}",
                    g.id, g.m
                ));
            }
            theorem_b_pipeline(g, r, max_len, language)?
        }
        other => return input_err(format!("unknown engine `{other}`")),
    };
    Ok(report)
}

/// Every engine that applies to the group: theorem-b only at free rank 0.
fn applicable_engines(g: &GroupDatum) -> Vec<&'static str> {
    let mut engines = vec!["oracle", "dp", "theorem-a"];
    if g.m == 0 {
        engines.push("theorem-b");
    }
    engines
}

/// Runs the named engines and checks coefficient-by-coefficient agreement up
/// to each pair's common faithful degree; a diff table on mismatch.
fn run_and_compare(
    engines: &[&str],
    g: &GroupDatum,
    r: &Dfa,
    max_len: usize,
    language: &str,
) -> Result<Vec<CogrowthReport>, CliFailure> {
    let reports: Vec<CogrowthReport> = engines
        .iter()
        .map(|e| run_engine(e, g, r, max_len, language))
        .collect::<Result<_, _>>()?;
    for other in &reports[1..] {
        let first = &reports[0];
        let bound = first.faithful.min(other.faithful);
        if first.coefficients[..=bound] != other.coefficients[..=bound] {
            let mut table = format!(
                "engines `{}` and `{}` disagree on {} / {}:\nn\t{}\t{}\n",
                first.engine, other.engine, g.id, language, first.engine, other.engine
            );
            for n in 0..=bound {
                if first.coefficients[n] != other.coefficients[n] {
                    table += &format!(
                        "{n}\t{}\t{}\n",
                        first.coefficients[n], other.coefficients[n]
                    );
                }
            }
            return disagreement(table);
        }
    }
    Ok(reports)
}

fn write_out(out: &Option<PathBuf>, text: &str) -> Result<(), CliFailure> {
    match out {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliFailure { code: 2, message: format!("{}: {e}", path.display()) }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), CliFailure> {
    match cli.command {
        Command::Compute { group, language, max_len, engine, out, dump } => {
            let g = load_group(&group)?;
            if let Some(path) = &dump {
                write_out(&Some(path.clone()), &dump_group(&g))?;
            }
            let r = load_language(&language, &g)?;
            let reports = if engine == "all" {
                run_and_compare(&applicable_engines(&g), &g, &r, max_len, &language)?
            } else {
                vec![run_engine(&engine, &g, &r, max_len, &language)?]
            };
            let text: String = reports.iter().map(|rep| rep.to_string()).collect();
            write_out(&out, &text)
        }
        Command::Verify { group, language, max_len } => {
            let g = load_group(&group)?;
            let r = load_language(&language, &g)?;
            let reports = run_and_compare(&applicable_engines(&g), &g, &r, max_len, &language)?;
            println!(
                "ok: {} engines agree on {} / {} up to length {}",
                reports.len(),
                g.id,
                language,
                max_len
            );
            Ok(())
        }
        Command::Semilinear { system, degree_bound } => {
            let text = fs::read_to_string(&system).map_err(|e| CliFailure {
                code: 2,
                message: format!("{}: {e}", system.display()),
            })?;
            let sys = parse_system(&text).map_err(|e| CliFailure {
                code: 2,
                message: format!("{}: {e}", system.display()),
            })?;
            let basis =
                sys.hilbert_basis().map_err(|e| CliFailure { code: 2, message: e.to_string() })?;
            for b in &basis {
                let entries: Vec<String> = b.iter().map(|c| c.to_string()).collect();
                println!("basis {}", entries.join(","));
            }
            let dec = sys
                .simple_decomposition(degree_bound)
                .map_err(|e| CliFailure { code: 1, message: e.to_string() })?;
            print!("{}", crate::files::format_decomposition(&dec));
            dec.verify(&sys, degree_bound)
                .map_err(|e| CliFailure { code: 1, message: e.to_string() })?;
            let expr = dec
                .nrational_of(sys.cols)
                .map_err(|e| CliFailure { code: 1, message: e.to_string() })?;
            println!("expression {expr}");
            println!("ok: decomposition verified to degree {degree_bound}");
            Ok(())
        }
        Command::Dump { group, out } => {
            let g = load_group(&group)?;
            write_out(&out, &dump_group(&g))
        }
    }
}

/// Parses arguments, runs the command, and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            // clap handles --help/--version itself with status 0.
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}
