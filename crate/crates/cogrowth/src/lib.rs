//! Cogrowth series coefficients for finitely generated groups that contain
//! `Z^n x F_m` as a finite-index normal subgroup.
//!
//! The n-th cogrowth coefficient counts the words of length n, drawn from a
//! regular language over the group's generators, that represent the group
//! identity.  This crate computes those coefficients four independent ways
//! and cross-checks them:
//!
//! - **oracle** — brute-force enumeration of every word ([`engine::cogrowth_oracle`]);
//! - **dp** — dynamic programming over (automaton state, free-group stack,
//!   lattice vector) configurations ([`engine::cogrowth_dp`]);
//! - **theorem-a** — a letter-count series of the coset-labelled language,
//!   filtered through the kernel of a linear system and cross-checked
//!   against a literal multivariate diagonal ([`engine::theorem_a_pipeline`]);
//! - **theorem-b** — for free rank 0, the same computation built entirely
//!   from rational expressions with nonnegative coefficients
//!   ([`engine::theorem_b_pipeline`]).
//!
//! ```
//! use cogrowth::automata::dfa_all_words;
//! use cogrowth::engine::cogrowth_dp;
//! use cogrowth::group::free_abelian;
//!
//! let g = free_abelian(1).unwrap();
//! let r = dfa_all_words(g.alphabet_size());
//! let report = cogrowth_dp(&g, &r, 6, "all").unwrap();
//! // Closed walks on Z: central binomial coefficients.
//! let c: Vec<u32> = report.coefficients.iter().map(|c| c.try_into().unwrap()).collect();
//! assert_eq!(c, [1, 0, 2, 0, 6, 0, 20]);
//! ```
//!
//! The `cogrowth` binary exposes the same engines; see the guide in the
//! repository's `book/` directory.

pub mod automata;
pub mod cli;
pub mod engine;
pub mod files;
pub mod grammar;
pub mod group;
pub mod semilinear;
pub mod series;

pub use engine::CogrowthReport;
pub use group::GroupDatum;
pub use series::{NRationalExpr, TruncatedSeries};

// Compile every code block in the guide as a doc-test so the book and the
// library cannot drift apart.
#[cfg(doctest)]
mod book {
    macro_rules! chapter {
        ($name:ident, $path:literal) => {
            #[doc = include_str!($path)]
            mod $name {}
        };
    }
    chapter!(introduction, "../../../book/src/introduction.md");
    chapter!(group_data, "../../../book/src/group-data.md");
    chapter!(languages, "../../../book/src/languages.md");
    chapter!(series_and_diagonals, "../../../book/src/series-and-diagonals.md");
    chapter!(grammars, "../../../book/src/grammars.md");
    chapter!(semilinear_sets, "../../../book/src/semilinear-sets.md");
    chapter!(engines, "../../../book/src/engines.md");
    chapter!(command_line, "../../../book/src/command-line.md");
}
