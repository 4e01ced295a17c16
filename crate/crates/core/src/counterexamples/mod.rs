//! Executable negative examples for resampling-based ironing.
//!
//! - [`makespan_scenario`]: ironing raises expected makespan.
//! - [`worstcase_scenario`]: ironing degrades a worst-case approximation ratio.
//! - [`myerson_vs_allocation_ironing`]: ironing allocations differs from
//!   ironing virtual values.
//! - [`recursive_ironing_scenario`]: per-profile recursive ironing is not
//!   monotone ex post.
//!
//! Each scenario returns a serializable report with a rendered table.

mod makespan;
mod myerson;
mod recursive;
mod worstcase;

pub use makespan::{makespan_scenario, MakespanCase, MakespanReport, SchedulingInstance};
pub use myerson::{mixture_prior, myerson_vs_allocation_ironing, virtual_value, MyersonReport};
pub use recursive::{recursive_ironing_scenario, RecursiveReport, RecursiveRun, RecursiveStep, MAX_RECURSIVE_STEPS};
pub use worstcase::{worstcase_scenario, WorstCaseReport};

use std::fmt::Write as _;

pub(crate) fn render_rows(header: &[String], rows: &[Vec<String>]) -> String {
    let cols = header.len();
    let width: Vec<usize> = (0..cols)
        .map(|c| rows.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
        .collect();
    let mut s = String::new();
    let line = |s: &mut String, cells: &[String]| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        let _ = writeln!(s, "{}", parts.join(" | "));
    };
    line(&mut s, header);
    let _ = writeln!(s, "{}", width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().join("-+-"));
    for r in rows {
        line(&mut s, r);
    }
    s
}
