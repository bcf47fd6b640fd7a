//! Counting and lifting laws checked level by level.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::matrix::{Fate, MatrixSpec, TwinRowPair};
use crate::numtheory::gcd;

pub const MIN_VERIFY_K: usize = 3;
pub const MAX_VERIFY_K: usize = 8;

/// Largest level for the column-straddle check, which walks three columns of values.
const MAX_STRADDLE_K: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub k: usize,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: &'static str, k: usize, failures: Vec<String>, ok_detail: String) -> Self {
        let passed = failures.is_empty();
        let detail = if passed { ok_detail } else { failures.join("; ") };
        CheckOutcome { name, k, passed, detail }
    }
}

/// Runs every check for each level up to `k_max`.
pub fn run_checks(k_max: usize) -> Result<Vec<CheckOutcome>> {
    if !(MIN_VERIFY_K..=MAX_VERIFY_K).contains(&k_max) {
        return Err(Error::Range(format!(
            "verification supports {MIN_VERIFY_K} <= k_max <= {MAX_VERIFY_K}, got {k_max}"
        )));
    }
    let mut out = Vec::new();
    for k in 2..=k_max {
        let spec = MatrixSpec::for_level(k)?;
        let pairs: Vec<TwinRowPair> = spec.twin_pairs()?.collect();
        out.push(count_formula(&spec, &pairs)?);
        out.push(coprime_progressions(&spec, &pairs));
        if k >= 3 {
            let parent = MatrixSpec::new(spec.basis().parent().expect("k >= 3"));
            let parents: Vec<TwinRowPair> = parent.twin_pairs()?.collect();
            out.extend(lift_checks(&spec, &parents, &pairs)?);
        }
        if k <= MAX_STRADDLE_K {
            out.push(no_straddle(&spec));
        }
    }
    Ok(out)
}

fn count_formula(spec: &MatrixSpec, pairs: &[TwinRowPair]) -> Result<CheckOutcome> {
    let formula = spec.twin_pair_count()?;
    let counted = pairs.len() as u64;
    let failures = if counted == formula {
        vec![]
    } else {
        vec![format!("enumerated {counted}, formula {formula}")]
    };
    Ok(CheckOutcome::new("twin-row count formula", spec.k(), failures, format!("{counted} pairs")))
}

fn coprime_progressions(spec: &MatrixSpec, pairs: &[TwinRowPair]) -> CheckOutcome {
    let failures = pairs
        .iter()
        .filter(|p| gcd(p.lower_residue, spec.rows()) != 1 || gcd(p.upper_residue, spec.rows()) != 1)
        .map(|p| format!("({}, {}) shares a factor with {}", p.lower_residue, p.upper_residue, spec.rows()))
        .collect();
    CheckOutcome::new("coprime progressions", spec.k(), failures, format!("{} pairs", pairs.len()))
}

fn lift_checks(
    spec: &MatrixSpec,
    parents: &[TwinRowPair],
    pairs: &[TwinRowPair],
) -> Result<[CheckOutcome; 3]> {
    let k = spec.k();
    let p = spec.basis().largest();
    let step = spec.rows() / p;
    let mut survival = Vec::new();
    let mut offsets = Vec::new();
    let mut survivors = BTreeSet::new();
    for parent in parents {
        let kids = spec.lift_pair(parent)?;
        let alive = kids.iter().filter(|c| c.fate == Fate::Survivor).count() as u64;
        if alive != p - 2 {
            survival.push(format!("parent {} keeps {alive} of {p}", parent.lower_residue));
        }
        survivors.extend(kids.iter().filter(|c| c.fate == Fate::Survivor).map(|c| c.pair.lower_residue));

        let killed = spec.killed_offsets(parent)?;
        let scan_low: Vec<u64> = (0..p).filter(|m| (parent.lower_residue + step * m).is_multiple_of(p)).collect();
        let scan_high: Vec<u64> = (0..p).filter(|m| (parent.upper_residue + step * m).is_multiple_of(p)).collect();
        if scan_low != [killed.low] || scan_high != [killed.high] || killed.low == killed.high {
            offsets.push(format!(
                "parent {}: inverse ({}, {}) vs scan ({scan_low:?}, {scan_high:?})",
                parent.lower_residue, killed.low, killed.high
            ));
        }
    }
    let direct: BTreeSet<u64> = pairs.iter().map(|p| p.lower_residue).collect();
    let recount = if survivors == direct {
        vec![]
    } else {
        let missing: Vec<_> = direct.difference(&survivors).take(5).collect();
        let extra: Vec<_> = survivors.difference(&direct).take(5).collect();
        vec![format!("missing {missing:?}, extra {extra:?}")]
    };
    let n = parents.len();
    Ok([
        CheckOutcome::new("lift survival", k, survival, format!("{n} parents x {} survivors", p - 2)),
        CheckOutcome::new("killed offsets unique", k, offsets, format!("{n} parents, inverse = scan")),
        CheckOutcome::new("global recount", k, recount, format!("{} pairs", survivors.len())),
    ])
}

fn no_straddle(spec: &MatrixSpec) -> CheckOutcome {
    let p = spec.rows();
    let column = |v: u64| (v - 2) / p;
    let failures = (2..=3 * p)
        .filter(|&x| gcd(x, p) == 1 && gcd(x + 2, p) == 1 && column(x) != column(x + 2))
        .take(5)
        .map(|x| format!("({x}, {}) spans two columns", x + 2))
        .collect();
    CheckOutcome::new("no straddle", spec.k(), failures, format!("values up to {}", 3 * p))
}
