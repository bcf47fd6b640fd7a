//! Machine-readable report records and their CSV / JSON writers.
//!
//! Decimal statistics are rounded to 12 significant digits before they are
//! written, so output is stable across platforms.

use std::io::{self, Write};

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::matrix::{Fate, LiftedPair, TwinRowPair};
use crate::stats::{ratio_to_f64, d_cp, FragmentScan, GapLevel};

/// Rounds to 12 significant digits.
pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// One twin-row pair scanned over `M` columns. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairRecord {
    pub k: usize,
    pub pair_lo: u64,
    pub pair_hi: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub pi: u64,
    pub d_cp: Option<f64>,
    pub twin_hits: u64,
    pub first_twin_col: Option<u64>,
}

impl From<&FragmentScan> for PairRecord {
    fn from(scan: &FragmentScan) -> Self {
        PairRecord {
            k: scan.basis.k(),
            pair_lo: scan.pair.lower_residue,
            pair_hi: scan.pair.upper_residue,
            m: scan.columns,
            pi: scan.pi_count(),
            d_cp: d_cp(scan).ok().and_then(|r| r.to_f64()).map(round_sig),
            twin_hits: scan.twin_hits.len() as u64,
            first_twin_col: scan.first_twin_column(),
        }
    }
}

/// One matrix level of a gap report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelRecord {
    pub k: usize,
    pub p_k: u64,
    #[serde(rename = "M")]
    pub m: u64,
    pub pairs: u64,
    pub pi_total: u64,
    pub pi_avg: f64,
    pub d_cp: f64,
    pub d_min: f64,
    pub d_max: f64,
    pub empirical_ratio: Option<f64>,
    pub predicted_ratio: f64,
    pub mertens_product: f64,
}

impl From<&GapLevel> for LevelRecord {
    fn from(level: &GapLevel) -> Self {
        let f = |r| round_sig(ratio_to_f64(r));
        LevelRecord {
            k: level.k,
            p_k: level.prime,
            m: level.columns,
            pairs: level.pairs,
            pi_total: level.pi_total,
            pi_avg: f(&level.pi_avg),
            d_cp: f(&level.d_avg),
            d_min: f(&level.d_min),
            d_max: f(&level.d_max),
            empirical_ratio: level.empirical_ratio.as_ref().map(f),
            predicted_ratio: f(&level.predicted_ratio),
            mertens_product: f(&level.mertens_product),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowPairRecord {
    pub k: usize,
    pub lower_row: u64,
    pub upper_row: u64,
    pub lower_residue: u64,
    pub upper_residue: u64,
}

impl RowPairRecord {
    pub fn new(k: usize, pair: &TwinRowPair) -> Self {
        RowPairRecord {
            k,
            lower_row: pair.lower_row,
            upper_row: pair.upper_row,
            lower_residue: pair.lower_residue,
            upper_residue: pair.upper_residue,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LiftRecord {
    pub k: usize,
    pub parent_lo: u64,
    pub parent_hi: u64,
    pub offset: u64,
    pub child_lo: u64,
    pub child_hi: u64,
    pub fate: &'static str,
}

impl LiftRecord {
    pub fn new(k: usize, parent: &TwinRowPair, child: &LiftedPair) -> Self {
        LiftRecord {
            k,
            parent_lo: parent.lower_residue,
            parent_hi: parent.upper_residue,
            offset: child.offset,
            child_lo: child.pair.lower_residue,
            child_hi: child.pair.upper_residue,
            fate: fate_name(child.fate),
        }
    }
}

pub fn fate_name(fate: Fate) -> &'static str {
    match fate {
        Fate::Survivor => "survivor",
        Fate::KilledLow => "killed-low",
        Fate::KilledHigh => "killed-high",
    }
}

/// Header row plus one line per record, fields in declaration order.
pub fn write_csv<W: Write, T: Serialize>(out: W, records: &[T]) -> io::Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for record in records {
        writer.serialize(record).map_err(io::Error::other)?;
    }
    writer.flush()
}

/// A JSON array of objects followed by a newline.
pub fn write_json<W: Write, T: Serialize>(mut out: W, records: &[T]) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut out, records).map_err(io::Error::other)?;
    writeln!(out)
}
