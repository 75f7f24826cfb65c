//! IRMA codes and the hierarchical retrieval error metric.
//!
//! An IRMA code is four hyphen-separated axis strings (technical, directional,
//! anatomical, biological) over the characters 0-9a-z, each character one level
//! deeper in that axis's hierarchy. The error between a query's true code and a
//! retrieved code charges each axis position i with (1/b) * (1/i) when the
//! codes disagree at or before i, where b is the number of distinct characters
//! the reference corpus exhibits at that position under the query's prefix.
//! Early mistakes and mistakes at narrow branchings cost the most; the charge
//! stays on for all deeper positions of that axis once a mismatch is seen.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct IrmaCode {
    axes: [String; 4],
}

#[derive(Debug)]
pub enum IrmaError {
    MalformedCode(String),
    EmptyCorpus,
    InconsistentAxisLengths { expected: [usize; 4], found: [usize; 4], code: String },
    AxisLengthMismatch { query: String, retrieved: String },
    MissingBranchEntry { axis: usize, position: usize, prefix: String },
    MalformedBranchTable(String),
}

impl fmt::Display for IrmaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IrmaError::MalformedCode(s) => write!(f, "malformed IRMA code: {s}"),
            IrmaError::EmptyCorpus => write!(f, "cannot build a branch table from zero codes"),
            IrmaError::InconsistentAxisLengths { expected, found, code } => write!(
                f,
                "code {code} has axis lengths {found:?}, corpus uses {expected:?}"
            ),
            IrmaError::AxisLengthMismatch { query, retrieved } => {
                write!(f, "axis lengths of {query} and {retrieved} differ")
            }
            IrmaError::MissingBranchEntry { axis, position, prefix } => write!(
                f,
                "branch table has no entry for axis {axis} position {position} prefix {prefix:?}"
            ),
            IrmaError::MalformedBranchTable(s) => write!(f, "malformed branch table: {s}"),
        }
    }
}

impl std::error::Error for IrmaError {}

impl IrmaCode {
    /// Axis string by 0-based axis index (0 = technical .. 3 = biological).
    pub fn axis(&self, j: usize) -> &str {
        &self.axes[j]
    }

    pub fn axis_lengths(&self) -> [usize; 4] {
        [
            self.axes[0].len(),
            self.axes[1].len(),
            self.axes[2].len(),
            self.axes[3].len(),
        ]
    }
}

impl FromStr for IrmaCode {
    type Err = IrmaError;

    fn from_str(s: &str) -> Result<Self, IrmaError> {
        let parts: Vec<&str> = s.split('-').collect();
        if parts.len() != 4 {
            return Err(IrmaError::MalformedCode(format!(
                "{s:?} has {} hyphen-separated parts, expected 4",
                parts.len()
            )));
        }
        for p in &parts {
            if p.is_empty() {
                return Err(IrmaError::MalformedCode(format!("{s:?} has an empty axis")));
            }
            if let Some(c) = p.chars().find(|c| !c.is_ascii_digit() && !c.is_ascii_lowercase()) {
                return Err(IrmaError::MalformedCode(format!(
                    "{s:?} contains {c:?}, axis characters must be 0-9 or a-z"
                )));
            }
        }
        Ok(IrmaCode {
            axes: [
                parts[0].to_string(),
                parts[1].to_string(),
                parts[2].to_string(),
                parts[3].to_string(),
            ],
        })
    }
}

impl fmt::Display for IrmaCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}-{}", self.axes[0], self.axes[1], self.axes[2], self.axes[3])
    }
}

/// Distinct-character counts per (axis, position, prefix), built from a corpus.
///
/// b(axis j, position i, prefix) is how many different characters appear at
/// position i among corpus codes whose axis j starts with prefix (|prefix| =
/// i - 1). Every stored count is >= 1 because only observed prefixes have
/// entries.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BranchTable {
    axis_lengths: [usize; 4],
    // key: (0-based axis, prefix), value: distinct characters right after prefix
    counts: BTreeMap<(usize, String), u32>,
}

impl BranchTable {
    pub fn build(codes: &[IrmaCode]) -> Result<Self, IrmaError> {
        let first = codes.first().ok_or(IrmaError::EmptyCorpus)?;
        let axis_lengths = first.axis_lengths();
        let mut seen: BTreeMap<(usize, String), BTreeSet<char>> = BTreeMap::new();
        for code in codes {
            if code.axis_lengths() != axis_lengths {
                return Err(IrmaError::InconsistentAxisLengths {
                    expected: axis_lengths,
                    found: code.axis_lengths(),
                    code: code.to_string(),
                });
            }
            for j in 0..4 {
                let axis = code.axis(j);
                for i in 0..axis.len() {
                    let prefix = axis[..i].to_string();
                    let ch = axis[i..].chars().next().unwrap();
                    seen.entry((j, prefix)).or_default().insert(ch);
                }
            }
        }
        let counts = seen.into_iter().map(|(k, set)| (k, set.len() as u32)).collect();
        Ok(BranchTable { axis_lengths, counts })
    }

    pub fn axis_lengths(&self) -> [usize; 4] {
        self.axis_lengths
    }

    /// Branch count under `prefix` on 0-based axis `j`, if the prefix was seen.
    pub fn branches(&self, j: usize, prefix: &str) -> Option<u32> {
        self.counts.get(&(j, prefix.to_string())).copied()
    }

    /// One sorted line per entry: `j,i,prefix,b` with 1-based axis j and
    /// position i = |prefix| + 1. Prefix characters never include a comma.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for ((j, prefix), b) in &self.counts {
            out.push_str(&format!("{},{},{},{}\n", j + 1, prefix.len() + 1, prefix, b));
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, IrmaError> {
        let mut counts = BTreeMap::new();
        let mut axis_lengths = [0usize; 4];
        for (ln, line) in text.lines().enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 4 {
                return Err(IrmaError::MalformedBranchTable(format!(
                    "line {}: expected j,i,prefix,b",
                    ln + 1
                )));
            }
            let j: usize = fields[0].parse().map_err(|_| {
                IrmaError::MalformedBranchTable(format!("line {}: bad axis {:?}", ln + 1, fields[0]))
            })?;
            let i: usize = fields[1].parse().map_err(|_| {
                IrmaError::MalformedBranchTable(format!("line {}: bad position {:?}", ln + 1, fields[1]))
            })?;
            let b: u32 = fields[3].parse().map_err(|_| {
                IrmaError::MalformedBranchTable(format!("line {}: bad count {:?}", ln + 1, fields[3]))
            })?;
            if !(1..=4).contains(&j) {
                return Err(IrmaError::MalformedBranchTable(format!(
                    "line {}: axis {j} outside 1..=4",
                    ln + 1
                )));
            }
            let prefix = fields[2];
            if i != prefix.len() + 1 {
                return Err(IrmaError::MalformedBranchTable(format!(
                    "line {}: position {i} does not match prefix length {}",
                    ln + 1,
                    prefix.len()
                )));
            }
            if b == 0 {
                return Err(IrmaError::MalformedBranchTable(format!(
                    "line {}: count must be >= 1",
                    ln + 1
                )));
            }
            if counts.insert((j - 1, prefix.to_string()), b).is_some() {
                return Err(IrmaError::MalformedBranchTable(format!(
                    "line {}: duplicate entry for axis {j} prefix {prefix:?}",
                    ln + 1
                )));
            }
            axis_lengths[j - 1] = axis_lengths[j - 1].max(i);
        }
        if counts.is_empty() {
            return Err(IrmaError::MalformedBranchTable("no entries".into()));
        }
        Ok(BranchTable { axis_lengths, counts })
    }
}

/// Hierarchical error charged to retrieving `retrieved` for a query whose true
/// code is `query`: sum over axes j and 1-based positions i of
/// (1/b(j,i,query prefix)) * (1/i) * [codes disagree at some position <= i].
///
/// Identical codes score exactly 0. Every (axis, position) of the query must
/// resolve in the branch table, even positions that contribute 0.
pub fn code_error(
    query: &IrmaCode,
    retrieved: &IrmaCode,
    table: &BranchTable,
) -> Result<f64, IrmaError> {
    if query.axis_lengths() != retrieved.axis_lengths() {
        return Err(IrmaError::AxisLengthMismatch {
            query: query.to_string(),
            retrieved: retrieved.to_string(),
        });
    }
    let mut total = 0.0f64;
    for j in 0..4 {
        let q = query.axis(j).as_bytes();
        let r = retrieved.axis(j).as_bytes();
        let first_mismatch = q.iter().zip(r).position(|(a, b)| a != b);
        for i0 in 0..q.len() {
            let prefix = &query.axis(j)[..i0];
            let b = table.branches(j, prefix).ok_or_else(|| IrmaError::MissingBranchEntry {
                axis: j + 1,
                position: i0 + 1,
                prefix: prefix.to_string(),
            })?;
            if first_mismatch.is_some_and(|h| h <= i0) {
                total += (1.0 / b as f64) * (1.0 / (i0 + 1) as f64);
            }
        }
    }
    Ok(total)
}

/// Sum of code_error over (query, retrieved) pairs, in order. Empty input sums
/// to 0.
pub fn total_error<'a, I>(pairs: I, table: &BranchTable) -> Result<f64, IrmaError>
where
    I: IntoIterator<Item = (&'a IrmaCode, &'a IrmaCode)>,
{
    let mut total = 0.0f64;
    for (q, r) in pairs {
        total += code_error(q, r, table)?;
    }
    Ok(total)
}
