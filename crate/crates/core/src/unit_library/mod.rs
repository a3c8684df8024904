// SPDX-License-Identifier: Apache-2.0

//! Exact and approximate arithmetic units.
//!
//! Every candidate carries executable bit-accurate semantics ([`semantics`]),
//! an exhaustively or sample-characterized error profile ([`characterize`])
//! and a PPA vector from an analytic gate-level cost model ([`cost`]).

pub mod characterize;
pub mod cost;
pub mod semantics;
mod spec;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

pub use characterize::{characterize_errors, SamplingPolicy, EXHAUSTIVE_LIMIT, SAMPLE_COUNT};
pub use cost::estimate_ppa;
pub use semantics::{evaluate_unit, exact_result, CompiledUnit};
pub use spec::{FamilyRange, GroupSpec, LibrarySpec};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OpKind {
    Add,
    Sub,
    Mul,
    Sqrt,
}

impl OpKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OpKind::Add => "add",
            OpKind::Sub => "sub",
            OpKind::Mul => "mul",
            OpKind::Sqrt => "sqrt",
        }
    }
}

impl fmt::Display for OpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Approximation scheme of a unit. The integer knob `k` lives next to it on
/// [`UnitCandidate`]; `Exact` always has `k = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Exact,
    /// Low `k` bits of both operands are dropped before exact arithmetic.
    Truncated,
    /// Lower-part OR: exact high `W-k` bits, low `k` bits are `a | b`, no carry.
    LowerOr,
    /// Lower-part OR with the carry into the high part taken from `a[k-1] & b[k-1]`.
    LowerOrCarry,
    /// Truncated adder whose low `k` sum bits are tied to one (mean-error compensation).
    SetOne,
    /// Array multiplier with the low `k` partial-product rows removed.
    BrokenArray,
    /// Multiplier with the low `k` bits of the multiplicand (operand a) dropped.
    MultiplicandTruncated,
    /// Multiplier with every partial-product bit in a column below `k` removed.
    ColumnTruncated,
    /// Column truncation plus a constant equal to the rounded expected discarded value.
    ColumnCompensated,
    /// Digit-recurrence square root stopped `k` iterations early.
    IterSqrt,
}

impl Scheme {
    pub fn as_str(self) -> &'static str {
        match self {
            Scheme::Exact => "exact",
            Scheme::Truncated => "truncated",
            Scheme::LowerOr => "lower_or",
            Scheme::LowerOrCarry => "lower_or_carry",
            Scheme::SetOne => "set_one",
            Scheme::BrokenArray => "broken_array",
            Scheme::MultiplicandTruncated => "multiplicand_truncated",
            Scheme::ColumnTruncated => "column_truncated",
            Scheme::ColumnCompensated => "column_compensated",
            Scheme::IterSqrt => "iter_sqrt",
        }
    }

    pub fn applies_to(self, kind: OpKind) -> bool {
        use Scheme::*;
        match self {
            Exact => true,
            Truncated => matches!(kind, OpKind::Add | OpKind::Sub | OpKind::Mul),
            LowerOr => matches!(kind, OpKind::Add | OpKind::Sub),
            LowerOrCarry | SetOne => kind == OpKind::Add,
            BrokenArray | MultiplicandTruncated | ColumnTruncated | ColumnCompensated => {
                kind == OpKind::Mul
            }
            IterSqrt => kind == OpKind::Sqrt,
        }
    }
}

/// Operator kind plus operand widths; the unit of interchangeability.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupKey {
    pub kind: OpKind,
    pub width_a: u32,
    pub width_b: u32,
}

impl GroupKey {
    pub fn new(kind: OpKind, width_a: u32, width_b: u32) -> Self {
        Self { kind, width_a, width_b }
    }

    pub fn add(w: u32) -> Self {
        Self::new(OpKind::Add, w, w)
    }

    pub fn sub(w: u32) -> Self {
        Self::new(OpKind::Sub, w, w)
    }

    pub fn mul(wa: u32, wb: u32) -> Self {
        Self::new(OpKind::Mul, wa, wb)
    }

    pub fn sqrt(w: u32) -> Self {
        Self::new(OpKind::Sqrt, w, 0)
    }

    /// Width of the largest exact result.
    pub fn width_out(&self) -> u32 {
        match self.kind {
            OpKind::Add => self.width_a.max(self.width_b) + 1,
            OpKind::Sub => self.width_a.max(self.width_b),
            OpKind::Mul => self.width_a + self.width_b,
            OpKind::Sqrt => self.width_a.div_ceil(2),
        }
    }

    /// Number of distinct operand combinations.
    pub fn input_space_bits(&self) -> u32 {
        match self.kind {
            OpKind::Sqrt => self.width_a,
            _ => self.width_a + self.width_b,
        }
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            OpKind::Mul if self.width_a != self.width_b => {
                write!(f, "mul{}x{}", self.width_a, self.width_b)
            }
            kind => write!(f, "{}{}", kind, self.width_a),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PpaVector {
    pub area: f64,
    pub power: f64,
    pub latency: f64,
}

/// Error profile of a unit against exact arithmetic.
///
/// Relative errors divide by `max(exact, 1)`. `wae` (worst absolute error) is
/// carried alongside the relative worst case so that `mae <= wae` can be checked.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub mre: f64,
    pub mse: f64,
    pub wce: f64,
    pub wae: f64,
}

impl ErrorMetrics {
    pub fn is_zero(&self) -> bool {
        self.mae == 0.0 && self.mse == 0.0 && self.wce == 0.0
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitCandidate {
    pub id: String,
    pub kind: OpKind,
    pub width_a: u32,
    pub width_b: u32,
    pub width_out: u32,
    pub family: Scheme,
    pub k: u32,
    pub ppa: PpaVector,
    pub errors: ErrorMetrics,
    pub approx_level: f64,
}

impl UnitCandidate {
    /// Builds an uncharacterized candidate (zero errors, PPA from the cost model).
    pub fn new(group: GroupKey, family: Scheme, k: u32) -> Self {
        let mut c = Self {
            id: candidate_id(group, family, k),
            kind: group.kind,
            width_a: group.width_a,
            width_b: group.width_b,
            width_out: group.width_out(),
            family,
            k,
            ppa: PpaVector::default(),
            errors: ErrorMetrics::default(),
            approx_level: 0.0,
        };
        c.ppa = estimate_ppa(&c);
        c
    }

    pub fn exact(group: GroupKey) -> Self {
        Self::new(group, Scheme::Exact, 0)
    }

    pub fn group(&self) -> GroupKey {
        GroupKey::new(self.kind, self.width_a, self.width_b)
    }

    pub fn is_exact(&self) -> bool {
        self.family == Scheme::Exact
    }

    pub fn compile(&self) -> CompiledUnit {
        CompiledUnit::new(self)
    }
}

/// Ids sort by group, then by `k`, so the exact unit is first in its group.
pub fn candidate_id(group: GroupKey, family: Scheme, k: u32) -> String {
    format!("{group}_k{k:02}_{}", family.as_str())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LibraryMetadata {
    pub seed: u64,
    pub input_distribution: String,
    pub exhaustive_limit: u64,
    pub sample_count: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Library {
    pub metadata: LibraryMetadata,
    pub candidates: Vec<UnitCandidate>,
}

impl Library {
    pub fn new(metadata: LibraryMetadata, mut candidates: Vec<UnitCandidate>) -> Result<Self> {
        candidates.sort_by(|a, b| a.id.cmp(&b.id));
        for pair in candidates.windows(2) {
            if pair[0].id == pair[1].id {
                return Err(Error::DuplicateId(pair[0].id.clone()));
            }
        }
        Ok(Self { metadata, candidates })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn get(&self, id: &str) -> Option<&UnitCandidate> {
        self.candidates
            .binary_search_by(|c| c.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.candidates[i])
    }

    /// Candidates of one group, in id order.
    pub fn group(&self, key: GroupKey) -> Vec<&UnitCandidate> {
        self.candidates.iter().filter(|c| c.group() == key).collect()
    }

    pub fn groups(&self) -> BTreeSet<GroupKey> {
        self.candidates.iter().map(UnitCandidate::group).collect()
    }

    pub fn group_counts(&self) -> BTreeMap<String, usize> {
        let mut out = BTreeMap::new();
        for c in &self.candidates {
            *out.entry(c.group().to_string()).or_insert(0) += 1;
        }
        out
    }

    /// Keeps only the listed ids.
    pub fn restrict(&self, keep: &BTreeSet<String>) -> Library {
        Library {
            metadata: self.metadata.clone(),
            candidates: self
                .candidates
                .iter()
                .filter(|c| keep.contains(&c.id))
                .cloned()
                .collect(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let lib: Library = serde_json::from_str(text)?;
        Library::new(lib.metadata, lib.candidates)
    }

    /// SHA-256 of the canonical JSON encoding, hex encoded.
    pub fn content_hash(&self) -> String {
        let text = serde_json::to_string(self).expect("library serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Enumerates and characterizes every candidate named by `spec`.
///
/// Characterization runs in parallel over candidates; each sampled candidate
/// uses a seed derived from `(seed, id)`, so the result does not depend on the
/// schedule.
pub fn build_library(spec: &LibrarySpec, seed: u64) -> Result<Library> {
    let mut candidates = spec.enumerate()?;
    let mut seen = BTreeSet::new();
    for c in &candidates {
        if !seen.insert(c.id.clone()) {
            return Err(Error::DuplicateId(c.id.clone()));
        }
    }
    candidates.par_iter_mut().for_each(|c| {
        let policy = SamplingPolicy::for_candidate(c, seed);
        c.errors = characterize_errors(c, &policy);
    });
    Library::new(
        LibraryMetadata {
            seed,
            input_distribution: "uniform".into(),
            exhaustive_limit: EXHAUSTIVE_LIMIT,
            sample_count: SAMPLE_COUNT,
        },
        candidates,
    )
}

/// Stable 64-bit seed from a base seed and a label.
pub fn derive_seed(base: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(base.to_le_bytes());
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"))
}
