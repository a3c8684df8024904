// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::{GroupKey, OpKind, Scheme, UnitCandidate};
use crate::error::{Error, Result};

/// One family and the `k` values to instantiate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FamilyRange {
    pub family: Scheme,
    pub ks: Vec<u32>,
}

impl FamilyRange {
    pub fn new(family: Scheme, ks: impl IntoIterator<Item = u32>) -> Self {
        Self { family, ks: ks.into_iter().collect() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupSpec {
    pub kind: OpKind,
    pub width_a: u32,
    pub width_b: u32,
    pub families: Vec<FamilyRange>,
}

impl GroupSpec {
    pub fn key(&self) -> GroupKey {
        GroupKey::new(self.kind, self.width_a, self.width_b)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LibrarySpec {
    pub groups: Vec<GroupSpec>,
}

fn group(key: GroupKey, families: Vec<FamilyRange>) -> GroupSpec {
    let mut all = vec![FamilyRange::new(Scheme::Exact, [0])];
    all.extend(families);
    GroupSpec {
        kind: key.kind,
        width_a: key.width_a,
        width_b: key.width_b,
        families: all,
    }
}

impl LibrarySpec {
    /// The seven groups used by the bundled benchmarks.
    ///
    /// | group | families (k range) | count |
    /// |-------|--------------------|-------|
    /// | add8 | truncated 1-7, lower_or 1-8, lower_or_carry 1-8, set_one 1-7 | 31 |
    /// | add12 | truncated 1-6, lower_or 1-7, lower_or_carry 1-6, set_one 1-6 | 26 |
    /// | add16 | truncated, lower_or, lower_or_carry, set_one at k in {2,4,6,8,10} | 21 |
    /// | sub10 | truncated 1-6, lower_or 1-5 | 12 |
    /// | mul8 | truncated 1-6, broken_array 1-6, column_truncated 1-11, column_compensated 1-11 | 35 |
    /// | mul8x4 | truncated 1-3, broken_array 1-3, multiplicand_truncated 1-5, column_truncated 1-10, column_compensated 1-10 | 32 |
    /// | sqrt18 | iter_sqrt 1-6 | 7 |
    ///
    /// Counts include the exact unit of each group.
    pub fn default_spec() -> Self {
        use Scheme::*;
        let even = [2, 4, 6, 8, 10];
        LibrarySpec {
            groups: vec![
                group(
                    GroupKey::add(8),
                    vec![
                        FamilyRange::new(Truncated, 1..=7),
                        FamilyRange::new(LowerOr, 1..=8),
                        FamilyRange::new(LowerOrCarry, 1..=8),
                        FamilyRange::new(SetOne, 1..=7),
                    ],
                ),
                group(
                    GroupKey::add(12),
                    vec![
                        FamilyRange::new(Truncated, 1..=6),
                        FamilyRange::new(LowerOr, 1..=7),
                        FamilyRange::new(LowerOrCarry, 1..=6),
                        FamilyRange::new(SetOne, 1..=6),
                    ],
                ),
                group(
                    GroupKey::add(16),
                    vec![
                        FamilyRange::new(Truncated, even),
                        FamilyRange::new(LowerOr, even),
                        FamilyRange::new(LowerOrCarry, even),
                        FamilyRange::new(SetOne, even),
                    ],
                ),
                group(
                    GroupKey::sub(10),
                    vec![FamilyRange::new(Truncated, 1..=6), FamilyRange::new(LowerOr, 1..=5)],
                ),
                group(
                    GroupKey::mul(8, 8),
                    vec![
                        FamilyRange::new(Truncated, 1..=6),
                        FamilyRange::new(BrokenArray, 1..=6),
                        FamilyRange::new(ColumnTruncated, 1..=11),
                        FamilyRange::new(ColumnCompensated, 1..=11),
                    ],
                ),
                group(
                    GroupKey::mul(8, 4),
                    vec![
                        FamilyRange::new(Truncated, 1..=3),
                        FamilyRange::new(BrokenArray, 1..=3),
                        FamilyRange::new(MultiplicandTruncated, 1..=5),
                        FamilyRange::new(ColumnTruncated, 1..=10),
                        FamilyRange::new(ColumnCompensated, 1..=10),
                    ],
                ),
                group(GroupKey::sqrt(18), vec![FamilyRange::new(IterSqrt, 1..=6)]),
            ],
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// Validates the spec and instantiates uncharacterized candidates.
    ///
    /// `approx_level` is the rank of `k` within its (group, family), divided by
    /// the number of k values, so the largest `k` gets 1 and the exact unit 0.
    pub fn enumerate(&self) -> Result<Vec<UnitCandidate>> {
        let mut out = Vec::new();
        for g in &self.groups {
            let key = g.key();
            validate_widths(key)?;
            for fr in &g.families {
                if !fr.family.applies_to(g.kind) {
                    return Err(Error::InvalidSpec(format!(
                        "family {} does not apply to {}",
                        fr.family.as_str(),
                        key
                    )));
                }
                let mut ks = fr.ks.clone();
                ks.sort_unstable();
                ks.dedup();
                if ks.len() != fr.ks.len() {
                    return Err(Error::InvalidSpec(format!(
                        "repeated k in {} {}",
                        key,
                        fr.family.as_str()
                    )));
                }
                for (rank, &k) in ks.iter().enumerate() {
                    validate_k(key, fr.family, k)?;
                    let mut c = UnitCandidate::new(key, fr.family, k);
                    c.approx_level = if fr.family == Scheme::Exact {
                        0.0
                    } else {
                        (rank + 1) as f64 / ks.len() as f64
                    };
                    out.push(c);
                }
            }
        }
        Ok(out)
    }
}

fn validate_widths(key: GroupKey) -> Result<()> {
    let ok = match key.kind {
        OpKind::Sqrt => (2..=32).contains(&key.width_a) && key.width_b == 0,
        _ => {
            (1..=32).contains(&key.width_a)
                && (1..=32).contains(&key.width_b)
                && (key.kind == OpKind::Mul || key.width_a == key.width_b)
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("unsupported widths for {key}")))
    }
}

fn validate_k(key: GroupKey, family: Scheme, k: u32) -> Result<()> {
    let max = match family {
        Scheme::Exact => 0,
        Scheme::Truncated => match key.kind {
            OpKind::Mul => key.width_a.min(key.width_b) - 1,
            _ => key.width_a - 1,
        },
        Scheme::LowerOr | Scheme::LowerOrCarry => key.width_a,
        Scheme::SetOne => key.width_a - 1,
        Scheme::BrokenArray => key.width_b - 1,
        Scheme::MultiplicandTruncated => key.width_a - 1,
        Scheme::ColumnTruncated | Scheme::ColumnCompensated => key.width_a + key.width_b - 2,
        Scheme::IterSqrt => key.width_a.div_ceil(2) - 1,
    };
    let min = if family == Scheme::Exact { 0 } else { 1 };
    if (min..=max).contains(&k) {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!(
            "k={k} outside {min}..={max} for {key} {}",
            family.as_str()
        )))
    }
}
