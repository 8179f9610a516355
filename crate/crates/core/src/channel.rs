//! Channel sets and contiguous channel blocks.
//!
//! Channels are numbered from 1. The PA tier uses channels 1..=10 and the
//! GAA tier 1..=15, so a `u16` mask with bit `c` for channel `c` covers both.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of PAL channels.
pub const PA_CHANNELS: u8 = 10;
/// Number of channels visible to GAA nodes.
pub const GAA_CHANNELS: u8 = 15;

#[derive(Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(from = "Vec<u8>", into = "Vec<u8>")]
pub struct ChannelSet {
    bits: u16,
}

impl ChannelSet {
    pub const EMPTY: ChannelSet = ChannelSet { bits: 0 };

    /// All channels `1..=max`.
    pub fn full(max: u8) -> Self {
        Self::range(1, max)
    }

    /// Channels `lo..=hi`; empty if `hi < lo`.
    pub fn range(lo: u8, hi: u8) -> Self {
        (lo..=hi).collect()
    }

    pub fn contains(&self, ch: u8) -> bool {
        ch < 16 && self.bits & (1 << ch) != 0
    }

    pub fn insert(&mut self, ch: u8) {
        assert!((1..16).contains(&ch), "channel {ch} out of range");
        self.bits |= 1 << ch;
    }

    pub fn remove(&mut self, ch: u8) {
        if ch < 16 {
            self.bits &= !(1 << ch);
        }
    }

    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    pub fn difference(&self, other: &ChannelSet) -> ChannelSet {
        ChannelSet {
            bits: self.bits & !other.bits,
        }
    }

    pub fn intersection(&self, other: &ChannelSet) -> ChannelSet {
        ChannelSet {
            bits: self.bits & other.bits,
        }
    }

    pub fn is_subset(&self, other: &ChannelSet) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn contains_block(&self, block: &ChannelBlock) -> bool {
        block.mask().is_subset(self)
    }

    pub fn iter(&self) -> impl Iterator<Item = u8> + '_ {
        (1..16u8).filter(move |&c| self.contains(c))
    }

    /// Highest channel present, if any.
    pub fn max_channel(&self) -> Option<u8> {
        (self.bits != 0).then(|| 15 - self.bits.leading_zeros() as u8)
    }
}

impl FromIterator<u8> for ChannelSet {
    fn from_iter<T: IntoIterator<Item = u8>>(iter: T) -> Self {
        let mut s = ChannelSet::EMPTY;
        for c in iter {
            s.insert(c);
        }
        s
    }
}

impl From<Vec<u8>> for ChannelSet {
    fn from(v: Vec<u8>) -> Self {
        v.into_iter().filter(|c| (1..16).contains(c)).collect()
    }
}

impl From<ChannelSet> for Vec<u8> {
    fn from(s: ChannelSet) -> Self {
        s.iter().collect()
    }
}

impl fmt::Debug for ChannelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

/// A run of contiguous channels `lo..lo+len`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ChannelBlock {
    pub lo: u8,
    pub len: u8,
}

impl ChannelBlock {
    /// Block `lo..lo+len` checked against the ground set `1..=max`.
    pub fn new(lo: u8, len: u8, max: u8) -> Result<Self> {
        if lo == 0 || len == 0 || lo as u16 + len as u16 - 1 > max as u16 {
            return Err(Error::InvalidBlock { lo, len, max });
        }
        Ok(ChannelBlock { lo, len })
    }

    pub fn hi(&self) -> u8 {
        self.lo + self.len - 1
    }

    pub fn mask(&self) -> ChannelSet {
        ChannelSet::range(self.lo, self.hi())
    }

    pub fn channels(&self) -> impl Iterator<Item = u8> {
        self.lo..=self.hi()
    }

    pub fn intersects(&self, other: &ChannelBlock) -> bool {
        self.lo <= other.hi() && other.lo <= self.hi()
    }

    /// Number of shared channels.
    pub fn overlap(&self, other: &ChannelBlock) -> u8 {
        let lo = self.lo.max(other.lo);
        let hi = self.hi().min(other.hi());
        if hi >= lo {
            hi - lo + 1
        } else {
            0
        }
    }

    /// Canonical order: length first, then lowest channel.
    pub fn canonical_key(&self) -> (u8, u8) {
        (self.len, self.lo)
    }
}

impl fmt::Debug for ChannelBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ChannelBlock {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.len == 1 {
            write!(f, "{{{}}}", self.lo)
        } else {
            write!(f, "{{{}-{}}}", self.lo, self.hi())
        }
    }
}
