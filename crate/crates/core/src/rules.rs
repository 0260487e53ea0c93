//! Update rules. A rule looks at the set of currently positive neighbours of
//! its vertex and answers with the vertex's next opinion. Threshold and
//! anti-threshold rules compare the count against a cutoff, count-set rules
//! accept an arbitrary set of counts, and subset-system rules accept an
//! arbitrary family of neighbour subsets. Everything narrower is a special
//! case of everything wider, which the tests lean on.

use thiserror::Error;

use crate::Opinion;

/// Count-based enumeration stops at this neighbourhood size (2^(d+1) rules).
pub const COUNT_ENUM_MAX_DEGREE: u32 = 30;

/// Full subset-system enumeration stops here (2^(2^d) rules).
pub const FULL_ENUM_MAX_DEGREE: u32 = 3;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RuleError {
    #[error("threshold {r} out of range 0..={} for degree {deg}", deg + 1)]
    ThresholdOutOfRange { r: u32, deg: u32 },
    #[error("count {c} can never occur in a neighbourhood of size {deg}")]
    CountOutOfRange { c: u32, deg: u32 },
    #[error("accepted count {0} exceeds the representation limit 63")]
    CountUnrepresentable(u32),
    #[error("accepted subset {subset:#x} is not contained in the neighbourhood {neighborhood:#x}")]
    SubsetNotInNeighborhood { subset: u32, neighborhood: u32 },
    #[error("active set {active:#x} is not contained in the neighbourhood {neighborhood:#x}")]
    ActiveOutsideNeighborhood { active: u32, neighborhood: u32 },
    #[error("degree {deg} exceeds the enumeration cap {cap}")]
    EnumerationTooLarge { deg: u32, cap: u32 },
}

/// Set of accepted active-neighbour counts, kept as a bitmask over 0..=63.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct CountSet(u64);

impl CountSet {
    pub fn from_counts<I: IntoIterator<Item = u32>>(counts: I) -> Result<CountSet, RuleError> {
        let mut mask = 0u64;
        for c in counts {
            if c > 63 {
                return Err(RuleError::CountUnrepresentable(c));
            }
            mask |= 1 << c;
        }
        Ok(CountSet(mask))
    }

    /// Raw accepted-count mask; bit c set means a count of c fires.
    pub fn from_mask(mask: u64) -> CountSet {
        CountSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    #[inline(always)]
    pub fn contains(self, count: u32) -> bool {
        count < 64 && self.0 >> count & 1 == 1
    }

    pub fn counts(self) -> impl Iterator<Item = u32> {
        (0..64).filter(move |&c| self.contains(c))
    }

    pub fn max_count(self) -> Option<u32> {
        (self.0 != 0).then(|| 63 - self.0.leading_zeros())
    }
}

/// Family of accepted neighbour subsets, each a vertex bitmask. Stored sorted
/// so equal families compare equal regardless of construction order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SubsetSystem {
    accepted: Vec<u32>,
}

impl SubsetSystem {
    pub fn new<I: IntoIterator<Item = u32>>(subsets: I) -> SubsetSystem {
        let mut accepted: Vec<u32> = subsets.into_iter().collect();
        accepted.sort_unstable();
        accepted.dedup();
        SubsetSystem { accepted }
    }

    #[inline]
    pub fn accepts(&self, active: u32) -> bool {
        self.accepted.binary_search(&active).is_ok()
    }

    pub fn subsets(&self) -> &[u32] {
        &self.accepted
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Rule {
    /// Positive iff at least this many neighbours are positive.
    Threshold(u32),
    /// Positive iff strictly fewer than this many neighbours are positive.
    AntiThreshold(u32),
    /// Positive iff the positive-neighbour count lies in the set.
    CountSet(CountSet),
    /// Positive iff the positive-neighbour set itself is accepted.
    SubsetSystem(SubsetSystem),
}

impl Rule {
    /// Next opinion given the active-neighbour set. Callers guarantee
    /// `active` is a subset of the vertex's neighbourhood; [`Rule::eval`]
    /// is the checked form.
    #[inline(always)]
    pub fn holds(&self, active: u32) -> bool {
        match self {
            Rule::Threshold(r) => active.count_ones() >= *r,
            Rule::AntiThreshold(r) => active.count_ones() < *r,
            Rule::CountSet(cs) => cs.contains(active.count_ones()),
            Rule::SubsetSystem(ss) => ss.accepts(active),
        }
    }

    pub fn eval(&self, active: u32, neighborhood: u32) -> Result<Opinion, RuleError> {
        if active & !neighborhood != 0 {
            return Err(RuleError::ActiveOutsideNeighborhood {
                active,
                neighborhood,
            });
        }
        Ok(Opinion::from_bool(self.holds(active)))
    }

    /// Checks the rule's parameters against the neighbourhood it will serve.
    pub fn validate_for(&self, neighborhood: u32) -> Result<(), RuleError> {
        let deg = neighborhood.count_ones();
        match self {
            Rule::Threshold(r) | Rule::AntiThreshold(r) => {
                if *r > deg + 1 {
                    return Err(RuleError::ThresholdOutOfRange { r: *r, deg });
                }
            }
            Rule::CountSet(cs) => {
                if let Some(c) = cs.max_count() {
                    if c > deg {
                        return Err(RuleError::CountOutOfRange { c, deg });
                    }
                }
            }
            Rule::SubsetSystem(ss) => {
                for &s in ss.subsets() {
                    if s & !neighborhood != 0 {
                        return Err(RuleError::SubsetNotInNeighborhood {
                            subset: s,
                            neighborhood,
                        });
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_threshold(&self) -> bool {
        matches!(self, Rule::Threshold(_))
    }

    /// Threshold cutoff if this is a plain threshold rule.
    pub fn threshold(&self) -> Option<u32> {
        match self {
            Rule::Threshold(r) => Some(*r),
            _ => None,
        }
    }
}

/// Strict-majority rule for the given neighbourhood size: positive iff more
/// than half the neighbours are positive, so an even split answers negative.
pub fn majority_rule(deg: u32) -> Rule {
    Rule::Threshold((deg + 2) / 2)
}

/// Pointwise negation of [`majority_rule`].
pub fn minority_rule(deg: u32) -> Rule {
    Rule::AntiThreshold((deg + 2) / 2)
}

/// Spreads the low bits of `index` onto the set bits of `mask`, in ascending
/// bit order. Maps a subset's rank-index to the subset itself.
pub fn spread_bits(index: u32, mask: u32) -> u32 {
    let mut out = 0u32;
    let mut rest = mask;
    let mut k = index;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        if k & 1 == 1 {
            out |= low;
        }
        k >>= 1;
        rest &= rest - 1;
    }
    out
}

/// Inverse of [`spread_bits`] for subsets of `mask`.
pub fn compress_bits(subset: u32, mask: u32) -> u32 {
    debug_assert_eq!(subset & !mask, 0);
    let mut out = 0u32;
    let mut rest = mask;
    let mut bit = 0;
    while rest != 0 {
        let low = rest & rest.wrapping_neg();
        if subset & low != 0 {
            out |= 1 << bit;
        }
        bit += 1;
        rest &= rest - 1;
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RuleEnumMode {
    /// Every count-set rule: 2^(deg+1) of them.
    CountBased,
    /// Every subset-system rule: 2^(2^deg) of them.
    FullSubsetSystems,
}

/// Enumerates every rule the distinguished vertex could follow over the given
/// neighbourhood, in a fixed order (accepted-set masks ascending). Count-based
/// mode is capped at degree 30, full mode at degree 3.
pub fn enumerate_v1_rules(
    neighborhood: u32,
    mode: RuleEnumMode,
) -> Result<Box<dyn Iterator<Item = Rule>>, RuleError> {
    let deg = neighborhood.count_ones();
    match mode {
        RuleEnumMode::CountBased => {
            if deg > COUNT_ENUM_MAX_DEGREE {
                return Err(RuleError::EnumerationTooLarge {
                    deg,
                    cap: COUNT_ENUM_MAX_DEGREE,
                });
            }
            let masks = 1u64 << (deg + 1);
            Ok(Box::new(
                (0..masks).map(|m| Rule::CountSet(CountSet::from_mask(m))),
            ))
        }
        RuleEnumMode::FullSubsetSystems => {
            if deg > FULL_ENUM_MAX_DEGREE {
                return Err(RuleError::EnumerationTooLarge {
                    deg,
                    cap: FULL_ENUM_MAX_DEGREE,
                });
            }
            let subsets = 1u32 << deg;
            let families = 1u64 << subsets;
            Ok(Box::new((0..families).map(move |f| {
                Rule::SubsetSystem(SubsetSystem::new(
                    (0..subsets)
                        .filter(move |&k| f >> k & 1 == 1)
                        .map(|k| spread_bits(k, neighborhood)),
                ))
            })))
        }
    }
}

/// All threshold rules legal for the given neighbourhood size, cutoff
/// ascending from 0 (always positive) to deg + 1 (never positive).
pub fn all_thresholds(deg: u32) -> impl Iterator<Item = Rule> {
    (0..=deg + 1).map(Rule::Threshold)
}

/// All anti-threshold rules for the given neighbourhood size.
pub fn all_anti_thresholds(deg: u32) -> impl Iterator<Item = Rule> {
    (0..=deg + 1).map(Rule::AntiThreshold)
}
