//! Parity behaviour of the hub's neighbours on a recurrent cycle. When no
//! two neighbours of vertex 0 are adjacent, every neighbour settles into one
//! of five behaviours at each parity: always positive (1), loop-OR (2),
//! copy-the-hub (3), loop-AND (4), or never positive (5). Rules 2 and 4 need
//! a loop on the neighbour, rule 3 needs its absence. Several behaviours can
//! fit one neighbour at once (a constant neighbour with a loop fits 1 and 2,
//! say); the report keeps the full fit set and the first fit as canonical.
//!
//! The derived sets X, Y, Z group neighbours by fit combinations across the
//! two parities. On cycles where the hub is neither constant nor
//! alternating, each of those sets holds one opinion in every cycle state.

use crate::engine::{CycleReport, SystemConfig};

use super::AnalysisError;

pub const RULE_COUNT: usize = 5;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct NeighborEntry {
    pub vertex: usize,
    /// `fits[parity][k]` says behaviour k+1 holds at every cycle position of
    /// that parity.
    pub fits: [[bool; RULE_COUNT]; 2],
    /// Lowest-numbered fitting behaviour per parity, 1-based.
    pub chosen: [u8; 2],
}

impl NeighborEntry {
    pub fn fits_rule(&self, parity: usize, rule: usize) -> bool {
        self.fits[parity][rule - 1]
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct NeighborClasses {
    /// True when the cycle had odd length and was walked twice to make
    /// parities line up.
    pub doubled: bool,
    /// Cycle length after any doubling.
    pub span: usize,
    pub entries: Vec<NeighborEntry>,
}

/// Neighbour groups derived from fit combinations, as vertex bitmasks
/// indexed by parity j: X wants loop-OR at j and loop-AND opposite, Z is X
/// with the parities swapped, and Y collects the three combinations that
/// pin the neighbour to the hub's previous opinion.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct XyzSets {
    pub x: [u32; 2],
    pub y: [u32; 2],
    pub z: [u32; 2],
}

impl NeighborClasses {
    pub fn xyz_sets(&self) -> XyzSets {
        let mut x = [0u32; 2];
        let mut y = [0u32; 2];
        let mut z = [0u32; 2];
        for e in &self.entries {
            let bit = 1u32 << e.vertex;
            for j in 0..2 {
                let o = 1 - j;
                if e.fits_rule(j, 2) && e.fits_rule(o, 4) {
                    x[j] |= bit;
                }
                if e.fits_rule(j, 4) && e.fits_rule(o, 2) {
                    z[j] |= bit;
                }
                if e.fits_rule(j, 3)
                    || (e.fits_rule(j, 2) && e.fits_rule(o, 5))
                    || (e.fits_rule(j, 4) && e.fits_rule(o, 1))
                {
                    y[j] |= bit;
                }
            }
        }
        XyzSets { x, y, z }
    }
}

/// Classifies every hub neighbour at both parities over the cycle. Requires
/// an independent hub neighbourhood; an odd cycle is doubled first. A
/// neighbour fitting nothing at some parity is an error worth shouting
/// about, not a report entry.
pub fn neighbor_parity_classes(
    cfg: &SystemConfig,
    report: &CycleReport,
) -> Result<NeighborClasses, AnalysisError> {
    if !cfg.graph().v1_neighborhood_independent() {
        return Err(AnalysisError::HubNeighborhoodNotIndependent);
    }
    let p = report.cycle.len();
    let doubled = p % 2 == 1;
    let span = if doubled { 2 * p } else { p };
    let in_u = |v: usize, j: usize| report.cycle[j % p].plus_mask() >> v & 1 == 1;

    let mut entries = Vec::new();
    let mut nb = cfg.graph().v1_neighbors();
    while nb != 0 {
        let v = nb.trailing_zeros() as usize;
        nb &= nb - 1;
        let has_loop = cfg.graph().has_loop(v);
        let mut fits = [[false; RULE_COUNT]; 2];
        for parity in 0..2 {
            let positions = (0..span).filter(|j| j % 2 == parity);
            let mut ok = [true; RULE_COUNT];
            ok[1] = has_loop;
            ok[2] = !has_loop;
            ok[3] = has_loop;
            for j in positions {
                let now = in_u(v, j);
                let prev_hub = in_u(0, (j + span - 1) % span);
                let prev_self = in_u(v, (j + span - 1) % span);
                ok[0] &= now;
                ok[1] &= now == (prev_hub || prev_self);
                ok[2] &= now == prev_hub;
                ok[3] &= now == (prev_hub && prev_self);
                ok[4] &= !now;
            }
            fits[parity] = ok;
        }
        let mut chosen = [0u8; 2];
        for parity in 0..2 {
            match fits[parity].iter().position(|&b| b) {
                Some(k) => chosen[parity] = (k + 1) as u8,
                None => return Err(AnalysisError::NoRuleFits { vertex: v, parity }),
            }
        }
        entries.push(NeighborEntry {
            vertex: v,
            fits,
            chosen,
        });
    }
    Ok(NeighborClasses {
        doubled,
        span,
        entries,
    })
}

/// Positions where a derived set shows both opinions at once. Callers skip
/// cycles whose hub sequence is constant or alternating; the grouping is
/// only meaningful outside those.
pub fn xyz_monochromatic_violations(
    report: &CycleReport,
    classes: &NeighborClasses,
) -> Vec<(&'static str, usize, usize)> {
    let sets = classes.xyz_sets();
    let named: [(&'static str, &[u32; 2]); 3] = [("x", &sets.x), ("y", &sets.y), ("z", &sets.z)];
    let p = report.cycle.len();
    let mut out = Vec::new();
    for (name, per_parity) in named {
        for (j, &mask) in per_parity.iter().enumerate() {
            if mask == 0 {
                continue;
            }
            for t in 0..p {
                let inside = report.cycle[t].plus_mask() & mask;
                if inside != 0 && inside != mask {
                    out.push((name, j, t));
                }
            }
        }
    }
    out
}
