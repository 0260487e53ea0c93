//! Cycle structure of whole systems: spectra over every initial state,
//! classification of the distinguished vertex's opinion pattern around a
//! cycle, local window checks on recurrent cycles, parity behaviour of the
//! hub's neighbours, exhaustive family sweeps, and witness search.

mod neighbors;
mod pattern;
mod sweep;
mod windows;
mod witness;

pub use neighbors::{
    neighbor_parity_classes, xyz_monochromatic_violations, NeighborClasses, NeighborEntry, XyzSets,
};
pub use pattern::{classify_pattern, CyclePattern};
pub use sweep::{
    sample_dynamics, sample_periods, sweep_cycles, verify_pattern_periods, verify_period_set,
    verify_periods_absent, ConformistSource, CycleChecks, DynamicsReport, FamilySpec, GraphScope,
    HubRuleSource, LoopPolicy, SampleSpec, SweepCounterexample, SweepReport, SAMPLE_MAX_VERTICES,
};
pub use windows::{check_cycle_windows, WindowReport, WindowViolation};
pub use witness::{find_witness, WitnessOutcome, WitnessQuery};

use std::collections::BTreeMap;

use thiserror::Error;

use crate::engine::{successor_map, CycleReport, EngineError, State, SystemConfig};
use crate::Opinion;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("cannot classify an empty opinion sequence")]
    EmptySequence,
    #[error("vertex 0 does not follow an anti-threshold rule")]
    HubNotAntiThreshold,
    #[error(
        "two neighbours of vertex 0 are adjacent; parity classes need an independent neighbourhood"
    )]
    HubNeighborhoodNotIndependent,
    #[error("no parity rule fits neighbour {vertex} at parity {parity}")]
    NoRuleFits { vertex: usize, parity: usize },
    #[error("family spans n = {0} but exhaustive sweeps stop at {1}; sample instead")]
    SweepTooLarge(usize, usize),
    #[error("family vertex bounds are empty or start at zero")]
    EmptyFamily,
    #[error(transparent)]
    Engine(#[from] EngineError),
}

/// One recurrent cycle, states in temporal order starting from the smallest
/// state encoding on the cycle.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycleRecord {
    pub period: usize,
    pub states: Vec<State>,
    pub c_sequence: Vec<Opinion>,
}

impl CycleRecord {
    pub fn to_report(&self) -> CycleReport {
        CycleReport {
            transient: 0,
            period: self.period,
            cycle: self.states.clone(),
            c_sequence: self.c_sequence.clone(),
        }
    }
}

/// Eventual periods over every initial state of a system.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PeriodSpectrum {
    pub state_count: u64,
    /// Number of initial states falling into each period.
    pub counts: BTreeMap<usize, u64>,
    /// Distinct recurrent cycles, ordered by smallest member state.
    pub cycles: Vec<CycleRecord>,
}

/// Functional-graph scratch shared across many successor tables so sweep
/// loops allocate nothing per config. Trip stamps are monotone, so `mark`
/// never needs clearing.
pub(crate) struct Scratch {
    mark: Vec<u64>,
    pos: Vec<u32>,
    period_of: Vec<u32>,
    path: Vec<u32>,
    trip: u64,
}

pub(crate) struct CycleSlice {
    pub min_state: u32,
    pub period: u32,
    /// Offset into `flat_states`; the slice runs for `period` entries and
    /// starts at `min_state`.
    pub flat_start: u32,
}

impl Scratch {
    pub(crate) fn new() -> Scratch {
        Scratch {
            mark: Vec::new(),
            pos: Vec::new(),
            period_of: Vec::new(),
            path: Vec::new(),
            trip: 0,
        }
    }

    pub(crate) fn period_of(&self) -> &[u32] {
        &self.period_of
    }

    /// Decomposes one successor table: fills `period_of` for every state and
    /// returns the distinct cycles, each flattened into `flat_states`
    /// starting at its smallest state.
    pub(crate) fn decompose(
        &mut self,
        succ: &[u32],
        cycles: &mut Vec<CycleSlice>,
        flat_states: &mut Vec<u32>,
    ) {
        let size = succ.len();
        if self.mark.len() < size {
            self.mark.resize(size, 0);
            self.pos.resize(size, 0);
            self.period_of.resize(size, 0);
        }
        self.period_of[..size].fill(0);
        cycles.clear();
        flat_states.clear();
        for s0 in 0..size as u32 {
            if self.period_of[s0 as usize] != 0 {
                continue;
            }
            self.trip += 1;
            self.path.clear();
            let mut cur = s0;
            while self.period_of[cur as usize] == 0 && self.mark[cur as usize] != self.trip {
                self.mark[cur as usize] = self.trip;
                self.pos[cur as usize] = self.path.len() as u32;
                self.path.push(cur);
                cur = succ[cur as usize];
            }
            let period = if self.period_of[cur as usize] != 0 {
                self.period_of[cur as usize]
            } else {
                let start = self.pos[cur as usize] as usize;
                let period = (self.path.len() - start) as u32;
                let cycle = &self.path[start..];
                let min_idx = (0..cycle.len())
                    .min_by_key(|&i| cycle[i])
                    .expect("nonempty");
                let flat_start = flat_states.len() as u32;
                for i in 0..cycle.len() {
                    flat_states.push(cycle[(min_idx + i) % cycle.len()]);
                }
                cycles.push(CycleSlice {
                    min_state: cycle[min_idx],
                    period,
                    flat_start,
                });
                period
            };
            for &s in &self.path {
                self.period_of[s as usize] = period;
            }
        }
        cycles.sort_unstable_by_key(|c| c.min_state);
    }
}

/// Spectrum over all 2^n initial states, via the full successor table.
pub fn period_spectrum(cfg: &SystemConfig) -> Result<PeriodSpectrum, AnalysisError> {
    let map = successor_map(cfg)?;
    let mut scratch = Scratch::new();
    let mut slices = Vec::new();
    let mut flat = Vec::new();
    scratch.decompose(map.table(), &mut slices, &mut flat);
    let mut counts: BTreeMap<usize, u64> = BTreeMap::new();
    for &p in &scratch.period_of()[..map.state_count()] {
        *counts.entry(p as usize).or_insert(0) += 1;
    }
    let cycles = slices
        .iter()
        .map(|slice| {
            let states: Vec<State> = (0..slice.period)
                .map(|i| State(flat[(slice.flat_start + i) as usize]))
                .collect();
            let c_sequence = states.iter().map(|s| s.opinion(0)).collect();
            CycleRecord {
                period: slice.period as usize,
                states,
                c_sequence,
            }
        })
        .collect();
    Ok(PeriodSpectrum {
        state_count: map.state_count() as u64,
        counts,
        cycles,
    })
}
