//! The dynamics themselves. A state packs one opinion bit per vertex (bit v
//! set means vertex v is positive); one synchronous step evaluates every
//! vertex's rule against its positive neighbours in the current state.
//! Trajectories on at most 32 vertices are walked with a first-visit map;
//! systems on at most 24 vertices additionally admit a full successor table
//! over all 2^n states.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::Graph;
use crate::rules::{Rule, RuleError};
use crate::Opinion;

/// Full successor tables over 2^n states stop here (64 MiB of u32 at 24).
pub const TABLE_MAX_VERTICES: usize = 24;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EngineError {
    #[error("{got} rules supplied for {want} vertices")]
    RuleCountMismatch { got: usize, want: usize },
    #[error("rule at vertex {vertex} does not fit its neighbourhood: {source}")]
    RuleInvalid { vertex: usize, source: RuleError },
    #[error("state {0:#x} has opinion bits beyond the {1} vertices")]
    StateOutOfRange(u32, usize),
    #[error("state string {0:?} is not {1} characters of '+' and '-'")]
    BadStateString(String, usize),
    #[error("no cycle closed within the step cap {0}")]
    CapExhausted(u64),
    #[error("successor table over n = {0} exceeds the n <= {TABLE_MAX_VERTICES} guard")]
    TableTooLarge(usize),
}

/// One opinion per vertex, packed. Bit v set means vertex v holds `Plus`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct State(pub u32);

impl State {
    pub fn opinion(self, v: usize) -> Opinion {
        Opinion::from_bool(self.0 >> v & 1 == 1)
    }

    /// Bitmask of positive vertices.
    #[inline(always)]
    pub fn plus_mask(self) -> u32 {
        self.0
    }

    /// Positive vertices with the distinguished vertex 0 masked out.
    #[inline(always)]
    pub fn conformist_plus_mask(self) -> u32 {
        self.0 & !1
    }

    /// Parses a string of '+' and '-', one character per vertex, vertex 0
    /// first.
    pub fn parse(s: &str, n: usize) -> Result<State, EngineError> {
        let mut bits = 0u32;
        let mut len = 0usize;
        for (i, ch) in s.chars().enumerate() {
            match ch {
                '+' if i < n => bits |= 1 << i,
                '+' | '-' => {}
                _ => return Err(EngineError::BadStateString(s.to_string(), n)),
            }
            len += 1;
        }
        if len != n {
            return Err(EngineError::BadStateString(s.to_string(), n));
        }
        Ok(State(bits))
    }

    pub fn render(self, n: usize) -> String {
        (0..n).map(|v| self.opinion(v).as_char()).collect()
    }
}

/// A graph together with one update rule per vertex. Construction validates
/// every rule against its vertex's neighbourhood, so a config that exists can
/// always be stepped.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SystemConfig {
    graph: Graph,
    rules: Vec<Rule>,
}

impl SystemConfig {
    pub fn new(graph: Graph, rules: Vec<Rule>) -> Result<SystemConfig, EngineError> {
        if rules.len() != graph.n() {
            return Err(EngineError::RuleCountMismatch {
                got: rules.len(),
                want: graph.n(),
            });
        }
        for (v, rule) in rules.iter().enumerate() {
            rule.validate_for(graph.neighbor_mask(v))
                .map_err(|source| EngineError::RuleInvalid { vertex: v, source })?;
        }
        Ok(SystemConfig { graph, rules })
    }

    /// Majority at every vertex, each cutoff sized to its own degree.
    pub fn all_majority(graph: Graph) -> SystemConfig {
        let rules = (0..graph.n())
            .map(|v| crate::rules::majority_rule(graph.degree(v)))
            .collect();
        SystemConfig::new(graph, rules).expect("majority always fits")
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn n(&self) -> usize {
        self.graph.n()
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, v: usize) -> &Rule {
        &self.rules[v]
    }

    /// True when every vertex other than 0 follows a plain threshold rule,
    /// the regime all the settlement machinery assumes.
    pub fn threshold_conformists(&self) -> bool {
        self.rules.iter().skip(1).all(Rule::is_threshold)
    }

    pub fn check_state(&self, s: State) -> Result<(), EngineError> {
        if self.n() < 32 && s.0 >> self.n() != 0 {
            return Err(EngineError::StateOutOfRange(s.0, self.n()));
        }
        Ok(())
    }
}

/// One synchronous update of every vertex.
pub fn step(cfg: &SystemConfig, s: State) -> State {
    let mut next = 0u32;
    for v in 0..cfg.n() {
        let active = cfg.graph.neighbor_mask(v) & s.0;
        if cfg.rules[v].holds(active) {
            next |= 1 << v;
        }
    }
    State(next)
}

/// Eventual cycle of one trajectory.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct CycleReport {
    /// Steps taken before the first recurrent state.
    pub transient: usize,
    pub period: usize,
    /// The cycle in temporal order, starting at the first recurrent state
    /// reached.
    pub cycle: Vec<State>,
    /// Vertex 0's opinion in each cycle state.
    pub c_sequence: Vec<Opinion>,
}

impl CycleReport {
    pub fn state_at(&self, t: isize) -> State {
        let p = self.cycle.len() as isize;
        self.cycle[t.rem_euclid(p) as usize]
    }
}

/// Walks the trajectory from `start` until a state repeats. `cap` bounds the
/// number of steps; the default 2^n + 1 can never be hit, so only a caller
/// asking for less sees [`EngineError::CapExhausted`].
pub fn run_to_cycle(
    cfg: &SystemConfig,
    start: State,
    cap: Option<u64>,
) -> Result<CycleReport, EngineError> {
    cfg.check_state(start)?;
    let cap = cap.unwrap_or_else(|| (1u64 << cfg.n().min(32)) + 1);
    let mut first_seen: HashMap<u32, usize> = HashMap::new();
    let mut path: Vec<State> = Vec::new();
    let mut cur = start;
    loop {
        if let Some(&t0) = first_seen.get(&cur.0) {
            let period = path.len() - t0;
            let cycle = path[t0..].to_vec();
            let c_sequence = cycle.iter().map(|s| s.opinion(0)).collect();
            return Ok(CycleReport {
                transient: t0,
                period,
                cycle,
                c_sequence,
            });
        }
        if path.len() as u64 >= cap {
            return Err(EngineError::CapExhausted(cap));
        }
        first_seen.insert(cur.0, path.len());
        path.push(cur);
        cur = step(cfg, cur);
    }
}

/// Successor of every state at once, for spectra and recurrence analysis.
#[derive(Clone, Debug)]
pub struct SuccessorMap {
    n: usize,
    succ: Vec<u32>,
}

impl SuccessorMap {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn state_count(&self) -> usize {
        self.succ.len()
    }

    #[inline(always)]
    pub fn succ(&self, s: u32) -> u32 {
        self.succ[s as usize]
    }

    pub fn table(&self) -> &[u32] {
        &self.succ
    }

    /// Recurrent states, found by repeatedly peeling states no other state
    /// maps to. What survives is exactly the union of all cycles.
    pub fn recurrent(&self) -> Vec<bool> {
        let size = self.succ.len();
        let mut indeg = vec![0u32; size];
        for &t in &self.succ {
            indeg[t as usize] += 1;
        }
        let mut queue: Vec<u32> = (0..size as u32)
            .filter(|&s| indeg[s as usize] == 0)
            .collect();
        let mut alive = vec![true; size];
        while let Some(s) = queue.pop() {
            alive[s as usize] = false;
            let t = self.succ[s as usize] as usize;
            indeg[t] -= 1;
            if indeg[t] == 0 {
                queue.push(t as u32);
            }
        }
        alive
    }
}

pub fn successor_map(cfg: &SystemConfig) -> Result<SuccessorMap, EngineError> {
    let n = cfg.n();
    if n > TABLE_MAX_VERTICES {
        return Err(EngineError::TableTooLarge(n));
    }
    let succ = (0..1u32 << n).map(|s| step(cfg, State(s)).0).collect();
    Ok(SuccessorMap { n, succ })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph;
    use crate::rules::{majority_rule, minority_rule, CountSet};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn single_edge_contrarian() -> SystemConfig {
        SystemConfig::new(
            graph::single_edge(),
            vec![minority_rule(1), majority_rule(1)],
        )
        .unwrap()
    }

    // Hand truth table for the one-edge system: vertex 0 copies the negation
    // of vertex 1's previous opinion, vertex 1 copies vertex 0's.
    fn single_edge_oracle(s: u32) -> u32 {
        let v0 = s & 1;
        let v1 = s >> 1 & 1;
        (1 - v1) | (v0 << 1)
    }

    #[test]
    fn single_edge_matches_hand_table() {
        let cfg = single_edge_contrarian();
        for s in 0..4u32 {
            assert_eq!(
                step(&cfg, State(s)).0,
                single_edge_oracle(s),
                "state {s:02b}"
            );
        }
        assert_eq!(step(&cfg, State(0b11)), State(0b10));
    }

    #[test]
    fn single_edge_four_cycle() {
        let cfg = single_edge_contrarian();
        for s in 0..4u32 {
            let rep = run_to_cycle(&cfg, State(s), None).unwrap();
            assert_eq!(rep.transient, 0);
            assert_eq!(rep.period, 4);
        }
        let rep = run_to_cycle(&cfg, State(0b11), None).unwrap();
        let order: Vec<u32> = rep.cycle.iter().map(|s| s.0).collect();
        assert_eq!(order, vec![0b11, 0b10, 0b00, 0b01]);
        let c: Vec<i8> = rep.c_sequence.iter().map(|o| o.as_i8()).collect();
        assert_eq!(c, vec![1, -1, -1, 1]);
    }

    #[test]
    fn transient_is_counted() {
        // path 0-1-2, all majority; (+,-,-) falls into the all-minus fixed
        // point after one step
        let g = graph::Graph::build(3, &[(0, 1), (1, 2)], &[]).unwrap();
        let cfg = SystemConfig::all_majority(g);
        let rep = run_to_cycle(&cfg, State(0b001), None).unwrap();
        assert_eq!((rep.transient, rep.period), (1, 1));
        assert_eq!(rep.cycle, vec![State(0)]);
    }

    #[test]
    fn state_string_round_trip() {
        let s = State::parse("+-+", 3).unwrap();
        assert_eq!(s, State(0b101));
        assert_eq!(s.render(3), "+-+");
        assert!(State::parse("+-x", 3).is_err());
        assert!(State::parse("+-", 3).is_err());
    }

    #[test]
    fn config_validation() {
        let g = graph::single_edge();
        let err = SystemConfig::new(g.clone(), vec![majority_rule(1)]).unwrap_err();
        assert_eq!(err, EngineError::RuleCountMismatch { got: 1, want: 2 });
        let err =
            SystemConfig::new(g.clone(), vec![Rule::Threshold(3), majority_rule(1)]).unwrap_err();
        assert!(matches!(err, EngineError::RuleInvalid { vertex: 0, .. }));
        let cfg = SystemConfig::new(g, vec![Rule::Threshold(2), majority_rule(1)]).unwrap();
        assert!(cfg.threshold_conformists());
    }

    #[test]
    fn out_of_range_state_is_rejected() {
        let cfg = single_edge_contrarian();
        let err = run_to_cycle(&cfg, State(0b100), None).unwrap_err();
        assert_eq!(err, EngineError::StateOutOfRange(0b100, 2));
    }

    #[test]
    fn cap_exhaustion_reports() {
        let cfg = single_edge_contrarian();
        let err = run_to_cycle(&cfg, State(0b11), Some(2)).unwrap_err();
        assert_eq!(err, EngineError::CapExhausted(2));
    }

    fn random_threshold_config(rng: &mut ChaCha8Rng, n: usize) -> SystemConfig {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let g = graph::Graph::build(n, &edges, &[]).unwrap();
        let rules = (0..n)
            .map(|v| Rule::Threshold(rng.random_range(0..=g.degree(v) + 1)))
            .collect();
        SystemConfig::new(g, rules).unwrap()
    }

    #[test]
    fn pure_threshold_systems_settle_to_period_at_most_two() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xD15C0);
        for _ in 0..300 {
            let n = rng.random_range(1..=8);
            let cfg = random_threshold_config(&mut rng, n);
            let start = State(rng.random_range(0..1u32 << n));
            let rep = run_to_cycle(&cfg, start, None).unwrap();
            assert!(rep.period <= 2, "period {} on {:?}", rep.period, cfg);
        }
    }

    #[test]
    fn successor_table_agrees_with_step_and_recurrence() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5AB1E);
        for _ in 0..40 {
            let n = rng.random_range(1..=6);
            let cfg = random_threshold_config(&mut rng, n);
            let map = successor_map(&cfg).unwrap();
            let recurrent = map.recurrent();
            for s in 0..1u32 << n {
                assert_eq!(map.succ(s), step(&cfg, State(s)).0);
                let rep = run_to_cycle(&cfg, State(s), None).unwrap();
                assert_eq!(recurrent[s as usize], rep.transient == 0, "state {s:b}");
            }
        }
    }

    #[test]
    fn successor_table_guard() {
        let g = graph::Graph::build(25, &[(0, 1)], &[]).unwrap();
        let rules = (0..25).map(|v| majority_rule(g.degree(v))).collect();
        let cfg = SystemConfig::new(g, rules).unwrap();
        assert_eq!(
            successor_map(&cfg).unwrap_err(),
            EngineError::TableTooLarge(25)
        );
    }

    #[test]
    fn long_period_gadget_counts_to_five() {
        // k = 2 gadget, count rule {0,1,3,4} at the hub, majority elsewhere,
        // started from the hub plus one full triangle
        let g = graph::gk(2).unwrap();
        let mut rules = vec![Rule::CountSet(CountSet::from_counts([0, 1, 3, 4]).unwrap())];
        for v in 1..g.n() {
            rules.push(majority_rule(g.degree(v)));
        }
        let cfg = SystemConfig::new(g, rules).unwrap();
        let start = State(1 | 1 << 6 | 1 << 7 | 1 << 8);
        let rep = run_to_cycle(&cfg, start, None).unwrap();
        assert_eq!(rep.period, 5);
    }
}
