//! The settlement potential. When every vertex except 0 follows a threshold
//! rule, each conformist i carries a weight s_i that is r_i - 1 when i is
//! adjacent to vertex 0 and r_i - 1/2 otherwise. Summing active-neighbour
//! counts against these weights gives a quantity z(t) that never decreases
//! along a trajectory, so once it stops moving the only vertices still able
//! to flip on the two-step clock are neighbours of vertex 0 sitting exactly
//! at their tipping count. Half-integers are kept doubled; nothing here
//! touches floating point.

use thiserror::Error;

use crate::engine::{step, CycleReport, EngineError, State, SystemConfig};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LyapunovError {
    #[error("vertex {0} does not follow a threshold rule; the potential is undefined")]
    NonThresholdConformist(usize),
    #[error("a trace needs at least 2 steps, got {0}")]
    TooFewSteps(usize),
    #[error(transparent)]
    BadStart(#[from] EngineError),
}

/// Doubled conformist weights 2*s_i, indexed by vertex; entry 0 is unused
/// and zero. Requires every vertex except 0 to follow a threshold rule.
pub fn s_vector(cfg: &SystemConfig) -> Result<Vec<i64>, LyapunovError> {
    let mut s2 = vec![0i64; cfg.n()];
    for v in 1..cfg.n() {
        let r = cfg
            .rule(v)
            .threshold()
            .ok_or(LyapunovError::NonThresholdConformist(v))? as i64;
        s2[v] = if cfg.graph().has_edge(0, v) {
            2 * r - 2
        } else {
            2 * r - 1
        };
    }
    Ok(s2)
}

/// Potential values at one time step. `x` counts adjacent pairs between the
/// current and previous positive conformist sets; `y2` and `z2` are doubled.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TraceEntry {
    pub t: usize,
    pub x: i64,
    pub y2: i64,
    pub z2: i64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Trace {
    /// Entries for t = 1 ..= steps-1.
    pub entries: Vec<TraceEntry>,
    /// First t from which z2 stays constant to the end of the trace.
    pub settlement_index: usize,
}

impl Trace {
    pub fn is_nondecreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].z2 <= w[1].z2)
    }
}

/// Conservative cap on 2*z for an n-vertex system.
pub fn z2_upper_bound(n: usize) -> i64 {
    let n = n as i64;
    2 * (n * n + 4 * n)
}

fn x_between(cfg: &SystemConfig, cur: u32, prev: u32) -> i64 {
    let cur_star = cur & !1;
    let prev_star = prev & !1;
    let mut x = 0i64;
    let mut rest = cur_star;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        x += (cfg.graph().neighbor_mask(v) & prev_star).count_ones() as i64;
    }
    x
}

fn y2_of(s2: &[i64], state: u32) -> i64 {
    let mut rest = state & !1;
    let mut y2 = 0i64;
    while rest != 0 {
        let v = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        y2 += s2[v];
    }
    y2
}

/// Runs `steps` updates from `start` and reports the potential at each
/// interior time. Needs `steps >= 2` for at least one entry.
pub fn trace(cfg: &SystemConfig, start: State, steps: usize) -> Result<Trace, LyapunovError> {
    if steps < 2 {
        return Err(LyapunovError::TooFewSteps(steps));
    }
    cfg.check_state(start)?;
    let s2 = s_vector(cfg)?;
    let mut states = Vec::with_capacity(steps + 1);
    states.push(start);
    for _ in 0..steps {
        states.push(step(cfg, *states.last().unwrap()));
    }
    let mut entries = Vec::with_capacity(steps - 1);
    for t in 1..steps {
        let x = x_between(cfg, states[t].0, states[t - 1].0);
        let y2 = y2_of(&s2, states[t].0);
        let y2_prev = y2_of(&s2, states[t - 1].0);
        entries.push(TraceEntry {
            t,
            x,
            y2,
            z2: 2 * x - y2 - y2_prev,
        });
    }
    let last_z2 = entries.last().unwrap().z2;
    let settlement_index = entries
        .iter()
        .rev()
        .take_while(|e| e.z2 == last_z2)
        .last()
        .unwrap()
        .t;
    Ok(Trace {
        entries,
        settlement_index,
    })
}

/// How a conformist flip on the two-step clock failed the settlement
/// conditions.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum FlipFault {
    /// The flipping vertex is not adjacent to vertex 0.
    NotHubNeighbor,
    /// Its positive-conformist-neighbour count is not exactly r - 1.
    OffTippingCount { count: u32, r: u32 },
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FlipViolation {
    /// Cycle position of the middle state.
    pub t: usize,
    pub vertex: usize,
    pub fault: FlipFault,
}

/// Checks every two-step conformist flip around a cycle: each must happen at
/// a neighbour of vertex 0 whose positive conformist neighbours at the middle
/// time number exactly r - 1. An empty result is the settled condition.
pub fn check_settled_flips(
    cfg: &SystemConfig,
    report: &CycleReport,
) -> Result<Vec<FlipViolation>, LyapunovError> {
    if !cfg.threshold_conformists() {
        let bad = (1..cfg.n())
            .find(|&v| cfg.rule(v).threshold().is_none())
            .unwrap_or(0);
        return Err(LyapunovError::NonThresholdConformist(bad));
    }
    let p = report.cycle.len();
    let mut violations = Vec::new();
    for t in 0..p {
        let prev = report.state_at(t as isize - 1).conformist_plus_mask();
        let mid = report.state_at(t as isize).conformist_plus_mask();
        let next = report.state_at(t as isize + 1).conformist_plus_mask();
        let mut flips = prev ^ next;
        while flips != 0 {
            let v = flips.trailing_zeros() as usize;
            flips &= flips - 1;
            if !cfg.graph().has_edge(0, v) {
                violations.push(FlipViolation {
                    t,
                    vertex: v,
                    fault: FlipFault::NotHubNeighbor,
                });
                continue;
            }
            let r = cfg.rule(v).threshold().expect("checked above");
            let count = (cfg.graph().neighbor_mask(v) & mid).count_ones();
            if r == 0 || count != r - 1 {
                violations.push(FlipViolation {
                    t,
                    vertex: v,
                    fault: FlipFault::OffTippingCount { count, r },
                });
            }
        }
    }
    Ok(violations)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_to_cycle, SystemConfig};
    use crate::graph::{self, Graph};
    use crate::rules::{majority_rule, minority_rule, CountSet, Rule};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn weights_depend_on_hub_adjacency() {
        // path 0-1-2: vertex 1 touches the hub, vertex 2 does not
        let g = Graph::build(3, &[(0, 1), (1, 2)], &[]).unwrap();
        let cfg = SystemConfig::new(
            g,
            vec![minority_rule(1), Rule::Threshold(1), Rule::Threshold(1)],
        )
        .unwrap();
        let s2 = s_vector(&cfg).unwrap();
        assert_eq!(s2, vec![0, 0, 1]);
    }

    #[test]
    fn non_threshold_conformist_is_refused() {
        let g = graph::single_edge();
        let cfg = SystemConfig::new(
            g,
            vec![
                minority_rule(1),
                Rule::CountSet(CountSet::from_counts([1]).unwrap()),
            ],
        )
        .unwrap();
        assert_eq!(
            s_vector(&cfg).unwrap_err(),
            LyapunovError::NonThresholdConformist(1)
        );
    }

    #[test]
    fn single_edge_trace_is_identically_zero() {
        let cfg = SystemConfig::new(
            graph::single_edge(),
            vec![minority_rule(1), majority_rule(1)],
        )
        .unwrap();
        let tr = trace(&cfg, State(0b11), 12).unwrap();
        assert_eq!(tr.entries.len(), 11);
        for e in &tr.entries {
            assert_eq!((e.x, e.y2, e.z2), (0, 0, 0), "t = {}", e.t);
        }
        assert_eq!(tr.settlement_index, 1);
        assert!(tr.is_nondecreasing());
    }

    #[test]
    fn settled_flips_on_the_single_edge_cycle() {
        let cfg = SystemConfig::new(
            graph::single_edge(),
            vec![minority_rule(1), majority_rule(1)],
        )
        .unwrap();
        let rep = run_to_cycle(&cfg, State(0b11), None).unwrap();
        assert_eq!(check_settled_flips(&cfg, &rep).unwrap(), vec![]);
    }

    #[test]
    fn trace_needs_two_steps() {
        let cfg = SystemConfig::new(
            graph::single_edge(),
            vec![minority_rule(1), majority_rule(1)],
        )
        .unwrap();
        assert_eq!(
            trace(&cfg, State(0), 1).unwrap_err(),
            LyapunovError::TooFewSteps(1)
        );
    }

    fn random_system(rng: &mut ChaCha8Rng, n: usize, loops: bool) -> SystemConfig {
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let mut loop_list = Vec::new();
        if loops {
            for v in 0..n {
                if rng.random_bool(0.3) {
                    loop_list.push(v);
                }
            }
        }
        let g = Graph::build(n, &edges, &loop_list).unwrap();
        let d0 = g.degree(0);
        let mut rules = vec![Rule::CountSet(CountSet::from_mask(
            rng.random_range(0..1u64 << (d0 + 1)),
        ))];
        for v in 1..n {
            rules.push(Rule::Threshold(rng.random_range(0..=g.degree(v) + 1)));
        }
        SystemConfig::new(g, rules).unwrap()
    }

    #[test]
    fn z_never_decreases_and_cycles_are_settled() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x2E77A);
        for _ in 0..400 {
            let n = rng.random_range(2..=6);
            let loops = rng.random_bool(0.5);
            let cfg = random_system(&mut rng, n, loops);
            let start = State(rng.random_range(0..1u32 << n));
            let rep = run_to_cycle(&cfg, start, None).unwrap();
            let steps = rep.transient + 2 * rep.period + 2;
            let tr = trace(&cfg, start, steps).unwrap();
            assert!(tr.is_nondecreasing(), "{cfg:?} from {start:?}");
            let bound = z2_upper_bound(n);
            for e in &tr.entries {
                assert!(e.z2 <= bound, "z2 {} above bound {bound}", e.z2);
            }
            assert_eq!(
                check_settled_flips(&cfg, &rep).unwrap(),
                vec![],
                "{cfg:?} from {start:?}"
            );
        }
    }

    #[test]
    fn settlement_index_lands_after_the_last_change() {
        // hub with two pendants, all-threshold; climb from all-minus start
        let g = Graph::build(4, &[(0, 1), (0, 2), (1, 3)], &[]).unwrap();
        let cfg = SystemConfig::new(
            g,
            vec![
                Rule::Threshold(0),
                Rule::Threshold(1),
                Rule::Threshold(1),
                Rule::Threshold(1),
            ],
        )
        .unwrap();
        let tr = trace(&cfg, State(0), 10).unwrap();
        assert!(tr.is_nondecreasing());
        let si = tr.settlement_index;
        let z_at = |t: usize| tr.entries.iter().find(|e| e.t == t).unwrap().z2;
        assert!(tr.entries.iter().all(|e| e.t < si || e.z2 == z_at(si)));
        if si > 1 {
            assert_ne!(z_at(si - 1), z_at(si));
        }
    }
}
