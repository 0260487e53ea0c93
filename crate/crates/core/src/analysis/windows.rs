//! Local consequences of an anti-threshold hub, checked around a recurrent
//! cycle. Each check watches for a short pattern in the hub's opinions
//! (written in units of a sign x, so every check runs for x = + and x = -)
//! and asserts what must follow: a repeated conformist profile, a forced
//! later hub opinion, a containment between conformist profiles, or a loop
//! on the hub itself. All of it is exact on a cycle; a violation means the
//! system outright contradicts the theory and is always worth surfacing.

use crate::engine::{CycleReport, SystemConfig};
use crate::Opinion;

use super::AnalysisError;

/// What a matched window forces.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Consequence {
    /// Conformist profiles at t+a and t+b agree.
    StarEqual(isize, isize),
    /// Conformist profile at t+a is contained in t+b when x = +, and
    /// contains it when x = -.
    StarNested(isize, isize),
    /// Whole states at t+a and t+b agree.
    FullEqual(isize, isize),
    /// Hub opinion at t+a is -x.
    HubCapped(isize),
    /// The hub carries a loop.
    HubLoop,
}

struct WindowCheck {
    name: &'static str,
    /// Hub opinions demanded at t + offset, in units of x (1 = x, -1 = -x).
    window: &'static [(isize, i8)],
    consequence: Consequence,
}

static CHECKS: &[WindowCheck] = &[
    WindowCheck {
        name: "flip_back_repeats_star",
        window: &[(0, 1), (1, -1), (2, 1)],
        consequence: Consequence::StarEqual(1, 3),
    },
    WindowCheck {
        name: "double_flip_needs_hub_loop",
        window: &[(0, 1), (1, -1), (2, 1), (3, 1), (4, -1)],
        consequence: Consequence::HubLoop,
    },
    WindowCheck {
        name: "run_of_three_nests_star",
        window: &[(1, -1), (2, 1), (3, 1)],
        consequence: Consequence::StarNested(0, 4),
    },
    WindowCheck {
        name: "run_of_four_caps_next",
        window: &[(1, -1), (2, 1), (3, 1), (4, 1)],
        consequence: Consequence::HubCapped(5),
    },
    WindowCheck {
        name: "swing_repeats_state",
        window: &[(1, -1), (2, 1), (3, 1), (4, -1), (5, 1)],
        consequence: Consequence::FullEqual(0, 6),
    },
    WindowCheck {
        name: "long_window_caps_next",
        window: &[
            (1, -1),
            (2, 1),
            (3, 1),
            (4, 1),
            (5, -1),
            (6, -1),
            (7, 1),
            (8, 1),
            (9, 1),
            (10, -1),
        ],
        consequence: Consequence::HubCapped(11),
    },
];

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WindowViolation {
    pub check: &'static str,
    /// Cycle position the window is anchored at.
    pub t: usize,
    pub x: Opinion,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WindowReport {
    /// Matches per check, in the fixed check order.
    pub matches: Vec<(&'static str, usize)>,
    pub violations: Vec<WindowViolation>,
}

impl WindowReport {
    pub fn total_matches(&self) -> usize {
        self.matches.iter().map(|&(_, c)| c).sum()
    }
}

/// Runs every window check at every cycle position and both signs of x.
/// The hub must follow an anti-threshold rule; the cycle supplies the
/// recurrence the checks assume.
pub fn check_cycle_windows(
    cfg: &SystemConfig,
    report: &CycleReport,
) -> Result<WindowReport, AnalysisError> {
    if !matches!(cfg.rule(0), crate::rules::Rule::AntiThreshold(_)) {
        return Err(AnalysisError::HubNotAntiThreshold);
    }
    let p = report.cycle.len() as isize;
    let c_at = |t: isize| report.cycle[t.rem_euclid(p) as usize].opinion(0);
    let star = |t: isize| report.cycle[t.rem_euclid(p) as usize].conformist_plus_mask();
    let full = |t: isize| report.cycle[t.rem_euclid(p) as usize].plus_mask();

    let mut matches = Vec::with_capacity(CHECKS.len());
    let mut violations = Vec::new();
    for check in CHECKS {
        let mut count = 0usize;
        for t in 0..p {
            for x in [Opinion::Plus, Opinion::Minus] {
                let fits = check
                    .window
                    .iter()
                    .all(|&(off, sign)| c_at(t + off) == if sign > 0 { x } else { x.flip() });
                if !fits {
                    continue;
                }
                count += 1;
                let holds = match check.consequence {
                    Consequence::StarEqual(a, b) => star(t + a) == star(t + b),
                    Consequence::StarNested(a, b) => {
                        let (lo, hi) = (star(t + a), star(t + b));
                        match x {
                            Opinion::Plus => lo & !hi == 0,
                            Opinion::Minus => hi & !lo == 0,
                        }
                    }
                    Consequence::FullEqual(a, b) => full(t + a) == full(t + b),
                    Consequence::HubCapped(a) => c_at(t + a) == x.flip(),
                    Consequence::HubLoop => cfg.graph().has_loop(0),
                };
                if !holds {
                    violations.push(WindowViolation {
                        check: check.name,
                        t: t as usize,
                        x,
                    });
                }
            }
        }
        matches.push((check.name, count));
    }
    Ok(WindowReport {
        matches,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run_to_cycle, State, SystemConfig};
    use crate::graph::{self, Graph};
    use crate::rules::{majority_rule, minority_rule, Rule};

    #[test]
    fn non_anti_hub_is_refused() {
        let cfg = SystemConfig::all_majority(graph::single_edge());
        let rep = run_to_cycle(&cfg, State(0), None).unwrap();
        assert_eq!(
            check_cycle_windows(&cfg, &rep).unwrap_err(),
            AnalysisError::HubNotAntiThreshold
        );
    }

    #[test]
    fn one_edge_cycle_matches_only_the_nesting_window() {
        let cfg = SystemConfig::new(
            graph::single_edge(),
            vec![minority_rule(1), majority_rule(1)],
        )
        .unwrap();
        let rep = run_to_cycle(&cfg, State(0b11), None).unwrap();
        let win = check_cycle_windows(&cfg, &rep).unwrap();
        assert_eq!(win.violations, vec![]);
        let by_name: std::collections::HashMap<_, _> = win.matches.iter().copied().collect();
        assert_eq!(by_name["run_of_three_nests_star"], 2);
        assert_eq!(win.total_matches(), 2);
    }

    #[test]
    fn period_three_loop_system_matches_cleanly() {
        // hub with a loop plus one follower; the hub fires on fewer than two
        // positives, the follower copies the hub
        let g = Graph::build(2, &[(0, 1)], &[0]).unwrap();
        let cfg = SystemConfig::new(g, vec![Rule::AntiThreshold(2), Rule::Threshold(1)]).unwrap();
        let rep = run_to_cycle(&cfg, State(0b01), None).unwrap();
        assert_eq!(rep.period, 3);
        let win = check_cycle_windows(&cfg, &rep).unwrap();
        assert_eq!(win.violations, vec![]);
    }

    #[test]
    fn exhaustive_small_systems_never_violate() {
        // every graph on up to 3 vertices with loops, every anti-threshold
        // hub, every conformist threshold assignment, every cycle
        let mut checked = 0usize;
        for n in 1..=3usize {
            for g in graph::enumerate_graphs(n, true).unwrap() {
                let d0 = g.degree(0);
                for r0 in 0..=d0 + 1 {
                    let mut assignments: Vec<Vec<Rule>> = vec![vec![Rule::AntiThreshold(r0)]];
                    for v in 1..n {
                        let dv = g.degree(v);
                        assignments = assignments
                            .into_iter()
                            .flat_map(|base| {
                                (0..=dv + 1).map(move |r| {
                                    let mut rules = base.clone();
                                    rules.push(Rule::Threshold(r));
                                    rules
                                })
                            })
                            .collect();
                    }
                    for rules in assignments {
                        let cfg = SystemConfig::new(g.clone(), rules).unwrap();
                        let spectrum = super::super::period_spectrum(&cfg).unwrap();
                        for cycle in &spectrum.cycles {
                            let win = check_cycle_windows(&cfg, &cycle.to_report()).unwrap();
                            assert_eq!(win.violations, vec![], "{cfg:?} cycle {cycle:?}");
                            checked += 1;
                        }
                    }
                }
            }
        }
        assert!(checked > 1000, "swept only {checked} cycles");
    }
}
