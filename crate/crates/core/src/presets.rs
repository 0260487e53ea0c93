//! Ready-to-run systems: each built-in graph paired with rules and an
//! initial state that show its characteristic orbit. The CLI and the C
//! bindings both serve these, so the documents they hand out stay identical.

use crate::engine::{State, SystemConfig};
use crate::graph::{gk, preset, GraphError};
use crate::rules::{majority_rule, CountSet, Rule};

/// A named demo: contrarian-vs-conformist on one edge (period 4), or a
/// majority blinker on `k33` / `cube3` started from one side of the
/// bipartition (period 2).
pub fn demo_system(name: &str) -> Result<(SystemConfig, State), GraphError> {
    let g = preset(name)?;
    let (rules, init) = match name {
        "single_edge" => (
            vec![Rule::AntiThreshold(1), Rule::Threshold(1)],
            State(0b11),
        ),
        "k33" => (majority_everywhere(&g), State(0b000111)),
        "cube3" => (majority_everywhere(&g), State(0b0110_1001)),
        other => return Err(GraphError::UnknownPreset(other.to_string())),
    };
    let cfg = SystemConfig::new(g, rules).expect("preset rules fit their degrees");
    Ok((cfg, init))
}

/// The long-period gadget with its count-based vertex-1 rule and the
/// triangle start state; orbits with period 2k + 1.
pub fn gk_system(k: usize) -> Result<(SystemConfig, State), GraphError> {
    let g = gk(k)?;
    let k32 = k as u32;
    let counts = CountSet::from_counts((0..=1).chain(k32 + 1..=2 * k32))
        .expect("counts stay below the cap for every legal k");
    let mut rules = vec![Rule::CountSet(counts)];
    rules.extend((1..g.n()).map(|v| majority_rule(g.degree(v))));
    let start = State(1 | 1 << (2 * k + 2) | 1 << (2 * k + 3) | 1 << (2 * k + 4));
    let cfg = SystemConfig::new(g, rules).expect("majority rules fit their degrees");
    Ok((cfg, start))
}

fn majority_everywhere(g: &crate::graph::Graph) -> Vec<Rule> {
    (0..g.n()).map(|v| majority_rule(g.degree(v))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_to_cycle;

    #[test]
    fn each_demo_runs_to_its_advertised_orbit() {
        let (cfg, init) = demo_system("single_edge").unwrap();
        assert_eq!(run_to_cycle(&cfg, init, None).unwrap().period, 4);

        let (cfg, init) = demo_system("k33").unwrap();
        let report = run_to_cycle(&cfg, init, None).unwrap();
        assert_eq!((report.transient, report.period), (0, 2));

        let (cfg, init) = demo_system("cube3").unwrap();
        let report = run_to_cycle(&cfg, init, None).unwrap();
        assert_eq!((report.transient, report.period), (0, 2));

        assert_eq!(
            demo_system("nope").unwrap_err(),
            GraphError::UnknownPreset("nope".to_string())
        );
    }

    #[test]
    fn gadget_period_tracks_its_size_parameter() {
        for k in 2..=4 {
            let (cfg, init) = gk_system(k).unwrap();
            assert_eq!(cfg.n(), 2 * k + 8);
            let report = run_to_cycle(&cfg, init, None).unwrap();
            assert_eq!(report.period, 2 * k + 1, "k = {k}");
        }
        assert!(gk_system(1).is_err());
    }
}
