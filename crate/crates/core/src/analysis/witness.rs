//! Deterministic search for systems exhibiting given cycle periods. The
//! exhaustive pass walks the family in enumeration order and stops at the
//! first hit per target, so a found witness is stable across runs; targets
//! the family cannot produce come back as honest absences, optionally after
//! a widened seeded-sampling pass.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::engine::{run_to_cycle, State};
use crate::format::render_system;

use super::sweep::{check_sample, family_graphs, random_system, Bufs};
use super::{AnalysisError, FamilySpec, SampleSpec, Scratch};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct WitnessQuery {
    /// Cycle periods to hunt for.
    pub targets: Vec<usize>,
    pub family: FamilySpec,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum WitnessOutcome {
    /// A system and on-cycle state realizing the period, re-verified by a
    /// step walk. The document text reproduces it end to end.
    Found {
        period: usize,
        n: usize,
        state: State,
        config_text: String,
    },
    /// The whole family was enumerated and the period never appeared.
    NotFoundExhaustive,
    /// Exhaustive absence, and a widened sampling pass also came up empty.
    NotFoundSampled { samples: u64 },
}

/// Searches the family for each target period, one shared pass in
/// enumeration order. `widen` adds a seeded sampling stage for targets the
/// exhaustive pass missed.
pub fn find_witness(
    query: &WitnessQuery,
    widen: Option<&SampleSpec>,
) -> Result<BTreeMap<usize, WitnessOutcome>, AnalysisError> {
    query.family.check_exhaustive()?;
    let mut out: BTreeMap<usize, WitnessOutcome> = BTreeMap::new();
    let mut missing: u128 = 0;
    for &t in &query.targets {
        out.insert(t, WitnessOutcome::NotFoundExhaustive);
        if t < 128 {
            missing |= 1 << t;
        }
    }

    'families: for n in query.family.n_min..=query.family.n_max {
        let mut scratch = Scratch::new();
        let mut bufs = Bufs::new(1 << n);
        for g in family_graphs(&query.family, n) {
            let flow = super::sweep::scan_graph(
                &g,
                query.family.hub_rules,
                query.family.conformists,
                &mut scratch,
                &mut bufs,
                &mut |ctx, cycles, flat| {
                    for slice in cycles {
                        let p = slice.period as usize;
                        if p >= 128 || missing >> p & 1 == 0 {
                            continue;
                        }
                        let state = State(flat[slice.flat_start as usize]);
                        let cfg = ctx.config();
                        let walked =
                            run_to_cycle(&cfg, state, None).expect("state fits the system");
                        assert_eq!(
                            walked.period, p,
                            "table decomposition and step walk disagree"
                        );
                        out.insert(
                            p,
                            WitnessOutcome::Found {
                                period: p,
                                n,
                                state,
                                config_text: render_system(&cfg, &[state]),
                            },
                        );
                        missing &= !(1u128 << p);
                        if missing == 0 {
                            return ControlFlow::Break(());
                        }
                    }
                    ControlFlow::Continue(())
                },
            );
            if flow.is_break() {
                break 'families;
            }
        }
        if missing == 0 {
            break;
        }
    }

    if missing != 0 {
        if let Some(spec) = widen {
            check_sample(spec)?;
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for _ in 0..spec.samples {
                let cfg = random_system(&mut rng, spec);
                let start = State(rng.random_range(0..1u32 << spec.n));
                let walked = run_to_cycle(&cfg, start, None).expect("sampled start is in range");
                let p = walked.period;
                if p < 128 && missing >> p & 1 == 1 {
                    let state = walked.cycle[0];
                    out.insert(
                        p,
                        WitnessOutcome::Found {
                            period: p,
                            n: spec.n,
                            state,
                            config_text: render_system(&cfg, &[state]),
                        },
                    );
                    missing &= !(1u128 << p);
                    if missing == 0 {
                        break;
                    }
                }
            }
            for (&t, outcome) in out.iter_mut() {
                if t < 128 && missing >> t & 1 == 1 {
                    *outcome = WitnessOutcome::NotFoundSampled {
                        samples: spec.samples,
                    };
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::{ConformistSource, GraphScope, HubRuleSource, LoopPolicy};
    use super::*;
    use crate::format::parse_system;

    fn rerun(outcome: &WitnessOutcome) {
        let WitnessOutcome::Found {
            period,
            state,
            config_text,
            ..
        } = outcome
        else {
            panic!("expected a witness, got {outcome:?}");
        };
        let doc = parse_system(config_text).unwrap();
        assert_eq!(doc.inits, vec![*state]);
        let walked = run_to_cycle(&doc.config, *state, None).unwrap();
        assert_eq!(walked.period, *period);
        assert_eq!(walked.transient, 0);
    }

    #[test]
    fn finds_period_three_against_a_looped_hub() {
        let query = WitnessQuery {
            targets: vec![3],
            family: FamilySpec {
                n_min: 1,
                n_max: 3,
                loops: LoopPolicy::Anywhere,
                scope: GraphScope::Any,
                hub_rules: HubRuleSource::Minority,
                conformists: ConformistSource::AllThresholds,
            },
        };
        let out = find_witness(&query, None).unwrap();
        let outcome = &out[&3];
        rerun(outcome);
        let WitnessOutcome::Found {
            n,
            state,
            config_text,
            ..
        } = outcome
        else {
            unreachable!()
        };
        assert_eq!(*n, 2);
        assert_eq!(*state, State(0b01));
        let doc = parse_system(config_text).unwrap();
        assert!(doc.config.graph().has_loop(0));
    }

    #[test]
    fn multi_target_search_shares_one_pass() {
        let query = WitnessQuery {
            targets: vec![1, 2, 4],
            family: FamilySpec {
                n_min: 1,
                n_max: 2,
                loops: LoopPolicy::Anywhere,
                scope: GraphScope::Any,
                hub_rules: HubRuleSource::Minority,
                conformists: ConformistSource::AllThresholds,
            },
        };
        let out = find_witness(&query, None).unwrap();
        assert_eq!(out.len(), 3);
        for (&target, outcome) in &out {
            rerun(outcome);
            let WitnessOutcome::Found { period, n, .. } = outcome else {
                unreachable!()
            };
            assert_eq!(*period, target);
            assert!(*n <= 2);
        }
    }

    #[test]
    fn absence_is_reported_not_fabricated() {
        let family = FamilySpec {
            n_min: 1,
            n_max: 3,
            loops: LoopPolicy::Forbidden,
            scope: GraphScope::Any,
            hub_rules: HubRuleSource::AllThresholds,
            conformists: ConformistSource::AllThresholds,
        };
        let query = WitnessQuery {
            targets: vec![7],
            family,
        };
        let out = find_witness(&query, None).unwrap();
        assert_eq!(out[&7], WitnessOutcome::NotFoundExhaustive);

        let widen = SampleSpec {
            n: 4,
            loops: LoopPolicy::Forbidden,
            scope: GraphScope::Any,
            hub_rules: HubRuleSource::AllThresholds,
            conformists: ConformistSource::AllThresholds,
            samples: 80,
            seed: 0xA5CE7,
        };
        let out = find_witness(&query, Some(&widen)).unwrap();
        assert_eq!(out[&7], WitnessOutcome::NotFoundSampled { samples: 80 });
    }

    #[test]
    fn widened_sampling_rescues_undersized_families() {
        let query = WitnessQuery {
            targets: vec![4],
            family: FamilySpec {
                n_min: 1,
                n_max: 1,
                loops: LoopPolicy::Forbidden,
                scope: GraphScope::Any,
                hub_rules: HubRuleSource::Minority,
                conformists: ConformistSource::AllThresholds,
            },
        };
        let widen = SampleSpec {
            n: 2,
            loops: LoopPolicy::Forbidden,
            scope: GraphScope::Any,
            hub_rules: HubRuleSource::Minority,
            conformists: ConformistSource::AllThresholds,
            samples: 200,
            seed: 0x77,
        };
        let out = find_witness(&query, Some(&widen)).unwrap();
        rerun(&out[&4]);
        let WitnessOutcome::Found { n, .. } = &out[&4] else {
            unreachable!()
        };
        assert_eq!(*n, 2);
    }
}
