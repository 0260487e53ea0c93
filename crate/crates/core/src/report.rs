//! Serialized command output: versioned JSON reports and the CSV trace
//! export. Every document carries a top-level `"schema"` field so golden
//! files stay comparable across releases, and every counterexample embeds a
//! complete system document that [`crate::format::parse_system`] can re-run.

use std::collections::BTreeMap;
use std::time::{SystemTime, UNIX_EPOCH};

use serde_json::{json, Map, Value};

use crate::analysis::{
    DynamicsReport, FamilySpec, PeriodSpectrum, SampleSpec, SweepCounterexample, SweepReport,
    WitnessOutcome,
};
use crate::engine::{CycleReport, State, SystemConfig};
use crate::format::render_system;
use crate::lyapunov::Trace;

/// Unix seconds, or `None` when byte-identical output matters more than
/// provenance (golden files, diff-based tests).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Stamp {
    Now,
    Suppressed,
}

impl Stamp {
    /// Insert `generated_at` into a JSON object (no-op when suppressed or
    /// when the value is not an object).
    pub fn apply(self, doc: &mut Value) {
        if let (Stamp::Now, Value::Object(map)) = (self, doc) {
            let secs = SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0);
            map.insert("generated_at".into(), json!(secs));
        }
    }
}

fn opinions_string(seq: &[crate::Opinion]) -> String {
    seq.iter().map(|o| o.as_char()).collect()
}

fn period_histogram(counts: &BTreeMap<usize, u64>) -> Value {
    let mut map = Map::new();
    for (&period, &count) in counts {
        map.insert(period.to_string(), json!(count));
    }
    Value::Object(map)
}

fn counterexample_value(ce: &SweepCounterexample) -> Value {
    json!({
        "n": ce.n,
        "state": ce.state.render(ce.n),
        "period": ce.period,
        "detail": ce.detail,
        "system": ce.config_text,
    })
}

fn counterexample_list(ces: &[SweepCounterexample]) -> Value {
    Value::Array(ces.iter().map(counterexample_value).collect())
}

// --- family echoes ----------------------------------------------------------

fn loop_policy_name(policy: crate::analysis::LoopPolicy) -> &'static str {
    use crate::analysis::LoopPolicy::*;
    match policy {
        Forbidden => "forbidden",
        Anywhere => "anywhere",
        ExceptHub => "except-hub",
    }
}

fn scope_name(scope: crate::analysis::GraphScope) -> &'static str {
    use crate::analysis::GraphScope::*;
    match scope {
        Any => "any",
        HubIndependent => "hub-independent",
    }
}

fn hub_source_name(source: crate::analysis::HubRuleSource) -> &'static str {
    use crate::analysis::HubRuleSource::*;
    match source {
        AutoFullThenCount => "auto",
        CountBased => "count-based",
        AllThresholds => "thresholds",
        AllAntiThresholds => "anti-thresholds",
        Majority => "majority",
        Minority => "minority",
    }
}

fn conformist_source_name(source: crate::analysis::ConformistSource) -> &'static str {
    use crate::analysis::ConformistSource::*;
    match source {
        AllThresholds => "thresholds",
        Majority => "majority",
    }
}

fn family_echo(spec: &FamilySpec) -> Value {
    json!({
        "n_min": spec.n_min,
        "n_max": spec.n_max,
        "loops": loop_policy_name(spec.loops),
        "scope": scope_name(spec.scope),
        "hub_rules": hub_source_name(spec.hub_rules),
        "conformists": conformist_source_name(spec.conformists),
    })
}

fn sample_echo(spec: &SampleSpec) -> Value {
    json!({
        "n": spec.n,
        "loops": loop_policy_name(spec.loops),
        "scope": scope_name(spec.scope),
        "hub_rules": hub_source_name(spec.hub_rules),
        "conformists": conformist_source_name(spec.conformists),
        "samples": spec.samples,
        "seed": spec.seed,
    })
}

// --- per-command documents --------------------------------------------------

/// Single-trajectory report: where the walk entered its cycle and what the
/// cycle looks like. The embedded system document re-runs the trajectory.
pub fn cycle_report_json(
    cfg: &SystemConfig,
    start: State,
    report: &CycleReport,
    stamp: Stamp,
) -> Value {
    let n = cfg.n();
    let mut doc = json!({
        "schema": "cycle-report/1",
        "n": n,
        "initial": start.render(n),
        "transient": report.transient,
        "period": report.period,
        "cycle": report.cycle.iter().map(|s| s.render(n)).collect::<Vec<_>>(),
        "c_sequence": opinions_string(&report.c_sequence),
        "system": render_system(cfg, &[start]),
    });
    stamp.apply(&mut doc);
    doc
}

/// Full-state-space report: how many initial states land in each period and
/// the distinct recurrent cycles themselves.
pub fn spectrum_json(cfg: &SystemConfig, spectrum: &PeriodSpectrum, stamp: Stamp) -> Value {
    let n = cfg.n();
    let cycles: Vec<Value> = spectrum
        .cycles
        .iter()
        .map(|c| {
            json!({
                "period": c.period,
                "states": c.states.iter().map(|s| s.render(n)).collect::<Vec<_>>(),
                "c_sequence": opinions_string(&c.c_sequence),
            })
        })
        .collect();
    let mut doc = json!({
        "schema": "period-spectrum/1",
        "n": n,
        "state_count": spectrum.state_count,
        "counts": period_histogram(&spectrum.counts),
        "cycles": cycles,
        "system": render_system(cfg, &[]),
    });
    stamp.apply(&mut doc);
    doc
}

/// Exhaustive-sweep verdict: family echo, observed period histogram, and the
/// counterexamples (if any) as runnable documents.
pub fn sweep_report_json(
    check: &str,
    family: &FamilySpec,
    expected: Option<&[usize]>,
    report: &SweepReport,
    stamp: Stamp,
) -> Value {
    let mut doc = json!({
        "schema": "verification-report/1",
        "check": check,
        "mode": "exhaustive",
        "family": family_echo(family),
        "pass": report.pass(),
        "graphs": report.graphs,
        "tuples": report.tuples,
        "initial_states": report.initial_states,
        "observed_periods": report.observed_periods(),
        "cycle_counts": period_histogram(&report.cycle_counts),
        "recurrent_states": period_histogram(&report.recurrent_states),
        "violations": report.violations,
        "counterexamples": counterexample_list(&report.counterexamples),
    });
    if let (Some(list), Value::Object(map)) = (expected, &mut doc) {
        map.insert("expected_periods".into(), json!(list));
    }
    stamp.apply(&mut doc);
    doc
}

/// Randomized-sweep verdict; same shape as the exhaustive report but echoing
/// the sampling parameters instead of a family range.
pub fn sample_report_json(
    check: &str,
    spec: &SampleSpec,
    expected: Option<&[usize]>,
    report: &SweepReport,
    stamp: Stamp,
) -> Value {
    let mut doc = json!({
        "schema": "verification-report/1",
        "check": check,
        "mode": "sampled",
        "sample": sample_echo(spec),
        "pass": report.pass(),
        "trajectories": report.initial_states,
        "observed_periods": report.observed_periods(),
        "cycle_counts": period_histogram(&report.cycle_counts),
        "violations": report.violations,
        "counterexamples": counterexample_list(&report.counterexamples),
    });
    if let (Some(list), Value::Object(map)) = (expected, &mut doc) {
        map.insert("expected_periods".into(), json!(list));
    }
    stamp.apply(&mut doc);
    doc
}

/// Sampled potential-function verdict: monotonicity, bound, and settled-flip
/// counters over randomly drawn trajectories.
pub fn dynamics_report_json(
    check: &str,
    spec: &SampleSpec,
    report: &DynamicsReport,
    stamp: Stamp,
) -> Value {
    let mut doc = json!({
        "schema": "verification-report/1",
        "check": check,
        "mode": "sampled",
        "sample": sample_echo(spec),
        "pass": report.pass(),
        "trajectories": report.trajectories,
        "cycles_checked": report.cycles_checked,
        "monotone_violations": report.monotone_violations,
        "bound_violations": report.bound_violations,
        "flip_violations": report.flip_violations,
        "counterexamples": counterexample_list(&report.counterexamples),
    });
    stamp.apply(&mut doc);
    doc
}

/// Witness-search results keyed by target period. Found entries embed the
/// realizing document; absence says how hard we looked.
pub fn witness_json(outcomes: &BTreeMap<usize, WitnessOutcome>, stamp: Stamp) -> Value {
    let results: Vec<Value> = outcomes
        .iter()
        .map(|(&target, outcome)| match outcome {
            WitnessOutcome::Found {
                period,
                n,
                state,
                config_text,
            } => json!({
                "target": target,
                "outcome": "found",
                "period": period,
                "n": n,
                "state": state.render(*n),
                "system": config_text,
            }),
            WitnessOutcome::NotFoundExhaustive => json!({
                "target": target,
                "outcome": "not-found-exhaustive",
            }),
            WitnessOutcome::NotFoundSampled { samples } => json!({
                "target": target,
                "outcome": "not-found-sampled",
                "samples": samples,
            }),
        })
        .collect();
    let all_found = outcomes
        .values()
        .all(|o| matches!(o, WitnessOutcome::Found { .. }));
    let mut doc = json!({
        "schema": "witness/1",
        "pass": all_found,
        "results": results,
    });
    stamp.apply(&mut doc);
    doc
}

/// Potential trace as JSON; column names match the CSV export.
pub fn trace_json(trace: &Trace, stamp: Stamp) -> Value {
    let entries: Vec<Value> = trace
        .entries
        .iter()
        .map(|e| json!({"t": e.t, "x": e.x, "2y": e.y2, "2z": e.z2}))
        .collect();
    let mut doc = json!({
        "schema": "trace/1",
        "nondecreasing": trace.is_nondecreasing(),
        "settlement_index": trace.settlement_index,
        "entries": entries,
    });
    stamp.apply(&mut doc);
    doc
}

/// CSV trace: header, one row per step, and the settlement index as a
/// trailing comment so the data block stays machine-readable.
pub fn trace_csv(trace: &Trace) -> String {
    let mut out = String::from("t,x,2y,2z\n");
    for e in &trace.entries {
        out.push_str(&format!("{},{},{},{}\n", e.t, e.x, e.y2, e.z2));
    }
    out.push_str(&format!("# settlement_index={}\n", trace.settlement_index));
    out
}
