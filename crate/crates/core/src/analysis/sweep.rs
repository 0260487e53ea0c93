//! Family sweeps: enumerate every system in a family (graphs x rule
//! assignments), decompose every initial state, and judge the resulting
//! cycles. The hot path never builds a `SystemConfig`: each vertex's
//! threshold rule becomes a bit-column over states (bit u set iff the vertex
//! fires at state u), the hub rule becomes one more column, and successor
//! tables are assembled by ORing columns. Real configs are reconstructed
//! only to describe a violation.
//!
//! Exhaustive sweeps stop at 6 vertices (5 once loops join in); larger
//! families go through the seeded samplers instead.

use std::collections::BTreeMap;
use std::ops::ControlFlow;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::engine::{run_to_cycle, CycleReport, State, SystemConfig};
use crate::format::render_system;
use crate::graph::{enumerate_graphs, Graph};
use crate::lyapunov::{check_settled_flips, trace, z2_upper_bound, FlipFault, FlipViolation};
use crate::rules::{
    compress_bits, majority_rule, spread_bits, CountSet, Rule, SubsetSystem, FULL_ENUM_MAX_DEGREE,
};
use crate::Opinion;

use super::{
    check_cycle_windows, classify_pattern, neighbor_parity_classes, neighbors, AnalysisError,
    CyclePattern, CycleSlice, Scratch,
};

/// Largest vertex count the seeded samplers accept.
pub const SAMPLE_MAX_VERTICES: usize = 12;

const COUNTEREXAMPLE_CAP: usize = 8;

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum LoopPolicy {
    Forbidden,
    Anywhere,
    ExceptHub,
}

impl LoopPolicy {
    fn allows_any(self) -> bool {
        !matches!(self, LoopPolicy::Forbidden)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum GraphScope {
    Any,
    /// Only graphs where no two neighbours of vertex 0 are adjacent.
    HubIndependent,
}

/// Where vertex 0's rules come from during a sweep.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum HubRuleSource {
    /// Every subset-system rule while the hub degree allows it, every
    /// count-based rule beyond that.
    AutoFullThenCount,
    CountBased,
    AllThresholds,
    AllAntiThresholds,
    Majority,
    Minority,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ConformistSource {
    /// Every legal threshold at every conformist.
    AllThresholds,
    Majority,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct FamilySpec {
    pub n_min: usize,
    pub n_max: usize,
    pub loops: LoopPolicy,
    pub scope: GraphScope,
    pub hub_rules: HubRuleSource,
    pub conformists: ConformistSource,
}

impl FamilySpec {
    /// Largest `n_max` this family can be enumerated at; graph counts grow
    /// too fast past it, and callers should fall back to sampling.
    pub fn exhaustive_limit(&self) -> usize {
        if self.loops.allows_any() {
            5
        } else {
            6
        }
    }

    pub(crate) fn check_exhaustive(&self) -> Result<(), AnalysisError> {
        if self.n_min == 0 || self.n_min > self.n_max {
            return Err(AnalysisError::EmptyFamily);
        }
        let limit = self.exhaustive_limit();
        if self.n_max > limit {
            return Err(AnalysisError::SweepTooLarge(self.n_max, limit));
        }
        Ok(())
    }

    fn admits(&self, g: &Graph) -> bool {
        if matches!(self.loops, LoopPolicy::ExceptHub) && g.has_loop(0) {
            return false;
        }
        match self.scope {
            GraphScope::Any => true,
            GraphScope::HubIndependent => g.v1_neighborhood_independent(),
        }
    }
}

/// Seeded random spot-check over one vertex count, for families past the
/// exhaustive limits.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SampleSpec {
    pub n: usize,
    pub loops: LoopPolicy,
    pub scope: GraphScope,
    pub hub_rules: HubRuleSource,
    pub conformists: ConformistSource,
    pub samples: u64,
    pub seed: u64,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SweepCounterexample {
    pub n: usize,
    /// Complete system document; parsing it and running its init line
    /// reproduces the finding.
    pub config_text: String,
    pub state: State,
    pub period: usize,
    pub detail: String,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SweepReport {
    pub graphs: u64,
    /// (graph, rule assignment) pairs visited.
    pub tuples: u64,
    /// Initial states covered: 2^n per tuple when exhaustive, one per
    /// sampled trajectory.
    pub initial_states: u64,
    /// Distinct recurrent cycles by period (eventual period of each
    /// trajectory, for sampled reports).
    pub cycle_counts: BTreeMap<usize, u64>,
    /// States lying on recurrent cycles, by period. Exhaustive sweeps only.
    pub recurrent_states: BTreeMap<usize, u64>,
    pub violations: u64,
    /// At most the first few violations, in sweep order.
    pub counterexamples: Vec<SweepCounterexample>,
}

impl SweepReport {
    fn new() -> SweepReport {
        SweepReport {
            graphs: 0,
            tuples: 0,
            initial_states: 0,
            cycle_counts: BTreeMap::new(),
            recurrent_states: BTreeMap::new(),
            violations: 0,
            counterexamples: Vec::new(),
        }
    }

    pub fn pass(&self) -> bool {
        self.violations == 0
    }

    pub fn observed_periods(&self) -> Vec<usize> {
        self.cycle_counts.keys().copied().collect()
    }

    fn absorb(&mut self, other: SweepReport) {
        self.graphs += other.graphs;
        self.tuples += other.tuples;
        self.initial_states += other.initial_states;
        for (p, c) in other.cycle_counts {
            *self.cycle_counts.entry(p).or_insert(0) += c;
        }
        for (p, c) in other.recurrent_states {
            *self.recurrent_states.entry(p).or_insert(0) += c;
        }
        self.violations += other.violations;
        for ce in other.counterexamples {
            if self.counterexamples.len() < COUNTEREXAMPLE_CAP {
                self.counterexamples.push(ce);
            }
        }
    }

    fn note_violation(&mut self, ctx: &TupleCtx, state: State, period: usize, detail: String) {
        self.violations += 1;
        if self.counterexamples.len() < COUNTEREXAMPLE_CAP {
            self.counterexamples.push(SweepCounterexample {
                n: ctx.graph.n(),
                config_text: ctx.render(state),
                state,
                period,
                detail,
            });
        }
    }
}

// --- the fast path ---------------------------------------------------------

/// Per-graph bit columns: for each state u (as a bit position), which rules
/// fire. Bounded by 64 states, so a column is one u64.
struct Tables {
    d0: u32,
    size: usize,
    /// counts[c]: states where the hub sees exactly c positive neighbours.
    counts: [u64; 8],
    /// keys[k]: states whose hub-neighbourhood subset compresses to k. Only
    /// filled when the full subset enumeration is in play.
    keys: [u64; 8],
    full: bool,
    /// cols[v][r]: states where conformist v fires under threshold r.
    cols: Vec<Vec<u64>>,
}

fn tables_for(g: &Graph, want_full: bool) -> Tables {
    let n = g.n();
    let size = 1usize << n;
    let adj0 = g.neighbor_mask(0);
    let d0 = adj0.count_ones();
    let full = want_full && d0 <= FULL_ENUM_MAX_DEGREE;
    let mut counts = [0u64; 8];
    let mut keys = [0u64; 8];
    for u in 0..size as u32 {
        let active = u & adj0;
        counts[active.count_ones() as usize] |= 1 << u;
        if full {
            keys[compress_bits(active, adj0) as usize] |= 1 << u;
        }
    }
    let mut cols = vec![Vec::new(); n];
    for (v, col_slot) in cols.iter_mut().enumerate().skip(1) {
        let adjv = g.neighbor_mask(v);
        let mut col = vec![0u64; adjv.count_ones() as usize + 2];
        for u in 0..size as u32 {
            let c = (u & adjv).count_ones() as usize;
            for slot in col.iter_mut().take(c + 1) {
                *slot |= 1 << u;
            }
        }
        *col_slot = col;
    }
    Tables {
        d0,
        size,
        counts,
        keys,
        full,
        cols,
    }
}

/// A hub rule in sweep form: enough to rebuild the `Rule` on demand.
#[derive(Clone, PartialEq, Eq, Debug)]
pub(crate) enum HubRuleKind {
    Thr(u32),
    Anti(u32),
    Count(u64),
    /// Bitmask over compressed neighbourhood-subset indices.
    Subsets(u64),
}

impl HubRuleKind {
    pub(crate) fn to_rule(&self, adj0: u32) -> Rule {
        match *self {
            HubRuleKind::Thr(r) => Rule::Threshold(r),
            HubRuleKind::Anti(r) => Rule::AntiThreshold(r),
            HubRuleKind::Count(m) => Rule::CountSet(CountSet::from_mask(m)),
            HubRuleKind::Subsets(f) => {
                let subsets = 1u32 << adj0.count_ones();
                Rule::SubsetSystem(SubsetSystem::new(
                    (0..subsets)
                        .filter(|&k| f >> k & 1 == 1)
                        .map(|k| spread_bits(k, adj0)),
                ))
            }
        }
    }
}

fn hub_rule_list(source: HubRuleSource, t: &Tables) -> Vec<(u64, HubRuleKind)> {
    let d0 = t.d0;
    let thr_col = |r: u32| (r..=d0).fold(0u64, |m, c| m | t.counts[c as usize]);
    let anti_col = |r: u32| (0..r.min(d0 + 1)).fold(0u64, |m, c| m | t.counts[c as usize]);
    let count_cols = || {
        (0..1u64 << (d0 + 1))
            .map(|m| {
                let col = (0..=d0).fold(0u64, |acc, c| {
                    if m >> c & 1 == 1 {
                        acc | t.counts[c as usize]
                    } else {
                        acc
                    }
                });
                (col, HubRuleKind::Count(m))
            })
            .collect()
    };
    match source {
        HubRuleSource::AllThresholds => (0..=d0 + 1)
            .map(|r| (thr_col(r), HubRuleKind::Thr(r)))
            .collect(),
        HubRuleSource::AllAntiThresholds => (0..=d0 + 1)
            .map(|r| (anti_col(r), HubRuleKind::Anti(r)))
            .collect(),
        HubRuleSource::Majority => {
            let r = balanced_cutoff(d0);
            vec![(thr_col(r), HubRuleKind::Thr(r))]
        }
        HubRuleSource::Minority => {
            let r = balanced_cutoff(d0);
            vec![(anti_col(r), HubRuleKind::Anti(r))]
        }
        HubRuleSource::CountBased => count_cols(),
        HubRuleSource::AutoFullThenCount => {
            if t.full {
                let subsets = 1u32 << d0;
                (0..1u64 << subsets)
                    .map(|f| {
                        let col = (0..subsets).fold(0u64, |acc, k| {
                            if f >> k & 1 == 1 {
                                acc | t.keys[k as usize]
                            } else {
                                acc
                            }
                        });
                        (col, HubRuleKind::Subsets(f))
                    })
                    .collect()
            } else {
                count_cols()
            }
        }
    }
}

fn balanced_cutoff(deg: u32) -> u32 {
    match majority_rule(deg) {
        Rule::Threshold(r) => r,
        _ => unreachable!("balanced rule is a threshold"),
    }
}

/// One enumerated system, cheap to carry and able to rebuild itself.
pub(crate) struct TupleCtx<'a> {
    pub graph: &'a Graph,
    /// Thresholds of vertices 1.., parallel to `graph` order.
    pub conf: &'a [u32],
    pub hub: &'a HubRuleKind,
}

impl TupleCtx<'_> {
    pub(crate) fn rules(&self) -> Vec<Rule> {
        let mut rules = Vec::with_capacity(self.graph.n());
        rules.push(self.hub.to_rule(self.graph.neighbor_mask(0)));
        rules.extend(self.conf.iter().map(|&r| Rule::Threshold(r)));
        rules
    }

    pub(crate) fn config(&self) -> SystemConfig {
        SystemConfig::new(self.graph.clone(), self.rules()).expect("enumerated rules are legal")
    }

    pub(crate) fn render(&self, init: State) -> String {
        render_system(&self.config(), &[init])
    }
}

pub(crate) struct Bufs {
    conf: Vec<u32>,
    succ: Vec<u32>,
    cycles: Vec<CycleSlice>,
    flat: Vec<u32>,
}

impl Bufs {
    pub(crate) fn new(size: usize) -> Bufs {
        Bufs {
            conf: vec![0; size],
            succ: vec![0; size],
            cycles: Vec::new(),
            flat: Vec::new(),
        }
    }
}

/// Runs `visit` on every (conformist assignment, hub rule) tuple of one
/// graph, handing over the decomposed cycles.
pub(crate) fn scan_graph(
    g: &Graph,
    hub_source: HubRuleSource,
    conf_source: ConformistSource,
    scratch: &mut Scratch,
    bufs: &mut Bufs,
    visit: &mut dyn FnMut(&TupleCtx, &[CycleSlice], &[u32]) -> ControlFlow<()>,
) -> ControlFlow<()> {
    let n = g.n();
    let tables = tables_for(g, matches!(hub_source, HubRuleSource::AutoFullThenCount));
    let hubs = hub_rule_list(hub_source, &tables);
    let size = tables.size;

    let mut r: Vec<u32> = Vec::with_capacity(n.saturating_sub(1));
    let mut r_max: Vec<u32> = Vec::with_capacity(n.saturating_sub(1));
    for v in 1..n {
        let dv = g.degree(v);
        match conf_source {
            ConformistSource::AllThresholds => {
                r.push(0);
                r_max.push(dv + 1);
            }
            ConformistSource::Majority => {
                let b = balanced_cutoff(dv);
                r.push(b);
                r_max.push(b);
            }
        }
    }

    let Bufs {
        conf,
        succ,
        cycles,
        flat,
    } = bufs;
    loop {
        conf[..size].fill(0);
        for v in 1..n {
            let col = tables.cols[v][r[v - 1] as usize];
            for (u, slot) in conf[..size].iter_mut().enumerate() {
                *slot |= ((col >> u & 1) as u32) << v;
            }
        }
        for (col, kind) in &hubs {
            for (u, slot) in succ[..size].iter_mut().enumerate() {
                *slot = conf[u] | (col >> u & 1) as u32;
            }
            scratch.decompose(&succ[..size], cycles, flat);
            let ctx = TupleCtx {
                graph: g,
                conf: &r,
                hub: kind,
            };
            visit(&ctx, cycles, flat)?;
        }
        let mut i = 0;
        loop {
            if i == r.len() {
                return ControlFlow::Continue(());
            }
            r[i] += 1;
            if r[i] <= r_max[i] {
                break;
            }
            r[i] = 0;
            i += 1;
        }
    }
}

pub(crate) fn family_graphs(spec: &FamilySpec, n: usize) -> Vec<Graph> {
    enumerate_graphs(n, spec.loops.allows_any())
        .expect("family bounds were validated")
        .filter(|g| spec.admits(g))
        .collect()
}

/// Exhaustive driver: every graph of the family in order, tuples within,
/// histograms filled here, per-cycle judgment delegated to `judge`. Graphs
/// split across worker threads; partial reports merge back in enumeration
/// order, so reports are identical at any worker count.
fn scan_family<F>(spec: &FamilySpec, judge: F) -> Result<SweepReport, AnalysisError>
where
    F: Fn(&mut SweepReport, &mut Vec<Opinion>, &TupleCtx, &[CycleSlice], &[u32]) + Sync,
{
    spec.check_exhaustive()?;
    let mut total = SweepReport::new();
    for n in spec.n_min..=spec.n_max {
        let graphs = family_graphs(spec, n);
        let partials: Vec<SweepReport> = graphs
            .par_iter()
            .map(|g| {
                let mut rep = SweepReport::new();
                rep.graphs = 1;
                let mut scratch = Scratch::new();
                let mut bufs = Bufs::new(1 << n);
                let mut c_buf = Vec::new();
                let _ = scan_graph(
                    g,
                    spec.hub_rules,
                    spec.conformists,
                    &mut scratch,
                    &mut bufs,
                    &mut |ctx, cycles, flat| {
                        rep.tuples += 1;
                        rep.initial_states += 1u64 << n;
                        for slice in cycles {
                            let p = slice.period as usize;
                            *rep.cycle_counts.entry(p).or_insert(0) += 1;
                            *rep.recurrent_states.entry(p).or_insert(0) += p as u64;
                        }
                        judge(&mut rep, &mut c_buf, ctx, cycles, flat);
                        ControlFlow::Continue(())
                    },
                );
                rep
            })
            .collect();
        for p in partials {
            total.absorb(p);
        }
    }
    Ok(total)
}

fn period_mask(periods: &[usize]) -> u128 {
    periods.iter().fold(0u128, |m, &p| {
        assert!(p < 128, "period {p} out of mask range");
        m | 1 << p
    })
}

/// Checks that every recurrent cycle in the family has a period from
/// `allowed`.
pub fn verify_period_set(
    spec: &FamilySpec,
    allowed: &[usize],
) -> Result<SweepReport, AnalysisError> {
    let mask = period_mask(allowed);
    scan_family(spec, |rep, _c_buf, ctx, cycles, flat| {
        for slice in cycles {
            let p = slice.period as usize;
            if mask >> p & 1 == 0 {
                rep.note_violation(
                    ctx,
                    State(flat[slice.flat_start as usize]),
                    p,
                    format!("period {p} outside the expected set"),
                );
            }
        }
    })
}

/// Checks that no recurrent cycle in the family has a period from
/// `forbidden`.
pub fn verify_periods_absent(
    spec: &FamilySpec,
    forbidden: &[usize],
) -> Result<SweepReport, AnalysisError> {
    let mask = period_mask(forbidden);
    scan_family(spec, |rep, _c_buf, ctx, cycles, flat| {
        for slice in cycles {
            let p = slice.period as usize;
            if mask >> p & 1 == 1 {
                rep.note_violation(
                    ctx,
                    State(flat[slice.flat_start as usize]),
                    p,
                    format!("forbidden period {p} reached"),
                );
            }
        }
    })
}

/// Checks that every recurrent cycle's hub opinion sequence classifies into
/// a pattern class, that the cycle period is one the class allows, and that
/// classes needing a hub loop only show up on graphs that have one.
pub fn verify_pattern_periods(spec: &FamilySpec) -> Result<SweepReport, AnalysisError> {
    scan_family(spec, |rep, c_buf, ctx, cycles, flat| {
        let hub_loop = ctx.graph.has_loop(0);
        for slice in cycles {
            let p = slice.period as usize;
            let start = slice.flat_start as usize;
            c_buf.clear();
            c_buf.extend(
                flat[start..start + p]
                    .iter()
                    .map(|&s| Opinion::from_bool(s & 1 == 1)),
            );
            let state = State(flat[start]);
            match classify_pattern(c_buf).expect("cycle is nonempty") {
                None => {
                    rep.note_violation(ctx, state, p, "hub pattern fits no class".into());
                }
                Some(pat) => {
                    if !pat.allowed_periods().contains(&p) {
                        rep.note_violation(
                            ctx,
                            state,
                            p,
                            format!("class {pat} cannot run at period {p}"),
                        );
                    }
                    if pat.needs_hub_loop() && !hub_loop {
                        rep.note_violation(
                            ctx,
                            state,
                            p,
                            format!("class {pat} requires a loop at vertex 0"),
                        );
                    }
                }
            }
        }
    })
}

/// Which per-cycle validations [`sweep_cycles`] runs.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct CycleChecks {
    pub patterns: bool,
    pub windows: bool,
    pub neighbor_classes: bool,
    pub settled_flips: bool,
}

impl CycleChecks {
    pub fn all() -> CycleChecks {
        CycleChecks {
            patterns: true,
            windows: true,
            neighbor_classes: true,
            settled_flips: true,
        }
    }
}

/// The thorough sweep: rebuilds each system and runs the selected structural
/// checks on every recurrent cycle. Window checks run only under
/// anti-threshold hubs and neighbour classes only on independent hub
/// neighbourhoods; systems outside those hypotheses pass through unjudged.
pub fn sweep_cycles(spec: &FamilySpec, checks: CycleChecks) -> Result<SweepReport, AnalysisError> {
    scan_family(spec, |rep, c_buf, ctx, cycles, flat| {
        let hub_loop = ctx.graph.has_loop(0);
        let need_cfg = checks.windows || checks.neighbor_classes || checks.settled_flips;
        let cfg = if need_cfg { Some(ctx.config()) } else { None };
        for slice in cycles {
            let p = slice.period as usize;
            let start = slice.flat_start as usize;
            let states: Vec<State> = flat[start..start + p].iter().map(|&s| State(s)).collect();
            c_buf.clear();
            c_buf.extend(states.iter().map(|s| s.opinion(0)));
            let first = states[0];
            let shape = classify_pattern(c_buf).expect("cycle is nonempty");

            if checks.patterns {
                match shape {
                    None => rep.note_violation(ctx, first, p, "hub pattern fits no class".into()),
                    Some(pat) => {
                        if !pat.allowed_periods().contains(&p) {
                            rep.note_violation(
                                ctx,
                                first,
                                p,
                                format!("class {pat} cannot run at period {p}"),
                            );
                        }
                        if pat.needs_hub_loop() && !hub_loop {
                            rep.note_violation(
                                ctx,
                                first,
                                p,
                                format!("class {pat} requires a loop at vertex 0"),
                            );
                        }
                    }
                }
            }
            let Some(cfg) = &cfg else { continue };
            let report = CycleReport {
                transient: 0,
                period: p,
                cycle: states,
                c_sequence: c_buf.clone(),
            };

            if checks.windows && matches!(cfg.rule(0), Rule::AntiThreshold(_)) {
                let wr = check_cycle_windows(cfg, &report).expect("hub rule matched");
                for v in wr.violations {
                    rep.note_violation(
                        ctx,
                        first,
                        p,
                        format!("window {} broken at t={} x={}", v.check, v.t, v.x),
                    );
                }
            }

            if checks.neighbor_classes && cfg.graph().v1_neighborhood_independent() {
                match neighbor_parity_classes(cfg, &report) {
                    Err(e) => rep.note_violation(ctx, first, p, e.to_string()),
                    Ok(classes) => {
                        let degenerate = matches!(
                            shape,
                            Some(CyclePattern::Constant(_)) | Some(CyclePattern::Alternating)
                        );
                        if !degenerate {
                            for (set, parity, t) in
                                neighbors::xyz_monochromatic_violations(&report, &classes)
                            {
                                rep.note_violation(
                                    ctx,
                                    first,
                                    p,
                                    format!("set {set}[{parity}] mixed at cycle step {t}"),
                                );
                            }
                        }
                    }
                }
            }

            if checks.settled_flips {
                let faults =
                    check_settled_flips(cfg, &report).expect("sweep conformists are thresholds");
                for f in faults {
                    rep.note_violation(ctx, first, p, flip_detail(&f));
                }
            }
        }
    })
}

fn flip_detail(v: &FlipViolation) -> String {
    match v.fault {
        FlipFault::NotHubNeighbor => format!(
            "vertex {} flips on the two-step clock without touching vertex 0 (cycle step {})",
            v.vertex, v.t
        ),
        FlipFault::OffTippingCount { count, r } => format!(
            "vertex {} flips at count {count} instead of {} (cycle step {})",
            v.vertex,
            r - 1,
            v.t
        ),
    }
}

// --- seeded sampling -------------------------------------------------------

pub(crate) fn check_sample(spec: &SampleSpec) -> Result<(), AnalysisError> {
    if spec.n == 0 {
        return Err(AnalysisError::EmptyFamily);
    }
    if spec.n > SAMPLE_MAX_VERTICES {
        return Err(AnalysisError::SweepTooLarge(spec.n, SAMPLE_MAX_VERTICES));
    }
    Ok(())
}

fn random_graph(rng: &mut ChaCha8Rng, spec: &SampleSpec) -> Graph {
    loop {
        let n = spec.n;
        let mut edges = Vec::new();
        for a in 0..n {
            for b in a + 1..n {
                if rng.random_bool(0.5) {
                    edges.push((a, b));
                }
            }
        }
        let loop_from = match spec.loops {
            LoopPolicy::Forbidden => n,
            LoopPolicy::Anywhere => 0,
            LoopPolicy::ExceptHub => 1,
        };
        let loops: Vec<usize> = (loop_from..n).filter(|_| rng.random_bool(0.5)).collect();
        let g = Graph::build(n, &edges, &loops).expect("sampled graph is well-formed");
        let ok = match spec.scope {
            GraphScope::Any => true,
            GraphScope::HubIndependent => g.v1_neighborhood_independent(),
        };
        if ok {
            return g;
        }
    }
}

fn random_hub_rule(rng: &mut ChaCha8Rng, source: HubRuleSource, adj0: u32) -> Rule {
    let d0 = adj0.count_ones();
    match source {
        HubRuleSource::AllThresholds => Rule::Threshold(rng.random_range(0..=d0 + 1)),
        HubRuleSource::AllAntiThresholds => Rule::AntiThreshold(rng.random_range(0..=d0 + 1)),
        HubRuleSource::Majority => Rule::Threshold(balanced_cutoff(d0)),
        HubRuleSource::Minority => Rule::AntiThreshold(balanced_cutoff(d0)),
        HubRuleSource::CountBased => {
            Rule::CountSet(CountSet::from_mask(rng.random_range(0..1u64 << (d0 + 1))))
        }
        HubRuleSource::AutoFullThenCount => {
            if d0 <= FULL_ENUM_MAX_DEGREE {
                let subsets = 1u32 << d0;
                let family = rng.random_range(0..1u64 << subsets);
                Rule::SubsetSystem(SubsetSystem::new(
                    (0..subsets)
                        .filter(|&k| family >> k & 1 == 1)
                        .map(|k| spread_bits(k, adj0)),
                ))
            } else {
                Rule::CountSet(CountSet::from_mask(rng.random_range(0..1u64 << (d0 + 1))))
            }
        }
    }
}

pub(crate) fn random_system(rng: &mut ChaCha8Rng, spec: &SampleSpec) -> SystemConfig {
    let g = random_graph(rng, spec);
    let mut rules = Vec::with_capacity(spec.n);
    rules.push(random_hub_rule(rng, spec.hub_rules, g.neighbor_mask(0)));
    for v in 1..spec.n {
        let dv = g.degree(v);
        rules.push(match spec.conformists {
            ConformistSource::AllThresholds => Rule::Threshold(rng.random_range(0..=dv + 1)),
            ConformistSource::Majority => Rule::Threshold(balanced_cutoff(dv)),
        });
    }
    SystemConfig::new(g, rules).expect("sampled rules are legal")
}

/// Seeded trajectory sampling: periods of the cycles reached from random
/// starts of random family members, judged against `allowed`.
pub fn sample_periods(spec: &SampleSpec, allowed: &[usize]) -> Result<SweepReport, AnalysisError> {
    check_sample(spec)?;
    let mask = period_mask(allowed);
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rep = SweepReport::new();
    for _ in 0..spec.samples {
        let cfg = random_system(&mut rng, spec);
        let start = State(rng.random_range(0..1u32 << spec.n));
        let walked = run_to_cycle(&cfg, start, None).expect("sampled start is in range");
        rep.graphs += 1;
        rep.tuples += 1;
        rep.initial_states += 1;
        *rep.cycle_counts.entry(walked.period).or_insert(0) += 1;
        if mask >> walked.period & 1 == 0 {
            rep.violations += 1;
            if rep.counterexamples.len() < COUNTEREXAMPLE_CAP {
                rep.counterexamples.push(SweepCounterexample {
                    n: spec.n,
                    config_text: render_system(&cfg, &[start]),
                    state: start,
                    period: walked.period,
                    detail: format!("period {} outside the expected set", walked.period),
                });
            }
        }
    }
    Ok(rep)
}

/// Aggregate result of [`sample_dynamics`]: decrease-operator monotonicity
/// and settled-flip discipline over sampled trajectories.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DynamicsReport {
    pub trajectories: u64,
    pub cycles_checked: u64,
    pub monotone_violations: u64,
    pub bound_violations: u64,
    pub flip_violations: u64,
    pub counterexamples: Vec<SweepCounterexample>,
}

impl DynamicsReport {
    pub fn pass(&self) -> bool {
        self.monotone_violations == 0 && self.bound_violations == 0 && self.flip_violations == 0
    }
}

/// Runs random trajectories and checks, on each: the doubled potential is
/// non-decreasing and within its bound, and every two-step flip on the
/// reached cycle is a settled hub-neighbour flip.
pub fn sample_dynamics(spec: &SampleSpec) -> Result<DynamicsReport, AnalysisError> {
    check_sample(spec)?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut rep = DynamicsReport {
        trajectories: 0,
        cycles_checked: 0,
        monotone_violations: 0,
        bound_violations: 0,
        flip_violations: 0,
        counterexamples: Vec::new(),
    };
    let bound = z2_upper_bound(spec.n);
    let note = |list: &mut Vec<SweepCounterexample>,
                cfg: &SystemConfig,
                start: State,
                period: usize,
                detail: String| {
        if list.len() < COUNTEREXAMPLE_CAP {
            list.push(SweepCounterexample {
                n: spec.n,
                config_text: render_system(cfg, &[start]),
                state: start,
                period,
                detail,
            });
        }
    };
    for _ in 0..spec.samples {
        let cfg = random_system(&mut rng, spec);
        let start = State(rng.random_range(0..1u32 << spec.n));
        let walked = run_to_cycle(&cfg, start, None).expect("sampled start is in range");
        rep.trajectories += 1;
        let steps = walked.transient + 2 * walked.period + 4;
        let tr = trace(&cfg, start, steps).expect("sampled conformists are thresholds");
        if !tr.is_nondecreasing() {
            rep.monotone_violations += 1;
            note(
                &mut rep.counterexamples,
                &cfg,
                start,
                walked.period,
                "potential decreased along the trajectory".into(),
            );
        }
        if tr.entries.iter().any(|e| e.z2 > bound) {
            rep.bound_violations += 1;
            note(
                &mut rep.counterexamples,
                &cfg,
                start,
                walked.period,
                format!("potential exceeded its bound {bound}"),
            );
        }
        rep.cycles_checked += 1;
        let faults =
            check_settled_flips(&cfg, &walked).expect("sampled conformists are thresholds");
        for f in faults {
            rep.flip_violations += 1;
            note(
                &mut rep.counterexamples,
                &cfg,
                start,
                walked.period,
                flip_detail(&f),
            );
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::period_spectrum;
    use crate::format::parse_system;
    use crate::rules::{enumerate_v1_rules, RuleEnumMode};

    fn family(
        n_max: usize,
        loops: LoopPolicy,
        scope: GraphScope,
        hub: HubRuleSource,
        conf: ConformistSource,
    ) -> FamilySpec {
        FamilySpec {
            n_min: 1,
            n_max,
            loops,
            scope,
            hub_rules: hub,
            conformists: conf,
        }
    }

    #[test]
    fn guards_reject_oversized_families() {
        let f = family(
            7,
            LoopPolicy::Forbidden,
            GraphScope::Any,
            HubRuleSource::Majority,
            ConformistSource::Majority,
        );
        assert_eq!(
            verify_period_set(&f, &[1, 2]).unwrap_err(),
            AnalysisError::SweepTooLarge(7, 6)
        );
        let f = family(
            6,
            LoopPolicy::Anywhere,
            GraphScope::Any,
            HubRuleSource::Majority,
            ConformistSource::Majority,
        );
        assert_eq!(
            verify_period_set(&f, &[1, 2]).unwrap_err(),
            AnalysisError::SweepTooLarge(6, 5)
        );
    }

    #[test]
    fn fast_path_matches_config_by_config_enumeration() {
        // replay the same family through enumerate_v1_rules + period_spectrum
        // and demand identical tuple counts and cycle histograms
        let spec = family(
            3,
            LoopPolicy::Anywhere,
            GraphScope::Any,
            HubRuleSource::AutoFullThenCount,
            ConformistSource::AllThresholds,
        );
        let fast = verify_period_set(&spec, &[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();

        let mut tuples = 0u64;
        let mut cycle_counts: BTreeMap<usize, u64> = BTreeMap::new();
        for n in 1..=3 {
            for g in enumerate_graphs(n, true).unwrap() {
                let adj0 = g.neighbor_mask(0);
                let mode = if adj0.count_ones() <= FULL_ENUM_MAX_DEGREE {
                    RuleEnumMode::FullSubsetSystems
                } else {
                    RuleEnumMode::CountBased
                };
                let mut stacks: Vec<Vec<Rule>> = Vec::new();
                for hub in enumerate_v1_rules(adj0, mode).unwrap() {
                    stacks.push(vec![hub]);
                }
                for v in 1..n {
                    let dv = g.degree(v);
                    stacks = stacks
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
                for rules in stacks {
                    let cfg = SystemConfig::new(g.clone(), rules).unwrap();
                    tuples += 1;
                    for cycle in period_spectrum(&cfg).unwrap().cycles {
                        *cycle_counts.entry(cycle.period).or_insert(0) += 1;
                    }
                }
            }
        }
        assert_eq!(fast.tuples, tuples);
        assert_eq!(fast.cycle_counts, cycle_counts);
        assert!(fast.pass());
    }

    #[test]
    fn pure_threshold_families_stay_short() {
        let spec = family(
            4,
            LoopPolicy::Forbidden,
            GraphScope::Any,
            HubRuleSource::AllThresholds,
            ConformistSource::AllThresholds,
        );
        let rep = verify_period_set(&spec, &[1, 2]).unwrap();
        assert!(rep.pass());
        assert_eq!(rep.observed_periods(), vec![1, 2]);
        assert!(rep.tuples > 10_000);
    }

    #[test]
    fn counterexamples_reproduce_through_the_text_format() {
        let spec = family(
            2,
            LoopPolicy::Forbidden,
            GraphScope::Any,
            HubRuleSource::Minority,
            ConformistSource::AllThresholds,
        );
        let rep = verify_period_set(&spec, &[1, 2]).unwrap();
        assert!(!rep.pass());
        assert!(!rep.counterexamples.is_empty());
        for ce in &rep.counterexamples {
            assert_eq!(ce.period, 4);
            let doc = parse_system(&ce.config_text).unwrap();
            assert_eq!(doc.inits, vec![ce.state]);
            let walked = run_to_cycle(&doc.config, ce.state, None).unwrap();
            assert_eq!(walked.period, ce.period);
            assert_eq!(walked.transient, 0);
        }
    }

    #[test]
    fn anti_hub_cycles_classify_cleanly() {
        let spec = family(
            3,
            LoopPolicy::Anywhere,
            GraphScope::Any,
            HubRuleSource::AllAntiThresholds,
            ConformistSource::AllThresholds,
        );
        let rep = verify_pattern_periods(&spec).unwrap();
        assert!(rep.pass(), "{:?}", rep.counterexamples);
        assert!(rep.cycle_counts.contains_key(&3));
    }

    #[test]
    fn hub_loop_free_families_never_reach_period_three() {
        let spec = family(
            3,
            LoopPolicy::ExceptHub,
            GraphScope::Any,
            HubRuleSource::CountBased,
            ConformistSource::AllThresholds,
        );
        let rep = verify_periods_absent(&spec, &[3]).unwrap();
        assert!(rep.pass(), "{:?}", rep.counterexamples);
        assert!(rep.tuples > 1_000);
    }

    #[test]
    fn thorough_sweep_agrees_on_small_families() {
        let spec = family(
            3,
            LoopPolicy::Anywhere,
            GraphScope::Any,
            HubRuleSource::AllAntiThresholds,
            ConformistSource::AllThresholds,
        );
        let rep = sweep_cycles(&spec, CycleChecks::all()).unwrap();
        assert!(rep.pass(), "{:?}", rep.counterexamples);
        let fast = verify_pattern_periods(&spec).unwrap();
        assert_eq!(rep.cycle_counts, fast.cycle_counts);
        assert_eq!(rep.tuples, fast.tuples);
    }

    #[test]
    fn sampling_is_deterministic_and_in_bounds() {
        let spec = SampleSpec {
            n: 6,
            loops: LoopPolicy::Forbidden,
            scope: GraphScope::Any,
            hub_rules: HubRuleSource::AllThresholds,
            conformists: ConformistSource::AllThresholds,
            samples: 400,
            seed: 0xF1E1D,
        };
        let a = sample_periods(&spec, &[1, 2]).unwrap();
        let b = sample_periods(&spec, &[1, 2]).unwrap();
        assert_eq!(a, b);
        assert!(a.pass());
        assert_eq!(a.initial_states, 400);
    }

    #[test]
    fn sampled_dynamics_hold_their_invariants() {
        let spec = SampleSpec {
            n: 5,
            loops: LoopPolicy::Anywhere,
            scope: GraphScope::Any,
            hub_rules: HubRuleSource::AutoFullThenCount,
            conformists: ConformistSource::AllThresholds,
            samples: 600,
            seed: 0xB0A7,
        };
        let rep = sample_dynamics(&spec).unwrap();
        assert!(rep.pass(), "{:?}", rep.counterexamples);
        assert_eq!(rep.trajectories, 600);
        assert_eq!(rep.cycles_checked, 600);
    }
}
