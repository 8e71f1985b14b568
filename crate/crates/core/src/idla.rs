//! Sequential, parallel and uniform IDLA dispersion.
//!
//! Particle `0` settles at the origin at time zero; particles `1..n` walk
//! from the origin until the settle rule fires at a vacant vertex. Every
//! particle draws its moves from its own stream ([`crate::rng::particle_stream`]),
//! so runs of different processes with the same seed share trajectory
//! randomness.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use crate::blocks::{Block, TimingArray};
use crate::error::{Error, Result};
use crate::graph::{Graph, Vertex};
use crate::rng::{particle_stream, stream, WalkRng, CLOCK_STREAM, SCHEDULER_STREAM};

/// Largest step cap a settle rule may declare.
pub const MAX_SETTLE_CAP: u64 = 1 << 40;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Process {
    Sequential,
    Parallel,
    Uniform,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeModel {
    #[default]
    Discrete,
    Continuous,
}

/// Priority among parallel particles landing on the same vacant vertex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    #[default]
    LowestIndex,
    /// Priority list of particle indices, highest first; entry 0 must be 0.
    Permutation(Vec<usize>),
}

/// What a settle rule sees when a particle stands on a vacant vertex.
#[derive(Debug)]
pub struct SettleContext<'a> {
    pub particle: usize,
    pub vertex: Vertex,
    /// Moves made by this particle so far.
    pub elapsed: u64,
    pub occupied: &'a [bool],
}

type Predicate = Arc<dyn Fn(&SettleContext<'_>) -> bool + Send + Sync>;

/// Decides whether a particle on a vacant vertex settles. Every rule has a
/// step cap past which it settles at the first vacant vertex.
#[derive(Clone, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SettleRule {
    /// Settle at the first vacant vertex.
    #[default]
    FirstVacant,
    /// Keep walking until `cap` moves, except that `target` is taken as soon
    /// as it is found vacant.
    LeastAction { target: Vertex, cap: u64 },
    #[serde(skip)]
    Custom { name: String, cap: u64, predicate: Predicate },
}

impl SettleRule {
    /// The least-action rule with cap `ceil(3 n ln n)`.
    pub fn least_action(n: usize, target: Vertex) -> Self {
        let cap = (3.0 * n as f64 * (n as f64).ln()).ceil().max(0.0) as u64;
        SettleRule::LeastAction { target, cap }
    }

    /// A rule given by `predicate`, forced to settle once `cap` moves are made.
    pub fn custom<F>(name: impl Into<String>, cap: u64, predicate: F) -> Result<Self>
    where
        F: Fn(&SettleContext<'_>) -> bool + Send + Sync + 'static,
    {
        if cap > MAX_SETTLE_CAP {
            return Err(Error::Config(format!(
                "settle rule cap {cap} exceeds {MAX_SETTLE_CAP}; the rule may never fire"
            )));
        }
        Ok(SettleRule::Custom { name: name.into(), cap, predicate: Arc::new(predicate) })
    }

    fn check(&self) -> Result<()> {
        match self {
            SettleRule::LeastAction { cap, .. } | SettleRule::Custom { cap, .. } if *cap > MAX_SETTLE_CAP => {
                Err(Error::Config(format!("settle rule cap {cap} exceeds {MAX_SETTLE_CAP}")))
            }
            _ => Ok(()),
        }
    }

    /// Called only when `ctx.vertex` is vacant.
    fn settles(&self, ctx: &SettleContext<'_>) -> bool {
        match self {
            SettleRule::FirstVacant => true,
            SettleRule::LeastAction { target, cap } => ctx.elapsed >= *cap || ctx.vertex == *target,
            SettleRule::Custom { cap, predicate, .. } => ctx.elapsed >= *cap || predicate(ctx),
        }
    }
}

impl fmt::Debug for SettleRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SettleRule::FirstVacant => f.write_str("FirstVacant"),
            SettleRule::LeastAction { target, cap } => {
                f.debug_struct("LeastAction").field("target", target).field("cap", cap).finish()
            }
            SettleRule::Custom { name, cap, .. } => f.debug_struct("Custom").field("name", name).field("cap", cap).finish(),
        }
    }
}

impl PartialEq for SettleRule {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (SettleRule::FirstVacant, SettleRule::FirstVacant) => true,
            (SettleRule::LeastAction { target: a, cap: b }, SettleRule::LeastAction { target: c, cap: d }) => {
                a == c && b == d
            }
            (SettleRule::Custom { predicate: p, cap: a, .. }, SettleRule::Custom { predicate: q, cap: b, .. }) => {
                Arc::ptr_eq(p, q) && a == b
            }
            _ => false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub process: Process,
    #[serde(default)]
    pub lazy: bool,
    #[serde(default)]
    pub time_model: TimeModel,
    #[serde(default)]
    pub settle_rule: SettleRule,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Parallel only: also report the first step with fewer than
    /// `2^k - 1` particles unsettled.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_k: Option<u32>,
}

impl RunConfig {
    pub fn new(process: Process) -> Self {
        Self {
            process,
            lazy: false,
            time_model: TimeModel::Discrete,
            settle_rule: SettleRule::FirstVacant,
            tie_break: TieBreak::LowestIndex,
            partial_k: None,
        }
    }

    pub fn sequential() -> Self {
        Self::new(Process::Sequential)
    }

    pub fn parallel() -> Self {
        Self::new(Process::Parallel)
    }

    pub fn uniform() -> Self {
        Self::new(Process::Uniform)
    }

    pub fn lazy(mut self, lazy: bool) -> Self {
        self.lazy = lazy;
        self
    }

    pub fn continuous(mut self) -> Self {
        self.time_model = TimeModel::Continuous;
        self
    }

    pub fn with_rule(mut self, rule: SettleRule) -> Self {
        self.settle_rule = rule;
        self
    }

    pub fn with_tie_break(mut self, tie_break: TieBreak) -> Self {
        self.tie_break = tie_break;
        self
    }

    pub fn with_partial_k(mut self, k: u32) -> Self {
        self.partial_k = Some(k);
        self
    }

    /// Checks the configuration against a graph on `n` vertices.
    pub fn validate(&self, n: usize) -> Result<()> {
        if self.time_model == TimeModel::Continuous && self.process == Process::Parallel {
            return Err(Error::Config(
                "continuous time is only defined for the sequential and uniform processes".into(),
            ));
        }
        if self.partial_k.is_some() && self.process != Process::Parallel {
            return Err(Error::Config("partial_k applies to the parallel process only".into()));
        }
        if let TieBreak::Permutation(order) = &self.tie_break {
            crate::blocks::check_order(order, n).map_err(|e| Error::Config(e.to_string()))?;
        }
        self.settle_rule.check()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionResult {
    /// Largest number of moves of any particle (discrete sequential and
    /// parallel), tick of the last settle (discrete uniform), or largest
    /// settle clock time (continuous).
    pub dispersion_time: f64,
    pub max_steps: u64,
    /// `m(L)`, the sum of all per-particle step counts.
    pub total_length: u64,
    pub per_particle_steps: Vec<u64>,
    /// Vertices in the order they were settled; starts with the origin.
    pub settle_order: Vec<Vertex>,
    /// Time of each settle event, aligned with `settle_order`.
    pub settle_times: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partial_time: Option<u64>,
    pub seed: u64,
}

/// A run together with its history.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Run {
    pub block: Block,
    /// Move times, recorded by uniform and continuous sequential runs.
    pub timing: Option<TimingArray>,
    pub result: DispersionResult,
}

fn step(graph: &Graph, v: Vertex, lazy: bool, rng: &mut WalkRng) -> Vertex {
    if lazy && rng.random_bool(0.5) {
        return v;
    }
    let nbrs = graph.neighbors(v);
    let k = rng.random_range(0..graph.degree(v));
    nbrs.get(k).copied().unwrap_or(v)
}

fn exp1(rng: &mut WalkRng) -> f64 {
    Exp1.sample(rng)
}

/// Records rows and times only when asked to.
struct Recorder {
    on: bool,
    rows: Vec<Vec<Vertex>>,
    times: Vec<Vec<f64>>,
}

impl Recorder {
    fn new(on: bool, n: usize, origin: Vertex) -> Self {
        let (rows, times) = if on { (vec![vec![origin]; n], vec![vec![0.0]; n]) } else { (Vec::new(), Vec::new()) };
        Self { on, rows, times }
    }

    #[inline]
    fn push(&mut self, i: usize, v: Vertex, t: f64) {
        if self.on {
            self.rows[i].push(v);
            self.times[i].push(t);
        }
    }

    fn finish(self, origin: Vertex, timed: bool) -> (Option<Block>, Option<TimingArray>) {
        if !self.on {
            return (None, None);
        }
        let timing = timed.then_some(TimingArray { times: self.times });
        (Some(Block::new(origin, self.rows)), timing)
    }
}

struct Outcome {
    steps: Vec<u64>,
    settle_order: Vec<Vertex>,
    settle_times: Vec<f64>,
    dispersion_time: f64,
    partial_time: Option<u64>,
}

fn check_inputs(graph: &Graph, origin: Vertex, config: &RunConfig) -> Result<()> {
    if origin >= graph.n() {
        return Err(Error::Domain(format!("origin {origin} out of range for n = {}", graph.n())));
    }
    if !graph.is_connected() {
        return Err(Error::Connectivity("dispersion needs a connected graph".into()));
    }
    config.validate(graph.n())
}

fn sequential(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64, rec: &mut Recorder) -> Outcome {
    let n = graph.n();
    let continuous = config.time_model == TimeModel::Continuous;
    let mut clock_rng = continuous.then(|| stream(seed, CLOCK_STREAM));
    let mut occupied = vec![false; n];
    occupied[origin] = true;
    let mut steps = vec![0u64; n];
    let mut settle_order = vec![origin];
    let mut settle_times = vec![0.0];
    let mut dispersion_time = 0.0f64;
    for i in 1..n {
        let mut rng = particle_stream(seed, i);
        let mut v = origin;
        let mut elapsed = 0u64;
        let mut clock = 0.0;
        loop {
            v = step(graph, v, config.lazy, &mut rng);
            elapsed += 1;
            clock = match clock_rng.as_mut() {
                Some(r) => clock + exp1(r),
                None => elapsed as f64,
            };
            rec.push(i, v, clock);
            if !occupied[v]
                && config.settle_rule.settles(&SettleContext { particle: i, vertex: v, elapsed, occupied: &occupied })
            {
                break;
            }
        }
        occupied[v] = true;
        steps[i] = elapsed;
        settle_order.push(v);
        settle_times.push(clock);
        dispersion_time = dispersion_time.max(clock);
    }
    Outcome { steps, settle_order, settle_times, dispersion_time, partial_time: None }
}

fn priority(config: &RunConfig, n: usize) -> Vec<usize> {
    match &config.tie_break {
        TieBreak::LowestIndex => (1..n).collect(),
        TieBreak::Permutation(order) => order[1..].to_vec(),
    }
}

fn parallel(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64, rec: &mut Recorder) -> Outcome {
    let n = graph.n();
    let mut rngs: Vec<WalkRng> = (0..n).map(|i| particle_stream(seed, i)).collect();
    let mut pos = vec![origin; n];
    let mut occupied = vec![false; n];
    occupied[origin] = true;
    let mut steps = vec![0u64; n];
    let mut settle_order = vec![origin];
    let mut settle_times = vec![0.0];
    let mut active = priority(config, n);
    let threshold = config.partial_k.map(|k| if k >= 64 { u64::MAX } else { (1u64 << k) - 1 });
    let below = |remaining: usize| threshold.is_some_and(|th| (remaining as u64) < th);
    let mut partial_time = below(active.len()).then_some(0);
    let mut t = 0u64;
    while !active.is_empty() {
        t += 1;
        for &i in &active {
            pos[i] = step(graph, pos[i], config.lazy, &mut rngs[i]);
            steps[i] += 1;
            rec.push(i, pos[i], t as f64);
        }
        active.retain(|&i| {
            let v = pos[i];
            let settle = !occupied[v]
                && config.settle_rule.settles(&SettleContext { particle: i, vertex: v, elapsed: steps[i], occupied: &occupied });
            if settle {
                occupied[v] = true;
                settle_order.push(v);
                settle_times.push(t as f64);
            }
            !settle
        });
        if partial_time.is_none() && below(active.len()) {
            partial_time = Some(t);
        }
    }
    Outcome { steps, settle_order, settle_times, dispersion_time: t as f64, partial_time }
}

/// Source of the move-order sequence of a discrete uniform run.
enum Schedule<'a> {
    Random(WalkRng),
    Fixed(std::slice::Iter<'a, usize>),
}

fn uniform(
    graph: &Graph,
    origin: Vertex,
    config: &RunConfig,
    seed: u64,
    schedule: Option<&[usize]>,
    rec: &mut Recorder,
) -> Result<Outcome> {
    let n = graph.n();
    let mut rngs: Vec<WalkRng> = (0..n).map(|i| particle_stream(seed, i)).collect();
    let mut pos = vec![origin; n];
    let mut occupied = vec![false; n];
    occupied[origin] = true;
    let mut settled = vec![false; n];
    settled[0] = true;
    let mut steps = vec![0u64; n];
    let mut settle_order = vec![origin];
    let mut settle_times = vec![0.0];
    let mut unsettled: Vec<usize> = (1..n).collect();
    let continuous = config.time_model == TimeModel::Continuous;
    let mut schedule = match schedule {
        Some(order) => Schedule::Fixed(order.iter()),
        None => Schedule::Random(stream(seed, SCHEDULER_STREAM)),
    };
    let mut clock_rng = stream(seed, CLOCK_STREAM);
    let mut tick = 0u64;
    let mut clock = 0.0;
    let mut now = 0.0;
    while !unsettled.is_empty() {
        tick += 1;
        let i = if continuous {
            // Among k running rate-1 clocks the next ring is Exp(k) away and
            // belongs to a uniformly chosen particle.
            let k = unsettled.len();
            clock += exp1(&mut clock_rng) / k as f64;
            let slot = match &mut schedule {
                Schedule::Random(r) => r.random_range(0..k),
                Schedule::Fixed(_) => unreachable!("continuous runs draw their own schedule"),
            };
            unsettled[slot]
        } else {
            match &mut schedule {
                Schedule::Random(r) => r.random_range(1..n),
                Schedule::Fixed(it) => *it.next().ok_or_else(|| {
                    Error::Input(format!(
                        "move-order sequence exhausted after {} entries with {} particles unsettled",
                        tick - 1,
                        unsettled.len()
                    ))
                })?,
            }
        };
        if i == 0 || i >= n {
            return Err(Error::Input(format!("move-order entry {i} at tick {tick} is not a movable particle")));
        }
        if settled[i] {
            continue;
        }
        now = if continuous { clock } else { tick as f64 };
        pos[i] = step(graph, pos[i], config.lazy, &mut rngs[i]);
        steps[i] += 1;
        rec.push(i, pos[i], now);
        let v = pos[i];
        if !occupied[v]
            && config.settle_rule.settles(&SettleContext { particle: i, vertex: v, elapsed: steps[i], occupied: &occupied })
        {
            occupied[v] = true;
            settled[i] = true;
            if let Some(slot) = unsettled.iter().position(|&j| j == i) {
                unsettled.swap_remove(slot);
            }
            settle_order.push(v);
            settle_times.push(now);
        }
    }
    Ok(Outcome { steps, settle_order, settle_times, dispersion_time: now, partial_time: None })
}

fn execute(
    graph: &Graph,
    origin: Vertex,
    config: &RunConfig,
    seed: u64,
    schedule: Option<&[usize]>,
    record: bool,
) -> Result<(Option<Block>, Option<TimingArray>, DispersionResult)> {
    check_inputs(graph, origin, config)?;
    let n = graph.n();
    let mut rec = Recorder::new(record, n, origin);
    let outcome = match config.process {
        Process::Sequential => sequential(graph, origin, config, seed, &mut rec),
        Process::Parallel => parallel(graph, origin, config, seed, &mut rec),
        Process::Uniform => uniform(graph, origin, config, seed, schedule, &mut rec)?,
    };
    let timed = config.process == Process::Uniform || config.time_model == TimeModel::Continuous;
    let (block, timing) = rec.finish(origin, timed);
    let result = DispersionResult {
        dispersion_time: outcome.dispersion_time,
        max_steps: outcome.steps.iter().copied().max().unwrap_or(0),
        total_length: outcome.steps.iter().sum(),
        per_particle_steps: outcome.steps,
        settle_order: outcome.settle_order,
        settle_times: outcome.settle_times,
        partial_time: outcome.partial_time,
        seed,
    };
    Ok((block, timing, result))
}

fn recorded(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64, schedule: Option<&[usize]>) -> Result<Run> {
    let (block, timing, result) = execute(graph, origin, config, seed, schedule, true)?;
    Ok(Run { block: block.expect("recording was requested"), timing, result })
}

fn require_process(config: &RunConfig, process: Process) -> Result<()> {
    if config.process != process {
        return Err(Error::Config(format!("expected a {process:?} configuration, got {:?}", config.process)));
    }
    Ok(())
}

/// Runs whichever process `config` names and keeps the full history.
pub fn run(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64) -> Result<Run> {
    recorded(graph, origin, config, seed, None)
}

/// As [`run`] without recording the block; for Monte Carlo loops.
pub fn simulate(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64) -> Result<DispersionResult> {
    Ok(execute(graph, origin, config, seed, None, false)?.2)
}

pub fn run_sequential(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64) -> Result<(Block, DispersionResult)> {
    require_process(config, Process::Sequential)?;
    let run = run(graph, origin, config, seed)?;
    Ok((run.block, run.result))
}

pub fn run_parallel(graph: &Graph, origin: Vertex, config: &RunConfig, seed: u64) -> Result<(Block, DispersionResult)> {
    require_process(config, Process::Parallel)?;
    let run = run(graph, origin, config, seed)?;
    Ok((run.block, run.result))
}

pub fn run_uniform(
    graph: &Graph,
    origin: Vertex,
    config: &RunConfig,
    seed: u64,
) -> Result<(Block, TimingArray, DispersionResult)> {
    require_process(config, Process::Uniform)?;
    let run = run(graph, origin, config, seed)?;
    Ok((run.block, run.timing.expect("uniform runs are timed"), run.result))
}

/// Discrete uniform run driven by the given move-order sequence (0-based
/// particle indices in `1..n`) instead of a random one.
pub fn run_uniform_with_schedule(
    graph: &Graph,
    origin: Vertex,
    config: &RunConfig,
    seed: u64,
    order: &[usize],
) -> Result<(Block, TimingArray, DispersionResult)> {
    require_process(config, Process::Uniform)?;
    if config.time_model == TimeModel::Continuous {
        return Err(Error::Config("a fixed move order applies to discrete time only".into()));
    }
    let run = recorded(graph, origin, config, seed, Some(order))?;
    Ok((run.block, run.timing.expect("uniform runs are timed"), run.result))
}

/// The configured process with `rule` in place of its settle rule.
pub fn run_with_rule(
    graph: &Graph,
    origin: Vertex,
    rule: SettleRule,
    config: &RunConfig,
    seed: u64,
) -> Result<(Block, DispersionResult)> {
    let config = config.clone().with_rule(rule);
    let run = run(graph, origin, &config, seed)?;
    Ok((run.block, run.result))
}
