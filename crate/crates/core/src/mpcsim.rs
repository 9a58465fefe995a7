//! A deterministic, single-process simulator of the massively parallel
//! computation model.
//!
//! Machines hold a local share of the points and compute in synchronous
//! rounds. During a round every machine sees only its own state and the
//! messages delivered at the previous barrier; messages it emits are held
//! back until the barrier that ends the round. Communication is counted in
//! points (plus radius entries, separately) and every barrier checks the
//! per-machine memory budget.

use std::collections::BTreeSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::metric::{MetricInstance, PointId};

/// 1-based machine index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MachineId(pub usize);

impl MachineId {
    pub const FIRST: MachineId = MachineId(1);

    fn slot(self) -> usize {
        self.0 - 1
    }
}

impl fmt::Display for MachineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "M{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MpcError {
    #[error("machine {machine} holds {resident} points, budget is {budget} (round {round})")]
    MemoryExceeded {
        machine: MachineId,
        resident: usize,
        budget: usize,
        round: usize,
    },
    #[error("round limit of {limit} reached")]
    RoundLimitExceeded { limit: usize },
    #[error("invalid cluster configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),
    #[error("machine {machine} does not hold point {point}")]
    PayloadNotResident { machine: MachineId, point: PointId },
    #[error("no machine {0}")]
    UnknownMachine(MachineId),
}

pub const DEFAULT_ROUND_LIMIT: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Number of machines `L`.
    pub machines: usize,
    /// Per-machine memory budget `m`, in points.
    pub memory: usize,
    pub round_limit: usize,
}

impl ClusterConfig {
    pub fn new(machines: usize, memory: usize) -> Self {
        Self {
            machines,
            memory,
            round_limit: DEFAULT_ROUND_LIMIT,
        }
    }

    pub fn with_round_limit(mut self, round_limit: usize) -> Self {
        self.round_limit = round_limit;
        self
    }

    pub fn validate(&self) -> Result<(), MpcError> {
        if self.machines == 0 {
            return Err(MpcError::InvalidConfig(
                "at least one machine is required".into(),
            ));
        }
        if self.memory == 0 {
            return Err(MpcError::InvalidConfig(
                "memory budget must be positive".into(),
            ));
        }
        if self.round_limit == 0 {
            return Err(MpcError::InvalidConfig(
                "round limit must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Assignment of every point to exactly one machine.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    machines: usize,
    assignment: Vec<MachineId>,
}

impl Partition {
    /// Point `i` goes to machine `i mod L + 1`.
    pub fn round_robin(n: usize, machines: usize) -> Self {
        Self {
            machines,
            assignment: (0..n).map(|i| MachineId(i % machines.max(1) + 1)).collect(),
        }
    }

    /// Shuffle the points with a seeded generator, then deal them round-robin,
    /// so set sizes differ by at most one.
    pub fn seeded_random(n: usize, machines: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..n).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        let mut assignment = vec![MachineId(1); n];
        for (slot, &p) in order.iter().enumerate() {
            assignment[p] = MachineId(slot % machines.max(1) + 1);
        }
        Self {
            machines,
            assignment,
        }
    }

    /// Explicit map from point index to 1-based machine index.
    pub fn from_assignment(assignment: Vec<usize>, machines: usize) -> Result<Self, MpcError> {
        if let Some((p, &m)) = assignment
            .iter()
            .enumerate()
            .find(|(_, &m)| m == 0 || m > machines)
        {
            return Err(MpcError::InvalidPartition(format!(
                "point {p} assigned to machine {m}, expected 1..={machines}"
            )));
        }
        Ok(Self {
            machines,
            assignment: assignment.into_iter().map(MachineId).collect(),
        })
    }

    pub fn machines(&self) -> usize {
        self.machines
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    pub fn machine_of(&self, p: PointId) -> MachineId {
        self.assignment[p.0]
    }

    /// Point sets `S_1..S_L`, each in increasing id order.
    pub fn sets(&self) -> Vec<Vec<PointId>> {
        let mut sets = vec![Vec::new(); self.machines];
        for (i, m) in self.assignment.iter().enumerate() {
            sets[m.slot()].push(PointId(i));
        }
        sets
    }
}

/// Something a machine can send. Communication is charged by the points a
/// payload carries, plus any scalar entries (radii) it carries alongside.
pub trait Payload {
    fn point_ids(&self) -> Vec<PointId>;

    fn entry_count(&self) -> usize {
        0
    }
}

impl Payload for Vec<PointId> {
    fn point_ids(&self) -> Vec<PointId> {
        self.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Destination {
    Machine(MachineId),
    /// Every machine, the sender included.
    All,
}

/// Messages emitted by one machine during a round.
#[derive(Debug)]
pub struct Outbox<M> {
    sends: Vec<(Destination, M)>,
}

impl<M> Outbox<M> {
    fn new() -> Self {
        Self { sends: Vec::new() }
    }

    pub fn send(&mut self, to: MachineId, payload: M) {
        self.sends.push((Destination::Machine(to), payload));
    }

    pub fn broadcast(&mut self, payload: M) {
        self.sends.push((Destination::All, payload));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Delivery<M> {
    pub from: MachineId,
    pub payload: M,
}

/// Read-only view a machine computes against.
#[derive(Debug)]
pub struct MachineView<'a, M> {
    pub id: MachineId,
    /// The machine's input share `S_i`.
    pub local: &'a [PointId],
    /// Every point resident on the machine.
    pub held: &'a BTreeSet<PointId>,
    /// Messages delivered at the last barrier, ordered by sender.
    pub inbox: &'a [Delivery<M>],
}

#[derive(Debug, Clone, PartialEq)]
struct Machine<M> {
    id: MachineId,
    local: Vec<PointId>,
    held: BTreeSet<PointId>,
    inbox: Vec<Delivery<M>>,
}

impl<M> Machine<M> {
    fn view(&self) -> MachineView<'_, M> {
        MachineView {
            id: self.id,
            local: &self.local,
            held: &self.held,
            inbox: &self.inbox,
        }
    }
}

/// Order in which machine computations are evaluated within a round. The
/// choice must never be observable in the results.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Schedule {
    #[default]
    InOrder,
    /// Evaluate machines in this order of 0-based slots.
    Permuted(Vec<usize>),
    /// Evaluate machines concurrently on the rayon pool.
    Parallel,
}

impl Schedule {
    /// Seeded random evaluation order for `machines` machines.
    pub fn shuffled(machines: usize, seed: u64) -> Self {
        let mut order: Vec<usize> = (0..machines).collect();
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
        Schedule::Permuted(order)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MachineCounters {
    pub machine: MachineId,
    pub points_resident: usize,
    pub points_sent: usize,
    pub points_received: usize,
    pub entries_sent: usize,
    pub entries_received: usize,
    pub messages_sent: usize,
    pub messages_received: usize,
}

impl Default for MachineId {
    fn default() -> Self {
        MachineId::FIRST
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundTrace {
    /// 1-based round number.
    pub round: usize,
    pub label: String,
    pub machines: Vec<MachineCounters>,
    pub points_sent: usize,
    pub points_received: usize,
    pub entries_sent: usize,
    pub entries_received: usize,
    pub messages: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScatterSummary {
    pub sizes: Vec<usize>,
    /// `max |S_i| / min |S_i|`; absent when some machine is empty.
    pub balance: Option<f64>,
}

/// Serializable record of a whole simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterTrace {
    pub config: ClusterConfig,
    pub scatter: ScatterSummary,
    pub rounds: Vec<RoundTrace>,
}

impl ClusterTrace {
    pub fn points_communicated(&self) -> usize {
        self.rounds.iter().map(|r| r.points_sent).sum()
    }

    pub fn entries_communicated(&self) -> usize {
        self.rounds.iter().map(|r| r.entries_sent).sum()
    }

    pub fn peak_residency(&self) -> Vec<usize> {
        let mut peak = self.scatter.sizes.clone();
        for round in &self.rounds {
            for c in &round.machines {
                let slot = &mut peak[c.machine.slot()];
                *slot = (*slot).max(c.points_resident);
            }
        }
        peak
    }
}

/// Machine state between rounds, for comparing runs.
#[derive(Debug, Clone, PartialEq)]
pub struct MachineSnapshot<M> {
    pub id: MachineId,
    pub local: Vec<PointId>,
    pub held: Vec<PointId>,
    pub inbox: Vec<Delivery<M>>,
}

#[derive(Debug)]
pub struct Cluster<M> {
    config: ClusterConfig,
    machines: Vec<Machine<M>>,
    scatter: ScatterSummary,
    rounds: Vec<RoundTrace>,
    schedule: Schedule,
}

impl<M> Cluster<M>
where
    M: Payload + Clone + Send + Sync,
{
    /// Place `S_i` on machine `i`.
    pub fn scatter(
        instance: &MetricInstance,
        partition: &Partition,
        config: ClusterConfig,
    ) -> Result<Self, MpcError> {
        config.validate()?;
        if partition.len() != instance.len() {
            return Err(MpcError::InvalidPartition(format!(
                "partition covers {} points, instance has {}",
                partition.len(),
                instance.len()
            )));
        }
        if partition.machines() != config.machines {
            return Err(MpcError::InvalidPartition(format!(
                "partition uses {} machines, configuration has {}",
                partition.machines(),
                config.machines
            )));
        }
        let sets = partition.sets();
        let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
        for (slot, &size) in sizes.iter().enumerate() {
            if size > config.memory {
                return Err(MpcError::MemoryExceeded {
                    machine: MachineId(slot + 1),
                    resident: size,
                    budget: config.memory,
                    round: 0,
                });
            }
        }
        let (min, max) = (
            sizes.iter().copied().min().unwrap_or(0),
            sizes.iter().copied().max().unwrap_or(0),
        );
        let balance = (min > 0).then(|| max as f64 / min as f64);
        let machines = sets
            .into_iter()
            .enumerate()
            .map(|(slot, local)| Machine {
                id: MachineId(slot + 1),
                held: local.iter().copied().collect(),
                local,
                inbox: Vec::new(),
            })
            .collect();
        Ok(Self {
            config,
            machines,
            scatter: ScatterSummary { sizes, balance },
            rounds: Vec::new(),
            schedule: Schedule::InOrder,
        })
    }

    pub fn with_schedule(mut self, schedule: Schedule) -> Self {
        self.schedule = schedule;
        self
    }

    pub fn config(&self) -> &ClusterConfig {
        &self.config
    }

    pub fn machine_count(&self) -> usize {
        self.machines.len()
    }

    pub fn machine(&self, id: MachineId) -> Result<MachineView<'_, M>, MpcError> {
        self.machines
            .get(id.0.wrapping_sub(1))
            .map(Machine::view)
            .ok_or(MpcError::UnknownMachine(id))
    }

    pub fn rounds(&self) -> &[RoundTrace] {
        &self.rounds
    }

    pub fn trace(&self) -> ClusterTrace {
        ClusterTrace {
            config: self.config.clone(),
            scatter: self.scatter.clone(),
            rounds: self.rounds.clone(),
        }
    }

    pub fn snapshot(&self) -> Vec<MachineSnapshot<M>> {
        self.machines
            .iter()
            .map(|m| MachineSnapshot {
                id: m.id,
                local: m.local.clone(),
                held: m.held.iter().copied().collect(),
                inbox: m.inbox.clone(),
            })
            .collect()
    }

    fn evaluate<O, F>(&self, compute: &F) -> Result<Vec<(O, Outbox<M>)>, MpcError>
    where
        O: Send,
        F: Fn(&MachineView<'_, M>, &mut Outbox<M>) -> O + Sync,
    {
        let run = |m: &Machine<M>| {
            let mut outbox = Outbox::new();
            let out = compute(&m.view(), &mut outbox);
            (out, outbox)
        };
        Ok(match &self.schedule {
            Schedule::InOrder => self.machines.iter().map(run).collect(),
            Schedule::Parallel => self.machines.par_iter().map(run).collect(),
            Schedule::Permuted(order) => {
                let l = self.machines.len();
                let mut seen = vec![false; l];
                if order.len() != l
                    || order
                        .iter()
                        .any(|&s| s >= l || std::mem::replace(&mut seen[s], true))
                {
                    return Err(MpcError::InvalidSchedule(format!(
                        "{order:?} is not a permutation of 0..{l}"
                    )));
                }
                let mut slots: Vec<Option<(O, Outbox<M>)>> = (0..l).map(|_| None).collect();
                for &s in order {
                    slots[s] = Some(run(&self.machines[s]));
                }
                slots
                    .into_iter()
                    .map(|s| s.expect("every slot evaluated"))
                    .collect()
            }
        })
    }

    /// Run one synchronous round: evaluate every machine against the current
    /// state, then deliver all emitted messages at the barrier. Outputs are
    /// returned in machine order.
    pub fn run_round<O, F>(&mut self, label: &str, compute: F) -> Result<Vec<O>, MpcError>
    where
        O: Send,
        F: Fn(&MachineView<'_, M>, &mut Outbox<M>) -> O + Sync,
    {
        if self.rounds.len() >= self.config.round_limit {
            return Err(MpcError::RoundLimitExceeded {
                limit: self.config.round_limit,
            });
        }
        let results = self.evaluate(&compute)?;
        let l = self.machines.len();
        let (outputs, outboxes): (Vec<O>, Vec<Outbox<M>>) = results.into_iter().unzip();

        for outbox in &outboxes {
            for (dest, _) in &outbox.sends {
                if let Destination::Machine(to) = dest {
                    if to.0 == 0 || to.0 > l {
                        return Err(MpcError::UnknownMachine(*to));
                    }
                }
            }
        }

        let round = self.rounds.len() + 1;
        let mut counters: Vec<MachineCounters> = self
            .machines
            .iter()
            .map(|m| MachineCounters {
                machine: m.id,
                ..Default::default()
            })
            .collect();
        let mut inboxes: Vec<Vec<Delivery<M>>> = (0..l).map(|_| Vec::new()).collect();
        for (slot, outbox) in outboxes.into_iter().enumerate() {
            let from = MachineId(slot + 1);
            for (dest, payload) in outbox.sends {
                let points = payload.point_ids().len();
                let entries = payload.entry_count();
                let targets: Vec<usize> = match dest {
                    Destination::All => (0..l).collect(),
                    Destination::Machine(to) => vec![to.slot()],
                };
                for t in targets {
                    counters[slot].points_sent += points;
                    counters[slot].entries_sent += entries;
                    counters[slot].messages_sent += 1;
                    counters[t].points_received += points;
                    counters[t].entries_received += entries;
                    counters[t].messages_received += 1;
                    inboxes[t].push(Delivery {
                        from,
                        payload: payload.clone(),
                    });
                }
            }
        }

        let mut overflow = None;
        for ((machine, inbox), counter) in self.machines.iter_mut().zip(inboxes).zip(&mut counters)
        {
            for d in &inbox {
                machine.held.extend(d.payload.point_ids());
            }
            machine.inbox = inbox;
            counter.points_resident = machine.held.len();
            if overflow.is_none() && machine.held.len() > self.config.memory {
                overflow = Some(MpcError::MemoryExceeded {
                    machine: machine.id,
                    resident: machine.held.len(),
                    budget: self.config.memory,
                    round,
                });
            }
        }

        let sum = |f: fn(&MachineCounters) -> usize| counters.iter().map(f).sum::<usize>();
        let trace = RoundTrace {
            round,
            label: label.to_string(),
            points_sent: sum(|c| c.points_sent),
            points_received: sum(|c| c.points_received),
            entries_sent: sum(|c| c.entries_sent),
            entries_received: sum(|c| c.entries_received),
            messages: sum(|c| c.messages_sent),
            machines: counters,
        };
        debug_assert_eq!(trace.points_sent, trace.points_received);
        self.rounds.push(trace);
        match overflow {
            Some(err) => Err(err),
            None => Ok(outputs),
        }
    }

    /// One round in which `from` sends `payload` to every machine.
    pub fn broadcast(&mut self, label: &str, from: MachineId, payload: M) -> Result<(), MpcError> {
        let source = self.machine(from)?;
        if let Some(p) = payload
            .point_ids()
            .into_iter()
            .find(|p| !source.held.contains(p))
        {
            return Err(MpcError::PayloadNotResident {
                machine: from,
                point: p,
            });
        }
        self.run_round(label, |view, out| {
            if view.id == from {
                out.broadcast(payload.clone());
            }
        })?;
        Ok(())
    }
}
