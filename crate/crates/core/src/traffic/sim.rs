use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, HashMap};
use std::sync::Arc;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::trace::{Delivery, LedgerEntry, Trace, TraceEvent};
use super::{Endpoint, LinkId, Population, Topology};
use crate::error::{Error, Result};
use crate::mix::{Message, MessageId, MixNode, ProvenanceTracker, UserId, VirtualTime};
use crate::seed;

/// A transmission waiting to happen.
#[derive(Debug)]
struct Pending {
    time: VirtualTime,
    hop: usize,
    seq: u64,
    msg: Message,
    link: LinkId,
    to: Endpoint,
    /// Sender provenance carried by the message. `None` means a point mass
    /// on the true sender (the message has only crossed corrupt nodes).
    dist: Option<Arc<[f64]>>,
    /// Poisson node the message is leaving; provenance is resolved when the
    /// departure is processed.
    departs: Option<(usize, usize)>,
}

impl Pending {
    fn key(&self) -> (VirtualTime, usize, u64) {
        (self.time, self.hop, self.seq)
    }
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        let (a, b) = (self.key(), other.key());
        b.0.total_cmp(&a.0).then(b.1.cmp(&a.1)).then(b.2.cmp(&a.2))
    }
}

/// Burn-in length: `base` seconds plus a uniform extra in `1..=jitter`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BurnIn {
    pub base: u64,
    pub jitter: u64,
}

impl Default for BurnIn {
    fn default() -> Self {
        BurnIn { base: 4096, jitter: 4096 }
    }
}

impl BurnIn {
    pub fn sample_length<R: Rng>(&self, rng: &mut R) -> u64 {
        if self.jitter == 0 {
            self.base
        } else {
            self.base + rng.random_range(1..=self.jitter)
        }
    }
}

/// Discrete-event simulator of users sending through a layered mix network.
///
/// Time advances in whole seconds; within a second every unmuted user sends
/// to their contact with probability equal to their rate. Transmissions are
/// processed in `(time, hop, emission order)` order, which is also the
/// order of the recorded trace.
pub struct Simulator {
    topology: Topology,
    population: Population,
    nodes: Vec<Vec<MixNode>>,
    trackers: Vec<Vec<Option<ProvenanceTracker>>>,
    queue: BinaryHeap<Pending>,
    routes: HashMap<MessageId, Box<[usize]>>,
    muted: Vec<bool>,
    send_rng: ChaCha8Rng,
    route_rng: ChaCha8Rng,
    clock: u64,
    next_msg: u64,
    next_seq: u64,
    sent: u64,
    delivered: u64,
    recording: Option<Recorder>,
}

struct Recorder {
    trace: Trace,
    ledger: BTreeMap<MessageId, LedgerEntry>,
}

impl Simulator {
    pub fn new(topology: Topology, population: Population, seed: u64) -> Result<Self> {
        population.validate()?;
        if population.len() != topology.users() {
            return Err(Error::config(format!(
                "topology has {} users, population {}",
                topology.users(),
                population.len()
            )));
        }
        let users = population.len();
        let mut nodes = Vec::new();
        let mut trackers = Vec::new();
        for (l, layer) in topology.layers().iter().enumerate() {
            let mut ns = Vec::new();
            let mut ts = Vec::new();
            for (i, spec) in layer.iter().enumerate() {
                let s = seed::derive(seed, &["node", &l.to_string(), &i.to_string()]);
                ns.push(MixNode::new(spec.strategy, spec.honest, s)?);
                ts.push(spec.honest.then(|| ProvenanceTracker::new(spec.strategy, users)));
            }
            nodes.push(ns);
            trackers.push(ts);
        }
        Ok(Simulator {
            muted: vec![false; users],
            topology,
            population,
            nodes,
            trackers,
            queue: BinaryHeap::new(),
            routes: HashMap::new(),
            send_rng: seed::rng(seed::derive(seed, &["sends"])),
            route_rng: seed::rng(seed::derive(seed, &["routes"])),
            clock: 0,
            next_msg: 0,
            next_seq: 0,
            sent: 0,
            delivered: 0,
            recording: None,
        })
    }

    pub fn topology(&self) -> &Topology {
        &self.topology
    }

    pub fn population(&self) -> &Population {
        &self.population
    }

    pub fn population_mut(&mut self) -> &mut Population {
        &mut self.population
    }

    /// Current virtual time (start of the next second to simulate).
    pub fn now(&self) -> VirtualTime {
        self.clock as f64
    }

    pub fn set_muted(&mut self, u: UserId, muted: bool) {
        self.muted[u.index()] = muted;
    }

    pub fn node(&self, layer: usize, index: usize) -> &MixNode {
        &self.nodes[layer][index]
    }

    pub fn nodes(&self) -> impl Iterator<Item = &MixNode> {
        self.nodes.iter().flatten()
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }

    pub fn delivered(&self) -> u64 {
        self.delivered
    }

    /// Messages still in flight in the scheduler (not held by a node).
    pub fn in_transit(&self) -> usize {
        self.queue.iter().filter(|p| p.departs.is_none()).count()
    }

    pub fn is_recording(&self) -> bool {
        self.recording.is_some()
    }

    /// Events recorded so far.
    pub fn recorded_events(&self) -> usize {
        self.recording.as_ref().map_or(0, |r| r.trace.events.len())
    }

    /// Starts recording the trace; returns the current time.
    pub fn start_recording(&mut self) -> VirtualTime {
        let start = self.now();
        self.recording = Some(Recorder {
            trace: Trace { start, end: start, ..Trace::default() },
            ledger: BTreeMap::new(),
        });
        start
    }

    /// Stops recording and returns the trace.
    pub fn finish(&mut self) -> Trace {
        let now = self.now();
        match self.recording.take() {
            Some(mut r) => {
                r.trace.end = now;
                r.trace.ledger = r.ledger.into_values().collect();
                r.trace
            }
            None => Trace { start: now, end: now, ..Trace::default() },
        }
    }

    /// Simulates one second.
    pub fn step(&mut self) -> Result<()> {
        let t = self.clock as f64;
        for u in 0..self.population.len() {
            let user = UserId(u as u32);
            let rate = self.population.rate(user);
            if self.muted[u] || rate <= 0.0 {
                continue;
            }
            if self.send_rng.random::<f64>() < rate {
                self.send(user, t);
            }
        }
        let horizon = t + 1.0;
        while self.queue.peek().is_some_and(|p| p.time < horizon) {
            let p = self.queue.pop().expect("peeked");
            self.process(p)?;
        }
        self.clock += 1;
        Ok(())
    }

    pub fn run_for(&mut self, seconds: u64) -> Result<()> {
        for _ in 0..seconds {
            self.step()?;
        }
        Ok(())
    }

    /// Steps until at least `events` transmissions are recorded, giving up
    /// after `max_seconds`.
    pub fn run_until_events(&mut self, events: usize, max_seconds: u64) -> Result<()> {
        let limit = self.clock + max_seconds;
        while self.recorded_events() < events {
            if self.clock >= limit {
                return Err(Error::Insufficient(format!(
                    "only {} of {events} events after {max_seconds}s",
                    self.recorded_events()
                )));
            }
            self.step()?;
        }
        Ok(())
    }

    /// Removes and returns every message still held by a node.
    pub fn drain(&mut self) -> Vec<Message> {
        self.nodes.iter_mut().flatten().flat_map(|n| n.drain()).collect()
    }

    fn send(&mut self, sender: UserId, t: VirtualTime) {
        let recipient = self.population.contact(sender);
        let msg = Message {
            id: MessageId(self.next_msg),
            sender,
            recipient,
            ingress_time: t,
        };
        self.next_msg += 1;
        self.sent += 1;
        let route: Box<[usize]> = self
            .topology
            .layers()
            .iter()
            .map(|l| if l.len() == 1 { 0 } else { self.route_rng.random_range(0..l.len()) })
            .collect();
        let to = Endpoint::Node { layer: 0, index: route[0] };
        let link = self
            .topology
            .links()
            .id(Endpoint::User(sender), to)
            .expect("uplink exists");
        self.routes.insert(msg.id, route);
        self.schedule(t, 0, msg, link, to, None, None);
    }

    #[allow(clippy::too_many_arguments)]
    fn schedule(
        &mut self,
        time: VirtualTime,
        hop: usize,
        msg: Message,
        link: LinkId,
        to: Endpoint,
        dist: Option<Arc<[f64]>>,
        departs: Option<(usize, usize)>,
    ) {
        let seq = self.next_seq;
        self.next_seq += 1;
        self.queue.push(Pending { time, hop, seq, msg, link, to, dist, departs });
    }

    /// Where a message leaving node `(layer, index)` goes next.
    fn next_hop(&self, msg: &Message, layer: usize, index: usize) -> (Endpoint, LinkId) {
        let from = Endpoint::Node { layer, index };
        let to = if layer + 1 < self.topology.layers().len() {
            Endpoint::Node { layer: layer + 1, index: self.routes[&msg.id][layer + 1] }
        } else {
            Endpoint::User(msg.recipient)
        };
        (to, self.topology.links().id(from, to).expect("link exists"))
    }

    fn process(&mut self, mut p: Pending) -> Result<()> {
        if let Some((l, i)) = p.departs {
            self.nodes[l][i].depart(p.msg.id).ok_or_else(|| {
                Error::NoFeasibleInput(format!("{:?} departs node {l}.{i} it is not in", p.msg.id))
            })?;
            let tracker = self.trackers[l][i].as_mut().expect("poisson departures only from honest nodes");
            p.dist = Some(tracker.release(p.time)?);
        }

        let event_index = if let Some(rec) = self.recording.as_mut() {
            rec.trace.events.push(TraceEvent { time: p.time, link: p.link, msg: p.msg.id });
            let route = &self.routes[&p.msg.id];
            rec.ledger.entry(p.msg.id).or_insert_with(|| LedgerEntry {
                msg: p.msg,
                route: route.to_vec(),
                delivered_at: None,
            });
            Some(rec.trace.events.len() - 1)
        } else {
            None
        };

        match p.to {
            Endpoint::User(_) => {
                self.delivered += 1;
                self.routes.remove(&p.msg.id);
                if let (Some(rec), Some(event)) = (self.recording.as_mut(), event_index) {
                    if let Some(e) = rec.ledger.get_mut(&p.msg.id) {
                        e.delivered_at = Some(p.time);
                    }
                    let posterior = match p.dist {
                        Some(d) => d,
                        None => {
                            let mut v = vec![0.0; self.population.len()];
                            v[p.msg.sender.index()] = 1.0;
                            v.into()
                        }
                    };
                    rec.trace.deliveries.push(Delivery { event, time: p.time, msg: p.msg, posterior });
                }
            }
            Endpoint::Node { layer, index } => {
                if let Some(tracker) = self.trackers[layer][index].as_mut() {
                    match &p.dist {
                        Some(d) => tracker.ingest(d, p.time),
                        None => tracker.ingest_user(p.msg.sender.index(), p.time),
                    }
                }
                let out = self.nodes[layer][index].ingest(p.msg, p.time);
                let node = &self.nodes[layer][index];
                let (honest, batching) = (node.is_honest(), node.strategy().batch().is_some());
                let hop = p.hop + 1;
                if !honest {
                    // FIFO: the adversary follows the message straight through
                    for e in out {
                        let (to, link) = self.next_hop(&e.msg, layer, index);
                        self.schedule(e.time, hop, e.msg, link, to, p.dist.clone(), None);
                    }
                } else if batching {
                    if !out.is_empty() {
                        let tracker = self.trackers[layer][index].as_mut().expect("honest");
                        let post = tracker.flush(out.len())?;
                        for e in out {
                            let (to, link) = self.next_hop(&e.msg, layer, index);
                            self.schedule(e.time, hop, e.msg, link, to, Some(post.clone()), None);
                        }
                    }
                } else {
                    for e in out {
                        let (to, link) = self.next_hop(&e.msg, layer, index);
                        self.schedule(e.time, hop, e.msg, link, to, None, Some((layer, index)));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Runs the warm-up phase: `burn.base + U{1..burn.jitter}` seconds of
/// traffic with the simulator's current muting. Returns the burn-in length.
pub fn run_burn_in(sim: &mut Simulator, burn: &BurnIn, seed: u64) -> Result<u64> {
    let mut rng = seed::rng(seed::derive(seed, &["burn-in"]));
    let len = burn.sample_length(&mut rng);
    sim.run_for(len)?;
    Ok(len)
}

/// Occupancy of node `(0, 0)` at the end of each of the first `seconds`
/// seconds, starting from empty buffers.
pub fn occupancy_series(topology: &Topology, population: &Population, seconds: u64, seed: u64) -> Result<Vec<usize>> {
    let mut sim = Simulator::new(topology.clone(), population.clone(), seed)?;
    let mut out = Vec::with_capacity(seconds as usize);
    for _ in 0..seconds {
        sim.step()?;
        out.push(sim.node(0, 0).occupancy());
    }
    Ok(out)
}

/// Burns in a fresh network and records `duration` seconds of traffic.
pub fn simulate(
    topology: &Topology,
    population: &Population,
    duration: u64,
    burn: &BurnIn,
    seed: u64,
) -> Result<Trace> {
    if duration == 0 {
        return Err(Error::config("duration must be positive"));
    }
    let mut sim = Simulator::new(topology.clone(), population.clone(), seed)?;
    run_burn_in(&mut sim, burn, seed)?;
    sim.start_recording();
    sim.run_for(duration)?;
    Ok(sim.finish())
}
