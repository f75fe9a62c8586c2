//! The "one of two" sender game: the challenger picks two suspects and a
//! recipient, flips a bit, lets the chosen suspect talk to the recipient
//! while everyone else behaves normally, and hands the adversary the
//! encoded link trace.

use std::ops::Range;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attacker::BeliefState;
use crate::encoding::{encode, mask_region, TokenSequence, Window, SEQUENCE_LENGTHS};
use crate::error::{Error, Result};
use crate::metrics::anonymity::{entropy_bits, epsilon};
use crate::metrics::{GroupSamples, Summary};
use crate::mix::{MixStrategy, UserId};
use crate::seed;
use crate::traffic::{assign_contacts, run_burn_in, BurnIn, Endpoint, NodeSpec, Population, Simulator, Topology};

/// Node layout. Every node runs the game's strategy; nodes listed in
/// `corrupt` forward in FIFO order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TopologyConfig {
    /// Nodes per layer.
    pub layers: Vec<usize>,
    /// `[layer, index]` of corrupt nodes.
    pub corrupt: Vec<[usize; 2]>,
}

impl Default for TopologyConfig {
    fn default() -> Self {
        TopologyConfig { layers: vec![1], corrupt: Vec::new() }
    }
}

impl TopologyConfig {
    pub fn build(&self, users: usize, strategy: MixStrategy) -> Result<Topology> {
        for &[l, i] in &self.corrupt {
            if self.layers.get(l).is_none_or(|&n| i >= n) {
                return Err(Error::config(format!("corrupt node [{l}, {i}] is not in the topology")));
            }
        }
        let layers = self
            .layers
            .iter()
            .enumerate()
            .map(|(l, &n)| {
                (0..n)
                    .map(|i| NodeSpec { strategy, honest: !self.corrupt.contains(&[l, i]) })
                    .collect()
            })
            .collect();
        Topology::new(users, layers)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GameConfig {
    pub users: usize,
    /// Per-user sending probability per second.
    pub rate: f64,
    pub strategy: MixStrategy,
    pub topology: TopologyConfig,
    /// Observation length in events; also the token sequence length.
    pub seq_len: usize,
    pub burn_in: BurnIn,
    /// Forbid background users from sending to the recipient.
    pub strict: bool,
}

impl Default for GameConfig {
    fn default() -> Self {
        GameConfig {
            users: 100,
            rate: 0.01,
            strategy: MixStrategy::threshold(100),
            topology: TopologyConfig::default(),
            seq_len: 4096,
            burn_in: BurnIn::default(),
            strict: false,
        }
    }
}

impl GameConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users < 3 {
            return Err(Error::TooFewUsers(self.users));
        }
        if !SEQUENCE_LENGTHS.contains(&self.seq_len) {
            return Err(Error::BadLength(self.seq_len));
        }
        self.strategy.validate()?;
        Population::uniform(self.users, self.rate)?.validate()?;
        self.topology.build(self.users, self.strategy)?.check_anytrust()
    }
}

/// What the adversary learns about one message delivered inside the
/// observation, plus whether it really came from the true sender.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeliveryRecord {
    /// Event index of the final hop.
    pub position: usize,
    pub from_true_sender: bool,
    pub p0: f64,
    pub p1: f64,
    pub entropy: f64,
}

/// Ground truth and adversary posteriors for one round, keyed by event
/// position so any sub-window can be scored.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct SampleLedger {
    /// Deliveries to the recipient.
    pub target: Vec<DeliveryRecord>,
    /// Positions of the true sender's first-hop transmissions.
    pub true_sender_ingress: Vec<usize>,
    /// Positions and sender entropies of every delivery.
    pub delivery_positions: Vec<usize>,
    pub delivery_entropy: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameInstance {
    pub seed: u64,
    pub suspects: (UserId, UserId),
    pub recipient: UserId,
    pub b: u8,
    pub burn_in: u64,
    pub observation: TokenSequence,
    pub ledger: SampleLedger,
}

impl GameInstance {
    pub fn true_sender(&self) -> UserId {
        if self.b == 0 { self.suspects.0 } else { self.suspects.1 }
    }

    pub fn messages_from_true_sender(&self) -> usize {
        self.ledger.true_sender_ingress.len()
    }
}

/// Three distinct users drawn uniformly, redrawing on collision.
fn pick_roles<R: Rng>(users: usize, rng: &mut R) -> (UserId, UserId, UserId) {
    loop {
        let a0 = rng.random_range(0..users);
        let a1 = rng.random_range(0..users);
        let b = rng.random_range(0..users);
        if a0 != a1 && a1 != b && a0 != b {
            return (UserId(a0 as u32), UserId(a1 as u32), UserId(b as u32));
        }
    }
}

/// Plays one round of the game.
pub fn play_round(config: &GameConfig, seed: u64) -> Result<GameInstance> {
    config.validate()?;
    let mut rng = seed::rng(seed::derive(seed, &["game"]));
    let population = assign_contacts(Population::uniform(config.users, config.rate)?, seed::derive(seed, &["contacts"]))?;
    let (a0, a1, target) = pick_roles(config.users, &mut rng);
    let b = u8::from(rng.random_bool(0.5));
    let (sender, other) = if b == 0 { (a0, a1) } else { (a1, a0) };

    let topology = config.topology.build(config.users, config.strategy)?;
    topology.check_anytrust()?;
    let mut sim = Simulator::new(topology, population, seed::derive(seed, &["sim"]))?;
    {
        let pop = sim.population_mut();
        pop.set_contact(sender, target);
        if pop.contact(other) == target {
            let c = pop.draw_other(&mut rng, &[other, target]);
            pop.set_contact(other, c);
        }
        if config.strict {
            for u in 0..config.users {
                let u = UserId(u as u32);
                if u != sender && pop.contact(u) == target {
                    let c = pop.draw_other(&mut rng, &[u, target]);
                    pop.set_contact(u, c);
                }
            }
        }
    }

    sim.set_muted(a0, true);
    sim.set_muted(a1, true);
    let burn_in = run_burn_in(&mut sim, &config.burn_in, seed)?;
    sim.set_muted(a0, false);
    sim.set_muted(a1, false);
    sim.start_recording();
    // a generous cap: the expected time is about seq_len / (hops * rate * users)
    let cap = (config.seq_len as f64 / (config.rate * config.users as f64)).ceil() as u64 * 20 + 1000;
    sim.run_until_events(config.seq_len, cap)?;
    let trace = sim.finish();

    let links = sim.topology().links();
    let observation = encode(&trace, Window::new(0, config.seq_len), config.seq_len, links)?;

    let mut ledger = SampleLedger::default();
    for (pos, ev) in trace.events[..config.seq_len].iter().enumerate() {
        let link = links.link(ev.link).expect("recorded link exists");
        if link.from == Endpoint::User(sender) {
            ledger.true_sender_ingress.push(pos);
        }
    }
    for d in trace.deliveries.iter().filter(|d| d.event < config.seq_len) {
        let h = entropy_bits(&d.posterior);
        ledger.delivery_positions.push(d.event);
        ledger.delivery_entropy.push(h);
        if d.recipient() == target {
            ledger.target.push(DeliveryRecord {
                position: d.event,
                from_true_sender: d.msg.sender == sender,
                p0: d.posterior[a0.index()],
                p1: d.posterior[a1.index()],
                entropy: h,
            });
        }
    }
    Ok(GameInstance {
        seed,
        suspects: (a0, a1),
        recipient: target,
        b,
        burn_in,
        observation,
        ledger,
    })
}

/// Attack statistics for one round restricted to a window of the trace.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct WindowOutcome {
    pub belief_log_odds: f64,
    pub guess: u8,
    pub messages: usize,
    pub epsilon: Vec<f64>,
    pub epsilon_excluded: usize,
    pub entropy_suspect: Vec<f64>,
    pub entropy_all: Vec<f64>,
}

/// Runs the baseline attacker on the deliveries inside `region`.
pub fn evaluate_window<R: Rng>(
    inst: &GameInstance,
    region: Range<usize>,
    rng: &mut R,
) -> WindowOutcome {
    let mut belief = BeliefState::new(inst.suspects, inst.recipient);
    let mut out = WindowOutcome::default();
    for d in inst.ledger.target.iter().filter(|d| region.contains(&d.position)) {
        belief.update_probs(d.p0, d.p1);
        match epsilon(d.p0, d.p1) {
            Ok(e) => out.epsilon.push(e),
            Err(_) => out.epsilon_excluded += 1,
        }
        if d.from_true_sender {
            out.entropy_suspect.push(d.entropy);
        }
    }
    for (p, h) in inst.ledger.delivery_positions.iter().zip(&inst.ledger.delivery_entropy) {
        if region.contains(p) {
            out.entropy_all.push(*h);
        }
    }
    out.messages = inst.ledger.true_sender_ingress.iter().filter(|p| region.contains(p)).count();
    out.belief_log_odds = belief.log_odds;
    out.guess = belief.decide(rng);
    out
}

/// Scores each instance at observation length `length` using a random
/// region per instance (the full sequence when `length` equals it), and
/// collects the result into one report group.
pub fn masked_group(instances: &[GameInstance], config: &str, length: usize, seed: u64) -> Result<GroupSamples> {
    let mut g = GroupSamples::new(config, length);
    for inst in instances {
        let mut rng = seed::rng(seed::derive(seed, &["mask", &inst.seed.to_string(), &length.to_string()]));
        let region = mask_region(inst.observation.len(), length, &mut rng)?;
        let o = evaluate_window(inst, region, &mut rng);
        g.correct.push(o.guess == inst.b);
        g.messages.push(o.messages as f64);
        if !o.epsilon.is_empty() {
            g.epsilon_rounds.push(Summary::of(&o.epsilon).mean);
        }
        if !o.entropy_suspect.is_empty() {
            g.entropy_rounds.push(Summary::of(&o.entropy_suspect).mean);
        }
        g.epsilon.extend(o.epsilon);
        g.epsilon_excluded += o.epsilon_excluded;
        g.entropy_suspect.extend(o.entropy_suspect);
        g.entropy_all.extend(o.entropy_all);
    }
    Ok(g)
}

/// Plays `rounds` independent rounds in parallel; round `i` uses a seed
/// derived from `(seed, label, i)`.
pub fn play_rounds(config: &GameConfig, rounds: usize, label: &str, seed: u64) -> Result<Vec<GameInstance>> {
    (0..rounds)
        .into_par_iter()
        .map(|i| play_round(config, seed::derive_indexed(seed, label, i as u64)))
        .collect()
}

/// Fraction of predictions that match the labels.
pub fn score_adversary(predictions: &[u8], labels: &[u8]) -> Result<f64> {
    if predictions.len() != labels.len() {
        return Err(Error::LengthMismatch(predictions.len(), labels.len()));
    }
    if labels.is_empty() {
        return Err(Error::Insufficient("no predictions".into()));
    }
    let hits = predictions.iter().zip(labels).filter(|(p, l)| p == l).count();
    Ok(hits as f64 / labels.len() as f64)
}
