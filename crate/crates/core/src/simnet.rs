//! Deterministic discrete-event fabric: a logical clock, a priority event
//! queue, and a message network with seeded latencies, per-channel FIFO,
//! priority classes, and optional drop injection.
//!
//! Time is a 64-bit counter in milliunits: 1 simulated time unit = 1000
//! ticks. One unit corresponds loosely to the paper-scale network round trip
//! budget; nothing couples it to wall-clock time.
//!
//! Determinism contract: with the same seed, config, and workload, the
//! sequence of popped events is bit-identical. Everything that orders events
//! is derived from (delivery time, priority class, insertion sequence).

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::types::NodeId;

/// Simulated time in milliunits.
pub type Time = u64;

/// Ticks per simulated time unit.
pub const UNIT: Time = 1000;

/// Convert a duration expressed in simulated units to ticks.
pub fn units(u: f64) -> Time {
    (u * UNIT as f64).round() as Time
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum LatencyModel {
    /// Every message takes exactly `value` units.
    Fixed { value: f64 },
    /// Uniform in [min, max] units.
    Uniform { min: f64, max: f64 },
    /// exp(mu + sigma * z) units, z standard normal.
    Lognormal { mu: f64, sigma: f64 },
}

impl Default for LatencyModel {
    fn default() -> Self {
        LatencyModel::Uniform { min: 0.05, max: 0.15 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimConfig {
    pub seed: u64,
    #[serde(default)]
    pub latency: LatencyModel,
    /// Probability that a message is silently dropped. Default 0: channels
    /// are reliable, as the protocol assumes.
    #[serde(default)]
    pub drop_rate: f64,
    /// Deliver higher-priority classes first among events scheduled for the
    /// same instant. Never reorders within a class.
    #[serde(default = "default_true")]
    pub priority_preemption: bool,
}

fn default_true() -> bool {
    true
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            seed: 0,
            latency: LatencyModel::default(),
            drop_rate: 0.0,
            priority_preemption: true,
        }
    }
}

/// A scheduled entry. Ordering: time, then priority class (when preemption
/// is on), then insertion sequence. The sequence also preserves send order
/// for same-instant, same-class events.
struct Scheduled<E> {
    time: Time,
    class: u8,
    seq: u64,
    event: E,
}

/// Min-heap of pending events.
pub struct EventQueue<E> {
    heap: BinaryHeap<Reverse<HeapKey>>,
    slots: BTreeMap<u64, Scheduled<E>>,
    seq: u64,
    now: Time,
    preemption: bool,
}

#[derive(PartialEq, Eq, PartialOrd, Ord)]
struct HeapKey {
    time: Time,
    class: u8,
    seq: u64,
}

impl<E> EventQueue<E> {
    pub fn new(preemption: bool) -> Self {
        EventQueue {
            heap: BinaryHeap::new(),
            slots: BTreeMap::new(),
            seq: 0,
            now: 0,
            preemption,
        }
    }

    pub fn now(&self) -> Time {
        self.now
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }

    /// Schedule `event` at absolute time `time` with a priority class.
    pub fn push_at(&mut self, time: Time, class: u8, event: E) {
        assert!(time >= self.now, "cannot schedule into the past");
        let seq = self.seq;
        self.seq += 1;
        let class_key = if self.preemption { class } else { 0 };
        self.heap.push(Reverse(HeapKey { time, class: class_key, seq }));
        self.slots.insert(seq, Scheduled { time, class, seq, event });
    }

    pub fn pop(&mut self) -> Option<(Time, E)> {
        let Reverse(key) = self.heap.pop()?;
        let slot = self.slots.remove(&key.seq).expect("heap/slot desync");
        debug_assert_eq!(slot.time, key.time);
        self.now = slot.time;
        Some((slot.time, slot.event))
    }
}

/// Message network: samples latencies, preserves per-(from, to, class) FIFO,
/// and injects drops when configured.
pub struct Network {
    cfg: SimConfig,
    rng: ChaCha8Rng,
    /// Last scheduled delivery per channel and class; deliveries are clamped
    /// to be non-decreasing so a class never reorders internally.
    last_delivery: BTreeMap<(NodeId, NodeId, u8), Time>,
    pub sent: u64,
    pub dropped: u64,
}

impl Network {
    pub fn new(cfg: SimConfig) -> Self {
        let rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x6e65_7477_6f72_6b);
        Network { cfg, rng, last_delivery: BTreeMap::new(), sent: 0, dropped: 0 }
    }

    fn sample_latency(&mut self) -> Time {
        match self.cfg.latency {
            LatencyModel::Fixed { value } => units(value),
            LatencyModel::Uniform { min, max } => {
                let x: f64 = self.rng.gen_range(min..=max);
                units(x)
            }
            LatencyModel::Lognormal { mu, sigma } => {
                // Box-Muller from two uniforms.
                let u1: f64 = self.rng.gen_range(f64::EPSILON..1.0);
                let u2: f64 = self.rng.gen_range(0.0..1.0);
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                units((mu + sigma * z).exp())
            }
        }
    }

    /// Compute the delivery time for a message sent now, or None if the
    /// message is dropped. Local (self) delivery is immediate and lossless.
    pub fn delivery_time(
        &mut self,
        now: Time,
        from: NodeId,
        to: NodeId,
        class: u8,
    ) -> Option<Time> {
        self.sent += 1;
        if from != to && self.cfg.drop_rate > 0.0 {
            let x: f64 = self.rng.gen();
            if x < self.cfg.drop_rate {
                self.dropped += 1;
                return None;
            }
        }
        let latency = if from == to { 0 } else { self.sample_latency() };
        let slot = self.last_delivery.entry((from, to, class)).or_insert(0);
        let at = (now + latency).max(*slot);
        *slot = at;
        Some(at)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_latency_delivers_one_unit_later() {
        let mut net = Network::new(SimConfig {
            seed: 1,
            latency: LatencyModel::Fixed { value: 1.0 },
            ..SimConfig::default()
        });
        assert_eq!(net.delivery_time(5 * UNIT, 0, 1, 3), Some(6 * UNIT));
    }

    #[test]
    fn same_channel_same_class_preserves_send_order() {
        let mut net = Network::new(SimConfig {
            seed: 7,
            latency: LatencyModel::Uniform { min: 0.0, max: 5.0 },
            ..SimConfig::default()
        });
        let mut queue: EventQueue<u32> = EventQueue::new(true);
        let mut deliveries = Vec::new();
        for i in 0..50u32 {
            let at = net.delivery_time(0, 0, 1, 3).unwrap();
            queue.push_at(at, 3, i);
            deliveries.push(at);
        }
        // Clamped to non-decreasing delivery times.
        for w in deliveries.windows(2) {
            assert!(w[0] <= w[1]);
        }
        let mut order = Vec::new();
        while let Some((_, e)) = queue.pop() {
            order.push(e);
        }
        assert_eq!(order, (0..50).collect::<Vec<_>>());
    }

    #[test]
    fn higher_priority_class_pops_first_at_same_instant() {
        let mut queue: EventQueue<&str> = EventQueue::new(true);
        queue.push_at(10, 3, "read");
        queue.push_at(10, 0, "remove");
        assert_eq!(queue.pop().unwrap().1, "remove");
        assert_eq!(queue.pop().unwrap().1, "read");
    }

    #[test]
    fn preemption_off_uses_insertion_order_at_same_instant() {
        let mut queue: EventQueue<&str> = EventQueue::new(false);
        queue.push_at(10, 3, "read");
        queue.push_at(10, 0, "remove");
        assert_eq!(queue.pop().unwrap().1, "read");
    }

    #[test]
    fn drops_only_when_injected() {
        let mut reliable = Network::new(SimConfig { seed: 3, ..SimConfig::default() });
        for _ in 0..1000 {
            assert!(reliable.delivery_time(0, 0, 1, 2).is_some());
        }
        let mut lossy = Network::new(SimConfig {
            seed: 3,
            drop_rate: 0.5,
            ..SimConfig::default()
        });
        let mut dropped = 0;
        for _ in 0..1000 {
            if lossy.delivery_time(0, 0, 1, 2).is_none() {
                dropped += 1;
            }
        }
        assert!(dropped > 300 && dropped < 700, "dropped {dropped}");
    }

    #[test]
    fn identical_seeds_sample_identical_latencies() {
        let cfg = SimConfig { seed: 99, ..SimConfig::default() };
        let mut a = Network::new(cfg.clone());
        let mut b = Network::new(cfg);
        for i in 0..200 {
            assert_eq!(
                a.delivery_time(i, 0, 1, 2),
                b.delivery_time(i, 0, 1, 2)
            );
        }
    }
}
