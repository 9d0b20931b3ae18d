use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric};

use super::physics::{attempt_duration, decohere_werner, link_success_prob, swap_werner};
use super::{PairRecord, Result, SimConfig};
use crate::scalar::{to_f64, Scalar};

/// Counters collected during a run.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SimStats<T> {
    pub events: u64,
    /// Attempt windows summed over all links, including discarded work.
    pub attempts: u64,
    pub swaps: u64,
    pub cutoff_discards: u64,
    /// Longest time any repeater qubit was held before a swap or discard.
    pub max_storage: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome<T> {
    pub records: Vec<PairRecord<T>>,
    pub stats: SimStats<T>,
    /// Simulated time when the run stopped.
    pub elapsed: T,
    /// True when the time limit stopped the run before `num_pairs` deliveries.
    pub truncated: bool,
}

/// Runs the chain until `num_pairs` end-to-end pairs are delivered.
pub fn run_chain<T: Scalar>(config: &SimConfig<T>) -> Result<Vec<PairRecord<T>>> {
    Ok(run_chain_with_stats(config)?.records)
}

pub fn run_chain_with_stats<T: Scalar>(config: &SimConfig<T>) -> Result<SimOutcome<T>> {
    run_chain_bounded(config, T::infinity())
}

/// Like [`run_chain_with_stats`] but stops once simulated time passes
/// `time_limit`, returning whatever was delivered by then.
pub fn run_chain_bounded<T: Scalar>(config: &SimConfig<T>, time_limit: T) -> Result<SimOutcome<T>> {
    config.validate()?;
    let mut engine = Engine::new(config);
    engine.run(time_limit);
    Ok(engine.finish())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Left = 0,
    Right = 1,
}

type PairId = u64;
type QubitId = u64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Endpoint {
    node: usize,
    side: Side,
}

#[derive(Debug, Clone, Copy)]
struct Slot<T> {
    qubit: QubitId,
    pair: PairId,
    created_at: T,
}

#[derive(Debug, Clone)]
struct Pair<T> {
    ends: [Endpoint; 2],
    /// Werner parameter excluding storage still pending at its endpoints.
    werner: T,
    /// Latest arrival at either end node of a swap outcome this pair depends on.
    notice_arrival: T,
    successor: Option<PairId>,
    dead: bool,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    LinkSuccess { link: usize },
    Cutoff { endpoint: Endpoint, qubit: QubitId },
    Discard { pair: PairId, target: usize },
    Delivery { werner_bits: u64 },
}

#[derive(Debug)]
struct Scheduled<T> {
    time: T,
    seq: u64,
    epoch: u64,
    event: Event,
}

impl<T: Scalar> PartialEq for Scheduled<T> {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl<T: Scalar> Eq for Scheduled<T> {}

impl<T: Scalar> PartialOrd for Scheduled<T> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl<T: Scalar> Ord for Scheduled<T> {
    // reversed: BinaryHeap pops the earliest event, ties in scheduling order
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .partial_cmp(&self.time)
            .unwrap_or(Ordering::Equal)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct LinkModel<T> {
    attempt: T,
    attempts_until_success: Option<Geometric>,
}

struct Engine<'a, T: Scalar> {
    cfg: &'a SimConfig<T>,
    rng: ChaCha8Rng,
    links: Vec<LinkModel<T>>,
    positions: Vec<T>,
    queue: BinaryHeap<Scheduled<T>>,
    seq: u64,
    epoch: u64,
    now: T,
    slots: Vec<[Option<Slot<T>>; 2]>,
    attempting: Vec<bool>,
    pairs: HashMap<PairId, Pair<T>>,
    next_id: u64,
    in_flight: bool,
    records: Vec<PairRecord<T>>,
    last_delivery: T,
    stats: SimStats<T>,
    truncated: bool,
}

impl<'a, T: Scalar> Engine<'a, T> {
    fn new(cfg: &'a SimConfig<T>) -> Self {
        let links = cfg
            .config
            .links()
            .iter()
            .map(|l| {
                let p = to_f64(link_success_prob(l.length_km, l.attenuation_db, &cfg.params));
                LinkModel {
                    attempt: attempt_duration(l.length_km, cfg.light_speed),
                    // p == 1 always succeeds at the first attempt
                    attempts_until_success: (p < 1.0)
                        .then(|| Geometric::new(p).expect("success probability in (0, 1)")),
                }
            })
            .collect::<Vec<_>>();
        let nodes = links.len() + 1;
        Self {
            cfg,
            rng: ChaCha8Rng::seed_from_u64(cfg.rng_seed),
            positions: cfg.config.node_positions(),
            queue: BinaryHeap::new(),
            seq: 0,
            epoch: 0,
            now: T::zero(),
            slots: vec![[None, None]; nodes],
            attempting: vec![false; links.len()],
            links,
            pairs: HashMap::new(),
            next_id: 0,
            in_flight: false,
            records: Vec::with_capacity(cfg.num_pairs),
            last_delivery: T::zero(),
            stats: SimStats::default(),
            truncated: false,
        }
    }

    fn last_node(&self) -> usize {
        self.slots.len() - 1
    }

    fn is_repeater(&self, node: usize) -> bool {
        node != 0 && node != self.last_node()
    }

    fn fresh_id(&mut self) -> u64 {
        self.next_id += 1;
        self.next_id
    }

    fn schedule(&mut self, time: T, event: Event) {
        self.seq += 1;
        self.queue.push(Scheduled {
            time,
            seq: self.seq,
            epoch: self.epoch,
            event,
        });
    }

    fn travel(&self, from: usize, to: usize) -> T {
        (self.positions[from] - self.positions[to]).abs() / self.cfg.light_speed
    }

    fn run(&mut self, time_limit: T) {
        self.start_all();
        while self.records.len() < self.cfg.num_pairs {
            let Some(next) = self.queue.pop() else {
                unreachable!("a validated chain always has pending events");
            };
            if next.time > time_limit {
                self.truncated = true;
                self.now = time_limit;
                return;
            }
            if next.epoch != self.epoch {
                continue;
            }
            self.now = next.time;
            self.stats.events += 1;
            match next.event {
                Event::LinkSuccess { link } => self.on_link_success(link),
                Event::Cutoff { endpoint, qubit } => self.on_cutoff(endpoint, qubit),
                Event::Discard { pair, target } => self.on_discard(pair, target),
                Event::Delivery { werner_bits } => self.on_delivery(werner_bits),
            }
        }
    }

    fn finish(self) -> SimOutcome<T> {
        SimOutcome {
            elapsed: if self.truncated { self.now } else { self.last_delivery },
            records: self.records,
            stats: self.stats,
            truncated: self.truncated,
        }
    }

    fn start_all(&mut self) {
        for link in 0..self.links.len() {
            self.try_start(link);
        }
    }

    /// Starts attempting on `link` if both of its slots are free.
    fn try_start(&mut self, link: usize) {
        if self.in_flight || self.attempting[link] {
            return;
        }
        if self.slots[link][Side::Right as usize].is_some()
            || self.slots[link + 1][Side::Left as usize].is_some()
        {
            return;
        }
        let model = &self.links[link];
        let windows = match &model.attempts_until_success {
            Some(geo) => geo.sample(&mut self.rng).saturating_add(1),
            None => 1,
        };
        let duration = model.attempt * T::from_u64(windows).unwrap_or_else(T::infinity);
        self.stats.attempts = self.stats.attempts.saturating_add(windows);
        self.attempting[link] = true;
        self.schedule(self.now + duration, Event::LinkSuccess { link });
    }

    fn on_link_success(&mut self, link: usize) {
        self.attempting[link] = false;
        let now = self.now;
        let pair_id = self.fresh_id();
        let ends = [
            Endpoint { node: link, side: Side::Right },
            Endpoint { node: link + 1, side: Side::Left },
        ];
        self.pairs.insert(
            pair_id,
            Pair {
                ends,
                werner: self.cfg.params.link_werner(),
                notice_arrival: now,
                successor: None,
                dead: false,
            },
        );
        for end in ends {
            let qubit = self.fresh_id();
            self.slots[end.node][end.side as usize] = Some(Slot {
                qubit,
                pair: pair_id,
                created_at: now,
            });
            if self.is_repeater(end.node) && self.cfg.cutoff_time.is_finite() {
                self.schedule(now + self.cfg.cutoff_time, Event::Cutoff { endpoint: end, qubit });
            }
        }
        if self.links.len() == 1 {
            self.form(pair_id);
            return;
        }
        for end in ends {
            if self.is_repeater(end.node) {
                self.try_swap(end.node);
            }
            if self.in_flight {
                return;
            }
        }
    }

    fn other_end(&self, pair: &Pair<T>, node: usize) -> Endpoint {
        if pair.ends[0].node == node {
            pair.ends[1]
        } else {
            pair.ends[0]
        }
    }

    fn try_swap(&mut self, node: usize) {
        let (Some(left), Some(right)) = (self.slots[node][0], self.slots[node][1]) else {
            return;
        };
        let now = self.now;
        let coherence = self.cfg.params.coherence_time;
        let stored_left = now - left.created_at;
        let stored_right = now - right.created_at;
        self.stats.max_storage = self.stats.max_storage.max(stored_left).max(stored_right);
        self.stats.swaps += 1;

        let p = self.pairs[&left.pair].clone();
        let q = self.pairs[&right.pair].clone();
        let far_left = self.other_end(&p, node);
        let far_right = self.other_end(&q, node);
        let werner = swap_werner(
            decohere_werner(p.werner, stored_left, coherence),
            decohere_werner(q.werner, stored_right, coherence),
            self.cfg.params.swap_quality,
        );
        let last = self.last_node();
        let notice = now + self.travel(node, 0).max(self.travel(node, last));
        let merged_id = self.fresh_id();
        self.pairs.insert(
            merged_id,
            Pair {
                ends: [far_left, far_right],
                werner,
                notice_arrival: p.notice_arrival.max(q.notice_arrival).max(notice),
                successor: None,
                dead: p.dead || q.dead,
            },
        );
        for id in [left.pair, right.pair] {
            if let Some(old) = self.pairs.get_mut(&id) {
                old.successor = Some(merged_id);
            }
        }
        // a far slot may have been freed by a cut-off and reused meanwhile
        for (far, old) in [(far_left, left.pair), (far_right, right.pair)] {
            if let Some(slot) = self.slots[far.node][far.side as usize].as_mut() {
                if slot.pair == old {
                    slot.pair = merged_id;
                }
            }
        }
        self.slots[node] = [None, None];

        if far_left.node == 0 && far_right.node == last {
            debug_assert!(!p.dead && !q.dead, "a discarded segment cannot span the chain");
            self.form(merged_id);
            return;
        }
        self.try_start(node - 1);
        self.try_start(node);
    }

    /// An end-to-end pair exists; everything else is dropped and delivery
    /// waits for the last swap outcome to reach the end nodes.
    fn form(&mut self, pair_id: PairId) {
        let pair = &self.pairs[&pair_id];
        let werner = pair.werner;
        let deliver_at = pair.notice_arrival.max(self.now);
        self.epoch += 1;
        self.in_flight = true;
        self.reset_state();
        self.schedule(
            deliver_at,
            Event::Delivery {
                werner_bits: to_f64(werner).to_bits(),
            },
        );
    }

    fn reset_state(&mut self) {
        for s in &mut self.slots {
            *s = [None, None];
        }
        self.attempting.iter_mut().for_each(|a| *a = false);
        self.pairs.clear();
    }

    fn on_delivery(&mut self, werner_bits: u64) {
        let werner = T::from_f64(f64::from_bits(werner_bits)).unwrap_or_else(T::zero);
        self.records.push(PairRecord {
            werner,
            delivery_time: self.now,
            generation_duration: self.now - self.last_delivery,
        });
        self.last_delivery = self.now;
        self.in_flight = false;
        if self.records.len() < self.cfg.num_pairs {
            self.start_all();
        }
    }

    fn link_of(endpoint: Endpoint) -> usize {
        match endpoint.side {
            Side::Left => endpoint.node - 1,
            Side::Right => endpoint.node,
        }
    }

    fn free_slot(&mut self, endpoint: Endpoint) {
        self.slots[endpoint.node][endpoint.side as usize] = None;
        self.try_start(Self::link_of(endpoint));
    }

    fn on_cutoff(&mut self, endpoint: Endpoint, qubit: QubitId) {
        let Some(slot) = self.slots[endpoint.node][endpoint.side as usize] else {
            return;
        };
        if slot.qubit != qubit {
            return;
        }
        self.stats.cutoff_discards += 1;
        self.stats.max_storage = self.stats.max_storage.max(self.now - slot.created_at);
        let pair_id = slot.pair;
        let notify = match self.pairs.get_mut(&pair_id) {
            Some(pair) if !pair.dead => {
                pair.dead = true;
                Some(if pair.ends[0] == endpoint { pair.ends[1] } else { pair.ends[0] })
            }
            _ => None,
        };
        if let Some(far) = notify {
            let at = self.now + self.travel(endpoint.node, far.node);
            self.schedule(
                at,
                Event::Discard {
                    pair: pair_id,
                    target: far.node,
                },
            );
        }
        self.free_slot(endpoint);
    }

    /// A discard notice reaches `target`. If the segment has meanwhile been
    /// swapped onwards, the notice follows it to its current live end.
    fn on_discard(&mut self, pair_id: PairId, target: usize) {
        let mut current = pair_id;
        while let Some(next) = self.pairs.get(&current).and_then(|p| p.successor) {
            current = next;
        }
        let Some(pair) = self.pairs.get_mut(&current) else {
            return;
        };
        pair.dead = true;
        let ends = pair.ends;
        let live = ends.into_iter().find(|e| {
            self.slots[e.node][e.side as usize].is_some_and(|s| s.pair == current)
        });
        let Some(live) = live else {
            return;
        };
        if live.node == target {
            self.free_slot(live);
        } else {
            let at = self.now + self.travel(target, live.node);
            self.schedule(
                at,
                Event::Discard {
                    pair: current,
                    target: live.node,
                },
            );
        }
    }
}
