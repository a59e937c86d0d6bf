use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;

use crate::model::{ModelParams, Policy, QueueState};

/// Entry states with at most this many customers get conditional sojourn estimates.
pub const TAGGED_MAX_COUNT: usize = 5;

#[derive(Clone, Copy, Debug)]
enum Kind {
    Arrival,
    ServiceEnd(usize),
    VacationEnd(usize),
    Patience(usize),
}

#[derive(Clone, Copy, Debug)]
struct Event {
    t: f64,
    seq: u64,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, o: &Self) -> bool {
        self.cmp(o) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, o: &Self) -> Option<Ordering> {
        Some(self.cmp(o))
    }
}
impl Ord for Event {
    // Reversed: BinaryHeap pops the earliest event.
    fn cmp(&self, o: &Self) -> Ordering {
        o.t.total_cmp(&self.t).then(o.seq.cmp(&self.seq))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Server {
    Vacation,
    Idle,
    Busy,
}

#[derive(Clone, Copy, Debug, PartialEq)]
enum Status {
    Waiting,
    InService,
    Gone,
}

struct Customer {
    arrival: f64,
    entry: QueueState,
    batch: Option<usize>,
    status: Status,
}

/// Conditional sojourn sums for one entry state.
#[derive(Clone, Copy, Debug, Default)]
pub struct Tagged {
    pub sum: f64,
    pub count: u64,
    pub served_sum: f64,
    pub served_count: u64,
}

/// Time and customer totals over one batch of the observation window.
#[derive(Clone, Debug, Default)]
pub struct Accumulator {
    pub time: f64,
    pub vac: f64,
    pub idle: f64,
    pub n0: f64,
    pub n1: f64,
    pub p00: f64,
    pub p10: f64,
    pub p11: f64,
    pub phase: Vec<f64>,
    pub arrivals: u64,
    pub served: u64,
    pub sojourn_sum: f64,
    pub served_sojourn_sum: f64,
    pub tagged: BTreeMap<QueueState, Tagged>,
}

impl Accumulator {
    fn new(servers: usize) -> Self {
        Self {
            phase: vec![0.0; servers + 1],
            ..Self::default()
        }
    }

    pub fn merge(&mut self, o: &Accumulator) {
        self.time += o.time;
        self.vac += o.vac;
        self.idle += o.idle;
        self.n0 += o.n0;
        self.n1 += o.n1;
        self.p00 += o.p00;
        self.p10 += o.p10;
        self.p11 += o.p11;
        for (a, b) in self.phase.iter_mut().zip(&o.phase) {
            *a += b;
        }
        self.arrivals += o.arrivals;
        self.served += o.served;
        self.sojourn_sum += o.sojourn_sum;
        self.served_sojourn_sum += o.served_sojourn_sum;
        for (s, t) in &o.tagged {
            let e = self.tagged.entry(*s).or_default();
            e.sum += t.sum;
            e.count += t.count;
            e.served_sum += t.served_sum;
            e.served_count += t.served_count;
        }
    }

    /// Point estimates. Ratios with no data are left out.
    pub fn values(&self) -> BTreeMap<String, f64> {
        let mut v = BTreeMap::new();
        let t = self.time;
        let c = self.phase.len() - 1;
        v.insert("p_vac".into(), self.vac / t);
        v.insert("p_idle".into(), self.idle / t);
        v.insert("p_ser".into(), 1.0 - (self.vac + self.idle) / t);
        v.insert("mean_n0".into(), self.n0 / t);
        v.insert("mean_n1".into(), self.n1 / t);
        v.insert("mean_n_total".into(), (self.n0 + self.n1) / t);
        v.insert("p00".into(), self.p00 / t);
        v.insert("p10".into(), self.p10 / t);
        v.insert("p11".into(), self.p11 / t);
        if c > 1 {
            for (j, x) in self.phase.iter().enumerate() {
                v.insert(format!("phase_{j}"), x / t);
            }
        }
        if self.arrivals > 0 {
            v.insert("fraction_served".into(), self.served as f64 / self.arrivals as f64);
            v.insert("sojourn_mean".into(), self.sojourn_sum / self.arrivals as f64);
        }
        if self.served > 0 {
            v.insert(
                "sojourn_mean_served".into(),
                self.served_sojourn_sum / self.served as f64,
            );
        }
        for (s, tg) in &self.tagged {
            if tg.count > 0 {
                v.insert(sojourn_key(*s, false), tg.sum / tg.count as f64);
            }
            if tg.served_count > 0 {
                v.insert(sojourn_key(*s, true), tg.served_sum / tg.served_count as f64);
            }
        }
        v
    }
}

pub fn sojourn_key(s: QueueState, served_only: bool) -> String {
    let prefix = if served_only { "sojourn_served_s" } else { "sojourn_s" };
    format!("{prefix}{}{}", s.phase, s.count)
}

/// Event counts up to the horizon.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Conservation {
    pub arrivals: u64,
    pub served: u64,
    pub reneged: u64,
    pub in_system: u64,
}

pub struct RunOutput {
    pub batches: Vec<Accumulator>,
    pub conservation: Conservation,
}

struct Sim<'a> {
    p: &'a ModelParams,
    rng: ChaCha8Rng,
    heap: BinaryHeap<Event>,
    seq: u64,
    now: f64,
    servers: Vec<Server>,
    serving: Vec<usize>,
    queue: VecDeque<usize>,
    waiting: usize,
    customers: Vec<Customer>,
    warmup: f64,
    horizon: f64,
    batch_len: f64,
    batches: Vec<Accumulator>,
    counts: Conservation,
}

impl<'a> Sim<'a> {
    fn exp(&mut self, rate: f64) -> f64 {
        let e: f64 = self.rng.sample(Exp1);
        e / rate
    }

    fn schedule(&mut self, dt: f64, kind: Kind) {
        self.seq += 1;
        self.heap.push(Event {
            t: self.now + dt,
            seq: self.seq,
            kind,
        });
    }

    fn phase(&self) -> usize {
        self.servers.iter().filter(|s| **s != Server::Vacation).count()
    }

    fn count(&self) -> usize {
        self.waiting + self.servers.iter().filter(|s| **s == Server::Busy).count()
    }

    fn state(&self) -> QueueState {
        QueueState::new(self.phase(), self.count())
    }

    /// Adds the state held over `[now, t)` to the batches it overlaps.
    fn advance(&mut self, t: f64) {
        let lo = self.now.max(self.warmup);
        let hi = t.min(self.horizon);
        if hi > lo {
            let s = self.state();
            let (j, n) = (s.phase, s.count as f64);
            let mut a = lo;
            while a < hi {
                let b_idx = (((a - self.warmup) / self.batch_len) as usize).min(self.batches.len() - 1);
                let b_end = if b_idx + 1 == self.batches.len() {
                    hi
                } else {
                    (self.warmup + (b_idx + 1) as f64 * self.batch_len).min(hi)
                };
                let d = b_end - a;
                let acc = &mut self.batches[b_idx];
                acc.time += d;
                acc.phase[j] += d;
                if j == 0 {
                    acc.vac += d;
                    acc.n0 += n * d;
                    if s.count == 0 {
                        acc.p00 += d;
                    }
                } else {
                    acc.n1 += n * d;
                    if s.count == 0 {
                        acc.idle += d;
                    }
                }
                if j == 1 && s.count == 0 {
                    acc.p10 += d;
                }
                if j == 1 && s.count == 1 {
                    acc.p11 += d;
                }
                if d <= 0.0 {
                    break;
                }
                a = b_end;
            }
        }
        self.now = t;
    }

    fn start_service(&mut self, server: usize, cust: usize) {
        self.servers[server] = Server::Busy;
        self.serving[server] = cust;
        self.customers[cust].status = Status::InService;
        let dt = self.exp(self.p.mu);
        self.schedule(dt, Kind::ServiceEnd(server));
    }

    fn start_vacation(&mut self, server: usize) {
        self.servers[server] = Server::Vacation;
        let dt = self.exp(self.p.gamma);
        self.schedule(dt, Kind::VacationEnd(server));
    }

    fn next_waiting(&mut self) -> Option<usize> {
        while let Some(c) = self.queue.pop_front() {
            if self.customers[c].status == Status::Waiting {
                self.waiting -= 1;
                return Some(c);
            }
        }
        None
    }

    fn finish(&mut self, cust: usize, served: bool) {
        let c = &mut self.customers[cust];
        c.status = Status::Gone;
        if self.now <= self.horizon {
            if served {
                self.counts.served += 1;
            } else {
                self.counts.reneged += 1;
            }
        }
        let Some(b) = c.batch else { return };
        let s = self.now - c.arrival;
        let entry = c.entry;
        let acc = &mut self.batches[b];
        acc.sojourn_sum += s;
        if served {
            acc.served += 1;
            acc.served_sojourn_sum += s;
        }
        if entry.count <= TAGGED_MAX_COUNT {
            let tg = acc.tagged.entry(entry).or_default();
            tg.sum += s;
            tg.count += 1;
            if served {
                tg.served_sum += s;
                tg.served_count += 1;
            }
        }
    }

    fn on_arrival(&mut self) {
        let entry = self.state();
        let batch = (self.now >= self.warmup).then(|| {
            (((self.now - self.warmup) / self.batch_len) as usize).min(self.batches.len() - 1)
        });
        if let Some(b) = batch {
            self.batches[b].arrivals += 1;
        }
        self.counts.arrivals += 1;
        let id = self.customers.len();
        self.customers.push(Customer {
            arrival: self.now,
            entry,
            batch,
            status: Status::Waiting,
        });
        if let Some(s) = self.servers.iter().position(|s| *s == Server::Idle) {
            self.start_service(s, id);
        } else {
            self.queue.push_back(id);
            self.waiting += 1;
            if self.p.xi > 0.0 {
                let dt = self.exp(self.p.xi);
                self.schedule(dt, Kind::Patience(id));
            }
        }
        let dt = self.exp(self.p.lambda);
        if self.now + dt <= self.horizon {
            self.schedule(dt, Kind::Arrival);
        }
    }

    fn on_service_end(&mut self, server: usize) {
        let done = self.serving[server];
        self.finish(done, true);
        match self.next_waiting() {
            Some(c) => self.start_service(server, c),
            None => self.start_vacation(server),
        }
    }

    fn on_vacation_end(&mut self, server: usize) {
        match self.next_waiting() {
            Some(c) => self.start_service(server, c),
            None => match self.p.policy {
                Policy::Single => self.servers[server] = Server::Idle,
                Policy::Multiple => self.start_vacation(server),
            },
        }
    }

    fn on_patience(&mut self, cust: usize) {
        if self.customers[cust].status == Status::Waiting {
            self.waiting -= 1;
            self.finish(cust, false);
        }
    }
}

/// One replication on its own stream. `batch_count` splits the window
/// `[warmup, horizon]` into equal batches.
pub fn run_replication(
    p: &ModelParams,
    horizon: f64,
    warmup: f64,
    batch_count: usize,
    seed: u64,
    stream: u64,
) -> RunOutput {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let c = p.servers;
    let mut sim = Sim {
        p,
        rng,
        heap: BinaryHeap::new(),
        seq: 0,
        now: 0.0,
        servers: vec![Server::Vacation; c],
        serving: vec![usize::MAX; c],
        queue: VecDeque::new(),
        waiting: 0,
        customers: Vec::new(),
        warmup,
        horizon,
        batch_len: (horizon - warmup) / batch_count as f64,
        batches: vec![Accumulator::new(c); batch_count],
        counts: Conservation::default(),
    };
    for s in 0..c {
        sim.start_vacation(s);
    }
    let dt = sim.exp(p.lambda);
    sim.schedule(dt, Kind::Arrival);

    let mut snapped = false;
    while let Some(ev) = sim.heap.pop() {
        if !snapped && ev.t > horizon {
            sim.advance(horizon);
            sim.counts.in_system = sim.count() as u64;
            snapped = true;
        }
        if snapped && sim.count() == 0 {
            break;
        }
        sim.advance(ev.t);
        match ev.kind {
            Kind::Arrival => sim.on_arrival(),
            Kind::ServiceEnd(s) => sim.on_service_end(s),
            Kind::VacationEnd(s) => sim.on_vacation_end(s),
            Kind::Patience(cust) => sim.on_patience(cust),
        }
    }
    if !snapped {
        sim.advance(horizon);
        sim.counts.in_system = sim.count() as u64;
    }
    RunOutput {
        batches: sim.batches,
        conservation: sim.counts,
    }
}
