//! The simulated cluster: uniform-random vertex partitioning, the all-to-all
//! covering-set shuffle, sender workers streaming truncated lazy-greedy seeds,
//! the receiver running the bucketed streaming aggregator, and final
//! best-of selection.
//!
//! Rank 0 is always the receiver; it generates its sample slice like everyone
//! else but owns no vertices and runs no local greedy. Ranks `1..m` are
//! senders. Cross-role communication happens only through [`Message`] values,
//! carried either by in-process channels, by framed byte streams ([`wire`]),
//! or by a seeded serialized scheduler for reproducible interleavings.

pub mod wire;

use std::collections::VecDeque;
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::OnceLock;

use crate::clock::Stopwatch;
use crate::cover::{
    bucket_count, greedy_with, truncated_len, GreedyMode, Solution, StreamingSketch,
};
use crate::error::{Error, Result};
use crate::graph::{Graph, Model};
use crate::rng::{keyed_rng, mix3, stream};
use crate::sampling::{build_covering_sets, generate_batch, CoveringSet};

use rand::Rng;
use wire::Polled;

/// Which rank owns each vertex. Rank 0 (the receiver) owns none.
#[derive(Debug, Clone)]
pub struct PartitionAssignment {
    pub m: u32,
    pub owner: Vec<u32>,
    pub seed: u64,
}

/// Assign each vertex independently and uniformly to a sender rank in
/// `[1, m-1]`. Pure in `(n, m, seed)`, so every rank computing the assignment
/// locally agrees.
pub fn partition_vertices(n: usize, m: u32, seed: u64) -> Result<PartitionAssignment> {
    if m < 2 {
        return Err(Error::Config(format!(
            "need at least 2 ranks (one sender plus the receiver), got {m}"
        )));
    }
    let senders = (m - 1) as u64;
    let owner = (0..n)
        .map(|v| 1 + (mix3(seed, stream::PARTITION, v as u64) % senders) as u32)
        .collect();
    Ok(PartitionAssignment { m, owner, seed })
}

/// One rank's partial covering sets, built from its own sample-id slice.
#[derive(Debug, Clone)]
pub struct LocalCoveringSets {
    pub rank: u32,
    pub id_lo: u32,
    pub id_hi: u32,
    pub sets: Vec<CoveringSet>,
}

/// The all-to-all: merge every rank's partial covering sets so each vertex's
/// owner holds its complete sorted set. Rank 0 contributes but receives
/// nothing. Returns per-rank collections indexed by rank; owned vertices with
/// no samples are present with empty lists.
pub fn shuffle_covering_sets(
    locals: &[LocalCoveringSets],
    assignment: &PartitionAssignment,
) -> Result<Vec<Vec<CoveringSet>>> {
    let n = assignment.owner.len();
    let m = assignment.m as usize;

    let mut order: Vec<usize> = (0..locals.len()).collect();
    order.sort_unstable_by_key(|&i| locals[i].id_lo);
    let mut prev_hi = 0u32;
    for &i in &order {
        let l = &locals[i];
        if l.id_lo > l.id_hi {
            return Err(Error::Integrity(format!("rank {} has inverted id range", l.rank)));
        }
        if l.id_lo < prev_hi && l.id_lo != l.id_hi {
            return Err(Error::Integrity(format!(
                "rank {} sample-id range overlaps a previous rank",
                l.rank
            )));
        }
        prev_hi = prev_hi.max(l.id_hi);
        for set in &l.sets {
            if let (Some(&first), Some(&last)) = (set.samples.first(), set.samples.last()) {
                if first < l.id_lo || last >= l.id_hi {
                    return Err(Error::Integrity(format!(
                        "rank {} emitted sample ids outside its range",
                        l.rank
                    )));
                }
            }
        }
    }

    let mut merged: Vec<Vec<CoveringSet>> = vec![Vec::new(); m];
    let mut pos = vec![usize::MAX; n];
    #[allow(clippy::needless_range_loop)] // v indexes owner and pos together
    for v in 0..n {
        let r = assignment.owner[v] as usize;
        pos[v] = merged[r].len();
        merged[r].push(CoveringSet { vertex: v as u32, samples: Vec::new() });
    }
    for &i in &order {
        for set in &locals[i].sets {
            let v = set.vertex as usize;
            if v >= n {
                return Err(Error::Integrity(format!("vertex {v} outside [0, {n})")));
            }
            let target = &mut merged[assignment.owner[v] as usize][pos[v]].samples;
            if let (Some(&tail), Some(&head)) = (target.last(), set.samples.first()) {
                if head <= tail {
                    return Err(Error::Integrity(format!(
                        "sample id {head} repeated for vertex {v}"
                    )));
                }
            }
            target.extend_from_slice(&set.samples);
        }
    }
    Ok(merged)
}

/// A seed streamed from a sender the moment its local greedy selects it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedMessage {
    pub sender_rank: u32,
    /// Position in the sender's greedy sequence, strictly increasing.
    pub order_index: u32,
    pub seed: u32,
    /// The seed's complete post-shuffle covering set.
    pub covering: CoveringSet,
}

/// Sent exactly once per sender, after its last seed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TerminationMessage {
    pub sender_rank: u32,
    /// All local seeds with full-universe coverage.
    pub local_solution: Solution,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Message {
    Seed(SeedMessage),
    Terminate(TerminationMessage),
}

impl Message {
    pub fn sender_rank(&self) -> u32 {
        match self {
            Message::Seed(s) => s.sender_rank,
            Message::Terminate(t) => t.sender_rank,
        }
    }
}

/// Where a sender's messages go.
pub enum Outbox {
    Channel(mpsc::Sender<Message>),
    Wire(wire::ByteTx),
    Buffer(Vec<Message>),
}

impl Outbox {
    fn send(&mut self, msg: Message) -> Result<()> {
        match self {
            Outbox::Channel(tx) => {
                tx.send(msg).map_err(|_| Error::Transport("message channel closed".into()))
            }
            Outbox::Wire(tx) => tx.send(&msg),
            Outbox::Buffer(buf) => {
                buf.push(msg);
                Ok(())
            }
        }
    }

    pub fn into_buffer(self) -> Vec<Message> {
        match self {
            Outbox::Buffer(buf) => buf,
            _ => panic!("not a buffering outbox"),
        }
    }
}

/// Where the receiver's messages come from.
pub enum Inbox {
    Channel(mpsc::Receiver<Message>),
    Wire(wire::ByteRx),
}

impl Inbox {
    fn poll(&mut self) -> Result<Polled> {
        match self {
            Inbox::Channel(rx) => match rx.try_recv() {
                Ok(msg) => Ok(Polled::Msg(msg)),
                Err(mpsc::TryRecvError::Empty) => Ok(Polled::Pending),
                Err(mpsc::TryRecvError::Disconnected) => Ok(Polled::Closed),
            },
            Inbox::Wire(rx) => rx.poll(),
        }
    }
}

/// Per-sender bookkeeping reported out of a round.
#[derive(Debug, Clone)]
pub struct SenderStats {
    pub rank: u32,
    pub messages_sent: u64,
    /// Seeds selected locally but withheld by truncation.
    pub truncation_cut: u64,
    pub select_s: f64,
}

/// Run one sender: lazy greedy over its owned covering sets, emitting each
/// seed as selected, stopping emission after `ceil(alpha * k)` seeds while
/// continuing local selection, then a termination carrying the full local
/// solution.
pub fn run_sender(
    rank: u32,
    owned_sets: &[CoveringSet],
    universe_size: usize,
    k: usize,
    alpha: f64,
    outbox: &mut Outbox,
) -> Result<(Solution, SenderStats)> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::Parameter(format!("alpha {alpha} must lie in (0, 1]")));
    }
    let watch = Stopwatch::start();
    let limit = truncated_len(alpha, k);
    let mut sent = 0u64;
    let mut transport: Option<Error> = None;
    let solution = greedy_with(universe_size, owned_sets, k, GreedyMode::Lazy, |pos, set, _gain| {
        if pos < limit && transport.is_none() {
            let msg = Message::Seed(SeedMessage {
                sender_rank: rank,
                order_index: pos as u32,
                seed: set.vertex,
                covering: set.clone(),
            });
            match outbox.send(msg) {
                Ok(()) => sent += 1,
                Err(e) => transport = Some(e),
            }
        }
    });
    if let Some(e) = transport {
        return Err(e);
    }
    outbox.send(Message::Terminate(TerminationMessage {
        sender_rank: rank,
        local_solution: solution.clone(),
    }))?;
    let stats = SenderStats {
        rank,
        messages_sent: sent,
        truncation_cut: solution.seeds.len().saturating_sub(limit) as u64,
        select_s: watch.seconds(),
    };
    Ok((solution, stats))
}

/// Receiver-side counters for reports and exactly-once audits.
#[derive(Debug, Clone)]
pub struct ReceiverDiagnostics {
    pub seed_messages: u64,
    pub lower_bound: u64,
    pub bucket_count: usize,
    /// Seeds admitted per bucket.
    pub bucket_occupancy: Vec<usize>,
    /// Admitted seeds per bucket, in admission order.
    pub bucket_seeds: Vec<Vec<u32>>,
    /// Maintained coverage count per bucket, recountable from the admitted
    /// seeds' covering sets.
    pub bucket_covered: Vec<u64>,
    pub duplicate_skips: u64,
    /// Total (bucket, message) applications across all buckets.
    pub applications: u64,
}

#[derive(Debug, Clone, Copy)]
pub struct ReceiverConfig {
    pub k: usize,
    pub delta: f64,
    pub bucket_workers: usize,
    pub universe_size: usize,
    pub bucket_override: Option<usize>,
}

/// FIFO / termination protocol bookkeeping shared by the threaded and
/// serialized receivers.
struct ProtocolTracker {
    last_order: Vec<Option<u32>>,
    terminated: Vec<bool>,
    locals: Vec<Option<Solution>>,
    first_marginal: Vec<Option<u64>>,
    first_seen: usize,
    terminated_count: usize,
    seed_messages: u64,
}

impl ProtocolTracker {
    fn new(senders: usize) -> ProtocolTracker {
        ProtocolTracker {
            last_order: vec![None; senders],
            terminated: vec![false; senders],
            locals: vec![None; senders],
            first_marginal: vec![None; senders],
            first_seen: 0,
            terminated_count: 0,
            seed_messages: 0,
        }
    }

    fn senders(&self) -> usize {
        self.terminated.len()
    }

    fn observe(&mut self, msg: &Message) -> Result<()> {
        let rank = msg.sender_rank();
        if rank == 0 || rank as usize > self.senders() {
            return Err(Error::Protocol(format!("message from unexpected rank {rank}")));
        }
        let i = rank as usize - 1;
        if self.first_marginal[i].is_none() {
            self.first_seen += 1;
            self.first_marginal[i] = Some(match msg {
                Message::Seed(s) => s.covering.samples.len() as u64,
                Message::Terminate(_) => 0,
            });
        }
        match msg {
            Message::Seed(s) => {
                if self.terminated[i] {
                    return Err(Error::Protocol(format!(
                        "rank {rank} sent a seed after terminating"
                    )));
                }
                if let Some(last) = self.last_order[i] {
                    if s.order_index <= last {
                        return Err(Error::Protocol(format!(
                            "rank {rank} broke FIFO order ({} after {last})",
                            s.order_index
                        )));
                    }
                }
                self.last_order[i] = Some(s.order_index);
                self.seed_messages += 1;
            }
            Message::Terminate(t) => {
                if self.terminated[i] {
                    return Err(Error::Protocol(format!("rank {rank} terminated twice")));
                }
                self.terminated[i] = true;
                self.terminated_count += 1;
                self.locals[i] = Some(t.local_solution.clone());
            }
        }
        Ok(())
    }

    fn all_first_seen(&self) -> bool {
        self.first_seen == self.senders()
    }

    fn all_terminated(&self) -> bool {
        self.terminated_count == self.senders()
    }

    /// Sketch lower bound: the max first-streamed marginal. Every vertex lives
    /// at exactly one sender and senders stream in greedy order, so this is
    /// the global maximum singleton coverage (1 when all senders were empty).
    fn lower_bound(&self) -> u64 {
        self.first_marginal.iter().flatten().copied().max().unwrap_or(0).max(1)
    }

    fn take_locals(&mut self) -> Vec<Solution> {
        self.locals.iter_mut().map(|s| s.take().expect("sender never terminated")).collect()
    }
}

fn sketch_from(tracker: &ProtocolTracker, cfg: &ReceiverConfig) -> Result<StreamingSketch> {
    let buckets = cfg.bucket_override.unwrap_or_else(|| bucket_count(cfg.k, cfg.delta));
    StreamingSketch::with_bucket_count(
        cfg.k,
        cfg.delta,
        tracker.lower_bound(),
        cfg.universe_size,
        buckets,
    )
}

fn diagnostics_from(sketch: &StreamingSketch, tracker: &ProtocolTracker) -> ReceiverDiagnostics {
    ReceiverDiagnostics {
        seed_messages: tracker.seed_messages,
        lower_bound: sketch.lower_bound(),
        bucket_count: sketch.bucket_len(),
        bucket_occupancy: sketch.buckets().iter().map(|b| b.seeds().len()).collect(),
        bucket_seeds: sketch.buckets().iter().map(|b| b.seeds().to_vec()).collect(),
        bucket_covered: sketch.buckets().iter().map(|b| b.covered_count()).collect(),
        duplicate_skips: sketch.buckets().iter().map(|b| b.duplicate_skips).sum(),
        applications: sketch.buckets().iter().map(|b| b.applied).sum(),
    }
}

/// The receiver over live inboxes (one per sender, rank order `1..m`).
///
/// Phase 1 collects the first message from every sender to fix the sketch's
/// lower bound. Phase 2 appends arrivals to a shared publish-flagged log while
/// bucket-range workers replay it in order, each (bucket, message) pair
/// applied exactly once. Returns the streaming solution, the senders' local
/// solutions, and diagnostics.
pub fn run_receiver(
    inboxes: Vec<Inbox>,
    cfg: &ReceiverConfig,
) -> Result<(Solution, Vec<Solution>, ReceiverDiagnostics)> {
    let senders = inboxes.len();
    if senders == 0 {
        return Err(Error::Config("receiver needs at least one sender".into()));
    }
    let capacity = senders * (cfg.k + 2);
    let log: Vec<OnceLock<Message>> = (0..capacity).map(|_| OnceLock::new()).collect();
    let published = AtomicUsize::new(0);
    let done = AtomicBool::new(false);

    let mut tracker = ProtocolTracker::new(senders);
    let mut inboxes: Vec<Option<Inbox>> = inboxes.into_iter().map(Some).collect();

    let mut poll_all = |tracker: &mut ProtocolTracker| -> Result<bool> {
        let mut progressed = false;
        for (i, slot) in inboxes.iter_mut().enumerate() {
            let Some(inbox) = slot.as_mut() else { continue };
            loop {
                match inbox.poll()? {
                    Polled::Msg(msg) => {
                        progressed = true;
                        tracker.observe(&msg)?;
                        let at = published.load(Ordering::Relaxed);
                        if at >= log.len() {
                            return Err(Error::Protocol("message log overflowed".into()));
                        }
                        log[at].set(msg).expect("single appender");
                        published.store(at + 1, Ordering::Release);
                    }
                    Polled::Pending => break,
                    Polled::Closed => {
                        if !tracker.terminated[i] {
                            return Err(Error::Protocol(format!(
                                "rank {} channel closed without termination",
                                i + 1
                            )));
                        }
                        *slot = None;
                        break;
                    }
                }
            }
        }
        Ok(progressed)
    };

    // Phase 1: wait for one message per sender, logging everything that arrives.
    while !tracker.all_first_seen() {
        if !poll_all(&mut tracker)? {
            std::thread::yield_now();
        }
    }

    let mut sketch = sketch_from(&tracker, cfg)?;
    let k = cfg.k;
    let workers = cfg.bucket_workers.max(1).min(sketch.bucket_len());
    let chunk = sketch.bucket_len().div_ceil(workers);

    // Phase 2: bucket workers replay the log from the start while this lane
    // keeps consuming inboxes.
    let drive_result: Result<()> = std::thread::scope(|scope| {
        let mut handles = Vec::with_capacity(workers);
        for buckets in sketch.buckets_mut().chunks_mut(chunk) {
            let log = &log;
            let published = &published;
            let done = &done;
            handles.push(scope.spawn(move || {
                let mut consumed = 0usize;
                loop {
                    let avail = published.load(Ordering::Acquire);
                    while consumed < avail {
                        if let Message::Seed(sm) = log[consumed].get().expect("published entry") {
                            for bucket in buckets.iter_mut() {
                                bucket.offer(k, sm.seed, &sm.covering);
                            }
                        }
                        consumed += 1;
                    }
                    if done.load(Ordering::Acquire) && consumed == published.load(Ordering::Acquire)
                    {
                        break;
                    }
                    std::thread::yield_now();
                }
            }));
        }

        let drive = (|| {
            while !tracker.all_terminated() {
                if !poll_all(&mut tracker)? {
                    std::thread::yield_now();
                }
            }
            Ok(())
        })();
        done.store(true, Ordering::Release);
        for h in handles {
            h.join().expect("bucket worker panicked");
        }
        drive
    });
    drive_result?;

    sketch.record_processed(tracker.seed_messages);
    let diagnostics = diagnostics_from(&sketch, &tracker);
    Ok((sketch.finalize(), tracker.take_locals(), diagnostics))
}

/// The receiver over a pre-interleaved arrival sequence (the seeded-scheduler
/// test mode, also the no-thread path). Protocol-equivalent to
/// [`run_receiver`] fed the same arrival order.
pub fn run_receiver_serialized(
    arrivals: &[Message],
    senders: usize,
    cfg: &ReceiverConfig,
) -> Result<(Solution, Vec<Solution>, ReceiverDiagnostics)> {
    let mut tracker = ProtocolTracker::new(senders);
    let mut split = arrivals.len();
    for (i, msg) in arrivals.iter().enumerate() {
        tracker.observe(msg)?;
        if tracker.all_first_seen() {
            split = i + 1;
            break;
        }
    }
    if !tracker.all_first_seen() {
        let missing = tracker.first_marginal.iter().position(|m| m.is_none()).unwrap() + 1;
        return Err(Error::Protocol(format!("rank {missing} never sent anything")));
    }
    let mut sketch = sketch_from(&tracker, cfg)?;
    for msg in &arrivals[split..] {
        tracker.observe(msg)?;
    }
    if !tracker.all_terminated() {
        let missing = tracker.terminated.iter().position(|t| !t).unwrap() + 1;
        return Err(Error::Protocol(format!("rank {missing} never terminated")));
    }
    // replay the full log in arrival order
    for msg in arrivals {
        if let Message::Seed(sm) = msg {
            sketch.insert(sm.seed, &sm.covering);
        }
    }
    let diagnostics = diagnostics_from(&sketch, &tracker);
    Ok((sketch.finalize(), tracker.take_locals(), diagnostics))
}

/// Merge per-sender FIFO queues into one arrival order, choosing the next
/// sender uniformly under a seeded scheduler.
pub fn interleave_fifo(queues: Vec<Vec<Message>>, scheduler_seed: u64) -> Vec<Message> {
    let mut rng = keyed_rng(scheduler_seed, stream::SCHEDULER, 0);
    let mut queues: Vec<VecDeque<Message>> = queues.into_iter().map(VecDeque::from).collect();
    let mut live: Vec<usize> = (0..queues.len()).filter(|&i| !queues[i].is_empty()).collect();
    let mut out = Vec::new();
    while !live.is_empty() {
        let j = rng.gen_range(0..live.len());
        let q = live[j];
        out.push(queues[q].pop_front().unwrap());
        if queues[q].is_empty() {
            live.swap_remove(j);
        }
    }
    out
}

/// Best of the streaming solution and the senders' locals. Ties go to the
/// global, then to the lowest sender rank.
pub fn select_final(global: Option<&Solution>, locals: &[Solution]) -> Result<Solution> {
    let mut best: Option<&Solution> = global;
    for loc in locals {
        if best.is_none_or(|b| loc.coverage > b.coverage) {
            best = Some(loc);
        }
    }
    best.cloned()
        .ok_or_else(|| Error::Parameter("select_final needs at least one candidate".into()))
}

/// How selection runs: live threads and channels, live threads over framed
/// byte streams, or senders-then-receiver under a seeded serialized scheduler.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Threaded,
    Wire,
    Serialized { scheduler_seed: u64 },
}

#[derive(Debug, Clone)]
pub struct RoundConfig {
    pub k: usize,
    pub alpha: f64,
    pub delta: f64,
    pub m: u32,
    pub bucket_workers: usize,
    pub bucket_override: Option<usize>,
    pub sampling_seed: u64,
    pub partition_seed: u64,
    pub execution: Execution,
}

#[derive(Debug, Clone, Default)]
pub struct PhaseTimings {
    pub sampling_s: f64,
    pub shuffle_s: f64,
    pub sender_select_s: f64,
    pub receiver_select_s: f64,
    pub total_s: f64,
}

/// Everything a round produces: the chosen solution plus its inputs and
/// bookkeeping, coverage always over the full sample universe.
#[derive(Debug, Clone)]
pub struct RoundOutcome {
    pub solution: Solution,
    pub global: Solution,
    pub locals: Vec<Solution>,
    pub sender_stats: Vec<SenderStats>,
    pub receiver: ReceiverDiagnostics,
    pub timings: PhaseTimings,
}

/// Contiguous per-rank sample-id slice: rank `p` owns
/// `[p * theta_hat / m, (p+1) * theta_hat / m)`.
pub fn rank_slice(theta_hat: u32, m: u32, p: u32) -> (u32, u32) {
    let lo = (p as u64 * theta_hat as u64 / m as u64) as u32;
    let hi = ((p as u64 + 1) * theta_hat as u64 / m as u64) as u32;
    (lo, hi)
}

/// One full distributed round: every rank samples its slice of
/// `[0, theta_hat)`, vertices are partitioned and covering sets shuffled to
/// their owners, senders and receiver run selection concurrently, and the
/// best of the global and local solutions wins.
pub fn run_round(
    graph: &Graph,
    model: Model,
    theta_hat: u32,
    cfg: &RoundConfig,
) -> Result<RoundOutcome> {
    let total = Stopwatch::start();

    let watch = Stopwatch::start();
    let mut locals_sets = Vec::with_capacity(cfg.m as usize);
    for p in 0..cfg.m {
        let (lo, hi) = rank_slice(theta_hat, cfg.m, p);
        let batch = generate_batch(graph, model, lo, hi, cfg.sampling_seed)?;
        let sets = build_covering_sets(&batch, None)?;
        locals_sets.push(LocalCoveringSets { rank: p, id_lo: lo, id_hi: hi, sets });
    }
    let sampling_s = watch.seconds();

    let watch = Stopwatch::start();
    let assignment = partition_vertices(graph.n(), cfg.m, cfg.partition_seed)?;
    let owned = shuffle_covering_sets(&locals_sets, &assignment)?;
    let shuffle_s = watch.seconds();

    let mut outcome = execute_selection(&owned, theta_hat as usize, cfg)?;
    outcome.timings.sampling_s = sampling_s;
    outcome.timings.shuffle_s = shuffle_s;
    outcome.timings.total_s = total.seconds();
    Ok(outcome)
}

/// The sender/receiver stage alone, over already-shuffled per-rank covering
/// sets (index 0 belongs to the receiver and must own nothing). Exposed so
/// synthetic covering instances can drive the protocol directly.
pub fn execute_selection(
    owned: &[Vec<CoveringSet>],
    universe_size: usize,
    cfg: &RoundConfig,
) -> Result<RoundOutcome> {
    if cfg.m < 2 {
        return Err(Error::Config(format!("need at least 2 ranks, got {}", cfg.m)));
    }
    if owned.len() != cfg.m as usize {
        return Err(Error::Config(format!(
            "expected {} per-rank collections, got {}",
            cfg.m,
            owned.len()
        )));
    }
    if !owned[0].is_empty() {
        return Err(Error::Config("rank 0 is the receiver and may not own vertices".into()));
    }
    let receiver_cfg = ReceiverConfig {
        k: cfg.k,
        delta: cfg.delta,
        bucket_workers: cfg.bucket_workers,
        universe_size,
        bucket_override: cfg.bucket_override,
    };
    let senders = cfg.m as usize - 1;

    let (global, locals, receiver, sender_stats, sender_s, receiver_s) = match cfg.execution {
        Execution::Serialized { scheduler_seed } => {
            let watch = Stopwatch::start();
            let mut queues = Vec::with_capacity(senders);
            let mut stats = Vec::with_capacity(senders);
            for rank in 1..cfg.m {
                let mut outbox = Outbox::Buffer(Vec::new());
                let (_, st) = run_sender(
                    rank,
                    &owned[rank as usize],
                    universe_size,
                    cfg.k,
                    cfg.alpha,
                    &mut outbox,
                )?;
                queues.push(outbox.into_buffer());
                stats.push(st);
            }
            let sender_s = watch.seconds();
            let arrivals = interleave_fifo(queues, scheduler_seed);
            let watch = Stopwatch::start();
            let (global, locals, diag) =
                run_receiver_serialized(&arrivals, senders, &receiver_cfg)?;
            (global, locals, diag, stats, sender_s, watch.seconds())
        }
        Execution::Threaded | Execution::Wire => {
            let wired = cfg.execution == Execution::Wire;
            let mut outboxes = Vec::with_capacity(senders);
            let mut inboxes = Vec::with_capacity(senders);
            for _ in 0..senders {
                if wired {
                    let (tx, rx) = wire::byte_channel(universe_size as u64);
                    outboxes.push(Outbox::Wire(tx));
                    inboxes.push(Inbox::Wire(rx));
                } else {
                    let (tx, rx) = mpsc::channel();
                    outboxes.push(Outbox::Channel(tx));
                    inboxes.push(Inbox::Channel(rx));
                }
            }
            let watch = Stopwatch::start();
            let (recv_result, sender_results) = std::thread::scope(|scope| {
                let handles: Vec<_> = outboxes
                    .into_iter()
                    .enumerate()
                    .map(|(i, mut outbox)| {
                        let rank = i as u32 + 1;
                        let sets = &owned[rank as usize];
                        scope.spawn(move || {
                            run_sender(rank, sets, universe_size, cfg.k, cfg.alpha, &mut outbox)
                        })
                    })
                    .collect();
                let recv = run_receiver(inboxes, &receiver_cfg);
                let senders: Vec<_> =
                    handles.into_iter().map(|h| h.join().expect("sender panicked")).collect();
                (recv, senders)
            });
            let elapsed = watch.seconds();
            // a receiver failure is the root cause of any sender transport
            // errors it provoked, so surface it first
            let (global, locals, diag) = recv_result?;
            let mut stats = Vec::with_capacity(senders);
            let mut sender_s = 0.0f64;
            for r in sender_results {
                let (_, st) = r?;
                sender_s = sender_s.max(st.select_s);
                stats.push(st);
            }
            (global, locals, diag, stats, sender_s, elapsed)
        }
    };

    let solution = select_final(Some(&global), &locals)?;
    Ok(RoundOutcome {
        solution,
        global,
        locals,
        sender_stats,
        receiver,
        timings: PhaseTimings {
            sampling_s: 0.0,
            shuffle_s: 0.0,
            sender_select_s: sender_s,
            receiver_select_s: receiver_s,
            total_s: 0.0,
        },
    })
}
