use std::sync::atomic::{AtomicBool, AtomicI64, AtomicU64, AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};
use std::time::Instant;

use super::bound::upper_bound_with;
use super::greedy::play_greedy;
use super::spiral::spiral_rank;
use super::{AnchorOrder, LevelOrder, OptResult, ProofStatus, SearchConfig, SearchStats};
use crate::rules::{BoardState, Instance, Placement, VariantKind};

const FLUSH_EVERY: u64 = 256;

struct Shared<'a> {
    config: &'a SearchConfig,
    instance: &'a Arc<Instance>,
    best: AtomicI64,
    nodes: AtomicU64,
    stop: AtomicBool,
    start: Instant,
    rank: Vec<usize>,
}

impl Shared<'_> {
    fn stopped(&self) -> bool {
        self.stop.load(Ordering::Relaxed)
    }
}

struct Worker<'a> {
    shared: &'a Shared<'a>,
    state: BoardState,
    best: i64,
    best_seq: Vec<Placement>,
    found: Option<Vec<Placement>>,
    stats: SearchStats,
    pending: u64,
    buffers: Vec<Vec<Placement>>,
}

impl<'a> Worker<'a> {
    fn new(shared: &'a Shared<'a>) -> Worker<'a> {
        let k = shared.instance.deck_len();
        Worker {
            shared,
            state: BoardState::new(shared.instance.clone()),
            best: -1,
            best_seq: Vec::new(),
            found: None,
            stats: SearchStats::default(),
            pending: 0,
            buffers: vec![Vec::new(); k + 1],
        }
    }

    fn tick(&mut self) {
        self.stats.nodes += 1;
        self.pending += 1;
        if self.pending >= FLUSH_EVERY {
            self.flush();
        }
    }

    fn flush(&mut self) {
        let sh = self.shared;
        let total = sh.nodes.fetch_add(self.pending, Ordering::Relaxed) + self.pending;
        self.pending = 0;
        let over_nodes = sh.config.node_limit.is_some_and(|limit| total >= limit);
        let over_time = sh.config.time_limit.is_some_and(|limit| sh.start.elapsed() >= limit);
        if over_nodes || over_time {
            sh.stop.store(true, Ordering::Relaxed);
        }
    }

    fn incumbent(&self) -> i64 {
        self.best.max(self.shared.best.load(Ordering::Relaxed))
    }

    fn digits(&self) -> Vec<u8> {
        let inst = &**self.shared.instance;
        match inst.kind() {
            VariantKind::Known => self.state.next_digit().into_iter().collect(),
            VariantKind::Free => (0..=inst.max_digit()).filter(|&d| self.state.copies_used(d) < inst.copies()).collect(),
        }
    }

    fn bound(&self) -> i64 {
        upper_bound_with(&self.state, self.shared.config.area_monotonicity)
    }

    fn level_range(&self, ascending: bool) -> Vec<usize> {
        let levels = if self.state.cards_placed() == 0 && self.shared.config.first_card_level_one {
            1
        } else {
            self.shared.instance.levels()
        };
        if ascending {
            (1..=levels).collect()
        } else {
            (1..=levels).rev().collect()
        }
    }

    /// Children for the optimizing pass, in exploration order.
    fn ordered_children(&self, digit: u8, out: &mut Vec<Placement>) {
        out.clear();
        let ascending = self.shared.config.level_order == LevelOrder::Ascending;
        let s = self.shared.instance.grid();
        for level in self.level_range(ascending) {
            if !self.state.level_open(level) {
                continue;
            }
            let start = out.len();
            self.state.scan_level(digit, level, |p| {
                out.push(p);
                true
            });
            if self.shared.config.anchor_order == AnchorOrder::Spiral {
                let rank = &self.shared.rank;
                out[start..].sort_by_key(|p| (rank[p.row as usize * s + p.col as usize], p.orientation));
            }
        }
    }

    fn first_on_level(&self, digit: u8, level: usize) -> Option<Placement> {
        let mut found = None;
        self.state.scan_level(digit, level, |p| {
            found = Some(p);
            false
        });
        found
    }

    fn record(&mut self, value: i64, last: Option<Placement>) {
        if value > self.incumbent() {
            self.best = value;
            self.best_seq = self.state.placements().to_vec();
            self.best_seq.extend(last);
            self.shared.best.fetch_max(value, Ordering::Relaxed);
        }
    }

    fn optimize(&mut self) {
        if self.shared.stopped() {
            return;
        }
        let k = self.shared.instance.deck_len();
        let depth = self.state.cards_placed();
        if depth == k {
            self.tick();
            let score = self.state.score();
            self.record(score, None);
            return;
        }
        if self.shared.config.upper_bound && self.bound() <= self.incumbent() {
            self.stats.pruned += 1;
            return;
        }
        if depth + 1 == k {
            self.last_card();
            return;
        }
        let mut any = false;
        let mut buf = std::mem::take(&mut self.buffers[depth]);
        for digit in self.digits() {
            self.ordered_children(digit, &mut buf);
            any |= !buf.is_empty();
            for p in &buf {
                if self.shared.stopped() {
                    break;
                }
                self.state.commit(p);
                self.tick();
                self.optimize();
                self.state.undo();
            }
        }
        self.buffers[depth] = buf;
        if !any {
            self.stats.dead_ends += 1;
        }
    }

    /// The last card only needs its highest reachable level per digit.
    fn last_card(&mut self) {
        let score = self.state.score();
        let mut any = false;
        for digit in self.digits() {
            for level in self.level_range(false) {
                if !self.state.level_open(level) {
                    continue;
                }
                if let Some(p) = self.first_on_level(digit, level) {
                    any = true;
                    self.tick();
                    self.record(score + digit as i64 * (level as i64 - 1), Some(p));
                    break;
                }
            }
        }
        if !any {
            self.stats.dead_ends += 1;
        }
    }

    /// Depth-first in canonical order; stops at the first play worth `target`.
    fn canonical(&mut self, target: i64) -> bool {
        if self.shared.stopped() {
            return false;
        }
        let k = self.shared.instance.deck_len();
        let depth = self.state.cards_placed();
        if depth == k {
            self.tick();
            if self.state.score() == target {
                self.found = Some(self.state.placements().to_vec());
                return true;
            }
            return false;
        }
        if self.shared.config.upper_bound && self.bound() < target {
            self.stats.pruned += 1;
            return false;
        }
        if depth + 1 == k {
            return self.canonical_last(target);
        }
        let mut buf = std::mem::take(&mut self.buffers[depth]);
        let mut hit = false;
        'digits: for digit in self.digits() {
            buf.clear();
            for level in self.level_range(true) {
                self.state.scan_level(digit, level, |p| {
                    buf.push(p);
                    true
                });
            }
            for p in &buf {
                if self.shared.stopped() {
                    break 'digits;
                }
                self.state.commit(p);
                self.tick();
                hit = self.canonical(target);
                self.state.undo();
                if hit {
                    break 'digits;
                }
            }
        }
        self.buffers[depth] = buf;
        hit
    }

    fn canonical_last(&mut self, target: i64) -> bool {
        let rest = target - self.state.score();
        for digit in self.digits() {
            let levels: Vec<usize> = if digit == 0 {
                if rest != 0 {
                    continue;
                }
                self.level_range(true)
            } else {
                if rest < 0 || rest % digit as i64 != 0 {
                    continue;
                }
                let level = (rest / digit as i64 + 1) as usize;
                if !self.level_range(true).contains(&level) {
                    continue;
                }
                vec![level]
            };
            for level in levels {
                self.tick();
                if let Some(p) = self.first_on_level(digit, level) {
                    let mut seq = self.state.placements().to_vec();
                    seq.push(p);
                    self.found = Some(seq);
                    return true;
                }
            }
        }
        false
    }
}

/// Root tasks: the first card's choices in the given order, or the root
/// itself when the deck has a single card.
fn root_tasks(shared: &Shared<'_>, canonical: bool) -> Vec<Option<Placement>> {
    if shared.instance.deck_len() < 2 {
        return vec![None];
    }
    let mut w = Worker::new(shared);
    let mut out = Vec::new();
    let mut buf = Vec::new();
    for digit in w.digits() {
        if canonical {
            buf.clear();
            for level in w.level_range(true) {
                w.state.scan_level(digit, level, |p| {
                    buf.push(p);
                    true
                });
            }
        } else {
            w.ordered_children(digit, &mut buf);
        }
        out.extend(buf.iter().copied().map(Some));
    }
    w.buffers.clear();
    out
}

fn sequence_key(seq: &[Placement]) -> Vec<(u8, u8, u8, u8, u8)> {
    seq.iter().map(Placement::sequence_key).collect()
}

pub(super) fn run(instance: &Arc<Instance>, config: &SearchConfig) -> OptResult {
    let shared = Shared {
        config,
        instance,
        best: AtomicI64::new(-1),
        nodes: AtomicU64::new(0),
        stop: AtomicBool::new(false),
        start: Instant::now(),
        rank: spiral_rank(instance.grid()),
    };
    let threads = config.threads.max(1);
    let mut stats = SearchStats::default();

    // incumbent candidates: (value, sequence)
    let mut candidates: Vec<(i64, Vec<Placement>)> = Vec::new();
    if config.greedy_incumbent {
        for deck in greedy_decks(instance) {
            if let Ok(state) = play_greedy(instance, &deck) {
                candidates.push((state.score(), state.placements().to_vec()));
            }
        }
        if let Some(best) = candidates.iter().map(|c| c.0).max() {
            shared.best.store(best, Ordering::Relaxed);
        }
    }

    // optimizing pass
    let tasks = root_tasks(&shared, false);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(i64, Vec<Placement>, SearchStats)>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| {
                let mut w = Worker::new(&shared);
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks.len() || shared.stopped() {
                        break;
                    }
                    match tasks[i] {
                        None => w.optimize(),
                        Some(p) => {
                            w.state.commit(&p);
                            w.tick();
                            w.optimize();
                            w.state.undo();
                        }
                    }
                }
                w.flush();
                results.lock().unwrap().push((w.best, w.best_seq, w.stats));
            });
        }
    });
    for (value, seq, s) in results.into_inner().unwrap() {
        merge_stats(&mut stats, &s);
        if value >= 0 {
            candidates.push((value, seq));
        }
    }
    let incumbent = candidates
        .into_iter()
        .max_by(|a, b| a.0.cmp(&b.0).then_with(|| sequence_key(&b.1).cmp(&sequence_key(&a.1))));

    let finish = |stats: &mut SearchStats, best: Option<(i64, Vec<Placement>)>, proof| {
        stats.elapsed_ms = shared.start.elapsed().as_millis() as u64;
        let (best_score, placements) = match best {
            Some((v, seq)) => (Some(v), seq),
            None => (None, Vec::new()),
        };
        OptResult { best_score, placements, proof, stats: *stats }
    };

    if shared.stopped() {
        return finish(&mut stats, incumbent, ProofStatus::BoundLimited);
    }
    let Some((target, fallback)) = incumbent else {
        return finish(&mut stats, None, ProofStatus::Optimal);
    };

    // canonical pass
    let tasks = root_tasks(&shared, true);
    let next = AtomicUsize::new(0);
    let first_hit = AtomicUsize::new(usize::MAX);
    let hits: Mutex<Vec<(usize, Vec<Placement>)>> = Mutex::new(Vec::new());
    let worker_stats: Mutex<Vec<SearchStats>> = Mutex::new(Vec::new());
    std::thread::scope(|scope| {
        for _ in 0..threads {
            scope.spawn(|| {
                let mut w = Worker::new(&shared);
                loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= tasks.len() || shared.stopped() || first_hit.load(Ordering::Relaxed) < i {
                        break;
                    }
                    let hit = match tasks[i] {
                        None => w.canonical(target),
                        Some(p) => {
                            w.state.commit(&p);
                            w.tick();
                            let hit = w.canonical(target);
                            w.state.undo();
                            hit
                        }
                    };
                    if hit {
                        first_hit.fetch_min(i, Ordering::Relaxed);
                        hits.lock().unwrap().push((i, w.found.take().unwrap()));
                    }
                }
                w.flush();
                worker_stats.lock().unwrap().push(w.stats);
            });
        }
    });
    for s in worker_stats.into_inner().unwrap() {
        merge_stats(&mut stats, &s);
    }
    let hit = hits.into_inner().unwrap().into_iter().min_by_key(|h| h.0);
    match hit {
        Some((_, seq)) if !shared.stopped() => finish(&mut stats, Some((target, seq)), ProofStatus::Optimal),
        _ => finish(&mut stats, Some((target, fallback)), ProofStatus::BoundLimited),
    }
}

fn merge_stats(into: &mut SearchStats, s: &SearchStats) {
    into.nodes += s.nodes;
    into.dead_ends += s.dead_ends;
    into.pruned += s.pruned;
}

/// Decks tried for the greedy incumbent: the fixed deck, or for free
/// instances the largest digits in ascending and descending order.
fn greedy_decks(instance: &Instance) -> Vec<Vec<u8>> {
    match instance.kind() {
        VariantKind::Known => vec![instance.deck().expect("known instances carry a deck").draws().to_vec()],
        VariantKind::Free => {
            let mut pool: Vec<u8> = (0..=instance.max_digit())
                .flat_map(|d| std::iter::repeat_n(d, instance.copies() as usize))
                .collect();
            pool.reverse();
            pool.truncate(instance.deck_len());
            let descending = pool.clone();
            pool.reverse();
            vec![pool, descending]
        }
    }
}
