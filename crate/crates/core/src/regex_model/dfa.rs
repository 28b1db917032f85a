//! Automata over `{0, 1, 2}`: Thompson construction, subset construction,
//! Hopcroft minimization, and the fixed-length scope product used by the
//! placement constraints.
//!
//! Automata are kept partial and trimmed: a missing transition rejects, and
//! every state lies on some accepting path (except the start state of an
//! automaton with an empty language).

use std::collections::{HashMap, VecDeque};

use num_bigint::BigUint;
use num_traits::Zero;

use super::regex::{PlacementRegex, Regex, PART};

pub const ALPHABET: usize = 3;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dfa {
    trans: Vec<[Option<u32>; ALPHABET]>,
    accepting: Vec<bool>,
    start: u32,
}

impl Dfa {
    pub fn state_count(&self) -> usize {
        self.trans.len()
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn is_accepting(&self, state: u32) -> bool {
        self.accepting[state as usize]
    }

    pub fn accepting_states(&self) -> Vec<u32> {
        (0..self.trans.len() as u32).filter(|&q| self.accepting[q as usize]).collect()
    }

    pub fn next(&self, state: u32, symbol: u8) -> Option<u32> {
        self.trans[state as usize].get(symbol as usize).copied().flatten()
    }

    /// `(from, symbol, to)` triples in state then symbol order.
    pub fn transitions(&self) -> Vec<(u32, u8, u32)> {
        let mut out = Vec::new();
        for (q, row) in self.trans.iter().enumerate() {
            for (a, t) in row.iter().enumerate() {
                if let Some(t) = t {
                    out.push((q as u32, a as u8, *t));
                }
            }
        }
        out
    }

    pub fn accepts(&self, word: &[u8]) -> bool {
        let mut q = self.start;
        for &a in word {
            match self.next(q, a) {
                Some(t) => q = t,
                None => return false,
            }
        }
        self.is_accepting(q)
    }

    /// Builds an automaton from raw parts; unreachable or dead states are
    /// removed and states renumbered canonically.
    pub fn from_parts(trans: Vec<[Option<u32>; ALPHABET]>, accepting: Vec<bool>, start: u32) -> Dfa {
        Dfa { trans, accepting, start }.trimmed()
    }

    /// Drops states that are unreachable or cannot reach acceptance, then
    /// renumbers breadth-first from the start state (symbol order).
    fn trimmed(&self) -> Dfa {
        let n = self.trans.len();
        let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (q, row) in self.trans.iter().enumerate() {
            for t in row.iter().flatten() {
                rev[*t as usize].push(q as u32);
            }
        }
        let mut live = self.accepting.clone();
        let mut queue: VecDeque<u32> = (0..n as u32).filter(|&q| live[q as usize]).collect();
        while let Some(q) = queue.pop_front() {
            for &p in &rev[q as usize] {
                if !live[p as usize] {
                    live[p as usize] = true;
                    queue.push_back(p);
                }
            }
        }
        let mut order: Vec<u32> = Vec::new();
        let mut index: Vec<Option<u32>> = vec![None; n];
        index[self.start as usize] = Some(0);
        order.push(self.start);
        let mut head = 0;
        while head < order.len() {
            let q = order[head];
            head += 1;
            for t in self.trans[q as usize].iter().flatten() {
                if live[*t as usize] && index[*t as usize].is_none() {
                    index[*t as usize] = Some(order.len() as u32);
                    order.push(*t);
                }
            }
        }
        let trans = order
            .iter()
            .map(|&q| {
                let mut row = [None; ALPHABET];
                for (a, t) in self.trans[q as usize].iter().enumerate() {
                    if let Some(t) = t {
                        if live[*t as usize] {
                            row[a] = index[*t as usize];
                        }
                    }
                }
                row
            })
            .collect();
        let accepting = order.iter().map(|&q| self.accepting[q as usize]).collect();
        Dfa { trans, accepting, start: 0 }
    }
}

/// Thompson NFA with epsilon moves.
#[derive(Default)]
struct Nfa {
    eps: Vec<Vec<usize>>,
    moves: Vec<Vec<(u8, usize)>>,
}

impl Nfa {
    fn state(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.moves.push(Vec::new());
        self.eps.len() - 1
    }

    /// Returns the (entry, exit) pair of the fragment for `re`.
    fn fragment(&mut self, re: &Regex, grid: usize) -> (usize, usize) {
        match re {
            Regex::Symbol(a) => {
                let (i, o) = (self.state(), self.state());
                self.moves[i].push((*a, o));
                (i, o)
            }
            Regex::Concat(items) => {
                let entry = self.state();
                let mut exit = entry;
                for item in items {
                    let (i, o) = self.fragment(item, grid);
                    self.eps[exit].push(i);
                    exit = o;
                }
                (entry, exit)
            }
            Regex::Alt(items) => {
                let (entry, exit) = (self.state(), self.state());
                for item in items {
                    let (i, o) = self.fragment(item, grid);
                    self.eps[entry].push(i);
                    self.eps[o].push(exit);
                }
                (entry, exit)
            }
            Regex::Repeat(inner, count) => {
                let entry = self.state();
                let mut exit = entry;
                for _ in 0..count.eval(grid) {
                    let (i, o) = self.fragment(inner, grid);
                    self.eps[exit].push(i);
                    exit = o;
                }
                (entry, exit)
            }
            Regex::Star(inner) => {
                let (entry, exit) = (self.state(), self.state());
                let (i, o) = self.fragment(inner, grid);
                self.eps[entry].push(i);
                self.eps[entry].push(exit);
                self.eps[o].push(i);
                self.eps[o].push(exit);
                (entry, exit)
            }
        }
    }

    fn closure(&self, seeds: impl IntoIterator<Item = usize>) -> Vec<usize> {
        let mut seen = vec![false; self.eps.len()];
        let mut stack: Vec<usize> = Vec::new();
        for s in seeds {
            if !seen[s] {
                seen[s] = true;
                stack.push(s);
            }
        }
        let mut out = Vec::new();
        while let Some(q) = stack.pop() {
            out.push(q);
            for &t in &self.eps[q] {
                if !seen[t] {
                    seen[t] = true;
                    stack.push(t);
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Subset construction from a Thompson NFA, grid counts evaluated for `grid`.
pub fn determinize(re: &Regex, grid: usize) -> Dfa {
    let mut nfa = Nfa::default();
    let (entry, exit) = nfa.fragment(re, grid);
    let start = nfa.closure([entry]);
    let mut ids: HashMap<Vec<usize>, u32> = HashMap::new();
    let mut sets: Vec<Vec<usize>> = Vec::new();
    let mut trans: Vec<[Option<u32>; ALPHABET]> = Vec::new();
    ids.insert(start.clone(), 0);
    sets.push(start);
    let mut head = 0;
    while head < sets.len() {
        let set = sets[head].clone();
        let mut row = [None; ALPHABET];
        for (a, slot) in row.iter_mut().enumerate() {
            let targets: Vec<usize> = set
                .iter()
                .flat_map(|&q| nfa.moves[q].iter().filter(|(b, _)| *b as usize == a).map(|&(_, t)| t))
                .collect();
            if targets.is_empty() {
                continue;
            }
            let next = nfa.closure(targets);
            let id = *ids.entry(next.clone()).or_insert_with(|| {
                sets.push(next);
                (sets.len() - 1) as u32
            });
            *slot = Some(id);
        }
        trans.push(row);
        head += 1;
    }
    let accepting = sets.iter().map(|s| s.binary_search(&exit).is_ok()).collect();
    Dfa { trans, accepting, start: 0 }
}

/// Hopcroft partition refinement. The result is trimmed and canonically
/// numbered, so equal languages give identical automata.
pub fn minimize(dfa: &Dfa) -> Dfa {
    let dfa = dfa.trimmed();
    let n = dfa.trans.len();
    // complete with an explicit dead state `n`
    let total = n + 1;
    let dead = n as u32;
    let delta = |q: u32, a: usize| -> u32 {
        if q == dead {
            dead
        } else {
            dfa.trans[q as usize][a].unwrap_or(dead)
        }
    };
    // predecessors per symbol, compressed rows
    let mut pred_start: Vec<Vec<u32>> = Vec::with_capacity(ALPHABET);
    let mut pred: Vec<Vec<u32>> = Vec::with_capacity(ALPHABET);
    for a in 0..ALPHABET {
        let mut count = vec![0u32; total + 1];
        for q in 0..total as u32 {
            count[delta(q, a) as usize + 1] += 1;
        }
        for i in 0..total {
            count[i + 1] += count[i];
        }
        let mut fill = count.clone();
        let mut list = vec![0u32; total];
        for q in 0..total as u32 {
            let t = delta(q, a) as usize;
            list[fill[t] as usize] = q;
            fill[t] += 1;
        }
        pred_start.push(count);
        pred.push(list);
    }

    let mut part = Partition::new(total, |q| q != dead && dfa.accepting[q as usize]);
    let mut in_work = vec![true; part.blocks()];
    let mut work: Vec<u32> = (0..part.blocks() as u32).collect();
    let mut splitter = Vec::new();
    let mut touched = Vec::new();
    while let Some(s) = work.pop() {
        in_work[s as usize] = false;
        splitter.clear();
        splitter.extend_from_slice(part.members(s));
        for a in 0..ALPHABET {
            touched.clear();
            for &q in &splitter {
                let (lo, hi) = (pred_start[a][q as usize] as usize, pred_start[a][q as usize + 1] as usize);
                for &p in &pred[a][lo..hi] {
                    part.mark(p, &mut touched);
                }
            }
            for &b in &touched {
                if let Some(c) = part.split(b) {
                    in_work.push(false);
                    let target = if in_work[b as usize] || part.size(c) <= part.size(b) { c } else { b };
                    in_work[target as usize] = true;
                    work.push(target);
                }
            }
        }
    }

    let class_of = &part.block_of;
    let dead_class = class_of[dead as usize];
    let classes = part.blocks();
    let mut trans = vec![[None; ALPHABET]; classes];
    let mut acc = vec![false; classes];
    for q in 0..n as u32 {
        let c = class_of[q as usize] as usize;
        acc[c] = dfa.accepting[q as usize];
        for a in 0..ALPHABET {
            let t = class_of[delta(q, a) as usize];
            trans[c][a] = if t == dead_class { None } else { Some(t) };
        }
    }
    Dfa { trans, accepting: acc, start: class_of[0] }.trimmed()
}

/// Blocks are contiguous ranges of `elems`; marked states are moved to the
/// front of their block so a split costs only the marked count.
struct Partition {
    elems: Vec<u32>,
    loc: Vec<u32>,
    block_of: Vec<u32>,
    start: Vec<u32>,
    end: Vec<u32>,
    marked: Vec<u32>,
}

impl Partition {
    fn new(total: usize, accepting: impl Fn(u32) -> bool) -> Partition {
        let mut elems: Vec<u32> = (0..total as u32).filter(|&q| accepting(q)).collect();
        let finals = elems.len();
        elems.extend((0..total as u32).filter(|&q| !accepting(q)));
        let mut p = Partition {
            loc: vec![0; total],
            block_of: vec![0; total],
            start: Vec::new(),
            end: Vec::new(),
            marked: Vec::new(),
            elems,
        };
        for (lo, hi) in [(0, finals), (finals, total)] {
            if lo < hi {
                let b = p.start.len() as u32;
                p.start.push(lo as u32);
                p.end.push(hi as u32);
                p.marked.push(0);
                for i in lo..hi {
                    let q = p.elems[i] as usize;
                    p.block_of[q] = b;
                    p.loc[q] = i as u32;
                }
            }
        }
        p
    }

    fn blocks(&self) -> usize {
        self.start.len()
    }

    fn size(&self, b: u32) -> u32 {
        self.end[b as usize] - self.start[b as usize]
    }

    fn members(&self, b: u32) -> &[u32] {
        &self.elems[self.start[b as usize] as usize..self.end[b as usize] as usize]
    }

    fn mark(&mut self, q: u32, touched: &mut Vec<u32>) {
        let b = self.block_of[q as usize] as usize;
        let i = self.loc[q as usize];
        let j = self.start[b] + self.marked[b];
        if i < j {
            return;
        }
        let other = self.elems[j as usize];
        self.elems.swap(i as usize, j as usize);
        self.loc[q as usize] = j;
        self.loc[other as usize] = i;
        if self.marked[b] == 0 {
            touched.push(b as u32);
        }
        self.marked[b] += 1;
    }

    /// Splits the marked front off block `b` as a new block, unless all of
    /// `b` is marked. Clears the marks either way.
    fn split(&mut self, b: u32) -> Option<u32> {
        let bi = b as usize;
        let m = self.marked[bi];
        self.marked[bi] = 0;
        if m == 0 || m == self.end[bi] - self.start[bi] {
            return None;
        }
        let c = self.start.len() as u32;
        let lo = self.start[bi];
        self.start.push(lo);
        self.end.push(lo + m);
        self.marked.push(0);
        self.start[bi] = lo + m;
        for i in lo..lo + m {
            self.block_of[self.elems[i as usize] as usize] = c;
        }
        Some(c)
    }
}

/// Compiles a plain expression (no scope) into a minimal automaton.
pub fn compile_regex(re: &Regex, grid: usize) -> Dfa {
    minimize(&determinize(re, grid))
}

/// Compiles a placement expression within its constraint scope: words have
/// length `1 + s^2`, and the part symbol never lands on a border cell (the
/// level grid's border is fixed to 0).
pub fn compile(placement: &PlacementRegex) -> Dfa {
    let base = compile_regex(&placement.regex, placement.grid);
    minimize(&scope_product(&base, placement.grid))
}

/// Product of `dfa` with a position counter over the scope
/// `control, cell(0,0), ..., cell(s-1,s-1)`.
pub fn scope_product(dfa: &Dfa, grid: usize) -> Dfa {
    let len = (1 + grid * grid) as u32;
    let border = |pos: u32| {
        let cell = (pos - 1) as usize;
        let (r, c) = (cell / grid, cell % grid);
        r == 0 || c == 0 || r == grid - 1 || c == grid - 1
    };
    let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
    let mut pairs: Vec<(u32, u32)> = vec![(dfa.start, 0)];
    ids.insert((dfa.start, 0), 0);
    let mut trans: Vec<[Option<u32>; ALPHABET]> = Vec::new();
    let mut head = 0;
    while head < pairs.len() {
        let (q, pos) = pairs[head];
        head += 1;
        let mut row = [None; ALPHABET];
        if pos < len {
            for (a, slot) in row.iter_mut().enumerate() {
                if a as u8 == PART && pos > 0 && border(pos) {
                    continue;
                }
                if let Some(t) = dfa.next(q, a as u8) {
                    let key = (t, pos + 1);
                    let id = *ids.entry(key).or_insert_with(|| {
                        pairs.push(key);
                        (pairs.len() - 1) as u32
                    });
                    *slot = Some(id);
                }
            }
        }
        trans.push(row);
    }
    let accepting = pairs.iter().map(|&(q, pos)| pos == len && dfa.is_accepting(q)).collect();
    Dfa { trans, accepting, start: 0 }
}

/// Number of accepted words of exactly `len` symbols.
pub fn count_accepted(dfa: &Dfa, len: usize) -> BigUint {
    let mut ways = vec![BigUint::zero(); dfa.state_count()];
    ways[dfa.start as usize] = BigUint::from(1u32);
    for _ in 0..len {
        let mut next = vec![BigUint::zero(); dfa.state_count()];
        for (q, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for t in dfa.trans[q].iter().flatten() {
                next[*t as usize] += w;
            }
        }
        ways = next;
    }
    ways.iter()
        .enumerate()
        .filter(|(q, _)| dfa.accepting[*q])
        .map(|(_, w)| w.clone())
        .sum()
}

/// Accepted words of length `len` in lexicographic order, up to `limit`.
pub fn accepted_words(dfa: &Dfa, len: usize, limit: usize) -> Vec<Vec<u8>> {
    fn walk(dfa: &Dfa, q: u32, len: usize, word: &mut Vec<u8>, out: &mut Vec<Vec<u8>>, limit: usize) {
        if out.len() >= limit {
            return;
        }
        if word.len() == len {
            if dfa.is_accepting(q) {
                out.push(word.clone());
            }
            return;
        }
        for a in 0..ALPHABET as u8 {
            if let Some(t) = dfa.next(q, a) {
                word.push(a);
                walk(dfa, t, len, word, out, limit);
                word.pop();
            }
        }
    }
    let mut out = Vec::new();
    walk(dfa, dfa.start, len, &mut Vec::with_capacity(len), &mut out, limit);
    out
}
