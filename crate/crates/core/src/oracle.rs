//! Brute-force reference: every legal play of a tiny instance, with a
//! from-scratch state checker that does not reuse the engine's incremental
//! bookkeeping.

use std::collections::BTreeSet;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{enumerate_decks, placement_cells, BoardState, Instance, Placement, VariantKind};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationReport {
    pub instance: String,
    pub decks: u64,
    pub terminals: u64,
    /// `None` when no deck can be played out.
    pub max_score: Option<i64>,
    pub optimal_terminals: u64,
    /// Nodes visited (states reached by a placement).
    pub nodes: u64,
    /// False when the node budget ran out; counts are then lower bounds.
    pub complete: bool,
    /// The first terminals in enumeration order, up to the requested cap.
    pub listed: Vec<Vec<Placement>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("node budget of {0} exhausted")]
pub struct BudgetExceeded(pub u64);

/// Calls `visit` on every terminal state, decks in lexicographic order and
/// placements in canonical order. Returns the number of nodes visited.
pub fn enumerate_terminals<F: FnMut(&BoardState)>(instance: &Instance, budget: Option<u64>, mut visit: F) -> Result<u64, BudgetExceeded> {
    let mut nodes = 0u64;
    for deck in deck_list(instance) {
        let fixed = Arc::new(instance.with_deck(deck).expect("decks from the instance are valid"));
        walk(&BoardState::new(fixed), budget, &mut nodes, &mut visit)?;
    }
    Ok(nodes)
}

fn deck_list(instance: &Instance) -> Vec<crate::rules::Deck> {
    match instance.kind() {
        VariantKind::Known => vec![instance.deck().expect("known instances carry a deck").clone()],
        VariantKind::Free => enumerate_decks(instance.variant()).collect(),
    }
}

fn walk<F: FnMut(&BoardState)>(state: &BoardState, budget: Option<u64>, nodes: &mut u64, visit: &mut F) -> Result<(), BudgetExceeded> {
    if state.is_terminal() {
        visit(state);
        return Ok(());
    }
    let digit = state.next_digit().expect("fixed deck");
    for p in state.legal_placements(digit) {
        *nodes += 1;
        if budget.is_some_and(|b| *nodes > b) {
            return Err(BudgetExceeded(budget.unwrap()));
        }
        let next = state.apply(&p).expect("legal placements apply");
        walk(&next, budget, nodes, visit)?;
    }
    Ok(())
}

/// Exhaustive maximum with no pruning beyond legality. `list_cap` bounds
/// the number of terminals copied into the report.
pub fn best_score_bruteforce(instance: &Instance, budget: Option<u64>, list_cap: usize) -> EnumerationReport {
    let mut report = EnumerationReport {
        instance: instance.describe(),
        decks: deck_list(instance).len() as u64,
        terminals: 0,
        max_score: None,
        optimal_terminals: 0,
        nodes: 0,
        complete: true,
        listed: Vec::new(),
    };
    let result = enumerate_terminals(instance, budget, |state| {
        let score = state.score();
        report.terminals += 1;
        match report.max_score {
            Some(best) if best > score => {}
            Some(best) if best == score => report.optimal_terminals += 1,
            _ => {
                report.max_score = Some(score);
                report.optimal_terminals = 1;
            }
        }
        if report.listed.len() < list_cap {
            report.listed.push(state.placements().to_vec());
        }
    });
    match result {
        Ok(nodes) => report.nodes = nodes,
        Err(BudgetExceeded(b)) => {
            report.nodes = b;
            report.complete = false;
        }
    }
    report
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StateDefect {
    #[error("placement {0} is not a known orientation of its digit")]
    BadOrientation(usize),
    #[error("placement {0} has a cell or halo cell off the grid or on the border")]
    OutOfBounds(usize),
    #[error("placement {0} overlaps another part")]
    Overlap(usize),
    #[error("placement {0} is not fully supported")]
    Unsupported(usize),
    #[error("placement {0} rests on fewer than two parts")]
    SingleSupport(usize),
    #[error("level {level} is not 4-connected after placement {index}")]
    Disconnected { index: usize, level: usize },
    #[error("placement {0} is out of deck order or repeats a copy")]
    Sequence(usize),
    #[error("state grids disagree with the placement list at level {0}")]
    GridMismatch(usize),
}

/// Re-checks a play from nothing: cell sets are rebuilt after every
/// placement and each level's connectivity is found by flood fill.
pub fn validate_from_scratch(instance: &Instance, placements: &[Placement]) -> Result<(), StateDefect> {
    let s = instance.grid() as i64;
    let levels = instance.levels();
    // level -> cell -> index of the placement holding it
    let mut owner: Vec<std::collections::BTreeMap<(usize, usize), usize>> = vec![Default::default(); levels + 1];
    let mut copies = [0u8; 10];
    for (i, p) in placements.iter().enumerate() {
        let n = i + 1;
        if p.card_index != n || p.digit > instance.max_digit() || p.level == 0 || p.level as usize > levels {
            return Err(StateDefect::Sequence(n));
        }
        if let Some(deck) = instance.deck() {
            if deck.draws().get(i) != Some(&p.digit) {
                return Err(StateDefect::Sequence(n));
            }
        }
        copies[p.digit as usize] += 1;
        if p.copy != copies[p.digit as usize] || p.copy > instance.copies() {
            return Err(StateDefect::Sequence(n));
        }
        if p.orientation as usize >= instance.piece(p.digit).orientations.len() {
            return Err(StateDefect::BadOrientation(n));
        }
        let l = p.level as usize;
        let cells = placement_cells(instance, p);
        let inside = |r: i64, c: i64| r >= 1 && c >= 1 && r <= s - 2 && c <= s - 2;
        if cells.iter().any(|&(r, c)| !inside(r as i64, c as i64)) {
            return Err(StateDefect::OutOfBounds(n));
        }
        let orient = &instance.piece(p.digit).orientations[p.orientation as usize];
        for &(r, c) in &orient.halo {
            let (r, c) = (p.row as i64 + r as i64, p.col as i64 + c as i64);
            if r < 0 || c < 0 || r >= s || c >= s {
                return Err(StateDefect::OutOfBounds(n));
            }
        }
        if cells.iter().any(|cell| owner[l].contains_key(cell)) {
            return Err(StateDefect::Overlap(n));
        }
        if l > 1 {
            let mut under = BTreeSet::new();
            for cell in &cells {
                match owner[l - 1].get(cell) {
                    Some(&o) => {
                        under.insert(o);
                    }
                    None => return Err(StateDefect::Unsupported(n)),
                }
            }
            if under.len() < 2 {
                return Err(StateDefect::SingleSupport(n));
            }
        }
        for cell in cells {
            owner[l].insert(cell, n);
        }
        if !connected(&owner[l].keys().copied().collect::<Vec<_>>()) {
            return Err(StateDefect::Disconnected { index: n, level: l });
        }
    }
    Ok(())
}

/// Checks a state's own grids against a from-scratch rebuild of its
/// placement list, then validates the list.
pub fn validate_state(state: &BoardState) -> Result<(), StateDefect> {
    let inst = state.instance();
    validate_from_scratch(inst, state.placements())?;
    let s = inst.grid();
    let mut expected = vec![0u16; inst.levels() * s * s];
    for p in state.placements() {
        for (r, c) in placement_cells(inst, p) {
            expected[((p.level as usize - 1) * s + r) * s + c] = inst.part_id(p.digit, p.copy);
        }
    }
    for l in 1..=inst.levels() {
        for r in 0..s {
            for c in 0..s {
                if state.cell(l, r, c) != expected[((l - 1) * s + r) * s + c] {
                    return Err(StateDefect::GridMismatch(l));
                }
            }
        }
        let area = expected[(l - 1) * s * s..l * s * s].iter().filter(|&&id| id != 0).count();
        if state.level_area(l) as usize != area {
            return Err(StateDefect::GridMismatch(l));
        }
    }
    Ok(())
}

fn connected(cells: &[(usize, usize)]) -> bool {
    let Some(&first) = cells.first() else { return true };
    let set: BTreeSet<(usize, usize)> = cells.iter().copied().collect();
    let mut seen = BTreeSet::from([first]);
    let mut stack = vec![first];
    while let Some((r, c)) = stack.pop() {
        let mut around = vec![(r + 1, c), (r, c + 1)];
        if r > 0 {
            around.push((r - 1, c));
        }
        if c > 0 {
            around.push((r, c - 1));
        }
        for nb in around {
            if set.contains(&nb) && seen.insert(nb) {
                stack.push(nb);
            }
        }
    }
    seen.len() == set.len()
}
