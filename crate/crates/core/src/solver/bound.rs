//! Optimistic completion scores.

use crate::rules::{BoardState, VariantKind};

/// Relaxation nodes allowed before falling back to the plain bound.
const RELAXATION_BUDGET: u32 = 20_000;

/// Admissible bound on the best completion score of `state`, using the
/// level-area relaxation.
pub fn upper_bound(state: &BoardState) -> i64 {
    upper_bound_with(state, true)
}

/// As [`upper_bound`]; with `area_aware` off the relaxation only tracks
/// part counts per level.
pub fn upper_bound_with(state: &BoardState, area_aware: bool) -> i64 {
    let cards = remaining_cards(state);
    let inst = state.instance();
    let levels = inst.levels();
    let score = state.score();
    let plain: i64 = cards.iter().map(|&(v, _)| v * (levels as i64 - 1)).sum();
    if cards.is_empty() || levels == 1 || plain == 0 {
        return score + plain;
    }
    let mut relax = Relaxation {
        cards: &cards,
        suffix: suffix_sums(&cards, levels),
        area: (1..=levels).map(|l| state.level_area(l) as i64).collect(),
        parts: (1..=levels).map(|l| state.parts_on_level(l) as i64).collect(),
        fed: vec![false; levels],
        levels,
        area_aware,
        best: -1,
        nodes: 0,
        last_level: vec![0; cards.len()],
    };
    relax.search(0, 0);
    if relax.nodes > RELAXATION_BUDGET || relax.best < 0 {
        return score + plain;
    }
    score + relax.best
}

/// `(value, area)` of the cards still to come, sorted by value descending.
/// For free decks the best values of the pool are taken, each with the
/// smallest pool area.
fn remaining_cards(state: &BoardState) -> Vec<(i64, i64)> {
    let inst = state.instance();
    let left = inst.deck_len() - state.cards_placed();
    let mut cards: Vec<(i64, i64)> = match inst.kind() {
        VariantKind::Known => {
            let deck = inst.deck().expect("known instances carry a deck");
            deck.draws()[state.cards_placed()..]
                .iter()
                .map(|&d| (d as i64, inst.piece(d).area as i64))
                .collect()
        }
        VariantKind::Free => {
            let pool = state.remaining_pool();
            let min_area = pool.iter().map(|&d| inst.piece(d).area as i64).min().unwrap_or(0);
            pool.iter().rev().take(left).map(|&d| (d as i64, min_area)).collect()
        }
    };
    cards.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    cards
}

fn suffix_sums(cards: &[(i64, i64)], levels: usize) -> Vec<i64> {
    let mut out = vec![0; cards.len() + 1];
    for i in (0..cards.len()).rev() {
        out[i] = out[i + 1] + cards[i].0 * (levels as i64 - 1);
    }
    out
}

/// Assigns every remaining card a level, ignoring geometry and order:
/// a level above 1 may receive cards only if the level below ends with at
/// least two parts and (area-aware) at least as much area.
struct Relaxation<'a> {
    cards: &'a [(i64, i64)],
    suffix: Vec<i64>,
    area: Vec<i64>,
    parts: Vec<i64>,
    fed: Vec<bool>,
    levels: usize,
    area_aware: bool,
    best: i64,
    nodes: u32,
    last_level: Vec<usize>,
}

impl Relaxation<'_> {
    fn feasible(&self) -> bool {
        (1..self.levels).all(|l| {
            !self.fed[l] || (self.parts[l - 1] >= 2 && (!self.area_aware || self.area[l] <= self.area[l - 1]))
        })
    }

    fn search(&mut self, i: usize, value: i64) {
        self.nodes += 1;
        if self.nodes > RELAXATION_BUDGET {
            return;
        }
        if value + self.suffix[i] <= self.best {
            return;
        }
        if i == self.cards.len() {
            if self.feasible() {
                self.best = value;
            }
            return;
        }
        let (v, a) = self.cards[i];
        // equal areas: a higher value never sits below a lower one
        let cap = if i > 0 && self.cards[i - 1].1 == a { self.last_level[i - 1] } else { self.levels };
        for l in (1..=cap).rev() {
            let li = l - 1;
            let was_fed = self.fed[li];
            self.area[li] += a;
            self.parts[li] += 1;
            self.fed[li] = true;
            self.last_level[i] = l;
            self.search(i + 1, value + v * (l as i64 - 1));
            self.area[li] -= a;
            self.parts[li] -= 1;
            self.fed[li] = was_fed;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rules::Instance;
    use std::sync::Arc;

    #[test]
    fn terminal_state_bound_is_its_score() {
        let inst = Arc::new(Instance::known("K-1-1-1", &[1], 8, 3).unwrap());
        let state = BoardState::new(inst);
        let p = state.legal_placements(1)[0];
        let done = state.apply(&p).unwrap();
        assert_eq!(upper_bound(&done), 0);
    }

    #[test]
    fn two_cards_bound_zero() {
        // two parts can never both be counted above level 1
        let inst = Arc::new(Instance::known("K-9-2-2", &[9, 9], 10, 7).unwrap());
        let state = BoardState::new(inst);
        assert_eq!(upper_bound(&state), 0);
        assert_eq!(upper_bound_with(&state, false), 0);
    }

    #[test]
    fn three_cards_only_the_third_can_rise() {
        let inst = Arc::new(Instance::known("K-9-1-3", &[1, 2, 9], 12, 4).unwrap());
        let state = BoardState::new(inst);
        // best case: the 9 rests on the 1 and the 2 (area 13 <= 5 + 10)
        assert_eq!(upper_bound(&state), 9);
    }
}
