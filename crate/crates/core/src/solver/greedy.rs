use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::rules::{BoardState, Deck, Instance, Placement, VariantKind};

/// A greedy play that found no legal placement for some card.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("card {card} (digit {digit}) has no legal placement")]
pub struct DeadEnd {
    pub card: usize,
    pub digit: u8,
    /// The state before the stuck card.
    pub state: Box<BoardState>,
}

/// Draws a deck for a free instance: the full pool shuffled with a seeded
/// ChaCha8 generator, cut to the deck length.
pub fn sample_deck(instance: &Instance, seed: u64) -> Deck {
    let mut pool: Vec<u8> = (0..=instance.max_digit())
        .flat_map(|d| std::iter::repeat_n(d, instance.copies() as usize))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pool.shuffle(&mut rng);
    pool.truncate(instance.deck_len());
    Deck(pool)
}

/// The highest-level legal placement of `digit`, first in canonical order
/// within that level.
pub fn highest_placement(state: &BoardState, digit: u8) -> Option<Placement> {
    let levels = state.instance().levels();
    for level in (1..=levels).rev() {
        let mut found = None;
        state.scan_level(digit, level, |p| {
            found = Some(p);
            false
        });
        if found.is_some() {
            return found;
        }
    }
    None
}

/// Plays `digits` in order, each at its highest legal placement.
pub fn play_greedy(instance: &Arc<Instance>, digits: &[u8]) -> Result<BoardState, DeadEnd> {
    let mut state = BoardState::new(instance.clone());
    for (i, &digit) in digits.iter().enumerate().take(instance.deck_len()) {
        match highest_placement(&state, digit) {
            Some(p) => state.commit(&p),
            None => return Err(DeadEnd { card: i + 1, digit, state: Box::new(state) }),
        }
    }
    Ok(state)
}

/// Greedy play of the instance's deck (known) or of a deck sampled from
/// `seed` (free).
pub fn greedy_playout(instance: &Arc<Instance>, seed: u64) -> Result<BoardState, DeadEnd> {
    let deck = match instance.kind() {
        VariantKind::Known => instance.deck().expect("known instances carry a deck").clone(),
        VariantKind::Free => sample_deck(instance, seed),
    };
    play_greedy(instance, deck.draws())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_zeros_stay_on_level_one() {
        let inst = Arc::new(Instance::known("K-0-2-2", &[0, 0], 8, 3).unwrap());
        let state = greedy_playout(&inst, 0).unwrap();
        assert!(state.placements().iter().all(|p| p.level == 1));
        assert_eq!(state.score(), 0);
    }

    #[test]
    fn sampled_decks_are_reproducible() {
        let inst = Instance::free("F-9-2-20", 20, 7).unwrap();
        let a = sample_deck(&inst, 7);
        assert_eq!(a, sample_deck(&inst, 7));
        assert_eq!(a.len(), 20);
        assert!(inst.variant().validate_deck(&a).is_ok());
    }

    #[test]
    fn dead_end_is_reported() {
        // the 8 spans the 5x5 interior of a 7x7 board; the 9 cannot fit
        let inst = Arc::new(Instance::known("K-9-1-3", &[8, 9, 0], 7, 1).unwrap());
        match greedy_playout(&inst, 0) {
            Err(e) => assert_eq!((e.card, e.digit), (2, 9)),
            Ok(state) => panic!("unexpected terminal state {state:?}"),
        }
    }
}
