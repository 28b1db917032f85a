//! Exact branch-and-bound maximization of the score.
//!
//! The search runs in two passes. The first finds the optimum value with
//! the bound pruning `bound <= incumbent`, trying higher levels first. The
//! second walks the tree in canonical order (digit, level, orientation,
//! row, col per card) and stops at the first play reaching that value, so
//! the reported sequence is the lexicographically smallest optimal one.

pub mod bound;
pub mod greedy;
mod search;
pub mod spiral;

use std::sync::Arc;
use std::time::Duration;

use serde::{Deserialize, Serialize};

pub use bound::{upper_bound, upper_bound_with};
pub use greedy::{greedy_playout, highest_placement, play_greedy, sample_deck, DeadEnd};
pub use spiral::{spiral_order, spiral_rank};

use crate::rules::{Deck, Instance, Placement};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LevelOrder {
    Descending,
    Ascending,
}

/// Order of anchors within one level during the optimizing pass.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnchorOrder {
    /// Anchors spiralling out from the grid centre, then orientation.
    Spiral,
    /// Orientation, anchor row, anchor col.
    Canonical,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub node_limit: Option<u64>,
    pub time_limit: Option<Duration>,
    pub threads: usize,
    /// Prune subtrees whose bound cannot beat the incumbent.
    pub upper_bound: bool,
    /// Let the bound account for level areas (area of level l+1 at most
    /// the area of level l).
    pub area_monotonicity: bool,
    /// Only try level 1 for the first card.
    pub first_card_level_one: bool,
    /// Start from a greedy incumbent.
    pub greedy_incumbent: bool,
    pub level_order: LevelOrder,
    pub anchor_order: AnchorOrder,
}

impl Default for SearchConfig {
    fn default() -> SearchConfig {
        SearchConfig {
            node_limit: None,
            time_limit: None,
            threads: 1,
            upper_bound: true,
            area_monotonicity: true,
            first_card_level_one: true,
            greedy_incumbent: true,
            level_order: LevelOrder::Descending,
            anchor_order: AnchorOrder::Spiral,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProofStatus {
    Optimal,
    BoundLimited,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    /// Placements committed plus last-card evaluations.
    pub nodes: u64,
    /// Nodes where the next card had no legal placement.
    pub dead_ends: u64,
    /// Subtrees cut by the bound.
    pub pruned: u64,
    pub elapsed_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OptResult {
    /// `None` when no complete play exists (or none was found in budget).
    pub best_score: Option<i64>,
    pub placements: Vec<Placement>,
    pub proof: ProofStatus,
    pub stats: SearchStats,
}

impl OptResult {
    pub fn deck(&self) -> Deck {
        Deck(self.placements.iter().map(|p| p.digit).collect())
    }
}

/// Maximizes the score of an F or K instance.
pub fn solve(instance: &Arc<Instance>, config: &SearchConfig) -> OptResult {
    search::run(instance, config)
}
