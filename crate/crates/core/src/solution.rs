//! Solution documents (JSON) and ASCII rendering of board states.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::rules::{BoardState, Deck, Instance, Placement, RulesError, Variant};
use crate::shapes::ShapeCatalog;
use crate::solver::{OptResult, ProofStatus, SearchStats};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceEcho {
    pub variant: String,
    pub grid: usize,
    pub levels: usize,
    /// The fixed deck of a K instance.
    pub deck: Option<Vec<u8>>,
    /// `bundled`, or the catalog file the instance was built with.
    pub catalog: String,
}

impl InstanceEcho {
    pub fn of(instance: &Instance) -> InstanceEcho {
        InstanceEcho {
            variant: instance.variant().to_string(),
            grid: instance.grid(),
            levels: instance.levels(),
            deck: instance.deck().map(|d| d.draws().to_vec()),
            catalog: instance.catalog().source().to_string(),
        }
    }

    /// Rebuilds the instance with the given catalog.
    pub fn instance(&self, catalog: ShapeCatalog) -> Result<Instance, SolutionError> {
        let variant: Variant = self.variant.parse().map_err(|e| SolutionError::Instance(format!("{e}")))?;
        Instance::new(variant, self.grid, self.levels, self.deck.clone().map(Deck), catalog)
            .map_err(|e| SolutionError::Instance(e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SolutionDocument {
    pub format_version: u32,
    pub instance: InstanceEcho,
    /// Digits in play order.
    pub deck: Vec<u8>,
    pub placements: Vec<Placement>,
    pub score: Option<i64>,
    pub proof: Option<ProofStatus>,
    pub stats: Option<SearchStats>,
}

#[derive(Debug, Error)]
pub enum SolutionError {
    #[error("malformed solution document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("unsupported format_version {0} (this build reads {FORMAT_VERSION})")]
    Version(u32),
    #[error("invalid instance: {0}")]
    Instance(String),
    #[error("placement {index} does not replay: {error}")]
    Replay { index: usize, error: RulesError },
    #[error("recorded score {recorded} but the placements score {replayed}")]
    ScoreMismatch { recorded: i64, replayed: i64 },
    #[error("recorded deck {recorded:?} but the placements draw {drawn:?}")]
    DeckMismatch { recorded: Vec<u8>, drawn: Vec<u8> },
}

impl SolutionDocument {
    pub fn from_result(instance: &Instance, result: &OptResult) -> SolutionDocument {
        SolutionDocument {
            format_version: FORMAT_VERSION,
            instance: InstanceEcho::of(instance),
            deck: result.deck().0,
            placements: result.placements.clone(),
            score: result.best_score,
            proof: Some(result.proof),
            stats: Some(result.stats),
        }
    }

    /// A document for a bare play sequence, e.g. a greedy playout.
    pub fn from_state(state: &BoardState) -> SolutionDocument {
        SolutionDocument {
            format_version: FORMAT_VERSION,
            instance: InstanceEcho::of(state.instance()),
            deck: state.drawn(),
            placements: state.placements().to_vec(),
            score: Some(state.score()),
            proof: None,
            stats: None,
        }
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("documents serialize");
        text.push('\n');
        text
    }

    pub fn from_json(text: &str) -> Result<SolutionDocument, SolutionError> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        let version = value.get("format_version").and_then(|v| v.as_u64()).unwrap_or(0) as u32;
        if version != FORMAT_VERSION {
            return Err(SolutionError::Version(version));
        }
        Ok(serde_json::from_value(value)?)
    }

    /// Replays the placements and checks the recorded deck and score.
    pub fn replay(&self, instance: Arc<Instance>) -> Result<BoardState, SolutionError> {
        let state = BoardState::replay(instance, &self.placements).map_err(|(index, error)| SolutionError::Replay { index, error })?;
        let drawn = state.drawn();
        if drawn != self.deck {
            return Err(SolutionError::DeckMismatch { recorded: self.deck.clone(), drawn });
        }
        if let Some(recorded) = self.score {
            if recorded != state.score() {
                return Err(SolutionError::ScoreMismatch { recorded, replayed: state.score() });
            }
        }
        Ok(state)
    }
}

/// One `s x s` map per level: `+` border, `.` empty, digits for parts.
pub fn render_state(state: &BoardState) -> String {
    let inst = state.instance();
    let s = inst.grid();
    let mut out = String::new();
    for level in 1..=inst.levels() {
        let _ = writeln!(out, "level {level}");
        for r in 0..s {
            for c in 0..s {
                let id = state.cell(level, r, c);
                let ch = if id != 0 {
                    (b'0' + inst.part_value(id)) as char
                } else if r == 0 || c == 0 || r == s - 1 || c == s - 1 {
                    '+'
                } else {
                    '.'
                };
                out.push(ch);
            }
            out.push('\n');
        }
        if level < inst.levels() {
            out.push('\n');
        }
    }
    let _ = writeln!(out, "\nscore {}", state.score());
    out
}
