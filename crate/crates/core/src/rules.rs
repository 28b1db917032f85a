//! Game semantics: variants, decks, instances, board state and legality.
//!
//! Parts are stacked on levels `1..=levels` of an `s x s` grid. A placement
//! is legal when
//!
//! * R1: its cells stay off the grid border (so its halo stays on the grid),
//! * R2: it does not overlap a part on the same level,
//! * R3: on levels above 1 every cell rests on a part of the level below,
//! * R4: on a non-empty level one of its halo cells is covered by a part of
//!   that level, which keeps every level 4-connected,
//! * R5: on levels above 1 it covers at least two distinct parts.
//!
//! Board states are values: [`BoardState::apply`] returns a new state.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::shapes::{distinct_orientations, exterior_halo, Cell, OrientationSet, Shape, ShapeCatalog};

pub const DEFAULT_GRID: usize = 20;
pub const DEFAULT_LEVELS: usize = 7;
/// Rows are stored as `u64` bit masks.
pub const MAX_GRID: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum VariantKind {
    /// The draft is free to choose.
    #[serde(rename = "F")]
    Free,
    /// The draft is a known, fixed sequence.
    #[serde(rename = "K")]
    Known,
}

impl fmt::Display for VariantKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VariantKind::Free => "F",
            VariantKind::Known => "K",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VariantError {
    #[error("malformed variant `{0}`: expected <F|K>-<m>-<c>-<k>")]
    Syntax(String),
    #[error("unsupported variant kind `{0}` (only F and K are supported)")]
    UnsupportedKind(String),
    #[error("max digit {0} outside 0..9")]
    MaxDigit(u32),
    #[error("copies per digit must be at least 1")]
    NoCopies,
    #[error("deck length {k} out of range 1..={limit} (= (m+1)*c)")]
    DeckLength { k: usize, limit: usize },
}

/// A variant `T-m-c-k`: kind, max digit, copies per digit, deck length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Variant {
    pub kind: VariantKind,
    pub max_digit: u8,
    pub copies: u8,
    pub deck_len: usize,
}

impl Variant {
    pub fn new(kind: VariantKind, max_digit: u8, copies: u8, deck_len: usize) -> Result<Variant, VariantError> {
        if max_digit > 9 {
            return Err(VariantError::MaxDigit(max_digit as u32));
        }
        if copies == 0 {
            return Err(VariantError::NoCopies);
        }
        let limit = (max_digit as usize + 1) * copies as usize;
        if deck_len == 0 || deck_len > limit {
            return Err(VariantError::DeckLength { k: deck_len, limit });
        }
        Ok(Variant { kind, max_digit, copies, deck_len })
    }

    /// Number of parts, `n = (m + 1) * c`.
    pub fn parts(&self) -> usize {
        (self.max_digit as usize + 1) * self.copies as usize
    }

    pub fn validate_deck(&self, deck: &Deck) -> Result<(), DeckViolation> {
        validate_deck(deck, self)
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}-{}-{}", self.kind, self.max_digit, self.copies, self.deck_len)
    }
}

impl FromStr for Variant {
    type Err = VariantError;

    fn from_str(text: &str) -> Result<Variant, VariantError> {
        parse_variant(text)
    }
}

pub fn parse_variant(text: &str) -> Result<Variant, VariantError> {
    let syntax = || VariantError::Syntax(text.to_string());
    let fields: Vec<&str> = text.trim().split('-').collect();
    if fields.len() != 4 {
        return Err(syntax());
    }
    let kind = match fields[0] {
        "F" => VariantKind::Free,
        "K" => VariantKind::Known,
        "U" => return Err(VariantError::UnsupportedKind("U".into())),
        _ => return Err(syntax()),
    };
    let number = |s: &str| -> Result<u32, VariantError> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return Err(syntax());
        }
        s.parse::<u32>().map_err(|_| syntax())
    };
    let m = number(fields[1])?;
    let c = number(fields[2])?;
    let k = number(fields[3])?;
    if m > 9 {
        return Err(VariantError::MaxDigit(m));
    }
    if c == 0 {
        return Err(VariantError::NoCopies);
    }
    let c = u8::try_from(c).map_err(|_| syntax())?;
    Variant::new(kind, m as u8, c, k as usize)
}

/// An ordered sequence of drawn digits.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Deck(pub Vec<u8>);

impl Deck {
    pub fn draws(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Deck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(u8::to_string).collect();
        f.write_str(&parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("malformed deck literal `{0}`: expected comma-separated digits")]
pub struct DeckParseError(pub String);

impl FromStr for Deck {
    type Err = DeckParseError;

    fn from_str(text: &str) -> Result<Deck, DeckParseError> {
        text.split(',')
            .map(|t| {
                let t = t.trim();
                match t.parse::<u8>() {
                    Ok(d) if d <= 9 && t.len() == 1 => Ok(d),
                    _ => Err(DeckParseError(text.to_string())),
                }
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(Deck)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DeckViolation {
    #[error("deck has {found} cards, expected {expected}")]
    Length { expected: usize, found: usize },
    #[error("card {position}: digit {digit} exceeds max digit {max}")]
    DigitOutOfRange { position: usize, digit: u8, max: u8 },
    #[error("digit {digit} drawn {count} times, only {copies} copies exist")]
    TooManyCopies { digit: u8, count: usize, copies: u8 },
}

/// Checks that `deck` is a shuffle drawn from the variant's parts.
pub fn validate_deck(deck: &Deck, variant: &Variant) -> Result<(), DeckViolation> {
    if deck.len() != variant.deck_len {
        return Err(DeckViolation::Length { expected: variant.deck_len, found: deck.len() });
    }
    let mut counts = [0usize; 10];
    for (i, &d) in deck.draws().iter().enumerate() {
        if d > variant.max_digit {
            return Err(DeckViolation::DigitOutOfRange { position: i + 1, digit: d, max: variant.max_digit });
        }
        counts[d as usize] += 1;
        if counts[d as usize] > variant.copies as usize {
            return Err(DeckViolation::TooManyCopies {
                digit: d,
                count: counts[d as usize],
                copies: variant.copies,
            });
        }
    }
    Ok(())
}

/// All decks of a variant in lexicographic order. Copies of a digit are
/// indistinguishable, so decks are digit sequences.
pub fn enumerate_decks(variant: &Variant) -> DeckIter {
    DeckIter {
        counts: vec![variant.copies as usize; variant.max_digit as usize + 1],
        len: variant.deck_len,
        current: Vec::with_capacity(variant.deck_len),
        started: false,
        done: false,
    }
}

pub struct DeckIter {
    counts: Vec<usize>,
    len: usize,
    current: Vec<u8>,
    started: bool,
    done: bool,
}

impl DeckIter {
    fn smallest_available(&self, above: Option<u8>) -> Option<u8> {
        let from = above.map_or(0, |d| d as usize + 1);
        (from..self.counts.len()).find(|&d| self.counts[d] > 0).map(|d| d as u8)
    }

    fn push(&mut self, d: u8) {
        self.counts[d as usize] -= 1;
        self.current.push(d);
    }

    fn fill(&mut self) -> bool {
        while self.current.len() < self.len {
            match self.smallest_available(None) {
                Some(d) => self.push(d),
                None => return false,
            }
        }
        true
    }
}

impl Iterator for DeckIter {
    type Item = Deck;

    fn next(&mut self) -> Option<Deck> {
        if self.done {
            return None;
        }
        if !self.started {
            self.started = true;
            if !self.fill() {
                self.done = true;
                return None;
            }
            return Some(Deck(self.current.clone()));
        }
        while let Some(last) = self.current.pop() {
            self.counts[last as usize] += 1;
            if let Some(d) = self.smallest_available(Some(last)) {
                self.push(d);
                if self.fill() {
                    return Some(Deck(self.current.clone()));
                }
            }
        }
        self.done = true;
        None
    }
}

/// Number of distinct decks of a variant (multiset permutations of length k).
pub fn deck_count(variant: &Variant) -> BigUint {
    let k = variant.deck_len;
    let c = variant.copies as usize;
    // ways[t]: sequences of length t over the digits processed so far
    let mut ways = vec![BigUint::zero(); k + 1];
    ways[0] = BigUint::one();
    for _ in 0..=variant.max_digit {
        let mut next = vec![BigUint::zero(); k + 1];
        for (t, w) in ways.iter().enumerate() {
            if w.is_zero() {
                continue;
            }
            for j in 0..=c.min(k - t) {
                next[t + j] += w * binomial(t + j, j);
            }
        }
        ways = next;
    }
    ways[k].clone()
}

fn binomial(n: usize, k: usize) -> BigUint {
    let mut acc = BigUint::one();
    for i in 0..k {
        acc = acc * BigUint::from(n - i) / BigUint::from(i + 1);
    }
    acc
}

/// One orientation of a part, with row masks for fast legality tests.
#[derive(Debug, Clone)]
pub struct Orientation {
    pub shape: Shape,
    pub halo: Vec<Cell>,
    /// Bit `j` of row `i` is set when cell `(i, j)` is occupied.
    rows: Vec<u64>,
    /// Rows `-1..=height`; bit `j + 1` is set when halo cell `(i, j)` exists.
    halo_rows: Vec<u64>,
}

impl Orientation {
    fn new(shape: Shape) -> Orientation {
        let halo = exterior_halo(&shape);
        let mut rows = vec![0u64; shape.height() as usize];
        for &(r, c) in shape.cells() {
            rows[r as usize] |= 1 << c;
        }
        let mut halo_rows = vec![0u64; shape.height() as usize + 2];
        for &(r, c) in &halo {
            halo_rows[(r + 1) as usize] |= 1 << (c + 1);
        }
        Orientation { shape, halo, rows, halo_rows }
    }

    pub fn height(&self) -> usize {
        self.shape.height() as usize
    }

    pub fn width(&self) -> usize {
        self.shape.width() as usize
    }
}

/// A digit's geometry in every distinct orientation.
#[derive(Debug, Clone)]
pub struct Piece {
    pub digit: u8,
    pub area: u32,
    pub orientation_set: OrientationSet,
    pub orientations: Vec<Orientation>,
}

impl Piece {
    fn new(digit: u8, shape: &Shape) -> Piece {
        let orientation_set = distinct_orientations(shape);
        let orientations = orientation_set.shapes().iter().cloned().map(Orientation::new).collect();
        Piece { digit, area: shape.len() as u32, orientation_set, orientations }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum InstanceError {
    #[error("K variants need a deck")]
    DeckRequired,
    #[error("F variants choose their deck freely; drop the fixed deck or use a K variant")]
    DeckNotAllowed,
    #[error("invalid deck: {0}")]
    Deck(#[from] DeckViolation),
    #[error("shape catalog has no shape for digit {0}")]
    MissingShape(u8),
    #[error("grid {grid} too small: digit {digit} needs at least {needed} (shape plus 1-cell margin)")]
    GridTooSmall { digit: u8, needed: usize, grid: usize },
    #[error("grid {grid} exceeds the supported maximum {max}")]
    GridTooLarge { grid: usize, max: usize },
    #[error("level cap must be at least 1")]
    NoLevels,
    #[error("level cap {0} exceeds the supported maximum 255")]
    TooManyLevels(usize),
}

/// A variant together with board parameters, catalog and (for K) deck.
#[derive(Debug, Clone)]
pub struct Instance {
    variant: Variant,
    grid: usize,
    levels: usize,
    deck: Option<Deck>,
    catalog: ShapeCatalog,
    pieces: Vec<Piece>,
}

impl Instance {
    pub fn new(
        variant: Variant,
        grid: usize,
        levels: usize,
        deck: Option<Deck>,
        catalog: ShapeCatalog,
    ) -> Result<Instance, InstanceError> {
        match (variant.kind, &deck) {
            (VariantKind::Known, None) => return Err(InstanceError::DeckRequired),
            (VariantKind::Free, Some(_)) => return Err(InstanceError::DeckNotAllowed),
            (VariantKind::Known, Some(d)) => validate_deck(d, &variant)?,
            (VariantKind::Free, None) => {}
        }
        if levels == 0 {
            return Err(InstanceError::NoLevels);
        }
        if levels > 255 {
            return Err(InstanceError::TooManyLevels(levels));
        }
        if grid > MAX_GRID {
            return Err(InstanceError::GridTooLarge { grid, max: MAX_GRID });
        }
        let mut pieces = Vec::new();
        for digit in 0..=variant.max_digit {
            let shape = catalog.shape(digit).ok_or(InstanceError::MissingShape(digit))?;
            let piece = Piece::new(digit, shape);
            let needed = piece.orientation_set.max_extent() as usize + 2;
            if grid < needed {
                return Err(InstanceError::GridTooSmall { digit, needed, grid });
            }
            pieces.push(piece);
        }
        Ok(Instance { variant, grid, levels, deck, catalog, pieces })
    }

    /// A K instance with the bundled catalog.
    pub fn known(variant: &str, deck: &[u8], grid: usize, levels: usize) -> Result<Instance, Box<dyn std::error::Error>> {
        let variant: Variant = variant.parse()?;
        Ok(Instance::new(variant, grid, levels, Some(Deck(deck.to_vec())), ShapeCatalog::bundled())?)
    }

    /// An F instance with the bundled catalog.
    pub fn free(variant: &str, grid: usize, levels: usize) -> Result<Instance, Box<dyn std::error::Error>> {
        let variant: Variant = variant.parse()?;
        Ok(Instance::new(variant, grid, levels, None, ShapeCatalog::bundled())?)
    }

    /// Same parameters with a different fixed deck; the result is a K instance.
    pub fn with_deck(&self, deck: Deck) -> Result<Instance, InstanceError> {
        let variant = Variant { kind: VariantKind::Known, ..self.variant };
        Instance::new(variant, self.grid, self.levels, Some(deck), self.catalog.clone())
    }

    pub fn variant(&self) -> &Variant {
        &self.variant
    }

    pub fn kind(&self) -> VariantKind {
        self.variant.kind
    }

    pub fn max_digit(&self) -> u8 {
        self.variant.max_digit
    }

    pub fn copies(&self) -> u8 {
        self.variant.copies
    }

    pub fn deck_len(&self) -> usize {
        self.variant.deck_len
    }

    pub fn parts(&self) -> usize {
        self.variant.parts()
    }

    pub fn grid(&self) -> usize {
        self.grid
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn deck(&self) -> Option<&Deck> {
        self.deck.as_ref()
    }

    pub fn catalog(&self) -> &ShapeCatalog {
        &self.catalog
    }

    pub fn piece(&self, digit: u8) -> &Piece {
        &self.pieces[digit as usize]
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// Part identifier `1..=n` of a digit copy (copy counts from 1).
    pub fn part_id(&self, digit: u8, copy: u8) -> u16 {
        digit as u16 * self.variant.copies as u16 + copy as u16
    }

    /// Inverse of [`Instance::part_id`].
    pub fn part_of(&self, id: u16) -> (u8, u8) {
        let c = self.variant.copies as u16;
        (((id - 1) / c) as u8, ((id - 1) % c + 1) as u8)
    }

    /// `v(p)`: the value of a part is its digit.
    pub fn part_value(&self, id: u16) -> u8 {
        self.part_of(id).0
    }

    /// Compact description, e.g. `K-1-1-2 grid=6 levels=2 deck=0,1`.
    pub fn describe(&self) -> String {
        let mut out = format!("{} grid={} levels={}", self.variant, self.grid, self.levels);
        if let Some(deck) = &self.deck {
            out.push_str(&format!(" deck={deck}"));
        }
        out
    }
}

/// One committed part: which card, which copy, where and how high.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Placement {
    /// Position in the deck, counting from 1.
    pub card_index: usize,
    pub digit: u8,
    /// Copy number, counting from 1 in draw order.
    pub copy: u8,
    pub level: u8,
    pub orientation: u8,
    /// Top-left corner of the bounding box.
    pub row: u8,
    pub col: u8,
}

impl Placement {
    /// The canonical placement order: level, orientation, anchor row, anchor col.
    pub fn canonical_key(&self) -> (u8, u8, u8, u8) {
        (self.level, self.orientation, self.row, self.col)
    }

    /// Ordering key for whole play sequences (the digit leads so F decks
    /// compare in lexicographic deck order).
    pub fn sequence_key(&self) -> (u8, u8, u8, u8, u8) {
        (self.digit, self.level, self.orientation, self.row, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RulesError {
    #[error("all cards have been placed")]
    Terminal,
    #[error("placement names card {got}, the next card is {expected}")]
    WrongCard { expected: usize, got: usize },
    #[error("next card is digit {expected}, placement has digit {got}")]
    WrongDigit { expected: u8, got: u8 },
    #[error("digit {0} is outside the instance")]
    DigitOutOfRange(u8),
    #[error("no copies of digit {0} left")]
    CopiesExhausted(u8),
    #[error("placement claims copy {got} of digit {digit}, the next copy is {expected}")]
    WrongCopy { digit: u8, expected: u8, got: u8 },
    #[error("level {0} outside 1..=level cap")]
    LevelOutOfRange(u8),
    #[error("orientation {0} does not exist for this digit")]
    BadOrientation(u8),
    #[error("part or halo leaves the grid")]
    OutOfBounds,
    #[error("overlaps another part on level {0}")]
    Overlap(u8),
    #[error("cell ({row},{col}) is not supported from level {below}")]
    Unsupported { row: usize, col: usize, below: u8 },
    #[error("part does not touch the existing parts of level {0}")]
    Disconnected(u8),
    #[error("part rests on {0} distinct part(s), at least two are required")]
    SingleSupport(usize),
}

/// Stacked per-level occupancy with part identities.
#[derive(Clone)]
pub struct BoardState {
    instance: Arc<Instance>,
    occ: Vec<u64>,
    ids: Vec<u16>,
    area: Vec<u32>,
    parts_on: Vec<u16>,
    placements: Vec<Placement>,
    copies_used: [u8; 10],
}

impl PartialEq for BoardState {
    fn eq(&self, other: &BoardState) -> bool {
        self.occ == other.occ
            && self.ids == other.ids
            && self.placements == other.placements
            && self.copies_used == other.copies_used
    }
}

impl Eq for BoardState {}

impl fmt::Debug for BoardState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BoardState")
            .field("instance", &self.instance.describe())
            .field("placements", &self.placements)
            .finish()
    }
}

impl BoardState {
    pub fn new(instance: Arc<Instance>) -> BoardState {
        let s = instance.grid;
        let l = instance.levels;
        BoardState {
            occ: vec![0; l * s],
            ids: vec![0; l * s * s],
            area: vec![0; l],
            parts_on: vec![0; l],
            placements: Vec::new(),
            copies_used: [0; 10],
            instance,
        }
    }

    /// Replays a placement list from the empty board.
    pub fn replay(instance: Arc<Instance>, placements: &[Placement]) -> Result<BoardState, (usize, RulesError)> {
        let mut state = BoardState::new(instance);
        for (i, p) in placements.iter().enumerate() {
            state = state.apply(p).map_err(|e| (i + 1, e))?;
        }
        Ok(state)
    }

    pub fn instance(&self) -> &Arc<Instance> {
        &self.instance
    }

    pub fn placements(&self) -> &[Placement] {
        &self.placements
    }

    /// The drawn digits so far.
    pub fn drawn(&self) -> Vec<u8> {
        self.placements.iter().map(|p| p.digit).collect()
    }

    pub fn cards_placed(&self) -> usize {
        self.placements.len()
    }

    /// 1-based index of the next card.
    pub fn next_card(&self) -> usize {
        self.placements.len() + 1
    }

    pub fn is_terminal(&self) -> bool {
        self.placements.len() == self.instance.deck_len()
    }

    /// The digit on the next card, when the deck is fixed.
    pub fn next_digit(&self) -> Option<u8> {
        self.instance.deck.as_ref().and_then(|d| d.draws().get(self.placements.len()).copied())
    }

    pub fn copies_used(&self, digit: u8) -> u8 {
        self.copies_used[digit as usize]
    }

    /// Digits that may still be drawn, with multiplicity, ascending.
    pub fn remaining_pool(&self) -> Vec<u8> {
        (0..=self.instance.max_digit())
            .flat_map(|d| std::iter::repeat_n(d, (self.instance.copies() - self.copies_used[d as usize]) as usize))
            .collect()
    }

    /// Part id at a cell (0 = empty). Levels count from 1.
    pub fn cell(&self, level: usize, row: usize, col: usize) -> u16 {
        let s = self.instance.grid;
        self.ids[((level - 1) * s + row) * s + col]
    }

    /// Occupied cell count of a level.
    pub fn level_area(&self, level: usize) -> u32 {
        self.area[level - 1]
    }

    pub fn parts_on_level(&self, level: usize) -> usize {
        self.parts_on[level - 1] as usize
    }

    /// Highest non-empty level, 0 for an empty board.
    pub fn top_level(&self) -> usize {
        self.area.iter().rposition(|&a| a > 0).map_or(0, |i| i + 1)
    }

    pub fn score(&self) -> i64 {
        score_placements(&self.placements)
    }

    /// Every legal placement of `digit` as the next card, in canonical order.
    pub fn legal_placements(&self, digit: u8) -> Vec<Placement> {
        let mut out = Vec::new();
        self.for_each_legal(digit, |p| out.push(p));
        out
    }

    pub(crate) fn for_each_legal<F: FnMut(Placement)>(&self, digit: u8, mut visit: F) {
        for level in 1..=self.instance.levels {
            if !self.level_open(level) {
                break;
            }
            self.scan_level(digit, level, |p| {
                visit(p);
                true
            });
        }
    }

    /// Whether a level can take a part at all: level 1 always, higher
    /// levels once the level below holds two parts.
    pub(crate) fn level_open(&self, level: usize) -> bool {
        level == 1 || self.parts_on[level - 2] >= 2
    }

    /// Visits the legal placements of `digit` on one level in canonical
    /// order until `visit` returns false; returns false when stopped early.
    pub(crate) fn scan_level<F: FnMut(Placement) -> bool>(&self, digit: u8, level: usize, mut visit: F) -> bool {
        let inst = &*self.instance;
        if self.is_terminal() || digit > inst.max_digit() || self.copies_used[digit as usize] >= inst.copies() {
            return true;
        }
        if let Some(expected) = self.next_digit() {
            if expected != digit {
                return true;
            }
        }
        if level == 0 || level > inst.levels || !self.level_open(level) {
            return true;
        }
        let s = inst.grid;
        let copy = self.copies_used[digit as usize] + 1;
        let card_index = self.next_card();
        let piece = inst.piece(digit);
        let li = level - 1;
        let occ = &self.occ[li * s..(li + 1) * s];
        let below = if level > 1 { Some(&self.occ[(li - 1) * s..li * s]) } else { None };
        let need_touch = self.parts_on[li] > 0;
        for (oi, o) in piece.orientations.iter().enumerate() {
            let (h, w) = (o.height(), o.width());
            for row in 1..s - h {
                'anchor: for col in 1..s - w {
                    for (i, &mask) in o.rows.iter().enumerate() {
                        let m = mask << col;
                        if occ[row + i] & m != 0 {
                            continue 'anchor;
                        }
                        if let Some(below) = below {
                            if m & !below[row + i] != 0 {
                                continue 'anchor;
                            }
                        }
                    }
                    if need_touch {
                        let touches = o
                            .halo_rows
                            .iter()
                            .enumerate()
                            .any(|(i, &mask)| occ[row - 1 + i] & (mask << (col - 1)) != 0);
                        if !touches {
                            continue 'anchor;
                        }
                    }
                    if level > 1 {
                        let base = (li - 1) * s * s;
                        let mut first = 0u16;
                        let mut distinct = false;
                        for &(r, c) in o.shape.cells() {
                            let id = self.ids[base + (row + r as usize) * s + col + c as usize];
                            if first == 0 {
                                first = id;
                            } else if id != first {
                                distinct = true;
                                break;
                            }
                        }
                        if !distinct {
                            continue 'anchor;
                        }
                    }
                    let p = Placement {
                        card_index,
                        digit,
                        copy,
                        level: level as u8,
                        orientation: oi as u8,
                        row: row as u8,
                        col: col as u8,
                    };
                    if !visit(p) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Checks a placement cell by cell against every rule.
    pub fn check_placement(&self, p: &Placement) -> Result<(), RulesError> {
        let inst = &*self.instance;
        if self.is_terminal() {
            return Err(RulesError::Terminal);
        }
        if p.card_index != self.next_card() {
            return Err(RulesError::WrongCard { expected: self.next_card(), got: p.card_index });
        }
        if p.digit > inst.max_digit() {
            return Err(RulesError::DigitOutOfRange(p.digit));
        }
        if let Some(expected) = self.next_digit() {
            if expected != p.digit {
                return Err(RulesError::WrongDigit { expected, got: p.digit });
            }
        }
        let used = self.copies_used[p.digit as usize];
        if used >= inst.copies() {
            return Err(RulesError::CopiesExhausted(p.digit));
        }
        if p.copy != used + 1 {
            return Err(RulesError::WrongCopy { digit: p.digit, expected: used + 1, got: p.copy });
        }
        if p.level == 0 || p.level as usize > inst.levels {
            return Err(RulesError::LevelOutOfRange(p.level));
        }
        let piece = inst.piece(p.digit);
        let o = piece
            .orientations
            .get(p.orientation as usize)
            .ok_or(RulesError::BadOrientation(p.orientation))?;
        let s = inst.grid as i64;
        let cells: Vec<(usize, usize)> = o
            .shape
            .cells()
            .iter()
            .map(|&(r, c)| (p.row as i64 + r as i64, p.col as i64 + c as i64))
            .map(|(r, c)| {
                if r < 1 || c < 1 || r > s - 2 || c > s - 2 {
                    Err(RulesError::OutOfBounds)
                } else {
                    Ok((r as usize, c as usize))
                }
            })
            .collect::<Result<_, _>>()?;
        let level = p.level as usize;
        if cells.iter().any(|&(r, c)| self.cell(level, r, c) != 0) {
            return Err(RulesError::Overlap(p.level));
        }
        if level > 1 {
            if let Some(&(r, c)) = cells.iter().find(|&&(r, c)| self.cell(level - 1, r, c) == 0) {
                return Err(RulesError::Unsupported { row: r, col: c, below: p.level - 1 });
            }
        }
        if self.parts_on[level - 1] > 0 {
            let touches = o.halo.iter().any(|&(r, c)| {
                let (r, c) = (p.row as i64 + r as i64, p.col as i64 + c as i64);
                r >= 0 && c >= 0 && r < s && c < s && self.cell(level, r as usize, c as usize) != 0
            });
            if !touches {
                return Err(RulesError::Disconnected(p.level));
            }
        }
        if level > 1 {
            let distinct: BTreeSet<u16> = cells.iter().map(|&(r, c)| self.cell(level - 1, r, c)).collect();
            if distinct.len() < 2 {
                return Err(RulesError::SingleSupport(distinct.len()));
            }
        }
        Ok(())
    }

    /// Returns the state after `p`; `self` is left untouched.
    pub fn apply(&self, p: &Placement) -> Result<BoardState, RulesError> {
        self.check_placement(p)?;
        let mut next = self.clone();
        next.commit(p);
        Ok(next)
    }

    /// Commits a placement already known to be legal.
    pub(crate) fn commit(&mut self, p: &Placement) {
        let inst = &*self.instance;
        let s = inst.grid;
        let li = p.level as usize - 1;
        let o = &inst.piece(p.digit).orientations[p.orientation as usize];
        let id = inst.part_id(p.digit, p.copy);
        for (i, &mask) in o.rows.iter().enumerate() {
            self.occ[li * s + p.row as usize + i] |= mask << p.col;
        }
        for &(r, c) in o.shape.cells() {
            self.ids[(li * s + p.row as usize + r as usize) * s + p.col as usize + c as usize] = id;
        }
        self.area[li] += o.shape.len() as u32;
        self.parts_on[li] += 1;
        self.copies_used[p.digit as usize] += 1;
        self.placements.push(*p);
    }

    /// Reverts the most recent placement.
    pub(crate) fn undo(&mut self) {
        let Some(p) = self.placements.pop() else { return };
        let inst = &*self.instance;
        let s = inst.grid;
        let li = p.level as usize - 1;
        let o = &inst.piece(p.digit).orientations[p.orientation as usize];
        for (i, &mask) in o.rows.iter().enumerate() {
            self.occ[li * s + p.row as usize + i] &= !(mask << p.col);
        }
        for &(r, c) in o.shape.cells() {
            self.ids[(li * s + p.row as usize + r as usize) * s + p.col as usize + c as usize] = 0;
        }
        self.area[li] -= o.shape.len() as u32;
        self.parts_on[li] -= 1;
        self.copies_used[p.digit as usize] -= 1;
    }

    /// Occupied cells of a placement on the grid.
    pub fn placement_cells(&self, p: &Placement) -> Vec<(usize, usize)> {
        placement_cells(&self.instance, p)
    }
}

/// `sum v(p) * (level(p) - 1)` over placed parts.
pub fn score_placements(placements: &[Placement]) -> i64 {
    placements.iter().map(|p| p.digit as i64 * (p.level as i64 - 1)).sum()
}

pub fn placement_cells(instance: &Instance, p: &Placement) -> Vec<(usize, usize)> {
    let o = &instance.piece(p.digit).orientations[p.orientation as usize];
    o.shape
        .cells()
        .iter()
        .map(|&(r, c)| (p.row as usize + r as usize, p.col as usize + c as usize))
        .collect()
}

/// Halo cells of a placement on the grid.
pub fn placement_halo(instance: &Instance, p: &Placement) -> Vec<(usize, usize)> {
    let o = &instance.piece(p.digit).orientations[p.orientation as usize];
    o.halo
        .iter()
        .map(|&(r, c)| ((p.row as i32 + r) as usize, (p.col as i32 + c) as usize))
        .collect()
}
