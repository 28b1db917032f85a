#![allow(dead_code)]

use std::sync::Arc;

use nmbr9_core::rules::{placement_cells, placement_halo, BoardState, Instance, Placement};

pub fn known(variant: &str, deck: &[u8], grid: usize, levels: usize) -> Arc<Instance> {
    Arc::new(Instance::known(variant, deck, grid, levels).unwrap())
}

pub fn free(variant: &str, grid: usize, levels: usize) -> Arc<Instance> {
    Arc::new(Instance::free(variant, grid, levels).unwrap())
}

/// Digits the next card may be: the deck's next draw, or every digit left
/// in the pool of a free draft.
pub fn next_digits(state: &BoardState) -> Vec<u8> {
    match state.next_digit() {
        Some(d) => vec![d],
        None => {
            let mut pool = state.remaining_pool();
            pool.sort_unstable();
            pool.dedup();
            pool
        }
    }
}

/// Best final score reachable from `state`, by plain exhaustive search.
pub fn best_completion(state: &BoardState) -> Option<i64> {
    if state.is_terminal() {
        return Some(state.score());
    }
    let mut best = None;
    for d in next_digits(state) {
        for p in state.legal_placements(d) {
            let next = state.apply(&p).unwrap();
            if let Some(v) = best_completion(&next) {
                best = Some(best.map_or(v, |b: i64| b.max(v)));
            }
        }
    }
    best
}

/// Walks a play choosing the `choices[i] % n`-th option at step `i`; stops
/// early at a dead end.
pub fn random_play(instance: &Arc<Instance>, choices: &[usize]) -> Vec<BoardState> {
    let mut states = vec![BoardState::new(instance.clone())];
    for &pick in choices {
        let state = states.last().unwrap();
        if state.is_terminal() {
            break;
        }
        let options: Vec<Placement> = next_digits(state).into_iter().flat_map(|d| state.legal_placements(d)).collect();
        if options.is_empty() {
            break;
        }
        let next = state.apply(&options[pick % options.len()]).unwrap();
        states.push(next);
    }
    states
}

/// The regular-constraint word of a part: control `1`, then the grid with
/// `1` on the part and `2` on its halo.
pub fn placement_word(instance: &Instance, p: &Placement) -> Vec<u8> {
    let s = instance.grid();
    let mut word = vec![0u8; 1 + s * s];
    word[0] = 1;
    for (r, c) in placement_halo(instance, p) {
        word[1 + r * s + c] = 2;
    }
    for (r, c) in placement_cells(instance, p) {
        word[1 + r * s + c] = 1;
    }
    word
}

/// Level-1 placements of one digit on an empty board.
pub fn level_one_placements(instance: &Arc<Instance>, digit: u8) -> Vec<Placement> {
    let state = BoardState::new(instance.clone());
    state.legal_placements(digit).into_iter().filter(|p| p.level == 1).collect()
}

/// Placements of every orientation whose cells keep a one-cell margin,
/// counted from the bounding boxes alone.
pub fn margin_fit_count(instance: &Instance, digit: u8) -> usize {
    let inner = instance.grid() as i64 - 2;
    instance
        .piece(digit)
        .orientations
        .iter()
        .map(|o| {
            let rows = inner - o.height() as i64 + 1;
            let cols = inner - o.width() as i64 + 1;
            (rows.max(0) * cols.max(0)) as usize
        })
        .sum()
}

/// A one-card instance for `digit` whose catalog keeps only that digit's
/// shape (the others become 2x2 blocks, except the
/// fixed ring of 0), so small grids stay buildable.
/// `None` when the digit itself does not fit.
pub fn solo_instance(digit: u8, grid: usize) -> Option<Arc<Instance>> {
    use nmbr9_core::rules::{Deck, Variant};
    use nmbr9_core::shapes::{parse_catalog, ShapeCatalog};
    let bundled = ShapeCatalog::bundled();
    let mut text = String::new();
    for d in 0..10u8 {
        text.push_str(&format!("digit {d}\n"));
        if d == digit || d == 0 {
            for row in bundled.shape(d).unwrap().rows() {
                text.push_str(&row);
                text.push('\n');
            }
        } else {
            text.push_str("##\n##\n");
        }
        text.push('\n');
    }
    let catalog = parse_catalog(&text).unwrap();
    let variant: Variant = "K-9-1-1".parse().unwrap();
    Instance::new(variant, grid, 1, Some(Deck(vec![digit])), catalog).ok().map(Arc::new)
}

/// Finds, for every constraint class (numbered 1 to 12) in the export, a
/// single in-domain change to `good` that a constraint of that class
/// reports. Returns the classes with no such change.
pub fn undetected_classes(export: &nmbr9_core::regex_model::model::ModelExport, good: &nmbr9_core::regex_model::verify::Assignment) -> Vec<u8> {
    use nmbr9_core::regex_model::verify::{all_violations, verify_assignment};
    let mut classes: Vec<u8> = export.constraints.iter().map(|c| c.paper_no).collect();
    classes.sort_unstable();
    classes.dedup();
    let mut missing = Vec::new();
    'class: for &class in &classes {
        for c in export.constraints.iter().filter(|c| c.paper_no == class) {
            for var in export.referenced(c) {
                let family = export.family(var);
                let flat = var.index as usize;
                if family.fixed.is_some() || (family.border_zero && family.on_border(flat)) {
                    continue;
                }
                let current = good[&family.name][flat];
                let (lo, hi) = family.domain;
                let candidates = [current - 1, current + 1, lo, hi];
                for value in candidates.into_iter().filter(|&v| v != current && v >= lo && v <= hi) {
                    let mut bad = good.clone();
                    bad.get_mut(&family.name).unwrap()[flat] = value;
                    let Ok(found) = all_violations(export, &bad) else { continue };
                    if found.iter().any(|v| v.paper_no == class) {
                        assert!(!verify_assignment(export, &bad).unwrap().is_satisfied());
                        continue 'class;
                    }
                }
            }
        }
        missing.push(class);
    }
    missing
}
