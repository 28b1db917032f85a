mod common;

use std::sync::Arc;

use common::{free, known};
use nmbr9_core::oracle::enumerate_terminals;
use nmbr9_core::regex_model::dfa::accepted_words;
use nmbr9_core::regex_model::model::export_model;
use nmbr9_core::regex_model::verify::{assignment_from_placements, complete_assignment, placements_from_assignment, verify_assignment, PartGrid, Verdict};
use nmbr9_core::rules::{BoardState, Instance, Placement};

fn terminals(instance: &Instance) -> Vec<Vec<Placement>> {
    let mut out = Vec::new();
    enumerate_terminals(instance, None, |s| out.push(s.placements().to_vec())).unwrap();
    out
}

fn check_sound(instance: &Arc<Instance>, plays: &[Vec<Placement>]) {
    let export = export_model(instance).unwrap();
    for play in plays {
        let a = assignment_from_placements(&export, instance, play);
        assert_eq!(verify_assignment(&export, &a).unwrap(), Verdict::Satisfied, "{play:?}");
        let replayed = BoardState::replay(instance.clone(), play).unwrap();
        assert_eq!(a["S"], vec![replayed.score()]);
        let decoded = placements_from_assignment(&export, instance, &a).unwrap();
        assert_eq!(BoardState::replay(instance.clone(), &decoded).unwrap().score(), replayed.score());
    }
}

#[test]
fn known_deck_terminals_satisfy_the_model() {
    let inst = known("K-3-1-3", &[1, 3, 2], 8, 3);
    let plays = terminals(&inst);
    assert!(plays.iter().any(|p| p.iter().any(|q| q.level > 1)));
    check_sound(&inst, &plays);
}

#[test]
fn free_draft_terminals_satisfy_the_model() {
    let inst = free("F-3-1-3", 8, 2);
    let plays: Vec<_> = terminals(&inst).into_iter().step_by(7).collect();
    check_sound(&inst, &plays);
}

#[test]
fn repeated_digit_terminals_satisfy_the_model() {
    let inst = known("K-3-2-3", &[3, 3, 1], 8, 2);
    check_sound(&inst, &terminals(&inst));
}

/// Every assignment built from automaton words and levels that the model
/// accepts must be an engine play, and the accepted ones must be exactly
/// the oracle's terminals.
fn check_complete(instance: &Arc<Instance>) -> Vec<Vec<Placement>> {
    let export = export_model(instance).unwrap();
    let s = instance.grid();
    let deck: Vec<u16> = {
        let mut copies = [0u8; 10];
        instance
            .deck()
            .unwrap()
            .draws()
            .iter()
            .map(|&d| {
                copies[d as usize] += 1;
                instance.part_id(d, copies[d as usize])
            })
            .collect()
    };
    // parts off the deck get the empty word plus a few placed words, which
    // the model must reject
    let options: Vec<Vec<Option<PartGrid>>> = (1..=instance.parts() as u16)
        .map(|id| {
            let on_deck = deck.contains(&id);
            let (digit, _) = instance.part_of(id);
            let dfa = &export.automata.iter().find(|a| a.digit == digit).unwrap().dfa;
            let mut opts = Vec::new();
            for word in accepted_words(dfa, 1 + s * s, usize::MAX) {
                if word[0] == 0 {
                    opts.push(None);
                    continue;
                }
                for level in 1..=instance.levels() {
                    opts.push(Some(PartGrid { level, word: word[1..].to_vec() }));
                }
            }
            if !on_deck {
                opts.truncate(3);
            }
            opts
        })
        .collect();

    let mut accepted = Vec::new();
    let mut pick = vec![0usize; options.len()];
    loop {
        let grids: Vec<Option<PartGrid>> = pick.iter().zip(&options).map(|(&i, o)| o[i].clone()).collect();
        let a = complete_assignment(&export, &deck, &grids);
        // a domain error (e.g. a negative score from a used part left off
        // the board) is a rejection like any other
        if matches!(verify_assignment(&export, &a), Ok(Verdict::Satisfied)) {
            let play = placements_from_assignment(&export, instance, &a).unwrap();
            let state = BoardState::replay(instance.clone(), &play).unwrap();
            assert_eq!(a["S"], vec![state.score()]);
            accepted.push(play);
        }
        let mut i = 0;
        while i < pick.len() {
            pick[i] += 1;
            if pick[i] < options[i].len() {
                break;
            }
            pick[i] = 0;
            i += 1;
        }
        if i == pick.len() {
            break;
        }
    }
    let mut expected = terminals(instance);
    expected.sort_by_key(|p| p.iter().map(|q| q.sequence_key()).collect::<Vec<_>>());
    accepted.sort_by_key(|p| p.iter().map(|q| q.sequence_key()).collect::<Vec<_>>());
    assert_eq!(accepted, expected);
    accepted
}

#[test]
fn model_solutions_are_exactly_the_plays_two_cards() {
    check_complete(&known("K-2-1-2", &[2, 1], 6, 2));
}

#[test]
fn model_solutions_are_exactly_the_plays_three_cards() {
    let plays = check_complete(&known("K-3-1-3", &[1, 2, 3], 7, 2));
    assert!(plays.iter().any(|p| p[2].level == 2));
}

#[test]
fn every_constraint_class_catches_a_corruption() {
    let inst = free("F-3-1-3", 8, 3);
    let play = terminals(&inst).into_iter().find(|p| p.iter().any(|q| q.level > 1)).unwrap();
    let export = export_model(&inst).unwrap();
    let good = assignment_from_placements(&export, &inst, &play);
    assert!(verify_assignment(&export, &good).unwrap().is_satisfied());
    assert_eq!(common::undetected_classes(&export, &good), Vec::<u8>::new());
}

#[test]
fn export_is_deterministic() {
    let a = export_model(&free("F-4-2-6", 10, 3)).unwrap().to_text();
    let b = export_model(&free("F-4-2-6", 10, 3)).unwrap().to_text();
    assert_eq!(a, b);
    let k = export_model(&known("K-1-1-2", &[0, 1], 6, 2)).unwrap();
    assert_eq!(k.regular_count(), 4);
}
