//! Checking variable assignments against an exported model, and moving
//! between engine play sequences and assignments.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::model::{Body, ConstraintKind, Layout, Matrix, ModelExport, Var};
use crate::rules::{placement_cells, placement_halo, Instance, Placement};
use crate::shapes::Shape;

/// Values by family name, flattened row-major over the family's indices.
pub type Assignment = BTreeMap<String, Vec<i64>>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AssignmentError {
    #[error("no values for family {0}")]
    Missing(String),
    #[error("family {family} needs {expected} values, got {got}")]
    Length { family: String, expected: usize, got: usize },
    #[error("{var} = {value} outside {lo}..{hi}")]
    OutOfDomain { var: String, value: i64, lo: i64, hi: i64 },
    #[error("{var} is fixed to {expected}, got {got}")]
    Fixed { var: String, expected: i64, got: i64 },
    #[error("{var} is a border cell and must be 0, got {value}")]
    Border { var: String, value: i64 },
    #[error("family {0} is not part of the model")]
    Unknown(String),
}

/// The first constraint an assignment breaks.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    /// Position in the export's constraint list.
    pub constraint: usize,
    pub paper_no: u8,
    pub kind: ConstraintKind,
    pub detail: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "constraint ({}) {} #{}: {}", self.paper_no, self.kind.name(), self.constraint, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Satisfied,
    Violated(Violation),
}

impl Verdict {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, Verdict::Satisfied)
    }
}

struct View<'a> {
    export: &'a ModelExport,
    vals: Vec<&'a [i64]>,
    cells: usize,
}

impl<'a> View<'a> {
    fn new(export: &'a ModelExport, a: &'a Assignment) -> Result<View<'a>, AssignmentError> {
        if let Some(name) = a.keys().find(|name| export.family_by_name(name).is_none()) {
            return Err(AssignmentError::Unknown(name.clone()));
        }
        let mut vals = Vec::with_capacity(export.families.len());
        for fam in &export.families {
            let v = a.get(&fam.name).ok_or_else(|| AssignmentError::Missing(fam.name.clone()))?;
            if v.len() != fam.len() {
                return Err(AssignmentError::Length { family: fam.name.clone(), expected: fam.len(), got: v.len() });
            }
            for (i, &x) in v.iter().enumerate() {
                if x < fam.domain.0 || x > fam.domain.1 {
                    return Err(AssignmentError::OutOfDomain { var: fam.label(i), value: x, lo: fam.domain.0, hi: fam.domain.1 });
                }
                if let Some(fixed) = &fam.fixed {
                    if fixed[i] != x {
                        return Err(AssignmentError::Fixed { var: fam.label(i), expected: fixed[i], got: x });
                    }
                }
                if x != 0 && fam.on_border(i) {
                    return Err(AssignmentError::Border { var: fam.label(i), value: x });
                }
            }
            vals.push(v.as_slice());
        }
        Ok(View { export, vals, cells: export.grid * export.grid })
    }

    fn get(&self, v: Var) -> i64 {
        self.vals[v.family as usize][v.index as usize]
    }

    fn at(&self, m: Matrix, cell: usize) -> i64 {
        self.vals[m.family as usize][m.base as usize + cell]
    }

    fn label(&self, v: Var) -> String {
        self.export.label(v)
    }

    fn cell_label(&self, m: Matrix, cell: usize) -> String {
        format!("{}({},{})", self.export.matrix_label(m), cell / self.export.grid + 1, cell % self.export.grid + 1)
    }

    fn any_overlap(&self, a: Matrix, b: Matrix) -> bool {
        (0..self.cells).any(|i| self.at(a, i) != 0 && self.at(b, i) != 0)
    }

    fn check(&self, body: &Body) -> Option<String> {
        let truth = |x: i64| x != 0;
        match body {
            Body::GlobalCardinality { deck, counts } => {
                for (p, &c) in counts.iter().enumerate() {
                    let occurs = deck.iter().filter(|&&d| self.get(d) == p as i64 + 1).count() as i64;
                    if occurs != self.get(c) {
                        return Some(format!("part {} occurs {occurs} times in the deck, {} = {}", p + 1, self.label(c), self.get(c)));
                    }
                }
                None
            }
            Body::Regular { automaton, control, grid } => {
                let dfa = &self.export.automata[*automaton].dfa;
                let mut word = Vec::with_capacity(1 + self.cells);
                word.push(self.get(*control) as u8);
                word.extend((0..self.cells).map(|i| self.at(*grid, i) as u8));
                (!dfa.accepts(&word)).then(|| format!("{} {} rejected by automaton {automaton}", self.label(*control), self.export.matrix_label(*grid)))
            }
            Body::Inverse { order, slots } => {
                for (p, &o) in order.iter().enumerate() {
                    let pos = self.get(o) as usize;
                    if self.get(slots[pos - 1]) != p as i64 + 1 {
                        return Some(format!("{} = {pos} but {} = {}", self.label(o), self.label(slots[pos - 1]), self.get(slots[pos - 1])));
                    }
                }
                for (i, &slot) in slots.iter().enumerate() {
                    let p = self.get(slot) as usize;
                    if self.get(order[p - 1]) != i as i64 + 1 {
                        return Some(format!("{} = {p} but {} = {}", self.label(slot), self.label(order[p - 1]), self.get(order[p - 1])));
                    }
                }
                None
            }
            Body::Before { before, first, second } => {
                (truth(self.get(*before)) != (self.get(*first) < self.get(*second))).then(|| format!("{} disagrees with {} < {}", self.label(*before), self.label(*first), self.label(*second)))
            }
            Body::Used { position, used, deck_len } => {
                (truth(self.get(*used)) != (self.get(*position) <= *deck_len)).then(|| format!("{} disagrees with {} <= {deck_len}", self.label(*used), self.label(*position)))
            }
            Body::IntToBool { value, bools } => {
                let v = self.get(*value);
                bools
                    .iter()
                    .enumerate()
                    .find(|&(j, &b)| truth(self.get(b)) != (v == j as i64))
                    .map(|(j, &b)| format!("{} = {} but {} = {v} (index {j})", self.label(b), self.get(b), self.label(*value)))
            }
            Body::Complement { used, unused } => {
                (self.get(*used) != 1 - self.get(*unused)).then(|| format!("{} is not 1 - {}", self.label(*used), self.label(*unused)))
            }
            Body::Aspect { grid, ones, twos } => (0..self.cells).find_map(|i| {
                let g = self.at(*grid, i);
                if truth(self.at(*ones, i)) != (g == 1) {
                    Some(format!("{} disagrees with {}", self.cell_label(*ones, i), self.cell_label(*grid, i)))
                } else if truth(self.at(*twos, i)) != (g == 2) {
                    Some(format!("{} disagrees with {}", self.cell_label(*twos, i), self.cell_label(*grid, i)))
                } else {
                    None
                }
            }),
            Body::GridChannel { level, part, grid } => (0..self.cells).find_map(|i| {
                ((self.at(*level, i) == *part) != (self.at(*grid, i) == 1)).then(|| {
                    format!("{} = {} but {} = {}", self.cell_label(*level, i), self.at(*level, i), self.cell_label(*grid, i), self.at(*grid, i))
                })
            }),
            Body::AnyEarlier { flag, terms } => {
                let any = terms.iter().any(|&(b, l)| truth(self.get(b)) && truth(self.get(l)));
                (truth(self.get(*flag)) != any).then(|| format!("{} = {} but the disjunction is {any}", self.label(*flag), self.get(*flag)))
            }
            Body::EarlierUnion { union, terms } => (0..self.cells).find_map(|i| {
                let any = terms.iter().any(|&(b, m)| truth(self.get(b)) && truth(self.at(m, i)));
                (truth(self.at(*union, i)) != any).then(|| format!("{} disagrees with the union of earlier parts", self.cell_label(*union, i)))
            }),
            Body::Connected { active, earlier, halo, union } => {
                let guard = truth(self.get(*active)) && truth(self.get(*earlier));
                (guard && !self.any_overlap(*halo, *union)).then(|| {
                    format!("{} does not touch {}", self.export.matrix_label(*halo), self.export.matrix_label(*union))
                })
            }
            Body::OnTop { cells, support } => (0..self.cells).find_map(|i| {
                (truth(self.at(*cells, i)) && !truth(self.at(*support, i))).then(|| format!("{} has no support in {}", self.cell_label(*cells, i), self.export.matrix_label(*support)))
            }),
            Body::Overlap { flag, before, upper, lower } => {
                let holds = truth(self.get(*before)) && self.any_overlap(*upper, *lower);
                (truth(self.get(*flag)) != holds).then(|| format!("{} = {} but the overlap is {holds}", self.label(*flag), self.get(*flag)))
            }
            Body::AtLeastTwo { active, terms } => {
                let sum: i64 = terms.iter().map(|&t| self.get(t)).sum();
                (truth(self.get(*active)) && sum < 2).then(|| format!("{} holds but only {sum} supporting part(s)", self.label(*active)))
            }
            Body::Objective { total, terms } => {
                let sum: i64 = terms.iter().map(|&(c, l, y)| c * (self.get(l) - self.get(y))).sum();
                (self.get(*total) != sum).then(|| format!("{} = {} but the weighted sum is {sum}", self.label(*total), self.get(*total)))
            }
        }
    }
}

/// Checks every constraint in export order and reports the first failure.
pub fn verify_assignment(export: &ModelExport, assignment: &Assignment) -> Result<Verdict, AssignmentError> {
    let view = View::new(export, assignment)?;
    for (i, c) in export.constraints.iter().enumerate() {
        if let Some(detail) = view.check(&c.body) {
            return Ok(Verdict::Violated(Violation { constraint: i, paper_no: c.paper_no, kind: c.kind, detail }));
        }
    }
    Ok(Verdict::Satisfied)
}

/// Every failing constraint, in export order.
pub fn all_violations(export: &ModelExport, assignment: &Assignment) -> Result<Vec<Violation>, AssignmentError> {
    let view = View::new(export, assignment)?;
    Ok(export
        .constraints
        .iter()
        .enumerate()
        .filter_map(|(i, c)| view.check(&c.body).map(|detail| Violation { constraint: i, paper_no: c.paper_no, kind: c.kind, detail }))
        .collect())
}

/// The grid word of one placed part: its level and `s*s` symbols (0, 1, 2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartGrid {
    pub level: usize,
    pub word: Vec<u8>,
}

/// Builds the full assignment from the deck (as part ids) and each part's
/// grid; every other variable follows functionally. Unused parts take the
/// positions after the deck in ascending part order.
pub fn complete_assignment(export: &ModelExport, deck: &[u16], grids: &[Option<PartGrid>]) -> Assignment {
    let lay = Layout::from_export(export);
    let (n, k, lt, s) = (lay.n, lay.k, lay.levels, lay.s);
    let cells = s * s;
    let mut vals: Vec<Vec<i64>> = export.families.iter().map(|f| vec![0; f.len()]).collect();
    let set = |vals: &mut Vec<Vec<i64>>, v: Var, x: i64| vals[v.family as usize][v.index as usize] = x;
    let cell_var = |m: Matrix, i: usize| Var { family: m.family, index: m.base + i as u32 };

    let mut order = vec![0usize; n + 1];
    for (i, &p) in deck.iter().enumerate() {
        order[p as usize] = i + 1;
    }
    let mut next = k + 1;
    for slot in order.iter_mut().skip(1) {
        if *slot == 0 {
            *slot = next;
            next += 1;
        }
    }
    let before = |p: usize, q: usize| order[p] < order[q];
    let level_of = |p: usize| grids.get(p - 1).and_then(|g| g.as_ref()).map_or(0, |g| g.level);

    for (i, &p) in deck.iter().enumerate() {
        set(&mut vals, lay.d(i + 1), p as i64);
    }
    for p in 1..=n {
        set(&mut vals, lay.o(p), order[p] as i64);
        if order[p] > k {
            set(&mut vals, lay.e(order[p]), p as i64);
        }
        for q in 1..=n {
            set(&mut vals, lay.b(p, q), before(p, q) as i64);
        }
        let lv = level_of(p);
        let used = order[p] <= k;
        set(&mut vals, lay.lv(p), lv as i64);
        set(&mut vals, lay.y(p), used as i64);
        set(&mut vals, lay.n_(p), !used as i64);
        for l in 1..=lt {
            set(&mut vals, lay.l(p, l), (lv == l) as i64);
        }
        if let Some(g) = grids.get(p - 1).and_then(|g| g.as_ref()) {
            for (i, &sym) in g.word.iter().enumerate() {
                set(&mut vals, cell_var(lay.gp(g.level, p), i), sym as i64);
                set(&mut vals, cell_var(lay.g1(g.level, p), i), (sym == 1) as i64);
                set(&mut vals, cell_var(lay.g2(g.level, p), i), (sym == 2) as i64);
                if sym == 1 {
                    set(&mut vals, cell_var(lay.g(g.level), i), p as i64);
                }
            }
        }
    }
    let ones = |vals: &Vec<Vec<i64>>, l: usize, p: usize, i: usize| vals[lay.g1 as usize][(((l - 1) * n + p - 1) * cells) + i] != 0;
    for l in 1..=lt {
        for p in 1..=n {
            let earlier = (1..=n).any(|r| before(r, p) && level_of(r) == l);
            set(&mut vals, lay.q(l, p), earlier as i64);
            for i in 0..cells {
                let covered = (1..=n).any(|r| before(r, p) && ones(&vals, l, r, i));
                set(&mut vals, cell_var(lay.u(l, p), i), covered as i64);
            }
        }
    }
    for l in 2..=lt {
        for p in 1..=n {
            for r in 1..=n {
                let overlap = before(r, p) && (0..cells).any(|i| ones(&vals, l, p, i) && ones(&vals, l - 1, r, i));
                set(&mut vals, lay.t(l, p, r), overlap as i64);
            }
        }
    }
    let score: i64 = (1..=n).filter(|&p| order[p] <= k).map(|p| export.values[p - 1] * (level_of(p) as i64 - 1)).sum();
    set(&mut vals, lay.total(), score);

    export.families.iter().map(|f| f.name.clone()).zip(vals).collect()
}

/// Transcribes an engine play sequence (complete or partial) into an
/// assignment. For a partial play the deck must still be complete, so only
/// terminal states of K instances and complete F plays are meaningful.
pub fn assignment_from_placements(export: &ModelExport, instance: &Instance, placements: &[Placement]) -> Assignment {
    let s = instance.grid();
    let mut grids: Vec<Option<PartGrid>> = vec![None; instance.parts()];
    let mut deck = Vec::with_capacity(placements.len());
    for p in placements {
        let id = instance.part_id(p.digit, p.copy);
        deck.push(id);
        let mut word = vec![0u8; s * s];
        for (r, c) in placement_halo(instance, p) {
            word[r * s + c] = 2;
        }
        for (r, c) in placement_cells(instance, p) {
            word[r * s + c] = 1;
        }
        grids[id as usize - 1] = Some(PartGrid { level: p.level as usize, word });
    }
    complete_assignment(export, &deck, &grids)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error(transparent)]
    Assignment(#[from] AssignmentError),
    #[error("deck card {0} names a part with no level")]
    Unplaced(usize),
    #[error("part {0} has no cells on its level")]
    NoCells(u16),
    #[error("cells of part {0} match no orientation of its digit")]
    UnknownShape(u16),
}

/// Reads the play sequence encoded by an assignment: deck order from `D`,
/// level from `Lv`, shape and anchor from the part's `G1` cells. Copies are
/// renumbered in draw order, so interchangeable copies decode alike.
pub fn placements_from_assignment(export: &ModelExport, instance: &Instance, assignment: &Assignment) -> Result<Vec<Placement>, DecodeError> {
    let view = View::new(export, assignment)?;
    let lay = Layout::from_export(export);
    let s = lay.s;
    let mut copies = [0u8; 10];
    let mut out = Vec::with_capacity(lay.k);
    for i in 1..=lay.k {
        let id = view.get(lay.d(i)) as u16;
        let level = view.get(lay.lv(id as usize)) as usize;
        if level == 0 {
            return Err(DecodeError::Unplaced(i));
        }
        let m = lay.g1(level, id as usize);
        let cells: Vec<(i32, i32)> = (0..s * s).filter(|&c| view.at(m, c) != 0).map(|c| ((c / s) as i32, (c % s) as i32)).collect();
        if cells.is_empty() {
            return Err(DecodeError::NoCells(id));
        }
        let row = cells.iter().map(|c| c.0).min().unwrap();
        let col = cells.iter().map(|c| c.1).min().unwrap();
        let shape = Shape::from_cells(cells).map_err(|_| DecodeError::UnknownShape(id))?;
        let digit = instance.part_value(id);
        let orientation = instance
            .piece(digit)
            .orientation_set
            .shapes()
            .iter()
            .position(|o| *o == shape)
            .ok_or(DecodeError::UnknownShape(id))?;
        copies[digit as usize] += 1;
        out.push(Placement {
            card_index: i,
            digit,
            copy: copies[digit as usize],
            level: level as u8,
            orientation: orientation as u8,
            row: row as u8,
            col: col as u8,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex_model::model::export_model;
    use crate::rules::BoardState;
    use std::sync::Arc;

    fn played() -> (Arc<Instance>, Vec<Placement>) {
        let inst = Arc::new(Instance::known("K-7-1-3", &[0, 5, 7], 12, 2).unwrap());
        let mut state = BoardState::new(inst.clone());
        for _ in 0..3 {
            let digit = state.next_digit().unwrap();
            let p = *state.legal_placements(digit).iter().max_by_key(|p| (p.level, std::cmp::Reverse(p.canonical_key()))).unwrap();
            state = state.apply(&p).unwrap();
        }
        (inst, state.placements().to_vec())
    }

    #[test]
    fn transcribed_play_satisfies_the_model() {
        let (inst, placements) = played();
        let export = export_model(&inst).unwrap();
        let a = assignment_from_placements(&export, &inst, &placements);
        assert_eq!(verify_assignment(&export, &a).unwrap(), Verdict::Satisfied);
        assert_eq!(a["S"], vec![crate::rules::score_placements(&placements)]);
        assert_eq!(placements_from_assignment(&export, &inst, &a).unwrap(), placements);
    }

    #[test]
    fn corrupted_level_grid_breaks_grid_channel() {
        let (inst, placements) = played();
        let export = export_model(&inst).unwrap();
        let mut a = assignment_from_placements(&export, &inst, &placements);
        let s = inst.grid();
        let cell = a["G"][..s * s].iter().position(|&v| v != 0).unwrap();
        a.get_mut("G").unwrap()[cell] = 0;
        match verify_assignment(&export, &a).unwrap() {
            Verdict::Violated(v) => assert_eq!(v.paper_no, 8),
            Verdict::Satisfied => panic!("corruption not detected"),
        }
    }

    #[test]
    fn domain_errors() {
        let (inst, placements) = played();
        let export = export_model(&inst).unwrap();
        let good = assignment_from_placements(&export, &inst, &placements);
        let mut a = good.clone();
        a.remove("Y");
        assert_eq!(verify_assignment(&export, &a), Err(AssignmentError::Missing("Y".into())));
        let mut a = good.clone();
        a.get_mut("Lv").unwrap()[0] = 9;
        assert!(matches!(verify_assignment(&export, &a), Err(AssignmentError::OutOfDomain { .. })));
        let mut a = good.clone();
        a.get_mut("D").unwrap().swap(0, 1);
        assert!(matches!(verify_assignment(&export, &a), Err(AssignmentError::Fixed { .. })));
        let mut a = good;
        a.get_mut("G").unwrap()[0] = 1;
        assert!(matches!(verify_assignment(&export, &a), Err(AssignmentError::Border { .. })));
    }
}
