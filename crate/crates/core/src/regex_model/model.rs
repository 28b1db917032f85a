//! The full constraint model of an instance as data.
//!
//! Variable families (indices are 1-based and inclusive):
//!
//! | family | indices | domain | meaning |
//! |---|---|---|---|
//! | `D` | `[1..k]` | `1..n` | part on each deck card |
//! | `O` | `[1..n]` | `1..n` | position of each part in the deck, `> k` = unused |
//! | `E` | `[k+1..n]` | `1..n` | padding slots of the inverse channel (absent when `k = n`) |
//! | `B` | `[1..n][1..n]` | `0..1` | `B[p][q]`: `p` is drawn before `q` |
//! | `G` | `[1..l][1..s][1..s]` | `0..n` | part occupying each cell of a level; border fixed to 0 |
//! | `Gp` | `[1..l][1..n][1..s][1..s]` | `0..2` | grid of part `p` on level `l` |
//! | `G1`, `G2` | as `Gp` | `0..1` | `Gp = 1` / `Gp = 2` |
//! | `L` | `[1..n][1..l]` | `0..1` | part `p` is on level `l` |
//! | `Lv` | `[1..n]` | `0..l` | level of `p`, 0 when unused |
//! | `Y`, `N` | `[1..n]` | `0..1` | `p` is used / unused |
//! | `Q` | `[1..l][1..n]` | `0..1` | some part drawn before `p` is on level `l` |
//! | `U` | `[1..l][1..n][1..s][1..s]` | `0..1` | union of cells of parts drawn before `p` on level `l` |
//! | `T` | `[2..l][1..n][1..n]` | `0..1` | `T[l][p][q]`: `q` is drawn before `p` and `p` on `l` overlaps `q` on `l-1` |
//! | `S` | scalar | `0..max` | score |
//!
//! `Q`, `U` and `T` expand the existential and union sub-terms of the
//! connectivity and two-supports constraints into plain variables.

use std::fmt::Write as _;

use thiserror::Error;

use super::dfa::{compile, Dfa};
use super::regex::{build_regex, BuildError};
use crate::rules::{Instance, VariantKind};
use crate::solver::spiral_order;

/// A family of variables indexed over inclusive 1-based ranges.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Family {
    pub name: String,
    pub ranges: Vec<(usize, usize)>,
    pub domain: (i64, i64),
    /// The last two indices address a grid whose border cells are fixed to 0.
    pub border_zero: bool,
    pub fixed: Option<Vec<i64>>,
}

impl Family {
    pub fn len(&self) -> usize {
        self.ranges.iter().map(|(lo, hi)| hi + 1 - lo).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn flat(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.ranges.len());
        index.iter().zip(&self.ranges).fold(0, |acc, (&i, &(lo, hi))| {
            debug_assert!(i >= lo && i <= hi, "{}: index {i} outside {lo}..{hi}", self.name);
            acc * (hi + 1 - lo) + (i - lo)
        })
    }

    pub fn index_of(&self, mut flat: usize) -> Vec<usize> {
        let mut out = vec![0; self.ranges.len()];
        for (slot, &(lo, hi)) in out.iter_mut().zip(&self.ranges).rev() {
            let width = hi + 1 - lo;
            *slot = lo + flat % width;
            flat /= width;
        }
        out
    }

    pub fn label(&self, flat: usize) -> String {
        let mut out = self.name.clone();
        for i in self.index_of(flat) {
            let _ = write!(out, "[{i}]");
        }
        out
    }

    /// Whether a flat index is a border cell of a border-zero grid.
    pub fn on_border(&self, flat: usize) -> bool {
        if !self.border_zero {
            return false;
        }
        let idx = self.index_of(flat);
        let n = idx.len();
        let (r, c) = (idx[n - 2], idx[n - 1]);
        let (lo, hi) = self.ranges[n - 1];
        r == lo || c == lo || r == hi || c == hi
    }
}

/// One variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Var {
    pub family: u16,
    pub index: u32,
}

/// An `s x s` block of a grid family, starting at `base`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Matrix {
    pub family: u16,
    pub base: u32,
}

impl Matrix {
    pub fn cell(&self, grid: usize, row: usize, col: usize) -> Var {
        Var { family: self.family, index: self.base + (row * grid + col) as u32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ConstraintKind {
    Cardinality,
    Regular,
    Inverse,
    OrderChannel,
    IntBoolChannel,
    Iff,
    Implication,
    AtLeastTwoSum,
    LinearObjective,
}

impl ConstraintKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstraintKind::Cardinality => "cardinality",
            ConstraintKind::Regular => "regular",
            ConstraintKind::Inverse => "inverse",
            ConstraintKind::OrderChannel => "order-channel",
            ConstraintKind::IntBoolChannel => "int-bool-channel",
            ConstraintKind::Iff => "iff",
            ConstraintKind::Implication => "implication",
            ConstraintKind::AtLeastTwoSum => "at-least-two-sum",
            ConstraintKind::LinearObjective => "linear-objective",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Body {
    /// Each part value `p` occurs `counts[p]` times in `deck`.
    GlobalCardinality { deck: Vec<Var>, counts: Vec<Var> },
    /// `control` followed by the row-major grid is accepted by the automaton.
    Regular { automaton: usize, control: Var, grid: Matrix },
    /// `order[p] = i` iff `slots[i] = p` (1-based).
    Inverse { order: Vec<Var>, slots: Vec<Var> },
    /// `before <-> first < second`.
    Before { before: Var, first: Var, second: Var },
    /// `position <= deck_len <-> used`.
    Used { position: Var, used: Var, deck_len: i64 },
    /// `bools[j] = 1 <-> value = j`.
    IntToBool { value: Var, bools: Vec<Var> },
    /// `used = 1 - unused`.
    Complement { used: Var, unused: Var },
    /// Pointwise `grid = 1 <-> ones`, `grid = 2 <-> twos`.
    Aspect { grid: Matrix, ones: Matrix, twos: Matrix },
    /// Pointwise `level = part <-> grid = 1`.
    GridChannel { level: Matrix, part: i64, grid: Matrix },
    /// `flag <-> OR (before_i AND on_level_i)`.
    AnyEarlier { flag: Var, terms: Vec<(Var, Var)> },
    /// Pointwise `union <-> OR (before_i AND cells_i)`.
    EarlierUnion { union: Matrix, terms: Vec<(Var, Matrix)> },
    /// `(active AND earlier) -> exists cell: halo AND union`.
    Connected { active: Var, earlier: Var, halo: Matrix, union: Matrix },
    /// Pointwise `cells -> support`.
    OnTop { cells: Matrix, support: Matrix },
    /// `flag <-> before AND exists cell: upper AND lower`.
    Overlap { flag: Var, before: Var, upper: Matrix, lower: Matrix },
    /// `active -> sum(terms) >= 2`.
    AtLeastTwo { active: Var, terms: Vec<Var> },
    /// `total = sum value * (level - used)`.
    Objective { total: Var, terms: Vec<(i64, Var, Var)> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Constraint {
    pub paper_no: u8,
    pub kind: ConstraintKind,
    pub body: Body,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExportedAutomaton {
    pub digit: u8,
    pub regex: String,
    pub dfa: Dfa,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SearchAnnotation {
    /// Families branched on, in order.
    pub decisions: Vec<String>,
    /// Cell order for grid branching (0-based `(row, col)`).
    pub cell_order: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelExport {
    pub instance: String,
    pub grid: usize,
    pub levels: usize,
    pub parts: usize,
    pub deck_len: usize,
    /// `v(p)` for `p = 1..=n`.
    pub values: Vec<i64>,
    pub families: Vec<Family>,
    pub constraints: Vec<Constraint>,
    pub automata: Vec<ExportedAutomaton>,
    pub search: SearchAnnotation,
    pub objective: Var,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExportError {
    #[error(transparent)]
    Build(#[from] BuildError),
}

/// Family handles for one export.
pub(crate) struct Layout {
    pub n: usize,
    pub k: usize,
    pub levels: usize,
    pub s: usize,
    pub d: u16,
    pub o: u16,
    pub e: Option<u16>,
    pub b: u16,
    pub g: u16,
    pub gp: u16,
    pub g1: u16,
    pub g2: u16,
    pub l: u16,
    pub lv: u16,
    pub y: u16,
    pub nn: u16,
    pub q: u16,
    pub u: u16,
    pub t: Option<u16>,
    pub total: u16,
}

impl Layout {
    fn var(&self, family: u16, index: usize) -> Var {
        Var { family, index: index as u32 }
    }

    pub fn d(&self, i: usize) -> Var {
        self.var(self.d, i - 1)
    }
    pub fn o(&self, p: usize) -> Var {
        self.var(self.o, p - 1)
    }
    pub fn e(&self, i: usize) -> Var {
        self.var(self.e.expect("E exists only when k < n"), i - self.k - 1)
    }
    pub fn b(&self, p: usize, q: usize) -> Var {
        self.var(self.b, (p - 1) * self.n + q - 1)
    }
    pub fn g(&self, l: usize) -> Matrix {
        Matrix { family: self.g, base: ((l - 1) * self.s * self.s) as u32 }
    }
    fn part_grid(&self, family: u16, l: usize, p: usize) -> Matrix {
        Matrix { family, base: (((l - 1) * self.n + p - 1) * self.s * self.s) as u32 }
    }
    pub fn gp(&self, l: usize, p: usize) -> Matrix {
        self.part_grid(self.gp, l, p)
    }
    pub fn g1(&self, l: usize, p: usize) -> Matrix {
        self.part_grid(self.g1, l, p)
    }
    pub fn g2(&self, l: usize, p: usize) -> Matrix {
        self.part_grid(self.g2, l, p)
    }
    pub fn u(&self, l: usize, p: usize) -> Matrix {
        self.part_grid(self.u, l, p)
    }
    pub fn l(&self, p: usize, l: usize) -> Var {
        self.var(self.l, (p - 1) * self.levels + l - 1)
    }
    pub fn lv(&self, p: usize) -> Var {
        self.var(self.lv, p - 1)
    }
    pub fn y(&self, p: usize) -> Var {
        self.var(self.y, p - 1)
    }
    pub fn n_(&self, p: usize) -> Var {
        self.var(self.nn, p - 1)
    }
    pub fn q(&self, l: usize, p: usize) -> Var {
        self.var(self.q, (l - 1) * self.n + p - 1)
    }
    pub fn t(&self, l: usize, p: usize, q: usize) -> Var {
        self.var(self.t.expect("T exists only with two or more levels"), ((l - 2) * self.n + p - 1) * self.n + q - 1)
    }
    pub fn total(&self) -> Var {
        self.var(self.total, 0)
    }

    pub(crate) fn from_export(export: &ModelExport) -> Layout {
        let find = |name: &str| export.families.iter().position(|f| f.name == name).map(|i| i as u16);
        Layout {
            n: export.parts,
            k: export.deck_len,
            levels: export.levels,
            s: export.grid,
            d: find("D").unwrap(),
            o: find("O").unwrap(),
            e: find("E"),
            b: find("B").unwrap(),
            g: find("G").unwrap(),
            gp: find("Gp").unwrap(),
            g1: find("G1").unwrap(),
            g2: find("G2").unwrap(),
            l: find("L").unwrap(),
            lv: find("Lv").unwrap(),
            y: find("Y").unwrap(),
            nn: find("N").unwrap(),
            q: find("Q").unwrap(),
            u: find("U").unwrap(),
            t: find("T"),
            total: find("S").unwrap(),
        }
    }
}

/// Builds the full model of an F or K instance.
pub fn export_model(instance: &Instance) -> Result<ModelExport, ExportError> {
    let n = instance.parts();
    let k = instance.deck_len();
    let levels = instance.levels();
    let s = instance.grid();
    let values: Vec<i64> = (1..=n as u16).map(|p| instance.part_value(p) as i64).collect();
    let max_score: i64 = values.iter().map(|v| v * (levels as i64 - 1)).sum();

    let mut families = Vec::new();
    let mut add = |name: &str, ranges: Vec<(usize, usize)>, domain: (i64, i64), border_zero: bool, fixed: Option<Vec<i64>>| {
        families.push(Family { name: name.to_string(), ranges, domain, border_zero, fixed });
        (families.len() - 1) as u16
    };
    let fixed_deck = match (instance.kind(), instance.deck()) {
        (VariantKind::Known, Some(deck)) => {
            let mut used = [0u8; 10];
            Some(
                deck.draws()
                    .iter()
                    .map(|&d| {
                        used[d as usize] += 1;
                        instance.part_id(d, used[d as usize]) as i64
                    })
                    .collect(),
            )
        }
        _ => None,
    };
    let n_i = n as i64;
    let d = add("D", vec![(1, k)], (1, n_i), false, fixed_deck);
    let o = add("O", vec![(1, n)], (1, n_i), false, None);
    let e = (k < n).then(|| add("E", vec![(k + 1, n)], (1, n_i), false, None));
    let b = add("B", vec![(1, n), (1, n)], (0, 1), false, None);
    let g = add("G", vec![(1, levels), (1, s), (1, s)], (0, n_i), true, None);
    let gp = add("Gp", vec![(1, levels), (1, n), (1, s), (1, s)], (0, 2), false, None);
    let g1 = add("G1", vec![(1, levels), (1, n), (1, s), (1, s)], (0, 1), false, None);
    let g2 = add("G2", vec![(1, levels), (1, n), (1, s), (1, s)], (0, 1), false, None);
    let l = add("L", vec![(1, n), (1, levels)], (0, 1), false, None);
    let lv = add("Lv", vec![(1, n)], (0, levels as i64), false, None);
    let y = add("Y", vec![(1, n)], (0, 1), false, None);
    let nn = add("N", vec![(1, n)], (0, 1), false, None);
    let q = add("Q", vec![(1, levels), (1, n)], (0, 1), false, None);
    let u = add("U", vec![(1, levels), (1, n), (1, s), (1, s)], (0, 1), false, None);
    let t = (levels >= 2).then(|| add("T", vec![(2, levels), (1, n), (1, n)], (0, 1), false, None));
    let total = add("S", vec![], (0, max_score), false, None);
    let lay = Layout { n, k, levels, s, d, o, e, b, g, gp, g1, g2, l, lv, y, nn, q, u, t, total };

    // one automaton per digit, shared by its copies and levels
    let mut automata = Vec::new();
    let mut automaton_of = [usize::MAX; 10];
    for p in 1..=n as u16 {
        let digit = instance.part_value(p);
        if automaton_of[digit as usize] == usize::MAX {
            let re = build_regex(digit, &instance.piece(digit).orientation_set, s)?;
            automaton_of[digit as usize] = automata.len();
            automata.push(ExportedAutomaton { digit, regex: re.symbolic(), dfa: compile(&re) });
        }
    }

    let mut cs = Vec::new();
    let mut push = |paper_no: u8, kind: ConstraintKind, body: Body| cs.push(Constraint { paper_no, kind, body });

    push(1, ConstraintKind::Cardinality, Body::GlobalCardinality {
        deck: (1..=k).map(|i| lay.d(i)).collect(),
        counts: (1..=n).map(|p| lay.y(p)).collect(),
    });
    for p in 1..=n {
        for lvl in 1..=levels {
            let automaton = automaton_of[instance.part_value(p as u16) as usize];
            push(2, ConstraintKind::Regular, Body::Regular { automaton, control: lay.l(p, lvl), grid: lay.gp(lvl, p) });
        }
    }
    let mut slots: Vec<Var> = (1..=k).map(|i| lay.d(i)).collect();
    slots.extend((k + 1..=n).map(|i| lay.e(i)));
    push(3, ConstraintKind::Inverse, Body::Inverse { order: (1..=n).map(|p| lay.o(p)).collect(), slots });
    for p in 1..=n {
        for q in 1..=n {
            push(4, ConstraintKind::OrderChannel, Body::Before { before: lay.b(p, q), first: lay.o(p), second: lay.o(q) });
        }
        push(4, ConstraintKind::OrderChannel, Body::Used { position: lay.o(p), used: lay.y(p), deck_len: k as i64 });
    }
    for p in 1..=n {
        let mut bools = vec![lay.n_(p)];
        bools.extend((1..=levels).map(|lvl| lay.l(p, lvl)));
        push(5, ConstraintKind::IntBoolChannel, Body::IntToBool { value: lay.lv(p), bools });
    }
    for p in 1..=n {
        push(6, ConstraintKind::Iff, Body::Complement { used: lay.y(p), unused: lay.n_(p) });
    }
    for lvl in 1..=levels {
        for p in 1..=n {
            push(7, ConstraintKind::Iff, Body::Aspect { grid: lay.gp(lvl, p), ones: lay.g1(lvl, p), twos: lay.g2(lvl, p) });
        }
    }
    for lvl in 1..=levels {
        for p in 1..=n {
            push(8, ConstraintKind::Iff, Body::GridChannel { level: lay.g(lvl), part: p as i64, grid: lay.gp(lvl, p) });
        }
    }
    for lvl in 1..=levels {
        for p in 1..=n {
            push(9, ConstraintKind::Iff, Body::AnyEarlier {
                flag: lay.q(lvl, p),
                terms: (1..=n).map(|r| (lay.b(r, p), lay.l(r, lvl))).collect(),
            });
            push(9, ConstraintKind::Iff, Body::EarlierUnion {
                union: lay.u(lvl, p),
                terms: (1..=n).map(|r| (lay.b(r, p), lay.g1(lvl, r))).collect(),
            });
            push(9, ConstraintKind::Implication, Body::Connected {
                active: lay.l(p, lvl),
                earlier: lay.q(lvl, p),
                halo: lay.g2(lvl, p),
                union: lay.u(lvl, p),
            });
        }
    }
    for lvl in 2..=levels {
        for p in 1..=n {
            push(10, ConstraintKind::Implication, Body::OnTop { cells: lay.g1(lvl, p), support: lay.u(lvl - 1, p) });
        }
    }
    for lvl in 2..=levels {
        for p in 1..=n {
            for r in 1..=n {
                push(11, ConstraintKind::Iff, Body::Overlap {
                    flag: lay.t(lvl, p, r),
                    before: lay.b(r, p),
                    upper: lay.g1(lvl, p),
                    lower: lay.g1(lvl - 1, r),
                });
            }
            push(11, ConstraintKind::AtLeastTwoSum, Body::AtLeastTwo {
                active: lay.l(p, lvl),
                terms: (1..=n).map(|r| lay.t(lvl, p, r)).collect(),
            });
        }
    }
    push(12, ConstraintKind::LinearObjective, Body::Objective {
        total: lay.total(),
        terms: (1..=n).map(|p| (values[p - 1], lay.lv(p), lay.y(p))).collect(),
    });

    Ok(ModelExport {
        instance: instance.describe(),
        grid: s,
        levels,
        parts: n,
        deck_len: k,
        values,
        families,
        constraints: cs,
        automata,
        search: SearchAnnotation {
            decisions: vec!["D".into(), "Lv".into(), "Gp".into()],
            cell_order: spiral_order(s),
        },
        objective: lay.total(),
    })
}

impl ModelExport {
    pub fn family(&self, var: Var) -> &Family {
        &self.families[var.family as usize]
    }

    pub fn label(&self, var: Var) -> String {
        self.family(var).label(var.index as usize)
    }

    /// Label of a grid block without its cell indices, e.g. `Gp[1][2]`.
    pub fn matrix_label(&self, m: Matrix) -> String {
        let fam = &self.families[m.family as usize];
        let idx = fam.index_of(m.base as usize);
        let mut out = fam.name.clone();
        for i in &idx[..idx.len() - 2] {
            let _ = write!(out, "[{i}]");
        }
        out
    }

    pub fn regular_count(&self) -> usize {
        self.constraints.iter().filter(|c| c.kind == ConstraintKind::Regular).count()
    }

    pub fn family_by_name(&self, name: &str) -> Option<&Family> {
        self.families.iter().find(|f| f.name == name)
    }

    /// Every variable mentioned by a constraint, grid blocks expanded.
    pub fn referenced(&self, c: &Constraint) -> Vec<Var> {
        let cells = |m: Matrix| (0..(self.grid * self.grid) as u32).map(move |i| Var { family: m.family, index: m.base + i });
        let mut out: Vec<Var> = Vec::new();
        match &c.body {
            Body::GlobalCardinality { deck, counts } => {
                out.extend(deck);
                out.extend(counts);
            }
            Body::Regular { control, grid, .. } => {
                out.push(*control);
                out.extend(cells(*grid));
            }
            Body::Inverse { order, slots } => {
                out.extend(order);
                out.extend(slots);
            }
            Body::Before { before, first, second } => out.extend([*before, *first, *second]),
            Body::Used { position, used, .. } => out.extend([*position, *used]),
            Body::IntToBool { value, bools } => {
                out.push(*value);
                out.extend(bools);
            }
            Body::Complement { used, unused } => out.extend([*used, *unused]),
            Body::Aspect { grid, ones, twos } => {
                for m in [grid, ones, twos] {
                    out.extend(cells(*m));
                }
            }
            Body::GridChannel { level, grid, .. } => {
                out.extend(cells(*level));
                out.extend(cells(*grid));
            }
            Body::AnyEarlier { flag, terms } => {
                out.push(*flag);
                for (a, b) in terms {
                    out.extend([*a, *b]);
                }
            }
            Body::EarlierUnion { union, terms } => {
                out.extend(cells(*union));
                for (a, m) in terms {
                    out.push(*a);
                    out.extend(cells(*m));
                }
            }
            Body::Connected { active, earlier, halo, union } => {
                out.extend([*active, *earlier]);
                out.extend(cells(*halo));
                out.extend(cells(*union));
            }
            Body::OnTop { cells: top, support } => {
                out.extend(cells(*top));
                out.extend(cells(*support));
            }
            Body::Overlap { flag, before, upper, lower } => {
                out.extend([*flag, *before]);
                out.extend(cells(*upper));
                out.extend(cells(*lower));
            }
            Body::AtLeastTwo { active, terms } => {
                out.push(*active);
                out.extend(terms);
            }
            Body::Objective { total, terms } => {
                out.push(*total);
                for (_, a, b) in terms {
                    out.extend([*a, *b]);
                }
            }
        }
        out
    }

    fn render_body(&self, c: &Constraint) -> String {
        let v = |x: &Var| self.label(*x);
        let m = |x: &Matrix| self.matrix_label(*x);
        let list = |xs: &[Var]| xs.iter().map(|x| self.label(*x)).collect::<Vec<_>>().join(",");
        match &c.body {
            Body::GlobalCardinality { deck, counts } => {
                format!("global_cardinality deck={} counts={}", list(deck), list(counts))
            }
            Body::Regular { automaton, control, grid } => format!(
                "regular automaton={automaton} scope={},{} length={}",
                v(control),
                m(grid),
                1 + self.grid * self.grid
            ),
            Body::Inverse { order, slots } => format!("inverse order={} slots={}", list(order), list(slots)),
            Body::Before { before, first, second } => format!("before {} = {} < {}", v(before), v(first), v(second)),
            Body::Used { position, used, deck_len } => format!("used {} = {} <= {deck_len}", v(used), v(position)),
            Body::IntToBool { value, bools } => format!("int_to_bool {} bools={}", v(value), list(bools)),
            Body::Complement { used, unused } => format!("complement {} = 1 - {}", v(used), v(unused)),
            Body::Aspect { grid, ones, twos } => format!("aspect {} ones={} twos={}", m(grid), m(ones), m(twos)),
            Body::GridChannel { level, part, grid } => format!("grid_channel {} value={part} part={}", m(level), m(grid)),
            Body::AnyEarlier { flag, terms } => {
                let t: Vec<String> = terms.iter().map(|(a, b)| format!("{}&{}", v(a), v(b))).collect();
                format!("any_earlier {} = or {}", v(flag), t.join(","))
            }
            Body::EarlierUnion { union, terms } => {
                let t: Vec<String> = terms.iter().map(|(a, b)| format!("{}&{}", v(a), m(b))).collect();
                format!("earlier_union {} = or {}", m(union), t.join(","))
            }
            Body::Connected { active, earlier, halo, union } => {
                format!("connected {}&{} -> any {}&{}", v(active), v(earlier), m(halo), m(union))
            }
            Body::OnTop { cells, support } => format!("on_top {} -> {}", m(cells), m(support)),
            Body::Overlap { flag, before, upper, lower } => {
                format!("overlap {} = {} & any {}&{}", v(flag), v(before), m(upper), m(lower))
            }
            Body::AtLeastTwo { active, terms } => format!("at_least_two {} -> sum {} >= 2", v(active), list(terms)),
            Body::Objective { total, terms } => {
                let t: Vec<String> = terms.iter().map(|(c, a, b)| format!("{c}*({}-{})", v(a), v(b))).collect();
                format!("objective {} = {}", v(total), t.join(" + "))
            }
        }
    }

    /// The interchange text format (see `docs/model-format.md`).
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "nmbr9-model format_version=1");
        let _ = writeln!(out, "instance {}", self.instance);
        let _ = writeln!(out, "parts {} deck_len {} grid {} levels {}", self.parts, self.deck_len, self.grid, self.levels);
        let values: Vec<String> = self.values.iter().map(i64::to_string).collect();
        let _ = writeln!(out, "values {}", values.join(","));
        let _ = writeln!(out, "objective maximize {}", self.label(self.objective));

        let _ = writeln!(out, "\n[variables]");
        for f in &self.families {
            let ranges: Vec<String> = f.ranges.iter().map(|(lo, hi)| format!("{lo}..{hi}")).collect();
            let mut line = format!(
                "var {} index={} domain={}..{}",
                f.name,
                if ranges.is_empty() { "-".to_string() } else { ranges.join(",") },
                f.domain.0,
                f.domain.1
            );
            if f.border_zero {
                line.push_str(" border=0");
            }
            if let Some(fixed) = &f.fixed {
                let vals: Vec<String> = fixed.iter().map(i64::to_string).collect();
                let _ = write!(line, " fixed={}", vals.join(","));
            }
            let _ = writeln!(out, "{line}");
        }

        let _ = writeln!(out, "\n[constraints]");
        for c in &self.constraints {
            let _ = writeln!(out, "c paper_no={} kind={} {}", c.paper_no, c.kind.name(), self.render_body(c));
        }

        let _ = writeln!(out, "\n[automata]");
        for (i, a) in self.automata.iter().enumerate() {
            let accepting: Vec<String> = a.dfa.accepting_states().iter().map(u32::to_string).collect();
            let transitions = a.dfa.transitions();
            let _ = writeln!(
                out,
                "automaton {i} digit={} states={} start={} accepting={} transitions={}",
                a.digit,
                a.dfa.state_count(),
                a.dfa.start(),
                accepting.join(","),
                transitions.len()
            );
            let _ = writeln!(out, "regex {}", a.regex);
            for (from, sym, to) in transitions {
                let _ = writeln!(out, "t {from} {sym} {to}");
            }
        }

        let _ = writeln!(out, "\n[search]");
        let _ = writeln!(out, "decisions {}", self.search.decisions.join(","));
        let cells: Vec<String> = self.search.cell_order.iter().map(|(r, c)| format!("{},{}", r + 1, c + 1)).collect();
        let _ = writeln!(out, "cell_order {}", cells.join(" "));
        out
    }
}
