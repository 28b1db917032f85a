//! Polyomino geometry for the ten digit parts.
//!
//! A [`Shape`] is a normalized set of unit cells. Parts may only be rotated,
//! never reflected, so [`distinct_orientations`] enumerates the quarter turns
//! 0°, 90°, 180°, 270° in that order and drops repeats. The exterior halo is
//! the ring of empty cells around a part that can be reached from outside;
//! enclosed holes are not part of it.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use thiserror::Error;

/// A cell offset `(row, col)`.
pub type Cell = (i32, i32);

const NEIGHBOURS: [Cell; 4] = [(-1, 0), (1, 0), (0, -1), (0, 1)];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ShapeError {
    #[error("shape has no cells")]
    Empty,
    #[error("shape cells are not 4-connected")]
    Disconnected,
}

/// A normalized polyomino: min row and min col are both zero.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Shape {
    cells: Vec<Cell>,
    height: i32,
    width: i32,
}

impl Shape {
    /// Builds a shape from arbitrary offsets, translating them so the
    /// bounding box starts at `(0, 0)`.
    pub fn from_cells<I: IntoIterator<Item = Cell>>(cells: I) -> Result<Shape, ShapeError> {
        let set: BTreeSet<Cell> = cells.into_iter().collect();
        if set.is_empty() {
            return Err(ShapeError::Empty);
        }
        let min_r = set.iter().map(|c| c.0).min().unwrap();
        let min_c = set.iter().map(|c| c.1).min().unwrap();
        let cells: Vec<Cell> = set.iter().map(|&(r, c)| (r - min_r, c - min_c)).collect();
        if !is_connected(&cells) {
            return Err(ShapeError::Disconnected);
        }
        let height = cells.iter().map(|c| c.0).max().unwrap() + 1;
        let width = cells.iter().map(|c| c.1).max().unwrap() + 1;
        Ok(Shape { cells, height, width })
    }

    /// Builds a shape from picture rows where `#` marks a cell.
    pub fn from_rows(rows: &[&str]) -> Result<Shape, ShapeError> {
        let cells = rows.iter().enumerate().flat_map(|(r, line)| {
            line.chars()
                .enumerate()
                .filter(|&(_, ch)| ch == '#')
                .map(move |(c, _)| (r as i32, c as i32))
        });
        Shape::from_cells(cells)
    }

    /// Cells in row-major order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn height(&self) -> i32 {
        self.height
    }

    pub fn width(&self) -> i32 {
        self.width
    }

    pub fn contains(&self, cell: Cell) -> bool {
        self.cells.binary_search(&cell).is_ok()
    }

    /// Picture rows, `#` for cells and `.` for gaps.
    pub fn rows(&self) -> Vec<String> {
        (0..self.height)
            .map(|r| {
                (0..self.width)
                    .map(|c| if self.contains((r, c)) { '#' } else { '.' })
                    .collect()
            })
            .collect()
    }

    /// Empty cells inside the bounding box that cannot be reached from
    /// outside, grouped into 4-connected holes.
    pub fn holes(&self) -> Vec<Vec<Cell>> {
        let outside = self.outside_cells();
        let mut seen = BTreeSet::new();
        let mut holes = Vec::new();
        for r in 0..self.height {
            for c in 0..self.width {
                let cell = (r, c);
                if self.contains(cell) || outside.contains(&cell) || seen.contains(&cell) {
                    continue;
                }
                let mut hole = Vec::new();
                let mut queue = VecDeque::from([cell]);
                seen.insert(cell);
                while let Some(cur) = queue.pop_front() {
                    hole.push(cur);
                    for (dr, dc) in NEIGHBOURS {
                        let next = (cur.0 + dr, cur.1 + dc);
                        if !self.contains(next) && !outside.contains(&next) && seen.insert(next) {
                            queue.push_back(next);
                        }
                    }
                }
                hole.sort_unstable();
                holes.push(hole);
            }
        }
        holes
    }

    /// Empty cells of the bounding box extended by one cell on every side
    /// that are reachable from its rim through empty cells.
    fn outside_cells(&self) -> BTreeSet<Cell> {
        let (h, w) = (self.height, self.width);
        let in_box = |(r, c): Cell| r >= -1 && r <= h && c >= -1 && c <= w;
        let mut seen = BTreeSet::new();
        let mut queue = VecDeque::new();
        for r in -1..=h {
            for c in -1..=w {
                if r == -1 || r == h || c == -1 || c == w {
                    seen.insert((r, c));
                    queue.push_back((r, c));
                }
            }
        }
        while let Some(cur) = queue.pop_front() {
            for (dr, dc) in NEIGHBOURS {
                let next = (cur.0 + dr, cur.1 + dc);
                if in_box(next) && !self.contains(next) && seen.insert(next) {
                    queue.push_back(next);
                }
            }
        }
        seen
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.rows().join("/"))
    }
}

fn is_connected(cells: &[Cell]) -> bool {
    let set: BTreeSet<Cell> = cells.iter().copied().collect();
    let Some(&first) = cells.first() else {
        return false;
    };
    let mut seen = BTreeSet::from([first]);
    let mut queue = VecDeque::from([first]);
    while let Some(cur) = queue.pop_front() {
        for (dr, dc) in NEIGHBOURS {
            let next = (cur.0 + dr, cur.1 + dc);
            if set.contains(&next) && seen.insert(next) {
                queue.push_back(next);
            }
        }
    }
    seen.len() == set.len()
}

/// Quarter turn clockwise: `(r, c) -> (c, max_row - r)`, then normalized.
pub fn rotate90(shape: &Shape) -> Shape {
    let max_row = shape.height - 1;
    Shape::from_cells(shape.cells.iter().map(|&(r, c)| (c, max_row - r)))
        .expect("rotation preserves connectivity")
}

/// The distinct rotations of a shape, in 0°, 90°, 180°, 270° order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientationSet {
    shapes: Vec<Shape>,
}

impl OrientationSet {
    pub fn shapes(&self) -> &[Shape] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.shapes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shapes.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&Shape> {
        self.shapes.get(index)
    }

    /// Largest bounding-box extent over all orientations.
    pub fn max_extent(&self) -> i32 {
        self.shapes
            .iter()
            .map(|s| s.height.max(s.width))
            .max()
            .unwrap_or(0)
    }
}

pub fn distinct_orientations(shape: &Shape) -> OrientationSet {
    let mut shapes: Vec<Shape> = Vec::with_capacity(4);
    let mut current = shape.clone();
    for _ in 0..4 {
        if !shapes.contains(&current) {
            shapes.push(current.clone());
        }
        current = rotate90(&current);
    }
    OrientationSet { shapes }
}

/// Empty cells orthogonally adjacent to the shape and reachable from outside
/// its bounding box. Offsets may be `-1`. Returned in row-major order.
pub fn exterior_halo(shape: &Shape) -> Vec<Cell> {
    let outside = shape.outside_cells();
    outside
        .into_iter()
        .filter(|&(r, c)| {
            NEIGHBOURS
                .iter()
                .any(|&(dr, dc)| shape.contains((r + dr, c + dc)))
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CatalogError {
    #[error("line {line}: expected `digit <d>` header before shape rows")]
    MissingHeader { line: usize },
    #[error("line {line}: malformed header `{text}`")]
    MalformedHeader { line: usize, text: String },
    #[error("line {line}: digit {value} outside 0..9")]
    DigitOutOfRange { line: usize, value: String },
    #[error("line {line}: digit {digit} defined twice")]
    DuplicateDigit { digit: u8, line: usize },
    #[error("line {line}: digit {digit}: malformed grid row `{text}` (only `#` and `.` allowed)")]
    MalformedRow { digit: u8, line: usize, text: String },
    #[error("line {line}: digit {digit}: shape has no cells")]
    EmptyShape { digit: u8, line: usize },
    #[error("line {line}: digit {digit}: shape is not 4-connected")]
    Disconnected { digit: u8, line: usize },
    #[error("line {line}: digit 0 must be the 3x4 ring ###/#.#/#.#/###, found {found}")]
    WrongZero { line: usize, found: String },
    #[error("digit {inner} fits inside a hole of digit {outer}")]
    HoleFits { outer: u8, inner: u8 },
}

/// Shapes for digits 0..=9. Digits may be missing; instances check that
/// every digit they need is present.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapeCatalog {
    shapes: [Option<Shape>; 10],
    source: String,
}

const BUNDLED: &str = include_str!("../data/catalog.txt");

/// The ring every catalog must use for digit 0.
pub fn zero_ring() -> Shape {
    Shape::from_rows(&["###", "#.#", "#.#", "###"]).unwrap()
}

impl ShapeCatalog {
    /// The catalog shipped with the crate.
    pub fn bundled() -> ShapeCatalog {
        parse_catalog_with_source(BUNDLED, "bundled").expect("bundled catalog is valid")
    }

    pub fn bundled_text() -> &'static str {
        BUNDLED
    }

    pub fn shape(&self, digit: u8) -> Option<&Shape> {
        self.shapes.get(digit as usize).and_then(Option::as_ref)
    }

    pub fn digits(&self) -> impl Iterator<Item = u8> + '_ {
        (0u8..10).filter(|&d| self.shapes[d as usize].is_some())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    /// Serializes back into the catalog file format.
    pub fn to_text(&self) -> String {
        let blocks: Vec<String> = self
            .digits()
            .map(|d| {
                let shape = self.shape(d).unwrap();
                format!("digit {d}\n{}\n", shape.rows().join("\n"))
            })
            .collect();
        blocks.join("\n")
    }
}

pub fn parse_catalog(text: &str) -> Result<ShapeCatalog, CatalogError> {
    parse_catalog_with_source(text, "file")
}

struct Block {
    digit: u8,
    header_line: usize,
    rows: Vec<String>,
}

pub fn parse_catalog_with_source(text: &str, source: &str) -> Result<ShapeCatalog, CatalogError> {
    let mut shapes: [Option<Shape>; 10] = Default::default();
    let mut block: Option<Block> = None;

    let finish = |block: Block, shapes: &mut [Option<Shape>; 10]| -> Result<(), CatalogError> {
        let Block { digit, header_line, rows } = block;
        let refs: Vec<&str> = rows.iter().map(String::as_str).collect();
        let shape = Shape::from_rows(&refs).map_err(|e| match e {
            ShapeError::Empty => CatalogError::EmptyShape { digit, line: header_line },
            ShapeError::Disconnected => CatalogError::Disconnected { digit, line: header_line },
        })?;
        if digit == 0 && shape != zero_ring() {
            return Err(CatalogError::WrongZero { line: header_line, found: shape.to_string() });
        }
        shapes[digit as usize] = Some(shape);
        Ok(())
    };

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim_end();
        if line.is_empty() {
            if let Some(b) = block.take() {
                finish(b, &mut shapes)?;
            }
            continue;
        }
        if let Some(rest) = line.strip_prefix("digit") {
            if let Some(b) = block.take() {
                finish(b, &mut shapes)?;
            }
            let value = rest.trim();
            if value.is_empty() || !rest.starts_with(char::is_whitespace) {
                return Err(CatalogError::MalformedHeader { line: line_no, text: line.to_string() });
            }
            let digit = match value.parse::<u32>() {
                Ok(d) if d <= 9 => d as u8,
                _ => {
                    return Err(CatalogError::DigitOutOfRange {
                        line: line_no,
                        value: value.to_string(),
                    })
                }
            };
            if shapes[digit as usize].is_some() {
                return Err(CatalogError::DuplicateDigit { digit, line: line_no });
            }
            block = Some(Block { digit, header_line: line_no, rows: Vec::new() });
            continue;
        }
        let Some(b) = block.as_mut() else {
            return Err(CatalogError::MissingHeader { line: line_no });
        };
        if !line.chars().all(|ch| ch == '#' || ch == '.') {
            return Err(CatalogError::MalformedRow {
                digit: b.digit,
                line: line_no,
                text: line.to_string(),
            });
        }
        b.rows.push(line.to_string());
    }
    if let Some(b) = block.take() {
        finish(b, &mut shapes)?;
    }

    check_holes(&shapes)?;
    Ok(ShapeCatalog { shapes, source: source.to_string() })
}

/// Rejects catalogs where some shape, in any orientation, fits entirely
/// inside an enclosed hole of another (or the same) shape.
fn check_holes(shapes: &[Option<Shape>; 10]) -> Result<(), CatalogError> {
    for (outer, shape) in shapes.iter().enumerate() {
        let Some(shape) = shape else { continue };
        for hole in shape.holes() {
            let hole_set: BTreeSet<Cell> = hole.iter().copied().collect();
            for (inner, candidate) in shapes.iter().enumerate() {
                let Some(candidate) = candidate else { continue };
                if candidate.len() > hole.len() {
                    continue;
                }
                let fits = distinct_orientations(candidate).shapes().iter().any(|o| {
                    hole.iter().any(|&(r0, c0)| {
                        let (ar, ac) = o.cells()[0];
                        o.cells()
                            .iter()
                            .all(|&(r, c)| hole_set.contains(&(r0 + r - ar, c0 + c - ac)))
                    })
                });
                if fits {
                    return Err(CatalogError::HoleFits { outer: outer as u8, inner: inner as u8 });
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single() -> Shape {
        Shape::from_cells([(0, 0)]).unwrap()
    }

    #[test]
    fn rotating_ring_swaps_extents() {
        let rotated = rotate90(&zero_ring());
        assert_eq!(rotated.width(), 4);
        assert_eq!(rotated.height(), 3);
        assert_eq!(rotated.rows(), vec!["####", "#..#", "####"]);
    }

    #[test]
    fn single_cell_is_fixed() {
        assert_eq!(rotate90(&single()), single());
        assert_eq!(distinct_orientations(&single()).len(), 1);
    }

    #[test]
    fn orientation_counts() {
        assert_eq!(distinct_orientations(&zero_ring()).len(), 2);
        let l = Shape::from_cells([(0, 0), (1, 0), (1, 1)]).unwrap();
        let set = distinct_orientations(&l);
        assert_eq!(set.len(), 4);
        // rotations by hand: ##/#. then ##/.# then .#/## after the original #./##
        assert_eq!(set.shapes()[0].rows(), vec!["#.", "##"]);
        assert_eq!(set.shapes()[1].rows(), vec!["##", "#."]);
        assert_eq!(set.shapes()[2].rows(), vec!["##", ".#"]);
        assert_eq!(set.shapes()[3].rows(), vec![".#", "##"]);
    }

    #[test]
    fn ring_halo_excludes_hole() {
        let ring = zero_ring();
        let halo = exterior_halo(&ring);
        assert_eq!(halo.len(), 14);
        assert!(!halo.contains(&(1, 1)));
        assert!(!halo.contains(&(2, 1)));
        assert!(!halo.contains(&(-1, -1)), "corners are not orthogonal neighbours");
        assert_eq!(exterior_halo(&rotate90(&ring)).len(), 14);
    }

    #[test]
    fn single_cell_halo() {
        assert_eq!(exterior_halo(&single()), vec![(-1, 0), (0, -1), (0, 1), (1, 0)]);
    }

    #[test]
    fn rejects_bad_shapes() {
        assert_eq!(Shape::from_cells([]), Err(ShapeError::Empty));
        assert_eq!(Shape::from_rows(&["#.", ".#"]), Err(ShapeError::Disconnected));
    }

    #[test]
    fn bundled_catalog() {
        let cat = ShapeCatalog::bundled();
        assert_eq!(cat.digits().count(), 10);
        assert_eq!(cat.shape(0), Some(&zero_ring()));
        assert_eq!(cat.source(), "bundled");
        let areas: Vec<usize> = (0..10).map(|d| cat.shape(d).unwrap().len()).collect();
        assert_eq!(areas, vec![10, 5, 10, 9, 8, 10, 9, 6, 13, 9]);
        assert_eq!(parse_catalog(&cat.to_text()).unwrap().shapes, cat.shapes);
    }

    #[test]
    fn catalog_errors() {
        let diag = "digit 3\n#.\n.#\n";
        assert_eq!(parse_catalog(diag), Err(CatalogError::Disconnected { digit: 3, line: 1 }));

        let dup = "digit 1\n#\n\ndigit 1\n##\n";
        assert_eq!(parse_catalog(dup), Err(CatalogError::DuplicateDigit { digit: 1, line: 4 }));

        let range = "digit 12\n#\n";
        assert!(matches!(parse_catalog(range), Err(CatalogError::DigitOutOfRange { line: 1, .. })));

        let row = "digit 2\n#x#\n";
        assert!(matches!(
            parse_catalog(row),
            Err(CatalogError::MalformedRow { digit: 2, line: 2, .. })
        ));

        assert_eq!(parse_catalog("##\n"), Err(CatalogError::MissingHeader { line: 1 }));

        let zero = "digit 0\n##\n";
        assert!(matches!(parse_catalog(zero), Err(CatalogError::WrongZero { .. })));

        let empty = "digit 4\n...\n";
        assert_eq!(parse_catalog(empty), Err(CatalogError::EmptyShape { digit: 4, line: 1 }));
    }

    #[test]
    fn short_rows_are_padded() {
        let cat = parse_catalog("digit 7\n###  \n..#\n  \ndigit 1\n#\n").unwrap();
        assert_eq!(cat.shape(7).unwrap().rows(), vec!["###", "..#"]);
        assert_eq!(cat.shape(1).unwrap().len(), 1);
        assert!(cat.shape(0).is_none());
    }

    #[test]
    fn hole_check_catches_fitting_part() {
        // a 3x3 hole swallows the single cell of digit 1
        let text = "digit 5\n#####\n#...#\n#...#\n#...#\n#####\n\ndigit 1\n#\n";
        assert_eq!(parse_catalog(text), Err(CatalogError::HoleFits { outer: 5, inner: 1 }));
    }

    #[test]
    fn ring_hole() {
        assert_eq!(zero_ring().holes(), vec![vec![(1, 1), (2, 1)]]);
    }
}
