//! Node placement, grid-based head election and nearest-head assignment.

use rand::Rng;

/// A point in the unit square.
pub type Position = (f64, f64);

pub const CENTER: Position = (0.5, 0.5);

pub fn distance(a: Position, b: Position) -> f64 {
    ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
}

/// Uniform positions in the unit square.
pub fn place_nodes<R: Rng + ?Sized>(count: usize, rng: &mut R) -> Vec<Position> {
    (0..count).map(|_| (rng.gen::<f64>(), rng.gen::<f64>())).collect()
}

/// One rectangle of the partition: `[x0, x1) × [y0, y1)`, closed on the
/// square's outer edges.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
}

impl Cell {
    pub fn center(&self) -> Position {
        ((self.x0 + self.x1) / 2.0, (self.y0 + self.y1) / 2.0)
    }

    pub fn diagonal(&self) -> f64 {
        ((self.x1 - self.x0).powi(2) + (self.y1 - self.y0).powi(2)).sqrt()
    }

    pub fn contains(&self, (x, y): Position) -> bool {
        let in_x = self.x0 <= x && (x < self.x1 || (self.x1 >= 1.0 && x <= 1.0));
        let in_y = self.y0 <= y && (y < self.y1 || (self.y1 >= 1.0 && y <= 1.0));
        in_x && in_y
    }
}

/// Nearest-square grid with exactly `n` cells: `floor(sqrt n)` rows, the
/// cells spread as evenly as possible over them, earlier rows taking the
/// remainder.
pub fn grid(n: usize) -> Vec<Cell> {
    assert!(n > 0, "grid needs at least one cell");
    let rows = (n as f64).sqrt().floor() as usize;
    let mut cells = Vec::with_capacity(n);
    for r in 0..rows {
        let cols = n / rows + usize::from(r < n % rows);
        let (y0, y1) = (r as f64 / rows as f64, (r + 1) as f64 / rows as f64);
        for c in 0..cols {
            cells.push(Cell { x0: c as f64 / cols as f64, x1: (c + 1) as f64 / cols as f64, y0, y1 });
        }
    }
    cells
}

/// Largest cell diagonal of the `n`-cell grid.
pub fn max_cell_diagonal(n: usize) -> f64 {
    grid(n).iter().map(Cell::diagonal).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Election {
    /// Indices into the candidate slice, one per cell.
    pub heads: Vec<usize>,
    pub cells: Vec<Cell>,
    /// Cell counts that were tried and abandoned because a cell was empty.
    pub repartitions: Vec<usize>,
}

/// In every cell the candidate closest to the cell center becomes head. An
/// empty cell triggers a repartition with one cell fewer.
pub fn elect(candidates: &[Position], n: usize) -> Option<Election> {
    let mut repartitions = Vec::new();
    for cells_wanted in (1..=n).rev() {
        let cells = grid(cells_wanted);
        let heads: Option<Vec<usize>> = cells
            .iter()
            .map(|cell| {
                let c = cell.center();
                candidates
                    .iter()
                    .enumerate()
                    .filter(|(_, &pos)| cell.contains(pos))
                    .min_by(|(i, a), (j, b)| distance(**a, c).total_cmp(&distance(**b, c)).then(i.cmp(j)))
                    .map(|(i, _)| i)
            })
            .collect();
        match heads {
            Some(heads) => return Some(Election { heads, cells, repartitions }),
            None => repartitions.push(cells_wanted),
        }
    }
    None
}

/// Index (into `heads`) of the nearest head, ties to the lower index.
pub fn nearest(pos: Position, heads: &[Position]) -> usize {
    heads
        .iter()
        .enumerate()
        .min_by(|(i, a), (j, b)| distance(pos, **a).total_cmp(&distance(pos, **b)).then(i.cmp(j)))
        .map(|(i, _)| i)
        .expect("at least one head")
}

/// Nearest-head index for every position.
pub fn assign(positions: &[Position], heads: &[Position]) -> Vec<usize> {
    positions.iter().map(|&p| nearest(p, heads)).collect()
}

/// Fraction of positions within `range` of their assigned head.
pub fn connectivity(positions: &[Position], heads: &[Position], range: f64) -> f64 {
    if positions.is_empty() {
        return 1.0;
    }
    let ok = positions.iter().filter(|&&p| distance(p, heads[nearest(p, heads)]) <= range).count();
    ok as f64 / positions.len() as f64
}
