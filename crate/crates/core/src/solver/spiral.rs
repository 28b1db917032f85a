/// Grid cells spiralling clockwise out from `(s/2, s/2)`: runs of
/// 1, 1, 2, 2, 3, 3, ... cells going right, down, left, up, skipping cells
/// outside the grid.
pub fn spiral_order(grid: usize) -> Vec<(usize, usize)> {
    let total = grid * grid;
    let mut out = Vec::with_capacity(total);
    if grid == 0 {
        return out;
    }
    let (mut r, mut c) = ((grid / 2) as i64, (grid / 2) as i64);
    out.push((r as usize, c as usize));
    let directions = [(0i64, 1i64), (1, 0), (0, -1), (-1, 0)];
    let mut run = 1;
    let mut dir = 0;
    while out.len() < total {
        for _ in 0..2 {
            let (dr, dc) = directions[dir % 4];
            for _ in 0..run {
                r += dr;
                c += dc;
                if r >= 0 && c >= 0 && (r as usize) < grid && (c as usize) < grid {
                    out.push((r as usize, c as usize));
                }
            }
            dir += 1;
        }
        run += 1;
    }
    out
}

/// Position of every cell in the spiral, indexed `row * s + col`.
pub fn spiral_rank(grid: usize) -> Vec<usize> {
    let mut rank = vec![0; grid * grid];
    for (i, (r, c)) in spiral_order(grid).into_iter().enumerate() {
        rank[r * grid + c] = i;
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn small_grids() {
        assert_eq!(spiral_order(1), vec![(0, 0)]);
        // start (1,1); right and down leave the grid; left reaches (1,0);
        // up gives (0,0); right gives (0,1)
        assert_eq!(spiral_order(2), vec![(1, 1), (1, 0), (0, 0), (0, 1)]);
        assert_eq!(
            spiral_order(3),
            vec![(1, 1), (1, 2), (2, 2), (2, 1), (2, 0), (1, 0), (0, 0), (0, 1), (0, 2)]
        );
    }

    #[test]
    fn permutation_starting_at_centre() {
        for s in 1..=21 {
            let order = spiral_order(s);
            assert_eq!(order.len(), s * s);
            assert_eq!(order[0], (s / 2, s / 2));
            let set: BTreeSet<_> = order.iter().collect();
            assert_eq!(set.len(), s * s);
        }
    }
}
