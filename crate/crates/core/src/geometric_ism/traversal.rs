//! Supercover grid traversal.
//!
//! Rays are walked in continuous cell units. Every cell whose closed square
//! the ray touches is visited, including both side cells when the ray passes
//! exactly through a grid corner, so a one-cell obstacle can never be
//! stepped over diagonally.

/// Boundary crossing time along one axis, `inf` if the ray is parallel to it.
#[inline]
fn crossing(boundary: i64, origin: f64, dir: f64) -> f64 {
    if dir == 0.0 {
        f64::INFINITY
    } else {
        (boundary as f64 - origin) / dir
    }
}

/// Walks the ray `origin + t·dir` (cell units, `t ≥ 0`) through a
/// `width × height` grid.
///
/// For each cell, in order of entry, `blocked(ix, iy)` is asked first; a
/// blocked cell ends the walk without being marked. Otherwise `mark(ix, iy)`
/// is called. Cells entered after `max_t` are not visited. At a corner
/// crossing both side cells are checked before either is marked, and a
/// blocked side cell ends the walk.
///
/// `origin` must lie inside the grid.
pub fn supercover<B, M>(origin: [f64; 2], dir: [f64; 2], width: usize, height: usize, max_t: f64, blocked: B, mut mark: M)
where
    B: Fn(usize, usize) -> bool,
    M: FnMut(usize, usize),
{
    let (w, h) = (width as i64, height as i64);
    let mut ix = origin[0].floor() as i64;
    let mut iy = origin[1].floor() as i64;
    debug_assert!((0..w).contains(&ix) && (0..h).contains(&iy), "ray origin outside the grid");
    let sx: i64 = if dir[0] > 0.0 { 1 } else if dir[0] < 0.0 { -1 } else { 0 };
    let sy: i64 = if dir[1] > 0.0 { 1 } else if dir[1] < 0.0 { -1 } else { 0 };
    let mut bx = if sx > 0 { ix + 1 } else { ix };
    let mut by = if sy > 0 { iy + 1 } else { iy };
    let inside = |x: i64, y: i64| (0..w).contains(&x) && (0..h).contains(&y);

    loop {
        if blocked(ix as usize, iy as usize) {
            return;
        }
        mark(ix as usize, iy as usize);

        let tx = crossing(bx, origin[0], dir[0]);
        let ty = crossing(by, origin[1], dir[1]);
        let t = tx.min(ty);
        if !(t <= max_t) {
            return;
        }
        if tx < ty {
            ix += sx;
            bx += sx;
        } else if ty < tx {
            iy += sy;
            by += sy;
        } else {
            let side_x = inside(ix + sx, iy).then_some((ix + sx, iy));
            let side_y = inside(ix, iy + sy).then_some((ix, iy + sy));
            let sides = [side_x, side_y];
            if sides.iter().flatten().any(|&(x, y)| blocked(x as usize, y as usize)) {
                return;
            }
            for &(x, y) in sides.iter().flatten() {
                mark(x as usize, y as usize);
            }
            ix += sx;
            iy += sy;
            bx += sx;
            by += sy;
        }
        if !inside(ix, iy) {
            return;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cells(origin: [f64; 2], dir: [f64; 2], max_t: f64, blocked: &[(usize, usize)]) -> Vec<(usize, usize)> {
        let mut out = vec![];
        supercover(origin, dir, 8, 8, max_t, |x, y| blocked.contains(&(x, y)), |x, y| out.push((x, y)));
        out
    }

    #[test]
    fn axis_ray_walks_one_row() {
        assert_eq!(cells([0.5, 2.5], [1.0, 0.0], 100.0, &[]), (0..8).map(|x| (x, 2)).collect::<Vec<_>>());
        assert_eq!(cells([7.5, 2.5], [-1.0, 0.0], 2.4, &[]), vec![(7, 2), (6, 2), (5, 2)]);
    }

    #[test]
    fn blocked_cell_ends_the_ray_unmarked() {
        assert_eq!(cells([0.5, 0.5], [1.0, 0.0], 100.0, &[(3, 0)]), vec![(0, 0), (1, 0), (2, 0)]);
        assert!(cells([0.5, 0.5], [1.0, 0.0], 100.0, &[(0, 0)]).is_empty());
    }

    #[test]
    fn corner_crossing_marks_both_sides() {
        let got = cells([0.5, 0.5], [1.0, 1.0], 1.6, &[]);
        assert_eq!(got, vec![(0, 0), (1, 0), (0, 1), (1, 1), (2, 1), (1, 2), (2, 2)]);
    }

    #[test]
    fn diagonal_cannot_slip_between_blocked_corners() {
        assert_eq!(cells([0.5, 0.5], [1.0, 1.0], 100.0, &[(1, 0)]), vec![(0, 0)]);
        assert_eq!(cells([0.5, 0.5], [1.0, 1.0], 100.0, &[(0, 1)]), vec![(0, 0)]);
    }

    #[test]
    fn shallow_ray_enters_by_the_earlier_boundary() {
        // Crosses x = 1 at t = 0.5, x = 2 at t = 1.5 and y = 1 only at t = 2.
        let got = cells([0.5, 0.8], [1.0, 0.1], 1.9, &[]);
        assert_eq!(got, vec![(0, 0), (1, 0), (2, 0)]);
    }
}
