//! Grid traversal of the cells touched by a segment (Amanatides–Woo).

use super::{Environment, State};

/// Crossings this close in parameter space are treated as passing through a
/// cell corner; both side cells are then tested.
const CORNER_EPS: f64 = 1e-12;

pub(super) fn segment_free(env: &Environment, a: &State, b: &State) -> bool {
    // canonical order makes the test exactly symmetric
    let (a, b) = if (a.x(), a.y()) <= (b.x(), b.y()) { (a, b) } else { (b, a) };
    let (Some((mut col, mut row)), Some((end_col, end_row))) = (env.cell_of(a), env.cell_of(b)) else {
        return false;
    };
    // the grid rectangle is convex, so both endpoints inside ⇒ whole segment inside
    if env.is_cell_blocked(col, row) || env.is_cell_blocked(end_col, end_row) {
        return false;
    }
    // every cell the walk can visit lies within this Chebyshev radius
    let span = end_col.abs_diff(col).max(end_row.abs_diff(row));
    if env.clearance(col, row) as usize > span {
        return true;
    }
    let (u0, v0) = env.grid_coords(a);
    let (u1, v1) = env.grid_coords(b);
    let du = u1 - u0;
    let dv = v1 - v0;

    let step_c: isize = if du > 0.0 { 1 } else if du < 0.0 { -1 } else { 0 };
    let step_r: isize = if dv > 0.0 { 1 } else if dv < 0.0 { -1 } else { 0 };
    let t_delta_u = if du != 0.0 { 1.0 / du.abs() } else { f64::INFINITY };
    let t_delta_v = if dv != 0.0 { 1.0 / dv.abs() } else { f64::INFINITY };
    let mut t_max_u = match step_c {
        1 => (col as f64 + 1.0 - u0) / du,
        -1 => (u0 - col as f64) / -du,
        _ => f64::INFINITY,
    };
    let mut t_max_v = match step_r {
        1 => (row as f64 + 1.0 - v0) / dv,
        -1 => (v0 - row as f64) / -dv,
        _ => f64::INFINITY,
    };

    let mut remaining = end_col.abs_diff(col) + end_row.abs_diff(row);
    let cols = env.cols() as isize;
    let rows = env.rows() as isize;
    let blocked_at = |c: isize, r: isize| -> bool {
        if c < 0 || r < 0 || c >= cols || r >= rows {
            return true;
        }
        env.is_cell_blocked(c as usize, r as usize)
    };

    while remaining > 0 {
        let c = col as isize;
        let r = row as isize;
        if (t_max_u - t_max_v).abs() <= CORNER_EPS && step_c != 0 && step_r != 0 {
            if blocked_at(c + step_c, r) || blocked_at(c, r + step_r) {
                return false;
            }
            col = (c + step_c) as usize;
            row = (r + step_r) as usize;
            t_max_u += t_delta_u;
            t_max_v += t_delta_v;
            remaining = remaining.saturating_sub(2);
        } else if t_max_u < t_max_v {
            col = (c + step_c) as usize;
            t_max_u += t_delta_u;
            remaining -= 1;
        } else {
            row = (r + step_r) as usize;
            t_max_v += t_delta_v;
            remaining -= 1;
        }
        if blocked_at(col as isize, row as isize) {
            return false;
        }
    }
    true
}
