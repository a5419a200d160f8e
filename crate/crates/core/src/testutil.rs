//! Seeded generators shared by the unit, property, and acceptance tests.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::shapes::{SkewShape, SkewTuple};

/// A random nonempty skew shape with at most `max` rows/columns.
pub fn random_shape(rng: &mut ChaCha8Rng, max: i32) -> SkewShape {
    loop {
        let rows = rng.gen_range(1..=max.min(3));
        let mut outer: Vec<i32> = (0..rows).map(|_| rng.gen_range(1..=max)).collect();
        outer.sort_unstable_by(|a, b| b.cmp(a));
        let mut inner: Vec<i32> = outer.iter().map(|&o| rng.gen_range(0..=o)).collect();
        inner.sort_unstable_by(|a, b| b.cmp(a));
        if let Ok(s) = SkewShape::new(outer, inner) {
            if !s.is_empty() {
                return s;
            }
        }
    }
}

/// A random tuple with at most `max_total` boxes (at least one).
pub fn random_tuple(rng: &mut ChaCha8Rng, max_total: usize) -> SkewTuple {
    loop {
        let k = rng.gen_range(1..=3usize);
        let shapes: Vec<SkewShape> = (0..k).map(|_| random_shape(rng, 3)).collect();
        let t = SkewTuple::new(shapes);
        if t.n_boxes() >= 1 && t.n_boxes() <= max_total {
            return t;
        }
    }
}

/// Every "basic" skew shape with `size` boxes: translation-normalized so
/// that some row starts in column 1 and the bottom and top rows are
/// nonempty.  Used to sweep small tuples exhaustively.
pub fn basic_shapes(size: usize) -> Vec<SkewShape> {
    let mut out = Vec::new();
    let n = size as i32;
    // outer profiles fit in an n x n box
    let mut outer = Vec::new();
    gen_profiles(n, n, &mut outer, &mut |outer: &[i32]| {
        let mut inner = Vec::new();
        gen_inner(outer, 0, &mut inner, &mut |inner: &[i32]| {
            if let Ok(s) = SkewShape::new(outer.to_vec(), inner.to_vec()) {
                if s.n_boxes() == size && is_basic(&s) && !out.contains(&s) {
                    out.push(s);
                }
            }
        });
    });
    out
}

fn is_basic(s: &SkewShape) -> bool {
    if s.is_empty() {
        return false;
    }
    let rows = s.outer().len();
    // bottom and top rows nonempty (canonical form already trims the top)
    if s.outer()[0] == s.inner()[0] || s.outer()[rows - 1] == s.inner()[rows - 1] {
        return false;
    }
    // column 1 occupied somewhere
    s.inner().iter().any(|&i| i == 0)
}

fn gen_profiles(rows_left: i32, max: i32, prefix: &mut Vec<i32>, f: &mut impl FnMut(&[i32])) {
    if !prefix.is_empty() {
        f(prefix);
    }
    if rows_left == 0 {
        return;
    }
    let hi = prefix.last().copied().unwrap_or(max);
    for v in 1..=hi {
        prefix.push(v);
        gen_profiles(rows_left - 1, max, prefix, f);
        prefix.pop();
    }
}

fn gen_inner(outer: &[i32], row: usize, prefix: &mut Vec<i32>, f: &mut impl FnMut(&[i32])) {
    if row == outer.len() {
        f(prefix);
        return;
    }
    let hi = if row == 0 {
        outer[0]
    } else {
        prefix[row - 1].min(outer[row])
    };
    for v in (0..=hi).rev() {
        prefix.push(v);
        gen_inner(outer, row + 1, prefix, f);
        prefix.pop();
    }
}
