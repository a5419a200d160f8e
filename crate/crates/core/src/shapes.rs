//! Skew-shape tuples in French convention: box (i, j) sits in column i, row
//! j, rows growing upward, content c = i - j.  Provides the reading order,
//! attacking pairs, diagonal statistics, m-stretching with per-shape offsets,
//! and the south-step vectors b(m,n).

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::Result;

/// A skew shape outer/inner.  Row j (1-based, bottom row first) holds columns
/// inner[j-1]+1 ..= outer[j-1].  Both profiles are weakly decreasing in j and
/// the representation is canonical: top empty rows are trimmed and interior
/// or bottom empty rows carry the profile value of the row above.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SkewShapeJson", into = "SkewShapeJson")]
pub struct SkewShape {
    outer: Vec<i32>,
    inner: Vec<i32>,
}

#[derive(Serialize, Deserialize)]
struct SkewShapeJson {
    outer: Vec<i32>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    inner: Vec<i32>,
}

impl TryFrom<SkewShapeJson> for SkewShape {
    type Error = Error;
    fn try_from(j: SkewShapeJson) -> Result<SkewShape> {
        SkewShape::new(j.outer, j.inner)
    }
}

impl From<SkewShape> for SkewShapeJson {
    fn from(s: SkewShape) -> SkewShapeJson {
        SkewShapeJson {
            outer: s.outer,
            inner: s.inner,
        }
    }
}

impl SkewShape {
    /// Build lambda/mu.  `inner` may be shorter than `outer`; it is padded
    /// with zeros.
    pub fn new(outer: Vec<i32>, mut inner: Vec<i32>) -> Result<SkewShape> {
        if inner.len() > outer.len() {
            // allowed only if the extra inner rows are zero
            if inner[outer.len()..].iter().any(|&x| x != 0) {
                return Err(Error::InvalidInput("inner longer than outer".into()));
            }
            inner.truncate(outer.len());
        }
        inner.resize(outer.len(), 0);
        for w in outer.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidInput(format!(
                    "outer profile not weakly decreasing: {:?}",
                    outer
                )));
            }
        }
        for w in inner.windows(2) {
            if w[0] < w[1] {
                return Err(Error::InvalidInput(format!(
                    "inner profile not weakly decreasing: {:?}",
                    inner
                )));
            }
        }
        for (o, i) in outer.iter().zip(&inner) {
            if i > o || *i < 0 {
                return Err(Error::InvalidInput(
                    "inner not contained in outer".into(),
                ));
            }
        }
        let mut s = SkewShape { outer, inner };
        s.canonicalize();
        Ok(s)
    }

    pub fn straight(outer: Vec<i32>) -> Result<SkewShape> {
        SkewShape::new(outer, Vec::new())
    }

    pub fn empty() -> SkewShape {
        SkewShape {
            outer: Vec::new(),
            inner: Vec::new(),
        }
    }

    fn canonicalize(&mut self) {
        // trim empty top rows
        while !self.outer.is_empty()
            && self.outer.last() == self.inner.last()
        {
            self.outer.pop();
            self.inner.pop();
        }
        // interior/bottom empty rows take the profile of the row above
        for j in (0..self.outer.len().saturating_sub(1)).rev() {
            if self.outer[j] == self.inner[j] {
                self.outer[j] = self.outer[j + 1];
                self.inner[j] = self.outer[j + 1];
            }
        }
    }

    /// Reconstruct a shape from explicit boxes at fixed coordinates (no
    /// translation applied).
    pub fn from_boxes(boxes: &BTreeSet<(i32, i32)>) -> Result<SkewShape> {
        if boxes.is_empty() {
            return Ok(SkewShape::empty());
        }
        if boxes.iter().any(|&(i, j)| i < 1 || j < 1) {
            return Err(Error::InvalidInput(
                "box coordinates must be positive".into(),
            ));
        }
        let max_row = boxes.iter().map(|b| b.1).max().unwrap() as usize;
        let mut outer = vec![0i32; max_row];
        let mut inner = vec![0i32; max_row];
        let mut row_cols: Vec<Vec<i32>> = vec![Vec::new(); max_row];
        for &(i, j) in boxes {
            row_cols[(j - 1) as usize].push(i);
        }
        let mut prev_outer: Option<i32> = None;
        for j in (0..max_row).rev() {
            let cols = &mut row_cols[j];
            if cols.is_empty() {
                let v = prev_outer.unwrap_or(0);
                outer[j] = v;
                inner[j] = v;
            } else {
                cols.sort_unstable();
                let (lo, hi) = (cols[0], *cols.last().unwrap());
                if (hi - lo + 1) as usize != cols.len() {
                    return Err(Error::InvalidInput(format!(
                        "row {} is not contiguous",
                        j + 1
                    )));
                }
                outer[j] = hi;
                inner[j] = lo - 1;
            }
            prev_outer = Some(outer[j]);
        }
        let shape = SkewShape::new(outer, inner)?;
        if shape.n_boxes() != boxes.len() {
            return Err(Error::InvalidInput(
                "box set is not a skew shape".into(),
            ));
        }
        Ok(shape)
    }

    pub fn outer(&self) -> &[i32] {
        &self.outer
    }

    pub fn inner(&self) -> &[i32] {
        &self.inner
    }

    pub fn is_empty(&self) -> bool {
        self.n_boxes() == 0
    }

    pub fn n_boxes(&self) -> usize {
        self.outer
            .iter()
            .zip(&self.inner)
            .map(|(o, i)| (o - i) as usize)
            .sum()
    }

    pub fn contains(&self, col: i32, row: i32) -> bool {
        if row < 1 || row as usize > self.outer.len() {
            return false;
        }
        let j = (row - 1) as usize;
        self.inner[j] < col && col <= self.outer[j]
    }

    /// Boxes as (col, row), sorted.
    pub fn boxes(&self) -> Vec<(i32, i32)> {
        let mut out = Vec::with_capacity(self.n_boxes());
        for (j, (o, i)) in self.outer.iter().zip(&self.inner).enumerate() {
            for col in (i + 1)..=*o {
                out.push((col, j as i32 + 1));
            }
        }
        out.sort_unstable();
        out
    }

    /// Edge-connected components of the box set.
    pub fn connected_components(&self) -> Vec<Vec<(i32, i32)>> {
        let boxes: BTreeSet<(i32, i32)> = self.boxes().into_iter().collect();
        let mut seen: BTreeSet<(i32, i32)> = BTreeSet::new();
        let mut comps = Vec::new();
        for &b in &boxes {
            if seen.contains(&b) {
                continue;
            }
            let mut comp = Vec::new();
            let mut stack = vec![b];
            seen.insert(b);
            while let Some((i, j)) = stack.pop() {
                comp.push((i, j));
                for nb in [(i - 1, j), (i + 1, j), (i, j - 1), (i, j + 1)] {
                    if boxes.contains(&nb) && seen.insert(nb) {
                        stack.push(nb);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    /// m-stretch with content offset `o`: each box of content c becomes m
    /// boxes of contents o+mc, ..., o+mc-m+1 in the same column.  The result
    /// is translated diagonally (content-preserving) so rows are positive.
    pub fn stretch(&self, m: i64, o: i64) -> Result<SkewShape> {
        if m < 1 {
            return Err(Error::InvalidInput("stretch factor must be positive".into()));
        }
        let mut boxes: BTreeSet<(i64, i64)> = BTreeSet::new();
        for (col, row) in self.boxes() {
            let c = (col - row) as i64;
            for k in 0..m {
                let c_new = o + m * c - k;
                boxes.insert((col as i64, col as i64 - c_new));
            }
        }
        if boxes.is_empty() {
            return Ok(SkewShape::empty());
        }
        let min_row = boxes.iter().map(|b| b.1).min().unwrap();
        let shift = if min_row < 1 { 1 - min_row } else { 0 };
        let shifted: BTreeSet<(i32, i32)> = boxes
            .iter()
            .map(|&(i, j)| ((i + shift) as i32, (j + shift) as i32))
            .collect();
        SkewShape::from_boxes(&shifted)
    }
}

/// A box in a tuple of skew shapes; `shape` is 1-based.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct BoxRef {
    pub shape: usize,
    pub col: i32,
    pub row: i32,
}

impl BoxRef {
    pub fn content(&self) -> i64 {
        self.col as i64 - self.row as i64
    }

    /// Adjusted-content key: lexicographic on (content, shape index) encodes
    /// c + shape * epsilon exactly.
    pub fn adjusted(&self) -> (i64, usize) {
        (self.content(), self.shape)
    }
}

/// Statistics of a tuple: diagonal lengths, n'(gamma), the magic number, and
/// the attacking-pair count.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TupleStats {
    pub gamma: Vec<i64>,
    pub n_prime: i64,
    pub magic_p: i64,
    pub attack_a: i64,
}

/// An m-stretching prescription: factor m and per-shape content offsets.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StretchSpec {
    pub m: i64,
    pub offsets: Vec<i64>,
}

impl StretchSpec {
    pub fn new(m: i64, offsets: Vec<i64>) -> Result<StretchSpec> {
        let s = StretchSpec { m, offsets };
        s.validate()?;
        Ok(s)
    }

    pub fn constant(m: i64, k: usize) -> StretchSpec {
        StretchSpec {
            m,
            offsets: vec![0; k],
        }
    }

    /// Offsets must satisfy o_1 <= ... <= o_k < m + o_1.
    pub fn validate(&self) -> Result<()> {
        if self.m < 1 {
            return Err(Error::InvalidInput("stretch factor must be positive".into()));
        }
        for w in self.offsets.windows(2) {
            if w[0] > w[1] {
                return Err(Error::InvalidInput(format!(
                    "offsets not weakly increasing: {:?}",
                    self.offsets
                )));
            }
        }
        if let (Some(first), Some(last)) = (self.offsets.first(), self.offsets.last()) {
            if *last >= self.m + *first {
                return Err(Error::InvalidInput(format!(
                    "offset chain violates o_k < m + o_1: {:?} with m = {}",
                    self.offsets, self.m
                )));
            }
        }
        Ok(())
    }
}

/// An ordered tuple of skew shapes with its boxes in reading order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SkewTupleJson", into = "SkewTupleJson")]
pub struct SkewTuple {
    shapes: Vec<SkewShape>,
    boxes: Vec<BoxRef>,
}

#[derive(Serialize, Deserialize)]
struct SkewTupleJson {
    shapes: Vec<SkewShape>,
}

impl TryFrom<SkewTupleJson> for SkewTuple {
    type Error = Error;
    fn try_from(j: SkewTupleJson) -> Result<SkewTuple> {
        Ok(SkewTuple::new(j.shapes))
    }
}

impl From<SkewTuple> for SkewTupleJson {
    fn from(t: SkewTuple) -> SkewTupleJson {
        SkewTupleJson {
            shapes: t.shapes.clone(),
        }
    }
}

impl SkewTuple {
    pub fn new(shapes: Vec<SkewShape>) -> SkewTuple {
        let mut boxes: Vec<BoxRef> = Vec::new();
        for (s, shape) in shapes.iter().enumerate() {
            for (col, row) in shape.boxes() {
                boxes.push(BoxRef {
                    shape: s + 1,
                    col,
                    row,
                });
            }
        }
        // reading order: adjusted content, then southwest to northeast
        boxes.sort_by_key(|b| (b.adjusted(), b.col));
        SkewTuple { shapes, boxes }
    }

    pub fn from_json(s: &str) -> Result<SkewTuple> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn shapes(&self) -> &[SkewShape] {
        &self.shapes
    }

    pub fn n_shapes(&self) -> usize {
        self.shapes.len()
    }

    pub fn n_boxes(&self) -> usize {
        self.boxes.len()
    }

    /// Boxes in reading order.  Reading positions are 1-based; position p
    /// corresponds to `reading_order()[p-1]`.
    pub fn reading_order(&self) -> &[BoxRef] {
        &self.boxes
    }

    pub fn box_at(&self, pos: usize) -> &BoxRef {
        &self.boxes[pos - 1]
    }

    fn shape_of(&self, b: &BoxRef) -> &SkewShape {
        &self.shapes[b.shape - 1]
    }

    /// West neighbour missing: the box starts its row.
    pub fn is_row_start(&self, b: &BoxRef) -> bool {
        !self.shape_of(b).contains(b.col - 1, b.row)
    }

    /// East neighbour missing: the box ends its row.
    pub fn is_row_end(&self, b: &BoxRef) -> bool {
        !self.shape_of(b).contains(b.col + 1, b.row)
    }

    /// Attacking pairs (a, b) of 1-based reading positions: a < b and
    /// 0 < adjusted(b) - adjusted(a) < 1.
    pub fn attacking_pairs(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for a in 0..self.boxes.len() {
            for b in (a + 1)..self.boxes.len() {
                if self.attacks(a, b) {
                    out.push((a + 1, b + 1));
                }
            }
        }
        out
    }

    fn attacks(&self, a: usize, b: usize) -> bool {
        let (ba, bb) = (&self.boxes[a], &self.boxes[b]);
        let (ca, cb) = (ba.content(), bb.content());
        (ca == cb && ba.shape < bb.shape) || (cb == ca + 1 && ba.shape > bb.shape)
    }

    /// Diagonals as runs of reading positions (1-based), in reading order.
    pub fn diagonals(&self) -> Vec<Vec<usize>> {
        let mut out: Vec<Vec<usize>> = Vec::new();
        for (idx, b) in self.boxes.iter().enumerate() {
            let key = b.adjusted();
            match out.last() {
                Some(run) if self.boxes[run[0] - 1].adjusted() == key => {
                    out.last_mut().unwrap().push(idx + 1)
                }
                _ => out.push(vec![idx + 1]),
            }
        }
        out
    }

    /// Diagonal lengths gamma, n'(gamma), the magic number p, and the number
    /// of attacking pairs A.
    pub fn stats(&self) -> TupleStats {
        let diags = self.diagonals();
        let gamma: Vec<i64> = diags.iter().map(|d| d.len() as i64).collect();
        let n_prime = gamma.iter().map(|&g| g * (g - 1) / 2).sum();
        let mut magic_p = 0i64;
        for d in &diags {
            let has_start = d.iter().any(|&p| self.is_row_start(self.box_at(p)));
            if !has_start {
                magic_p += d.len() as i64;
            }
        }
        TupleStats {
            gamma,
            n_prime,
            magic_p,
            attack_a: self.attacking_pairs().len() as i64,
        }
    }

    /// Weak-southwest order within a shape; boxes of different shapes are
    /// incomparable.
    pub fn precedes(a: &BoxRef, b: &BoxRef) -> bool {
        a.shape == b.shape && a.col <= b.col && a.row <= b.row
    }

    /// Is the set of reading positions a lower order ideal for `precedes`?
    pub fn is_lower_ideal(&self, positions: &BTreeSet<usize>) -> bool {
        for &p in positions {
            let b = self.box_at(p);
            for (q, a) in self.boxes.iter().enumerate() {
                if Self::precedes(a, b) && !positions.contains(&(q + 1)) {
                    return false;
                }
            }
        }
        true
    }

    /// All lower order ideals, as sorted position sets.  Guarded by a length
    /// cap since the scan is over all subsets.
    pub fn lower_ideals(&self) -> Result<Vec<BTreeSet<usize>>> {
        let l = self.n_boxes();
        if l > 20 {
            return Err(Error::ResourceCap(format!(
                "lower-ideal scan needs 2^{} subsets (cap is 2^20)",
                l
            )));
        }
        let mut out = Vec::new();
        for mask in 0u32..(1u32 << l) {
            let set: BTreeSet<usize> =
                (0..l).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).collect();
            if self.is_lower_ideal(&set) {
                out.push(set);
            }
        }
        Ok(out)
    }

    /// Restrict to a set of reading positions, shape by shape.  The result
    /// keeps all components (some possibly empty) so shape indices and
    /// offsets stay aligned.
    pub fn sub_tuple(&self, positions: &BTreeSet<usize>) -> Result<SkewTuple> {
        let mut per_shape: Vec<BTreeSet<(i32, i32)>> =
            vec![BTreeSet::new(); self.shapes.len()];
        for &p in positions {
            if p < 1 || p > self.boxes.len() {
                return Err(Error::InvalidInput(format!(
                    "reading position {} out of range",
                    p
                )));
            }
            let b = self.box_at(p);
            per_shape[b.shape - 1].insert((b.col, b.row));
        }
        let shapes = per_shape
            .iter()
            .map(SkewShape::from_boxes)
            .collect::<Result<Vec<_>>>()?;
        Ok(SkewTuple::new(shapes))
    }

    /// m-stretch each shape with its offset.  Also returns the stretch map:
    /// entry p-1 lists the 1-based reading positions in the stretched tuple
    /// of the m boxes produced by reading position p.
    pub fn stretch(&self, spec: &StretchSpec) -> Result<(SkewTuple, Vec<Vec<usize>>)> {
        spec.validate()?;
        if spec.offsets.len() != self.shapes.len() {
            return Err(Error::InvalidInput(format!(
                "{} offsets for {} shapes",
                spec.offsets.len(),
                self.shapes.len()
            )));
        }
        // Build each stretched shape while remembering which source box every
        // new box came from; the diagonal translation is applied to both.
        let mut stretched: Vec<SkewShape> = Vec::with_capacity(self.shapes.len());
        let mut provenance: Vec<BTreeMap<(i32, i32), (i32, i32)>> = Vec::new();
        for (shape, &o) in self.shapes.iter().zip(&spec.offsets) {
            let mut raw: BTreeMap<(i64, i64), (i32, i32)> = BTreeMap::new();
            for (col, row) in shape.boxes() {
                let c = (col - row) as i64;
                for k in 0..spec.m {
                    let c_new = o + spec.m * c - k;
                    raw.insert((col as i64, col as i64 - c_new), (col, row));
                }
            }
            let shift = raw
                .keys()
                .map(|b| b.1)
                .min()
                .map(|mn| if mn < 1 { 1 - mn } else { 0 })
                .unwrap_or(0);
            let mut shifted_boxes: BTreeSet<(i32, i32)> = BTreeSet::new();
            let mut prov: BTreeMap<(i32, i32), (i32, i32)> = BTreeMap::new();
            for (&(i, j), &src) in &raw {
                let key = ((i + shift) as i32, (j + shift) as i32);
                shifted_boxes.insert(key);
                prov.insert(key, src);
            }
            stretched.push(SkewShape::from_boxes(&shifted_boxes)?);
            provenance.push(prov);
        }
        let out = SkewTuple::new(stretched);

        let orig_pos: BTreeMap<(usize, i32, i32), usize> = self
            .boxes
            .iter()
            .enumerate()
            .map(|(idx, b)| ((b.shape, b.col, b.row), idx + 1))
            .collect();
        let mut map: Vec<Vec<usize>> = vec![Vec::new(); self.boxes.len()];
        for (idx, b) in out.boxes.iter().enumerate() {
            let src = provenance[b.shape - 1]
                .get(&(b.col, b.row))
                .and_then(|src| orig_pos.get(&(b.shape, src.0, src.1)))
                .ok_or_else(|| {
                    Error::InvalidInput("stretch map is not a bijection onto stretched boxes".into())
                })?;
            map[src - 1].push(idx + 1);
        }
        for pieces in &map {
            if pieces.len() as i64 != spec.m {
                return Err(Error::InvalidInput(
                    "stretched box does not have m pieces".into(),
                ));
            }
        }
        Ok((out, map))
    }

    /// a_{ij} for each attacking pair of the tuple under the given stretch:
    /// m + o_r - o_s when the pair goes from shape r to a later shape s,
    /// 1 + o_r - o_s when it goes to an earlier one.
    pub fn a_values(&self, spec: &StretchSpec) -> Result<BTreeMap<(usize, usize), i64>> {
        spec.validate()?;
        if spec.offsets.len() != self.shapes.len() {
            return Err(Error::InvalidInput(format!(
                "{} offsets for {} shapes",
                spec.offsets.len(),
                self.shapes.len()
            )));
        }
        let mut out = BTreeMap::new();
        for (i, j) in self.attacking_pairs() {
            let r = self.box_at(i).shape;
            let s = self.box_at(j).shape;
            let a = if r < s {
                spec.m + spec.offsets[r - 1] - spec.offsets[s - 1]
            } else {
                1 + spec.offsets[r - 1] - spec.offsets[s - 1]
            };
            out.insert((i, j), a);
        }
        Ok(out)
    }
}

fn ceil_div(a: i64, b: i64) -> i64 {
    debug_assert!(b > 0);
    -((-a).div_euclid(b))
}

/// South-step vector: b(m,n)_i = ceil(i n/m) - ceil((i-1) n/m).  Coprimality
/// is not required; b(dm, dn) is the concatenation of d copies of b(m, n).
pub fn b_vector(m: i64, n: i64) -> Vec<i64> {
    assert!(m >= 1, "b_vector needs positive m");
    (1..=m)
        .map(|i| ceil_div(i * n, m) - ceil_div((i - 1) * n, m))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::random_shape;

    fn shape(outer: &[i32], inner: &[i32]) -> SkewShape {
        SkewShape::new(outer.to_vec(), inner.to_vec()).unwrap()
    }

    fn tuple(shapes: Vec<SkewShape>) -> SkewTuple {
        SkewTuple::new(shapes)
    }

    /// The tuple ((32)/(10), (33)/(11)) used throughout the examples.
    fn fig1_tuple() -> SkewTuple {
        tuple(vec![shape(&[3, 2], &[1, 0]), shape(&[3, 3], &[1, 1])])
    }

    #[test]
    fn reading_order_fig1() {
        let t = fig1_tuple();
        // shape 1 holds reading positions 1,2,4,7; shape 2 holds 3,5,6,8
        let by_shape: Vec<usize> = t.reading_order().iter().map(|b| b.shape).collect();
        assert_eq!(by_shape, vec![1, 1, 2, 1, 2, 2, 1, 2]);
        // drawn positions: shape 2 rows are (3,6) on top and (5,8) below
        let b3 = t.box_at(3);
        assert_eq!((b3.col, b3.row), (2, 2));
        let b6 = t.box_at(6);
        assert_eq!((b6.col, b6.row), (3, 2));
        let b5 = t.box_at(5);
        assert_eq!((b5.col, b5.row), (2, 1));
        let b8 = t.box_at(8);
        assert_eq!((b8.col, b8.row), (3, 1));
    }

    #[test]
    fn reading_order_single_box() {
        let t = tuple(vec![shape(&[1], &[])]);
        assert_eq!(t.n_boxes(), 1);
    }

    #[test]
    fn reading_order_32_2() {
        let t = tuple(vec![shape(&[3, 2], &[]), shape(&[2], &[])]);
        let by_shape: Vec<usize> = t.reading_order().iter().map(|b| b.shape).collect();
        // shape 1 at positions 1,2,3,5,7 and shape 2 at 4,6
        assert_eq!(by_shape, vec![1, 1, 1, 2, 1, 2, 1]);
    }

    #[test]
    fn attacking_pairs_examples() {
        assert_eq!(fig1_tuple().attacking_pairs().len(), 7);
        // single skew shape: no attacking pairs
        let t = tuple(vec![shape(&[4, 3, 3], &[])]);
        assert!(t.attacking_pairs().is_empty());
        let t = tuple(vec![shape(&[3, 2], &[]), shape(&[2], &[])]);
        assert_eq!(
            t.attacking_pairs(),
            vec![(2, 4), (3, 4), (4, 5), (5, 6), (6, 7)]
        );
    }

    #[test]
    fn stats_examples() {
        // the four rows of the statistics example
        let t = tuple(vec![shape(&[4, 3, 3], &[])]);
        let s = t.stats();
        assert_eq!(s.magic_p, 4);
        assert_eq!(s.gamma, vec![1, 2, 3, 2, 1, 1]);
        assert_eq!(s.n_prime, 5);
        assert_eq!(s.attack_a, 0);

        let s = fig1_tuple().stats();
        assert_eq!(s.magic_p, 3);
        assert_eq!(s.gamma, vec![1, 1, 1, 1, 2, 1, 1]);
        assert_eq!(s.n_prime, 1);
        assert_eq!(s.attack_a, 7);

        let t = tuple(vec![shape(&[4, 4, 4], &[1])]);
        let s = t.stats();
        assert_eq!(s.magic_p, 5);
        assert_eq!(s.gamma, vec![1, 2, 2, 3, 2, 1]);
        assert_eq!(s.n_prime, 6);
        assert_eq!(s.attack_a, 0);

        let t = tuple(vec![shape(&[4, 4, 4], &[1]), shape(&[1, 1], &[])]);
        let s = t.stats();
        assert_eq!(s.magic_p, 5);
        assert_eq!(s.gamma, vec![1, 2, 1, 2, 1, 3, 2, 1]);
        assert_eq!(s.n_prime, 6);
        assert_eq!(s.attack_a, 9);

        let s = tuple(Vec::new()).stats();
        assert_eq!(s.gamma, Vec::<i64>::new());
        assert_eq!((s.n_prime, s.magic_p, s.attack_a), (0, 0, 0));
    }

    #[test]
    fn b_vectors() {
        assert_eq!(b_vector(3, 2), vec![1, 1, 0]);
        assert_eq!(b_vector(1, 5), vec![5]);
        assert_eq!(b_vector(1, 0), vec![0]);
        assert_eq!(b_vector(6, 4), vec![1, 1, 0, 1, 1, 0]);
        assert_eq!(b_vector(2, -1), vec![0, -1]);
    }

    #[test]
    fn stretch_single_shape() {
        // theta = (32), m = 3, o = -4: 15 boxes with column heights 6, 6, 3
        let th = shape(&[3, 2], &[]);
        let st = th.stretch(3, -4).unwrap();
        assert_eq!(st.n_boxes(), 15);
        let mut heights: BTreeMap<i32, usize> = BTreeMap::new();
        for (c, _) in st.boxes() {
            *heights.entry(c).or_insert(0) += 1;
        }
        assert_eq!(heights.get(&1), Some(&6));
        assert_eq!(heights.get(&2), Some(&6));
        assert_eq!(heights.get(&3), Some(&3));
        // contents survive the translation: column 3 holds contents 0,1,2
        let contents: BTreeSet<i64> = st
            .boxes()
            .iter()
            .filter(|b| b.0 == 3)
            .map(|&(i, j)| (i - j) as i64)
            .collect();
        assert_eq!(contents, BTreeSet::from([0, 1, 2]));
    }

    #[test]
    fn stretch_tuple_and_map() {
        let t = tuple(vec![shape(&[3, 2], &[]), shape(&[2], &[])]);
        let spec = StretchSpec::new(3, vec![-4, -2]).unwrap();
        let (st, map) = t.stretch(&spec).unwrap();
        assert_eq!(st.n_boxes(), 21);
        assert_eq!(map.len(), 7);
        let mut all: BTreeSet<usize> = BTreeSet::new();
        for pieces in &map {
            assert_eq!(pieces.len(), 3);
            all.extend(pieces);
        }
        assert_eq!(all.len(), 21);

        // m = 1 with constant offsets is a bijection
        let spec1 = StretchSpec::new(1, vec![0, 0]).unwrap();
        let (st1, map1) = t.stretch(&spec1).unwrap();
        assert_eq!(st1, t);
        assert!(map1.iter().enumerate().all(|(i, p)| p == &vec![i + 1]));
    }

    #[test]
    fn offset_chain_validation() {
        assert!(StretchSpec::new(3, vec![-4, -2]).is_ok());
        assert!(StretchSpec::new(3, vec![-2, -4]).is_err());
        assert!(StretchSpec::new(2, vec![0, 2]).is_err());
    }

    #[test]
    fn a_values_examples() {
        let t = tuple(vec![shape(&[3, 2], &[]), shape(&[2], &[])]);
        let spec = StretchSpec::new(3, vec![-4, -2]).unwrap();
        let a = t.a_values(&spec).unwrap();
        assert_eq!(a[&(2, 4)], 1);
        assert_eq!(a[&(3, 4)], 1);
        assert_eq!(a[&(5, 6)], 1);
        assert_eq!(a[&(4, 5)], 3);
        assert_eq!(a[&(6, 7)], 3);

        // m = 1 with constant offsets: every a_{ij} = 1
        let spec1 = StretchSpec::new(1, vec![0, 0]).unwrap();
        assert!(t.a_values(&spec1).unwrap().values().all(|&v| v == 1));

        // the (m,n) = (3,2) tuple ((2),(1)) with offsets (-2,-2): sum is 4
        let t = tuple(vec![shape(&[2], &[]), shape(&[1], &[])]);
        let spec = StretchSpec::new(3, vec![-2, -2]).unwrap();
        let total: i64 = t.a_values(&spec).unwrap().values().sum();
        assert_eq!(total, 4);
    }

    #[test]
    fn counting_identity_for_stretched_attacks() {
        // a_{ij} counts stretched attacking pairs from stretch(i) to
        // stretch(j), and a_{ij}-1 counts the reverse direction; pairs that
        // do not attack contribute nothing.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let k = rng.gen_range(1..=3);
            let shapes: Vec<SkewShape> = (0..k)
                .map(|_| random_shape(&mut rng, 3))
                .collect();
            let t = tuple(shapes);
            if t.n_boxes() == 0 {
                continue;
            }
            let m = rng.gen_range(1..=3i64);
            let mut offs: Vec<i64> = (0..k).map(|_| rng.gen_range(0..m)).collect();
            offs.sort_unstable();
            let spec = StretchSpec::new(m, offs).unwrap();
            let (st, map) = t.stretch(&spec).unwrap();
            let attacks = t.a_values(&spec).unwrap();
            let st_attacks = st.attacking_pairs();
            for i in 1..=t.n_boxes() {
                for j in (i + 1)..=t.n_boxes() {
                    let si: BTreeSet<usize> = map[i - 1].iter().copied().collect();
                    let sj: BTreeSet<usize> = map[j - 1].iter().copied().collect();
                    let fwd = st_attacks
                        .iter()
                        .filter(|(a, b)| si.contains(a) && sj.contains(b))
                        .count() as i64;
                    let bwd = st_attacks
                        .iter()
                        .filter(|(a, b)| sj.contains(a) && si.contains(b))
                        .count() as i64;
                    match attacks.get(&(i, j)) {
                        Some(&a) => {
                            assert_eq!(fwd, a);
                            assert_eq!(bwd, a - 1);
                        }
                        None => {
                            assert_eq!(fwd + bwd, 0);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn magic_number_lemma() {
        // n'(gamma) + p = sum over diagonals D of pairs (d, e) in D x D_+
        // with d strictly southwest of e
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..100 {
            let k = rng.gen_range(1..=3);
            let shapes: Vec<SkewShape> = (0..k).map(|_| random_shape(&mut rng, 4)).collect();
            let t = tuple(shapes);
            let s = t.stats();
            let mut rhs = 0i64;
            for d in t.diagonals() {
                let b0 = t.box_at(d[0]);
                let (c, sh) = b0.adjusted();
                // adjacent diagonal to the southeast: content + 1, same shape
                let dplus: Vec<&BoxRef> = t
                    .reading_order()
                    .iter()
                    .filter(|b| b.adjusted() == (c + 1, sh))
                    .collect();
                for &p in &d {
                    let bd = t.box_at(p);
                    for e in &dplus {
                        if SkewTuple::precedes(bd, e) && (bd.col, bd.row) != (e.col, e.row) {
                            rhs += 1;
                        }
                    }
                }
            }
            assert_eq!(s.n_prime + s.magic_p, rhs);
        }
    }

    #[test]
    fn a_two_ways_lemma() {
        for m in 1..=6i64 {
            for n in -6..=6i64 {
                if num_integer::gcd(m, n.abs()) != 1 {
                    continue;
                }
                for d in 1..=6i64 {
                    let b = b_vector(d * m, d * n);
                    let lhs: i64 = b
                        .iter()
                        .enumerate()
                        .map(|(i, &x)| i as i64 * x)
                        .sum();
                    let rhs = d * (d * m * n - m - n + 1) / 2;
                    assert_eq!(lhs, rhs, "m={} n={} d={}", m, n, d);
                }
            }
        }
    }

    #[test]
    fn path_suffix_and_interval_bounds() {
        for m in 1..=5i64 {
            for n in -5..=5i64 {
                if num_integer::gcd(m, n.abs()) != 1 {
                    continue;
                }
                for d in 1..=4i64 {
                    let b = b_vector(d * m, d * n);
                    let l = (d * m) as usize;
                    // suffix sums: sum_{j >= a} b_j <= |J| n / m, equality iff
                    // a-1 is a multiple of m
                    for a in 1..=l {
                        let s: i64 = b[(a - 1)..].iter().sum();
                        let len = (l - a + 1) as i64;
                        assert!(m * s <= len * n);
                        let tight = m * s == len * n;
                        assert_eq!(tight, (a as i64 - 1) % m == 0, "a={} m={} n={} d={}", a, m, n, d);
                    }
                    // interval sums: strictly below |J| n/m + 1
                    for a in 1..=l {
                        for bb in a..=l {
                            let s: i64 = b[(a - 1)..bb].iter().sum();
                            let len = (bb - a + 1) as i64;
                            assert!(m * s < len * n + m);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ideal_checks() {
        let t = tuple(vec![shape(&[3, 2], &[]), shape(&[2], &[])]);
        // reading positions 1 = (1,2), 2 = (1,1) in shape 1
        let ok: BTreeSet<usize> = [1, 2].into_iter().collect();
        assert!(t.is_lower_ideal(&ok));
        // {1} misses the southwest corner (1,1) which precedes (1,2)
        let bad: BTreeSet<usize> = [1].into_iter().collect();
        assert!(!t.is_lower_ideal(&bad));
        // the southwest corner alone is an ideal; boxes of other shapes are
        // incomparable
        let corner: BTreeSet<usize> = [2].into_iter().collect();
        assert!(t.is_lower_ideal(&corner));
        let other_shape: BTreeSet<usize> = [4].into_iter().collect();
        assert!(t.is_lower_ideal(&other_shape));
        // reflexivity / incomparability of precedes
        let a = t.box_at(1);
        assert!(SkewTuple::precedes(a, a));
        let b = t.box_at(4);
        assert!(!SkewTuple::precedes(a, b) && !SkewTuple::precedes(b, a));
    }

    #[test]
    fn tuple_json_round_trip() {
        let t = fig1_tuple();
        let s = serde_json::to_string(&t).unwrap();
        let u: SkewTuple = serde_json::from_str(&s).unwrap();
        assert_eq!(t, u);
        let v = SkewTuple::from_json(
            r#"{"shapes":[{"outer":[3,2],"inner":[1,0]},{"outer":[3,3],"inner":[1,1]}]}"#,
        )
        .unwrap();
        assert_eq!(t, v);
        // inner defaults to zeros
        let w = SkewTuple::from_json(r#"{"shapes":[{"outer":[2]},{"outer":[1]}]}"#).unwrap();
        assert_eq!(w.n_boxes(), 3);
    }
}
