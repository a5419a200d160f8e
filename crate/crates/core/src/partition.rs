//! Integer partitions, serialized as weakly decreasing lists without
//! trailing zeros.

use serde::{Deserialize, Serialize};
use std::fmt;

/// A partition of a nonnegative integer.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<i32>);

impl Partition {
    pub fn new(mut parts: Vec<i32>) -> Self {
        while parts.last() == Some(&0) {
            parts.pop();
        }
        debug_assert!(parts.windows(2).all(|w| w[0] >= w[1]) && parts.iter().all(|&p| p > 0));
        Partition(parts)
    }

    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Sort an arbitrary nonnegative vector into a partition.
    pub fn from_unsorted(mut parts: Vec<i32>) -> Self {
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition::new(parts)
    }

    pub fn parts(&self) -> &[i32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn size(&self) -> i64 {
        self.0.iter().map(|&p| p as i64).sum()
    }

    pub fn part(&self, i: usize) -> i32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn conjugate(&self) -> Partition {
        if self.0.is_empty() {
            return Partition::empty();
        }
        let cols = self.0[0] as usize;
        let mut out = vec![0i32; cols];
        for (j, c) in out.iter_mut().enumerate() {
            *c = self.0.iter().filter(|&&p| p as usize > j).count() as i32;
        }
        Partition::new(out)
    }

    /// All partitions of `n`.
    pub fn all(n: i64) -> Vec<Partition> {
        Partition::all_bounded(n, n.max(0))
    }

    /// All partitions of `n` into at most `max_len` parts.
    pub fn all_max_len(n: i64, max_len: usize) -> Vec<Partition> {
        Partition::all(n)
            .into_iter()
            .filter(|p| p.len() <= max_len)
            .collect()
    }

    fn all_bounded(n: i64, max_part: i64) -> Vec<Partition> {
        fn rec(n: i64, max_part: i64, prefix: &mut Vec<i32>, out: &mut Vec<Partition>) {
            if n == 0 {
                out.push(Partition(prefix.clone()));
                return;
            }
            let top = max_part.min(n);
            for p in (1..=top).rev() {
                prefix.push(p as i32);
                rec(n - p, p, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n >= 0 {
            rec(n, max_part, &mut Vec::new(), &mut out);
        }
        out
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}]",
            self.0
                .iter()
                .map(|p| p.to_string())
                .collect::<Vec<_>>()
                .join(",")
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn conjugate_involution() {
        for n in 0..=7 {
            for p in Partition::all(n) {
                assert_eq!(p.conjugate().conjugate(), p);
            }
        }
    }

    #[test]
    fn counts() {
        assert_eq!(Partition::all(5).len(), 7);
        assert_eq!(Partition::all(8).len(), 22);
        assert_eq!(Partition::all(0), vec![Partition::empty()]);
    }

    #[test]
    fn conjugate_examples() {
        assert_eq!(
            Partition::new(vec![4, 3, 3]).conjugate(),
            Partition::new(vec![3, 3, 3, 1])
        );
        assert_eq!(Partition::new(vec![2, 1]).conjugate(), Partition::new(vec![2, 1]));
    }
}
