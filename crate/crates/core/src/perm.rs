//! Permutations of `{0, .., n-1}` stored as image tables.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum PermError {
    #[error("image table is not a bijection of 0..{0}")]
    NotBijective(usize),
    #[error("cycle entry {entry} out of range for {points} points")]
    OutOfRange { entry: usize, points: usize },
    #[error("point {0} appears in more than one cycle")]
    RepeatedPoint(usize),
    #[error("permutations act on different point counts ({0} vs {1})")]
    SizeMismatch(usize, usize),
}

/// A permutation `σ` with `σ(i) = images[i]`.
///
/// Composition follows function notation: `a.compose(&b)` is `a ∘ b`, i.e. `b`
/// is applied first. With the permutation matrix convention `P e_i = e_{σ(i)}`
/// this makes `P_{a∘b} = P_a P_b`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    images: Vec<u32>,
}

impl Perm {
    pub fn identity(n: usize) -> Self {
        Perm { images: (0..n as u32).collect() }
    }

    pub fn from_images(images: Vec<u32>) -> Result<Self, PermError> {
        let n = images.len();
        let mut seen = vec![false; n];
        for &x in &images {
            let x = x as usize;
            if x >= n || seen[x] {
                return Err(PermError::NotBijective(n));
            }
            seen[x] = true;
        }
        Ok(Perm { images })
    }

    /// Builds a permutation from disjoint cycles, e.g. `[[0, 1, 2]]` is `0 ↦ 1 ↦ 2 ↦ 0`.
    pub fn from_cycles(points: usize, cycles: &[Vec<usize>]) -> Result<Self, PermError> {
        let mut images: Vec<u32> = (0..points as u32).collect();
        let mut used = vec![false; points];
        for cycle in cycles {
            for &p in cycle {
                if p >= points {
                    return Err(PermError::OutOfRange { entry: p, points });
                }
                if used[p] {
                    return Err(PermError::RepeatedPoint(p));
                }
                used[p] = true;
            }
            for (k, &p) in cycle.iter().enumerate() {
                images[p] = cycle[(k + 1) % cycle.len()] as u32;
            }
        }
        Ok(Perm { images })
    }

    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.images[i] as usize
    }

    pub fn images(&self) -> &[u32] {
        &self.images
    }

    pub fn is_identity(&self) -> bool {
        self.images.iter().enumerate().all(|(i, &x)| i as u32 == x)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Perm) -> Result<Perm, PermError> {
        if self.len() != other.len() {
            return Err(PermError::SizeMismatch(self.len(), other.len()));
        }
        Ok(Perm { images: other.images.iter().map(|&x| self.images[x as usize]).collect() })
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0u32; self.len()];
        for (i, &x) in self.images.iter().enumerate() {
            inv[x as usize] = i as u32;
        }
        Perm { images: inv }
    }

    /// `#₁σ`, the number of fixed points.
    pub fn fixed_points(&self) -> usize {
        self.images.iter().enumerate().filter(|(i, &x)| *i as u32 == x).count()
    }

    /// Disjoint cycle decomposition, omitting fixed points.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.len()];
        let mut out = Vec::new();
        for start in 0..self.len() {
            if seen[start] || self.apply(start) == start {
                continue;
            }
            let mut cycle = vec![start];
            seen[start] = true;
            let mut x = self.apply(start);
            while x != start {
                seen[x] = true;
                cycle.push(x);
                x = self.apply(x);
            }
            out.push(cycle);
        }
        out
    }

    /// Disjoint union of `copies` copies of `self` on consecutive blocks.
    pub fn repeat(&self, copies: usize) -> Perm {
        let n = self.len() as u32;
        let mut images = Vec::with_capacity(self.len() * copies);
        for c in 0..copies as u32 {
            images.extend(self.images.iter().map(|&x| c * n + x));
        }
        Perm { images }
    }
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let cycles = self.cycles();
        if cycles.is_empty() {
            return write!(f, "()");
        }
        for c in cycles {
            write!(f, "(")?;
            for (k, p) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{p}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compose_applies_right_factor_first() {
        let a = Perm::from_cycles(3, &[vec![0, 1]]).unwrap();
        let b = Perm::from_cycles(3, &[vec![1, 2]]).unwrap();
        let ab = a.compose(&b).unwrap();
        // b sends 1 -> 2, a fixes 2
        assert_eq!(ab.apply(1), 2);
        assert_eq!(ab.apply(2), 0);
        assert_eq!(ab.apply(0), 1);
    }

    #[test]
    fn inverse_and_fixed_points() {
        let c = Perm::from_cycles(5, &[vec![0, 1, 2, 3, 4]]).unwrap();
        assert!(c.compose(&c.inverse()).unwrap().is_identity());
        assert_eq!(c.fixed_points(), 0);
        assert_eq!(Perm::identity(7).fixed_points(), 7);
        assert_eq!(format!("{c:?}"), "(0 1 2 3 4)");
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Perm::from_images(vec![0, 0]).is_err());
        assert!(Perm::from_cycles(3, &[vec![0, 3]]).is_err());
        assert!(Perm::from_cycles(3, &[vec![0, 1], vec![1, 2]]).is_err());
    }
}
