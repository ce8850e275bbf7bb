//! Elements of ℕ^k (degrees of paths) and ℤ^k (cocycle values).

use std::fmt;

/// A degree in ℕ^k: componentwise partial order, join, and checked
/// subtraction.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Degree {
    coords: Vec<u32>,
}

impl fmt::Debug for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d{:?}", self.coords)
    }
}

impl fmt::Display for Degree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Degree {
    pub fn new(coords: Vec<u32>) -> Self {
        Degree { coords }
    }

    pub fn zero(rank: usize) -> Self {
        Degree {
            coords: vec![0; rank],
        }
    }

    /// Standard generator e_i (colors are 1-based).
    pub fn generator(rank: usize, color: usize) -> Self {
        assert!(color >= 1 && color <= rank);
        let mut coords = vec![0; rank];
        coords[color - 1] = 1;
        Degree { coords }
    }

    pub fn uniform(rank: usize, value: u32) -> Self {
        Degree {
            coords: vec![value; rank],
        }
    }

    pub fn rank(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[u32] {
        &self.coords
    }

    pub fn coord(&self, i: usize) -> u32 {
        self.coords[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    /// ℓ¹ size |n| = Σ n_i.
    pub fn total(&self) -> u32 {
        self.coords.iter().sum()
    }

    pub fn add(&self, other: &Degree) -> Degree {
        assert_eq!(self.rank(), other.rank());
        Degree {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    /// Componentwise subtraction; `None` unless `other <= self`.
    pub fn checked_sub(&self, other: &Degree) -> Option<Degree> {
        assert_eq!(self.rank(), other.rank());
        self.coords
            .iter()
            .zip(&other.coords)
            .map(|(a, b)| a.checked_sub(*b))
            .collect::<Option<Vec<u32>>>()
            .map(|coords| Degree { coords })
    }

    pub fn le(&self, other: &Degree) -> bool {
        assert_eq!(self.rank(), other.rank());
        self.coords.iter().zip(&other.coords).all(|(a, b)| a <= b)
    }

    /// Componentwise maximum m ∨ n.
    pub fn join(&self, other: &Degree) -> Degree {
        assert_eq!(self.rank(), other.rank());
        Degree {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| *a.max(b))
                .collect(),
        }
    }

    /// Difference in ℤ^k.
    pub fn cocycle_to(&self, other: &Degree) -> Cocycle {
        assert_eq!(self.rank(), other.rank());
        Cocycle {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| *a as i64 - *b as i64)
                .collect(),
        }
    }

    /// All degrees m with m <= self, in lexicographic order.
    pub fn box_below(&self) -> Vec<Degree> {
        let mut out = vec![Degree::zero(self.rank())];
        for (i, &c) in self.coords.iter().enumerate() {
            let mut next = Vec::with_capacity(out.len() * (c as usize + 1));
            for d in &out {
                for v in 0..=c {
                    let mut coords = d.coords.clone();
                    coords[i] = v;
                    next.push(Degree { coords });
                }
            }
            out = next;
        }
        out.sort();
        out
    }

    /// All degrees with ℓ¹ size at most `total`, in lexicographic order.
    pub fn all_with_total_at_most(rank: usize, total: u32) -> Vec<Degree> {
        let mut out = Vec::new();
        let mut cur = vec![0u32; rank];
        fn rec(rank: usize, i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Degree>) {
            if i == rank {
                out.push(Degree { coords: cur.clone() });
                return;
            }
            for v in 0..=left {
                cur[i] = v;
                rec(rank, i + 1, left - v, cur, out);
            }
            cur[i] = 0;
        }
        if rank == 0 {
            return vec![Degree::zero(0)];
        }
        rec(rank, 0, total, &mut cur, &mut out);
        out.sort();
        out.dedup();
        out
    }
}

/// A cocycle value in ℤ^k, the degree difference d(λ) - d(μ).
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cocycle {
    coords: Vec<i64>,
}

impl fmt::Debug for Cocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "c{:?}", self.coords)
    }
}

impl fmt::Display for Cocycle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(|c| c.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

impl Cocycle {
    pub fn zero(rank: usize) -> Self {
        Cocycle {
            coords: vec![0; rank],
        }
    }

    pub fn coords(&self) -> &[i64] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|&c| c == 0)
    }

    pub fn add(&self, other: &Cocycle) -> Cocycle {
        Cocycle {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn neg(&self) -> Cocycle {
        Cocycle {
            coords: self.coords.iter().map(|a| -a).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn join_and_sub() {
        let a = Degree::new(vec![2, 0, 1]);
        let b = Degree::new(vec![1, 3, 1]);
        assert_eq!(a.join(&b), Degree::new(vec![2, 3, 1]));
        assert!(a.join(&b).checked_sub(&a).is_some());
        assert_eq!(
            a.join(&b).checked_sub(&a).unwrap(),
            Degree::new(vec![0, 3, 0])
        );
        assert!(a.checked_sub(&b).is_none());
    }

    #[test]
    fn box_enumeration() {
        let d = Degree::new(vec![1, 2]);
        let boxed = d.box_below();
        assert_eq!(boxed.len(), 6);
        assert!(boxed.iter().all(|m| m.le(&d)));
    }

    #[test]
    fn total_enumeration() {
        let all = Degree::all_with_total_at_most(2, 2);
        assert_eq!(all.len(), 6); // 00 01 02 10 11 20
        assert!(all.iter().all(|d| d.total() <= 2));
    }

    #[test]
    fn cocycle_arithmetic() {
        let a = Degree::new(vec![2, 0]);
        let b = Degree::new(vec![0, 1]);
        let c = a.cocycle_to(&b);
        assert_eq!(c.coords(), &[2, -1]);
        assert!(c.add(&c.neg()).is_zero());
    }
}
