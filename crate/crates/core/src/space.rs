//! Cartesian products of finite domains, enumerated in a fixed order.
//!
//! The first variable is the most significant digit and each digit runs
//! through its domain in declaration order, so the enumeration is the
//! lexicographic order on domain positions.

use crate::Value;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Space {
    domains: Vec<Vec<Value>>,
}

impl Space {
    pub fn new(domains: Vec<Vec<Value>>) -> Self {
        Space { domains }
    }

    pub fn domains(&self) -> &[Vec<Value>] {
        &self.domains
    }

    /// Number of points, or `None` on overflow.
    pub fn size(&self) -> Option<u128> {
        self.domains.iter().try_fold(1u128, |acc, d| acc.checked_mul(d.len() as u128))
    }

    pub fn iter(&self) -> SpaceIter<'_> {
        let empty = self.domains.iter().any(|d| d.is_empty());
        SpaceIter { domains: &self.domains, digits: vec![0; self.domains.len()], done: empty }
    }

    /// Position of `point` in the enumeration order.
    pub fn index_of(&self, point: &[Value]) -> Option<usize> {
        if point.len() != self.domains.len() {
            return None;
        }
        let mut idx = 0usize;
        for (d, v) in self.domains.iter().zip(point) {
            let pos = d.iter().position(|x| x == v)?;
            idx = idx * d.len() + pos;
        }
        Some(idx)
    }

    pub fn contains(&self, point: &[Value]) -> bool {
        point.len() == self.domains.len() && self.domains.iter().zip(point).all(|(d, v)| d.contains(v))
    }
}

pub struct SpaceIter<'a> {
    domains: &'a [Vec<Value>],
    digits: Vec<usize>,
    done: bool,
}

impl Iterator for SpaceIter<'_> {
    type Item = Vec<Value>;

    fn next(&mut self) -> Option<Vec<Value>> {
        if self.done {
            return None;
        }
        let out = self.digits.iter().zip(self.domains).map(|(&i, d)| d[i]).collect();
        // odometer step, least significant digit last
        let mut k = self.digits.len();
        loop {
            if k == 0 {
                self.done = true;
                break;
            }
            k -= 1;
            self.digits[k] += 1;
            if self.digits[k] < self.domains[k].len() {
                break;
            }
            self.digits[k] = 0;
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerates_in_lexicographic_order() {
        let s = Space::new(vec![vec![0, 1], vec![5, 3, 4]]);
        let pts: Vec<_> = s.iter().collect();
        assert_eq!(pts.len(), 6);
        assert_eq!(pts[0], vec![0, 5]);
        assert_eq!(pts[1], vec![0, 3]);
        assert_eq!(pts[5], vec![1, 4]);
        for (i, p) in pts.iter().enumerate() {
            assert_eq!(s.index_of(p), Some(i));
        }
    }

    #[test]
    fn empty_product_has_one_point() {
        let s = Space::new(vec![]);
        assert_eq!(s.size(), Some(1));
        assert_eq!(s.iter().collect::<Vec<_>>(), vec![Vec::<Value>::new()]);
    }
}
