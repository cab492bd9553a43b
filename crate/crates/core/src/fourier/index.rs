use serde::{Deserialize, Serialize};
use std::fmt;

/// Integer wavevector `k` of a Fourier mode `exp(i<k, phi>)` on the m-torus.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(k: Vec<i32>) -> Self {
        MultiIndex(k)
    }

    pub fn zero(m: usize) -> Self {
        MultiIndex(vec![0; m])
    }

    /// `n` times the `j`-th unit vector.
    pub fn unit(m: usize, j: usize, n: i32) -> Self {
        let mut k = vec![0; m];
        k[j] = n;
        MultiIndex(k)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[i32] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&v| v == 0)
    }

    /// `|k|_1`, the order of the mode.
    pub fn l1(&self) -> usize {
        self.0.iter().map(|v| v.unsigned_abs() as usize).sum()
    }

    pub fn dot(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.0.len());
        self.0.iter().zip(x).map(|(&k, &v)| k as f64 * v).sum()
    }

    pub fn neg(&self) -> Self {
        MultiIndex(self.0.iter().map(|v| -v).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn component_sum(&self) -> i64 {
        self.0.iter().map(|&v| v as i64).sum()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{v}")?;
        }
        write!(f, ")")
    }
}

/// All wavevectors of dimension `m` with `|k|_1 <= order`, in lexicographic order.
pub fn ball(m: usize, order: usize) -> Vec<MultiIndex> {
    fn rec(m: usize, left: i32, cur: &mut Vec<i32>, out: &mut Vec<MultiIndex>) {
        if cur.len() == m {
            out.push(MultiIndex(cur.clone()));
            return;
        }
        for v in -left..=left {
            cur.push(v);
            rec(m, left - v.abs(), cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(m, order as i32, &mut Vec::with_capacity(m), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_counts() {
        // |k|_1 <= K in two dimensions holds 2K^2 + 2K + 1 points.
        for k in 0..6 {
            assert_eq!(ball(2, k).len(), 2 * k * k + 2 * k + 1);
        }
        assert_eq!(ball(1, 3).len(), 7);
        assert!(ball(3, 2).iter().all(|k| k.l1() <= 2));
    }

    #[test]
    fn arithmetic() {
        let a = MultiIndex::new(vec![1, -2]);
        let b = MultiIndex::new(vec![-1, 2]);
        assert!(a.add(&b).is_zero());
        assert_eq!(a.neg(), b);
        assert_eq!(a.l1(), 3);
        assert_eq!(a.dot(&[2.0, 0.5]), 1.0);
        assert_eq!(a.to_string(), "(1,-2)");
    }
}
