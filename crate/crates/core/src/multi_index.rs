//! Integer exponent vectors in `Z^ν`.

use std::fmt;
use std::str::FromStr;
use std::ops::{Add, Neg, Sub};

use serde::{Deserialize, Serialize};

/// An element of `Z^ν`: monomial exponents, homogeneity degrees, decorations.
///
/// Ordering is lexicographic on the entries.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<i32>);

impl MultiIndex {
    pub fn new(entries: Vec<i32>) -> Self {
        assert!(!entries.is_empty(), "multi-index must have dimension ≥ 1");
        MultiIndex(entries)
    }

    pub fn zero(dim: usize) -> Self {
        MultiIndex::new(vec![0; dim])
    }

    /// The unit vector `e_i` (0-based `i`).
    pub fn unit(dim: usize, i: usize) -> Self {
        let mut v = vec![0; dim];
        v[i] = 1;
        MultiIndex::new(v)
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[i32] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i32 {
        self.0[i]
    }

    /// Total degree `|m| = m_1 + ... + m_ν`.
    pub fn total(&self) -> i64 {
        self.0.iter().map(|&x| x as i64).sum()
    }

    pub fn is_nonneg(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Membership in the decoration set `N = { m - e_i : m ∈ N^ν, |m| ≥ 2 }`.
    ///
    /// Uses the closed characterization: `|n| ≥ 1`, every entry `≥ -1`, and at
    /// most one entry equal to `-1`.
    pub fn is_decoration(&self) -> bool {
        let mut negatives = 0;
        for &x in &self.0 {
            if x < -1 {
                return false;
            }
            if x == -1 {
                negatives += 1;
            }
        }
        negatives <= 1 && self.total() >= 1
    }

    /// `self + e_i`.
    pub fn plus_unit(&self, i: usize) -> Self {
        let mut v = self.0.clone();
        v[i] += 1;
        MultiIndex(v)
    }

    /// All `n ∈ N` with `|n| ≤ max_total`, in lexicographic order.
    pub fn decorations_up_to(dim: usize, max_total: i64) -> Vec<MultiIndex> {
        let mut out: Vec<MultiIndex> = (1..=max_total.max(0) as u32)
            .flat_map(|t| MultiIndex::decorations_of_total(dim, t))
            .collect();
        out.sort();
        out
    }

    /// All `n ∈ N` with `|n| == total`, in lexicographic order.
    pub fn decorations_of_total(dim: usize, total: u32) -> Vec<MultiIndex> {
        if total == 0 {
            return Vec::new();
        }
        let mut out = MultiIndex::monomials_of_degree(dim, total);
        if dim >= 2 {
            // exactly one entry equal to -1, the others non-negative
            for rest in MultiIndex::monomials_of_degree(dim - 1, total + 1) {
                for j in 0..dim {
                    let mut v = rest.0.clone();
                    v.insert(j, -1);
                    out.push(MultiIndex(v));
                }
            }
        }
        out.sort();
        out
    }

    /// All `m ∈ N^ν` with `|m| == total`, in lexicographic order.
    pub fn monomials_of_degree(dim: usize, total: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        let mut cur = vec![0i32; dim];
        fn rec(pos: usize, left: u32, cur: &mut Vec<i32>, out: &mut Vec<MultiIndex>) {
            if pos + 1 == cur.len() {
                cur[pos] = left as i32;
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for v in (0..=left).rev() {
                cur[pos] = v as i32;
                rec(pos + 1, left - v, cur, out);
            }
        }
        rec(0, total, &mut cur, &mut out);
        out.sort();
        out
    }
}

impl Add for &MultiIndex {
    type Output = MultiIndex;
    fn add(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &MultiIndex {
    type Output = MultiIndex;
    fn sub(self, rhs: &MultiIndex) -> MultiIndex {
        assert_eq!(self.dim(), rhs.dim(), "multi-index dimension mismatch");
        MultiIndex(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Neg for &MultiIndex {
    type Output = MultiIndex;
    fn neg(self) -> MultiIndex {
        MultiIndex(self.0.iter().map(|a| -a).collect())
    }
}

impl From<Vec<i32>> for MultiIndex {
    fn from(v: Vec<i32>) -> Self {
        MultiIndex::new(v)
    }
}

impl<const N: usize> From<[i32; N]> for MultiIndex {
    fn from(v: [i32; N]) -> Self {
        MultiIndex::new(v.to_vec())
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

/// Accepts `(1,-1)` or `1,-1`.
impl FromStr for MultiIndex {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let inner = t
            .strip_prefix('(')
            .and_then(|r| r.strip_suffix(')'))
            .unwrap_or(t);
        if inner.trim().is_empty() {
            return Err(crate::error::Error::Parse(format!("empty multi-index {s:?}")));
        }
        inner
            .split(',')
            .map(|x| {
                x.trim()
                    .parse::<i32>()
                    .map_err(|_| crate::error::Error::Parse(format!("bad multi-index entry {x:?}")))
            })
            .collect::<Result<Vec<_>, _>>()
            .map(MultiIndex)
    }
}

/// Parses a list of tuples such as `(1) (2,-1)` or `(1);(2,-1)`.
pub fn parse_index_list(text: &str) -> crate::error::Result<Vec<MultiIndex>> {
    let mut out = Vec::new();
    let mut rest = text.trim();
    while !rest.is_empty() {
        let open = rest
            .find('(')
            .ok_or_else(|| crate::error::Error::Parse(format!("expected '(' in {rest:?}")))?;
        if !rest[..open].chars().all(|c| c.is_whitespace() || c == ',' || c == ';') {
            return Err(crate::error::Error::Parse(format!("unexpected text {:?}", &rest[..open])));
        }
        let close = rest[open..]
            .find(')')
            .ok_or_else(|| crate::error::Error::Parse("unclosed '('".into()))?
            + open;
        out.push(rest[open..=close].parse()?);
        rest = rest[close + 1..].trim_start_matches(|c: char| c.is_whitespace() || c == ',' || c == ';');
    }
    Ok(out)
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}
