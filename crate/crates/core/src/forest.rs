//! Decorated rooted forests.
//!
//! Forests are canonical multisets of trees: a sorted list of distinct trees
//! with multiplicities. Two forests are equal iff they are isomorphic as
//! decorated posets, so `Eq`, `Ord` and `Hash` can be used for memoization.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::multi_index::MultiIndex;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tree {
    decoration: MultiIndex,
    children: Forest,
}

#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Forest {
    trees: Vec<(Tree, u32)>,
}

/// A vertex, addressed by the index of its tree among the expanded roots of
/// the forest followed by child indices (again in expanded order).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexHandle {
    pub root: usize,
    pub path: Vec<usize>,
}

impl VertexHandle {
    fn child(&self, k: usize) -> VertexHandle {
        let mut path = self.path.clone();
        path.push(k);
        VertexHandle {
            root: self.root,
            path,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ForestStats {
    pub size: usize,
    pub degree: usize,
    pub height: usize,
    pub weight: MultiIndex,
    /// `σ̂ = ‖Tree(σ, F)‖` for every vertex, in depth-first pre-order.
    pub sigma_hat: Vec<(VertexHandle, MultiIndex)>,
}

impl Tree {
    /// `n ◁ F`.
    pub fn graft(n: MultiIndex, children: Forest) -> Result<Tree> {
        if !n.is_decoration() {
            return Err(Error::InvalidDecoration(n));
        }
        if let Some(t) = children.trees.first() {
            if t.0.decoration.dim() != n.dim() {
                return Err(Error::DimensionMismatch {
                    expected: n.dim(),
                    found: t.0.decoration.dim(),
                });
            }
        }
        Ok(Tree {
            decoration: n,
            children,
        })
    }

    pub fn leaf(n: MultiIndex) -> Result<Tree> {
        Tree::graft(n, Forest::empty())
    }

    /// The bamboo `[n_1, …, n_k]`: `n_1` at the root, `n_k` at the leaf.
    pub fn bamboo(decorations: &[MultiIndex]) -> Result<Tree> {
        let (last, rest) = decorations
            .split_last()
            .ok_or_else(|| Error::InvalidParameter("empty bamboo".into()))?;
        let mut t = Tree::leaf(last.clone())?;
        for n in rest.iter().rev() {
            t = Tree::graft(n.clone(), Forest::from(t))?;
        }
        Ok(t)
    }

    pub fn decoration(&self) -> &MultiIndex {
        &self.decoration
    }

    pub fn children(&self) -> &Forest {
        &self.children
    }

    pub fn dim(&self) -> usize {
        self.decoration.dim()
    }

    pub fn size(&self) -> usize {
        1 + self.children.size()
    }

    pub fn height(&self) -> usize {
        1 + self.children.height()
    }

    pub fn weight(&self) -> MultiIndex {
        let mut w = self.decoration.clone();
        for t in self.children.expanded() {
            w = &w + &t.weight();
        }
        w
    }

    pub fn abs_weight(&self) -> i64 {
        self.decoration.total() + self.children.abs_weight()
    }

    /// Every vertex weight lies in the decoration set; returns the root weight.
    fn fplus_weight(&self) -> Option<MultiIndex> {
        let mut w = self.decoration.clone();
        for (t, d) in &self.children.trees {
            let tw = t.fplus_weight()?;
            for _ in 0..*d {
                w = &w + &tw;
            }
        }
        w.is_decoration().then_some(w)
    }

    fn collect_sigma(&self, at: VertexHandle, out: &mut Vec<(VertexHandle, MultiIndex)>) -> MultiIndex {
        let slot = out.len();
        out.push((at.clone(), self.decoration.clone()));
        let mut w = self.decoration.clone();
        for (k, t) in self.children.expanded().enumerate() {
            w = &w + &t.collect_sigma(at.child(k), out);
        }
        out[slot].1 = w.clone();
        w
    }

    fn cuts(&self) -> Vec<(Vec<Vec<usize>>, Forest, Forest)> {
        // Cuts of a tree: the root alone, or a product of cuts of the
        // children with the root kept in the remaining part.
        let mut out = vec![(vec![vec![]], Forest::from(self.clone()), Forest::empty())];
        let child_cuts: Vec<_> = self.children.expanded().map(Tree::cuts).collect();
        for (sel, pruned, remaining) in product_of_cuts(&child_cuts) {
            let r = Tree {
                decoration: self.decoration.clone(),
                children: remaining,
            };
            out.push((sel, pruned, Forest::from(r)));
        }
        out
    }
}

/// Combines per-component cuts; selections are prefixed by component index.
fn product_of_cuts(
    parts: &[Vec<(Vec<Vec<usize>>, Forest, Forest)>],
) -> Vec<(Vec<Vec<usize>>, Forest, Forest)> {
    let mut acc = vec![(Vec::new(), Forest::empty(), Forest::empty())];
    for (k, cuts) in parts.iter().enumerate() {
        let mut next = Vec::with_capacity(acc.len() * cuts.len());
        for (sel, p, r) in &acc {
            for (csel, cp, cr) in cuts {
                let mut s: Vec<Vec<usize>> = sel.clone();
                s.extend(csel.iter().map(|path| {
                    let mut full = vec![k];
                    full.extend(path);
                    full
                }));
                next.push((s, p.product(cp), r.product(cr)));
            }
        }
        acc = next;
    }
    acc
}

impl Forest {
    pub fn empty() -> Forest {
        Forest { trees: Vec::new() }
    }

    /// Canonical forest from trees in any order.
    pub fn from_trees<I: IntoIterator<Item = Tree>>(trees: I) -> Forest {
        let mut counts: BTreeMap<Tree, u32> = BTreeMap::new();
        for t in trees {
            *counts.entry(t).or_insert(0) += 1;
        }
        Forest {
            trees: counts.into_iter().collect(),
        }
    }

    /// Canonical forest from `(tree, multiplicity)` pairs; zero multiplicities are dropped.
    pub fn from_multiset<I: IntoIterator<Item = (Tree, u32)>>(pairs: I) -> Forest {
        let mut counts: BTreeMap<Tree, u32> = BTreeMap::new();
        for (t, d) in pairs {
            if d > 0 {
                *counts.entry(t).or_insert(0) += d;
            }
        }
        Forest {
            trees: counts.into_iter().collect(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.trees.is_empty()
    }

    /// Distinct trees with their multiplicities, in canonical order.
    pub fn trees(&self) -> &[(Tree, u32)] {
        &self.trees
    }

    /// Trees repeated according to multiplicity.
    pub fn expanded(&self) -> impl Iterator<Item = &Tree> {
        self.trees
            .iter()
            .flat_map(|(t, d)| std::iter::repeat(t).take(*d as usize))
    }

    /// The single tree of a degree-one forest.
    pub fn as_tree(&self) -> Option<&Tree> {
        match self.trees.as_slice() {
            [(t, 1)] => Some(t),
            _ => None,
        }
    }

    pub fn product(&self, other: &Forest) -> Forest {
        Forest::from_multiset(self.trees.iter().chain(&other.trees).cloned())
    }

    pub fn dim(&self) -> Option<usize> {
        self.trees.first().map(|(t, _)| t.dim())
    }

    /// `#F`: number of vertices.
    pub fn size(&self) -> usize {
        self.trees.iter().map(|(t, d)| t.size() * *d as usize).sum()
    }

    /// `deg F`: number of roots.
    pub fn degree(&self) -> usize {
        self.trees.iter().map(|(_, d)| *d as usize).sum()
    }

    pub fn height(&self) -> usize {
        self.trees.iter().map(|(t, _)| t.height()).max().unwrap_or(0)
    }

    /// `‖F‖`, the sum of all decorations.
    pub fn weight(&self, dim: usize) -> MultiIndex {
        let mut w = MultiIndex::zero(dim);
        for t in self.expanded() {
            w = &w + &t.weight();
        }
        w
    }

    /// `|‖F‖|`.
    pub fn abs_weight(&self) -> i64 {
        self.trees
            .iter()
            .map(|(t, d)| t.abs_weight() * *d as i64)
            .sum()
    }

    pub fn stats(&self, dim: usize) -> ForestStats {
        let mut sigma_hat = Vec::new();
        for (k, t) in self.expanded().enumerate() {
            t.collect_sigma(
                VertexHandle {
                    root: k,
                    path: vec![],
                },
                &mut sigma_hat,
            );
        }
        ForestStats {
            size: self.size(),
            degree: self.degree(),
            height: self.height(),
            weight: self.weight(dim),
            sigma_hat,
        }
    }

    /// Vertex weights `σ̂` in depth-first pre-order.
    pub fn sigma_hats(&self) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for (k, t) in self.expanded().enumerate() {
            t.collect_sigma(
                VertexHandle {
                    root: k,
                    path: vec![],
                },
                &mut out,
            );
        }
        out.into_iter().map(|(_, w)| w).collect()
    }

    /// Membership in `F⁺`: every vertex weight lies in the decoration set.
    pub fn is_fplus(&self) -> bool {
        self.trees.iter().all(|(t, _)| t.fplus_weight().is_some())
    }

    /// All admissible cuts in a deterministic order.
    pub fn admissible_cuts(&self) -> Vec<Cut> {
        let parts: Vec<_> = self.expanded().map(Tree::cuts).collect();
        product_of_cuts(&parts)
            .into_iter()
            .map(|(sel, pruned, remaining)| Cut {
                selected: sel
                    .into_iter()
                    .map(|p| VertexHandle {
                        root: p[0],
                        path: p[1..].to_vec(),
                    })
                    .collect(),
                pruned,
                remaining,
            })
            .collect()
    }

    /// All ordered pairs `(F′, F″)` with `F′F″ = F`.
    pub fn factorizations(&self) -> Vec<(Forest, Forest)> {
        let mut acc = vec![(Vec::new(), Vec::new())];
        for (t, d) in &self.trees {
            let mut next = Vec::new();
            for (l, r) in &acc {
                for k in 0..=*d {
                    let mut l2: Vec<(Tree, u32)> = l.clone();
                    let mut r2: Vec<(Tree, u32)> = r.clone();
                    l2.push((t.clone(), k));
                    r2.push((t.clone(), d - k));
                    next.push((l2, r2));
                }
            }
            acc = next;
        }
        acc.into_iter()
            .map(|(l, r)| (Forest::from_multiset(l), Forest::from_multiset(r)))
            .collect()
    }

    /// `sym(F)`: the product over every vertex's child forest (and the top
    /// level) of the factorials of the multiplicities.
    pub fn symmetry_factor(&self) -> BigUint {
        let mut s = BigUint::one();
        for (t, d) in &self.trees {
            for k in 2..=*d {
                s *= k;
            }
            s *= t.children.symmetry_factor().pow(*d);
        }
        s
    }
}

impl From<Tree> for Forest {
    fn from(t: Tree) -> Forest {
        Forest {
            trees: vec![(t, 1)],
        }
    }
}

/// An admissible cut `c`, with its pruned part `P^c(F)` (the subtrees rooted
/// at the selected vertices) and remaining part `R^c(F)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Cut {
    pub selected: Vec<VertexHandle>,
    pub pruned: Forest,
    pub remaining: Forest,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ForestFilter {
    All,
    Fplus,
    /// Necessary conditions for not being universally vanishing: every
    /// vertex weight lies in the decoration set, and `|n| ≥ deg G − 1` at
    /// every vertex `n ◁ G`.
    NvCandidates,
}

impl FromStr for ForestFilter {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "all" => Ok(ForestFilter::All),
            "fplus" => Ok(ForestFilter::Fplus),
            "nv" | "nv-candidates" => Ok(ForestFilter::NvCandidates),
            other => Err(Error::Parse(format!("unknown forest filter {other:?}"))),
        }
    }
}

/// Every canonical forest with decorations in `decorations` and
/// `|‖F‖| ≤ weight_cap`, ordered by `|‖F‖|` and then canonically.
pub fn enumerate_forests(
    decorations: &[MultiIndex],
    weight_cap: u32,
    filter: ForestFilter,
) -> Result<Vec<Forest>> {
    enumerate_forests_with(
        decorations,
        weight_cap,
        |t| {
            Ok(match filter {
                ForestFilter::All => true,
                ForestFilter::Fplus => t.weight().is_decoration(),
                ForestFilter::NvCandidates => nv_candidate(t),
            })
        },
        |_| Ok(true),
    )
}

/// `σ̂ ∈ N` at the root and `|n| ≥ deg G − 1` for the root `n ◁ G`.
pub(crate) fn nv_candidate(t: &Tree) -> bool {
    t.decoration.total() >= t.children.degree() as i64 - 1 && t.weight().is_decoration()
}

/// Layered enumeration keeping only trees accepted by `keep_tree` and
/// forests accepted by `keep_forest`. Trees are grafted onto accepted
/// forests only, so both predicates must be inherited by subforests for the
/// result to be exhaustive.
pub fn enumerate_forests_with<T, G>(
    decorations: &[MultiIndex],
    weight_cap: u32,
    keep_tree: T,
    keep_forest: G,
) -> Result<Vec<Forest>>
where
    T: Fn(&Tree) -> Result<bool>,
    G: Fn(&Forest) -> Result<bool>,
{
    let mut decos: Vec<MultiIndex> = decorations.to_vec();
    decos.sort();
    decos.dedup();
    for n in &decos {
        if !n.is_decoration() {
            return Err(Error::InvalidDecoration(n.clone()));
        }
    }
    let cap = weight_cap as usize;
    // trees[w], forests[w]: accepted trees and forests of absolute weight w.
    let mut trees: Vec<Vec<Tree>> = vec![Vec::new(); cap + 1];
    let mut forests: Vec<Vec<Forest>> = vec![Vec::new(); cap + 1];
    forests[0].push(Forest::empty());

    for w in 1..=cap {
        let mut layer = Vec::new();
        for n in &decos {
            let nw = n.total() as usize;
            if nw > w {
                continue;
            }
            for g in &forests[w - nw] {
                let t = Tree {
                    decoration: n.clone(),
                    children: g.clone(),
                };
                if keep_tree(&t)? {
                    layer.push(t);
                }
            }
        }
        layer.sort();
        trees[w] = layer;

        let mut fl = Vec::new();
        let flat: Vec<(usize, &Tree)> = trees[1..=w]
            .iter()
            .enumerate()
            .flat_map(|(k, l)| l.iter().map(move |t| (k + 1, t)))
            .collect();
        multisets(&flat, 0, w, &mut Vec::new(), &keep_forest, &mut fl)?;
        fl.sort();
        forests[w] = fl;
    }
    Ok(forests.into_iter().flatten().collect())
}

/// Non-decreasing index sequences into `flat` whose weights sum to `left`.
fn multisets<G: Fn(&Forest) -> Result<bool>>(
    flat: &[(usize, &Tree)],
    start: usize,
    left: usize,
    cur: &mut Vec<usize>,
    keep: &G,
    out: &mut Vec<Forest>,
) -> Result<()> {
    if left == 0 {
        let f = Forest::from_trees(cur.iter().map(|&k| flat[k].1.clone()));
        if keep(&f)? {
            out.push(f);
        }
        return Ok(());
    }
    for k in start..flat.len() {
        if flat[k].0 <= left {
            cur.push(k);
            multisets(flat, k, left - flat[k].0, cur, keep, out)?;
            cur.pop();
        }
    }
    Ok(())
}

/// Trees only (degree-one forests) from [`enumerate_forests`].
pub fn enumerate_trees(
    decorations: &[MultiIndex],
    weight_cap: u32,
    filter: ForestFilter,
) -> Result<Vec<Tree>> {
    Ok(enumerate_forests(decorations, weight_cap, filter)?
        .into_iter()
        .filter_map(|f| f.as_tree().cloned())
        .collect())
}

// Text notation: `[1,0]` is a leaf, `(1,-1)<(F)` grafts `F`, `*` multiplies,
// `∅` (or `()`) is the empty forest.

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let entries = self
            .decoration
            .entries()
            .iter()
            .map(|x| x.to_string())
            .collect::<Vec<_>>()
            .join(",");
        if self.children.is_empty() {
            write!(f, "[{entries}]")
        } else {
            write!(f, "({entries})<({})", self.children)
        }
    }
}

impl fmt::Display for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return write!(f, "∅");
        }
        for (k, t) in self.expanded().enumerate() {
            if k > 0 {
                write!(f, "*")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Debug for Forest {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Forest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Forest> {
        let chars: Vec<char> = s.chars().filter(|c| !c.is_whitespace()).collect();
        let mut p = Parser { chars, pos: 0 };
        let f = p.forest()?;
        if p.pos != p.chars.len() {
            return Err(p.error("trailing input"));
        }
        Ok(f)
    }
}

impl FromStr for Tree {
    type Err = Error;
    fn from_str(s: &str) -> Result<Tree> {
        let f: Forest = s.parse()?;
        f.as_tree()
            .cloned()
            .ok_or_else(|| Error::Parse(format!("{s:?} is not a single tree")))
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
}

impl Parser {
    fn error(&self, what: &str) -> Error {
        Error::Parse(format!("{what} at position {}", self.pos))
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected {c:?}")))
        }
    }

    fn forest(&mut self) -> Result<Forest> {
        match self.peek() {
            Some('∅') => {
                self.pos += 1;
                return Ok(Forest::empty());
            }
            Some('(') if self.chars.get(self.pos + 1) == Some(&')') => {
                self.pos += 2;
                return Ok(Forest::empty());
            }
            _ => {}
        }
        let mut trees = vec![self.tree()?];
        while self.peek() == Some('*') {
            self.pos += 1;
            trees.push(self.tree()?);
        }
        let dim = trees[0].dim();
        if trees.iter().any(|t| t.dim() != dim) {
            return Err(self.error("mixed dimensions"));
        }
        Ok(Forest::from_trees(trees))
    }

    fn tree(&mut self) -> Result<Tree> {
        match self.peek() {
            Some('[') => {
                self.pos += 1;
                let n = self.entries(']')?;
                Tree::leaf(n)
            }
            Some('(') => {
                self.pos += 1;
                let n = self.entries(')')?;
                self.expect('<')?;
                self.expect('(')?;
                let children = self.forest()?;
                self.expect(')')?;
                Tree::graft(n, children)
            }
            _ => Err(self.error("expected '[' or '('")),
        }
    }

    fn entries(&mut self, close: char) -> Result<MultiIndex> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c != close) {
            self.pos += 1;
        }
        let body: String = self.chars[start..self.pos].iter().collect();
        self.expect(close)?;
        let entries = body
            .split(',')
            .map(|x| x.parse::<i32>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|_| self.error(&format!("invalid multi-index {body:?}")))?;
        if entries.is_empty() {
            return Err(self.error("empty multi-index"));
        }
        Ok(MultiIndex::new(entries))
    }
}
