//! Tropical lines in ℝⁿ: combinatorial types as leaf-labeled trivalent trees,
//! caterpillar lines with complete-intersection systems, the lower-bound
//! projection construction and the caterpillar upper-bound harness.

use std::collections::{BTreeMap, VecDeque};

use num::{Signed, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::arrangement::{intersect_components, ArrangementError, IntersectionReport};
use crate::exactgeom::rational::sub;
use crate::exactgeom::{frac, int, Point, Rational};
use crate::project::{
    project_and_count, CurveFace, EmbeddedCurve, PieceKind, PlaneCurveImage, ProjectError, RationalProjection,
};
use crate::tropoly::{TropError, ValuedPolynomial};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinesError {
    #[error("n must be at least {min}, got {got}")]
    TooSmall { min: usize, got: usize },
    #[error("not a trivalent tree on the leaves 1..n+1")]
    NotATree,
    #[error("vertex positions do not form a tropical line of this type")]
    NotALine,
    #[error("not a caterpillar")]
    NotACaterpillar,
    #[error("no candidate column found in the search grid (radius {0})")]
    ConstructionFailed(i64),
    #[error("expected n-1 positive degrees, got {0:?}")]
    BadDegrees(Vec<usize>),
    #[error("no generic perturbation found after {0} attempts")]
    PerturbationFailed(usize),
    #[error(transparent)]
    Project(#[from] ProjectError),
    #[error(transparent)]
    Arrangement(#[from] ArrangementError),
    #[error(transparent)]
    Trop(#[from] TropError),
}

/// (2n−3)!!, the number of combinatorial types of lines in ℝⁿ.
pub fn count_line_types(n: usize) -> u64 {
    (1..=(2 * n as u64).saturating_sub(3)).step_by(2).product()
}

/// Leaf sets are bitmasks over labels 1..n (bit i−1); label n+1 is never in a
/// split, which fixes the side.
pub type Split = u64;

fn compatible(a: Split, b: Split) -> bool {
    a & b == 0 || a & b == a || a & b == b
}

/// All maximal sets of pairwise compatible nontrivial splits of {1..n+1};
/// each one is a combinatorial type of line in ℝⁿ.
pub fn enumerate_split_systems(n: usize) -> Vec<Vec<Split>> {
    let leaves = n + 1;
    let all: Vec<Split> = (1..(1u64 << n)).filter(|s| (2..=leaves - 2).contains(&(s.count_ones() as usize))).collect();
    let mut out = Vec::new();
    let mut chosen = Vec::new();
    fn rec(all: &[Split], start: usize, need: usize, chosen: &mut Vec<Split>, out: &mut Vec<Vec<Split>>) {
        if chosen.len() == need {
            out.push(chosen.clone());
            return;
        }
        for i in start..all.len() {
            if chosen.iter().all(|&c| compatible(c, all[i])) {
                chosen.push(all[i]);
                rec(all, i + 1, need, chosen, out);
                chosen.pop();
            }
        }
    }
    rec(&all, 0, n.saturating_sub(2), &mut chosen, &mut out);
    out
}

/// A trivalent tree with leaves 0..=n (label = index + 1) and internal nodes
/// n+1.. ; node n+1 is the internal node adjacent to leaf n+1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LineTree {
    n: usize,
    adj: Vec<Vec<usize>>,
}

impl LineTree {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn root(&self) -> usize {
        self.n + 1
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        v <= self.n
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Builds the tree of a compatible split system.
    pub fn from_splits(n: usize, splits: &[Split]) -> Result<LineTree, LinesError> {
        if n < 2 || splits.len() != n - 2 {
            return Err(LinesError::NotATree);
        }
        let full: Split = (1u64 << n) - 1;
        let mut sets: Vec<Split> = splits.to_vec();
        sets.sort_by_key(|s| std::cmp::Reverse(s.count_ones()));
        sets.dedup();
        if sets.len() != n - 2 || sets.iter().any(|&s| s & !full != 0) {
            return Err(LinesError::NotATree);
        }
        let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        let root = n + 1;
        adj.push(vec![n]);
        adj[n].push(root);
        // node index of each split: n + 2 + position
        let mut covered: Vec<Split> = vec![0; n + 1 + sets.len() + 1];
        let node_of = |i: usize| n + 2 + i;
        for _ in 0..sets.len() {
            adj.push(Vec::new());
        }
        for (i, &s) in sets.iter().enumerate() {
            // parent: the smallest earlier split containing s, else the root
            let parent = (0..i).rev().find(|&j| sets[j] & s == s && sets[j] != s).map_or(root, node_of);
            adj[parent].push(node_of(i));
            adj[node_of(i)].push(parent);
            covered[parent] |= s;
        }
        let owner = |leaf: usize| -> usize {
            let bit = 1u64 << leaf;
            (0..sets.len()).rev().filter(|&j| sets[j] & bit != 0).min_by_key(|&j| sets[j].count_ones()).map_or(root, node_of)
        };
        for leaf in 0..n {
            let o = owner(leaf);
            adj[o].push(leaf);
            adj[leaf].push(o);
        }
        adj.iter_mut().for_each(|a| a.sort());
        let t = LineTree { n, adj };
        if !t.is_trivalent() {
            return Err(LinesError::NotATree);
        }
        Ok(t)
    }

    /// Rebuilds a tree from the parent array of [`LineTree::parents`];
    /// the numbering must already be canonical (root n+1 next to leaf n+1).
    pub fn from_parents(n: usize, parents: &[Option<usize>]) -> Result<LineTree, LinesError> {
        if n < 2 || parents.len() != 2 * n || parents[n].is_some() || parents[n + 1] != Some(n) {
            return Err(LinesError::NotATree);
        }
        let mut adj = vec![Vec::new(); parents.len()];
        for (v, p) in parents.iter().enumerate() {
            if v == n {
                continue;
            }
            let p = p.filter(|&p| p < parents.len() && p != v).ok_or(LinesError::NotATree)?;
            adj[v].push(p);
            adj[p].push(v);
        }
        adj.iter_mut().for_each(|a| a.sort());
        let t = LineTree { n, adj };
        if !t.is_trivalent() || t.parents() != parents {
            return Err(LinesError::NotATree);
        }
        Ok(t)
    }

    fn is_trivalent(&self) -> bool {
        (0..self.adj.len()).all(|v| if self.is_leaf(v) { self.adj[v].len() == 1 } else { self.adj[v].len() == 3 })
    }

    /// Labels (1..n) of the leaves on the far side of the edge parent → v,
    /// as a bitmask (rooted at leaf n+1).
    fn below(&self, v: usize, parent: usize) -> Split {
        if self.is_leaf(v) {
            return if v < self.n { 1u64 << v } else { 0 };
        }
        self.adj[v].iter().filter(|&&w| w != parent).map(|&w| self.below(w, v)).fold(0, |a, b| a | b)
    }

    /// Parent of every node when rooted at leaf n+1 (the leaf itself maps to
    /// None).
    pub fn parents(&self) -> Vec<Option<usize>> {
        let mut par = vec![None; self.adj.len()];
        let mut seen = vec![false; self.adj.len()];
        let mut queue = VecDeque::from([self.n]);
        seen[self.n] = true;
        while let Some(v) = queue.pop_front() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    par[w] = Some(v);
                    queue.push_back(w);
                }
            }
        }
        par
    }

    /// The nontrivial splits (one per internal edge), sorted.
    pub fn splits(&self) -> Vec<Split> {
        let par = self.parents();
        let mut out: Vec<Split> = (self.n + 1..self.adj.len())
            .filter_map(|v| {
                let p = par[v]?;
                (!self.is_leaf(p)).then(|| self.below(v, p))
            })
            .collect();
        out.sort();
        out
    }

    /// Longest leaf-to-leaf path, in edges.
    pub fn diameter(&self) -> usize {
        let bfs = |s: usize| -> Vec<usize> {
            let mut d = vec![usize::MAX; self.adj.len()];
            d[s] = 0;
            let mut q = VecDeque::from([s]);
            while let Some(v) = q.pop_front() {
                for &w in &self.adj[v] {
                    if d[w] == usize::MAX {
                        d[w] = d[v] + 1;
                        q.push_back(w);
                    }
                }
            }
            d
        };
        (0..=self.n).map(|s| bfs(s).into_iter().take(self.n + 1).max().unwrap_or(0)).max().unwrap_or(0)
    }

    pub fn is_caterpillar(&self) -> bool {
        self.diameter() == self.n
    }
}

fn e_set(n: usize, s: Split) -> Point {
    (0..n).map(|i| if s & (1u64 << i) != 0 { int(1) } else { int(0) }).collect()
}

/// A tropical line: a trivalent tree with positions for its internal nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct TropicalLine {
    pub tree: LineTree,
    /// Position of internal node `n + 1 + i` at index i.
    pub positions: Vec<Point>,
}

impl TropicalLine {
    /// Validates that each internal edge runs in direction e_S (S the leaves
    /// on the side away from leaf n+1) with positive length.
    pub fn new(tree: LineTree, positions: Vec<Point>) -> Result<TropicalLine, LinesError> {
        let n = tree.n;
        if positions.len() != tree.node_count() - n - 1 || positions.iter().any(|p| p.len() != n) {
            return Err(LinesError::NotALine);
        }
        let line = TropicalLine { tree, positions };
        for (v, p, s) in line.internal_edges() {
            let d = sub(line.pos(v), line.pos(p));
            let e = e_set(n, s);
            let lambda = d.iter().zip(&e).find(|(_, b)| !b.is_zero()).map(|(a, _)| a.clone()).ok_or(LinesError::NotALine)?;
            if !lambda.is_positive() || d != e.iter().map(|x| x * &lambda).collect::<Point>() {
                return Err(LinesError::NotALine);
            }
        }
        Ok(line)
    }

    /// The line of a tree with the root at `origin` and given lengths of the
    /// internal edges (keyed by split).
    pub fn from_tree(tree: LineTree, lengths: &BTreeMap<Split, Rational>) -> Result<TropicalLine, LinesError> {
        let n = tree.n;
        let par = tree.parents();
        let m = tree.node_count() - n - 1;
        let mut positions: Vec<Option<Point>> = vec![None; m];
        positions[0] = Some(vec![int(0); n]);
        let mut queue = VecDeque::from([tree.root()]);
        while let Some(v) = queue.pop_front() {
            for &w in tree.neighbors(v) {
                if tree.is_leaf(w) || Some(w) == par[v] {
                    continue;
                }
                let s = tree.below(w, v);
                let l = lengths.get(&s).cloned().unwrap_or_else(|| int(1));
                if !l.is_positive() {
                    return Err(LinesError::NotALine);
                }
                let base = positions[v - n - 1].clone().unwrap();
                positions[w - n - 1] = Some(base.iter().zip(e_set(n, s)).map(|(a, b)| a + b * &l).collect());
                queue.push_back(w);
            }
        }
        TropicalLine::new(tree, positions.into_iter().map(Option::unwrap).collect())
    }

    pub fn n(&self) -> usize {
        self.tree.n
    }

    fn pos(&self, v: usize) -> &Point {
        &self.positions[v - self.tree.n - 1]
    }

    /// (child, parent, split) for every internal edge.
    fn internal_edges(&self) -> Vec<(usize, usize, Split)> {
        let par = self.tree.parents();
        (self.tree.n + 1..self.tree.node_count())
            .filter_map(|v| {
                let p = par[v]?;
                (!self.tree.is_leaf(p)).then(|| (v, p, self.tree.below(v, p)))
            })
            .collect()
    }

    pub fn is_caterpillar(&self) -> bool {
        self.tree.is_caterpillar()
    }

    /// Direction of the ray of leaf label i (1-based).
    pub fn ray_direction(&self, label: usize) -> Vec<i64> {
        let n = self.tree.n;
        if label == n + 1 {
            vec![-1; n]
        } else {
            (0..n).map(|i| i64::from(i + 1 == label)).collect()
        }
    }

    /// Vertices are the internal nodes in order; rays are listed by leaf label.
    pub fn to_curve(&self) -> EmbeddedCurve {
        let n = self.tree.n;
        let mut faces = Vec::new();
        for (v, p, _) in self.internal_edges() {
            let (a, b) = (p - n - 1, v - n - 1);
            faces.push(CurveFace { kind: PieceKind::Edge, vertices: vec![a, b], dir: sub(self.pos(v), self.pos(p)), source_cell: None });
        }
        for leaf in 0..=n {
            let v = self.tree.neighbors(leaf)[0];
            faces.push(CurveFace {
                kind: PieceKind::Ray,
                vertices: vec![v - n - 1],
                dir: self.ray_direction(leaf + 1).iter().map(|&x| int(x)).collect(),
                source_cell: None,
            });
        }
        EmbeddedCurve { vertices: self.positions.clone(), faces }
    }

    /// Weighted direction sum at each internal node (all zero when balanced).
    pub fn balancing_defects(&self) -> Vec<Point> {
        let c = self.to_curve();
        let n = self.tree.n;
        let mut out = vec![vec![int(0); n]; c.vertices.len()];
        for f in &c.faces {
            match f.kind {
                PieceKind::Ray => {
                    let v = f.vertices[0];
                    out[v] = out[v].iter().zip(&f.dir).map(|(a, b)| a + b).collect();
                }
                PieceKind::Edge => {
                    let (a, b) = (f.vertices[0], f.vertices[1]);
                    let g = primitive_dir(&f.dir);
                    out[a] = out[a].iter().zip(&g).map(|(x, y)| x + y).collect();
                    out[b] = out[b].iter().zip(&g).map(|(x, y)| x - y).collect();
                }
            }
        }
        out
    }
}

fn primitive_dir(d: &[Rational]) -> Point {
    crate::exactgeom::rational::primitive(d)
}

/// A caterpillar line with a complete-intersection system of n−1 tropical
/// linear forms.
#[derive(Clone, Debug, PartialEq)]
pub struct Caterpillar {
    pub line: TropicalLine,
    pub system: Vec<ValuedPolynomial>,
}

/// Default vertices: v₀ = 0 and v_j = v_{j−1} − (e₁+…+e_{j+1}).
pub fn default_caterpillar_positions(n: usize) -> Vec<Point> {
    let mut out = vec![vec![int(0); n]];
    for j in 1..=n.saturating_sub(2) {
        let prev = out[j - 1].clone();
        out.push(prev.iter().enumerate().map(|(i, x)| if i <= j { x - int(1) } else { x.clone() }).collect());
    }
    out
}

/// Tree of the caterpillar with leaves 1, 2 at v₀, leaf j+2 at v_j and
/// leaves n, n+1 at v_{n−2}.
fn caterpillar_tree(n: usize) -> LineTree {
    // splits {1,2}, {1,2,3}, …, {1..n−1}
    let splits: Vec<Split> = (2..n).map(|k| (1u64 << k) - 1).collect();
    LineTree::from_splits(n, &splits).expect("caterpillar splits are compatible")
}

/// Linear form min(a₀ + x_{i₀}, …) with x_{n+1} read as the constant term.
fn linear_form(n: usize, terms: &[(usize, Rational)]) -> ValuedPolynomial {
    let t: Vec<(Vec<i64>, Rational)> = terms
        .iter()
        .map(|(var, val)| {
            let mut e = vec![0i64; n];
            if *var < n {
                e[*var] = 1;
            }
            (e, val.clone())
        })
        .collect();
    ValuedPolynomial::from_vals(n, &t).expect("distinct exponents")
}

/// The caterpillar L_n; positions (ordered v₀ … v_{n−2}) default to the
/// standard ones.
pub fn caterpillar(n: usize, positions: Option<Vec<Point>>) -> Result<Caterpillar, LinesError> {
    if n < 3 {
        return Err(LinesError::TooSmall { min: 3, got: n });
    }
    let v = positions.unwrap_or_else(|| default_caterpillar_positions(n));
    if v.len() != n - 1 || v.iter().any(|p| p.len() != n) {
        return Err(LinesError::NotACaterpillar);
    }
    let tree = caterpillar_tree(n);
    // internal node order of the tree: root (at v_{n−2}) first, then splits by
    // decreasing size, i.e. v_{n−3}, …, v₀
    let mut ordered = vec![v[n - 2].clone()];
    for j in (0..n - 2).rev() {
        ordered.push(v[j].clone());
    }
    let line = TropicalLine::new(tree, ordered).map_err(|_| LinesError::NotACaterpillar)?;
    // coordinate k (0-based) of vertex j, with coordinate n meaning 0
    let c = |j: usize, k: usize| -> Rational { if k < n { -v[j][k].clone() } else { int(0) } };
    let mut system = vec![linear_form(n, &[(0, c(0, 0)), (1, c(0, 1)), (2, c(0, 2)), (3, c(0, 3) + int(1))])];
    for i in 1..n - 1 {
        system.push(linear_form(n, &[(i, c(i, i)), (i + 1, c(i, i + 1)), (i + 2, c(i, i + 2))]));
    }
    Ok(Caterpillar { line, system })
}

/// A caterpillar with random leaf labels and random positive edge lengths.
pub fn random_caterpillar<R: Rng>(n: usize, rng: &mut R) -> Result<TropicalLine, LinesError> {
    if n < 3 {
        return Err(LinesError::TooSmall { min: 3, got: n });
    }
    let mut labels: Vec<usize> = (0..n).collect();
    labels.shuffle(rng);
    // path order: labels[0], labels[1] at the first internal node, one label
    // per middle node, the last label with leaf n+1 at the root
    let splits: Vec<Split> = (2..n).map(|k| labels[..k].iter().fold(0u64, |a, &l| a | (1u64 << l))).collect();
    let tree = LineTree::from_splits(n, &splits)?;
    let lengths = splits.iter().map(|&s| (s, frac(rng.gen_range(1..=12), rng.gen_range(1..=4)))).collect();
    TropicalLine::from_tree(tree, &lengths)
}

/// A uniformly built random trivalent tree (leaf insertion) with random lengths.
pub fn random_line<R: Rng>(n: usize, rng: &mut R) -> Result<TropicalLine, LinesError> {
    if n < 2 {
        return Err(LinesError::TooSmall { min: 2, got: n });
    }
    // leaves 0..=n, internal nodes appended; start from the star on 0, 1, n
    let mut edges: Vec<(usize, usize)> = vec![(0, n + 1), (1, n + 1), (n, n + 1)];
    let mut next = n + 2;
    for leaf in 2..n {
        let (u, v) = edges.swap_remove(rng.gen_range(0..edges.len()));
        edges.extend([(u, next), (next, v), (leaf, next)]);
        next += 1;
    }
    let mut adj = vec![Vec::new(); next];
    for &(u, v) in &edges {
        adj[u].push(v);
        adj[v].push(u);
    }
    let raw = LineTree { n, adj };
    let tree = LineTree::from_splits(n, &raw.splits())?;
    let lengths = tree.splits().iter().map(|&s| (s, frac(rng.gen_range(1..=12), rng.gen_range(1..=4)))).collect();
    TropicalLine::from_tree(tree, &lengths)
}

pub fn binomial2(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Self-intersection count of a line under A.
pub fn line_sips(line: &TropicalLine, proj: &RationalProjection) -> Result<PlaneCurveImage, LinesError> {
    Ok(project_and_count(&[line.to_curve()], proj)?)
}

fn all_ray_ray(image: &PlaneCurveImage) -> bool {
    image.sips.iter().all(|s| s.pairs.iter().all(|&(a, b)| image.pieces[a].kind == PieceKind::Ray && image.pieces[b].kind == PieceKind::Ray))
}

/// Projection achieving C(n−1, 2) self-intersections of the default
/// caterpillar: start from [[−2,1,0],[1,0,1]] and append one column per
/// dimension, searched over an integer grid (max-norm, then lexicographic)
/// and certified by counting.
pub fn lower_bound_projection(n: usize) -> Result<RationalProjection, LinesError> {
    lower_bound_projection_with_radius(n, 12)
}

pub fn lower_bound_projection_with_radius(n: usize, radius: i64) -> Result<RationalProjection, LinesError> {
    if n < 3 {
        return Err(LinesError::TooSmall { min: 3, got: n });
    }
    let mut a = vec![vec![-2i64, 1, 0], vec![1, 0, 1]];
    let mut candidates: Vec<(i64, i64)> = Vec::new();
    for x in -radius..=radius {
        for y in -radius..=radius {
            candidates.push((x, y));
        }
    }
    candidates.sort_by_key(|&(x, y)| (x.abs().max(y.abs()), x, y));
    for m in 4..=n {
        let line = caterpillar(m, None)?.line;
        let want = binomial2(m - 1);
        let mut found = None;
        for &(x, y) in &candidates {
            let cand = vec![[a[0].clone(), vec![x]].concat(), [a[1].clone(), vec![y]].concat()];
            let Ok(proj) = RationalProjection::new(cand.clone()) else { continue };
            match line_sips(&line, &proj) {
                Ok(img) if img.sip_count() == want && all_ray_ray(&img) => {
                    found = Some(cand);
                    break;
                }
                _ => continue,
            }
        }
        a = found.ok_or(LinesError::ConstructionFailed(radius))?;
    }
    Ok(RationalProjection::new(a)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundCheck {
    pub count: usize,
    pub bound: usize,
    pub ok: bool,
}

/// Compares the self-intersection count of a caterpillar image with C(n−1, 2).
pub fn check_caterpillar_bound(line: &TropicalLine, proj: &RationalProjection) -> Result<BoundCheck, LinesError> {
    if !line.is_caterpillar() {
        return Err(LinesError::NotACaterpillar);
    }
    let count = line_sips(line, proj)?.sip_count();
    let bound = binomial2(line.n() - 1);
    Ok(BoundCheck { count, bound, ok: count <= bound })
}

/// Random 2×n integer matrix of rank 2 with entries in [−r, r].
pub fn random_projection<R: Rng>(n: usize, r: i64, rng: &mut R) -> RationalProjection {
    loop {
        let a: Vec<Vec<i64>> = (0..2).map(|_| (0..n).map(|_| rng.gen_range(-r..=r)).collect()).collect();
        if let Ok(p) = RationalProjection::new(a) {
            return p;
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRow {
    pub n: usize,
    pub trial: usize,
    pub count: usize,
    pub bound: usize,
    pub ok: bool,
}

/// Random caterpillars under random generic projections; non-generic draws
/// are resampled.
pub fn caterpillar_sweep<R: Rng>(n: usize, trials: usize, rng: &mut R) -> Result<Vec<SweepRow>, LinesError> {
    let mut rows = Vec::with_capacity(trials);
    let mut trial = 0;
    while rows.len() < trials {
        let line = random_caterpillar(n, rng)?;
        let proj = random_projection(n, 5, rng);
        match check_caterpillar_bound(&line, &proj) {
            Ok(c) => {
                rows.push(SweepRow { n, trial, count: c.count, bound: c.bound, ok: c.ok });
                trial += 1;
            }
            Err(LinesError::Project(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    Ok(rows)
}

pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut s = String::from("n,trial,count,bound,ok\n");
    for r in rows {
        s.push_str(&format!("{},{},{},{},{}\n", r.n, r.trial, r.count, r.bound, r.ok));
    }
    s
}

/// Products of perturbed copies of linear forms, kept as factors.
#[derive(Clone, Debug)]
pub struct PerturbedProduct {
    /// `factors[i]` are the copies whose product is the i-th polynomial.
    pub factors: Vec<Vec<ValuedPolynomial>>,
    pub products: Vec<ValuedPolynomial>,
    /// One intersection per choice of one copy of each polynomial.
    pub components: Vec<IntersectionReport>,
    pub projection: RationalProjection,
    pub image: PlaneCurveImage,
    pub attempts: usize,
}

impl PerturbedProduct {
    pub fn guaranteed(&self) -> usize {
        let d: usize = self.factors.iter().map(|f| f.len()).product();
        d * d * binomial2(self.projection.source_dim() - 1)
    }
}

/// Builds the union of component curves of the given factored system and
/// projects it; fails on non-generic images.
pub fn factored_image(factors: &[Vec<ValuedPolynomial>], proj: &RationalProjection) -> Result<(Vec<IntersectionReport>, PlaneCurveImage), LinesError> {
    let components = intersect_components(factors)?;
    let curves: Vec<EmbeddedCurve> = components.iter().map(|r| EmbeddedCurve::from_complex(&r.complex)).collect::<Result<_, _>>()?;
    let image = project_and_count(&curves, proj)?;
    Ok((components, image))
}

/// The caterpillar system with every form replaced by d_i copies whose
/// valuations are shifted by distinct small offsets (multiples of 1/1000),
/// projected by the lower-bound projection. Copy 0 is unperturbed.
pub fn perturbed_product_curve<R: Rng>(n: usize, degrees: &[usize], rng: &mut R) -> Result<PerturbedProduct, LinesError> {
    if degrees.len() + 1 != n || degrees.contains(&0) {
        return Err(LinesError::BadDegrees(degrees.to_vec()));
    }
    let base = caterpillar(n, None)?;
    let proj = lower_bound_projection(n)?;
    const ATTEMPTS: usize = 25;
    for attempt in 1..=ATTEMPTS {
        let factors: Vec<Vec<ValuedPolynomial>> = base
            .system
            .iter()
            .zip(degrees)
            .map(|(f, &d)| {
                (0..d)
                    .map(|copy| {
                        if copy == 0 {
                            return f.clone();
                        }
                        let offs: Vec<Rational> = (0..f.terms().len()).map(|_| frac(rng.gen_range(1..=60), 1000)).collect();
                        f.with_valuation_offsets(&offs)
                    })
                    .collect()
            })
            .collect();
        let (components, image) = match factored_image(&factors, &proj) {
            Ok(x) => x,
            Err(LinesError::Project(_)) => continue,
            Err(e) => return Err(e),
        };
        if components.iter().any(|c| !c.is_proper || c.is_empty) {
            continue;
        }
        let products = factors.iter().map(|f| crate::tropoly::tropical_product_all(f)).collect::<Result<Vec<_>, _>>()?;
        return Ok(PerturbedProduct { factors, products, components, projection: proj, image, attempts: attempt });
    }
    Err(LinesError::PerturbationFailed(ATTEMPTS))
}

/// For every ray-ray self-intersection of the base image (source directions
/// u, w), the number of ray-ray self-intersections of the perturbed image
/// between rays with directions u and w; summed over the base points.
pub fn copy_accounting(base: &PlaneCurveImage, perturbed: &PlaneCurveImage) -> usize {
    let dir_pair = |img: &PlaneCurveImage, a: usize, b: usize| {
        let mut v = vec![crate::exactgeom::rational::primitive(&img.pieces[a].source_dir), crate::exactgeom::rational::primitive(&img.pieces[b].source_dir)];
        v.sort();
        v
    };
    let mut total = 0;
    for s in &base.sips {
        let (a, b) = s.pairs[0];
        if base.pieces[a].kind != PieceKind::Ray || base.pieces[b].kind != PieceKind::Ray {
            continue;
        }
        let want = dir_pair(base, a, b);
        total += perturbed
            .sips
            .iter()
            .filter(|t| {
                t.pairs.iter().any(|&(c, d)| {
                    perturbed.pieces[c].kind == PieceKind::Ray && perturbed.pieces[d].kind == PieceKind::Ray && dir_pair(perturbed, c, d) == want
                })
            })
            .count();
    }
    total
}

/// The self-intersections between two components of an image, by kind.
pub fn component_pair_sips(image: &PlaneCurveImage, c1: usize, c2: usize) -> Vec<(PieceKind, PieceKind)> {
    image
        .sips
        .iter()
        .filter_map(|s| {
            s.pairs.iter().find_map(|&(a, b)| {
                let (pa, pb) = (&image.pieces[a], &image.pieces[b]);
                let hit = (pa.component == c1 && pb.component == c2) || (pa.component == c2 && pb.component == c1);
                hit.then(|| {
                    let mut k = [pa.kind, pb.kind];
                    k.sort();
                    (k[0], k[1])
                })
            })
        })
        .collect()
}

/// Two products of two linear forms in three variables, with small
/// valuation perturbations of one factor each, and the projection
/// [[1,0,1],[0,1,2]]. Factor lists are `[[A, B], [C, D]]` with B and D the
/// unperturbed forms; `base` is the line cut out by B and D.
#[derive(Clone, Debug)]
pub struct PerturbedQuadrics {
    pub factors: Vec<Vec<ValuedPolynomial>>,
    pub base: Vec<ValuedPolynomial>,
    pub projection: RationalProjection,
}

pub fn perturbed_quadrics() -> PerturbedQuadrics {
    let e = |k: i64| frac(k, 1000);
    let form = |v: [Rational; 4]| {
        let exps = [vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1], vec![0, 0, 0]];
        let t: Vec<(Vec<i64>, Rational)> = exps.into_iter().zip(v).collect();
        ValuedPolynomial::from_vals(3, &t).expect("distinct exponents")
    };
    let a = form([e(1), e(3), int(1) + e(5), int(3) + e(7)]);
    let b = form([int(0), int(0), int(1), int(3)]);
    let c = form([int(1) + e(11), e(13), e(17), e(1)]);
    let d = form([int(1), int(0), int(0), int(0)]);
    PerturbedQuadrics {
        factors: vec![vec![a, b.clone()], vec![c, d.clone()]],
        base: vec![b, d],
        projection: RationalProjection::new(vec![vec![1, 0, 1], vec![0, 1, 2]]).expect("rank 2"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arrangement::intersect_polynomials;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn schroeder_numbers() {
        let expect = [1u64, 3, 15, 105, 945];
        for (n, &e) in (2..=6).zip(&expect) {
            assert_eq!(count_line_types(n), e);
            let systems = enumerate_split_systems(n);
            assert_eq!(systems.len() as u64, e, "n = {n}");
            for s in systems.iter().take(20) {
                let t = LineTree::from_splits(n, s).unwrap();
                let mut sorted = s.clone();
                sorted.sort();
                assert_eq!(t.splits(), sorted);
            }
        }
    }

    #[test]
    fn caterpillar_five_forms() {
        let c = caterpillar(5, None).unwrap();
        let d = default_caterpillar_positions(5);
        assert_eq!(d[3], vec![int(-3), int(-3), int(-2), int(-1), int(0)]);
        let vals = |f: &ValuedPolynomial| -> Vec<(Vec<i64>, Rational)> { f.terms().iter().map(|t| (t.exp.clone(), t.val.clone())).collect() };
        assert_eq!(
            vals(&c.system[0]),
            vec![(vec![1, 0, 0, 0, 0], int(0)), (vec![0, 1, 0, 0, 0], int(0)), (vec![0, 0, 1, 0, 0], int(0)), (vec![0, 0, 0, 1, 0], int(1))]
        );
        assert_eq!(vals(&c.system[3]), vec![(vec![0, 0, 0, 1, 0], int(1)), (vec![0, 0, 0, 0, 1], int(0)), (vec![0, 0, 0, 0, 0], int(0))]);
        assert!(c.line.is_caterpillar());
        assert!(c.line.balancing_defects().iter().all(|d| d.iter().all(Zero::is_zero)));
    }

    #[test]
    fn caterpillar_system_cuts_out_the_line() {
        for n in 3..=5 {
            let c = caterpillar(n, None).unwrap();
            let r = intersect_polynomials(&c.system).unwrap();
            let mut got: Vec<Point> = r.complex.vertices.clone();
            got.sort();
            let mut want = c.line.positions.clone();
            want.sort();
            assert_eq!(got, want, "n = {n}");
            assert_eq!(r.complex.cells_of_dim(1).count(), 2 * n - 1);
        }
    }

    #[test]
    fn lower_bound_small() {
        for n in 3..=4 {
            let a = lower_bound_projection(n).unwrap();
            let line = caterpillar(n, None).unwrap().line;
            let chk = check_caterpillar_bound(&line, &a).unwrap();
            assert_eq!(chk.count, binomial2(n - 1));
            assert!(chk.ok);
        }
    }

    #[test]
    fn random_trees_are_lines() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for n in 2..=6 {
            for _ in 0..10 {
                let l = random_line(n, &mut rng).unwrap();
                assert!(l.balancing_defects().iter().all(|d| d.iter().all(Zero::is_zero)));
                assert_eq!(l.tree.splits().len(), n - 2);
            }
        }
        for _ in 0..10 {
            assert!(random_caterpillar(5, &mut rng).unwrap().is_caterpillar());
        }
    }

    #[test]
    fn perturbed_products_exceed_the_guarantee() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = perturbed_product_curve(3, &[2, 1], &mut rng).unwrap();
        assert_eq!(p.components.len(), 2);
        assert!(p.image.sip_count() >= p.guaranteed());
        assert_eq!(perturbed_product_curve(3, &[2], &mut rng).err(), Some(LinesError::BadDegrees(vec![2])));
    }

    #[test]
    fn four_lines_in_space() {
        let q = perturbed_quadrics();
        let (components, img) = factored_image(&q.factors, &q.projection).unwrap();
        assert_eq!(components.len(), 4);
        assert_eq!(img.sip_count(), 28);
        let base = intersect_polynomials(&q.base).unwrap();
        let bimg = line_sips_of(&base, &q.projection);
        assert_eq!(bimg.sip_count(), 1);
        assert_eq!(copy_accounting(&bimg, &img), 16);
        let mut kinds = component_pair_sips(&img, 0, 2);
        kinds.sort();
        assert_eq!(kinds, vec![(PieceKind::Edge, PieceKind::Ray), (PieceKind::Edge, PieceKind::Ray), (PieceKind::Ray, PieceKind::Ray), (PieceKind::Ray, PieceKind::Ray)]);
    }

    fn line_sips_of(r: &IntersectionReport, proj: &RationalProjection) -> PlaneCurveImage {
        project_and_count(&[EmbeddedCurve::from_complex(&r.complex).unwrap()], proj).unwrap()
    }

}
