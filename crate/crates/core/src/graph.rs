//! Weighted directed graphs, their Laplacians and the symmetrizing transform.
//!
//! A graph is *symmetrizable* when there are positive node masses `m` with
//! `m_i w_ij = m_j w_ji` on every linked pair. The masses are the left null
//! vector of the Laplacian `L = D - A`, and conjugating by `M^{1/2}` turns the
//! (generally asymmetric) Laplacian into the symmetric matrix
//! `S0 = M^{1/2} L M^{-1/2}` with the same eigenvalues.
//!
//! Masses are normalized so that `sum_i m_i = n`; for undirected graphs this
//! gives unit masses and `S0 == L`. Energies scale with `m`, so this
//! normalization is part of the contract.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, LineErrorKind, PairViolation, Result};

/// Numerical tolerances for graph-level checks.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Tolerances {
    /// Relative tolerance on `S0` asymmetry and on `m_i w_ij = m_j w_ji`.
    pub symmetry: f64,
    /// Residual of `m^T L`, relative to `||L||_inf`.
    pub null_vector: f64,
    /// Absolute tolerance on Laplacian row sums.
    pub row_sum: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            symmetry: 1e-9,
            null_vector: 1e-9,
            row_sum: 1e-12,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub weight: f64,
}

/// A weighted directed graph on nodes `0..n`.
///
/// Weights are strictly positive, there are no self-loops and at most one
/// edge per ordered pair. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<Edge>,
    out: Vec<Vec<(usize, f64)>>,
}

impl WeightedDigraph {
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.from >= n || e.to >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    e.from, e.to
                )));
            }
            if e.from == e.to {
                return Err(Error::InvalidGraph(format!("self-loop at node {}", e.from)));
            }
            if !(e.weight > 0.0) || !e.weight.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.from, e.to, e.weight
                )));
            }
            if !seen.insert((e.from, e.to)) {
                return Err(Error::InvalidGraph(format!(
                    "duplicate edge ({}, {})",
                    e.from, e.to
                )));
            }
        }
        let mut out = vec![Vec::new(); n];
        for e in &edges {
            out[e.from].push((e.to, e.weight));
        }
        Ok(Self { n, edges, out })
    }

    /// Number of nodes.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Out-neighbours of `i` with their link weights.
    pub fn out_edges(&self, i: usize) -> &[(usize, f64)] {
        &self.out[i]
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        self.out
            .get(from)?
            .iter()
            .find(|(j, _)| *j == to)
            .map(|&(_, w)| w)
    }

    /// True when every edge has a reverse edge of exactly the same weight.
    pub fn is_undirected(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.weight(e.to, e.from) == Some(e.weight))
    }

    /// Same topology with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let edges = self
            .edges
            .iter()
            .map(|e| Edge {
                weight: e.weight * factor,
                ..*e
            })
            .collect();
        Self::new(self.n, edges)
    }

    /// Strong connectivity by forward and backward reachability from node 0.
    pub fn is_strongly_connected(&self) -> bool {
        let mut rev = vec![Vec::new(); self.n];
        for e in &self.edges {
            rev[e.to].push(e.from);
        }
        let fwd = |i: usize| self.out[i].iter().map(|&(j, _)| j).collect::<Vec<_>>();
        reaches_all(self.n, fwd) && reaches_all(self.n, |i| rev[i].clone())
    }

    /// Serialize in the canonical edge-list format.
    ///
    /// Weights use the shortest decimal representation that round-trips.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", self.n);
        for e in &self.edges {
            let _ = writeln!(s, "{} {} {:?}", e.from, e.to, e.weight);
        }
        s
    }
}

fn reaches_all<F>(n: usize, neighbours: F) -> bool
where
    F: Fn(usize) -> Vec<usize>,
{
    let mut seen = vec![false; n];
    let mut stack = vec![0];
    seen[0] = true;
    let mut count = 1;
    while let Some(u) = stack.pop() {
        for v in neighbours(u) {
            if !seen[v] {
                seen[v] = true;
                count += 1;
                stack.push(v);
            }
        }
    }
    count == n
}

/// Parse the edge-list format.
///
/// The first non-comment line holds the node count; every following line is
/// `i j w` with 0-based node indices. `#` starts a comment, blank lines are
/// ignored. Errors carry the 1-based line number.
pub fn parse_graph(text: &str) -> Result<WeightedDigraph> {
    let err = |line: usize, kind: LineErrorKind| Error::Parse { line, kind };

    let mut n: Option<usize> = None;
    let mut edges = Vec::new();
    let mut seen = HashSet::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let fields: Vec<&str> = content.split_whitespace().collect();
        let Some(n) = n else {
            if fields.len() != 1 {
                return Err(err(line_no, LineErrorKind::MissingHeader));
            }
            let count: usize = fields[0].parse().map_err(|_| {
                err(
                    line_no,
                    LineErrorKind::Malformed(format!("expected node count, got {:?}", fields[0])),
                )
            })?;
            if count == 0 {
                return Err(err(
                    line_no,
                    LineErrorKind::Malformed("node count must be positive".into()),
                ));
            }
            n = Some(count);
            continue;
        };

        if fields.len() != 3 {
            return Err(err(
                line_no,
                LineErrorKind::Malformed(format!("expected `i j w`, got {} fields", fields.len())),
            ));
        }
        let index = |s: &str| -> Result<usize> {
            s.parse().map_err(|_| {
                err(
                    line_no,
                    LineErrorKind::Malformed(format!("bad node index {s:?}")),
                )
            })
        };
        let from = index(fields[0])?;
        let to = index(fields[1])?;
        let weight: f64 = fields[2].parse().map_err(|_| {
            err(
                line_no,
                LineErrorKind::Malformed(format!("bad weight {:?}", fields[2])),
            )
        })?;
        if from >= n || to >= n {
            return Err(err(line_no, LineErrorKind::NodeOutOfRange));
        }
        if from == to {
            return Err(err(line_no, LineErrorKind::SelfLoop));
        }
        if !(weight > 0.0) || !weight.is_finite() {
            return Err(err(line_no, LineErrorKind::NonPositiveWeight));
        }
        if !seen.insert((from, to)) {
            return Err(err(line_no, LineErrorKind::DuplicateEdge));
        }
        edges.push(Edge { from, to, weight });
    }

    let n = n.ok_or_else(|| err(text.lines().count().max(1), LineErrorKind::MissingHeader))?;
    WeightedDigraph::new(n, edges)
}

impl FromStr for WeightedDigraph {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_graph(s)
    }
}

/// `L = D - A` together with the weighted out-degrees.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    pub matrix: DMatrix<f64>,
    pub degree: DVector<f64>,
}

impl LaplacianMatrix {
    pub fn n(&self) -> usize {
        self.degree.len()
    }

    /// Largest absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        inf_norm(&self.matrix)
    }

    pub fn max_row_sum(&self) -> f64 {
        self.matrix
            .row_iter()
            .map(|r| r.sum().abs())
            .fold(0.0, f64::max)
    }
}

pub fn laplacian(g: &WeightedDigraph) -> LaplacianMatrix {
    let n = g.n();
    let mut matrix = DMatrix::zeros(n, n);
    let mut degree = DVector::zeros(n);
    for e in g.edges() {
        matrix[(e.from, e.to)] = -e.weight;
        degree[e.from] += e.weight;
    }
    for i in 0..n {
        matrix[(i, i)] = degree[i];
    }
    LaplacianMatrix { matrix, degree }
}

pub(crate) fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Positive left null vector `m` of `L` (`m^T L = 0`), normalized to `sum m_i = n`.
///
/// Requires the link pattern to be strongly connected, which makes the null
/// space one-dimensional with a strictly positive representative. The vector
/// is obtained from `L^T m = 0` with one equation replaced by the
/// normalization; strong connectivity makes that system nonsingular.
pub fn left_null_vector(l: &LaplacianMatrix) -> Result<DVector<f64>> {
    left_null_vector_with(l, &Tolerances::default())
}

pub fn left_null_vector_with(l: &LaplacianMatrix, tol: &Tolerances) -> Result<DVector<f64>> {
    let n = l.n();
    if !pattern_strongly_connected(&l.matrix) {
        return Err(Error::NotStronglyConnected(
            "the left null space of the Laplacian is not one-dimensional".into(),
        ));
    }
    if n == 1 {
        return Ok(DVector::from_element(1, 1.0));
    }

    let mut system = l.matrix.transpose();
    let mut rhs = DVector::zeros(n);
    for k in 0..n {
        system[(n - 1, k)] = 1.0;
    }
    rhs[n - 1] = n as f64;
    let m = system
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NotStronglyConnected("null-space system is singular".into()))?;

    if let Some(i) = m.iter().position(|&x| !(x > 0.0)) {
        return Err(Error::NotStronglyConnected(format!(
            "left null vector has non-positive entry m[{i}] = {}",
            m[i]
        )));
    }
    let residual = (m.transpose() * &l.matrix).amax();
    let bound = tol.null_vector * l.inf_norm().max(f64::MIN_POSITIVE) * m.amax().max(1.0);
    if residual > bound {
        return Err(Error::NotStronglyConnected(format!(
            "left null vector residual {residual:.3e} exceeds {bound:.3e}"
        )));
    }
    Ok(m)
}

fn pattern_strongly_connected(m: &DMatrix<f64>) -> bool {
    let n = m.nrows();
    let fwd = |i: usize| (0..n).filter(|&j| j != i && m[(i, j)] != 0.0).collect::<Vec<_>>();
    let bwd = |i: usize| (0..n).filter(|&j| j != i && m[(j, i)] != 0.0).collect::<Vec<_>>();
    reaches_all(n, fwd) && reaches_all(n, bwd)
}

/// Outcome of the pairwise balance test `m_i w_ij = m_j w_ji`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SymmetryCheck {
    pub symmetrizable: bool,
    pub violations: Vec<PairViolation>,
}

pub fn check_symmetrizable(g: &WeightedDigraph, m: &DVector<f64>) -> SymmetryCheck {
    check_symmetrizable_with(g, m, Tolerances::default().symmetry)
}

/// Every edge must have a reverse edge and balance within `rel_tol`.
///
/// Each offending unordered pair is reported once, from its lower index.
pub fn check_symmetrizable_with(
    g: &WeightedDigraph,
    m: &DVector<f64>,
    rel_tol: f64,
) -> SymmetryCheck {
    let mut violations = Vec::new();
    for e in g.edges() {
        let (i, j) = (e.from, e.to);
        match g.weight(j, i) {
            None => violations.push(PairViolation {
                from: i,
                to: j,
                reverse_weight: None,
                relative_imbalance: f64::INFINITY,
            }),
            Some(w_ji) => {
                if i > j {
                    continue;
                }
                let a = m[i] * e.weight;
                let b = m[j] * w_ji;
                let imbalance = (a - b).abs() / a.abs().max(b.abs());
                if imbalance > rel_tol {
                    violations.push(PairViolation {
                        from: i,
                        to: j,
                        reverse_weight: Some(w_ji),
                        relative_imbalance: imbalance,
                    });
                }
            }
        }
    }
    SymmetryCheck {
        symmetrizable: violations.is_empty(),
        violations,
    }
}

/// Normalized masses `m` and the symmetric scaled Laplacian `S0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizationData {
    /// Node masses, `sum m_i = n`.
    pub m: DVector<f64>,
    /// `M^{1/2} L M^{-1/2}`, exactly symmetric after construction.
    pub s0: DMatrix<f64>,
    /// Largest `|S0_ij - S0_ji|` before symmetrization.
    pub asymmetry: f64,
}

impl SymmetrizationData {
    pub fn n(&self) -> usize {
        self.m.len()
    }

    /// `sqrt(m_i)`.
    pub fn sqrt_mass(&self, i: usize) -> f64 {
        self.m[i].sqrt()
    }
}

pub fn scaled_laplacian(l: &LaplacianMatrix, m: &DVector<f64>) -> Result<SymmetrizationData> {
    scaled_laplacian_with(l, m, &Tolerances::default())
}

/// `S0 = M^{1/2} L M^{-1/2}`.
///
/// `m` may carry any positive scale; `S0` depends only on the ratios
/// `m_i / m_j` and the stored masses are renormalized to sum to `n`.
pub fn scaled_laplacian_with(
    l: &LaplacianMatrix,
    m: &DVector<f64>,
    tol: &Tolerances,
) -> Result<SymmetrizationData> {
    let n = l.n();
    if m.len() != n {
        return Err(Error::InvalidParameter(format!(
            "mass vector has length {}, Laplacian has {n} rows",
            m.len()
        )));
    }
    if m.iter().any(|&x| !(x > 0.0) || !x.is_finite()) {
        return Err(Error::InvalidParameter("masses must be positive and finite".into()));
    }
    let sqrt_m: Vec<f64> = m.iter().map(|x| x.sqrt()).collect();
    let mut s0 = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            l.matrix[(i, i)]
        } else {
            sqrt_m[i] * l.matrix[(i, j)] / sqrt_m[j]
        }
    });

    let mut asymmetry: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            asymmetry = asymmetry.max((s0[(i, j)] - s0[(j, i)]).abs());
        }
    }
    let tolerance = tol.symmetry * inf_norm(&s0).max(f64::MIN_POSITIVE);
    if asymmetry > tolerance {
        return Err(Error::SymmetryResidual {
            residual: asymmetry,
            tolerance,
        });
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (s0[(i, j)] + s0[(j, i)]);
            s0[(i, j)] = avg;
            s0[(j, i)] = avg;
        }
    }

    let total: f64 = m.sum();
    let m = m * (n as f64 / total);
    Ok(SymmetrizationData { m, s0, asymmetry })
}

/// Laplacian, masses, balance check and `S0` in one go.
///
/// Undirected graphs take an exact path with unit masses. Directed graphs
/// that fail the balance test are rejected with every violating pair.
pub fn symmetrize(g: &WeightedDigraph, tol: &Tolerances) -> Result<SymmetrizationData> {
    let l = laplacian(g);
    let m = if g.is_undirected() && g.is_strongly_connected() {
        DVector::from_element(g.n(), 1.0)
    } else {
        left_null_vector_with(&l, tol)?
    };
    let check = check_symmetrizable_with(g, &m, tol.symmetry);
    if !check.symmetrizable {
        return Err(Error::NotSymmetrizable(check.violations));
    }
    scaled_laplacian_with(&l, &m, tol)
}
