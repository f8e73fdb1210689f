use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected graph on p nodes as a symmetric binary adjacency matrix with an
/// empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EdgeMatrix {
    p: usize,
    adj: Vec<bool>,
}

impl EdgeMatrix {
    pub fn empty(p: usize) -> Self {
        Self {
            p,
            adj: vec![false; p * p],
        }
    }

    pub fn complete(p: usize) -> Self {
        Self::from_fn(p, |_, _| true)
    }

    /// Builds a graph from a predicate evaluated on pairs `i < j` only.
    pub fn from_fn(p: usize, mut edge: impl FnMut(usize, usize) -> bool) -> Self {
        let mut g = Self::empty(p);
        for i in 0..p {
            for j in i + 1..p {
                if edge(i, j) {
                    g.set(i, j, true);
                }
            }
        }
        g
    }

    /// Reads a 0/1 matrix; rejects asymmetric patterns, other values and a
    /// non-empty diagonal.
    pub fn from_matrix(m: &DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Dimension(format!(
                "edge matrix must be square, got {:?}",
                m.shape()
            )));
        }
        let p = m.nrows();
        let mut g = Self::empty(p);
        for i in 0..p {
            for j in 0..p {
                let v = m[(i, j)];
                if v != 0.0 && v != 1.0 {
                    return Err(Error::argument(format!(
                        "edge entry ({i}, {j}) is {v}, expected 0 or 1"
                    )));
                }
                if i == j && v != 0.0 {
                    return Err(Error::argument(format!(
                        "edge matrix has a self-loop at {i}"
                    )));
                }
                if v != m[(j, i)] {
                    return Err(Error::argument(format!(
                        "edge matrix is asymmetric at ({i}, {j})"
                    )));
                }
                if i < j && v == 1.0 {
                    g.set(i, j, true);
                }
            }
        }
        Ok(g)
    }

    /// Off-diagonal support of a matrix: an edge wherever the entry is non-zero.
    pub fn support_of(m: &DMatrix<f64>) -> Self {
        Self::from_fn(m.nrows(), |i, j| m[(i, j)] != 0.0 || m[(j, i)] != 0.0)
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i * self.p + j]
    }

    pub fn set(&mut self, i: usize, j: usize, present: bool) {
        assert!(i != j || !present, "self-loops are not allowed");
        self.adj[i * self.p + j] = present;
        self.adj[j * self.p + i] = present;
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Edges as pairs `(i, j)` with `i < j`, in row-major order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.p).flat_map(move |i| {
            (i + 1..self.p)
                .filter(move |&j| self.has_edge(i, j))
                .map(move |j| (i, j))
        })
    }

    pub fn neighbours(&self, i: usize) -> Vec<usize> {
        (0..self.p).filter(|&j| self.has_edge(i, j)).collect()
    }

    pub fn complement(&self) -> Self {
        Self::from_fn(self.p, |i, j| !self.has_edge(i, j))
    }

    pub fn is_subgraph_of(&self, other: &EdgeMatrix) -> bool {
        self.p == other.p && self.edges().all(|(i, j)| other.has_edge(i, j))
    }

    pub fn to_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(
            self.p,
            self.p,
            |i, j| if self.has_edge(i, j) { 1.0 } else { 0.0 },
        )
    }
}
