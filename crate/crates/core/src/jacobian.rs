//! Integer linear algebra over the reduced Laplacian: Smith normal form,
//! the Jacobian group, spanning-tree counts, and class coordinates.

use serde::Serialize;
use thiserror::Error;

use crate::divisor::Divisor;
use crate::graph::MultiGraph;
use crate::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum JacobianError {
    #[error("divisor has degree {0}, expected 0")]
    NonzeroDegree(String),
    #[error("divisor has {found} coefficients, graph has {expected} vertices")]
    WrongLength { expected: usize, found: usize },
}

/// Dense row-major integer matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Scalar> IntMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[&[i64]]) -> Self {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| T::from_i64_exact(x)).collect())
                .collect(),
        )
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows);
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] = out[(i, j)].clone() + a.clone() * other[(k, j)].clone();
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[T]) -> Vec<T> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(T::zero(), |acc, (a, b)| acc + a.clone() * b.clone())
            })
            .collect()
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// row[dst] += f * row[src]
    fn add_row(&mut self, dst: usize, src: usize, f: &T) {
        for j in 0..self.cols {
            let v = self[(src, j)].clone() * f.clone();
            self[(dst, j)] = self[(dst, j)].clone() + v;
        }
    }

    /// col[dst] += f * col[src]
    fn add_col(&mut self, dst: usize, src: usize, f: &T) {
        for i in 0..self.rows {
            let v = self[(i, src)].clone() * f.clone();
            self[(i, dst)] = self[(i, dst)].clone() + v;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            self[(r, j)] = -self[(r, j)].clone();
        }
    }

    /// Exact determinant by fraction-free (Bareiss) elimination.
    pub fn determinant(&self) -> T {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let n = self.rows;
        if n == 0 {
            return T::one();
        }
        let mut a = self.clone();
        let mut sign = T::one();
        let mut prev = T::one();
        for k in 0..n - 1 {
            if a[(k, k)].is_zero() {
                match (k + 1..n).find(|&i| !a[(i, k)].is_zero()) {
                    Some(i) => {
                        a.swap_rows(k, i);
                        sign = -sign;
                    }
                    None => return T::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = a[(i, j)].clone() * a[(k, k)].clone() - a[(i, k)].clone() * a[(k, j)].clone();
                    a[(i, j)] = num / prev.clone();
                }
            }
            prev = a[(k, k)].clone();
        }
        sign * a[(n - 1, n - 1)].clone()
    }
}

impl<T> std::ops::Index<(usize, usize)> for IntMatrix<T> {
    type Output = T;
    fn index(&self, (i, j): (usize, usize)) -> &T {
        &self.data[i * self.cols + j]
    }
}

impl<T> std::ops::IndexMut<(usize, usize)> for IntMatrix<T> {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        &mut self.data[i * self.cols + j]
    }
}

/// `left * m * right = diag`, with unimodular `left`, `right` and a diagonal
/// whose nonzero entries are positive and divide each other in order.
#[derive(Debug, Clone)]
pub struct SmithForm<T> {
    pub diagonal: Vec<T>,
    pub left: IntMatrix<T>,
    pub right: IntMatrix<T>,
}

/// Smith normal form by elimination, pivoting on the entry of least absolute
/// value.
pub fn smith_normal_form<T: Scalar>(m: &IntMatrix<T>) -> SmithForm<T> {
    let (rows, cols) = (m.rows(), m.cols());
    let mut a = m.clone();
    let mut left = IntMatrix::identity(rows);
    let mut right = IntMatrix::identity(cols);
    let steps = rows.min(cols);
    for t in 0..steps {
        'pivot: loop {
            let mut best: Option<(usize, usize)> = None;
            for i in t..rows {
                for j in t..cols {
                    if !a[(i, j)].is_zero()
                        && best.is_none_or(|(bi, bj)| a[(i, j)].abs() < a[(bi, bj)].abs())
                    {
                        best = Some((i, j));
                    }
                }
            }
            let Some((pi, pj)) = best else {
                break 'pivot;
            };
            a.swap_rows(t, pi);
            left.swap_rows(t, pi);
            a.swap_cols(t, pj);
            right.swap_cols(t, pj);

            let mut clean = true;
            for i in t + 1..rows {
                if a[(i, t)].is_zero() {
                    continue;
                }
                let q = -(a[(i, t)].div_floor(&a[(t, t)]));
                a.add_row(i, t, &q);
                left.add_row(i, t, &q);
                clean &= a[(i, t)].is_zero();
            }
            for j in t + 1..cols {
                if a[(t, j)].is_zero() {
                    continue;
                }
                let q = -(a[(t, j)].div_floor(&a[(t, t)]));
                a.add_col(j, t, &q);
                right.add_col(j, t, &q);
                clean &= a[(t, j)].is_zero();
            }
            if !clean {
                continue 'pivot;
            }
            // divisibility: fold any offending row into the pivot row
            let offending = (t + 1..rows)
                .find(|&i| (t + 1..cols).any(|j| !a[(i, j)].is_multiple_of(&a[(t, t)])));
            if let Some(i) = offending {
                a.add_row(t, i, &T::one());
                left.add_row(t, i, &T::one());
                continue 'pivot;
            }
            break 'pivot;
        }
        if a[(t, t)].is_negative() {
            a.negate_row(t);
            left.negate_row(t);
        }
    }
    let diagonal = (0..steps).map(|i| a[(i, i)].clone()).collect();
    SmithForm {
        diagonal,
        left,
        right,
    }
}

/// The Laplacian with row and column `q` removed.
pub fn reduced_laplacian<T: Scalar>(graph: &MultiGraph, q: usize) -> IntMatrix<T> {
    let others: Vec<usize> = (0..graph.vertex_count()).filter(|&v| v != q).collect();
    let n = others.len();
    let mut pos = vec![usize::MAX; graph.vertex_count()];
    for (i, &v) in others.iter().enumerate() {
        pos[v] = i;
    }
    let mut m = IntMatrix::zeros(n, n);
    for (i, &v) in others.iter().enumerate() {
        m[(i, i)] = T::from_count(graph.degree(v));
        for &(w, mult) in graph.neighbors(v) {
            if w != q {
                m[(i, pos[w])] = -T::from_count(mult);
            }
        }
    }
    m
}

/// Kirchhoff: the determinant of any reduced Laplacian.
pub fn spanning_tree_count<T: Scalar>(graph: &MultiGraph) -> T {
    reduced_laplacian::<T>(graph, 0).determinant()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AbelianGroupStructure<T> {
    /// All Smith diagonal entries, including trivial factors of 1.
    pub factors: Vec<T>,
    pub order: T,
}

impl<T: Scalar> AbelianGroupStructure<T> {
    /// Factors greater than 1, as usually displayed.
    pub fn invariant_factors(&self) -> Vec<T> {
        self.factors.iter().filter(|f| !f.is_one()).cloned().collect()
    }
}

pub fn jacobian_structure<T: Scalar>(graph: &MultiGraph) -> AbelianGroupStructure<T> {
    jacobian_structure_at(graph, 0)
}

/// Group structure computed from the Laplacian reduced at `q`.
pub fn jacobian_structure_at<T: Scalar>(graph: &MultiGraph, q: usize) -> AbelianGroupStructure<T> {
    let snf = smith_normal_form(&reduced_laplacian::<T>(graph, q));
    let order = snf.diagonal.iter().fold(T::one(), |a, d| a * d.clone());
    AbelianGroupStructure {
        factors: snf.diagonal,
        order,
    }
}

/// The Jacobian of a graph with a pinned Smith basis, used to map degree-zero
/// divisors to explicit group elements.
#[derive(Debug, Clone)]
pub struct Jacobian<'g, T> {
    graph: &'g MultiGraph,
    snf: SmithForm<T>,
}

impl<'g, T: Scalar> Jacobian<'g, T> {
    pub fn new(graph: &'g MultiGraph) -> Self {
        Jacobian {
            graph,
            snf: smith_normal_form(&reduced_laplacian::<T>(graph, 0)),
        }
    }

    pub fn structure(&self) -> AbelianGroupStructure<T> {
        let order = self.snf.diagonal.iter().fold(T::one(), |a, d| a * d.clone());
        AbelianGroupStructure {
            factors: self.snf.diagonal.clone(),
            order,
        }
    }

    /// The row transform pinning the basis, for provenance.
    pub fn transform(&self) -> &IntMatrix<T> {
        &self.snf.left
    }

    /// Coordinates of the class of `d` against the nontrivial invariant
    /// factors, each reduced into `[0, factor)`. All zero iff `d` is principal.
    pub fn class_coordinates(&self, d: &Divisor<T>) -> Result<Vec<T>, JacobianError> {
        let n = self.graph.vertex_count();
        if d.len() != n {
            return Err(JacobianError::WrongLength {
                expected: n,
                found: d.len(),
            });
        }
        let deg = d.degree();
        if !deg.is_zero() {
            return Err(JacobianError::NonzeroDegree(deg.to_string()));
        }
        let x: Vec<T> = d.coeffs()[1..].to_vec();
        let y = self.snf.left.mul_vec(&x);
        Ok(y
            .into_iter()
            .zip(&self.snf.diagonal)
            .filter(|(_, f)| !f.is_one())
            .map(|(v, f)| v.mod_floor(f))
            .collect())
    }

    pub fn is_principal(&self, d: &Divisor<T>) -> Result<bool, JacobianError> {
        Ok(self.class_coordinates(d)?.iter().all(|c| c.is_zero()))
    }

    /// Order of the class of `d` in the group.
    pub fn class_order(&self, d: &Divisor<T>) -> Result<T, JacobianError> {
        let coords = self.class_coordinates(d)?;
        let factors = self.structure().invariant_factors();
        Ok(coords.iter().zip(&factors).fold(T::one(), |acc, (c, f)| {
            let o = f.clone() / c.gcd(f);
            acc.lcm(&o)
        }))
    }
}
