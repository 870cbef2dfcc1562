//! Dense row-major matrices and Householder QR with column pivoting.

use serde::{Serialize, Serializer};

#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Panics if the rows are ragged.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|r| r.len() == cols), "ragged matrix rows");
        Self {
            rows: rows.len(),
            cols,
            data: rows.iter().flatten().copied().collect(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows).map(|i| dot(self.row(i), v)).collect()
    }

    /// `selfᵀ v`.
    pub fn tr_mul_vec(&self, v: &[f64]) -> Vec<f64> {
        assert_eq!(v.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (i, &vi) in v.iter().enumerate() {
            for (o, &x) in out.iter_mut().zip(self.row(i)) {
                *o += x * vi;
            }
        }
        out
    }

    /// Quadratic form `vᵀ self v`.
    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.mul_vec(v))
    }
}

impl Serialize for Matrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        self.to_rows().serialize(serializer)
    }
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `A P = Q R` with `P` chosen greedily so that `|R₀₀| ≥ |R₁₁| ≥ …`.
#[derive(Debug, Clone)]
pub struct PivotedQr {
    /// Upper triangle of R, `p × p`, in pivoted column order.
    r: Matrix,
    /// Householder vectors; reflector `k` acts on rows `k..n`.
    reflectors: Vec<Vec<f64>>,
    /// `perm[k]` is the original column in pivoted position `k`.
    perm: Vec<usize>,
}

impl PivotedQr {
    pub fn new(a: &Matrix) -> Self {
        let (n, p) = (a.rows(), a.cols());
        let steps = n.min(p);
        // Work column-major on a copy.
        let mut cols: Vec<Vec<f64>> = (0..p).map(|j| a.column(j)).collect();
        let mut perm: Vec<usize> = (0..p).collect();
        let mut reflectors = Vec::with_capacity(steps);

        for k in 0..steps {
            let pivot = (k..p)
                .max_by(|&i, &j| norm(&cols[i][k..]).total_cmp(&norm(&cols[j][k..])))
                .expect("nonempty range");
            cols.swap(k, pivot);
            perm.swap(k, pivot);

            let x = &cols[k][k..];
            let alpha = norm(x);
            let mut v = x.to_vec();
            if alpha == 0.0 {
                reflectors.push(Vec::new());
                continue;
            }
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vv = dot(&v, &v);
            for col in cols.iter_mut().skip(k) {
                let seg = &mut col[k..];
                let s = 2.0 * dot(&v, seg) / vv;
                for (c, vi) in seg.iter_mut().zip(&v) {
                    *c -= s * vi;
                }
            }
            // Column k is now (−sign·alpha, 0, …, 0) below row k.
            for c in cols[k][k + 1..].iter_mut() {
                *c = 0.0;
            }
            reflectors.push(v);
        }

        let mut r = Matrix::zeros(steps, p);
        for (j, col) in cols.iter().enumerate() {
            for i in 0..steps.min(j + 1) {
                r.set(i, j, col[i]);
            }
        }
        Self { r, reflectors, perm }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn r_diag(&self) -> Vec<f64> {
        (0..self.r.rows()).map(|k| self.r.get(k, k)).collect()
    }

    /// Overwrites `y` with `Qᵀ y`.
    pub fn apply_qt(&self, y: &mut [f64]) {
        for (k, v) in self.reflectors.iter().enumerate() {
            if v.is_empty() {
                continue;
            }
            let seg = &mut y[k..];
            let s = 2.0 * dot(v, seg) / dot(v, v);
            for (c, vi) in seg.iter_mut().zip(v) {
                *c -= s * vi;
            }
        }
    }

    /// Solves `R z = b` for square, nonsingular `R` by back substitution.
    pub fn solve_r(&self, b: &[f64]) -> Vec<f64> {
        let p = self.r.cols();
        let mut z = vec![0.0; p];
        for i in (0..p).rev() {
            let mut s = b[i];
            for j in i + 1..p {
                s -= self.r.get(i, j) * z[j];
            }
            z[i] = s / self.r.get(i, i);
        }
        z
    }

    /// `R⁻¹` for square, nonsingular `R`.
    pub fn r_inverse(&self) -> Matrix {
        let p = self.r.cols();
        let mut inv = Matrix::zeros(p, p);
        for j in 0..p {
            let mut e = vec![0.0; p];
            e[j] = 1.0;
            for (i, v) in self.solve_r(&e).into_iter().enumerate() {
                inv.set(i, j, v);
            }
        }
        inv
    }
}
