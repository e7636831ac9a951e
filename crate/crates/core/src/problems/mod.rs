//! Nonlinear systems `F : C → ℝⁿ` evaluated one component at a time.
//!
//! Three families are provided:
//!
//! * [`ProblemData::Quadratic`]: `F_i(x) = ½⟨x, A⁽ⁱ⁾x⟩ + ⟨b⁽ⁱ⁾, x⟩ + c⁽ⁱ⁾`,
//! * [`ProblemData::Linear`]: `F_i(x) = ⟨a_i, x⟩ − b_i`,
//! * [`ProblemData::Lsd`]: left stochastic decomposition `XᵀX = A` with one equation
//!   `⟨X_{:,i}, X_{:,j}⟩ − A_{ij}` per pair `i ≤ j`; `X ∈ ℝ^{r×m}` is flattened column-major.
//!
//! Indices are zero-based throughout.

mod generate;
mod io;
mod tcc;

pub use generate::{gen_linear_gaussian, gen_linear_simplex, gen_lsd, gen_quadratic, EntryDistribution};
pub use io::{ProblemFile, PROBLEM_FORMAT};
pub use tcc::tcc_estimate;
pub(crate) use tcc::ball_point;

use nalgebra::DMatrix;

use crate::dgf::dot;
use crate::error::{check_len, Error, Result};

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_len(rows * cols, data.len())?;
        Ok(Matrix { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for row in rows {
            check_len(cols, row.len())?;
            data.extend_from_slice(row);
        }
        Ok(Matrix { rows: rows.len(), cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.rows).map(|i| dot(self.row(i), x)).collect()
    }

    /// `xᵀ M x`.
    fn quadratic_form(&self, x: &[f64]) -> f64 {
        (0..self.rows).map(|i| x[i] * dot(self.row(i), x)).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProblemKind {
    QuadraticSystem,
    LinearSimplexSystem,
    LsdProblem,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProblemData {
    Quadratic { a: Vec<Matrix>, b: Vec<Vec<f64>>, c: Vec<f64> },
    Linear { a: Matrix, b: Vec<f64> },
    Lsd { r: usize, m: usize, a: Matrix, pairs: Vec<(usize, usize)> },
}

/// Parameters and seed an instance was generated from.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorInfo {
    pub seed: u64,
    pub params: GeneratorParams,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorParams {
    Quadratic { n: usize, d: usize, s: usize },
    LinearSimplex { n: usize, d: usize, dist: EntryDistribution },
    LinearGaussian { n: usize, d: usize },
    Lsd { r: usize, m: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearProblem {
    data: ProblemData,
    n: usize,
    d: usize,
    known_solution: Option<Vec<f64>>,
    generator: Option<GeneratorInfo>,
}

/// Upper-triangular pair list `(i, j)`, `i ≤ j < m`, row by row.
pub fn lsd_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect()
}

impl NonlinearProblem {
    /// Validates shapes and builds the problem.
    pub fn new(data: ProblemData, known_solution: Option<Vec<f64>>) -> Result<Self> {
        let (n, d) = match &data {
            ProblemData::Quadratic { a, b, c } => {
                let n = a.len();
                if n == 0 {
                    return Err(Error::InvalidParameter("quadratic system has no equations".into()));
                }
                let d = a[0].rows();
                check_len(n, b.len())?;
                check_len(n, c.len())?;
                for (ai, bi) in a.iter().zip(b) {
                    check_len(d, ai.rows())?;
                    check_len(d, ai.cols())?;
                    check_len(d, bi.len())?;
                }
                (n, d)
            }
            ProblemData::Linear { a, b } => {
                check_len(a.rows(), b.len())?;
                (a.rows(), a.cols())
            }
            ProblemData::Lsd { r, m, a, pairs } => {
                check_len(*m, a.rows())?;
                check_len(*m, a.cols())?;
                for i in 0..*m {
                    for j in 0..i {
                        if (a.get(i, j) - a.get(j, i)).abs() > 1e-12 {
                            return Err(Error::InvalidParameter(format!("A is not symmetric at ({i}, {j})")));
                        }
                    }
                }
                if let Some(&(i, j)) = pairs.iter().find(|&&(i, j)| i > j || j >= *m) {
                    return Err(Error::InvalidParameter(format!("invalid equation pair ({i}, {j})")));
                }
                (pairs.len(), r * m)
            }
        };
        if n == 0 || d == 0 {
            return Err(Error::InvalidParameter("problem dimensions must be positive".into()));
        }
        if let Some(x) = &known_solution {
            check_len(d, x.len())?;
        }
        Ok(NonlinearProblem { data, n, d, known_solution, generator: None })
    }

    pub fn with_generator(mut self, info: GeneratorInfo) -> Self {
        self.generator = Some(info);
        self
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn data(&self) -> &ProblemData {
        &self.data
    }

    pub fn kind(&self) -> ProblemKind {
        match self.data {
            ProblemData::Quadratic { .. } => ProblemKind::QuadraticSystem,
            ProblemData::Linear { .. } => ProblemKind::LinearSimplexSystem,
            ProblemData::Lsd { .. } => ProblemKind::LsdProblem,
        }
    }

    pub fn known_solution(&self) -> Option<&[f64]> {
        self.known_solution.as_deref()
    }

    pub fn generator(&self) -> Option<&GeneratorInfo> {
        self.generator.as_ref()
    }

    /// Magnitude of the data, used to scale consistency tolerances.
    pub fn data_scale(&self) -> f64 {
        match &self.data {
            ProblemData::Quadratic { c, .. } => c.iter().fold(0.0, |m, v| m.max(v.abs())),
            ProblemData::Linear { a, b } => a.max_abs().max(b.iter().fold(0.0, |m, v| m.max(v.abs()))),
            ProblemData::Lsd { a, .. } => a.max_abs(),
        }
    }

    fn check(&self, i: usize, x: &[f64]) -> Result<()> {
        if i >= self.n {
            return Err(Error::IndexOutOfRange { index: i, len: self.n });
        }
        check_len(self.d, x.len())
    }

    /// `F_i(x)`.
    pub fn eval_component(&self, i: usize, x: &[f64]) -> Result<f64> {
        self.check(i, x)?;
        Ok(self.eval_unchecked(i, x))
    }

    fn eval_unchecked(&self, i: usize, x: &[f64]) -> f64 {
        match &self.data {
            ProblemData::Quadratic { a, b, c } => 0.5 * a[i].quadratic_form(x) + dot(&b[i], x) + c[i],
            ProblemData::Linear { a, b } => dot(a.row(i), x) - b[i],
            ProblemData::Lsd { r, a, pairs, .. } => {
                let (p, q) = pairs[i];
                dot(column(x, *r, p), column(x, *r, q)) - a.get(p, q)
            }
        }
    }

    /// `∇F_i(x)`.
    pub fn grad_component(&self, i: usize, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.d];
        self.grad_component_into(i, x, &mut out)?;
        Ok(out)
    }

    pub fn grad_component_into(&self, i: usize, x: &[f64], out: &mut [f64]) -> Result<()> {
        self.check(i, x)?;
        check_len(self.d, out.len())?;
        match &self.data {
            ProblemData::Quadratic { a, b, .. } => {
                // ½(A + Aᵀ)x + b
                let ai = &a[i];
                out.copy_from_slice(&b[i]);
                for r in 0..ai.rows() {
                    let row = ai.row(r);
                    out[r] += 0.5 * dot(row, x);
                    let xr = 0.5 * x[r];
                    for (o, &v) in out.iter_mut().zip(row) {
                        *o += xr * v;
                    }
                }
            }
            ProblemData::Linear { a, .. } => out.copy_from_slice(a.row(i)),
            ProblemData::Lsd { r, pairs, .. } => {
                out.iter_mut().for_each(|v| *v = 0.0);
                let (p, q) = pairs[i];
                let r = *r;
                if p == q {
                    for k in 0..r {
                        out[p * r + k] = 2.0 * x[p * r + k];
                    }
                } else {
                    for k in 0..r {
                        out[p * r + k] = x[q * r + k];
                        out[q * r + k] = x[p * r + k];
                    }
                }
            }
        }
        Ok(())
    }

    /// Columns of `X` the gradient of component `i` is supported on (LSD only).
    pub fn gradient_columns(&self, i: usize) -> Option<Vec<usize>> {
        match &self.data {
            ProblemData::Lsd { pairs, .. } => {
                let (p, q) = pairs[i];
                Some(if p == q { vec![p] } else { vec![p, q] })
            }
            _ => None,
        }
    }

    /// `F(x)`.
    pub fn value(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.d, x.len())?;
        Ok((0..self.n).map(|i| self.eval_unchecked(i, x)).collect())
    }

    /// Residual `r = −F(x)`.
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.n];
        self.residual_into(x, &mut out)?;
        Ok(out)
    }

    pub fn residual_into(&self, x: &[f64], out: &mut [f64]) -> Result<()> {
        check_len(self.d, x.len())?;
        check_len(self.n, out.len())?;
        for (i, o) in out.iter_mut().enumerate() {
            *o = -self.eval_unchecked(i, x);
        }
        Ok(())
    }

    /// Exact linearization remainder `F_i(x) + ⟨∇F_i(x), y − x⟩ − F_i(y)`, evaluated in closed
    /// form from the second-order term so that it carries no cancellation error.
    pub fn linearization_error(&self, i: usize, x: &[f64], y: &[f64]) -> Result<f64> {
        self.check(i, x)?;
        check_len(self.d, y.len())?;
        let h: Vec<f64> = y.iter().zip(x).map(|(a, b)| a - b).collect();
        Ok(match &self.data {
            ProblemData::Quadratic { a, .. } => -0.5 * a[i].quadratic_form(&h),
            ProblemData::Linear { .. } => 0.0,
            ProblemData::Lsd { r, pairs, .. } => {
                let (p, q) = pairs[i];
                -dot(column(&h, *r, p), column(&h, *r, q))
            }
        })
    }

    /// Dense Jacobian `F'(x)` (n × d), assembled row by row from the component gradients.
    pub fn jacobian(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        check_len(self.d, x.len())?;
        let mut jac = DMatrix::zeros(self.n, self.d);
        let mut g = vec![0.0; self.d];
        for i in 0..self.n {
            self.grad_component_into(i, x, &mut g)?;
            for (j, &v) in g.iter().enumerate() {
                jac[(i, j)] = v;
            }
        }
        Ok(jac)
    }

    /// Simplex block size of the natural constraint set: `d` for linear simplex systems,
    /// `r` for LSD, `None` for quadratic systems and generated Gaussian linear systems.
    pub fn simplex_block(&self) -> Option<usize> {
        match &self.data {
            ProblemData::Quadratic { .. } => None,
            ProblemData::Linear { .. } => match self.generator {
                Some(GeneratorInfo { params: GeneratorParams::LinearGaussian { .. }, .. }) => None,
                _ => Some(self.d),
            },
            ProblemData::Lsd { r, .. } => Some(*r),
        }
    }
}

fn column(x: &[f64], r: usize, j: usize) -> &[f64] {
    &x[j * r..(j + 1) * r]
}
