//! Uniform radial grid on `[0, r_M]`, second-order stencils and the
//! tridiagonal solver for the per-mode relation `-mu d + r^2 d'' + a1 r d' = c`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// `M` uniform intervals on `[0, r_max]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    r_max: f64,
    intervals: usize,
}

impl RadialGrid {
    pub fn new(r_max: f64, intervals: usize) -> Result<Self> {
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(invalid("r_max", "must be a positive finite number"));
        }
        if intervals < 4 {
            return Err(invalid("M", "at least 4 radial intervals are required"));
        }
        Ok(Self { r_max, intervals })
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    /// Number of intervals `M`.
    pub fn intervals(&self) -> usize {
        self.intervals
    }

    /// Number of nodes, `M + 1`.
    pub fn len(&self) -> usize {
        self.intervals + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dr(&self) -> f64 {
        self.r_max / self.intervals as f64
    }

    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        if j == self.intervals {
            self.r_max
        } else {
            j as f64 * self.dr()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.node(j)).collect()
    }

    /// Same domain with twice as many intervals.
    pub fn refined(&self) -> Self {
        Self {
            r_max: self.r_max,
            intervals: 2 * self.intervals,
        }
    }
}

/// Values of a radial function at the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialProfile {
    grid: RadialGrid,
    values: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: RadialGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(invalid("values", "length must be M + 1"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(invalid("values", "profile values must be finite"));
        }
        Ok(Self { grid, values })
    }

    pub fn zeros(grid: RadialGrid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.len()],
        }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().into_iter().map(f).collect(),
        }
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn satisfies_dirichlet(&self) -> bool {
        self.values[0] == 0.0 && self.values[self.grid.intervals] == 0.0
    }
}

/// First derivative: central differences inside, one-sided second-order
/// stencils at both ends.
pub fn d_dr(p: &RadialProfile) -> RadialProfile {
    RadialProfile {
        grid: p.grid,
        values: first_derivative(&p.values, p.grid.dr()),
    }
}

pub fn d2_dr2(p: &RadialProfile) -> RadialProfile {
    RadialProfile {
        grid: p.grid,
        values: second_derivative(&p.values, p.grid.dr()),
    }
}

pub fn first_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let m = v.len() - 1;
    let mut out = vec![0.0; v.len()];
    out[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h);
    for j in 1..m {
        out[j] = (v[j + 1] - v[j - 1]) / (2.0 * h);
    }
    out[m] = (3.0 * v[m] - 4.0 * v[m - 1] + v[m - 2]) / (2.0 * h);
    out
}

pub fn second_derivative(v: &[f64], h: f64) -> Vec<f64> {
    let m = v.len() - 1;
    let h2 = h * h;
    let mut out = vec![0.0; v.len()];
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / h2;
    for j in 1..m {
        out[j] = (v[j + 1] - 2.0 * v[j] + v[j - 1]) / h2;
    }
    out[m] = (2.0 * v[m] - 5.0 * v[m - 1] + 4.0 * v[m - 2] - v[m - 3]) / h2;
    out
}

/// Factored discrete operator `-mu d + r^2 d'' + a1 r d'` with Dirichlet ends.
///
/// At node `j` (`r = j dr`) the central stencils give the row
/// `(j^2 - a1 j/2, -2 j^2 - mu, j^2 + a1 j/2)`, independent of `dr`.
#[derive(Clone, Debug)]
pub struct ModeOperator {
    mu: f64,
    a1: f64,
    intervals: usize,
    // forward-eliminated upper coefficients and pivots, interior rows only
    upper: Vec<f64>,
    pivots: Vec<f64>,
}

impl ModeOperator {
    pub fn new(mu: f64, a1: f64, grid: &RadialGrid, mode: impl Fn() -> String) -> Result<Self> {
        let m = grid.intervals();
        let rows = m - 1;
        let mut upper = vec![0.0; rows];
        let mut pivots = vec![0.0; rows];
        for row in 0..rows {
            let (lo, diag, up) = Self::row_entries(mu, a1, row + 1);
            let pivot = if row == 0 { diag } else { diag - lo * upper[row - 1] };
            let scale = lo.abs().max(diag.abs()).max(up.abs()).max(1.0);
            let usable = pivot.abs() >= 1e-14 * scale;
            if !usable {
                return Err(Error::SingularSystem {
                    mode: mode(),
                    row: row + 1,
                    pivot,
                });
            }
            pivots[row] = pivot;
            upper[row] = up / pivot;
        }
        Ok(Self {
            mu,
            a1,
            intervals: m,
            upper,
            pivots,
        })
    }

    #[inline]
    fn row_entries(mu: f64, a1: f64, j: usize) -> (f64, f64, f64) {
        let j = j as f64;
        (j * j - 0.5 * a1 * j, -2.0 * j * j - mu, j * j + 0.5 * a1 * j)
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn a1(&self) -> f64 {
        self.a1
    }

    /// Solves for `d` with `d[0] = d[M] = 0`; `rhs` end values are ignored.
    pub fn solve_into(&self, rhs: &[f64], out: &mut [f64]) {
        let m = self.intervals;
        debug_assert_eq!(rhs.len(), m + 1);
        out[0] = 0.0;
        out[m] = 0.0;
        // forward sweep stores the modified right-hand side in `out`
        for row in 0..m - 1 {
            let j = row + 1;
            let lo = Self::row_entries(self.mu, self.a1, j).0;
            let prev = if row == 0 { 0.0 } else { out[j - 1] };
            out[j] = (rhs[j] - lo * prev) / self.pivots[row];
        }
        for row in (0..m - 2).rev() {
            let j = row + 1;
            out[j] -= self.upper[row] * out[j + 1];
        }
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; rhs.len()];
        self.solve_into(rhs, &mut out);
        out
    }

    /// Discrete forward operator at interior nodes; end values are 0.
    pub fn apply(&self, d: &[f64]) -> Vec<f64> {
        let m = self.intervals;
        let mut out = vec![0.0; m + 1];
        for j in 1..m {
            let (lo, diag, up) = Self::row_entries(self.mu, self.a1, j);
            out[j] = lo * d[j - 1] + diag * d[j] + up * d[j + 1];
        }
        out
    }
}

/// Solves `-mu d + r^2 d'' + a1 r d' = c`, `d(0) = d(r_M) = 0`.
pub fn solve_mode_bvp(mu: f64, a1: f64, c: &RadialProfile) -> Result<RadialProfile> {
    let op = ModeOperator::new(mu, a1, &c.grid, || format!("mu={mu}, a1={a1}"))?;
    Ok(RadialProfile {
        grid: c.grid,
        values: op.solve(&c.values),
    })
}
