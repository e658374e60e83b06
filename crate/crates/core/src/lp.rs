//! Dense two-phase primal simplex with Bland's anti-cycling rule, for the small
//! equality-form programs `max c·x  s.t.  A x = b,  x ≥ 0`.

use crate::error::{Error, Result};

/// Pivot and feasibility tolerance.
pub const EPS: f64 = 1e-9;

const MAX_PIVOTS: usize = 1_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub value: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
    /// equality rows found linearly dependent on the others
    pub redundant_rows: usize,
}

struct Tableau {
    rows: usize,
    width: usize,
    data: Vec<f64>,
    obj: Vec<f64>,
    basis: Vec<usize>,
    active: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn rhs(&self, i: usize) -> f64 {
        self.data[i * self.width + self.width - 1]
    }

    fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.width + j]
    }

    fn pivot(&mut self, p: usize, q: usize) {
        let w = self.width;
        let inv = 1.0 / self.at(p, q);
        for v in &mut self.data[p * w..(p + 1) * w] {
            *v *= inv;
        }
        let pivot_row = self.data[p * w..(p + 1) * w].to_vec();
        for i in 0..self.rows {
            if i == p {
                continue;
            }
            let f = self.data[i * w + q];
            if f != 0.0 {
                for (v, &pr) in self.data[i * w..(i + 1) * w].iter_mut().zip(&pivot_row) {
                    *v -= f * pr;
                }
            }
        }
        let f = self.obj[q];
        if f != 0.0 {
            for (v, &pr) in self.obj.iter_mut().zip(&pivot_row) {
                *v -= f * pr;
            }
        }
        self.basis[p] = q;
        self.pivots += 1;
    }

    /// Sets the objective row to `-cost` reduced against the current basis.
    fn load_objective(&mut self, cost: &[f64]) {
        self.obj = cost.iter().map(|&c| -c).collect();
        self.obj.resize(self.width, 0.0);
        for i in 0..self.rows {
            if !self.active[i] {
                continue;
            }
            let f = self.obj[self.basis[i]];
            if f != 0.0 {
                for j in 0..self.width {
                    self.obj[j] -= f * self.data[i * self.width + j];
                }
            }
        }
    }

    /// Maximizes the loaded objective over columns `0..columns`.
    fn run(&mut self, columns: usize) -> Result<()> {
        loop {
            if self.pivots > MAX_PIVOTS {
                return Err(Error::Lp("pivot limit reached".into()));
            }
            // Bland: lowest-index improving column
            let Some(q) = (0..columns).find(|&j| self.obj[j] < -EPS) else {
                return Ok(());
            };
            let mut best: Option<(f64, usize, usize)> = None;
            for i in 0..self.rows {
                if !self.active[i] {
                    continue;
                }
                let a = self.at(i, q);
                if a > EPS {
                    let ratio = self.rhs(i) / a;
                    let better = match best {
                        None => true,
                        Some((r, _, b)) => {
                            ratio < r - EPS || (ratio <= r + EPS && self.basis[i] < b)
                        }
                    };
                    if better {
                        best = Some((ratio, i, self.basis[i]));
                    }
                }
            }
            let Some((_, p, _)) = best else {
                return Err(Error::Lp("objective is unbounded".into()));
            };
            self.pivot(p, q);
        }
    }
}

/// Maximizes `cost·x` subject to `rows · x = rhs`, `x ≥ 0`.
pub fn maximize(cost: &[f64], rows: &[Vec<f64>], rhs: &[f64]) -> Result<LpSolution> {
    let n = cost.len();
    let m = rows.len();
    if rhs.len() != m || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Shape(
            "constraint matrix and right-hand side disagree".into(),
        ));
    }
    let width = n + m + 1;
    let mut data = vec![0.0; m * width];
    for (i, (row, &b)) in rows.iter().zip(rhs).enumerate() {
        let sign = if b < 0.0 { -1.0 } else { 1.0 };
        let line = &mut data[i * width..(i + 1) * width];
        for (v, &a) in line.iter_mut().zip(row) {
            *v = sign * a;
        }
        line[n + i] = 1.0;
        line[width - 1] = sign * b;
    }
    let mut t = Tableau {
        rows: m,
        width,
        data,
        obj: Vec::new(),
        basis: (n..n + m).collect(),
        active: vec![true; m],
        pivots: 0,
    };

    // phase 1: drive the artificial variables out
    let mut phase1 = vec![0.0; n + m];
    phase1[n..].iter_mut().for_each(|c| *c = -1.0);
    t.load_objective(&phase1);
    t.run(n + m)?;
    let infeasibility = -t.obj[width - 1];
    let scale = 1.0 + rhs.iter().map(|b| b.abs()).fold(0.0, f64::max);
    if infeasibility > EPS * scale {
        return Err(Error::Lp(format!(
            "constraints are infeasible (residual {infeasibility:e})"
        )));
    }
    let mut redundant_rows = 0;
    for i in 0..m {
        if t.basis[i] < n {
            continue;
        }
        match (0..n).find(|&j| t.at(i, j).abs() > EPS) {
            Some(j) => t.pivot(i, j),
            None => {
                t.active[i] = false;
                redundant_rows += 1;
            }
        }
    }

    // phase 2
    let mut phase2 = cost.to_vec();
    phase2.resize(n + m, 0.0);
    t.load_objective(&phase2);
    t.run(n)?;

    let mut x = vec![0.0; n];
    for i in 0..m {
        if t.active[i] && t.basis[i] < n {
            x[t.basis[i]] = t.rhs(i);
        }
    }
    Ok(LpSolution {
        value: t.obj[width - 1],
        x,
        pivots: t.pivots,
        redundant_rows,
    })
}
