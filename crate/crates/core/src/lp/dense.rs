use super::{LpConfig, LpModel, LpSolution, LpSolver, LpStatus, Relation};
use crate::error::{Error, Result};

const PIVOT_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 50;

/// Two-phase dense tableau simplex.
///
/// Entering columns are picked by the most negative reduced cost; after a
/// run of degenerate pivots the phase switches permanently to Bland's rule,
/// which cannot cycle. Ratio-test ties go to the smallest basic index.
#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSimplex;

/// How an original variable is expressed in nonnegative tableau columns.
#[derive(Debug, Clone, Copy)]
enum ColumnMap {
    /// x = shift + col
    Shifted { col: usize, shift: f64 },
    /// x = shift - col
    Mirrored { col: usize, shift: f64 },
    /// x = pos - neg
    Split { pos: usize, neg: usize },
}

struct StandardForm {
    maps: Vec<ColumnMap>,
    structural: usize,
    // rows over structural columns with rhs >= 0
    rows: Vec<(Vec<f64>, Relation, f64)>,
    costs: Vec<f64>,
}

impl DenseSimplex {
    /// Cell count of the tableau this backend would allocate for `model`.
    pub fn tableau_cells(model: &LpModel) -> usize {
        let n = model.num_vars();
        let bounded = model
            .lower
            .iter()
            .zip(&model.upper)
            .filter(|(l, u)| l.is_finite() && u.is_finite())
            .count();
        let free = model
            .lower
            .iter()
            .zip(&model.upper)
            .filter(|(l, u)| !l.is_finite() && !u.is_finite())
            .count();
        let m = model.num_constraints() + bounded;
        let cols = n + free + 2 * m;
        m.saturating_mul(cols + 1)
    }

    fn standard_form(model: &LpModel) -> StandardForm {
        let mut maps = Vec::with_capacity(model.num_vars());
        let mut ncols = 0usize;
        for (&l, &u) in model.lower.iter().zip(&model.upper) {
            let map = if l.is_finite() {
                ColumnMap::Shifted { col: ncols, shift: l }
            } else if u.is_finite() {
                ColumnMap::Mirrored { col: ncols, shift: u }
            } else {
                ncols += 1;
                ColumnMap::Split { pos: ncols - 1, neg: ncols }
            };
            ncols += 1;
            maps.push(map);
        }

        let mut costs = vec![0.0; ncols];
        for (j, map) in maps.iter().enumerate() {
            let c = model.objective[j];
            match *map {
                ColumnMap::Shifted { col, .. } => costs[col] += c,
                ColumnMap::Mirrored { col, .. } => costs[col] -= c,
                ColumnMap::Split { pos, neg } => {
                    costs[pos] += c;
                    costs[neg] -= c;
                }
            }
        }

        let mut rows = Vec::new();
        let mut push_row = |mut row: Vec<f64>, mut rel: Relation, mut rhs: f64| {
            if rhs < 0.0 {
                row.iter_mut().for_each(|a| *a = -*a);
                rhs = -rhs;
                rel = match rel {
                    Relation::Le => Relation::Ge,
                    Relation::Ge => Relation::Le,
                    Relation::Eq => Relation::Eq,
                };
            }
            rows.push((row, rel, rhs));
        };

        for c in &model.constraints {
            let mut row = vec![0.0; ncols];
            let mut rhs = c.rhs;
            for &(j, a) in &c.coeffs {
                match maps[j] {
                    ColumnMap::Shifted { col, shift } => {
                        row[col] += a;
                        rhs -= a * shift;
                    }
                    ColumnMap::Mirrored { col, shift } => {
                        row[col] -= a;
                        rhs -= a * shift;
                    }
                    ColumnMap::Split { pos, neg } => {
                        row[pos] += a;
                        row[neg] -= a;
                    }
                }
            }
            push_row(row, c.relation, rhs);
        }
        for (j, map) in maps.iter().enumerate() {
            if let ColumnMap::Shifted { col, shift } = *map {
                let u = model.upper[j];
                if u.is_finite() {
                    let mut row = vec![0.0; ncols];
                    row[col] = 1.0;
                    push_row(row, Relation::Le, u - shift);
                }
            }
        }

        StandardForm { maps, structural: ncols, rows, costs }
    }
}

struct Tableau {
    m: usize,
    width: usize, // columns + rhs
    cells: Vec<f64>,
    basis: Vec<usize>,
    // reduced costs, last entry is minus the objective value
    obj: Vec<f64>,
}

impl Tableau {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.cells[i * self.width + j]
    }

    #[inline]
    fn rhs(&self, i: usize) -> f64 {
        self.cells[i * self.width + self.width - 1]
    }

    fn pivot(&mut self, row: usize, col: usize) {
        let w = self.width;
        let p = self.at(row, col);
        {
            let r = &mut self.cells[row * w..(row + 1) * w];
            r.iter_mut().for_each(|a| *a /= p);
            r[col] = 1.0;
        }
        let pivot_row: Vec<f64> = self.cells[row * w..(row + 1) * w].to_vec();
        for i in 0..self.m {
            if i == row {
                continue;
            }
            let f = self.cells[i * w + col];
            if f == 0.0 {
                continue;
            }
            let r = &mut self.cells[i * w..(i + 1) * w];
            for (a, &b) in r.iter_mut().zip(&pivot_row) {
                *a -= f * b;
            }
            r[col] = 0.0;
        }
        let f = self.obj[col];
        if f != 0.0 {
            for (a, &b) in self.obj.iter_mut().zip(&pivot_row) {
                *a -= f * b;
            }
            self.obj[col] = 0.0;
        }
        self.basis[row] = col;
    }

    fn set_costs(&mut self, costs: &[f64]) {
        let w = self.width;
        self.obj = costs.to_vec();
        self.obj.push(0.0);
        for i in 0..self.m {
            let cb = costs[self.basis[i]];
            if cb == 0.0 {
                continue;
            }
            let r = &self.cells[i * w..(i + 1) * w];
            for (a, &b) in self.obj.iter_mut().zip(r) {
                *a -= cb * b;
            }
        }
    }

    /// Runs simplex iterations on the current cost row. `allowed[j]` gates
    /// entering columns. Returns `Ok(true)` when optimal, `Ok(false)` when
    /// unbounded.
    fn optimize(&mut self, allowed: &[bool], tol: f64, budget: &mut usize) -> Result<bool> {
        let cols = self.width - 1;
        let mut bland = false;
        let mut streak = 0usize;
        loop {
            let entering = if bland {
                (0..cols).find(|&j| allowed[j] && self.obj[j] < -tol)
            } else {
                let mut best: Option<(usize, f64)> = None;
                for (j, (&d, &ok)) in self.obj[..cols].iter().zip(allowed).enumerate() {
                    if ok && d < -tol && best.is_none_or(|(_, b)| d < b) {
                        best = Some((j, d));
                    }
                }
                best.map(|(j, _)| j)
            };
            let Some(col) = entering else {
                return Ok(true);
            };

            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let a = self.at(i, col);
                if a > PIVOT_TOL {
                    let ratio = self.rhs(i).max(0.0) / a;
                    leave = match leave {
                        None => Some((i, ratio)),
                        Some((bi, br)) => {
                            if ratio < br - 1e-12
                                || (ratio <= br + 1e-12 && self.basis[i] < self.basis[bi])
                            {
                                Some((i, ratio))
                            } else {
                                Some((bi, br))
                            }
                        }
                    };
                }
            }
            let Some((row, ratio)) = leave else {
                return Ok(false);
            };

            if *budget == 0 {
                return Err(Error::SolverFailure(
                    "dense simplex exceeded its iteration limit".into(),
                ));
            }
            *budget -= 1;

            if ratio <= tol {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(row, col);
        }
    }
}

impl LpSolver for DenseSimplex {
    fn solve_model(&self, model: &LpModel, config: &LpConfig) -> Result<LpSolution> {
        let tol = config.tolerance;
        let sf = Self::standard_form(model);
        let m = sf.rows.len();
        let ns = sf.structural;
        let slacks = sf.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        let artificials = sf.rows.iter().filter(|r| r.1 != Relation::Le).count();
        let cols = ns + slacks + artificials;
        let width = cols + 1;

        let mut t = Tableau {
            m,
            width,
            cells: vec![0.0; m * width],
            basis: vec![0; m],
            obj: Vec::new(),
        };
        let mut next_slack = ns;
        let mut next_art = ns + slacks;
        let mut rhs_scale: f64 = 1.0;
        for (i, (row, rel, rhs)) in sf.rows.iter().enumerate() {
            let r = &mut t.cells[i * width..(i + 1) * width];
            r[..ns].copy_from_slice(row);
            r[cols] = *rhs;
            rhs_scale = rhs_scale.max(rhs.abs());
            match rel {
                Relation::Le => {
                    r[next_slack] = 1.0;
                    t.basis[i] = next_slack;
                    next_slack += 1;
                }
                Relation::Ge => {
                    r[next_slack] = -1.0;
                    next_slack += 1;
                    r[next_art] = 1.0;
                    t.basis[i] = next_art;
                    next_art += 1;
                }
                Relation::Eq => {
                    r[next_art] = 1.0;
                    t.basis[i] = next_art;
                    next_art += 1;
                }
            }
        }
        let is_art = |j: usize| j >= ns + slacks;
        let mut budget = config.max_iterations;

        if artificials > 0 {
            let phase1: Vec<f64> = (0..cols).map(|j| if is_art(j) { 1.0 } else { 0.0 }).collect();
            t.set_costs(&phase1);
            let allowed = vec![true; cols];
            t.optimize(&allowed, tol, &mut budget)?;
            let infeasibility = -t.obj[cols];
            if infeasibility > tol * rhs_scale.max(1.0) {
                return Ok(LpSolution::without_point(LpStatus::Infeasible, model.num_vars()));
            }
            // Drive remaining artificials out of the basis where possible;
            // rows without a usable entry are redundant.
            for i in 0..m {
                if is_art(t.basis[i]) {
                    let mut best: Option<(usize, f64)> = None;
                    for j in 0..ns + slacks {
                        let a = t.at(i, j).abs();
                        if a > PIVOT_TOL && best.is_none_or(|(_, b)| a > b) {
                            best = Some((j, a));
                        }
                    }
                    if let Some((j, _)) = best {
                        t.pivot(i, j);
                    }
                }
            }
        }

        let mut costs = sf.costs.clone();
        costs.resize(cols, 0.0);
        t.set_costs(&costs);
        let allowed: Vec<bool> = (0..cols).map(|j| !is_art(j)).collect();
        if !t.optimize(&allowed, tol, &mut budget)? {
            return Ok(LpSolution::without_point(LpStatus::Unbounded, model.num_vars()));
        }

        let mut col_values = vec![0.0; cols];
        for i in 0..m {
            col_values[t.basis[i]] = t.rhs(i);
        }
        let values: Vec<f64> = sf
            .maps
            .iter()
            .map(|map| match *map {
                ColumnMap::Shifted { col, shift } => shift + col_values[col],
                ColumnMap::Mirrored { col, shift } => shift - col_values[col],
                ColumnMap::Split { pos, neg } => col_values[pos] - col_values[neg],
            })
            .collect();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            objective: model.objective_value(&values),
            values,
        })
    }
}
