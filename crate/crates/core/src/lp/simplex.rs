use log::{debug, trace};

use super::{LinearProgram, SolveOptions, SolveReport, SolveStatus};

const PIVOT_TOL: f64 = 1e-11;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGENERATE_LIMIT: usize = 50;

#[derive(Debug, Clone, Copy, PartialEq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable held at zero.
    Free,
}

/// Dense tableau over `[structural | logical | artificial]` columns.
///
/// Row `i` of the original system reads `a_i . x - r_i + s_i * art_i = 0`
/// where `r_i` is the row activity bounded by the row range.
struct Tableau {
    m: usize,
    n: usize,
    t: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    d: Vec<f64>,
    /// Original columns, sparse, for recomputing basic values.
    cols: Vec<Vec<(usize, f64)>>,
}

impl Tableau {
    fn reduced_costs(&mut self, cost: &[f64]) {
        self.d = cost.to_vec();
        for i in 0..self.m {
            let cb = cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * self.n..(i + 1) * self.n];
                for (dj, &a) in self.d.iter_mut().zip(row) {
                    *dj -= cb * a;
                }
            }
        }
        for &b in &self.basis {
            self.d[b] = 0.0;
        }
    }

    fn pivot(&mut self, r: usize, j: usize) {
        let n = self.n;
        let p = self.t[r * n + j];
        {
            let row = &mut self.t[r * n..(r + 1) * n];
            for v in row.iter_mut() {
                *v /= p;
            }
            row[j] = 1.0;
        }
        let (before, rest) = self.t.split_at_mut(r * n);
        let (prow, after) = rest.split_at_mut(n);
        for other in before.chunks_exact_mut(n).chain(after.chunks_exact_mut(n)) {
            let f = other[j];
            if f != 0.0 {
                for (v, &a) in other.iter_mut().zip(prow.iter()) {
                    *v -= f * a;
                }
                other[j] = 0.0;
            }
        }
        let f = self.d[j];
        if f != 0.0 {
            for (v, &a) in self.d.iter_mut().zip(prow.iter()) {
                *v -= f * a;
            }
            self.d[j] = 0.0;
        }
        self.basis[r] = j;
    }

    /// Recomputes basic values from the original columns by dense elimination.
    fn refresh_basic_values(&mut self) {
        let m = self.m;
        if m == 0 {
            return;
        }
        let mut b = vec![0.0; m * m];
        for (k, &col) in self.basis.iter().enumerate() {
            for &(i, a) in &self.cols[col] {
                b[i * m + k] = a;
            }
        }
        let mut rhs = vec![0.0; m];
        for (j, s) in self.state.iter().enumerate() {
            if *s != State::Basic && self.x[j] != 0.0 {
                for &(i, a) in &self.cols[j] {
                    rhs[i] -= a * self.x[j];
                }
            }
        }
        let Some(sol) = dense_solve(&mut b, &mut rhs, m) else {
            debug!("basis refresh skipped: singular basis matrix");
            return;
        };
        for (k, &col) in self.basis.iter().enumerate() {
            self.x[col] = sol[k];
        }
    }

    /// Runs primal simplex iterations on `cost`. Returns the final status
    /// (never `Infeasible`).
    fn run(&mut self, cost: &[f64], opts: &SolveOptions, iters: &mut usize) -> SolveStatus {
        self.reduced_costs(cost);
        let dtol = opts.tol;
        let mut degenerate = 0usize;
        loop {
            if *iters >= opts.max_iters {
                return SolveStatus::IterationLimit;
            }
            let bland = degenerate >= DEGENERATE_LIMIT;
            let mut enter: Option<(usize, f64)> = None;
            let mut best = 0.0;
            for j in 0..self.n {
                let dj = self.d[j];
                let dir = match self.state[j] {
                    State::Basic => continue,
                    _ if self.lower[j] == self.upper[j] => continue,
                    State::AtLower if dj < -dtol => 1.0,
                    State::AtUpper if dj > dtol => -1.0,
                    State::Free if dj.abs() > dtol => -dj.signum(),
                    _ => continue,
                };
                if bland {
                    enter = Some((j, dir));
                    break;
                }
                if dj.abs() > best {
                    best = dj.abs();
                    enter = Some((j, dir));
                }
            }
            let Some((j, dir)) = enter else {
                return SolveStatus::Optimal;
            };

            let ratios: Vec<(usize, f64, f64, f64)> = (0..self.m)
                .filter_map(|i| {
                    let alpha = dir * self.t[i * self.n + j];
                    let b = self.basis[i];
                    if alpha > PIVOT_TOL && self.lower[b].is_finite() {
                        Some((i, ((self.x[b] - self.lower[b]) / alpha).max(0.0), self.lower[b], alpha.abs()))
                    } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                        Some((i, ((self.upper[b] - self.x[b]) / -alpha).max(0.0), self.upper[b], alpha.abs()))
                    } else {
                        None
                    }
                })
                .collect();
            let min_ratio = ratios.iter().map(|r| r.1).fold(f64::INFINITY, f64::min);
            let flip = self.upper[j] - self.lower[j];
            let (theta, leave) = if flip <= min_ratio {
                (flip, None)
            } else {
                // among near-ties prefer the largest pivot, then the lowest basic index
                let mut pick: Option<&(usize, f64, f64, f64)> = None;
                for cand in ratios.iter().filter(|r| r.1 <= min_ratio + 1e-12) {
                    let replace = match pick {
                        None => true,
                        Some(p) => {
                            let (bc, bp) = (self.basis[cand.0], self.basis[p.0]);
                            if bland {
                                bc < bp
                            } else {
                                cand.3 > p.3 || (cand.3 == p.3 && bc < bp)
                            }
                        }
                    };
                    if replace {
                        pick = Some(cand);
                    }
                }
                (min_ratio, pick.map(|&(i, _, bound, _)| (i, bound)))
            };
            if theta.is_infinite() {
                return SolveStatus::Unbounded;
            }
            *iters += 1;
            if theta <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }

            if theta != 0.0 {
                for i in 0..self.m {
                    let a = self.t[i * self.n + j];
                    if a != 0.0 {
                        self.x[self.basis[i]] -= dir * theta * a;
                    }
                }
            }
            match leave {
                None => {
                    // bound flip
                    if dir > 0.0 {
                        self.x[j] = self.upper[j];
                        self.state[j] = State::AtUpper;
                    } else {
                        self.x[j] = self.lower[j];
                        self.state[j] = State::AtLower;
                    }
                    trace!("flip {j}");
                }
                Some((r, bound)) => {
                    let b = self.basis[r];
                    self.x[j] += dir * theta;
                    self.x[b] = bound;
                    self.state[b] = if bound == self.lower[b] { State::AtLower } else { State::AtUpper };
                    self.state[j] = State::Basic;
                    self.pivot(r, j);
                    trace!("pivot row {r}: {j} enters, {b} leaves");
                }
            }
        }
    }
}

/// Gaussian elimination with partial pivoting; `a` is row-major `m x m`.
fn dense_solve(a: &mut [f64], rhs: &mut [f64], m: usize) -> Option<Vec<f64>> {
    for k in 0..m {
        let p = (k..m).max_by(|&i, &l| a[i * m + k].abs().total_cmp(&a[l * m + k].abs()).then(l.cmp(&i)))?;
        if a[p * m + k].abs() < 1e-14 {
            return None;
        }
        if p != k {
            for c in 0..m {
                a.swap(k * m + c, p * m + c);
            }
            rhs.swap(k, p);
        }
        let piv = a[k * m + k];
        for i in k + 1..m {
            let f = a[i * m + k] / piv;
            if f != 0.0 {
                for c in k..m {
                    a[i * m + c] -= f * a[k * m + c];
                }
                rhs[i] -= f * rhs[k];
            }
        }
    }
    let mut x = vec![0.0; m];
    for k in (0..m).rev() {
        let mut s = rhs[k];
        for c in k + 1..m {
            s -= a[k * m + c] * x[c];
        }
        x[k] = s / a[k * m + k];
    }
    Some(x)
}

fn initial_value(lower: f64, upper: f64) -> (f64, State) {
    if lower.is_finite() {
        (lower, State::AtLower)
    } else if upper.is_finite() {
        (upper, State::AtUpper)
    } else {
        (0.0, State::Free)
    }
}

/// Solves `lp` with a two-phase bounded-variable primal simplex.
///
/// Entering variables are chosen by largest reduced cost (lowest index on
/// ties); after a run of degenerate pivots the rule falls back to Bland's.
/// The result is a deterministic function of the input.
pub fn solve(lp: &LinearProgram, opts: &SolveOptions) -> SolveReport {
    let ns = lp.num_variables();
    let m = lp.num_constraints();
    let fail = |status| SolveReport {
        status,
        objective: f64::NAN,
        assignment: vec![0.0; ns],
        iterations: 0,
        infeasible_rows: Vec::new(),
    };
    if let Err(e) = lp.validate() {
        debug!("rejecting malformed LP: {e}");
        return fail(SolveStatus::Infeasible);
    }

    let mut x = Vec::with_capacity(ns + 2 * m);
    let mut state = Vec::with_capacity(ns + 2 * m);
    let mut lower: Vec<f64> = lp.variables.iter().map(|v| v.lower).collect();
    let mut upper: Vec<f64> = lp.variables.iter().map(|v| v.upper).collect();
    for v in &lp.variables {
        let (val, st) = initial_value(v.lower, v.upper);
        x.push(val);
        state.push(st);
    }
    let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ns];
    for (i, row) in lp.constraints.iter().enumerate() {
        for &(j, a) in &row.coeffs {
            cols[j].push((i, a));
        }
    }

    // logical columns
    let mut activity = Vec::with_capacity(m);
    for (i, row) in lp.constraints.iter().enumerate() {
        let act = row.activity(&x);
        activity.push(act);
        lower.push(row.lower);
        upper.push(row.upper);
        cols.push(vec![(i, -1.0)]);
        let (val, st) = if act < row.lower - opts.tol * row.lower.abs().max(1.0) {
            (row.lower, State::AtLower)
        } else if act > row.upper + opts.tol * row.upper.abs().max(1.0) {
            (row.upper, State::AtUpper)
        } else {
            (act.clamp(row.lower, row.upper), State::Basic)
        };
        x.push(val);
        state.push(st);
    }
    // artificial columns where the logical could not start basic
    let mut art_row = Vec::new();
    let mut basis = vec![0usize; m];
    let mut sign = vec![-1.0; m];
    for i in 0..m {
        if state[ns + i] == State::Basic {
            basis[i] = ns + i;
        } else {
            let gap = x[ns + i] - activity[i];
            let s = if gap >= 0.0 { 1.0 } else { -1.0 };
            let col = x.len();
            x.push(gap.abs());
            state.push(State::Basic);
            lower.push(0.0);
            upper.push(f64::INFINITY);
            cols.push(vec![(i, s)]);
            basis[i] = col;
            sign[i] = s;
            art_row.push((col, i));
        }
    }
    let n = x.len();
    let mut t = vec![0.0; m * n];
    for (i, row) in lp.constraints.iter().enumerate() {
        let inv = 1.0 / sign[i];
        let r = &mut t[i * n..(i + 1) * n];
        for &(j, a) in &row.coeffs {
            r[j] += a * inv;
        }
        r[ns + i] = -inv;
    }
    for &(col, i) in &art_row {
        t[i * n + col] = 1.0;
    }

    let mut tab = Tableau { m, n, t, lower, upper, x, state, basis, d: Vec::new(), cols };
    let mut iters = 0usize;

    if !art_row.is_empty() {
        let mut c1 = vec![0.0; n];
        for &(col, _) in &art_row {
            c1[col] = 1.0;
        }
        let status = tab.run(&c1, opts, &mut iters);
        tab.refresh_basic_values();
        if status == SolveStatus::IterationLimit {
            return SolveReport { iterations: iters, ..fail(status) };
        }
        let infeasible_rows: Vec<usize> = art_row
            .iter()
            .filter(|&&(col, i)| {
                let scale = lp.constraints[i].lower.abs().max(lp.constraints[i].upper.abs());
                let scale = if scale.is_finite() { scale.max(1.0) } else { 1.0 };
                tab.x[col] > 1e3 * opts.tol * scale
            })
            .map(|&(_, i)| i)
            .collect();
        if !infeasible_rows.is_empty() {
            debug!("phase 1 ended with {} unsatisfied rows after {iters} iterations", infeasible_rows.len());
            return SolveReport { iterations: iters, infeasible_rows, ..fail(SolveStatus::Infeasible) };
        }
        for &(col, _) in &art_row {
            tab.upper[col] = 0.0;
            if tab.state[col] != State::Basic {
                tab.x[col] = 0.0;
                tab.state[col] = State::AtLower;
            }
        }
    }

    let mut c2 = vec![0.0; n];
    c2[..ns].copy_from_slice(&lp.objective);
    let status = tab.run(&c2, opts, &mut iters);
    tab.refresh_basic_values();
    let assignment: Vec<f64> = tab.x[..ns].to_vec();
    let objective = lp.evaluate(&assignment);
    debug!("simplex finished: {status:?} after {iters} iterations, objective {objective}");
    SolveReport { status, objective, assignment, iterations: iters, infeasible_rows: Vec::new() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SolveOptions {
        SolveOptions::default()
    }

    #[test]
    fn single_variable_lower_bound() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        lp.add_ge("c", vec![(x, 1.0)], 3.0);
        let r = solve(&lp, &opts());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.assignment[0] - 3.0).abs() < 1e-12);
        assert!((r.objective - 3.0).abs() < 1e-12);
    }

    #[test]
    fn textbook_two_variable() {
        // max 3x + 5y s.t. x <= 4, 2y <= 12, 3x + 2y <= 18 -> (2, 6), 36
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, f64::INFINITY, -3.0);
        let y = lp.add_variable("y", 0.0, f64::INFINITY, -5.0);
        lp.add_le("a", vec![(x, 1.0)], 4.0);
        lp.add_le("b", vec![(y, 2.0)], 12.0);
        lp.add_le("c", vec![(x, 3.0), (y, 2.0)], 18.0);
        let r = solve(&lp, &opts());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective + 36.0).abs() < 1e-9);
        assert!((r.assignment[0] - 2.0).abs() < 1e-9 && (r.assignment[1] - 6.0).abs() < 1e-9);
    }

    #[test]
    fn equality_needs_phase_one() {
        // min x + 2y s.t. x + y = 10, x <= 4
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 4.0, 1.0);
        let y = lp.add_variable("y", 0.0, f64::INFINITY, 2.0);
        lp.add_eq("sum", vec![(x, 1.0), (y, 1.0)], 10.0);
        let r = solve(&lp, &opts());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective - 16.0).abs() < 1e-9);
        assert!(lp.max_violation(&r.assignment) < 1e-9);
    }

    #[test]
    fn infeasible_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 1.0, 1.0);
        lp.add_eq("too_big", vec![(x, 1.0)], 5.0);
        let r = solve(&lp, &opts());
        assert_eq!(r.status, SolveStatus::Infeasible);
        assert_eq!(r.infeasible_rows, vec![0]);
    }

    #[test]
    fn unbounded_is_reported() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, f64::INFINITY, -1.0);
        lp.add_ge("c", vec![(x, 1.0)], 1.0);
        assert_eq!(solve(&lp, &opts()).status, SolveStatus::Unbounded);
    }

    #[test]
    fn ranged_row_and_free_variable() {
        // min -x + y, 2 <= x - y <= 5, y free, 0 <= x <= 3 -> x - y = 5 -> -5
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 3.0, -1.0);
        let y = lp.add_variable("y", f64::NEG_INFINITY, f64::INFINITY, 1.0);
        lp.add_range("r", vec![(x, 1.0), (y, -1.0)], 2.0, 5.0);
        let r = solve(&lp, &opts());
        assert_eq!(r.status, SolveStatus::Optimal);
        assert!((r.objective + 5.0).abs() < 1e-9);
    }

    #[test]
    fn iteration_limit() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, f64::INFINITY, -1.0);
        let y = lp.add_variable("y", 0.0, f64::INFINITY, -1.0);
        lp.add_le("c", vec![(x, 1.0), (y, 2.0)], 4.0);
        lp.add_le("d", vec![(x, 2.0), (y, 1.0)], 4.0);
        let r = solve(&lp, &SolveOptions { max_iters: 0, tol: 1e-9 });
        assert_eq!(r.status, SolveStatus::IterationLimit);
    }

    #[test]
    fn lp_text_dump_has_sections() {
        let mut lp = LinearProgram::new();
        let x = lp.add_variable("x", 0.0, 2.0, 1.5);
        lp.add_eq("e", vec![(x, 1.0)], 1.0);
        let text = lp.to_lp_format();
        assert!(text.starts_with("Minimize\n obj: 1.5 x"));
        assert!(text.contains(" e: 1 x = 1\n"));
        assert!(text.contains(" 0 <= x <= 2\n"));
        assert!(text.ends_with("End\n"));
    }
}
