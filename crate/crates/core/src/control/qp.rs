//! Dense active-set solver for small strictly convex quadratic programs
//!
//! ```text
//! minimize    (1/2) u' H u + h' u
//! subject to  A u <= a,  B u = b
//! ```
//!
//! The method is the dual active-set scheme of Goldfarb and Idnani: it starts
//! from the unconstrained minimizer, adds equalities, then repeatedly adds the
//! most violated inequality while keeping the multipliers of the active set
//! nonnegative. Problem sizes here are a handful of variables and rows, so the
//! projections are recomputed densely at every step instead of updating a
//! factorization.

use nalgebra::{DMatrix, DVector};

use crate::error::{check_len, Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct QpProblem {
    /// Symmetric positive definite Hessian, `n x n`.
    pub h: DMatrix<f64>,
    /// Linear term, `n`.
    pub f: DVector<f64>,
    /// Inequality rows, `m x n`.
    pub a: DMatrix<f64>,
    pub a_ub: DVector<f64>,
    /// Equality rows, `p x n`.
    pub b: DMatrix<f64>,
    pub b_eq: DVector<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QpSolution {
    pub u: DVector<f64>,
    /// Multipliers `mu >= 0` of `A u <= a`.
    pub inequality_multipliers: DVector<f64>,
    /// Multipliers of `B u = b`; together with `mu` they satisfy
    /// `H u + h + A' mu + B' nu = 0`.
    pub equality_multipliers: DVector<f64>,
    pub iterations: usize,
}

impl QpProblem {
    pub fn unconstrained(h: DMatrix<f64>, f: DVector<f64>) -> Self {
        let n = f.len();
        QpProblem {
            h,
            f,
            a: DMatrix::zeros(0, n),
            a_ub: DVector::zeros(0),
            b: DMatrix::zeros(0, n),
            b_eq: DVector::zeros(0),
        }
    }

    pub fn with_inequalities(mut self, a: DMatrix<f64>, a_ub: DVector<f64>) -> Self {
        self.a = a;
        self.a_ub = a_ub;
        self
    }

    pub fn with_equalities(mut self, b: DMatrix<f64>, b_eq: DVector<f64>) -> Self {
        self.b = b;
        self.b_eq = b_eq;
        self
    }

    pub fn dim(&self) -> usize {
        self.f.len()
    }

    pub fn objective(&self, u: &DVector<f64>) -> f64 {
        0.5 * u.dot(&(&self.h * u)) + self.f.dot(u)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dim();
        check_len("QP Hessian rows", n, self.h.nrows())?;
        check_len("QP Hessian columns", n, self.h.ncols())?;
        check_len("QP inequality columns", n, self.a.ncols())?;
        check_len("QP inequality bound", self.a.nrows(), self.a_ub.len())?;
        check_len("QP equality columns", n, self.b.ncols())?;
        check_len("QP equality bound", self.b.nrows(), self.b_eq.len())?;
        let asym = (&self.h - self.h.transpose()).amax();
        if asym > 1e-9 * (1.0 + self.h.amax()) {
            return Err(Error::domain("QP Hessian must be symmetric"));
        }
        Ok(())
    }

    /// Largest violation `max(A u - a, 0)` and `|B u - b|`.
    pub fn max_violation(&self, u: &DVector<f64>) -> f64 {
        let ineq = (&self.a * u - &self.a_ub).iter().fold(0.0f64, |m, v| m.max(*v));
        let eq = (&self.b * u - &self.b_eq).amax();
        ineq.max(eq)
    }
}

/// Active constraint in `n' u >= b` form.
#[derive(Clone, Copy, Debug)]
struct Active {
    id: usize,
    /// +1 or -1; equalities are flipped so that they enter with a violation.
    sign: f64,
    multiplier: f64,
}

struct Solver<'a> {
    p: &'a QpProblem,
    h_inv: DMatrix<f64>,
    n_eq: usize,
}

impl Solver<'_> {
    /// Constraint `id` as `(normal, rhs)` in `normal' u >= rhs` form.
    fn row(&self, id: usize) -> (DVector<f64>, f64) {
        if id < self.n_eq {
            (self.p.b.row(id).transpose(), self.p.b_eq[id])
        } else {
            let i = id - self.n_eq;
            (-self.p.a.row(i).transpose(), -self.p.a_ub[i])
        }
    }

    fn signed_row(&self, act: &Active) -> DVector<f64> {
        self.row(act.id).0 * act.sign
    }

    /// Primal direction `z` and dual direction `r` for adding normal `np`.
    fn directions(&self, active: &[Active], np: &DVector<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        let w = &self.h_inv * np;
        if active.is_empty() {
            return Ok((w, DVector::zeros(0)));
        }
        let n = self.p.dim();
        let mut nt = DMatrix::zeros(n, active.len());
        for (k, act) in active.iter().enumerate() {
            nt.column_mut(k).copy_from(&self.signed_row(act));
        }
        let hn = &self.h_inv * &nt;
        let m = nt.transpose() * &hn;
        let rhs = hn.transpose() * np;
        let r = match m.clone().cholesky() {
            Some(ch) => ch.solve(&rhs),
            None => m
                .lu()
                .solve(&rhs)
                .ok_or_else(|| Error::Infeasible("degenerate active set".into()))?,
        };
        let z = w - hn * &r;
        Ok((z, r))
    }
}

pub fn solve(p: &QpProblem) -> Result<QpSolution> {
    p.validate()?;
    let n = p.dim();
    let n_eq = p.b.nrows();
    let n_ineq = p.a.nrows();
    let h_inv = p
        .h
        .clone()
        .cholesky()
        .ok_or_else(|| Error::domain("QP Hessian must be positive definite"))?
        .inverse();
    let solver = Solver { p, h_inv, n_eq };
    let max_iterations = 10 * (n + n_ineq + n_eq).max(1);

    let mut u = -(&solver.h_inv * &p.f);
    let mut active: Vec<Active> = Vec::new();
    let mut iterations = 0;

    let scale = |normal: &DVector<f64>, rhs: f64, u: &DVector<f64>| {
        1e-11 * (1.0 + rhs.abs() + normal.norm() * u.norm())
    };

    for id in 0..n_eq {
        let (normal, rhs) = solver.row(id);
        let slack = normal.dot(&u) - rhs;
        let sign = if slack > 0.0 { -1.0 } else { 1.0 };
        let np = &normal * sign;
        let s = slack * sign;
        let (z, r) = solver.directions(&active, &np)?;
        let curvature = z.dot(&np);
        if z.norm() <= 1e-12 * (1.0 + (&solver.h_inv * &np).norm()) || curvature <= 0.0 {
            if s.abs() <= scale(&normal, rhs, &u) * 10.0 {
                continue;
            }
            return Err(Error::Infeasible(format!(
                "equality constraint {id} is inconsistent with the others"
            )));
        }
        let t = -s / curvature;
        u += &z * t;
        for (act, rk) in active.iter_mut().zip(r.iter()) {
            act.multiplier -= t * rk;
        }
        active.push(Active {
            id,
            sign,
            multiplier: t,
        });
    }

    loop {
        // most violated inactive inequality
        let mut worst: Option<(usize, f64)> = None;
        for i in 0..n_ineq {
            let id = n_eq + i;
            if active.iter().any(|a| a.id == id) {
                continue;
            }
            let (normal, rhs) = solver.row(id);
            let s = normal.dot(&u) - rhs;
            if s < -scale(&normal, rhs, &u) && worst.is_none_or(|(_, ws)| s < ws) {
                worst = Some((id, s));
            }
        }
        let Some((pid, _)) = worst else {
            break;
        };
        let (np, rhs) = solver.row(pid);
        let mut added_multiplier = 0.0;

        loop {
            iterations += 1;
            if iterations > max_iterations {
                return Err(Error::MaxIterations(max_iterations));
            }
            let s = np.dot(&u) - rhs;
            let (z, r) = solver.directions(&active, &np)?;

            let mut t1 = f64::INFINITY;
            let mut drop = None;
            for (k, (act, rk)) in active.iter().zip(r.iter()).enumerate() {
                if act.id >= n_eq && *rk > 0.0 {
                    let ratio = act.multiplier / rk;
                    if ratio < t1 {
                        t1 = ratio;
                        drop = Some(k);
                    }
                }
            }
            let curvature = z.dot(&np);
            let t2 = if z.norm() > 1e-12 * (1.0 + (&solver.h_inv * &np).norm()) && curvature > 0.0 {
                (-s / curvature).max(0.0)
            } else {
                f64::INFINITY
            };

            if t1.is_infinite() && t2.is_infinite() {
                return Err(Error::Infeasible(format!(
                    "inequality constraint {} cannot be satisfied together with the active set",
                    pid - n_eq
                )));
            }

            let t = t1.min(t2);
            if t2.is_finite() {
                u += &z * t;
            }
            for (act, rk) in active.iter_mut().zip(r.iter()) {
                act.multiplier -= t * rk;
            }
            added_multiplier += t;

            if t2 <= t1 {
                active.push(Active {
                    id: pid,
                    sign: 1.0,
                    multiplier: added_multiplier,
                });
                break;
            }
            active.remove(drop.expect("partial step always selects a constraint"));
        }
    }

    let mut mu = DVector::zeros(n_ineq);
    let mut nu = DVector::zeros(n_eq);
    for act in &active {
        if act.id < n_eq {
            nu[act.id] = -act.sign * act.multiplier;
        } else {
            mu[act.id - n_eq] = act.multiplier.max(0.0);
        }
    }
    Ok(QpSolution {
        u,
        inequality_multipliers: mu,
        equality_multipliers: nu,
        iterations,
    })
}
