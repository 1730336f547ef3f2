//! Primal barrier method for geometric programs in convex (log-space) form.
//!
//! With `z = exp(y)` every posynomial `p` becomes `F(y) = ln p(exp(y))`, a
//! log-sum-exp of affine functions. The program
//!
//! ```text
//! minimise F_0(y)  s.t.  F_l(y) <= 0,  A y = b
//! ```
//!
//! is solved by Newton centering on `t F_0(y) - sum_l ln(-F_l(y))` for an
//! increasing sequence of `t`, stopping once the duality gap `L / t` falls
//! below the tolerance. A phase-one program `min s  s.t. F_l(y) <= s` finds a
//! strictly feasible start when the supplied one is not.

use nalgebra::{DMatrix, DVector};

use super::expr::Posynomial;
use super::problem::GpProblem;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverSettings {
    /// Stop once `constraints / t` drops below this.
    pub gap_tolerance: f64,
    /// Newton centering stops when half the squared decrement is below this.
    pub newton_tolerance: f64,
    /// Multiplier applied to `t` between centering steps.
    pub barrier_growth: f64,
    pub initial_barrier: f64,
    /// Cap on Newton steps summed over phase one and phase two.
    pub max_newton_steps: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        Self {
            gap_tolerance: 1e-10,
            newton_tolerance: 1e-12,
            barrier_growth: 20.0,
            initial_barrier: 1.0,
            max_newton_steps: 5_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GpSolution {
    pub point: Vec<f64>,
    pub objective: f64,
    /// Bound on `ln f0(z) - ln f0(z*)` at the returned point.
    pub duality_gap: f64,
    /// Infinity norm of the log-space Lagrangian gradient.
    pub kkt_residual: f64,
    pub newton_steps: usize,
}

/// Solve a geometric program starting from `start` (any positive point; a
/// phase-one solve is run if it is not strictly feasible).
pub fn solve_gp(
    problem: &GpProblem,
    start: &[f64],
    settings: &SolverSettings,
) -> Result<GpSolution> {
    let n = problem.num_vars();
    if start.len() != n {
        return Err(Error::domain(format!(
            "start point has {} coordinates, problem has {n} variables",
            start.len()
        )));
    }
    if let Some(i) = start.iter().position(|&z| !(z > 0.0) || !z.is_finite()) {
        return Err(Error::domain(format!(
            "start coordinate z{i} = {} is not positive",
            start[i]
        )));
    }

    let program = Program::from_problem(problem);
    let mut y = DVector::from_iterator(n, start.iter().map(|z| z.ln()));
    if let Some((a, b)) = &program.equality {
        y = project_onto(a, b, &y)?;
    }

    let mut steps = 0;
    if !program.strictly_feasible(&y) {
        y = phase_one(&program, &y, settings, &mut steps)?;
    }

    let outcome = barrier(&program, y, settings, &mut steps, |_| false)?;
    let point: Vec<f64> = outcome.x.iter().map(|v| v.exp()).collect();
    if point.iter().any(|&z| !(z > 0.0) || !z.is_finite()) {
        return Err(Error::NotConverged {
            iterations: steps,
            residual: f64::INFINITY,
        });
    }
    let objective = problem.objective().eval_unchecked(&point);
    Ok(GpSolution {
        point,
        objective,
        duality_gap: outcome.gap,
        kkt_residual: outcome.kkt_residual,
        newton_steps: steps,
    })
}

/// A posynomial in log space, restricted to the variables it touches.
#[derive(Debug, Clone)]
struct LogSumExp {
    vars: Vec<usize>,
    /// (local index, exponent) pairs and the log coefficient, per term.
    terms: Vec<(Vec<(usize, f64)>, f64)>,
}

impl LogSumExp {
    /// `extra` appends `coef * x[var]` to every term's exponent, which shifts
    /// the whole log-sum-exp by that linear function.
    fn new(p: &Posynomial, extra: Option<(usize, f64)>) -> Self {
        let mut vars: Vec<usize> = p
            .terms()
            .iter()
            .flat_map(|t| t.powers().iter().map(|&(v, _)| v))
            .chain(extra.map(|(v, _)| v))
            .collect();
        vars.sort_unstable();
        vars.dedup();
        let local = |v: usize| vars.binary_search(&v).expect("variable collected above");
        let terms = p
            .terms()
            .iter()
            .map(|t| {
                let mut a: Vec<(usize, f64)> =
                    t.powers().iter().map(|&(v, e)| (local(v), e)).collect();
                if let Some((v, c)) = extra {
                    a.push((local(v), c));
                }
                (a, t.coefficient().ln())
            })
            .collect();
        Self { vars, terms }
    }

    fn exponents(&self, x: &DVector<f64>) -> Vec<f64> {
        self.terms
            .iter()
            .map(|(a, b)| a.iter().fold(*b, |acc, &(k, e)| acc + e * x[self.vars[k]]))
            .collect()
    }

    fn value(&self, x: &DVector<f64>) -> f64 {
        let z = self.exponents(x);
        let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        top + z.iter().map(|v| (v - top).exp()).sum::<f64>().ln()
    }

    /// Adds `gs * grad F` to `g` and `hs * hess F + os * grad F grad F^T` to
    /// `h`, returning `F(x)`.
    fn accumulate(
        &self,
        x: &DVector<f64>,
        gs: f64,
        hs: f64,
        os: f64,
        g: &mut DVector<f64>,
        h: &mut DMatrix<f64>,
    ) -> f64 {
        let z = self.exponents(x);
        let top = z.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let sum: f64 = z.iter().map(|v| (v - top).exp()).sum();
        let value = top + sum.ln();
        let probs: Vec<f64> = z.iter().map(|v| (v - value).exp()).collect();

        let mut local_grad = vec![0.0; self.vars.len()];
        for ((a, _), &p) in self.terms.iter().zip(&probs) {
            for &(k, e) in a {
                local_grad[k] += p * e;
            }
            for &(i, ei) in a {
                for &(j, ej) in a {
                    h[(self.vars[i], self.vars[j])] += hs * p * ei * ej;
                }
            }
        }
        // hess F = sum p a a^T - grad grad^T
        let outer = os - hs;
        for (i, &gi) in local_grad.iter().enumerate() {
            g[self.vars[i]] += gs * gi;
            if outer != 0.0 {
                for (j, &gj) in local_grad.iter().enumerate() {
                    h[(self.vars[i], self.vars[j])] += outer * gi * gj;
                }
            }
        }
        value
    }
}

struct Program {
    n: usize,
    objective: LogSumExp,
    constraints: Vec<LogSumExp>,
    equality: Option<(DMatrix<f64>, DVector<f64>)>,
}

impl Program {
    fn from_problem(problem: &GpProblem) -> Self {
        let n = problem.num_vars();
        let equality = if problem.equalities().is_empty() {
            None
        } else {
            let rows = problem.equalities().len();
            let mut a = DMatrix::zeros(rows, n);
            let mut b = DVector::zeros(rows);
            for (r, m) in problem.equalities().iter().enumerate() {
                for &(v, e) in m.powers() {
                    a[(r, v)] = e;
                }
                b[r] = -m.coefficient().ln();
            }
            Some((a, b))
        };
        Self {
            n,
            objective: LogSumExp::new(problem.objective(), None),
            constraints: problem
                .inequalities()
                .iter()
                .map(|p| LogSumExp::new(p, None))
                .collect(),
            equality,
        }
    }

    fn strictly_feasible(&self, x: &DVector<f64>) -> bool {
        self.constraints.iter().all(|c| c.value(x) < 0.0)
    }

    /// Barrier objective, or `None` outside the domain.
    fn phi(&self, x: &DVector<f64>, t: f64) -> Option<f64> {
        let mut acc = t * self.objective.value(x);
        for c in &self.constraints {
            let v = c.value(x);
            if !(v < 0.0) {
                return None;
            }
            acc -= (-v).ln();
        }
        acc.is_finite().then_some(acc)
    }

    fn gradient_hessian(&self, x: &DVector<f64>, t: f64) -> (DVector<f64>, DMatrix<f64>) {
        let mut g = DVector::zeros(self.n);
        let mut h = DMatrix::zeros(self.n, self.n);
        self.objective.accumulate(x, t, t, 0.0, &mut g, &mut h);
        for c in &self.constraints {
            // Value first so the weights are known; the pass is cheap.
            let d = -c.value(x);
            c.accumulate(x, 1.0 / d, 1.0 / d, 1.0 / (d * d), &mut g, &mut h);
        }
        (g, h)
    }

    /// Newton direction and equality multipliers for the centering problem.
    fn newton(&self, x: &DVector<f64>, t: f64) -> Result<Newton> {
        let (g, h) = self.gradient_hessian(x, t);
        let scale = h.diagonal().iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut ridge = 0.0;
        for _ in 0..12 {
            let mut hr = h.clone();
            for i in 0..self.n {
                hr[(i, i)] += ridge;
            }
            let solved = match &self.equality {
                None => hr.cholesky().map(|c| c.solve(&(-&g))),
                Some((a, _)) => {
                    let p = a.nrows();
                    let mut kkt = DMatrix::zeros(self.n + p, self.n + p);
                    kkt.view_mut((0, 0), (self.n, self.n)).copy_from(&hr);
                    kkt.view_mut((0, self.n), (self.n, p))
                        .copy_from(&a.transpose());
                    kkt.view_mut((self.n, 0), (p, self.n)).copy_from(a);
                    let mut rhs = DVector::zeros(self.n + p);
                    rhs.rows_mut(0, self.n).copy_from(&(-&g));
                    kkt.lu().solve(&rhs).map(|s| s.rows(0, self.n).into_owned())
                }
            };
            if let Some(dx) = solved {
                if dx.iter().all(|v| v.is_finite()) {
                    let decrement = -g.dot(&dx);
                    let residual = (&h * &dx).amax() / t;
                    return Ok(Newton {
                        dx,
                        slope: -decrement,
                        decrement,
                        residual,
                    });
                }
            }
            ridge = if ridge == 0.0 {
                1e-14 * scale
            } else {
                ridge * 100.0
            };
        }
        Err(Error::NotConverged {
            iterations: 0,
            residual: f64::INFINITY,
        })
    }
}

struct Newton {
    dx: DVector<f64>,
    slope: f64,
    decrement: f64,
    residual: f64,
}

struct BarrierOutcome {
    x: DVector<f64>,
    gap: f64,
    kkt_residual: f64,
}

/// Centre at `t`; returns the KKT residual of the last Newton system and
/// whether `stop` fired.
fn center(
    program: &Program,
    x: &mut DVector<f64>,
    t: f64,
    settings: &SolverSettings,
    steps: &mut usize,
    stop: &dyn Fn(&DVector<f64>) -> bool,
) -> Result<(f64, bool)> {
    const ARMIJO: f64 = 0.01;
    const SHRINK: f64 = 0.5;
    loop {
        let step = program.newton(x, t)?;
        let phi0 = program
            .phi(x, t)
            .ok_or_else(|| Error::domain("barrier iterate left the strictly feasible region"))?;
        // Predicted decrease below the rounding level of phi is not observable.
        let floor = settings
            .newton_tolerance
            .max(16.0 * f64::EPSILON * phi0.abs());
        let tiny_step = step.dx.amax() <= 1e-14 * (1.0 + x.amax());
        if step.decrement / 2.0 <= floor || tiny_step || !(step.decrement > 0.0) {
            return Ok((step.residual, false));
        }
        if *steps >= settings.max_newton_steps {
            return Err(Error::NotConverged {
                iterations: *steps,
                residual: step.residual,
            });
        }
        *steps += 1;

        let mut s = 1.0;
        let accepted = loop {
            let candidate = &*x + s * &step.dx;
            if candidate == *x {
                break None;
            }
            if let Some(p) = program.phi(&candidate, t) {
                if p <= phi0 + ARMIJO * s * step.slope {
                    break Some(candidate);
                }
            }
            s *= SHRINK;
            if s < 1e-18 {
                break None;
            }
        };
        match accepted {
            Some(next) => *x = next,
            // No representable decrease left: as central as rounding allows.
            None => return Ok((step.residual, false)),
        }
        if stop(x) {
            return Ok((step.residual, true));
        }
    }
}

fn barrier(
    program: &Program,
    mut x: DVector<f64>,
    settings: &SolverSettings,
    steps: &mut usize,
    stop: impl Fn(&DVector<f64>) -> bool,
) -> Result<BarrierOutcome> {
    let m = program.constraints.len() as f64;
    let mut t = settings.initial_barrier;
    loop {
        let (residual, fired) = center(program, &mut x, t, settings, steps, &stop)?;
        if fired {
            return Ok(BarrierOutcome {
                x,
                gap: m / t,
                kkt_residual: residual,
            });
        }
        if m == 0.0 || m / t < settings.gap_tolerance {
            return Ok(BarrierOutcome {
                x,
                gap: m / t,
                kkt_residual: residual,
            });
        }
        t *= settings.barrier_growth;
    }
}

/// Find `y` with every `F_l(y) < 0` by minimising a shared slack `s` with
/// `F_l(y) <= s`.
fn phase_one(
    program: &Program,
    y0: &DVector<f64>,
    settings: &SolverSettings,
    steps: &mut usize,
) -> Result<DVector<f64>> {
    let n = program.n;
    let slack = n;
    let worst = program
        .constraints
        .iter()
        .map(|c| c.value(y0))
        .fold(f64::NEG_INFINITY, f64::max);

    // `F_l(y) - s` is the same log-sum-exp with `-s` added to each exponent.
    let shifted = |c: &LogSumExp| {
        let mut out = c.clone();
        out.vars.push(slack);
        let k = out.vars.len() - 1;
        for (a, _) in &mut out.terms {
            a.push((k, -1.0));
        }
        out
    };
    let aux = Program {
        n: n + 1,
        objective: LogSumExp {
            vars: vec![slack],
            terms: vec![(vec![(0, 1.0)], 0.0)],
        },
        constraints: program.constraints.iter().map(shifted).collect(),
        equality: program.equality.as_ref().map(|(a, b)| {
            let mut wide = DMatrix::zeros(a.nrows(), n + 1);
            wide.view_mut((0, 0), (a.nrows(), n)).copy_from(a);
            (wide, b.clone())
        }),
    };
    let mut x = DVector::zeros(n + 1);
    x.rows_mut(0, n).copy_from(y0);
    x[slack] = worst + 1.0;

    let margin = 1e-3;
    let outcome = barrier(&aux, x, settings, steps, |x| x[slack] < -margin)?;
    let s = outcome.x[slack];
    let y = outcome.x.rows(0, n).into_owned();
    if s < 0.0 && program.strictly_feasible(&y) {
        Ok(y)
    } else {
        Err(Error::Infeasible(format!(
            "phase one ended with slack {s:.3e}; no strictly feasible point exists"
        )))
    }
}

fn project_onto(a: &DMatrix<f64>, b: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let residual = a * y - b;
    let gram = a * a.transpose();
    let correction = gram
        .lu()
        .solve(&residual)
        .ok_or_else(|| Error::Structural("equality constraints are linearly dependent".into()))?;
    Ok(y - a.transpose() * correction)
}
