//! Small dense Levenberg–Marquardt solver with finite-difference Jacobians.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    /// Stop when an accepted step lowers the cost by less than this fraction.
    pub cost_tolerance: f64,
    /// Stop when the gradient's ∞-norm falls below this.
    pub gradient_tolerance: f64,
    /// Stop when a step is this small relative to the parameters.
    pub step_tolerance: f64,
    pub fd_relative_step: f64,
    pub fd_min_step: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_lambda: 1e-3,
            cost_tolerance: 1e-10,
            gradient_tolerance: 1e-10,
            step_tolerance: 1e-14,
            fd_relative_step: 1e-6,
            fd_min_step: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    CostDecrease,
    Gradient,
    StepSize,
    MaxIterations,
    /// Damping grew without finding a cost-reducing step.
    Stalled,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Iteration {
    /// Cost at the trial point (infinite if the residuals failed there).
    pub cost: f64,
    pub lambda: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub iterations: usize,
    pub initial_cost: f64,
    pub final_cost: f64,
    pub converged: bool,
    pub termination: Termination,
    pub trace: Vec<Iteration>,
}

impl FitReport {
    /// Costs of the accepted steps, starting with the initial cost.
    pub fn accepted_costs(&self) -> Vec<f64> {
        std::iter::once(self.initial_cost)
            .chain(self.trace.iter().filter(|it| it.accepted).map(|it| it.cost))
            .collect()
    }
}

/// Residual vector at `x`, or `None` where the model cannot be evaluated.
/// The length must not depend on `x`.
pub trait Residuals {
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>>;

    fn cost(&self, x: &DVector<f64>) -> Option<f64> {
        self.residuals(x)
            .map(|r| r.norm_squared())
            .filter(|c| c.is_finite())
    }
}

impl<F> Residuals for F
where
    F: Fn(&DVector<f64>) -> Option<DVector<f64>>,
{
    fn residuals(&self, x: &DVector<f64>) -> Option<DVector<f64>> {
        self(x)
    }
}

/// Central differences with step max(rel·|x_j|, floor). Falls back to a
/// one-sided difference when one side cannot be evaluated; a column with
/// neither side available is left at zero.
pub fn fd_jacobian<R: Residuals + ?Sized>(
    problem: &R,
    x: &DVector<f64>,
    r0: &DVector<f64>,
    relative_step: f64,
    min_step: f64,
) -> DMatrix<f64> {
    let mut jac = DMatrix::zeros(r0.len(), x.len());
    let mut xp = x.clone();
    for j in 0..x.len() {
        let h = (relative_step * x[j].abs()).max(min_step);
        xp[j] = x[j] + h;
        let plus = problem.residuals(&xp).filter(|r| r.len() == r0.len());
        xp[j] = x[j] - h;
        let minus = problem.residuals(&xp).filter(|r| r.len() == r0.len());
        xp[j] = x[j];
        let col = match (plus, minus) {
            (Some(p), Some(m)) => (p - m) / (2.0 * h),
            (Some(p), None) => (p - r0) / h,
            (None, Some(m)) => (r0 - m) / h,
            (None, None) => continue,
        };
        jac.set_column(j, &col);
    }
    jac
}

#[derive(Debug, Clone, PartialEq)]
pub enum LmError {
    /// Residuals could not be evaluated (or were non-finite) at the start.
    InvalidStart,
}

/// Minimizes ‖r(x)‖² from `x0`. The returned parameters never have a higher
/// cost than `x0`.
pub fn levenberg_marquardt<R: Residuals + ?Sized>(
    problem: &R,
    x0: DVector<f64>,
    config: &LmConfig,
) -> Result<(DVector<f64>, FitReport), LmError> {
    let mut x = x0;
    let mut r = problem.residuals(&x).ok_or(LmError::InvalidStart)?;
    let mut cost = r.norm_squared();
    if !cost.is_finite() {
        return Err(LmError::InvalidStart);
    }
    let initial_cost = cost;
    let mut lambda = config.initial_lambda;
    let mut trace = Vec::new();
    let mut termination = Termination::MaxIterations;
    let mut need_jacobian = true;
    let mut jtj = DMatrix::zeros(x.len(), x.len());
    let mut g = DVector::zeros(x.len());

    while trace.len() < config.max_iterations {
        if cost == 0.0 {
            termination = Termination::CostDecrease;
            break;
        }
        if need_jacobian {
            let jac = fd_jacobian(problem, &x, &r, config.fd_relative_step, config.fd_min_step);
            jtj = jac.tr_mul(&jac);
            g = jac.tr_mul(&r);
            need_jacobian = false;
            if g.amax() < config.gradient_tolerance {
                termination = Termination::Gradient;
                break;
            }
        }
        if lambda > 1e16 {
            termination = Termination::Stalled;
            break;
        }
        let diag_floor = jtj.diagonal().amax().max(1.0) * 1e-15;
        let mut a = jtj.clone();
        for i in 0..x.len() {
            a[(i, i)] += lambda * jtj[(i, i)].max(diag_floor);
        }
        let Some(chol) = a.cholesky() else {
            trace.push(Iteration {
                cost: f64::INFINITY,
                lambda,
                accepted: false,
            });
            lambda *= 10.0;
            continue;
        };
        let step = -chol.solve(&g);
        let trial = &x + &step;
        let trial_r = problem.residuals(&trial).filter(|tr| tr.len() == r.len());
        let trial_cost = trial_r
            .as_ref()
            .map(|tr| tr.norm_squared())
            .filter(|c| c.is_finite())
            .unwrap_or(f64::INFINITY);
        let accepted = trial_cost < cost;
        trace.push(Iteration {
            cost: trial_cost,
            lambda,
            accepted,
        });
        let small_step = step.norm() <= config.step_tolerance * (x.norm() + config.step_tolerance);
        if accepted {
            let decrease = (cost - trial_cost) / cost;
            x = trial;
            r = trial_r.expect("accepted trial has residuals");
            cost = trial_cost;
            lambda = (lambda / 10.0).max(1e-12);
            need_jacobian = true;
            if decrease < config.cost_tolerance {
                termination = Termination::CostDecrease;
                break;
            }
        } else {
            lambda *= 10.0;
        }
        if small_step {
            termination = Termination::StepSize;
            break;
        }
    }

    let report = FitReport {
        iterations: trace.len(),
        initial_cost,
        final_cost: cost,
        converged: termination != Termination::MaxIterations && termination != Termination::Stalled,
        termination,
        trace,
    };
    Ok((x, report))
}
