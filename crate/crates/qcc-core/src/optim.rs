//! Dense BFGS with a strong-Wolfe line search.
//!
//! The energy surfaces here are smooth, low-dimensional (tens of
//! parameters) and come with exact analytic gradients, so a full
//! inverse-Hessian BFGS update with a Wolfe line search converges in a
//! handful of iterations and needs no memory limiting.
//!
//! Reference: Nocedal & Wright, "Numerical Optimization", 2nd ed.,
//! Algorithms 6.1 (BFGS) and 3.5/3.6 (line search).

/// Stopping rules. Convergence requires the gradient max-norm below
/// `grad_tol` and the energy change between iterations below `energy_tol`.
#[derive(Debug, Clone)]
pub struct BfgsOptions {
    pub grad_tol: f64,
    pub energy_tol: f64,
    pub max_iters: usize,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        BfgsOptions {
            grad_tol: 1e-8,
            energy_tol: 1e-10,
            max_iters: 2000,
        }
    }
}

#[derive(Debug, Clone)]
pub struct BfgsOutcome {
    pub x: Vec<f64>,
    pub value: f64,
    pub gradient: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Objective value after each accepted step.
    pub history: Vec<f64>,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Minimizes `f` (which returns value and gradient together) from `x0`.
pub fn bfgs_minimize<F>(f: F, x0: &[f64], opts: &BfgsOptions) -> BfgsOutcome
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    let n = x0.len();
    let mut x = x0.to_vec();
    let (mut fx, mut grad) = f(&x);
    let mut history = vec![fx];

    // Inverse Hessian approximation, row-major.
    let mut h_inv = identity(n);
    let mut converged = inf_norm(&grad) < opts.grad_tol;
    let mut iterations = 0;
    let mut fresh_reset = true;

    while !converged && iterations < opts.max_iters {
        // d = -H g
        let mut d = vec![0.0; n];
        for i in 0..n {
            let row = &h_inv[i * n..(i + 1) * n];
            d[i] = -dot(row, &grad);
        }
        let mut dg = dot(&d, &grad);
        if !dg.is_finite() || dg >= 0.0 {
            // Not a descent direction: reset to steepest descent.
            h_inv = identity(n);
            fresh_reset = true;
            for i in 0..n {
                d[i] = -grad[i];
            }
            dg = dot(&d, &grad);
            if dg >= 0.0 {
                break; // gradient is exactly zero
            }
        }

        let ls = wolfe_search(&f, &x, fx, &grad, &d, dg);
        let (alpha, x_new, f_new, g_new) = match ls {
            Some(v) => v,
            None if !fresh_reset => {
                // Stale curvature can defeat the line search; retry once
                // along the raw gradient before giving up.
                h_inv = identity(n);
                fresh_reset = true;
                continue;
            }
            None => break, // no decrease possible at machine precision
        };
        fresh_reset = false;

        let s: Vec<f64> = (0..n).map(|i| alpha * d[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - grad[i]).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * inf_norm(&s).max(1e-300) * inf_norm(&y).max(1e-300) && sy > 0.0 {
            bfgs_update(&mut h_inv, &s, &y, sy);
        }

        let df = (fx - f_new).abs();
        x = x_new;
        fx = f_new;
        grad = g_new;
        history.push(fx);
        iterations += 1;

        if inf_norm(&grad) < opts.grad_tol && df < opts.energy_tol {
            converged = true;
        }
    }

    if inf_norm(&grad) < opts.grad_tol {
        converged = true;
    }

    BfgsOutcome {
        x,
        value: fx,
        gradient: grad,
        iterations,
        converged,
        history,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        m[i * n + i] = 1.0;
    }
    m
}

/// H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    // hy = H y
    let mut hy = vec![0.0; n];
    for i in 0..n {
        hy[i] = dot(&h[i * n..(i + 1) * n], y);
    }
    let yhy = dot(y, &hy);
    // H += -rho (s hy^T + hy s^T) + rho^2 yhy s s^T + rho s s^T
    let c = rho * rho * yhy + rho;
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (s[i] * hy[j] + hy[i] * s[j]) + c * s[i] * s[j];
        }
    }
}

type SearchResult = (f64, Vec<f64>, f64, Vec<f64>);

/// Strong Wolfe line search (c1 = 1e-4, c2 = 0.9).
fn wolfe_search<F>(
    f: &F,
    x: &[f64],
    f0: f64,
    _g0: &[f64],
    d: &[f64],
    dg0: f64,
) -> Option<SearchResult>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;
    const ALPHA_MAX: f64 = 1e3;

    let eval = |alpha: f64| -> (f64, f64, Vec<f64>, Vec<f64>) {
        let xa: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let (fa, ga) = f(&xa);
        let dga = dot(&ga, d);
        (fa, dga, xa, ga)
    };

    let mut alpha_prev = 0.0;
    let mut f_prev = f0;
    let mut dg_prev = dg0;
    let mut alpha = 1.0f64;

    for iter in 0..30 {
        let (fa, dga, xa, ga) = eval(alpha);
        if fa > f0 + C1 * alpha * dg0 || (iter > 0 && fa >= f_prev) {
            return zoom(f, x, f0, dg0, d, alpha_prev, f_prev, dg_prev, alpha, fa);
        }
        if dga.abs() <= -C2 * dg0 {
            return Some((alpha, xa, fa, ga));
        }
        if dga >= 0.0 {
            return zoom(f, x, f0, dg0, d, alpha, fa, dga, alpha_prev, f_prev);
        }
        alpha_prev = alpha;
        f_prev = fa;
        dg_prev = dga;
        alpha = (2.0 * alpha).min(ALPHA_MAX);
        if alpha >= ALPHA_MAX {
            return Some((alpha, xa, fa, ga));
        }
    }
    let _ = dg_prev;
    None
}

/// Zoom phase: `lo` satisfies the sufficient-decrease side, `hi` brackets.
#[allow(clippy::too_many_arguments)]
fn zoom<F>(
    f: &F,
    x: &[f64],
    f0: f64,
    dg0: f64,
    d: &[f64],
    mut alpha_lo: f64,
    mut f_lo: f64,
    mut dg_lo: f64,
    mut alpha_hi: f64,
    mut f_hi: f64,
) -> Option<SearchResult>
where
    F: Fn(&[f64]) -> (f64, Vec<f64>),
{
    const C1: f64 = 1e-4;
    const C2: f64 = 0.9;

    let eval = |alpha: f64| -> (f64, f64, Vec<f64>, Vec<f64>) {
        let xa: Vec<f64> = x.iter().zip(d).map(|(xi, di)| xi + alpha * di).collect();
        let (fa, ga) = f(&xa);
        let dga = dot(&ga, d);
        (fa, dga, xa, ga)
    };

    let mut best: Option<SearchResult> = None;
    for _ in 0..50 {
        // Quadratic interpolation using (alpha_lo, f_lo, dg_lo) and (alpha_hi, f_hi),
        // safeguarded toward bisection.
        let span = alpha_hi - alpha_lo;
        let mut alpha = if span.abs() > 1e-300 {
            let denom = 2.0 * (f_hi - f_lo - dg_lo * span);
            if denom.abs() > 1e-300 {
                alpha_lo - dg_lo * span * span / denom
            } else {
                alpha_lo + 0.5 * span
            }
        } else {
            alpha_lo
        };
        let lo = alpha_lo.min(alpha_hi);
        let hi = alpha_lo.max(alpha_hi);
        if !(alpha.is_finite()) || alpha <= lo + 0.1 * (hi - lo) || alpha >= hi - 0.1 * (hi - lo) {
            alpha = alpha_lo + 0.5 * span;
        }

        let (fa, dga, xa, ga) = eval(alpha);
        if fa > f0 + C1 * alpha * dg0 || fa >= f_lo {
            alpha_hi = alpha;
            f_hi = fa;
        } else {
            if dga.abs() <= -C2 * dg0 {
                return Some((alpha, xa, fa, ga));
            }
            if dga * (alpha_hi - alpha_lo) >= 0.0 {
                alpha_hi = alpha_lo;
                f_hi = f_lo;
            }
            alpha_lo = alpha;
            f_lo = fa;
            dg_lo = dga;
            best = Some((alpha, xa, fa, ga));
        }
        if (alpha_hi - alpha_lo).abs() < 1e-16 * (1.0 + alpha_lo.abs()) {
            break;
        }
    }
    // Interval collapsed: accept the best sufficient-decrease point if any.
    if best.is_none() && f_lo < f0 && alpha_lo > 0.0 {
        let (fa, _, xa, ga) = eval(alpha_lo);
        return Some((alpha_lo, xa, fa, ga));
    }
    best
}
