//! Small numerical optimizers: quasi-Newton BFGS with central-difference
//! gradients, and golden-section search on an interval.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfgsOptions {
    pub max_iter: usize,
    /// Stop when every component of the accepted step is below this.
    pub x_tol: f64,
    /// Stop when the relative objective decrease falls below this.
    pub f_tol: f64,
    pub g_tol: f64,
}

impl Default for BfgsOptions {
    fn default() -> Self {
        Self {
            max_iter: 500,
            x_tol: 1e-8,
            f_tol: 1e-10,
            g_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub value: f64,
    pub iterations: usize,
    pub converged: bool,
}

fn eval<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64]) -> f64 {
    let v = f(x);
    if v.is_finite() {
        v
    } else {
        f64::INFINITY
    }
}

fn gradient<F: FnMut(&[f64]) -> f64>(f: &mut F, x: &[f64], g: &mut [f64]) {
    let mut xp = x.to_vec();
    for i in 0..x.len() {
        let h = 1e-5 * x[i].abs().max(1.0);
        xp[i] = x[i] + h;
        let fp = eval(f, &xp);
        xp[i] = x[i] - h;
        let fm = eval(f, &xp);
        xp[i] = x[i];
        g[i] = if fp.is_finite() && fm.is_finite() {
            (fp - fm) / (2.0 * h)
        } else {
            0.0
        };
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Minimizes `f` from `x0` with BFGS and a backtracking Armijo line search.
pub fn bfgs<F: FnMut(&[f64]) -> f64>(mut f: F, x0: &[f64], opts: BfgsOptions) -> Minimum {
    let n = x0.len();
    let mut x = x0.to_vec();
    let mut fx = eval(&mut f, &x);
    if n == 0 {
        return Minimum {
            x,
            value: fx,
            iterations: 0,
            converged: fx.is_finite(),
        };
    }
    let mut g = vec![0.0; n];
    gradient(&mut f, &x, &mut g);
    // inverse Hessian, row-major
    let mut h = identity(n);
    let mut d = vec![0.0; n];
    let mut x_new = vec![0.0; n];
    let mut g_new = vec![0.0; n];
    let mut reset_pending = false;

    for iter in 1..=opts.max_iter {
        if g.iter().all(|v| v.abs() < opts.g_tol) {
            return Minimum {
                x,
                value: fx,
                iterations: iter - 1,
                converged: true,
            };
        }
        for i in 0..n {
            d[i] = -(0..n).map(|j| h[i * n + j] * g[j]).sum::<f64>();
        }
        let mut slope = dot(&g, &d);
        if slope >= 0.0 {
            h = identity(n);
            for i in 0..n {
                d[i] = -g[i];
            }
            slope = dot(&g, &d);
        }

        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..50 {
            for i in 0..n {
                x_new[i] = x[i] + step * d[i];
            }
            let f_try = eval(&mut f, &x_new);
            if f_try <= fx + 1e-4 * step * slope {
                accepted = Some(f_try);
                break;
            }
            step *= 0.5;
        }

        let Some(f_new) = accepted else {
            // No descent along the search direction: retry once from a
            // steepest-descent metric, otherwise we are at the noise floor
            // of the finite-difference gradient.
            if !reset_pending {
                reset_pending = true;
                h = identity(n);
                continue;
            }
            let gmax = g.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            return Minimum {
                x,
                value: fx,
                iterations: iter,
                converged: gmax < 1e-2 * fx.abs().max(1.0),
            };
        };
        reset_pending = false;

        gradient(&mut f, &x_new, &mut g_new);
        let s: Vec<f64> = (0..n).map(|i| x_new[i] - x[i]).collect();
        let y: Vec<f64> = (0..n).map(|i| g_new[i] - g[i]).collect();
        let f_old = fx;
        x.copy_from_slice(&x_new);
        g.copy_from_slice(&g_new);
        fx = f_new;

        let small_step = s.iter().all(|v| v.abs() < opts.x_tol);
        let small_drop = (f_old - fx).abs() <= opts.f_tol * (fx.abs() + opts.f_tol);
        if small_step || small_drop {
            return Minimum {
                x,
                value: fx,
                iterations: iter,
                converged: true,
            };
        }

        let sy = dot(&s, &y);
        if sy > 1e-12 {
            bfgs_update(&mut h, &s, &y, sy);
        }
    }
    Minimum {
        x,
        value: fx,
        iterations: opts.max_iter,
        converged: false,
    }
}

fn identity(n: usize) -> Vec<f64> {
    let mut h = vec![0.0; n * n];
    for i in 0..n {
        h[i * n + i] = 1.0;
    }
    h
}

/// H <- (I - rho s y') H (I - rho y s') + rho s s'
fn bfgs_update(h: &mut [f64], s: &[f64], y: &[f64], sy: f64) {
    let n = s.len();
    let rho = 1.0 / sy;
    let hy: Vec<f64> = (0..n).map(|i| (0..n).map(|j| h[i * n + j] * y[j]).sum()).collect();
    let yhy = dot(y, &hy);
    for i in 0..n {
        for j in 0..n {
            h[i * n + j] += -rho * (hy[i] * s[j] + s[i] * hy[j]) + (rho * rho * yhy + rho) * s[i] * s[j];
        }
    }
}

/// Golden-section minimization of a unimodal `f` on `[lo, hi]`.
pub fn golden_section<F: FnMut(f64) -> f64>(mut f: F, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let mut fc = f(c);
    let mut fd = f(d);
    while (hi - lo).abs() > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // The search never evaluates the end points; check them so boundary
    // optima are reported exactly.
    let mid = 0.5 * (lo + hi);
    let mut best = (mid, f(mid));
    for x in [lo, hi] {
        let v = f(x);
        if v < best.1 {
            best = (x, v);
        }
    }
    best
}
