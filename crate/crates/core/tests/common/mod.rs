//! Generators and reference computations shared by the integration tests.
#![allow(dead_code)]

use std::sync::Arc;

use rand::rngs::StdRng;
use rand::Rng;
use tubesolve::rhs::{Expr, Func};
use tubesolve::{FiniteTimeScale, GridFunction};

/// Random strictly increasing grid with `2 <= N <= max_n` points and gaps in
/// `[1e-3, 0.99)`. Roughly a third of the grids are uniform.
pub fn random_grid(rng: &mut StdRng, max_n: usize) -> Arc<FiniteTimeScale> {
    let n = rng.gen_range(2..=max_n);
    let start: f64 = rng.gen_range(-2.0..2.0);
    let mut points = Vec::with_capacity(n);
    points.push(start);
    if rng.gen_bool(0.3) {
        let h = rng.gen_range(1e-3..0.99);
        for i in 1..n {
            points.push(start + i as f64 * h);
        }
    } else {
        for i in 1..n {
            let gap = rng.gen_range(1e-3..0.99);
            points.push(points[i - 1] + gap);
        }
    }
    Arc::new(FiniteTimeScale::from_points(points).unwrap())
}

/// Smooth scalar function `c0 + c1 sin(w1 t + p1) + c2 cos(w2 t) + c3 t^2`.
#[derive(Debug, Clone, Copy)]
pub struct Smooth {
    c: [f64; 4],
    w: [f64; 2],
    p: f64,
}

impl Smooth {
    pub fn random(rng: &mut StdRng) -> Self {
        Self {
            c: [
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-3.0..3.0),
                rng.gen_range(-0.2..0.2),
            ],
            w: [rng.gen_range(0.1..4.0), rng.gen_range(0.1..4.0)],
            p: rng.gen_range(0.0..6.3),
        }
    }

    /// A function bounded away from zero: `|f| >= 1`.
    pub fn random_nonvanishing(rng: &mut StdRng) -> Self {
        let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let amp = rng.gen_range(0.0..1.0);
        Self {
            c: [sign * (2.0 + amp), sign * amp, 0.0, 0.0],
            w: [rng.gen_range(0.1..4.0), 1.0],
            p: rng.gen_range(0.0..6.3),
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.c[0]
            + self.c[1] * (self.w[0] * t + self.p).sin()
            + self.c[2] * (self.w[1] * t).cos()
            + self.c[3] * t * t
    }

    pub fn on(&self, ts: &Arc<FiniteTimeScale>) -> GridFunction {
        GridFunction::from_fn(ts.clone(), 1, |t, out| out[0] = self.eval(t))
    }
}

/// `|a - b| <= tol * max(1, scale)`.
pub fn close(a: f64, b: f64, scale: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale.abs().max(1.0)
}

/// Backward difference computed straight from the point list.
pub fn backward_difference(points: &[f64], f: &[f64], i: usize) -> f64 {
    (f[i] - f[i - 1]) / (points[i] - points[i - 1])
}

/// Riemann sum `sum_{i in (c, d]} f[i] (t_i - t_{i-1})` from the point list.
pub fn riemann(points: &[f64], f: &[f64], c: usize, d: usize) -> f64 {
    (c + 1..=d)
        .map(|i| f[i] * (points[i] - points[i - 1]))
        .sum()
}

/// Random expression tree over `t`, `x1..x{dim}` and `normx`, with
/// nonnegative numeric literals so that printing and re-parsing is exact.
pub fn random_expr(rng: &mut StdRng, dim: usize, depth: u32) -> Expr {
    let leaf = depth == 0 || rng.gen_bool(0.25);
    if leaf {
        return match rng.gen_range(0..4) {
            0 => Expr::T,
            1 => Expr::X(rng.gen_range(1..=dim)),
            2 => Expr::NormX,
            _ => {
                let v = if rng.gen_bool(0.5) {
                    rng.gen_range(0..100) as f64
                } else {
                    rng.gen_range(0.0..50.0)
                };
                Expr::Num(v)
            }
        };
    }
    let sub = |rng: &mut StdRng| Box::new(random_expr(rng, dim, depth - 1));
    match rng.gen_range(0..8) {
        0 => Expr::Neg(sub(rng)),
        1 => Expr::Add(sub(rng), sub(rng)),
        2 => Expr::Sub(sub(rng), sub(rng)),
        3 => Expr::Mul(sub(rng), sub(rng)),
        4 => Expr::Div(sub(rng), sub(rng)),
        5 => Expr::Pow(sub(rng), sub(rng)),
        _ => {
            let funcs = [
                Func::Sin,
                Func::Cos,
                Func::Exp,
                Func::Log,
                Func::Sqrt,
                Func::Abs,
            ];
            let f = funcs[rng.gen_range(0..funcs.len())];
            Expr::Call(f, sub(rng))
        }
    }
}

/// Runs the calculus identity suite for scalar `f`, `g` (`g` nonvanishing)
/// at relative tolerance `tol`, reporting the first failure.
pub fn check_identities(
    ts: &Arc<FiniteTimeScale>,
    f: &GridFunction,
    g: &GridFunction,
    tol: f64,
) -> Result<(), String> {
    use tubesolve::nabla::{nabla_derivative, nabla_integral};

    let pts = ts.points();
    let n = ts.len();
    let (fv, gv) = (f.values(), g.values());
    let df = nabla_derivative(f);
    let dg = nabla_derivative(g);
    let fail = |what: &str, i: usize, lhs: f64, rhs: f64| {
        Err(format!("{what} at index {i}: {lhs} vs {rhs}"))
    };

    for i in ts.kappa_indices() {
        let d = backward_difference(pts, fv, i);
        if !close(df.scalar_at(i), d, d, tol) {
            return fail("derivative", i, df.scalar_at(i), d);
        }
        // rho-identity
        let nu = ts.nu(i).unwrap();
        let rho_f = fv[i] - nu * df.scalar_at(i);
        if !close(rho_f, fv[i - 1], fv[i].abs() + fv[i - 1].abs(), tol) {
            return fail("rho-identity", i, rho_f, fv[i - 1]);
        }
        // product rule, both forms
        let fg: Vec<f64> = fv.iter().zip(gv).map(|(a, b)| a * b).collect();
        let dfg = backward_difference(pts, &fg, i);
        let form1 = df.scalar_at(i) * gv[i] + fv[i - 1] * dg.scalar_at(i);
        let form2 = fv[i] * dg.scalar_at(i) + df.scalar_at(i) * gv[i - 1];
        let scale = (df.scalar_at(i) * gv[i]).abs() + (fv[i - 1] * dg.scalar_at(i)).abs();
        if !close(dfg, form1, scale, tol) || !close(dfg, form2, scale, tol) {
            return fail("product rule", i, dfg, form1);
        }
        // quotient rule
        let q: Vec<f64> = fv.iter().zip(gv).map(|(a, b)| a / b).collect();
        let dq = backward_difference(pts, &q, i);
        let num = df.scalar_at(i) * gv[i] - fv[i] * dg.scalar_at(i);
        let den = gv[i] * gv[i - 1];
        let scale = ((df.scalar_at(i) * gv[i]).abs() + (fv[i] * dg.scalar_at(i)).abs()) / den.abs();
        if !close(dq, num / den, scale, tol) {
            return fail("quotient rule", i, dq, num / den);
        }
    }

    // fundamental theorem on every prefix
    for k in 1..n {
        let int = nabla_integral(&df, 0, k).unwrap()[0];
        let diff = fv[k] - fv[0];
        if !close(int, diff, fv[k].abs() + fv[0].abs(), tol) {
            return fail("fundamental theorem", k, int, diff);
        }
    }

    if n >= 2 {
        let last = n - 1;
        // integration by parts: int f^nabla g = fg|_a^b - int f^rho g^nabla
        let mut lhs_terms = vec![0.0; n];
        let mut rhs_terms = vec![0.0; n];
        for i in ts.kappa_indices() {
            lhs_terms[i] = df.scalar_at(i) * gv[i];
            rhs_terms[i] = fv[i - 1] * dg.scalar_at(i);
        }
        let lhs = riemann(pts, &lhs_terms, 0, last);
        let rhs = fv[last] * gv[last] - fv[0] * gv[0] - riemann(pts, &rhs_terms, 0, last);
        let scale = riemann(
            pts,
            &lhs_terms.iter().map(|v| v.abs()).collect::<Vec<_>>(),
            0,
            last,
        ) + riemann(
            pts,
            &rhs_terms.iter().map(|v| v.abs()).collect::<Vec<_>>(),
            0,
            last,
        ) + (fv[last] * gv[last]).abs()
            + (fv[0] * gv[0]).abs();
        if !close(lhs, rhs, scale, tol) {
            return fail("integration by parts", last, lhs, rhs);
        }

        // |int fg| <= int |fg| <= max_{(a,b]} |f| int |g|
        let prod: Vec<f64> = fv.iter().zip(gv).map(|(a, b)| a * b).collect();
        let abs_prod: Vec<f64> = prod.iter().map(|v| v.abs()).collect();
        let abs_g: Vec<f64> = gv.iter().map(|v| v.abs()).collect();
        let int_fg =
            nabla_integral(&GridFunction::scalar(ts.clone(), prod).unwrap(), 0, last).unwrap()[0];
        let int_abs_fg = nabla_integral(
            &GridFunction::scalar(ts.clone(), abs_prod).unwrap(),
            0,
            last,
        )
        .unwrap()[0];
        let int_abs_g =
            nabla_integral(&GridFunction::scalar(ts.clone(), abs_g).unwrap(), 0, last).unwrap()[0];
        let max_f = fv[1..].iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let slack = tol * int_abs_fg.max(1.0);
        if int_fg.abs() > int_abs_fg + slack || int_abs_fg > max_f * int_abs_g + slack {
            return Err(format!(
                "integral inequality: |{int_fg}| <= {int_abs_fg} <= {max_f} * {int_abs_g}"
            ));
        }
    }
    Ok(())
}
