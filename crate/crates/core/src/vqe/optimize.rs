use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    NelderMead,
    Spsa,
    GradientDescent,
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::NelderMead => "nelder_mead",
            Method::Spsa => "spsa",
            Method::GradientDescent => "gradient_descent",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nm" | "nelder_mead" | "nelder-mead" => Ok(Method::NelderMead),
            "spsa" => Ok(Method::Spsa),
            "gd" | "gradient_descent" | "gradient-descent" => Ok(Method::GradientDescent),
            _ => Err(Error::Usage(format!("unknown optimizer '{s}' (expected nm, spsa or gd)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub method: Method,
    /// Maximum objective evaluations, gradient evaluations included.
    pub budget: usize,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            method: Method::NelderMead,
            budget: 4000,
            seed: 0,
        }
    }
}

pub const NM_INITIAL_STEP: f64 = 0.1;
pub const NM_SPREAD_TOLERANCE: f64 = 1e-9;
/// Largest vertex distance from the best vertex (per coordinate) at which
/// Nelder–Mead may stop.
pub const NM_SIMPLEX_TOLERANCE: f64 = 1e-7;
pub const SPSA_A: f64 = 0.1;
pub const SPSA_C: f64 = 0.1;
pub const SPSA_STALL_ITERATIONS: usize = 200;
pub const GD_STEP: f64 = 0.1;
pub const GD_GRADIENT_TOLERANCE: f64 = 1e-6;

/// Something to minimize.
pub trait Objective {
    fn value(&self, theta: &[f64]) -> f64;

    /// Gradient and the number of objective evaluations it cost. The default
    /// uses central differences.
    fn gradient(&self, theta: &[f64]) -> (Vec<f64>, usize) {
        let h = 1e-6;
        let mut x = theta.to_vec();
        let g = (0..theta.len())
            .map(|k| {
                x[k] = theta[k] + h;
                let plus = self.value(&x);
                x[k] = theta[k] - h;
                let minus = self.value(&x);
                x[k] = theta[k];
                (plus - minus) / (2.0 * h)
            })
            .collect();
        (g, 2 * theta.len())
    }
}

impl<F: Fn(&[f64]) -> f64> Objective for F {
    fn value(&self, theta: &[f64]) -> f64 {
        self(theta)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub theta: Vec<f64>,
    pub value: f64,
    pub evaluations: usize,
    /// Best value seen after each iteration.
    pub history: Vec<f64>,
    pub converged: bool,
}

struct Tracker<'a, O: Objective + ?Sized> {
    objective: &'a O,
    budget: usize,
    evaluations: usize,
    best: Option<(f64, Vec<f64>)>,
    history: Vec<f64>,
}

impl<'a, O: Objective + ?Sized> Tracker<'a, O> {
    fn new(objective: &'a O, budget: usize) -> Self {
        Self {
            objective,
            budget,
            evaluations: 0,
            best: None,
            history: Vec::new(),
        }
    }

    fn remaining(&self) -> usize {
        self.budget.saturating_sub(self.evaluations)
    }

    fn eval(&mut self, theta: &[f64]) -> Option<f64> {
        if self.remaining() == 0 {
            return None;
        }
        self.evaluations += 1;
        let v = self.objective.value(theta);
        if self.best.as_ref().is_none_or(|(b, _)| v < *b) {
            self.best = Some((v, theta.to_vec()));
        }
        Some(v)
    }

    fn gradient(&mut self, theta: &[f64]) -> Option<Vec<f64>> {
        let (g, cost) = self.objective.gradient(theta);
        if cost > self.remaining() {
            return None;
        }
        self.evaluations += cost;
        Some(g)
    }

    fn end_iteration(&mut self) {
        if let Some((b, _)) = &self.best {
            self.history.push(*b);
        }
    }

    fn finish(self, converged: bool) -> MinimizeResult {
        let (value, theta) = self.best.expect("at least one evaluation");
        MinimizeResult {
            theta,
            value,
            evaluations: self.evaluations,
            history: self.history,
            converged,
        }
    }
}

/// Minimizes `objective` from `theta0`. Deterministic given the inputs and
/// `config.seed`. On budget exhaustion the best point seen is returned with
/// `converged = false`.
pub fn minimize<O: Objective + ?Sized>(objective: &O, theta0: &[f64], config: &OptimizerConfig) -> Result<MinimizeResult> {
    if config.budget == 0 {
        return Err(Error::Usage("optimizer budget must be positive".into()));
    }
    let mut t = Tracker::new(objective, config.budget);
    if theta0.is_empty() {
        t.eval(theta0);
        t.end_iteration();
        return Ok(t.finish(true));
    }
    let converged = match config.method {
        Method::NelderMead => nelder_mead(&mut t, theta0),
        Method::Spsa => spsa(&mut t, theta0, config.seed),
        Method::GradientDescent => gradient_descent(&mut t, theta0),
    };
    Ok(t.finish(converged))
}

fn nelder_mead<O: Objective + ?Sized>(t: &mut Tracker<O>, theta0: &[f64]) -> bool {
    const ALPHA: f64 = 1.0;
    const GAMMA: f64 = 2.0;
    const RHO: f64 = 0.5;
    const SIGMA: f64 = 0.5;
    let n = theta0.len();

    let mut simplex: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let mut x = theta0.to_vec();
        if k > 0 {
            x[k - 1] += NM_INITIAL_STEP;
        }
        let Some(f) = t.eval(&x) else { return false };
        simplex.push((f, x));
    }
    t.end_iteration();

    let combine = |a: &[f64], b: &[f64], w: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + w * (y - x)).collect() };
    loop {
        simplex.sort_by(|a, b| a.0.total_cmp(&b.0));
        let size = simplex[1..]
            .iter()
            .flat_map(|(_, x)| x.iter().zip(&simplex[0].1).map(|(a, b)| (a - b).abs()))
            .fold(0.0, f64::max);
        if simplex[n].0 - simplex[0].0 < NM_SPREAD_TOLERANCE && size <= NM_SIMPLEX_TOLERANCE {
            return true;
        }
        let mut centroid = vec![0.0; n];
        for (_, x) in &simplex[..n] {
            for (c, xi) in centroid.iter_mut().zip(x) {
                *c += xi / n as f64;
            }
        }
        let worst = simplex[n].clone();
        // c + α(c − worst)
        let xr = combine(&centroid, &worst.1, -ALPHA);
        let Some(fr) = t.eval(&xr) else { return false };

        if fr < simplex[0].0 {
            let xe = combine(&centroid, &xr, GAMMA);
            let Some(fe) = t.eval(&xe) else { return false };
            simplex[n] = if fe < fr { (fe, xe) } else { (fr, xr) };
        } else if fr < simplex[n - 1].0 {
            simplex[n] = (fr, xr);
        } else {
            let (xc, reference) = if fr < worst.0 {
                (combine(&centroid, &xr, RHO), fr)
            } else {
                (combine(&centroid, &worst.1, RHO), worst.0)
            };
            let Some(fc) = t.eval(&xc) else { return false };
            if fc < reference || (fr < worst.0 && fc <= reference) {
                simplex[n] = (fc, xc);
            } else {
                let best = simplex[0].1.clone();
                for vertex in simplex.iter_mut().skip(1) {
                    let x = combine(&best, &vertex.1, SIGMA);
                    let Some(f) = t.eval(&x) else { return false };
                    *vertex = (f, x);
                }
            }
        }
        t.end_iteration();
    }
}

fn spsa<O: Objective + ?Sized>(t: &mut Tracker<O>, theta0: &[f64], seed: u64) -> bool {
    let iterations = t.budget / 2;
    let big_a = 0.1 * iterations as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut theta = theta0.to_vec();
    let mut last_improvement = 0;
    let mut best = f64::INFINITY;

    for k in 0..iterations {
        let ak = SPSA_A / (k as f64 + 1.0 + big_a).powf(0.602);
        let ck = SPSA_C / (k as f64 + 1.0).powf(0.101);
        let delta: Vec<f64> = (0..theta.len()).map(|_| if rng.random::<bool>() { 1.0 } else { -1.0 }).collect();
        let plus: Vec<f64> = theta.iter().zip(&delta).map(|(x, d)| x + ck * d).collect();
        let minus: Vec<f64> = theta.iter().zip(&delta).map(|(x, d)| x - ck * d).collect();
        let Some(fp) = t.eval(&plus) else { return false };
        let Some(fm) = t.eval(&minus) else { return false };
        let slope = (fp - fm) / (2.0 * ck);
        for (x, d) in theta.iter_mut().zip(&delta) {
            *x -= ak * slope * d;
        }
        t.end_iteration();
        let current = *t.history.last().expect("evaluated");
        if current < best - 1e-12 {
            best = current;
            last_improvement = k;
        } else if k - last_improvement >= SPSA_STALL_ITERATIONS {
            t.eval(&theta);
            return true;
        }
    }
    t.eval(&theta);
    false
}

fn gradient_descent<O: Objective + ?Sized>(t: &mut Tracker<O>, theta0: &[f64]) -> bool {
    let mut theta = theta0.to_vec();
    loop {
        if t.eval(&theta).is_none() {
            return false;
        }
        let Some(g) = t.gradient(&theta) else {
            t.end_iteration();
            return false;
        };
        t.end_iteration();
        if g.iter().any(|x| !x.is_finite()) {
            return false;
        }
        if g.iter().all(|x| x.abs() < GD_GRADIENT_TOLERANCE) {
            return true;
        }
        for (x, gi) in theta.iter_mut().zip(&g) {
            *x -= GD_STEP * gi;
        }
    }
}
