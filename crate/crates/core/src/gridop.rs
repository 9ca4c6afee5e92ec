//! Cell-centred radial grid and the ε-regularized operator
//! `div(a_ε(|∇u|²)∇u) - b_ε(|∇u|²) (+ ε^q)` in conservative flux form.

use crate::exponents::ProblemParams;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("grid needs at least 2 cells, got {0}")]
    TooFewCells(usize),
    #[error("r_max must be positive and finite, got {0}")]
    BadRadius(f64),
    #[error("regularization: {0}")]
    BadRegularization(String),
    #[error("field length {got} does not match grid size {expected}")]
    LengthMismatch { expected: usize, got: usize },
}

/// Uniform cell-centred grid on `[0, r_max]` with centres `(i + 1/2) Δr`.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialGrid {
    dim: u32,
    r_max: f64,
    m: usize,
    dr: f64,
    centers: Vec<f64>,
    /// `r_{i+1/2}^{N-1}`, indexed by face `0..=M`.
    face_w: Vec<f64>,
    /// `1 / (r_i^{N-1} Δr)`.
    inv_vol: Vec<f64>,
}

impl RadialGrid {
    pub fn new(dim: u32, r_max: f64, m: usize) -> Result<Self, GridError> {
        if m < 2 {
            return Err(GridError::TooFewCells(m));
        }
        if !(r_max > 0.0 && r_max.is_finite()) {
            return Err(GridError::BadRadius(r_max));
        }
        let dr = r_max / m as f64;
        let k = dim as i32 - 1;
        let centers: Vec<f64> = (0..m).map(|i| (i as f64 + 0.5) * dr).collect();
        let face_w = (0..=m).map(|j| (j as f64 * dr).powi(k)).collect();
        let inv_vol = centers.iter().map(|&r| 1.0 / (r.powi(k) * dr)).collect();
        Ok(Self {
            dim,
            r_max,
            m,
            dr,
            centers,
            face_w,
            inv_vol,
        })
    }

    pub fn dim(&self) -> u32 {
        self.dim
    }
    pub fn r_max(&self) -> f64 {
        self.r_max
    }
    pub fn len(&self) -> usize {
        self.m
    }
    pub fn is_empty(&self) -> bool {
        self.m == 0
    }
    pub fn dr(&self) -> f64 {
        self.dr
    }
    pub fn centers(&self) -> &[f64] {
        &self.centers
    }
    pub fn center(&self, i: usize) -> f64 {
        self.centers[i]
    }
    /// `r^{N-1}` weight of face `j` (`j = 0` is the symmetry face).
    pub fn face_weight(&self, j: usize) -> f64 {
        self.face_w[j]
    }
    /// Quadrature weight `r_i^{N-1} Δr` of cell `i`.
    pub fn cell_weight(&self, i: usize) -> f64 {
        1.0 / self.inv_vol[i]
    }

    /// Largest per-cell sum of geometric flux weights `(w_{i-1/2} + w_{i+1/2}) / r_i^{N-1}`,
    /// excluding the symmetry face whose flux is identically zero.
    pub fn max_weight_sum(&self) -> f64 {
        (0..self.m)
            .map(|i| {
                let lo = if i == 0 { 0.0 } else { self.face_w[i] };
                (lo + self.face_w[i + 1]) * self.inv_vol[i] * self.dr
            })
            .fold(0.0, f64::max)
    }

    /// Smallest ratio `w_{i-1/2} / r_i^{N-1}` over interior faces.
    pub fn min_face_ratio(&self) -> f64 {
        (1..self.m)
            .map(|i| self.face_w[i] * self.inv_vol[i] * self.dr)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Nonnegative cell values on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub values: Vec<f64>,
}

impl Field {
    pub fn zeros(grid: &RadialGrid) -> Self {
        Self {
            values: vec![0.0; grid.len()],
        }
    }

    pub fn from_fn(grid: &RadialGrid, f: impl Fn(f64) -> f64) -> Self {
        Self {
            values: grid.centers().iter().map(|&r| f(r)).collect(),
        }
    }

    pub fn from_values(grid: &RadialGrid, values: Vec<f64>) -> Result<Self, GridError> {
        if values.len() != grid.len() {
            return Err(GridError::LengthMismatch {
                expected: grid.len(),
                got: values.len(),
            });
        }
        Ok(Self { values })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `Σ r_i^{N-1} u_i Δr`.
    pub fn mass(&self, grid: &RadialGrid) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &u)| u * grid.cell_weight(i))
            .sum()
    }

    pub fn is_admissible(&self) -> bool {
        self.values.iter().all(|&u| u.is_finite() && u >= -1e-14)
    }
}

/// ε-smoothing of the diffusivity and the Hamiltonian.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regularization {
    pub eps: f64,
    pub gamma_reg: f64,
    /// Include the `+ε^q` source that makes constants steady.
    pub counterterm: bool,
}

impl Regularization {
    /// Largest admissible shift exponent (exclusive).
    pub fn gamma_reg_bound(params: &ProblemParams) -> f64 {
        let (p, q) = (params.p(), params.q());
        (p / 4.0).min(q / 2.0).min(p - 1.0).min(1.0 - q)
    }

    pub fn default_gamma_reg(params: &ProblemParams) -> f64 {
        0.5 * Self::gamma_reg_bound(params)
    }

    pub fn new(
        params: &ProblemParams,
        eps: f64,
        gamma_reg: f64,
        counterterm: bool,
    ) -> Result<Self, GridError> {
        let reg = Self {
            eps,
            gamma_reg,
            counterterm,
        };
        reg.validate(params)?;
        Ok(reg)
    }

    pub fn validate(&self, params: &ProblemParams) -> Result<(), GridError> {
        if !(self.eps > 0.0 && self.eps.is_finite()) {
            return Err(GridError::BadRegularization(format!(
                "eps must be positive, got {}",
                self.eps
            )));
        }
        let bound = Self::gamma_reg_bound(params);
        if !(self.gamma_reg > 0.0 && self.gamma_reg < bound) {
            return Err(GridError::BadRegularization(format!(
                "gamma_reg = {} must lie in (0, {bound}) = (0, p/4) ∩ (0, q/2) ∩ (0, min(p-1, 1-q))",
                self.gamma_reg
            )));
        }
        Ok(())
    }
}

/// Switches used by property tests and diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OuterBoundary {
    /// Ghost value `u_M = 0`.
    #[default]
    Dirichlet,
    /// Zero flux through `r_max`.
    ZeroFlux,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeOptions {
    pub hamiltonian: bool,
    pub outer: OuterBoundary,
}

impl Default for SchemeOptions {
    fn default() -> Self {
        Self {
            hamiltonian: true,
            outer: OuterBoundary::Dirichlet,
        }
    }
}

#[inline]
fn pow(x: f64, e: f64) -> f64 {
    if e == 0.0 {
        1.0
    } else if e == 0.5 {
        x.sqrt()
    } else if e == 0.25 {
        x.sqrt().sqrt()
    } else if e == -0.5 {
        1.0 / x.sqrt()
    } else if e == 1.0 {
        x
    } else {
        x.powf(e)
    }
}

/// `a_ε(z) = (z + ε²)^{(p-2)/2}`.
#[inline]
pub fn a_eps(z: f64, p: f64, eps: f64) -> f64 {
    pow(z + eps * eps, 0.5 * (p - 2.0))
}

/// `b_ε(z) = (z + ε²)^{q/2}`.
#[inline]
pub fn b_eps(z: f64, q: f64, eps: f64) -> f64 {
    pow(z + eps * eps, 0.5 * q)
}

/// Face gradients, `M + 1` entries: the symmetry face `g_0 = 0`, interior
/// faces `(u_i - u_{i-1})/Δr`, and the outer face.
pub fn face_gradient(grid: &RadialGrid, field: &Field) -> Vec<f64> {
    face_gradient_with(grid, field, OuterBoundary::Dirichlet)
}

pub fn face_gradient_with(grid: &RadialGrid, field: &Field, outer: OuterBoundary) -> Vec<f64> {
    let mut g = vec![0.0; grid.len() + 1];
    face_gradient_into(grid, &field.values, outer, &mut g);
    g
}

pub(crate) fn face_gradient_into(grid: &RadialGrid, u: &[f64], outer: OuterBoundary, g: &mut [f64]) {
    let m = grid.len();
    let inv = 1.0 / grid.dr;
    g[0] = 0.0;
    for j in 1..m {
        g[j] = (u[j] - u[j - 1]) * inv;
    }
    g[m] = match outer {
        OuterBoundary::Dirichlet => -u[m - 1] * inv,
        OuterBoundary::ZeroFlux => 0.0,
    };
}

/// Evaluates the regularized operator. Scratch buffers are reused across calls.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    pub params: ProblemParams,
    pub reg: Regularization,
    pub opts: SchemeOptions,
    grad: Vec<f64>,
    flux: Vec<f64>,
}

impl DiscreteOperator {
    pub fn new(params: ProblemParams, reg: Regularization, opts: SchemeOptions) -> Self {
        Self {
            params,
            reg,
            opts,
            grad: Vec::new(),
            flux: Vec::new(),
        }
    }

    fn ensure(&mut self, m: usize) {
        if self.grad.len() != m + 1 {
            self.grad = vec![0.0; m + 1];
            self.flux = vec![0.0; m + 1];
        }
    }

    /// Writes the operator value of every cell into `out`.
    pub fn rhs_into(&mut self, grid: &RadialGrid, u: &[f64], out: &mut [f64]) {
        let m = grid.len();
        self.ensure(m);
        let (p, q, eps) = (self.params.p(), self.params.q(), self.reg.eps);
        face_gradient_into(grid, u, self.opts.outer, &mut self.grad);
        for j in 0..=m {
            let g = self.grad[j];
            self.flux[j] = grid.face_w[j] * a_eps(g * g, p, eps) * g;
        }
        let source = if self.reg.counterterm { pow(eps, q) } else { 0.0 };
        for i in 0..m {
            let mut v = (self.flux[i + 1] - self.flux[i]) * grid.inv_vol[i];
            if self.opts.hamiltonian {
                let gb = 0.5 * (self.grad[i] + self.grad[i + 1]);
                v -= b_eps(gb * gb, q, eps) - source;
            }
            out[i] = v;
        }
    }

    /// Stable explicit step for the current state.
    pub fn stable_dt(&mut self, grid: &RadialGrid, u: &[f64], safety: f64) -> f64 {
        let m = grid.len();
        self.ensure(m);
        let (p, q, eps) = (self.params.p(), self.params.q(), self.reg.eps);
        face_gradient_into(grid, u, self.opts.outer, &mut self.grad);
        let mut diff = 0.0f64;
        let mut ham = 0.0f64;
        for i in 0..m {
            let (gl, gr) = (self.grad[i], self.grad[i + 1]);
            let wl = if i == 0 { 0.0 } else { grid.face_w[i] * a_eps(gl * gl, p, eps) };
            let wr = grid.face_w[i + 1] * a_eps(gr * gr, p, eps);
            diff = diff.max((wl + wr) * grid.inv_vol[i] * grid.dr);
            if self.opts.hamiltonian {
                let gb = 0.5 * (gl + gr);
                ham = ham.max(q * b_eps(gb * gb, q, eps) / gb.abs().max(eps));
            }
        }
        safety * grid.dr * grid.dr / (diff + grid.dr * ham)
    }

    /// One forward Euler step of size `dt`, in place.
    pub fn euler_step(&mut self, grid: &RadialGrid, u: &mut [f64], dt: f64, work: &mut Vec<f64>) {
        work.resize(u.len(), 0.0);
        self.rhs_into(grid, u, work);
        for (ui, ri) in u.iter_mut().zip(work.iter()) {
            *ui += dt * ri;
        }
    }
}

/// Per-cell values of the regularized operator.
pub fn discrete_rhs(
    grid: &RadialGrid,
    field: &Field,
    params: &ProblemParams,
    reg: &Regularization,
) -> Vec<f64> {
    discrete_rhs_with(grid, field, params, reg, SchemeOptions::default())
}

pub fn discrete_rhs_with(
    grid: &RadialGrid,
    field: &Field,
    params: &ProblemParams,
    reg: &Regularization,
    opts: SchemeOptions,
) -> Vec<f64> {
    let mut op = DiscreteOperator::new(*params, *reg, opts);
    let mut out = vec![0.0; grid.len()];
    op.rhs_into(grid, &field.values, &mut out);
    out
}

/// `Δt = safety · Δr² / (W_max a_max + Δr · max q b_ε(ḡ²)/max(|ḡ|, ε))`, where
/// the diffusion part uses the exact per-cell geometric weights.
pub fn stable_dt(
    grid: &RadialGrid,
    field: &Field,
    params: &ProblemParams,
    reg: &Regularization,
    safety: f64,
) -> f64 {
    let mut op = DiscreteOperator::new(*params, *reg, SchemeOptions::default());
    op.stable_dt(grid, &field.values, safety)
}

/// `sup_y sup_{z >= y/2} β(z) / ψ(y)` in units of ε, with `β(z) = z (z²+1)^{q/2-1}`
/// the scaled slope of `b_ε` and `ψ(y) = (y²+1)^{(p-4)/2} ((p-1) y² + 1)` the
/// scaled slope of the flux. For non-increasing data the face-average gradient
/// is at least half the inner face gradient, hence the `y/2`.
fn peclet_constant(p: f64, q: f64) -> f64 {
    let z_star = 1.0 / (1.0 - q).sqrt();
    let beta = |z: f64| z * (z * z + 1.0).powf(0.5 * q - 1.0);
    let psi = |y: f64| (y * y + 1.0).powf(0.5 * (p - 4.0)) * ((p - 1.0) * y * y + 1.0);
    let mut h = beta(z_star);
    for k in -6000..=6000 {
        let y = 10f64.powf(k as f64 * 1e-3);
        h = h.max(beta(z_star.max(0.5 * y)) / psi(y));
    }
    h * (1.0 + 1e-6)
}

/// Smallest ε for which the centred Hamiltonian keeps the explicit step
/// monotone on radially non-increasing data (cell Péclet bound).
pub fn peclet_eps(params: &ProblemParams, grid: &RadialGrid) -> f64 {
    let (p, q) = (params.p(), params.q());
    let s = p - q;
    let w_min = grid.min_face_ratio().min(1.0);
    (grid.dr() * q * peclet_constant(p, q) / (2.0 * w_min)).powf(1.0 / (s - 1.0))
}
