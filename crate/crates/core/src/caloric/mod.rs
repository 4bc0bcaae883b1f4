//! The dictionary of exact heat-equation solutions: heat polynomials,
//! fundamental-solution translates, separable Bessel atoms on a ball,
//! static spherical harmonics and biharmonic caloric polynomials, together
//! with their derivatives and a pointwise caloricity oracle.

pub mod poly;

use crate::domain::{SpacePoint, SpaceTimePoint};
use crate::error::{Error, Result};
use crate::specialfn::{
    bessel_j, bessel_zero, harmonic_dimension, ln_gamma, spherical_harmonic, HarmonicIndex,
    ZeroKind,
};
use poly::{circular_cos, circular_sin, heat_polynomial_1d, Monomial, Polynomial};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Highest supported anisotropic derivative order |alpha| + 2j.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

/// Anisotropic derivative multi-index (alpha, j): spatial orders plus a
/// temporal order that counts double in the grading.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex {
    pub alpha: [usize; 3],
    pub j: usize,
}

impl MultiIndex {
    pub const VALUE: MultiIndex = MultiIndex {
        alpha: [0; 3],
        j: 0,
    };

    pub fn spatial(alpha: [usize; 3]) -> Self {
        Self { alpha, j: 0 }
    }

    pub fn time(j: usize) -> Self {
        Self { alpha: [0; 3], j }
    }

    /// Anisotropic order |alpha| + 2 j.
    pub fn order(&self) -> usize {
        self.alpha.iter().sum::<usize>() + 2 * self.j
    }

    fn check(&self, n: usize) -> Result<()> {
        if self.order() > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder {
                got: self.order(),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        if self.alpha[n..].iter().any(|&a| a > 0) {
            return Err(Error::UnsupportedDimension(n));
        }
        Ok(())
    }
}

/// Fundamental solution of the heat operator:
/// exp(-|x|^2/(4t)) / (2 sqrt(pi t))^n for t > 0 and exactly 0 for t <= 0.
pub fn fundamental_solution(n: usize, x: &SpacePoint, t: f64) -> Result<f64> {
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let r2: f64 = x[..n].iter().map(|c| c * c).sum();
    if t == 0.0 && r2 == 0.0 {
        return Err(Error::SingularPoint);
    }
    if t <= 0.0 {
        return Ok(0.0);
    }
    Ok((-r2 / (4.0 * t)).exp() / (4.0 * PI * t).powf(n as f64 / 2.0))
}

/// Physicists' Hermite polynomial H_a(u).
fn hermite(a: usize, u: f64) -> f64 {
    match a {
        0 => 1.0,
        1 => 2.0 * u,
        _ => {
            let mut h0 = 1.0;
            let mut h1 = 2.0 * u;
            for k in 1..a {
                let h2 = 2.0 * u * h1 - 2.0 * k as f64 * h0;
                h0 = h1;
                h1 = h2;
            }
            h1
        }
    }
}

/// a-th derivative of the one-dimensional kernel exp(-z^2/(4s))/(2 sqrt(pi s)).
fn kernel_derivative_1d(a: usize, z: f64, s: f64) -> f64 {
    let phi = (-z * z / (4.0 * s)).exp() / (2.0 * (PI * s).sqrt());
    if a == 0 {
        return phi;
    }
    let u = z / (2.0 * s.sqrt());
    let scale = (2.0 * s.sqrt()).powi(-(a as i32));
    let sign = if a % 2 == 0 { 1.0 } else { -1.0 };
    sign * scale * hermite(a, u) * phi
}

/// d^j_t d^alpha_x of Phi(z, s); spatial factors carry Hermite polynomials,
/// time derivatives are rewritten through Phi_t = Laplacian(Phi).
fn phi_derivative(n: usize, z: &SpacePoint, s: f64, d: &MultiIndex) -> Result<f64> {
    let r2: f64 = z[..n].iter().map(|c| c * c).sum();
    if s == 0.0 && r2 == 0.0 {
        return Err(Error::SingularPoint);
    }
    if s <= 0.0 {
        return Ok(0.0);
    }
    match d.j {
        0 => {
            let mut v = 1.0;
            for i in 0..n {
                v *= kernel_derivative_1d(d.alpha[i], z[i], s);
            }
            Ok(v)
        }
        j => {
            let mut acc = 0.0;
            for i in 0..n {
                let mut alpha = d.alpha;
                alpha[i] += 2;
                acc += phi_derivative(
                    n,
                    z,
                    s,
                    &MultiIndex {
                        alpha,
                        j: j - 1,
                    },
                )?;
            }
            Ok(acc)
        }
    }
}

/// Eigenvalue family of the separable ball atoms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallProblem {
    Dirichlet,
    Neumann,
}

/// A symbolically described exact solution of the heat equation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AtomSpec", into = "AtomSpec")]
pub enum CaloricAtom {
    /// Product over coordinates of one-dimensional heat polynomials.
    HeatPolynomial {
        degrees: Vec<usize>,
        poly: Polynomial,
    },
    /// (x, t) -> Phi(x - y, t - tau) for a fixed source (y, tau).
    FundamentalTranslate { n: usize, source: SpaceTimePoint },
    /// e^{-lambda t} |x|^{(2-n)/2} J_p(sqrt(lambda) |x|) h^{(j)}_k(x/|x|),
    /// lambda = (zero_m / r2)^2 with zero_m the m-th zero of J_p (Dirichlet)
    /// or J'_p (Neumann) and p = k + (n-2)/2.
    SeparableBall {
        n: usize,
        problem: BallProblem,
        k: usize,
        j: usize,
        m: usize,
        r2: f64,
        lambda: f64,
        order: f64,
    },
    /// The solid harmonic |x|^k h^{(j)}_k(x/|x|); time independent.
    StaticHarmonic {
        n: usize,
        k: usize,
        j: usize,
        poly: Polynomial,
    },
    /// t Laplacian(G) + G for a homogeneous biharmonic polynomial G.
    BiharmonicCaloric {
        n: usize,
        g: Polynomial,
        poly: Polynomial,
    },
}

impl CaloricAtom {
    pub fn heat_polynomial(degrees: &[usize]) -> Result<Self> {
        let n = degrees.len();
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        let mut poly = Polynomial::constant(1.0);
        for (axis, &m) in degrees.iter().enumerate() {
            poly = poly.mul(&heat_polynomial_1d(m, axis));
        }
        Ok(Self::HeatPolynomial {
            degrees: degrees.to_vec(),
            poly,
        })
    }

    pub fn fundamental_translate(n: usize, y: &[f64], tau: f64) -> Result<Self> {
        if !(1..=3).contains(&n) || y.len() != n {
            return Err(Error::UnsupportedDimension(y.len()));
        }
        let mut x = [0.0; 3];
        x[..n].copy_from_slice(y);
        Ok(Self::FundamentalTranslate {
            n,
            source: SpaceTimePoint::new(x, tau),
        })
    }

    pub fn separable_ball(
        n: usize,
        problem: BallProblem,
        k: usize,
        j: usize,
        m: usize,
        r2: f64,
    ) -> Result<Self> {
        if !(2..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if !(r2 > 0.0) {
            return Err(Error::InvalidGeometry(format!("ball radius {r2}")));
        }
        let dim = harmonic_dimension(n, k)?;
        if j < 1 || j > dim {
            return Err(Error::HarmonicIndex { n, k, j });
        }
        let order = k as f64 + (n as f64 - 2.0) / 2.0;
        let kind = match problem {
            BallProblem::Dirichlet => ZeroKind::Function,
            BallProblem::Neumann => ZeroKind::Derivative,
        };
        let zero = bessel_zero(order, m, kind)?;
        let lambda = (zero / r2).powi(2);
        Ok(Self::SeparableBall {
            n,
            problem,
            k,
            j,
            m,
            r2,
            lambda,
            order,
        })
    }

    pub fn static_harmonic(n: usize, k: usize, j: usize) -> Result<Self> {
        let dim = harmonic_dimension(n, k)?;
        if j < 1 || j > dim {
            return Err(Error::HarmonicIndex { n, k, j });
        }
        let poly = solid_harmonic_poly(n, k, j)?;
        Ok(Self::StaticHarmonic { n, k, j, poly })
    }

    pub fn biharmonic_caloric(n: usize, g: Polynomial) -> Result<Self> {
        if !(1..=3).contains(&n) {
            return Err(Error::UnsupportedDimension(n));
        }
        if g.homogeneous_spatial_degree().is_none() {
            return Err(Error::InvalidGeometry(
                "biharmonic atom needs a homogeneous time-independent polynomial".into(),
            ));
        }
        let lap = g.laplacian(n);
        let bilap = lap.laplacian(n);
        let scale = g
            .terms()
            .iter()
            .map(|m| m.coef.abs())
            .fold(0.0f64, f64::max);
        let residual = bilap
            .terms()
            .iter()
            .map(|m| m.coef.abs())
            .fold(0.0f64, f64::max);
        if residual > 1e-12 * scale.max(1.0) {
            return Err(Error::InvalidGeometry(
                "polynomial is not biharmonic".into(),
            ));
        }
        let poly = g.add(&lap.mul_t());
        Ok(Self::BiharmonicCaloric { n, g, poly })
    }

    pub fn n(&self) -> usize {
        match self {
            Self::HeatPolynomial { degrees, .. } => degrees.len(),
            Self::FundamentalTranslate { n, .. }
            | Self::SeparableBall { n, .. }
            | Self::StaticHarmonic { n, .. }
            | Self::BiharmonicCaloric { n, .. } => *n,
        }
    }

    /// The source point for a fundamental translate, if any; the only kind
    /// with a singularity.
    pub fn singular_point(&self) -> Option<SpaceTimePoint> {
        match self {
            Self::FundamentalTranslate { source, .. } => Some(*source),
            _ => None,
        }
    }
}

/// Solid harmonic |x|^k h^{(j)}_k(x/|x|) as an exact polynomial.
fn solid_harmonic_poly(n: usize, k: usize, j: usize) -> Result<Polynomial> {
    match n {
        2 => {
            if k == 0 {
                return Ok(Polynomial::constant(1.0 / (2.0 * PI).sqrt()));
            }
            let base = if j == 1 {
                circular_cos(k)
            } else {
                circular_sin(k)
            };
            Ok(base.scale(1.0 / PI.sqrt()))
        }
        3 => {
            let (m, is_cos) = crate::specialfn::azimuthal_of_index(j);
            // W_{l,m}(u): polynomial factor of P_l^m = (1-u^2)^{m/2} W_{l,m}(u)
            // (Condon-Shortley omitted), built by the standard recurrences.
            let mut w_prev: Vec<f64> = vec![(1..=m).map(|i| (2 * i - 1) as f64).product::<f64>().max(1.0)];
            let mut w_curr: Vec<f64>;
            if k == m {
                w_curr = w_prev.clone();
            } else {
                // W_{m+1,m} = (2m+1) u W_{m,m}
                let mut v = vec![0.0; 2];
                v[1] = (2 * m + 1) as f64 * w_prev[0];
                w_curr = v;
                for l in (m + 2)..=k {
                    let mut next = vec![0.0; w_curr.len() + 1];
                    for (d, &c) in w_curr.iter().enumerate() {
                        next[d + 1] += (2 * l - 1) as f64 * c;
                    }
                    for (d, &c) in w_prev.iter().enumerate() {
                        next[d] -= (l + m - 1) as f64 * c;
                    }
                    for c in &mut next {
                        *c /= (l - m) as f64;
                    }
                    w_prev = w_curr;
                    w_curr = next;
                }
            }
            // r^{k-m} W(z/r) = sum_d w_d z^d (x^2+y^2+z^2)^{(k-m-d)/2}
            let r2 = Polynomial::new(vec![
                Monomial {
                    coef: 1.0,
                    powers: [2, 0, 0],
                    t_power: 0,
                },
                Monomial {
                    coef: 1.0,
                    powers: [0, 2, 0],
                    t_power: 0,
                },
                Monomial {
                    coef: 1.0,
                    powers: [0, 0, 2],
                    t_power: 0,
                },
            ]);
            let mut radial = Polynomial::zero();
            for (d, &c) in w_curr.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let e2 = k - m - d;
                debug_assert!(e2 % 2 == 0);
                let mut term = Polynomial::new(vec![Monomial {
                    coef: c,
                    powers: [0, 0, d as u8],
                    t_power: 0,
                }]);
                for _ in 0..e2 / 2 {
                    term = term.mul(&r2);
                }
                radial = radial.add(&term);
            }
            let azimuthal = if m == 0 {
                Polynomial::constant(1.0)
            } else if is_cos {
                circular_cos(m)
            } else {
                circular_sin(m)
            };
            let norm = crate::specialfn::sh_norm_3d(k, m)
                * if m == 0 { 1.0 } else { std::f64::consts::SQRT_2 };
            Ok(radial.mul(&azimuthal).scale(norm))
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

// 4th-order central difference stencils, one per derivative order.
const FD1: [(i32, f64); 4] = [
    (-2, 1.0 / 12.0),
    (-1, -8.0 / 12.0),
    (1, 8.0 / 12.0),
    (2, -1.0 / 12.0),
];
const FD2: [(i32, f64); 5] = [
    (-2, -1.0 / 12.0),
    (-1, 16.0 / 12.0),
    (0, -30.0 / 12.0),
    (1, 16.0 / 12.0),
    (2, -1.0 / 12.0),
];
const FD3: [(i32, f64); 6] = [
    (-3, 1.0 / 8.0),
    (-2, -1.0),
    (-1, 13.0 / 8.0),
    (1, -13.0 / 8.0),
    (2, 1.0),
    (3, -1.0 / 8.0),
];
const FD4: [(i32, f64); 7] = [
    (-3, -1.0 / 6.0),
    (-2, 2.0),
    (-1, -39.0 / 6.0),
    (0, 56.0 / 6.0),
    (1, -39.0 / 6.0),
    (2, 2.0),
    (3, -1.0 / 6.0),
];

fn stencil(order: usize) -> &'static [(i32, f64)] {
    match order {
        1 => &FD1,
        2 => &FD2,
        3 => &FD3,
        _ => &FD4,
    }
}

/// Step enlargement per total derivative order. Rounding error of a
/// composite central stencil scales like eps/h^m, so third and fourth
/// derivatives cannot run at the first-order step in double precision.
fn fd_step_factor(total_order: usize) -> f64 {
    match total_order {
        0..=2 => 1.0,
        3 => 8.0,
        _ => 25.0,
    }
}

/// Nested application of per-axis central stencils at step `h`.
fn fd_spatial(f: &dyn Fn(&SpacePoint) -> f64, alpha: [usize; 3], x: &SpacePoint, h: f64) -> f64 {
    match alpha.iter().position(|&a| a > 0) {
        None => f(x),
        Some(axis) => {
            let order = alpha[axis];
            let mut rest = alpha;
            rest[axis] = 0;
            let mut acc = 0.0;
            for &(offset, coef) in stencil(order) {
                let mut shifted = *x;
                shifted[axis] += offset as f64 * h;
                acc += coef * fd_spatial(f, rest, &shifted, h);
            }
            acc / h.powi(order as i32)
        }
    }
}

/// Spatial profile B(x) of a separable ball atom.
fn ball_profile(
    n: usize,
    k: usize,
    j: usize,
    order: f64,
    lambda: f64,
    x: &SpacePoint,
) -> Result<f64> {
    let beta = lambda.sqrt();
    let r: f64 = x[..n].iter().map(|c| c * c).sum::<f64>().sqrt();
    if r == 0.0 {
        if k > 0 {
            return Ok(0.0);
        }
        let radial = match n {
            2 => 1.0, // J_0(0)
            // limit of r^{-1/2} J_{1/2}(beta r): (beta/2)^{1/2} / Gamma(3/2)
            _ => (0.5 * beta).sqrt() / ln_gamma(1.5).exp(),
        };
        let idx = HarmonicIndex::new(n, 0, 1)?;
        let dir = [1.0, 0.0, 0.0];
        return Ok(radial * spherical_harmonic(&idx, &dir)?);
    }
    let radial = r.powf((2.0 - n as f64) / 2.0) * bessel_j(order, beta * r)?;
    let mut dir = [0.0; 3];
    for i in 0..n {
        dir[i] = x[i] / r;
    }
    let idx = HarmonicIndex { n, k, j };
    Ok(radial * spherical_harmonic(&idx, &dir)?)
}

/// The derivative d^j_t d^alpha_x of an atom at a point.
///
/// Heat polynomials, static harmonics and biharmonic atoms differentiate
/// exactly through their polynomial form; fundamental translates through
/// Hermite factors; separable ball atoms use validated 4th-order central
/// differences in space (step 1e-4 of the ball diameter) with exact
/// exponential time factors.
pub fn eval_atom(atom: &CaloricAtom, d: &MultiIndex, x: &SpacePoint, t: f64) -> Result<f64> {
    d.check(atom.n())?;
    match atom {
        CaloricAtom::HeatPolynomial { poly, .. }
        | CaloricAtom::StaticHarmonic { poly, .. }
        | CaloricAtom::BiharmonicCaloric { poly, .. } => Ok(poly.derivative(d).eval(x, t)),
        CaloricAtom::FundamentalTranslate { n, source } => {
            let mut z = [0.0; 3];
            for i in 0..*n {
                z[i] = x[i] - source.x[i];
            }
            phi_derivative(*n, &z, t - source.t, d)
        }
        CaloricAtom::SeparableBall {
            n,
            k,
            j,
            r2,
            lambda,
            order,
            ..
        } => {
            let time_factor = (-lambda).powi(d.j as i32) * (-lambda * t).exp();
            let spatial_order: usize = d.alpha.iter().sum();
            if spatial_order == 0 {
                return Ok(time_factor * ball_profile(*n, *k, *j, *order, *lambda, x)?);
            }
            let h = 1e-4 * 2.0 * r2 * fd_step_factor(spatial_order);
            let profile = |p: &SpacePoint| -> f64 {
                ball_profile(*n, *k, *j, *order, *lambda, p).unwrap_or(f64::NAN)
            };
            Ok(time_factor * fd_spatial(&profile, d.alpha, x, h))
        }
    }
}

/// Relative Richardson consistency of the finite-difference derivative:
/// |D_h - D_{h/2}| scaled by the larger magnitude. Exact kinds report 0.
pub fn fd_consistency_check(
    atom: &CaloricAtom,
    d: &MultiIndex,
    x: &SpacePoint,
    t: f64,
) -> Result<f64> {
    let CaloricAtom::SeparableBall {
        n,
        k,
        j,
        r2,
        lambda,
        order,
        ..
    } = atom
    else {
        return Ok(0.0);
    };
    d.check(atom.n())?;
    if d.alpha.iter().sum::<usize>() == 0 {
        return Ok(0.0);
    }
    let profile =
        |p: &SpacePoint| -> f64 { ball_profile(*n, *k, *j, *order, *lambda, p).unwrap_or(f64::NAN) };
    let spatial_order: usize = d.alpha.iter().sum();
    let h = 1e-4 * 2.0 * r2 * fd_step_factor(spatial_order);
    let time_factor = (-lambda).powi(d.j as i32) * (-lambda * t).exp();
    let coarse = time_factor * fd_spatial(&profile, d.alpha, x, h);
    let fine = time_factor * fd_spatial(&profile, d.alpha, x, 0.5 * h);
    let scale = coarse.abs().max(fine.abs()).max(1.0);
    Ok((coarse - fine).abs() / scale)
}

/// Pointwise caloricity oracle: d_t u - Laplacian(u), assembled from
/// `eval_atom` calls.
pub fn heat_residual(atom: &CaloricAtom, x: &SpacePoint, t: f64) -> Result<f64> {
    let n = atom.n();
    let mut v = eval_atom(atom, &MultiIndex::time(1), x, t)?;
    for axis in 0..n {
        let mut alpha = [0usize; 3];
        alpha[axis] = 2;
        v -= eval_atom(atom, &MultiIndex::spatial(alpha), x, t)?;
    }
    Ok(v)
}

/// Finite-difference check of the backward operator on the source slot:
/// (-d/dtau - Laplacian_y) Phi(x - y, t - tau) at frozen (x, t).
pub fn backward_residual_fd(n: usize, frozen: &SpaceTimePoint, at: &SpaceTimePoint) -> Result<f64> {
    let v = |y: &SpacePoint, tau: f64| -> f64 {
        let mut z = [0.0; 3];
        for i in 0..n {
            z[i] = frozen.x[i] - y[i];
        }
        fundamental_solution(n, &z, frozen.t - tau).unwrap_or(f64::NAN)
    };
    let lag = frozen.t - at.t;
    if lag <= 0.0 {
        return Err(Error::UnsupportedPoint(
            "backward check needs t - tau > 0".into(),
        ));
    }
    let h_space = 1e-4;
    let h_time = (1e-4f64).min(lag / 8.0);
    // -d/dtau via the 4th-order first-derivative stencil in tau
    let mut dtau = 0.0;
    for &(offset, coef) in stencil(1) {
        dtau += coef * v(&at.x, at.t + offset as f64 * h_time);
    }
    dtau /= h_time;
    let mut lap = 0.0;
    for axis in 0..n {
        let mut acc = 0.0;
        for &(offset, coef) in stencil(2) {
            let mut y = at.x;
            y[axis] += offset as f64 * h_space;
            acc += coef * v(&y, at.t);
        }
        lap += acc / (h_space * h_space);
    }
    Ok(-dtau - lap)
}

/// Values of one derivative of one atom over many nodes. Polynomial kinds
/// differentiate once and evaluate cheaply; the remaining kinds fall back to
/// per-node evaluation.
pub(crate) fn derivative_values(
    atom: &CaloricAtom,
    d: &MultiIndex,
    nodes: &[SpaceTimePoint],
) -> Result<Vec<f64>> {
    d.check(atom.n())?;
    match atom {
        CaloricAtom::HeatPolynomial { poly, .. }
        | CaloricAtom::StaticHarmonic { poly, .. }
        | CaloricAtom::BiharmonicCaloric { poly, .. } => {
            let dp = poly.derivative(d);
            Ok(nodes.iter().map(|p| dp.eval(&p.x, p.t)).collect())
        }
        _ => nodes
            .iter()
            .map(|p| eval_atom(atom, d, &p.x, p.t))
            .collect(),
    }
}

/// Anything evaluable on a cylinder. Evaluation failures surface as NaN so
/// quadrature propagates them.
pub trait Field {
    fn value(&self, x: &SpacePoint, t: f64) -> f64;
}

/// Fields with anisotropic derivatives up to `MAX_DERIVATIVE_ORDER`.
pub trait DiffField: Field {
    fn derivative(&self, d: &MultiIndex, x: &SpacePoint, t: f64) -> Result<f64>;
}

impl Field for CaloricAtom {
    fn value(&self, x: &SpacePoint, t: f64) -> f64 {
        eval_atom(self, &MultiIndex::VALUE, x, t).unwrap_or(f64::NAN)
    }
}

impl DiffField for CaloricAtom {
    fn derivative(&self, d: &MultiIndex, x: &SpacePoint, t: f64) -> Result<f64> {
        eval_atom(self, d, x, t)
    }
}

impl<F: Fn(&SpacePoint, f64) -> f64> Field for F {
    fn value(&self, x: &SpacePoint, t: f64) -> f64 {
        self(x, t)
    }
}

/// A finite linear combination of atoms; closed under the operations the
/// experiments need (projection output, continuation output).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LinearCombination {
    pub atoms: Vec<CaloricAtom>,
    pub coeffs: Vec<f64>,
}

impl LinearCombination {
    pub fn new(atoms: Vec<CaloricAtom>, coeffs: Vec<f64>) -> Self {
        assert_eq!(atoms.len(), coeffs.len());
        Self { atoms, coeffs }
    }
}

impl Field for LinearCombination {
    fn value(&self, x: &SpacePoint, t: f64) -> f64 {
        self.atoms
            .iter()
            .zip(&self.coeffs)
            .map(|(a, c)| c * a.value(x, t))
            .sum()
    }
}

impl DiffField for LinearCombination {
    fn derivative(&self, d: &MultiIndex, x: &SpacePoint, t: f64) -> Result<f64> {
        let mut acc = 0.0;
        for (a, c) in self.atoms.iter().zip(&self.coeffs) {
            acc += c * eval_atom(a, d, x, t)?;
        }
        Ok(acc)
    }
}

/// Wire format for atom dictionaries: tagged records, one per atom.
#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum AtomSpec {
    HeatPolynomial {
        degrees: Vec<usize>,
    },
    FundamentalTranslate {
        x: Vec<f64>,
        t: f64,
    },
    SeparableBall {
        n: usize,
        problem: BallProblem,
        k: usize,
        j: usize,
        m: usize,
        r2: f64,
    },
    StaticHarmonic {
        n: usize,
        k: usize,
        j: usize,
    },
    BiharmonicCaloric {
        n: usize,
        g: Vec<Monomial>,
    },
}

impl TryFrom<AtomSpec> for CaloricAtom {
    type Error = Error;

    fn try_from(spec: AtomSpec) -> Result<Self> {
        match spec {
            AtomSpec::HeatPolynomial { degrees } => CaloricAtom::heat_polynomial(&degrees),
            AtomSpec::FundamentalTranslate { x, t } => {
                CaloricAtom::fundamental_translate(x.len(), &x, t)
            }
            AtomSpec::SeparableBall {
                n,
                problem,
                k,
                j,
                m,
                r2,
            } => CaloricAtom::separable_ball(n, problem, k, j, m, r2),
            AtomSpec::StaticHarmonic { n, k, j } => CaloricAtom::static_harmonic(n, k, j),
            AtomSpec::BiharmonicCaloric { n, g } => {
                CaloricAtom::biharmonic_caloric(n, Polynomial::new(g))
            }
        }
    }
}

impl From<CaloricAtom> for AtomSpec {
    fn from(atom: CaloricAtom) -> Self {
        match atom {
            CaloricAtom::HeatPolynomial { degrees, .. } => AtomSpec::HeatPolynomial { degrees },
            CaloricAtom::FundamentalTranslate { n, source } => AtomSpec::FundamentalTranslate {
                x: source.x[..n].to_vec(),
                t: source.t,
            },
            CaloricAtom::SeparableBall {
                n,
                problem,
                k,
                j,
                m,
                r2,
                ..
            } => AtomSpec::SeparableBall {
                n,
                problem,
                k,
                j,
                m,
                r2,
            },
            CaloricAtom::StaticHarmonic { n, k, j, .. } => AtomSpec::StaticHarmonic { n, k, j },
            CaloricAtom::BiharmonicCaloric { n, g, .. } => AtomSpec::BiharmonicCaloric {
                n,
                g: g.terms().to_vec(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn splitmix(state: &mut u64) -> f64 {
        *state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = *state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        z ^= z >> 31;
        (z >> 11) as f64 / (1u64 << 53) as f64
    }

    fn random_point(n: usize, state: &mut u64) -> (SpacePoint, f64) {
        let mut x = [0.0; 3];
        for xi in x.iter_mut().take(n) {
            *xi = splitmix(state) - 0.5;
        }
        (x, splitmix(state))
    }

    #[test]
    fn fundamental_solution_values() {
        // vanishes for non-positive time lag
        assert_eq!(fundamental_solution(2, &[0.3, 0.1, 0.0], -1.0).unwrap(), 0.0);
        assert_eq!(fundamental_solution(2, &[0.3, 0.1, 0.0], 0.0).unwrap(), 0.0);
        // n = 1, x = 0, t = 1: 1/(2 sqrt(pi))
        let v = fundamental_solution(1, &[0.0; 3], 1.0).unwrap();
        assert!((v - 1.0 / (2.0 * PI.sqrt())).abs() < 1e-15);
        // n = 2, |x| = 2, t = 1: e^{-1}/(4 pi)
        let v = fundamental_solution(2, &[2.0, 0.0, 0.0], 1.0).unwrap();
        assert!((v - (-1.0f64).exp() / (4.0 * PI)).abs() < 1e-16);
        assert!(matches!(
            fundamental_solution(2, &[0.0; 3], 0.0),
            Err(Error::SingularPoint)
        ));
    }

    #[test]
    fn heat_polynomial_value_and_caloricity() {
        let atom = CaloricAtom::heat_polynomial(&[2]).unwrap();
        let v = eval_atom(&atom, &MultiIndex::VALUE, &[1.2, 0.0, 0.0], 0.7).unwrap();
        assert_eq!(v, 1.2 * 1.2 + 2.0 * 0.7);
        let mut state = 42;
        let atom3 = CaloricAtom::heat_polynomial(&[3, 2, 1]).unwrap();
        for _ in 0..100 {
            let (x, t) = random_point(3, &mut state);
            let r = heat_residual(&atom3, &x, t).unwrap();
            assert!(r.abs() < 1e-12, "residual {r}");
        }
    }

    #[test]
    fn fundamental_translate_is_caloric() {
        let atom = CaloricAtom::fundamental_translate(2, &[2.0, 0.5], -0.25).unwrap();
        let mut state = 7;
        for _ in 0..100 {
            let (x, t) = random_point(2, &mut state);
            let r = heat_residual(&atom, &x, t).unwrap();
            assert!(r.abs() < 1e-8, "residual {r} at {x:?}, {t}");
        }
    }

    #[test]
    fn phi_spatial_derivatives_match_finite_differences() {
        let n = 2;
        let z = [0.6, -0.4, 0.0];
        let s = 0.35;
        let h = 1e-4;
        let f = |p: &SpacePoint| fundamental_solution(n, p, s).unwrap();
        for alpha in [[1, 0, 0], [0, 1, 0], [2, 0, 0], [1, 1, 0]] {
            let exact = phi_derivative(n, &z, s, &MultiIndex::spatial(alpha)).unwrap();
            let fd = fd_spatial(&f, alpha, &z, h);
            assert!(
                (exact - fd).abs() < 1e-6 * exact.abs().max(1.0),
                "alpha {alpha:?}: {exact} vs {fd}"
            );
        }
        // fourth-order mixed derivative at the enlarged step
        let alpha4 = [2usize, 2, 0];
        let exact4 = phi_derivative(n, &z, s, &MultiIndex::spatial(alpha4)).unwrap();
        let fd4 = fd_spatial(&f, alpha4, &z, h * fd_step_factor(4));
        assert!(
            (exact4 - fd4).abs() < 1e-3 * exact4.abs().max(1.0),
            "alpha {alpha4:?}: {exact4} vs {fd4}"
        );
        // time derivative against FD in t
        let exact_t = phi_derivative(n, &z, s, &MultiIndex::time(1)).unwrap();
        let mut fd_t = 0.0;
        for &(offset, coef) in stencil(1) {
            fd_t += coef * fundamental_solution(n, &z, s + offset as f64 * h).unwrap();
        }
        fd_t /= h;
        assert!((exact_t - fd_t).abs() < 1e-6 * exact_t.abs().max(1.0));
    }

    #[test]
    fn separable_ball_dirichlet_vanishes_on_boundary() {
        let atom = CaloricAtom::separable_ball(2, BallProblem::Dirichlet, 0, 1, 1, 1.0).unwrap();
        for &theta in &[0.0f64, 1.0, 2.5, 4.0] {
            let x = [theta.cos(), theta.sin(), 0.0];
            let v = eval_atom(&atom, &MultiIndex::VALUE, &x, 0.3).unwrap();
            assert!(v.abs() < 1e-9, "boundary value {v}");
        }
    }

    #[test]
    fn separable_ball_neumann_radial_derivative_vanishes() {
        // in the plane the profile is J_k(beta r) h(theta); at r = R2 the
        // radial derivative is beta J'_k(beta R2) = 0
        let atom = CaloricAtom::separable_ball(2, BallProblem::Neumann, 1, 1, 1, 1.0).unwrap();
        let theta = 0.9f64;
        let x = [theta.cos(), theta.sin(), 0.0];
        let dx = eval_atom(&atom, &MultiIndex::spatial([1, 0, 0]), &x, 0.2).unwrap();
        let dy = eval_atom(&atom, &MultiIndex::spatial([0, 1, 0]), &x, 0.2).unwrap();
        let radial = dx * theta.cos() + dy * theta.sin();
        assert!(radial.abs() < 1e-8, "radial derivative {radial}");
    }

    #[test]
    fn separable_ball_atoms_are_caloric() {
        let mut state = 99;
        for (n, k, j, problem) in [
            (2, 0, 1, BallProblem::Dirichlet),
            (2, 1, 2, BallProblem::Neumann),
            (2, 2, 1, BallProblem::Dirichlet),
            (3, 0, 1, BallProblem::Dirichlet),
            (3, 1, 2, BallProblem::Neumann),
            (3, 2, 4, BallProblem::Dirichlet),
        ] {
            let atom = CaloricAtom::separable_ball(n, problem, k, j, 1, 1.0).unwrap();
            for _ in 0..100 {
                let (x, t) = random_point(n, &mut state);
                let u = eval_atom(&atom, &MultiIndex::VALUE, &x, t).unwrap();
                let lam = match &atom {
                    CaloricAtom::SeparableBall { lambda, .. } => *lambda,
                    _ => unreachable!(),
                };
                let scale = (1.0 + lam) * u.abs().max(0.05);
                let r = heat_residual(&atom, &x, t).unwrap();
                assert!(
                    r.abs() < 1e-6 * scale,
                    "n={n} k={k}: residual {r} vs scale {scale}"
                );
            }
        }
    }

    #[test]
    fn fd_consistency_is_tight() {
        let atom = CaloricAtom::separable_ball(2, BallProblem::Dirichlet, 1, 1, 2, 1.0).unwrap();
        let check = fd_consistency_check(
            &atom,
            &MultiIndex::spatial([2, 0, 0]),
            &[0.31, -0.2, 0.0],
            0.4,
        )
        .unwrap();
        assert!(check < 1e-6, "richardson gap {check}");
    }

    #[test]
    fn static_harmonic_matches_pointwise_construction() {
        let mut state = 5;
        for (k, j) in [(0, 1), (1, 2), (2, 3), (3, 5), (4, 6)] {
            let atom = CaloricAtom::static_harmonic(3, k, j).unwrap();
            for _ in 0..20 {
                let (x, _) = random_point(3, &mut state);
                let r: f64 = x.iter().map(|c| c * c).sum::<f64>().sqrt();
                let dir = [x[0] / r, x[1] / r, x[2] / r];
                let idx = HarmonicIndex::new(3, k, j).unwrap();
                let reference = r.powi(k as i32) * spherical_harmonic(&idx, &dir).unwrap();
                let v = eval_atom(&atom, &MultiIndex::VALUE, &x, 0.0).unwrap();
                assert!(
                    (v - reference).abs() < 1e-12 * reference.abs().max(1.0),
                    "(k, j) = ({k}, {j}): {v} vs {reference}"
                );
            }
            let mut st = 17;
            for _ in 0..100 {
                let (x, t) = random_point(3, &mut st);
                assert!(heat_residual(&atom, &x, t).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn biharmonic_atom_caloricity_and_validation() {
        // G = x^3 y: Laplacian is 6 x y, biharmonic
        let g = Polynomial::new(vec![Monomial {
            coef: 1.0,
            powers: [3, 1, 0],
            t_power: 0,
        }]);
        let atom = CaloricAtom::biharmonic_caloric(2, g).unwrap();
        let v = eval_atom(&atom, &MultiIndex::VALUE, &[2.0, 1.0, 0.0], 0.5).unwrap();
        assert_eq!(v, 8.0 + 0.5 * 6.0 * 2.0);
        let mut state = 3;
        for _ in 0..100 {
            let (x, t) = random_point(2, &mut state);
            assert!(heat_residual(&atom, &x, t).unwrap().abs() < 1e-12);
        }
        // harmonic G (Laplacian zero) also passes: residual identically 0
        let g4 = circular_cos(4);
        let atom4 = CaloricAtom::biharmonic_caloric(2, g4).unwrap();
        let mut st = 11;
        for _ in 0..100 {
            let (x, t) = random_point(2, &mut st);
            assert!(heat_residual(&atom4, &x, t).unwrap().abs() < 1e-12);
        }
        // x^4 is not biharmonic in the plane
        let bad = Polynomial::new(vec![Monomial {
            coef: 1.0,
            powers: [4, 0, 0],
            t_power: 0,
        }]);
        assert!(CaloricAtom::biharmonic_caloric(2, bad).is_err());
    }

    #[test]
    fn backward_operator_check() {
        let frozen = SpaceTimePoint::new([0.4, -0.2, 0.0], 0.8);
        let mut state = 21;
        for _ in 0..20 {
            let (y, _) = random_point(2, &mut state);
            let tau = 0.3 * splitmix(&mut state);
            let at = SpaceTimePoint::new(y, tau);
            let r = backward_residual_fd(2, &frozen, &at).unwrap();
            assert!(r.abs() < 1e-6, "backward residual {r}");
        }
    }

    #[test]
    fn derivative_order_cap() {
        let atom = CaloricAtom::heat_polynomial(&[4]).unwrap();
        let too_high = MultiIndex {
            alpha: [3, 0, 0],
            j: 1,
        };
        assert!(matches!(
            eval_atom(&atom, &too_high, &[0.0; 3], 0.0),
            Err(Error::DerivativeOrder { got: 5, .. })
        ));
    }

    #[test]
    fn atom_dictionary_round_trips_through_json() {
        let atoms = vec![
            CaloricAtom::heat_polynomial(&[2, 1]).unwrap(),
            CaloricAtom::fundamental_translate(2, &[1.5, 0.0], -0.5).unwrap(),
            CaloricAtom::separable_ball(2, BallProblem::Neumann, 1, 1, 2, 1.0).unwrap(),
            CaloricAtom::static_harmonic(2, 3, 2).unwrap(),
        ];
        let text = serde_json::to_string(&atoms).unwrap();
        let back: Vec<CaloricAtom> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, atoms);
    }
}
