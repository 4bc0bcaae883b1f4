//! Parabolic potentials (initial, volume, single layer, double layer) and
//! the numerical verifier of the integral Green formula
//!
//!   u inside / 0 outside = I(u) + G(Hu) + V(d_nu u) + W(u).
//!
//! Layer integrals run over sphere or circle boundaries only, where normals
//! and surface measure are analytic. The time integral uses a geometrically
//! graded mesh clustered at tau = t to resolve the kernel's integrable
//! concentration there.

use crate::caloric::{DiffField, Field, MultiIndex};
use crate::domain::{
    gauss_legendre_on, spatial_quadrature, unit_sphere_rule, BaseKind, Cylinder, SpacePoint,
};
use crate::error::{Error, Result};
use crate::numerics::KahanSum;

/// Quadrature on the lateral boundary of a ball base: surface nodes with
/// outward unit normals and surface-measure weights.
#[derive(Clone, Debug)]
pub struct SurfaceQuadrature {
    nodes: Vec<SpacePoint>,
    normals: Vec<SpacePoint>,
    weights: Vec<f64>,
}

impl SurfaceQuadrature {
    /// Build a rule on the sphere/circle bounding a ball base.
    pub fn on_ball(base: &crate::domain::BaseDomain, angular: usize) -> Result<Self> {
        let BaseKind::Ball { center, radius } = *base.kind() else {
            return Err(Error::InvalidGeometry(
                "surface quadrature is implemented for ball bases only".into(),
            ));
        };
        let n = base.n();
        let (dirs, dir_weights) = unit_sphere_rule(n, angular)?;
        let measure = radius.powi(n as i32 - 1);
        let mut nodes = Vec::with_capacity(dirs.len());
        let mut weights = Vec::with_capacity(dirs.len());
        for (d, w) in dirs.iter().zip(&dir_weights) {
            let mut x = center;
            for i in 0..n {
                x[i] += radius * d[i];
            }
            nodes.push(x);
            weights.push(w * measure);
        }
        Ok(Self {
            nodes,
            normals: dirs,
            weights,
        })
    }

    pub fn nodes(&self) -> &[SpacePoint] {
        &self.nodes
    }

    pub fn normals(&self) -> &[SpacePoint] {
        &self.normals
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// The four parabolic potentials.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PotentialKind {
    InitialI,
    VolumeG,
    SingleLayerV,
    DoubleLayerW,
}

/// Quadrature resolutions for potential evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PotentialResolution {
    /// radial x angular counts for volume integrals over the base
    pub spatial: (usize, usize),
    /// angular count on the boundary
    pub surface: usize,
    /// Gauss-Legendre nodes per graded time segment
    pub time_per_level: usize,
    /// number of geometric refinement levels toward tau = t (ratio 0.5)
    pub levels: usize,
}

impl Default for PotentialResolution {
    fn default() -> Self {
        Self {
            spatial: (16, 32),
            surface: 48,
            time_per_level: 4,
            levels: 12,
        }
    }
}

impl PotentialResolution {
    pub fn refine(&self, factor: usize) -> Self {
        Self {
            spatial: (self.spatial.0 * factor, self.spatial.1 * factor),
            surface: self.surface * factor,
            time_per_level: self.time_per_level * factor,
            levels: self.levels,
        }
    }
}

/// Graded temporal rule on [t1, t): geometric segments with ratio 0.5
/// clustered at the right endpoint.
fn graded_time_rule(t1: f64, t: f64, levels: usize, per_level: usize) -> (Vec<f64>, Vec<f64>) {
    let length = t - t1;
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut left = t1;
    for level in 1..=levels {
        let right = t - length * 0.5f64.powi(level as i32);
        let (xs, ws) = gauss_legendre_on(per_level, left, right);
        nodes.extend(xs);
        weights.extend(ws);
        left = right;
    }
    let (xs, ws) = gauss_legendre_on(per_level, left, t);
    nodes.extend(xs);
    weights.extend(ws);
    (nodes, weights)
}

fn phi(n: usize, x: &SpacePoint, y: &SpacePoint, s: f64) -> f64 {
    let mut z = [0.0; 3];
    for i in 0..n {
        z[i] = x[i] - y[i];
    }
    crate::caloric::fundamental_solution(n, &z, s).unwrap_or(f64::NAN)
}

/// Normal derivative in the source variable:
/// d_{nu_y} Phi(x - y, s) = Phi(x - y, s) (x - y) . nu / (2 s).
fn phi_normal_derivative(n: usize, x: &SpacePoint, y: &SpacePoint, nu: &SpacePoint, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let mut dotp = 0.0;
    for i in 0..n {
        dotp += (x[i] - y[i]) * nu[i];
    }
    phi(n, x, y, s) * dotp / (2.0 * s)
}

/// Evaluate one parabolic potential at (x, t). The density is sampled at
/// (y, T1) for the initial potential, on the open cylinder for the volume
/// potential and on the lateral boundary for the layer potentials. For
/// t <= T1 every kernel vanishes and the value is exactly 0.
pub fn parabolic_potential(
    kind: PotentialKind,
    density: &dyn Field,
    cyl: &Cylinder,
    res: &PotentialResolution,
    x: &SpacePoint,
    t: f64,
) -> Result<f64> {
    let n = cyl.n();
    let t1 = cyl.t_start();
    if t <= t1 {
        return Ok(0.0);
    }
    match kind {
        PotentialKind::InitialI => {
            let (nodes, weights, _) =
                spatial_quadrature(cyl.base(), res.spatial.0, res.spatial.1)?;
            let mut acc = KahanSum::new();
            for (y, w) in nodes.iter().zip(&weights) {
                acc.add(w * phi(n, x, y, t - t1) * density.value(y, t1));
            }
            Ok(acc.value())
        }
        PotentialKind::VolumeG => {
            let (nodes, weights, _) =
                spatial_quadrature(cyl.base(), res.spatial.0, res.spatial.1)?;
            let (taus, tws) = graded_time_rule(t1, t, res.levels, res.time_per_level);
            let mut acc = KahanSum::new();
            for (tau, tw) in taus.iter().zip(&tws) {
                for (y, w) in nodes.iter().zip(&weights) {
                    acc.add(tw * w * phi(n, x, y, t - tau) * density.value(y, *tau));
                }
            }
            Ok(acc.value())
        }
        PotentialKind::SingleLayerV | PotentialKind::DoubleLayerW => {
            let surface = SurfaceQuadrature::on_ball(cyl.base(), res.surface)?;
            let on_surface = surface
                .nodes()
                .iter()
                .any(|y| y[..n].iter().zip(&x[..n]).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
                    < 1e-24);
            let boundary_distance = match *cyl.base().kind() {
                BaseKind::Ball { center, radius } => {
                    let r: f64 = (0..n)
                        .map(|i| (x[i] - center[i]).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    (r - radius).abs()
                }
                _ => unreachable!(),
            };
            if on_surface || boundary_distance < 1e-12 {
                return Err(Error::UnsupportedPoint(
                    "layer potentials are not evaluated on the lateral boundary".into(),
                ));
            }
            let (taus, tws) = graded_time_rule(t1, t, res.levels, res.time_per_level);
            let mut acc = KahanSum::new();
            for (tau, tw) in taus.iter().zip(&tws) {
                for ((y, nu), w) in surface
                    .nodes()
                    .iter()
                    .zip(surface.normals())
                    .zip(surface.weights())
                {
                    let kernel = match kind {
                        PotentialKind::SingleLayerV => phi(n, x, y, t - tau),
                        _ => -phi_normal_derivative(n, x, y, nu, t - tau),
                    };
                    acc.add(tw * w * kernel * density.value(y, *tau));
                }
            }
            Ok(acc.value())
        }
    }
}

/// Outcome of a Green-formula check at one point.
#[derive(Clone, Copy, Debug)]
pub struct GreenCheck {
    /// I(u) + V(d_nu u) + W(u) at the point (the G term vanishes on
    /// caloric targets).
    pub reproduced: f64,
    /// u at the point (meaningful inside the cylinder).
    pub target: f64,
    /// |reproduced - u| inside, |reproduced| outside.
    pub residual: f64,
}

/// Verify the reproduction formula for a caloric field smooth on the closed
/// cylinder. Points on the boundary of the cylinder are rejected.
pub fn green_identity(
    u: &dyn DiffField,
    cyl: &Cylinder,
    res: &PotentialResolution,
    x: &SpacePoint,
    t: f64,
) -> Result<GreenCheck> {
    let n = cyl.n();
    let inside_space = cyl.base().contains_point(x);
    let inside = inside_space && cyl.t_start() < t && t < cyl.t_end();
    let outside_space = !cyl.base().closure_contains_point(x);
    let outside = outside_space || t < cyl.t_start() || t > cyl.t_end();
    if !inside && !outside {
        return Err(Error::UnsupportedPoint(
            "green identity point must be strictly inside or outside the closed cylinder".into(),
        ));
    }

    let initial = parabolic_potential(PotentialKind::InitialI, u, cyl, res, x, t)?;

    let normal_derivative = NormalDerivative { inner: u, n };
    let single = parabolic_potential(PotentialKind::SingleLayerV, &normal_derivative, cyl, res, x, t)
        .or_else(|e| match e {
            // layer kernels vanish identically for t <= T1
            Error::UnsupportedPoint(_) if t <= cyl.t_start() => Ok(0.0),
            e => Err(e),
        })?;
    let double = parabolic_potential(PotentialKind::DoubleLayerW, &WrapField(u), cyl, res, x, t)?;

    let reproduced = initial + single + double;
    let target = u.value(x, t);
    let residual = if inside {
        (reproduced - target).abs()
    } else {
        reproduced.abs()
    };
    Ok(GreenCheck {
        reproduced,
        target,
        residual,
    })
}

struct WrapField<'a>(&'a dyn DiffField);

impl Field for WrapField<'_> {
    fn value(&self, x: &SpacePoint, t: f64) -> f64 {
        self.0.value(x, t)
    }
}

/// d_nu u on a sphere centred like the base: normals are radial, so the
/// normal derivative is evaluated from first spatial derivatives.
struct NormalDerivative<'a> {
    inner: &'a dyn DiffField,
    n: usize,
}

impl Field for NormalDerivative<'_> {
    fn value(&self, x: &SpacePoint, t: f64) -> f64 {
        let r: f64 = x[..self.n].iter().map(|c| c * c).sum::<f64>().sqrt();
        if r == 0.0 {
            return f64::NAN;
        }
        let mut acc = 0.0;
        for axis in 0..self.n {
            let mut alpha = [0usize; 3];
            alpha[axis] = 1;
            match self.inner.derivative(&MultiIndex::spatial(alpha), x, t) {
                Ok(v) => acc += v * x[axis] / r,
                Err(_) => return f64::NAN,
            }
        }
        acc
    }
}
