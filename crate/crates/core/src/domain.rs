//! Space-time cylinders over ball, annulus and box bases, and tensor
//! quadrature rules on them.
//!
//! Rules are Gauss-Legendre in radius and time. Angular nodes are the two
//! directions of S^0 in one dimension, uniformly spaced angles in the plane
//! (the trapezoid rule, exact for trigonometric polynomials) and
//! Gauss-Legendre in the polar angle crossed with a uniform azimuth on the
//! sphere. Weights carry the r^{n-1} Jacobian (and sin of the polar angle
//! for n = 3).

use crate::error::{Error, Result};
use crate::numerics::KahanSum;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A spatial point; coordinates beyond the active dimension stay zero.
pub type SpacePoint = [f64; 3];

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpaceTimePoint {
    pub x: SpacePoint,
    pub t: f64,
}

impl SpaceTimePoint {
    pub fn new(x: SpacePoint, t: f64) -> Self {
        Self { x, t }
    }
}

fn to_point(coords: &[f64]) -> Result<(SpacePoint, usize)> {
    let n = coords.len();
    if !(1..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    let mut p = [0.0; 3];
    p[..n].copy_from_slice(coords);
    Ok((p, n))
}

/// The spatial base of a cylinder.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum BaseKind {
    Ball {
        center: SpacePoint,
        radius: f64,
    },
    Annulus {
        center: SpacePoint,
        r_inner: f64,
        r_outer: f64,
    },
    Box {
        low: SpacePoint,
        high: SpacePoint,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BaseDomain {
    kind: BaseKind,
    n: usize,
}

impl BaseDomain {
    pub fn ball(center: &[f64], radius: f64) -> Result<Self> {
        let (center, n) = to_point(center)?;
        if !(radius > 0.0) {
            return Err(Error::InvalidGeometry(format!("ball radius {radius}")));
        }
        Ok(Self {
            kind: BaseKind::Ball { center, radius },
            n,
        })
    }

    pub fn annulus(center: &[f64], r_inner: f64, r_outer: f64) -> Result<Self> {
        let (center, n) = to_point(center)?;
        if !(r_inner > 0.0 && r_inner < r_outer) {
            return Err(Error::InvalidGeometry(format!(
                "annulus radii ({r_inner}, {r_outer})"
            )));
        }
        Ok(Self {
            kind: BaseKind::Annulus {
                center,
                r_inner,
                r_outer,
            },
            n,
        })
    }

    pub fn box_domain(low: &[f64], high: &[f64]) -> Result<Self> {
        if low.len() != high.len() {
            return Err(Error::InvalidGeometry(
                "box corner dimensions differ".into(),
            ));
        }
        let (low, n) = to_point(low)?;
        let (high, _) = to_point(high)?;
        for i in 0..n {
            if !(low[i] < high[i]) {
                return Err(Error::InvalidGeometry(format!(
                    "box corners must satisfy low < high componentwise (axis {i})"
                )));
            }
        }
        Ok(Self {
            kind: BaseKind::Box { low, high },
            n,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn kind(&self) -> &BaseKind {
        &self.kind
    }

    /// Lebesgue volume of the base.
    pub fn volume(&self) -> f64 {
        let ball = |r: f64| match self.n {
            1 => 2.0 * r,
            2 => PI * r * r,
            _ => 4.0 / 3.0 * PI * r * r * r,
        };
        match self.kind {
            BaseKind::Ball { radius, .. } => ball(radius),
            BaseKind::Annulus {
                r_inner, r_outer, ..
            } => ball(r_outer) - ball(r_inner),
            BaseKind::Box { low, high } => (0..self.n).map(|i| high[i] - low[i]).product(),
        }
    }

    pub fn contains_point(&self, x: &SpacePoint) -> bool {
        match self.kind {
            BaseKind::Ball { center, radius } => dist(x, &center, self.n) < radius,
            BaseKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let d = dist(x, &center, self.n);
                r_inner < d && d < r_outer
            }
            BaseKind::Box { low, high } => {
                (0..self.n).all(|i| low[i] < x[i] && x[i] < high[i])
            }
        }
    }

    /// Whether the closed base contains `x`.
    pub fn closure_contains_point(&self, x: &SpacePoint) -> bool {
        match self.kind {
            BaseKind::Ball { center, radius } => dist(x, &center, self.n) <= radius,
            BaseKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => {
                let d = dist(x, &center, self.n);
                r_inner <= d && d <= r_outer
            }
            BaseKind::Box { low, high } => {
                (0..self.n).all(|i| low[i] <= x[i] && x[i] <= high[i])
            }
        }
    }

    /// Whether `inner` is a subset of this base (strictly, up to the listed
    /// supported combinations).
    pub fn contains_domain(&self, inner: &BaseDomain) -> Result<bool> {
        if self.n != inner.n {
            return Ok(false);
        }
        match (&self.kind, &inner.kind) {
            (BaseKind::Ball { center, radius }, BaseKind::Ball { center: c2, radius: r2 }) => {
                Ok(dist(center, c2, self.n) + r2 < *radius)
            }
            (
                BaseKind::Ball { center, radius },
                BaseKind::Annulus {
                    center: c2,
                    r_outer,
                    ..
                },
            ) => Ok(dist(center, c2, self.n) + r_outer < *radius),
            (BaseKind::Box { low, high }, BaseKind::Box { low: l2, high: h2 }) => {
                Ok((0..self.n).all(|i| low[i] < l2[i] && h2[i] < high[i]))
            }
            (BaseKind::Box { low, high }, BaseKind::Ball { center, radius }) => {
                Ok((0..self.n).all(|i| low[i] < center[i] - radius && center[i] + radius < high[i]))
            }
            _ => Err(Error::InvalidGeometry(
                "containment check unsupported for this pair of bases".into(),
            )),
        }
    }

    /// Diameter of the base (the FD step scale for atom derivatives).
    pub fn diameter(&self) -> f64 {
        match self.kind {
            BaseKind::Ball { radius, .. } => 2.0 * radius,
            BaseKind::Annulus { r_outer, .. } => 2.0 * r_outer,
            BaseKind::Box { low, high } => (0..self.n)
                .map(|i| (high[i] - low[i]).powi(2))
                .sum::<f64>()
                .sqrt(),
        }
    }
}

fn dist(a: &SpacePoint, b: &SpacePoint, n: usize) -> f64 {
    (0..n).map(|i| (a[i] - b[i]).powi(2)).sum::<f64>().sqrt()
}

/// A space-time cylinder base x (t_start, t_end).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CylinderSpec", into = "CylinderSpec")]
pub struct Cylinder {
    base: BaseDomain,
    t_start: f64,
    t_end: f64,
}

impl Cylinder {
    pub fn new(base: BaseDomain, t_start: f64, t_end: f64) -> Result<Self> {
        if !(t_start < t_end) {
            return Err(Error::DegenerateInterval(t_start, t_end));
        }
        Ok(Self {
            base,
            t_start,
            t_end,
        })
    }

    pub fn base(&self) -> &BaseDomain {
        &self.base
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn t_start(&self) -> f64 {
        self.t_start
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn volume(&self) -> f64 {
        self.base.volume() * (self.t_end - self.t_start)
    }

    pub fn contains(&self, p: &SpaceTimePoint) -> bool {
        self.base.contains_point(&p.x) && self.t_start < p.t && p.t < self.t_end
    }

    pub fn closure_contains(&self, p: &SpaceTimePoint) -> bool {
        self.base.closure_contains_point(&p.x) && self.t_start <= p.t && p.t <= self.t_end
    }
}

/// Wire format: {"base": {"kind": "ball", ...}, "t": [T1, T2]}.
#[derive(Serialize, Deserialize)]
struct CylinderSpec {
    base: BaseSpec,
    t: [f64; 2],
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
enum BaseSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Annulus {
        center: Vec<f64>,
        r_inner: f64,
        r_outer: f64,
    },
    Box {
        low: Vec<f64>,
        high: Vec<f64>,
    },
}

impl TryFrom<CylinderSpec> for Cylinder {
    type Error = Error;

    fn try_from(spec: CylinderSpec) -> Result<Self> {
        let base = match spec.base {
            BaseSpec::Ball { center, radius } => BaseDomain::ball(&center, radius)?,
            BaseSpec::Annulus {
                center,
                r_inner,
                r_outer,
            } => BaseDomain::annulus(&center, r_inner, r_outer)?,
            BaseSpec::Box { low, high } => BaseDomain::box_domain(&low, &high)?,
        };
        Cylinder::new(base, spec.t[0], spec.t[1])
    }
}

impl From<Cylinder> for CylinderSpec {
    fn from(c: Cylinder) -> Self {
        let n = c.n();
        let base = match *c.base.kind() {
            BaseKind::Ball { center, radius } => BaseSpec::Ball {
                center: center[..n].to_vec(),
                radius,
            },
            BaseKind::Annulus {
                center,
                r_inner,
                r_outer,
            } => BaseSpec::Annulus {
                center: center[..n].to_vec(),
                r_inner,
                r_outer,
            },
            BaseKind::Box { low, high } => BaseSpec::Box {
                low: low[..n].to_vec(),
                high: high[..n].to_vec(),
            },
        };
        CylinderSpec {
            base,
            t: [c.t_start, c.t_end],
        }
    }
}

/// Nodes and positive weights of a tensor rule over a cylinder. The node
/// count equals the product of the realized per-axis counts.
#[derive(Clone, Debug)]
pub struct QuadratureRule {
    nodes: Vec<SpaceTimePoint>,
    weights: Vec<f64>,
    resolution: (usize, usize, usize),
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[SpaceTimePoint] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Realized per-axis counts (radial or first-axis, angular or remaining
    /// axes combined, temporal).
    pub fn resolution(&self) -> (usize, usize, usize) {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss-Legendre nodes and weights on [-1, 1], by Newton iteration on the
/// Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut pp = 0.0;
        for _ in 0..100 {
            let mut p0 = 1.0;
            let mut p1 = x;
            if n == 1 {
                p1 = x;
            }
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            pp = n as f64 * (x * pn - pn1) / (x * x - 1.0);
            let dx = pn / pp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Gauss-Legendre on [a, b].
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    (
        x.iter().map(|&xi| mid + half * xi).collect(),
        w.iter().map(|&wi| half * wi).collect(),
    )
}

/// Quadrature over the unit sphere S^{n-1}: directions and weights summing
/// to its surface measure (2 for S^0, 2 pi for S^1, 4 pi for S^2).
pub fn unit_sphere_rule(n: usize, angular: usize) -> Result<(Vec<SpacePoint>, Vec<f64>)> {
    if angular < 1 {
        return Err(Error::InvalidResolution("angular count must be >= 1".into()));
    }
    match n {
        1 => Ok((
            vec![[-1.0, 0.0, 0.0], [1.0, 0.0, 0.0]],
            vec![1.0, 1.0],
        )),
        2 => {
            let w = 2.0 * PI / angular as f64;
            let mut dirs = Vec::with_capacity(angular);
            for i in 0..angular {
                let theta = 2.0 * PI * i as f64 / angular as f64;
                dirs.push([theta.cos(), theta.sin(), 0.0]);
            }
            Ok((dirs, vec![w; angular]))
        }
        3 => {
            // Gauss-Legendre in the polar angle (sin factor in the weight),
            // uniform azimuth with twice the polar count.
            let (theta, wt) = gauss_legendre_on(angular, 0.0, PI);
            let n_phi = 2 * angular;
            let w_phi = 2.0 * PI / n_phi as f64;
            let mut dirs = Vec::with_capacity(angular * n_phi);
            let mut weights = Vec::with_capacity(angular * n_phi);
            for (t, wtheta) in theta.iter().zip(&wt) {
                let (st, ct) = t.sin_cos();
                for p in 0..n_phi {
                    let phi = 2.0 * PI * p as f64 / n_phi as f64;
                    dirs.push([st * phi.cos(), st * phi.sin(), ct]);
                    weights.push(wtheta * st * w_phi);
                }
            }
            Ok((dirs, weights))
        }
        n => Err(Error::UnsupportedDimension(n)),
    }
}

/// Spatial part of the tensor rule: nodes and weights over the base domain.
pub fn spatial_quadrature(
    base: &BaseDomain,
    radial: usize,
    angular: usize,
) -> Result<(Vec<SpacePoint>, Vec<f64>, (usize, usize))> {
    if radial < 1 || angular < 1 {
        return Err(Error::InvalidResolution(
            "resolution components must be >= 1".into(),
        ));
    }
    let n = base.n();
    match *base.kind() {
        BaseKind::Ball { center, radius } | BaseKind::Annulus { center, r_outer: radius, .. } => {
            let r_lo = match *base.kind() {
                BaseKind::Annulus { r_inner, .. } => {
                    if radial < 2 {
                        return Err(Error::InvalidResolution(
                            "annulus bases need a radial count >= 2".into(),
                        ));
                    }
                    r_inner
                }
                _ => 0.0,
            };
            let (r_nodes, r_weights) = gauss_legendre_on(radial, r_lo, radius);
            let (dirs, d_weights) = unit_sphere_rule(n, angular)?;
            let mut nodes = Vec::with_capacity(radial * dirs.len());
            let mut weights = Vec::with_capacity(radial * dirs.len());
            for (r, wr) in r_nodes.iter().zip(&r_weights) {
                let jac = r.powi(n as i32 - 1);
                for (d, wd) in dirs.iter().zip(&d_weights) {
                    let mut x = center;
                    for i in 0..n {
                        x[i] += r * d[i];
                    }
                    nodes.push(x);
                    weights.push(wr * jac * wd);
                }
            }
            Ok((nodes, weights, (radial, dirs.len())))
        }
        BaseKind::Box { low, high } => {
            // Gauss-Legendre with `radial` nodes per Cartesian axis.
            let per_axis: Vec<(Vec<f64>, Vec<f64>)> = (0..n)
                .map(|i| gauss_legendre_on(radial, low[i], high[i]))
                .collect();
            let mut nodes = vec![([0.0; 3], 1.0)];
            for (axis, (xs, ws)) in per_axis.iter().enumerate() {
                let mut next = Vec::with_capacity(nodes.len() * xs.len());
                for (x0, w0) in &nodes {
                    for (x, w) in xs.iter().zip(ws) {
                        let mut p = *x0;
                        p[axis] = *x;
                        next.push((p, w0 * w));
                    }
                }
                nodes = next;
            }
            let count = nodes.len();
            let (pts, ws): (Vec<_>, Vec<_>) = nodes.into_iter().unzip();
            Ok((pts, ws, (radial, count / radial)))
        }
    }
}

/// Tensor quadrature over a cylinder: spatial rule crossed with
/// Gauss-Legendre in time.
pub fn tensor_quadrature(
    cyl: &Cylinder,
    resolution: (usize, usize, usize),
) -> Result<QuadratureRule> {
    let (radial, angular, temporal) = resolution;
    if temporal < 1 {
        return Err(Error::InvalidResolution(
            "temporal count must be >= 1".into(),
        ));
    }
    let (pts, ws, (nr, na)) = spatial_quadrature(cyl.base(), radial, angular)?;
    let (t_nodes, t_weights) = gauss_legendre_on(temporal, cyl.t_start(), cyl.t_end());
    let mut nodes = Vec::with_capacity(pts.len() * temporal);
    let mut weights = Vec::with_capacity(pts.len() * temporal);
    for (t, wt) in t_nodes.iter().zip(&t_weights) {
        for (x, wx) in pts.iter().zip(&ws) {
            nodes.push(SpaceTimePoint::new(*x, *t));
            weights.push(wx * wt);
        }
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        resolution: (nr, na, temporal),
    })
}

/// Sum of w_i f(node_i) with compensated accumulation. Evaluation failures
/// propagate as NaN values in the sum.
pub fn quad_integrate(f: impl Fn(&SpacePoint, f64) -> f64, rule: &QuadratureRule) -> f64 {
    let mut acc = KahanSum::new();
    for (node, w) in rule.nodes().iter().zip(rule.weights()) {
        acc.add(w * f(&node.x, node.t));
    }
    acc.value()
}
