//! Anisotropic Sobolev and Lebesgue inner products over cylinders, and
//! Gram-matrix assembly for atom dictionaries.
//!
//! The H^{2s,s} product sums (d^j_t d^a_x u, d^j_t d^a_x v) over
//! |a| + 2j <= 2s; H^{k,2s,s} additionally sums over spatial prefixes
//! |b| <= k. Every pair is integrated on the same quadrature rule in the
//! same node order, so symmetry is exact and positive semidefiniteness
//! holds up to quadrature noise only.

use crate::caloric::{derivative_values, CaloricAtom, DiffField, MultiIndex, MAX_DERIVATIVE_ORDER};
use crate::domain::{Cylinder, QuadratureRule, tensor_quadrature};
use crate::error::{Error, Result};
use crate::numerics::{KahanSum, SymmetricMatrix};
use serde::{Deserialize, Serialize};
use std::io::Write;

/// Which inner product to use: plain L2, anisotropic H^{2s,s}, or the
/// spatially graded H^{k,2s,s}. Aniso(0) coincides with L2 and
/// AnisoK(0, s) with Aniso(s), by construction of the derivative set.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecKind {
    L2,
    Aniso { s: usize },
    AnisoK { k: usize, s: usize },
}

impl SpecKind {
    fn ks(&self) -> (usize, usize) {
        match *self {
            SpecKind::L2 => (0, 0),
            SpecKind::Aniso { s } => (0, s),
            SpecKind::AnisoK { k, s } => (k, s),
        }
    }

    /// Total derivative order the product demands.
    pub fn max_order(&self) -> usize {
        let (k, s) = self.ks();
        k + 2 * s
    }

    /// Derivative multi-indices of the sum with multiplicities, in graded
    /// lexicographic order of (beta, alpha, j). Identical totals are merged;
    /// the integer multiplicity keeps the floating-point result reproducible.
    pub fn derivative_terms(&self, n: usize) -> Result<Vec<(MultiIndex, usize)>> {
        if self.max_order() > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder {
                got: self.max_order(),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let (k, s) = self.ks();
        let betas = spatial_indices(n, k);
        let mut terms: Vec<(MultiIndex, usize)> = Vec::new();
        for beta in &betas {
            for (alpha, j) in aniso_indices(n, s) {
                let total = MultiIndex {
                    alpha: [
                        beta[0] + alpha[0],
                        beta[1] + alpha[1],
                        beta[2] + alpha[2],
                    ],
                    j,
                };
                match terms.iter_mut().find(|(d, _)| *d == total) {
                    Some((_, mult)) => *mult += 1,
                    None => terms.push((total, 1)),
                }
            }
        }
        Ok(terms)
    }
}

/// All beta with |beta| <= k over n axes, graded lexicographic.
fn spatial_indices(n: usize, k: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for total in 0..=k {
        let mut beta = [0usize; 3];
        enumerate_compositions(n, total, 0, &mut beta, &mut out);
    }
    out
}

fn enumerate_compositions(
    n: usize,
    remaining: usize,
    axis: usize,
    beta: &mut [usize; 3],
    out: &mut Vec<[usize; 3]>,
) {
    if axis == n - 1 {
        beta[axis] = remaining;
        out.push(*beta);
        beta[axis] = 0;
        return;
    }
    for v in 0..=remaining {
        beta[axis] = v;
        enumerate_compositions(n, remaining - v, axis + 1, beta, out);
    }
    beta[axis] = 0;
}

/// All (alpha, j) with |alpha| + 2j <= 2s, graded lexicographic.
fn aniso_indices(n: usize, s: usize) -> Vec<([usize; 3], usize)> {
    let mut out = Vec::new();
    for total in 0..=2 * s {
        for j in 0..=total / 2 {
            let spatial = total - 2 * j;
            let mut beta = [0usize; 3];
            let mut alphas = Vec::new();
            enumerate_compositions(n, spatial, 0, &mut beta, &mut alphas);
            for alpha in alphas {
                out.push((alpha, j));
            }
        }
    }
    out
}

/// An inner product bound to a cylinder and a quadrature rule.
#[derive(Clone, Debug)]
pub struct InnerProductSpec {
    kind: SpecKind,
    cylinder: Cylinder,
    rule: QuadratureRule,
}

impl InnerProductSpec {
    pub fn new(kind: SpecKind, cylinder: Cylinder, resolution: (usize, usize, usize)) -> Result<Self> {
        if kind.max_order() > MAX_DERIVATIVE_ORDER {
            return Err(Error::DerivativeOrder {
                got: kind.max_order(),
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        let rule = tensor_quadrature(&cylinder, resolution)?;
        Ok(Self {
            kind,
            cylinder,
            rule,
        })
    }

    pub fn kind(&self) -> SpecKind {
        self.kind
    }

    pub fn cylinder(&self) -> &Cylinder {
        &self.cylinder
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }
}

/// Quadrature approximation of the inner product of two fields. Symmetric
/// by construction: both arguments traverse the same nodes in the same
/// order.
pub fn inner_product(u: &dyn DiffField, v: &dyn DiffField, spec: &InnerProductSpec) -> Result<f64> {
    let n = spec.cylinder.n();
    let terms = spec.kind.derivative_terms(n)?;
    let mut total = 0.0;
    for (d, mult) in terms {
        let mut acc = KahanSum::new();
        for (node, w) in spec.rule.nodes().iter().zip(spec.rule.weights()) {
            let du = u.derivative(&d, &node.x, node.t)?;
            let dv = v.derivative(&d, &node.x, node.t)?;
            acc.add(w * du * dv);
        }
        total += mult as f64 * acc.value();
    }
    Ok(total)
}

/// Gram matrix of a dictionary under one spec. Entries are compensated
/// node sums over per-atom derivative tables; only the lower triangle is
/// computed, so the output is exactly symmetric.
pub fn gram(dictionary: &[CaloricAtom], spec: &InnerProductSpec) -> Result<SymmetricMatrix> {
    let n = spec.cylinder.n();
    let terms = spec.kind.derivative_terms(n)?;
    let len = dictionary.len();
    let mut matrix = SymmetricMatrix::zeros(len);
    if len == 0 {
        return Ok(matrix);
    }
    let weights = spec.rule.weights();
    let mut totals = vec![0.0f64; len * (len + 1) / 2];
    for (d, mult) in &terms {
        let tables: Vec<Vec<f64>> = dictionary
            .iter()
            .map(|atom| derivative_values(atom, d, spec.rule.nodes()))
            .collect::<Result<_>>()?;
        let mut idx = 0;
        for i in 0..len {
            for jj in 0..=i {
                let mut acc = KahanSum::new();
                for (w, (a, b)) in weights
                    .iter()
                    .zip(tables[i].iter().zip(tables[jj].iter()))
                {
                    acc.add(w * a * b);
                }
                totals[idx] += *mult as f64 * acc.value();
                idx += 1;
            }
        }
    }
    let mut idx = 0;
    for i in 0..len {
        for jj in 0..=i {
            matrix.set(i, jj, totals[idx]);
            idx += 1;
        }
    }
    Ok(matrix)
}

/// L2 norm of a field over the rule: sqrt of the compensated node sum.
pub fn l2_norm(target: &dyn crate::caloric::Field, rule: &QuadratureRule) -> f64 {
    let mut acc = KahanSum::new();
    for (node, w) in rule.nodes().iter().zip(rule.weights()) {
        let v = target.value(&node.x, node.t);
        acc.add(w * v * v);
    }
    acc.value().max(0.0).sqrt()
}

/// L2 pairing of a field against every atom of a dictionary.
pub fn l2_pairings(
    target: &dyn crate::caloric::Field,
    dictionary: &[CaloricAtom],
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let values: Vec<f64> = rule
        .nodes()
        .iter()
        .map(|node| target.value(&node.x, node.t))
        .collect();
    dictionary
        .iter()
        .map(|atom| {
            let table = derivative_values(atom, &MultiIndex::VALUE, rule.nodes())?;
            let mut acc = KahanSum::new();
            for ((w, a), b) in rule.weights().iter().zip(&table).zip(&values) {
                acc.add(w * a * b);
            }
            Ok(acc.value())
        })
        .collect()
}

/// Row-major CSV dump of a symmetric matrix in full-precision scientific
/// notation.
pub fn write_matrix_csv<W: Write>(m: &SymmetricMatrix, out: &mut W) -> std::io::Result<()> {
    for i in 0..m.order() {
        let row: Vec<String> = (0..m.order()).map(|j| format!("{:.16e}", m.get(i, j))).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
