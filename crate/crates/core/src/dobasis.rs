//! Doubly orthogonal bases on nested cylinders, least-squares density
//! experiments, spectral continuation from the small cylinder to the big
//! one, and reproducing-kernel partial sums.
//!
//! The restriction operator from big-cylinder solutions to L2 of the small
//! cylinder is realized on a finite atom dictionary by the pair of Gram
//! matrices (big inner product, small L2 product). Whitening the big Gram
//! with a truncated pivoted Cholesky factor turns the pair into an ordinary
//! symmetric eigenproblem whose eigenvectors give one system orthonormal in
//! the big product and orthogonal in the small one.

use crate::caloric::{CaloricAtom, Field, LinearCombination};
use crate::domain::{Cylinder, QuadratureRule, SpaceTimePoint, SpacePoint};
use crate::error::{Error, Result};
use crate::numerics::{
    cholesky_trunc, dot, symmetric_eig, KahanSum, Matrix, SymmetricMatrix,
};
use crate::sobolev::{gram, l2_norm, l2_pairings, InnerProductSpec, SpecKind};
use crate::specialfn::harmonic_dimension;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Two Gram matrices over one dictionary: the big-cylinder inner product
/// and the small-cylinder L2 product, with the rules kept for later
/// pairings.
#[derive(Clone, Debug)]
pub struct GramPair {
    dictionary: Vec<CaloricAtom>,
    big: SymmetricMatrix,
    small: SymmetricMatrix,
    spec_big: SpecKind,
    big_cylinder: Cylinder,
    omega_cylinder: Cylinder,
    big_rule: QuadratureRule,
    omega_rule: QuadratureRule,
}

impl GramPair {
    pub fn dictionary(&self) -> &[CaloricAtom] {
        &self.dictionary
    }

    pub fn order(&self) -> usize {
        self.dictionary.len()
    }

    pub fn big(&self) -> &SymmetricMatrix {
        &self.big
    }

    pub fn small(&self) -> &SymmetricMatrix {
        &self.small
    }

    pub fn spec_big(&self) -> SpecKind {
        self.spec_big
    }

    pub fn big_cylinder(&self) -> &Cylinder {
        &self.big_cylinder
    }

    pub fn omega_cylinder(&self) -> &Cylinder {
        &self.omega_cylinder
    }

    pub fn big_rule(&self) -> &QuadratureRule {
        &self.big_rule
    }

    pub fn omega_rule(&self) -> &QuadratureRule {
        &self.omega_rule
    }
}

/// Assemble the Gram pair for a dictionary on nested cylinders. The small
/// product is always L2; the big one is `spec_big`. Both use independent
/// tensor rules on their own cylinders.
pub fn build_gram_pair(
    dictionary: Vec<CaloricAtom>,
    omega_cyl: &Cylinder,
    big_cyl: &Cylinder,
    spec_big: SpecKind,
    omega_resolution: (usize, usize, usize),
    big_resolution: (usize, usize, usize),
) -> Result<GramPair> {
    if omega_cyl.t_start() != big_cyl.t_start() || omega_cyl.t_end() != big_cyl.t_end() {
        return Err(Error::InvalidGeometry(
            "the small and big cylinders must share the time interval".into(),
        ));
    }
    if !big_cyl.base().contains_domain(omega_cyl.base())? {
        return Err(Error::InvalidGeometry(
            "the small base must lie strictly inside the big base".into(),
        ));
    }
    for atom in &dictionary {
        if atom.n() != big_cyl.n() {
            return Err(Error::UnsupportedDimension(atom.n()));
        }
        if let Some(source) = atom.singular_point() {
            if big_cyl.closure_contains(&source) {
                return Err(Error::InvalidGeometry(format!(
                    "atom singular inside the closed big cylinder at ({:?}, {})",
                    &source.x[..atom.n()],
                    source.t
                )));
            }
        }
    }
    let big_spec = InnerProductSpec::new(spec_big, *big_cyl, big_resolution)?;
    let small_spec = InnerProductSpec::new(SpecKind::L2, *omega_cyl, omega_resolution)?;
    let big = gram(&dictionary, &big_spec)?;
    let small = gram(&dictionary, &small_spec)?;
    Ok(GramPair {
        dictionary,
        big,
        small,
        spec_big,
        big_cylinder: *big_cyl,
        omega_cylinder: *omega_cyl,
        big_rule: big_spec.rule().clone(),
        omega_rule: small_spec.rule().clone(),
    })
}

/// A doubly orthogonal system in dictionary coordinates: columns of `c` are
/// the basis vectors, `mu` their small-product norms squared (descending),
/// and the diagnostics the recomputed orthogonality residuals.
#[derive(Clone, Debug)]
pub struct DoBasis {
    coefficients: Matrix,
    mu: Vec<f64>,
    diagnostics: DoBasisDiagnostics,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DoBasisDiagnostics {
    /// max entrywise |C^T A C - I| against the original big Gram
    pub big_residual: f64,
    /// max entrywise |C^T B C - diag(mu)| against the original small Gram
    pub small_residual: f64,
}

impl DoBasis {
    pub fn rank(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    pub fn coefficients(&self) -> &Matrix {
        &self.coefficients
    }

    pub fn diagnostics(&self) -> DoBasisDiagnostics {
        self.diagnostics
    }

    /// The nu-th basis vector as a linear combination of dictionary atoms.
    pub fn element(&self, pair: &GramPair, nu: usize) -> LinearCombination {
        LinearCombination::new(
            pair.dictionary().to_vec(),
            self.coefficients.col(nu).to_vec(),
        )
    }
}

/// Core construction on raw Gram matrices: whiten the big Gram by truncated
/// pivoted Cholesky, form the whitened small Gram and diagonalize it.
/// Returns coefficients (order x rank) and the descending eigenvalue list.
pub fn doubly_orthogonal_coefficients(
    big: &SymmetricMatrix,
    small: &SymmetricMatrix,
    rel_tol: f64,
) -> Result<(Matrix, Vec<f64>)> {
    let n = big.order();
    assert_eq!(n, small.order());
    let chol = cholesky_trunc(big, rel_tol)?;
    let r = chol.rank;
    if r == 0 {
        return Err(Error::RankZero);
    }
    // permuted small Gram, leading r x r block
    let mut b11 = Matrix::zeros(r, r);
    for i in 0..r {
        for j in 0..r {
            b11.set(i, j, small.get(chol.pivots[i], chol.pivots[j]));
        }
    }
    // M = L1^{-1} B11 L1^{-T}, assembled column by column
    let mut w = Matrix::zeros(r, r);
    for j in 0..r {
        let z = chol.forward_solve(b11.col(j));
        w.col_mut(j).copy_from_slice(&z);
    }
    let mut m = SymmetricMatrix::zeros(r);
    for j in 0..r {
        // forward solve applied to the rows of W gives (L1^{-1} W^T)^T
        let row: Vec<f64> = (0..r).map(|i| w.get(j, i)).collect();
        let z = chol.forward_solve(&row);
        for i in 0..=j {
            if i == j {
                m.set(j, j, z[j]);
            } else {
                // symmetrize deterministically
                let prev = m.get(i, j);
                if prev == 0.0 {
                    m.set(i, j, z[i]);
                } else {
                    m.set(i, j, 0.5 * (prev + z[i]));
                }
            }
        }
        for i in j + 1..r {
            m.set(i, j, z[i]);
        }
    }
    let eig = symmetric_eig(&m)?;
    // C (pivoted rows) = [L1^{-T} V; 0], then undo the pivoting
    let mut c = Matrix::zeros(n, r);
    for nu in 0..r {
        let y = chol.backward_solve(eig.eigenvectors.col(nu));
        for i in 0..r {
            c.set(chol.pivots[i], nu, y[i]);
        }
    }
    let mu = eig.eigenvalues.iter().map(|&l| l.max(0.0)).collect();
    Ok((c, mu))
}

/// Build the doubly orthogonal basis of a Gram pair, with diagnostics
/// recomputed from the original Gram matrices rather than assumed.
pub fn double_orthogonal_basis(pair: &GramPair, rel_tol: f64) -> Result<DoBasis> {
    let (c, mu) = doubly_orthogonal_coefficients(&pair.big, &pair.small, rel_tol)?;
    let r = mu.len();
    let mut big_residual = 0.0f64;
    let mut small_residual = 0.0f64;
    let mu_scale = mu.first().copied().unwrap_or(0.0).max(1e-300);
    for i in 0..r {
        let a_ci = pair.big.apply(c.col(i));
        let b_ci = pair.small.apply(c.col(i));
        for j in 0..r {
            let aij = dot(&a_ci, c.col(j));
            let bij = dot(&b_ci, c.col(j));
            let target_a = if i == j { 1.0 } else { 0.0 };
            let target_b = if i == j { mu[i] } else { 0.0 };
            big_residual = big_residual.max((aij - target_a).abs());
            small_residual = small_residual.max(((bij - target_b) / mu_scale).abs());
        }
    }
    Ok(DoBasis {
        coefficients: c,
        mu,
        diagnostics: DoBasisDiagnostics {
            big_residual,
            small_residual,
        },
    })
}

/// L2(omega) least-squares projection of a target onto the dictionary span
/// (whitened normal equations, truncated at `rel_tol`). Returns the
/// coefficient vector and the minimal-norm residual
/// sqrt(max(0, |target|^2 - c^T S c)).
pub fn project_l2(
    target: &dyn Field,
    pair: &GramPair,
    rel_tol: f64,
) -> Result<(Vec<f64>, f64)> {
    let n = pair.order();
    let norm = l2_norm(target, &pair.omega_rule);
    if n == 0 {
        return Ok((Vec::new(), norm));
    }
    let rhs = l2_pairings(target, &pair.dictionary, &pair.omega_rule)?;
    let chol = cholesky_trunc(&pair.small, rel_tol)?;
    let mut coeffs = vec![0.0; n];
    if chol.rank > 0 {
        let rhs_pivoted: Vec<f64> = chol.pivots[..chol.rank]
            .iter()
            .map(|&i| rhs[i])
            .collect();
        let z = chol.forward_solve(&rhs_pivoted);
        let y = chol.backward_solve(&z);
        for (i, v) in y.into_iter().enumerate() {
            coeffs[chol.pivots[i]] = v;
        }
    }
    let fitted = pair.small.quadratic_form(&coeffs, &coeffs);
    let residual = (norm * norm - fitted).max(0.0).sqrt();
    Ok((coeffs, residual))
}

/// Density experiment scenario: small ball inside a ball (no obstruction)
/// or an annulus whose hole is a compact component of the complement.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DensityScenario {
    NoHole,
    Hole,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DensityConfig {
    pub scenario: DensityScenario,
    pub n: usize,
    pub t_start: f64,
    pub t_end: f64,
    /// radius of the big ball
    pub big_radius: f64,
    /// NoHole: radius of the small ball; Hole: outer radius of the annulus
    pub omega_radius: f64,
    /// Hole only: radius of the removed inner ball
    #[serde(default)]
    pub hole_radius: f64,
    /// source shell radius as a multiple of the big radius
    pub shell_factor: f64,
    /// translates per time ring, one dictionary per sweep entry
    pub angles_sweep: Vec<usize>,
    /// total-degree cap of the supplementary heat polynomials
    pub heat_poly_degree: usize,
    /// NoHole target: source sits at t_start - offset * (t_end - t_start)
    pub target_time_offset: f64,
    pub omega_resolution: (usize, usize, usize),
    pub big_resolution: (usize, usize, usize),
    pub rel_tol: f64,
}

#[derive(Clone, Copy, Debug, Serialize)]
pub struct DensityPoint {
    pub dictionary_size: usize,
    pub residual: f64,
    pub residual_over_norm: f64,
}

/// Fractions of the time length for the translate rings: three below the
/// initial time, three interleaved inside (those sit at spatial exterior).
const RINGS_BELOW: [f64; 3] = [0.6, 0.35, 0.12];
const RINGS_INSIDE: [f64; 3] = [0.25, 0.5, 0.75];

/// The six standard ring times for translate shells on (t_start, t_end).
pub fn standard_ring_times(t_start: f64, t_end: f64) -> Vec<f64> {
    let length = t_end - t_start;
    let mut times: Vec<f64> = RINGS_BELOW.iter().map(|f| t_start - f * length).collect();
    times.extend(RINGS_INSIDE.iter().map(|f| t_start + f * length));
    times
}

/// Shell directions; prefix-closed in `count` for n = 3 (van der Corput in
/// the polar coordinate, golden angle in azimuth) and set-nested under
/// doubling for n = 2 (uniform angles).
fn shell_directions(n: usize, count: usize) -> Vec<SpacePoint> {
    match n {
        2 => (0..count)
            .map(|i| {
                let theta = 2.0 * PI * i as f64 / count as f64;
                [theta.cos(), theta.sin(), 0.0]
            })
            .collect(),
        _ => (0..count)
            .map(|i| {
                // van der Corput radical inverse in base 2
                let mut v = 0.0;
                let mut denom = 0.5;
                let mut bits = i + 1;
                while bits > 0 {
                    if bits & 1 == 1 {
                        v += denom;
                    }
                    denom *= 0.5;
                    bits >>= 1;
                }
                let cos_theta: f64 = 1.0 - 2.0 * v;
                let sin_theta = (1.0 - cos_theta * cos_theta).max(0.0).sqrt();
                let phi = 2.0 * PI * ((i as f64 * 0.618_033_988_749_894_9) % 1.0);
                [sin_theta * phi.cos(), sin_theta * phi.sin(), cos_theta]
            })
            .collect(),
    }
}

/// Fundamental-solution translates on a shell of radius `r3` at the given
/// ring times.
pub fn translate_shell(
    n: usize,
    r3: f64,
    times: &[f64],
    per_ring: usize,
) -> Result<Vec<CaloricAtom>> {
    let dirs = shell_directions(n, per_ring);
    let mut atoms = Vec::with_capacity(times.len() * per_ring);
    for &tau in times {
        for d in &dirs {
            let y: Vec<f64> = (0..n).map(|i| r3 * d[i]).collect();
            atoms.push(CaloricAtom::fundamental_translate(n, &y, tau)?);
        }
    }
    Ok(atoms)
}

/// All heat-polynomial products with total degree at most `cap`.
pub fn heat_poly_family(n: usize, cap: usize) -> Result<Vec<CaloricAtom>> {
    let mut out = Vec::new();
    let mut degrees = vec![0usize; n];
    loop {
        if degrees.iter().sum::<usize>() <= cap {
            out.push(CaloricAtom::heat_polynomial(&degrees)?);
        }
        // odometer over the box [0, cap]^n, then filter by total degree
        let mut axis = 0;
        loop {
            if axis == n {
                return Ok(out);
            }
            degrees[axis] += 1;
            if degrees[axis] > cap {
                degrees[axis] = 0;
                axis += 1;
            } else {
                break;
            }
        }
    }
}

/// Separable ball eigenatoms for every (k, j, m, problem) under the caps.
pub fn e_atom_family(
    n: usize,
    r2: f64,
    k_max: usize,
    m_max: usize,
    problems: &[crate::caloric::BallProblem],
) -> Result<Vec<CaloricAtom>> {
    let mut out = Vec::new();
    for k in 0..=k_max {
        for j in 1..=harmonic_dimension(n, k)? {
            for m in 1..=m_max {
                for &problem in problems {
                    out.push(CaloricAtom::separable_ball(n, problem, k, j, m, r2)?);
                }
            }
        }
    }
    Ok(out)
}

/// Run one density experiment: project the scenario target onto growing
/// nested dictionaries and report the residual curve.
pub fn density_experiment(config: &DensityConfig) -> Result<Vec<DensityPoint>> {
    let n = config.n;
    if !(2..=3).contains(&n) {
        return Err(Error::UnsupportedDimension(n));
    }
    if config.angles_sweep.is_empty() {
        return Err(Error::InvalidConfig("empty sweep".into()));
    }
    let center = vec![0.0; n];
    let big_base = crate::domain::BaseDomain::ball(&center, config.big_radius)?;
    let omega_base = match config.scenario {
        DensityScenario::NoHole => {
            if !(config.omega_radius < config.big_radius) {
                return Err(Error::InvalidGeometry(
                    "omega must be strictly smaller than the big ball".into(),
                ));
            }
            crate::domain::BaseDomain::ball(&center, config.omega_radius)?
        }
        DensityScenario::Hole => {
            if !(config.hole_radius > 0.0
                && config.hole_radius < config.omega_radius
                && config.omega_radius < config.big_radius)
            {
                return Err(Error::InvalidGeometry(
                    "hole scenario needs 0 < hole radius < omega radius < big radius".into(),
                ));
            }
            crate::domain::BaseDomain::annulus(&center, config.hole_radius, config.omega_radius)?
        }
    };
    let omega_cyl = Cylinder::new(omega_base, config.t_start, config.t_end)?;
    let big_cyl = Cylinder::new(big_base, config.t_start, config.t_end)?;
    let length = config.t_end - config.t_start;

    let target = match config.scenario {
        DensityScenario::Hole => CaloricAtom::fundamental_translate(
            n,
            &center,
            config.t_start + 0.5 * length,
        )?,
        DensityScenario::NoHole => CaloricAtom::fundamental_translate(
            n,
            &center,
            config.t_start - config.target_time_offset * length,
        )?,
    };

    let r3 = config.shell_factor * config.big_radius;
    if r3 <= config.big_radius {
        return Err(Error::InvalidGeometry(
            "the source shell must lie outside the big ball".into(),
        ));
    }
    let ring_times = standard_ring_times(config.t_start, config.t_end);

    let polys = heat_poly_family(n, config.heat_poly_degree)?;
    let mut curve = Vec::with_capacity(config.angles_sweep.len());
    for &per_ring in &config.angles_sweep {
        let mut dictionary = translate_shell(n, r3, &ring_times, per_ring)?;
        dictionary.extend(polys.iter().cloned());
        let pair = build_gram_pair(
            dictionary,
            &omega_cyl,
            &big_cyl,
            SpecKind::L2,
            config.omega_resolution,
            config.big_resolution,
        )?;
        let (_, residual) = project_l2(&target, &pair, config.rel_tol)?;
        let norm = l2_norm(&target, pair.omega_rule());
        curve.push(DensityPoint {
            dictionary_size: pair.order(),
            residual,
            residual_over_norm: residual / norm,
        });
    }
    Ok(curve)
}

/// Continuation by spectral truncation: coefficients
/// c_nu = (target, b_nu)_{L2(omega)} / mu_nu for nu < n_trunc, returned as
/// an atom combination evaluable anywhere on the big cylinder.
pub fn continue_solution(
    target: &dyn Field,
    basis: &DoBasis,
    pair: &GramPair,
    n_trunc: usize,
) -> Result<LinearCombination> {
    if n_trunc > basis.rank() {
        return Err(Error::OutOfRange(format!(
            "truncation level {n_trunc} exceeds the basis rank {}",
            basis.rank()
        )));
    }
    let mu1 = basis.mu().first().copied().unwrap_or(0.0);
    let rhs = l2_pairings(target, pair.dictionary(), &pair.omega_rule)?;
    let mut combined = vec![0.0; pair.order()];
    for nu in 0..n_trunc {
        let mu = basis.mu()[nu];
        if mu < 1e-14 * mu1 {
            return Err(Error::TruncationRequired { index: nu, mu });
        }
        let proj = dot(basis.coefficients().col(nu), &rhs);
        let c_nu = proj / mu;
        for (acc, &w) in combined.iter_mut().zip(basis.coefficients().col(nu)) {
            *acc += c_nu * w;
        }
    }
    Ok(LinearCombination::new(pair.dictionary().to_vec(), combined))
}

/// Partial sum of the reproducing kernel of the big space:
/// sum_{nu < n} e_nu(a) e_nu(b).
pub fn kernel_partial_sum(
    basis: &DoBasis,
    pair: &GramPair,
    a: &SpaceTimePoint,
    b: &SpaceTimePoint,
    n: usize,
) -> Result<f64> {
    if n > basis.rank() {
        return Err(Error::OutOfRange(format!(
            "kernel order {n} exceeds the basis rank {}",
            basis.rank()
        )));
    }
    for p in [a, b] {
        if !pair.big_cylinder.contains(p) {
            return Err(Error::UnsupportedPoint(
                "kernel points must lie inside the big cylinder".into(),
            ));
        }
    }
    let values_a: Vec<f64> = pair
        .dictionary
        .iter()
        .map(|atom| atom.value(&a.x, a.t))
        .collect();
    let values_b: Vec<f64> = pair
        .dictionary
        .iter()
        .map(|atom| atom.value(&b.x, b.t))
        .collect();
    let mut acc = KahanSum::new();
    for nu in 0..n {
        let col = basis.coefficients().col(nu);
        acc.add(dot(col, &values_a) * dot(col, &values_b));
    }
    Ok(acc.value())
}
