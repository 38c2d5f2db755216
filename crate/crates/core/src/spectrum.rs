//! Low-lying spectra along the annealing path.
//!
//! Eigenpairs come from a Lanczos iteration with full reorthogonalization
//! and thick restarts. Eigenpairs are extracted one at a time: each run
//! starts from a fresh seeded random vector orthogonal to the pairs already
//! locked, so exact degeneracies are resolved with their multiplicity.

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{Basis, Constraint, SectorBasis};
use crate::error::{Error, Result};
use crate::graphs::Method;
use crate::hamiltonian::{build_xy_ring_driver, ClausePartition, Operator};
use crate::matrix::{LinearOperator, Pencil, SparseMatrix};

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_S_TOL: f64 = 1e-4;
pub const DEFAULT_GRID_POINTS: usize = 41;
/// Eigenvalues closer than this are reported as one degenerate cluster.
pub const DEGENERACY_TOL: f64 = 1e-9;

const MAX_KRYLOV: usize = 64;
const RESTART_KEEP: usize = 12;
const CHECK_EVERY: usize = 6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EigenResult {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    /// Matrix-vector products spent.
    pub iterations: usize,
    pub converged: bool,
}

impl EigenResult {
    /// Eigenvalues grouped into clusters closer than [`DEGENERACY_TOL`], as
    /// `(value, multiplicity)`.
    pub fn clusters(&self) -> Vec<(f64, usize)> {
        let mut out: Vec<(f64, usize)> = Vec::new();
        for &e in &self.eigenvalues {
            match out.last_mut() {
                Some((v, m)) if (e - *v).abs() < DEGENERACY_TOL => *m += 1,
                _ => out.push((e, 1)),
            }
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LanczosOptions {
    pub k: usize,
    pub tol: f64,
    pub seed: u64,
    pub want_vectors: bool,
}

impl LanczosOptions {
    pub fn lowest(k: usize) -> Self {
        LanczosOptions {
            k,
            tol: DEFAULT_TOL,
            seed: 0,
            want_vectors: false,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_vectors(mut self) -> Self {
        self.want_vectors = true;
        self
    }
}

/// Total matvec budget: `50 k ceil(log2 dim)`.
pub fn iteration_cap(k: usize, dim: usize) -> usize {
    let log = (usize::BITS - dim.saturating_sub(1).leading_zeros()) as usize;
    50 * k * log.max(1)
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    for b in basis {
        let c = dot(b, v);
        axpy(-c, b, v);
    }
}

fn random_unit(dim: usize, rng: &mut ChaCha8Rng, against: &[&[Vec<f64>]]) -> Option<Vec<f64>> {
    for _ in 0..4 {
        let mut v: Vec<f64> = (0..dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        for _ in 0..2 {
            for set in against {
                project_out(&mut v, set);
            }
        }
        let nv = norm(&v);
        if nv > 1e-8 {
            v.iter_mut().for_each(|x| *x /= nv);
            return Some(v);
        }
    }
    None
}

struct Budget {
    used: usize,
    cap: usize,
}

impl Budget {
    fn spend(&mut self) -> bool {
        self.used += 1;
        self.used <= self.cap
    }
}

/// Lowest eigenpair of `op` restricted to the orthogonal complement of
/// `locked`, to residual `tol`.
fn lowest_deflated<L: LinearOperator + ?Sized>(
    op: &L,
    locked: &[Vec<f64>],
    tol: f64,
    rng: &mut ChaCha8Rng,
    budget: &mut Budget,
    best: &mut f64,
) -> Result<(f64, Vec<f64>)> {
    let dim = op.dim();
    let room = dim - locked.len();
    let m_max = room.min(MAX_KRYLOV);
    let start = random_unit(dim, rng, &[locked]).ok_or_else(|| Error::Convergence {
        iterations: budget.used,
        best: vec![*best],
    })?;
    let mut v: Vec<Vec<f64>> = vec![start];
    let mut t = DMatrix::<f64>::zeros(m_max, m_max);
    let mut j = 0;
    let mut since_check = 0;
    let mut scale = 0.0f64;
    loop {
        if !budget.spend() {
            return Err(Error::Convergence {
                iterations: budget.used - 1,
                best: vec![*best],
            });
        }
        let mut w = op.apply(&v[j]);
        // classical Gram-Schmidt, repeated while it cancels most of w
        let mut h = vec![0.0; j + 1];
        let mut before = norm(&w);
        for _ in 0..3 {
            for (i, vi) in v.iter().enumerate() {
                let c = dot(vi, &w);
                h[i] += c;
                axpy(-c, vi, &mut w);
            }
            project_out(&mut w, locked);
            let after = norm(&w);
            if after > 0.7 * before {
                break;
            }
            before = after;
        }
        for (i, &hi) in h.iter().enumerate() {
            t[(i, j)] = hi;
            t[(j, i)] = hi;
            scale = scale.max(hi.abs());
        }
        let beta = norm(&w);
        let m = j + 1;
        since_check += 1;
        let exhausted = m == room;
        let breakdown = beta <= 1e-12 * scale.max(1.0);
        if since_check >= CHECK_EVERY || m == m_max || exhausted || breakdown {
            since_check = 0;
            let eig = SymmetricEigen::new(t.view((0, 0), (m, m)).into_owned());
            let order = ascending(&eig.eigenvalues);
            let (theta, s) = (eig.eigenvalues[order[0]], eig.eigenvectors.column(order[0]));
            *best = theta;
            let estimate = if breakdown { 0.0 } else { beta * s[m - 1].abs() };
            if estimate <= tol || exhausted {
                let y = combine(&v, s.as_slice());
                if !budget.spend() {
                    return Err(Error::Convergence {
                        iterations: budget.used - 1,
                        best: vec![theta],
                    });
                }
                let mut r = op.apply(&y);
                axpy(-theta, &y, &mut r);
                project_out(&mut r, locked);
                if norm(&r) <= tol || exhausted {
                    return Ok((theta, y));
                }
            }
            if m == m_max && !exhausted {
                // thick restart on the lowest Ritz vectors plus the residual
                let keep = RESTART_KEEP.min(m / 2).max(1);
                let mut kept: Vec<Vec<f64>> = order[..keep]
                    .iter()
                    .map(|&c| combine(&v, eig.eigenvectors.column(c).as_slice()))
                    .collect();
                t.fill(0.0);
                for (i, &c) in order[..keep].iter().enumerate() {
                    t[(i, i)] = eig.eigenvalues[c];
                }
                let next = if breakdown {
                    random_unit(dim, rng, &[locked, &kept])
                } else {
                    w.iter_mut().for_each(|x| *x /= beta);
                    Some(w)
                };
                let next = next.ok_or_else(|| Error::Convergence {
                    iterations: budget.used,
                    best: vec![theta],
                })?;
                kept.push(next);
                v = kept;
                j = keep;
                continue;
            }
        }
        let next = if breakdown {
            random_unit(dim, rng, &[locked, &v])
        } else {
            w.iter_mut().for_each(|x| *x /= beta);
            Some(w)
        };
        match next {
            Some(n) => v.push(n),
            None => {
                return Err(Error::Convergence {
                    iterations: budget.used,
                    best: vec![*best],
                })
            }
        }
        j += 1;
    }
}

fn ascending(values: &nalgebra::DVector<f64>) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..values.len()).collect();
    idx.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    idx
}

fn combine(v: &[Vec<f64>], coeffs: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; v[0].len()];
    for (vi, &c) in v.iter().zip(coeffs) {
        axpy(c, vi, &mut y);
    }
    let ny = norm(&y);
    y.iter_mut().for_each(|x| *x /= ny);
    y
}

/// The `k` lowest eigenpairs of a symmetric linear operator.
pub fn lanczos<L: LinearOperator + ?Sized>(op: &L, opts: LanczosOptions) -> Result<EigenResult> {
    let dim = op.dim();
    if opts.k == 0 || opts.k > dim {
        return Err(Error::Parameter(format!(
            "cannot extract {} eigenpairs from dimension {dim}",
            opts.k
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut budget = Budget {
        used: 0,
        cap: iteration_cap(opts.k, dim),
    };
    let mut values = Vec::with_capacity(opts.k);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(opts.k);
    let mut best = f64::NAN;
    for _ in 0..opts.k {
        match lowest_deflated(op, &vectors, opts.tol, &mut rng, &mut budget, &mut best) {
            Ok((theta, y)) => {
                values.push(theta);
                vectors.push(y);
            }
            Err(Error::Convergence { iterations, best }) => {
                values.extend(best);
                return Err(Error::Convergence {
                    iterations,
                    best: values,
                });
            }
            Err(e) => return Err(e),
        }
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    Ok(EigenResult {
        eigenvalues: order.iter().map(|&i| values[i]).collect(),
        vectors: opts
            .want_vectors
            .then(|| order.iter().map(|&i| vectors[i].clone()).collect()),
        iterations: budget.used,
        converged: true,
    })
}

/// `k` lowest eigenvalues of `op` on `basis`.
pub fn lanczos_lowest<B: Basis>(op: &Operator, basis: &B, opts: LanczosOptions) -> Result<EigenResult> {
    let matrix = op.assemble(basis)?;
    lanczos(&matrix, opts)
}

/// All eigenvalues of a dense symmetric matrix, ascending. Test oracle.
pub fn dense_eigenvalues(m: &DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = m.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapPoint {
    pub s: f64,
    pub e0: f64,
    pub e1: f64,
    pub gap: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapCurve {
    pub points: Vec<GapPoint>,
    pub basis: String,
    pub method: Option<Method>,
}

impl GapCurve {
    pub const CSV_HEADER: &'static str = "s,e0,e1,gap";

    pub fn to_csv(&self) -> String {
        let mut out = String::from(Self::CSV_HEADER);
        out.push('\n');
        for p in &self.points {
            out.push_str(&format!(
                "{},{},{},{}\n",
                fmt_f64(p.s),
                fmt_f64(p.e0),
                fmt_f64(p.e1),
                fmt_f64(p.gap)
            ));
        }
        out
    }

    pub fn min_point(&self) -> Option<&GapPoint> {
        self.points.iter().min_by(|a, b| a.gap.total_cmp(&b.gap))
    }
}

/// Floats in CSV output: 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// Uniform grid of `points` values from 0 to 1 inclusive.
pub fn uniform_grid(points: usize) -> Vec<f64> {
    match points {
        0 => Vec::new(),
        1 => vec![0.0],
        _ => (0..points).map(|i| i as f64 / (points - 1) as f64).collect(),
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.iter().any(|s| !(0.0..=1.0).contains(s)) {
        return Err(Error::Range("s grid leaves [0, 1]".into()));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Range("s grid is not strictly increasing".into()));
    }
    Ok(())
}

/// `H(s)` for one annealing problem, assembled once on its basis.
pub struct AnnealingPath {
    pub driver: SparseMatrix,
    pub problem: SparseMatrix,
    pub opts: LanczosOptions,
}

impl AnnealingPath {
    pub fn new<B: Basis>(h_p: &Operator, h_d: &Operator, basis: &B) -> Result<Self> {
        Ok(AnnealingPath {
            driver: h_d.assemble(basis)?,
            problem: h_p.assemble(basis)?,
            opts: LanczosOptions::lowest(2),
        })
    }

    pub fn with_options(mut self, opts: LanczosOptions) -> Self {
        self.opts = opts;
        self
    }

    pub fn dim(&self) -> usize {
        self.driver.dim()
    }

    /// Lowest two levels at `s`; a one-dimensional sector reports a zero gap
    /// to an infinitely distant level as `e1 = +inf`.
    pub fn point(&self, s: f64) -> Result<GapPoint> {
        if !(0.0..=1.0).contains(&s) {
            return Err(Error::Range(format!("annealing parameter s = {s} outside [0, 1]")));
        }
        let pencil = Pencil {
            driver: &self.driver,
            problem: &self.problem,
            s,
        };
        if self.dim() == 1 {
            let e0 = pencil.apply(&[1.0])[0];
            return Ok(GapPoint { s, e0, e1: f64::INFINITY, gap: f64::INFINITY });
        }
        // a diagonal endpoint is read off exactly rather than iterated
        let exact = if s == 1.0 && self.problem.is_diagonal() {
            Some(self.problem.diagonal())
        } else if s == 0.0 && self.driver.is_diagonal() {
            Some(self.driver.diagonal())
        } else {
            None
        };
        if let Some(diag) = exact {
            let (e0, e1) = two_smallest(diag);
            return Ok(GapPoint { s, e0, e1, gap: e1 - e0 });
        }
        let res = lanczos(&pencil, LanczosOptions { k: 2, ..self.opts }).map_err(|e| Error::AtParameter {
            s,
            source: Box::new(e),
        })?;
        let (e0, e1) = (res.eigenvalues[0], res.eigenvalues[1]);
        Ok(GapPoint {
            s,
            e0,
            e1,
            gap: (e1 - e0).max(0.0),
        })
    }

    pub fn curve(&self, grid: &[f64]) -> Result<Vec<GapPoint>> {
        check_grid(grid)?;
        grid.par_iter().map(|&s| self.point(s)).collect()
    }

    /// Minimum gap: coarse scan, then golden-section refinement on the
    /// bracket around the coarse minimum.
    pub fn min_gap(&self, coarse: &[f64], s_tol: f64) -> Result<MinGapResult> {
        if coarse.len() < 3 {
            return Err(Error::Parameter("coarse grid needs at least 3 points".into()));
        }
        if s_tol <= 0.0 {
            return Err(Error::Parameter("s tolerance must be positive".into()));
        }
        let points = self.curve(coarse)?;
        let lowest = points.iter().map(|p| p.gap).fold(f64::INFINITY, f64::min);
        let tie = 1e-12 * lowest.abs().max(1.0);
        let i = points
            .iter()
            .position(|p| p.gap <= lowest + tie)
            .expect("grid is non-empty");
        let at_boundary = i == 0 || i == points.len() - 1;
        let mut best = points[i];
        let mut lo = coarse[i.saturating_sub(1)];
        let mut hi = coarse[(i + 1).min(coarse.len() - 1)];
        let mut evaluations = points.len();
        let consider = |p: GapPoint, best: &mut GapPoint| {
            if p.gap < best.gap - tie {
                *best = p;
            }
        };
        let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
        let mut x1 = hi - inv_phi * (hi - lo);
        let mut x2 = lo + inv_phi * (hi - lo);
        let mut f1 = self.point(x1)?;
        let mut f2 = self.point(x2)?;
        evaluations += 2;
        consider(f1, &mut best);
        consider(f2, &mut best);
        while hi - lo > s_tol {
            if f1.gap <= f2.gap {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - inv_phi * (hi - lo);
                f1 = self.point(x1)?;
                consider(f1, &mut best);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + inv_phi * (hi - lo);
                f2 = self.point(x2)?;
                consider(f2, &mut best);
            }
            evaluations += 1;
        }
        Ok(MinGapResult {
            s_min: best.s,
            gap_min: best.gap,
            e0_at_min: best.e0,
            refinement_width: hi - lo,
            at_boundary,
            evaluations,
            coarse: points,
        })
    }
}

fn two_smallest(values: &[f64]) -> (f64, f64) {
    let mut lo = (f64::INFINITY, f64::INFINITY);
    for &v in values {
        if v < lo.0 {
            lo = (v, lo.0);
        } else if v < lo.1 {
            lo.1 = v;
        }
    }
    lo
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MinGapResult {
    pub s_min: f64,
    pub gap_min: f64,
    pub e0_at_min: f64,
    /// Width of the final golden-section bracket.
    pub refinement_width: f64,
    /// The coarse minimum sat on the first or last grid point.
    pub at_boundary: bool,
    pub evaluations: usize,
    pub coarse: Vec<GapPoint>,
}

/// Lowest two levels of `interpolate(h_p, h_d, s)` on `basis` at each grid point.
pub fn gap_curve<B: Basis>(h_p: &Operator, h_d: &Operator, basis: &B, s_grid: &[f64]) -> Result<GapCurve> {
    let path = AnnealingPath::new(h_p, h_d, basis)?;
    Ok(GapCurve {
        points: path.curve(s_grid)?,
        basis: describe(basis.sector()),
        method: None,
    })
}

pub fn min_gap<B: Basis>(
    h_p: &Operator,
    h_d: &Operator,
    basis: &B,
    coarse_grid: &[f64],
    s_tol: f64,
) -> Result<MinGapResult> {
    AnnealingPath::new(h_p, h_d, basis)?.min_gap(coarse_grid, s_tol)
}

pub fn describe(sector: &SectorBasis) -> String {
    let n = sector.n_qubits();
    match sector.constraint() {
        Constraint::Full => format!("full({n})"),
        Constraint::Magnetization { c } => format!("magnetization({n}, {c})"),
        Constraint::OneHot { vertices, colors } => format!("one-hot({vertices} x {colors})"),
        Constraint::Clauses(c) => format!("clauses({n}, {})", c.len()),
    }
}

/// Driver Hamiltonians whose sector ground states the annealer starts from.
#[derive(Clone, Debug, PartialEq)]
pub enum DriverKind {
    XyRing(Vec<usize>),
    GcClique { vertices: usize, colors: usize },
    SatDriver(ClausePartition),
    Transverse,
}

fn incompatible(kind: &str, sector: &SectorBasis) -> Error {
    Error::Symmetry(format!(
        "{kind} driver does not conserve the {} sector",
        describe(sector)
    ))
}

/// Ground state of a driver inside its conserved sector.
///
/// Closed forms are used where they exist (uniform one-hot product for the
/// clique driver, uniform over satisfying assignments for the clause
/// driver, uniform over all states for the transverse field); the XY ring
/// ground state is computed numerically and sign-fixed to a positive sum.
pub fn driver_ground_state(kind: &DriverKind, basis: &SectorBasis) -> Result<Vec<f64>> {
    let dim = basis.dim();
    let n = basis.n_qubits();
    match (kind, basis.constraint()) {
        (DriverKind::Transverse, Constraint::Full) => Ok(vec![(0.5f64).powf(n as f64 / 2.0); dim]),
        (DriverKind::GcClique { vertices, colors }, Constraint::OneHot { vertices: v, colors: c })
            if vertices == v && colors == c =>
        {
            let amp = (*colors as f64).powf(-(*vertices as f64) / 2.0);
            Ok(vec![amp; dim])
        }
        (DriverKind::SatDriver(partition), Constraint::Clauses(clauses))
            if partition.n == n && partition.constraint_clauses() == *clauses =>
        {
            let amp = 7f64.powf(-(clauses.len() as f64) / 2.0)
                * 2f64.powf(-(partition.free.len() as f64) / 2.0);
            Ok(vec![amp; dim])
        }
        (DriverKind::XyRing(ordering), Constraint::Magnetization { .. }) => {
            let driver = build_xy_ring_driver(ordering)?;
            if driver.n_qubits() != n {
                return Err(incompatible("XY ring", basis));
            }
            let res = lanczos_lowest(&driver, basis, LanczosOptions::lowest(1).with_vectors())?;
            let mut v = res.vectors.expect("vectors requested").remove(0);
            if v.iter().sum::<f64>() < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            Ok(v)
        }
        (DriverKind::Transverse, _) => Err(incompatible("transverse", basis)),
        (DriverKind::GcClique { .. }, _) => Err(incompatible("clique", basis)),
        (DriverKind::SatDriver(_), _) => Err(incompatible("clause", basis)),
        (DriverKind::XyRing(_), _) => Err(incompatible("XY ring", basis)),
    }
}
