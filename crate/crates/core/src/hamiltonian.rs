//! Problem, driver and penalty Hamiltonians as sums of local real terms.
//!
//! Every operator here is real symmetric in the computational basis, so all
//! arithmetic is done in `f64`. A term acts on an ordered list of qubits
//! (its support); the local configuration index reads the support qubits as
//! a binary number with the first support qubit most significant.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{full_mask, qubit, Basis, SectorBasis};
use crate::error::{Error, Result};
use crate::graphs::{is_permutation, Graph};
use crate::matrix::SparseMatrix;

pub const DENSE_CAP: usize = 4096;
const BLOCK_SYMMETRY_TOL: f64 = 1e-14;
const MAX_BLOCK_SUPPORT: usize = 3;

/// One local term, either diagonal in the computational basis (a table of
/// values over local configurations) or a dense `2^k x 2^k` block.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Term {
    #[serde(rename = "diag")]
    Diagonal { support: Vec<usize>, data: Vec<f64> },
    Block { support: Vec<usize>, data: Vec<f64> },
}

#[inline]
fn local_config(state: u64, n: usize, support: &[usize]) -> usize {
    support
        .iter()
        .fold(0usize, |acc, &q| (acc << 1) | qubit(state, n, q) as usize)
}

#[inline]
fn with_local_config(state: u64, n: usize, support: &[usize], config: usize) -> u64 {
    let k = support.len();
    let mut out = state;
    for (pos, &q) in support.iter().enumerate() {
        let bit = ((config >> (k - 1 - pos)) & 1) as u64;
        let shift = n - 1 - q;
        out = (out & !(1u64 << shift)) | (bit << shift);
    }
    out
}

impl Term {
    pub fn support(&self) -> &[usize] {
        match self {
            Term::Diagonal { support, .. } | Term::Block { support, .. } => support,
        }
    }

    pub fn is_diagonal(&self) -> bool {
        matches!(self, Term::Diagonal { .. })
    }

    fn scaled(&self, factor: f64) -> Term {
        match self {
            Term::Diagonal { support, data } => Term::Diagonal {
                support: support.clone(),
                data: data.iter().map(|v| v * factor).collect(),
            },
            Term::Block { support, data } => Term::Block {
                support: support.clone(),
                data: data.iter().map(|v| v * factor).collect(),
            },
        }
    }

    fn validate(&self, n: usize) -> Result<()> {
        let support = self.support();
        let mut seen = support.to_vec();
        seen.sort_unstable();
        seen.dedup();
        if seen.len() != support.len() || support.iter().any(|&q| q >= n) {
            return Err(Error::Parameter(format!("bad term support {support:?} for {n} qubits")));
        }
        let local = 1usize << support.len();
        match self {
            Term::Diagonal { data, .. } if data.len() != local => Err(Error::Parameter(
                "diagonal table size does not match its support".into(),
            )),
            Term::Block { data, support } => {
                if support.is_empty() || support.len() > MAX_BLOCK_SUPPORT {
                    return Err(Error::Parameter("blocks act on 1 to 3 qubits".into()));
                }
                if data.len() != local * local {
                    return Err(Error::Parameter("block size does not match its support".into()));
                }
                for r in 0..local {
                    for c in 0..r {
                        if (data[r * local + c] - data[c * local + r]).abs() > BLOCK_SYMMETRY_TOL {
                            return Err(Error::Parameter("block is not symmetric".into()));
                        }
                    }
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }
}

/// A real symmetric Hamiltonian on `n` qubits: the sum of its terms divided
/// by a common divisor.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    n: usize,
    terms: Vec<Term>,
    // kept separate so integer-valued sums are normalized with one rounding
    divisor: f64,
    warnings: Vec<String>,
}

/// Outcome of probing an operator against a sector.
#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceReport {
    /// Sum of squared amplitudes sent outside the sector from all basis states.
    pub leak: f64,
    /// Number of (state, term, target) transitions that left the sector.
    pub violations: usize,
    /// Indices of the terms responsible, ascending.
    pub violating_terms: Vec<usize>,
}

impl Operator {
    pub fn new(n: usize, terms: Vec<Term>) -> Result<Self> {
        for t in &terms {
            t.validate(n)?;
        }
        Ok(Operator {
            n,
            terms,
            divisor: 1.0,
            warnings: Vec::new(),
        })
    }

    pub fn zero(n: usize) -> Self {
        Operator {
            n,
            terms: Vec::new(),
            divisor: 1.0,
            warnings: Vec::new(),
        }
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    /// Terms before division by [`Operator::divisor`].
    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn divisor(&self) -> f64 {
        self.divisor
    }

    /// The same operator with its terms divided by `d`.
    pub fn divided_by(mut self, d: f64) -> Operator {
        self.divisor *= d;
        self
    }

    fn effective_terms(&self) -> impl Iterator<Item = Term> + '_ {
        self.terms.iter().map(|t| if self.divisor == 1.0 { t.clone() } else { t.scaled(1.0 / self.divisor) })
    }

    /// Non-fatal construction notes, e.g. a penalty weight below its bound.
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(Term::is_diagonal)
    }

    pub fn scaled(&self, factor: f64) -> Operator {
        Operator {
            n: self.n,
            terms: self.terms.iter().map(|t| t.scaled(factor)).collect(),
            divisor: self.divisor,
            warnings: self.warnings.clone(),
        }
    }

    fn push(&mut self, term: Term) {
        debug_assert!(term.validate(self.n).is_ok());
        self.terms.push(term);
    }

    /// Term list as JSON, in construction order.
    pub fn dump_json(&self) -> String {
        let terms: Vec<Term> = self.effective_terms().collect();
        serde_json::to_string(&terms).expect("terms serialize")
    }

    pub fn from_json(n: usize, text: &str) -> Result<Self> {
        Operator::new(n, serde_json::from_str(text)?)
    }

    /// Sum of all diagonal contributions (diagonal terms and block
    /// diagonals) at `state`.
    pub fn diagonal_value(&self, state: u64) -> f64 {
        let mut e = 0.0;
        for term in &self.terms {
            match term {
                Term::Diagonal { support, data } => e += data[local_config(state, self.n, support)],
                Term::Block { support, data } => {
                    let c = local_config(state, self.n, support);
                    e += data[c * (1 << support.len()) + c];
                }
            }
        }
        e / self.divisor
    }

    /// Calls `f(term_index, target, amplitude)` for every nonzero
    /// off-diagonal matrix element `<target|H|state>`.
    pub fn for_each_transition(&self, state: u64, mut f: impl FnMut(usize, u64, f64)) {
        for (t, term) in self.terms.iter().enumerate() {
            if let Term::Block { support, data } = term {
                let local = 1usize << support.len();
                let c = local_config(state, self.n, support);
                for r in (0..local).filter(|&r| r != c) {
                    let amp = data[r * local + c];
                    if amp != 0.0 {
                        f(t, with_local_config(state, self.n, support, r), amp / self.divisor);
                    }
                }
            }
        }
    }

    fn check_basis<B: Basis>(&self, basis: &B) -> Result<()> {
        if basis.n_qubits() != self.n {
            return Err(Error::Parameter(format!(
                "operator on {} qubits applied to a {}-qubit basis",
                self.n,
                basis.n_qubits()
            )));
        }
        Ok(())
    }

    /// Column `index` of the operator in `basis`, as unmerged
    /// `(row, value)` pairs, plus its diagonal element.
    fn column<B: Basis>(&self, basis: &B, index: usize) -> Result<(f64, Vec<(u32, f64)>)> {
        let x = basis.state(index);
        let wx = basis.weight(index);
        let mut entries = Vec::new();
        let mut failure = None;
        self.for_each_transition(x, |t, y, amp| {
            if failure.is_some() {
                return;
            }
            match basis.locate(y) {
                Some(j) => entries.push((j as u32, amp * wx / basis.weight(j))),
                None => failure = Some(Error::SectorViolation { term: t, from: x, to: y }),
            }
        });
        match failure {
            Some(e) => Err(e),
            None => Ok((self.diagonal_value(x), entries)),
        }
    }

    /// Matrix-free product `H v` on the basis.
    pub fn apply<B: Basis>(&self, v: &[f64], basis: &B) -> Result<Vec<f64>> {
        self.check_basis(basis)?;
        if v.len() != basis.dim() {
            return Err(Error::Parameter(format!(
                "vector length {} does not match dimension {}",
                v.len(),
                basis.dim()
            )));
        }
        let mut w = vec![0.0; v.len()];
        for (i, &vi) in v.iter().enumerate() {
            let (d, entries) = self.column(basis, i)?;
            w[i] += d * vi;
            for (j, h) in entries {
                w[j as usize] += h * vi;
            }
        }
        Ok(w)
    }

    /// Assembles the operator on the basis as a sparse symmetric matrix.
    pub fn assemble<B: Basis>(&self, basis: &B) -> Result<SparseMatrix> {
        self.check_basis(basis)?;
        let columns: Vec<(f64, Vec<(u32, f64)>)> = (0..basis.dim())
            .into_par_iter()
            .map(|i| self.column(basis, i))
            .collect::<Result<_>>()?;
        let (diag, rows): (Vec<f64>, Vec<Vec<(u32, f64)>>) = columns.into_iter().unzip();
        // the reduced matrix is symmetric, so each column doubles as a row
        Ok(SparseMatrix::from_rows(diag, rows))
    }

    pub fn to_dense<B: Basis>(&self, basis: &B) -> Result<nalgebra::DMatrix<f64>> {
        if basis.dim() > DENSE_CAP {
            return Err(Error::DenseCap {
                dim: basis.dim(),
                cap: DENSE_CAP,
            });
        }
        self.check_basis(basis)?;
        let dim = basis.dim();
        let mut m = nalgebra::DMatrix::zeros(dim, dim);
        for i in 0..dim {
            let (d, entries) = self.column(basis, i)?;
            m[(i, i)] += d;
            for (j, h) in entries {
                m[(j as usize, i)] += h;
            }
        }
        let asym = (&m - m.transpose()).amax();
        assert!(asym < 1e-12, "dense operator is not symmetric (residual {asym:e})");
        Ok(m)
    }

    /// Applies every block term to every sector state and measures the
    /// amplitude that escapes the sector.
    pub fn sector_invariance_check(&self, basis: &SectorBasis) -> InvarianceReport {
        let mut leak = 0.0;
        let mut violations = 0;
        let mut terms = Vec::new();
        for &x in basis.states() {
            self.for_each_transition(x, |t, y, amp| {
                if basis.try_index(y).is_none() {
                    leak += amp * amp;
                    violations += 1;
                    terms.push(t);
                }
            });
        }
        terms.sort_unstable();
        terms.dedup();
        InvarianceReport {
            leak,
            violations,
            violating_terms: terms,
        }
    }
}

/// `(1 - s) h_d + s h_p`, dropping whichever side has zero weight.
pub fn interpolate(h_p: &Operator, h_d: &Operator, s: f64) -> Result<Operator> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::Range(format!("annealing parameter s = {s} outside [0, 1]")));
    }
    if h_p.n != h_d.n {
        return Err(Error::Parameter("problem and driver act on different qubit counts".into()));
    }
    let mut out = Operator::zero(h_p.n);
    if s < 1.0 {
        out.terms.extend(h_d.terms.iter().map(|t| t.scaled((1.0 - s) / h_d.divisor)));
    }
    if s > 0.0 {
        out.terms.extend(h_p.terms.iter().map(|t| t.scaled(s / h_p.divisor)));
    }
    out.warnings.extend(h_d.warnings.iter().cloned());
    out.warnings.extend(h_p.warnings.iter().cloned());
    Ok(out)
}

// ---------------------------------------------------------------------------
// Graph partitioning

const ZZ: [f64; 4] = [1.0, -1.0, -1.0, 1.0];

/// Cut-edge counter: energy of a state is the number of edges whose
/// endpoints disagree.
pub fn build_gp_problem(g: &Graph) -> Operator {
    let mut op = Operator::zero(g.n());
    for (u, v) in g.edges() {
        op.push(Term::Diagonal {
            support: vec![u, v],
            data: ZZ.iter().map(|zz| 0.5 * (1.0 - zz)).collect(),
        });
    }
    op
}

/// Smallest penalty weight that keeps balanced ground states optimal:
/// `min(2Δ, n) / 8`.
pub fn gp_penalty_bound(g: &Graph) -> f64 {
    (2 * g.max_degree()).min(g.n()) as f64 / 8.0
}

/// Penalty-method partitioning Hamiltonian `(H_cut + α (Σ σ^z)^2) / n`.
///
/// `(Σ σ^z)^2` is expanded as `n + 2 Σ_{i<j} σ^z_i σ^z_j`. Passing an `alpha`
/// below the bound is allowed and recorded in [`Operator::warnings`].
pub fn build_gp_penalized(g: &Graph, alpha: Option<f64>) -> Operator {
    let n = g.n();
    let bound = gp_penalty_bound(g);
    let alpha = alpha.unwrap_or(bound);
    let mut op = build_gp_problem(g);
    if alpha < bound {
        op.warnings.push(format!(
            "penalty weight {alpha} is below the bound min(2Δ, n)/8 = {bound}"
        ));
    }
    op.push(Term::Diagonal {
        support: vec![],
        data: vec![alpha * n as f64],
    });
    for i in 0..n {
        for j in i + 1..n {
            op.push(Term::Diagonal {
                support: vec![i, j],
                data: ZZ.iter().map(|zz| 2.0 * alpha * zz).collect(),
            });
        }
    }
    op.divided_by(n as f64)
}

// ---------------------------------------------------------------------------
// Drivers

const SIGMA_X: [f64; 4] = [0.0, 1.0, 1.0, 0.0];

/// `-Σ σ^x_i`.
pub fn build_transverse_driver(n: usize) -> Operator {
    transverse_on(n, 0..n)
}

fn transverse_on(n: usize, qubits: impl IntoIterator<Item = usize>) -> Operator {
    let mut op = Operator::zero(n);
    for q in qubits {
        op.push(Term::Block {
            support: vec![q],
            data: SIGMA_X.iter().map(|x| -x).collect(),
        });
    }
    op
}

/// `-coupling/2 * (σ^x σ^x + σ^y σ^y)` on a pair: swaps `01 <-> 10` with
/// amplitude `-coupling` and annihilates aligned pairs.
fn hopping_block(a: usize, b: usize, amplitude: f64) -> Term {
    let mut data = vec![0.0; 16];
    data[0b01 * 4 + 0b10] = amplitude;
    data[0b10 * 4 + 0b01] = amplitude;
    Term::Block {
        support: vec![a, b],
        data,
    }
}

/// Cyclic XY driver `-Σ (σ^x_i σ^x_{i+1} + σ^y_i σ^y_{i+1})` along `ordering`.
pub fn build_xy_ring_driver(ordering: &[usize]) -> Result<Operator> {
    let n = ordering.len();
    if n < 3 {
        return Err(Error::Parameter(format!("an XY ring needs at least 3 qubits, got {n}")));
    }
    if !is_permutation(ordering, n) {
        return Err(Error::Parameter("ring ordering is not a permutation".into()));
    }
    let mut op = Operator::zero(n);
    for i in 0..n {
        op.push(hopping_block(ordering[i], ordering[(i + 1) % n], -2.0));
    }
    Ok(op)
}

// ---------------------------------------------------------------------------
// Graph colouring

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ColoringMode {
    Bare,
    Penalized,
}

/// Flat qubit index of (vertex, colour).
#[inline]
pub fn color_qubit(vertex: usize, color: usize, colors: usize) -> usize {
    vertex * colors + color
}

/// Colouring cost `Σ_{(ij)∈E} Σ_k (1+σ^z_{ik})(1+σ^z_{jk})`, optionally plus
/// the one-colour-per-vertex penalty `Σ_i [Σ_k σ^z_{ik} - (2 - n_c)]^2` with
/// unit weight.
pub fn build_gc_problem(g: &Graph, colors: usize, mode: ColoringMode) -> Result<Operator> {
    if colors == 0 {
        return Err(Error::Parameter("need at least one colour".into()));
    }
    let n = g.n() * colors;
    let mut op = Operator::zero(n);
    for (u, v) in g.edges() {
        for k in 0..colors {
            op.push(Term::Diagonal {
                support: vec![color_qubit(u, k, colors), color_qubit(v, k, colors)],
                data: vec![0.0, 0.0, 0.0, 4.0],
            });
        }
    }
    if mode == ColoringMode::Penalized {
        // (Σ z - c)^2 = n_c + c^2 - 2c Σ z + 2 Σ_{k<l} z_k z_l
        let c = 2.0 - colors as f64;
        for vtx in 0..g.n() {
            op.push(Term::Diagonal {
                support: vec![],
                data: vec![colors as f64 + c * c],
            });
            for k in 0..colors {
                op.push(Term::Diagonal {
                    support: vec![color_qubit(vtx, k, colors)],
                    data: vec![2.0 * c, -2.0 * c],
                });
                for l in k + 1..colors {
                    op.push(Term::Diagonal {
                        support: vec![color_qubit(vtx, k, colors), color_qubit(vtx, l, colors)],
                        data: ZZ.iter().map(|zz| 2.0 * zz).collect(),
                    });
                }
            }
        }
    }
    Ok(op)
}

/// Per-vertex clique XY driver scaled by `1/n_c`.
pub fn build_gc_clique_driver(vertices: usize, colors: usize) -> Result<Operator> {
    if vertices == 0 || colors == 0 {
        return Err(Error::Parameter("need at least one vertex and colour".into()));
    }
    let mut op = Operator::zero(vertices * colors);
    let amp = -2.0 / colors as f64;
    for v in 0..vertices {
        for k in 0..colors {
            for l in k + 1..colors {
                op.push(hopping_block(
                    color_qubit(v, k, colors),
                    color_qubit(v, l, colors),
                    amp,
                ));
            }
        }
    }
    Ok(op)
}

// ---------------------------------------------------------------------------
// 3SAT

/// A 3-literal clause, represented by its single violating assignment.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause {
    vars: [usize; 3],
    /// Violating bits of `vars[0], vars[1], vars[2]`, most significant first.
    violating: u8,
}

impl Clause {
    pub fn new(vars: [usize; 3], violating: u8) -> Result<Self> {
        if vars[0] == vars[1] || vars[0] == vars[2] || vars[1] == vars[2] {
            return Err(Error::Parameter(format!("clause variables {vars:?} are not distinct")));
        }
        if violating > 7 {
            return Err(Error::Parameter(format!("violating pattern {violating} is not 3 bits")));
        }
        Ok(Clause { vars, violating })
    }

    pub fn vars(&self) -> &[usize; 3] {
        &self.vars
    }

    pub fn violating(&self) -> u8 {
        self.violating
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        Clause::new(self.vars, self.violating)?;
        if self.vars.iter().any(|&q| q >= n) {
            return Err(Error::Parameter(format!("clause {:?} out of range for {n} qubits", self.vars)));
        }
        Ok(())
    }

    #[inline]
    pub fn is_satisfied(&self, state: u64, n: usize) -> bool {
        local_config(state, n, &self.vars) != self.violating as usize
    }

    pub fn overlaps(&self, other: &Clause) -> bool {
        self.vars.iter().any(|v| other.vars.contains(v))
    }
}

/// Clauses promoted to conserved constraints versus those left in `H_p`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClausePartition {
    pub n: usize,
    pub clauses: Vec<Clause>,
    /// Indices into `clauses`, pairwise variable-disjoint.
    pub constraints: Vec<usize>,
    pub remainder: Vec<usize>,
    /// Qubits not touched by any constraint clause.
    pub free: Vec<usize>,
}

impl ClausePartition {
    pub fn constraint_clauses(&self) -> Vec<Clause> {
        self.constraints.iter().map(|&i| self.clauses[i]).collect()
    }

    pub fn remainder_clauses(&self) -> Vec<Clause> {
        self.remainder.iter().map(|&i| self.clauses[i]).collect()
    }

    /// Partition with every clause kept in the problem Hamiltonian.
    pub fn unconstrained(n: usize, clauses: &[Clause]) -> Self {
        ClausePartition {
            n,
            clauses: clauses.to_vec(),
            constraints: Vec::new(),
            remainder: (0..clauses.len()).collect(),
            free: (0..n).collect(),
        }
    }
}

/// Greedy pass in clause order: a clause becomes a constraint when it shares
/// no variable with the constraints chosen before it.
pub fn select_constraint_clauses(n: usize, clauses: &[Clause]) -> Result<ClausePartition> {
    let mut covered = vec![false; n];
    let mut constraints = Vec::new();
    let mut remainder = Vec::new();
    for (i, clause) in clauses.iter().enumerate() {
        clause.validate(n)?;
        if clause.vars.iter().all(|&q| !covered[q]) {
            for &q in &clause.vars {
                covered[q] = true;
            }
            constraints.push(i);
        } else {
            remainder.push(i);
        }
    }
    Ok(ClausePartition {
        n,
        clauses: clauses.to_vec(),
        constraints,
        remainder,
        free: (0..n).filter(|&q| !covered[q]).collect(),
    })
}

fn projector(clause: &Clause) -> Term {
    let mut data = vec![0.0; 8];
    data[clause.violating as usize] = 1.0;
    Term::Diagonal {
        support: clause.vars.to_vec(),
        data,
    }
}

/// Sum of violated-clause projectors over the non-constraint clauses.
pub fn build_3sat_problem(partition: &ClausePartition) -> Result<Operator> {
    let mut op = Operator::zero(partition.n);
    for clause in partition.remainder_clauses() {
        clause.validate(partition.n)?;
        op.push(projector(&clause));
    }
    Ok(op)
}

/// Clause driver block `1 - |u><u| - |j><j|`, with `|j>` the violating
/// pattern and `|u>` the unnormalised sum of the other seven patterns.
pub fn clause_driver_block(violating: u8) -> [f64; 64] {
    let j = violating as usize;
    let mut m = [0.0; 64];
    for r in 0..8 {
        for c in 0..8 {
            let ur = if r == j { 0.0 } else { 1.0 };
            let uc = if c == j { 0.0 } else { 1.0 };
            let id = if r == c { 1.0 } else { 0.0 };
            let jj = if r == j && c == j { 1.0 } else { 0.0 };
            m[r * 8 + c] = id - ur * uc - jj;
        }
    }
    m
}

/// Clause drivers on the constraint clauses plus `-σ^x` on the free qubits.
pub fn build_3sat_driver(partition: &ClausePartition) -> Result<Operator> {
    let mut op = Operator::zero(partition.n);
    for clause in partition.constraint_clauses() {
        clause.validate(partition.n)?;
        op.push(Term::Block {
            support: clause.vars.to_vec(),
            data: clause_driver_block(clause.violating).to_vec(),
        });
    }
    op.terms
        .extend(transverse_on(partition.n, partition.free.iter().copied()).terms);
    Ok(op)
}

/// Dense diagonal matrix of a diagonal observable on the full space, for
/// commutator checks.
pub fn dense_full_space_observable(n: usize, f: impl Fn(u64) -> f64) -> nalgebra::DMatrix<f64> {
    let dim = 1usize << n;
    nalgebra::DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        dim,
        (0..dim as u64).map(|x| f(x & full_mask(n))),
    ))
}
