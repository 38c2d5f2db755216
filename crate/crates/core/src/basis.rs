//! Constrained Hilbert-space sectors and their symmetry-reduced bases.
//!
//! Bit convention, used everywhere in the crate: a basis state of `n` qubits
//! is a `u64` whose bit `n - 1 - q` holds qubit `q`, and a set bit means
//! spin up (σ^z eigenvalue +1). Written as a bitstring, qubit 0 is the
//! leftmost character, so numeric order of the integers coincides with
//! lexicographic order of the bitstrings.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::hamiltonian::Clause;

pub const MAX_QUBITS: usize = 62;

/// Value (0 or 1) of qubit `q` in `state`.
#[inline]
pub fn qubit(state: u64, n: usize, q: usize) -> u64 {
    (state >> (n - 1 - q)) & 1
}

/// σ^z eigenvalue (+1 or -1) of qubit `q`.
#[inline]
pub fn spin_z(state: u64, n: usize, q: usize) -> f64 {
    if qubit(state, n, q) == 1 {
        1.0
    } else {
        -1.0
    }
}

#[inline]
pub fn full_mask(n: usize) -> u64 {
    if n == 0 {
        0
    } else {
        u64::MAX >> (64 - n)
    }
}

/// Parses a bitstring such as `"0101"` (qubit 0 first).
pub fn parse_bits(bits: &str) -> Result<u64> {
    if bits.is_empty() || bits.len() > MAX_QUBITS {
        return Err(Error::Parameter(format!("bad bitstring {bits:?}")));
    }
    u64::from_str_radix(bits, 2).map_err(|_| Error::Parameter(format!("bad bitstring {bits:?}")))
}

pub fn format_bits(state: u64, n: usize) -> String {
    (0..n).map(|q| if qubit(state, n, q) == 1 { '1' } else { '0' }).collect()
}

/// Which feasible subspace a [`SectorBasis`] spans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Constraint {
    Full,
    /// Total σ^z equal to `c`, i.e. exactly `(n + c) / 2` up spins.
    Magnetization { c: i64 },
    /// Exactly one up spin in each consecutive group of `colors` qubits.
    OneHot { vertices: usize, colors: usize },
    /// Every listed clause avoids its violating pattern.
    Clauses(Vec<Clause>),
}

#[derive(Clone, Debug)]
enum Lookup {
    Identity,
    Combinatorial { binom: Vec<Vec<u64>> },
    MixedRadix { vertices: usize, colors: usize },
    Table(HashMap<u64, usize>),
}

/// Explicit, lexicographically sorted list of the computational basis states
/// satisfying a constraint, with O(n) ranking where the structure allows it.
#[derive(Clone, Debug)]
pub struct SectorBasis {
    n: usize,
    constraint: Constraint,
    states: Vec<u64>,
    lookup: Lookup,
}

fn binomial_table(n: usize) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; n + 2]; n + 1];
    for i in 0..=n {
        t[i][0] = 1;
        for j in 1..=i {
            t[i][j] = t[i - 1][j - 1] + if j <= i - 1 { t[i - 1][j] } else { 0 };
        }
    }
    t
}

fn check_qubits(n: usize) -> Result<()> {
    if n == 0 || n > MAX_QUBITS {
        return Err(Error::Parameter(format!("qubit count {n} outside 1..={MAX_QUBITS}")));
    }
    Ok(())
}

impl SectorBasis {
    pub fn full(n: usize) -> Result<Self> {
        check_qubits(n)?;
        if n > 30 {
            return Err(Error::Parameter(format!("full space of {n} qubits is too large")));
        }
        Ok(SectorBasis {
            n,
            constraint: Constraint::Full,
            states: (0..1u64 << n).collect(),
            lookup: Lookup::Identity,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.n
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn states(&self) -> &[u64] {
        &self.states
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    /// Checks the sector predicate directly, without the index.
    pub fn satisfies(&self, state: u64) -> bool {
        if state & !full_mask(self.n) != 0 {
            return false;
        }
        match &self.constraint {
            Constraint::Full => true,
            Constraint::Magnetization { c } => {
                2 * state.count_ones() as i64 - self.n as i64 == *c
            }
            Constraint::OneHot { vertices, colors } => (0..*vertices).all(|v| {
                let group = (state >> ((vertices - 1 - v) * colors)) & full_mask(*colors);
                group.count_ones() == 1
            }),
            Constraint::Clauses(clauses) => clauses.iter().all(|c| c.is_satisfied(state, self.n)),
        }
    }

    pub fn try_index(&self, state: u64) -> Option<usize> {
        match &self.lookup {
            Lookup::Identity => (state <= full_mask(self.n)).then_some(state as usize),
            Lookup::Combinatorial { binom } => {
                if !self.satisfies(state) {
                    return None;
                }
                let mut rank = 0u64;
                let mut rest = state;
                let mut j = 1;
                while rest != 0 {
                    let p = rest.trailing_zeros() as usize;
                    rank += binom[p][j];
                    j += 1;
                    rest &= rest - 1;
                }
                Some(rank as usize)
            }
            Lookup::MixedRadix { vertices, colors } => {
                if !self.satisfies(state) {
                    return None;
                }
                let mut rank = 0usize;
                for v in 0..*vertices {
                    let group = (state >> ((vertices - 1 - v) * colors)) & full_mask(*colors);
                    // the up qubit at colour k sits at in-group bit colors-1-k
                    let digit = group.trailing_zeros() as usize;
                    rank = rank * colors + digit;
                }
                Some(rank)
            }
            Lookup::Table(map) => map.get(&state).copied(),
        }
    }

    pub fn index_of(&self, state: u64) -> Result<usize> {
        self.try_index(state).ok_or(Error::Membership { state })
    }

    pub fn state_of(&self, index: usize) -> Result<u64> {
        self.states
            .get(index)
            .copied()
            .ok_or_else(|| Error::Range(format!("position {index} >= dimension {}", self.dim())))
    }

    /// Whether the global spin flip maps the sector onto itself.
    pub fn is_flip_closed(&self) -> bool {
        let mask = full_mask(self.n);
        self.states.iter().all(|&x| self.try_index(!x & mask).is_some())
    }
}

/// All `n`-bit strings with total σ^z equal to `c`.
pub fn magnetization_sector(n: usize, c: i64) -> Result<SectorBasis> {
    check_qubits(n)?;
    let ni = n as i64;
    if c.abs() > ni || (ni + c) % 2 != 0 {
        return Err(Error::InfeasibleSector(format!(
            "total magnetization {c} is impossible for {n} spins"
        )));
    }
    let k = ((ni + c) / 2) as usize;
    let binom = binomial_table(n);
    let dim = binom[n][k] as usize;
    let mut states = Vec::with_capacity(dim);
    if k == 0 {
        states.push(0);
    } else {
        // Gosper's hack walks fixed-weight words in increasing order.
        let mut x = full_mask(k);
        let limit = 1u64 << n;
        while x < limit {
            states.push(x);
            let lowest = x & x.wrapping_neg();
            let ripple = x + lowest;
            x = (((ripple ^ x) >> 2) / lowest) | ripple;
        }
    }
    debug_assert_eq!(states.len(), dim);
    Ok(SectorBasis {
        n,
        constraint: Constraint::Magnetization { c },
        states,
        lookup: Lookup::Combinatorial { binom },
    })
}

/// One-hot sector of `vertices` groups of `colors` qubits; qubit `(i, k)` is
/// flat index `i * colors + k`.
pub fn one_hot_sector(vertices: usize, colors: usize) -> Result<SectorBasis> {
    if vertices == 0 || colors == 0 {
        return Err(Error::Parameter("one-hot sector needs at least one vertex and colour".into()));
    }
    let n = vertices * colors;
    check_qubits(n)?;
    let dim = colors
        .checked_pow(vertices as u32)
        .filter(|&d| d <= 1 << 28)
        .ok_or_else(|| Error::Parameter("one-hot sector too large".into()))?;
    let mut states = Vec::with_capacity(dim);
    let mut digits = vec![0usize; vertices];
    for _ in 0..dim {
        let state = digits
            .iter()
            .fold(0u64, |acc, &d| (acc << colors) | (1u64 << d));
        states.push(state);
        // increment the mixed-radix counter, last vertex fastest
        for d in digits.iter_mut().rev() {
            *d += 1;
            if *d < colors {
                break;
            }
            *d = 0;
        }
    }
    Ok(SectorBasis {
        n,
        constraint: Constraint::OneHot { vertices, colors },
        states,
        lookup: Lookup::MixedRadix { vertices, colors },
    })
}

/// States satisfying every constraint clause; the clauses must touch
/// pairwise disjoint qubits.
pub fn clause_sector(n: usize, clauses: &[Clause]) -> Result<SectorBasis> {
    check_qubits(n)?;
    if n > 30 {
        return Err(Error::Parameter(format!("clause sector over {n} qubits is too large")));
    }
    let mut owner = vec![false; n];
    for clause in clauses {
        clause.validate(n)?;
        for &q in clause.vars() {
            if std::mem::replace(&mut owner[q], true) {
                return Err(Error::OverlappingClauses { qubit: q });
            }
        }
    }
    let states: Vec<u64> = (0..1u64 << n)
        .filter(|&x| clauses.iter().all(|c| c.is_satisfied(x, n)))
        .collect();
    let map = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    Ok(SectorBasis {
        n,
        constraint: Constraint::Clauses(clauses.to_vec()),
        states,
        lookup: Lookup::Table(map),
    })
}

/// Symmetry group whose fully symmetric irrep a [`SymBasis`] spans.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Symmetry {
    /// Global spin flip P = ⊗σ^x.
    GlobalFlip,
    /// Simultaneous relabelling of the colours of every vertex group.
    ColorPermutation { vertices: usize, colors: usize },
}

/// Symmetric subspace of a sector: one normalised orbit sum per
/// representative, the representative being the smallest orbit member.
#[derive(Clone, Debug)]
pub struct SymBasis {
    parent: SectorBasis,
    symmetry: Symmetry,
    reps: Vec<u64>,
    orbit_sizes: Vec<usize>,
    weights: Vec<f64>,
    parent_to_rep: Vec<u32>,
}

impl SymBasis {
    pub fn parent(&self) -> &SectorBasis {
        &self.parent
    }

    pub fn symmetry(&self) -> &Symmetry {
        &self.symmetry
    }

    pub fn representatives(&self) -> &[u64] {
        &self.reps
    }

    pub fn orbit_size(&self, index: usize) -> usize {
        self.orbit_sizes[index]
    }

    pub fn dim(&self) -> usize {
        self.reps.len()
    }

    /// Index of the orbit containing `state`, if the state is in the parent
    /// sector.
    pub fn orbit_of(&self, state: u64) -> Option<usize> {
        self.parent
            .try_index(state)
            .map(|p| self.parent_to_rep[p] as usize)
    }

    /// Expands symmetric-basis amplitudes onto the parent sector.
    pub fn to_parent_vector(&self, v: &[f64]) -> Vec<f64> {
        self.parent_to_rep
            .iter()
            .map(|&r| v[r as usize] / self.weights[r as usize])
            .collect()
    }

    fn from_canonical(
        parent: SectorBasis,
        symmetry: Symmetry,
        canonical: impl Fn(u64) -> u64,
    ) -> Self {
        let canon: Vec<u64> = parent.states().iter().map(|&x| canonical(x)).collect();
        let mut reps = canon.clone();
        reps.sort_unstable();
        reps.dedup();
        let mut orbit_sizes = vec![0usize; reps.len()];
        let parent_to_rep: Vec<u32> = canon
            .iter()
            .map(|c| {
                let r = reps.binary_search(c).expect("canonical state is a representative");
                orbit_sizes[r] += 1;
                r as u32
            })
            .collect();
        let weights = orbit_sizes.iter().map(|&s| (s as f64).sqrt()).collect();
        SymBasis {
            parent,
            symmetry,
            reps,
            orbit_sizes,
            weights,
            parent_to_rep,
        }
    }
}

/// Restricts a flip-closed sector to its parity-even half.
pub fn parity_symmetrize(sector: &SectorBasis) -> Result<SymBasis> {
    if !sector.is_flip_closed() {
        return Err(Error::Symmetry(
            "sector is not closed under the global spin flip".into(),
        ));
    }
    let mask = full_mask(sector.n_qubits());
    Ok(SymBasis::from_canonical(
        sector.clone(),
        Symmetry::GlobalFlip,
        |x| x.min(!x & mask),
    ))
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    // Heap's algorithm
    let mut perm: Vec<usize> = (0..k).collect();
    let mut out = vec![perm.clone()];
    let mut c = vec![0usize; k];
    let mut i = 0;
    while i < k {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(perm.clone());
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn permute_colors(state: u64, vertices: usize, colors: usize, perm: &[usize]) -> u64 {
    let n = vertices * colors;
    let mut out = 0u64;
    for v in 0..vertices {
        for k in 0..colors {
            if qubit(state, n, v * colors + k) == 1 {
                out |= 1u64 << (n - 1 - (v * colors + perm[k]));
            }
        }
    }
    out
}

/// Restricts a sector to states symmetric under global colour relabelling.
///
/// Used for colouring problems, where every proper colouring comes with all
/// its colour permutations and only their symmetric combination is reached
/// from the driver ground state.
pub fn color_symmetrize(sector: &SectorBasis, vertices: usize, colors: usize) -> Result<SymBasis> {
    if vertices * colors != sector.n_qubits() {
        return Err(Error::Parameter(format!(
            "{vertices} x {colors} qubit layout does not match {} qubits",
            sector.n_qubits()
        )));
    }
    if colors > 8 {
        return Err(Error::Parameter("colour symmetrization supports at most 8 colours".into()));
    }
    let perms = permutations(colors);
    for &x in sector.states() {
        if perms
            .iter()
            .any(|p| sector.try_index(permute_colors(x, vertices, colors, p)).is_none())
        {
            return Err(Error::Symmetry(
                "sector is not closed under colour permutations".into(),
            ));
        }
    }
    Ok(SymBasis::from_canonical(
        sector.clone(),
        Symmetry::ColorPermutation { vertices, colors },
        |x| {
            perms
                .iter()
                .map(|p| permute_colors(x, vertices, colors, p))
                .min()
                .expect("identity permutation is always present")
        },
    ))
}

/// Orthonormal basis on which operators act matrix-free.
///
/// `state(i)` is a representative configuration of basis vector `i`, and
/// `weight(i)` the square root of the number of configurations it stands
/// for. For a transition `x -> y` with amplitude `h`, the matrix element in
/// the basis is `h * weight(x) / weight(y)` summed over all `y` landing in
/// the same basis vector. This is exact as long as the operator commutes
/// with the symmetry.
pub trait Basis: Sync {
    fn n_qubits(&self) -> usize;
    fn dim(&self) -> usize;
    fn state(&self, index: usize) -> u64;
    fn locate(&self, state: u64) -> Option<usize>;
    fn weight(&self, _index: usize) -> f64 {
        1.0
    }
    /// The unreduced sector.
    fn sector(&self) -> &SectorBasis;
}

impl Basis for SectorBasis {
    fn n_qubits(&self) -> usize {
        self.n
    }
    fn dim(&self) -> usize {
        self.states.len()
    }
    fn state(&self, index: usize) -> u64 {
        self.states[index]
    }
    fn locate(&self, state: u64) -> Option<usize> {
        self.try_index(state)
    }
    fn sector(&self) -> &SectorBasis {
        self
    }
}

impl Basis for SymBasis {
    fn n_qubits(&self) -> usize {
        self.parent.n_qubits()
    }
    fn dim(&self) -> usize {
        self.reps.len()
    }
    fn state(&self, index: usize) -> u64 {
        self.reps[index]
    }
    fn locate(&self, state: u64) -> Option<usize> {
        self.orbit_of(state)
    }
    fn weight(&self, index: usize) -> f64 {
        self.weights[index]
    }
    fn sector(&self) -> &SectorBasis {
        &self.parent
    }
}
