//! Exhaustive classical spectra and uniqueness screening.

use serde::{Deserialize, Serialize};

use crate::basis::{full_mask, SectorBasis};
use crate::error::{Error, Result};
use crate::hamiltonian::Operator;

const LEVEL_TOL: f64 = 1e-9;

/// Distinct energies of a diagonal operator over a sector, ascending.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalSpectrum {
    pub levels: Vec<(f64, usize)>,
    /// Ground multiplicity is 1, or 2 when states pair with their global flip.
    pub unique_ground: bool,
    /// The sector is flip-closed and every energy is flip-invariant.
    pub flip_paired: bool,
    pub ground_states: Vec<u64>,
}

impl ClassicalSpectrum {
    pub fn ground_energy(&self) -> f64 {
        self.levels[0].0
    }

    pub fn ground_multiplicity(&self) -> usize {
        self.levels[0].1
    }
}

pub fn classical_spectrum(op: &Operator, basis: &SectorBasis) -> Result<ClassicalSpectrum> {
    if !op.is_diagonal() {
        return Err(Error::Usage("classical spectrum needs a diagonal operator".into()));
    }
    if op.n_qubits() != basis.n_qubits() {
        return Err(Error::Usage(format!(
            "operator acts on {} qubits, basis on {}",
            op.n_qubits(),
            basis.n_qubits()
        )));
    }
    let n = basis.n_qubits();
    let energies: Vec<f64> = basis.states().iter().map(|&x| op.diagonal_value(x)).collect();
    let flip_paired = basis.is_flip_closed()
        && basis
            .states()
            .iter()
            .zip(&energies)
            .all(|(&x, &e)| (op.diagonal_value(x ^ full_mask(n)) - e).abs() <= LEVEL_TOL * e.abs().max(1.0));

    let mut sorted = energies.clone();
    sorted.sort_by(f64::total_cmp);
    let mut levels: Vec<(f64, usize)> = Vec::new();
    for e in sorted {
        match levels.last_mut() {
            Some((lvl, m)) if e - *lvl <= LEVEL_TOL * lvl.abs().max(1.0) => *m += 1,
            _ => levels.push((e, 1)),
        }
    }
    let e0 = levels[0].0;
    let ground_states = basis
        .states()
        .iter()
        .zip(&energies)
        .filter(|&(_, &e)| e - e0 <= LEVEL_TOL * e0.abs().max(1.0))
        .map(|(&x, _)| x)
        .collect();
    let expected = if flip_paired { 2 } else { 1 };
    Ok(ClassicalSpectrum {
        unique_ground: levels[0].1 == expected,
        flip_paired,
        levels,
        ground_states,
    })
}
