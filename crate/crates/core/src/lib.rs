//! Exact-diagonalization simulator for constrained quantum annealing.
//!
//! Problem and driver Hamiltonians for graph partitioning, graph colouring
//! and 3SAT are built as sums of local terms, restricted to the sector
//! fixed by the conserved constraint, and diagonalized along the linear
//! annealing path `H(s) = (1 - s) H_d + s H_p` to locate the minimum gap.

pub mod basis;
pub mod error;
pub mod graphs;
pub mod hamiltonian;
pub mod harness;
pub mod matrix;
pub mod spectrum;

pub use basis::{
    clause_sector, color_symmetrize, magnetization_sector, one_hot_sector, parity_symmetrize,
    Basis, Constraint, SectorBasis, SymBasis, Symmetry,
};
pub use error::{Error, Result};
pub use graphs::{
    cycle_completion, generate_random_regular, greedy_ordering, identity_ordering,
    resource_report, Graph, Method, ResourceReport,
};
pub use hamiltonian::{
    build_3sat_driver, build_3sat_problem, build_gc_clique_driver, build_gc_problem,
    build_gp_penalized, build_gp_problem, build_transverse_driver, build_xy_ring_driver,
    interpolate, select_constraint_clauses, Clause, ClausePartition, ColoringMode,
    InvarianceReport, Operator, Term,
};
pub use matrix::{LinearOperator, Pencil, SparseMatrix};
pub use spectrum::{
    driver_ground_state, gap_curve, lanczos, lanczos_lowest, min_gap, AnnealingPath,
    DriverKind, EigenResult, GapCurve, GapPoint, LanczosOptions, MinGapResult,
};
