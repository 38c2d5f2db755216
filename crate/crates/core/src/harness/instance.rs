//! Instance descriptors and their JSON files.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::{
    clause_sector, color_symmetrize, magnetization_sector, one_hot_sector, parity_symmetrize,
    Basis, SectorBasis, SymBasis,
};
use crate::error::{Error, Result};
use crate::graphs::{identity_ordering, Graph, Method};
use crate::hamiltonian::{
    build_3sat_driver, build_3sat_problem, build_gc_clique_driver, build_gc_problem,
    build_gp_penalized, build_gp_problem, build_transverse_driver, build_xy_ring_driver,
    select_constraint_clauses, Clause, ClausePartition, ColoringMode, Operator,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Problem {
    Gp,
    Gc,
    Sat,
}

impl fmt::Display for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Problem::Gp => "gp",
            Problem::Gc => "gc",
            Problem::Sat => "sat",
        })
    }
}

impl FromStr for Problem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gp" => Ok(Problem::Gp),
            "gc" => Ok(Problem::Gc),
            "sat" => Ok(Problem::Sat),
            other => Err(Error::Parameter(format!("unknown problem {other:?}"))),
        }
    }
}

/// A 3SAT formula over `n` variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cnf {
    pub n: usize,
    pub clauses: Vec<Clause>,
}

impl Cnf {
    pub fn validate(&self) -> Result<()> {
        self.clauses.iter().try_for_each(|c| c.validate(self.n))
    }
}

/// Uniform random 3SAT: each clause draws three variables and is redrawn
/// unless they are distinct; its violating pattern is uniform over 3 bits.
pub fn random_cnf(n: usize, m: usize, seed: u64) -> Result<Cnf> {
    if n < 3 {
        return Err(Error::Parameter("3SAT needs at least 3 variables".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut clauses = Vec::with_capacity(m);
    while clauses.len() < m {
        let vars = [
            rng.random_range(0..n),
            rng.random_range(0..n),
            rng.random_range(0..n),
        ];
        if let Ok(c) = Clause::new(vars, rng.random_range(0..8)) {
            clauses.push(c);
        }
    }
    Ok(Cnf { n, clauses })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Payload {
    Graph(Graph),
    Cnf(Cnf),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Params {
    pub method: Method,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub colors: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ordering: Option<Vec<usize>>,
    pub seed: u64,
}

/// One annealing problem instance. The `id` hashes problem, payload and
/// parameters except the method, so both encodings of an instance share it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceDescriptor {
    pub problem: Problem,
    pub n: usize,
    pub payload: Payload,
    pub params: Params,
    pub id: String,
}

#[derive(Serialize)]
struct IdInput<'a> {
    problem: Problem,
    n: usize,
    payload: &'a Payload,
    colors: Option<usize>,
    alpha: Option<f64>,
    ordering: &'a Option<Vec<usize>>,
    seed: u64,
}

impl InstanceDescriptor {
    pub fn new(problem: Problem, payload: Payload, params: Params) -> Result<Self> {
        let n = match &payload {
            Payload::Graph(g) => g.n(),
            Payload::Cnf(c) => c.n,
        };
        let mut desc = InstanceDescriptor {
            problem,
            n,
            payload,
            params,
            id: String::new(),
        };
        desc.validate_payload()?;
        desc.id = desc.compute_id();
        Ok(desc)
    }

    pub fn gp(g: Graph, method: Method, seed: u64) -> Result<Self> {
        InstanceDescriptor::new(
            Problem::Gp,
            Payload::Graph(g),
            Params {
                method,
                colors: None,
                alpha: None,
                ordering: None,
                seed,
            },
        )
    }

    fn compute_id(&self) -> String {
        let input = IdInput {
            problem: self.problem,
            n: self.n,
            payload: &self.payload,
            colors: self.params.colors,
            alpha: self.params.alpha,
            ordering: &self.params.ordering,
            seed: self.params.seed,
        };
        let bytes = serde_json::to_vec(&input).expect("descriptor serializes");
        hex::encode(&Sha256::digest(&bytes)[..8])
    }

    fn validate_payload(&self) -> Result<()> {
        match (&self.problem, &self.payload) {
            (Problem::Gp | Problem::Gc, Payload::Graph(_)) => {}
            (Problem::Sat, Payload::Cnf(cnf)) => cnf.validate()?,
            _ => {
                return Err(Error::Parameter(format!(
                    "payload does not match problem {}",
                    self.problem
                )))
            }
        }
        if self.problem == Problem::Gc && self.params.colors.unwrap_or(0) == 0 {
            return Err(Error::Parameter("colouring instances need a colour count".into()));
        }
        if let Some(order) = &self.params.ordering {
            if !crate::graphs::is_permutation(order, self.n) {
                return Err(Error::Parameter("ring ordering is not a permutation".into()));
            }
        }
        Ok(())
    }

    pub fn with_method(&self, method: Method) -> Self {
        let mut d = self.clone();
        d.params.method = method;
        d
    }

    pub fn graph(&self) -> Option<&Graph> {
        match &self.payload {
            Payload::Graph(g) => Some(g),
            Payload::Cnf(_) => None,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("descriptor serializes")
    }

    /// Parses and re-validates an instance file, including its id.
    pub fn from_json(text: &str) -> Result<Self> {
        let desc: InstanceDescriptor = serde_json::from_str(text)?;
        desc.validate_payload()?;
        let expected = desc.compute_id();
        if desc.id != expected {
            return Err(Error::Parameter(format!(
                "instance id {} does not match its content ({expected})",
                desc.id
            )));
        }
        Ok(desc)
    }

    /// Problem Hamiltonian, driver and relevant basis for the descriptor's
    /// method.
    pub fn encoding(&self) -> Result<Encoding> {
        let method = self.params.method;
        match (&self.problem, &self.payload) {
            (Problem::Gp, Payload::Graph(g)) => {
                let n = g.n();
                match method {
                    Method::Penalty => Ok(Encoding {
                        problem: build_gp_penalized(g, self.params.alpha),
                        driver: build_transverse_driver(n),
                        basis: RelevantBasis::Sym(parity_symmetrize(&SectorBasis::full(n)?)?),
                    }),
                    Method::Cqa => {
                        let order = self.params.ordering.clone().unwrap_or_else(|| identity_ordering(n));
                        Ok(Encoding {
                            problem: build_gp_problem(g),
                            driver: build_xy_ring_driver(&order)?,
                            basis: RelevantBasis::Sym(parity_symmetrize(&magnetization_sector(n as usize, 0)?)?),
                        })
                    }
                }
            }
            (Problem::Gc, Payload::Graph(g)) => {
                let colors = self.params.colors.unwrap_or(0);
                let n = g.n();
                match method {
                    Method::Penalty => Ok(Encoding {
                        problem: build_gc_problem(g, colors, ColoringMode::Penalized)?,
                        driver: build_transverse_driver(n * colors),
                        basis: RelevantBasis::Sym(color_symmetrize(
                            &SectorBasis::full(n * colors)?,
                            n,
                            colors,
                        )?),
                    }),
                    Method::Cqa => Ok(Encoding {
                        problem: build_gc_problem(g, colors, ColoringMode::Bare)?,
                        driver: build_gc_clique_driver(n, colors)?,
                        basis: RelevantBasis::Sym(color_symmetrize(
                            &one_hot_sector(n, colors)?,
                            n,
                            colors,
                        )?),
                    }),
                }
            }
            (Problem::Sat, Payload::Cnf(cnf)) => {
                let partition = match method {
                    Method::Penalty => ClausePartition::unconstrained(cnf.n, &cnf.clauses),
                    Method::Cqa => select_constraint_clauses(cnf.n, &cnf.clauses)?,
                };
                let basis = match method {
                    Method::Penalty => SectorBasis::full(cnf.n)?,
                    Method::Cqa => clause_sector(cnf.n, &partition.constraint_clauses())?,
                };
                Ok(Encoding {
                    problem: build_3sat_problem(&partition)?,
                    driver: build_3sat_driver(&partition)?,
                    basis: RelevantBasis::Sector(basis),
                })
            }
            _ => Err(Error::Parameter("payload does not match problem".into())),
        }
    }
}

/// Either a plain sector or its symmetric reduction.
#[derive(Clone, Debug)]
pub enum RelevantBasis {
    Sector(SectorBasis),
    Sym(SymBasis),
}

impl Basis for RelevantBasis {
    fn n_qubits(&self) -> usize {
        match self {
            RelevantBasis::Sector(b) => b.n_qubits(),
            RelevantBasis::Sym(b) => Basis::n_qubits(b),
        }
    }
    fn dim(&self) -> usize {
        match self {
            RelevantBasis::Sector(b) => b.dim(),
            RelevantBasis::Sym(b) => b.dim(),
        }
    }
    fn state(&self, index: usize) -> u64 {
        match self {
            RelevantBasis::Sector(b) => b.state(index),
            RelevantBasis::Sym(b) => b.state(index),
        }
    }
    fn locate(&self, state: u64) -> Option<usize> {
        match self {
            RelevantBasis::Sector(b) => b.locate(state),
            RelevantBasis::Sym(b) => b.locate(state),
        }
    }
    fn weight(&self, index: usize) -> f64 {
        match self {
            RelevantBasis::Sector(b) => b.weight(index),
            RelevantBasis::Sym(b) => b.weight(index),
        }
    }
    fn sector(&self) -> &SectorBasis {
        match self {
            RelevantBasis::Sector(b) => b,
            RelevantBasis::Sym(b) => b.parent(),
        }
    }
}

/// Everything needed to anneal one instance with one method.
#[derive(Clone, Debug)]
pub struct Encoding {
    pub problem: Operator,
    pub driver: Operator,
    pub basis: RelevantBasis,
}
