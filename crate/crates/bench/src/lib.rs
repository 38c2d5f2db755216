//! Fixed benchmark inputs.

use cqa_core::harness::{generate_screened_ensemble, Encoding, InstanceDescriptor};
use cqa_core::Method;

/// First screened degree-5 partitioning instance on `n` vertices.
pub fn gp_instance(n: usize) -> InstanceDescriptor {
    generate_screened_ensemble(n, 5, 1, 1).expect("screening succeeds at bench sizes").remove(0)
}

pub fn gp_encoding(n: usize, method: Method) -> Encoding {
    gp_instance(n).with_method(method).encoding().expect("valid instance")
}
