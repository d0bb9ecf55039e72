//! Evaluating one s-op over many inputs.
//!
//! With the `parallel` feature (on by default) inputs are spread over the
//! rayon thread pool. Results come back in input order either way.

use crate::atom::Sequence;
use crate::error::EvalError;
use crate::graph::{evaluate, Graph, NodeId, Value};

pub fn evaluate_many_sequential(
    graph: &Graph,
    root: NodeId,
    inputs: &[Sequence],
) -> Vec<Result<Value, EvalError>> {
    inputs
        .iter()
        .map(|input| evaluate(graph, root, input))
        .collect()
}

#[cfg(feature = "parallel")]
pub fn evaluate_many(
    graph: &Graph,
    root: NodeId,
    inputs: &[Sequence],
) -> Vec<Result<Value, EvalError>> {
    use rayon::prelude::*;
    inputs
        .par_iter()
        .map(|input| evaluate(graph, root, input))
        .collect()
}

#[cfg(not(feature = "parallel"))]
pub fn evaluate_many(
    graph: &Graph,
    root: NodeId,
    inputs: &[Sequence],
) -> Vec<Result<Value, EvalError>> {
    evaluate_many_sequential(graph, root, inputs)
}

/// Convenience for character inputs.
pub fn evaluate_strings(
    graph: &Graph,
    root: NodeId,
    inputs: &[&str],
) -> Vec<Result<Value, EvalError>> {
    let seqs: Vec<Sequence> = inputs.iter().map(|s| Sequence::from_chars(s)).collect();
    evaluate_many(graph, root, &seqs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Extensions;
    use crate::stdlib::Stdlib;

    #[test]
    fn parallel_matches_sequential() {
        let lib = Stdlib::load(Extensions::default()).unwrap();
        let root = lib.sop("dyck1PTF").unwrap().id();
        let inputs: Vec<Sequence> = (0..200)
            .map(|i| {
                let s: String = (0..(i % 17 + 1))
                    .map(|j| if (i * 7 + j * 3) % 5 < 3 { '(' } else { ')' })
                    .collect();
                Sequence::from_chars(&s)
            })
            .collect();
        let a = evaluate_many(&lib.interp.graph, root, &inputs);
        let b = evaluate_many_sequential(&lib.interp.graph, root, &inputs);
        assert_eq!(a, b);
    }

    #[test]
    fn errors_stay_in_place() {
        let lib = Stdlib::load(Extensions::default()).unwrap();
        let root = lib.sop("reverse").unwrap().id();
        let out = evaluate_strings(&lib.interp.graph, root, &["ab", "", "xyz"]);
        assert!(out[0].is_ok() && out[1].is_err() && out[2].is_ok());
    }
}
