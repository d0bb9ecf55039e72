//! An interpreter, compiler and visualiser for RASP, a small language of
//! sequence operations that map onto transformer layers.

pub mod atom;
pub mod batch;
pub mod compiler;
pub mod error;
pub mod frontend;
pub mod graph;
pub mod matrix;
pub mod ops;
pub mod stdlib;
pub mod viz;

pub use atom::{Atom, Predicate, Sequence};
pub use error::Error;
pub use frontend::Interpreter;
pub use graph::{Extensions, Graph, NodeId, SOp, Selector};
