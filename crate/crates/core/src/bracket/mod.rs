//! The double quasi-Poisson bracket of the framed cyclic quiver, its Leibniz
//! extension to words, and evaluation on representation points.

pub mod eval;
pub mod spin;
pub mod table;
pub mod word;

pub use eval::{
    bracket_trace_matrix, jacobiator, loday_power_matrix, moment_property_residual, phi_element, tensor_residual, trace_bracket_symbolic,
    trace_bracket_value, trace_power_bracket, trace_power_bracket_grid, trace_power_bracket_scaled, Evaluator,
};
pub use table::BracketTable;
pub use word::{CyclicWordSum, Element, Generator, Letter, Tensor, TensorTerm, Vertex, Word};
