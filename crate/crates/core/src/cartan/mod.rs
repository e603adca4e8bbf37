//! Chart-level exterior calculus: multivector fields, differential forms,
//! Lie and Schouten brackets, musical maps, and the bigraded decomposition of
//! the exterior differential relative to a normal/tangent frame split.

mod ops;
mod split;
mod tensor;

pub use ops::{
    apply_field, d_scalar, ext_d, flat, form_bracket, lie_bracket, lie_derivative_form,
    lie_derivative_multi, poisson_bracket, schouten_bracket, sharp,
};
pub use split::{
    bigraded_d, from_bigraded, to_bigraded, BigradedForm, BivectorBlocks, FrameSplit,
};
pub use tensor::{merge_indices, DiffForm, MultiVector, OneForm, VectorField};
