#![no_std]
// Negated comparisons are how NaN parameters get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// `num_traits::Float` supplies float methods without std; builds that pull in
// std through dev-dependencies resolve them inherently, hence the local allows.

extern crate alloc;

pub mod cover;
pub mod density;
pub mod descent;
pub mod duality;
pub mod error;
pub mod family;
pub mod group;
pub mod numeric;
pub mod riesz;
