//! Shared estimation engines behind the model backends.

pub(crate) mod importance;
pub(crate) mod matched;
