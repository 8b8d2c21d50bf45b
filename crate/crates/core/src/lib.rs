//! Pictures over group presentations and the combinatorial group theory
//! they rest on.

pub mod abelian;
pub mod builder;
pub mod freeprod;
pub mod moves;
pub mod picture;
pub mod presentation;
pub mod relative;
pub mod words;
