//! Exact Jones polynomials of knots, links and linkoids, computed by
//! splitting a diagram into pieces, expanding each piece into a table of
//! grouped states, and gluing the tables back together in parallel.

pub mod bench;
pub mod bracket;
pub mod diagram;
pub mod generate;
pub mod laurent;
pub mod moves;
pub mod pairing;
pub mod permutation;
pub mod pipeline;
pub mod projection;
pub mod recombine;
pub mod spectrum;
pub mod subdivide;
