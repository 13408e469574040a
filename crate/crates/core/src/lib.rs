//! Tools for lower bounds on unit lattice covolumes and for Mahler measures.

pub mod specfun;
pub mod poly;
pub mod numfield;
pub mod report;
pub mod unitlat;
pub mod saddle;
pub mod subgeom;
pub mod util;
pub mod quad;
pub mod asymptotics;
pub mod mahler;
pub mod corpus;
