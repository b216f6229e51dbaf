//! Spacelike surfaces in four-dimensional Lorentzian space forms.
//!
//! [`surface`] samples an immersion, builds Darboux frames and splits the
//! second fundamental form into `H₊, H₋, L₊, L₋`. [`families`] holds the
//! explicit families and null deformations, [`twistor`] the Gauss lifts and
//! their almost optical structures, and [`curvature`] the integrability
//! audits of metric charts. The guide in `book/` walks through all of it.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod ambient;
pub mod curvature;
pub mod error;
pub mod families;
pub mod lorentz;
pub mod mesh;
pub mod space_form;
pub mod suites;
pub mod surface;
pub mod twistor;

pub use error::{Error, Result};
