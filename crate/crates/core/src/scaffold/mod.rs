//! Bratteli bookkeeping, stage selection and the Q/W/U/Λ scaffold.

pub mod bratteli;
pub mod lambda;
pub mod qwu;
pub mod selection;

pub use bratteli::{multiplicities, BratteliData};
pub use lambda::{build_lambda, verify_lambda, LambdaSet};
pub use qwu::{build_qwu, matrix_units_from_u, partial_iso_closure_check, verify_qwu, QwuElements, QwuSets, SIndex, UnitRef};
pub use selection::{select_stages, StageSelection};
