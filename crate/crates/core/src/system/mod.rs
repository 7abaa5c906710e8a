//! Truncated AH/AF inductive systems with diagonal connecting maps.

pub mod af;
pub mod map;
pub mod snapshot;
pub mod simplicity;
pub mod space;
pub mod villadsen;

pub use af::{d_span, verify_af_action, AfActionReport};
pub use map::{apply_map, compose_maps, DiagonalMap, SeedEntry};
pub use simplicity::{simplicity_witness, WITNESS_THRESHOLD};
pub use snapshot::{function_ladder, hermitian_basis, DGenerator, DProvenance, SnapshotExport, Stage, SystemSnapshot};
pub use space::{Provenance, SampledSpace};
pub use villadsen::{check_density, check_ratio, composed_seed_villadsen, villadsen_seed, DensityReport, VilladsenParams};
