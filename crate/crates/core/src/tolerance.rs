use serde::{Deserialize, Serialize};

/// Central record of numerical thresholds. `scaled` multiplies every entry,
/// which is what `--tolerance-scale` does.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Tolerances {
    pub idempotence: f64,
    pub rank_cutoff: f64,
    pub self_adjoint: f64,
    pub exact: f64,
    pub identity: f64,
    pub hypothesis: f64,
    pub matrix_unit: f64,
    pub spectral_gap: f64,
    pub witness: f64,
    pub commutator: f64,
    pub af_membership: f64,
    pub recovery: f64,
    pub extraction: f64,
    pub membership: f64,
    pub lambda_clearance: f64,
    pub dedup: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            idempotence: 1e-8,
            rank_cutoff: 1e-10,
            self_adjoint: 1e-8,
            exact: 1e-12,
            identity: 1e-10,
            hypothesis: 1e-10,
            matrix_unit: 1e-10,
            spectral_gap: 1e-9,
            witness: 1e-12,
            commutator: 1e-10,
            af_membership: 1e-8,
            recovery: 1e-8,
            extraction: 1e-6,
            membership: 1e-6,
            lambda_clearance: 1e-9,
            dedup: 1e-12,
        }
    }
}

impl Tolerances {
    pub fn scaled(&self, t: f64) -> Self {
        Tolerances {
            idempotence: self.idempotence * t,
            rank_cutoff: self.rank_cutoff * t,
            self_adjoint: self.self_adjoint * t,
            exact: self.exact * t,
            identity: self.identity * t,
            hypothesis: self.hypothesis * t,
            matrix_unit: self.matrix_unit * t,
            spectral_gap: self.spectral_gap * t,
            witness: self.witness * t,
            commutator: self.commutator * t,
            af_membership: self.af_membership * t,
            recovery: self.recovery * t,
            extraction: self.extraction * t,
            membership: self.membership * t,
            lambda_clearance: self.lambda_clearance * t,
            dedup: self.dedup * t,
        }
    }
}
