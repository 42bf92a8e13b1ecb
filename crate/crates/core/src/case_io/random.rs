use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::Xoshiro256StarStar;

use super::CaseError;
use crate::fields::CellField;
use crate::mesh::Mesh;
use crate::num::Scalar;

/// `count` samples uniform in `[lo, hi]` from xoshiro256** seeded through
/// SplitMix64. Each sample takes the top 53 bits of one draw, so the stream
/// is identical on every platform.
pub fn uniform_samples(lo: f64, hi: f64, seed: u64, count: usize) -> Vec<f64> {
    let mut rng = Xoshiro256StarStar::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let u = (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64);
            lo + (hi - lo) * u
        })
        .collect()
}

/// Per-cell permeability drawn uniformly from `[lo, hi]` m².
pub fn random_permeability<T: Scalar>(mesh: &Mesh<T>, lo: f64, hi: f64, seed: u64) -> Result<CellField<T>, CaseError> {
    if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
        return Err(CaseError::Key {
            section: "permeability".into(),
            key: "min".into(),
            line: 0,
            msg: format!("invalid range [{lo}, {hi}]"),
        });
    }
    let values = uniform_samples(lo, hi, seed, mesh.n_cells())
        .into_iter()
        .map(|v| T::of(v.clamp(lo, hi)))
        .collect();
    Ok(CellField { name: "K".into(), values })
}
