//! Fixtures shared by the benchmarks.

use dpsw_core::dataset::synth::{synth_texture, Family, SynthSpec};
use dpsw_core::Raster;

/// A `side` x `side` gradient-noise texture, roughly the gray-level
/// statistics of a natural texture crop.
pub fn texture(side: usize, seed: u64) -> Raster {
    let spec = SynthSpec::new(Family::GradientNoise, 12, seed)
        .amplitude(16)
        .size(side, side);
    synth_texture(&spec).expect("valid fixture spec")
}
