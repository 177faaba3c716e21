//! From trajectories to feature vectors.
//!
//! For one `(rule, k, memory)` triple the trajectories of all `N` walks form
//! a joint distribution over `(transient, attractor)`. Its anti-diagonal sums
//! give a histogram over total trajectory length `l`, and four consecutive
//! bins starting at `memory + 1` (the shortest possible attractor) form the
//! per-memory vector. Concatenating over memories, thresholds and rules
//! builds the larger vectors:
//!
//! | vector     | concatenates        | default length |
//! |------------|---------------------|----------------|
//! | `nu`       | 4 histogram bins    | 4              |
//! | `phi`      | `nu` over memories  | 28             |
//! | `psi`      | `phi` over k        | 280            |
//! | `upsilon`  | `psi` over rules    | 560            |
//!
//! Every concatenation uses ascending memory, ascending k and min before max,
//! whatever order the caller supplied.

mod matrix;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixel_map::{Raster, Rule, Thresholds, WalkMap};
use crate::walk::{run_all_walks, Trajectory};

pub use matrix::{FeatureMatrix, FeatureRow, Layout};

/// Histogram bins taken per memory value.
pub const BINS_PER_MEMORY: usize = 4;

/// Normalized frequency of `(transient, attractor)` pairs over all walks of
/// one image and configuration. Counts are kept exactly; frequencies are
/// `count / n_walks`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointDistribution {
    memory: usize,
    rule: Rule,
    k: u32,
    counts: BTreeMap<(u32, u32), u32>,
    n_walks: u32,
}

impl JointDistribution {
    pub fn from_trajectories(
        trajectories: &[Trajectory],
        memory: usize,
        rule: Rule,
        k: u32,
    ) -> Result<Self> {
        if trajectories.is_empty() {
            return Err(Error::invalid(
                "joint distribution needs at least one trajectory",
            ));
        }
        let mut counts = BTreeMap::new();
        for t in trajectories {
            *counts.entry((t.transient, t.attractor)).or_insert(0u32) += 1;
        }
        Ok(JointDistribution {
            memory,
            rule,
            k,
            counts,
            n_walks: trajectories.len() as u32,
        })
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    pub fn n_walks(&self) -> u32 {
        self.n_walks
    }

    pub fn count(&self, transient: u32, attractor: u32) -> u32 {
        self.counts
            .get(&(transient, attractor))
            .copied()
            .unwrap_or(0)
    }

    pub fn frequency(&self, transient: u32, attractor: u32) -> f64 {
        self.count(transient, attractor) as f64 / self.n_walks as f64
    }

    /// Nonzero cells as `((transient, attractor), frequency)`.
    pub fn iter(&self) -> impl Iterator<Item = ((u32, u32), f64)> + '_ {
        let n = self.n_walks as f64;
        self.counts
            .iter()
            .map(move |(&key, &c)| (key, c as f64 / n))
    }

    /// Mass of walks that ended without an attractor.
    pub fn dead_end_mass(&self) -> f64 {
        let dead: u32 = self
            .counts
            .iter()
            .filter(|((_, rho), _)| *rho == 0)
            .map(|(_, c)| c)
            .sum();
        dead as f64 / self.n_walks as f64
    }

    /// Frequency of walks with `transient + attractor == length` and a
    /// nonzero attractor.
    pub fn histogram(&self, length: u32) -> f64 {
        if length == 0 {
            return 0.0;
        }
        let hits: u32 = self
            .counts
            .range((0, 1)..(length, 0))
            .filter(|(&(tau, rho), _)| rho >= 1 && tau + rho == length)
            .map(|(_, c)| c)
            .sum();
        hits as f64 / self.n_walks as f64
    }

    /// The per-memory vector: `BINS_PER_MEMORY` histogram bins starting at
    /// `memory + 1`.
    pub fn nu(&self) -> FeatureVector {
        let first = self.memory as u32 + 1;
        let (values, layout) = (first..first + BINS_PER_MEMORY as u32)
            .map(|bin| {
                (
                    self.histogram(bin),
                    FeatureColumn {
                        rule: self.rule,
                        k: self.k,
                        memory: self.memory,
                        bin,
                    },
                )
            })
            .unzip();
        FeatureVector { values, layout }
    }
}

/// Position of one feature: which rule, threshold index, memory and
/// histogram bin it was read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FeatureColumn {
    pub rule: Rule,
    pub k: u32,
    pub memory: usize,
    pub bin: u32,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeatureVector {
    pub values: Vec<f64>,
    pub layout: Vec<FeatureColumn>,
}

impl FeatureVector {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    fn concat(parts: impl IntoIterator<Item = FeatureVector>) -> FeatureVector {
        let mut out = FeatureVector::default();
        for p in parts {
            out.values.extend(p.values);
            out.layout.extend(p.layout);
        }
        out
    }
}

/// Which rules, thresholds and memories to extract. The sets are kept
/// sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DescriptorConfig {
    rules: Vec<Rule>,
    thresholds: Vec<u32>,
    memories: Vec<usize>,
    increments: Thresholds,
}

impl Default for DescriptorConfig {
    /// Rule min, k = 0..=9, memories 0..=6.
    fn default() -> Self {
        DescriptorConfig {
            rules: vec![Rule::Min],
            thresholds: (0..=9).collect(),
            memories: (0..=6).collect(),
            increments: Thresholds::default(),
        }
    }
}

impl DescriptorConfig {
    pub fn new(
        rules: impl IntoIterator<Item = Rule>,
        thresholds: impl IntoIterator<Item = u32>,
        memories: impl IntoIterator<Item = usize>,
    ) -> Result<Self> {
        let rules = canonical(rules);
        let thresholds = canonical(thresholds);
        let memories = canonical(memories);
        if rules.is_empty() {
            return Err(Error::invalid("rule set is empty"));
        }
        if thresholds.is_empty() {
            return Err(Error::invalid("threshold set is empty"));
        }
        if memories.is_empty() {
            return Err(Error::invalid("memory set is empty"));
        }
        Ok(DescriptorConfig {
            rules,
            thresholds,
            memories,
            increments: Thresholds::default(),
        })
    }

    pub fn with_increments(mut self, increments: Thresholds) -> Self {
        self.increments = increments;
        self
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn thresholds(&self) -> &[u32] {
        &self.thresholds
    }

    pub fn memories(&self) -> &[usize] {
        &self.memories
    }

    pub fn increments(&self) -> Thresholds {
        self.increments
    }

    /// Feature count per image.
    pub fn dimension(&self) -> usize {
        self.rules.len() * self.thresholds.len() * self.memories.len() * BINS_PER_MEMORY
    }

    /// Column layout in canonical order, without running any walk.
    pub fn layout(&self) -> Vec<FeatureColumn> {
        let mut cols = Vec::with_capacity(self.dimension());
        for &rule in &self.rules {
            for &k in &self.thresholds {
                for &memory in &self.memories {
                    let first = memory as u32 + 1;
                    cols.extend(
                        (first..first + BINS_PER_MEMORY as u32).map(|bin| FeatureColumn {
                            rule,
                            k,
                            memory,
                            bin,
                        }),
                    );
                }
            }
        }
        cols
    }

    /// Full feature vector of `raster` for this configuration.
    pub fn extract(&self, raster: &Raster) -> FeatureVector {
        let units: Vec<(Rule, u32)> = self
            .rules
            .iter()
            .flat_map(|&r| self.thresholds.iter().map(move |&k| (r, k)))
            .collect();
        let blocks: Vec<FeatureVector> = units
            .par_iter()
            .map(|&(rule, k)| {
                let map = WalkMap::with_thresholds(raster, rule, k, self.increments);
                phi_on_map(&map, k, &self.memories)
            })
            .collect();
        FeatureVector::concat(blocks)
    }
}

fn canonical<T: Ord>(items: impl IntoIterator<Item = T>) -> Vec<T> {
    let mut v: Vec<T> = items.into_iter().collect();
    v.sort();
    v.dedup();
    v
}

/// Joint distribution of all walks on `map` with the given memory.
pub fn joint_distribution(map: &WalkMap<'_>, k: u32, memory: usize) -> JointDistribution {
    let trajectories = run_all_walks(map, memory);
    JointDistribution::from_trajectories(&trajectories, memory, map.rule(), k)
        .expect("a raster always has at least one pixel")
}

pub fn nu_vector(dist: &JointDistribution) -> FeatureVector {
    dist.nu()
}

fn phi_on_map(map: &WalkMap<'_>, k: u32, memories: &[usize]) -> FeatureVector {
    FeatureVector::concat(
        memories
            .iter()
            .map(|&mu| joint_distribution(map, k, mu).nu()),
    )
}

/// `nu` concatenated over `memories` (ascending) on one thresholded map.
pub fn phi_vector(
    raster: &Raster,
    rule: Rule,
    k: u32,
    memories: &[usize],
) -> Result<FeatureVector> {
    let config = DescriptorConfig::new([rule], [k], memories.iter().copied())?;
    Ok(config.extract(raster))
}

/// `phi` concatenated over threshold indices (ascending).
pub fn psi_vector(
    raster: &Raster,
    rule: Rule,
    thresholds: &[u32],
    memories: &[usize],
) -> Result<FeatureVector> {
    let config =
        DescriptorConfig::new([rule], thresholds.iter().copied(), memories.iter().copied())?;
    Ok(config.extract(raster))
}

/// `psi` for rule min followed by `psi` for rule max.
pub fn upsilon_vector(
    raster: &Raster,
    thresholds: &[u32],
    memories: &[usize],
) -> Result<FeatureVector> {
    let config = DescriptorConfig::new(
        Rule::BOTH,
        thresholds.iter().copied(),
        memories.iter().copied(),
    )?;
    Ok(config.extract(raster))
}
