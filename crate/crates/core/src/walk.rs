//! The deterministic partially self-avoiding walk.
//!
//! A walker standing on a pixel moves to the eligible neighbor of least
//! (rule min) or greatest (rule max) weight among those not visited in the
//! last `memory` steps, scanning clockwise from north so that the first
//! candidate wins a tie. The walk ends when the walker's state repeats or
//! when it reaches a pixel with no admissible move.
//!
//! The state is the current pixel together with the ordered window of the
//! last `memory` visited pixels (the current one included). The next move is
//! a function of exactly that state, so the first repetition pins down the
//! transient length and the attractor period.

use hashbrown::HashTable;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pixel_map::{Raster, Rule, Thresholds, WalkMap};

/// Outcome of one walk.
///
/// `attractor == 0` marks a walk that dead-ended; its `transient` is then the
/// number of pixels visited.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Trajectory {
    pub transient: u32,
    pub attractor: u32,
}

impl Trajectory {
    pub fn new(transient: u32, attractor: u32) -> Self {
        Trajectory {
            transient,
            attractor,
        }
    }

    pub fn is_dead_end(&self) -> bool {
        self.attractor == 0
    }

    /// `transient + attractor`, the histogram bin this walk falls in.
    pub fn length(&self) -> u32 {
        self.transient + self.attractor
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct WalkConfig {
    pub memory: usize,
    pub rule: Rule,
    pub k: u32,
}

impl WalkConfig {
    pub fn new(memory: usize, rule: Rule, k: u32) -> Self {
        WalkConfig { memory, rule, k }
    }

    pub fn map<'a>(&self, raster: &'a Raster, thresholds: Thresholds) -> WalkMap<'a> {
        WalkMap::with_thresholds(raster, self.rule, self.k, thresholds)
    }
}

/// Picks the next pixel from `current`, skipping anything in `forbidden`.
/// Returns `None` at a dead end.
#[inline]
pub fn choose_next(map: &WalkMap<'_>, current: usize, forbidden: &[usize]) -> Option<usize> {
    let data = map.raster().as_slice();
    let here = data[current];
    let mut best: Option<(usize, u8)> = None;
    for q in map.eligible(current) {
        if forbidden.contains(&q) {
            continue;
        }
        let w = here.abs_diff(data[q]);
        let better = match (best, map.rule()) {
            (None, _) => true,
            (Some((_, bw)), Rule::Min) => w < bw,
            (Some((_, bw)), Rule::Max) => w > bw,
        };
        if better {
            best = Some((q, w));
        }
    }
    best.map(|(q, _)| q)
}

/// Reusable walk runner. Keeps the visited path and the state index between
/// walks so repeated runs do not reallocate.
#[derive(Debug, Clone)]
pub struct Walker {
    memory: usize,
    path: Vec<usize>,
    seen: HashTable<usize>,
}

impl Walker {
    pub fn new(memory: usize) -> Self {
        Walker {
            memory,
            path: Vec::new(),
            seen: HashTable::new(),
        }
    }

    pub fn memory(&self) -> usize {
        self.memory
    }

    /// Pixels visited by the most recent walk, start first.
    pub fn path(&self) -> &[usize] {
        &self.path
    }

    pub fn run(&mut self, map: &WalkMap<'_>, start: usize) -> Result<Trajectory> {
        if start >= map.len() {
            return Err(Error::invalid(format!(
                "start pixel {start} out of range for a map of {} pixels",
                map.len()
            )));
        }
        Ok(self.run_unchecked(map, start))
    }

    pub(crate) fn run_unchecked(&mut self, map: &WalkMap<'_>, start: usize) -> Trajectory {
        let memory = self.memory;
        // with no memory the state is the current pixel alone
        let state_len = memory.max(1);
        self.path.clear();
        self.seen.clear();
        self.path.push(start);
        loop {
            let t = self.path.len() - 1;
            let path = &self.path;
            let window = |i: usize| &path[(i + 1).saturating_sub(state_len)..=i];
            let state = window(t);
            let hash = hash_window(state);
            if let Some(&first) = self.seen.find(hash, |&i| window(i) == state) {
                return Trajectory::new(first as u32, (t - first) as u32);
            }
            self.seen
                .insert_unique(hash, t, |&i| hash_window(window(i)));

            let forbidden = &self.path[(t + 1).saturating_sub(memory)..=t];
            match choose_next(map, self.path[t], forbidden) {
                Some(next) => self.path.push(next),
                None => return Trajectory::new((t + 1) as u32, 0),
            }
        }
    }
}

#[inline]
fn hash_window(window: &[usize]) -> u64 {
    const K: u64 = 0x517c_c1b7_2722_0a95;
    let mut h = window.len() as u64;
    for &p in window {
        h = (h.rotate_left(5) ^ p as u64).wrapping_mul(K);
    }
    h
}

/// One walk from `start` with the given memory.
pub fn run_walk(map: &WalkMap<'_>, memory: usize, start: usize) -> Result<Trajectory> {
    Walker::new(memory).run(map, start)
}

/// One walk per pixel, in row-major order of the start pixel.
///
/// Walks run in parallel on the current rayon pool; the result does not
/// depend on the number of workers.
pub fn run_all_walks(map: &WalkMap<'_>, memory: usize) -> Vec<Trajectory> {
    (0..map.len())
        .into_par_iter()
        .map_init(
            || Walker::new(memory),
            |walker, p| walker.run_unchecked(map, p),
        )
        .collect()
}

/// Sequential version of [`run_all_walks`].
pub fn run_all_walks_serial(map: &WalkMap<'_>, memory: usize) -> Vec<Trajectory> {
    let mut walker = Walker::new(memory);
    (0..map.len())
        .map(|p| walker.run_unchecked(map, p))
        .collect()
}
