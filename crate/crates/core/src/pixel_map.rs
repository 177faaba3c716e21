//! Grayscale rasters and the thresholded neighborhood maps walkers move on.

use std::fmt;
use std::io::{self, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fsutil;

/// An 8-bit grayscale image stored row-major.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Raster {
    width: usize,
    height: usize,
    data: Vec<u8>,
}

impl Raster {
    pub fn new(width: usize, height: usize, data: Vec<u8>) -> Result<Self> {
        if width == 0 || height == 0 {
            return Err(Error::invalid(format!(
                "raster dimensions must be positive, got {width}x{height}"
            )));
        }
        let expected = width
            .checked_mul(height)
            .ok_or_else(|| Error::invalid("raster dimensions overflow"))?;
        if data.len() != expected {
            return Err(Error::invalid(format!(
                "{width}x{height} raster needs {expected} intensities, got {}",
                data.len()
            )));
        }
        Ok(Raster {
            width,
            height,
            data,
        })
    }

    pub fn filled(width: usize, height: usize, value: u8) -> Result<Self> {
        Raster::new(width, height, vec![value; width.saturating_mul(height)])
    }

    /// Builds a raster by evaluating `f(x, y)` for every pixel.
    pub fn from_fn(
        width: usize,
        height: usize,
        mut f: impl FnMut(usize, usize) -> u8,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(width.saturating_mul(height));
        for y in 0..height {
            for x in 0..width {
                data.push(f(x, y));
            }
        }
        Raster::new(width, height, data)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    /// Number of pixels.
    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<u8> {
        self.data
    }

    pub fn index_of(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    pub fn coords(&self, p: usize) -> (usize, usize) {
        (p % self.width, p / self.width)
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.data[self.index_of(x, y)]
    }

    pub fn intensity(&self, p: usize) -> Result<u8> {
        self.data
            .get(p)
            .copied()
            .ok_or_else(|| self.out_of_range(p))
    }

    pub fn transpose(&self) -> Raster {
        let mut data = Vec::with_capacity(self.data.len());
        for x in 0..self.width {
            for y in 0..self.height {
                data.push(self.get(x, y));
            }
        }
        Raster {
            width: self.height,
            height: self.width,
            data,
        }
    }

    /// Absolute gray-level difference between two pixels.
    pub fn weight(&self, a: usize, b: usize) -> Result<u8> {
        Ok(self.intensity(a)?.abs_diff(self.intensity(b)?))
    }

    /// The existing 8-connected neighbors of `p` in clockwise order starting
    /// at north. Neighbors outside the raster are omitted.
    pub fn geometric_neighbors(&self, p: usize) -> Result<Vec<usize>> {
        self.check(p)?;
        let mask = self.geometric_mask(p);
        Ok(Direction::ALL
            .iter()
            .filter(|d| mask & d.bit() != 0)
            .map(|&d| self.step(p, d))
            .collect())
    }

    fn check(&self, p: usize) -> Result<()> {
        if p < self.data.len() {
            Ok(())
        } else {
            Err(self.out_of_range(p))
        }
    }

    fn out_of_range(&self, p: usize) -> Error {
        Error::invalid(format!(
            "pixel index {p} out of range for {}x{} raster",
            self.width, self.height
        ))
    }

    fn geometric_mask(&self, p: usize) -> u8 {
        let (x, y) = self.coords(p);
        let mut mask = 0u8;
        for d in Direction::ALL {
            let (dx, dy) = d.offset();
            let nx = x as isize + dx;
            let ny = y as isize + dy;
            if nx >= 0 && ny >= 0 && (nx as usize) < self.width && (ny as usize) < self.height {
                mask |= d.bit();
            }
        }
        mask
    }

    /// Index of the neighbor of `p` in direction `d`. The caller guarantees
    /// the neighbor exists.
    #[inline]
    pub(crate) fn step(&self, p: usize, d: Direction) -> usize {
        let w = self.width as isize;
        let (dx, dy) = d.offset();
        (p as isize + dy * w + dx) as usize
    }
}

impl fmt::Debug for Raster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Raster")
            .field("width", &self.width)
            .field("height", &self.height)
            .finish_non_exhaustive()
    }
}

/// The eight compass directions in the fixed clockwise scan order used for
/// neighbor enumeration and tie-breaking.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u8)]
pub enum Direction {
    N = 0,
    NE,
    E,
    SE,
    S,
    SW,
    W,
    NW,
}

impl Direction {
    pub const ALL: [Direction; 8] = [
        Direction::N,
        Direction::NE,
        Direction::E,
        Direction::SE,
        Direction::S,
        Direction::SW,
        Direction::W,
        Direction::NW,
    ];

    /// `(dx, dy)` with y growing downwards.
    pub const fn offset(self) -> (isize, isize) {
        match self {
            Direction::N => (0, -1),
            Direction::NE => (1, -1),
            Direction::E => (1, 0),
            Direction::SE => (1, 1),
            Direction::S => (0, 1),
            Direction::SW => (-1, 1),
            Direction::W => (-1, 0),
            Direction::NW => (-1, -1),
        }
    }

    #[inline]
    pub(crate) const fn bit(self) -> u8 {
        1 << self as u8
    }
}

/// Rule of movement: step to the eligible neighbor of least (`Min`) or
/// greatest (`Max`) weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Rule {
    Min,
    Max,
}

impl Rule {
    pub const BOTH: [Rule; 2] = [Rule::Min, Rule::Max];

    pub fn as_str(self) -> &'static str {
        match self {
            Rule::Min => "min",
            Rule::Max => "max",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min" => Ok(Rule::Min),
            "max" => Ok(Rule::Max),
            other => Err(Error::invalid(format!(
                "unknown rule {other:?}, expected min or max"
            ))),
        }
    }
}

/// Threshold increments per unit of `k`.
///
/// For rule min the cutoff is `k * min_step` and a neighbor is kept when its
/// weight is at least the cutoff. For rule max the cutoff is
/// `255 - k * max_step` (never below zero) and a neighbor is kept when its
/// weight is at most the cutoff. `k = 0` gives the plain 8-connected map for
/// both rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Thresholds {
    pub min_step: u32,
    pub max_step: u32,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            min_step: 10,
            max_step: 20,
        }
    }
}

impl Thresholds {
    pub fn cutoff(&self, rule: Rule, k: u32) -> u32 {
        match rule {
            Rule::Min => k.saturating_mul(self.min_step),
            Rule::Max => 255u32.saturating_sub(k.saturating_mul(self.max_step)),
        }
    }
}

/// A raster seen through one movement rule and one threshold: for each
/// pixel, the set of neighbors a walker is allowed to step to.
#[derive(Clone)]
pub struct WalkMap<'a> {
    raster: &'a Raster,
    rule: Rule,
    k: Option<u32>,
    cutoff: u32,
    // bit d set when the neighbor in Direction::ALL[d] is eligible
    masks: Vec<u8>,
}

impl<'a> WalkMap<'a> {
    /// Map at threshold index `k` with the default increments.
    pub fn new(raster: &'a Raster, rule: Rule, k: u32) -> Self {
        Self::with_thresholds(raster, rule, k, Thresholds::default())
    }

    pub fn with_thresholds(raster: &'a Raster, rule: Rule, k: u32, thresholds: Thresholds) -> Self {
        let mut map = Self::with_cutoff(raster, rule, thresholds.cutoff(rule, k));
        map.k = Some(k);
        map
    }

    /// Map with an explicit weight cutoff rather than a threshold index.
    pub fn with_cutoff(raster: &'a Raster, rule: Rule, cutoff: u32) -> Self {
        let data = raster.as_slice();
        let masks = (0..raster.len())
            .map(|p| {
                let geo = raster.geometric_mask(p);
                let mut mask = 0u8;
                for d in Direction::ALL {
                    if geo & d.bit() != 0 {
                        let w = data[p].abs_diff(data[raster.step(p, d)]) as u32;
                        if admits(rule, cutoff, w) {
                            mask |= d.bit();
                        }
                    }
                }
                mask
            })
            .collect();
        WalkMap {
            raster,
            rule,
            k: None,
            cutoff,
            masks,
        }
    }

    pub fn raster(&self) -> &'a Raster {
        self.raster
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    /// Threshold index, if the map was built from one.
    pub fn k(&self) -> Option<u32> {
        self.k
    }

    pub fn cutoff(&self) -> u32 {
        self.cutoff
    }

    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }

    pub fn weight(&self, a: usize, b: usize) -> Result<u8> {
        self.raster.weight(a, b)
    }

    /// Geometric neighbors of `p` that pass the threshold, in clockwise order.
    pub fn eligible_neighbors(&self, p: usize) -> Result<Vec<usize>> {
        self.raster.check(p)?;
        Ok(self.eligible(p).collect())
    }

    #[inline]
    pub(crate) fn eligible(&self, p: usize) -> impl Iterator<Item = usize> + '_ {
        let mask = self.masks[p];
        Direction::ALL
            .into_iter()
            .filter(move |d| mask & d.bit() != 0)
            .map(move |d| self.raster.step(p, d))
    }

    /// Every unordered eligible pair once, as `(x1, y1, x2, y2, w)` with the
    /// lexicographically smaller coordinate first, sorted by coordinates.
    pub fn edges(&self) -> Vec<Edge> {
        let r = self.raster;
        let data = r.as_slice();
        let mut edges = Vec::new();
        for p in 0..r.len() {
            let (x1, y1) = r.coords(p);
            for q in self.eligible(p) {
                let (x2, y2) = r.coords(q);
                if (x1, y1) < (x2, y2) {
                    edges.push(Edge {
                        x1,
                        y1,
                        x2,
                        y2,
                        weight: data[p].abs_diff(data[q]),
                    });
                }
            }
        }
        edges.sort_unstable();
        edges
    }

    /// Writes the edge list as `x1,y1,x2,y2,w` lines.
    pub fn write_edge_list<W: Write + ?Sized>(&self, out: &mut W) -> io::Result<()> {
        for e in self.edges() {
            writeln!(out, "{},{},{},{},{}", e.x1, e.y1, e.x2, e.y2, e.weight)?;
        }
        Ok(())
    }

    pub fn save_edge_list(&self, path: &Path) -> Result<()> {
        fsutil::write_atomic(path, |w| self.write_edge_list(w))?;
        Ok(())
    }
}

impl fmt::Debug for WalkMap<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("WalkMap")
            .field("raster", &self.raster)
            .field("rule", &self.rule)
            .field("k", &self.k)
            .field("cutoff", &self.cutoff)
            .finish()
    }
}

#[inline]
fn admits(rule: Rule, cutoff: u32, weight: u32) -> bool {
    match rule {
        Rule::Min => weight >= cutoff,
        Rule::Max => weight <= cutoff,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Edge {
    pub x1: usize,
    pub y1: usize,
    pub x2: usize,
    pub y2: usize,
    pub weight: u8,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ring(center: u8, ring: [u8; 8]) -> Raster {
        // N, NE, E, SE, S, SW, W, NW around (1, 1)
        let [n, ne, e, se, s, sw, w, nw] = ring;
        Raster::new(3, 3, vec![nw, n, ne, w, center, e, sw, s, se]).unwrap()
    }

    fn raster_strategy(max_side: usize) -> impl Strategy<Value = Raster> {
        (1..=max_side, 1..=max_side).prop_flat_map(|(w, h)| {
            proptest::collection::vec(any::<u8>(), w * h)
                .prop_map(move |data| Raster::new(w, h, data).unwrap())
        })
    }

    #[test]
    fn raster_rejects_bad_shapes() {
        assert!(Raster::new(0, 3, vec![]).is_err());
        assert!(Raster::new(2, 2, vec![1, 2, 3]).is_err());
        assert!(Raster::new(2, 2, vec![1, 2, 3, 4]).is_ok());
    }

    #[test]
    fn weight_is_absolute_difference() {
        let r = Raster::new(2, 1, vec![100, 140]).unwrap();
        assert_eq!(r.weight(0, 1).unwrap(), 40);
        assert_eq!(r.weight(1, 0).unwrap(), 40);
        let r = Raster::new(2, 1, vec![7, 7]).unwrap();
        assert_eq!(r.weight(0, 1).unwrap(), 0);
        assert!(matches!(r.weight(0, 2), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn geometric_neighbors_interior_and_corner() {
        let r = Raster::filled(3, 3, 0).unwrap();
        // N, NE, E, SE, S, SW, W, NW of the center
        assert_eq!(
            r.geometric_neighbors(4).unwrap(),
            vec![1, 2, 5, 8, 7, 6, 3, 0]
        );
        // corner (0,0): E, SE, S
        assert_eq!(r.geometric_neighbors(0).unwrap(), vec![1, 4, 3]);
        let single = Raster::filled(1, 1, 9).unwrap();
        assert!(single.geometric_neighbors(0).unwrap().is_empty());
        assert!(r.geometric_neighbors(9).is_err());
    }

    #[test]
    fn min_rule_k0_is_the_full_neighborhood() {
        let r = ring(100, [90, 120, 95, 130, 105, 100, 140, 101]);
        let map = WalkMap::new(&r, Rule::Min, 0);
        for p in 0..r.len() {
            assert_eq!(
                map.eligible_neighbors(p).unwrap(),
                r.geometric_neighbors(p).unwrap()
            );
        }
    }

    #[test]
    fn cutoff_above_every_weight_empties_min_map() {
        let r = ring(0, [255, 0, 255, 3, 9, 200, 1, 255]);
        let map = WalkMap::with_cutoff(&r, Rule::Min, 256);
        for p in 0..r.len() {
            assert!(map.eligible_neighbors(p).unwrap().is_empty());
        }
    }

    #[test]
    fn min_threshold_keeps_only_heavy_edges() {
        let r = ring(100, [110, 150, 110, 150, 110, 150, 110, 150]);
        let map = WalkMap::new(&r, Rule::Min, 3);
        assert_eq!(map.cutoff(), 30);
        let expected: Vec<usize> = r
            .geometric_neighbors(4)
            .unwrap()
            .into_iter()
            .filter(|&q| r.as_slice()[q] == 150)
            .collect();
        assert_eq!(expected.len(), 4);
        assert_eq!(map.eligible_neighbors(4).unwrap(), expected);
    }

    #[test]
    fn max_cutoff_clamps_at_zero() {
        let t = Thresholds::default();
        assert_eq!(t.cutoff(Rule::Max, 0), 255);
        assert_eq!(t.cutoff(Rule::Max, 9), 75);
        assert_eq!(t.cutoff(Rule::Max, 12), 15);
        assert_eq!(t.cutoff(Rule::Max, 13), 0);
        assert_eq!(t.cutoff(Rule::Max, 1000), 0);
        assert_eq!(t.cutoff(Rule::Min, 9), 90);
    }

    #[test]
    fn single_edge_on_two_pixels() {
        let r = Raster::new(2, 1, vec![30, 200]).unwrap();
        let mut out = Vec::new();
        WalkMap::new(&r, Rule::Min, 0)
            .write_edge_list(&mut out)
            .unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "0,0,1,0,170\n");
    }

    #[test]
    fn uniform_raster_has_no_edges_above_zero_threshold() {
        let r = Raster::filled(6, 5, 77).unwrap();
        assert!(WalkMap::new(&r, Rule::Min, 1).edges().is_empty());
    }

    #[test]
    fn edge_count_matches_closed_form() {
        for w in 1..7usize {
            for h in 1..7usize {
                let r = Raster::filled(w, h, 0).unwrap();
                // brute force over all unordered pairs at Chebyshev distance 1
                let mut brute = 0;
                for a in 0..r.len() {
                    for b in a + 1..r.len() {
                        let (ax, ay) = r.coords(a);
                        let (bx, by) = r.coords(b);
                        if ax.abs_diff(bx) <= 1 && ay.abs_diff(by) <= 1 {
                            brute += 1;
                        }
                    }
                }
                let closed = (4 * w * h + 2) as i64 - 3 * w as i64 - 3 * h as i64;
                assert_eq!(brute as i64, closed, "{w}x{h}");
                assert_eq!(WalkMap::new(&r, Rule::Min, 0).edges().len() as i64, closed);
            }
        }
    }

    #[test]
    fn edge_list_is_sorted_by_x_then_y() {
        let r = Raster::from_fn(3, 2, |x, y| (x * 40 + y * 7) as u8).unwrap();
        let edges = WalkMap::new(&r, Rule::Max, 0).edges();
        let keys: Vec<_> = edges.iter().map(|e| (e.x1, e.y1, e.x2, e.y2)).collect();
        let mut sorted = keys.clone();
        sorted.sort();
        assert_eq!(keys, sorted);
        assert!(keys.iter().all(|&(x1, y1, x2, y2)| (x1, y1) < (x2, y2)));
    }

    #[test]
    fn rule_parses_and_prints() {
        assert_eq!("min".parse::<Rule>().unwrap(), Rule::Min);
        assert_eq!(Rule::Max.to_string(), "max");
        assert!("both".parse::<Rule>().is_err());
    }

    proptest! {
        #[test]
        fn weight_is_symmetric(r in raster_strategy(6), a in 0usize..36, b in 0usize..36) {
            let (a, b) = (a % r.len(), b % r.len());
            prop_assert_eq!(r.weight(a, b).unwrap(), r.weight(b, a).unwrap());
        }

        #[test]
        fn neighborhoods_shrink_as_k_grows(r in raster_strategy(6), k in 0u32..14) {
            for rule in Rule::BOTH {
                let coarse = WalkMap::new(&r, rule, k);
                let fine = WalkMap::new(&r, rule, k + 1);
                for p in 0..r.len() {
                    let wide = coarse.eligible_neighbors(p).unwrap();
                    for q in fine.eligible_neighbors(p).unwrap() {
                        prop_assert!(wide.contains(&q));
                    }
                }
            }
        }

        #[test]
        fn eligible_is_an_ordered_subsequence_and_symmetric(
            r in raster_strategy(6),
            k in 0u32..10,
            max in any::<bool>(),
        ) {
            let rule = if max { Rule::Max } else { Rule::Min };
            let map = WalkMap::new(&r, rule, k);
            for p in 0..r.len() {
                let geo = r.geometric_neighbors(p).unwrap();
                let el = map.eligible_neighbors(p).unwrap();
                let mut it = geo.iter();
                for q in &el {
                    prop_assert!(it.any(|g| g == q));
                    prop_assert!(map.eligible_neighbors(*q).unwrap().contains(&p));
                }
                if k == 0 {
                    prop_assert_eq!(&el, &geo);
                }
            }
        }
    }
}
