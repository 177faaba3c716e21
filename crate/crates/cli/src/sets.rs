//! Parsing of integer set flags such as `0..6`, `0,2,4` or `0..3,7`.
//! Ranges are inclusive.

use std::collections::BTreeSet;
use std::ops::Deref;

/// A sorted, deduplicated set of non-negative integers given on the command line.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntSet(pub Vec<u32>);

impl Deref for IntSet {
    type Target = [u32];
    fn deref(&self) -> &[u32] {
        &self.0
    }
}

impl std::str::FromStr for IntSet {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        parse_set(s).map(IntSet)
    }
}

pub fn parse_set(s: &str) -> Result<Vec<u32>, String> {
    let mut out = BTreeSet::new();
    for part in s.split(',').map(str::trim) {
        if part.is_empty() {
            return Err(format!("empty element in {s:?}"));
        }
        if let Some((lo, hi)) = part.split_once("..") {
            let hi = hi.strip_prefix('=').unwrap_or(hi);
            let lo: u32 = lo
                .trim()
                .parse()
                .map_err(|_| format!("bad range start in {part:?}"))?;
            let hi: u32 = hi
                .trim()
                .parse()
                .map_err(|_| format!("bad range end in {part:?}"))?;
            if lo > hi {
                return Err(format!("empty range {part:?}"));
            }
            out.extend(lo..=hi);
        } else {
            out.insert(
                part.parse()
                    .map_err(|_| format!("{part:?} is not a non-negative integer"))?,
            );
        }
    }
    Ok(out.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms() {
        assert_eq!(parse_set("0..6").unwrap(), vec![0, 1, 2, 3, 4, 5, 6]);
        assert_eq!(parse_set("0..=2").unwrap(), vec![0, 1, 2]);
        assert_eq!(parse_set("4,0,2").unwrap(), vec![0, 2, 4]);
        assert_eq!(parse_set("0..2, 7,1").unwrap(), vec![0, 1, 2, 7]);
        assert_eq!(parse_set("3").unwrap(), vec![3]);
    }

    #[test]
    fn rejects() {
        for bad in ["", "a", "3..1", "1,,2", "-1", "0..x"] {
            assert!(parse_set(bad).is_err(), "{bad}");
        }
    }
}
