//! Real intervals and finite unions of open intervals.

use crate::error::{Error, Result};

/// Interval `(lo, hi)`; either end may be infinite.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return Err(Error::InvalidParameter(format!(
                "interval ({lo}, {hi}) is empty"
            )));
        }
        Ok(Self { lo, hi })
    }

    pub fn real_line() -> Self {
        Self {
            lo: f64::NEG_INFINITY,
            hi: f64::INFINITY,
        }
    }

    pub fn is_real_line(&self) -> bool {
        self.lo == f64::NEG_INFINITY && self.hi == f64::INFINITY
    }

    pub fn is_bounded(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite()
    }

    /// Open-interval membership.
    pub fn contains(&self, x: f64) -> bool {
        x > self.lo && x < self.hi
    }

    pub fn contains_closed(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn distance_to_boundary(&self, x: f64) -> f64 {
        (x - self.lo).min(self.hi - x)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    /// Clamp to a finite window, used when sampling unbounded domains.
    pub fn clipped(&self, window: f64) -> Interval {
        Interval {
            lo: self.lo.max(-window),
            hi: self.hi.min(window),
        }
    }

    /// `count` evenly spaced points including both (finite) ends.
    pub fn linspace(&self, count: usize) -> Vec<f64> {
        match count {
            0 => Vec::new(),
            1 => vec![self.midpoint()],
            _ => (0..count)
                .map(|i| self.lo + (self.hi - self.lo) * i as f64 / (count - 1) as f64)
                .collect(),
        }
    }
}

/// A finite union of disjoint open intervals, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSet {
    parts: Vec<Interval>,
}

impl IntervalSet {
    pub fn new(mut parts: Vec<Interval>) -> Result<Self> {
        parts.sort_by(|a, b| a.lo.total_cmp(&b.lo));
        for w in parts.windows(2) {
            if w[1].lo < w[0].hi {
                return Err(Error::InvalidParameter(format!(
                    "intervals ({}, {}) and ({}, {}) overlap",
                    w[0].lo, w[0].hi, w[1].lo, w[1].hi
                )));
            }
        }
        Ok(Self { parts })
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn contains(&self, x: f64) -> bool {
        self.parts.iter().any(|p| p.contains(x))
    }

    pub fn component_of(&self, x: f64) -> Option<&Interval> {
        self.parts.iter().find(|p| p.contains(x))
    }

    /// Finite boundary points, sorted and deduplicated.
    pub fn boundary_points(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .parts
            .iter()
            .flat_map(|p| [p.lo, p.hi])
            .filter(|v| v.is_finite())
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Depth-`depth` stand-in for the complement of the middle-thirds Cantor set:
    /// the `2^depth - 1` removed middle intervals of `[0, 1]` plus the two
    /// unbounded outer pieces.
    pub fn cantor_complement(depth: usize) -> Result<Self> {
        if depth == 0 || depth > 6 {
            return Err(Error::InvalidParameter(format!(
                "cantor depth {depth} outside 1..=6"
            )));
        }
        let mut parts = vec![
            Interval {
                lo: f64::NEG_INFINITY,
                hi: 0.0,
            },
            Interval {
                lo: 1.0,
                hi: f64::INFINITY,
            },
        ];
        let mut remaining = vec![(0.0_f64, 1.0_f64)];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(remaining.len() * 2);
            for (lo, hi) in remaining {
                let third = (hi - lo) / 3.0;
                parts.push(Interval {
                    lo: lo + third,
                    hi: hi - third,
                });
                next.push((lo, lo + third));
                next.push((hi - third, hi));
            }
            remaining = next;
        }
        Self::new(parts)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantor_depth_two_has_three_bounded_parts() {
        let s = IntervalSet::cantor_complement(2).unwrap();
        let bounded: Vec<_> = s.parts().iter().filter(|p| p.is_bounded()).collect();
        assert_eq!(bounded.len(), 3);
        assert!(s.contains(0.5));
        assert!(!s.contains(0.25));
        assert!(s.contains(1.0 / 9.0 + 0.01));
        assert_eq!(s.boundary_points().len(), 8);
    }

    #[test]
    fn overlapping_parts_rejected() {
        let a = Interval::new(0.0, 2.0).unwrap();
        let b = Interval::new(1.0, 3.0).unwrap();
        assert!(IntervalSet::new(vec![a, b]).is_err());
        assert!(Interval::new(1.0, 1.0).is_err());
    }
}
