use std::cmp::Ordering;
use std::fmt;

/// An exact dyadic rational `num / 2^exp`, kept in lowest terms.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: u128,
    exp: u32,
}

impl Dyadic {
    pub const ZERO: Dyadic = Dyadic { num: 0, exp: 0 };
    pub const ONE: Dyadic = Dyadic { num: 1, exp: 0 };

    pub fn new(mut num: u128, mut exp: u32) -> Self {
        if num == 0 {
            return Self::ZERO;
        }
        let tz = num.trailing_zeros().min(exp);
        num >>= tz;
        exp -= tz;
        Dyadic { num, exp }
    }

    pub fn numerator(&self) -> u128 {
        self.num
    }

    pub fn exponent(&self) -> u32 {
        self.exp
    }

    /// The value scaled by `2^exp`; `None` if it is not an integer at that scale.
    pub fn scaled(&self, exp: u32) -> Option<u128> {
        if exp < self.exp {
            None
        } else {
            Some(self.num << (exp - self.exp))
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.num as f64 / 2f64.powi(self.exp as i32)
    }

    pub fn add(&self, other: &Dyadic) -> Dyadic {
        let e = self.exp.max(other.exp);
        Dyadic::new(self.scaled(e).unwrap() + other.scaled(e).unwrap(), e)
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        self.scaled(e).unwrap().cmp(&other.scaled(e).unwrap())
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, 1u128 << self.exp)
        }
    }
}

/// A half-open interval `[lo, hi)` with dyadic endpoints.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DyadicInterval {
    lo: Dyadic,
    hi: Dyadic,
}

impl DyadicInterval {
    pub fn new(lo: Dyadic, hi: Dyadic) -> Self {
        assert!(lo <= hi, "interval bounds out of order: {lo:?} > {hi:?}");
        DyadicInterval { lo, hi }
    }

    pub fn lo(&self) -> Dyadic {
        self.lo
    }

    pub fn hi(&self) -> Dyadic {
        self.hi
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.is_empty() || (self.lo <= other.lo && other.hi <= self.hi)
    }

    pub fn is_disjoint(&self, other: &DyadicInterval) -> bool {
        self.is_empty() || other.is_empty() || self.hi <= other.lo || other.hi <= self.lo
    }
}

impl fmt::Debug for DyadicInterval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.lo, self.hi)
    }
}

/// A finite union of dyadic intervals, stored sorted with touching pieces merged.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntervalSet {
    parts: Vec<DyadicInterval>,
}

impl IntervalSet {
    pub fn from_intervals(items: impl IntoIterator<Item = DyadicInterval>) -> Self {
        let mut v: Vec<DyadicInterval> = items.into_iter().filter(|i| !i.is_empty()).collect();
        v.sort();
        let mut parts: Vec<DyadicInterval> = Vec::with_capacity(v.len());
        for i in v {
            match parts.last_mut() {
                Some(last) if i.lo <= last.hi => {
                    if i.hi > last.hi {
                        last.hi = i.hi;
                    }
                }
                _ => parts.push(i),
            }
        }
        IntervalSet { parts }
    }

    pub fn parts(&self) -> &[DyadicInterval] {
        &self.parts
    }

    pub fn contains(&self, other: &DyadicInterval) -> bool {
        other.is_empty() || self.parts.iter().any(|p| p.contains(other))
    }

    pub fn contains_set(&self, other: &IntervalSet) -> bool {
        other.parts.iter().all(|p| self.contains(p))
    }

    /// The single interval covered, if the union is contiguous.
    pub fn as_single(&self) -> Option<DyadicInterval> {
        match self.parts.as_slice() {
            [one] => Some(*one),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dyadic_normalises_and_orders() {
        assert_eq!(Dyadic::new(4, 3), Dyadic::new(1, 1));
        assert!(Dyadic::new(3, 3) < Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(1, 2).add(&Dyadic::new(1, 2)), Dyadic::new(1, 1));
        assert_eq!(Dyadic::new(3, 2).scaled(4), Some(12));
        assert_eq!(Dyadic::new(3, 2).scaled(1), None);
    }

    #[test]
    fn union_merges_touching_parts() {
        let a = DyadicInterval::new(Dyadic::ZERO, Dyadic::new(1, 1));
        let b = DyadicInterval::new(Dyadic::new(1, 1), Dyadic::new(5, 3));
        let c = DyadicInterval::new(Dyadic::new(3, 2), Dyadic::ONE);
        let u = IntervalSet::from_intervals([c, a, b]);
        assert_eq!(u.parts().len(), 2);
        assert!(u.as_single().is_none());
        assert!(u.contains(&DyadicInterval::new(Dyadic::new(1, 3), Dyadic::new(1, 1))));
        assert!(!u.contains(&DyadicInterval::new(Dyadic::new(1, 1), Dyadic::new(3, 2))));
    }
}
