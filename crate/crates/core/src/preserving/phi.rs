//! Run-interleaving bijection between `[0, n)^d` and `[0, 1)`.
//!
//! Write each `s_k / n` in binary as `.a_{k1}0 a_{k2}0 …`, where every
//! `a_{kj}` is a (possibly empty) run of ones. The image interleaves the
//! blocks round-robin: `.a_{11}0 … a_{d1}0 a_{12}0 … a_{d2}0 …`.
//! Dyadic rationals use their terminating expansion.

use std::cmp::Ordering;

/// A dyadic fraction in `[0, 1)` stored as an MSB-first bit string.
///
/// `precision` is the number of bits that are meaningful; bits past it read
/// as zero. Equality and ordering compare values only.
#[derive(Clone, Debug, Default)]
pub struct BitFraction {
    words: Vec<u64>,
    precision: usize,
}

impl BitFraction {
    pub fn zero() -> Self {
        BitFraction::default()
    }

    /// The top `bits` bits of a 64-bit fixed-point fraction.
    pub fn from_fixed(value: u64, bits: u32) -> Self {
        let bits = bits.min(64);
        let v = if bits == 64 { value } else { value & !(u64::MAX >> bits) };
        let mut out = BitFraction {
            words: vec![v],
            precision: bits as usize,
        };
        out.normalize();
        out
    }

    /// Exact binary expansion of an `f64` in `[0, 1)`.
    pub fn from_f64(x: f64) -> Self {
        assert!((0.0..1.0).contains(&x), "fraction out of range: {x}");
        // x * 2^64 is exact and below 2^64
        let scaled = x * 18_446_744_073_709_551_616.0;
        BitFraction::from_fixed(scaled as u64, 64)
    }

    pub fn precision(&self) -> usize {
        self.precision
    }

    pub fn bit(&self, i: usize) -> bool {
        self.words
            .get(i / 64)
            .is_some_and(|w| (w >> (63 - i % 64)) & 1 == 1)
    }

    fn push(&mut self, bit: bool) {
        let i = self.precision;
        if i / 64 >= self.words.len() {
            self.words.push(0);
        }
        if bit {
            self.words[i / 64] |= 1 << (63 - i % 64);
        }
        self.precision += 1;
    }

    fn push_ones(&mut self, mut count: usize) {
        while count > 0 {
            let i = self.precision;
            if i / 64 >= self.words.len() {
                self.words.push(0);
            }
            let room = 64 - i % 64;
            let take = room.min(count);
            let mask = if take == 64 { u64::MAX } else { ((1u64 << take) - 1) << (room - take) };
            self.words[i / 64] |= mask;
            self.precision += take;
            count -= take;
        }
    }

    fn normalize(&mut self) {
        while self.words.last() == Some(&0) {
            self.words.pop();
        }
    }

    /// Index of the last one bit, if any.
    fn last_one(&self) -> Option<usize> {
        let (wi, w) = self.words.iter().enumerate().rev().find(|(_, w)| **w != 0)?;
        Some(wi * 64 + 63 - w.trailing_zeros() as usize)
    }

    /// Nearest `f64` at or below the value.
    pub fn to_f64(&self) -> f64 {
        let hi = self.words.first().copied().unwrap_or(0);
        (hi >> 11) as f64 / (1u64 << 53) as f64
    }
}

impl PartialEq for BitFraction {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for BitFraction {}

impl PartialOrd for BitFraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for BitFraction {
    fn cmp(&self, other: &Self) -> Ordering {
        let n = self.words.len().max(other.words.len());
        for i in 0..n {
            let a = self.words.get(i).copied().unwrap_or(0);
            let b = other.words.get(i).copied().unwrap_or(0);
            match a.cmp(&b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        Ordering::Equal
    }
}

/// A point of `[0, 1)^d` with every coordinate a `B`-bit fraction.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitPoint {
    coords: Vec<u64>,
    bits: u32,
}

impl BitPoint {
    /// Coordinates given as numerators over `2^bits`.
    pub fn new(coords: Vec<u64>, bits: u32) -> Self {
        assert!((1..=63).contains(&bits), "bit budget must lie in 1..=63");
        assert!(coords.iter().all(|c| *c < (1u64 << bits)), "coordinate exceeds bit budget");
        BitPoint { coords, bits }
    }

    /// Truncate `s ∈ [0, n)^d` to `bits` bits per coordinate of `s / n`.
    pub fn from_point(s: &[f64], n: f64, bits: u32) -> Self {
        let scale = (1u64 << bits) as f64;
        let max = (1u64 << bits) - 1;
        let coords = s
            .iter()
            .map(|&x| (((x / n) * scale).floor().max(0.0) as u64).min(max))
            .collect();
        BitPoint::new(coords, bits)
    }

    pub fn coords(&self) -> &[u64] {
        &self.coords
    }
    pub fn bits(&self) -> u32 {
        self.bits
    }
    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    /// Coordinates scaled back to `[0, n)^d`.
    pub fn to_point(&self, n: f64) -> Vec<f64> {
        let scale = (1u64 << self.bits) as f64;
        self.coords.iter().map(|&c| c as f64 / scale * n).collect()
    }
}

/// Interleave the one-runs of the coordinates' binary expansions.
pub fn phi_encode(p: &BitPoint) -> BitFraction {
    let b = p.bits;
    // left-aligned remaining bits of each coordinate
    let mut rest: Vec<u64> = p.coords.iter().map(|&c| c << (64 - b)).collect();
    let mut out = BitFraction::zero();
    let mut pending_zeros = 0usize;
    while rest.iter().any(|r| *r != 0) {
        for r in rest.iter_mut() {
            let ones = (!*r).leading_zeros() as usize;
            if ones > 0 {
                for _ in 0..pending_zeros {
                    out.push(false);
                }
                pending_zeros = 0;
                out.push_ones(ones);
            }
            pending_zeros += 1;
            let consumed = ones + 1;
            *r = if consumed >= 64 { 0 } else { *r << consumed };
        }
    }
    out.normalize();
    out
}

/// Result of parsing a bit string back into coordinates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decoded {
    pub point: BitPoint,
    /// The input's precision ran out inside a run of ones; the run was
    /// closed by zero padding.
    pub incomplete: bool,
}

/// Parse blocks round-robin into `dim` coordinates of `bits` bits each.
pub fn phi_decode(x: &BitFraction, dim: usize, bits: u32) -> Decoded {
    assert!(dim > 0);
    let b = bits as usize;
    let mut coords = vec![0u64; dim];
    let mut filled = vec![0usize; dim];
    let end = match x.last_one() {
        Some(i) => i + 1,
        None => {
            return Decoded {
                point: BitPoint::new(coords, bits),
                incomplete: false,
            }
        }
    };
    let incomplete = x.precision > 0 && x.bit(x.precision - 1) && end == x.precision;
    let mut cursor = 0usize;
    'outer: while cursor < end {
        for k in 0..dim {
            if cursor >= end {
                break 'outer;
            }
            let mut ones = 0usize;
            while cursor < end && x.bit(cursor) {
                ones += 1;
                cursor += 1;
            }
            // closing zero (implicit past the end)
            cursor += 1;
            let take = ones.min(b.saturating_sub(filled[k]));
            for _ in 0..take {
                coords[k] |= 1 << (b - 1 - filled[k]);
                filled[k] += 1;
            }
            if filled[k] < b {
                filled[k] += 1;
            }
        }
    }
    Decoded {
        point: BitPoint::new(coords, bits),
        incomplete,
    }
}

/// `φ(s)` for `s ∈ [0, n)^d`.
pub fn encode_point(s: &[f64], n: f64, bits: u32) -> BitFraction {
    phi_encode(&BitPoint::from_point(s, n, bits))
}

/// `φ⁻¹(x)` scaled to `[0, n)^d`.
pub fn decode_point(x: &BitFraction, dim: usize, n: f64, bits: u32) -> (Vec<f64>, bool) {
    let d = phi_decode(x, dim, bits);
    (d.point.to_point(n), d.incomplete)
}

/// `φ` on `[0, 1)^d` as an `f64`.
pub fn encode_unit_f64(s: &[f64], bits: u32) -> f64 {
    encode_point(s, 1.0, bits).to_f64()
}

/// `φ⁻¹` of an `f64` into `[0, 1)^d`.
pub fn decode_unit_f64(x: f64, dim: usize, bits: u32) -> Vec<f64> {
    decode_point(&BitFraction::from_f64(x), dim, 1.0, bits).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn frac_from_str(bits: &str) -> BitFraction {
        let mut f = BitFraction::zero();
        for c in bits.chars() {
            f.push(c == '1');
        }
        f.normalize();
        f
    }

    #[test]
    fn worked_examples() {
        let half = BitPoint::new(vec![128, 128], 8);
        assert_eq!(phi_encode(&half).to_f64(), 0.625);
        let quarter = BitPoint::new(vec![64, 0], 8);
        assert_eq!(phi_encode(&quarter).to_f64(), 0.125);
        assert_eq!(phi_decode(&BitFraction::from_f64(0.625), 2, 8).point, half);
        assert_eq!(phi_decode(&BitFraction::from_f64(0.125), 2, 8).point, quarter);
        assert_eq!(phi_decode(&BitFraction::zero(), 3, 8).point, BitPoint::new(vec![0, 0, 0], 8));
    }

    #[test]
    fn one_dimensional_encoding_is_identity() {
        for c in 0..256u64 {
            let p = BitPoint::new(vec![c], 8);
            assert_eq!(phi_encode(&p), BitFraction::from_fixed(c << 56, 8));
        }
    }

    #[test]
    fn long_images_exceed_d_times_b_bits() {
        // (0000_0001, 1111_1111): the last one lands at bit 23 > 2·8 + 2
        let p = BitPoint::new(vec![1, 255], 8);
        let x = phi_encode(&p);
        assert_eq!(x.last_one(), Some(22));
        assert_eq!(phi_decode(&x, 2, 8).point, p);
    }

    #[test]
    fn truncated_run_is_flagged() {
        let x = frac_from_str("0111");
        let d = phi_decode(&BitFraction { precision: 4, ..x }, 1, 8);
        assert!(d.incomplete);
        assert_eq!(d.point.coords(), &[0b0111_0000]);
        let y = frac_from_str("0110");
        assert!(!phi_decode(&BitFraction { precision: 4, ..y }, 1, 8).incomplete);
    }

    #[test]
    fn ordering_matches_value() {
        let a = frac_from_str("0101");
        let b = frac_from_str("01011");
        assert!(a < b);
        assert_eq!(frac_from_str("0100"), frac_from_str("01"));
        assert!(BitFraction::from_f64(0.3) < BitFraction::from_f64(0.30000000000000004));
    }

    proptest! {
        #[test]
        fn decode_inverts_encode(coords in prop::collection::vec(any::<u32>(), 1..5)) {
            let p = BitPoint::new(coords.into_iter().map(u64::from).collect(), 32);
            let x = phi_encode(&p);
            prop_assert_eq!(phi_decode(&x, p.dim(), 32).point, p);
        }

        #[test]
        fn encode_is_strictly_monotone_in_one_dimension(a in any::<u32>(), b in any::<u32>()) {
            let pa = phi_encode(&BitPoint::new(vec![a as u64], 32));
            let pb = phi_encode(&BitPoint::new(vec![b as u64], 32));
            prop_assert_eq!(a.cmp(&b), pa.cmp(&pb));
        }
    }
}
