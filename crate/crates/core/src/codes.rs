//! Binary code representations and Hamming-space primitives.
//!
//! Bit numbering convention, used consistently across the crate: bit 0 is
//! the most significant bit of the canonical hex rendering of a code. A
//! 256-bit code is stored as four 64-bit words `w0..w3` where word `j`
//! holds bit positions `[64j, 64j + 64)`; a 64-bit code is stored as four
//! 16-bit subcodes `s0..s3` where subcode `j` holds bit positions
//! `[16j, 16j + 16)`. Under this convention the hex rendering of a code is
//! simply the concatenation of its words' (or subcodes') hex renderings.

use std::fmt;
use std::str::FromStr;

use itertools::Itertools;

use crate::error::{Error, Result};

/// Width of a full re-ranking code in bits.
pub const LONG_BITS: u32 = 256;
/// Width of a filtering code in bits.
pub const SHORT_BITS: u32 = 64;
/// Width of one inverted-index subcode in bits.
pub const SUBCODE_BITS: u32 = 16;
/// Hex characters in a long code.
pub const LONG_HEX_LEN: usize = 64;
/// Hex characters in a short code.
pub const SHORT_HEX_LEN: usize = 16;

/// A 16-bit subcode value. Subcodes are used directly as keys into the
/// neighbor table and the per-position posting maps.
pub type Subcode16 = u16;

/// A count of differing bit positions.
pub type HammingDistance = u32;

/// A 256-bit code stored as four 64-bit words.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LongCode {
    pub words: [u64; 4],
}

impl LongCode {
    pub const ZERO: Self = Self { words: [0; 4] };

    pub const fn new(words: [u64; 4]) -> Self {
        Self { words }
    }

    /// Bit at `pos` (0 = most significant bit of the hex rendering).
    #[inline]
    pub fn bit(&self, pos: u32) -> bool {
        debug_assert!(pos < LONG_BITS);
        self.words[(pos >> 6) as usize] >> (63 - (pos & 63)) & 1 == 1
    }

    #[inline]
    pub fn set_bit(&mut self, pos: u32, value: bool) {
        debug_assert!(pos < LONG_BITS);
        let mask = 1u64 << (63 - (pos & 63));
        let word = &mut self.words[(pos >> 6) as usize];
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    #[inline]
    pub fn flip_bit(&mut self, pos: u32) {
        debug_assert!(pos < LONG_BITS);
        self.words[(pos >> 6) as usize] ^= 1u64 << (63 - (pos & 63));
    }

    pub fn complemented(&self) -> Self {
        let [a, b, c, d] = self.words;
        Self::new([!a, !b, !c, !d])
    }

    /// 16-bit subcode `j` of this code, `j` in `0..16`. Subcode `j` covers
    /// bit positions `[16j, 16j + 16)`.
    #[inline]
    pub fn subcode16(&self, j: usize) -> Subcode16 {
        debug_assert!(j < 16);
        (self.words[j >> 2] >> (48 - 16 * (j & 3))) as u16
    }

    /// Parses exactly 64 hex characters (case-insensitive).
    pub fn parse_hex(text: &str) -> Result<Self> {
        let mut words = [0u64; 4];
        parse_hex_into(text, LONG_HEX_LEN, |i, nibble| {
            words[i >> 4] = words[i >> 4] << 4 | u64::from(nibble);
        })?;
        Ok(Self { words })
    }

    /// Canonical lowercase 64-character hex rendering.
    pub fn format_hex(&self) -> String {
        let [a, b, c, d] = self.words;
        format!("{a:016x}{b:016x}{c:016x}{d:016x}")
    }
}

impl fmt::Display for LongCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_hex())
    }
}

impl fmt::Debug for LongCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LongCode({})", self.format_hex())
    }
}

impl FromStr for LongCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_hex(s)
    }
}

/// A 64-bit filtering code stored as four 16-bit subcodes.
#[derive(Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ShortCode {
    pub subcodes: [Subcode16; 4],
}

impl ShortCode {
    pub const ZERO: Self = Self { subcodes: [0; 4] };

    pub const fn new(subcodes: [Subcode16; 4]) -> Self {
        Self { subcodes }
    }

    /// The code as a single 64-bit word, subcode 0 in the high bits.
    #[inline]
    pub fn as_u64(&self) -> u64 {
        let [s0, s1, s2, s3] = self.subcodes;
        (s0 as u64) << 48 | (s1 as u64) << 32 | (s2 as u64) << 16 | s3 as u64
    }

    #[inline]
    pub fn from_u64(value: u64) -> Self {
        Self::new([
            (value >> 48) as u16,
            (value >> 32) as u16,
            (value >> 16) as u16,
            value as u16,
        ])
    }

    /// Bit at `pos` (0 = most significant bit of the hex rendering).
    #[inline]
    pub fn bit(&self, pos: u32) -> bool {
        debug_assert!(pos < SHORT_BITS);
        self.subcodes[(pos >> 4) as usize] >> (15 - (pos & 15)) & 1 == 1
    }

    #[inline]
    pub fn flip_bit(&mut self, pos: u32) {
        debug_assert!(pos < SHORT_BITS);
        self.subcodes[(pos >> 4) as usize] ^= 1u16 << (15 - (pos & 15));
    }

    /// Parses exactly 16 hex characters (case-insensitive).
    pub fn parse_hex(text: &str) -> Result<Self> {
        let mut subcodes = [0u16; 4];
        parse_hex_into(text, SHORT_HEX_LEN, |i, nibble| {
            subcodes[i >> 2] = subcodes[i >> 2] << 4 | u16::from(nibble);
        })?;
        Ok(Self { subcodes })
    }

    /// Canonical lowercase 16-character hex rendering.
    pub fn format_hex(&self) -> String {
        let [s0, s1, s2, s3] = self.subcodes;
        format!("{s0:04x}{s1:04x}{s2:04x}{s3:04x}")
    }
}

impl fmt::Display for ShortCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.format_hex())
    }
}

impl fmt::Debug for ShortCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ShortCode({})", self.format_hex())
    }
}

impl FromStr for ShortCode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_hex(s)
    }
}

/// A hex string parsed as either code width.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ParsedCode {
    Long(LongCode),
    Short(ShortCode),
}

/// Parses a hex code by length: 64 characters make a [`LongCode`], 16 a
/// [`ShortCode`]. Any other length is rejected.
pub fn parse_code_hex(text: &str) -> Result<ParsedCode> {
    match text.chars().count() {
        LONG_HEX_LEN => Ok(ParsedCode::Long(LongCode::parse_hex(text)?)),
        SHORT_HEX_LEN => Ok(ParsedCode::Short(ShortCode::parse_hex(text)?)),
        got => Err(Error::BadCodeLength { got }),
    }
}

fn parse_hex_into(text: &str, expected: usize, mut push: impl FnMut(usize, u8)) -> Result<()> {
    let count = text.chars().count();
    if count != expected {
        return Err(Error::BadHexLength { expected, got: count });
    }
    for (i, ch) in text.chars().enumerate() {
        let nibble = ch
            .to_digit(16)
            .ok_or(Error::BadHexChar { found: ch, position: i })?;
        push(i, nibble as u8);
    }
    Ok(())
}

/// Exact Hamming distance between two 256-bit codes.
#[inline]
pub fn hamming256(a: &LongCode, b: &LongCode) -> HammingDistance {
    (a.words[0] ^ b.words[0]).count_ones()
        + (a.words[1] ^ b.words[1]).count_ones()
        + (a.words[2] ^ b.words[2]).count_ones()
        + (a.words[3] ^ b.words[3]).count_ones()
}

/// Exact Hamming distance between two 64-bit codes.
#[inline]
pub fn hamming64(a: &ShortCode, b: &ShortCode) -> HammingDistance {
    (a.as_u64() ^ b.as_u64()).count_ones()
}

/// Exact Hamming distance between two 16-bit subcodes.
#[inline]
pub fn hamming16(a: Subcode16, b: Subcode16) -> HammingDistance {
    (u32::from(a) ^ u32::from(b)).count_ones()
}

/// Per-word similarity contribution: `64 - popcount(query ^ doc)`, always in
/// `[0, 64]`. Summed over the four words of a long code this yields
/// `256 - hamming256`, so ranking by descending score equals ranking by
/// ascending distance.
#[inline]
pub fn subcode_score(query_word: u64, doc_word: u64) -> u32 {
    64 - (query_word ^ doc_word).count_ones()
}

/// Number of 16-bit values within Hamming distance `d` of any fixed value:
/// `sum_{i=0..=d} C(16, i)`.
pub fn hamming_ball_size(d: u32) -> Result<usize> {
    if d > SUBCODE_BITS {
        return Err(Error::RadiusOutOfRange(d));
    }
    Ok((0..=d).map(|i| binomial(16, i as u64)).sum())
}

fn binomial(n: u64, k: u64) -> usize {
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc as usize
}

/// XOR masks of weight at most `d`, in order of increasing weight. XORing a
/// subcode with every mask enumerates its Hamming ball of radius `d`.
pub(crate) fn ball_masks(d: u32) -> Vec<u16> {
    debug_assert!(d <= SUBCODE_BITS);
    let mut masks = vec![0u16];
    for weight in 1..=d as usize {
        for combo in (0..16u16).combinations(weight) {
            masks.push(combo.into_iter().fold(0u16, |mask, bit| mask | 1 << bit));
        }
    }
    masks
}

/// All 16-bit values within Hamming distance `d` of `c`, sorted ascending.
/// The result always contains `c` itself and has exactly
/// [`hamming_ball_size(d)`](hamming_ball_size) entries.
pub fn enumerate_neighbors(c: Subcode16, d: u32) -> Result<Vec<Subcode16>> {
    if d > SUBCODE_BITS {
        return Err(Error::RadiusOutOfRange(d));
    }
    let mut neighbors: Vec<u16> = ball_masks(d).into_iter().map(|mask| c ^ mask).collect();
    neighbors.sort_unstable();
    Ok(neighbors)
}

#[cfg(test)]
mod tests {
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn random_long(rng: &mut ChaCha8Rng) -> LongCode {
        LongCode::new([rng.random(), rng.random(), rng.random(), rng.random()])
    }

    #[test]
    fn hamming_identity_is_zero() {
        let a = LongCode::new([0xdead_beef, 1, 2, 3]);
        assert_eq!(hamming256(&a, &a), 0);
        let s = ShortCode::from_u64(0xdead_beef_0000_0001);
        assert_eq!(hamming64(&s, &s), 0);
    }

    #[test]
    fn hamming_complement_is_full_width() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let a = random_long(&mut rng);
            assert_eq!(hamming256(&a, &a.complemented()), 256);
            let s = ShortCode::from_u64(rng.random());
            let flipped = ShortCode::from_u64(!s.as_u64());
            assert_eq!(hamming64(&s, &flipped), 64);
        }
    }

    #[test]
    fn hamming_single_bit() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let a = random_long(&mut rng);
            let mut b = a;
            let pos = rng.random_range(0..LONG_BITS);
            b.flip_bit(pos);
            assert_eq!(hamming256(&a, &b), 1);
            assert!(a.bit(pos) != b.bit(pos));
        }
    }

    #[test]
    fn hamming_equals_naive_bit_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let a = random_long(&mut rng);
            let b = random_long(&mut rng);
            let naive = (0..LONG_BITS).filter(|&p| a.bit(p) != b.bit(p)).count() as u32;
            assert_eq!(hamming256(&a, &b), naive);
        }
    }

    #[test]
    fn subcode_score_matches_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        for _ in 0..10_000 {
            let q: u64 = rng.random();
            let d: u64 = rng.random();
            let score = subcode_score(q, d);
            assert!(score <= 64);
            assert_eq!(score, 64 - (q ^ d).count_ones());
        }
        // Summed over a long code's words, score mirrors full distance.
        for _ in 0..1_000 {
            let a = random_long(&mut rng);
            let b = random_long(&mut rng);
            let total: u32 = (0..4).map(|i| subcode_score(a.words[i], b.words[i])).sum();
            assert_eq!(total, 256 - hamming256(&a, &b));
        }
    }

    #[test]
    fn bit_numbering_matches_hex_rendering() {
        // Bit 0 set and nothing else renders as "8000...".
        let mut a = LongCode::ZERO;
        a.set_bit(0, true);
        assert_eq!(a.format_hex(), format!("8{}", "0".repeat(63)));
        // Bit 255 is the least significant nibble's low bit.
        let mut b = LongCode::ZERO;
        b.set_bit(255, true);
        assert_eq!(b.format_hex(), format!("{}1", "0".repeat(63)));
        let mut s = ShortCode::ZERO;
        s.flip_bit(0);
        assert_eq!(s.format_hex(), "8000000000000000");
    }

    #[test]
    fn subcode16_covers_contiguous_positions() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let a = random_long(&mut rng);
            for j in 0..16 {
                let sub = a.subcode16(j);
                for bit in 0..16u32 {
                    let expected = a.bit(16 * j as u32 + bit);
                    assert_eq!(sub >> (15 - bit) & 1 == 1, expected);
                }
            }
        }
    }

    #[test]
    fn short_code_u64_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..1000 {
            let v: u64 = rng.random();
            assert_eq!(ShortCode::from_u64(v).as_u64(), v);
        }
        let s = ShortCode::new([0xaaaa, 0xbbbb, 0xcccc, 0xdddd]);
        assert_eq!(s.as_u64(), 0xaaaa_bbbb_cccc_dddd);
    }

    #[test]
    fn hex_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..200 {
            let a = random_long(&mut rng);
            assert_eq!(LongCode::parse_hex(&a.format_hex()).unwrap(), a);
            let s = ShortCode::from_u64(rng.random());
            assert_eq!(ShortCode::parse_hex(&s.format_hex()).unwrap(), s);
        }
    }

    #[test]
    fn parse_hex_accepts_uppercase() {
        let lower = "00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff00ff";
        let upper = lower.to_uppercase();
        assert_eq!(
            LongCode::parse_hex(&upper).unwrap(),
            LongCode::parse_hex(lower).unwrap()
        );
    }

    #[test]
    fn parse_hex_reports_length() {
        let err = LongCode::parse_hex("abcd").unwrap_err();
        match err {
            Error::BadHexLength { expected: 64, got: 4 } => {}
            other => panic!("unexpected error: {other:?}"),
        }
        let err = ShortCode::parse_hex(&"0".repeat(64)).unwrap_err();
        match err {
            Error::BadHexLength { expected: 16, got: 64 } => {}
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn parse_hex_names_offending_position() {
        let mut text = "0".repeat(64);
        text.replace_range(17..18, "g");
        let err = LongCode::parse_hex(&text).unwrap_err();
        match err {
            Error::BadHexChar { found: 'g', position: 17 } => {}
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn parse_code_hex_dispatches_on_length() {
        let long = "0".repeat(64);
        let short = "0".repeat(16);
        assert!(matches!(parse_code_hex(&long).unwrap(), ParsedCode::Long(_)));
        assert!(matches!(parse_code_hex(&short).unwrap(), ParsedCode::Short(_)));
        assert!(matches!(
            parse_code_hex("0123").unwrap_err(),
            Error::BadCodeLength { got: 4 }
        ));
    }

    #[test]
    fn ball_sizes_match_binomial_sums() {
        // sum_{i<=d} C(16, i) for d = 0..=3.
        assert_eq!(hamming_ball_size(0).unwrap(), 1);
        assert_eq!(hamming_ball_size(1).unwrap(), 17);
        assert_eq!(hamming_ball_size(2).unwrap(), 137);
        assert_eq!(hamming_ball_size(3).unwrap(), 697);
        assert_eq!(hamming_ball_size(16).unwrap(), 65_536);
        assert!(matches!(
            hamming_ball_size(17).unwrap_err(),
            Error::RadiusOutOfRange(17)
        ));
    }

    #[test]
    fn neighbors_are_exactly_the_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        for d in 0..=3u32 {
            for _ in 0..25 {
                let c: u16 = rng.random();
                let got = enumerate_neighbors(c, d).unwrap();
                assert_eq!(got.len(), hamming_ball_size(d).unwrap());
                assert!(got.windows(2).all(|w| w[0] < w[1]), "sorted and duplicate-free");
                assert!(got.binary_search(&c).is_ok(), "ball contains its center");
                // Brute-force oracle over the whole 16-bit space.
                let expected: Vec<u16> =
                    (0..=u16::MAX).filter(|&v| hamming16(v, c) <= d).collect();
                assert_eq!(got, expected);
            }
        }
    }

    #[test]
    fn neighbors_reject_out_of_range_radius() {
        assert!(matches!(
            enumerate_neighbors(0, 17).unwrap_err(),
            Error::RadiusOutOfRange(17)
        ));
    }

    #[test]
    fn display_and_fromstr_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let a = random_long(&mut rng);
        let parsed: LongCode = a.to_string().parse().unwrap();
        assert_eq!(parsed, a);
    }
}
