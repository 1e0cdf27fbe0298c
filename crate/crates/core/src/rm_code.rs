//! Binary Reed-Muller codes RM(m, r) as evaluation codes.
//!
//! Evaluation points `z = (z_1, ..., z_m)` are stored by their integer index
//! `sum z_i 2^(m-i)`, so `z_1` is the most significant bit and index order is
//! lexicographic order on points. Variable `x_i` therefore reads bit `m - i`
//! of the point index.
//!
//! Messages are coefficient vectors over the monomial basis ordered by degree,
//! then by the lexicographic order of the variable-index sets:
//! `1, x_1, ..., x_m, x_1x_2, x_1x_3, ..., x_{m-1}x_m, x_1x_2x_3, ...`.
//!
//! The *message counter* used by [`RmCode::enumerate_codewords`] (and by the
//! exhaustive ML oracle's tie-break) reads the message as an integer whose
//! most significant digit is the first monomial of the highest degree, going
//! down in degree and leaving the constant as the least significant digit.
//! For first-order codes this makes the counter equal to `2s + c`, with `s`
//! the linear part read as a point index and `c` the constant, which is the
//! same order the Hadamard decoder uses to break ties.

use std::fmt;

use itertools::Itertools;

use crate::bits::BitVec;
use crate::error::{Error, Result};

/// Largest supported number of variables.
pub const MAX_M: u32 = 24;

/// Largest dimension for which codewords are enumerated.
pub const MAX_ENUM_K: usize = 24;

/// A codeword: one bit per evaluation point, in point-index order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Codeword(BitVec);

/// Monomial coefficients in basis order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Message(BitVec);

macro_rules! bit_newtype {
    ($name:ident) => {
        impl $name {
            pub fn from_bits(bits: BitVec) -> Self {
                Self(bits)
            }

            pub fn bits(&self) -> &BitVec {
                &self.0
            }

            pub fn into_bits(self) -> BitVec {
                self.0
            }

            pub fn len(&self) -> usize {
                self.0.len()
            }

            pub fn is_empty(&self) -> bool {
                self.0.is_empty()
            }

            pub fn get(&self, i: usize) -> bool {
                self.0.get(i)
            }

            pub fn weight(&self) -> usize {
                self.0.weight()
            }

            pub fn xor(&self, other: &Self) -> Self {
                Self(self.0.xor(&other.0))
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}({})", stringify!($name), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                fmt::Display::fmt(&self.0, f)
            }
        }
    };
}

bit_newtype!(Codeword);
bit_newtype!(Message);

impl Codeword {
    pub fn zeros(n: usize) -> Self {
        Self(BitVec::zeros(n))
    }
}

/// Parameters of RM(m, r) plus its monomial basis.
#[derive(Clone, PartialEq, Eq)]
pub struct RmCode {
    m: u32,
    r: u32,
    n: usize,
    k: usize,
    /// Basis monomials as masks over point-index bits.
    monomials: Vec<usize>,
}

impl fmt::Debug for RmCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RM({}, {}) [n = {}, k = {}]", self.m, self.r, self.n, self.k)
    }
}

impl RmCode {
    pub fn new(m: u32, r: u32) -> Result<Self> {
        if m > MAX_M {
            return Err(Error::ParameterOutOfRange(format!(
                "m = {m} exceeds the supported maximum {MAX_M}"
            )));
        }
        if r > m {
            return Err(Error::ParameterOutOfRange(format!("order r = {r} exceeds m = {m}")));
        }
        let mut monomials = Vec::new();
        for degree in 0..=r {
            for vars in (1..=m).combinations(degree as usize) {
                monomials.push(vars.iter().fold(0usize, |mask, &i| mask | 1 << (m - i)));
            }
        }
        let k = monomials.len();
        Ok(Self {
            m,
            r,
            n: 1usize << m,
            k,
            monomials,
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn r(&self) -> u32 {
        self.r
    }

    /// Blocklength `2^m`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Dimension `sum_{i <= r} C(m, i)`.
    pub fn k(&self) -> usize {
        self.k
    }

    /// Basis monomials as point-index masks, in message order.
    pub fn monomials(&self) -> &[usize] {
        &self.monomials
    }

    /// Evaluates the polynomial whose coefficients are `msg` at every point.
    pub fn encode(&self, msg: &Message) -> Result<Codeword> {
        if msg.len() != self.k {
            return Err(Error::LengthMismatch {
                expected: self.k,
                found: msg.len(),
            });
        }
        let mut anf = BitVec::zeros(self.n);
        for (j, &mask) in self.monomials.iter().enumerate() {
            if msg.get(j) {
                anf.set(mask, true);
            }
        }
        moebius_in_place(&mut anf, self.m);
        Ok(Codeword(anf))
    }

    /// Recovers the message of a codeword, or `None` if the word is not in the code.
    pub fn message_of(&self, word: &Codeword) -> Result<Option<Message>> {
        if word.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                found: word.len(),
            });
        }
        let mut anf = word.0.clone();
        moebius_in_place(&mut anf, self.m);
        let mut msg = BitVec::zeros(self.k);
        let mut used = 0;
        for (j, &mask) in self.monomials.iter().enumerate() {
            if anf.get(mask) {
                msg.set(j, true);
                used += 1;
            }
        }
        Ok((used == anf.weight()).then_some(Message(msg)))
    }

    pub fn contains(&self, word: &Codeword) -> bool {
        matches!(self.message_of(word), Ok(Some(_)))
    }

    /// Position of the counter digit that holds basis monomial `j`
    /// (0 = least significant).
    fn counter_digit(&self) -> Vec<usize> {
        // significance order: degree descending, lexicographic ascending
        let mut order: Vec<usize> = (0..self.k).collect();
        order.sort_by_key(|&j| {
            let degree = self.monomials[j].count_ones();
            (std::cmp::Reverse(degree), j)
        });
        let mut digit = vec![0; self.k];
        for (rank, &j) in order.iter().enumerate() {
            digit[j] = self.k - 1 - rank;
        }
        digit
    }

    /// The message whose counter value is `counter`.
    pub fn message_from_counter(&self, counter: u64) -> Message {
        let digit = self.counter_digit();
        Message(BitVec::from_bools(
            (0..self.k).map(|j| digit[j] < 64 && (counter >> digit[j]) & 1 == 1),
        ))
    }

    /// The counter value of `msg` (requires `k <= 64`).
    pub fn counter_of(&self, msg: &Message) -> u64 {
        assert!(self.k <= 64, "message counter needs k <= 64");
        let digit = self.counter_digit();
        (0..self.k)
            .filter(|&j| msg.get(j))
            .fold(0u64, |acc, j| acc | 1 << digit[j])
    }

    /// All `2^k` codewords in message-counter order.
    pub fn enumerate_codewords(&self) -> Result<CodewordIter> {
        if self.k > MAX_ENUM_K {
            return Err(Error::TooLarge {
                k: self.k,
                limit: MAX_ENUM_K,
            });
        }
        let digit = self.counter_digit();
        let mut rows = vec![BitVec::zeros(self.n); self.k];
        for j in 0..self.k {
            let mut e = Message(BitVec::zeros(self.k));
            e.0.set(j, true);
            rows[digit[j]] = self.encode(&e)?.0;
        }
        Ok(CodewordIter {
            rows,
            current: BitVec::zeros(self.n),
            counter: 0,
            total: 1u64 << self.k,
        })
    }

    /// Minimum distance `2^(m - r)`.
    pub fn min_distance(&self) -> usize {
        1usize << (self.m - self.r)
    }

    /// Minimum nonzero weight found by enumerating every codeword.
    pub fn min_distance_exhaustive(&self) -> Result<usize> {
        Ok(self
            .enumerate_codewords()?
            .map(|c| c.weight())
            .filter(|&w| w > 0)
            .min()
            .unwrap_or(0))
    }
}

/// Streams codewords in message-counter order, one generator-row XOR per carry.
pub struct CodewordIter {
    rows: Vec<BitVec>,
    current: BitVec,
    counter: u64,
    total: u64,
}

impl Iterator for CodewordIter {
    type Item = Codeword;

    fn next(&mut self) -> Option<Codeword> {
        if self.counter >= self.total {
            return None;
        }
        let out = Codeword(self.current.clone());
        let next = self.counter + 1;
        let flipped = self.counter ^ next;
        if next < self.total {
            for (d, row) in self.rows.iter().enumerate() {
                if (flipped >> d) & 1 == 1 {
                    self.current.xor_assign(row);
                }
            }
        }
        self.counter = next;
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.total - self.counter) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for CodewordIter {}

/// Binary Moebius (zeta) transform over GF(2) on a packed vector of length `2^m`.
///
/// Maps algebraic-normal-form coefficients to evaluations and back (it is an
/// involution).
pub(crate) fn moebius_in_place(v: &mut BitVec, m: u32) {
    const LOW: [u64; 6] = [
        0x5555_5555_5555_5555,
        0x3333_3333_3333_3333,
        0x0f0f_0f0f_0f0f_0f0f,
        0x00ff_00ff_00ff_00ff,
        0x0000_ffff_0000_ffff,
        0x0000_0000_ffff_ffff,
    ];
    let words = v.words_mut();
    for j in 0..m.min(6) {
        for w in words.iter_mut() {
            *w ^= (*w & LOW[j as usize]) << (1u32 << j);
        }
    }
    for j in 6..m {
        let stride = 1usize << (j - 6);
        for i in 0..words.len() {
            if i & stride != 0 {
                words[i] ^= words[i ^ stride];
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn msg(bits: &str) -> Message {
        Message::from_bits(BitVec::parse_bit_string(bits).unwrap())
    }

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn parameters() {
        let c = RmCode::new(3, 1).unwrap();
        assert_eq!((c.n(), c.k()), (8, 4));
        let c = RmCode::new(0, 0).unwrap();
        assert_eq!((c.n(), c.k()), (1, 1));
        let c = RmCode::new(7, 2).unwrap();
        assert_eq!((c.n(), c.k()), (128, 29));
        for m in 0..=10u32 {
            for r in 0..=m {
                let k: u64 = (0..=r).map(|i| binomial(m as u64, i as u64)).sum();
                assert_eq!(RmCode::new(m, r).unwrap().k() as u64, k);
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(matches!(RmCode::new(3, 4), Err(Error::ParameterOutOfRange(_))));
        assert!(matches!(RmCode::new(25, 1), Err(Error::ParameterOutOfRange(_))));
    }

    #[test]
    fn basis_order() {
        let c = RmCode::new(3, 2).unwrap();
        // 1, x1, x2, x3, x1x2, x1x3, x2x3 with x1 = bit 2
        assert_eq!(c.monomials(), &[0, 4, 2, 1, 6, 5, 3]);
    }

    #[test]
    fn encode_examples() {
        let c = RmCode::new(2, 1).unwrap();
        assert_eq!(c.encode(&msg("000")).unwrap().to_string(), "0000");
        assert_eq!(c.encode(&msg("001")).unwrap().to_string(), "0101");
        assert_eq!(c.encode(&msg("010")).unwrap().to_string(), "0011");
        let c = RmCode::new(2, 2).unwrap();
        assert_eq!(c.encode(&msg("0001")).unwrap().to_string(), "0001");
        assert!(matches!(
            c.encode(&msg("001")),
            Err(Error::LengthMismatch { expected: 4, found: 3 })
        ));
    }

    #[test]
    fn encode_matches_direct_evaluation() {
        let c = RmCode::new(7, 3).unwrap();
        let m = msg(&(0..c.k()).map(|j| if (j * 7 + 3) % 5 < 2 { '1' } else { '0' }).collect::<String>());
        let word = c.encode(&m).unwrap();
        for z in 0..c.n() {
            let value = c
                .monomials()
                .iter()
                .enumerate()
                .filter(|&(j, &mask)| m.get(j) && z & mask == mask)
                .count()
                % 2
                == 1;
            assert_eq!(word.get(z), value, "point {z}");
        }
    }

    #[test]
    fn enumerate_small_codes() {
        let c = RmCode::new(1, 1).unwrap();
        let words: HashSet<String> = c.enumerate_codewords().unwrap().map(|w| w.to_string()).collect();
        assert_eq!(words, ["00", "11", "01", "10"].iter().map(|s| s.to_string()).collect());

        let c = RmCode::new(2, 0).unwrap();
        let words: Vec<String> = c.enumerate_codewords().unwrap().map(|w| w.to_string()).collect();
        assert_eq!(words, vec!["0000", "1111"]);

        let c = RmCode::new(3, 1).unwrap();
        let words: Vec<Codeword> = c.enumerate_codewords().unwrap().collect();
        assert_eq!(words.len(), 16);
        assert_eq!(words.iter().collect::<HashSet<_>>().len(), 16);
        assert!(words.iter().all(|w| [0, 4, 8].contains(&w.weight())));
    }

    #[test]
    fn enumeration_follows_counter() {
        let c = RmCode::new(4, 2).unwrap();
        for (counter, word) in c.enumerate_codewords().unwrap().enumerate() {
            let m = c.message_from_counter(counter as u64);
            assert_eq!(c.counter_of(&m), counter as u64);
            assert_eq!(c.encode(&m).unwrap(), word);
        }
    }

    #[test]
    fn first_order_counter_is_linear_part_then_constant() {
        let c = RmCode::new(3, 1).unwrap();
        for counter in 0..16u64 {
            let word = c.encode(&c.message_from_counter(counter)).unwrap();
            let constant = word.get(0) as u64;
            let s: u64 = (0..3).map(|b| ((word.get(1 << b) as u64) ^ constant) << b).sum();
            assert_eq!(counter, 2 * s + constant);
        }
    }

    #[test]
    fn enumerate_refuses_large_k() {
        let c = RmCode::new(10, 3).unwrap();
        assert!(matches!(c.enumerate_codewords(), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn min_distance_examples() {
        assert_eq!(RmCode::new(3, 1).unwrap().min_distance(), 4);
        assert_eq!(RmCode::new(3, 1).unwrap().min_distance_exhaustive().unwrap(), 4);
        assert_eq!(RmCode::new(4, 2).unwrap().min_distance_exhaustive().unwrap(), 4);
        for m in 0..=6 {
            let c = RmCode::new(m, 0).unwrap();
            assert_eq!(c.min_distance(), 1 << m);
            assert_eq!(c.min_distance_exhaustive().unwrap(), 1 << m);
        }
        for (m, r) in [(5, 1), (5, 2), (6, 2), (4, 3)] {
            let c = RmCode::new(m, r).unwrap();
            assert_eq!(c.min_distance_exhaustive().unwrap(), c.min_distance(), "RM({m},{r})");
        }
    }

    #[test]
    fn unit_messages_are_independent() {
        // rank of the generator rows over GF(2)
        let c = RmCode::new(6, 3).unwrap();
        let mut rows: Vec<BitVec> = (0..c.k())
            .map(|j| {
                let mut e = BitVec::zeros(c.k());
                e.set(j, true);
                c.encode(&Message::from_bits(e)).unwrap().into_bits()
            })
            .collect();
        let mut rank = 0;
        for col in 0..c.n() {
            if let Some(p) = (rank..rows.len()).find(|&i| rows[i].get(col)) {
                rows.swap(rank, p);
                let pivot = rows[rank].clone();
                for (i, row) in rows.iter_mut().enumerate() {
                    if i != rank && row.get(col) {
                        row.xor_assign(&pivot);
                    }
                }
                rank += 1;
            }
        }
        assert_eq!(rank, c.k());
    }

    #[test]
    fn nesting() {
        for m in 1..=4 {
            for r in 1..=m {
                let small = RmCode::new(m, r - 1).unwrap();
                let big = RmCode::new(m, r).unwrap();
                for w in small.enumerate_codewords().unwrap() {
                    assert!(big.contains(&w));
                }
            }
        }
        let c = RmCode::new(3, 1).unwrap();
        assert!(!c.contains(&Codeword::from_bits(BitVec::parse_bit_string("00000001").unwrap())));
    }

    proptest! {
        #[test]
        fn linearity(m in 1u32..9, seed_a in any::<u64>(), seed_b in any::<u64>()) {
            let r = m / 2;
            let c = RmCode::new(m, r).unwrap();
            let rand_msg = |seed: u64| Message::from_bits(BitVec::from_bools(
                (0..c.k()).map(|j| (seed.rotate_left(j as u32 * 7) ^ (j as u64 * 0x9e37)) & 1 == 1),
            ));
            let (u, w) = (rand_msg(seed_a), rand_msg(seed_b));
            let lhs = c.encode(&u.xor(&w)).unwrap();
            let rhs = c.encode(&u).unwrap().xor(&c.encode(&w).unwrap());
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn message_round_trip(m in 0u32..10, seed in any::<u64>()) {
            let c = RmCode::new(m, m.min(3)).unwrap();
            let u = Message::from_bits(BitVec::from_bools(
                (0..c.k()).map(|j| (seed >> (j % 64)) & 1 == 1),
            ));
            let word = c.encode(&u).unwrap();
            prop_assert_eq!(c.message_of(&word).unwrap(), Some(u));
        }
    }
}
