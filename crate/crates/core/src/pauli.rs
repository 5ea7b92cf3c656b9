//! Phase-tracked Pauli words and graph-state generators.
//!
//! A [`PhasedPauli`] is `i^phase` times a tensor word over `{I, X, Y, Z}`;
//! a [`Measurement`] is a bare word with no phase, i.e. what the parties are
//! asked to measure. Words are written with site 1 leftmost.

use std::fmt;
use std::ops::Mul;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Pauli::I),
            'X' => Some(Pauli::X),
            'Y' => Some(Pauli::Y),
            'Z' => Some(Pauli::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Pauli::I => 'I',
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        }
    }

    /// True for `X` and `Y`, the letters carrying an `X` component.
    pub fn has_x(self) -> bool {
        matches!(self, Pauli::X | Pauli::Y)
    }

    /// True for `Z` and `Y`.
    pub fn has_z(self) -> bool {
        matches!(self, Pauli::Z | Pauli::Y)
    }

    pub fn from_xz(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }

    /// Single-site product: `self * other = i^k * letter`, returned as
    /// `(letter, k)`.
    pub fn product(self, other: Pauli) -> (Pauli, u8) {
        use Pauli::*;
        match (self, other) {
            (I, p) | (p, I) => (p, 0),
            (a, b) if a == b => (I, 0),
            (X, Y) => (Z, 1),
            (Y, Z) => (X, 1),
            (Z, X) => (Y, 1),
            (Y, X) => (Z, 3),
            (Z, Y) => (X, 3),
            (X, Z) => (Y, 3),
            _ => unreachable!(),
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A real sign, the outcome of a deterministic ±1 measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn from_minus(minus: bool) -> Self {
        if minus {
            Sign::Minus
        } else {
            Sign::Plus
        }
    }

    pub fn from_value(v: i8) -> Option<Self> {
        match v {
            1 => Some(Sign::Plus),
            -1 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn is_minus(self) -> bool {
        self == Sign::Minus
    }

    pub fn value(self) -> i8 {
        match self {
            Sign::Plus => 1,
            Sign::Minus => -1,
        }
    }
}

impl Mul for Sign {
    type Output = Sign;
    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_minus(self.is_minus() != rhs.is_minus())
    }
}

impl fmt::Display for Sign {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sign::Plus => "+1",
            Sign::Minus => "-1",
        })
    }
}

impl Serialize for Sign {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_i8(self.value())
    }
}

impl<'de> Deserialize<'de> for Sign {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let v = i8::deserialize(d)?;
        Sign::from_value(v).ok_or_else(|| serde::de::Error::custom("sign must be 1 or -1"))
    }
}

fn parse_letters(s: &str) -> Result<Vec<Pauli>> {
    s.chars()
        .enumerate()
        .map(|(i, c)| {
            Pauli::from_char(c).ok_or_else(|| {
                Error::invalid(format!(
                    "invalid Pauli letter {c:?} at position {}; expected one of I, X, Y, Z",
                    i + 1
                ))
            })
        })
        .collect()
}

fn write_letters(f: &mut fmt::Formatter<'_>, letters: &[Pauli]) -> fmt::Result {
    for p in letters {
        write!(f, "{}", p.as_char())?;
    }
    Ok(())
}

/// A measurement setting: one Pauli letter per site, no phase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Measurement {
    letters: Vec<Pauli>,
}

impl Measurement {
    pub fn new(letters: Vec<Pauli>) -> Self {
        Measurement { letters }
    }

    pub fn identity(n: usize) -> Self {
        Measurement::new(vec![Pauli::I; n])
    }

    /// Parses a letter string and checks it covers exactly `n` sites.
    pub fn parse_for(s: &str, n: usize) -> Result<Self> {
        let m: Measurement = s.parse()?;
        if m.len() != n {
            return Err(Error::invalid(format!(
                "measurement {s:?} has {} letters but the graph has {n} nodes",
                m.len()
            )));
        }
        Ok(m)
    }

    /// Decodes measurement number `index` of the `4^n` settings, site 0 in
    /// the lowest base-4 digit.
    pub fn from_index(n: usize, mut index: u64) -> Self {
        let letters = (0..n)
            .map(|_| {
                let p = Pauli::ALL[(index % 4) as usize];
                index /= 4;
                p
            })
            .collect();
        Measurement::new(letters)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn get(&self, j: usize) -> Pauli {
        self.letters[j]
    }

    /// Sites with a non-identity letter, ascending.
    pub fn support(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&j| self.letters[j] != Pauli::I)
            .collect()
    }

    /// Keeps the letters on `sites` and replaces every other letter by `I`.
    pub fn restrict(&self, sites: impl IntoIterator<Item = usize>) -> Self {
        let mut out = Measurement::identity(self.len());
        for j in sites {
            out.letters[j] = self.letters[j];
        }
        out
    }

    /// True iff every non-identity letter of `self` matches `global`.
    pub fn is_submeasurement_of(&self, global: &Measurement) -> Result<bool> {
        if self.len() != global.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len(),
                global.len()
            )));
        }
        Ok(self
            .letters
            .iter()
            .zip(&global.letters)
            .all(|(&s, &g)| s == Pauli::I || s == g))
    }

    pub fn to_phased(&self) -> PhasedPauli {
        PhasedPauli::new(self.letters.clone(), 0)
    }
}

impl FromStr for Measurement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(Measurement::new(parse_letters(s)?))
    }
}

impl fmt::Display for Measurement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_letters(f, &self.letters)
    }
}

impl Serialize for Measurement {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Measurement {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// `i^phase` times a Pauli word.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhasedPauli {
    letters: Vec<Pauli>,
    phase: u8,
}

impl PhasedPauli {
    pub fn new(letters: Vec<Pauli>, phase: u8) -> Self {
        PhasedPauli {
            letters,
            phase: phase % 4,
        }
    }

    pub fn identity(n: usize) -> Self {
        PhasedPauli::new(vec![Pauli::I; n], 0)
    }

    pub fn letters(&self) -> &[Pauli] {
        &self.letters
    }

    /// Exponent `p` of the overall factor `i^p`.
    pub fn phase(&self) -> u8 {
        self.phase
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// The real sign, or `None` when the phase is `±i`.
    pub fn sign(&self) -> Option<Sign> {
        match self.phase {
            0 => Some(Sign::Plus),
            2 => Some(Sign::Minus),
            _ => None,
        }
    }

    pub fn is_identity(&self) -> bool {
        self.letters.iter().all(|&p| p == Pauli::I)
    }

    pub fn to_measurement(&self) -> Measurement {
        Measurement::new(self.letters.clone())
    }

    /// Sitewise product `self * other` with accumulated phase.
    pub fn multiply(&self, other: &PhasedPauli) -> Result<PhasedPauli> {
        if self.len() != other.len() {
            return Err(Error::invalid(format!(
                "length mismatch: {} vs {}",
                self.len(),
                other.len()
            )));
        }
        let mut out = self.clone();
        out.phase = (out.phase + other.phase) % 4;
        for (j, &p) in other.letters.iter().enumerate() {
            out.mul_site(j, p);
        }
        Ok(out)
    }

    /// Right-multiplies site `j` by `p`.
    fn mul_site(&mut self, j: usize, p: Pauli) {
        let (letter, k) = self.letters[j].product(p);
        self.letters[j] = letter;
        self.phase = (self.phase + k) % 4;
    }

    /// Right-multiplies by the generator `G_j` in place, touching only `j` and
    /// its neighbourhood.
    pub fn mul_generator(&mut self, g: &Graph, j: usize) {
        self.mul_site(j, Pauli::X);
        for &k in g.neighbors(j) {
            self.mul_site(k, Pauli::Z);
        }
    }
}

impl FromStr for PhasedPauli {
    type Err = Error;
    /// Accepts an optional prefix `+`, `+i`, `-`, `-i` (also `i` and the
    /// Unicode minus `−`) followed by letters.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (sign_part, rest) = s.split_at(
            s.find(|c: char| Pauli::from_char(c).is_some())
                .unwrap_or(s.len()),
        );
        let phase = match sign_part {
            "" | "+" => 0,
            "+i" | "i" => 1,
            "-" | "−" => 2,
            "-i" | "−i" => 3,
            other => return Err(Error::invalid(format!("invalid phase prefix {other:?}"))),
        };
        Ok(PhasedPauli::new(parse_letters(rest)?, phase))
    }
}

impl fmt::Display for PhasedPauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(["+", "+i", "-", "-i"][self.phase as usize])?;
        write_letters(f, &self.letters)
    }
}

impl Serialize for PhasedPauli {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

/// The stabilizer generator `G_j = X_j * prod_{k in N(j)} Z_k`.
pub fn generator(g: &Graph, j: usize) -> PhasedPauli {
    let mut out = PhasedPauli::identity(g.n());
    out.mul_generator(g, j);
    out
}

/// The ordered product `G_1^{a_1} ... G_n^{a_n}`.
///
/// # Panics
/// If the result is not real. Generators commute and are Hermitian, so every
/// product carries a sign; anything else is a bug in the phase bookkeeping.
pub fn generator_product(g: &Graph, a: &[bool]) -> PhasedPauli {
    assert_eq!(a.len(), g.n(), "exponent vector length must equal n");
    let mut out = PhasedPauli::identity(g.n());
    for (j, _) in a.iter().enumerate().filter(|(_, &aj)| aj) {
        out.mul_generator(g, j);
    }
    assert!(
        out.sign().is_some(),
        "generator product has imaginary phase: {out}"
    );
    out
}

/// [`generator_product`] over the sites in `set`.
pub fn generator_product_of(g: &Graph, set: impl IntoIterator<Item = usize>) -> PhasedPauli {
    let mut a = vec![false; g.n()];
    for j in set {
        a[j] = true;
    }
    generator_product(g, &a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pp(s: &str) -> PhasedPauli {
        s.parse().unwrap()
    }

    /// Single-site products from the 2x2 matrices.
    #[test]
    fn single_site_table_matches_matrices() {
        use num_complex::Complex64 as C;
        let z = C::new(0.0, 0.0);
        let o = C::new(1.0, 0.0);
        let i = C::new(0.0, 1.0);
        let mat = |p: Pauli| -> [[C; 2]; 2] {
            match p {
                Pauli::I => [[o, z], [z, o]],
                Pauli::X => [[z, o], [o, z]],
                Pauli::Y => [[z, -i], [i, z]],
                Pauli::Z => [[o, z], [z, -o]],
            }
        };
        let mul = |a: [[C; 2]; 2], b: [[C; 2]; 2]| {
            let mut c = [[z; 2]; 2];
            for r in 0..2 {
                for col in 0..2 {
                    c[r][col] = a[r][0] * b[0][col] + a[r][1] * b[1][col];
                }
            }
            c
        };
        for a in Pauli::ALL {
            for b in Pauli::ALL {
                let (p, k) = a.product(b);
                let scale = i.powu(k as u32);
                let lhs = mul(mat(a), mat(b));
                let rhs = mat(p);
                for r in 0..2 {
                    for col in 0..2 {
                        assert!((lhs[r][col] - scale * rhs[r][col]).norm() < 1e-12, "{a}{b}");
                    }
                }
            }
        }
    }

    #[test]
    fn products_with_phases() {
        let xz = pp("X").multiply(&pp("Z")).unwrap();
        assert_eq!((xz.letters(), xz.phase()), (&[Pauli::Y][..], 3));
        let yz = pp("Y").multiply(&pp("Z")).unwrap();
        assert_eq!((yz.letters(), yz.phase()), (&[Pauli::X][..], 1));
        assert!(pp("X").multiply(&pp("XZ")).is_err());
    }

    #[test]
    fn rendering_and_parsing() {
        for s in ["+XYZ", "+iI", "-ZZ", "-iXY"] {
            assert_eq!(pp(s).to_string(), s);
        }
        assert_eq!(pp("−iXY"), pp("-iXY"));
        assert_eq!(pp("XY"), pp("+XY"));
        assert!("XQ".parse::<Measurement>().is_err());
        assert!(Measurement::parse_for("XYZ", 4).is_err());
        assert_eq!(Measurement::from_index(3, 0b10_01_11).to_string(), "ZXY");
    }

    #[test]
    fn generators() {
        let chain = Graph::chain(10).unwrap();
        assert_eq!(generator(&chain, 1).to_string(), "+ZXZIIIIIII");
        let star = Graph::star(4).unwrap();
        assert_eq!(generator(&star, 0).to_string(), "+XZZZ");
        let ring = Graph::ring(12).unwrap();
        assert_eq!(generator(&ring, 0).to_string(), "+XZIIIIIIIIIZ");
    }

    #[test]
    fn generator_products() {
        let chain = Graph::chain(10).unwrap();
        let p = generator_product_of(&chain, [1, 2, 3, 5, 6, 9].map(|j| j - 1));
        assert_eq!(p.to_string(), "-YXYIYYZZXZ");
        assert!(generator_product(&chain, &[false; 10]).is_identity());
        let ring = Graph::ring(12).unwrap();
        let even = generator_product_of(&ring, (1..12).step_by(2));
        assert_eq!(even.to_string(), "+IXIXIXIXIXIX");
    }

    #[test]
    fn submeasurements() {
        let glob: Measurement = "YYYYYY".parse().unwrap();
        let sub: Measurement = "YYYIYI".parse().unwrap();
        assert!(sub.is_submeasurement_of(&glob).unwrap());
        let x: Measurement = "X".parse().unwrap();
        assert!(!x.is_submeasurement_of(&"Y".parse().unwrap()).unwrap());
        assert!(Measurement::identity(6)
            .is_submeasurement_of(&glob)
            .unwrap());
        assert!(x.is_submeasurement_of(&glob).is_err());
    }

    fn word(n: usize) -> impl Strategy<Value = PhasedPauli> {
        (proptest::collection::vec(0usize..4, n), 0u8..4).prop_map(|(ls, ph)| {
            PhasedPauli::new(ls.into_iter().map(|i| Pauli::ALL[i]).collect(), ph)
        })
    }

    fn small_graph() -> impl Strategy<Value = (Graph, Vec<bool>, Vec<bool>)> {
        (2usize..9).prop_flat_map(|n| {
            let pairs: Vec<(usize, usize)> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .collect();
            let m = pairs.len();
            (
                proptest::collection::vec(any::<bool>(), m),
                proptest::collection::vec(any::<bool>(), n),
                proptest::collection::vec(any::<bool>(), n),
            )
                .prop_map(move |(keep, a, b)| {
                    let edges = pairs.iter().zip(keep).filter(|(_, k)| *k).map(|(e, _)| *e);
                    (Graph::new(n, edges).unwrap(), a, b)
                })
        })
    }

    proptest! {
        #[test]
        fn multiplication_is_associative((p, q, r) in (1usize..8).prop_flat_map(|n| (word(n), word(n), word(n)))) {
            let left = p.multiply(&q).unwrap().multiply(&r).unwrap();
            let right = p.multiply(&q.multiply(&r).unwrap()).unwrap();
            prop_assert_eq!(left, right);
        }

        #[test]
        fn words_square_to_identity(p in (1usize..10).prop_flat_map(word)) {
            let bare = PhasedPauli::new(p.letters().to_vec(), 0);
            let sq = bare.multiply(&bare).unwrap();
            prop_assert!(sq.is_identity());
            prop_assert_eq!(sq.phase(), 0);
            let sq = p.multiply(&p).unwrap();
            prop_assert!(sq.phase() == 0 || sq.phase() == 2);
        }

        #[test]
        fn generator_products_commute_and_compose((g, a, b) in small_graph()) {
            let pa = generator_product(&g, &a);
            let pb = generator_product(&g, &b);
            prop_assert_eq!(pa.multiply(&pb).unwrap(), pb.multiply(&pa).unwrap());
            let xor: Vec<bool> = a.iter().zip(&b).map(|(x, y)| x != y).collect();
            let pab = generator_product(&g, &xor);
            let prod = pa.multiply(&pb).unwrap();
            prop_assert_eq!(prod.letters(), pab.letters());
            prop_assert!(prod.sign().is_some());
        }

        #[test]
        fn product_order_does_not_change_phase((g, a, _b) in small_graph()) {
            let mut rev = PhasedPauli::identity(g.n());
            for j in (0..g.n()).rev().filter(|&j| a[j]) {
                rev.mul_generator(&g, j);
            }
            prop_assert_eq!(rev, generator_product(&g, &a));
        }
    }
}
