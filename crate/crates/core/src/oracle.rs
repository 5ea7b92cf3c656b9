//! Exact quantum predictions for Pauli measurements on graph states.
//!
//! [`classify`] answers with stabilizer algebra; [`statevector_verdict`] is an
//! independent dense simulation kept deliberately free of stabilizer
//! shortcuts so the two can check each other.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::pauli::{generator_product, Measurement, Pauli, PhasedPauli, Sign};

pub const STATEVECTOR_NODE_LIMIT: usize = 14;
pub const ENUMERATION_NODE_LIMIT: usize = 20;
/// Distance from `{-1, 0, +1}` tolerated in a state-vector expectation.
pub const STATEVECTOR_TOLERANCE: f64 = 1e-9;

/// Outcome law of a ±1-valued measurement: certain, or a fair coin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum Verdict {
    Deterministic(Sign),
    Uniform,
}

impl Verdict {
    pub fn sign(self) -> Option<Sign> {
        match self {
            Verdict::Deterministic(s) => Some(s),
            Verdict::Uniform => None,
        }
    }

    pub fn is_deterministic(self) -> bool {
        matches!(self, Verdict::Deterministic(_))
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Deterministic(s) => write!(f, "Deterministic({s})"),
            Verdict::Uniform => f.write_str("Uniform"),
        }
    }
}

/// The only candidate stabilizer element with the letters of `m`.
///
/// `G_j` is the one generator with an `X` component at site `j`, so the
/// exponent `a_j` is forced to be 1 exactly where `m` has `X` or `Y`.
pub fn candidate_element(g: &Graph, m: &Measurement) -> PhasedPauli {
    let a: Vec<bool> = m.letters().iter().map(|p| p.has_x()).collect();
    generator_product(g, &a)
}

/// Quantum prediction for measuring `m` on the graph state of `g`.
pub fn classify(g: &Graph, m: &Measurement) -> Verdict {
    assert_eq!(m.len(), g.n(), "measurement length must equal n");
    let s = candidate_element(g, m);
    if s.letters() == m.letters() {
        Verdict::Deterministic(s.sign().expect("generator products are real"))
    } else {
        Verdict::Uniform
    }
}

/// Dense amplitudes of the graph state: `|+>^n` followed by a controlled
/// phase on every edge. Basis index bit `j` is site `j`.
pub fn graph_state_vector(g: &Graph) -> Result<Vec<Complex64>> {
    let n = g.n();
    if n > STATEVECTOR_NODE_LIMIT {
        return Err(Error::too_big(
            "state-vector node count",
            n,
            STATEVECTOR_NODE_LIMIT,
        ));
    }
    let dim = 1usize << n;
    let amp = Complex64::new(1.0 / (dim as f64).sqrt(), 0.0);
    let mut psi = vec![amp; dim];
    for (u, v) in g.edges() {
        let mask = (1usize << u) | (1usize << v);
        for (b, a) in psi.iter_mut().enumerate() {
            if b & mask == mask {
                *a = -*a;
            }
        }
    }
    Ok(psi)
}

/// `<psi| M |psi>` for an arbitrary state on `m.len()` qubits.
pub fn expectation(psi: &[Complex64], m: &Measurement) -> Complex64 {
    let i = Complex64::new(0.0, 1.0);
    let mut flip = 0usize;
    for (j, p) in m.letters().iter().enumerate() {
        if p.has_x() {
            flip |= 1 << j;
        }
    }
    let mut total = Complex64::new(0.0, 0.0);
    for (b, &amp) in psi.iter().enumerate() {
        // M|b> = phase * |b ^ flip>, built one tensor factor at a time.
        let mut phase = Complex64::new(1.0, 0.0);
        for (j, p) in m.letters().iter().enumerate() {
            let bit = (b >> j) & 1 == 1;
            match p {
                Pauli::I | Pauli::X => {}
                Pauli::Z => {
                    if bit {
                        phase = -phase;
                    }
                }
                // Y|0> = i|1>, Y|1> = -i|0>
                Pauli::Y => phase *= if bit { -i } else { i },
            }
        }
        total += psi[b ^ flip].conj() * phase * amp;
    }
    total
}

/// Classifies `m` by simulating the state vector.
pub fn statevector_verdict(g: &Graph, m: &Measurement) -> Result<Verdict> {
    if m.len() != g.n() {
        return Err(Error::invalid("measurement length must equal n"));
    }
    let psi = graph_state_vector(g)?;
    let e = expectation(&psi, m);
    if e.im.abs() > STATEVECTOR_TOLERANCE {
        return Err(Error::Internal(format!("non-real expectation {e} for {m}")));
    }
    let near = |target: f64| (e.re - target).abs() <= STATEVECTOR_TOLERANCE;
    if near(1.0) {
        Ok(Verdict::Deterministic(Sign::Plus))
    } else if near(-1.0) {
        Ok(Verdict::Deterministic(Sign::Minus))
    } else if near(0.0) {
        Ok(Verdict::Uniform)
    } else {
        Err(Error::Internal(format!(
            "expectation {} of {m} is not in {{-1, 0, 1}}",
            e.re
        )))
    }
}

/// Letters and sign of `generator_product(g, a)` where `a` is read from the
/// bits of `index` (site 0 in the lowest bit).
pub fn stabilizer_entry(g: &Graph, index: u64) -> (Measurement, Sign) {
    let a: Vec<bool> = (0..g.n()).map(|j| (index >> j) & 1 == 1).collect();
    let s = generator_product(g, &a);
    (
        s.to_measurement(),
        s.sign().expect("generator products are real"),
    )
}

/// All `2^n` signed stabilizer elements, in order of their exponent vectors.
///
/// The iterator is restartable by index; parallel consumers can call
/// [`stabilizer_entry`] over disjoint index ranges instead.
pub fn enumerate_stabilizer_measurements(
    g: &Graph,
) -> Result<impl Iterator<Item = (Measurement, Sign)> + '_> {
    if g.n() > ENUMERATION_NODE_LIMIT {
        return Err(Error::too_big(
            "stabilizer enumeration node count",
            g.n(),
            ENUMERATION_NODE_LIMIT,
        ));
    }
    Ok((0..1u64 << g.n()).map(move |a| stabilizer_entry(g, a)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli::generator_product_of;
    use std::collections::BTreeSet;

    fn m(s: &str) -> Measurement {
        s.parse().unwrap()
    }

    fn small_suite() -> Vec<Graph> {
        let mut gs = Vec::new();
        gs.extend((3..=5).map(|n| Graph::ring(n).unwrap()));
        gs.extend((2..=5).map(|n| Graph::chain(n).unwrap()));
        gs.extend((3..=5).map(|n| Graph::star(n).unwrap()));
        gs.push(Graph::grid(2, 2).unwrap());
        gs
    }

    #[test]
    fn ring_examples() {
        let ring = Graph::ring(12).unwrap();
        assert_eq!(
            classify(&ring, &m("IXIXIXIXIXIX")),
            Verdict::Deterministic(Sign::Plus)
        );
        // X at the midpoints 2, 6, 10 and Y at every odd site.
        assert_eq!(
            classify(&ring, &m("YXYIYXYIYXYI")),
            Verdict::Deterministic(Sign::Minus)
        );
    }

    #[test]
    fn single_sites_are_uniform_on_connected_graphs() {
        for g in small_suite() {
            for j in 0..g.n() {
                for p in [Pauli::X, Pauli::Y, Pauli::Z] {
                    let mut letters = vec![Pauli::I; g.n()];
                    letters[j] = p;
                    assert_eq!(classify(&g, &Measurement::new(letters)), Verdict::Uniform);
                }
            }
        }
    }

    #[test]
    fn grid_2x3_submeasurement_is_negative() {
        let g = Graph::grid(2, 3).unwrap();
        assert_eq!(
            classify(&g, &m("YYYIYI")),
            Verdict::Deterministic(Sign::Minus)
        );
        assert_eq!(
            statevector_verdict(&g, &m("YYYIYI")).unwrap(),
            Verdict::Deterministic(Sign::Minus)
        );
        assert_eq!(classify(&g, &m("YYYYYY")), Verdict::Uniform);
    }

    #[test]
    fn statevector_examples() {
        let c2 = Graph::chain(2).unwrap();
        assert_eq!(
            statevector_verdict(&c2, &m("YY")).unwrap(),
            Verdict::Deterministic(Sign::Plus)
        );
        let c3 = Graph::chain(3).unwrap();
        assert_eq!(
            statevector_verdict(&c3, &m("YXY")).unwrap(),
            Verdict::Deterministic(Sign::Minus)
        );
        for g in small_suite() {
            assert_eq!(
                statevector_verdict(&g, &Measurement::identity(g.n())).unwrap(),
                Verdict::Deterministic(Sign::Plus)
            );
        }
        let big = Graph::chain(STATEVECTOR_NODE_LIMIT + 1).unwrap();
        assert!(matches!(
            statevector_verdict(&big, &Measurement::identity(big.n())),
            Err(Error::UnsupportedSize { .. })
        ));
    }

    #[test]
    fn oracles_agree_exhaustively() {
        for g in small_suite() {
            let mut deterministic = 0;
            for idx in 0..4u64.pow(g.n() as u32) {
                let meas = Measurement::from_index(g.n(), idx);
                let v = classify(&g, &meas);
                assert_eq!(v, statevector_verdict(&g, &meas).unwrap(), "{g:?} {meas}");
                deterministic += v.is_deterministic() as usize;
            }
            assert_eq!(deterministic, 1 << g.n(), "{g:?}");
        }
    }

    #[test]
    fn stabilizer_enumeration() {
        let c2 = Graph::chain(2).unwrap();
        let entries: Vec<(String, i8)> = enumerate_stabilizer_measurements(&c2)
            .unwrap()
            .map(|(m, s)| (m.to_string(), s.value()))
            .collect();
        assert_eq!(
            entries,
            [("II", 1), ("XZ", 1), ("ZX", 1), ("YY", 1)].map(|(s, v)| (s.to_string(), v))
        );
        let c10 = Graph::chain(10).unwrap();
        let a = [1, 2, 3, 5, 6, 9]
            .iter()
            .fold(0u64, |acc, j| acc | 1 << (j - 1));
        assert_eq!(stabilizer_entry(&c10, a).1, Sign::Minus);
        for g in small_suite() {
            let all: Vec<_> = enumerate_stabilizer_measurements(&g).unwrap().collect();
            assert_eq!(all[0], (Measurement::identity(g.n()), Sign::Plus));
            let distinct: BTreeSet<_> = all.iter().map(|(m, _)| m.clone()).collect();
            assert_eq!(distinct.len(), 1 << g.n());
        }
        assert!(enumerate_stabilizer_measurements(&Graph::chain(21).unwrap()).is_err());
    }

    #[test]
    fn letters_determine_exponents() {
        for g in small_suite() {
            for idx in 0..1u64 << g.n() {
                let (meas, _) = stabilizer_entry(&g, idx);
                let back = meas
                    .letters()
                    .iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, p)| acc | (p.has_x() as u64) << j);
                assert_eq!(back, idx);
            }
        }
    }

    /// If `M` is a product of generators below `j`, multiplying by `G_j`
    /// introduces `(-1)^r` when `q + r = 0,1 mod 4` and `(-1)^{r+1}` otherwise,
    /// where `q`/`r` count the `X`/`Y` neighbours of `j`.
    #[test]
    fn induction_step_sign_relation() {
        let graphs = [
            Graph::grid(2, 3).unwrap(),
            Graph::ring(7).unwrap(),
            Graph::star(6).unwrap(),
            Graph::complete_bipartite(3, 3).unwrap(),
            Graph::new(
                6,
                [
                    (0, 1),
                    (0, 2),
                    (0, 3),
                    (1, 2),
                    (2, 5),
                    (3, 4),
                    (4, 5),
                    (1, 5),
                ],
            )
            .unwrap(),
        ];
        for g in &graphs {
            for j in 0..g.n() {
                for below in 0..1u64 << j {
                    let s = generator_product_of(g, (0..j).filter(|k| below >> k & 1 == 1));
                    let meas = s.to_measurement();
                    assert!(matches!(meas.get(j), Pauli::I | Pauli::Z));
                    let q = g
                        .neighbors(j)
                        .iter()
                        .filter(|&&k| meas.get(k) == Pauli::X)
                        .count();
                    let r = g
                        .neighbors(j)
                        .iter()
                        .filter(|&&k| meas.get(k) == Pauli::Y)
                        .count();
                    let flips = if (q + r) % 4 <= 1 { r } else { r + 1 };
                    let mut prod = meas.to_phased();
                    prod.mul_generator(g, j);
                    assert_eq!(prod.phase() as usize, 2 * (flips % 2), "{g:?} j={j} {meas}");
                    let next = prod.to_measurement();
                    let expected = s.sign().unwrap() * Sign::from_minus(flips % 2 == 1);
                    assert_eq!(classify(g, &next), Verdict::Deterministic(expected));
                }
            }
        }
    }
}
