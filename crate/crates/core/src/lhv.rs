//! The communication-assisted local-hidden-variable model.
//!
//! Each site holds a fair ±1 value `z_j`; the `x`/`y` values are derived from
//! the neighbourhood. After one round in which every site tells its
//! neighbours whether it measures `X`/`Y`, each site outputs its hidden value
//! for the measured letter, possibly sign-flipped.
//!
//! Flip decisions depend only on the graph and the measurement, never on the
//! hidden values, and every hidden value is a monomial in the `z`s. The
//! product of any set of outputs is therefore `±(monomial in z)`: certain when
//! the monomial is empty and a fair coin otherwise. [`product_verdict`]
//! evaluates that factorization exactly instead of enumerating assignments.

use fixedbitset::FixedBitSet;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::oracle::Verdict;
use crate::pauli::{Measurement, Pauli, Sign};

/// Largest graph [`product_verdict`] evaluates in exact mode.
pub const EXACT_NODE_LIMIT: usize = 22;

/// One draw of the hidden `z` values.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct HiddenAssignment {
    z: Vec<i8>,
}

impl HiddenAssignment {
    pub fn new(z: Vec<i8>) -> Result<Self> {
        if z.iter().any(|&v| v != 1 && v != -1) {
            return Err(Error::invalid("hidden values must be +1 or -1"));
        }
        Ok(HiddenAssignment { z })
    }

    pub fn all_plus(n: usize) -> Self {
        HiddenAssignment { z: vec![1; n] }
    }

    /// Assignment number `index`: bit `j` set means `z_j = -1`.
    pub fn from_index(n: usize, index: u64) -> Self {
        HiddenAssignment {
            z: (0..n)
                .map(|j| if index >> j & 1 == 1 { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn random(n: usize, rng: &mut impl Rng) -> Self {
        HiddenAssignment {
            z: (0..n)
                .map(|_| if rng.random::<bool>() { -1 } else { 1 })
                .collect(),
        }
    }

    pub fn z(&self) -> &[i8] {
        &self.z
    }
}

/// `x_j = prod_{k in N(j)} z_k` and `y_j = z_j x_j`. Isolated sites get the
/// empty product `x_j = 1`.
pub fn derive_xy(g: &Graph, z: &HiddenAssignment) -> (Vec<i8>, Vec<i8>) {
    let x: Vec<i8> = (0..g.n())
        .map(|j| g.neighbors(j).iter().map(|&k| z.z[k]).product())
        .collect();
    let y = x.iter().zip(&z.z).map(|(a, b)| a * b).collect();
    (x, y)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CommunicationState {
    /// Bit broadcast by each site: 1 iff it measures `X` or `Y`.
    pub c: Vec<u8>,
    /// Number of `X`/`Y` neighbours, mod 4.
    pub t: Vec<u8>,
}

pub fn communication_round(g: &Graph, m: &Measurement) -> CommunicationState {
    let c: Vec<u8> = m.letters().iter().map(|p| p.has_x() as u8).collect();
    let t = (0..g.n())
        .map(|j| (g.neighbors(j).iter().map(|&k| c[k] as usize).sum::<usize>() % 4) as u8)
        .collect();
    CommunicationState { c, t }
}

/// Decides, per site, whether to negate the hidden value of the measured
/// letter. Implementations see the whole measurement; locality is up to them.
pub trait FlipRule: Sync {
    fn name(&self) -> String;

    fn flip_mask(&self, g: &Graph, m: &Measurement) -> Result<Vec<bool>>;
}

/// A nearest-neighbour rule that flips `X` (resp. `Y`) outputs according to a
/// table indexed by `t_j`. `Z` is never flipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NeighborCountRule {
    pub flip_x: [bool; 4],
    pub flip_y: [bool; 4],
}

impl NeighborCountRule {
    /// `X` flips for `t = 2, 3`; `Y` flips for `t = 0, 3`.
    pub const STANDARD: NeighborCountRule = NeighborCountRule {
        flip_x: [false, false, true, true],
        flip_y: [true, false, false, true],
    };

    /// `X` and `Y` both flip for `t = 2, 3`.
    ///
    /// In a stabilizer element an `X` site always has an even number of
    /// `X`/`Y` neighbours and a `Y` site an odd number, so global correctness
    /// only pins `flip_x[0] = false`, `flip_x[2] = true` and
    /// `flip_y[1] != flip_y[3]`. This table satisfies those with one shared
    /// condition for both letters.
    pub const UNIFORM: NeighborCountRule = NeighborCountRule {
        flip_x: [false, false, true, true],
        flip_y: [false, false, true, true],
    };

    pub fn flips(&self, letter: Pauli, t: u8) -> bool {
        match letter {
            Pauli::X => self.flip_x[t as usize % 4],
            Pauli::Y => self.flip_y[t as usize % 4],
            Pauli::I | Pauli::Z => false,
        }
    }
}

impl Default for NeighborCountRule {
    fn default() -> Self {
        NeighborCountRule::STANDARD
    }
}

impl FlipRule for NeighborCountRule {
    fn name(&self) -> String {
        let bits = |t: &[bool; 4]| {
            (0..4)
                .filter(|&i| t[i])
                .map(|i| i.to_string())
                .collect::<Vec<_>>()
                .join(",")
        };
        if *self == NeighborCountRule::STANDARD {
            "standard".into()
        } else if *self == NeighborCountRule::UNIFORM {
            "uniform".into()
        } else {
            format!(
                "neighbor-count(x:{{{}}},y:{{{}}})",
                bits(&self.flip_x),
                bits(&self.flip_y)
            )
        }
    }

    fn flip_mask(&self, g: &Graph, m: &Measurement) -> Result<Vec<bool>> {
        let comm = communication_round(g, m);
        Ok(m.letters()
            .iter()
            .zip(&comm.t)
            .map(|(&p, &t)| self.flips(p, t))
            .collect())
    }
}

/// Outputs the bare hidden value at every site.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoFlips;

impl FlipRule for NoFlips {
    fn name(&self) -> String {
        "no-communication".into()
    }

    fn flip_mask(&self, _g: &Graph, m: &Measurement) -> Result<Vec<bool>> {
        Ok(vec![false; m.len()])
    }
}

/// Output of one site under the standard rules:
/// `I -> 1`, `Z -> z`, `X -> ±x`, `Y -> ±y` with the sign from `t`.
pub fn local_output(letter: Pauli, x: i8, y: i8, z: i8, t: u8) -> i8 {
    let flip = NeighborCountRule::STANDARD.flips(letter, t);
    apply(letter, x, y, z, flip)
}

fn apply(letter: Pauli, x: i8, y: i8, z: i8, flip: bool) -> i8 {
    let hidden = match letter {
        Pauli::I => return 1,
        Pauli::X => x,
        Pauli::Y => y,
        Pauli::Z => z,
    };
    if flip {
        -hidden
    } else {
        hidden
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProtocolOutputs {
    pub v: Vec<i8>,
}

impl ProtocolOutputs {
    /// Product of the outputs on `sites`.
    pub fn product(&self, sites: impl IntoIterator<Item = usize>) -> i8 {
        sites.into_iter().map(|j| self.v[j]).product()
    }
}

/// Runs the standard protocol once.
pub fn run(g: &Graph, m: &Measurement, z: &HiddenAssignment) -> ProtocolOutputs {
    run_with(&NeighborCountRule::STANDARD, g, m, z).expect("the standard rule is total")
}

pub fn run_with(
    rule: &dyn FlipRule,
    g: &Graph,
    m: &Measurement,
    z: &HiddenAssignment,
) -> Result<ProtocolOutputs> {
    check_sizes(g, m)?;
    if z.z.len() != g.n() {
        return Err(Error::invalid("hidden assignment length must equal n"));
    }
    let flips = rule.flip_mask(g, m)?;
    Ok(outputs_with_flips(g, m, z, &flips))
}

/// Outputs for a precomputed flip mask.
pub fn outputs_with_flips(
    g: &Graph,
    m: &Measurement,
    z: &HiddenAssignment,
    flips: &[bool],
) -> ProtocolOutputs {
    let (x, y) = derive_xy(g, z);
    let v = (0..g.n())
        .map(|j| apply(m.get(j), x[j], y[j], z.z[j], flips[j]))
        .collect();
    ProtocolOutputs { v }
}

fn check_sizes(g: &Graph, m: &Measurement) -> Result<()> {
    if m.len() != g.n() {
        return Err(Error::invalid(format!(
            "measurement has {} letters but the graph has {} nodes",
            m.len(),
            g.n()
        )));
    }
    Ok(())
}

/// `(-1)^negative * prod_{k in vars} z_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignedMonomial {
    pub negative: bool,
    pub vars: FixedBitSet,
}

impl SignedMonomial {
    pub fn one(n: usize) -> Self {
        SignedMonomial {
            negative: false,
            vars: FixedBitSet::with_capacity(n),
        }
    }

    pub fn mul_assign(&mut self, other: &SignedMonomial) {
        self.negative ^= other.negative;
        self.vars.symmetric_difference_with(&other.vars);
    }

    pub fn verdict(&self) -> Verdict {
        if self.vars.is_clear() {
            Verdict::Deterministic(Sign::from_minus(self.negative))
        } else {
            Verdict::Uniform
        }
    }

    pub fn var_list(&self) -> Vec<usize> {
        self.vars.ones().collect()
    }
}

/// Every site's output as a signed monomial in the `z`s, for fixed flips.
#[derive(Debug, Clone)]
pub struct OutputMonomials {
    per_site: Vec<SignedMonomial>,
}

impl OutputMonomials {
    pub fn new(g: &Graph, m: &Measurement, flips: &[bool]) -> Self {
        let n = g.n();
        let per_site = (0..n)
            .map(|j| {
                let mut mono = SignedMonomial::one(n);
                let letter = m.get(j);
                if letter == Pauli::I {
                    return mono;
                }
                if letter.has_x() {
                    for &k in g.neighbors(j) {
                        mono.vars.insert(k);
                    }
                }
                if letter.has_z() {
                    mono.vars.toggle(j);
                }
                mono.negative = flips[j];
                mono
            })
            .collect();
        OutputMonomials { per_site }
    }

    pub fn site(&self, j: usize) -> &SignedMonomial {
        &self.per_site[j]
    }

    pub fn product(&self, sites: impl IntoIterator<Item = usize>) -> SignedMonomial {
        let mut acc = SignedMonomial::one(self.per_site.len());
        for j in sites {
            acc.mul_assign(&self.per_site[j]);
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    Exact,
    Sampled { samples: u64, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum ProductOutcome {
    Exact {
        verdict: Verdict,
        /// 1-based labels of the `z` variables left in the product.
        monomial: Vec<usize>,
    },
    Sampled {
        seed: u64,
        samples: u64,
        plus: u64,
        minus: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProductReport {
    pub rule: String,
    /// 1-based labels of the sites whose outputs are multiplied.
    pub subset: Vec<usize>,
    pub flip_mask: Vec<bool>,
    pub outcome: ProductOutcome,
}

impl ProductReport {
    pub fn verdict(&self) -> Option<Verdict> {
        match &self.outcome {
            ProductOutcome::Exact { verdict, .. } => Some(*verdict),
            ProductOutcome::Sampled { .. } => None,
        }
    }
}

/// Distribution of the product of outputs over `subset`, with all parties
/// acting under the global measurement `m`.
pub fn product_verdict(
    rule: &dyn FlipRule,
    g: &Graph,
    m: &Measurement,
    subset: &[usize],
    mode: Mode,
) -> Result<ProductReport> {
    check_sizes(g, m)?;
    if let Some(&bad) = subset.iter().find(|&&j| j >= g.n()) {
        return Err(Error::invalid(format!(
            "subset site {} outside 1..={}",
            bad + 1,
            g.n()
        )));
    }
    let flips = rule.flip_mask(g, m)?;
    let outcome = match mode {
        Mode::Exact => {
            if g.n() > EXACT_NODE_LIMIT {
                return Err(Error::UnsupportedSize {
                    what: "exact-mode node count",
                    size: g.n(),
                    limit: EXACT_NODE_LIMIT,
                    hint: Some("use sampling mode"),
                });
            }
            let mono = OutputMonomials::new(g, m, &flips).product(subset.iter().copied());
            ProductOutcome::Exact {
                verdict: mono.verdict(),
                monomial: mono.vars.ones().map(|k| k + 1).collect(),
            }
        }
        Mode::Sampled { samples, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut minus = 0;
            for _ in 0..samples {
                let z = HiddenAssignment::random(g.n(), &mut rng);
                let out = outputs_with_flips(g, m, &z, &flips);
                minus += (out.product(subset.iter().copied()) == -1) as u64;
            }
            ProductOutcome::Sampled {
                seed,
                samples,
                plus: samples - minus,
                minus,
            }
        }
    };
    Ok(ProductReport {
        rule: rule.name(),
        subset: subset.iter().map(|j| j + 1).collect(),
        flip_mask: flips,
        outcome,
    })
}
