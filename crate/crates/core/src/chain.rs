//! The letter grammar of linear cluster states and a site-invariant flip
//! protocol for them.
//!
//! On a chain every stabilizer element splits into sentences: words
//! (`X`, `YY`, `Y X..X Y`) separated by single `I`s and bracketed by `Z`s,
//! where the two chain ends act as permanent virtual `Z`s. Only words
//! `Y X^k Y` with `k` odd carry a minus sign, so the protocol flips the middle
//! `X` of such a word whenever the broadcast letters allow one to exist.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::graph::Graph;
use crate::lhv::{run_with, FlipRule, HiddenAssignment, OutputMonomials, ProtocolOutputs};
use crate::oracle::{stabilizer_entry, Verdict};
use crate::pauli::{Measurement, Pauli, Sign};

/// Largest chain swept over all `4^n` global measurements.
pub const CHAIN_EXHAUSTIVE_LIMIT: usize = 7;
/// Largest chain accepted in sampling mode.
pub const CHAIN_SAMPLED_LIMIT: usize = 10;
const EXAMPLE_CAP: usize = 16;

// ---------------------------------------------------------------------------
// Grammar

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WordForm {
    /// `X`
    Single,
    /// `Y Y`
    Pair,
    /// `Y X^k Y`, `k >= 1`
    Long,
}

/// A maximal run of `X`/`Y` letters in a stabilizer element. `start` is
/// 0-based; the letters follow from the length alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Word {
    pub start: usize,
    pub len: usize,
}

/// The only word of each length.
pub fn word_letters(len: usize) -> Vec<Pauli> {
    match len {
        0 => Vec::new(),
        1 => vec![Pauli::X],
        _ => {
            let mut w = vec![Pauli::X; len];
            w[0] = Pauli::Y;
            w[len - 1] = Pauli::Y;
            w
        }
    }
}

impl Word {
    pub fn form(&self) -> WordForm {
        match self.len {
            1 => WordForm::Single,
            2 => WordForm::Pair,
            _ => WordForm::Long,
        }
    }

    pub fn letters(&self) -> Vec<Pauli> {
        word_letters(self.len)
    }

    /// Last site, inclusive.
    pub fn end(&self) -> usize {
        self.start + self.len - 1
    }

    pub fn sign(&self) -> Sign {
        Sign::from_minus(self.len >= 3 && self.len % 2 == 1)
    }

    /// The central `X` of a negative word.
    pub fn middle(&self) -> Option<usize> {
        self.sign().is_minus().then_some(self.start + self.len / 2)
    }
}

impl Serialize for Word {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Word", 3)?;
        st.serialize_field("start", &(self.start + 1))?;
        st.serialize_field(
            "letters",
            &self
                .letters()
                .iter()
                .map(|p| p.as_char())
                .collect::<String>(),
        )?;
        st.serialize_field("sign", &self.sign())?;
        st.end()
    }
}

/// A sentence end: a measured `Z` (0-based site) or one of the virtual sites
/// just past the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    Virtual,
    Measured(usize),
}

impl Serialize for Boundary {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Boundary::Virtual => s.serialize_str("virtual"),
            Boundary::Measured(k) => s.serialize_u64(*k as u64 + 1),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub left: Boundary,
    pub right: Boundary,
    pub words: Vec<Word>,
}

impl Sentence {
    pub fn sign(&self) -> Sign {
        self.words.iter().fold(Sign::Plus, |acc, w| acc * w.sign())
    }

    /// Letters on an `n`-site chain, measured boundaries included.
    pub fn letters(&self, n: usize) -> Measurement {
        let pos = self.positions(n);
        Measurement::new(pos[1..=n].to_vec())
    }

    /// Letters at positions `0..=n+1`, where positions `0` and `n+1` are the
    /// virtual sites.
    fn positions(&self, n: usize) -> Vec<Pauli> {
        let mut pos = vec![Pauli::I; n + 2];
        let (l, r) = self.span(n);
        pos[l] = Pauli::Z;
        pos[r] = Pauli::Z;
        for w in &self.words {
            for (i, p) in w.letters().into_iter().enumerate() {
                pos[w.start + 1 + i] = p;
            }
        }
        pos
    }

    /// Closed span in positions, boundaries included.
    fn span(&self, n: usize) -> (usize, usize) {
        let l = match self.left {
            Boundary::Virtual => 0,
            Boundary::Measured(k) => k + 1,
        };
        let r = match self.right {
            Boundary::Virtual => n + 1,
            Boundary::Measured(k) => k + 1,
        };
        (l, r)
    }
}

impl Serialize for Sentence {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Sentence", 4)?;
        st.serialize_field("left", &self.left)?;
        st.serialize_field("right", &self.right)?;
        st.serialize_field("words", &self.words)?;
        st.serialize_field("sign", &self.sign())?;
        st.end()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Decomposition {
    pub measurement: Measurement,
    pub sentences: Vec<Sentence>,
    pub sign: Sign,
}

/// Parses a letter string on a chain of the same length into sentences.
/// Fails exactly when no signed version of the string is a stabilizer
/// element.
pub fn decompose(m: &Measurement) -> Result<Decomposition> {
    let l = m.letters();
    let n = l.len();
    let fail = |reason: String| {
        Err(Error::NotStabilizerShaped {
            letters: m.to_string(),
            reason,
        })
    };
    let in_word = |k: usize| matches!(l[k], Pauli::X | Pauli::Y);

    let mut words = Vec::new();
    let mut k = 0;
    while k < n {
        if !in_word(k) {
            k += 1;
            continue;
        }
        let start = k;
        while k < n && in_word(k) {
            k += 1;
        }
        let w = Word {
            start,
            len: k - start,
        };
        if l[start..k] != w.letters()[..] {
            return fail(format!("sites {}..{} do not form a word", start + 1, k));
        }
        words.push(w);
    }

    let mut groups: Vec<Vec<Word>> = Vec::new();
    for w in words {
        match groups.last_mut().and_then(|g| g.last().copied()) {
            Some(prev) if prev.end() + 2 == w.start => {
                let gap = prev.end() + 1;
                if l[gap] != Pauli::I {
                    return fail(format!(
                        "{} at site {} separates two words",
                        l[gap],
                        gap + 1
                    ));
                }
                groups.last_mut().unwrap().push(w);
            }
            _ => groups.push(vec![w]),
        }
    }

    let mut bracketing = vec![false; n];
    let mut sentences = Vec::new();
    for words in groups {
        let (first, last) = (words[0].start, words.last().unwrap().end());
        let mut bound = |k: Option<usize>| -> std::result::Result<Boundary, String> {
            match k {
                None => Ok(Boundary::Virtual),
                Some(k) if l[k] == Pauli::Z => {
                    bracketing[k] = true;
                    Ok(Boundary::Measured(k))
                }
                Some(k) => Err(format!(
                    "{} at site {} should bracket a sentence",
                    l[k],
                    k + 1
                )),
            }
        };
        let left = match bound(first.checked_sub(1)) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        let right = match bound((last + 1 < n).then_some(last + 1)) {
            Ok(b) => b,
            Err(e) => return fail(e),
        };
        sentences.push(Sentence { left, right, words });
    }
    if let Some(k) = (0..n).find(|&k| l[k] == Pauli::Z && !bracketing[k]) {
        return fail(format!("Z at site {} brackets no sentence", k + 1));
    }
    let sign = sentences.iter().fold(Sign::Plus, |acc, s| acc * s.sign());
    Ok(Decomposition {
        measurement: m.clone(),
        sentences,
        sign,
    })
}

// ---------------------------------------------------------------------------
// Protocol

/// Which letters are broadcast before sites decide on flips.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Reading {
    /// Only `X` and `Z` sites broadcast; `Y` and `I` look alike.
    #[default]
    Existential,
    /// `Y` sites broadcast too.
    BroadcastY,
}

impl Reading {
    pub const BOTH: [Reading; 2] = [Reading::Existential, Reading::BroadcastY];

    pub fn name(self) -> &'static str {
        match self {
            Reading::Existential => "existential",
            Reading::BroadcastY => "broadcast-y",
        }
    }
}

impl fmt::Display for Reading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Seen {
    X,
    Y,
    Z,
    I,
    Silent,
}

/// What every site knows after the broadcast round. The same for all sites.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainView {
    seen: Vec<Seen>,
}

impl ChainView {
    pub fn new(m: &Measurement, reading: Reading) -> Self {
        let seen = m
            .letters()
            .iter()
            .map(|p| match (p, reading) {
                (Pauli::X, _) => Seen::X,
                (Pauli::Z, _) => Seen::Z,
                (_, Reading::Existential) => Seen::Silent,
                (Pauli::Y, Reading::BroadcastY) => Seen::Y,
                (_, Reading::BroadcastY) => Seen::I,
            })
            .collect();
        ChainView { seen }
    }

    pub fn seen(&self) -> &[Seen] {
        &self.seen
    }

    // Positions are 1-based with virtual sites at 0 and n+1.
    fn at(&self, p: usize) -> Seen {
        self.seen[p - 1]
    }

    fn x(&self, p: usize) -> bool {
        self.at(p) == Seen::X
    }

    fn y(&self, p: usize) -> bool {
        matches!(self.at(p), Seen::Y | Seen::Silent)
    }

    fn z(&self, p: usize) -> bool {
        self.at(p) == Seen::Z
    }

    /// Starts of words that could end at position `e`.
    fn starts_ending_at(&self, e: usize) -> Vec<usize> {
        let mut out = Vec::new();
        if self.x(e) {
            out.push(e);
        }
        if self.y(e) {
            if e >= 2 && self.y(e - 1) {
                out.push(e - 1);
            }
            let mut k = e - 1;
            while k >= 1 && self.x(k) {
                k -= 1;
            }
            if k + 1 < e && k >= 1 && self.y(k) {
                out.push(k);
            }
        }
        out
    }

    /// Ends of words that could start at position `s`.
    fn ends_starting_at(&self, s: usize) -> Vec<usize> {
        let n = self.seen.len();
        let mut out = Vec::new();
        if self.x(s) {
            out.push(s);
        }
        if self.y(s) {
            if s < n && self.y(s + 1) {
                out.push(s + 1);
            }
            let mut k = s + 1;
            while k <= n && self.x(k) {
                k += 1;
            }
            if k > s + 1 && k <= n && self.y(k) {
                out.push(k);
            }
        }
        out
    }

    /// `left[p]`: position `p` can be a sentence's left bracket or a separator
    /// preceded by a complete run of words back to such a bracket.
    fn left_table(&self) -> Vec<bool> {
        let n = self.seen.len();
        let mut left = vec![false; n + 1];
        left[0] = true;
        for p in 1..=n {
            left[p] = self.z(p)
                || (p >= 2
                    && self
                        .starts_ending_at(p - 1)
                        .into_iter()
                        .any(|s| left[s - 1]));
        }
        left
    }

    fn right_table(&self) -> Vec<bool> {
        let n = self.seen.len();
        let mut right = vec![false; n + 2];
        right[n + 1] = true;
        for q in (1..=n).rev() {
            right[q] = self.z(q)
                || (q < n
                    && self
                        .ends_starting_at(q + 1)
                        .into_iter()
                        .any(|e| right[e + 1]));
        }
        right
    }

    fn decide(&self, j: usize, left: &[bool], right: &[bool]) -> bool {
        let n = self.seen.len();
        let p = j + 1;
        if !self.x(p) {
            return false;
        }
        let (mut l, mut r) = (p, p);
        while l > 1 && self.x(l - 1) {
            l -= 1;
        }
        while r < n && self.x(r + 1) {
            r += 1;
        }
        // The word is Y X^k Y with this site in the middle, so its X run is
        // the whole maximal run of broadcast Xs.
        (r - l) % 2 == 0
            && l + r == 2 * p
            && l >= 2
            && r < n
            && self.y(l - 1)
            && self.y(r + 1)
            && left[l - 2]
            && right[r + 2]
    }

    /// Whether the `X` at 0-based site `j` flips: some sentence compatible
    /// with the view has `j` as the middle of a negative word.
    pub fn flip_decision(&self, j: usize) -> Result<bool> {
        if self.seen.get(j) != Some(&Seen::X) {
            return Err(Error::invalid(format!("site {} does not measure X", j + 1)));
        }
        Ok(self.decide(j, &self.left_table(), &self.right_table()))
    }

    pub fn flip_mask(&self) -> Vec<bool> {
        let (left, right) = (self.left_table(), self.right_table());
        (0..self.seen.len())
            .map(|j| self.decide(j, &left, &right))
            .collect()
    }
}

pub fn flip_decision(m: &Measurement, j: usize, reading: Reading) -> Result<bool> {
    ChainView::new(m, reading).flip_decision(j)
}

fn check_chain(g: &Graph, m: &Measurement) -> Result<()> {
    if !g.is_chain() {
        return Err(Error::invalid(
            "the chain protocol needs a path graph 1-2-...-n",
        ));
    }
    if m.len() != g.n() {
        return Err(Error::invalid(format!(
            "measurement has {} letters but the chain has {} nodes",
            m.len(),
            g.n()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ChainRule {
    pub reading: Reading,
}

impl FlipRule for ChainRule {
    fn name(&self) -> String {
        format!("chain-{}", self.reading)
    }

    fn flip_mask(&self, g: &Graph, m: &Measurement) -> Result<Vec<bool>> {
        check_chain(g, m)?;
        Ok(ChainView::new(m, self.reading).flip_mask())
    }
}

pub fn run_chain_protocol(
    g: &Graph,
    m: &Measurement,
    z: &HiddenAssignment,
    reading: Reading,
) -> Result<ProtocolOutputs> {
    run_with(&ChainRule { reading }, g, m, z)
}

// ---------------------------------------------------------------------------
// Verification

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Sampling {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainVerifyOptions {
    pub readings: Vec<Reading>,
    /// `None` sweeps all `4^n` measurements.
    pub sampling: Option<Sampling>,
}

impl Default for ChainVerifyOptions {
    fn default() -> Self {
        ChainVerifyOptions {
            readings: Reading::BOTH.to_vec(),
            sampling: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainViolation {
    pub measurement: Measurement,
    pub sub: Measurement,
    pub expected: Sign,
    pub got: Verdict,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadingOutcome {
    pub reading: Reading,
    pub violations: u64,
    pub examples: Vec<ChainViolation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OverlapViolation {
    pub measurement: Measurement,
    pub first: Measurement,
    pub second: Measurement,
    /// 1-based; `0` and `n + 1` are the virtual sites.
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ReadingDiscrepancy {
    pub measurement: Measurement,
    /// 1-based flipped sites under each reading.
    pub existential: Vec<usize>,
    pub broadcast_y: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ChainVerifyReport {
    pub n: usize,
    pub sampling: Option<Sampling>,
    pub measurements: u64,
    /// Certain submeasurements checked per reading.
    pub deterministic_checks: u64,
    pub readings: Vec<ReadingOutcome>,
    pub overlap_pairs: u64,
    pub overlap_violations: u64,
    pub overlap_examples: Vec<OverlapViolation>,
    /// Measurements whose flip masks differ between readings, when both ran.
    pub reading_discrepancies: Option<u64>,
    pub discrepancy_examples: Vec<ReadingDiscrepancy>,
}

impl ChainVerifyReport {
    pub fn is_clean(&self) -> bool {
        self.overlap_violations == 0 && self.readings.iter().all(|r| r.violations == 0)
    }
}

struct Element {
    letters: Vec<Pauli>,
    support: Vec<usize>,
    sign: Sign,
}

impl Element {
    fn inside(&self, m: &[Pauli]) -> bool {
        self.support.iter().all(|&k| m[k] == self.letters[k])
    }
}

struct SentenceEntry {
    element: Element,
    span: (usize, usize),
    positions: Vec<Pauli>,
}

/// Capped list of examples, kept in measurement-index order.
struct Examples<T>(Vec<(u64, T)>);

impl<T> Examples<T> {
    fn merge(mut self, other: Self) -> Self {
        self.0.extend(other.0);
        self.0.sort_by_key(|e| e.0);
        self.0.truncate(EXAMPLE_CAP);
        self
    }

    fn into_vec(self) -> Vec<T> {
        self.0.into_iter().map(|e| e.1).collect()
    }
}

struct Tally {
    measurements: u64,
    checks: u64,
    violations: Vec<u64>,
    violation_examples: Vec<Examples<ChainViolation>>,
    pairs: u64,
    overlap: u64,
    overlap_examples: Examples<OverlapViolation>,
    discrepancies: u64,
    discrepancy_examples: Examples<ReadingDiscrepancy>,
}

impl Tally {
    fn new(readings: usize) -> Self {
        Tally {
            measurements: 0,
            checks: 0,
            violations: vec![0; readings],
            violation_examples: (0..readings).map(|_| Examples(Vec::new())).collect(),
            pairs: 0,
            overlap: 0,
            overlap_examples: Examples(Vec::new()),
            discrepancies: 0,
            discrepancy_examples: Examples(Vec::new()),
        }
    }

    fn merge(self, other: Tally) -> Tally {
        Tally {
            measurements: self.measurements + other.measurements,
            checks: self.checks + other.checks,
            violations: self
                .violations
                .iter()
                .zip(&other.violations)
                .map(|(a, b)| a + b)
                .collect(),
            violation_examples: self
                .violation_examples
                .into_iter()
                .zip(other.violation_examples)
                .map(|(a, b)| a.merge(b))
                .collect(),
            pairs: self.pairs + other.pairs,
            overlap: self.overlap + other.overlap,
            overlap_examples: self.overlap_examples.merge(other.overlap_examples),
            discrepancies: self.discrepancies + other.discrepancies,
            discrepancy_examples: self.discrepancy_examples.merge(other.discrepancy_examples),
        }
    }
}

fn sampled_measurement(n: usize, g: &Graph, seed: u64, index: u64) -> Measurement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    let uniform = |rng: &mut ChaCha8Rng| Pauli::ALL[rng.random_range(0..4)];
    if index.is_multiple_of(2) {
        return Measurement::new((0..n).map(|_| uniform(&mut rng)).collect());
    }
    // Every other sample extends a random stabilizer element, so that certain
    // submeasurements are plentiful.
    let (s, _) = stabilizer_entry(g, rng.random_range(0..1u64 << n));
    Measurement::new(
        s.letters()
            .iter()
            .map(|&p| if p == Pauli::I { uniform(&mut rng) } else { p })
            .collect(),
    )
}

/// Checks the protocol on every certain submeasurement of every global
/// measurement (or a seeded sample of them), for each requested reading, and
/// checks pairwise agreement of the sentences inside each measurement.
pub fn verify_chain_exhaustive(
    n: usize,
    options: &ChainVerifyOptions,
    exec: Exec,
) -> Result<ChainVerifyReport> {
    if n == 0 {
        return Err(Error::invalid("chain needs at least one node"));
    }
    let limit = if options.sampling.is_some() {
        CHAIN_SAMPLED_LIMIT
    } else {
        CHAIN_EXHAUSTIVE_LIMIT
    };
    if n > limit {
        return Err(Error::UnsupportedSize {
            what: "chain length",
            size: n,
            limit,
            hint: options
                .sampling
                .is_none()
                .then_some("pass a sample count for longer chains"),
        });
    }
    if options.readings.is_empty() {
        return Err(Error::invalid("no reading selected"));
    }
    let g = Graph::chain(n)?;
    let mut elements = Vec::new();
    let mut sentences = Vec::new();
    for idx in 1..1u64 << n {
        let (s, sign) = stabilizer_entry(&g, idx);
        let element = Element {
            letters: s.letters().to_vec(),
            support: s.support(),
            sign,
        };
        let dec = decompose(&s)?;
        if dec.sign != sign {
            return Err(Error::Internal(format!(
                "grammar sign of {s} disagrees with generator product"
            )));
        }
        if let [only] = &dec.sentences[..] {
            sentences.push(SentenceEntry {
                element: Element {
                    letters: element.letters.clone(),
                    support: element.support.clone(),
                    sign,
                },
                span: only.span(n),
                positions: only.positions(n),
            });
        }
        elements.push(element);
    }

    let readings = &options.readings;
    let both = readings.contains(&Reading::Existential) && readings.contains(&Reading::BroadcastY);
    let total = options.sampling.map_or(1u64 << (2 * n), |s| s.samples);

    let tally = exec.map_reduce(
        total,
        || Tally::new(readings.len()),
        |idx| {
            let m = match options.sampling {
                None => Measurement::from_index(n, idx),
                Some(s) => sampled_measurement(n, &g, s.seed, idx),
            };
            let mut t = Tally::new(readings.len());
            t.measurements = 1;
            let inside: Vec<&Element> = elements.iter().filter(|e| e.inside(m.letters())).collect();
            t.checks = inside.len() as u64;

            let masks: Vec<Vec<bool>> = readings
                .iter()
                .map(|&r| ChainView::new(&m, r).flip_mask())
                .collect();
            for (ri, flips) in masks.iter().enumerate() {
                let outputs = OutputMonomials::new(&g, &m, flips);
                let mut examples = Vec::new();
                for e in &inside {
                    let got = outputs.product(e.support.iter().copied()).verdict();
                    if got != Verdict::Deterministic(e.sign) {
                        t.violations[ri] += 1;
                        if examples.len() < EXAMPLE_CAP {
                            examples.push((
                                idx,
                                ChainViolation {
                                    measurement: m.clone(),
                                    sub: Measurement::new(e.letters.clone()),
                                    expected: e.sign,
                                    got,
                                },
                            ));
                        }
                    }
                }
                t.violation_examples[ri] = Examples(examples);
            }
            if both {
                let ex = readings
                    .iter()
                    .position(|&r| r == Reading::Existential)
                    .unwrap();
                let by = readings
                    .iter()
                    .position(|&r| r == Reading::BroadcastY)
                    .unwrap();
                if masks[ex] != masks[by] {
                    t.discrepancies = 1;
                    let on = |mask: &[bool]| (0..n).filter(|&j| mask[j]).map(|j| j + 1).collect();
                    t.discrepancy_examples = Examples(vec![(
                        idx,
                        ReadingDiscrepancy {
                            measurement: m.clone(),
                            existential: on(&masks[ex]),
                            broadcast_y: on(&masks[by]),
                        },
                    )]);
                }
            }

            let present: Vec<&SentenceEntry> = sentences
                .iter()
                .filter(|s| s.element.inside(m.letters()))
                .collect();
            let mut overlap_examples = Vec::new();
            for (i, a) in present.iter().enumerate() {
                for b in &present[i + 1..] {
                    t.pairs += 1;
                    if let Some(p) = overlap_disagreement(a, b) {
                        t.overlap += 1;
                        if overlap_examples.len() < EXAMPLE_CAP {
                            overlap_examples.push((
                                idx,
                                OverlapViolation {
                                    measurement: m.clone(),
                                    first: Measurement::new(a.element.letters.clone()),
                                    second: Measurement::new(b.element.letters.clone()),
                                    position: p,
                                },
                            ));
                        }
                    }
                }
            }
            t.overlap_examples = Examples(overlap_examples);
            t
        },
        Tally::merge,
    );

    Ok(ChainVerifyReport {
        n,
        sampling: options.sampling,
        measurements: tally.measurements,
        deterministic_checks: tally.checks,
        readings: readings
            .iter()
            .zip(tally.violations)
            .zip(tally.violation_examples)
            .map(|((&reading, violations), ex)| ReadingOutcome {
                reading,
                violations,
                examples: ex.into_vec(),
            })
            .collect(),
        overlap_pairs: tally.pairs,
        overlap_violations: tally.overlap,
        overlap_examples: tally.overlap_examples.into_vec(),
        reading_discrepancies: both.then_some(tally.discrepancies),
        discrepancy_examples: tally.discrepancy_examples.into_vec(),
    })
}

/// First position in the common span where two sentences differ, other than a
/// bracket of either one meeting a `Z` or `I` in the other.
fn overlap_disagreement(a: &SentenceEntry, b: &SentenceEntry) -> Option<usize> {
    let lo = a.span.0.max(b.span.0);
    let hi = a.span.1.min(b.span.1);
    (lo..=hi).find(|&p| {
        let (x, y) = (a.positions[p], b.positions[p]);
        let bracket = [a.span.0, a.span.1, b.span.0, b.span.1].contains(&p);
        let quiet = |q: Pauli| matches!(q, Pauli::Z | Pauli::I);
        !(x == y || (bracket && quiet(x) && quiet(y)))
    })
}

/// Checks a sentence pair directly, for callers holding two sentences of the
/// same chain. Returns the first disagreeing position (1-based, virtual sites
/// at `0` and `n + 1`).
pub fn sentences_disagree(a: &Sentence, b: &Sentence, n: usize) -> Option<usize> {
    let entry = |s: &Sentence| {
        let letters = s.letters(n);
        SentenceEntry {
            element: Element {
                support: letters.support(),
                letters: letters.letters().to_vec(),
                sign: s.sign(),
            },
            span: s.span(n),
            positions: s.positions(n),
        }
    };
    overlap_disagreement(&entry(a), &entry(b))
}
