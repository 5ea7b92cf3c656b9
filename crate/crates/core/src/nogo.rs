//! Checks of communication-assisted models against the stabilizer oracle, and
//! parity systems that rule out whole classes of such models.
//!
//! Two classes are handled. Bounded-distance models let a site's output depend
//! only on the measurement letters within distance `d`; site-invariant models
//! must treat graph-automorphic sites alike. Both reduce to GF(2) systems in
//! which each certain submeasurement pins the parity of its sites' variables.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::gf2::{gf2_solve, verify_certificate, ParityConstraintSystem, Solution};
use crate::graph::{padding, Graph, NodeColoring};
use crate::lhv::{FlipRule, OutputMonomials, EXACT_NODE_LIMIT};
use crate::oracle::{classify, Verdict};
use crate::pauli::{generator_product_of, Measurement, Pauli, Sign};

/// Largest support for which every submeasurement is enumerated.
pub const SUBMEASUREMENT_SUPPORT_LIMIT: usize = 20;

fn check_measurement(g: &Graph, m: &Measurement) -> Result<()> {
    if m.len() != g.n() {
        return Err(Error::invalid(format!(
            "measurement has {} letters but the graph has {} nodes",
            m.len(),
            g.n()
        )));
    }
    Ok(())
}

fn check_support(m: &Measurement) -> Result<Vec<usize>> {
    let support = m.support();
    if support.len() > SUBMEASUREMENT_SUPPORT_LIMIT {
        return Err(Error::too_big(
            "measurement support",
            support.len(),
            SUBMEASUREMENT_SUPPORT_LIMIT,
        ));
    }
    Ok(support)
}

fn one_based(sites: &[usize]) -> Vec<usize> {
    sites.iter().map(|j| j + 1).collect()
}

fn subset_of(support: &[usize], mask: u64) -> Vec<usize> {
    support
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, &j)| j)
        .collect()
}

// ---------------------------------------------------------------------------
// Exhaustive submeasurement comparison

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubmeasurementEntry {
    /// 1-based sites whose outputs are multiplied.
    pub subset: Vec<usize>,
    pub sub: Measurement,
    pub oracle: Verdict,
    pub lhv: Verdict,
    #[serde(rename = "match")]
    pub matches: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubmeasurementReport {
    pub rule: String,
    pub global: Measurement,
    pub subsets_checked: u64,
    /// Subsets on which the oracle predicts a fixed sign.
    pub deterministic: u64,
    /// Entries where model and oracle disagree, in subset-mask order.
    pub mismatches: Vec<SubmeasurementEntry>,
}

impl SubmeasurementReport {
    pub fn is_clean(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Compares the model's product distribution with the oracle for every
/// submeasurement of `global`, with all parties acting under `global`.
pub fn verify_all_submeasurements(
    rule: &dyn FlipRule,
    g: &Graph,
    global: &Measurement,
    exec: Exec,
) -> Result<SubmeasurementReport> {
    check_measurement(g, global)?;
    if g.n() > EXACT_NODE_LIMIT {
        return Err(Error::too_big("node count", g.n(), EXACT_NODE_LIMIT));
    }
    let support = check_support(global)?;
    let flips = rule.flip_mask(g, global)?;
    let outputs = OutputMonomials::new(g, global, &flips);
    let total = 1u64 << support.len();

    let (deterministic, mut found) = exec.map_reduce(
        total,
        || (0u64, Vec::new()),
        |mask| {
            let subset = subset_of(&support, mask);
            let sub = global.restrict(subset.iter().copied());
            let oracle = classify(g, &sub);
            let lhv = outputs.product(subset.iter().copied()).verdict();
            let det = oracle.is_deterministic() as u64;
            if oracle == lhv {
                (det, Vec::new())
            } else {
                (det, vec![(mask, subset, sub, oracle, lhv)])
            }
        },
        |(a, mut va), (b, vb)| {
            va.extend(vb);
            (a + b, va)
        },
    );
    found.sort_by_key(|e| e.0);
    Ok(SubmeasurementReport {
        rule: rule.name(),
        global: global.clone(),
        subsets_checked: total,
        deterministic,
        mismatches: found
            .into_iter()
            .map(|(_, subset, sub, oracle, lhv)| SubmeasurementEntry {
                subset: one_based(&subset),
                sub,
                oracle,
                lhv,
                matches: false,
            })
            .collect(),
    })
}

// ---------------------------------------------------------------------------
// Constraint variables

/// The measurement letters a site can see: `(site, letter)` for every site in
/// its ball, sorted by site. Rendered 1-based as `Y1 X2 Y12`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct View(Vec<(usize, Pauli)>);

impl View {
    pub fn of(g: &Graph, m: &Measurement, j: usize, d: usize) -> View {
        View(g.ball(j, d).into_iter().map(|k| (k, m.get(k))).collect())
    }

    pub fn entries(&self) -> &[(usize, Pauli)] {
        &self.0
    }
}

impl fmt::Display for View {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (k, p)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(" ")?;
            }
            write!(f, "{p}{}", k + 1)?;
        }
        Ok(())
    }
}

impl FromStr for View {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for tok in s.split_whitespace() {
            let mut chars = tok.chars();
            let letter = chars
                .next()
                .and_then(Pauli::from_char)
                .ok_or_else(|| Error::invalid(format!("bad view entry {tok:?}")))?;
            let site: usize = chars
                .as_str()
                .parse()
                .ok()
                .filter(|&k| k >= 1)
                .ok_or_else(|| Error::invalid(format!("bad view entry {tok:?}")))?;
            entries.push((site - 1, letter));
        }
        if !entries.windows(2).all(|w| w[0].0 < w[1].0) {
            return Err(Error::invalid("view sites must be strictly increasing"));
        }
        Ok(View(entries))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConstraintVar {
    /// Output sign of `site` measuring `letter` while seeing `view`.
    Hidden {
        site: usize,
        letter: Pauli,
        view: View,
    },
    /// Shared flip bit of an automorphism orbit (0-based members).
    OrbitFlip { orbit: Vec<usize> },
}

impl fmt::Display for ConstraintVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConstraintVar::Hidden { site, letter, view } => {
                write!(f, "{letter}{}@[{view}]", site + 1)
            }
            ConstraintVar::OrbitFlip { orbit } => {
                let labels: Vec<String> = orbit.iter().map(|k| (k + 1).to_string()).collect();
                write!(f, "flip{{{}}}", labels.join(","))
            }
        }
    }
}

impl Serialize for ConstraintVar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

pub type NoGoSystem = ParityConstraintSystem<ConstraintVar>;

/// A submeasurement with a definite sign, measured as part of `global`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertainInstance {
    pub label: String,
    pub global: Measurement,
    pub certain: Measurement,
    pub sign: Sign,
}

// ---------------------------------------------------------------------------
// Bounded-distance models

#[derive(Debug, Clone, Serialize)]
pub struct DistanceSystem {
    pub d: usize,
    pub system: NoGoSystem,
    /// 0-based sites whose letter differs between the global measurements.
    pub changeable: Vec<usize>,
    /// 0-based sites, in some certain support, that see more than one
    /// changeable site (themselves included).
    pub crowded: Vec<usize>,
}

impl DistanceSystem {
    /// Equations in compact notation: `x2 y1^Y ... = -1`, where the
    /// superscript lists the letters of changeable sites visible to that
    /// variable, other than its own.
    pub fn render(&self) -> Vec<String> {
        let changeable: BTreeSet<usize> = self.changeable.iter().copied().collect();
        self.system
            .equations()
            .iter()
            .map(|eq| {
                let terms: Vec<String> = eq
                    .vars
                    .iter()
                    .map(|&v| match &self.system.variables()[v] {
                        ConstraintVar::Hidden { site, letter, view } => {
                            let seen: String = view
                                .entries()
                                .iter()
                                .filter(|(k, _)| k != site && changeable.contains(k))
                                .map(|(_, p)| p.as_char())
                                .collect();
                            let base =
                                format!("{}{}", letter.as_char().to_ascii_lowercase(), site + 1);
                            if seen.is_empty() {
                                base
                            } else {
                                format!("{base}^{seen}")
                            }
                        }
                        other => other.to_string(),
                    })
                    .collect();
                format!("{} = {}", terms.join(" "), if eq.rhs { "-1" } else { "1" })
            })
            .collect()
    }
}

/// One equation per instance: the product of the support's hidden signs, each
/// keyed by what its site sees within distance `d`, equals the certain sign.
pub fn distance_constraint_system(
    g: &Graph,
    instances: &[CertainInstance],
    d: usize,
) -> Result<DistanceSystem> {
    for inst in instances {
        check_measurement(g, &inst.global)?;
        check_measurement(g, &inst.certain)?;
        if !inst.certain.is_submeasurement_of(&inst.global)? {
            return Err(Error::invalid(format!(
                "{}: {} is not part of {}",
                inst.label, inst.certain, inst.global
            )));
        }
    }
    let changeable: Vec<usize> = (0..g.n())
        .filter(|&j| {
            instances
                .windows(2)
                .any(|w| w[0].global.get(j) != w[1].global.get(j))
        })
        .collect();
    let is_changeable: BTreeSet<usize> = changeable.iter().copied().collect();

    let mut system = NoGoSystem::new();
    let mut crowded = BTreeSet::new();
    for inst in instances {
        let mut vars = Vec::new();
        for j in inst.certain.support() {
            let view = View::of(g, &inst.global, j, d);
            if view
                .entries()
                .iter()
                .filter(|(k, _)| is_changeable.contains(k))
                .count()
                > 1
            {
                crowded.insert(j);
            }
            vars.push(system.var(ConstraintVar::Hidden {
                site: j,
                letter: inst.global.get(j),
                view,
            }));
        }
        system.add_equation(inst.label.clone(), vars, inst.sign.is_minus())?;
    }
    Ok(DistanceSystem {
        d,
        system,
        changeable,
        crowded: crowded.into_iter().collect(),
    })
}

/// Largest distance for which the ring construction on `n` nodes applies:
/// `4 * floor((n - 12) / 24) + 1`.
pub fn distance_bound(n: usize) -> Result<usize> {
    if n < 12 {
        return Err(Error::invalid(format!(
            "distance bound needs n >= 12, got {n}"
        )));
    }
    Ok(4 * ((n - 12) / 24) + 1)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RingCase {
    /// Letters at the three vertices, in increasing site order.
    pub vertex_letters: String,
    pub global: Measurement,
    pub certain: Measurement,
    pub sign: Sign,
    /// 1-based generator indices whose product is `sign * certain`.
    pub generators: Vec<usize>,
}

/// Five global measurements on a ring of `12f` sites (`f` odd) that differ only
/// at three far-apart vertices, each with a certain submeasurement. Any
/// isolated padding nodes are measured with `I`.
#[derive(Debug, Clone)]
pub struct RingInstance {
    pub f: usize,
    pub graph: Graph,
    /// 0-based sites `4f, 8f, 12f`.
    pub vertices: [usize; 3],
    /// 0-based sites `2f, 6f, 10f`.
    pub midpoints: [usize; 3],
    pub odd: Vec<usize>,
    /// Even non-special sites congruent to 2 mod 4 (1-based).
    pub left: Vec<usize>,
    /// Even non-special sites congruent to 0 mod 4 (1-based).
    pub right: Vec<usize>,
    /// Open arcs strictly between consecutive multiples of `2f`.
    pub segments: Vec<Vec<usize>>,
    pub cases: Vec<RingCase>,
}

impl RingInstance {
    /// The construction on a bare ring of `12f` nodes.
    pub fn new(f: usize) -> Result<Self> {
        Self::build(f, 12 * f)
    }

    /// The construction on [`Graph::padded_ring`]`(n)`.
    pub fn for_nodes(n: usize) -> Result<Self> {
        if n < 12 {
            return Err(Error::invalid(format!(
                "ring construction needs n >= 12, got {n}"
            )));
        }
        Self::build((n - padding(n)) / 12, n)
    }

    fn build(f: usize, n: usize) -> Result<Self> {
        if f == 0 || f.is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "ring construction needs odd f, got {f}"
            )));
        }
        let ring = 12 * f;
        let graph = if n == ring {
            Graph::ring(ring)?
        } else {
            Graph::padded_ring(n)?
        };
        // Work in 1-based labels and convert at the end.
        let vertices = [4 * f, 8 * f, 12 * f];
        let midpoints = [2 * f, 6 * f, 10 * f];
        let special = |j: usize| vertices.contains(&j) || midpoints.contains(&j);
        let labels = 1..=ring;
        let odd: Vec<usize> = labels.clone().filter(|j| j % 2 == 1).collect();
        let left: Vec<usize> = labels
            .clone()
            .filter(|&j| j % 4 == 2 && !special(j))
            .collect();
        let right: Vec<usize> = labels
            .clone()
            .filter(|&j| j % 4 == 0 && !special(j))
            .collect();
        let segments: Vec<Vec<usize>> = (1..=6)
            .map(|k| {
                labels
                    .clone()
                    .filter(|&j| 2 * f * (k - 1) < j && j < 2 * f * k)
                    .collect()
            })
            .collect();

        let global = |letters: [Pauli; 3]| {
            let mut m = vec![Pauli::I; n];
            for j in 1..=ring {
                m[j - 1] = if let Some(v) = vertices.iter().position(|&v| v == j) {
                    letters[v]
                } else if j % 2 == 1 {
                    Pauli::Y
                } else {
                    Pauli::X
                };
            }
            Measurement::new(m)
        };
        let certain = |ys: &[usize], xs: &[usize]| {
            let mut m = vec![Pauli::I; n];
            for &j in ys {
                m[j - 1] = Pauli::Y;
            }
            for &j in xs {
                m[j - 1] = Pauli::X;
            }
            Measurement::new(m)
        };
        let rotate = |set: &[usize], by: usize| -> Vec<usize> {
            let mut out: Vec<usize> = set.iter().map(|&j| (j - 1 + by) % ring + 1).collect();
            out.sort_unstable();
            out
        };

        // The three mixed cases are rotations of one another by 4f; the
        // subsets L, R and the special sites are invariant under that shift.
        let mixed = |k: usize| {
            let (a, b) = (&segments[2 * k], &segments[2 * k + 1]);
            let in_arc = |j: &usize| a.contains(j) || b.contains(j);
            let shift = 4 * f * k;
            let on = |j: usize| (j - 1 + shift) % ring + 1;
            let mut ys: Vec<usize> = odd.iter().copied().filter(in_arc).collect();
            ys.extend([on(4 * f), on(12 * f)]);
            let mut xs: Vec<usize> = right.clone();
            xs.extend(left.iter().copied().filter(|j| !in_arc(j)));
            xs.extend([on(6 * f), on(8 * f), on(10 * f)]);
            let mut gens = vec![1];
            for j in 1..f {
                gens.extend([4 * j - 1, 4 * j, 4 * j + 1]);
            }
            gens.push(4 * f - 1);
            gens.extend((2 * f..=6 * f).map(|k| 2 * k));
            (
                certain(&ys, &xs),
                rotate(&gens, shift),
                Sign::from_minus((f - 1) % 2 == 1),
            )
        };

        use Pauli::{X, Y};
        let evens: Vec<usize> = labels.clone().filter(|j| j % 2 == 0).collect();
        let mut yyy_x: Vec<usize> = midpoints.to_vec();
        yyy_x.extend(&left);
        let yyy_gens: Vec<usize> = (1..=3 * f)
            .flat_map(|j| [4 * j - 3, 4 * j - 2, 4 * j - 1])
            .collect();
        let (c_yxy, g_yxy, s_yxy) = mixed(0);
        let (c_yyx, g_yyx, s_yyx) = mixed(1);
        let (c_xyy, g_xyy, s_xyy) = mixed(2);
        let specs = [
            (
                [X, X, X],
                certain(&[], &evens),
                (1..=6 * f).map(|j| 2 * j).collect(),
                Sign::Plus,
            ),
            (
                [Y, Y, Y],
                certain(&odd, &yyy_x),
                yyy_gens,
                Sign::from_minus(f % 2 == 1),
            ),
            ([Y, X, Y], c_yxy, g_yxy, s_yxy),
            ([Y, Y, X], c_yyx, g_yyx, s_yyx),
            ([X, Y, Y], c_xyy, g_xyy, s_xyy),
        ];

        let mut cases = Vec::new();
        for (letters, certain, generators, sign) in specs {
            let global = global(letters);
            let case = RingCase {
                vertex_letters: letters.iter().map(|p| p.as_char()).collect(),
                global,
                certain,
                sign,
                generators,
            };
            validate_case(&graph, &case)?;
            cases.push(case);
        }

        let zero = |v: Vec<usize>| v.into_iter().map(|j| j - 1).collect::<Vec<_>>();
        Ok(RingInstance {
            f,
            graph,
            vertices: vertices.map(|j| j - 1),
            midpoints: midpoints.map(|j| j - 1),
            odd: zero(odd),
            left: zero(left),
            right: zero(right),
            segments: segments.into_iter().map(zero).collect(),
            cases,
        })
    }

    pub fn instances(&self) -> Vec<CertainInstance> {
        self.cases
            .iter()
            .map(|c| CertainInstance {
                label: c.vertex_letters.clone(),
                global: c.global.clone(),
                certain: c.certain.clone(),
                sign: c.sign,
            })
            .collect()
    }
}

fn validate_case(g: &Graph, case: &RingCase) -> Result<()> {
    let fail = |what: &str| {
        Err(Error::Internal(format!(
            "ring case {}: {what}",
            case.vertex_letters
        )))
    };
    if !case.certain.is_submeasurement_of(&case.global)? {
        return fail("certain part is not a submeasurement");
    }
    if classify(g, &case.certain) != Verdict::Deterministic(case.sign) {
        return fail("oracle disagrees with the expected sign");
    }
    let product = generator_product_of(g, case.generators.iter().map(|j| j - 1));
    if product.to_measurement() != case.certain || product.sign() != Some(case.sign) {
        return fail("generator factorization does not reproduce the certain part");
    }
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct RingCertificate {
    pub n: usize,
    pub f: usize,
    pub d: usize,
    pub distance_bound: usize,
    pub cases: Vec<RingCase>,
    pub equations: Vec<String>,
    pub variables: Vec<ConstraintVar>,
    pub solution: Solution,
    /// Whether an inconsistency certificate passed the independent check.
    pub certificate_verified: Option<bool>,
    /// 1-based sites seeing more than one changeable vertex.
    pub crowded_sites: Vec<usize>,
}

impl RingCertificate {
    pub fn is_inconsistent(&self) -> bool {
        !self.solution.is_consistent()
    }
}

/// Builds and solves the distance-`d` system for the ring construction on
/// [`Graph::padded_ring`]`(n)`.
pub fn ring_distance_certificate(n: usize, d: usize) -> Result<RingCertificate> {
    let ring = RingInstance::for_nodes(n)?;
    let ds = distance_constraint_system(&ring.graph, &ring.instances(), d)?;
    let solution = gf2_solve(&ds.system);
    let certificate_verified = match &solution {
        Solution::Inconsistent { certificate } => Some(verify_certificate(&ds.system, certificate)),
        Solution::Consistent { .. } => None,
    };
    Ok(RingCertificate {
        n,
        f: ring.f,
        d,
        distance_bound: distance_bound(n)?,
        equations: ds.render(),
        variables: ds.system.variables().to_vec(),
        cases: ring.cases,
        solution,
        certificate_verified,
        crowded_sites: one_based(&ds.crowded),
    })
}

// ---------------------------------------------------------------------------
// Site-invariant models

fn letter_coloring(m: &Measurement) -> NodeColoring {
    NodeColoring::new(
        m.letters()
            .iter()
            .map(|p| Pauli::ALL.iter().position(|q| q == p).unwrap() as u32)
            .collect(),
    )
}

/// Every nonempty submeasurement of `global` with a definite sign, in
/// subset-mask order.
pub fn certain_submeasurements(
    g: &Graph,
    global: &Measurement,
    exec: Exec,
) -> Result<Vec<(Measurement, Sign)>> {
    check_measurement(g, global)?;
    let support = check_support(global)?;
    let found = exec.map_collect(1u64 << support.len(), |mask| {
        if mask == 0 {
            return None;
        }
        let sub = global.restrict(subset_of(&support, mask));
        classify(g, &sub).sign().map(|s| (sub, s))
    });
    Ok(found.into_iter().flatten().collect())
}

/// One flip variable per orbit of the automorphisms fixing `global`. The
/// unflipped outputs multiply to `+1` on every certain submeasurement, so the
/// flips over its support must carry the sign.
pub fn site_invariance_system(
    g: &Graph,
    global: &Measurement,
    certain: &[(Measurement, Sign)],
) -> Result<(NoGoSystem, Vec<Vec<usize>>)> {
    check_measurement(g, global)?;
    let orbits = g.orbits(&letter_coloring(global))?;
    let mut orbit_of = vec![0; g.n()];
    for (i, orbit) in orbits.iter().enumerate() {
        for &j in orbit {
            orbit_of[j] = i;
        }
    }
    let mut system = NoGoSystem::new();
    for (sub, sign) in certain {
        check_measurement(g, sub)?;
        if !sub.is_submeasurement_of(global)? {
            return Err(Error::invalid(format!("{sub} is not part of {global}")));
        }
        let vars = sub
            .support()
            .into_iter()
            .map(|j| {
                system.var(ConstraintVar::OrbitFlip {
                    orbit: orbits[orbit_of[j]].clone(),
                })
            })
            .collect();
        system.add_equation(sub.to_string(), vars, sign.is_minus())?;
    }
    Ok((system, orbits))
}

/// The 2x3 counterexample embedded in a `(2+2p) x (3+2q)` grid: `p` rows
/// added above and below, `q` columns left and right. The central block is
/// measured with `Y` and every added site with `Z`, which keeps the global
/// measurement symmetric and lets the block's certain part carry the `Z`
/// letters its generators leave outside the block.
pub fn embedded_grid_counterexample(p: usize, q: usize) -> Result<(Graph, Measurement)> {
    let (rows, cols) = (2 + 2 * p, 3 + 2 * q);
    let g = Graph::grid(rows, cols)?;
    let letters = (0..rows * cols)
        .map(|j| {
            let (r, c) = (j / cols, j % cols);
            if (p..p + 2).contains(&r) && (q..q + 3).contains(&c) {
                Pauli::Y
            } else {
                Pauli::Z
            }
        })
        .collect();
    Ok((g, Measurement::new(letters)))
}

#[derive(Debug, Clone, Serialize)]
pub struct SiteInvarianceReport {
    pub global: Measurement,
    /// 1-based orbits of the letter-preserving automorphism group.
    pub orbits: Vec<Vec<usize>>,
    pub certain_count: usize,
    pub variables: Vec<ConstraintVar>,
    pub solution: Solution,
    /// The certain submeasurements named by an inconsistency certificate.
    pub witnesses: Vec<CertainWitness>,
    pub certificate_verified: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CertainWitness {
    pub sub: Measurement,
    pub sign: Sign,
    /// The equation in orbit variables, e.g. `flip{1,3,4,6} + ... = 1`.
    pub equation: String,
}

impl SiteInvarianceReport {
    pub fn is_inconsistent(&self) -> bool {
        !self.solution.is_consistent()
    }
}

/// Searches all certain submeasurements of `global` and asks whether any
/// assignment of orbit flips reproduces their signs.
pub fn site_invariance_check(
    g: &Graph,
    global: &Measurement,
    exec: Exec,
) -> Result<SiteInvarianceReport> {
    let certain = certain_submeasurements(g, global, exec)?;
    let (system, orbits) = site_invariance_system(g, global, &certain)?;
    let solution = gf2_solve(&system);
    let (witnesses, certificate_verified) = match &solution {
        Solution::Inconsistent { certificate } => {
            let w = certificate
                .iter()
                .map(|&e| {
                    let eq = &system.equations()[e];
                    let terms: Vec<String> = eq
                        .vars
                        .iter()
                        .map(|&v| system.variables()[v].to_string())
                        .collect();
                    CertainWitness {
                        sub: certain[e].0.clone(),
                        sign: certain[e].1,
                        equation: format!("{} = {}", terms.join(" + "), eq.rhs as u8),
                    }
                })
                .collect();
            (w, Some(verify_certificate(&system, certificate)))
        }
        Solution::Consistent { .. } => (Vec::new(), None),
    };
    Ok(SiteInvarianceReport {
        global: global.clone(),
        orbits: orbits.iter().map(|o| one_based(o)).collect(),
        certain_count: certain.len(),
        variables: system.variables().to_vec(),
        solution,
        witnesses,
        certificate_verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lhv::{NeighborCountRule, NoFlips};

    fn m(s: &str) -> Measurement {
        s.parse().unwrap()
    }

    #[test]
    fn view_round_trips() {
        let g = Graph::ring(12).unwrap();
        let global = m("YXYYYXYYYXYY");
        let v = View::of(&g, &global, 0, 1);
        assert_eq!(v.to_string(), "Y1 X2 Y12");
        assert_eq!(v.to_string().parse::<View>().unwrap(), v);
        assert!("Y2 X1".parse::<View>().is_err());
        assert!("Q1".parse::<View>().is_err());
        assert!("Y0".parse::<View>().is_err());
    }

    #[test]
    fn distance_bound_values() {
        assert_eq!(distance_bound(12).unwrap(), 1);
        assert_eq!(distance_bound(35).unwrap(), 1);
        assert_eq!(distance_bound(36).unwrap(), 5);
        assert_eq!(distance_bound(60).unwrap(), 9);
        assert!(distance_bound(11).is_err());
    }

    #[test]
    fn ring_partitions() {
        for f in [1, 3, 5] {
            let r = RingInstance::new(f).unwrap();
            let n = 12 * f;
            let mut evens: Vec<usize> = r.left.iter().chain(&r.right).copied().collect();
            evens.extend(r.vertices);
            evens.extend(r.midpoints);
            evens.sort_unstable();
            assert_eq!(evens, (0..n).filter(|j| j % 2 == 1).collect::<Vec<_>>());
            let mut covered: Vec<usize> = r.segments.concat();
            covered.extend(r.vertices);
            covered.extend(r.midpoints);
            covered.sort_unstable();
            assert_eq!(covered, (0..n).collect::<Vec<_>>());
        }
        assert!(RingInstance::new(2).is_err());
    }

    #[test]
    fn ring_cases_at_f1() {
        let r = RingInstance::new(1).unwrap();
        let got: Vec<(String, String, Sign)> = r
            .cases
            .iter()
            .map(|c| (c.vertex_letters.clone(), c.certain.to_string(), c.sign))
            .collect();
        let want = [
            ("XXX", "IXIXIXIXIXIX", Sign::Plus),
            ("YYY", "YXYIYXYIYXYI", Sign::Minus),
            ("YXY", "YIYYIXIXIXIY", Sign::Plus),
            ("YYX", "IXIYYIYYIXIX", Sign::Plus),
            ("XYY", "IXIXIXIYYIYY", Sign::Plus),
        ];
        for ((l, c, s), (wl, wc, ws)) in got.iter().zip(want) {
            assert_eq!((l.as_str(), c.as_str(), *s), (wl, wc, ws));
        }
        assert_eq!(r.cases[1].global.to_string(), "YXYYYXYYYXYY");
    }

    #[test]
    fn f1_certificate_uses_every_case() {
        let cert = ring_distance_certificate(12, 1).unwrap();
        assert_eq!(
            cert.equations,
            [
                "x2 x4 x6 x8 x10 x12 = 1",
                "y1^Y x2 y3^Y y5^Y x6 y7^Y y9^Y x10 y11^Y = -1",
                "y1^Y y3^Y y4 x6 x8 x10 y12 = 1",
                "x2 y4 y5^Y y7^Y y8 x10 x12 = 1",
                "x2 x4 x6 y8 y9^Y y11^Y y12 = 1",
            ]
        );
        assert_eq!(
            cert.solution,
            Solution::Inconsistent {
                certificate: vec![0, 1, 2, 3, 4]
            }
        );
        assert_eq!(cert.certificate_verified, Some(true));
        assert!(cert.crowded_sites.is_empty());
    }

    #[test]
    fn padded_rings_up_to_the_bound() {
        for n in [12, 14, 35, 36] {
            let bound = distance_bound(n).unwrap();
            for d in [1, bound] {
                let cert = ring_distance_certificate(n, d).unwrap();
                assert!(cert.is_inconsistent(), "n={n} d={d}");
                assert_eq!(cert.certificate_verified, Some(true));
                assert!(cert.crowded_sites.is_empty(), "n={n} d={d}");
            }
        }
    }

    #[test]
    fn full_visibility_is_consistent() {
        // Once every site sees the whole ring, the five globals give five
        // unrelated variable families and nothing constrains them jointly.
        let cert = ring_distance_certificate(12, 6).unwrap();
        assert!(cert.solution.is_consistent());
        assert!(!cert.crowded_sites.is_empty());
    }

    #[test]
    fn standard_rule_trips_on_some_ring_global() {
        let r = RingInstance::new(1).unwrap();
        let failing = r
            .cases
            .iter()
            .filter(|c| {
                !verify_all_submeasurements(
                    &NeighborCountRule::STANDARD,
                    &r.graph,
                    &c.global,
                    Exec::Parallel,
                )
                .unwrap()
                .is_clean()
            })
            .count();
        assert!(failing >= 1);
    }

    #[test]
    fn small_grid_mismatch_family() {
        let g = Graph::grid(2, 3).unwrap();
        let global = m("YYYYYY");
        let rep =
            verify_all_submeasurements(&NeighborCountRule::STANDARD, &g, &global, Exec::Sequential)
                .unwrap();
        assert_eq!(rep.subsets_checked, 64);
        let hit = rep
            .mismatches
            .iter()
            .find(|e| e.subset == [1, 2, 3, 5])
            .expect("known failing subset");
        assert_eq!(hit.sub.to_string(), "YYYIYI");
        assert_eq!(hit.oracle, Verdict::Deterministic(Sign::Minus));
        assert_eq!(hit.lhv, Verdict::Deterministic(Sign::Plus));
        let par =
            verify_all_submeasurements(&NeighborCountRule::STANDARD, &g, &global, Exec::Parallel)
                .unwrap();
        assert_eq!(rep, par);
    }

    #[test]
    fn no_communication_fails_somewhere() {
        let g = Graph::ring(12).unwrap();
        let rep =
            verify_all_submeasurements(&NoFlips, &g, &m("YXYYYXYYYXYY"), Exec::Sequential).unwrap();
        assert!(rep
            .mismatches
            .iter()
            .any(|e| e.sub.to_string() == "YXYIYXYIYXYI"));
    }

    #[test]
    fn small_grid_site_invariance() {
        let g = Graph::grid(2, 3).unwrap();
        let rep = site_invariance_check(&g, &m("YYYYYY"), Exec::Parallel).unwrap();
        assert_eq!(rep.orbits, vec![vec![1, 3, 4, 6], vec![2, 5]]);
        assert!(rep.is_inconsistent());
        assert_eq!(rep.certificate_verified, Some(true));
        assert_eq!(rep.witnesses.len(), 1);
        assert_eq!(rep.witnesses[0].sign, Sign::Minus);
        // Two corners and two middles: both flips cancel.
        let sub = rep.witnesses[0].sub.to_string();
        assert_eq!(sub.matches('Y').count(), 4);
    }

    #[test]
    fn guards() {
        let g = Graph::ring(12).unwrap();
        assert!(verify_all_submeasurements(&NoFlips, &g, &m("YYY"), Exec::Sequential).is_err());
        let big = Graph::ring(21).unwrap();
        let all_x = Measurement::new(vec![Pauli::X; 21]);
        assert!(matches!(
            certain_submeasurements(&big, &all_x, Exec::Sequential),
            Err(Error::UnsupportedSize { .. })
        ));
        let instances = [CertainInstance {
            label: "bad".into(),
            global: m("XIIIIIIIIIII"),
            certain: m("YIIIIIIIIIII"),
            sign: Sign::Plus,
        }];
        assert!(distance_constraint_system(&g, &instances, 1).is_err());
    }
}
