//! Parity constraint systems over GF(2) and a Gauss-Jordan solver that
//! returns either a satisfying assignment or a certificate of inconsistency.

use std::collections::BTreeMap;

use fixedbitset::FixedBitSet;
use serde::Serialize;

use crate::error::{Error, Result};

/// `sum of vars = rhs (mod 2)`. `vars` is a multiset of variable indices, so a
/// variable listed twice cancels.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Equation {
    pub label: String,
    pub vars: Vec<usize>,
    pub rhs: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct ParityConstraintSystem<K> {
    variables: Vec<K>,
    #[serde(skip)]
    index: BTreeMap<K, usize>,
    equations: Vec<Equation>,
}

impl<K: Ord + Clone> Default for ParityConstraintSystem<K> {
    fn default() -> Self {
        ParityConstraintSystem {
            variables: Vec::new(),
            index: BTreeMap::new(),
            equations: Vec::new(),
        }
    }
}

impl<K: Ord + Clone> ParityConstraintSystem<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `key`, declaring it on first use. Equal keys share a variable.
    pub fn var(&mut self, key: K) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let i = self.variables.len();
        self.variables.push(key.clone());
        self.index.insert(key, i);
        i
    }

    pub fn lookup(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn add_equation(
        &mut self,
        label: impl Into<String>,
        vars: Vec<usize>,
        rhs: bool,
    ) -> Result<()> {
        if let Some(&bad) = vars.iter().find(|&&v| v >= self.variables.len()) {
            return Err(Error::invalid(format!(
                "equation references undeclared variable {bad}"
            )));
        }
        self.equations.push(Equation {
            label: label.into(),
            vars,
            rhs,
        });
        Ok(())
    }

    pub fn variables(&self) -> &[K] {
        &self.variables
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Solution {
    Consistent {
        witness: Vec<bool>,
    },
    /// Indices of equations whose sum reads `0 = 1`.
    Inconsistent {
        certificate: Vec<usize>,
    },
}

impl Solution {
    pub fn is_consistent(&self) -> bool {
        matches!(self, Solution::Consistent { .. })
    }
}

struct Row {
    vars: FixedBitSet,
    rhs: bool,
    combo: FixedBitSet,
}

pub fn gf2_solve<K>(system: &ParityConstraintSystem<K>) -> Solution {
    let nvars = system.variables.len();
    let neqs = system.equations.len();
    let mut rows: Vec<Row> = system
        .equations
        .iter()
        .enumerate()
        .map(|(i, eq)| {
            let mut vars = FixedBitSet::with_capacity(nvars);
            for &v in &eq.vars {
                vars.toggle(v);
            }
            let mut combo = FixedBitSet::with_capacity(neqs);
            combo.insert(i);
            Row {
                vars,
                rhs: eq.rhs,
                combo,
            }
        })
        .collect();

    let mut pivots = Vec::new();
    let mut next = 0;
    for col in 0..nvars {
        let Some(p) = (next..rows.len()).find(|&r| rows[r].vars.contains(col)) else {
            continue;
        };
        rows.swap(next, p);
        let (head, rest) = rows.split_at_mut(next);
        let (pivot, tail) = rest.split_first_mut().unwrap();
        for row in head.iter_mut().chain(tail.iter_mut()) {
            if row.vars.contains(col) {
                row.vars.symmetric_difference_with(&pivot.vars);
                row.combo.symmetric_difference_with(&pivot.combo);
                row.rhs ^= pivot.rhs;
            }
        }
        pivots.push((next, col));
        next += 1;
    }

    if let Some(bad) = rows[next..].iter().find(|r| r.rhs) {
        return Solution::Inconsistent {
            certificate: bad.combo.ones().collect(),
        };
    }
    // Reduced form: with every free variable at 0, each pivot equals its rhs.
    let mut witness = vec![false; nvars];
    for (r, col) in pivots {
        witness[col] = rows[r].rhs;
    }
    Solution::Consistent { witness }
}

/// Checks a certificate by direct counting: every variable occurs an even
/// number of times across the chosen equations and their right-hand sides sum
/// to 1.
pub fn verify_certificate<K>(system: &ParityConstraintSystem<K>, certificate: &[usize]) -> bool {
    let mut counts = vec![0usize; system.variables.len()];
    let mut rhs = false;
    for &e in certificate {
        let Some(eq) = system.equations.get(e) else {
            return false;
        };
        for &v in &eq.vars {
            counts[v] += 1;
        }
        rhs ^= eq.rhs;
    }
    rhs && counts.iter().all(|c| c % 2 == 0)
}

pub fn verify_witness<K>(system: &ParityConstraintSystem<K>, witness: &[bool]) -> bool {
    witness.len() == system.variables.len()
        && system
            .equations
            .iter()
            .all(|eq| eq.vars.iter().fold(false, |acc, &v| acc ^ witness[v]) == eq.rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn empty_system_is_consistent() {
        let s = ParityConstraintSystem::<u32>::new();
        assert_eq!(gf2_solve(&s), Solution::Consistent { witness: vec![] });
    }

    #[test]
    fn shared_keys_merge() {
        let mut s = ParityConstraintSystem::new();
        let a = s.var("a");
        let b = s.var("b");
        assert_eq!(s.var("a"), a);
        assert_eq!(s.lookup(&"b"), Some(b));
        assert!(s.add_equation("bad", vec![7], true).is_err());
    }

    #[test]
    fn doubled_variables_cancel() {
        let mut s = ParityConstraintSystem::new();
        let c = s.var("corner");
        let m = s.var("middle");
        s.add_equation("sub", vec![c, m, c, m], true).unwrap();
        assert_eq!(
            gf2_solve(&s),
            Solution::Inconsistent {
                certificate: vec![0]
            }
        );
    }

    #[test]
    fn triangle_of_parities() {
        // a+b=1, b+c=1, a+c=1 sums to 0=1.
        let mut s = ParityConstraintSystem::new();
        let (a, b, c) = (s.var('a'), s.var('b'), s.var('c'));
        s.add_equation("ab", vec![a, b], true).unwrap();
        s.add_equation("bc", vec![b, c], true).unwrap();
        s.add_equation("ac", vec![a, c], true).unwrap();
        assert_eq!(
            gf2_solve(&s),
            Solution::Inconsistent {
                certificate: vec![0, 1, 2]
            }
        );
        // Flipping one rhs makes it solvable.
        let mut t = ParityConstraintSystem::new();
        let (a, b, c) = (t.var('a'), t.var('b'), t.var('c'));
        t.add_equation("ab", vec![a, b], true).unwrap();
        t.add_equation("bc", vec![b, c], true).unwrap();
        t.add_equation("ac", vec![a, c], false).unwrap();
        let Solution::Consistent { witness } = gf2_solve(&t) else {
            panic!()
        };
        assert!(verify_witness(&t, &witness));
    }

    fn random_system() -> impl Strategy<Value = ParityConstraintSystem<usize>> {
        (1usize..10, 0usize..14).prop_flat_map(|(nv, ne)| {
            proptest::collection::vec((proptest::collection::vec(0..nv, 0..6), any::<bool>()), ne)
                .prop_map(move |eqs| {
                    let mut s = ParityConstraintSystem::new();
                    for v in 0..nv {
                        s.var(v);
                    }
                    for (i, (vars, rhs)) in eqs.into_iter().enumerate() {
                        s.add_equation(format!("e{i}"), vars, rhs).unwrap();
                    }
                    s
                })
        })
    }

    fn brute_force_consistent(s: &ParityConstraintSystem<usize>) -> bool {
        let nv = s.variables().len();
        (0..1u32 << nv).any(|bits| {
            let w: Vec<bool> = (0..nv).map(|i| bits >> i & 1 == 1).collect();
            verify_witness(s, &w)
        })
    }

    proptest! {
        #[test]
        fn solver_matches_brute_force(s in random_system()) {
            let sol = gf2_solve(&s);
            prop_assert_eq!(sol.is_consistent(), brute_force_consistent(&s));
            match sol {
                Solution::Consistent { witness } => prop_assert!(verify_witness(&s, &witness)),
                Solution::Inconsistent { certificate } => prop_assert!(verify_certificate(&s, &certificate)),
            }
        }
    }
}
