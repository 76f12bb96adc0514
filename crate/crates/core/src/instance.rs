//! Satisfiability instances over a small clause vocabulary, their classical
//! energy function, and an exhaustive ground-truth solver.
//!
//! Bits are labeled `1..=n`. An assignment is stored with position `k - 1`
//! holding `z_k`, and the basis index of an assignment is
//! `Σ_k z_k · 2^(n-k)`: bit 1 is the most significant bit. Every other module
//! (Hamiltonians, measurement output, gate files) uses the same convention.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest instance `brute_force_solve` will enumerate.
pub const BRUTE_FORCE_MAX_BITS: usize = 24;

/// A signed literal: `+i` stands for `z_i`, `-i` for its negation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal(pub i64);

impl Literal {
    pub fn bit(self) -> usize {
        self.0.unsigned_abs() as usize
    }

    pub fn is_negated(self) -> bool {
        self.0 < 0
    }

    fn satisfied_by(self, value: u8) -> bool {
        (value == 1) != self.is_negated()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ClauseKind {
    /// Satisfied by `00` and `11`.
    Agree(usize, usize),
    /// Satisfied by `01` and `10`.
    Disagree(usize, usize),
    /// Premise first: violated only when `z_i = 1` and `z_j = 0`.
    Imply(usize, usize),
    /// Disjunction of one to three literals.
    Or(Vec<Literal>),
    /// Satisfied only when bit `i` equals `v`.
    OneBit(usize, u8),
    /// Satisfied only by the target string; must be the sole clause.
    GroverOracle(Assignment),
}

impl ClauseKind {
    /// Distinct bits the clause touches, ascending.
    pub fn bits(&self) -> Vec<usize> {
        let mut bits = match self {
            ClauseKind::Agree(i, j) | ClauseKind::Disagree(i, j) | ClauseKind::Imply(i, j) => {
                vec![*i, *j]
            }
            ClauseKind::Or(lits) => lits.iter().map(|l| l.bit()).collect(),
            ClauseKind::OneBit(i, _) => vec![*i],
            ClauseKind::GroverOracle(w) => (1..=w.len()).collect(),
        };
        bits.sort_unstable();
        bits.dedup();
        bits
    }

    /// Energy of the clause given a lookup `bit -> value`.
    fn energy_with(&self, value: impl Fn(usize) -> u8) -> u8 {
        let violated = match self {
            ClauseKind::Agree(i, j) => value(*i) != value(*j),
            ClauseKind::Disagree(i, j) => value(*i) == value(*j),
            ClauseKind::Imply(i, j) => value(*i) == 1 && value(*j) == 0,
            ClauseKind::Or(lits) => !lits.iter().any(|l| l.satisfied_by(value(l.bit()))),
            ClauseKind::OneBit(i, v) => value(*i) != *v,
            ClauseKind::GroverOracle(w) => w.0.iter().enumerate().any(|(k, &b)| value(k + 1) != b),
        };
        u8::from(violated)
    }

    /// Energy of the clause on the computational basis state with index `index`.
    pub fn energy_at_index(&self, n: usize, index: usize) -> u8 {
        self.energy_with(|bit| bit_of_index(n, index, bit))
    }

    fn validate(&self, n: usize) -> Result<()> {
        let in_range = |i: usize| {
            if (1..=n).contains(&i) {
                Ok(())
            } else {
                Err(Error::InvalidClause(format!(
                    "bit index {i} out of range 1..={n} in {self}"
                )))
            }
        };
        match self {
            ClauseKind::Agree(i, j) | ClauseKind::Disagree(i, j) | ClauseKind::Imply(i, j) => {
                in_range(*i)?;
                in_range(*j)?;
                if i == j {
                    return Err(Error::InvalidClause(format!(
                        "{self} must reference two distinct bits"
                    )));
                }
            }
            ClauseKind::Or(lits) => {
                if lits.is_empty() || lits.len() > 3 {
                    return Err(Error::InvalidClause(format!(
                        "or clause takes one to three literals, got {}",
                        lits.len()
                    )));
                }
                for l in lits {
                    if l.0 == 0 {
                        return Err(Error::InvalidClause("literal 0 is not allowed".into()));
                    }
                    in_range(l.bit())?;
                }
            }
            ClauseKind::OneBit(i, v) => {
                in_range(*i)?;
                if *v > 1 {
                    return Err(Error::InvalidClause(format!(
                        "one-bit clause value must be 0 or 1, got {v}"
                    )));
                }
            }
            ClauseKind::GroverOracle(w) => {
                if w.len() != n {
                    return Err(Error::InvalidClause(format!(
                        "grover target has {} bits, instance has {n}",
                        w.len()
                    )));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for ClauseKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClauseKind::Agree(i, j) => write!(f, "agree {i} {j}"),
            ClauseKind::Disagree(i, j) => write!(f, "disagree {i} {j}"),
            ClauseKind::Imply(i, j) => write!(f, "imply {i} {j}"),
            ClauseKind::Or(lits) => {
                write!(f, "or")?;
                for l in lits {
                    write!(f, " {}", l.0)?;
                }
                Ok(())
            }
            ClauseKind::OneBit(i, v) => write!(f, "one {i} {v}"),
            ClauseKind::GroverOracle(w) => write!(f, "grover {w}"),
        }
    }
}

/// Value of bit `bit` (1-based) in basis index `index` of an `n`-bit register.
#[inline]
pub fn bit_of_index(n: usize, index: usize, bit: usize) -> u8 {
    ((index >> (n - bit)) & 1) as u8
}

/// A length-`n` sequence of bit values; position `k - 1` holds `z_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Assignment(pub Vec<u8>);

impl Assignment {
    pub fn from_index(n: usize, index: usize) -> Self {
        Assignment((1..=n).map(|k| bit_of_index(n, index, k)).collect())
    }

    pub fn index(&self) -> usize {
        self.0.iter().fold(0, |acc, &b| (acc << 1) | b as usize)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Value of bit `k` (1-based).
    pub fn bit(&self, k: usize) -> u8 {
        self.0[k - 1]
    }

    pub fn complement(&self) -> Self {
        Assignment(self.0.iter().map(|b| 1 - b).collect())
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Assignment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(Error::InvalidArgument(format!(
                    "bitstring contains {other:?}"
                ))),
            })
            .collect::<Result<Vec<u8>>>()
            .map(Assignment)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SatInstance {
    n: usize,
    clauses: Vec<ClauseKind>,
}

impl SatInstance {
    pub fn new(n: usize, clauses: Vec<ClauseKind>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("an instance needs at least one bit".into()));
        }
        for c in &clauses {
            c.validate(n)?;
        }
        let grover = clauses
            .iter()
            .filter(|c| matches!(c, ClauseKind::GroverOracle(_)))
            .count();
        if grover > 0 && clauses.len() > 1 {
            return Err(Error::InvalidClause(
                "a grover oracle must be the only clause of its instance".into(),
            ));
        }
        Ok(SatInstance { n, clauses })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn clauses(&self) -> &[ClauseKind] {
        &self.clauses
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn has_grover_oracle(&self) -> bool {
        matches!(self.clauses.first(), Some(ClauseKind::GroverOracle(_)))
    }

    /// Number of clauses containing each bit, `d_1..d_n`.
    pub fn degrees(&self) -> Vec<usize> {
        let mut d = vec![0; self.n];
        for c in &self.clauses {
            for b in c.bits() {
                d[b - 1] += 1;
            }
        }
        d
    }

    /// Number of violated clauses on basis index `index`.
    pub fn energy_at_index(&self, index: usize) -> usize {
        self.clauses
            .iter()
            .map(|c| c.energy_at_index(self.n, index) as usize)
            .sum()
    }
}

pub fn clause_energy(clause: &ClauseKind, a: &Assignment) -> Result<u8> {
    clause.validate(a.len())?;
    Ok(clause.energy_with(|bit| a.bit(bit)))
}

pub fn total_energy(inst: &SatInstance, a: &Assignment) -> Result<usize> {
    if a.len() != inst.n {
        return Err(Error::DimensionMismatch {
            expected: inst.n,
            got: a.len(),
        });
    }
    inst.clauses
        .iter()
        .map(|c| clause_energy(c, a).map(usize::from))
        .sum()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Solution {
    pub min_energy: usize,
    /// All minimizing assignments, lexicographically sorted.
    pub minimizers: Vec<Assignment>,
}

/// Exhaustive scan of all `2^n` assignments.
pub fn brute_force_solve(inst: &SatInstance) -> Result<Solution> {
    if inst.n > BRUTE_FORCE_MAX_BITS {
        return Err(Error::Capacity {
            what: "brute-force enumeration",
            requested: inst.n,
            cap: BRUTE_FORCE_MAX_BITS,
        });
    }
    let energies = crate::par::map_indices(1usize << inst.n, |z| inst.energy_at_index(z));
    let min_energy = energies.iter().copied().min().unwrap_or(0);
    // index order is lexicographic order because bit 1 is the most significant
    let minimizers = energies
        .iter()
        .enumerate()
        .filter(|(_, &e)| e == min_energy)
        .map(|(z, _)| Assignment::from_index(inst.n, z))
        .collect();
    Ok(Solution {
        min_energy,
        minimizers,
    })
}

fn syntax(line: usize, message: impl Into<String>) -> Error {
    Error::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_num<T: FromStr>(tok: &str, line: usize) -> Result<T> {
    tok.parse()
        .map_err(|_| syntax(line, format!("expected an integer, found {tok:?}")))
}

/// Parses the line-oriented instance format:
///
/// ```text
/// # comment
/// p asat <n> <m>
/// agree i j | disagree i j | imply i j | or l1 l2 l3 | one i v | grover <bits>
/// ```
pub fn parse_instance(text: &str) -> Result<SatInstance> {
    let mut header: Option<(usize, usize)> = None;
    let mut clauses = Vec::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        let Some((n, m)) = header else {
            if toks.len() != 4 || toks[0] != "p" || toks[1] != "asat" {
                return Err(syntax(line, "expected header `p asat <n> <m>`"));
            }
            let n: usize = parse_num(toks[2], line)?;
            let m: usize = parse_num(toks[3], line)?;
            if n == 0 {
                return Err(syntax(line, "bit count must be at least 1"));
            }
            header = Some((n, m));
            continue;
        };
        if clauses.len() == m {
            return Err(syntax(line, format!("more than the declared {m} clauses")));
        }
        let arity = |k: usize| {
            if toks.len() == k + 1 {
                Ok(())
            } else {
                Err(syntax(
                    line,
                    format!("`{}` takes {k} arguments, found {}", toks[0], toks.len() - 1),
                ))
            }
        };
        let clause = match toks[0] {
            "agree" | "disagree" | "imply" => {
                arity(2)?;
                let i = parse_num(toks[1], line)?;
                let j = parse_num(toks[2], line)?;
                match toks[0] {
                    "agree" => ClauseKind::Agree(i, j),
                    "disagree" => ClauseKind::Disagree(i, j),
                    _ => ClauseKind::Imply(i, j),
                }
            }
            "or" => {
                if !(2..=4).contains(&toks.len()) {
                    return Err(syntax(line, "`or` takes one to three literals"));
                }
                let lits = toks[1..]
                    .iter()
                    .map(|t| parse_num(t, line).map(Literal))
                    .collect::<Result<Vec<_>>>()?;
                ClauseKind::Or(lits)
            }
            "one" => {
                arity(2)?;
                ClauseKind::OneBit(parse_num(toks[1], line)?, parse_num(toks[2], line)?)
            }
            "grover" => {
                arity(1)?;
                if clauses
                    .iter()
                    .any(|c| matches!(c, ClauseKind::GroverOracle(_)))
                {
                    return Err(syntax(line, "duplicate grover oracle"));
                }
                let w: Assignment = toks[1]
                    .parse()
                    .map_err(|e: Error| syntax(line, e.to_string()))?;
                ClauseKind::GroverOracle(w)
            }
            other => return Err(syntax(line, format!("unknown directive {other:?}"))),
        };
        clause
            .validate(n)
            .map_err(|e| syntax(line, e.to_string()))?;
        clauses.push(clause);
    }

    let Some((n, m)) = header else {
        return Err(syntax(last_line.max(1), "missing header `p asat <n> <m>`"));
    };
    if clauses.len() != m {
        return Err(syntax(
            last_line.max(1),
            format!("header declares {m} clauses, found {}", clauses.len()),
        ));
    }
    SatInstance::new(n, clauses).map_err(|e| syntax(last_line.max(1), e.to_string()))
}

pub fn serialize_instance(inst: &SatInstance) -> String {
    let mut out = format!("p asat {} {}\n", inst.n, inst.clauses.len());
    for c in &inst.clauses {
        out.push_str(&c.to_string());
        out.push('\n');
    }
    out
}

/// Generators for the structured instance families.
pub mod families {
    use super::*;

    /// Single one-bit clause satisfied by `z_1 = 1`.
    pub fn one_qubit() -> SatInstance {
        SatInstance::new(1, vec![ClauseKind::OneBit(1, 1)]).expect("valid")
    }

    /// Ring of `n` clauses on adjacent bits `(j, j+1)`, bit `n+1` identified
    /// with bit 1. `disagree[j]` selects the kind of clause `j + 1`.
    pub fn ring(disagree: &[bool]) -> Result<SatInstance> {
        let n = disagree.len();
        if n < 3 {
            return Err(Error::InvalidArgument(format!(
                "a ring needs at least 3 bits, got {n}"
            )));
        }
        let clauses = disagree
            .iter()
            .enumerate()
            .map(|(j, &d)| {
                let (a, b) = (j + 1, (j + 1) % n + 1);
                if d {
                    ClauseKind::Disagree(a, b)
                } else {
                    ClauseKind::Agree(a, b)
                }
            })
            .collect();
        SatInstance::new(n, clauses)
    }

    pub fn agree_ring(n: usize) -> Result<SatInstance> {
        ring(&vec![false; n])
    }

    pub fn grover(target: Assignment) -> Result<SatInstance> {
        SatInstance::new(target.len(), vec![ClauseKind::GroverOracle(target)])
    }

    /// `n + 1` bits; bit 1 is the hub. One clause forces the hub to 1 and
    /// `n` implications run from the hub to every other bit.
    pub fn bush(n: usize) -> Result<SatInstance> {
        if n == 0 {
            return Err(Error::InvalidArgument("bush needs n >= 1".into()));
        }
        let mut clauses = vec![ClauseKind::OneBit(1, 1)];
        clauses.extend((2..=n + 1).map(|j| ClauseKind::Imply(1, j)));
        SatInstance::new(n + 1, clauses)
    }

    /// One agree/disagree clause on every pair of bits, consistent with
    /// `solution` (agree where the two target bits match).
    pub fn overconstrained(solution: &Assignment) -> Result<SatInstance> {
        let n = solution.len();
        if n < 2 {
            return Err(Error::InvalidArgument("overconstrained needs n >= 2".into()));
        }
        let mut clauses = Vec::with_capacity(n * (n - 1) / 2);
        for j in 1..=n {
            for k in j + 1..=n {
                clauses.push(if solution.bit(j) == solution.bit(k) {
                    ClauseKind::Agree(j, k)
                } else {
                    ClauseKind::Disagree(j, k)
                });
            }
        }
        SatInstance::new(n, clauses)
    }

    /// The three-bit 2-SAT example with unique solution `011`.
    pub fn three_bit_example() -> SatInstance {
        SatInstance::new(
            3,
            vec![
                ClauseKind::Imply(1, 2),
                ClauseKind::Disagree(1, 3),
                ClauseKind::Agree(2, 3),
            ],
        )
        .expect("valid")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a(s: &str) -> Assignment {
        s.parse().unwrap()
    }

    #[test]
    fn clause_energies() {
        assert_eq!(clause_energy(&ClauseKind::Imply(1, 2), &a("10")).unwrap(), 1);
        for ok in ["00", "01", "11"] {
            assert_eq!(clause_energy(&ClauseKind::Imply(1, 2), &a(ok)).unwrap(), 0);
        }
        assert_eq!(clause_energy(&ClauseKind::Agree(1, 2), &a("00")).unwrap(), 0);
        assert_eq!(clause_energy(&ClauseKind::Agree(1, 2), &a("01")).unwrap(), 1);
        assert_eq!(clause_energy(&ClauseKind::Disagree(1, 2), &a("11")).unwrap(), 1);
        let g = ClauseKind::GroverOracle(a("101"));
        assert_eq!(clause_energy(&g, &a("101")).unwrap(), 0);
        assert_eq!(clause_energy(&g, &a("100")).unwrap(), 1);
        let or = ClauseKind::Or(vec![Literal(1), Literal(-2), Literal(3)]);
        assert_eq!(clause_energy(&or, &a("010")).unwrap(), 1);
        assert_eq!(clause_energy(&or, &a("000")).unwrap(), 0);
    }

    #[test]
    fn out_of_range_clause_is_rejected() {
        let err = clause_energy(&ClauseKind::Agree(1, 3), &a("01")).unwrap_err();
        assert!(matches!(err, Error::InvalidClause(_)));
        assert!(SatInstance::new(2, vec![ClauseKind::Imply(2, 2)]).is_err());
    }

    #[test]
    fn three_bit_example_energies() {
        let inst = families::three_bit_example();
        assert_eq!(total_energy(&inst, &a("011")).unwrap(), 0);
        // imply(1,2) violated, disagree(1,3) satisfied, agree(2,3) satisfied
        assert_eq!(total_energy(&inst, &a("100")).unwrap(), 1);
        let empty = SatInstance::new(4, vec![]).unwrap();
        assert_eq!(total_energy(&empty, &a("1010")).unwrap(), 0);
    }

    #[test]
    fn brute_force_examples() {
        let sol = brute_force_solve(&families::three_bit_example()).unwrap();
        assert_eq!(sol.min_energy, 0);
        assert_eq!(sol.minimizers, vec![a("011")]);

        let sol = brute_force_solve(&families::agree_ring(4).unwrap()).unwrap();
        assert_eq!(sol.minimizers, vec![a("0000"), a("1111")]);

        let sol = brute_force_solve(&families::one_qubit()).unwrap();
        assert_eq!((sol.min_energy, sol.minimizers), (0, vec![a("1")]));
    }

    #[test]
    fn brute_force_capacity() {
        let inst = SatInstance::new(25, vec![]).unwrap();
        assert!(matches!(
            brute_force_solve(&inst),
            Err(Error::Capacity { .. })
        ));
    }

    #[test]
    fn parse_examples() {
        let inst = parse_instance("p asat 2 1\nagree 1 2\n").unwrap();
        assert_eq!(inst, SatInstance::new(2, vec![ClauseKind::Agree(1, 2)]).unwrap());

        let inst = parse_instance("p asat 3 3\nimply 1 2\ndisagree 1 3\nagree 2 3\n").unwrap();
        assert_eq!(inst, families::three_bit_example());

        let err = parse_instance("p asat 2 1\nagree 1\n").unwrap_err();
        assert!(matches!(err, Error::Syntax { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(
            parse_instance("p asat 2 1\nagree 1 5\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
        assert!(matches!(
            parse_instance("p asat 2 2\ngrover 01\ngrover 10\n"),
            Err(Error::Syntax { line: 3, .. })
        ));
        assert!(matches!(
            parse_instance("agree 1 2\n"),
            Err(Error::Syntax { line: 1, .. })
        ));
        assert!(matches!(
            parse_instance("p asat 2 2\nagree 1 2\n"),
            Err(Error::Syntax { .. })
        ));
        assert!(matches!(
            parse_instance("p asat 3 1\ngrover 01\n"),
            Err(Error::Syntax { line: 2, .. })
        ));
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# bush\n\np asat 2 2 # header\none 1 1\n  imply 1 2\n";
        let inst = parse_instance(text).unwrap();
        assert_eq!(inst.len(), 2);
        assert_eq!(inst.degrees(), vec![2, 1]);
    }

    #[test]
    fn index_convention_is_msb_first() {
        assert_eq!(a("011").index(), 3);
        assert_eq!(a("100").index(), 4);
        assert_eq!(Assignment::from_index(3, 6), a("110"));
    }

    #[test]
    fn family_degrees() {
        assert!(families::agree_ring(6).unwrap().degrees().iter().all(|&d| d == 2));
        let bush = families::bush(5).unwrap();
        assert_eq!(bush.degrees(), vec![6, 1, 1, 1, 1, 1]);
        let over = families::overconstrained(&a("01101")).unwrap();
        assert!(over.degrees().iter().all(|&d| d == 4));
        assert_eq!(brute_force_solve(&over).unwrap().minimizers, vec![a("01101"), a("10010")]);
    }
}
