//! Deciding whether one codeword `λ`-dominates another.
//!
//! Two deciders share one verdict type: a brute-force enumeration of all
//! embedding pairs (the ground truth for short codewords) and a
//! branch-and-bound search that builds both embeddings left to right.
//!
//! The search state is the alignment `(p, i, j)`: `p` symbols written,
//! `i` bits of `c` and `j` bits of `c′` placed. Both counters of a
//! partial pair only grow, so a branch is cut as soon as either one
//! reaches `λ`. Condition (b) holds for some interval iff it holds for the
//! whole index range, because widening an interval never shrinks `J` or
//! its pad count; the search therefore tracks a single pad counter, while
//! the brute-force oracle scans intervals explicitly.

use std::collections::HashSet;

use serde::Serialize;

use super::code::{BalancedRepetitionCode, Codeword};
use super::embedding::{condition_a_count, condition_b_interval, Embedding, PAD};
use crate::error::{Error, Result};

/// Largest `2N` for which [`dominates`] enumerates all embedding pairs.
pub const EXHAUSTIVE_CAP: usize = 12;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum DominationVerdict {
    Dominates,
    /// Embeddings `e` of `c` and `e′` of `c′` for which neither condition
    /// holds.
    Counterexample { e: Embedding, e_prime: Embedding },
    BudgetExhausted { explored: u64 },
}

impl DominationVerdict {
    pub fn is_dominating(&self) -> bool {
        matches!(self, DominationVerdict::Dominates)
    }
}

fn check_pair(c: &Codeword, c_prime: &Codeword, lambda: usize) -> Result<()> {
    if c.len() != c_prime.len() {
        return Err(Error::DimensionMismatch { expected: c.len(), got: c_prime.len() });
    }
    if lambda == 0 {
        return Err(Error::Domain("lambda must be at least 1".into()));
    }
    Ok(())
}

/// Whether the pair `(e, e′)` satisfies condition (a) or (b).
pub fn pair_satisfies(e: &Embedding, e_prime: &Embedding, lambda: usize) -> bool {
    condition_a_count(e, e_prime) >= lambda || condition_b_interval(e, e_prime, lambda).is_some()
}

/// All embeddings of `c` into length `2|c|`.
pub fn all_embeddings(c: &Codeword) -> Vec<Embedding> {
    let n = c.len();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(2 * n);
    fn rec(c: &[u8], i: usize, len: usize, cur: &mut Vec<i8>, out: &mut Vec<Embedding>) {
        if cur.len() == len {
            out.push(Embedding { symbols: cur.clone() });
            return;
        }
        let left = len - cur.len();
        if i < c.len() {
            cur.push(c[i] as i8);
            rec(c, i + 1, len, cur, out);
            cur.pop();
        }
        if left > c.len() - i {
            cur.push(PAD);
            rec(c, i, len, cur, out);
            cur.pop();
        }
    }
    rec(&c.bits, 0, 2 * n, &mut cur, &mut out);
    out
}

/// Does `c_prime` `λ`-dominate `c`, by enumeration of every pair.
pub fn dominates_brute_force(c: &Codeword, c_prime: &Codeword, lambda: usize) -> Result<DominationVerdict> {
    check_pair(c, c_prime, lambda)?;
    let es = all_embeddings(c);
    let eps = all_embeddings(c_prime);
    for e in &es {
        for ep in &eps {
            if !pair_satisfies(e, ep, lambda) {
                return Ok(DominationVerdict::Counterexample { e: e.clone(), e_prime: ep.clone() });
            }
        }
    }
    Ok(DominationVerdict::Dominates)
}

struct Search<'a> {
    c: &'a [u8],
    cp: &'a [u8],
    lambda: usize,
    /// Condition (b) is attainable only when `N ≥ 4λ`.
    b_live: bool,
    budget: u64,
    explored: u64,
    dead: HashSet<(usize, usize, usize, usize, usize)>,
    e: Vec<i8>,
    ep: Vec<i8>,
}

enum Step {
    Found,
    Exhausted,
    Dead,
}

impl Search<'_> {
    fn run(&mut self, i: usize, j: usize, a: usize, b: usize) -> Step {
        let n = self.c.len();
        let p = self.e.len();
        if p == 2 * n {
            return Step::Found;
        }
        let key = (p, i, j, a, b);
        if self.dead.contains(&key) {
            return Step::Dead;
        }
        self.explored += 1;
        if self.explored > self.budget {
            return Step::Exhausted;
        }
        let left = 2 * n - p;
        let e_opts: &[Option<i8>] = match (i < n, left > n - i) {
            (true, true) => &[None, Some(PAD)],
            (true, false) => &[None],
            (false, _) => &[Some(PAD)],
        };
        let ep_opts: &[Option<i8>] = match (j < n, left > n - j) {
            (true, true) => &[None, Some(PAD)],
            (true, false) => &[None],
            (false, _) => &[Some(PAD)],
        };
        for &eo in e_opts {
            let x = eo.unwrap_or(if i < n { self.c[i] as i8 } else { PAD });
            for &yo in ep_opts {
                let y = yo.unwrap_or(if j < n { self.cp[j] as i8 } else { PAD });
                let na = a + usize::from(y == 1 && x < 1);
                let nb = b + usize::from(y != PAD && x == PAD);
                if na >= self.lambda || (self.b_live && nb >= self.lambda) {
                    continue;
                }
                self.e.push(x);
                self.ep.push(y);
                let ni = i + usize::from(x != PAD);
                let nj = j + usize::from(y != PAD);
                match self.run(ni, nj, na, nb) {
                    Step::Found => return Step::Found,
                    Step::Exhausted => return Step::Exhausted,
                    Step::Dead => {}
                }
                self.e.pop();
                self.ep.pop();
            }
        }
        self.dead.insert(key);
        Step::Dead
    }
}

/// Branch-and-bound decision with a cap on expanded search nodes.
pub fn dominates_search(c: &Codeword, c_prime: &Codeword, lambda: usize, budget: u64) -> Result<DominationVerdict> {
    check_pair(c, c_prime, lambda)?;
    let n = c.len();
    let mut s = Search {
        c: &c.bits,
        cp: &c_prime.bits,
        lambda,
        b_live: n >= 4 * lambda,
        budget,
        explored: 0,
        dead: HashSet::new(),
        e: Vec::with_capacity(2 * n),
        ep: Vec::with_capacity(2 * n),
    };
    Ok(match s.run(0, 0, 0, 0) {
        Step::Found => {
            DominationVerdict::Counterexample { e: Embedding { symbols: s.e }, e_prime: Embedding { symbols: s.ep } }
        }
        Step::Exhausted => DominationVerdict::BudgetExhausted { explored: s.explored - 1 },
        Step::Dead => DominationVerdict::Dominates,
    })
}

/// Enumerates when `2N ≤` [`EXHAUSTIVE_CAP`], searches otherwise.
pub fn dominates(c: &Codeword, c_prime: &Codeword, lambda: usize, budget: u64) -> Result<DominationVerdict> {
    if 2 * c.len() <= EXHAUSTIVE_CAP {
        dominates_brute_force(c, c_prime, lambda)
    } else {
        dominates_search(c, c_prime, lambda, budget)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CodeDominationReport {
    pub ell: usize,
    pub mu: usize,
    pub lambda: usize,
    pub pairs_checked: usize,
    pub exhaustive: bool,
    pub dominating: bool,
    pub budget_exhausted: bool,
    /// First failing ordered pair `(c, c′)` with its witness.
    pub failure: Option<(Codeword, Codeword, DominationVerdict)>,
}

/// Checks every ordered pair of distinct codewords.
pub fn code_is_dominating(code: &BalancedRepetitionCode, lambda: usize, budget: u64) -> Result<CodeDominationReport> {
    let words = code.codewords();
    let mut report = CodeDominationReport {
        ell: code.ell,
        mu: code.mu,
        lambda,
        pairs_checked: 0,
        exhaustive: code.n() * 2 <= EXHAUSTIVE_CAP,
        dominating: true,
        budget_exhausted: false,
        failure: None,
    };
    for c in &words {
        for cp in &words {
            if c == cp {
                continue;
            }
            report.pairs_checked += 1;
            let v = dominates(c, cp, lambda, budget)?;
            match v {
                DominationVerdict::Dominates => {}
                DominationVerdict::BudgetExhausted { .. } => {
                    report.budget_exhausted = true;
                    report.dominating = false;
                }
                DominationVerdict::Counterexample { .. } => {
                    report.dominating = false;
                    if report.failure.is_none() {
                        report.failure = Some((c.clone(), cp.clone(), v));
                    }
                }
            }
        }
    }
    Ok(report)
}
