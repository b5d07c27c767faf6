//! Coset enumeration, relator-table (HLT) strategy with immediate
//! coincidence processing.

use std::collections::VecDeque;

use super::word::{Letter, Presentation, Word};
use crate::error::{Error, Result};

/// Default cap on the number of cosets ever defined.
pub const DEFAULT_COSET_CAP: usize = 50_000;

const NONE: usize = usize::MAX;

/// A complete coset table. Coset `0` is the subgroup itself; the rest are
/// numbered in order of first definition after collapsing.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CosetTable {
    num_gens: usize,
    /// `rows[c][2g]` is `c·g`, `rows[c][2g+1]` is `c·g⁻¹`.
    rows: Vec<Vec<usize>>,
    reps: Vec<Word>,
}

impl CosetTable {
    pub fn index(&self) -> usize {
        self.rows.len()
    }

    pub fn num_generators(&self) -> usize {
        self.num_gens
    }

    pub fn act_letter(&self, c: usize, l: Letter) -> usize {
        self.rows[c][l.column()]
    }

    /// `c·w`.
    pub fn act(&self, c: usize, w: &Word) -> usize {
        w.letters().iter().fold(c, |c, &l| self.act_letter(c, l))
    }

    /// The coset of `w`, i.e. `0·w`.
    pub fn coset_of(&self, w: &Word) -> usize {
        self.act(0, w)
    }

    /// Whether `w` lies in the subgroup.
    pub fn contains(&self, w: &Word) -> bool {
        self.coset_of(w) == 0
    }

    /// Images of the cosets under generator `g`.
    pub fn generator_permutation(&self, g: usize) -> Vec<usize> {
        self.rows.iter().map(|r| r[2 * g]).collect()
    }

    /// A word `w` with `0·w = c`, found breadth first; `rep(0)` is empty.
    pub fn representative(&self, c: usize) -> &Word {
        &self.reps[c]
    }

    pub fn rows(&self) -> &[Vec<usize>] {
        &self.rows
    }
}

struct Enumerator<'a> {
    pres: &'a Presentation,
    cols: usize,
    table: Vec<Vec<usize>>,
    parent: Vec<usize>,
    queue: VecDeque<usize>,
    cap: usize,
}

fn inv_col(x: usize) -> usize {
    x ^ 1
}

impl Enumerator<'_> {
    fn live(&self, c: usize) -> bool {
        self.parent[c] == c
    }

    fn rep(&mut self, c: usize) -> usize {
        let mut r = c;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut x = c;
        while self.parent[x] != r {
            let next = self.parent[x];
            self.parent[x] = r;
            x = next;
        }
        r
    }

    fn define(&mut self, c: usize, x: usize) -> Result<()> {
        if self.table.len() >= self.cap {
            return Err(Error::CapExceeded {
                what: "coset enumeration",
                cap: self.cap,
            });
        }
        let d = self.table.len();
        self.table.push(vec![NONE; self.cols]);
        self.parent.push(d);
        self.table[c][x] = d;
        self.table[d][inv_col(x)] = c;
        Ok(())
    }

    fn merge(&mut self, a: usize, b: usize) {
        let (a, b) = (self.rep(a), self.rep(b));
        if a == b {
            return;
        }
        let (lo, hi) = (a.min(b), a.max(b));
        self.parent[hi] = lo;
        self.queue.push_back(hi);
    }

    fn coincidence(&mut self, a: usize, b: usize) {
        self.merge(a, b);
        while let Some(e) = self.queue.pop_front() {
            for x in 0..self.cols {
                let f = self.table[e][x];
                if f == NONE {
                    continue;
                }
                if self.table[f][inv_col(x)] == e {
                    self.table[f][inv_col(x)] = NONE;
                }
                let e1 = self.rep(e);
                let f1 = self.rep(f);
                if self.table[e1][x] != NONE {
                    let t = self.table[e1][x];
                    self.merge(f1, t);
                } else if self.table[f1][inv_col(x)] != NONE {
                    let t = self.table[f1][inv_col(x)];
                    self.merge(e1, t);
                } else {
                    self.table[e1][x] = f1;
                    self.table[f1][inv_col(x)] = e1;
                }
            }
        }
    }

    /// Traces `w` from `c` forwards and backwards, closing a one-letter gap
    /// by deduction and defining new cosets for wider gaps.
    fn scan_and_fill(&mut self, c: usize, w: &[usize]) -> Result<()> {
        if w.is_empty() {
            return Ok(());
        }
        // The untraced middle of the word is `w[i..j]`.
        let (mut f, mut b) = (c, c);
        let (mut i, mut j) = (0usize, w.len());
        loop {
            while i < j && self.table[f][w[i]] != NONE {
                f = self.table[f][w[i]];
                i += 1;
            }
            if i == j {
                self.coincidence(f, b);
                return Ok(());
            }
            while j > i && self.table[b][inv_col(w[j - 1])] != NONE {
                b = self.table[b][inv_col(w[j - 1])];
                j -= 1;
            }
            if i == j {
                self.coincidence(f, b);
                return Ok(());
            }
            if j == i + 1 {
                self.table[f][w[i]] = b;
                self.table[b][inv_col(w[i])] = f;
                return Ok(());
            }
            self.define(f, w[i])?;
        }
    }
}

fn columns(w: &Word) -> Vec<usize> {
    w.letters().iter().map(|l| l.column()).collect()
}

/// Enumerates the cosets of `⟨subgroup_gens⟩`. Fails with a budget error
/// when more than `cap` cosets get defined.
pub fn todd_coxeter(pres: &Presentation, subgroup_gens: &[Word], cap: usize) -> Result<CosetTable> {
    for w in subgroup_gens {
        pres.check_word(w)?;
    }
    let cols = 2 * pres.num_generators();
    let mut e = Enumerator {
        pres,
        cols,
        table: vec![vec![NONE; cols]],
        parent: vec![0],
        queue: VecDeque::new(),
        cap: cap.max(1),
    };
    let relators: Vec<Vec<usize>> = e.pres.relators().iter().map(columns).collect();
    for w in subgroup_gens {
        e.scan_and_fill(0, &columns(w))?;
    }
    let mut a = 0;
    while a < e.table.len() {
        for r in &relators {
            if !e.live(a) {
                break;
            }
            e.scan_and_fill(a, r)?;
        }
        if e.live(a) {
            for x in 0..cols {
                if e.table[a][x] == NONE {
                    e.define(a, x)?;
                }
            }
        }
        a += 1;
    }
    compact(e, pres)
}

/// Renumbers live cosets in definition order, then checks completeness and
/// that every relator acts trivially.
fn compact(mut e: Enumerator<'_>, pres: &Presentation) -> Result<CosetTable> {
    let live: Vec<usize> = (0..e.table.len()).filter(|&c| e.live(c)).collect();
    let mut new_index = vec![NONE; e.table.len()];
    for (i, &c) in live.iter().enumerate() {
        new_index[c] = i;
    }
    let mut rows = Vec::with_capacity(live.len());
    for &c in &live {
        let mut row = Vec::with_capacity(e.cols);
        for x in 0..e.cols {
            let t = e.table[c][x];
            if t == NONE {
                return Err(Error::Unsupported(format!("coset table incomplete at coset {c}")));
            }
            let t = e.rep(t);
            row.push(new_index[t]);
        }
        rows.push(row);
    }
    let num_gens = pres.num_generators();
    let mut table = CosetTable {
        num_gens,
        rows,
        reps: Vec::new(),
    };
    for (k, r) in pres.relators().iter().enumerate() {
        if let Some(c) = (0..table.index()).find(|&c| table.act(c, r) != c) {
            return Err(Error::RelatorViolation {
                relator: k,
                detail: format!("coset {c} is moved"),
            });
        }
    }
    table.reps = representatives(&table);
    Ok(table)
}

fn representatives(table: &CosetTable) -> Vec<Word> {
    let n = table.index();
    let mut reps: Vec<Option<Word>> = vec![None; n];
    reps[0] = Some(Word::empty());
    let mut queue = VecDeque::from([0usize]);
    while let Some(c) = queue.pop_front() {
        for g in 0..table.num_gens {
            for inverse in [false, true] {
                let l = Letter::new(g, inverse);
                let d = table.act_letter(c, l);
                if reps[d].is_none() {
                    reps[d] = Some(reps[c].as_ref().unwrap().concat(&Word::new([l])));
                    queue.push_back(d);
                }
            }
        }
    }
    reps.into_iter().map(|r| r.expect("coset table is connected")).collect()
}
