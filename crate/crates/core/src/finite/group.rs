use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::hash::Hash;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Default cap on the size of a closure.
pub const DEFAULT_CLOSURE_CAP: usize = 20_000;

/// Tables up to this order get an exhaustive associativity check.
const EXHAUSTIVE_ASSOC_ORDER: usize = 64;

/// Triples sampled for associativity above [`EXHAUSTIVE_ASSOC_ORDER`].
const ASSOC_SAMPLES: usize = 20_000;

/// A finite group on the indices `0..n`, identity `0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FiniteGroupTable {
    order: usize,
    mul: Vec<usize>,
    inv: Vec<usize>,
    names: Option<Vec<String>>,
}

/// A violated group axiom, with the offending indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AxiomViolation {
    Shape(String),
    Identity(usize),
    NoInverse(usize),
    Associativity(usize, usize, usize),
}

impl fmt::Display for AxiomViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxiomViolation::Shape(s) => write!(f, "{s}"),
            AxiomViolation::Identity(x) => write!(f, "0 is not a two-sided identity at {x}"),
            AxiomViolation::NoInverse(x) => write!(f, "{x} has no inverse"),
            AxiomViolation::Associativity(a, b, c) => write!(f, "({a}*{b})*{c} != {a}*({b}*{c})"),
        }
    }
}

impl FiniteGroupTable {
    /// Builds a group from its multiplication table and checks the axioms.
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self> {
        let g = Self::from_table_unchecked(table)?;
        g.verify().map_err(|v| Error::InvalidTable(v.to_string()))?;
        Ok(g)
    }

    /// Builds a table without checking the group axioms; only the shape and
    /// index ranges are validated. Used to feed deliberately broken tables
    /// to the checkers.
    pub fn from_table_unchecked(table: Vec<Vec<usize>>) -> Result<Self> {
        let n = table.len();
        if n == 0 {
            return Err(Error::InvalidTable("empty table".into()));
        }
        let mut mul = Vec::with_capacity(n * n);
        for (i, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(Error::InvalidTable(format!("row {i} has length {}", row.len())));
            }
            for &x in row {
                if x >= n {
                    return Err(Error::ElementOutOfRange { index: x, order: n });
                }
                mul.push(x);
            }
        }
        let inv = (0..n)
            .map(|x| (0..n).find(|&y| mul[x * n + y] == 0).unwrap_or(0))
            .collect();
        Ok(FiniteGroupTable {
            order: n,
            mul,
            inv,
            names: None,
        })
    }

    /// Checks identity, inverses and associativity. Associativity is
    /// exhaustive up to order 64 and sampled from a fixed seed above.
    pub fn verify(&self) -> std::result::Result<(), AxiomViolation> {
        let n = self.order;
        for x in 0..n {
            if self.mul(0, x) != x || self.mul(x, 0) != x {
                return Err(AxiomViolation::Identity(x));
            }
        }
        for x in 0..n {
            let y = self.inv[x];
            if self.mul(x, y) != 0 || self.mul(y, x) != 0 {
                return Err(AxiomViolation::NoInverse(x));
            }
        }
        let assoc = |a: usize, b: usize, c: usize| self.mul(self.mul(a, b), c) == self.mul(a, self.mul(b, c));
        if n <= EXHAUSTIVE_ASSOC_ORDER {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if !assoc(a, b, c) {
                            return Err(AxiomViolation::Associativity(a, b, c));
                        }
                    }
                }
            }
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            for _ in 0..ASSOC_SAMPLES {
                let (a, b, c) = (rng.gen_range(0..n), rng.gen_range(0..n), rng.gen_range(0..n));
                if !assoc(a, b, c) {
                    return Err(AxiomViolation::Associativity(a, b, c));
                }
            }
        }
        Ok(())
    }

    pub fn trivial() -> Self {
        Self::cyclic(1)
    }

    /// `Z/n`, index `k` standing for `k·1`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n >= 1, "cyclic group needs n >= 1");
        Self::from_fn(n, |a, b| (a + b) % n)
    }

    /// Symmetries of the regular `n`-gon, order `2n`. Index `k + n·e` stands
    /// for `r^k s^e`.
    pub fn dihedral(n: usize) -> Self {
        assert!(n >= 1, "dihedral group needs n >= 1");
        Self::from_fn(2 * n, |a, b| {
            let (k, e) = (a % n, a / n);
            let (l, f) = (b % n, b / n);
            let rot = if e == 0 { (k + l) % n } else { (k + n - l) % n };
            rot + n * (e ^ f)
        })
    }

    /// `⟨a, x | a^{2n}, x² = a^n, x a x⁻¹ = a⁻¹⟩`, order `4n`. Index
    /// `k + 2n·e` stands for `a^k x^e`.
    pub fn dicyclic(n: usize) -> Self {
        assert!(n >= 1, "dicyclic group needs n >= 1");
        let m = 2 * n;
        Self::from_fn(2 * m, |a, b| {
            let (k, e) = (a % m, a / m);
            let (l, f) = (b % m, b / m);
            let mut rot = if e == 0 { k + l } else { k + m - l };
            if e == 1 && f == 1 {
                rot += n;
            }
            rot % m + m * (e ^ f)
        })
    }

    /// The quaternion group of order 8.
    pub fn quaternion() -> Self {
        Self::dicyclic(2)
    }

    /// `S_n` for `n ≤ 5`, generated by `(0 1)` and `(0 1 … n−1)`.
    pub fn symmetric(n: usize) -> Result<Self> {
        if n > 5 {
            return Err(Error::Unsupported(format!("symmetric({n}): only n <= 5 is built in")));
        }
        if n < 2 {
            return Ok(Self::trivial());
        }
        let mut transposition: Vec<usize> = (0..n).collect();
        transposition.swap(0, 1);
        let cycle: Vec<usize> = (0..n).map(|i| (i + 1) % n).collect();
        group_from_permutations(&[transposition, cycle], DEFAULT_CLOSURE_CAP)
    }

    /// `A_4`, generated by `(0 1 2)` and `(0 1)(2 3)`.
    pub fn alternating4() -> Self {
        group_from_permutations(&[vec![1, 2, 0, 3], vec![1, 0, 3, 2]], DEFAULT_CLOSURE_CAP).expect("A4 closure")
    }

    /// `A × B`, index `i·|B| + j` standing for `(i, j)`.
    pub fn direct_product(a: &Self, b: &Self) -> Self {
        let nb = b.order;
        Self::from_fn(a.order * nb, |x, y| a.mul(x / nb, y / nb) * nb + b.mul(x % nb, y % nb))
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> usize) -> Self {
        let mut mul = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                mul.push(f(a, b));
            }
        }
        let inv = (0..n).map(|x| (0..n).find(|&y| mul[x * n + y] == 0).expect("inverse")).collect();
        FiniteGroupTable {
            order: n,
            mul,
            inv,
            names: None,
        }
    }

    pub fn with_names(mut self, names: Vec<String>) -> Result<Self> {
        if names.len() != self.order {
            return Err(Error::DimensionMismatch {
                expected: self.order,
                found: names.len(),
            });
        }
        self.names = Some(names);
        Ok(self)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn identity(&self) -> usize {
        0
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.mul[a * self.order + b]
    }

    pub fn inv(&self, a: usize) -> usize {
        self.inv[a]
    }

    pub fn pow(&self, a: usize, k: u64) -> usize {
        (0..k).fold(0, |acc, _| self.mul(acc, a))
    }

    pub fn element_order(&self, a: usize) -> usize {
        let mut x = a;
        let mut k = 1;
        while x != 0 {
            x = self.mul(x, a);
            k += 1;
        }
        k
    }

    pub fn check_index(&self, x: usize) -> Result<()> {
        if x >= self.order {
            return Err(Error::ElementOutOfRange {
                index: x,
                order: self.order,
            });
        }
        Ok(())
    }

    /// Display label of an element: its name if set, else its index.
    pub fn label(&self, x: usize) -> String {
        match &self.names {
            Some(names) => names[x].clone(),
            None => x.to_string(),
        }
    }

    pub fn table(&self) -> Vec<Vec<usize>> {
        self.mul.chunks(self.order).map(<[usize]>::to_vec).collect()
    }

    /// Elements reached from the identity by right multiplication with
    /// `gens`, in breadth-first order.
    pub fn span(&self, gens: &[usize]) -> Vec<usize> {
        let mut seen = vec![false; self.order];
        let mut out = vec![0];
        seen[0] = true;
        let mut i = 0;
        while i < out.len() {
            let x = out[i];
            for &g in gens {
                let y = self.mul(x, g);
                if !seen[y] {
                    seen[y] = true;
                    out.push(y);
                }
            }
            i += 1;
        }
        out
    }

    /// A small generating set, grown greedily by the element that enlarges
    /// the generated subgroup most.
    pub fn generating_set(&self) -> Vec<usize> {
        let mut gens = Vec::new();
        let mut size = 1;
        while size < self.order {
            let (best, best_size) = (1..self.order)
                .map(|x| {
                    let mut trial = gens.clone();
                    trial.push(x);
                    (x, self.span(&trial).len())
                })
                .max_by_key(|&(x, s)| (s, std::cmp::Reverse(x)))
                .expect("nontrivial group");
            gens.push(best);
            size = best_size;
        }
        gens
    }
}

impl fmt::Debug for FiniteGroupTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FiniteGroupTable(order {})", self.order)
    }
}

/// Closes `gens` under a multiplication, breadth first from `identity` with
/// generators tried in input order. Returns the table and the elements in
/// index order.
pub fn from_closure<T, F>(gens: &[T], identity: T, mul: F, cap: usize) -> Result<(FiniteGroupTable, Vec<T>)>
where
    T: Clone + Eq + Hash,
    F: Fn(&T, &T) -> T,
{
    let mut index: HashMap<T, usize> = HashMap::new();
    let mut elements = vec![identity.clone()];
    index.insert(identity, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for g in gens {
            let y = mul(&elements[i], g);
            if !index.contains_key(&y) {
                if elements.len() >= cap {
                    return Err(Error::CapExceeded {
                        what: "group closure",
                        cap,
                    });
                }
                index.insert(y.clone(), elements.len());
                queue.push_back(elements.len());
                elements.push(y);
            }
        }
    }
    let n = elements.len();
    let mut mul_table = Vec::with_capacity(n * n);
    for a in &elements {
        for b in &elements {
            let c = mul(a, b);
            match index.get(&c) {
                Some(&k) => mul_table.push(k),
                None => return Err(Error::InvalidTable("closure is not closed under products".into())),
            }
        }
    }
    let inv = (0..n)
        .map(|x| (0..n).find(|&y| mul_table[x * n + y] == 0))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::InvalidTable("closure lacks inverses".into()))?;
    Ok((
        FiniteGroupTable {
            order: n,
            mul: mul_table,
            inv,
            names: None,
        },
        elements,
    ))
}

/// Checks that every generator is a permutation of a shared degree.
pub fn check_permutations(gens: &[Vec<usize>]) -> Result<usize> {
    let degree = gens.first().map_or(0, Vec::len);
    for (i, p) in gens.iter().enumerate() {
        if p.len() != degree {
            return Err(Error::InvalidPermutation(format!(
                "generator {i} has degree {}, expected {degree}",
                p.len()
            )));
        }
        let mut seen = vec![false; degree];
        for &x in p {
            if x >= degree || seen[x] {
                return Err(Error::InvalidPermutation(format!("generator {i} is not a bijection")));
            }
            seen[x] = true;
        }
    }
    Ok(degree)
}

/// `x(pq) = (xp)q`: first `p`, then `q`.
pub fn compose_perms(p: &[usize], q: &[usize]) -> Vec<usize> {
    p.iter().map(|&x| q[x]).collect()
}

/// Closure of permutation generators (images of `0..d`), with the elements
/// in discovery order.
pub fn permutation_closure(gens: &[Vec<usize>], cap: usize) -> Result<(FiniteGroupTable, Vec<Vec<usize>>)> {
    let degree = check_permutations(gens)?;
    let identity: Vec<usize> = (0..degree).collect();
    from_closure(gens, identity, |p, q| compose_perms(p, q), cap)
}

/// The group generated by permutations given as images of `0..d`.
pub fn group_from_permutations(gens: &[Vec<usize>], cap: usize) -> Result<FiniteGroupTable> {
    Ok(permutation_closure(gens, cap)?.0)
}

/// Every group of order at most 12 up to isomorphism, with a short name.
pub fn small_groups_up_to_12() -> Vec<(String, FiniteGroupTable)> {
    let c = FiniteGroupTable::cyclic;
    let prod = FiniteGroupTable::direct_product;
    let mut out: Vec<(String, FiniteGroupTable)> = Vec::new();
    for n in 1..=12 {
        out.push((format!("Z{n}"), c(n)));
    }
    out.push(("Z2xZ2".into(), prod(&c(2), &c(2))));
    out.push(("S3".into(), FiniteGroupTable::dihedral(3)));
    out.push(("Z4xZ2".into(), prod(&c(4), &c(2))));
    out.push(("Z2xZ2xZ2".into(), prod(&prod(&c(2), &c(2)), &c(2))));
    out.push(("D4".into(), FiniteGroupTable::dihedral(4)));
    out.push(("Q8".into(), FiniteGroupTable::quaternion()));
    out.push(("Z3xZ3".into(), prod(&c(3), &c(3))));
    out.push(("D5".into(), FiniteGroupTable::dihedral(5)));
    out.push(("Z6xZ2".into(), prod(&c(6), &c(2))));
    out.push(("A4".into(), FiniteGroupTable::alternating4()));
    out.push(("D6".into(), FiniteGroupTable::dihedral(6)));
    out.push(("Dic3".into(), FiniteGroupTable::dicyclic(3)));
    out
}
