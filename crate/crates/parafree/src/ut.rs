//! Arithmetic in the groups of upper unitriangular n x n matrices over a
//! prime field: finite p-groups of nilpotency class n - 1, used as concrete
//! targets for nilpotent-quotient witnesses.

pub const MIN_DIM: u8 = 3;
pub const MAX_DIM: u8 = 5;
const MAX_SLOTS: usize = (MAX_DIM as usize * (MAX_DIM as usize - 1)) / 2;

/// Number of strictly-upper entries of an n x n matrix.
pub fn slot_count(n: u8) -> usize {
    (n as usize * (n as usize - 1)) / 2
}

/// Row-major index of the strictly-upper position (i, j), i < j.
fn slot(n: u8, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n as usize);
    i * (2 * n as usize - i - 1) / 2 + (j - i - 1)
}

/// `p^slot_count(n)`, the order of the group.
pub fn group_order(n: u8, p: u32) -> u64 {
    (0..slot_count(n)).fold(1u64, |acc, _| acc * p as u64)
}

/// An upper unitriangular matrix: ones on the diagonal, the strictly-upper
/// entries stored row-major modulo p.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct UtElement {
    n: u8,
    p: u32,
    e: [u32; MAX_SLOTS],
}

impl UtElement {
    pub fn identity(n: u8, p: u32) -> Self {
        assert!((MIN_DIM..=MAX_DIM).contains(&n), "dimension out of range");
        assert!(p >= 2);
        UtElement { n, p, e: [0; MAX_SLOTS] }
    }

    /// The elementary matrix with `value` at position (i, j).
    pub fn elementary(n: u8, p: u32, i: usize, j: usize, value: u32) -> Self {
        let mut m = UtElement::identity(n, p);
        m.e[slot(n, i, j)] = value % p;
        m
    }

    pub fn dim(&self) -> u8 {
        self.n
    }

    pub fn prime(&self) -> u32 {
        self.p
    }

    pub fn entry(&self, i: usize, j: usize) -> u32 {
        self.e[slot(self.n, i, j)]
    }

    pub fn entries(&self) -> &[u32] {
        &self.e[..slot_count(self.n)]
    }

    pub fn is_identity(&self) -> bool {
        self.entries().iter().all(|&x| x == 0)
    }

    pub fn compatible(&self, other: &UtElement) -> bool {
        self.n == other.n && self.p == other.p
    }

    pub fn mul(&self, other: &UtElement) -> UtElement {
        debug_assert!(self.compatible(other));
        let n = self.n as usize;
        let p = self.p as u64;
        let mut out = UtElement::identity(self.n, self.p);
        for i in 0..n {
            for j in i + 1..n {
                let mut acc = (self.entry(i, j) as u64 + other.entry(i, j) as u64) % p;
                for k in i + 1..j {
                    acc = (acc + self.entry(i, k) as u64 * other.entry(k, j) as u64) % p;
                }
                out.e[slot(self.n, i, j)] = acc as u32;
            }
        }
        out
    }

    /// Inverse via the alternating sum of powers of the nilpotent part.
    pub fn inverse(&self) -> UtElement {
        let n = self.n as usize;
        let p = self.p as u64;
        let slots = slot_count(self.n);
        let nil: Vec<u64> = self.entries().iter().map(|&x| x as u64).collect();
        let nil_mul = |a: &[u64], b: &[u64]| -> Vec<u64> {
            let mut c = vec![0u64; slots];
            for i in 0..n {
                for j in i + 1..n {
                    let mut acc = 0u64;
                    for k in i + 1..j {
                        acc = (acc + a[slot(self.n, i, k)] * b[slot(self.n, k, j)]) % p;
                    }
                    c[slot(self.n, i, j)] = acc;
                }
            }
            c
        };
        let mut acc = vec![0u64; slots];
        let mut power = nil.clone();
        let mut negative = true;
        for _ in 1..n {
            for (slot, term) in acc.iter_mut().zip(&power) {
                let term = if negative { (p - term % p) % p } else { term % p };
                *slot = (*slot + term) % p;
            }
            power = nil_mul(&power, &nil);
            negative = !negative;
        }
        let mut out = UtElement::identity(self.n, self.p);
        for (slot, value) in out.e.iter_mut().zip(&acc) {
            *slot = *value as u32;
        }
        out
    }

    pub fn commutator(a: &UtElement, b: &UtElement) -> UtElement {
        a.mul(b).mul(&a.inverse()).mul(&b.inverse())
    }

    /// Element number `idx` in lexicographic order of the entry vector
    /// (slot 0 most significant, digits base p).
    pub fn from_index(n: u8, p: u32, idx: u64) -> UtElement {
        let slots = slot_count(n);
        let mut m = UtElement::identity(n, p);
        let mut rest = idx;
        for s in (0..slots).rev() {
            m.e[s] = (rest % p as u64) as u32;
            rest /= p as u64;
        }
        debug_assert_eq!(rest, 0, "index out of range");
        m
    }

    pub fn index(&self) -> u64 {
        self.entries()
            .iter()
            .fold(0u64, |acc, &d| acc * self.p as u64 + d as u64)
    }

    /// Full n x n matrix, row-major, for serialization.
    pub fn full_matrix(&self) -> Vec<u32> {
        let n = self.n as usize;
        let mut out = vec![0u32; n * n];
        for i in 0..n {
            out[i * n + i] = 1;
            for j in i + 1..n {
                out[i * n + j] = self.entry(i, j);
            }
        }
        out
    }
}
