//! Exact integer linear algebra: Smith normal form with unimodular
//! transforms, cokernel invariants (free rank plus torsion) and primitivity
//! of integer vectors.
//!
//! Entries are arbitrary-precision throughout; pivoting always picks the
//! smallest nonzero magnitude to control coefficient growth.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("matrix has {cols} columns but ambient rank is {ambient}")]
    ShapeError { cols: usize, ambient: usize },
}

/// Dense row-major integer matrix. Zero-row and zero-column shapes are legal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m.set(i, i, BigInt::one());
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        IntMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
    }

    /// A matrix with zero rows but a definite column count.
    pub fn empty_rows(cols: usize) -> Self {
        IntMatrix { rows: 0, cols, data: Vec::new() }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &BigInt {
        &self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: BigInt) {
        self.data[r * self.cols + c] = v;
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch");
        let mut out = IntMatrix::zero(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let add = a * other.get(k, j);
                    let cur = out.get(i, j) + add;
                    out.set(i, j, cur);
                }
            }
        }
        out
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.data.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn swap_cols(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for r in 0..self.rows {
            self.data.swap(r * self.cols + i, r * self.cols + j);
        }
    }

    /// row[i] += q * row[k]
    fn row_addmul(&mut self, i: usize, k: usize, q: &BigInt) {
        for c in 0..self.cols {
            let add = q * self.get(k, c);
            let cur = self.get(i, c) + add;
            self.set(i, c, cur);
        }
    }

    /// col[j] += q * col[k]
    fn col_addmul(&mut self, j: usize, k: usize, q: &BigInt) {
        for r in 0..self.rows {
            let add = q * self.get(r, k);
            let cur = self.get(r, j) + add;
            self.set(r, j, cur);
        }
    }

    fn negate_row(&mut self, i: usize) {
        for c in 0..self.cols {
            let v = -self.get(i, c);
            self.set(i, c, v);
        }
    }

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Determinant by cofactor expansion; only used on small matrices
    /// (transform validation, minor oracles).
    pub fn det(&self) -> BigInt {
        assert_eq!(self.rows, self.cols, "determinant of non-square matrix");
        let n = self.rows;
        match n {
            0 => BigInt::one(),
            1 => self.get(0, 0).clone(),
            2 => self.get(0, 0) * self.get(1, 1) - self.get(0, 1) * self.get(1, 0),
            _ => {
                let mut acc = BigInt::zero();
                for j in 0..n {
                    let a = self.get(0, j);
                    if a.is_zero() {
                        continue;
                    }
                    let mut sub = IntMatrix::zero(n - 1, n - 1);
                    for r in 1..n {
                        let mut cc = 0;
                        for c in 0..n {
                            if c == j {
                                continue;
                            }
                            sub.set(r - 1, cc, self.get(r, c).clone());
                            cc += 1;
                        }
                    }
                    let term = a * sub.det();
                    if j % 2 == 0 {
                        acc += term;
                    } else {
                        acc -= term;
                    }
                }
                acc
            }
        }
    }
}

/// Smith decomposition `d = u * m * v` with unimodular `u`, `v` and a
/// nonnegative diagonal forming a divisibility chain.
#[derive(Clone, Debug)]
pub struct SnfResult {
    pub u: IntMatrix,
    pub d: IntMatrix,
    pub v: IntMatrix,
}

impl SnfResult {
    pub fn diagonal(&self) -> Vec<BigInt> {
        let t = self.d.rows().min(self.d.cols());
        (0..t).map(|i| self.d.get(i, i).clone()).collect()
    }

    pub fn rank(&self) -> usize {
        self.diagonal().iter().filter(|d| !d.is_zero()).count()
    }
}

fn smallest_nonzero(m: &IntMatrix, k: usize) -> Option<(usize, usize)> {
    let mut best: Option<(usize, usize)> = None;
    for i in k..m.rows() {
        for j in k..m.cols() {
            let v = m.get(i, j);
            if v.is_zero() {
                continue;
            }
            match best {
                None => best = Some((i, j)),
                Some((bi, bj)) => {
                    if v.abs() < m.get(bi, bj).abs() {
                        best = Some((i, j));
                    }
                }
            }
        }
    }
    best
}

fn find_nondivisible(m: &IntMatrix, k: usize) -> Option<usize> {
    let pivot = m.get(k, k);
    for i in k + 1..m.rows() {
        for j in k + 1..m.cols() {
            if !(m.get(i, j) % pivot).is_zero() {
                return Some(i);
            }
        }
    }
    None
}

/// Smith normal form with transforms. Every elementary operation on the work
/// matrix is mirrored on `u` or `v`, so `d = u * m * v` holds throughout.
pub fn smith_normal_form(m: &IntMatrix) -> SnfResult {
    let mut d = m.clone();
    let mut u = IntMatrix::identity(m.rows());
    let mut v = IntMatrix::identity(m.cols());
    let t = m.rows().min(m.cols());
    'outer: for k in 0..t {
        loop {
            let Some((pi, pj)) = smallest_nonzero(&d, k) else {
                break 'outer;
            };
            d.swap_rows(k, pi);
            u.swap_rows(k, pi);
            d.swap_cols(k, pj);
            v.swap_cols(k, pj);

            let mut leftover = false;
            for i in k + 1..d.rows() {
                let q = -(d.get(i, k) / d.get(k, k));
                if !q.is_zero() {
                    d.row_addmul(i, k, &q);
                    u.row_addmul(i, k, &q);
                }
                leftover |= !d.get(i, k).is_zero();
            }
            for j in k + 1..d.cols() {
                let q = -(d.get(k, j) / d.get(k, k));
                if !q.is_zero() {
                    d.col_addmul(j, k, &q);
                    v.col_addmul(j, k, &q);
                }
                leftover |= !d.get(k, j).is_zero();
            }
            if leftover {
                // Truncated division left remainders smaller than the pivot;
                // re-pick and repeat.
                continue;
            }
            if let Some(i) = find_nondivisible(&d, k) {
                // Drag a non-multiple into the pivot row so the next pass
                // shrinks the pivot to a gcd.
                d.row_addmul(k, i, &BigInt::one());
                u.row_addmul(k, i, &BigInt::one());
                continue;
            }
            break;
        }
        if d.get(k, k).is_negative() {
            d.negate_row(k);
            u.negate_row(k);
        }
    }
    SnfResult { u, d, v }
}

/// Free rank and invariant-factor torsion of `Z^ambient / rowspace(m)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CokernelInvariants {
    pub free_rank: usize,
    pub torsion: Vec<BigInt>,
}

impl CokernelInvariants {
    pub fn is_torsion_free(&self) -> bool {
        self.torsion.is_empty()
    }
}

pub fn cokernel_invariants(
    m: &IntMatrix,
    ambient_rank: usize,
) -> Result<CokernelInvariants, LatticeError> {
    if m.cols() != ambient_rank {
        return Err(LatticeError::ShapeError { cols: m.cols(), ambient: ambient_rank });
    }
    Ok(CokernelForm::new(m).invariants)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Quotient coordinate is unconstrained (a Z summand).
    Free,
    /// Quotient coordinate is killed entirely (invariant factor 1).
    Collapsed,
    /// Quotient coordinate lives in Z/d for the stored d >= 2.
    Torsion,
}

/// A cokernel `Z^ambient / rowspace(m)` put into coordinates: the column
/// transform of the Smith form turns any ambient vector into per-slot
/// coordinates, one slot per invariant factor (0 meaning a free slot).
#[derive(Clone, Debug)]
pub struct CokernelForm {
    ambient: usize,
    diag: Vec<BigInt>,
    col_transform: IntMatrix,
    pub invariants: CokernelInvariants,
}

impl CokernelForm {
    pub fn new(m: &IntMatrix) -> Self {
        let snf = smith_normal_form(m);
        let diag = snf.diagonal();
        let rank = diag.iter().filter(|d| !d.is_zero()).count();
        let torsion: Vec<BigInt> = diag
            .iter()
            .filter(|d| d.abs() > BigInt::one())
            .cloned()
            .collect();
        CokernelForm {
            ambient: m.cols(),
            diag,
            col_transform: snf.v,
            invariants: CokernelInvariants {
                free_rank: m.cols() - rank,
                torsion,
            },
        }
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn is_torsion_free(&self) -> bool {
        self.invariants.is_torsion_free()
    }

    pub fn slot(&self, i: usize) -> Slot {
        match self.diag.get(i) {
            None => Slot::Free,
            Some(d) if d.is_zero() => Slot::Free,
            Some(d) if d.is_one() => Slot::Collapsed,
            Some(_) => Slot::Torsion,
        }
    }

    /// Coordinates of the class of `x`: the row vector `x * V`.
    pub fn class_coords(&self, x: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(x.len(), self.ambient, "vector length mismatch");
        (0..self.ambient)
            .map(|j| {
                x.iter()
                    .enumerate()
                    .map(|(i, xi)| xi * self.col_transform.get(i, j))
                    .sum()
            })
            .collect()
    }

    pub fn is_zero_class(&self, coords: &[BigInt]) -> bool {
        coords.iter().enumerate().all(|(i, y)| match self.slot(i) {
            Slot::Free => y.is_zero(),
            Slot::Collapsed => true,
            Slot::Torsion => (y % &self.diag[i]).is_zero(),
        })
    }

    /// Image of the class in the free quotient (torsion killed): the
    /// coordinates sitting in free slots.
    pub fn free_projection(&self, coords: &[BigInt]) -> Vec<BigInt> {
        coords
            .iter()
            .enumerate()
            .filter(|(i, _)| self.slot(*i) == Slot::Free)
            .map(|(_, y)| y.clone())
            .collect()
    }

    /// True when the class stays nonzero in the mod-p quotient, a finite
    /// abelian p-group.
    pub fn survives_mod_prime(&self, coords: &[BigInt], p: u32) -> bool {
        let p = BigInt::from(p);
        coords.iter().enumerate().any(|(i, y)| match self.slot(i) {
            Slot::Free => !(y % &p).is_zero(),
            Slot::Collapsed => false,
            Slot::Torsion => (&self.diag[i] % &p).is_zero() && !(y % &p).is_zero(),
        })
    }
}

pub fn gcd_of(xs: &[BigInt]) -> BigInt {
    xs.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x))
}

/// True iff `x` is nonzero with content 1 — equivalently, not a proper power
/// in the free abelian group. The zero vector is rejected by definition.
pub fn is_primitive_vector(x: &[BigInt]) -> bool {
    gcd_of(x).is_one()
}

/// A vector `y` with `x . y = 1`, when `x` is primitive. Serves as an
/// independently checkable certificate of primitivity.
pub fn primitivity_certificate(x: &[BigInt]) -> Option<Vec<BigInt>> {
    if !is_primitive_vector(x) {
        return None;
    }
    // Fold extended gcds left to right: g_k = gcd(x_0..x_k) = s*g_{k-1} + t*x_k.
    let mut coeffs: Vec<BigInt> = Vec::with_capacity(x.len());
    let mut g = BigInt::zero();
    for xi in x {
        let e = g.extended_gcd(xi);
        for c in coeffs.iter_mut() {
            *c *= &e.x;
        }
        coeffs.push(e.y.clone());
        g = e.gcd;
    }
    debug_assert!(g.is_one());
    Some(coeffs)
}
