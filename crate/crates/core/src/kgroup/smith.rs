//! Smith normal form over ℤ with unimodular transforms.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Matrix = Vec<Vec<BigInt>>;

pub fn identity(n: usize) -> Matrix {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect())
        .collect()
}

pub fn from_i64(rows: &[Vec<i64>]) -> Matrix {
    rows.iter().map(|r| r.iter().map(|&x| BigInt::from(x)).collect()).collect()
}

pub fn mat_mul(a: &Matrix, b: &Matrix) -> Matrix {
    let n = b.first().map_or(0, Vec::len);
    a.iter()
        .map(|row| {
            (0..n)
                .map(|j| row.iter().zip(b.iter()).map(|(x, brow)| x * &brow[j]).sum())
                .collect()
        })
        .collect()
}

pub fn mat_vec(a: &Matrix, v: &[BigInt]) -> Vec<BigInt> {
    a.iter().map(|row| row.iter().zip(v).map(|(x, y)| x * y).sum()).collect()
}

/// `U · A · V = D` with `D` diagonal, `d₁ | d₂ | … | d_r`, all positive.
#[derive(Debug, Clone)]
pub struct Smith {
    pub u: Matrix,
    pub v: Matrix,
    /// Nonzero diagonal entries.
    pub diag: Vec<BigInt>,
    pub rows: usize,
    pub cols: usize,
}

impl Smith {
    pub fn rank(&self) -> usize {
        self.diag.len()
    }
}

fn swap_rows(b: &mut Matrix, i: usize, j: usize) {
    b.swap(i, j);
}

fn swap_cols(b: &mut Matrix, i: usize, j: usize) {
    for row in b.iter_mut() {
        row.swap(i, j);
    }
}

/// row_i ← row_i − q·row_t
fn row_axpy(b: &mut Matrix, i: usize, t: usize, q: &BigInt) {
    let src = b[t].clone();
    for (x, y) in b[i].iter_mut().zip(src.iter()) {
        *x -= q * y;
    }
}

/// col_j ← col_j − q·col_t
fn col_axpy(b: &mut Matrix, j: usize, t: usize, q: &BigInt) {
    for row in b.iter_mut() {
        let y = row[t].clone();
        row[j] -= q * y;
    }
}

pub fn smith_normal_form(a: &Matrix) -> Smith {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut b = a.clone();
    let mut u = identity(rows);
    let mut v = identity(cols);
    let mut t = 0;
    while t < rows.min(cols) {
        // smallest nonzero entry of the trailing block becomes the pivot
        let mut best: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !b[i][j].is_zero() && best.is_none_or(|(bi, bj)| b[i][j].abs() < b[bi][bj].abs()) {
                    best = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = best else { break };
        swap_rows(&mut b, t, pi);
        swap_rows(&mut u, t, pi);
        swap_cols(&mut b, t, pj);
        swap_cols(&mut v, t, pj);
        loop {
            let mut clean = true;
            for i in t + 1..rows {
                if !b[i][t].is_zero() {
                    let q = b[i][t].div_floor(&b[t][t]);
                    row_axpy(&mut b, i, t, &q);
                    row_axpy(&mut u, i, t, &q);
                    clean &= b[i][t].is_zero();
                }
            }
            for j in t + 1..cols {
                if !b[t][j].is_zero() {
                    let q = b[t][j].div_floor(&b[t][t]);
                    col_axpy(&mut b, j, t, &q);
                    col_axpy(&mut v, j, t, &q);
                    clean &= b[t][j].is_zero();
                }
            }
            if !clean {
                // a remainder smaller than the pivot is left; make it the pivot
                let mut best = (t, t);
                for i in t + 1..rows {
                    if !b[i][t].is_zero() && b[i][t].abs() < b[best.0][best.1].abs() {
                        best = (i, t);
                    }
                }
                for j in t + 1..cols {
                    if !b[t][j].is_zero() && b[t][j].abs() < b[best.0][best.1].abs() {
                        best = (t, j);
                    }
                }
                if best.0 != t {
                    swap_rows(&mut b, t, best.0);
                    swap_rows(&mut u, t, best.0);
                }
                if best.1 != t {
                    swap_cols(&mut b, t, best.1);
                    swap_cols(&mut v, t, best.1);
                }
                continue;
            }
            let bad = (t + 1..rows).find(|&i| (t + 1..cols).any(|j| !(&b[i][j] % &b[t][t]).is_zero()));
            match bad {
                Some(i) => {
                    let minus_one = -BigInt::one();
                    row_axpy(&mut b, t, i, &minus_one);
                    row_axpy(&mut u, t, i, &minus_one);
                }
                None => break,
            }
        }
        if b[t][t].is_negative() {
            for x in b[t].iter_mut() {
                *x = -x.clone();
            }
            for x in u[t].iter_mut() {
                *x = -x.clone();
            }
        }
        t += 1;
    }
    let diag = (0..t).map(|i| b[i][i].clone()).collect();
    Smith { u, v, diag, rows, cols }
}

/// `ℤ^m / im(A)` presented as `⊕ ℤ/dᵢ ⊕ ℤ^{m−r}` through `f ↦ U f`.
#[derive(Debug, Clone)]
pub struct Cokernel {
    pub smith: Smith,
}

/// Coordinates of a cokernel element: torsion part reduced mod `dᵢ`
/// (trivial factors `dᵢ = 1` dropped), then the free part.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CokernelClass {
    pub torsion: Vec<BigInt>,
    pub free: Vec<BigInt>,
}

impl CokernelClass {
    pub fn is_zero(&self) -> bool {
        self.torsion.iter().chain(self.free.iter()).all(Zero::is_zero)
    }
}

impl Cokernel {
    pub fn of(a: &Matrix) -> Self {
        Cokernel {
            smith: smith_normal_form(a),
        }
    }

    /// Orders of the cyclic torsion summands (excluding 1).
    pub fn torsion(&self) -> Vec<BigInt> {
        self.smith.diag.iter().filter(|d| !d.is_one()).cloned().collect()
    }

    pub fn free_rank(&self) -> usize {
        self.smith.rows - self.smith.rank()
    }

    pub fn class(&self, f: &[BigInt]) -> CokernelClass {
        let row = |i: usize| -> BigInt { self.smith.u[i].iter().zip(f).map(|(x, y)| x * y).sum() };
        let r = self.smith.rank();
        // rows with trivial invariant factor carry no information
        let torsion = self.smith.diag
            .iter()
            .enumerate()
            .filter(|(_, d)| !d.is_one())
            .map(|(i, d)| row(i).mod_floor(d))
            .collect();
        CokernelClass {
            torsion,
            free: (r..self.smith.rows).map(row).collect(),
        }
    }
}

/// Integer solutions of `A n = x`: a particular solution and a lattice
/// basis of the kernel, or `None` when no integer solution exists.
pub fn solve_integer(a: &Matrix, x: &[BigInt]) -> Option<(Vec<BigInt>, Vec<Vec<BigInt>>)> {
    let cols = a.first().map_or(0, Vec::len);
    let s = smith_normal_form(a);
    let ux = mat_vec(&s.u, x);
    let r = s.rank();
    if ux[r..].iter().any(|c| !c.is_zero()) {
        return None;
    }
    let mut y = vec![BigInt::zero(); cols];
    for i in 0..r {
        let (q, rem) = ux[i].div_rem(&s.diag[i]);
        if !rem.is_zero() {
            return None;
        }
        y[i] = q;
    }
    let n0 = mat_vec(&s.v, &y);
    let kernel = (r..cols).map(|j| s.v.iter().map(|row| row[j].clone()).collect()).collect();
    Some((n0, kernel))
}
