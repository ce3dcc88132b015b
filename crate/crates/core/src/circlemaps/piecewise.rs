//! Piecewise-polynomial functions on the circle with exact breakpoints.
//!
//! A piece is `Σ c_k (t − a)^k` on `[lo, hi]` with rational `c_k` and an
//! anchor `a` that may be irrational. Pieces with different anchors can
//! be combined when the anchors differ by a rational number, which is
//! the case for every function built from a common cocycle.

use std::cmp::Ordering;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use serde::Serialize;

use super::pl::PlLift;
use crate::exact::{Rational, SymbolicReal};
use crate::{Error, Result};

fn sym(q: Rational) -> SymbolicReal {
    SymbolicReal::from_rational(q)
}

fn binomial(n: usize, k: usize) -> Rational {
    let mut c = BigInt::one();
    for i in 0..k {
        c = c * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Rational::from_integer(c)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Poly {
    pub anchor: SymbolicReal,
    pub coeffs: Vec<Rational>,
}

impl Serialize for Poly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.coeffs.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| match k {
                0 => format!("{c}"),
                1 => format!("{c}*(t - ({}))", self.anchor),
                _ => format!("{c}*(t - ({}))^{k}", self.anchor),
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl Poly {
    pub fn new(anchor: SymbolicReal, mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        Poly { anchor, coeffs }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(SymbolicReal::zero(), vec![c])
    }

    pub fn zero() -> Self {
        Self::new(SymbolicReal::zero(), vec![])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.len() <= 1
    }

    /// `p(σw + d)` as a polynomial in `w`.
    fn compose_affine(&self, sigma: &Rational, d: &Rational) -> Vec<Rational> {
        let n = self.coeffs.len();
        let mut out = vec![Rational::zero(); n];
        for (k, c) in self.coeffs.iter().enumerate() {
            // c (σw + d)^k
            let mut sp = Rational::one();
            for j in 0..=k {
                let term = c * binomial(k, j) * &sp * pow(d, k - j);
                out[j] += term;
                sp *= sigma;
            }
        }
        out
    }

    /// Same function written around `to`.
    pub fn reanchor(&self, to: &SymbolicReal) -> Result<Poly> {
        if self.is_constant() || self.anchor == *to {
            return Ok(Poly::new(to.clone(), self.coeffs.clone()));
        }
        let d = (to - &self.anchor)
            .as_rational()
            .cloned()
            .ok_or_else(|| Error::Invalid(format!("anchors {} and {to} differ irrationally", self.anchor)))?;
        Ok(Poly::new(to.clone(), self.compose_affine(&Rational::one(), &d)))
    }

    fn common_anchor<'a>(polys: impl IntoIterator<Item = &'a Poly>) -> SymbolicReal {
        polys
            .into_iter()
            .find(|p| !p.is_constant())
            .map(|p| p.anchor.clone())
            .unwrap_or_else(SymbolicReal::zero)
    }

    pub fn add(&self, other: &Poly) -> Result<Poly> {
        let a = Self::common_anchor([self, other]);
        let (x, y) = (self.reanchor(&a)?, other.reanchor(&a)?);
        let n = x.coeffs.len().max(y.coeffs.len());
        let c = (0..n)
            .map(|k| x.coeffs.get(k).cloned().unwrap_or_default() + y.coeffs.get(k).cloned().unwrap_or_default())
            .collect();
        Ok(Poly::new(a, c))
    }

    pub fn mul(&self, other: &Poly) -> Result<Poly> {
        if self.is_zero() || other.is_zero() {
            return Ok(Poly::zero());
        }
        let a = Self::common_anchor([self, other]);
        let (x, y) = (self.reanchor(&a)?, other.reanchor(&a)?);
        let mut c = vec![Rational::zero(); x.coeffs.len() + y.coeffs.len() - 1];
        for (i, p) in x.coeffs.iter().enumerate() {
            for (j, q) in y.coeffs.iter().enumerate() {
                c[i + j] += p * q;
            }
        }
        Ok(Poly::new(a, c))
    }

    pub fn scale(&self, q: &Rational) -> Poly {
        Poly::new(self.anchor.clone(), self.coeffs.iter().map(|c| c * q).collect())
    }

    /// `∫_p^q`.
    pub fn integrate(&self, p: &SymbolicReal, q: &SymbolicReal) -> Result<SymbolicReal> {
        match self.coeffs.len() {
            0 => return Ok(SymbolicReal::zero()),
            1 => return Ok((q - p).scale(&self.coeffs[0])),
            _ => {}
        }
        let rel = |x: &SymbolicReal| {
            (x - &self.anchor)
                .as_rational()
                .cloned()
                .ok_or_else(|| Error::Invalid("integration bounds are irrational relative to the anchor".into()))
        };
        let (a, b) = (rel(p)?, rel(q)?);
        let mut total = Rational::zero();
        for (k, c) in self.coeffs.iter().enumerate() {
            let k1 = Rational::from_integer(BigInt::from(k + 1));
            total += c * (pow(&b, k + 1) - pow(&a, k + 1)) / k1;
        }
        Ok(sym(total))
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        let w = t - self.anchor.to_f64();
        self.coeffs
            .iter()
            .rev()
            .fold(0.0, |acc, c| acc * w + c.to_f64().unwrap_or(f64::NAN))
    }
}

fn pow(x: &Rational, n: usize) -> Rational {
    (0..n).fold(Rational::one(), |acc, _| acc * x)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Piece {
    pub lo: SymbolicReal,
    pub hi: SymbolicReal,
    pub poly: Poly,
}

/// Periodic function on `ℝ/ℤ`: the listed pieces (taken mod 1, with
/// disjoint interiors) and zero elsewhere.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct CircleFunction {
    pub pieces: Vec<Piece>,
}

impl CircleFunction {
    pub fn zero() -> Self {
        CircleFunction::default()
    }

    pub fn constant(c: Rational) -> Self {
        CircleFunction {
            pieces: vec![Piece {
                lo: SymbolicReal::zero(),
                hi: SymbolicReal::one(),
                poly: Poly::constant(c),
            }],
        }
    }

    /// One piece `Σ c_k (t − lo)^k` on `[lo, hi]`; empty when `lo = hi`.
    pub fn single(lo: SymbolicReal, hi: SymbolicReal, coeffs: Vec<Rational>) -> Self {
        let mut f = CircleFunction::zero();
        f.push(lo.clone(), hi, Poly::new(lo, coeffs));
        f
    }

    pub fn push(&mut self, lo: SymbolicReal, hi: SymbolicReal, poly: Poly) {
        if lo.cmp_exact(&hi) == Ordering::Less && !poly.is_zero() {
            self.pieces.push(Piece { lo, hi, poly });
        }
    }

    pub fn extend(&mut self, other: CircleFunction) {
        self.pieces.extend(other.pieces);
    }

    pub fn scale(&self, q: &Rational) -> CircleFunction {
        CircleFunction {
            pieces: self
                .pieces
                .iter()
                .map(|p| Piece {
                    lo: p.lo.clone(),
                    hi: p.hi.clone(),
                    poly: p.poly.scale(q),
                })
                .collect(),
        }
    }

    /// `h ∘ F` for the lift `F` of a circle homeomorphism.
    pub fn compose_lift(&self, f: &PlLift) -> Result<CircleFunction> {
        let mut out = CircleFunction::zero();
        for (u, v, fu, sigma) in f.pieces() {
            let fv = &fu + &(&v - &u).scale(&sigma);
            let inv_sigma = Rational::one() / &sigma;
            for piece in &self.pieces {
                let kmin = (&fu - &piece.hi).floor();
                let kmax = (&fv - &piece.lo).floor() + 1;
                let mut k = kmin;
                while k <= kmax {
                    let kq = Rational::from_integer(k.clone());
                    let lo = piece.lo.add_rational(&kq).max(&fu);
                    let hi = piece.hi.add_rational(&kq).min(&fv);
                    if lo.cmp_exact(&hi) == Ordering::Less {
                        let pre_lo = &u + &(&lo - &fu).scale(&inv_sigma);
                        let pre_hi = &u + &(&hi - &fu).scale(&inv_sigma);
                        let anchor = piece.poly.anchor.add_rational(&kq);
                        let poly = if sigma.is_one() {
                            Poly::new(&(&anchor - &fu) + &u, piece.poly.coeffs.clone())
                        } else if piece.poly.is_constant() {
                            Poly::new(u.clone(), piece.poly.coeffs.clone())
                        } else {
                            let d = (&fu - &anchor).as_rational().cloned().ok_or_else(|| {
                                Error::Invalid("composition with a sloped piece needs rational offsets".into())
                            })?;
                            Poly::new(u.clone(), piece.poly.compose_affine(&sigma, &d))
                        };
                        out.push(pre_lo, pre_hi, poly);
                    }
                    k += 1;
                }
            }
        }
        Ok(out)
    }

    /// Pieces moved into `[w, w + 1)`, split at `w + 1` where needed.
    pub fn in_window(&self, w: &SymbolicReal) -> Vec<Piece> {
        let end = w.add_rational(&Rational::one());
        let mut out = Vec::new();
        for p in &self.pieces {
            let k = Rational::from_integer(-(&p.lo - w).floor());
            let lo = p.lo.add_rational(&k);
            let hi = p.hi.add_rational(&k);
            let poly = Poly::new(p.poly.anchor.add_rational(&k), p.poly.coeffs.clone());
            if hi.cmp_exact(&end) == Ordering::Greater {
                let back = -Rational::one();
                out.push(Piece {
                    lo: w.clone(),
                    hi: hi.add_rational(&back),
                    poly: Poly::new(poly.anchor.add_rational(&back), poly.coeffs.clone()),
                });
                out.push(Piece { lo, hi: end.clone(), poly });
            } else {
                out.push(Piece { lo, hi, poly });
            }
        }
        out
    }

    /// `∫_𝕋`.
    pub fn integral(&self) -> Result<SymbolicReal> {
        let mut acc = SymbolicReal::zero();
        for p in &self.pieces {
            acc = &acc + &p.poly.integrate(&p.lo, &p.hi)?;
        }
        Ok(acc)
    }

    pub fn eval_f64(&self, t: f64) -> f64 {
        for p in &self.pieces {
            let lo = p.lo.to_f64();
            let shift = (t - lo).floor();
            let tt = t - shift;
            if tt <= p.hi.to_f64() {
                return p.poly.eval_f64(tt);
            }
        }
        0.0
    }
}

/// `Σ coeff · Π factors` as a polynomial identity on the circle.
pub struct Term<'a> {
    pub coeff: Rational,
    pub factors: Vec<&'a CircleFunction>,
}

impl<'a> Term<'a> {
    pub fn new(coeff: i64, factors: Vec<&'a CircleFunction>) -> Self {
        Term {
            coeff: Rational::from_integer(BigInt::from(coeff)),
            factors,
        }
    }
}

/// Intervals of `[w, w + 1)` on which `Σ terms` is not identically zero.
pub fn identity_violations(w: &SymbolicReal, terms: &[Term<'_>]) -> Result<Vec<(SymbolicReal, SymbolicReal)>> {
    let mut funcs: Vec<*const CircleFunction> = Vec::new();
    let mut windows: Vec<Vec<Piece>> = Vec::new();
    for t in terms {
        for &f in &t.factors {
            if !funcs.contains(&(f as *const _)) {
                funcs.push(f as *const _);
                windows.push(f.in_window(w));
            }
        }
    }
    let end = w.add_rational(&Rational::one());
    let mut cuts = vec![w.clone(), end];
    for ps in &windows {
        for p in ps {
            cuts.push(p.lo.clone());
            cuts.push(p.hi.clone());
        }
    }
    cuts.sort_by(|a, b| a.cmp_exact(b));
    cuts.dedup();
    let mut bad = Vec::new();
    for pair in cuts.windows(2) {
        let (p, q) = (&pair[0], &pair[1]);
        if p.cmp_exact(q) != Ordering::Less {
            continue;
        }
        let poly_of = |f: &CircleFunction| -> Poly {
            let idx = funcs.iter().position(|&g| std::ptr::eq(g, f)).expect("registered");
            windows[idx]
                .iter()
                .find(|pc| pc.lo.cmp_exact(p) != Ordering::Greater && pc.hi.cmp_exact(q) != Ordering::Less)
                .map(|pc| pc.poly.clone())
                .unwrap_or_else(Poly::zero)
        };
        let mut sum = Poly::zero();
        for t in terms {
            let mut prod = Poly::constant(t.coeff.clone());
            for f in &t.factors {
                prod = prod.mul(&poly_of(f))?;
            }
            sum = sum.add(&prod)?;
        }
        if !sum.is_zero() {
            bad.push((p.clone(), q.clone()));
        }
    }
    Ok(bad)
}
