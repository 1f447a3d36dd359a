//! Exact linear algebra over Gaussian rationals.
//!
//! Everything here is exact: entries are complex numbers whose real and
//! imaginary parts are arbitrary-precision rationals kept in lowest terms.
//! The elimination-based routines (rank normal form, pseudoinverse,
//! Gram-Schmidt, kernels and projectors) are the backbone of the Wong
//! sequence computation and of every "verify the answer exactly" step.

use num_bigint::{BigInt, Sign};
use num_complex::Complex;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// A Gaussian rational: `re + im·i` with arbitrary-precision rational parts.
///
/// `BigRational` keeps denominators positive and fractions reduced after
/// every operation, so the lowest-terms invariant holds by construction.
pub type GaussRat = Complex<BigRational>;

pub fn gr_zero() -> GaussRat {
    Complex::new(BigRational::zero(), BigRational::zero())
}

pub fn gr_one() -> GaussRat {
    Complex::new(BigRational::one(), BigRational::zero())
}

pub fn gr_from_i64(re: i64, im: i64) -> GaussRat {
    Complex::new(
        BigRational::from_integer(BigInt::from(re)),
        BigRational::from_integer(BigInt::from(im)),
    )
}

pub fn gr_from_rational(re: BigRational, im: BigRational) -> GaussRat {
    Complex::new(re, im)
}

pub fn gr_conj(x: &GaussRat) -> GaussRat {
    Complex::new(x.re.clone(), -x.im.clone())
}

pub fn gr_is_zero(x: &GaussRat) -> bool {
    x.re.is_zero() && x.im.is_zero()
}

/// |x|² as an exact rational.
pub fn gr_norm_sqr(x: &GaussRat) -> BigRational {
    &x.re * &x.re + &x.im * &x.im
}

pub fn gr_to_f64(x: &GaussRat) -> (f64, f64) {
    (rat_to_f64(&x.re), rat_to_f64(&x.im))
}

pub fn rat_to_f64(r: &BigRational) -> f64 {
    let n = bigint_to_f64(r.numer());
    let d = bigint_to_f64(r.denom());
    n / d
}

fn bigint_to_f64(b: &BigInt) -> f64 {
    // Manual conversion to keep very large integers finite in the exponent.
    let (sign, digits) = b.to_u64_digits();
    let mut v = 0.0f64;
    for &d in digits.iter().rev() {
        v = v * 1.8446744073709552e19 + d as f64;
    }
    if sign == Sign::Minus {
        -v
    } else {
        v
    }
}

/// Serialize as `p/q` / `p/q+(r/s)i` / `p/q-(r/s)i`, denominators always shown.
pub fn gr_to_string(x: &GaussRat) -> String {
    let re = format!("{}/{}", x.re.numer(), x.re.denom());
    if x.im.is_zero() {
        re
    } else if x.im.is_negative() {
        let im = -x.im.clone();
        format!("{}-({}/{})i", re, im.numer(), im.denom())
    } else {
        format!("{}+({}/{})i", re, x.im.numer(), x.im.denom())
    }
}

/// Max bit length over numerators and denominators of both parts.
pub fn gr_bits(x: &GaussRat) -> u64 {
    let b = |r: &BigRational| r.numer().bits().max(r.denom().bits());
    b(&x.re).max(b(&x.im))
}

/// Dense matrix over Gaussian rationals, row-major.
#[derive(Clone, PartialEq)]
pub struct ExactMat {
    pub rows: usize,
    pub cols: usize,
    pub entries: Vec<GaussRat>,
}

impl std::fmt::Debug for ExactMat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "ExactMat {}x{}", self.rows, self.cols)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| gr_to_string(self.at(i, j))).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl ExactMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        ExactMat { rows, cols, entries: vec![gr_zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            *m.at_mut(i, i) = gr_one();
        }
        m
    }

    pub fn from_i64(rows: usize, cols: usize, data: &[(i64, i64)]) -> Self {
        assert_eq!(data.len(), rows * cols);
        ExactMat {
            rows,
            cols,
            entries: data.iter().map(|&(re, im)| gr_from_i64(re, im)).collect(),
        }
    }

    pub fn from_rows_i64(rows: &[Vec<(i64, i64)>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            for &(re, im) in row {
                data.push(gr_from_i64(re, im));
            }
        }
        ExactMat { rows: r, cols: c, entries: data }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> &GaussRat {
        &self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut GaussRat {
        &mut self.entries[i * self.cols + j]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(gr_is_zero)
    }

    pub fn column(&self, j: usize) -> Vec<GaussRat> {
        (0..self.rows).map(|i| self.at(i, j).clone()).collect()
    }

    pub fn from_columns(rows: usize, cols: &[Vec<GaussRat>]) -> Self {
        let mut m = Self::zeros(rows, cols.len());
        for (j, c) in cols.iter().enumerate() {
            assert_eq!(c.len(), rows);
            for i in 0..rows {
                *m.at_mut(i, j) = c[i].clone();
            }
        }
        m
    }

    pub fn mul(&self, other: &ExactMat) -> ExactMat {
        assert_eq!(self.cols, other.rows, "mul dims");
        let mut out = ExactMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.at(i, k);
                if gr_is_zero(a) {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.at(k, j);
                    if gr_is_zero(b) {
                        continue;
                    }
                    let prod = a.clone() * b.clone();
                    *out.at_mut(i, j) = out.at(i, j).clone() + prod;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[GaussRat]) -> Vec<GaussRat> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| {
                let mut s = gr_zero();
                for j in 0..self.cols {
                    if !gr_is_zero(self.at(i, j)) && !gr_is_zero(&v[j]) {
                        s = s + self.at(i, j).clone() * v[j].clone();
                    }
                }
                s
            })
            .collect()
    }

    pub fn add(&self, other: &ExactMat) -> ExactMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ExactMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.clone() + b.clone())
                .collect(),
        }
    }

    pub fn sub(&self, other: &ExactMat) -> ExactMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        ExactMat {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a.clone() - b.clone())
                .collect(),
        }
    }

    pub fn scale(&self, c: &GaussRat) -> ExactMat {
        ExactMat {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.clone() * c.clone()).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> ExactMat {
        let mut out = ExactMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = gr_conj(self.at(i, j));
            }
        }
        out
    }

    /// Plain transpose (no conjugation).
    pub fn transpose(&self) -> ExactMat {
        let mut out = ExactMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                *out.at_mut(j, i) = self.at(i, j).clone();
            }
        }
        out
    }

    pub fn is_hermitian(&self) -> bool {
        self.rows == self.cols
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| *self.at(i, j) == gr_conj(self.at(j, i)))
            })
    }

    /// Kronecker product.
    pub fn kron(&self, other: &ExactMat) -> ExactMat {
        let mut out = ExactMat::zeros(self.rows * other.rows, self.cols * other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                if gr_is_zero(self.at(i, j)) {
                    continue;
                }
                for k in 0..other.rows {
                    for l in 0..other.cols {
                        *out.at_mut(i * other.rows + k, j * other.cols + l) =
                            self.at(i, j).clone() * other.at(k, l).clone();
                    }
                }
            }
        }
        out
    }

    /// Max bit length over all entries.
    pub fn max_bits(&self) -> u64 {
        self.entries.iter().map(gr_bits).max().unwrap_or(0)
    }

    /// Scale by the lcm of all denominators so entries become Gaussian integers.
    pub fn cleared_to_integers(&self) -> ExactMat {
        let mut l = BigInt::one();
        for e in &self.entries {
            l = lcm(&l, e.re.denom());
            l = lcm(&l, e.im.denom());
        }
        let c = gr_from_rational(BigRational::from_integer(l), BigRational::zero());
        self.scale(&c)
    }
}

fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::one();
    }
    let g = num_integer_gcd(a, b);
    (a / &g * b).abs()
}

fn num_integer_gcd(a: &BigInt, b: &BigInt) -> BigInt {
    let mut a = a.abs();
    let mut b = b.abs();
    while !b.is_zero() {
        let r = &a % &b;
        a = b;
        b = r;
    }
    a
}

/// Outcome of [`gauss_eliminate`]: nonsingular `P`, `Q` with
/// `P · A · Q⁻¹` equal to the rank-`rank` block identity.
#[derive(Clone, Debug)]
pub struct RankNormalForm {
    pub p: ExactMat,
    pub q: ExactMat,
    /// Inverse of `q`, i.e. the accumulated column operations; `A · q_inv`
    /// has the image of `A` in its first `rank` columns.
    pub q_inv: ExactMat,
    pub rank: usize,
}

/// Gaussian elimination to rank normal form.
///
/// Pivot rule: first nonzero entry in column order, then row order.
pub fn gauss_eliminate(a: &ExactMat) -> RankNormalForm {
    let (m, n) = (a.rows, a.cols);
    let mut w = a.clone();
    let mut p = ExactMat::identity(m);
    let mut q = ExactMat::identity(n); // accumulates G⁻¹·… so that w = p·a·q⁻¹
    let mut f = ExactMat::identity(n); // accumulates …·G so that w = p·a·f... q = f⁻¹
    let mut r = 0usize;

    while r < m && r < n {
        // find pivot: scan columns left-to-right, rows top-to-bottom
        let mut pivot = None;
        'outer: for j in r..n {
            for i in r..m {
                if !gr_is_zero(w.at(i, j)) {
                    pivot = Some((i, j));
                    break 'outer;
                }
            }
        }
        let (pi, pj) = match pivot {
            Some(x) => x,
            None => break,
        };
        if pi != r {
            swap_rows(&mut w, pi, r);
            swap_rows(&mut p, pi, r);
        }
        if pj != r {
            swap_cols(&mut w, pj, r);
            swap_cols(&mut f, pj, r);
            swap_rows(&mut q, pj, r);
        }
        // scale row r so the pivot is 1
        let piv = w.at(r, r).clone();
        let inv = gr_one() / piv;
        scale_row(&mut w, r, &inv);
        scale_row(&mut p, r, &inv);
        // clear column r
        for i in 0..m {
            if i != r && !gr_is_zero(w.at(i, r)) {
                let c = w.at(i, r).clone();
                row_axpy(&mut w, i, r, &c);
                row_axpy(&mut p, i, r, &c);
            }
        }
        // clear row r to the right via column ops: col_j -= w[r][j] * col_r
        for j in r + 1..n {
            if !gr_is_zero(w.at(r, j)) {
                let c = w.at(r, j).clone();
                col_axpy(&mut w, j, r, &c);
                col_axpy(&mut f, j, r, &c);
                // q = G⁻¹·q with G = I + (−c_{rj}): row_r += c * row_j
                let cr: Vec<GaussRat> =
                    (0..n).map(|k| q.at(r, k).clone() + c.clone() * q.at(j, k).clone()).collect();
                for k in 0..n {
                    *q.at_mut(r, k) = cr[k].clone();
                }
            }
        }
        r += 1;
    }
    RankNormalForm { p, q, q_inv: f, rank: r }
}

fn swap_rows(m: &mut ExactMat, a: usize, b: usize) {
    for j in 0..m.cols {
        let x = m.at(a, j).clone();
        *m.at_mut(a, j) = m.at(b, j).clone();
        *m.at_mut(b, j) = x;
    }
}

fn swap_cols(m: &mut ExactMat, a: usize, b: usize) {
    for i in 0..m.rows {
        let x = m.at(i, a).clone();
        *m.at_mut(i, a) = m.at(i, b).clone();
        *m.at_mut(i, b) = x;
    }
}

fn scale_row(m: &mut ExactMat, r: usize, c: &GaussRat) {
    for j in 0..m.cols {
        let v = m.at(r, j).clone() * c.clone();
        *m.at_mut(r, j) = v;
    }
}

/// row_i -= c * row_r
fn row_axpy(m: &mut ExactMat, i: usize, r: usize, c: &GaussRat) {
    for j in 0..m.cols {
        let v = m.at(i, j).clone() - c.clone() * m.at(r, j).clone();
        *m.at_mut(i, j) = v;
    }
}

/// col_j -= c * col_r
fn col_axpy(m: &mut ExactMat, j: usize, r: usize, c: &GaussRat) {
    for i in 0..m.rows {
        let v = m.at(i, j).clone() - c.clone() * m.at(i, r).clone();
        *m.at_mut(i, j) = v;
    }
}

pub fn rank(a: &ExactMat) -> usize {
    gauss_eliminate(a).rank
}

/// Pseudoinverse of a square matrix: nonsingular `A⁺` with `A·A⁺` equal to
/// the identity on `Im(A)`: the `Q·P⁻¹` construction from the rank normal
/// form, assembled here without any matrix inversion.
pub fn pseudoinverse(a: &ExactMat) -> ExactMat {
    assert_eq!(a.rows, a.cols, "pseudoinverse expects square input");
    let rnf = gauss_eliminate(a);
    // a = p⁻¹·J·q, so A⁺ = Q·P⁻¹ in factored-form names is q_inv·p
    rnf.q_inv.mul(&rnf.p)
}

/// Kernel basis of `A` (exact), as columns.
pub fn kernel_basis(a: &ExactMat) -> Vec<Vec<GaussRat>> {
    let rnf = gauss_eliminate(a);
    // w = p·a·f = J; a·f_j = p⁻¹ J e_j = 0 for j ≥ rank.
    (rnf.rank..a.cols).map(|j| rnf.q_inv.column(j)).collect()
}

/// Basis of the column space of `A`, as columns.
pub fn image_basis(a: &ExactMat) -> Vec<Vec<GaussRat>> {
    let rnf = gauss_eliminate(a);
    (0..rnf.rank)
        .map(|j| a.mul_vec(&rnf.q_inv.column(j)))
        .collect()
}

/// Greedy maximal independent subset, in input order.
pub fn max_independent_columns(vectors: &[Vec<GaussRat>]) -> Vec<usize> {
    let mut picked: Vec<usize> = Vec::new();
    let mut basis: Vec<Vec<GaussRat>> = Vec::new();
    for (i, v) in vectors.iter().enumerate() {
        if !in_span(&basis, v) {
            basis.push(v.clone());
            picked.push(i);
        }
    }
    picked
}

/// Does `v` lie in the span of `basis`? Exact elimination check.
pub fn in_span(basis: &[Vec<GaussRat>], v: &[GaussRat]) -> bool {
    if v.iter().all(gr_is_zero) {
        return true;
    }
    if basis.is_empty() {
        return false;
    }
    let dim = v.len();
    let with = ExactMat::from_columns(dim, &[basis.to_vec(), vec![v.to_vec()]].concat());
    let without = ExactMat::from_columns(dim, basis);
    rank(&with) == rank(&without)
}

/// Gram-Schmidt over Gaussian rationals.
///
/// Returns the orthogonal (not normalized) basis plus the exact orthogonal
/// projector `π_U = Σ bᵢbᵢ†/‖bᵢ‖²`. Errors on dependent input.
pub fn gram_schmidt(basis: &[Vec<GaussRat>]) -> Result<(Vec<Vec<GaussRat>>, ExactMat)> {
    if basis.is_empty() {
        return Err(Error::Invalid("gram_schmidt: empty basis".into()));
    }
    let dim = basis[0].len();
    let mut ortho: Vec<Vec<GaussRat>> = Vec::with_capacity(basis.len());
    let mut norms: Vec<BigRational> = Vec::with_capacity(basis.len());
    for v in basis {
        assert_eq!(v.len(), dim);
        let mut b = v.clone();
        for (u, nu) in ortho.iter().zip(&norms) {
            // b -= (⟨u, v⟩ / ‖u‖²) u
            let mut ip = gr_zero();
            for k in 0..dim {
                ip = ip + gr_conj(&u[k]) * v[k].clone();
            }
            let coef = Complex::new(ip.re / nu, ip.im / nu);
            for k in 0..dim {
                b[k] = b[k].clone() - coef.clone() * u[k].clone();
            }
        }
        let n2: BigRational = b.iter().map(gr_norm_sqr).sum();
        if n2.is_zero() {
            return Err(Error::DependentInput("gram_schmidt: dependent input vectors".into()));
        }
        ortho.push(b);
        norms.push(n2);
    }
    let mut proj = ExactMat::zeros(dim, dim);
    for (b, n2) in ortho.iter().zip(&norms) {
        for i in 0..dim {
            for j in 0..dim {
                let t = b[i].clone() * gr_conj(&b[j]);
                let t = Complex::new(t.re / n2, t.im / n2);
                *proj.at_mut(i, j) = proj.at(i, j).clone() + t;
            }
        }
    }
    Ok((ortho, proj))
}

/// Orthogonal projector onto the span of possibly dependent columns.
pub fn projector_onto_span(cols: &[Vec<GaussRat>]) -> Result<ExactMat> {
    let dim = cols.first().map(|c| c.len()).unwrap_or(0);
    let indep = max_independent_columns(cols);
    if indep.is_empty() {
        return Ok(ExactMat::zeros(dim, dim));
    }
    let sel: Vec<Vec<GaussRat>> = indep.iter().map(|&i| cols[i].clone()).collect();
    Ok(gram_schmidt(&sel)?.1)
}

/// Orthogonal complement of the span of `cols`, as columns.
pub fn complement_basis(dim: usize, cols: &[Vec<GaussRat>]) -> Vec<Vec<GaussRat>> {
    let indep = max_independent_columns(cols);
    if indep.is_empty() {
        return (0..dim)
            .map(|i| {
                let mut e = vec![gr_zero(); dim];
                e[i] = gr_one();
                e
            })
            .collect();
    }
    let sel: Vec<Vec<GaussRat>> = indep.iter().map(|&i| cols[i].clone()).collect();
    let b = ExactMat::from_columns(dim, &sel);
    kernel_basis(&b.adjoint())
}

pub fn span_dim(cols: &[Vec<GaussRat>]) -> usize {
    max_independent_columns(cols).len()
}

/// dim(U ∩ W) = dim U + dim W − dim(U + W).
pub fn intersection_dim(u: &[Vec<GaussRat>], w: &[Vec<GaussRat>]) -> usize {
    let du = span_dim(u);
    let dw = span_dim(w);
    let all: Vec<Vec<GaussRat>> = u.iter().chain(w.iter()).cloned().collect();
    du + dw - span_dim(&all)
}

/// Same span test for two column sets.
pub fn same_span(u: &[Vec<GaussRat>], w: &[Vec<GaussRat>]) -> bool {
    let du = span_dim(u);
    let dw = span_dim(w);
    if du != dw {
        return false;
    }
    let all: Vec<Vec<GaussRat>> = u.iter().chain(w.iter()).cloned().collect();
    span_dim(&all) == du
}

/// Basis (columns) of `𝒜(U) = span{ A_i u }` for generators and a subspace basis.
pub fn space_image(generators: &[ExactMat], u_basis: &[Vec<GaussRat>]) -> Vec<Vec<GaussRat>> {
    let mut imgs: Vec<Vec<GaussRat>> = Vec::new();
    for g in generators {
        for u in u_basis {
            imgs.push(g.mul_vec(u));
        }
    }
    let picked = max_independent_columns(&imgs);
    picked.into_iter().map(|i| imgs[i].clone()).collect()
}

/// Best rational approximation with denominator at most `denom_bound`, by
/// the continued-fraction expansion (convergent or final semiconvergent).
pub fn continued_fraction_round(x: f64, denom_bound: u64) -> Result<BigRational> {
    if !x.is_finite() {
        return Err(Error::Invalid("continued_fraction_round: input must be finite".into()));
    }
    if denom_bound < 1 {
        return Err(Error::Invalid("denominator bound must be ≥ 1".into()));
    }
    let target = BigRational::from_float(x)
        .ok_or_else(|| Error::Invalid("cannot represent input as a rational".into()))?;
    let bound = BigInt::from(denom_bound);

    // convergents of the continued fraction of |target|
    let neg = target.is_negative();
    let mut num = target.numer().abs();
    let mut den = target.denom().clone();
    let mut h_prev = BigInt::zero();
    let mut h = BigInt::one();
    let mut k_prev = BigInt::one();
    let mut k = BigInt::zero();
    // (h/k) starts as 1/0, (h_prev/k_prev) as 0/1
    let mut exact_hit = false;
    while !den.is_zero() {
        let a = &num / &den;
        let r = &num % &den;
        let h_new = &a * &h + &h_prev;
        let k_new = &a * &k + &k_prev;
        if k_new > bound {
            // largest semiconvergent within the bound
            let t = (&bound - &k_prev) / &k;
            let sh = &h_prev + &t * &h;
            let sk = &k_prev + &t * &k;
            let conv = BigRational::new(h.clone(), k.clone());
            let abs_target = BigRational::new(num0(&target), target.denom().clone());
            let best = if sk.is_zero() {
                conv
            } else {
                let semi = BigRational::new(sh, sk);
                if (&semi - &abs_target).abs() < (&conv - &abs_target).abs() {
                    semi
                } else {
                    conv
                }
            };
            return Ok(signed(best, neg));
        }
        h_prev = std::mem::replace(&mut h, h_new);
        k_prev = std::mem::replace(&mut k, k_new);
        num = den;
        den = r;
        exact_hit = true;
    }
    let _ = exact_hit;
    Ok(signed(BigRational::new(h, k), neg))
}

fn num0(t: &BigRational) -> BigInt {
    t.numer().abs()
}

fn signed(v: BigRational, neg: bool) -> BigRational {
    if neg {
        -v
    } else {
        v
    }
}


#[cfg(test)]
mod tests {
    use super::*;

    fn e(re: i64) -> GaussRat {
        gr_from_i64(re, 0)
    }

    fn check_rnf(a: &ExactMat) {
        let rnf = gauss_eliminate(a);
        // q·q_inv = I
        assert_eq!(rnf.q.mul(&rnf.q_inv), ExactMat::identity(a.cols));
        // p·a·q⁻¹ = block identity
        let j = rnf.p.mul(a).mul(&rnf.q_inv);
        for i in 0..a.rows {
            for k in 0..a.cols {
                let want = if i == k && i < rnf.rank { gr_one() } else { gr_zero() };
                assert_eq!(*j.at(i, k), want, "J[{i}][{k}]");
            }
        }
    }

    #[test]
    fn eliminate_identity() {
        let a = ExactMat::identity(2);
        let rnf = gauss_eliminate(&a);
        assert_eq!(rnf.rank, 2);
        check_rnf(&a);
    }

    #[test]
    fn eliminate_zero() {
        let a = ExactMat::zeros(3, 3);
        assert_eq!(gauss_eliminate(&a).rank, 0);
        check_rnf(&a);
    }

    #[test]
    fn eliminate_rank_one() {
        // det [[1,2],[2,4]] = 0 and a nonzero entry exists, so rank 1
        let a = ExactMat::from_rows_i64(&[vec![(1, 0), (2, 0)], vec![(2, 0), (4, 0)]]);
        assert_eq!(gauss_eliminate(&a).rank, 1);
        check_rnf(&a);
    }

    #[test]
    fn eliminate_random_exact() {
        // deterministic "random": small integer grid incl. imaginary parts
        let cases = [
            ExactMat::from_rows_i64(&[vec![(1, 1), (0, 2)], vec![(3, 0), (1, -1)]]),
            ExactMat::from_rows_i64(&[
                vec![(2, 0), (1, 0), (0, 1)],
                vec![(0, 0), (0, 0), (0, 0)],
                vec![(2, 0), (1, 0), (0, 1)],
            ]),
            ExactMat::from_rows_i64(&[vec![(0, 0), (5, 0)], vec![(7, 0), (0, 0)], vec![(7, 0), (5, 0)]]),
        ];
        for a in &cases {
            check_rnf(a);
        }
    }

    #[test]
    fn pseudoinverse_identity() {
        let a = ExactMat::identity(3);
        let p = pseudoinverse(&a);
        assert_eq!(a.mul(&p), ExactMat::identity(3));
    }

    #[test]
    fn pseudoinverse_fixes_image() {
        // diag(1,0): A·A⁺ must fix e₁ = Im(A)
        let a = ExactMat::from_rows_i64(&[vec![(1, 0), (0, 0)], vec![(0, 0), (0, 0)]]);
        let ap = pseudoinverse(&a);
        assert_eq!(rank(&ap), 2, "pseudoinverse must be nonsingular");
        let aap = a.mul(&ap);
        let e1 = vec![gr_one(), gr_zero()];
        assert_eq!(aap.mul_vec(&e1), e1);
    }

    #[test]
    fn pseudoinverse_e12() {
        // A = e₁e₂ᵀ: Im(A) = ⟨e₁⟩, check A·A⁺·e₁ = e₁
        let a = ExactMat::from_rows_i64(&[vec![(0, 0), (1, 0)], vec![(0, 0), (0, 0)]]);
        let ap = pseudoinverse(&a);
        assert_eq!(rank(&ap), 2);
        let e1 = vec![gr_one(), gr_zero()];
        assert_eq!(a.mul(&ap).mul_vec(&e1), e1);
    }

    #[test]
    fn gram_schmidt_examples() {
        // {e₁, e₁+e₂} in ℂ³ → orthogonal {e₁, e₂}, projector diag(1,1,0)
        let b1 = vec![e(1), e(0), e(0)];
        let b2 = vec![e(1), e(1), e(0)];
        let (ortho, proj) = gram_schmidt(&[b1, b2]).unwrap();
        assert_eq!(ortho[1], vec![e(0), e(1), e(0)]);
        let mut want = ExactMat::zeros(3, 3);
        *want.at_mut(0, 0) = gr_one();
        *want.at_mut(1, 1) = gr_one();
        assert_eq!(proj, want);

        // {(1,1)} in ℂ² → [[1/2,1/2],[1/2,1/2]]
        let (_, p) = gram_schmidt(&[vec![e(1), e(1)]]).unwrap();
        let half = gr_from_rational(
            BigRational::new(BigInt::from(1), BigInt::from(2)),
            BigRational::zero(),
        );
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(*p.at(i, j), half);
            }
        }

        // {(1,2),(0,1)} spans ℂ² → projector = identity
        let (_, p) = gram_schmidt(&[vec![e(1), e(2)], vec![e(0), e(1)]]).unwrap();
        assert_eq!(p, ExactMat::identity(2));
    }

    #[test]
    fn gram_schmidt_projector_laws() {
        let basis = vec![vec![e(1), e(2), e(0), e(1)], vec![gr_from_i64(0, 1), e(1), e(1), e(0)]];
        let (ortho, p) = gram_schmidt(&basis).unwrap();
        // idempotent and Hermitian, exactly
        assert_eq!(p.mul(&p), p);
        assert!(p.is_hermitian());
        // fixes each input vector
        for v in &basis {
            assert_eq!(p.mul_vec(v), *v);
        }
        // pairwise orthogonal output
        let ip: GaussRat = (0..4).map(|k| gr_conj(&ortho[0][k]) * ortho[1][k].clone()).sum();
        assert!(gr_is_zero(&ip));
        // π_U + π_{U⊥} = I
        let comp = complement_basis(4, &basis);
        let (_, pc) = gram_schmidt(&comp).unwrap();
        assert_eq!(p.add(&pc), ExactMat::identity(4));
    }

    #[test]
    fn gram_schmidt_rejects_dependent() {
        let r = gram_schmidt(&[vec![e(1), e(1)], vec![e(2), e(2)]]);
        assert!(matches!(r, Err(Error::DependentInput(_))));
    }

    #[test]
    fn max_independent_examples() {
        let e1 = vec![e(1), e(0)];
        let e2 = vec![e(0), e(1)];
        assert_eq!(max_independent_columns(&[e1.clone(), e1.clone(), e2.clone()]), vec![0, 2]);
        assert_eq!(max_independent_columns(&[vec![e(0), e(0)], vec![e(0), e(0)]]), Vec::<usize>::new());
        // {(1,0),(1,1),(2,1)} → {0,1} by prefix rank
        let v = [vec![e(1), e(0)], vec![e(1), e(1)], vec![e(2), e(1)]];
        assert_eq!(max_independent_columns(&v), vec![0, 1]);
    }

    #[test]
    fn kernel_and_image() {
        let a = ExactMat::from_rows_i64(&[vec![(1, 0), (2, 0)], vec![(2, 0), (4, 0)]]);
        let k = kernel_basis(&a);
        assert_eq!(k.len(), 1);
        assert!(a.mul_vec(&k[0]).iter().all(gr_is_zero));
        let im = image_basis(&a);
        assert_eq!(im.len(), 1);
        // image is spanned by (1,2)
        assert!(in_span(&[vec![e(1), e(2)]], &im[0]));
    }

    #[test]
    fn bit_growth_stays_polynomial() {
        // bit-growth sanity: elimination on n×n Gaussian-integer inputs of
        // magnitude ≤ M keeps entries within c·n·(log₂ n + log₂ M) bits.
        let n = 6usize;
        let m = 8i64;
        let mut vals = Vec::new();
        let mut s = 1i64;
        for i in 0..n * n {
            s = (s * 31 + i as i64 * 17) % (2 * m + 1);
            vals.push((s - m, (s * 7 % (2 * m + 1)) - m));
        }
        let a = ExactMat::from_i64(n, n, &vals);
        let rnf = gauss_eliminate(&a);
        let bound = 16.0 * n as f64 * ((n as f64).log2() + (m as f64).log2());
        for mat in [&rnf.p, &rnf.q, &rnf.q_inv] {
            assert!((mat.max_bits() as f64) <= bound, "bits {} > bound {}", mat.max_bits(), bound);
        }
    }

    #[test]
    fn gaussian_rational_strings() {
        assert_eq!(gr_to_string(&gr_from_i64(1, 0)), "1/1");
        assert_eq!(gr_to_string(&gr_from_i64(-2, 3)), "-2/1+(3/1)i");
        let half = gr_from_rational(
            BigRational::new(BigInt::from(-1), BigInt::from(2)),
            BigRational::new(BigInt::from(-3), BigInt::from(4)),
        );
        assert_eq!(gr_to_string(&half), "-1/2-(3/4)i");
    }
}
