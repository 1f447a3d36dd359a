//! Floating Hermitian linear algebra: dense complex matrices, a cyclic
//! Jacobi eigensolver with an explicit accuracy contract, CP-map
//! application, implicit PSD representations, and a scale-graded PSD
//! eigensolver for spectra whose dynamic range exceeds what f64 can hold
//! in linear scale.

use num_complex::Complex64 as C64;

use crate::exactla::{gr_to_f64, ExactMat};
use crate::{Error, Result};

/// Dense complex matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<C64>,
}

impl CMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let r = rows.len();
        let c = if r == 0 { 0 } else { rows[0].len() };
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            assert_eq!(row.len(), c);
            data.extend_from_slice(row);
        }
        CMat { rows: r, cols: c, data }
    }

    pub fn from_exact(m: &ExactMat) -> Self {
        CMat {
            rows: m.rows,
            cols: m.cols,
            data: m
                .entries
                .iter()
                .map(|e| {
                    let (re, im) = gr_to_f64(e);
                    C64::new(re, im)
                })
                .collect(),
        }
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows);
        let mut out = CMat::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self[(i, j)] * v[j]).sum())
            .collect()
    }

    /// self† · v
    pub fn adjoint_mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.rows, v.len());
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].conj() * v[i]).sum())
            .collect()
    }

    pub fn adjoint(&self) -> CMat {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, c: f64) -> CMat {
        CMat { rows: self.rows, cols: self.cols, data: self.data.iter().map(|a| a * c).collect() }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn fro_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Force (A + A†)/2.
    pub fn hermitize(&self) -> CMat {
        assert_eq!(self.rows, self.cols);
        let mut out = self.clone();
        for i in 0..self.rows {
            for j in 0..=i {
                let v = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        for i in 0..self.rows {
            out[(i, i)] = C64::new(out[(i, i)].re, 0.0);
        }
        out
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        if self.rows != self.cols {
            return false;
        }
        let scale = self.fro_norm().max(1.0);
        self.sub(&self.adjoint()).fro_norm() <= tol * scale
    }

    /// Add c · v v† in place.
    pub fn rank1_update(&mut self, v: &[C64], c: f64) {
        let n = self.rows;
        assert_eq!(v.len(), n);
        for i in 0..n {
            let vi = v[i] * c;
            for j in 0..n {
                self[(i, j)] += vi * v[j].conj();
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for CMat {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Eigendecomposition of a Hermitian matrix: `values` nonincreasing,
/// `vectors` has the eigenvectors as columns, `delta` is the accuracy the
/// decomposition was computed to (relative to the matrix norm).
#[derive(Clone, Debug)]
pub struct EigDecomposition {
    pub values: Vec<f64>,
    pub vectors: CMat,
    pub delta: f64,
}

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Deterministic given `(a, delta)`. The achievable accuracy bottoms out at
/// hardware epsilon; `delta` below that is clamped.
pub fn hermitian_eig(a: &CMat, delta: f64) -> Result<EigDecomposition> {
    if a.rows != a.cols {
        return Err(Error::Dimension(format!("eig expects square, got {}x{}", a.rows, a.cols)));
    }
    if delta <= 0.0 {
        return Err(Error::Invalid("eig accuracy must be positive".into()));
    }
    if !a.is_hermitian(1e-10) {
        return Err(Error::Invalid("eig input is not Hermitian".into()));
    }
    let delta_eff = delta.max(1e-15);
    let mut w = a.hermitize();
    let n = w.rows;
    let mut v = CMat::identity(n);
    if n > 1 {
        let scale = w.fro_norm();
        let thresh = delta_eff * scale.max(f64::MIN_POSITIVE) / (n as f64);
        for _sweep in 0..60 {
            let mut off = 0.0f64;
            for p in 0..n {
                for q in p + 1..n {
                    off += w[(p, q)].norm_sqr();
                }
            }
            if (2.0 * off).sqrt() <= thresh {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut w, &mut v, p, q);
                }
            }
        }
    }
    let mut pairs: Vec<(f64, Vec<C64>)> =
        (0..n).map(|i| (w[(i, i)].re, v.column(i))).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<f64> = pairs.iter().map(|p| p.0).collect();
    let mut vectors = CMat::zeros(n, n);
    for (j, (_, col)) in pairs.iter().enumerate() {
        let col = normalize_phase(col);
        for i in 0..n {
            vectors[(i, j)] = col[i];
        }
    }
    Ok(EigDecomposition { values, vectors, delta: delta_eff })
}

/// One complex Jacobi rotation annihilating w[p][q].
fn jacobi_rotate(w: &mut CMat, v: &mut CMat, p: usize, q: usize) {
    let apq = w[(p, q)];
    let norm = apq.norm();
    if norm == 0.0 {
        return;
    }
    let app = w[(p, p)].re;
    let aqq = w[(q, q)].re;
    let phase = apq / norm; // e^{iφ}
    // real rotation on the phase-adjusted block [[app, |apq|], [|apq|, aqq]]
    let tau = (aqq - app) / (2.0 * norm);
    let t = if tau >= 0.0 {
        1.0 / (tau + (1.0 + tau * tau).sqrt())
    } else {
        -1.0 / (-tau + (1.0 + tau * tau).sqrt())
    };
    let c = 1.0 / (1.0 + t * t).sqrt();
    let s = t * c;
    // u_pp = c, u_pq = s·conj? Using U = D·R with D = diag(1, e^{-iφ}):
    // U_pp = c, U_pq = s, U_qp = -s·e^{-iφ}, U_qq = c·e^{-iφ}
    let upp = C64::new(c, 0.0);
    let upq = C64::new(s, 0.0);
    let uqp = -phase.conj() * s;
    let uqq = phase.conj() * c;
    let n = w.rows;
    // w ← U† w U
    for i in 0..n {
        let wip = w[(i, p)];
        let wiq = w[(i, q)];
        w[(i, p)] = wip * upp + wiq * uqp;
        w[(i, q)] = wip * upq + wiq * uqq;
    }
    for j in 0..n {
        let wpj = w[(p, j)];
        let wqj = w[(q, j)];
        w[(p, j)] = upp.conj() * wpj + uqp.conj() * wqj;
        w[(q, j)] = upq.conj() * wpj + uqq.conj() * wqj;
    }
    w[(p, q)] = C64::new(0.0, 0.0);
    w[(q, p)] = C64::new(0.0, 0.0);
    w[(p, p)] = C64::new(w[(p, p)].re, 0.0);
    w[(q, q)] = C64::new(w[(q, q)].re, 0.0);
    // v ← v U
    for i in 0..v.rows {
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * upp + viq * uqp;
        v[(i, q)] = vip * upq + viq * uqq;
    }
}

/// Deterministic phase: make the largest-modulus component real positive.
fn normalize_phase(col: &[C64]) -> Vec<C64> {
    let mut best = 0usize;
    let mut best_norm = -1.0f64;
    for (i, c) in col.iter().enumerate() {
        let n = c.norm_sqr();
        if n > best_norm + 1e-18 {
            best_norm = n;
            best = i;
        }
    }
    if best_norm <= 0.0 {
        return col.to_vec();
    }
    let ph = col[best] / col[best].norm();
    col.iter().map(|c| c * ph.conj()).collect()
}

/// A completely positive map `X ↦ Σᵢ AᵢXAᵢ†` given by its Kraus operators.
#[derive(Clone, Debug)]
pub struct CpMap {
    pub kraus: Vec<CMat>,
    /// output dimension (rows of each Kraus operator)
    pub m: usize,
    /// input dimension (columns of each Kraus operator)
    pub n: usize,
    /// magnitude bound on the original Gaussian-integer entries
    pub entry_bound: f64,
}

impl CpMap {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        if kraus.is_empty() {
            return Err(Error::Invalid("CP map needs at least one Kraus operator".into()));
        }
        let (m, n) = (kraus[0].rows, kraus[0].cols);
        for k in &kraus {
            if (k.rows, k.cols) != (m, n) {
                return Err(Error::Dimension("Kraus operators must share a shape".into()));
            }
        }
        let entry_bound = kraus
            .iter()
            .flat_map(|k| k.data.iter())
            .map(|c| c.re.abs().max(c.im.abs()))
            .fold(0.0f64, f64::max)
            .max(1.0);
        Ok(CpMap { kraus, m, n, entry_bound })
    }

    pub fn from_exact(mats: &[ExactMat]) -> Result<Self> {
        Self::new(mats.iter().map(CMat::from_exact).collect())
    }

    pub fn num_kraus(&self) -> usize {
        self.kraus.len()
    }

    /// Tr Φ(Iₙ) = Σᵢ ‖Aᵢ‖_F².
    pub fn size(&self) -> f64 {
        self.kraus.iter().map(|k| k.fro_norm().powi(2)).sum()
    }

    /// Φ(X) = Σ AᵢXAᵢ†.
    pub fn apply(&self, x: &CMat) -> Result<CMat> {
        if x.rows != self.n || x.cols != self.n {
            return Err(Error::Dimension(format!(
                "apply_cp: X must be {0}x{0}, got {1}x{2}",
                self.n, x.rows, x.cols
            )));
        }
        let mut out = CMat::zeros(self.m, self.m);
        for a in &self.kraus {
            out = out.add(&a.mul(x).mul(&a.adjoint()));
        }
        Ok(out.hermitize())
    }

    /// Φ*(Y) = Σ Aᵢ†YAᵢ.
    pub fn apply_adjoint(&self, y: &CMat) -> Result<CMat> {
        if y.rows != self.m || y.cols != self.m {
            return Err(Error::Dimension(format!(
                "apply_adjoint: Y must be {0}x{0}, got {1}x{2}",
                self.m, y.rows, y.cols
            )));
        }
        let mut out = CMat::zeros(self.n, self.n);
        for a in &self.kraus {
            out = out.add(&a.adjoint().mul(y).mul(a));
        }
        Ok(out.hermitize())
    }

    /// Copy scaled by `c` on each Kraus operator.
    pub fn scaled(&self, c: f64) -> CpMap {
        CpMap {
            kraus: self.kraus.iter().map(|k| k.scale(c)).collect(),
            m: self.m,
            n: self.n,
            entry_bound: self.entry_bound,
        }
    }
}

/// PSD matrix held as eigenvalues plus a reference Hermitian matrix whose
/// eigenbasis (in nonincreasing eigenvalue order) carries them.
#[derive(Clone, Debug)]
pub struct ImplicitPsd {
    pub eigvals: Vec<f64>,
    pub reference: CMat,
}

impl ImplicitPsd {
    pub fn new(eigvals: Vec<f64>, reference: CMat) -> Result<Self> {
        if eigvals.len() != reference.rows || reference.rows != reference.cols {
            return Err(Error::Dimension("ImplicitPsd: eigval count must match reference".into()));
        }
        if eigvals.iter().any(|&v| v < 0.0) {
            return Err(Error::Invalid("ImplicitPsd: eigenvalues must be nonnegative".into()));
        }
        let mut sorted = eigvals.clone();
        sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
        if sorted != eigvals {
            return Err(Error::Invalid("ImplicitPsd: eigenvalues must be nonincreasing".into()));
        }
        Ok(ImplicitPsd { eigvals, reference })
    }

    /// U diag(f(eigvals)) U† for the reference's eigenbasis U.
    pub fn materialize_map(&self, delta: f64, f: impl Fn(f64) -> f64) -> Result<CMat> {
        let eig = hermitian_eig(&self.reference, delta)?;
        let n = self.eigvals.len();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            let col = eig.vectors.column(j);
            out.rank1_update(&col, f(self.eigvals[j]));
        }
        Ok(out.hermitize())
    }

    pub fn materialize(&self, delta: f64) -> Result<CMat> {
        self.materialize_map(delta, |v| v)
    }

    pub fn materialize_inverse(&self, delta: f64) -> Result<CMat> {
        self.materialize_map(delta, |v| 1.0 / v)
    }

    pub fn materialize_sqrt(&self, delta: f64) -> Result<CMat> {
        self.materialize_map(delta, |v| v.sqrt())
    }
}

/// One PSD summand `e^{log_scale} · G` of a graded PSD matrix.
#[derive(Clone, Debug)]
pub struct ScaledPsdTerm {
    pub log_scale: f64,
    pub mat: CMat,
}

/// Eigen-pair of a graded PSD matrix in log scale. `log_value` is
/// `f64::NEG_INFINITY` for (numerical) kernel directions.
#[derive(Clone, Debug)]
pub struct LogEigPair {
    pub log_value: f64,
    pub vector: Vec<C64>,
}

/// Eigendecomposition of `Σ e^{sᵢ}Gᵢ` across a dynamic range far beyond
/// f64, by banded deflation: diagonalize the dominant band, emit its
/// eigenpairs, project the terms onto the complement and recurse. Pairs
/// with `log_value < log_floor` are reported as kernel.
pub fn scaled_psd_eig(dim: usize, terms: &[ScaledPsdTerm], log_floor: f64) -> Result<Vec<LogEigPair>> {
    const EMIT_WINDOW: f64 = 14.0; // keep λ ≥ λ_max·e^{-EMIT_WINDOW} per round
    const TERM_WINDOW: f64 = 45.0; // terms more than e^{-45} below the band are deferred

    let mut q: CMat = CMat::identity(dim); // columns span the unresolved space
    let mut work: Vec<(f64, CMat)> = terms
        .iter()
        .filter(|t| t.mat.fro_norm() > 0.0)
        .map(|t| (t.log_scale, t.mat.hermitize()))
        .collect();
    let mut out: Vec<LogEigPair> = Vec::new();

    let max_rounds = 4 * dim + 64;
    for _round in 0..max_rounds {
        let d = q.cols;
        if d == 0 {
            break;
        }
        // current Rayleigh scale of each term: log_scale + log tr(G)
        let mut base = f64::NEG_INFINITY;
        for (s, g) in &work {
            let tr = g.trace().re.max(0.0);
            if tr > 0.0 {
                base = base.max(s + tr.ln());
            }
        }
        if base < log_floor - 5.0 {
            break; // everything left is below the floor
        }
        let mut m = CMat::zeros(d, d);
        for (s, g) in &work {
            let w = s - base;
            if w < -TERM_WINDOW {
                continue;
            }
            // per-entry balanced scaling: w can exceed 709 when a term's
            // trace is subnormal, so e^w must never be formed on its own
            for a in 0..d {
                for b in 0..d {
                    let v = g[(a, b)];
                    let mag = v.norm();
                    if mag == 0.0 {
                        continue;
                    }
                    let e = w + mag.ln();
                    if e < -745.0 {
                        continue;
                    }
                    m[(a, b)] += v / mag * e.min(705.0).exp();
                }
            }
        }
        let eig = hermitian_eig(&m.hermitize(), 1e-14)?;
        let lam_max = eig.values.first().copied().unwrap_or(0.0);
        if lam_max <= 0.0 {
            break;
        }
        let keep_floor = lam_max * (-EMIT_WINDOW).exp();
        let mut kept = 0usize;
        for (j, &lam) in eig.values.iter().enumerate() {
            if lam >= keep_floor && lam > 0.0 {
                let v = eig.vectors.column(j);
                out.push(LogEigPair { log_value: base + lam.ln(), vector: q.mul_vec(&v) });
                kept += 1;
            } else {
                break; // values sorted nonincreasing
            }
        }
        if kept == d {
            q = CMat::zeros(dim, 0);
            break;
        }
        // rotate the unresolved space and the terms into it
        let mut drop = CMat::zeros(d, d - kept);
        for j in kept..d {
            for i in 0..d {
                drop[(i, j - kept)] = eig.vectors[(i, j)];
            }
        }
        q = q.mul(&drop);
        let dropped_adj = drop.adjoint();
        work = work
            .into_iter()
            .map(|(s, g)| (s, dropped_adj.mul(&g).mul(&drop).hermitize()))
            .filter(|(s, g)| {
                let tr = g.trace().re;
                tr > 0.0 && s + tr.ln() >= log_floor - 60.0
            })
            .collect();
        if work.is_empty() {
            break;
        }
    }
    for j in 0..q.cols {
        out.push(LogEigPair { log_value: f64::NEG_INFINITY, vector: q.column(j) });
    }
    out.sort_by(|a, b| b.log_value.partial_cmp(&a.log_value).unwrap_or(std::cmp::Ordering::Equal));
    // final hygiene pass: re-orthonormalize in emission order
    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(dim);
    for pair in &mut out {
        let mut v = pair.vector.clone();
        for b in &basis {
            let ip: C64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi -= ip * bi;
            }
        }
        let norm = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-8 {
            for vi in v.iter_mut() {
                *vi /= norm;
            }
        }
        pair.vector = normalize_phase(&v);
        basis.push(pair.vector.clone());
    }
    Ok(out)
}

/// Σᵢ e^{z − cᵢ} D^{-1/2} Gᵢ D^{-1/2} with D = diag(e^{damp}), assembled
/// entrywise in log scale. Finished entries are expected to be bounded
/// (the caller guarantees a trace bound), but individual exponents are
/// not, hence the per-entry treatment.
pub fn assemble_balanced(g: &[CMat], c: &[f64], damp: &[f64], z: f64) -> CMat {
    let n = damp.len();
    let mut out = CMat::zeros(n, n);
    for (gi, &ci) in g.iter().zip(c) {
        let coeff = z - ci;
        for a in 0..n {
            for b in a..n {
                let v = gi[(a, b)];
                let mag = v.norm();
                if mag == 0.0 {
                    continue;
                }
                let e = coeff - 0.5 * (damp[a] + damp[b]) + mag.ln();
                if e < -745.0 {
                    continue;
                }
                let term = v / mag * e.exp();
                out[(a, b)] += term;
                if b != a {
                    out[(b, a)] += term.conj();
                }
            }
        }
    }
    out.hermitize()
}

/// log(Σ e^{xᵢ}) with empty-sum → −∞.
pub fn log_sum_exp(vals: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = vals.filter(|x| !x.is_nan()).collect();
    let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}
