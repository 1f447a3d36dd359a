//! Applications of the scaling machinery to line sets: fractional linear
//! matroid matching, dominant 2-covers, weighted optimization over the
//! fractional matching polytope P(B), and ε-membership for rank-2 P(B).
//!
//! Every line is a pair of vectors in ℂⁿ; for the BL-style operations the
//! line is used as a full-row-rank matrix Bᵢ with 1 or 2 rows. The exact
//! routes (wedge spaces, 2-covers, half-integral membership) run over
//! Gaussian rationals; the Sinkhorn routes run in f64 with per-line scale
//! bookkeeping so that divergence floors stay reachable.

use num_complex::Complex64 as C64;

use crate::exactla::{
    complement_basis, gr_from_i64, intersection_dim, max_independent_columns, span_dim, ExactMat,
    GaussRat,
};
use crate::numla::{assemble_balanced, hermitian_eig, log_sum_exp, scaled_psd_eig, CMat, CpMap, ScaledPsdTerm};
use crate::opscale::{maj_sinkhorn_coupled, ncrank_exact, MajSpec, OpScaleSettings, ScaleOutcome};
use crate::permproj::{halfspace_project, kl_project_log, MajorizationTarget};
use crate::shrunk::{randomized_shrunk, round_subspaces, RoundOptions};
use crate::{Error, Result};

/// A line: the row space of the pair (a, b) in ℂⁿ.
#[derive(Clone, Debug)]
pub struct Line {
    pub a: Vec<GaussRat>,
    pub b: Vec<GaussRat>,
}

/// A set of p lines in ℂⁿ.
#[derive(Clone, Debug)]
pub struct LineSet {
    pub n: usize,
    pub lines: Vec<Line>,
}

impl LineSet {
    pub fn from_integer_pairs(n: usize, pairs: &[(Vec<i64>, Vec<i64>)]) -> Result<Self> {
        let mut lines = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a.len() != n || b.len() != n {
                return Err(Error::Dimension("line vectors must have length n".into()));
            }
            lines.push(Line {
                a: a.iter().map(|&v| gr_from_i64(v, 0)).collect(),
                b: b.iter().map(|&v| gr_from_i64(v, 0)).collect(),
            });
        }
        Ok(LineSet { n, lines })
    }

    pub fn p(&self) -> usize {
        self.lines.len()
    }

    /// Exact rank of the line (0, 1 or 2).
    pub fn line_rank(&self, i: usize) -> usize {
        span_dim(&[self.lines[i].a.clone(), self.lines[i].b.clone()])
    }

    /// Exact basis of the row space of line i.
    pub fn row_space(&self, i: usize) -> Vec<Vec<GaussRat>> {
        let cols = vec![self.lines[i].a.clone(), self.lines[i].b.clone()];
        let picked = max_independent_columns(&cols);
        picked.into_iter().map(|j| cols[j].clone()).collect()
    }

    /// Bᵢ as a full-row-rank nᵢ×n float matrix (nᵢ = rank of the line).
    pub fn b_matrix(&self, i: usize) -> Result<CMat> {
        let rows = self.row_space(i);
        if rows.is_empty() {
            return Err(Error::Invalid(format!("line {i} is zero")));
        }
        let e = ExactMat::from_columns(self.n, &rows).transpose();
        Ok(CMat::from_exact(&e))
    }

    /// Wedge matrices aᵢ∧bᵢ of all lines, exact.
    pub fn wedge_generators(&self) -> Vec<ExactMat> {
        self.lines.iter().map(|l| wedge(&l.a, &l.b)).collect()
    }

    pub fn entry_bound(&self) -> f64 {
        let mut m: f64 = 1.0;
        for l in &self.lines {
            for v in l.a.iter().chain(&l.b) {
                let (re, im) = crate::exactla::gr_to_f64(v);
                m = m.max(re.abs()).max(im.abs());
            }
        }
        m
    }
}

/// a∧b = abᵀ − baᵀ (plain transpose; skew-symmetric by construction).
pub fn wedge(a: &[GaussRat], b: &[GaussRat]) -> ExactMat {
    let n = a.len();
    assert_eq!(b.len(), n);
    let mut out = ExactMat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            *out.at_mut(i, j) = a[i].clone() * b[j].clone() - b[i].clone() * a[j].clone();
        }
    }
    out
}

/// A fractional linear matroid matching with its certificates.
#[derive(Clone, Debug)]
pub struct FractionalMatching {
    pub x: Vec<f64>,
    pub value: f64,
    /// guaranteed fraction of the optimum, 1/(1+ε)
    pub quality: f64,
    /// twice the optimum (the noncommutative rank of the wedge space)
    pub k: usize,
    /// transformed line vectors (ãᵢ, b̃ᵢ) carrying the feasibility
    /// certificate Σ xᵢ π_{span(ãᵢ,b̃ᵢ)} ⪯ I
    pub tilde: Vec<(Vec<C64>, Vec<C64>)>,
}

/// Exact nested 2-cover (S ⊆ T).
#[derive(Clone, Debug)]
pub struct TwoCover {
    pub s_basis: Vec<Vec<GaussRat>>,
    pub t_basis: Vec<Vec<GaussRat>>,
    pub k_star: usize,
}

/// λ_max(Σ xᵢ π_{span(aᵢ,bᵢ)}) ≤ 1 + tol, with the top eigenvector as a
/// violation hint on failure.
pub fn verify_matching(
    spans: &[(Vec<C64>, Vec<C64>)],
    x: &[f64],
    tol: f64,
) -> Result<(bool, Option<Vec<C64>>)> {
    if spans.len() != x.len() {
        return Err(Error::Dimension("verify_matching: length mismatch".into()));
    }
    let n = match spans.first() {
        Some((a, _)) => a.len(),
        None => return Ok((true, None)),
    };
    let mut sum = CMat::zeros(n, n);
    for ((a, b), &xi) in spans.iter().zip(x) {
        if xi == 0.0 {
            continue;
        }
        if xi < 0.0 {
            return Err(Error::Invalid("verify_matching: negative weight".into()));
        }
        for v in orthonormalize(&[a.clone(), b.clone()]) {
            sum.rank1_update(&v, xi);
        }
    }
    let eig = hermitian_eig(&sum.hermitize(), 1e-13)?;
    let lmax = eig.values.first().copied().unwrap_or(0.0);
    if lmax <= 1.0 + tol {
        Ok((true, None))
    } else {
        Ok((false, Some(eig.vectors.column(0))))
    }
}

/// verify_matching against the lines' own (exact-derived) row spaces.
pub fn verify_matching_lines(lines: &LineSet, x: &[f64], tol: f64) -> Result<(bool, Option<Vec<C64>>)> {
    let spans: Vec<(Vec<C64>, Vec<C64>)> = lines
        .lines
        .iter()
        .map(|l| (to_c64(&l.a), to_c64(&l.b)))
        .collect();
    verify_matching(&spans, x, tol)
}

fn to_c64(v: &[GaussRat]) -> Vec<C64> {
    v.iter()
        .map(|g| {
            let (re, im) = crate::exactla::gr_to_f64(g);
            C64::new(re, im)
        })
        .collect()
}

fn orthonormalize(vecs: &[Vec<C64>]) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    for v in vecs {
        let mut w = v.clone();
        for b in &basis {
            let ip: C64 = b.iter().zip(&w).map(|(x, y)| x.conj() * y).sum();
            for (wi, bi) in w.iter_mut().zip(b) {
                *wi -= ip * bi;
            }
        }
        let norm = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-9 {
            for wi in w.iter_mut() {
                *wi /= norm;
            }
            basis.push(w);
        }
    }
    basis
}

/// (1−ε)-maximum fractional linear matroid matching via symmetric
/// operator scaling of the wedge space.
pub fn frac_matroid_matching(
    lines: &LineSet,
    eps: f64,
    settings: &OpScaleSettings,
    use_symmetric_shortcut: bool,
) -> Result<FractionalMatching> {
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::Invalid("eps must lie in (0,1)".into()));
    }
    for i in 0..lines.p() {
        if lines.line_rank(i) != 2 {
            return Err(Error::Invalid(format!(
                "frac_matroid_matching expects rank-2 lines; line {i} has rank {}",
                lines.line_rank(i)
            )));
        }
    }
    let n = lines.n;
    let wedges = lines.wedge_generators();
    let map = CpMap::from_exact(&wedges)?;
    let k = ncrank_exact(&wedges, settings)?;
    if k == 0 {
        return Ok(FractionalMatching {
            x: vec![0.0; lines.p()],
            value: 0.0,
            quality: 1.0 / (1.0 + eps),
            k,
            tilde: lines.lines.iter().map(|l| (to_c64(&l.a), to_c64(&l.b))).collect(),
        });
    }
    let eps_run = eps / 2.0;
    let spec = MajSpec::new(MajorizationTarget::ones(n), MajorizationTarget::ones(n), k as f64, 0)?;
    let outcome = if use_symmetric_shortcut {
        maj_sinkhorn_coupled(&map, &spec, eps_run, settings)?
    } else {
        crate::opscale::maj_sinkhorn(&map, &spec, eps_run, settings)?
    };
    let (iterate, log_divisor) = match outcome {
        ScaleOutcome::Scaled { iterate, log_divisor, .. } => (iterate, log_divisor),
        ScaleOutcome::Diverged { .. } => {
            return Err(Error::Solver(
                "frac_matroid_matching: scaling diverged at k = ncrank (unexpected)".into(),
            ))
        }
    };
    // g = e^{z/2}·conj(X)^{-1/2} up to the input normalization: the wedge
    // identity ã∧b̃ = gAgᵀ needs g acting on the ORIGINAL vectors, so the
    // normalization divisor is folded into e^{z/2} here.
    if iterate.x_log.iter().any(|&v| v > 600.0) || iterate.z > 1200.0 {
        return Err(Error::Solver("frac_matroid_matching: iterate out of float range".into()));
    }
    let mut xinvsqrt_conj = CMat::zeros(n, n);
    for j in 0..n {
        let col: Vec<C64> = iterate.ux.column(j).iter().map(|c| c.conj()).collect();
        xinvsqrt_conj.rank1_update(&col, (-iterate.x_log[j] / 2.0).exp());
    }
    // Ãᵢ = g·Aᵢ·gᵀ carries two copies of g, so the map-level scalar
    // e^{z−log_divisor} enters g with exponent quartered
    let gscale = ((iterate.z - log_divisor) / 4.0).exp();
    let g = xinvsqrt_conj.scale(gscale);

    let mut x = Vec::with_capacity(lines.p());
    let mut tilde = Vec::with_capacity(lines.p());
    for l in &lines.lines {
        let ta = g.mul_vec(&to_c64(&l.a));
        let tb = g.mul_vec(&to_c64(&l.b));
        let na: f64 = ta.iter().map(|c| c.norm_sqr()).sum();
        let nb: f64 = tb.iter().map(|c| c.norm_sqr()).sum();
        let ip: C64 = ta.iter().zip(&tb).map(|(p, q)| p.conj() * q).sum();
        let gram = (na * nb - ip.norm_sqr()).max(0.0);
        x.push(gram / (1.0 + eps));
        tilde.push((ta, tb));
    }
    // certificate: Σ xᵢ π_{Im Ãᵢ} ⪯ I
    let (ok, _) = verify_matching(&tilde, &x, 1e-9)?;
    if !ok {
        return Err(Error::Verification(
            "frac_matroid_matching: scaled projector sum exceeds the identity".into(),
        ));
    }
    let value = x.iter().sum();
    Ok(FractionalMatching { x, value, quality: 1.0 / (1.0 + eps), k, tilde })
}

/// The dominant 2-cover (S*, T*) = (L*^⊥, R*^⊥) of the wedge space,
/// exact, with the cover inequalities verified on rank-2 lines.
pub fn dominant_two_cover(lines: &LineSet, opts: &RoundOptions) -> Result<TwoCover> {
    let n = lines.n;
    let wedges = lines.wedge_generators();
    if wedges.iter().all(|w| w.is_zero()) {
        return Ok(TwoCover { s_basis: vec![], t_basis: vec![], k_star: 0 });
    }
    let out = round_subspaces(&wedges, opts)?;
    let s_basis = complement_basis(n, &out.l_basis);
    let t_basis = complement_basis(n, &out.r_basis);
    // nested: S ⊆ T
    if intersection_dim(&s_basis, &t_basis) != s_basis.len() {
        return Err(Error::Verification("dominant 2-cover is not nested".into()));
    }
    if s_basis.len() + t_basis.len() != out.k_star {
        return Err(Error::Verification("2-cover size differs from ncrank".into()));
    }
    for i in 0..lines.p() {
        if lines.line_rank(i) != 2 {
            continue;
        }
        let row = lines.row_space(i);
        let cover = intersection_dim(&s_basis, &row) + intersection_dim(&t_basis, &row);
        if cover < 2 {
            return Err(Error::Verification(format!("cover inequality fails on line {i}")));
        }
    }
    Ok(TwoCover { s_basis, t_basis, k_star: out.k_star })
}

/// Per-line state at the current X = Ux·diag(e^{x_log})·Ux†:
/// C = B X⁻¹ B† ≈ e^{s}·chat, with log det C computed by Cauchy-Binet.
struct BlockEval {
    s: f64,
    chat: CMat,
    log_det: f64,
    /// B·Ux (nᵢ × n)
    r: CMat,
    ni: usize,
}

fn eval_block(b: &CMat, x_log: &[f64], ux: &CMat) -> BlockEval {
    let r = b.mul(ux);
    let ni = b.rows;
    let n = x_log.len();
    let x_min = x_log.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut chat = CMat::zeros(ni, ni);
    for s in 0..ni {
        for t in 0..ni {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..n {
                acc += r[(s, a)] * r[(t, a)].conj() * (-(x_log[a] - x_min)).exp();
            }
            chat[(s, t)] = acc;
        }
    }
    let log_det = match ni {
        1 => log_sum_exp((0..n).map(|a| {
            let m = r[(0, a)].norm_sqr();
            if m > 0.0 {
                m.ln() - x_log[a]
            } else {
                f64::NEG_INFINITY
            }
        })),
        2 => {
            let mut vals = Vec::new();
            for a in 0..n {
                for bb in a + 1..n {
                    let minor = r[(0, a)] * r[(1, bb)] - r[(0, bb)] * r[(1, a)];
                    let m = minor.norm_sqr();
                    if m > 0.0 {
                        vals.push(m.ln() - x_log[a] - x_log[bb]);
                    }
                }
            }
            log_sum_exp(vals.into_iter())
        }
        _ => f64::NEG_INFINITY,
    };
    BlockEval { s: -x_min, chat: chat.hermitize(), log_det, r, ni }
}

/// The per-entry balanced assembly of Σ e^{sᵢ}·D^{-1/2}GᵢD^{-1/2} is only
/// trustworthy while the raw-to-damped amplification cannot lift f64
/// cancellation noise above the termination quantum; beyond that window
/// the divergence is reported as +∞ (sound: it only delays termination).
fn assembly_trusted(scales: &[f64], x_log: &[f64], trace: f64, _n: usize) -> bool {
    if !trace.is_finite() {
        return false;
    }
    let x_min = x_log.iter().cloned().fold(f64::INFINITY, f64::min);
    let amp = scales.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - x_min;
    amp <= trace.max(1.0).ln() + 25.0
}

/// A PSD assembly whose spectrum comes back significantly negative was
/// destroyed by cancellation; distrust it.
fn spectrum_trusted(values: &[f64]) -> bool {
    let top = values.first().cloned().unwrap_or(0.0).max(1.0);
    values.iter().all(|&v| v >= -1e-7 * top)
}

/// adj of a 1×1 or 2×2 Hermitian block.
fn adj_block(m: &CMat) -> CMat {
    match m.rows {
        1 => CMat::identity(1),
        2 => {
            let mut a = CMat::zeros(2, 2);
            a[(0, 0)] = m[(1, 1)];
            a[(1, 1)] = m[(0, 0)];
            a[(0, 1)] = -m[(0, 1)];
            a[(1, 0)] = -m[(1, 0)];
            a
        }
        _ => unreachable!("blocks are 1x1 or 2x2"),
    }
}

/// Outcome of the weighted scaling decision at target k.
#[derive(Clone, Debug)]
pub enum WeightedOutcome {
    /// feasible x ∈ P(B) with wᵀx ≥ (1−ε)k
    Feasible { x: Vec<f64>, wx: f64, iterations: usize },
    /// certified OPT < k (divergence floor or iteration budget T)
    NotReached { iterations: usize },
}

/// One run of the weighted Sinkhorn at integer-or-half-integer target k.
pub fn weighted_sinkhorn(
    lines: &LineSet,
    w: &[f64],
    k: f64,
    eps: f64,
    t_max: Option<usize>,
    settings: &OpScaleSettings,
) -> Result<WeightedOutcome> {
    settings.validate()?;
    if w.len() != lines.p() {
        return Err(Error::Dimension("weight vector length must match line count".into()));
    }
    if w.iter().any(|&v| v < 0.0) {
        return Err(Error::Invalid("weights must be nonnegative".into()));
    }
    if k <= 0.0 {
        return Ok(WeightedOutcome::Feasible { x: vec![0.0; lines.p()], wx: 0.0, iterations: 0 });
    }
    let winf = w.iter().cloned().fold(0.0f64, f64::max);
    if k < winf {
        return Err(Error::Invalid("weighted_sinkhorn requires k ≥ ‖w‖_∞".into()));
    }
    let n = lines.n;
    // normalize B by √(mnM) so the capacity floor formula applies
    let mbar: usize = (0..lines.p()).map(|i| lines.line_rank(i)).sum();
    let bigm = lines.entry_bound();
    let norm = 1.0 / ((mbar.max(1) as f64) * n as f64 * bigm).sqrt();
    let bmats: Vec<CMat> = (0..lines.p())
        .map(|i| lines.b_matrix(i).map(|b| b.scale(norm)))
        .collect::<Result<_>>()?;
    let nis: Vec<usize> = bmats.iter().map(|b| b.rows).collect();
    let wt: Vec<f64> = w.iter().zip(&nis).map(|(&wi, &ni)| wi / ni as f64).collect();

    let delta = eps / (2.0 * (n as f64).sqrt());
    let quantum = delta * delta / 2.0;
    // the capacity floor backstop; a quarter of the operator-side constant
    // is comfortably below every desk-scale weighted capacity
    let floor = -(settings.floor_const / 4.0)
        * (k * ((mbar + n) as f64) * ((mbar + n) as f64).max(2.0).ln()
            + n as f64 * ((mbar * n) as f64 * bigm * bigm).max(2.0).ln());
    let budget = t_max.unwrap_or_else(|| ((2.0 * (1.0 - floor) / quantum).ceil() as usize).max(64));

    let mut x_log = vec![0.0f64; n];
    let mut ux = CMat::identity(n);
    let mut z = 0.0f64;
    for iter in 0..budget {
        // Y-update happens implicitly: all per-line quantities below use the
        // fresh unit-determinant Yᵢ = Cᵢ/det(Cᵢ)^{1/nᵢ}
        let blocks: Vec<BlockEval> = bmats.iter().map(|b| eval_block(b, &x_log, &ux)).collect();
        // per-line scale of e^{w̃ᵢz}·B†Yᵢ⁻¹B
        let scales: Vec<f64> = blocks
            .iter()
            .zip(&wt)
            .map(|(bl, &wti)| {
                wti * z
                    + if bl.ni == 2 { bl.s - bl.log_det / 2.0 } else { 0.0 }
            })
            .collect();
        let mats_u: Vec<CMat> = blocks
            .iter()
            .map(|bl| {
                let adj = adj_block(&bl.chat);
                bl.r.adjoint().mul(&adj).mul(&bl.r).hermitize()
            })
            .collect();
        // ν and ε_Z
        let nu: Vec<f64> = blocks
            .iter()
            .zip(&scales)
            .map(|(bl, &s)| {
                let m = &bl.r;
                let adj = adj_block(&bl.chat);
                let d = m.adjoint().mul(&adj).mul(m);
                let lt = log_sum_exp((0..n).map(|a| {
                    let v = d[(a, a)].re.max(0.0);
                    if v > 0.0 {
                        v.ln() - x_log[a]
                    } else {
                        f64::NEG_INFINITY
                    }
                }));
                (s + lt).exp()
            })
            .collect();
        // an unbounded z-subproblem certifies cap_{w,k} = −∞ (the objective
        // decreases without bound along z alone)
        let ez = match halfspace_project(&nu, &wt, k) {
            Ok((_, d)) => d,
            Err(Error::Solver(_)) => return Ok(WeightedOutcome::NotReached { iterations: iter }),
            Err(e) => return Err(e),
        };
        // μ and ε_X; Tr μ = Σν exactly, so when the trace is already far
        // from feasible the (cancellation-sensitive) eig is skipped and the
        // divergence saturates — termination only fires in the sound regime
        let tr_mu: f64 = nu.iter().sum();
        let ex = if assembly_trusted(&scales, &x_log, tr_mu, n) {
            let neg_scales: Vec<f64> = scales.iter().map(|s| -s).collect();
            let mu_mat = assemble_balanced(&mats_u, &neg_scales, &x_log, 0.0);
            let mu = hermitian_eig(&mu_mat, 1e-13)?;
            if spectrum_trusted(&mu.values) {
                let log_mu: Vec<f64> = mu
                    .values
                    .iter()
                    .map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY })
                    .collect();
                kl_project_log(&log_mu, &MajorizationTarget::ones(n))?.divergence
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };

        if ex <= quantum && ez <= quantum {
            let damp = (-delta).exp();
            let x: Vec<f64> =
                nu.iter().zip(&nis).map(|(&v, &ni)| damp * v / ni as f64).collect();
            let wx: f64 = x.iter().zip(w).map(|(xi, wi)| xi * wi).sum();
            return Ok(WeightedOutcome::Feasible { x, wx, iterations: iter });
        }
        // objective for the divergence floor: Σe^{w̃ᵢz}Tr(CᵢYᵢ⁻¹) − kz + log det X
        let f: f64 = blocks
            .iter()
            .zip(&wt)
            .map(|(bl, &wti)| (wti * z + (bl.ni as f64).ln() + bl.log_det / bl.ni as f64).exp())
            .sum::<f64>()
            - k * z
            + x_log.iter().sum::<f64>();
        if f <= floor {
            return Ok(WeightedOutcome::NotReached { iterations: iter });
        }
        // when the X-side measurement is untrusted (ex = ∞) it must not
        // monopolize the updates; alternate so z keeps making progress
        let pick_z = if ex.is_finite() { ez > ex } else { iter % 2 == 0 && ez > quantum };
        if pick_z {
            // z-update from the z-free traces
            let alpha: Vec<f64> = blocks
                .iter()
                .zip(&scales)
                .zip(&wt)
                .map(|((bl, &s), &wti)| {
                    let m = &bl.r;
                    let adj = adj_block(&bl.chat);
                    let d = m.adjoint().mul(&adj).mul(m);
                    let lt = log_sum_exp((0..n).map(|a| {
                        let v = d[(a, a)].re.max(0.0);
                        if v > 0.0 {
                            v.ln() - x_log[a]
                        } else {
                            f64::NEG_INFINITY
                        }
                    }));
                    (s - wti * z + lt).exp()
                })
                .collect();
            let znew = match halfspace_project(&alpha, &wt, k) {
                Ok((z, _)) => z,
                Err(Error::Solver(_)) => {
                    return Ok(WeightedOutcome::NotReached { iterations: iter })
                }
                Err(e) => return Err(e),
            };
            z = znew;
        } else {
            // X-update: eigenbasis of Σᵢ e^{w̃ᵢz}B†Yᵢ⁻¹B, eigenvalues max{1, μ}
            let terms: Vec<ScaledPsdTerm> = bmats
                .iter()
                .zip(&blocks)
                .zip(&scales)
                .map(|((b, bl), &s)| {
                    let adj = adj_block(&bl.chat);
                    ScaledPsdTerm { log_scale: s, mat: b.adjoint().mul(&adj).mul(b).hermitize() }
                })
                .collect();
            let pairs = scaled_psd_eig(n, &terms, -60.0)?;
            let mut new_ux = CMat::zeros(n, n);
            let mut new_x = vec![0.0; n];
            for (j, pair) in pairs.iter().enumerate() {
                for i in 0..n {
                    new_ux[(i, j)] = pair.vector[i];
                }
                new_x[j] = pair.log_value.max(0.0);
            }
            ux = new_ux;
            x_log = new_x;
        }
    }
    Ok(WeightedOutcome::NotReached { iterations: budget })
}

/// Maximum of wᵀx over P(B). Exact (half-integral) when every line has
/// rank ≤ 2 and w is a nonnegative integer vector; `eps` drives the
/// geometric-bisection fallback for other inputs.
pub fn weighted_opt(lines: &LineSet, w: &[u64], settings: &OpScaleSettings) -> Result<f64> {
    if w.len() != lines.p() {
        return Err(Error::Dimension("weight vector length must match line count".into()));
    }
    if w.iter().all(|&v| v == 0) {
        return Ok(0.0);
    }
    let wf: Vec<f64> = w.iter().map(|&v| v as f64).collect();
    let winf = wf.iter().cloned().fold(0.0f64, f64::max);
    let wsum: f64 = wf.iter().sum();
    // half-integral grid [‖w‖_∞, ‖w‖₁]; k = ‖w‖_∞ is always feasible
    // because each eᵢ ∈ P(B) for full-row-rank Bᵢ
    let mut lo = (2.0 * winf).round() as u64; // in half units
    let mut hi = (2.0 * wsum).round() as u64;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        let k = mid as f64 / 2.0;
        let eps = (1.0 / (4.0 * k)).min(0.45);
        match weighted_sinkhorn(lines, &wf, k, eps, None, settings)? {
            WeightedOutcome::Feasible { wx, .. } => {
                // wᵀx ≥ k − 1/4 pins OPT ≥ k by half-integrality
                debug_assert!(wx >= k - 0.26, "feasible point too small: {wx} vs {k}");
                lo = mid;
            }
            WeightedOutcome::NotReached { .. } => hi = mid - 1,
        }
    }
    Ok(lo as f64 / 2.0)
}

/// Outcome of the ε-membership test. `monotone_slack` is the largest
/// relative objective increase observed across sweeps (0 when the
/// alternating minimization behaved exactly).
#[derive(Clone, Debug)]
pub enum MembershipOutcome {
    /// certified feasible y with ‖x − y‖ ≤ ε
    Near { y: Vec<f64>, iterations: usize, monotone_slack: f64 },
    /// certified x ∉ P(B)
    Far { iterations: usize, monotone_slack: f64 },
}

impl MembershipOutcome {
    pub fn monotone_slack(&self) -> f64 {
        match self {
            MembershipOutcome::Near { monotone_slack, .. } => *monotone_slack,
            MembershipOutcome::Far { monotone_slack, .. } => *monotone_slack,
        }
    }
}

/// ε-membership for rank-≤2 P(B): alternating minimization of
/// ΣTr(BᵢX⁻¹Bᵢ†Zᵢ⁻¹) + xᵢ log det Zᵢ + log det X over X ⪰ I, Zᵢ ≻ 0.
pub fn mem_eps_bl(
    lines: &LineSet,
    x: &[f64],
    eps: f64,
    t_max: Option<usize>,
    settings: &OpScaleSettings,
) -> Result<MembershipOutcome> {
    settings.validate()?;
    if x.len() != lines.p() {
        return Err(Error::Dimension("point length must match line count".into()));
    }
    if x.iter().any(|&v| v < 0.0) {
        return Err(Error::Invalid("mem_eps_bl: the point must be nonnegative".into()));
    }
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::Invalid("eps must lie in (0,1)".into()));
    }
    // lines with xᵢ = 0 are inert; the algorithm's input contract Σxᵢ ≤ 1
    // is met by shrinking the accuracy parameter instead of the point
    let active: Vec<usize> = (0..x.len()).filter(|&i| x[i] > 0.0).collect();
    if active.is_empty() {
        return Ok(MembershipOutcome::Near {
            y: vec![0.0; x.len()],
            iterations: 0,
            monotone_slack: 0.0,
        });
    }
    let sum_x: f64 = x.iter().sum();
    let eps_run = eps / sum_x.max(1.0);
    let n = lines.n;
    let mbar: usize = active.iter().map(|&i| lines.line_rank(i)).sum();
    let bigm = lines.entry_bound();
    let bmats: Vec<CMat> =
        active.iter().map(|&i| lines.b_matrix(i)).collect::<Result<_>>()?;
    let nis: Vec<usize> = bmats.iter().map(|b| b.rows).collect();
    let xs: Vec<f64> = active.iter().map(|&i| x[i]).collect();

    let delta = eps_run / (2.0 * (n as f64).sqrt());
    let quantum = delta * delta / 2.0;
    let floor = -(settings.floor_const / 4.0)
        * ((n * (mbar + n)) as f64 * ((mbar + n) as f64).max(2.0).ln()
            + n as f64 * ((mbar * n) as f64 * bigm * bigm).max(2.0).ln());
    let budget = t_max.unwrap_or_else(|| ((2.0 * (1.0 - floor) / quantum).ceil() as usize).max(64));

    let mut x_log = vec![0.0f64; n];
    let mut ux = CMat::identity(n);
    let mut prev_f = f64::INFINITY;
    let mut slack = 0.0f64;
    for iter in 0..budget {
        // Z-update is implicit: Zᵢ = Cᵢ/xᵢ exactly
        let blocks: Vec<BlockEval> = bmats.iter().map(|b| eval_block(b, &x_log, &ux)).collect();
        // terms xᵢ·B†Cᵢ⁻¹B with explicit log scales
        let scales: Vec<f64> = blocks
            .iter()
            .zip(&xs)
            .map(|(bl, &xi)| xi.ln() + if bl.ni == 2 { bl.s - bl.log_det } else { -bl.log_det })
            .collect();
        let mats_u: Vec<CMat> = blocks
            .iter()
            .map(|bl| {
                let adj = adj_block(&bl.chat);
                bl.r.adjoint().mul(&adj).mul(&bl.r).hermitize()
            })
            .collect();
        let tr_mu: f64 = blocks
            .iter()
            .zip(&scales)
            .map(|(bl, &sc)| {
                let adj = adj_block(&bl.chat);
                let d = bl.r.adjoint().mul(&adj).mul(&bl.r);
                let lt = log_sum_exp((0..n).map(|a| {
                    let v = d[(a, a)].re.max(0.0);
                    if v > 0.0 {
                        v.ln() - x_log[a]
                    } else {
                        f64::NEG_INFINITY
                    }
                }));
                (sc + lt).exp()
            })
            .sum();
        let ex: f64 = if assembly_trusted(&scales, &x_log, tr_mu, n) {
            let neg_scales: Vec<f64> = scales.iter().map(|s| -s).collect();
            let mu_mat = assemble_balanced(&mats_u, &neg_scales, &x_log, 0.0);
            let mu = hermitian_eig(&mu_mat, 1e-13)?;
            if spectrum_trusted(&mu.values) {
                mu.values.iter().map(|&v| if v > 1.0 { v - 1.0 - v.ln() } else { 0.0 }).sum()
            } else {
                f64::INFINITY
            }
        } else {
            f64::INFINITY
        };
        if ex <= quantum {
            let damp = (-eps_run).exp();
            let mut y = vec![0.0; x.len()];
            for (pos, &i) in active.iter().enumerate() {
                // Tr(X^{-1/2}Bᵢ†Zᵢ⁻¹BᵢX^{-1/2}) = nᵢ·xᵢ at a fresh Z-update
                let bl = &blocks[pos];
                let adj = adj_block(&bl.chat);
                let d = bl.r.adjoint().mul(&adj).mul(&bl.r);
                let lt = log_sum_exp((0..n).map(|a| {
                    let v = d[(a, a)].re.max(0.0);
                    if v > 0.0 {
                        v.ln() - x_log[a]
                    } else {
                        f64::NEG_INFINITY
                    }
                }));
                y[i] = damp * (scales[pos] + lt).exp() / nis[pos] as f64;
            }
            return Ok(MembershipOutcome::Near { y, iterations: iter, monotone_slack: slack });
        }
        // objective after the fresh Z-update
        let f: f64 = xs
            .iter()
            .zip(&nis)
            .zip(&blocks)
            .map(|((&xi, &ni), bl)| xi * ni as f64 + xi * (bl.log_det - ni as f64 * xi.ln()))
            .sum::<f64>()
            + x_log.iter().sum::<f64>();
        slack = slack.max((f - prev_f) / prev_f.abs().max(1.0));
        prev_f = f;
        if f <= floor {
            return Ok(MembershipOutcome::Far { iterations: iter, monotone_slack: slack });
        }
        // X-update
        let terms: Vec<ScaledPsdTerm> = bmats
            .iter()
            .zip(&blocks)
            .zip(&scales)
            .map(|((b, bl), &s)| {
                let adj = adj_block(&bl.chat);
                ScaledPsdTerm { log_scale: s, mat: b.adjoint().mul(&adj).mul(b).hermitize() }
            })
            .collect();
        let pairs = scaled_psd_eig(n, &terms, -60.0)?;
        let mut new_ux = CMat::zeros(n, n);
        let mut new_x = vec![0.0; n];
        for (j, pair) in pairs.iter().enumerate() {
            for i in 0..n {
                new_ux[(i, j)] = pair.vector[i];
            }
            new_x[j] = pair.log_value.max(0.0);
        }
        ux = new_ux;
        x_log = new_x;
    }
    Ok(MembershipOutcome::Far { iterations: budget, monotone_slack: slack })
}

/// Exact membership of x = c/d in P(B) through the block CP map whose
/// capacity at k = Σcᵢnᵢ matches d·cap_x(cB): x ∈ P(B) iff the map's
/// noncommutative rank reaches Σcᵢnᵢ. All arithmetic is exact.
pub fn membership_exact(lines: &LineSet, c: &[u64], d: u64, seed: u64) -> Result<bool> {
    if c.len() != lines.p() {
        return Err(Error::Dimension("numerator vector length must match line count".into()));
    }
    if d == 0 {
        return Err(Error::Invalid("denominator must be positive".into()));
    }
    let n = lines.n;
    let d = d as usize;
    let active: Vec<usize> = (0..c.len()).filter(|&i| c[i] > 0).collect();
    if active.is_empty() {
        return Ok(true); // the origin is in P(B)
    }
    // row blocks: for each line i and copy j ∈ [cᵢ], an nᵢ-row slot
    let nis: Vec<usize> = active.iter().map(|&i| lines.line_rank(i)).collect();
    if nis.iter().any(|&ni| ni == 0) {
        return Err(Error::Invalid("membership_exact: zero line with positive weight".into()));
    }
    let k_tot: usize = active
        .iter()
        .zip(&nis)
        .map(|(&i, &ni)| c[i] as usize * ni)
        .sum();
    let rows = k_tot;
    let cols = n * d;
    let mut kraus: Vec<ExactMat> = Vec::new();
    let mut row_offset = 0usize;
    for (pos, &i) in active.iter().enumerate() {
        let ni = nis[pos];
        let b_rows = lines.row_space(i); // ni column-vectors of length n
        for _copy in 0..c[i] {
            for l in 0..d {
                let mut kmat = ExactMat::zeros(rows, cols);
                for (rr, brow) in b_rows.iter().enumerate() {
                    for cc in 0..n {
                        // column block l: original coordinate cc ↦ cc·d + l
                        *kmat.at_mut(row_offset + rr, cc * d + l) = brow[cc].clone();
                    }
                }
                kraus.push(kmat);
            }
            row_offset += ni;
        }
    }
    // pad square for the exact randomized rank pipeline
    let dim = rows.max(cols);
    let padded: Vec<ExactMat> = kraus
        .iter()
        .map(|g| {
            let mut p = ExactMat::zeros(dim, dim);
            for i in 0..rows {
                for j in 0..cols {
                    *p.at_mut(i, j) = g.at(i, j).clone();
                }
            }
            p
        })
        .collect();
    let res = randomized_shrunk(&padded, seed, 64)?;
    // zero-row padding keeps every defect, zero-column padding adds the
    // padding coordinates to every shrunk subspace; either way the
    // noncommutative rank is unchanged
    Ok(res.ncrank >= k_tot)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{gr_is_zero, gr_one};

    fn settings() -> OpScaleSettings {
        OpScaleSettings::default()
    }

    #[test]
    fn wedge_examples() {
        let e1 = vec![gr_from_i64(1, 0), gr_from_i64(0, 0)];
        let e2 = vec![gr_from_i64(0, 0), gr_from_i64(1, 0)];
        let w = wedge(&e1, &e2);
        assert_eq!(*w.at(0, 1), gr_one());
        assert_eq!(*w.at(1, 0), gr_from_i64(-1, 0));
        // a = b → 0
        assert!(wedge(&e1, &e1).is_zero());
        // bilinearity: (1,0,0)∧(1,1,0) = e₁∧e₂
        let a = vec![gr_from_i64(1, 0), gr_from_i64(0, 0), gr_from_i64(0, 0)];
        let b = vec![gr_from_i64(1, 0), gr_from_i64(1, 0), gr_from_i64(0, 0)];
        let w = wedge(&a, &b);
        assert_eq!(*w.at(0, 1), gr_one());
        assert!(gr_is_zero(w.at(0, 2)));
        // skew-symmetry is exact
        let t = w.transpose();
        for i in 0..3 {
            for j in 0..3 {
                assert_eq!(*t.at(i, j), gr_from_i64(0, 0) - w.at(i, j).clone());
            }
        }
    }

    #[test]
    fn wedge_projector_identity() {
        // (u∧v)(u∧v)† is the projector onto span{u, v} for orthonormal u, v
        let u = vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0)];
        let v = vec![C64::new(0.0, 0.0), C64::new(0.6, 0.0), C64::new(0.8, 0.0)];
        let n = 3;
        let mut wm = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                wm[(i, j)] = u[i] * v[j] - v[i] * u[j];
            }
        }
        let prod = wm.mul(&wm.adjoint());
        let mut proj = CMat::zeros(n, n);
        proj.rank1_update(&u, 1.0);
        proj.rank1_update(&v, 1.0);
        assert!(prod.sub(&proj).fro_norm() < 1e-10);
    }

    #[test]
    fn matching_single_spanning_line() {
        // one line spanning ℂ²: optimum 1, k = 2
        let lines = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        let eps = 0.1;
        let m = frac_matroid_matching(&lines, eps, &settings(), true).unwrap();
        assert_eq!(m.k, 2);
        assert!(m.value >= (1.0 - eps) * 1.0, "value {}", m.value);
        assert!(m.value <= 1.0 + 1e-9);
        let (ok, _) = verify_matching(&m.tilde, &m.x, 2.0 * eps).unwrap();
        assert!(ok);
    }

    #[test]
    fn matching_two_identical_lines() {
        let lines =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        let eps = 0.1;
        let m = frac_matroid_matching(&lines, eps, &settings(), true).unwrap();
        assert_eq!(m.k, 2, "ncrank of the doubled wedge space is still 2");
        assert!(m.value >= (1.0 - eps));
        assert!(m.value <= 1.0 + 1e-9, "optimum is 1 at V = ℂ²");
    }

    #[test]
    fn matching_rejects_rank_one_lines() {
        let lines = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![2, 0])]).unwrap();
        assert!(frac_matroid_matching(&lines, 0.1, &settings(), true).is_err());
    }

    #[test]
    fn verify_matching_examples() {
        let lines = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        let (ok, _) = verify_matching_lines(&lines, &[0.0], 0.0).unwrap();
        assert!(ok, "x = 0 is feasible");
        let (ok, _) = verify_matching_lines(&lines, &[1.0], 1e-12).unwrap();
        assert!(ok, "λ_max = 1 exactly");
        let lines =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        let (ok, hint) = verify_matching_lines(&lines, &[0.6, 0.6], 1e-6).unwrap();
        assert!(!ok, "λ_max = 1.2");
        assert!(hint.is_some());
    }

    #[test]
    fn two_cover_single_line() {
        let lines = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        let c = dominant_two_cover(&lines, &Default::default()).unwrap();
        assert_eq!(c.k_star, 2);
        assert_eq!(c.s_basis.len() + c.t_basis.len(), 2);
        // aᵢ(S) + aᵢ(T) ≥ 2 verified inside dominant_two_cover
    }

    #[test]
    fn two_cover_degenerate_line() {
        let lines = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![1, 0])]).unwrap();
        let c = dominant_two_cover(&lines, &Default::default()).unwrap();
        assert_eq!(c.k_star, 0);
    }

    #[test]
    fn two_cover_identical_lines_match_single() {
        let one = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        let two =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        let c1 = dominant_two_cover(&one, &Default::default()).unwrap();
        let c2 = dominant_two_cover(&two, &Default::default()).unwrap();
        assert_eq!(c1.k_star, c2.k_star);
        assert_eq!(c1.s_basis.len(), c2.s_basis.len());
        assert_eq!(c1.t_basis.len(), c2.t_basis.len());
    }

    #[test]
    fn weighted_single_line() {
        // B₁ = I₂ rows, w = (1), k = 1 → feasible with x₁ ≥ 1 − ε
        let lines = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        let eps = 0.2;
        match weighted_sinkhorn(&lines, &[1.0], 1.0, eps, None, &settings()).unwrap() {
            WeightedOutcome::Feasible { x, wx, .. } => {
                assert!(x[0] >= 1.0 - eps, "x = {x:?}");
                assert!(wx >= 1.0 - eps);
            }
            _ => panic!("k = 1 must be feasible"),
        }
        // w = (2), k = 2: scaling of the k = 1 case
        match weighted_sinkhorn(&lines, &[2.0], 2.0, eps, None, &settings()).unwrap() {
            WeightedOutcome::Feasible { wx, .. } => assert!(wx >= 2.0 * (1.0 - eps)),
            _ => panic!("w = 2 on one line must reach k = 2"),
        }
    }

    #[test]
    fn weighted_two_identical_lines_not_reached() {
        let lines =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        match weighted_sinkhorn(&lines, &[1.0, 1.0], 2.0, 0.125, None, &settings()).unwrap() {
            WeightedOutcome::NotReached { .. } => {}
            WeightedOutcome::Feasible { x, .. } => panic!("OPT = 1 < 2, got {x:?}"),
        }
    }

    #[test]
    fn weighted_opt_examples() {
        let s = settings();
        let one = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        assert_eq!(weighted_opt(&one, &[3], &s).unwrap(), 3.0);
        let two =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        assert_eq!(weighted_opt(&two, &[1, 1], &s).unwrap(), 1.0);
        assert_eq!(weighted_opt(&two, &[0, 0], &s).unwrap(), 0.0);
    }

    #[test]
    fn membership_examples() {
        let s = settings();
        // one spanning line, x = 0.5 → Near with y = e^{-ε}·x
        let one = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        let eps = 0.05;
        match mem_eps_bl(&one, &[0.5], eps, None, &s).unwrap() {
            MembershipOutcome::Near { y, .. } => {
                assert!((y[0] - 0.5 * (-eps).exp()).abs() < 1e-6, "y = {y:?}");
                let dist = (0.5 - y[0]).abs();
                assert!(dist <= eps);
            }
            _ => panic!("interior point must be Near"),
        }
        // two identical lines, x = (0.6, 0.6) → Far (violates V = ℂ² by 0.2)
        let two =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        match mem_eps_bl(&two, &[0.6, 0.6], 0.05, None, &s).unwrap() {
            MembershipOutcome::Far { monotone_slack, .. } => {
                assert!(monotone_slack <= 1e-8, "objective increased: {monotone_slack:.2e}");
            }
            MembershipOutcome::Near { y, .. } => panic!("should be Far, got {y:?}"),
        }
        // tiny point → Near
        match mem_eps_bl(&two, &[0.01, 0.01], 0.05, None, &s).unwrap() {
            MembershipOutcome::Near { .. } => {}
            _ => panic!("near-origin point must be Near"),
        }
    }

    #[test]
    fn membership_exact_examples() {
        let one = LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1])]).unwrap();
        // x = 1 ∈ P(B)
        assert!(membership_exact(&one, &[1], 1, 3).unwrap());
        let two =
            LineSet::from_integer_pairs(2, &[(vec![1, 0], vec![0, 1]), (vec![1, 0], vec![0, 1])])
                .unwrap();
        // (1/2, 1/2) on the boundary is in; (1, 1) is out
        assert!(membership_exact(&two, &[1, 1], 2, 3).unwrap());
        assert!(!membership_exact(&two, &[1, 1], 1, 3).unwrap());
    }

    #[test]
    fn matching_duality_sandwich_small() {
        // three generic lines in ℂ⁴: optimum 2, k = 4
        let lines = LineSet::from_integer_pairs(
            4,
            &[
                (vec![1, 0, 0, 0], vec![0, 1, 0, 0]),
                (vec![0, 0, 1, 0], vec![0, 0, 0, 1]),
                (vec![1, 1, 0, 1], vec![0, 1, 1, 0]),
            ],
        )
        .unwrap();
        let eps = 0.05;
        let m = frac_matroid_matching(&lines, eps, &settings(), true).unwrap();
        let c = dominant_two_cover(&lines, &Default::default()).unwrap();
        assert_eq!(m.k, c.k_star);
        let s = (c.s_basis.len() + c.t_basis.len()) as f64;
        assert!(2.0 * m.value <= s + 1e-9);
        assert!(s <= 2.0 * m.value / (1.0 - eps) + 1e-9);
        assert_eq!(m.k, 4, "three generic lines in ℂ⁴ give matching value 2");
    }
}
