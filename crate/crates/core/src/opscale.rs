//! Majorized operator scaling: the Sinkhorn-style alternating minimization
//! of `Tr Φ(X⁻¹)Y⁻¹e^z + α·λ(log X) + β·λ(log Y) − kz` over X ⪰ I, Y ⪰ I,
//! z ≥ 0, the capacity-finiteness decision built on it, and extraction of
//! approximate independent sets from diverged runs.
//!
//! Iterates are held in log-eigenvalue form (basis unitary plus the vector
//! of log eigenvalues). Near the divergence floor the exponents reach the
//! thousands, so every scale-crossing quantity goes through log space or
//! per-entry balanced exponentials; nothing materializes e^z as a float.

use num_complex::Complex64 as C64;

use crate::exactla::{continued_fraction_round, ExactMat};
use crate::numla::{
    assemble_balanced, hermitian_eig, log_sum_exp, scaled_psd_eig, CMat, CpMap, ImplicitPsd,
    ScaledPsdTerm,
};
use crate::permproj::{kl_project_log, MajorizationTarget};
use crate::{Error, Result};

/// Majorization targets plus the size target k and perturbation count r.
#[derive(Clone, Debug)]
pub struct MajSpec {
    pub alpha: MajorizationTarget,
    pub beta: MajorizationTarget,
    pub k: f64,
    pub r: usize,
}

impl MajSpec {
    pub fn new(alpha: MajorizationTarget, beta: MajorizationTarget, k: f64, r: usize) -> Result<Self> {
        if k < 0.0 {
            return Err(Error::Invalid("target size k must be nonnegative".into()));
        }
        if k > alpha.sum() + 1e-9 || k > beta.sum() + 1e-9 {
            return Err(Error::Invalid("k must be at most min(Σα, Σβ)".into()));
        }
        Ok(MajSpec { alpha, beta, k, r })
    }

    /// The (k, r) spec: α_r on the input side, all-ones on the output side.
    pub fn perturbed(n: usize, m: usize, k: f64, r: usize) -> Result<Self> {
        Self::new(MajorizationTarget::alpha_r(n, r)?, MajorizationTarget::ones(m), k, r)
    }
}

/// Scaling iterate: X = Ux·diag(e^{x_log})·Ux†, Y likewise, plus z ≥ 0.
/// Log eigenvalues are kept nonincreasing and nonnegative.
#[derive(Clone, Debug)]
pub struct ScalingIterate {
    pub x_log: Vec<f64>,
    pub ux: CMat,
    pub y_log: Vec<f64>,
    pub vy: CMat,
    pub z: f64,
}

impl ScalingIterate {
    pub fn identity(n: usize, m: usize) -> Self {
        ScalingIterate {
            x_log: vec![0.0; n],
            ux: CMat::identity(n),
            y_log: vec![0.0; m],
            vy: CMat::identity(m),
            z: 0.0,
        }
    }

    /// X as an implicit PSD pair. Only valid while the eigenvalues fit a
    /// linear-scale f64.
    pub fn x_psd(&self) -> Result<ImplicitPsd> {
        implicit_from_log(&self.x_log, &self.ux)
    }

    pub fn y_psd(&self) -> Result<ImplicitPsd> {
        implicit_from_log(&self.y_log, &self.vy)
    }

    pub fn q(&self) -> f64 {
        self.z.exp()
    }
}

fn implicit_from_log(logs: &[f64], basis: &CMat) -> Result<ImplicitPsd> {
    if logs.iter().any(|&v| v > 700.0) {
        return Err(Error::Invalid("iterate eigenvalues exceed linear f64 range".into()));
    }
    let n = logs.len();
    let mut reference = CMat::zeros(n, n);
    for j in 0..n {
        reference.rank1_update(&basis.column(j), logs[j].exp());
    }
    ImplicitPsd::new(logs.iter().map(|&v| v.exp()).collect(), reference.hermitize())
}

/// Capacity floor, iteration cap and per-step progress quantum.
#[derive(Clone, Debug)]
pub struct CapacityBudget {
    pub floor: f64,
    pub max_iters: usize,
    pub progress_quantum: f64,
}

impl CapacityBudget {
    /// floor = −c·(k(n+m)log(m+n) + k·log p + n·log(pmnM²)), iteration cap
    /// 2·(1 − floor)/quantum on size-normalized input.
    pub fn standard(map: &CpMap, spec: &MajSpec, eps: f64, floor_const: f64) -> Self {
        let (m, n) = (map.m as f64, map.n as f64);
        let p = map.num_kraus().max(1) as f64;
        let mm = map.entry_bound.max(1.0);
        let k = spec.k.max(1.0);
        let floor = -floor_const
            * (k * (n + m) * (m + n).max(2.0).ln()
                + k * p.ln()
                + n * (p * m * n * mm * mm).max(2.0).ln());
        let quantum = spec.alpha.first().min(spec.beta.first()) * eps * eps / 2.0;
        let max_iters = if quantum > 0.0 {
            ((2.0 * (1.0 - floor) / quantum).ceil() as usize).max(64)
        } else {
            usize::MAX / 2
        };
        CapacityBudget { floor, max_iters, progress_quantum: quantum }
    }
}

#[derive(Clone, Debug)]
pub struct OpScaleSettings {
    pub floor_const: f64,
    pub max_iter: Option<usize>,
    pub eig_delta: f64,
    pub precision_bits: u32,
}

impl Default for OpScaleSettings {
    fn default() -> Self {
        OpScaleSettings { floor_const: 16.0, max_iter: None, eig_delta: 1e-13, precision_bits: 53 }
    }
}

impl OpScaleSettings {
    pub fn validate(&self) -> Result<()> {
        if self.precision_bits > 53 {
            return Err(Error::Invalid(format!(
                "precision-bits {} requested, but this build computes in hardware doubles \
                 (53 mantissa bits) with log-domain scaling; pass 53 or lower",
                self.precision_bits
            )));
        }
        Ok(())
    }
}

/// Outcome of [`maj_sinkhorn`]. `log_divisor` records the size
/// normalization applied to the input map; the iterate refers to the
/// normalized map.
#[derive(Clone, Debug)]
pub enum ScaleOutcome {
    Scaled {
        iterate: ScalingIterate,
        iterations: usize,
        eps: f64,
        log_divisor: f64,
        /// largest relative objective increase seen across iterations
        monotone_slack: f64,
    },
    Diverged {
        iterate: ScalingIterate,
        iterations: usize,
        objective: f64,
        log_divisor: f64,
        monotone_slack: f64,
    },
}

impl ScaleOutcome {
    pub fn monotone_slack(&self) -> f64 {
        match self {
            ScaleOutcome::Scaled { monotone_slack, .. } => *monotone_slack,
            ScaleOutcome::Diverged { monotone_slack, .. } => *monotone_slack,
        }
    }
}

/// Pair of subspaces with its independence defect and the violated target.
#[derive(Clone, Debug)]
pub struct IndependentSetWitness {
    /// orthonormal columns spanning L ⊆ ℂᵐ
    pub l_basis: CMat,
    /// orthonormal columns spanning R ⊆ ℂⁿ
    pub r_basis: CMat,
    pub epsilon: f64,
    pub violated: (usize, usize),
}

/// Internal solver state. `t[s][a][b] = v_a† A_s u_b` carries everything:
/// the coupling weights W, the marginal Gram matrices and the candidate
/// defects are all read off it.
struct OpSolver<'a> {
    phi: &'a CpMap,
    spec: &'a MajSpec,
    it: ScalingIterate,
    t: Vec<CMat>,
    /// w[i][j] = Σ_s |t[s][i][j]|²
    w: Vec<Vec<f64>>,
    /// g[i] = Φ*(vᵢvᵢ†) in Ux coordinates (n×n)
    g: Vec<CMat>,
    /// h[j] = Φ(uⱼuⱼ†) in Vy coordinates (m×m)
    h: Vec<CMat>,
}

impl<'a> OpSolver<'a> {
    fn new(phi: &'a CpMap, spec: &'a MajSpec) -> Self {
        let it = ScalingIterate::identity(phi.n, phi.m);
        let mut s =
            OpSolver { phi, spec, it, t: Vec::new(), w: Vec::new(), g: Vec::new(), h: Vec::new() };
        s.refresh_caches();
        s
    }

    fn set_iterate(&mut self, it: ScalingIterate) {
        self.it = it;
        self.refresh_caches();
    }

    fn refresh_caches(&mut self) {
        let (m, n) = (self.phi.m, self.phi.n);
        let vadj = self.it.vy.adjoint();
        self.t = self.phi.kraus.iter().map(|a| vadj.mul(a).mul(&self.it.ux)).collect();
        let mut w = vec![vec![0.0f64; n]; m];
        for t in &self.t {
            for i in 0..m {
                for j in 0..n {
                    w[i][j] += t[(i, j)].norm_sqr();
                }
            }
        }
        self.w = w;
        self.g = (0..m)
            .map(|i| {
                let mut gi = CMat::zeros(n, n);
                for t in &self.t {
                    let row: Vec<C64> = (0..n).map(|b| t[(i, b)].conj()).collect();
                    gi.rank1_update(&row, 1.0);
                }
                gi.hermitize()
            })
            .collect();
        self.h = (0..n)
            .map(|j| {
                let mut hj = CMat::zeros(m, m);
                for t in &self.t {
                    let col: Vec<C64> = (0..m).map(|a| t[(a, j)]).collect();
                    hj.rank1_update(&col, 1.0);
                }
                hj.hermitize()
            })
            .collect();
    }

    /// log Tr Φ(X⁻¹)Y⁻¹.
    fn log_trace(&self) -> f64 {
        let mut vals = Vec::with_capacity(self.phi.m * self.phi.n);
        for (i, row) in self.w.iter().enumerate() {
            for (j, &wij) in row.iter().enumerate() {
                if wij > 0.0 {
                    vals.push(wij.ln() - self.it.y_log[i] - self.it.x_log[j]);
                }
            }
        }
        log_sum_exp(vals.into_iter())
    }

    fn z_update(&mut self) -> Result<()> {
        if self.spec.k <= 0.0 {
            self.it.z = 0.0;
            return Ok(());
        }
        let la = self.log_trace();
        if la == f64::NEG_INFINITY {
            return Err(Error::Solver("z-update: Tr Φ(X⁻¹)Y⁻¹ = 0 with k > 0".into()));
        }
        self.it.z = (self.spec.k.ln() - la).max(0.0);
        Ok(())
    }

    /// e^z X^{-1/2} Φ*(Y⁻¹) X^{-1/2} in Ux coordinates, assembled with
    /// per-entry balanced exponents (entries bounded by k post-z-update).
    fn x_marginal_matrix(&self) -> CMat {
        assemble_balanced(&self.g, &self.it.y_log, &self.it.x_log, self.it.z)
    }

    fn y_marginal_matrix(&self) -> CMat {
        assemble_balanced(&self.h, &self.it.x_log, &self.it.y_log, self.it.z)
    }

    fn divergences(&self) -> Result<(f64, f64)> {
        let mu = hermitian_eig(&self.x_marginal_matrix(), 1e-13)?;
        let log_mu: Vec<f64> =
            mu.values.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        let ex = kl_project_log(&log_mu, &self.spec.alpha)?.divergence;
        let nu = hermitian_eig(&self.y_marginal_matrix(), 1e-13)?;
        let log_nu: Vec<f64> =
            nu.values.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect();
        let ey = kl_project_log(&log_nu, &self.spec.beta)?.divergence;
        Ok((ex, ey))
    }

    fn objective(&self) -> f64 {
        let la = self.log_trace();
        let lead = if la == f64::NEG_INFINITY { 0.0 } else { (self.it.z + la).exp() };
        lead + dot(self.spec.alpha.as_slice(), &self.it.x_log)
            + dot(self.spec.beta.as_slice(), &self.it.y_log)
            - self.spec.k * self.it.z
    }

    /// argmin over X ⪰ I at fixed (Y, z): graded eigensolve of
    /// C = Σᵢ e^{z−yᵢ}·Φ*(vᵢvᵢ†), KL dual as the new log-eigenvalues.
    fn x_update(&mut self) -> Result<()> {
        let n = self.phi.n;
        let terms: Vec<ScaledPsdTerm> = self
            .g
            .iter()
            .zip(&self.it.y_log)
            .map(|(gi, &y)| ScaledPsdTerm { log_scale: self.it.z - y, mat: gi.clone() })
            .collect();
        let floor = positive_min(self.spec.alpha.as_slice()).ln() - 46.0;
        let pairs = scaled_psd_eig(n, &terms, floor)?;
        let log_q: Vec<f64> = pairs.iter().map(|p| p.log_value).collect();
        let proj = kl_project_log(&log_q, &self.spec.alpha)?;
        // pairs arrive sorted nonincreasing, so duals align positionally
        let mut rot = CMat::zeros(n, n);
        for (j, pair) in pairs.iter().enumerate() {
            for i in 0..n {
                rot[(i, j)] = pair.vector[i];
            }
        }
        self.it.ux = self.it.ux.mul(&rot);
        self.it.x_log = proj.dual_x;
        self.refresh_caches();
        Ok(())
    }

    fn y_update(&mut self) -> Result<()> {
        let m = self.phi.m;
        let terms: Vec<ScaledPsdTerm> = self
            .h
            .iter()
            .zip(&self.it.x_log)
            .map(|(hj, &x)| ScaledPsdTerm { log_scale: self.it.z - x, mat: hj.clone() })
            .collect();
        let floor = positive_min(self.spec.beta.as_slice()).ln() - 46.0;
        let pairs = scaled_psd_eig(m, &terms, floor)?;
        let log_q: Vec<f64> = pairs.iter().map(|p| p.log_value).collect();
        let proj = kl_project_log(&log_q, &self.spec.beta)?;
        let mut rot = CMat::zeros(m, m);
        for (j, pair) in pairs.iter().enumerate() {
            for i in 0..m {
                rot[(i, j)] = pair.vector[i];
            }
        }
        self.it.vy = self.it.vy.mul(&rot);
        self.it.y_log = proj.dual_x;
        self.refresh_caches();
        Ok(())
    }

    /// Defect Tr π_L Φ(π_R) for L = trailing Y-eigvecs from position i,
    /// R = trailing X-eigvecs from position j; read off the coupling tensor.
    fn candidate_defect(&self, i: usize, j: usize) -> f64 {
        let mut s = 0.0;
        for t in &self.t {
            for a in i..self.phi.m {
                for b in j..self.phi.n {
                    s += t[(a, b)].norm_sqr();
                }
            }
        }
        s
    }

    fn witness_from(
        &self,
        i: usize,
        j: usize,
        defect: f64,
        violated: (usize, usize),
    ) -> IndependentSetWitness {
        let (m, n) = (self.phi.m, self.phi.n);
        let mut l = CMat::zeros(m, m - i);
        for (cc, a) in (i..m).enumerate() {
            for rr in 0..m {
                l[(rr, cc)] = self.it.vy[(rr, a)];
            }
        }
        let mut r = CMat::zeros(n, n - j);
        for (cc, b) in (j..n).enumerate() {
            for rr in 0..n {
                r[(rr, cc)] = self.it.ux[(rr, b)];
            }
        }
        IndependentSetWitness { l_basis: l, r_basis: r, epsilon: defect, violated }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn positive_min(v: &[f64]) -> f64 {
    v.iter().cloned().filter(|&a| a > 0.0).fold(1.0f64, f64::min)
}

/// Majorized-scaling Sinkhorn. Input is normalized to size ≤ 1 internally;
/// `log_divisor` in the outcome records the factor. `Scaled` certifies that
/// e^{z−ε}Φ̃_{Y^{−1/2},X^{−1/2}} is (α,β)-majorized with size ≥ (1−ε)²k;
/// `Diverged` certifies the objective crossed the capacity floor.
pub fn maj_sinkhorn(
    map: &CpMap,
    spec: &MajSpec,
    eps: f64,
    settings: &OpScaleSettings,
) -> Result<ScaleOutcome> {
    settings.validate()?;
    if spec.alpha.len() != map.n || spec.beta.len() != map.m {
        return Err(Error::Dimension("majorization targets must match map dimensions".into()));
    }
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::Invalid("eps must lie in (0,1)".into()));
    }
    let size = map.size();
    let log_divisor = size.max(1.0).ln();
    let normalized = map.scaled((-log_divisor / 2.0).exp());
    if normalized.size() == 0.0 {
        return if spec.k > 0.0 {
            Ok(ScaleOutcome::Diverged {
                iterate: ScalingIterate::identity(map.n, map.m),
                iterations: 0,
                objective: f64::NEG_INFINITY,
                log_divisor,
                monotone_slack: 0.0,
            })
        } else {
            Ok(ScaleOutcome::Scaled {
                iterate: ScalingIterate::identity(map.n, map.m),
                iterations: 0,
                eps,
                log_divisor,
                monotone_slack: 0.0,
            })
        };
    }
    let budget = CapacityBudget::standard(&normalized, spec, eps, settings.floor_const);
    let max_iters = settings.max_iter.unwrap_or(budget.max_iters);
    let mut solver = OpSolver::new(&normalized, spec);
    let mut prev_f = f64::INFINITY;
    let mut slack = 0.0f64;
    for iter in 0..max_iters {
        solver.z_update()?;
        let f = solver.objective();
        slack = slack.max((f - prev_f) / prev_f.abs().max(1.0));
        prev_f = f;
        let (ex, ey) = solver.divergences()?;
        if ex <= budget.progress_quantum && ey <= budget.progress_quantum {
            return Ok(ScaleOutcome::Scaled {
                iterate: solver.it,
                iterations: iter,
                eps,
                log_divisor,
                monotone_slack: slack,
            });
        }
        if f <= budget.floor {
            return Ok(ScaleOutcome::Diverged {
                iterate: solver.it,
                iterations: iter,
                objective: f,
                log_divisor,
                monotone_slack: slack,
            });
        }
        if ex >= ey {
            solver.x_update()?;
        } else {
            solver.y_update()?;
        }
        let f2 = solver.objective();
        slack = slack.max((f2 - prev_f) / prev_f.abs().max(1.0));
        prev_f = f2;
    }
    Err(Error::Solver(format!(
        "maj_sinkhorn: iteration budget {max_iters} exhausted before termination or divergence"
    )))
}

/// Variant of [`maj_sinkhorn`] for conjugation-symmetric spaces (skew
/// Kraus operators): maintains Y = conj(X) by mirroring after every X
/// update, so a terminating run yields a scaling of the form g·Aᵢ·gᵀ.
pub fn maj_sinkhorn_coupled(
    map: &CpMap,
    spec: &MajSpec,
    eps: f64,
    settings: &OpScaleSettings,
) -> Result<ScaleOutcome> {
    settings.validate()?;
    if map.m != map.n {
        return Err(Error::Dimension("coupled scaling needs a square map".into()));
    }
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::Invalid("eps must lie in (0,1)".into()));
    }
    let size = map.size();
    let log_divisor = size.max(1.0).ln();
    let normalized = map.scaled((-log_divisor / 2.0).exp());
    if normalized.size() == 0.0 {
        return Err(Error::Invalid("coupled scaling on the zero map".into()));
    }
    let budget = CapacityBudget::standard(&normalized, spec, eps, settings.floor_const);
    let max_iters = settings.max_iter.unwrap_or(budget.max_iters);
    let mut solver = OpSolver::new(&normalized, spec);
    for iter in 0..max_iters {
        solver.z_update()?;
        let (ex, ey) = solver.divergences()?;
        if ex <= budget.progress_quantum && ey <= budget.progress_quantum {
            return Ok(ScaleOutcome::Scaled {
                iterate: solver.it,
                iterations: iter,
                eps,
                log_divisor,
                monotone_slack: 0.0,
            });
        }
        let f = solver.objective();
        if f <= budget.floor {
            return Ok(ScaleOutcome::Diverged {
                iterate: solver.it,
                iterations: iter,
                objective: f,
                log_divisor,
                monotone_slack: 0.0,
            });
        }
        solver.x_update()?;
        // mirror: Y := conj(X)
        let mut vy = CMat::zeros(map.m, map.m);
        for i in 0..map.m {
            for j in 0..map.m {
                vy[(i, j)] = solver.it.ux[(i, j)].conj();
            }
        }
        solver.it.vy = vy;
        solver.it.y_log = solver.it.x_log.clone();
        solver.refresh_caches();
    }
    Err(Error::Solver(format!(
        "maj_sinkhorn_coupled: iteration budget {max_iters} exhausted"
    )))
}

/// f^{α,β}_k at an explicit iterate.
pub fn capacity_objective(map: &CpMap, iterate: &ScalingIterate, spec: &MajSpec) -> Result<f64> {
    if iterate.x_log.len() != map.n || iterate.y_log.len() != map.m {
        return Err(Error::Dimension("iterate does not match map dimensions".into()));
    }
    let mut solver = OpSolver::new(map, spec);
    solver.set_iterate(iterate.clone());
    Ok(solver.objective())
}

/// One z-update: argmin of a·e^z − kz over z ≥ 0 (a = Tr Φ(X⁻¹)Y⁻¹).
pub fn z_update(map: &CpMap, iterate: &ScalingIterate, k: f64) -> Result<f64> {
    let spec = MajSpec {
        alpha: MajorizationTarget::ones(map.n),
        beta: MajorizationTarget::ones(map.m),
        k,
        r: 0,
    };
    let mut solver = OpSolver::new(map, &spec);
    solver.set_iterate(iterate.clone());
    if k <= 0.0 {
        return Ok(0.0);
    }
    let la = solver.log_trace();
    if la == f64::NEG_INFINITY {
        return Err(Error::Solver("z-update: Tr Φ(X⁻¹)Y⁻¹ = 0 with k > 0".into()));
    }
    Ok((k.ln() - la).max(0.0))
}

/// One X-update at fixed (Y, z); returns the updated iterate.
pub fn x_update(map: &CpMap, iterate: &ScalingIterate, spec: &MajSpec) -> Result<ScalingIterate> {
    let mut solver = OpSolver::new(map, spec);
    solver.set_iterate(iterate.clone());
    solver.x_update()?;
    Ok(solver.it)
}

/// Spectra of the output scaling e^{z−ε}Φ_{Y^{−1/2},X^{−1/2}} applied to
/// the identity on each side: (λ(Φ̃*(I_m)), λ(Φ̃(I_n))), linear scale.
pub fn scaled_marginals(
    map: &CpMap,
    iterate: &ScalingIterate,
    spec: &MajSpec,
    eps: f64,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut solver = OpSolver::new(map, spec);
    solver.set_iterate(iterate.clone());
    let damp = (-eps).exp();
    let mu = hermitian_eig(&solver.x_marginal_matrix(), 1e-13)?
        .values
        .iter()
        .map(|v| v.max(0.0) * damp)
        .collect();
    let nu = hermitian_eig(&solver.y_marginal_matrix(), 1e-13)?
        .values
        .iter()
        .map(|v| v.max(0.0) * damp)
        .collect();
    Ok((mu, nu))
}

/// Decision outcome for cap_{k,r}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Bounded,
    Unbounded,
}

/// Decide whether cap_{k,r} Φ > −∞ by running the majorized Sinkhorn with
/// the (α_r, 1_m) targets: termination certifies Bounded, crossing the
/// capacity floor certifies Unbounded. Also returns the terminal run when
/// one was needed.
pub fn decision_outcome(
    map: &CpMap,
    k: usize,
    r: usize,
    settings: &OpScaleSettings,
) -> Result<(Decision, Option<ScaleOutcome>)> {
    settings.validate()?;
    let (m, n) = (map.m, map.n);
    if r > n {
        return Err(Error::Invalid(format!("r={r} exceeds n={n}")));
    }
    if k == 0 {
        return Ok((Decision::Bounded, None));
    }
    if k > m.min(n) || map.size() == 0.0 {
        return Ok((Decision::Unbounded, None));
    }
    let kf = if r == 0 { k as f64 } else { k as f64 - 1.0 / (2.0 * n as f64) };
    let alpha = MajorizationTarget::alpha_r(n, r)?;
    if kf > alpha.sum() + 1e-12 {
        // no (α_r, 1_m)-majorized scaling can have size k
        return Ok((Decision::Unbounded, None));
    }
    let spec = MajSpec { alpha, beta: MajorizationTarget::ones(m), k: kf, r };
    let eps = if r == 0 {
        1.0 / (10.0 * ((m + n) as f64).sqrt())
    } else {
        1.0 / (10.0 * n as f64 * ((m + n) as f64).sqrt())
    };
    let outcome = maj_sinkhorn(map, &spec, eps, settings)?;
    let d = match &outcome {
        ScaleOutcome::Scaled { .. } => Decision::Bounded,
        ScaleOutcome::Diverged { .. } => Decision::Unbounded,
    };
    Ok((d, Some(outcome)))
}

/// Decide whether cap_{k,r} Φ > −∞ (see [`decision_outcome`] for the
/// variant that also returns the terminal scaling run).
pub fn decision_sinkhorn(
    map: &CpMap,
    k: usize,
    r: usize,
    settings: &OpScaleSettings,
) -> Result<Decision> {
    decision_outcome(map, k, r, settings).map(|(d, _)| d)
}

/// Candidate eigen-splits of a (k, r) violation: i + j = k − 1, or
/// i + j = k with j > n − r.
fn violation_candidates(m: usize, n: usize, k: usize, r: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if i + j + 1 == k || (i + j == k && j + r > n) {
                out.push((i, j));
            }
        }
    }
    out
}

/// Round the span of orthonormal float columns to an exact subspace by
/// continued-fraction rounding of the orthogonal projector.
fn round_span(basis: &CMat, cols_from: usize, denom_bound: u64) -> Result<Vec<Vec<crate::exactla::GaussRat>>> {
    use crate::exactla::{gr_from_rational, image_basis};
    use num_rational::BigRational;
    use num_traits::Zero;
    let n = basis.rows;
    let mut proj = CMat::zeros(n, n);
    for j in cols_from..basis.cols {
        proj.rank1_update(&basis.column(j), 1.0);
    }
    let mut exact = ExactMat::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = proj[(i, j)];
            let re = continued_fraction_round(v.re, denom_bound)?;
            let im = if i == j {
                BigRational::zero()
            } else {
                continued_fraction_round(v.im, denom_bound)?
            };
            *exact.at_mut(i, j) = gr_from_rational(re.clone(), im.clone());
            if j != i {
                *exact.at_mut(j, i) = gr_from_rational(re, -im);
            }
        }
    }
    Ok(image_basis(&exact))
}

/// Try to round the current trailing eigenvectors into an exactly
/// independent pair of the required dimensions. Success is a sound
/// certificate that cap_{k,r} = −∞.
fn exact_violation_cert(
    gens: &[ExactMat],
    it: &ScalingIterate,
    i: usize,
    j: usize,
) -> bool {
    let (m, n) = (gens[0].rows, gens[0].cols);
    for bound in [1u64, 8, 64, 1024, 16384] {
        let r_sub = match round_span(&it.ux, j, bound) {
            Ok(b) => b,
            Err(_) => continue,
        };
        let l_sub = match round_span(&it.vy, i, bound) {
            Ok(b) => b,
            Err(_) => continue,
        };
        if r_sub.len() != n - j || l_sub.len() != m - i {
            continue;
        }
        let lmat = ExactMat::from_columns(m, &l_sub);
        let rmat = ExactMat::from_columns(n, &r_sub);
        let independent = gens
            .iter()
            .all(|a| lmat.adjoint().mul(a).mul(&rmat).is_zero());
        if independent {
            return true;
        }
    }
    false
}

/// Decision with access to the exact generators: in addition to the
/// capacity-floor route, a diverging run is cut short as soon as the
/// trailing eigenvectors round to an exactly independent pair violating
/// (k, r) — an unconditional certificate.
pub fn decision_outcome_exact(
    gens: &[ExactMat],
    k: usize,
    r: usize,
    settings: &OpScaleSettings,
) -> Result<(Decision, Option<ScaleOutcome>)> {
    settings.validate()?;
    if gens.is_empty() {
        return Err(Error::Invalid("decision needs at least one generator".into()));
    }
    let (m, n) = (gens[0].rows, gens[0].cols);
    if r > n {
        return Err(Error::Invalid(format!("r={r} exceeds n={n}")));
    }
    if k == 0 {
        return Ok((Decision::Bounded, None));
    }
    let map = CpMap::from_exact(gens)?;
    if k > m.min(n) || map.size() == 0.0 {
        return Ok((Decision::Unbounded, None));
    }
    let kf = if r == 0 { k as f64 } else { k as f64 - 1.0 / (2.0 * n as f64) };
    let alpha = MajorizationTarget::alpha_r(n, r)?;
    if kf > alpha.sum() + 1e-12 {
        return Ok((Decision::Unbounded, None));
    }
    let spec = MajSpec { alpha, beta: MajorizationTarget::ones(m), k: kf, r };
    let eps = if r == 0 {
        1.0 / (10.0 * ((m + n) as f64).sqrt())
    } else {
        1.0 / (10.0 * n as f64 * ((m + n) as f64).sqrt())
    };
    let log_divisor = map.size().max(1.0).ln();
    let normalized = map.scaled((-log_divisor / 2.0).exp());
    let budget = CapacityBudget::standard(&normalized, &spec, eps, settings.floor_const);
    let max_iters = settings.max_iter.unwrap_or(budget.max_iters);
    let candidates = violation_candidates(m, n, k, r);
    let mut solver = OpSolver::new(&normalized, &spec);
    let mut prev_f = f64::INFINITY;
    let mut slack = 0.0f64;
    for iter in 0..max_iters {
        solver.z_update()?;
        let f = solver.objective();
        slack = slack.max((f - prev_f) / prev_f.abs().max(1.0));
        prev_f = f;
        let (ex, ey) = solver.divergences()?;
        if ex <= budget.progress_quantum && ey <= budget.progress_quantum {
            return Ok((
                Decision::Bounded,
                Some(ScaleOutcome::Scaled {
                    iterate: solver.it,
                    iterations: iter,
                    eps,
                    log_divisor,
                    monotone_slack: slack,
                }),
            ));
        }
        if f <= budget.floor {
            return Ok((
                Decision::Unbounded,
                Some(ScaleOutcome::Diverged {
                    iterate: solver.it,
                    iterations: iter,
                    objective: f,
                    log_divisor,
                    monotone_slack: slack,
                }),
            ));
        }
        if iter % 16 == 8 {
            for &(i, j) in &candidates {
                if solver.candidate_defect(i, j) <= 1e-9
                    && exact_violation_cert(gens, &solver.it, i, j)
                {
                    return Ok((
                        Decision::Unbounded,
                        Some(ScaleOutcome::Diverged {
                            iterate: solver.it,
                            iterations: iter,
                            objective: f,
                            log_divisor,
                            monotone_slack: slack,
                        }),
                    ));
                }
            }
        }
        if ex >= ey {
            solver.x_update()?;
        } else {
            solver.y_update()?;
        }
        let f2 = solver.objective();
        slack = slack.max((f2 - prev_f) / prev_f.abs().max(1.0));
        prev_f = f2;
    }
    Err(Error::Solver(format!(
        "decision: iteration budget {max_iters} exhausted before a certificate"
    )))
}

/// k* via binary search with the exact-certificate decision.
pub fn ncrank_exact(gens: &[ExactMat], settings: &OpScaleSettings) -> Result<usize> {
    if gens.is_empty() {
        return Err(Error::Invalid("ncrank needs at least one generator".into()));
    }
    let (m, n) = (gens[0].rows, gens[0].cols);
    let mut lo = 0usize;
    let mut hi = m.min(n);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if decision_outcome_exact(gens, mid, 0, settings)?.0 == Decision::Bounded {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// r* at fixed k* with the exact-certificate decision.
pub fn r_star_exact(gens: &[ExactMat], k_star: usize, settings: &OpScaleSettings) -> Result<usize> {
    let n = gens[0].cols;
    let mut lo = 0usize;
    let mut hi = n;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if decision_outcome_exact(gens, k_star, mid, settings)?.0 == Decision::Bounded {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// k* = ncrank: the largest k with cap_k Φ > −∞, by binary search.
pub fn ncrank(map: &CpMap, settings: &OpScaleSettings) -> Result<usize> {
    let mut lo = 0usize;
    let mut hi = map.m.min(map.n);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if decision_sinkhorn(map, mid, 0, settings)? == Decision::Bounded {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// r* at fixed k*: the largest r with cap_{k*,r} Φ > −∞.
pub fn r_star(map: &CpMap, k_star: usize, settings: &OpScaleSettings) -> Result<usize> {
    let mut lo = 0usize;
    let mut hi = map.n;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if decision_sinkhorn(map, k_star, mid, settings)? == Decision::Bounded {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    Ok(lo)
}

/// Direct evaluation of Tr π_L Φ(π_R) for orthonormal column bases.
pub fn check_eps_independent(map: &CpMap, l_basis: &CMat, r_basis: &CMat) -> Result<f64> {
    if l_basis.rows != map.m || r_basis.rows != map.n {
        return Err(Error::Dimension("witness bases do not match map dimensions".into()));
    }
    let mut s = 0.0;
    for a in &map.kraus {
        let br = a.mul(r_basis); // m × dimR
        let lb = l_basis.adjoint().mul(&br); // dimL × dimR
        s += lb.fro_norm().powi(2);
    }
    Ok(s)
}

/// Find an ε-independent set violating (k, r), assuming cap_{k,r} = −∞.
/// Runs the perturbed majorized Sinkhorn at k' = k − 1/(2n) and checks the
/// candidate eigen-splits every iteration until one has defect ≤ eps.
pub fn approx_indep(
    map: &CpMap,
    k: usize,
    r: usize,
    eps: f64,
    settings: &OpScaleSettings,
) -> Result<IndependentSetWitness> {
    settings.validate()?;
    let (m, n) = (map.m, map.n);
    if k == 0 || k > m + n {
        return Err(Error::Invalid("approx_indep: need 1 ≤ k ≤ m+n".into()));
    }
    if r > n {
        return Err(Error::Invalid(format!("approx_indep: r={r} exceeds n={n}")));
    }
    if map.size() == 0.0 {
        // zero map: (ℂᵐ, ℂⁿ) is exactly independent
        return Ok(IndependentSetWitness {
            l_basis: CMat::identity(m),
            r_basis: CMat::identity(n),
            epsilon: 0.0,
            violated: (k, r),
        });
    }
    // candidate splits: i + j = k − 1, or i + j = k with j > n − r
    let mut candidates: Vec<(usize, usize)> = Vec::new();
    for i in 0..m {
        for j in 0..n {
            if i + j == k - 1 || (i + j == k && j + r > n) {
                candidates.push((i, j));
            }
        }
    }
    if candidates.is_empty() {
        return Err(Error::Invalid("approx_indep: no candidate splits for (k, r)".into()));
    }
    let kf = k as f64 - 1.0 / (2.0 * n as f64);
    let spec = MajSpec {
        alpha: MajorizationTarget::alpha_r(n, r)?,
        beta: MajorizationTarget::ones(m),
        k: kf,
        r,
    };
    let size = map.size();
    let log_divisor = size.max(1.0).ln();
    let normalized = map.scaled((-log_divisor / 2.0).exp());
    let budget = settings.max_iter.unwrap_or_else(|| {
        let t = 4.0
            * (k * k) as f64
            * ((m + n) * n * n * n) as f64
            * (2.0 * std::f64::consts::E.powi(2) * n as f64 * (k * k) as f64 / eps).ln();
        (t.ceil() as usize).max(1024)
    });
    let mut solver = OpSolver::new(&normalized, &spec);
    let mut last_f = f64::INFINITY;
    for _iter in 0..budget {
        solver.z_update()?;
        for &(i, j) in &candidates {
            // defect measured on the normalized map; rescale to the original
            let defect = solver.candidate_defect(i, j) * log_divisor.exp();
            if defect <= eps {
                return Ok(solver.witness_from(i, j, defect, (k, r)));
            }
        }
        let (ex, ey) = solver.divergences()?;
        if ex >= ey {
            solver.x_update()?;
        } else {
            solver.y_update()?;
        }
        last_f = solver.objective();
    }
    Err(Error::Solver(format!(
        "approx_indep: no candidate reached defect ≤ {eps} within budget; final objective {last_f}"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn unit(m: usize, n: usize, i: usize, j: usize) -> CMat {
        let mut a = CMat::zeros(m, n);
        a[(i, j)] = c(1.0);
        a
    }

    fn e11_e12() -> CpMap {
        CpMap::new(vec![unit(2, 2, 0, 0), unit(2, 2, 0, 1)]).unwrap()
    }

    fn e11_e22() -> CpMap {
        CpMap::new(vec![unit(2, 2, 0, 0), unit(2, 2, 1, 1)]).unwrap()
    }

    fn spec_ones(n: usize, m: usize, k: f64) -> MajSpec {
        MajSpec::new(MajorizationTarget::ones(n), MajorizationTarget::ones(m), k, 0).unwrap()
    }

    #[test]
    fn objective_at_identity_is_size() {
        let phi = e11_e12();
        let it = ScalingIterate::identity(2, 2);
        let f = capacity_objective(&phi, &it, &spec_ones(2, 2, 0.0)).unwrap();
        assert!((f - phi.size()).abs() < 1e-12);
    }

    #[test]
    fn objective_identity_kraus_in_z() {
        let phi = CpMap::new(vec![CMat::identity(2)]).unwrap();
        for z in [0.0, 0.5, 1.5] {
            let mut it = ScalingIterate::identity(2, 2);
            it.z = z;
            let f = capacity_objective(&phi, &it, &spec_ones(2, 2, 2.0)).unwrap();
            assert!((f - (2.0 * z.exp() - 2.0 * z)).abs() < 1e-10);
        }
    }

    #[test]
    fn objective_perturbed_r0_equals_plain() {
        let phi = e11_e12();
        let mut it = ScalingIterate::identity(2, 2);
        it.x_log = vec![0.7, 0.2];
        it.y_log = vec![0.4, 0.1];
        it.z = 0.3;
        let f0 = capacity_objective(&phi, &it, &spec_ones(2, 2, 1.0)).unwrap();
        let fr = capacity_objective(&phi, &it, &MajSpec::perturbed(2, 2, 1.0, 0).unwrap()).unwrap();
        assert!((f0 - fr).abs() < 1e-12, "α₀ = 1ₙ makes f_k,0 equal f_k");
    }

    #[test]
    fn z_update_examples() {
        let phi = CpMap::new(vec![CMat::identity(2)]).unwrap(); // a = 2 at identity
        let it = ScalingIterate::identity(2, 2);
        assert!(z_update(&phi, &it, 2.0).unwrap().abs() < 1e-12, "a = k gives z = 0");
        assert!(z_update(&phi, &it, 1.0).unwrap().abs() < 1e-12, "a = 2k gives z = 0");
        // a = k/2
        let phi = CpMap::new(vec![CMat::identity(2).scale(0.5f64.sqrt())]).unwrap();
        assert!((z_update(&phi, &it, 2.0).unwrap() - 2.0f64.ln()).abs() < 1e-12);
        // a = 0 with k > 0 signals divergence
        let phi = CpMap::new(vec![CMat::zeros(2, 2)]).unwrap();
        assert!(z_update(&phi, &it, 1.0).is_err());
    }

    #[test]
    fn x_update_examples() {
        let it = ScalingIterate::identity(2, 2);
        // C ⪯ I, α = 1ₙ → X = I
        let phi = CpMap::new(vec![CMat::identity(2).scale(0.5)]).unwrap();
        let upd = x_update(&phi, &it, &spec_ones(2, 2, 0.5)).unwrap();
        assert!(upd.x_log.iter().all(|&v| v.abs() < 1e-12));

        // C = diag(4,1) → X = diag(4,1)
        let a = CMat::from_rows(&[vec![c(2.0), c(0.0)], vec![c(0.0), c(1.0)]]);
        let phi = CpMap::new(vec![a]).unwrap();
        let upd = x_update(&phi, &it, &spec_ones(2, 2, 2.0)).unwrap();
        assert!((upd.x_log[0] - 4.0f64.ln()).abs() < 1e-9);
        assert!(upd.x_log[1].abs() < 1e-12);

        // C = c·I with c > 1 → X = c·I
        let phi = CpMap::new(vec![CMat::identity(2).scale(3.0f64.sqrt())]).unwrap();
        let upd = x_update(&phi, &it, &spec_ones(2, 2, 2.0)).unwrap();
        assert!((upd.x_log[0] - 3.0f64.ln()).abs() < 1e-9);
        assert!((upd.x_log[1] - 3.0f64.ln()).abs() < 1e-9);
    }

    #[test]
    fn sinkhorn_doubly_stochastic_terminates_immediately() {
        let phi = e11_e22();
        let out = maj_sinkhorn(&phi, &spec_ones(2, 2, 2.0), 0.1, &Default::default()).unwrap();
        match out {
            ScaleOutcome::Scaled { iterations, .. } => assert!(iterations <= 1),
            _ => panic!("doubly stochastic map must scale"),
        }
    }

    #[test]
    fn sinkhorn_diverges_when_rank_deficient() {
        let phi = e11_e12(); // ncrank 1
        let out = maj_sinkhorn(&phi, &spec_ones(2, 2, 2.0), 0.05, &Default::default()).unwrap();
        assert!(matches!(out, ScaleOutcome::Diverged { .. }));
    }

    #[test]
    fn sinkhorn_scales_at_k1_with_size_contract() {
        let phi = e11_e12();
        let eps = 0.1;
        let spec = spec_ones(2, 2, 1.0);
        let out = maj_sinkhorn(&phi, &spec, eps, &Default::default()).unwrap();
        match &out {
            ScaleOutcome::Scaled { iterate, log_divisor, .. } => {
                let norm = phi.scaled((-log_divisor / 2.0).exp());
                let (mu, nu) = scaled_marginals(&norm, iterate, &spec, eps).unwrap();
                let total: f64 = mu.iter().sum();
                assert!(total >= (1.0 - eps) * (1.0 - eps) - 1e-8, "size contract, got {total}");
                let mut pre = 0.0;
                for (i, v) in mu.iter().enumerate() {
                    pre += v;
                    assert!(pre <= (i + 1) as f64 + 1e-8);
                }
                let mut pre = 0.0;
                for (i, v) in nu.iter().enumerate() {
                    pre += v;
                    assert!(pre <= (i + 1) as f64 + 1e-8);
                }
            }
            _ => panic!("k=1 must scale"),
        }
    }

    #[test]
    fn decision_examples() {
        let s = OpScaleSettings::default();
        assert_eq!(decision_sinkhorn(&e11_e22(), 2, 0, &s).unwrap(), Decision::Bounded);
        assert_eq!(decision_sinkhorn(&e11_e12(), 2, 0, &s).unwrap(), Decision::Unbounded);
        assert_eq!(decision_sinkhorn(&e11_e12(), 1, 2, &s).unwrap(), Decision::Bounded);
        let zero = CpMap::new(vec![CMat::zeros(2, 2)]).unwrap();
        assert_eq!(decision_sinkhorn(&zero, 1, 0, &s).unwrap(), Decision::Unbounded);
    }

    #[test]
    fn decision_lexicographic_monotone() {
        let s = OpScaleSettings::default();
        for phi in [e11_e12(), e11_e22()] {
            let mut frontier = Vec::new();
            for k in 0..=2usize {
                for r in 0..=2usize {
                    let d = decision_sinkhorn(&phi, k, r, &s).unwrap();
                    frontier.push(((k, r), d));
                }
            }
            for &((k, r), d) in &frontier {
                if d == Decision::Bounded {
                    for &((k2, r2), d2) in &frontier {
                        if (k2, r2) <= (k, r) {
                            assert_eq!(d2, Decision::Bounded, "({k2},{r2}) ≤ ({k},{r})");
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn ncrank_and_rstar_examples() {
        let s = OpScaleSettings::default();
        assert_eq!(ncrank(&e11_e22(), &s).unwrap(), 2);
        let k = ncrank(&e11_e12(), &s).unwrap();
        assert_eq!(k, 1);
        assert_eq!(r_star(&e11_e12(), k, &s).unwrap(), 2);
    }

    #[test]
    fn check_defect_examples() {
        let phi = CpMap::new(vec![CMat::identity(2)]).unwrap();
        let e1 = CMat::from_rows(&[vec![c(1.0)], vec![c(0.0)]]);
        let d = check_eps_independent(&phi, &e1, &e1).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        // kraus {E₁₂}, L = ⟨e₁⟩, R = ⟨e₂⟩ → 1
        let phi = CpMap::new(vec![unit(2, 2, 0, 1)]).unwrap();
        let e2 = CMat::from_rows(&[vec![c(0.0)], vec![c(1.0)]]);
        let d = check_eps_independent(&phi, &e1, &e2).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        // A R ⊥ L → 0
        let d = check_eps_independent(&phi, &e2, &e2).unwrap();
        assert!(d < 1e-14);
    }

    #[test]
    fn witness_examples() {
        let s = OpScaleSettings::default();
        // {E₁₁,E₁₂} violating (2,0): the exact optimum is (⟨e₂⟩, ℂ²)
        let w = approx_indep(&e11_e12(), 2, 0, 1e-6, &s).unwrap();
        assert!(w.epsilon <= 1e-6);
        assert!(w.l_basis.cols + w.r_basis.cols >= 3);
        // zero map
        let zero = CpMap::new(vec![CMat::zeros(2, 3)]).unwrap();
        let w = approx_indep(&zero, 1, 0, 1e-9, &s).unwrap();
        assert_eq!((w.l_basis.cols, w.r_basis.cols), (2, 3));
        assert_eq!(w.epsilon, 0.0);
    }

    #[test]
    fn witness_bipartite_blocker() {
        let s = OpScaleSettings::default();
        // support {(0,0),(0,1),(1,2),(2,2)}: k* = 2; violation of (3,0)
        let phi = CpMap::new(vec![
            unit(3, 3, 0, 0),
            unit(3, 3, 0, 1),
            unit(3, 3, 1, 2),
            unit(3, 3, 2, 2),
        ])
        .unwrap();
        let w = approx_indep(&phi, 3, 0, 1e-8, &s).unwrap();
        assert!(w.epsilon <= 1e-8);
        assert!(w.l_basis.cols + w.r_basis.cols >= 4);
        let d = check_eps_independent(&phi, &w.l_basis, &w.r_basis).unwrap();
        assert!(d <= 1e-7, "witness re-check: {d}");
    }

    #[test]
    fn monotone_objective_along_run() {
        let phi = e11_e12();
        let spec = spec_ones(2, 2, 2.0);
        let size = phi.size();
        let norm = phi.scaled((1.0 / size).sqrt());
        let mut solver = OpSolver::new(&norm, &spec);
        let mut prev = f64::INFINITY;
        for _ in 0..400 {
            solver.z_update().unwrap();
            let f = solver.objective();
            assert!(f <= prev + 1e-9 * prev.abs().max(1.0), "{prev} -> {f}");
            prev = f;
            let (ex, ey) = solver.divergences().unwrap();
            if ex >= ey {
                solver.x_update().unwrap();
            } else {
                solver.y_update().unwrap();
            }
            let f = solver.objective();
            assert!(f <= prev + 1e-9 * prev.abs().max(1.0), "update increased: {prev} -> {f}");
            prev = f;
            if f < -200.0 {
                break;
            }
        }
        assert!(prev < -100.0, "diverging instance must descend, got {prev}");
    }
}
