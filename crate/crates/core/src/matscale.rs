//! Nonnegative-matrix scaling: k-capacity, majorization targets, a Sinkhorn
//! variant that either scales or certifies divergence, and Hall-blocker
//! extraction by rounding a diverged iterate. This is the scalar model of
//! the operator pipeline and is independently testable against matching
//! oracles.

use crate::bipartite::SupportGraph;
use crate::numla::log_sum_exp;
use crate::permproj::{kl_project_log, MajorizationTarget};
use crate::{Error, Result};

/// Nonnegative matrix with entries stored densely.
#[derive(Clone, Debug)]
pub struct NonnegMatrix {
    pub rows: usize,
    pub cols: usize,
    pub a: Vec<Vec<f64>>,
}

impl NonnegMatrix {
    pub fn new(a: Vec<Vec<f64>>) -> Result<Self> {
        let rows = a.len();
        let cols = a.first().map(|r| r.len()).unwrap_or(0);
        for row in &a {
            if row.len() != cols {
                return Err(Error::Dimension("ragged matrix".into()));
            }
            if row.iter().any(|&v| v < 0.0 || !v.is_finite()) {
                return Err(Error::Invalid("matrix entries must be finite and nonnegative".into()));
            }
        }
        Ok(NonnegMatrix { rows, cols, a })
    }

    pub fn size(&self) -> f64 {
        self.a.iter().flatten().sum()
    }

    pub fn support(&self) -> SupportGraph {
        SupportGraph::from_matrix(&self.a)
    }

    fn log_entries(&self) -> Vec<Vec<f64>> {
        self.a
            .iter()
            .map(|r| r.iter().map(|&v| if v > 0.0 { v.ln() } else { f64::NEG_INFINITY }).collect())
            .collect()
    }

    fn nnz(&self) -> usize {
        self.a.iter().flatten().filter(|&&v| v > 0.0).count()
    }

    fn max_entry(&self) -> f64 {
        self.a.iter().flatten().cloned().fold(0.0, f64::max)
    }
}

/// Scaling variables (x, y, z) in the domain x ≥ 0, y ≥ 0, z ≥ 0.
#[derive(Clone, Debug)]
pub struct MatrixScalingTriple {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub z: f64,
}

impl MatrixScalingTriple {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        MatrixScalingTriple { x: vec![0.0; cols], y: vec![0.0; rows], z: 0.0 }
    }
}

/// Column subset S with defect |S| − |Γ(S)|.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HallBlocker {
    pub s: Vec<usize>,
    pub defect: i64,
}

/// f^{α,β}_k(x,y,z) = Σ A_ij e^{z−yᵢ−xⱼ} + Σ αⱼx↓ⱼ + Σ βᵢy↓ᵢ − kz.
pub fn matrix_objective(
    a: &NonnegMatrix,
    triple: &MatrixScalingTriple,
    alpha: &MajorizationTarget,
    beta: &MajorizationTarget,
    k: f64,
) -> f64 {
    let mut s = 0.0;
    for (i, row) in a.a.iter().enumerate() {
        for (j, &v) in row.iter().enumerate() {
            if v > 0.0 {
                s += (v.ln() + triple.z - triple.y[i] - triple.x[j]).exp();
            }
        }
    }
    s + dot_sorted(alpha, &triple.x) + dot_sorted(beta, &triple.y) - k * triple.z
}

fn dot_sorted(target: &MajorizationTarget, v: &[f64]) -> f64 {
    let mut s = v.to_vec();
    s.sort_by(|a, b| b.partial_cmp(a).unwrap());
    s.iter().zip(target.as_slice()).map(|(a, b)| a * b).sum()
}

/// Outcome of [`matrix_sinkhorn`]. The triple refers to the input matrix
/// divided by `e^{log_divisor}` (the size-normalization the solver applies).
#[derive(Clone, Debug)]
pub enum MatrixScalingOutcome {
    Scaled { triple: MatrixScalingTriple, iterations: usize, log_divisor: f64 },
    Diverged { triple: MatrixScalingTriple, iterations: usize, log_divisor: f64, objective: f64 },
}

#[derive(Clone, Debug)]
pub struct MatScaleSettings {
    pub floor_const: f64,
    pub max_iter: Option<usize>,
}

impl Default for MatScaleSettings {
    fn default() -> Self {
        MatScaleSettings { floor_const: 16.0, max_iter: None }
    }
}

/// Capacity floor: the operator-side lower-bound formula specialized to
/// diagonal Kraus operators (p = number of nonzero entries).
pub fn matrix_capacity_floor(a: &NonnegMatrix, k: f64, floor_const: f64) -> f64 {
    let (m, n) = (a.rows as f64, a.cols as f64);
    let p = a.nnz().max(1) as f64;
    let big_m = a.max_entry().max(1.0);
    -floor_const
        * (k * (n + m) * (m + n).max(2.0).ln()
            + k * p.ln()
            + n * (p * m * n * big_m * big_m).max(2.0).ln())
}

/// Worst-case iteration budget 2·(1 − floor)/quantum.
pub fn matrix_iter_budget(floor: f64, quantum: f64) -> usize {
    ((2.0 * (1.0 - floor) / quantum).ceil() as usize).max(16)
}

struct MatSolver<'a> {
    log_a: Vec<Vec<f64>>, // normalized entries, in logs
    alpha: &'a MajorizationTarget,
    beta: &'a MajorizationTarget,
    k: f64,
    t: MatrixScalingTriple,
}

impl<'a> MatSolver<'a> {
    fn log_trace(&self) -> f64 {
        let mut vals = Vec::new();
        for (i, row) in self.log_a.iter().enumerate() {
            for (j, &la) in row.iter().enumerate() {
                if la > f64::NEG_INFINITY {
                    vals.push(la - self.t.y[i] - self.t.x[j]);
                }
            }
        }
        log_sum_exp(vals.into_iter())
    }

    fn z_update(&mut self) -> Result<()> {
        let log_a = self.log_trace();
        if log_a == f64::NEG_INFINITY {
            return Err(Error::Solver("zero matrix with positive target size".into()));
        }
        self.t.z = (self.k.ln() - log_a).max(0.0);
        Ok(())
    }

    /// log column sums of the currently scaled matrix (the X-marginal).
    fn log_mu(&self) -> Vec<f64> {
        (0..self.t.x.len())
            .map(|j| {
                self.t.z - self.t.x[j]
                    + log_sum_exp(
                        self.log_a.iter().enumerate().map(|(i, row)| row[j] - self.t.y[i]),
                    )
            })
            .collect()
    }

    fn log_nu(&self) -> Vec<f64> {
        (0..self.t.y.len())
            .map(|i| {
                self.t.z - self.t.y[i]
                    + log_sum_exp(
                        self.log_a[i].iter().enumerate().map(|(j, &la)| la - self.t.x[j]),
                    )
            })
            .collect()
    }

    fn x_update(&mut self) -> Result<()> {
        let log_c: Vec<f64> = (0..self.t.x.len())
            .map(|j| {
                self.t.z
                    + log_sum_exp(self.log_a.iter().enumerate().map(|(i, row)| row[j] - self.t.y[i]))
            })
            .collect();
        let proj = kl_project_log(&log_c, self.alpha)?;
        let mut x = vec![0.0; log_c.len()];
        for (pos, &idx) in proj.order.iter().enumerate() {
            x[idx] = proj.dual_x[pos];
        }
        self.t.x = x;
        Ok(())
    }

    fn y_update(&mut self) -> Result<()> {
        let log_c: Vec<f64> = (0..self.t.y.len())
            .map(|i| {
                self.t.z
                    + log_sum_exp(self.log_a[i].iter().enumerate().map(|(j, &la)| la - self.t.x[j]))
            })
            .collect();
        let proj = kl_project_log(&log_c, self.beta)?;
        let mut y = vec![0.0; log_c.len()];
        for (pos, &idx) in proj.order.iter().enumerate() {
            y[idx] = proj.dual_x[pos];
        }
        self.t.y = y;
        Ok(())
    }

    fn objective(&self) -> f64 {
        let lt = self.log_trace();
        (self.t.z + lt).exp() + dot_sorted(self.alpha, &self.t.x) + dot_sorted(self.beta, &self.t.y)
            - self.k * self.t.z
    }
}

/// Sinkhorn for majorization scaling of nonnegative matrices.
///
/// Returns `Scaled` when both marginal divergences drop below
/// min{α₁,β₁}ε²/2 (then `e^{z−ε}·diag(e^{−y})·A'·diag(e^{−x})` is
/// (α,β)-majorized with size ≥ (1−ε)k for the normalized A'), `Diverged`
/// when the objective crosses the capacity floor, and an error if the
/// iteration budget runs out first.
pub fn matrix_sinkhorn(
    a: &NonnegMatrix,
    alpha: &MajorizationTarget,
    beta: &MajorizationTarget,
    k: f64,
    eps: f64,
    settings: &MatScaleSettings,
) -> Result<MatrixScalingOutcome> {
    if alpha.len() != a.cols || beta.len() != a.rows {
        return Err(Error::Dimension("majorization targets must match matrix shape".into()));
    }
    if k > alpha.sum() + 1e-12 || k > beta.sum() + 1e-12 {
        return Err(Error::Invalid("k must be at most min(Σα, Σβ)".into()));
    }
    if eps <= 0.0 || eps >= 1.0 {
        return Err(Error::Invalid("eps must lie in (0,1)".into()));
    }
    let size = a.size();
    let log_divisor = size.max(1.0).ln();
    let norm = NonnegMatrix::new(
        a.a.iter().map(|r| r.iter().map(|&v| v / size.max(1.0)).collect()).collect(),
    )?;
    if k == 0.0 {
        return Ok(MatrixScalingOutcome::Scaled {
            triple: MatrixScalingTriple::zeros(a.rows, a.cols),
            iterations: 0,
            log_divisor,
        });
    }
    if norm.size() == 0.0 {
        return Ok(MatrixScalingOutcome::Diverged {
            triple: MatrixScalingTriple::zeros(a.rows, a.cols),
            iterations: 0,
            log_divisor,
            objective: f64::NEG_INFINITY,
        });
    }

    let quantum = alpha.first().min(beta.first()) * eps * eps / 2.0;
    let floor = matrix_capacity_floor(a, k, settings.floor_const);
    let budget = settings.max_iter.unwrap_or_else(|| matrix_iter_budget(floor, quantum));

    let mut solver = MatSolver {
        log_a: norm.log_entries(),
        alpha,
        beta,
        k,
        t: MatrixScalingTriple::zeros(a.rows, a.cols),
    };
    for it in 0..budget {
        solver.z_update()?;
        let ex = kl_project_log(&solver.log_mu(), alpha)?.divergence;
        let ey = kl_project_log(&solver.log_nu(), beta)?.divergence;
        if ex <= quantum && ey <= quantum {
            return Ok(MatrixScalingOutcome::Scaled { triple: solver.t, iterations: it, log_divisor });
        }
        if solver.objective() <= floor {
            return Ok(MatrixScalingOutcome::Diverged {
                triple: solver.t,
                iterations: it,
                log_divisor,
                objective: floor,
            });
        }
        if ex >= ey {
            solver.x_update()?;
        } else {
            solver.y_update()?;
        }
    }
    Err(Error::Solver(format!("matrix_sinkhorn: iteration budget {budget} exhausted")))
}

/// The scaled matrix `e^{z−eps}·diag(e^{−y})·A'·diag(e^{−x})` where A' is
/// the input divided by `e^{log_divisor}`.
pub fn scaled_matrix(a: &NonnegMatrix, outcome: &MatrixScalingOutcome, eps: f64) -> Vec<Vec<f64>> {
    let (t, ld) = match outcome {
        MatrixScalingOutcome::Scaled { triple, log_divisor, .. } => (triple, log_divisor),
        MatrixScalingOutcome::Diverged { triple, log_divisor, .. } => (triple, log_divisor),
    };
    a.a.iter()
        .enumerate()
        .map(|(i, row)| {
            row.iter()
                .enumerate()
                .map(|(j, &v)| {
                    if v > 0.0 {
                        (v.ln() - ld + t.z - eps - t.y[i] - t.x[j]).exp()
                    } else {
                        0.0
                    }
                })
                .collect()
        })
        .collect()
}

/// Round a sufficiently diverged iterate into a coordinate independent set
/// (rows L, cols R) with a zero block and |L| + |R| ≥ m + n − ⌈k⌉ + 1,
/// by the sorted sweep over index pairs.
pub fn round_fractional_cover(
    a: &NonnegMatrix,
    triple: &MatrixScalingTriple,
    k: f64,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let (m, n) = (a.rows, a.cols);
    let kk = k.floor() as usize;
    if triple.z <= 0.0 {
        return Err(Error::Solver("round_fractional_cover: iterate has z = 0".into()));
    }
    // sort scaled duals nonincreasing
    let mut col_order: Vec<usize> = (0..n).collect();
    col_order.sort_by(|&p, &q| triple.x[q].partial_cmp(&triple.x[p]).unwrap());
    let mut row_order: Vec<usize> = (0..m).collect();
    row_order.sort_by(|&p, &q| triple.y[q].partial_cmp(&triple.y[p]).unwrap());

    // candidate splits: 1-indexed (i, j) with i + j = ⌊k⌋ + 1
    for i in 1..=m {
        if kk + 1 < i + 1 {
            continue;
        }
        let j = kk + 1 - i;
        if j < 1 || j > n {
            continue;
        }
        let rows_l: Vec<usize> = row_order[i - 1..].to_vec();
        let cols_r: Vec<usize> = col_order[j - 1..].to_vec();
        let zero_block =
            rows_l.iter().all(|&r| cols_r.iter().all(|&c| a.a[r][c] == 0.0));
        if zero_block {
            let (mut rows_l, mut cols_r) = (rows_l, cols_r);
            // greedy maximal extension keeps the zero block exact
            for r in 0..m {
                if !rows_l.contains(&r) && cols_r.iter().all(|&c| a.a[r][c] == 0.0) {
                    rows_l.push(r);
                }
            }
            for c in 0..n {
                if !cols_r.contains(&c) && rows_l.iter().all(|&r| a.a[r][c] == 0.0) {
                    cols_r.push(c);
                }
            }
            rows_l.sort_unstable();
            cols_r.sort_unstable();
            return Ok((rows_l, cols_r));
        }
    }
    Err(Error::Solver("round_fractional_cover: divergence threshold not met".into()))
}

/// Decide whether cap_{k,r} is finite for the matrix (matrix specialization
/// of the operator decision procedure).
pub fn matrix_decision(a: &NonnegMatrix, k: usize, r: usize, settings: &MatScaleSettings) -> Result<bool> {
    let n = a.cols;
    if k == 0 {
        return Ok(true);
    }
    if k > a.rows.min(a.cols) {
        return Ok(false);
    }
    let alpha = MajorizationTarget::alpha_r(n, r)?;
    let beta = MajorizationTarget::ones(a.rows);
    if k as f64 > alpha.sum() {
        return Ok(false);
    }
    let eps = if r == 0 {
        1.0 / (10.0 * ((a.rows + a.cols) as f64).sqrt())
    } else {
        1.0 / (10.0 * n as f64 * ((a.rows + a.cols) as f64).sqrt())
    };
    let kf = if r == 0 { k as f64 } else { k as f64 - 1.0 / (2.0 * n as f64) };
    match matrix_sinkhorn(a, &alpha, &beta, kf, eps, settings)? {
        MatrixScalingOutcome::Scaled { .. } => Ok(true),
        MatrixScalingOutcome::Diverged { .. } => Ok(false),
    }
}

/// The smallest Hall blocker via the perturbed-capacity pipeline:
/// binary-search k*, then r*, then round the diverged (k*, r*+1) run.
pub fn smallest_hall_blocker(a: &NonnegMatrix, settings: &MatScaleSettings) -> Result<HallBlocker> {
    let (m, n) = (a.rows, a.cols);
    // k* = max k with cap_k > −∞
    let mut lo = 0usize;
    let mut hi = m.min(n);
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if matrix_decision(a, mid, 0, settings)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let k_star = lo;
    if k_star == n {
        return Ok(HallBlocker { s: vec![], defect: 0 });
    }
    // r* = max r with cap_{k*,r} > −∞
    let mut lo = 0usize;
    let mut hi = n;
    while lo < hi {
        let mid = (lo + hi + 1) / 2;
        if matrix_decision(a, k_star, mid, settings)? {
            lo = mid;
        } else {
            hi = mid - 1;
        }
    }
    let r_star = lo;
    if r_star == n {
        // every maximum independent set already uses all columns
        let s: Vec<usize> = (0..n).collect();
        let defect = n as i64 - k_star as i64;
        return Ok(HallBlocker { s, defect });
    }

    // diverge the perturbed objective at (k* − 1/2n, α_{r*+1}) and round
    let alpha = MajorizationTarget::alpha_r(n, r_star + 1)?;
    let beta = MajorizationTarget::ones(m);
    let kf = k_star as f64 - 1.0 / (2.0 * n as f64);
    let size = a.size();
    let norm = NonnegMatrix::new(
        a.a.iter().map(|row| row.iter().map(|&v| v / size.max(1.0)).collect()).collect(),
    )?;
    let mut solver = MatSolver {
        log_a: norm.log_entries(),
        alpha: &alpha,
        beta: &beta,
        k: kf.max(0.5 / n as f64),
        t: MatrixScalingTriple::zeros(m, n),
    };
    let floor = matrix_capacity_floor(a, k_star as f64, settings.floor_const);
    let budget = settings.max_iter.unwrap_or(4_000_000).max(1024);
    for it in 0..budget {
        solver.z_update()?;
        if it % 8 == 4 || solver.objective() <= floor {
            if let Some(b) = try_blocker(a, &solver.t, k_star, r_star) {
                return Ok(b);
            }
            if solver.objective() <= floor {
                break;
            }
        }
        let ex = kl_project_log(&solver.log_mu(), &alpha)?.divergence;
        let ey = kl_project_log(&solver.log_nu(), &beta)?.divergence;
        if ex >= ey {
            solver.x_update()?;
        } else {
            solver.y_update()?;
        }
    }
    try_blocker(a, &solver.t, k_star, r_star)
        .ok_or_else(|| Error::Solver("smallest_hall_blocker: rounding failed".into()))
}

fn try_blocker(
    a: &NonnegMatrix,
    t: &MatrixScalingTriple,
    k_star: usize,
    r_star: usize,
) -> Option<HallBlocker> {
    let (m, n) = (a.rows, a.cols);
    // the violating split has |R| = r*, |L| = m + n − k* − r*
    if n - r_star > n || m + r_star < k_star {
        return None;
    }
    let l_len = (m + n).checked_sub(k_star + r_star)?;
    if l_len > m {
        return None;
    }
    let mut col_order: Vec<usize> = (0..n).collect();
    col_order.sort_by(|&p, &q| t.x[q].partial_cmp(&t.x[p]).unwrap());
    let mut row_order: Vec<usize> = (0..m).collect();
    row_order.sort_by(|&p, &q| t.y[q].partial_cmp(&t.y[p]).unwrap());
    let rows_l: Vec<usize> = row_order[m - l_len..].to_vec();
    let cols_r: Vec<usize> = col_order[n - r_star..].to_vec();
    let zero = rows_l.iter().all(|&r| cols_r.iter().all(|&c| a.a[r][c] == 0.0));
    if !zero {
        return None;
    }
    let g = a.support();
    let mut s = cols_r;
    s.sort_unstable();
    let gamma = g.neighborhood(&s).len() as i64;
    let defect = s.len() as i64 - gamma;
    if defect != n as i64 - k_star as i64 {
        return None;
    }
    Some(HallBlocker { s, defect })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ones_target(n: usize) -> MajorizationTarget {
        MajorizationTarget::ones(n)
    }

    #[test]
    fn objective_examples() {
        let a = NonnegMatrix::new(vec![vec![1.0, 2.0], vec![0.5, 1.5]]).unwrap();
        let t = MatrixScalingTriple::zeros(2, 2);
        let f = matrix_objective(&a, &t, &ones_target(2), &ones_target(2), 1.0);
        assert!((f - 5.0).abs() < 1e-12, "x=y=z=0 gives ΣA_ij");

        // A = I₂, k = 2, z = t → 2eᵗ − 2t, minimized at t = 0 giving 2
        let a = NonnegMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        for zt in [0.0, 0.3, 1.0] {
            let t = MatrixScalingTriple { x: vec![0.0; 2], y: vec![0.0; 2], z: zt };
            let f = matrix_objective(&a, &t, &ones_target(2), &ones_target(2), 2.0);
            assert!((f - (2.0 * zt.exp() - 2.0 * zt)).abs() < 1e-12);
            assert!(f >= 2.0 - 1e-12);
        }

        // A = 0 → −kz + Σαx + Σβy
        let a = NonnegMatrix::new(vec![vec![0.0, 0.0], vec![0.0, 0.0]]).unwrap();
        let t = MatrixScalingTriple { x: vec![1.0, 0.5], y: vec![0.25, 0.0], z: 3.0 };
        let f = matrix_objective(&a, &t, &ones_target(2), &ones_target(2), 2.0);
        assert!((f - (1.5 + 0.25 - 6.0)).abs() < 1e-12);
    }

    #[test]
    fn sinkhorn_identity_immediately_scaled() {
        let a = NonnegMatrix::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let out = matrix_sinkhorn(&a, &ones_target(2), &ones_target(2), 2.0, 0.1, &Default::default())
            .unwrap();
        match out {
            MatrixScalingOutcome::Scaled { iterations, .. } => assert!(iterations <= 2),
            _ => panic!("identity must scale"),
        }
    }

    #[test]
    fn sinkhorn_diverges_above_matching() {
        // max matching 1 < 2
        let a = NonnegMatrix::new(vec![vec![1.0, 1.0], vec![0.0, 0.0]]).unwrap();
        let out = matrix_sinkhorn(&a, &ones_target(2), &ones_target(2), 2.0, 0.05, &Default::default())
            .unwrap();
        assert!(matches!(out, MatrixScalingOutcome::Diverged { .. }));
        // k = 1 is fine, with output size ≥ (1−ε)k
        let eps = 0.05;
        let out = matrix_sinkhorn(&a, &ones_target(2), &ones_target(2), 1.0, eps, &Default::default())
            .unwrap();
        match &out {
            MatrixScalingOutcome::Scaled { .. } => {
                let s = scaled_matrix(&a, &out, eps);
                let total: f64 = s.iter().flatten().sum();
                assert!(total >= (1.0 - eps) - 1e-9);
                // marginals majorized
                for row in &s {
                    assert!(row.iter().sum::<f64>() <= 1.0 + 1e-9);
                }
                for j in 0..2 {
                    assert!(s.iter().map(|r| r[j]).sum::<f64>() <= 1.0 + 1e-9);
                }
            }
            _ => panic!("k = 1 must scale"),
        }
    }

    #[test]
    fn sinkhorn_matches_matching_oracle() {
        // scaled-at-k iff k ≤ max matching, over random 0/1 patterns
        let mut rng = crate::bipartite::XorShift(0xC0FFEE123);
        for _case in 0..50 {
            let m = 1 + (rng.next() % 5) as usize;
            let n = 1 + (rng.next() % 5) as usize;
            let mut rows = vec![vec![0.0; n]; m];
            for row in rows.iter_mut() {
                for v in row.iter_mut() {
                    if rng.next() % 3 == 0 {
                        *v = 1.0;
                    }
                }
            }
            let a = NonnegMatrix::new(rows).unwrap();
            let want = a.support().max_matching_size();
            for k in 0..=m.min(n) {
                let got = matrix_decision(&a, k, 0, &Default::default()).unwrap();
                assert_eq!(got, k <= want, "k={k}, want matching {want}");
            }
        }
    }

    #[test]
    fn objective_monotone_along_run() {
        let a = NonnegMatrix::new(vec![
            vec![1.0, 2.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![3.0, 0.0, 1.0],
        ])
        .unwrap();
        let alpha = ones_target(3);
        let beta = ones_target(3);
        let k = 3.0;
        let size = a.size();
        let norm =
            NonnegMatrix::new(a.a.iter().map(|r| r.iter().map(|&v| v / size).collect()).collect())
                .unwrap();
        let mut solver =
            MatSolver { log_a: norm.log_entries(), alpha: &alpha, beta: &beta, k, t: MatrixScalingTriple::zeros(3, 3) };
        let mut prev = f64::INFINITY;
        for _ in 0..200 {
            solver.z_update().unwrap();
            let f = solver.objective();
            assert!(f <= prev + 1e-9 * prev.abs().max(1.0), "objective increased: {prev} -> {f}");
            prev = f;
            let ex = kl_project_log(&solver.log_mu(), &alpha).unwrap().divergence;
            let ey = kl_project_log(&solver.log_nu(), &beta).unwrap().divergence;
            if ex <= 1e-14 && ey <= 1e-14 {
                break;
            }
            if ex >= ey {
                solver.x_update().unwrap();
            } else {
                solver.y_update().unwrap();
            }
            let f = solver.objective();
            assert!(f <= prev + 1e-9 * prev.abs().max(1.0));
            prev = f;
        }
    }

    #[test]
    fn round_cover_zero_matrix() {
        let a = NonnegMatrix::new(vec![vec![0.0; 3]; 3]).unwrap();
        let t = MatrixScalingTriple { x: vec![0.0; 3], y: vec![0.0; 3], z: 1.0 };
        for k in 1..=3u32 {
            let (l, r) = round_fractional_cover(&a, &t, k as f64).unwrap();
            assert_eq!((l.len(), r.len()), (3, 3), "zero matrix: all rows, all cols");
        }
    }

    #[test]
    fn round_cover_identity_refuses() {
        let a = NonnegMatrix::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        let t = MatrixScalingTriple { x: vec![0.3, 0.2, 0.1], y: vec![0.3, 0.2, 0.1], z: 1.0 };
        assert!(round_fractional_cover(&a, &t, 3.0).is_err());
    }

    #[test]
    fn round_cover_from_diverged_run() {
        // cols {1,2} supported only on row 2 (0-indexed): max matching 2
        let a = NonnegMatrix::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![1.0, 0.0, 0.0],
            vec![1.0, 1.0, 1.0],
        ])
        .unwrap();
        let out = matrix_sinkhorn(&a, &ones_target(3), &ones_target(3), 2.5, 0.05, &Default::default())
            .unwrap();
        let triple = match out {
            MatrixScalingOutcome::Diverged { triple, .. } => triple,
            _ => panic!("k' = 2.5 > matching must diverge"),
        };
        let (l, r) = round_fractional_cover(&a, &triple, 3.0).unwrap();
        assert!(l.len() + r.len() >= 3 + 3 - 3 + 1);
        for &i in &l {
            for &j in &r {
                assert_eq!(a.a[i][j], 0.0);
            }
        }
    }

    #[test]
    fn blocker_examples() {
        let s = MatScaleSettings::default();
        // identity: empty blocker
        let a = NonnegMatrix::new(vec![
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(smallest_hall_blocker(&a, &s).unwrap(), HallBlocker { s: vec![], defect: 0 });

        // support {(0,0),(0,1),(1,2),(2,2)}: smallest blocker {0,1}, defect 1
        let a = NonnegMatrix::new(vec![
            vec![1.0, 1.0, 0.0],
            vec![0.0, 0.0, 1.0],
            vec![0.0, 0.0, 1.0],
        ])
        .unwrap();
        assert_eq!(smallest_hall_blocker(&a, &s).unwrap(), HallBlocker { s: vec![0, 1], defect: 1 });

        // all-ones: perfect matching, empty blocker
        let a = NonnegMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).unwrap();
        assert_eq!(smallest_hall_blocker(&a, &s).unwrap(), HallBlocker { s: vec![], defect: 0 });
    }

    #[test]
    fn blocker_matches_exhaustive() {
        let s = MatScaleSettings::default();
        let mut rng = crate::bipartite::XorShift(0xDEADBEEF77);
        for _case in 0..25 {
            let m = 1 + (rng.next() % 4) as usize;
            let n = 1 + (rng.next() % 4) as usize;
            let mut rows = vec![vec![0.0; n]; m];
            for row in rows.iter_mut() {
                for v in row.iter_mut() {
                    if rng.next() % 3 == 0 {
                        *v = 1.0 + (rng.next() % 3) as f64;
                    }
                }
            }
            let a = NonnegMatrix::new(rows.clone()).unwrap();
            let want = a.support().exhaustive_smallest_surplus_minimizer();
            let got = smallest_hall_blocker(&a, &s).unwrap();
            assert_eq!(got.s, want, "matrix {rows:?}");
        }
    }
}
