//! Generalized KL projection onto the down-closure of a permutahedron,
//! and onto half-spaces, with dual recovery. This is the inner solver of
//! every Sinkhorn update in the crate.
//!
//! The permutahedron projection runs in O(n²) by pool-adjacent-violators
//! style block merging on the dual; inputs may be given in log scale so
//! the callers can hand over spectra whose linear values would overflow.

use crate::{Error, Result};

/// Nonincreasing nonnegative majorization target α.
#[derive(Clone, Debug)]
pub struct MajorizationTarget {
    alpha: Vec<f64>,
}

impl MajorizationTarget {
    pub fn new(alpha: Vec<f64>) -> Result<Self> {
        if alpha.is_empty() {
            return Err(Error::Invalid("empty majorization target".into()));
        }
        for w in alpha.windows(2) {
            if w[1] > w[0] + 1e-15 {
                return Err(Error::Invalid("majorization target must be nonincreasing".into()));
            }
        }
        if alpha.iter().any(|&a| a < 0.0) {
            return Err(Error::Invalid("majorization target must be nonnegative".into()));
        }
        Ok(MajorizationTarget { alpha })
    }

    /// All-ones target of length n.
    pub fn ones(n: usize) -> Self {
        MajorizationTarget { alpha: vec![1.0; n] }
    }

    /// The perturbed target α_r: n−r ones followed by r entries 1 − 1/n.
    pub fn alpha_r(n: usize, r: usize) -> Result<Self> {
        if r > n {
            return Err(Error::Invalid(format!("alpha_r: r={r} exceeds n={n}")));
        }
        let mut v = vec![1.0; n];
        for x in v.iter_mut().skip(n - r) {
            *x = 1.0 - 1.0 / n as f64;
        }
        Ok(MajorizationTarget { alpha: v })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.alpha
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    pub fn first(&self) -> f64 {
        self.alpha[0]
    }

    pub fn sum(&self) -> f64 {
        self.alpha.iter().sum()
    }
}

/// Result of a KL projection onto P_α.
#[derive(Clone, Debug)]
pub struct KlProjection {
    /// projected point, in the caller's index order
    pub p: Vec<f64>,
    /// dual log-scalers, nonincreasing along q sorted nonincreasing
    pub dual_x: Vec<f64>,
    /// D(P_α ‖ q) ≥ 0; +∞ when q is astronomically infeasible
    pub divergence: f64,
    /// order[j] = caller index of the j-th largest q entry
    pub order: Vec<usize>,
}

/// D(p‖q) = Σ pᵢ log(pᵢ/qᵢ) − pᵢ + qᵢ, with 0·log 0 = 0.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Dimension("kl_divergence: length mismatch".into()));
    }
    let mut d = 0.0;
    for (i, (&pi, &qi)) in p.iter().zip(q).enumerate() {
        if pi < 0.0 || qi < 0.0 {
            return Err(Error::Invalid("kl_divergence: negative entry".into()));
        }
        if pi == 0.0 {
            d += qi;
        } else {
            if qi == 0.0 {
                return Err(Error::Support(i));
            }
            d += pi * (pi / qi).ln() - pi + qi;
        }
    }
    Ok(d.max(0.0))
}

/// KL projection of q ≥ 0 onto P_α.
pub fn kl_project(q: &[f64], target: &MajorizationTarget) -> Result<KlProjection> {
    let log_q: Vec<f64> = q
        .iter()
        .map(|&v| {
            if v < 0.0 {
                f64::NAN
            } else if v == 0.0 {
                f64::NEG_INFINITY
            } else {
                v.ln()
            }
        })
        .collect();
    if log_q.iter().any(|v| v.is_nan()) {
        return Err(Error::Invalid("kl_project: q must be nonnegative".into()));
    }
    kl_project_log(&log_q, target)
}

/// KL projection with q given as logarithms (−∞ encodes a zero entry).
pub fn kl_project_log(log_q: &[f64], target: &MajorizationTarget) -> Result<KlProjection> {
    let n = log_q.len();
    if n != target.len() {
        return Err(Error::Dimension("kl_project: q and α lengths differ".into()));
    }
    let alpha = target.as_slice();
    // sort q nonincreasing, stable, remember the permutation
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| log_q[b].partial_cmp(&log_q[a]).unwrap_or(std::cmp::Ordering::Equal));
    let sorted_lq: Vec<f64> = order.iter().map(|&i| log_q[i]).collect();

    // PAV on the dual: block value t = log(Σ_B q / Σ_B α), merged to keep
    // values strictly decreasing, then clamped at zero.
    struct Block {
        end: usize,     // exclusive
        log_qsum: f64,  // log Σ q over block
        asum: f64,      // Σ α over block
        value: f64,
    }
    let block_value = |log_qsum: f64, asum: f64| -> f64 {
        if asum <= 0.0 {
            if log_qsum == f64::NEG_INFINITY {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            }
        } else {
            log_qsum - asum.ln()
        }
    };
    let mut blocks: Vec<Block> = Vec::with_capacity(n);
    for j in 0..n {
        let mut lqs = sorted_lq[j];
        let mut asum = alpha[j];
        let mut val = block_value(lqs, asum);
        while let Some(prev) = blocks.last() {
            if prev.value <= val {
                lqs = log_add(prev.log_qsum, lqs);
                asum += prev.asum;
                val = block_value(lqs, asum);
                blocks.pop();
            } else {
                break;
            }
        }
        blocks.push(Block { end: j + 1, log_qsum: lqs, asum, value: val });
    }

    let mut dual_sorted = vec![0.0f64; n];
    let mut start = 0usize;
    for b in &blocks {
        let t = b.value.max(0.0);
        for x in dual_sorted.iter_mut().take(b.end).skip(start) {
            *x = t;
        }
        start = b.end;
    }

    let mut p = vec![0.0f64; n];
    let mut divergence = 0.0f64;
    for (j, &i) in order.iter().enumerate() {
        let x = dual_sorted[j];
        let lq = sorted_lq[j];
        if x == 0.0 {
            // p = q exactly; the divergence term vanishes
            p[i] = if lq == f64::NEG_INFINITY { 0.0 } else { lq.exp() };
            continue;
        }
        let pi = if x.is_infinite() || lq == f64::NEG_INFINITY { 0.0 } else { (lq - x).exp() };
        p[i] = pi;
        let qi = if lq > 700.0 { f64::INFINITY } else { lq.exp() };
        divergence += qi - pi - pi * if x.is_infinite() { 0.0 } else { x };
    }
    Ok(KlProjection { p, dual_x: dual_sorted, divergence: divergence.max(0.0), order })
}

fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// Check p ∈ P_α up to a relative prefix-sum slack.
pub fn in_permutahedron(p: &[f64], target: &MajorizationTarget, rel_tol: f64) -> bool {
    let mut sp: Vec<f64> = p.to_vec();
    sp.sort_by(|a, b| b.partial_cmp(a).unwrap());
    let mut pp = 0.0;
    let mut pa = 0.0;
    for (v, a) in sp.iter().zip(target.as_slice()) {
        pp += v;
        pa += a;
        if pp > pa + rel_tol * pa.abs().max(1.0) {
            return false;
        }
    }
    true
}

/// Generalized KL distance from ν to the half-space `{x : wᵀx ≥ k}`.
///
/// Returns `(z, divergence)` where z ≥ 0 minimizes Σ e^{wᵢz}νᵢ − kz and
/// divergence = Σνᵢ − min-value.
pub fn halfspace_project(nu: &[f64], w: &[f64], k: f64) -> Result<(f64, f64)> {
    if nu.len() != w.len() {
        return Err(Error::Dimension("halfspace_project: length mismatch".into()));
    }
    if nu.iter().any(|&v| v < 0.0) || w.iter().any(|&v| v < 0.0) {
        return Err(Error::Invalid("halfspace_project: inputs must be nonnegative".into()));
    }
    let deriv = |z: f64| -> f64 {
        let mut s = 0.0;
        for (&ni, &wi) in nu.iter().zip(w) {
            if wi > 0.0 && ni > 0.0 {
                s += wi * (wi * z).exp() * ni;
            }
        }
        s - k
    };
    if deriv(0.0) >= 0.0 {
        return Ok((0.0, 0.0));
    }
    // derivative is increasing; bracket then bisect
    let mut hi = 1.0f64;
    let mut iters = 0;
    while deriv(hi) < 0.0 {
        hi *= 2.0;
        iters += 1;
        if iters > 200 {
            return Err(Error::Solver(
                "halfspace_project: objective unbounded below (no positive-weight mass)".into(),
            ));
        }
    }
    let mut lo = hi / 2.0;
    if deriv(lo) > 0.0 {
        lo = 0.0;
    }
    while hi - lo > 1e-12 {
        let mid = 0.5 * (lo + hi);
        if deriv(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let z = 0.5 * (lo + hi);
    let value: f64 = nu.iter().zip(w).map(|(&ni, &wi)| (wi * z).exp() * ni).sum::<f64>() - k * z;
    let total: f64 = nu.iter().sum();
    Ok((z, (total - value).max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    const LN2: f64 = std::f64::consts::LN_2;

    #[test]
    fn divergence_examples() {
        assert_eq!(kl_divergence(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        let d = kl_divergence(&[1.0, 0.5], &[2.0, 0.5]).unwrap();
        assert!((d - (1.0 - LN2)).abs() < 1e-14);
        // 0·log 0 = 0 convention
        let d = kl_divergence(&[0.0, 1.0], &[1.0, 1.0]).unwrap();
        assert!((d - 1.0).abs() < 1e-14);
        assert!(matches!(kl_divergence(&[1.0], &[0.0]), Err(crate::Error::Support(0))));
    }

    #[test]
    fn project_already_feasible() {
        let t = MajorizationTarget::new(vec![1.0, 0.5]).unwrap();
        let r = kl_project(&[0.9, 0.3], &t).unwrap();
        assert_eq!(r.p, vec![0.9, 0.3]);
        assert_eq!(r.dual_x, vec![0.0, 0.0]);
        assert_eq!(r.divergence, 0.0);
    }

    #[test]
    fn project_simple_scale_down() {
        // q = (2, 0.5), α = 1₂ → p = (1, 0.5), D = 1 − log 2
        let t = MajorizationTarget::ones(2);
        let r = kl_project(&[2.0, 0.5], &t).unwrap();
        assert!((r.p[0] - 1.0).abs() < 1e-12);
        assert!((r.p[1] - 0.5).abs() < 1e-12);
        assert!((r.divergence - (1.0 - LN2)).abs() < 1e-12);
    }

    #[test]
    fn project_merged_block() {
        // q = (4,4), α = 1₂ → p = (1,1), dual (log4, log4), D = 6 − 4log2.
        // Oracle: brute-force minimization of D over the 2-d feasible set
        // {p₁ ≤ 1, p₁+p₂ ≤ 2, p sorted desc} confirms the frozen value.
        let mut best = f64::INFINITY;
        let q = [4.0, 4.0];
        let steps = 400;
        for i in 0..=steps {
            for j in 0..=steps {
                let p1 = i as f64 / steps as f64;
                let p2 = j as f64 / steps as f64;
                if p1 + p2 <= 2.0 + 1e-12 {
                    let d = kl_divergence(&[p1.max(p2), p1.min(p2)], &q).unwrap();
                    best = best.min(d);
                }
            }
        }
        let frozen = 6.0 - 4.0 * LN2;
        assert!((best - frozen).abs() < 1e-4, "oracle {best} vs frozen {frozen}");

        let t = MajorizationTarget::ones(2);
        let r = kl_project(&q, &t).unwrap();
        assert!((r.p[0] - 1.0).abs() < 1e-12);
        assert!((r.p[1] - 1.0).abs() < 1e-12);
        assert!((r.dual_x[0] - 4.0f64.ln()).abs() < 1e-12);
        assert!((r.dual_x[1] - 4.0f64.ln()).abs() < 1e-12);
        assert!((r.divergence - frozen).abs() < 1e-12);
    }

    #[test]
    fn project_strong_duality() {
        let t = MajorizationTarget::new(vec![1.0, 1.0, 0.8, 0.2]).unwrap();
        let q = [3.0, 0.9, 0.85, 0.6];
        let r = kl_project(&q, &t).unwrap();
        // dual objective Σ qᵢe^{-xᵢ} + αᵢxᵢ must equal Σqᵢ − D
        let mut sq: Vec<f64> = q.to_vec();
        sq.sort_by(|a, b| b.partial_cmp(a).unwrap());
        let dual: f64 = sq
            .iter()
            .zip(r.dual_x.iter())
            .zip(t.as_slice())
            .map(|((&qi, &xi), &ai)| qi * (-xi).exp() + ai * xi)
            .sum();
        let total: f64 = q.iter().sum();
        assert!((dual - (total - r.divergence)).abs() < 1e-9);
        assert!(in_permutahedron(&r.p, &t, 1e-12));
        // dual is nonincreasing and nonnegative
        for w in r.dual_x.windows(2) {
            assert!(w[0] >= w[1] - 1e-15);
        }
        assert!(r.dual_x.iter().all(|&x| x >= 0.0));
    }

    #[test]
    fn project_log_input_deep_scale() {
        // entries around e^{-2000} and e^{+2000}: must not overflow
        let t = MajorizationTarget::ones(2);
        let r = kl_project_log(&[2000.0, -2000.0], &t).unwrap();
        assert!((r.dual_x[0] - 2000.0).abs() < 1e-9);
        assert_eq!(r.dual_x[1], 0.0);
        assert!((r.p[0] - 1.0).abs() < 1e-9);
        assert_eq!(r.divergence, f64::INFINITY);
    }

    #[test]
    fn project_monotone_order() {
        let t = MajorizationTarget::new(vec![1.0, 0.9, 0.3]).unwrap();
        let q = [2.5, 1.1, 0.2];
        let r = kl_project(&q, &t).unwrap();
        for w in r.p.windows(2) {
            assert!(w[0] >= w[1] - 1e-12, "projection must stay nonincreasing");
        }
    }

    #[test]
    fn rescaling_lemma_holds() {
        // whenever D ≤ α₁ε²/2, e^{-ε}q ⪯ α
        let t = MajorizationTarget::new(vec![1.0, 1.0, 0.5]).unwrap();
        let qs = [
            vec![1.01, 0.99, 0.49],
            vec![1.05, 0.9, 0.5],
            vec![0.7, 0.69, 0.3],
            vec![1.2, 0.4, 0.4],
        ];
        for q in &qs {
            let r = kl_project(q, &t).unwrap();
            let eps = (2.0 * r.divergence / t.first()).sqrt().max(1e-9);
            let scaled: Vec<f64> = q.iter().map(|&v| v * (-eps).exp()).collect();
            assert!(
                in_permutahedron(&scaled, &t, 1e-9),
                "rescaling lemma violated for q={q:?}, eps={eps}"
            );
        }
    }

    #[test]
    fn halfspace_examples() {
        // wᵀν ≥ k already
        let (z, d) = halfspace_project(&[3.0], &[1.0], 2.0).unwrap();
        assert_eq!((z, d), (0.0, 0.0));
        // ν=(1), w=(1), k=2 → z = log 2, divergence 2log2 − 1
        let (z, d) = halfspace_project(&[1.0], &[1.0], 2.0).unwrap();
        assert!((z - LN2).abs() < 1e-10);
        assert!((d - (2.0 * LN2 - 1.0)).abs() < 1e-10);
        // ν=(1,1), w=(1,0), k=2: zero-weight coordinate is inert
        let (z, d) = halfspace_project(&[1.0, 1.0], &[1.0, 0.0], 2.0).unwrap();
        assert!((z - LN2).abs() < 1e-10);
        assert!((d - (2.0 * LN2 - 1.0)).abs() < 1e-10);
        // all relevant weights zero → unbounded below
        assert!(halfspace_project(&[1.0], &[0.0], 2.0).is_err());
    }

    #[test]
    fn halfspace_matches_grid_oracle() {
        let nu = [0.4, 1.3, 0.2];
        let w = [2.0, 1.0, 0.0];
        let k = 4.0;
        // dense-grid oracle for the 1-d convex minimization
        let g = |z: f64| nu.iter().zip(&w).map(|(&n, &wi)| (wi * z).exp() * n).sum::<f64>() - k * z;
        let mut best = (0.0, g(0.0));
        let mut z = 0.0;
        while z < 10.0 {
            if g(z) < best.1 {
                best = (z, g(z));
            }
            z += 1e-4;
        }
        let (zs, ds) = halfspace_project(&nu, &w, k).unwrap();
        assert!((zs - best.0).abs() < 1e-3);
        let total: f64 = nu.iter().sum();
        assert!((ds - (total - best.1)).abs() < 1e-6);
    }
}
