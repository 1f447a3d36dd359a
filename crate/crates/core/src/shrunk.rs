//! Exact smallest shrunk subspaces.
//!
//! Two routes to the same object: (1) the deterministic rounding pipeline
//! (binary-search k* and r* with the scaling decision, extract an
//! approximate independent set, round the projector entrywise by continued
//! fractions, verify exactly), and (2) the randomized Wong-sequence
//! algorithm on blow-up spaces, which certifies its own output through an
//! exact rank sandwich. Route (1) falls back to route (2) whenever exact
//! verification fails.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub use crate::exactla::continued_fraction_round;

use crate::exactla::{
    complement_basis, gr_from_rational, gr_is_zero, gr_zero, image_basis, kernel_basis,
    max_independent_columns, pseudoinverse, rank, space_image, span_dim, ExactMat, GaussRat,
};
use crate::numla::{CMat, CpMap};
use crate::opscale::{approx_indep, ncrank_exact, r_star_exact, OpScaleSettings};
use crate::{Error, Result};

/// The Wong chain W₀ ⊆ W₁ ⊆ … with its limit and the peak bit length seen
/// while computing it.
#[derive(Clone, Debug)]
pub struct WongSequence {
    pub basis_chain: Vec<Vec<Vec<GaussRat>>>,
    pub limit: Vec<Vec<GaussRat>>,
    pub peak_bits: u64,
}

/// Smallest c-shrunk subspace with its exact certificates.
#[derive(Clone, Debug)]
pub struct ShrunkResult {
    /// basis of the subspace U ⊆ ℂⁿ
    pub u_basis: Vec<Vec<GaussRat>>,
    /// defect dim U − dim 𝒜(U)
    pub c: usize,
    pub ncrank: usize,
    /// basis of 𝒜(U)
    pub image_basis: Vec<Vec<GaussRat>>,
    pub peak_bits: u64,
}

/// Scale a rational vector to Gaussian-integer entries.
fn clear_vector(v: &[GaussRat]) -> Vec<GaussRat> {
    let mut l = BigInt::one();
    for e in v {
        l = lcm(&l, e.re.denom());
        l = lcm(&l, e.im.denom());
    }
    let c = gr_from_rational(BigRational::from_integer(l), BigRational::zero());
    v.iter().map(|e| e.clone() * c.clone()).collect()
}

fn lcm(a: &BigInt, b: &BigInt) -> BigInt {
    if a.is_zero() || b.is_zero() {
        return BigInt::one();
    }
    let mut x = a.abs();
    let mut y = b.abs();
    while !y.is_zero() {
        let r = &x % &y;
        x = y;
        y = r;
    }
    (a / &x * b).abs()
}

fn vec_bits(v: &[GaussRat]) -> u64 {
    v.iter().map(crate::exactla::gr_bits).max().unwrap_or(0)
}

/// Wong sequence limit via Wᵢ = (𝒜A⁺)ⁱ ker(AA⁺) with the pseudoinverse
/// scaled to Gaussian integers, keeping every basis vector in product form.
pub fn wong_limit(a: &ExactMat, generators: &[ExactMat]) -> Result<WongSequence> {
    if a.rows != a.cols {
        return Err(Error::Dimension("wong_limit expects a square pivot matrix".into()));
    }
    let dim = a.rows;
    let ap = pseudoinverse(a).cleared_to_integers();
    let mut peak = ap.max_bits().max(a.max_bits());
    let aap = a.mul(&ap);
    let kernel: Vec<Vec<GaussRat>> = kernel_basis(&aap).iter().map(|v| clear_vector(v)).collect();
    for v in &kernel {
        peak = peak.max(vec_bits(v));
    }

    let mut basis: Vec<Vec<GaussRat>> = Vec::new();
    let mut chain: Vec<Vec<Vec<GaussRat>>> = vec![Vec::new()]; // W₀ = {0}
    let mut frontier: Vec<Vec<GaussRat>> = kernel;
    for _level in 0..=dim {
        if frontier.is_empty() {
            break;
        }
        let mut new_frontier = Vec::new();
        for w in &frontier {
            let apw = ap.mul_vec(w);
            for g in generators {
                let img = g.mul_vec(&apw);
                peak = peak.max(vec_bits(&img));
                if img.iter().all(gr_is_zero) {
                    continue;
                }
                if !crate::exactla::in_span(&basis, &img) {
                    basis.push(img.clone());
                    new_frontier.push(img);
                }
            }
        }
        chain.push(basis.clone());
        frontier = new_frontier;
        if basis.len() == dim {
            break;
        }
    }
    if chain.len() == 1 {
        chain.push(Vec::new()); // stabilized at {0}
    }
    Ok(WongSequence { basis_chain: chain, limit: basis, peak_bits: peak })
}

/// Generators of the d-th blow-up space: Aᵢ ⊗ E_jk.
pub fn blow_up(generators: &[ExactMat], d: usize) -> Vec<ExactMat> {
    let mut out = Vec::with_capacity(generators.len() * d * d);
    for a in generators {
        for j in 0..d {
            for k in 0..d {
                let mut e = ExactMat::zeros(d, d);
                *e.at_mut(j, k) = crate::exactla::gr_one();
                out.push(a.kron(&e));
            }
        }
    }
    out
}

/// Exact defect dim U − dim 𝒜(U) of a subspace given by basis columns
/// (negative when the space expands the subspace).
pub fn exact_defect(generators: &[ExactMat], u_basis: &[Vec<GaussRat>]) -> (i64, Vec<Vec<GaussRat>>) {
    let du = span_dim(u_basis);
    let img = space_image(generators, u_basis);
    (du as i64 - img.len() as i64, img)
}

/// One randomized trial: draw A ∈ 𝒜^{{d}} with entries from {0,…,2dk−1},
/// run the Wong sequence, extract U₀ and certify via the rank sandwich.
/// Returns `None` when the certificate fails (bad draw or d too small).
pub fn randomized_shrunk_trial(
    generators: &[ExactMat],
    d: usize,
    k: usize,
    seed: u64,
) -> Result<Option<ShrunkResult>> {
    let n = generators.first().map(|g| g.cols).unwrap_or(0);
    if generators.iter().any(|g| g.rows != n || g.cols != n) {
        return Err(Error::Dimension("randomized_shrunk expects square generators".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let range = (2 * d * k).max(2) as i64;
    // A = Σ Aᵢ ⊗ Xᵢ with random integer Xᵢ
    let mut a = ExactMat::zeros(n * d, n * d);
    for g in generators {
        let mut x = ExactMat::zeros(d, d);
        for j in 0..d {
            for l in 0..d {
                *x.at_mut(j, l) = crate::exactla::gr_from_i64(rng.gen_range(0..range), 0);
            }
        }
        a = a.add(&g.kron(&x));
    }
    let blown = blow_up(generators, d);
    let rk = rank(&a);
    let wong = wong_limit(&a, &blown)?;
    let mut peak = wong.peak_bits;

    // U* = A⁻¹W_∞ = ker(N† A) for N spanning W_∞^⊥
    let comp = complement_basis(n * d, &wong.limit);
    let nmat = ExactMat::from_columns(n * d, &comp);
    let na = nmat.adjoint().mul(&a);
    peak = peak.max(na.max_bits());
    let ustar = kernel_basis(&na);

    // U₀ = {u : u ⊗ eᵢ ∈ U* for all i}
    let ustar_comp = complement_basis(n * d, &ustar);
    let mut constraints = ExactMat::zeros(ustar_comp.len() * d, n);
    for (row, nu) in ustar_comp.iter().enumerate() {
        for i in 0..d {
            for acoord in 0..n {
                *constraints.at_mut(row * d + i, acoord) =
                    crate::exactla::gr_conj(&nu[acoord * d + i]);
            }
        }
    }
    let u0 = if constraints.rows == 0 {
        (0..n)
            .map(|i| {
                let mut e = vec![gr_zero(); n];
                e[i] = crate::exactla::gr_one();
                e
            })
            .collect()
    } else {
        kernel_basis(&constraints)
    };
    peak = peak.max(constraints.max_bits());

    let (c0, img) = exact_defect(generators, &u0);
    // certificate: rk(A) = d·(n − c₀) pins ncrank = n − c₀ and minimality
    if c0 < 0 || rk != d * (n - c0 as usize) {
        return Ok(None);
    }
    let c0 = c0 as usize;
    Ok(Some(ShrunkResult { u_basis: u0, c: c0, ncrank: n - c0, image_basis: img, peak_bits: peak }))
}

/// Randomized smallest-shrunk-subspace with escalating blow-up size.
pub fn randomized_shrunk(
    generators: &[ExactMat],
    seed: u64,
    trials_per_level: usize,
) -> Result<ShrunkResult> {
    let n = generators.first().map(|g| g.cols).unwrap_or(0);
    if n == 0 {
        return Err(Error::Invalid("empty generator list".into()));
    }
    if generators.iter().all(|g| g.is_zero()) {
        // zero space: every subspace shrinks to {0}; the smallest n-shrunk is ℂⁿ
        let u: Vec<Vec<GaussRat>> = (0..n)
            .map(|i| {
                let mut e = vec![gr_zero(); n];
                e[i] = crate::exactla::gr_one();
                e
            })
            .collect();
        return Ok(ShrunkResult { u_basis: u, c: n, ncrank: 0, image_basis: vec![], peak_bits: 1 });
    }
    let k = n;
    let dmax = (n - 1).max(1);
    for d in 1..=dmax {
        for t in 0..trials_per_level {
            let s = seed
                .wrapping_add(0x9E37_79B9_7F4A_7C15u64.wrapping_mul((d * trials_per_level + t) as u64));
            if let Some(res) = randomized_shrunk_trial(generators, d, k, s)? {
                return Ok(res);
            }
        }
    }
    Err(Error::Solver("randomized_shrunk: certificate failed at every blow-up level".into()))
}

/// Options for [`round_subspaces`].
#[derive(Clone, Debug)]
pub struct RoundOptions {
    pub denom_bound: u64,
    /// override for the witness accuracy; by default 1/(4·bound²·16),
    /// floored at what hardware doubles can certify
    pub eps_override: Option<f64>,
    pub seed: u64,
    pub trials: usize,
    pub settings: OpScaleSettings,
}

impl Default for RoundOptions {
    fn default() -> Self {
        RoundOptions {
            denom_bound: 1_000_000,
            eps_override: None,
            seed: 0,
            trials: 64,
            settings: OpScaleSettings::default(),
        }
    }
}

/// The exact dominant independent set (L*, R*).
#[derive(Clone, Debug)]
pub struct RoundSubspacesOutput {
    /// basis of L* ⊆ ℂᵐ (columns)
    pub l_basis: Vec<Vec<GaussRat>>,
    /// basis of R* ⊆ ℂⁿ, the smallest shrunk subspace
    pub r_basis: Vec<Vec<GaussRat>>,
    pub k_star: usize,
    pub r_star: usize,
    pub c: usize,
    /// "rounded" when the continued-fraction path verified, "wong" on fallback
    pub method: &'static str,
    pub peak_bits: u64,
}

fn coordinate_basis(n: usize) -> Vec<Vec<GaussRat>> {
    (0..n)
        .map(|i| {
            let mut e = vec![gr_zero(); n];
            e[i] = crate::exactla::gr_one();
            e
        })
        .collect()
}

/// Find the dominant independent set of the space spanned by exact
/// Gaussian-integer Kraus operators.
pub fn round_subspaces(exact_kraus: &[ExactMat], opts: &RoundOptions) -> Result<RoundSubspacesOutput> {
    if exact_kraus.is_empty() {
        return Err(Error::Invalid("round_subspaces: empty generator list".into()));
    }
    let m = exact_kraus[0].rows;
    let n = exact_kraus[0].cols;
    let map = CpMap::from_exact(exact_kraus)?;
    let k_star = ncrank_exact(exact_kraus, &opts.settings)?;
    let r_star = r_star_exact(exact_kraus, k_star, &opts.settings)?;
    let c = n - k_star;

    if r_star == 0 {
        // full noncommutative rank: the dominant pair is (ℂᵐ, {0})
        return Ok(RoundSubspacesOutput {
            l_basis: coordinate_basis(m),
            r_basis: vec![],
            k_star,
            r_star,
            c,
            method: "rounded",
            peak_bits: 1,
        });
    }
    if r_star == n {
        // the smallest shrunk subspace is ℂⁿ itself
        let r_basis = coordinate_basis(n);
        let img = space_image(exact_kraus, &r_basis);
        if img.len() != k_star {
            return fallback(exact_kraus, k_star, r_star, opts);
        }
        let l_basis = complement_basis(m, &img);
        let peak = r_basis.iter().chain(&l_basis).map(|v| vec_bits(v)).max().unwrap_or(0);
        return Ok(RoundSubspacesOutput {
            l_basis,
            r_basis,
            k_star,
            r_star,
            c,
            method: "rounded",
            peak_bits: peak,
        });
    }

    let eps = opts
        .eps_override
        .unwrap_or_else(|| {
            let b = opts.denom_bound as f64;
            (0.25 / (b * b * 16.0)).max(1e-11).min(1e-5)
        });
    let attempt = || -> Result<RoundSubspacesOutput> {
        let w = approx_indep(&map, k_star, r_star + 1, eps, &opts.settings)?;
        // π_R, rounded entrywise to denominators ≤ denom_bound
        let dim_r = w.r_basis.cols;
        let mut pr = CMat::zeros(n, n);
        for j in 0..dim_r {
            pr.rank1_update(&w.r_basis.column(j), 1.0);
        }
        let mut exact_pr = ExactMat::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = pr[(i, j)];
                let re = continued_fraction_round(v.re, opts.denom_bound)?;
                let im = if i == j {
                    BigRational::zero()
                } else {
                    continued_fraction_round(v.im, opts.denom_bound)?
                };
                *exact_pr.at_mut(i, j) = gr_from_rational(re.clone(), im.clone());
                if j != i {
                    *exact_pr.at_mut(j, i) = gr_from_rational(re, -im);
                }
            }
        }
        let r_basis: Vec<Vec<GaussRat>> = image_basis(&exact_pr);
        // exact verification: dim R' = r*, defect = c pins R' = R*
        if r_basis.len() != r_star {
            return Err(Error::Verification(format!(
                "rounded subspace has dimension {} instead of r* = {}",
                r_basis.len(),
                r_star
            )));
        }
        let (def, img) = exact_defect(exact_kraus, &r_basis);
        if def != c as i64 {
            return Err(Error::Verification(format!(
                "rounded subspace has defect {def} instead of {c}"
            )));
        }
        let l_basis = complement_basis(m, &img);
        let peak = r_basis.iter().chain(&l_basis).map(|v| vec_bits(v)).max().unwrap_or(0);
        Ok(RoundSubspacesOutput {
            l_basis,
            r_basis,
            k_star,
            r_star,
            c,
            method: "rounded",
            peak_bits: peak,
        })
    };
    match attempt() {
        Ok(out) => Ok(out),
        Err(_) => fallback(exact_kraus, k_star, r_star, opts),
    }
}

fn fallback(
    exact_kraus: &[ExactMat],
    k_star: usize,
    r_star: usize,
    opts: &RoundOptions,
) -> Result<RoundSubspacesOutput> {
    let m = exact_kraus[0].rows;
    let n = exact_kraus[0].cols;
    // the Wong route needs square generators; pad with zero rows/columns
    let dim = m.max(n);
    let padded: Vec<ExactMat> = exact_kraus
        .iter()
        .map(|g| {
            let mut p = ExactMat::zeros(dim, dim);
            for i in 0..m {
                for j in 0..n {
                    *p.at_mut(i, j) = g.at(i, j).clone();
                }
            }
            p
        })
        .collect();
    let res = randomized_shrunk(&padded, opts.seed, opts.trials)?;
    // un-pad: R* of the original space is U_pad ∩ ℂⁿ (padding columns are
    // annihilated, so they always join the padded shrunk subspace)
    let r_basis: Vec<Vec<GaussRat>> = if dim == n {
        res.u_basis.clone()
    } else {
        let b = ExactMat::from_columns(dim, &res.u_basis);
        let mut tail = ExactMat::zeros(dim - n, res.u_basis.len());
        for i in n..dim {
            for j in 0..res.u_basis.len() {
                *tail.at_mut(i - n, j) = b.at(i, j).clone();
            }
        }
        kernel_basis(&tail).iter().map(|x| b.mul_vec(x)[..n].to_vec()).collect()
    };
    let r_basis: Vec<Vec<GaussRat>> = {
        let picked = max_independent_columns(&r_basis);
        picked.into_iter().map(|i| r_basis[i].clone()).collect()
    };
    if r_basis.len() != r_star || res.ncrank != k_star {
        return Err(Error::Verification(format!(
            "randomized fallback disagrees with the scaling pipeline: ncrank {} vs {}, dim R {} vs {}",
            res.ncrank,
            k_star,
            r_basis.len(),
            r_star
        )));
    }
    let (def, img) = exact_defect(exact_kraus, &r_basis);
    if def != (n - k_star) as i64 {
        return Err(Error::Verification("fallback subspace defect mismatch".into()));
    }
    let l_basis = complement_basis(m, &img);
    let peak = res.peak_bits;
    Ok(RoundSubspacesOutput {
        l_basis,
        r_basis,
        k_star,
        r_star,
        c: n - k_star,
        method: "wong",
        peak_bits: peak,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactla::{gr_one, same_span};

    fn e(m: usize, n: usize, i: usize, j: usize) -> ExactMat {
        let mut a = ExactMat::zeros(m, n);
        *a.at_mut(i, j) = gr_one();
        a
    }

    #[test]
    fn wong_example_e11_e12() {
        // generators {E₁₁,E₁₂}, pivot A = E₁₁: W₁ = ⟨e₁⟩ = W_∞, U* = ℂ²
        let gens = vec![e(2, 2, 0, 0), e(2, 2, 0, 1)];
        let a = e(2, 2, 0, 0);
        let w = wong_limit(&a, &gens).unwrap();
        assert_eq!(w.limit.len(), 1);
        assert!(same_span(&w.limit, &[vec![gr_one(), gr_zero()]]));
        // chain is monotone
        for win in w.basis_chain.windows(2) {
            for v in &win[0] {
                assert!(crate::exactla::in_span(&win[1], v));
            }
        }
    }

    #[test]
    fn wong_identity_has_empty_limit() {
        let gens = vec![ExactMat::identity(2)];
        let w = wong_limit(&ExactMat::identity(2), &gens).unwrap();
        assert!(w.limit.is_empty());
    }

    #[test]
    fn randomized_examples() {
        // {I₂}: ncrank 2, U₀ = {0}
        let res = randomized_shrunk(&[ExactMat::identity(2)], 1, 16).unwrap();
        assert_eq!((res.ncrank, res.c), (2, 0));
        assert!(res.u_basis.is_empty());

        // {E₁₁,E₁₂}: ncrank 1, U₀ = ℂ²
        let gens = vec![e(2, 2, 0, 0), e(2, 2, 0, 1)];
        let res = randomized_shrunk(&gens, 7, 16).unwrap();
        assert_eq!((res.ncrank, res.c), (1, 1));
        assert_eq!(res.u_basis.len(), 2);

        // bipartite 3×3 blocker: U₀ = ⟨e₁,e₂⟩
        let gens = vec![e(3, 3, 0, 0), e(3, 3, 0, 1), e(3, 3, 1, 2), e(3, 3, 2, 2)];
        let res = randomized_shrunk(&gens, 3, 16).unwrap();
        assert_eq!((res.ncrank, res.c), (2, 1));
        let want = vec![
            vec![gr_one(), gr_zero(), gr_zero()],
            vec![gr_zero(), gr_one(), gr_zero()],
        ];
        assert!(same_span(&res.u_basis, &want));
    }

    #[test]
    fn randomized_success_rate() {
        // per-trial success ≥ 0.4 over seeded trials (guarantee: ≥ 1/2)
        let gens = vec![e(2, 2, 0, 0), e(2, 2, 0, 1)];
        let mut ok = 0;
        for seed in 0..100 {
            if randomized_shrunk_trial(&gens, 1, 1, seed).unwrap().is_some() {
                ok += 1;
            }
        }
        assert!(ok >= 40, "success rate {ok}/100");
    }

    #[test]
    fn cf_round_examples() {
        let half = continued_fraction_round(0.5, 10).unwrap();
        assert_eq!(half, BigRational::new(BigInt::from(1), BigInt::from(2)));
        let third = continued_fraction_round(0.3333333333, 10).unwrap();
        assert_eq!(third, BigRational::new(BigInt::from(1), BigInt::from(3)));
        let sev = continued_fraction_round(0.142857142, 100).unwrap();
        assert_eq!(sev, BigRational::new(BigInt::from(1), BigInt::from(7)));
        let neg = continued_fraction_round(-0.6666666667, 10).unwrap();
        assert_eq!(neg, BigRational::new(BigInt::from(-2), BigInt::from(3)));
        let z = continued_fraction_round(1e-9, 1000).unwrap();
        assert!(z.is_zero());
    }

    #[test]
    fn cf_round_is_best_approximation() {
        // brute-force oracle over all denominators ≤ bound
        let cases = [0.1415926, 0.718281828, 0.577215, 0.123456789];
        let bound = 40u64;
        for &x in &cases {
            let got = continued_fraction_round(x, bound).unwrap();
            let mut best: Option<BigRational> = None;
            let target = BigRational::from_float(x).unwrap();
            for q in 1..=bound {
                let p = (x * q as f64).round() as i64;
                let cand = BigRational::new(BigInt::from(p), BigInt::from(q));
                let better = match &best {
                    None => true,
                    Some(b) => (&cand - &target).abs() < (b - &target).abs(),
                };
                if better {
                    best = Some(cand);
                }
            }
            let best = best.unwrap();
            assert_eq!(
                (&got - &target).abs(),
                (&best - &target).abs(),
                "x={x}: got {got}, oracle {best}"
            );
        }
    }

    #[test]
    fn round_subspaces_identity() {
        // {I₂} → (ℂ², {0})
        let out = round_subspaces(&[ExactMat::identity(2)], &Default::default()).unwrap();
        assert_eq!((out.k_star, out.r_star), (2, 0));
        assert!(out.r_basis.is_empty());
        assert_eq!(out.l_basis.len(), 2);
    }

    #[test]
    fn round_subspaces_e11_e12() {
        // {E₁₁,E₁₂} → (⟨e₂⟩, ℂ²) via the r* = n fast path
        let gens = vec![e(2, 2, 0, 0), e(2, 2, 0, 1)];
        let out = round_subspaces(&gens, &Default::default()).unwrap();
        assert_eq!((out.k_star, out.r_star), (1, 2));
        assert_eq!(out.r_basis.len(), 2);
        assert!(same_span(&out.l_basis, &[vec![gr_zero(), gr_one()]]));
    }

    #[test]
    fn round_subspaces_blocker_and_agreement() {
        // bipartite 3×3 blocker: R* = ⟨e₁,e₂⟩, L* = ⟨e₂,e₃⟩
        let gens = vec![e(3, 3, 0, 0), e(3, 3, 0, 1), e(3, 3, 1, 2), e(3, 3, 2, 2)];
        let out = round_subspaces(&gens, &Default::default()).unwrap();
        assert_eq!((out.k_star, out.r_star), (2, 2));
        let want_r = vec![
            vec![gr_one(), gr_zero(), gr_zero()],
            vec![gr_zero(), gr_one(), gr_zero()],
        ];
        assert!(same_span(&out.r_basis, &want_r));
        let want_l = vec![
            vec![gr_zero(), gr_one(), gr_zero()],
            vec![gr_zero(), gr_zero(), gr_one()],
        ];
        assert!(same_span(&out.l_basis, &want_l));
        // randomized route agrees exactly
        let rr = randomized_shrunk(&gens, 11, 16).unwrap();
        assert!(same_span(&rr.u_basis, &out.r_basis));
    }

    #[test]
    fn round_subspaces_jordan_interior_rstar() {
        // single Jordan block J₂: k* = 1, smallest 1-shrunk subspace ⟨e₁⟩
        let mut j2 = ExactMat::zeros(2, 2);
        *j2.at_mut(0, 1) = gr_one();
        let out = round_subspaces(&[j2], &Default::default()).unwrap();
        assert_eq!((out.k_star, out.r_star), (1, 1));
        assert!(same_span(&out.r_basis, &[vec![gr_one(), gr_zero()]]));
    }

    #[test]
    fn minimality_against_coordinate_subspaces() {
        // no coordinate subspace smaller than R* reaches the maximum defect
        let cases: Vec<(Vec<ExactMat>, usize)> = vec![
            (vec![{ let mut j = ExactMat::zeros(2, 2); *j.at_mut(0, 1) = gr_one(); j }], 1),
            (vec![e(2, 2, 0, 0), e(2, 2, 0, 1)], 2),
            (vec![e(3, 3, 0, 0), e(3, 3, 0, 1), e(3, 3, 1, 2), e(3, 3, 2, 2)], 2),
        ];
        for (gens, want_dim) in cases {
            let n = gens[0].cols;
            let out = round_subspaces(&gens, &Default::default()).unwrap();
            assert_eq!(out.r_basis.len(), want_dim);
            let c = n - out.k_star;
            for mask in 0u32..(1 << n) {
                let cols: Vec<usize> = (0..n).filter(|&j| mask >> j & 1 == 1).collect();
                if cols.len() >= want_dim || cols.is_empty() {
                    continue;
                }
                let basis: Vec<Vec<GaussRat>> = cols
                    .iter()
                    .map(|&j| {
                        let mut v = vec![gr_zero(); n];
                        v[j] = gr_one();
                        v
                    })
                    .collect();
                let (defect, _) = exact_defect(&gens, &basis);
                assert!(defect < c as i64, "smaller {c}-shrunk subspace {cols:?} exists");
            }
        }
    }

    #[test]
    fn round_and_wong_agree_on_jordan3() {
        let mut j3 = ExactMat::zeros(3, 3);
        *j3.at_mut(0, 1) = gr_one();
        *j3.at_mut(1, 2) = gr_one();
        let out = round_subspaces(&[j3.clone()], &Default::default()).unwrap();
        let rr = randomized_shrunk(&[j3], 5, 16).unwrap();
        assert_eq!(out.k_star, rr.ncrank);
        assert!(same_span(&out.r_basis, &rr.u_basis));
    }
}
