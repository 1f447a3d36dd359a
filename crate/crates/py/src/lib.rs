//! Python bindings: matrix spaces with noncommutative rank and exact
//! shrunk subspaces, the majorized scaling decision, the KL projection
//! inner solver, Hall blockers, and the line-set applications.
//!
//! Exact subspace bases cross the boundary as strings "p/q" or
//! "p/q±(r/s)i" per coordinate, matching the CLI envelope format.

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use majscale::blapps::{
    dominant_two_cover, frac_matroid_matching, mem_eps_bl, membership_exact, weighted_opt,
    LineSet, MembershipOutcome,
};
use majscale::exactla::{gr_from_i64, gr_to_string, ExactMat, GaussRat};
use majscale::matscale::{smallest_hall_blocker, MatScaleSettings, NonnegMatrix};
use majscale::opscale::{
    check_eps_independent, decision_outcome_exact, maj_sinkhorn, approx_indep, Decision, MajSpec,
    OpScaleSettings, ScaleOutcome,
};
use majscale::permproj::{kl_project as kl_project_rs, halfspace_project as halfspace_rs, MajorizationTarget};
use majscale::shrunk::{randomized_shrunk, round_subspaces, RoundOptions};

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn basis_strings(basis: &[Vec<GaussRat>]) -> Vec<Vec<String>> {
    basis.iter().map(|v| v.iter().map(gr_to_string).collect()).collect()
}

/// A matrix space given by Gaussian-integer generators.
#[pyclass]
struct MatrixSpace {
    kraus: Vec<ExactMat>,
    m: usize,
    n: usize,
}

#[pymethods]
impl MatrixSpace {
    /// kraus: list of m×n matrices with integer (re, im) entries.
    #[new]
    fn new(kraus: Vec<Vec<Vec<(i64, i64)>>>) -> PyResult<Self> {
        if kraus.is_empty() {
            return Err(PyValueError::new_err("need at least one generator"));
        }
        let m = kraus[0].len();
        let n = kraus[0].first().map(|r| r.len()).unwrap_or(0);
        if m == 0 || n == 0 {
            return Err(PyValueError::new_err("generators must be nonempty"));
        }
        let mut mats = Vec::with_capacity(kraus.len());
        for a in &kraus {
            if a.len() != m || a.iter().any(|row| row.len() != n) {
                return Err(PyValueError::new_err("generators must share a shape"));
            }
            let mut mat = ExactMat::zeros(m, n);
            for (i, row) in a.iter().enumerate() {
                for (j, &(re, im)) in row.iter().enumerate() {
                    *mat.at_mut(i, j) = gr_from_i64(re, im);
                }
            }
            mats.push(mat);
        }
        Ok(MatrixSpace { kraus: mats, m, n })
    }

    #[getter]
    fn shape(&self) -> (usize, usize) {
        (self.m, self.n)
    }

    /// Noncommutative rank via the scaling decision with exact certificates.
    fn ncrank(&self) -> PyResult<usize> {
        majscale::opscale::ncrank_exact(&self.kraus, &OpScaleSettings::default()).map_err(err)
    }

    /// Decide finiteness of the (k, r) capacity: True iff bounded.
    #[pyo3(signature = (k, r = 0))]
    fn decide(&self, k: usize, r: usize) -> PyResult<bool> {
        let (d, _) =
            decision_outcome_exact(&self.kraus, k, r, &OpScaleSettings::default()).map_err(err)?;
        Ok(d == Decision::Bounded)
    }

    /// The exact dominant independent set (L*, R*); bases as rational
    /// strings. Returns (ncrank, r_star, l_basis, r_basis, method).
    #[pyo3(signature = (seed = 0, denom_bound = 1_000_000))]
    fn shrunk_subspace(
        &self,
        seed: u64,
        denom_bound: u64,
    ) -> PyResult<(usize, usize, Vec<Vec<String>>, Vec<Vec<String>>, String)> {
        let opts = RoundOptions { seed, denom_bound, ..Default::default() };
        let out = round_subspaces(&self.kraus, &opts).map_err(err)?;
        Ok((
            out.k_star,
            out.r_star,
            basis_strings(&out.l_basis),
            basis_strings(&out.r_basis),
            out.method.to_string(),
        ))
    }

    /// Randomized Wong-sequence route; returns (ncrank, defect, u_basis).
    #[pyo3(signature = (seed = 0, trials = 64))]
    fn shrunk_subspace_wong(
        &self,
        seed: u64,
        trials: usize,
    ) -> PyResult<(usize, usize, Vec<Vec<String>>)> {
        if self.m != self.n {
            return Err(PyValueError::new_err("the Wong route expects square generators"));
        }
        let res = randomized_shrunk(&self.kraus, seed, trials).map_err(err)?;
        Ok((res.ncrank, res.c, basis_strings(&res.u_basis)))
    }

    /// Run the majorized Sinkhorn at size target k with all-ones targets.
    /// Returns (scaled, size, iterations).
    #[pyo3(signature = (k, eps = 0.1))]
    fn scale(&self, k: f64, eps: f64) -> PyResult<(bool, f64, usize)> {
        let map = majscale::numla::CpMap::from_exact(&self.kraus).map_err(err)?;
        let spec = MajSpec::new(
            MajorizationTarget::ones(self.n),
            MajorizationTarget::ones(self.m),
            k,
            0,
        )
        .map_err(err)?;
        match maj_sinkhorn(&map, &spec, eps, &OpScaleSettings::default()).map_err(err)? {
            ScaleOutcome::Scaled { iterate, iterations, eps, log_divisor, .. } => {
                let norm = map.scaled((-log_divisor / 2.0).exp());
                let (mu, _) = majscale::opscale::scaled_marginals(&norm, &iterate, &spec, eps)
                    .map_err(err)?;
                Ok((true, mu.iter().sum(), iterations))
            }
            ScaleOutcome::Diverged { iterations, .. } => Ok((false, 0.0, iterations)),
        }
    }

    /// Extract an ε-independent set violating (k, r):
    /// (defect, l_basis, r_basis) with float coordinate pairs.
    #[pyo3(signature = (k, r = 0, eps = 1e-8))]
    fn witness(
        &self,
        k: usize,
        r: usize,
        eps: f64,
    ) -> PyResult<(f64, Vec<Vec<(f64, f64)>>, Vec<Vec<(f64, f64)>>)> {
        let map = majscale::numla::CpMap::from_exact(&self.kraus).map_err(err)?;
        let w = approx_indep(&map, k, r, eps, &OpScaleSettings::default()).map_err(err)?;
        let cols = |m: &majscale::numla::CMat| -> Vec<Vec<(f64, f64)>> {
            (0..m.cols)
                .map(|j| (0..m.rows).map(|i| (m[(i, j)].re, m[(i, j)].im)).collect())
                .collect()
        };
        let defect = check_eps_independent(&map, &w.l_basis, &w.r_basis).map_err(err)?;
        Ok((defect, cols(&w.l_basis), cols(&w.r_basis)))
    }
}

/// Generalized KL projection of q onto the down-closure of the
/// permutahedron of alpha: (p, dual, divergence).
#[pyfunction]
fn kl_project(q: Vec<f64>, alpha: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>, f64)> {
    let target = MajorizationTarget::new(alpha).map_err(err)?;
    let proj = kl_project_rs(&q, &target).map_err(err)?;
    Ok((proj.p, proj.dual_x, proj.divergence))
}

/// Generalized KL distance from nu to the half-space {x : wᵀx ≥ k}:
/// (z, divergence).
#[pyfunction]
fn halfspace_project(nu: Vec<f64>, w: Vec<f64>, k: f64) -> PyResult<(f64, f64)> {
    halfspace_rs(&nu, &w, k).map_err(err)
}

/// Smallest Hall blocker of a nonnegative matrix via the perturbed
/// scaling pipeline: (columns, defect).
#[pyfunction]
fn hall_blocker(matrix: Vec<Vec<f64>>) -> PyResult<(Vec<usize>, i64)> {
    let a = NonnegMatrix::new(matrix).map_err(err)?;
    let b = smallest_hall_blocker(&a, &MatScaleSettings::default()).map_err(err)?;
    Ok((b.s, b.defect))
}

fn lines_of(n: usize, lines: Vec<(Vec<i64>, Vec<i64>)>) -> PyResult<LineSet> {
    LineSet::from_integer_pairs(n, &lines).map_err(err)
}

/// (1−ε)-maximum fractional linear matroid matching of rank-2 lines:
/// (x, value, k).
#[pyfunction]
#[pyo3(signature = (n, lines, eps = 0.1))]
fn matroid_matching(
    n: usize,
    lines: Vec<(Vec<i64>, Vec<i64>)>,
    eps: f64,
) -> PyResult<(Vec<f64>, f64, usize)> {
    let ls = lines_of(n, lines)?;
    let m = frac_matroid_matching(&ls, eps, &OpScaleSettings::default(), true).map_err(err)?;
    Ok((m.x, m.value, m.k))
}

/// Exact dominant 2-cover: (k_star, s_basis, t_basis).
#[pyfunction]
fn two_cover(
    n: usize,
    lines: Vec<(Vec<i64>, Vec<i64>)>,
) -> PyResult<(usize, Vec<Vec<String>>, Vec<Vec<String>>)> {
    let ls = lines_of(n, lines)?;
    let c = dominant_two_cover(&ls, &RoundOptions::default()).map_err(err)?;
    Ok((c.k_star, basis_strings(&c.s_basis), basis_strings(&c.t_basis)))
}

/// Maximum of an integer-weighted functional over P(B) (exact and
/// half-integral for rank-≤2 lines).
#[pyfunction]
fn weighted_optimum(n: usize, lines: Vec<(Vec<i64>, Vec<i64>)>, w: Vec<u64>) -> PyResult<f64> {
    let ls = lines_of(n, lines)?;
    weighted_opt(&ls, &w, &OpScaleSettings::default()).map_err(err)
}

/// ε-membership of a point in rank-≤2 P(B): (near, y or None).
#[pyfunction]
#[pyo3(signature = (n, lines, point, eps = 0.05))]
fn bl_membership(
    n: usize,
    lines: Vec<(Vec<i64>, Vec<i64>)>,
    point: Vec<f64>,
    eps: f64,
) -> PyResult<(bool, Option<Vec<f64>>)> {
    let ls = lines_of(n, lines)?;
    match mem_eps_bl(&ls, &point, eps, None, &OpScaleSettings::default()).map_err(err)? {
        MembershipOutcome::Near { y, .. } => Ok((true, Some(y))),
        MembershipOutcome::Far { .. } => Ok((false, None)),
    }
}

/// Exact membership of the half-integral point c/d in P(B).
#[pyfunction]
#[pyo3(signature = (n, lines, c, d, seed = 0))]
fn membership_exact_rational(
    n: usize,
    lines: Vec<(Vec<i64>, Vec<i64>)>,
    c: Vec<u64>,
    d: u64,
    seed: u64,
) -> PyResult<bool> {
    let ls = lines_of(n, lines)?;
    membership_exact(&ls, &c, d, seed).map_err(err)
}

#[pymodule]
fn majscale_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<MatrixSpace>()?;
    m.add_function(wrap_pyfunction!(kl_project, m)?)?;
    m.add_function(wrap_pyfunction!(halfspace_project, m)?)?;
    m.add_function(wrap_pyfunction!(hall_blocker, m)?)?;
    m.add_function(wrap_pyfunction!(matroid_matching, m)?)?;
    m.add_function(wrap_pyfunction!(two_cover, m)?)?;
    m.add_function(wrap_pyfunction!(weighted_optimum, m)?)?;
    m.add_function(wrap_pyfunction!(bl_membership, m)?)?;
    m.add_function(wrap_pyfunction!(membership_exact_rational, m)?)?;
    Ok(())
}
