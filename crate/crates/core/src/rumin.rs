//! The Rumin complex of the flat model.
//!
//! On the simply connected group with Lie algebra 𝔤, forms are trivialised by
//! the left-invariant coframe, so every operator is a matrix over U(𝔤). The
//! de Rham differential is `d = Σ_i ε(θ^i) X_i + ∂`, the Kostant
//! codifferential is `δ = ∂*`, and the splitting operator `L_q: H^q → Λ^q` is
//! found by solving `δL = 0`, `δdL = 0`, `πL = id` with the ansatz that the
//! θ^I-component of `L` has Heisenberg order `w(I) − p_q`. Then `D = π d L`.

use std::collections::HashMap;

use num_traits::Zero;

use crate::cohomology::{mask_weight, GradedInnerProduct, WeightedCohomology};
use crate::graded_lie::GradedLieAlgebra;
use crate::linalg::QMatrix;
use crate::rational::{q, Q};
use crate::uea::{formal_adjoint_uea, Enveloping, Monomial, UeaElement, UeaError, UeaMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RuminError {
    #[error("NotPure: the cohomology of the algebra is not pure")]
    NotPure,
    #[error("AnsatzInsufficient: no splitting operator in degree {q} up to order slack {slack}")]
    AnsatzInsufficient { q: usize, slack: u64 },
    #[error(transparent)]
    Uea(#[from] UeaError),
}

/// `d_q = Σ_i ε(θ^i) X_i + ∂_q` for `q = 0,…,m−1`.
pub fn invariant_de_rham(env: &Enveloping, coh: &WeightedCohomology) -> Vec<UeaMatrix> {
    let m = coh.dim;
    let ext = &coh.exterior;
    (0..m)
        .map(|qd| {
            let mut d = UeaMatrix::from_scalar(env, &coh.differentials[qd]);
            for i in 0..m {
                let eps = ext.epsilon(i, qd);
                let x = UeaElement::generator(env, i);
                for r in 0..eps.nrows() {
                    for c in 0..eps.ncols() {
                        let e = &eps[(r, c)];
                        if !e.is_zero() {
                            let entry = d.get(r, c).add(&x.scale(e)).expect("same algebra");
                            d.set(r, c, entry);
                        }
                    }
                }
            }
            d.declared_order = 1;
            d
        })
        .collect()
}

/// `δ_q = ∂*_q: Λ^{q+1} → Λ^q` for `q = 0,…,m−1`.
pub fn kostant_delta(coh: &WeightedCohomology) -> Vec<QMatrix> {
    (0..coh.dim).map(|qd| coh.adjoint_differential(qd)).collect()
}

/// PBW monomials of Heisenberg order exactly `order`.
pub fn monomials_of_order(env: &Enveloping, order: u64) -> Vec<Monomial> {
    fn rec(weights: &[u64], idx: usize, left: u64, cur: &mut Monomial, out: &mut Vec<Monomial>) {
        if idx == weights.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        let w = weights[idx];
        let mut e = 0u32;
        loop {
            let used = e as u64 * w;
            if used > left {
                break;
            }
            cur[idx] = e;
            rec(weights, idx + 1, left - used, cur, out);
            e += 1;
        }
        cur[idx] = 0;
    }
    let weights: Vec<u64> = env.algebra().degrees().iter().map(|d| d.unsigned_abs() as u64).collect();
    let mut out = Vec::new();
    let mut cur = vec![0; weights.len()];
    rec(&weights, 0, order, &mut cur, &mut out);
    out
}

/// Outcome of the linear solve for one `L_q`.
#[derive(Debug, Clone)]
pub struct SplittingSolution {
    pub l: UeaMatrix,
    /// Extra order allowed beyond the homogeneous ansatz (0 when it sufficed).
    pub slack: u64,
    pub unknowns: usize,
    pub unique: bool,
}

fn solve_one(
    env: &Enveloping,
    coh: &WeightedCohomology,
    qd: usize,
    delta_d: Option<&UeaMatrix>,
    slack: u64,
) -> Option<SplittingSolution> {
    let alg = coh.algebra();
    let ext = &coh.exterior;
    let p = coh.p.as_ref().expect("pure")[qd];
    let b = coh.betti[qd];
    let basis = ext.basis(qd);
    let mut unknowns: Vec<(usize, Monomial)> = Vec::new();
    for (row, &mask) in basis.iter().enumerate() {
        let w = mask_weight(alg, mask);
        if w + slack < p {
            continue;
        }
        let top = w + slack - p;
        let orders: Vec<u64> = if slack == 0 { vec![top] } else { (0..=top).collect() };
        for o in orders {
            for mono in monomials_of_order(env, o) {
                unknowns.push((row, mono));
            }
        }
    }
    // Equation rows are keyed by (condition, component, monomial).
    let mut rows: HashMap<(u8, usize, Monomial), usize> = HashMap::new();
    let mut entries: Vec<(usize, usize, Q)> = Vec::new();
    let key_row = |key: (u8, usize, Monomial), rows: &mut HashMap<_, usize>| {
        let next = rows.len();
        *rows.entry(key).or_insert(next)
    };
    let delta_prev = if qd > 0 { Some(coh.adjoint_differential(qd - 1)) } else { None };
    let pi = coh.projection(qd);
    for (col, (i, mono)) in unknowns.iter().enumerate() {
        if let Some(dp) = &delta_prev {
            for k in 0..dp.nrows() {
                if !dp[(k, *i)].is_zero() {
                    let r = key_row((0, k, mono.clone()), &mut rows);
                    entries.push((r, col, dp[(k, *i)].clone()));
                }
            }
        }
        if let Some(e) = delta_d {
            let x = UeaElement::monomial(env, mono.clone(), q(1));
            for k in 0..e.nrows() {
                let ek = e.get(k, *i);
                if ek.is_zero() {
                    continue;
                }
                let prod = env.multiply(ek, &x).expect("same algebra");
                for (mm, c) in prod.terms() {
                    let r = key_row((1, k, mm.clone()), &mut rows);
                    entries.push((r, col, c.clone()));
                }
            }
        }
        for r_idx in 0..pi.nrows() {
            if !pi[(r_idx, *i)].is_zero() {
                let r = key_row((2, r_idx, mono.clone()), &mut rows);
                entries.push((r, col, pi[(r_idx, *i)].clone()));
            }
        }
    }
    // πL = id pins the constant term of each harmonic coordinate.
    let zero_mono = vec![0u32; env.dim()];
    let rhs_rows: Vec<usize> = (0..b).map(|j| key_row((2, j, zero_mono.clone()), &mut rows)).collect();
    let nrows = rows.len();
    let n = unknowns.len();
    let mut aug = QMatrix::zeros(nrows, n + b);
    for (r, c, v) in entries {
        aug[(r, c)] += v;
    }
    for (j, &r) in rhs_rows.iter().enumerate() {
        aug[(r, n + j)] = q(1);
    }
    let (red, pivots) = aug.rref();
    if pivots.iter().any(|&pc| pc >= n) {
        return None;
    }
    let unique = pivots.len() == n;
    let mut l = UeaMatrix::zeros(env, basis.len(), b);
    for j in 0..b {
        let mut entries_by_row: Vec<UeaElement> = vec![UeaElement::zero(env); basis.len()];
        for (prow, &pc) in pivots.iter().enumerate() {
            let v = &red[(prow, n + j)];
            if v.is_zero() {
                continue;
            }
            let (i, mono) = &unknowns[pc];
            let term = UeaElement::monomial(env, mono.clone(), v.clone());
            entries_by_row[*i] = entries_by_row[*i].add(&term).expect("same algebra");
        }
        for (i, e) in entries_by_row.into_iter().enumerate() {
            l.set(i, j, e);
        }
    }
    let l = l.with_actual_order(env);
    Some(SplittingSolution { l, slack, unknowns: n, unique })
}

/// Solves for `L_q`, `q = 0,…,m`, widening the order bound by one on failure
/// up to the homogeneous dimension.
pub fn solve_splitting_l(
    env: &Enveloping,
    coh: &WeightedCohomology,
    de_rham: &[UeaMatrix],
) -> Result<Vec<SplittingSolution>, RuminError> {
    if !coh.pure {
        return Err(RuminError::NotPure);
    }
    let m = coh.dim;
    let delta = kostant_delta(coh);
    let mut out = Vec::with_capacity(m + 1);
    for qd in 0..=m {
        let delta_d = if qd < m {
            Some(UeaMatrix::from_scalar(env, &delta[qd]).compose(env, &de_rham[qd])?)
        } else {
            None
        };
        let mut slack = 0;
        loop {
            if let Some(sol) = solve_one(env, coh, qd, delta_d.as_ref(), slack) {
                if slack > 0 {
                    log::warn!("splitting operator in degree {qd} needed order slack {slack}");
                }
                out.push(sol);
                break;
            }
            if slack >= coh.homogeneous_dimension {
                return Err(RuminError::AnsatzInsufficient { q: qd, slack });
            }
            slack += 1;
        }
    }
    Ok(out)
}

/// The Rumin complex of the flat model with all intermediate operators.
pub struct RuminComplex {
    pub env: Enveloping,
    pub cohomology: WeightedCohomology,
    pub de_rham: Vec<UeaMatrix>,
    pub delta: Vec<QMatrix>,
    pub splitting: Vec<SplittingSolution>,
    /// `D_q: H^q → H^{q+1}` in harmonic-basis coordinates.
    pub d: Vec<UeaMatrix>,
}

pub fn rumin_complex(alg: &GradedLieAlgebra, inner: &GradedInnerProduct) -> Result<RuminComplex, RuminError> {
    let coh = WeightedCohomology::compute(alg, inner);
    if !coh.pure {
        return Err(RuminError::NotPure);
    }
    let env = Enveloping::new(alg);
    let de_rham = invariant_de_rham(&env, &coh);
    let splitting = solve_splitting_l(&env, &coh, &de_rham)?;
    let mut d = Vec::with_capacity(coh.dim);
    for qd in 0..coh.dim {
        let dl = de_rham[qd].compose(&env, &splitting[qd].l)?;
        let dq = dl.scalar_left(&env, &coh.projection(qd + 1)).with_actual_order(&env);
        d.push(dq);
    }
    let delta = kostant_delta(&coh);
    Ok(RuminComplex { env, cohomology: coh, de_rham, delta, splitting, d })
}

/// Per-degree outcome of the adjoint-via-star identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StarDualityReport {
    /// `D_q* = (−1)^{q+1} ⋆⁻¹ D_{m−q−1} ⋆` for `q = 0,…,m−1`.
    pub identity_holds: Vec<bool>,
    pub orders_symmetric: bool,
}

impl StarDualityReport {
    pub fn all_hold(&self) -> bool {
        self.orders_symmetric && self.identity_holds.iter().all(|&b| b)
    }
}

impl RuminComplex {
    pub fn algebra(&self) -> &GradedLieAlgebra {
        self.cohomology.algebra()
    }

    /// Orders of `D_q` (maximum over entries).
    pub fn orders(&self) -> Vec<Option<u64>> {
        self.d.iter().map(|d| d.max_order(&self.env)).collect()
    }

    /// Whether every non-zero entry of `D_q` is homogeneous of order `k_q`.
    pub fn orders_certified(&self) -> bool {
        let k = self.cohomology.k.as_ref().expect("pure");
        self.d.iter().zip(k).all(|(d, &kq)| {
            d.max_order(&self.env) == Some(kq) && d.min_order(&self.env) == Some(kq) && d.declared_order == kq
        })
    }

    pub fn d_squared_zero(&self) -> bool {
        self.d.windows(2).all(|w| w[1].compose(&self.env, &w[0]).map(|c| c.is_zero()).unwrap_or(false))
    }

    pub fn de_rham_squared_zero(&self) -> bool {
        self.de_rham.windows(2).all(|w| w[1].compose(&self.env, &w[0]).map(|c| c.is_zero()).unwrap_or(false))
    }

    /// `gr(d) = ∂`: the constant terms of `d` are the CE differential.
    pub fn associated_graded_is_ce(&self) -> bool {
        self.de_rham.iter().enumerate().all(|(qd, d)| d.order_zero_part() == self.cohomology.differentials[qd])
    }

    /// The three defining conditions of `L`, as exact identities.
    pub fn splitting_conditions_hold(&self) -> bool {
        let m = self.cohomology.dim;
        (0..=m).all(|qd| self.check_splitting(qd, &self.splitting[qd].l))
    }

    /// Checks `δL = 0`, `δdL = 0`, `πL = id` for a candidate `L_q`.
    pub fn check_splitting(&self, qd: usize, l: &UeaMatrix) -> bool {
        let env = &self.env;
        let coh = &self.cohomology;
        if qd > 0 && !l.scalar_left(env, &self.delta[qd - 1]).is_zero() {
            return false;
        }
        if qd < coh.dim {
            let dl = self.de_rham[qd].compose(env, l).expect("shapes");
            if !dl.scalar_left(env, &self.delta[qd]).is_zero() {
                return false;
            }
        }
        let pl = l.scalar_left(env, &coh.projection(qd));
        let id = UeaMatrix::from_scalar(env, &QMatrix::identity(coh.betti[qd]));
        pl.sub(&id).map(|x| x.is_zero()).unwrap_or(false)
    }

    /// Formal adjoint of `D_q` with respect to the harmonic Gram matrices.
    pub fn adjoint(&self, qd: usize) -> UeaMatrix {
        let coh = &self.cohomology;
        formal_adjoint_uea(&self.env, &self.d[qd], &coh.harmonic_gram(qd), &coh.harmonic_gram(qd + 1))
    }

    pub fn star_duality_check(&self) -> StarDualityReport {
        let coh = &self.cohomology;
        let m = coh.dim;
        let env = &self.env;
        let mut identity_holds = Vec::with_capacity(m);
        for qd in 0..m {
            let lhs = self.adjoint(qd);
            let s_q = coh.harmonic_star(qd);
            let s_next = coh.harmonic_star(qd + 1);
            let s_inv = s_q.inverse().expect("star is invertible on harmonic forms");
            let rhs = self.d[m - qd - 1].scalar_left(env, &s_inv).scalar_right(env, &s_next);
            let rhs = if qd % 2 == 0 { rhs.scale(&q(-1)) } else { rhs };
            identity_holds.push(lhs.sub(&rhs).map(|x| x.is_zero()).unwrap_or(false));
        }
        let orders_symmetric = match &coh.k {
            Some(k) => (0..m).all(|qd| k[qd] == k[m - qd - 1]),
            None => false,
        };
        StarDualityReport { identity_holds, orders_symmetric }
    }
}

pub fn rumin_d(alg: &GradedLieAlgebra, inner: &GradedInnerProduct) -> Result<Vec<UeaMatrix>, RuminError> {
    Ok(rumin_complex(alg, inner)?.d)
}
