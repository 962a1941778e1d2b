//! Analytic torsion of finite-dimensional graded complexes with inner products.
//!
//! A [`FiniteComplex`] occupies degrees `lowest_degree ..= lowest_degree + len − 1`.
//! Differential `q` (0-based, counted from the lowest degree) maps degree slot
//! `q` to slot `q + 1` and carries the order label `k_q`. Exponent vectors `a`
//! are indexed like the differentials, the vector `N` like the degrees.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};

use crate::linalg::QMatrix;
use crate::rational::{ln_abs, pow_i, to_f64, Q};

/// Tolerance for comparing floating point evaluations of the same quantity.
pub const REL_TOL: f64 = 1e-9;

/// `|x − y| ≤ REL_TOL · max(1, |x|, |y|)`.
pub fn close(x: f64, y: f64) -> bool {
    (x - y).abs() <= REL_TOL * 1f64.max(x.abs()).max(y.abs())
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TorsionError {
    #[error("DimensionMismatch: {0}")]
    DimensionMismatch(String),
    #[error("NotPositiveDefinite: Gram matrix in degree {degree}")]
    NotPositiveDefinite { degree: i32 },
    #[error("NotAComplex: D∘D ≠ 0 starting in degree {degree}")]
    NotAComplex { degree: i32 },
    #[error("InvalidOrder: order labels must be at least 1")]
    InvalidOrder,
    #[error("ExponentConstraintViolated: k_q a_q must be the same for every differential")]
    ExponentConstraintViolated,
    #[error("ConstraintViolated: N_(q+1) − N_q must equal k_q")]
    ConstraintViolated,
    #[error("CutoffOnSpectrum: λ = {lambda} is an eigenvalue of a Laplacian")]
    CutoffOnSpectrum { lambda: f64 },
    #[error("NegativeCutoff: λ = {lambda}")]
    NegativeCutoff { lambda: f64 },
    #[error("InvalidRepresentatives: degree {degree}: {reason}")]
    InvalidRepresentatives { degree: i32, reason: String },
    #[error("NotAcyclic: cohomology in degree {degree}")]
    NotAcyclic { degree: i32 },
}

/// A finite complex `0 → C^lo → … → C^hi → 0` with Gram matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct FiniteComplex {
    lowest_degree: i32,
    grams: Vec<QMatrix>,
    differentials: Vec<QMatrix>,
    k: Vec<u64>,
}

/// Cutoff, `N` and `a` for a spectral evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralParams {
    pub lambda: f64,
    pub n: Vec<i64>,
    pub a: Vec<u64>,
}

/// Norm of a reference element of the determinant line of cohomology.
#[derive(Debug, Clone, PartialEq)]
pub struct TorsionResult {
    /// `exp(−ζ'_λ(0)/2κ)`.
    pub zeta_part: f64,
    pub finite_part: f64,
    pub total: f64,
    pub kappa: u64,
    pub lambda: f64,
    pub zeta_prime: f64,
    /// Exact square of `total`, available at λ = 0.
    pub exact_square: Option<Q>,
    pub error_bound: f64,
}

/// Spectral data of one Laplacian, kept as logarithms.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianSpectrum {
    pub zero_modes: usize,
    pub log_eigenvalues: Vec<f64>,
}

fn cholesky_upper(g: &QMatrix) -> DMatrix<f64> {
    let c = nalgebra::Cholesky::new(g.to_f64()).expect("Gram matrix is positive definite");
    c.l().transpose()
}

fn upper_inverse(r: &DMatrix<f64>) -> DMatrix<f64> {
    r.clone().try_inverse().expect("Cholesky factor is invertible")
}

impl FiniteComplex {
    /// Validates shapes, positivity and `D∘D = 0`. `k` may carry one trailing
    /// entry beyond the number of differentials, which is ignored.
    pub fn new(lowest_degree: i32, grams: Vec<QMatrix>, differentials: Vec<QMatrix>, mut k: Vec<u64>) -> Result<Self, TorsionError> {
        if grams.is_empty() {
            return Err(TorsionError::DimensionMismatch("a complex needs at least one degree".into()));
        }
        if differentials.len() + 1 != grams.len() {
            return Err(TorsionError::DimensionMismatch(format!(
                "{} degrees need {} differentials, found {}",
                grams.len(),
                grams.len() - 1,
                differentials.len()
            )));
        }
        if k.len() == differentials.len() + 1 {
            k.pop();
        }
        if k.len() != differentials.len() {
            return Err(TorsionError::DimensionMismatch(format!(
                "expected {} order labels, found {}",
                differentials.len(),
                k.len()
            )));
        }
        if k.contains(&0) {
            return Err(TorsionError::InvalidOrder);
        }
        for (i, g) in grams.iter().enumerate() {
            let degree = lowest_degree + i as i32;
            if !g.is_square() {
                return Err(TorsionError::DimensionMismatch(format!("Gram matrix in degree {degree} is not square")));
            }
            if !g.is_symmetric() || !g.is_positive_definite() {
                return Err(TorsionError::NotPositiveDefinite { degree });
            }
        }
        for (i, d) in differentials.iter().enumerate() {
            if d.nrows() != grams[i + 1].nrows() || d.ncols() != grams[i].nrows() {
                return Err(TorsionError::DimensionMismatch(format!(
                    "differential from degree {} has shape {}x{}, expected {}x{}",
                    lowest_degree + i as i32,
                    d.nrows(),
                    d.ncols(),
                    grams[i + 1].nrows(),
                    grams[i].nrows()
                )));
            }
        }
        for (i, w) in differentials.windows(2).enumerate() {
            if !w[1].matmul(&w[0]).is_zero() {
                return Err(TorsionError::NotAComplex { degree: lowest_degree + i as i32 });
            }
        }
        Ok(Self { lowest_degree, grams, differentials, k })
    }

    /// Pseudo-random complex with prescribed ranks and Betti numbers, drawn
    /// from an integer stream. Slot `q` has dimension `r_{q−1} + b_q + r_q`.
    pub fn from_integer_stream(
        lowest_degree: i32,
        ranks: &[usize],
        betti: &[usize],
        k: Vec<u64>,
        mut next: impl FnMut() -> i64,
    ) -> Result<Self, TorsionError> {
        if ranks.len() + 1 != betti.len() {
            return Err(TorsionError::DimensionMismatch("ranks and Betti numbers do not fit".into()));
        }
        let n = betti.len();
        let rank = |q: isize| if q < 0 || q as usize >= ranks.len() { 0 } else { ranks[q as usize] };
        let dims: Vec<usize> = (0..n).map(|q| rank(q as isize - 1) + betti[q] + rank(q as isize)).collect();
        const SCALARS: [i64; 6] = [1, 2, 3, -1, -2, -3];
        let mut change = Vec::with_capacity(n);
        let mut grams = Vec::with_capacity(n);
        for &d in &dims {
            let mut t = QMatrix::identity(d);
            let mut l = QMatrix::zeros(d, d);
            for i in 0..d {
                for j in 0..i {
                    t[(i, j)] = Q::from_integer((next().rem_euclid(5) - 2).into());
                }
                for j in 0..=i {
                    l[(i, j)] = Q::from_integer((next().rem_euclid(5) - 2).into());
                }
            }
            // A random permutation keeps the standard blocks from lining up with the triangle.
            let mut perm: Vec<usize> = (0..d).collect();
            for i in (1..d).rev() {
                perm.swap(i, next().rem_euclid(i as i64 + 1) as usize);
            }
            let p = QMatrix::from_columns(d, &perm.iter().map(|&c| QMatrix::identity(d).column(c)).collect::<Vec<_>>());
            change.push(t.matmul(&p));
            grams.push(l.matmul(&l.transpose()).add(&QMatrix::identity(d)));
        }
        let mut differentials = Vec::with_capacity(n.saturating_sub(1));
        for qd in 0..n - 1 {
            let mut d = QMatrix::zeros(dims[qd + 1], dims[qd]);
            let src0 = rank(qd as isize - 1) + betti[qd];
            for j in 0..ranks[qd] {
                d[(j, src0 + j)] = Q::from_integer(SCALARS[next().rem_euclid(6) as usize].into());
            }
            let inv = change[qd].inverse().expect("unimodular");
            differentials.push(change[qd + 1].matmul(&d).matmul(&inv));
        }
        Self::new(lowest_degree, grams, differentials, k)
    }

    pub fn lowest_degree(&self) -> i32 {
        self.lowest_degree
    }

    pub fn len(&self) -> usize {
        self.grams.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grams.iter().all(|g| g.nrows() == 0)
    }

    pub fn degree(&self, slot: usize) -> i32 {
        self.lowest_degree + slot as i32
    }

    pub fn dims(&self) -> Vec<usize> {
        self.grams.iter().map(QMatrix::nrows).collect()
    }

    pub fn grams(&self) -> &[QMatrix] {
        &self.grams
    }

    pub fn differentials(&self) -> &[QMatrix] {
        &self.differentials
    }

    pub fn k(&self) -> &[u64] {
        &self.k
    }

    fn sign(&self, slot: usize) -> i64 {
        if self.degree(slot).rem_euclid(2) == 0 {
            1
        } else {
            -1
        }
    }

    /// `D_q* = G_q⁻¹ D_qᵀ G_{q+1}`.
    pub fn adjoint(&self, qd: usize) -> QMatrix {
        let ginv = self.grams[qd].inverse().expect("positive definite");
        ginv.matmul(&self.differentials[qd].transpose()).matmul(&self.grams[qd + 1])
    }

    pub fn ranks(&self) -> Vec<usize> {
        self.differentials.iter().map(QMatrix::rank).collect()
    }

    pub fn betti(&self) -> Vec<usize> {
        let r = self.ranks();
        self.dims()
            .iter()
            .enumerate()
            .map(|(qd, &d)| d - r.get(qd).copied().unwrap_or(0) - if qd > 0 { r[qd - 1] } else { 0 })
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims().iter().enumerate().map(|(qd, &d)| self.sign(qd) * d as i64).sum()
    }

    pub fn is_acyclic(&self) -> bool {
        self.betti().iter().all(|&b| b == 0)
    }

    /// `κ` if all `k_q a_q` agree.
    pub fn kappa(&self, a: &[u64]) -> Result<u64, TorsionError> {
        if a.len() != self.k.len() {
            return Err(TorsionError::DimensionMismatch(format!("expected {} exponents, found {}", self.k.len(), a.len())));
        }
        if a.contains(&0) {
            return Err(TorsionError::ExponentConstraintViolated);
        }
        let mut it = self.k.iter().zip(a).map(|(k, a)| k * a);
        match it.next() {
            None => Ok(1),
            Some(first) if it.all(|x| x == first) => Ok(first),
            Some(_) => Err(TorsionError::ExponentConstraintViolated),
        }
    }

    /// The smallest admissible exponents: `a_q = lcm(k)/k_q`.
    pub fn minimal_exponents(&self) -> Vec<u64> {
        let l = self.k.iter().fold(1u64, |acc, &k| num_integer::lcm(acc, k));
        self.k.iter().map(|&k| l / k).collect()
    }

    /// `N` with `N_lowest = 0` and `N_{q+1} = N_q + k_q`.
    pub fn minimal_n(&self) -> Vec<i64> {
        let mut n = vec![0i64];
        for &k in &self.k {
            n.push(n.last().unwrap() + k as i64);
        }
        n
    }

    pub fn default_params(&self) -> SpectralParams {
        SpectralParams { lambda: 0.0, n: self.minimal_n(), a: self.minimal_exponents() }
    }

    fn check_n(&self, n: &[i64]) -> Result<(), TorsionError> {
        if n.len() != self.len() {
            return Err(TorsionError::DimensionMismatch(format!("expected {} entries of N, found {}", self.len(), n.len())));
        }
        if n.windows(2).zip(&self.k).any(|(w, &k)| w[1] - w[0] != k as i64) {
            return Err(TorsionError::ConstraintViolated);
        }
        Ok(())
    }

    fn check_params(&self, p: &SpectralParams) -> Result<u64, TorsionError> {
        if p.lambda.is_nan() || p.lambda < 0.0 {
            return Err(TorsionError::NegativeCutoff { lambda: p.lambda });
        }
        let kappa = self.kappa(&p.a)?;
        self.check_n(&p.n)?;
        Ok(kappa)
    }

    /// Exact `Δ_q = (D_{q−1}D_{q−1}*)^{a_{q−1}} + (D_q*D_q)^{a_q}` and `κ`.
    pub fn laplacians(&self, a: &[u64]) -> Result<(Vec<QMatrix>, u64), TorsionError> {
        let kappa = self.kappa(a)?;
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for qd in 0..n {
            let d = self.grams[qd].nrows();
            let mut lap = QMatrix::zeros(d, d);
            if qd > 0 {
                let dd = self.differentials[qd - 1].matmul(&self.adjoint(qd - 1));
                lap = lap.add(&dd.pow(a[qd - 1] as u32));
            }
            if qd + 1 < n {
                let dd = self.adjoint(qd).matmul(&self.differentials[qd]);
                lap = lap.add(&dd.pow(a[qd] as u32));
            }
            out.push(lap);
        }
        Ok((out, kappa))
    }

    /// Non-zero singular values of each `D_q` between the Gram metrics,
    /// descending; the count is the exact rank.
    pub fn singular_values(&self) -> Vec<Vec<f64>> {
        let ranks = self.ranks();
        self.differentials
            .iter()
            .enumerate()
            .map(|(qd, d)| {
                if ranks[qd] == 0 {
                    return Vec::new();
                }
                let r_src = cholesky_upper(&self.grams[qd]);
                let r_tgt = cholesky_upper(&self.grams[qd + 1]);
                let dt = &r_tgt * d.to_f64() * upper_inverse(&r_src);
                let mut s: Vec<f64> = dt.svd(false, false).singular_values.iter().copied().collect();
                s.sort_by(|x, y| y.partial_cmp(x).unwrap());
                s.truncate(ranks[qd]);
                s
            })
            .collect()
    }

    /// Spectrum of each `Δ_q`: `ν_q^{a_q}` and `ν_{q−1}^{a_{q−1}}` with
    /// `ν = σ²`, padded by zero modes.
    pub fn laplacian_spectra(&self, a: &[u64]) -> Result<Vec<LaplacianSpectrum>, TorsionError> {
        self.kappa(a)?;
        let sv = self.singular_values();
        let dims = self.dims();
        Ok((0..self.len())
            .map(|qd| {
                let mut logs = Vec::new();
                if qd > 0 {
                    logs.extend(sv[qd - 1].iter().map(|s| 2.0 * a[qd - 1] as f64 * s.ln()));
                }
                if qd + 1 < self.len() {
                    logs.extend(sv[qd].iter().map(|s| 2.0 * a[qd] as f64 * s.ln()));
                }
                logs.sort_by(|x, y| x.partial_cmp(y).unwrap());
                LaplacianSpectrum { zero_modes: dims[qd] - logs.len(), log_eigenvalues: logs }
            })
            .collect())
    }

    fn check_cutoff(&self, spectra: &[LaplacianSpectrum], lambda: f64) -> Result<(), TorsionError> {
        if lambda > 0.0 {
            let ll = lambda.ln();
            if spectra.iter().flat_map(|s| &s.log_eigenvalues).any(|&l| (l - ll).abs() < REL_TOL) {
                return Err(TorsionError::CutoffOnSpectrum { lambda });
            }
        }
        Ok(())
    }

    fn above(lambda: f64, log_mu: f64) -> bool {
        lambda <= 0.0 || log_mu > lambda.ln()
    }

    /// `ζ'_λ(0) = −Σ_q (−1)^q N_q Σ_{μ ∈ spec Δ_q, μ > λ} log μ`.
    pub fn zeta_prime_zero(&self, p: &SpectralParams) -> Result<f64, TorsionError> {
        self.check_params(p)?;
        let spectra = self.laplacian_spectra(&p.a)?;
        self.check_cutoff(&spectra, p.lambda)?;
        Ok(-spectra
            .iter()
            .enumerate()
            .map(|(qd, s)| {
                let sum: f64 = s.log_eigenvalues.iter().filter(|&&l| Self::above(p.lambda, l)).sum();
                (self.sign(qd) * p.n[qd]) as f64 * sum
            })
            .sum::<f64>())
    }

    /// `ζ'_0(0)` from exact pseudo-determinants of the rational Laplacians.
    pub fn zeta_prime_zero_exact(&self, n: &[i64], a: &[u64]) -> Result<f64, TorsionError> {
        self.check_n(n)?;
        let (laps, _) = self.laplacians(a)?;
        Ok(-laps
            .iter()
            .enumerate()
            .map(|(qd, l)| {
                let pd = l.pseudo_det();
                (self.sign(qd) * n[qd]) as f64 * if pd.is_zero() { 0.0 } else { ln_abs(&pd) }
            })
            .sum::<f64>())
    }

    /// Dimensions of `P_λ C^q`, the span of eigenvectors with eigenvalue at most λ.
    pub fn small_dims(&self, p: &SpectralParams) -> Result<Vec<usize>, TorsionError> {
        let spectra = self.laplacian_spectra(&p.a)?;
        self.check_cutoff(&spectra, p.lambda)?;
        Ok(spectra
            .iter()
            .map(|s| s.zero_modes + s.log_eigenvalues.iter().filter(|&&l| !Self::above(p.lambda, l)).count())
            .collect())
    }

    /// `ζ_λ(0) = str(N Q_λ)` counted spectrally.
    pub fn zeta_zero(&self, p: &SpectralParams) -> Result<i64, TorsionError> {
        self.check_params(p)?;
        let small = self.small_dims(p)?;
        Ok(self
            .dims()
            .iter()
            .enumerate()
            .map(|(qd, &d)| self.sign(qd) * p.n[qd] * (d - small[qd]) as i64)
            .sum())
    }

    /// `str(N) − str(N P_λ)`, the right side of the identity for `ζ_λ(0)`.
    pub fn zeta_zero_supertrace(&self, p: &SpectralParams) -> Result<i64, TorsionError> {
        self.check_params(p)?;
        let small = self.small_dims(p)?;
        let str_n: i64 = self.dims().iter().enumerate().map(|(qd, &d)| self.sign(qd) * p.n[qd] * d as i64).sum();
        let str_np: i64 = small.iter().enumerate().map(|(qd, &d)| self.sign(qd) * p.n[qd] * d as i64).sum();
        Ok(str_n - str_np)
    }

    /// Orthogonal projection of closed vectors onto `ker D_q ∩ ker D_{q−1}*`.
    pub fn harmonic_projection(&self, qd: usize, z: &QMatrix) -> QMatrix {
        if qd == 0 || z.ncols() == 0 {
            return z.clone();
        }
        let d = &self.differentials[qd - 1];
        let ds = self.adjoint(qd - 1);
        let y = ds.matmul(d).solve(&ds.matmul(z)).expect("normal equations are consistent");
        z.sub(&d.matmul(&y))
    }

    fn validate_reference(&self, reference: &[QMatrix]) -> Result<(), TorsionError> {
        if reference.len() != self.len() {
            return Err(TorsionError::InvalidRepresentatives {
                degree: self.lowest_degree,
                reason: format!("expected bases in {} degrees, found {}", self.len(), reference.len()),
            });
        }
        let betti = self.betti();
        for (qd, z) in reference.iter().enumerate() {
            let degree = self.degree(qd);
            let fail = |reason: String| Err(TorsionError::InvalidRepresentatives { degree, reason });
            if z.ncols() != betti[qd] {
                return fail(format!("expected {} representatives, found {}", betti[qd], z.ncols()));
            }
            if z.ncols() == 0 {
                continue;
            }
            if z.nrows() != self.grams[qd].nrows() {
                return fail(format!("representatives must have {} entries", self.grams[qd].nrows()));
            }
            if qd + 1 < self.len() && !self.differentials[qd].matmul(z).is_zero() {
                return fail("not cocycles".into());
            }
            let exact = if qd > 0 { self.differentials[qd - 1].clone() } else { QMatrix::zeros(z.nrows(), 0) };
            if exact.hstack(z).rank() != exact.rank() + z.ncols() {
                return fail("classes are linearly dependent".into());
            }
        }
        Ok(())
    }

    /// A reference basis of cohomology built from pivot columns of `[im D | ker D]`.
    pub fn canonical_reference(&self) -> Vec<QMatrix> {
        (0..self.len())
            .map(|qd| {
                let d = self.grams[qd].nrows();
                let ker = if qd + 1 < self.len() { self.differentials[qd].kernel() } else { QMatrix::identity(d) };
                let exact = if qd > 0 { self.differentials[qd - 1].column_space() } else { QMatrix::zeros(d, 0) };
                let (_, piv) = exact.hstack(&ker).rref();
                let cols: Vec<usize> = piv.iter().filter(|&&c| c >= exact.ncols()).copied().collect();
                exact.hstack(&ker).select_columns(&cols)
            })
            .collect()
    }

    /// `det` of the Gram matrix of the harmonic projections of a reference basis.
    pub fn harmonic_gram_det(&self, qd: usize, z: &QMatrix) -> Q {
        let h = self.harmonic_projection(qd, z);
        h.transpose().matmul(&self.grams[qd]).matmul(&h).det()
    }

    /// `det′(D_q* D_q)` for each differential.
    pub fn pseudo_dets(&self) -> Vec<Q> {
        (0..self.differentials.len())
            .map(|qd| self.adjoint(qd).matmul(&self.differentials[qd]).pseudo_det())
            .collect()
    }

    pub fn torsion_norm(&self, reference: &[QMatrix], p: &SpectralParams) -> Result<TorsionResult, TorsionError> {
        self.validate_reference(reference)?;
        let kappa = self.check_params(p)?;
        let zeta_prime = self.zeta_prime_zero(p)?;
        let zeta_part = (-zeta_prime / (2.0 * kappa as f64)).exp();
        let sv = self.singular_values();
        let mut log_finite = 0.0;
        let mut exact_square = Q::one();
        for qd in 0..self.len() {
            let s = self.sign(qd) as f64;
            let gd = self.harmonic_gram_det(qd, &reference[qd]);
            log_finite += s * 0.5 * ln_abs(&gd);
            exact_square *= pow_i(&gd, self.sign(qd));
            if qd > 0 {
                let a = p.a[qd - 1] as f64;
                let small: f64 = sv[qd - 1].iter().map(|x| x.ln()).filter(|&l| !Self::above(p.lambda, 2.0 * a * l)).sum();
                log_finite += s * small;
            }
        }
        for (qd, pd) in self.pseudo_dets().iter().enumerate() {
            exact_square *= pow_i(pd, -self.sign(qd));
        }
        let finite_part = log_finite.exp();
        let total = zeta_part * finite_part;
        let log_mass: f64 = sv.iter().flatten().map(|x| x.ln().abs()).sum::<f64>() + log_finite.abs();
        let mut error_bound = total * 1e-12 * (1.0 + log_mass);
        let exact_square = if p.lambda == 0.0 {
            let exact = to_f64(&exact_square).sqrt();
            error_bound = error_bound.max((exact - total).abs());
            Some(exact_square)
        } else {
            None
        };
        Ok(TorsionResult { zeta_part, finite_part, total, kappa, lambda: p.lambda, zeta_prime, exact_square, error_bound })
    }

    /// `sdet(D*D|_L)^{−1}` as an exact rational, the square of the acyclic torsion.
    pub fn acyclic_torsion_squared(&self) -> Result<Q, TorsionError> {
        if let Some(qd) = self.betti().iter().position(|&b| b != 0) {
            return Err(TorsionError::NotAcyclic { degree: self.degree(qd) });
        }
        let mut out = Q::one();
        for (qd, pd) in self.pseudo_dets().iter().enumerate() {
            out *= pow_i(pd, -self.sign(qd));
        }
        Ok(out)
    }

    pub fn acyclic_torsion(&self) -> Result<f64, TorsionError> {
        Ok(to_f64(&self.acyclic_torsion_squared()?).sqrt())
    }

    /// `∏_q det(Δ_q)^{(−1)^q N_q} = sdet(D*D|_L)^{−κ}`, exactly.
    pub fn telescoping_check(&self, n: &[i64], a: &[u64]) -> Result<bool, TorsionError> {
        let rhs = pow_i(&self.acyclic_torsion_squared()?, self.kappa(a)? as i64);
        self.check_n(n)?;
        let (laps, _) = self.laplacians(a)?;
        let lhs = laps.iter().enumerate().fold(Q::one(), |acc, (qd, l)| acc * pow_i(&l.det(), self.sign(qd) * n[qd]));
        Ok(lhs == rhs)
    }

    /// `Σ_q (−1)^q tr e^{−tΔ_q}`.
    pub fn euler_heat_trace(&self, a: &[u64], t: f64) -> Result<f64, TorsionError> {
        let spectra = self.laplacian_spectra(a)?;
        Ok(spectra
            .iter()
            .enumerate()
            .map(|(qd, s)| {
                let tr = s.zero_modes as f64 + s.log_eigenvalues.iter().map(|l| (-t * l.exp()).exp()).sum::<f64>();
                self.sign(qd) as f64 * tr
            })
            .sum())
    }

    /// Compares the characteristic polynomials of `D_q*D_q` and `D_qD_q*`
    /// after removing factors of `t`.
    pub fn spectrum_pairing_check(&self) -> bool {
        fn strip(c: Vec<Q>) -> Vec<Q> {
            c.into_iter().skip_while(Zero::is_zero).collect()
        }
        (0..self.differentials.len()).all(|qd| {
            let d = &self.differentials[qd];
            let ds = self.adjoint(qd);
            strip(ds.matmul(d).char_poly()) == strip(d.matmul(&ds).char_poly())
        })
    }

    /// The transposed complex: `(C')^p = (C^{−p})*` with the inverse Gram.
    pub fn dual_complex(&self) -> FiniteComplex {
        let n = self.len();
        let grams = (0..n).map(|j| self.grams[n - 1 - j].inverse().expect("positive definite")).collect();
        let differentials = (0..n - 1).map(|j| self.differentials[n - 2 - j].transpose()).collect();
        let k = (0..n - 1).map(|j| self.k[n - 2 - j]).collect();
        FiniteComplex { lowest_degree: -(self.lowest_degree + n as i32 - 1), grams, differentials, k }
    }

    /// The reference basis of the dual complex dual to `reference`.
    pub fn dual_reference(&self, reference: &[QMatrix]) -> Result<Vec<QMatrix>, TorsionError> {
        self.validate_reference(reference)?;
        let n = self.len();
        let mut out = Vec::with_capacity(n);
        for j in 0..n {
            let qd = n - 1 - j;
            let z = &reference[qd];
            let d = self.grams[qd].nrows();
            if z.ncols() == 0 {
                out.push(QMatrix::zeros(d, 0));
                continue;
            }
            let mut lhs = z.transpose();
            let mut rhs = QMatrix::identity(z.ncols());
            if qd > 0 {
                let dt = self.differentials[qd - 1].transpose();
                rhs = QMatrix::zeros(dt.nrows(), z.ncols()).vstack(&rhs);
                lhs = dt.vstack(&lhs);
            }
            let w = lhs.solve(&rhs).ok_or_else(|| TorsionError::InvalidRepresentatives {
                degree: self.degree(qd),
                reason: "no dual basis".into(),
            })?;
            out.push(w);
        }
        Ok(out)
    }

    /// The same data placed one degree higher.
    pub fn shift(&self, by: i32) -> FiniteComplex {
        FiniteComplex { lowest_degree: self.lowest_degree + by, ..self.clone() }
    }

    /// Block sum of two complexes on the same degrees with the same orders.
    pub fn direct_sum(&self, other: &FiniteComplex) -> Result<FiniteComplex, TorsionError> {
        if self.lowest_degree != other.lowest_degree || self.len() != other.len() || self.k != other.k {
            return Err(TorsionError::DimensionMismatch("summands must share degrees and orders".into()));
        }
        let block = |x: &QMatrix, y: &QMatrix| {
            let top = x.hstack(&QMatrix::zeros(x.nrows(), y.ncols()));
            let bottom = QMatrix::zeros(y.nrows(), x.ncols()).hstack(y);
            top.vstack(&bottom)
        };
        let grams = self.grams.iter().zip(&other.grams).map(|(x, y)| block(x, y)).collect();
        let differentials = self.differentials.iter().zip(&other.differentials).map(|(x, y)| block(x, y)).collect();
        Ok(FiniteComplex { lowest_degree: self.lowest_degree, grams, differentials, k: self.k.clone() })
    }

    /// `(1/2κ)ζ'_λ(0)` against `½ Σ_q (−1)^q Σ log ν_q` over `ν_q^{a_q} > λ`,
    /// the derivative of the Z₂-graded supertrace of `(D*D)^{−s}`.
    pub fn z2_check(&self, p: &SpectralParams) -> Result<Z2Report, TorsionError> {
        let kappa = self.check_params(p)?;
        let lhs = self.zeta_prime_zero(p)? / (2.0 * kappa as f64);
        let sv = self.singular_values();
        let rhs = 0.5
            * sv.iter()
                .enumerate()
                .map(|(qd, s)| {
                    let a = p.a[qd] as f64;
                    let sum: f64 =
                        s.iter().map(|x| 2.0 * x.ln()).filter(|&l| Self::above(p.lambda, a * l)).sum();
                    self.sign(qd) as f64 * sum
                })
                .sum::<f64>();
        Ok(Z2Report { lhs, rhs, holds: close(lhs, rhs) })
    }

    /// Cutoffs strictly between consecutive distinct Laplacian eigenvalues,
    /// including one below the smallest.
    pub fn midgap_cutoffs(&self, a: &[u64]) -> Result<Vec<f64>, TorsionError> {
        let spectra = self.laplacian_spectra(a)?;
        let mut logs: Vec<f64> = spectra.iter().flat_map(|s| s.log_eigenvalues.iter().copied()).collect();
        logs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        logs.dedup_by(|x, y| (*x - *y).abs() < 1e-6);
        let mut out = Vec::new();
        if let Some(first) = logs.first() {
            out.push((first - 1.0).exp());
        }
        for w in logs.windows(2) {
            out.push(((w[0] + w[1]) / 2.0).exp());
        }
        if let Some(last) = logs.last() {
            out.push((last + 1.0).exp());
        }
        Ok(out)
    }

    /// Runs the λ, N and a invariance battery on a reference basis.
    pub fn invariance_report(&self, reference: &[QMatrix], p: &SpectralParams) -> Result<InvarianceReport, TorsionError> {
        let base = self.torsion_norm(reference, p)?;
        let mut lambda_values = Vec::new();
        for lambda in std::iter::once(0.0).chain(self.midgap_cutoffs(&p.a)?) {
            let r = self.torsion_norm(reference, &SpectralParams { lambda, ..p.clone() })?;
            lambda_values.push((lambda, r.total));
        }
        let lambda_invariant = lambda_values.iter().all(|&(_, t)| close(t, base.total));
        let mut n_values = Vec::new();
        for shift in [-3i64, 1, 7] {
            let n: Vec<i64> = p.n.iter().map(|x| x + shift).collect();
            let sp = SpectralParams { n, ..p.clone() };
            n_values.push((shift, self.zeta_prime_zero(&sp)?, self.zeta_zero(&sp)?));
        }
        let zp = self.zeta_prime_zero(p)?;
        let z0 = self.zeta_zero(p)?;
        let n_invariant = n_values.iter().all(|&(_, a, b)| close(a, zp) && b == z0);
        let mut a_values = Vec::new();
        for r in [2u64, 3] {
            let a: Vec<u64> = p.a.iter().map(|x| x * r).collect();
            let n = p.n.clone();
            // Rescaling a moves every Laplacian eigenvalue, so the cutoff is reset to 0.
            let res = self.torsion_norm(reference, &SpectralParams { lambda: 0.0, n, a })?;
            a_values.push((r, res.total));
        }
        let a_invariant = a_values.iter().all(|&(_, t)| close(t, base.total));
        Ok(InvarianceReport { base, lambda_values, lambda_invariant, n_values, n_invariant, a_values, a_invariant })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Z2Report {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InvarianceReport {
    pub base: TorsionResult,
    pub lambda_values: Vec<(f64, f64)>,
    pub lambda_invariant: bool,
    /// `(shift, ζ'_λ(0), ζ_λ(0))` after adding `shift` to every `N_q`.
    pub n_values: Vec<(i64, f64, i64)>,
    pub n_invariant: bool,
    pub a_values: Vec<(u64, f64)>,
    pub a_invariant: bool,
}

impl InvarianceReport {
    pub fn all_hold(&self) -> bool {
        self.lambda_invariant && self.n_invariant && self.a_invariant
    }
}

/// Whether a rational is the square of a rational (for reporting exact norms).
pub fn exact_sqrt(x: &Q) -> Option<Q> {
    if x.is_negative() {
        return None;
    }
    let n = crate::rational::exact_isqrt(x.numer())?;
    let d = crate::rational::exact_isqrt(x.denom())?;
    Some(Q::new(n, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;
    use proptest::prelude::*;

    fn two_term(c: i64) -> FiniteComplex {
        FiniteComplex::new(0, vec![QMatrix::identity(1); 2], vec![QMatrix::from_i64(1, 1, &[c])], vec![1, 1]).unwrap()
    }

    fn stream(seed: u64) -> impl FnMut() -> i64 {
        let mut s = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        move || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 33) as i64
        }
    }

    #[test]
    fn two_term_example() {
        let c = two_term(3);
        let (laps, kappa) = c.laplacians(&[1]).unwrap();
        assert_eq!(kappa, 1);
        assert_eq!(laps, vec![QMatrix::from_i64(1, 1, &[9]); 2]);
        let p = c.default_params();
        assert_eq!(p.n, vec![0, 1]);
        assert!(close(c.zeta_prime_zero(&p).unwrap(), 9f64.ln()));
        assert!(close(c.zeta_prime_zero_exact(&p.n, &p.a).unwrap(), 9f64.ln()));
        let r = c.torsion_norm(&c.canonical_reference(), &p).unwrap();
        assert!(close(r.total, 1.0 / 3.0));
        assert_eq!(r.exact_square, Some(Q::new(1.into(), 9.into())));
        assert_eq!(c.acyclic_torsion_squared().unwrap(), Q::new(1.into(), 9.into()));
        assert!(close(c.shift(-1).acyclic_torsion().unwrap(), 3.0));
        for lambda in [4.0, 100.0] {
            let r = c.torsion_norm(&c.canonical_reference(), &SpectralParams { lambda, ..p.clone() }).unwrap();
            assert!(close(r.total, 1.0 / 3.0));
        }
        assert!(matches!(
            c.zeta_prime_zero(&SpectralParams { lambda: 9.0, ..p.clone() }),
            Err(TorsionError::CutoffOnSpectrum { .. })
        ));
        for t in [0.1, 1.0, 10.0] {
            assert!(close(c.euler_heat_trace(&p.a, t).unwrap(), 0.0));
        }
        assert!(c.z2_check(&p).unwrap().holds);
    }

    #[test]
    fn zero_differential() {
        let c = FiniteComplex::new(
            0,
            vec![QMatrix::identity(2), QMatrix::identity(3)],
            vec![QMatrix::zeros(3, 2)],
            vec![2],
        )
        .unwrap();
        let (laps, _) = c.laplacians(&[1]).unwrap();
        assert!(laps.iter().all(QMatrix::is_zero));
        let p = c.default_params();
        assert_eq!(c.zeta_prime_zero(&p).unwrap(), 0.0);
        assert_eq!(c.euler_heat_trace(&p.a, 3.0).unwrap(), -1.0);
        let z = c.z2_check(&p).unwrap();
        assert!(z.holds && z.lhs == 0.0);
    }

    #[test]
    fn identity_complex_has_torsion_one() {
        let c = FiniteComplex::new(0, vec![QMatrix::identity(3); 2], vec![QMatrix::identity(3)], vec![1]).unwrap();
        assert!(close(c.acyclic_torsion().unwrap(), 1.0));
        let r = c.torsion_norm(&c.canonical_reference(), &c.default_params()).unwrap();
        assert!(close(r.total, 1.0));
    }

    #[test]
    fn exponents_for_two_three_five_orders() {
        let k = vec![1, 3, 2, 3, 1];
        let c = FiniteComplex::from_integer_stream(0, &[1, 1, 1, 1, 1], &[0, 1, 0, 0, 1, 0], k, stream(1)).unwrap();
        assert_eq!(c.minimal_exponents(), vec![6, 2, 3, 2, 6]);
        assert_eq!(c.kappa(&[6, 2, 3, 2, 6]), Ok(6));
        assert_eq!(c.kappa(&[6, 2, 3, 2, 5]), Err(TorsionError::ExponentConstraintViolated));
        assert!(c.telescoping_check(&c.minimal_n(), &c.minimal_exponents()).is_err());
    }

    #[test]
    fn validation_errors() {
        let g = vec![QMatrix::identity(1); 3];
        let d = vec![QMatrix::from_i64(1, 1, &[1]); 2];
        assert!(matches!(FiniteComplex::new(0, g.clone(), d, vec![1, 1]), Err(TorsionError::NotAComplex { degree: 0 })));
        let bad = vec![QMatrix::from_i64(1, 1, &[-1])];
        assert!(matches!(FiniteComplex::new(0, bad, vec![], vec![]), Err(TorsionError::NotPositiveDefinite { .. })));
        let c = two_term(2);
        let p = SpectralParams { n: vec![0, 2], ..c.default_params() };
        assert_eq!(c.zeta_prime_zero(&p), Err(TorsionError::ConstraintViolated));
        let r = vec![QMatrix::zeros(1, 0), QMatrix::from_i64(1, 1, &[1])];
        assert!(matches!(c.torsion_norm(&r, &c.default_params()), Err(TorsionError::InvalidRepresentatives { .. })));
    }

    #[test]
    fn cohomology_reference_and_duality() {
        let c = FiniteComplex::from_integer_stream(-1, &[1, 2, 1], &[1, 1, 0, 2], vec![1, 2, 1], stream(7)).unwrap();
        assert_eq!(c.betti(), vec![1, 1, 0, 2]);
        let reference = c.canonical_reference();
        let p = c.default_params();
        let r = c.torsion_norm(&reference, &p).unwrap();
        let exact = to_f64(r.exact_square.as_ref().unwrap()).sqrt();
        assert!(close(r.total, exact));
        let dual = c.dual_complex();
        let dr = c.dual_reference(&reference).unwrap();
        let rd = dual.torsion_norm(&dr, &dual.default_params()).unwrap();
        assert!(close(r.total * rd.total, 1.0));
        let shifted = c.shift(1).torsion_norm(&reference, &c.shift(1).default_params()).unwrap();
        assert!(close(r.total * shifted.total, 1.0));
        let report = c.invariance_report(&reference, &p).unwrap();
        assert!(report.all_hold(), "{report:?}");
    }

    #[test]
    fn exact_sqrt_of_squares() {
        assert_eq!(exact_sqrt(&Q::new(4.into(), 9.into())), Some(Q::new(2.into(), 3.into())));
        assert_eq!(exact_sqrt(&q(2)), None);
    }

    fn arb_complex() -> impl Strategy<Value = FiniteComplex> {
        (1usize..4, any::<u64>(), -2i32..3).prop_flat_map(|(len, seed, lo)| {
            (
                prop::collection::vec(0usize..3, len),
                prop::collection::vec(0usize..2, len + 1),
                prop::collection::vec(prop::sample::select(vec![1u64, 2, 3]), len),
            )
                .prop_map(move |(ranks, betti, k)| {
                    FiniteComplex::from_integer_stream(lo, &ranks, &betti, k, stream(seed)).unwrap()
                })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn numeric_and_exact_zeta_agree(c in arb_complex()) {
            let p = c.default_params();
            prop_assert!(close(c.zeta_prime_zero(&p).unwrap(), c.zeta_prime_zero_exact(&p.n, &p.a).unwrap()));
        }

        #[test]
        fn spectra_pair_and_euler_is_constant(c in arb_complex()) {
            prop_assert!(c.spectrum_pairing_check());
            let p = c.default_params();
            let chi: i64 = c.betti().iter().enumerate().map(|(qd, &b)| c.sign(qd) * b as i64).sum();
            prop_assert_eq!(chi, c.euler_characteristic());
            for t in [0.1, 1.0, 10.0] {
                prop_assert!(close(c.euler_heat_trace(&p.a, t).unwrap(), chi as f64));
            }
        }

        #[test]
        fn laplacians_commute_with_d(c in arb_complex()) {
            let (laps, _) = c.laplacians(&c.minimal_exponents()).unwrap();
            for (qd, d) in c.differentials().iter().enumerate() {
                prop_assert_eq!(d.matmul(&laps[qd]), laps[qd + 1].matmul(d));
                let g = &c.grams()[qd];
                prop_assert!(g.matmul(&laps[qd]).is_symmetric());
            }
        }

        #[test]
        fn zeta_zero_identity(c in arb_complex()) {
            let p = c.default_params();
            for lambda in std::iter::once(0.0).chain(c.midgap_cutoffs(&p.a).unwrap()) {
                let sp = SpectralParams { lambda, ..p.clone() };
                prop_assert_eq!(c.zeta_zero(&sp).unwrap(), c.zeta_zero_supertrace(&sp).unwrap());
            }
        }

        #[test]
        fn invariance_battery(c in arb_complex()) {
            let report = c.invariance_report(&c.canonical_reference(), &c.default_params()).unwrap();
            prop_assert!(report.all_hold(), "{:?}", report);
        }

        #[test]
        fn direct_sum_multiplies(c in arb_complex(), seed in any::<u64>()) {
            let ranks: Vec<usize> = c.ranks();
            let betti = c.betti();
            let other = FiniteComplex::from_integer_stream(c.lowest_degree(), &ranks, &betti, c.k().to_vec(), stream(seed)).unwrap();
            let sum = c.direct_sum(&other).unwrap();
            let t = |x: &FiniteComplex| x.torsion_norm(&x.canonical_reference(), &x.default_params()).unwrap().total;
            let refs: Vec<QMatrix> = c.canonical_reference().iter().zip(other.canonical_reference())
                .map(|(x, y)| {
                    let top = x.hstack(&QMatrix::zeros(x.nrows(), y.ncols()));
                    top.vstack(&QMatrix::zeros(y.nrows(), x.ncols()).hstack(&y))
                })
                .collect();
            let ts = sum.torsion_norm(&refs, &sum.default_params()).unwrap().total;
            prop_assert!(close(ts, t(&c) * t(&other)));
        }

        #[test]
        fn acyclic_telescoping_and_cross_oracle(seed in any::<u64>(), which in 0usize..3) {
            let (ranks, k): (Vec<usize>, Vec<u64>) = match which {
                0 => (vec![2, 1], vec![1, 1]),
                1 => (vec![1, 2, 1], vec![1, 2, 1]),
                _ => (vec![1, 1, 2, 1, 1], vec![1, 3, 2, 3, 1]),
            };
            let betti = vec![0; ranks.len() + 1];
            let c = FiniteComplex::from_integer_stream(0, &ranks, &betti, k, stream(seed)).unwrap();
            prop_assert!(c.telescoping_check(&c.minimal_n(), &c.minimal_exponents()).unwrap());
            let r = c.torsion_norm(&c.canonical_reference(), &c.default_params()).unwrap();
            prop_assert!(close(r.total, c.acyclic_torsion().unwrap()));
            prop_assert!(c.z2_check(&c.default_params()).unwrap().holds);
        }
    }
}
