//! Graded nilpotent Lie algebras given by structure constants.
//!
//! Basis vectors X₁,…,X_m carry strictly negative degrees and
//! `[X_i, X_j] = Σ_k c^k_{ij} X_k`. Indices are zero-based in the API;
//! error messages print them one-based to match the usual X₁,…,X_m naming.

use std::collections::hash_map::DefaultHasher;
use std::collections::BTreeMap;
use std::hash::{Hash, Hasher};

use num_traits::{One, Zero};

use crate::linalg::QMatrix;
use crate::rational::{pow_i, q, Q};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GradedLieError {
    #[error("EmptyAlgebra: algebra must have positive dimension")]
    EmptyAlgebra,
    #[error("DegreeNotNegative: degree of X{index} is {degree}, degrees must be strictly negative")]
    DegreeNotNegative { index: usize, degree: i32 },
    #[error("IndexOutOfRange: basis index {index} out of range 1..={dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("AntisymmetryViolation: brackets [X{i},X{j}] and [X{j},X{i}] are not negatives of each other")]
    AntisymmetryViolation { i: usize, j: usize },
    #[error("GradingViolation: [X{i},X{j}] has a component along X{k} of the wrong degree")]
    GradingViolation { i: usize, j: usize, k: usize },
    #[error("JacobiViolation: Jacobi identity fails for (X{i},X{j},X{k})")]
    JacobiViolation { i: usize, j: usize, k: usize },
    #[error("NotNilpotent: lower central series does not terminate")]
    NotNilpotent,
    #[error("ZeroScale: grading automorphism needs a non-zero scale")]
    ZeroScale,
    #[error("DegenerateGenerators: the degree -1 parts of the generators are linearly dependent")]
    DegenerateGenerators,
    #[error("DependentVectors: the two vectors are linearly dependent")]
    DependentVectors,
    #[error("NotTwoThreeFive: operation requires the (2,3,5) algebra")]
    NotTwoThreeFive,
    #[error("DimensionMismatch: vector has length {found}, expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("NotAnAutomorphism: matrix is not an automorphism: fails on the pair (X{i},X{j})")]
    NotAnAutomorphism { i: usize, j: usize },
    #[error("Singular: matrix is not invertible")]
    Singular,
}

/// One row of a structure-constant table: `[X_i, X_j] = Σ c·X_k`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BracketSpec {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<(usize, Q)>,
}

impl BracketSpec {
    pub fn new(i: usize, j: usize, terms: Vec<(usize, Q)>) -> Self {
        BracketSpec { i, j, terms }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedLieAlgebra {
    degrees: Vec<i32>,
    /// `(i, j) ↦ [X_i, X_j]` for `i < j`, zero entries omitted.
    brackets: BTreeMap<(usize, usize), Vec<(usize, Q)>>,
}

impl GradedLieAlgebra {
    /// Validates a structure-constant table and builds the algebra.
    pub fn build(degrees: Vec<i32>, spec: &[BracketSpec]) -> Result<Self, GradedLieError> {
        let dim = degrees.len();
        if dim == 0 {
            return Err(GradedLieError::EmptyAlgebra);
        }
        if let Some((index, &degree)) = degrees.iter().enumerate().find(|(_, &d)| d >= 0) {
            return Err(GradedLieError::DegreeNotNegative { index: index + 1, degree });
        }
        let check = |index: usize| {
            if index < dim {
                Ok(())
            } else {
                Err(GradedLieError::IndexOutOfRange { index: index + 1, dim })
            }
        };
        // Accumulate every given entry into its (i<j) slot, tracking both orders.
        let mut given: BTreeMap<(usize, usize), Vec<Q>> = BTreeMap::new();
        let mut seen_reversed: BTreeMap<(usize, usize), Vec<Q>> = BTreeMap::new();
        for b in spec {
            check(b.i)?;
            check(b.j)?;
            let mut v = vec![Q::zero(); dim];
            for (k, c) in &b.terms {
                check(*k)?;
                v[*k] += c;
            }
            if b.i == b.j {
                if v.iter().any(|c| !c.is_zero()) {
                    return Err(GradedLieError::AntisymmetryViolation { i: b.i + 1, j: b.j + 1 });
                }
                continue;
            }
            let (key, table) = if b.i < b.j {
                ((b.i, b.j), &mut given)
            } else {
                ((b.j, b.i), &mut seen_reversed)
            };
            let slot = table.entry(key).or_insert_with(|| vec![Q::zero(); dim]);
            for k in 0..dim {
                slot[k] += &v[k];
            }
        }
        let mut dense: BTreeMap<(usize, usize), Vec<Q>> = given.clone();
        for (key, rev) in &seen_reversed {
            match given.get(key) {
                Some(fwd) => {
                    if fwd.iter().zip(rev).any(|(a, b)| *a != -b.clone()) {
                        return Err(GradedLieError::AntisymmetryViolation { i: key.0 + 1, j: key.1 + 1 });
                    }
                }
                None => {
                    dense.insert(*key, rev.iter().map(|c| -c.clone()).collect());
                }
            }
        }
        for (&(i, j), v) in &dense {
            for (k, c) in v.iter().enumerate() {
                if !c.is_zero() && degrees[k] != degrees[i] + degrees[j] {
                    return Err(GradedLieError::GradingViolation { i: i + 1, j: j + 1, k: k + 1 });
                }
            }
        }
        let brackets = dense
            .into_iter()
            .filter_map(|(key, v)| {
                let terms: Vec<(usize, Q)> =
                    v.into_iter().enumerate().filter(|(_, c)| !c.is_zero()).collect();
                (!terms.is_empty()).then_some((key, terms))
            })
            .collect();
        let alg = GradedLieAlgebra { degrees, brackets };
        alg.check_jacobi()?;
        if !alg.lower_central_series_terminates() {
            return Err(GradedLieError::NotNilpotent);
        }
        Ok(alg)
    }

    fn check_jacobi(&self) -> Result<(), GradedLieError> {
        let m = self.dim();
        for i in 0..m {
            for j in i + 1..m {
                for k in j + 1..m {
                    let mut e = vec![Q::zero(); m];
                    for (a, b, c) in [(i, j, k), (j, k, i), (k, i, j)] {
                        let inner = self.bracket_basis(b, c);
                        let outer = self.bracket_vec(&unit(m, a), &inner);
                        for t in 0..m {
                            e[t] += &outer[t];
                        }
                    }
                    if e.iter().any(|c| !c.is_zero()) {
                        return Err(GradedLieError::JacobiViolation { i: i + 1, j: j + 1, k: k + 1 });
                    }
                }
            }
        }
        Ok(())
    }

    fn lower_central_series_terminates(&self) -> bool {
        let m = self.dim();
        let mut current = QMatrix::identity(m);
        for _ in 0..=m {
            if current.ncols() == 0 {
                return true;
            }
            let mut cols = Vec::new();
            for i in 0..m {
                for c in current.columns() {
                    cols.push(self.bracket_vec(&unit(m, i), &c));
                }
            }
            current = QMatrix::from_columns(m, &cols).column_space();
        }
        current.ncols() == 0
    }

    /// The (2,3,5) algebra: `[X1,X2]=X3, [X1,X3]=X4, [X2,X3]=X5`.
    pub fn two_three_five() -> Self {
        Self::build(
            vec![-1, -1, -2, -3, -3],
            &[
                BracketSpec::new(0, 1, vec![(2, q(1))]),
                BracketSpec::new(0, 2, vec![(3, q(1))]),
                BracketSpec::new(1, 2, vec![(4, q(1))]),
            ],
        )
        .expect("the (2,3,5) table is valid")
    }

    /// Heisenberg algebra of dimension 2n+1 with `[X_i, X_{n+i}] = X_{2n+1}`.
    pub fn heisenberg(n: usize) -> Self {
        assert!(n >= 1);
        let mut degrees = vec![-1; 2 * n];
        degrees.push(-2);
        let spec: Vec<BracketSpec> =
            (0..n).map(|i| BracketSpec::new(i, n + i, vec![(2 * n, q(1))])).collect();
        Self::build(degrees, &spec).expect("Heisenberg table is valid")
    }

    /// Abelian algebra of dimension m concentrated in one negative degree.
    pub fn abelian(m: usize, degree: i32) -> Result<Self, GradedLieError> {
        Self::build(vec![degree; m], &[])
    }

    /// Direct sum, with the basis of `other` appended after that of `self`.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let shift = self.dim();
        let mut degrees = self.degrees.clone();
        degrees.extend(&other.degrees);
        let mut brackets = self.brackets.clone();
        for (&(i, j), terms) in &other.brackets {
            brackets.insert(
                (i + shift, j + shift),
                terms.iter().map(|(k, c)| (k + shift, c.clone())).collect(),
            );
        }
        GradedLieAlgebra { degrees, brackets }
    }

    pub fn dim(&self) -> usize {
        self.degrees.len()
    }

    pub fn degrees(&self) -> &[i32] {
        &self.degrees
    }

    /// Entries `((i, j), [X_i, X_j])` with `i < j`, zero brackets omitted.
    pub fn bracket_table(&self) -> impl Iterator<Item = (&(usize, usize), &Vec<(usize, Q)>)> {
        self.brackets.iter()
    }

    /// `[X_i, X_j]` as a sparse list of `(k, c^k_{ij})`.
    pub fn bracket_terms(&self, i: usize, j: usize) -> Vec<(usize, Q)> {
        if i < j {
            self.brackets.get(&(i, j)).cloned().unwrap_or_default()
        } else if i > j {
            self.brackets
                .get(&(j, i))
                .map(|t| t.iter().map(|(k, c)| (*k, -c.clone())).collect())
                .unwrap_or_default()
        } else {
            Vec::new()
        }
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> Q {
        self.bracket_terms(i, j)
            .into_iter()
            .find(|(kk, _)| *kk == k)
            .map_or_else(Q::zero, |(_, c)| c)
    }

    pub fn bracket_basis(&self, i: usize, j: usize) -> Vec<Q> {
        let mut v = vec![Q::zero(); self.dim()];
        for (k, c) in self.bracket_terms(i, j) {
            v[k] = c;
        }
        v
    }

    pub fn bracket_vec(&self, x: &[Q], y: &[Q]) -> Vec<Q> {
        let m = self.dim();
        let mut out = vec![Q::zero(); m];
        for (&(i, j), terms) in &self.brackets {
            let coeff = &x[i] * &y[j] - &x[j] * &y[i];
            if coeff.is_zero() {
                continue;
            }
            for (k, c) in terms {
                out[*k] += &coeff * c;
            }
        }
        out
    }

    /// Homogeneous dimension Σ_k k·dim 𝔤₋ₖ.
    pub fn homogeneous_dimension(&self) -> u64 {
        self.degrees.iter().map(|d| d.unsigned_abs() as u64).sum()
    }

    /// Grading dimensions `(n₁,…,n_r)` with `n_p = dim 𝔤₋ₚ` and `n_r > 0`.
    pub fn dimension_vector(&self) -> Vec<u64> {
        let r = self.degrees.iter().map(|d| d.unsigned_abs()).max().unwrap_or(0) as usize;
        let mut n = vec![0u64; r];
        for d in &self.degrees {
            n[d.unsigned_abs() as usize - 1] += 1;
        }
        n
    }

    /// Stable digest of the structure constants, used to tag derived objects.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.degrees.hash(&mut h);
        self.brackets.hash(&mut h);
        h.finish()
    }

    pub fn is_two_three_five(&self) -> bool {
        *self == Self::two_three_five()
    }

    /// Basis of the derived algebra [𝔤,𝔤], as columns.
    pub fn derived_algebra(&self) -> QMatrix {
        let cols: Vec<Vec<Q>> = self
            .brackets
            .keys()
            .map(|&(i, j)| self.bracket_basis(i, j))
            .collect();
        QMatrix::from_columns(self.dim(), &cols).column_space()
    }
}

fn unit(m: usize, i: usize) -> Vec<Q> {
    let mut v = vec![Q::zero(); m];
    v[i] = Q::one();
    v
}

/// A Lie algebra automorphism; column `j` of `matrix` holds φ(X_j).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GradedAutomorphism {
    pub matrix: QMatrix,
    pub graded: bool,
}

impl GradedAutomorphism {
    /// Checks invertibility and `φ[X_i,X_j] = [φX_i, φX_j]`.
    pub fn new(alg: &GradedLieAlgebra, matrix: QMatrix) -> Result<Self, GradedLieError> {
        let m = alg.dim();
        if matrix.nrows() != m || matrix.ncols() != m {
            return Err(GradedLieError::DimensionMismatch { expected: m, found: matrix.nrows() });
        }
        if matrix.det().is_zero() {
            return Err(GradedLieError::Singular);
        }
        let images = matrix.columns();
        for i in 0..m {
            for j in i + 1..m {
                let lhs = matrix.apply(&alg.bracket_basis(i, j));
                let rhs = alg.bracket_vec(&images[i], &images[j]);
                if lhs != rhs {
                    return Err(GradedLieError::NotAnAutomorphism { i: i + 1, j: j + 1 });
                }
            }
        }
        let degrees = alg.degrees();
        let graded = (0..m).all(|i| (0..m).all(|j| degrees[i] == degrees[j] || matrix[(i, j)].is_zero()));
        Ok(GradedAutomorphism { matrix, graded })
    }

    pub fn identity(alg: &GradedLieAlgebra) -> Self {
        GradedAutomorphism { matrix: QMatrix::identity(alg.dim()), graded: true }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Self) -> Self {
        GradedAutomorphism {
            matrix: self.matrix.matmul(&other.matrix),
            graded: self.graded && other.graded,
        }
    }

    pub fn inverse(&self) -> Self {
        GradedAutomorphism {
            matrix: self.matrix.inverse().expect("automorphisms are invertible"),
            graded: self.graded,
        }
    }

    pub fn apply(&self, v: &[Q]) -> Vec<Q> {
        self.matrix.apply(v)
    }
}

/// φ_t, multiplying 𝔤₋ₖ by t^k.
pub fn grading_automorphism(alg: &GradedLieAlgebra, t: &Q) -> Result<GradedAutomorphism, GradedLieError> {
    if t.is_zero() {
        return Err(GradedLieError::ZeroScale);
    }
    let diag: Vec<Q> = alg.degrees().iter().map(|d| pow_i(t, -(*d as i64))).collect();
    Ok(GradedAutomorphism { matrix: QMatrix::diagonal(&diag), graded: true })
}

/// The automorphism of the (2,3,5) algebra with φ(X1)=Y1, φ(X2)=Y2.
pub fn automorphism_from_generators(
    alg: &GradedLieAlgebra,
    y1: &[Q],
    y2: &[Q],
) -> Result<GradedAutomorphism, GradedLieError> {
    if !alg.is_two_three_five() {
        return Err(GradedLieError::NotTwoThreeFive);
    }
    for y in [y1, y2] {
        if y.len() != 5 {
            return Err(GradedLieError::DimensionMismatch { expected: 5, found: y.len() });
        }
    }
    if (&y1[0] * &y2[1] - &y1[1] * &y2[0]).is_zero() {
        return Err(GradedLieError::DegenerateGenerators);
    }
    let y3 = alg.bracket_vec(y1, y2);
    let y4 = alg.bracket_vec(y1, &y3);
    let y5 = alg.bracket_vec(y2, &y3);
    let matrix = QMatrix::from_columns(5, &[y1.to_vec(), y2.to_vec(), y3, y4, y5]);
    GradedAutomorphism::new(alg, matrix)
}

/// Whether span(v1, v2) meets [𝔤,𝔤] only in zero.
pub fn is_generic_plane(alg: &GradedLieAlgebra, v1: &[Q], v2: &[Q]) -> Result<bool, GradedLieError> {
    let m = alg.dim();
    for v in [v1, v2] {
        if v.len() != m {
            return Err(GradedLieError::DimensionMismatch { expected: m, found: v.len() });
        }
    }
    let plane = QMatrix::from_columns(m, &[v1.to_vec(), v2.to_vec()]);
    if plane.rank() < 2 {
        return Err(GradedLieError::DependentVectors);
    }
    let derived = alg.derived_algebra();
    Ok(plane.hstack(&derived).rank() == 2 + derived.ncols())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::frac;
    use proptest::prelude::*;

    fn e(i: usize) -> Vec<Q> {
        unit(5, i)
    }

    fn add(a: &[Q], b: &[Q]) -> Vec<Q> {
        a.iter().zip(b).map(|(x, y)| x + y).collect()
    }

    #[test]
    fn presets_are_valid() {
        let g = GradedLieAlgebra::two_three_five();
        assert_eq!(g.dim(), 5);
        assert_eq!(g.homogeneous_dimension(), 10);
        assert_eq!(g.dimension_vector(), vec![2, 1, 2]);
        assert_eq!(GradedLieAlgebra::heisenberg(1).degrees(), &[-1, -1, -2]);
        assert_eq!(GradedLieAlgebra::abelian(3, -1).unwrap().bracket_table().count(), 0);
    }

    #[test]
    fn reversed_entries_are_accepted_when_consistent() {
        let g = GradedLieAlgebra::build(
            vec![-1, -1, -2],
            &[BracketSpec::new(1, 0, vec![(2, q(-1))]), BracketSpec::new(0, 1, vec![(2, q(1))])],
        )
        .unwrap();
        assert_eq!(g, GradedLieAlgebra::heisenberg(1));
    }

    #[test]
    fn named_errors() {
        let r = GradedLieAlgebra::build(
            vec![-1, -1, -2],
            &[BracketSpec::new(0, 1, vec![(2, q(1))]), BracketSpec::new(1, 0, vec![(2, q(1))])],
        );
        assert_eq!(r, Err(GradedLieError::AntisymmetryViolation { i: 1, j: 2 }));
        let r = GradedLieAlgebra::build(vec![-1, -1, -1], &[BracketSpec::new(0, 1, vec![(2, q(1))])]);
        assert_eq!(r, Err(GradedLieError::GradingViolation { i: 1, j: 2, k: 3 }));
        let r = GradedLieAlgebra::build(vec![-1, 0], &[]);
        assert_eq!(r, Err(GradedLieError::DegreeNotNegative { index: 2, degree: 0 }));
        let r = GradedLieAlgebra::build(vec![-1], &[BracketSpec::new(0, 3, vec![])]);
        assert_eq!(r, Err(GradedLieError::IndexOutOfRange { index: 4, dim: 1 }));
    }

    #[test]
    fn jacobi_violation_is_detected() {
        // Degrees -1,-1,-1,-2,-3 with [X1,X2]=X4, [X3,X4]=X5 but no compensating brackets.
        let r = GradedLieAlgebra::build(
            vec![-1, -1, -1, -2, -3],
            &[
                BracketSpec::new(0, 1, vec![(3, q(1))]),
                BracketSpec::new(2, 3, vec![(4, q(1))]),
                BracketSpec::new(1, 2, vec![(3, q(1))]),
            ],
        );
        assert!(matches!(r, Err(GradedLieError::JacobiViolation { .. })));
    }

    #[test]
    fn grading_automorphism_examples() {
        let g = GradedLieAlgebra::two_three_five();
        assert_eq!(grading_automorphism(&g, &q(1)).unwrap().matrix, QMatrix::identity(5));
        let r = frac(3, 2);
        let phi = grading_automorphism(&g, &r).unwrap();
        let expect = [r.clone(), r.clone(), &r * &r, &r * &r * &r, &r * &r * &r];
        assert_eq!(phi.matrix, QMatrix::diagonal(&expect));
        assert!(GradedAutomorphism::new(&g, phi.matrix.clone()).is_ok());
        let h = GradedLieAlgebra::heisenberg(1);
        assert_eq!(grading_automorphism(&h, &q(2)).unwrap().matrix, QMatrix::diagonal(&[q(2), q(2), q(4)]));
        assert_eq!(grading_automorphism(&h, &q(0)), Err(GradedLieError::ZeroScale));
    }

    #[test]
    fn swap_automorphism() {
        let g = GradedLieAlgebra::two_three_five();
        let phi = automorphism_from_generators(&g, &e(1), &e(0)).unwrap();
        let neg = |i| e(i).iter().map(|c: &Q| -c.clone()).collect::<Vec<_>>();
        assert_eq!(phi.matrix.column(2), neg(2));
        assert_eq!(phi.matrix.column(3), neg(4));
        assert_eq!(phi.matrix.column(4), neg(3));
        assert!(phi.graded);
    }

    #[test]
    fn shifted_generator_automorphism() {
        let g = GradedLieAlgebra::two_three_five();
        assert_eq!(automorphism_from_generators(&g, &e(0), &e(1)).unwrap().matrix, QMatrix::identity(5));
        let phi = automorphism_from_generators(&g, &add(&e(0), &e(2)), &e(1)).unwrap();
        // [X1+X3, X2] = X3 + [X3,X2] = X3 - X5.
        let x5: Vec<Q> = e(4).iter().map(|c| -c.clone()).collect();
        assert_eq!(phi.matrix.column(2), add(&e(2), &x5));
        assert!(!phi.graded);
        for i in 0..5 {
            assert!(phi.matrix[(i, i)].is_one());
            for j in i + 1..5 {
                assert!(phi.matrix[(i, j)].is_zero());
            }
        }
        let degenerate = automorphism_from_generators(&g, &e(0), &add(&e(0), &e(3)));
        assert_eq!(degenerate, Err(GradedLieError::DegenerateGenerators));
    }

    #[test]
    fn generic_planes() {
        let g = GradedLieAlgebra::two_three_five();
        assert_eq!(is_generic_plane(&g, &e(0), &e(1)), Ok(true));
        assert_eq!(is_generic_plane(&g, &e(0), &e(2)), Ok(false));
        assert_eq!(is_generic_plane(&g, &add(&e(0), &e(3)), &add(&e(1), &e(4))), Ok(true));
        assert_eq!(is_generic_plane(&g, &e(0), &e(0)), Err(GradedLieError::DependentVectors));
    }

    fn small_q() -> impl Strategy<Value = Q> {
        (-6i64..=6, 1i64..=4).prop_map(|(n, d)| frac(n, d))
    }

    fn nonzero_q() -> impl Strategy<Value = Q> {
        small_q().prop_filter("non-zero", |x| !x.is_zero())
    }

    proptest! {
        #[test]
        fn grading_automorphisms_compose(s in nonzero_q(), t in nonzero_q()) {
            let g = GradedLieAlgebra::two_three_five();
            let a = grading_automorphism(&g, &s).unwrap();
            let b = grading_automorphism(&g, &t).unwrap();
            prop_assert_eq!(a.compose(&b), grading_automorphism(&g, &(&s * &t)).unwrap());
        }

        #[test]
        fn automorphisms_are_determined_by_generators(
            a in proptest::collection::vec(small_q(), 10),
            b in proptest::collection::vec(small_q(), 10),
        ) {
            let g = GradedLieAlgebra::two_three_five();
            let (y1, y2) = (&a[..5], &a[5..]);
            let (z1, z2) = (&b[..5], &b[5..]);
            let Ok(phi) = automorphism_from_generators(&g, y1, y2) else { return Ok(()) };
            let Ok(psi) = automorphism_from_generators(&g, z1, z2) else { return Ok(()) };
            let direct = automorphism_from_generators(&g, &phi.apply(z1), &phi.apply(z2)).unwrap();
            prop_assert_eq!(phi.compose(&psi).matrix, direct.matrix);
        }

        #[test]
        fn broken_grading_is_reported(k in 0usize..5) {
            // Add a wrong-degree component to [X1,X2]=X3.
            prop_assume!(k != 2);
            let spec = vec![
                BracketSpec::new(0, 1, vec![(2, q(1)), (k, q(1))]),
                BracketSpec::new(0, 2, vec![(3, q(1))]),
                BracketSpec::new(1, 2, vec![(4, q(1))]),
            ];
            let r = GradedLieAlgebra::build(vec![-1, -1, -2, -3, -3], &spec);
            prop_assert_eq!(r, Err(GradedLieError::GradingViolation { i: 1, j: 2, k: k + 1 }));
        }
    }
}
