//! Dense complex linear algebra for small composite quantum systems.
//!
//! Composite bases use row-major tensor ordering: in `a ⊗ b` the index of `a`
//! varies slowest, so basis state `|i⟩|j⟩` sits at `i * b.dim() + j`.

use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;

use crate::{Complex, Error, Result};

/// Largest composite dimension accepted by [`tensor`] unless overridden.
pub const DEFAULT_MAX_DIM: usize = 4096;

/// Tolerance on `|A_ij - conj(A_ji)|` for an operator to count as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Largest imaginary part of an expectation value that is silently dropped.
pub const IMAGINARY_RESIDUE_TOL: f64 = 1e-10;

const ZERO: Complex = Complex::new(0.0, 0.0);
const ONE: Complex = Complex::new(1.0, 0.0);

/// A finite-dimensional ket.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexStateVector {
    amps: Vec<Complex>,
}

impl ComplexStateVector {
    pub fn new(amps: Vec<Complex>) -> Result<Self> {
        if amps.is_empty() {
            return Err(Error::invalid("state vector must have dimension >= 1"));
        }
        if amps.len() > DEFAULT_MAX_DIM {
            return Err(Error::Capacity { requested: amps.len(), max: DEFAULT_MAX_DIM });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(Error::invalid("state vector has non-finite amplitude"));
        }
        Ok(Self { amps })
    }

    pub fn from_real(amps: &[f64]) -> Result<Self> {
        Self::new(amps.iter().map(|&a| Complex::new(a, 0.0)).collect())
    }

    /// The computational basis vector `|index⟩`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        if index >= dim {
            return Err(Error::invalid("basis index out of range"));
        }
        let mut amps = vec![ZERO; dim];
        amps[index] = ONE;
        Self::new(amps)
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &[Complex] {
        &self.amps
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex] {
        &mut self.amps
    }

    pub fn into_amplitudes(self) -> Vec<Complex> {
        self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Rescales to unit norm. Fails on the zero vector.
    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::invalid("cannot normalize a zero or non-finite vector"));
        }
        let inv = 1.0 / n;
        for a in &mut self.amps {
            *a *= inv;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// `|amplitude|²` per basis state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &ComplexStateVector, b: &ComplexStateVector) -> Result<Complex> {
    check_dim(a.dim(), b.dim())?;
    Ok(dot(a.amplitudes(), b.amplitudes()))
}

pub(crate) fn dot(a: &[Complex], b: &[Complex]) -> Complex {
    a.iter().zip(b).fold(ZERO, |acc, (x, y)| acc + x.conj() * y)
}

/// Tensor product with the default capacity limit.
pub fn tensor(a: &ComplexStateVector, b: &ComplexStateVector) -> Result<ComplexStateVector> {
    tensor_with_capacity(a, b, DEFAULT_MAX_DIM)
}

pub fn tensor_with_capacity(
    a: &ComplexStateVector,
    b: &ComplexStateVector,
    max_dim: usize,
) -> Result<ComplexStateVector> {
    let requested = a.dim().saturating_mul(b.dim());
    if requested > max_dim.min(DEFAULT_MAX_DIM) {
        return Err(Error::Capacity { requested, max: max_dim.min(DEFAULT_MAX_DIM) });
    }
    let mut amps = Vec::with_capacity(requested);
    for x in a.amplitudes() {
        for y in b.amplitudes() {
            amps.push(x * y);
        }
    }
    ComplexStateVector::new(amps)
}

/// Matrix-vector product `op |psi⟩`.
pub fn apply(op: &DenseOperator, psi: &ComplexStateVector) -> Result<ComplexStateVector> {
    check_dim(op.dim(), psi.dim())?;
    let mut out = vec![ZERO; op.dim()];
    op.apply_into(psi.amplitudes(), &mut out);
    ComplexStateVector::new(out)
}

/// `⟨psi|op|psi⟩` for a Hermitian operator and a normalized state.
pub fn expectation(op: &DenseOperator, psi: &ComplexStateVector) -> Result<f64> {
    check_dim(op.dim(), psi.dim())?;
    if !op.is_hermitian() {
        return Err(Error::NotHermitian { residual: op.hermitian_residual() });
    }
    let mut tmp = vec![ZERO; op.dim()];
    op.apply_into(psi.amplitudes(), &mut tmp);
    let value = dot(psi.amplitudes(), &tmp);
    if value.im.abs() > IMAGINARY_RESIDUE_TOL {
        return Err(Error::ImaginaryResidue { residual: value.im.abs() });
    }
    Ok(value.re)
}

fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// Square complex matrix stored row-major.
///
/// Diagonal operators are detected at construction and applied in O(dim).
#[derive(Debug, Clone, PartialEq)]
pub struct DenseOperator {
    dim: usize,
    entries: Vec<Complex>,
    hermitian: bool,
    diagonal: Option<Vec<Complex>>,
}

impl DenseOperator {
    /// A general (not necessarily Hermitian) operator. The Hermitian flag is
    /// set when the entries happen to satisfy the Hermitian tolerance.
    pub fn new(dim: usize, entries: Vec<Complex>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("operator dimension must be >= 1"));
        }
        if dim > DEFAULT_MAX_DIM {
            return Err(Error::Capacity { requested: dim, max: DEFAULT_MAX_DIM });
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch { expected: dim * dim, found: entries.len() });
        }
        let mut op = Self { dim, entries, hermitian: false, diagonal: None };
        op.hermitian = op.hermitian_residual() < HERMITIAN_TOL;
        op.diagonal = op.detect_diagonal();
        Ok(op)
    }

    /// Like [`DenseOperator::new`] but rejects non-Hermitian input.
    pub fn hermitian(dim: usize, entries: Vec<Complex>) -> Result<Self> {
        let op = Self::new(dim, entries)?;
        if !op.hermitian {
            return Err(Error::NotHermitian { residual: op.hermitian_residual() });
        }
        Ok(op)
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            entries.extend(row.iter().map(|&x| Complex::new(x, 0.0)));
        }
        Self::new(dim, entries)
    }

    pub fn diag(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut entries = vec![ZERO; dim * dim];
        for (i, &v) in values.iter().enumerate() {
            entries[i * dim + i] = Complex::new(v, 0.0);
        }
        Self::new(dim, entries)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::diag(&vec![1.0; dim])
    }

    pub fn zero(dim: usize) -> Result<Self> {
        Self::new(dim, vec![ZERO; dim * dim])
    }

    pub fn pauli_x() -> Self {
        Self::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]).expect("static shape")
    }

    pub fn pauli_z() -> Self {
        Self::diag(&[1.0, -1.0]).expect("static shape")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn is_diagonal(&self) -> bool {
        self.diagonal.is_some()
    }

    pub fn entries(&self) -> &[Complex] {
        &self.entries
    }

    pub fn get(&self, row: usize, col: usize) -> Complex {
        self.entries[row * self.dim + col]
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == ZERO)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                let d = (self.get(i, j) - self.get(j, i).conj()).norm();
                worst = worst.max(d);
            }
        }
        worst
    }

    fn detect_diagonal(&self) -> Option<Vec<Complex>> {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                if i != j && self.get(i, j) != ZERO {
                    return None;
                }
            }
        }
        Some((0..n).map(|i| self.get(i, i)).collect())
    }

    /// `out = A x`. Lengths must already match.
    pub(crate) fn apply_into(&self, x: &[Complex], out: &mut [Complex]) {
        if let Some(d) = &self.diagonal {
            for ((o, di), xi) in out.iter_mut().zip(d).zip(x) {
                *o = di * xi;
            }
            return;
        }
        for (row, o) in self.entries.chunks_exact(self.dim).zip(out.iter_mut()) {
            *o = row.iter().zip(x).fold(ZERO, |acc, (a, b)| acc + a * b);
        }
    }

    pub fn matmul(&self, other: &DenseOperator) -> Result<DenseOperator> {
        check_dim(self.dim, other.dim)?;
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[i * n + j] += a * other.get(k, j);
                }
            }
        }
        DenseOperator::new(n, out)
    }

    pub fn add(&self, other: &DenseOperator) -> Result<DenseOperator> {
        check_dim(self.dim, other.dim)?;
        let entries = self.entries.iter().zip(&other.entries).map(|(a, b)| a + b).collect();
        DenseOperator::new(self.dim, entries)
    }

    pub fn scale(&self, factor: Complex) -> DenseOperator {
        let entries = self.entries.iter().map(|a| a * factor).collect();
        DenseOperator::new(self.dim, entries).expect("same shape")
    }

    /// Kronecker product, same ordering convention as [`tensor`].
    pub fn kron(&self, other: &DenseOperator) -> Result<DenseOperator> {
        let n = self.dim * other.dim;
        if n > DEFAULT_MAX_DIM {
            return Err(Error::Capacity { requested: n, max: DEFAULT_MAX_DIM });
        }
        let mut out = vec![ZERO; n * n];
        for i in 0..self.dim {
            for j in 0..self.dim {
                let a = self.get(i, j);
                if a == ZERO {
                    continue;
                }
                for k in 0..other.dim {
                    for l in 0..other.dim {
                        let row = i * other.dim + k;
                        let col = j * other.dim + l;
                        out[row * n + col] = a * other.get(k, l);
                    }
                }
            }
        }
        DenseOperator::new(n, out)
    }

    /// Largest entry magnitude of `AB - BA`.
    pub fn commutator_norm(&self, other: &DenseOperator) -> Result<f64> {
        let ab = self.matmul(other)?;
        let ba = other.matmul(self)?;
        Ok(ab.entries.iter().zip(&ba.entries).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max))
    }
}

/// Eigen-decomposition of a Hermitian operator by cyclic complex Jacobi
/// rotations. Eigenvalues come back ascending with matching orthonormal
/// eigenvectors.
pub fn hermitian_eigen(op: &DenseOperator) -> Result<(Vec<f64>, Vec<ComplexStateVector>)> {
    if !op.is_hermitian() {
        return Err(Error::NotHermitian { residual: op.hermitian_residual() });
    }
    let n = op.dim();
    let mut a = op.entries.clone();
    let mut v = vec![ZERO; n * n];
    for i in 0..n {
        v[i * n + i] = ONE;
    }
    let scale = a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);

    for _sweep in 0..100 {
        let mut off = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    off += a[i * n + j].norm_sqr();
                }
            }
        }
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                let r = apq.norm();
                if r <= 1e-300 {
                    continue;
                }
                let phase = apq / r; // e^{iφ}
                let app = a[p * n + p].re;
                let aqq = a[q * n + q].re;
                let tau = (aqq - app) / (2.0 * r);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // G restricted to (p, q): [[c, s], [-s e^{-iφ}, c e^{-iφ}]].
                let em = phase.conj();
                rotate_columns(&mut a, n, p, q, c, s, em);
                rotate_rows(&mut a, n, p, q, c, s, em);
                rotate_columns(&mut v, n, p, q, c, s, em);
                a[p * n + q] = ZERO;
                a[q * n + p] = ZERO;
                a[p * n + p] = Complex::new(a[p * n + p].re, 0.0);
                a[q * n + q] = Complex::new(a[q * n + q].re, 0.0);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let values = order.iter().map(|&i| a[i * n + i].re).collect();
    let vectors = order
        .iter()
        .map(|&col| ComplexStateVector::new((0..n).map(|row| v[row * n + col]).collect()))
        .collect::<Result<Vec<_>>>()?;
    Ok((values, vectors))
}

fn rotate_columns(m: &mut [Complex], n: usize, p: usize, q: usize, c: f64, s: f64, em: Complex) {
    for row in 0..n {
        let mp = m[row * n + p];
        let mq = m[row * n + q];
        m[row * n + p] = mp * c - mq * em * s;
        m[row * n + q] = mp * s + mq * em * c;
    }
}

fn rotate_rows(m: &mut [Complex], n: usize, p: usize, q: usize, c: f64, s: f64, em: Complex) {
    let ep = em.conj();
    for col in 0..n {
        let mp = m[p * n + col];
        let mq = m[q * n + col];
        m[p * n + col] = mp * c - mq * ep * s;
        m[q * n + col] = mp * s + mq * ep * c;
    }
}

/// One joint eigenspace of a family of commuting Hermitian operators.
#[derive(Debug, Clone, PartialEq)]
pub struct JointEigenspace {
    /// Eigenvalue of each operator on this subspace, in operator order.
    pub values: Vec<f64>,
    /// Orthonormal basis of the subspace.
    pub basis: Vec<ComplexStateVector>,
}

impl JointEigenspace {
    /// `⟨psi|P|psi⟩` for the orthogonal projector onto this subspace.
    pub fn projector_expectation(&self, psi: &[Complex]) -> f64 {
        self.basis.iter().map(|b| dot(b.amplitudes(), psi).norm_sqr()).sum()
    }
}

/// Splits the space into joint eigenspaces of commuting Hermitian operators by
/// successive refinement: each operator is diagonalized on every subspace left
/// by the previous ones.
///
/// Subspaces are ordered lexicographically by their eigenvalue tuples, with
/// each operator's eigenvalues ascending.
pub fn joint_eigenspaces(ops: &[DenseOperator]) -> Result<Vec<JointEigenspace>> {
    let Some(first) = ops.first() else {
        return Err(Error::invalid("need at least one operator"));
    };
    let n = first.dim();
    for op in ops {
        check_dim(n, op.dim())?;
        if !op.is_hermitian() {
            return Err(Error::NotHermitian { residual: op.hermitian_residual() });
        }
    }
    let full: Vec<ComplexStateVector> = (0..n).map(|i| ComplexStateVector::basis(n, i)).collect::<Result<_>>()?;
    let mut spaces = vec![JointEigenspace { values: Vec::new(), basis: full }];

    for op in ops {
        let spread = op.entries.iter().map(|x| x.norm()).fold(0.0, f64::max);
        let tol = 1e-8 * spread.max(1e-300);
        let mut refined = Vec::new();
        for space in spaces {
            let k = space.basis.len();
            // Restriction Q† A Q.
            let mut applied = Vec::with_capacity(k);
            for b in &space.basis {
                let mut tmp = vec![ZERO; n];
                op.apply_into(b.amplitudes(), &mut tmp);
                applied.push(tmp);
            }
            let mut restricted = vec![ZERO; k * k];
            for i in 0..k {
                for j in 0..k {
                    restricted[i * k + j] = dot(space.basis[i].amplitudes(), &applied[j]);
                }
            }
            // Symmetrize away rounding so the Hermitian check passes.
            for i in 0..k {
                for j in i..k {
                    let avg = (restricted[i * k + j] + restricted[j * k + i].conj()) * 0.5;
                    restricted[i * k + j] = avg;
                    restricted[j * k + i] = avg.conj();
                }
            }
            let sub = DenseOperator::new(k, restricted)?;
            let (vals, vecs) = hermitian_eigen(&sub)?;

            let mut start = 0;
            while start < k {
                let mut end = start + 1;
                while end < k && (vals[end] - vals[start]).abs() <= tol {
                    end += 1;
                }
                let mean = vals[start..end].iter().sum::<f64>() / (end - start) as f64;
                let basis = vecs[start..end]
                    .iter()
                    .map(|w| {
                        let mut amps = vec![ZERO; n];
                        for (coef, q) in w.amplitudes().iter().zip(&space.basis) {
                            for (o, x) in amps.iter_mut().zip(q.amplitudes()) {
                                *o += coef * x;
                            }
                        }
                        ComplexStateVector::new(amps)
                    })
                    .collect::<Result<Vec<_>>>()?;
                let mut values = space.values.clone();
                values.push(mean);
                refined.push(JointEigenspace { values, basis });
                start = end;
            }
        }
        spaces = refined;
    }
    Ok(spaces)
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::FRAC_1_SQRT_2;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex {
        Complex::new(re, im)
    }

    fn ket(v: &[(f64, f64)]) -> ComplexStateVector {
        ComplexStateVector::new(v.iter().map(|&(r, i)| c(r, i)).collect()).unwrap()
    }

    #[test]
    fn inner_product_examples() {
        let e0 = ket(&[(1.0, 0.0), (0.0, 0.0)]);
        let e1 = ket(&[(0.0, 0.0), (1.0, 0.0)]);
        assert_eq!(inner_product(&e0, &e0).unwrap(), c(1.0, 0.0));
        assert_eq!(inner_product(&e0, &e1).unwrap(), c(0.0, 0.0));
        let s = ket(&[(FRAC_1_SQRT_2, 0.0), (0.0, FRAC_1_SQRT_2)]);
        let v = inner_product(&s, &s).unwrap();
        assert!((v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn inner_product_dim_mismatch() {
        let a = ComplexStateVector::basis(2, 0).unwrap();
        let b = ComplexStateVector::basis(3, 0).unwrap();
        assert_eq!(inner_product(&a, &b), Err(Error::DimensionMismatch { expected: 2, found: 3 }));
    }

    #[test]
    fn expectation_examples() {
        let z = DenseOperator::pauli_z();
        let up = ComplexStateVector::basis(2, 0).unwrap();
        assert_eq!(expectation(&z, &up).unwrap(), 1.0);
        let plus = ComplexStateVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]).unwrap();
        assert!(expectation(&z, &plus).unwrap().abs() < 1e-15);
        let psi = ComplexStateVector::from_real(&[0.3f64.sqrt(), 0.7f64.sqrt()]).unwrap();
        assert!((expectation(&z, &psi).unwrap() + 0.4).abs() < 1e-14);
    }

    #[test]
    fn expectation_rejects_non_hermitian() {
        let op = DenseOperator::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]).unwrap();
        assert!(!op.is_hermitian());
        let psi = ComplexStateVector::basis(2, 0).unwrap();
        assert!(matches!(expectation(&op, &psi), Err(Error::NotHermitian { .. })));
        assert!(matches!(DenseOperator::hermitian(2, op.entries().to_vec()), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn tensor_examples() {
        let up = ComplexStateVector::basis(2, 0).unwrap();
        let down = ComplexStateVector::basis(2, 1).unwrap();
        let t = tensor(&up, &down).unwrap();
        assert_eq!(t.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);

        let ud = tensor(&up, &down).unwrap();
        let du = tensor(&down, &up).unwrap();
        let singlet = ComplexStateVector::new(
            ud.amplitudes().iter().zip(du.amplitudes()).map(|(a, b)| (a - b) * FRAC_1_SQRT_2).collect(),
        )
        .unwrap();
        let expected = [0.0, FRAC_1_SQRT_2, -FRAC_1_SQRT_2, 0.0];
        for (a, e) in singlet.amplitudes().iter().zip(expected) {
            assert_eq!(*a, c(e, 0.0));
        }
    }

    #[test]
    fn tensor_capacity() {
        let a = ComplexStateVector::from_real(&[1.0; 64]).unwrap();
        let b = ComplexStateVector::from_real(&[1.0; 128]).unwrap();
        assert_eq!(tensor(&a, &b), Err(Error::Capacity { requested: 8192, max: 4096 }));
        assert!(tensor_with_capacity(&a, &a, 1024).is_err());
        assert_eq!(tensor(&a, &a).unwrap().dim(), 4096);
    }

    #[test]
    fn apply_examples() {
        let psi = ket(&[(0.3, 0.1), (-0.2, 0.5)]);
        let id = DenseOperator::identity(2).unwrap();
        assert_eq!(apply(&id, &psi).unwrap(), psi);
        let down = ComplexStateVector::basis(2, 1).unwrap();
        let r = apply(&DenseOperator::pauli_z(), &down).unwrap();
        assert_eq!(r.amplitudes(), &[c(0.0, 0.0), c(-1.0, 0.0)]);
        let up = ComplexStateVector::basis(2, 0).unwrap();
        let r = apply(&DenseOperator::pauli_x(), &up).unwrap();
        assert_eq!(r.amplitudes(), &[c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(apply(&id, &ComplexStateVector::basis(3, 0).unwrap()).is_err());
    }

    #[test]
    fn normalize_zero_vector_fails() {
        let mut z = ComplexStateVector::from_real(&[0.0, 0.0]).unwrap();
        assert!(z.normalize().is_err());
        assert!(ComplexStateVector::new(Vec::new()).is_err());
    }

    #[test]
    fn kron_matches_tensor_on_product_states() {
        let x = DenseOperator::pauli_x();
        let z = DenseOperator::pauli_z();
        let xz = x.kron(&z).unwrap();
        let a = ket(&[(0.6, 0.0), (0.0, 0.8)]);
        let b = ket(&[(FRAC_1_SQRT_2, 0.0), (-FRAC_1_SQRT_2, 0.0)]);
        let lhs = apply(&xz, &tensor(&a, &b).unwrap()).unwrap();
        let rhs = tensor(&apply(&x, &a).unwrap(), &apply(&z, &b).unwrap()).unwrap();
        for (l, r) in lhs.amplitudes().iter().zip(rhs.amplitudes()) {
            assert!((l - r).norm() < 1e-15);
        }
    }

    #[test]
    fn commutator_of_paulis() {
        let x = DenseOperator::pauli_x();
        let z = DenseOperator::pauli_z();
        assert!((x.commutator_norm(&z).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(z.commutator_norm(&z).unwrap(), 0.0);
    }

    #[test]
    fn jacobi_on_complex_hermitian() {
        // [[2, 1-i, 0], [1+i, 3, i], [0, -i, 1]]
        let e = vec![
            c(2.0, 0.0),
            c(1.0, -1.0),
            c(0.0, 0.0),
            c(1.0, 1.0),
            c(3.0, 0.0),
            c(0.0, 1.0),
            c(0.0, 0.0),
            c(0.0, -1.0),
            c(1.0, 0.0),
        ];
        let op = DenseOperator::hermitian(3, e).unwrap();
        let (vals, vecs) = hermitian_eigen(&op).unwrap();
        let trace: f64 = vals.iter().sum();
        assert!((trace - 6.0).abs() < 1e-12);
        for (lam, v) in vals.iter().zip(&vecs) {
            let av = apply(&op, v).unwrap();
            for (x, y) in av.amplitudes().iter().zip(v.amplitudes()) {
                assert!((x - y * *lam).norm() < 1e-12);
            }
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
        for i in 0..3 {
            for j in (i + 1)..3 {
                assert!(inner_product(&vecs[i], &vecs[j]).unwrap().norm() < 1e-12);
            }
        }
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn joint_eigenspaces_refine_degeneracies() {
        // On two qubits: Z⊗I has two 2-dim eigenspaces; adding I⊗X splits them.
        let zi = DenseOperator::pauli_z().kron(&DenseOperator::identity(2).unwrap()).unwrap();
        let ix = DenseOperator::identity(2).unwrap().kron(&DenseOperator::pauli_x()).unwrap();
        let coarse = joint_eigenspaces(core::slice::from_ref(&zi)).unwrap();
        assert_eq!(coarse.len(), 2);
        assert_eq!(coarse[0].values, vec![-1.0]);
        assert_eq!(coarse[0].basis.len(), 2);

        let fine = joint_eigenspaces(&[zi.clone(), ix.clone()]).unwrap();
        assert_eq!(fine.len(), 4);
        for space in &fine {
            assert_eq!(space.basis.len(), 1);
            let v = &space.basis[0];
            for (op, lam) in [&zi, &ix].iter().zip(&space.values) {
                let av = apply(op, v).unwrap();
                for (x, y) in av.amplitudes().iter().zip(v.amplitudes()) {
                    assert!((x - y * *lam).norm() < 1e-10);
                }
            }
        }
    }

    fn arb_ket(dim: usize) -> impl Strategy<Value = ComplexStateVector> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), dim)
            .prop_map(|v| ComplexStateVector::new(v.into_iter().map(|(r, i)| c(r, i)).collect()).unwrap())
    }

    proptest! {
        #[test]
        fn inner_product_conjugate_symmetric(a in arb_ket(5), b in arb_ket(5)) {
            let ab = inner_product(&a, &b).unwrap();
            let ba = inner_product(&b, &a).unwrap();
            prop_assert!((ab - ba.conj()).norm() < 1e-12);
            prop_assert!(inner_product(&a, &a).unwrap().im.abs() < 1e-15);
        }

        #[test]
        fn tensor_norm_multiplies(a in arb_ket(3), b in arb_ket(4)) {
            let t = tensor(&a, &b).unwrap();
            prop_assert!((t.norm() - a.norm() * b.norm()).abs() < 1e-12);
        }

        #[test]
        fn tensor_associative(a in arb_ket(2), b in arb_ket(3), c3 in arb_ket(2)) {
            let left = tensor(&tensor(&a, &b).unwrap(), &c3).unwrap();
            let right = tensor(&a, &tensor(&b, &c3).unwrap()).unwrap();
            for (x, y) in left.amplitudes().iter().zip(right.amplitudes()) {
                prop_assert!((x - y).norm() < 1e-15);
            }
        }

        #[test]
        fn expectation_real_for_hermitian(
            psi in arb_ket(3),
            d in proptest::collection::vec(-2.0f64..2.0, 3),
            off in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 3),
        ) {
            let psi = psi.normalized().unwrap();
            let (o01, o02, o12) = (c(off[0].0, off[0].1), c(off[1].0, off[1].1), c(off[2].0, off[2].1));
            let e = vec![
                c(d[0], 0.0), o01, o02,
                o01.conj(), c(d[1], 0.0), o12,
                o02.conj(), o12.conj(), c(d[2], 0.0),
            ];
            let op = DenseOperator::hermitian(3, e).unwrap();
            let v = expectation(&op, &psi);
            prop_assert!(v.is_ok());
        }
    }
}
