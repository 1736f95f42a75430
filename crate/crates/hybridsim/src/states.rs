//! Density matrices: construction, validation, and standard measures.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertLayout, QOperator};

pub const TRACE_TOL: f64 = 1e-8;
pub const STATE_HERMITICITY_TOL: f64 = 1e-10;
/// Tolerated numerical negativity of the spectrum.
pub const NEGATIVITY_TOL: f64 = 1e-7;

/// Hermitian, unit-trace, (numerically) positive operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub op: QOperator,
}

/// One-subsystem factor of a product state.
pub enum Factor {
    /// Ground state |0><0|.
    Vacuum,
    /// Fock state |k><k|.
    Fock(usize),
    /// Thermal state with mean occupation `n_bar`, renormalized on the
    /// truncated space.
    Thermal(f64),
    /// Pure state from amplitudes (normalized internally).
    Pure(Vec<C64>),
}

impl DensityMatrix {
    /// Validate the state invariants and wrap.
    pub fn new(op: QOperator) -> Result<Self> {
        let tr = op.trace();
        if (tr.re - 1.0).abs() > TRACE_TOL || tr.im.abs() > TRACE_TOL {
            return Err(Error::InvariantViolation(format!(
                "trace deviates from 1 by {:.3e}",
                ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt()
            )));
        }
        let herm = op.hermiticity_deviation();
        if herm > STATE_HERMITICITY_TOL {
            return Err(Error::InvariantViolation(format!(
                "hermiticity deviation {herm:.3e}"
            )));
        }
        if !is_positive_within(&op.matrix, NEGATIVITY_TOL) {
            return Err(Error::InvariantViolation(format!(
                "spectrum extends below -{NEGATIVITY_TOL:.1e}"
            )));
        }
        Ok(Self { op })
    }

    /// Wrap without validation (internal fast path; caller guarantees
    /// invariants or validates afterwards).
    pub(crate) fn from_unchecked(op: QOperator) -> Self {
        Self { op }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.op.layout
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    /// Build a product state from one factor per subsystem, in layout order.
    pub fn product(layout: &HilbertLayout, factors: &[Factor]) -> Result<Self> {
        if factors.len() != layout.subsystems().len() {
            return Err(Error::Dimension(format!(
                "{} factors for {} subsystems",
                factors.len(),
                layout.subsystems().len()
            )));
        }
        let mut op = QOperator::identity(layout);
        for (sub, f) in layout.subsystems().iter().zip(factors) {
            let local = local_factor(sub.dim, f)?;
            let embedded = QOperator::embed(layout, &sub.label, &local)?;
            op = &op * &embedded;
        }
        Self::new(op)
    }

    /// Thermal state on the labelled mode, vacuum on all other subsystems.
    pub fn thermal(layout: &HilbertLayout, label: &str, n_bar: f64) -> Result<Self> {
        let k = layout.index_of(label)?;
        let factors: Vec<Factor> = layout
            .subsystems()
            .iter()
            .enumerate()
            .map(|(i, _)| if i == k { Factor::Thermal(n_bar) } else { Factor::Vacuum })
            .collect();
        Self::product(layout, &factors)
    }

    /// Pure state from a full composite amplitude vector.
    pub fn pure(layout: &HilbertLayout, amplitudes: &[C64]) -> Result<Self> {
        if amplitudes.len() != layout.total_dim() {
            return Err(Error::Dimension("amplitude vector length mismatch".into()));
        }
        let v = DVector::from_column_slice(amplitudes);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::Domain("cannot normalize the zero vector".into()));
        }
        let v = v / C64::new(norm, 0.0);
        let m = &v * v.adjoint();
        Self::new(QOperator::new(layout.clone(), m)?)
    }

    pub fn trace(&self) -> C64 {
        self.op.trace()
    }

    /// <A> = Tr(rho A).
    pub fn expectation(&self, a: &QOperator) -> Result<C64> {
        if a.layout != self.op.layout {
            return Err(Error::LayoutMismatch(format!(
                "observable on {} vs state on {}",
                a.layout, self.op.layout
            )));
        }
        // Tr(rho A) = sum_ij rho[i,j] A[j,i]
        let n = self.dim();
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.op.matrix[(i, j)] * a.matrix[(j, i)];
            }
        }
        Ok(acc)
    }

    /// Real part of <A> for Hermitian observables; the imaginary part must be
    /// numerical noise.
    pub fn expect_re(&self, a: &QOperator) -> Result<f64> {
        let v = self.expectation(a)?;
        Ok(v.re)
    }

    /// Reduced state on the listed subsystems (kept in layout order).
    pub fn partial_trace(&self, keep_labels: &[&str]) -> Result<DensityMatrix> {
        let layout = &self.op.layout;
        let mut keep = Vec::new();
        for l in keep_labels {
            keep.push(layout.index_of(l)?);
        }
        keep.sort_unstable();
        keep.dedup();
        if keep.is_empty() {
            return Err(Error::Dimension("must keep at least one subsystem".into()));
        }
        let kept_subs: Vec<(&str, usize)> = keep
            .iter()
            .map(|&k| (layout.subsystems()[k].label.as_str(), layout.subsystems()[k].dim))
            .collect();
        let reduced_layout = HilbertLayout::new(&kept_subs)?;
        let nred = reduced_layout.total_dim();
        let mut m = DMatrix::<C64>::zeros(nred, nred);
        let n = self.dim();
        // Map composite index -> (kept part, traced part) flat indices.
        let nsub = layout.subsystems().len();
        let mut kept_flat = vec![0usize; n];
        let mut traced_flat = vec![0usize; n];
        for i in 0..n {
            let parts = layout.split_index(i);
            let mut kf = 0usize;
            let mut tf = 0usize;
            for k in 0..nsub {
                if keep.contains(&k) {
                    kf = kf * layout.subsystems()[k].dim + parts[k];
                } else {
                    tf = tf * layout.subsystems()[k].dim + parts[k];
                }
            }
            kept_flat[i] = kf;
            traced_flat[i] = tf;
        }
        for i in 0..n {
            for j in 0..n {
                if traced_flat[i] == traced_flat[j] {
                    m[(kept_flat[i], kept_flat[j])] += self.op.matrix[(i, j)];
                }
            }
        }
        Ok(DensityMatrix::from_unchecked(QOperator::new(reduced_layout, m)?))
    }

    /// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2 in [0, 1].
    pub fn fidelity(&self, other: &DensityMatrix) -> Result<f64> {
        if self.op.layout != other.op.layout {
            return Err(Error::LayoutMismatch(format!(
                "fidelity between {} and {}",
                self.op.layout, other.op.layout
            )));
        }
        let sqrt_rho = hermitian_sqrt(&self.op.matrix);
        let inner = &sqrt_rho * &other.op.matrix * &sqrt_rho;
        let eigs = hermitian_eigenvalues(&inner);
        let f: f64 = eigs.iter().map(|&e| e.max(0.0).sqrt()).sum();
        Ok((f * f).clamp(0.0, 1.0))
    }

    /// Trace distance (1/2) Tr |rho - sigma|.
    pub fn trace_distance(&self, other: &DensityMatrix) -> Result<f64> {
        if self.op.layout != other.op.layout {
            return Err(Error::LayoutMismatch("trace distance".into()));
        }
        let diff = &self.op.matrix - &other.op.matrix;
        let eigs = hermitian_eigenvalues(&diff);
        Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
    }

    /// Smallest eigenvalue of the state.
    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.op.matrix).into_iter().fold(f64::INFINITY, f64::min)
    }

    /// Diagonal populations in the computational basis.
    pub fn populations(&self) -> Vec<f64> {
        self.op.matrix.diagonal().iter().map(|z| z.re).collect()
    }
}

fn local_factor(dim: usize, f: &Factor) -> Result<DMatrix<C64>> {
    let mut m = DMatrix::<C64>::zeros(dim, dim);
    match f {
        Factor::Vacuum => {
            m[(0, 0)] = C64::new(1.0, 0.0);
        }
        Factor::Fock(k) => {
            if *k >= dim {
                return Err(Error::Dimension(format!("Fock index {k} >= dimension {dim}")));
            }
            m[(*k, *k)] = C64::new(1.0, 0.0);
        }
        Factor::Thermal(n_bar) => {
            if *n_bar < 0.0 {
                return Err(Error::Domain(format!("negative thermal occupation {n_bar}")));
            }
            if *n_bar == 0.0 {
                m[(0, 0)] = C64::new(1.0, 0.0);
            } else {
                let q = n_bar / (1.0 + n_bar);
                let mut z = 0.0;
                for n in 0..dim {
                    z += q.powi(n as i32);
                }
                for n in 0..dim {
                    m[(n, n)] = C64::new(q.powi(n as i32) / z, 0.0);
                }
            }
        }
        Factor::Pure(amps) => {
            if amps.len() != dim {
                return Err(Error::Dimension("pure-state amplitude length mismatch".into()));
            }
            let v = DVector::from_column_slice(amps);
            let norm = v.norm();
            if norm == 0.0 {
                return Err(Error::Domain("cannot normalize the zero vector".into()));
            }
            let v = v / C64::new(norm, 0.0);
            m = &v * v.adjoint();
        }
    }
    Ok(m)
}

/// Mean occupation of a thermal distribution truncated (and renormalized) at
/// `dim` levels. Used to match moment-equation initial conditions to a
/// truncated master-equation state.
pub fn truncated_thermal_mean(n_bar: f64, dim: usize) -> f64 {
    if n_bar <= 0.0 {
        return 0.0;
    }
    let q = n_bar / (1.0 + n_bar);
    let mut z = 0.0;
    let mut s = 0.0;
    for n in 0..dim {
        let p = q.powi(n as i32);
        z += p;
        s += n as f64 * p;
    }
    s / z
}

/// Positivity test min(eig) > -tol, implemented as a pivot-checked Cholesky
/// factorization of rho + tol*I (cheap compared to a full eigendecomposition;
/// a Hermitian matrix is positive definite iff all Cholesky pivots are).
pub fn is_positive_within(m: &DMatrix<C64>, tol: f64) -> bool {
    let n = m.nrows();
    let mut a = m.clone();
    for i in 0..n {
        a[(i, i)] += C64::new(tol, 0.0);
    }
    // Lower-triangular factorization in place; bail out on a nonpositive pivot.
    for j in 0..n {
        let mut d = a[(j, j)].re;
        for k in 0..j {
            d -= a[(j, k)].norm_sqr();
        }
        if !(d > 0.0) || !d.is_finite() {
            return false;
        }
        let pivot = d.sqrt();
        a[(j, j)] = C64::new(pivot, 0.0);
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= a[(i, k)] * a[(j, k)].conj();
            }
            a[(i, j)] = s / pivot;
        }
    }
    true
}

/// Eigenvalues of a Hermitian matrix, via nalgebra's symmetric eigensolver.
pub fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    m.clone().symmetric_eigen().eigenvalues.iter().copied().collect()
}

/// Hermitian PSD square root via eigendecomposition; small negative
/// eigenvalues are clamped to zero.
pub fn hermitian_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = m.clone().symmetric_eigen();
    let n = m.nrows();
    let mut d = DMatrix::<C64>::zeros(n, n);
    for i in 0..n {
        d[(i, i)] = C64::new(eig.eigenvalues[i].max(0.0).sqrt(), 0.0);
    }
    &eig.eigenvectors * d * eig.eigenvectors.adjoint()
}
