//! Composite Hilbert-space layouts and dense operators.
//!
//! A [`HilbertLayout`] is an ordered list of labelled subsystems; operators are
//! dense complex matrices on the tensor product in that order. The two-level
//! spin subsystem uses the fixed basis order (|-1>, |0>), so `spin_z` is
//! diag(+1, -1) and `spin_plus` = |-1><0|.

use std::fmt;
use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const HERMITICITY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered subsystem layout of a composite Hilbert space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HilbertLayout {
    subsystems: Vec<Subsystem>,
    total_dim: usize,
}

impl HilbertLayout {
    pub fn new(subsystems: &[(&str, usize)]) -> Result<Self> {
        if subsystems.is_empty() {
            return Err(Error::Dimension("layout needs at least one subsystem".into()));
        }
        let mut seen = Vec::new();
        let mut total = 1usize;
        let mut subs = Vec::with_capacity(subsystems.len());
        for (label, dim) in subsystems {
            if *dim < 1 {
                return Err(Error::Dimension(format!("subsystem `{label}` has dimension 0")));
            }
            if seen.contains(label) {
                return Err(Error::Dimension(format!("duplicate subsystem label `{label}`")));
            }
            seen.push(label);
            total = total.checked_mul(*dim).ok_or_else(|| {
                Error::Dimension("total dimension overflows usize".into())
            })?;
            subs.push(Subsystem { label: (*label).into(), dim: *dim });
        }
        Ok(Self { subsystems: subs, total_dim: total })
    }

    pub fn total_dim(&self) -> usize {
        self.total_dim
    }

    pub fn subsystems(&self) -> &[Subsystem] {
        &self.subsystems
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|s| s.label == label)
            .ok_or_else(|| Error::UnknownLabel(label.into()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.index_of(label)?].dim)
    }

    /// Stride of subsystem `k` in the row-major composite index
    /// i = sum_k i_k * stride_k.
    fn stride(&self, k: usize) -> usize {
        self.subsystems[k + 1..].iter().map(|s| s.dim).product()
    }

    /// Decompose a composite basis index into per-subsystem indices.
    pub fn split_index(&self, mut i: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.subsystems.len());
        for k in 0..self.subsystems.len() {
            let s = self.stride(k);
            out.push(i / s);
            i %= s;
        }
        out
    }
}

impl fmt::Display for HilbertLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.subsystems.iter().map(|s| format!("{}:{}", s.label, s.dim)).collect();
        write!(f, "[{}]", parts.join(", "))
    }
}

/// Dense operator on a composite Hilbert space.
#[derive(Debug, Clone, PartialEq)]
pub struct QOperator {
    pub layout: HilbertLayout,
    pub matrix: DMatrix<C64>,
}

impl QOperator {
    pub fn new(layout: HilbertLayout, matrix: DMatrix<C64>) -> Result<Self> {
        if matrix.nrows() != layout.total_dim() || matrix.ncols() != layout.total_dim() {
            return Err(Error::Dimension(format!(
                "matrix is {}x{} but layout dimension is {}",
                matrix.nrows(),
                matrix.ncols(),
                layout.total_dim()
            )));
        }
        Ok(Self { layout, matrix })
    }

    pub fn zeros(layout: &HilbertLayout) -> Self {
        let n = layout.total_dim();
        Self { layout: layout.clone(), matrix: DMatrix::zeros(n, n) }
    }

    pub fn identity(layout: &HilbertLayout) -> Self {
        let n = layout.total_dim();
        Self { layout: layout.clone(), matrix: DMatrix::identity(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.layout.total_dim()
    }

    /// Embed a single-subsystem matrix, tensored with identity elsewhere.
    pub fn embed(layout: &HilbertLayout, label: &str, local: &DMatrix<C64>) -> Result<Self> {
        let k = layout.index_of(label)?;
        let d = layout.subsystems()[k].dim;
        if local.nrows() != d || local.ncols() != d {
            return Err(Error::Dimension(format!(
                "local operator is {}x{}, subsystem `{label}` has dimension {d}",
                local.nrows(),
                local.ncols()
            )));
        }
        let n = layout.total_dim();
        let stride = layout.stride(k);
        let block = stride * d; // size of one (subsystem x inner) block
        let outer = n / block;
        let mut m = DMatrix::<C64>::zeros(n, n);
        for o in 0..outer {
            for a in 0..d {
                for b in 0..d {
                    let v = local[(a, b)];
                    if v == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let row0 = o * block + a * stride;
                    let col0 = o * block + b * stride;
                    for s in 0..stride {
                        m[(row0 + s, col0 + s)] = v;
                    }
                }
            }
        }
        Ok(Self { layout: layout.clone(), matrix: m })
    }

    /// Annihilation operator on the labelled bosonic subsystem.
    pub fn destroy(layout: &HilbertLayout, label: &str) -> Result<Self> {
        let d = layout.dim_of(label)?;
        let mut local = DMatrix::<C64>::zeros(d, d);
        for n in 1..d {
            local[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
        }
        Self::embed(layout, label, &local)
    }

    /// Creation operator on the labelled bosonic subsystem.
    pub fn create(layout: &HilbertLayout, label: &str) -> Result<Self> {
        Ok(Self::destroy(layout, label)?.adjoint())
    }

    /// Number operator on the labelled bosonic subsystem.
    pub fn number(layout: &HilbertLayout, label: &str) -> Result<Self> {
        let d = layout.dim_of(label)?;
        let mut local = DMatrix::<C64>::zeros(d, d);
        for n in 0..d {
            local[(n, n)] = C64::new(n as f64, 0.0);
        }
        Self::embed(layout, label, &local)
    }

    /// Projector |k><k| on the labelled subsystem.
    pub fn projector(layout: &HilbertLayout, label: &str, k: usize) -> Result<Self> {
        let d = layout.dim_of(label)?;
        if k >= d {
            return Err(Error::Dimension(format!(
                "projector index {k} out of range for dimension {d}"
            )));
        }
        let mut local = DMatrix::<C64>::zeros(d, d);
        local[(k, k)] = C64::new(1.0, 0.0);
        Self::embed(layout, label, &local)
    }

    pub fn adjoint(&self) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.adjoint() }
    }

    pub fn scale(&self, c: C64) -> Self {
        Self { layout: self.layout.clone(), matrix: self.matrix.map(|z| z * c) }
    }

    pub fn scale_re(&self, c: f64) -> Self {
        self.scale(C64::new(c, 0.0))
    }

    pub fn trace(&self) -> C64 {
        self.matrix.diagonal().iter().sum()
    }

    /// Max-norm deviation from Hermiticity.
    pub fn hermiticity_deviation(&self) -> f64 {
        let n = self.dim();
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_deviation() < tol
    }

    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().fold(0.0_f64, |m, z| m.max(z.norm()))
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self * other - other * self
    }

    fn assert_same_layout(&self, other: &Self, what: &str) {
        assert_eq!(
            self.layout, other.layout,
            "operator {what} across different layouts ({} vs {})",
            self.layout, other.layout
        );
    }
}

/// Spin-1/2-style operators on a two-level subsystem with basis (|-1>, |0>).
pub struct SpinOps {
    /// |-1><-1| - |0><0| = diag(+1, -1).
    pub sz: QOperator,
    /// |-1><0|.
    pub sp: QOperator,
    /// |0><-1|.
    pub sm: QOperator,
}

/// Build sigma_z, sigma_+, sigma_- on the labelled two-level subsystem.
pub fn spin_ops(layout: &HilbertLayout, label: &str) -> Result<SpinOps> {
    let d = layout.dim_of(label)?;
    if d != 2 {
        return Err(Error::Dimension(format!(
            "spin subsystem `{label}` must have dimension 2, got {d}"
        )));
    }
    let mut z = DMatrix::<C64>::zeros(2, 2);
    z[(0, 0)] = C64::new(1.0, 0.0);
    z[(1, 1)] = C64::new(-1.0, 0.0);
    let mut p = DMatrix::<C64>::zeros(2, 2);
    p[(0, 1)] = C64::new(1.0, 0.0);
    let sz = QOperator::embed(layout, label, &z)?;
    let sp = QOperator::embed(layout, label, &p)?;
    let sm = sp.adjoint();
    Ok(SpinOps { sz, sp, sm })
}

impl Add for &QOperator {
    type Output = QOperator;
    fn add(self, rhs: &QOperator) -> QOperator {
        self.assert_same_layout(rhs, "addition");
        QOperator { layout: self.layout.clone(), matrix: &self.matrix + &rhs.matrix }
    }
}

impl Sub for &QOperator {
    type Output = QOperator;
    fn sub(self, rhs: &QOperator) -> QOperator {
        self.assert_same_layout(rhs, "subtraction");
        QOperator { layout: self.layout.clone(), matrix: &self.matrix - &rhs.matrix }
    }
}

impl Mul for &QOperator {
    type Output = QOperator;
    fn mul(self, rhs: &QOperator) -> QOperator {
        self.assert_same_layout(rhs, "product");
        QOperator { layout: self.layout.clone(), matrix: &self.matrix * &rhs.matrix }
    }
}

impl Add for QOperator {
    type Output = QOperator;
    fn add(self, rhs: QOperator) -> QOperator {
        &self + &rhs
    }
}

impl Sub for QOperator {
    type Output = QOperator;
    fn sub(self, rhs: QOperator) -> QOperator {
        &self - &rhs
    }
}

impl Mul for QOperator {
    type Output = QOperator;
    fn mul(self, rhs: QOperator) -> QOperator {
        &self * &rhs
    }
}
