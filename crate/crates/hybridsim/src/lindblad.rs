//! Lindblad master-equation models and propagation.
//!
//! d rho/dt = -i [H(t), rho] + sum_k rate_k (c_k rho c_k+ - 1/2 {c_k+ c_k, rho})
//!
//! Hamiltonians are sums of constant or time-modulated terms (rad/s, hbar = 1).
//! Propagation runs on the flattened density matrix with the adaptive
//! Dormand-Prince integrator; every operator in the generator is applied
//! through a compressed-sparse kernel, since ladder/tensor operators carry
//! O(dim) nonzeros while rho itself is dense.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::hilbert::{HilbertLayout, QOperator, HERMITICITY_TOL};
use crate::ode::{self, OdeOptions, OdeStats};
use crate::states::{is_positive_within, DensityMatrix, NEGATIVITY_TOL};
use crate::timeseries::TimeSeries;

const ZERO: C64 = C64::new(0.0, 0.0);
const I: C64 = C64::new(0.0, 1.0);

/// Real scalar coefficient of a Hamiltonian term.
#[derive(Clone)]
pub enum Coeff {
    Const(f64),
    Fn(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl Coeff {
    pub fn at(&self, t: f64) -> f64 {
        match self {
            Coeff::Const(c) => *c,
            Coeff::Fn(f) => f(t),
        }
    }

    pub fn is_const(&self) -> bool {
        matches!(self, Coeff::Const(_))
    }
}

impl std::fmt::Debug for Coeff {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Coeff::Const(c) => write!(f, "Const({c})"),
            Coeff::Fn(_) => write!(f, "Fn(..)"),
        }
    }
}

type ComplexFn = Arc<dyn Fn(f64) -> C64 + Send + Sync>;

#[derive(Clone)]
enum HTerm {
    /// coeff(t) * op with op Hermitian and coeff real.
    Hermitian { op: QOperator, coeff: Coeff },
    /// f(t) * op + conj(f(t)) * op_dagger (op need not be Hermitian).
    Pair { op: QOperator, coeff: ComplexFn },
}

#[derive(Debug, Clone)]
pub struct CollapseTerm {
    pub op: QOperator,
    /// Rate in 1/s multiplying the dissipator.
    pub rate: f64,
}

/// A Lindblad model: time-parameterized Hamiltonian plus collapse terms.
#[derive(Clone)]
pub struct LindbladModel {
    layout: HilbertLayout,
    terms: Vec<HTerm>,
    collapse: Vec<CollapseTerm>,
}

impl LindbladModel {
    pub fn new(layout: &HilbertLayout) -> Self {
        Self { layout: layout.clone(), terms: Vec::new(), collapse: Vec::new() }
    }

    pub fn layout(&self) -> &HilbertLayout {
        &self.layout
    }

    fn check_layout(&self, op: &QOperator) -> Result<()> {
        if op.layout != self.layout {
            return Err(Error::LayoutMismatch(format!(
                "operator on {} added to model on {}",
                op.layout, self.layout
            )));
        }
        Ok(())
    }

    /// Add `coeff * op` with a constant real coefficient; `op` must be Hermitian.
    pub fn add_hamiltonian(mut self, op: QOperator, coeff: f64) -> Result<Self> {
        self.check_layout(&op)?;
        if !op.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::InvariantViolation(
                "Hamiltonian term is not Hermitian".into(),
            ));
        }
        self.terms.push(HTerm::Hermitian { op, coeff: Coeff::Const(coeff) });
        Ok(self)
    }

    /// Add `f(t) * op` with a real modulation; `op` must be Hermitian.
    pub fn add_hamiltonian_fn<F>(mut self, op: QOperator, f: F) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        self.check_layout(&op)?;
        if !op.is_hermitian(HERMITICITY_TOL) {
            return Err(Error::InvariantViolation(
                "Hamiltonian term is not Hermitian".into(),
            ));
        }
        self.terms.push(HTerm::Hermitian { op, coeff: Coeff::Fn(Arc::new(f)) });
        Ok(self)
    }

    /// Add `f(t) * op + conj(f(t)) * op_dagger` (Hermitian by construction).
    pub fn add_hamiltonian_pair<F>(mut self, op: QOperator, f: F) -> Result<Self>
    where
        F: Fn(f64) -> C64 + Send + Sync + 'static,
    {
        self.check_layout(&op)?;
        self.terms.push(HTerm::Pair { op, coeff: Arc::new(f) });
        Ok(self)
    }

    /// Add a collapse operator with its rate (1/s, must be nonnegative).
    pub fn add_collapse(mut self, op: QOperator, rate: f64) -> Result<Self> {
        self.check_layout(&op)?;
        if !rate.is_finite() || rate < 0.0 {
            return Err(Error::Domain(format!("collapse rate must be >= 0, got {rate}")));
        }
        if rate > 0.0 {
            self.collapse.push(CollapseTerm { op, rate });
        }
        Ok(self)
    }

    pub fn collapse_terms(&self) -> &[CollapseTerm] {
        &self.collapse
    }

    /// Dense Hamiltonian at time `t`.
    pub fn hamiltonian_at(&self, t: f64) -> QOperator {
        let mut h = QOperator::zeros(&self.layout);
        for term in &self.terms {
            match term {
                HTerm::Hermitian { op, coeff } => {
                    h = &h + &op.scale_re(coeff.at(t));
                }
                HTerm::Pair { op, coeff } => {
                    let c = coeff(t);
                    h = &h + &(&op.scale(c) + &op.adjoint().scale(c.conj()));
                }
            }
        }
        h
    }

    /// True when every Hamiltonian coefficient is constant in time.
    pub fn is_autonomous(&self) -> bool {
        self.terms.iter().all(|t| match t {
            HTerm::Hermitian { coeff, .. } => coeff.is_const(),
            HTerm::Pair { .. } => false,
        })
    }

    pub(crate) fn compile(&self) -> CompiledModel {
        CompiledModel::build(self)
    }

    /// Master-equation right-hand side applied to an arbitrary matrix
    /// (diagnostic path, recompiles per call).
    pub fn rhs_dense(&self, t: f64, x: &DMatrix<C64>) -> DMatrix<C64> {
        let compiled = self.compile();
        let n = self.layout.total_dim();
        let mut out = DMatrix::<C64>::zeros(n, n);
        compiled.rhs(t, x.as_slice(), out.as_mut_slice());
        out
    }
}

impl std::fmt::Debug for LindbladModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "LindbladModel {{ layout: {}, terms: {}, collapse: {} }}",
            self.layout,
            self.terms.len(),
            self.collapse.len()
        )
    }
}

// ---------------------------------------------------------------------------
// Sparse kernels
// ---------------------------------------------------------------------------

/// Compressed sparse matrix stored in both row and column order, for fast
/// `A * X` and `X * A` against column-major dense X.
struct SparseMat {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    row_vals: Vec<C64>,
    col_ptr: Vec<usize>,
    row_idx: Vec<usize>,
    col_vals: Vec<C64>,
}

impl SparseMat {
    fn from_dense(m: &DMatrix<C64>) -> Self {
        let n = m.nrows();
        let mut row_ptr = vec![0usize; n + 1];
        let mut col_idx = Vec::new();
        let mut row_vals = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let v = m[(i, j)];
                if v != ZERO {
                    col_idx.push(j);
                    row_vals.push(v);
                }
            }
            row_ptr[i + 1] = col_idx.len();
        }
        let mut col_ptr = vec![0usize; n + 1];
        let mut row_idx = Vec::new();
        let mut col_vals = Vec::new();
        for j in 0..n {
            for i in 0..n {
                let v = m[(i, j)];
                if v != ZERO {
                    row_idx.push(i);
                    col_vals.push(v);
                }
            }
            col_ptr[j + 1] = row_idx.len();
        }
        Self { n, row_ptr, col_idx, row_vals, col_ptr, row_idx, col_vals }
    }

    fn nnz(&self) -> usize {
        self.row_vals.len()
    }

    /// y += alpha * (A x), column-major dense x and y.
    fn acc_lmul(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let xcol = &x[j * n..(j + 1) * n];
            let ycol = &mut y[j * n..(j + 1) * n];
            for i in 0..n {
                let lo = self.row_ptr[i];
                let hi = self.row_ptr[i + 1];
                if lo == hi {
                    continue;
                }
                let mut acc = ZERO;
                for p in lo..hi {
                    acc += self.row_vals[p] * xcol[self.col_idx[p]];
                }
                ycol[i] += alpha * acc;
            }
        }
    }

    /// y = A x (overwrites), column-major dense.
    fn set_lmul(&self, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let xcol = &x[j * n..(j + 1) * n];
            let ycol = &mut y[j * n..(j + 1) * n];
            for i in 0..n {
                let mut acc = ZERO;
                for p in self.row_ptr[i]..self.row_ptr[i + 1] {
                    acc += self.row_vals[p] * xcol[self.col_idx[p]];
                }
                ycol[i] = acc;
            }
        }
    }

    /// y += alpha * (x A), column-major dense x and y.
    fn acc_rmul(&self, alpha: C64, x: &[C64], y: &mut [C64]) {
        let n = self.n;
        for j in 0..n {
            let ycol = &mut y[j * n..(j + 1) * n];
            for p in self.col_ptr[j]..self.col_ptr[j + 1] {
                let k = self.row_idx[p];
                let av = alpha * self.col_vals[p];
                let xcol = &x[k * n..(k + 1) * n];
                for i in 0..n {
                    ycol[i] += av * xcol[i];
                }
            }
        }
    }
}

struct Jump {
    c: SparseMat,
    c_dag: SparseMat,
    rate: f64,
    /// Present when c+ c is not diagonal (then the anticommutator cannot be
    /// folded into the elementwise weight matrix).
    ccdag_offdiag: Option<SparseMat>,
}

/// Generator compiled for the flat column-major representation.
pub(crate) struct CompiledModel {
    /// Elementwise weights: -i(h_i - h_j) - 1/2 sum_k rate_k ((cc_k)_i + (cc_k)_j)
    /// over constant diagonal Hamiltonian parts and diagonal c+c.
    fused_w: Vec<C64>,
    /// Off-diagonal part of all constant Hamiltonian terms, coefficient folded in.
    h_const: Option<SparseMat>,
    timedep: Vec<(SparseMat, Coeff)>,
    pairs: Vec<(SparseMat, SparseMat, ComplexFn)>,
    jumps: Vec<Jump>,
    scratch: std::cell::RefCell<Vec<C64>>,
}

impl CompiledModel {
    fn build(model: &LindbladModel) -> Self {
        let n = model.layout.total_dim();
        let mut hdiag = vec![0.0f64; n];
        let mut damp = vec![0.0f64; n];
        let mut h_const_dense = DMatrix::<C64>::zeros(n, n);
        let mut any_const = false;
        let mut timedep = Vec::new();
        let mut pairs = Vec::new();

        for term in &model.terms {
            match term {
                HTerm::Hermitian { op, coeff: Coeff::Const(c) } => {
                    any_const = true;
                    for i in 0..n {
                        hdiag[i] += c * op.matrix[(i, i)].re;
                        for j in 0..n {
                            if i != j {
                                h_const_dense[(i, j)] += C64::new(*c, 0.0) * op.matrix[(i, j)];
                            }
                        }
                    }
                }
                HTerm::Hermitian { op, coeff } => {
                    timedep.push((SparseMat::from_dense(&op.matrix), coeff.clone()));
                }
                HTerm::Pair { op, coeff } => {
                    pairs.push((
                        SparseMat::from_dense(&op.matrix),
                        SparseMat::from_dense(&op.matrix.adjoint()),
                        coeff.clone(),
                    ));
                }
            }
        }

        let mut jumps = Vec::new();
        for ct in &model.collapse {
            let c_dense = &ct.op.matrix;
            let cc = c_dense.adjoint() * c_dense;
            let mut offdiag_max = 0.0f64;
            for i in 0..n {
                for j in 0..n {
                    if i != j {
                        offdiag_max = offdiag_max.max(cc[(i, j)].norm());
                    }
                }
            }
            let ccdag_offdiag = if offdiag_max > 0.0 {
                Some(SparseMat::from_dense(&cc))
            } else {
                for i in 0..n {
                    damp[i] += ct.rate * cc[(i, i)].re;
                }
                None
            };
            jumps.push(Jump {
                c: SparseMat::from_dense(c_dense),
                c_dag: SparseMat::from_dense(&c_dense.adjoint()),
                rate: ct.rate,
                ccdag_offdiag,
            });
        }

        let mut fused_w = vec![ZERO; n * n];
        for j in 0..n {
            for i in 0..n {
                fused_w[i + j * n] =
                    -I * C64::new(hdiag[i] - hdiag[j], 0.0)
                        - C64::new(0.5 * (damp[i] + damp[j]), 0.0);
            }
        }

        let h_const = if any_const {
            let sm = SparseMat::from_dense(&h_const_dense);
            if sm.nnz() > 0 { Some(sm) } else { None }
        } else {
            None
        };

        Self {
            fused_w,
            h_const,
            timedep,
            pairs,
            jumps,
            scratch: std::cell::RefCell::new(vec![ZERO; n * n]),
        }
    }

    pub(crate) fn rhs(&self, t: f64, x: &[C64], y: &mut [C64]) {
        // Fused diagonal: initializes y.
        for ((yi, wi), xi) in y.iter_mut().zip(&self.fused_w).zip(x) {
            *yi = *wi * *xi;
        }
        if let Some(h) = &self.h_const {
            h.acc_lmul(-I, x, y);
            h.acc_rmul(I, x, y);
        }
        for (m, coeff) in &self.timedep {
            let c = coeff.at(t);
            if c != 0.0 {
                m.acc_lmul(-I * C64::new(c, 0.0), x, y);
                m.acc_rmul(I * C64::new(c, 0.0), x, y);
            }
        }
        for (op, op_dag, f) in &self.pairs {
            let z = f(t);
            if z != ZERO {
                op.acc_lmul(-I * z, x, y);
                op_dag.acc_lmul(-I * z.conj(), x, y);
                op.acc_rmul(I * z, x, y);
                op_dag.acc_rmul(I * z.conj(), x, y);
            }
        }
        let mut scratch = self.scratch.borrow_mut();
        for jump in &self.jumps {
            jump.c.set_lmul(x, &mut scratch);
            jump.c_dag.acc_rmul(C64::new(jump.rate, 0.0), &scratch, y);
            if let Some(cc) = &jump.ccdag_offdiag {
                let half = C64::new(-0.5 * jump.rate, 0.0);
                cc.acc_lmul(half, x, y);
                cc.acc_rmul(half, x, y);
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Evolution
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub struct EvolveOptions {
    pub ode: OdeOptions,
    /// Verify trace/hermiticity/positivity at every output time.
    pub check_invariants: bool,
    /// Renormalize the trace after a step once drift exceeds this bound.
    pub trace_renorm_threshold: f64,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            ode: OdeOptions::default(),
            check_invariants: true,
            trace_renorm_threshold: 1e-10,
        }
    }
}

pub const EVOLVE_TRACE_TOL: f64 = 1e-8;
pub const EVOLVE_HERMITICITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default)]
pub struct EvolveStats {
    pub ode: OdeStats,
    pub max_trace_deviation: f64,
    pub max_hermiticity_deviation: f64,
    pub positivity_ok: bool,
}

#[derive(Debug)]
pub struct EvolveResult {
    pub series: TimeSeries,
    pub final_state: DensityMatrix,
    pub stats: EvolveStats,
}

/// Integrate the master equation, recording `observables` (name, operator) at
/// every output time. Observable records are the real part of Tr(rho A).
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    times: &[f64],
    observables: &[(String, QOperator)],
    opts: &EvolveOptions,
) -> Result<EvolveResult> {
    if rho0.layout() != model.layout() {
        return Err(Error::LayoutMismatch(format!(
            "initial state on {} but model on {}",
            rho0.layout(),
            model.layout()
        )));
    }
    for (_, a) in observables {
        if a.layout != *model.layout() {
            return Err(Error::LayoutMismatch("observable layout".into()));
        }
    }
    let n = model.layout().total_dim();
    let compiled = model.compile();

    // Flattened transposes: Tr(rho A) = sum_flat rho_flat * At_flat.
    let obs_flat: Vec<Vec<C64>> = observables
        .iter()
        .map(|(_, a)| a.matrix.transpose().as_slice().to_vec())
        .collect();

    let y0: Vec<C64> = rho0.op.matrix.as_slice().to_vec();
    let mut series = TimeSeries::new(observables.iter().map(|(name, _)| name.clone()).collect());

    let mut max_trace_dev = 0.0f64;
    let mut max_herm_dev = 0.0f64;
    let mut positivity_ok = true;
    let mut final_flat: Vec<C64> = y0.clone();
    let threshold = opts.trace_renorm_threshold;

    let rhs = |t: f64, x: &[C64], y: &mut [C64]| compiled.rhs(t, x, y);

    let stats = ode::integrate_with_post_step(
        rhs,
        &y0,
        times,
        &opts.ode,
        |_idx, t, y| {
            let mut row = Vec::with_capacity(obs_flat.len());
            for a in &obs_flat {
                let mut acc = ZERO;
                for (yi, ai) in y.iter().zip(a) {
                    acc += *yi * *ai;
                }
                row.push(acc.re);
            }
            series.push(t, row)?;

            let tr: C64 = (0..n).map(|i| y[i * (n + 1)]).sum();
            let tr_dev = ((tr.re - 1.0).powi(2) + tr.im.powi(2)).sqrt();
            max_trace_dev = max_trace_dev.max(tr_dev);
            let mut herm: f64 = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    herm = herm.max((y[i + j * n] - y[j + i * n].conj()).norm());
                }
            }
            max_herm_dev = max_herm_dev.max(herm);
            if opts.check_invariants {
                if tr_dev > EVOLVE_TRACE_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "trace drift {tr_dev:.3e} at t = {t:.6e}"
                    )));
                }
                if herm > EVOLVE_HERMITICITY_TOL {
                    return Err(Error::InvariantViolation(format!(
                        "hermiticity drift {herm:.3e} at t = {t:.6e}"
                    )));
                }
                let m = DMatrix::from_column_slice(n, n, y);
                if !is_positive_within(&m, NEGATIVITY_TOL) {
                    positivity_ok = false;
                    return Err(Error::InvariantViolation(format!(
                        "state not positive within {NEGATIVITY_TOL:.1e} at t = {t:.6e}"
                    )));
                }
            }
            final_flat.copy_from_slice(y);
            Ok(())
        },
        |_t, y| {
            // Per-step trace renormalization against secular drift.
            let tr: C64 = (0..n).map(|i| y[i * (n + 1)]).sum();
            if (tr.re - 1.0).abs() > threshold && tr.norm() > 0.0 {
                let inv = C64::new(1.0, 0.0) / tr;
                for v in y.iter_mut() {
                    *v *= inv;
                }
            }
        },
    )?;

    let final_matrix = DMatrix::from_column_slice(n, n, &final_flat);
    // Symmetrize the numerical remainder before validating.
    let final_matrix = (&final_matrix + final_matrix.adjoint()) * C64::new(0.5, 0.0);
    let final_state = DensityMatrix::new(QOperator::new(model.layout().clone(), final_matrix)?)?;

    Ok(EvolveResult {
        series,
        final_state,
        stats: EvolveStats {
            ode: stats,
            max_trace_deviation: max_trace_dev,
            max_hermiticity_deviation: max_herm_dev,
            positivity_ok,
        },
    })
}

// ---------------------------------------------------------------------------
// Steady state
// ---------------------------------------------------------------------------

/// Largest total dimension for which the dense vectorized Liouvillian
/// (dim^2 x dim^2) null-space solve is attempted.
pub const STEADY_DENSE_DIM_CAP: usize = 40;

/// Dense vectorized Liouvillian (column-stacking convention), built by
/// applying the generator to every matrix unit. Requires an autonomous model.
pub fn liouvillian_matrix(model: &LindbladModel) -> Result<DMatrix<C64>> {
    if !model.is_autonomous() {
        return Err(Error::Domain(
            "Liouvillian matrix requires a time-independent Hamiltonian".into(),
        ));
    }
    let n = model.layout().total_dim();
    let nn = n * n;
    let compiled = model.compile();
    let mut l = DMatrix::<C64>::zeros(nn, nn);
    let mut basis = vec![ZERO; nn];
    let mut col = vec![ZERO; nn];
    for k in 0..nn {
        basis[k] = C64::new(1.0, 0.0);
        compiled.rhs(0.0, &basis, &mut col);
        for (r, v) in col.iter().enumerate() {
            if *v != ZERO {
                l[(r, k)] = *v;
            }
        }
        basis[k] = ZERO;
    }
    Ok(l)
}

/// Steady state of an autonomous model: null vector of the vectorized
/// Liouvillian with the trace pinned to one. Solved twice with different
/// constraint placements; disagreement signals a degenerate null space.
pub fn steady_state(model: &LindbladModel) -> Result<DensityMatrix> {
    if !model.is_autonomous() {
        return Err(Error::Domain("steady state requires an autonomous model".into()));
    }
    let n = model.layout().total_dim();
    if n > STEADY_DENSE_DIM_CAP {
        return steady_state_by_integration(model);
    }
    let l = liouvillian_matrix(model)?;
    let nn = n * n;
    let lscale = l.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(1.0);

    let solve_with_row = |row: usize| -> Result<DMatrix<C64>> {
        let mut a = l.clone();
        for k in 0..nn {
            a[(row, k)] = ZERO;
        }
        for i in 0..n {
            a[(row, i * (n + 1))] = C64::new(1.0, 0.0);
        }
        let mut b = nalgebra::DVector::<C64>::zeros(nn);
        b[row] = C64::new(1.0, 0.0);
        let lu = a.lu();
        let x = lu
            .solve(&b)
            .ok_or_else(|| Error::Singular("Liouvillian solve failed".into()))?;
        Ok(DMatrix::from_column_slice(n, n, x.as_slice()))
    };

    let rho1 = solve_with_row(0)?;
    let rho2 = solve_with_row(nn - 1)?;
    let diff = (&rho1 - &rho2).iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if diff > 1e-7 {
        return Err(Error::DegenerateSteadyState(format!(
            "two constraint placements disagree by {diff:.3e}; multiple steady states"
        )));
    }

    let rho = (&rho1 + rho1.adjoint()) * C64::new(0.5, 0.0);
    let tr: C64 = rho.diagonal().iter().sum();
    let rho = rho / tr;

    // Residual check relative to the generator scale.
    let flat: Vec<C64> = rho.as_slice().to_vec();
    let mut resid = vec![ZERO; nn];
    model.compile().rhs(0.0, &flat, &mut resid);
    let rmax = resid.iter().fold(0.0f64, |m, z| m.max(z.norm()));
    if rmax / lscale > 1e-10 {
        return Err(Error::Singular(format!(
            "steady-state residual {:.3e} exceeds tolerance",
            rmax / lscale
        )));
    }

    DensityMatrix::new(QOperator::new(model.layout().clone(), rho)?)
}

/// Fallback for spaces too large for the dense Liouvillian: integrate from the
/// maximally mixed state over doubling horizons until the generator output
/// vanishes relative to its scale.
fn steady_state_by_integration(model: &LindbladModel) -> Result<DensityMatrix> {
    let n = model.layout().total_dim();
    let compiled = model.compile();
    let rate_scale = compiled
        .fused_w
        .iter()
        .fold(0.0f64, |m, z| m.max(z.norm()))
        .max(1.0);
    let mut rho = DensityMatrix::from_unchecked(
        QOperator::new(
            model.layout().clone(),
            DMatrix::<C64>::identity(n, n) * C64::new(1.0 / n as f64, 0.0),
        )?,
    );
    let mut horizon = 10.0 / rate_scale;
    for _ in 0..40 {
        let times = [0.0, horizon];
        let res = evolve(model, &rho, &times, &[], &EvolveOptions::default())?;
        rho = res.final_state;
        let flat: Vec<C64> = rho.op.matrix.as_slice().to_vec();
        let mut rhs_out = vec![ZERO; n * n];
        compiled.rhs(0.0, &flat, &mut rhs_out);
        let rmax = rhs_out.iter().fold(0.0f64, |m, z| m.max(z.norm()));
        if rmax / rate_scale < 1e-10 {
            return Ok(rho);
        }
        horizon *= 2.0;
    }
    Err(Error::NonConvergent("long-time steady-state fallback did not settle".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::Factor;
    use approx::assert_relative_eq;

    fn cavity_decay_model(kappa: f64, dim: usize) -> (HilbertLayout, LindbladModel) {
        let layout = HilbertLayout::new(&[("cav", dim)]).unwrap();
        let a = QOperator::destroy(&layout, "cav").unwrap();
        let model = LindbladModel::new(&layout).add_collapse(a, kappa).unwrap();
        (layout, model)
    }

    #[test]
    fn pure_decay_matches_exponential() {
        let kappa = 3.0e4;
        let (layout, model) = cavity_decay_model(kappa, 4);
        let rho0 = DensityMatrix::product(&layout, &[Factor::Fock(1)]).unwrap();
        let n_op = QOperator::number(&layout, "cav").unwrap();
        let times: Vec<f64> = (0..=20).map(|i| i as f64 * 5e-6).collect();
        let res = evolve(
            &model,
            &rho0,
            &times,
            &[("n".into(), n_op)],
            &EvolveOptions::default(),
        )
        .unwrap();
        let n = res.series.column("n").unwrap();
        for (t, v) in times.iter().zip(&n) {
            assert!((v - (-kappa * t).exp()).abs() < 1e-6, "t={t}: {v}");
        }
        assert!(res.stats.max_trace_deviation < 1e-8);
    }

    #[test]
    fn beam_splitter_swap_at_quarter_period() {
        // One excitation in b, resonant exchange: full swap at t = pi / 2g.
        let g = 1.0e5;
        let layout = HilbertLayout::new(&[("cav", 3), ("mech", 3)]).unwrap();
        let a = QOperator::destroy(&layout, "cav").unwrap();
        let b = QOperator::destroy(&layout, "mech").unwrap();
        let hop = &(&a.adjoint() * &b) + &(&a * &b.adjoint());
        let model = LindbladModel::new(&layout).add_hamiltonian(hop, g).unwrap();
        let rho0 =
            DensityMatrix::product(&layout, &[Factor::Fock(0), Factor::Fock(1)]).unwrap();
        let na = QOperator::number(&layout, "cav").unwrap();
        let nb = QOperator::number(&layout, "mech").unwrap();
        let t_swap = std::f64::consts::PI / (2.0 * g);
        let times = [0.0, 0.5 * t_swap, t_swap];
        let res = evolve(
            &model,
            &rho0,
            &times,
            &[("na".into(), na), ("nb".into(), nb)],
            &EvolveOptions::default(),
        )
        .unwrap();
        assert_relative_eq!(res.series.value(2, "na").unwrap(), 1.0, epsilon = 1e-7);
        assert!(res.series.value(2, "nb").unwrap() < 1e-7);
    }

    #[test]
    fn decay_only_steady_state_is_vacuum() {
        let (_, model) = cavity_decay_model(2.0e4, 5);
        let rho = steady_state(&model).unwrap();
        assert_relative_eq!(rho.op.matrix[(0, 0)].re, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn thermal_pumping_steady_state_detailed_balance() {
        let layout = HilbertLayout::new(&[("mech", 16)]).unwrap();
        let b = QOperator::destroy(&layout, "mech").unwrap();
        let gamma = 10.0;
        let n_th = 0.5;
        let model = LindbladModel::new(&layout)
            .add_collapse(b.clone(), gamma * (n_th + 1.0))
            .unwrap()
            .add_collapse(b.adjoint(), gamma * n_th)
            .unwrap();
        let rho = steady_state(&model).unwrap();
        let n_op = QOperator::number(&layout, "mech").unwrap();
        let n = rho.expect_re(&n_op).unwrap();
        assert!((n - n_th).abs() < 1e-6, "steady occupation {n} vs {n_th}");
    }

    #[test]
    fn steady_state_rejects_time_dependence() {
        let layout = HilbertLayout::new(&[("cav", 3)]).unwrap();
        let n_op = QOperator::number(&layout, "cav").unwrap();
        let a = QOperator::destroy(&layout, "cav").unwrap();
        let model = LindbladModel::new(&layout)
            .add_hamiltonian_fn(n_op, |t| t)
            .unwrap()
            .add_collapse(a, 1.0)
            .unwrap();
        assert!(steady_state(&model).is_err());
    }

    #[test]
    fn degenerate_steady_state_reported() {
        // No dissipation, H diagonal: every diagonal state is steady.
        let layout = HilbertLayout::new(&[("cav", 3)]).unwrap();
        let n_op = QOperator::number(&layout, "cav").unwrap();
        let model = LindbladModel::new(&layout).add_hamiltonian(n_op, 1.0).unwrap();
        match steady_state(&model) {
            Err(Error::DegenerateSteadyState(_)) | Err(Error::Singular(_)) => {}
            other => panic!("expected degeneracy report, got {other:?}"),
        }
    }

    #[test]
    fn collapse_rate_must_be_nonnegative() {
        let layout = HilbertLayout::new(&[("cav", 3)]).unwrap();
        let a = QOperator::destroy(&layout, "cav").unwrap();
        assert!(LindbladModel::new(&layout).add_collapse(a, -1.0).is_err());
    }

    #[test]
    fn sparse_kernels_match_dense_products() {
        // Randomized structural check of the three kernels.
        let n = 7;
        let mut seed = 0x9e3779b97f4a7c15u64;
        let mut rnd = || {
            seed = seed.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((seed >> 11) as f64) / ((1u64 << 53) as f64) - 0.5
        };
        let a = DMatrix::<C64>::from_fn(n, n, |_, _| {
            if rnd() > 0.1 { ZERO } else { C64::new(rnd(), rnd()) }
        });
        let x = DMatrix::<C64>::from_fn(n, n, |_, _| C64::new(rnd(), rnd()));
        let sp = SparseMat::from_dense(&a);
        let alpha = C64::new(0.7, -0.3);

        let mut y = vec![ZERO; n * n];
        sp.acc_lmul(alpha, x.as_slice(), &mut y);
        let expect = &a * &x * alpha;
        for (yi, ei) in y.iter().zip(expect.as_slice()) {
            assert!((yi - ei).norm() < 1e-13);
        }

        let mut y = vec![ZERO; n * n];
        sp.acc_rmul(alpha, x.as_slice(), &mut y);
        let expect = &x * &a * alpha;
        for (yi, ei) in y.iter().zip(expect.as_slice()) {
            assert!((yi - ei).norm() < 1e-13);
        }

        let mut y = vec![C64::new(9.0, 9.0); n * n];
        sp.set_lmul(x.as_slice(), &mut y);
        let expect = &a * &x;
        for (yi, ei) in y.iter().zip(expect.as_slice()) {
            assert!((yi - ei).norm() < 1e-13);
        }
    }

    #[test]
    fn rhs_matches_textbook_dissipator_on_two_levels() {
        // Hand-evaluated D[sigma_-] on the excited state: d rho00/dt = rate,
        // d rho11/dt = -rate.
        let layout = HilbertLayout::new(&[("q", 2)]).unwrap();
        let mut sm = DMatrix::<C64>::zeros(2, 2);
        sm[(0, 1)] = C64::new(1.0, 0.0);
        let c = QOperator::new(layout.clone(), sm).unwrap();
        let rate = 2.5e4;
        let model = LindbladModel::new(&layout).add_collapse(c, rate).unwrap();
        let mut rho = DMatrix::<C64>::zeros(2, 2);
        rho[(1, 1)] = C64::new(1.0, 0.0);
        let d = model.rhs_dense(0.0, &rho);
        assert_relative_eq!(d[(0, 0)].re, rate, epsilon = 1e-9);
        assert_relative_eq!(d[(1, 1)].re, -rate, epsilon = 1e-9);
        assert!(d[(0, 1)].norm() < 1e-12);
    }
}
