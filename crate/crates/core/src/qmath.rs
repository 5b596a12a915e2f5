//! Dense complex linear algebra and quantum-information primitives.
//!
//! Everything here works on small dense matrices (dimension at most 64) backed
//! by `nalgebra`. Composite systems follow the layout convention of
//! [`RegisterLayout`]: the first wire is the most significant tensor factor.

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Tolerance for structural checks (Hermiticity, unit trace, positivity).
pub const STRUCT_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as zero in entropies.
pub const EIG_CLAMP: f64 = 1e-12;
/// Default relative cutoff for the regularized superoperator inverse.
pub const PINV_TOL: f64 = 1e-10;

pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn pauli_x() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
}

pub fn pauli_y() -> CMat {
    CMat::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
}

pub fn pauli_z() -> CMat {
    CMat::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
}

/// Largest entrywise modulus of `a - b`.
pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    assert_eq!(a.shape(), b.shape(), "shape mismatch");
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn is_hermitian(m: &CMat, tol: f64) -> bool {
    m.is_square() && max_abs_diff(m, &m.adjoint()) <= tol
}

/// Kronecker product; `(a ⊗ b)[i·db + k, j·db + l] = a[i,j]·b[k,l]`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn outer(ket: &CVec) -> CMat {
    ket * ket.adjoint()
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
///
/// The input is symmetrized first so rounding noise in the anti-Hermitian
/// part does not leak into the spectrum.
pub fn hermitian_eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMat::from_fn(m.nrows(), m.ncols(), |r, k| eig.eigenvectors[(r, order[k])]);
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMat) -> Vec<f64> {
    if m.nrows() == 2 {
        let (lo, hi) = eig2_hermitian(m);
        return vec![lo, hi];
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let mut v: Vec<f64> = SymmetricEigen::new(sym).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

fn eig2_hermitian(m: &CMat) -> (f64, f64) {
    let a = m[(0, 0)].re;
    let d = m[(1, 1)].re;
    let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
    let mean = 0.5 * (a + d);
    let radius = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
    (mean - radius, mean + radius)
}

pub fn singular_values(a: &CMat) -> Vec<f64> {
    a.clone().svd(false, false).singular_values.iter().copied().collect()
}

/// Sum of singular values.
pub fn trace_norm(a: &CMat) -> f64 {
    if is_hermitian(a, 1e-13) {
        hermitian_eigenvalues(a).iter().map(|x| x.abs()).sum()
    } else {
        singular_values(a).iter().sum()
    }
}

/// Square matrix dimensions of a composite system, first wire most significant.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterLayout {
    dims: Vec<usize>,
}

impl RegisterLayout {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::invalid("layout needs at least one wire of positive dimension"));
        }
        Ok(Self { dims })
    }

    pub fn qubits(n: usize) -> Self {
        Self { dims: vec![2; n] }
    }

    /// The S, E1, E2 register: composite index `4·s + 2·e1 + e2`.
    pub fn register() -> Self {
        Self::qubits(3)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn n_wires(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn subset_dim(&self, wires: &[usize]) -> usize {
        wires.iter().map(|&w| self.dims[w]).product()
    }

    /// Sorted, deduplicated wire subset; rejects out-of-range wires.
    pub fn normalize_subset(&self, wires: &[usize]) -> Result<Vec<usize>> {
        let mut w = wires.to_vec();
        w.sort_unstable();
        w.dedup();
        if w.len() != wires.len() {
            return Err(Error::invalid("duplicate wire in subset"));
        }
        if let Some(&bad) = w.iter().find(|&&x| x >= self.dims.len()) {
            return Err(Error::invalid(format!("wire {bad} outside layout of {} wires", self.dims.len())));
        }
        Ok(w)
    }

    pub fn complement(&self, wires: &[usize]) -> Vec<usize> {
        (0..self.dims.len()).filter(|w| !wires.contains(w)).collect()
    }

    /// Per-wire digits of a composite index.
    pub(crate) fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for (w, &d) in self.dims.iter().enumerate().rev() {
            out[w] = index % d;
            index /= d;
        }
        out
    }

    pub(crate) fn compose(&self, digits: &[usize]) -> usize {
        digits.iter().zip(&self.dims).fold(0, |acc, (&x, &d)| acc * d + x)
    }

    fn check_matrix(&self, m: &CMat) -> Result<()> {
        let n = self.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::invalid(format!("matrix is {}x{}, layout expects {n}x{n}", m.nrows(), m.ncols())));
        }
        Ok(())
    }
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix(CMat);

impl DensityMatrix {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid("density matrix must be square"));
        }
        if !is_hermitian(&mat, STRUCT_TOL) {
            return Err(Error::invalid("density matrix is not Hermitian"));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > STRUCT_TOL || tr.im.abs() > STRUCT_TOL {
            return Err(Error::invalid(format!("trace {tr} is not 1")));
        }
        let min = hermitian_eigenvalues(&mat)[0];
        if min < -STRUCT_TOL {
            return Err(Error::invalid(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self(mat))
    }

    /// Wraps a matrix known to be a state by construction.
    pub(crate) fn from_trusted(mat: CMat) -> Self {
        Self(mat)
    }

    pub fn from_ket(ket: &CVec) -> Result<Self> {
        let n = ket.norm();
        if (n - 1.0).abs() > STRUCT_TOL {
            return Err(Error::invalid(format!("ket norm {n} is not 1")));
        }
        Ok(Self(outer(ket)))
    }

    pub fn maximally_mixed(d: usize) -> Self {
        Self(identity(d).scale(1.0 / d as f64))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn into_mat(self) -> CMat {
        self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        Self(kron(&self.0, &other.0))
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryOp(CMat);

impl UnitaryOp {
    pub fn new(mat: CMat) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::invalid("unitary must be square"));
        }
        let dev = max_abs_diff(&(mat.adjoint() * &mat), &identity(mat.nrows()));
        if dev > STRUCT_TOL {
            return Err(Error::invalid(format!("matrix is not unitary (deviation {dev:e})")));
        }
        Ok(Self(mat))
    }

    pub(crate) fn from_trusted(mat: CMat) -> Self {
        Self(mat)
    }

    pub fn identity(d: usize) -> Self {
        Self(identity(d))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    /// `self · other`, i.e. `other` acts first.
    pub fn compose(&self, other: &UnitaryOp) -> UnitaryOp {
        Self(&self.0 * &other.0)
    }

    pub fn dagger(&self) -> UnitaryOp {
        Self(self.0.adjoint())
    }

    pub fn conjugate(&self, rho: &CMat) -> CMat {
        &self.0 * rho * self.0.adjoint()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOp(CMat);

impl HermitianOp {
    pub fn new(mat: CMat) -> Result<Self> {
        if !is_hermitian(&mat, STRUCT_TOL) {
            return Err(Error::invalid("operator is not Hermitian"));
        }
        Ok(Self(mat))
    }

    pub fn mat(&self) -> &CMat {
        &self.0
    }

    /// `exp(-i·H·t)`.
    pub fn evolve(&self, t: f64) -> UnitaryOp {
        let (vals, vecs) = hermitian_eigh(&self.0);
        let phases =
            CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&e| C64::from_polar(1.0, -e * t))));
        UnitaryOp(&vecs * phases * vecs.adjoint())
    }
}

/// Spectral decomposition `U = Σ e^{iθ_k} |v_k⟩⟨v_k|` with principal
/// eigenphases in `(-π, π]`.
#[derive(Debug, Clone)]
pub struct UnitarySpectrum {
    phases: Vec<f64>,
    vectors: CMat,
}

impl UnitarySpectrum {
    pub fn new(u: &UnitaryOp) -> Result<Self> {
        UnitaryOp::new(u.0.clone())?;
        let (q, t) = Schur::new(u.0.clone()).unpack();
        let n = u.dim();
        // A unitary is normal, so its Schur form is diagonal.
        let off = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| t[(i, j)].norm())
            .fold(0.0, f64::max);
        if off > 1e-8 {
            return Err(Error::invalid(format!("Schur form not diagonal (off-diagonal {off:e})")));
        }
        let phases = (0..n)
            .map(|k| {
                let theta = t[(k, k)].arg();
                if theta <= -std::f64::consts::PI + 1e-9 {
                    std::f64::consts::PI
                } else {
                    theta
                }
            })
            .collect();
        Ok(Self { phases, vectors: q })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    /// `Σ e^{iθ_k t} |v_k⟩⟨v_k|`.
    pub fn power(&self, t: f64) -> UnitaryOp {
        let d = CVec::from_iterator(self.phases.len(), self.phases.iter().map(|&th| C64::from_polar(1.0, th * t)));
        let scaled = CMat::from_fn(self.vectors.nrows(), self.vectors.ncols(), |r, k| self.vectors[(r, k)] * d[k]);
        UnitaryOp(scaled * self.vectors.adjoint())
    }

    /// Hermitian generator `H` with `U^t = exp(-iHt)`, i.e. `H = i·ln U`.
    pub fn generator(&self) -> HermitianOp {
        let d = CMat::from_diagonal(&CVec::from_iterator(self.phases.len(), self.phases.iter().map(|&th| c(-th, 0.0))));
        HermitianOp(&self.vectors * d * self.vectors.adjoint())
    }
}

/// Principal fractional power `U^t`.
pub fn unitary_fractional_power(u: &UnitaryOp, t: f64) -> Result<UnitaryOp> {
    Ok(UnitarySpectrum::new(u)?.power(t))
}

fn check_same_dim(a: &CMat, b: &CMat) -> Result<()> {
    if a.shape() != b.shape() {
        return Err(Error::invalid(format!("dimension mismatch: {:?} vs {:?}", a.shape(), b.shape())));
    }
    Ok(())
}

/// `½‖ρ₁ − ρ₂‖₁`.
pub fn trace_distance(r1: &DensityMatrix, r2: &DensityMatrix) -> Result<f64> {
    check_same_dim(&r1.0, &r2.0)?;
    Ok(0.5 * trace_norm(&(&r1.0 - &r2.0)))
}

/// Shannon entropy in bits of a spectrum, clamping tiny eigenvalues.
pub fn entropy_of_spectrum(eigs: &[f64]) -> f64 {
    eigs.iter().filter(|&&l| l > EIG_CLAMP).fold(0.0, |acc, &l| acc - l * l.log2()).max(0.0)
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of_spectrum(&rho.eigenvalues())
}

pub(crate) fn vn_entropy_mat(m: &CMat) -> f64 {
    entropy_of_spectrum(&hermitian_eigenvalues(m))
}

/// Partial trace on a raw matrix; `keep` must be sorted and valid.
pub(crate) fn partial_trace_mat(m: &CMat, layout: &RegisterLayout, keep: &[usize]) -> CMat {
    let traced = layout.complement(keep);
    let keep_dims: Vec<usize> = keep.iter().map(|&w| layout.dims[w]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&w| layout.dims[w]).collect();
    let kd: usize = keep_dims.iter().product();
    let td: usize = traced_dims.iter().product();
    let kl = RegisterLayout { dims: keep_dims };
    let tl = RegisterLayout { dims: traced_dims };
    let full_index = |kdig: &[usize], tdig: &[usize]| {
        let mut digits = vec![0; layout.n_wires()];
        for (&w, &x) in keep.iter().zip(kdig) {
            digits[w] = x;
        }
        for (&w, &x) in traced.iter().zip(tdig) {
            digits[w] = x;
        }
        layout.compose(&digits)
    };
    // Precompute composite indices: idx[k][t].
    let idx: Vec<Vec<usize>> = (0..kd)
        .map(|k| {
            let kdig = kl.digits(k);
            (0..td).map(|t| full_index(&kdig, &tl.digits(t))).collect()
        })
        .collect();
    CMat::from_fn(kd, kd, |i, j| (0..td).map(|t| m[(idx[i][t], idx[j][t])]).sum())
}

/// Reduced state on the wires in `keep`, in layout order.
pub fn partial_trace(rho: &DensityMatrix, layout: &RegisterLayout, keep: &[usize]) -> Result<DensityMatrix> {
    layout.check_matrix(&rho.0)?;
    if keep.is_empty() {
        return Err(Error::invalid("cannot keep an empty set of wires"));
    }
    let keep = layout.normalize_subset(keep)?;
    Ok(DensityMatrix(partial_trace_mat(&rho.0, layout, &keep)))
}

pub(crate) fn partial_transpose_mat(m: &CMat, layout: &RegisterLayout, side: &[usize]) -> CMat {
    let n = layout.total_dim();
    let mut out = CMat::zeros(n, n);
    for i in 0..n {
        let di = layout.digits(i);
        for j in 0..n {
            let dj = layout.digits(j);
            let (mut ri, mut rj) = (di.clone(), dj.clone());
            for &w in side {
                ri[w] = dj[w];
                rj[w] = di[w];
            }
            out[(layout.compose(&ri), layout.compose(&rj))] = m[(i, j)];
        }
    }
    out
}

/// Transposes the indices of the wires in `side`.
pub fn partial_transpose(rho: &DensityMatrix, layout: &RegisterLayout, side: &[usize]) -> Result<CMat> {
    layout.check_matrix(&rho.0)?;
    if side.is_empty() {
        return Err(Error::invalid("partial transpose needs a non-empty side"));
    }
    let side = layout.normalize_subset(side)?;
    Ok(partial_transpose_mat(&rho.0, layout, &side))
}

/// `S(ρ_A) + S(ρ_B) − S(ρ_AB)` for the cut `part_a | rest`.
pub fn mutual_information(rho: &DensityMatrix, layout: &RegisterLayout, part_a: &[usize]) -> Result<f64> {
    layout.check_matrix(&rho.0)?;
    let a = layout.normalize_subset(part_a)?;
    let b = layout.complement(&a);
    if a.is_empty() || b.is_empty() {
        return Err(Error::invalid("mutual information needs a proper bipartition"));
    }
    let sa = vn_entropy_mat(&partial_trace_mat(&rho.0, layout, &a));
    let sb = vn_entropy_mat(&partial_trace_mat(&rho.0, layout, &b));
    Ok(sa + sb - vn_entropy(rho))
}

/// Column-stacking vectorization: `vec(A)[j·d + i] = A[i,j]`.
pub fn vectorize(a: &CMat) -> CVec {
    CVec::from_column_slice(a.as_slice())
}

pub fn unvectorize(v: &CVec, d: usize) -> CMat {
    CMat::from_column_slice(d, d, v.as_slice())
}

/// Linear map on `d×d` matrices acting on column-stacked vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    d: usize,
    mat: CMat,
}

impl Superoperator {
    pub fn from_matrix(d: usize, mat: CMat) -> Result<Self> {
        if mat.nrows() != d * d || mat.ncols() != d * d {
            return Err(Error::invalid(format!("superoperator must be {0}x{0}", d * d)));
        }
        Ok(Self { d, mat })
    }

    pub fn identity(d: usize) -> Self {
        Self { d, mat: identity(d * d) }
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn mat(&self) -> &CMat {
        &self.mat
    }

    pub fn apply(&self, rho: &CMat) -> CMat {
        unvectorize(&(&self.mat * vectorize(rho)), self.d)
    }

    /// `self ∘ other` (other acts first).
    pub fn compose(&self, other: &Superoperator) -> Superoperator {
        Self { d: self.d, mat: &self.mat * &other.mat }
    }

    /// Largest deviation of `Tr[Φ(|i⟩⟨j|)]` from `δ_ij`.
    pub fn trace_preservation_error(&self) -> f64 {
        let d = self.d;
        let mut worst: f64 = 0.0;
        for j in 0..d {
            for i in 0..d {
                let col = j * d + i;
                let tr: C64 = (0..d).map(|k| self.mat[(k * d + k, col)]).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((tr - target).norm());
            }
        }
        worst
    }
}

/// Matrix of a linear map, built column by column from the matrix units.
pub fn superop_from_action<F>(apply: F, d: usize) -> Superoperator
where
    F: Fn(&CMat) -> CMat,
{
    let mut mat = CMat::zeros(d * d, d * d);
    for j in 0..d {
        for i in 0..d {
            let mut unit = CMat::zeros(d, d);
            unit[(i, j)] = c(1.0, 0.0);
            let image = apply(&unit);
            mat.set_column(j * d + i, &vectorize(&image));
        }
    }
    Superoperator { d, mat }
}

/// `(Φ ⊗ id)|φ⁺⟩⟨φ⁺|` with the system factor first.
pub fn choi_state(s: &Superoperator) -> CMat {
    let d = s.d;
    let mut out = CMat::zeros(d * d, d * d);
    for i in 0..d {
        for j in 0..d {
            let image = unvectorize(&s.mat.column(j * d + i).into_owned(), d);
            for a in 0..d {
                for b in 0..d {
                    out[(a * d + i, b * d + j)] = image[(a, b)] / d as f64;
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub map: Superoperator,
    /// True when at least one singular value was discarded.
    pub singular: bool,
    pub discarded: usize,
    /// `σ_max / σ_min` over the kept singular values.
    pub condition: f64,
}

/// SVD pseudo-inverse discarding singular values below `tol·σ_max`.
pub fn regularized_inverse(s: &Superoperator, tol: f64) -> Result<PseudoInverse> {
    let svd = s.mat.clone().svd(true, true);
    let sigma_max = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cutoff = tol * sigma_max;
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    let n = s.mat.nrows();
    let mut inv = CMat::zeros(n, n);
    let mut kept = 0;
    for (k, &sv) in svd.singular_values.iter().enumerate() {
        if sv > 0.0 && sv >= cutoff {
            kept += 1;
            let vk = v_t.row(k).adjoint();
            let uk = u.column(k).adjoint();
            inv += (vk * uk).scale(1.0 / sv);
        }
    }
    if kept == 0 {
        return Err(Error::SingularMap);
    }
    let discarded = svd.singular_values.len() - kept;
    // The SVD fixes the rank; a full-rank map is inverted by LU instead, since
    // the singular vectors lose accuracy when singular values nearly coincide.
    if discarded == 0 {
        if let Some(lu_inv) = s.mat.clone().lu().try_inverse() {
            inv = lu_inv;
        }
    }
    let sigma_min =
        svd.singular_values.iter().copied().filter(|&sv| sv > 0.0 && sv >= cutoff).fold(f64::INFINITY, f64::min);
    Ok(PseudoInverse {
        map: Superoperator { d: s.d, mat: inv },
        singular: discarded > 0,
        discarded,
        condition: sigma_max / sigma_min,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn ket(v: &[C64]) -> CVec {
        CVec::from_column_slice(v)
    }

    fn phi_plus() -> CVec {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        ket(&[c(s, 0.), c(0., 0.), c(0., 0.), c(s, 0.)])
    }

    #[test]
    fn kron_examples() {
        assert_eq!(kron(&identity(2), &identity(2)), identity(4));
        let zz = kron(&pauli_z(), &pauli_z());
        let diag: Vec<f64> = (0..4).map(|i| zz[(i, i)].re).collect();
        assert_eq!(diag, vec![1., -1., -1., 1.]);
        let xi = kron(&pauli_x(), &identity(2));
        let mut v10 = CVec::zeros(4);
        v10[2] = c(1., 0.);
        let out = xi * v10;
        assert_eq!(out[0], c(1., 0.));
        assert_abs_diff_eq!(out.norm(), 1.0);
    }

    #[test]
    fn partial_trace_bell_and_errors() {
        let rho = DensityMatrix::from_ket(&phi_plus()).unwrap();
        let l = RegisterLayout::qubits(2);
        let r = partial_trace(&rho, &l, &[0]).unwrap();
        assert!(max_abs_diff(r.mat(), &identity(2).scale(0.5)) < 1e-15);
        assert!(partial_trace(&rho, &l, &[]).is_err());
        assert!(partial_trace(&rho, &l, &[2]).is_err());
        assert!(partial_trace(&rho, &RegisterLayout::register(), &[0]).is_err());
    }

    #[test]
    fn partial_transpose_bell_min_eigenvalue() {
        let rho = DensityMatrix::from_ket(&phi_plus()).unwrap();
        let pt = partial_transpose(&rho, &RegisterLayout::qubits(2), &[1]).unwrap();
        assert_abs_diff_eq!(hermitian_eigenvalues(&pt)[0], -0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(pt.trace().re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_norm_examples() {
        assert_abs_diff_eq!(trace_norm(&identity(2)), 2.0, epsilon = 1e-14);
        let m = pauli_z() - pauli_x();
        assert_abs_diff_eq!(trace_norm(&m), 2.0 * 2f64.sqrt(), epsilon = 1e-12);
        // non-Hermitian: |0><1| has one singular value 1
        let mut e01 = CMat::zeros(2, 2);
        e01[(0, 1)] = c(1., 0.);
        assert_abs_diff_eq!(trace_norm(&e01), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn trace_distance_examples() {
        let z0 = DensityMatrix::from_ket(&ket(&[c(1., 0.), c(0., 0.)])).unwrap();
        let z1 = DensityMatrix::from_ket(&ket(&[c(0., 0.), c(1., 0.)])).unwrap();
        assert_abs_diff_eq!(trace_distance(&z0, &z1).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(trace_distance(&z0, &z0).unwrap(), 0.0);
        let big = DensityMatrix::maximally_mixed(4);
        assert!(matches!(trace_distance(&z0, &big), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn entropy_examples() {
        let z0 = DensityMatrix::from_ket(&ket(&[c(1., 0.), c(0., 0.)])).unwrap();
        assert_abs_diff_eq!(vn_entropy(&z0), 0.0);
        assert_abs_diff_eq!(vn_entropy(&DensityMatrix::maximally_mixed(2)), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(vn_entropy(&DensityMatrix::maximally_mixed(4)), 2.0, epsilon = 1e-14);
    }

    #[test]
    fn mutual_information_bell() {
        let rho = DensityMatrix::from_ket(&phi_plus()).unwrap();
        let i = mutual_information(&rho, &RegisterLayout::qubits(2), &[0]).unwrap();
        assert_abs_diff_eq!(i, 2.0, epsilon = 1e-12);
        let prod = DensityMatrix::maximally_mixed(2).tensor(&z_state());
        assert_abs_diff_eq!(mutual_information(&prod, &RegisterLayout::qubits(2), &[0]).unwrap(), 0.0, epsilon = 1e-12);
    }

    fn z_state() -> DensityMatrix {
        DensityMatrix::from_ket(&ket(&[c(1., 0.), c(0., 0.)])).unwrap()
    }

    #[test]
    fn fractional_power_of_x() {
        let x = UnitaryOp::new(pauli_x()).unwrap();
        let half = unitary_fractional_power(&x, 0.5).unwrap();
        // eigenphases {0, π}: ½[(1+i)I + (1−i)X]
        let expected = (identity(2) * c(1., 1.) + pauli_x() * c(1., -1.)).scale(0.5);
        assert!(max_abs_diff(half.mat(), &expected) < 1e-12);
        assert!(max_abs_diff(unitary_fractional_power(&x, 0.0).unwrap().mat(), &identity(2)) < 1e-12);
        assert!(max_abs_diff(unitary_fractional_power(&x, 1.0).unwrap().mat(), &pauli_x()) < 1e-12);
    }

    #[test]
    fn fractional_power_rejects_non_unitary() {
        let not_u = UnitaryOp::from_trusted(identity(2).scale(2.0));
        assert!(unitary_fractional_power(&not_u, 0.5).is_err());
    }

    #[test]
    fn generator_reproduces_power() {
        let u = UnitaryOp::new(kron(&pauli_x(), &pauli_z())).unwrap();
        let spec = UnitarySpectrum::new(&u).unwrap();
        let h = spec.generator();
        assert!(max_abs_diff(h.evolve(0.37).mat(), spec.power(0.37).mat()) < 1e-12);
    }

    #[test]
    fn superop_examples() {
        let id = superop_from_action(|m| m.clone(), 2);
        assert_eq!(id.mat(), &identity(4));
        let x = pauli_x();
        let conj_x = superop_from_action(|m| &x * m * &x, 2);
        let mut perm = CMat::zeros(4, 4);
        for (a, b) in [(0, 3), (3, 0), (1, 2), (2, 1)] {
            perm[(a, b)] = c(1., 0.);
        }
        assert_eq!(conj_x.mat(), &perm);
        let p = 0.3;
        let dep = superop_from_action(|m| m.scale(p) + identity(2) * (m.trace() * (1.0 - p) / 2.0), 2);
        let out = dep.apply(z_state().mat());
        assert_abs_diff_eq!(out[(0, 0)].re, (1.0 + p) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(out[(1, 1)].re, (1.0 - p) / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(dep.trace_preservation_error(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn choi_examples() {
        let id = Superoperator::identity(2);
        assert!(max_abs_diff(&choi_state(&id), &outer(&phi_plus())) < 1e-15);
        let z = pauli_z();
        let conj_z = superop_from_action(|m| &z * m * &z, 2);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi_minus = ket(&[c(s, 0.), c(0., 0.), c(0., 0.), c(-s, 0.)]);
        assert!(max_abs_diff(&choi_state(&conj_z), &outer(&phi_minus)) < 1e-15);
        assert_abs_diff_eq!(trace_norm(&choi_state(&conj_z)), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn regularized_inverse_is_accurate_for_clustered_singular_values() {
        // Singular values ≈ 1, 0.0333, 0.0332, 0.0299; the SVD's singular
        // vectors alone give an inverse that is off by ~1e-4 here.
        use crate::register::{system_map, DynamicsScheme, WernerParam};
        let s = system_map(DynamicsScheme::BLOCK, WernerParam::new(0.02).unwrap(), 0.905).unwrap();
        let inv = regularized_inverse(&s, PINV_TOL).unwrap();
        assert!(!inv.singular);
        assert!(max_abs_diff(&(inv.map.mat() * s.mat()), &identity(4)) < 1e-12);
    }

    #[test]
    fn regularized_inverse_examples() {
        let id = Superoperator::identity(2);
        let inv = regularized_inverse(&id, PINV_TOL).unwrap();
        assert!(!inv.singular);
        assert_abs_diff_eq!(inv.condition, 1.0, epsilon = 1e-12);
        assert!(max_abs_diff(inv.map.mat(), &identity(4)) < 1e-14);
        let two = Superoperator::from_matrix(2, identity(4).scale(2.0)).unwrap();
        assert!(max_abs_diff(regularized_inverse(&two, PINV_TOL).unwrap().map.mat(), &identity(4).scale(0.5)) < 1e-14);
        // full depolarizer has rank one
        let dep = superop_from_action(|m| identity(2) * (m.trace() / 2.0), 2);
        let inv = regularized_inverse(&dep, PINV_TOL).unwrap();
        assert!(inv.singular);
        assert_eq!(inv.discarded, 3);
        let zero = Superoperator::from_matrix(2, CMat::zeros(4, 4)).unwrap();
        assert!(matches!(regularized_inverse(&zero, PINV_TOL), Err(Error::SingularMap)));
    }

    #[test]
    fn density_matrix_validation() {
        assert!(DensityMatrix::new(identity(2)).is_err());
        assert!(DensityMatrix::new(pauli_x()).is_err());
        let bad = CMat::from_row_slice(2, 2, &[c(1.5, 0.), c(0., 0.), c(0., 0.), c(-0.5, 0.)]);
        assert!(DensityMatrix::new(bad).is_err());
        assert!(DensityMatrix::new(identity(2).scale(0.5)).is_ok());
    }
}
