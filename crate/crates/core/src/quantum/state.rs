use crate::error::{Error, Result};
use crate::linalg::{self, c, CMatrix, CVector, C64, PSD_TOLERANCE};

/// Tolerance on the norm of a [`StateVector`] and the trace of a [`DensityMatrix`].
pub const NORM_TOLERANCE: f64 = 1e-10;

/// For every basis index of a multipartite space, the pair
/// `(index in the remaining factors, index in the chosen factors)`.
///
/// Both sub-indices are row-major over their factors, the remaining factors in
/// ascending order and the chosen factors in the order given.
pub(crate) fn split_layout(dims: &[usize], chosen: &[usize]) -> Vec<(usize, usize)> {
    let total: usize = dims.iter().product();
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !chosen.contains(k)).collect();
    (0..total)
        .map(|idx| {
            let digit = |k: usize| (idx / strides[k]) % dims[k];
            let pack = |factors: &[usize]| factors.iter().fold(0, |acc, &k| acc * dims[k] + digit(k));
            (pack(&rest), pack(chosen))
        })
        .collect()
}

pub(crate) fn check_factors(dims: &[usize], factors: &[usize]) -> Result<()> {
    if factors.is_empty() {
        return Err(Error::InvalidArgument("empty subsystem set".into()));
    }
    for (pos, &f) in factors.iter().enumerate() {
        if f >= dims.len() {
            return Err(Error::InvalidArgument(format!("subsystem {f} out of range for {} factors", dims.len())));
        }
        if factors[..pos].contains(&f) {
            return Err(Error::InvalidArgument(format!("subsystem {f} listed twice")));
        }
    }
    Ok(())
}

fn check_dims(dims: &[usize], len: usize) -> Result<()> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::InvalidState(format!("bad subsystem dimensions {dims:?}")));
    }
    let product: usize = dims.iter().product();
    if product != len {
        return Err(Error::DimensionMismatch { expected: product, found: len });
    }
    Ok(())
}

/// A normalized pure state on a product of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: CVector,
    dims: Vec<usize>,
}

impl StateVector {
    pub fn new(amps: Vec<C64>, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        let state = StateVector { amps: CVector::from_vec(amps), dims };
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("squared norm {} is not 1", norm * norm)));
        }
        Ok(state)
    }

    pub fn from_real(amps: &[f64], dims: Vec<usize>) -> Result<Self> {
        Self::new(amps.iter().map(|&x| c(x)).collect(), dims)
    }

    /// Rescales an arbitrary nonzero vector to unit norm.
    pub fn normalized(amps: CVector, dims: Vec<usize>) -> Result<Self> {
        check_dims(&dims, amps.len())?;
        let norm = amps.norm();
        if norm < 1e-300 {
            return Err(Error::InvalidState("cannot normalize the zero vector".into()));
        }
        Ok(StateVector { amps: amps.unscale(norm), dims })
    }

    pub(crate) fn from_parts(amps: CVector, dims: Vec<usize>) -> Self {
        debug_assert_eq!(amps.len(), dims.iter().product::<usize>());
        StateVector { amps, dims }
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let len = dims.iter().product();
        check_dims(&dims, len)?;
        if index >= len {
            return Err(Error::InvalidArgument(format!("basis index {index} out of range {len}")));
        }
        let mut amps = CVector::zeros(len);
        amps[index] = c(1.0);
        Ok(StateVector { amps, dims })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch { expected: self.len(), found: other.len() });
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let amps = self.amps.kronecker(&other.amps);
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        StateVector { amps, dims }
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { mat: linalg::outer(&self.amps), dims: self.dims.clone() }
    }

    /// Matrix with rows indexed by the remaining factors and columns by `free`.
    pub fn bipartite_matrix(&self, free: &[usize]) -> Result<CMatrix> {
        check_factors(&self.dims, free)?;
        let free_dim: usize = free.iter().map(|&k| self.dims[k]).product();
        let rest_dim = self.len() / free_dim;
        let mut m = CMatrix::zeros(rest_dim, free_dim);
        for (idx, (r, f)) in split_layout(&self.dims, free).into_iter().enumerate() {
            m[(r, f)] = self.amps[idx];
        }
        Ok(m)
    }

    /// Inverse of [`bipartite_matrix`](Self::bipartite_matrix).
    pub(crate) fn from_bipartite(m: &CMatrix, dims: &[usize], free: &[usize]) -> CVector {
        let layout = split_layout(dims, free);
        CVector::from_iterator(layout.len(), layout.into_iter().map(|(r, f)| m[(r, f)]))
    }

    /// Reduced density matrix on the factors in `keep` (ascending order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        check_factors(&self.dims, &keep)?;
        let a = self.bipartite_matrix(&keep)?;
        let mat = a.transpose() * a.conjugate();
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix { mat, dims })
    }

    /// Applies `op` to the listed factors (identity elsewhere). The result is
    /// not renormalized.
    pub fn apply_local(&self, op: &CMatrix, factors: &[usize]) -> Result<CVector> {
        check_factors(&self.dims, factors)?;
        let local: usize = factors.iter().map(|&k| self.dims[k]).product();
        if op.nrows() != local || op.ncols() != local {
            return Err(Error::DimensionMismatch { expected: local, found: op.nrows() });
        }
        let a = self.bipartite_matrix(factors)?;
        let moved = a * op.transpose();
        Ok(Self::from_bipartite(&moved, &self.dims, factors))
    }

    /// Same as [`apply_local`](Self::apply_local) for a unitary, keeping the
    /// result a state.
    pub fn apply_unitary(&self, op: &CMatrix, factors: &[usize]) -> Result<StateVector> {
        let amps = self.apply_local(op, factors)?;
        Ok(StateVector { amps, dims: self.dims.clone() })
    }

    /// Reorders the factors: factor `k` of the result is factor `order[k]` of
    /// `self`.
    pub fn permute_factors(&self, order: &[usize]) -> Result<StateVector> {
        check_factors(&self.dims, order)?;
        if order.len() != self.dims.len() {
            return Err(Error::InvalidArgument(format!(
                "permutation of {} factors has {} entries",
                self.dims.len(),
                order.len()
            )));
        }
        let mut amps = CVector::zeros(self.len());
        for (idx, (_, to)) in split_layout(&self.dims, order).into_iter().enumerate() {
            amps[to] = self.amps[idx];
        }
        let dims = order.iter().map(|&k| self.dims[k]).collect();
        Ok(StateVector { amps, dims })
    }

    /// `(⟨v| ⊗ I) |self⟩` with `v` acting on `factor`; the factor disappears
    /// from the result. Returns the unnormalized amplitudes.
    pub fn contract(&self, factor: usize, v: &StateVector) -> Result<(CVector, Vec<usize>)> {
        check_factors(&self.dims, &[factor])?;
        if v.len() != self.dims[factor] {
            return Err(Error::DimensionMismatch { expected: self.dims[factor], found: v.len() });
        }
        let a = self.bipartite_matrix(&[factor])?;
        let out = a * v.amps.conjugate();
        let mut dims = self.dims.clone();
        dims.remove(factor);
        if dims.is_empty() {
            dims.push(1);
        }
        Ok((out, dims))
    }
}

/// A density matrix on a product of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    mat: CMatrix,
    dims: Vec<usize>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity.
    pub fn new(mat: CMatrix, dims: Vec<usize>) -> Result<Self> {
        if !mat.is_square() {
            return Err(Error::InvalidState("density matrix must be square".into()));
        }
        check_dims(&dims, mat.nrows())?;
        if !linalg::is_hermitian(&mat, NORM_TOLERANCE) {
            return Err(Error::InvalidState("density matrix is not Hermitian".into()));
        }
        let tr = mat.trace();
        if (tr.re - 1.0).abs() > NORM_TOLERANCE || tr.im.abs() > NORM_TOLERANCE {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        let (values, _) = linalg::hermitian_eigen(&mat);
        if let Some(&min) = values.last() {
            if min < -PSD_TOLERANCE {
                return Err(Error::InvalidState(format!("negative eigenvalue {min}")));
            }
        }
        Ok(DensityMatrix { mat, dims })
    }

    pub(crate) fn from_parts(mat: CMatrix, dims: Vec<usize>) -> Self {
        debug_assert_eq!(mat.nrows(), dims.iter().product::<usize>());
        DensityMatrix { mat, dims }
    }

    pub fn maximally_mixed(dims: Vec<usize>) -> Result<Self> {
        let n: usize = dims.iter().product();
        check_dims(&dims, n)?;
        Ok(DensityMatrix { mat: linalg::identity(n).unscale(n as f64), dims })
    }

    /// Equal-weight mixture of pure states sharing one set of dims.
    pub fn uniform_mixture(states: &[StateVector]) -> Result<Self> {
        let first = states.first().ok_or_else(|| Error::InvalidArgument("empty mixture".into()))?;
        let n = first.len();
        let mut mat = CMatrix::zeros(n, n);
        for s in states {
            if s.dims != first.dims {
                return Err(Error::DimensionMismatch { expected: n, found: s.len() });
            }
            mat += linalg::outer(&s.amps);
        }
        Ok(DensityMatrix { mat: mat.unscale(states.len() as f64), dims: first.dims.clone() })
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.mat.trace()
    }

    pub fn tensor(&self, other: &DensityMatrix) -> DensityMatrix {
        let mat = linalg::kron(&self.mat, &other.mat);
        let dims = self.dims.iter().chain(&other.dims).copied().collect();
        DensityMatrix { mat, dims }
    }

    /// Traces out every factor not listed in `keep`. Kept factors appear in
    /// ascending order in the result.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        let mut keep = keep.to_vec();
        keep.sort_unstable();
        check_factors(&self.dims, &keep)?;
        let keep_dim: usize = keep.iter().map(|&k| self.dims[k]).product();
        let traced_dim = self.dim() / keep_dim;
        // full index for every (traced, kept) pair
        let mut compose = vec![0usize; keep_dim * traced_dim];
        let layout = split_layout(&self.dims, &keep);
        for (idx, &(t, k)) in layout.iter().enumerate() {
            compose[t * keep_dim + k] = idx;
        }
        let mut out = CMatrix::zeros(keep_dim, keep_dim);
        for t in 0..traced_dim {
            let row = &compose[t * keep_dim..(t + 1) * keep_dim];
            for (i, &a) in row.iter().enumerate() {
                for (j, &b) in row.iter().enumerate() {
                    out[(i, j)] += self.mat[(a, b)];
                }
            }
        }
        let dims = keep.iter().map(|&k| self.dims[k]).collect();
        Ok(DensityMatrix { mat: out, dims })
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigen(&self.mat).0
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.dims == other.dims && linalg::max_abs_diff(&self.mat, &other.mat) <= tol
    }
}

/// Either kind of state, for operations that accept both.
#[derive(Debug, Clone, PartialEq)]
pub enum QuantumState {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl QuantumState {
    pub fn dims(&self) -> &[usize] {
        match self {
            QuantumState::Pure(s) => s.dims(),
            QuantumState::Mixed(r) => r.dims(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn to_density(&self) -> DensityMatrix {
        match self {
            QuantumState::Pure(s) => s.density(),
            QuantumState::Mixed(r) => r.clone(),
        }
    }
}

impl From<StateVector> for QuantumState {
    fn from(s: StateVector) -> Self {
        QuantumState::Pure(s)
    }
}

impl From<DensityMatrix> for QuantumState {
    fn from(r: DensityMatrix) -> Self {
        QuantumState::Mixed(r)
    }
}

/// Kronecker product of two states of the same kind.
pub fn tensor(a: &QuantumState, b: &QuantumState) -> Result<QuantumState> {
    match (a, b) {
        (QuantumState::Pure(x), QuantumState::Pure(y)) => Ok(QuantumState::Pure(x.tensor(y))),
        (QuantumState::Mixed(x), QuantumState::Mixed(y)) => Ok(QuantumState::Mixed(x.tensor(y))),
        _ => Err(Error::MixedKinds),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ket0() -> StateVector {
        StateVector::from_real(&[1.0, 0.0], vec![2]).unwrap()
    }

    fn bell() -> StateVector {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::from_real(&[h, 0.0, 0.0, h], vec![2, 2]).unwrap()
    }

    #[test]
    fn rejects_unnormalized_and_bad_dims() {
        assert!(StateVector::from_real(&[1.0, 1.0], vec![2]).is_err());
        assert!(matches!(StateVector::from_real(&[1.0, 0.0, 0.0], vec![2]), Err(Error::DimensionMismatch { .. })));
        let not_herm = CMatrix::from_row_slice(2, 2, &[c(0.5), c(0.1), c(0.0), c(0.5)]);
        assert!(DensityMatrix::new(not_herm, vec![2]).is_err());
        let negative = CMatrix::from_row_slice(2, 2, &[c(1.5), c(0.0), c(0.0), c(-0.5)]);
        assert!(DensityMatrix::new(negative, vec![2]).is_err());
    }

    #[test]
    fn tensor_of_basis_kets() {
        let s = ket0().tensor(&ket0());
        assert_eq!(s.dims(), &[2, 2]);
        let expect = [1.0, 0.0, 0.0, 0.0];
        for (a, e) in s.amplitudes().iter().zip(expect) {
            assert!((a - c(e)).norm() < 1e-15);
        }
    }

    #[test]
    fn tensor_rejects_mixed_kinds() {
        let a = QuantumState::Pure(ket0());
        let b = QuantumState::Mixed(ket0().density());
        assert_eq!(tensor(&a, &b), Err(Error::MixedKinds));
        assert!(tensor(&b, &b).is_ok());
    }

    #[test]
    fn partial_trace_of_product_state() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus = StateVector::from_real(&[h, h], vec![2]).unwrap();
        let rho = plus.density().tensor(&ket0().density());
        let reduced = rho.partial_trace(&[0]).unwrap();
        assert!(reduced.approx_eq(&plus.density(), 1e-14));
        let other = rho.partial_trace(&[1]).unwrap();
        assert!(other.approx_eq(&ket0().density(), 1e-14));
    }

    #[test]
    fn bell_state_reduces_to_maximally_mixed() {
        let mixed = DensityMatrix::maximally_mixed(vec![2]).unwrap();
        for keep in [0, 1] {
            assert!(bell().density().partial_trace(&[keep]).unwrap().approx_eq(&mixed, 1e-14));
            assert!(bell().reduced(&[keep]).unwrap().approx_eq(&mixed, 1e-14));
        }
    }

    #[test]
    fn partial_trace_rejects_empty_keep() {
        assert!(bell().density().partial_trace(&[]).is_err());
        assert!(bell().density().partial_trace(&[2]).is_err());
    }

    #[test]
    fn reduced_matches_density_partial_trace() {
        let amps: Vec<C64> = (0..12).map(|k| C64::new((k as f64).sin(), (k as f64 * 0.7).cos())).collect();
        let s = StateVector::normalized(CVector::from_vec(amps), vec![2, 3, 2]).unwrap();
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let a = s.reduced(&keep).unwrap();
            let b = s.density().partial_trace(&keep).unwrap();
            assert!(a.approx_eq(&b, 1e-13), "keep {keep:?}");
        }
    }

    #[test]
    fn apply_local_matches_kronecker() {
        let amps: Vec<C64> = (0..8).map(|k| C64::new(k as f64, 1.0 - k as f64)).collect();
        let s = StateVector::normalized(CVector::from_vec(amps), vec![2, 2, 2]).unwrap();
        let x = CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
        let full = linalg::kron(&linalg::kron(&linalg::identity(2), &x), &linalg::identity(2));
        let expect = &full * s.amplitudes();
        let got = s.apply_local(&x, &[1]).unwrap();
        assert!((expect - got).norm() < 1e-14);
    }

    #[test]
    fn contract_removes_factor() {
        let s = ket0().tensor(&bell());
        let (amps, dims) = s.contract(0, &ket0()).unwrap();
        assert_eq!(dims, vec![2, 2]);
        assert!((amps - bell().amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn permute_factors_reorders_tensor_product() {
        let a = StateVector::from_real(&[0.6, 0.8], vec![2]).unwrap();
        let b = StateVector::basis(vec![3], 2).unwrap();
        let ab = a.tensor(&b).tensor(&ket0());
        let moved = ab.permute_factors(&[1, 2, 0]).unwrap();
        assert_eq!(moved, b.tensor(&ket0()).tensor(&a));
        assert!(ab.permute_factors(&[0, 1]).is_err());
    }
}
