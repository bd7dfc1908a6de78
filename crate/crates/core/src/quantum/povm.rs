use rand::Rng;

use super::state::{check_factors, DensityMatrix, QuantumState, StateVector};
use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, PSD_TOLERANCE};

/// Tolerance on `Σ E_μ = I`.
pub const COMPLETENESS_TOLERANCE: f64 = 1e-9;
/// Below this total Born weight a measurement is considered ill-posed.
pub const MIN_TOTAL_PROBABILITY: f64 = 1e-12;

#[derive(Debug, Clone)]
struct Element {
    label: String,
    op: CMatrix,
    root: CMatrix,
}

/// A finite set of labelled positive operators summing to the identity.
#[derive(Debug, Clone)]
pub struct Povm {
    elements: Vec<Element>,
    dim: usize,
}

impl Povm {
    pub fn new(elements: Vec<(String, CMatrix)>) -> Result<Self> {
        Self::build(elements, false)
    }

    /// Faster path for orthogonal projectors: `√P = P`.
    pub fn projective(elements: Vec<(String, CMatrix)>) -> Result<Self> {
        Self::build(elements, true)
    }

    fn build(elements: Vec<(String, CMatrix)>, projective: bool) -> Result<Self> {
        let dim = elements.first().map(|(_, m)| m.nrows()).ok_or_else(|| Error::InvalidPovm("no elements".into()))?;
        let mut sum = CMatrix::zeros(dim, dim);
        let mut out = Vec::with_capacity(elements.len());
        for (label, op) in elements {
            if op.nrows() != dim || op.ncols() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: op.nrows() });
            }
            if !linalg::is_hermitian(&op, COMPLETENESS_TOLERANCE) {
                return Err(Error::InvalidPovm(format!("element {label} is not Hermitian")));
            }
            let root = if projective {
                if linalg::max_abs_diff(&(&op * &op), &op) > COMPLETENESS_TOLERANCE {
                    return Err(Error::InvalidPovm(format!("element {label} is not a projector")));
                }
                op.clone()
            } else {
                let (values, vectors) = linalg::hermitian_eigen(&op);
                if values.last().is_some_and(|&v| v < -PSD_TOLERANCE) {
                    return Err(Error::InvalidPovm(format!("element {label} is not positive")));
                }
                linalg::spectral_map(&values, &vectors, |x| x.max(0.0).sqrt())
            };
            sum += &op;
            out.push(Element { label, op, root });
        }
        if linalg::max_abs_diff(&sum, &linalg::identity(dim)) > COMPLETENESS_TOLERANCE {
            return Err(Error::InvalidPovm("elements do not sum to the identity".into()));
        }
        Ok(Povm { elements: out, dim })
    }

    /// The two-outcome test `{|φ⟩⟨φ|, I − |φ⟩⟨φ|}`, labelled `pass` and `⊥`.
    pub fn check(target: &StateVector, pass_label: &str) -> Result<Self> {
        let p = linalg::outer(target.amplitudes());
        let rest = linalg::identity(p.nrows()) - &p;
        Self::projective(vec![(pass_label.to_string(), p), ("⊥".to_string(), rest)])
    }

    /// Projective measurement in the computational basis, labelled by index.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| {
                let mut p = CMatrix::zeros(dim, dim);
                p[(k, k)] = linalg::c(1.0);
                (k.to_string(), p)
            })
            .collect();
        Self::projective(elements).expect("computational basis is a valid POVM")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn label(&self, k: usize) -> &str {
        &self.elements[k].label
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.elements.iter().map(|e| e.label.as_str())
    }

    pub fn element(&self, k: usize) -> &CMatrix {
        &self.elements[k].op
    }

    pub fn sqrt_element(&self, k: usize) -> &CMatrix {
        &self.elements[k].root
    }
}

/// Result of sampling one POVM outcome.
#[derive(Debug, Clone)]
pub struct MeasurementSample {
    pub index: usize,
    pub label: String,
    pub probability: f64,
    pub post: QuantumState,
}

/// Picks an index from `probs` using one uniform draw `u ∈ [0, 1)`.
/// The weights are normalized by their sum first.
pub fn sample_index(probs: &[f64], u: f64) -> Result<usize> {
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    if total < MIN_TOTAL_PROBABILITY {
        return Err(Error::InvalidPovm("all outcome probabilities vanish".into()));
    }
    let target = u * total;
    let mut acc = 0.0;
    let mut last_nonzero = 0;
    for (k, &p) in probs.iter().enumerate() {
        let p = p.max(0.0);
        if p > 0.0 {
            last_nonzero = k;
        }
        acc += p;
        if target < acc {
            return Ok(k);
        }
    }
    Ok(last_nonzero)
}

fn resolve_factors(dims: &[usize], povm: &Povm, factors: Option<&[usize]>) -> Result<Vec<usize>> {
    let factors: Vec<usize> = match factors {
        Some(f) => f.to_vec(),
        None => (0..dims.len()).collect(),
    };
    check_factors(dims, &factors)?;
    let local: usize = factors.iter().map(|&k| dims[k]).product();
    if local != povm.dim() {
        return Err(Error::DimensionMismatch { expected: local, found: povm.dim() });
    }
    Ok(factors)
}

/// Born probabilities `tr(ρ E_μ)` for a POVM acting on `factors` (all of
/// them when `None`).
pub fn probabilities(state: &QuantumState, povm: &Povm, factors: Option<&[usize]>) -> Result<Vec<f64>> {
    let factors = resolve_factors(state.dims(), povm, factors)?;
    match state {
        QuantumState::Pure(s) => {
            (0..povm.len()).map(|k| Ok(s.apply_local(povm.sqrt_element(k), &factors)?.norm_squared())).collect()
        }
        QuantumState::Mixed(r) => {
            let full = embed_all(r.dims(), povm, &factors);
            Ok(full.iter().map(|e| (e * r.matrix()).trace().re.max(0.0)).collect())
        }
    }
}

fn embed_all(dims: &[usize], povm: &Povm, factors: &[usize]) -> Vec<CMatrix> {
    (0..povm.len()).map(|k| embed(dims, povm.element(k), factors)).collect()
}

/// Lifts a local operator to the full space.
pub fn embed(dims: &[usize], op: &CMatrix, factors: &[usize]) -> CMatrix {
    let n: usize = dims.iter().product();
    let layout = super::state::split_layout(dims, factors);
    CMatrix::from_fn(n, n, |i, j| {
        let (ri, fi) = layout[i];
        let (rj, fj) = layout[j];
        if ri == rj {
            op[(fi, fj)]
        } else {
            linalg::c(0.0)
        }
    })
}

/// Post-measurement state for outcome `k` with probability `p`.
pub fn collapse(
    state: &QuantumState,
    povm: &Povm,
    factors: Option<&[usize]>,
    k: usize,
    p: f64,
) -> Result<QuantumState> {
    let factors = resolve_factors(state.dims(), povm, factors)?;
    if p <= 0.0 {
        return Err(Error::InvalidArgument(format!("outcome {k} has zero probability")));
    }
    match state {
        QuantumState::Pure(s) => {
            let amps = s.apply_local(povm.sqrt_element(k), &factors)?;
            Ok(QuantumState::Pure(StateVector::normalized(amps, s.dims().to_vec())?))
        }
        QuantumState::Mixed(r) => {
            let root = embed(r.dims(), povm.sqrt_element(k), &factors);
            let mat = (&root * r.matrix() * &root).unscale(p);
            Ok(QuantumState::Mixed(DensityMatrix::from_parts(mat, r.dims().to_vec())))
        }
    }
}

/// Samples a full-space POVM on `state`.
pub fn measure<R: Rng + ?Sized>(state: &QuantumState, povm: &Povm, rng: &mut R) -> Result<MeasurementSample> {
    measure_on(state, povm, None, rng)
}

/// Samples a POVM acting on a subset of the state's factors.
pub fn measure_on<R: Rng + ?Sized>(
    state: &QuantumState,
    povm: &Povm,
    factors: Option<&[usize]>,
    rng: &mut R,
) -> Result<MeasurementSample> {
    let probs = probabilities(state, povm, factors)?;
    let index = sample_index(&probs, rng.random::<f64>())?;
    let total: f64 = probs.iter().sum();
    let probability = probs[index] / total;
    let post = collapse(state, povm, factors, index, probs[index])?;
    Ok(MeasurementSample { index, label: povm.label(index).to_string(), probability, post })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use rand::SeedableRng;

    fn rng() -> rand_chacha::ChaCha8Rng {
        rand_chacha::ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn rejects_incomplete_or_negative() {
        let p0 = CMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(0.0)]);
        assert!(matches!(Povm::new(vec![("0".into(), p0.clone())]), Err(Error::InvalidPovm(_))));
        let neg = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(-0.5)]);
        let big = CMatrix::from_row_slice(2, 2, &[c(0.0), c(0.0), c(0.0), c(1.5)]);
        assert!(Povm::new(vec![("a".into(), p0.clone()), ("b".into(), neg), ("c".into(), big)]).is_err());
    }

    #[test]
    fn z_measurement_of_ket0() {
        let s: QuantumState = StateVector::from_real(&[1.0, 0.0], vec![2]).unwrap().into();
        let z = Povm::computational(2);
        for _ in 0..20 {
            let out = measure(&s, &z, &mut rng()).unwrap();
            assert_eq!(out.label, "0");
            assert!((out.probability - 1.0).abs() < 1e-15);
        }
    }

    #[test]
    fn vanishing_probabilities_are_an_error() {
        let s: QuantumState = StateVector::from_real(&[1.0, 0.0], vec![2]).unwrap().into();
        assert!(sample_index(&[0.0, 1e-13], 0.5).is_err());
        let z = Povm::computational(2);
        assert!(collapse(&s, &z, None, 1, 0.0).is_err());
    }

    #[test]
    fn local_measurement_collapses_partner() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bell: QuantumState = StateVector::from_real(&[h, 0.0, 0.0, h], vec![2, 2]).unwrap().into();
        let z = Povm::computational(2);
        let probs = probabilities(&bell, &z, Some(&[0])).unwrap();
        assert!((probs[0] - 0.5).abs() < 1e-15 && (probs[1] - 0.5).abs() < 1e-15);
        let out = measure_on(&bell, &z, Some(&[0]), &mut rng()).unwrap();
        let second = measure_on(&out.post, &z, Some(&[1]), &mut rng()).unwrap();
        assert_eq!(out.label, second.label);
        assert!((second.probability - 1.0).abs() < 1e-14);
    }

    #[test]
    fn mixed_and_pure_paths_agree() {
        let s = StateVector::from_real(&[0.6, 0.0, 0.0, 0.8], vec![2, 2]).unwrap();
        let q = 0.3f64.sqrt();
        let tilted = StateVector::from_real(&[(1.0 - 0.3f64).sqrt(), q], vec![2]).unwrap();
        let povm = Povm::check(&tilted, "pass").unwrap();
        let pure = probabilities(&s.clone().into(), &povm, Some(&[1])).unwrap();
        let mixed = probabilities(&s.density().into(), &povm, Some(&[1])).unwrap();
        for (a, b) in pure.iter().zip(&mixed) {
            assert!((a - b).abs() < 1e-14);
        }
        let post_pure = collapse(&s.clone().into(), &povm, Some(&[1]), 0, pure[0]).unwrap().to_density();
        let post_mixed = collapse(&s.density().into(), &povm, Some(&[1]), 0, mixed[0]).unwrap().to_density();
        assert!(post_pure.approx_eq(&post_mixed, 1e-13));
    }

    #[test]
    fn general_povm_uses_square_roots() {
        // trine-like unsharp measurement: E0 = diag(0.7, 0.2), E1 = diag(0.3, 0.8)
        let e0 = CMatrix::from_row_slice(2, 2, &[c(0.7), c(0.0), c(0.0), c(0.2)]);
        let e1 = CMatrix::from_row_slice(2, 2, &[c(0.3), c(0.0), c(0.0), c(0.8)]);
        let povm = Povm::new(vec![("0".into(), e0), ("1".into(), e1)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let plus: QuantumState = StateVector::from_real(&[h, h], vec![2]).unwrap().into();
        let probs = probabilities(&plus, &povm, None).unwrap();
        assert!((probs[0] - 0.45).abs() < 1e-14);
        let post = collapse(&plus, &povm, None, 0, probs[0]).unwrap();
        let QuantumState::Pure(v) = post else { panic!("pure in, pure out") };
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let ratio = v.amplitudes()[0].re / v.amplitudes()[1].re;
        assert!((ratio - (0.7f64 / 0.2).sqrt()).abs() < 1e-12);
    }
}
