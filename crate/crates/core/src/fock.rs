//! Two-photon bosonic Fock space over a small set of optical modes.
//!
//! A mode is one (polarization, path) channel. The canonical arrangement has
//! eight modes indexed 0..8 in the order
//!
//! ```text
//! 0 = H⊗a   1 = H⊗c   2 = V⊗a   3 = V⊗c     (photon-1 sector)
//! 4 = H⊗b   5 = H⊗d   6 = V⊗b   7 = V⊗d     (photon-2 sector)
//! ```
//!
//! Two-photon states are amplitude vectors over occupation vectors that sum
//! to 2 (36 of them for eight modes), ordered lexicographically on the
//! occupation vector. States are built from symmetric coefficient matrices:
//! `Σ_ij W_ij c_i† c_j† |0⟩`, where a double occupancy picks up the bosonic
//! √2 (`c_i†² |0⟩ = √2 |2_i⟩`).
//!
//! Mode unitaries act on creation operators as `a_i† = Σ_j U_ij c_j†`, which
//! on coefficient matrices reads `W' = Uᵀ W U`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::tol;

pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

/// Number of modes in the canonical two-photon arrangement.
pub const MODES: usize = 8;

/// Photon-1 sector of the canonical arrangement (paths a, c).
pub const PHOTON1_MODES: [usize; 4] = [0, 1, 2, 3];
/// Photon-2 sector of the canonical arrangement (paths b, d).
pub const PHOTON2_MODES: [usize; 4] = [4, 5, 6, 7];

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FockError {
    #[error("null state")]
    NullState,
    #[error("mode matrix deviates from unitarity by {0:.3e}")]
    NotUnitary(f64),
    #[error("dimension mismatch: expected {expected} modes, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("not in one-photon-per-side sector")]
    NotOnePhotonPerSide,
}

/// The two-photon occupation basis for `dim` modes, in lexicographic order.
///
/// Each basis element is an occupation vector with total 2, i.e. either
/// `|1_i 1_j⟩` (i < j) or `|2_i⟩`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    dim: usize,
    /// (i, j) with i ≤ j for each basis index, in canonical order.
    pairs: Vec<(usize, usize)>,
    /// pair → basis index, addressed as `i * dim + j` for i ≤ j.
    index: Vec<usize>,
}

impl Basis {
    pub fn two_photon(dim: usize) -> Basis {
        let mut occs: Vec<Vec<u8>> = Vec::with_capacity(dim * (dim + 1) / 2);
        for i in 0..dim {
            for j in i..dim {
                let mut occ = vec![0u8; dim];
                occ[i] += 1;
                occ[j] += 1;
                occs.push(occ);
            }
        }
        occs.sort();
        let pairs: Vec<(usize, usize)> = occs
            .iter()
            .map(|occ| {
                let mut nz = occ.iter().enumerate().filter(|(_, &n)| n > 0);
                let (i, &ni) = nz.next().expect("two photons");
                let j = if ni == 2 { i } else { nz.next().expect("second mode").0 };
                (i, j)
            })
            .collect();
        let mut index = vec![usize::MAX; dim * dim];
        for (idx, &(i, j)) in pairs.iter().enumerate() {
            index[i * dim + j] = idx;
        }
        Basis { dim, pairs, index }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Basis index of `|1_i 1_j⟩` (or `|2_i⟩` when i = j).
    pub fn index_of(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        self.index[i * self.dim + j]
    }

    /// The occupied mode pair (i ≤ j) at a basis index.
    pub fn pair_at(&self, idx: usize) -> (usize, usize) {
        self.pairs[idx]
    }
}

/// A pure two-photon state as an amplitude vector over [`Basis`] order.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    dim: usize,
    amp: CVec,
}

impl TwoPhotonState {
    /// Wraps a raw amplitude vector; callers are responsible for its norm.
    pub fn from_amplitudes(dim: usize, amp: CVec) -> Result<TwoPhotonState, FockError> {
        let expected = dim * (dim + 1) / 2;
        if amp.len() != expected {
            return Err(FockError::Dimension { expected, got: amp.len() });
        }
        Ok(TwoPhotonState { dim, amp })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amp
    }

    pub fn norm(&self) -> f64 {
        self.amp.norm()
    }

    /// Serializes as the canonical list of `[re, im]` pairs.
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::Value::Array(
            self.amp
                .iter()
                .map(|z| serde_json::json!([z.re, z.im]))
                .collect(),
        )
    }
}

/// Symmetric coefficient matrix defining a two-photon state.
///
/// Symmetry is enforced on construction: `new` stores `(W + Wᵀ)/2`, which
/// leaves already-symmetric input untouched and projects anything else onto
/// the physically meaningful part (only the symmetric part of W survives
/// contraction with the commuting pair `c_i† c_j†`).
#[derive(Debug, Clone, PartialEq)]
pub struct WMatrix(CMat);

impl WMatrix {
    pub fn new(w: CMat) -> WMatrix {
        let sym = (&w + w.transpose()).scale(0.5);
        WMatrix(sym)
    }

    pub fn zeros(dim: usize) -> WMatrix {
        WMatrix(CMat::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.0
    }

    /// Sets the symmetric pair `W[i,j] = W[j,i] = value`.
    pub fn set_pair(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] = value;
        self.0[(j, i)] = value;
    }

    /// Adds `value` to the symmetric pair (both `W[i,j]` and `W[j,i]`).
    pub fn add_pair(&mut self, i: usize, j: usize, value: C64) {
        self.0[(i, j)] += value;
        if i != j {
            self.0[(j, i)] += value;
        }
    }
}

/// `Σ_ij W_ij c_i† c_j† |0⟩` as an unnormalized amplitude vector.
///
/// Linear in W; the normalized constructor [`state_from_w`] sits on top.
pub fn state_from_w_unnormalized(w: &WMatrix) -> CVec {
    let dim = w.dim();
    let basis = Basis::two_photon(dim);
    let mut amp = CVec::zeros(basis.len());
    let m = w.matrix();
    for i in 0..dim {
        amp[basis.index_of(i, i)] += m[(i, i)] * C64::new(std::f64::consts::SQRT_2, 0.0);
        for j in (i + 1)..dim {
            // W_ij c_i†c_j† + W_ji c_j†c_i† act identically on |0⟩
            amp[basis.index_of(i, j)] += m[(i, j)] + m[(j, i)];
        }
    }
    amp
}

/// Builds the unit state `Σ_ij W_ij c_i† c_j† |0⟩ / ‖·‖`.
///
/// Returns the state together with the pre-normalization norm.
pub fn state_from_w(w: &WMatrix) -> Result<(TwoPhotonState, f64), FockError> {
    let amp = state_from_w_unnormalized(w);
    let n = amp.norm();
    if n == 0.0 {
        return Err(FockError::NullState);
    }
    let state = TwoPhotonState { dim: w.dim(), amp: amp.unscale(n) };
    Ok((state, n))
}

/// Recovers the coefficient matrix of a state: the inverse of
/// [`state_from_w`] up to overall normalization.
pub fn w_from_state(s: &TwoPhotonState) -> WMatrix {
    let dim = s.dim;
    let basis = Basis::two_photon(dim);
    let mut w = CMat::zeros(dim, dim);
    for (idx, &amp) in s.amp.iter().enumerate() {
        let (i, j) = basis.pair_at(idx);
        if i == j {
            w[(i, i)] = amp / C64::new(std::f64::consts::SQRT_2, 0.0);
        } else {
            w[(i, j)] = amp * C64::new(0.5, 0.0);
            w[(j, i)] = amp * C64::new(0.5, 0.0);
        }
    }
    WMatrix(w)
}

/// Hermitian inner product `⟨x|y⟩`.
pub fn inner(x: &TwoPhotonState, y: &TwoPhotonState) -> C64 {
    x.amp.dotc(&y.amp)
}

/// How far `u` is from satisfying `U U† = 1` (max-abs entry deviation).
pub fn unitarity_deviation(u: &CMat) -> f64 {
    let dim = u.nrows();
    let prod = u * u.adjoint();
    let mut dev: f64 = 0.0;
    for i in 0..dim {
        for j in 0..dim {
            let target = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
            dev = dev.max((prod[(i, j)] - target).norm());
        }
    }
    dev
}

/// Evolves a state through a mode unitary (`a_i† = Σ_j U_ij c_j†`).
///
/// Rejects matrices that are not unitary to within [`tol::UNITARITY`].
pub fn apply_unitary(u: &CMat, s: &TwoPhotonState) -> Result<TwoPhotonState, FockError> {
    let dev = unitarity_deviation(u);
    if dev > tol::UNITARITY {
        return Err(FockError::NotUnitary(dev));
    }
    if u.nrows() != s.dim {
        return Err(FockError::Dimension { expected: s.dim, got: u.nrows() });
    }
    let w = w_from_state(s);
    let w2 = WMatrix(u.transpose() * w.matrix() * u);
    let amp = state_from_w_unnormalized(&w2);
    Ok(TwoPhotonState { dim: s.dim, amp })
}

/// `M_kl = ⟨x| c_k† c_l |y⟩` over all mode pairs.
pub fn number_matrix(x: &TwoPhotonState, y: &TwoPhotonState) -> CMat {
    let dim = y.dim;
    let basis = Basis::two_photon(dim);
    let mut m = CMat::zeros(dim, dim);
    for (idx, &amp) in y.amp.iter().enumerate() {
        if amp.norm_sqr() < 1e-32 {
            continue;
        }
        let (i, j) = basis.pair_at(idx);
        // annihilate mode l ∈ {i, j}, then create mode k
        let lowered: &[(usize, usize, f64)] = if i == j {
            &[(i, i, std::f64::consts::SQRT_2)] // c_i |2_i⟩ = √2 |1_i⟩
        } else {
            &[(i, j, 1.0), (j, i, 1.0)] // (annihilated, survivor, factor)
        };
        for &(l, survivor, f1) in lowered {
            for k in 0..dim {
                let f2 = if k == survivor { std::f64::consts::SQRT_2 } else { 1.0 };
                let up = basis.index_of(k, survivor);
                m[(k, l)] += x.amp[up].conj() * amp * C64::new(f1 * f2, 0.0);
            }
        }
    }
    m
}

/// Applies the combined annihilator `A = Σ_k v_k c_k` to a two-photon state,
/// producing single-photon amplitudes (one entry per mode).
///
/// This is the direct Fock-space route to the quadratic forms built from
/// [`number_matrix`]: `v† M(x,y) v = ⟨A x, A y⟩`.
pub fn apply_annihilator(v: &CVec, s: &TwoPhotonState) -> CVec {
    let dim = s.dim;
    let basis = Basis::two_photon(dim);
    let mut out = CVec::zeros(dim);
    for (idx, &amp) in s.amp.iter().enumerate() {
        let (i, j) = basis.pair_at(idx);
        if i == j {
            // A |2_i⟩ = v_i √2 |1_i⟩
            out[i] += v[i] * amp * C64::new(std::f64::consts::SQRT_2, 0.0);
        } else {
            out[j] += v[i] * amp;
            out[i] += v[j] * amp;
        }
    }
    out
}

/// A bipartition of the modes used for Schmidt-rank computations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bipartition {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

impl Bipartition {
    /// The canonical photon cut: paths {a, c} vs {b, d}.
    pub fn photon_sectors() -> Bipartition {
        Bipartition { left: PHOTON1_MODES.to_vec(), right: PHOTON2_MODES.to_vec() }
    }
}

/// Schmidt rank of a one-photon-per-side state across `cut`.
///
/// Errors when any amplitude outside the one-photon-per-side sector exceeds
/// the orthogonality tolerance (e.g. double occupancy or both photons on the
/// same side).
pub fn schmidt_rank(s: &TwoPhotonState, cut: &Bipartition) -> Result<usize, FockError> {
    let basis = Basis::two_photon(s.dim);
    let side = |m: usize| -> Option<bool> {
        if cut.left.contains(&m) {
            Some(true)
        } else if cut.right.contains(&m) {
            Some(false)
        } else {
            None
        }
    };
    let mut a = CMat::zeros(cut.left.len(), cut.right.len());
    for (idx, &amp) in s.amp.iter().enumerate() {
        if amp.norm() < tol::ORTHOGONALITY {
            continue;
        }
        let (i, j) = basis.pair_at(idx);
        match (side(i), side(j)) {
            (Some(true), Some(false)) => {
                let r = cut.left.iter().position(|&m| m == i).expect("left mode");
                let c = cut.right.iter().position(|&m| m == j).expect("right mode");
                a[(r, c)] = amp;
            }
            (Some(false), Some(true)) => {
                let r = cut.left.iter().position(|&m| m == j).expect("left mode");
                let c = cut.right.iter().position(|&m| m == i).expect("right mode");
                a[(r, c)] = amp;
            }
            _ => return Err(FockError::NotOnePhotonPerSide),
        }
    }
    let svd = a.svd(false, false);
    Ok(svd.singular_values.iter().filter(|&&sv| sv > tol::RANK_CUTOFF).count())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::{prop_assert, prop_assert_eq, proptest};
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_state(rng: &mut impl Rng, dim: usize) -> TwoPhotonState {
        let mut w = WMatrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                w.add_pair(i, j, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            }
        }
        state_from_w(&w).expect("nonzero").0
    }

    fn random_unitary(rng: &mut impl Rng, dim: usize) -> CMat {
        // QR of a random complex matrix
        let m = CMat::from_fn(dim, dim, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
        let qr = m.qr();
        qr.q()
    }

    #[test]
    fn basis_is_lexicographic_and_complete() {
        let b = Basis::two_photon(8);
        assert_eq!(b.len(), 36);
        // lexicographically first occupation vector is (0,…,0,2) = |2_7⟩
        assert_eq!(b.pair_at(0), (7, 7));
        assert_eq!(b.pair_at(b.len() - 1), (0, 0));
        for idx in 0..b.len() {
            let (i, j) = b.pair_at(idx);
            assert_eq!(b.index_of(i, j), idx);
            assert_eq!(b.index_of(j, i), idx);
        }
    }

    #[test]
    fn single_pair_w_gives_basis_state() {
        let mut w = WMatrix::zeros(8);
        w.set_pair(0, 4, c(0.5, 0.0));
        let (s, prenorm) = state_from_w(&w).unwrap();
        assert_abs_diff_eq!(prenorm, 1.0, epsilon = 1e-12);
        let b = Basis::two_photon(8);
        assert_abs_diff_eq!(s.amplitudes()[b.index_of(0, 4)].re, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(s.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn double_occupancy_carries_sqrt2() {
        let mut w = WMatrix::zeros(8);
        w.set_pair(0, 0, c(1.0, 0.0));
        let (s, prenorm) = state_from_w(&w).unwrap();
        assert_abs_diff_eq!(prenorm, std::f64::consts::SQRT_2, epsilon = 1e-12);
        let b = Basis::two_photon(8);
        assert_abs_diff_eq!(s.amplitudes()[b.index_of(0, 0)].re, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn null_w_is_an_error() {
        assert_eq!(state_from_w(&WMatrix::zeros(8)), Err(FockError::NullState));
    }

    #[test]
    fn w_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let s = random_state(&mut rng, 8);
            let w = w_from_state(&s);
            let (s2, _) = state_from_w(&w).unwrap();
            let overlap = inner(&s, &s2).norm();
            assert_abs_diff_eq!(overlap, 1.0, epsilon = 1e-12);
            // round-trip is exact, not just up to phase
            assert!((s.amplitudes() - s2.amplitudes()).norm() < 1e-12);
        }
    }

    #[test]
    fn hom_bunching_on_a_beam_splitter() {
        // |1_0 1_4⟩ through a 50/50 splitter on modes (0,4): only double
        // occupancies survive.
        let mut w = WMatrix::zeros(8);
        w.set_pair(0, 4, c(0.5, 0.0));
        let (s, _) = state_from_w(&w).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let mut u = CMat::identity(8, 8);
        u[(0, 0)] = c(r, 0.0);
        u[(0, 4)] = c(r, 0.0);
        u[(4, 0)] = c(r, 0.0);
        u[(4, 4)] = c(-r, 0.0);
        let out = apply_unitary(&u, &s).unwrap();
        let b = Basis::two_photon(8);
        assert_abs_diff_eq!(out.amplitudes()[b.index_of(0, 4)].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitudes()[b.index_of(0, 0)].norm(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.amplitudes()[b.index_of(4, 4)].norm(), r, epsilon = 1e-12);
        assert_abs_diff_eq!(out.norm(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn apply_unitary_rejects_non_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let s = random_state(&mut rng, 8);
        let mut u = CMat::identity(8, 8);
        u[(0, 0)] = c(2.0, 0.0);
        assert!(matches!(apply_unitary(&u, &s), Err(FockError::NotUnitary(_))));
    }

    #[test]
    fn composition_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let s = random_state(&mut rng, 8);
            let u1 = random_unitary(&mut rng, 8);
            let u2 = random_unitary(&mut rng, 8);
            let a = apply_unitary(&u2, &apply_unitary(&u1, &s).unwrap()).unwrap();
            // with a_i† = Σ_j U_ij c_j†, applying U₁ then U₂ composes as
            // U₁·U₂ (each step re-expresses the operators in the next basis)
            let b = apply_unitary(&(&u1 * &u2), &s).unwrap();
            assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-10);
        }
    }

    #[test]
    fn number_matrix_trace_and_hermiticity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = random_state(&mut rng, 8);
        let m = number_matrix(&s, &s);
        let trace: C64 = (0..8).map(|k| m[(k, k)]).sum();
        assert_abs_diff_eq!(trace.re, 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(trace.im, 0.0, epsilon = 1e-12);
        assert!(unitarity_deviation(&CMat::identity(8, 8)) < 1e-15);
        let herm_dev = (&m - m.adjoint()).norm();
        assert!(herm_dev < 1e-12, "number_matrix(s,s) must be Hermitian");

        let t = random_state(&mut rng, 8);
        let gram = inner(&s, &t);
        let mt = number_matrix(&s, &t);
        let tr: C64 = (0..8).map(|k| mt[(k, k)]).sum();
        // Σ_k c_k†c_k is the total number operator: trace = 2⟨s|t⟩
        assert!((tr - gram * 2.0).norm() < 1e-12);
    }

    #[test]
    fn number_matrix_matches_annihilator_route() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..50 {
            let x = random_state(&mut rng, 8);
            let y = random_state(&mut rng, 8);
            let v = CVec::from_fn(8, |_, _| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
            let m = number_matrix(&x, &y);
            let quad = (v.adjoint() * &m * &v)[(0, 0)];
            let ax = apply_annihilator(&v, &x);
            let ay = apply_annihilator(&v, &y);
            let direct = ax.dotc(&ay);
            assert!((quad - direct).norm() < 1e-12, "quad {quad} vs direct {direct}");
        }
    }

    #[test]
    fn schmidt_rank_examples() {
        let cut = Bipartition::photon_sectors();
        let mut w = WMatrix::zeros(8);
        w.set_pair(0, 4, c(0.5, 0.0));
        let (product, _) = state_from_w(&w).unwrap();
        assert_eq!(schmidt_rank(&product, &cut).unwrap(), 1);

        let mut w2 = WMatrix::zeros(8);
        w2.set_pair(0, 0, c(1.0, 0.0));
        let (doubled, _) = state_from_w(&w2).unwrap();
        assert_eq!(schmidt_rank(&doubled, &cut), Err(FockError::NotOnePhotonPerSide));
    }

    proptest! {
        #[test]
        fn random_unitaries_preserve_norm(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = random_state(&mut rng, 8);
            let u = random_unitary(&mut rng, 8);
            let out = apply_unitary(&u, &s).unwrap();
            prop_assert!((out.norm() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn state_from_w_is_linear(seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut w1 = WMatrix::zeros(8);
            let mut w2 = WMatrix::zeros(8);
            for i in 0..8 {
                for j in i..8 {
                    w1.add_pair(i, j, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
                    w2.add_pair(i, j, c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5));
                }
            }
            let a = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let b = c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5);
            let combined = WMatrix::new(w1.matrix() * a + w2.matrix() * b);
            let lhs = state_from_w_unnormalized(&combined);
            let rhs = state_from_w_unnormalized(&w1) * a + state_from_w_unnormalized(&w2) * b;
            prop_assert!((lhs - rhs).norm() < 1e-12);
        }

        #[test]
        fn every_component_has_two_photons(i in 0usize..8, j in 0usize..8) {
            let mut w = WMatrix::zeros(8);
            w.add_pair(i.min(j), i.max(j), c(1.0, 0.0));
            let (s, _) = state_from_w(&w).unwrap();
            let basis = Basis::two_photon(8);
            for (idx, amp) in s.amplitudes().iter().enumerate() {
                if amp.norm() > 1e-12 {
                    let (a, b) = basis.pair_at(idx);
                    prop_assert_eq!((a, b), (i.min(j), i.max(j)));
                }
            }
        }
    }
}
