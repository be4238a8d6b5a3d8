//! The sixteen hyper-Bell states and local Pauli-type operations on them.
//!
//! Photon 1 occupies paths {a, c}, photon 2 paths {b, d}; each photon also
//! carries a polarization qubit. The polarization Bell basis is
//! Φ± = (H₁H₂ ± V₁V₂)/√2, Ψ± = (H₁V₂ ± V₁H₂)/√2, and the momentum basis is
//! φ± = (a₁b₂ ± c₁d₂)/√2, ψ± = (a₁d₂ ± c₁b₂)/√2. The sixteen products
//! Pol ⊗ Mom are indexed polarization-major: `index = 4·pol + mom`.
//!
//! Beyond the sixteen, the source can also emit into the alternative path
//! pairing where photon 1 rides {a, b} and photon 2 rides {c, d}; the two
//! "starred" states Ψ± ⊗ (a₁c₂ − b₁d₂)/√2 live there and are orthogonal to
//! the whole hyper-Bell family.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use thiserror::Error;

use crate::fock::{state_from_w, CMat, TwoPhotonState, WMatrix};

/// Polarization Bell label, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PolBell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

/// Momentum (path) Bell label, in canonical order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MomBell {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

pub const POL_ORDER: [PolBell; 4] =
    [PolBell::PhiPlus, PolBell::PhiMinus, PolBell::PsiPlus, PolBell::PsiMinus];
pub const MOM_ORDER: [MomBell; 4] =
    [MomBell::PhiPlus, MomBell::PhiMinus, MomBell::PsiPlus, MomBell::PsiMinus];

/// 2×2 Bell coefficient table over (H,V) ⊗ (H,V), scaled by 1/√2.
fn pol_coeffs(p: PolBell) -> [[f64; 2]; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match p {
        PolBell::PhiPlus => [[r, 0.0], [0.0, r]],
        PolBell::PhiMinus => [[r, 0.0], [0.0, -r]],
        PolBell::PsiPlus => [[0.0, r], [r, 0.0]],
        PolBell::PsiMinus => [[0.0, r], [-r, 0.0]],
    }
}

/// 2×2 Bell coefficient table over (a,c) ⊗ (b,d), scaled by 1/√2.
fn mom_coeffs(m: MomBell) -> [[f64; 2]; 2] {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    match m {
        MomBell::PhiPlus => [[r, 0.0], [0.0, r]],
        MomBell::PhiMinus => [[r, 0.0], [0.0, -r]],
        MomBell::PsiPlus => [[0.0, r], [r, 0.0]],
        MomBell::PsiMinus => [[0.0, r], [-r, 0.0]],
    }
}

impl PolBell {
    pub fn index(self) -> usize {
        POL_ORDER.iter().position(|&p| p == self).expect("in order table")
    }

    pub fn name(self) -> &'static str {
        match self {
            PolBell::PhiPlus => "Phi+",
            PolBell::PhiMinus => "Phi-",
            PolBell::PsiPlus => "Psi+",
            PolBell::PsiMinus => "Psi-",
        }
    }
}

impl MomBell {
    pub fn index(self) -> usize {
        MOM_ORDER.iter().position(|&m| m == self).expect("in order table")
    }

    pub fn name(self) -> &'static str {
        match self {
            MomBell::PhiPlus => "phi+",
            MomBell::PhiMinus => "phi-",
            MomBell::PsiPlus => "psi+",
            MomBell::PsiMinus => "psi-",
        }
    }
}

/// One of the sixteen hyper-Bell states, e.g. `Phi+*phi-`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BellLabel {
    pub pol: PolBell,
    pub mom: MomBell,
}

impl BellLabel {
    pub fn new(pol: PolBell, mom: MomBell) -> BellLabel {
        BellLabel { pol, mom }
    }

    /// Canonical index 0..16, polarization-major.
    pub fn index(self) -> usize {
        4 * self.pol.index() + self.mom.index()
    }

    /// Inverse of [`BellLabel::index`]. Panics outside 0..16.
    pub fn from_index(i: usize) -> BellLabel {
        assert!(i < 16, "Bell index out of range: {i}");
        BellLabel { pol: POL_ORDER[i / 4], mom: MOM_ORDER[i % 4] }
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}*{}", self.pol.name(), self.mom.name())
    }
}

impl serde::Serialize for BellLabel {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> serde::Deserialize<'de> for BellLabel {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<BellLabel, D::Error> {
        let s = <String as serde::Deserialize>::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unrecognized Bell label `{0}`; expected the form `Phi+*phi-`")]
pub struct ParseLabelError(pub String);

impl FromStr for BellLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<BellLabel, ParseLabelError> {
        let bad = || ParseLabelError(s.to_string());
        let (pol_s, mom_s) = s.split_once('*').ok_or_else(bad)?;
        let pol = POL_ORDER.iter().copied().find(|p| p.name() == pol_s).ok_or_else(bad)?;
        let mom = MOM_ORDER.iter().copied().find(|m| m.name() == mom_s).ok_or_else(bad)?;
        Ok(BellLabel { pol, mom })
    }
}

/// All sixteen labels in canonical index order.
pub fn all_labels() -> [BellLabel; 16] {
    let mut out = [BellLabel::new(PolBell::PhiPlus, MomBell::PhiPlus); 16];
    for (i, slot) in out.iter_mut().enumerate() {
        *slot = BellLabel::from_index(i);
    }
    out
}

/// Builds the hyper-Bell state |Pol ⊗ Mom⟩ on the canonical eight modes.
pub fn hyper_bell(label: BellLabel) -> TwoPhotonState {
    let p = pol_coeffs(label.pol);
    let m = mom_coeffs(label.mom);
    let mut w = WMatrix::zeros(8);
    for p1 in 0..2 {
        for p2 in 0..2 {
            for q1 in 0..2 {
                for q2 in 0..2 {
                    let amp = p[p1][p2] * m[q1][q2];
                    if amp == 0.0 {
                        continue;
                    }
                    let m1 = 2 * p1 + q1; // photon 1: pol ∈ {H,V}, path ∈ {a,c}
                    let m2 = 4 + 2 * p2 + q2; // photon 2: path ∈ {b,d}
                    w.add_pair(m1, m2, C64::new(amp * 0.5, 0.0));
                }
            }
        }
    }
    state_from_w(&w).expect("Bell states are nonzero").0
}

/// All sixteen hyper-Bell states, in canonical index order.
pub fn all_states() -> Vec<TwoPhotonState> {
    all_labels().iter().map(|&l| hyper_bell(l)).collect()
}

/// A polarization-only Bell state on four modes (paths p, q; mode order
/// H⊗p, H⊗q, V⊗p, V⊗q), for single-degree-of-freedom analyses.
pub fn pol_bell_four_mode(kind: PolBell) -> TwoPhotonState {
    let coeff = pol_coeffs(kind);
    let mut w = WMatrix::zeros(4);
    for p1 in 0..2 {
        for p2 in 0..2 {
            if coeff[p1][p2] != 0.0 {
                w.add_pair(2 * p1, 1 + 2 * p2, C64::new(coeff[p1][p2] * 0.5, 0.0));
            }
        }
    }
    state_from_w(&w).expect("Bell states are nonzero").0
}

/// Sign of the polarization singlet/triplet part of a starred state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Sign {
    Plus,
    Minus,
}

/// A starred state Ψ± ⊗ (a₁c₂ − b₁d₂)/√2 from the alternative path pairing
/// (photon 1 in {a, b}, photon 2 in {c, d}).
pub fn starred_state(sign: Sign) -> TwoPhotonState {
    let sgn = match sign {
        Sign::Plus => 1.0,
        Sign::Minus => -1.0,
    };
    let mut w = WMatrix::zeros(8);
    // pol term (H₁V₂ + sgn·V₁H₂)/√2, path term (a₁c₂ − b₁d₂)/√2
    for &(pp1, pp2, psgn) in &[(0usize, 1usize, 1.0), (1, 0, sgn)] {
        for &(base1, base2, msgn) in &[(0usize, 1usize, 1.0), (4, 5, -1.0)] {
            let m1 = base1 + 2 * pp1; // a → mode 0, b → mode 4 (+2 for V)
            let m2 = base2 + 2 * pp2; // c → mode 1, d → mode 5 (+2 for V)
            let amp = psgn * msgn * 0.5;
            w.add_pair(m1, m2, C64::new(amp * 0.5, 0.0));
        }
    }
    state_from_w(&w).expect("starred states are nonzero").0
}

/// Single-qubit Pauli operations, the alphabet of local encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub const PAULI_ORDER: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];

impl Pauli {
    pub fn matrix(self) -> [[C64; 2]; 2] {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        match self {
            Pauli::I => [[l, o], [o, l]],
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, C64::new(0.0, -1.0)], [C64::new(0.0, 1.0), o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Pauli::I => "I",
            Pauli::X => "X",
            Pauli::Y => "Y",
            Pauli::Z => "Z",
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Photon {
    One,
    Two,
}

/// A local operation on one photon: a Pauli on its polarization qubit and a
/// Pauli on its path qubit. Physically these are waveplates and path/phase
/// elements acting on that photon alone.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct LocalOp {
    pub photon: Photon,
    pub pol: Pauli,
    pub path: Pauli,
}

impl fmt::Display for LocalOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.photon {
            Photon::One => 1,
            Photon::Two => 2,
        };
        write!(f, "photon{side}:{}⊗{}", self.pol, self.path)
    }
}

/// Compiles a local operation to an 8-mode matrix suitable for
/// [`crate::fock::apply_unitary`]: the (pol ⊗ path) block sits on that
/// photon's four modes (ordered 2·pol + path) and the other sector is left
/// alone.
pub fn compile_local_op(op: LocalOp) -> CMat {
    let p = op.pol.matrix();
    let q = op.path.matrix();
    let mut u = CMat::identity(8, 8);
    let off = match op.photon {
        Photon::One => 0,
        Photon::Two => 4,
    };
    for p1 in 0..2 {
        for p2 in 0..2 {
            for q1 in 0..2 {
                for q2 in 0..2 {
                    u[(off + 2 * p1 + q1, off + 2 * p2 + q2)] = p[p1][p2] * q[q1][q2];
                }
            }
        }
    }
    u
}

/// Identifies a state as one of the sixteen hyper-Bell states up to a global
/// phase, if it matches any.
pub fn identify(state: &TwoPhotonState) -> Option<BellLabel> {
    for label in all_labels() {
        let target = hyper_bell(label);
        if crate::fock::inner(&target, state).norm() > 0.99 {
            return Some(label);
        }
    }
    None
}

/// Orbit of a hyper-Bell state under all sixteen (pol, path) Pauli pairs on
/// one photon. Each entry pairs the operation with the hyper-Bell state it
/// lands on (up to phase), or `None` if it leaves the family.
pub fn local_orbit(photon: Photon, start: BellLabel) -> Vec<(LocalOp, Option<BellLabel>)> {
    let s0 = hyper_bell(start);
    let mut out = Vec::with_capacity(16);
    for pol in PAULI_ORDER {
        for path in PAULI_ORDER {
            let op = LocalOp { photon, pol, path };
            let u = compile_local_op(op);
            let moved = crate::fock::apply_unitary(&u, &s0).expect("Pauli blocks are unitary");
            out.push((op, identify(&moved)));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::{apply_unitary, inner, schmidt_rank, Basis, Bipartition};

    #[test]
    fn labels_round_trip() {
        for i in 0..16 {
            let label = BellLabel::from_index(i);
            assert_eq!(label.index(), i);
            let parsed: BellLabel = label.to_string().parse().unwrap();
            assert_eq!(parsed, label);
        }
        assert_eq!("Phi+*phi-".parse::<BellLabel>().unwrap().index(), 1);
        assert_eq!("Psi-*psi-".parse::<BellLabel>().unwrap().index(), 15);
        assert!("Phi+phi-".parse::<BellLabel>().is_err());
        assert!("Xi+*phi-".parse::<BellLabel>().is_err());
    }

    #[test]
    fn sixteen_states_are_orthonormal() {
        let states = all_states();
        for (i, a) in states.iter().enumerate() {
            for (j, b) in states.iter().enumerate() {
                let g = inner(a, b);
                let want = if i == j { 1.0 } else { 0.0 };
                assert!(
                    (g.norm() - want).abs() < 1e-12,
                    "⟨{i}|{j}⟩ = {g}"
                );
            }
        }
    }

    #[test]
    fn phi_plus_phi_plus_structure() {
        // Φ⁺ ⊗ φ⁺ = (|1_H,a 1_H,b⟩ + |1_H,c 1_H,d⟩ + |1_V,a 1_V,b⟩ + |1_V,c 1_V,d⟩)/2
        let s = hyper_bell(BellLabel::from_index(0));
        let basis = Basis::two_photon(8);
        for &(m1, m2) in &[(0usize, 4usize), (1, 5), (2, 6), (3, 7)] {
            let amp = s.amplitudes()[basis.index_of(m1, m2)];
            assert!((amp - C64::new(0.5, 0.0)).norm() < 1e-12, "({m1},{m2}) amp {amp}");
        }
        let weight: f64 = s.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        assert!((weight - 1.0).abs() < 1e-12);
    }

    #[test]
    fn starred_states_leave_the_family() {
        let states = all_states();
        for sign in [Sign::Plus, Sign::Minus] {
            let star = starred_state(sign);
            assert!((star.norm() - 1.0).abs() < 1e-12);
            for (i, s) in states.iter().enumerate() {
                assert!(inner(s, &star).norm() < 1e-12, "starred overlaps state {i}");
            }
            assert_eq!(identify(&star), None);
        }
        let plus = starred_state(Sign::Plus);
        let minus = starred_state(Sign::Minus);
        assert!(inner(&plus, &minus).norm() < 1e-12);
    }

    #[test]
    fn schmidt_ranks_across_the_photon_cut() {
        let cut = Bipartition::photon_sectors();
        for label in all_labels() {
            assert_eq!(schmidt_rank(&hyper_bell(label), &cut).unwrap(), 4, "{label}");
        }
        // the starred states straddle the cut and are rejected
        assert!(schmidt_rank(&starred_state(Sign::Plus), &cut).is_err());
    }

    #[test]
    fn pauli_blocks_are_unitary() {
        for photon in [Photon::One, Photon::Two] {
            for pol in PAULI_ORDER {
                for path in PAULI_ORDER {
                    let u = compile_local_op(LocalOp { photon, pol, path });
                    assert!(crate::fock::unitarity_deviation(&u) < 1e-12);
                }
            }
        }
    }

    /// Which polarization (or momentum) label a Pauli on that qubit sends
    /// the singlet to.
    fn singlet_image(p: Pauli) -> usize {
        match p {
            Pauli::I => 3, // Ψ⁻ / ψ⁻
            Pauli::X => 1, // Φ⁻ / φ⁻
            Pauli::Y => 0, // Φ⁺ / φ⁺
            Pauli::Z => 2, // Ψ⁺ / ψ⁺
        }
    }

    #[test]
    fn photon1_orbit_of_the_double_singlet_has_product_structure() {
        let start = BellLabel::from_index(15); // Ψ⁻*ψ⁻
        let orbit = local_orbit(Photon::One, start);
        assert_eq!(orbit.len(), 16);
        let mut seen = Vec::new();
        for (op, image) in orbit {
            let image = image.expect("Pauli pairs keep the family closed");
            let want = 4 * singlet_image(op.pol) + singlet_image(op.path);
            assert_eq!(image.index(), want, "{op}");
            seen.push(image.index());
        }
        seen.sort_unstable();
        assert_eq!(seen, (0..16).collect::<Vec<_>>(), "orbit must cover all sixteen");
    }

    #[test]
    fn photon2_orbit_also_covers_the_family() {
        let orbit = local_orbit(Photon::Two, BellLabel::from_index(15));
        let mut seen: Vec<usize> =
            orbit.iter().map(|(_, l)| l.expect("closed").index()).collect();
        seen.sort_unstable();
        assert_eq!(seen, (0..16).collect::<Vec<_>>());
    }

    #[test]
    fn two_photon_ops_commute_across_sectors() {
        let u1 = compile_local_op(LocalOp { photon: Photon::One, pol: Pauli::X, path: Pauli::Y });
        let u2 = compile_local_op(LocalOp { photon: Photon::Two, pol: Pauli::Z, path: Pauli::X });
        let s = hyper_bell(BellLabel::from_index(15));
        let a = apply_unitary(&(&u1 * &u2), &s).unwrap();
        let b = apply_unitary(&(&u2 * &u1), &s).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-12);
    }
}
