//! Linear-optical circuits over polarization/path modes: description,
//! compilation to a mode map, detection-signature statistics, and the
//! partition of the hyper-Bell family induced by a given analyzer.
//!
//! A circuit acts on a set of named paths, each carrying an H and a V
//! polarization mode. Elements are applied in order; every path must end in
//! a 45°-basis polarization analyzer, which converts its two modes into a
//! pair of detector ports. Compilation produces the mode map
//! `in_i† = Σ_j U_ij out_j†` with output columns sorted by port name, so two
//! circuits that wire the same physics in different element orders expose
//! identical signature statistics.
//!
//! Two reference analyzers are built in: [`kw_reference_config`], the
//! Kwiat–Weinfurter embedded Bell-state analyzer, and
//! [`modified_reference_config`], the variant whose signature classes chop
//! the family along different lines. Their induced partitions (and the
//! per-class signature sets, printed with detectors α, β, γ, δ) are pinned
//! as goldens here; [`calibrate`](calibrate::calibrate) rediscovers both
//! from scratch.

pub mod calibrate;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fock::{
    apply_unitary, unitarity_deviation, Basis, CMat, CVec, FockError, TwoPhotonState,
};
use crate::tol;

pub use calibrate::{
    calibrate, calibrate_many, CalibrationMatch, CalibrationPoint, CalibrationTarget,
    SearchSpace, StageOrdering,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Polarization {
    H,
    V,
}

/// Serialize a complex number as a `[re, im]` pair.
pub(crate) mod complex_pair {
    use num_complex::Complex64 as C64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &C64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<C64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(C64::new(re, im))
    }
}

/// One optical element. Phases are in radians.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Element {
    /// Phase e^{iθ} on both polarization modes of a path.
    PhaseShift { path: String, theta: f64 },
    /// Phase e^{iθ} on a single polarization mode of a path.
    PolPhase { path: String, pol: Polarization, theta: f64 },
    /// 50/50 splitter between two paths, acting identically on H and V:
    /// in_a → (out_a + out_b)/√2, in_b → (out_a − out_b)/√2.
    BeamSplitter { a: String, b: String },
    /// Polarizing splitter: H transmits, V swaps paths and picks up
    /// `reflect_phase` (which must be unimodular).
    PbsHv {
        a: String,
        b: String,
        #[serde(with = "complex_pair")]
        reflect_phase: C64,
    },
    /// Half-wave plate at angle θ: H → cos2θ·H + sin2θ·V,
    /// V → sin2θ·H − cos2θ·V.
    Hwp { path: String, theta: f64 },
    /// 45°-basis analyzer terminating a path: ports (detector, 45) =
    /// (H+V)/√2 and (detector, 4̄5) = (H−V)/√2.
    Analyzer45 { path: String, detector: String },
}

/// Final renaming of a raw detector: the published name, and whether the
/// two ports of this detector swap their 45/4̄5 roles.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetectorLabel {
    pub name: String,
    pub flip: bool,
}

/// A complete circuit: its paths, the input modes in canonical order, the
/// element sequence, and (optionally) published detector names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitConfig {
    pub paths: Vec<String>,
    /// (polarization, path) per input mode index.
    pub input_modes: Vec<(Polarization, String)>,
    pub elements: Vec<Element>,
    /// Raw detector → published label. Empty means "keep raw names".
    #[serde(default)]
    pub detector_labels: BTreeMap<String, DetectorLabel>,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CircuitError {
    #[error("path `{0}` does not terminate in an analyzer")]
    PathWithoutAnalyzer(String),
    #[error("duplicate detector label `{0}`")]
    DuplicateDetector(String),
    #[error("element references unknown path `{0}`")]
    UnknownPath(String),
    #[error("element acts on path `{0}` after its analyzer")]
    AfterAnalyzer(String),
    #[error("PBS reflect phase must be unimodular, got modulus {0}")]
    ReflectPhaseModulus(f64),
    #[error("detector `{0}` has no entry in the label map")]
    MissingDetectorLabel(String),
    #[error("compiled mode map deviates from unitarity by {0:.3e}")]
    NotUnitary(f64),
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Which of the two outputs of an analyzer fired.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
pub enum Polarity {
    /// (H+V)/√2 output, printed `45`.
    #[serde(rename = "45")]
    Plus45,
    /// (H−V)/√2 output, printed `45bar`.
    #[serde(rename = "45bar")]
    Minus45,
}

impl Polarity {
    pub fn flipped(self) -> Polarity {
        match self {
            Polarity::Plus45 => Polarity::Minus45,
            Polarity::Minus45 => Polarity::Plus45,
        }
    }

    fn suffix(self) -> &'static str {
        match self {
            Polarity::Plus45 => "45",
            Polarity::Minus45 => "45bar",
        }
    }
}

/// One detector output port, e.g. `alpha45bar`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub struct Port {
    pub detector: String,
    pub polarity: Polarity,
}

impl fmt::Display for Port {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.detector, self.polarity.suffix())
    }
}

impl From<Port> for String {
    fn from(p: Port) -> String {
        p.to_string()
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unrecognized port `{0}`; expected e.g. `alpha45` or `alpha45bar`")]
pub struct ParsePortError(pub String);

impl FromStr for Port {
    type Err = ParsePortError;

    fn from_str(s: &str) -> Result<Port, ParsePortError> {
        if let Some(det) = s.strip_suffix("45bar") {
            if !det.is_empty() {
                return Ok(Port { detector: det.to_string(), polarity: Polarity::Minus45 });
            }
        }
        if let Some(det) = s.strip_suffix("45") {
            if !det.is_empty() {
                return Ok(Port { detector: det.to_string(), polarity: Polarity::Plus45 });
            }
        }
        Err(ParsePortError(s.to_string()))
    }
}

impl TryFrom<String> for Port {
    type Error = ParsePortError;

    fn try_from(s: String) -> Result<Port, ParsePortError> {
        s.parse()
    }
}

/// An unordered two-detection event, stored with its ports sorted. Both
/// photons at the same port is a legitimate signature (`first == second`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "Vec<String>", try_from = "Vec<String>")]
pub struct Signature {
    pub first: Port,
    pub second: Port,
}

impl Signature {
    pub fn new(a: Port, b: Port) -> Signature {
        if a <= b {
            Signature { first: a, second: b }
        } else {
            Signature { first: b, second: a }
        }
    }

    pub fn is_double(&self) -> bool {
        self.first == self.second
    }
}

impl fmt::Display for Signature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}

impl From<Signature> for Vec<String> {
    fn from(s: Signature) -> Vec<String> {
        vec![s.first.to_string(), s.second.to_string()]
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseSignatureError {
    #[error("a signature is a pair of ports, got {0} entries")]
    Arity(usize),
    #[error(transparent)]
    Port(#[from] ParsePortError),
}

impl TryFrom<Vec<String>> for Signature {
    type Error = ParseSignatureError;

    fn try_from(v: Vec<String>) -> Result<Signature, ParseSignatureError> {
        if v.len() != 2 {
            return Err(ParseSignatureError::Arity(v.len()));
        }
        Ok(Signature::new(v[0].parse()?, v[1].parse()?))
    }
}

/// A compiled circuit: the mode map `in_i† = Σ_j U_ij out_j†` with one
/// column per detector port, columns sorted by (detector, polarity).
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledCircuit {
    unitary: CMat,
    ports: Vec<Port>,
}

impl CompiledCircuit {
    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn ports(&self) -> &[Port] {
        &self.ports
    }

    pub fn port_index(&self, port: &Port) -> Option<usize> {
        self.ports.iter().position(|p| p == port)
    }

    /// The mode-space column feeding one port; its entries say how each
    /// input mode contributes to that detector output.
    pub fn port_column(&self, o: usize) -> CVec {
        self.unitary.column(o).into_owned()
    }

    pub fn evolve(&self, s: &TwoPhotonState) -> Result<TwoPhotonState, FockError> {
        apply_unitary(&self.unitary, s)
    }
}

impl CircuitConfig {
    /// Compiles the element sequence into a [`CompiledCircuit`].
    pub fn compile(&self) -> Result<CompiledCircuit, CircuitError> {
        #[derive(Clone, PartialEq)]
        enum Wire {
            Input(Polarization, String),
            Port(Port),
        }
        let n = self.input_modes.len();
        let mut wires: Vec<Wire> = self
            .input_modes
            .iter()
            .map(|(pol, path)| Wire::Input(*pol, path.clone()))
            .collect();
        let know_path = |p: &str| self.paths.iter().any(|q| q == p);
        let find = |wires: &[Wire], pol: Polarization, path: &str| -> Result<usize, CircuitError> {
            if !know_path(path) {
                return Err(CircuitError::UnknownPath(path.to_string()));
            }
            wires
                .iter()
                .position(|w| matches!(w, Wire::Input(p, q) if *p == pol && q == path))
                .ok_or_else(|| CircuitError::AfterAnalyzer(path.to_string()))
        };
        let r = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let mut u = CMat::identity(n, n);
        let mut seen_detectors: BTreeSet<String> = BTreeSet::new();
        for el in &self.elements {
            let mut e = CMat::identity(n, n);
            match el {
                Element::PhaseShift { path, theta } => {
                    let f = C64::from_polar(1.0, *theta);
                    for pol in [Polarization::H, Polarization::V] {
                        let k = find(&wires, pol, path)?;
                        e[(k, k)] = f;
                    }
                }
                Element::PolPhase { path, pol, theta } => {
                    let k = find(&wires, *pol, path)?;
                    e[(k, k)] = C64::from_polar(1.0, *theta);
                }
                Element::BeamSplitter { a, b } => {
                    for pol in [Polarization::H, Polarization::V] {
                        let i = find(&wires, pol, a)?;
                        let j = find(&wires, pol, b)?;
                        e[(i, i)] = r;
                        e[(i, j)] = r;
                        e[(j, i)] = r;
                        e[(j, j)] = -r;
                    }
                }
                Element::PbsHv { a, b, reflect_phase } => {
                    if (reflect_phase.norm() - 1.0).abs() > tol::UNITARITY {
                        return Err(CircuitError::ReflectPhaseModulus(reflect_phase.norm()));
                    }
                    // H transmits untouched; V swaps paths with the phase
                    let i = find(&wires, Polarization::V, a)?;
                    let j = find(&wires, Polarization::V, b)?;
                    e[(i, i)] = C64::new(0.0, 0.0);
                    e[(j, j)] = C64::new(0.0, 0.0);
                    e[(i, j)] = *reflect_phase;
                    e[(j, i)] = *reflect_phase;
                }
                Element::Hwp { path, theta } => {
                    let i = find(&wires, Polarization::H, path)?;
                    let j = find(&wires, Polarization::V, path)?;
                    let (s2, c2) = (2.0 * theta).sin_cos();
                    e[(i, i)] = C64::new(c2, 0.0);
                    e[(i, j)] = C64::new(s2, 0.0);
                    e[(j, i)] = C64::new(s2, 0.0);
                    e[(j, j)] = C64::new(-c2, 0.0);
                }
                Element::Analyzer45 { path, detector } => {
                    if !seen_detectors.insert(detector.clone()) {
                        return Err(CircuitError::DuplicateDetector(detector.clone()));
                    }
                    let i = find(&wires, Polarization::H, path)?;
                    let j = find(&wires, Polarization::V, path)?;
                    e[(i, i)] = r;
                    e[(i, j)] = r;
                    e[(j, i)] = r;
                    e[(j, j)] = -r;
                    wires[i] = Wire::Port(Port {
                        detector: detector.clone(),
                        polarity: Polarity::Plus45,
                    });
                    wires[j] = Wire::Port(Port {
                        detector: detector.clone(),
                        polarity: Polarity::Minus45,
                    });
                }
            }
            u *= e;
        }
        let mut ports = Vec::with_capacity(n);
        for w in &wires {
            match w {
                Wire::Input(_, path) => {
                    return Err(CircuitError::PathWithoutAnalyzer(path.clone()))
                }
                Wire::Port(p) => ports.push(p.clone()),
            }
        }
        if !self.detector_labels.is_empty() {
            let mut published: BTreeSet<&str> = BTreeSet::new();
            for p in &mut ports {
                let label = self
                    .detector_labels
                    .get(&p.detector)
                    .ok_or_else(|| CircuitError::MissingDetectorLabel(p.detector.clone()))?;
                published.insert(&label.name);
                p.detector = label.name.clone();
                if label.flip {
                    p.polarity = p.polarity.flipped();
                }
            }
            if published.len() != seen_detectors.len() {
                let dup = published.iter().next().unwrap_or(&"");
                return Err(CircuitError::DuplicateDetector(dup.to_string()));
            }
        }
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| ports[a].cmp(&ports[b]));
        let sorted_ports: Vec<Port> = order.iter().map(|&k| ports[k].clone()).collect();
        let u = u.select_columns(&order);
        let dev = unitarity_deviation(&u);
        if dev > tol::UNITARITY {
            return Err(CircuitError::NotUnitary(dev));
        }
        Ok(CompiledCircuit { unitary: u, ports: sorted_ports })
    }
}

/// Canonical eight input modes: photon 1 on paths a/c, photon 2 on b/d,
/// with mode index 2·pol + path inside each sector.
pub fn canonical_input8() -> Vec<(Polarization, String)> {
    [("H", "a"), ("H", "c"), ("V", "a"), ("V", "c"), ("H", "b"), ("H", "d"), ("V", "b"), ("V", "d")]
        .iter()
        .map(|&(pol, path)| {
            let pol = if pol == "H" { Polarization::H } else { Polarization::V };
            (pol, path.to_string())
        })
        .collect()
}

/// Probability of each two-detection signature for a state sent through a
/// compiled circuit. Entries below 1e-15 (floating-point dust) are dropped;
/// the retained probabilities sum to 1 for a unit input.
pub fn signature_distribution(
    cc: &CompiledCircuit,
    s: &TwoPhotonState,
) -> Result<BTreeMap<Signature, f64>, FockError> {
    let out = cc.evolve(s)?;
    let basis = Basis::two_photon(s.dim());
    let mut dist = BTreeMap::new();
    for (idx, amp) in out.amplitudes().iter().enumerate() {
        let p = amp.norm_sqr();
        if p > 1e-15 {
            let (x, y) = basis.pair_at(idx);
            let sig = Signature::new(cc.ports[x].clone(), cc.ports[y].clone());
            *dist.entry(sig).or_insert(0.0) += p;
        }
    }
    Ok(dist)
}

/// The set of signatures a state can produce (probability above
/// [`tol::SUPPORT_EPS`]).
pub fn signature_support(
    cc: &CompiledCircuit,
    s: &TwoPhotonState,
) -> Result<BTreeSet<Signature>, FockError> {
    Ok(signature_distribution(cc, s)?
        .into_iter()
        .filter(|&(_, p)| p > tol::SUPPORT_EPS)
        .map(|(sig, _)| sig)
        .collect())
}

/// A group of states sharing one signature support.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartitionClass {
    /// Indices into the state list handed to [`partition_states`], ascending.
    pub members: Vec<usize>,
    /// The common support.
    pub signatures: BTreeSet<Signature>,
}

/// States grouped by identical signature support, with classes ordered by
/// their smallest member.
///
/// `disjoint` records whether the class supports are pairwise disjoint — the
/// condition for a detection event to name its class outright. Partial
/// overlap is legal and simply flagged, never an error.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Partition {
    pub classes: Vec<PartitionClass>,
    pub disjoint: bool,
}

impl Partition {
    /// Member sets only, signatures forgotten.
    pub fn member_sets(&self) -> BTreeSet<BTreeSet<usize>> {
        self.classes.iter().map(|c| c.members.iter().copied().collect()).collect()
    }

    /// Index of the class containing a state, if any.
    pub fn class_of(&self, state: usize) -> Option<usize> {
        self.classes.iter().position(|c| c.members.contains(&state))
    }
}

/// Groups states by identical signature support through a circuit.
pub fn partition_states(
    cc: &CompiledCircuit,
    states: &[TwoPhotonState],
) -> Result<Partition, FockError> {
    let mut classes: Vec<PartitionClass> = Vec::new();
    for (i, s) in states.iter().enumerate() {
        let sup = signature_support(cc, s)?;
        match classes.iter_mut().find(|c| c.signatures == sup) {
            Some(c) => c.members.push(i),
            // first members arrive in ascending order, so classes are
            // already sorted by smallest member
            None => classes.push(PartitionClass { members: vec![i], signatures: sup }),
        }
    }
    let mut disjoint = true;
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            if classes[i].signatures.intersection(&classes[j].signatures).next().is_some() {
                disjoint = false;
            }
        }
    }
    Ok(Partition { classes, disjoint })
}

/// How two partitions of the sixteen hyper-Bell states relate.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum PartitionComparison {
    /// Identical class member sets.
    Equal,
    /// Equal after relabeling states by a sign flip in one or both Bell
    /// bases; `map[i]` is the image of state i. Every such flip is
    /// realizable by photon-local phase operations, so the two analyzers
    /// agree up to local preprocessing.
    Isomorphic { map: Vec<usize> },
    /// Genuinely different groupings: classes present on one side only.
    Different {
        only_left: Vec<BTreeSet<usize>>,
        only_right: Vec<BTreeSet<usize>>,
    },
}

/// The sixteen sign-flip relabelings: independently swap Φ⁺↔Φ⁻ and/or
/// Ψ⁺↔Ψ⁻ in the polarization basis, and φ⁺↔φ⁻ and/or ψ⁺↔ψ⁻ in the momentum
/// basis. Identity comes first.
fn sign_flip_maps() -> Vec<[usize; 16]> {
    let flip = |swap_phi: bool, swap_psi: bool| -> [usize; 4] {
        let mut f = [0usize, 1, 2, 3];
        if swap_phi {
            f.swap(0, 1);
        }
        if swap_psi {
            f.swap(2, 3);
        }
        f
    };
    let mut maps = Vec::with_capacity(16);
    for bits in 0..16u32 {
        let pol = flip(bits & 0b1000 != 0, bits & 0b0100 != 0);
        let mom = flip(bits & 0b0010 != 0, bits & 0b0001 != 0);
        let mut map = [0usize; 16];
        for (i, slot) in map.iter_mut().enumerate() {
            *slot = 4 * pol[i / 4] + mom[i % 4];
        }
        maps.push(map);
    }
    maps
}

/// Compares two partitions of the sixteen hyper-Bell states by class
/// membership (signature sets play no role here).
pub fn compare_partition(left: &Partition, right: &Partition) -> PartitionComparison {
    let lhs = left.member_sets();
    let rhs = right.member_sets();
    if lhs == rhs {
        return PartitionComparison::Equal;
    }
    let in_range = lhs.iter().chain(rhs.iter()).flatten().all(|&i| i < 16);
    if in_range {
        for map in sign_flip_maps().into_iter().skip(1) {
            let moved: BTreeSet<BTreeSet<usize>> =
                lhs.iter().map(|c| c.iter().map(|&i| map[i]).collect()).collect();
            if moved == rhs {
                return PartitionComparison::Isomorphic { map: map.to_vec() };
            }
        }
    }
    PartitionComparison::Different {
        only_left: lhs.difference(&rhs).cloned().collect(),
        only_right: rhs.difference(&lhs).cloned().collect(),
    }
}

// ---------------------------------------------------------------------------
// Reference analyzers and their pinned partitions
// ---------------------------------------------------------------------------

fn abcd_paths() -> Vec<String> {
    ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect()
}

fn analyzers_abcd() -> Vec<Element> {
    ["a", "b", "c", "d"]
        .iter()
        .zip(["A", "B", "C", "D"])
        .map(|(&path, det)| Element::Analyzer45 {
            path: path.to_string(),
            detector: det.to_string(),
        })
        .collect()
}

fn label_map(entries: &[(&str, &str, bool)]) -> BTreeMap<String, DetectorLabel> {
    entries
        .iter()
        .map(|&(raw, name, flip)| {
            (raw.to_string(), DetectorLabel { name: name.to_string(), flip })
        })
        .collect()
}

/// The Kwiat–Weinfurter embedded Bell-state analyzer: phase shifts on paths
/// b and c, beam splitters (a,b) and (c,d), polarizing splitters (a,c) and
/// (b,d), then a 45° analyzer on every path.
pub fn kw_reference_config() -> CircuitConfig {
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut elements = vec![
        Element::PhaseShift { path: "b".into(), theta: pi2 },
        Element::PhaseShift { path: "c".into(), theta: pi2 },
        Element::BeamSplitter { a: "a".into(), b: "b".into() },
        Element::BeamSplitter { a: "c".into(), b: "d".into() },
        Element::PbsHv { a: "a".into(), b: "c".into(), reflect_phase: C64::new(1.0, 0.0) },
        Element::PbsHv { a: "b".into(), b: "d".into(), reflect_phase: C64::new(1.0, 0.0) },
    ];
    elements.extend(analyzers_abcd());
    CircuitConfig {
        paths: abcd_paths(),
        input_modes: canonical_input8(),
        elements,
        detector_labels: label_map(&[
            ("A", "alpha", false),
            ("B", "beta", true),
            ("C", "delta", false),
            ("D", "gamma", true),
        ]),
    }
}

/// The modified analyzer: phase shifts on c and d, an extra beam-splitter
/// stage (a,c), (b,d), then beam splitters (a,b), (c,d), polarizing
/// splitters (a,b), (c,d) with reflect phase i, and the four analyzers.
pub fn modified_reference_config() -> CircuitConfig {
    let pi2 = std::f64::consts::FRAC_PI_2;
    let i = C64::new(0.0, 1.0);
    let mut elements = vec![
        Element::PhaseShift { path: "c".into(), theta: pi2 },
        Element::PhaseShift { path: "d".into(), theta: pi2 },
        Element::BeamSplitter { a: "a".into(), b: "c".into() },
        Element::BeamSplitter { a: "b".into(), b: "d".into() },
        Element::BeamSplitter { a: "a".into(), b: "b".into() },
        Element::BeamSplitter { a: "c".into(), b: "d".into() },
        Element::PbsHv { a: "a".into(), b: "b".into(), reflect_phase: i },
        Element::PbsHv { a: "c".into(), b: "d".into(), reflect_phase: i },
    ];
    elements.extend(analyzers_abcd());
    CircuitConfig {
        paths: abcd_paths(),
        input_modes: canonical_input8(),
        elements,
        detector_labels: label_map(&[
            ("A", "alpha", false),
            ("B", "beta", true),
            ("C", "gamma", false),
            ("D", "delta", true),
        ]),
    }
}

/// A four-mode analyzer for polarization-only Bell states on paths p, q:
/// one beam splitter, 22.5° half-wave plates, and analyzers. Resolves Ψ⁺
/// and Ψ⁻ and groups {Φ⁺, Φ⁻} — three classes, the one-copy optimum.
pub fn pol_only_reference_config() -> CircuitConfig {
    let hwp = std::f64::consts::FRAC_PI_8;
    CircuitConfig {
        paths: vec!["p".into(), "q".into()],
        input_modes: [("H", "p"), ("H", "q"), ("V", "p"), ("V", "q")]
            .iter()
            .map(|&(pol, path)| {
                let pol = if pol == "H" { Polarization::H } else { Polarization::V };
                (pol, path.to_string())
            })
            .collect(),
        elements: vec![
            Element::BeamSplitter { a: "p".into(), b: "q".into() },
            Element::Hwp { path: "p".into(), theta: hwp },
            Element::Hwp { path: "q".into(), theta: hwp },
            Element::Analyzer45 { path: "p".into(), detector: "A".into() },
            Element::Analyzer45 { path: "q".into(), detector: "B".into() },
        ],
        detector_labels: BTreeMap::new(),
    }
}

/// Class membership induced by the Kwiat–Weinfurter analyzer, by canonical
/// state index, classes in published row order.
pub fn kw_reference_classes() -> Vec<BTreeSet<usize>> {
    [
        vec![0, 5, 11, 14],
        vec![1, 4],
        vec![10, 15],
        vec![3, 8],
        vec![7, 9],
        vec![2, 12],
        vec![6, 13],
    ]
    .into_iter()
    .map(|v| v.into_iter().collect())
    .collect()
}

/// Class membership induced by the modified analyzer, in the row order that
/// pairs class k with the k-th Kwiat–Weinfurter signature set.
pub fn modified_reference_classes() -> Vec<BTreeSet<usize>> {
    [
        vec![1, 2, 13, 14],
        vec![5, 6],
        vec![9, 10],
        vec![7, 8],
        vec![3, 15],
        vec![0, 12],
        vec![4, 11],
    ]
    .into_iter()
    .map(|v| v.into_iter().collect())
    .collect()
}

fn port(det: &str, polarity: Polarity) -> Port {
    Port { detector: det.to_string(), polarity }
}

fn sig(d1: &str, p1: Polarity, d2: &str, p2: Polarity) -> Signature {
    Signature::new(port(d1, p1), port(d2, p2))
}

/// The seven signature sets of the reference analyzers, class by class, on
/// detectors α, β, γ, δ. Both reference analyzers produce exactly these
/// rows; they differ only in which states fall into each class.
pub fn reference_class_signatures() -> Vec<BTreeSet<Signature>> {
    use Polarity::{Minus45 as M, Plus45 as P};
    let dets = ["alpha", "beta", "gamma", "delta"];
    let mut rows: Vec<BTreeSet<Signature>> = Vec::with_capacity(7);
    // class 1: both photons at the same port, any of the eight ports
    rows.push(
        dets.iter()
            .flat_map(|&d| [sig(d, P, d, P), sig(d, M, d, M)])
            .collect(),
    );
    // class 2: the two ports of one detector
    rows.push(dets.iter().map(|&d| sig(d, P, d, M)).collect());
    // classes 3–7: coincidences between two detectors, equal or crossed
    // polarity
    let pair_row = |d1: &str, d2: &str, crossed: bool| -> [Signature; 2] {
        if crossed {
            [sig(d1, P, d2, M), sig(d1, M, d2, P)]
        } else {
            [sig(d1, P, d2, P), sig(d1, M, d2, M)]
        }
    };
    for (pair_a, pair_b, crossed) in [
        (("alpha", "beta"), ("delta", "gamma"), false),
        (("alpha", "delta"), ("beta", "gamma"), false),
        (("alpha", "delta"), ("beta", "gamma"), true),
        (("alpha", "gamma"), ("beta", "delta"), false),
        (("alpha", "gamma"), ("beta", "delta"), true),
    ] {
        let mut row = BTreeSet::new();
        row.extend(pair_row(pair_a.0, pair_a.1, crossed));
        row.extend(pair_row(pair_b.0, pair_b.1, crossed));
        rows.push(row);
    }
    rows
}

/// The four signatures the starred states produce through the
/// Kwiat–Weinfurter analyzer: α–β and δ–γ coincidences with crossed
/// polarity. None of them appears in the modified analyzer's seven rows.
pub fn starred_reference_signatures() -> BTreeSet<Signature> {
    use Polarity::{Minus45 as M, Plus45 as P};
    [
        sig("alpha", P, "beta", M),
        sig("alpha", M, "beta", P),
        sig("delta", P, "gamma", M),
        sig("delta", M, "gamma", P),
    ]
    .into_iter()
    .collect()
}
