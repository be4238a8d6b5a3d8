//! Calibration search: enumerate a family of candidate analyzer circuits
//! and keep those whose signature supports reproduce a target partition of
//! the sixteen hyper-Bell states.
//!
//! The search space is a grid over a fixed two-stage splitter skeleton on
//! paths a–d: per-path phase shifts, an optional joint half-wave plate on
//! the photon-1 paths, optional pre-mixing beam splitters (a,c) and (b,d),
//! a first splitter stage, a second stage (one stage is plain beam
//! splitters, the other polarizing splitters with a common reflect phase),
//! and a 45° analyzer per path. Configurations are indexed lexicographically
//! over the tuple (ordering, stage-1 pairing, stage-2 pairing, phase a..d,
//! reflect phase, half-wave plate, pre-mix a/c, pre-mix b/d), last field
//! fastest, so "the first match" is well defined and reproducible.
//!
//! Detector naming is deliberately left out of the grid: a match is decided
//! on raw detector names, and published labels (α, β, γ, δ plus per-detector
//! polarity flips) are solved afterwards against the target signature rows.

use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bellstates::{all_states, starred_state, Sign};
use crate::circuits::{
    canonical_input8, complex_pair, CircuitConfig, CompiledCircuit, DetectorLabel, Element,
    Port, Signature,
};
use crate::fock::w_from_state;
use crate::tol;

/// Which splitter type forms the first of the two core stages.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOrdering {
    BsThenPbs,
    PbsThenBs,
}

const STAGE1_PAIRINGS: [[(&str, &str); 2]; 2] =
    [[("a", "b"), ("c", "d")], [("a", "d"), ("c", "b")]];
const STAGE2_PAIRINGS: [[(&str, &str); 2]; 3] =
    [[("a", "b"), ("c", "d")], [("a", "c"), ("b", "d")], [("a", "d"), ("b", "c")]];

/// One decoded grid configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationPoint {
    pub ordering: StageOrdering,
    /// Path pairs hit by the first core stage.
    pub stage1_pairs: Vec<(String, String)>,
    /// Path pairs hit by the second core stage.
    pub stage2_pairs: Vec<(String, String)>,
    /// Phase shift per path (a, b, c, d), radians.
    pub phases: [f64; 4],
    /// Reflect phase shared by both polarizing splitters.
    #[serde(with = "complex_pair")]
    pub reflect_phase: C64,
    /// Joint half-wave-plate angle on paths a and c, radians.
    pub hwp: Option<f64>,
    pub pre_bs_ac: bool,
    pub pre_bs_bd: bool,
}

impl CalibrationPoint {
    /// The circuit this point describes, with raw detector names A–D.
    pub fn to_config(&self) -> CircuitConfig {
        let mut elements = Vec::new();
        for (path, &theta) in ["a", "b", "c", "d"].iter().zip(&self.phases) {
            if theta != 0.0 {
                elements.push(Element::PhaseShift { path: path.to_string(), theta });
            }
        }
        if let Some(theta) = self.hwp {
            for path in ["a", "c"] {
                elements.push(Element::Hwp { path: path.to_string(), theta });
            }
        }
        if self.pre_bs_ac {
            elements.push(Element::BeamSplitter { a: "a".into(), b: "c".into() });
        }
        if self.pre_bs_bd {
            elements.push(Element::BeamSplitter { a: "b".into(), b: "d".into() });
        }
        let bs = |pairs: &[(String, String)], out: &mut Vec<Element>| {
            for (a, b) in pairs {
                out.push(Element::BeamSplitter { a: a.clone(), b: b.clone() });
            }
        };
        let pbs = |pairs: &[(String, String)], out: &mut Vec<Element>| {
            for (a, b) in pairs {
                out.push(Element::PbsHv {
                    a: a.clone(),
                    b: b.clone(),
                    reflect_phase: self.reflect_phase,
                });
            }
        };
        match self.ordering {
            StageOrdering::BsThenPbs => {
                bs(&self.stage1_pairs, &mut elements);
                pbs(&self.stage2_pairs, &mut elements);
            }
            StageOrdering::PbsThenBs => {
                pbs(&self.stage1_pairs, &mut elements);
                bs(&self.stage2_pairs, &mut elements);
            }
        }
        for (path, det) in ["a", "b", "c", "d"].iter().zip(["A", "B", "C", "D"]) {
            elements.push(Element::Analyzer45 {
                path: path.to_string(),
                detector: det.to_string(),
            });
        }
        CircuitConfig {
            paths: ["a", "b", "c", "d"].iter().map(|s| s.to_string()).collect(),
            input_modes: canonical_input8(),
            elements,
            detector_labels: BTreeMap::new(),
        }
    }
}

/// The calibration grid. [`SearchSpace::default_space`] is the stock grid;
/// [`SearchSpace::with_options`] widens or narrows the per-element value
/// lists while keeping the same skeleton and index order.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchSpace {
    phases: Vec<f64>,
    reflect_phases: Vec<C64>,
    hwp_options: Vec<Option<f64>>,
}

impl SearchSpace {
    /// Phases {0, ±π/2, π} per path, reflect phases {1, i, −1, −i}, and
    /// half-wave plate options {none, 0°, 22.5°, 45°}: 196 608 circuits.
    pub fn default_space() -> SearchSpace {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, FRAC_PI_8, PI};
        SearchSpace {
            phases: vec![0.0, FRAC_PI_2, -FRAC_PI_2, PI],
            reflect_phases: vec![
                C64::new(1.0, 0.0),
                C64::new(0.0, 1.0),
                C64::new(-1.0, 0.0),
                C64::new(0.0, -1.0),
            ],
            hwp_options: vec![None, Some(0.0), Some(FRAC_PI_8), Some(FRAC_PI_4)],
        }
    }

    pub fn with_options(
        phases: Vec<f64>,
        reflect_phases: Vec<C64>,
        hwp_options: Vec<Option<f64>>,
    ) -> SearchSpace {
        assert!(
            !phases.is_empty() && !reflect_phases.is_empty() && !hwp_options.is_empty(),
            "every option list needs at least one entry"
        );
        SearchSpace { phases, reflect_phases, hwp_options }
    }

    pub fn len(&self) -> usize {
        let p = self.phases.len();
        2 * 2 * 3 * p * p * p * p * self.reflect_phases.len() * self.hwp_options.len() * 2 * 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Decodes an index into its configuration (mixed radix, last field
    /// fastest).
    pub fn point(&self, index: usize) -> CalibrationPoint {
        assert!(index < self.len(), "configuration index {index} out of range");
        let mut idx = index;
        let take = |idx: &mut usize, radix: usize| {
            let v = *idx % radix;
            *idx /= radix;
            v
        };
        let pre_bd = take(&mut idx, 2) == 1;
        let pre_ac = take(&mut idx, 2) == 1;
        let hwp = self.hwp_options[take(&mut idx, self.hwp_options.len())];
        let refl = self.reflect_phases[take(&mut idx, self.reflect_phases.len())];
        let np = self.phases.len();
        let pd = self.phases[take(&mut idx, np)];
        let pc = self.phases[take(&mut idx, np)];
        let pb = self.phases[take(&mut idx, np)];
        let pa = self.phases[take(&mut idx, np)];
        let pair2 = take(&mut idx, 3);
        let pair1 = take(&mut idx, 2);
        let ordering =
            if take(&mut idx, 2) == 0 { StageOrdering::BsThenPbs } else { StageOrdering::PbsThenBs };
        let owned = |pairs: &[(&str, &str); 2]| {
            pairs.iter().map(|&(a, b)| (a.to_string(), b.to_string())).collect()
        };
        CalibrationPoint {
            ordering,
            stage1_pairs: owned(&STAGE1_PAIRINGS[pair1]),
            stage2_pairs: owned(&STAGE2_PAIRINGS[pair2]),
            phases: [pa, pb, pc, pd],
            reflect_phase: refl,
            hwp,
            pre_bs_ac: pre_ac,
            pre_bs_bd: pre_bd,
        }
    }
}

/// What a calibration run is asked to reproduce: class membership over the
/// sixteen states (by canonical index), optionally the published signature
/// rows per class (enables detector-label solving), and optionally the row
/// the starred states must land on.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationTarget {
    pub classes: Vec<BTreeSet<usize>>,
    pub class_signatures: Option<Vec<BTreeSet<Signature>>>,
    pub starred_signatures: Option<BTreeSet<Signature>>,
}

impl CalibrationTarget {
    /// The Kwiat–Weinfurter partition, its signature rows, and the starred
    /// row.
    pub fn kw() -> CalibrationTarget {
        CalibrationTarget {
            classes: super::kw_reference_classes(),
            class_signatures: Some(super::reference_class_signatures()),
            starred_signatures: Some(super::starred_reference_signatures()),
        }
    }

    /// The modified analyzer's partition with the same signature rows.
    pub fn modified() -> CalibrationTarget {
        CalibrationTarget {
            classes: super::modified_reference_classes(),
            class_signatures: Some(super::reference_class_signatures()),
            starred_signatures: None,
        }
    }
}

/// A configuration that reproduces the target, plus the label assignment
/// solved against the target's signature rows (first solution in canonical
/// order; `labeling_count` counts all of them).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationMatch {
    pub index: usize,
    pub point: CalibrationPoint,
    pub labeling: Option<BTreeMap<String, DetectorLabel>>,
    pub labeling_count: usize,
}

impl CalibrationMatch {
    /// The matched circuit with its solved detector labels applied.
    pub fn to_config(&self) -> CircuitConfig {
        let mut cfg = self.point.to_config();
        if let Some(labels) = &self.labeling {
            cfg.detector_labels = labels.clone();
        }
        cfg
    }
}

/// The 36 (x ≤ y) output-mode pairs in slot order.
fn signature_slots() -> Vec<(usize, usize)> {
    let mut slots = Vec::with_capacity(36);
    for x in 0..8 {
        for y in x..8 {
            slots.push((x, y));
        }
    }
    slots
}

/// Support bitmask of one state's detection signatures: bit t is set when
/// slot t fires with probability above [`tol::SUPPORT_EPS`].
fn support_mask(
    wp: &crate::fock::CMat,
    slots: &[(usize, usize)],
) -> u64 {
    let mut mask = 0u64;
    for (t, &(x, y)) in slots.iter().enumerate() {
        let fact = if x == y { 2.0 } else { 4.0 };
        if fact * wp[(x, y)].norm_sqr() > tol::SUPPORT_EPS {
            mask |= 1 << t;
        }
    }
    mask
}

fn masks_match(masks: &[u64; 16], classes: &[Vec<usize>]) -> bool {
    for cls in classes {
        let m0 = masks[cls[0]];
        if m0 == 0 {
            return false;
        }
        if cls[1..].iter().any(|&i| masks[i] != m0) {
            return false;
        }
    }
    for i in 0..classes.len() {
        for j in (i + 1)..classes.len() {
            if masks[classes[i][0]] & masks[classes[j][0]] != 0 {
                return false;
            }
        }
    }
    true
}

fn mask_signatures(mask: u64, slots: &[(usize, usize)], ports: &[Port]) -> BTreeSet<Signature> {
    slots
        .iter()
        .enumerate()
        .filter(|(t, _)| mask & (1 << t) != 0)
        .map(|(_, &(x, y))| Signature::new(ports[x].clone(), ports[y].clone()))
        .collect()
}

fn relabel_signatures(
    sigs: &BTreeSet<Signature>,
    labels: &BTreeMap<String, DetectorLabel>,
) -> BTreeSet<Signature> {
    let move_port = |p: &Port| {
        let l = &labels[&p.detector];
        Port {
            detector: l.name.clone(),
            polarity: if l.flip { p.polarity.flipped() } else { p.polarity },
        }
    };
    sigs.iter().map(|s| Signature::new(move_port(&s.first), move_port(&s.second))).collect()
}

/// All detector labelings (name bijection onto {α, β, γ, δ} plus per-detector
/// polarity flips) under which the computed class supports equal the target
/// rows, in canonical enumeration order: name permutations first
/// (positional-lexicographic), flips nested inside (last detector fastest).
fn solve_labelings(
    dets: &[String],
    class_supports: &[BTreeSet<Signature>],
    target_rows: &[BTreeSet<Signature>],
    starred: Option<(&BTreeSet<Signature>, &BTreeSet<Signature>)>,
) -> Vec<BTreeMap<String, DetectorLabel>> {
    const GREEK: [&str; 4] = ["alpha", "beta", "gamma", "delta"];
    let n = dets.len();
    let mut out = Vec::new();
    for perm in GREEK.iter().permutations(n) {
        for flip_bits in 0..(1u32 << n) {
            let labels: BTreeMap<String, DetectorLabel> = dets
                .iter()
                .enumerate()
                .map(|(i, d)| {
                    let flip = flip_bits >> (n - 1 - i) & 1 == 1;
                    (d.clone(), DetectorLabel { name: perm[i].to_string(), flip })
                })
                .collect();
            let ok = class_supports
                .iter()
                .zip(target_rows)
                .all(|(sup, row)| relabel_signatures(sup, &labels) == *row)
                && starred
                    .map(|(sup, row)| relabel_signatures(sup, &labels) == *row)
                    .unwrap_or(true);
            if ok {
                out.push(labels);
            }
        }
    }
    out
}

/// Runs several targets over the grid in one pass; see [`calibrate`].
pub fn calibrate_many(
    space: &SearchSpace,
    targets: &[&CalibrationTarget],
) -> Vec<Vec<CalibrationMatch>> {
    let states = all_states();
    let ws: Vec<_> = states.iter().map(|s| w_from_state(s).matrix().clone()).collect();
    let starred_w = w_from_state(&starred_state(Sign::Plus)).matrix().clone();
    let slots = signature_slots();
    let prepped: Vec<Vec<Vec<usize>>> = targets
        .iter()
        .map(|t| {
            if let Some(rows) = &t.class_signatures {
                assert_eq!(
                    rows.len(),
                    t.classes.len(),
                    "one signature row per target class"
                );
            }
            t.classes.iter().map(|c| c.iter().copied().collect()).collect()
        })
        .collect();

    let mut hits: Vec<(usize, CalibrationMatch)> = (0..space.len())
        .into_par_iter()
        .flat_map_iter(|index| {
            let point = space.point(index);
            let cc = point.to_config().compile().expect("grid circuits are well-formed");
            let u = cc.unitary();
            let ut = u.transpose();
            let mut masks = [0u64; 16];
            for (s, w) in ws.iter().enumerate() {
                masks[s] = support_mask(&(&ut * w * u), &slots);
            }
            let mut found = Vec::new();
            for (t, target) in targets.iter().enumerate() {
                if !masks_match(&masks, &prepped[t]) {
                    continue;
                }
                let (labeling, labeling_count) = match &target.class_signatures {
                    None => (None, 0),
                    Some(rows) => {
                        let supports: Vec<BTreeSet<Signature>> = prepped[t]
                            .iter()
                            .map(|cls| mask_signatures(masks[cls[0]], &slots, cc.ports()))
                            .collect();
                        let star_support = target.starred_signatures.as_ref().map(|_| {
                            mask_signatures(
                                support_mask(&(&ut * &starred_w * u), &slots),
                                &slots,
                                cc.ports(),
                            )
                        });
                        let dets: Vec<String> = {
                            let mut d: Vec<String> = cc
                                .ports()
                                .iter()
                                .map(|p| p.detector.clone())
                                .collect::<BTreeSet<_>>()
                                .into_iter()
                                .collect();
                            d.sort();
                            d
                        };
                        let solutions = solve_labelings(
                            &dets,
                            &supports,
                            rows,
                            star_support
                                .as_ref()
                                .zip(target.starred_signatures.as_ref()),
                        );
                        (solutions.first().cloned(), solutions.len())
                    }
                };
                found.push((
                    t,
                    CalibrationMatch { index, point: point.clone(), labeling, labeling_count },
                ));
            }
            found.into_iter()
        })
        .collect();

    hits.sort_by_key(|(t, m)| (*t, m.index));
    let mut out: Vec<Vec<CalibrationMatch>> = vec![Vec::new(); targets.len()];
    for (t, m) in hits {
        out[t].push(m);
    }
    out
}

/// Searches the grid for every configuration whose signature supports
/// reproduce the target partition, in index order. When the target carries
/// signature rows, each match also gets its detector labeling solved (the
/// first valid assignment, if any exists).
pub fn calibrate(space: &SearchSpace, target: &CalibrationTarget) -> Vec<CalibrationMatch> {
    calibrate_many(space, &[target]).pop().expect("one result per target")
}

/// Compiles a calibration point directly (convenience for reports).
pub fn compile_point(point: &CalibrationPoint) -> CompiledCircuit {
    point.to_config().compile().expect("grid circuits are well-formed")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuits::{
        kw_reference_config, modified_reference_config, partition_states,
    };

    /// Encode a tuple into a grid index (test-side inverse of `point`).
    fn encode(space: &SearchSpace, fields: [usize; 11]) -> usize {
        let radices = [
            2,
            2,
            3,
            space.phases.len(),
            space.phases.len(),
            space.phases.len(),
            space.phases.len(),
            space.reflect_phases.len(),
            space.hwp_options.len(),
            2,
            2,
        ];
        fields.iter().zip(radices).fold(0, |acc, (&f, r)| {
            assert!(f < r);
            acc * r + f
        })
    }

    #[test]
    fn default_space_size_and_decode() {
        let space = SearchSpace::default_space();
        assert_eq!(space.len(), 196_608);
        let p0 = space.point(0);
        assert_eq!(p0.ordering, StageOrdering::BsThenPbs);
        assert_eq!(p0.phases, [0.0; 4]);
        assert_eq!(p0.hwp, None);
        assert!(!p0.pre_bs_ac && !p0.pre_bs_bd);
        let last = space.point(space.len() - 1);
        assert_eq!(last.ordering, StageOrdering::PbsThenBs);
        assert!(last.pre_bs_ac && last.pre_bs_bd);
    }

    #[test]
    fn reference_configs_sit_at_their_grid_indices() {
        let space = SearchSpace::default_space();
        // ordering 0, pairing (a,b)(c,d) / (a,c)(b,d), phases (0,π/2,π/2,0),
        // reflect 1, no HWP, no pre-mixing
        let kw_idx = encode(&space, [0, 0, 1, 0, 1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(kw_idx, 17_664);
        assert_eq!(space.point(kw_idx).to_config().elements, kw_reference_config().elements);
        // ordering 0, pairing (a,b)(c,d) twice, phases (0,0,π/2,π/2),
        // reflect i, no HWP, both pre-mixers
        let mod_idx = encode(&space, [0, 0, 0, 0, 0, 1, 1, 1, 0, 1, 1]);
        assert_eq!(mod_idx, 339);
        assert_eq!(
            space.point(mod_idx).to_config().elements,
            modified_reference_config().elements
        );
    }

    #[test]
    fn narrow_grid_rediscovers_the_kw_analyzer() {
        use std::f64::consts::FRAC_PI_2;
        // shrink the grid to 768 circuits that still contain the reference
        let space = SearchSpace::with_options(
            vec![0.0, FRAC_PI_2],
            vec![C64::new(1.0, 0.0)],
            vec![None],
        );
        let matches = calibrate(&space, &CalibrationTarget::kw());
        assert!(!matches.is_empty());
        let reference = kw_reference_config();
        let hit = matches
            .iter()
            .find(|m| m.point.to_config().elements == reference.elements)
            .expect("reference inside the narrow grid");
        assert_eq!(hit.labeling.as_ref(), Some(&reference.detector_labels));
        assert_eq!(hit.labeling_count, 8);
        // every match reproduces the partition after applying its labels
        let states = all_states();
        let part = partition_states(&hit.to_config().compile().unwrap(), &states).unwrap();
        assert_eq!(
            part.member_sets(),
            CalibrationTarget::kw().classes.into_iter().collect()
        );
    }

    #[test]
    fn narrow_grid_rediscovers_the_modified_analyzer() {
        use std::f64::consts::FRAC_PI_2;
        let space = SearchSpace::with_options(
            vec![0.0, FRAC_PI_2],
            vec![C64::new(0.0, 1.0)],
            vec![None],
        );
        let matches = calibrate(&space, &CalibrationTarget::modified());
        let reference = modified_reference_config();
        let hit = matches
            .iter()
            .find(|m| m.point.to_config().elements == reference.elements)
            .expect("reference inside the narrow grid");
        assert_eq!(hit.labeling.as_ref(), Some(&reference.detector_labels));
        assert_eq!(hit.labeling_count, 8);
    }

    #[test]
    fn impossible_targets_yield_no_matches() {
        use std::f64::consts::FRAC_PI_2;
        let space = SearchSpace::with_options(
            vec![0.0, FRAC_PI_2],
            vec![C64::new(1.0, 0.0)],
            vec![None],
        );
        // all sixteen states in one class: no analyzer in the grid confuses
        // everything at once
        let blob = CalibrationTarget {
            classes: vec![(0..16).collect()],
            class_signatures: None,
            starred_signatures: None,
        };
        assert!(calibrate(&space, &blob).is_empty());
    }
}
