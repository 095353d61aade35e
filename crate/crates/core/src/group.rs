//! Cocompact Fuchsian groups given by side-pairing generators, word-ball
//! enumeration of their elements, and injectivity-radius upper bounds.
//!
//! Enumeration is breadth-first over word length. Words are freely reduced
//! (a letter is never followed by its inverse); every other identification,
//! including the surface relator, is resolved numerically by comparing
//! sign-canonical matrices entrywise. The tolerance is relative to the largest
//! entry (at least one), since rounding in long products grows with entry
//! size. A hash map keyed on a power-of-two scale level and the entries rounded
//! to [`BUCKET_WIDTH`] times that scale keeps lookups constant time: a query
//! within tolerance of a bucket boundary probes the neighbouring buckets.
//!
//! Elements are stored shell by shell (word length 0, 1, 2, ...) and inside a
//! shell in lexicographic order of their first-found word, independent of the
//! number of worker threads.

use std::collections::HashMap;
use std::f64::consts::{FRAC_PI_8, SQRT_2};
use std::fmt;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hyperbolic::{displacement, HPoint, Mobius};
use crate::scalar::Real;

/// Entrywise dedup tolerance, relative to `max(1, largest entry)`.
pub const DEDUP_TOL: f64 = 1e-9;
pub const BUCKET_WIDTH: f64 = 1e-6;
pub const DEFAULT_ELEMENT_CAP: usize = 5_000_000;

/// Displacement below which a non-identity element is treated as fixing a point.
pub const FIXED_POINT_TOL: f64 = 1e-6;

/// A torsion-free cocompact Fuchsian group presented by side-pairing
/// generators: either `2 * genus` generators, or all `4 * genus` side pairings
/// of a fundamental polygon (generators together with their inverses).
#[derive(Debug, Clone, PartialEq)]
pub struct GroupSpec<T> {
    label: String,
    genus: u32,
    generators: Vec<Mobius<T>>,
}

impl<T: Real> GroupSpec<T> {
    pub fn new(label: impl Into<String>, genus: u32, generators: Vec<Mobius<T>>) -> Result<Self> {
        if genus < 2 {
            return Err(Error::InvalidGenus(genus));
        }
        let expected = 2 * genus as usize;
        if generators.len() != expected && generators.len() != 2 * expected {
            return Err(Error::GeneratorCount {
                genus,
                expected,
                got: generators.len(),
            });
        }
        for (index, g) in generators.iter().enumerate() {
            if g.is_identity(T::lit(DEDUP_TOL)) {
                return Err(Error::InvalidGenerator {
                    index,
                    reason: "generator is the identity".into(),
                });
            }
        }
        Ok(Self {
            label: label.into(),
            genus,
            generators,
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn generators(&self) -> &[Mobius<T>] {
        &self.generators
    }

    pub fn cast<U: Real>(&self) -> GroupSpec<U> {
        GroupSpec {
            label: self.label.clone(),
            genus: self.genus,
            generators: self.generators.iter().map(Mobius::cast).collect(),
        }
    }
}

/// On-disk form of a group: generators as row-major 4-tuples `[a, b, c, d]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupFile {
    pub label: String,
    pub genus: u32,
    pub generators: Vec<[f64; 4]>,
}

impl GroupFile {
    pub fn into_spec(self) -> Result<GroupSpec<f64>> {
        let generators = self
            .generators
            .iter()
            .enumerate()
            .map(|(index, e)| {
                Mobius::from_entries(*e).map_err(|err| Error::InvalidGenerator {
                    index,
                    reason: err.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        GroupSpec::new(self.label, self.genus, generators)
    }
}

impl From<&GroupSpec<f64>> for GroupFile {
    fn from(spec: &GroupSpec<f64>) -> Self {
        Self {
            label: spec.label.clone(),
            genus: spec.genus,
            generators: spec.generators.iter().map(Mobius::entries).collect(),
        }
    }
}

pub fn load_group_json(text: &str) -> Result<GroupSpec<f64>> {
    let file: GroupFile =
        serde_json::from_str(text).map_err(|e| Error::GroupFile(e.to_string()))?;
    file.into_spec()
}

pub fn load_group_file(path: &Path) -> Result<GroupSpec<f64>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::GroupFile(format!("{}: {e}", path.display())))?;
    load_group_json(&text)
}

/// The genus-2 Bolza surface group.
///
/// The regular hyperbolic octagon with interior angles π/4, centred at `i`,
/// has its sides paired with the opposite side. Let `T = diag(λ, 1/λ)` be the
/// translation along the imaginary axis with `cosh(ℓ/2) = 1 + √2`, i.e.
/// `λ = (1 + √2) + sqrt((1 + √2)^2 - 1)`, and let `R = (cos π/8, sin π/8;
/// -sin π/8, cos π/8)` be the elliptic rotation about `i` by π/4. The side
/// pairings are `g_j = R^j T R^{-j}` for `j = 0..8`; they satisfy
/// `g_{j+4} = g_j^{-1}` and the octagon relator
/// `g0 g3 g6 g1 g4 g7 g2 g5 = ±Id`. Each `g_j` translates `i` by
/// `ℓ = 2 arccosh(1 + √2)`, the systole of the surface.
pub fn bolza_group() -> GroupSpec<f64> {
    let alpha = 1.0 + SQRT_2;
    let beta = (alpha * alpha - 1.0).sqrt();
    let lambda = alpha + beta;
    let inv_lambda = alpha - beta;
    let generators = (0..8)
        .map(|j| {
            let (s, c) = (j as f64 * FRAC_PI_8).sin_cos();
            // R diag(λ, 1/λ) R^{-1}, R = (c, s; -s, c)
            let a = c * c * lambda + s * s * inv_lambda;
            let b = c * s * (inv_lambda - lambda);
            let d = s * s * lambda + c * c * inv_lambda;
            Mobius::new(a, b, b, d).expect("octagon side pairing is unimodular")
        })
        .collect();
    GroupSpec::new("bolza", 2, generators).expect("bolza presentation is valid")
}

/// Displacement-based pruning for enumeration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prune<T> {
    pub basepoint: HPoint<T>,
    pub displacement_cutoff: T,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnumerationOptions {
    pub dedup_tol: f64,
    pub element_cap: usize,
}

impl Default for EnumerationOptions {
    fn default() -> Self {
        Self {
            dedup_tol: DEDUP_TOL,
            element_cap: DEFAULT_ELEMENT_CAP,
        }
    }
}

/// A word in the letters of an [`ElementSet`]; letter indices refer to
/// [`ElementSet::letter_labels`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Word(pub Vec<u16>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn render(&self, labels: &[String]) -> String {
        if self.0.is_empty() {
            return "Id".to_string();
        }
        self.0
            .iter()
            .map(|&l| labels[l as usize].as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|l| l.to_string()).collect();
        write!(f, "[{}]", parts.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement<T> {
    pub matrix: Mobius<T>,
    pub word: Word,
}

/// Deduplicated elements of a word ball, identity first, grouped in shells of
/// equal word length.
#[derive(Debug, Clone)]
pub struct ElementSet<T> {
    elements: Vec<GroupElement<T>>,
    shell_starts: Vec<usize>,
    max_word_length: usize,
    prune: Option<Prune<T>>,
    genus: u32,
    letter_labels: Vec<String>,
}

impl<T: Real> ElementSet<T> {
    /// The set `{Id}`.
    pub fn identity_only(genus: u32) -> Self {
        Self {
            elements: vec![GroupElement {
                matrix: Mobius::identity(),
                word: Word::default(),
            }],
            shell_starts: vec![0, 1],
            max_word_length: 0,
            prune: None,
            genus,
            letter_labels: Vec::new(),
        }
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[GroupElement<T>] {
        &self.elements
    }

    pub fn iter(&self) -> impl Iterator<Item = &GroupElement<T>> {
        self.elements.iter()
    }

    /// Elements grouped by word length; shell `l` holds the elements whose
    /// shortest word found has length `l`.
    pub fn shells(&self) -> impl Iterator<Item = &[GroupElement<T>]> {
        self.shell_starts
            .windows(2)
            .map(|w| &self.elements[w[0]..w[1]])
    }

    pub fn shell_count(&self) -> usize {
        self.shell_starts.len() - 1
    }

    pub fn max_word_length(&self) -> usize {
        self.max_word_length
    }

    /// Word length of the outermost non-empty shell.
    pub fn truncation_word_length(&self) -> usize {
        self.shell_count().saturating_sub(1)
    }

    pub fn prune(&self) -> Option<&Prune<T>> {
        self.prune.as_ref()
    }

    pub fn genus(&self) -> u32 {
        self.genus
    }

    pub fn letter_labels(&self) -> &[String] {
        &self.letter_labels
    }

    pub fn contains_identity(&self) -> bool {
        self.elements
            .iter()
            .any(|e| e.matrix.is_identity(T::lit(DEDUP_TOL)))
    }

    /// Index of an element agreeing with `m` entrywise within `tol`, relative
    /// to `max(1, largest entry)`.
    pub fn find(&self, m: &Mobius<T>, tol: T) -> Option<usize> {
        self.elements
            .iter()
            .position(|e| same_element(&e.matrix, m, tol))
    }

    pub fn render_word(&self, word: &Word) -> String {
        word.render(&self.letter_labels)
    }

    /// Minimum of `d_H(z, γz)` over non-identity elements, with the minimizing index.
    pub fn min_displacement(&self, z: HPoint<T>) -> Option<(T, usize)> {
        let id_tol = T::lit(DEDUP_TOL);
        let mut best: Option<(T, usize)> = None;
        for (idx, e) in self.elements.iter().enumerate() {
            if e.matrix.is_identity(id_tol) {
                continue;
            }
            let dist = displacement(&e.matrix, z);
            if best.is_none_or(|(b, _)| dist < b) {
                best = Some((dist, idx));
            }
        }
        best
    }

    pub fn cast<U: Real>(&self) -> ElementSet<U> {
        ElementSet {
            elements: self
                .elements
                .iter()
                .map(|e| GroupElement {
                    matrix: e.matrix.cast(),
                    word: e.word.clone(),
                })
                .collect(),
            shell_starts: self.shell_starts.clone(),
            max_word_length: self.max_word_length,
            prune: self.prune.map(|p| Prune {
                basepoint: p.basepoint.cast(),
                displacement_cutoff: U::lit(p.displacement_cutoff.as_f64()),
            }),
            genus: self.genus,
            letter_labels: self.letter_labels.clone(),
        }
    }
}

/// Letters used for words: the generators followed by any inverses not
/// already among them.
struct Alphabet<T> {
    matrices: Vec<Mobius<T>>,
    inverse: Vec<u16>,
    labels: Vec<String>,
}

impl<T: Real> Alphabet<T> {
    fn new(group: &GroupSpec<T>, tol: T) -> Self {
        let mut matrices: Vec<Mobius<T>> = group.generators().to_vec();
        let mut labels: Vec<String> = (0..matrices.len()).map(|j| format!("g{j}")).collect();
        let n = matrices.len();
        let mut inverse = vec![u16::MAX; n];
        for j in 0..n {
            let inv = matrices[j].inverse();
            let pos = matrices.iter().position(|m| m.max_entry_diff(&inv) <= tol);
            let idx = match pos {
                Some(p) => p,
                None => {
                    matrices.push(inv);
                    labels.push(format!("g{j}^-1"));
                    inverse.push(j as u16);
                    matrices.len() - 1
                }
            };
            inverse[j] = idx as u16;
        }
        Self {
            matrices,
            inverse,
            labels,
        }
    }
}

/// Power-of-two scale level and entries quantized relative to it.
type BucketKey = (i32, [i64; 4]);

/// Entrywise tolerance for treating `m` and another matrix as one element.
fn element_tol<T: Real>(m: &Mobius<T>, tol: T) -> T {
    tol * T::one().max(max_abs_entry(m))
}

fn max_abs_entry<T: Real>(m: &Mobius<T>) -> T {
    m.entries().into_iter().map(T::abs).fold(T::zero(), T::max)
}

pub(crate) fn same_element<T: Real>(a: &Mobius<T>, b: &Mobius<T>, tol: T) -> bool {
    a.max_entry_diff(b) <= element_tol(a, tol).max(element_tol(b, tol))
}

struct Dedup<T> {
    map: HashMap<BucketKey, Vec<usize>>,
    tol: T,
}

impl<T: Real> Dedup<T> {
    fn new(tol: T) -> Self {
        Self {
            map: HashMap::new(),
            tol,
        }
    }

    fn level(max_abs: f64) -> i32 {
        if max_abs <= 1.0 {
            0
        } else {
            max_abs.log2().ceil() as i32
        }
    }

    fn width(level: i32) -> f64 {
        BUCKET_WIDTH * 2f64.powi(level)
    }

    fn key(m: &Mobius<T>) -> BucketKey {
        let level = Self::level(max_abs_entry(m).as_f64());
        let w = Self::width(level);
        (level, m.entries().map(|v| (v.as_f64() / w).floor() as i64))
    }

    fn contains(&self, m: &Mobius<T>, elements: &[GroupElement<T>]) -> bool {
        let entries = m.entries().map(|v| v.as_f64());
        let max_abs = max_abs_entry(m).as_f64();
        let tol = element_tol(m, self.tol).as_f64();
        // A matching element has its largest entry within `tol`, so only the
        // neighbouring scale levels reachable by that shift are probed.
        let lo = Self::level((max_abs - tol).max(0.0));
        let hi = Self::level(max_abs + tol);
        for level in lo..=hi {
            let w = Self::width(level);
            let ranges: [(i64, i64); 4] = entries.map(|v| {
                (
                    ((v - tol) / w).floor() as i64,
                    ((v + tol) / w).floor() as i64,
                )
            });
            let mut key = [0i64; 4];
            for k0 in ranges[0].0..=ranges[0].1 {
                key[0] = k0;
                for k1 in ranges[1].0..=ranges[1].1 {
                    key[1] = k1;
                    for k2 in ranges[2].0..=ranges[2].1 {
                        key[2] = k2;
                        for k3 in ranges[3].0..=ranges[3].1 {
                            key[3] = k3;
                            if let Some(bucket) = self.map.get(&(level, key)) {
                                if bucket
                                    .iter()
                                    .any(|&i| same_element(&elements[i].matrix, m, self.tol))
                                {
                                    return true;
                                }
                            }
                        }
                    }
                }
            }
        }
        false
    }

    fn insert(&mut self, m: &Mobius<T>, index: usize) {
        self.map.entry(Self::key(m)).or_default().push(index);
    }
}

/// Distinct elements of word length at most `max_word_length`, using default options.
pub fn enumerate_elements<T: Real>(
    group: &GroupSpec<T>,
    max_word_length: usize,
    prune: Option<Prune<T>>,
) -> Result<ElementSet<T>> {
    enumerate_elements_with(
        group,
        max_word_length,
        prune,
        &EnumerationOptions::default(),
    )
}

/// Breadth-first word-ball enumeration.
///
/// With pruning, a candidate whose displacement of the basepoint exceeds
/// `cutoff + max generator displacement` is dropped and not extended. For
/// generators pairing the sides of a Dirichlet domain centred at the
/// basepoint, every element within the cutoff is still reached: the tiles
/// met by the geodesic to `γ·basepoint` give a word all of whose prefixes move
/// the basepoint by at most the cutoff plus the domain's circumradius.
pub fn enumerate_elements_with<T: Real>(
    group: &GroupSpec<T>,
    max_word_length: usize,
    prune: Option<Prune<T>>,
    options: &EnumerationOptions,
) -> Result<ElementSet<T>> {
    let tol = T::lit(options.dedup_tol);
    let alphabet = Alphabet::new(group, tol);
    let limit = prune.map(|p| {
        let margin = alphabet
            .matrices
            .iter()
            .map(|g| displacement(g, p.basepoint))
            .fold(T::zero(), T::max);
        p.displacement_cutoff + margin
    });

    let mut elements = vec![GroupElement {
        matrix: Mobius::identity(),
        word: Word::default(),
    }];
    let mut shell_starts = vec![0, 1];
    let mut dedup = Dedup::new(tol);
    dedup.insert(&elements[0].matrix, 0);

    for _ in 0..max_word_length {
        let frontier_start = shell_starts[shell_starts.len() - 2];
        let frontier_end = elements.len();
        if frontier_start == frontier_end {
            break;
        }
        let frontier = &elements[frontier_start..frontier_end];
        let candidates: Vec<(Mobius<T>, usize, u16)> = frontier
            .par_iter()
            .enumerate()
            .flat_map_iter(|(offset, parent)| {
                let last = parent.word.0.last().copied();
                let alphabet = &alphabet;
                (0..alphabet.matrices.len() as u16).filter_map(move |letter| {
                    if last.is_some_and(|l| alphabet.inverse[l as usize] == letter) {
                        return None;
                    }
                    let m = parent.matrix.compose(&alphabet.matrices[letter as usize]);
                    if let (Some(p), Some(lim)) = (prune, limit) {
                        if displacement(&m, p.basepoint) > lim {
                            return None;
                        }
                    }
                    Some((m, frontier_start + offset, letter))
                })
            })
            .collect();

        for (m, parent, letter) in candidates {
            if dedup.contains(&m, &elements) {
                continue;
            }
            let mut word = elements[parent].word.clone();
            word.0.push(letter);
            let index = elements.len();
            dedup.insert(&m, index);
            elements.push(GroupElement { matrix: m, word });
            if elements.len() > options.element_cap {
                return Err(Error::BudgetExceeded {
                    cap: options.element_cap,
                });
            }
        }
        shell_starts.push(elements.len());
    }
    // Trailing empty shells carry no elements.
    while shell_starts.len() > 2
        && shell_starts[shell_starts.len() - 1] == shell_starts[shell_starts.len() - 2]
    {
        shell_starts.pop();
    }

    Ok(ElementSet {
        elements,
        shell_starts,
        max_word_length,
        prune,
        genus: group.genus(),
        letter_labels: alphabet.labels,
    })
}

/// Upper bound for the injectivity radius from a finite search.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InjectivityEstimate<T> {
    /// Smallest displacement found; an upper bound for the true infimum.
    pub r_upper: T,
    pub argmin_word: String,
    pub argmin_basepoint: HPoint<T>,
    pub word_length_budget: usize,
}

/// Minimum of `d_H(z, γz)` over grid points `z` and non-identity `γ` of word
/// length at most `max_word_length`.
///
/// At each grid point the search is pruned to elements displacing it by at
/// most the smallest generator displacement there (which already bounds the
/// minimum), so long word budgets stay cheap.
pub fn injectivity_radius<T: Real>(
    group: &GroupSpec<T>,
    basepoint_grid: &[HPoint<T>],
    max_word_length: usize,
) -> Result<InjectivityEstimate<T>> {
    injectivity_radius_with(
        group,
        basepoint_grid,
        max_word_length,
        &EnumerationOptions::default(),
    )
}

pub fn injectivity_radius_with<T: Real>(
    group: &GroupSpec<T>,
    basepoint_grid: &[HPoint<T>],
    max_word_length: usize,
    options: &EnumerationOptions,
) -> Result<InjectivityEstimate<T>> {
    if basepoint_grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let mut best: Option<InjectivityEstimate<T>> = None;
    for &z in basepoint_grid {
        let cutoff = group
            .generators()
            .iter()
            .map(|g| displacement(g, z))
            .fold(T::infinity(), T::min);
        let set = enumerate_elements_with(
            group,
            max_word_length,
            Some(Prune {
                basepoint: z,
                displacement_cutoff: cutoff,
            }),
            options,
        )?;
        if let Some((dist, idx)) = set.min_displacement(z) {
            if best.as_ref().is_none_or(|b| dist < b.r_upper) {
                best = Some(InjectivityEstimate {
                    r_upper: dist,
                    argmin_word: set.render_word(&set.elements()[idx].word),
                    argmin_basepoint: z,
                    word_length_budget: max_word_length,
                });
            }
        }
    }
    let est = best.ok_or(Error::InvalidRadius(0.0))?;
    if !(est.r_upper > T::lit(FIXED_POINT_TOL)) {
        return Err(Error::InvalidRadius(est.r_upper.as_f64()));
    }
    Ok(est)
}
