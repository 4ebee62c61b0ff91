//! Concrete groups, words, and sofic approximations.
//!
//! A [`GroupSpec`] names a group from one of the supported families together
//! with its generators. [`build_sofic_map`] produces a [`SoficMap`]: one
//! permutation of `{0, .., n-1}` per generator. Finite and abelian families
//! use exact quotients, free groups use independent uniform random
//! permutations drawn from a seeded ChaCha stream.

use std::collections::{BTreeMap, HashMap, VecDeque};
use std::fmt;
use std::sync::{Arc, OnceLock};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::perm::{Perm, PermError};

/// Largest finite permutation group whose element table we are willing to build.
pub const MAX_FINITE_ORDER: usize = 200_000;

#[derive(Debug, Error)]
pub enum GroupError {
    #[error("invalid group: {0}")]
    Invalid(String),
    #[error("generator index {0} out of range")]
    BadGenerator(usize),
    #[error("unknown generator symbol '{0}'")]
    UnknownSymbol(char),
    #[error("scale {scale} unsupported for {group}: {reason}")]
    UnsupportedScale { scale: usize, group: String, reason: String },
    #[error("sofic map does not match the group ({0})")]
    MapMismatch(String),
    #[error("finite group order exceeds {MAX_FINITE_ORDER}")]
    GroupTooLarge,
    #[error(transparent)]
    Perm(#[from] PermError),
    #[error("group json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One letter of a word: a generator or its inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Letter {
    pub gen: usize,
    pub inverse: bool,
}

impl Letter {
    pub fn new(gen: usize, inverse: bool) -> Self {
        Letter { gen, inverse }
    }

    pub fn inv(self) -> Self {
        Letter { gen: self.gen, inverse: !self.inverse }
    }

    /// Exponent sign, `+1` or `-1`.
    pub fn sign(self) -> i64 {
        if self.inverse {
            -1
        } else {
            1
        }
    }
}

/// A word in the generators. The empty word is the identity.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Word {
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity() -> Self {
        Word::default()
    }

    pub fn from_letters(letters: Vec<Letter>) -> Self {
        Word { letters }
    }

    pub fn gen(gen: usize) -> Self {
        Word { letters: vec![Letter::new(gen, false)] }
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn is_identity(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Formal inverse: reversed word with every letter inverted.
    pub fn inverse(&self) -> Word {
        Word { letters: self.letters.iter().rev().map(|l| l.inv()).collect() }
    }

    /// Formal concatenation (not reduced).
    pub fn concat(&self, other: &Word) -> Word {
        let mut letters = self.letters.clone();
        letters.extend_from_slice(&other.letters);
        Word { letters }
    }

    /// `g^k` for a single generator.
    pub fn power(gen: usize, k: i64) -> Word {
        let l = Letter::new(gen, k < 0);
        Word { letters: vec![l; k.unsigned_abs() as usize] }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum GroupKind {
    /// A permutation group on `points` points. With `regular` set, sofic maps
    /// use the left-regular representation instead of the given action.
    FinitePerm { points: usize, generators: Vec<Perm>, regular: bool },
    Cyclic { m: usize },
    FreeAbelian { d: usize },
    Free { rank: usize },
    Product(Vec<GroupSpec>),
}

/// Element table of a finite permutation group, built by breadth-first search.
#[derive(Debug)]
struct FiniteTable {
    elements: Vec<Perm>,
    index: HashMap<Perm, usize>,
    /// Shortlex-least word for every element.
    words: Vec<Word>,
}

/// A supported group together with its ordered generator symbols.
#[derive(Clone)]
pub struct GroupSpec {
    kind: GroupKind,
    names: Vec<char>,
    table: Arc<OnceLock<Result<FiniteTable, String>>>,
}

impl PartialEq for GroupSpec {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind && self.names == other.names
    }
}

impl Eq for GroupSpec {}

impl fmt::Debug for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("GroupSpec").field("kind", &self.kind).field("names", &self.names).finish()
    }
}

impl fmt::Display for GroupSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            GroupKind::FinitePerm { points, generators, regular } => write!(
                f,
                "finite_perm({} generators on {} points{})",
                generators.len(),
                points,
                if *regular { ", regular" } else { "" }
            ),
            GroupKind::Cyclic { m } => write!(f, "cyclic({m})"),
            GroupKind::FreeAbelian { d } => write!(f, "free_abelian({d})"),
            GroupKind::Free { rank } => write!(f, "free({rank})"),
            GroupKind::Product(fs) => {
                write!(f, "product(")?;
                for (i, g) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{g}")?;
                }
                write!(f, ")")
            }
        }
    }
}

fn default_names(count: usize) -> Vec<char> {
    (0..count).map(|i| (b'a' + (i % 26) as u8) as char).collect()
}

fn check_names(names: &[char]) -> Result<(), GroupError> {
    for (i, c) in names.iter().enumerate() {
        if !c.is_ascii_lowercase() {
            return Err(GroupError::Invalid(format!("generator symbol '{c}' must be a lowercase ascii letter")));
        }
        if names[..i].contains(c) {
            return Err(GroupError::Invalid(format!("generator symbol '{c}' repeated")));
        }
    }
    Ok(())
}

impl GroupSpec {
    fn from_parts(kind: GroupKind, names: Vec<char>) -> Result<Self, GroupError> {
        check_names(&names)?;
        Ok(GroupSpec { kind, names, table: Arc::new(OnceLock::new()) })
    }

    pub fn cyclic(m: usize) -> Result<Self, GroupError> {
        if m == 0 {
            return Err(GroupError::Invalid("cyclic(m) needs m >= 1".into()));
        }
        Self::from_parts(GroupKind::Cyclic { m }, vec!['s'])
    }

    pub fn free_abelian(d: usize) -> Result<Self, GroupError> {
        if d == 0 || d > 26 {
            return Err(GroupError::Invalid("free_abelian(d) needs 1 <= d <= 26".into()));
        }
        let names = if d == 1 { vec!['s'] } else { default_names(d) };
        Self::from_parts(GroupKind::FreeAbelian { d }, names)
    }

    pub fn free(rank: usize) -> Result<Self, GroupError> {
        if rank == 0 || rank > 26 {
            return Err(GroupError::Invalid("free(k) needs 1 <= k <= 26".into()));
        }
        Self::from_parts(GroupKind::Free { rank }, default_names(rank))
    }

    pub fn finite_perm(points: usize, generators: Vec<(char, Perm)>, regular: bool) -> Result<Self, GroupError> {
        if points == 0 {
            return Err(GroupError::Invalid("finite_perm needs at least one point".into()));
        }
        let mut names = Vec::new();
        let mut perms = Vec::new();
        for (c, p) in generators {
            if p.len() != points {
                return Err(GroupError::Perm(PermError::SizeMismatch(p.len(), points)));
            }
            names.push(c);
            perms.push(p);
        }
        Self::from_parts(GroupKind::FinitePerm { points, generators: perms, regular }, names)
    }

    /// Direct product. Factor symbols are kept when they are distinct across
    /// factors, otherwise all generators are renamed `a, b, c, ..`.
    pub fn product(factors: Vec<GroupSpec>) -> Result<Self, GroupError> {
        if factors.is_empty() {
            return Err(GroupError::Invalid("product needs at least one factor".into()));
        }
        let mut names: Vec<char> = factors.iter().flat_map(|f| f.names.iter().copied()).collect();
        if check_names(&names).is_err() {
            if names.len() > 26 {
                return Err(GroupError::Invalid("product has more than 26 generators".into()));
            }
            names = default_names(names.len());
        }
        Self::from_parts(GroupKind::Product(factors), names)
    }

    pub fn kind(&self) -> &GroupKind {
        &self.kind
    }

    pub fn names(&self) -> &[char] {
        &self.names
    }

    pub fn generator_count(&self) -> usize {
        self.names.len()
    }

    pub fn symbol_index(&self, c: char) -> Option<usize> {
        self.names.iter().position(|&n| n == c)
    }

    /// True when sofic maps for this group are exact homomorphisms.
    pub fn has_exact_maps(&self) -> bool {
        match &self.kind {
            GroupKind::Free { .. } => false,
            GroupKind::Product(fs) => fs.iter().all(|f| f.has_exact_maps()),
            _ => true,
        }
    }

    /// True for groups whose every element has finite order.
    pub fn is_finite(&self) -> bool {
        match &self.kind {
            GroupKind::FinitePerm { .. } | GroupKind::Cyclic { .. } => true,
            GroupKind::FreeAbelian { .. } | GroupKind::Free { .. } => false,
            GroupKind::Product(fs) => fs.iter().all(|f| f.is_finite()),
        }
    }

    /// Splits a global generator index of a product into (factor, local index).
    fn locate(&self, gen: usize) -> Option<(usize, usize)> {
        if let GroupKind::Product(fs) = &self.kind {
            let mut offset = 0;
            for (i, f) in fs.iter().enumerate() {
                if gen < offset + f.generator_count() {
                    return Some((i, gen - offset));
                }
                offset += f.generator_count();
            }
        }
        None
    }

    fn finite_table(&self) -> Result<&FiniteTable, GroupError> {
        let GroupKind::FinitePerm { points, generators, .. } = &self.kind else {
            return Err(GroupError::Invalid("element table requested for a non-permutation group".into()));
        };
        let res = self.table.get_or_init(|| build_table(*points, generators));
        res.as_ref().map_err(|_| GroupError::GroupTooLarge)
    }

    /// Order of a finite permutation group.
    pub fn finite_order(&self) -> Result<usize, GroupError> {
        Ok(self.finite_table()?.elements.len())
    }

    /// Parses a word such as `"abA"` (uppercase letters are inverses).
    /// `"1"`, `"e"` when `e` is not a generator, and `""` denote the identity.
    pub fn parse_word(&self, s: &str) -> Result<Word, GroupError> {
        let s = s.trim();
        if s.is_empty() || s == "1" || (s == "e" && self.symbol_index('e').is_none()) {
            return Ok(Word::identity());
        }
        let mut letters = Vec::with_capacity(s.len());
        for c in s.chars() {
            let lower = c.to_ascii_lowercase();
            let gen = self.symbol_index(lower).ok_or(GroupError::UnknownSymbol(c))?;
            letters.push(Letter::new(gen, c.is_ascii_uppercase()));
        }
        Ok(Word::from_letters(letters))
    }

    pub fn format_word(&self, w: &Word) -> String {
        if w.is_identity() {
            return "1".to_string();
        }
        w.letters()
            .iter()
            .map(|l| {
                let c = self.names[l.gen];
                if l.inverse {
                    c.to_ascii_uppercase()
                } else {
                    c
                }
            })
            .collect()
    }

    fn check_word(&self, w: &Word) -> Result<(), GroupError> {
        for l in w.letters() {
            if l.gen >= self.generator_count() {
                return Err(GroupError::BadGenerator(l.gen));
            }
        }
        Ok(())
    }

    /// Canonical representative of the group element spelled by `w`:
    /// freely reduced for free groups, sorted exponent vector for free-abelian
    /// groups, balanced residue `s^r` with `-m/2 < r <= m/2` for cyclic groups,
    /// shortlex-least word for finite permutation groups, and factorwise for
    /// products.
    pub fn canonical(&self, w: &Word) -> Result<Word, GroupError> {
        self.check_word(w)?;
        match &self.kind {
            GroupKind::Free { .. } => {
                let mut out: Vec<Letter> = Vec::with_capacity(w.len());
                for &l in w.letters() {
                    if out.last() == Some(&l.inv()) {
                        out.pop();
                    } else {
                        out.push(l);
                    }
                }
                Ok(Word::from_letters(out))
            }
            GroupKind::FreeAbelian { d } => {
                let mut exps = vec![0i64; *d];
                for l in w.letters() {
                    exps[l.gen] += l.sign();
                }
                let mut letters = Vec::new();
                for (g, e) in exps.into_iter().enumerate() {
                    letters.extend(Word::power(g, e).letters);
                }
                Ok(Word::from_letters(letters))
            }
            GroupKind::Cyclic { m } => {
                let m = *m as i64;
                let e: i64 = w.letters().iter().map(|l| l.sign()).sum();
                let mut r = e.rem_euclid(m);
                if 2 * r > m {
                    r -= m;
                }
                Ok(Word::power(0, r))
            }
            GroupKind::FinitePerm { .. } => {
                let table = self.finite_table()?;
                let p = self.element_perm(w)?;
                let idx = table.index[&p];
                Ok(table.words[idx].clone())
            }
            GroupKind::Product(fs) => {
                let mut parts: Vec<Vec<Letter>> = vec![Vec::new(); fs.len()];
                for &l in w.letters() {
                    let (f, local) = self.locate(l.gen).ok_or(GroupError::BadGenerator(l.gen))?;
                    parts[f].push(Letter::new(local, l.inverse));
                }
                let mut letters = Vec::new();
                let mut offset = 0;
                for (f, part) in fs.iter().zip(parts) {
                    let c = f.canonical(&Word::from_letters(part))?;
                    letters.extend(c.letters().iter().map(|l| Letter::new(l.gen + offset, l.inverse)));
                    offset += f.generator_count();
                }
                Ok(Word::from_letters(letters))
            }
        }
    }

    /// Group product `a·b` in canonical form.
    pub fn multiply(&self, a: &Word, b: &Word) -> Result<Word, GroupError> {
        self.canonical(&a.concat(b))
    }

    pub fn invert(&self, a: &Word) -> Result<Word, GroupError> {
        self.canonical(&a.inverse())
    }

    /// Permutation of a finite permutation group element (given action).
    fn element_perm(&self, w: &Word) -> Result<Perm, GroupError> {
        let GroupKind::FinitePerm { points, generators, .. } = &self.kind else {
            return Err(GroupError::Invalid("not a permutation group".into()));
        };
        let mut acc = Perm::identity(*points);
        for l in w.letters() {
            let g = &generators[l.gen];
            let step = if l.inverse { g.inverse() } else { g.clone() };
            acc = acc.compose(&step)?;
        }
        Ok(acc)
    }
}

fn build_table(points: usize, generators: &[Perm]) -> Result<FiniteTable, String> {
    let mut steps: Vec<(Letter, Perm)> = Vec::new();
    for (g, p) in generators.iter().enumerate() {
        steps.push((Letter::new(g, false), p.clone()));
        steps.push((Letter::new(g, true), p.inverse()));
    }
    let id = Perm::identity(points);
    let mut elements = vec![id.clone()];
    let mut words = vec![Word::identity()];
    let mut index = HashMap::new();
    index.insert(id, 0usize);
    let mut queue = VecDeque::from([0usize]);
    while let Some(i) = queue.pop_front() {
        for (letter, step) in &steps {
            let next = elements[i].compose(step).map_err(|e| e.to_string())?;
            if index.contains_key(&next) {
                continue;
            }
            if elements.len() >= MAX_FINITE_ORDER {
                return Err("group too large".into());
            }
            let mut w = words[i].clone();
            w.letters.push(*letter);
            index.insert(next.clone(), elements.len());
            queue.push_back(elements.len());
            elements.push(next);
            words.push(w);
        }
    }
    Ok(FiniteTable { elements, index, words })
}

// ---------------------------------------------------------------------------
// JSON interface

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum GroupJson {
    Free {
        rank: usize,
    },
    Cyclic {
        m: usize,
    },
    FreeAbelian {
        d: usize,
    },
    FinitePerm {
        points: usize,
        generators: BTreeMap<String, Vec<Vec<usize>>>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        regular: bool,
    },
    Product {
        factors: Vec<GroupJson>,
    },
}

impl TryFrom<GroupJson> for GroupSpec {
    type Error = GroupError;

    fn try_from(j: GroupJson) -> Result<Self, GroupError> {
        match j {
            GroupJson::Free { rank } => GroupSpec::free(rank),
            GroupJson::Cyclic { m } => GroupSpec::cyclic(m),
            GroupJson::FreeAbelian { d } => GroupSpec::free_abelian(d),
            GroupJson::FinitePerm { points, generators, regular } => {
                let mut gens = Vec::new();
                for (name, cycles) in generators {
                    let mut chars = name.chars();
                    let (Some(c), None) = (chars.next(), chars.next()) else {
                        return Err(GroupError::Invalid(format!("generator name '{name}' must be one letter")));
                    };
                    gens.push((c, Perm::from_cycles(points, &cycles)?));
                }
                GroupSpec::finite_perm(points, gens, regular)
            }
            GroupJson::Product { factors } => {
                let fs = factors.into_iter().map(GroupSpec::try_from).collect::<Result<Vec<_>, _>>()?;
                GroupSpec::product(fs)
            }
        }
    }
}

impl From<&GroupSpec> for GroupJson {
    fn from(g: &GroupSpec) -> Self {
        match &g.kind {
            GroupKind::Free { rank } => GroupJson::Free { rank: *rank },
            GroupKind::Cyclic { m } => GroupJson::Cyclic { m: *m },
            GroupKind::FreeAbelian { d } => GroupJson::FreeAbelian { d: *d },
            GroupKind::FinitePerm { points, generators, regular } => GroupJson::FinitePerm {
                points: *points,
                generators: g.names.iter().zip(generators).map(|(c, p)| (c.to_string(), p.cycles())).collect(),
                regular: *regular,
            },
            GroupKind::Product(fs) => GroupJson::Product { factors: fs.iter().map(GroupJson::from).collect() },
        }
    }
}

impl Serialize for GroupSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GroupJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for GroupSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = GroupJson::deserialize(d)?;
        GroupSpec::try_from(j).map_err(serde::de::Error::custom)
    }
}

impl GroupSpec {
    pub fn from_json(s: &str) -> Result<Self, GroupError> {
        let j: GroupJson = serde_json::from_str(s)?;
        GroupSpec::try_from(j)
    }
}

// ---------------------------------------------------------------------------
// Sofic maps

/// A generator-to-permutation assignment at scale `n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SoficMap {
    scale: usize,
    images: Vec<Perm>,
    inverse_images: Vec<Perm>,
    seed: u64,
}

impl SoficMap {
    pub fn new(scale: usize, images: Vec<Perm>, seed: u64) -> Result<Self, GroupError> {
        if let Some(p) = images.iter().find(|p| p.len() != scale) {
            return Err(GroupError::Perm(PermError::SizeMismatch(p.len(), scale)));
        }
        let inverse_images = images.iter().map(Perm::inverse).collect();
        Ok(SoficMap { scale, images, inverse_images, seed })
    }

    pub fn scale(&self) -> usize {
        self.scale
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn generator_images(&self) -> &[Perm] {
        &self.images
    }

    pub fn image(&self, l: Letter) -> &Perm {
        if l.inverse {
            &self.inverse_images[l.gen]
        } else {
            &self.images[l.gen]
        }
    }
}

/// SplitMix64 finalizer applied to `seed + counter`; derives independent
/// stream seeds from one configuration seed.
pub fn derive_seed(seed: u64, counter: u64) -> u64 {
    let mut z = seed.wrapping_add(counter.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform random permutation of `0..n` via a seeded Fisher–Yates shuffle.
pub fn random_permutation(n: usize, seed: u64) -> Perm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut images: Vec<u32> = (0..n as u32).collect();
    images.shuffle(&mut rng);
    Perm::from_images(images).expect("shuffle is a bijection")
}

fn exact_root(n: usize, d: usize) -> Option<usize> {
    if d == 1 {
        return Some(n);
    }
    let guess = (n as f64).powf(1.0 / d as f64).round() as usize;
    (guess.saturating_sub(1)..=guess + 1).find(|&r| r.checked_pow(d as u32) == Some(n))
}

/// Natural point count of a finite factor (used to split product scales).
fn natural_size(g: &GroupSpec) -> Result<Option<usize>, GroupError> {
    Ok(match &g.kind {
        GroupKind::Cyclic { m } => Some(*m),
        GroupKind::FinitePerm { points, regular, .. } => Some(if *regular { g.finite_order()? } else { *points }),
        GroupKind::FreeAbelian { .. } | GroupKind::Free { .. } => None,
        GroupKind::Product(fs) => {
            let mut total = 1usize;
            for f in fs {
                match natural_size(f)? {
                    Some(s) => total *= s,
                    None => return Ok(None),
                }
            }
            Some(total)
        }
    })
}

/// Builds a sofic approximation of `spec` at scale `n`.
///
/// * `cyclic(m)`: `n` must be a multiple of `m`; `n/m` copies of the regular
///   representation.
/// * `free_abelian(d)`: `n = m0^d`; the torus quotient `(Z/m0)^d`.
/// * `free(k)`: `k` independent uniform random permutations.
/// * `finite_perm`: `n` a multiple of the point count (copies of the action),
///   or of the group order when the regular representation is requested.
/// * products: finite factors take their natural size, the remaining factor
///   of `n` is shared equally by the infinite factors (or becomes copies).
pub fn build_sofic_map(spec: &GroupSpec, n: usize, seed: u64) -> Result<SoficMap, GroupError> {
    let unsupported = |reason: String| GroupError::UnsupportedScale { scale: n, group: spec.to_string(), reason };
    if n == 0 {
        return Err(unsupported("scale must be positive".into()));
    }
    let images = match &spec.kind {
        GroupKind::Cyclic { m } => {
            if !n.is_multiple_of(*m) {
                return Err(unsupported(format!("scale must be a multiple of {m}")));
            }
            let images = (0..n).map(|i| ((i / m) * m + (i % m + 1) % m) as u32).collect();
            vec![Perm::from_images(images)?]
        }
        GroupKind::FreeAbelian { d } => {
            let m0 = exact_root(n, *d).ok_or_else(|| unsupported(format!("scale must be a perfect {d}-th power")))?;
            (0..*d)
                .map(|j| {
                    let stride = m0.pow(j as u32);
                    let images = (0..n)
                        .map(|i| {
                            let c = (i / stride) % m0;
                            let shifted = (c + 1) % m0;
                            (i - c * stride + shifted * stride) as u32
                        })
                        .collect();
                    Perm::from_images(images)
                })
                .collect::<Result<Vec<_>, _>>()?
        }
        GroupKind::Free { rank } => (0..*rank).map(|j| random_permutation(n, derive_seed(seed, j as u64))).collect(),
        GroupKind::FinitePerm { points, generators, regular } => {
            if *regular {
                let table = spec.finite_table()?;
                let order = table.elements.len();
                if !n.is_multiple_of(order) {
                    return Err(unsupported(format!("scale must be a multiple of the group order {order}")));
                }
                generators
                    .iter()
                    .map(|g| {
                        let images = table
                            .elements
                            .iter()
                            .map(|x| {
                                let gx = g.compose(x).expect("same point count");
                                table.index[&gx] as u32
                            })
                            .collect();
                        Ok(Perm::from_images(images)?.repeat(n / order))
                    })
                    .collect::<Result<Vec<_>, GroupError>>()?
            } else {
                if !n.is_multiple_of(*points) {
                    return Err(unsupported(format!("scale must be a multiple of {points}")));
                }
                generators.iter().map(|g| g.repeat(n / points)).collect()
            }
        }
        GroupKind::Product(fs) => {
            let mut finite = 1usize;
            let mut infinite = 0usize;
            for f in fs {
                match natural_size(f)? {
                    Some(s) => finite *= s,
                    None => infinite += 1,
                }
            }
            if !n.is_multiple_of(finite) {
                return Err(unsupported(format!("scale must be a multiple of {finite}")));
            }
            let rest = n / finite;
            let (share, copies) = if infinite == 0 {
                (1, rest)
            } else {
                let r = exact_root(rest, infinite)
                    .ok_or_else(|| unsupported(format!("{rest} is not a perfect {infinite}-th power")))?;
                (r, 1)
            };
            let mut factor_maps = Vec::new();
            for (i, f) in fs.iter().enumerate() {
                let size = natural_size(f)?.unwrap_or(share);
                factor_maps.push(build_sofic_map(f, size, derive_seed(seed, 1000 + i as u64))?);
            }
            let base: usize = factor_maps.iter().map(|m| m.scale).product();
            let mut images = Vec::new();
            let mut stride = 1usize;
            for fm in &factor_maps {
                for g in &fm.images {
                    let imgs = (0..base)
                        .map(|i| {
                            let c = (i / stride) % fm.scale;
                            (i - c * stride + g.apply(c) * stride) as u32
                        })
                        .collect();
                    images.push(Perm::from_images(imgs)?.repeat(copies));
                }
                stride *= fm.scale;
            }
            images
        }
    };
    SoficMap::new(n, images, seed)
}

/// Evaluates `w` under the map: `φ(g₁)∘φ(g₂)∘…∘φ(g_k)` for `w = g₁g₂…g_k`.
pub fn word_evaluate(spec: &GroupSpec, map: &SoficMap, w: &Word) -> Result<Perm, GroupError> {
    if map.images.len() != spec.generator_count() {
        return Err(GroupError::MapMismatch(format!(
            "{} generator images for {} generators",
            map.images.len(),
            spec.generator_count()
        )));
    }
    spec.check_word(w)?;
    let n = map.scale;
    let mut acc: Vec<u32> = (0..n as u32).collect();
    // apply letters right to left: acc = image(l) ∘ acc
    for &l in w.letters().iter().rev() {
        let img = map.image(l);
        for x in acc.iter_mut() {
            *x = img.apply(*x as usize) as u32;
        }
    }
    Ok(Perm::from_images(acc)?)
}

/// Measured defect of a sofic map on a finite set of words.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    /// Pairs `(g, h)` as formatted words.
    pub pairs: Vec<(String, String)>,
    /// `#₁(φ(g)φ(h)φ(gh)⁻¹)/n` per pair.
    pub multiplicativity: Vec<f64>,
    /// Non-identity words of `F` and `#₁φ(g)/n`.
    pub freeness: Vec<(String, f64)>,
}

pub fn measure_defect(spec: &GroupSpec, map: &SoficMap, words: &[Word]) -> Result<DefectReport, GroupError> {
    let n = map.scale as f64;
    let canon: Vec<Word> = words.iter().map(|w| spec.canonical(w)).collect::<Result<_, _>>()?;
    let images: Vec<Perm> = canon.iter().map(|w| word_evaluate(spec, map, w)).collect::<Result<_, _>>()?;
    let mut report = DefectReport { pairs: Vec::new(), multiplicativity: Vec::new(), freeness: Vec::new() };
    for (g, pg) in canon.iter().zip(&images) {
        for (h, ph) in canon.iter().zip(&images) {
            let gh = spec.multiply(g, h)?;
            let pgh = word_evaluate(spec, map, &gh)?;
            let sigma = pg.compose(ph)?.compose(&pgh.inverse())?;
            report.pairs.push((spec.format_word(g), spec.format_word(h)));
            report.multiplicativity.push(sigma.fixed_points() as f64 / n);
        }
        if !g.is_identity() {
            report.freeness.push((spec.format_word(g), pg.fixed_points() as f64 / n));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_word_is_identity() {
        let g = GroupSpec::free(2).unwrap();
        let map = build_sofic_map(&g, 50, 3).unwrap();
        assert!(word_evaluate(&g, &map, &Word::identity()).unwrap().is_identity());
    }

    #[test]
    fn cyclic_generator_is_a_full_cycle() {
        let g = GroupSpec::cyclic(5).unwrap();
        let map = build_sofic_map(&g, 5, 0).unwrap();
        let s = word_evaluate(&g, &map, &g.parse_word("s").unwrap()).unwrap();
        assert_eq!(s, Perm::from_cycles(5, &[vec![0, 1, 2, 3, 4]]).unwrap());
    }

    #[test]
    fn cyclic_scale_must_divide() {
        let g = GroupSpec::cyclic(4).unwrap();
        assert!(matches!(build_sofic_map(&g, 6, 0), Err(GroupError::UnsupportedScale { .. })));
        assert_eq!(build_sofic_map(&g, 12, 0).unwrap().scale(), 12);
    }

    #[test]
    fn torus_generators_commute() {
        let g = GroupSpec::free_abelian(2).unwrap();
        let map = build_sofic_map(&g, 9, 0).unwrap();
        let a = &map.generator_images()[0];
        let b = &map.generator_images()[1];
        assert_eq!(a.compose(b).unwrap(), b.compose(a).unwrap());
        assert_eq!(a.fixed_points(), 0);
        assert!(build_sofic_map(&g, 10, 0).is_err());
        let rep = measure_defect(&g, &map, &[g.parse_word("a").unwrap(), g.parse_word("ab").unwrap()]).unwrap();
        assert!(rep.multiplicativity.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn canonical_forms() {
        let f = GroupSpec::free(2).unwrap();
        let w = f.parse_word("abBAa").unwrap();
        assert_eq!(f.format_word(&f.canonical(&w).unwrap()), "a");
        let z2 = GroupSpec::free_abelian(2).unwrap();
        assert_eq!(z2.format_word(&z2.canonical(&z2.parse_word("baBa").unwrap()).unwrap()), "aa");
        let c = GroupSpec::cyclic(5).unwrap();
        assert_eq!(c.format_word(&c.canonical(&c.parse_word("ssss").unwrap()).unwrap()), "S");
        assert_eq!(c.format_word(&c.canonical(&c.parse_word("sssss").unwrap()).unwrap()), "1");
    }

    #[test]
    fn finite_perm_table_and_regular_rep() {
        // S3 generated by a transposition and a 3-cycle
        let g = GroupSpec::from_json(
            r#"{"type":"finite_perm","points":3,"generators":{"a":[[0,1]],"b":[[0,1,2]]},"regular":true}"#,
        )
        .unwrap();
        assert_eq!(g.finite_order().unwrap(), 6);
        let w = g.parse_word("aa").unwrap();
        assert!(g.canonical(&w).unwrap().is_identity());
        let map = build_sofic_map(&g, 12, 0).unwrap();
        let a = &map.generator_images()[0];
        assert_eq!(a.fixed_points(), 0);
        let rep = measure_defect(&g, &map, &[g.parse_word("a").unwrap(), g.parse_word("b").unwrap()]).unwrap();
        assert!(rep.multiplicativity.iter().all(|&f| f == 1.0));
    }

    #[test]
    fn product_scales() {
        let g = GroupSpec::product(vec![GroupSpec::cyclic(2).unwrap(), GroupSpec::free_abelian(1).unwrap()]).unwrap();
        assert_eq!(g.names(), &['a', 'b']);
        let map = build_sofic_map(&g, 8, 0).unwrap();
        let a = &map.generator_images()[0];
        let b = &map.generator_images()[1];
        assert_eq!(a.compose(b).unwrap(), b.compose(a).unwrap());
        assert!(a.compose(a).unwrap().is_identity());
    }

    #[test]
    fn json_roundtrip() {
        let src = r#"{"type":"product","factors":[{"type":"cyclic","m":3},{"type":"free","rank":2}]}"#;
        let g = GroupSpec::from_json(src).unwrap();
        let back: GroupSpec = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(g, back);
    }
}
