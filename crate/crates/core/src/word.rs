//! Freely reduced words over a signed alphabet, basis-certified automorphisms,
//! and eventually-periodic rays.
//!
//! Letters render as `a..z` for generators and `A..Z` for their inverses; the
//! empty word renders as `1`. Every `Word` is kept freely reduced, so equality
//! of group elements is structural equality.

use std::cmp::Ordering;
use std::fmt;
use thiserror::Error;

/// Maximum supported rank (one letter per lowercase ASCII character).
pub const MAX_RANK: u8 = 26;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum WordError {
    #[error("letter {letter:?} out of range for rank {rank}")]
    LetterOutOfRange { letter: char, rank: u8 },
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: u8, right: u8 },
    #[error("rank {0} unsupported (must be 1..={MAX_RANK})")]
    BadRank(u8),
    #[error("images do not form a basis")]
    NotABasis,
    #[error("period reduces to the identity")]
    EmptyPeriod,
    #[error("cannot parse word from {0:?}")]
    Parse(String),
}

/// One signed generator: `index` is 0-based, negative values are inverses.
///
/// Stored as a nonzero i8: `+(i+1)` for generator i, `-(i+1)` for its inverse.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Letter(i8);

impl Letter {
    pub fn positive(index: u8) -> Letter {
        Letter(index as i8 + 1)
    }

    pub fn negative(index: u8) -> Letter {
        Letter(-(index as i8 + 1))
    }

    pub fn index(self) -> u8 {
        (self.0.abs() - 1) as u8
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }

    pub fn inverse(self) -> Letter {
        Letter(-self.0)
    }

    pub fn to_char(self) -> char {
        let base = if self.is_positive() { b'a' } else { b'A' };
        (base + self.index()) as char
    }

    pub fn from_char(c: char, rank: u8) -> Result<Letter, WordError> {
        let l = match c {
            'a'..='z' => Letter::positive(c as u8 - b'a'),
            'A'..='Z' => Letter::negative(c as u8 - b'A'),
            _ => return Err(WordError::Parse(c.to_string())),
        };
        if l.index() >= rank {
            return Err(WordError::LetterOutOfRange { letter: c, rank });
        }
        Ok(l)
    }

    /// All letters of a given rank in canonical order: a, A, b, B, ...
    pub fn alphabet(rank: u8) -> impl Iterator<Item = Letter> {
        (0..rank).flat_map(|i| [Letter::positive(i), Letter::negative(i)])
    }
}

// Canonical letter order: by generator index, positive before inverse.
impl Ord for Letter {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.index(), !self.is_positive()).cmp(&(other.index(), !other.is_positive()))
    }
}

impl PartialOrd for Letter {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Letter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_char())
    }
}

/// A freely reduced word of a fixed rank.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Word {
    rank: u8,
    letters: Vec<Letter>,
}

impl Word {
    pub fn identity(rank: u8) -> Word {
        Word { rank, letters: Vec::new() }
    }

    pub fn generator(rank: u8, index: u8) -> Word {
        debug_assert!(index < rank);
        Word { rank, letters: vec![Letter::positive(index)] }
    }

    pub fn single(rank: u8, letter: Letter) -> Word {
        debug_assert!(letter.index() < rank);
        Word { rank, letters: vec![letter] }
    }

    /// Free reduction: cancel adjacent inverse pairs until none remain.
    pub fn reduce<I: IntoIterator<Item = Letter>>(rank: u8, letters: I) -> Result<Word, WordError> {
        if rank == 0 || rank > MAX_RANK {
            return Err(WordError::BadRank(rank));
        }
        let mut stack: Vec<Letter> = Vec::new();
        for l in letters {
            if l.index() >= rank {
                return Err(WordError::LetterOutOfRange { letter: l.to_char(), rank });
            }
            if stack.last() == Some(&l.inverse()) {
                stack.pop();
            } else {
                stack.push(l);
            }
        }
        Ok(Word { rank, letters: stack })
    }

    /// Parse from the text form (`"1"` for the identity).
    pub fn parse(s: &str, rank: u8) -> Result<Word, WordError> {
        if s == "1" {
            if rank == 0 || rank > MAX_RANK {
                return Err(WordError::BadRank(rank));
            }
            return Ok(Word::identity(rank));
        }
        if s.is_empty() {
            return Err(WordError::Parse(s.to_string()));
        }
        let letters = s
            .chars()
            .map(|c| Letter::from_char(c, rank))
            .collect::<Result<Vec<_>, _>>()?;
        Word::reduce(rank, letters)
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn letters(&self) -> &[Letter] {
        &self.letters
    }

    pub fn first(&self) -> Option<Letter> {
        self.letters.first().copied()
    }

    pub fn last(&self) -> Option<Letter> {
        self.letters.last().copied()
    }

    pub fn inverse(&self) -> Word {
        Word {
            rank: self.rank,
            letters: self.letters.iter().rev().map(|l| l.inverse()).collect(),
        }
    }

    /// Product with free reduction at the junction.
    pub fn mul(&self, other: &Word) -> Word {
        debug_assert_eq!(self.rank, other.rank);
        let mut left = self.letters.clone();
        let mut i = 0;
        while i < other.letters.len() {
            let l = other.letters[i];
            if left.last() == Some(&l.inverse()) {
                left.pop();
                i += 1;
            } else {
                break;
            }
        }
        left.extend_from_slice(&other.letters[i..]);
        Word { rank: self.rank, letters: left }
    }

    /// Right-append one letter, with reduction.
    pub fn push(&self, l: Letter) -> Word {
        let mut letters = self.letters.clone();
        if letters.last() == Some(&l.inverse()) {
            letters.pop();
        } else {
            letters.push(l);
        }
        Word { rank: self.rank, letters }
    }

    pub fn prefix(&self, n: usize) -> Word {
        Word { rank: self.rank, letters: self.letters[..n.min(self.len())].to_vec() }
    }

    pub fn is_prefix_of(&self, other: &Word) -> bool {
        other.letters.len() >= self.letters.len()
            && other.letters[..self.letters.len()] == self.letters[..]
    }

    /// Longest common prefix length with another word.
    pub fn common_prefix_len(&self, other: &Word) -> usize {
        self.letters
            .iter()
            .zip(other.letters.iter())
            .take_while(|(a, b)| a == b)
            .count()
    }

    /// Letters a reduced one-letter extension may use (anything but the
    /// inverse of the last letter).
    pub fn extension_letters(&self) -> Vec<Letter> {
        let banned = self.last().map(|l| l.inverse());
        Letter::alphabet(self.rank)
            .filter(|l| Some(*l) != banned)
            .collect()
    }

    /// Shortlex comparison: by length, then canonical letter order.
    pub fn shortlex_cmp(&self, other: &Word) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.letters.cmp(&other.letters))
    }

    pub fn render(&self) -> String {
        if self.letters.is_empty() {
            "1".to_string()
        } else {
            self.letters.iter().map(|l| l.to_char()).collect()
        }
    }
}

impl fmt::Debug for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

impl Ord for Word {
    fn cmp(&self, other: &Self) -> Ordering {
        self.shortlex_cmp(other)
    }
}

impl PartialOrd for Word {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// One step of a factored boundary action: either a small automorphism whose
/// end-set images are computed directly, or a pure left translation.
#[derive(Clone, PartialEq, Eq)]
pub enum BoundaryFactor {
    Aut(Automorphism),
    Translate(Word),
}

/// A rank-preserving automorphism of the free group, stored with a certified
/// inverse and a cancellation bound.
///
/// `cancellation_bound` is sound for the junction of any reduced product: if
/// `u·v` is reduced then at most this many letters cancel between the images
/// of `u` and `v`. The crude bound is the total image length; maps all of
/// whose images are single letters cancel nothing and get bound 0.
///
/// Where available, `factors` holds a decomposition into elementary maps and
/// translations (composed left to right, so the last factor acts first).
/// End-set images chained through the factors are exact and stay fast even
/// when the composite has a large cancellation bound. Factors never affect
/// equality: two automorphisms are equal iff their images agree.
#[derive(Clone)]
pub struct Automorphism {
    rank: u8,
    images: Vec<Word>,
    inverse_images: Vec<Word>,
    factors: Vec<BoundaryFactor>,
}

impl PartialEq for Automorphism {
    fn eq(&self, other: &Self) -> bool {
        self.rank == other.rank && self.images == other.images
    }
}

impl Eq for Automorphism {}

impl fmt::Debug for Automorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "aut[")?;
        for (i, w) in self.images.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{}→{}", Letter::positive(i as u8).to_char(), w)?;
        }
        write!(f, "]")
    }
}

impl Automorphism {
    /// Certify that `images` is a basis and compute the inverse by replaying
    /// the Nielsen reduction that witnesses it.
    ///
    /// Moves considered: multiply one tuple entry by another (either side,
    /// either sign). A move is applied while it strictly decreases the pair
    /// (total length, sorted tuple order); the tuple is a basis exactly when
    /// the reduction ends in single letters covering every generator once.
    pub fn new(images: Vec<Word>) -> Result<Automorphism, WordError> {
        let rank = images.len() as u8;
        if rank == 0 || rank > MAX_RANK {
            return Err(WordError::BadRank(rank));
        }
        for w in &images {
            if w.rank() != rank {
                return Err(WordError::RankMismatch { left: w.rank(), right: rank });
            }
        }

        // `current` is Nielsen-reduced in place; `trace` receives the same
        // moves starting from the identity tuple, so current[i] is always the
        // image of trace[i] under the input map.
        let mut current = images.clone();
        let mut trace: Vec<Word> = (0..rank).map(|i| Word::generator(rank, i)).collect();
        let mut moves: Vec<(usize, usize, bool, bool)> = Vec::new();

        loop {
            let best = best_nielsen_move(&current);
            match best {
                Some((i, j, left, sign)) => {
                    let factor = if sign { current[j].clone() } else { current[j].inverse() };
                    let tfactor = if sign { trace[j].clone() } else { trace[j].inverse() };
                    if left {
                        current[i] = factor.mul(&current[i]);
                        trace[i] = tfactor.mul(&trace[i]);
                    } else {
                        current[i] = current[i].mul(&factor);
                        trace[i] = trace[i].mul(&tfactor);
                    }
                    moves.push((i, j, left, sign));
                }
                None => break,
            }
        }

        // Basis iff the reduced tuple is a signed permutation of the alphabet.
        let mut seen = vec![false; rank as usize];
        for w in &current {
            if w.len() != 1 {
                return Err(WordError::NotABasis);
            }
            let idx = w.letters()[0].index() as usize;
            if seen[idx] {
                return Err(WordError::NotABasis);
            }
            seen[idx] = true;
        }

        // current[i] = x_{σ(i)}^{ε} = map(trace[i]); solve for each generator.
        let mut inverse_images = vec![Word::identity(rank); rank as usize];
        for (i, w) in current.iter().enumerate() {
            let l = w.letters()[0];
            let expr = if l.is_positive() { trace[i].clone() } else { trace[i].inverse() };
            inverse_images[l.index() as usize] = expr;
        }

        // Applying move (i,j,left,sign) to a tuple precomposes its map with
        // the elementary automorphism N(i,j,left,sign), so the input map is
        // σ ∘ N_n⁻¹ ∘ … ∘ N₁⁻¹ with σ the final signed-permutation tuple.
        let mut factors = Vec::new();
        if !moves.is_empty() {
            let perm = Automorphism::from_single_letter_images(&current);
            if !perm.is_identity() {
                factors.push(BoundaryFactor::Aut(perm));
            }
            for &(i, j, left, sign) in moves.iter().rev() {
                factors.push(BoundaryFactor::Aut(Automorphism::elementary_mult(
                    rank, i, j, left, !sign,
                )));
            }
        }

        let aut = Automorphism { rank, images, inverse_images, factors };
        debug_assert!(aut.verify_inverse());
        debug_assert!(aut.factor_chain_matches());
        Ok(aut)
    }

    /// Elementary Nielsen map x_i ↦ x_j^ε·x_i (left) or x_i·x_j^ε, fixing the
    /// other generators. `sign` true means ε = +1.
    pub fn elementary_mult(rank: u8, i: usize, j: usize, left: bool, sign: bool) -> Automorphism {
        assert!(i != j && i < rank as usize && j < rank as usize);
        let build = |s: bool| {
            let mut ws: Vec<Word> = (0..rank).map(|k| Word::generator(rank, k)).collect();
            let xj = if s { Word::generator(rank, j as u8) } else { Word::generator(rank, j as u8).inverse() };
            ws[i] = if left { xj.mul(&ws[i]) } else { ws[i].mul(&xj) };
            ws
        };
        Automorphism {
            rank,
            images: build(sign),
            inverse_images: build(!sign),
            factors: Vec::new(),
        }
    }

    fn from_single_letter_images(tuple: &[Word]) -> Automorphism {
        let rank = tuple.len() as u8;
        let mut inverse_images = vec![Word::identity(rank); rank as usize];
        for (i, w) in tuple.iter().enumerate() {
            let l = w.letters()[0];
            let mut g = Word::generator(rank, i as u8);
            if !l.is_positive() {
                g = g.inverse();
            }
            inverse_images[l.index() as usize] = g;
        }
        Automorphism { rank, images: tuple.to_vec(), inverse_images, factors: Vec::new() }
    }

    fn factor_chain_matches(&self) -> bool {
        if self.factors.is_empty() {
            return true;
        }
        // Fold the chain left to right: acc ← acc ∘ F, tracking images only.
        let mut acc: Vec<Word> = (0..self.rank).map(|i| Word::generator(self.rank, i)).collect();
        for f in &self.factors {
            let step = match f {
                BoundaryFactor::Aut(a) => a.images.clone(),
                BoundaryFactor::Translate(m) => Automorphism::inner(m).images,
            };
            acc = step.iter().map(|w| Self::substitute(&acc, w)).collect();
        }
        acc == self.images
    }

    /// Build from a claimed inverse pair, verifying both compositions.
    pub fn from_images_with_inverse(
        images: Vec<Word>,
        inverse_images: Vec<Word>,
    ) -> Result<Automorphism, WordError> {
        let rank = images.len() as u8;
        if rank == 0 || rank > MAX_RANK || inverse_images.len() != images.len() {
            return Err(WordError::BadRank(rank));
        }
        let aut = Automorphism { rank, images, inverse_images, factors: Vec::new() };
        if aut.verify_inverse() {
            Ok(aut)
        } else {
            Err(WordError::NotABasis)
        }
    }

    fn verify_inverse(&self) -> bool {
        (0..self.rank).all(|i| {
            let g = Word::generator(self.rank, i);
            self.apply_images(&self.inverse_images[i as usize]) == g
                && self.apply_inverse(&self.images[i as usize]) == g
        })
    }

    pub fn identity(rank: u8) -> Automorphism {
        let images: Vec<Word> = (0..rank).map(|i| Word::generator(rank, i)).collect();
        Automorphism { rank, images: images.clone(), inverse_images: images, factors: Vec::new() }
    }

    /// Conjugation x ↦ m x m⁻¹. Its boundary action is the left translation
    /// by `m`, recorded as a factor so end-set images bypass refinement.
    pub fn inner(m: &Word) -> Automorphism {
        let rank = m.rank();
        let mi = m.inverse();
        let conj = |w: &Word| m.mul(w).mul(&mi);
        let images = (0..rank).map(|i| conj(&Word::generator(rank, i))).collect();
        let inv = (0..rank)
            .map(|i| mi.mul(&Word::generator(rank, i)).mul(m))
            .collect();
        let factors = if m.is_empty() { Vec::new() } else { vec![BoundaryFactor::Translate(m.clone())] };
        Automorphism { rank, images, inverse_images: inv, factors }
    }

    /// Factored boundary plan, composed left to right (last factor acts
    /// first). Empty when no decomposition is recorded.
    pub fn boundary_factors(&self) -> &[BoundaryFactor] {
        &self.factors
    }

    fn chain(&self) -> Vec<BoundaryFactor> {
        if self.factors.is_empty() {
            let mut bare = self.clone();
            bare.factors = Vec::new();
            vec![BoundaryFactor::Aut(bare)]
        } else {
            self.factors.clone()
        }
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn images(&self) -> &[Word] {
        &self.images
    }

    pub fn inverse_images(&self) -> &[Word] {
        &self.inverse_images
    }

    fn substitute(words: &[Word], w: &Word) -> Word {
        let rank = words[0].rank();
        let mut out = Word::identity(rank);
        for l in w.letters() {
            let img = &words[l.index() as usize];
            out = if l.is_positive() { out.mul(img) } else { out.mul(&img.inverse()) };
        }
        out
    }

    /// Image of a word (substitute then reduce).
    pub fn apply(&self, w: &Word) -> Word {
        debug_assert_eq!(w.rank(), self.rank);
        Self::substitute(&self.images, w)
    }

    fn apply_images(&self, w: &Word) -> Word {
        Self::substitute(&self.images, w)
    }

    /// Image under the inverse automorphism.
    pub fn apply_inverse(&self, w: &Word) -> Word {
        Self::substitute(&self.inverse_images, w)
    }

    pub fn inverse(&self) -> Automorphism {
        let factors = self
            .factors
            .iter()
            .rev()
            .map(|f| match f {
                BoundaryFactor::Aut(a) => BoundaryFactor::Aut(a.inverse()),
                BoundaryFactor::Translate(m) => BoundaryFactor::Translate(m.inverse()),
            })
            .collect();
        Automorphism {
            rank: self.rank,
            images: self.inverse_images.clone(),
            inverse_images: self.images.clone(),
            factors,
        }
    }

    /// self ∘ other (apply `other` first). Factor chains concatenate, so the
    /// composite keeps a fast boundary plan even when its own cancellation
    /// bound is large.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        debug_assert_eq!(self.rank, other.rank);
        let images = other.images.iter().map(|w| self.apply(w)).collect();
        let inverse_images = self
            .inverse_images
            .iter()
            .map(|w| other.apply_inverse(w))
            .collect();
        let mut factors = self.chain();
        factors.extend(other.chain());
        let aut = Automorphism { rank: self.rank, images, inverse_images, factors };
        debug_assert!(aut.factor_chain_matches());
        aut
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, w)| w.len() == 1 && w.letters()[0] == Letter::positive(i as u8))
    }

    /// Junction cancellation bound. Zero when every image is a single letter
    /// (substitution is then letterwise); otherwise the total image length.
    pub fn cancellation_bound(&self) -> usize {
        if self.images.iter().all(|w| w.len() == 1) {
            0
        } else {
            self.images.iter().map(|w| w.len()).sum()
        }
    }

    /// Maximum image length.
    pub fn lipschitz(&self) -> usize {
        self.images.iter().map(|w| w.len()).max().unwrap_or(1).max(1)
    }

    /// The prefix of `apply(w)` that survives any right extension: if `w·u`
    /// is reduced, `apply(w·u)` starts with this word. Drops
    /// [`cancellation_bound`](Self::cancellation_bound) letters from the end.
    pub fn stable_prefix(&self, w: &Word) -> Word {
        let img = self.apply(w);
        let keep = img.len().saturating_sub(self.cancellation_bound());
        img.prefix(keep)
    }

    /// Image of an eventually periodic ray: normalize (α(u), α(v)).
    pub fn apply_to_end(&self, end: &RationalEnd) -> RationalEnd {
        RationalEnd::new(self.apply(&end.head), self.apply(&end.period))
            .expect("automorphism image of a nontrivial period is nontrivial")
    }
}

// Pick the Nielsen multiplication that minimizes (total length, sorted key),
// or None if no move strictly improves that pair. The sorted key treats a
// word and its inverse alike so standalone inversions and swaps are no-ops.
fn best_nielsen_move(tuple: &[Word]) -> Option<(usize, usize, bool, bool)> {
    fn word_key(w: &Word) -> Vec<Letter> {
        let inv = w.inverse();
        let a = w.letters().to_vec();
        let b = inv.letters().to_vec();
        if lex_le(&a, &b) {
            a
        } else {
            b
        }
    }
    fn lex_le(a: &[Letter], b: &[Letter]) -> bool {
        a <= b
    }
    fn tuple_key(tuple: &[Word]) -> (usize, Vec<Vec<Letter>>) {
        let total = tuple.iter().map(|w| w.len()).sum();
        let mut keys: Vec<Vec<Letter>> = tuple.iter().map(word_key).collect();
        keys.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        (total, keys)
    }

    let current_key = tuple_key(tuple);
    let mut best: Option<((usize, Vec<Vec<Letter>>), (usize, usize, bool, bool))> = None;
    let n = tuple.len();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            for left in [false, true] {
                for sign in [true, false] {
                    let factor = if sign { tuple[j].clone() } else { tuple[j].inverse() };
                    let new_word = if left { factor.mul(&tuple[i]) } else { tuple[i].mul(&factor) };
                    let mut candidate = tuple.to_vec();
                    candidate[i] = new_word;
                    let key = tuple_key(&candidate);
                    if key < current_key && best.as_ref().map_or(true, |(k, _)| key < *k) {
                        best = Some((key, (i, j, left, sign)));
                    }
                }
            }
        }
    }
    best.map(|(_, mv)| mv)
}

/// An eventually periodic ray `u·v^∞`, kept in normal form: the period is
/// cyclically reduced and primitive, the junction is reduced, and the head is
/// the shortest possible (maximal period suffixes folded into the rotation).
/// Two rays are equal as boundary points iff their normal forms are equal.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalEnd {
    head: Word,
    period: Word,
}

impl RationalEnd {
    pub fn new(head: Word, period: Word) -> Result<RationalEnd, WordError> {
        if head.rank() != period.rank() {
            return Err(WordError::RankMismatch { left: head.rank(), right: period.rank() });
        }
        if period.is_empty() {
            return Err(WordError::EmptyPeriod);
        }

        // Cyclically reduce the period, folding the conjugator into the head:
        // u·(p w p⁻¹)^∞ = (u p)·w^∞.
        let mut v = period;
        let mut u = head;
        while v.len() >= 2 && v.first() == v.last().map(|l| l.inverse()) {
            let first = v.first().unwrap();
            u = u.push(first);
            v = Word::reduce(v.rank(), v.letters()[1..v.len() - 1].iter().copied())
                .expect("letters already in range");
        }
        if v.is_empty() {
            return Err(WordError::EmptyPeriod);
        }

        // Primitive root: shortest z with v = z^k.
        let vl = v.letters();
        let n = vl.len();
        for p in 1..=n {
            if n % p == 0 && (p..n).all(|k| vl[k] == vl[k - p]) {
                v = v.prefix(p);
                break;
            }
        }

        // Reduce the junction: a cancellation rotates the period left and
        // shortens the head.
        while !u.is_empty() && u.last() == v.first().map(|l| l.inverse()) {
            u = u.prefix(u.len() - 1);
            let mut rot = v.letters()[1..].to_vec();
            rot.push(v.letters()[0]);
            v = Word { rank: v.rank(), letters: rot };
        }

        // Fold period suffixes: u ending with the period's last letter means
        // the periodic tail starts earlier; rotate right and shorten the head.
        while !u.is_empty() && u.last() == v.last() {
            u = u.prefix(u.len() - 1);
            let mut rot = vec![*v.letters().last().unwrap()];
            rot.extend_from_slice(&v.letters()[..v.len() - 1]);
            v = Word { rank: v.rank(), letters: rot };
        }

        debug_assert!(u.last().map_or(true, |l| Some(l.inverse()) != v.first()));
        Ok(RationalEnd { head: u, period: v })
    }

    pub fn rank(&self) -> u8 {
        self.head.rank()
    }

    pub fn head(&self) -> &Word {
        &self.head
    }

    pub fn period(&self) -> &Word {
        &self.period
    }

    /// The first `n` letters of the infinite reduced word.
    pub fn prefix(&self, n: usize) -> Word {
        let mut letters = Vec::with_capacity(n);
        letters.extend_from_slice(self.head.letters());
        while letters.len() < n {
            letters.extend_from_slice(self.period.letters());
        }
        letters.truncate(n);
        Word { rank: self.rank(), letters }
    }

    /// Does the infinite word start with `w`?
    pub fn starts_with(&self, w: &Word) -> bool {
        &self.prefix(w.len()) == w
    }

    /// Left translation g·ξ.
    pub fn translate(&self, g: &Word) -> RationalEnd {
        RationalEnd::new(g.mul(&self.head), self.period.clone())
            .expect("translation keeps the period nontrivial")
    }

    pub fn render(&self) -> String {
        format!("{}({})*", self.head.render(), self.period.render())
    }
}

impl fmt::Debug for RationalEnd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}
