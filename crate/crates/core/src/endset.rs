//! Clopen subsets of the space of ends of a free group.
//!
//! An end is an infinite reduced word; a clopen set is a finite union of
//! cylinders `C(w)` (ends starting with `w`). Every clopen set has a unique
//! minimal set of cylinder prefixes, and all sets here are kept in that
//! canonical form, so set equality is structural equality. The canonical form
//! is an antichain under the prefix order in which no node's full family of
//! reduced extensions is present.

use crate::word::{Automorphism, BoundaryFactor, Letter, RationalEnd, Word, WordError};
use std::collections::VecDeque;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq, Clone)]
pub enum EndsetError {
    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: u8, right: u8 },
    #[error("partition side must be neither empty nor everything")]
    ImproperPartition,
    #[error("refinement exceeded its proven depth bound {cap}; this is a bug")]
    BoundExceeded { cap: usize },
    #[error(transparent)]
    Word(#[from] WordError),
}

/// A clopen set of ends in canonical form.
///
/// The empty set has no prefixes; the full space is the single empty prefix.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClopenSet {
    rank: u8,
    prefixes: Vec<Word>,
}

impl ClopenSet {
    pub fn empty(rank: u8) -> ClopenSet {
        ClopenSet { rank, prefixes: Vec::new() }
    }

    pub fn full(rank: u8) -> ClopenSet {
        ClopenSet { rank, prefixes: vec![Word::identity(rank)] }
    }

    /// The cylinder of all ends starting with `w`.
    pub fn cylinder(w: &Word) -> ClopenSet {
        ClopenSet::from_prefixes(w.rank(), vec![w.clone()])
    }

    /// Build from an arbitrary list of cylinder prefixes and canonicalize.
    pub fn from_prefixes(rank: u8, prefixes: Vec<Word>) -> ClopenSet {
        let mut set = ClopenSet { rank, prefixes };
        set.canonicalize();
        set
    }

    /// Canonical form: shortlex-sorted antichain with every full family of
    /// extensions folded into its parent. Reaches the unique minimal
    /// representation.
    fn canonicalize(&mut self) {
        use std::collections::HashSet;
        if self.prefixes.is_empty() {
            return;
        }
        let mut words: HashSet<Word> = self.prefixes.drain(..).collect();

        // absorb: a cylinder inside another contributes nothing. Only
        // lengths actually present can host an absorbing prefix.
        let lens: HashSet<usize> = words.iter().map(Word::len).collect();
        let absorbed: Vec<Word> = words
            .iter()
            .filter(|w| {
                (0..w.len()).any(|k| lens.contains(&k) && words.contains(&w.prefix(k)))
            })
            .cloned()
            .collect();
        for w in absorbed {
            words.remove(&w);
        }

        // fold bottom-up: a complete family of reduced extensions is its
        // parent. Folding at one level can only complete families at the
        // level above, so a single sweep from the deepest level cascades
        // all the way to the root.
        let mut level = words.iter().map(Word::len).max().unwrap_or(0);
        while level > 0 {
            let parents: HashSet<Word> = words
                .iter()
                .filter(|w| w.len() == level)
                .map(|w| w.prefix(level - 1))
                .collect();
            for p in parents {
                let family: Vec<Word> =
                    p.extension_letters().iter().map(|&l| p.push(l)).collect();
                if family.iter().all(|f| words.contains(f)) {
                    for f in &family {
                        words.remove(f);
                    }
                    words.insert(p);
                }
            }
            level -= 1;
        }

        self.prefixes = words.into_iter().collect();
        self.prefixes.sort();
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    /// The canonical cylinder prefixes, shortlex sorted.
    pub fn prefixes(&self) -> &[Word] {
        &self.prefixes
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.prefixes.len() == 1 && self.prefixes[0].is_empty()
    }

    pub fn max_prefix_len(&self) -> usize {
        self.prefixes.iter().map(|w| w.len()).max().unwrap_or(0)
    }

    /// Is the whole cylinder `C(w)` inside this set? On canonical forms this
    /// holds exactly when some stored prefix is a prefix of `w`.
    pub fn contains_cylinder(&self, w: &Word) -> bool {
        self.prefixes.iter().any(|p| p.is_prefix_of(w))
    }

    /// Is `C(w)` disjoint from this set? Cylinders meet exactly when their
    /// prefixes are comparable.
    pub fn disjoint_from_cylinder(&self, w: &Word) -> bool {
        !self
            .prefixes
            .iter()
            .any(|p| p.is_prefix_of(w) || w.is_prefix_of(p))
    }

    pub fn contains_end(&self, end: &RationalEnd) -> bool {
        self.prefixes.iter().any(|p| end.starts_with(p))
    }

    /// Up to `k` pairwise distinct ends inside the set, chosen
    /// deterministically: each canonical prefix extended by its valid
    /// single-letter periods in alphabet order.
    pub fn sample_ends(&self, k: usize) -> Vec<RationalEnd> {
        let mut out = Vec::new();
        'prefixes: for p in &self.prefixes {
            for l in Letter::alphabet(self.rank) {
                if out.len() >= k {
                    break 'prefixes;
                }
                if p.last() == Some(l.inverse()) {
                    continue;
                }
                let end = RationalEnd::new(p.clone(), Word::single(self.rank, l))
                    .expect("single-letter period");
                debug_assert!(self.contains_end(&end));
                out.push(end);
            }
        }
        out
    }

    /// Do the two sets intersect?
    pub fn overlaps(&self, other: &ClopenSet) -> bool {
        self.prefixes.iter().any(|p| {
            other
                .prefixes
                .iter()
                .any(|q| p.is_prefix_of(q) || q.is_prefix_of(p))
        })
    }

    pub fn is_subset(&self, other: &ClopenSet) -> bool {
        self.prefixes.iter().all(|p| other.contains_cylinder(p))
    }

    pub fn union(&self, other: &ClopenSet) -> ClopenSet {
        debug_assert_eq!(self.rank, other.rank);
        let mut prefixes = self.prefixes.clone();
        prefixes.extend_from_slice(&other.prefixes);
        ClopenSet::from_prefixes(self.rank, prefixes)
    }

    pub fn intersect(&self, other: &ClopenSet) -> ClopenSet {
        debug_assert_eq!(self.rank, other.rank);
        let mut prefixes = Vec::new();
        for p in &self.prefixes {
            for q in &other.prefixes {
                if p.is_prefix_of(q) {
                    prefixes.push(q.clone());
                } else if q.is_prefix_of(p) {
                    prefixes.push(p.clone());
                }
            }
        }
        ClopenSet::from_prefixes(self.rank, prefixes)
    }

    /// Complement: walk the prefix tree of the stored antichain and collect
    /// every reduced sibling branching off it.
    pub fn complement(&self) -> ClopenSet {
        if self.is_empty() {
            return ClopenSet::full(self.rank);
        }
        let mut out: Vec<Word> = Vec::new();
        let mut interior: Vec<Word> = vec![Word::identity(self.rank)];
        // interior nodes: proper prefixes of stored prefixes
        for p in &self.prefixes {
            for n in 0..p.len() {
                interior.push(p.prefix(n));
            }
        }
        interior.sort();
        interior.dedup();
        for u in &interior {
            if self.prefixes.contains(u) {
                continue;
            }
            for l in u.extension_letters() {
                let child = u.push(l);
                let in_tree = interior.contains(&child) || self.prefixes.contains(&child);
                if !in_tree {
                    out.push(child);
                }
            }
        }
        ClopenSet::from_prefixes(self.rank, out)
    }

    /// Left translation `m · X`, computed exactly. Translating a cylinder
    /// yields one cylinder unless the prefix cancels completely into `m`;
    /// that lone branch recurses on a shorter translate, so the expansion
    /// stays linear in `|m|`.
    pub fn left_mul(&self, m: &Word) -> ClopenSet {
        debug_assert_eq!(self.rank, m.rank());
        let mut out: Vec<Word> = Vec::new();
        for p in &self.prefixes {
            translate_cylinder(m, p, &mut out);
        }
        ClopenSet::from_prefixes(self.rank, out)
    }

    /// Image of the set under the end extension of an automorphism.
    ///
    /// When the automorphism carries a factor chain, the image is computed
    /// one factor at a time (translations as exact cylinder translations,
    /// small maps by refinement); otherwise directly by refinement. Each step
    /// is exact, so the composite is too. Refinement cost is exponential in
    /// the factor's cancellation bound, which is why chains matter.
    pub fn map(&self, aut: &Automorphism) -> Result<ClopenSet, EndsetError> {
        if aut.rank() != self.rank {
            return Err(EndsetError::RankMismatch { left: aut.rank(), right: self.rank });
        }
        if aut.boundary_factors().is_empty() {
            return self.map_refine(aut);
        }
        let mut cur = self.clone();
        for f in aut.boundary_factors().iter().rev() {
            cur = match f {
                BoundaryFactor::Aut(a) => cur.map_refine(a)?,
                BoundaryFactor::Translate(m) => cur.left_mul(m),
            };
        }
        Ok(cur)
    }

    /// Direct cylinder refinement: a candidate cylinder `C(v)` lands inside
    /// (or misses) the image exactly when the stable prefix of the preimage
    /// of `v` is inside (or misses) this set; undecided candidates are split
    /// one letter deeper. Growth of the stable prefix bounds the refinement
    /// depth, so exceeding the cap signals a bug.
    fn map_refine(&self, aut: &Automorphism) -> Result<ClopenSet, EndsetError> {
        if self.is_empty() {
            return Ok(ClopenSet::empty(self.rank));
        }
        if self.is_full() {
            return Ok(ClopenSet::full(self.rank));
        }
        let inv = aut.inverse();
        let cap = aut.lipschitz() * (self.max_prefix_len() + inv.cancellation_bound() + 2) + 4;

        let mut out: Vec<Word> = Vec::new();
        let mut queue: VecDeque<Word> = Letter::alphabet(self.rank)
            .map(|l| Word::single(self.rank, l))
            .collect();
        while let Some(v) = queue.pop_front() {
            if v.len() > cap {
                return Err(EndsetError::BoundExceeded { cap });
            }
            let p = inv.stable_prefix(&v);
            if self.contains_cylinder(&p) {
                out.push(v);
            } else if self.disjoint_from_cylinder(&p) {
                // dropped
            } else {
                for l in v.extension_letters() {
                    queue.push_back(v.push(l));
                }
            }
        }
        Ok(ClopenSet::from_prefixes(self.rank, out))
    }

    pub fn render(&self) -> String {
        let inner: Vec<String> = self.prefixes.iter().map(|w| w.render()).collect();
        format!("{{{}}}", inner.join(","))
    }

    /// Parse the `{w1,w2,...}` form; `{}` is empty, `{1}` is everything.
    pub fn parse(s: &str, rank: u8) -> Result<ClopenSet, EndsetError> {
        let body = s
            .strip_prefix('{')
            .and_then(|t| t.strip_suffix('}'))
            .ok_or_else(|| WordError::Parse(s.to_string()))?;
        let mut prefixes = Vec::new();
        if !body.trim().is_empty() {
            for part in body.split(',') {
                prefixes.push(Word::parse(part.trim(), rank)?);
            }
        }
        Ok(ClopenSet::from_prefixes(rank, prefixes))
    }
}

impl fmt::Debug for ClopenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.render())
    }
}

// Append the cylinder prefixes of m·C(w) to out.
fn translate_cylinder(m: &Word, w: &Word, out: &mut Vec<Word>) {
    if w.is_empty() {
        // m · (everything) = everything
        out.push(Word::identity(m.rank()));
        return;
    }
    let product = m.mul(w);
    // cancellation consumed all of w exactly when the product dropped to
    // |m| - |w| (m ends with w⁻¹)
    let consumed = product.len() + w.len() == m.len();
    if !consumed {
        out.push(product);
        return;
    }
    // m ends with w⁻¹: the translated set is product·η over all η admissible
    // after w, i.e. all first letters except the inverse of w's last letter
    let banned = w.last().unwrap().inverse();
    for l in Letter::alphabet(m.rank()) {
        if l == banned {
            continue;
        }
        let letter_word = Word::single(m.rank(), l);
        if product.last() == Some(l.inverse()) {
            // the lone deep branch: recurse with a strictly shorter translate
            translate_cylinder(&product, &letter_word, out);
        } else {
            out.push(product.mul(&letter_word));
        }
    }
}

/// A two-sided partition of the space of ends into complementary nonempty
/// clopen pieces, as cut out by an edge of a tree. The orientation (which
/// side is `plus`) is part of the data.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Bipartition {
    plus: ClopenSet,
    minus: ClopenSet,
}

impl Bipartition {
    pub fn new(plus: ClopenSet) -> Result<Bipartition, EndsetError> {
        if plus.is_empty() || plus.is_full() {
            return Err(EndsetError::ImproperPartition);
        }
        let minus = plus.complement();
        Ok(Bipartition { plus, minus })
    }

    pub fn plus(&self) -> &ClopenSet {
        &self.plus
    }

    pub fn minus(&self) -> &ClopenSet {
        &self.minus
    }

    pub fn flip(&self) -> Bipartition {
        Bipartition { plus: self.minus.clone(), minus: self.plus.clone() }
    }

    /// Same unordered partition, either orientation.
    pub fn same_partition(&self, other: &Bipartition) -> bool {
        self.plus == other.plus || self.plus == other.minus
    }

    /// All four mutual intersections nonempty: neither side of one partition
    /// fits inside a side of the other.
    pub fn non_nested(&self, other: &Bipartition) -> bool {
        self.plus.overlaps(&other.plus)
            && self.plus.overlaps(&other.minus)
            && self.minus.overlaps(&other.plus)
            && self.minus.overlaps(&other.minus)
    }

    pub fn translate(&self, m: &Word) -> Bipartition {
        Bipartition { plus: self.plus.left_mul(m), minus: self.minus.left_mul(m) }
    }

    pub fn map(&self, aut: &Automorphism) -> Result<Bipartition, EndsetError> {
        Ok(Bipartition { plus: self.plus.map(aut)?, minus: self.minus.map(aut)? })
    }
}

impl fmt::Debug for Bipartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} | {}", self.plus.render(), self.minus.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Word {
        Word::parse(s, 2).unwrap()
    }

    fn set(s: &str) -> ClopenSet {
        ClopenSet::parse(s, 2).unwrap()
    }

    #[test]
    fn canonical_form_absorbs_and_folds() {
        // a covers ab
        assert_eq!(set("{a,ab}"), set("{a}"));
        // all three extensions of a fold into a
        assert_eq!(set("{aa,ab,aB}"), set("{a}"));
        // all four first letters fold into everything
        assert_eq!(set("{a,A,b,B}"), ClopenSet::full(2));
        // fold cascades upward
        assert_eq!(set("{aa,ab,aB,A,b,B}"), ClopenSet::full(2));
    }

    #[test]
    fn render_is_shortlex() {
        let x = ClopenSet::from_prefixes(2, vec![w("Ba"), w("a")]);
        assert_eq!(x.render(), "{a,Ba}");
        assert_eq!(ClopenSet::empty(2).render(), "{}");
        assert_eq!(ClopenSet::full(2).render(), "{1}");
    }

    #[test]
    fn parse_roundtrip() {
        for s in ["{}", "{1}", "{a,Ba}", "{A,b,B,aa,aB}"] {
            assert_eq!(set(s).render(), s);
        }
    }

    #[test]
    fn complement_of_cylinder() {
        let x = ClopenSet::cylinder(&w("ab"));
        assert_eq!(x.complement().render(), "{A,b,B,aa,aB}");
        // complement is an involution
        assert_eq!(x.complement().complement(), x);
        assert_eq!(ClopenSet::full(2).complement(), ClopenSet::empty(2));
        assert_eq!(ClopenSet::empty(2).complement(), ClopenSet::full(2));
    }

    #[test]
    fn boolean_identities() {
        let x = set("{a,Ba}");
        let c = x.complement();
        assert!(x.intersect(&c).is_empty());
        assert!(x.union(&c).is_full());
        assert!(!x.overlaps(&c));
        assert!(x.is_subset(&x.union(&set("{b}"))));
        assert_eq!(x.intersect(&set("{a}")), set("{a}"));
    }

    #[test]
    fn cylinder_queries_on_canonical_form() {
        let x = set("{a,Ba}");
        assert!(x.contains_cylinder(&w("ab")));
        assert!(x.contains_cylinder(&w("Bab")));
        assert!(!x.contains_cylinder(&w("B")));
        assert!(x.disjoint_from_cylinder(&w("bb")));
        assert!(!x.disjoint_from_cylinder(&w("B")));
    }

    #[test]
    fn contains_rational_ends() {
        let x = set("{a,Ba}");
        let e1 = RationalEnd::new(Word::identity(2), w("a")).unwrap();
        let e2 = RationalEnd::new(w("B"), w("a")).unwrap();
        let e3 = RationalEnd::new(Word::identity(2), w("b")).unwrap();
        assert!(x.contains_end(&e1));
        assert!(x.contains_end(&e2));
        assert!(!x.contains_end(&e3));
        assert!(x.complement().contains_end(&e3));
    }

    #[test]
    fn left_translation_simple_and_cancelling() {
        // b·C(a) = C(ba)
        assert_eq!(ClopenSet::cylinder(&w("a")).left_mul(&w("b")).render(), "{ba}");
        // A·C(a): full cancellation; ends are η with first letter ≠ A
        assert_eq!(
            ClopenSet::cylinder(&w("a")).left_mul(&w("A")).render(),
            "{a,b,B}"
        );
        // identity translation
        let x = set("{a,Ba}");
        assert_eq!(x.left_mul(&Word::identity(2)), x);
    }

    #[test]
    fn left_translation_deep_cancellation() {
        // AB·C(ba): product fully consumed, then the B branch digs into A
        let x = ClopenSet::cylinder(&w("ba"));
        let t = x.left_mul(&w("AB"));
        // oracle: membership of translated rational ends
        let inside = RationalEnd::new(w("ba"), w("a")).unwrap();
        let outside = RationalEnd::new(w("bb"), w("b")).unwrap();
        assert!(t.contains_end(&inside.translate(&w("AB"))));
        assert!(!t.contains_end(&outside.translate(&w("AB"))));
    }

    #[test]
    fn translation_composes_and_inverts() {
        let x = set("{a,Ba}");
        for m in ["ab", "AB", "bb", "Bab"] {
            let m = w(m);
            let there = x.left_mul(&m);
            assert_eq!(there.left_mul(&m.inverse()), x);
        }
        let g = w("aB");
        let h = w("bA");
        assert_eq!(x.left_mul(&h).left_mul(&g), x.left_mul(&g.mul(&h)));
    }

    #[test]
    fn map_by_identity_and_inner() {
        let x = set("{a,Ba}");
        assert_eq!(x.map(&Automorphism::identity(2)).unwrap(), x);
        // conjugation acts on ends as left translation
        for m in ["a", "B", "ab"] {
            let m = w(m);
            assert_eq!(x.map(&Automorphism::inner(&m)).unwrap(), x.left_mul(&m));
        }
    }

    #[test]
    fn sampled_ends_are_distinct_members() {
        let x = set("{a,Ba}");
        let ends = x.sample_ends(4);
        let rendered: Vec<String> = ends.iter().map(|e| e.render()).collect();
        // Normal forms: a(a)* folds to 1(a)*, Ba(a)* to B(a)*.
        assert_eq!(rendered, vec!["1(a)*", "a(b)*", "a(B)*", "B(a)*"]);
        for e in &ends {
            assert!(x.contains_end(e));
        }
        assert_eq!(ClopenSet::full(2).sample_ends(2).len(), 2);
        assert!(ClopenSet::empty(2).sample_ends(3).is_empty());
    }

    #[test]
    fn factored_map_agrees_with_direct_refinement() {
        // Strip the recorded chain and recompute by raw refinement.
        let aut = Automorphism::new(vec![w("ab"), w("b")]).unwrap();
        assert!(!aut.boundary_factors().is_empty());
        let direct =
            Automorphism::from_images_with_inverse(aut.images().to_vec(), aut.inverse_images().to_vec())
                .unwrap();
        assert!(direct.boundary_factors().is_empty());
        for s in ["{a}", "{a,Ba}", "{b,ab,aB}"] {
            let x = set(s);
            assert_eq!(x.map(&aut).unwrap(), x.map(&direct).unwrap());
        }
        // Same for a composite whose own cancellation bound is larger.
        let twist = Automorphism::new(vec![w("aab"), w("ab")]).unwrap();
        let comp = twist.compose(&aut.inverse());
        let comp_direct = Automorphism::from_images_with_inverse(
            comp.images().to_vec(),
            comp.inverse_images().to_vec(),
        )
        .unwrap();
        let x = set("{a,Ba}");
        assert_eq!(x.map(&comp).unwrap(), x.map(&comp_direct).unwrap());
    }

    #[test]
    fn map_tracks_end_membership() {
        let aut = Automorphism::new(vec![w("ab"), w("b")]).unwrap();
        let x = set("{a,Ba}");
        let img = x.map(&aut).unwrap();
        let ends = [
            RationalEnd::new(Word::identity(2), w("a")).unwrap(),
            RationalEnd::new(Word::identity(2), w("b")).unwrap(),
            RationalEnd::new(w("B"), w("ab")).unwrap(),
            RationalEnd::new(w("ab"), w("Ab")).unwrap(),
            RationalEnd::new(w("ba"), w("bA")).unwrap(),
        ];
        for e in &ends {
            assert_eq!(
                x.contains_end(e),
                img.contains_end(&aut.apply_to_end(e)),
                "membership must transport along {:?}",
                e
            );
        }
    }

    #[test]
    fn map_respects_boolean_structure() {
        let aut = Automorphism::new(vec![w("ab"), w("b")]).unwrap();
        let x = set("{a,Ba}");
        let c = x.complement();
        assert_eq!(x.map(&aut).unwrap().complement(), c.map(&aut).unwrap());
        assert!(ClopenSet::full(2).map(&aut).unwrap().is_full());
        assert!(ClopenSet::empty(2).map(&aut).unwrap().is_empty());
        // applying the inverse maps back
        assert_eq!(x.map(&aut).unwrap().map(&aut.inverse()).unwrap(), x);
    }

    #[test]
    fn bipartition_rejects_trivial_sides() {
        assert_eq!(
            Bipartition::new(ClopenSet::empty(2)).unwrap_err(),
            EndsetError::ImproperPartition
        );
        assert_eq!(
            Bipartition::new(ClopenSet::full(2)).unwrap_err(),
            EndsetError::ImproperPartition
        );
    }

    #[test]
    fn nesting_detection() {
        let pa = Bipartition::new(set("{a}")).unwrap();
        let pb = Bipartition::new(set("{b}")).unwrap();
        let paa = Bipartition::new(set("{aa}")).unwrap();
        // C(a) vs C(b): sides C(a) ⊆ complement of C(b), nested
        assert!(!pa.non_nested(&pb));
        // C(aa) inside C(a): nested
        assert!(!pa.non_nested(&paa));
        // a partition is nested with itself
        assert!(!pa.non_nested(&pa));
        // {a,A} vs {a,b}: all four corners hit
        let px = Bipartition::new(set("{a,A}")).unwrap();
        let py = Bipartition::new(set("{a,b}")).unwrap();
        assert!(px.non_nested(&py));
        assert!(py.non_nested(&px));
    }

    #[test]
    fn same_partition_ignores_orientation() {
        let p = Bipartition::new(set("{a}")).unwrap();
        let q = Bipartition::new(set("{a}").complement()).unwrap();
        assert!(p.same_partition(&q));
        assert!(p.same_partition(&p.flip()));
        assert!(!p.same_partition(&Bipartition::new(set("{b}")).unwrap()));
        assert_ne!(p, p.flip());
    }

    #[test]
    fn bipartition_translation_keeps_complementarity() {
        let p = Bipartition::new(set("{a,Ba}")).unwrap();
        let t = p.translate(&w("AB"));
        assert_eq!(t.plus().complement(), *t.minus());
    }
}
