//! Braid words, closure permutations and components, the Artin action on
//! the free group of disk meridians, and zero-framed longitude words.
//!
//! Strand and component indices are 0-based in the API; the textual braid
//! format and the JSON schemas use 1-based generators and labels.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BraidWord {
    #[serde(rename = "strands")]
    pub n: usize,
    pub word: Vec<i32>,
}

impl BraidWord {
    pub fn new(n: usize, word: Vec<i32>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Input("a braid needs at least one strand".into()));
        }
        for &g in &word {
            if g == 0 || g.unsigned_abs() as usize >= n {
                return Err(Error::Input(format!(
                    "generator {g} out of range for {n} strands"
                )));
            }
        }
        Ok(BraidWord { n, word })
    }

    /// Whitespace-separated signed generators, e.g. "1 1 -2".
    pub fn parse(text: &str, n: usize) -> Result<Self> {
        let word = text
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| {
                t.parse::<i32>().map_err(|_| Error::Parse {
                    what: "braid letter",
                    input: t.to_string(),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(n, word)
    }

    pub fn inverse(&self) -> Self {
        BraidWord {
            n: self.n,
            word: self.word.iter().rev().map(|g| -g).collect(),
        }
    }

    pub fn concat(&self, o: &BraidWord) -> Self {
        assert_eq!(self.n, o.n, "braid strand counts differ");
        let mut word = self.word.clone();
        word.extend(&o.word);
        BraidWord { n: self.n, word }
    }

    pub fn text(&self) -> String {
        self.word
            .iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

impl fmt::Display for BraidWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] in Br_{}", self.text(), self.n)
    }
}

/// A word in the disk meridians m_0..m_{n-1} with exponents ±1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct MeridianWord {
    pub letters: Vec<(usize, i8)>,
}

impl MeridianWord {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn gen(t: usize) -> Self {
        MeridianWord {
            letters: vec![(t, 1)],
        }
    }

    pub fn gen_pow(t: usize, e: i64) -> Self {
        let s = if e < 0 { -1 } else { 1 };
        MeridianWord {
            letters: vec![(t, s); e.unsigned_abs() as usize],
        }
    }

    /// Free reduction; the result has no adjacent (t, e)(t, -e).
    pub fn reduced(&self) -> Self {
        let mut out: Vec<(usize, i8)> = Vec::with_capacity(self.letters.len());
        for &(t, e) in &self.letters {
            match out.last() {
                Some(&(u, f)) if u == t && f == -e => {
                    out.pop();
                }
                _ => out.push((t, e)),
            }
        }
        MeridianWord { letters: out }
    }

    pub fn inverse(&self) -> Self {
        MeridianWord {
            letters: self.letters.iter().rev().map(|&(t, e)| (t, -e)).collect(),
        }
    }

    /// Reduced product self·o.
    pub fn mul(&self, o: &MeridianWord) -> Self {
        let mut letters = self.letters.clone();
        letters.extend(&o.letters);
        MeridianWord { letters }.reduced()
    }

    /// Reduced conjugate x⁻¹·self·x.
    pub fn conj_by(&self, x: &MeridianWord) -> Self {
        x.inverse().mul(self).mul(x)
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    /// Exponent sum per meridian (abelianization).
    pub fn abelianize(&self, n: usize) -> Vec<i64> {
        let mut v = vec![0; n];
        for &(t, e) in &self.letters {
            v[t] += e as i64;
        }
        v
    }

    /// Substitute each generator m_t by images[t].
    pub fn substitute(&self, images: &[MeridianWord]) -> Self {
        let mut out = MeridianWord::empty();
        for &(t, e) in &self.letters {
            let w = if e > 0 {
                images[t].clone()
            } else {
                images[t].inverse()
            };
            out.letters.extend(w.letters);
        }
        out.reduced()
    }
}

impl fmt::Display for MeridianWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.letters.is_empty() {
            return write!(f, "e");
        }
        let parts: Vec<String> = self
            .letters
            .iter()
            .map(|&(t, e)| {
                if e > 0 {
                    format!("m{}", t + 1)
                } else {
                    format!("m{}^-1", t + 1)
                }
            })
            .collect();
        write!(f, "{}", parts.join(" "))
    }
}

/// τ_B as a map position-at-top ↦ position-at-bottom, following each strand
/// through the letters in word order.
pub fn permutation(b: &BraidWord) -> Vec<usize> {
    // owner[p] = strand currently at position p
    let mut owner: Vec<usize> = (0..b.n).collect();
    for &g in &b.word {
        let k = g.unsigned_abs() as usize - 1;
        owner.swap(k, k + 1);
    }
    let mut tau = vec![0; b.n];
    for (p, &s) in owner.iter().enumerate() {
        tau[s] = p;
    }
    tau
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentMap {
    pub n: usize,
    pub r: usize,
    /// strand ↦ component
    pub map: Vec<usize>,
    /// component ↦ minimal strand of its cycle
    pub base_strand: Vec<usize>,
}

impl ComponentMap {
    pub fn strands_of(&self, s: usize) -> Vec<usize> {
        (0..self.n).filter(|&i| self.map[i] == s).collect()
    }

    /// The identity map of an r-component unlink on r strands.
    pub fn discrete(n: usize) -> Self {
        ComponentMap {
            n,
            r: n,
            map: (0..n).collect(),
            base_strand: (0..n).collect(),
        }
    }
}

/// Cycles of τ_B numbered by their minimal strand, without the monotonicity
/// requirement.
pub fn cycle_labels(b: &BraidWord) -> ComponentMap {
    let tau = permutation(b);
    let mut map = vec![usize::MAX; b.n];
    let mut base = Vec::new();
    for i in 0..b.n {
        if map[i] != usize::MAX {
            continue;
        }
        let s = base.len();
        base.push(i);
        let mut j = i;
        while map[j] == usize::MAX {
            map[j] = s;
            j = tau[j];
        }
    }
    ComponentMap {
        n: b.n,
        r: base.len(),
        map,
        base_strand: base,
    }
}

pub fn component_map(b: &BraidWord) -> Result<ComponentMap> {
    let cm = cycle_labels(b);
    if cm.map.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::NonMonotoneComponents(
            cm.map.iter().map(|s| s + 1).collect(),
        ));
    }
    Ok(cm)
}

/// A braid whose closure is the input's closure and whose component labels
/// are non-decreasing, together with the positive permutation braid C used:
/// `braid = C⁻¹ · input · C`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Monotonized {
    pub braid: BraidWord,
    pub conjugator: BraidWord,
}

pub fn monotonize(b: &BraidWord) -> Monotonized {
    let cm = cycle_labels(b);
    let mut order: Vec<usize> = (0..b.n).collect();
    order.sort_by_key(|&i| (cm.map[i], i));
    // target[i] = new position of strand i
    let mut target = vec![0; b.n];
    for (p, &i) in order.iter().enumerate() {
        target[i] = p;
    }
    let mut arr = target.clone();
    let mut letters = Vec::new();
    let mut swapped = true;
    while swapped {
        swapped = false;
        for k in 0..b.n.saturating_sub(1) {
            if arr[k] > arr[k + 1] {
                arr.swap(k, k + 1);
                letters.push(k as i32 + 1);
                swapped = true;
            }
        }
    }
    let conjugator = BraidWord {
        n: b.n,
        word: letters,
    };
    Monotonized {
        braid: conjugator.inverse().concat(b).concat(&conjugator),
        conjugator,
    }
}

fn artin_images(n: usize, g: i32) -> Vec<MeridianWord> {
    let mut img: Vec<MeridianWord> = (0..n).map(MeridianWord::gen).collect();
    let k = g.unsigned_abs() as usize - 1;
    let mk = MeridianWord::gen(k);
    let mk1 = MeridianWord::gen(k + 1);
    if g > 0 {
        img[k] = mk.mul(&mk1).mul(&mk.inverse());
        img[k + 1] = mk;
    } else {
        img[k] = mk1.clone();
        img[k + 1] = mk.conj_by(&mk1);
    }
    img
}

/// φ_B(w): the letter substitutions applied to w one after another in word
/// order.
pub fn artin_action(b: &BraidWord, w: &MeridianWord) -> MeridianWord {
    let mut cur = w.reduced();
    for &g in &b.word {
        cur = cur.substitute(&artin_images(b.n, g));
    }
    cur
}

/// Pairs (m_i, φ_B(m_i)); the link group is the free group modulo these.
pub fn wirtinger_relations(b: &BraidWord) -> Vec<(MeridianWord, MeridianWord)> {
    (0..b.n)
        .map(|i| {
            let m = MeridianWord::gen(i);
            let img = artin_action(b, &m);
            (m, img)
        })
        .collect()
}

/// Per-strand crossing data obtained by sweeping the braid top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrandTrace {
    pub tau: Vec<usize>,
    /// P_i: product over the under-crossings of strand i of the over
    /// strand's meridian (signed by the crossing)
    pub passage: Vec<MeridianWord>,
    /// meridians at the bottom positions, in top meridians
    pub bottom: Vec<MeridianWord>,
    /// signed crossing count between strands of the same component
    pub self_writhe: Vec<i64>,
}

/// Meridians at each position after the first `upto` letters, plus which
/// strand sits at each position and the passage words accumulated so far.
pub fn sweep(b: &BraidWord, upto: usize) -> (Vec<MeridianWord>, Vec<usize>, Vec<MeridianWord>) {
    let mut a: Vec<MeridianWord> = (0..b.n).map(MeridianWord::gen).collect();
    let mut owner: Vec<usize> = (0..b.n).collect();
    let mut passage = vec![MeridianWord::empty(); b.n];
    for &g in b.word.iter().take(upto) {
        let k = g.unsigned_abs() as usize - 1;
        let (ak, ak1) = (a[k].clone(), a[k + 1].clone());
        if g > 0 {
            // strand at k goes under to k+1
            let under = owner[k];
            passage[under] = passage[under].mul(&ak1);
            a[k] = ak1.clone();
            a[k + 1] = ak.conj_by(&ak1);
        } else {
            // strand at k+1 goes under to k
            let under = owner[k + 1];
            passage[under] = passage[under].mul(&ak.inverse());
            a[k + 1] = ak.clone();
            a[k] = ak1.conj_by(&ak.inverse());
        }
        owner.swap(k, k + 1);
    }
    (a, owner, passage)
}

pub fn strand_trace(b: &BraidWord) -> StrandTrace {
    let (bottom, _, passage) = sweep(b, b.word.len());
    let cm = cycle_labels(b);
    let mut self_writhe = vec![0; cm.r];
    let mut owner: Vec<usize> = (0..b.n).collect();
    for &g in &b.word {
        let k = g.unsigned_abs() as usize - 1;
        let (x, y) = (owner[k], owner[k + 1]);
        if cm.map[x] == cm.map[y] {
            self_writhe[cm.map[x]] += g.signum() as i64;
        }
        owner.swap(k, k + 1);
    }
    StrandTrace {
        tau: permutation(b),
        passage,
        bottom,
        self_writhe,
    }
}

/// Word transporting the stalk at strand τ(i) back to strand i, one per
/// strand. At the base strand it carries the framing correction m_b^{-w}.
pub fn segment_words(b: &BraidWord) -> Vec<MeridianWord> {
    let cm = cycle_labels(b);
    let st = strand_trace(b);
    (0..b.n)
        .map(|i| {
            let s = cm.map[i];
            if cm.base_strand[s] == i {
                MeridianWord::gen_pow(i, -st.self_writhe[s]).mul(&st.passage[i])
            } else {
                st.passage[i].clone()
            }
        })
        .collect()
}

/// Zero-framed longitude of component s, based at its base strand just
/// below the disk.
pub fn longitude_word(b: &BraidWord, s: usize) -> MeridianWord {
    let cm = cycle_labels(b);
    let st = strand_trace(b);
    let base = cm.base_strand[s];
    let mut w = MeridianWord::empty();
    let mut i = base;
    loop {
        w = w.mul(&st.passage[i]);
        i = st.tau[i];
        if i == base {
            break;
        }
    }
    w.mul(&MeridianWord::gen_pow(base, -st.self_writhe[s]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn br(n: usize, w: &[i32]) -> BraidWord {
        BraidWord::new(n, w.to_vec()).unwrap()
    }

    fn word(letters: &[(usize, i8)]) -> MeridianWord {
        MeridianWord {
            letters: letters.to_vec(),
        }
    }

    #[test]
    fn letters_are_range_checked() {
        assert!(BraidWord::new(2, vec![2]).is_err());
        assert!(BraidWord::new(2, vec![0]).is_err());
        assert!(BraidWord::new(0, vec![]).is_err());
        assert_eq!(BraidWord::parse("1, -2 1", 3).unwrap().word, vec![1, -2, 1]);
        assert_eq!(BraidWord::parse("", 3).unwrap().word, Vec::<i32>::new());
        assert!(BraidWord::parse("1 x", 3).is_err());
    }

    #[test]
    fn permutations() {
        assert_eq!(permutation(&br(2, &[1, 1])), vec![0, 1]);
        assert_eq!(permutation(&br(2, &[1, 1, 1])), vec![1, 0]);
        assert_eq!(permutation(&br(3, &[])), vec![0, 1, 2]);
    }

    #[test]
    fn component_maps() {
        let u = component_map(&br(3, &[])).unwrap();
        assert_eq!((u.r, u.map.clone()), (3, vec![0, 1, 2]));
        let h = component_map(&br(2, &[1, 1])).unwrap();
        assert_eq!((h.r, h.map.clone()), (2, vec![0, 1]));
        let t = component_map(&br(2, &[1, 1, 1])).unwrap();
        assert_eq!(
            (t.r, t.map.clone(), t.base_strand.clone()),
            (1, vec![0, 0], vec![0])
        );
        // strands 1 and 3 share a cycle, strand 2 is alone
        assert!(matches!(
            component_map(&br(3, &[1, 2, 1])),
            Err(Error::NonMonotoneComponents(_))
        ));
    }

    #[test]
    fn monotonize_conjugates() {
        let b = br(3, &[1, 2, 1]);
        let m = monotonize(&b);
        let cm = component_map(&m.braid).unwrap();
        assert_eq!(cm.r, 2);
        assert!(cm.map.windows(2).all(|w| w[0] <= w[1]));
        let expect = m.conjugator.inverse().concat(&b).concat(&m.conjugator);
        assert_eq!(m.braid, expect);
        let fixed = br(2, &[1, 1]);
        assert_eq!(monotonize(&fixed).braid, fixed);
    }

    #[test]
    fn artin_generator_images() {
        let b = br(2, &[1]);
        assert_eq!(
            artin_action(&b, &MeridianWord::gen(0)),
            word(&[(0, 1), (1, 1), (0, -1)])
        );
        assert_eq!(
            artin_action(&b, &MeridianWord::gen(1)),
            MeridianWord::gen(0)
        );
        let w = word(&[(0, 1), (1, -1), (1, -1)]);
        assert_eq!(artin_action(&br(2, &[1, -1]), &w), w);
    }

    #[test]
    fn hopf_relations_make_the_product_central() {
        let rel = wirtinger_relations(&br(2, &[1, 1]));
        let c = word(&[(0, 1), (1, 1)]);
        for (i, (m, img)) in rel.iter().enumerate() {
            assert_eq!(*m, MeridianWord::gen(i));
            assert_eq!(*img, m.conj_by(&c.inverse()));
        }
        for (m, img) in wirtinger_relations(&br(3, &[])) {
            assert_eq!(m, img);
        }
        let unknot = wirtinger_relations(&br(2, &[1]));
        assert_eq!(unknot[1].1, MeridianWord::gen(0));
    }

    #[test]
    fn longitudes() {
        for s in 0..3 {
            assert!(longitude_word(&br(3, &[]), s).is_empty());
        }
        assert_eq!(longitude_word(&br(2, &[1, 1]), 0), MeridianWord::gen(1));
        let l = longitude_word(&br(2, &[1, 1, 1]), 0);
        assert_eq!(l.abelianize(2).iter().sum::<i64>(), 0);
        assert!(!l.is_empty());
    }

    fn braid() -> impl Strategy<Value = BraidWord> {
        (1usize..5).prop_flat_map(|n| {
            let letter = if n == 1 {
                Just(0i32).boxed()
            } else {
                (1..n as i32, any::<bool>())
                    .prop_map(|(g, s)| if s { g } else { -g })
                    .boxed()
            };
            proptest::collection::vec(letter, 0..8).prop_map(move |w| BraidWord {
                n,
                word: w.into_iter().filter(|&g| g != 0).collect(),
            })
        })
    }

    fn meridian_word(n: usize) -> impl Strategy<Value = MeridianWord> {
        proptest::collection::vec((0..n, prop_oneof![Just(1i8), Just(-1i8)]), 0..6)
            .prop_map(|letters| MeridianWord { letters })
    }

    proptest! {
        #[test]
        fn inverse_braid_undoes_action(b in braid(), seed in meridian_word(4)) {
            let w = MeridianWord {
                letters: seed.letters.into_iter().filter(|&(t, _)| t < b.n).collect(),
            };
            let back = artin_action(&b.inverse(), &artin_action(&b, &w));
            prop_assert_eq!(back, w.reduced());
        }

        #[test]
        fn permutation_of_product(a in braid(), c in braid()) {
            let c = BraidWord {
                n: a.n,
                word: c.word.into_iter().filter(|g| (g.unsigned_abs() as usize) < a.n).collect(),
            };
            let ta = permutation(&a);
            let tc = permutation(&c);
            let tac = permutation(&a.concat(&c));
            for i in 0..a.n {
                prop_assert_eq!(tac[i], tc[ta[i]]);
            }
        }

        #[test]
        fn longitudes_are_zero_framed(b in braid()) {
            let cm = cycle_labels(&b);
            for s in 0..cm.r {
                let ab = longitude_word(&b, s).abelianize(b.n);
                let own: i64 = cm.strands_of(s).iter().map(|&i| ab[i]).sum();
                prop_assert_eq!(own, 0);
            }
        }

        #[test]
        fn monotonized_labels(b in braid()) {
            let m = monotonize(&b);
            prop_assert!(component_map(&m.braid).is_ok());
            prop_assert_eq!(cycle_labels(&m.braid).r, cycle_labels(&b).r);
        }
    }
}
