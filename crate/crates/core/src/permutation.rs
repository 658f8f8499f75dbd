//! Permutations in one-line notation, the statistics that weight them, and
//! the prefix structure the interviewer observes.
//!
//! Values are 1-based and rank `N` is the best candidate.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PermutationError {
    #[error("a permutation must have at least one entry")]
    Empty,
    #[error("{0:?} is not a permutation of 1..{len}", len = .0.len())]
    NotAPermutation(Vec<usize>),
    #[error("cannot parse {0:?} as a permutation")]
    Parse(String),
    #[error("prefix length {len} out of range for a permutation of size {size}")]
    PrefixOutOfRange { len: usize, size: usize },
    #[error("the first {k} entries of {pi} are not increasing")]
    PrefixNotIncreasing { k: usize, pi: Permutation },
    #[error("unknown statistic {0:?} (expected lrmax, inversions or 321)")]
    UnknownStatistic(String),
}

/// A word containing each of `1..=m` exactly once, `m ≥ 1`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    word: Vec<usize>,
}

impl Permutation {
    pub fn new(word: Vec<usize>) -> Result<Self, PermutationError> {
        if word.is_empty() {
            return Err(PermutationError::Empty);
        }
        let mut seen = vec![false; word.len()];
        for &v in &word {
            if v == 0 || v > word.len() || std::mem::replace(&mut seen[v - 1], true) {
                return Err(PermutationError::NotAPermutation(word));
            }
        }
        Ok(Permutation { word })
    }

    pub fn identity(m: usize) -> Self {
        assert!(m >= 1, "identity of size 0");
        Permutation {
            word: (1..=m).collect(),
        }
    }

    /// The permutation order-isomorphic to a sequence of distinct values.
    pub fn flatten(values: &[usize]) -> Result<Self, PermutationError> {
        if values.is_empty() {
            return Err(PermutationError::Empty);
        }
        let mut order: Vec<usize> = (0..values.len()).collect();
        order.sort_by_key(|&i| values[i]);
        if order.windows(2).any(|w| values[w[0]] == values[w[1]]) {
            return Err(PermutationError::NotAPermutation(values.to_vec()));
        }
        let mut word = vec![0; values.len()];
        for (rank, &i) in order.iter().enumerate() {
            word[i] = rank + 1;
        }
        Ok(Permutation { word })
    }

    pub fn size(&self) -> usize {
        self.word.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.word
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.word
    }

    /// Entry at 1-based position `pos`.
    pub fn at(&self, pos: usize) -> usize {
        self.word[pos - 1]
    }

    pub fn last(&self) -> usize {
        *self.word.last().expect("nonempty")
    }

    /// 1-based position holding `value`.
    pub fn position_of(&self, value: usize) -> Option<usize> {
        self.word.iter().position(|&v| v == value).map(|i| i + 1)
    }

    pub fn is_identity(&self) -> bool {
        self.word.iter().enumerate().all(|(i, &v)| v == i + 1)
    }

    /// Number of entries larger than everything to their left.
    pub fn lr_maxima(&self) -> usize {
        let mut best = 0;
        let mut count = 0;
        for &v in &self.word {
            if v > best {
                best = v;
                count += 1;
            }
        }
        count
    }

    /// Number of pairs `i < j` with `π_i > π_j`, by merge sort.
    pub fn inversions(&self) -> usize {
        fn sort_count(v: &mut [usize], buf: &mut Vec<usize>) -> usize {
            let n = v.len();
            if n < 2 {
                return 0;
            }
            let mid = n / 2;
            let mut count = sort_count(&mut v[..mid], buf) + sort_count(&mut v[mid..], buf);
            buf.clear();
            let (mut i, mut j) = (0, mid);
            while i < mid && j < n {
                if v[i] <= v[j] {
                    buf.push(v[i]);
                    i += 1;
                } else {
                    buf.push(v[j]);
                    count += mid - i;
                    j += 1;
                }
            }
            buf.extend_from_slice(&v[i..mid]);
            buf.extend_from_slice(&v[j..n]);
            v.copy_from_slice(buf);
            count
        }
        let mut v = self.word.clone();
        let mut buf = Vec::with_capacity(v.len());
        sort_count(&mut v, &mut buf)
    }

    /// Number of index triples `i < j < k` with `π_i > π_j > π_k`.
    pub fn count_321(&self) -> usize {
        let w = &self.word;
        (0..w.len())
            .map(|j| {
                let above = w[..j].iter().filter(|&&x| x > w[j]).count();
                let below = w[j + 1..].iter().filter(|&&x| x < w[j]).count();
                above * below
            })
            .sum()
    }

    /// The size-`i` permutation with the same relative order as `π_1..π_i`.
    pub fn prefix_flatten(&self, i: usize) -> Result<Permutation, PermutationError> {
        if i == 0 || i > self.size() {
            return Err(PermutationError::PrefixOutOfRange {
                len: i,
                size: self.size(),
            });
        }
        Ok(Permutation::flatten(&self.word[..i]).expect("distinct entries"))
    }

    /// Ends in a left-to-right maximum, or is a complete game of size `n`.
    pub fn is_eligible(&self, n: usize) -> bool {
        self.last() == self.size() || self.size() == n
    }

    /// Some prefix flattening of `self` equals `p`.
    pub fn is_prefixed_by(&self, p: &Permutation) -> bool {
        p.size() <= self.size() && self.prefix_flatten(p.size()).is_ok_and(|f| &f == p)
    }

    /// Accepting prefix `p` wins: `self` is `p`-prefixed and holds its maximum
    /// at position `size(p)`.
    pub fn is_winnable_at(&self, p: &Permutation) -> bool {
        self.is_prefixed_by(p) && self.at(p.size()) == self.size()
    }

    /// Whether rejecting the first `k` candidates and accepting the next
    /// left-to-right maximum picks the best one.
    pub fn is_k_winnable(&self, k: usize) -> bool {
        let n = self.size();
        if k >= n {
            return false;
        }
        let best_seen = self.word[..k].iter().copied().max().unwrap_or(0);
        self.word[k..]
            .iter()
            .find(|&&v| v > best_seen)
            .is_some_and(|&v| v == n)
    }

    /// The prefix action σ_q: rearranges the (increasing) first `size(q)`
    /// entries into relative order `q` and fixes the rest.
    pub fn sigma_apply(&self, q: &Permutation) -> Result<Permutation, PermutationError> {
        let k = q.size();
        if k > self.size() {
            return Err(PermutationError::PrefixOutOfRange {
                len: k,
                size: self.size(),
            });
        }
        if !self.word[..k].windows(2).all(|w| w[0] < w[1]) {
            return Err(PermutationError::PrefixNotIncreasing {
                k,
                pi: self.clone(),
            });
        }
        let mut word = self.word.clone();
        for (slot, &r) in word[..k].iter_mut().zip(q.as_slice()) {
            *slot = self.word[r - 1];
        }
        Ok(Permutation { word })
    }

    /// Every child of this prefix in the prefix tree, i.e. each way of
    /// appending one more relative rank. The child whose new entry has
    /// relative rank `v` is at index `v - 1`.
    pub fn children(&self) -> Vec<Permutation> {
        (1..=self.size() + 1)
            .map(|v| self.extend_with_rank(v))
            .collect()
    }

    /// Appends an entry of relative rank `v` (1-based) among `size + 1`.
    pub fn extend_with_rank(&self, v: usize) -> Permutation {
        let mut word: Vec<usize> = self
            .word
            .iter()
            .map(|&x| if x >= v { x + 1 } else { x })
            .collect();
        word.push(v);
        Permutation { word }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{self}]")
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.word {
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = PermutationError;

    /// Whitespace- or comma-separated one-line notation, e.g. `"2 5 1 6 3 7 4"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let word = s
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .map(|t| t.parse::<usize>())
            .collect::<Result<Vec<_>, _>>()
            .map_err(|_| PermutationError::Parse(s.to_string()))?;
        Permutation::new(word)
    }
}

impl Serialize for Permutation {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Permutation {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Lexicographic successor in place; `false` once the last permutation is
/// reached.
fn next_permutation(w: &mut [usize]) -> bool {
    let Some(i) = w.windows(2).rposition(|p| p[0] < p[1]) else {
        return false;
    };
    let j = w
        .iter()
        .rposition(|&x| x > w[i])
        .expect("pivot has a successor");
    w.swap(i, j);
    w[i + 1..].reverse();
    true
}

/// All of S_m in lexicographic order.
pub struct SymmetricGroup {
    next: Option<Vec<usize>>,
}

impl SymmetricGroup {
    pub fn new(m: usize) -> Self {
        assert!(m >= 1, "S_0 is not enumerated");
        SymmetricGroup {
            next: Some((1..=m).collect()),
        }
    }
}

impl Iterator for SymmetricGroup {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        let current = self.next.take()?;
        let mut succ = current.clone();
        if next_permutation(&mut succ) {
            self.next = Some(succ);
        }
        Some(Permutation { word: current })
    }
}

/// Every π ∈ S_m whose first `k` entries increase, i.e. the size-`m` layer of
/// the closed subtree under `12⋯k`.
pub fn increasing_prefix_layer(k: usize, m: usize) -> Vec<Permutation> {
    assert!(1 <= k && k <= m);
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(k);
    fn combos(
        start: usize,
        k: usize,
        m: usize,
        chosen: &mut Vec<usize>,
        out: &mut Vec<Permutation>,
    ) {
        if chosen.len() == k {
            let rest: Vec<usize> = (1..=m).filter(|v| !chosen.contains(v)).collect();
            if rest.is_empty() {
                out.push(Permutation {
                    word: chosen.clone(),
                });
                return;
            }
            for tail in SymmetricGroup::new(rest.len()) {
                let mut word = chosen.clone();
                word.extend(tail.as_slice().iter().map(|&t| rest[t - 1]));
                out.push(Permutation { word });
            }
            return;
        }
        for v in start..=m {
            chosen.push(v);
            combos(v + 1, k, m, chosen, out);
            chosen.pop();
        }
    }
    combos(1, k, m, &mut chosen, &mut out);
    out
}

type Evaluator = Arc<dyn Fn(&Permutation) -> usize + Send + Sync>;

/// A permutation statistic `c`, used to weight π by θ^c(π).
#[derive(Clone)]
pub enum Statistic {
    LeftToRightMaxima,
    Inversions,
    Pattern321Count,
    Custom { name: String, eval: Evaluator },
}

impl Statistic {
    pub fn custom<F>(name: impl Into<String>, eval: F) -> Self
    where
        F: Fn(&Permutation) -> usize + Send + Sync + 'static,
    {
        Statistic::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn eval(&self, pi: &Permutation) -> usize {
        match self {
            Statistic::LeftToRightMaxima => pi.lr_maxima(),
            Statistic::Inversions => pi.inversions(),
            Statistic::Pattern321Count => pi.count_321(),
            Statistic::Custom { eval, .. } => eval(pi),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Statistic::LeftToRightMaxima => "lrmax",
            Statistic::Inversions => "inversions",
            Statistic::Pattern321Count => "321",
            Statistic::Custom { name, .. } => name,
        }
    }

    /// Statistics known to be prefix equivariant.
    pub fn is_known_equivariant(&self) -> bool {
        matches!(self, Statistic::LeftToRightMaxima | Statistic::Inversions)
    }
}

impl fmt::Debug for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Statistic({})", self.name())
    }
}

impl FromStr for Statistic {
    type Err = PermutationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "lrmax" | "lr-maxima" | "ewens" => Ok(Statistic::LeftToRightMaxima),
            "inversions" | "inv" | "mallows" => Ok(Statistic::Inversions),
            "321" | "pattern321" => Ok(Statistic::Pattern321Count),
            _ => Err(PermutationError::UnknownStatistic(s.to_string())),
        }
    }
}

/// A pair `(q, π)` breaking `c(π) − c(σ_q·π) = c(12⋯k) − c(q)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivarianceViolation {
    pub q: Permutation,
    pub pi: Permutation,
    pub image: Permutation,
    /// `c(π) − c(σ_q·π)`
    pub observed: i64,
    /// `c(12⋯k) − c(q)`
    pub expected: i64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Equivariance {
    Holds { checked: u64 },
    Violated(EquivarianceViolation),
}

impl Equivariance {
    pub fn holds(&self) -> bool {
        matches!(self, Equivariance::Holds { .. })
    }
}

/// Tests one pair; `None` when the identity holds.
pub fn equivariance_defect(
    c: &Statistic,
    q: &Permutation,
    pi: &Permutation,
) -> Result<Option<EquivarianceViolation>, PermutationError> {
    let image = pi.sigma_apply(q)?;
    let observed = c.eval(pi) as i64 - c.eval(&image) as i64;
    let expected = c.eval(&Permutation::identity(q.size())) as i64 - c.eval(q) as i64;
    Ok((observed != expected).then(|| EquivarianceViolation {
        q: q.clone(),
        pi: pi.clone(),
        image,
        observed,
        expected,
    }))
}

/// Exhausts every prefix `q` of size `k ≤ n` and every π of size `k..=n`
/// with increasing first `k` entries. Returns the first violation in the
/// order (k, q lexicographic, size of π, π). Cost grows like `n · n!`.
pub fn check_prefix_equivariance(c: &Statistic, n: usize) -> Equivariance {
    let mut checked = 0u64;
    for k in 1..=n {
        let layers: Vec<Vec<Permutation>> =
            (k..=n).map(|m| increasing_prefix_layer(k, m)).collect();
        for q in SymmetricGroup::new(k) {
            for layer in &layers {
                for pi in layer {
                    checked += 1;
                    if let Some(v) = equivariance_defect(c, &q, pi).expect("increasing prefix") {
                        return Equivariance::Violated(v);
                    }
                }
            }
        }
    }
    Equivariance::Holds { checked }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> Permutation {
        s.parse().unwrap()
    }

    fn brute_inversions(w: &[usize]) -> usize {
        let mut c = 0;
        for i in 0..w.len() {
            for j in i + 1..w.len() {
                c += usize::from(w[i] > w[j]);
            }
        }
        c
    }

    #[test]
    fn construction_and_parsing() {
        assert_eq!(p("2 5 1 6 3 7 4").as_slice(), &[2, 5, 1, 6, 3, 7, 4]);
        assert_eq!(p("2,3, 1"), Permutation::new(vec![2, 3, 1]).unwrap());
        assert!(Permutation::new(vec![2, 5, 1]).is_err());
        assert!(matches!(
            "1 1".parse::<Permutation>(),
            Err(PermutationError::NotAPermutation(_))
        ));
        assert_eq!("".parse::<Permutation>(), Err(PermutationError::Empty));
        assert!(matches!(
            "1 x".parse::<Permutation>(),
            Err(PermutationError::Parse(_))
        ));
        assert_eq!(p("3, 1,2").to_string(), "3 1 2");
    }

    #[test]
    fn left_to_right_maxima() {
        assert_eq!(p("1 2 3 4").lr_maxima(), 4);
        assert_eq!(p("2 5 1 6 3 7 4").lr_maxima(), 4);
        assert_eq!(p("4 3 2 1").lr_maxima(), 1);
    }

    #[test]
    fn inversion_counts() {
        assert_eq!(p("1 2 3").inversions(), 0);
        for m in 1..9 {
            let rev = Permutation::new((1..=m).rev().collect()).unwrap();
            assert_eq!(rev.inversions(), m * (m - 1) / 2);
        }
        for pi in SymmetricGroup::new(6) {
            assert_eq!(pi.inversions(), brute_inversions(pi.as_slice()));
        }
    }

    #[test]
    fn pattern_321() {
        assert_eq!(p("2 4 6 8 1 3 5 7").count_321(), 0);
        assert_eq!(p("4 2 6 8 1 3 5 7").count_321(), 1);
        assert_eq!(p("3 2 1").count_321(), 1);
        assert_eq!(p("4 3 2 1").count_321(), 4);
    }

    #[test]
    fn flattenings_of_running_example() {
        let pi = p("2 5 1 6 3 7 4");
        let seen: Vec<String> = (1..=7)
            .map(|i| {
                pi.prefix_flatten(i)
                    .unwrap()
                    .as_slice()
                    .iter()
                    .map(|v| v.to_string())
                    .collect()
            })
            .collect();
        assert_eq!(
            seen,
            ["1", "12", "231", "2314", "24153", "241536", "2516374"]
        );
        assert_eq!(pi.prefix_flatten(7).unwrap(), pi);
        assert_eq!(pi.prefix_flatten(1).unwrap(), p("1"));
        assert_eq!(
            pi.prefix_flatten(0),
            Err(PermutationError::PrefixOutOfRange { len: 0, size: 7 })
        );
        assert!(pi.prefix_flatten(8).is_err());
    }

    #[test]
    fn eligibility() {
        assert!(p("1 2").is_eligible(4));
        assert!(!p("2 1").is_eligible(4));
        assert!(p("4 1 3 2").is_eligible(4));
    }

    #[test]
    fn prefixed_and_winnable() {
        let pi = p("2 5 1 6 3 7 4");
        assert!(pi.is_prefixed_by(&p("2 3 1")));
        assert!(!pi.is_prefixed_by(&p("1 2 3")));
        assert!(pi.is_winnable_at(&p("2 4 1 5 3 6")));
        assert!(!pi.is_winnable_at(&p("2 3 1 4")));
        let wins = SymmetricGroup::new(4)
            .filter(|pi| pi.is_winnable_at(&p("1 2 3")))
            .count();
        let prefixed = SymmetricGroup::new(4)
            .filter(|pi| pi.is_prefixed_by(&p("1 2 3")))
            .count();
        assert_eq!((wins, prefixed), (3, 4));
    }

    #[test]
    fn positional_winnability() {
        for n in 1..=6 {
            let fact: usize = (1..n).product();
            let w0 = SymmetricGroup::new(n)
                .filter(|pi| pi.is_k_winnable(0))
                .count();
            assert_eq!(w0, fact);
            assert_eq!(
                SymmetricGroup::new(n)
                    .filter(|pi| pi.is_k_winnable(n))
                    .count(),
                0
            );
        }
        assert_eq!(
            SymmetricGroup::new(4)
                .filter(|pi| pi.is_k_winnable(1))
                .count(),
            11
        );
        for pi in SymmetricGroup::new(6) {
            let pos_n = pi.position_of(6).unwrap();
            for k in 0..=6 {
                if pi.is_k_winnable(k) {
                    assert!(pos_n > k);
                }
            }
        }
    }

    #[test]
    fn prefix_action() {
        let pi = p("1 3 2 4");
        assert_eq!(pi.sigma_apply(&Permutation::identity(2)).unwrap(), pi);
        assert_eq!(pi.sigma_apply(&p("2 1")).unwrap(), p("3 1 2 4"));
        assert!(matches!(
            p("2 1 3").sigma_apply(&p("1 2")),
            Err(PermutationError::PrefixNotIncreasing { .. })
        ));
        assert!(p("1 2").sigma_apply(&p("1 2 3")).is_err());
    }

    #[test]
    fn prefix_action_is_a_bijection_onto_the_image_subtree() {
        let n = 6;
        for k in 1..=4 {
            for q in SymmetricGroup::new(k) {
                for m in k..=n {
                    let src = increasing_prefix_layer(k, m);
                    let mut img: Vec<Permutation> =
                        src.iter().map(|pi| pi.sigma_apply(&q).unwrap()).collect();
                    assert!(img
                        .iter()
                        .all(|x| x.size() == m && x.prefix_flatten(k).unwrap() == q));
                    img.sort();
                    img.dedup();
                    let target = SymmetricGroup::new(m)
                        .filter(|x| x.is_prefixed_by(&q))
                        .count();
                    assert_eq!(img.len(), src.len());
                    assert_eq!(img.len(), target);
                }
            }
        }
    }

    #[test]
    fn prefix_action_transports_winnability() {
        let n = 6;
        for k in 1..=3 {
            let layer = increasing_prefix_layer(k, n);
            for q in SymmetricGroup::new(k) {
                for size in k + 1..=n {
                    for p in increasing_prefix_layer(k, size) {
                        let sp = p.sigma_apply(&q).unwrap();
                        for pi in &layer {
                            let spi = pi.sigma_apply(&q).unwrap();
                            assert_eq!(pi.is_winnable_at(&p), spi.is_winnable_at(&sp));
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn layer_counts() {
        assert_eq!(increasing_prefix_layer(2, 4).len(), 12);
        assert_eq!(increasing_prefix_layer(3, 3), vec![p("1 2 3")]);
        assert!(increasing_prefix_layer(2, 5)
            .iter()
            .all(|pi| pi.at(1) < pi.at(2)));
    }

    #[test]
    fn enumeration_is_lexicographic_and_complete() {
        let all: Vec<Permutation> = SymmetricGroup::new(4).collect();
        assert_eq!(all.len(), 24);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(all[0], p("1 2 3 4"));
        assert_eq!(all[23], p("4 3 2 1"));
    }

    #[test]
    fn children_enumerate_relative_ranks() {
        let kids = p("2 1").children();
        assert_eq!(kids, vec![p("3 2 1"), p("3 1 2"), p("2 1 3")]);
    }

    #[test]
    fn equivariance_of_classical_statistics() {
        assert!(check_prefix_equivariance(&Statistic::LeftToRightMaxima, 6).holds());
        assert!(check_prefix_equivariance(&Statistic::Inversions, 6).holds());
    }

    #[test]
    fn pattern_321_is_not_equivariant() {
        let Equivariance::Violated(v) = check_prefix_equivariance(&Statistic::Pattern321Count, 8)
        else {
            panic!("321 counting should fail");
        };
        assert_ne!(v.observed, v.expected);
        assert_eq!(v.image, v.pi.sigma_apply(&v.q).unwrap());
        let classic = equivariance_defect(
            &Statistic::Pattern321Count,
            &p("2 1 3 4"),
            &p("2 4 6 8 1 3 5 7"),
        )
        .unwrap()
        .expect("violation");
        assert_eq!(classic.image, p("4 2 6 8 1 3 5 7"));
        assert_eq!((classic.observed, classic.expected), (-1, 0));
    }

    #[test]
    fn statistic_names_round_trip() {
        for s in ["lrmax", "inversions", "321"] {
            assert_eq!(s.parse::<Statistic>().unwrap().name(), s);
        }
        assert!("cycles".parse::<Statistic>().is_err());
        let c = Statistic::custom("first", |pi| pi.at(1));
        assert_eq!(c.eval(&p("3 1 2")), 3);
    }
}
