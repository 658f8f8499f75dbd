//! Backward induction over the prefix tree.
//!
//! Every node carries four weight sums over the completions below it, all on
//! the node's standard denominator:
//!
//! * `den`: every completion,
//! * `top`: completions where no later entry beats the current maximum,
//! * `open`: the best achievable win weight after rejecting the node,
//! * `closed`: the best of accepting (`top` if eligible, else 0) and `open`.
//!
//! Weights are scaled by `b^M` for θ = a/b and a bound `M` on the statistic,
//! so all sums are integers and shared denominators cancel on comparison.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::exactnum::{format_rational, BigRat, ExactError, ThetaPoly, WinFraction};
use crate::permutation::{Permutation, PermutationError, Statistic, SymmetricGroup};

/// Largest N solved by full tree traversal unless the caller raises it.
pub const DEFAULT_SOLVE_BUDGET: usize = 9;

/// Subtrees rooted at prefixes shorter than this are explored in parallel.
const PARALLEL_DEPTH: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SolverError {
    #[error("game size must be at least 1")]
    EmptyGame,
    #[error("θ must be positive")]
    NonPositiveTheta,
    #[error("N = {n} exceeds the enumeration budget of {budget}")]
    OverBudget { n: usize, budget: usize },
    #[error("prefix of size {size} does not fit a game of size {n}")]
    PrefixTooLong { size: usize, n: usize },
    #[error("k = {k} out of range for N = {n}")]
    KOutOfRange { n: usize, k: usize },
    #[error("statistic {0} is not known to be prefix equivariant")]
    NotEquivariant(String),
    #[error(transparent)]
    Permutation(#[from] PermutationError),
    #[error(transparent)]
    Exact(#[from] ExactError),
}

/// One weighted game: π ∈ S_N drawn with probability ∝ θ^c(π).
#[derive(Debug, Clone)]
pub struct GameSpec {
    pub n: usize,
    pub statistic: Statistic,
    pub theta: BigRat,
}

impl GameSpec {
    pub fn new(n: usize, statistic: Statistic, theta: BigRat) -> Result<Self, SolverError> {
        if n == 0 {
            return Err(SolverError::EmptyGame);
        }
        if !theta.is_positive() {
            return Err(SolverError::NonPositiveTheta);
        }
        Ok(GameSpec {
            n,
            statistic,
            theta,
        })
    }

    fn check_prefix(&self, p: &Permutation) -> Result<(), SolverError> {
        if p.size() > self.n {
            return Err(SolverError::PrefixTooLong {
                size: p.size(),
                n: self.n,
            });
        }
        Ok(())
    }
}

fn max_statistic(spec: &GameSpec) -> usize {
    let n = spec.n;
    match spec.statistic {
        Statistic::LeftToRightMaxima => n,
        Statistic::Inversions => n * (n - 1) / 2,
        Statistic::Pattern321Count => n * n.saturating_sub(1) * n.saturating_sub(2) / 6,
        Statistic::Custom { .. } => SymmetricGroup::new(n)
            .map(|pi| spec.statistic.eval(&pi))
            .max()
            .unwrap_or(0),
    }
}

/// `weight[c] = a^c · b^(M−c)`, i.e. θ^c scaled by `b^M`.
struct Weights {
    table: Vec<BigInt>,
    scale: BigInt,
}

impl Weights {
    fn new(spec: &GameSpec) -> Self {
        let max = max_statistic(spec);
        let a = spec.theta.numer();
        let b = spec.theta.denom();
        let mut a_pow = vec![BigInt::one()];
        let mut b_pow = vec![BigInt::one()];
        for i in 1..=max {
            a_pow.push(&a_pow[i - 1] * a);
            b_pow.push(&b_pow[i - 1] * b);
        }
        let table = (0..=max).map(|c| &a_pow[c] * &b_pow[max - c]).collect();
        Weights {
            table,
            scale: b_pow[max].clone(),
        }
    }

    fn of(&self, c: usize) -> &BigInt {
        &self.table[c]
    }

    fn to_rational(&self, x: &BigInt) -> BigRat {
        BigRat::new(x.clone(), self.scale.clone())
    }
}

#[derive(Debug, Clone, Default)]
struct Sums {
    den: BigInt,
    top: BigInt,
    open: BigInt,
    closed: BigInt,
}

impl Sums {
    /// Accept-now weight: `top` when the node ends in its maximum.
    fn strike(&self, p: &Permutation) -> BigInt {
        if p.last() == p.size() {
            self.top.clone()
        } else {
            BigInt::zero()
        }
    }
}

#[derive(Debug, Default)]
struct Record {
    strike: Vec<Permutation>,
    positivity: Vec<(Permutation, bool)>,
    ties: Vec<Permutation>,
}

struct Explorer<'a> {
    spec: &'a GameSpec,
    weights: Weights,
    record: bool,
}

impl Explorer<'_> {
    fn explore(&self, p: &Permutation) -> (Sums, Record) {
        let n = self.spec.n;
        let m = p.size();
        if m == n {
            let w = self.weights.of(self.spec.statistic.eval(p)).clone();
            let closed = if p.last() == n {
                w.clone()
            } else {
                BigInt::zero()
            };
            let record = if self.record {
                Record {
                    strike: vec![p.clone()],
                    ..Record::default()
                }
            } else {
                Record::default()
            };
            let sums = Sums {
                den: w.clone(),
                top: w,
                open: BigInt::zero(),
                closed,
            };
            return (sums, record);
        }
        let children: Vec<(Sums, Record)> = if m < PARALLEL_DEPTH {
            (1..=m + 1)
                .into_par_iter()
                .map(|v| self.explore(&p.extend_with_rank(v)))
                .collect()
        } else {
            (1..=m + 1)
                .map(|v| self.explore(&p.extend_with_rank(v)))
                .collect()
        };
        let mut sums = Sums::default();
        for (v, (child, _)) in (1..).zip(&children) {
            sums.den += &child.den;
            sums.open += &child.closed;
            if v <= m {
                sums.top += &child.top;
            }
        }
        let eligible = p.last() == m;
        let strike = sums.strike(p);
        let positive = eligible && strike >= sums.open;
        sums.closed = strike.clone().max(sums.open.clone());

        let mut record = Record::default();
        if self.record {
            if eligible {
                record.positivity.push((p.clone(), positive));
                if strike == sums.open {
                    record.ties.push(p.clone());
                }
            }
            if positive {
                record.strike.push(p.clone());
            }
            for (_, child) in children {
                if !positive {
                    record.strike.extend(child.strike);
                }
                record.positivity.extend(child.positivity);
                record.ties.extend(child.ties);
            }
        }
        (sums, record)
    }

    fn fraction(&self, num: &BigInt, den: &BigInt) -> WinFraction {
        WinFraction::exact(self.weights.to_rational(num), self.weights.to_rational(den))
            .expect("weights are positive")
    }
}

/// `S(p)`: win probability of accepting at `p`, over the standard denominator.
pub fn strike_probability(p: &Permutation, spec: &GameSpec) -> Result<WinFraction, SolverError> {
    spec.check_prefix(p)?;
    let ex = explorer(spec, false);
    let (sums, _) = ex.explore(p);
    Ok(ex.fraction(&sums.strike(p), &sums.den))
}

/// `S∘(p)`: best win probability after rejecting `p`.
pub fn open_probability(p: &Permutation, spec: &GameSpec) -> Result<WinFraction, SolverError> {
    spec.check_prefix(p)?;
    let ex = explorer(spec, false);
    let (sums, _) = ex.explore(p);
    Ok(ex.fraction(&sums.open, &sums.den))
}

/// `S̄(p) = max(S(p), S∘(p))`.
pub fn closed_probability(p: &Permutation, spec: &GameSpec) -> Result<WinFraction, SolverError> {
    spec.check_prefix(p)?;
    let ex = explorer(spec, false);
    let (sums, _) = ex.explore(p);
    Ok(ex.fraction(&sums.closed, &sums.den))
}

fn explorer(spec: &GameSpec, record: bool) -> Explorer<'_> {
    Explorer {
        spec,
        weights: Weights::new(spec),
        record,
    }
}

/// `S(p)` as a pair of θ-polynomials, from the completions of `p` in S_N.
pub fn strike_probability_symbolic(
    p: &Permutation,
    n: usize,
    statistic: &Statistic,
) -> Result<WinFraction, SolverError> {
    if p.size() > n {
        return Err(SolverError::PrefixTooLong { size: p.size(), n });
    }
    let mut num: Vec<u64> = Vec::new();
    let mut den: Vec<u64> = Vec::new();
    let eligible = p.last() == p.size() || p.size() == n;
    let pos = p.size();
    completions(p, n, &mut |pi| {
        let c = statistic.eval(pi);
        bump(&mut den, c);
        if eligible && pi.at(pos) == n {
            bump(&mut num, c);
        }
    });
    Ok(WinFraction::symbolic(
        counts_to_poly(&num),
        counts_to_poly(&den),
    )?)
}

fn bump(counts: &mut Vec<u64>, c: usize) {
    if counts.len() <= c {
        counts.resize(c + 1, 0);
    }
    counts[c] += 1;
}

fn counts_to_poly(counts: &[u64]) -> ThetaPoly {
    ThetaPoly::from_coeffs(
        counts
            .iter()
            .map(|&x| BigRat::from_integer(x.into()))
            .collect(),
    )
}

fn completions(p: &Permutation, n: usize, visit: &mut impl FnMut(&Permutation)) {
    if p.size() == n {
        visit(p);
        return;
    }
    for v in 1..=p.size() + 1 {
        completions(&p.extend_with_rank(v), n, visit);
    }
}

/// A strategy as a set of prefixes at which the interviewer accepts.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StrikeSet {
    /// Sorted by size, then lexicographically.
    prefixes: Vec<Permutation>,
}

/// The first validity clause that fails.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrikeSetViolation {
    #[error("{0} is not eligible")]
    Ineligible(Permutation),
    #[error("{shorter} is a prefix of {longer}")]
    NotAntichain {
        shorter: Permutation,
        longer: Permutation,
    },
    #[error("{0} contains no element as a prefix")]
    Uncovered(Permutation),
    #[error("{0} is longer than the game")]
    TooLong(Permutation),
}

impl StrikeSet {
    pub fn new(prefixes: impl IntoIterator<Item = Permutation>) -> Self {
        let mut prefixes: Vec<Permutation> = prefixes.into_iter().collect();
        prefixes.sort_by(|a, b| a.size().cmp(&b.size()).then_with(|| a.cmp(b)));
        prefixes.dedup();
        StrikeSet { prefixes }
    }

    pub fn prefixes(&self) -> &[Permutation] {
        &self.prefixes
    }

    pub fn len(&self) -> usize {
        self.prefixes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prefixes.is_empty()
    }

    pub fn contains(&self, p: &Permutation) -> bool {
        self.prefixes
            .binary_search_by(|x| x.size().cmp(&p.size()).then_with(|| x.cmp(p)))
            .is_ok()
    }

    /// Checks eligibility, the antichain property and coverage of S_N.
    pub fn validate(&self, n: usize) -> Result<(), StrikeSetViolation> {
        for p in &self.prefixes {
            if p.size() > n {
                return Err(StrikeSetViolation::TooLong(p.clone()));
            }
            if !p.is_eligible(n) {
                return Err(StrikeSetViolation::Ineligible(p.clone()));
            }
        }
        for p in &self.prefixes {
            for i in 1..p.size() {
                let shorter = p.prefix_flatten(i).expect("i < size");
                if self.contains(&shorter) {
                    return Err(StrikeSetViolation::NotAntichain {
                        shorter,
                        longer: p.clone(),
                    });
                }
            }
        }
        self.first_uncovered(&Permutation::identity(1), n)
            .map_or(Ok(()), |p| Err(StrikeSetViolation::Uncovered(p)))
    }

    fn first_uncovered(&self, p: &Permutation, n: usize) -> Option<Permutation> {
        if self.contains(p) {
            return None;
        }
        if p.size() == n {
            return Some(p.clone());
        }
        (1..=p.size() + 1).find_map(|v| self.first_uncovered(&p.extend_with_rank(v), n))
    }

    /// 1-based position at which the strategy accepts π, if any.
    pub fn accept_position(&self, pi: &Permutation) -> Option<usize> {
        (1..=pi.size()).find(|&i| self.contains(&pi.prefix_flatten(i).expect("in range")))
    }

    /// Accepting at the first struck prefix picks the maximum.
    pub fn wins(&self, pi: &Permutation) -> bool {
        self.accept_position(pi)
            .is_some_and(|i| pi.at(i) == pi.size())
    }
}

/// The strike set of "reject the first k, accept the next left-to-right
/// maximum": prefixes longer than `k` whose first maximum after position `k`
/// is their last entry, plus the complete games that never see one.
pub fn positional_strike_set(n: usize, k: usize) -> Result<StrikeSet, SolverError> {
    if n == 0 {
        return Err(SolverError::EmptyGame);
    }
    if k >= n {
        return Err(SolverError::KOutOfRange { n, k });
    }
    let mut out = Vec::new();
    collect_positional(&Permutation::identity(1), n, k, &mut out);
    Ok(StrikeSet::new(out))
}

fn collect_positional(p: &Permutation, n: usize, k: usize, out: &mut Vec<Permutation>) {
    let m = p.size();
    if m > k && (p.last() == m || m == n) {
        out.push(p.clone());
        return;
    }
    for v in 1..=m + 1 {
        collect_positional(&p.extend_with_rank(v), n, k, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveMode {
    /// Visit every prefix.
    Exhaustive,
    /// Follow the increasing prefixes only; valid for prefix equivariant
    /// statistics, where every other eligible prefix shares the value of the
    /// increasing prefix of its size.
    Equivariant,
}

#[derive(Debug, Clone, Copy)]
pub struct SolveOptions {
    /// `None` picks `Equivariant` for known equivariant statistics.
    pub mode: Option<SolveMode>,
    pub budget: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            mode: None,
            budget: DEFAULT_SOLVE_BUDGET,
        }
    }
}

impl SolveOptions {
    pub fn exhaustive() -> Self {
        SolveOptions {
            mode: Some(SolveMode::Exhaustive),
            ..Self::default()
        }
    }

    pub fn equivariant() -> Self {
        SolveOptions {
            mode: Some(SolveMode::Equivariant),
            ..Self::default()
        }
    }

    pub fn with_budget(self, budget: usize) -> Self {
        SolveOptions { budget, ..self }
    }
}

#[derive(Debug, Clone)]
pub struct SolveResult {
    pub n: usize,
    pub statistic: String,
    pub theta: BigRat,
    pub mode: SolveMode,
    /// Denominator is Σ_{π ∈ S_N} θ^c(π).
    pub optimal_win: WinFraction,
    pub strike_set: StrikeSet,
    /// Eligible prefixes shorter than N; complete games are always positive.
    /// In equivariant mode only the increasing prefixes are listed.
    pub positivity: BTreeMap<Permutation, bool>,
    pub positional_k: Option<usize>,
    /// Eligible prefixes shorter than N with `S(p) = S∘(p)`.
    pub ties: Vec<Permutation>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SolveSummary {
    #[serde(rename = "N")]
    pub n: usize,
    pub statistic: String,
    pub theta: String,
    pub optimal: String,
    pub positional_k: Option<usize>,
    pub strike_set: Vec<String>,
    pub mode: SolveMode,
    pub ties: usize,
}

impl SolveResult {
    pub fn optimal(&self) -> BigRat {
        self.optimal_win
            .to_reduced_rational()
            .expect("solver produces exact fractions")
    }

    pub fn summary(&self) -> SolveSummary {
        SolveSummary {
            n: self.n,
            statistic: self.statistic.clone(),
            theta: format_rational(&self.theta),
            optimal: format_rational(&self.optimal()),
            positional_k: self.positional_k,
            strike_set: self
                .strike_set
                .prefixes()
                .iter()
                .map(|p| p.to_string())
                .collect(),
            mode: self.mode,
            ties: self.ties.len(),
        }
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self.summary()).expect("plain data")
    }
}

/// The smallest k whose positional strike set equals `set`.
fn detect_positional(set: &StrikeSet, n: usize) -> Option<usize> {
    let k = set.prefixes().first()?.size() - 1;
    (positional_strike_set(n, k).ok()? == *set).then_some(k)
}

pub fn solve(spec: &GameSpec) -> Result<SolveResult, SolverError> {
    solve_with(spec, SolveOptions::default())
}

pub fn solve_with(spec: &GameSpec, options: SolveOptions) -> Result<SolveResult, SolverError> {
    if spec.n > options.budget {
        return Err(SolverError::OverBudget {
            n: spec.n,
            budget: options.budget,
        });
    }
    let mode = options
        .mode
        .unwrap_or(if spec.statistic.is_known_equivariant() {
            SolveMode::Equivariant
        } else {
            SolveMode::Exhaustive
        });
    match mode {
        SolveMode::Exhaustive => solve_exhaustive(spec),
        SolveMode::Equivariant => solve_equivariant(spec),
    }
}

fn solve_exhaustive(spec: &GameSpec) -> Result<SolveResult, SolverError> {
    let ex = explorer(spec, true);
    let root = Permutation::identity(1);
    let (sums, record) = ex.explore(&root);
    let strike_set = StrikeSet::new(record.strike);
    let positional_k = detect_positional(&strike_set, spec.n);
    Ok(SolveResult {
        n: spec.n,
        statistic: spec.statistic.name().to_string(),
        theta: spec.theta.clone(),
        mode: SolveMode::Exhaustive,
        optimal_win: ex.fraction(&sums.closed, &sums.den),
        strike_set,
        positivity: record.positivity.into_iter().collect(),
        positional_k,
        ties: record.ties,
    })
}

/// Sums for `12⋯k` on its own denominator, for `k = 1..=N` (index `k − 1`).
#[derive(Debug, Clone)]
struct ChainNode {
    den: BigRat,
    strike: BigRat,
    open: BigRat,
    closed: BigRat,
}

/// Climbs from `12⋯N` to `1`. With `q = 12⋯k` and `p = 12⋯(k−1)`, the other
/// children `r` of `p` carry copies of the subtree below `q` scaled by
/// `θ^(c(r) − c(q))`; writing `R` for the sum of those factors,
/// `S(p) = S(q)·R`, `S∘(p) = S̄(q) + S∘(q)·R` and `den(p) = den(q)·(1 + R)`.
fn increasing_chain(spec: &GameSpec) -> Vec<ChainNode> {
    let n = spec.n;
    let c = &spec.statistic;
    let theta_pow = |e: i64| -> BigRat {
        if e >= 0 {
            num_traits::pow(spec.theta.clone(), e as usize)
        } else {
            num_traits::pow(spec.theta.recip(), (-e) as usize)
        }
    };
    let w = theta_pow(c.eval(&Permutation::identity(n)) as i64);
    let mut chain = vec![ChainNode {
        den: w.clone(),
        strike: w.clone(),
        open: BigRat::zero(),
        closed: w,
    }];
    for k in (2..=n).rev() {
        let q = chain.last().expect("nonempty");
        let p = Permutation::identity(k - 1);
        let cq = c.eval(&Permutation::identity(k)) as i64;
        let r_sum: BigRat = (1..k)
            .map(|v| theta_pow(c.eval(&p.extend_with_rank(v)) as i64 - cq))
            .sum();
        let strike = &q.strike * &r_sum;
        let open = &q.closed + &q.open * &r_sum;
        let closed = strike.clone().max(open.clone());
        let den = &q.den * (BigRat::one() + &r_sum);
        chain.push(ChainNode {
            den,
            strike,
            open,
            closed,
        });
    }
    chain.reverse();
    chain
}

fn solve_equivariant(spec: &GameSpec) -> Result<SolveResult, SolverError> {
    if !spec.statistic.is_known_equivariant() {
        return Err(SolverError::NotEquivariant(
            spec.statistic.name().to_string(),
        ));
    }
    let n = spec.n;
    let chain = increasing_chain(spec);
    let positive: Vec<bool> = chain.iter().map(|x| x.strike >= x.open).collect();
    // positive sizes form a final segment
    let first_positive = positive.iter().position(|&b| b).expect("12⋯N is positive");
    let k = first_positive;
    let mut positivity = BTreeMap::new();
    let mut ties = Vec::new();
    for (i, node) in chain.iter().enumerate().take(n - 1) {
        let p = Permutation::identity(i + 1);
        if node.strike == node.open {
            ties.push(p.clone());
        }
        positivity.insert(p, positive[i]);
    }
    let root = &chain[0];
    Ok(SolveResult {
        n,
        statistic: spec.statistic.name().to_string(),
        theta: spec.theta.clone(),
        mode: SolveMode::Equivariant,
        optimal_win: WinFraction::exact(root.closed.clone(), root.den.clone())?,
        strike_set: positional_strike_set(n, k)?,
        positivity,
        positional_k: Some(k),
        ties,
    })
}

/// Exact win probability of the positional strategy `k` by enumeration of S_N.
pub fn positional_win(spec: &GameSpec, k: usize) -> Result<WinFraction, SolverError> {
    positional_wins(spec)?
        .into_iter()
        .nth(k)
        .ok_or(SolverError::KOutOfRange { n: spec.n, k })
}

/// [`positional_win`] for every `k = 0..N−1` in one pass over S_N.
pub fn positional_wins(spec: &GameSpec) -> Result<Vec<WinFraction>, SolverError> {
    let n = spec.n;
    let weights = Weights::new(spec);
    let mut won = vec![BigInt::zero(); n];
    let mut total = BigInt::zero();
    for pi in SymmetricGroup::new(n) {
        let w = weights.of(spec.statistic.eval(&pi));
        total += w;
        // π is k-winnable exactly for the k in [position of the last
        // left-to-right maximum before N, position of N).
        let pos_n = pi.position_of(n).expect("contains N");
        let before = pi.as_slice()[..pos_n - 1].iter().copied().max();
        let lo = before.map_or(0, |b| pi.position_of(b).expect("present"));
        for slot in &mut won[lo..pos_n] {
            *slot += w;
        }
    }
    Ok(won
        .iter()
        .map(|x| weights_fraction(&weights, x, &total))
        .collect())
}

fn weights_fraction(weights: &Weights, num: &BigInt, den: &BigInt) -> WinFraction {
    WinFraction::exact(weights.to_rational(num), weights.to_rational(den)).expect("positive")
}

#[derive(Debug, Clone, Serialize)]
pub struct PositionalityReport {
    #[serde(rename = "N")]
    pub n: usize,
    pub statistic: String,
    #[serde(with = "crate::exactnum::rational_string")]
    pub theta: BigRat,
    #[serde(with = "crate::exactnum::rational_string")]
    pub tree_optimum: BigRat,
    #[serde(with = "crate::exactnum::rational_string")]
    pub best_positional: BigRat,
    /// Smallest k attaining `best_positional`.
    pub best_k: usize,
    /// k such that the optimal strike set is the positional one.
    pub strike_set_k: Option<usize>,
    pub ties: usize,
}

impl PositionalityReport {
    pub fn values_agree(&self) -> bool {
        self.tree_optimum == self.best_positional
    }

    /// The optimal value is positional and the optimal strike set is one.
    pub fn is_positional(&self) -> bool {
        self.values_agree() && self.strike_set_k.is_some()
    }
}

/// Compares a full tree solve with every positional strategy.
pub fn verify_positionality(spec: &GameSpec) -> Result<PositionalityReport, SolverError> {
    verify_positionality_with(spec, DEFAULT_SOLVE_BUDGET)
}

pub fn verify_positionality_with(
    spec: &GameSpec,
    budget: usize,
) -> Result<PositionalityReport, SolverError> {
    let solved = solve_with(spec, SolveOptions::exhaustive().with_budget(budget))?;
    let wins = positional_wins(spec)?
        .iter()
        .map(WinFraction::to_reduced_rational)
        .collect::<Result<Vec<_>, _>>()?;
    let mut best_k = 0;
    for (k, w) in wins.iter().enumerate() {
        if w > &wins[best_k] {
            best_k = k;
        }
    }
    Ok(PositionalityReport {
        n: spec.n,
        statistic: solved.statistic.clone(),
        theta: spec.theta.clone(),
        tree_optimum: solved.optimal(),
        best_positional: wins[best_k].clone(),
        best_k,
        strike_set_k: solved.positional_k,
        ties: solved.ties.len(),
    })
}

/// Reduced `S`, `S∘`, `S̄` of one prefix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeValues {
    pub strike: BigRat,
    pub open: BigRat,
    pub closed: BigRat,
    pub eligible: bool,
    /// `S ≥ S∘`, for eligible prefixes.
    pub positive: bool,
}

/// Every prefix of the game with its values. Size grows like `e·N!`.
pub fn node_table(spec: &GameSpec) -> BTreeMap<Permutation, NodeValues> {
    let ex = explorer(spec, false);
    let mut table = BTreeMap::new();
    fill_table(&ex, &Permutation::identity(1), &mut table);
    table
}

fn fill_table(
    ex: &Explorer<'_>,
    p: &Permutation,
    table: &mut BTreeMap<Permutation, NodeValues>,
) -> Sums {
    let n = ex.spec.n;
    let m = p.size();
    let sums = if m == n {
        ex.explore(p).0
    } else {
        let mut sums = Sums::default();
        for v in 1..=m + 1 {
            let child = fill_table(ex, &p.extend_with_rank(v), table);
            sums.den += &child.den;
            sums.open += &child.closed;
            if v <= m {
                sums.top += &child.top;
            }
        }
        sums.closed = sums.strike(p).max(sums.open.clone());
        sums
    };
    let strike = sums.strike(p);
    let eligible = p.is_eligible(n);
    table.insert(
        p.clone(),
        NodeValues {
            strike: BigRat::new(strike.clone(), sums.den.clone()),
            open: BigRat::new(sums.open.clone(), sums.den.clone()),
            closed: BigRat::new(sums.closed.clone(), sums.den.clone()),
            eligible,
            positive: eligible && strike >= sums.open,
        },
    );
    sums
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SymmetryViolation {
    pub q: Permutation,
    pub p: Permutation,
    pub image: Permutation,
    pub quantity: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct SymmetryReport {
    pub checked: u64,
    pub violations: Vec<SymmetryViolation>,
}

impl SymmetryReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Checks that σ_q carries `S`, `S∘`, `S̄` and positivity of every prefix `p`
/// below `12⋯k` to `σ_q·p`, for all `q` of size `k`. At `p = 12⋯k` itself
/// only `q` ending in their maximum are compared.
pub fn check_sigma_symmetry(spec: &GameSpec) -> SymmetryReport {
    let table = node_table(spec);
    let mut checked = 0;
    let mut violations = Vec::new();
    for (p, values) in &table {
        let m = p.size();
        let run = p.as_slice().windows(2).take_while(|w| w[0] < w[1]).count() + 1;
        for k in 1..=run.min(m) {
            for q in SymmetricGroup::new(k) {
                if k == m && q.last() != k {
                    continue;
                }
                let image = p.sigma_apply(&q).expect("increasing prefix");
                let other = &table[&image];
                checked += 1;
                let mut differs = |quantity, same: bool| {
                    if !same {
                        violations.push(SymmetryViolation {
                            q: q.clone(),
                            p: p.clone(),
                            image: image.clone(),
                            quantity,
                        });
                    }
                };
                differs("strike", values.strike == other.strike);
                differs("open", values.open == other.open);
                differs("closed", values.closed == other.closed);
                if values.eligible {
                    differs("positivity", values.positive == other.positive);
                }
            }
        }
    }
    SymmetryReport {
        checked,
        violations,
    }
}
