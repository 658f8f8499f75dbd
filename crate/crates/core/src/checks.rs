//! Runtime verification suites: each cross-checks one family of results
//! against an independent computation and reports one line per property.

use std::fmt;
use std::str::FromStr;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::exactnum::{
    isolate_positive_roots, rat, ratio, rising_factorial, theta_factorial, BigRat, RootLocation,
    ThetaPoly,
};
use crate::permutation::{
    check_prefix_equivariance, equivariance_defect, Equivariance, Permutation, Statistic,
    SymmetricGroup,
};
use crate::positional::{
    ewens_critical_root, ewens_kappa, ewens_w_closed_table, ewens_w_rows, mallows_kappa,
    mallows_w_closed_table, mallows_w_rows, roots_csv, w_rows, w_table_csv, Model, WTable,
};
use crate::tree_solver::{check_sigma_symmetry, verify_positionality, GameSpec};

/// Largest N the enumeration suites accept unless the caller raises it.
pub const DEFAULT_ORACLE_BUDGET: usize = 7;

/// Published Ewens `W(N,k)` table for `N ≤ 6`, transcribed.
pub const WTABLE_FIXTURE: &str = include_str!("../fixtures/ewens_wtable_6.csv");
/// Published Ewens critical roots for `N ≤ 11`, transcribed.
pub const ROOTS_FIXTURE: &str = include_str!("../fixtures/ewens_roots_11.csv");

/// θ values used by the positionality and symmetry suites.
pub fn theta_grid() -> Vec<BigRat> {
    vec![
        ratio(1, 3),
        ratio(1, 2),
        rat(1),
        ratio(6, 5),
        rat(2),
        rat(3),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Oracle,
    Symmetry,
    Positional,
    Figures,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown suite {0:?} (expected oracle, symmetry, positional or figures)")]
pub struct UnknownSuite(String);

impl FromStr for Suite {
    type Err = UnknownSuite;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "oracle" => Ok(Suite::Oracle),
            "symmetry" => Ok(Suite::Symmetry),
            "positional" => Ok(Suite::Positional),
            "figures" => Ok(Suite::Figures),
            _ => Err(UnknownSuite(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    /// Reported without a pass/fail claim.
    Info,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckOutcome {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

impl CheckOutcome {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            status: if passed { Status::Pass } else { Status::Fail },
            detail: detail.into(),
        }
    }

    fn info(name: impl Into<String>, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            status: Status::Info,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Info => "INFO",
        };
        write!(f, "{tag} {}: {}", self.name, self.detail)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuiteReport {
    pub suite: Suite,
    pub outcomes: Vec<CheckOutcome>,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.status != Status::Fail)
    }
}

impl fmt::Display for SuiteReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for o in &self.outcomes {
            writeln!(f, "{o}")?;
        }
        Ok(())
    }
}

/// `n_max` is ignored by the figures suite.
pub fn run_suite(suite: Suite, n_max: usize) -> SuiteReport {
    let outcomes = match suite {
        Suite::Oracle => oracle_suite(n_max),
        Suite::Symmetry => symmetry_suite(n_max),
        Suite::Positional => positional_suite(n_max),
        Suite::Figures => figures_suite(),
    };
    SuiteReport { suite, outcomes }
}

fn counts_poly(counts: &[u64]) -> ThetaPoly {
    ThetaPoly::from_coeffs(
        counts
            .iter()
            .map(|&c| BigRat::from_integer(c.into()))
            .collect(),
    )
}

/// Σ_{π ∈ S_n} θ^c(π), by enumeration.
pub fn normalizer_by_enumeration(c: &Statistic, n: usize) -> ThetaPoly {
    let mut counts = Vec::new();
    for pi in SymmetricGroup::new(n) {
        let s = c.eval(&pi);
        if counts.len() <= s {
            counts.resize(s + 1, 0);
        }
        counts[s] += 1;
    }
    counts_poly(&counts)
}

/// `W(n,k)` as Σ θ^c(π) over the k-winnable π ∈ S_n, by enumeration.
pub fn w_table_by_enumeration(model: Model, n: usize) -> WTable {
    let c = model.statistic();
    let mut counts = vec![Vec::<u64>::new(); n + 1];
    for pi in SymmetricGroup::new(n) {
        let s = c.eval(&pi);
        for (k, row) in counts.iter_mut().enumerate() {
            if pi.is_k_winnable(k) {
                if row.len() <= s {
                    row.resize(s + 1, 0);
                }
                row[s] += 1;
            }
        }
    }
    WTable {
        model,
        n,
        entries: counts.iter().map(|row| counts_poly(row)).collect(),
    }
}

fn first_mismatch(a: &WTable, b: &WTable) -> Option<usize> {
    (0..=a.n).find(|&k| a.get(k) != b.get(k))
}

fn oracle_suite(n_max: usize) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    let mut normalizer_fail = None;
    for n in 1..=n_max {
        if rising_factorial(n) != normalizer_by_enumeration(&Statistic::LeftToRightMaxima, n) {
            normalizer_fail.get_or_insert(format!("⟨{n}⟩! differs from the lrmax sum"));
        }
        if theta_factorial(n) != normalizer_by_enumeration(&Statistic::Inversions, n) {
            normalizer_fail.get_or_insert(format!("[{n}]! differs from the inversion sum"));
        }
    }
    out.push(CheckOutcome::new(
        "normalizers",
        normalizer_fail.is_none(),
        normalizer_fail
            .unwrap_or_else(|| format!("⟨N⟩! and [N]! match enumeration for N ≤ {n_max}")),
    ));

    for model in [Model::Ewens, Model::Mallows] {
        let rows = w_rows(model, n_max);
        let mut failure = None;
        for rec in &rows {
            let closed = match model {
                Model::Ewens => ewens_w_closed_table(rec.n),
                Model::Mallows => mallows_w_closed_table(rec.n),
            }
            .expect("n ≥ 1");
            let enumerated = w_table_by_enumeration(model, rec.n);
            if let Some(k) = first_mismatch(rec, &enumerated) {
                failure.get_or_insert(format!("recurrence vs enumeration at N={} k={k}", rec.n));
            }
            if let Some(k) = first_mismatch(&closed, &enumerated) {
                failure.get_or_insert(format!("closed form vs enumeration at N={} k={k}", rec.n));
            }
        }
        out.push(CheckOutcome::new(
            format!("{}-wtable", model.name()),
            failure.is_none(),
            failure.unwrap_or_else(|| {
                format!("recurrence = closed form = enumeration for N ≤ {n_max}")
            }),
        ));
    }

    out.push(ewens_roots_check(n_max.max(2)));
    if n_max >= 3 {
        out.push(mallows_roots_check(n_max.min(6)));
    }
    out
}

/// Each Ewens ΔW(N,k) has exactly one root in `[1/1000, N]`, the critical root.
fn ewens_roots_check(n_max: usize) -> CheckOutcome {
    let lo = ratio(1, 1000);
    let tol = ratio(1, 1_000_000);
    for row in ewens_w_rows(n_max).iter().skip(1) {
        let n = row.n;
        for k in 0..=n - 2 {
            let dw = row.delta(k);
            let roots = isolate_positive_roots(&dw, &lo, &rat(n as i64), &tol).expect("nonzero");
            let expected = ewens_critical_root(n, k).expect("k ≤ N−2");
            if roots != [RootLocation::Exact(expected.clone())] {
                return CheckOutcome::new(
                    "ewens-roots",
                    false,
                    format!("N={n} k={k}: found {roots:?}, expected {expected}"),
                );
            }
        }
    }
    CheckOutcome::new(
        "ewens-roots",
        true,
        format!("ΔW has the single positive root 1/Σ 1/i for N ≤ {n_max}"),
    )
}

/// Roots of Mallows ΔW(N,k) located on the recurrence polynomials are sign
/// changes of the enumerated polynomials.
fn mallows_roots_check(n: usize) -> CheckOutcome {
    let recurrence = mallows_w_rows(n).pop().expect("n ≥ 1");
    let enumerated = w_table_by_enumeration(Model::Mallows, n);
    let (lo, hi, tol) = (ratio(1, 1000), rat(1000), ratio(1, 1_000_000));
    let mut located = 0;
    for k in 0..n - 1 {
        let dw = recurrence.delta(k);
        let oracle = enumerated.delta(k);
        let roots = isolate_positive_roots(&dw, &lo, &hi, &tol).expect("nonzero");
        for r in &roots {
            let ok = match r {
                RootLocation::Exact(x) => oracle.eval(x).is_zero(),
                RootLocation::Bracket { lo, hi } => {
                    let (a, b) = (oracle.eval(lo), oracle.eval(hi));
                    a.is_positive() != b.is_positive() && !a.is_zero() && !b.is_zero()
                }
            };
            if !ok {
                return CheckOutcome::new("mallows-roots", false, format!("N={n} k={k}: {r:?}"));
            }
            located += 1;
        }
    }
    CheckOutcome::new(
        "mallows-roots",
        true,
        format!("{located} roots of ΔW(N={n},k) confirmed as sign changes of the enumerated ΔW"),
    )
}

fn symmetry_suite(n_max: usize) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for c in [Statistic::LeftToRightMaxima, Statistic::Inversions] {
        let result = check_prefix_equivariance(&c, n_max);
        out.push(CheckOutcome::new(
            format!("{}-equivariant", c.name()),
            result.holds(),
            match result {
                Equivariance::Holds { checked } => format!("{checked} pairs up to N={n_max}"),
                Equivariance::Violated(v) => format!("violated at q={} π={}", v.q, v.pi),
            },
        ));
    }
    let c321 = Statistic::Pattern321Count;
    let witness = match check_prefix_equivariance(&c321, n_max.max(3)) {
        Equivariance::Violated(v) => {
            let genuine = equivariance_defect(&c321, &v.q, &v.pi)
                .ok()
                .flatten()
                .is_some();
            (
                genuine,
                format!(
                    "q={} π={} gives {} vs {}",
                    v.q, v.pi, v.observed, v.expected
                ),
            )
        }
        Equivariance::Holds { .. } => (false, "no violation found".to_string()),
    };
    out.push(CheckOutcome::new(
        "321-not-equivariant",
        witness.0,
        witness.1,
    ));
    let q: Permutation = "2 1 3 4".parse().expect("valid");
    let pi: Permutation = "2 4 6 8 1 3 5 7".parse().expect("valid");
    let classic = equivariance_defect(&c321, &q, &pi).expect("increasing prefix");
    out.push(CheckOutcome::new(
        "321-witness-2468|1357",
        classic
            .as_ref()
            .is_some_and(|v| v.image.to_string() == "4 2 6 8 1 3 5 7"),
        match classic {
            Some(v) => format!(
                "c(π) − c(σ·π) = {} but c(1234) − c(q) = {}",
                v.observed, v.expected
            ),
            None => "identity holds".to_string(),
        },
    ));

    let n = n_max.min(6);
    for c in [Statistic::LeftToRightMaxima, Statistic::Inversions] {
        let mut failure = None;
        let mut checked = 0;
        for theta in [ratio(1, 2), rat(1), rat(2)] {
            let spec = GameSpec::new(n, c.clone(), theta.clone()).expect("valid");
            let report = check_sigma_symmetry(&spec);
            checked += report.checked;
            if let Some(v) = report.violations.first() {
                failure.get_or_insert(format!(
                    "θ={theta}: {} differs at p={} q={}",
                    v.quantity, v.p, v.q
                ));
            }
        }
        out.push(CheckOutcome::new(
            format!("{}-sigma-symmetry", c.name()),
            failure.is_none(),
            failure.unwrap_or_else(|| format!("{checked} σ-images preserved at N={n}")),
        ));
    }
    out
}

fn positional_suite(n_max: usize) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for c in [Statistic::LeftToRightMaxima, Statistic::Inversions] {
        for n in 1..=n_max {
            let mut failure = None;
            for theta in theta_grid() {
                let spec = GameSpec::new(n, c.clone(), theta.clone()).expect("valid");
                let report = verify_positionality(&spec).expect("within budget");
                let kappa = match c {
                    Statistic::LeftToRightMaxima => ewens_kappa(n, &theta).expect("valid"),
                    _ => mallows_kappa(n, &theta).expect("valid").kappa,
                };
                if !report.is_positional() {
                    failure.get_or_insert(format!(
                        "θ={theta}: tree {} vs positional {}, strike set k {:?}",
                        report.tree_optimum, report.best_positional, report.strike_set_k
                    ));
                } else if report.best_k != kappa {
                    failure
                        .get_or_insert(format!("θ={theta}: argmax {} vs κ {kappa}", report.best_k));
                }
            }
            out.push(CheckOutcome::new(
                format!("{}-N{n}", c.name()),
                failure.is_none(),
                failure.unwrap_or_else(|| {
                    "tree optimum is positional with k = κ on the θ grid".to_string()
                }),
            ));
        }
    }
    for n in (5..=7).filter(|&n| n <= n_max) {
        let mut notes = Vec::new();
        for theta in theta_grid() {
            let spec = GameSpec::new(n, Statistic::Pattern321Count, theta.clone()).expect("valid");
            let report = verify_positionality(&spec).expect("within budget");
            notes.push(format!(
                "θ={theta} {}",
                if report.is_positional() {
                    "positional"
                } else {
                    "not positional"
                }
            ));
        }
        out.push(CheckOutcome::info(format!("321-N{n}"), notes.join(", ")));
    }
    out
}

/// Lines of `actual` that differ from `expected`, as `line: expected | actual`.
pub fn diff_lines(expected: &str, actual: &str) -> Vec<String> {
    let e: Vec<&str> = expected.lines().collect();
    let a: Vec<&str> = actual.lines().collect();
    (0..e.len().max(a.len()))
        .filter_map(|i| {
            let (x, y) = (
                e.get(i).copied().unwrap_or(""),
                a.get(i).copied().unwrap_or(""),
            );
            (x != y).then(|| format!("{}: {x} | {y}", i + 1))
        })
        .collect()
}

fn fixture_check(name: &str, fixture: &str, generated: &str) -> CheckOutcome {
    let diff = diff_lines(fixture, generated);
    CheckOutcome::new(
        name,
        diff.is_empty(),
        if diff.is_empty() {
            format!("{} rows match the fixture", fixture.lines().count() - 1)
        } else {
            format!("{} differing lines, first {}", diff.len(), diff[0])
        },
    )
}

fn figures_suite() -> Vec<CheckOutcome> {
    let recurrence = ewens_w_rows(6);
    let closed: Vec<WTable> = (1..=6)
        .map(|n| ewens_w_closed_table(n).expect("n ≥ 1"))
        .collect();
    let enumerated: Vec<WTable> = (1..=6)
        .map(|n| w_table_by_enumeration(Model::Ewens, n))
        .collect();
    vec![
        fixture_check(
            "wtable-recurrence",
            WTABLE_FIXTURE,
            &w_table_csv(&recurrence),
        ),
        fixture_check("wtable-closed-form", WTABLE_FIXTURE, &w_table_csv(&closed)),
        fixture_check(
            "wtable-enumeration",
            WTABLE_FIXTURE,
            &w_table_csv(&enumerated),
        ),
        fixture_check("critical-roots", ROOTS_FIXTURE, &roots_csv(11)),
    ]
}
