//! Acceptance criteria. Runs without the libtest harness so that every
//! criterion prints exactly one PASS/FAIL line; exits non-zero on any FAIL.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use bestchoice::asymptotics::{mallows_global_max, mallows_super_series};
use bestchoice::checks::{diff_lines, w_table_by_enumeration, ROOTS_FIXTURE, WTABLE_FIXTURE};
use bestchoice::exactnum::{rat, rat_to_f64, ratio, BigRat};
use bestchoice::permutation::{
    check_prefix_equivariance, equivariance_defect, Equivariance, Permutation, Statistic,
    SymmetricGroup,
};
use bestchoice::positional::{
    ewens_kappa, ewens_profile, ewens_w_closed_table, ewens_w_rows, mallows_optimal_k,
    mallows_w_rows, mallows_win, roots_csv, w_table_csv, Model, WTable,
};
use bestchoice::sampler::{run_simulation, sample, worker_rng, SimConfig, SimModel, Strategy};
use bestchoice::tree_solver::{
    solve_with, strike_probability, verify_positionality, GameSpec, SolveOptions,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn perm(s: &str) -> Permutation {
    s.parse().expect("valid permutation")
}

fn compact(p: &Permutation) -> String {
    p.as_slice().iter().map(|v| v.to_string()).collect()
}

fn criterion_1() -> Outcome {
    let spec = GameSpec::new(4, Statistic::LeftToRightMaxima, rat(1)).map_err(|e| e.to_string())?;
    let mut strikes = Vec::new();
    for options in [SolveOptions::exhaustive(), SolveOptions::equivariant()] {
        let result = solve_with(&spec, options).map_err(|e| e.to_string())?;
        ensure(result.optimal() == ratio(11, 24), || {
            format!("optimum {}", result.optimal())
        })?;
        strikes.push(result.strike_set);
    }
    ensure(strikes[0] == strikes[1], || {
        "modes disagree on the strike set".into()
    })?;
    let set = &strikes[0];
    let (short, complete): (Vec<_>, Vec<_>) = set
        .prefixes()
        .iter()
        .partition(|p| p.size() < 4 || p.last() == 4);
    let short: Vec<String> = short.iter().map(|p| compact(p)).collect();
    ensure(short == ["12", "213", "3124", "3214"], || {
        format!("short strikes {short:?}")
    })?;
    for p in &complete {
        let s = strike_probability(p, &spec).map_err(|e| e.to_string())?;
        ensure(s.to_reduced_rational().unwrap() == rat(0), || {
            format!("{p} has nonzero strike value")
        })?;
    }
    Ok(format!(
        "11/24, strikes {{12, 213, 3124, 3214}} plus {} zero-value completions",
        complete.len()
    ))
}

fn criterion_2() -> Outcome {
    let recurrence = ewens_w_rows(6);
    let closed: Vec<WTable> = (1..=6).map(|n| ewens_w_closed_table(n).unwrap()).collect();
    let enumerated: Vec<WTable> = (1..=6)
        .map(|n| w_table_by_enumeration(Model::Ewens, n))
        .collect();
    for (label, tables) in [
        ("enumeration", &enumerated),
        ("recurrence", &recurrence),
        ("closed form", &closed),
    ] {
        let diff = diff_lines(WTABLE_FIXTURE, &w_table_csv(tables));
        ensure(diff.is_empty(), || {
            format!("{label} differs from the table: {}", diff[0])
        })?;
    }
    Ok(format!(
        "{} polynomials match three ways",
        WTABLE_FIXTURE.lines().count() - 1
    ))
}

fn criterion_3() -> Outcome {
    let generated = roots_csv(11);
    let diff = diff_lines(ROOTS_FIXTURE, &generated);
    ensure(diff.is_empty(), || {
        format!("root table differs: {}", diff[0])
    })?;
    let rows: Vec<&str> = generated.lines().skip(1).collect();
    let starred = rows.iter().filter(|l| l.ends_with(",starred")).count();
    ensure(rows.len() == 55 && starred == 10, || {
        format!("{} roots, {starred} starred", rows.len())
    })?;
    Ok("55 roots and 10 starred intervals match".into())
}

fn criterion_4() -> Outcome {
    let thetas = [
        ratio(1, 3),
        ratio(1, 2),
        rat(1),
        ratio(6, 5),
        rat(2),
        rat(3),
    ];
    let mut games = 0;
    for c in [Statistic::LeftToRightMaxima, Statistic::Inversions] {
        for n in 4..=7 {
            for theta in &thetas {
                let spec = GameSpec::new(n, c.clone(), theta.clone()).map_err(|e| e.to_string())?;
                let report = verify_positionality(&spec).map_err(|e| e.to_string())?;
                ensure(report.values_agree(), || {
                    format!(
                        "{} N={n} θ={theta}: {} vs {}",
                        c.name(),
                        report.tree_optimum,
                        report.best_positional
                    )
                })?;
                games += 1;
            }
        }
    }
    Ok(format!(
        "{games} games: tree optimum equals the best positional strategy"
    ))
}

fn criterion_5() -> Outcome {
    let c = Statistic::Pattern321Count;
    let found = match check_prefix_equivariance(&c, 8) {
        Equivariance::Violated(v) => v,
        Equivariance::Holds { .. } => return Err("no violation found".into()),
    };
    let q = perm("2 1 3 4");
    let pi = perm("2 4 6 8 1 3 5 7");
    let image = perm("4 2 6 8 1 3 5 7");
    ensure(pi.sigma_apply(&q).ok() == Some(image.clone()), || {
        "σ image is not 42681357".into()
    })?;
    ensure(c.eval(&pi) == 0 && c.eval(&image) == 1, || {
        "c(24681357) = 0, c(42681357) = 1 fails".into()
    })?;
    let defect = equivariance_defect(&c, &q, &pi).map_err(|e| e.to_string())?;
    ensure(defect.is_some(), || "identity holds at 2468|1357".into())?;
    Ok(format!(
        "rejected with witness q={} π={}; c(2468|1357) = 0, c(4268|1357) = 1",
        compact(&found.q),
        compact(&found.pi)
    ))
}

fn criterion_6() -> Outcome {
    let n = 2000;
    let mut notes = Vec::new();
    for (theta, t) in [(ratio(1, 2), 0.5f64), (rat(1), 1.0), (rat(2), 2.0)] {
        let profile = ewens_profile(n, &theta).map_err(|e| e.to_string())?;
        let kappa = ewens_kappa(n, &theta).map_err(|e| e.to_string())?;
        ensure(kappa == profile.kappa, || {
            format!("θ={t}: κ {kappa} vs argmax {}", profile.kappa)
        })?;
        let win = rat_to_f64(profile.optimum());
        let x = kappa as f64 / n as f64;
        ensure((win - (-1f64).exp()).abs() < 0.01, || {
            format!("θ={t}: win {win}")
        })?;
        ensure((x - (-1.0 / t).exp()).abs() < 0.01, || {
            format!("θ={t}: k/N {x}")
        })?;
        notes.push(format!("θ={t}: k/N={x:.4} win={win:.5}"));
    }
    Ok(notes.join(", "))
}

fn criterion_7() -> Outcome {
    let n = 200;
    let mut notes = Vec::new();
    let mut failures = Vec::new();
    for (theta, t) in [
        (ratio(3, 10), 0.3f64),
        (ratio(1, 2), 0.5),
        (ratio(4, 5), 0.8),
    ] {
        let j = (-1.0 / f64::ln(t)).max(1.0);
        let limit = j * t.powf(j - 1.0) * (1.0 - t);
        let k = mallows_optimal_k(n, &theta).map_err(|e| e.to_string())?;
        let win = rat_to_f64(&mallows_win(n, k, &theta).map_err(|e| e.to_string())?);
        // The same expression at the whole number of candidates actually kept.
        let kept = (n - k) as f64;
        let integer_limit = kept * t.powf(kept - 1.0) * (1.0 - t);
        let allowed = [n - j.ceil() as usize, n - j.floor() as usize];
        if (win - limit).abs() >= 0.01 {
            failures.push(format!(
                "θ={t}: win {win:.4} vs {limit:.4} (j={j:.4}); at j={kept} the expression gives {integer_limit:.4}"
            ));
        }
        if !allowed.contains(&k) {
            failures.push(format!("θ={t}: k={k}, expected one of {allowed:?}"));
        }
        notes.push(format!("θ={t}: k={k} win={win:.4}"));
    }
    if failures.is_empty() {
        Ok(notes.join(", "))
    } else {
        Err(failures.join("; "))
    }
}

fn criterion_8() -> Outcome {
    for (theta, k, expected) in [
        (1.55, 1, 0.433939),
        (1.25, 2, 0.400125),
        (1.16, 3, 0.389029),
    ] {
        let v = mallows_super_series(theta, k, 1e-12).map_err(|e| e.to_string())?;
        ensure((v.value - expected).abs() < 1e-4, || {
            format!("θ={theta}: {} vs {expected}", v.value)
        })?;
    }
    let best = mallows_global_max(1e-12).map_err(|e| e.to_string())?;
    ensure((1.5..=1.6).contains(&best.theta) && best.k == 1, || {
        format!("{best:?}")
    })?;
    Ok(format!(
        "curve peaks (1.55, 1.25, 1.16) within 1e-4; global max θ*={:.4} k*=1 p={:.6}",
        best.theta, best.probability
    ))
}

fn exact_masses(c: &Statistic, n: usize, theta: f64) -> HashMap<Permutation, f64> {
    let weights: Vec<(Permutation, f64)> = SymmetricGroup::new(n)
        .map(|pi| {
            let w = theta.powi(c.eval(&pi) as i32);
            (pi, w)
        })
        .collect();
    let total: f64 = weights.iter().map(|(_, w)| w).sum();
    weights.into_iter().map(|(p, w)| (p, w / total)).collect()
}

fn total_variation(
    model: SimModel,
    c: &Statistic,
    n: usize,
    theta: f64,
    samples: usize,
    seed: u64,
) -> f64 {
    let exact = exact_masses(c, n, theta);
    let mut rng = worker_rng(seed, 0);
    let mut counts: HashMap<Permutation, usize> = HashMap::new();
    for _ in 0..samples {
        *counts.entry(sample(model, n, theta, &mut rng)).or_insert(0) += 1;
    }
    let empirical = |p: &Permutation| *counts.get(p).unwrap_or(&0) as f64 / samples as f64;
    let stray: usize = counts
        .iter()
        .filter(|(p, _)| !exact.contains_key(*p))
        .map(|(_, c)| c)
        .sum();
    0.5 * (exact
        .iter()
        .map(|(p, m)| (empirical(p) - m).abs())
        .sum::<f64>()
        + stray as f64 / samples as f64)
}

fn w_value(table: &WTable, k: usize, theta: &BigRat) -> f64 {
    rat_to_f64(&(table.get(k).eval(theta) / table.model.normalizer(table.n).eval(theta)))
}

fn criterion_9() -> Outcome {
    let mut worst: f64 = 0.0;
    for (model, c) in [
        (SimModel::Ewens, Statistic::LeftToRightMaxima),
        (SimModel::Mallows, Statistic::Inversions),
    ] {
        for n in [4, 5] {
            for theta in [0.5, 1.0, 2.0] {
                let tv = total_variation(model, &c, n, theta, 1_000_000, 2024 + n as u64);
                ensure(tv < 0.01, || format!("{model:?} N={n} θ={theta}: TV {tv}"))?;
                worst = worst.max(tv);
            }
        }
    }

    let mut checks = Vec::new();
    let spec = GameSpec::new(4, Statistic::LeftToRightMaxima, rat(1)).unwrap();
    let set = solve_with(&spec, SolveOptions::exhaustive())
        .unwrap()
        .strike_set;
    checks.push((
        SimModel::Uniform,
        4,
        rat(1),
        Strategy::StrikeSet(set),
        11.0 / 24.0,
    ));
    checks.push((
        SimModel::Ewens,
        4,
        rat(1),
        Strategy::Positional(1),
        11.0 / 24.0,
    ));
    let ewens = ewens_w_rows(7);
    let mallows = mallows_w_rows(6);
    for theta in [ratio(1, 2), rat(2)] {
        let k6 = ewens_kappa(6, &theta).unwrap();
        checks.push((
            SimModel::Ewens,
            6,
            theta.clone(),
            Strategy::Positional(k6),
            w_value(&ewens[5], k6, &theta),
        ));
        let k7 = ewens_kappa(7, &theta).unwrap();
        checks.push((
            SimModel::Ewens,
            7,
            theta.clone(),
            Strategy::Positional(k7),
            w_value(&ewens[6], k7, &theta),
        ));
        let m = mallows_optimal_k(6, &theta).unwrap();
        checks.push((
            SimModel::Mallows,
            6,
            theta.clone(),
            Strategy::Positional(m),
            w_value(&mallows[5], m, &theta),
        ));
    }
    let mut worst_z: f64 = 0.0;
    for (i, (model, n, theta, strategy, exact)) in checks.into_iter().enumerate() {
        let cfg = SimConfig::new(
            model,
            n,
            rat_to_f64(&theta),
            strategy,
            1_000_000,
            77 + i as u64,
        );
        let result = run_simulation(&cfg).map_err(|e| e.to_string())?;
        let z = result.z_score(exact);
        ensure(z < 4.0, || {
            format!(
                "{model:?} N={n} θ={theta}: {} vs {exact} ({z:.2}σ)",
                result.estimate
            )
        })?;
        worst_z = worst_z.max(z);
    }
    Ok(format!(
        "max TV {worst:.5}; win rates within {worst_z:.2}σ of exact values"
    ))
}

fn criterion_10() -> Outcome {
    let n = 500;
    let k_low = mallows_optimal_k(n, &ratio(19, 20)).map_err(|e| e.to_string())?;
    let k_high = mallows_optimal_k(n, &ratio(21, 20)).map_err(|e| e.to_string())?;
    let k_one = mallows_optimal_k(n, &rat(1)).map_err(|e| e.to_string())?;
    let (a, b, c) = (
        k_low as f64 / 500.0,
        k_high as f64 / 500.0,
        k_one as f64 / 500.0,
    );
    ensure(a > 0.95, || format!("θ=0.95: k/N = {a}"))?;
    ensure(b < 0.05, || format!("θ=1.05: k/N = {b}"))?;
    ensure((c - 0.37).abs() < 0.01, || format!("θ=1: k/N = {c}"))?;
    Ok(format!("k/N = {a} at θ=0.95, {b} at θ=1.05, {c} at θ=1"))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 tree solve N=4", criterion_1, Duration::from_secs(1)),
        ("2 Ewens W table", criterion_2, Duration::from_secs(10)),
        ("3 critical roots", criterion_3, Duration::from_secs(1)),
        ("4 positionality", criterion_4, Duration::from_secs(300)),
        ("5 321 counterexample", criterion_5, Duration::from_secs(60)),
        ("6 Ewens asymptotics", criterion_6, Duration::from_secs(30)),
        ("7 Mallows θ<1", criterion_7, Duration::from_secs(30)),
        ("8 Mallows θ>1", criterion_8, Duration::from_secs(10)),
        ("9 samplers", criterion_9, Duration::from_secs(120)),
        ("10 instability", criterion_10, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, run, limit) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => {
                Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}"))
            }
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS criterion {name} ({elapsed:.2?}): {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL criterion {name} ({elapsed:.2?}): {detail}");
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
