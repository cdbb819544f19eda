//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use apxsym::detsys::Mode;
use apxsym::numeval::{erfi, hyp2f1, hyp2f1_pfaff_b};
use apxsym::parse::ProblemSpec;
use apxsym::verify::{
    check_determining, check_isc, check_symmetry, epsilon_convergence, mutate_generator, prepare_solution,
    solution_grid, solution_table, verify_solution, VerificationReport, VerifyOptions,
};
use common::fixture;
use common::oracle::{erfi_quadrature, euler_2f1, rel};

type Outcome = Result<String, String>;

fn opts() -> VerifyOptions {
    VerifyOptions::default()
}

fn failing(r: &VerificationReport) -> String {
    r.checks
        .iter()
        .filter(|c| !c.verdict.is_zero())
        .map(|c| format!("{} ε^{}: {:?}", c.label, c.order, c.verdict))
        .collect::<Vec<_>>()
        .join("; ")
}

fn within(t: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let e = t.elapsed();
    if e < limit {
        Ok(())
    } else {
        Err(format!("{what} took {e:.1?}, limit {limit:?}"))
    }
}

fn telegraph_system() -> Outcome {
    let spec = fixture("telegraph.apx");
    let t = Instant::now();
    let r = check_determining(
        &spec,
        spec.generator("lie-ansatz").unwrap(),
        spec.generator("lie-concrete").unwrap(),
        Mode::Lie,
        &opts(),
    )
    .map_err(|e| e.to_string())?;
    within(t, Duration::from_secs(30), "telegraph")?;
    if !r.all_proved() {
        return Err(failing(&r));
    }
    Ok(format!("{} equations proved zero in {:.1?}", r.checks.len(), t.elapsed()))
}

fn case_sets(spec: &ProblemSpec) -> Vec<String> {
    spec.generators
        .iter()
        .map(|g| g.name.clone())
        .filter(|n| n.starts_with("case") && n.contains("-set"))
        .collect()
}

fn generator_suite(spec: &ProblemSpec) -> Outcome {
    let sets = case_sets(spec);
    if sets.len() != 15 {
        return Err(format!("expected 15 sets, found {}", sets.len()));
    }
    let mut slowest = Duration::ZERO;
    for n in &sets {
        let t = Instant::now();
        let r = check_symmetry(spec, spec.generator(n).unwrap(), Mode::QConditional, &opts())
            .map_err(|e| format!("{n}: {e}"))?;
        within(t, Duration::from_secs(60), n)?;
        slowest = slowest.max(t.elapsed());
        let orders: Vec<u32> = r.checks.iter().map(|c| c.order).collect();
        if !r.passed || !orders.contains(&0) || !orders.contains(&1) {
            return Err(format!("{n}: {}", failing(&r)));
        }
    }
    Ok(format!("15 sets pass at ε^0 and ε^1, slowest {slowest:.1?}"))
}

fn representation_suite(spec: &ProblemSpec) -> Outcome {
    for r in &spec.representations {
        let rep = check_isc(spec, &r.name, &opts()).map_err(|e| format!("{}: {e}", r.name))?;
        if !rep.all_proved() {
            return Err(format!("{}: {}", r.name, failing(&rep)));
        }
    }
    Ok(format!("{} representations proved zero", spec.representations.len()))
}

fn solution_suite(spec: &ProblemSpec) -> Outcome {
    let mut numeric = Vec::new();
    for s in &spec.solutions {
        let r = verify_solution(spec, &s.name, &opts()).map_err(|e| format!("{}: {e}", s.name))?;
        // the ε^0 check is the unperturbed equation applied to u0
        let has_leading = r.checks.iter().any(|c| c.order == 0);
        if !r.passed || !has_leading {
            return Err(format!("{}: {}", s.name, failing(&r)));
        }
        if !r.all_proved() {
            numeric.push(s.name.clone());
        }
    }
    Ok(format!(
        "{} solutions pass; numerically settled: {}",
        spec.solutions.len(),
        if numeric.is_empty() { "none".into() } else { numeric.join(", ") }
    ))
}

fn convergence(spec: &ProblemSpec) -> Outcome {
    let mut out = Vec::new();
    for (sol, values) in [("sol1a", "fig1a"), ("sol2c", "fig2c"), ("sol3a", "fig3a")] {
        let t = Instant::now();
        let prepared = prepare_solution(spec, sol).map_err(|e| e.to_string())?;
        let grid = solution_grid(spec, &prepared, 61, 101).map_err(|e| e.to_string())?;
        let table = epsilon_convergence(spec, sol, values, &grid, &[0.03, 0.015]).map_err(|e| e.to_string())?;
        within(t, Duration::from_secs(10), sol)?;
        let ratio = table.ratios[0];
        if !(3.0..=5.3).contains(&ratio) {
            return Err(format!("{sol}: ratio {ratio:.3} outside [3.0, 5.3]"));
        }
        out.push(format!("{sol} {ratio:.3}"));
    }
    Ok(format!("ratios {}", out.join(", ")))
}

fn special_functions() -> Outcome {
    // hypergeometric arguments of the fig1b profile over x in [0, 5]
    let (alpha, delta, c2) = (2.0, 0.17, 0.01);
    let triples = [
        (0.5, (alpha - 3.0 * delta) / (4.0 * delta), (alpha + delta) / (4.0 * delta)),
        (0.5, (alpha + delta) / (4.0 * delta), (alpha + 5.0 * delta) / (4.0 * delta)),
        (0.5, (alpha + 5.0 * delta) / (4.0 * delta), (alpha + 9.0 * delta) / (4.0 * delta)),
    ];
    let mut worst: f64 = 0.0;
    for i in 0..=100 {
        let z = -(delta * 0.05 * i as f64).exp() / c2;
        for &(a, b, c) in &triples {
            let got = hyp2f1(a, b, c, z).map_err(|e| e.to_string())?;
            let err = rel(got, euler_2f1(a, b, c, z));
            if err > 1e-10 {
                return Err(format!("2F1({a}, {b}; {c}; {z}) off by {err:.2e}"));
            }
            worst = worst.max(err);
        }
    }
    let mut pfaff: f64 = 0.0;
    for i in 0..20 {
        let z = -(delta * 5.0 * i as f64 / 19.0).exp() / c2;
        let (a, b, c) = triples[i % 3];
        let p = hyp2f1(a, b, c, z).map_err(|e| e.to_string())?;
        let q = hyp2f1_pfaff_b(a, b, c, z).map_err(|e| e.to_string())?;
        pfaff = pfaff.max(rel(p, q));
    }
    if pfaff > 1e-10 {
        return Err(format!("Pfaff paths differ by {pfaff:.2e}"));
    }
    // erfi(sqrt(alpha x)/2) for x in [1/10, 5]
    for i in 0..=100 {
        let x = 0.1 + 4.9 * i as f64 / 100.0;
        let arg = (alpha * x).sqrt() / 2.0;
        let err = rel(erfi(arg).map_err(|e| e.to_string())?, erfi_quadrature(arg));
        if err > 1e-10 {
            return Err(format!("erfi({arg}) off by {err:.2e}"));
        }
        worst = worst.max(err);
    }
    Ok(format!("max oracle error {worst:.1e}, Pfaff spread {pfaff:.1e} over 20 points"))
}

fn spread(v: &[f64]) -> f64 {
    v.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v.iter().cloned().fold(f64::INFINITY, f64::min)
}

fn figure_data(spec: &ProblemSpec) -> Outcome {
    let figs = [
        ("sol1a", "fig1a"),
        ("sol1b", "fig1b"),
        ("sol1c", "fig1c"),
        ("sol2a", "fig2a"),
        ("sol2b", "fig2b"),
        ("sol2c", "fig2c"),
        ("sol2d", "fig2d"),
        ("sol3a", "fig3a"),
    ];
    let mut bad = Vec::new();
    for (sol, values) in figs {
        let table = solution_table(spec, sol, values, 61, 101).map_err(|e| format!("{values}: {e}"))?;
        if !table.rows.iter().all(|r| r.2.iter().all(|v| v.is_finite())) {
            return Err(format!("{values}: non-finite values"));
        }
        let (v0, v1) = (spread(&table.slice_t(0, 0)), spread(&table.slice_t(table.t_steps - 1, 0)));
        if v1 >= v0 {
            bad.push(format!("{values} {v0:.4} -> {v1:.4}"));
        }
    }
    if bad.is_empty() {
        Ok("8 figure grids finite and damped".into())
    } else {
        Err(format!("not damped: {}", bad.join(", ")))
    }
}

fn mutations(spec: &ProblemSpec) -> Outcome {
    let sets = case_sets(spec);
    let mut caught = 0;
    for seed in 0..40u64 {
        let g = spec.generator(&sets[(seed as usize * 7) % sets.len()]).unwrap();
        let Some(m) = mutate_generator(spec, g, seed) else { continue };
        let r = check_symmetry(spec, &m.def, Mode::QConditional, &opts()).map_err(|e| e.to_string())?;
        if r.passed || !r.checks.iter().any(|c| c.verdict.witness().is_some()) {
            return Err(format!("{} survived: {}", g.name, m.description));
        }
        caught += 1;
        if caught == 10 {
            return Ok("10 mutations fail with a witness".into());
        }
    }
    Err(format!("only {caught} mutations generated"))
}

fn main() {
    let rdc = fixture("rdc.apx");
    let criteria: [(&str, Box<dyn Fn() -> Outcome>); 8] = [
        ("telegraph determining system", Box::new(telegraph_system)),
        ("generator suite", Box::new(|| generator_suite(&rdc))),
        ("representation suite", Box::new(|| representation_suite(&rdc))),
        ("solution suite", Box::new(|| solution_suite(&rdc))),
        ("ε convergence", Box::new(|| convergence(&rdc))),
        ("special functions", Box::new(special_functions)),
        ("figure data", Box::new(|| figure_data(&rdc))),
        ("mutation sensitivity", Box::new(|| mutations(&rdc))),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("criterion {}: PASS {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {}: FAIL {name}: {detail}", i + 1);
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
