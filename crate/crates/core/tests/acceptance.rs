//! Acceptance suite: one line per criterion, every tolerance pinned here.
//! Default configuration: p in {2, 3}, N = 6, M = 8, Q = 16, fixed seed.

use prismkit::report::{run_all, run_suite_by_name, RunConfig, SuiteReport};

const SEED: u64 = 7;

fn cfg() -> RunConfig {
    RunConfig::new(SEED)
}

fn criterion(name: &str, suite: &SuiteReport, extra: Option<bool>) -> bool {
    let pass = suite.pass() && extra.unwrap_or(true);
    println!(
        "criterion {:<45} {} ({} checks)",
        name,
        if pass { "PASS" } else { "FAIL" },
        suite.checks.len()
    );
    if !pass {
        for c in &suite.checks {
            if !c.pass {
                println!("    failed: {} {}", c.id, c.witness);
            }
        }
    }
    pass
}

#[test]
fn acceptance() {
    let cfg = cfg();
    let mut all = true;

    // 1. ghost homomorphism: structure polynomials match componentwise
    //    ghost arithmetic exactly, 200 pairs per (p, length <= 4)
    let s = run_suite_by_name(&cfg, "ghost").unwrap();
    all &= criterion("1 ghost-homomorphism", &s, None);

    // 2 + 3. delta-ring laws at precision N-1, named delta values, and the
    //    p-th root lemma on a 20-element rank-1 sample for n <= 4
    let s = run_suite_by_name(&cfg, "delta").unwrap();
    all &= criterion("2+3 delta-laws and p-th-root lemma", &s, None);

    // 4. q-logarithm values, certificates, Nygaard postcondition, and the
    //    eigen-relation phi(log_q x) = [p]_q log_q x, 50 random x per p
    let s = run_suite_by_name(&cfg, "qlog").unwrap();
    all &= criterion("4 q-logarithm", &s, None);

    // 5. envelope delta table against phi = (.)^p + p delta, and
    //    val(phi_1^m(z_n)) >= p^(n+m) - 1 for n + m <= 4
    let s = run_suite_by_name(&cfg, "envelope").unwrap();
    all &= criterion("5 envelope", &s, None);

    // 6. window axioms on 50 random windows, window/BK round trip on 100
    //    random minuscule matrices of rank <= 3, normal decompositions
    let s = run_suite_by_name(&cfg, "window").unwrap();
    all &= criterion("6 windows", &s, None);

    // 7. lifting along envelope kernels, verified exactly, uniqueness via
    //    independent schedules
    let s = run_suite_by_name(&cfg, "lift").unwrap();
    all &= criterion("7 lifting", &s, None);

    // 8. Dieudonne module checks, duality involution/exchange, isogeny
    //    cokernel relations phi psi = xi-tilde and psi phi = xi, refill
    let s = run_suite_by_name(&cfg, "dm").unwrap();
    all &= criterion("8 dieudonne-modules", &s, None);

    // 9. Ext oracle H^1(Z/p^a, Z/p^b) = Z/p^min(a,b), chain identity,
    //    primitive elements of dimension r
    let s = run_suite_by_name(&cfg, "ext").unwrap();
    all &= criterion("9 ext-oracle", &s, None);

    // 10. determinism: byte-identical reports for identical configs
    let r1 = run_all(&cfg).to_json();
    let r2 = run_all(&cfg).to_json();
    let det = r1 == r2;
    println!(
        "criterion {:<45} {} (byte-identical reports)",
        "10 determinism",
        if det { "PASS" } else { "FAIL" }
    );
    all &= det;

    assert!(all, "acceptance criteria failed");
}
