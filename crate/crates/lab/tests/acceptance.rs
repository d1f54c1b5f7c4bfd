//! Acceptance suite: every criterion runs through the experiment registry and
//! prints one `PASS` or `FAIL` line. The process exits non-zero if any fails.

use std::collections::BTreeMap;
use std::process::ExitCode;
use std::time::Instant;

use dispersive_core::fields::AnalyticField;
use dispersive_core::transport::DispersionMap;
use dispersive_lab::config::TimeSection;
use dispersive_lab::report::{Check, Status};
use dispersive_lab::runner::Execution;
use dispersive_lab::{execute, ExperimentConfig, Registry};

/// Threads for the main runs; determinism re-runs use one thread.
const THREADS: usize = 4;

struct Suite {
    registry: Registry,
    /// Sample tables of the catalog defaults, keyed by id.
    defaults: BTreeMap<String, String>,
    failed: usize,
}

impl Suite {
    fn run(&mut self, label: &str, config: &ExperimentConfig) -> Option<Execution> {
        let start = Instant::now();
        match execute(&self.registry, config, THREADS) {
            Ok((e, err)) => {
                println!("    {label}: {:?} in {:.1} s", e.report.status, start.elapsed().as_secs_f64());
                for c in e.report.checks.iter().filter(|c| !c.pass) {
                    println!("      failed check {} = {} ({:?})", c.name, c.value, c.criterion);
                }
                if let Some(err) = err {
                    println!("      error: {err}");
                }
                Some(e)
            }
            Err(err) => {
                println!("    {label}: configuration rejected: {err}");
                None
            }
        }
    }

    /// Runs the catalog default of `id`, keeping its samples for the determinism criterion.
    fn run_default(&mut self, id: &str) -> Option<Execution> {
        let config = self.registry.get(id).expect("catalog id").default_config();
        let e = self.run(id, &config)?;
        self.defaults.insert(id.to_string(), e.samples_csv.clone());
        Some(e)
    }

    fn verdict(&mut self, n: usize, name: &str, pass: bool) {
        println!("criterion {n:2} {name}: {}", if pass { "PASS" } else { "FAIL" });
        if !pass {
            self.failed += 1;
        }
    }
}

fn passed(e: &Option<Execution>) -> bool {
    e.as_ref().is_some_and(|e| e.report.status == Status::Pass)
}

fn check<'a>(e: &'a Option<Execution>, name: &str) -> Option<&'a Check> {
    e.as_ref()?.report.checks.iter().find(|c| c.name == name)
}

fn has_checks(e: &Option<Execution>, names: &[&str]) -> bool {
    names.iter().all(|n| check(e, n).is_some_and(|c| c.pass))
}

fn with_params(mut c: ExperimentConfig, entries: &[(&str, toml::Value)]) -> ExperimentConfig {
    for (k, v) in entries {
        c.params.insert(k.to_string(), v.clone());
    }
    c
}

fn map_value(map: DispersionMap) -> toml::Value {
    toml::Value::try_from(map).expect("maps serialize")
}

fn main() -> ExitCode {
    let mut s = Suite { registry: Registry::builtin(), defaults: BTreeMap::new(), failed: 0 };
    let decade = 10f64.powf(1.0 / 6.0);

    // 1: d = 1 over [10, 1e4] within 0.02; d = 2 product Gaussian over [10, 1e3] within 0.05.
    let d1 = s.run_default("vlasov-decay");
    let mut c = s.registry.get("vlasov-decay").unwrap().default_config();
    c.datum = Some(AnalyticField::ProductGaussianPhase { d: 2, q_width: 1.0, p_width: 1.0 });
    c.time = Some(TimeSection::geometric(10.0, 1e3, decade));
    let c = with_params(c, &[("map", map_value(DispersionMap::Identity { d: 2 }))]);
    let d2 = s.run("vlasov-decay d=2", &c);
    let ok = passed(&d1) && passed(&d2) && has_checks(&d1, &["slope"]) && has_checks(&d2, &["slope"]);
    s.verdict(1, "vlasov-decay", ok);

    // 2: mass, L2 and kinetic functionals constant to 1e-8 for every built-in datum.
    let e = s.run_default("conservation");
    let ok = passed(&e) && e.as_ref().is_some_and(|e| e.report.checks.len() >= 3);
    s.verdict(2, "conservation", ok);

    // 3: nu-bar floor, monotone growth ratio, and a W^{1,1} norm varying under 10%.
    let e = s.run_default("counterexample");
    let names: Vec<String> = [4, 16, 64].iter().map(|l| format!("nu-bar-floor-lambda-{l}")).collect();
    let mut required: Vec<&str> = names.iter().map(String::as_str).collect();
    required.extend(["growth-ratio-increasing", "w11-variation"]);
    s.verdict(3, "counterexample", passed(&e) && has_checks(&e, &required));

    // 4: MixedD2 slope at most -1 on [10, 1e3]; relativistic d = 1 slope -1 within 0.05.
    let mixed = s.run_default("transport-degenerate");
    let mut c = s.registry.get("vlasov-decay").unwrap().default_config();
    c.tolerances.slope = Some(0.05);
    let c = with_params(c, &[("map", map_value(DispersionMap::Relativistic { d: 1 }))]);
    let rel = s.run("vlasov-decay relativistic", &c);
    let ok = passed(&mixed) && passed(&rel) && has_checks(&mixed, &["slope"]) && has_checks(&rel, &["slope"]);
    s.verdict(4, "transport-degenerate", ok);

    // 5: Gaussian modulus at t in {1, 5, 25} to 1e-8; unitarity and H^s to 1e-12.
    let e = s.run_default("schrodinger-decay");
    let times = e.as_ref().map(|e| e.report.config.times().unwrap()).unwrap_or_default();
    let covers = [1.0, 5.0, 25.0].iter().all(|t| times.iter().any(|s| (s - t).abs() < 1e-12));
    let ok = passed(&e) && covers && has_checks(&e, &["unitarity", "gaussian-modulus-oracle"]);
    s.verdict(5, "schrodinger-decay", ok);

    // 6: residual at most 1e-9 for m in {2, 3, 4}; perturbed residual above 1e-3.
    let e = s.run_default("commutation-suite");
    let names: Vec<String> =
        [2, 3, 4].iter().flat_map(|m| [format!("residual-m{m}"), format!("perturbed-residual-m{m}")]).collect();
    let required: Vec<&str> = names.iter().map(String::as_str).collect();
    s.verdict(6, "commutation-suite", passed(&e) && has_checks(&e, &required));

    // 7: one ratio per suite stable within x2 on [1, 100]; word norms conserved to 1e-9.
    let ks = s.run_default("schrodinger-ks");
    let xn = s.run_default("schrodinger-xnorm");
    // Every nonzero multi-index with |alpha| <= 2: d of order one, d(d+1)/2 of order two.
    let words = ks.as_ref().is_some_and(|e| {
        let d = e.report.config.grid.as_ref().map_or(1, |g| g.dim);
        let words: Vec<&Check> =
            e.report.checks.iter().filter(|c| c.name.starts_with("word-norm-conserved-")).collect();
        words.len() == d + d * (d + 1) / 2 && words.iter().all(|c| c.pass)
    });
    s.verdict(7, "schrodinger-ks and schrodinger-xnorm", passed(&ks) && passed(&xn) && words);

    // 8: theta = 1/2 slope -0.25 within 0.05 on [5, 50]; theta = 0 ratio 1 to 1e-12.
    let e = s.run_default("lp-decay");
    let ok = passed(&e) && has_checks(&e, &["theta-0-ratio-is-one", "slope-theta-0.5"]);
    s.verdict(8, "lp-decay", ok);

    // 9: sigma in {0, 1/4}, finite stable ratios on [1, 100].
    let e = s.run_default("local-mass");
    let ok = passed(&e) && e.as_ref().is_some_and(|e| e.report.inequalities.len() == 2);
    s.verdict(9, "local-mass", ok);

    // 10: one constant for c in {0, 3, 10}; untranslated norm at c = 10 larger by x2.
    let e = s.run_default("cube-translation");
    let ok = passed(&e) && has_checks(&e, &["untranslated-gain-at-farthest-center"]);
    s.verdict(10, "cube-translation", ok);

    // 11: every probe on t in [0, 20], x in [-50, 50]; right side 2 sqrt(pi/2); derivative slope -0.5.
    let e = s.run_default("airy-pointwise");
    let rhs = e.as_ref().and_then(|e| e.report.inequalities.first()).and_then(|r| r.samples.first()).map(|s| s.rhs);
    let rhs_ok = rhs.is_some_and(|v| (v - 2.0 * (std::f64::consts::PI / 2.0).sqrt()).abs() < 1e-9);
    let ok = passed(&e) && rhs_ok && has_checks(&e, &["rhs-closed-form", "right-derivative-slope"]);
    s.verdict(11, "airy-pointwise", ok);

    // 12: sup slope -1/3 within 0.1 on uncontaminated samples of [2, 20] at 32768 points.
    let e = s.run_default("airy-decay");
    let points = e.as_ref().and_then(|e| e.report.config.grid.as_ref()).map(|g| g.points);
    s.verdict(12, "airy-decay", passed(&e) && points == Some(32768) && has_checks(&e, &["sup-slope"]));

    // 13: weighted local energy of d_x u below the data constant for eps = 1/2 on [1, 50].
    let e = s.run_default("airy-local-energy");
    s.verdict(13, "airy-local-energy", passed(&e) && has_checks(&e, &["energy-slope"]));

    // 14: the catalog defaults not yet run, then every sample table again on one thread.
    let ids: Vec<&str> = s.registry.iter().map(|e| e.id()).collect();
    for id in ids.iter().filter(|id| !s.defaults.contains_key(**id)).copied().collect::<Vec<_>>() {
        s.run_default(id);
    }
    let mut identical = s.defaults.len() == ids.len();
    for id in &ids {
        let config = s.registry.get(id).unwrap().default_config();
        let same = match (execute(&s.registry, &config, 1), s.defaults.get(*id)) {
            (Ok((e, _)), Some(first)) => e.samples_csv == *first && !first.is_empty(),
            _ => false,
        };
        println!("    {id}: samples at 1 and {THREADS} threads {}", if same { "identical" } else { "DIFFER" });
        identical &= same;
    }
    s.verdict(14, "determinism", identical);

    println!("{} of 14 criteria failed", s.failed);
    if s.failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
