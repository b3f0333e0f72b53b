use ineqlab::harness::{run_sweep, ReportSet, Summary, SweepConfig};
use ineqlab::theorems::Status;

fn sweep(text: &str) -> ReportSet {
    run_sweep(&SweepConfig::parse(text).unwrap())
}

#[test]
fn second_upper_over_s_grid() {
    let set = sweep("theorem = second-upper\nfunction = exp_pow(sigma=1,r=2)\ns = linspace(0.1, 1.0, 10)\n");
    assert_eq!(set.reports.len(), 10);
    assert!(set.reports.iter().all(|r| r.status == Status::Pass));
    let csv = set.to_csv().unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn hh_over_three_functions() {
    let set = sweep("theorem = hh\nfunction = [pow(r=2), exp_affine(lambda=1,c=0), const(c=1)]\n");
    assert_eq!(set.summary.count(Status::Pass), 3);
    assert_eq!(set.summary.total, 3);
}

#[test]
fn second_k_refuted_then_pass() {
    let set = sweep("theorem = second-K\nfunction = exp_affine(lambda=-1,c=0)\ns = [0.5, 1.0]\n");
    let statuses: Vec<Status> = set.reports.iter().map(|r| r.status).collect();
    assert_eq!(statuses, vec![Status::HypothesisRefuted, Status::Pass]);
    assert!(!set.violations.is_empty());
}

#[test]
fn empty_sweep() {
    let set = sweep("# no theorems\n");
    assert!(set.reports.is_empty());
    assert_eq!(set.summary.total, 0);
    assert_eq!(set.summary.min_slack, None);
    let parsed: serde_json::Value = serde_json::from_str(&set.to_json().unwrap()).unwrap();
    assert_eq!(parsed["reports"].as_array().unwrap().len(), 0);
    assert_eq!(parsed["summary"]["counts"]["pass"], 0);
}

#[test]
fn summary_counts_by_status() {
    let set = sweep("theorem = hh\nfunction = [const(c=1), exp_affine(lambda=1,c=0)]\n");
    let mut reports = set.reports.clone();
    reports[1].status = Status::Fail;
    let summary = Summary::of(&reports);
    assert_eq!(summary.count(Status::Pass), 1);
    assert_eq!(summary.count(Status::Fail), 1);
    assert_eq!(summary.count(Status::Divergent), 0);
}

#[test]
fn cell_errors_recorded_in_place() {
    // s = 1.5 is invalid for second-upper, b <= a is an invalid interval
    let set = sweep("theorem = second-upper\nfunction = const(c=1)\ns = [0.5, 1.5]\nb = [1, 0]\n");
    assert_eq!(set.reports.len(), 4);
    let errors: Vec<_> = set.reports.iter().filter(|r| r.status == Status::DomainError).collect();
    assert_eq!(errors.len(), 3);
    assert!(errors.iter().all(|r| r.diagnostic.is_some()));
    assert_eq!(set.reports[0].status, Status::Pass);
}

#[test]
fn two_function_theorems_default_g_to_f() {
    let set = sweep("theorem = pachpatte\nfunction = exp_affine(lambda=1,c=0)\n");
    assert_eq!(set.reports[0].functions.len(), 2);
    assert_eq!(set.reports[0].status, Status::Pass);
}

#[test]
fn json_round_trip() {
    let set = sweep(
        "theorem = [dm-chain, young-K, first-holder]\nfunction = [exp_affine(lambda=-1,c=0), exp_affine(lambda=1,c=0)]\n\
         function2 = exp_affine(lambda=-2,c=0)\ns = [0.5, 1]\np = [-1]\n",
    );
    let text = set.to_json().unwrap();
    let back = ReportSet::from_json(&text).unwrap();
    assert_eq!(back.to_json().unwrap(), text);
    assert_eq!(back.reports.len(), set.reports.len());
    for (a, b) in set.reports.iter().zip(&back.reports) {
        assert_eq!(a.theorem, b.theorem);
        assert_eq!(a.functions, b.functions);
        assert_eq!(a.status, b.status);
        assert_eq!(a.gate.checks.len(), b.gate.checks.len());
        assert_eq!(a.diagnostic, b.diagnostic);
        for (x, y) in a.chain.iter().zip(&b.chain) {
            assert_eq!(x.name, y.name);
            assert!((x.value - y.value).abs() <= 1e-11 * x.value.abs().max(1e-300));
        }
    }
    assert_eq!(back.summary.counts, set.summary.counts);
}

#[test]
fn reordering_the_grid_keeps_cell_results() {
    let base = "function = exp_affine(lambda=-1,c=0)\nsamples = 500\n";
    let a = sweep(&format!("theorem = [second-K, hh]\ns = [0.5, 1]\n{base}"));
    let b = sweep(&format!("theorem = [hh, second-K]\ns = [1, 0.5]\n{base}"));
    for r in &a.reports {
        let twin = b
            .reports
            .iter()
            .find(|o| o.theorem == r.theorem && o.params.s == r.params.s)
            .unwrap();
        assert_eq!(r, twin);
    }
}

#[test]
fn reruns_are_byte_identical() {
    let cfg = "theorem = [second-upper, dm-geometric]\nfunction = [exp_pow(sigma=1,r=2), exp_affine(lambda=-1,c=0)]\ns = [0.3, 0.7]\n";
    assert_eq!(sweep(cfg).to_json().unwrap(), sweep(cfg).to_json().unwrap());
}

#[test]
fn shipped_configs_parse() {
    let dir = concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs");
    let mut n = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "conf") {
            SweepConfig::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert!(n >= 3);
}
