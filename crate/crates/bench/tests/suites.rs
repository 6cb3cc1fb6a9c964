use pilot_bench::{run_suite_detailed, BenchConfig, Suite};

fn one_run() -> BenchConfig {
    BenchConfig { runs: 1, ..BenchConfig::default() }
}

#[tokio::test(flavor = "multi_thread")]
async fn scripted_suites_are_perfect() {
    for suite in [Suite::Route, Suite::SensorBind, Suite::TaskParser] {
        let out = run_suite_detailed(suite, &one_run()).await.unwrap();
        println!("{}", out.report.table());
        for c in &out.report.conditions {
            if c.metric.ends_with("accuracy") {
                assert_eq!(c.mean, 1.0, "{suite} {} {}", c.name, c.metric);
            }
        }
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn fast_path_beats_raw_text() {
    let out = run_suite_detailed(Suite::FastThinking, &one_run()).await.unwrap();
    println!("{}", out.report.table());
    let r = &out.report;
    let get = |n: &str, m: &str| r.condition(n, m).unwrap().mean;
    assert_eq!(get("Fast Path", "top1"), 1.0);
    assert!(get("Fast Path", "rank1_dist") <= 0.01);
    assert!(get("Raw Text", "top1") < 1.0);
    assert!(get("Raw Text", "rank1_dist") >= 0.1);
    assert!(get("Fast Path", "rank_margin") > get("Raw Text", "rank_margin"));
}

#[tokio::test(flavor = "multi_thread")]
async fn toolext_scales_resolve() {
    let out = run_suite_detailed(Suite::ToolExt, &one_run()).await.unwrap();
    println!("{}", out.report.table());
    for c in &out.report.conditions {
        assert_eq!(c.mean, 1.0, "{}", c.name);
    }
    for n in [30, 50, 70, 100] {
        assert_eq!(out.report.artifacts["scanned"][n.to_string()], n);
    }
}

#[tokio::test(flavor = "multi_thread")]
async fn latency_fast_path_skips_the_script_writer() {
    let cfg = BenchConfig { runs: 1, ..BenchConfig::default() };
    let out = run_suite_detailed(Suite::Latency, &cfg).await.unwrap();
    println!("{}", out.report.table());
    assert_eq!(out.report.condition("fast", "script_writes").unwrap().mean, 0.0);
    assert_eq!(out.report.condition("fast", "hit_rate").unwrap().mean, 1.0);
    let slow = out.report.condition("slow", "ms").unwrap().mean;
    let fast = out.report.condition("fast", "ms").unwrap().mean;
    assert!(fast < slow);
}
