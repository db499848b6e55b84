use std::io::{BufRead, BufReader, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use miso_mobo::miso::{self, RunConfig, Termination};
use miso_mobo::sources::protocol::{self, Response};
use miso_mobo::sources::{
    make_synthetic_suite, Evaluator, ExternalConfig, ExternalEvaluator, SourceBinding, SourceSpec, SyntheticEvaluator,
};
use miso_mobo::space::{Location, SearchSpace};
use miso_mobo::Error;
use serde_json::json;

const BIN: &str = env!("CARGO_BIN_EXE_miso-mobo");

fn serve_cmd(d: usize) -> Vec<String> {
    [BIN, "serve-synthetic", "--space", &d.to_string(), "--bias", "0.05", "--noise-sd", "0.02"]
        .iter()
        .map(|s| s.to_string())
        .collect()
}

fn external(id: usize, cost: f64) -> SourceSpec {
    SourceSpec {
        id,
        cost,
        binding: SourceBinding::External { descriptor: json!({}) },
    }
}

fn sh(script: &str) -> Vec<String> {
    vec!["sh".into(), "-c".into(), script.into()]
}

const HANDSHAKE: &str = r#"echo '{"protocol":1,"objectives":["f1","f2"],"sources":[]}'"#;

fn id_of() -> &'static str {
    r#"id=$(printf '%s' "$line" | sed 's/^{"id":\([0-9]*\).*/\1/')"#
}

#[test]
fn external_run_reproduces_in_process_outcomes() {
    let d = 2;
    let space = SearchSpace::unit(d).unwrap();
    let mut local = RunConfig::new(space.clone(), make_synthetic_suite("zdt1-miso", d, 0.05, 0.02, 0).unwrap());
    local.budget = 16.0;
    local.acquisition.n_candidates = 100;
    local.gp.restarts = 2;
    let mut remote = local.clone();
    remote.sources = vec![external(1, 2.0), external(2, 1.0)];

    let a = miso::run(local, &mut SyntheticEvaluator).unwrap();
    let mut ev = ExternalEvaluator::spawn(ExternalConfig::new(serve_cmd(d)), space).unwrap();
    assert_eq!(ev.handshake().objectives, vec!["f1", "f2"]);
    let b = miso::run(remote, &mut ev).unwrap();
    assert_eq!(a.records.len(), b.records.len());
    for (x, y) in a.records.iter().zip(&b.records) {
        assert_eq!((x.source, &x.location, &x.outcome), (y.source, &y.location, &y.outcome));
    }
}

#[test]
fn evaluator_side_answers_in_order() {
    let mut child = Command::new(BIN)
        .args(["serve-synthetic", "--space", "xgb"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .spawn()
        .unwrap();
    let mut stdin = child.stdin.take().unwrap();
    let mut lines = BufReader::new(child.stdout.take().unwrap()).lines();
    let hs = protocol::parse_handshake(&lines.next().unwrap().unwrap()).unwrap();
    assert_eq!(hs.objectives.len(), 2);

    let space = SearchSpace::xgb();
    let good = protocol::encode_values(&space, &space.decode(&[0.3; 7]).unwrap());
    let mut bad = good.clone();
    bad.insert("max_depth".into(), json!(99));
    for (id, values) in [(0, &good), (1, &bad), (2, &good)] {
        let req = json!({"id": id, "source": 1, "values": values, "cv_seed": 5});
        writeln!(stdin, "{req}").unwrap();
    }
    drop(stdin);
    let replies: Vec<Response> = lines.map(|l| protocol::parse_response(&l.unwrap()).unwrap()).collect();
    assert_eq!(replies.iter().map(Response::id).collect::<Vec<_>>(), vec![0, 1, 2]);
    assert!(matches!(replies[0], Response::Success { .. }));
    assert!(matches!(replies[1], Response::Failure { .. }));
    match (&replies[0], &replies[2]) {
        (Response::Success { objectives: a, .. }, Response::Success { objectives: b, .. }) => {
            assert_eq!(a.len(), 2);
            assert_eq!(a, b, "same values and seed give the same outcome");
        }
        other => panic!("unexpected {other:?}"),
    }
    assert!(child.wait().unwrap().success());
}

fn evaluate(cmd: Vec<String>, timeout_secs: f64, retries: u32) -> miso_mobo::Result<Vec<f64>> {
    let space = SearchSpace::unit(2)?;
    let config = ExternalConfig {
        command: cmd,
        timeout_secs,
        retries,
    };
    let mut ev = ExternalEvaluator::spawn(config, space)?;
    ev.evaluate(&external(1, 2.0), &Location::new(vec![0.5, 0.5])?, 1)
        .map(|r| r.objectives)
}

#[test]
fn malformed_response_is_a_protocol_error() {
    let script = format!("{HANDSHAKE}; while read line; do echo 'not json'; done");
    assert!(matches!(evaluate(sh(&script), 5.0, 2), Err(Error::Protocol(_))));
}

#[test]
fn error_response_is_reported_with_its_id() {
    let script = format!(
        r#"{HANDSHAKE}; while read line; do {}; echo "{{\"id\":$id,\"error\":\"boom\"}}"; done"#,
        id_of()
    );
    match evaluate(sh(&script), 5.0, 2) {
        Err(Error::Evaluator { id, message }) => assert_eq!((id, message.as_str()), (0, "boom")),
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn mismatched_id_is_a_protocol_error() {
    let script = format!(
        r#"{HANDSHAKE}; while read line; do echo '{{"id":41,"objectives":[0.1,0.2],"wall_seconds":0}}'; done"#
    );
    assert!(matches!(evaluate(sh(&script), 5.0, 0), Err(Error::Protocol(_))));
}

#[test]
fn timeouts_are_retried_then_reported() {
    let script = format!("{HANDSHAKE}; while read line; do sleep 5; done");
    let started = Instant::now();
    match evaluate(sh(&script), 0.3, 1) {
        Err(Error::Source { source_id, retries, .. }) => assert_eq!((source_id, retries), (1, 1)),
        other => panic!("unexpected {other:?}"),
    }
    assert!(started.elapsed() < Duration::from_secs(8));
}

#[test]
fn crashed_evaluator_is_restarted() {
    let dir = tempfile::tempdir().unwrap();
    let marker = dir.path().join("crashed");
    let script = format!(
        r#"{HANDSHAKE}; while read line; do {}; if [ ! -e '{m}' ]; then touch '{m}'; exit 1; fi; echo "{{\"id\":$id,\"objectives\":[0.25,0.5],\"wall_seconds\":0}}"; done"#,
        id_of(),
        m = marker.display()
    );
    assert_eq!(evaluate(sh(&script), 5.0, 2).unwrap(), vec![0.25, 0.5]);
    assert!(marker.exists());
}

#[test]
fn failing_evaluator_ends_the_run_with_a_trace() {
    let script = format!(
        r#"{HANDSHAKE}; n=0; while read line; do {}; n=$((n+1)); if [ $n -gt 3 ]; then echo "{{\"id\":$id,\"error\":\"out of memory\"}}"; else echo "{{\"id\":$id,\"objectives\":[0.$n,0.5],\"wall_seconds\":0}}"; fi; done"#,
        id_of()
    );
    let space = SearchSpace::unit(2).unwrap();
    let mut cfg = RunConfig::new(space.clone(), vec![external(1, 2.0), external(2, 1.0)]);
    cfg.budget = 20.0;
    let mut ev = ExternalEvaluator::spawn(ExternalConfig::new(sh(&script)), space).unwrap();
    let t = miso::run(cfg, &mut ev).unwrap();
    assert_eq!(t.records.len(), 3);
    assert!(matches!(t.termination, Termination::EvaluatorFailure { ref message } if message.contains("out of memory")));
    assert!(!t.completed());
}

#[test]
fn unreachable_evaluator_fails_to_spawn() {
    assert!(evaluate(vec!["/nonexistent/evaluator".into()], 1.0, 0).is_err());
    let silent = sh("exit 0");
    assert!(evaluate(silent, 1.0, 0).is_err());
}
