//! Optimizing through an evaluator process that speaks the line protocol.
//!
//! The example re-executes itself with `--serve` to act as the evaluator, so
//! both sides of the protocol are shown: [`protocol::serve`] on the evaluator
//! side and [`ExternalEvaluator`] on the optimizer side.

use std::io;

use miso_mobo::miso::{self, RunConfig};
use miso_mobo::sources::protocol::{self, Handshake};
use miso_mobo::sources::{ExternalConfig, ExternalEvaluator, SourceBinding, SourceSpec, SyntheticSource};
use miso_mobo::space::SearchSpace;

const D: usize = 3;

fn serve() -> miso_mobo::Result<()> {
    let space = SearchSpace::unit(D)?;
    let exact = SyntheticSource::exact("zdt1-miso");
    let hs = Handshake::new(&["f1", "f2"], vec![serde_json::json!({"id": 1}), serde_json::json!({"id": 2})]);
    protocol::serve(io::stdin().lock(), io::stdout().lock(), &hs, |req| {
        let u = protocol::decode_values(&space, &req.values).map_err(|e| e.to_string())?;
        let mut y = exact.truth(&u).map_err(|e| e.to_string())?;
        if req.source == 2 {
            // A cheap source with a constant offset on the second objective.
            y[1] += 0.05;
        }
        Ok(y)
    })?;
    Ok(())
}

fn main() -> miso_mobo::Result<()> {
    if std::env::args().any(|a| a == "--serve") {
        return serve();
    }
    let me = std::env::current_exe()?.to_string_lossy().into_owned();
    let space = SearchSpace::unit(D)?;
    let external = |id, cost| SourceSpec {
        id,
        cost,
        binding: SourceBinding::External { descriptor: serde_json::json!({}) },
    };
    let mut config = RunConfig::new(space.clone(), vec![external(1, 2.0), external(2, 1.0)]);
    config.budget = 30.0;

    let mut evaluator = ExternalEvaluator::spawn(ExternalConfig::new(vec![me, "--serve".into()]), space)?;
    println!("evaluator objectives: {:?}", evaluator.handshake().objectives);
    let trace = miso::run(config, &mut evaluator)?;
    for r in &trace.records {
        println!("source {} cost {:>4} -> {:?}", r.source, r.cumulative_cost, r.outcome);
    }
    println!("final hypervolume {:.4}", trace.final_hypervolume());
    Ok(())
}
