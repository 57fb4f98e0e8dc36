//! Drive a run from a JSON configuration, the way the `setnewton` binary does,
//! and print the summary instead of writing files.

use setnewton::cli::{run_method, Method, RunConfig, Summary};
use std::path::Path;

fn main() {
    let text = r#"{ "problem": "spike1d", "n": 400, "rule": "residual_mean", "alpha": 0.001 }"#;
    let cfg = RunConfig::from_json(text, Path::new("inline")).expect("valid config");
    let problem = cfg.build_problem(cfg.n).expect("known problem");
    for method in [Method::Newton, Method::Set, Method::SetVariant] {
        let r = run_method(&cfg, problem.as_ref(), method).expect("solve");
        let s = Summary::new(&cfg, problem.as_ref(), method, &r);
        println!("{}", serde_json::to_string(&s).unwrap());
    }
}
