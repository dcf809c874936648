//! Every shipped scenario file loads, echoes to an equivalent config, and
//! reaches its documented verdict.

use std::path::Path;

use domsplit::run::{run_config, RunDetail, Verdict};
use domsplit::scenario::{load_config, parse_config};

fn check(name: &str, want: Verdict) -> domsplit::run::RunOutcome {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name);
    let cfg = load_config(&path).unwrap_or_else(|e| panic!("{name}: {e}"));
    let echoed = parse_config(&cfg.to_string()).unwrap();
    assert_eq!(echoed.hash(), cfg.hash(), "{name}: echo changes the hash");
    let out = run_config(&cfg).unwrap_or_else(|e| panic!("{name}: {e}"));
    assert_eq!(out.verdict, want, "{name}");
    assert_eq!(out.bundle.run.config_hash, cfg.hash());
    out
}

#[test]
fn discrete_dominated() {
    for name in ["diagonal.toml", "skew.toml", "schrodinger.toml", "weighted.toml"] {
        check(name, Verdict::Verified);
    }
}

#[test]
fn sup_norm_cycle() {
    let out = check("linf_cycle.toml", Verdict::Verified);
    assert!(matches!(out.detail, RunDetail::Discrete(_)));
    // no volume certificate outside the Euclidean norm
    assert!(!out.bundle.quantities.contains_key("log_r_e_estimate"));
}

#[test]
fn weighted_converse_is_reported_not_hidden() {
    let out = check("weighted.toml", Verdict::Verified);
    let RunDetail::Discrete(a) = &out.detail else { panic!("discrete scenario") };
    let conv = a.converse.as_ref().unwrap();
    if !conv.holds {
        assert!(out.bundle.status.notes.iter().any(|n| n.contains("converse")), "{:?}", out.bundle.status);
    }
}

#[test]
fn non_dominated() {
    for name in ["rotation.toml", "identity.toml", "flow_rotation.toml"] {
        check(name, Verdict::NotDominated);
    }
}

#[test]
fn flows() {
    for name in ["flow_diagonal.toml", "flow_forced.toml"] {
        let out = check(name, Verdict::Verified);
        let RunDetail::Flow { splitting, .. } = &out.detail else { panic!("{name}: not a flow run") };
        assert!(splitting.as_ref().unwrap().agreement < 1e-5, "{name}");
    }
}

#[test]
fn load_errors_name_the_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "name = \"x\"\ndimension = 2\n[base]\nkind = \"nowhere\"\n").unwrap();
    let msg = load_config(&path).unwrap_err().to_string();
    assert!(msg.contains("broken.toml") && msg.contains("line"), "{msg}");
    assert!(load_config(&dir.path().join("missing.toml")).is_err());
}
