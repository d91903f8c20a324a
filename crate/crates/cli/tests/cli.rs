use std::process::{Command, Output};

fn ctmc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ctmc-mlmc"))
        .args(args)
        .env_remove("MLMC_SEED")
        .env_remove("MLMC_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn exit_codes() {
    assert_eq!(
        ctmc(&["estimate", "--model", "dimer"]).status.code(),
        Some(2)
    );
    assert_eq!(
        ctmc(&["validate-model", "--model", "no/such/model.toml"])
            .status
            .code(),
        Some(1)
    );
    let bad_obs = ctmc(&[
        "estimate",
        "--model",
        "decay",
        "--observable",
        "Q",
        "--time",
        "1",
        "--epsilon",
        "1",
    ]);
    assert_eq!(bad_obs.status.code(), Some(3));
    let capped = ctmc(&[
        "estimate",
        "--model",
        "decay",
        "--observable",
        "S",
        "--time",
        "1",
        "--epsilon",
        "1",
        "--method",
        "unbiased-mlmc",
        "--max-samples",
        "50",
    ]);
    assert_eq!(capped.status.code(), Some(4));
}

#[test]
fn canonical_form_is_a_fixed_point() {
    let dir = std::env::temp_dir().join(format!("ctmc-mlmc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    for name in ["dimer", "viral", "mm-k"] {
        let first = ctmc(&["validate-model", "--model", name, "--canonical"]);
        assert!(first.status.success());
        let path = dir.join(format!("{name}.toml"));
        std::fs::write(&path, &first.stdout).unwrap();
        let second = ctmc(&[
            "validate-model",
            "--model",
            path.to_str().unwrap(),
            "--canonical",
        ]);
        assert!(second.status.success());
        assert_eq!(first.stdout, second.stdout, "{name}");
    }
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn simulate_prints_one_row_per_path() {
    let o = ctmc(&[
        "simulate", "--model", "decay", "--time", "1", "--paths", "3", "--seed", "5",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "path,updates,S");
    assert_eq!(lines.len(), 4);
    // A pure decay path fires once per molecule lost.
    for row in &lines[1..] {
        let f: Vec<u64> = row.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(f[1] + f[2], 1000);
    }
}

#[test]
fn json_report_round_trips() {
    let o = ctmc(&[
        "estimate",
        "--model",
        "decay",
        "--observable",
        "S",
        "--time",
        "1",
        "--epsilon",
        "2",
        "--method",
        "tau-cmc",
        "--h",
        "0.25",
        "--json",
        "--workers",
        "2",
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["model"], "decay");
    assert_eq!(doc["settings"]["method"], "tau-cmc");
    assert!(doc["settings"].get("workers").is_none());
    assert!(doc["report"]["half_width"].as_f64().unwrap() <= 2.0);
}
