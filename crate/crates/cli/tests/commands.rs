use std::path::Path;
use std::process::{Command, Output};

fn rankdiv(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankdiv"))
        .args(args)
        .current_dir(dir)
        .env("RANKDIV_CACHE", dir.join("cache"))
        .output()
        .unwrap()
}

fn table(path: &Path) -> (serde_json::Value, Vec<String>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let head = lines.next().unwrap().strip_prefix("# ").unwrap();
    (serde_json::from_str(head).unwrap(), lines.map(String::from).collect())
}

#[test]
fn bench1d_writes_header_and_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = rankdiv(
        &["bench1d", "--seeds", "3", "--set", "sizes=[500]", "--set", "orders=[8,32]", "-o", "r/b.csv"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (head, rows) = table(&dir.path().join("r/b.csv"));
    assert!(head["version"].as_str().unwrap().starts_with('v'));
    assert_eq!(head["config"]["seeds"], 3);
    assert_eq!(head["config"]["orders"], serde_json::json!([8, 32]));
    assert!(rows[0].starts_with("family,param,kind,K,n,route"));
    assert_eq!(rows.len(), 3);
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bench-sliced", "--seeds", "2", "--set", "sizes=[400]", "--set", "slices=8", "-o", "s.csv"];
    let first = rankdiv(&args, dir.path());
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let a = std::fs::read(dir.path().join("s.csv")).unwrap();
    assert!(rankdiv(&args, dir.path()).status.success());
    assert_eq!(a, std::fs::read(dir.path().join("s.csv")).unwrap());
    let other = rankdiv(
        &["bench-sliced", "--seeds", "2", "--set", "sizes=[400]", "--set", "slices=8", "--base-seed", "1", "-o", "s.csv"],
        dir.path(),
    );
    assert!(other.status.success());
    assert_ne!(a, std::fs::read(dir.path().join("s.csv")).unwrap());
}

#[test]
fn config_file_then_flags() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("c.toml"),
        "experiment = \"rates\"\nfamily = \"laplace\"\nparams = [1.0]\nkinds = [\"js\"]\norders = [16, 32, 64]\noutput = \"x.csv\"\n",
    )
    .unwrap();
    let out = rankdiv(&["rates", "-c", "c.toml", "--set", "orders=[16,64]", "-o", "y.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(!dir.path().join("x.csv").exists());
    let (head, rows) = table(&dir.path().join("y.csv"));
    assert_eq!(head["config"]["family"], "laplace");
    assert_eq!(rows.len(), 3);
    assert!(rows[1].starts_with("laplace,1.0,js,16,"));
}

#[test]
fn bad_configuration_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["bench1d", "--set", "sedes=3"][..],
        &["bench1d", "--seeds", "0"],
        &["kl-vs-n", "--set", "kinds=[\"js\"]"],
        &["transport", "--set", "generator=\"tv\""],
        &["bounds", "--set", "delta=1.5"],
    ] {
        let out = rankdiv(args, dir.path());
        assert_eq!(out.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
    std::fs::write(dir.path().join("c.toml"), "experiment = \"rates\"\n").unwrap();
    assert_eq!(rankdiv(&["bench1d", "-c", "c.toml"], dir.path()).status.code(), Some(2));
}

#[test]
fn estimate_reads_sample_files() {
    let dir = tempfile::tempdir().unwrap();
    let one: String = (0..200).map(|i| format!("{}\n", (i as f64 * 0.37).sin())).collect();
    let two: String = (0..150).map(|i| format!("{}\n", 0.5 + (i as f64 * 0.91).cos())).collect();
    std::fs::write(dir.path().join("a.csv"), format!("x\n{one}")).unwrap();
    std::fs::write(dir.path().join("b.csv"), two).unwrap();
    let out = rankdiv(
        &["estimate", "--mu", "a.csv", "--nu", "b.csv", "--set", "kinds=[\"tv\",\"kl\"]", "--set", "orders=[16]"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert!(rows[0].starts_with("kind,K,route,dim,n_mu,n_nu,method"));
    assert!(rows[1].starts_with("tv,16,hard,1,200,150,univariate"));
    assert_eq!(rows.len(), 3);

    let planar: String = (0..100).map(|i| format!("{},{}\n", i % 7, i % 11)).collect();
    std::fs::write(dir.path().join("p.csv"), &planar).unwrap();
    let out = rankdiv(&["estimate", "--mu", "p.csv", "--nu", "a.csv"], dir.path());
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn transport_writes_snapshots_and_trace() {
    let dir = tempfile::tempdir().unwrap();
    let out = rankdiv(
        &[
            "transport", "--set", "particles=200", "--set", "reference_size=200", "--set", "steps=6",
            "--set", "snapshots=[0,3,6]", "-o", "t",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("t"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(
        names,
        ["two-blobs_step_0.csv", "two-blobs_step_3.csv", "two-blobs_step_6.csv", "two-blobs_trace.csv"]
    );
    let (_, trace) = table(&dir.path().join("t/two-blobs_trace.csv"));
    assert_eq!(trace.len(), 8);
}

#[test]
fn shipped_configs_resolve() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut seen = 0;
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let text = std::fs::read_to_string(&path).unwrap();
        let kind: rankdiv_cli::ExperimentKind = toml::from_str::<toml::Table>(&text).unwrap()["experiment"]
            .clone()
            .try_into()
            .unwrap();
        rankdiv_cli::ExperimentConfig::resolve(kind, Some(&path), &[])
            .unwrap_or_else(|e| panic!("{}: {e}", path.display()));
        seen += 1;
    }
    assert!(seen >= 10);
}
