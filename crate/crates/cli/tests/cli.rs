use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_concentrate"));
    c.env_remove("CONCENTRATE_THREADS");
    c
}

fn write(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

struct Fixture {
    _dir: tempfile::TempDir,
    path: PathBuf,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().to_owned();
        write(&path, "p.json", r#"{"values": [0.75, 0.25]}"#);
        write(&path, "q.json", r#"{"values": [0.7, 0.3]}"#);
        write(&path, "flat.json", r#"{"entries": [[0.4, 1], [0.3, 2]]}"#);
        write(&path, "levels.json", "[[0, 1], [1, 1]]");
        write(&path, "mgf.json", r#"{"family": "bernoulli", "q": 0.3}"#);
        Fixture { _dir: dir, path }
    }

    fn file(&self, name: &str) -> String {
        self.path.join(name).to_str().unwrap().to_owned()
    }
}

#[test]
fn protocol_smoke() {
    let f = Fixture::new();
    let o = run(&["protocol", "--spectrum", &f.file("q.json"), "--x", "0.5"]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["size"], 1);
    assert!((v["failure"].as_f64().unwrap() - 0.2).abs() < 1e-12);

    let o = run(&["protocol", "--spectrum", &f.file("q.json"), "--size", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["dflec"]["fidelity"].as_f64().unwrap() - 0.958_257_569_495_584).abs() < 1e-12);
}

#[test]
fn rates_sweep_has_31_rows() {
    let f = Fixture::new();
    let out = f.file("out.csv");
    let o = run(&["rates", "--iid", &f.file("p.json"), "--formula", "fail", "--sweep", "0.0:0.3:0.01", "--csv", &out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "formula,x,value");
    assert_eq!(lines.len() - 1, 31);
    assert!(lines[6].starts_with("fail,0.05,0.4227497"));
}

#[test]
fn malformed_json_exits_2_with_position() {
    let f = Fixture::new();
    let bad = write(&f.path, "bad.json", "{\"values\": [0.5,\n 0.5");
    let o = run(&["protocol", "--spectrum", bad.to_str().unwrap(), "--x", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2"), "{err}");
}

#[test]
fn exit_codes() {
    let f = Fixture::new();
    let o = run(&["protocol", "--spectrum", &f.file("q.json"), "--size", "3"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rates", "--iid", &f.file("p.json"), "--formula", "fail", "--r", "-0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(&["rates", "--iid", &f.file("p.json"), "--formula", "fail", "--sweep", "0.3:0.1:0.1"]);
    assert_eq!(o.status.code(), Some(2));
    let big = write(&f.path, "big.json", r#"{"values": [0.01,0.03,0.05,0.07,0.09,0.11,0.13,0.15,0.17,0.19]}"#);
    let o = run(&["spectrum-rates", "--iid", big.to_str().unwrap(), "--n", "400", "--a", "1.0"]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    let o = run(&["thermal", "--levels", &f.file("levels.json"), "--beta0", "1", "--r", "-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let f = Fixture::new();
    let cases: Vec<Vec<String>> = vec![
        vec!["spectrum-rates", "--iid", &f.file("p.json"), "--n", "10:200:10", "--a", "0.2:1.2:0.05", "--quantity", "zeta_c"],
        vec!["rates", "--iid", &f.file("p.json"), "--formula", "succ-d", "--sweep", "0:0.5:0.01"],
        vec!["protocol", "--spectrum", &f.file("flat.json"), "--size", "2", "--oracle"],
        vec!["selftest"],
    ]
    .into_iter()
    .map(|c| c.into_iter().map(String::from).collect())
    .collect();
    for args in &cases {
        let a = bin().args(args).output().unwrap();
        let b = bin().args(args).env("CONCENTRATE_THREADS", "1").output().unwrap();
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn csv_headers() {
    let f = Fixture::new();
    let header = |args: &[&str]| {
        let o = run(args);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        stdout(&o).lines().next().unwrap().to_owned()
    };
    let p = f.file("p.json");
    assert_eq!(header(&["protocol", "--spectrum", &p, "--sweep", "0.1:0.9:0.1", "--csv", "-"]), "x,size,failure,fidelity");
    assert_eq!(
        header(&["spectrum-rates", "--iid", &p, "--n", "10:30:10", "--a", "0.5", "--quantity", "K", "--csv", "-"]),
        "n,a,quantity,value"
    );
    assert_eq!(
        header(&["spectrum-rates", "--iid", &p, "--n", "10:30:10", "--a", "0.5", "--fit", "--csv", "-"]),
        "a,quantity,slope,intercept,residual"
    );
    assert_eq!(header(&["rates", "--iid", &p, "--formula", "zeta", "--sweep", "0.6:0.8:0.1", "--csv", "-"]), "formula,x,value");
    assert_eq!(
        header(&["thermal", "--levels", &f.file("levels.json"), "--beta0", "1", "--sweep", "0:0.2:0.1", "--csv", "-"]),
        "beta0,r,b_const,h_minus,h_plus,failure_exponent,success_exponent_pflec,success_exponent_dflec,r_half"
    );
    assert_eq!(
        header(&["ldp", "--mgf", &f.file("mgf.json"), "--sweep", "0:1:0.25", "--csv", "-"]),
        "a,rate,upper_ge,upper_gt,lower_le,lower_lt,domain_limited"
    );
}

#[test]
fn majorize_and_randomness() {
    let f = Fixture::new();
    let o = run(&["majorize", "--source", &f.file("flat.json"), "--target", &f.file("q.json")]);
    assert!(stdout(&o).starts_with("convertible"));
    let o = run(&["majorize", "--source", &f.file("q.json"), "--target", &f.file("flat.json")]);
    assert!(stdout(&o).starts_with("not convertible"));
    assert!(stdout(&o).contains("k = 1"));

    let o = run(&["randomness", "--spectrum", &f.file("q.json"), "--M", "2"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!((v["epsilon"].as_f64().unwrap() - 0.021_093_687_069_296_7).abs() < 1e-12);
    assert!((v["fidelity"].as_f64().unwrap() - v["dflec_fidelity"].as_f64().unwrap()).abs() < 1e-9);

    let o = run(&["randomness", "--spectrum", &f.file("flat.json"), "--M", "2", "--greedy"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["map"]["assignment"], serde_json::json!([1, 2, 2]));
    let map = write(&f.path, "map.json", r#"{"M": 2, "assignment": [1, 2, 2]}"#);
    let o = run(&["randomness", "--spectrum", &f.file("flat.json"), "--M", "2", "--map", map.to_str().unwrap()]);
    let w: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["epsilon"], w["epsilon"]);
    let o = run(&["randomness", "--spectrum", &f.file("flat.json"), "--M", "2"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn bits_flag_converts_rates() {
    let f = Fixture::new();
    let get = |extra: &[&str]| {
        let p = f.file("p.json");
        let mut args = vec!["rates", "--iid", &p, "--formula", "const", "--eps", "0.1"];
        args.extend_from_slice(extra);
        let o = run(&args);
        let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
        v["value"].as_f64().unwrap()
    };
    let nats = get(&[]);
    let bits = get(&["--bits"]);
    assert!((bits * std::f64::consts::LN_2 - nats).abs() < 1e-12);
    assert!((bits - 0.811_278_124_459_132_8).abs() < 1e-5);
}

#[test]
fn selftest_passes() {
    let o = run(&["selftest", "--seed", "7"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("all 10 checks passed"));
}
