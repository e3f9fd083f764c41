use std::path::{Path, PathBuf};
use std::process::Command;

use nilgrowth_cli::{parse, CliError};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nilgrowth"))
}

fn scenarios() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn run(args: &[&std::ffi::OsStr]) -> (i32, String) {
    let out = bin().args(args).output().unwrap();
    (out.status.code().unwrap(), String::from_utf8_lossy(&out.stderr).into_owned())
}

fn dir_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    v.sort();
    v
}

#[test]
fn empty_config_exits_2() {
    let tmp = tempfile::tempdir().unwrap();
    for text in ["", "  \n", "{}", "[]"] {
        let cfg = write(tmp.path(), "empty.json", text);
        let (code, err) = run(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), tmp.path().join("o").as_os_str()]);
        assert_eq!(code, 2, "{text:?}: {err}");
        assert!(err.contains("empty") || err.contains("no scenarios"), "{err}");
    }
}

#[test]
fn strict_parsing() {
    let ok = r#"{"name":"b","scenario":{"kind":"bass","group":{"backend":"lattice","rank":2},"generators":[{"lattice":[1,0]}]}}"#;
    assert_eq!(parse(ok).unwrap().len(), 1);
    let extra = ok.replace(r#""name":"b""#, r#""name":"b","colour":1"#);
    assert!(parse(&extra).is_err());
    let inner = ok.replace(r#""kind":"bass""#, r#""kind":"bass","d":3"#);
    assert!(parse(&inner).is_err());
    let kind = ok.replace("bass", "bas");
    assert!(parse(&kind).is_err());
    let name = ok.replace(r#""name":"b""#, r#""name":"../b""#);
    assert!(parse(&name).is_err());
    assert_eq!(parse(&format!("[{ok},{ok}]")).unwrap().len(), 2);
}

#[test]
fn randomized_scenarios_need_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let text = r#"{"name":"g","scenario":{"kind":"gauge","random":{"trials":2,"d_max":3,"delta":0.3}}}"#;
    let cfg = write(tmp.path(), "g.json", text);
    let out = tmp.path().join("o");
    let (code, err) = run(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(code, 2, "{err}");
    assert!(err.contains("seed"));
    let (code, _) = run(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out.as_os_str(), "--seed".as_ref(), "3".as_ref()]);
    assert_eq!(code, 0);
}

#[test]
fn cap_exceeded_exits_3_with_flagged_artifact() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = scenarios().join("acc12_bass_guivarch.json");
    let (code, err) = run(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out.as_os_str(), "--cap".as_ref(), "100".as_ref()]);
    assert_eq!(code, 3, "{err}");
    let art: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("acc12_z2_balls.json")).unwrap()).unwrap();
    assert_eq!(art["truncated"], true);
    // Series up to the cap are kept.
    assert!(!art["report"]["series"]["entries"].as_array().unwrap().is_empty());
    // Scenarios unaffected by the cap still complete.
    assert!(out.join("acc12_ut4.csv").exists());

    let walk = write(
        tmp.path(),
        "walk.json",
        r#"{"name":"w","scenario":{"kind":"mam2","group":{"backend":"lattice","rank":2},
            "measure":[[{"lattice":[1,0]},"1/4"],[{"lattice":[-1,0]},"1/4"],[{"lattice":[0,1]},"1/4"],[{"lattice":[0,-1]},"1/4"]],
            "d":2,"epsilon":0.5,"n":40}}"#,
    );
    let (code, _) = run(&["run".as_ref(), walk.as_os_str(), "--out".as_ref(), out.as_os_str(), "--cap".as_ref(), "50".as_ref()]);
    assert_eq!(code, 3);
    let art: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("w.json")).unwrap()).unwrap();
    assert_eq!(art["truncated"], true);
    assert!(art["error"].as_str().unwrap().contains("cap"));
}

#[test]
fn exit_code_mapping() {
    let s = |e| CliError::Scenario { scenario: "x".into(), source: e };
    assert_eq!(s(nilgrowth::Error::Assertion("x".into())).exit_code(), 4);
    assert_eq!(s(nilgrowth::Error::CapExceeded { cap: 1, reached: 2 }).exit_code(), 3);
    assert_eq!(s(nilgrowth::Error::NotAbelian).exit_code(), 2);
    assert_eq!(CliError::Config { path: "p".into(), msg: "m".into() }.exit_code(), 2);
}

#[test]
fn identical_runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let files = ["acc05_donk.json", "acc07_norm_axioms.json", "acc11_mam.json", "acc13_sandwich.json", "mam2_lazy_walk.json"];
    let mut outputs = Vec::new();
    for (i, jobs) in ["1", "1", "3"].iter().enumerate() {
        let out = tmp.path().join(format!("o{i}"));
        let mut args: Vec<std::ffi::OsString> = vec!["run".into()];
        args.extend(files.iter().map(|f| scenarios().join(f).into_os_string()));
        args.extend(["--out".into(), out.clone().into_os_string(), "--jobs".into(), (*jobs).into()]);
        let status = bin().args(&args).status().unwrap();
        assert!(status.success());
        outputs.push(dir_bytes(&out));
    }
    assert!(outputs[0].len() >= 2 * 10);
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[0], outputs[2]);
}

#[test]
fn donk_trials_override() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = scenarios().join("donk_random.json");
    let (code, err) = run(&["run".as_ref(), cfg.as_os_str(), "--out".as_ref(), out.as_os_str(), "--trials".as_ref(), "200".as_ref()]);
    assert_eq!(code, 0, "{err}");
    let text = std::fs::read_to_string(out.join("donk_random.csv")).unwrap();
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(rdr.headers().unwrap(), vec!["trial", "group", "n", "lhs", "mid", "rhs", "holds"]);
    let rows: Vec<_> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 200);
    assert!(rows.iter().all(|r| &r[6] == "true"));
    assert!(!text.contains('\r'));
}

#[test]
fn plot_series() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let a = scenarios().join("acc02_heisenberg_empirical.json");
    let b = scenarios().join("acc03_abelian_example.json");
    let c = scenarios().join("mam2_lazy_walk.json");
    let (code, err) = run(&["run".as_ref(), a.as_os_str(), b.as_os_str(), c.as_os_str(), "--out".as_ref(), out.as_os_str()]);
    assert_eq!(code, 0, "{err}");

    let csv_of = |args: &[&Path]| {
        let dest = tmp.path().join("plot.csv");
        let mut cmd = bin();
        cmd.arg("plot").args(args).arg("--out").arg(&dest);
        assert!(cmd.status().unwrap().success());
        std::fs::read_to_string(dest).unwrap()
    };
    let profile = csv_of(&[&out.join("acc02_heisenberg_empirical.json")]);
    assert!(profile.starts_with("series,x,y\n"));
    assert_eq!(profile.lines().filter(|l| l.starts_with("log_size,")).count(), 8);
    assert_eq!(profile.lines().filter(|l| l.starts_with("f_pred,")).count(), 8);

    let decay = csv_of(&[&out.join("mam2_lazy_walk.json")]);
    assert_eq!(decay.lines().filter(|l| l.starts_with("log_linf,")).count(), 100);

    let both = csv_of(&[&out.join("acc03_abelian_n4.json"), &out.join("acc02_heisenberg_empirical.json")]);
    assert!(both.lines().any(|l| l.starts_with("acc03_abelian_n4/log_size,")));
    assert!(both.lines().any(|l| l.starts_with("acc02_heisenberg_empirical/log_size,")));

    let (code, _) = run(&["plot".as_ref(), tmp.path().join("missing.json").as_os_str()]);
    assert_ne!(code, 0);
}
