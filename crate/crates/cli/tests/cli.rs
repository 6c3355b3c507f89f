use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use fasep_core::experiments::strip_metadata;

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("fasep-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    fs::create_dir_all(&d).unwrap();
    d
}

fn fasep(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fasep")).args(args).output().unwrap()
}

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = strip_metadata(&fs::read_to_string(dir.join("summary.csv")).unwrap());
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("name,target,estimate,stderr,pass"));
    lines.map(|l| l.rsplitn(5, ',').map(|f| f.trim_matches('"').to_string()).collect()).collect()
}

#[test]
fn intertwine_is_reproducible_and_exit_code_matches_summary() {
    let base = scratch("intertwine");
    let (a, b) = (base.join("a"), base.join("b"));
    let oa = fasep(&["intertwine", "--replicas", "200", "--seed", "9", "--out", a.to_str().unwrap()]);
    let ob = fasep(&["intertwine", "--replicas", "200", "--seed", "9", "--threads", "1", "--out", b.to_str().unwrap()]);
    assert_ne!(oa.status.code(), Some(2), "{}", String::from_utf8_lossy(&oa.stderr));
    assert_eq!(oa.status.code(), ob.status.code());
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(!names.is_empty());
    for n in &names {
        let ta = fs::read_to_string(a.join(n)).unwrap();
        let tb = fs::read_to_string(b.join(n)).unwrap();
        assert_eq!(strip_metadata(&ta), strip_metadata(&tb), "{n:?}");
    }
    let rows = summary_rows(&a);
    assert!(!rows.is_empty());
    let all_pass = rows.iter().all(|r| r[0] == "true");
    assert_eq!(oa.status.code(), Some(if all_pass { 0 } else { 1 }));
    let stdout = String::from_utf8_lossy(&oa.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS ") || l.starts_with("FAIL ")).count(), rows.len());
    let _ = fs::remove_dir_all(base);
}

#[test]
fn config_overlay_and_plot() {
    let base = scratch("overlay");
    let cfg = base.join("small.toml");
    fs::write(&cfg, "epsilon = [0.4, 0.3]\nu = [1.0]\nreplicas = 200\n[first_moment]\nmc_epsilon = [0.4]\n").unwrap();
    let out = base.join("out");
    let o = fasep(&["first-moment", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let svgs: Vec<PathBuf> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "svg"))
        .collect();
    assert!(!svgs.is_empty());
    for p in svgs {
        roxmltree::Document::parse(&fs::read_to_string(&p).unwrap()).unwrap();
    }
    let rows = summary_rows(&out);
    assert!(rows.iter().any(|r| r[4].starts_with("mc-vs-exact[eps=0.4")));
    assert!(rows.iter().all(|r| !r[4].contains("eps=0.2")));
    let _ = fs::remove_dir_all(base);
}

#[test]
fn bad_input_exits_with_two() {
    let base = scratch("bad");
    let wrong_kind = base.join("wrong.toml");
    fs::write(&wrong_kind, "experiment = \"martingale\"\n").unwrap();
    let garbage = base.join("garbage.toml");
    fs::write(&garbage, "replicas = \"lots\"\n").unwrap();
    let out = base.join("out");
    let o = out.to_str().unwrap();
    for args in [
        vec!["first-moment", "--config", wrong_kind.to_str().unwrap(), "--out", o],
        vec!["first-moment", "--config", garbage.to_str().unwrap(), "--out", o],
        vec!["first-moment", "--config", "/nonexistent/x.toml", "--out", o],
    ] {
        let r = fasep(&args);
        assert_eq!(r.status.code(), Some(2), "{args:?}");
        assert!(String::from_utf8_lossy(&r.stderr).contains("error"));
    }
    assert!(!fasep(&["no-such-experiment"]).status.success());
    let _ = fs::remove_dir_all(base);
}

#[test]
fn near_eq_accepts_negative_b() {
    let base = scratch("neareq");
    let cfg = base.join("c.toml");
    fs::write(&cfg, "epsilon = [0.4]\nreplicas = 4\n").unwrap();
    let out = base.join("out");
    let o = fasep(&["near-eq", "--b", "-0.5", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_ne!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = summary_rows(&out);
    assert!(rows.iter().any(|r| r[4] == "rho-half-at-B=-1/2" && r[0] == "true"));
    let _ = fs::remove_dir_all(base);
}
