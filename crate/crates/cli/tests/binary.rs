use std::path::PathBuf;
use std::process::Command;

fn exe() -> Command {
    Command::new(env!("CARGO_BIN_EXE_sp2brst"))
}

fn models() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models")
}

#[test]
fn exit_status_follows_the_checks() {
    let dir = tempfile::tempdir().unwrap();
    let art = dir.path().join("b.json");
    let out = exe()
        .args(["build", "--order", "3", "--samples", "5", "--out"])
        .arg(&art)
        .arg(models().join("model_b.toml"))
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("PASS  master equation to cutoff"));
    assert!(stdout.lines().last().unwrap().starts_with("summary: {"));

    let out = exe().arg("verify").arg(&art).env("SP2BRST_SEED", "9").output().unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("(100 points, seed 9)"));

    let text = std::fs::read_to_string(&art).unwrap();
    let mutated = dir.path().join("bad.json");
    std::fs::write(&mutated, text.replacen("\"-1\"", "\"-2\"", 1)).unwrap();
    let out = exe().arg("verify").arg(&mutated).output().unwrap();
    assert_eq!(out.status.code(), Some(1));

    let obs = dir.path().join("phi.txt");
    std::fs::write(&obs, "q1 - q2\n").unwrap();
    let out = exe().arg("lift").arg(&art).arg("--observable").arg(&obs).arg("--out").arg(dir.path().join("o.json")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("not first class"));

    let out = exe().arg("identity-suite").arg(models().join("broken_relation.toml")).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("TZ = 0"));
}
