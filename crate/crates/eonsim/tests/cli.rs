use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn eonsim(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eonsim"))
        .arg("--network")
        .arg(fixture("nsfnet.json"))
        .arg("--routes")
        .arg(fixture("nsfnet_routes.json"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

#[test]
fn writes_one_row_per_load_in_ascending_order() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("ff.dat");
    let res = eonsim(
        &[
            "--algorithm",
            "FF",
            "--goal",
            "3000",
            "--lambda",
            "180,18,90",
            "--mu",
            "10",
            "--progress",
            "1000",
        ],
        &out,
    );
    assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
    let dat = std::fs::read_to_string(&out).unwrap();
    let erl: Vec<&str> = dat.lines().map(|l| l.split(' ').next().unwrap()).collect();
    assert_eq!(erl, ["1.8", "9", "18"]);
    for line in dat.lines() {
        let (_, bp) = line.split_once(' ').unwrap();
        assert!((0.0..=1.0).contains(&bp.parse::<f64>().unwrap()));
    }

    let console = String::from_utf8(res.stdout).unwrap();
    assert_eq!(
        console.lines().filter(|l| l.starts_with("start algorithm=FF ")).count(),
        3
    );
    assert_eq!(console.lines().filter(|l| l.starts_with("progress ")).count(), 9);
    assert_eq!(console.lines().filter(|l| l.starts_with("summary ")).count(), 3);
    assert!(console.contains("seeds=12345,12347,12349,12351,12353"));
}

#[test]
fn identical_invocations_write_identical_tables() {
    let dir = tempfile::tempdir().unwrap();
    let bpsk = fixture("bit_rates_bpsk.json");
    let args = [
        "--algorithm",
        "FLF",
        "--goal",
        "5000",
        "--lambda",
        "90,180",
        "--mu",
        "10",
        "--bitrates",
        bpsk.to_str().unwrap(),
        "--max-routes",
        "1",
        "--threads",
        "1",
    ];
    let a = dir.path().join("a.dat");
    let b = dir.path().join("b.dat");
    assert!(eonsim(&args, &a).status.success());
    assert!(eonsim(&args, &b).status.success());
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

#[test]
fn seeds_and_flags_are_accepted() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.dat");
    let res = eonsim(
        &[
            "--algorithm",
            "EF",
            "--goal",
            "500",
            "--lambda",
            "36",
            "--mu",
            "10",
            "--seed-arrival",
            "1",
            "--seed-departure",
            "2",
            "--seed-source",
            "3",
            "--seed-destination",
            "4",
            "--seed-bitrate",
            "5",
            "--no-strict-audit",
            "--per-bitrate",
        ],
        &out,
    );
    assert!(res.status.success());
    let console = String::from_utf8(res.stdout).unwrap();
    assert!(console.contains("seeds=1,2,3,4,5"));
    assert_eq!(console.lines().filter(|l| l.starts_with("bitrate ")).count(), 5);
}

#[test]
fn bad_input_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.dat");

    let res = eonsim(
        &["--algorithm", "BF", "--goal", "10", "--lambda", "18", "--mu", "10"],
        &out,
    );
    assert_eq!(res.status.code(), Some(2));

    let res = eonsim(
        &["--algorithm", "FF", "--goal", "10", "--lambda", "18", "--mu", "0"],
        &out,
    );
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("eonsim:"));

    let res = eonsim(
        &[
            "--algorithm",
            "FF",
            "--goal",
            "10",
            "--lambda",
            "18",
            "--mu",
            "10",
            "--flf-threshold",
            "40",
        ],
        &out,
    );
    assert_eq!(res.status.code(), Some(1));

    let broken = dir.path().join("broken.json");
    std::fs::write(
        &broken,
        r#"{"10": [{"modulation": "BPSK", "slots": "one", "reach": 5520}]}"#,
    )
    .unwrap();
    let res = eonsim(
        &[
            "--algorithm",
            "FF",
            "--goal",
            "10",
            "--lambda",
            "18",
            "--mu",
            "10",
            "--bitrates",
            broken.to_str().unwrap(),
        ],
        &out,
    );
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("10[0].slots"));
    assert!(!out.exists());
}
