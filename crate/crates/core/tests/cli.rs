use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn multirisk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_multirisk"))
        .args(args)
        .env("MULTIRISK_THREADS", "2")
        .output()
        .unwrap()
}

fn generate(dir: &Path, days: &str) -> (String, String, String) {
    let out = dir.join("data");
    let o = multirisk(&[
        "generate",
        "--banks",
        "30",
        "--seed",
        "7",
        "--days",
        days,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let p = |f: &str| out.join(f).to_str().unwrap().to_string();
    (
        p("exposures.csv"),
        p("capitals.csv"),
        p("probabilities.csv"),
    )
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn el_syst_has_one_row_per_date() {
    let dir = TempDir::new().unwrap();
    let (e, c, p) = generate(dir.path(), "3");
    let text = stdout(&multirisk(&[
        "el-syst",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--pd",
        &p,
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 4);
    assert!(lines[0].starts_with("date,bank_count,total_value,method,el_syst,el_approx,el_exact"));
    assert!(lines[1].starts_with("2013-01-02,30,"));
    assert!(lines[1].contains(",approx,"));

    let small = stdout(&multirisk(&[
        "el-syst",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--pd",
        "0.05",
        "--from",
        "2013-01-03",
        "--to",
        "2013-01-03",
    ]));
    assert_eq!(small.lines().count(), 2);
    assert!(small.lines().nth(1).unwrap().starts_with("2013-01-03,"));
}

#[test]
fn small_networks_get_the_exact_loss() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("small");
    let o = multirisk(&[
        "generate",
        "--banks",
        "8",
        "--seed",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let f = |n: &str| out.join(n).to_str().unwrap().to_string();
    let text = stdout(&multirisk(&[
        "el-syst",
        "--exposures",
        &f("exposures.csv"),
        "--capitals",
        &f("capitals.csv"),
        "--pd",
        &f("probabilities.csv"),
    ]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[3], "exact");
    let (exact, approx): (f64, f64) = (row[6].parse().unwrap(), row[5].parse().unwrap());
    assert!(approx >= exact && approx <= 1.1 * exact, "{approx} {exact}");
}

#[test]
fn marginal_and_stats_shapes() {
    let dir = TempDir::new().unwrap();
    let (e, c, _) = generate(dir.path(), "1");
    let m = stdout(&multirisk(&[
        "marginal",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--pd",
        "0.01",
    ]));
    let exposures = std::fs::read_to_string(&e).unwrap().lines().count();
    assert_eq!(m.lines().count(), exposures);
    assert_eq!(
        m.lines().next().unwrap(),
        "date,layer,debtor,creditor,amount,d_el_syst,d_el_credit,d_el_syst_clamped"
    );

    let s = stdout(&multirisk(&["stats", "--exposures", &e, "--capitals", &c]));
    assert_eq!(s.lines().count(), 1 + 6);
    assert!(s.lines().next().unwrap().contains("jaccard,jaccard_sig"));

    let only = stdout(&multirisk(&[
        "stats",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--layers",
        "dl,fx",
        "--replicates",
        "0",
    ]));
    assert_eq!(only.lines().count(), 2);
}

#[test]
fn profile_reports_margin() {
    let dir = TempDir::new().unwrap();
    let (e, c, _) = generate(dir.path(), "1");
    let out = dir.path().join("profile.json");
    let o = multirisk(&[
        "profile",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let entries = v[0]["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 30);
    assert!(entries
        .iter()
        .all(|e| e["margin"].as_f64().unwrap() >= -1e-9));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (e, c, p) = generate(dir.path(), "2");
    let again = TempDir::new().unwrap();
    let (e2, _, _) = generate(again.path(), "2");
    assert_eq!(std::fs::read(&e).unwrap(), std::fs::read(&e2).unwrap());

    let commands: Vec<Vec<&str>> = vec![
        vec!["debtrank", "--exposures", &e, "--capitals", &c],
        vec!["profile", "--exposures", &e, "--capitals", &c],
        vec![
            "el-syst",
            "--exposures",
            &e,
            "--capitals",
            &c,
            "--pd",
            &p,
            "--format",
            "json",
        ],
        vec!["marginal", "--exposures", &e, "--capitals", &c, "--pd", &p],
        vec!["stats", "--exposures", &e, "--capitals", &c, "--seed", "3"],
        vec![
            "nullmodel",
            "--exposures",
            &e,
            "--capitals",
            &c,
            "--replicates",
            "100",
            "--seed",
            "3",
        ],
        vec![
            "fit",
            "--exposures",
            &e,
            "--replicates",
            "50",
            "--seed",
            "3",
        ],
    ];
    for args in commands {
        let a = multirisk(&args);
        let b = Command::new(env!("CARGO_BIN_EXE_multirisk"))
            .args(&args)
            .env("MULTIRISK_THREADS", "7")
            .output()
            .unwrap();
        assert!(
            a.status.success(),
            "{args:?}: {}",
            String::from_utf8_lossy(&a.stderr)
        );
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    let (e, c, _) = generate(dir.path(), "1");

    let bad = dir.path().join("bad.csv");
    std::fs::write(
        &bad,
        "date,layer,debtor,creditor,amount\n2013-01-02,dl,A,B,1\n2013-01-02,dl,A,B,-1\n",
    )
    .unwrap();
    let o = multirisk(&[
        "profile",
        "--exposures",
        bad.to_str().unwrap(),
        "--capitals",
        &c,
    ]);
    assert_eq!(o.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&o.stderr);
    assert!(msg.contains("bad.csv:3"), "{msg}");

    // 30 banks with the exact method and a cap of 10 is a computation error
    let o = multirisk(&[
        "marginal",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--pd",
        "0.01",
        "--exact",
        "--exact-cap",
        "10",
    ]);
    assert_eq!(o.status.code(), Some(2));

    let o = multirisk(&[
        "debtrank",
        "--exposures",
        &e,
        "--capitals",
        &c,
        "--psi",
        "1.5",
    ]);
    assert_ne!(o.status.code(), Some(0));
    let o = multirisk(&["debtrank", "--exposures", &e]);
    assert_ne!(o.status.code(), Some(0));
}

#[test]
fn fit_from_samples_file() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("x.csv");
    let mut body = String::from("value\n");
    for k in 1..=200 {
        body.push_str(&format!("{}\n", 1.0 / (k as f64 / 201.0).powf(1.0 / 1.5)));
    }
    std::fs::write(&path, body).unwrap();
    let text = stdout(&multirisk(&[
        "fit",
        "--samples",
        path.to_str().unwrap(),
        "--xmin",
        "1",
        "--replicates",
        "0",
    ]));
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    let alpha: f64 = row[5].parse().unwrap();
    assert!((alpha - 2.5).abs() < 0.2, "{alpha}");
}
