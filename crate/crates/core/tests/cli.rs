use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use polar_scf_sim::harness::{load_ideal_trace, run_ideal_sim, IdealRun};
use polar_scf_sim::polarcode::{CodeSpec, CrcPoly, FrozenSetFile};
use polar_scf_sim::scfdec::ScfConfig;

fn scf_sim(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scf-sim"))
        .args(args)
        .env_remove("SCF_SIM_OUT_DIR")
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = scf_sim(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// Data rows of a CSV artifact, without metadata and header.
fn rows(path: &Path) -> Vec<String> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(str::to_string)
        .collect()
}

fn header(path: &Path) -> String {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .find(|l| !l.starts_with('#'))
        .unwrap()
        .to_string()
}

#[test]
fn construct_writes_loadable_frozen_sets() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["--preset", "paper", "construct", "-o", "a"]);
    let reference = FrozenSetFile::load(&d.join("a/frozen_N1024_k512_r16.txt")).unwrap();
    assert_eq!(reference.frozen.len(), 496);
    assert_eq!(
        reference,
        CodeSpec::construct(1024, 512, CrcPoly::CRC16, 2.365)
            .unwrap()
            .to_frozen_file()
    );

    let small = [
        "--set",
        "code.n=8",
        "--set",
        "code.k=4",
        "--set",
        "code.r=0",
        "--set",
        "code.crc_poly=none",
    ];
    ok(d, &[&small[..], &["construct", "-o", "b"]].concat());
    let path = d.join("b/frozen_N8_k4_r0.txt");
    let first = fs::read(&path).unwrap();
    let f = FrozenSetFile::load(&path).unwrap();
    assert_eq!(f.frozen.len(), 4);

    // save -> load -> save, and rerun idempotence
    let resaved = d.join("resaved.txt");
    f.save(&resaved).unwrap();
    assert_eq!(FrozenSetFile::load(&resaved).unwrap(), f);
    ok(d, &[&small[..], &["construct", "-o", "b"]].concat());
    assert_eq!(fs::read(&path).unwrap(), first);

    // the file feeds back in as an external construction
    let out = ok(
        d,
        &[
            &small[..],
            &[
                "--set",
                "code.frozen_file=resaved.txt",
                "construct",
                "-o",
                "c",
            ],
        ]
        .concat(),
    );
    assert!(out.contains("4 frozen indices"));
    assert_eq!(
        FrozenSetFile::load(&d.join("c/frozen_N8_k4_r0.txt")).unwrap(),
        f
    );
}

#[test]
fn ideal_table_and_trace() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "ideal", "-o", "o", "--frames", "3000", "--snr", "2.25", "--seed", "9",
        ],
    );
    let tav = d.join("o/tav_2.25dB.csv");
    assert_eq!(header(&tav), "tmax,t_av,fer");
    let table = rows(&tav);
    assert_eq!(table.len(), 11);
    assert!(table[0].starts_with("1,1,"));
    let tav_col: Vec<f64> = table
        .iter()
        .map(|r| r.split(',').nth(1).unwrap().parse().unwrap())
        .collect();
    assert!(tav_col.windows(2).all(|w| w[0] <= w[1]));

    // the trace on disk equals an in-process run with the same settings
    let loaded = load_ideal_trace(&d.join("o/ideal_2.25dB.csv")).unwrap();
    let spec = CodeSpec::construct(1024, 512, CrcPoly::CRC16, 2.365).unwrap();
    let direct = run_ideal_sim(
        &spec,
        &ScfConfig::new(11, 0.3),
        &IdealRun::new(2.25, 3000, 9),
    )
    .unwrap();
    assert_eq!(loaded.trace, direct);
    assert_eq!(loaded.meta["config.campaign.seed"], "9");
    assert_eq!(loaded.meta["channel.rate_convention"], "info");
    assert_eq!(
        loaded.meta["code.crc_convention"],
        "init=0,refin=false,refout=false,xorout=0,msb-first"
    );
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let args = [
        "--frames",
        "1500",
        "--snr",
        "2.0,2.25",
        "--upsilon",
        "12/11,9/8,6/5",
    ];
    ok(
        d,
        &[&args[..], &["sweep", "-o", "a", "--workers", "1"]].concat(),
    );
    ok(
        d,
        &[&args[..], &["sweep", "-o", "b", "--workers", "2"]].concat(),
    );
    let mut names: Vec<_> = fs::read_dir(d.join("a"))
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 12);
    for name in &names {
        assert_eq!(
            fs::read(d.join("a").join(name)).unwrap(),
            fs::read(d.join("b").join(name)).unwrap(),
            "{name:?}"
        );
    }
}

#[test]
fn thresholds_and_system_from_traces() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &["ideal", "-o", "o", "--frames", "4000", "--snr", "2.25"],
    );
    let out = ok(
        d,
        &[
            "thresholds",
            "-o",
            "o",
            "--snr",
            "2.25",
            "--upsilon",
            "1.0001,9/8",
        ],
    );
    assert!(out.contains("multi-thr"));
    let th = d.join("o/thresholds.csv");
    assert_eq!(
        header(&th),
        "snr,upsilon,mechanism,t_bal,b_thresholds,t_thresholds"
    );
    let th_rows = rows(&th);
    assert_eq!(th_rows.len(), 4);
    assert!(th_rows.contains(&"2.25,10001/10000,multi-thr,1,99 50 10,0 1 2".to_string()));
    assert!(th_rows.contains(&"2.25,10001/10000,cw-drop,1,99,0".to_string()));

    ok(
        d,
        &[
            "system",
            "-o",
            "o",
            "--trace",
            "o/ideal_2.25dB.csv",
            "--upsilon",
            "9/8",
            "--set",
            "system.occupancy_stride=10",
        ],
    );
    let summary = d.join("o/system_summary.csv");
    assert!(header(&summary).starts_with("snr,upsilon,mechanism,fer,drops,max_occ"));
    let lines = rows(&summary);
    assert_eq!(lines.len(), 2);
    for l in &lines {
        let cols: Vec<&str> = l.split(',').collect();
        assert_eq!(cols[..3], ["2.25", "9/8", cols[2]]);
        assert!(cols[5].parse::<u32>().unwrap() < 100);
        assert_eq!(*cols.last().unwrap(), "ok");
    }
    let occ = d.join("o/occ_2.25dB_u9-8_multi-thr.csv");
    assert_eq!(header(&occ), "time_unit,b_occ");
    assert!(rows(&occ)
        .iter()
        .take(3)
        .map(|r| r.split(',').next().unwrap().to_string())
        .eq(["0", "10", "20"]));
    let words = d.join("o/words_2.25dB_u9-8_cw-drop.csv");
    assert_eq!(header(&words), "s,psi_res,e_prime");
    assert_eq!(rows(&words).len(), 4000);
    let text = fs::read_to_string(&words).unwrap();
    assert!(text.contains("# grid.t_thresholds=0\n"));
    assert!(text.contains("# timing.tau_ch=9\n"));
}

#[test]
fn overflow_is_reported_with_exit_code_3() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["ideal", "-o", "o", "--frames", "2000", "--snr", "1.5"]);
    // a controller that never cuts early cannot keep up at this SNR
    let out = scf_sim(
        d,
        &[
            "system",
            "-o",
            "o",
            "--snr",
            "1.5",
            "--upsilon",
            "12/11",
            "--mechanism",
            "cw-drop",
            "--set",
            "system.b_thresholds=99",
            "--set",
            "system.t_thresholds=11",
        ],
    );
    assert_eq!(out.status.code(), Some(3));
    let lines = rows(&d.join("o/system_summary.csv"));
    assert_eq!(lines.len(), 1);
    assert!(lines[0].contains(",overflow@"), "{}", lines[0]);
}

#[test]
fn configuration_sources_and_errors() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    fs::write(
        d.join("run.cfg"),
        "# small run\ncampaign.frames = 77\ncampaign.seed = 5\nsystem.upsilon = 1.2\n",
    )
    .unwrap();
    let shown = ok(
        d,
        &[
            "--preset",
            "paper",
            "--config",
            "run.cfg",
            "--seed",
            "6",
            "show-config",
        ],
    );
    assert!(shown.contains("campaign.frames = 77\n"));
    assert!(shown.contains("campaign.seed = 6\n"));
    assert!(shown.contains("system.upsilon = 6/5\n"));
    assert!(shown.contains("channel.snr_db = 1.75,1.875,2,2.125,2.25,2.375,2.5\n"));

    let env_out = Command::new(env!("CARGO_BIN_EXE_scf-sim"))
        .args(["show-config"])
        .env("SCF_SIM_OUT_DIR", "from-env")
        .current_dir(d)
        .output()
        .unwrap();
    assert!(String::from_utf8(env_out.stdout)
        .unwrap()
        .contains("output.dir = from-env"));

    for bad in [
        vec!["--set", "code.r=8", "construct"],
        vec!["--set", "bogus.key=1", "construct"],
        vec!["--config", "missing.cfg", "construct"],
        vec!["--upsilon", "1", "thresholds", "--trace", "nope.csv"],
        vec!["--preset", "unknown", "construct"],
    ] {
        assert_eq!(scf_sim(d, &bad).status.code(), Some(2), "{bad:?}");
    }
}
