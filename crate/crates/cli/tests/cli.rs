use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spikescan"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// 96 months from 2005-01 with a clear spike at 2006-07.
fn count_file(dir: &Path) -> std::path::PathBuf {
    let mut text = String::from("month,count,population\n");
    for i in 0..96 {
        let (y, m) = (2005 + i / 12, 1 + i % 12);
        let base = 140 + ((i * 37) % 23) as i64 - 11;
        let count = if i == 18 { base + 90 } else { base };
        text.push_str(&format!("{y}-{m:02},{count},400000\n"));
    }
    let p = dir.join("city.csv");
    fs::write(&p, text).unwrap();
    p
}

#[test]
fn detect_reports_inserted_month_for_every_method() {
    let dir = tempfile::tempdir().unwrap();
    let input = count_file(dir.path());
    let o = run(
        &["detect", input.to_str().unwrap(), "--method", "all", "--out", "out"],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let report = fs::read_to_string(dir.path().join("out/spikes.csv")).unwrap();
    let lines: Vec<&str> = report.lines().collect();
    assert_eq!(lines[0], "series,method,months");
    assert_eq!(lines.len(), 5);
    for (line, method) in lines[1..].iter().zip(["arima", "kalman", "wavelet", "ao"]) {
        assert!(line.starts_with(&format!("city,{method},")), "{line}");
        assert!(line.contains("2006-07"), "{line}");
    }
    for method in ["arima", "kalman", "wavelet", "ao"] {
        let plot = fs::read_to_string(dir.path().join(format!("out/plot_city_{method}.csv"))).unwrap();
        let mut rows = plot.lines();
        assert_eq!(rows.next().unwrap(), "time,observed,fitted,residual,spike_flag");
        let spike_row = plot.lines().find(|l| l.starts_with("2006-07,")).unwrap();
        assert!(spike_row.ends_with(",1"), "{spike_row}");
        assert_eq!(plot.lines().count(), 97);
    }
}

#[test]
fn detect_structured_output() {
    let dir = tempfile::tempdir().unwrap();
    let input = count_file(dir.path());
    let o = run(
        &[
            "detect",
            input.to_str().unwrap(),
            "--method",
            "kalman",
            "--format",
            "structured",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let json = fs::read_to_string(dir.path().join("o/spikes.json")).unwrap();
    assert!(json.contains("\"2006-07\""), "{json}");
    assert!(dir.path().join("o/plot_city_kalman.json").exists());
}

#[test]
fn unparseable_input_fails_with_line_number() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.csv"), "month,rate\n2005-01,3.1\n2005-02,x\n").unwrap();
    let o = run(&["detect", "bad.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));
}

#[test]
fn rates_reproduce_hand_computation() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("month,count,population\n");
    let mut expected = String::from("month,rate\n");
    for i in 0..96u64 {
        let (y, m) = (2005 + i / 12, 1 + i % 12);
        let count = 100 + i * 3;
        let pop = 400_000 + i * 1000;
        text.push_str(&format!("{y}-{m:02},{count},{pop}\n"));
        expected.push_str(&format!("{y}-{m:02},{}\n", 100_000.0 * count as f64 / pop as f64));
    }
    fs::write(dir.path().join("c.csv"), &text).unwrap();
    let o = run(&["rates", "c.csv"], dir.path());
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(String::from_utf8(o.stdout).unwrap(), expected);
    assert!(expected.contains("2005-01,25\n"));
}

#[test]
fn rates_detect_gaps() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("g.csv"),
        "month,count,population\n2005-01,35,100000\n2005-02,40,100000\n2005-04,41,100000\n",
    )
    .unwrap();
    let o = run(&["rates", "g.csv"], dir.path());
    assert!(!o.status.success());
    assert!(stderr(&o).contains("missing months: 2005-03"), "{}", stderr(&o));
}

#[test]
fn fixtures_lists_nine_generators() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["fixtures"], dir.path());
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert_eq!(text.lines().count(), 10);
    assert!(text.contains("los_angeles") && text.contains("ARIMA(4,1,2)"));
}

#[test]
fn unknown_generator_lists_fixtures() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["simulate", "--generator", "gotham", "--reps", "1"], dir.path());
    assert!(!o.status.success());
    let e = stderr(&o);
    assert!(
        e.contains("gotham") && e.contains("berkeley") && e.contains("san_diego"),
        "{e}"
    );
}

#[test]
fn simulate_shape_and_determinism() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str, threads: &'static str| {
        vec![
            "simulate",
            "--generator",
            "los_angeles",
            "--magnitudes",
            "50",
            "--counts",
            "1..10",
            "--reps",
            "3",
            "--seed",
            "7",
            "--method",
            "kalman",
            "--threads",
            threads,
            "--out",
            out,
        ]
    };
    let a = run(&args("a", "1"), dir.path());
    assert!(a.status.success(), "{}", stderr(&a));
    assert!(String::from_utf8_lossy(&a.stdout).contains("seed: 7"));
    let b = run(&args("b", "3"), dir.path());
    assert!(b.status.success(), "{}", stderr(&b));
    for f in ["simulation.csv", "simulation.json"] {
        let x = fs::read(dir.path().join("a").join(f)).unwrap();
        let y = fs::read(dir.path().join("b").join(f)).unwrap();
        assert_eq!(x, y, "{f} differs");
    }
    let csv = fs::read_to_string(dir.path().join("a/simulation.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
}

#[test]
fn simulate_from_generator_file() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("gen.csv"),
        "name,label,d,ar,ma,mean,sd\ntoy,Toy,0,0.2,,40,4\n",
    )
    .unwrap();
    let o = run(
        &[
            "simulate",
            "--generator",
            "gen.csv",
            "--magnitudes",
            "30",
            "--counts",
            "2",
            "--reps",
            "2",
            "--seed",
            "1",
            "--method",
            "wavelet",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("simulation.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("toy,wavelet,0.3,2,2,"));
}
