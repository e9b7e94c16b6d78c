use std::fs;
use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_coughscope"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn synth_to(path: &Path, args: &[&str]) {
    let mut full = vec!["synth"];
    full.extend_from_slice(args);
    full.extend_from_slice(&["--out", path.to_str().unwrap()]);
    let out = run(&full);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn synth_writes_pcm16_wav() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("sine.wav");
    synth_to(&wav, &["sine", "--freq", "1000", "--dur", "1"]);
    let clip = coughscope::decode_wav(&wav).unwrap();
    assert_eq!(clip.len(), 22050);
    assert_eq!(clip.sample_rate(), 22050);
    let header = fs::read(&wav).unwrap();
    assert_eq!(&header[..4], b"RIFF");
    assert_eq!(u16::from_le_bytes([header[34], header[35]]), 16);
}

#[test]
fn synth_is_deterministic_and_validates() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    synth_to(&a, &["white_noise", "--seed", "7"]);
    synth_to(&b, &["white_noise", "--seed", "7"]);
    assert_eq!(fs::read(a).unwrap(), fs::read(b).unwrap());

    let out = run(&["synth", "sine", "--freq", "50000"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_writes_stats_and_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a.wav"), dir.path().join("b.wav"));
    synth_to(&a, &["vowel", "--seed", "1", "--dur", "0.3"]);
    synth_to(&b, &["vowel", "--seed", "2", "--dur", "0.3"]);
    let out_dir = dir.path().join("out");
    let out = run(&[
        "analyze", "--group", "speech", "--out", out_dir.to_str().unwrap(),
        a.to_str().unwrap(), b.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stats = fs::read_to_string(out_dir.join("speech.stats.csv")).unwrap();
    assert_eq!(stats.lines().count(), 8);
    assert!(out_dir.join("speech.flux.hist.csv").exists());

    let stdout = String::from_utf8(out.stdout).unwrap();
    let header: Vec<&str> = stdout.lines().nth(1).unwrap().split_whitespace().collect();
    assert_eq!(header, ["Attributes", "min", "max", "Mean", "med_25", "median", "med_75", "Std"]);
    assert!(stdout.contains("Spectral Roll-off (in Hz)"));
}

#[test]
fn analyze_accepts_globs_json_and_series() {
    let dir = tempfile::tempdir().unwrap();
    for s in 0..3 {
        synth_to(&dir.path().join(format!("c{s}.wav")), &["cough_burst", "--seed", &s.to_string(), "--dur", "0.3"]);
    }
    let pattern = dir.path().join("c*.wav");
    let out = run(&[
        "analyze", "--group", "cough", "--format", "json", "--series",
        "--out", dir.path().to_str().unwrap(), pattern.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = coughscope::report::read_group_report(&dir.path().join("cough.report.json")).unwrap();
    assert_eq!(report.clip_count, 3);
    assert!(dir.path().join("cough.series.csv").exists());
}

#[test]
fn analyze_too_short_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("short.wav");
    let clip = coughscope::AudioClip::new(22050, vec![0.1; 100], "short").unwrap();
    coughscope::report::write_wav(&clip, &wav).unwrap();
    let out = run(&["analyze", "--out", dir.path().to_str().unwrap(), wav.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("warning"));

    let out = run(&["analyze", dir.path().join("missing.wav").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["analyze"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn analyze_unwritable_output_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("s.wav");
    synth_to(&wav, &["sine", "--dur", "0.1"]);
    let blocker = dir.path().join("file");
    fs::write(&blocker, b"x").unwrap();
    let out = run(&["analyze", "--out", blocker.join("sub").to_str().unwrap(), wav.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn analyze_twice_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("n.wav");
    synth_to(&wav, &["white_noise", "--seed", "3", "--dur", "0.4"]);
    let mut snapshots = Vec::new();
    for run_dir in ["r1", "r2"] {
        let out_dir = dir.path().join(run_dir);
        for format in ["csv", "json"] {
            let out = run(&["analyze", "--group", "n", "--format", format, "--out", out_dir.to_str().unwrap(), wav.to_str().unwrap()]);
            assert!(out.status.success());
        }
        let mut files: Vec<(String, Vec<u8>)> = fs::read_dir(&out_dir)
            .unwrap()
            .map(|e| {
                let e = e.unwrap();
                (e.file_name().to_string_lossy().into_owned(), fs::read(e.path()).unwrap())
            })
            .collect();
        files.sort();
        snapshots.push(files);
    }
    assert_eq!(snapshots[0], snapshots[1]);
}

#[test]
fn synth_pipes_into_analyze() {
    let dir = tempfile::tempdir().unwrap();
    let wav = bin().args(["synth", "cough_burst", "--seed", "3"]).output().unwrap();
    assert!(wav.status.success());
    let mut child = bin()
        .args(["analyze", "--group", "piped", "--out", dir.path().to_str().unwrap(), "-"])
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(&wav.stdout).unwrap();
    let out = child.wait_with_output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.path().join("piped.stats.csv").exists());
}

#[test]
fn compare_sets_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    for s in 0..2 {
        synth_to(&d.join(format!("cough{s}.wav")), &["cough_burst", "--seed", &s.to_string(), "--dur", "0.3"]);
        synth_to(&d.join(format!("vowel{s}.wav")), &["vowel", "--seed", &s.to_string(), "--dur", "0.3"]);
    }
    let cough_set = format!("cough={}", d.join("cough*.wav").display());
    let vowel_set = format!("vowel={}", d.join("vowel*.wav").display());
    let out_dir = d.join("cmp");
    let out = run(&["compare", "--set", &cough_set, "--set", &vowel_set, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("comparison.orderings.csv").exists());
    assert!(out_dir.join("comparison.json").exists());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.lines().any(|l| l.starts_with("rolloff") && l.contains("cough > vowel")), "{stdout}");

    // same inputs under two labels: every ordering is a tie
    let alias = format!("again={}", d.join("cough*.wav").display());
    let tie_dir = d.join("tie");
    let out = run(&["compare", "--set", &cough_set, "--set", &alias, "--out", tie_dir.to_str().unwrap()]);
    assert!(out.status.success());
    let csv = fs::read_to_string(tie_dir.join("comparison.orderings.csv")).unwrap();
    assert!(csv.lines().skip(1).all(|l| l.split(',').nth(3) == Some("true")), "{csv}");

    // from exported JSON reports, with reference annotations
    let rep_dir = d.join("reports");
    for (label, pat) in [("cough", "cough*.wav"), ("vowel", "vowel*.wav")] {
        let out = run(&[
            "analyze", "--group", label, "--format", "json", "--out", rep_dir.to_str().unwrap(),
            d.join(pat).to_str().unwrap(),
        ]);
        assert!(out.status.success());
    }
    let ref_dir = d.join("ref");
    let out = run(&[
        "compare", "--paper-ranges", "--out", ref_dir.to_str().unwrap(),
        rep_dir.join("cough.report.json").to_str().unwrap(),
        rep_dir.join("vowel.report.json").to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(ref_dir.join("comparison.orderings.csv")).unwrap();
    assert!(csv.lines().next().unwrap().contains("ref_cough_voiced"));
    assert!(String::from_utf8(out.stdout).unwrap().contains("cough_unvoiced=5705"));
}

#[test]
fn compare_needs_two_groups() {
    let dir = tempfile::tempdir().unwrap();
    let wav = dir.path().join("a.wav");
    synth_to(&wav, &["sine", "--dur", "0.1"]);
    let set = format!("only={}", wav.display());
    let out = run(&["compare", "--set", &set, "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}
