use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn snxp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_snxp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = snxp(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn table(path: &Path) -> (Vec<String>, Vec<Vec<f64>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines
        .map(|l| l.split(',').map(|c| c.parse().unwrap_or(f64::NAN)).collect())
        .collect();
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<f64>], name: &str) -> Vec<f64> {
    let i = header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i]).collect()
}

fn local_maxima(v: &[f64]) -> usize {
    v.windows(3).filter(|w| w[1] > w[0] && w[1] > w[2]).count()
}

#[test]
fn spectrum_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let p = |s: &str| dir.path().join(s);
    let path = |s: &str| p(s).to_str().unwrap().to_string();
    ok(&["spectrum", "--out", &path("thick"), "--thickness", "126.3", "--chopper-open", "0"]);
    ok(&["spectrum", "--out", &path("thin"), "--thickness", "1", "--chopper-open", "0"]);
    ok(&["spectrum", "--out", &path("empty"), "--thickness", "0"]);

    let (h, r) = table(&p("thick").join("spectrum.csv"));
    assert_eq!(h, ["detuning", "foil_abs", "foil_phase", "pulse_abs", "pulse_phase"]);
    let thick = column(&h, &r, "pulse_abs");
    let (h2, r2) = table(&p("thin").join("spectrum.csv"));
    let thin = column(&h2, &r2, "pulse_abs");
    // The thin foil peaks on resonance; the saturated thick foil is flat
    // there and peaks in two symmetric humps on either side.
    let d = column(&h, &r, "detuning");
    let argmax = |v: &[f64]| (0..v.len()).max_by(|&a, &b| v[a].total_cmp(&v[b])).unwrap();
    assert_eq!(local_maxima(&thin), 1);
    assert!(d[argmax(&thin)].abs() < 0.1);
    let peak = d[argmax(&thick)].abs();
    assert!(peak > 1.0, "thick foil peak at {peak}");
    let mirrored = thick.iter().zip(thick.iter().rev()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(mirrored < 1e-9);
    let centre = thick.len() / 2;
    assert!((thick[centre] - 1.0).abs() < 1e-6, "saturated absorption on resonance");

    // Without a chopper delay the pulse is T_foil − 1.
    let foil = column(&h, &r, "foil_abs");
    let phase = column(&h, &r, "foil_phase");
    for ((a, ph), pulse) in foil.iter().zip(&phase).zip(&thick) {
        let re = a * ph.cos() - 1.0;
        let im = a * ph.sin();
        assert!((re.hypot(im) - pulse).abs() < 1e-12);
    }

    let (h, r) = table(&p("empty").join("spectrum.csv"));
    assert!(column(&h, &r, "foil_abs").iter().all(|&a| (a - 1.0).abs() < 1e-15));
    assert!(column(&h, &r, "pulse_abs").iter().all(|&a| a == 0.0));
    assert!(p("thick").join("time.csv").exists());
    assert!(p("thick").join("run.toml").exists());
}

#[test]
fn chopper_time_and_frequency_files_agree() {
    // Parseval (unitary convention): spectral and temporal energy of the
    // gated pulse match.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&[
        "spectrum", "--out", out, "--thickness", "10", "--chopper-open", "0.05", "--span", "4000",
        "--points", "160001", "--time-max", "8", "--time-points", "80001",
    ]);
    let (h, r) = table(&dir.path().join("spectrum.csv"));
    let d = column(&h, &r, "detuning");
    let a = column(&h, &r, "pulse_abs");
    let freq_energy: f64 = a.iter().map(|x| x * x).sum::<f64>() * (d[1] - d[0]);
    let (h, r) = table(&dir.path().join("time.csv"));
    let t = column(&h, &r, "t");
    let b = column(&h, &r, "pulse_abs");
    let time_energy: f64 = b.iter().map(|x| x * x).sum::<f64>() * (t[1] - t[0]);
    assert!(
        (freq_energy - time_energy).abs() < 1e-2 * time_energy,
        "{freq_energy} vs {time_energy}"
    );
}

#[test]
fn delay_table_in_both_unit_systems() {
    let dir = tempfile::tempdir().unwrap();
    let nat = dir.path().join("nat");
    let phys = dir.path().join("phys");
    ok(&["delay", "--out", nat.to_str().unwrap(), "--detuning-min", "-300", "--detuning-max", "300", "--n-detunings", "601"]);
    ok(&["delay", "--units", "physical", "--out", phys.to_str().unwrap(), "--detuning-min", "-300", "--detuning-max", "300", "--n-detunings", "601"]);
    let (h, r) = table(&nat.join("delay.csv"));
    let (hp, rp) = table(&phys.join("delay.csv"));
    assert_eq!(hp, ["detuning", "detuning_nev", "tau_ns", "reflection_abs", "reliable"]);
    let d = column(&h, &r, "detuning");
    let tau = column(&h, &r, "tau");
    let tau_ns = column(&hp, &rp, "tau_ns");
    let peak = tau_ns.iter().cloned().fold(f64::MIN, f64::max);
    assert!(peak > 15.0 && peak < 40.0, "peak {peak} ns");
    for j in 0..d.len() {
        assert!((tau_ns[j] - tau[j] * 658.2119569 / 4.7).abs() <= 1e-9 * tau_ns[j].abs().max(1.0));
        if d[j].abs() >= 200.0 {
            assert!(tau_ns[j].abs() < 2.0);
        }
    }
}

#[test]
fn synth_is_reproducible_and_fit_recovers_delays() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    let common = ["--detuning-min", "-20", "--detuning-max", "20", "--n-detunings", "9", "--seed", "5"];
    let mut args_a = vec!["synth", "--out", a.to_str().unwrap()];
    args_a.extend(common);
    let mut args_b = vec!["synth", "--out", b.to_str().unwrap()];
    args_b.extend(common);
    ok(&args_a);
    ok(&args_b);
    let text = fs::read_to_string(&a).unwrap();
    assert_eq!(text, fs::read_to_string(&b).unwrap());
    assert!(text.contains("[truth]"));
    let total: u64 = text
        .split("---\n")
        .nth(1)
        .unwrap()
        .split_whitespace()
        .map(|c| c.parse::<u64>().unwrap())
        .sum();
    assert!((total as f64 - 1e6).abs() < 5e3, "total {total}");

    let out = dir.path().join("fit");
    ok(&["fit", "--input", a.to_str().unwrap(), "--out", out.to_str().unwrap(), "--model", "snxp"]);
    for f in ["global_fit.toml", "delay_curve.csv", "columns.csv", "run.toml"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let (h, r) = table(&out.join("delay_curve.csv"));
    assert_eq!(h, ["detuning", "tau", "tau_stderr", "valid", "true_tau"]);
    let (tau, se, truth) = (column(&h, &r, "tau"), column(&h, &r, "tau_stderr"), column(&h, &r, "true_tau"));
    let valid = column(&h, &r, "valid");
    let good = (0..tau.len())
        .filter(|&j| valid[j] == 1.0 && (tau[j] - truth[j]).abs() <= 3.0 * se[j])
        .count();
    assert!(good >= 7, "{good}/9 consistent");
    let (hc, _) = table(&out.join("columns.csv"));
    assert_eq!(hc, ["detuning", "stage1_tau", "kept_starts", "gated_counts", "flags"]);

    // Rerunning gives byte-identical output.
    let again = dir.path().join("fit2");
    ok(&["fit", "--input", a.to_str().unwrap(), "--out", again.to_str().unwrap(), "--model", "snxp"]);
    for f in ["global_fit.toml", "delay_curve.csv", "columns.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap());
    }
}

#[test]
fn fit_from_truth_is_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    ok(&["synth", "--out", data.to_str().unwrap(), "--n-detunings", "5", "--detuning-min", "-10", "--detuning-max", "10", "--counts", "1e12", "--model", "full"]);
    let out = dir.path().join("fit");
    ok(&["fit", "--input", data.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    let text = fs::read_to_string(out.join("global_fit.toml")).unwrap();
    let fit: toml::Table = text.parse().unwrap();
    let kappa = fit["kappa"].as_float().unwrap();
    let g2n = fit["g2n"].as_float().unwrap();
    let dc = fit["delta_c"].as_float().unwrap();
    assert_eq!(kappa, 45.0);
    assert!((g2n - 3285.0).abs() < 1e-3 * 3285.0, "{g2n}");
    assert!((dc + 28.1).abs() < 1e-3 * 28.1, "{dc}");
}

#[test]
fn empty_cavity_is_flagged() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.txt");
    let out = ok(&["synth", "--out", data.to_str().unwrap(), "--g2n", "0", "--n-detunings", "3"]);
    assert!(String::from_utf8_lossy(&out.stderr).contains("no delayed signal"));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(snxp(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(snxp(&["delay", "--out", d, "--kappa", "abc"]).status.code(), Some(2));
    let bad = snxp(&["delay", "--out", d, "--kappa", "-5"]);
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("kappa"));
    let missing = dir.path().join("missing.txt");
    assert_eq!(
        snxp(&["fit", "--input", missing.to_str().unwrap(), "--out", d]).status.code(),
        Some(1)
    );

    let data = dir.path().join("d.txt");
    ok(&["synth", "--out", data.to_str().unwrap(), "--n-detunings", "3"]);
    let text = fs::read_to_string(&data).unwrap();
    let v2 = dir.path().join("v2.txt");
    fs::write(&v2, text.replace("format_version = 1", "format_version = 2")).unwrap();
    let out = snxp(&["fit", "--input", v2.to_str().unwrap(), "--out", d]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("version"));

    let empty = dir.path().join("empty.txt");
    ok(&["synth", "--out", empty.to_str().unwrap(), "--g2n", "0", "--n-detunings", "3"]);
    assert_eq!(
        snxp(&["fit", "--input", empty.to_str().unwrap(), "--out", d]).status.code(),
        Some(3)
    );
    assert_eq!(
        snxp(&["fit", "--input", data.to_str().unwrap(), "--out", d, "--free-kappa"]).status.code(),
        Some(3)
    );
}

#[test]
fn config_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    ok(&["delay", "--units", "physical", "--out", first.to_str().unwrap(), "--kappa", "50"]);
    let cfg = first.join("run.toml");
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.contains("units = \"physical\""));
    let second = dir.path().join("second");
    ok(&["delay", "--config", cfg.to_str().unwrap(), "--out", second.to_str().unwrap()]);
    assert_eq!(fs::read(first.join("delay.csv")).unwrap(), fs::read(second.join("delay.csv")).unwrap());
    assert_eq!(fs::read_to_string(second.join("run.toml")).unwrap(), text);
}
