use std::fs;
use std::path::Path;
use std::process::Command;

use taxicast::report::ReportBundle;

mod common;

fn taxicast(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_taxicast")).args(args).output().unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
        String::from_utf8_lossy(&out.stderr).into_owned(),
    )
}

fn write_config(dir: &Path, extra: &str) -> String {
    let path = dir.join("small.cfg");
    fs::write(&path, format!("{}{extra}", common::small_config().to_text())).unwrap();
    path.to_string_lossy().into_owned()
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

#[test]
fn run_writes_consistent_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "periods = 60, 30\n");
    let out = dir.path().join("out");
    let (code, stdout, stderr) = taxicast(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert!(stdout.contains("dhedge"));

    let (header, summary) = read_csv(&out.join("summary.csv"));
    assert_eq!(header[..4], ["strategy", "period_minutes", "metric", "mean_error"]);
    assert_eq!(summary.len(), 3 * 2);

    for (period, dir) in [("60", out.clone()), ("30", out.join("period_30min"))] {
        for f in ["trace.csv", "per_cell.csv", "ecdf.csv", "cumulative.csv", "models.json", "errors.csv"] {
            assert!(dir.join(f).exists(), "{period}: {f}");
        }
        let bins = if period == "60" { 24 } else { 48 };
        let (h, trace) = read_csv(&dir.join("trace.csv"));
        assert_eq!(h, ["t", "chosen_expert", "e_0", "e_1", "l_0", "l_1", "w_0", "w_1"]);
        assert_eq!(trace.len(), bins);

        // last cumulative row equals the summary means
        let (h, cum) = read_csv(&dir.join("cumulative.csv"));
        assert_eq!(h, ["t", "voronoi", "geohash", "dhedge"]);
        assert_eq!(cum.len(), bins);
        let last = cum.last().unwrap();
        for (col, name) in ["voronoi", "geohash", "dhedge"].iter().enumerate() {
            let row = summary.iter().find(|r| r[0] == *name && r[1] == period).unwrap();
            let a: f64 = last[col + 1].parse().unwrap();
            let b: f64 = row[3].parse().unwrap();
            assert!((a - b).abs() < 1e-9, "{period} {name}: {a} vs {b}");
        }

        let (h, ecdf) = read_csv(&dir.join("ecdf.csv"));
        assert_eq!(h, ["record", "strategy", "other_strategy", "value", "probability"]);
        let ks: Vec<_> = ecdf.iter().filter(|r| r[0] == "ks").collect();
        assert_eq!(ks.len(), 1);
        let p: f64 = ks[0][4].parse().unwrap();
        assert!((0.0..=1.0).contains(&p));

        let (h, cells) = read_csv(&dir.join("per_cell.csv"));
        assert_eq!(h, ["partition_id", "strategy", "model_kind", "smape", "mase"]);
        assert!(cells.iter().any(|r| r[1] == "voronoi") && cells.iter().any(|r| r[1] == "geohash"));

        let models: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.join("models.json")).unwrap()).unwrap();
        assert_eq!(models.as_array().unwrap().len(), cells.len());
        assert!(models[0]["kind"].is_string() && models[0]["validation_smape"].is_number());

        let (h, demand) = read_csv(&dir.join("demand_voronoi.csv"));
        assert_eq!(h, ["partition_id", "bin_start_iso8601", "d_norm"]);
        assert_eq!(demand.len(), 8 * 7 * 24 * 60 / period.parse::<usize>().unwrap());
        assert!(demand[0][1].ends_with('Z'));
    }
    let (h, cells) = read_csv(&out.join("voronoi_cells.csv"));
    assert_eq!(h, ["seed_id", "vertex_index", "x_km", "y_km", "area_km2"]);
    assert!(cells.len() >= 3 * 8);
    assert!(!out.join("FAILED").exists());

    // report re-renders byte-identical files from the bundle
    let again = dir.path().join("again");
    let bundle = out.join("bundle.json");
    let (code, _, stderr) = taxicast(&["report", "--input", bundle.to_str().unwrap(), "--out", again.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    for f in ["summary.csv", "trace.csv", "per_cell.csv", "ecdf.csv", "cumulative.csv", "models.json", "period_30min/trace.csv"] {
        assert_eq!(fs::read(out.join(f)).unwrap(), fs::read(again.join(f)).unwrap(), "{f}");
    }
    let b = ReportBundle::load(&bundle).unwrap();
    assert_eq!(b.periods.len(), 2);

    // hedge alone on the errors file reproduces the trace
    let hedged = dir.path().join("hedged");
    let errors = out.join("errors.csv");
    let (code, _, stderr) = taxicast(&["hedge", "--input", errors.to_str().unwrap(), "--out", hedged.to_str().unwrap()]);
    assert_eq!(code, 0, "{stderr}");
    assert_eq!(fs::read(out.join("trace.csv")).unwrap(), fs::read(hedged.join("trace.csv")).unwrap());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let (code, _, stderr) = taxicast(&["run", "--config", &cfg, "--seed", "4", "--out", out.to_str().unwrap()]);
        assert_eq!(code, 0, "{stderr}");
    }
    for f in ["bundle.json", "summary.csv", "trace.csv", "demand_geohash.csv", "voronoi_cells.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn stage_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let d = |s: &str| dir.path().join(s).to_string_lossy().into_owned();

    let (code, _, e) = taxicast(&["synth", "--config", &cfg, "--out", &d("synth")]);
    assert_eq!(code, 0, "{e}");
    let events = d("synth/events.csv");

    let (code, _, e) = taxicast(&["ingest", "--config", &cfg, "--input", &events, "--schema", "a", "--out", &d("ingest")]);
    assert_eq!(code, 0, "{e}");
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(d("ingest/ingest.json")).unwrap()).unwrap();
    assert!(summary["events"].as_u64().unwrap() > 1000);

    let (code, _, e) = taxicast(&["tessellate", "--config", &cfg, "--input", &events, "--k", "6", "--out", &d("tess")]);
    assert_eq!(code, 0, "{e}");
    let (_, centroids) = read_csv(Path::new(&d("tess/centroids.csv")));
    assert_eq!(centroids.len(), 6);
    assert!(Path::new(&d("tess/geohash_cells.csv")).exists());

    let (code, _, e) = taxicast(&[
        "forecast", "--config", &cfg, "--input", &events, "--period", "30", "--metric", "mase", "--geohash-level", "5",
        "--out", &d("fc"),
    ]);
    assert_eq!(code, 0, "{e}");
    for f in ["demand_voronoi.csv", "demand_geohash.csv", "per_cell.csv", "models.json", "errors.csv"] {
        assert!(Path::new(&d("fc")).join(f).exists(), "{f}");
    }
    let (_, rows) = read_csv(Path::new(&d("fc/errors.csv")));
    assert_eq!(rows.len(), 2 * 48);

    let (code, out, e) = taxicast(&["hedge", "--input", &d("fc/errors.csv"), "--out", &d("hedge")]);
    assert_eq!(code, 0, "{e}");
    assert!(out.contains("beta"));
    let (_, trace) = read_csv(Path::new(&d("hedge/trace.csv")));
    assert_eq!(trace.len(), 48);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let out_s = out.to_str().unwrap();

    assert_eq!(taxicast(&["run", "--metric", "rmse", "--out", out_s]).0, 2);
    assert_eq!(taxicast(&["run", "--period", "7", "--out", out_s]).0, 2);
    assert_eq!(taxicast(&["run", "--config", "/nonexistent.cfg", "--out", out_s]).0, 2);
    assert_eq!(taxicast(&["frobnicate"]).0, 2);
    assert_eq!(taxicast(&["--help"]).0, 0);
    assert_eq!(taxicast(&["run", "--input", "/nonexistent.csv", "--out", out_s]).0, 3);
    assert_eq!(taxicast(&["report", "--input", "/nonexistent.json", "--out", out_s]).0, 3);

    let bad = dir.path().join("bad.csv");
    fs::write(&bad, "user_id,timestamp_iso8601,lat,lon\nu1,2016-01-01T00:00:00Z,12.9,77.6\n").unwrap();
    let cfg = write_config(dir.path(), "");
    let (code, _, stderr) = taxicast(&["run", "--config", &cfg, "--input", bad.to_str().unwrap(), "--out", out_s]);
    assert_eq!(code, 3, "{stderr}");
    let marker = fs::read_to_string(out.join("FAILED")).unwrap();
    assert!(marker.contains("stage=tessellate"), "{marker}");

    let errors = dir.path().join("errors.csv");
    fs::write(&errors, "phase,t,voronoi,geohash\nvalidation,2016-01-01T00:00:00Z,1,2\ntest,2016-01-01T01:00:00Z,1,NaN\n").unwrap();
    assert_eq!(taxicast(&["hedge", "--input", errors.to_str().unwrap(), "--out", out_s]).0, 3);
}
