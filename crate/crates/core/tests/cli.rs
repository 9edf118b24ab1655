use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use manifoldwalk::datasets::{add_noise, gen_swiss_roll, LabeledPointCloud, NoiseSpec, PointCloud};
use manifoldwalk::imaging::{read_image, write_image, RasterImage};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_manifoldwalk"));
    c.env_remove("MANIFOLDWALK_DATA_DIR");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn write_table(path: &Path, cloud: &PointCloud, labels: &[usize]) {
    let mut s = String::new();
    for (p, l) in cloud.points().zip(labels) {
        let cells: Vec<String> = p.iter().map(|v| format!("{v:.10}")).collect();
        s.push_str(&format!("{},{l}\n", cells.join(",")));
    }
    std::fs::write(path, s).unwrap();
}

fn noisy_table(dir: &Path, base: &LabeledPointCloud, level: u8) -> PathBuf {
    let p = dir.join(format!("noise{level}.csv"));
    let cloud = add_noise(base.cloud(), NoiseSpec::level(level).unwrap(), 5);
    write_table(&p, &cloud, base.labels());
    p
}

fn distance(o: &Output) -> f64 {
    assert!(o.status.success(), "{}", stderr(o));
    let out = stdout(o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("distance,t,variant,n,score"));
    lines.next().unwrap().split(',').next().unwrap().parse().unwrap()
}

fn pattern(w: usize, h: usize, shift: usize) -> RasterImage {
    RasterImage::from_fn(w, h, |x, y| {
        [((x + shift) * 20 % 256) as u8, (y * 25 % 256) as u8, ((x * y + shift) % 256) as u8]
    })
    .unwrap()
}

#[test]
fn similarity_on_tables() {
    let dir = tempfile::tempdir().unwrap();
    let base = gen_swiss_roll(200, 4, 1).unwrap();
    let clean = noisy_table(dir.path(), &base, 0);
    let low = noisy_table(dir.path(), &base, 1);
    let high = noisy_table(dir.path(), &base, 4);
    let s = |a: &Path, b: &Path| distance(&run(&["similarity", a.to_str().unwrap(), b.to_str().unwrap()]));
    assert_eq!(s(&clean, &clean), 0.0);
    assert!(s(&clean, &high) > s(&clean, &low));
}

#[test]
fn dimension_mismatch_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    std::fs::write(&a, "1,2,0\n3,4,1\n5,6,0\n7,8,1\n").unwrap();
    std::fs::write(&b, "1,2,3,0\n3,4,5,1\n5,6,7,0\n7,8,9,1\n").unwrap();
    let o = run(&["similarity", a.to_str().unwrap(), b.to_str().unwrap(), "--k", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("dimension mismatch"), "{}", stderr(&o));
}

#[test]
fn adjacency_export() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    std::fs::write(&a, "0,0\n1,0\n3,0\n7,0\n").unwrap();
    let prefix = dir.path().join("adj");
    let o = run(&[
        "similarity",
        a.to_str().unwrap(),
        a.to_str().unwrap(),
        "--k",
        "1",
        "--export-adjacency",
        prefix.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(dir.path().join("adj.a.txt")).unwrap();
    let rows: Vec<Vec<f64>> = text
        .lines()
        .map(|l| l.split_whitespace().map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 4);
    let ones: Vec<usize> = rows.iter().map(|r| r.iter().position(|&v| v == 1.0).unwrap()).collect();
    assert_eq!(ones, vec![1, 0, 1, 2]);
}

#[test]
fn figure1_is_deterministic() {
    let args = ["figure1", "--n", "120", "--iterations", "2", "--levels", "0,2", "--seed", "7"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "{}", stderr(&a));
    assert_eq!(a.stdout, b.stdout);
    let out = stdout(&a);
    assert_eq!(out.lines().count(), 1 + 2 * 6);
    let ours_zero = out.lines().find(|l| l.starts_with("0,0,ours,")).unwrap();
    assert!(ours_zero.starts_with("0,0,ours,0.000000000,"), "{ours_zero}");
}

#[test]
fn tables_to_file_with_markdown() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("t.csv");
    let md = dir.path().join("t.md");
    let o = run(&[
        "tables", "--n", "120", "--iterations", "2", "--per-class", "5", "--levels", "1,4",
        "--out", csv.to_str().unwrap(), "--markdown", md.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("dataset,per_class,noise_level,sigma,mean_acc_no_tl,mean_acc_tl,"));
    assert_eq!(text.lines().count(), 1 + 3 * 2);
    assert_eq!(std::fs::read_to_string(&md).unwrap().matches("### ").count(), 3);
}

#[test]
fn real_suite_lists_missing_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["tables", "--suite", "real", "--data-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    for f in ["data_banknote_authentication.txt", "pendigits.tra", "sat.trn"] {
        assert!(err.contains(f), "{err}");
    }
}

#[test]
fn bad_arguments_exit_2() {
    assert_eq!(run(&["tables", "--levels", "9"]).status.code(), Some(2));
    assert_eq!(run(&["nonsense"]).status.code(), Some(2));
    assert_eq!(run(&["similarity", "/nonexistent/a.csv", "/nonexistent/b.csv"]).status.code(), Some(2));
}

#[test]
fn unstable_t_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    std::fs::write(&a, "0,0\n1,0\n3,0\n7,0\n").unwrap();
    let o = run(&["similarity", a.to_str().unwrap(), a.to_str().unwrap(), "--k", "2", "--t", "0.9"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
}

#[test]
fn config_file_fills_unset_flags_only() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "# test config\nseed = 7\nn=120\niterations=2\nlevels=0,2\n").unwrap();
    let from_cfg = run(&["figure1", "--config", cfg.to_str().unwrap()]);
    let explicit = run(&["figure1", "--n", "120", "--iterations", "2", "--levels", "0,2", "--seed", "7"]);
    assert!(from_cfg.status.success(), "{}", stderr(&from_cfg));
    assert_eq!(from_cfg.stdout, explicit.stdout);

    let overridden = run(&["figure1", "--config", cfg.to_str().unwrap(), "--levels", "1"]);
    assert!(overridden.status.success(), "{}", stderr(&overridden));
    assert_eq!(stdout(&overridden).lines().count(), 1 + 6);
}

#[test]
fn superpixel_single_segment_is_uniform() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in.png");
    let out = dir.path().join("out.png");
    let seg = dir.path().join("seg.txt");
    write_image(&pattern(6, 6, 0), &input).unwrap();
    let o = run(&[
        "superpixel", input.to_str().unwrap(), "--segments", "1",
        "--out", out.to_str().unwrap(), "--segments-out", seg.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let img = read_image(&out).unwrap();
    assert_eq!((img.width(), img.height()), (6, 6));
    assert_eq!(img.distinct_colors(), 1);
    let labels = std::fs::read_to_string(&seg).unwrap();
    assert!(labels.split_whitespace().all(|l| l == "0"));

    let no_out = run(&["superpixel", input.to_str().unwrap()]);
    assert_eq!(no_out.status.code(), Some(2));
}

#[test]
fn study_on_identical_images_is_zero() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.png");
    write_image(&pattern(12, 10, 0), &a).unwrap();
    let o = run(&["superpixel-study", a.to_str().unwrap(), a.to_str().unwrap(), "--sizes", "4,16"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines, vec!["grid_size,distance", "original,0", "4,0", "16,0"]);
}

#[test]
fn rank_orders_gallery() {
    let dir = tempfile::tempdir().unwrap();
    let reference = pattern(12, 10, 0);
    let ref_path = dir.path().join("ref.png");
    write_image(&reference, &ref_path).unwrap();
    let gallery = dir.path().join("gallery");
    for class in ["near", "far"] {
        std::fs::create_dir_all(gallery.join(class)).unwrap();
    }
    write_image(&reference, gallery.join("near/same.png")).unwrap();
    let shifted = pattern(12, 10, 1);
    write_image(&shifted, gallery.join("near/shifted.png")).unwrap();
    let far = RasterImage::from_fn(12, 10, |x, y| [((x * y * 37) % 256) as u8, ((x * 91 + y * 13) % 256) as u8, 3])
        .unwrap();
    write_image(&far, gallery.join("far/other.png")).unwrap();

    let o = run(&["rank", ref_path.to_str().unwrap(), gallery.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "path,distance");
    assert!(lines[1].contains("same.png") && lines[1].ends_with(",0"), "{out}");
    assert_eq!(lines.len(), 4);

    let o = run(&["rank", ref_path.to_str().unwrap(), gallery.to_str().unwrap(), "--class-average"]);
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "class,mean_distance,count");
    assert!(lines[1].starts_with("near,") && lines[1].ends_with(",2"), "{out}");
    assert!(lines[2].starts_with("far,") && lines[2].ends_with(",1"), "{out}");
}
