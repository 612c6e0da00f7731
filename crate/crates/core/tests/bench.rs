use std::fs;
use std::path::Path;

use lsid_core::baselines::downscale_box;
use lsid_core::bench::{render_csv, run_bench, summarize, BenchConfig, BenchMethod};
use lsid_core::{save_image, Method, Raster};
use tempfile::TempDir;

fn texture(w: usize, h: usize, seed: usize) -> Raster {
    let data = (0..w * h * 3)
        .map(|i| {
            let px = i / 3;
            let (x, y) = (px % w, px / w);
            ((x * 11 + y * 5 + seed * 37 + (i % 3) * 60) ^ (x * y)) as u8
        })
        .collect();
    Raster::new(w, h, 3, data).unwrap()
}

struct Fixture {
    _dir: TempDir,
    cfg: BenchConfig,
}

/// Two 48×48 HR images with box-downscaled ground truth at factor 4.
fn fixture(root: &Path) -> BenchConfig {
    let hr = root.join("hr");
    let gt = root.join("gt");
    fs::create_dir_all(&hr).unwrap();
    fs::create_dir_all(&gt).unwrap();
    for (i, name) in ["a", "b"].iter().enumerate() {
        let img = texture(48, 48, i);
        save_image(&img, hr.join(format!("{name}.png"))).unwrap();
        save_image(&downscale_box(&img, 4.0).unwrap(), gt.join(format!("{name}x4.png"))).unwrap();
    }
    let mut cfg = BenchConfig::default();
    cfg.hr_dir = hr;
    cfg.gt_dir = Some(gt);
    cfg.gt_template = "{stem}x{factor}".into();
    cfg.factors = vec![4.0];
    cfg.methods = vec![BenchMethod::Builtin(Method::Lsid), BenchMethod::Builtin(Method::Box)];
    cfg
}

fn setup() -> Fixture {
    let dir = TempDir::new().unwrap();
    let cfg = fixture(dir.path());
    Fixture { _dir: dir, cfg }
}

#[test]
fn metric_rows_for_every_image_and_method() {
    let f = setup();
    let report = run_bench(&f.cfg).unwrap();
    assert_eq!(report.rows.len(), 4);
    let keys: Vec<_> = report.rows.iter().map(|r| (r.image.as_str(), r.method.as_str())).collect();
    assert_eq!(keys, [("a", "box"), ("a", "lsid"), ("b", "box"), ("b", "lsid")]);
    for row in &report.rows {
        assert!(row.error.is_none(), "{:?}", row.error);
        assert_eq!((row.out_w, row.out_h), (Some(12), Some(12)));
        assert!(row.time_ms.unwrap() >= 0.0);
        let ssim = row.ssim.unwrap();
        assert!((-1.0..=1.0 + 1e-12).contains(&ssim));
        if row.method == "box" {
            assert_eq!(row.psnr_db, Some(f64::INFINITY));
        } else {
            assert!(row.psnr_db.unwrap().is_finite());
        }
    }
    let summary = summarize(&report);
    assert_eq!(summary.len(), 2);
}

#[test]
fn csv_is_deterministic_apart_from_timing() {
    let f = setup();
    let strip = |csv: String| -> Vec<String> {
        csv.lines()
            .map(|l| {
                let mut cols: Vec<&str> = l.split(',').collect();
                cols[5] = "";
                cols.join(",")
            })
            .collect()
    };
    let a = strip(render_csv(&run_bench(&f.cfg).unwrap()).unwrap());
    let b = strip(render_csv(&run_bench(&f.cfg).unwrap()).unwrap());
    assert_eq!(a, b);
}

#[test]
fn missing_ground_truth_leaves_metrics_empty() {
    let f = setup();
    fs::remove_file(f.cfg.gt_dir.as_ref().unwrap().join("bx4.png")).unwrap();
    let report = run_bench(&f.cfg).unwrap();
    for row in report.rows.iter().filter(|r| r.image == "b") {
        assert!(row.psnr_db.is_none() && row.ssim.is_none() && row.error.is_none());
        assert_eq!(row.out_w, Some(12));
    }
    assert!(report.rows.iter().filter(|r| r.image == "a").all(|r| r.psnr_db.is_some()));
}

#[test]
fn mismatched_ground_truth_is_an_error_row() {
    let f = setup();
    let gt = f.cfg.gt_dir.as_ref().unwrap().join("ax4.png");
    save_image(&texture(13, 12, 0), &gt).unwrap();
    let report = run_bench(&f.cfg).unwrap();
    assert_eq!(report.rows.len(), 4);
    for row in report.rows.iter().filter(|r| r.image == "a") {
        assert!(row.error.as_deref().unwrap().contains("ground truth"));
        assert!(row.psnr_db.is_none());
    }
    assert!(report.rows.iter().filter(|r| r.image == "b").all(|r| r.error.is_none()));
}

#[test]
fn external_method_outputs_are_scored() {
    let f = setup();
    let ext = f.cfg.hr_dir.parent().unwrap().join("ext");
    fs::create_dir_all(&ext).unwrap();
    // "a" reuses the ground truth exactly; "b" has no external output
    fs::copy(f.cfg.gt_dir.as_ref().unwrap().join("ax4.png"), ext.join("ax4.png")).unwrap();
    let mut cfg = f.cfg.clone();
    cfg.methods = vec![BenchMethod::External(ext.clone())];
    let report = run_bench(&cfg).unwrap();
    assert_eq!(report.rows.len(), 2);
    let a = &report.rows[0];
    assert_eq!(a.method, format!("external:{}", ext.display()));
    assert_eq!(a.psnr_db, Some(f64::INFINITY));
    assert!(a.time_ms.is_none());
    let b = &report.rows[1];
    assert!(b.error.as_deref().unwrap().contains("no external output"));
}

#[test]
fn empty_or_missing_hr_dir_is_a_usage_error() {
    let dir = TempDir::new().unwrap();
    let mut cfg = BenchConfig::default();
    cfg.hr_dir = dir.path().join("absent");
    assert!(run_bench(&cfg).unwrap_err().is_usage());
    cfg.hr_dir = dir.path().to_path_buf();
    assert!(run_bench(&cfg).unwrap_err().is_usage());
}
