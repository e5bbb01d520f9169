//! Acceptance criteria, one test each. Every test prints a PASS or FAIL line
//! before asserting.

use std::io::Write;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use shoebox::decay::{classic_rt, sigma_to_t60, t60_to_sigma, ClassicFormula};
use shoebox::density::special_points;
use shoebox::room::RoomConfig;
use shoebox::ism::random_trials;
use shoebox::synthesis::{banded_hybrid_rir, substream_seed, SynthesisConfig};
use shoebox::ShoeboxRoom;
use shoebox_cli::experiments as ex;

fn verdict(n: u32, title: &str, pass: bool, detail: &str) {
    // straight to stderr so the verdict shows even when output is captured
    let line = format!("criterion {n:>2} {}: {title}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let _ = std::io::stderr().write_all(line.as_bytes());
    assert!(pass, "criterion {n} ({title}) failed: {detail}");
}

#[test]
fn criterion_01_histogram_matches_closed_form() {
    let start = Instant::now();
    let (l1, _, _) = ex::histogram_l1(&ShoeboxRoom::example(), 100, 1_000_000);
    let secs = start.elapsed().as_secs_f64();
    verdict(
        1,
        "sphere histogram vs closed form",
        l1 < 0.02 && secs < 5.0,
        &format!("relative L1 {l1:.3e} (limit 2e-2), {secs:.2} s (limit 5 s)"),
    );
}

#[test]
fn criterion_02_special_points() {
    let pts = special_points(&ShoeboxRoom::example().axis_damping());
    let worst = if pts.len() == 7 {
        pts.iter()
            .zip(ex::EXAMPLE_SPECIAL_POINTS)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };
    verdict(
        2,
        "special points of the example room",
        worst < 1.5e-3,
        &format!("{} points, max abs error {worst:.3e} (limit 1.5e-3)", pts.len()),
    );
}

#[test]
fn criterion_03_normalization() {
    let c = 343.0;
    let mut rooms = vec![("example".to_string(), ShoeboxRoom::example())];
    for dims in ex::SHAPE_ROOMS {
        rooms.push((format!("{dims:?}"), ShoeboxRoom::from_db(dims, [ex::SHAPE_BETA_DB; 6], c).unwrap()));
    }
    rooms.push((
        "corridor example walls".into(),
        ShoeboxRoom::example().with_dims([2.0, 2.0, 10.0]).unwrap(),
    ));
    let errors: Vec<(String, f64)> = rooms.iter().map(|(n, r)| (n.clone(), ex::normalization_error(r))).collect();
    let worst = errors.iter().map(|e| e.1).fold(0.0, f64::max);
    verdict(
        3,
        "integral of H equals 1/V",
        worst < 1e-4,
        &format!("max relative error {worst:.3e} over {} rooms (limit 1e-4)", errors.len()),
    );
}

#[test]
fn criterion_04_slices_reproduce_density() {
    let room = ShoeboxRoom::example();
    let d = shoebox::DampingDensity::from_room(&room);
    let n = ex::non_special_sigmas(&d, 100).len();
    let worst = ex::slice_consistency(&room, 100);
    verdict(
        4,
        "polar quadrature of slices vs closed form",
        worst < 1e-6 && n == 100,
        &format!("max relative error {worst:.3e} at {n} rates (limit 1e-6)"),
    );
}

#[test]
fn criterion_05_edc_agreement() {
    let start = Instant::now();
    let cmp = ex::compare_edcs(&ShoeboxRoom::example(), 48_000.0, 1.0, 2024, 3, 200).unwrap();
    let secs = start.elapsed().as_secs_f64();
    verdict(
        5,
        "image-source vs analytic EDC after 50 ms, above -60 dB",
        cmp.max_deviation_db < 1.5 && secs < 60.0,
        &format!("max deviation {:.3} dB (limit 1.5 dB), {secs:.2} s (limit 60 s)", cmp.max_deviation_db),
    );
}

#[test]
fn criterion_06_coefficient_sweep() {
    let rows = ex::coefficient_sweep(343.0, 48_000.0, 2024, 200).unwrap();
    let (median, max) = ex::sweep_errors(&rows);
    for r in &rows {
        println!(
            "  factor {:>2}: ism T20 {:.4} s, analytic T20 {:.4} s, relative error {:+.3}%",
            r.factor,
            r.t20_ism,
            r.t20_analytic,
            100.0 * r.rel_error
        );
    }
    verdict(
        6,
        "reflection-coefficient sweep",
        rows.len() == 11 && median < 0.015 && max < 0.04,
        &format!("median {:.3}% (limit 1.5%), max {:.3}% (limit 4%)", 100.0 * median, 100.0 * max),
    );
}

#[test]
fn criterion_07_lossless_room() {
    let study = ex::lossless_study([4.0, 5.0, 3.0], 343.0, 48_000.0, 2024, 200, false).unwrap();
    verdict(
        7,
        "lossless room stays flat",
        study.analytic_variation_db < 0.5 && study.stochastic_spread_db < 1.5,
        &format!(
            "analytic variation {:.4} dB (limit 0.5 dB), stochastic 21 ms level spread {:.3} dB (limit 1.5 dB)",
            study.analytic_variation_db, study.stochastic_spread_db
        ),
    );
}

#[test]
fn criterion_08_cube_single_slope_corridor_multi_slope() {
    let c = 343.0;
    let cube = ShoeboxRoom::from_db([3.0, 3.0, 3.0], [-1.0; 6], c).unwrap();
    let corridor = ShoeboxRoom::from_db([2.0, 2.0, 10.0], [-1.0; 6], c).unwrap();
    let d_cube = ex::single_slope_deviation(&cube, 200, -60.0).unwrap();
    let d_corridor = ex::single_slope_deviation(&corridor, 200, -60.0).unwrap();
    verdict(
        8,
        "cube near single slope, corridor multi slope",
        d_cube < 0.5 && d_corridor > 1.0,
        &format!("cube deviation {d_cube:.3} dB (limit < 0.5 dB), corridor deviation {d_corridor:.3} dB (limit > 1 dB)"),
    );
}

#[test]
fn criterion_09_rate_t60_conversion() {
    let c = 343.0;
    let trip = ex::round_trip_error(c).unwrap();
    let t = sigma_to_t60(-6.9078 / c, c).unwrap();
    let back = t60_to_sigma(1.0, c).unwrap() * c;
    let pinned = (t - 1.0).abs() < 1e-5 && (back + 6.9078).abs() < 5e-5;
    verdict(
        9,
        "rate and T60 conversion",
        trip < 1e-12 && pinned,
        &format!("round trip {trip:.3e} (limit 1e-12), sigma c = -6.9078 gives {t:.7} s, 1 s gives sigma c = {back:.6}"),
    );
}

#[test]
fn criterion_10_classic_formulas() {
    // 50-digit evaluations of the three formulas for the example room
    let reference = [
        (ClassicFormula::Sabine, 0.256_636_989_808_955_293_261_985_4),
        (ClassicFormula::Eyring, 0.200_892_190_813_423_978_692_973_7),
        (ClassicFormula::Fitzroy, 0.247_057_476_564_285_876_226_863_1),
    ];
    let room = ShoeboxRoom::example();
    let worst = reference
        .iter()
        .map(|&(f, r)| ((classic_rt(&room, f).unwrap() - r) / r).abs())
        .fold(0.0, f64::max);
    let alpha: f64 = 1e-4;
    let quiet = room.with_beta([(1.0 - alpha).sqrt(); 6]).unwrap();
    let ratio = classic_rt(&quiet, ClassicFormula::Eyring).unwrap() / classic_rt(&quiet, ClassicFormula::Sabine).unwrap();
    verdict(
        10,
        "classic reverberation formulas",
        worst < 1e-10 && (ratio - 1.0).abs() < 1e-3,
        &format!("max relative error {worst:.3e} (limit 1e-10), Eyring/Sabine at alpha 1e-4 = {ratio:.8} (limit 1e-3 from 1)"),
    );
}

#[test]
fn criterion_11_banded_synthesis() {
    let room = ShoeboxRoom::example();
    let cfg = RoomConfig {
        room,
        bands: Vec::new(),
        source: None,
        receiver: None,
        fs: None,
    };
    let banded = ex::resolve_banded(&cfg).unwrap();
    let fs = 48_000.0;
    let seeds = 5;
    let mut mean = [0.0; 6];
    for seed in 0..seeds {
        let mut synth = SynthesisConfig::new(fs, 2.0, substream_seed(seed, 2));
        synth.transition_time = 0.05;
        let ism = random_trials(&room, substream_seed(seed, 1), 1, fs, 2.0)[0];
        let h = banded_hybrid_rir(&banded, &ism, &synth).unwrap();
        for (m, t) in mean.iter_mut().zip(ex::band_t20s(&h, &ex::OCTAVE_CENTERS).unwrap()) {
            *m += t / seeds as f64;
        }
    }
    let errors: Vec<f64> = mean.iter().zip(ex::OCTAVE_TARGETS).map(|(m, t)| (m - t) / t).collect();
    for ((fc, m), e) in ex::OCTAVE_CENTERS.iter().zip(mean).zip(&errors) {
        println!("  {fc:>6} Hz: T20 {m:.4} s, {:+.2}% from target", 100.0 * e);
    }
    let worst = errors.iter().map(|e| e.abs()).fold(0.0, f64::max);
    verdict(
        11,
        "banded synthesis meets octave targets",
        worst < 0.10,
        &format!("max relative T20 error {:.2}% over 5 seeds (limit 10%)", 100.0 * worst),
    );
}

fn run_cli(args: &[&str], out: &Path) -> Vec<(String, Vec<u8>)> {
    let status = Command::new(env!("CARGO_BIN_EXE_shoebox"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs");
    assert!(status.status.success(), "{args:?}: {}", String::from_utf8_lossy(&status.stderr));
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(out)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort();
    files
}

#[test]
fn criterion_12_seeded_runs_are_bit_identical() {
    let runs: &[&[&str]] = &[
        &["density", "--rt-density"],
        &["edc", "--method", "analytic", "--seed", "11"],
        &["edc", "--method", "ism", "--seed", "11", "--duration", "0.5"],
        &["edc", "--method", "stochastic", "--seed", "11"],
        &["rt", "--sweep-length", "1:30", "--sweep-coefficients", "--seed", "11"],
        &["synth", "--seed", "11"],
        &["synth", "--bands", "--seed", "11"],
        &["synth", "--transition-ms", "0", "--seed", "11"],
        &["validate", "--suite", "all", "--seed", "11"],
        &["experiment", "fig4", "--seed", "11"],
        &["experiment", "fig5", "--seed", "11"],
        &["experiment", "fig9", "--seed", "11"],
        &["experiment", "rtsweep", "--seed", "11"],
    ];
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    for (i, args) in runs.iter().enumerate() {
        let a = run_cli(args, &dir.path().join(format!("{i}a")));
        let b = run_cli(args, &dir.path().join(format!("{i}b")));
        let names: Vec<&str> = a.iter().map(|f| f.0.as_str()).collect();
        assert!(names.iter().any(|n| n.ends_with(".csv")), "{args:?} wrote no CSV");
        if a != b {
            differing.push(args.join(" "));
        }
    }
    verdict(
        12,
        "seeded commands are deterministic",
        differing.is_empty(),
        &format!("{} commands run twice, differing: {differing:?}", runs.len()),
    );
}
