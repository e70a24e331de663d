use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use strokeflow::{Color, Manifest, RasterImage};

fn strokeflow(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strokeflow"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn shapes_png(path: &Path, size: u32, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = f64::from(size);
    let discs: Vec<(f64, f64, f64, Color)> = (0..12)
        .map(|_| {
            let c = Color::rgb(
                rng.gen_range(0..3) * 120,
                rng.gen_range(0..3) * 120,
                rng.gen_range(0..3) * 120,
            );
            (
                rng.gen_range(0.0..s),
                rng.gen_range(0.0..s),
                rng.gen_range(0.05 * s..0.15 * s),
                c,
            )
        })
        .collect();
    RasterImage::from_fn(size, size, |x, y| {
        let (px, py) = (f64::from(x) + 0.5, f64::from(y) + 0.5);
        discs
            .iter()
            .rev()
            .find(|(cx, cy, r, _)| (px - cx).powi(2) + (py - cy).powi(2) <= r * r)
            .map_or(Color::WHITE, |d| d.3)
    })
    .save_png(path)
    .unwrap();
}

const DRAWING: &str = r##"<svg xmlns="http://www.w3.org/2000/svg" width="200" height="120">
  <path d="M 10 10 L 60 12 Q 80 40 100 12 C 120 60 150 60 190 20" stroke="#333" fill="none"/>
  <path d="M 20 100 A 30 30 0 0 1 80 100 M 120 100 L 180 110" stroke="black" stroke-width="2" fill="none"/>
</svg>"##;

const PAINT: &str = r##"<svg xmlns="http://www.w3.org/2000/svg" width="200" height="120">
  <path d="M 30 30 L 170 30 L 170 90 Z" stroke="none" fill="#c04020"/>
  <path d="M 40 50 C 60 20 90 80 120 50" stroke="#2040c0" fill="none" stroke-width="4"/>
</svg>"##;

fn manifest(path: &Path) -> Manifest {
    Manifest::from_json(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn help_lists_every_flag() {
    let dir = tempfile::tempdir().unwrap();
    let out = strokeflow(&["--help"], dir.path());
    assert!(out.status.success());
    let help = String::from_utf8_lossy(&out.stdout);
    for flag in [
        "--dist-prox",
        "--painting",
        "--paint-svg",
        "--posterize-levels",
        "--max-fit-error",
        "--exact-max",
        "--frames-every",
        "--seconds-per-stroke",
        "--no-aa",
        "sketch",
        "vectorize",
        "sequence",
        "render",
        "run",
    ] {
        assert!(help.contains(flag), "help lacks {flag}");
    }
    let run_help = strokeflow(&["run", "--help"], dir.path());
    assert!(String::from_utf8_lossy(&run_help.stdout).contains("--dist-prox"));
}

#[test]
fn run_on_png_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    shapes_png(&dir.path().join("art.png"), 96, 1);
    let out = strokeflow(
        &["run", "art.png", "-o", "out", "--frames-every", "10"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stderr(&out).contains("dist_prox auto = 12"));
    let m = manifest(&dir.path().join("out/manifest.json"));
    assert_eq!(m.dist_prox, 12.0);
    assert!(m.strokes.iter().any(|s| s.stream == "sketch"));
    assert!(m.strokes.iter().any(|s| s.stream == "paint"));
    let first_paint = m.strokes.iter().position(|s| s.stream == "paint").unwrap();
    assert!(m.strokes[first_paint..].iter().all(|s| s.stream == "paint"));
    let svg = fs::read_to_string(dir.path().join("out/animated.svg")).unwrap();
    assert_eq!(strokeflow::parse_svg(&svg).unwrap().len(), m.strokes.len());
    let frames = fs::read_dir(dir.path().join("out/frames")).unwrap().count();
    assert_eq!(frames, m.strokes.len().div_ceil(10));
    assert!(dir.path().join("out/frames/frame_000001.png").is_file());
}

#[test]
fn sequence_on_svg_is_sketch_only() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sketch.svg"), DRAWING).unwrap();
    let out = strokeflow(
        &["sequence", "sketch.svg", "--dist-prox", "64", "-o", "out"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let m = manifest(&dir.path().join("out/manifest.json"));
    assert_eq!(m.dist_prox, 64.0);
    assert_eq!(m.strokes.len(), 5);
    assert!(m.strokes.iter().all(|s| s.stream == "sketch"));
    assert!(!dir.path().join("out/animated.svg").exists());
    assert!(!stderr(&out).contains("info: dist_prox auto"));
}

#[test]
fn paint_svg_adds_the_paint_stream() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("sketch.svg"), DRAWING).unwrap();
    fs::write(dir.path().join("paint.svg"), PAINT).unwrap();
    let out = strokeflow(
        &[
            "sequence",
            "sketch.svg",
            "--paint-svg",
            "paint.svg",
            "-o",
            "out",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", stderr(&out));
    let m = manifest(&dir.path().join("out/manifest.json"));
    let streams: Vec<&str> = m.strokes.iter().map(|s| s.stream.as_str()).collect();
    assert_eq!(streams.iter().filter(|s| **s == "paint").count(), 4);
    assert_eq!(streams.iter().position(|s| *s == "paint"), Some(5));
    assert!(m.strokes.iter().any(|s| s.filled));

    let off = strokeflow(
        &[
            "sequence",
            "sketch.svg",
            "--paint-svg",
            "paint.svg",
            "--painting",
            "false",
            "-o",
            "off",
        ],
        dir.path(),
    );
    assert!(off.status.success());
    assert_eq!(
        manifest(&dir.path().join("off/manifest.json"))
            .strokes
            .len(),
        5
    );
}

#[test]
fn stage_subcommands_chain() {
    let dir = tempfile::tempdir().unwrap();
    shapes_png(&dir.path().join("art.png"), 80, 2);
    let sketch = strokeflow(&["sketch", "art.png", "-o", "s"], dir.path());
    assert!(sketch.status.success(), "{}", stderr(&sketch));
    let drawing = RasterImage::load_png(dir.path().join("s/sketch.png")).unwrap();
    assert_eq!((drawing.width(), drawing.height()), (80, 80));
    assert!(drawing
        .pixels()
        .iter()
        .all(|c| c.is_grayscale() && (c.r == 0 || c.r == 255)));

    let vec = strokeflow(
        &[
            "vectorize",
            "art.png",
            "--sketch-png",
            "s/sketch.png",
            "-o",
            "v",
        ],
        dir.path(),
    );
    assert!(vec.status.success(), "{}", stderr(&vec));
    assert!(dir.path().join("v/paint.svg").is_file());

    let seq = strokeflow(
        &[
            "sequence",
            "v/sketch.svg",
            "--paint-svg",
            "v/paint.svg",
            "-o",
            "q",
        ],
        dir.path(),
    );
    assert!(seq.status.success(), "{}", stderr(&seq));

    let render = strokeflow(
        &["render", "v/sketch.svg", "--frames-every", "5", "-o", "r"],
        dir.path(),
    );
    assert!(render.status.success(), "{}", stderr(&render));
    assert!(dir.path().join("r/final.png").is_file());
    assert!(dir.path().join("r/frames/frame_000001.png").is_file());
}

#[test]
fn input_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    shapes_png(&p.join("art.png"), 48, 3);
    fs::write(p.join("sketch.svg"), DRAWING).unwrap();
    fs::write(
        p.join("broken.svg"),
        "<svg width='10' height='10'><path d='M 0 0 L'/>",
    )
    .unwrap();
    fs::write(p.join("badpath.svg"), "<svg xmlns='http://www.w3.org/2000/svg' width='10' height='10'><path d='M 0 0 Q 1' stroke='black'/></svg>").unwrap();
    fs::write(
        p.join("circle.svg"),
        "<svg xmlns='http://www.w3.org/2000/svg' width='10' height='10'><circle r='3'/></svg>",
    )
    .unwrap();
    fs::write(p.join("fake.png"), b"definitely not a png").unwrap();
    fs::write(p.join("notes.txt"), "hello").unwrap();
    RasterImage::filled(32, 32, Color::WHITE)
        .save_png(p.join("blank.png"))
        .unwrap();

    let cases: &[(&[&str], &str)] = &[
        (
            &["run", "art.png", "--dist-prox", "-5", "-o", "o"],
            "NegativeDistance",
        ),
        (&["run", "missing.png", "-o", "o"], "InputNotFound"),
        (&["run", "notes.txt", "-o", "o"], "UnsupportedInput"),
        (&["run", "fake.png", "-o", "o"], "ImageDecode"),
        (&["run", "broken.svg", "-o", "o"], "MalformedXml"),
        (&["run", "badpath.svg", "-o", "o"], "BadPathData"),
        (&["run", "circle.svg", "-o", "o"], "UnsupportedFeature"),
        (
            &["run", "sketch.svg", "--painting", "true", "-o", "o"],
            "MissingPaintInput",
        ),
        (
            &["run", "blank.png", "--painting", "false", "-o", "o"],
            "NoStrokes",
        ),
        (
            &["run", "art.png", "--exact-max", "40", "-o", "o"],
            "InvalidConfig",
        ),
        (
            &["run", "art.png", "--frames-every", "0", "-o", "o"],
            "InvalidConfig",
        ),
        (
            &["run", "art.png", "--posterize-levels", "1", "-o", "o"],
            "InvalidFitParams",
        ),
        (
            &["run", "art.png", "--sigma", "0", "-o", "o"],
            "InvalidEdgeParams",
        ),
        (&["sequence", "art.png", "-o", "o"], "UnsupportedInput"),
        (&["render", "art.png", "-o", "o"], "UnsupportedInput"),
        (&["sketch", "sketch.svg", "-o", "o"], "UnsupportedInput"),
    ];
    for (args, code) in cases {
        let out = strokeflow(args, p);
        assert_eq!(out.status.code(), Some(1), "{args:?}: {}", stderr(&out));
        assert!(
            stderr(&out).contains(&format!("error [{code}]")),
            "{args:?}: {}",
            stderr(&out)
        );
    }
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        &["frobnicate"][..],
        &["run"][..],
        &["run", "a.png", "-o", "o", "--dist-prox", "far"][..],
        &["run", "a.png", "-o", "o", "--painting", "maybe"][..],
        &["run", "a.png", "-o", "o", "--no-such-flag"][..],
    ] {
        let out = strokeflow(args, dir.path());
        assert_eq!(out.status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn thread_count_is_validated_and_irrelevant() {
    let dir = tempfile::tempdir().unwrap();
    shapes_png(&dir.path().join("art.png"), 64, 4);
    let mut outputs = Vec::new();
    for threads in ["1", "2", "0"] {
        let out = Command::new(env!("CARGO_BIN_EXE_strokeflow"))
            .args(["run", "art.png", "-o", threads])
            .env("STROKEFLOW_THREADS", threads)
            .current_dir(dir.path())
            .output()
            .unwrap();
        assert!(out.status.success(), "{}", stderr(&out));
        let read = |f: &str| fs::read(dir.path().join(threads).join(f)).unwrap();
        outputs.push((
            read("manifest.json"),
            read("animated.svg"),
            read("frames/frame_000001.png"),
        ));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));

    let bad = Command::new(env!("CARGO_BIN_EXE_strokeflow"))
        .args(["run", "art.png", "-o", "x"])
        .env("STROKEFLOW_THREADS", "many")
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("error [InvalidEnvironment]"));
}
