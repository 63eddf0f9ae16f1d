use std::path::Path;
use std::process::{Command, Output};

fn nexlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nexlab"))
        .args(args)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn read(dir: &Path, name: &str) -> Vec<u8> {
    std::fs::read(dir.join(name)).unwrap()
}

#[test]
fn rays_bundle_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("rays");
    let o = nexlab(&[
        "rays",
        "--c-re",
        "0",
        "--depth",
        "3",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stdout).contains("8 lifts"));
    let o = nexlab(&["report", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("rays: 8 lifts at depth 3"));
}

#[test]
fn identical_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for out in [&a, &b] {
        let o = nexlab(&[
            "leafcheck",
            "--depth",
            "20",
            "--cloud",
            "5000",
            "--seed",
            "7",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    }
    // config.json embeds the output path, so compare the rest
    for name in ["leaf_0.json", "leaf_0.csv", "leaf_4.csv", "leafcheck.json"] {
        let (x, y) = (read(&a, name), read(&b, name));
        let strip = |v: Vec<u8>| {
            String::from_utf8(v)
                .unwrap()
                .replace(a.to_str().unwrap(), "")
                .replace(b.to_str().unwrap(), "")
        };
        assert_eq!(strip(x), strip(y), "{name}");
    }
}

#[test]
fn config_file_roundtrip_and_override() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let o = nexlab(&[
        "feigenbaum",
        "--levels",
        "6",
        "--out",
        first.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let cfg = first.join("config.json");
    let second = dir.path().join("second");
    let o = nexlab(&[
        "feigenbaum",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        second.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&read(&second, "feigenbaum.json")).unwrap();
    assert_eq!(v["parameter"]["superstable"].as_array().unwrap().len(), 6);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x");
    let out = out.to_str().unwrap();
    // bad config value
    assert_eq!(
        code(&nexlab(&["deepness", "--radii", "0.1,0.2", "--out", out])),
        2
    );
    // unparsable flag
    assert_eq!(code(&nexlab(&["raster", "--res", "many"])), 2);
    // malformed config file
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        code(&nexlab(&["raster", "--config", bad.to_str().unwrap()])),
        2
    );
    // obstructed ray: numeric failure
    assert_eq!(
        code(&nexlab(&[
            "rays",
            "--c-re",
            "-1",
            "--angle",
            "3.141592653589793",
            "--out",
            out
        ])),
        3
    );
    // feigenbaum depth out of range
    assert_eq!(
        code(&nexlab(&["feigenbaum", "--levels", "30", "--out", out])),
        3
    );
    // report on a directory with a corrupt bundle file
    let bundle = dir.path().join("b");
    assert_eq!(
        code(&nexlab(&[
            "feigenbaum",
            "--levels",
            "3",
            "--out",
            bundle.to_str().unwrap()
        ])),
        0
    );
    std::fs::write(bundle.join("feigenbaum.json"), "{").unwrap();
    assert_eq!(code(&nexlab(&["report", bundle.to_str().unwrap()])), 4);
}

#[test]
fn raster_writes_cache_and_image() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r");
    let o = nexlab(&[
        "raster",
        "--c-re",
        "-1",
        "--res",
        "64",
        "--max-iter",
        "200",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(&read(&out, "raster.nexr")[..5], b"NEXR1");
    assert_eq!(&read(&out, "raster.pgm")[..2], b"P5");
    assert!(out.join("timing.json").exists());
}
