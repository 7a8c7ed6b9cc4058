use std::fs;
use std::path::{Path, PathBuf};

use serde_json::Value;
use tempfile::TempDir;
use wignerkit::mapspec::serialize_frame_samples;
use wignerkit::{ic_vectors, random_unit_vector, seeded, UnitVector};
use wignerkit_cli::{run, EXIT_INPUT, EXIT_OK, EXIT_REJECTED};

struct Sandbox(TempDir);

impl Sandbox {
    fn new() -> Self {
        Self(tempfile::tempdir().unwrap())
    }

    fn path(&self, name: &str) -> PathBuf {
        self.0.path().join(name)
    }

    fn run(&self, args: &[&str]) -> i32 {
        let mut full = vec!["wignerkit"];
        full.extend_from_slice(args);
        full.push("--quiet");
        run(full)
    }

    fn gen(&self, generator: &str, dim: usize, seed: u64, name: &str) -> PathBuf {
        let out = self.path(name);
        let code = self.run(&[
            "gen",
            generator,
            "--dim",
            &dim.to_string(),
            "--seed",
            &seed.to_string(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(code, EXIT_OK);
        out
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn json(path: &Path) -> Value {
    serde_json::from_slice(&fs::read(path).unwrap()).unwrap()
}

#[test]
fn reconstruct_identity_document() {
    let sb = Sandbox::new();
    let spec = sb.path("id.json");
    fs::write(
        &spec,
        r#"{"schema_version": 1, "dim": 3, "kind": "induced",
            "matrix": [[[1,0],[0,0],[0,0]],[[0,0],[1,0],[0,0]],[[0,0],[0,0],[1,0]]]}"#,
    )
    .unwrap();
    let out = sb.path("report.json");
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&spec), "--out", s(&out)]),
        EXIT_OK
    );
    let report = json(&out);
    assert_eq!(report["status"], "ok");
    assert_eq!(report["linearity"], "unitary");
    assert_eq!(report["prng"], "chacha20-v1");
}

#[test]
fn reconstruct_rejects_constant_map_at_gate() {
    let sb = Sandbox::new();
    let spec = sb.gen("adversarial:constant", 3, 0, "c.json");
    let out = sb.path("report.json");
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&spec), "--out", s(&out)]),
        EXIT_REJECTED
    );
    let report = json(&out);
    assert_eq!(report["status"], "error");
    assert_eq!(report["error_stage"], "verify_orth_preserving");
    assert_eq!(report["stage_log"][0]["stage"], "verify_orth_preserving");
}

#[test]
fn reconstruct_input_errors_exit_2() {
    let sb = Sandbox::new();
    let spec = sb.gen("induced", 4, 1, "u.json");
    let truncated = sb.path("truncated.json");
    let bytes = fs::read(&spec).unwrap();
    fs::write(&truncated, &bytes[..bytes.len() / 2]).unwrap();
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&truncated)]),
        EXIT_INPUT
    );
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&sb.path("missing.json"))]),
        EXIT_INPUT
    );
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&spec), "--dim", "5"]),
        EXIT_INPUT
    );
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&spec), "--dim", "2"]),
        EXIT_INPUT
    );
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&spec), "--tol-fit=-1"]),
        EXIT_INPUT
    );
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&spec), "--tol-scale", "0"]),
        EXIT_INPUT
    );
    assert_eq!(sb.run(&["frobnicate"]), EXIT_INPUT);
}

#[test]
fn verify_examples() {
    let sb = Sandbox::new();
    let u = sb.gen("induced", 4, 2, "u.json");
    assert_eq!(sb.run(&["verify", "--spec", s(&u)]), EXIT_OK);

    let breaker = sb.gen("adversarial:cosp_breaker", 4, 0, "b.json");
    let out = sb.path("verify.json");
    assert_eq!(
        sb.run(&["verify", "--spec", s(&breaker), "--out", s(&out)]),
        EXIT_REJECTED
    );
    let doc = json(&out);
    assert_eq!(doc["gate"]["passed"], true);
    assert_eq!(doc["image_cosp"], false);
    assert_eq!(doc["message"], "image family is not a COSP");

    let noisy = sb.path("n.json");
    assert_eq!(
        sb.run(&[
            "gen",
            "adversarial:noisy_induced",
            "--param",
            "epsilon=1e-2",
            "--dim",
            "4",
            "--out",
            s(&noisy)
        ]),
        EXIT_OK
    );
    assert_eq!(
        sb.run(&["verify", "--spec", s(&noisy), "--out", s(&out)]),
        EXIT_REJECTED
    );
    assert!(json(&out)["gate"]["max_transition"].as_f64().unwrap() > 1e-8);
}

#[test]
fn tolerance_scale_loosens_the_gate() {
    let sb = Sandbox::new();
    let noisy = sb.path("n.json");
    assert_eq!(
        sb.run(&[
            "gen",
            "adversarial:noisy_induced",
            "--param",
            "epsilon=1e-4",
            "--dim",
            "4",
            "--out",
            s(&noisy)
        ]),
        EXIT_OK
    );
    // gate ≈ 1.3e-8 at this ε; still a distortion of the COSP at 1e-4 scale
    assert_eq!(sb.run(&["verify", "--spec", s(&noisy)]), EXIT_REJECTED);
    assert_eq!(
        sb.run(&["verify", "--spec", s(&noisy), "--tol-scale", "1e6"]),
        EXIT_OK
    );
}

fn sample_file(
    sb: &Sandbox,
    name: &str,
    samples: &[(UnitVector<f64>, f64)],
    dim: usize,
) -> PathBuf {
    let path = sb.path(name);
    fs::write(&path, serialize_frame_samples(dim, samples)).unwrap();
    path
}

#[test]
fn gleason_fit_maximally_mixed() {
    let sb = Sandbox::new();
    let samples: Vec<_> = ic_vectors::<f64>(3)
        .unwrap()
        .into_iter()
        .map(|v| (v, 1.0 / 3.0))
        .collect();
    let spec = sample_file(&sb, "mm.json", &samples, 3);
    let out = sb.path("fit.json");
    assert_eq!(
        sb.run(&["gleason-fit", "--spec", s(&spec), "--out", s(&out)]),
        EXIT_OK
    );
    let doc = json(&out);
    for r in 0..3 {
        for c in 0..3 {
            let want = if r == c { 1.0 / 3.0 } else { 0.0 };
            assert!((doc["density"][r][c][0].as_f64().unwrap() - want).abs() < 1e-12);
            assert!(doc["density"][r][c][1].as_f64().unwrap().abs() < 1e-12);
        }
    }
}

#[test]
fn gleason_fit_bumped_sample_is_rejected() {
    let sb = Sandbox::new();
    let mut samples: Vec<_> = ic_vectors::<f64>(3)
        .unwrap()
        .into_iter()
        .map(|v| (v, 1.0 / 3.0))
        .collect();
    let mut rng = seeded(11);
    for _ in 0..40 {
        samples.push((random_unit_vector(3, &mut rng), 1.0 / 3.0));
    }
    samples[0].1 += 0.05;
    let spec = sample_file(&sb, "bumped.json", &samples, 3);
    let out = sb.path("fit.json");
    assert_eq!(
        sb.run(&["gleason-fit", "--spec", s(&spec), "--out", s(&out)]),
        EXIT_REJECTED
    );
    let doc = json(&out);
    assert_eq!(doc["error_code"], "inconsistent-samples");
    let residual = doc["residual"].as_f64().unwrap();
    // least squares spreads part of the bump over the other samples
    assert!((0.03..=0.05).contains(&residual), "{residual}");
}

#[test]
fn gleason_fit_too_few_samples() {
    let sb = Sandbox::new();
    let samples: Vec<_> = ic_vectors::<f64>(3)
        .unwrap()
        .into_iter()
        .take(4)
        .map(|v| (v, 1.0 / 3.0))
        .collect();
    let spec = sample_file(&sb, "four.json", &samples, 3);
    let out = sb.path("fit.json");
    assert_eq!(
        sb.run(&["gleason-fit", "--spec", s(&spec), "--out", s(&out)]),
        EXIT_REJECTED
    );
    assert_eq!(json(&out)["error_code"], "design-deficient");
}

#[test]
fn gen_examples() {
    let sb = Sandbox::new();
    let a = sb.gen("induced", 4, 7, "a.json");
    let b = sb.gen("induced", 4, 7, "b.json");
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let c = sb.gen("induced", 4, 8, "c.json");
    assert_ne!(fs::read(&a).unwrap(), fs::read(&c).unwrap());

    let constant = sb.gen("adversarial:constant", 3, 0, "k.json");
    assert_eq!(sb.run(&["verify", "--spec", s(&constant)]), EXIT_REJECTED);

    let anti = sb.gen("induced-antiunitary", 5, 0, "anti.json");
    let out = sb.path("r.json");
    assert_eq!(
        sb.run(&["reconstruct", "--spec", s(&anti), "--out", s(&out)]),
        EXIT_OK
    );
    assert_eq!(json(&out)["linearity"], "antiunitary");

    let bad = s(&sb.path("x.json")).to_string();
    assert_eq!(sb.run(&["gen", "bogus", "--out", &bad]), EXIT_INPUT);
    assert_eq!(
        sb.run(&["gen", "adversarial:bogus", "--out", &bad]),
        EXIT_INPUT
    );
    assert_eq!(
        sb.run(&["gen", "induced", "--param", "a=1", "--out", &bad]),
        EXIT_INPUT
    );
    assert_eq!(sb.run(&["gen", "induced"]), EXIT_INPUT);
}

#[test]
fn self_test_passes() {
    let sb = Sandbox::new();
    let out = sb.path("self.json");
    assert_eq!(sb.run(&["self-test", "--out", s(&out)]), EXIT_OK);
    assert_eq!(json(&out)["status"], "ok");
}
