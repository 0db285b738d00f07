use std::fs;
use std::path::Path;

use texnoise::pipeline::assess::{assess_entries, OUTPUT_FILES};
use texnoise::pipeline::{generate_synthetic, read_manifest, run_assessment, RunConfig, SyntheticSpec};
use texnoise::texture::Method;

fn no_recon(dir: &Path) -> RunConfig {
    RunConfig {
        manifest: dir.join("manifest.csv"),
        output_dir: dir.join("out"),
        recon_filter: None,
        ..RunConfig::default()
    }
}

fn read_outputs(dir: &Path) -> Vec<Vec<u8>> {
    OUTPUT_FILES.iter().map(|f| fs::read(dir.join(f)).unwrap()).collect()
}

#[test]
fn noise_free_cases_give_identical_versions() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 10,
        noise_variance: (0.0, 0.0),
        ..SyntheticSpec::default()
    };
    let entries = generate_synthetic(&spec, dir.path()).unwrap();
    let cfg = no_recon(dir.path());
    let run = assess_entries(&entries, &cfg).unwrap();
    assert!(run.failures.is_empty(), "{:?}", run.failures);
    for case in &run.cases {
        assert_eq!(case.noise.sigma2, 0.0);
        for v in 1..3 {
            for (a, b) in case.features[0].iter().zip(&case.features[v]) {
                assert_eq!(a.values, b.values, "{} {}", case.case_id, a.method);
            }
        }
    }
    for e in &run.report.entries {
        assert_eq!(e.j_oc.j, 0.0, "{}", e.method);
        assert_eq!(e.j_on.j, 0.0, "{}", e.method);
    }
}

#[test]
fn outputs_do_not_depend_on_worker_count() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 24,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, dir.path()).unwrap();
    let mut outputs = Vec::new();
    for (threads, name) in [(1, "a"), (8, "b"), (8, "c")] {
        let cfg = RunConfig {
            threads,
            output_dir: dir.path().join(name),
            ..no_recon(dir.path())
        };
        run_assessment(&cfg).unwrap();
        outputs.push(read_outputs(&cfg.output_dir));
    }
    assert_eq!(outputs[0], outputs[1]);
    assert_eq!(outputs[1], outputs[2]);
}

#[test]
fn regenerated_corpus_is_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 6,
        seed: 42,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, a.path()).unwrap();
    generate_synthetic(&spec, b.path()).unwrap();
    for rel in ["manifest.csv", "images/case004.pgm", "masks/case004_mask.pgm"] {
        assert_eq!(fs::read(a.path().join(rel)).unwrap(), fs::read(b.path().join(rel)).unwrap());
    }
}

#[test]
fn wavelet_packets_are_less_noise_susceptible_than_gmrf() {
    let dir = tempfile::tempdir().unwrap();
    generate_synthetic(&SyntheticSpec::default(), dir.path()).unwrap();
    let run = run_assessment(&no_recon(dir.path())).unwrap();
    let wp = run.report.get(Method::Wp).j_on.j;
    let gmrf = run.report.get(Method::Gmrf).j_on.j;
    assert!(wp < gmrf, "WP {wp} vs GMRF {gmrf}");
}

#[test]
fn unreadable_case_is_recorded_and_skipped() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 5,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, dir.path()).unwrap();
    fs::remove_file(dir.path().join("images/case002.pgm")).unwrap();
    let cfg = no_recon(dir.path());
    let run = run_assessment(&cfg).unwrap();
    assert_eq!(run.cases.len(), 4);
    assert_eq!(run.failures.len(), 1);
    assert_eq!(run.failures[0].case_id, "case002");
    let failures = fs::read_to_string(cfg.output_dir.join("failures.csv")).unwrap();
    assert!(failures.lines().nth(1).unwrap().starts_with("case002,"));
    let noise = fs::read_to_string(cfg.output_dir.join("noise.csv")).unwrap();
    assert_eq!(noise.lines().count(), 5);
}

#[test]
fn background_inside_body_fails_the_case() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 3,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, dir.path()).unwrap();
    // move case001's background ROI onto the body centre
    let manifest = dir.path().join("manifest.csv");
    let text = fs::read_to_string(&manifest).unwrap();
    let edited: Vec<String> = text
        .lines()
        .map(|l| {
            if l.starts_with("case001,") {
                l.replace(",0,0,32", ",48,48,32")
            } else {
                l.to_string()
            }
        })
        .collect();
    fs::write(&manifest, edited.join("\n")).unwrap();
    let entries = read_manifest(&manifest).unwrap();
    assert_eq!(entries[0].background_roi.origin_x, 48);
    let run = assess_entries(&entries, &no_recon(dir.path())).unwrap();
    assert_eq!(run.failures.len(), 1);
    assert!(run.failures[0].message.contains("mask"), "{}", run.failures[0].message);
}

#[test]
fn config_file_paths_resolve_against_its_directory() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 4,
        ..SyntheticSpec::default()
    };
    generate_synthetic(&spec, dir.path()).unwrap();
    let cfg_path = dir.path().join("run.cfg");
    fs::write(&cfg_path, "manifest = manifest.csv\noutput_dir = res\nrecon_filter = none\n").unwrap();
    let cfg = RunConfig::load(&cfg_path).unwrap();
    run_assessment(&cfg).unwrap();
    for f in OUTPUT_FILES {
        assert!(dir.path().join("res").join(f).is_file(), "{f}");
    }
    let sep = fs::read_to_string(dir.path().join("res/separability.csv")).unwrap();
    assert_eq!(sep.lines().next(), Some("method,J_oc,J_on"));
    assert_eq!(sep.lines().count(), 1 + Method::ALL.len());
}

#[test]
fn too_few_cases_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        n_cases: 1,
        ..SyntheticSpec::default()
    };
    let entries = generate_synthetic(&spec, dir.path()).unwrap();
    let err = assess_entries(&entries, &no_recon(dir.path())).unwrap_err();
    assert!(err.to_string().contains("at least 2"), "{err}");
}
