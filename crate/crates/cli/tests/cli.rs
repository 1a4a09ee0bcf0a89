use std::process::{Command, Output};

use deformq::{Deformation, OdeConfig, QuadratureConfig, SystemSpec, UnitsConvention};
use deformq_cli::config::{Format, LawKind, LawSpec, OutputSpec};
use deformq_cli::RunConfig;
use proptest::prelude::*;
use serde_json::Value;

fn deformq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_deformq"))
        .args(args)
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn system() -> impl Strategy<Value = SystemSpec> {
    prop_oneof![
        (0.1f64..10.0, 0.1f64..10.0).prop_map(|(a, m)| SystemSpec::QuantumBox { a, m }),
        (0.1f64..10.0, proptest::option::of(0.0f64..5.0)).prop_map(|(omega0, ground_energy)| {
            SystemSpec::Harmonic {
                omega0,
                ground_energy,
            }
        }),
        (0.1f64..10.0, 0.5f64..20.0, 0.1f64..10.0).prop_map(|(k, nu, m)| SystemSpec::PowerLaw {
            k,
            nu,
            m
        }),
    ]
}

proptest! {
    #[test]
    fn run_config_round_trips(
        system in system(),
        s in -1.0f64..1.0,
        exponential in any::<bool>(),
        hbar in 0.1f64..3.0,
        rel_tol in 1e-12f64..1e-4,
        p in proptest::option::of(-0.9f64..3.0),
        json in any::<bool>(),
        phonon in proptest::option::of(0.1f64..5.0),
        particles in 1u64..100,
    ) {
        let cfg = RunConfig {
            system,
            deformation: if exponential { Deformation::exponential(s) } else { Deformation::linear(s) },
            units: UnitsConvention { hbar, boltzmann: 0.5 },
            ode: OdeConfig { rel_tol, ..OdeConfig::default() },
            quad: QuadratureConfig { rel_tol, endpoint_singularity_exponent: p, ..QuadratureConfig::default() },
            output: OutputSpec {
                format: if json { Format::Json } else { Format::Csv },
                path: json.then(|| "out/run.json".into()),
            },
            law: LawSpec {
                kind: if phonon.is_some() { LawKind::Phonon } else { LawKind::System },
                particles,
                phonon_a: phonon,
            },
        };
        let back = RunConfig::from_json(&cfg.to_json()).unwrap();
        prop_assert_eq!(back, cfg);
    }
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.json");
    std::fs::write(
        &path,
        r#"{"system": {"kind": "harmonic", "omega0": 2.0}, "deformation": {"s": 0.1}, "output": {"format": "json"}}"#,
    )
    .unwrap();
    let path = path.to_str().unwrap();

    let from_file: Value =
        serde_json::from_slice(&deformq(&["spectrum", "--config", path, "--n-max", "2"]).stdout)
            .unwrap();
    assert_eq!(from_file["metadata"]["config"]["deformation"]["s"], 0.1);
    assert_eq!(from_file["metadata"]["config"]["system"]["omega0"], 2.0);
    assert_eq!(from_file["records"].as_array().unwrap().len(), 3);
    // E₀ = ħω₀/2 = 1
    assert_eq!(from_file["records"][0]["E_ode"], 1.0);

    let overridden = deformq(&[
        "spectrum", "--config", path, "--s", "0", "--format", "csv", "--n-max", "2",
    ]);
    let text = stdout(&overridden);
    assert!(text.starts_with("n,E_ode,E_closed,rel_diff\n"));
    let last: Vec<f64> = text
        .lines()
        .nth(3)
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(last[0], 2.0);
    // undeformed: E₂ = 1 + 2·2
    assert!((last[1] - 5.0).abs() < 1e-12 && last[2] == 5.0, "{text}");
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("levels.csv");
    let o = deformq(&["spectrum", "--n-max", "4", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(out).unwrap();
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 6);
    assert!(text.ends_with("# cutoff: {\"kind\":\"level_cap_reached\"}\n"));
}

#[test]
fn box_spectrum_reports_divergence() {
    let o = deformq(&[
        "spectrum", "--system", "box", "--s", "0.01", "--n-max", "50", "--format", "json",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["metadata"]["cutoff"]["kind"], "divergence_detected");
    let n_star = v["metadata"]["cutoff"]["n_star"].as_f64().unwrap();
    let pole = std::f64::consts::PI / (2.0 * (std::f64::consts::PI / 2f64.sqrt()) * 0.1);
    assert!((n_star - pole).abs() < 1e-6);
    assert_eq!(v["records"].as_array().unwrap().len(), 8);
}

#[test]
fn thermo_rows_per_route() {
    let o = deformq(&["thermo", "--s", "0.1", "--T", "0.5,1,2"]);
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(rows.len(), 6);
    assert!(rows[0].ends_with(",exact-quadrature") && rows[1].ends_with(",first-order"));
    // ideal gas, first order
    let o = deformq(&[
        "thermo",
        "--law",
        "ideal-gas",
        "--s",
        "0.1",
        "--T",
        "1",
        "--route",
        "first-order",
    ]);
    assert_eq!(stdout(&o), "T,Z,U,C,route\n1,,0.45,0.4,first-order\n");
}

#[test]
fn exponential_family_uses_effective_temperature() {
    let o = deformq(&[
        "thermo",
        "--family",
        "exponential",
        "--s",
        "0.25",
        "--T",
        "2",
        "--route",
        "exact",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let fields: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    // 1/T* = 1/2 + 1/4, flat density: Z = U = T*
    let t_star = 4.0 / 3.0;
    let z: f64 = fields[1].parse().unwrap();
    let u: f64 = fields[2].parse().unwrap();
    assert!(((z - t_star) / t_star).abs() < 1e-9);
    assert!(((u - t_star) / t_star).abs() < 1e-12);
    assert_eq!(fields[4], "closed-form");
}

#[test]
fn sweep_is_ordered_and_monotone() {
    let o = deformq(&[
        "sweep",
        "--axis",
        "s",
        "--start",
        "0",
        "--stop",
        "0.2",
        "--count",
        "21",
        "--observable",
        "U",
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    let rows: Vec<(f64, f64)> = text
        .lines()
        .skip(1)
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            assert_eq!(f[2], "");
            (f[0].parse().unwrap(), f[1].parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 21);
    assert!(rows.windows(2).all(|w| w[1].0 > w[0].0 && w[1].1 < w[0].1));
}

#[test]
fn partial_sweep_failure_still_succeeds() {
    // s < 0 rows fail on the exact route, s ≥ 0 rows succeed
    let o = deformq(&[
        "sweep",
        "--axis",
        "s",
        "--start",
        "-0.1",
        "--stop",
        "0.1",
        "--count",
        "3",
        "--observable",
        "Z",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[1].contains("exact route undefined"));
    let z: f64 = lines[2]
        .strip_prefix("0,")
        .unwrap()
        .trim_end_matches(',')
        .parse()
        .unwrap();
    assert!((z - 1.0).abs() < 1e-12);
}

#[test]
fn exit_codes() {
    let cases: [(&[&str], i32); 6] = [
        (&["spectrum", "--n-max", "2"], 0),
        (&["spectrum", "--s", "nan"], 2),
        (&["thermo", "--T", "-1"], 2),
        (
            &[
                "sweep",
                "--axis",
                "s",
                "--start",
                "0",
                "--stop",
                "1",
                "--count",
                "1",
                "--observable",
                "U",
            ],
            2,
        ),
        (&["spectrum", "--config", "/nonexistent/run.json"], 4),
        (
            &["dos", "--system", "box", "--s", "-0.5", "--e-max", "3"],
            2,
        ),
    ];
    for (args, code) in cases {
        let o = deformq(args);
        assert_eq!(
            o.status.code(),
            Some(code),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        if code == 2 {
            assert!(
                String::from_utf8_lossy(&o.stderr).contains("field: "),
                "{args:?}"
            );
        }
    }
}

#[test]
fn selftest_json_lists_every_check() {
    let o = deformq(&["selftest", "--format", "json"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    let records = v["records"].as_array().unwrap();
    assert_eq!(records.len(), 11);
    let ids: Vec<u64> = records.iter().map(|r| r["id"].as_u64().unwrap()).collect();
    assert_eq!(ids, (1..=11).collect::<Vec<_>>());
}
