use std::fs;
use std::path::Path;
use std::process::Command;

use interpretable_paths::cli::{
    execute, run, sidecar_path, DataArgs, ParetoArgs, PathArgs, RunConfig, TreeArgs,
};
use interpretable_paths::data::{load_regression_csv, toy_dataset, ToySpec};
use interpretable_paths::linreg::{exact_path_search, mse_cost};
use interpretable_paths::path::PathWeights;
use proptest::prelude::*;
use proptest::test_runner::RngSeed;

const BIN: &str = env!("CARGO_BIN_EXE_ipaths");
const DATA: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/data");

fn ipaths(args: &[&str]) -> (i32, String, String) {
    let out = Command::new(BIN).args(args).output().unwrap();
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn read_rows(path: &Path) -> Vec<csv::StringRecord> {
    csv::Reader::from_path(path)
        .unwrap()
        .records()
        .map(|r| r.unwrap())
        .collect()
}

#[test]
fn path_table_round_trips_at_full_precision() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.csv");
    let cfg = RunConfig::Path(PathArgs {
        k: 3,
        output: Some(out.clone()),
        ..Default::default()
    });
    execute(&cfg).unwrap();

    let inst = toy_dataset(&ToySpec::height_weight(), 0).unwrap();
    let expect = exact_path_search(&inst, &[0.0, 0.0], 3, &PathWeights::Geometric(1.0)).unwrap();
    let rows = read_rows(&out);
    assert_eq!(rows.len(), 4);
    assert_eq!(
        rows[0][3].parse::<f64>().unwrap(),
        mse_cost(&inst, &[0.0, 0.0]).unwrap()
    );
    let models = expect.path.models();
    for (k, row) in rows[1..].iter().enumerate() {
        let i = expect.path.indices[k];
        assert_eq!(&row[1], inst.feature_names()[i].as_str());
        assert_eq!(row[2].parse::<f64>().unwrap(), models[k][i]);
        assert_eq!(
            row[3].parse::<f64>().unwrap(),
            expect.cost_sequence.step(k + 1)
        );
    }

    let side: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(sidecar_path(&out)).unwrap()).unwrap();
    assert_eq!(side["objective"].as_f64().unwrap(), expect.objective);
    assert_eq!(side["config"]["task"], "path");
    let finals = expect.path.final_model();
    assert_eq!(side["final_model"]["Height"].as_f64().unwrap(), finals[0]);
}

#[test]
fn identical_configs_write_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    for (tag, args) in [
        (
            "path",
            vec![
                "path", "--K", "3", "--solver", "local", "--q", "1", "--T", "40", "--seed", "9",
            ],
        ),
        ("pareto", vec!["pareto", "--lambda-grid", "0.01,100,13"]),
        ("baselines", vec!["baselines", "--K", "2"]),
    ] {
        let mut outputs = Vec::new();
        let out = dir.path().join(format!("{tag}.csv"));
        for _ in 0..2 {
            let mut a = args.clone();
            let out_str = out.to_str().unwrap().to_string();
            a.extend(["--output", &out_str]);
            let (code, _, err) = ipaths(&a);
            assert_eq!(code, 0, "{err}");
            outputs.push((
                fs::read(&out).unwrap(),
                fs::read(sidecar_path(&out)).unwrap(),
            ));
        }
        assert_eq!(outputs[0], outputs[1], "{tag} output differs between runs");
    }
}

#[test]
fn config_file_reproduces_flag_run() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("run.json");
    let flag_out = dir.path().join("flags.csv");
    let file_out = dir.path().join("file.csv");
    let (code, _, _) = ipaths(&[
        "path",
        "--K",
        "2",
        "--gamma",
        "2",
        "--output",
        flag_out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let cfg = serde_json::json!({
        "task": "path",
        "k": 2,
        "weights": { "gamma": 2.0 },
        "output": file_out,
    });
    fs::write(&cfg_path, cfg.to_string()).unwrap();
    let (code, _, err) = ipaths(&["--config", cfg_path.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(fs::read(flag_out).unwrap(), fs::read(file_out).unwrap());
}

#[test]
fn exit_codes_separate_failure_classes() {
    let schools = format!("{DATA}/caschool.csv");
    assert_eq!(ipaths(&["path"]).0, 0);
    assert_eq!(ipaths(&["path", "--gamma", "1", "--alpha", "1"]).0, 2);
    assert_eq!(ipaths(&["path", "--gamma", "-1"]).0, 2);
    assert_eq!(ipaths(&["path", "--start-model", r#"{"Shoe": 1}"#]).0, 2);
    assert_eq!(ipaths(&[]).0, 2);
    assert_eq!(
        ipaths(&["path", "--input", "/no/such/file.csv", "--target", "y"]).0,
        3
    );
    assert_eq!(
        ipaths(&["path", "--input", &schools, "--target", "Nope"]).0,
        3
    );
    let (code, _, err) = ipaths(&[
        "path",
        "--input",
        &schools,
        "--target",
        "TestScore",
        "--K",
        "6",
        "--solver",
        "exact",
        "--budget",
        "10",
    ]);
    assert_eq!(code, 4, "{err}");
    assert_eq!(ipaths(&["--help"]).0, 0);
}

#[test]
fn constant_column_is_a_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("c.csv");
    fs::write(&f, "a,b,y\n1,5,1\n2,5,3\n3,5,2\n").unwrap();
    let (code, _, err) = ipaths(&[
        "path",
        "--input",
        f.to_str().unwrap(),
        "--target",
        "y",
        "--standardize",
    ]);
    assert_eq!(code, 3);
    assert!(err.contains('b'), "{err}");
}

#[test]
fn pareto_output_is_mutually_non_dominated() {
    let out = run(&RunConfig::Pareto(ParetoArgs::default())).unwrap();
    let mut r = csv::Reader::from_reader(out.csv.as_bytes());
    assert_eq!(
        r.headers().unwrap(),
        vec!["lambda", "K", "cost", "interpretability_loss"]
    );
    let pts: Vec<(f64, f64)> = r
        .records()
        .map(|rec| {
            let rec = rec.unwrap();
            (rec[2].parse().unwrap(), rec[3].parse().unwrap())
        })
        .collect();
    assert!(pts.len() >= 3);
    for (i, a) in pts.iter().enumerate() {
        for (j, b) in pts.iter().enumerate() {
            let dominated = a.0 <= b.0 && a.1 <= b.1 && (a.0 < b.0 || a.1 < b.1);
            assert!(i == j || !dominated, "{a:?} dominates {b:?}");
        }
    }
}

#[test]
fn schools_path_from_meal_start() {
    let cfg = RunConfig::Path(PathArgs {
        data: DataArgs {
            input: Some(format!("{DATA}/caschool.csv").into()),
            target: Some("TestScore".into()),
            standardize: true,
            cost_scale: interpretable_paths::cli::ScaleArg::HalfMse,
            ..Default::default()
        },
        k: 4,
        start_ols: Some(vec!["MealPct".into()]),
        ..Default::default()
    });
    let out = run(&cfg).unwrap();
    let rows: Vec<&str> = out.csv.lines().collect();
    assert_eq!(rows.len(), 6);
    let last_cost: f64 = rows[5].rsplit(',').next().unwrap().parse().unwrap();
    assert!(last_cost <= 0.10, "final cost {last_cost}");
    let start_json =
        serde_json::json!({ "MealPct": out.sidecar["start_model"]["MealPct"] }).to_string();
    let same = run(&RunConfig::Path(PathArgs {
        start_ols: None,
        start_model: Some(start_json),
        ..match cfg {
            RunConfig::Path(p) => p,
            _ => unreachable!(),
        }
    }))
    .unwrap();
    assert_eq!(same.csv, out.csv);
}

#[test]
fn treepath_table_on_petals() {
    let cfg = RunConfig::Treepath(TreeArgs {
        input: Some(format!("{DATA}/iris_petals.csv").into()),
        target: Some("species".into()),
        k: 3,
        ..Default::default()
    });
    let out = run(&cfg).unwrap();
    let rows: Vec<&str> = out.csv.lines().collect();
    assert_eq!(rows[0], "step,leaf,feature,threshold,cost");
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[1], "0,,,,50");
}

#[test]
fn datagen_writes_the_instance_it_describes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("toy.csv");
    let (code, _, _) = ipaths(&["datagen", "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    let (inst, report) = load_regression_csv(&out, "Age", None, false).unwrap();
    assert_eq!(report.rows_used, 100);
    let toy = toy_dataset(&ToySpec::height_weight(), 0).unwrap();
    assert_eq!(inst.x(), toy.x());
    assert_eq!(inst.y(), toy.y());
}

fn proptest_config() -> ProptestConfig {
    ProptestConfig {
        cases: 200,
        rng_seed: RngSeed::Fixed(0x51a_2026),
        failure_persistence: None,
        ..ProptestConfig::default()
    }
}

proptest! {
    #![proptest_config(proptest_config())]

    #[test]
    fn standardized_columns_have_zero_mean_unit_variance(
        rows in prop::collection::vec(prop::collection::vec(-1e3f64..1e3, 4), 3..40),
    ) {
        let dir = tempfile::tempdir().unwrap();
        let f = dir.path().join("d.csv");
        let mut text = String::from("a,b,c,y\n");
        for r in &rows {
            text.push_str(&format!("{},{},{},{}\n", r[0], r[1], r[2], r[3]));
        }
        fs::write(&f, text).unwrap();
        let Ok((inst, report)) = load_regression_csv(&f, "y", None, true) else {
            // a column that came out constant
            return Ok(());
        };
        prop_assert!(report.standardized);
        let n = inst.n() as f64;
        let d = inst.d();
        for j in 0..d {
            let col: Vec<f64> = (0..inst.n()).map(|r| inst.x()[r * d + j]).collect();
            let mean = col.iter().sum::<f64>() / n;
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            prop_assert!(mean.abs() < 1e-12, "mean {}", mean);
            prop_assert!((var - 1.0).abs() < 1e-12, "variance {}", var);
        }
    }
}
