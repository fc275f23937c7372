use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use copjoint_core::evaluation::{Comparison, FitReport};

fn copjoint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_copjoint"))
        .args(args)
        .output()
        .expect("failed to start copjoint")
}

fn ok(args: &[&str]) -> String {
    let out = copjoint(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn failing(args: &[&str]) -> (i32, String) {
    let out = copjoint(args);
    assert!(!out.status.success(), "{args:?} unexpectedly succeeded");
    (out.status.code().unwrap(), String::from_utf8(out.stderr).unwrap())
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn report(path: &Path) -> FitReport {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const ORDINAL: &str = r#"
data = "sim/data.csv"

[model]
family = "frank"
first = { outcome = "stress", kind = { type = "ordinal", levels = 3 }, features = ["x1", "x2"] }
second = { outcome = "wait", kind = { type = "ordinal", levels = 3 }, features = ["x1", "d"] }
indicators = ["d"]

[train]
learning_rate = 0.02
batch_size = 128
max_epochs = 60

[simulate]
n = 3000
covariates = [
  { name = "x1", dist = "normal" },
  { name = "x2", dist = "normal" },
  { name = "d", dist = "bernoulli" },
]

[simulate.truth]
"first.beta" = [1.0, -0.8]
"first.thresholds" = [-0.5, 0.8]
"second.beta" = [0.7, 1.2]
"second.thresholds" = [0.0, 1.5]
"copula.theta" = [-3.0]
"#;

fn with_family(cfg: &str, family: &str) -> String {
    cfg.replace("family = \"frank\"", &format!("family = \"{family}\""))
}

fn simulated(dir: &Path) -> PathBuf {
    let cfg = write(dir, "run.toml", ORDINAL);
    ok(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "7", "--out", dir.join("sim").to_str().unwrap()]);
    cfg
}

#[test]
fn frank_beats_product_on_frank_data() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    simulated(root);
    for family in ["frank", "product"] {
        let cfg = write(root, &format!("{family}.toml"), &with_family(ORDINAL, family));
        ok(&["fit", "--config", cfg.to_str().unwrap(), "--out", root.join(family).to_str().unwrap()]);
    }
    let frank = root.join("frank/frank-logit/report.json");
    let product = root.join("product/product-logit/report.json");
    assert!(frank.exists() && product.exists());
    let cmp = write(
        root,
        "compare.toml",
        &format!("[compare]\nreports = [{:?}, {:?}]\n", product, frank),
    );
    let text = ok(&["compare", "--config", cmp.to_str().unwrap(), "--out", root.join("cmp").to_str().unwrap()]);
    assert!(text.contains("Frank-Logit"));
    let table: Comparison =
        serde_json::from_str(&std::fs::read_to_string(root.join("cmp/comparison.json")).unwrap()).unwrap();
    assert_eq!(table.rows[0].report.label, "Frank-Logit");
    assert!(table.rows[0].best);
    assert!((table.rows[0].report.theta[0] + 3.0).abs() < 0.6);
}

#[test]
fn family_all_fits_every_family() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    simulated(root);
    let cfg = write(root, "all.toml", &with_family(ORDINAL, "all").replace("max_epochs = 60", "max_epochs = 5"));
    let text = ok(&["fit", "--config", cfg.to_str().unwrap(), "--out", root.join("all").to_str().unwrap()]);
    let table: Comparison =
        serde_json::from_str(&std::fs::read_to_string(root.join("all/comparison.json")).unwrap()).unwrap();
    assert_eq!(table.rows.len(), 8);
    for name in ["gaussian", "clayton", "gumbel", "joe", "amh", "frank", "fgm", "product"] {
        assert!(root.join(format!("all/{name}-logit/params.json")).exists(), "{name}");
        assert!(root.join(format!("all/{name}-logit/trace.csv")).exists(), "{name}");
    }
    for column in ["Model", "LL", "Parameters", "AIC", "theta"] {
        assert!(text.lines().next().unwrap().contains(column));
    }
}

#[test]
fn eval_reproduces_the_fit_report() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let cfg = simulated(root);
    let fit_out = root.join("fit");
    ok(&["fit", "--config", cfg.to_str().unwrap(), "--out", fit_out.to_str().unwrap()]);
    let eval_cfg = write(
        root,
        "eval.toml",
        &format!("{ORDINAL}\n[eval]\nparams = \"fit/frank-logit/params.json\"\n"),
    );
    ok(&["eval", "--config", eval_cfg.to_str().unwrap(), "--out", root.join("eval").to_str().unwrap()]);
    let fitted = report(&fit_out.join("frank-logit/report.json"));
    let evaluated = report(&root.join("eval/eval_report.json"));
    assert!((fitted.total_loglik - evaluated.total_loglik).abs() < 1e-9);
    assert_eq!(fitted.aic, evaluated.aic);
    assert_eq!(fitted.mpe, evaluated.mpe);

    // parameters from a different model are a layout error
    let wrong = write(
        root,
        "wrong.toml",
        &format!("{}\n[eval]\nparams = \"fit/frank-logit/params.json\"\n", with_family(ORDINAL, "product")),
    );
    let (code, stderr) = failing(&["eval", "--config", wrong.to_str().unwrap(), "--out", root.join("w").to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("layout"), "{stderr}");
}

#[test]
fn product_eval_reports_zero_theta() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    simulated(root);
    let product = with_family(ORDINAL, "product").replace("max_epochs = 60", "max_epochs = 3");
    let cfg = write(root, "p.toml", &product);
    ok(&["fit", "--config", cfg.to_str().unwrap(), "--out", root.join("fit").to_str().unwrap()]);
    let eval_cfg = write(root, "e.toml", &format!("{product}\n[eval]\nparams = \"fit/product-logit/params.json\"\nsplit = \"validation\"\n"));
    ok(&["eval", "--config", eval_cfg.to_str().unwrap(), "--out", root.join("eval").to_str().unwrap()]);
    let r = report(&root.join("eval/eval_report.json"));
    assert_eq!(r.theta, vec![0.0]);
    assert!((880..=920).contains(&r.n_obs), "{}", r.n_obs);
}

#[test]
fn simulate_is_reproducible_for_both_shapes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let multinomial = ORDINAL
        .replace(
            r#"first = { outcome = "stress", kind = { type = "ordinal", levels = 3 }, features = ["x1", "x2"] }"#,
            r#"first = { outcome = "mode", kind = { type = "multinomial", alternatives = 3 }, features = ["x1", "x2"] }"#,
        )
        .replace(r#""first.beta" = [1.0, -0.8]"#, r#""first.beta" = [1.0, -0.8, 0.5, 0.5]"#)
        .replace("\"first.thresholds\" = [-0.5, 0.8]\n", "")
        .replace(r#""copula.theta" = [-3.0]"#, r#""copula.theta" = [-3.0, 2.0, 4.0]"#);
    for (name, text) in [("ord", ORDINAL.to_string()), ("mnl", multinomial)] {
        let cfg = write(root, &format!("{name}.toml"), &text);
        let outputs: Vec<Vec<u8>> = ["a", "b"]
            .iter()
            .map(|run| {
                let out = root.join(format!("{name}-{run}"));
                ok(&["simulate", "--config", cfg.to_str().unwrap(), "--seed", "7", "--deterministic", "--out", out.to_str().unwrap()]);
                let mut bytes = std::fs::read(out.join("data.csv")).unwrap();
                bytes.extend(std::fs::read(out.join("truth.json")).unwrap());
                bytes
            })
            .collect();
        assert_eq!(outputs[0], outputs[1], "{name}");
        let header = String::from_utf8(outputs[0].clone()).unwrap();
        assert!(header.starts_with("x1,x2,d,"), "{name}");
    }
}

#[test]
fn usage_and_validation_errors_have_distinct_codes() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();

    let bad_family = write(root, "bad.toml", &with_family(ORDINAL, "clayon"));
    let (code, stderr) = failing(&["fit", "--config", bad_family.to_str().unwrap(), "--out", root.join("x").to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(stderr.contains("gaussian") && stderr.contains("frank") && stderr.contains("all"), "{stderr}");

    let no_truth = write(root, "nt.toml", ORDINAL.split("[simulate]").next().unwrap());
    let (code, stderr) = failing(&["simulate", "--config", no_truth.to_str().unwrap(), "--out", root.join("y").to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("\"kind\":\"validation\""), "{stderr}");

    let no_data = write(root, "nd.toml", &with_family(ORDINAL, "product"));
    let (code, stderr) = failing(&["fit", "--config", no_data.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert!(stderr.contains("does not exist"), "{stderr}");

    let (code, _) = failing(&["fit"]);
    assert_eq!(code, 2);
}

#[test]
fn breaks_command() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    write(root, "v.csv", "score,flat\n1,5\n2,5\n3,5\n10,5\n11,5\n12,5\n");
    let cfg = write(root, "b.toml", "data = \"v.csv\"\n[breaks]\ncolumn = \"score\"\nk = 2\n");
    let text = ok(&["breaks", "--config", cfg.to_str().unwrap(), "--out", root.join("b").to_str().unwrap()]);
    assert!(text.contains("break 1: 3"), "{text}");
    assert!(text.contains("class counts: 3, 3"), "{text}");
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(root.join("b/breaks.json")).unwrap()).unwrap();
    assert_eq!(json["thresholds"], serde_json::json!([3.0]));

    for (name, body) in [
        ("k.toml", "data = \"v.csv\"\n[breaks]\ncolumn = \"score\"\nk = 7\n"),
        ("flat.toml", "data = \"v.csv\"\n[breaks]\ncolumn = \"flat\"\nk = 2\n"),
    ] {
        let cfg = write(root, name, body);
        let (code, stderr) = failing(&["breaks", "--config", cfg.to_str().unwrap(), "--out", root.join("e").to_str().unwrap()]);
        assert_eq!(code, 3, "{name}: {stderr}");
    }
}
