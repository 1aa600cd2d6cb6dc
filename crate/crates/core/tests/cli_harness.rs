mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use heston_swift::harness::*;
use heston_swift::reference::{price_cp, QuadratureConfig};
use heston_swift::{ChfForm, MarketContext, OptionKind, OptionQuote};
use sha2::{Digest, Sha256};

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_heston-swift"));
    c.env_remove(FIXTURE_DIR_VAR);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn fixture_path(name: &str) -> std::path::PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("fixtures")
        .join(name)
}

#[test]
fn text_and_json_round_trip() {
    let ctx = MarketContext::new(100.0, 0.03, 0.01).unwrap();
    let file = QuoteFile::new(
        ctx,
        vec![
            OptionQuote::call(90.0, 0.5).with_price(12.5),
            OptionQuote::put(110.0, 1.0).with_price(9.25),
            OptionQuote::call(100.0, 2.0),
        ],
    )
    .unwrap();
    assert_eq!(QuoteFile::parse(&file.to_text()).unwrap(), file);
    assert_eq!(QuoteFile::parse(&file.to_json()).unwrap(), file);
}

#[test]
fn parse_errors_carry_line_numbers() {
    let text = "spot = 1\nmaturity,strike,kind\n0.5,abc,call\n";
    match QuoteFile::parse(text) {
        Err(e @ HarnessError::Parse { line: 3, .. }) => {
            assert_eq!(e.exit_code(), 2);
            assert!(e.to_string().contains("abc"));
        }
        other => panic!("{other:?}"),
    }
    let dup = "spot = 1\n0.5,1.0,call\n0.5,1.0,call\n";
    assert!(matches!(
        QuoteFile::parse(dup),
        Err(HarnessError::Parse { line: 3, .. })
    ));
    // Same strike and maturity with the other kind is a different quote.
    assert!(QuoteFile::parse("spot = 1\n0.5,1.0,call\n0.5,1.0,put\n").is_ok());
    assert!(QuoteFile::parse("0.5,1.0,call\n").is_err());
    assert!(QuoteFile::parse("spot = 1\n0.5,1.0,straddle\n").is_err());
    assert!(QuoteFile::parse("spot = 1\n0.5,-1.0,call\n").is_err());
    assert!(QuoteFile::parse("spot = 1\nvol = 2\n").is_err());
}

#[test]
fn empty_quote_list_is_valid() {
    let f = QuoteFile::parse("spot = 1\n# nothing yet\n").unwrap();
    assert!(f.quotes.is_empty());
}

#[test]
fn fixtures_are_unchanged() {
    for (name, digest) in [
        (
            "params.json",
            "5c02bb51d13e92dd885a45f07e117e420bd8f8375f7b332db6355993a63d051a",
        ),
        (
            "set1.quotes",
            "9f430c8b27e84fa91c22ad7585f7d867ee4ff8adf159b5605876aea325479135",
        ),
        (
            "set2.quotes",
            "72120caa3ec3ada7ffc4a5a5504f7e1e4cee8208725254a0096729da0994c333",
        ),
        (
            "stress.quotes",
            "9603aa69de5604bf5ea22d88467996a5ef3efaa66d7876f3b4617fa06e87f0e8",
        ),
    ] {
        let bytes = std::fs::read(fixture_path(name)).unwrap();
        let hex: String = Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect();
        assert_eq!(hex, digest, "{name}");
    }
}

#[test]
fn bundled_sets_hold_the_published_values() {
    let t2 = params("theta2");
    assert_eq!(
        (t2.kappa, t2.v_bar, t2.sigma, t2.rho, t2.v0),
        (1.5768, 0.0398, 0.0175, -0.5711, 0.0175)
    );
    let t1 = params("theta1");
    assert_eq!(
        (t1.kappa, t1.v_bar, t1.sigma, t1.rho, t1.v0),
        (3.0, 0.1, 0.25, -0.8, 0.08)
    );
    assert_eq!(params("theta2_0").sigma, 0.5751);
    for (name, kappa, sigma, rho) in [
        ("fx", 0.5, 1.0, -0.9),
        ("ir", 0.3, 0.9, -0.5),
        ("eq", 1.0, 1.0, 0.04),
    ] {
        let p = params(name);
        assert_eq!((p.kappa, p.sigma, p.rho), (kappa, sigma, rho), "{name}");
    }

    let s2 = set(QuoteSet::Set2);
    assert_eq!(s2.quotes.len(), 40);
    let groups = by_maturity(&s2.quotes);
    assert_eq!(groups.len(), 8);
    assert_eq!(groups[0].1, vec![0.9371, 0.9956, 1.0427, 1.2287, 1.3939]);
    assert_eq!(groups[7].0, 1.42857142857143);
    assert_eq!(groups[7].1, vec![0.6137, 0.9025, 1.0766, 1.3046, 1.5328]);
    assert!(s2
        .quotes
        .iter()
        .all(|q| q.kind == OptionKind::Call && q.price.is_none()));

    let s1 = set(QuoteSet::Set1);
    assert_eq!(s1.quotes.len(), 40);
    assert!(s1.quotes.iter().all(|q| q.maturity == 0.119047619047619));
    let mut k1: Vec<f64> = s1.quotes.iter().map(|q| q.strike).collect();
    let mut k2: Vec<f64> = s2.quotes.iter().map(|q| q.strike).collect();
    k1.sort_by(f64::total_cmp);
    k2.sort_by(f64::total_cmp);
    assert_eq!(k1, k2);

    let st = set(QuoteSet::Stress);
    assert_eq!(st.context.spot, 100.0);
    assert_eq!(st.quotes.len(), 6);
}

#[test]
fn parameter_specs() {
    let p = resolve_params("1.5,0.04,0.3,-0.7,0.05").unwrap();
    assert_eq!((p.kappa, p.rho), (1.5, -0.7));
    assert_eq!(resolve_params("nope").unwrap_err().exit_code(), 2);
    assert_eq!(resolve_params("1,2,3").unwrap_err().exit_code(), 2);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let quotes = dir.path().join("g.quotes");
    let q = quotes.to_str().unwrap();

    let ok = run(&[
        "generate", "--params", "theta2", "--quotes", "set2", "--out", q,
    ]);
    assert_eq!(code(&ok), 0, "{}", String::from_utf8_lossy(&ok.stderr));
    assert_eq!(
        code(&run(&["calibrate", "--quotes", q, "--target", "theta2"])),
        0
    );

    let bad = dir.path().join("bad.quotes");
    std::fs::write(&bad, "spot = 1\nmaturity,strike,kind\n0.5,abc,call\n").unwrap();
    let out = run(&[
        "price",
        "--params",
        "theta2",
        "--quotes",
        bad.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(
        code(&run(&["price", "--params", "nope", "--quotes", "set2"])),
        2
    );
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(
        code(&run(&["calibrate", "--quotes", "set2"])),
        2,
        "unpriced quotes"
    );

    // The stress set keeps a transform tail no scale can push below 1e-300.
    let out = run(&[
        "price",
        "--params",
        "stress",
        "--quotes",
        "set2",
        "--scale-tol",
        "1e-300",
    ]);
    assert_eq!(code(&out), 3, "{}", String::from_utf8_lossy(&out.stderr));

    let short = [
        "calibrate",
        "--quotes",
        q,
        "--target",
        "theta2",
        "--max-iter",
        "2",
    ];
    assert_eq!(code(&run(&short)), 4);
    let mut partial = short.to_vec();
    partial.push("--allow-partial");
    assert_eq!(code(&run(&partial)), 0);
}

#[test]
fn empty_quote_file_prices_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("empty.quotes");
    std::fs::write(&path, "spot = 1\n").unwrap();
    let out = run(&[
        "price",
        "--params",
        "theta2",
        "--quotes",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
}

#[test]
fn fixture_directory_override() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("params.json"),
        r#"{"mine": {"kappa": 2.0, "v_bar": 0.05, "sigma": 0.4, "rho": -0.6, "v0": 0.03}}"#,
    )
    .unwrap();
    std::fs::copy(fixture_path("set2.quotes"), dir.path().join("set2.quotes")).unwrap();
    let with = bin()
        .env(FIXTURE_DIR_VAR, dir.path())
        .args(["price", "--params", "mine", "--quotes", "set2"])
        .output()
        .unwrap();
    assert_eq!(code(&with), 0, "{}", String::from_utf8_lossy(&with.stderr));
    assert_eq!(
        code(&run(&["price", "--params", "mine", "--quotes", "set2"])),
        2
    );
}

#[test]
fn generation_is_deterministic_and_matches_reference() {
    let args = [
        "generate", "--params", "theta2", "--quotes", "set2", "--noise", "1e-4", "--seed", "3",
    ];
    let (a, b) = (run(&args), run(&args));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);

    let clean = QuoteFile::parse(&stdout(&run(&[
        "generate", "--params", "theta2", "--quotes", "set2",
    ])))
    .unwrap();
    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    let theta = params("theta2");
    for q in &clean.quotes {
        let cp = price_cp(&theta, &clean.context, q, &qc, ChfForm::Cui).unwrap();
        assert!(
            (q.price.unwrap() - cp).abs() <= 1e-7,
            "K = {}, tau = {}",
            q.strike,
            q.maturity
        );
    }
    let noisy = QuoteFile::parse(&stdout(&a)).unwrap();
    let moved = noisy
        .quotes
        .iter()
        .zip(&clean.quotes)
        .filter(|(n, c)| n.price != c.price)
        .count();
    assert!(moved > 0);
}

#[test]
fn grid_generation_lands_on_grid_points() {
    let out = run(&[
        "generate",
        "--params",
        "theta2",
        "--grid",
        "--m",
        "5",
        "--j",
        "256",
        "--maturity",
        "1",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let f = QuoteFile::parse(&stdout(&out)).unwrap();
    assert_eq!(f.quotes.len(), 256);
    let qc = QuadratureConfig::new(128, 200.0).unwrap();
    let theta = params("theta2");
    for (l, q) in f.quotes.iter().enumerate() {
        let x = (2.0 * l as f64 - 256.0) / 64.0;
        assert!((f.context.log_moneyness(q.strike) - x).abs() <= 1e-12);
        assert!(q.price.unwrap() >= -1e-10);
        if x.abs() <= 0.5 {
            let cp = price_cp(&theta, &f.context, q, &qc, ChfForm::Cui).unwrap();
            assert!((q.price.unwrap() - cp).abs() <= 1e-7, "x = {x}");
        }
    }
}

#[test]
fn price_report_lists_every_quote() {
    let out = run(&["price", "--params", "theta2", "--quotes", "set2", "--json"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(report["rows"].as_array().unwrap().len(), 40);
    let cp = run(&[
        "price",
        "--params",
        "theta2",
        "--quotes",
        "set2",
        "--backend",
        "cp",
        "--json",
    ]);
    let cp: serde_json::Value = serde_json::from_str(&stdout(&cp)).unwrap();
    let col = report["columns"]
        .as_array()
        .unwrap()
        .iter()
        .position(|c| c == "price")
        .unwrap();
    for (a, b) in report["rows"]
        .as_array()
        .unwrap()
        .iter()
        .zip(cp["rows"].as_array().unwrap())
    {
        let (a, b) = (a[col].as_f64().unwrap(), b[col].as_f64().unwrap());
        assert!((a - b).abs() <= 1e-7);
    }
}

#[test]
fn converge_reports_are_reproducible() {
    let args = ConvergeArgs::new("eq", 3, 11).unwrap();
    let a = cmd_converge(&args).unwrap();
    let b = cmd_converge(&args).unwrap();
    assert_eq!(a.without_timings().to_json(), b.without_timings().to_json());
    assert_eq!(a.number(0, "trials"), Some(3.0));
    assert!(a.number(0, "converged_fraction").unwrap() > 0.0);
}

#[test]
fn run_entry_point_maps_errors() {
    assert_eq!(
        heston_swift::harness::cli::run([
            "heston-swift",
            "price",
            "--params",
            "nope",
            "--quotes",
            "set2"
        ]),
        2
    );
}
