use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn treeten(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_treeten"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("TREETEN_THREADS")
        .output()
        .expect("binary runs")
}

fn success(args: &[&str], out: &Path) {
    let o = treeten(args, out);
    assert!(
        o.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&o.stderr)
    );
}

/// Header and rows of a CSV written by the tool, after checking the hash line.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let hash = lines.next().unwrap();
    assert!(hash.starts_with("# config_hash="), "{hash}");
    assert_eq!(hash.len(), "# config_hash=".len() + 64);
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn column(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap()
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn build_constant_from_config() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "tree = \"path-sequential\"\nL = 4\n[function]\nkind = \"constant\"\nc = 1.0\n").unwrap();
    success(&["build", "--config", cfg.to_str().unwrap()], dir.path());
    let (header, rows) = read_csv(&dir.path().join("stats.csv"));
    assert_eq!(rows[0][column(&header, "max_bond")], "1");
    assert!(dir.path().join("network.ttn").exists());
    let meta = fs::read_to_string(dir.path().join("meta.toml")).unwrap();
    assert!(meta.contains("command = \"build\""));
}

#[test]
fn build_laguerre_on_binary_tree() {
    let dir = TempDir::new().unwrap();
    success(&["build", "--target", "laguerre", "--tree", "binary-tree", "--L", "12"], dir.path());
    let (header, rows) = read_csv(&dir.path().join("stats.csv"));
    assert_eq!(rows[0][column(&header, "max_bond")], "41");
    let net = treeten::AnyNetwork::load(dir.path().join("network.ttn")).unwrap();
    assert_eq!(net.max_bond(), 41);
}

#[test]
fn invalid_tree_spec_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("tree.toml");
    fs::write(
        &spec,
        "vertices = [\"1.1\", \"1.2\", \"1.3\"]\nedges = [[\"1.1\", \"1.2\"], [\"1.2\", \"1.3\"], [\"1.3\", \"1.1\"]]\n",
    )
    .unwrap();
    let o = treeten(&["build", "--target", "cosh", "--tree-spec", spec.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle detected"));
}

#[test]
fn config_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let cases: [&[&str]; 5] = [
        &["compress", "--target", "laguerre", "--tree", "comb"],
        &["build", "--target", "nope", "--tree", "comb"],
        &["build", "--target", "planewaves", "--tree", "comb", "--n", "2"],
        &["build", "--target", "multinormal", "--tree", "comb"],
        &["tci", "--target", "cosh", "--tree", "comb", "--seed", "1", "--L", "0"],
    ];
    for args in cases {
        let o = treeten(args, dir.path());
        assert_eq!(o.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = Command::new(env!("CARGO_BIN_EXE_treeten"))
        .args(["build", "--target", "cosh", "--tree", "comb", "--out"])
        .arg(dir.path())
        .env("TREETEN_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn compress_laguerre() {
    let dir = TempDir::new().unwrap();
    success(
        &["compress", "--target", "laguerre", "--tree", "path-sequential", "--L", "16", "--seed", "1"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("compress.csv"));
    let (chi, eps) = (column(&header, "chi"), column(&header, "eps"));
    assert_eq!(rows.len(), 41);
    assert_eq!(rows[0][chi], "41");
    assert!(num(&rows[0][eps]) <= 1e-10);
    let seven = rows.iter().find(|r| r[chi] == "7").unwrap();
    assert!(num(&seven[eps]) <= 1e-9, "{seven:?}");

    // memory is recounted from the truncated network: rank one stores two
    // entries per digit, and it never grows as chi shrinks
    let mem = column(&header, "memory_bytes");
    let last = rows.last().unwrap();
    assert_eq!(last[chi], "1");
    assert_eq!(last[mem], (16 * 2 * 8).to_string());
    let memory: Vec<usize> = rows.iter().map(|r| r[mem].parse().unwrap()).collect();
    assert!(memory.windows(2).all(|w| w[0] >= w[1]));
}

#[test]
fn compress_weierstrass_rank() {
    let dir = TempDir::new().unwrap();
    success(
        &["compress", "--target", "weierstrass", "--tree", "path-sequential", "--seed", "2"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("compress.csv"));
    let (chi, eps) = (column(&header, "chi"), column(&header, "eps"));
    let first = rows
        .iter()
        .filter(|r| num(&r[eps]) <= 1e-10)
        .map(|r| r[chi].parse::<usize>().unwrap())
        .min()
        .unwrap();
    assert!((35..=41).contains(&first), "first chi {first}");
}

#[test]
fn planewaves_exact_at_thirty() {
    let dir = TempDir::new().unwrap();
    success(
        &["compress", "--target", "planewaves", "--tree", "comb", "--chi-list", "30", "--seed", "3"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("compress.csv"));
    assert!(num(&rows[0][column(&header, "eps")]) <= 1e-8);
}

#[test]
fn tci_cosh_recovers_rank_two() {
    let dir = TempDir::new().unwrap();
    success(
        &["tci", "--target", "cosh", "--tree", "comb", "--n", "2", "--chi-list", "2", "--sweeps", "5", "--seed", "4"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("tci_summary.csv"));
    assert!(num(&rows[0][column(&header, "eps_inf")]) <= 1e-10);
    let (_, sweeps) = read_csv(&dir.path().join("tci.csv"));
    assert_eq!(sweeps.len(), 5);
    assert!(dir.path().join("tci_chi2.ttn").exists());
}

#[test]
fn tci_multinormal_records_domain_map() {
    let dir = TempDir::new().unwrap();
    success(
        &["tci", "--target", "multinormal", "--tree", "comb", "--L", "8", "--chi-list", "6,3", "--sweeps", "3", "--seed", "5"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("tci_summary.csv"));
    // sweep points keep the requested order
    assert_eq!(rows[0][column(&header, "chi_max")], "6");
    assert_eq!(rows[1][column(&header, "chi_max")], "3");
    let meta = fs::read_to_string(dir.path().join("meta.toml")).unwrap();
    assert!(meta.contains("domain_map = \"r = 0 + 10 * x\""), "{meta}");
}

#[test]
fn fredholm_examples_converge() {
    for name in ["fredholm-ex1", "fredholm-ex2"] {
        let dir = TempDir::new().unwrap();
        success(&["fredholm", "--target", name, "--L", "10", "--seed", "0"], dir.path());
        let (header, rows) = read_csv(&dir.path().join("trace.csv"));
        let last = rows.last().unwrap();
        assert!(num(&last[column(&header, "eps")]) <= 10.0 * 2f64.powi(-10), "{name}: {last:?}");
        assert!(rows.iter().all(|r| r[column(&header, "bound_holds")] == "true"));
        let meta = fs::read_to_string(dir.path().join("meta.toml")).unwrap();
        assert!(meta.contains("converged = true"), "{name}");
    }
}

fn mi_entry(header: &[String], rows: &[Vec<String>], a: &str, b: &str) -> f64 {
    let row = rows.iter().find(|r| r[0] == a).unwrap();
    num(&row[column(header, b)])
}

#[test]
fn mi_planewaves_leading_digits_correlate_across_variables() {
    let dir = TempDir::new().unwrap();
    success(
        &["mi", "--target", "planewaves", "--tree", "comb", "--L", "8", "--samples", "2000", "--seed", "6"],
        dir.path(),
    );
    let (header, rows) = read_csv(&dir.path().join("mi.csv"));
    assert_eq!(header[0], "digit");
    assert_eq!(rows.len(), 24);
    for (a, b) in [(1, 2), (1, 3), (2, 3)] {
        let lead = mi_entry(&header, &rows, &format!("{a}.1"), &format!("{b}.1"));
        let tail = mi_entry(&header, &rows, &format!("{a}.8"), &format!("{b}.8"));
        assert!(lead > tail, "{a}-{b}: {lead} vs {tail}");
    }
}

#[test]
fn mi_product_has_no_cross_correlation_and_is_deterministic() {
    let first = TempDir::new().unwrap();
    let second = TempDir::new().unwrap();
    let args = ["mi", "--target", "product", "--tree", "comb", "--n", "3", "--L", "4", "--seed", "7"];
    success(&args, first.path());
    success(&args, second.path());
    let a = fs::read(first.path().join("mi.csv")).unwrap();
    let b = fs::read(second.path().join("mi.csv")).unwrap();
    assert_eq!(a, b);
    let (header, rows) = read_csv(&first.path().join("mi.csv"));
    for row in &rows {
        for (j, label) in header.iter().enumerate().skip(1) {
            if row[0].split('.').next() != label.split('.').next() {
                assert!(num(&row[j]) <= 0.05, "{} {label}", row[0]);
            }
        }
    }
}

#[test]
fn flags_override_config_and_hash_tracks_content() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.toml");
    fs::write(&cfg, "target = \"cosh\"\ntree = \"comb\"\nn = 2\nL = 4\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    success(&["build", "--config", cfg, "--L", "6"], &dir.path().join("a"));
    success(&["build", "--config", cfg, "--L", "6"], &dir.path().join("b"));
    success(&["build", "--config", cfg], &dir.path().join("c"));
    let stats = |d: &str| fs::read_to_string(dir.path().join(d).join("stats.csv")).unwrap();
    assert_eq!(stats("a"), stats("b"));
    assert_ne!(stats("a").lines().next(), stats("c").lines().next());
    let (header, rows) = read_csv(&dir.path().join("a").join("stats.csv"));
    assert_eq!(rows[0][column(&header, "L")], "6");
}
