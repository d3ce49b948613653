use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn mesp(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mesp")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> f64 {
    let line = text.lines().find(|l| l.starts_with(&format!("{key}:"))).unwrap_or_else(|| panic!("no {key} in {text}"));
    line.split_once(':').unwrap().1.trim().parse().unwrap()
}

fn setup() -> (tempfile::TempDir, PathBuf) {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c2.txt"), "2\n2 1\n1 2\n").unwrap();
    std::fs::write(dir.path().join("d3.txt"), "3\n4 0 0\n0 3 0\n0 0 0.1\n").unwrap();
    std::fs::write(dir.path().join("bad.txt"), "2\n1 2\n2 1\n").unwrap();
    let p = dir.path().to_path_buf();
    (dir, p)
}

#[test]
fn worked_bounds() {
    let (_guard, dir) = setup();
    let o = mesp(&["bound", "--matrix", "c2.txt", "--s", "1", "--method", "linx", "--scaling", "none"], &dir);
    assert!(o.status.success());
    assert!((field(&stdout(&o), "upper_bound") - 0.5 * 5f64.ln()).abs() < 1e-6);

    let o = mesp(&["bound", "--matrix", "c2.txt", "--s", "1", "--method", "ddfact", "--scaling", "none"], &dir);
    assert!((field(&stdout(&o), "upper_bound") - 2f64.ln()).abs() < 1e-6);

    let o = mesp(&["bound", "--matrix", "c2.txt", "--s", "1", "--method", "linx", "--out", "csv"], &dir);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("method,scaling,ub,value,gap,iters,converged,wall_ms"));
    assert!(lines.next().unwrap().starts_with("linx,none,0.80471"));
}

#[test]
fn exit_codes() {
    let (_guard, dir) = setup();
    let o = mesp(&["bound", "--matrix", "c2.txt", "--s", "1", "--method", "bqp", "--scaling", "g"], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("BQP solve unsupported; use bqp-eval"));

    let o = mesp(&["bound", "--matrix", "c2.txt", "--s", "1", "--method", "nope"], &dir);
    assert_eq!(o.status.code(), Some(2));
    let o = mesp(&["bound", "--matrix", "c2.txt", "--s", "1", "--method", "linx", "--bogus"], &dir);
    assert_eq!(o.status.code(), Some(2));
    let o = mesp(&["bound", "--matrix", "bad.txt", "--s", "1", "--method", "linx"], &dir);
    assert_eq!(o.status.code(), Some(2));
    let o = mesp(&["bound", "--matrix", "missing.txt", "--s", "1", "--method", "linx"], &dir);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn exact_and_heuristic() {
    let (_guard, dir) = setup();
    let o = mesp(&["exact", "--matrix", "d3.txt", "--s", "2"], &dir);
    let text = stdout(&o);
    assert!((field(&text, "z") - 12f64.ln()).abs() < 1e-12);
    assert!(text.contains("optimum: 1,2"));
    let o = mesp(&["heuristic", "--matrix", "d3.txt", "--s", "2"], &dir);
    let text = stdout(&o);
    let line = text.lines().find(|l| l.starts_with("local_search:")).unwrap();
    assert!(line.ends_with("[1,2]"), "{line}");
}

#[test]
fn fixing_the_small_variance() {
    let (_guard, dir) = setup();
    for mode in ["o", "g"] {
        let o = mesp(&["fix", "--matrix", "d3.txt", "--s", "2", "--mode", mode], &dir);
        assert!(o.status.success());
        let text = stdout(&o);
        assert!(text.contains("fix0: [3]"), "{text}");
    }
}

#[test]
fn fix_aggregates_sum_over_s() {
    let (_guard, dir) = setup();
    let o = mesp(&["generate", "--n", "7", "--seed", "4", "--output", "r7.txt"], &dir);
    assert!(o.status.success());
    let o = mesp(&["fix", "--matrix", "r7.txt", "--s-range", "2:5", "--mode", "o", "--gen-constraints", "2", "--seed", "3"], &dir);
    let text = stdout(&o);
    let mut solved = 0;
    let mut with_fix = 0;
    let mut vars = 0;
    let mut current = 0;
    for line in text.lines() {
        if line.starts_with("s: ") {
            solved += 1;
        }
        let count = |l: &str| l.split_once('[').unwrap().1.trim_end_matches(']').split(',').filter(|t| !t.is_empty()).count();
        if line.trim_start().starts_with("fix0:") {
            current = count(line);
        }
        if line.trim_start().starts_with("fix1:") {
            current += count(line);
            vars += current;
            with_fix += usize::from(current > 0);
        }
    }
    assert_eq!(field(&text, "instances_solved") as usize, solved);
    assert_eq!(field(&text, "instances_with_fix") as usize, with_fix);
    assert_eq!(field(&text, "variables_fixed") as usize, vars);
}

#[test]
fn bqp_eval_at_a_lift() {
    let (_guard, dir) = setup();
    let o = mesp(&["bqp-eval", "--matrix", "d3.txt", "--set", "1,2", "--s", "2"], &dir);
    let text = stdout(&o);
    assert!((field(&text, "value") - 12f64.ln()).abs() < 1e-9);
    assert!(!text.contains("violation"));
    let o = mesp(&["bqp-eval", "--matrix", "d3.txt", "--set", "1,4"], &dir);
    assert_eq!(o.status.code(), Some(2));
}

struct Row {
    s: usize,
    method: String,
    scaling: String,
    ub: f64,
    lb: f64,
    gap: f64,
    ratio: Option<f64>,
}

fn read_rows(path: &Path) -> (Vec<String>, Vec<Row>) {
    let mut rd = csv::Reader::from_path(path).unwrap();
    let header = rd.headers().unwrap().iter().map(String::from).collect();
    let rows = rd
        .records()
        .map(|r| {
            let r = r.unwrap();
            assert_eq!(&r[11], "", "row error: {}", &r[11]);
            Row {
                s: r[1].parse().unwrap(),
                method: r[2].to_string(),
                scaling: r[3].to_string(),
                ub: r[4].parse().unwrap(),
                lb: r[5].parse().unwrap(),
                gap: r[6].parse().unwrap(),
                ratio: (!r[7].is_empty()).then(|| r[7].parse().unwrap()),
            }
        })
        .collect();
    (header, rows)
}

#[test]
fn experiment_csv() {
    let (_guard, dir) = setup();
    mesp(&["generate", "--n", "6", "--seed", "11", "--output", "r6.txt"], &dir);
    let run = |out: &str| {
        let o = mesp(
            &[
                "experiment", "--matrix", "r6.txt", "--s-range", "1:5", "--methods", "linx,ddfact", "--scalings",
                "none,o,g", "--gen-constraints", "2", "--seed", "5", "--output", out,
            ],
            &dir,
        );
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    };
    run("a.csv");
    run("b.csv");

    // Identical apart from the timing column.
    let strip = |p: &str| -> Vec<String> {
        std::fs::read_to_string(dir.join(p))
            .unwrap()
            .lines()
            .map(|l| {
                let mut f: Vec<&str> = l.split(',').collect();
                f.remove(9);
                f.join(",")
            })
            .collect()
    };
    assert_eq!(strip("a.csv"), strip("b.csv"));

    let (header, rows) = read_rows(&dir.join("a.csv"));
    assert_eq!(header.join(","), "n,s,method,scaling,ub,lb,gap,ratio,iters,wall_ms,seed,error");
    assert_eq!(rows.len(), 5 * 2 * 3);
    for r in &rows {
        assert!(r.ub >= r.lb - 1e-6);
        assert!((r.gap - (r.ub - r.lb)).abs() < 1e-12);
    }
    for s in 1..=5 {
        let get = |m: &str, sc: &str| rows.iter().find(|r| r.s == s && r.method == m && r.scaling == sc).unwrap();
        let (none, o, g) = (get("linx", "none"), get("linx", "o"), get("linx", "g"));
        assert!(g.gap <= o.gap + 1e-6 && o.gap <= none.gap + 1e-6, "s={s}");
        for m in ["linx", "ddfact"] {
            let (o, g) = (get(m, "o"), get(m, "g"));
            match g.ratio {
                Some(ratio) => assert!((ratio - (o.gap - g.gap) / o.gap).abs() < 1e-9),
                None => assert!(o.gap <= 0.0),
            }
            assert!(o.ratio.is_none());
        }
    }
}

#[test]
fn experiment_rows_record_failures() {
    let (_guard, dir) = setup();
    // s = 3 is out of range for n = 2: every row carries the error.
    let o = mesp(&["experiment", "--matrix", "c2.txt", "--s-range", "1:3", "--methods", "linx", "--scalings", "none"], &dir);
    assert!(o.status.success());
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 1 + 3);
    assert!(lines[1].ends_with(','));
    assert!(!lines[2].ends_with(','));
    assert!(!lines[3].ends_with(','));
}
