use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn zeroone(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zeroone"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn table_file(dir: &TempDir, name: &str, values: &[i64]) -> PathBuf {
    let p = dir.path().join(name);
    let row: Vec<String> = values.iter().map(ToString::to_string).collect();
    fs::write(&p, format!("1 {}\n{}\n", values.len(), row.join(" "))).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const LATIN_3: [i64; 27] = [
    1, 0, 0, 0, 1, 0, 0, 0, 1, //
    0, 1, 0, 0, 0, 1, 1, 0, 0, //
    0, 0, 1, 1, 0, 0, 0, 1, 0,
];

/// Slices along the first axis, row by row.
const BLOCKED_333: [i64; 27] = [
    1, 0, 1, 0, 1, 0, 0, 0, 1, //
    0, 1, 0, 0, 1, 1, 1, 0, 0, //
    0, 0, 1, 1, 0, 0, 1, 1, 0,
];

#[test]
fn graver_histograms() {
    let o = zeroone(&[
        "graver",
        "--model",
        "complete-indep",
        "--dims",
        "2,2,3",
        "--square-free",
    ]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o), "2 33\n3 48\n");
    let o = zeroone(&[
        "graver",
        "--model",
        "complete-indep",
        "--dims",
        "2,2,2",
        "--square-free",
    ]);
    assert_eq!(stdout(&o), "2 12\n");
    let o = zeroone(&["graver", "--model", "two-way-indep", "--dims", "2,2"]);
    assert_eq!(stdout(&o), "2 1\n");
    let o = zeroone(&[
        "graver",
        "--model",
        "two-way-indep",
        "--dims",
        "3,3",
        "--prune",
    ]);
    assert_eq!(stdout(&o), "2 9\n");
}

#[test]
fn graver_file_round_trip_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.mar");
    let b = dir.path().join("b.mar");
    for p in [&a, &b] {
        let o = zeroone(&[
            "graver",
            "--model",
            "complete-indep",
            "--dims",
            "2,2,3",
            "--square-free",
            "--out",
            s(p),
        ]);
        assert_eq!(code(&o), 0);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let set = zeroone::io::read_move_set(&a).unwrap();
    assert_eq!(set.len(), 81);
    let c = dir.path().join("c.mar");
    zeroone::io::write_move_set(&c, &set).unwrap();
    assert_eq!(fs::read(&a).unwrap(), fs::read(&c).unwrap());
    assert_eq!(
        fs::read_to_string(zeroone::io::provenance_path(&a)).unwrap(),
        fs::read_to_string(zeroone::io::provenance_path(&c)).unwrap()
    );

    // the written file works as a move source
    let x = table_file(&dir, "x.mat", &[1, 0, 0, 0, 1, 0, 0, 0, 1, 1, 1, 0]);
    let o = zeroone(&[
        "connect",
        "--model",
        "complete-indep",
        "--dims",
        "2,2,3",
        "--moves",
        s(&a),
        "--from-table",
        s(&x),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn graver_budget_exhaustion_leaves_partial_file() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("g.mar");
    let o = zeroone(&[
        "graver",
        "--model",
        "complete-indep",
        "--dims",
        "3,3,3",
        "--square-free",
        "--max-moves",
        "50",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
    let partial = zeroone::io::read_move_set(&dir.path().join("g.mar.partial")).unwrap();
    assert!(!partial.is_empty());
}

#[test]
fn connect_latin_fiber() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "latin.mat", &LATIN_3);
    let out = dir.path().join("fiber.txt");
    let o = zeroone(&[
        "connect",
        "--model",
        "ntfi",
        "--dims",
        "3,3,3",
        "--moves",
        "deg6",
        "--from-table",
        s(&x),
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("fiber size 12\ncomponents 1\n"));
    let tables = zeroone::io::parse_tables(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(tables.len(), 12);
    let ids = fs::read_to_string(dir.path().join("fiber.txt.components")).unwrap();
    assert!(ids.lines().all(|l| l == "0"));

    let o = zeroone(&[
        "connect",
        "--model",
        "ntfi",
        "--dims",
        "3,3,3",
        "--moves",
        "basic",
        "--from-table",
        s(&x),
    ]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("components 12\n"));
}

#[test]
fn connect_needs_degree_nine_moves() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &BLOCKED_333);
    let args = |moves: &'static str| {
        zeroone(&[
            "connect",
            "--model",
            "ntfi",
            "--dims",
            "3,3,3",
            "--moves",
            moves,
            "--from-table",
            s(&x),
        ])
    };
    let o = args("basic+deg6");
    assert_eq!(code(&o), 1);
    let first = stdout(&o);
    let comps: usize = first.lines().nth(1).unwrap()["components ".len()..]
        .parse()
        .unwrap();
    assert!(comps > 1);
    assert_eq!(code(&args("basic+deg6+deg9")), 0);
}

#[test]
fn connect_two_way_with_key_file() {
    let dir = TempDir::new().unwrap();
    let t = table_file(&dir, "t.mat", &[2, 2, 1, 3, 2, 2, 2, 2]);
    let o = zeroone(&[
        "connect",
        "--model",
        "two-way-indep",
        "--dims",
        "4,4",
        "--moves",
        "basic",
        "--t",
        s(&t),
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("components 1\n"));
}

#[test]
fn connect_quasi_independence_with_mask_file() {
    let dir = TempDir::new().unwrap();
    let zeros = dir.path().join("zeros.txt");
    fs::write(&zeros, "0,0\n1,1\n2,2\n3,3\n").unwrap();
    let x = table_file(&dir, "x.mat", &[1, 1, 0, 0, 1, 0, 1, 0, 0, 1, 1, 0]);
    let o = zeroone(&[
        "connect",
        "--model",
        "quasi-indep",
        "--dims",
        "4,4",
        "--zeros",
        s(&zeros),
        "--moves",
        "df1",
        "--from-table",
        s(&x),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("components 1\n"));
}

#[test]
fn check_conditions() {
    let o = zeroone(&[
        "check",
        "--model",
        "two-way-indep",
        "--dims",
        "3,3",
        "--condition",
        "weak",
        "--sweep",
    ]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("pass"));

    let o = zeroone(&[
        "check",
        "--model",
        "complete-indep",
        "--dims",
        "2,2,2",
        "--condition",
        "distance-reducing",
        "--moves",
        "square-free",
        "--sweep",
    ]);
    assert_eq!(code(&o), 0);

    let o = zeroone(&[
        "check",
        "--model",
        "two-way-indep",
        "--dims",
        "3,3",
        "--condition",
        "distance-reducing",
        "--moves",
        "basic",
        "--sweep",
        "--either-side",
    ]);
    assert_eq!(code(&o), 0);

    let o = zeroone(&[
        "check",
        "--model",
        "two-way-indep",
        "--dims",
        "3,3",
        "--condition",
        "generalized",
        "--moves",
        "basic",
    ]);
    assert_eq!(code(&o), 0);
}

#[test]
fn strong_crossing_absent_on_three_way_pair() {
    let dir = TempDir::new().unwrap();
    let x = table_file(
        &dir,
        "x.mat",
        &[
            0, 0, 0, 0, 0, 1, 0, 0, 1, 0, 1, 1, 0, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 1, 1, 1, 1,
        ],
    );
    let y = table_file(
        &dir,
        "y.mat",
        &[
            0, 0, 0, 0, 0, 0, 0, 1, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 0, 0, 1, 0, 0, 1, 0, 1, 1,
        ],
    );
    let o = zeroone(&[
        "check",
        "--model",
        "complete-indep",
        "--dims",
        "3,3,3",
        "--condition",
        "strong",
        "--pair",
        s(&x),
        s(&y),
    ]);
    assert_eq!(code(&o), 1);
    assert_eq!(stdout(&o), "no Strong crossing pattern\n");
}

#[test]
fn sample_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &[1, 0, 0, 1]);
    let args = [
        "sample",
        "--model",
        "two-way-indep",
        "--dims",
        "2,2",
        "--moves",
        "basic",
        "--start",
        s(&x),
        "--seed",
        "9",
        "--steps",
        "500",
        "--stat",
        "chi-square",
    ];
    let a = zeroone(&args);
    let b = zeroone(&args);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let text = stdout(&a);
    assert!(text.contains("p-value "));
    assert!(text.contains("acceptance "));

    let mut no_seed: Vec<&str> = args.to_vec();
    no_seed.drain(9..11);
    assert_eq!(code(&zeroone(&no_seed)), 2);
}

#[test]
fn constant_statistic_has_p_value_one() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &[1, 0, 0, 1]);
    let o = zeroone(&[
        "sample",
        "--model",
        "two-way-indep",
        "--dims",
        "2,2",
        "--moves",
        "basic",
        "--start",
        s(&x),
        "--seed",
        "1",
        "--steps",
        "100",
        "--stat",
        "linear",
        "--weights",
        "0,0,0,0",
    ]);
    assert!(stdout(&o).contains("p-value 1.000000\n"));
}

#[test]
fn sample_agrees_with_enumeration() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &[1, 1, 0, 1, 0, 0, 0, 1, 1]);
    let out = dir.path().join("stats.txt");
    let o = zeroone(&[
        "sample",
        "--model",
        "two-way-indep",
        "--dims",
        "3,3",
        "--moves",
        "square-free",
        "--start",
        s(&x),
        "--seed",
        "4",
        "--steps",
        "4000",
        "--thinning",
        "10",
        "--stat",
        "chi-square",
        "--verify-exact",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("within-3-se true"));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 4000);
}

#[test]
fn plain_walk_writes_states() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &[1, 0, 0, 1]);
    let out = dir.path().join("walk.txt");
    let o = zeroone(&[
        "sample",
        "--model",
        "two-way-indep",
        "--dims",
        "2,2",
        "--moves",
        "basic",
        "--start",
        s(&x),
        "--seed",
        "3",
        "--steps",
        "20",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    let states = zeroone::io::parse_tables(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(states.len(), 21);
}

fn squares(text: &str, n: usize) -> Vec<Vec<Vec<usize>>> {
    text.split("\n\n")
        .map(|block| {
            block
                .lines()
                .map(|l| l.split(' ').map(|v| v.parse().unwrap()).collect())
                .collect::<Vec<Vec<usize>>>()
        })
        .inspect(|sq| assert_eq!(sq.len(), n))
        .collect()
}

fn is_latin(sq: &[Vec<usize>]) -> bool {
    let n = sq.len();
    let full: BTreeSet<usize> = (0..n).collect();
    (0..n).all(|i| sq[i].iter().copied().collect::<BTreeSet<_>>() == full)
        && (0..n).all(|j| (0..n).map(|i| sq[i][j]).collect::<BTreeSet<_>>() == full)
}

#[test]
fn latin_squares() {
    let o = zeroone(&[
        "latin", "3", "--seed", "5", "--steps", "40", "--count", "300",
    ]);
    assert_eq!(code(&o), 0);
    let all = squares(&stdout(&o), 3);
    assert_eq!(all.len(), 300);
    assert!(all.iter().all(|sq| is_latin(sq)));
    assert_eq!(all.iter().collect::<BTreeSet<_>>().len(), 12);

    let o = zeroone(&["latin", "4", "--seed", "5", "--count", "3"]);
    assert!(squares(&stdout(&o), 4).iter().all(|sq| is_latin(sq)));

    assert_eq!(code(&zeroone(&["latin", "5", "--seed", "1"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(
        code(&zeroone(&["graver", "--model", "ntfi", "--dims", "2,2"])),
        2
    );
    assert_eq!(code(&zeroone(&["graver", "--dims", "2,2"])), 2);
    assert_eq!(code(&zeroone(&["frobnicate"])), 2);
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &[1, 0, 0, 1]);
    let o = zeroone(&[
        "connect",
        "--model",
        "two-way-indep",
        "--dims",
        "2,2",
        "--moves",
        "deg6",
        "--from-table",
        s(&x),
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn cap_exhaustion_exits_three() {
    let dir = TempDir::new().unwrap();
    let x = table_file(&dir, "x.mat", &LATIN_3);
    let o = zeroone(&[
        "connect",
        "--model",
        "ntfi",
        "--dims",
        "3,3,3",
        "--moves",
        "deg6",
        "--from-table",
        s(&x),
        "--cap",
        "5",
    ]);
    assert_eq!(code(&o), 3);
}
