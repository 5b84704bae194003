use qshess::io::{parse_hessenberg, Problem};
use qshess::oracle::{hessenberg_eigs, match_eigenvalues};
use qshess::reduction::{hessenberg_to_dense, ReduceOptions};
use qshess::DenseMatrix;
use qshess_cli::*;
use std::path::Path;
use std::process::{Command, Output};

fn qshess(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qshess")).args(args).output().expect("binary runs")
}

fn path(dir: &Path, name: &str) -> String {
    dir.join(name).to_str().unwrap().to_string()
}

fn read_csv(text: &str) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect();
    (header, rows)
}

#[test]
fn generate_is_byte_identical_for_a_seed() {
    let a = qshess(&["generate", "4", "1", "--seed", "1"]);
    let b = qshess(&["generate", "4", "1", "--seed", "1"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert!(!qshess(&["generate", "3", "3"]).status.success());
}

#[test]
fn reduce_writes_a_verified_form() {
    let dir = tempfile::tempdir().unwrap();
    let (input, out, rot) = (path(dir.path(), "p.txt"), path(dir.path(), "h.txt"), path(dir.path(), "r.csv"));
    assert!(qshess(&["generate", "30", "3", "--seed", "7", "--out", &input]).status.success());
    let run = qshess(&["reduce", &input, "--out", &out, "--log-rotations", &rot]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("residual="));
    let form = parse_hessenberg(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(form.n(), 30);
    let (header, rows) = read_csv(&std::fs::read_to_string(&rot).unwrap());
    assert_eq!(header, ROTATIONS_HEADER);
    assert!(!rows.is_empty());
}

#[test]
fn verify_residual_is_small() {
    let p = Problem::generate(30, 3, 11, false).unwrap();
    let r = reduce(&p, ReduceOptions { log_rotations: true, ..Default::default() }).unwrap();
    let v = verify(&p, &r.form).unwrap();
    assert!(v.residual <= 1e-11, "{}", v.residual);
    assert_eq!(v.below_subdiagonal, 0.0);
    assert!(v.upper_rank <= 2 * 3 + 1);
    assert!(verify(&Problem::generate(600, 1, 0, false).unwrap(), &r.form).is_err());
}

#[test]
fn two_by_two_passes_through() {
    let p = Problem::generate(2, 1, 3, false).unwrap();
    let r = reduce(&p, ReduceOptions { log_rotations: true, ..Default::default() }).unwrap();
    assert!(r.form.rotations.as_ref().unwrap().is_empty());
    let diff = hessenberg_to_dense(&r.form).sub(&p.dense()).max_abs();
    assert!(diff < 1e-15, "{diff}");
}

#[test]
fn malformed_input_reports_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let input = path(dir.path(), "bad.txt");
    std::fs::write(&input, "QSHESS 1\n3 1 real\n1\n2\nnope\n").unwrap();
    let run = qshess(&["reduce", &input]);
    assert!(!run.status.success());
    assert!(String::from_utf8_lossy(&run.stderr).contains("line 5"), "{}", String::from_utf8_lossy(&run.stderr));
}

#[test]
fn bench_csv_is_deterministic_apart_from_time() {
    let args = ["bench", "--mode", "rank", "--n", "60", "--grid", "2,4", "--repeats", "2", "--seed", "5"];
    let strip = |o: Output| {
        let (header, rows) = read_csv(&String::from_utf8(o.stdout).unwrap());
        assert_eq!(header, BENCH_HEADER);
        rows.into_iter()
            .map(|mut r| {
                let t: f64 = r[5].parse().unwrap();
                assert!(t.is_finite() && t >= 0.0);
                r.remove(5);
                r
            })
            .collect::<Vec<_>>()
    };
    let a = strip(qshess(&args));
    assert_eq!(a, strip(qshess(&args)));
    assert_eq!(a[0], ["rank", "60", "2", "5", "2", &a[0][5]]);
    assert_eq!(a[1][2], "4");
}

#[test]
fn eigerr_csv_parses_back() {
    let out = qshess(&["eigerr", "--sizes", "12,20", "--k", "3", "--trials", "2", "--seed", "9"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let (header, rows) = read_csv(&text);
    assert_eq!(header, EIGERR_HEADER);
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let v: Vec<f64> = r[3..].iter().map(|x| x.parse().unwrap()).collect();
        let row = EigErrRow {
            n: r[0].parse().unwrap(),
            k: r[1].parse().unwrap(),
            seed: r[2].parse().unwrap(),
            mean_abs: v[0],
            min_abs: v[1],
            max_abs: v[2],
            mean_rel: v[3],
            min_rel: v[4],
            max_rel: v[5],
        };
        assert!(row.is_valid());
        assert!(row.mean_abs < 1e-11);
    }
    let again = qshess(&["eigerr", "--sizes", "12,20", "--k", "3", "--trials", "2", "--seed", "9"]);
    assert_eq!(text.as_bytes(), again.stdout);
}

#[test]
fn eigerr_small_size_at_rank_thirty() {
    let row = eigerr_trial(40, 30, 0).unwrap();
    assert!(row.mean_abs <= 1e-11, "{row:?}");
}

#[test]
fn roots_of_a_diagonal_problem_are_its_diagonal() {
    let d = vec![3.0, -1.0, 0.5, 2.0, -4.0];
    let p = Problem::new(d.clone(), DenseMatrix::zeros(5, 1), DenseMatrix::zeros(5, 1), false).unwrap();
    let r = roots(&p, 1e-12, 0).unwrap();
    let mut got: Vec<f64> = r.roots.iter().map(|z| z.re).collect();
    let mut want = d;
    got.sort_by(f64::total_cmp);
    want.sort_by(f64::total_cmp);
    assert_eq!(got, want);
    assert!(r.roots.iter().all(|z| z.im == 0.0));
}

#[test]
fn roots_match_the_oracle() {
    let p = Problem::generate(50, 3, 21, false).unwrap();
    let r = roots(&p, 1e-12, 0).unwrap();
    assert!(r.converged);
    let want = hessenberg_eigs(&qshess::oracle::dense_hessenberg(&p.dense()).h).unwrap();
    let dist = match_eigenvalues(&want, &r.roots);
    assert!(dist.iter().all(|&x| x <= 1e-8), "{dist:?}");
}

#[test]
fn roots_of_a_block_diagonal_problem_are_the_union() {
    let (p1, p2) = (Problem::generate(9, 2, 1, false).unwrap(), Problem::generate(7, 1, 2, false).unwrap());
    let mut u = DenseMatrix::zeros(16, 3);
    let mut v = DenseMatrix::zeros(16, 3);
    u.set_block(0, 0, &p1.u);
    u.set_block(9, 2, &p2.u);
    v.set_block(0, 0, &p1.v);
    v.set_block(9, 2, &p2.v);
    let p = Problem::new([p1.d.clone(), p2.d.clone()].concat(), u, v, false).unwrap();
    let r = roots(&p, 1e-12, 0).unwrap();
    let mut want = hessenberg_eigs(&qshess::oracle::dense_hessenberg(&p1.dense()).h).unwrap();
    want.extend(hessenberg_eigs(&qshess::oracle::dense_hessenberg(&p2.dense()).h).unwrap());
    let dist = match_eigenvalues(&want, &r.roots);
    assert!(dist.iter().all(|&x| x <= 1e-8), "{dist:?}");
}

#[test]
fn roots_csv_has_a_newton_column() {
    let dir = tempfile::tempdir().unwrap();
    let input = path(dir.path(), "p.txt");
    assert!(qshess(&["generate", "12", "2", "--seed", "4", "--out", &input]).status.success());
    let out = qshess(&["roots", &input]);
    assert!(out.status.success());
    let (header, rows) = read_csv(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(header, ROOTS_HEADER);
    assert_eq!(rows.len(), 12);
    assert!(rows.iter().all(|r| r[3].parse::<f64>().unwrap() <= 1e-10));
}

#[test]
fn slope_of_a_power_law() {
    let x = [1.0, 2.0, 4.0, 8.0];
    let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(2.0)).collect();
    assert!((loglog_slope(&x, &y) - 2.0).abs() < 1e-12);
}
