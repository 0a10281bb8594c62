use std::process::{Command, Output};

fn cfboltz(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfboltz")).args(args).output().expect("run cfboltz")
}

fn stdout(args: &[&str]) -> String {
    let out = cfboltz(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    cfboltz(args).status.code().unwrap()
}

fn spec_file(text: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().unwrap();
    std::fs::write(f.path(), text).unwrap();
    f
}

#[test]
fn sample_binary_golden() {
    assert_eq!(
        stdout(&["sample", "--model", "binary", "-n", "8", "-c", "3", "--seed", "7"]),
        "0(0(0(0(z) 0(0(0(z) 0(z)) 0(0(z) 0(0(z) 0(z))))) 0(z)) 0(z))\n\
         0(0(0(z) 0(0(z) 0(0(0(0(z) 0(0(z) 0(z))) 0(z)) 0(z)))) 0(z))\n\
         0(0(0(z) 0(0(z) 0(0(z) 0(z)))) 0(0(0(0(z) 0(z)) 0(z)) 0(z)))\n"
    );
}

#[test]
fn sample_jsonl_golden() {
    let line = r#"{"color":0,"children":[{"color":0,"children":[{"color":0,"children":[{"leaf":"z"}]},{"color":0,"children":[{"leaf":"z"}]}]},{"color":0,"children":[{"leaf":"z"}]}]}"#;
    assert_eq!(
        stdout(&["sample", "--model", "binary", "-n", "3", "-c", "2", "--seed", "7", "--format", "jsonl"]),
        format!("{line}\n{line}\n")
    );
}

#[test]
fn sample_rhv_jsonl_has_n_leaves() {
    let out = stdout(&["sample", "--model", "rhv", "-n", "100", "-c", "3", "--format", "jsonl", "--seed", "2"]);
    assert_eq!(out.lines().count(), 3);
    for l in out.lines() {
        let v: serde_json::Value = serde_json::from_str(l).unwrap();
        fn leaves(v: &serde_json::Value) -> usize {
            match v.get("children") {
                Some(c) => c.as_array().unwrap().iter().map(leaves).sum(),
                None => 1,
            }
        }
        assert_eq!(leaves(&v), 100);
    }
}

#[test]
fn sample_bridge_golden() {
    assert_eq!(
        stdout(&["sample", "--model", "rhv", "-n", "4", "-c", "3", "--seed", "5", "--mode", "bridge"]),
        "[0(1(z) 1(2(z) 2(1(z) 1(z))))]\n[0(z), 0(z), 0(A A A A), 0(z), 0(z)]\n[0(2(1(2(z) 2(z)) 1(z)) 2(z))]\n"
    );
}

#[test]
fn sample_streams_golden() {
    assert_eq!(
        stdout(&["sample", "--model", "rhv", "-n", "6", "-c", "4", "--seed", "5", "-j", "2"]),
        "0(2(1(z) 1(2(z) 2(z))) 2(1(z) 1(2(z) 2(z))))\n\
         0(1(0(1(z) 1(z)) 0(z) 0(z) 0(z)) 1(z))\n\
         0(0(z) 0(z) 0(z) 0(1(z) 1(2(z) 2(z))))\n\
         0(1(0(1(z) 1(z)) 0(z) 0(z) 0(z)) 1(z))\n"
    );
}

#[test]
fn sample_toy_and_oracle_golden() {
    assert_eq!(
        stdout(&["sample", "--model", "toy", "-n", "12", "-c", "3", "--seed", "7", "--format", "jsonl"]),
        "{\"steps\":[0,-1,0,1,0,0,-1,0,1,0,0,0]}\n{\"steps\":[-1,0,0,1,0,0,0,0,-1,0,0,1]}\n{\"steps\":[1,-1,1,-1,1,0,0,0,-1,1,0,-1]}\n"
    );
    assert_eq!(stdout(&["sample", "--model", "toy", "-n", "8", "-c", "2", "--seed", "3", "--method", "naive-toy"]), "00++--+-\n-+00--++\n");
    assert_eq!(
        stdout(&["sample", "--model", "binary", "-n", "5", "-c", "2", "--seed", "3", "--method", "oracle"]),
        "0(0(0(z) 0(0(z) 0(0(z) 0(z)))) 0(z))\n0(0(0(z) 0(z)) 0(0(z) 0(0(z) 0(z))))\n"
    );
}

#[test]
fn sample_svg() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.svg");
    let p = path.to_str().unwrap();
    stdout(&["sample", "--model", "rhv", "-n", "40", "--seed", "1", "--svg", p]);
    let svg = std::fs::read_to_string(&path).unwrap();
    assert!(svg.starts_with("<svg"));
    assert_eq!(svg.matches("<rect").count(), 40);
    assert_eq!(code(&["sample", "--model", "binary", "-n", "5", "--svg", p]), 1);
}

#[test]
fn critical_golden() {
    let out = stdout(&["critical", "--model", "rhv"]);
    assert!(out.starts_with(
        "z* = 0.186894372540204\nR* = 0.394515516591278\nH* = 0.302817237353109\nV* = 0.302817237353109\n\
         frobenius eigenvalue = 1.000000000000000\n"
    ));
    let f = spec_file("A = z + A^2 + A^3;");
    let out = stdout(&["critical", "--spec", f.path().to_str().unwrap()]);
    assert!(out.starts_with("z* = 0.185185185185185\nA* = 0.333333333333333\n"), "{out}");
    assert!(out.contains("v0 = 1\n"));
}

#[test]
fn count_golden() {
    assert_eq!(stdout(&["count", "--model", "binary", "-n", "8"]), "1 1\n2 1\n3 2\n4 5\n5 14\n6 42\n7 132\n8 429\n");
    assert_eq!(stdout(&["count", "--model", "toy", "-n", "4"]), "1 2\n2 6\n3 20\n4 70\n");
    assert_eq!(stdout(&["count", "--model", "rhv", "-n", "5"]), "1 1\n2 2\n3 4\n4 11\n5 40\n");
}

#[test]
fn parse_golden() {
    assert_eq!(stdout(&["parse", "--model", "rhv"]), "R = z + H^2 + V^2 + R^4;\nH = z + V^2 + R^4;\nV = z + H^2 + R^4;\n");
    let f = spec_file("# motzkin-like\nA = z + z A + 0.5 * A^2 + z;\n");
    assert_eq!(stdout(&["parse", "--spec", f.path().to_str().unwrap()]), "A = 2 z + z A + 1/2 A^2;\n");
}

#[test]
fn verify_golden() {
    assert_eq!(
        stdout(&["verify", "--model", "binary", "-n", "2"]),
        "classes = 1\nsamples = 1000\nstatistic = 0.0000\ndof = 0\np-value = 1.000000\nresult = pass (alpha = 0.001)\n"
    );
    assert_eq!(
        stdout(&["verify", "--model", "rhv", "-n", "3", "--seed", "9", "-c", "500"]),
        "classes = 4\nsamples = 500\nstatistic = 1.2960\ndof = 3\np-value = 0.730083\nresult = pass (alpha = 0.001)\n"
    );
    assert!(stdout(&["verify", "--model", "toy", "-n", "4", "--seed", "1"]).ends_with("result = pass (alpha = 0.001)\n"));
}

#[test]
fn bench_csv() {
    let out = cfboltz(&["bench", "--model", "binary", "--sizes", "100,1000", "-c", "20", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "size,time_ns,restarts,bits,reach,racc");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("100,") && lines[2].starts_with("1000,"));
    assert!(lines.iter().skip(1).all(|l| l.split(',').count() == 6));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("time ratio per decade 100 -> 1000"));
    assert!(err.contains("shannon ratio"));
    let toy = stdout(&["bench", "--model", "toy", "--sizes", "1000", "-c", "50"]);
    assert!(toy.lines().nth(1).unwrap().starts_with("1000,"));
    assert_eq!(code(&["bench", "--model", "toy", "--sizes", "100,10"]), 1);
}

#[test]
fn exit_codes() {
    let bad_syntax = spec_file("A = z +* A;");
    let not_irreducible = spec_file("A = z + B; B = z;");
    let empty = spec_file("A = z^2 + A^2;");
    let unknown = spec_file("A = z + B;");
    let p = |f: &tempfile::NamedTempFile| f.path().to_str().unwrap().to_string();
    assert_eq!(code(&["parse", "--spec", &p(&bad_syntax)]), 2);
    assert_eq!(code(&["parse", "--spec", &p(&unknown)]), 2);
    assert_eq!(code(&["parse", "--spec", &p(&not_irreducible)]), 3);
    assert_eq!(code(&["sample", "--spec", &p(&not_irreducible), "-n", "5"]), 3);
    assert_eq!(code(&["sample", "--spec", &p(&empty), "-n", "5"]), 4);
    assert_eq!(code(&["sample", "--model", "binary", "-n", "0"]), 4);
    assert_eq!(code(&["sample", "--model", "nope", "-n", "3"]), 1);
    assert_eq!(code(&["sample", "--spec", "/nonexistent/x.cfg", "-n", "3"]), 1);
    assert_eq!(code(&["sample", "-n", "3"]), 1);
    assert_eq!(code(&["sample", "--model", "binary", "-n", "3", "--tilt", "-2"]), 1);
}

#[test]
fn fixed_tilt_and_small_sizes() {
    // A fixed tilt changes the stream but not the size; tiny sizes fall back to the oracle.
    let out = stdout(&["sample", "--model", "rhv", "-n", "200", "-c", "2", "--tilt", "0.3", "--format", "jsonl"]);
    assert_eq!(out.lines().count(), 2);
    assert_eq!(stdout(&["sample", "--model", "binary", "-n", "1", "-c", "2"]), "0(z)\n0(z)\n");
}

#[test]
fn periodic_spec_large_empty_size() {
    let f = spec_file("A = z^2 + A^2;");
    let p = f.path().to_str().unwrap();
    assert_eq!(code(&["sample", "--spec", p, "-n", "1001"]), 4);
    assert_eq!(stdout(&["sample", "--spec", p, "-n", "1000", "--seed", "1"]).matches('z').count(), 1000);
}
