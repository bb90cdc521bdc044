use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_aifv");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

fn aifv(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn sample_codebook_passes_check() {
    let out = aifv(&["check", "--codebook", p(&fixture("sample.codebook"))]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(out.status.success(), "{text}");
    assert!(text.contains("delay_bound=3"));
    assert!(text.contains("result=pass"));
}

#[test]
fn worked_example_encodes_to_seven_bits() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("msg.txt");
    let bits = dir.path().join("msg.bin");
    let back = dir.path().join("back.txt");
    fs::write(&input, "0 2 1 0\n").unwrap();
    let cb = fixture("sample.codebook");
    let out = aifv(&["encode", "--codebook", p(&cb), "--input", p(&input), "-o", p(&bits)]);
    assert!(out.status.success());
    // 1010110 padded with a zero.
    assert_eq!(fs::read(&bits).unwrap(), vec![0b1010_1100]);
    let out = aifv(&["decode", "--codebook", p(&cb), "--input", p(&bits), "-L", "4", "-o", p(&back)]);
    assert!(out.status.success());
    assert_eq!(fs::read_to_string(&back).unwrap().trim(), "0 2 1 0");
}

#[test]
fn construct_then_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.txt");
    let cb = dir.path().join("code.cb");
    fs::write(&dist, "a0 0.6\na1 0.25\na2 0.15\n").unwrap();
    let out = aifv(&["construct", "--dist", p(&dist), "-N", "2", "-o", p(&cb)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(dir.path().join("code.cb.report")).unwrap();
    assert!(report.contains("f_optimal=true"));
    assert!(fs::read_to_string(dir.path().join("code.cb.trace.csv")).unwrap().starts_with("iter,block,Lbar_j,max_dC"));
    assert!(aifv(&["check", "--codebook", p(&cb)]).status.success());

    let msg: Vec<String> = (0..300).map(|i| ((i * 7 + i / 5) % 3).to_string()).collect();
    let input = dir.path().join("m.txt");
    fs::write(&input, msg.join(" ")).unwrap();
    let bits = dir.path().join("m.bin");
    let back = dir.path().join("b.txt");
    assert!(aifv(&["encode", "--codebook", p(&cb), "--input", p(&input), "-o", p(&bits)]).status.success());
    assert!(aifv(&["decode", "--codebook", p(&cb), "--input", p(&bits), "-L", "300", "-o", p(&back)]).status.success());
    assert_eq!(fs::read_to_string(&back).unwrap().split_whitespace().collect::<Vec<_>>(), msg);

    // A wrong count either stops early with a prefix or fails; it never
    // changes the symbols it does return.
    for l in ["100", "5000"] {
        let out = aifv(&["decode", "--codebook", p(&cb), "--input", p(&bits), "-L", l, "-o", p(&back)]);
        if out.status.success() {
            let got = fs::read_to_string(&back).unwrap();
            let got: Vec<&str> = got.split_whitespace().collect();
            let k = got.len().min(msg.len());
            assert_eq!(got[..k], msg.iter().map(String::as_str).collect::<Vec<_>>()[..k]);
        } else {
            assert_eq!(out.status.code(), Some(2));
        }
    }
}

#[test]
fn delay_one_gives_huffman_and_modes_come_from_the_basic_family() {
    let dir = tempfile::tempdir().unwrap();
    let dist = dir.path().join("d.txt");
    fs::write(&dist, "a0 0.8\na1 0.2\n").unwrap();
    let one = dir.path().join("one.cb");
    assert!(aifv(&["construct", "--dist", p(&dist), "-N", "1", "-o", p(&one)]).status.success());
    assert!(fs::read_to_string(&one).unwrap().starts_with("AIFV1 N=1 M=2 K=1"));
    let two = dir.path().join("two.cb");
    let out = aifv(&["construct", "--dist", p(&dist), "-N", "2", "--backend", "brute", "--all-modes", "-o", p(&two)]);
    assert!(out.status.success());
    assert!(String::from_utf8(out.stdout).unwrap().contains("g_checked=true"));
    let modes = ["-", "00,10", "00,11", "00,1", "01,10", "01,11", "01,1", "0,10", "0,11"];
    for line in fs::read_to_string(&two).unwrap().lines().filter(|l| l.starts_with("TREE")) {
        assert!(modes.contains(&line.rsplit(' ').next().unwrap()), "{line}");
    }
    let aifv2 = dir.path().join("a.cb");
    let a = aifv(&["construct", "--dist", p(&dist), "-N", "2", "--aifvm", "-o", p(&aifv2)]);
    let c = aifv(&["construct", "--dist", p(&dist), "-N", "2", "-o", p(&two)]);
    let len = |o: &Output| {
        let s = String::from_utf8(o.stdout.clone()).unwrap();
        s.split_whitespace().find_map(|f| f.strip_prefix("expected_length=")).unwrap().parse::<f64>().unwrap()
    };
    assert!((len(&a) - len(&c)).abs() < 1e-12);
}

#[test]
fn exit_codes_follow_error_class() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.txt");
    fs::write(&bad, "a0 0.5\na1 0.6\n").unwrap();
    let out = aifv(&["construct", "--dist", p(&bad), "-N", "2", "-o", p(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));
    let out = aifv(&["construct", "--dist", p(&dir.path().join("missing")), "-N", "2", "-o", "x"]);
    assert_eq!(out.status.code(), Some(4));
    let good = dir.path().join("good.txt");
    fs::write(&good, "a0 0.9\na1 0.1\n").unwrap();
    let out =
        aifv(&["construct", "--dist", p(&good), "-N", "3", "--node-budget", "2", "-o", p(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(3));
    let out = aifv(&["decode", "--codebook", p(&fixture("sample.codebook")), "--input", "x", "-o", "y"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn check_names_the_broken_rule() {
    let dir = tempfile::tempdir().unwrap();
    let cb = dir.path().join("broken.cb");
    let text = fs::read_to_string(fixture("sample.codebook")).unwrap().replace("SYM 1 CODE 0 LINK 2", "SYM 1 CODE 1 LINK 2");
    fs::write(&cb, text).unwrap();
    let out = aifv(&["check", "--codebook", p(&cb)]);
    assert_eq!(out.status.code(), Some(2));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("Rule 1a"), "{text}");
    assert!(text.contains("result=fail"));
}

#[test]
fn eval_and_simulate_tables() {
    let dir = tempfile::tempdir().unwrap();
    let ev = dir.path().join("ev.csv");
    let out = aifv(&["eval", "-N", "1,2,3", "-o", p(&ev)]);
    assert!(out.status.success());
    let text = fs::read_to_string(&ev).unwrap();
    let rows = text.lines().filter(|l| !l.starts_with('#')).count() - 1;
    assert_eq!(rows, 49 * 4);

    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |o: &Path| {
        vec!["simulate", "--source", "poly", "-N", "2", "--seq-len", "64", "--trials", "30", "--seed", "42", "-o"]
            .into_iter()
            .map(String::from)
            .chain([p(o).to_string()])
            .collect::<Vec<_>>()
    };
    for o in [&a, &b] {
        let out = Command::new(BIN).args(args(o)).output().unwrap();
        assert!(out.status.success());
    }
    let a = fs::read(&a).unwrap();
    assert_eq!(a, fs::read(&b).unwrap());
    assert!(String::from_utf8(a).unwrap().starts_with("# generator=ChaCha8Rng seed=42\n"));
}
