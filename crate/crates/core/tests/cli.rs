mod common;

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use acr::ingest::write_generic;
use acr::repair::emit_support_header;
use common::*;

fn acr(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_acr"));
    cmd.args(args).env_remove("REPAIR_MSC12");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

/// Corpus copy plus a generic dump of the manifest alerts.
fn workspace() -> (tempfile::TempDir, tempfile::TempDir) {
    let tree = corpus_copy();
    let dumps = tempfile::tempdir().unwrap();
    fs::write(dumps.path().join("all.txt"), write_generic(&manifest_alerts())).unwrap();
    (tree, dumps)
}

#[test]
fn ingest_matches_golden_rows() {
    let log = data_dir().join("parsers/clang_tidy_sample.log");
    let o = acr(&["ingest", "--root", "/home/dev/project", &format!("clang-tidy:{}", path(&log))], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let expected = fs::read_to_string(data_dir().join("parsers/clang_tidy_sample.expected")).unwrap();
    let want: Vec<String> = expected
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            format!("{}|{}|{}|{}|{}|{}", f[0], f[1], f[2], f[3], f[4].replace('-', ""), f[7])
        })
        .collect();
    assert_eq!(stdout(&o).lines().collect::<Vec<_>>(), want);
}

#[test]
fn check_mode_writes_nothing() {
    let (tree, dumps) = workspace();
    let before = tree_hash(tree.path());
    let o = acr(&["repair", "--check", "--msc12", "--root", path(tree.path()), path(&dumps.path().join("all.txt"))], &[]);
    assert_eq!(tree_hash(tree.path()), before);
    // outcomes only, no patch
    let out = stdout(&o);
    assert!(!out.contains("+++ "), "{out}");
    assert_eq!(out.lines().filter(|l| l.ends_with("\tRepaired")).count(), 22, "{out}");
    // the corpus holds designed declines
    assert_eq!(o.status.code(), Some(1), "{}", stderr(&o));
    assert!(stderr(&o).contains("Repaired: 22"), "{}", stderr(&o));
}

#[test]
fn patch_mode_matches_in_place() {
    let (tree, dumps) = workspace();
    let all = dumps.path().join("all.txt");
    let before = tree_hash(tree.path());
    let o = acr(&["repair", "--msc12", "--root", path(tree.path()), path(&all)], &[]);
    let patch = stdout(&o);
    assert_eq!(tree_hash(tree.path()), before, "patch mode must not touch the tree");
    assert!(patch.contains("+++ b/acr.h"));
    assert!(patch.contains("+#include \"acr.h\""));

    let edited = corpus_copy();
    let o = acr(&["repair", "--msc12", "--in-place", "--no-backup", "--root", path(edited.path()), path(&all)], &[]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(fs::read_to_string(edited.path().join("acr.h")).unwrap(), emit_support_header());

    if have_program("patch") {
        let mut p = Command::new("patch")
            .args(["-p1", "-s", "-d", path(tree.path())])
            .stdin(std::process::Stdio::piped())
            .spawn()
            .unwrap();
        use std::io::Write;
        p.stdin.take().unwrap().write_all(patch.as_bytes()).unwrap();
        assert!(p.wait().unwrap().success());
        assert_eq!(tree_hash(tree.path()), tree_hash(edited.path()));
    }
}

#[test]
fn in_place_keeps_backups() {
    let (tree, dumps) = workspace();
    let o = acr(&["repair", "--in-place", "--root", path(tree.path()), path(&dumps.path().join("all.txt"))], &[]);
    assert_eq!(o.status.code(), Some(1));
    let orig = fs::read(tree.path().join("e34_rvalue.c.orig")).unwrap();
    assert_eq!(orig, fs::read(corpus_dir().join("e34_rvalue.c")).unwrap());
    assert!(fs::read_to_string(tree.path().join("e34_rvalue.c")).unwrap().contains("null_check(p, abort())"));
    // untouched files get no backup
    assert!(!tree.path().join("e34_macro.c.orig").exists());
}

#[test]
fn exit_zero_when_everything_is_repaired() {
    let (tree, dumps) = workspace();
    let dump = dumps.path().join("one.txt");
    let one = manifest_alerts().into_iter().filter(|a| a.file == Path::new("e33_int.c")).collect::<Vec<_>>();
    fs::write(&dump, write_generic(&one)).unwrap();
    let o = acr(&["repair", "--check", "--root", path(tree.path()), &format!("generic:{}", path(&dump))], &[]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
}

#[test]
fn msc12_gate_precedence() {
    let (tree, dumps) = workspace();
    let dump = dumps.path().join("m12.txt");
    let m12 = manifest_alerts().into_iter().filter(|a| a.file == Path::new("m12_unread_call.c")).collect::<Vec<_>>();
    fs::write(&dump, write_generic(&m12)).unwrap();
    let config = dumps.path().join("acr.conf");
    let run = |extra: &[&str], env: &[(&str, &str)]| {
        let mut args = vec!["repair", "--check", "--root", path(tree.path())];
        args.extend_from_slice(extra);
        args.push(path(&dump));
        let o = acr(&args, env);
        (o.status.code(), stderr(&o).contains("Repaired: 1"))
    };
    assert_eq!(run(&[], &[]), (Some(1), false));
    assert_eq!(run(&[], &[("REPAIR_MSC12", "1")]), (Some(0), true));
    assert_eq!(run(&[], &[("REPAIR_MSC12", "0")]), (Some(1), false));
    assert_eq!(run(&["--msc12"], &[]), (Some(0), true));
    assert_eq!(run(&["--no-msc12"], &[("REPAIR_MSC12", "1")]), (Some(1), false));
    fs::write(&config, "# defaults\nmsc12 = false\n").unwrap();
    assert_eq!(run(&["--config", path(&config)], &[("REPAIR_MSC12", "1")]), (Some(1), false));
    assert_eq!(run(&["--config", path(&config), "--msc12"], &[]), (Some(0), true));
}

#[test]
fn usage_and_io_errors_exit_two() {
    assert_eq!(acr(&["frobnicate"], &[]).status.code(), Some(2));
    assert_eq!(acr(&["repair", "--check", "--in-place", "x.txt"], &[]).status.code(), Some(2));
    assert_eq!(acr(&["ingest", "/nonexistent/report.xml"], &[]).status.code(), Some(2));
    assert_eq!(acr(&["repair", "--root", "/nonexistent/tree", "generic:/dev/null"], &[]).status.code(), Some(2));
    assert_eq!(acr(&["effort", "--ksigloc", "-3"], &[]).status.code(), Some(2));
    let bad_conf = tempfile::NamedTempFile::new().unwrap();
    fs::write(bad_conf.path(), "colour = blue\n").unwrap();
    assert_eq!(acr(&["repair", "--config", path(bad_conf.path()), "generic:/dev/null"], &[]).status.code(), Some(2));
    assert_eq!(acr(&["--help"], &[]).status.code(), Some(0));
}

#[test]
fn header_and_effort_output() {
    let o = acr(&["header"], &[]);
    assert_eq!(stdout(&o), emit_support_header());
    let o = acr(&["effort", "--ksigloc", "1957"], &[]);
    let out = stdout(&o);
    assert!(out.contains("sec_per_alert\t154.44"), "{out}");
    assert!(out.contains("sec_per_ksigloc\t56293.38"), "{out}");
    assert!(out.contains("person_years\t3.49"), "{out}");
}

#[test]
fn recurrence_and_freq_csv() {
    let rec = data_dir().join("recurrence");
    let o = acr(
        &["recurrence", path(&rec.join("git_clang_tidy_before.txt")), path(&rec.join("git_clang_tidy_after.txt"))],
        &[],
    );
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    assert!(csv.starts_with("guideline,before,after,resolved,persisting,new\n"), "{csv}");
    assert!(csv.contains("EXP33-C,9157,500,8657,500,0"), "{csv}");
    assert!(csv.contains("EXP34-C,77,16,61,16,0"), "{csv}");

    let o = acr(&["freq", "--group", "all", path(&data_dir().join("freq/git_cppcheck.xml"))], &[]);
    let csv = stdout(&o);
    assert!(csv.lines().nth(1).unwrap().ends_with("MSC13-C,228,1"), "{csv}");
}

#[test]
fn sigloc_counts_corpus() {
    let o = acr(&["sigloc", path(&corpus_dir())], &[]);
    assert_eq!(o.status.code(), Some(0));
    let total: usize = stdout(&o).lines().last().unwrap().split('\t').next().unwrap().parse().unwrap();
    let by_hand: usize = fs::read_dir(corpus_dir())
        .unwrap()
        .filter_map(Result::ok)
        .filter(|e| e.path().extension().is_some_and(|x| x == "c"))
        .map(|e| naive_sigloc(&fs::read_to_string(e.path()).unwrap()))
        .sum();
    assert_eq!(total, by_hand);
}

/// Line-wise count that only understands the comment shapes the corpus uses.
fn naive_sigloc(src: &str) -> usize {
    let mut in_block = false;
    let mut n = 0;
    for line in src.lines() {
        let mut rest = line.trim();
        let mut code = false;
        while !rest.is_empty() {
            if in_block {
                match rest.find("*/") {
                    Some(i) => {
                        in_block = false;
                        rest = rest[i + 2..].trim_start();
                    }
                    None => rest = "",
                }
            } else if rest.starts_with("//") {
                rest = "";
            } else if let Some(r) = rest.strip_prefix("/*") {
                in_block = true;
                rest = r;
            } else {
                code = true;
                break;
            }
        }
        n += code as usize;
    }
    n
}
