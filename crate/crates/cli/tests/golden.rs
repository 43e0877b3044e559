//! Every scenario against its checked-in output. `UPDATE_GOLDEN=1` rewrites them.

mod common;

use std::collections::BTreeSet;

use common::*;

#[test]
fn scenarios_match_golden_files() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let dir = tempfile::tempdir().unwrap();
    let mut failures = Vec::new();
    for scn in scenarios() {
        let got = run_scenario(&scn, dir.path());
        let golden = golden_dir().join(output_name(&scn));
        if update {
            std::fs::write(&golden, &got).unwrap();
            continue;
        }
        match std::fs::read(&golden) {
            Ok(want) if want == got => {}
            Ok(_) => failures.push(format!("{} differs from {}", scn.display(), golden.display())),
            Err(_) => failures.push(format!("{} has no golden file", scn.display())),
        }
    }
    assert!(failures.is_empty(), "{}", failures.join("\n"));
}

#[test]
fn every_command_has_a_scenario() {
    let covered: BTreeSet<String> = scenarios()
        .iter()
        .map(|p| ecodyn::parse_scenario(&std::fs::read_to_string(p).unwrap()).unwrap().command)
        .collect();
    let help = String::from_utf8(ecodyn(&["--help"]).stdout).unwrap();
    let commands: BTreeSet<String> = help
        .lines()
        .skip_while(|l| !l.starts_with("Commands:"))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .filter_map(|l| l.split_whitespace().next())
        .filter(|c| *c != "help")
        .map(String::from)
        .collect();
    assert_eq!(commands.len(), 16);
    let missing: Vec<_> = commands.difference(&covered).collect();
    assert!(missing.is_empty(), "commands without a scenario: {missing:?}");
}
