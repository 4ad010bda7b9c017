use std::time::Instant;

use vamo::verify::{find_check, read_reports_csv, write_reports_csv, CHECKS, DEFAULT_SEED};

#[test]
fn checks_pass_and_fixtures_fail() {
    for check in CHECKS {
        let start = Instant::now();
        let reports = (check.run)(DEFAULT_SEED).unwrap();
        assert!(!reports.is_empty(), "{}", check.name);
        let all_pass = reports.iter().all(|r| r.pass);
        for r in &reports {
            eprintln!("{r}");
        }
        eprintln!("{} took {:.2?}", check.name, start.elapsed());
        assert_eq!(all_pass, !check.forced_failure, "{}", check.name);
    }
}

#[test]
fn lookup_accepts_the_prefixed_name() {
    assert_eq!(find_check("check_zero_mean_correction").unwrap().name, "zero_mean_correction");
    assert!(find_check("no_such_check").is_none());
}

#[test]
fn reports_survive_csv() {
    let reports = (find_check("overhead_formula").unwrap().run)(3).unwrap();
    let mut buf = Vec::new();
    write_reports_csv(&reports, &mut buf).unwrap();
    assert_eq!(read_reports_csv(buf.as_slice()).unwrap(), reports);
}
