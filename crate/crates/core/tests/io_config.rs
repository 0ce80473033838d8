use steer_core::config::Config;
use steer_core::io::*;
use steer_core::simulator::{run, Reliance, Scenario};

fn short_log() -> steer_core::simulator::SimLog {
    run(&Scenario {
        duration: 65.0,
        ..Scenario::default()
    })
    .unwrap()
}

#[test]
fn sim_log_survives_csv_at_nine_digits() {
    let log = short_log();
    let mut buf = Vec::new();
    write_sim_log(&mut buf, &log, &[]).unwrap();
    let back = read_sim_log(std::str::from_utf8(&buf).unwrap()).unwrap();
    assert_eq!(back.len(), log.len());
    assert_eq!(back.log_rate, 120.0);
    for (a, b) in log.rows.iter().zip(&back.rows) {
        let pairs = [
            (a.t, b.t),
            (a.x, b.x),
            (a.y, b.y),
            (a.psi, b.psi),
            (a.phi, b.phi),
            (a.t_d, b.t_d),
            (a.t_h, b.t_h),
            (a.lateral_error, b.lateral_error),
        ];
        for (u, v) in pairs {
            assert!((u - v).abs() <= 5e-9 * u.abs().max(1e-300), "{u} vs {v}");
        }
        assert_eq!(a.flags, b.flags);
    }
}

#[test]
fn header_comments_reparse_to_the_run_config() {
    let mut cfg = Config::default();
    cfg.scenario.reliance = Some(Reliance::High);
    cfg.scenario.driver = Some(3);
    let effective = cfg.effective();
    let comments: Vec<String> = effective.emit().lines().map(str::to_owned).collect();
    let mut buf = Vec::new();
    write_sim_log(&mut buf, &short_log(), &comments).unwrap();
    let table = read_table(std::str::from_utf8(&buf).unwrap()).unwrap();
    let reparsed = Config::parse(&table.comments.join("\n")).unwrap();
    assert_eq!(reparsed, effective);
    assert_eq!(reparsed.driver.k_d, 2.0);
    assert_eq!(reparsed.driver.k_hg, 0.0);
    assert_eq!(reparsed.driver.t_p, 0.5);
}

#[test]
fn malformed_rows_report_their_line() {
    let mut buf = Vec::new();
    write_sim_log(&mut buf, &short_log(), &["note".into()]).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines: Vec<&str> = text.lines().collect();
    // Comment on line 1, header on line 2, so sample k sits on line k + 3.
    lines[12] = "1,2,3";
    let err = read_sim_log(&lines.join("\n")).unwrap_err();
    assert_eq!(err.line(), Some(13));
}
