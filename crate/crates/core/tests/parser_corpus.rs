mod common;

use gmwmx::io::{parse_mom, parse_pos, PosComponent, Units};

#[test]
fn valid_fixtures_roundtrip() {
    let n = common::check_roundtrips().unwrap();
    assert!(n >= 10, "only {n} valid fixtures");
}

#[test]
fn malformed_fixtures_fail_with_their_kind() {
    let n = common::check_malformed().unwrap();
    assert!(n >= 10);
}

fn read(name: &str) -> String {
    std::fs::read_to_string(common::fixtures().join("valid").join(name)).unwrap()
}

#[test]
fn mom_headers_are_interpreted() {
    let ts = parse_mom(&read("header_offsets.mom"), None).unwrap();
    assert_eq!(ts.station_id, "GOLD");
    assert_eq!(ts.offsets_declared, vec![51560.0, 51580.0]);
    assert_eq!(ts.len(), 50);
    assert!(ts.metadata.iter().any(|m| m.contains("sampling period")));
}

#[test]
fn metre_files_are_converted() {
    let ts = parse_mom(&read("meters.mom"), None).unwrap();
    let first_line = read("meters.mom").lines().nth(1).unwrap().to_string();
    let metres: f64 = first_line.split_whitespace().nth(1).unwrap().parse().unwrap();
    assert!((ts.values[0] - 1000.0 * metres).abs() < 1e-9);
    let raw = parse_mom(&read("meters.mom"), Some(Units::Mm)).unwrap();
    assert_eq!(raw.values[0], metres);
}

#[test]
fn pos_components_and_station() {
    let text = read("basic.pos");
    let up = parse_pos(&text, PosComponent::U, None).unwrap();
    let north = parse_pos(&text, PosComponent::N, None).unwrap();
    assert_eq!(up.station_id, "P123");
    assert_eq!(up.len(), 30);
    assert_eq!(up.epochs[0], 51544.5);
    let row = text.lines().find(|l| l.starts_with(" 2000")).unwrap();
    let f: Vec<&str> = row.split_whitespace().collect();
    assert!((north.values[0] - 1000.0 * f[15].parse::<f64>().unwrap()).abs() < 1e-9);
    assert!((up.values[0] - 1000.0 * f[17].parse::<f64>().unwrap()).abs() < 1e-9);
    assert!((up.sigma_hint.as_ref().unwrap()[0] - 1000.0 * f[20].parse::<f64>().unwrap()).abs() < 1e-9);
}

#[test]
fn gapped_files_keep_their_grid() {
    let ts = parse_mom(&read("gapped.mom"), None).unwrap();
    assert_eq!(ts.len(), 53);
    assert_eq!(ts.span_days(), 59.0);
}
