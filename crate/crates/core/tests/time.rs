use lsn_cascade::time::*;

#[test]
fn j2000_is_jd_2451545() {
    let t = EpochTime::from_utc(2000, 1, 1, 12, 0, 0).unwrap();
    assert_eq!(t.unix_ms(), J2000_UNIX_MS);
    assert_eq!(t.julian_date(), 2_451_545.0);
    assert_eq!(t.days_since_j2000(), 0.0);
}

#[test]
fn iso_round_trip() {
    let t = EpochTime::parse_iso8601("2024-03-05T06:07:08.123Z").unwrap();
    assert_eq!(t.to_iso8601(), "2024-03-05T06:07:08.123Z");
    let bare = EpochTime::parse_iso8601("2024-03-05T06:07:08").unwrap();
    assert_eq!(bare.unix_ms(), t.unix_ms() - 123);
    assert!(EpochTime::parse_iso8601("yesterday").is_err());
}

#[test]
fn day_of_year_round_trip() {
    let t = EpochTime::from_year_and_day(2024, 32.5).unwrap();
    assert_eq!(t, EpochTime::from_utc(2024, 2, 1, 12, 0, 0).unwrap());
    let (y, d) = t.year_and_day();
    assert_eq!(y, 2024);
    assert!((d - 32.5).abs() < 1e-12);
}

#[test]
fn utc_hour_wraps() {
    let t = EpochTime::from_utc(2024, 1, 1, 21, 30, 0).unwrap();
    assert!((t.utc_hour() - 21.5).abs() < 1e-12);
    assert!((EpochTime::from_unix_ms(-1).utc_hour() - 24.0).abs() < 1e-6);
}
