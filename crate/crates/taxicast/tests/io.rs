use taxicast::config::Schema;
use taxicast::io::{format_timestamp, parse_timestamp, read_events_from, write_events_to};
use taxicast_core::demand::DemandEvent;

#[test]
fn timestamps() {
    assert_eq!(format_timestamp(1_451_865_600), "2016-01-04T00:00:00Z");
    assert_eq!(parse_timestamp("2016-01-04T00:00:00Z").unwrap(), 1_451_865_600);
    assert_eq!(parse_timestamp("2016-01-04T05:30:00+05:30").unwrap(), 1_451_865_600);
    assert_eq!(parse_timestamp("2016-01-04 00:00:00").unwrap(), 1_451_865_600);
    assert!(parse_timestamp("yesterday").is_err());
}

#[test]
fn schema_a_round_trips() {
    let events = vec![
        DemandEvent {
            timestamp: 1_451_865_600,
            lat: 12.971_6,
            lon: 77.594_6,
            user_id: Some("u000001".into()),
        },
        DemandEvent {
            timestamp: 1_451_865_659,
            lat: -33.5,
            lon: 151.25,
            user_id: Some("u,quoted".into()),
        },
    ];
    let mut buf = Vec::new();
    write_events_to(&mut buf, &events).unwrap();
    let text = String::from_utf8(buf.clone()).unwrap();
    assert!(text.starts_with("user_id,timestamp_iso8601,lat,lon\n"));
    let (back, stats) = read_events_from(buf.as_slice(), Schema::A).unwrap();
    assert_eq!(back, events);
    assert_eq!((stats.rows, stats.invalid), (2, 0));
}

#[test]
fn schema_b_reads_columns_by_name() {
    let text = "\
VendorID,tpep_pickup_datetime,tpep_dropoff_datetime,passenger_count,trip_distance,pickup_longitude,pickup_latitude
2,2016-01-01 00:00:00,2016-01-01 00:10:00,1,1.1,-73.990371704101563,40.734695434570313
1,2016-01-01 00:01:00,2016-01-01 00:11:00,1,0.0,0,0
2,not a time,2016-01-01 00:12:00,1,1.0,-73.98,40.73
2,2016-01-01 00:03:00,2016-01-01 00:13:00,1,1.0,-73.98,95.0
";
    let (events, stats) = read_events_from(text.as_bytes(), Schema::B).unwrap();
    assert_eq!(stats.rows, 4);
    assert_eq!(stats.invalid, 3);
    assert_eq!(events.len(), 1);
    let e = &events[0];
    assert_eq!(e.timestamp, 1_451_606_400);
    assert!((e.lat - 40.734_695_434_570_313).abs() < 1e-12);
    assert!((e.lon + 73.990_371_704_101_563).abs() < 1e-12);
    assert_eq!(e.user_id, None);
}

#[test]
fn missing_columns_are_data_errors() {
    let err = read_events_from("a,b\n1,2\n".as_bytes(), Schema::B).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let err = read_events_from("user_id,lat,lon\nu,1,2\n".as_bytes(), Schema::A).unwrap_err();
    assert_eq!(err.exit_code(), 3);
}
