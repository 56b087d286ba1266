use hrlp_web::Scenario;

#[test]
fn benchmark_scores_zero_and_is_contiguous() {
    let s = Scenario::generate(3, 5, 6).unwrap();
    let b = s.benchmark().unwrap();
    assert_eq!(b.route_score, 0.0);
    assert!(b.contiguous);
    assert_eq!(b.zone_blocks.len(), 5);
    assert_eq!(s.stops().iter().filter(|v| v.depot).count(), 1);
}

#[test]
fn router_output_covers_every_stop_in_zone_blocks() {
    let s = Scenario::generate(8, 4, 5).unwrap();
    let n = s.stops().len();
    for h in 1..4 {
        let v = s.hrlp(&[10.0, 1.0, 1.0, 1.0, 1.0], h).unwrap();
        let mut seen = v.order.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..n).collect::<Vec<_>>());
        assert!(v.contiguous);
        assert_eq!(v.zone_blocks.len(), 4);
    }
    let t = s.tsp().unwrap();
    assert_eq!(t.order.len(), n);
    assert!(t.route_score >= 0.0);
}

#[test]
fn bad_weights_are_reported() {
    let s = Scenario::generate(1, 3, 4).unwrap();
    assert!(s.hrlp(&[0.5, 1.0, 1.0, 1.0, 1.0], 2).is_err());
    assert!(s.hrlp(&[1.0, 1.0], 2).is_err());
}
