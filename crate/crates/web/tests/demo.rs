use ris_hbf_web::{beam_map_impl, convergence_impl, water_fill_impl};

#[test]
fn beam_map_shape_and_range() {
    let map = beam_map_impl(true, 7, 33).unwrap();
    let gain = map.gain();
    assert_eq!(gain.len(), 33 * 33);
    assert!(gain.iter().all(|g| (0.0..=1.0 + 1e-12).contains(g)));
    // six transmit beams, each a (κ_x, κ_y) pair
    assert_eq!(map.beams().len(), 12);
    assert_eq!(map.paths().len(), 2 * 10);
    assert!(!map.support().is_empty() && map.support().len() % 2 == 0);
    assert!(gain.iter().cloned().fold(0.0, f64::max) > 0.9);
}

#[test]
fn beam_map_peaks_at_beam_centers() {
    // grid step 0.25 contains every κ of the 4×4 receive array
    let res = 9;
    let map = beam_map_impl(false, 3, res).unwrap();
    let beams = map.beams();
    assert_eq!(beams.len(), 4);
    let gain = map.gain();
    for b in beams.chunks(2) {
        let col = ((b[0] + 1.0) / 0.25).round() as usize;
        let row = ((b[1] + 1.0) / 0.25).round() as usize;
        assert!((gain[row * res + col] - 1.0).abs() < 1e-9);
    }
    assert!(beam_map_impl(false, 3, 1).is_err());
}

#[test]
fn water_fill_budget() {
    let wf = water_fill_impl(&[10.0, 0.0, -10.0], 0.1, 2.0).unwrap();
    let total: f64 = wf.gamma().iter().sum();
    assert!((total - 2.0).abs() < 1e-9);
    assert!(wf.gamma()[0] >= wf.gamma()[1] && wf.gamma()[1] >= wf.gamma()[2]);
    assert_eq!(wf.floors().len(), 3);
    for (g, f) in wf.gamma().iter().zip(wf.floors()) {
        if *g > 0.0 {
            assert!((g + f - wf.water_level()).abs() < 1e-9);
        }
    }
    assert!(water_fill_impl(&[], 0.1, 1.0).is_err());
}

#[test]
fn convergence_trace() {
    let c = convergence_impl(4, 20.0, 12, 15, 5).unwrap();
    assert_eq!(c.trace().len(), 15);
    assert!(c.trace().windows(2).all(|w| w[1] >= w[0]));
    assert!(c.trace()[0] >= c.initial_best());
    assert!(c.no_ris_rate() >= 0.0 && c.random_rate() >= 0.0 && c.constant_rate() >= 0.0);
    assert!(convergence_impl(0, 20.0, 12, 15, 5).is_err());
    assert!(convergence_impl(4, 1.0, 12, 15, 5).is_err());
}
