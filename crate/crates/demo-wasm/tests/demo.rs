use cavity_rwa_demo::{excitation, profile, tail_sweep, Setup, MAX_MODES};

const SYM: Setup = Setup { symmetric: true, resonance_index: 101, mode_count: 201 };

#[test]
fn profile_has_a_front_at_the_light_cone() {
    let e2 = profile(SYM, 0.2, 201).unwrap();
    assert_eq!(e2.len(), 201);
    assert!(e2.iter().all(|v| v.is_finite() && *v >= 0.0));
    // grid spacing 0.005; the cone from x = 0.25 reaches 0.45 at t = 0.2
    let inside = e2[..=90].iter().cloned().fold(0.0, f64::max);
    let beyond = e2[100..].iter().cloned().fold(0.0, f64::max);
    assert!(beyond < 0.1 * inside, "{beyond} vs {inside}");
}

#[test]
fn excitation_rows_start_in_the_initial_state() {
    let rows = excitation(SYM, 0.3).unwrap();
    assert_eq!(rows.len() % 4, 0);
    assert_eq!(&rows[..4], &[0.0, 1.0, 0.0, 0.0]);
    let last = &rows[rows.len() - 4..];
    assert!((last[0] - 0.3).abs() < 1e-12);
    assert!(last[1] < 1.0 && last[1] > 0.0);
}

#[test]
fn symmetric_tail_shrinks_with_more_modes() {
    let tails = tail_sweep(SYM, &[101, 201], 0.2).unwrap();
    assert_eq!(tails.len(), 2);
    assert!(tails[1] < tails[0], "{tails:?}");
}

#[test]
fn rejects_out_of_range_requests() {
    assert!(profile(Setup { mode_count: 0, ..SYM }, 0.1, 11).is_err());
    assert!(excitation(Setup { mode_count: MAX_MODES + 1, ..SYM }, 0.1).is_err());
    // symmetric set reaching below mode 1
    assert!(profile(Setup { resonance_index: 50, ..SYM }, 0.1, 11).is_err());
    assert!(profile(SYM, -1.0, 11).is_err());
}
