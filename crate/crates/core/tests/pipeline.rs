use implosion_core::barriers::{
    barrier_intersection, make_b_fl, make_b_fr, make_b_nl, make_b_nr, validity_time, write_barrier_csv, BarrierRef,
};
use implosion_core::euler::{find_po, find_ps, k_of_r, r_of_k, Gamma, GasParams};
use implosion_core::scalar::{BigReal, Real};
use implosion_core::shooting::{classify_scan, find_r_bisect_with, ShootOptions, Termination};
use implosion_core::taylor::{locate_poles, r_sweep, taylor_at_ps, taylor_at_ps_with, write_sweep_csv, TaylorOptions};

fn g53(r: f64) -> GasParams {
    GasParams::new(Gamma::monatomic(), r)
}

#[test]
fn frozen_fixed_points_and_first_order() {
    let g = g53(1.13);
    let ps = find_ps(&g).unwrap();
    assert!((ps.w - 2.1498226838861934).abs() < 1e-13);
    assert!((ps.z + 2.5749113419430962).abs() < 1e-13);
    let po = find_po(&g).unwrap();
    assert!((po.w - 0.413608707).abs() < 1e-8 && (po.z + 1.543608706).abs() < 1e-8);
    let s = taylor_at_ps(&g, 2).unwrap();
    assert!((s.w[1] + 2.114734025829285).abs() < 1e-12);
    assert!((s.z[1] - 1.5975140858757486).abs() < 1e-12);
}

#[test]
fn sweep_poles_sit_at_resonant_exponents() {
    let gm = Gamma::monatomic();
    let rows = r_sweep(gm, 1.0 + 1e-6, 1.26, 400, 4);
    let exact = [11.0 - 3.0 * 11f64.sqrt(), 6.0 - 2.0 * 6f64.sqrt(), (43.0 - 5.0 * 43f64.sqrt()) / 9.0];
    for (n, rn) in [2usize, 3, 4].into_iter().zip(exact) {
        let poles = locate_poles(gm, &rows, n);
        assert!(poles.iter().any(|p| (p - rn).abs() < 1e-4), "n={n}: {poles:?}");
        let below = taylor_at_ps_with::<f64>(&g53(rn - 1e-4), n, TaylorOptions::default()).unwrap().z[n];
        let above = taylor_at_ps_with::<f64>(&g53(rn + 1e-4), n, TaylorOptions::default()).unwrap().z[n];
        assert!(below.signum() != above.signum());
    }
    let mut buf = Vec::new();
    write_sweep_csv(&rows, 4, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(text.lines().count(), 401);
    assert!(text.starts_with("r,k,W_0"));
}

#[test]
fn multiprecision_series_for_diatomic_gas() {
    let g = GasParams::new(Gamma::diatomic(), 1.0794044);
    let s = taylor_at_ps_with::<BigReal>(&g, 120, TaylorOptions::default()).unwrap();
    assert!(s.z[120].to_sci().contains('e'));
    let f = taylor_at_ps_with::<f64>(&g, 60, TaylorOptions::default()).unwrap();
    let b = s.to_f64();
    for n in 0..=20 {
        assert!((f.z[n] - b.z[n]).abs() <= 1e-8 * b.z[n].abs().max(1.0), "n={n}");
    }
}

#[test]
fn barrier_chain_at_sample_exponent() {
    let g = g53(1.13);
    let s = taylor_at_ps(&g, 8).unwrap();
    let nl = make_b_nl(&s).unwrap();
    let fl = make_b_fl(&g, &s).unwrap();
    let tv = validity_time(&nl, 1e-3, 1.0).unwrap();
    let ti = barrier_intersection(&nl, BarrierRef::Param(&fl)).unwrap();
    assert!(ti > 0.0 && ti < tv);
    let nr = make_b_nr(&s, 3, 500.0).unwrap();
    let fr = make_b_fr(&g, &s).unwrap();
    let t3 = barrier_intersection(&nr, BarrierRef::Implicit(&fr)).unwrap();
    assert!((t3 / (k_of_r(g.gamma, g.r).unwrap() - 3.0) - 0.42).abs() < 0.01);
    let mut buf = Vec::new();
    write_barrier_csv(&nr, 0.1, 10, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 12);
}

#[test]
fn shooting_is_monotone_around_candidate() {
    let gm = Gamma::monatomic();
    let rep = find_r_bisect_with(gm, 3, 1e-7, &ShootOptions::default()).unwrap();
    let (r3, r4) = (r_of_k(3.0, gm).unwrap(), r_of_k(4.0, gm).unwrap());
    assert!(rep.r > r3 && rep.r < r4);
    let win = rep.escape_window.unwrap();
    let rs = [win[0] - 10e-7, rep.r, win[1] + 10e-7];
    let tags: Vec<Termination> = classify_scan(gm, &rs, rep.delta).into_iter().map(|t| t.unwrap()).collect();
    assert_eq!(tags, vec![Termination::HitsDW, Termination::Escapes, Termination::HitsDZ]);
    assert!((rep.r - 1.1128161).abs() < 1e-6);
}
