use nodal_mhd::physics::mhd::{fast_speed, flux, max_speed_bound, pressure, wave_speeds, BX, BY, ENERGY, MX, MY, RHO};
use nodal_mhd::physics::{ConservationLaw, Dual, Mhd2d, Primitive};
use proptest::prelude::*;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + b.abs())
}

fn state(rho: f64, u: [f64; 2], p: f64, b: [f64; 2], gamma: f64) -> [f64; 6] {
    Mhd2d::new(gamma).conserved(&Primitive { rho, u, p, b })
}

#[test]
fn pressure_of_static_gas() {
    let u = [1.0, 0.0, 0.0, 2.5, 0.0, 0.0];
    assert!(close(pressure(&u, 1.4).unwrap(), 1.0, 1e-15));
}

#[test]
fn brio_wu_left_state_round_trip() {
    let u = state(1.0, [0.0, 0.0], 1.0, [0.75, 1.0], 2.0);
    assert_eq!(u[ENERGY], 1.78125);
    assert!(close(pressure(&u, 2.0).unwrap(), 1.0, 1e-15));
    let mut flipped = u;
    flipped[BX] = -u[BX];
    flipped[BY] = -u[BY];
    assert_eq!(pressure(&flipped, 2.0).unwrap(), pressure(&u, 2.0).unwrap());
}

#[test]
fn pressure_rejects_vacuum() {
    assert!(pressure(&[0.0, 0.0, 0.0, 1.0, 0.0, 0.0], 1.4).is_err());
    assert!(pressure(&[-1.0, 0.0, 0.0, 1.0, 0.0, 0.0], 1.4).is_err());
}

#[test]
fn static_gas_flux() {
    let u = state(1.3, [0.0, 0.0], 0.7, [0.0, 0.0], 1.4);
    let mut f = [[0.0; 2]; 6];
    flux(&u, 1.4, &mut f);
    assert_eq!(f[RHO], [0.0, 0.0]);
    assert!(close(f[MX][0], 0.7, 1e-14) && f[MX][1] == 0.0);
    assert!(close(f[MY][1], 0.7, 1e-14) && f[MY][0] == 0.0);
    assert_eq!(f[ENERGY], [0.0, 0.0]);
    assert_eq!(f[BX], [0.0, 0.0]);
    assert_eq!(f[BY], [0.0, 0.0]);
}

#[test]
fn magnetized_static_flux() {
    let p = 0.9;
    let u = state(1.0, [0.0, 0.0], p, [1.0, 0.0], 5.0 / 3.0);
    let mut f = [[0.0; 2]; 6];
    flux(&u, 5.0 / 3.0, &mut f);
    assert!(close(f[MX][0], p - 0.5, 1e-14));
    assert!(close(f[MY][1], p + 0.5, 1e-14));
    assert!(f[MX][1].abs() < 1e-15 && f[MY][0].abs() < 1e-15);
    assert_eq!([f[BX], f[BY]], [[0.0; 2]; 2]);
}

#[test]
fn induction_flux_is_antisymmetric_in_b_and_u() {
    let (rho, vel, b) = (1.0, [0.3, -0.8], [1.1, 0.4]);
    let mut f = [[0.0; 2]; 6];
    let mut g = [[0.0; 2]; 6];
    flux(&state(rho, vel, 1.0, b, 1.4), 1.4, &mut f);
    flux(&state(rho, b, 1.0, vel, 1.4), 1.4, &mut g);
    for c in [BX, BY] {
        for a in 0..2 {
            assert!(close(f[c][a], -g[c][a], 1e-14));
        }
    }
}

#[test]
fn sound_speed_without_field() {
    let u = state(1.0, [0.0, 0.0], 1.0, [0.0, 0.0], 1.4);
    assert!(close(fast_speed(&u, 1.4, [1.0, 0.0]).unwrap(), 1.4f64.sqrt(), 1e-14));
    assert!((fast_speed(&u, 1.4, [1.0, 0.0]).unwrap() - 1.18322).abs() < 1e-5);
    let law = Mhd2d::new(1.4);
    assert!((law.max_wave_speed(&u).unwrap() - 1.18322).abs() < 1e-5);
}

#[test]
fn fast_speed_perpendicular_field() {
    let u = state(1.0, [0.0, 0.0], 1.0, [0.0, 1.0], 2.0);
    assert!(close(fast_speed(&u, 2.0, [1.0, 0.0]).unwrap(), 3f64.sqrt(), 1e-14));
}

#[test]
fn entropy_waves_move_with_the_flow() {
    let u = state(0.7, [0.4, -1.2], 2.0, [0.3, 0.9], 5.0 / 3.0);
    let e = [0.6, 0.8];
    let l = wave_speeds(&u, 5.0 / 3.0, e).unwrap().eigenvalues();
    let un = 0.4 * 0.6 - 1.2 * 0.8;
    assert!(close(l[3], un, 1e-14) && close(l[4], un, 1e-14));
    assert!(l.windows(2).all(|w| w[0] <= w[1]));
}

#[test]
fn wave_speeds_reject_negative_pressure() {
    let mut u = state(1.0, [0.0, 0.0], 1.0, [0.0, 0.0], 1.4);
    u[ENERGY] = -0.1;
    assert!(wave_speeds(&u, 1.4, [1.0, 0.0]).is_err());
    assert!(max_speed_bound(&u, 1.4).is_err());
    assert!(Mhd2d::new(1.4).check_state(&u).is_err());
}

#[test]
fn dual_flux_matches_finite_differences() {
    let gamma = 5.0 / 3.0;
    let u = state(1.2, [0.3, -0.5], 0.8, [0.4, 0.7], gamma);
    let du = [0.1, -0.3, 0.2, 0.05, 0.4, -0.2];
    let dual: Vec<Dual> = u.iter().zip(&du).map(|(&x, &d)| Dual::new(x, d)).collect();
    let mut fd = [[Dual::default(); 2]; 6];
    flux(&dual, gamma, &mut fd);
    let h = 1e-6;
    let shift = |s: f64| -> [[f64; 2]; 6] {
        let v: Vec<f64> = u.iter().zip(&du).map(|(&x, &d)| x + s * d).collect();
        let mut f = [[0.0; 2]; 6];
        flux(&v, gamma, &mut f);
        f
    };
    let (fp, fm) = (shift(h), shift(-h));
    for c in 0..6 {
        for a in 0..2 {
            let fdiff = (fp[c][a] - fm[c][a]) / (2.0 * h);
            assert!((fd[c][a].du - fdiff).abs() < 1e-7, "component {c}, direction {a}");
        }
    }
}

fn valid_state() -> impl Strategy<Value = ([f64; 6], f64)> {
    (
        0.05f64..10.0,
        -3.0f64..3.0,
        -3.0f64..3.0,
        0.01f64..10.0,
        -3.0f64..3.0,
        -3.0f64..3.0,
        1.1f64..3.0,
    )
        .prop_map(|(rho, ux, uy, p, bx, by, g)| (state(rho, [ux, uy], p, [bx, by], g), g))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn slow_alfven_fast_ordering((u, g) in valid_state(), angle in 0.0f64..std::f64::consts::TAU) {
        let w = wave_speeds(&u, g, [angle.cos(), angle.sin()]).unwrap();
        prop_assert!(w.slow <= w.alfven * (1.0 + 1e-12) + 1e-14);
        prop_assert!(w.alfven <= w.fast * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn fast_speed_bounded_by_isotropic_speed((u, g) in valid_state()) {
        let rho = u[RHO];
        let p = pressure(&u, g).unwrap();
        let iso = (g * p / rho + (u[BX] * u[BX] + u[BY] * u[BY]) / rho).sqrt();
        let speed = (u[MX] * u[MX] + u[MY] * u[MY]).sqrt() / rho;
        for k in 0..64 {
            let t = k as f64 / 64.0 * std::f64::consts::TAU;
            let e = [t.cos(), t.sin()];
            let w = wave_speeds(&u, g, e).unwrap();
            prop_assert!(w.fast <= iso * (1.0 + 1e-12));
            prop_assert!(w.normal_velocity.abs() + w.fast <= max_speed_bound(&u, g).unwrap() * (1.0 + 1e-12));
        }
        let b = [u[BX], u[BY]];
        let bn = b[0].hypot(b[1]);
        if bn > 1e-8 {
            let e = [-b[1] / bn, b[0] / bn];
            let cf = wave_speeds(&u, g, e).unwrap().fast;
            prop_assert!((cf - iso).abs() <= 1e-12 * iso);
        }
        prop_assert!(max_speed_bound(&u, g).unwrap() >= speed + iso * (1.0 - 1e-14));
    }

    #[test]
    fn eos_round_trip((u, g) in valid_state()) {
        let law = Mhd2d::new(g);
        let w = law.primitive(&u).unwrap();
        let back = law.conserved(&w);
        for (a, b) in u.iter().zip(&back) {
            prop_assert!((a - b).abs() <= 1e-13 * (1.0 + a.abs()));
        }
        let p = pressure(&u, g).unwrap();
        prop_assert!((law.primitive(&back).unwrap().p - p).abs() <= 1e-13 * (1.0 + p.abs() + u[ENERGY].abs()));
    }
}
