use hydroblow::cli::config::{echo, parse_config_str};
use hydroblow::modulation::{energy_e1, energy_e2, EnergyConfig, EpsilonField, ModulationState};
use hydroblow::profile::ProfileSpec;
use hydroblow::reduced_pde::{fornberg_weights, Grid, Operators, Scheme};
use hydroblow::scaling_laws::{fit_blowup_time, fit_nu_law, noisy_blowup_study, noisy_blowup_study_seq, LawMode};
use hydroblow::scenarios::{ScenarioKind, ScenarioSpec};
use proptest::prelude::*;

fn eps_field(values: Vec<f64>) -> EpsilonField {
    let n = values.len();
    let zgrid: Vec<f64> = (0..n).map(|i| 8.0 * i as f64 / (n - 1) as f64).collect();
    EpsilonField { phi: vec![0.0; n], zgrid, values, clamped: false }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn xi_round_trip(beta in 0.1f64..3.0, lxi in -3.0f64..6.0) {
        let s = ProfileSpec::new(beta).unwrap();
        let xi = 10f64.powf(lxi);
        let z = s.z_of_xi(xi).unwrap();
        let back = s.xi_of_z(z).unwrap();
        prop_assert!((back - xi).abs() <= 1e-9 * xi, "ξ={xi} → z={z} → {back}");
    }

    #[test]
    fn profile_is_decreasing_and_bounded(beta in 0.0f64..3.0, z1 in 1e-6f64..1e3, dz in 1e-6f64..1e3) {
        let s = ProfileSpec::new(beta).unwrap();
        let (a, b) = (s.eval_phi(z1).unwrap(), s.eval_phi(z1 + dz).unwrap());
        prop_assert!(a >= b);
        prop_assert!(b > 0.0 && a <= 1.0);
    }

    #[test]
    fn energies_are_homogeneous(c in -5.0f64..5.0, k in 1u32..4, beta in prop::sample::select(vec![0.0, 0.5, 1.0, 2.0])) {
        let base: Vec<f64> = (0..200).map(|i| {
            let z = 8.0 * i as f64 / 199.0;
            z * z * (-(k as f64) * z / 4.0).exp()
        }).collect();
        let scaled: Vec<f64> = base.iter().map(|v| c * v).collect();
        let cfg = EnergyConfig::new(beta).unwrap();
        let m = ModulationState { t: 0.0, lambda: 1.0, nu: 0.125, s: 0.0 };
        let (e, es) = (eps_field(base), eps_field(scaled));
        let (a1, b1) = (energy_e1(&e, &cfg).unwrap().value, energy_e1(&es, &cfg).unwrap().value);
        let (a2, b2) = (energy_e2(&e, &cfg, &m).unwrap(), energy_e2(&es, &cfg, &m).unwrap());
        prop_assert!((b1 - c.abs() * a1).abs() <= 1e-12 * (1.0 + a1));
        prop_assert!((b2 - c.abs() * a2).abs() <= 1e-12 * (1.0 + a2));
    }

    #[test]
    fn blowup_fit_is_affine_equivariant(t_end in 0.5f64..2.0, a in 0.1f64..10.0, b in -5.0f64..5.0) {
        let ts: Vec<f64> = (0..120).map(|i| 0.98 * t_end * i as f64 / 119.0).collect();
        let sups: Vec<f64> = ts.iter().map(|t| 3.0 / (t_end - t)).collect();
        let f = fit_blowup_time(&ts, &sups, 0.25).unwrap();
        let ts2: Vec<f64> = ts.iter().map(|t| a * t + b).collect();
        let g = fit_blowup_time(&ts2, &sups, 0.25).unwrap();
        prop_assert!((g.t_blowup - (a * f.t_blowup + b)).abs() <= 1e-8 * (1.0 + g.t_blowup.abs()));
    }

    #[test]
    fn power_law_fit_is_exact(beta in 0.05f64..2.0, nu_inf in 0.01f64..10.0, t_end in 0.1f64..10.0) {
        let ts: Vec<f64> = (0..80).map(|i| 0.99 * t_end * i as f64 / 79.0).collect();
        let nus: Vec<f64> = ts.iter().map(|t| nu_inf * (t_end - t).powf(beta)).collect();
        let f = fit_nu_law(&ts, &nus, t_end, LawMode::Power).unwrap();
        prop_assert!((f.exponent_or_limit - beta).abs() < 1e-9);
        prop_assert!((f.nu_inf - nu_inf).abs() < 1e-9 * nu_inf);
        prop_assert!(f.residual < 1e-10);
    }

    #[test]
    fn fornberg_reproduces_polynomials(x0 in -1.0f64..1.0, c in prop::collection::vec(-2.0f64..2.0, 6)) {
        let xs = [-1.0, -0.55, -0.1, 0.3, 0.75, 1.0];
        let w = fornberg_weights(x0, &xs, 1);
        let p = |x: f64| c.iter().rev().fold(0.0, |acc, ci| acc * x + ci);
        let dp = |x: f64| c.iter().enumerate().skip(1).map(|(i, ci)| i as f64 * ci * x.powi(i as i32 - 1)).sum::<f64>();
        let approx: f64 = w[1].iter().zip(&xs).map(|(wi, x)| wi * p(*x)).sum();
        prop_assert!((approx - dp(x0)).abs() < 1e-9);
    }

    #[test]
    fn quadrature_weights_are_exact_for_lines(a in -3.0f64..3.0, b in -3.0f64..3.0, g in 1.0f64..3.0) {
        let grid = Grid::power(64, g).unwrap();
        for scheme in [Scheme::Upwind1, Scheme::Upwind5] {
            let ops = Operators::new(&grid, scheme);
            let v: Vec<f64> = grid.nodes().iter().map(|z| a + b * z).collect();
            prop_assert!((ops.integral(&v) - (a + b / 2.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn config_echo_round_trips(kappa in 0.0f64..1.0, l in 2.0f64..8.0, n in 16usize..1024, cfl in 0.05f64..0.9) {
        let mut spec = ScenarioSpec::preset(ScenarioKind::Smooth);
        spec.kappa = kappa;
        spec.lambda0 = 10f64.powf(-l);
        spec.grid = spec.grid.with_cells(n);
        spec.solver.cfl = cfl;
        let text: String = echo(&spec)
            .into_iter()
            .filter(|(k, _)| k != "nu0")
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect();
        let parsed = parse_config_str(&text).unwrap().spec;
        prop_assert_eq!(parsed, spec);
    }
}

#[test]
fn noise_study_is_scheduling_independent() {
    let ts: Vec<f64> = (0..400).map(|i| 0.99 * i as f64 / 399.0).collect();
    let sups: Vec<f64> = ts.iter().map(|t| 1.0 / (1.0 - t)).collect();
    let a = noisy_blowup_study(&ts, &sups, 0.01, 100, 7, 0.25, 1.0).unwrap();
    let b = noisy_blowup_study_seq(&ts, &sups, 0.01, 100, 7, 0.25, 1.0).unwrap();
    assert_eq!(a.estimates, b.estimates);
    assert!(a.max_rel_error < 0.02, "{}", a.max_rel_error);
}

