use cylbif_core::nonlinearity::NonlinearityModel;
use cylbif_core::ode_shooting::{
    count_nodal_domains_1d, find_one_dim_solution, integrate_ivp, residual_check, ShootingConfig,
};
use cylbif_core::sturm_liouville::{
    default_eigen_count, extrapolated_spectrum, extrapolated_spectrum_for_potential, nondegeneracy_margin,
    one_dim_morse, oscillation_check, spectrum_for_profile,
};
use cylbif_oracle::{elliptic_k, jacobi_cn};
use std::f64::consts::PI;

fn k_half() -> f64 {
    elliptic_k(1.0 / 2f64.sqrt())
}

#[test]
fn rk4_matches_jacobi_cn() {
    let model = NonlinearityModel::pure_cubic();
    let modulus = 1.0 / 2f64.sqrt();
    for a in [0.5, 1.854, 4.0, 7.5] {
        let t = integrate_ivp(&model, a, 10_000).unwrap();
        let err =
            t.x.iter()
                .zip(&t.u)
                .map(|(x, u)| (u - a * jacobi_cn(a * x, modulus)).abs())
                .fold(0.0, f64::max);
        assert!(err <= 1e-8, "a = {a}: max error {err:e}");
    }
}

#[test]
fn hamiltonian_is_conserved() {
    for model in [
        NonlinearityModel::pure_cubic(),
        NonlinearityModel::lane_emden(3.0).unwrap(),
        NonlinearityModel::cubic(1.0, 2.0).unwrap(),
    ] {
        let a = 3.0;
        let t = integrate_ivp(&model, a, 10_000).unwrap();
        let e0 = model.eval_F(a);
        let drift =
            t.u.iter()
                .zip(&t.du)
                .map(|(u, v)| (0.5 * v * v + model.eval_F(*u) - e0).abs() / e0)
                .fold(0.0, f64::max);
        assert!(drift <= 1e-8, "{model:?}: drift {drift:e}");
    }
}

#[test]
fn amplitudes_are_odd_multiples_of_k() {
    let model = NonlinearityModel::pure_cubic();
    for n in 1..=3 {
        let s = find_one_dim_solution(&model, n, &ShootingConfig::default()).unwrap();
        let exact = (2 * n - 1) as f64 * k_half();
        assert!(
            (s.amplitude - exact).abs() <= 1e-6,
            "n = {n}: {} vs {exact}",
            s.amplitude
        );
        assert_eq!(s.nodal_count, n);
    }
}

#[test]
fn amplitude_error_is_fourth_order() {
    let model = NonlinearityModel::pure_cubic();
    let exact = 5.0 * k_half();
    let errs: Vec<f64> = [100usize, 200, 400]
        .iter()
        .map(|&steps| {
            let cfg = ShootingConfig {
                steps,
                ..Default::default()
            };
            (find_one_dim_solution(&model, 3, &cfg).unwrap().amplitude - exact).abs()
        })
        .collect();
    for w in errs.windows(2) {
        let order = (w[0] / w[1]).log2();
        assert!((order - 4.0).abs() < 0.3, "observed order {order} from {errs:?}");
    }
}

#[test]
fn residual_refinement() {
    let model = NonlinearityModel::pure_cubic();
    let mut res = Vec::new();
    for m in [500usize, 1000, 2000] {
        let cfg = ShootingConfig {
            steps: m,
            ..Default::default()
        };
        let mut s = find_one_dim_solution(&model, 1, &cfg).unwrap();
        res.push(residual_check(&mut s, &model));
    }
    assert!(res[2] <= 1e-4, "{res:?}");
    for w in res.windows(2) {
        assert!((w[0] / w[1]).log2() > 1.8, "{res:?}");
    }
}

#[test]
fn one_critical_point_between_zeros() {
    let model = NonlinearityModel::lane_emden(3.0).unwrap();
    for n in 2..=3 {
        let s = find_one_dim_solution(&model, n, &ShootingConfig::default()).unwrap();
        let tol = 1e-8 * s.max_abs();
        // Zeros of u: sign flips between consecutive significant values
        // (a zero may land exactly on a node).
        let mut zeros = vec![0usize];
        let mut last: Option<(usize, f64)> = None;
        for (k, &v) in s.values.iter().enumerate().filter(|(_, v)| v.abs() > tol) {
            if let Some((_, p)) = last {
                if p.signum() != v.signum() {
                    zeros.push(k);
                }
            }
            last = Some((k, v));
        }
        zeros.push(s.values.len() - 1);
        assert_eq!(zeros.len(), n + 1, "n = {n}, zeros {zeros:?}");
        for w in zeros.windows(2).skip(1) {
            let slice = &s.derivative_values[w[0]..w[1]];
            let dtol = 1e-8 * slice.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            assert_eq!(count_nodal_domains_1d(slice, dtol).unwrap(), 2);
        }
    }
}

#[test]
fn even_reflection_solves_dirichlet_problem() {
    let model = NonlinearityModel::pure_cubic();
    let s = find_one_dim_solution(&model, 2, &ShootingConfig::default()).unwrap();
    let m = s.intervals();
    let h = 1.0 / m as f64;
    let reflected: Vec<f64> = (0..=2 * m)
        .map(|k| s.values[(k as isize - m as isize).unsigned_abs()])
        .collect();
    assert!(reflected[0].abs() < 1e-10 && reflected[2 * m].abs() < 1e-10);
    let defect = (1..2 * m)
        .map(|k| {
            let d2 = (reflected[k - 1] - 2.0 * reflected[k] + reflected[k + 1]) / (h * h);
            (-d2 - model.eval_f(reflected[k])).abs()
        })
        .fold(0.0, f64::max);
    assert!(defect < 1e-3, "{defect}");
}

#[test]
fn free_spectrum_extrapolates_to_analytic_values() {
    let ex = extrapolated_spectrum_for_potential(|_| 0.0, &[500, 1000, 2000], 5).unwrap();
    for (i, alpha) in ex.alphas.iter().enumerate() {
        let exact = ((2 * i + 1) as f64 * PI / 2.0).powi(2);
        assert!(
            (alpha - exact).abs() <= 1e-8 * exact,
            "alpha_{} = {alpha} vs {exact}",
            i + 1
        );
    }
}

#[test]
fn morse_index_of_profiles_equals_nodal_count() {
    let shoot = ShootingConfig::default();
    for model in [
        NonlinearityModel::pure_cubic(),
        NonlinearityModel::lane_emden(3.0).unwrap(),
    ] {
        for n in 1..=3 {
            let s = find_one_dim_solution(&model, n, &shoot).unwrap();
            let spec = spectrum_for_profile(&model, s.amplitude, 1000, default_eigen_count(n)).unwrap();
            assert_eq!(one_dim_morse(&spec).unwrap(), n, "{model:?} n = {n}");
            assert!(oscillation_check(&spec));
            assert!(spec.alphas[n] > 0.0);
            assert!(nondegeneracy_margin(&spec) > 0.0);
        }
    }
}

#[test]
fn ground_state_alpha_is_resolved() {
    let model = NonlinearityModel::pure_cubic();
    let s = find_one_dim_solution(&model, 1, &ShootingConfig::default()).unwrap();
    let ex = extrapolated_spectrum(&model, s.amplitude, &[500, 1000, 2000], 3).unwrap();
    assert!(ex.alphas[0] < 0.0 && ex.alphas[1] > 0.0);
    // Margin min(|α₁|, α₂) dwarfs the discretization error.
    let margin = ex.alphas[0].abs().min(ex.alphas[1]);
    assert!(margin > 10.0 * ex.raw_error[0].max(ex.raw_error[1]));
    // Simplicity: gaps exceed 10× the combined error estimates.
    for i in 0..2 {
        let gap = ex.alphas[i + 1] - ex.alphas[i];
        assert!(gap > 10.0 * (ex.raw_error[i] + ex.raw_error[i + 1]));
    }
}
