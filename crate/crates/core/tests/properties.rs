use front_forge_core::analysis::decay_rate;
use front_forge_core::potential::{build_normalized, Potential, PotentialSpec};
use front_forge_core::profile::{average, enforce_cone, nabla, pool_adjacent_violators};
use front_forge_core::psystem::{classify, complete_shock, energy_residual, Branch, ShockData};
use front_forge_core::solver::action;
use front_forge_core::{builtin, Builtin, Grid, Profile};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = Grid> {
    (2usize..=12, 2usize..=8).prop_map(|(k, m)| Grid::from_k(k, m).unwrap())
}

/// Smooth-ish random profile on `g` with the given limits: a few bumps plus a tanh ramp.
fn profile_on(g: Grid, l: f64, r: f64, coeffs: &[f64]) -> Profile {
    let m = g.m as f64;
    Profile::from_fn(
        g,
        |x| {
            let ramp = l + 0.5 * (r - l) * (1.0 + (x / coeffs[0].abs().max(0.2)).tanh());
            let bumps: f64 = coeffs[1..]
                .iter()
                .enumerate()
                .map(|(j, c)| c * (-(x - (j as f64 - 2.0) * 0.3 * m).powi(2)).exp())
                .sum();
            ramp + bumps
        },
        l,
        r,
    )
}

/// Bumps of the form `(1 - (x/R)^2)^4` that vanish within one unit of the grid ends.
fn compact_on(g: Grid, coeffs: &[f64]) -> Profile {
    let r = g.m as f64 - 1.0;
    Profile::from_fn(
        g,
        |x| {
            coeffs
                .iter()
                .enumerate()
                .map(|(j, c)| {
                    let y = (x - (0.2 * j as f64 - 0.2) * r) / (0.5 * r);
                    if y.abs() < 1.0 { c * (1.0 - y * y).powi(4) } else { 0.0 }
                })
                .sum()
        },
        0.0,
        0.0,
    )
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 6)
}

fn cubic_poly() -> impl Strategy<Value = PotentialSpec> {
    (0.5f64..2.0, -0.3f64..0.3, -0.1f64..0.1)
        .prop_map(|(a, c3, c4)| PotentialSpec::polynomial(vec![0.0, 0.0, 0.5 * a, c3, c4]))
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn average_is_self_adjoint(g in grid(), cu in coeffs(), cv in coeffs()) {
        let u = compact_on(g, &cu[..3]);
        let v = compact_on(g, &cv[3..]);
        let lhs = average(&u).inner(&v);
        let rhs = u.inner(&average(&v));
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
    }

    #[test]
    fn average_is_a_contraction(g in grid(), cu in coeffs(), cv in coeffs()) {
        let u = profile_on(g, -1.0, 1.0, &cu);
        let v = profile_on(g, -1.0, 1.0, &cv);
        let (au, av) = (average(&u), average(&v));
        prop_assert!(au.max_abs_diff(&av) <= u.max_abs_diff(&v) + 1e-14);
        let d: Vec<f64> = u.values.iter().zip(&v.values).map(|(a, b)| a - b).collect();
        let ad: Vec<f64> = au.values.iter().zip(&av.values).map(|(a, b)| a - b).collect();
        prop_assert!(g.trapezoid(&ad.iter().map(|x| x * x).collect::<Vec<_>>())
            <= g.trapezoid(&d.iter().map(|x| x * x).collect::<Vec<_>>()) * (1.0 + 1e-12) + 1e-14);
    }

    #[test]
    fn average_commutes_with_shifts_and_nabla(g in grid(), c in coeffs(), s in -5isize..=5) {
        let u = profile_on(g, -0.5, 2.0, &c);
        let a = average(&u.shifted(s));
        let b = average(&u).shifted(s);
        let an = average(&nabla(&u));
        let na = nabla(&average(&u));
        // equal where neither side reaches past the padded data
        let k = g.k;
        let off = s.unsigned_abs();
        for i in k + off..g.len() - k - off {
            prop_assert!((a.values[i] - b.values[i]).abs() <= 1e-13);
        }
        for i in 2 * k..g.len() - 2 * k {
            prop_assert!((an.values[i] - na.values[i]).abs() <= 1e-13);
        }
    }

    #[test]
    fn nabla_is_the_half_unit_difference(g in grid(), c in coeffs()) {
        let u = profile_on(g, -1.0, 1.0, &c);
        let au = average(&u);
        let k = g.k as isize;
        for i in 0..g.len() as isize {
            let direct = au.at(i + k) - au.at(i - k);
            prop_assert!((nabla(&au).values[i as usize] - direct).abs() <= 1e-14);
        }
    }

    #[test]
    fn average_preserves_the_cone(g in grid(), incs in prop::collection::vec(0.0f64..1.0, 16)) {
        let n = g.len();
        let vals: Vec<f64> = (0..n).map(|i| {
            let j = i * incs.len() / n;
            -1.0 + 2.0 * incs[..=j].iter().sum::<f64>() / incs.iter().sum::<f64>().max(1e-9)
        }).map(|v| v.clamp(-1.0, 1.0)).collect();
        let u = Profile::new(g, vals, -1.0, 1.0).unwrap();
        let au = average(&u);
        prop_assert!(au.values.windows(2).all(|w| w[1] >= w[0] - 1e-15));
        prop_assert!(au.values.iter().all(|v| (-1.0 - 1e-15..=1.0 + 1e-15).contains(v)));
    }

    #[test]
    fn action_is_shift_invariant(s in -400isize..=400, width in 0.5f64..5.0) {
        // transition reaches the limits exactly, so the shift stays inside the grid
        let np = builtin(Builtin::CubicForce { beta: 0.4 }).unwrap();
        let g = Grid::new(0.05, 40).unwrap();
        let w = Profile::from_fn(
            g,
            |x| (0.5 * std::f64::consts::PI * (x / width).clamp(-1.0, 1.0)).sin(),
            -1.0,
            1.0,
        );
        let l0 = action(&np, &w);
        let l1 = action(&np, &w.shifted(s));
        prop_assert!((l0 - l1).abs() <= 1e-10, "{} vs {}", l0, l1);
    }

    #[test]
    fn galilean_boost_keeps_residuals_and_type(p in cubic_poly(), a in -1.0f64..1.0, b in -1.0f64..1.0,
                                              vm in -2.0f64..2.0, dv in -3.0f64..3.0) {
        prop_assume!((a - b).abs() > 1e-3);
        let Ok(s) = complete_shock(&p, a, b, vm, Branch::Two) else { return Ok(()) };
        let t = s.boosted(dv);
        let (r0, r1) = (s.jump_residuals(&p), t.jump_residuals(&p));
        for j in 0..2 {
            prop_assert!((r0[j] - r1[j]).abs() <= 1e-10 * (1.0 + dv.abs()));
        }
        // the energy residual moves by dv times the momentum residual, which is zero here
        prop_assert!((r0[2] - r1[2]).abs() <= 1e-9 * (1.0 + dv.abs()).powi(2));
        if let (Ok(c0), Ok(c1)) = (classify(&p, &s), classify(&p, &t)) {
            prop_assert_eq!(c0, c1);
        }
    }

    #[test]
    fn classification_is_mirror_invariant(p in cubic_poly(), a in -1.0f64..1.0, b in -1.0f64..1.0,
                                          vm in -2.0f64..2.0, branch in 1u8..=2) {
        prop_assume!((a - b).abs() > 1e-3);
        let Ok(s) = complete_shock(&p, a, b, vm, Branch::from_index(branch).unwrap()) else { return Ok(()) };
        let m: ShockData = s.mirrored();
        if let (Ok(c0), Ok(c1)) = (classify(&p, &s), classify(&p, &m)) {
            prop_assert_eq!(c0, c1);
        }
        let (r0, rm) = (s.jump_residuals(&p), m.jump_residuals(&p));
        prop_assert!(rm[0].abs() <= 1e-10 && rm[1].abs() <= 1e-10);
        prop_assert!((rm[2] - r0[2]).abs() <= 1e-10 * (1.0 + r0[2].abs()));
    }

    #[test]
    fn strictly_convex_force_has_no_conservative_shocks(c3 in 0.05f64..0.5, a in 0.0f64..2.0, b in 0.0f64..2.0) {
        // Phi''' = 6 c3 > 0 everywhere
        prop_assume!((a - b).abs() > 1e-2);
        let p = PotentialSpec::polynomial(vec![0.0, 0.0, 0.5, c3]);
        prop_assert!(energy_residual(&p, a, b).abs() > 0.0);
        // |J| = c3 |[r]|^3 / 2 for a cubic potential
        let expected = 0.5 * c3 * (b - a).abs().powi(3);
        prop_assert!((energy_residual(&p, a, b).abs() - expected).abs() <= 1e-12 * (1.0 + expected));
    }

    #[test]
    fn decay_rate_decreases_with_lambda(l1 in 0.01f64..0.98, dl in 0.001f64..0.5) {
        let l2 = (l1 + dl).min(0.99);
        prop_assume!(l2 > l1);
        let (t1, t2) = (decay_rate(l1).unwrap(), decay_rate(l2).unwrap());
        prop_assert!(t1 > t2);
        let half = 0.5 * t1;
        prop_assert!((l1 * (half.sinh() / half).powi(2) - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn normalization_invariants(p in cubic_poly(), a in -1.0f64..1.0, b in -1.0f64..1.0) {
        prop_assume!((a - b).abs() > 1e-2);
        let Ok(np) = build_normalized(&p, a, b) else { return Ok(()) };
        prop_assert!((np.dphi(-1.0) + 1.0).abs() <= 1e-10);
        prop_assert!((np.dphi(1.0) - 1.0).abs() <= 1e-10);
        prop_assert!((np.strain(-1.0) - a).abs() <= 1e-14 && (np.strain(1.0) - b).abs() <= 1e-14);
        // the energy gap is J scaled by 4 / ([Phi'] [r])
        let j = energy_residual(&p, a, b);
        let scale = 4.0 / (np.dphi_jump * np.r_jump);
        prop_assert!((np.energy_gap() - scale * j).abs() <= 1e-10 * (1.0 + (scale * j).abs()));
        let again = np.renormalized(-1.0, 1.0).unwrap();
        for w in [-1.0, -0.3, 0.0, 0.7, 1.0] {
            prop_assert!((again.phi(w) - np.phi(w)).abs() <= 1e-10 * (1.0 + np.phi(w).abs()));
        }
    }

    #[test]
    fn pav_is_the_monotone_projection(y in prop::collection::vec(-5.0f64..5.0, 1..60)) {
        let x = pool_adjacent_violators(&y);
        prop_assert_eq!(x.len(), y.len());
        prop_assert!(x.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        let (sy, sx): (f64, f64) = (y.iter().sum(), x.iter().sum());
        prop_assert!((sy - sx).abs() <= 1e-9);
        // idempotent
        let xx = pool_adjacent_violators(&x);
        prop_assert!(x.iter().zip(&xx).all(|(a, b)| (a - b).abs() <= 1e-12));
        // no closer than any other monotone candidate: sorted data and the constant mean
        let dist = |z: &[f64]| y.iter().zip(z).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        let mut sorted = y.clone();
        sorted.sort_by(f64::total_cmp);
        let mean = vec![sy / y.len() as f64; y.len()];
        prop_assert!(dist(&x) <= dist(&sorted) + 1e-9);
        prop_assert!(dist(&x) <= dist(&mean) + 1e-9);
        // first-order optimality: residual orthogonal to the fit
        let r: Vec<f64> = y.iter().zip(&x).map(|(a, b)| a - b).collect();
        prop_assert!(dot(&r, &x).abs() <= 1e-8);
    }

    #[test]
    fn cone_enforcement_is_idempotent(g in grid(), c in coeffs()) {
        let u = profile_on(g, -1.0, 1.0, &c);
        let (p, _) = enforce_cone(&u);
        prop_assert!(p.values.windows(2).all(|w| w[1] >= w[0]));
        prop_assert!(p.values.iter().all(|v| (-1.0..=1.0).contains(v)));
        let (q, corr) = enforce_cone(&p);
        prop_assert_eq!(corr, 0.0);
        prop_assert_eq!(q.values, p.values);
    }
}
