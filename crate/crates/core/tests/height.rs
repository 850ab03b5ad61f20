use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stratwave::*;

fn stratified() -> (FluidParameters, StratificationProfile) {
    let p = FluidParameters::new(-1.0, 1.0, 1.0).with_stratification(0.1, 1.0);
    let prof = linear_stratification(p.a, p.b, p.gamma).unwrap();
    (p, prof)
}

/// Smooth field with a zero bed row and one Fourier mode in `q`.
struct Manufactured {
    p0: f64,
    eps: f64,
}

impl Manufactured {
    // base(p) = s t + c t^2, mode(p) = t (1 + p / 2), t = p - p0
    fn parts(&self, p: f64) -> [f64; 6] {
        let t = p - self.p0;
        let (s, c) = (0.8, 0.1);
        [
            s * t + c * t * t,
            s + 2.0 * c * t,
            2.0 * c,
            t * (1.0 + 0.5 * p),
            (1.0 + 0.5 * p) + 0.5 * t,
            1.0,
        ]
    }

    fn value(&self, q: f64, p: f64) -> f64 {
        let [a, _, _, b, _, _] = self.parts(p);
        a + self.eps * q.cos() * b
    }

    fn field(&self, nq: usize, np: usize) -> HeightField {
        let g = make_grid(nq, np, self.p0).unwrap();
        let mut h = HeightField::from_fn(g, |q, p| self.value(q, p));
        for v in &mut h.values[..nq] {
            *v = 0.0;
        }
        h
    }

    /// The continuous interior operator applied to the field.
    fn operator(&self, q: f64, p: f64, params: &FluidParameters, prof: &StratificationProfile) -> f64 {
        let [a, a1, a2, b, b1, b2] = self.parts(p);
        let (cs, sn, e) = (q.cos(), q.sin(), self.eps);
        let h = a + e * cs * b;
        let hq = -e * sn * b;
        let hqq = -e * cs * b;
        let hp = a1 + e * cs * b1;
        let hpp = a2 + e * cs * b2;
        let hqp = -e * sn * b1;
        let s = prof.bernoulli(p) - params.g * h * prof.density_slope(p);
        (1.0 + hq * hq) * hpp - 2.0 * hq * hp * hqp + hp * hp * hqq + s * hp.powi(3)
    }
}

#[test]
fn irrotational_homogeneous_laminar_field_is_linear() {
    let p = FluidParameters::new(-1.0, 1.0, 1.0);
    let prof = linear_stratification(0.0, 1.0, 0.0).unwrap();
    let g = make_grid(16, 8, -1.0).unwrap();
    let h = laminar_height_field(&p, &prof, &g).unwrap();
    for j in 0..=8 {
        for i in 0..16 {
            assert!((h.at(i, j) - (1.0 + g.p_values[j])).abs() < 1e-15);
        }
    }
    assert_eq!(p.q, 2.0 * 9.8 + 1.0);
    let r = pde_residual(&h, &p, &prof).unwrap();
    assert!(r.norm() < 1e-13, "{}", r.norm());
}

#[test]
fn laminar_field_rejects_stagnant_flow() {
    let params = FluidParameters::new(-1.0, 3.0, 1.0).with_stratification(0.0, 8.0);
    let f = LaminarFlow::at_bifurcation(params, Branch::Plus).unwrap();
    let prof = linear_stratification(0.0, 1.0, 8.0).unwrap();
    let g = make_grid(16, 8, f.params.p0).unwrap();
    let e = laminar_height_field(&f.params, &prof, &g).unwrap_err();
    assert!(matches!(e, Error::NonMonotoneStream(_)));
}

#[test]
fn laminar_field_needs_matching_profile() {
    let (p, _) = stratified();
    let other = linear_stratification(0.2, 1.0, 1.0).unwrap();
    let g = make_grid(8, 4, -1.0).unwrap();
    assert!(laminar_height_field(&p, &other, &g).is_err());
    let gg = make_grid(8, 4, -1.5).unwrap();
    let prof = linear_stratification(p.a, p.b, p.gamma).unwrap();
    assert!(laminar_height_field(&p, &prof, &gg).is_err());
}

#[test]
fn stratified_laminar_residual_is_second_order() {
    let (p, prof) = stratified();
    let norms: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&np| {
            let g = make_grid(8, np, p.p0).unwrap();
            let h = laminar_height_field(&p, &prof, &g).unwrap();
            pde_residual(&h, &p, &prof).unwrap().interior_norm()
        })
        .collect();
    for w in norms.windows(2) {
        let ratio = w[0] / w[1];
        assert!((ratio - 4.0).abs() < 0.5, "{norms:?}");
    }
}

#[test]
fn truncation_error_of_a_manufactured_field_is_second_order() {
    let (p, prof) = stratified();
    let m = Manufactured { p0: p.p0, eps: 0.05 };
    let err = |nq: usize, np: usize| {
        let h = m.field(nq, np);
        let g = &h.grid;
        let r = pde_residual(&h, &p, &prof).unwrap();
        let mut worst = 0.0f64;
        for j in 1..np {
            for i in 0..nq {
                let exact = m.operator(g.q_values[i], g.p_values[j], &p, &prof);
                worst = worst.max((r.values[g.idx(i, j)] - exact).abs());
            }
        }
        worst
    };
    let ratio = err(32, 16) / err(64, 32);
    assert!((ratio - 4.0).abs() < 0.5, "ratio {ratio}");
}

#[test]
fn residual_matches_hand_stencils_at_random_nodes() {
    let (p, prof) = stratified();
    let m = Manufactured { p0: p.p0, eps: 0.1 };
    let h = m.field(24, 12);
    let g = h.grid.clone();
    let r = pde_residual(&h, &p, &prof).unwrap();
    let (dq, dp) = (g.dq(), g.dp());
    let v = |i: isize, j: usize| h.at(i.rem_euclid(24) as usize, j);
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..10 {
        let i = rng.random_range(0..24i64) as isize;
        let j = rng.random_range(1..12usize);
        let c = v(i, j);
        let hq = (v(i + 1, j) - v(i - 1, j)) / (2.0 * dq);
        let hp = (v(i, j + 1) - v(i, j - 1)) / (2.0 * dp);
        let hqq = (v(i + 1, j) - 2.0 * c + v(i - 1, j)) / dq.powi(2);
        let hpp = (v(i, j + 1) - 2.0 * c + v(i, j - 1)) / dp.powi(2);
        let hqp = (v(i + 1, j + 1) - v(i + 1, j - 1) - v(i - 1, j + 1) + v(i - 1, j - 1))
            / (4.0 * dq * dp);
        // rho = -A p + B, beta = -gamma
        let s = -p.gamma + p.g * c * p.a;
        let oracle = (1.0 + hq * hq) * hpp - 2.0 * hq * hp * hqp + hp * hp * hqq + s * hp.powi(3);
        let got = r.values[g.idx(i as usize, j)];
        assert!((got - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
    }
    for i in 0..24isize {
        let n = 12;
        let c = v(i, n);
        let hq = (v(i + 1, n) - v(i - 1, n)) / (2.0 * dq);
        let hqq = (v(i + 1, n) - 2.0 * c + v(i - 1, n)) / dq.powi(2);
        let hp = (3.0 * c - 4.0 * v(i, n - 1) + v(i, n - 2)) / (2.0 * dp);
        let curv = hqq / (1.0 + hq * hq).powf(1.5);
        let oracle = 1.0 + hq * hq + (2.0 * p.g * p.b * c - p.q - 2.0 * p.sigma * curv) * hp * hp;
        let got = r.values[g.idx(i as usize, n)];
        assert!((got - oracle).abs() < 1e-12 * oracle.abs().max(1.0));
        assert_eq!(r.values[g.idx(i as usize, 0)], 0.0);
    }
}

#[test]
fn jacobian_matches_central_differences() {
    let (mut p, prof) = stratified();
    p.sigma = -0.01;
    let m = Manufactured { p0: p.p0, eps: 0.1 };
    let h = m.field(16, 8);
    let op = assemble_linearization(&h, &p, &prof).unwrap();
    let nq = h.grid.nq;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..5 {
        let mut dir: Vec<f64> = (0..h.values.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        for d in &mut dir[..nq] {
            *d = 0.0;
        }
        let eps = 1e-6;
        let shifted = |s: f64| {
            let mut f = h.clone();
            for (v, d) in f.values.iter_mut().zip(&dir) {
                *v += s * d;
            }
            pde_residual(&f, &p, &prof).unwrap().values
        };
        let (plus, minus) = (shifted(eps), shifted(-eps));
        let fd: Vec<f64> = plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * eps)).collect();
        let an = op.apply(&dir);
        let scale = an.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let diff = an.iter().zip(&fd).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(diff < 1e-5 * scale, "{diff} vs {scale}");
    }
}

#[test]
fn bed_rows_of_the_jacobian_are_identity() {
    let (p, prof) = stratified();
    let h = Manufactured { p0: p.p0, eps: 0.1 }.field(8, 4);
    let op = assemble_linearization(&h, &p, &prof).unwrap();
    for (r, c, v) in op.matrix.triplets() {
        if r < 8 {
            assert_eq!((c, v), (r, 1.0));
        }
    }
    assert_eq!(op.interior_rows(), 8..32);
}

#[test]
fn newton_from_homogeneous_laminar_field_takes_no_step() {
    let p = FluidParameters::new(-1.0, 1.0, 1.0);
    let prof = linear_stratification(0.0, 1.0, 0.0).unwrap();
    let g = make_grid(16, 8, -1.0).unwrap();
    let h = laminar_height_field(&p, &prof, &g).unwrap();
    let (out, rep) = newton_solve(&h, &p, &prof, 1e-10, 10).unwrap();
    assert!(rep.converged && rep.iterations <= 1);
    assert_eq!(out, h);
}

#[test]
fn newton_fixed_point_is_stable() {
    let (p, prof) = stratified();
    let g = make_grid(16, 8, p.p0).unwrap();
    let guess = laminar_height_field(&p, &prof, &g).unwrap();
    let (h0, rep) = newton_solve(&guess, &p, &prof, 1e-12, 10).unwrap();
    assert!(rep.residual < 1e-12);
    // the discrete laminar state differs from the sampled one by O(dp^2)
    let dev = h0.values.iter().zip(&guess.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dev < 1e-2);
    let (again, rep) = newton_solve(&h0, &p, &prof, 1e-12, 10).unwrap();
    assert_eq!(rep.iterations, 0);
    assert_eq!(again, h0);

    let mut pert = h0.clone();
    for j in 1..=g.np {
        for i in 0..g.nq {
            let k = g.idx(i, j);
            pert.values[k] += 1e-3 * g.q_values[i].cos() * (g.p_values[j] - g.p0());
        }
    }
    let (back, rep) = newton_solve(&pert, &p, &prof, 1e-12, 20).unwrap();
    assert!(rep.converged);
    let dist = back.values.iter().zip(&h0.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    assert!(dist < 1e-8, "{dist}");
}

#[test]
fn newton_rejects_invalid_starts() {
    let (p, prof) = stratified();
    let g = make_grid(8, 4, p.p0).unwrap();
    let lam = laminar_height_field(&p, &prof, &g).unwrap();
    let mut reversed = lam.clone();
    for v in &mut reversed.values {
        *v = -*v;
    }
    let e = newton_solve(&reversed, &p, &prof, 1e-10, 5).unwrap_err();
    assert!(matches!(e, Error::StagnationEncountered { min_hp } if min_hp < 0.0));
    let mut lifted = lam.clone();
    lifted.values[3] = 1e-3;
    let e = newton_solve(&lifted, &p, &prof, 1e-10, 5).unwrap_err();
    assert!(matches!(e, Error::BedCondition { max_abs } if max_abs == 1e-3));
}

#[test]
fn newton_reports_exhausted_iterations() {
    let (p, prof) = stratified();
    let g = make_grid(8, 4, p.p0).unwrap();
    let lam = laminar_height_field(&p, &prof, &g).unwrap();
    let e = newton_solve(&lam, &p, &prof, 1e-30, 2).unwrap_err();
    assert!(matches!(e, Error::NoConvergence { .. }));
}

fn small_options(steps: usize) -> ContinuationOptions {
    ContinuationOptions {
        nq: 32,
        np: 16,
        steps,
        ..ContinuationOptions::default()
    }
}

/// Number of strict local maxima of a periodic sequence.
fn local_maxima(s: &[f64]) -> usize {
    let n = s.len();
    (0..n)
        .filter(|&i| s[i] > s[(i + n - 1) % n] && s[i] >= s[(i + 1) % n])
        .count()
}

#[test]
fn zero_steps_returns_the_laminar_seed() {
    let (p, prof) = {
        let p = FluidParameters::new(-1.0, 1.0, 1.0).with_stratification(0.1, 0.0);
        (p, linear_stratification(0.1, 1.0, 0.0).unwrap())
    };
    let b = continue_branch(&p, &prof, Branch::Minus, &small_options(0)).unwrap();
    assert_eq!(b.len(), 1);
    assert!(b.points[0].amplitude < 1e-12);
    let flow = LaminarFlow::at_bifurcation(p, Branch::Minus).unwrap();
    assert_eq!(b.seed, flow.params);
    assert!(b.seed.p0 < 0.0);
}

#[test]
fn branch_grows_a_single_crest() {
    let p = FluidParameters::new(-1.0, 1.0, 1.0).with_stratification(0.1, 0.0);
    let prof = linear_stratification(0.1, 1.0, 0.0).unwrap();
    let opts = small_options(3);
    let b = continue_branch(&p, &prof, Branch::Minus, &opts).unwrap();
    assert_eq!(b.len(), 4);
    let first = &b.points[1];
    assert!(first.amplitude > 0.0);
    let s = first.field.surface().to_vec();
    assert_eq!(local_maxima(&s), 1);
    let neg: Vec<f64> = s.iter().map(|x| -x).collect();
    assert_eq!(local_maxima(&neg), 1);
    for w in b.points.windows(2) {
        assert!(w[1].arclength - w[0].arclength <= opts.ds * (1.0 + 1e-12));
        assert!(w[1].amplitude > w[0].amplitude);
    }
    for (k, pt) in b.points.iter().enumerate() {
        assert!(pt.residual < opts.newton_tol);
        let r = pde_residual(&pt.field, &b.params_at(k), &prof).unwrap();
        assert!(r.norm() < 10.0 * opts.newton_tol);
    }

    let dir = tempfile::tempdir().unwrap();
    b.write(dir.path()).unwrap();
    assert_eq!(SolutionBranch::read(dir.path()).unwrap(), b);
}

#[test]
fn branch_with_surface_tension_converges() {
    let mut p = FluidParameters::new(-1.0, 1.0, 1.0).with_stratification(0.1, 0.0);
    p.sigma = -0.01;
    let prof = linear_stratification(0.1, 1.0, 0.0).unwrap();
    let opts = small_options(2);
    let b = continue_branch(&p, &prof, Branch::Minus, &opts).unwrap();
    assert_eq!(b.len(), 3);
    assert!(b.last().unwrap().amplitude > 0.0);
    for pt in &b.points {
        assert!(pt.residual < opts.newton_tol);
    }
}

#[test]
fn laplacian_stencil_is_an_m_matrix() {
    let p = FluidParameters::new(-1.0, 1.0, 1.0);
    let prof = linear_stratification(0.0, 1.0, 0.0).unwrap();
    let g = make_grid(16, 8, -1.0).unwrap();
    let h = laminar_height_field(&p, &prof, &g).unwrap();
    let op = assemble_linearization(&h, &p, &prof).unwrap();
    for k in op.interior_rows() {
        assert!((op.a_pp[k] - 1.0).abs() < 1e-14 && (op.a_qq[k] - 1.0).abs() < 1e-14);
        assert!(op.a_qp[k].abs() < 1e-14 && op.c[k].abs() < 1e-14);
    }
    let opts = MaxPrincipleOptions {
        trials: 200,
        ..MaxPrincipleOptions::default()
    };
    let rep = check_discrete_max_principle(&op, &opts).unwrap();
    assert!(rep.structure_ok(), "{rep:?}");
    assert_eq!(rep.rows_checked, 16 * 7);
    assert!(rep.counterexample.is_none());
    assert_eq!(rep.valid_trials, 200);
}

#[test]
fn stable_stratification_passes_and_corruption_is_caught() {
    let (p, prof) = stratified();
    let g = make_grid(16, 8, p.p0).unwrap();
    let h = laminar_height_field(&p, &prof, &g).unwrap();
    let op = assemble_linearization(&h, &p, &prof).unwrap();
    assert!(op.interior_rows().all(|k| op.c[k] > 0.0));
    let opts = MaxPrincipleOptions {
        trials: 500,
        ..MaxPrincipleOptions::default()
    };
    let rep = check_discrete_max_principle(&op, &opts).unwrap();
    assert!(rep.structure_ok());
    assert!(rep.counterexample.is_none());

    let bad = op.with_flipped_off_diagonal(g.idx(5, 4)).unwrap();
    let rep = check_discrete_max_principle(&bad, &opts).unwrap();
    assert!(!rep.off_diagonal_ok);
    let ce = rep.counterexample.expect("corrupted row must fail");
    assert!(ce.interior_min < ce.boundary_min);
}

#[test]
fn physical_fields_of_the_laminar_state() {
    let (p, prof) = stratified();
    let g = make_grid(16, 32, p.p0).unwrap();
    let h = laminar_height_field(&p, &prof, &g).unwrap();
    let c = 2.0;
    let f = recover_physical(&h, &p, &prof, c).unwrap();
    let flow = LaminarFlow::new(p).unwrap();
    for k in 0..g.len() {
        assert_eq!(f.v[k], 0.0);
        let exact = laminar_psi_y(&flow, h.values[k].min(p.depth)).unwrap();
        assert!((f.psi_y[k] - exact).abs() < 5e-3 * exact.abs());
        let sr = f.density[k].sqrt();
        assert!((sr * (f.u[k] - c) - f.psi_y[k]).abs() < 1e-14 * f.psi_y[k].abs());
    }
    for flux in f.column_flux() {
        assert!((flux - p.p0).abs() < 1e-12);
    }
    let top = f.surface_pressure();
    let spread = top.iter().fold(0.0f64, |m, x| m.max((x - top[0]).abs()));
    assert!(spread < 1e-12);
}

#[test]
fn physical_recovery_rejects_stagnation() {
    let (p, prof) = stratified();
    let g = make_grid(8, 4, p.p0).unwrap();
    let h = HeightField::from_fn(g, |_, q| -(q + 1.0));
    assert!(matches!(
        recover_physical(&h, &p, &prof, 0.0),
        Err(Error::StagnationEncountered { .. })
    ));
}
