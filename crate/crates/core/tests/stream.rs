use stratwave::*;

fn stratified() -> FluidParameters {
    FluidParameters::new(-1.0, 1.0, 1.0).with_stratification(0.1, 1.0)
}

fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn rippled(nx: usize) -> SurfaceShape {
    let mut cos = vec![0.0; 4];
    let mut sin = vec![0.0; 4];
    cos[0] = 1.0;
    cos[1] = 0.1;
    cos[2] = 0.02;
    sin[3] = 0.01;
    SurfaceShape::from_modes(nx, cos, sin).unwrap()
}

/// Root of a continuous function with a sign change on `[lo, hi]`.
fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let flo = f(lo);
    assert!(flo * f(hi) <= 0.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if (f(mid) > 0.0) == (flo > 0.0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[test]
fn flat_uniform_current_is_exact() {
    let p = FluidParameters::new(-1.0, 1.0, 1.0);
    let g = Grid2D::sigma(16, 8).unwrap();
    let sol = solve_dirichlet(&SurfaceShape::flat(16, 1.0).unwrap(), &p, &g).unwrap();
    for j in 0..=8 {
        for i in 0..16 {
            let y = sol.y_at(i, j);
            assert!((sol.at(i, j) - (1.0 - y)).abs() < 1e-14);
        }
    }
    assert!(sol.dirichlet_residual < 1e-12);
}

#[test]
fn flat_stratified_state_reproduces_the_cubic() {
    let p = stratified();
    let flow = LaminarFlow::new(p).unwrap();
    let g = Grid2D::sigma(8, 12).unwrap();
    let sol = solve_dirichlet(&SurfaceShape::flat(8, 1.0).unwrap(), &p, &g).unwrap();
    for j in 0..=12 {
        for i in 0..8 {
            let exact = laminar_psi(&flow, sol.y_at(i, j).min(1.0)).unwrap();
            assert!((sol.at(i, j) - exact).abs() < 1e-13);
        }
    }
    let r = bernoulli_residual(&sol);
    assert!(max_abs(r) < 1e-11);
    let (px, py) = sol.gradient();
    assert!(max_abs(px) < 1e-13);
    for j in 0..=12 {
        let exact = laminar_psi_y(&flow, g.p_values[j].min(1.0)).unwrap();
        let got = py[g.idx(3, j)];
        // centered inside, exact one-sided at the ends
        assert!((got - exact).abs() < 2e-2 * exact.abs(), "level {j}");
    }
}

#[test]
fn rippled_domain_converges_at_second_order() {
    let p = stratified();
    let solve = |nx: usize, nt: usize| {
        let g = Grid2D::sigma(nx, nt).unwrap();
        solve_dirichlet(&rippled(nx), &p, &g).unwrap()
    };
    let levels = [solve(16, 8), solve(32, 16), solve(64, 32)];
    let diff = |c: &StreamSolution, f: &StreamSolution| {
        let mut worst = 0.0f64;
        for j in 0..=c.grid.np {
            for i in 0..c.grid.nq {
                worst = worst.max((c.at(i, j) - f.at(2 * i, 2 * j)).abs());
            }
        }
        worst
    };
    let e0 = diff(&levels[0], &levels[1]);
    let e1 = diff(&levels[1], &levels[2]);
    let ratio = e0 / e1;
    assert!((ratio - 4.0).abs() < 1.0, "ratio {ratio}");
    for s in &levels {
        let top = s.grid.np;
        assert!(max_abs((0..s.grid.nq).map(|i| s.at(i, top))) < 1e-10);
        let bed = max_abs((0..s.grid.nq).map(|i| s.at(i, 0) - 1.0));
        assert!(bed < 1e-10, "{bed}");
    }
}

#[test]
fn solution_is_affine_in_gamma() {
    let g = Grid2D::sigma(16, 8).unwrap();
    let eta = rippled(16);
    let at = |gamma: f64| {
        let p = FluidParameters::new(-1.0, 1.0, 1.0).with_stratification(0.1, gamma);
        solve_dirichlet(&eta, &p, &g).unwrap().psi
    };
    let (a, b, mid) = (at(-2.0), at(4.0), at(1.0));
    for k in 0..a.len() {
        assert!((0.5 * (a[k] + b[k]) - mid[k]).abs() < 1e-12);
    }
}

#[test]
fn bernoulli_residual_agrees_with_the_gradient() {
    let p = stratified();
    let g = Grid2D::sigma(32, 16).unwrap();
    let sol = solve_dirichlet(&rippled(32), &p, &g).unwrap();
    let r = bernoulli_residual(&sol);
    assert!(max_abs(r.iter().copied()) > 1e-3);
    let (px, py) = sol.gradient();
    for i in 0..32 {
        let k = g.idx(i, 16);
        let e = sol.eta.eta[i];
        let oracle = px[k] * px[k] + py[k] * py[k] + 2.0 * p.g * p.b * e - p.q;
        assert!((r[i] - oracle).abs() < 1e-10 * p.q);
    }
}

#[test]
fn free_boundary_keeps_a_laminar_surface() {
    let p = stratified();
    let g = Grid2D::sigma(16, 12).unwrap();
    let flat = SurfaceShape::flat(16, 1.0).unwrap();
    let sol = solve_free_boundary(&flat, &p, &g, &FreeBoundaryOptions::default()).unwrap();
    assert!(max_abs(sol.eta.eta.iter().map(|e| e - 1.0)) < 1e-10);
    assert!(max_abs(bernoulli_residual(&sol)) < 1e-9);
}

#[test]
fn raised_head_selects_the_matching_flat_layer() {
    let mut p = stratified();
    p.q += 1e-3;
    let g = Grid2D::sigma(16, 16).unwrap();
    let flat = SurfaceShape::flat(16, 1.0).unwrap();
    let sol = solve_free_boundary(&flat, &p, &g, &FreeBoundaryOptions::default()).unwrap();
    let head = |d: f64| {
        let mut q = p;
        q.depth = d;
        q.laminar_head() - p.q
    };
    let d = bisect(head, 0.95, 1.05);
    assert!(sol.eta.amplitude() < 1e-8);
    assert!((sol.eta.mean - d).abs() < 1e-8, "{} vs {d}", sol.eta.mean);
}

#[test]
fn small_wave_converges() {
    let flow = LaminarFlow::at_bifurcation(stratified(), Branch::Minus).unwrap();
    let g = Grid2D::sigma(32, 16).unwrap();
    let opts = FreeBoundaryOptions::default();
    let sol = solve_wave(&flow.params, &g, 0.01, &opts).unwrap();
    assert!(max_abs(bernoulli_residual(&sol)) < opts.tol);
    assert!((sol.eta.cos_coefficients()[1] - 0.01).abs() < 1e-14);
    assert!(max_abs(sol.eta.sin_coefficients().iter().copied()) < 1e-12);

    let slope = surface_slope_check(&sol).unwrap();
    assert!(slope.oddness_defect < 1e-10);
    assert!(slope.max_discrepancy < 1e-3);
    assert!(locate_stagnation_points(&sol).unwrap().is_empty());

    let dir = tempfile::tempdir().unwrap();
    sol.write(dir.path()).unwrap();
    let back = StreamSolution::read(dir.path()).unwrap();
    assert_eq!(back.psi, sol.psi);
    assert_eq!(back.eta.eta, sol.eta.eta);
    assert_eq!(back.params, sol.params);
    assert_eq!(back.grid, sol.grid);
}

#[test]
fn slopes_of_a_flat_state_vanish() {
    let p = stratified();
    let g = Grid2D::sigma(16, 8).unwrap();
    let sol = solve_dirichlet(&SurfaceShape::flat(16, 1.0).unwrap(), &p, &g).unwrap();
    let s = surface_slope_check(&sol).unwrap();
    assert!(max_abs(s.slope_fd.iter().copied()) < 1e-15);
    assert!(s.max_discrepancy < 1e-13 && s.oddness_defect < 1e-13);
}

#[test]
fn no_stagnation_in_a_uniform_current() {
    let p = FluidParameters::new(-1.0, 1.0, 1.0);
    let g = Grid2D::sigma(16, 8).unwrap();
    let sol = solve_dirichlet(&SurfaceShape::flat(16, 1.0).unwrap(), &p, &g).unwrap();
    assert!(locate_stagnation_points(&sol).unwrap().is_empty());
}

#[test]
fn flat_plus_branch_stagnation_line() {
    let params = FluidParameters::new(-1.0, 3.0, 1.0).with_stratification(0.0, 8.0);
    let flow = LaminarFlow::at_bifurcation(params, Branch::Plus).unwrap();
    let g = Grid2D::sigma(32, 32).unwrap();
    let sol = solve_dirichlet(&SurfaceShape::flat(32, 3.0).unwrap(), &flow.params, &g).unwrap();
    let pts = locate_stagnation_points(&sol).unwrap();
    assert_eq!(pts.len(), 32);
    let depth = 3.0 - flow.lambda / 8.0;
    for pt in &pts {
        assert!((pt.y - depth).abs() < 1e-8, "{} vs {depth}", pt.y);
    }
}

#[test]
fn plus_branch_wave_keeps_stagnation_below_the_trough() {
    let params = FluidParameters::new(-1.0, 3.0, 1.0).with_stratification(0.0, 8.0);
    let flow = LaminarFlow::at_bifurcation(params, Branch::Plus).unwrap();
    let g = Grid2D::sigma(32, 24).unwrap();
    let sol = solve_wave(&flow.params, &g, 0.01, &FreeBoundaryOptions::default()).unwrap();
    let pts = locate_stagnation_points(&sol).unwrap();
    assert!(!pts.is_empty());
    let trough = sol.eta.min();
    for pt in &pts {
        assert!(pt.y < trough);
    }
}

#[test]
fn truncated_domain_is_rejected() {
    let p = stratified();
    let g = Grid2D::sigma(16, 8).unwrap();
    assert!(solve_dirichlet(&SurfaceShape::flat(8, 1.0).unwrap(), &p, &g).is_err());
    assert!(SurfaceShape::from_samples(vec![1.0, -0.1, 1.0, 1.0]).is_err());
}
