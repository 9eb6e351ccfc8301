// SPDX-License-Identifier: Apache-2.0

//! Cross-level properties of the finite-element solvers on shipped shapes.

use macrolab::ellipticfem::{gen_mesh, transfer, EllipticSystem, Mesh, ScalarFieldFE, Shape, VectorFieldFE};

fn smooth_h(x: [f64; 3]) -> [f64; 3] {
    [x[1] * x[1] + x[2], (x[0] * x[2]).sin(), x[0] * x[0] - x[1]]
}

fn systems(shape: Shape, levels: std::ops::RangeInclusive<usize>) -> Vec<EllipticSystem> {
    levels.map(|l| EllipticSystem::new(gen_mesh(shape, l).unwrap())).collect()
}

#[test]
fn energy_identity_and_uniqueness_on_every_shape() {
    for shape in [Shape::Ball, Shape::Spheroid { a: 1.0, c: 1.5 }, Shape::Ellipsoid { a: 1.0, b: 1.3, c: 1.7 }] {
        let sys = EllipticSystem::new(gen_mesh(shape, 1).unwrap());
        let basis = sys.rigid_basis();
        let h = sys.compatibility_project(&VectorFieldFE::from_fn(&sys.mesh, smooth_h), &basis);
        let (u, _) = sys.solve_sym_poisson(&h, &basis).unwrap();
        let rep = sys.residual_report(&u, &h);
        assert!((rep.energy - rep.work).abs() <= 1e-8 * rep.energy, "{shape:?}: {rep:?}");
        assert!(rep.max_slip < 1e-10);
        for r in &basis.fields {
            assert!(sys.asm.l2_inner(r, &u).abs() < 1e-12);
        }
        let (u2, _) = sys.solve_sym_poisson(&h, &basis).unwrap();
        let diff = VectorFieldFE {
            values: u.values.iter().zip(&u2.values).map(|(a, b)| [a[0] - b[0], a[1] - b[1], a[2] - b[2]]).collect(),
        };
        assert!(sys.asm.h1_sq(&diff).sqrt() <= 1e-10 * sys.asm.h1_sq(&u).sqrt());
    }
}

#[test]
fn poincare_ratio_is_stable_under_refinement() {
    for shape in [Shape::Spheroid { a: 1.0, c: 1.5 }, Shape::Ellipsoid { a: 1.0, b: 1.3, c: 1.7 }] {
        let ratios: Vec<f64> = systems(shape, 0..=2).iter().map(|s| s.poincare_ratio().unwrap()).collect();
        for r in &ratios {
            assert!(*r <= 2.0 * ratios[2], "{shape:?}: {ratios:?}");
        }
    }
}

#[test]
fn traction_residual_decreases_on_the_ball() {
    let mut last = f64::INFINITY;
    for sys in systems(Shape::Ball, 0..=2) {
        let basis = sys.rigid_basis();
        let h = sys.compatibility_project(&VectorFieldFE::from_fn(&sys.mesh, smooth_h), &basis);
        let (u, _) = sys.solve_sym_poisson(&h, &basis).unwrap();
        let t = sys.residual_report(&u, &h).traction_residual;
        assert!(t < last, "traction residual {t} after {last}");
        last = t;
    }
}

#[test]
fn neumann_solution_approaches_manufactured_potential() {
    let r2 = |x: [f64; 3]| x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let mut errs = Vec::new();
    for sys in systems(Shape::Ball, 0..=2) {
        let h = ScalarFieldFE::from_fn(&sys.mesh, |x| 12.0 - 20.0 * r2(x));
        let (phi, _) = sys.solve_neumann_poisson(&h).unwrap();
        let exact = ScalarFieldFE::from_fn(&sys.mesh, |x| r2(x) * r2(x) - 2.0 * r2(x));
        let m = sys.mean(&exact);
        let d: Vec<f64> = phi.values.iter().zip(&exact.values).map(|(a, b)| a - (b - m)).collect();
        let mut kd = vec![0.0; d.len()];
        sys.asm.stiff.matvec(&d, &mut kd);
        errs.push(d.iter().zip(&kd).map(|(a, b)| a * b).sum::<f64>().sqrt());
    }
    assert!(errs[0] > errs[1] && errs[1] > errs[2], "{errs:?}");
    assert!((errs[1] / errs[2]).log2() >= 0.8, "{errs:?}");
}

#[test]
fn transfer_between_levels_preserves_linear_fields() {
    let c: Mesh = gen_mesh(Shape::Ball, 1).unwrap();
    let f: Mesh = gen_mesh(Shape::Ball, 2).unwrap();
    let vals: Vec<[f64; 3]> = c.vertices.iter().map(|x| [x[0], 2.0 * x[1] - x[2], 1.0]).collect();
    let out = transfer(&c, &vals, &f).unwrap();
    for (x, o) in f.vertices.iter().zip(&out) {
        assert!((o[0] - x[0]).abs() < 1e-12 && (o[1] - 2.0 * x[1] + x[2]).abs() < 1e-12 && (o[2] - 1.0).abs() < 1e-12);
    }
}
