use focalnet::jet::{Jet4, N_COEFFS};
use focalnet::sdl::{parse_surface, BinOp, Domain, Expr, Func, SurfaceDef};
use focalnet::{compile, frame_point, proposition_report, Orientation, ToleranceSet};
use proptest::prelude::*;

fn jet() -> impl Strategy<Value = Jet4> {
    prop::array::uniform15(-2.0f64..2.0).prop_map(|c| Jet4::from_taylor(c, 4))
}

fn close(a: &Jet4, b: &Jet4, rel: f64) -> bool {
    let (a, b) = (a.taylor_coeffs(), b.taylor_coeffs());
    let scale = a.iter().chain(b).fold(1.0f64, |m, x| m.max(x.abs()));
    (0..N_COEFFS).all(|s| (a[s] - b[s]).abs() <= rel * scale)
}

fn expr() -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (0u32..4000).prop_map(|n| Expr::Num(n as f64 / 8.0)),
        prop::sample::select(vec!["u", "v", "a", "pi"]).prop_map(|s| Expr::Var(s.to_string())),
    ];
    leaf.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
            (
                prop::sample::select(vec![BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow]),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(op, l, r)| Expr::Bin(op, Box::new(l), Box::new(r))),
            (prop::sample::select(Func::ALL.to_vec()), inner).prop_map(|(f, e)| Expr::Call(f, Box::new(e))),
        ]
    })
}

proptest! {
    #[test]
    fn product_rule(f in jet(), g in jet()) {
        let lhs = (f * g).partial_u();
        let rhs = f.partial_u() * g + f * g.partial_u();
        prop_assert!(close(&lhs, &rhs.truncate(3), 1e-13));
    }

    #[test]
    fn multiplication_commutes_and_associates(f in jet(), g in jet(), h in jet()) {
        prop_assert!(close(&(f * g), &(g * f), 1e-15));
        prop_assert!(close(&((f * g) * h), &(f * (g * h)), 1e-13));
    }

    #[test]
    fn exp_inverts_ln(mut c in prop::array::uniform15(-0.5f64..0.5), base in 0.5f64..3.0) {
        c[0] = base;
        let f = Jet4::from_taylor(c, 4);
        let back = f.ln().unwrap().exp().unwrap();
        prop_assert!(close(&back, &f, 1e-12));
    }

    #[test]
    fn printed_surface_reparses(x in expr(), y in expr(), z in expr(), a in -5.0f64..5.0) {
        let def = SurfaceDef {
            name: "random".to_string(),
            params: vec![("a".to_string(), a)],
            domain: Domain::new((-1.0, 1.0), (-0.5, 2.0)).unwrap(),
            exprs: [x, y, z],
        };
        let back = parse_surface(&def.to_string()).unwrap();
        prop_assert_eq!(back, def);
    }

    #[test]
    fn residuals_ignore_orientation(u in -0.9f64..0.9, v in -0.9f64..0.9) {
        let prog = compile(&focalnet::gallery("graph_generic").unwrap(), &Default::default()).unwrap();
        let tol = ToleranceSet::default();
        let a = frame_point(&prog, u, v, &tol);
        let b = focalnet::frames::frame_point_oriented(&prog, u, v, &tol, Orientation::Reversed);
        if let (Ok(a), Ok(b)) = (a, b) {
            if let (Ok(ra), Ok(rb)) = (proposition_report(&a, &tol), proposition_report(&b, &tol)) {
                prop_assert!((ra.w_defect.abs() - rb.w_defect.abs()).abs() <= 1e-12 * (1.0 + ra.w_defect.abs()));
                for (k, p) in &ra.prop_residuals {
                    let q = &rb.prop_residuals[k];
                    prop_assert!((p.residual - q.residual).abs() <= 1e-9, "{}: {} vs {}", k, p.residual, q.residual);
                }
            }
        }
    }
}
