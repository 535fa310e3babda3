//! Built-in test surfaces, stored as `.surf` sources.

use super::{parse_surface, SurfaceDef};

const GALLERY: &[(&str, &str)] = &[
    (
        "plane",
        "surface plane {
  x = u
  y = v
  z = 0
  domain u in [-1, 1] v in [-1, 1]
}
",
    ),
    (
        "sphere",
        "surface sphere {
  param R = 1
  x = R * cos(v) * cos(u)
  y = R * cos(v) * sin(u)
  z = R * sin(v)
  domain u in [-3, 3] v in [-1.4, 1.4]
}
",
    ),
    (
        "graph_quad",
        "surface graph_quad {
  param a = 2
  param b = 1
  x = u
  y = v
  z = a * u ^ 2 / 2 + b * v ^ 2 / 2
  domain u in [-1, 1] v in [-1, 1]
}
",
    ),
    (
        "graph_generic",
        "# deliberately asymmetric: no functional relation between k1 and k2
surface graph_generic {
  x = u
  y = v
  z = sin(u) * cos(v) + u * v ^ 2 / 5
  domain u in [-1, 1] v in [-1, 1]
}
",
    ),
    (
        "monkey_saddle",
        "surface monkey_saddle {
  x = u
  y = v
  z = u ^ 3 - 3 * u * v ^ 2
  domain u in [-1, 1] v in [-1, 1]
}
",
    ),
    (
        "helicoid",
        "surface helicoid {
  param c = 1
  x = v * cos(u)
  y = v * sin(u)
  z = c * u
  domain u in [-3, 3] v in [-2, 2]
}
",
    ),
    (
        "torus",
        "surface torus {
  param R = 2
  param r = 1
  x = (R + r * cos(v)) * cos(u)
  y = (R + r * cos(v)) * sin(u)
  z = r * sin(v)
  domain u in [-3, 3] v in [-3, 3]
}
",
    ),
    (
        "enneper",
        "surface enneper {
  x = u - u ^ 3 / 3 + u * v ^ 2
  y = -v + v ^ 3 / 3 - v * u ^ 2
  z = u ^ 2 - v ^ 2
  domain u in [-1, 1] v in [-1, 1]
}
",
    ),
    (
        "scherk",
        "surface scherk {
  x = u
  y = v
  z = ln(cos(u)) - ln(cos(v))
  domain u in [-1.4, 1.4] v in [-1.4, 1.4]
}
",
    ),
    (
        "dini",
        "# K = -1/(a^2 + b^2); v = 0 and v = pi are poles of ln(tan(v/2)), v = pi/2 is the cusp
surface dini {
  param a = 1
  param b = 0.2
  x = a * cos(u) * sin(v)
  y = a * sin(u) * sin(v)
  z = a * (cos(v) + ln(tan(v / 2))) + b * u
  domain u in [0, 6] v in [0.2, 1.4]
}
",
    ),
];

pub fn gallery_names() -> impl Iterator<Item = &'static str> {
    GALLERY.iter().map(|(n, _)| *n)
}

pub fn gallery_source(name: &str) -> Option<&'static str> {
    GALLERY.iter().find(|(n, _)| *n == name).map(|(_, s)| *s)
}

/// Parsed gallery entry, or `None` for an unknown name.
pub fn gallery(name: &str) -> Option<SurfaceDef> {
    gallery_source(name).map(|src| parse_surface(src).expect("gallery sources parse"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sdl::{compile, Expr};
    use std::collections::BTreeMap;

    #[test]
    fn plane_entry() {
        let p = gallery("plane").unwrap();
        assert_eq!(p.name, "plane");
        assert_eq!(p.exprs[2], Expr::Num(0.0));
    }

    #[test]
    fn unknown_name() {
        assert!(gallery("nope").is_none());
    }

    #[test]
    fn dini_defaults_avoid_poles() {
        let d = gallery("dini").unwrap();
        assert_eq!(d.param("a"), Some(1.0));
        assert_eq!(d.param("b"), Some(0.2));
        assert!(d.domain.v.0 > 0.0 && d.domain.v.1 < std::f64::consts::PI);
        assert!(d.domain.v.1 < std::f64::consts::FRAC_PI_2);
    }

    #[test]
    fn every_entry_roundtrips_and_evaluates() {
        for name in gallery_names() {
            let def = gallery(name).unwrap();
            let again = parse_surface(&def.to_string()).unwrap();
            assert_eq!(def, again, "{name}");
            let prog = compile(&def, &BTreeMap::new()).unwrap();
            let (u, v) = def.domain.midpoint();
            let jets = prog.eval_jets(u, v).unwrap();
            assert!(jets.iter().all(|j| j.is_finite()), "{name}");
        }
    }
}
