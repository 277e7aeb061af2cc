//! Text rendering of jet polynomials.
//!
//! Terms are printed highest derivative first, which is how the hierarchy
//! members are conventionally written, and the ordering is deterministic so
//! renderings are diff-stable.

use num_rational::BigRational;
use num_traits::{One, Signed};

use crate::poly::{display_cmp, JetPolynomial, Monomial, VarId};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Style {
    /// `x1, x2, ...` with `*` and `^`: `x3 + 4*k*x1^2*x2 + k^2*x1^5`.
    Indexed,
    /// Phase-space names for jet order <= 4: `x, v, a, w`.
    Phase,
    /// LaTeX with subscripts: `x_{3} + 4 k x_{1}^{2} x_{2} + k^{2} x_{1}^{5}`.
    Latex,
}

fn var_name(v: VarId, style: Style) -> String {
    match (style, v) {
        (Style::Indexed, _) => v.to_string(),
        (Style::Phase, VarId::X(1)) => "x".into(),
        (Style::Phase, VarId::X(2)) => "v".into(),
        (Style::Phase, VarId::X(3)) => "a".into(),
        (Style::Phase, VarId::X(4)) => "w".into(),
        (Style::Phase, _) => v.to_string(),
        (Style::Latex, VarId::X(i)) => format!("x_{{{i}}}"),
        (Style::Latex, _) => v.to_string(),
    }
}

fn render_monomial(m: &Monomial, style: Style) -> String {
    let sep = match style {
        Style::Latex => " ",
        _ => "*",
    };
    m.exponents()
        .iter()
        .map(|(v, e)| {
            let name = var_name(*v, style);
            match (style, e) {
                (_, 1) => name,
                (Style::Latex, e) => format!("{name}^{{{e}}}"),
                (_, e) => format!("{name}^{e}"),
            }
        })
        .collect::<Vec<_>>()
        .join(sep)
}

fn render_coeff(c: &BigRational, style: Style) -> String {
    if style == Style::Latex && !c.is_integer() {
        format!("\\frac{{{}}}{{{}}}", c.numer(), c.denom())
    } else {
        c.to_string()
    }
}

/// Renders a polynomial in the given style. Jet coordinates beyond `x4` fall
/// back to indexed names in the phase style.
pub fn render(p: &JetPolynomial, style: Style) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut terms: Vec<&(Monomial, BigRational)> = p.terms().iter().collect();
    terms.sort_by(|a, b| display_cmp(&a.0, &b.0));

    let mut out = String::new();
    for (i, (m, c)) in terms.iter().enumerate() {
        let mag = c.abs();
        let sign = c.is_negative();
        if i == 0 {
            if sign {
                out.push('-');
            }
        } else {
            out.push_str(if sign { " - " } else { " + " });
        }
        if m.is_one() {
            out.push_str(&render_coeff(&mag, style));
        } else if mag.is_one() {
            out.push_str(&render_monomial(m, style));
        } else {
            out.push_str(&render_coeff(&mag, style));
            out.push_str(match style {
                Style::Latex => " ",
                _ => "*",
            });
            out.push_str(&render_monomial(m, style));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::VarId;

    fn abel2() -> JetPolynomial {
        let x = VarId::x;
        let mut p = JetPolynomial::var(x(3));
        p = &p + &JetPolynomial::term(4, 1, &[(VarId::K, 1), (x(1), 2), (x(2), 1)]);
        p = &p + &JetPolynomial::term(1, 1, &[(VarId::K, 2), (x(1), 5)]);
        p
    }

    #[test]
    fn indexed_rendering_is_descending_in_derivatives() {
        assert_eq!(render(&abel2(), Style::Indexed), "x3 + 4*k*x1^2*x2 + k^2*x1^5");
    }

    #[test]
    fn phase_rendering_uses_xvaw() {
        assert_eq!(render(&abel2(), Style::Phase), "a + 4*k*x^2*v + k^2*x^5");
    }

    #[test]
    fn latex_rendering() {
        assert_eq!(
            render(&abel2(), Style::Latex),
            "x_{3} + 4 k x_{1}^{2} x_{2} + k^{2} x_{1}^{5}"
        );
    }

    #[test]
    fn negative_and_fractional_coefficients() {
        let p = &JetPolynomial::term(-1, 2, &[(VarId::T, 1)]) + &JetPolynomial::constant_int(-3);
        assert_eq!(render(&p, Style::Indexed), "-1/2*t - 3");
        assert_eq!(render(&JetPolynomial::zero(), Style::Indexed), "0");
    }
}
