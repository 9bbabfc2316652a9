use super::decimal::coordinate;
use super::lex::{self, Lines};
use super::{add_count, check_formula, formula_line, lattice_lines, ParseError, SemanticError};
use crate::{Crystal, Site};

/// One line per atom, in input order.
pub fn encode_coords(crystal: &Crystal) -> String {
    let formula: Vec<_> = crystal.element_counts();
    let mut out = format!("{}\n", formula_line(&formula));
    out.push_str(&lattice_lines(&crystal.lattice));
    out.push_str(&format!("Sites ({})\n", crystal.len()));
    for s in &crystal.sites {
        let [x, y, z] = s.frac.map(coordinate);
        out.push_str(&format!("{} {x} {y} {z}\n", s.element.symbol()));
    }
    out
}

pub fn parse_coords(text: &str) -> Result<Crystal, ParseError> {
    let mut lines = Lines::new(text);
    let formula = lex::formula(&mut lines)?;
    let lattice = lex::lattice(&mut lines)?;
    let declared = lex::site_total(&mut lines)?;
    let mut sites = Vec::new();
    for line in lines.remaining() {
        let line = line?;
        if line.tokens.len() != 4 {
            return Err(line.error(format!("atom line needs 4 fields, found {}", line.tokens.len())));
        }
        let element = lex::element(&line, line.tokens[0])?;
        let frac = lex::coordinates(&line, &line.tokens[1..])?;
        sites.push(Site::new(element, frac));
    }
    lattice.validate().map_err(SemanticError::from)?;
    if sites.len() != declared {
        return Err(SemanticError::SiteCountMismatch { declared, actual: sites.len() }.into());
    }
    let mut totals = Vec::new();
    for s in &sites {
        add_count(&mut totals, s.element, 1);
    }
    check_formula(&formula, &totals)?;
    Ok(Crystal::new(lattice, sites).map_err(SemanticError::from)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::decimal::{round_coordinate, round_to};
    use crate::codec::ErrorKind;
    use crate::{Element, LatticeParams};
    use proptest::prelude::*;

    const NACL: &str = "Na1Cl1\nabc: 5.64 5.64 5.64\nangles: 90.00 90.00 90.00\nSites (2)\nNa 0.000 0.000 0.000\nCl 0.500 0.500 0.500\n";

    #[test]
    fn parses_a_block() {
        let c = parse_coords(NACL).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(encode_coords(&c), NACL);
    }

    #[test]
    fn malformed_angle_line_is_lexical() {
        let e = parse_coords(&NACL.replace("angles: 90.00 90.00 90.00", "angles: 90.00 90.00")).unwrap_err();
        assert_eq!(e, ParseError::Lexical { line: 3, message: "'angles:' takes 3 values, found 2".into() });
        let e = parse_coords(&NACL.replace("angles:", "angels:")).unwrap_err();
        assert_eq!(e.kind(), ErrorKind::Lexical);
    }

    #[test]
    fn counts_are_checked() {
        let e = parse_coords(&NACL.replace("Sites (2)", "Sites (3)")).unwrap_err();
        assert!(matches!(e, ParseError::Semantic(SemanticError::SiteCountMismatch { declared: 3, actual: 2 })));
        let e = parse_coords(&NACL.replace("Na1Cl1", "Na2Cl1")).unwrap_err();
        assert!(matches!(e, ParseError::Semantic(SemanticError::FormulaMismatch { .. })));
        let e = parse_coords(&NACL.replace("Na1Cl1", "Na1")).unwrap_err();
        assert!(matches!(e, ParseError::Semantic(SemanticError::FormulaMismatch { formula: 0, .. })));
    }

    fn crystal_strategy() -> impl Strategy<Value = Crystal> {
        let lattice = (1.0f64..20.0, 1.0f64..20.0, 1.0f64..20.0, 70.0f64..110.0, 70.0f64..110.0, 70.0f64..110.0);
        let site = (1u8..=94, -1.0f64..2.0, -1.0f64..2.0, -1.0f64..2.0);
        (lattice, prop::collection::vec(site, 1..12)).prop_map(|((a, b, c, al, be, ga), sites)| {
            let sites = sites
                .into_iter()
                .map(|(z, x, y, w)| Site::new(Element::from_number(z).unwrap(), [x, y, w]))
                .collect();
            Crystal::new(LatticeParams::new(a, b, c, al, be, ga), sites).unwrap()
        })
    }

    proptest! {
        #[test]
        fn round_trip_after_rounding(c in crystal_strategy()) {
            let parsed = parse_coords(&encode_coords(&c)).unwrap();
            let l = c.lattice;
            let want = LatticeParams::new(
                round_to(l.a, 2), round_to(l.b, 2), round_to(l.c, 2),
                round_to(l.alpha, 2), round_to(l.beta, 2), round_to(l.gamma, 2),
            );
            prop_assert_eq!(parsed.lattice, want);
            prop_assert_eq!(parsed.len(), c.len());
            for (p, s) in parsed.sites.iter().zip(&c.sites) {
                prop_assert_eq!(p.element, s.element);
                prop_assert_eq!(p.frac, s.frac.map(round_coordinate));
            }
            prop_assert_eq!(encode_coords(&parsed), encode_coords(&c));
        }
    }
}
