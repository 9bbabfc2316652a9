use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::element::Element;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CrystalError {
    #[error("lattice length {0} must be positive and finite")]
    BadLength(f64),
    #[error("lattice angle {0} must lie strictly between 0 and 180 degrees")]
    BadAngle(f64),
    #[error("lattice parameters describe a degenerate cell")]
    Degenerate,
    #[error("site {0} has a non-finite coordinate")]
    BadCoordinate(usize),
}

/// Cell lengths in Å and angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LatticeParams {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Self {
        LatticeParams { a, b, c, alpha, beta, gamma }
    }

    pub fn cubic(a: f64) -> Self {
        Self::new(a, a, a, 90.0, 90.0, 90.0)
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    /// Metric tensor `G_ij = a_i · a_j`.
    pub fn metric(&self) -> [[f64; 3]; 3] {
        let l = self.lengths();
        let cos = self.angles().map(|t| t.to_radians().cos());
        // cos[0] = angle(b, c), cos[1] = angle(a, c), cos[2] = angle(a, b)
        [
            [l[0] * l[0], l[0] * l[1] * cos[2], l[0] * l[2] * cos[1]],
            [l[0] * l[1] * cos[2], l[1] * l[1], l[1] * l[2] * cos[0]],
            [l[0] * l[2] * cos[1], l[1] * l[2] * cos[0], l[2] * l[2]],
        ]
    }

    pub fn volume(&self) -> f64 {
        let [ca, cb, cg] = self.angles().map(|t| t.to_radians().cos());
        let s = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
        self.a * self.b * self.c * s.max(0.0).sqrt()
    }

    pub fn validate(&self) -> Result<(), CrystalError> {
        for l in self.lengths() {
            if !(l.is_finite() && l > 0.0) {
                return Err(CrystalError::BadLength(l));
            }
        }
        for t in self.angles() {
            if !(t.is_finite() && t > 0.0 && t < 180.0) {
                return Err(CrystalError::BadAngle(t));
            }
        }
        let [ca, cb, cg] = self.angles().map(|t| t.to_radians().cos());
        if 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg <= 1e-10 {
            return Err(CrystalError::Degenerate);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Site {
    pub element: Element,
    pub frac: [f64; 3],
}

impl Site {
    pub fn new(element: Element, frac: [f64; 3]) -> Self {
        Site { element, frac }
    }
}

/// Lattice parameters plus an ordered list of atoms in fractional
/// coordinates. Construction wraps every coordinate into `[0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCrystal")]
pub struct Crystal {
    pub lattice: LatticeParams,
    pub sites: Vec<Site>,
}

#[derive(Deserialize)]
struct RawCrystal {
    lattice: LatticeParams,
    sites: Vec<Site>,
}

impl TryFrom<RawCrystal> for Crystal {
    type Error = CrystalError;

    fn try_from(raw: RawCrystal) -> Result<Self, Self::Error> {
        Crystal::new(raw.lattice, raw.sites)
    }
}

pub(crate) fn wrap01(x: f64) -> f64 {
    let w = x - x.floor();
    // x - floor(x) can round up to exactly 1.0 for tiny negative x
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

impl Crystal {
    pub fn new(lattice: LatticeParams, sites: Vec<Site>) -> Result<Self, CrystalError> {
        lattice.validate()?;
        let mut sites = sites;
        for (i, s) in sites.iter_mut().enumerate() {
            if s.frac.iter().any(|x| !x.is_finite()) {
                return Err(CrystalError::BadCoordinate(i));
            }
            s.frac = s.frac.map(wrap01);
        }
        Ok(Crystal { lattice, sites })
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    /// Element counts in order of first appearance.
    pub fn element_counts(&self) -> Vec<(Element, usize)> {
        let mut out: Vec<(Element, usize)> = Vec::new();
        for s in &self.sites {
            match out.iter_mut().find(|(e, _)| *e == s.element) {
                Some((_, n)) => *n += 1,
                None => out.push((s.element, 1)),
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wraps_coordinates() {
        let cu = Element::from_symbol("Cu").unwrap();
        let c = Crystal::new(LatticeParams::cubic(4.0), vec![Site::new(cu, [1.25, -0.25, -1e-18])]).unwrap();
        assert_eq!(c.sites[0].frac, [0.25, 0.75, 0.0]);
    }

    #[test]
    fn rejects_bad_lattices() {
        assert!(matches!(LatticeParams::new(0.0, 1.0, 1.0, 90.0, 90.0, 90.0).validate(), Err(CrystalError::BadLength(_))));
        assert!(matches!(LatticeParams::new(1.0, 1.0, 1.0, 180.0, 90.0, 90.0).validate(), Err(CrystalError::BadAngle(_))));
        assert!(matches!(LatticeParams::new(1.0, 1.0, 1.0, 120.0, 120.0, 120.0).validate(), Err(CrystalError::Degenerate)));
    }

    #[test]
    fn volume_of_hexagonal_cell() {
        let p = LatticeParams::new(2.0, 2.0, 3.0, 90.0, 90.0, 120.0);
        assert!((p.volume() - 4.0 * 3.0 * (3.0f64).sqrt() / 2.0).abs() < 1e-12);
    }
}
