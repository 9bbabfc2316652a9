#![allow(dead_code)]

use rand::Rng;
use wyckit::symcore::{expand_orbit, CrystalSystem, SpaceGroup, SpaceGroupDb};
use wyckit::{Crystal, Element, LatticeParams, Site};

pub const HO_AL_NI: &str = "Ho4Al4Ni4
Spacegroup: Pnma
abc: 6.91 4.32 7.44
angles: 90.00 90.00 90.00
Sites (12)
Ho 0.005 0.250 0.195 4c
Al 0.190 0.250 0.590 4c
Ni 0.789 0.250 0.591 4c
";

/// As printed, with a doubled space after the single-letter symbols.
pub const MN_O_F: &str = "Mn8O12F4
Spacegroup: C2/c
abc: 9.55 4.98 6.95
angles: 90.00 96.49 90.00
Sites (24)
Mn 0.826 0.495 0.074 8f
O  0.832 0.906 0.599 8f
O  0.000 0.489 0.250 4e
F  0.000 0.000 0.000 4a
";

pub const TI_NI_SN: &str = "Ti4Ni4Sn4
Spacegroup: F-43m
abc: 5.89 5.89 5.89
angles: 90.00 90.00 90.00
Sites (12)
Ti 0.500 0.500 0.500 4b
Ni 0.750 0.750 0.750 4d
Sn 0.000 0.000 0.000 4a
";

pub const UNCONDITIONAL_PROMPT: &str = "Below is a description of a bulk material. Generate a description of the lengths and angles of the lattice vectors and then the element type and coordinates for each atom within the lattice:";

pub fn el(symbol: &str) -> Element {
    Element::from_symbol(symbol).unwrap()
}

pub fn group(n: u16) -> &'static SpaceGroup {
    SpaceGroupDb::standard().get(n).unwrap()
}

/// Lattice parameters compatible with the group's metric, at two decimals.
pub fn lattice_for(group: &SpaceGroup, rng: &mut impl Rng) -> LatticeParams {
    let mut len = || (rng.random_range(400..900) as f64) / 100.0;
    let (a, b, c) = (len(), len(), len());
    let mut ang = || (rng.random_range(7500..8700) as f64) / 100.0;
    match group.crystal_system {
        CrystalSystem::Triclinic => LatticeParams::new(a, b, c, ang(), ang() + 20.0, ang() + 10.0),
        CrystalSystem::Monoclinic => LatticeParams::new(a, b, c, 90.0, ang() + 20.0, 90.0),
        CrystalSystem::Orthorhombic => LatticeParams::new(a, b, c, 90.0, 90.0, 90.0),
        CrystalSystem::Tetragonal => LatticeParams::new(a, a, c, 90.0, 90.0, 90.0),
        CrystalSystem::Trigonal | CrystalSystem::Hexagonal => LatticeParams::new(a, a, c, 90.0, 90.0, 120.0),
        CrystalSystem::Cubic => LatticeParams::cubic(a),
    }
}

/// A point away from every special value, at three decimals.
pub fn generic_point(rng: &mut impl Rng) -> [f64; 3] {
    [
        rng.random_range(70..90) as f64 / 1000.0,
        rng.random_range(170..190) as f64 / 1000.0,
        rng.random_range(370..390) as f64 / 1000.0,
    ]
}

pub fn expanded(group_number: u16, lattice: LatticeParams, sites: &[(&str, [f64; 3])]) -> Crystal {
    let g = group(group_number);
    let mut atoms = Vec::new();
    for (symbol, p) in sites {
        atoms.extend(expand_orbit(g, *p).into_iter().map(|q| Site::new(el(symbol), q)));
    }
    Crystal::new(lattice, atoms).unwrap()
}
