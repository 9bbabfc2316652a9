//! Space-group database: symmetry operations and Wyckoff positions of the
//! 230 groups in their conventional settings.
//!
//! Text layout, one block per group:
//!
//! ```text
//! SG <number> <hm_symbol> <crystal_system> <n_ops>
//! <n_ops coordinate triplets, centering translations expanded>
//! WYCKOFF <n>
//! <multiplicity><letter> <triplet>;<triplet>;...
//! ```
//!
//! Wyckoff site expressions list one representative per centering coset;
//! the first expression is the representative used for labels.

use std::collections::HashMap;
use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::sync::OnceLock;

use num_traits::Zero;
use thiserror::Error;

use super::solve::ExprSolver;
use super::triplet::{frac_mod1, parse_triplet, to_f64, AffineMap, Q};

const STANDARD_DB: &str = include_str!("../../data/spacegroups.txt");

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DbError {
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("space group {number}: {message}")]
    Inconsistent { number: u16, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LookupError {
    #[error("unknown space-group symbol `{0}`")]
    UnknownSymbol(String),
    #[error("unknown space-group number {0}")]
    UnknownNumber(i64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum CrystalSystem {
    Triclinic,
    Monoclinic,
    Orthorhombic,
    Tetragonal,
    Trigonal,
    Hexagonal,
    Cubic,
}

impl CrystalSystem {
    pub fn as_str(self) -> &'static str {
        match self {
            CrystalSystem::Triclinic => "triclinic",
            CrystalSystem::Monoclinic => "monoclinic",
            CrystalSystem::Orthorhombic => "orthorhombic",
            CrystalSystem::Tetragonal => "tetragonal",
            CrystalSystem::Trigonal => "trigonal",
            CrystalSystem::Hexagonal => "hexagonal",
            CrystalSystem::Cubic => "cubic",
        }
    }
}

impl fmt::Display for CrystalSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CrystalSystem {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        Ok(match s {
            "triclinic" => CrystalSystem::Triclinic,
            "monoclinic" => CrystalSystem::Monoclinic,
            "orthorhombic" => CrystalSystem::Orthorhombic,
            "tetragonal" => CrystalSystem::Tetragonal,
            "trigonal" => CrystalSystem::Trigonal,
            "hexagonal" => CrystalSystem::Hexagonal,
            "cubic" => CrystalSystem::Cubic,
            _ => return Err(()),
        })
    }
}

pub type IntMatrix = [[i32; 3]; 3];

/// A space-group operation `p -> R p + t` with integer `R` and `t` in `[0, 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetryOp {
    rotation: IntMatrix,
    translation: [Q; 3],
    translation_f64: [f64; 3],
}

impl SymmetryOp {
    pub fn new(rotation: IntMatrix, translation: [Q; 3]) -> Self {
        let translation = translation.map(frac_mod1);
        SymmetryOp { rotation, translation, translation_f64: translation.map(to_f64) }
    }

    pub fn from_affine(map: &AffineMap) -> Option<Self> {
        let rotation = map.integer_matrix()?;
        matches!(det_i(&rotation), 1 | -1).then(|| SymmetryOp::new(rotation, map.offset))
    }

    pub fn identity() -> Self {
        SymmetryOp::new([[1, 0, 0], [0, 1, 0], [0, 0, 1]], [Q::zero(); 3])
    }

    pub fn rotation(&self) -> &IntMatrix {
        &self.rotation
    }

    pub fn translation(&self) -> &[Q; 3] {
        &self.translation
    }

    pub fn translation_f64(&self) -> [f64; 3] {
        self.translation_f64
    }

    pub fn determinant(&self) -> i32 {
        det_i(&self.rotation)
    }

    pub fn is_pure_translation(&self) -> bool {
        self.rotation == IDENTITY
    }

    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let mut out = self.translation_f64;
        for (i, o) in out.iter_mut().enumerate() {
            for (j, pj) in p.iter().enumerate() {
                *o += self.rotation[i][j] as f64 * pj;
            }
        }
        out
    }

    /// `self ∘ other`, translation reduced mod 1.
    pub fn compose(&self, other: &SymmetryOp) -> SymmetryOp {
        let rotation = mul_i(&self.rotation, &other.rotation);
        let mut t = self.translation;
        for (i, ti) in t.iter_mut().enumerate() {
            for j in 0..3 {
                *ti += Q::from_integer(self.rotation[i][j] as i64) * other.translation[j];
            }
        }
        SymmetryOp::new(rotation, t)
    }

    pub fn to_affine(&self) -> AffineMap {
        AffineMap {
            matrix: self.rotation.map(|r| r.map(|v| Q::from_integer(v as i64))),
            offset: self.translation,
        }
    }
}

impl fmt::Display for SymmetryOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.to_affine().fmt(f)
    }
}

pub(crate) const IDENTITY: IntMatrix = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

pub(crate) fn det_i(m: &IntMatrix) -> i32 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

pub(crate) fn mul_i(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let mut out = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

/// One Wyckoff position of a space group.
#[derive(Debug, Clone)]
pub struct WyckoffPosition {
    pub letter: char,
    pub multiplicity: usize,
    /// One expression per centering coset; the first is the representative.
    pub site_exprs: Vec<AffineMap>,
    pub free_variable_count: usize,
    pub(crate) solver: ExprSolver,
}

impl WyckoffPosition {
    pub fn label(&self) -> String {
        format!("{}{}", self.multiplicity, self.letter)
    }

    pub fn representative(&self) -> &AffineMap {
        &self.site_exprs[0]
    }

    /// Solve the representative expression for `point` (mod 1). Returns the
    /// point projected onto the expression when a solution lies within
    /// `tol` (max-norm, fractional).
    pub fn solve(&self, point: [f64; 3], tol: f64) -> Option<[f64; 3]> {
        self.solver.solve(self.representative(), point, tol)
    }
}

#[derive(Debug, Clone)]
pub struct SpaceGroup {
    pub number: u16,
    pub symbol: String,
    pub crystal_system: CrystalSystem,
    pub ops: Vec<SymmetryOp>,
    /// Ordered by decreasing multiplicity, then letter.
    pub wyckoff_positions: Vec<WyckoffPosition>,
    pub(crate) rotation_ids: Vec<usize>,
}

impl SpaceGroup {
    pub fn order(&self) -> usize {
        self.ops.len()
    }

    /// Number of lattice points in the conventional cell.
    pub fn centering_multiplicity(&self) -> usize {
        self.ops.iter().filter(|o| o.is_pure_translation()).count()
    }

    pub fn wyckoff(&self, multiplicity: usize, letter: char) -> Option<&WyckoffPosition> {
        self.wyckoff_positions.iter().find(|w| w.multiplicity == multiplicity && w.letter == letter)
    }

    pub fn wyckoff_by_letter(&self, letter: char) -> Option<&WyckoffPosition> {
        self.wyckoff_positions.iter().find(|w| w.letter == letter)
    }

    pub fn general_position(&self) -> &WyckoffPosition {
        &self.wyckoff_positions[0]
    }
}

#[derive(Debug, Clone)]
pub struct SpaceGroupDb {
    groups: Vec<SpaceGroup>,
    /// Distinct rotation matrices over all groups.
    pub(crate) rotations: Vec<IntMatrix>,
    /// Group indices sorted by decreasing order, then decreasing number.
    pub(crate) detection_order: Vec<usize>,
    by_symbol: HashMap<String, usize>,
}

impl SpaceGroupDb {
    /// The database shipped with the crate, parsed once.
    pub fn standard() -> &'static SpaceGroupDb {
        static DB: OnceLock<SpaceGroupDb> = OnceLock::new();
        DB.get_or_init(|| SpaceGroupDb::parse(STANDARD_DB).expect("bundled space-group data is valid"))
    }

    pub fn parse(text: &str) -> Result<Self, DbError> {
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l)).peekable();
        let mut groups = Vec::new();
        let mut rotations: Vec<IntMatrix> = Vec::new();
        while let Some((ln, line)) = lines.next() {
            if line.trim().is_empty() {
                continue;
            }
            let fmt_err = |line: usize, message: String| DbError::Format { line, message };
            let head: Vec<&str> = line.split_whitespace().collect();
            if head.len() != 5 || head[0] != "SG" {
                return Err(fmt_err(ln, format!("expected `SG <number> <symbol> <system> <n_ops>`, found `{line}`")));
            }
            let number: u16 = head[1].parse().map_err(|_| fmt_err(ln, "bad group number".into()))?;
            let symbol = head[2].to_string();
            let crystal_system: CrystalSystem =
                head[3].parse().map_err(|_| fmt_err(ln, format!("unknown crystal system `{}`", head[3])))?;
            let n_ops: usize = head[4].parse().map_err(|_| fmt_err(ln, "bad op count".into()))?;
            let mut ops = Vec::with_capacity(n_ops);
            for _ in 0..n_ops {
                let (ln, line) = lines.next().ok_or_else(|| fmt_err(ln, "truncated op list".into()))?;
                let map = parse_triplet(line).map_err(|e| fmt_err(ln, e.to_string()))?;
                let op = SymmetryOp::from_affine(&map)
                    .ok_or_else(|| fmt_err(ln, "operation is not an integer rotation with det ±1".into()))?;
                ops.push(op);
            }
            let (wln, wline) = lines.next().ok_or_else(|| fmt_err(ln, "missing WYCKOFF header".into()))?;
            let n_wyckoff: usize = wline
                .strip_prefix("WYCKOFF ")
                .and_then(|s| s.trim().parse().ok())
                .ok_or_else(|| fmt_err(wln, format!("expected `WYCKOFF <n>`, found `{wline}`")))?;
            let mut wyckoff_positions = Vec::with_capacity(n_wyckoff);
            for _ in 0..n_wyckoff {
                let (ln, line) = lines.next().ok_or_else(|| fmt_err(wln, "truncated Wyckoff list".into()))?;
                wyckoff_positions.push(parse_wyckoff_line(line).map_err(|m| fmt_err(ln, m))?);
            }
            let rotation_ids = ops
                .iter()
                .map(|op| match rotations.iter().position(|r| r == op.rotation()) {
                    Some(i) => i,
                    None => {
                        rotations.push(*op.rotation());
                        rotations.len() - 1
                    }
                })
                .collect();
            let group = SpaceGroup { number, symbol, crystal_system, ops, wyckoff_positions, rotation_ids };
            check_group(&group)?;
            groups.push(group);
        }
        let mut detection_order: Vec<usize> = (0..groups.len()).collect();
        detection_order.sort_by(|&a, &b| {
            let (ga, gb) = (&groups[a], &groups[b]);
            gb.order().cmp(&ga.order()).then(gb.number.cmp(&ga.number))
        });
        let mut by_symbol = HashMap::new();
        for (i, g) in groups.iter().enumerate() {
            if by_symbol.insert(g.symbol.clone(), i).is_some() {
                return Err(DbError::Inconsistent { number: g.number, message: format!("duplicate symbol {}", g.symbol) });
            }
        }
        Ok(SpaceGroupDb { groups, rotations, detection_order, by_symbol })
    }

    /// Serialize back to the text layout; `parse(to_text())` reproduces the
    /// database and the shipped file byte-for-byte.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for g in &self.groups {
            let _ = writeln!(out, "SG {} {} {} {}", g.number, g.symbol, g.crystal_system, g.ops.len());
            for op in &g.ops {
                let _ = writeln!(out, "{op}");
            }
            let _ = writeln!(out, "WYCKOFF {}", g.wyckoff_positions.len());
            for w in &g.wyckoff_positions {
                let exprs: Vec<String> = w.site_exprs.iter().map(|e| e.to_string()).collect();
                let _ = writeln!(out, "{} {}", w.label(), exprs.join(";"));
            }
        }
        out
    }

    pub fn groups(&self) -> &[SpaceGroup] {
        &self.groups
    }

    pub fn get(&self, number: u16) -> Option<&SpaceGroup> {
        self.groups.iter().find(|g| g.number == number)
    }

    pub fn group(&self, number: i64) -> Result<&SpaceGroup, LookupError> {
        u16::try_from(number).ok().and_then(|n| self.get(n)).ok_or(LookupError::UnknownNumber(number))
    }

    pub fn by_symbol(&self, symbol: &str) -> Option<&SpaceGroup> {
        self.by_symbol.get(symbol).map(|&i| &self.groups[i])
    }

    pub fn symbol_to_number(&self, symbol: &str) -> Result<u16, LookupError> {
        self.by_symbol(symbol).map(|g| g.number).ok_or_else(|| LookupError::UnknownSymbol(symbol.to_string()))
    }

    pub fn number_to_symbol(&self, number: i64) -> Result<&str, LookupError> {
        self.group(number).map(|g| g.symbol.as_str())
    }
}

/// Symbol lookup against the shipped table.
pub fn symbol_to_number(symbol: &str) -> Result<u16, LookupError> {
    SpaceGroupDb::standard().symbol_to_number(symbol)
}

pub fn number_to_symbol(number: i64) -> Result<&'static str, LookupError> {
    SpaceGroupDb::standard().number_to_symbol(number)
}

fn parse_wyckoff_line(line: &str) -> Result<WyckoffPosition, String> {
    let (label, exprs) = line.split_once(' ').ok_or("expected `<label> <triplets>`")?;
    let letter = label.chars().last().filter(|c| c.is_ascii_alphabetic()).ok_or("missing Wyckoff letter")?;
    let multiplicity: usize = label[..label.len() - 1].parse().map_err(|_| format!("bad multiplicity in `{label}`"))?;
    let site_exprs = exprs
        .split(';')
        .map(|t| parse_triplet(t).map_err(|e| e.to_string()))
        .collect::<Result<Vec<_>, _>>()?;
    let rep = &site_exprs[0];
    let solver = ExprSolver::new(rep);
    Ok(WyckoffPosition { letter, multiplicity, free_variable_count: rep.rank(), site_exprs, solver })
}

fn check_group(g: &SpaceGroup) -> Result<(), DbError> {
    let bad = |message: String| DbError::Inconsistent { number: g.number, message };
    if !(1..=230).contains(&g.number) {
        return Err(bad("number out of range".into()));
    }
    if !g.ops.iter().any(|o| o.rotation == IDENTITY && o.translation.iter().all(|t| t.is_zero())) {
        return Err(bad("identity operation missing".into()));
    }
    let Some(general) = g.wyckoff_positions.first() else {
        return Err(bad("no Wyckoff positions".into()));
    };
    if general.multiplicity != g.ops.len() {
        return Err(bad(format!("general multiplicity {} != {} ops", general.multiplicity, g.ops.len())));
    }
    let centering = g.centering_multiplicity();
    for (i, w) in g.wyckoff_positions.iter().enumerate() {
        if w.site_exprs.len() * centering != w.multiplicity {
            return Err(bad(format!("{}: {} expressions for {} centering cosets", w.label(), w.site_exprs.len(), centering)));
        }
        if g.wyckoff_positions[..i].iter().any(|o| o.letter == w.letter) {
            return Err(bad(format!("duplicate letter {}", w.letter)));
        }
    }
    Ok(())
}
