//! Periodic table shipped with the crate: symbols, standard atomic weights
//! (3 decimals, conventional values where IUPAC gives an interval), default
//! valences for the organic subset, and exact masses for common isotopes.

use serde::{Deserialize, Serialize};

/// A chemical element, stored as its atomic number.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Element(u8);

/// (symbol, standard atomic weight in Da), indexed by atomic number - 1.
const TABLE: [(&str, f64); 118] = [
    ("H", 1.008),
    ("He", 4.003),
    ("Li", 6.940),
    ("Be", 9.012),
    ("B", 10.810),
    ("C", 12.011),
    ("N", 14.007),
    ("O", 15.999),
    ("F", 18.998),
    ("Ne", 20.180),
    ("Na", 22.990),
    ("Mg", 24.305),
    ("Al", 26.982),
    ("Si", 28.085),
    ("P", 30.974),
    ("S", 32.060),
    ("Cl", 35.450),
    ("Ar", 39.950),
    ("K", 39.098),
    ("Ca", 40.078),
    ("Sc", 44.956),
    ("Ti", 47.867),
    ("V", 50.942),
    ("Cr", 51.996),
    ("Mn", 54.938),
    ("Fe", 55.845),
    ("Co", 58.933),
    ("Ni", 58.693),
    ("Cu", 63.546),
    ("Zn", 65.380),
    ("Ga", 69.723),
    ("Ge", 72.630),
    ("As", 74.922),
    ("Se", 78.971),
    ("Br", 79.904),
    ("Kr", 83.798),
    ("Rb", 85.468),
    ("Sr", 87.620),
    ("Y", 88.906),
    ("Zr", 91.224),
    ("Nb", 92.906),
    ("Mo", 95.950),
    ("Tc", 97.907),
    ("Ru", 101.070),
    ("Rh", 102.906),
    ("Pd", 106.420),
    ("Ag", 107.868),
    ("Cd", 112.414),
    ("In", 114.818),
    ("Sn", 118.710),
    ("Sb", 121.760),
    ("Te", 127.600),
    ("I", 126.904),
    ("Xe", 131.293),
    ("Cs", 132.905),
    ("Ba", 137.327),
    ("La", 138.905),
    ("Ce", 140.116),
    ("Pr", 140.908),
    ("Nd", 144.242),
    ("Pm", 144.913),
    ("Sm", 150.360),
    ("Eu", 151.964),
    ("Gd", 157.250),
    ("Tb", 158.925),
    ("Dy", 162.500),
    ("Ho", 164.930),
    ("Er", 167.259),
    ("Tm", 168.934),
    ("Yb", 173.045),
    ("Lu", 174.967),
    ("Hf", 178.486),
    ("Ta", 180.948),
    ("W", 183.840),
    ("Re", 186.207),
    ("Os", 190.230),
    ("Ir", 192.217),
    ("Pt", 195.084),
    ("Au", 196.967),
    ("Hg", 200.592),
    ("Tl", 204.380),
    ("Pb", 207.200),
    ("Bi", 208.980),
    ("Po", 208.982),
    ("At", 209.987),
    ("Rn", 222.018),
    ("Fr", 223.020),
    ("Ra", 226.025),
    ("Ac", 227.028),
    ("Th", 232.038),
    ("Pa", 231.036),
    ("U", 238.029),
    ("Np", 237.048),
    ("Pu", 244.064),
    ("Am", 243.061),
    ("Cm", 247.070),
    ("Bk", 247.070),
    ("Cf", 251.080),
    ("Es", 252.083),
    ("Fm", 257.095),
    ("Md", 258.098),
    ("No", 259.101),
    ("Lr", 262.110),
    ("Rf", 267.122),
    ("Db", 268.126),
    ("Sg", 271.134),
    ("Bh", 270.133),
    ("Hs", 269.134),
    ("Mt", 278.156),
    ("Ds", 281.165),
    ("Rg", 282.169),
    ("Cn", 285.177),
    ("Nh", 286.183),
    ("Fl", 289.190),
    ("Mc", 290.196),
    ("Lv", 293.204),
    ("Ts", 294.211),
    ("Og", 294.214),
];

/// Exact masses for isotopes that show up in practice; anything else falls
/// back to the mass number.
const ISOTOPE_MASSES: [(u8, u16, f64); 24] = [
    (1, 1, 1.008),
    (1, 2, 2.014),
    (1, 3, 3.016),
    (5, 10, 10.013),
    (5, 11, 11.009),
    (6, 12, 12.000),
    (6, 13, 13.003),
    (6, 14, 14.003),
    (7, 14, 14.003),
    (7, 15, 15.000),
    (8, 16, 15.995),
    (8, 17, 16.999),
    (8, 18, 17.999),
    (9, 19, 18.998),
    (15, 31, 30.974),
    (16, 32, 31.972),
    (16, 33, 32.971),
    (16, 34, 33.968),
    (16, 36, 35.967),
    (17, 35, 34.969),
    (17, 37, 36.966),
    (35, 79, 78.918),
    (35, 81, 80.916),
    (53, 127, 126.904),
];

impl Element {
    pub const H: Element = Element(1);
    pub const B: Element = Element(5);
    pub const C: Element = Element(6);
    pub const N: Element = Element(7);
    pub const O: Element = Element(8);
    pub const F: Element = Element(9);
    pub const P: Element = Element(15);
    pub const S: Element = Element(16);
    pub const CL: Element = Element(17);
    pub const BR: Element = Element(35);
    pub const I: Element = Element(53);

    /// Case-sensitive symbol lookup over the full shipped table.
    pub fn from_symbol(symbol: &str) -> Option<Element> {
        TABLE
            .iter()
            .position(|(s, _)| *s == symbol)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn symbol(self) -> &'static str {
        TABLE[self.0 as usize - 1].0
    }

    pub fn atomic_number(self) -> u8 {
        self.0
    }

    pub fn standard_weight(self) -> f64 {
        TABLE[self.0 as usize - 1].1
    }

    /// Mass used for an explicit isotope label; exact where the shipped table
    /// knows the nuclide, mass number otherwise.
    pub fn isotope_mass(self, mass_number: u16) -> f64 {
        ISOTOPE_MASSES
            .iter()
            .find(|(z, a, _)| *z == self.0 && *a == mass_number)
            .map(|(_, _, m)| *m)
            .unwrap_or(mass_number as f64)
    }

    /// Default valence for implicit-hydrogen filling. Only the organic
    /// subset has one; bracket-only elements never receive implicit H.
    pub fn default_valence(self) -> u32 {
        match self {
            Element::B => 3,
            Element::C => 4,
            Element::N => 3,
            Element::O => 2,
            Element::P => 3,
            Element::S => 2,
            Element::F | Element::CL | Element::BR | Element::I => 1,
            _ => 0,
        }
    }

    /// Elements writable without brackets.
    pub fn in_organic_subset(self) -> bool {
        matches!(
            self,
            Element::B
                | Element::C
                | Element::N
                | Element::O
                | Element::P
                | Element::S
                | Element::F
                | Element::CL
                | Element::BR
                | Element::I
        )
    }

    pub fn is_halogen(self) -> bool {
        matches!(self, Element::F | Element::CL | Element::BR | Element::I)
    }
}
