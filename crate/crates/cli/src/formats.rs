//! Input file formats. All files are JSON; rationals are strings `"p/q"` or
//! `"p"` (bare JSON integers are accepted too). Basis indices are 1-based.
//!
//! Algebra (`dim` is optional and checked against `degrees`):
//! `{"dim": 3, "degrees": [-1,-1,-2], "brackets": [{"i": 1, "j": 2, "terms": [{"k": 3, "c": "1"}]}]}`
//!
//! Gram matrix: `{"gram": [["1","0"],["0","2"]]}`
//!
//! Finite complex (`reference` is optional; one list of column vectors per degree):
//! `{"lowest_degree": 0, "dims": [1,1], "grams": [[["1"]],[["1"]]],
//!   "differentials": [[["3"]]], "k": [1], "reference": [[],[]]}`
//!
//! Generators: `{"generators": ["(1,0,0,0,0)", "0,1,0,0,0", …]}`

use std::fmt;

use graded_torsion::graded_lie::BracketSpec;
use graded_torsion::linalg::QMatrix;
use graded_torsion::rational::{format_rational, parse_rational, Q};
use serde::de::{self, Deserializer, Visitor};
use serde::Deserialize;

/// A rational read from a string or integer.
#[derive(Debug, Clone, PartialEq)]
pub struct Rat(pub Q);

impl<'de> Deserialize<'de> for Rat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = Rat;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a rational such as \"3/4\"")
            }
            fn visit_str<E: de::Error>(self, s: &str) -> Result<Rat, E> {
                parse_rational(s).map(Rat).map_err(E::custom)
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rat, E> {
                Ok(Rat(Q::from_integer(v.into())))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rat, E> {
                Ok(Rat(Q::from_integer(v.into())))
            }
        }
        d.deserialize_any(V)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub k: usize,
    pub c: Rat,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<Term>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    #[serde(default)]
    pub dim: Option<usize>,
    pub degrees: Vec<i32>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GramFile {
    pub gram: Vec<Vec<Rat>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComplexFile {
    #[serde(default)]
    pub lowest_degree: i32,
    pub dims: Vec<usize>,
    pub grams: Vec<Vec<Vec<Rat>>>,
    pub differentials: Vec<Vec<Vec<Rat>>>,
    pub k: Vec<u64>,
    #[serde(default)]
    pub reference: Option<Vec<Vec<Vec<Rat>>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorsFile {
    pub generators: Vec<String>,
}

/// A structural problem in a parsed file, reported like a parse error.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapeError(pub String);

fn matrix(rows: usize, cols: usize, data: &[Vec<Rat>], what: &str) -> Result<QMatrix, ShapeError> {
    if data.len() != rows || data.iter().any(|r| r.len() != cols) {
        return Err(ShapeError(format!("{what} must be {rows}x{cols}")));
    }
    let mut m = QMatrix::zeros(rows, cols);
    for (i, row) in data.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            m[(i, j)] = x.0.clone();
        }
    }
    Ok(m)
}

impl AlgebraFile {
    pub fn to_specs(&self) -> Result<Vec<BracketSpec>, ShapeError> {
        let m = self.degrees.len();
        if let Some(dim) = self.dim {
            if dim != m {
                return Err(ShapeError(format!("dim is {dim} but {m} degrees are listed")));
            }
        }
        let check = |x: usize| {
            if x == 0 || x > m {
                Err(ShapeError(format!("basis index {x} outside 1..={m}")))
            } else {
                Ok(x - 1)
            }
        };
        self.brackets
            .iter()
            .map(|b| {
                let terms = b.terms.iter().map(|t| Ok((check(t.k)?, t.c.0.clone()))).collect::<Result<_, ShapeError>>()?;
                Ok(BracketSpec::new(check(b.i)?, check(b.j)?, terms))
            })
            .collect()
    }
}

impl GramFile {
    pub fn to_matrix(&self) -> Result<QMatrix, ShapeError> {
        let n = self.gram.len();
        matrix(n, n, &self.gram, "gram")
    }
}

/// Validated pieces of a complex file.
pub struct ComplexData {
    pub lowest_degree: i32,
    pub grams: Vec<QMatrix>,
    pub differentials: Vec<QMatrix>,
    pub k: Vec<u64>,
    pub reference: Option<Vec<QMatrix>>,
}

impl ComplexFile {
    pub fn to_data(&self) -> Result<ComplexData, ShapeError> {
        // The empty complex is a single zero-dimensional degree.
        let dims = if self.dims.is_empty() { vec![0] } else { self.dims.clone() };
        let mut file_grams = self.grams.clone();
        if self.dims.is_empty() && file_grams.is_empty() {
            file_grams.push(Vec::new());
        }
        if file_grams.len() != dims.len() {
            return Err(ShapeError(format!("expected {} Gram matrices, found {}", dims.len(), file_grams.len())));
        }
        if self.differentials.len() + 1 != dims.len() {
            return Err(ShapeError(format!("expected {} differentials, found {}", dims.len() - 1, self.differentials.len())));
        }
        let grams = file_grams
            .iter()
            .enumerate()
            .map(|(i, g)| matrix(dims[i], dims[i], g, &format!("grams[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let differentials = self
            .differentials
            .iter()
            .enumerate()
            .map(|(i, d)| {
                // A map out of or into a zero space may be written as [].
                if d.is_empty() && (dims[i] == 0 || dims[i + 1] == 0) {
                    Ok(QMatrix::zeros(dims[i + 1], dims[i]))
                } else {
                    matrix(dims[i + 1], dims[i], d, &format!("differentials[{i}]"))
                }
            })
            .collect::<Result<Vec<_>, _>>()?;
        let reference = match &self.reference {
            None => None,
            Some(r) => {
                if r.len() != dims.len() {
                    return Err(ShapeError(format!("expected reference bases in {} degrees", dims.len())));
                }
                let mut out = Vec::with_capacity(dims.len());
                for (i, cols) in r.iter().enumerate() {
                    if cols.iter().any(|c| c.len() != dims[i]) {
                        return Err(ShapeError(format!("reference[{i}] vectors must have length {}", dims[i])));
                    }
                    let cols: Vec<Vec<Q>> = cols.iter().map(|c| c.iter().map(|x| x.0.clone()).collect()).collect();
                    out.push(QMatrix::from_columns(dims[i], &cols));
                }
                Some(out)
            }
        };
        Ok(ComplexData { lowest_degree: self.lowest_degree, grams, differentials, k: self.k.clone(), reference })
    }
}

pub fn matrix_strings(m: &QMatrix) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| format_rational(&m[(i, j)])).collect()).collect()
}
