//! Field and polynomial corpus files.

use crate::mahler::{LaurentPolynomial, MahlerError, PolynomialJson};
use crate::numfield::{parse_rational, FieldElement, FieldError, IntPolynomial, NumberField};
use crate::subgeom::{GeometryError, SubgroupGeometry};
use num_rational::BigRational;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const FIELDS_JSON: &str = include_str!("../../../corpus/fields.json");
pub const POLYS_JSON: &str = include_str!("../../../corpus/polys.json");

#[derive(Debug, thiserror::Error)]
pub enum CorpusError {
    #[error("malformed corpus: {0}")]
    Parse(String),
    #[error("entry {label}: {source}")]
    Field { label: String, source: FieldError },
    #[error("entry {label}: {source}")]
    Geometry { label: String, source: GeometryError },
    #[error("entry {label}: {source}")]
    Polynomial { label: String, source: MahlerError },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CorpusError>;

/// One field: defining polynomial, unit generators in the power basis, and
/// optional fiber partition of the places over a subfield.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldEntry {
    pub label: String,
    pub min_poly: Vec<i64>,
    /// Rational coordinates, as JSON integers or strings like `"11/2"`.
    pub units: Vec<Vec<Value>>,
    /// The units span a subgroup of finite index in the full unit group.
    #[serde(default)]
    pub full_rank: bool,
    #[serde(default)]
    pub subfield_fibers: Option<Vec<Vec<usize>>>,
    #[serde(default)]
    pub subfield_degree: Option<usize>,
    #[serde(default)]
    pub siegel_p: Option<u32>,
}

impl FieldEntry {
    pub fn field(&self) -> Result<NumberField> {
        let wrap = |source| CorpusError::Field { label: self.label.clone(), source };
        let p = IntPolynomial::from_i64(&self.min_poly).map_err(wrap)?;
        NumberField::new(p).map_err(wrap)
    }

    pub fn units(&self) -> Result<Vec<FieldElement>> {
        self.units
            .iter()
            .map(|coords| {
                let c: Option<Vec<BigRational>> = coords
                    .iter()
                    .map(|v| match v {
                        Value::Number(n) => n.as_i64().map(|x| BigRational::from_integer(x.into())),
                        Value::String(s) => parse_rational(s),
                        _ => None,
                    })
                    .collect();
                c.map(FieldElement::new)
                    .ok_or_else(|| CorpusError::Parse(format!("entry {}: bad unit coordinate in {coords:?}", self.label)))
            })
            .collect()
    }

    /// Subgroup geometry with fiber data: the corpus partition if given,
    /// otherwise the single fiber over `Q` when the units have full rank.
    pub fn geometry(&self, field: &NumberField) -> Result<SubgroupGeometry> {
        let wrap = |source| CorpusError::Geometry { label: self.label.clone(), source };
        let g = SubgroupGeometry::from_units(field, &self.units()?).map_err(wrap)?;
        match (&self.subfield_fibers, self.full_rank) {
            (Some(parts), _) => g.with_fibers(parts, self.subfield_degree).map_err(wrap),
            (None, true) => g.with_fibers(&[(0..field.num_places()).collect()], Some(1)).map_err(wrap),
            (None, false) => Ok(g),
        }
    }
}

pub fn parse_fields(text: &str) -> Result<Vec<FieldEntry>> {
    serde_json::from_str(text).map_err(|e| CorpusError::Parse(e.to_string()))
}

/// Built-in field corpus.
pub fn builtin_fields() -> Vec<FieldEntry> {
    parse_fields(FIELDS_JSON).expect("bundled corpus parses")
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolyEntry {
    pub label: String,
    #[serde(flatten)]
    pub poly: PolynomialJson,
}

impl PolyEntry {
    pub fn polynomial(&self) -> Result<LaurentPolynomial> {
        LaurentPolynomial::from_json(&self.poly).map_err(|source| CorpusError::Polynomial { label: self.label.clone(), source })
    }
}

/// A polynomial file holds either one bare polynomial or a labelled list.
pub fn parse_polys(text: &str) -> Result<Vec<PolyEntry>> {
    if let Ok(list) = serde_json::from_str::<Vec<PolyEntry>>(text) {
        return Ok(list);
    }
    let single: PolynomialJson = serde_json::from_str(text).map_err(|e| CorpusError::Parse(e.to_string()))?;
    Ok(vec![PolyEntry { label: "input".into(), poly: single }])
}

pub fn builtin_polys() -> Vec<PolyEntry> {
    parse_polys(POLYS_JSON).expect("bundled corpus parses")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numfield::LogFlavor;

    #[test]
    fn every_entry_builds_with_independent_units() {
        for e in builtin_fields() {
            let f = e.field().unwrap();
            let units = e.units().unwrap();
            for u in &units {
                let log = f.log_embed(u, LogFlavor::Weighted).unwrap();
                assert!(log.iter().sum::<f64>().abs() < 1e-9, "{}", e.label);
            }
            let g = e.geometry(&f).unwrap();
            if e.full_rank {
                assert_eq!(units.len(), f.unit_rank(), "{}", e.label);
                assert!(g.fibers().is_some());
            }
        }
    }

    #[test]
    fn polynomial_files() {
        let polys = builtin_polys();
        assert!(polys.iter().all(|p| p.polynomial().is_ok()));
        let one = parse_polys(r#"{"vars": 1, "terms": [[[0], -1], [[1], 1]]}"#).unwrap();
        assert_eq!(one.len(), 1);
        assert!(parse_fields("[{\"label\": 3}]").is_err());
    }
}
