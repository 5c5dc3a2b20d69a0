use super::{Field, FieldMatrix, C64};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Wire form of a matrix: `{"field", "nrows", "ncols", "re", "im"}` with
/// `im` omitted for real matrices.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub field: Field,
    pub nrows: usize,
    pub ncols: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<&FieldMatrix> for MatrixJson {
    fn from(m: &FieldMatrix) -> Self {
        let rows = |f: fn(&C64) -> f64| -> Vec<Vec<f64>> {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m.get(i, j))).collect()).collect()
        };
        MatrixJson {
            field: m.field(),
            nrows: m.nrows(),
            ncols: m.ncols(),
            re: rows(|z| z.re),
            im: (m.field() == Field::Complex).then(|| rows(|z| z.im)),
        }
    }
}

impl TryFrom<MatrixJson> for FieldMatrix {
    type Error = Error;

    fn try_from(j: MatrixJson) -> Result<FieldMatrix> {
        let shape_ok = |rows: &Vec<Vec<f64>>| rows.len() == j.nrows && rows.iter().all(|r| r.len() == j.ncols);
        if !shape_ok(&j.re) {
            return Err(Error::Parse(format!("\"re\" is not {}x{}", j.nrows, j.ncols)));
        }
        match (j.field, &j.im) {
            (Field::Real, Some(_)) => Err(Error::Parse("real matrix carries an \"im\" part".into())),
            (Field::Real, None) => {
                let flat: Vec<f64> = j.re.iter().flatten().copied().collect();
                FieldMatrix::from_real(j.nrows, j.ncols, &flat)
            }
            (Field::Complex, im) => {
                let zero;
                let im = match im {
                    Some(im) => {
                        if !shape_ok(im) {
                            return Err(Error::Parse(format!("\"im\" is not {}x{}", j.nrows, j.ncols)));
                        }
                        im
                    }
                    None => {
                        zero = vec![vec![0.0; j.ncols]; j.nrows];
                        &zero
                    }
                };
                let flat = j
                    .re
                    .iter()
                    .flatten()
                    .zip(im.iter().flatten())
                    .map(|(&a, &b)| C64::new(a, b))
                    .collect();
                FieldMatrix::from_complex(j.nrows, j.ncols, flat)
            }
        }
    }
}

impl Serialize for FieldMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        MatrixJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for FieldMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let j = MatrixJson::deserialize(d)?;
        FieldMatrix::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn real_round_trip_omits_im() {
        let m = FieldMatrix::from_real(2, 2, &[1.0, 2.0, 3.0, 4.0]).unwrap();
        let s = serde_json::to_string(&m).unwrap();
        assert!(!s.contains("\"im\""));
        let back: FieldMatrix = serde_json::from_str(&s).unwrap();
        assert_eq!(back.data(), m.data());
    }

    #[test]
    fn complex_round_trip() {
        let m = FieldMatrix::from_complex(1, 2, vec![C64::new(1.0, -2.0), C64::new(0.5, 3.0)]).unwrap();
        let back: FieldMatrix = serde_json::from_str(&serde_json::to_string(&m).unwrap()).unwrap();
        assert_eq!(back.data(), m.data());
        assert_eq!(back.field(), Field::Complex);
    }

    #[test]
    fn ragged_rows_are_rejected() {
        let s = r#"{"field":"real","nrows":2,"ncols":2,"re":[[1,2],[3]]}"#;
        assert!(serde_json::from_str::<FieldMatrix>(s).is_err());
    }
}
