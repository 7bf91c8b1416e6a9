use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{CoreError, Result};
use crate::scalar::{lit, to_f64, Scalar};

use super::{ConstraintSpec, Instance};

/// A JSON number, or a string holding an integer or a fraction `"p/q"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WireNumber(pub f64);

impl Serialize for WireNumber {
    fn serialize<Ser: Serializer>(&self, serializer: Ser) -> std::result::Result<Ser::Ok, Ser::Error> {
        serializer.serialize_f64(self.0)
    }
}

impl<'de> Deserialize<'de> for WireNumber {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        struct NumberVisitor;

        impl Visitor<'_> for NumberVisitor {
            type Value = WireNumber;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number or a rational string like \"1/3\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<WireNumber, E> {
                Ok(WireNumber(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<WireNumber, E> {
                Ok(WireNumber(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<WireNumber, E> {
                Ok(WireNumber(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<WireNumber, E> {
                parse_rational(v).map(WireNumber).map_err(E::custom)
            }
        }

        deserializer.deserialize_any(NumberVisitor)
    }
}

/// Parses `"p"`, `"p/q"` or a decimal literal.
pub fn parse_rational(text: &str) -> std::result::Result<f64, String> {
    let text = text.trim();
    let value = match text.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("bad numerator in {text:?}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("bad denominator in {text:?}"))?;
            if q == 0.0 {
                return Err(format!("zero denominator in {text:?}"));
            }
            p / q
        }
        None => text.parse().map_err(|_| format!("not a number: {text:?}"))?,
    };
    if !value.is_finite() {
        return Err(format!("non-finite number {text:?}"));
    }
    Ok(value)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
enum WireConstraint {
    PartitionMatroid {
        groups: Vec<Vec<usize>>,
    },
    UniformMatroid {
        rank: usize,
    },
    GraphicMatroid {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Matching {
        vertices: usize,
        edges: Vec<(usize, usize)>,
    },
    Packing {
        a: Vec<Vec<WireNumber>>,
        b: Vec<WireNumber>,
    },
    PrivateGoods {
        goods: usize,
    },
}

/// On-disk instance layout.
///
/// Private-goods instances list utilities over the expanded element set:
/// element `g * agents + i` assigns good `g` to agent `i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    agents: usize,
    elements: usize,
    utilities: Vec<Vec<WireNumber>>,
    constraint: WireConstraint,
}

fn to_scalars<S: Scalar>(row: &[WireNumber]) -> Vec<S> {
    row.iter().map(|x| lit(x.0)).collect()
}

fn to_wire<S: Scalar>(row: &[S]) -> Vec<WireNumber> {
    row.iter().map(|&x| WireNumber(to_f64(x))).collect()
}

impl InstanceFile {
    pub fn from_instance<S: Scalar>(inst: &Instance<S>) -> Self {
        let constraint = match inst.constraint() {
            ConstraintSpec::PartitionMatroid { groups } => WireConstraint::PartitionMatroid { groups: groups.clone() },
            ConstraintSpec::UniformMatroid { rank } => WireConstraint::UniformMatroid { rank: *rank },
            ConstraintSpec::GraphicMatroid { vertices, edges } => WireConstraint::GraphicMatroid {
                vertices: *vertices,
                edges: edges.clone(),
            },
            ConstraintSpec::Matching { vertices, edges } => WireConstraint::Matching {
                vertices: *vertices,
                edges: edges.clone(),
            },
            ConstraintSpec::Packing { a, b } => WireConstraint::Packing {
                a: a.iter().map(|r| to_wire(r)).collect(),
                b: to_wire(b),
            },
            ConstraintSpec::PrivateGoods { goods } => WireConstraint::PrivateGoods { goods: *goods },
        };
        InstanceFile {
            agents: inst.n_agents(),
            elements: inst.n_elements(),
            utilities: inst.utilities().iter().map(|r| to_wire(r)).collect(),
            constraint,
        }
    }

    pub fn into_instance<S: Scalar>(self) -> Result<Instance<S>> {
        if self.utilities.len() != self.agents {
            return Err(CoreError::Validation(format!(
                "\"agents\" is {} but {} utility rows were given",
                self.agents,
                self.utilities.len()
            )));
        }
        if let Some(row) = self.utilities.iter().find(|r| r.len() != self.elements) {
            return Err(CoreError::Validation(format!(
                "\"elements\" is {} but a utility row has {} entries",
                self.elements,
                row.len()
            )));
        }
        let utilities = self.utilities.iter().map(|r| to_scalars(r)).collect();
        let constraint = match self.constraint {
            WireConstraint::PartitionMatroid { groups } => ConstraintSpec::PartitionMatroid { groups },
            WireConstraint::UniformMatroid { rank } => ConstraintSpec::UniformMatroid { rank },
            WireConstraint::GraphicMatroid { vertices, edges } => ConstraintSpec::GraphicMatroid { vertices, edges },
            WireConstraint::Matching { vertices, edges } => ConstraintSpec::Matching { vertices, edges },
            WireConstraint::Packing { a, b } => ConstraintSpec::Packing {
                a: a.iter().map(|r| to_scalars(r)).collect(),
                b: to_scalars(&b),
            },
            WireConstraint::PrivateGoods { goods } => ConstraintSpec::PrivateGoods { goods },
        };
        Instance::new(utilities, constraint)
    }
}

impl<S: Scalar> Instance<S> {
    /// Parses the JSON instance format.
    pub fn from_json(text: &str) -> Result<Self> {
        let file: InstanceFile =
            serde_json::from_str(text).map_err(|e| CoreError::Validation(format!("instance JSON: {e}")))?;
        file.into_instance()
    }

    /// Compact JSON rendering; byte-stable for equal instances.
    pub fn to_json(&self) -> String {
        serde_json::to_string(&InstanceFile::from_instance(self)).expect("instance serializes")
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&InstanceFile::from_instance(self)).expect("instance serializes")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_strings_parse() {
        let text = r#"{"agents":1,"elements":3,"utilities":[["1/3", 1, "0.5"]],
            "constraint":{"type":"uniform_matroid","rank":2}}"#;
        let inst: Instance = Instance::from_json(text).unwrap();
        assert_eq!(inst.row(0), &[1.0 / 3.0, 1.0, 0.5]);
    }

    #[test]
    fn unknown_type_is_rejected() {
        let text = r#"{"agents":1,"elements":1,"utilities":[[1]],
            "constraint":{"type":"laminar_matroid","rank":1}}"#;
        let err = Instance::<f64>::from_json(text).unwrap_err();
        assert!(matches!(err, CoreError::Validation(_)));
    }

    #[test]
    fn zero_denominator_is_rejected() {
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert_eq!(parse_rational(" 3 / 4 ").unwrap(), 0.75);
    }

    #[test]
    fn round_trip_packing() {
        let inst = Instance::new(
            vec![vec![0.1, 1.0 / 3.0], vec![1.0, 0.0]],
            ConstraintSpec::Packing {
                a: vec![vec![0.7, 1.0 / 7.0]],
                b: vec![1.1],
            },
        )
        .unwrap();
        let back: Instance = Instance::from_json(&inst.to_json()).unwrap();
        assert_eq!(back, inst);
    }

    #[test]
    fn shape_mismatch_is_rejected() {
        let text = r#"{"agents":2,"elements":1,"utilities":[[1]],
            "constraint":{"type":"uniform_matroid","rank":1}}"#;
        assert!(Instance::<f64>::from_json(text).is_err());
    }
}
