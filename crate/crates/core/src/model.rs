//! Vertex identifiers, attribute schemas and per-vertex value records.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// External vertex identifier, as read from the input file.
pub type VertexId = u64;

/// Sentinel for "unreachable / undefined" integer attributes (2^31 - 1).
pub const INT_MAX: i64 = i32::MAX as i64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchemaError {
    #[error("schema must declare at least one attribute")]
    Empty,
    #[error("duplicate attribute name `{0}`")]
    DuplicateName(String),
    #[error("attribute position {pos} out of range 1..={len}")]
    OutOfRange { pos: usize, len: usize },
    #[error("attribute at position {pos} is {expected}, got {found}")]
    KindMismatch {
        pos: usize,
        expected: AttrKind,
        found: AttrKind,
    },
    #[error("values have different shapes ({0} vs {1} slots)")]
    ShapeMismatch(usize, usize),
    #[error("schema has {0} attributes; positions must fit in one byte")]
    TooWide(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AttrKind {
    Int64,
    Float64,
    Bool,
}

impl fmt::Display for AttrKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AttrKind::Int64 => "int64",
            AttrKind::Float64 => "float64",
            AttrKind::Bool => "bool",
        })
    }
}

/// A single attribute slot.
#[derive(Debug, Clone, Copy)]
pub enum AttrValue {
    Int(i64),
    Float(f64),
    Bool(bool),
}

impl AttrValue {
    pub fn kind(&self) -> AttrKind {
        match self {
            AttrValue::Int(_) => AttrKind::Int64,
            AttrValue::Float(_) => AttrKind::Float64,
            AttrValue::Bool(_) => AttrKind::Bool,
        }
    }

    pub fn zero(kind: AttrKind) -> AttrValue {
        match kind {
            AttrKind::Int64 => AttrValue::Int(0),
            AttrKind::Float64 => AttrValue::Float(0.0),
            AttrKind::Bool => AttrValue::Bool(false),
        }
    }

    /// Fixed 8-byte little-endian encoding used on the wire.
    pub fn to_bits(&self) -> u64 {
        match *self {
            AttrValue::Int(x) => x as u64,
            AttrValue::Float(x) => x.to_bits(),
            AttrValue::Bool(b) => b as u64,
        }
    }

    pub fn from_bits(kind: AttrKind, bits: u64) -> AttrValue {
        match kind {
            AttrKind::Int64 => AttrValue::Int(bits as i64),
            AttrKind::Float64 => AttrValue::Float(f64::from_bits(bits)),
            AttrKind::Bool => AttrValue::Bool(bits != 0),
        }
    }
}

// Floats compare bit-exactly: change detection must not depend on a tolerance.
impl PartialEq for AttrValue {
    fn eq(&self, other: &Self) -> bool {
        self.kind() == other.kind() && self.to_bits() == other.to_bits()
    }
}

impl Eq for AttrValue {}

impl fmt::Display for AttrValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttrValue::Int(x) => write!(f, "{x}"),
            AttrValue::Float(x) => write!(f, "{x:e}"),
            AttrValue::Bool(b) => write!(f, "{}", *b as u8),
        }
    }
}

/// 1-based attribute position.
pub type AttrPos = usize;

/// Ordered attribute declarations, addressed by 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct AttributeSchema {
    attrs: Vec<(String, AttrKind)>,
    by_name: HashMap<String, AttrPos>,
}

impl AttributeSchema {
    pub fn new<S: Into<String>>(
        specs: impl IntoIterator<Item = (S, AttrKind)>,
    ) -> Result<Self, SchemaError> {
        let mut attrs = Vec::new();
        let mut by_name = HashMap::new();
        for (name, kind) in specs {
            let name = name.into();
            if by_name.insert(name.clone(), attrs.len() + 1).is_some() {
                return Err(SchemaError::DuplicateName(name));
            }
            attrs.push((name, kind));
        }
        if attrs.is_empty() {
            return Err(SchemaError::Empty);
        }
        if attrs.len() > u8::MAX as usize {
            return Err(SchemaError::TooWide(attrs.len()));
        }
        Ok(AttributeSchema { attrs, by_name })
    }

    pub fn len(&self) -> usize {
        self.attrs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attrs.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<AttrPos> {
        self.by_name.get(name).copied()
    }

    pub fn name(&self, pos: AttrPos) -> Result<&str, SchemaError> {
        self.check(pos).map(|_| self.attrs[pos - 1].0.as_str())
    }

    pub fn kind(&self, pos: AttrPos) -> Result<AttrKind, SchemaError> {
        self.check(pos).map(|_| self.attrs[pos - 1].1)
    }

    pub fn kinds(&self) -> impl Iterator<Item = AttrKind> + '_ {
        self.attrs.iter().map(|(_, k)| *k)
    }

    pub fn all_positions(&self) -> Vec<AttrPos> {
        (1..=self.len()).collect()
    }

    pub fn check(&self, pos: AttrPos) -> Result<(), SchemaError> {
        if pos == 0 || pos > self.len() {
            Err(SchemaError::OutOfRange {
                pos,
                len: self.len(),
            })
        } else {
            Ok(())
        }
    }

    /// A value with every slot zeroed according to its kind.
    pub fn default_value(&self) -> VertexValue {
        VertexValue {
            slots: self.kinds().map(AttrValue::zero).collect(),
        }
    }

    pub fn value(&self, slots: Vec<AttrValue>) -> Result<VertexValue, SchemaError> {
        if slots.len() != self.len() {
            return Err(SchemaError::ShapeMismatch(self.len(), slots.len()));
        }
        for (i, (slot, kind)) in slots.iter().zip(self.kinds()).enumerate() {
            if slot.kind() != kind {
                return Err(SchemaError::KindMismatch {
                    pos: i + 1,
                    expected: kind,
                    found: slot.kind(),
                });
            }
        }
        Ok(VertexValue { slots })
    }
}

/// Per-vertex record, one slot per schema attribute.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexValue {
    slots: Vec<AttrValue>,
}

impl VertexValue {
    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[AttrValue] {
        &self.slots
    }

    pub fn get(&self, pos: AttrPos) -> Result<AttrValue, SchemaError> {
        if pos == 0 || pos > self.slots.len() {
            return Err(SchemaError::OutOfRange {
                pos,
                len: self.slots.len(),
            });
        }
        Ok(self.slots[pos - 1])
    }

    /// Overwrites a slot; the new value must keep the slot's kind.
    pub fn set(&mut self, pos: AttrPos, value: AttrValue) -> Result<(), SchemaError> {
        let cur = self.get(pos)?;
        if cur.kind() != value.kind() {
            return Err(SchemaError::KindMismatch {
                pos,
                expected: cur.kind(),
                found: value.kind(),
            });
        }
        self.slots[pos - 1] = value;
        Ok(())
    }

    pub fn int(&self, pos: AttrPos) -> Result<i64, SchemaError> {
        match self.get(pos)? {
            AttrValue::Int(x) => Ok(x),
            other => Err(SchemaError::KindMismatch {
                pos,
                expected: AttrKind::Int64,
                found: other.kind(),
            }),
        }
    }

    pub fn float(&self, pos: AttrPos) -> Result<f64, SchemaError> {
        match self.get(pos)? {
            AttrValue::Float(x) => Ok(x),
            other => Err(SchemaError::KindMismatch {
                pos,
                expected: AttrKind::Float64,
                found: other.kind(),
            }),
        }
    }

    pub fn boolean(&self, pos: AttrPos) -> Result<bool, SchemaError> {
        match self.get(pos)? {
            AttrValue::Bool(x) => Ok(x),
            other => Err(SchemaError::KindMismatch {
                pos,
                expected: AttrKind::Bool,
                found: other.kind(),
            }),
        }
    }

    pub fn set_int(&mut self, pos: AttrPos, x: i64) -> Result<(), SchemaError> {
        self.set(pos, AttrValue::Int(x))
    }

    pub fn set_float(&mut self, pos: AttrPos, x: f64) -> Result<(), SchemaError> {
        self.set(pos, AttrValue::Float(x))
    }

    pub fn set_bool(&mut self, pos: AttrPos, x: bool) -> Result<(), SchemaError> {
        self.set(pos, AttrValue::Bool(x))
    }
}

/// Compares two values on the listed positions only. Floats are bit-exact.
pub fn value_equal(
    a: &VertexValue,
    b: &VertexValue,
    positions: &[AttrPos],
) -> Result<bool, SchemaError> {
    if a.len() != b.len() {
        return Err(SchemaError::ShapeMismatch(a.len(), b.len()));
    }
    for (i, (x, y)) in a.slots.iter().zip(&b.slots).enumerate() {
        if x.kind() != y.kind() {
            return Err(SchemaError::KindMismatch {
                pos: i + 1,
                expected: x.kind(),
                found: y.kind(),
            });
        }
    }
    let mut equal = true;
    for &pos in positions {
        equal &= a.get(pos)? == b.get(pos)?;
    }
    Ok(equal)
}

/// Logical description of an ingested graph.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphMeta {
    pub n: u64,
    pub m: u64,
    pub directed: bool,
    pub schema: Option<AttributeSchema>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn int_schema(names: &[&str]) -> AttributeSchema {
        AttributeSchema::new(names.iter().map(|n| (*n, AttrKind::Int64))).unwrap()
    }

    #[test]
    fn single_attribute_schema() {
        let s = AttributeSchema::new([("dis", AttrKind::Int64)]).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.position("dis"), Some(1));
    }

    #[test]
    fn color_schema_positions() {
        let s = int_schema(&["deg", "color"]);
        assert_eq!(s.position("color"), Some(2));
        assert_eq!(s.name(2).unwrap(), "color");
    }

    #[test]
    fn schema_errors() {
        assert_eq!(
            AttributeSchema::new([("x", AttrKind::Int64), ("x", AttrKind::Int64)]),
            Err(SchemaError::DuplicateName("x".into()))
        );
        let none: Vec<(&str, AttrKind)> = vec![];
        assert_eq!(AttributeSchema::new(none), Err(SchemaError::Empty));
    }

    #[test]
    fn get_reads_and_bounds() {
        let s = int_schema(&["a", "b"]);
        let v = s
            .value(vec![AttrValue::Int(5), AttrValue::Int(-1)])
            .unwrap();
        assert_eq!(v.get(2).unwrap(), AttrValue::Int(-1));
        assert!(matches!(v.get(3), Err(SchemaError::OutOfRange { .. })));
        assert!(v.get(0).is_err());
        let z = int_schema(&["a"]).default_value();
        assert_eq!(z.get(1).unwrap(), AttrValue::Int(0));
    }

    #[test]
    fn equality_on_positions() {
        let s = int_schema(&["a", "b"]);
        let a = s.value(vec![AttrValue::Int(3), AttrValue::Int(7)]).unwrap();
        let b = s.value(vec![AttrValue::Int(3), AttrValue::Int(9)]).unwrap();
        assert!(value_equal(&a, &b, &[1]).unwrap());
        assert!(!value_equal(&a, &b, &[1, 2]).unwrap());
        let one = int_schema(&["a"]).value(vec![AttrValue::Int(3)]).unwrap();
        assert!(value_equal(&one, &one, &[1]).unwrap());
        assert!(value_equal(&a, &one, &[1]).is_err());
    }

    #[test]
    fn set_keeps_kind() {
        let mut v = int_schema(&["a"]).default_value();
        assert!(v.set(1, AttrValue::Float(1.0)).is_err());
        v.set_int(1, 4).unwrap();
        assert_eq!(v.int(1).unwrap(), 4);
    }

    #[test]
    fn float_equality_is_bitwise() {
        assert_ne!(AttrValue::Float(0.0), AttrValue::Float(-0.0));
        assert_eq!(AttrValue::Float(f64::NAN), AttrValue::Float(f64::NAN));
    }

    fn arb_value() -> impl Strategy<Value = AttrValue> {
        prop_oneof![
            any::<i64>().prop_map(AttrValue::Int),
            any::<f64>().prop_map(AttrValue::Float),
            any::<bool>().prop_map(AttrValue::Bool),
        ]
    }

    proptest! {
        #[test]
        fn reflexive_and_pure(slots in proptest::collection::vec(arb_value(), 1..8)) {
            let v = VertexValue { slots };
            let all: Vec<_> = (1..=v.len()).collect();
            prop_assert!(value_equal(&v, &v, &all).unwrap());
            for p in 1..=v.len() {
                prop_assert_eq!(v.get(p).unwrap(), v.get(p).unwrap());
                let bits = v.get(p).unwrap().to_bits();
                prop_assert_eq!(AttrValue::from_bits(v.get(p).unwrap().kind(), bits), v.get(p).unwrap());
            }
        }

        #[test]
        fn name_position_bijection(n in 1usize..20) {
            let names: Vec<String> = (0..n).map(|i| format!("a{i}")).collect();
            let s = AttributeSchema::new(names.iter().map(|x| (x.clone(), AttrKind::Int64))).unwrap();
            for (i, name) in names.iter().enumerate() {
                prop_assert_eq!(s.position(name), Some(i + 1));
                prop_assert_eq!(s.name(i + 1).unwrap(), name.as_str());
            }
        }
    }
}
