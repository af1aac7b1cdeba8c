//! Typed hyperparameter search space: axes, grids, points, and canonical keys.
//!
//! Numeric axis values are stored as exact decimals (mantissa + scale) rather
//! than raw floats so that canonical point keys are bit-stable across runs and
//! platforms; trial seeds and cache keys derive from them.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("unknown axis id `{0}`")]
    UnknownAxis(String),
    #[error("value `{value}` is not a member of axis `{axis}`")]
    NotAMember { axis: String, value: String },
    #[error("axis `{0}` has no values")]
    EmptyAxis(String),
    #[error("axis `{axis}` has duplicate value `{value}`")]
    DuplicateValue { axis: String, value: String },
    #[error("duplicate axis id `{0}`")]
    DuplicateAxis(String),
    #[error("axis `{axis}` requires positive values, got `{value}`")]
    NonPositive { axis: String, value: String },
    #[error("point does not assign axis `{0}`")]
    MissingAssignment(String),
    #[error("point assigns `{0}` which is not a grid axis")]
    ExtraAssignment(String),
    #[error("cannot parse `{0}` as an axis value")]
    Unparseable(String),
}

/// Exact decimal: `mantissa * 10^-scale`, normalized (no trailing zeros).
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub struct Decimal {
    mantissa: i64,
    scale: u32,
}

impl Decimal {
    pub fn new(mantissa: i64, scale: u32) -> Self {
        let mut d = Decimal { mantissa, scale };
        d.normalize();
        d
    }

    fn normalize(&mut self) {
        while self.scale > 0 && self.mantissa % 10 == 0 {
            self.mantissa /= 10;
            self.scale -= 1;
        }
    }

    pub fn to_f64(self) -> f64 {
        self.mantissa as f64 / 10f64.powi(self.scale as i32)
    }

    /// Reconstructs the decimal from the shortest round-trip representation
    /// of `x`. Fails on exponents outside a plain decimal rendering.
    pub fn from_f64(x: f64) -> Result<Self, GridError> {
        let s = format!("{x}");
        s.parse()
    }
}

impl std::str::FromStr for Decimal {
    type Err = GridError;

    fn from_str(s: &str) -> Result<Self, GridError> {
        let err = || GridError::Unparseable(s.to_string());
        let (neg, body) = match s.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        let digits: String = [int_part, frac_part].concat();
        if !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let mantissa: i64 = digits.parse().map_err(|_| err())?;
        Ok(Decimal::new(
            if neg { -mantissa } else { mantissa },
            frac_part.len() as u32,
        ))
    }
}

impl fmt::Display for Decimal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.scale == 0 {
            return write!(f, "{}", self.mantissa);
        }
        let neg = self.mantissa < 0;
        let digits = self.mantissa.unsigned_abs().to_string();
        let scale = self.scale as usize;
        let (int_part, frac_part) = if digits.len() > scale {
            let split = digits.len() - scale;
            (digits[..split].to_string(), digits[split..].to_string())
        } else {
            ("0".to_string(), format!("{:0>width$}", digits, width = scale))
        };
        write!(f, "{}{int_part}.{frac_part}", if neg { "-" } else { "" })
    }
}

/// One admissible value on an axis.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum AxisValue {
    Int(i64),
    Decimal(Decimal),
    Tag(String),
}

impl AxisValue {
    pub fn tag(t: &str) -> Self {
        AxisValue::Tag(t.to_string())
    }

    pub fn as_f64(&self) -> Option<f64> {
        match self {
            AxisValue::Int(i) => Some(*i as f64),
            AxisValue::Decimal(d) => Some(d.to_f64()),
            AxisValue::Tag(_) => None,
        }
    }

    pub fn as_i64(&self) -> Option<i64> {
        match self {
            AxisValue::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_tag(&self) -> Option<&str> {
        match self {
            AxisValue::Tag(t) => Some(t),
            _ => None,
        }
    }

    pub fn is_numeric(&self) -> bool {
        !matches!(self, AxisValue::Tag(_))
    }
}

impl fmt::Display for AxisValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AxisValue::Int(i) => write!(f, "{i}"),
            AxisValue::Decimal(d) => write!(f, "{d}"),
            AxisValue::Tag(t) => write!(f, "{t}"),
        }
    }
}

impl Serialize for AxisValue {
    fn serialize<S: Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        match self {
            AxisValue::Int(i) => ser.serialize_i64(*i),
            AxisValue::Decimal(d) => ser.serialize_f64(d.to_f64()),
            AxisValue::Tag(t) => ser.serialize_str(t),
        }
    }
}

impl<'de> Deserialize<'de> for AxisValue {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let v = serde_json::Value::deserialize(de)?;
        AxisValue::from_json(&v).map_err(D::Error::custom)
    }
}

impl AxisValue {
    pub fn from_json(v: &serde_json::Value) -> Result<Self, GridError> {
        match v {
            serde_json::Value::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(AxisValue::Int(i))
                } else {
                    let f = n.as_f64().ok_or_else(|| GridError::Unparseable(n.to_string()))?;
                    Ok(AxisValue::Decimal(Decimal::from_f64(f)?))
                }
            }
            serde_json::Value::String(s) => Ok(AxisValue::Tag(s.clone())),
            other => Err(GridError::Unparseable(other.to_string())),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AxisKind {
    Numeric,
    Categorical,
}

#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
pub struct ParamAxis {
    pub id: String,
    pub kind: AxisKind,
    pub values: Vec<AxisValue>,
}

impl ParamAxis {
    pub fn numeric(id: &str, values: Vec<AxisValue>) -> Self {
        ParamAxis {
            id: id.to_string(),
            kind: AxisKind::Numeric,
            values,
        }
    }

    pub fn categorical(id: &str, tags: &[&str]) -> Self {
        ParamAxis {
            id: id.to_string(),
            kind: AxisKind::Categorical,
            values: tags.iter().map(|t| AxisValue::tag(t)).collect(),
        }
    }

    fn validate(&self) -> Result<(), GridError> {
        if self.values.is_empty() {
            return Err(GridError::EmptyAxis(self.id.clone()));
        }
        for (i, v) in self.values.iter().enumerate() {
            if self.values[..i].contains(v) {
                return Err(GridError::DuplicateValue {
                    axis: self.id.clone(),
                    value: v.to_string(),
                });
            }
            if self.kind == AxisKind::Numeric {
                match v.as_f64() {
                    Some(x) if x > 0.0 => {}
                    _ => {
                        return Err(GridError::NonPositive {
                            axis: self.id.clone(),
                            value: v.to_string(),
                        })
                    }
                }
            }
        }
        Ok(())
    }

    pub fn contains(&self, value: &AxisValue) -> bool {
        self.values.contains(value)
    }
}

/// Ordered set of axes. Axis order is stable and determines sweep order.
#[derive(Clone, PartialEq, Debug, Serialize, Deserialize)]
#[serde(try_from = "GridRepr", into = "GridRepr")]
pub struct HyperparamGrid {
    axes: Vec<ParamAxis>,
}

#[derive(Serialize, Deserialize)]
struct GridRepr {
    axes: Vec<ParamAxis>,
}

impl From<HyperparamGrid> for GridRepr {
    fn from(g: HyperparamGrid) -> Self {
        GridRepr { axes: g.axes }
    }
}

impl TryFrom<GridRepr> for HyperparamGrid {
    type Error = GridError;
    fn try_from(r: GridRepr) -> Result<Self, GridError> {
        HyperparamGrid::new(r.axes)
    }
}

impl HyperparamGrid {
    pub fn new(axes: Vec<ParamAxis>) -> Result<Self, GridError> {
        for (i, axis) in axes.iter().enumerate() {
            axis.validate()?;
            if axes[..i].iter().any(|a| a.id == axis.id) {
                return Err(GridError::DuplicateAxis(axis.id.clone()));
            }
        }
        Ok(HyperparamGrid { axes })
    }

    pub fn axes(&self) -> &[ParamAxis] {
        &self.axes
    }

    pub fn axis(&self, id: &str) -> Result<&ParamAxis, GridError> {
        self.axes
            .iter()
            .find(|a| a.id == id)
            .ok_or_else(|| GridError::UnknownAxis(id.to_string()))
    }

    /// Product of axis cardinalities; `None` on overflow.
    pub fn cardinality(&self) -> Option<u128> {
        self.axes
            .iter()
            .try_fold(1u128, |acc, a| acc.checked_mul(a.values.len() as u128))
    }

    /// Validates a raw assignment list and returns it in grid axis order.
    pub fn point(&self, assignments: &[(&str, AxisValue)]) -> Result<HyperparamPoint, GridError> {
        let mut values = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            let v = assignments
                .iter()
                .find(|(id, _)| *id == axis.id)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| GridError::MissingAssignment(axis.id.clone()))?;
            if !axis.contains(&v) {
                return Err(GridError::NotAMember {
                    axis: axis.id.clone(),
                    value: v.to_string(),
                });
            }
            values.push(v);
        }
        for (id, _) in assignments {
            if !self.axes.iter().any(|a| &a.id == id) {
                return Err(GridError::ExtraAssignment(id.to_string()));
            }
        }
        Ok(HyperparamPoint {
            values,
            axis_ids: self.axes.iter().map(|a| a.id.clone()).collect(),
        })
    }

    /// Like `point` but tolerates non-negative numeric values off the axis's
    /// value list. The published initial assignment needs this: its neuron
    /// count (32) and iteration count (250) are not members of their swept
    /// axes. Zero is allowed so overrides like `iterations = 0` (untrained
    /// baseline) are expressible. Categorical values must still be members.
    pub fn point_lenient(
        &self,
        assignments: &[(&str, AxisValue)],
    ) -> Result<HyperparamPoint, GridError> {
        let mut values = Vec::with_capacity(self.axes.len());
        for axis in &self.axes {
            let v = assignments
                .iter()
                .find(|(id, _)| *id == axis.id)
                .map(|(_, v)| v.clone())
                .ok_or_else(|| GridError::MissingAssignment(axis.id.clone()))?;
            let ok = match axis.kind {
                AxisKind::Numeric => v.as_f64().is_some_and(|x| x >= 0.0),
                AxisKind::Categorical => axis.contains(&v),
            };
            if !ok {
                return Err(GridError::NotAMember {
                    axis: axis.id.clone(),
                    value: v.to_string(),
                });
            }
            values.push(v);
        }
        for (id, _) in assignments {
            if !self.axes.iter().any(|a| &a.id == id) {
                return Err(GridError::ExtraAssignment(id.to_string()));
            }
        }
        Ok(HyperparamPoint {
            values,
            axis_ids: self.axes.iter().map(|a| a.id.clone()).collect(),
        })
    }

    /// Parses a flat JSON object into a point, snapping numbers onto the
    /// axis's canonical values.
    pub fn parse_point(&self, json: &serde_json::Value) -> Result<HyperparamPoint, GridError> {
        let obj = json
            .as_object()
            .ok_or_else(|| GridError::Unparseable(json.to_string()))?;
        let mut assignments = Vec::new();
        for (k, v) in obj {
            let raw = AxisValue::from_json(v)?;
            let axis = self.axis(k)?;
            // snap 250 vs 250.0 and float re-parses onto the stored value
            let canon = axis
                .values
                .iter()
                .find(|candidate| {
                    **candidate == raw
                        || match (candidate.as_f64(), raw.as_f64()) {
                            (Some(a), Some(b)) => a == b,
                            _ => false,
                        }
                })
                .cloned()
                // off-axis numerics are tolerated, matching `point_lenient`
                .or_else(|| raw.is_numeric().then(|| raw.clone()))
                .ok_or_else(|| GridError::NotAMember {
                    axis: k.clone(),
                    value: raw.to_string(),
                })?;
            assignments.push((k.as_str(), canon));
        }
        self.point_lenient(&assignments)
    }

    /// Lexicographic enumeration of the full Cartesian product.
    pub fn enumerate(&self) -> impl Iterator<Item = HyperparamPoint> + '_ {
        let sizes: Vec<usize> = self.axes.iter().map(|a| a.values.len()).collect();
        let total = self.cardinality().unwrap_or(0) as usize;
        let axis_ids: Vec<String> = self.axes.iter().map(|a| a.id.clone()).collect();
        (0..total).map(move |mut idx| {
            let mut values = vec![AxisValue::Int(0); sizes.len()];
            for i in (0..sizes.len()).rev() {
                values[i] = self.axes[i].values[idx % sizes[i]].clone();
                idx /= sizes[i];
            }
            HyperparamPoint {
                values,
                axis_ids: axis_ids.clone(),
            }
        })
    }
}

/// One value per axis of the owning grid, stored in grid order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct HyperparamPoint {
    axis_ids: Vec<String>,
    values: Vec<AxisValue>,
}

impl HyperparamPoint {
    pub fn get(&self, axis: &str) -> Result<&AxisValue, GridError> {
        self.axis_ids
            .iter()
            .position(|id| id == axis)
            .map(|i| &self.values[i])
            .ok_or_else(|| GridError::UnknownAxis(axis.to_string()))
    }

    pub fn f64(&self, axis: &str) -> Result<f64, GridError> {
        self.get(axis)?.as_f64().ok_or_else(|| GridError::NotAMember {
            axis: axis.to_string(),
            value: "non-numeric".to_string(),
        })
    }

    pub fn usize(&self, axis: &str) -> Result<usize, GridError> {
        self.get(axis)?
            .as_i64()
            .filter(|i| *i >= 0)
            .map(|i| i as usize)
            .ok_or_else(|| GridError::NotAMember {
                axis: axis.to_string(),
                value: "non-integer".to_string(),
            })
    }

    pub fn tag(&self, axis: &str) -> Result<&str, GridError> {
        self.get(axis)?.as_tag().ok_or_else(|| GridError::NotAMember {
            axis: axis.to_string(),
            value: "non-categorical".to_string(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &AxisValue)> {
        self.axis_ids
            .iter()
            .map(String::as_str)
            .zip(self.values.iter())
    }

    /// Flat JSON object, axis ids in grid order.
    pub fn to_json(&self) -> serde_json::Value {
        let mut map = serde_json::Map::new();
        for (id, v) in self.iter() {
            map.insert(id.to_string(), serde_json::to_value(v).unwrap());
        }
        serde_json::Value::Object(map)
    }
}

/// Canonical textual encoding of a point. Two points are equal iff their
/// keys are byte-identical.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct PointKey(String);

impl PointKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn parse(s: &str, grid: &HyperparamGrid) -> Result<HyperparamPoint, GridError> {
        let mut assignments = Vec::new();
        let mut raws = Vec::new();
        for pair in s.split(';') {
            let (id, val) = pair
                .split_once('=')
                .ok_or_else(|| GridError::Unparseable(s.to_string()))?;
            raws.push((id, val));
        }
        for (id, val) in raws {
            let axis = grid.axis(id)?;
            let v = match axis.values.iter().find(|candidate| candidate.to_string() == val) {
                Some(member) => member.clone(),
                // off-axis numerics render as plain integers or decimals
                None if axis.kind == AxisKind::Numeric => match val.parse::<i64>() {
                    Ok(i) => AxisValue::Int(i),
                    Err(_) => AxisValue::Decimal(val.parse()?),
                },
                None => {
                    return Err(GridError::NotAMember {
                        axis: id.to_string(),
                        value: val.to_string(),
                    })
                }
            };
            assignments.push((id, v));
        }
        grid.point_lenient(&assignments)
    }
}

impl fmt::Display for PointKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Deterministic, injective key over the grid; stable across runs and platforms.
pub fn point_key(point: &HyperparamPoint) -> PointKey {
    let rendered: Vec<String> = point.iter().map(|(id, v)| format!("{id}={v}")).collect();
    PointKey(rendered.join(";"))
}

/// Returns a copy of `point` differing only at the named axis.
pub fn point_with(
    grid: &HyperparamGrid,
    point: &HyperparamPoint,
    axis: &str,
    value: AxisValue,
) -> Result<HyperparamPoint, GridError> {
    let ax = grid.axis(axis)?;
    if !ax.contains(&value) {
        return Err(GridError::NotAMember {
            axis: axis.to_string(),
            value: value.to_string(),
        });
    }
    let mut out = point.clone();
    let idx = out
        .axis_ids
        .iter()
        .position(|id| id == axis)
        .ok_or_else(|| GridError::UnknownAxis(axis.to_string()))?;
    out.values[idx] = value;
    Ok(out)
}

pub const AXIS_LEARNING_RATE: &str = "learning_rate";
pub const AXIS_ITERATIONS: &str = "iterations";
pub const AXIS_NUM_LAYERS: &str = "num_layers";
pub const AXIS_NUM_NEURONS: &str = "num_neurons";
pub const AXIS_ACTIVATION: &str = "activation";
pub const AXIS_OPTIMIZER: &str = "optimizer";
pub const AXIS_SAMPLE_TO_BATCH_RATIO: &str = "sample_to_batch_ratio";
pub const AXIS_BATCH_SIZE: &str = "batch_size";
pub const AXIS_LOSS_FUNCTION: &str = "loss_function";

pub const ACTIVATION_TAGS: [&str; 9] = [
    "relu", "crelu", "elu", "selu", "relu6", "tanh", "softmax", "softsign", "softplus",
];

pub const OPTIMIZER_TAGS: [&str; 9] = [
    "adam",
    "adadelta",
    "adagrad",
    "ftrl",
    "gradient_descent",
    "proximal_adagrad",
    "proximal_gradient_descent",
    "rmsprop",
    "momentum",
];

pub const LOSS_TAGS: [&str; 4] = [
    "softmax_ce",
    "softmax_ce_v2",
    "sigmoid_ce",
    "weighted_ce",
];

/// The default 9-axis search space.
pub fn default_grid() -> HyperparamGrid {
    let dec = |m, s| AxisValue::Decimal(Decimal::new(m, s));
    let ints = |v: Vec<i64>| v.into_iter().map(AxisValue::Int).collect::<Vec<_>>();
    HyperparamGrid::new(vec![
        ParamAxis::numeric(
            AXIS_LEARNING_RATE,
            vec![
                dec(5, 5),
                dec(1, 4),
                dec(5, 4),
                dec(1, 3),
                dec(5, 3),
                dec(1, 2),
                dec(5, 2),
                dec(1, 1),
                dec(5, 1),
            ],
        ),
        ParamAxis::numeric(AXIS_ITERATIONS, ints((1..=9).map(|i| i * 100).collect())),
        ParamAxis::numeric(AXIS_NUM_LAYERS, ints((1..=9).collect())),
        ParamAxis::numeric(AXIS_NUM_NEURONS, ints((1..=9).map(|i| i * 10).collect())),
        ParamAxis::categorical(AXIS_ACTIVATION, &ACTIVATION_TAGS),
        ParamAxis::categorical(AXIS_OPTIMIZER, &OPTIMIZER_TAGS),
        ParamAxis::numeric(AXIS_SAMPLE_TO_BATCH_RATIO, ints((1..=9).collect())),
        ParamAxis::numeric(AXIS_BATCH_SIZE, ints((2..=10).map(|p| 16 * (1i64 << p)).collect())),
        ParamAxis::categorical(AXIS_LOSS_FUNCTION, &LOSS_TAGS),
    ])
    .expect("default grid is valid")
}

/// The default starting assignment for both search methods.
pub fn initial_point() -> HyperparamPoint {
    initial_point_on(&default_grid()).expect("initial point lies on the default grid")
}

pub fn initial_point_on(grid: &HyperparamGrid) -> Result<HyperparamPoint, GridError> {
    grid.point_lenient(&[
        (AXIS_NUM_LAYERS, AxisValue::Int(2)),
        (AXIS_NUM_NEURONS, AxisValue::Int(32)),
        (AXIS_ACTIVATION, AxisValue::tag("selu")),
        (AXIS_SAMPLE_TO_BATCH_RATIO, AxisValue::Int(8)),
        (AXIS_BATCH_SIZE, AxisValue::Int(128)),
        (AXIS_LEARNING_RATE, AxisValue::Decimal(Decimal::new(1, 3))),
        (AXIS_ITERATIONS, AxisValue::Int(250)),
        (AXIS_LOSS_FUNCTION, AxisValue::tag("softmax_ce")),
        (AXIS_OPTIMIZER, AxisValue::tag("adam")),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_matches_published_axes() {
        let g = default_grid();
        assert_eq!(g.axes().len(), 9);
        assert_eq!(g.axis(AXIS_LEARNING_RATE).unwrap().values[0].as_f64(), Some(0.00005));
        assert_eq!(g.axis(AXIS_LOSS_FUNCTION).unwrap().values.len(), 4);
        assert_eq!(g.axis(AXIS_BATCH_SIZE).unwrap().values[8], AxisValue::Int(16384));
        assert_eq!(g.axis(AXIS_ITERATIONS).unwrap().values.len(), 9);
        assert_eq!(g.axis(AXIS_NUM_LAYERS).unwrap().values[8], AxisValue::Int(9));
    }

    #[test]
    fn initial_point_matches_published_values() {
        let p = initial_point();
        assert_eq!(p.f64(AXIS_LEARNING_RATE).unwrap(), 0.001);
        assert_eq!(p.tag(AXIS_ACTIVATION).unwrap(), "selu");
        assert_eq!(p.usize(AXIS_ITERATIONS).unwrap(), 250);
        assert_eq!(p.usize(AXIS_NUM_LAYERS).unwrap(), 2);
        assert_eq!(p.usize(AXIS_NUM_NEURONS).unwrap(), 32);
        assert_eq!(p.usize(AXIS_SAMPLE_TO_BATCH_RATIO).unwrap(), 8);
        assert_eq!(p.usize(AXIS_BATCH_SIZE).unwrap(), 128);
        assert_eq!(p.tag(AXIS_LOSS_FUNCTION).unwrap(), "softmax_ce");
        assert_eq!(p.tag(AXIS_OPTIMIZER).unwrap(), "adam");
    }

    #[test]
    fn initial_point_membership_has_exactly_two_exceptions() {
        // the published starting assignment sits off its own sweep axes in
        // two places: 32 neurons (axis is 10..90 step 10) and 250 iterations
        // (axis is 100..900 step 100); everything else is a member
        let g = default_grid();
        let p = initial_point();
        for (id, v) in p.iter() {
            let member = g.axis(id).unwrap().contains(v);
            if id == AXIS_NUM_NEURONS || id == AXIS_ITERATIONS {
                assert!(!member, "axis {id} unexpectedly contains {v}");
            } else {
                assert!(member, "axis {id} missing {v}");
            }
        }
    }

    #[test]
    fn point_with_substitutes_one_axis() {
        let g = default_grid();
        let p = initial_point();
        let q = point_with(&g, &p, AXIS_LEARNING_RATE, AxisValue::Decimal(Decimal::new(1, 2))).unwrap();
        assert_eq!(q.f64(AXIS_LEARNING_RATE).unwrap(), 0.01);
        for (id, v) in q.iter() {
            if id != AXIS_LEARNING_RATE {
                assert_eq!(p.get(id).unwrap(), v);
            }
        }
        // identity when the value is unchanged
        let same = point_with(&g, &p, AXIS_BATCH_SIZE, AxisValue::Int(128)).unwrap();
        assert_eq!(same, p);
        // input untouched
        assert_eq!(p.f64(AXIS_LEARNING_RATE).unwrap(), 0.001);
    }

    #[test]
    fn point_with_rejects_off_grid_values() {
        let g = default_grid();
        let p = initial_point();
        let err = point_with(&g, &p, AXIS_LEARNING_RATE, Decimal::from_f64(0.002).map(AxisValue::Decimal).unwrap());
        assert!(matches!(err, Err(GridError::NotAMember { .. })));
        let err = point_with(&g, &p, "no_such_axis", AxisValue::Int(1));
        assert!(matches!(err, Err(GridError::UnknownAxis(_))));
    }

    #[test]
    fn keys_are_deterministic_and_roundtrip() {
        let g = default_grid();
        let p = initial_point();
        let k1 = point_key(&p);
        let k2 = point_key(&p);
        assert_eq!(k1, k2);
        let back = PointKey::parse(k1.as_str(), &g).unwrap();
        assert_eq!(back, p);
        assert_eq!(point_key(&back), k1);
    }

    #[test]
    fn keys_are_injective_on_a_toy_grid() {
        // brute force: every point of a 2-axis grid gets a distinct key
        let g = HyperparamGrid::new(vec![
            ParamAxis::numeric("x", (1..=5).map(AxisValue::Int).collect()),
            ParamAxis::numeric("y", (1..=5).map(AxisValue::Int).collect()),
        ])
        .unwrap();
        let keys: Vec<_> = g.enumerate().map(|p| point_key(&p)).collect();
        assert_eq!(keys.len(), 25);
        for (i, a) in keys.iter().enumerate() {
            for b in &keys[..i] {
                assert_ne!(a, b);
            }
        }
    }

    #[test]
    fn enumeration_is_lexicographic_and_stable() {
        let g = HyperparamGrid::new(vec![
            ParamAxis::numeric("x", vec![AxisValue::Int(1), AxisValue::Int(2)]),
            ParamAxis::categorical("y", &["a", "b"]),
        ])
        .unwrap();
        let order: Vec<String> = g.enumerate().map(|p| point_key(&p).to_string()).collect();
        assert_eq!(order, vec!["x=1;y=a", "x=1;y=b", "x=2;y=a", "x=2;y=b"]);
        let again: Vec<String> = g.enumerate().map(|p| point_key(&p).to_string()).collect();
        assert_eq!(order, again);
    }

    #[test]
    fn grid_json_roundtrip() {
        let g = default_grid();
        let json = serde_json::to_string(&g).unwrap();
        let back: HyperparamGrid = serde_json::from_str(&json).unwrap();
        assert_eq!(g, back);
    }

    #[test]
    fn point_json_roundtrip_through_grid() {
        let g = default_grid();
        let p = initial_point();
        let json = p.to_json();
        let back = g.parse_point(&json).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Decimal::new(5, 5).to_string(), "0.00005");
        assert_eq!(Decimal::new(5, 1).to_string(), "0.5");
        assert_eq!(Decimal::new(100, 2).to_string(), "1");
        assert_eq!(Decimal::from_f64(0.001).unwrap(), Decimal::new(1, 3));
        assert_eq!("0.00005".parse::<Decimal>().unwrap(), Decimal::new(5, 5));
    }

    #[test]
    fn grid_rejects_duplicates_and_nonpositive() {
        let dup = HyperparamGrid::new(vec![ParamAxis::numeric(
            "x",
            vec![AxisValue::Int(1), AxisValue::Int(1)],
        )]);
        assert!(matches!(dup, Err(GridError::DuplicateValue { .. })));
        let neg = HyperparamGrid::new(vec![ParamAxis::numeric("x", vec![AxisValue::Int(-1)])]);
        assert!(matches!(neg, Err(GridError::NonPositive { .. })));
    }
}
