//! Box-bounded search spaces and the unit-cube encoding used by every model.
//!
//! All surrogate work happens on `[0, 1]^d`. A [`SearchSpace`] maps those
//! coordinates to native hyperparameter values and back, applying linear or
//! logarithmic scaling per dimension. Integer dimensions are modelled
//! continuously and rounded only when decoded.

use std::collections::HashSet;
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::seed;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Kind {
    Real,
    Integer,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scaling {
    Linear,
    Log2,
    Log10,
}

impl Scaling {
    fn forward(self, v: f64) -> f64 {
        match self {
            Scaling::Linear => v,
            Scaling::Log2 => v.log2(),
            Scaling::Log10 => v.log10(),
        }
    }

    fn inverse(self, t: f64) -> f64 {
        match self {
            Scaling::Linear => t,
            Scaling::Log2 => t.exp2(),
            Scaling::Log10 => 10f64.powf(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub kind: Kind,
    pub lower: f64,
    pub upper: f64,
    pub scaling: Scaling,
}

impl Dimension {
    pub fn new(name: &str, kind: Kind, lower: f64, upper: f64, scaling: Scaling) -> Result<Self> {
        let dim = Dimension {
            name: name.to_string(),
            kind,
            lower,
            upper,
            scaling,
        };
        dim.validate()?;
        Ok(dim)
    }

    pub fn real(name: &str, lower: f64, upper: f64, scaling: Scaling) -> Result<Self> {
        Self::new(name, Kind::Real, lower, upper, scaling)
    }

    pub fn integer(name: &str, lower: i64, upper: i64, scaling: Scaling) -> Result<Self> {
        Self::new(name, Kind::Integer, lower as f64, upper as f64, scaling)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lower.is_finite() && self.upper.is_finite()) || self.lower >= self.upper {
            return Err(Error::Config(format!(
                "dimension `{}` needs finite bounds with lower < upper, got [{}, {}]",
                self.name, self.lower, self.upper
            )));
        }
        if self.scaling != Scaling::Linear && self.lower <= 0.0 {
            return Err(Error::Config(format!(
                "dimension `{}` uses log scaling and needs lower > 0",
                self.name
            )));
        }
        if self.kind == Kind::Integer && (self.lower.fract() != 0.0 || self.upper.fract() != 0.0) {
            return Err(Error::Config(format!(
                "integer dimension `{}` needs integral bounds",
                self.name
            )));
        }
        Ok(())
    }

    /// Maps a unit coordinate to a native value.
    pub fn decode(&self, u: f64) -> f64 {
        let lo = self.scaling.forward(self.lower);
        let hi = self.scaling.forward(self.upper);
        let v = self.scaling.inverse(lo + u * (hi - lo));
        match self.kind {
            Kind::Real => v.clamp(self.lower, self.upper),
            Kind::Integer => v.round().clamp(self.lower, self.upper),
        }
    }

    /// Maps a native value to its unit coordinate.
    pub fn encode(&self, v: f64) -> Result<f64> {
        if !v.is_finite() || v < self.lower || v > self.upper {
            return Err(Error::Encoding(format!(
                "value {} outside [{}, {}] for `{}`",
                v, self.lower, self.upper, self.name
            )));
        }
        if self.kind == Kind::Integer && v.fract() != 0.0 {
            return Err(Error::Encoding(format!(
                "value {} is not an integer for `{}`",
                v, self.name
            )));
        }
        let lo = self.scaling.forward(self.lower);
        let hi = self.scaling.forward(self.upper);
        Ok(((self.scaling.forward(v) - lo) / (hi - lo)).clamp(0.0, 1.0))
    }
}

/// A point of the unit cube `[0, 1]^d`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Location(Vec<f64>);

impl Location {
    pub fn new(u: Vec<f64>) -> Result<Self> {
        if let Some(bad) = u.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::Encoding(format!(
                "unit-cube coordinate {bad} outside [0, 1]"
            )));
        }
        Ok(Location(u))
    }

    /// Builds a location, projecting every coordinate onto `[0, 1]`.
    pub fn clamped(mut u: Vec<f64>) -> Self {
        for v in &mut u {
            *v = if v.is_nan() { 0.5 } else { v.clamp(0.0, 1.0) };
        }
        Location(u)
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for Location {
    type Target = [f64];

    fn deref(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Dimension>", into = "Vec<Dimension>")]
pub struct SearchSpace {
    dims: Vec<Dimension>,
}

impl TryFrom<Vec<Dimension>> for SearchSpace {
    type Error = Error;

    fn try_from(dims: Vec<Dimension>) -> Result<Self> {
        SearchSpace::new(dims)
    }
}

impl From<SearchSpace> for Vec<Dimension> {
    fn from(space: SearchSpace) -> Self {
        space.dims
    }
}

impl SearchSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Config("search space needs at least one dimension".into()));
        }
        let mut names = HashSet::new();
        for dim in &dims {
            dim.validate()?;
            if !names.insert(dim.name.as_str()) {
                return Err(Error::Config(format!("duplicate dimension name `{}`", dim.name)));
            }
        }
        Ok(SearchSpace { dims })
    }

    /// `d` real dimensions on `[0, 1]` named `x1..xd`.
    pub fn unit(d: usize) -> Result<Self> {
        let dims = (1..=d)
            .map(|i| Dimension::real(&format!("x{i}"), 0.0, 1.0, Scaling::Linear))
            .collect::<Result<Vec<_>>>()?;
        Self::new(dims)
    }

    /// Multi-layer perceptron space (d = 10).
    pub fn mlp() -> Self {
        use Scaling::*;
        let dims = vec![
            Dimension::integer("n_layers", 1, 4, Linear),
            Dimension::integer("layer_1", 2, 32, Log2),
            Dimension::integer("layer_2", 2, 32, Log2),
            Dimension::integer("layer_3", 2, 32, Log2),
            Dimension::integer("layer_4", 2, 32, Log2),
            Dimension::real("alpha", 1e-6, 1e-1, Log10),
            Dimension::real("learning_rate_init", 1e-6, 1e-1, Log10),
            Dimension::real("beta_1", 0.001, 0.99, Log10),
            Dimension::real("beta_2", 0.001, 0.99, Log10),
            Dimension::real("tol", 1e-5, 1e-2, Log10),
        ];
        Self::new(dims.into_iter().map(|d| d.expect("preset bounds are valid")).collect())
            .expect("preset is valid")
    }

    /// Gradient-boosted trees space (d = 7).
    pub fn xgb() -> Self {
        use Scaling::*;
        let dims = vec![
            Dimension::integer("n_estimators", 1, 256, Log2),
            Dimension::real("learning_rate", 0.01, 1.0, Log10),
            Dimension::real("gamma", 0.0, 0.1, Linear),
            Dimension::real("reg_alpha", 1e-3, 1e3, Log10),
            Dimension::real("reg_lambda", 1e-3, 1e3, Log10),
            Dimension::real("subsample", 0.01, 1.0, Linear),
            Dimension::integer("max_depth", 1, 16, Linear),
        ];
        Self::new(dims.into_iter().map(|d| d.expect("preset bounds are valid")).collect())
            .expect("preset is valid")
    }

    pub fn preset(name: &str) -> Result<Self> {
        match name {
            "mlp" => Ok(Self::mlp()),
            "xgb" => Ok(Self::xgb()),
            other => Err(Error::Config(format!("unknown search space preset `{other}`"))),
        }
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[Dimension] {
        &self.dims
    }

    pub fn decode(&self, loc: &[f64]) -> Result<Vec<f64>> {
        self.check_len(loc.len())?;
        Ok(self.dims.iter().zip(loc).map(|(d, &u)| d.decode(u)).collect())
    }

    pub fn encode(&self, values: &[f64]) -> Result<Location> {
        self.check_len(values.len())?;
        let u = self
            .dims
            .iter()
            .zip(values)
            .map(|(d, &v)| d.encode(v))
            .collect::<Result<Vec<_>>>()?;
        Ok(Location(u))
    }

    /// `n` i.i.d. uniform locations. Sampling is sequential, so the first `k`
    /// locations for a seed do not depend on `n`.
    pub fn sample_uniform(&self, n: usize, seed: u64) -> Result<Vec<Location>> {
        if n == 0 {
            return Err(Error::Config("sample_uniform needs n >= 1".into()));
        }
        let mut rng = seed::rng(seed);
        Ok((0..n)
            .map(|_| Location((0..self.dim()).map(|_| rng.gen::<f64>()).collect()))
            .collect())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if n != self.dim() {
            return Err(Error::Encoding(format!(
                "expected {} coordinates, got {n}",
                self.dim()
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn log_dim() -> SearchSpace {
        SearchSpace::new(vec![Dimension::real("alpha", 1e-6, 1e-1, Scaling::Log10).unwrap()])
            .unwrap()
    }

    #[test]
    fn decode_boundaries() {
        let space = log_dim();
        assert_eq!(space.decode(&[0.0]).unwrap()[0], 1e-6);
        let ints = SearchSpace::new(vec![Dimension::integer("n", 1, 256, Scaling::Log2).unwrap()])
            .unwrap();
        assert_eq!(ints.decode(&[1.0]).unwrap()[0], 256.0);
    }

    #[test]
    fn decode_midpoint_of_exponents() {
        let v = log_dim().decode(&[0.5]).unwrap()[0];
        assert!((v - 10f64.powf(-3.5)).abs() < 1e-15);
        assert!((v - 3.1623e-4).abs() < 1e-8);
    }

    #[test]
    fn encode_examples() {
        let space = log_dim();
        assert_eq!(space.encode(&[1e-6]).unwrap()[0], 0.0);
        assert!((space.encode(&[3.1623e-4]).unwrap()[0] - 0.5).abs() < 1e-6);
    }

    #[test]
    fn encode_rejects_out_of_domain() {
        let space = log_dim();
        assert!(matches!(space.encode(&[0.5]), Err(Error::Encoding(_))));
        assert!(matches!(space.encode(&[1e-6, 1e-6]), Err(Error::Encoding(_))));
        let ints = SearchSpace::new(vec![Dimension::integer("n", 1, 4, Scaling::Linear).unwrap()])
            .unwrap();
        assert!(ints.encode(&[2.5]).is_err());
    }

    #[test]
    fn decode_rejects_wrong_arity() {
        assert!(matches!(SearchSpace::mlp().decode(&[0.5; 3]), Err(Error::Encoding(_))));
    }

    #[test]
    fn space_validation() {
        assert!(Dimension::real("a", 1.0, 1.0, Scaling::Linear).is_err());
        assert!(Dimension::real("a", 0.0, 1.0, Scaling::Log10).is_err());
        let a = Dimension::real("a", 0.0, 1.0, Scaling::Linear).unwrap();
        assert!(SearchSpace::new(vec![a.clone(), a]).is_err());
        assert!(SearchSpace::new(vec![]).is_err());
    }

    #[test]
    fn presets() {
        assert_eq!(SearchSpace::mlp().dim(), 10);
        assert_eq!(SearchSpace::xgb().dim(), 7);
        assert!(SearchSpace::preset("svm").is_err());
    }

    #[test]
    fn round_trip_on_random_points() {
        let space = SearchSpace::new(vec![
            Dimension::real("a", 1e-6, 1e-1, Scaling::Log10).unwrap(),
            Dimension::real("b", 0.01, 1.0, Scaling::Linear).unwrap(),
            Dimension::real("c", 0.5, 64.0, Scaling::Log2).unwrap(),
        ])
        .unwrap();
        let pts = space.sample_uniform(100, 3).unwrap();
        let worst = pts
            .iter()
            .map(|u| {
                let back = space.encode(&space.decode(u).unwrap()).unwrap();
                u.iter().zip(back.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
            })
            .fold(0.0, f64::max);
        assert!(worst <= 1e-12, "worst round-trip error {worst}");
    }

    #[test]
    fn sampling() {
        let space = SearchSpace::unit(2).unwrap();
        assert_eq!(space.sample_uniform(3, 7).unwrap(), space.sample_uniform(3, 7).unwrap());
        assert!(space.sample_uniform(0, 7).is_err());
        let one = SearchSpace::unit(1).unwrap();
        let pts = one.sample_uniform(10_000, 11).unwrap();
        let mean = pts.iter().map(|p| p[0]).sum::<f64>() / 10_000.0;
        assert!((0.47..=0.53).contains(&mean));
        // prefix stability
        assert_eq!(space.sample_uniform(5, 1).unwrap()[..3], space.sample_uniform(3, 1).unwrap()[..]);
    }

    #[test]
    fn serde_round_trip() {
        let json = serde_json::to_string(&SearchSpace::xgb()).unwrap();
        let back: SearchSpace = serde_json::from_str(&json).unwrap();
        assert_eq!(back, SearchSpace::xgb());
        let dup = r#"[{"name":"a","kind":"real","lower":0,"upper":1,"scaling":"linear"},
                      {"name":"a","kind":"real","lower":0,"upper":1,"scaling":"linear"}]"#;
        assert!(serde_json::from_str::<SearchSpace>(dup).is_err());
    }

    proptest! {
        #[test]
        fn decode_is_monotone(a in 0.0f64..=1.0, b in 0.0f64..=1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for space in [SearchSpace::mlp(), SearchSpace::xgb()] {
                for dim in space.dims() {
                    prop_assert!(dim.decode(lo) <= dim.decode(hi));
                }
            }
        }

        #[test]
        fn native_round_trip(v in 1e-6f64..=1e-1) {
            let space = log_dim();
            let back = space.decode(&space.encode(&[v]).unwrap()).unwrap()[0];
            prop_assert!((back - v).abs() <= 1e-12);
        }
    }
}
