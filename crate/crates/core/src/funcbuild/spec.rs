use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{constant, delta, exponential, hyperbolic, polynomial, Hyperbolic, PolynomialSpec};
use crate::error::{Error, Result};
use crate::scalar::Scalar;
use crate::topology::{DigitId, LabeledTree};
use crate::ttn::{AnyNetwork, TreeTensorNetwork};

/// A number written either as `1.5` or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Num {
    Real(f64),
    Complex([f64; 2]),
}

impl Num {
    fn value(self) -> Complex64 {
        match self {
            Num::Real(x) => Complex64::new(x, 0.0),
            Num::Complex([re, im]) => Complex64::new(re, im),
        }
    }

    fn is_real(self) -> bool {
        self.value().im == 0.0
    }
}

impl Default for Num {
    fn default() -> Self {
        Num::Real(0.0)
    }
}

fn one() -> Num {
    Num::Real(1.0)
}

fn first() -> usize {
    1
}

/// Declarative description of a directly constructible function, as read
/// from a TOML document with a `kind` key.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FunctionSpec {
    Constant {
        #[serde(default = "one")]
        c: Num,
    },
    Exponential {
        #[serde(default = "one")]
        c: Num,
        k: Vec<Num>,
        #[serde(default)]
        a: Num,
    },
    Cosh {
        #[serde(default = "one")]
        c: Num,
        k: Vec<Num>,
        #[serde(default)]
        a: Num,
    },
    Sinh {
        #[serde(default = "one")]
        c: Num,
        k: Vec<Num>,
        #[serde(default)]
        a: Num,
    },
    Delta {
        point: Vec<f64>,
    },
    Polynomial {
        coefficients: Vec<Num>,
        #[serde(default = "first")]
        variable: usize,
        root: Option<String>,
    },
}

impl FunctionSpec {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    fn numbers(&self) -> Vec<Num> {
        match self {
            FunctionSpec::Constant { c } => vec![*c],
            FunctionSpec::Exponential { c, k, a }
            | FunctionSpec::Cosh { c, k, a }
            | FunctionSpec::Sinh { c, k, a } => {
                let mut v = vec![*c, *a];
                v.extend_from_slice(k);
                v
            }
            FunctionSpec::Delta { .. } => vec![],
            FunctionSpec::Polynomial { coefficients, .. } => coefficients.clone(),
        }
    }

    /// True when every parameter is real, so a real network is built.
    pub fn is_real(&self) -> bool {
        self.numbers().into_iter().all(Num::is_real)
    }

    pub fn build(&self, tree: &LabeledTree) -> Result<AnyNetwork> {
        if self.is_real() {
            Ok(AnyNetwork::Real(self.build_as(tree, |z: Complex64| z.re)?))
        } else {
            Ok(AnyNetwork::Complex(self.build_as(tree, |z| z)?))
        }
    }

    fn build_as<T: Scalar>(
        &self,
        tree: &LabeledTree,
        conv: impl Fn(Complex64) -> T,
    ) -> Result<TreeTensorNetwork<T>> {
        let v = |n: &Num| conv(n.value());
        let vs = |ns: &[Num]| ns.iter().map(v).collect::<Vec<T>>();
        match self {
            FunctionSpec::Constant { c } => Ok(constant(tree, v(c))),
            FunctionSpec::Exponential { c, k, a } => exponential(tree, v(c), &vs(k), v(a)),
            FunctionSpec::Cosh { c, k, a } => hyperbolic(tree, v(c), &vs(k), v(a), Hyperbolic::Cosh),
            FunctionSpec::Sinh { c, k, a } => hyperbolic(tree, v(c), &vs(k), v(a), Hyperbolic::Sinh),
            FunctionSpec::Delta { point } => delta(tree, point),
            FunctionSpec::Polynomial {
                coefficients,
                variable,
                root,
            } => {
                let root_digit = root
                    .as_deref()
                    .map(str::parse::<DigitId>)
                    .transpose()?;
                let spec = PolynomialSpec {
                    coefficients: vs(coefficients),
                    variable: *variable,
                    root_digit,
                };
                polynomial(tree, &spec)
            }
        }
    }
}
