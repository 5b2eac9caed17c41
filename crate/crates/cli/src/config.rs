//! Run configuration and the geometry-spec grammar.
//!
//! Geometry specs are `name:param,param,...`:
//!
//! | spec                                | geometry                                    |
//! |-------------------------------------|---------------------------------------------|
//! | `icosphere:S[,R]`                   | geodesic sphere, subdivision `S`, radius `R` |
//! | `ellipsoid:A,B,C[,S]`               | scaled icosphere (default `S = 3`)           |
//! | `torus:R,r[,AROUND,TUBE]`           | staggered torus (default 32 × 16)           |
//! | `ball:S[,R[,SHELLS]]`               | tetrahedralized ball                        |
//! | `sphere:N[,R]`                      | closed-form round `Sᴺ` (bounds only)        |

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Spectrum,
    Reilly,
    Bounds,
}

/// Everything a run depends on; echoed into every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default)]
    pub geometry: Option<String>,
    #[serde(default)]
    pub mesh: Option<PathBuf>,
    #[serde(default)]
    pub p: Option<usize>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub levels: Vec<usize>,
    #[serde(default)]
    pub field: Option<String>,
    #[serde(default = "default_boundary")]
    pub boundary: String,
    #[serde(default)]
    pub tol: Option<f64>,
    pub out: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub suite: Option<String>,
    #[serde(default)]
    pub theorem: Vec<String>,
    #[serde(default)]
    pub strict_dec: bool,
}

fn default_k() -> usize {
    10
}

fn default_boundary() -> String {
    "fitted".into()
}

impl RunConfig {
    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.k == 0 {
            return bad("--k must be positive".into());
        }
        if let Some(t) = self.tol {
            if !(t > 0.0 && t.is_finite()) {
                return bad(format!("--tol must be positive, got {t}"));
            }
        }
        if self.geometry.is_some() && self.mesh.is_some() {
            return bad("give either --geometry or --mesh, not both".into());
        }
        if let Some(g) = &self.geometry {
            g.parse::<GeometrySpec>()?;
        }
        if !["fitted", "analytic", "flat"].contains(&self.boundary.as_str()) {
            return bad(format!("--boundary must be fitted, analytic or flat, got `{}`", self.boundary));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometrySpec {
    Icosphere { subdivisions: usize, radius: f64 },
    Ellipsoid { axes: [f64; 3], subdivisions: usize },
    Torus { major: f64, minor: f64, around: usize, tube: usize },
    Ball { subdivisions: usize, radius: f64, shells: Option<usize> },
    Sphere { n: usize, radius: f64 },
}

impl FromStr for GeometrySpec {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        let (name, rest) = s.split_once(':').unwrap_or((s, ""));
        let params: Vec<&str> = rest.split(',').map(str::trim).filter(|p| !p.is_empty()).collect();
        let err = |m: &str| CliError::Config(format!("geometry `{s}`: {m}"));
        let real = |i: usize, default: Option<f64>| -> Result<f64, CliError> {
            let v = match params.get(i) {
                Some(p) => p.parse::<f64>().map_err(|_| err(&format!("`{p}` is not a number")))?,
                None => default.ok_or_else(|| err(&format!("missing parameter {}", i + 1)))?,
            };
            if !(v > 0.0 && v.is_finite()) {
                return Err(err(&format!("parameter {} must be positive", i + 1)));
            }
            Ok(v)
        };
        let count = |i: usize, default: Option<usize>, min: usize| -> Result<usize, CliError> {
            let v = match params.get(i) {
                Some(p) => p.parse::<usize>().map_err(|_| err(&format!("`{p}` is not a count")))?,
                None => default.ok_or_else(|| err(&format!("missing parameter {}", i + 1)))?,
            };
            if v < min {
                return Err(err(&format!("parameter {} must be at least {min}", i + 1)));
            }
            Ok(v)
        };
        let max_params = |m: usize| {
            if params.len() > m {
                Err(err(&format!("takes at most {m} parameters")))
            } else {
                Ok(())
            }
        };
        match name {
            "icosphere" => {
                max_params(2)?;
                Ok(GeometrySpec::Icosphere { subdivisions: count(0, None, 0)?, radius: real(1, Some(1.0))? })
            }
            "ellipsoid" => {
                max_params(4)?;
                Ok(GeometrySpec::Ellipsoid {
                    axes: [real(0, None)?, real(1, None)?, real(2, None)?],
                    subdivisions: count(3, Some(3), 0)?,
                })
            }
            "torus" => {
                max_params(4)?;
                let (major, minor) = (real(0, None)?, real(1, None)?);
                if minor >= major {
                    return Err(err("the tube radius must be smaller than the major radius"));
                }
                Ok(GeometrySpec::Torus { major, minor, around: count(2, Some(32), 3)?, tube: count(3, Some(16), 3)? })
            }
            "ball" => {
                max_params(3)?;
                let shells = if params.len() > 2 { Some(count(2, None, 1)?) } else { None };
                Ok(GeometrySpec::Ball { subdivisions: count(0, None, 0)?, radius: real(1, Some(1.0))?, shells })
            }
            "sphere" => {
                max_params(2)?;
                Ok(GeometrySpec::Sphere { n: count(0, None, 1)?, radius: real(1, Some(1.0))? })
            }
            _ => Err(err("unknown geometry; expected icosphere, ellipsoid, torus, ball or sphere")),
        }
    }
}

/// Parses `A..B` (inclusive), `A,B,C` or a single level.
pub fn parse_levels(s: &str) -> Result<Vec<usize>, CliError> {
    let err = || CliError::Config(format!("levels `{s}`: expected `A..B`, `A,B,...` or a single level"));
    let num = |t: &str| t.trim().parse::<usize>().map_err(|_| err());
    let levels = if let Some((a, b)) = s.split_once("..") {
        let (a, b) = (num(a)?, num(b.trim_start_matches('='))?);
        if a > b {
            return Err(err());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
    };
    if levels.is_empty() {
        return Err(err());
    }
    Ok(levels)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometry_grammar() {
        assert_eq!(
            "icosphere:4".parse::<GeometrySpec>().unwrap(),
            GeometrySpec::Icosphere { subdivisions: 4, radius: 1.0 }
        );
        assert_eq!(
            "ellipsoid:1,1.1, 1.2".parse::<GeometrySpec>().unwrap(),
            GeometrySpec::Ellipsoid { axes: [1.0, 1.1, 1.2], subdivisions: 3 }
        );
        assert_eq!(
            "ball:2,2.5,4".parse::<GeometrySpec>().unwrap(),
            GeometrySpec::Ball { subdivisions: 2, radius: 2.5, shells: Some(4) }
        );
        assert_eq!("sphere:5".parse::<GeometrySpec>().unwrap(), GeometrySpec::Sphere { n: 5, radius: 1.0 });
        for bad in ["icosphere", "icosphere:-1", "ellipsoid:1,0,1", "torus:1,2", "cube:3", "sphere:0", "icosphere:2,1,3"] {
            assert!(bad.parse::<GeometrySpec>().is_err(), "{bad}");
        }
    }

    #[test]
    fn level_ranges() {
        assert_eq!(parse_levels("1..3").unwrap(), vec![1, 2, 3]);
        assert_eq!(parse_levels("1..=2").unwrap(), vec![1, 2]);
        assert_eq!(parse_levels("0,2").unwrap(), vec![0, 2]);
        assert_eq!(parse_levels("3").unwrap(), vec![3]);
        assert!(parse_levels("3..1").is_err());
        assert!(parse_levels("a").is_err());
    }

    #[test]
    fn config_file_defaults_and_rejections() {
        let c: RunConfig = serde_json::from_str(r#"{"command":"bounds","out":"o","suite":"spheres"}"#).unwrap();
        assert_eq!((c.k, c.boundary.as_str(), c.strict_dec), (10, "fitted", false));
        c.validate().unwrap();
        assert!(serde_json::from_str::<RunConfig>(r#"{"command":"bounds","out":"o","colour":1}"#).is_err());
        let mut bad = c.clone();
        bad.tol = Some(-1.0);
        assert!(bad.validate().is_err());
    }
}
