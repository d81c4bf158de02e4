//! Parameter grids for verification sweeps.
//!
//! A grid file is flat text with one parameter per line:
//!
//! ```text
//! # comment
//! q = list(0.3, 0.5, 0.7)
//! t = range(0.5, 4.5, 5)
//! ```
//!
//! `range(min, max, count)` spaces `count` values linearly from `min` to
//! `max` inclusive.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::error::{invalid, Result};

/// Parameters a grid may mention.
pub const PARAM_NAMES: [&str; 8] = ["q", "k", "t", "s", "a", "x", "u", "v"];

#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct GridSpec {
    params: BTreeMap<String, Vec<f64>>,
}

impl GridSpec {
    pub fn empty() -> Self {
        Self::default()
    }

    /// `q ∈ {0.3, 0.5, 0.7, 0.9}`, `k ∈ {0.5, 1, 2, 3.5}`,
    /// `t, s ∈ {0.4, 1, 2.3, 5}`, `a ∈ {0.5, 1, 2}`.
    pub fn default_grid() -> Self {
        let mut g = Self::empty();
        g.set("q", vec![0.3, 0.5, 0.7, 0.9]);
        g.set("k", vec![0.5, 1.0, 2.0, 3.5]);
        g.set("t", vec![0.4, 1.0, 2.3, 5.0]);
        g.set("s", vec![0.4, 1.0, 2.3, 5.0]);
        g.set("a", vec![0.5, 1.0, 2.0]);
        g
    }

    pub fn set(&mut self, name: &str, values: Vec<f64>) {
        self.params.insert(name.to_string(), values);
    }

    pub fn get(&self, name: &str) -> Option<&[f64]> {
        self.params.get(name).map(Vec::as_slice)
    }

    /// The values of `name`, or `default` when the grid leaves it out.
    pub fn values_or(&self, name: &str, default: &[f64]) -> Vec<f64> {
        self.get(name)
            .map_or_else(|| default.to_vec(), <[f64]>::to_vec)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.params.keys().map(String::as_str)
    }

    /// `self` with every parameter it lacks taken from `base`.
    pub fn over(mut self, base: &GridSpec) -> Self {
        for (k, v) in &base.params {
            self.params.entry(k.clone()).or_insert_with(|| v.clone());
        }
        self
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut g = Self::empty();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fail =
                |why: &str| invalid(format!("grid line {}: {why}: '{}'", lineno + 1, raw.trim()));
            let (name, spec) = line
                .split_once('=')
                .ok_or_else(|| fail("expected 'name = ...'"))?;
            let name = name.trim();
            if !PARAM_NAMES.contains(&name) {
                return Err(fail("unknown parameter"));
            }
            if g.params.contains_key(name) {
                return Err(fail("parameter given twice"));
            }
            let spec = spec.trim();
            let (kind, inner) = spec
                .strip_suffix(')')
                .and_then(|s| s.split_once('('))
                .ok_or_else(|| fail("expected list(...) or range(...)"))?;
            let nums = inner
                .split(',')
                .map(|v| v.trim())
                .filter(|v| !v.is_empty())
                .map(|v| v.parse::<f64>().ok().filter(|x| x.is_finite()))
                .collect::<Option<Vec<f64>>>()
                .ok_or_else(|| fail("not a finite number"))?;
            let values = match kind.trim() {
                "list" => {
                    if nums.is_empty() {
                        return Err(fail("empty list"));
                    }
                    nums
                }
                "range" => {
                    let [min, max, count] = nums[..] else {
                        return Err(fail("range takes (min, max, count)"));
                    };
                    if count < 1.0 || count.fract() != 0.0 {
                        return Err(fail("range count must be a positive integer"));
                    }
                    if max < min {
                        return Err(fail("range max below min"));
                    }
                    let n = count as usize;
                    if n == 1 {
                        vec![min]
                    } else {
                        let h = (max - min) / (n - 1) as f64;
                        (0..n)
                            .map(|i| if i + 1 == n { max } else { min + h * i as f64 })
                            .collect()
                    }
                }
                _ => return Err(fail("expected list(...) or range(...)")),
            };
            g.params.insert(name.to_string(), values);
        }
        Ok(g)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read grid file {}: {e}", path.display())))?;
        Self::parse(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_and_ranges() {
        let g = GridSpec::parse(
            "# sweep\n q = list(0.3, 0.5)\n\nt = range(1, 2, 3)  # inclusive\nx=list(-1)\n",
        )
        .unwrap();
        assert_eq!(g.get("q").unwrap(), &[0.3, 0.5]);
        assert_eq!(g.get("t").unwrap(), &[1.0, 1.5, 2.0]);
        assert_eq!(g.get("x").unwrap(), &[-1.0]);
        assert!(g.get("k").is_none());
        assert_eq!(
            GridSpec::parse("a = range(2, 2, 1)")
                .unwrap()
                .get("a")
                .unwrap(),
            &[2.0]
        );
    }

    #[test]
    fn rejects_malformed_lines() {
        for bad in [
            "q 0.5",
            "w = list(1)",
            "q = list()",
            "q = list(0.5, abc)",
            "q = range(0, 1)",
            "q = range(0, 1, 2.5)",
            "q = range(1, 0, 3)",
            "q = linspace(0, 1, 3)",
            "q = list(0.5",
            "q = list(1)\nq = list(2)",
            "q = list(nan)",
        ] {
            assert!(GridSpec::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn file_values_override_defaults() {
        let g = GridSpec::parse("q = list(0.6)")
            .unwrap()
            .over(&GridSpec::default_grid());
        assert_eq!(g.get("q").unwrap(), &[0.6]);
        assert_eq!(g.get("k").unwrap(), &[0.5, 1.0, 2.0, 3.5]);
        assert_eq!(g.values_or("x", &[0.3]), vec![0.3]);
    }
}
