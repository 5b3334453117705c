//! Seeded synthetic datasets and CSV ingestion.
//!
//! Labels are `{-1, +1}` and features are kept at order one. Two
//! generators plus a CSV path:
//!
//! - `blobs`: two truncated-Gaussian clusters at `+-(separation/2) u` along
//!   the unit diagonal `u`. The noise projection onto `u` is capped at 2.5,
//!   so at separation `6` every sample keeps a margin of at least `0.5`
//!   from the hyperplane through the origin normal to `u`: the clusters are
//!   linearly separable by construction.
//! - `rings`: two concentric annuli in a 2-D plane. A bias-free ReLU
//!   network is positively homogeneous (its sign depends only on the input
//!   direction), so raw annuli around the origin would be unlearnable by
//!   construction; the generator therefore appends a constant third
//!   coordinate (the homogeneous lift), and ring specs require
//!   `input_dim = 3`. The two geometric coordinates stay order one and the
//!   class boundary is a circle, which no linear classifier on the lifted
//!   features can track.
//! - `csv`: rows `f_1,...,f_{n_0},y`.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Example;
use crate::scalar::Real;

/// Dataset kind and its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DatasetKind {
    /// Two truncated-Gaussian clusters separated by `separation` sigma.
    Blobs { separation: f64 },
    /// Two concentric annuli (radii `inner_radius`, `outer_radius`, each
    /// `+- ring_width`) plus a constant lift coordinate.
    Rings {
        inner_radius: f64,
        outer_radius: f64,
        ring_width: f64,
    },
    /// CSV file with rows `f_1,...,f_{n_0},y`.
    Csv { path: String },
}

/// A dataset specification: kind, size, input dimension, seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetSpec {
    #[serde(flatten)]
    pub kind: DatasetKind,
    pub size: usize,
    pub input_dim: usize,
    #[serde(default)]
    pub seed: u64,
}

impl DatasetSpec {
    pub fn blobs(size: usize, input_dim: usize, separation: f64, seed: u64) -> Self {
        Self {
            kind: DatasetKind::Blobs { separation },
            size,
            input_dim,
            seed,
        }
    }

    /// Standard rings benchmark: radii 1.0 / 1.12, width 0.04, lifted to
    /// 3-D. The annuli sit close enough that a brute-force linear classifier
    /// stays at or below 60% accuracy on a 400-point sample.
    pub fn rings(size: usize, seed: u64) -> Self {
        Self {
            kind: DatasetKind::Rings {
                inner_radius: 1.0,
                outer_radius: 1.12,
                ring_width: 0.04,
            },
            size,
            input_dim: 3,
            seed,
        }
    }
}

/// Generates (or loads) the dataset. Deterministic given the spec.
pub fn make_dataset<F: Real>(spec: &DatasetSpec) -> Result<Vec<Example<F>>> {
    if spec.size == 0 {
        return Err(Error::Config("dataset size must be positive".into()));
    }
    match &spec.kind {
        DatasetKind::Blobs { separation } => blobs(spec, *separation),
        DatasetKind::Rings {
            inner_radius,
            outer_radius,
            ring_width,
        } => rings(spec, *inner_radius, *outer_radius, *ring_width),
        DatasetKind::Csv { path } => load_csv(Path::new(path), spec.input_dim),
    }
}

fn blobs<F: Real>(spec: &DatasetSpec, separation: f64) -> Result<Vec<Example<F>>> {
    let d = spec.input_dim;
    if d == 0 {
        return Err(Error::Config("blobs need input_dim >= 1".into()));
    }
    if separation <= 0.0 {
        return Err(Error::Config("blob separation must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let u = 1.0 / (d as f64).sqrt();
    let half = separation / 2.0;
    let mut out = Vec::with_capacity(spec.size);
    for i in 0..spec.size {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        // truncate the projection onto u so the margin is guaranteed
        let noise = loop {
            let n: Vec<f64> = (0..d)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect();
            let proj: f64 = n.iter().map(|v| v * u).sum();
            if proj.abs() <= 2.5 {
                break n;
            }
        };
        let x: Vec<F> = noise.iter().map(|&n| F::of(label * half * u + n)).collect();
        out.push(Example::new(x, F::of(label)));
    }
    Ok(out)
}

fn rings<F: Real>(
    spec: &DatasetSpec,
    inner: f64,
    outer: f64,
    width: f64,
) -> Result<Vec<Example<F>>> {
    if spec.input_dim != 3 {
        return Err(Error::Config(format!(
            "rings need input_dim = 3 (two ring coordinates plus the constant lift), got {}",
            spec.input_dim
        )));
    }
    if !(inner > 0.0 && width > 0.0 && inner + width < outer - width) {
        return Err(Error::Config(format!(
            "rings need 0 < inner_radius ({inner}) + ring_width ({width}) < outer_radius ({outer}) - ring_width"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut out = Vec::with_capacity(spec.size);
    for i in 0..spec.size {
        let label = if i % 2 == 0 { 1.0 } else { -1.0 };
        let base = if label > 0.0 { inner } else { outer };
        let r = base + rng.random_range(-width..width);
        let theta = rng.random_range(0.0..std::f64::consts::TAU);
        let x = vec![F::of(r * theta.cos()), F::of(r * theta.sin()), F::one()];
        out.push(Example::new(x, F::of(label)));
    }
    Ok(out)
}

fn load_csv<F: Real>(path: &Path, input_dim: usize) -> Result<Vec<Example<F>>> {
    let text = std::fs::read_to_string(path)?;
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != input_dim + 1 {
            return Err(Error::Csv {
                line: lineno + 1,
                message: format!(
                    "expected {} fields (features plus label), got {}",
                    input_dim + 1,
                    fields.len()
                ),
            });
        }
        let mut x = Vec::with_capacity(input_dim);
        for f in &fields[..input_dim] {
            let v: f64 = f.trim().parse().map_err(|e| Error::Csv {
                line: lineno + 1,
                message: format!("bad feature {f:?}: {e}"),
            })?;
            if !v.is_finite() {
                return Err(Error::Csv {
                    line: lineno + 1,
                    message: format!("non-finite feature {v}"),
                });
            }
            x.push(F::of(v));
        }
        let y: f64 = fields[input_dim].trim().parse().map_err(|e| Error::Csv {
            line: lineno + 1,
            message: format!("bad label {:?}: {e}", fields[input_dim]),
        })?;
        if y != 1.0 && y != -1.0 {
            return Err(Error::Csv {
                line: lineno + 1,
                message: format!("label must be -1 or +1, got {y}"),
            });
        }
        out.push(Example::new(x, F::of(y)));
    }
    if out.is_empty() {
        return Err(Error::Csv {
            line: 0,
            message: "empty csv dataset".into(),
        });
    }
    Ok(out)
}

/// Best accuracy of a linear classifier `sign(w . x)` over a brute-force
/// grid of directions (used as a separability oracle in tests).
pub fn best_linear_accuracy<F: Real>(data: &[Example<F>], directions: usize) -> f64 {
    assert!(!data.is_empty());
    let d = data[0].x.len();
    let mut best: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(12345);
    for k in 0..directions {
        let w: Vec<f64> = if d == 2 {
            let angle = std::f64::consts::TAU * k as f64 / directions as f64;
            vec![angle.cos(), angle.sin()]
        } else {
            (0..d)
                .map(|_| <StandardNormal as Distribution<f64>>::sample(&StandardNormal, &mut rng))
                .collect()
        };
        let mut correct = 0usize;
        for ex in data {
            let s: f64 =
                ex.x.iter()
                    .zip(&w)
                    .map(|(&x, &wi)| x.to_f64_lossy() * wi)
                    .sum();
            let sign = if s > 0.0 {
                1.0
            } else if s < 0.0 {
                -1.0
            } else {
                0.0
            };
            if sign == ex.y.to_f64_lossy() {
                correct += 1;
            }
        }
        let acc = correct as f64 / data.len() as f64;
        best = best.max(acc.max(1.0 - acc)); // sign flip is free
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blobs_are_linearly_separable_at_six_sigma() {
        let spec = DatasetSpec::blobs(200, 2, 6.0, 3);
        let data: Vec<Example<f64>> = make_dataset(&spec).unwrap();
        assert_eq!(data.len(), 200);
        // the generator guarantees a margin along u = (1,1)/sqrt(2)
        let u = 1.0 / 2.0f64.sqrt();
        for ex in &data {
            let proj = ex.x[0] * u + ex.x[1] * u;
            assert!(
                proj * ex.y >= 0.5 - 1e-9,
                "margin violated: {proj} y {}",
                ex.y
            );
        }
        let best = best_linear_accuracy(&data, 256);
        assert_eq!(best, 1.0);
    }

    #[test]
    fn rings_defeat_linear_classifiers() {
        let spec = DatasetSpec::rings(400, 5);
        let data: Vec<Example<f64>> = make_dataset(&spec).unwrap();
        assert_eq!(data.len(), 400);
        assert!(data.iter().all(|ex| ex.x.len() == 3 && ex.x[2] == 1.0));
        // brute force over 3-d directions (the lift makes these affine in
        // the ring plane)
        let best = best_linear_accuracy(&data, 4000);
        assert!(best <= 0.60, "linear classifier reached {best}");
    }

    #[test]
    fn rings_radii_are_respected() {
        let spec = DatasetSpec::rings(300, 9);
        let data: Vec<Example<f64>> = make_dataset(&spec).unwrap();
        for ex in &data {
            let r = (ex.x[0] * ex.x[0] + ex.x[1] * ex.x[1]).sqrt();
            if ex.y > 0.0 {
                assert!((0.96..=1.04).contains(&r), "inner r {r}");
            } else {
                assert!((1.08..=1.16).contains(&r), "outer r {r}");
            }
        }
    }

    #[test]
    fn same_spec_gives_identical_bytes() {
        let spec = DatasetSpec::rings(100, 11);
        let a: Vec<Example<f64>> = make_dataset(&spec).unwrap();
        let b: Vec<Example<f64>> = make_dataset(&spec).unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert_eq!(p.y.to_bits(), q.y.to_bits());
            for (x1, x2) in p.x.iter().zip(&q.x) {
                assert_eq!(x1.to_bits(), x2.to_bits());
            }
        }
    }

    #[test]
    fn rings_reject_bad_dims_and_radii() {
        let mut spec = DatasetSpec::rings(10, 0);
        spec.input_dim = 2;
        assert!(make_dataset::<f64>(&spec).is_err());

        let spec = DatasetSpec {
            kind: DatasetKind::Rings {
                inner_radius: 1.0,
                outer_radius: 1.1,
                ring_width: 0.2,
            },
            size: 10,
            input_dim: 3,
            seed: 0,
        };
        assert!(make_dataset::<f64>(&spec).is_err());
    }

    #[test]
    fn csv_roundtrip_and_errors() {
        let dir = std::env::temp_dir().join("circuitlab_dataset_test");
        std::fs::create_dir_all(&dir).unwrap();
        let ok = dir.join("ok.csv");
        std::fs::write(&ok, "0.5,-0.25,1\n-0.125,0.75,-1\n").unwrap();
        let spec = DatasetSpec {
            kind: DatasetKind::Csv {
                path: ok.to_string_lossy().into_owned(),
            },
            size: 2,
            input_dim: 2,
            seed: 0,
        };
        let data: Vec<Example<f64>> = make_dataset(&spec).unwrap();
        assert_eq!(data.len(), 2);
        assert_eq!(data[0].x, vec![0.5, -0.25]);
        assert_eq!(data[1].y, -1.0);

        let bad = dir.join("bad.csv");
        std::fs::write(&bad, "0.5,-0.25,1\n0.1,oops,1\n").unwrap();
        let spec_bad = DatasetSpec {
            kind: DatasetKind::Csv {
                path: bad.to_string_lossy().into_owned(),
            },
            size: 2,
            input_dim: 2,
            seed: 0,
        };
        match make_dataset::<f64>(&spec_bad) {
            Err(Error::Csv { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn spec_serde_roundtrip() {
        let spec = DatasetSpec::rings(400, 7);
        let json = serde_json::to_string(&spec).unwrap();
        let back: DatasetSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
