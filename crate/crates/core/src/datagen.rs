//! Data generation for the shift, amplitude-location-scale, and agnostic
//! models.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::distributions::{design_points, sample_noise, DesignMode, DesignModel, NoiseModel};
use crate::error::{Error, Result};
use crate::templates::Template;

/// Which generative model produced a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum ModelTag {
    Shift { theta_star: f64 },
    LocationScale { beta: f64, xi: f64, nu: f64 },
    Agnostic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetMeta {
    pub tag: ModelTag,
    pub n: usize,
    pub mode: DesignMode,
    pub seed: Option<u64>,
}

/// Paired observations (x_i, y_i) with generation metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub xs: Vec<f64>,
    pub ys: Vec<f64>,
    pub meta: DatasetMeta,
}

impl Dataset {
    pub fn n(&self) -> usize {
        self.xs.len()
    }

    pub fn from_columns(xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::EmptyDataset);
        }
        let n = xs.len();
        Ok(Dataset {
            xs,
            ys,
            meta: DatasetMeta { tag: ModelTag::Agnostic, n, mode: DesignMode::Random, seed: None },
        })
    }

    /// Two-column CSV with header, 17 significant digits per value.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n() * 48 + 4);
        out.push_str("x,y\n");
        for (x, y) in self.xs.iter().zip(&self.ys) {
            out.push_str(&format!("{x:.16e},{y:.16e}\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || (i == 0 && line.starts_with('x')) {
                continue;
            }
            let (x, y) = line
                .split_once(',')
                .ok_or_else(|| Error::BadConfig(format!("csv line {}: missing comma", i + 1)))?;
            xs.push(x.trim().parse::<f64>().map_err(|e| {
                Error::BadConfig(format!("csv line {}: {e}", i + 1))
            })?);
            ys.push(y.trim().parse::<f64>().map_err(|e| {
                Error::BadConfig(format!("csv line {}: {e}", i + 1))
            })?);
        }
        Dataset::from_columns(xs, ys)
    }
}

/// y_i = f(x_i - theta*) + z_i.
pub fn generate_shift<R: Rng + ?Sized>(
    template: &Template,
    theta_star: f64,
    design: &DesignModel,
    noise: &NoiseModel,
    n: usize,
    mode: DesignMode,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let xs = design_points(design, mode, rng, n);
    let zs = sample_noise(noise, rng, n);
    let ys = xs
        .iter()
        .zip(&zs)
        .map(|(&x, &z)| template.shift_eval(x, theta_star) + z)
        .collect();
    Ok(Dataset {
        xs,
        ys,
        meta: DatasetMeta { tag: ModelTag::Shift { theta_star }, n, mode, seed: None },
    })
}

/// y_i = beta* f((x_i - xi*)/nu*) + z_i, nu* > 0.
#[allow(clippy::too_many_arguments)]
pub fn generate_location_scale<R: Rng + ?Sized>(
    template: &Template,
    (beta, xi, nu): (f64, f64, f64),
    design: &DesignModel,
    noise: &NoiseModel,
    n: usize,
    mode: DesignMode,
    rng: &mut R,
) -> Result<Dataset> {
    if nu <= 0.0 || !nu.is_finite() {
        return Err(Error::InvalidScale(nu));
    }
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let xs = design_points(design, mode, rng, n);
    let zs = sample_noise(noise, rng, n);
    let ys = xs
        .iter()
        .zip(&zs)
        .map(|(&x, &z)| beta * template.eval((x - xi) / nu) + z)
        .collect();
    Ok(Dataset {
        xs,
        ys,
        meta: DatasetMeta { tag: ModelTag::LocationScale { beta, xi, nu }, n, mode, seed: None },
    })
}

/// y_i = g(x_i) + z_i for an arbitrary (bounded) regression function g.
/// Boundedness on the design support is the caller's responsibility.
pub fn generate_agnostic<R: Rng + ?Sized, G: Fn(f64) -> f64>(
    g: G,
    design: &DesignModel,
    noise: &NoiseModel,
    n: usize,
    mode: DesignMode,
    rng: &mut R,
) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let xs = design_points(design, mode, rng, n);
    let zs = sample_noise(noise, rng, n);
    let ys = xs.iter().zip(&zs).map(|(&x, &z)| g(x) + z).collect();
    Ok(Dataset {
        xs,
        ys,
        meta: DatasetMeta { tag: ModelTag::Agnostic, n, mode, seed: None },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::derive_rng;

    fn unit() -> DesignModel {
        DesignModel::unit()
    }

    #[test]
    fn zero_noise_shift_is_exact() {
        let c = Template::builtin("C").unwrap();
        let ds = generate_shift(
            &c,
            0.0,
            &unit(),
            &NoiseModel::Degenerate0,
            3,
            DesignMode::Fixed,
            &mut derive_rng(0, 0),
        )
        .unwrap();
        assert_eq!(ds.xs, vec![0.25, 0.5, 0.75]);
        // cadlag evaluation: 1 at 0.25, 1 at 0.5, 0 at 0.75
        assert_eq!(ds.ys, vec![1.0, 1.0, 0.0]);
    }

    #[test]
    fn same_seed_same_dataset() {
        let a = Template::builtin("A").unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let d1 = generate_shift(&a, 0.1, &unit(), &noise, 500, DesignMode::Random, &mut derive_rng(9, 0)).unwrap();
        let d2 = generate_shift(&a, 0.1, &unit(), &noise, 500, DesignMode::Random, &mut derive_rng(9, 0)).unwrap();
        assert_eq!(d1, d2);
    }

    #[test]
    fn location_scale_nests_shift() {
        let e = Template::builtin("E").unwrap();
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let shift = generate_shift(&e, 0.07, &unit(), &noise, 200, DesignMode::Random, &mut derive_rng(1, 2)).unwrap();
        let ls = generate_location_scale(&e, (1.0, 0.07, 1.0), &unit(), &noise, 200, DesignMode::Random, &mut derive_rng(1, 2)).unwrap();
        assert_eq!(shift.xs, ls.xs);
        assert_eq!(shift.ys, ls.ys);
    }

    #[test]
    fn location_scale_pure_amplitude_and_shift() {
        let c = Template::builtin("C").unwrap();
        let amp = generate_location_scale(&c, (2.0, 0.0, 1.0), &unit(), &NoiseModel::Degenerate0, 8, DesignMode::Fixed, &mut derive_rng(0, 0)).unwrap();
        for (&x, &y) in amp.xs.iter().zip(&amp.ys) {
            assert_eq!(y, 2.0 * c.eval(x));
        }
        let sh = generate_location_scale(&c, (1.0, 0.1, 1.0), &unit(), &NoiseModel::Degenerate0, 8, DesignMode::Fixed, &mut derive_rng(0, 0)).unwrap();
        for (&x, &y) in sh.xs.iter().zip(&sh.ys) {
            assert_eq!(y, c.eval(x - 0.1));
        }
        assert!(matches!(
            generate_location_scale(&c, (1.0, 0.0, 0.0), &unit(), &NoiseModel::Degenerate0, 8, DesignMode::Fixed, &mut derive_rng(0, 0)),
            Err(Error::InvalidScale(_))
        ));
    }

    #[test]
    fn agnostic_cases() {
        let noise = NoiseModel::gaussian(1.0).unwrap();
        let zeros = generate_agnostic(|_| 0.0, &unit(), &noise, 100, DesignMode::Random, &mut derive_rng(3, 0)).unwrap();
        // g == 0 reproduces the noise stream drawn after the design points
        let mut rng = derive_rng(3, 0);
        let xs = crate::distributions::design_points(&unit(), DesignMode::Random, &mut rng, 100);
        let zs = sample_noise(&noise, &mut rng, 100);
        assert_eq!(zeros.xs, xs);
        assert_eq!(zeros.ys, zs);

        let c = Template::builtin("C").unwrap();
        let via_g = generate_agnostic(|x| c.eval(x), &unit(), &noise, 64, DesignMode::Random, &mut derive_rng(4, 0)).unwrap();
        let via_shift = generate_shift(&c, 0.0, &unit(), &noise, 64, DesignMode::Random, &mut derive_rng(4, 0)).unwrap();
        assert_eq!(via_g.ys, via_shift.ys);

        let step = generate_agnostic(
            |x| x + if x > 0.5 { 1.0 } else { 0.0 },
            &unit(),
            &NoiseModel::Degenerate0,
            3,
            DesignMode::Fixed,
            &mut derive_rng(0, 0),
        )
        .unwrap();
        assert_eq!(step.ys, vec![0.25, 0.5, 1.75]);
    }

    #[test]
    fn csv_round_trip_is_exact() {
        let a = Template::builtin("A").unwrap();
        let noise = NoiseModel::student_t(3.0).unwrap();
        let ds = generate_shift(&a, 0.03, &unit(), &noise, 257, DesignMode::Random, &mut derive_rng(11, 5)).unwrap();
        let csv = ds.to_csv();
        assert!(csv.starts_with("x,y\n"));
        let back = Dataset::from_csv(&csv).unwrap();
        assert_eq!(back.xs, ds.xs);
        assert_eq!(back.ys, ds.ys);
    }
}
