//! Templates: the known compactly supported signal shapes matched against
//! noisy data.
//!
//! A template is a piecewise polynomial, cadlag at every jump (the value at a
//! discontinuity is the right limit). Jump locations and sizes are declared,
//! not probed: the estimator and the limit-law constants read them
//! symbolically.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smoothness class of a template away from its discontinuities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Smoothness {
    Lipschitz,
    PiecewiseLipschitz,
    Holder(f64),
}

/// A declared jump: `jump = f(d+) - f(d-)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Discontinuity {
    pub location: f64,
    pub jump: f64,
}

/// One polynomial piece, valid on `[lo, hi)`, coefficients in ascending
/// powers of x.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub lo: f64,
    pub hi: f64,
    pub coeffs: Vec<f64>,
}

impl Piece {
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// Coefficients of the derivative polynomial.
    pub fn derivative_coeffs(&self) -> Vec<f64> {
        self.coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| k as f64 * c)
            .collect()
    }

    /// True if the piece is a constant function.
    pub fn is_constant(&self) -> bool {
        self.coeffs.iter().skip(1).all(|&c| c == 0.0)
    }

    pub fn constant_value(&self) -> f64 {
        self.coeffs.first().copied().unwrap_or(0.0)
    }
}

/// A template function with its declared structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Template {
    name: String,
    pieces: Vec<Piece>,
    support: (f64, f64),
    smoothness: Smoothness,
    discontinuities: Vec<Discontinuity>,
    periodic: bool,
    lipschitz_bound: f64,
}

impl Template {
    /// Assemble and validate a template from its pieces.
    ///
    /// Pieces must be sorted, non-overlapping and non-empty; every declared
    /// discontinuity must sit on a piece edge and match the actual jump of
    /// the piecewise definition there.
    pub fn from_parts(
        name: impl Into<String>,
        pieces: Vec<Piece>,
        smoothness: Smoothness,
        discontinuities: Vec<Discontinuity>,
        periodic: bool,
        lipschitz_bound: f64,
    ) -> Result<Self> {
        let name = name.into();
        if pieces.is_empty() {
            return Err(Error::BadConfig(format!("template {name}: no pieces")));
        }
        for w in pieces.windows(2) {
            if w[0].hi > w[1].lo {
                return Err(Error::BadConfig(format!(
                    "template {name}: overlapping pieces at {}",
                    w[1].lo
                )));
            }
        }
        for p in &pieces {
            if !(p.lo < p.hi) || !p.lo.is_finite() {
                return Err(Error::BadConfig(format!(
                    "template {name}: bad piece interval [{}, {})",
                    p.lo, p.hi
                )));
            }
        }
        let support = (pieces[0].lo, pieces[pieces.len() - 1].hi);
        if periodic && !(support.0 >= 0.0 && support.1 <= 1.0) {
            return Err(Error::BadConfig(format!(
                "template {name}: periodic templates live on [0, 1)"
            )));
        }
        let t = Template {
            name,
            pieces,
            support,
            smoothness,
            discontinuities,
            periodic,
            lipschitz_bound,
        };
        t.check_declared_jumps()?;
        Ok(t)
    }

    fn check_declared_jumps(&self) -> Result<()> {
        for d in &self.discontinuities {
            if d.jump == 0.0 {
                return Err(Error::BadConfig(format!(
                    "template {}: declared zero jump at {}",
                    self.name, d.location
                )));
            }
            let actual = self.eval_right(d.location) - self.eval_left(d.location);
            if (actual - d.jump).abs() > 1e-9 * d.jump.abs().max(1.0) {
                return Err(Error::BadConfig(format!(
                    "template {}: declared jump {} at {} but pieces give {}",
                    self.name, d.jump, d.location, actual
                )));
            }
        }
        Ok(())
    }

    /// f(x). Zero outside the pieces; periodic templates reduce x modulo 1
    /// first.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        let x = if self.periodic { x.rem_euclid(1.0) } else { x };
        self.eval_right(x)
    }

    /// f(x - theta).
    #[inline]
    pub fn shift_eval(&self, x: f64, theta: f64) -> f64 {
        self.eval(x - theta)
    }

    #[inline]
    fn eval_right(&self, x: f64) -> f64 {
        for p in &self.pieces {
            if x < p.lo {
                return 0.0;
            }
            if x < p.hi {
                return p.eval(x);
            }
        }
        0.0
    }

    /// Left limit of f at x (the polynomial of the piece ending at x).
    fn eval_left(&self, x: f64) -> f64 {
        for p in &self.pieces {
            if x > p.lo && x <= p.hi {
                return p.eval(x);
            }
        }
        0.0
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support(&self) -> (f64, f64) {
        self.support
    }

    pub fn smoothness(&self) -> Smoothness {
        self.smoothness
    }

    pub fn discontinuities(&self) -> &[Discontinuity] {
        &self.discontinuities
    }

    pub fn is_periodic(&self) -> bool {
        self.periodic
    }

    pub fn lipschitz_bound(&self) -> f64 {
        self.lipschitz_bound
    }

    pub fn pieces(&self) -> &[Piece] {
        &self.pieces
    }

    /// All piece edges: jump locations plus kinks. Used to split quadrature
    /// panels and to seed breakpoint-aware searches.
    pub fn edges(&self) -> Vec<f64> {
        let mut e = Vec::with_capacity(2 * self.pieces.len());
        for p in &self.pieces {
            e.push(p.lo);
            if p.hi.is_finite() {
                e.push(p.hi);
            }
        }
        e.dedup();
        e
    }

    /// Periodic variant of this template (period 1, algebra modulo 1).
    pub fn into_periodic(mut self) -> Result<Self> {
        if !(self.support.0 >= 0.0 && self.support.1 <= 1.0) {
            return Err(Error::BadConfig(format!(
                "template {}: periodic templates live on [0, 1)",
                self.name
            )));
        }
        self.periodic = true;
        Ok(self)
    }

    /// One of the built-in templates: `A`..`E` or `stump:<a>`.
    pub fn builtin(name: &str) -> Result<Self> {
        match name {
            "A" => Template::from_parts(
                "A",
                vec![
                    Piece { lo: 0.25, hi: 0.5, coeffs: vec![-1.0, 4.0] },
                    Piece { lo: 0.5, hi: 0.75, coeffs: vec![3.0, -4.0] },
                ],
                Smoothness::Lipschitz,
                vec![],
                false,
                4.0,
            ),
            // max(0, (1 - (4x-2)^2)^3) expanded in powers of x on [0.25, 0.75)
            "B" => Template::from_parts(
                "B",
                vec![Piece {
                    lo: 0.25,
                    hi: 0.75,
                    coeffs: vec![-27.0, 432.0, -2736.0, 8704.0, -14592.0, 12288.0, -4096.0],
                }],
                Smoothness::Lipschitz,
                vec![],
                false,
                6.87,
            ),
            "C" => Template::from_parts(
                "C",
                vec![Piece { lo: 0.25, hi: 0.75, coeffs: vec![1.0] }],
                Smoothness::PiecewiseLipschitz,
                vec![
                    Discontinuity { location: 0.25, jump: 1.0 },
                    Discontinuity { location: 0.75, jump: -1.0 },
                ],
                false,
                0.0,
            ),
            "D" => Template::from_parts(
                "D",
                vec![
                    Piece { lo: 0.2, hi: 0.4, coeffs: vec![1.0] },
                    Piece { lo: 0.6, hi: 0.8, coeffs: vec![1.0] },
                ],
                Smoothness::PiecewiseLipschitz,
                vec![
                    Discontinuity { location: 0.2, jump: 1.0 },
                    Discontinuity { location: 0.4, jump: -1.0 },
                    Discontinuity { location: 0.6, jump: 1.0 },
                    Discontinuity { location: 0.8, jump: -1.0 },
                ],
                false,
                0.0,
            ),
            "E" => Template::from_parts(
                "E",
                vec![Piece { lo: 0.25, hi: 0.5, coeffs: vec![-1.0, 4.0] }],
                Smoothness::PiecewiseLipschitz,
                vec![Discontinuity { location: 0.5, jump: -1.0 }],
                false,
                4.0,
            ),
            other => {
                if let Some(arg) = other.strip_prefix("stump:") {
                    let a: f64 = arg
                        .parse()
                        .map_err(|_| Error::UnknownTemplate(other.to_string()))?;
                    if a == 0.0 || !a.is_finite() {
                        return Err(Error::BadConfig("stump amplitude must be nonzero".into()));
                    }
                    return Template::from_parts(
                        other,
                        vec![Piece { lo: 0.0, hi: f64::INFINITY, coeffs: vec![a] }],
                        Smoothness::PiecewiseLipschitz,
                        vec![Discontinuity { location: 0.0, jump: a }],
                        false,
                        0.0,
                    );
                }
                Err(Error::UnknownTemplate(other.to_string()))
            }
        }
    }

    /// Load a custom template from its JSON description.
    pub fn from_json(json: &str) -> Result<Self> {
        let raw: Template = serde_json::from_str(json)
            .map_err(|e| Error::BadConfig(format!("template json: {e}")))?;
        Template::from_parts(
            raw.name,
            raw.pieces,
            raw.smoothness,
            raw.discontinuities,
            raw.periodic,
            raw.lipschitz_bound,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn builtin_values() {
        let a = Template::builtin("A").unwrap();
        assert_relative_eq!(a.eval(0.5), 1.0, epsilon = 1e-15);
        let c = Template::builtin("C").unwrap();
        assert_eq!(c.eval(0.5), 1.0);
        let e = Template::builtin("E").unwrap();
        assert_eq!(e.eval(0.5), 0.0); // cadlag: right limit at the jump
        for name in ["A", "B", "C", "D", "E"] {
            assert_eq!(Template::builtin(name).unwrap().eval(-10.0), 0.0);
        }
    }

    #[test]
    fn builtin_discontinuity_lists() {
        let c = Template::builtin("C").unwrap();
        let jumps: Vec<f64> = c.discontinuities().iter().map(|d| d.jump).collect();
        assert_eq!(jumps, vec![1.0, -1.0]);
        assert!(Template::builtin("A").unwrap().discontinuities().is_empty());
        let e = Template::builtin("E").unwrap();
        assert_eq!(e.discontinuities().len(), 1);
        assert_eq!(e.discontinuities()[0].location, 0.5);
        assert_eq!(e.discontinuities()[0].jump, -1.0);
        assert!(Template::builtin("F").is_err());
    }

    #[test]
    fn shift_eval_shifts() {
        let c = Template::builtin("C").unwrap();
        assert_eq!(c.shift_eval(0.5, 0.3), 0.0); // 0.2 < 0.25
        let a = Template::builtin("A").unwrap();
        for x in [0.1, 0.3, 0.5, 0.7, 0.9] {
            assert_eq!(a.shift_eval(x, 0.0), a.eval(x));
        }
    }

    #[test]
    fn periodic_box_wraps() {
        let c = Template::builtin("C").unwrap().into_periodic().unwrap();
        // x - theta = -0.4, reduced mod 1 -> 0.6, inside the box
        assert_eq!(c.shift_eval(0.1, 0.5), 1.0);
        assert_eq!(c.eval(1.5), 1.0);
    }

    #[test]
    fn declared_jumps_match_probed_limits() {
        for name in ["C", "D", "E", "stump:2.5"] {
            let t = Template::builtin(name).unwrap();
            for d in t.discontinuities() {
                let probed = t.eval(d.location + 1e-9) - t.eval(d.location - 1e-9);
                assert_relative_eq!(probed, d.jump, epsilon = 1e-6);
                // cadlag: the value at d is the right limit
                assert_relative_eq!(t.eval(d.location), t.eval(d.location + 1e-12), epsilon = 1e-9);
            }
        }
    }

    #[test]
    fn mismatched_declaration_rejected() {
        let r = Template::from_parts(
            "bad",
            vec![Piece { lo: 0.0, hi: 1.0, coeffs: vec![1.0] }],
            Smoothness::PiecewiseLipschitz,
            vec![Discontinuity { location: 0.5, jump: 1.0 }],
            false,
            0.0,
        );
        assert!(r.is_err());
    }

    #[test]
    fn template_b_has_continuous_derivative() {
        // |f''| reaches 96, so the one-sided difference gap at step h is
        // about 96 h; h = 1e-6 keeps a true kink visible far above it
        let b = Template::builtin("B").unwrap();
        let h = 1e-6;
        for x in [0.25, 0.5, 0.75] {
            let left = (b.eval(x) - b.eval(x - h)) / h;
            let right = (b.eval(x + h) - b.eval(x)) / h;
            assert!((left - right).abs() < 1e-4, "kink at {x}: {left} vs {right}");
        }
    }

    #[test]
    fn json_round_trip() {
        let c = Template::builtin("C").unwrap();
        let json = serde_json::to_string(&c).unwrap();
        let back = Template::from_json(&json).unwrap();
        assert_eq!(back, c);
    }

    proptest! {
        #[test]
        fn shifted_jump_locations(theta in -0.5f64..0.5, idx in 0usize..4) {
            let d_list = Template::builtin("D").unwrap();
            let d = d_list.discontinuities()[idx];
            let shifted = d.location + theta;
            let probe = d_list.shift_eval(shifted + 1e-9, theta)
                - d_list.shift_eval(shifted - 1e-9, theta);
            prop_assert!((probe - d.jump).abs() < 1e-6);
        }

        #[test]
        fn lipschitz_within_smooth_piece(x1 in 0.26f64..0.49, x2 in 0.26f64..0.49) {
            for name in ["A", "B", "E"] {
                let t = Template::builtin(name).unwrap();
                let bound = t.lipschitz_bound() * (x1 - x2).abs() + 1e-12;
                prop_assert!((t.eval(x1) - t.eval(x2)).abs() <= bound);
            }
        }

        #[test]
        fn zero_outside_support(x in prop::sample::select(vec![-5.0, -1.0, 0.9, 2.0, 100.0])) {
            for name in ["A", "B", "C", "D", "E"] {
                let t = Template::builtin(name).unwrap();
                prop_assert_eq!(t.eval(x), 0.0);
            }
        }
    }
}
