//! Randomized property table for the conformable derivative: linearity, power,
//! constant, product and quotient rules, and agreement of the limit and smooth
//! forms. A case passes when both sides agree within ten times the summed
//! truncation errors reported by the limit evaluator.

use conformable::rng::{stream_rng, StreamTag};
use conformable::{
    conformable_derivative_limit, conformable_derivative_smooth, EpsSchedule, FractionalOrder, Result,
    ScalarFunction,
};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const PROPERTIES: [&str; 6] = ["linearity", "power", "constant", "product", "quotient", "smooth"];

pub const HEADER: [&str; 8] = ["property", "case", "alpha", "t", "lhs", "rhs", "tolerance", "pass"];

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRow {
    pub property: &'static str,
    pub case: usize,
    pub alpha: f64,
    pub t: f64,
    pub lhs: f64,
    pub rhs: f64,
    pub tolerance: f64,
}

impl PropertyRow {
    pub fn pass(&self) -> bool {
        (self.lhs - self.rhs).abs() <= self.tolerance
    }
}

/// `a0 + a1 t + a2 t^2 + a3 sin(w t)`.
#[derive(Debug, Clone, Copy)]
struct Smooth {
    a: [f64; 4],
    w: f64,
}

impl Smooth {
    fn random(rng: &mut ChaCha8Rng) -> Self {
        Self {
            a: [0; 4].map(|_| rng.random_range(-2.0..2.0)),
            w: rng.random_range(0.2..2.0),
        }
    }

    /// Stays within `[1, 3]` for `t` in `(0, 5]`.
    fn positive(rng: &mut ChaCha8Rng) -> Self {
        Self {
            a: [rng.random_range(1.5..2.5), rng.random_range(-0.05..0.05), rng.random_range(-0.02..0.02), 0.0],
            w: 1.0,
        }
    }

    fn eval(&self, t: f64) -> f64 {
        self.a[0] + self.a[1] * t + self.a[2] * t * t + self.a[3] * (self.w * t).sin()
    }

    fn deriv(&self, t: f64) -> f64 {
        self.a[1] + 2.0 * self.a[2] * t + self.a[3] * self.w * (self.w * t).cos()
    }
}

fn limit(f: impl Fn(f64) -> f64 + Send + Sync + 'static, o: FractionalOrder, t: f64) -> Result<(f64, f64)> {
    let e = conformable_derivative_limit(&ScalarFunction::new(f), o, t, &EpsSchedule::default())?;
    Ok((e.value, e.error))
}

fn case(property: &'static str, o: FractionalOrder, t: f64, rng: &mut ChaCha8Rng) -> Result<(f64, f64, f64)> {
    Ok(match property {
        "linearity" => {
            let (f, g) = (Smooth::random(rng), Smooth::random(rng));
            let (c, d) = (rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0));
            let (tf, ef) = limit(move |x| f.eval(x), o, t)?;
            let (tg, eg) = limit(move |x| g.eval(x), o, t)?;
            let (ts, es) = limit(move |x| c * f.eval(x) + d * g.eval(x), o, t)?;
            (ts, c * tf + d * tg, es + c.abs() * ef + d.abs() * eg)
        }
        "power" => {
            let p = [-1.0, 0.5, 1.0, 2.0, 3.0][rng.random_range(0..5)];
            let c = rng.random_range(-2.0..2.0);
            let (v, e) = limit(move |x: f64| c * x.powf(p), o, t)?;
            (v, c * p * t.powf(p - o.alpha()), e)
        }
        "constant" => {
            let c = rng.random_range(-10.0..10.0);
            let (v, e) = limit(move |_| c, o, t)?;
            (v, 0.0, e)
        }
        "product" => {
            let (f, g) = (Smooth::random(rng), Smooth::random(rng));
            let (tf, ef) = limit(move |x| f.eval(x), o, t)?;
            let (tg, eg) = limit(move |x| g.eval(x), o, t)?;
            let (tp, ep) = limit(move |x| f.eval(x) * g.eval(x), o, t)?;
            let (fv, gv) = (f.eval(t), g.eval(t));
            (tp, fv * tg + gv * tf, ep + fv.abs() * eg + gv.abs() * ef)
        }
        "quotient" => {
            let (f, g) = (Smooth::random(rng), Smooth::positive(rng));
            let (tf, ef) = limit(move |x| f.eval(x), o, t)?;
            let (tg, eg) = limit(move |x| g.eval(x), o, t)?;
            let (tq, eq) = limit(move |x| f.eval(x) / g.eval(x), o, t)?;
            let (fv, gv) = (f.eval(t), g.eval(t));
            (tq, (gv * tf - fv * tg) / (gv * gv), eq + (gv.abs() * ef + fv.abs() * eg) / (gv * gv))
        }
        "smooth" => {
            let f = Smooth::random(rng);
            let sf = ScalarFunction::with_derivative(move |x| f.eval(x), move |x| f.deriv(x));
            let e = conformable_derivative_limit(&sf, o, t, &EpsSchedule::default())?;
            (e.value, conformable_derivative_smooth(&sf, o, t)?, e.error)
        }
        other => unreachable!("unknown property {other}"),
    })
}

/// Runs `cases` random functions per property; case `i` is evaluated at
/// `points[i % points.len()]`. Property `p` draws from its own stream so rows
/// do not depend on which other properties are run.
pub fn property_table(points: &[(FractionalOrder, f64)], cases: usize, seed: u64) -> Result<Vec<PropertyRow>> {
    if points.is_empty() || points.iter().any(|(_, t)| !(*t > 0.0 && *t <= 5.0)) {
        return Err(conformable::Error::Contract(
            "property checks need at least one point with 0 < t <= 5".into(),
        ));
    }
    let mut rows = Vec::with_capacity(cases * PROPERTIES.len());
    for (pi, property) in PROPERTIES.iter().enumerate() {
        let mut rng = stream_rng(seed, StreamTag::Properties, pi as u64);
        for i in 0..cases {
            let (o, t) = points[i % points.len()];
            let (lhs, rhs, err) = case(property, o, t, &mut rng)?;
            rows.push(PropertyRow {
                property,
                case: i,
                alpha: o.alpha(),
                t,
                lhs,
                rhs,
                tolerance: 10.0 * err,
            });
        }
    }
    Ok(rows)
}
