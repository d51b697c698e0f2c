use crate::records::Record;
use serde::Serialize;
use std::collections::BTreeMap;
use std::fmt;

/// Fewest sizes for which a slope is reported.
pub const MIN_FIT_POINTS: usize = 4;

/// Ordinary least squares of `ln y` on `ln x`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LogLogFit {
    pub quantity: String,
    pub slope: f64,
    pub intercept: f64,
    /// Root mean square of the fit residuals in `ln y`.
    pub residual: f64,
    pub points: usize,
}

pub fn fit_loglog(quantity: &str, xs: &[f64], ys: &[f64]) -> Option<LogLogFit> {
    if xs.len() != ys.len() || xs.len() < MIN_FIT_POINTS {
        return None;
    }
    if xs.iter().chain(ys).any(|&v| v <= 0.0 || !v.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    Some(LogLogFit {
        quantity: quantity.into(),
        slope,
        intercept,
        residual: (ssr / n).sqrt(),
        points: xs.len(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Band {
    pub quantity: String,
    pub min: f64,
    pub max: f64,
    /// `max / min`.
    pub ratio: f64,
}

pub fn band(quantity: &str, ys: &[f64]) -> Option<Band> {
    if ys.is_empty() {
        return None;
    }
    let min = ys.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ys.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(Band {
        quantity: quantity.into(),
        min,
        max,
        ratio: max / min,
    })
}

/// One series of instances sharing a step schedule.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Series {
    pub label: String,
    pub sides: Vec<usize>,
    pub fits: Vec<LogLogFit>,
    pub bands: Vec<Band>,
}

impl Series {
    pub fn fit(&self, quantity: &str) -> Option<&LogLogFit> {
        self.fits.iter().find(|f| f.quantity == quantity)
    }

    pub fn band(&self, quantity: &str) -> Option<&Band> {
        self.bands.iter().find(|b| b.quantity == quantity)
    }
}

/// A quantity derived from a record, for fitting or banding.
pub struct Quantity {
    pub name: &'static str,
    pub eval: fn(&Record) -> Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScalingReport {
    pub command: String,
    pub series: Vec<Series>,
}

impl ScalingReport {
    /// Groups `records` (already in sweep order) by `label`, fitting each
    /// `fits` quantity against `N` and banding each `bands` quantity.
    pub fn build(
        command: &str,
        records: &[Record],
        label: impl Fn(&Record) -> String,
        fits: &[Quantity],
        bands: &[Quantity],
    ) -> Self {
        let mut order: Vec<String> = Vec::new();
        let mut groups: BTreeMap<String, Vec<&Record>> = BTreeMap::new();
        for r in records {
            let key = label(r);
            if !groups.contains_key(&key) {
                order.push(key.clone());
            }
            groups.entry(key).or_default().push(r);
        }
        let series = order
            .into_iter()
            .map(|key| {
                let rs = &groups[&key];
                let sides = rs.iter().filter_map(|r| r.f64("L")).map(|l| l as usize).collect();
                let fits = fits
                    .iter()
                    .filter_map(|q| {
                        let (xs, ys): (Vec<f64>, Vec<f64>) =
                            rs.iter().filter_map(|r| Some((r.f64("N")?, (q.eval)(r)?))).unzip();
                        fit_loglog(q.name, &xs, &ys)
                    })
                    .collect();
                let bands = bands
                    .iter()
                    .filter_map(|q| {
                        let ys: Vec<f64> = rs.iter().filter_map(|r| (q.eval)(r)).collect();
                        band(q.name, &ys)
                    })
                    .collect();
                Series {
                    label: key,
                    sides,
                    fits,
                    bands,
                }
            })
            .collect();
        Self {
            command: command.into(),
            series,
        }
    }
}

impl fmt::Display for ScalingReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for s in &self.series {
            writeln!(f, "{} {} (L = {:?})", self.command, s.label, s.sides)?;
            for fit in &s.fits {
                writeln!(
                    f,
                    "  slope d ln({}) / d ln N = {:.4} (rms residual {:.2e}, {} points)",
                    fit.quantity, fit.slope, fit.residual, fit.points
                )?;
            }
            if s.fits.is_empty() && s.sides.len() < MIN_FIT_POINTS {
                writeln!(f, "  no slope: fewer than {MIN_FIT_POINTS} sizes")?;
            }
            for b in &s.bands {
                writeln!(
                    f,
                    "  band {}: min {:.6} max {:.6} ratio {:.4}",
                    b.quantity, b.min, b.max, b.ratio
                )?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn needs_four_points() {
        assert!(fit_loglog("y", &[1.0, 2.0, 3.0], &[1.0, 2.0, 3.0]).is_none());
        assert!(fit_loglog("y", &[1.0, 2.0, 3.0, 4.0], &[1.0, 2.0, 3.0, 4.0]).is_some());
    }

    #[test]
    fn band_ratio() {
        let b = band("p", &[0.4, 0.5, 0.2]).unwrap();
        assert_eq!((b.min, b.max), (0.2, 0.5));
        assert!((b.ratio - 2.5).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn exact_power_laws_are_recovered(
            a in 0.1f64..10.0,
            k in -2.0f64..2.0,
            xs in proptest::collection::btree_set(1u32..10_000, 4..10),
        ) {
            let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
            let ys: Vec<f64> = xs.iter().map(|x| a * x.powf(k)).collect();
            let fit = fit_loglog("y", &xs, &ys).unwrap();
            prop_assert!((fit.slope - k).abs() < 1e-9);
            prop_assert!((fit.intercept - a.ln()).abs() < 1e-8);
            prop_assert!(fit.residual < 1e-9);
        }
    }
}
