use crate::CliError;

/// Default tolerance band for [`saturation_detect`].
pub const SATURATION_REL_TOL: f64 = 0.05;

/// Fraction of the curve, taken from the end, that defines the plateau.
pub const PLATEAU_FRACTION: f64 = 0.2;

/// First-order Savitzky–Golay filter on a uniformly sampled series. Near the
/// ends the window is truncated to the available points, and the line fitted
/// there is evaluated at the point itself.
pub fn smooth_curve(values: &[f64], window: usize) -> Result<Vec<f64>, CliError> {
    if window < 3 || window % 2 == 0 {
        return Err(CliError::Analysis(format!("window must be odd and at least 3, got {window}")));
    }
    if window > values.len() {
        return Err(CliError::Analysis(format!(
            "window {window} exceeds series length {}",
            values.len()
        )));
    }
    let half = window / 2;
    let n = values.len();
    Ok((0..n)
        .map(|i| {
            let lo = i.saturating_sub(half);
            let hi = (i + half).min(n - 1);
            let m = (hi - lo + 1) as f64;
            let xm = (lo + hi) as f64 / 2.0;
            let ym = values[lo..=hi].iter().sum::<f64>() / m;
            let (mut sxy, mut sxx) = (0.0, 0.0);
            for (j, y) in values[lo..=hi].iter().enumerate() {
                let dx = (lo + j) as f64 - xm;
                sxy += dx * (y - ym);
                sxx += dx * dx;
            }
            ym + (sxy / sxx) * (i as f64 - xm)
        })
        .collect())
}

/// Pearson correlation of two equally shaped flattened grids.
pub fn correlation_report(a: &[f64], b: &[f64]) -> Result<f64, CliError> {
    if a.len() != b.len() {
        return Err(CliError::Analysis(format!("grid sizes differ: {} vs {}", a.len(), b.len())));
    }
    if a.len() < 2 {
        return Err(CliError::Analysis("need at least two grid points".into()));
    }
    if a.iter().chain(b).any(|x| !x.is_finite()) {
        return Err(CliError::Analysis("grids contain non-finite values".into()));
    }
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma).powi(2);
        sbb += (y - mb).powi(2);
    }
    if saa == 0.0 || sbb == 0.0 {
        return Err(CliError::Analysis("constant field has no correlation".into()));
    }
    Ok((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Saturation {
    /// `None` when the curve never settles.
    pub t_sat: Option<f64>,
    /// Mean of the last [`PLATEAU_FRACTION`] of the (smoothed) curve.
    pub plateau: f64,
}

/// Saturation time of the curve `(ts, values)`, with `ts` ascending.
///
/// The curve is smoothed with `window` (clamped to the longest odd length
/// that fits; `None` disables smoothing). The band is `rel_tol` times the
/// curve's range. `T_sat` is the first `T` after which every point stays
/// within the band around the plateau. A curve whose own tail spreads over
/// more than twice the band has no plateau.
pub fn saturation_detect(
    ts: &[f64],
    values: &[f64],
    rel_tol: f64,
    window: Option<usize>,
) -> Result<Saturation, CliError> {
    if ts.len() != values.len() {
        return Err(CliError::Analysis("T and value series differ in length".into()));
    }
    if ts.len() < 5 {
        return Err(CliError::Analysis(format!("need at least 5 points, got {}", ts.len())));
    }
    if ts.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(CliError::Analysis("T values must be strictly increasing".into()));
    }
    if !(rel_tol > 0.0) {
        return Err(CliError::Analysis("rel_tol must be positive".into()));
    }
    let smoothed = match window {
        Some(w) => {
            let mut w = w.min(values.len());
            if w % 2 == 0 {
                w -= 1;
            }
            if w >= 3 {
                smooth_curve(values, w)?
            } else {
                values.to_vec()
            }
        }
        None => values.to_vec(),
    };
    let n = smoothed.len();
    let tail = ((n as f64 * PLATEAU_FRACTION).ceil() as usize).clamp(2, n);
    let tail_vals = &smoothed[n - tail..];
    let plateau = tail_vals.iter().sum::<f64>() / tail as f64;
    let (lo, hi) = min_max(&smoothed);
    let band = rel_tol * (hi - lo);
    let (tlo, thi) = min_max(tail_vals);
    if thi - tlo > 2.0 * band {
        return Ok(Saturation { t_sat: None, plateau });
    }
    let mut first = n;
    for i in (0..n).rev() {
        if (smoothed[i] - plateau).abs() > band {
            break;
        }
        first = i;
    }
    Ok(Saturation {
        t_sat: (first < n).then(|| ts[first]),
        plateau,
    })
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn smoothing_reproduces_lines() {
        let c = vec![2.5; 20];
        assert_eq!(smooth_curve(&c, 5).unwrap(), c);
        let ramp: Vec<f64> = (0..30).map(|i| 0.3 * i as f64 - 4.0).collect();
        for (a, b) in smooth_curve(&ramp, 11).unwrap().iter().zip(&ramp) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn smoothing_alternating_series() {
        let alt: Vec<f64> = (0..9).map(|i| if i % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let s = smooth_curve(&alt, 3).unwrap();
        for i in 1..8 {
            assert!((s[i] + alt[i] / 3.0).abs() < 1e-12, "{i}: {}", s[i]);
        }
    }

    #[test]
    fn smoothing_rejects_bad_windows() {
        assert!(smooth_curve(&[1.0; 10], 4).is_err());
        assert!(smooth_curve(&[1.0; 10], 1).is_err());
        assert!(smooth_curve(&[1.0; 10], 11).is_err());
    }

    #[test]
    fn pearson_limits() {
        let a = [1.0, 4.0, 2.0, 8.0];
        let neg: Vec<f64> = a.iter().map(|x| -x).collect();
        assert!((correlation_report(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        assert!((correlation_report(&a, &neg).unwrap() + 1.0).abs() < 1e-12);
        assert!(correlation_report(&a, &[3.0; 4]).is_err());
        assert!(correlation_report(&a, &a[..3]).is_err());
    }

    #[test]
    fn step_saturates_at_its_edge() {
        let ts: Vec<f64> = (1..=40).map(f64::from).collect();
        let ys: Vec<f64> = ts.iter().map(|&t| if t >= 12.0 { 10.0 } else { 0.0 }).collect();
        let s = saturation_detect(&ts, &ys, SATURATION_REL_TOL, None).unwrap();
        assert_eq!(s.t_sat, Some(12.0));
        assert_eq!(s.plateau, 10.0);
    }

    #[test]
    fn unbounded_ramp_has_no_plateau() {
        let ts: Vec<f64> = (1..=40).map(f64::from).collect();
        for w in [None, Some(11)] {
            let s = saturation_detect(&ts, &ts, SATURATION_REL_TOL, w).unwrap();
            assert_eq!(s.t_sat, None);
        }
    }

    #[test]
    fn saturation_needs_five_points() {
        assert!(saturation_detect(&[1.0, 2.0, 3.0, 4.0], &[0.0; 4], 0.05, None).is_err());
    }

    proptest! {
        #[test]
        fn smoothing_is_linear(
            a in prop::collection::vec(-10.0f64..10.0, 11..40),
            k in -3.0f64..3.0,
        ) {
            let b: Vec<f64> = a.iter().rev().cloned().collect();
            let combo: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + k * y).collect();
            let lhs = smooth_curve(&combo, 7).unwrap();
            let sa = smooth_curve(&a, 7).unwrap();
            let sb = smooth_curve(&b, 7).unwrap();
            for i in 0..a.len() {
                prop_assert!((lhs[i] - sa[i] - k * sb[i]).abs() < 1e-9);
            }
        }

        #[test]
        fn saturation_time_lies_on_grid(ys in prop::collection::vec(0.0f64..5.0, 5..50)) {
            let ts: Vec<f64> = (0..ys.len()).map(|i| 0.5 * i as f64 + 1.0).collect();
            let s = saturation_detect(&ts, &ys, 0.05, Some(5)).unwrap();
            if let Some(t) = s.t_sat {
                prop_assert!(ts.contains(&t));
            }
        }
    }
}
