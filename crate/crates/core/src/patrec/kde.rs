//! Gaussian kernel density estimation and dominance-region extraction.

/// Silverman's rule-of-thumb bandwidth: `0.9 min(sigma, IQR/1.34) n^{-1/5}`.
/// Falls back to whichever spread measure is positive.
pub fn silverman_bandwidth(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    let sigma = var.sqrt();
    let mut sorted = xs.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile(&sorted, 0.75) - quantile(&sorted, 0.25);
    let spread = match (sigma > 0.0, iqr > 0.0) {
        (true, true) => sigma.min(iqr / 1.34),
        (true, false) => sigma,
        (false, true) => iqr / 1.34,
        (false, false) => return 0.0,
    };
    0.9 * spread * n.powf(-0.2)
}

/// Linear-interpolated quantile of a sorted slice.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        let w = pos - lo as f64;
        sorted[lo] * (1.0 - w) + sorted[hi] * w
    }
}

/// Gaussian KDE of `xs` with bandwidth `h`, evaluated on `grid`.
pub fn gaussian_kde(xs: &[f64], h: f64, grid: &[f64]) -> Vec<f64> {
    let norm = 1.0 / (xs.len() as f64 * h * (2.0 * std::f64::consts::PI).sqrt());
    grid.iter()
        .map(|&g| {
            let s: f64 = xs
                .iter()
                .map(|&x| {
                    let z = (g - x) / h;
                    (-0.5 * z * z).exp()
                })
                .sum();
            norm * s
        })
        .collect()
}

/// Intervals of the pooled sample range where the density of `first`
/// exceeds the density of `second`, read off a `grid_points`-point grid.
///
/// Bandwidths follow Silverman's rule per sample; a degenerate (zero-spread)
/// sample falls back to one percent of the pooled range. Returns an empty
/// list when the pooled range itself is degenerate or no grid point is
/// dominated.
pub fn dominance_regions(first: &[f64], second: &[f64], grid_points: usize) -> Vec<(f64, f64)> {
    debug_assert!(grid_points >= 2);
    let lo = first
        .iter()
        .chain(second)
        .cloned()
        .fold(f64::INFINITY, f64::min);
    let hi = first
        .iter()
        .chain(second)
        .cloned()
        .fold(f64::NEG_INFINITY, f64::max);
    if !(hi > lo) {
        return Vec::new();
    }
    let fallback = 0.01 * (hi - lo);
    let h1 = positive_or(silverman_bandwidth(first), fallback);
    let h2 = positive_or(silverman_bandwidth(second), fallback);

    let step = (hi - lo) / (grid_points - 1) as f64;
    let grid: Vec<f64> = (0..grid_points).map(|i| lo + step * i as f64).collect();
    let d1 = gaussian_kde(first, h1, &grid);
    let d2 = gaussian_kde(second, h2, &grid);

    let mut regions = Vec::new();
    let mut run_start: Option<usize> = None;
    for i in 0..grid_points {
        if d1[i] > d2[i] {
            run_start.get_or_insert(i);
        } else if let Some(s) = run_start.take() {
            regions.push((grid[s], grid[i - 1]));
        }
    }
    if let Some(s) = run_start {
        regions.push((grid[s], grid[grid_points - 1]));
    }
    regions
}

fn positive_or(h: f64, fallback: f64) -> f64 {
    if h > 0.0 {
        h
    } else {
        fallback
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kde_integrates_to_one() {
        let xs: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin() * 2.0).collect();
        let h = silverman_bandwidth(&xs);
        assert!(h > 0.0);
        // integrate over a range well beyond the sample
        let grid: Vec<f64> = (0..4000).map(|i| -8.0 + i as f64 * 0.004).collect();
        let dens = gaussian_kde(&xs, h, &grid);
        let integral: f64 = dens.iter().sum::<f64>() * 0.004;
        assert!((integral - 1.0).abs() < 0.02, "integral {integral}");
    }

    #[test]
    fn shifted_samples_dominate_upper_half() {
        // Class II on [0,1], Class I on [10,11]: the class-I regions sit in
        // the upper half of the pooled range.
        let second: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let first: Vec<f64> = second.iter().map(|v| v + 10.0).collect();
        let regions = dominance_regions(&first, &second, 512);
        assert!(!regions.is_empty());
        let mid = 5.5;
        for (lo, hi) in &regions {
            assert!(*lo > mid, "region ({lo}, {hi}) not in upper half");
            assert!(hi > lo);
        }
        // the class-I bulk is dominated
        assert!(regions.iter().any(|&(lo, hi)| lo < 10.2 && hi > 10.8));
    }

    #[test]
    fn identical_samples_yield_nothing_usable() {
        let xs: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let regions = dominance_regions(&xs, &xs, 512);
        // identical densities: no strict dominance anywhere
        assert!(regions.is_empty());
    }

    #[test]
    fn degenerate_pooled_range_is_empty() {
        let xs = vec![1.0; 20];
        assert!(dominance_regions(&xs, &xs, 512).is_empty());
    }

    #[test]
    fn degenerate_sample_against_spread_sample() {
        // zero-spread class I: fallback bandwidth still produces a region
        // around the atom
        let first = vec![5.0; 30];
        let second: Vec<f64> = (0..100).map(|i| i as f64 / 10.0).collect();
        let regions = dominance_regions(&first, &second, 512);
        assert!(regions.iter().any(|&(lo, hi)| lo <= 5.0 && 5.0 <= hi));
    }
}
