use serde::{Deserialize, Serialize};

/// Photon-energy bin edges for spectrum tallies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumBins {
    pub u_min: f64,
    pub u_max: f64,
    pub n_bins: usize,
    #[serde(default = "default_log")]
    pub log: bool,
}

fn default_log() -> bool {
    true
}

impl SpectrumBins {
    pub fn edges(&self) -> Vec<f64> {
        let n = self.n_bins;
        (0..=n)
            .map(|k| {
                let s = k as f64 / n as f64;
                if self.log {
                    self.u_min * (self.u_max / self.u_min).powf(s)
                } else {
                    self.u_min + s * (self.u_max - self.u_min)
                }
            })
            .collect()
    }

    pub(crate) fn validate(&self) -> Result<(), String> {
        if !(self.u_min > 0.0 && self.u_max > self.u_min && self.n_bins > 0) {
            return Err("need 0 < u_min < u_max and n_bins > 0".into());
        }
        Ok(())
    }
}

/// Histogram estimate of the specific intensity, `sum w / (4 pi V du)` per bin.
pub fn spectrum_tally(
    entries: impl IntoIterator<Item = (f64, f64)>,
    edges: &[f64],
    volume: f64,
) -> Vec<f64> {
    let n = edges.len().saturating_sub(1);
    let mut h = vec![0.0; n];
    if n == 0 {
        return h;
    }
    for (w, u) in entries {
        if u < edges[0] || u >= edges[n] {
            continue;
        }
        let k = edges.partition_point(|&e| e <= u) - 1;
        h[k] += w;
    }
    let norm = 4.0 * std::f64::consts::PI * volume;
    for (k, v) in h.iter_mut().enumerate() {
        *v /= norm * (edges[k + 1] - edges[k]);
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_bin_and_empty() {
        let edges = [0.0, 1.0, 3.0];
        let h = spectrum_tally([(2.0, 1.5), (1.0, 2.5)], &edges, 0.5);
        assert_eq!(h[0], 0.0);
        assert!((h[1] - 3.0 / (4.0 * std::f64::consts::PI * 0.5 * 2.0)).abs() < 1e-15);
        assert!(spectrum_tally([], &edges, 1.0).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn integral_recovers_weight() {
        let edges = SpectrumBins {
            u_min: 0.01,
            u_max: 10.0,
            n_bins: 37,
            log: true,
        }
        .edges();
        let e: Vec<(f64, f64)> = (1..500)
            .map(|k| (k as f64 * 0.1, k as f64 * 0.019))
            .collect();
        let inside: f64 = e
            .iter()
            .filter(|p| p.1 >= 0.01 && p.1 < 10.0)
            .map(|p| p.0)
            .sum();
        let h = spectrum_tally(e, &edges, 2.0);
        let integral: f64 = h
            .iter()
            .enumerate()
            .map(|(k, v)| v * (edges[k + 1] - edges[k]))
            .sum();
        assert!((integral * 4.0 * std::f64::consts::PI * 2.0 / inside - 1.0).abs() < 1e-12);
    }
}
