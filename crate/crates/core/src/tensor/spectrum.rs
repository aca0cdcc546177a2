use serde::{Deserialize, Serialize};

/// Eigenvalues closer than this are reported as one cluster.
pub const CLUSTER_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCluster {
    pub value: f64,
    pub multiplicity: usize,
}

/// Principal curvatures with multiplicities, plus the normal they refer to.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShapeSpectrum {
    /// Clusters in ascending order of value.
    pub clusters: Vec<SpectrumCluster>,
    pub normal_convention: String,
}

impl ShapeSpectrum {
    /// Builds a spectrum from explicit `(value, multiplicity)` pairs; pairs
    /// with zero multiplicity are dropped and equal values merged.
    pub fn exact(pairs: &[(f64, usize)], normal_convention: impl Into<String>) -> Self {
        let mut clusters: Vec<SpectrumCluster> = Vec::new();
        let mut sorted: Vec<(f64, usize)> = pairs.iter().copied().filter(|(_, m)| *m > 0).collect();
        sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
        for (value, multiplicity) in sorted {
            match clusters.last_mut() {
                Some(last) if last.value == value => last.multiplicity += multiplicity,
                _ => clusters.push(SpectrumCluster {
                    value,
                    multiplicity,
                }),
            }
        }
        Self {
            clusters,
            normal_convention: normal_convention.into(),
        }
    }

    /// Groups numerically computed eigenvalues: neighbours (after sorting)
    /// within `gap` join the same cluster, whose value is the cluster mean.
    pub fn from_eigenvalues(
        values: &[f64],
        gap: f64,
        normal_convention: impl Into<String>,
    ) -> Self {
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut groups: Vec<Vec<f64>> = Vec::new();
        for v in sorted {
            match groups.last_mut() {
                Some(g) if (v - *g.last().unwrap()).abs() <= gap => g.push(v),
                _ => groups.push(vec![v]),
            }
        }
        Self {
            clusters: groups
                .into_iter()
                .map(|g| SpectrumCluster {
                    value: g.iter().sum::<f64>() / g.len() as f64,
                    multiplicity: g.len(),
                })
                .collect(),
            normal_convention: normal_convention.into(),
        }
    }

    pub fn dimension(&self) -> usize {
        self.clusters.iter().map(|c| c.multiplicity).sum()
    }

    /// All eigenvalues with repetition, ascending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        self.clusters
            .iter()
            .flat_map(|c| std::iter::repeat_n(c.value, c.multiplicity))
            .collect()
    }

    /// Sum of principal curvatures (unnormalised mean curvature).
    pub fn trace(&self) -> f64 {
        self.clusters
            .iter()
            .map(|c| c.value * c.multiplicity as f64)
            .sum()
    }

    pub fn values(&self) -> Vec<f64> {
        self.clusters.iter().map(|c| c.value).collect()
    }

    pub fn multiplicities(&self) -> Vec<usize> {
        self.clusters.iter().map(|c| c.multiplicity).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clustering_merges_close_values() {
        let s = ShapeSpectrum::from_eigenvalues(
            &[1.0, -1.0, 1.0 + 1e-9, 0.0, -1.0 - 5e-7],
            1e-6,
            "test",
        );
        assert_eq!(s.multiplicities(), vec![2, 1, 2]);
        assert_eq!(s.dimension(), 5);
        assert!((s.clusters[2].value - 1.0).abs() < 1e-9);
    }

    #[test]
    fn exact_drops_empty_and_merges_equal() {
        let s = ShapeSpectrum::exact(&[(0.0, 2), (-0.5, 0), (0.0, 1), (-1.0, 2)], "n");
        assert_eq!(s.values(), vec![-1.0, 0.0]);
        assert_eq!(s.multiplicities(), vec![2, 3]);
        assert_eq!(s.trace(), -2.0);
    }
}
