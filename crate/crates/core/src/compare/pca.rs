use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

/// Full principal-component decomposition of a column-centered matrix.
#[derive(Debug, Clone)]
pub struct PcaDecomposition {
    pub means: Vec<f64>,
    pub centered: DMatrix<f64>,
    /// One column per component, ordered by decreasing variance.
    pub components: DMatrix<f64>,
    /// Squared singular values of the centered data, descending.
    pub variances: Vec<f64>,
    pub scores: DMatrix<f64>,
}

impl PcaDecomposition {
    pub fn explained_variance_ratio(&self) -> Vec<f64> {
        let total: f64 = self.variances.iter().sum();
        if total <= 0.0 {
            return vec![0.0; self.variances.len()];
        }
        self.variances.iter().map(|v| v / total).collect()
    }

    /// Centered data rebuilt from the first `k` components.
    pub fn reconstruct(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.components.ncols());
        self.scores.columns(0, k) * self.components.columns(0, k).transpose()
    }
}

fn column_mean(col: &[f64]) -> f64 {
    // Exact for constant columns so identical profiles center to zero.
    if col.windows(2).all(|w| w[0] == w[1]) {
        return col[0];
    }
    col.iter().sum::<f64>() / col.len() as f64
}

/// Flips `v` so its largest-magnitude entry is positive; near-ties resolve
/// to the lowest index.
fn orient(mut v: Vec<f64>) -> Vec<f64> {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() + 1e-12 {
            best = i;
        }
    }
    if v[best] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
    v
}

/// PCA of the rows of `data` with column centering and no scaling.
pub fn decompose(data: &DMatrix<f64>) -> PcaDecomposition {
    let (n, p) = data.shape();
    assert!(n > 0 && p > 0, "PCA needs a non-empty matrix");
    let means: Vec<f64> = (0..p)
        .map(|j| column_mean(data.column(j).as_slice()))
        .collect();
    let centered = DMatrix::from_fn(n, p, |i, j| data[(i, j)] - means[j]);

    let eig = SymmetricEigen::new(centered.transpose() * &centered);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let variances: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
    let mut components = DMatrix::zeros(p, p);
    for (c, &i) in order.iter().enumerate() {
        let v = orient(eig.eigenvectors.column(i).iter().copied().collect());
        components.set_column(c, &nalgebra::DVector::from_vec(v));
    }
    let scores = &centered * &components;
    PcaDecomposition {
        means,
        centered,
        components,
        variances,
        scores,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PcaCoordinate {
    pub label: String,
    pub pc1: f64,
    pub pc2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct PcaProjection {
    pub coordinates: Vec<PcaCoordinate>,
    pub explained_variance_ratio: [f64; 2],
    /// One `[pc1, pc2]` row per attribute.
    pub loadings: Vec<[f64; 2]>,
}

/// Two-component projection of labeled rows. Rank-0 input yields zero
/// coordinates and zero ratios.
pub fn project_two(labels: &[String], data: &DMatrix<f64>) -> PcaProjection {
    let d = decompose(data);
    let ratios = d.explained_variance_ratio();
    let rank0 = d.variances.iter().all(|v| *v == 0.0);
    let pick = |m: &DMatrix<f64>, i: usize, c: usize| {
        if rank0 || c >= m.ncols() {
            0.0
        } else {
            m[(i, c)]
        }
    };
    PcaProjection {
        coordinates: labels
            .iter()
            .enumerate()
            .map(|(i, l)| PcaCoordinate {
                label: l.clone(),
                pc1: pick(&d.scores, i, 0),
                pc2: pick(&d.scores, i, 1),
            })
            .collect(),
        explained_variance_ratio: [
            ratios.first().copied().unwrap_or(0.0),
            ratios.get(1).copied().unwrap_or(0.0),
        ],
        loadings: (0..data.ncols())
            .map(|j| {
                [
                    d.components[(j, 0)],
                    d.components.get((j, 1)).copied().unwrap_or(0.0),
                ]
            })
            .collect(),
    }
}
