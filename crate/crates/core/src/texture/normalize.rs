/// Per-column z-score over all rows (population standard deviation).
/// Zero-variance columns map to 0. Rows must share one length.
pub fn normalize_features(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    let d = first.len();
    assert!(rows.iter().all(|r| r.len() == d), "ragged feature matrix");
    let n = rows.len() as f64;
    let mut out = vec![vec![0.0; d]; rows.len()];
    for j in 0..d {
        let mean = rows.iter().map(|r| r[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / n;
        let sd = var.sqrt();
        // spread below rounding noise of the mean counts as constant
        if sd == 0.0 || sd <= 1e-12 * mean.abs() {
            continue;
        }
        for (o, r) in out.iter_mut().zip(rows) {
            o[j] = (r[j] - mean) / sd;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn columns_are_standardized() {
        let rows: Vec<Vec<f64>> = (0..10).map(|i| vec![i as f64, (i * i) as f64, 5.0]).collect();
        let z = normalize_features(&rows);
        for j in 0..2 {
            let mean = z.iter().map(|r| r[j]).sum::<f64>() / 10.0;
            let var = z.iter().map(|r| (r[j] - mean).powi(2)).sum::<f64>() / 10.0;
            assert!(mean.abs() < 1e-12);
            assert!((var - 1.0).abs() < 1e-9);
        }
        assert!(z.iter().all(|r| r[2] == 0.0));
    }

    #[test]
    fn repeated_vector_is_zero() {
        let z = normalize_features(&vec![vec![1.5, -2.0, 1e6]; 4]);
        assert!(z.iter().flatten().all(|&v| v == 0.0));
    }

    proptest! {
        #[test]
        fn affine_invariance(
            rows in prop::collection::vec(prop::collection::vec(-100.0f64..100.0, 3), 3..12),
            scale in 0.1f64..50.0,
            shift in -1e3f64..1e3,
        ) {
            let moved: Vec<Vec<f64>> = rows.iter()
                .map(|r| r.iter().map(|v| v * scale + shift).collect())
                .collect();
            let a = normalize_features(&rows);
            let b = normalize_features(&moved);
            for (ra, rb) in a.iter().zip(&b) {
                for (x, y) in ra.iter().zip(rb) {
                    prop_assert!((x - y).abs() < 1e-6, "{x} vs {y}");
                }
            }
        }
    }
}
