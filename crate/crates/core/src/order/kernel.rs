//! Null-space vectors via Householder QR with column pivoting.

/// Returns a nonzero `z` with `Σ_j z_j · cols[j] ≈ 0`, scaled so `max |z_j| = 1`,
/// or `None` when the columns are numerically independent.
///
/// Columns whose remaining norm falls below `rank_tol` times the largest
/// initial column norm are treated as dependent.
pub(crate) fn kernel_vector(cols: &[Vec<f64>], rank_tol: f64) -> Option<Vec<f64>> {
    let f = cols.len();
    let m = cols.first().map_or(0, |c| c.len());
    let mut a: Vec<Vec<f64>> = cols.to_vec();
    let mut piv: Vec<usize> = (0..f).collect();
    let scale = a.iter().map(|c| crate::vector::euclidean(c)).fold(0.0, f64::max);
    if scale == 0.0 {
        let mut z = vec![0.0; f];
        if f > 0 {
            z[0] = 1.0;
        }
        return (f > 0).then_some(z);
    }

    let mut rank = 0;
    for k in 0..m.min(f) {
        let (p, best) = (k..f)
            .map(|j| (j, a[j][k..].iter().map(|x| x * x).sum::<f64>()))
            .fold((k, -1.0), |(bj, bn), (j, n)| if n > bn { (j, n) } else { (bj, bn) });
        if best.sqrt() <= rank_tol * scale {
            break;
        }
        a.swap(k, p);
        piv.swap(k, p);

        let norm = best.sqrt();
        let alpha = if a[k][k] > 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = a[k][k..].to_vec();
        v[0] -= alpha;
        let vv: f64 = v.iter().map(|x| x * x).sum();
        if vv > 0.0 {
            for col in a.iter_mut().skip(k) {
                let s: f64 = v.iter().zip(&col[k..]).map(|(x, y)| x * y).sum();
                let c = 2.0 * s / vv;
                for (y, x) in col[k..].iter_mut().zip(&v) {
                    *y -= c * x;
                }
            }
        }
        rank = k + 1;
    }
    if rank == f {
        return None;
    }

    // Back-substitute R11 y = −R12 e_1 against the first non-pivot column.
    let mut y = vec![0.0; rank];
    for i in (0..rank).rev() {
        let mut s = -a[rank][i];
        for (j, yj) in y.iter().enumerate().take(rank).skip(i + 1) {
            s -= a[j][i] * yj;
        }
        y[i] = s / a[i][i];
    }
    let mut z = vec![0.0; f];
    for (j, yj) in y.into_iter().enumerate() {
        z[piv[j]] = yj;
    }
    z[piv[rank]] = 1.0;
    let m = z.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    Some(z.into_iter().map(|x| x / m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn residual(cols: &[Vec<f64>], z: &[f64]) -> f64 {
        let m = cols[0].len();
        (0..m)
            .map(|i| cols.iter().zip(z).map(|(c, zj)| c[i] * zj).sum::<f64>().abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn finds_kernel_of_wide_matrix() {
        let cols = vec![
            vec![1.0, 0.0, 1.0],
            vec![0.0, 1.0, 1.0],
            vec![-1.0, -1.0, 1.0],
            vec![0.3, -0.2, 1.0],
        ];
        let z = kernel_vector(&cols, 1e-12).unwrap();
        assert!(residual(&cols, &z) < 1e-14);
        assert_eq!(z.iter().fold(0.0f64, |m, x| m.max(x.abs())), 1.0);
    }

    #[test]
    fn rank_deficient_columns() {
        let cols = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        let z = kernel_vector(&cols, 1e-12).unwrap();
        assert!(residual(&cols, &z) < 1e-14);
    }

    #[test]
    fn independent_columns_have_no_kernel() {
        let cols = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert!(kernel_vector(&cols, 1e-12).is_none());
    }
}
