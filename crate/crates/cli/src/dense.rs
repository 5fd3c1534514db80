//! Dense matrix builders for verification.
//!
//! Each factor of the sensing operator is assembled here directly from
//! its definition (Sylvester recursion, permutation scatter, convolution
//! band structure, synthesis columns), independently of the fast paths,
//! so the matrix-free pipeline can be checked against an explicit
//! product at small sizes.

use spix_core::sensing::coeff_dims;
use spix_core::solver::LinearOperator;
use spix_core::spline::{crosscorr_seq, crosscorr_support, SplineOrder};
use spix_core::srm::SrmConfig;
use spix_core::wavelet::{idwt2, FilterBank, WaveletVec};

pub type Mat = Vec<Vec<f64>>;

pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    let rows = a.len();
    let inner = b.len();
    let cols = b[0].len();
    let mut out = vec![vec![0.0; cols]; rows];
    for i in 0..rows {
        for k in 0..inner {
            let aik = a[i][k];
            if aik == 0.0 {
                continue;
            }
            for j in 0..cols {
                out[i][j] += aik * b[k][j];
            }
        }
    }
    out
}

/// Sylvester-recursion Hadamard matrix (entries +-1).
pub fn dense_hadamard(n: usize) -> Mat {
    assert!(n.is_power_of_two());
    let mut h = vec![vec![1.0]];
    let mut size = 1;
    while size < n {
        let mut next = vec![vec![0.0; 2 * size]; 2 * size];
        for i in 0..size {
            for j in 0..size {
                next[i][j] = h[i][j];
                next[i][j + size] = h[i][j];
                next[i + size][j] = h[i][j];
                next[i + size][j + size] = -h[i][j];
            }
        }
        h = next;
        size *= 2;
    }
    h
}

/// Dense measurement matrix: row subsampling of the orthonormal
/// Walsh-Hadamard transform of the permuted signal.
pub fn dense_srm(cfg: &SrmConfig) -> Mat {
    let n = cfg.n();
    let h = dense_hadamard(n);
    let scale = 1.0 / (n as f64).sqrt();
    // P[i][j] = 1 iff perm[i] == j, so (HP)[r][j] = H[r][pos(j)].
    let mut pos = vec![0usize; n];
    for (i, &p) in cfg.permutation().iter().enumerate() {
        pos[p as usize] = i;
    }
    cfg.row_select()
        .iter()
        .map(|&r| {
            (0..n)
                .map(|j| h[r as usize][pos[j]] * scale)
                .collect::<Vec<f64>>()
        })
        .collect()
}

/// Dense valid-convolution matrix mapping coefficient grids (row-major,
/// (K+support-1) x (L+support-1)) to mask-cell samples (K x L).
pub fn dense_conv(mask_rows: usize, mask_cols: usize, order: SplineOrder) -> Mat {
    let taps = crosscorr_seq(order).taps().to_vec();
    let omega = crosscorr_support(order);
    let (crows, ccols) = (mask_rows + omega - 1, mask_cols + omega - 1);
    let band = |k: usize, m: usize| -> f64 {
        // out[k] = sum_j taps[j] a[k + j]
        if m >= k && m < k + omega {
            taps[m - k]
        } else {
            0.0
        }
    };
    let mut out = vec![vec![0.0; crows * ccols]; mask_rows * mask_cols];
    for k in 0..mask_rows {
        for l in 0..mask_cols {
            let row = &mut out[k * mask_cols + l];
            for m in 0..crows {
                let rk = band(k, m);
                if rk == 0.0 {
                    continue;
                }
                for n in 0..ccols {
                    row[m * ccols + n] = rk * band(l, n);
                }
            }
        }
    }
    out
}

/// Dense synthesis matrix, one column per canonical coefficient vector.
pub fn dense_synthesis(rows: usize, cols: usize, levels: usize, bank: &FilterBank) -> Mat {
    let n = rows * cols;
    let mut out = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut x = WaveletVec::zeros(rows, cols, levels);
        x.data_mut()[j] = 1.0;
        let g = idwt2(&x, bank).expect("small synthesis");
        for i in 0..n {
            out[i][j] = g.data()[i];
        }
    }
    out
}

/// Explicit product measurement . convolution . synthesis.
pub fn dense_theta_product(
    mask_rows: usize,
    mask_cols: usize,
    srm: &SrmConfig,
    order: SplineOrder,
    bank: &FilterBank,
    levels: usize,
) -> Mat {
    let (cr, cc) = coeff_dims(mask_rows, mask_cols, order);
    let s = dense_srm(srm);
    let r = dense_conv(mask_rows, mask_cols, order);
    let psi = dense_synthesis(cr, cc, levels, bank);
    matmul(&s, &matmul(&r, &psi))
}

/// Densifies any operator by applying it to the canonical basis.
pub fn densify(op: &dyn LinearOperator) -> Mat {
    let (rows, cols) = (op.rows(), op.cols());
    let mut out = vec![vec![0.0; cols]; rows];
    for j in 0..cols {
        let mut e = vec![0.0; cols];
        e[j] = 1.0;
        let y = op.forward(&e);
        for i in 0..rows {
            out[i][j] = y[i];
        }
    }
    out
}

pub fn max_abs_diff(a: &Mat, b: &Mat) -> f64 {
    let mut worst = 0.0f64;
    for (ra, rb) in a.iter().zip(b) {
        for (x, y) in ra.iter().zip(rb) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}
