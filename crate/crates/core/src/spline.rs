//! Centered polynomial B-splines, their box-kernel cross-correlation
//! sequence, rendering to pointwise / box-integral samples, and the
//! inverse (correction) filter.
//!
//! Everything here uses the symmetric (centered) convention: the order-p
//! B-spline is supported on |t| <= (p+1)/2 and the order-0 spline is the
//! unit box on -1/2..1/2. The cross-correlation taps `r[k]` between the
//! order-p generator and the box kernel are then the integer samples of
//! the order-(p+1) spline, which is what gives them their few nonzero
//! symmetric entries.

use crate::error::{Error, Result};
use crate::grid::CoeffGrid;
use crate::opcount;
use rustfft::{num_complex::Complex, FftPlanner};

/// B-spline order, 0 through 5.
///
/// Order 0 is the box generator; with it every downstream operator
/// degenerates to the conventional pixel-basis pipeline.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SplineOrder(u8);

pub const MAX_ORDER: u8 = 5;

impl SplineOrder {
    pub fn new(p: u32) -> Result<Self> {
        if p > MAX_ORDER as u32 {
            return Err(Error::UnsupportedOrder(p));
        }
        Ok(SplineOrder(p as u8))
    }

    #[inline]
    pub fn get(self) -> u32 {
        self.0 as u32
    }
}

impl std::fmt::Display for SplineOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Centered B-spline of order `p` evaluated at `t`.
///
/// Support is |t| <= (p+1)/2; the value is non-negative everywhere and the
/// function is C^(p-1)-continuous. Out-of-support points return 0.
pub fn bspline_eval(p: SplineOrder, t: f64) -> f64 {
    eval_rec(p.get(), t)
}

fn eval_rec(p: u32, t: f64) -> f64 {
    let half = (p as f64 + 1.0) / 2.0;
    if p == 0 {
        // Box with symmetric edge values so that b(t) == b(-t) holds
        // pointwise, not just almost everywhere.
        let a = t.abs();
        return if a < 0.5 {
            1.0
        } else if a == 0.5 {
            0.5
        } else {
            0.0
        };
    }
    if t.abs() >= half {
        return 0.0;
    }
    // Two-term recursion for the centered spline,
    //   p b^p(t) = (t + (p+1)/2) b^(p-1)(t + 1/2) + ((p+1)/2 - t) b^(p-1)(t - 1/2).
    ((t + half) * eval_rec(p - 1, t + 0.5) + (half - t) * eval_rec(p - 1, t - 0.5)) / p as f64
}

/// Sampled cross-correlation sequence between the order-p generator and
/// the box kernel, i.e. the integer samples of the order-(p+1) spline.
///
/// Odd length, palindromic, sums to exactly 1.
#[derive(Clone, Debug, PartialEq)]
pub struct CrossCorrSeq {
    taps: Vec<f64>,
    order: SplineOrder,
}

impl CrossCorrSeq {
    /// Taps centered at index 0: `taps()[halfwidth()]` is `r[0]`.
    #[inline]
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn order(&self) -> SplineOrder {
        self.order
    }

    /// Number of nonzero taps (odd).
    #[inline]
    pub fn support(&self) -> usize {
        self.taps.len()
    }

    #[inline]
    pub fn halfwidth(&self) -> usize {
        self.taps.len() / 2
    }
}

/// `r[k]` for the given order. Exact rational constants; the identity with
/// the sampled order-(p+1) spline and with direct quadrature is enforced
/// by tests, the constants are not trusted from transcription.
pub fn crosscorr_seq(p: SplineOrder) -> CrossCorrSeq {
    let taps: Vec<f64> = match p.get() {
        0 => vec![1.0],
        1 => vec![1.0 / 8.0, 6.0 / 8.0, 1.0 / 8.0],
        2 => vec![1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0],
        3 => vec![
            1.0 / 384.0,
            76.0 / 384.0,
            230.0 / 384.0,
            76.0 / 384.0,
            1.0 / 384.0,
        ],
        4 => vec![
            1.0 / 120.0,
            26.0 / 120.0,
            66.0 / 120.0,
            26.0 / 120.0,
            1.0 / 120.0,
        ],
        5 => vec![
            1.0 / 46080.0,
            722.0 / 46080.0,
            10543.0 / 46080.0,
            23548.0 / 46080.0,
            10543.0 / 46080.0,
            722.0 / 46080.0,
            1.0 / 46080.0,
        ],
        _ => unreachable!("SplineOrder is validated at construction"),
    };
    CrossCorrSeq { taps, order: p }
}

/// Nonzero support of `r[k]`: the odd cardinality {1, 3, 3, 5, 5, 7} for
/// p = 0..=5.
pub fn crosscorr_support(p: SplineOrder) -> usize {
    2 * (p.get() as usize).div_ceil(2) + 1
}

/// Renders expansion coefficients to pointwise signal values on the
/// integer grid: f(k, l) = sum a0[m, n] b^p(k - m) b^p(l - n).
///
/// Separable FIR with the integer samples of b^p as taps; the grid is
/// extended symmetrically at the edges so constants render to themselves.
/// Output has the same dimensions as the input.
pub fn render_pointwise(a0: &CoeffGrid, p: SplineOrder) -> CoeffGrid {
    let hw = (p.get() / 2) as usize;
    let taps: Vec<f64> = (-(hw as i64)..=hw as i64)
        .map(|j| bspline_eval(p, j as f64))
        .collect();
    separable_symmetric_fir(a0, &taps)
}

/// Renders expansion coefficients to box-integral samples: the valid-region
/// separable convolution with `r[k]`. The output shrinks by support-1 per
/// axis and is what a pixel detector grid would read off the signal.
pub fn render_box_samples(a0: &CoeffGrid, p: SplineOrder) -> Result<CoeffGrid> {
    let r = crosscorr_seq(p);
    separable_valid_conv(a0, r.taps())
}

/// Inverse of [`render_box_samples`] up to boundary effects: recovers the
/// expansion coefficients whose box samples reproduce the input.
///
/// Implemented as separable frequency-domain division by the transfer
/// function of `r[k]` on the whole-sample symmetric periodization of the
/// grid. Intended for synthesizing ground-truth coefficient grids; the
/// round trip is exact in the interior and decays toward the edges.
pub fn correction_filter_apply(samples: &CoeffGrid, p: SplineOrder) -> Result<CoeffGrid> {
    let r = crosscorr_seq(p);
    if r.support() == 1 {
        return Ok(samples.clone());
    }
    let rows = inverse_filter_rows(samples, &r)?;
    let cols = inverse_filter_rows(&rows.transposed(), &r)?;
    Ok(cols.transposed())
}

/// One separable pass of the inverse filter along each row.
fn inverse_filter_rows(grid: &CoeffGrid, r: &CrossCorrSeq) -> Result<CoeffGrid> {
    let n = grid.cols();
    if n == 1 {
        // Transfer function at DC is sum r = 1.
        return Ok(grid.clone());
    }
    let period = 2 * n - 2;
    let hw = r.halfwidth() as i64;

    // Real, even transfer function R(w_q) = sum_k r[k] cos(k w_q).
    let mut transfer = Vec::with_capacity(period);
    let mut min_abs = f64::INFINITY;
    for q in 0..period {
        let w = 2.0 * std::f64::consts::PI * q as f64 / period as f64;
        let mut v = 0.0;
        for k in -hw..=hw {
            v += r.taps()[(k + hw) as usize] * (k as f64 * w).cos();
        }
        min_abs = min_abs.min(v.abs());
        transfer.push(v);
    }
    if min_abs <= 1e-12 {
        return Err(Error::SingularCorrectionFilter(min_abs));
    }

    let mut planner = FftPlanner::<f64>::new();
    let fft = planner.plan_fft_forward(period);
    let ifft = planner.plan_fft_inverse(period);

    let mut out = CoeffGrid::zeros(grid.rows(), n);
    let mut buf = vec![Complex::new(0.0, 0.0); period];
    for rr in 0..grid.rows() {
        let row = grid.row(rr);
        // Whole-sample symmetric periodization [x0..x_{n-1}, x_{n-2}..x1].
        for i in 0..n {
            buf[i] = Complex::new(row[i], 0.0);
        }
        for i in 1..n - 1 {
            buf[2 * n - 2 - i] = Complex::new(row[i], 0.0);
        }
        fft.process(&mut buf);
        for (b, t) in buf.iter_mut().zip(&transfer) {
            *b /= t * period as f64; // fold in the rustfft 1/len normalization
        }
        ifft.process(&mut buf);
        for i in 0..n {
            out[(rr, i)] = buf[i].re;
        }
    }
    Ok(out)
}

/// Valid-region separable convolution with a centered odd tap list:
/// out[k] = sum_j taps[j + hw] in[k + j + hw], trimming support-1 per axis.
pub(crate) fn separable_valid_conv(grid: &CoeffGrid, taps: &[f64]) -> Result<CoeffGrid> {
    debug_assert!(taps.len() % 2 == 1);
    let omega = taps.len();
    if grid.rows() < omega || grid.cols() < omega {
        return Err(Error::GridTooSmall {
            stage: "valid convolution",
            rows: grid.rows(),
            cols: grid.cols(),
            min: omega,
        });
    }
    if omega == 1 && taps[0] == 1.0 {
        // r = delta: the operator is the identity, keep it bit-exact.
        return Ok(grid.clone());
    }
    let pass = |g: &CoeffGrid| -> CoeffGrid {
        let out_cols = g.cols() - (omega - 1);
        let mut out = CoeffGrid::zeros(g.rows(), out_cols);
        for r in 0..g.rows() {
            let row = g.row(r);
            for k in 0..out_cols {
                let mut acc = 0.0;
                for (j, t) in taps.iter().enumerate() {
                    acc += t * row[k + j];
                }
                out[(r, k)] = acc;
            }
        }
        opcount::add((g.rows() * out_cols * omega) as u64);
        out
    };
    let h = pass(grid);
    Ok(pass(&h.transposed()).transposed())
}

/// Full zero-padded separable convolution with a centered odd tap list:
/// the exact transpose of [`separable_valid_conv`]. Output grows by
/// support-1 per axis.
pub(crate) fn separable_full_conv(grid: &CoeffGrid, taps: &[f64]) -> CoeffGrid {
    debug_assert!(taps.len() % 2 == 1);
    let omega = taps.len();
    if omega == 1 && taps[0] == 1.0 {
        return grid.clone();
    }
    let pass = |g: &CoeffGrid| -> CoeffGrid {
        let out_cols = g.cols() + omega - 1;
        let mut out = CoeffGrid::zeros(g.rows(), out_cols);
        for r in 0..g.rows() {
            let row = g.row(r);
            for k in 0..g.cols() {
                let v = row[k];
                for (j, t) in taps.iter().enumerate() {
                    out[(r, k + j)] += t * v;
                }
            }
        }
        opcount::add((g.rows() * g.cols() * omega) as u64);
        out
    };
    let h = pass(grid);
    pass(&h.transposed()).transposed()
}

/// Separable FIR with whole-sample symmetric extension, same output size.
fn separable_symmetric_fir(grid: &CoeffGrid, taps: &[f64]) -> CoeffGrid {
    debug_assert!(taps.len() % 2 == 1);
    let hw = (taps.len() / 2) as i64;
    if hw == 0 {
        let mut out = grid.clone();
        if taps[0] != 1.0 {
            for v in out.data_mut() {
                *v *= taps[0];
            }
        }
        return out;
    }
    let pass = |g: &CoeffGrid| -> CoeffGrid {
        let n = g.cols() as i64;
        let mut out = CoeffGrid::zeros(g.rows(), g.cols());
        for r in 0..g.rows() {
            let row = g.row(r);
            for k in 0..n {
                let mut acc = 0.0;
                for j in -hw..=hw {
                    acc += taps[(j + hw) as usize] * row[reflect(k + j, n)];
                }
                out[(r, k as usize)] = acc;
            }
        }
        opcount::add((g.rows() * g.cols() * taps.len()) as u64);
        out
    };
    let h = pass(grid);
    pass(&h.transposed()).transposed()
}

/// Whole-sample symmetric index reflection onto [0, n).
#[inline]
pub(crate) fn reflect(i: i64, n: i64) -> usize {
    debug_assert!(n >= 1);
    if n == 1 {
        return 0;
    }
    let period = 2 * n - 2;
    let mut i = i.rem_euclid(period);
    if i >= n {
        i = period - i;
    }
    i as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    fn order(p: u32) -> SplineOrder {
        SplineOrder::new(p).unwrap()
    }

    // -- independent quadrature oracle ------------------------------------

    /// Composite 3-point Gauss-Legendre over [a, b] with panel width at
    /// most `max_step`. Nodes are strictly interior, so jump points at
    /// panel edges are never sampled, and the rule is exact for
    /// polynomial pieces up to degree five.
    fn gauss3(f: impl Fn(f64) -> f64, a: f64, b: f64, max_step: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        let n = ((b - a) / max_step).ceil() as usize;
        let h = (b - a) / n as f64;
        let off = 0.5 * h * (3.0f64 / 5.0).sqrt();
        let (w_mid, w_side) = (8.0 / 9.0, 5.0 / 9.0);
        let mut acc = 0.0;
        for i in 0..n {
            let c = a + (i as f64 + 0.5) * h;
            acc += w_mid * f(c) + w_side * (f(c - off) + f(c + off));
        }
        acc * 0.5 * h
    }

    /// Quadrature of the defining inner product <b^p(t), b^0(t-k)>,
    /// i.e. the integral of b^p over [k-1/2, k+1/2], taken piecewise
    /// between the spline breakpoints so no discontinuity or kink is
    /// crossed by a panel.
    fn r_tap_by_quadrature(p: u32, k: i64) -> f64 {
        let half = (p as f64 + 1.0) / 2.0;
        let lo = (k as f64 - 0.5).max(-half);
        let hi = (k as f64 + 0.5).min(half);
        if hi <= lo {
            return 0.0;
        }
        // Breakpoints of the centered spline sit on the half-integer grid.
        let mut cuts = vec![lo];
        let mut c = (lo * 2.0).floor() / 2.0 + 0.5;
        while c < hi {
            if c > lo {
                cuts.push(c);
            }
            c += 0.5;
        }
        cuts.push(hi);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            total += gauss3(|t| eval_rec(p, t), w[0], w[1], 1e-3);
        }
        total
    }

    // ----------------------------------------------------------------------

    #[test]
    fn eval_known_values() {
        // Hat function peak.
        assert_eq!(bspline_eval(order(1), 0.0), 1.0);
        // Quadratic and cubic center / off-center values.
        assert!((bspline_eval(order(2), 0.0) - 0.75).abs() < 1e-15);
        assert!((bspline_eval(order(3), 0.0) - 2.0 / 3.0).abs() < 1e-15);
        // Four-fold box self-convolution at t = 1.
        assert!((bspline_eval(order(3), 1.0) - 1.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn eval_against_quadrature_of_self_convolution() {
        // b^p integrated against a unit box reproduces b^(p+1) at the
        // integers, so the quadrature pins the closed-form recursion.
        for p in 0..=4u32 {
            for k in -4..=4i64 {
                let via_quad = r_tap_by_quadrature(p, k);
                let via_eval = eval_rec(p + 1, k as f64);
                assert!(
                    (via_quad - via_eval).abs() < 1e-10,
                    "p={p} k={k}: {via_quad} vs {via_eval}"
                );
            }
        }
    }

    #[test]
    fn eval_is_symmetric_nonnegative_compact() {
        for p in 0..=5u32 {
            let half = (p as f64 + 1.0) / 2.0;
            let mut t = -4.0;
            while t <= 4.0 {
                let v = eval_rec(p, t);
                assert!(v >= 0.0);
                assert_eq!(v, eval_rec(p, -t), "symmetry at p={p} t={t}");
                if t.abs() > half {
                    assert_eq!(v, 0.0);
                }
                t += 0.0625;
            }
        }
    }

    #[test]
    fn crosscorr_matches_published_rows() {
        assert_eq!(crosscorr_seq(order(0)).taps(), &[1.0]);
        assert_eq!(crosscorr_seq(order(1)).taps(), &[0.125, 0.75, 0.125]);
        let p3 = crosscorr_seq(order(3));
        let expected = [1.0, 76.0, 230.0, 76.0, 1.0].map(|v| v / 384.0);
        for (a, b) in p3.taps().iter().zip(expected.iter()) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn crosscorr_identity_and_quadrature_all_orders() {
        for p in 0..=5u32 {
            let seq = crosscorr_seq(order(p));
            assert_eq!(seq.support(), crosscorr_support(order(p)));
            let hw = seq.halfwidth() as i64;
            for k in -hw..=hw {
                let tap = seq.taps()[(k + hw) as usize];
                let quad = r_tap_by_quadrature(p, k);
                let eval = eval_rec(p + 1, k as f64);
                assert!((tap - quad).abs() < 1e-10, "p={p} k={k} tap vs quadrature");
                assert!((tap - eval).abs() < 1e-10, "p={p} k={k} tap vs b^(p+1)");
            }
        }
    }

    #[test]
    fn crosscorr_is_palindromic_and_normalized() {
        for p in 0..=5u32 {
            let seq = crosscorr_seq(order(p));
            let taps = seq.taps();
            assert_eq!(taps.len() % 2, 1);
            for i in 0..taps.len() {
                assert_eq!(taps[i], taps[taps.len() - 1 - i], "p={p}");
            }
            let sum: f64 = taps.iter().sum();
            assert!((sum - 1.0).abs() < 1e-15, "p={p} sum={sum}");
        }
    }

    #[test]
    fn render_pointwise_delta_and_constant() {
        // Order 0: integer samples of the box are a delta.
        let d = CoeffGrid::delta(5, 5, 2, 2);
        assert_eq!(render_pointwise(&d, order(0)), d);

        // Cubic: 3x3 outer product of {1/6, 2/3, 1/6}.
        let r = render_pointwise(&d, order(3));
        let t = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];
        for i in 0..3 {
            for j in 0..3 {
                assert!((r[(1 + i, 1 + j)] - t[i] * t[j]).abs() < 1e-15);
            }
        }
        assert!((r[(2, 2)] - 4.0 / 9.0).abs() < 1e-15);
        assert_eq!(r[(0, 0)], 0.0);

        // Partition of unity, all orders.
        for p in 0..=5u32 {
            let c = CoeffGrid::constant(9, 7, 1.25);
            let rc = render_pointwise(&c, order(p));
            assert!(c.max_abs_diff(&rc) < 1e-12, "p={p}");
        }
    }

    #[test]
    fn render_box_samples_cases() {
        // p=0 keeps the grid (r = delta).
        let g = CoeffGrid::from_fn(6, 6, |r, c| (r * 6 + c) as f64);
        assert_eq!(render_box_samples(&g, order(0)).unwrap(), g);

        // Delta spreads to the outer product of the p=1 taps.
        let d = CoeffGrid::delta(7, 7, 3, 3);
        let b = render_box_samples(&d, order(1)).unwrap();
        assert_eq!(b.rows(), 5);
        let t = [0.125, 0.75, 0.125];
        for i in 0..5 {
            for j in 0..5 {
                let want = if (1..=3).contains(&i) && (1..=3).contains(&j) {
                    t[i - 1] * t[j - 1]
                } else {
                    0.0
                };
                assert!((b[(i, j)] - want).abs() < 1e-15);
            }
        }

        // Constants stay constant in the valid region.
        let c = render_box_samples(&CoeffGrid::constant(10, 10, 3.5), order(3)).unwrap();
        assert_eq!(c.rows(), 6);
        for &v in c.data() {
            assert!((v - 3.5).abs() < 1e-12);
        }

        // Dimension underflow is an error.
        assert!(render_box_samples(&CoeffGrid::zeros(4, 4), order(5)).is_err());
    }

    #[test]
    fn correction_filter_identity_for_box() {
        let g = CoeffGrid::from_fn(8, 8, |r, c| (r as f64).sin() + c as f64);
        assert_eq!(correction_filter_apply(&g, order(0)).unwrap(), g);
    }

    #[test]
    fn correction_filter_keeps_constants() {
        let g = CoeffGrid::constant(16, 16, 1.0);
        let a = correction_filter_apply(&g, order(3)).unwrap();
        assert!(g.max_abs_diff(&a) < 1e-12);
    }

    #[test]
    fn correction_filter_inverts_full_convolution_of_delta() {
        // Forward-then-inverse round trip on a blurred delta.
        let d = CoeffGrid::delta(17, 17, 8, 8);
        let blurred = separable_full_conv(&d, crosscorr_seq(order(1)).taps());
        assert_eq!(blurred.rows(), 19);
        let rec = correction_filter_apply(&blurred, order(1)).unwrap();
        // The recovered grid is the delta padded by the blur margin.
        for r in 0..19 {
            for c in 0..19 {
                let want = if r == 9 && c == 9 { 1.0 } else { 0.0 };
                assert!(
                    (rec[(r, c)] - want).abs() < 1e-8,
                    "({r},{c})={}",
                    rec[(r, c)]
                );
            }
        }
    }

    #[test]
    fn box_render_after_correction_round_trips_interior() {
        for p in 1..=5u32 {
            let mut rng = crate::rng::Xoshiro256::seed_from(100 + p as u64);
            // Smooth-ish random field keeps the inverse well conditioned
            // near the boundary, matching the intended synthesis use.
            let s = CoeffGrid::from_fn(48, 48, |r, c| {
                ((r as f64) * 0.3).sin() + ((c as f64) * 0.2).cos() + 0.1 * rng.next_f64()
            });
            let a0 = correction_filter_apply(&s, order(p)).unwrap();
            let back = render_box_samples(&a0, order(p)).unwrap();
            let hw = crosscorr_seq(order(p)).halfwidth();
            // back[k] corresponds to s[k + hw]; compare away from edges.
            let margin = 12usize;
            for r in margin..back.rows() - margin {
                for c in margin..back.cols() - margin {
                    let diff = (back[(r, c)] - s[(r + hw, c + hw)]).abs();
                    assert!(diff < 1e-8, "p={p} ({r},{c}) diff={diff}");
                }
            }
        }
    }

    #[test]
    fn full_conv_is_transpose_of_valid_conv() {
        let mut rng = crate::rng::Xoshiro256::seed_from(9);
        for p in 0..=5u32 {
            let taps = crosscorr_seq(order(p)).taps().to_vec();
            let omega = taps.len();
            let a = CoeffGrid::from_fn(9 + omega - 1, 7 + omega - 1, |_, _| rng.next_f64() - 0.5);
            let y = CoeffGrid::from_fn(9, 7, |_, _| rng.next_f64() - 0.5);
            let fwd = separable_valid_conv(&a, &taps).unwrap();
            let adj = separable_full_conv(&y, &taps);
            let lhs: f64 = fwd.data().iter().zip(y.data()).map(|(u, v)| u * v).sum();
            let rhs: f64 = a.data().iter().zip(adj.data()).map(|(u, v)| u * v).sum();
            assert!((lhs - rhs).abs() < 1e-12, "p={p}");
        }
    }

    #[test]
    fn reflect_indices() {
        let n = 5;
        let idx: Vec<usize> = (-6..=10).map(|i| reflect(i, n)).collect();
        // Period-8 pattern [0,1,2,3,4,3,2,1] shifted to start at -6.
        assert_eq!(idx, vec![2, 3, 4, 3, 2, 1, 0, 1, 2, 3, 4, 3, 2, 1, 0, 1, 2]);
        assert_eq!(reflect(-3, 1), 0);
    }

    #[test]
    fn order_bounds() {
        assert!(SplineOrder::new(6).is_err());
        assert!(SplineOrder::new(5).is_ok());
    }
}
