//! Separable 2D biorthogonal spline wavelet transforms, matrix-free.
//!
//! The synthesis transform plays the role of the sparsity basis: a flat
//! coefficient vector ordered `[a_I, d_u(I), d_v(I), d_uv(I), d_u(I-1),
//! ..., d_uv(1)]` maps to an expansion-coefficient grid. Analysis and
//! synthesis use whole-sample symmetric boundary extension with
//! ceiling/floor subband splits, so any grid size >= 2 per axis round
//! trips exactly; sizes do not need to be dyadic.
//!
//! Besides forward/inverse, both exact transposes are provided. The
//! transpose of the synthesis transform is what the reconstruction
//! operator needs; it runs the analysis machinery built from the
//! synthesis filters with boundary contributions folded back, so the
//! adjoint identity holds to machine precision including the edges.

use crate::error::{Error, Result};
use crate::grid::CoeffGrid;
use crate::opcount;
use crate::spline::reflect;

/// FIR filter with an anchor: `taps[i]` sits at position `offset + i`.
#[derive(Clone, Debug, PartialEq)]
pub struct Filter {
    taps: Vec<f64>,
    offset: i64,
}

impl Filter {
    fn new(taps: Vec<f64>, offset: i64) -> Self {
        Filter { taps, offset }
    }

    #[inline]
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    #[inline]
    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.taps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.taps.is_empty()
    }

    /// Modulated time reversal: g[m] = (-1)^m f[-m]. Maps a lowpass
    /// filter to the complementary highpass of the dual channel.
    fn quadrature_mirror(&self) -> Filter {
        let lo = self.offset;
        let hi = self.offset + self.taps.len() as i64 - 1;
        let taps = (-hi..=-lo)
            .map(|m| {
                let v = self.taps[(-m - lo) as usize];
                if m.rem_euclid(2) == 0 {
                    v
                } else {
                    -v
                }
            })
            .collect();
        Filter::new(taps, -hi)
    }
}

/// Two-channel perfect reconstruction filter bank.
#[derive(Clone, Debug)]
pub struct FilterBank {
    name: String,
    analysis_lo: Filter,
    analysis_hi: Filter,
    synthesis_lo: Filter,
    synthesis_hi: Filter,
}

fn binomial_row(n: usize) -> Vec<f64> {
    let mut row = vec![1.0];
    for _ in 0..n {
        let mut next = vec![1.0];
        for w in row.windows(2) {
            next.push(w[0] + w[1]);
        }
        next.push(1.0);
        row = next;
    }
    row
}

/// Laurent polynomial product; both sides carry (taps, offset).
fn poly_mul(a: (&[f64], i64), b: (&[f64], i64)) -> (Vec<f64>, i64) {
    let mut out = vec![0.0; a.0.len() + b.0.len() - 1];
    for (i, x) in a.0.iter().enumerate() {
        for (j, y) in b.0.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    (out, a.1 + b.1)
}

impl FilterBank {
    /// Biorthogonal spline bank with `nr` synthesis and `nd` analysis
    /// vanishing moments. The synthesis scaling filter is the binomial
    /// (B-spline) filter of order `nr`; its scaling function is the
    /// B-spline of order nr-1. Both lowpass filters are normalized to
    /// sum to sqrt(2). Requires even `nr` and `nd` (whole-sample
    /// symmetric filters).
    pub fn bior(nr: usize, nd: usize) -> Result<FilterBank> {
        if nr == 0 || nd == 0 || !nr.is_multiple_of(2) || !nd.is_multiple_of(2) || nr > 8 || nd > 8
        {
            return Err(Error::UnknownBank(format!("bior{nr}.{nd}")));
        }
        let sqrt2 = std::f64::consts::SQRT_2;

        let mut syn_lo: Vec<f64> = binomial_row(nr);
        let scale = sqrt2 / (1u64 << nr) as f64;
        for v in &mut syn_lo {
            *v *= scale;
        }
        let synthesis_lo = Filter::new(syn_lo, -(nr as i64) / 2);

        // Dual lowpass: sqrt(2) cos^nd(w/2) P(sin^2(w/2)) with P the
        // Bezout half-band completion of degree q-1, q = (nr+nd)/2.
        // In z: cos^2(w/2) = (z + 2 + 1/z)/4, sin^2(w/2) = (-z + 2 - 1/z)/4;
        // every factor is symmetric, so track centered tap arrays only.
        let q = (nr + nd) / 2;
        let deg = q - 1;
        let mut acc = vec![0.0; 2 * deg + 1];
        let mut sin_pow = vec![1.0];
        for n in 0..=deg {
            let c = binom(q - 1 + n, n);
            let shift = deg - n;
            for (i, v) in sin_pow.iter().enumerate() {
                acc[shift + i] += c * v;
            }
            if n < deg {
                sin_pow = poly_mul((&sin_pow, 0), (&[-0.25, 0.5, -0.25], 0)).0;
            }
        }
        let mut dual = acc;
        for _ in 0..nd / 2 {
            dual = poly_mul((&dual, 0), (&[0.25, 0.5, 0.25], 0)).0;
        }
        let ana_lo: Vec<f64> = dual.iter().map(|v| v * sqrt2).collect();
        let half = (ana_lo.len() as i64 - 1) / 2;
        let analysis_lo = Filter::new(ana_lo, -half);

        let analysis_hi = synthesis_lo.quadrature_mirror();
        let synthesis_hi = analysis_lo.quadrature_mirror();
        Ok(FilterBank {
            name: format!("bior{nr}.{nd}"),
            analysis_lo,
            analysis_hi,
            synthesis_lo,
            synthesis_hi,
        })
    }

    /// Orthonormal Haar bank. Even-length filters; with even grid sizes
    /// the transform is orthogonal, so the transpose equals the inverse.
    pub fn haar() -> FilterBank {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let lo = Filter::new(vec![h, h], 0);
        let hi = lo.quadrature_mirror();
        FilterBank {
            name: "haar".to_string(),
            analysis_lo: lo.clone(),
            analysis_hi: hi.clone(),
            synthesis_lo: lo,
            synthesis_hi: hi,
        }
    }

    pub fn by_name(name: &str) -> Result<FilterBank> {
        if name == "haar" {
            return Ok(FilterBank::haar());
        }
        if let Some(rest) = name.strip_prefix("bior") {
            if let Some((a, b)) = rest.split_once('.') {
                if let (Ok(nr), Ok(nd)) = (a.parse(), b.parse()) {
                    return FilterBank::bior(nr, nd);
                }
            }
        }
        Err(Error::UnknownBank(name.to_string()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn analysis_lo(&self) -> &Filter {
        &self.analysis_lo
    }

    pub fn analysis_hi(&self) -> &Filter {
        &self.analysis_hi
    }

    pub fn synthesis_lo(&self) -> &Filter {
        &self.synthesis_lo
    }

    pub fn synthesis_hi(&self) -> &Filter {
        &self.synthesis_hi
    }

    pub fn max_filter_len(&self) -> usize {
        self.analysis_lo
            .len()
            .max(self.analysis_hi.len())
            .max(self.synthesis_lo.len())
            .max(self.synthesis_hi.len())
    }
}

fn binom(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

// --- 1D channel primitives -----------------------------------------------
//
// Analysis anchors the lowpass channel on even full-rate positions and the
// highpass channel on odd ones:  s[k] = sum_j f[j] x~[2k + phase + j]
// where x~ is the whole-sample symmetric extension. Synthesis places the
// subbands back on those grids; parity is preserved by the reflection, so
// a reflected full-rate position always lands in the same channel.

fn analysis_len(n: usize, phase: usize) -> usize {
    (n + 1 - phase) / 2
}

fn analyze_1d(x: &[f64], f: &Filter, phase: usize, out: &mut [f64]) {
    let n = x.len() as i64;
    for (k, o) in out.iter_mut().enumerate() {
        let base = 2 * k as i64 + phase as i64 + f.offset;
        let mut acc = 0.0;
        for (i, t) in f.taps.iter().enumerate() {
            acc += t * x[reflect(base + i as i64, n)];
        }
        *o = acc;
    }
    opcount::add((out.len() * f.taps.len()) as u64);
}

fn analyze_1d_adjoint(s: &[f64], f: &Filter, phase: usize, out: &mut [f64]) {
    let n = out.len() as i64;
    for (k, v) in s.iter().enumerate() {
        let base = 2 * k as i64 + phase as i64 + f.offset;
        for (i, t) in f.taps.iter().enumerate() {
            out[reflect(base + i as i64, n)] += t * v;
        }
    }
    opcount::add((s.len() * f.taps.len()) as u64);
}

fn synthesize_1d(lo: &[f64], hi: &[f64], bank: &FilterBank, out: &mut [f64]) {
    let n = out.len() as i64;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        let v = &bank.synthesis_lo;
        for (j, t) in v.taps.iter().enumerate() {
            let pos = i as i64 - (v.offset + j as i64);
            if pos.rem_euclid(2) == 0 {
                acc += t * lo[reflect(pos, n) / 2];
            }
        }
        let w = &bank.synthesis_hi;
        for (j, t) in w.taps.iter().enumerate() {
            let pos = i as i64 - (w.offset + j as i64);
            if pos.rem_euclid(2) == 1 {
                acc += t * hi[(reflect(pos, n) - 1) / 2];
            }
        }
        *o = acc;
    }
    opcount::add((out.len() * (bank.synthesis_lo.len() + bank.synthesis_hi.len())) as u64 / 2);
}

fn synthesize_1d_adjoint(x: &[f64], bank: &FilterBank, lo: &mut [f64], hi: &mut [f64]) {
    let n = x.len() as i64;
    for (i, v) in x.iter().enumerate() {
        let f = &bank.synthesis_lo;
        for (j, t) in f.taps.iter().enumerate() {
            let pos = i as i64 - (f.offset + j as i64);
            if pos.rem_euclid(2) == 0 {
                lo[reflect(pos, n) / 2] += t * v;
            }
        }
        let w = &bank.synthesis_hi;
        for (j, t) in w.taps.iter().enumerate() {
            let pos = i as i64 - (w.offset + j as i64);
            if pos.rem_euclid(2) == 1 {
                hi[(reflect(pos, n) - 1) / 2] += t * v;
            }
        }
    }
    opcount::add((x.len() * (bank.synthesis_lo.len() + bank.synthesis_hi.len())) as u64 / 2);
}

// --- grid passes ----------------------------------------------------------

/// Split every row into (lowpass, highpass) halves.
fn split_rows(g: &CoeffGrid, bank: &FilterBank) -> (CoeffGrid, CoeffGrid) {
    let n = g.cols();
    let (cl, ch) = (analysis_len(n, 0), analysis_len(n, 1));
    let mut lo = CoeffGrid::zeros(g.rows(), cl);
    let mut hi = CoeffGrid::zeros(g.rows(), ch);
    for r in 0..g.rows() {
        let row = g.row(r);
        analyze_1d(
            row,
            &bank.analysis_lo,
            0,
            &mut lo.data_mut()[r * cl..(r + 1) * cl],
        );
        analyze_1d(
            row,
            &bank.analysis_hi,
            1,
            &mut hi.data_mut()[r * ch..(r + 1) * ch],
        );
    }
    (lo, hi)
}

fn split_rows_adjoint(lo: &CoeffGrid, hi: &CoeffGrid, bank: &FilterBank, n: usize) -> CoeffGrid {
    let mut out = CoeffGrid::zeros(lo.rows(), n);
    for r in 0..lo.rows() {
        let dst = &mut out.data_mut()[r * n..(r + 1) * n];
        analyze_1d_adjoint(lo.row(r), &bank.analysis_lo, 0, dst);
        analyze_1d_adjoint(hi.row(r), &bank.analysis_hi, 1, dst);
    }
    out
}

fn merge_rows(lo: &CoeffGrid, hi: &CoeffGrid, bank: &FilterBank, n: usize) -> CoeffGrid {
    let mut out = CoeffGrid::zeros(lo.rows(), n);
    for r in 0..lo.rows() {
        synthesize_1d(
            lo.row(r),
            hi.row(r),
            bank,
            &mut out.data_mut()[r * n..(r + 1) * n],
        );
    }
    out
}

fn merge_rows_adjoint(x: &CoeffGrid, bank: &FilterBank) -> (CoeffGrid, CoeffGrid) {
    let n = x.cols();
    let (cl, ch) = (analysis_len(n, 0), analysis_len(n, 1));
    let mut lo = CoeffGrid::zeros(x.rows(), cl);
    let mut hi = CoeffGrid::zeros(x.rows(), ch);
    for r in 0..x.rows() {
        synthesize_1d_adjoint(
            x.row(r),
            bank,
            &mut lo.data_mut()[r * cl..(r + 1) * cl],
            &mut hi.data_mut()[r * ch..(r + 1) * ch],
        );
    }
    (lo, hi)
}

struct LevelBands {
    a: CoeffGrid,
    du: CoeffGrid,
    dv: CoeffGrid,
    duv: CoeffGrid,
}

/// One analysis level: rows along v, then columns along u, on each half.
fn analyze_level(g: &CoeffGrid, bank: &FilterBank) -> LevelBands {
    let (lv, hv) = split_rows(g, bank);
    let (a_t, du_t) = split_rows(&lv.transposed(), bank);
    let (dv_t, duv_t) = split_rows(&hv.transposed(), bank);
    LevelBands {
        a: a_t.transposed(),
        du: du_t.transposed(),
        dv: dv_t.transposed(),
        duv: duv_t.transposed(),
    }
}

fn analyze_level_adjoint(
    bands: &LevelBands,
    bank: &FilterBank,
    rows: usize,
    cols: usize,
) -> CoeffGrid {
    let lv_t = split_rows_adjoint(&bands.a.transposed(), &bands.du.transposed(), bank, rows);
    let hv_t = split_rows_adjoint(&bands.dv.transposed(), &bands.duv.transposed(), bank, rows);
    split_rows_adjoint(&lv_t.transposed(), &hv_t.transposed(), bank, cols)
}

fn synthesize_level(bands: &LevelBands, bank: &FilterBank, rows: usize, cols: usize) -> CoeffGrid {
    let lv_t = merge_rows(&bands.a.transposed(), &bands.du.transposed(), bank, rows);
    let hv_t = merge_rows(&bands.dv.transposed(), &bands.duv.transposed(), bank, rows);
    merge_rows(&lv_t.transposed(), &hv_t.transposed(), bank, cols)
}

fn synthesize_level_adjoint(g: &CoeffGrid, bank: &FilterBank) -> LevelBands {
    let (lv, hv) = merge_rows_adjoint(g, bank);
    let (a_t, du_t) = merge_rows_adjoint(&lv.transposed(), bank);
    let (dv_t, duv_t) = merge_rows_adjoint(&hv.transposed(), bank);
    LevelBands {
        a: a_t.transposed(),
        du: du_t.transposed(),
        dv: dv_t.transposed(),
        duv: duv_t.transposed(),
    }
}

// --- coefficient vector ----------------------------------------------------

/// Flat multi-level 2D wavelet coefficient vector.
///
/// Layout: `[a_I, d_u(I), d_v(I), d_uv(I), d_u(I-1), ..., d_uv(1)]`, each
/// subband flattened row-major. The shape ladder is a function of
/// `(rows, cols, levels)` alone, so the vector is self-describing given
/// those three numbers, and its length always equals rows*cols.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveletVec {
    levels: usize,
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

/// Per-level subband dimensions, shallowest (level 1) first:
/// `(a, d_u, d_v, d_uv)` as (rows, cols) pairs.
pub type LevelDims = [(usize, usize); 4];

pub fn shape_ladder(rows: usize, cols: usize, levels: usize) -> Vec<LevelDims> {
    let mut ladder = Vec::with_capacity(levels);
    let (mut r, mut c) = (rows, cols);
    for _ in 0..levels {
        let (cr, fr) = (r.div_ceil(2), r / 2);
        let (cc, fc) = (c.div_ceil(2), c / 2);
        ladder.push([(cr, cc), (fr, cc), (cr, fc), (fr, fc)]);
        r = cr;
        c = cc;
    }
    ladder
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Subband {
    Approx,
    DetailU,
    DetailV,
    DetailUV,
}

impl WaveletVec {
    pub fn zeros(rows: usize, cols: usize, levels: usize) -> Self {
        WaveletVec {
            levels,
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_parts(rows: usize, cols: usize, levels: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BadLadder {
                rows,
                cols,
                levels,
                expected: rows * cols,
                got: data.len(),
            });
        }
        Ok(WaveletVec {
            levels,
            rows,
            cols,
            data,
        })
    }

    pub fn levels(&self) -> usize {
        self.levels
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    /// Flat offset and dimensions of a subband. Approx exists only at the
    /// deepest level.
    pub fn subband_range(&self, level: usize, band: Subband) -> (usize, (usize, usize)) {
        assert!(level >= 1 && level <= self.levels);
        assert!(band == Subband::Approx || level <= self.levels);
        let ladder = shape_ladder(self.rows, self.cols, self.levels);
        let dims_at = |l: usize| ladder[l - 1];
        let size = |d: (usize, usize)| d.0 * d.1;
        let mut off = 0usize;
        let a_dims = dims_at(self.levels)[0];
        if band == Subband::Approx {
            assert!(
                level == self.levels,
                "approx band lives at the deepest level"
            );
            return (0, a_dims);
        }
        off += size(a_dims);
        for l in (1..=self.levels).rev() {
            let d = dims_at(l);
            for (b, dim) in [
                (Subband::DetailU, d[1]),
                (Subband::DetailV, d[2]),
                (Subband::DetailUV, d[3]),
            ] {
                if l == level && b == band {
                    return (off, dim);
                }
                off += size(dim);
            }
        }
        unreachable!()
    }

    /// Copy of one subband as a grid.
    pub fn subband(&self, level: usize, band: Subband) -> CoeffGrid {
        let (off, (r, c)) = self.subband_range(level, band);
        CoeffGrid::from_vec(r, c, self.data[off..off + r * c].to_vec()).expect("layout")
    }
}

/// Checks that `levels` decompositions fit a rows x cols grid: every
/// level must operate on at least two samples per axis. The symmetric
/// extension makes shorter-than-filter levels well defined, so deep
/// ladders on small grids are legal as long as they keep shrinking.
pub fn check_depth(rows: usize, cols: usize, levels: usize, bank: &FilterBank) -> Result<()> {
    validate_depth(rows, cols, levels, bank)
}

fn validate_depth(rows: usize, cols: usize, levels: usize, bank: &FilterBank) -> Result<()> {
    if levels == 0 || levels >= usize::BITS as usize || (rows.min(cols) >> levels) == 0 {
        return Err(Error::TooManyLevels {
            levels,
            rows,
            cols,
            filter_len: bank.max_filter_len(),
        });
    }
    Ok(())
}

/// Forward 2D transform: analysis filtering and downsampling by two, per
/// level, rows then columns.
pub fn dwt2(a0: &CoeffGrid, bank: &FilterBank, levels: usize) -> Result<WaveletVec> {
    validate_depth(a0.rows(), a0.cols(), levels, bank)?;
    let mut detail: Vec<LevelBands> = Vec::with_capacity(levels);
    let mut cur = a0.clone();
    for _ in 0..levels {
        let bands = analyze_level(&cur, bank);
        cur = bands.a.clone();
        detail.push(bands);
    }
    let mut data = Vec::with_capacity(a0.len());
    data.extend_from_slice(cur.data());
    for bands in detail.iter().rev() {
        data.extend_from_slice(bands.du.data());
        data.extend_from_slice(bands.dv.data());
        data.extend_from_slice(bands.duv.data());
    }
    WaveletVec::from_parts(a0.rows(), a0.cols(), levels, data)
}

/// Inverse 2D transform (the synthesis / sparsity operator): exact left
/// inverse of [`dwt2`].
pub fn idwt2(x: &WaveletVec, bank: &FilterBank) -> Result<CoeffGrid> {
    validate_depth(x.rows, x.cols, x.levels, bank)?;
    let ladder = shape_ladder(x.rows, x.cols, x.levels);
    let mut sizes = Vec::with_capacity(x.levels + 1);
    sizes.push((x.rows, x.cols));
    for l in 0..x.levels {
        sizes.push(ladder[l][0]);
    }
    let mut cur = x.subband(x.levels, Subband::Approx);
    for l in (1..=x.levels).rev() {
        let bands = LevelBands {
            a: cur,
            du: x.subband(l, Subband::DetailU),
            dv: x.subband(l, Subband::DetailV),
            duv: x.subband(l, Subband::DetailUV),
        };
        let (r, c) = sizes[l - 1];
        cur = synthesize_level(&bands, bank, r, c);
    }
    Ok(cur)
}

/// Exact transpose of [`idwt2`]: maps a grid to a coefficient vector.
/// This is the reconstruction-side adjoint of the sparsity operator.
pub fn idwt2_adjoint(g: &CoeffGrid, bank: &FilterBank, levels: usize) -> Result<WaveletVec> {
    validate_depth(g.rows(), g.cols(), levels, bank)?;
    let mut detail: Vec<LevelBands> = Vec::with_capacity(levels);
    let mut cur = g.clone();
    for _ in 0..levels {
        let bands = synthesize_level_adjoint(&cur, bank);
        cur = bands.a.clone();
        detail.push(bands);
    }
    let mut data = Vec::with_capacity(g.len());
    data.extend_from_slice(cur.data());
    for bands in detail.iter().rev() {
        data.extend_from_slice(bands.du.data());
        data.extend_from_slice(bands.dv.data());
        data.extend_from_slice(bands.duv.data());
    }
    WaveletVec::from_parts(g.rows(), g.cols(), levels, data)
}

/// Exact transpose of [`dwt2`]: maps a coefficient vector to a grid.
pub fn dwt2_adjoint(x: &WaveletVec, bank: &FilterBank) -> Result<CoeffGrid> {
    validate_depth(x.rows, x.cols, x.levels, bank)?;
    let ladder = shape_ladder(x.rows, x.cols, x.levels);
    let mut sizes = Vec::with_capacity(x.levels + 1);
    sizes.push((x.rows, x.cols));
    for l in 0..x.levels {
        sizes.push(ladder[l][0]);
    }
    let mut cur = x.subband(x.levels, Subband::Approx);
    for l in (1..=x.levels).rev() {
        let bands = LevelBands {
            a: cur,
            du: x.subband(l, Subband::DetailU),
            dv: x.subband(l, Subband::DetailV),
            duv: x.subband(l, Subband::DetailUV),
        };
        let (r, c) = sizes[l - 1];
        cur = analyze_level_adjoint(&bands, bank, r, c);
    }
    Ok(cur)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Xoshiro256;

    fn random_grid(rows: usize, cols: usize, seed: u64) -> CoeffGrid {
        let mut rng = Xoshiro256::seed_from(seed);
        CoeffGrid::from_fn(rows, cols, |_, _| rng.next_f64() * 2.0 - 1.0)
    }

    fn dot(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| x * y).sum()
    }

    #[test]
    fn bior22_filters_match_the_spline_construction() {
        let b = FilterBank::bior(2, 2).unwrap();
        let s2 = std::f64::consts::SQRT_2;
        let want_syn: Vec<f64> = [0.25, 0.5, 0.25].iter().map(|v| v * s2).collect();
        let want_ana: Vec<f64> = [-0.125, 0.25, 0.75, 0.25, -0.125]
            .iter()
            .map(|v| v * s2)
            .collect();
        for (a, w) in b.synthesis_lo.taps().iter().zip(&want_syn) {
            assert!((a - w).abs() < 1e-15);
        }
        for (a, w) in b.analysis_lo.taps().iter().zip(&want_ana) {
            assert!((a - w).abs() < 1e-15);
        }
        assert_eq!(b.synthesis_lo.offset(), -1);
        assert_eq!(b.analysis_lo.offset(), -2);
    }

    #[test]
    fn lowpass_pairs_sum_to_sqrt2_and_are_biorthogonal() {
        for name in ["bior2.2", "bior4.4"] {
            let b = FilterBank::by_name(name).unwrap();
            let s: f64 = b.analysis_lo.taps().iter().sum();
            let t: f64 = b.synthesis_lo.taps().iter().sum();
            assert!((s - std::f64::consts::SQRT_2).abs() < 1e-12, "{name}");
            assert!((t - std::f64::consts::SQRT_2).abs() < 1e-12, "{name}");

            // sum_u v[u + 2k] vdual[u] = delta[k]
            for k in -6i64..=6 {
                let mut acc = 0.0;
                for (i, vd) in b.analysis_lo.taps().iter().enumerate() {
                    let u = b.analysis_lo.offset() + i as i64;
                    let pos = u + 2 * k - b.synthesis_lo.offset();
                    if pos >= 0 && (pos as usize) < b.synthesis_lo.len() {
                        acc += vd * b.synthesis_lo.taps()[pos as usize];
                    }
                }
                let want = if k == 0 { 1.0 } else { 0.0 };
                assert!((acc - want).abs() < 1e-12, "{name} k={k} acc={acc}");
            }
        }
    }

    #[test]
    fn highpass_vanishing_moments() {
        // Synthesis highpass of biorNr.Nd kills polynomials up to its
        // moment count; for the shipped symmetric banks that is Nr.
        for (name, n) in [("bior2.2", 2usize), ("bior4.4", 4usize)] {
            let b = FilterBank::by_name(name).unwrap();
            for m in 0..n {
                let mut acc = 0.0;
                for (i, t) in b.synthesis_hi.taps().iter().enumerate() {
                    let k = (b.synthesis_hi.offset() + i as i64) as f64;
                    acc += k.powi(m as i32) * t;
                }
                assert!(acc.abs() < 1e-10, "{name} moment {m} = {acc}");
                let mut acc = 0.0;
                for (i, t) in b.analysis_hi.taps().iter().enumerate() {
                    let k = (b.analysis_hi.offset() + i as i64) as f64;
                    acc += k.powi(m as i32) * t;
                }
                assert!(acc.abs() < 1e-10, "{name} analysis moment {m} = {acc}");
            }
        }
    }

    #[test]
    fn perfect_reconstruction_1d_all_small_sizes() {
        for name in ["bior2.2", "bior4.4"] {
            let bank = FilterBank::by_name(name).unwrap();
            let mut rng = Xoshiro256::seed_from(31);
            for n in 2..=64usize {
                let x: Vec<f64> = (0..n).map(|_| rng.next_f64() - 0.5).collect();
                let mut lo = vec![0.0; analysis_len(n, 0)];
                let mut hi = vec![0.0; analysis_len(n, 1)];
                analyze_1d(&x, &bank.analysis_lo, 0, &mut lo);
                analyze_1d(&x, &bank.analysis_hi, 1, &mut hi);
                let mut back = vec![0.0; n];
                synthesize_1d(&lo, &hi, &bank, &mut back);
                for (a, b) in x.iter().zip(&back) {
                    assert!((a - b).abs() < 1e-12, "{name} n={n}");
                }
            }
        }
    }

    #[test]
    fn perfect_reconstruction_2d() {
        for name in ["bior2.2", "bior4.4"] {
            let bank = FilterBank::by_name(name).unwrap();
            for (r, c, levels) in [(16, 16, 2), (17, 19, 1), (34, 26, 2), (64, 64, 3)] {
                let g = random_grid(r, c, r as u64 * 1000 + c as u64);
                let x = dwt2(&g, &bank, levels).unwrap();
                let back = idwt2(&x, &bank).unwrap();
                assert!(
                    g.max_abs_diff(&back) < 1e-10,
                    "{name} {r}x{c} L{levels}: {}",
                    g.max_abs_diff(&back)
                );
            }
        }
    }

    #[test]
    fn constant_input_has_exactly_zero_details() {
        let bank = FilterBank::bior(2, 2).unwrap();
        let g = CoeffGrid::constant(20, 20, 3.25);
        let x = dwt2(&g, &bank, 2).unwrap();
        for l in 1..=2 {
            for band in [Subband::DetailU, Subband::DetailV, Subband::DetailUV] {
                let sb = x.subband(l, band);
                for &v in sb.data() {
                    assert_eq!(v, 0.0, "level {l}");
                }
            }
        }
        // Reconstruction recovers the constant exactly too.
        let back = idwt2(&x, &bank).unwrap();
        assert!(g.max_abs_diff(&back) < 1e-12);
    }

    #[test]
    fn bilinear_ramp_kills_duv_interior() {
        // Two vanishing moments annihilate degree-1 polynomials; boundary
        // reflection breaks the polynomial, so check the interior.
        let bank = FilterBank::bior(2, 2).unwrap();
        let g = CoeffGrid::from_fn(24, 24, |r, c| {
            1.0 + 0.5 * r as f64 - 0.25 * c as f64 + 0.125 * (r * c) as f64
        });
        let x = dwt2(&g, &bank, 1).unwrap();
        let duv = x.subband(1, Subband::DetailUV);
        for r in 2..duv.rows() - 2 {
            for c in 2..duv.cols() - 2 {
                assert!(duv[(r, c)].abs() < 1e-10, "({r},{c}) = {}", duv[(r, c)]);
            }
        }
    }

    #[test]
    fn zero_vector_synthesizes_to_zero() {
        let bank = FilterBank::bior(2, 2).unwrap();
        let x = WaveletVec::zeros(16, 16, 2);
        let g = idwt2(&x, &bank).unwrap();
        assert!(g.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn unit_approx_coefficient_renders_the_scaling_footprint() {
        // A single unit in a_(1) away from the boundary synthesizes the
        // separable upsampled lowpass footprint v[i-2k] v[j-2l].
        let bank = FilterBank::bior(2, 2).unwrap();
        let (rows, cols, level) = (16usize, 16usize, 1usize);
        let mut x = WaveletVec::zeros(rows, cols, level);
        let (off, (sr, sc)) = x.subband_range(level, Subband::Approx);
        let (kr, kc) = (4usize, 5usize);
        x.data_mut()[off + kr * sc + kc] = 1.0;
        let _ = sr;
        let g = idwt2(&x, &bank).unwrap();
        let v = bank.synthesis_lo.clone();
        for i in 0..rows {
            for j in 0..cols {
                let fi = i as i64 - 2 * kr as i64 - v.offset();
                let fj = j as i64 - 2 * kc as i64 - v.offset();
                let want = tap_or_zero(&v, fi) * tap_or_zero(&v, fj);
                assert!((g[(i, j)] - want).abs() < 1e-12, "({i},{j})");
            }
        }
    }

    fn tap_or_zero(f: &Filter, idx: i64) -> f64 {
        if idx >= 0 && (idx as usize) < f.len() {
            f.taps()[idx as usize]
        } else {
            0.0
        }
    }

    #[test]
    fn synthesis_adjoint_identity_on_random_grids() {
        for name in ["bior2.2", "bior4.4"] {
            let bank = FilterBank::by_name(name).unwrap();
            for (r, c, levels) in [(16, 16, 2), (19, 17, 1), (33, 32, 2)] {
                let x =
                    WaveletVec::from_parts(r, c, levels, random_grid(r, c, 5).into_vec()).unwrap();
                let g = random_grid(r, c, 6);
                let lhs = dot(idwt2(&x, &bank).unwrap().data(), g.data());
                let rhs = dot(x.data(), idwt2_adjoint(&g, &bank, levels).unwrap().data());
                assert!((lhs - rhs).abs() < 1e-10, "{name} {r}x{c}");

                let lhs = dot(dwt2(&g, &bank, levels).unwrap().data(), x.data());
                let rhs = dot(g.data(), dwt2_adjoint(&x, &bank).unwrap().data());
                assert!((lhs - rhs).abs() < 1e-10, "{name} {r}x{c} analysis");
            }
        }
    }

    #[test]
    fn adjoint_matches_densified_transpose() {
        let bank = FilterBank::bior(2, 2).unwrap();
        let (r, c, levels) = (8usize, 8usize, 2usize);
        let n = r * c;
        // Dense synthesis matrix column by column.
        let mut psi = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut x = WaveletVec::zeros(r, c, levels);
            x.data_mut()[j] = 1.0;
            let g = idwt2(&x, &bank).unwrap();
            for i in 0..n {
                psi[i][j] = g.data()[i];
            }
        }
        // Dense transpose from the adjoint implementation.
        for i in 0..n {
            let g = CoeffGrid::from_vec(r, c, {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .unwrap();
            let row = idwt2_adjoint(&g, &bank, levels).unwrap();
            for j in 0..n {
                assert!((row.data()[j] - psi[i][j]).abs() < 1e-12, "entry ({i},{j})");
            }
        }
    }

    #[test]
    fn adjoint_of_zero_is_zero() {
        let bank = FilterBank::bior(4, 4).unwrap();
        let g = CoeffGrid::zeros(18, 18);
        let x = idwt2_adjoint(&g, &bank, 1).unwrap();
        assert!(x.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn haar_transpose_is_inverse() {
        // Orthonormal bank on even sizes: analysis equals the synthesis
        // transpose, and the transform preserves inner products.
        let bank = FilterBank::haar();
        let g = random_grid(16, 16, 77);
        let analysis = dwt2(&g, &bank, 2).unwrap();
        let transpose = idwt2_adjoint(&g, &bank, 2).unwrap();
        for (a, b) in analysis.data().iter().zip(transpose.data()) {
            assert!((a - b).abs() < 1e-12);
        }
        let h = random_grid(16, 16, 78);
        let xg = dwt2(&g, &bank, 2).unwrap();
        let xh = dwt2(&h, &bank, 2).unwrap();
        assert!((dot(xg.data(), xh.data()) - dot(g.data(), h.data())).abs() < 1e-10);
        let back = idwt2(&xg, &bank).unwrap();
        assert!(g.max_abs_diff(&back) < 1e-12);
    }

    #[test]
    fn linearity() {
        let bank = FilterBank::bior(2, 2).unwrap();
        let g = random_grid(12, 12, 1);
        let h = random_grid(12, 12, 2);
        let combo = CoeffGrid::from_fn(12, 12, |r, c| 2.5 * g[(r, c)] - 0.5 * h[(r, c)]);
        let xg = dwt2(&g, &bank, 1).unwrap();
        let xh = dwt2(&h, &bank, 1).unwrap();
        let xc = dwt2(&combo, &bank, 1).unwrap();
        for i in 0..xc.len() {
            let want = 2.5 * xg.data()[i] - 0.5 * xh.data()[i];
            assert!((xc.data()[i] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn ladder_shapes_and_errors() {
        let ladder = shape_ladder(17, 10, 2);
        assert_eq!(ladder[0], [(9, 5), (8, 5), (9, 5), (8, 5)]);
        assert_eq!(ladder[1], [(5, 3), (4, 3), (5, 2), (4, 2)]);

        let bank = FilterBank::bior(2, 2).unwrap();
        assert!(matches!(
            dwt2(&CoeffGrid::zeros(16, 16), &bank, 5),
            Err(Error::TooManyLevels { .. })
        ));
        assert!(dwt2(&CoeffGrid::zeros(16, 16), &bank, 4).is_ok());
        assert!(matches!(
            dwt2(&CoeffGrid::zeros(16, 16), &bank, 0),
            Err(Error::TooManyLevels { .. })
        ));
        assert!(WaveletVec::from_parts(8, 8, 1, vec![0.0; 63]).is_err());
        assert!(FilterBank::by_name("bior3.3").is_err());
        assert!(FilterBank::by_name("db4").is_err());
    }

    #[test]
    fn subband_offsets_tile_the_vector() {
        let x = WaveletVec::zeros(17, 13, 2);
        let mut seen = vec![false; 17 * 13];
        let mut mark = |off: usize, dims: (usize, usize)| {
            for i in off..off + dims.0 * dims.1 {
                assert!(!seen[i]);
                seen[i] = true;
            }
        };
        let (off, dims) = x.subband_range(2, Subband::Approx);
        mark(off, dims);
        for l in (1..=2usize).rev() {
            for b in [Subband::DetailU, Subband::DetailV, Subband::DetailUV] {
                let (off, dims) = x.subband_range(l, b);
                mark(off, dims);
            }
        }
        assert!(seen.iter().all(|&s| s));
    }
}
