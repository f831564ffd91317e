//! Truncated cone grids, functions on `R x Gamma`, and the operators `Phi`, `Psi`.
//!
//! Nodes sit on a common lattice of spacing `h`: line nodes `x = j h` with
//! `|x| <= x_max`, cone nodes `z = k h` with `|z| < t` at geometric levels
//! `t_i = t_max 2^(-i/n)`. A cone cell has measure
//! `h (2^(1/2n) - 2^(-1/2n)) / t`, the `dz dt / t^2` mass of its box.
//! Because `x + u + z - y` stays on the lattice, each pair of levels reduces
//! to a discrete 1-D convolution.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{dr_poisson, k_kernel, phi, KernelError};
use crate::normed_spaces::{NormSpec, SpaceDescriptor};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncationBox {
    pub t_min: f64,
    pub t_max: f64,
    pub x_max: f64,
}

impl Default for TruncationBox {
    fn default() -> Self {
        TruncationBox {
            t_min: 1.0 / 64.0,
            t_max: 8.0,
            x_max: 32.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConeGrid {
    h: f64,
    levels_per_octave: usize,
    bounds: TruncationBox,
    t_levels: Vec<f64>,
    /// `z = k h` for `|k| <= half_widths[i]` on level `i`.
    half_widths: Vec<usize>,
    cell_measures: Vec<f64>,
    offsets: Vec<usize>,
    x_half: usize,
}

impl ConeGrid {
    pub fn new(h: f64, levels_per_octave: usize, bounds: TruncationBox) -> Result<Self, KernelError> {
        if !(h > 0.0 && h.is_finite()) {
            return Err(KernelError::InvalidGrid(format!("lattice spacing {h} must be positive")));
        }
        if levels_per_octave == 0 {
            return Err(KernelError::InvalidGrid("levels_per_octave must be >= 1".into()));
        }
        let TruncationBox { t_min, t_max, x_max } = bounds;
        if !(t_min > 0.0 && t_max >= t_min && t_max.is_finite() && x_max >= 0.0 && x_max.is_finite()) {
            return Err(KernelError::InvalidGrid(format!("bad truncation box {bounds:?}")));
        }
        let n = levels_per_octave as f64;
        let mut t_levels = Vec::new();
        let mut i = 0usize;
        loop {
            let t = t_max * (-(i as f64) / n).exp2();
            if t < t_min * (1.0 - 1e-12) {
                break;
            }
            t_levels.push(t);
            i += 1;
        }
        let span = (0.5 / n).exp2() - (-0.5 / n).exp2();
        let mut half_widths = Vec::with_capacity(t_levels.len());
        let mut cell_measures = Vec::with_capacity(t_levels.len());
        let mut offsets = vec![0];
        for &t in &t_levels {
            // largest k with k h < t
            let mut k = (t / h).floor() as usize;
            if k as f64 * h >= t {
                k = k.saturating_sub(1);
            }
            half_widths.push(k);
            cell_measures.push(h * span / t);
            offsets.push(offsets.last().unwrap() + 2 * k + 1);
        }
        let x_half = (x_max / h + 1e-9).floor() as usize;
        Ok(ConeGrid {
            h,
            levels_per_octave,
            bounds,
            t_levels,
            half_widths,
            cell_measures,
            offsets,
            x_half,
        })
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn levels_per_octave(&self) -> usize {
        self.levels_per_octave
    }

    pub fn bounds(&self) -> TruncationBox {
        self.bounds
    }

    pub fn t_levels(&self) -> &[f64] {
        &self.t_levels
    }

    pub fn cell_measure(&self, level: usize) -> f64 {
        self.cell_measures[level]
    }

    pub fn z_nodes(&self, level: usize) -> Vec<f64> {
        let k = self.half_widths[level] as i64;
        (-k..=k).map(|j| j as f64 * self.h).collect()
    }

    pub fn x_nodes(&self) -> Vec<f64> {
        let k = self.x_half as i64;
        (-k..=k).map(|j| j as f64 * self.h).collect()
    }

    pub fn x_count(&self) -> usize {
        2 * self.x_half + 1
    }

    pub fn cell_count(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    /// Index of cell `(level, z = k h)`.
    pub fn cell_index(&self, level: usize, k: i64) -> Option<usize> {
        let w = *self.half_widths.get(level)? as i64;
        (k.abs() <= w).then(|| self.offsets[level] + (k + w) as usize)
    }

    /// Total `dz dt / t^2` mass of the cells.
    pub fn total_measure(&self) -> f64 {
        self.half_widths
            .iter()
            .zip(&self.cell_measures)
            .map(|(&k, &m)| (2 * k + 1) as f64 * m)
            .sum()
    }

    /// The same levels with only the `z = 0` cell kept.
    pub fn axis_slice(&self) -> ConeGrid {
        let mut g = self.clone();
        g.half_widths.iter_mut().for_each(|k| *k = 0);
        g.offsets = (0..=g.t_levels.len()).collect();
        g
    }

    /// `2^r` times finer in both `h` and levels per octave.
    pub fn refined(&self, r: u32) -> Result<ConeGrid, KernelError> {
        let f = 1usize << r;
        ConeGrid::new(self.h / f as f64, self.levels_per_octave * f, self.bounds)
    }

    fn same_lattice(&self, other: &ConeGrid) -> Result<(), KernelError> {
        if self.h != other.h {
            return Err(KernelError::GridMismatch(format!(
                "lattice spacing {} vs {}",
                self.h, other.h
            )));
        }
        Ok(())
    }
}

#[derive(Serialize)]
struct ConeGridDocument<'a> {
    h: f64,
    levels_per_octave: usize,
    bounds: TruncationBox,
    t_levels: &'a [f64],
    z_nodes: Vec<Vec<f64>>,
    cell_measures: &'a [f64],
    x_nodes: Vec<f64>,
}

impl Serialize for ConeGrid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ConeGridDocument {
            h: self.h,
            levels_per_octave: self.levels_per_octave,
            bounds: self.bounds,
            t_levels: &self.t_levels,
            z_nodes: (0..self.t_levels.len()).map(|i| self.z_nodes(i)).collect(),
            cell_measures: &self.cell_measures,
            x_nodes: self.x_nodes(),
        }
        .serialize(s)
    }
}

/// Values on `line nodes x cone cells`, laid out `[(y * cells + cell) * d + c]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConeFunction {
    pub grid: ConeGrid,
    pub space: NormSpec,
    pub values: Vec<Complex64>,
}

impl ConeFunction {
    pub fn zeros(grid: ConeGrid, space: NormSpec) -> Self {
        let n = grid.x_count() * grid.cell_count() * space.dim();
        ConeFunction {
            grid,
            space,
            values: vec![Complex64::new(0.0, 0.0); n],
        }
    }

    pub fn new(grid: ConeGrid, space: NormSpec, values: Vec<Complex64>) -> Result<Self, KernelError> {
        let n = grid.x_count() * grid.cell_count() * space.dim();
        if values.len() != n {
            return Err(KernelError::GridMismatch(format!(
                "{} values for {} line nodes x {} cells x dim {}",
                values.len(),
                grid.x_count(),
                grid.cell_count(),
                space.dim()
            )));
        }
        Ok(ConeFunction { grid, space, values })
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    /// Mutable value at line index `y` (`x = (y - x_half) h`) and cell `cell`.
    pub fn at_mut(&mut self, y: usize, cell: usize) -> &mut [Complex64] {
        let d = self.dim();
        let i = (y * self.grid.cell_count() + cell) * d;
        &mut self.values[i..i + d]
    }

    pub fn at(&self, y: usize, cell: usize) -> &[Complex64] {
        let d = self.dim();
        let i = (y * self.grid.cell_count() + cell) * d;
        &self.values[i..i + d]
    }

    /// `(sum_y h sum_cells ||v||^q mu)^(1/q)`, the discrete `L^q(R; L^q(Gamma; B))` norm.
    pub fn lq_norm(&self, q: f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for y in 0..g.x_count() {
            for (level, &w) in g.half_widths.iter().enumerate() {
                let mu = g.cell_measures[level];
                for c in g.offsets[level]..g.offsets[level] + 2 * w + 1 {
                    acc += self.space.norm_unchecked(self.at(y, c)).powf(q) * mu;
                }
            }
        }
        (acc * g.h).powf(1.0 / q)
    }

    /// The `A = L^q(Gamma; B)` norm at line index `y`.
    pub fn a_norm(&self, y: usize, q: f64) -> f64 {
        let g = &self.grid;
        let mut acc = 0.0;
        for (level, &w) in g.half_widths.iter().enumerate() {
            for c in g.offsets[level]..g.offsets[level] + 2 * w + 1 {
                acc += self.space.norm_unchecked(self.at(y, c)).powf(q) * g.cell_measures[level];
            }
        }
        acc.powf(1.0 / q)
    }
}

#[derive(Serialize)]
struct ConeFunctionDocument<'a> {
    grid: &'a ConeGrid,
    space: SpaceDescriptor,
    values: Vec<[f64; 2]>,
}

impl Serialize for ConeFunction {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        ConeFunctionDocument {
            grid: &self.grid,
            space: self.space.descriptor(),
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
        .serialize(s)
    }
}

/// A `B`-valued function on the line nodes of a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineFunction {
    pub x_nodes: Vec<f64>,
    pub dim: usize,
    pub values: Vec<Complex64>,
}

impl LineFunction {
    pub fn at(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.dim..(j + 1) * self.dim]
    }
}

/// `H_t(v) = sum_{y - z = v} h(y, z, t) mu_t h_y` for each input level, indexed
/// from `v = -(x_half + k_t)`.
fn collapse_levels(h: &ConeFunction) -> Vec<Vec<Complex64>> {
    let g = &h.grid;
    let d = h.dim();
    let xh = g.x_half as i64;
    g.half_widths
        .iter()
        .enumerate()
        .map(|(level, &w)| {
            let w = w as i64;
            let lo = -(xh + w);
            let mut out = vec![Complex64::new(0.0, 0.0); (2 * (xh + w) + 1) as usize * d];
            let scale = g.cell_measures[level] * g.h;
            for y in -xh..=xh {
                for k in -w..=w {
                    let cell = g.offsets[level] + (k + w) as usize;
                    let v = (y - k - lo) as usize;
                    for (o, x) in out[v * d..(v + 1) * d].iter_mut().zip(h.at((y + xh) as usize, cell)) {
                        *o += x * scale;
                    }
                }
            }
            out
        })
        .collect()
}

/// `out[w - w_lo] += sum_v kern(w - v) H[v]` for `w in w_lo..=w_hi`.
fn lattice_convolve(
    collapsed: &[Complex64],
    v_lo: i64,
    d: usize,
    w_lo: i64,
    w_hi: i64,
    kern: impl Fn(f64) -> f64,
    h: f64,
    out: &mut [Complex64],
) {
    let nv = (collapsed.len() / d) as i64;
    let v_hi = v_lo + nv - 1;
    let diff_lo = w_lo - v_hi;
    let table: Vec<f64> = (diff_lo..=w_hi - v_lo).map(|m| kern(m as f64 * h)).collect();
    for w in w_lo..=w_hi {
        let o = &mut out[(w - w_lo) as usize * d..(w - w_lo + 1) as usize * d];
        for v in 0..nv {
            let kv = table[(w - (v_lo + v) - diff_lo) as usize];
            for (oc, x) in o.iter_mut().zip(&collapsed[v as usize * d..(v as usize + 1) * d]) {
                *oc += x * kv;
            }
        }
    }
}

/// `Phi(h)(x, u, s) = int_Gamma int k_{s,t}(x + u + z - y) h(y, z, t) dy dz dt / t^2`
/// on the line nodes and cone cells of `out`. With `u_slice` only `u = 0` is
/// computed and the result lives on `out.axis_slice()`.
pub fn apply_phi(h: &ConeFunction, out: &ConeGrid, u_slice: bool) -> Result<ConeFunction, KernelError> {
    h.grid.same_lattice(out)?;
    let target = if u_slice { out.axis_slice() } else { out.clone() };
    let d = h.dim();
    let collapsed = collapse_levels(h);
    let xin = h.grid.x_half as i64;
    let xo = target.x_half as i64;
    let mut result = ConeFunction::zeros(target.clone(), h.space.clone());
    for (i, &s) in target.t_levels.iter().enumerate() {
        let ku = target.half_widths[i] as i64;
        let (w_lo, w_hi) = (-(xo + ku), xo + ku);
        let mut summed = vec![Complex64::new(0.0, 0.0); (w_hi - w_lo + 1) as usize * d];
        for (j, &t) in h.grid.t_levels.iter().enumerate() {
            let v_lo = -(xin + h.grid.half_widths[j] as i64);
            lattice_convolve(&collapsed[j], v_lo, d, w_lo, w_hi, |x| k_kernel(s, t, x), h.grid.h, &mut summed);
        }
        for x in -xo..=xo {
            for u in -ku..=ku {
                let cell = target.offsets[i] + (u + ku) as usize;
                let w = (x + u - w_lo) as usize;
                result
                    .at_mut((x + xo) as usize, cell)
                    .copy_from_slice(&summed[w * d..(w + 1) * d]);
            }
        }
    }
    Ok(result)
}

fn apply_line(h: &ConeFunction, kern: impl Fn(f64, f64) -> f64) -> LineFunction {
    let d = h.dim();
    let collapsed = collapse_levels(h);
    let xh = h.grid.x_half as i64;
    let mut values = vec![Complex64::new(0.0, 0.0); (2 * xh + 1) as usize * d];
    for (j, &t) in h.grid.t_levels.iter().enumerate() {
        let v_lo = -(xh + h.grid.half_widths[j] as i64);
        lattice_convolve(&collapsed[j], v_lo, d, -xh, xh, |x| kern(t, x), h.grid.h, &mut values);
    }
    LineFunction {
        x_nodes: h.grid.x_nodes(),
        dim: d,
        values,
    }
}

/// `Psi(h)(x) = int_Gamma int phi_t(x + z - y) h(y, z, t) dy dz dt / t^2` on the line nodes of `h`.
pub fn apply_psi(h: &ConeFunction) -> LineFunction {
    apply_line(h, phi)
}

/// `(P_s * Psi(h))(x)` on the line nodes of `h`, cell by cell through
/// `P_s * phi_t = t (d_r P_r)` at `r = s + t`.
pub fn poisson_extend_psi(h: &ConeFunction, s: f64) -> Result<LineFunction, KernelError> {
    super::positive("s", s)?;
    Ok(apply_line(h, |t, x| t * dr_poisson(s + t, x)))
}

/// Resolutions `r = 0..resolutions` use `h0 / 2^r` and `levels_per_octave0 * 2^r`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub h0: f64,
    pub levels_per_octave0: usize,
    pub bounds: TruncationBox,
    pub resolutions: usize,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig {
            h0: 0.125,
            levels_per_octave0: 1,
            bounds: TruncationBox {
                t_min: 0.25,
                t_max: 2.0,
                x_max: 4.0,
            },
            resolutions: 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpNormRow {
    pub resolution: usize,
    pub q: f64,
    pub estimate: f64,
    pub trials: usize,
    pub seed: u64,
    pub bounds: TruncationBox,
}

impl OpNormRow {
    pub const CSV_HEADER: &'static str = "resolution,q,estimate,trials,seed";

    pub fn csv_row(&self) -> String {
        format!("{},{},{:.16e},{},{}", self.resolution, self.q, self.estimate, self.trials, self.seed)
    }
}

/// `||Phi h|| / ||h||` in the discrete `L^q(R; L^q(Gamma; B))` norms, output on the grid of `h`.
pub fn op_norm_ratio(h: &ConeFunction, q: f64) -> Result<f64, KernelError> {
    let num = apply_phi(h, &h.grid, false)?.lq_norm(q);
    let den = h.lq_norm(q);
    if den == 0.0 {
        return Err(KernelError::InvalidParameter("input has zero norm".into()));
    }
    Ok(num / den)
}

/// Piecewise-constant transfer of a coarse function to a grid `2^r` times finer.
fn prolong(coarse: &ConeFunction, fine: &ConeGrid, r: u32) -> ConeFunction {
    let rho = 1i64 << r;
    let half = rho / 2;
    let cg = &coarse.grid;
    let mut out = ConeFunction::zeros(fine.clone(), coarse.space.clone());
    let (fx, cx) = (fine.x_half as i64, cg.x_half as i64);
    for y in -fx..=fx {
        let yc = (y + half).div_euclid(rho);
        if yc.abs() > cx {
            continue;
        }
        for (level, &w) in fine.half_widths.iter().enumerate() {
            let lc = (level as i64 + half).div_euclid(rho) as usize;
            let w = w as i64;
            for k in -w..=w {
                let kc = (k + half).div_euclid(rho);
                let Some(cc) = cg.cell_index(lc, kc) else { continue };
                let cell = fine.offsets[level] + (k + w) as usize;
                let v = coarse.at((yc + cx) as usize, cc).to_vec();
                out.at_mut((y + fx) as usize, cell).copy_from_slice(&v);
            }
        }
    }
    out
}

/// For each resolution, the max over `trials` seeded Gaussian inputs (drawn on
/// the coarsest grid and prolonged) of `||Phi h||_q / ||h||_q`, scalar `B`.
pub fn op_norm_estimate(q: f64, probe: &ProbeConfig, trials: usize, seed: u64) -> Result<Vec<OpNormRow>, KernelError> {
    if !(q > 1.0 && q.is_finite()) {
        return Err(KernelError::InvalidParameter(format!("q = {q} must lie in (1, inf)")));
    }
    if trials == 0 || probe.resolutions == 0 {
        return Err(KernelError::InvalidParameter("trials and resolutions must be >= 1".into()));
    }
    let space = NormSpec::lp(2.0, 1).expect("scalar space");
    let base = ConeGrid::new(probe.h0, probe.levels_per_octave0, probe.bounds)?;
    let inputs: Vec<ConeFunction> = (0..trials)
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(k as u64));
            let mut f = ConeFunction::zeros(base.clone(), space.clone());
            for v in f.values.iter_mut() {
                *v = Complex64::new(StandardNormal.sample(&mut rng), 0.0);
            }
            f
        })
        .collect();
    let mut rows = Vec::with_capacity(probe.resolutions);
    for r in 0..probe.resolutions as u32 {
        let grid = base.refined(r)?;
        let mut best = 0.0f64;
        for input in &inputs {
            let h = prolong(input, &grid, r);
            best = best.max(op_norm_ratio(&h, q)?);
        }
        rows.push(OpNormRow {
            resolution: r as usize,
            q,
            estimate: best,
            trials,
            seed,
            bounds: probe.bounds,
        });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small_grid() -> ConeGrid {
        ConeGrid::new(
            0.25,
            1,
            TruncationBox {
                t_min: 0.5,
                t_max: 2.0,
                x_max: 2.0,
            },
        )
        .unwrap()
    }

    fn scalar() -> NormSpec {
        NormSpec::lp(2.0, 1).unwrap()
    }

    fn random(grid: &ConeGrid, seed: u64) -> ConeFunction {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut f = ConeFunction::zeros(grid.clone(), scalar());
        for v in f.values.iter_mut() {
            *v = Complex64::new(StandardNormal.sample(&mut rng), StandardNormal.sample(&mut rng));
        }
        f
    }

    #[test]
    fn grid_invariants() {
        let g = ConeGrid::new(0.125, 2, TruncationBox::default()).unwrap();
        assert_eq!(g.t_levels()[0], 8.0);
        assert!((g.t_levels().last().unwrap() - 1.0 / 64.0).abs() < 1e-15);
        assert_eq!(g.t_levels().len(), 2 * 9 + 1);
        for (i, &t) in g.t_levels().iter().enumerate() {
            assert!(g.z_nodes(i).iter().all(|z| z.abs() < t));
            assert!(g.cell_measure(i) > 0.0);
        }
        assert_eq!(g.x_count(), 2 * 256 + 1);
        // t = 0.25 exactly: |z| < t excludes z = +-0.25
        let g = small_grid();
        assert_eq!(g.z_nodes(2), vec![-0.25, 0.0, 0.25]);
        assert_eq!(g.z_nodes(0).len(), 15);
        let total = g.total_measure();
        assert!(total.is_finite() && total == small_grid().total_measure());
        assert!(ConeGrid::new(0.0, 1, TruncationBox::default()).is_err());
        assert!(ConeGrid::new(0.1, 0, TruncationBox::default()).is_err());
    }

    #[test]
    fn grid_serializes_node_lists() {
        let v = serde_json::to_value(small_grid()).unwrap();
        assert_eq!(v["t_levels"].as_array().unwrap().len(), 3);
        assert_eq!(v["z_nodes"][2].as_array().unwrap().len(), 3);
        assert_eq!(v["x_nodes"].as_array().unwrap().len(), 17);
        assert_eq!(v["bounds"]["x_max"], 2.0);
        let f = ConeFunction::zeros(small_grid(), scalar());
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v["values"].as_array().unwrap().len(), f.values.len());
    }

    #[test]
    fn single_cell_collapse() {
        let g = small_grid();
        let mut h = ConeFunction::zeros(g.clone(), scalar());
        let (y0, level0, k0) = (3usize, 1usize, -2i64);
        let cell0 = g.cell_index(level0, k0).unwrap();
        h.at_mut(y0, cell0)[0] = Complex64::new(1.0, 0.0);
        let yv = (y0 as f64 - g.x_half as f64) * g.h();
        let (t0, z0) = (g.t_levels()[level0], k0 as f64 * g.h());
        let weight = g.cell_measure(level0) * g.h();
        let out = apply_phi(&h, &g, false).unwrap();
        for (xi, x) in g.x_nodes().into_iter().enumerate() {
            for (i, &s) in g.t_levels().iter().enumerate() {
                for u in g.z_nodes(i) {
                    let c = g.cell_index(i, (u / g.h()).round() as i64).unwrap();
                    let exact = super::super::kernel_eval(super::super::KernelKind::K, Some(s), t0, x + u + z0 - yv).unwrap() * weight;
                    let got = out.at(xi, c)[0];
                    assert!((got.re - exact).abs() <= 1e-12 * exact.abs().max(1e-3) && got.im == 0.0);
                }
            }
        }
        let psi = apply_psi(&h);
        for (xi, x) in g.x_nodes().into_iter().enumerate() {
            let exact = phi(t0, x + z0 - yv) * weight;
            assert!((psi.at(xi)[0].re - exact).abs() <= 1e-12 * exact.abs().max(1e-3));
        }
    }

    #[test]
    fn zero_and_linearity() {
        let g = small_grid();
        let z = ConeFunction::zeros(g.clone(), scalar());
        assert!(apply_phi(&z, &g, false).unwrap().values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        assert!(apply_psi(&z).values.iter().all(|v| *v == Complex64::new(0.0, 0.0)));
        let (a, b) = (random(&g, 1), random(&g, 2));
        let alpha = Complex64::new(0.7, -1.3);
        let mut c = a.clone();
        for (cv, bv) in c.values.iter_mut().zip(&b.values) {
            *cv = *cv * alpha + bv;
        }
        let (pa, pb, pc) = (
            apply_phi(&a, &g, false).unwrap(),
            apply_phi(&b, &g, false).unwrap(),
            apply_phi(&c, &g, false).unwrap(),
        );
        let scale = pc.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        for ((x, y), z) in pa.values.iter().zip(&pb.values).zip(&pc.values) {
            assert!((x * alpha + y - z).norm() <= 1e-13 * scale);
        }
    }

    #[test]
    fn u_slice_is_the_axis_of_the_full_output() {
        let g = small_grid();
        let h = random(&g, 3);
        let full = apply_phi(&h, &g, false).unwrap();
        let slice = apply_phi(&h, &g, true).unwrap();
        assert_eq!(slice.grid.cell_count(), g.t_levels().len());
        for x in 0..g.x_count() {
            for i in 0..g.t_levels().len() {
                assert_eq!(slice.at(x, i), full.at(x, g.cell_index(i, 0).unwrap()));
            }
        }
    }

    #[test]
    fn lattice_mismatch_is_an_error() {
        let h = random(&small_grid(), 4);
        let other = ConeGrid::new(0.5, 1, small_grid().bounds()).unwrap();
        assert!(matches!(apply_phi(&h, &other, false), Err(KernelError::GridMismatch(_))));
        assert!(ConeFunction::new(small_grid(), scalar(), vec![]).is_err());
    }

    #[test]
    fn phi_tilde_is_s_d_s_of_poisson_extended_psi() {
        let g = small_grid();
        let h = random(&g, 5);
        let slice = apply_phi(&h, &g, true).unwrap();
        for (i, &s) in g.t_levels().iter().enumerate() {
            let err = |delta: f64| {
                let up = poisson_extend_psi(&h, s + delta).unwrap();
                let dn = poisson_extend_psi(&h, s - delta).unwrap();
                let mut worst = 0.0f64;
                let mut scale = 0.0f64;
                for x in 0..g.x_count() {
                    let fd = (up.at(x)[0] - dn.at(x)[0]) * (s / (2.0 * delta));
                    worst = worst.max((fd - slice.at(x, i)[0]).norm());
                    scale = scale.max(slice.at(x, i)[0].norm());
                }
                worst / scale
            };
            let (coarse, fine) = (err(1e-2 * s), err(5e-3 * s));
            assert!(fine < 1e-4, "{fine}");
            // central differences: error drops by about 4 under halving
            assert!(coarse / fine > 3.0 && coarse / fine < 5.0, "{coarse} {fine}");
        }
    }

    #[test]
    fn single_cell_ratio_matches_brute_force() {
        let g = small_grid();
        let mut h = ConeFunction::zeros(g.clone(), scalar());
        let (level0, k0, y0) = (0usize, 3i64, 5usize);
        h.at_mut(y0, g.cell_index(level0, k0).unwrap())[0] = Complex64::new(1.0, 0.0);
        for q in [1.5, 2.0, 3.0] {
            let ratio = op_norm_ratio(&h, q).unwrap();
            let yv = (y0 as f64 - g.x_half as f64) * g.h();
            let (t0, z0) = (g.t_levels()[level0], k0 as f64 * g.h());
            let wt = g.cell_measure(level0) * g.h();
            let mut num = 0.0;
            for x in g.x_nodes() {
                for (i, &s) in g.t_levels().iter().enumerate() {
                    for u in g.z_nodes(i) {
                        num += (k_kernel(s, t0, x + u + z0 - yv) * wt).abs().powf(q) * g.cell_measure(i) * g.h();
                    }
                }
            }
            let den = (g.cell_measure(level0) * g.h()).powf(1.0 / q);
            let brute = num.powf(1.0 / q) / den;
            assert!((ratio - brute).abs() <= 1e-10 * brute, "{ratio} {brute}");
        }
    }

    #[test]
    fn op_norm_rows_are_deterministic() {
        let probe = ProbeConfig {
            resolutions: 2,
            ..ProbeConfig::default()
        };
        let a = op_norm_estimate(2.0, &probe, 2, 11).unwrap();
        let b = op_norm_estimate(2.0, &probe, 2, 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|r| r.estimate.is_finite() && r.estimate > 0.0));
        assert!(a[0].csv_row().starts_with("0,2,"));
        assert!(op_norm_estimate(1.0, &probe, 2, 11).is_err());
    }

    #[test]
    fn prolongation_preserves_coarse_values() {
        let g = small_grid();
        let h = random(&g, 9);
        let same = prolong(&h, &g, 0);
        assert_eq!(same, h);
        let fine = g.refined(1).unwrap();
        let p = prolong(&h, &fine, 1);
        // coarse node y = 0, level 0, z = 0 sits on fine node y = 0, level 0, z = 0
        let fc = fine.cell_index(0, 0).unwrap();
        let cc = g.cell_index(0, 0).unwrap();
        assert_eq!(p.at(fine.x_half, fc), h.at(g.x_half, cc));
        // piecewise-constant transfer keeps the L^q norm close
        let (a, b) = (h.lq_norm(2.0), p.lq_norm(2.0));
        assert!((a / b - 1.0).abs() < 0.3, "{a} {b}");
    }
}
