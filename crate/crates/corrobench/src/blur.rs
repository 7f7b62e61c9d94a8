//! Blur family: motion, defocus, frosted-glass, Gaussian, and spatially
//! varying PSF blur.
//!
//! All blurs run in linear light with clamp-to-edge borders. Kernels are
//! normalized to unit mass; weights are kept in `f64` so that accumulation
//! error never shows up after 8-bit quantization.

use std::io::{Read, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::pixel::LinearImage;
use crate::rng::RandomStream;

/// Odd-sized square convolution kernel with non-negative unit-mass weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Kernel2D {
    size: usize,
    weights: Vec<f64>,
}

impl Kernel2D {
    /// Wrap raw weights; `size` must be odd and the mass within 1e-6 of 1.
    pub fn new(size: usize, weights: Vec<f64>) -> Result<Self> {
        if size == 0 || size % 2 == 0 {
            return Err(Error::Parameter(format!("kernel size {size} must be odd")));
        }
        if weights.len() != size * size {
            return Err(Error::Parameter(format!(
                "kernel weight count {} does not match {size}x{size}",
                weights.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Parameter(
                "kernel weights must be finite and non-negative".into(),
            ));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::Parameter(format!(
                "kernel mass {sum} deviates from 1 by more than 1e-6"
            )));
        }
        Ok(Self { size, weights })
    }

    /// Single-tap identity kernel.
    pub fn identity() -> Self {
        Self {
            size: 1,
            weights: vec![1.0],
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn radius(&self) -> usize {
        self.size / 2
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Weight at offset (dy, dx) from the center.
    pub fn at(&self, dy: i64, dx: i64) -> f64 {
        let r = self.radius() as i64;
        self.weights[((dy + r) * self.size as i64 + (dx + r)) as usize]
    }

    /// Second moment of the weight distribution along one axis.
    pub fn second_moment(&self) -> f64 {
        let r = self.radius() as i64;
        let mut m = 0.0;
        for dy in -r..=r {
            for dx in -r..=r {
                m += self.at(dy, dx) * (dx * dx) as f64;
            }
        }
        m
    }

    fn nonzero_taps(&self) -> Vec<(i64, i64, f64)> {
        let r = self.radius() as i64;
        let mut taps = Vec::new();
        for dy in -r..=r {
            for dx in -r..=r {
                let w = self.at(dy, dx);
                if w != 0.0 {
                    taps.push((dy, dx, w));
                }
            }
        }
        taps
    }

    fn normalized(size: usize, mut weights: Vec<f64>) -> Self {
        let sum: f64 = weights.iter().sum();
        for w in &mut weights {
            *w /= sum;
        }
        Self { size, weights }
    }
}

// ---------------------------------------------------------------------------
// Kernel generators
// ---------------------------------------------------------------------------

fn check_param(ok: bool, msg: &str) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Parameter(msg.into()))
    }
}

/// Point-sampled Gaussian kernel, truncated at 4σ so the discrete second
/// moment stays within a fraction of a percent of σ².
pub fn make_gaussian_kernel(sigma: f64) -> Result<Kernel2D> {
    check_param(sigma.is_finite() && sigma > 0.0, "gaussian sigma must be positive")?;
    let radius = (4.0 * sigma).ceil() as usize;
    Ok(gaussian_kernel_sized(sigma, 2 * radius + 1))
}

/// Gaussian kernel sampled on a fixed odd size (used for PSF grids, where
/// every node must share one size).
pub fn gaussian_kernel_sized(sigma: f64, size: usize) -> Kernel2D {
    debug_assert!(size % 2 == 1);
    let r = (size / 2) as i64;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut weights = Vec::with_capacity(size * size);
    for dy in -r..=r {
        for dx in -r..=r {
            let d2 = (dx * dx + dy * dy) as f64;
            weights.push((-d2 * inv).exp());
        }
    }
    Kernel2D::normalized(size, weights)
}

/// Disk (defocus) kernel with area-coverage anti-aliased boundary.
pub fn make_disk_kernel(radius: f64) -> Result<Kernel2D> {
    check_param(
        radius.is_finite() && radius >= 0.5,
        "disk radius must be at least 0.5",
    )?;
    let half = (radius + 0.5).floor() as i64;
    let size = (2 * half + 1) as usize;
    let mut weights = Vec::with_capacity(size * size);
    for dy in -half..=half {
        for dx in -half..=half {
            weights.push(disk_coverage(dx as f64, dy as f64, radius));
        }
    }
    Ok(Kernel2D::normalized(size, weights))
}

/// Fraction of the unit pixel square centered at (cx, cy) inside the disk.
fn disk_coverage(cx: f64, cy: f64, radius: f64) -> f64 {
    let nearest = ((cx.abs() - 0.5).max(0.0).powi(2) + (cy.abs() - 0.5).max(0.0).powi(2)).sqrt();
    let farthest = ((cx.abs() + 0.5).powi(2) + (cy.abs() + 0.5).powi(2)).sqrt();
    if farthest <= radius {
        return 1.0;
    }
    if nearest >= radius {
        return 0.0;
    }
    // Boundary cell: 16x16 subsample grid.
    const N: usize = 16;
    let mut inside = 0usize;
    for sy in 0..N {
        for sx in 0..N {
            let px = cx - 0.5 + (sx as f64 + 0.5) / N as f64;
            let py = cy - 0.5 + (sy as f64 + 0.5) / N as f64;
            if px * px + py * py <= radius * radius {
                inside += 1;
            }
        }
    }
    inside as f64 / (N * N) as f64
}

/// Straight-line motion kernel; the angle is folded into `[0, π)` so θ and
/// θ+π rasterize identically.
pub fn make_motion_kernel(length: f64, angle: f64) -> Result<Kernel2D> {
    check_param(
        length.is_finite() && length >= 1.0 && angle.is_finite(),
        "motion length must be >= 1 and angle finite",
    )?;
    let angle = angle.rem_euclid(std::f64::consts::PI);
    let half = length / 2.0;
    let r = half.ceil() as i64;
    let size = (2 * r + 1) as usize;
    let mut weights = vec![0.0f64; size * size];

    let (dir_y, dir_x) = angle.sin_cos();
    let steps = (length / 0.125).ceil() as usize;
    for i in 0..=steps {
        let t = -half + length * i as f64 / steps as f64;
        let x = r as f64 + t * dir_x;
        let y = r as f64 + t * dir_y;
        // Bilinear splat.
        let x0 = x.floor();
        let y0 = y.floor();
        let fx = x - x0;
        let fy = y - y0;
        let x0 = x0 as i64;
        let y0 = y0 as i64;
        for (ix, iy, w) in [
            (x0, y0, (1.0 - fx) * (1.0 - fy)),
            (x0 + 1, y0, fx * (1.0 - fy)),
            (x0, y0 + 1, (1.0 - fx) * fy),
            (x0 + 1, y0 + 1, fx * fy),
        ] {
            if ix >= 0 && iy >= 0 && (ix as usize) < size && (iy as usize) < size {
                weights[iy as usize * size + ix as usize] += w;
            }
        }
    }
    Ok(Kernel2D::normalized(size, weights))
}

// ---------------------------------------------------------------------------
// Convolution
// ---------------------------------------------------------------------------

fn split_planes(img: &LinearImage) -> [Vec<f32>; 3] {
    let n = img.width() as usize * img.height() as usize;
    let mut planes = [
        Vec::with_capacity(n),
        Vec::with_capacity(n),
        Vec::with_capacity(n),
    ];
    for px in img.pixels().chunks_exact(3) {
        planes[0].push(px[0]);
        planes[1].push(px[1]);
        planes[2].push(px[2]);
    }
    planes
}

fn merge_planes(width: u32, height: u32, planes: [Vec<f32>; 3]) -> LinearImage {
    let n = width as usize * height as usize;
    let mut pixels = Vec::with_capacity(n * 3);
    for i in 0..n {
        pixels.push(planes[0][i]);
        pixels.push(planes[1][i]);
        pixels.push(planes[2][i]);
    }
    LinearImage::from_pixels(width, height, pixels).expect("plane sizes agree")
}

/// Per-channel 2D convolution with clamp-to-edge borders.
pub fn convolve(img: &LinearImage, kernel: &Kernel2D) -> LinearImage {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let r = kernel.radius() as i64;
    let taps = kernel.nonzero_taps();
    // Tap offsets against a flat plane, valid away from the borders.
    let flat: Vec<(isize, f64)> = taps
        .iter()
        .map(|&(dy, dx, wt)| ((dy * w as i64 + dx) as isize, wt))
        .collect();

    let planes = split_planes(img);
    let mut out_planes = [vec![0.0f32; w * h], vec![0.0f32; w * h], vec![0.0f32; w * h]];

    for ch in 0..3 {
        let src = &planes[ch];
        let dst = &mut out_planes[ch];
        for y in 0..h {
            let interior_row = y as i64 >= r && y as i64 + r < h as i64;
            for x in 0..w {
                let idx = y * w + x;
                if interior_row && x as i64 >= r && x as i64 + r < w as i64 {
                    let mut acc = 0.0f64;
                    for &(off, wt) in &flat {
                        acc += wt * src[(idx as isize + off) as usize] as f64;
                    }
                    dst[idx] = acc as f32;
                } else {
                    let mut acc = 0.0f64;
                    for &(dy, dx, wt) in &taps {
                        let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                        let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                        acc += wt * src[sy * w + sx] as f64;
                    }
                    dst[idx] = acc as f32;
                }
            }
        }
    }
    merge_planes(img.width(), img.height(), out_planes)
}

/// Gaussian blur via two separable passes; identical weights to
/// [`make_gaussian_kernel`] (a point-sampled Gaussian factorizes exactly).
pub fn gaussian_blur(img: &LinearImage, sigma: f64) -> Result<LinearImage> {
    check_param(sigma.is_finite() && sigma > 0.0, "gaussian sigma must be positive")?;
    let radius = (4.0 * sigma).ceil() as i64;
    let inv = 1.0 / (2.0 * sigma * sigma);
    let mut weights: Vec<f64> = (-radius..=radius)
        .map(|d| (-((d * d) as f64) * inv).exp())
        .collect();
    let sum: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= sum;
    }

    let w = img.width() as usize;
    let h = img.height() as usize;
    let planes = split_planes(img);
    let mut out_planes = [vec![0.0f32; w * h], vec![0.0f32; w * h], vec![0.0f32; w * h]];

    for ch in 0..3 {
        let src = &planes[ch];
        // Horizontal pass.
        let mut tmp = vec![0.0f32; w * h];
        for y in 0..h {
            let row = &src[y * w..(y + 1) * w];
            for x in 0..w {
                let mut acc = 0.0f64;
                for (k, &wt) in weights.iter().enumerate() {
                    let sx = (x as i64 + k as i64 - radius).clamp(0, w as i64 - 1) as usize;
                    acc += wt * row[sx] as f64;
                }
                tmp[y * w + x] = acc as f32;
            }
        }
        // Vertical pass.
        let dst = &mut out_planes[ch];
        for y in 0..h {
            for x in 0..w {
                let mut acc = 0.0f64;
                for (k, &wt) in weights.iter().enumerate() {
                    let sy = (y as i64 + k as i64 - radius).clamp(0, h as i64 - 1) as usize;
                    acc += wt * tmp[sy * w + x] as f64;
                }
                dst[y * w + x] = acc as f32;
            }
        }
    }
    Ok(merge_planes(img.width(), img.height(), out_planes))
}

// ---------------------------------------------------------------------------
// Frosted glass
// ---------------------------------------------------------------------------

/// Frosted-glass blur: `iterations` passes of per-pixel random neighbor
/// swaps within `max_shift`, then a Gaussian pass (skipped when
/// `post_sigma == 0`). The swap phase is a permutation of pixels, so the
/// pre-blur value multiset is preserved exactly.
pub fn frosted_glass(
    img: &LinearImage,
    max_shift: u32,
    iterations: u32,
    post_sigma: f64,
    rng: &mut RandomStream,
) -> Result<LinearImage> {
    check_param(max_shift >= 1, "frosted glass max_shift must be >= 1")?;
    let w = img.width() as i64;
    let h = img.height() as i64;
    let span = 2 * max_shift as u64 + 1;
    let mut out = img.clone();
    for _ in 0..iterations {
        for y in 0..h {
            for x in 0..w {
                let dx = rng.next_below(span) as i64 - max_shift as i64;
                let dy = rng.next_below(span) as i64 - max_shift as i64;
                let tx = (x + dx).clamp(0, w - 1);
                let ty = (y + dy).clamp(0, h - 1);
                if tx == x && ty == y {
                    continue;
                }
                let a = out.get(x as u32, y as u32);
                let b = out.get(tx as u32, ty as u32);
                out.put(x as u32, y as u32, b);
                out.put(tx as u32, ty as u32, a);
            }
        }
    }
    if post_sigma > 0.0 {
        gaussian_blur(&out, post_sigma)
    } else {
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// Spatially varying PSF
// ---------------------------------------------------------------------------

/// Grid of kernels anchored at evenly spaced image positions; the effective
/// kernel at a pixel is the bilinear blend of its four surrounding nodes.
#[derive(Debug, Clone)]
pub struct PsfGrid {
    rows: usize,
    cols: usize,
    kernel_size: usize,
    kernels: Vec<Kernel2D>,
}

impl PsfGrid {
    pub fn new(rows: usize, cols: usize, kernel_size: usize, kernels: Vec<Kernel2D>) -> Result<Self> {
        if rows < 2 || cols < 2 {
            return Err(Error::Parameter(format!(
                "PSF grid must be at least 2x2, got {rows}x{cols}"
            )));
        }
        if kernels.len() != rows * cols {
            return Err(Error::Parameter(format!(
                "PSF grid expects {rows}x{cols} = {} kernels, got {}",
                rows * cols,
                kernels.len()
            )));
        }
        if kernels.iter().any(|k| k.size() != kernel_size) {
            return Err(Error::Parameter(
                "every PSF grid kernel must share the grid kernel size".into(),
            ));
        }
        Ok(Self {
            rows,
            cols,
            kernel_size,
            kernels,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn kernel_size(&self) -> usize {
        self.kernel_size
    }

    /// Kernel at grid node (row, col).
    pub fn kernel(&self, row: usize, col: usize) -> &Kernel2D {
        &self.kernels[row * self.cols + col]
    }
}

/// Radial PSF grid: node sigma grows linearly with distance from the image
/// center, from `sigma_center` to `sigma_edge` at the corners.
pub fn generate_radial_psf_grid(
    rows: usize,
    cols: usize,
    kernel_size: usize,
    sigma_center: f64,
    sigma_edge: f64,
) -> Result<PsfGrid> {
    check_param(
        sigma_center.is_finite() && sigma_edge.is_finite() && sigma_center > 0.0,
        "PSF sigmas must be positive",
    )?;
    check_param(
        sigma_edge >= sigma_center,
        "PSF sigma_edge must be >= sigma_center",
    )?;
    if rows < 2 || cols < 2 {
        return Err(Error::Parameter("PSF grid must be at least 2x2".into()));
    }
    if kernel_size % 2 == 0 {
        return Err(Error::Parameter("PSF kernel size must be odd".into()));
    }
    let r_max = 0.5f64.sqrt();
    let mut kernels = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let u = j as f64 / (cols - 1) as f64;
            let v = i as f64 / (rows - 1) as f64;
            let r = ((u - 0.5).powi(2) + (v - 0.5).powi(2)).sqrt();
            let sigma = sigma_center + (sigma_edge - sigma_center) * (r / r_max);
            kernels.push(gaussian_kernel_sized(sigma, kernel_size));
        }
    }
    PsfGrid::new(rows, cols, kernel_size, kernels)
}

/// Sigma of the node kernel nearest to normalized position (u, v); exposed
/// for inspection and tests.
pub fn radial_sigma(sigma_center: f64, sigma_edge: f64, u: f64, v: f64) -> f64 {
    let r_max = 0.5f64.sqrt();
    let r = ((u - 0.5).powi(2) + (v - 0.5).powi(2)).sqrt();
    sigma_center + (sigma_edge - sigma_center) * (r / r_max)
}

/// Spatially varying convolution: per pixel, the bilinear blend of the four
/// surrounding grid kernels, clamp-to-edge borders.
pub fn psf_blur(img: &LinearImage, grid: &PsfGrid) -> Result<LinearImage> {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let ks = grid.kernel_size;
    if ks > w.min(h) {
        return Err(Error::Parameter(format!(
            "PSF kernel size {ks} exceeds smallest image dimension {}",
            w.min(h)
        )));
    }
    let r = (ks / 2) as i64;
    let node_x: Vec<f64> = (0..grid.cols)
        .map(|j| j as f64 * (w - 1) as f64 / (grid.cols - 1) as f64)
        .collect();
    let node_y: Vec<f64> = (0..grid.rows)
        .map(|i| i as f64 * (h - 1) as f64 / (grid.rows - 1) as f64)
        .collect();

    let planes = split_planes(img);
    let mut out_planes = [vec![0.0f32; w * h], vec![0.0f32; w * h], vec![0.0f32; w * h]];

    // Per (row, cell): effective kernel is P + u*Q with P, Q fixed along the
    // row segment, so the per-pixel cost is one blend plus the taps.
    let n_taps = ks * ks;
    let mut p_buf = vec![0.0f64; n_taps];
    let mut q_buf = vec![0.0f64; n_taps];
    let flat_offsets: Vec<isize> = {
        let mut offs = Vec::with_capacity(n_taps);
        for dy in -r..=r {
            for dx in -r..=r {
                offs.push((dy * w as i64 + dx) as isize);
            }
        }
        offs
    };

    for y in 0..h {
        let (ci, v) = locate_cell(y as f64, &node_y);
        for cj in 0..grid.cols - 1 {
            let a = grid.kernel(ci, cj).weights();
            let b = grid.kernel(ci, cj + 1).weights();
            let c = grid.kernel(ci + 1, cj).weights();
            let d = grid.kernel(ci + 1, cj + 1).weights();
            for t in 0..n_taps {
                p_buf[t] = a[t] + v * (c[t] - a[t]);
                q_buf[t] = (b[t] - a[t]) + v * ((d[t] - c[t]) - (b[t] - a[t]));
            }
            let x_start = if cj == 0 {
                0
            } else {
                node_x[cj].ceil() as usize
            };
            let x_end = if cj == grid.cols - 2 {
                w - 1
            } else {
                (node_x[cj + 1].ceil() as usize).saturating_sub(1)
            };
            let inv_span = 1.0 / (node_x[cj + 1] - node_x[cj]);
            let interior_row = y as i64 >= r && y as i64 + r < h as i64;
            for x in x_start..=x_end {
                let u = ((x as f64 - node_x[cj]) * inv_span).clamp(0.0, 1.0);
                let idx = y * w + x;
                if interior_row && x as i64 >= r && x as i64 + r < w as i64 {
                    let mut acc = [0.0f64; 3];
                    for t in 0..n_taps {
                        let wt = p_buf[t] + u * q_buf[t];
                        let s = (idx as isize + flat_offsets[t]) as usize;
                        acc[0] += wt * planes[0][s] as f64;
                        acc[1] += wt * planes[1][s] as f64;
                        acc[2] += wt * planes[2][s] as f64;
                    }
                    out_planes[0][idx] = acc[0] as f32;
                    out_planes[1][idx] = acc[1] as f32;
                    out_planes[2][idx] = acc[2] as f32;
                } else {
                    let mut acc = [0.0f64; 3];
                    let mut t = 0;
                    for dy in -r..=r {
                        let sy = (y as i64 + dy).clamp(0, h as i64 - 1) as usize;
                        for dx in -r..=r {
                            let sx = (x as i64 + dx).clamp(0, w as i64 - 1) as usize;
                            let wt = p_buf[t] + u * q_buf[t];
                            let s = sy * w + sx;
                            acc[0] += wt * planes[0][s] as f64;
                            acc[1] += wt * planes[1][s] as f64;
                            acc[2] += wt * planes[2][s] as f64;
                            t += 1;
                        }
                    }
                    out_planes[0][idx] = acc[0] as f32;
                    out_planes[1][idx] = acc[1] as f32;
                    out_planes[2][idx] = acc[2] as f32;
                }
            }
        }
    }
    Ok(merge_planes(img.width(), img.height(), out_planes))
}

/// Cell index and fractional position of `pos` within sorted node anchors.
fn locate_cell(pos: f64, nodes: &[f64]) -> (usize, f64) {
    let last = nodes.len() - 2;
    for i in 0..=last {
        if pos <= nodes[i + 1] || i == last {
            let span = nodes[i + 1] - nodes[i];
            let frac = if span > 0.0 {
                ((pos - nodes[i]) / span).clamp(0.0, 1.0)
            } else {
                0.0
            };
            return (i, frac);
        }
    }
    unreachable!("nodes cover the full range");
}

// ---------------------------------------------------------------------------
// PSFG file format
// ---------------------------------------------------------------------------

const PSFG_MAGIC: &[u8; 4] = b"PSFG";

/// Write a PSF grid: magic `PSFG`, little-endian u32 rows/cols/kernel_size,
/// then rows·cols·kernel_size² little-endian f32 weights, kernels row-major.
pub fn write_psf_grid(path: &Path, grid: &PsfGrid) -> Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
    }
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut buf = Vec::with_capacity(16 + grid.kernels.len() * grid.kernel_size * grid.kernel_size * 4);
    buf.extend_from_slice(PSFG_MAGIC);
    buf.extend_from_slice(&(grid.rows as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.cols as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.kernel_size as u32).to_le_bytes());
    for kernel in &grid.kernels {
        for &w in kernel.weights() {
            buf.extend_from_slice(&(w as f32).to_le_bytes());
        }
    }
    file.write_all(&buf).map_err(|e| Error::io(path, e))
}

/// Read a PSF grid written by [`write_psf_grid`]; every kernel is validated
/// for unit mass.
pub fn read_psf_grid(path: &Path) -> Result<PsfGrid> {
    let mut file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let mut bytes = Vec::new();
    file.read_to_end(&mut bytes).map_err(|e| Error::io(path, e))?;
    let fail = |msg: &str| Error::Codec {
        path: Some(path.to_path_buf()),
        message: msg.to_string(),
    };
    if bytes.len() < 16 || &bytes[0..4] != PSFG_MAGIC {
        return Err(fail("not a PSFG file"));
    }
    let rd = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
    let rows = rd(4);
    let cols = rd(8);
    let kernel_size = rd(12);
    let n_weights = rows * cols * kernel_size * kernel_size;
    if bytes.len() != 16 + n_weights * 4 {
        return Err(fail("PSFG payload size does not match header"));
    }
    let mut kernels = Vec::with_capacity(rows * cols);
    let mut off = 16;
    for _ in 0..rows * cols {
        let mut weights = Vec::with_capacity(kernel_size * kernel_size);
        for _ in 0..kernel_size * kernel_size {
            weights.push(f32::from_le_bytes(bytes[off..off + 4].try_into().unwrap()) as f64);
            off += 4;
        }
        kernels.push(Kernel2D::new(kernel_size, weights).map_err(|e| Error::Codec {
            path: Some(path.to_path_buf()),
            message: format!("invalid kernel in PSFG file: {e}"),
        })?);
    }
    PsfGrid::new(rows, cols, kernel_size, kernels)
}

// ---------------------------------------------------------------------------
// Strength metric
// ---------------------------------------------------------------------------

/// Mean local variance over interior windows of half-width `radius`,
/// averaged across channels. Blur strength shows up as a drop in this
/// statistic.
pub fn mean_local_variance(img: &LinearImage, radius: usize) -> f64 {
    let w = img.width() as usize;
    let h = img.height() as usize;
    let win = 2 * radius + 1;
    if w < win || h < win {
        return 0.0;
    }
    let planes = split_planes(img);
    let mut total = 0.0f64;
    let mut count = 0u64;
    for plane in &planes {
        // Integral images of values and squares.
        let mut sum = vec![0.0f64; (w + 1) * (h + 1)];
        let mut sq = vec![0.0f64; (w + 1) * (h + 1)];
        for y in 0..h {
            let mut row_sum = 0.0;
            let mut row_sq = 0.0;
            for x in 0..w {
                let v = plane[y * w + x] as f64;
                row_sum += v;
                row_sq += v * v;
                sum[(y + 1) * (w + 1) + x + 1] = sum[y * (w + 1) + x + 1] + row_sum;
                sq[(y + 1) * (w + 1) + x + 1] = sq[y * (w + 1) + x + 1] + row_sq;
            }
        }
        let area = (win * win) as f64;
        for y in 0..=(h - win) {
            for x in 0..=(w - win) {
                let rect = |m: &[f64]| {
                    m[(y + win) * (w + 1) + x + win] + m[y * (w + 1) + x]
                        - m[y * (w + 1) + x + win]
                        - m[(y + win) * (w + 1) + x]
                };
                let s = rect(&sum);
                let s2 = rect(&sq);
                let mean = s / area;
                total += (s2 / area - mean * mean).max(0.0);
                count += 1;
            }
        }
    }
    total / count as f64
}
