//! Reference implementations used only by tests.
//!
//! Each one recomputes its result from the defining formulas with no code
//! shared with the crate under test. Exact rationals stand in for real
//! arithmetic wherever the production path rounds.

#![allow(dead_code)]

use num_rational::Ratio;

type Q = Ratio<i64>;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn dec(milli: i64) -> Q {
    Q::new(milli, 1000)
}

/// Clamp to [0, 255], then round half away from zero.
fn clamp_round(v: Q) -> u8 {
    let v = v.max(q(0)).min(q(255));
    v.round().to_integer() as u8
}

/// Gray conversion evaluated term by term in exact arithmetic.
pub fn gray_pixel(r: u8, g: u8, b: u8, eq6_verbatim: bool) -> u8 {
    let (r, g, b) = (q(r as i64), q(g as i64), q(b as i64));
    let y = dec(299) * r + dec(587) * g + dec(114) * b;
    let u = (b - y) * dec(565);
    let v = (r - y) * dec(713);
    let uv = u + v;
    let (r1, r2, r3) = (r * dec(299), r * dec(587), r * dec(114));
    let (g1, g2, g3) = (g * dec(299), g * dec(587), g * dec(114));
    let (b1, b2, b3) = if eq6_verbatim {
        (b * dec(299), g * dec(587), g * dec(114))
    } else {
        (b * dec(299), b * dec(587), b * dec(114))
    };
    let r4 = (r1 + r2 + r3) / q(3);
    let g4 = (g1 + g2 + g3) / q(3);
    let b4 = (b1 + b2 + b3) / q(3);
    let i1 = (r4 + g4 + b4 + uv) / q(4);
    clamp_round(i1)
}

/// Naive square-window median with replicated borders.
pub fn median(data: &[u8], w: usize, h: usize, k: usize) -> Vec<u8> {
    let r = (k / 2) as i64;
    let at = |x: i64, y: i64| {
        let x = x.clamp(0, w as i64 - 1) as usize;
        let y = y.clamp(0, h as i64 - 1) as usize;
        data[y * w + x]
    };
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut win: Vec<u8> = Vec::new();
            for dy in -r..=r {
                for dx in -r..=r {
                    win.push(at(x + dx, y + dy));
                }
            }
            win.sort();
            out.push(win[(win.len() - 1) / 2]);
        }
    }
    out
}

/// Tiled clipped-histogram equalization recomputed per pixel from scratch.
pub fn clahe(
    data: &[u8],
    w: usize,
    h: usize,
    cols: usize,
    rows: usize,
    clip_limit: f64,
    bins: usize,
) -> Vec<u8> {
    // Tile extents: equal tiles, last one takes the remainder.
    let extents = |len: usize, n: usize| -> Vec<(usize, usize)> {
        let base = len / n;
        (0..n)
            .map(|i| {
                let start = i * base;
                let end = if i == n - 1 { len } else { start + base };
                (start, end - start)
            })
            .collect()
    };
    let xt = extents(w, cols);
    let yt = extents(h, rows);
    let center = |(start, ext): (usize, usize)| q(start as i64) + Q::new(ext as i64 - 1, 2);

    // Mapping function of tile (i, j) over all 256 gray levels.
    let table = |i: usize, j: usize| -> Vec<u8> {
        let (x0, tw) = xt[i];
        let (y0, th) = yt[j];
        let mut hist = vec![0i64; bins];
        for y in y0..y0 + th {
            for x in x0..x0 + tw {
                hist[data[y * w + x] as usize * bins / 256] += 1;
            }
        }
        let n = (tw * th) as i64;
        let limit = ((clip_limit * n as f64 / bins as f64).round() as i64).max(1);
        let mut excess = 0;
        for c in hist.iter_mut() {
            if *c > limit {
                excess += *c - limit;
                *c = limit;
            }
        }
        for (idx, c) in hist.iter_mut().enumerate() {
            *c += excess / bins as i64;
            if (idx as i64) < excess % bins as i64 {
                *c += 1;
            }
        }
        (0..256usize)
            .map(|v| {
                let cdf: i64 = hist[..=v * bins / 256].iter().sum();
                Q::new(255 * cdf, n).round().to_integer() as u8
            })
            .collect()
    };
    let tables: Vec<Vec<Vec<u8>>> = (0..cols).map(|i| (0..rows).map(|j| table(i, j)).collect()).collect();

    // Bracketing (lo, hi, weight_lo, weight_hi) along one axis.
    let bracket = |p: usize, tiles: &[(usize, usize)]| -> (usize, usize, Q, Q) {
        let p = q(p as i64);
        let last = tiles.len() - 1;
        if p <= center(tiles[0]) {
            return (0, 0, q(1), q(0));
        }
        if p >= center(tiles[last]) {
            return (last, last, q(1), q(0));
        }
        let hi = (1..=last).find(|&i| center(tiles[i]) > p).unwrap();
        let lo = hi - 1;
        let d_lo = p - center(tiles[lo]);
        let d_hi = center(tiles[hi]) - p;
        // Weight of lo is the distance to hi over the span.
        (lo, hi, d_hi / (d_lo + d_hi), d_lo / (d_lo + d_hi))
    };

    let mut out = Vec::with_capacity(w * h);
    for y in 0..h {
        let (top, bottom, wt, wb) = bracket(y, &yt);
        for x in 0..w {
            let (left, right, wl, wr) = bracket(x, &xt);
            let v = data[y * w + x];
            let f = |i: usize, j: usize| q(tables[i][j][v as usize] as i64);
            let rho = wt * (wl * f(left, top) + wr * f(right, top))
                + wb * (wl * f(left, bottom) + wr * f(right, bottom));
            out.push(clamp_round(rho));
        }
    }
    out
}

/// Separable Gaussian smoothing with replicated borders; kernel radius
/// `ceil(4 sigma)`, normalized to unit sum.
pub fn gaussian_smooth(plane: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let r = (4.0 * sigma).ceil() as i64;
    let mut k: Vec<f64> = (-r..=r).map(|t| (-(t * t) as f64 / (2.0 * sigma * sigma)).exp()).collect();
    let s: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= s);
    let at = |p: &[f64], x: i64, y: i64| {
        p[y.clamp(0, h as i64 - 1) as usize * w + x.clamp(0, w as i64 - 1) as usize]
    };
    let mut tmp = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            tmp[y as usize * w + x as usize] =
                (-r..=r).map(|t| k[(t + r) as usize] * at(plane, x - t, y)).sum();
        }
    }
    let mut out = vec![0.0; w * h];
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            out[y as usize * w + x as usize] =
                (-r..=r).map(|t| k[(t + r) as usize] * at(&tmp, x, y - t)).sum();
        }
    }
    out
}

/// Central-difference Hessian `(hxx, hxy, hyy)` of a plane at (x, y), times
/// `sigma^2`.
pub fn fd_hessian(p: &[f64], w: usize, x: usize, y: usize, sigma: f64) -> (f64, f64, f64) {
    let v = |dx: i64, dy: i64| p[(y as i64 + dy) as usize * w + (x as i64 + dx) as usize];
    let s2 = sigma * sigma;
    let hxx = v(1, 0) - 2.0 * v(0, 0) + v(-1, 0);
    let hyy = v(0, 1) - 2.0 * v(0, 0) + v(0, -1);
    let hxy = (v(1, 1) - v(1, -1) - v(-1, 1) + v(-1, -1)) / 4.0;
    (hxx * s2, hxy * s2, hyy * s2)
}

/// Otsu threshold by brute force: every split `{< t} | {>= t}`, variance
/// computed from class means.
pub fn otsu_between_class_variance(hist: &[u32; 256], t: usize) -> f64 {
    let n: f64 = hist.iter().map(|&c| c as f64).sum();
    let (mut n0, mut s0, mut n1, mut s1) = (0.0, 0.0, 0.0, 0.0);
    for (v, &c) in hist.iter().enumerate() {
        if v < t {
            n0 += c as f64;
            s0 += v as f64 * c as f64;
        } else {
            n1 += c as f64;
            s1 += v as f64 * c as f64;
        }
    }
    if n0 == 0.0 || n1 == 0.0 {
        return 0.0;
    }
    let (m0, m1) = (s0 / n0, s1 / n1);
    (n0 / n) * (n1 / n) * (m0 - m1) * (m0 - m1)
}

/// Gaussian-profile ridge along the vertical axis centered at `x0`,
/// `base - depth * exp(-d^2 / (2 width^2))`, normalized to [0, 1].
pub fn vertical_ridge(w: usize, h: usize, x0: f64, width: f64, base: f64, depth: f64) -> Vec<f64> {
    (0..w * h)
        .map(|i| {
            let d = (i % w) as f64 - x0;
            (base - depth * (-(d * d) / (2.0 * width * width)).exp()) / 255.0
        })
        .collect()
}

/// Bilinear sample with replicated borders.
pub fn bilinear(p: &[f64], w: usize, h: usize, x: f64, y: f64) -> f64 {
    let x = x.clamp(0.0, (w - 1) as f64);
    let y = y.clamp(0.0, (h - 1) as f64);
    let (x0, y0) = (x.floor() as usize, y.floor() as usize);
    let (x1, y1) = ((x0 + 1).min(w - 1), (y0 + 1).min(h - 1));
    let (fx, fy) = (x - x0 as f64, y - y0 as f64);
    let a = p[y0 * w + x0] * (1.0 - fx) + p[y0 * w + x1] * fx;
    let b = p[y1 * w + x0] * (1.0 - fx) + p[y1 * w + x1] * fx;
    a * (1.0 - fy) + b * fy
}

/// Rotates `src` by `degrees` about the image center (bilinear resampling).
pub fn rotate(src: &[f64], w: usize, h: usize, degrees: f64) -> Vec<f64> {
    let (s, c) = degrees.to_radians().sin_cos();
    let (cx, cy) = ((w - 1) as f64 / 2.0, (h - 1) as f64 / 2.0);
    (0..w * h)
        .map(|i| {
            let (x, y) = ((i % w) as f64 - cx, (i / w) as f64 - cy);
            // Inverse rotation into the source frame.
            bilinear(src, w, h, c * x + s * y + cx, -s * x + c * y + cy)
        })
        .collect()
}
