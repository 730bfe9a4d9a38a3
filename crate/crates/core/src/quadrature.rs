//! Globally adaptive Gauss–Kronrod (7/15) quadrature.
//!
//! The interval is first cut at `0, ±1, ±2, ±4, …` so that integrands concentrated near
//! the origin are resolved even over very long ranges. The segment with the largest
//! error estimate is then bisected until the total estimate meets
//! `max(abs_tol, rel_tol·|I|)`.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_segments: usize,
}

impl Default for QuadConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_segments: 4000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub segments: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

fn breakpoints(a: f64, b: f64) -> Vec<f64> {
    let mut pts = vec![a];
    let mut inner: Vec<f64> = std::iter::once(0.0)
        .chain(
            (0..1024)
                .map(|k| 2f64.powi(k))
                .take_while(|p| p.is_finite())
                .flat_map(|p| [p, -p]),
        )
        .filter(|&p| p > a && p < b)
        .collect();
    inner.sort_by(f64::total_cmp);
    pts.extend(inner);
    pts.push(b);
    pts
}

/// Integrates `f` over `[a, b]`. Bounds must be finite; `a > b` flips the sign.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, cfg: QuadConfig) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::domain(format!(
            "integration bounds [{a}, {b}] must be finite"
        )));
    }
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error_estimate: 0.0,
            segments: 0,
        });
    }
    if a > b {
        let r = integrate(f, b, a, cfg)?;
        return Ok(Integral {
            value: -r.value,
            ..r
        });
    }

    let mut heap: BinaryHeap<Segment> = breakpoints(a, b)
        .windows(2)
        .map(|w| gk15(&f, w[0], w[1]))
        .collect();
    // Segments too narrow to split further are retired here.
    let mut settled_value = 0.0;
    let mut settled_error = 0.0;

    loop {
        let value: f64 = settled_value + heap.iter().map(|s| s.value).sum::<f64>();
        let error: f64 = settled_error + heap.iter().map(|s| s.error).sum::<f64>();
        if !value.is_finite() {
            return Err(Error::numerical(format!(
                "integral over [{a}, {b}] is not finite"
            )));
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        let count = heap.len();
        if error <= target || heap.is_empty() {
            return Ok(Integral {
                value,
                error_estimate: error,
                segments: count,
            });
        }
        if count >= cfg.max_segments {
            return Err(Error::numerical(format!(
                "quadrature did not reach tolerance {target:e} within {} segments (estimate {error:e})",
                cfg.max_segments
            )));
        }
        let worst = heap.pop().expect("heap is non-empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            settled_value += worst.value;
            settled_error += worst.error;
            continue;
        }
        heap.push(gk15(&f, worst.a, mid));
        heap.push(gk15(&f, mid, worst.b));
    }
}
