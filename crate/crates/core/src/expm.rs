//! Matrix exponential by scaling and squaring with a degree-13 Padé
//! approximant (Higham 2005).

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};
use num_complex::Complex64 as C64;

const THETA_13: f64 = 5.371_920_351_148_152;

const PADE_13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

fn one_norm(a: MatRef<'_, C64>) -> f64 {
    (0..a.ncols())
        .map(|j| a.col(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `Σ_k c_k M_k` over equally shaped matrices, plus `c_id · I`.
fn lin_comb(terms: &[(f64, &Mat<C64>)], c_id: f64, n: usize) -> Mat<C64> {
    Mat::from_fn(n, n, |r, c| {
        let mut acc = if r == c {
            C64::new(c_id, 0.0)
        } else {
            C64::new(0.0, 0.0)
        };
        for (k, m) in terms {
            acc += m[(r, c)] * *k;
        }
        acc
    })
}

/// `exp(a)` for a square complex matrix.
pub fn expm(a: MatRef<'_, C64>) -> Mat<C64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return Mat::zeros(0, 0);
    }
    let norm = one_norm(a);
    let squarings = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scale = 0.5f64.powi(squarings);
    let a1 = Mat::from_fn(n, n, |r, c| a[(r, c)] * scale);
    let a2 = &a1 * &a1;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;
    let b = &PADE_13;

    let inner_u = lin_comb(&[(b[13], &a6), (b[11], &a4), (b[9], &a2)], 0.0, n);
    let tail_u = lin_comb(&[(b[7], &a6), (b[5], &a4), (b[3], &a2)], b[1], n);
    let u = &a1 * &(&a6 * &inner_u + &tail_u);

    let inner_v = lin_comb(&[(b[12], &a6), (b[10], &a4), (b[8], &a2)], 0.0, n);
    let tail_v = lin_comb(&[(b[6], &a6), (b[4], &a4), (b[2], &a2)], b[0], n);
    let v = &a6 * &inner_v + &tail_v;

    let num = &v + &u;
    let den = &v - &u;
    let mut r = den.partial_piv_lu().solve(&num);
    for _ in 0..squarings {
        r = &r * &r;
    }
    r
}
