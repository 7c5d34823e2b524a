//! Dense complex helpers on top of nalgebra.
//!
//! Complex products are split into real ones so that the optimized real
//! kernel does the heavy lifting.

use nalgebra::{Complex, DMatrix};

pub type Complex64 = Complex<f64>;
pub type CMatrix = DMatrix<Complex64>;

pub fn split(m: &CMatrix) -> (DMatrix<f64>, DMatrix<f64>) {
    (m.map(|z| z.re), m.map(|z| z.im))
}

pub fn join(re: &DMatrix<f64>, im: &DMatrix<f64>) -> CMatrix {
    re.zip_map(im, Complex64::new)
}

/// `a * b` for complex matrices.
pub fn cmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (ar, ai) = split(a);
    let (br, bi) = split(b);
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    join(&re, &im)
}

/// `q * x` with `q` real.
pub fn real_cmul(q: &DMatrix<f64>, x: &CMatrix) -> CMatrix {
    let (xr, xi) = split(x);
    join(&(q * xr), &(q * xi))
}

/// `x * q` with `q` real.
pub fn real_cmul_right(x: &CMatrix, q: &DMatrix<f64>) -> CMatrix {
    let (xr, xi) = split(x);
    join(&(xr * q), &(xi * q))
}

pub fn max_abs_diff(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

/// `max |U^dag U - I|` entrywise.
pub fn unitarity_residual(u: &CMatrix) -> f64 {
    let gram = cmul(&u.adjoint(), u);
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..n {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((gram[(i, j)] - target).norm());
        }
    }
    worst
}

/// `max |U - U^T|` entrywise.
pub fn symmetry_residual(u: &CMatrix) -> f64 {
    let n = u.nrows();
    let mut worst: f64 = 0.0;
    for j in 0..n {
        for i in 0..j {
            worst = worst.max((u[(i, j)] - u[(j, i)]).norm());
        }
    }
    worst
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}
