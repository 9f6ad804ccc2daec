//! Eigenvalues of small dense nonsymmetric real matrices.
//!
//! Balancing, reduction to upper Hessenberg form by stabilized elementary
//! similarity transforms, then the Francis double-shift QR iteration. Only
//! eigenvalues are produced.

use alloc::vec::Vec;

use num_traits::Float;

use crate::{Error, Result};

/// A (possibly complex) eigenvalue.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: f64,
    pub im: f64,
}

impl Eigenvalue {
    pub fn modulus(&self) -> f64 {
        Float::hypot(self.re, self.im)
    }
}

const MAX_ITERATIONS: usize = 60;

struct Dense {
    n: usize,
    a: Vec<f64>,
}

impl Dense {
    #[inline]
    fn at(&self, i: usize, j: usize) -> f64 {
        self.a[i * self.n + j]
    }

    #[inline]
    fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.a[i * self.n + j]
    }

    fn swap(&mut self, (i, j): (usize, usize), (k, l): (usize, usize)) {
        self.a.swap(i * self.n + j, k * self.n + l);
    }
}

/// All eigenvalues of the row-major `n × n` matrix `entries`.
pub fn eigenvalues(n: usize, entries: &[f64]) -> Result<Vec<Eigenvalue>> {
    if entries.len() != n * n {
        return Err(Error::DimensionMismatch {
            expected: n * n,
            found: entries.len(),
        });
    }
    if entries.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("matrix entries"));
    }
    let mut m = Dense {
        n,
        a: entries.to_vec(),
    };
    balance(&mut m);
    to_hessenberg(&mut m);
    hqr(&mut m)
}

fn balance(m: &mut Dense) {
    const RADIX: f64 = 2.0;
    let n = m.n;
    let sqrdx = RADIX * RADIX;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let (mut c, mut r) = (0.0, 0.0);
            for j in 0..n {
                if j != i {
                    c += m.at(j, i).abs();
                    r += m.at(i, j).abs();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / RADIX;
            while c < g {
                f *= RADIX;
                c *= sqrdx;
            }
            g = r * RADIX;
            while c > g {
                f /= RADIX;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let g = 1.0 / f;
                for j in 0..n {
                    *m.at_mut(i, j) *= g;
                }
                for j in 0..n {
                    *m.at_mut(j, i) *= f;
                }
            }
        }
    }
}

fn to_hessenberg(m: &mut Dense) {
    let n = m.n;
    for col in 1..n.saturating_sub(1) {
        let mut pivot = 0.0;
        let mut row = col;
        for j in col..n {
            if m.at(j, col - 1).abs() > pivot.abs() {
                pivot = m.at(j, col - 1);
                row = j;
            }
        }
        if row != col {
            for j in col - 1..n {
                m.swap((row, j), (col, j));
            }
            for j in 0..n {
                m.swap((j, row), (j, col));
            }
        }
        if pivot != 0.0 {
            for i in col + 1..n {
                let mut y = m.at(i, col - 1);
                if y != 0.0 {
                    y /= pivot;
                    *m.at_mut(i, col - 1) = 0.0;
                    for j in col..n {
                        let v = m.at(col, j);
                        *m.at_mut(i, j) -= y * v;
                    }
                    for j in 0..n {
                        let v = m.at(j, i);
                        *m.at_mut(j, col) += y * v;
                    }
                }
            }
        }
    }
}

fn hqr(m: &mut Dense) -> Result<Vec<Eigenvalue>> {
    let n = m.n;
    let mut out = alloc::vec![Eigenvalue { re: 0.0, im: 0.0 }; n];
    if n == 0 {
        return Ok(out);
    }
    let eps = f64::EPSILON;
    let mut anorm = 0.0;
    for i in 0..n {
        for j in i.saturating_sub(1)..n {
            anorm += m.at(i, j).abs();
        }
    }
    // `nn` is the active block's last row, tracked as signed so it can drop
    // below zero when the final eigenvalue deflates.
    let mut nn = n as isize - 1;
    let mut shift = 0.0;
    while nn >= 0 {
        let mut its = 0;
        loop {
            let nu = nn as usize;
            let mut l = nu;
            while l > 0 {
                let mut s = m.at(l - 1, l - 1).abs() + m.at(l, l).abs();
                if s == 0.0 {
                    s = anorm;
                }
                if m.at(l, l - 1).abs() <= eps * s {
                    *m.at_mut(l, l - 1) = 0.0;
                    break;
                }
                l -= 1;
            }
            let mut x = m.at(nu, nu);
            if l == nu {
                out[nu] = Eigenvalue {
                    re: x + shift,
                    im: 0.0,
                };
                nn -= 1;
            } else {
                let mut y = m.at(nu - 1, nu - 1);
                let mut w = m.at(nu, nu - 1) * m.at(nu - 1, nu);
                if l == nu - 1 {
                    let p = 0.5 * (y - x);
                    let q = p * p + w;
                    let z = Float::sqrt(q.abs());
                    x += shift;
                    if q >= 0.0 {
                        let z = p + z.copysign(p);
                        out[nu - 1] = Eigenvalue { re: x + z, im: 0.0 };
                        out[nu] = out[nu - 1];
                        if z != 0.0 {
                            out[nu].re = x - w / z;
                        }
                    } else {
                        out[nu] = Eigenvalue { re: x + p, im: -z };
                        out[nu - 1] = Eigenvalue { re: x + p, im: z };
                    }
                    nn -= 2;
                } else {
                    if its == MAX_ITERATIONS {
                        return Err(Error::NoConvergence);
                    }
                    if its == 10 || its == 20 {
                        // Exceptional shift.
                        shift += x;
                        for i in 0..=nu {
                            *m.at_mut(i, i) -= x;
                        }
                        let s = m.at(nu, nu - 1).abs() + m.at(nu - 1, nu - 2).abs();
                        x = 0.75 * s;
                        y = x;
                        w = -0.4375 * s * s;
                    }
                    its += 1;
                    francis_step(m, l, nu, x, y, w, eps);
                }
            }
            if !(nn >= 0 && (l as isize) + 1 < nn) {
                break;
            }
        }
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn francis_step(m: &mut Dense, l: usize, nu: usize, x0: f64, y0: f64, w: f64, eps: f64) {
    let (mut p, mut q, mut r): (f64, f64, f64);
    let mut mm = nu - 2;
    loop {
        let z = m.at(mm, mm);
        let rr = x0 - z;
        let s = y0 - z;
        p = (rr * s - w) / m.at(mm + 1, mm) + m.at(mm, mm + 1);
        q = m.at(mm + 1, mm + 1) - z - rr - s;
        r = m.at(mm + 2, mm + 1);
        let s = p.abs() + q.abs() + r.abs();
        p /= s;
        q /= s;
        r /= s;
        if mm == l {
            break;
        }
        let u = m.at(mm, mm - 1).abs() * (q.abs() + r.abs());
        let v = p.abs() * (m.at(mm - 1, mm - 1).abs() + z.abs() + m.at(mm + 1, mm + 1).abs());
        if u <= eps * v {
            break;
        }
        mm -= 1;
    }
    for i in mm..nu - 1 {
        *m.at_mut(i + 2, i) = 0.0;
        if i != mm {
            *m.at_mut(i + 2, i - 1) = 0.0;
        }
    }
    let (mut x, mut y, mut z);
    x = 0.0;
    for k in mm..nu {
        if k != mm {
            p = m.at(k, k - 1);
            q = m.at(k + 1, k - 1);
            r = if k + 1 != nu { m.at(k + 2, k - 1) } else { 0.0 };
            x = p.abs() + q.abs() + r.abs();
            if x != 0.0 {
                p /= x;
                q /= x;
                r /= x;
            }
        }
        let s = Float::sqrt(p * p + q * q + r * r).copysign(p);
        if s == 0.0 {
            continue;
        }
        if k == mm {
            if l != mm {
                *m.at_mut(k, k - 1) = -m.at(k, k - 1);
            }
        } else {
            *m.at_mut(k, k - 1) = -s * x;
        }
        p += s;
        x = p / s;
        y = q / s;
        z = r / s;
        q /= p;
        r /= p;
        for j in k..=nu {
            let mut pp = m.at(k, j) + q * m.at(k + 1, j);
            if k + 1 != nu {
                pp += r * m.at(k + 2, j);
                *m.at_mut(k + 2, j) -= pp * z;
            }
            *m.at_mut(k + 1, j) -= pp * y;
            *m.at_mut(k, j) -= pp * x;
        }
        let mmin = if nu < k + 3 { nu } else { k + 3 };
        for i in l..=mmin {
            let mut pp = x * m.at(i, k) + y * m.at(i, k + 1);
            if k + 1 != nu {
                pp += z * m.at(i, k + 2);
                *m.at_mut(i, k + 2) -= pp * r;
            }
            *m.at_mut(i, k + 1) -= pp * q;
            *m.at_mut(i, k) -= pp;
        }
    }
}
