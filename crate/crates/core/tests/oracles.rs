//! Independent oracles for the quadratic analysis and the moment formulas.

use aggmo_core::analysis::{
    build_block, characteristic_polynomial, critical_damping, critical_kappa, spectral_radius,
};
use aggmo_core::optim::beta_raw_moment;
use approx::assert_relative_eq;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[derive(Clone, Copy, Debug)]
struct C(f64, f64);

impl C {
    fn add(self, o: C) -> C {
        C(self.0 + o.0, self.1 + o.1)
    }
    fn sub(self, o: C) -> C {
        C(self.0 - o.0, self.1 - o.1)
    }
    fn mul(self, o: C) -> C {
        C(self.0 * o.0 - self.1 * o.1, self.0 * o.1 + self.1 * o.0)
    }
    fn div(self, o: C) -> C {
        let d = o.0 * o.0 + o.1 * o.1;
        C(
            (self.0 * o.0 + self.1 * o.1) / d,
            (self.1 * o.0 - self.0 * o.1) / d,
        )
    }
    fn abs(self) -> f64 {
        self.0.hypot(self.1)
    }
}

/// Aberth–Ehrlich iteration on a monic polynomial given in ascending order.
fn roots(coeffs: &[f64]) -> Vec<C> {
    let n = coeffs.len() - 1;
    let eval = |z: C| {
        let mut p = C(0.0, 0.0);
        let mut dp = C(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp.mul(z).add(p);
            p = p.mul(z).add(C(c, 0.0));
        }
        (p, dp)
    };
    let mut z: Vec<C> = (0..n)
        .map(|k| {
            let a = 0.4 + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
            C(1.1 * a.cos(), 1.1 * a.sin())
        })
        .collect();
    for _ in 0..500 {
        let mut moved = 0.0_f64;
        for i in 0..n {
            let (p, dp) = eval(z[i]);
            if p.abs() == 0.0 {
                continue;
            }
            let ratio = p.div(dp);
            let mut s = C(0.0, 0.0);
            for j in 0..n {
                if j != i {
                    s = s.add(C(1.0, 0.0).div(z[i].sub(z[j])));
                }
            }
            let w = ratio.div(C(1.0, 0.0).sub(ratio.mul(s)));
            z[i] = z[i].sub(w);
            moved = moved.max(w.abs());
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

#[test]
fn spectral_radius_agrees_with_polynomial_roots() {
    let mut rng = StdRng::seed_from_u64(11);
    for _ in 0..300 {
        let k = rng.random_range(1..=5);
        let betas: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.999)).collect();
        let lambda = rng.random_range(0.01..1.0);
        let lr = rng.random_range(0.0..3.0 / lambda);
        let qr = spectral_radius(&build_block(&betas, lr, lambda).unwrap()).unwrap();
        let poly = characteristic_polynomial(&betas, lr, lambda).unwrap();
        let aberth = roots(&poly).iter().map(|r| r.abs()).fold(0.0, f64::max);
        // Clustered roots lose about half the digits in either method.
        assert!(
            (qr - aberth).abs() <= 1e-6 * aberth.max(1.0),
            "betas {betas:?} lr {lr} λ {lambda}: {qr} vs {aberth}"
        );
    }
}

#[test]
fn eigenvalue_product_equals_constant_term() {
    let mut rng = StdRng::seed_from_u64(12);
    for _ in 0..200 {
        let k = rng.random_range(1..=4);
        let betas: Vec<f64> = (0..k).map(|_| rng.random_range(0.0..0.99)).collect();
        let (lr, lambda) = (rng.random_range(0.0..2.0), rng.random_range(0.1..1.0));
        let m = build_block(&betas, lr, lambda).unwrap();
        let eig = m.eigenvalues().unwrap();
        let prod = eig
            .iter()
            .fold(C(1.0, 0.0), |acc, e| acc.mul(C(e.re, e.im)));
        let poly = characteristic_polynomial(&betas, lr, lambda).unwrap();
        let sign = if (k + 1) % 2 == 0 { 1.0 } else { -1.0 };
        assert!(
            (prod.0 - sign * poly[0]).abs() <= 1e-10,
            "{prod:?} vs {}",
            poly[0]
        );
        assert!(prod.1.abs() <= 1e-10);
    }
}

#[test]
fn critical_damping_constants() {
    // κ = 100: √κ = 10, (9/11)² and 1 − 9/11.
    let (b, r) = critical_damping(100.0).unwrap();
    assert_relative_eq!(b, 81.0 / 121.0, max_relative = 1e-15);
    assert_relative_eq!(r, 2.0 / 11.0, max_relative = 1e-15);
    // κ_crit(0.81): √β = 0.9, (1.9/0.1)² = 361.
    assert_relative_eq!(critical_kappa(0.81).unwrap(), 361.0, max_relative = 1e-12);
    for kappa in [4.0, 37.5, 1e3, 1e6] {
        let (beta, _) = critical_damping(kappa).unwrap();
        assert_relative_eq!(critical_kappa(beta).unwrap(), kappa, max_relative = 1e-8);
    }
}

#[test]
fn critically_damped_block_attains_the_optimal_rate() {
    for kappa in [10.0, 100.0, 1e4] {
        let (beta, rate) = critical_damping(kappa).unwrap();
        let s: f64 = kappa.sqrt();
        let lr = 4.0 * kappa / ((s + 1.0) * (s + 1.0));
        for lambda in [1.0, 1.0 / kappa] {
            let rho = spectral_radius(&build_block(&[beta], lr, lambda).unwrap()).unwrap();
            assert_relative_eq!(1.0 - rho, rate, max_relative = 1e-6);
        }
    }
}

fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n)
        .map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 })
        .sum();
    h / 3.0 * (f(a) + inner + f(b))
}

#[test]
fn beta_moments_match_quadrature() {
    // Shapes ≥ 2 keep the integrand smooth at both ends.
    for (a, b) in [(2.0, 2.0), (2.5, 4.0), (6.0, 3.0), (10.0, 2.0)] {
        let density = |x: f64| x.powf(a - 1.0) * (1.0 - x).powf(b - 1.0);
        let z = simpson(density, 0.0, 1.0, 20_000);
        for k in 0..6 {
            let num = simpson(|x| x.powi(k as i32) * density(x), 0.0, 1.0, 20_000) / z;
            let exact = beta_raw_moment(a, b, k).unwrap();
            assert_relative_eq!(exact, num, max_relative = 1e-9);
        }
    }
    assert_eq!(beta_raw_moment(1.0, 1.0, 2).unwrap(), 1.0 / 3.0);
}
