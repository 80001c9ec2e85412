//! Reference dynamics for the two-qubit DFS leakage benchmark, built from
//! plain matrices. Exponentials use Taylor series with scaling and squaring;
//! propagators are multiplied out cycle by cycle.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use leolab::opalg::{derive_seed, random_hermitian};

pub type M = DMatrix<Complex64>;

pub const BENCH_G: f64 = 0.05;
pub const BENCH_BATH_SEED: u64 = 3;
pub const BENCH_BATH_DIM: usize = 4;
pub const BENCH_TOTAL_TIME: f64 = 2.0;
pub const BENCH_N: u64 = 64;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn kron(a: &M, b: &M) -> M {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    M::from_fn(ra * rb, ca * cb, |i, j| a[(i / rb, j / cb)] * b[(i % rb, j % cb)])
}

pub fn eye(n: usize) -> M {
    M::identity(n, n)
}

pub fn pauli_x() -> M {
    M::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)])
}

pub fn pauli_z() -> M {
    M::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)])
}

fn one_norm(a: &M) -> f64 {
    (0..a.ncols())
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` by scaling to norm < 1/2, a 40-term Taylor sum and squaring back.
pub fn expm(a: &M) -> M {
    let n = a.nrows();
    let norm = one_norm(a);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.5 {
        s += 1;
    }
    let scaled = a * c(1.0 / 2f64.powi(s as i32));
    let mut term = eye(n);
    let mut sum = eye(n);
    for k in 1..=40 {
        term = &term * &scaled * c(1.0 / k as f64);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

/// `exp(-i h t)`.
pub fn propagator(h: &M, t: f64) -> M {
    expm(&(h * Complex64::new(0.0, -t)))
}

pub fn spectral_norm(a: &M) -> f64 {
    a.clone().singular_values().max()
}

pub struct Benchmark {
    pub h: M,
    pub p_joint: M,
    pub q_joint: M,
    pub r_joint: M,
    pub bath_dim: usize,
}

/// `H = g X_1 ⊗ B_1 + I ⊗ H_B` with `|01>, |10>` as the code and `Z_1 Z_2`
/// as the pulse.
pub fn dfs2_x1_benchmark(g: f64, bath_seed: u64, bath_dim: usize) -> Benchmark {
    let hb = random_hermitian(bath_dim, derive_seed(bath_seed, 0)).into_matrix();
    let b1 = random_hermitian(bath_dim, derive_seed(bath_seed, 1)).into_matrix();
    let x1 = kron(&pauli_x(), &eye(2));
    let h = kron(&x1, &b1) * c(g) + kron(&eye(4), &hb);
    let p = M::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.0), c(1.0), c(1.0), c(0.0)]));
    let q = eye(4) - &p;
    let zz = kron(&pauli_z(), &pauli_z());
    Benchmark {
        h,
        p_joint: kron(&p, &eye(bath_dim)),
        q_joint: kron(&q, &eye(bath_dim)),
        r_joint: kron(&zz, &eye(bath_dim)),
        bath_dim,
    }
}

pub fn pinned_benchmark() -> Benchmark {
    dfs2_x1_benchmark(BENCH_G, BENCH_BATH_SEED, BENCH_BATH_DIM)
}

impl Benchmark {
    pub fn dim(&self) -> usize {
        self.h.nrows()
    }

    pub fn cycle(&self, tau: f64) -> M {
        let u = propagator(&self.h, tau);
        let r_dag = self.r_joint.adjoint();
        &u * &r_dag * &u * &self.r_joint
    }

    pub fn pulsed(&self, n: u64, tau: f64) -> M {
        let cyc = self.cycle(tau);
        let mut u = eye(self.dim());
        for _ in 0..n {
            u = &cyc * &u;
        }
        u
    }

    pub fn free(&self, t: f64) -> M {
        propagator(&self.h, t)
    }

    pub fn limit(&self, t: f64) -> M {
        let hd = &self.p_joint * &self.h * &self.p_joint + &self.q_joint * &self.h * &self.q_joint;
        propagator(&hd, t)
    }

    /// Joint initial state `|s> ⊗ |b_0>` for system basis index `s`.
    pub fn initial(&self, system_index: usize) -> nalgebra::DVector<Complex64> {
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[system_index * self.bath_dim] = c(1.0);
        v
    }

    pub fn leakage(&self, u: &M, system_index: usize) -> f64 {
        let psi = u * self.initial(system_index);
        (&self.q_joint * psi).norm_squared()
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

pub const CONVERGENCE_NS: [u64; 7] = [1, 2, 4, 8, 16, 32, 64];
pub const DEFECT_TAUS: [f64; 4] = [0.1, 0.05, 0.025, 0.0125];

/// Golden quantities for the pinned benchmark, initial system state `|01>`.
#[derive(Debug, Clone)]
pub struct Golden {
    pub free_leakage: f64,
    pub pulsed_leakage: f64,
    pub suppression_factor: f64,
    pub distances: Vec<(u64, f64)>,
    pub defects: Vec<(f64, f64)>,
    pub defect_slope: f64,
    pub unit_example_leakage: f64,
}

pub fn golden() -> Golden {
    let b = pinned_benchmark();
    let s = 1; // |01>
    let t = BENCH_TOTAL_TIME;
    let free_leakage = b.leakage(&b.free(t), s);
    let tau = t / (2.0 * BENCH_N as f64);
    let pulsed_leakage = b.leakage(&b.pulsed(BENCH_N, tau), s);
    let lim = b.limit(t);
    let distances = CONVERGENCE_NS
        .iter()
        .map(|&n| (n, spectral_norm(&(b.pulsed(n, t / (2.0 * n as f64)) - &lim))))
        .collect();
    let defects: Vec<(f64, f64)> = DEFECT_TAUS
        .iter()
        .map(|&tau| (tau, spectral_norm(&(b.cycle(tau) - b.limit(2.0 * tau)))))
        .collect();
    let (xs, ys): (Vec<f64>, Vec<f64>) = defects.iter().copied().unzip();
    let unit = dfs2_x1_benchmark(0.05, 3, 4);
    Golden {
        free_leakage,
        pulsed_leakage,
        suppression_factor: free_leakage / pulsed_leakage,
        distances,
        defects,
        defect_slope: loglog_slope(&xs, &ys),
        unit_example_leakage: unit.leakage(&unit.pulsed(64, 0.01), s),
    }
}
