//! Proximal setups, Bregman divergences and mirror steps.

use crate::error::{Error, Result};
use crate::linalg::{self, dot, norm1, norm2, norm_inf, norm_p};
use crate::scalar::Real;
use serde::{Deserialize, Serialize};

/// Tolerance used when checking simplex membership of inputs.
const SIMPLEX_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NormTag {
    L1,
    L2,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxKind {
    Euclidean,
    EntropySimplex,
    KappaNorm,
}

/// Feasible-set descriptor for mirror steps.
#[derive(Clone, Debug, PartialEq)]
pub enum FeasibleSet<T> {
    Full,
    Simplex,
    Ball { center: Vec<T>, radius: T },
}

/// Simple composite term `h`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Composite<T> {
    Zero,
    /// `h(x) = w ‖x‖₁`
    L1(T),
}

impl<T: Real> Composite<T> {
    pub fn value(&self, x: &[T]) -> T {
        match *self {
            Composite::Zero => T::zero(),
            Composite::L1(w) => w * norm1(x),
        }
    }
}

/// Prox-function `d` together with the norm it is 1-strongly convex in.
///
/// * `Euclidean`: `d(x) = ½‖x − c‖₂²`, norm ℓ2.
/// * `EntropySimplex`: `d(x) = ln n + Σ xᵢ ln xᵢ` on the simplex, norm ℓ1.
/// * `KappaNorm`: `d(x) = (e·n^((κ−1)(2−κ)/κ)·ln n / 2)·‖x − c‖_κ²`, `κ = 1 + 1/ln n`, norm ℓ1.
#[derive(Clone, Debug, PartialEq)]
pub struct ProxSetup<T> {
    pub norm: NormTag,
    pub kind: ProxKind,
    pub kappa: T,
    pub n: usize,
    pub center: Vec<T>,
}

impl<T: Real> ProxSetup<T> {
    pub fn euclidean(n: usize) -> Self {
        ProxSetup { norm: NormTag::L2, kind: ProxKind::Euclidean, kappa: T::of(2.0), n, center: vec![T::zero(); n] }
    }

    pub fn entropy(n: usize) -> Self {
        let u = T::one() / T::of_usize(n);
        ProxSetup { norm: NormTag::L1, kind: ProxKind::EntropySimplex, kappa: T::one(), n, center: vec![u; n] }
    }

    /// ℓ1 setup through the κ-norm. Requires `n ≥ 3` so that `κ < 2`.
    pub fn kappa(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidParameter(format!("kappa-norm setup needs n >= 3, got {n}")));
        }
        let kappa = T::one() + T::one() / T::of_usize(n).ln();
        Ok(ProxSetup { norm: NormTag::L1, kind: ProxKind::KappaNorm, kappa, n, center: vec![T::zero(); n] })
    }

    /// Moves the prox-center (Euclidean and κ-norm setups only).
    pub fn with_center(mut self, center: Vec<T>) -> Result<Self> {
        if center.len() != self.n {
            return Err(Error::InvalidInput("center dimension".into()));
        }
        if self.kind == ProxKind::EntropySimplex {
            return Err(Error::Unsupported("entropy setup has a fixed prox-center".into()));
        }
        self.center = center;
        Ok(self)
    }

    /// Scaling constant `e·n^((κ−1)(2−κ)/κ)·ln n` of the κ-norm setup.
    pub fn kappa_scale(&self) -> T {
        let n = T::of_usize(self.n);
        let k = self.kappa;
        T::one().exp() * n.powf((k - T::one()) * (T::of(2.0) - k) / k) * n.ln()
    }

    /// Growth constant Ω: `e·n^((κ−1)(2−κ)/κ)·ln n` for the κ-norm setup, 1 for Euclidean, `ln n` for entropy.
    pub fn omega(&self) -> T {
        match self.kind {
            ProxKind::Euclidean => T::one(),
            ProxKind::EntropySimplex => T::of_usize(self.n).ln(),
            ProxKind::KappaNorm => self.kappa_scale(),
        }
    }

    pub fn primal_norm(&self, x: &[T]) -> T {
        match self.norm {
            NormTag::L1 => norm1(x),
            NormTag::L2 => norm2(x),
        }
    }

    pub fn dual_norm(&self, g: &[T]) -> T {
        dual_norm(self.norm, g)
    }

    /// Natural feasible set of the setup when none is imposed.
    pub fn default_set(&self) -> FeasibleSet<T> {
        match self.kind {
            ProxKind::EntropySimplex => FeasibleSet::Simplex,
            _ => FeasibleSet::Full,
        }
    }

    fn check_dim(&self, x: &[T]) -> Result<()> {
        if x.len() != self.n {
            return Err(Error::InvalidInput(format!("dimension {} != {}", x.len(), self.n)));
        }
        if !linalg::all_finite(x) {
            return Err(Error::InvalidInput("non-finite coordinates".into()));
        }
        Ok(())
    }

    pub fn check_domain(&self, x: &[T]) -> Result<()> {
        self.check_dim(x)?;
        if self.kind == ProxKind::EntropySimplex && !is_simplex_point(x, T::of(SIMPLEX_TOL)) {
            return Err(Error::InvalidInput("point is not in the simplex".into()));
        }
        Ok(())
    }

    pub fn d(&self, x: &[T]) -> Result<T> {
        self.check_domain(x)?;
        Ok(match self.kind {
            ProxKind::Euclidean => linalg::norm2_sq(&linalg::sub(x, &self.center)) * T::of(0.5),
            ProxKind::EntropySimplex => T::of_usize(self.n).ln() + x.iter().map(|&v| xlnx(v)).sum::<T>(),
            ProxKind::KappaNorm => {
                let y = linalg::sub(x, &self.center);
                let nk = norm_p(&y, self.kappa);
                self.kappa_scale() * T::of(0.5) * nk * nk
            }
        })
    }

    pub fn grad_d(&self, x: &[T]) -> Result<Vec<T>> {
        self.check_domain(x)?;
        Ok(match self.kind {
            ProxKind::Euclidean => linalg::sub(x, &self.center),
            ProxKind::EntropySimplex => x.iter().map(|&v| v.ln() + T::one()).collect(),
            ProxKind::KappaNorm => {
                let y = linalg::sub(x, &self.center);
                kappa_forward(&y, self.kappa, self.kappa_scale())
            }
        })
    }

    /// Bregman divergence `V[z](x) = d(x) − d(z) − ⟨∇d(z), x − z⟩`.
    pub fn bregman(&self, z: &[T], x: &[T]) -> Result<T> {
        self.check_domain(z)?;
        self.check_domain(x)?;
        match self.kind {
            ProxKind::Euclidean => Ok(linalg::norm2_sq(&linalg::sub(x, z)) * T::of(0.5)),
            ProxKind::EntropySimplex => {
                // KL(x‖z) written out so that zero coordinates of x contribute exactly 0.
                let mut s = T::zero();
                for (&xi, &zi) in x.iter().zip(z) {
                    if xi > T::zero() {
                        if zi <= T::zero() {
                            return Ok(T::infinity());
                        }
                        s += xi * (xi / zi).ln();
                    }
                }
                // Σx and Σz may differ from 1 by rounding; keep the general Bregman form.
                s += linalg::sum(z) - linalg::sum(x);
                Ok(s.max(T::zero()))
            }
            ProxKind::KappaNorm => {
                let dz = self.d(z)?;
                let dx = self.d(x)?;
                let g = self.grad_d(z)?;
                Ok(dx - dz - dot(&g, &linalg::sub(x, z)))
            }
        }
    }

    /// `argmin_{x ∈ Q} ⟨g, x⟩ + β V[z](x)`.
    pub fn mirror_step(&self, z: &[T], g: &[T], beta: T, q: &FeasibleSet<T>) -> Result<Vec<T>> {
        self.mirror_step_composite(z, g, beta, T::zero(), Composite::Zero, q)
    }

    /// `argmin_{x ∈ Q} ⟨g, x⟩ + β V[z](x) + w·h(x)`.
    pub fn mirror_step_composite(&self, z: &[T], g: &[T], beta: T, w: T, h: Composite<T>, q: &FeasibleSet<T>) -> Result<Vec<T>> {
        self.check_domain(z)?;
        if g.len() != self.n {
            return Err(Error::InvalidInput("gradient dimension".into()));
        }
        if !(beta > T::zero()) {
            return Err(Error::InvalidParameter("beta must be positive".into()));
        }
        if g.iter().all(|&v| v == T::zero()) && (w == T::zero() || h == Composite::Zero) {
            if let FeasibleSet::Ball { center, radius } = q {
                if linalg::dist2(z, center) > *radius {
                    return Ok(project_ball(z, center, *radius));
                }
            }
            if *q == FeasibleSet::Simplex && self.kind == ProxKind::Euclidean && !is_simplex_point(z, T::of(SIMPLEX_TOL)) {
                return Ok(project_simplex(z));
            }
            return Ok(z.to_vec());
        }
        let l1 = match h {
            Composite::L1(c) => c * w,
            Composite::Zero => T::zero(),
        };
        match (self.kind, q) {
            (_, FeasibleSet::Simplex) if self.kind != ProxKind::KappaNorm => {
                // ‖x‖₁ ≡ 1 on the simplex, so the ℓ1 term is a constant there.
                if self.kind == ProxKind::EntropySimplex {
                    let logits: Vec<T> = z
                        .iter()
                        .zip(g)
                        .map(|(&zi, &gi)| if zi > T::zero() { zi.ln() - gi / beta } else { T::neg_infinity() })
                        .collect();
                    Ok(linalg::softmax(&logits))
                } else {
                    let v: Vec<T> = z.iter().zip(g).map(|(&zi, &gi)| zi - gi / beta).collect();
                    Ok(project_simplex(&v))
                }
            }
            (ProxKind::Euclidean, FeasibleSet::Full) => {
                let v: Vec<T> = z.iter().zip(g).map(|(&zi, &gi)| zi - gi / beta).collect();
                Ok(if l1 > T::zero() { soft_threshold(&v, l1 / beta) } else { v })
            }
            (ProxKind::Euclidean, FeasibleSet::Ball { center, radius }) if l1 == T::zero() => {
                let v: Vec<T> = z.iter().zip(g).map(|(&zi, &gi)| zi - gi / beta).collect();
                Ok(project_ball(&v, center, *radius))
            }
            (ProxKind::KappaNorm, FeasibleSet::Full) if l1 == T::zero() => {
                let c = self.kappa_scale();
                let gz = kappa_forward(&linalg::sub(z, &self.center), self.kappa, c);
                let s: Vec<T> = gz.iter().zip(g).map(|(&a, &b)| a - b / beta).collect();
                let y = kappa_inverse(&s, self.kappa, c);
                Ok(linalg::add(&self.center, &y))
            }
            (kind, set) => Err(Error::Unsupported(format!("mirror step for {kind:?} over {} with composite {h:?}", set_name(set)))),
        }
    }
}

fn set_name<T>(q: &FeasibleSet<T>) -> &'static str {
    match q {
        FeasibleSet::Full => "full space",
        FeasibleSet::Simplex => "simplex",
        FeasibleSet::Ball { .. } => "ball",
    }
}

/// Dual norm for the given primal norm: ℓ2 ↔ ℓ2, ℓ1 ↔ ℓ∞.
pub fn dual_norm<T: Real>(norm: NormTag, g: &[T]) -> T {
    match norm {
        NormTag::L1 => norm_inf(g),
        NormTag::L2 => norm2(g),
    }
}

#[inline]
fn xlnx<T: Real>(v: T) -> T {
    if v > T::zero() {
        v * v.ln()
    } else {
        T::zero()
    }
}

/// `∇ (c/2)‖y‖_κ² = c‖y‖_κ^{2−κ} sign(y)|y|^{κ−1}`.
pub fn kappa_forward<T: Real>(y: &[T], kappa: T, c: T) -> Vec<T> {
    let nk = norm_p(y, kappa);
    if nk == T::zero() {
        return vec![T::zero(); y.len()];
    }
    // Write |y_i|^{κ−1} ‖y‖^{2−κ} = ‖y‖ (|y_i|/‖y‖)^{κ−1} to stay in range.
    y.iter().map(|&v| c * nk * v.signum() * (v.abs() / nk).powf(kappa - T::one())).collect()
}

/// Inverse of [`kappa_forward`] through the conjugate `(1/2c)‖s‖_{κ*}²`, `κ* = κ/(κ−1)`.
pub fn kappa_inverse<T: Real>(s: &[T], kappa: T, c: T) -> Vec<T> {
    let ks = kappa / (kappa - T::one());
    let ns = norm_p(s, ks);
    if ns == T::zero() {
        return vec![T::zero(); s.len()];
    }
    s.iter().map(|&v| ns / c * v.signum() * (v.abs() / ns).powf(ks - T::one())).collect()
}

pub fn is_simplex_point<T: Real>(x: &[T], tol: T) -> bool {
    x.iter().all(|&v| v >= -tol) && (linalg::sum(x) - T::one()).abs() <= tol
}

fn soft_threshold<T: Real>(v: &[T], t: T) -> Vec<T> {
    v.iter().map(|&a| a.signum() * (a.abs() - t).max(T::zero())).collect()
}

/// Euclidean projection onto the probability simplex (sort-and-threshold).
pub fn project_simplex<T: Real>(v: &[T]) -> Vec<T> {
    let n = v.len();
    if n == 0 {
        return Vec::new();
    }
    let mut u = v.to_vec();
    u.sort_by(|a, b| b.partial_cmp(a).expect("finite input"));
    let mut css = T::zero();
    let mut theta = T::zero();
    for (j, &uj) in u.iter().enumerate() {
        css += uj;
        let t = (css - T::one()) / T::of_usize(j + 1);
        if uj - t > T::zero() {
            theta = t;
        }
    }
    let mut x: Vec<T> = v.iter().map(|&a| (a - theta).max(T::zero())).collect();
    // Absorb the last rounding error into the largest coordinate.
    let s = linalg::sum(&x);
    if s > T::zero() {
        let imax = (0..n).fold(0, |m, i| if x[i] > x[m] { i } else { m });
        x[imax] += T::one() - s;
    }
    x
}

/// Euclidean projection onto the ball `‖x − center‖₂ ≤ R`.
pub fn project_ball<T: Real>(v: &[T], center: &[T], r: T) -> Vec<T> {
    let d = linalg::sub(v, center);
    let nd = norm2(&d);
    if nd <= r {
        return v.to_vec();
    }
    center.iter().zip(&d).map(|(&c, &di)| c + r * di / nd).collect()
}

/// Prox-center together with its setup.
#[derive(Clone, Debug)]
pub struct BregmanState<T> {
    pub center: Vec<T>,
    pub setup: ProxSetup<T>,
}

impl<T: Real> BregmanState<T> {
    pub fn divergence(&self, x: &[T]) -> Result<T> {
        self.setup.bregman(&self.center, x)
    }
}
