//! Dirichlet Laplacian eigenpairs, mode projection and ℍ^r norms.

use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;

use crate::quadrature::gauss_legendre;
use crate::special::pairwise_sum;

const GL_ORDER: usize = 12;
const GRAM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpectralError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("basis is not orthonormal: max Gram deviation {max_dev:e}")]
    NotOrthonormal { max_dev: f64 },
    #[error("quadrature has {nodes} nodes per direction, need at least {required}")]
    QuadratureUnderResolved { nodes: usize, required: usize },
    #[error("domain carries eigenvalues only; no basis functions to evaluate or project onto")]
    NoBasis,
    #[error("expected {expected} coefficients, got {got}")]
    LengthMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum DomainKind {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64 },
    UserSupplied,
}

/// Tensor quadrature on the spatial domain (1-D uses only the first coordinate).
#[derive(Debug, Clone)]
pub struct SpatialQuadrature {
    pub dim: usize,
    pub points: Vec<[f64; 2]>,
    pub weights: Vec<f64>,
    /// nodes per coordinate direction
    pub nodes_per_dim: usize,
}

impl SpatialQuadrature {
    /// Composite Gauss–Legendre with `panels` panels of 12 nodes per direction.
    pub fn gauss(dim: usize, extent: [f64; 2], panels: usize) -> Self {
        let rule = gauss_legendre(GL_ORDER);
        let line = |len: f64| -> Vec<(f64, f64)> {
            let h = len / panels as f64;
            let mut v = Vec::with_capacity(panels * GL_ORDER);
            for p in 0..panels {
                let c = (p as f64 + 0.5) * h;
                for (x, w) in rule.nodes.iter().zip(&rule.weights) {
                    v.push((c + 0.5 * h * x, 0.5 * h * w));
                }
            }
            v
        };
        let xs = line(extent[0]);
        let (points, weights) = if dim == 1 {
            (xs.iter().map(|&(x, _)| [x, 0.0]).collect(), xs.iter().map(|&(_, w)| w).collect())
        } else {
            let ys = line(extent[1]);
            let mut pts = Vec::with_capacity(xs.len() * ys.len());
            let mut ws = Vec::with_capacity(xs.len() * ys.len());
            for &(x, wx) in &xs {
                for &(y, wy) in &ys {
                    pts.push([x, y]);
                    ws.push(wx * wy);
                }
            }
            (pts, ws)
        };
        Self { dim, points, weights, nodes_per_dim: panels * GL_ORDER }
    }

    pub fn integrate(&self, vals: &[f64]) -> f64 {
        let prods: Vec<f64> = vals.iter().zip(&self.weights).map(|(v, w)| v * w).collect();
        pairwise_sum(&prods)
    }
}

pub type BasisFn = Arc<dyn Fn(usize, &[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Basis {
    Interval { length: f64 },
    Rectangle { lx: f64, ly: f64, pairs: Vec<(usize, usize)> },
    User(BasisFn),
    SpectrumOnly,
}

/// Eigenpairs (λ_k, φ_k) sorted by λ, with a quadrature for projections.
#[derive(Clone)]
pub struct SpectralDomain {
    kind: DomainKind,
    eigenvalues: Vec<f64>,
    basis: Basis,
    quadrature: Option<SpatialQuadrature>,
    /// highest one-directional wave number present (sets the resolution requirement)
    max_wavenumber: usize,
}

impl std::fmt::Debug for SpectralDomain {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SpectralDomain")
            .field("kind", &self.kind)
            .field("n_modes", &self.eigenvalues.len())
            .finish()
    }
}

/// Closed-form Interval or Rectangle domain with `n_modes` modes.
pub fn make_domain(kind: DomainKind, n_modes: usize) -> Result<SpectralDomain, SpectralError> {
    if n_modes == 0 {
        return Err(SpectralError::InvalidDomain("n_modes must be positive".into()));
    }
    let pi = std::f64::consts::PI;
    match kind {
        DomainKind::Interval { length } => {
            if !(length > 0.0 && length.is_finite()) {
                return Err(SpectralError::InvalidDomain(format!("interval length {length}")));
            }
            let eigenvalues = (1..=n_modes).map(|k| (k as f64 * pi / length).powi(2)).collect();
            Ok(SpectralDomain {
                kind,
                eigenvalues,
                basis: Basis::Interval { length },
                quadrature: Some(SpatialQuadrature::gauss(1, [length, 0.0], n_modes)),
                max_wavenumber: n_modes,
            })
        }
        DomainKind::Rectangle { lx, ly } => {
            if !(lx > 0.0 && ly > 0.0 && lx.is_finite() && ly.is_finite()) {
                return Err(SpectralError::InvalidDomain(format!("rectangle {lx} x {ly}")));
            }
            let lam = |a: usize, b: usize| (a as f64 * pi / lx).powi(2) + (b as f64 * pi / ly).powi(2);
            let mut pairs: Vec<(usize, usize)> =
                (1..=n_modes).flat_map(|a| (1..=n_modes).map(move |b| (a, b))).collect();
            pairs.sort_by(|p, q| lam(p.0, p.1).total_cmp(&lam(q.0, q.1)).then(p.cmp(q)));
            pairs.truncate(n_modes);
            let eigenvalues = pairs.iter().map(|&(a, b)| lam(a, b)).collect();
            let kmax = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(1);
            Ok(SpectralDomain {
                kind,
                eigenvalues,
                basis: Basis::Rectangle { lx, ly, pairs },
                quadrature: Some(SpatialQuadrature::gauss(2, [lx, ly], kmax)),
                max_wavenumber: kmax,
            })
        }
        DomainKind::UserSupplied => Err(SpectralError::InvalidDomain(
            "user-supplied domains are built with SpectralDomain::user_supplied".into(),
        )),
    }
}

impl SpectralDomain {
    /// User-supplied eigenpairs; the basis is Gram-checked on `quadrature`.
    pub fn user_supplied(
        eigenvalues: Vec<f64>,
        basis: BasisFn,
        quadrature: SpatialQuadrature,
    ) -> Result<Self, SpectralError> {
        check_spectrum(&eigenvalues)?;
        let n = eigenvalues.len();
        let dom = Self {
            kind: DomainKind::UserSupplied,
            eigenvalues,
            basis: Basis::User(basis),
            quadrature: Some(quadrature),
            max_wavenumber: n,
        };
        let g = dom.gram_matrix()?;
        let mut max_dev: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                max_dev = max_dev.max((g[i][j] - target).abs());
            }
        }
        if max_dev > GRAM_TOL {
            return Err(SpectralError::NotOrthonormal { max_dev });
        }
        Ok(dom)
    }

    /// Eigenvalues only. Used for coefficient-level experiments (norms,
    /// mode solutions, regularity sums) where no point evaluation is needed.
    pub fn spectrum_only(eigenvalues: Vec<f64>) -> Result<Self, SpectralError> {
        check_spectrum(&eigenvalues)?;
        let n = eigenvalues.len();
        Ok(Self { kind: DomainKind::UserSupplied, eigenvalues, basis: Basis::SpectrumOnly, quadrature: None, max_wavenumber: n })
    }

    /// Replaces the projection quadrature with `panels` Gauss panels per direction.
    pub fn with_quadrature_panels(mut self, panels: usize) -> Self {
        let (dim, ext) = match self.kind {
            DomainKind::Interval { length } => (1, [length, 0.0]),
            DomainKind::Rectangle { lx, ly } => (2, [lx, ly]),
            DomainKind::UserSupplied => return self,
        };
        self.quadrature = Some(SpatialQuadrature::gauss(dim, ext, panels.max(1)));
        self
    }

    pub fn kind(&self) -> DomainKind {
        self.kind
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// λ_k with 1-based k.
    pub fn lambda(&self, k: usize) -> f64 {
        self.eigenvalues[k - 1]
    }

    pub fn lambda_1(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn has_basis(&self) -> bool {
        !matches!(self.basis, Basis::SpectrumOnly)
    }

    pub fn quadrature(&self) -> Option<&SpatialQuadrature> {
        self.quadrature.as_ref()
    }

    pub fn spatial_dim(&self) -> usize {
        match self.kind {
            DomainKind::Rectangle { .. } => 2,
            _ => self.quadrature.as_ref().map(|q| q.dim).unwrap_or(1),
        }
    }

    /// Wave numbers (kx, ky) of mode k (1-based); ky = 0 on an interval.
    pub fn wave_numbers(&self, k: usize) -> Option<(usize, usize)> {
        match &self.basis {
            Basis::Interval { .. } => Some((k, 0)),
            Basis::Rectangle { pairs, .. } => Some(pairs[k - 1]),
            _ => None,
        }
    }

    /// φ_k(x) with 1-based k.
    pub fn phi(&self, k: usize, x: &[f64]) -> Result<f64, SpectralError> {
        let pi = std::f64::consts::PI;
        match &self.basis {
            Basis::Interval { length } => {
                Ok((2.0 / length).sqrt() * (k as f64 * pi * x[0] / length).sin())
            }
            Basis::Rectangle { lx, ly, pairs } => {
                let (a, b) = pairs[k - 1];
                Ok(2.0 / (lx * ly).sqrt() * (a as f64 * pi * x[0] / lx).sin() * (b as f64 * pi * x[1] / ly).sin())
            }
            Basis::User(f) => Ok(f(k, x)),
            Basis::SpectrumOnly => Err(SpectralError::NoBasis),
        }
    }

    /// Σ_k c_k φ_k(x).
    pub fn synthesize(&self, coeffs: &[f64], x: &[f64]) -> Result<f64, SpectralError> {
        let terms: Result<Vec<f64>, _> =
            coeffs.iter().enumerate().map(|(i, c)| self.phi(i + 1, x).map(|p| c * p)).collect();
        Ok(pairwise_sum(&terms?))
    }

    /// (φ_i, φ_j) on the projection quadrature.
    pub fn gram_matrix(&self) -> Result<Vec<Vec<f64>>, SpectralError> {
        let q = self.quadrature.as_ref().ok_or(SpectralError::NoBasis)?;
        let n = self.n_modes();
        let vals: Result<Vec<Vec<f64>>, _> =
            (1..=n).map(|k| q.points.iter().map(|p| self.phi(k, p)).collect()).collect();
        let vals = vals?;
        let mut g = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i..n {
                let prod: Vec<f64> = vals[i].iter().zip(&vals[j]).map(|(a, b)| a * b).collect();
                let v = q.integrate(&prod);
                g[i][j] = v;
                g[j][i] = v;
            }
        }
        Ok(g)
    }

    fn required_nodes(&self) -> usize {
        10 * self.max_wavenumber
    }
}

fn check_spectrum(eigenvalues: &[f64]) -> Result<(), SpectralError> {
    if eigenvalues.is_empty() {
        return Err(SpectralError::InvalidDomain("no eigenvalues".into()));
    }
    if eigenvalues.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
        return Err(SpectralError::InvalidDomain("eigenvalues must be positive and finite".into()));
    }
    if eigenvalues.windows(2).any(|w| w[1] < w[0]) {
        return Err(SpectralError::InvalidDomain("eigenvalues must be sorted ascending".into()));
    }
    Ok(())
}

/// Coefficients w_k = (w, φ_k) of a function on a spectral domain.
#[derive(Clone, Debug)]
pub struct ModeExpansion {
    pub domain: Arc<SpectralDomain>,
    pub coeffs: Vec<f64>,
}

impl ModeExpansion {
    pub fn new(domain: Arc<SpectralDomain>, coeffs: Vec<f64>) -> Result<Self, SpectralError> {
        if coeffs.len() != domain.n_modes() {
            return Err(SpectralError::LengthMismatch { expected: domain.n_modes(), got: coeffs.len() });
        }
        Ok(Self { domain, coeffs })
    }

    pub fn zeros(domain: Arc<SpectralDomain>) -> Self {
        let n = domain.n_modes();
        Self { domain, coeffs: vec![0.0; n] }
    }

    /// The single mode φ_k (1-based).
    pub fn unit(domain: Arc<SpectralDomain>, k: usize) -> Self {
        let mut e = Self::zeros(domain);
        e.coeffs[k - 1] = 1.0;
        e
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|c| *c == 0.0)
    }

    /// ‖w‖_{ℍ^r} = (Σ λ_k^r w_k²)^{1/2}.
    pub fn hs_norm(&self, r: f64) -> f64 {
        hs_norm(self, r)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,lambda_k,w_k\n");
        for (i, (l, w)) in self.domain.eigenvalues().iter().zip(&self.coeffs).enumerate() {
            let _ = writeln!(out, "{},{:.16e},{:.16e}", i + 1, l, w);
        }
        out
    }
}

/// Projects `f` onto the first n_modes eigenfunctions.
pub fn project<F: Fn(&[f64]) -> f64>(domain: &Arc<SpectralDomain>, f: F) -> Result<ModeExpansion, SpectralError> {
    let q = domain.quadrature.as_ref().ok_or(SpectralError::NoBasis)?;
    if !domain.has_basis() {
        return Err(SpectralError::NoBasis);
    }
    if q.nodes_per_dim < domain.required_nodes() {
        return Err(SpectralError::QuadratureUnderResolved { nodes: q.nodes_per_dim, required: domain.required_nodes() });
    }
    let fv: Vec<f64> = q.points.iter().map(|p| f(p)).collect();
    let mut coeffs = Vec::with_capacity(domain.n_modes());
    for k in 1..=domain.n_modes() {
        let prod: Result<Vec<f64>, _> = q.points.iter().zip(&fv).map(|(p, v)| domain.phi(k, p).map(|ph| ph * v)).collect();
        coeffs.push(q.integrate(&prod?));
    }
    Ok(ModeExpansion { domain: domain.clone(), coeffs })
}

/// (Σ λ_k^r w_k²)^{1/2}.
pub fn hs_norm(w: &ModeExpansion, r: f64) -> f64 {
    let terms: Vec<f64> = w.domain.eigenvalues().iter().zip(&w.coeffs).map(|(l, c)| l.powf(r) * c * c).collect();
    pairwise_sum(&terms).sqrt()
}

/// (-Δ)^s w, i.e. coefficients λ_k^s w_k.
pub fn apply_fractional(w: &ModeExpansion, s: f64) -> ModeExpansion {
    let coeffs = w.domain.eigenvalues().iter().zip(&w.coeffs).map(|(l, c)| l.powf(s) * c).collect();
    ModeExpansion { domain: w.domain.clone(), coeffs }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn interval_eigenvalues_and_gram() {
        let d = make_domain(DomainKind::Interval { length: PI }, 4).unwrap();
        assert_eq!(d.eigenvalues(), &[1.0, 4.0, 9.0, 16.0]);
        let g = d.gram_matrix().unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let t = if i == j { 1.0 } else { 0.0 };
                assert!((g[i][j] - t).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn rectangle_ordering_breaks_ties_lexicographically() {
        let d = make_domain(DomainKind::Rectangle { lx: 1.0, ly: 1.0 }, 3).unwrap();
        let ev = d.eigenvalues();
        assert!((ev[0] - 2.0 * PI * PI).abs() < 1e-12);
        assert!((ev[1] - 5.0 * PI * PI).abs() < 1e-12);
        assert_eq!(ev[1], ev[2]);
        assert_eq!(d.wave_numbers(2), Some((1, 2)));
        assert_eq!(d.wave_numbers(3), Some((2, 1)));
    }

    #[test]
    fn projection_of_parabola() {
        let d = Arc::new(make_domain(DomainKind::Interval { length: PI }, 16).unwrap());
        let w = project(&d, |x| x[0] * (PI - x[0])).unwrap();
        for (i, c) in w.coeffs.iter().enumerate() {
            let k = (i + 1) as f64;
            let exact = if (i + 1) % 2 == 1 { (2.0 / PI).sqrt() * 4.0 / (k * k * k) } else { 0.0 };
            assert!((c - exact).abs() < 1e-12, "k={k}: {c} vs {exact}");
        }
    }

    #[test]
    fn under_resolved_quadrature_is_rejected() {
        let d = Arc::new(make_domain(DomainKind::Interval { length: 1.0 }, 64).unwrap().with_quadrature_panels(8));
        assert!(matches!(project(&d, |_| 1.0), Err(SpectralError::QuadratureUnderResolved { .. })));
    }

    #[test]
    fn user_basis_gram_check() {
        let q = SpatialQuadrature::gauss(1, [PI, 0.0], 4);
        let good: BasisFn = Arc::new(|k, x| (2.0 / PI).sqrt() * (k as f64 * x[0]).sin());
        assert!(SpectralDomain::user_supplied(vec![1.0, 4.0], good, q.clone()).is_ok());
        let bad: BasisFn = Arc::new(|k, x| (k as f64 * x[0]).sin());
        assert!(matches!(
            SpectralDomain::user_supplied(vec![1.0, 4.0], bad, q),
            Err(SpectralError::NotOrthonormal { .. })
        ));
    }

    #[test]
    fn norms_and_fractional_powers() {
        let d = Arc::new(make_domain(DomainKind::Interval { length: PI }, 3).unwrap());
        let w = ModeExpansion::new(d, vec![1.0, 1.0, 0.0]).unwrap();
        assert!((w.hs_norm(1.0) - 5f64.sqrt()).abs() < 1e-15);
        let a = apply_fractional(&w, 0.5);
        assert_eq!(a.coeffs, vec![1.0, 2.0, 0.0]);
        assert!(w.to_csv().starts_with("k,lambda_k,w_k\n1,"));
    }
}
