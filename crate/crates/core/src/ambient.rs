//! Ambient Lorentzian 4-manifolds that surfaces live in.
//!
//! A space form is a quadric in flat space with the induced metric, so its
//! Levi-Civita connection is the flat derivative followed by tangential
//! projection. A conformally rescaled Minkowski metric `e^{2ρ}η` lives on
//! flat coordinates and carries an extra Christoffel term.

use std::fmt;
use std::sync::Arc;

use crate::curvature::{christoffel, Metric4};
use crate::error::{Error, Result};
use crate::lorentz::{det, MVec, Signature};
use crate::space_form::SpaceForm;

/// Data of the ambient manifold needed to build Darboux frames and second
/// fundamental forms.
pub trait Ambient: Send + Sync {
    /// Signature of the coordinate space points are written in.
    fn signature(&self) -> Signature;

    /// Conformal factor `s` with `g = s·η` on coordinate vectors at `x`.
    fn scale(&self, _x: &MVec) -> f64 {
        1.0
    }

    /// Position vector normal to the model quadric, if there is one.
    fn radial(&self, _x: &MVec) -> Option<MVec> {
        None
    }

    fn time_reference(&self, x: &MVec) -> MVec;

    /// Vector against which null normals are scaled in the boost gauge.
    fn null_gauge(&self) -> MVec;

    /// `±1` for a tangent frame at `x`.
    fn orientation(&self, x: &MVec, e: &[MVec; 4]) -> f64;

    /// `Γ(u, v)` at `x`, added to the flat second derivative.
    fn connection(&self, _x: &MVec, u: &MVec, _v: &MVec) -> MVec {
        MVec::zero(u.signature())
    }

    /// Validates that `x` lies in the manifold.
    fn check(&self, _x: &MVec) -> Result<()> {
        Ok(())
    }

    fn inner(&self, x: &MVec, u: &MVec, v: &MVec) -> f64 {
        self.scale(x) * u.dot(v)
    }
}

impl Ambient for SpaceForm {
    fn signature(&self) -> Signature {
        self.ambient()
    }

    fn radial(&self, x: &MVec) -> Option<MVec> {
        self.quadric_sign().map(|_| *x)
    }

    fn time_reference(&self, x: &MVec) -> MVec {
        SpaceForm::time_reference(self, x)
    }

    fn null_gauge(&self) -> MVec {
        SpaceForm::null_gauge(self)
    }

    fn orientation(&self, x: &MVec, e: &[MVec; 4]) -> f64 {
        SpaceForm::orientation(self, x, e)
    }

    fn check(&self, x: &MVec) -> Result<()> {
        SpaceForm::check(self, x)
    }
}

/// Minkowski coordinates with the metric `e^{2ρ}η`.
#[derive(Clone)]
pub struct RescaledMinkowski {
    rho: Arc<dyn Fn([f64; 4]) -> f64 + Send + Sync>,
    /// Step for differencing the metric.
    pub h: f64,
}

impl fmt::Debug for RescaledMinkowski {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("RescaledMinkowski").field("h", &self.h).finish_non_exhaustive()
    }
}

fn coords(x: &MVec) -> [f64; 4] {
    [x[0], x[1], x[2], x[3]]
}

impl RescaledMinkowski {
    pub fn new(rho: impl Fn([f64; 4]) -> f64 + Send + Sync + 'static, h: f64) -> Result<Self> {
        if !(1e-8..=1e-1).contains(&h) {
            return Err(Error::Config(format!("metric step {h:e} outside [1e-8, 1e-1]")));
        }
        Ok(RescaledMinkowski { rho: Arc::new(rho), h })
    }

    pub fn rho(&self, x: [f64; 4]) -> f64 {
        (self.rho)(x)
    }

    pub fn metric(&self, x: [f64; 4]) -> Metric4 {
        let s = (2.0 * self.rho(x)).exp();
        let mut g = [[0.0; 4]; 4];
        for (i, row) in g.iter_mut().enumerate() {
            row[i] = s * Signature::R41.eps(i);
        }
        g
    }

    /// Christoffel symbols from central differences of the metric.
    pub fn christoffel(&self, x: [f64; 4]) -> Result<[Metric4; 4]> {
        let mut dg = [[[0.0; 4]; 4]; 4];
        for (c, d) in dg.iter_mut().enumerate() {
            let mut p = x;
            let mut m = x;
            p[c] += self.h;
            m[c] -= self.h;
            let (gp, gm) = (self.metric(p), self.metric(m));
            for i in 0..4 {
                for j in 0..4 {
                    d[i][j] = (gp[i][j] - gm[i][j]) / (2.0 * self.h);
                }
            }
        }
        christoffel(&self.metric(x), &dg)
    }

    /// `η`-gradient of `ρ` by central differences.
    pub fn grad_rho(&self, x: [f64; 4]) -> MVec {
        let mut c = [0.0; 4];
        for (i, ci) in c.iter_mut().enumerate() {
            let mut p = x;
            let mut m = x;
            p[i] += self.h;
            m[i] -= self.h;
            *ci = Signature::R41.eps(i) * (self.rho(p) - self.rho(m)) / (2.0 * self.h);
        }
        MVec::new(Signature::R41, &c).expect("four components")
    }
}

impl Ambient for RescaledMinkowski {
    fn signature(&self) -> Signature {
        Signature::R41
    }

    fn scale(&self, x: &MVec) -> f64 {
        (2.0 * self.rho(coords(x))).exp()
    }

    fn time_reference(&self, _x: &MVec) -> MVec {
        MVec::basis(Signature::R41, 0)
    }

    fn null_gauge(&self) -> MVec {
        MVec::basis(Signature::R41, 0)
    }

    fn orientation(&self, _x: &MVec, e: &[MVec; 4]) -> f64 {
        det(e).signum()
    }

    fn connection(&self, x: &MVec, u: &MVec, v: &MVec) -> MVec {
        let Ok(gamma) = self.christoffel(coords(x)) else {
            return MVec::zero(Signature::R41);
        };
        let mut c = [0.0; 4];
        for (a, ca) in c.iter_mut().enumerate() {
            for b in 0..4 {
                for d in 0..4 {
                    *ca += gamma[a][b][d] * u[b] * v[d];
                }
            }
        }
        MVec::new(Signature::R41, &c).expect("four components")
    }

    fn check(&self, x: &MVec) -> Result<()> {
        if x.dims() != 4 {
            return Err(Error::Dimension { expected: 4, got: x.dims() });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rescaled_connection_matches_closed_form() {
        let amb = RescaledMinkowski::new(|x| 0.1 * x[2] * x[2] + 0.05 * x[0], 1e-4).unwrap();
        let x = MVec::new(Signature::R41, &[0.3, -0.2, 0.7, 0.1]).unwrap();
        let u = MVec::new(Signature::R41, &[0.2, 1.0, 0.3, -0.5]).unwrap();
        let v = MVec::new(Signature::R41, &[0.0, 0.4, 1.0, 0.2]).unwrap();
        let grad = amb.grad_rho(coords(&x));
        let drho = |w: &MVec| w.dot(&grad);
        let want = v * drho(&u) + u * drho(&v) - grad * u.dot(&v);
        let got = amb.connection(&x, &u, &v);
        assert!((got - want).euclid() < 1e-7, "{got:?} vs {want:?}");
    }

    #[test]
    fn step_is_validated() {
        assert!(RescaledMinkowski::new(|_| 0.0, 0.0).is_err());
        assert!(RescaledMinkowski::new(|_| 0.0, 1.0).is_err());
    }
}
