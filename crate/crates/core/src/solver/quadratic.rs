use num_complex::Complex;

use super::{mode_count, seq_from, toeplitz, ComponentModel};
use crate::error::{Error, Result};
use crate::fourier::{convolve, symmetrize, FourierCircle};
use crate::linalg::CMatrix;
use crate::maps::{Mat2, MapFamily, MapSpec};
use crate::scalar::Real;

/// Maps of the form `F(x, y) = L (x, y) + x^2 q`.
///
/// The area-preserving Hénon map has `L` the rotation by `alpha` and
/// `q = (sin alpha, -cos alpha)`; the rigid rotation has `q = 0`.
#[derive(Clone, Debug)]
pub struct QuadraticModel<T> {
    n: usize,
    pub linear: Mat2<T>,
    pub quad: [T; 2],
}

impl<T: Real> QuadraticModel<T> {
    pub fn new(n: usize, linear: Mat2<T>, quad: [T; 2]) -> Self {
        Self { n, linear, quad }
    }

    pub fn for_spec(spec: &MapSpec<T>, n: usize) -> Result<Self> {
        let (s, c) = spec.alpha.sin_cos();
        let rot = [[c, -s], [s, c]];
        match spec.family {
            MapFamily::HenonAP => Ok(Self::new(n, rot, [s, -c])),
            MapFamily::Rotation => Ok(Self::new(n, rot, [T::zero(), T::zero()])),
            other => Err(Error::InvalidArgument(format!("the {other} map is not quadratic"))),
        }
    }
}

impl<T: Real> ComponentModel<T> for QuadraticModel<T> {
    fn order(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        2 * mode_count(self.n)
    }

    fn init(&self, circle: &FourierCircle<T>) -> Vec<Complex<T>> {
        let mut v = circle.a.as_slice().to_vec();
        v.extend_from_slice(circle.b.as_slice());
        v
    }

    fn rows(&self, comp: &[Complex<T>]) -> Vec<Complex<T>> {
        let l = mode_count(self.n);
        let (a, b) = comp.split_at(l);
        let a = seq_from(a);
        let aa = convolve(&a, &a);
        let [[l00, l01], [l10, l11]] = self.linear;
        let mut out = Vec::with_capacity(2 * l);
        for i in 0..l {
            out.push(a.as_slice()[i] * l00 + b[i] * l01 + aa.as_slice()[i] * self.quad[0]);
        }
        for i in 0..l {
            out.push(a.as_slice()[i] * l10 + b[i] * l11 + aa.as_slice()[i] * self.quad[1]);
        }
        out
    }

    fn rows_jacobian(&self, comp: &[Complex<T>]) -> CMatrix<T> {
        let l = mode_count(self.n);
        let a = seq_from(&comp[..l]);
        let ta = toeplitz(&a, self.n);
        let two = T::lit(2.0);
        let [[l00, l01], [l10, l11]] = self.linear;
        let mut j = CMatrix::zeros(2 * l, 2 * l);
        for r in 0..l {
            for c in 0..l {
                j[(r, c)] = ta[(r, c)] * (two * self.quad[0]);
                j[(l + r, c)] = ta[(r, c)] * (two * self.quad[1]);
            }
            j[(r, r)] += Complex::from(l00);
            j[(r, l + r)] = Complex::from(l01);
            j[(l + r, r)] += Complex::from(l10);
            j[(l + r, l + r)] = Complex::from(l11);
        }
        j
    }

    fn symmetrize(&self, comp: &mut [Complex<T>]) -> T {
        let l = mode_count(self.n);
        for part in comp.chunks_mut(l) {
            let s = symmetrize(&seq_from(part));
            part.copy_from_slice(s.as_slice());
        }
        T::zero()
    }
}
