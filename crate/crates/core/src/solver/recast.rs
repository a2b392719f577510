use num_complex::Complex;

use super::{mode_count, seq_from, toeplitz, ComponentModel, RecastAux};
use crate::error::{Error, Result};
use crate::fourier::{convolve, differentiate, symmetrize, CoeffSeq, FourierCircle, Grid};
use crate::linalg::CMatrix;
use crate::maps::{MapFamily, MapSpec};
use crate::scalar::Real;

/// Standard map written as a quadratic system.
///
/// With `S = sin(K_1)` and `C = cos(K_1)` as extra unknowns `s`, `c`, the map
/// becomes linear, and `S' = C K_1'`, `C' = -S K_1'` close the system:
///
/// ```text
/// a + b + alpha s                   (first map component)
/// b + alpha s                       (second map component)
/// D s - c * D a - gamma s + omega c
/// D c + s * D a - gamma c - omega s
/// sum s - sin(sum a)
/// sum c - cos(sum a)
/// ```
///
/// Component layout is `[a, b, s, c, gamma, omega]`, rows in the order above.
#[derive(Clone, Debug)]
pub struct RecastModel<T> {
    n: usize,
    pub alpha: T,
    deriv: Vec<Complex<T>>,
}

impl<T: Real> RecastModel<T> {
    pub fn new(n: usize, alpha: T) -> Self {
        let ni = n as i64;
        let deriv = (-ni..=ni).map(|k| Complex::new(T::zero(), T::TAU() * T::from_i64_lossy(k))).collect();
        Self { n, alpha, deriv }
    }

    pub fn for_spec(spec: &MapSpec<T>, n: usize) -> Result<Self> {
        match spec.family {
            MapFamily::Standard => Ok(Self::new(n, spec.alpha)),
            other => Err(Error::InvalidArgument(format!("the trigonometric recast applies to the standard map, not {other}"))),
        }
    }

    /// Auxiliary sequences from sampled `sin`, `cos` of the first component.
    pub fn aux_for(&self, circle: &FourierCircle<T>) -> RecastAux<T> {
        let grid = Grid::for_order(self.n);
        let x = grid.eval(&circle.a);
        let s: Vec<_> = x.iter().map(|v| Complex::from(v.re.sin())).collect();
        let c: Vec<_> = x.iter().map(|v| Complex::from(v.re.cos())).collect();
        RecastAux { s: symmetrize(&grid.transform(&s, self.n)), c: symmetrize(&grid.transform(&c, self.n)) }
    }

    pub fn pack_parts(&self, circle: &FourierCircle<T>, aux: &RecastAux<T>, gamma: T, omega: T) -> Result<Vec<Complex<T>>> {
        let l = mode_count(self.n);
        for len in [circle.a.as_slice().len(), circle.b.as_slice().len(), aux.s.as_slice().len(), aux.c.as_slice().len()] {
            if len != l {
                return Err(Error::LengthMismatch { expected: l, actual: len });
            }
        }
        let mut v = Vec::with_capacity(4 * l + 2);
        v.extend_from_slice(circle.a.as_slice());
        v.extend_from_slice(circle.b.as_slice());
        v.extend_from_slice(aux.s.as_slice());
        v.extend_from_slice(aux.c.as_slice());
        v.push(Complex::from(gamma));
        v.push(Complex::from(omega));
        Ok(v)
    }

    /// Splits a component vector into `(a, b, s, c, gamma, omega)`.
    #[allow(clippy::type_complexity)]
    fn parts<'a>(&self, comp: &'a [Complex<T>]) -> (&'a [Complex<T>], &'a [Complex<T>], &'a [Complex<T>], &'a [Complex<T>], Complex<T>, Complex<T>) {
        let l = mode_count(self.n);
        (&comp[..l], &comp[l..2 * l], &comp[2 * l..3 * l], &comp[3 * l..4 * l], comp[4 * l], comp[4 * l + 1])
    }

    pub fn aux_of(&self, comp: &[Complex<T>]) -> RecastAux<T> {
        let (_, _, s, c, _, _) = self.parts(comp);
        RecastAux { s: seq_from(s), c: seq_from(c) }
    }
}

impl<T: Real> ComponentModel<T> for RecastModel<T> {
    fn order(&self) -> usize {
        self.n
    }

    fn width(&self) -> usize {
        4 * mode_count(self.n) + 2
    }

    fn init(&self, circle: &FourierCircle<T>) -> Vec<Complex<T>> {
        let aux = self.aux_for(circle);
        self.pack_parts(circle, &aux, T::zero(), T::zero()).expect("circle order matches model order")
    }

    fn rows(&self, comp: &[Complex<T>]) -> Vec<Complex<T>> {
        let l = mode_count(self.n);
        let (a, b, s, c, gamma, omega) = self.parts(comp);
        let alpha = self.alpha;
        let da = differentiate(&seq_from(a));
        let (sq, cq) = (seq_from(s), seq_from(c));
        let c_da = convolve(&cq, &da);
        let s_da = convolve(&sq, &da);
        let mut out = Vec::with_capacity(self.width());
        for i in 0..l {
            out.push(a[i] + b[i] + s[i] * alpha);
        }
        for i in 0..l {
            out.push(b[i] + s[i] * alpha);
        }
        for i in 0..l {
            out.push(self.deriv[i] * s[i] - c_da.as_slice()[i] - gamma * s[i] + omega * c[i]);
        }
        for i in 0..l {
            out.push(self.deriv[i] * c[i] + s_da.as_slice()[i] - gamma * c[i] - omega * s[i]);
        }
        let k0: Complex<T> = a.iter().copied().sum();
        out.push(s.iter().copied().sum::<Complex<T>>() - k0.sin());
        out.push(c.iter().copied().sum::<Complex<T>>() - k0.cos());
        out
    }

    fn rows_jacobian(&self, comp: &[Complex<T>]) -> CMatrix<T> {
        let l = mode_count(self.n);
        let (a, _, s, c, gamma, omega) = self.parts(comp);
        let alpha = Complex::from(self.alpha);
        let one = Complex::from(T::one());
        let da = differentiate(&seq_from(a));
        let t_da = toeplitz(&da, self.n);
        let t_s = toeplitz(&seq_from(s), self.n);
        let t_c = toeplitz(&seq_from(c), self.n);
        let (ra, rb, rs, rc) = (0, l, 2 * l, 3 * l);
        let (cg, cw) = (4 * l, 4 * l + 1);
        let mut j = CMatrix::zeros(self.width(), self.width());
        for i in 0..l {
            j[(ra + i, ra + i)] = one;
            j[(ra + i, rb + i)] = one;
            j[(ra + i, rs + i)] = alpha;
            j[(rb + i, rb + i)] = one;
            j[(rb + i, rs + i)] = alpha;

            for k in 0..l {
                // d/da of -(c * Da) is -T(c) D; of (s * Da) is T(s) D.
                j[(rs + i, ra + k)] = -t_c[(i, k)] * self.deriv[k];
                j[(rs + i, rc + k)] = -t_da[(i, k)];
                j[(rc + i, ra + k)] = t_s[(i, k)] * self.deriv[k];
                j[(rc + i, rs + k)] = t_da[(i, k)];
            }
            j[(rs + i, rs + i)] = self.deriv[i] - gamma;
            j[(rs + i, rc + i)] += omega;
            j[(rs + i, cg)] = -s[i];
            j[(rs + i, cw)] = c[i];
            j[(rc + i, rc + i)] = self.deriv[i] - gamma;
            j[(rc + i, rs + i)] -= omega;
            j[(rc + i, cg)] = -c[i];
            j[(rc + i, cw)] = -s[i];
        }
        let k0: Complex<T> = a.iter().copied().sum();
        let (sin0, cos0) = (k0.sin(), k0.cos());
        for i in 0..l {
            j[(cg, ra + i)] = -cos0;
            j[(cg, rs + i)] = one;
            j[(cw, ra + i)] = sin0;
            j[(cw, rc + i)] = one;
        }
        j
    }

    fn symmetrize(&self, comp: &mut [Complex<T>]) -> T {
        let l = mode_count(self.n);
        for part in comp[..4 * l].chunks_mut(l) {
            let s: CoeffSeq<T> = symmetrize(&seq_from(part));
            part.copy_from_slice(s.as_slice());
        }
        let mut imag = T::zero();
        for v in &mut comp[4 * l..] {
            imag = imag.max(v.im.abs());
            v.im = T::zero();
        }
        imag
    }

    fn unfolding(&self, comp: &[Complex<T>]) -> Option<(T, T)> {
        let (_, _, _, _, g, w) = self.parts(comp);
        Some((g.re, w.re))
    }
}
