use num_complex::Complex;

use super::{mode_count, seq_from, toeplitz, ComponentModel};
use crate::fourier::{symmetrize, FourierCircle, Grid};
use crate::linalg::CMatrix;
use crate::maps::{PlanarMap, Point2};
use crate::scalar::Real;

/// Any planar map, composed with the circle on a uniform grid.
///
/// The residual is the grid transform of `F(K(theta_j))`, and the Jacobian
/// blocks are convolutions by the grid transforms of the entries of `DF(K)`,
/// which is the exact derivative of that residual.
#[derive(Clone, Debug)]
pub struct SampledModel<M, T> {
    n: usize,
    pub map: M,
    grid: Grid<T>,
}

impl<M: PlanarMap<T>, T: Real> SampledModel<M, T> {
    pub fn new(map: M, n: usize) -> Self {
        Self::with_grid(map, n, (8 * mode_count(n)).max(64))
    }

    pub fn with_grid(map: M, n: usize, grid_size: usize) -> Self {
        Self { n, map, grid: Grid::new(grid_size) }
    }

    fn curve(&self, comp: &[Complex<T>]) -> Vec<Point2<T>> {
        let l = mode_count(self.n);
        let x = self.grid.eval(&seq_from(&comp[..l]));
        let y = self.grid.eval(&seq_from(&comp[l..2 * l]));
        x.into_iter().zip(y).map(|(x, y)| Point2::new(x.re, y.re)).collect()
    }
}

impl<M: PlanarMap<T>, T: Real> ComponentModel<T> for SampledModel<M, T> {
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
        let image: Vec<Point2<T>> = self.curve(comp).into_iter().map(|p| self.map.apply(p)).collect();
        let xs: Vec<_> = image.iter().map(|p| Complex::from(p.x)).collect();
        let ys: Vec<_> = image.iter().map(|p| Complex::from(p.y)).collect();
        let mut out = self.grid.transform(&xs, self.n).into_vec();
        out.extend(self.grid.transform(&ys, self.n).into_vec());
        out
    }

    fn rows_jacobian(&self, comp: &[Complex<T>]) -> CMatrix<T> {
        let l = mode_count(self.n);
        let jacs: Vec<_> = self.curve(comp).into_iter().map(|p| self.map.derivative(p)).collect();
        let mut j = CMatrix::zeros(2 * l, 2 * l);
        for (r, c) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            let samples: Vec<_> = jacs.iter().map(|m| Complex::from(m[r][c])).collect();
            let coeffs = self.grid.transform(&samples, 2 * self.n);
            let t = toeplitz(&coeffs, self.n);
            for i in 0..l {
                for k in 0..l {
                    j[(r * l + i, c * l + k)] = t[(i, k)];
                }
            }
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
