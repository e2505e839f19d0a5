//! Target functions evaluated on grid points.

use crate::topology::GridPoint;

/// A function sampled on the binary grid. Implementations must be safe to
/// call from several threads at once.
pub trait GridFunction<T>: Sync {
    fn eval(&self, p: &GridPoint) -> T;
}

impl<T, F> GridFunction<T> for F
where
    F: Fn(&GridPoint) -> T + Sync,
{
    fn eval(&self, p: &GridPoint) -> T {
        self(p)
    }
}

/// Adapts a function of decoded coordinates `x ∈ [0, 1)^n` to a
/// [`GridFunction`].
pub struct OfCoords<F>(pub F);

impl<T, F> GridFunction<T> for OfCoords<F>
where
    F: Fn(&[f64]) -> T + Sync,
{
    fn eval(&self, p: &GridPoint) -> T {
        (self.0)(&p.coords())
    }
}
