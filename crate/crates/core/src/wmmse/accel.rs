//! Anderson mixing of the power fixed-point map, in amplitude coordinates.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

/// Type-II Anderson mixing over the last `memory` steps.
#[derive(Debug, Clone)]
pub(crate) struct Anderson {
    memory: usize,
    /// `(x_k, G(x_k))` pairs, oldest first.
    history: VecDeque<(DVector<f64>, DVector<f64>)>,
}

impl Anderson {
    pub(crate) fn new(memory: usize) -> Self {
        Self {
            memory,
            history: VecDeque::with_capacity(memory + 1),
        }
    }

    pub(crate) fn push(&mut self, x: DVector<f64>, gx: DVector<f64>) {
        if self.history.len() == self.memory + 1 {
            self.history.pop_front();
        }
        self.history.push_back((x, gx));
    }

    /// Mixed iterate `G(x_k) - ΔG γ`, with `γ` minimizing `|f_k - ΔF γ|`.
    /// `None` until two steps are stored or when the fit is degenerate.
    pub(crate) fn candidate(&self) -> Option<DVector<f64>> {
        let n = self.history.len();
        if n < 2 {
            return None;
        }
        let (xk, gk) = self.history.back()?;
        let fk = gk - xk;
        let dim = fk.len();
        let cols = n - 1;
        let mut df = DMatrix::zeros(dim, cols);
        let mut dg = DMatrix::zeros(dim, cols);
        for (c, pair) in self.history.iter().collect::<Vec<_>>().windows(2).enumerate() {
            let (x0, g0) = pair[0];
            let (x1, g1) = pair[1];
            df.set_column(c, &((g1 - x1) - (g0 - x0)));
            dg.set_column(c, &(g1 - g0));
        }
        let svd = df.svd(true, true);
        let smax = svd.singular_values.max();
        if smax.is_nan() || smax <= 0.0 {
            return None;
        }
        let gamma = svd.solve(&fk, 1e-12 * smax).ok()?;
        let out = gk - dg * gamma;
        out.iter().all(|v| v.is_finite()).then_some(out)
    }
}
