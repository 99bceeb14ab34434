use std::fmt;
use std::sync::Arc;

type Partials = dyn Fn(f64, f64, usize, usize) -> f64 + Send + Sync;

/// A function of `(x, t)` together with its mixed partial derivatives up to
/// a fixed total order.
///
/// `eval(x, t, i, k)` is `∂ₓⁱ ∂ₜᵏ f (x, t)`; it is only ever called with
/// `i + k <= order`.
#[derive(Clone)]
pub struct ClosedForm {
    partials: Arc<Partials>,
    order: usize,
}

impl fmt::Debug for ClosedForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ClosedForm").field("order", &self.order).finish_non_exhaustive()
    }
}

/// Derivative order assigned to constants (any finite use is covered).
const UNBOUNDED: usize = 16;

impl ClosedForm {
    pub fn new<F>(order: usize, partials: F) -> Self
    where
        F: Fn(f64, f64, usize, usize) -> f64 + Send + Sync + 'static,
    {
        ClosedForm { partials: Arc::new(partials), order }
    }

    pub fn constant(c: f64) -> Self {
        ClosedForm::new(UNBOUNDED, move |_, _, i, k| if i + k == 0 { c } else { 0.0 })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `∂ₓⁱ ∂ₜᵏ f`, or `None` beyond the available order.
    pub fn eval(&self, x: f64, t: f64, i: usize, k: usize) -> Option<f64> {
        (i + k <= self.order).then(|| (self.partials)(x, t, i, k))
    }

    pub fn value(&self, x: f64, t: f64) -> f64 {
        (self.partials)(x, t, 0, 0)
    }

    pub fn diff_x(&self) -> Option<ClosedForm> {
        self.shifted(1, 0)
    }

    pub fn diff_t(&self) -> Option<ClosedForm> {
        self.shifted(0, 1)
    }

    fn shifted(&self, di: usize, dk: usize) -> Option<ClosedForm> {
        if self.order < di + dk {
            return None;
        }
        let p = Arc::clone(&self.partials);
        Some(ClosedForm::new(self.order - di - dk, move |x, t, i, k| p(x, t, i + di, k + dk)))
    }

    pub fn add(&self, other: &ClosedForm) -> ClosedForm {
        let (a, b) = (Arc::clone(&self.partials), Arc::clone(&other.partials));
        ClosedForm::new(self.order.min(other.order), move |x, t, i, k| a(x, t, i, k) + b(x, t, i, k))
    }

    pub fn scale(&self, c: f64) -> ClosedForm {
        let a = Arc::clone(&self.partials);
        ClosedForm::new(self.order, move |x, t, i, k| c * a(x, t, i, k))
    }

    /// Product rule (general Leibniz formula in both variables).
    pub fn mul(&self, other: &ClosedForm) -> ClosedForm {
        let (a, b) = (Arc::clone(&self.partials), Arc::clone(&other.partials));
        ClosedForm::new(self.order.min(other.order), move |x, t, i, k| {
            let mut acc = 0.0;
            for p in 0..=i {
                for q in 0..=k {
                    let w = (binomial(i, p) * binomial(k, q)) as f64;
                    acc += w * a(x, t, p, q) * b(x, t, i - p, k - q);
                }
            }
            acc
        })
    }

    /// `g ∘ f` given `g, g', g''`; chain rule through second order.
    pub fn compose(&self, g: [fn(f64) -> f64; 3]) -> ClosedForm {
        let f = Arc::clone(&self.partials);
        ClosedForm::new(self.order.min(2), move |x, t, i, k| {
            let v = f(x, t, 0, 0);
            match (i, k) {
                (0, 0) => g[0](v),
                (1, 0) | (0, 1) => g[1](v) * f(x, t, i, k),
                (2, 0) | (0, 2) | (1, 1) => {
                    let (a, b) = if i == 1 { ((1, 0), (0, 1)) } else { ((i / 2, k / 2), (i / 2, k / 2)) };
                    g[2](v) * f(x, t, a.0, a.1) * f(x, t, b.0, b.1) + g[1](v) * f(x, t, i, k)
                }
                _ => unreachable!("compose supports total order <= 2"),
            }
        })
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, m| acc * (n - m) / (m + 1))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sin_x_plus_2t() -> ClosedForm {
        // ∂ₓⁱ∂ₜᵏ sin(x + 2t) = 2ᵏ sin(x + 2t + (i+k)π/2)
        ClosedForm::new(4, |x, t, i, k| {
            2f64.powi(k as i32) * (x + 2.0 * t + (i + k) as f64 * std::f64::consts::FRAC_PI_2).sin()
        })
    }

    fn fd(f: &dyn Fn(f64, f64) -> f64, x: f64, t: f64, i: usize, k: usize) -> f64 {
        let h = 1e-4;
        match (i, k) {
            (1, 0) => (f(x + h, t) - f(x - h, t)) / (2.0 * h),
            (0, 1) => (f(x, t + h) - f(x, t - h)) / (2.0 * h),
            (2, 0) => (f(x + h, t) - 2.0 * f(x, t) + f(x - h, t)) / (h * h),
            (0, 2) => (f(x, t + h) - 2.0 * f(x, t) + f(x, t - h)) / (h * h),
            (1, 1) => (f(x + h, t + h) - f(x + h, t - h) - f(x - h, t + h) + f(x - h, t - h)) / (4.0 * h * h),
            _ => unreachable!(),
        }
    }

    #[test]
    fn product_and_composition_match_finite_differences() {
        let a = sin_x_plus_2t();
        let b = ClosedForm::new(3, |x, t, i, k| match (i, k) {
            (0, 0) => x * x * t,
            (1, 0) => 2.0 * x * t,
            (0, 1) => x * x,
            (2, 0) => 2.0 * t,
            (1, 1) => 2.0 * x,
            (0, 2) => 0.0,
            _ => 0.0,
        });
        let prod = a.mul(&b);
        let comp = a.compose([f64::cos, |v| -v.sin(), |v| -v.cos()]);
        let (x, t) = (0.37, -0.81);
        for &(i, k) in &[(1, 0), (0, 1), (2, 0), (0, 2), (1, 1)] {
            let p = fd(&|x, t| prod.value(x, t), x, t, i, k);
            assert!((prod.eval(x, t, i, k).unwrap() - p).abs() < 1e-6, "product ({i},{k})");
            let c = fd(&|x, t| comp.value(x, t), x, t, i, k);
            assert!((comp.eval(x, t, i, k).unwrap() - c).abs() < 1e-6, "compose ({i},{k})");
        }
    }

    #[test]
    fn order_is_tracked() {
        let a = sin_x_plus_2t();
        assert_eq!(a.diff_x().unwrap().diff_t().unwrap().order(), 2);
        assert!(a.compose([f64::sin, f64::cos, f64::sin]).eval(0.0, 0.0, 2, 1).is_none());
        let zero_order = ClosedForm::new(0, |_, _, _, _| 1.0);
        assert!(zero_order.diff_x().is_none());
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(2, 1), 2);
        assert_eq!(binomial(4, 2), 6);
        assert_eq!(binomial(3, 0), 1);
    }
}
