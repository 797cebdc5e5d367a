use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::PI;
use std::rc::Rc;

/// Analysis window shapes. All are symmetric: `w[i] == w[n - 1 - i]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Window {
    Hann,
    Hamming,
    /// Gaussian with sigma = 0.4 of the half-length.
    Gaussian,
    Rectangular,
}

type Cache = HashMap<(Window, usize), Rc<[f64]>>;

thread_local! {
    static CACHE: RefCell<Cache> = RefCell::new(HashMap::new());
}

impl Window {
    pub fn coefficients(self, n: usize) -> Vec<f64> {
        self.cached(n).to_vec()
    }

    /// Coefficients memoized per thread; frame loops reuse a handful of lengths.
    fn cached(self, n: usize) -> Rc<[f64]> {
        CACHE.with(|c| {
            c.borrow_mut()
                .entry((self, n))
                .or_insert_with(|| self.compute(n).into())
                .clone()
        })
    }

    fn compute(self, n: usize) -> Vec<f64> {
        if n == 1 {
            return vec![1.0];
        }
        let m = (n - 1) as f64;
        (0..n)
            .map(|i| {
                let x = i as f64;
                match self {
                    Window::Hann => 0.5 - 0.5 * (2.0 * PI * x / m).cos(),
                    Window::Hamming => 0.54 - 0.46 * (2.0 * PI * x / m).cos(),
                    Window::Gaussian => {
                        let t = (x - m / 2.0) / (0.4 * m / 2.0);
                        (-0.5 * t * t).exp()
                    }
                    Window::Rectangular => 1.0,
                }
            })
            .collect()
    }

    pub fn apply(self, frame: &[f64]) -> Vec<f64> {
        frame
            .iter()
            .zip(self.cached(frame.len()).iter())
            .map(|(x, w)| x * w)
            .collect()
    }
}
