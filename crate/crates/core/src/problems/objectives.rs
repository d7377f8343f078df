use super::{Dataset, KnownConstants, SmoothProblem};
use crate::error::{check_dim, Error, Result};

/// Logistic function `e^t/(1 + e^t)`, evaluated on the branch that cannot
/// overflow.
pub fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

/// `s'(t) = s(t)(1 − s(t))`, written as `e^{−|t|}/(1 + e^{−|t|})²`.
pub fn sigmoid_prime(t: f64) -> f64 {
    let e = (-t.abs()).exp();
    e / ((1.0 + e) * (1.0 + e))
}

/// `φ(t) = t²/(1 + t²)`.
pub fn robust_loss(t: f64) -> f64 {
    let t2 = t * t;
    t2 / (1.0 + t2)
}

/// `φ'(t) = 2t/(1 + t²)²`.
pub fn robust_loss_prime(t: f64) -> f64 {
    let d = 1.0 + t * t;
    2.0 * t / (d * d)
}

fn nonempty(data: &Dataset) -> Result<()> {
    if data.rows() == 0 || data.cols() == 0 {
        return Err(Error::invalid("dataset", "must have at least one row and one column"));
    }
    Ok(())
}

/// Sigmoid least squares: `f(x) = Σ_i (s(a_iᵀx) − b_i)²`.
#[derive(Debug, Clone)]
pub struct DataFit {
    data: Dataset,
}

pub fn datafit_problem(data: Dataset) -> Result<DataFit> {
    nonempty(&data)?;
    Ok(DataFit { data })
}

impl DataFit {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }
}

impl SmoothProblem for DataFit {
    fn name(&self) -> &'static str {
        "datafit"
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self
            .data
            .iter_rows()
            .map(|(a, b)| {
                let r = sigmoid(crate::vector::dot(a, x)) - b;
                r * r
            })
            .sum())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; x.len()];
        for (a, b) in self.data.iter_rows() {
            let u = crate::vector::dot(a, x);
            let w = 2.0 * (sigmoid(u) - b) * sigmoid_prime(u);
            for (gi, ai) in g.iter_mut().zip(a) {
                *gi += w * ai;
            }
        }
        Ok(g)
    }

    fn constants(&self) -> KnownConstants {
        KnownConstants {
            f_low: Some(0.0),
            ..Default::default()
        }
    }
}

/// Robust regression: `f(x) = Σ_i φ(a_iᵀx − b_i)`.
#[derive(Debug, Clone)]
pub struct Robust {
    data: Dataset,
}

pub fn robust_problem(data: Dataset) -> Result<Robust> {
    nonempty(&data)?;
    Ok(Robust { data })
}

impl Robust {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }
}

impl SmoothProblem for Robust {
    fn name(&self) -> &'static str {
        "robust"
    }

    fn dim(&self) -> usize {
        self.data.cols()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(self
            .data
            .iter_rows()
            .map(|(a, b)| robust_loss(crate::vector::dot(a, x) - b))
            .sum())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        let mut g = vec![0.0; x.len()];
        for (a, b) in self.data.iter_rows() {
            let w = robust_loss_prime(crate::vector::dot(a, x) - b);
            for (gi, ai) in g.iter_mut().zip(a) {
                *gi += w * ai;
            }
        }
        Ok(g)
    }

    fn constants(&self) -> KnownConstants {
        KnownConstants {
            f_low: Some(0.0),
            ..Default::default()
        }
    }
}

/// Separable quadratic `½ Σ λ_i x_i²` with `λ_i` log-spaced over
/// `[1, conditioning]`. Minimizer at the origin.
#[derive(Debug, Clone)]
pub struct Quadratic {
    eigenvalues: Vec<f64>,
}

pub fn quadratic_problem(n: usize, conditioning: f64) -> Result<Quadratic> {
    if n == 0 {
        return Err(Error::invalid("n", "dimension must be >= 1"));
    }
    if !(conditioning >= 1.0 && conditioning.is_finite()) {
        return Err(Error::invalid("conditioning", format!("must be >= 1, got {conditioning}")));
    }
    let eigenvalues = if n == 1 {
        vec![1.0]
    } else {
        let ln_c = conditioning.ln();
        (0..n)
            .map(|i| (ln_c * i as f64 / (n - 1) as f64).exp())
            .collect()
    };
    Ok(Quadratic { eigenvalues })
}

impl Quadratic {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }
}

impl SmoothProblem for Quadratic {
    fn name(&self) -> &'static str {
        "quadratic"
    }

    fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    fn value(&self, x: &[f64]) -> Result<f64> {
        check_dim(self.dim(), x.len())?;
        Ok(0.5 * self.eigenvalues.iter().zip(x).map(|(l, v)| l * v * v).sum::<f64>())
    }

    fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.dim(), x.len())?;
        Ok(self.eigenvalues.iter().zip(x).map(|(l, v)| l * v).collect())
    }

    fn constants(&self) -> KnownConstants {
        KnownConstants {
            l1: Some(self.eigenvalues.iter().copied().fold(0.0, f64::max)),
            lp: Some(0.0),
            p: None,
            f_low: Some(0.0),
        }
    }

    fn gradient_taylor(&self, x: &[f64], v: &[f64], order: u32) -> Option<Result<Vec<f64>>> {
        Some((|| {
            check_dim(self.dim(), v.len())?;
            let mut g = self.gradient(x)?;
            if order >= 2 {
                for ((gi, l), vi) in g.iter_mut().zip(&self.eigenvalues).zip(v) {
                    *gi += l * vi;
                }
            }
            Ok(g)
        })())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::Provenance;

    #[test]
    fn sigmoid_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert_eq!(sigmoid_prime(0.0), 0.25);
        assert_eq!(sigmoid(40.0), 1.0);
        assert!(sigmoid_prime(40.0) < 1e-17);
        assert!((sigmoid(1.0) - 0.7310585786).abs() < 1e-10);
        assert!((sigmoid_prime(1.0) - 0.1966119332).abs() < 1e-10);
        let fd = (sigmoid(1.0 + 1e-6) - sigmoid(1.0 - 1e-6)) / 2e-6;
        assert!((fd - sigmoid_prime(1.0)).abs() < 1e-9);
        for t in [-700.0, -40.0, 40.0, 700.0] {
            let s = sigmoid(t);
            assert!(s.is_finite() && (0.0..=1.0).contains(&s));
            assert!(sigmoid_prime(t).is_finite());
        }
        assert!(sigmoid(-700.0) > 0.0);
    }

    #[test]
    fn robust_loss_values() {
        assert_eq!(robust_loss(1.0), 0.5);
        assert_eq!(robust_loss_prime(1.0), 0.5);
        assert_eq!(robust_loss(0.0), 0.0);
        assert_eq!(robust_loss_prime(0.0), 0.0);
    }

    #[test]
    fn datafit_zero_row() {
        let data = Dataset::new(vec![0.0; 3], vec![0.5], 3, Provenance::Inline).unwrap();
        let prob = datafit_problem(data).unwrap();
        let x = [1.0, -2.0, 3.0];
        assert_eq!(prob.value(&x).unwrap(), 0.0);
        assert_eq!(prob.gradient(&x).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn robust_zero_residuals() {
        let data = Dataset::new(vec![1.0, 2.0, 0.5, -1.0], vec![3.0, -0.5], 2, Provenance::Inline).unwrap();
        let prob = robust_problem(data).unwrap();
        let x = [1.0, 1.0];
        assert_eq!(prob.value(&x).unwrap(), 0.0);
        assert_eq!(prob.gradient(&x).unwrap(), vec![0.0; 2]);
    }

    #[test]
    fn quadratic_basics() {
        let q = quadratic_problem(1, 1.0).unwrap();
        assert_eq!(q.value(&[2.0]).unwrap(), 2.0);
        assert_eq!(q.gradient(&[2.0]).unwrap(), vec![2.0]);
        let q = quadratic_problem(4, 1000.0).unwrap();
        assert_eq!(q.value(&[0.0; 4]).unwrap(), 0.0);
        assert_eq!(q.gradient(&[0.0; 4]).unwrap(), vec![0.0; 4]);
        assert_eq!(q.eigenvalues()[0], 1.0);
        assert!((q.eigenvalues()[3] - 1000.0).abs() < 1e-9);
        assert!((q.constants().l1.unwrap() - 1000.0).abs() < 1e-9);
        assert!(quadratic_problem(0, 1.0).is_err());
        assert!(quadratic_problem(2, 0.5).is_err());
    }

    #[test]
    fn dimension_mismatch() {
        let q = quadratic_problem(3, 2.0).unwrap();
        assert!(matches!(q.gradient(&[1.0]), Err(Error::DimensionMismatch { expected: 3, got: 1 })));
        let data = Dataset::new(vec![1.0, 2.0], vec![0.0], 2, Provenance::Inline).unwrap();
        assert!(datafit_problem(data.clone()).unwrap().value(&[1.0]).is_err());
        assert!(robust_problem(data).unwrap().gradient(&[1.0, 2.0, 3.0]).is_err());
    }
}
