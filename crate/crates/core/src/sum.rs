//! Compensated (Neumaier) accumulation for real and complex series.

use num_complex::Complex;

use crate::scalar::Real;

/// Running sum with a Neumaier compensation term.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum<T> {
    sum: T,
    compensation: T,
}

impl<T: Real> CompensatedSum<T> {
    pub fn new() -> Self {
        Self {
            sum: T::zero(),
            compensation: T::zero(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation = self.compensation + ((self.sum - t) + value);
        } else {
            self.compensation = self.compensation + ((value - t) + self.sum);
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> T {
        self.sum + self.compensation
    }
}

impl<T: Real> FromIterator<T> for CompensatedSum<T> {
    fn from_iter<I: IntoIterator<Item = T>>(iter: I) -> Self {
        let mut acc = Self::new();
        for v in iter {
            acc.add(v);
        }
        acc
    }
}

/// Componentwise compensated sum of complex values.
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexSum<T> {
    re: CompensatedSum<T>,
    im: CompensatedSum<T>,
}

impl<T: Real> ComplexSum<T> {
    pub fn new() -> Self {
        Self {
            re: CompensatedSum::new(),
            im: CompensatedSum::new(),
        }
    }

    #[inline]
    pub fn add(&mut self, value: Complex<T>) {
        self.re.add(value.re);
        self.im.add(value.im);
    }

    #[inline]
    pub fn value(&self) -> Complex<T> {
        Complex::new(self.re.value(), self.im.value())
    }
}
