use serde::{Deserialize, Serialize};

/// Dense two-electron integrals `(pq|rs)` in chemist notation.
///
/// Every write goes through [`EriTensor::set`], which fills the whole 8-fold
/// permutation orbit, so the stored tensor is always exactly symmetric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EriTensor {
    n: usize,
    data: Vec<f64>,
}

impl EriTensor {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![0.0; n * n * n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    #[inline]
    fn offset(&self, p: usize, q: usize, r: usize, s: usize) -> usize {
        ((p * self.n + q) * self.n + r) * self.n + s
    }

    #[inline]
    pub fn get(&self, p: usize, q: usize, r: usize, s: usize) -> f64 {
        self.data[self.offset(p, q, r, s)]
    }

    /// Writes `value` into all slots equivalent to `(pq|rs)`.
    pub fn set(&mut self, p: usize, q: usize, r: usize, s: usize, value: f64) {
        for (a, b, c, d) in orbit(p, q, r, s) {
            let k = self.offset(a, b, c, d);
            self.data[k] = value;
        }
    }

    /// Raw row-major storage, index `((p*n + q)*n + r)*n + s`.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Builds a tensor from row-major storage without symmetrizing.
    pub(crate) fn from_raw(n: usize, data: Vec<f64>) -> Self {
        assert_eq!(data.len(), n * n * n * n);
        Self { n, data }
    }

    /// Unique representatives `(p,q,r,s)` with `p ≥ q`, `r ≥ s` and
    /// compound index `pq ≥ rs`.
    pub fn canonical_indices(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> {
        canonical_indices(self.n)
    }

    /// Largest deviation from 8-fold symmetry over all stored slots.
    pub fn symmetry_violation(&self) -> f64 {
        let n = self.n;
        let mut worst = 0.0_f64;
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = self.get(p, q, r, s);
                        for (a, b, c, d) in orbit(p, q, r, s) {
                            worst = worst.max((v - self.get(a, b, c, d)).abs());
                        }
                    }
                }
            }
        }
        worst
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// The eight index permutations that leave a real `(pq|rs)` unchanged.
pub fn orbit(p: usize, q: usize, r: usize, s: usize) -> [(usize, usize, usize, usize); 8] {
    [
        (p, q, r, s),
        (q, p, r, s),
        (p, q, s, r),
        (q, p, s, r),
        (r, s, p, q),
        (s, r, p, q),
        (r, s, q, p),
        (s, r, q, p),
    ]
}

pub(crate) fn canonical_indices(n: usize) -> impl Iterator<Item = (usize, usize, usize, usize)> {
    (0..n).flat_map(move |p| {
        (0..=p).flat_map(move |q| {
            (0..=p).flat_map(move |r| {
                let s_max = if r == p { q } else { r };
                (0..=s_max).map(move |s| (p, q, r, s))
            })
        })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn canonical_indices_cover_each_orbit_once() {
        for n in 1..5 {
            let mut seen = std::collections::HashSet::new();
            for (p, q, r, s) in canonical_indices(n) {
                let rep = orbit(p, q, r, s).into_iter().max().unwrap();
                assert_eq!(rep, (p, q, r, s), "representative is the largest member");
                assert!(seen.insert(rep));
            }
            let npair = n * (n + 1) / 2;
            assert_eq!(seen.len(), npair * (npair + 1) / 2);
        }
    }

    #[test]
    fn set_fills_orbit() {
        let mut g = EriTensor::zeros(3);
        g.set(2, 0, 1, 1, 0.25);
        assert_eq!(g.get(1, 1, 0, 2), 0.25);
        assert_eq!(g.get(0, 2, 1, 1), 0.25);
        assert_eq!(g.symmetry_violation(), 0.0);
        assert_eq!(g.as_slice().iter().filter(|v| **v != 0.0).count(), 4);
    }
}
