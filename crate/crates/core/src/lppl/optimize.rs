//! Derivative-free simplex minimizer for the nonlinear triple.
//!
//! Plain Nelder-Mead with standard coefficients. Bounds are handled by the
//! objective returning `f64::INFINITY` outside the feasible box, which keeps
//! the simplex inside as long as the start point is feasible.

/// Simplex descent configuration and driver.
#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_iterations: usize,
    /// Stop once the simplex diameter (max coordinate spread) drops below
    /// this threshold.
    pub tolerance: f64,
    /// Initial displacement of each simplex vertex from the start point.
    pub initial_step: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-4,
            initial_step: 0.08,
        }
    }
}

const REFLECT: f64 = 1.0;
const EXPAND: f64 = 2.0;
const CONTRACT: f64 = 0.5;
const SHRINK: f64 = 0.5;

impl NelderMead {
    /// Minimize `f` from `x0`. Returns the best vertex, its value and the
    /// number of iterations used.
    pub fn minimize<F>(&self, mut f: F, x0: &[f64]) -> (Vec<f64>, f64, usize)
    where
        F: FnMut(&[f64]) -> f64,
    {
        let dim = x0.len();
        let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(dim + 1);
        simplex.push(x0.to_vec());
        for i in 0..dim {
            let mut v = x0.to_vec();
            // step toward the interior when close to the upper box edge
            if v[i] + self.initial_step > 1.0 {
                v[i] -= self.initial_step;
            } else {
                v[i] += self.initial_step;
            }
            simplex.push(v);
        }
        let mut values: Vec<f64> = simplex.iter().map(|v| sanitize(f(v))).collect();

        let mut iterations = 0;
        while iterations < self.max_iterations {
            let mut order: Vec<usize> = (0..=dim).collect();
            order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap());
            let best = order[0];
            let worst = order[dim];
            let second_worst = order[dim - 1];

            if simplex_diameter(&simplex, best) < self.tolerance {
                break;
            }
            iterations += 1;

            // centroid of all but the worst vertex
            let mut centroid = vec![0.0; dim];
            for (i, v) in simplex.iter().enumerate() {
                if i == worst {
                    continue;
                }
                for (c, x) in centroid.iter_mut().zip(v) {
                    *c += x;
                }
            }
            for c in centroid.iter_mut() {
                *c /= dim as f64;
            }

            let reflected = affine(&centroid, &simplex[worst], -REFLECT);
            let f_reflected = sanitize(f(&reflected));

            if f_reflected < values[best] {
                let expanded = affine(&centroid, &simplex[worst], -EXPAND);
                let f_expanded = sanitize(f(&expanded));
                if f_expanded < f_reflected {
                    simplex[worst] = expanded;
                    values[worst] = f_expanded;
                } else {
                    simplex[worst] = reflected;
                    values[worst] = f_reflected;
                }
            } else if f_reflected < values[second_worst] {
                simplex[worst] = reflected;
                values[worst] = f_reflected;
            } else {
                // contract toward the better of worst/reflected
                let (anchor, f_anchor) = if f_reflected < values[worst] {
                    (&reflected, f_reflected)
                } else {
                    (&simplex[worst], values[worst])
                };
                let contracted = blend(&centroid, anchor, CONTRACT);
                let f_contracted = sanitize(f(&contracted));
                if f_contracted < f_anchor {
                    simplex[worst] = contracted;
                    values[worst] = f_contracted;
                } else {
                    // shrink everything toward the best vertex
                    let best_vertex = simplex[best].clone();
                    for i in 0..=dim {
                        if i == best {
                            continue;
                        }
                        simplex[i] = blend(&best_vertex, &simplex[i], SHRINK);
                        values[i] = sanitize(f(&simplex[i]));
                    }
                }
            }
        }

        let mut best = 0;
        for i in 1..=dim {
            if values[i] < values[best] {
                best = i;
            }
        }
        (simplex[best].clone(), values[best], iterations)
    }
}

fn sanitize(v: f64) -> f64 {
    if v.is_nan() {
        f64::INFINITY
    } else {
        v
    }
}

/// `centroid + coeff * (vertex - centroid)`.
fn affine(centroid: &[f64], vertex: &[f64], coeff: f64) -> Vec<f64> {
    centroid
        .iter()
        .zip(vertex)
        .map(|(c, v)| c + coeff * (v - c))
        .collect()
}

/// `anchor + t * (other - anchor)`.
fn blend(anchor: &[f64], other: &[f64], t: f64) -> Vec<f64> {
    anchor
        .iter()
        .zip(other)
        .map(|(a, o)| a + t * (o - a))
        .collect()
}

fn simplex_diameter(simplex: &[Vec<f64>], best: usize) -> f64 {
    let mut d = 0.0f64;
    for v in simplex {
        for (a, b) in v.iter().zip(&simplex[best]) {
            d = d.max((a - b).abs());
        }
    }
    d
}
