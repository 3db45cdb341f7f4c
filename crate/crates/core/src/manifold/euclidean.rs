use super::Coords;

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn exp(base: &[f64], v: &[f64]) -> Coords {
    base.iter().zip(v).map(|(b, d)| b + d).collect()
}

pub(crate) fn log(base: &[f64], target: &[f64]) -> Coords {
    base.iter().zip(target).map(|(b, t)| t - b).collect()
}

pub(crate) fn basis(n: usize) -> Vec<Coords> {
    (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect()
}
