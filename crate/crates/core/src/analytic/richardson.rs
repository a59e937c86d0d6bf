use crate::error::Result;

/// Limit of `d(h)` as `h -> 0` for `d(h) = L + c1 h + c2 h^2 + ...`,
/// sampled at `h0, h0/2, ...`. Returns the value and the gap between the two
/// most refined diagonal entries as an error estimate.
pub fn extrapolate(d: impl Fn(f64) -> Result<f64>, h0: f64, levels: usize) -> Result<(f64, f64)> {
    let levels = levels.max(2);
    let mut prev: Vec<f64> = Vec::with_capacity(levels);
    let mut best = (0.0, f64::INFINITY);
    let mut h = h0;
    for i in 0..levels {
        let mut row = Vec::with_capacity(i + 1);
        row.push(d(h)?);
        for k in 1..=i {
            let factor = (1u64 << k) as f64 - 1.0;
            let v = row[k - 1] + (row[k - 1] - prev[k - 1]) / factor;
            row.push(v);
        }
        if i > 0 {
            let err = (row[i] - prev[i - 1]).abs();
            if err < best.1 {
                best = (row[i], err);
            }
        }
        prev = row;
        h *= 0.5;
    }
    Ok(best)
}
