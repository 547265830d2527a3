/// Shortest round-trip text for a float, switching to exponent form for
/// very small or very large magnitudes.
pub fn fmt(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-4..1e15).contains(&a) || !a.is_finite() {
        x.to_string()
    } else {
        format!("{x:e}")
    }
}
