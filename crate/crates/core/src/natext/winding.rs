use num_complex::Complex64;

#[inline]
fn is_left(a: Complex64, b: Complex64, p: Complex64) -> f64 {
    (b.re - a.re) * (p.im - a.im) - (p.re - a.re) * (b.im - a.im)
}

/// Winding number of the closed polygon `poly` (last vertex joined to the
/// first) around `p`, by signed upward/downward edge crossings.
pub fn winding_number(poly: &[Complex64], p: Complex64) -> i32 {
    let n = poly.len();
    if n < 2 {
        return 0;
    }
    let mut wn = 0;
    for k in 0..n {
        let a = poly[k];
        let b = poly[(k + 1) % n];
        if a.im <= p.im {
            if b.im > p.im && is_left(a, b, p) > 0.0 {
                wn += 1;
            }
        } else if b.im <= p.im && is_left(a, b, p) < 0.0 {
            wn -= 1;
        }
    }
    wn
}
