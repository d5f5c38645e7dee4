use crate::fraction::Interval;

/// Relative gap `|b − b′| / max(b, b′)` below which the coincident-shift
/// formula is used.
pub const EQUAL_SHIFT_GAP: f64 = 1e-10;

/// `∫_lo^hi dx / ((x + b)(x + b′))` in closed form.
pub fn gram_entry(b: f64, b_prime: f64, interval: &Interval) -> f64 {
    let (lo, hi) = (interval.lo(), interval.hi());
    if (b - b_prime).abs() < EQUAL_SHIFT_GAP * b.max(b_prime) {
        let b = 0.5 * (b + b_prime);
        // 1/(lo+b) − 1/(hi+b) without cancellation
        return (hi - lo) / ((lo + b) * (hi + b));
    }
    let (b, bp) = if b < b_prime { (b, b_prime) } else { (b_prime, b) };
    let gap = bp - b;
    // ((hi+b)(lo+b′)) / ((lo+b)(hi+b′)) − 1, formed without cancellation
    let delta = (hi - lo) * gap / ((lo + b) * (hi + bp));
    delta.ln_1p() / gap
}
