//! Dormand–Prince 5(4) with the fourth-order continuous extension, step-size
//! control, and event location on the dense output.

use crate::error::{DiveError, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub h_min: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, h_init: Some(1e-3), h_max: 0.1, h_min: 1e-14, max_steps: 2_000_000 }
    }
}

/// Continuous extension of one accepted step.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSegment<const N: usize> {
    pub t0: f64,
    pub h: f64,
    r: [[f64; N]; 5],
}

impl<const N: usize> DenseSegment<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn start(&self) -> [f64; N] {
        self.r[0]
    }

    pub fn end(&self) -> [f64; N] {
        std::array::from_fn(|i| self.r[0][i] + self.r[1][i])
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        if self.h == 0.0 {
            return self.r[0];
        }
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        std::array::from_fn(|i| {
            let r = &self.r;
            r[0][i] + th * (r[1][i] + th1 * (r[2][i] + th * (r[3][i] + th1 * r[4][i])))
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Crossing {
    Rising,
    Falling,
    Either,
}

/// Stop condition g(y) = 0 crossed in the given direction.
pub struct Event<G> {
    pub g: G,
    pub crossing: Crossing,
    /// Tolerance on the event time.
    pub t_tol: f64,
    /// A start state with |g| at or below this is already at the event.
    pub g_tol: f64,
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

fn comb<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    std::array::from_fn(|i| y[i] + h * terms.iter().map(|(c, k)| c * k[i]).sum::<f64>())
}

struct Trial<const N: usize> {
    y1: [f64; N],
    k7: [f64; N],
    err: f64,
    seg: DenseSegment<N>,
}

/// Adaptive integrator for dy/dt = f(y) (autonomous).
pub struct Dopri5<F, const N: usize> {
    f: F,
    opts: OdeOptions,
    t: f64,
    y: [f64; N],
    k1: [f64; N],
    h: f64,
    steps: usize,
}

impl<F, const N: usize> Dopri5<F, N>
where
    F: Fn(&[f64; N]) -> [f64; N],
{
    pub fn new(f: F, t0: f64, y0: [f64; N], opts: OdeOptions) -> Self {
        let k1 = f(&y0);
        let h = opts.h_init.unwrap_or_else(|| initial_step(&y0, &k1, &opts));
        Self { f, opts, t: t0, y: y0, k1, h, steps: 0 }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn y(&self) -> [f64; N] {
        self.y
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    fn trial(&self, h: f64) -> Trial<N> {
        let (y, k1, f) = (&self.y, &self.k1, &self.f);
        let k2 = f(&comb(y, h, &[(A21, k1)]));
        let k3 = f(&comb(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(&comb(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(&comb(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = f(&comb(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]));
        let y1 = comb(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(&y1);
        let mut acc = 0.0;
        for i in 0..N {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = self.opts.atol + self.opts.rtol * y[i].abs().max(y1[i].abs());
            acc += (e / sc).powi(2);
        }
        let err = (acc / N as f64).sqrt();
        let mut r = [[0.0; N]; 5];
        for i in 0..N {
            let ydiff = y1[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            r[0][i] = y[i];
            r[1][i] = ydiff;
            r[2][i] = bspl;
            r[3][i] = ydiff - h * k7[i] - bspl;
            r[4][i] = h * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        Trial { y1, k7, err, seg: DenseSegment { t0: self.t, h, r } }
    }

    /// Takes one accepted step, never past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseSegment<N>> {
        let remaining = t_limit - self.t;
        if !(remaining > 0.0) {
            return Err(DiveError::StepUnderflow { tau: self.t, h: remaining });
        }
        let mut h = self.h.min(self.opts.h_max);
        loop {
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            let tr = self.trial(h);
            if tr.err <= 1.0 {
                self.steps += 1;
                if self.steps > self.opts.max_steps {
                    return Err(DiveError::StepUnderflow { tau: self.t, h });
                }
                let fac = if tr.err == 0.0 { 5.0 } else { (0.9 * tr.err.powf(-0.2)).clamp(0.2, 5.0) };
                if !last || fac < 1.0 {
                    self.h = h * fac;
                }
                self.t = if last { t_limit } else { self.t + h };
                self.y = tr.y1;
                self.k1 = tr.k7;
                return Ok(tr.seg);
            }
            if !tr.err.is_finite() {
                h *= 0.1;
            } else {
                h *= (0.9 * tr.err.powf(-0.2)).clamp(0.1, 0.9);
            }
            if h < self.opts.h_min {
                return Err(DiveError::StepUnderflow { tau: self.t, h });
            }
        }
    }

    /// Single unchecked step of exactly `h` from the current state. Used to
    /// land on event times computed from the dense output of a longer,
    /// accepted step, so its local error is already bounded.
    fn exact_step(&mut self, h: f64) -> DenseSegment<N> {
        let tr = self.trial(h);
        self.t += h;
        self.y = tr.y1;
        self.k1 = tr.k7;
        tr.seg
    }

    /// Integrates to `t_end`, or to the first event crossing. Returns the
    /// dense segments and whether the event fired.
    pub fn advance<G>(&mut self, t_end: f64, event: Option<&Event<G>>) -> Result<(Vec<DenseSegment<N>>, bool)>
    where
        G: Fn(&[f64; N]) -> f64,
    {
        let mut segs = Vec::new();
        if let Some(ev) = event {
            let g0 = (ev.g)(&self.y);
            if g0.abs() <= ev.g_tol {
                return Ok((segs, true));
            }
        }
        while self.t < t_end {
            let (t_prev, y_prev, k_prev, h_prev) = (self.t, self.y, self.k1, self.h);
            let seg = self.step(t_end)?;
            if let Some(ev) = event {
                if let Some(t_ev) = locate(&seg, ev) {
                    self.t = t_prev;
                    self.y = y_prev;
                    self.k1 = k_prev;
                    let h = t_ev - t_prev;
                    if h > 0.0 {
                        segs.push(self.exact_step(h));
                    }
                    self.h = h_prev;
                    return Ok((segs, true));
                }
            }
            segs.push(seg);
        }
        Ok((segs, false))
    }
}

fn crossed(a: f64, b: f64, c: Crossing) -> bool {
    match c {
        Crossing::Rising => a < 0.0 && b >= 0.0,
        Crossing::Falling => a > 0.0 && b <= 0.0,
        Crossing::Either => (a < 0.0 && b >= 0.0) || (a > 0.0 && b <= 0.0),
    }
}

/// Event time inside a segment, by bisection on the dense output.
fn locate<G, const N: usize>(seg: &DenseSegment<N>, ev: &Event<G>) -> Option<f64>
where
    G: Fn(&[f64; N]) -> f64,
{
    // sub-sample so that two crossings within one long step are not missed
    const SUB: usize = 8;
    let mut a = seg.t0;
    let mut ga = (ev.g)(&seg.start());
    for j in 1..=SUB {
        let b = if j == SUB { seg.t1() } else { seg.t0 + seg.h * j as f64 / SUB as f64 };
        let gb = (ev.g)(&seg.eval(b));
        if crossed(ga, gb, ev.crossing) {
            let (mut lo, mut hi) = (a, b);
            let glo = ga;
            while hi - lo > ev.t_tol.max(4.0 * f64::EPSILON * hi.abs()) {
                let mid = 0.5 * (lo + hi);
                let gm = (ev.g)(&seg.eval(mid));
                if gm == 0.0 {
                    return Some(mid);
                }
                if gm.signum() == glo.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return Some(0.5 * (lo + hi));
        }
        a = b;
        ga = gb;
    }
    None
}

fn initial_step<const N: usize>(y: &[f64; N], f: &[f64; N], o: &OdeOptions) -> f64 {
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for i in 0..N {
        let sc = o.atol + o.rtol * y[i].abs();
        d0 += (y[i] / sc).powi(2);
        d1 += (f[i] / sc).powi(2);
    }
    let (d0, d1) = ((d0 / N as f64).sqrt(), (d1 / N as f64).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h.min(o.h_max).max(o.h_min)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oscillator(y: &[f64; 2]) -> [f64; 2] {
        [y[1], -y[0]]
    }

    #[test]
    fn harmonic_oscillator_period() {
        let mut s = Dopri5::new(oscillator, 0.0, [1.0, 0.0], OdeOptions::default());
        let two_pi = 2.0 * std::f64::consts::PI;
        let (_, fired) = s.advance::<fn(&[f64; 2]) -> f64>(two_pi, None).unwrap();
        assert!(!fired);
        assert_eq!(s.t(), two_pi);
        assert!((s.y()[0] - 1.0).abs() < 1e-9 && s.y()[1].abs() < 1e-9);
    }

    #[test]
    fn dense_output_tracks_solution() {
        let mut s = Dopri5::new(oscillator, 0.0, [1.0, 0.0], OdeOptions::default());
        let (segs, _) = s.advance::<fn(&[f64; 2]) -> f64>(3.0, None).unwrap();
        for seg in &segs {
            let t = seg.t0 + 0.37 * seg.h;
            assert!((seg.eval(t)[0] - t.cos()).abs() < 1e-8);
            assert_eq!(seg.eval(seg.t0), seg.start());
        }
    }

    #[test]
    fn event_at_quarter_period() {
        let mut s = Dopri5::new(oscillator, 0.0, [1.0, 0.0], OdeOptions::default());
        let ev = Event { g: |y: &[f64; 2]| y[0], crossing: Crossing::Falling, t_tol: 1e-14, g_tol: 1e-10 };
        let (_, fired) = s.advance(10.0, Some(&ev)).unwrap();
        assert!(fired);
        assert!((s.t() - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
        assert!(s.y()[0].abs() < 1e-10);
        let t_event = s.t();
        let (segs, again) = s.advance(t_event + 1.0, Some(&ev)).unwrap();
        assert!(again && segs.is_empty());
        assert_eq!(s.t(), t_event);
    }

    #[test]
    fn exponential_growth_relative_error() {
        let mut s = Dopri5::new(|y: &[f64; 1]| [y[0]], 0.0, [1.0], OdeOptions::default());
        s.advance::<fn(&[f64; 1]) -> f64>(10.0, None).unwrap();
        assert!((s.y()[0] / 10f64.exp() - 1.0).abs() < 1e-8);
    }
}
