use crate::{Error, Real, Result};

/// A real function sampled on strictly increasing nodes together with its
/// first derivative.
///
/// Between nodes the trace is evaluated with the cubic Hermite interpolant
/// built from the two bracketing values and derivatives. Derivatives are
/// stored one-sided so that a trace can carry a kink at a breakpoint of the
/// underlying equation (for example the edge of a square well): the interval
/// `[x_i, x_{i+1}]` uses the right-sided derivative at `x_i` and the
/// left-sided derivative at `x_{i+1}`. Away from breakpoints both sides agree.
///
/// When exact second derivatives are attached (solutions of second-order
/// equations), evaluation switches to the quintic Hermite interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct Trace<T> {
    nodes: Vec<T>,
    values: Vec<T>,
    derivs: Vec<T>,
    derivs_left: Vec<T>,
    seconds: Option<(Vec<T>, Vec<T>)>,
}

/// Second-derivative estimate from [`Trace::second_derivative`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SecondDerivative<T> {
    pub value: T,
    /// Difference from the lower-order centred estimate built from
    /// derivatives alone; a conservative bound on the stencil error.
    pub error_estimate: T,
}

impl<T: Real> Trace<T> {
    pub fn new(nodes: Vec<T>, values: Vec<T>, derivs: Vec<T>) -> Result<Self> {
        let derivs_left = derivs.clone();
        Self::with_one_sided(nodes, values, derivs, derivs_left)
    }

    /// Builds a trace whose derivative may differ on either side of a node.
    pub fn with_one_sided(
        nodes: Vec<T>,
        values: Vec<T>,
        derivs_right: Vec<T>,
        derivs_left: Vec<T>,
    ) -> Result<Self> {
        let n = nodes.len();
        if n < 2 {
            return Err(Error::InvalidArgument("trace needs at least two nodes".into()));
        }
        if values.len() != n || derivs_right.len() != n || derivs_left.len() != n {
            return Err(Error::InvalidArgument(format!(
                "trace arrays differ in length: {} nodes, {} values, {}/{} derivatives",
                n,
                values.len(),
                derivs_right.len(),
                derivs_left.len()
            )));
        }
        if nodes.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidArgument("trace nodes must be strictly increasing".into()));
        }
        Ok(Self { nodes, values, derivs: derivs_right, derivs_left, seconds: None })
    }

    /// Attaches one-sided second derivatives.
    pub fn with_seconds(mut self, right: Vec<T>, left: Vec<T>) -> Result<Self> {
        if right.len() != self.nodes.len() || left.len() != self.nodes.len() {
            return Err(Error::InvalidArgument("second-derivative arrays differ in length from nodes".into()));
        }
        self.seconds = Some((right, left));
        Ok(self)
    }

    pub fn has_seconds(&self) -> bool {
        self.seconds.is_some()
    }

    /// Right- and left-sided second derivatives, when attached.
    pub fn seconds(&self) -> Option<(&[T], &[T])> {
        self.seconds.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    /// Midpoints of every interval.
    pub fn midpoints(&self) -> Vec<T> {
        let half = T::lit(0.5);
        self.nodes.windows(2).map(|w| half * (w[0] + w[1])).collect()
    }

    /// Value, first and second derivative from the quintic Hermite
    /// interpolant on the bracketing interval; requires attached second
    /// derivatives.
    pub fn eval_full(&self, r: T) -> Result<(T, T, T)> {
        let r = self.check_range(r)?;
        let (right, left) = self
            .seconds
            .as_ref()
            .ok_or_else(|| Error::InvalidArgument("trace carries no second derivatives".into()))?;
        let i = self.interval(r);
        Ok(quintic_interval(
            self.nodes[i],
            self.nodes[i + 1],
            [self.values[i], self.derivs[i], right[i]],
            [self.values[i + 1], self.derivs_left[i + 1], left[i + 1]],
            r,
        ))
    }

    /// Samples an analytic function `r -> (value, derivative)` on `nodes`.
    pub fn from_fn(nodes: Vec<T>, f: impl Fn(T) -> (T, T)) -> Result<Self> {
        let (values, derivs) = nodes.iter().map(|&r| f(r)).unzip();
        Self::new(nodes, values, derivs)
    }

    /// Uniform grid of `n` nodes on `[a, b]`.
    pub fn uniform_nodes(a: T, b: T, n: usize) -> Vec<T> {
        let last = T::from_usize(n - 1).unwrap();
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    b
                } else {
                    a + (b - a) * T::from_usize(i).unwrap() / last
                }
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[T] {
        &self.nodes
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    /// Right-sided derivatives at the nodes.
    pub fn derivs(&self) -> &[T] {
        &self.derivs
    }

    pub fn derivs_left(&self) -> &[T] {
        &self.derivs_left
    }

    pub fn lo(&self) -> T {
        self.nodes[0]
    }

    pub fn hi(&self) -> T {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn first_value(&self) -> T {
        self.values[0]
    }

    pub fn last_value(&self) -> T {
        self.values[self.values.len() - 1]
    }

    /// `true` when the derivative is continuous at node `i`.
    pub fn is_smooth_at(&self, i: usize) -> bool {
        let (a, b) = (self.derivs[i], self.derivs_left[i]);
        (a - b).abs() <= T::lit(1e-9) * (T::one() + a.abs().max(b.abs()))
    }

    fn slack(&self, r: T) -> T {
        T::epsilon() * T::lit(64.0) * (T::one() + r.abs())
    }

    fn check_range(&self, r: T) -> Result<T> {
        let (lo, hi) = (self.lo(), self.hi());
        if r < lo - self.slack(lo) || r > hi + self.slack(hi) || r.is_nan() {
            return Err(Error::OutOfRange { r: r.as_f64(), lo: lo.as_f64(), hi: hi.as_f64() });
        }
        Ok(r.max(lo).min(hi))
    }

    /// Index `i` of the interval `[x_i, x_{i+1}]` containing `r`.
    fn interval(&self, r: T) -> usize {
        let p = self.nodes.partition_point(|&x| x <= r);
        p.saturating_sub(1).min(self.nodes.len() - 2)
    }

    fn hermite(&self, i: usize, r: T) -> (T, T) {
        let (x0, x1) = (self.nodes[i], self.nodes[i + 1]);
        let h = x1 - x0;
        let t = (r - x0) / h;
        let (y0, y1) = (self.values[i], self.values[i + 1]);
        let (m0, m1) = (self.derivs[i] * h, self.derivs_left[i + 1] * h);
        let two = T::lit(2.0);
        let three = T::lit(3.0);
        let t2 = t * t;
        let t3 = t2 * t;
        let h00 = two * t3 - three * t2 + T::one();
        let h10 = t3 - two * t2 + t;
        let h01 = -two * t3 + three * t2;
        let h11 = t3 - t2;
        let value = h00 * y0 + h10 * m0 + h01 * y1 + h11 * m1;
        let six = T::lit(6.0);
        let d00 = six * t2 - six * t;
        let d10 = three * t2 - T::lit(4.0) * t + T::one();
        let d01 = -d00;
        let d11 = three * t2 - two * t;
        let deriv = (d00 * y0 + d10 * m0 + d01 * y1 + d11 * m1) / h;
        (value, deriv)
    }

    /// Value and derivative at `r` (cubic Hermite between nodes).
    pub fn eval_with_deriv(&self, r: T) -> Result<(T, T)> {
        let r = self.check_range(r)?;
        Ok(self.eval_clamped(r))
    }

    pub fn eval(&self, r: T) -> Result<T> {
        self.eval_with_deriv(r).map(|(v, _)| v)
    }

    /// Like [`Trace::eval_with_deriv`] but clamps `r` into the sampled range.
    /// Used inside ODE right-hand sides, which cannot report errors.
    pub fn eval_clamped(&self, r: T) -> (T, T) {
        let r = r.max(self.lo()).min(self.hi());
        let i = self.interval(r);
        if r == self.nodes[i] {
            return (self.values[i], self.derivs[i]);
        }
        if r == self.nodes[i + 1] {
            return (self.values[i + 1], self.derivs_left[i + 1]);
        }
        if let Some((right, left)) = &self.seconds {
            let (v, d, _) = quintic_interval(
                self.nodes[i],
                self.nodes[i + 1],
                [self.values[i], self.derivs[i], right[i]],
                [self.values[i + 1], self.derivs_left[i + 1], left[i + 1]],
                r,
            );
            return (v, d);
        }
        self.hermite(i, r)
    }

    /// Central estimate of the second derivative at `r`.
    ///
    /// Fits the quintic Hermite polynomial through value and derivative at
    /// the three nodes surrounding `r` and differentiates it twice. On a
    /// uniform grid at a node this is
    /// `2(f₊ − 2f + f₋)/h² − (f'₊ − f'₋)/(2h)`, accurate to `O(h⁴)`.
    pub fn second_derivative(&self, r: T) -> Result<SecondDerivative<T>> {
        let r = self.check_range(r)?;
        let n = self.nodes.len();
        if n < 3 {
            return Err(Error::OutOfRange {
                r: r.as_f64(),
                lo: self.lo().as_f64(),
                hi: self.hi().as_f64(),
            });
        }
        let i = self.interval(r);
        // centre node of the three-point stencil
        let c = if r == self.nodes[i] {
            i
        } else if r - self.nodes[i] < self.nodes[i + 1] - r {
            i
        } else {
            i + 1
        };
        if c == 0 || c == n - 1 {
            return Err(Error::OutOfRange {
                r: r.as_f64(),
                lo: self.nodes[1].as_f64(),
                hi: self.nodes[n - 2].as_f64(),
            });
        }
        let xs = [self.nodes[c - 1], self.nodes[c], self.nodes[c + 1]];
        let fs = [self.values[c - 1], self.values[c], self.values[c + 1]];
        let ds = [self.derivs[c - 1], self.derivs[c], self.derivs_left[c + 1]];
        let value = quintic_hermite_second(&xs, &fs, &ds, r);
        Ok(SecondDerivative { value, error_estimate: self.stencil_error(c, r, value) })
    }

    /// Error of the three-node estimate at `r`: Richardson comparison with the
    /// five-node-wide stencil (both `O(h⁴)`). Near the ends, where that does
    /// not fit, the distance to the stencil shifted by one node.
    fn stencil_error(&self, c: usize, r: T, narrow: T) -> T {
        let n = self.nodes.len();
        let quintic = |i: usize, j: usize, l: usize| {
            let xs = [self.nodes[i], self.nodes[j], self.nodes[l]];
            let fs = [self.values[i], self.values[j], self.values[l]];
            let ds = [self.derivs[i], self.derivs[j], self.derivs_left[l]];
            quintic_hermite_second(&xs, &fs, &ds, r)
        };
        if c >= 2 && c + 2 < n {
            let ratio = ((self.nodes[c + 2] - self.nodes[c - 2]) / (self.nodes[c + 1] - self.nodes[c - 1])).powi(4);
            if ratio > T::lit(1.5) {
                return (narrow - quintic(c - 2, c, c + 2)).abs() / (ratio - T::one());
            }
        }
        if c + 2 < n {
            return (narrow - quintic(c, c + 1, c + 2)).abs();
        }
        if c >= 2 {
            return (narrow - quintic(c - 2, c - 1, c)).abs();
        }
        let low = (self.derivs_left[c + 1] - self.derivs[c - 1]) / (self.nodes[c + 1] - self.nodes[c - 1]);
        (narrow - low).abs()
    }

    /// Resamples onto new nodes through the Hermite interpolant.
    pub fn resample(&self, nodes: &[T]) -> Result<Trace<T>> {
        let mut values = Vec::with_capacity(nodes.len());
        let mut derivs = Vec::with_capacity(nodes.len());
        for &r in nodes {
            let (v, d) = self.eval_with_deriv(r)?;
            values.push(v);
            derivs.push(d);
        }
        Trace::new(nodes.to_vec(), values, derivs)
    }

    /// Largest absolute value over the nodes.
    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Scales values and derivatives by a constant.
    pub fn scaled(&self, c: T) -> Trace<T> {
        Trace {
            nodes: self.nodes.clone(),
            values: self.values.iter().map(|&v| v * c).collect(),
            derivs: self.derivs.iter().map(|&v| v * c).collect(),
            derivs_left: self.derivs_left.iter().map(|&v| v * c).collect(),
            seconds: self
                .seconds
                .as_ref()
                .map(|(a, b)| (a.iter().map(|&v| v * c).collect(), b.iter().map(|&v| v * c).collect())),
        }
    }
}

/// Largest `|f(r, value, second_derivative)|` over interior nodes, using the
/// three-node stencil. Nodes whose stencil straddles a point of `skip` or a
/// derivative jump are left out.
pub fn max_node_residual<T: Real>(trace: &Trace<T>, skip: &[T], f: impl Fn(T, T, T) -> T) -> T {
    let mut worst = T::zero();
    for res in node_residuals(trace, skip, f).into_iter().flatten() {
        if res.is_nan() {
            return res;
        }
        worst = worst.max(res);
    }
    worst
}

/// `|f(r, u, u'')|` at each node, `None` where no three-node stencil applies
/// (ends, and stencils straddling a point of `skip` or a derivative jump).
pub fn node_residuals<T: Real>(trace: &Trace<T>, skip: &[T], f: impl Fn(T, T, T) -> T) -> Vec<Option<T>> {
    let n = trace.len();
    let mut out = vec![None; n];
    for c in 1..n.saturating_sub(1) {
        let (lo, hi) = (trace.nodes[c - 1], trace.nodes[c + 1]);
        if skip.iter().any(|&s| s > lo && s < hi) || !trace.is_smooth_at(c) {
            continue;
        }
        let r = trace.nodes[c];
        if let Ok(d2) = trace.second_derivative(r) {
            out[c] = Some(f(r, trace.values[c], d2.value).abs());
        }
    }
    out
}

/// Sorted union of two node sets, dropping near-duplicates.
pub fn union_nodes<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    let mut all: Vec<T> = a.iter().chain(b.iter()).copied().collect();
    all.sort_by(|x, y| x.partial_cmp(y).expect("finite nodes"));
    let mut out: Vec<T> = Vec::with_capacity(all.len());
    for x in all {
        match out.last() {
            Some(&last) if (x - last).abs() <= T::epsilon() * T::lit(16.0) * (T::one() + x.abs()) => {}
            _ => out.push(x),
        }
    }
    out
}

/// Quintic Hermite on `[x0, x1]` from `(f, f', f'')` at both ends;
/// returns `(p, p', p'')` at `r`.
pub(crate) fn quintic_interval<T: Real>(x0: T, x1: T, a: [T; 3], b: [T; 3], r: T) -> (T, T, T) {
    let h = x1 - x0;
    let t = (r - x0) / h;
    let two = T::lit(2.0);
    let half = T::lit(0.5);
    // p(t) = Σ c_k t^k with p, p', p'' matched at t = 0 and t = 1
    let (y0, d0, s0) = (a[0], a[1] * h, a[2] * h * h);
    let (y1, d1, s1) = (b[0], b[1] * h, b[2] * h * h);
    let c0 = y0;
    let c1 = d0;
    let c2 = half * s0;
    let e0 = y1 - (c0 + c1 + c2);
    let e1 = d1 - (c1 + two * c2);
    let e2 = s1 - two * c2;
    // solve for c3, c4, c5 from the end conditions
    let c3 = T::lit(10.0) * e0 - T::lit(4.0) * e1 + half * e2;
    let c4 = -T::lit(15.0) * e0 + T::lit(7.0) * e1 - e2;
    let c5 = T::lit(6.0) * e0 - T::lit(3.0) * e1 + half * e2;
    let c = [c0, c1, c2, c3, c4, c5];
    let (mut p, mut dp, mut ddp) = (c[5], T::zero(), T::zero());
    for k in (0..5).rev() {
        ddp = ddp * t + two * dp;
        dp = dp * t + p;
        p = p * t + c[k];
    }
    (p, dp / h, ddp / (h * h))
}

/// Second derivative at `r` of the degree-5 polynomial matching value and
/// slope at three abscissae (Newton form over confluent nodes).
fn quintic_hermite_second<T: Real>(xs: &[T; 3], fs: &[T; 3], ds: &[T; 3], r: T) -> T {
    let z = [xs[0], xs[0], xs[1], xs[1], xs[2], xs[2]];
    let mut table = [fs[0], fs[0], fs[1], fs[1], fs[2], fs[2]];
    let mut coef = [T::zero(); 6];
    coef[0] = table[0];
    for k in 1..6 {
        for i in 0..6 - k {
            table[i] = if k == 1 && z[i + 1] == z[i] {
                ds[i / 2]
            } else {
                (table[i + 1] - table[i]) / (z[i + k] - z[i])
            };
        }
        coef[k] = table[0];
    }
    let (mut p, mut dp, mut ddp) = (coef[5], T::zero(), T::zero());
    for k in (0..5).rev() {
        let s = r - z[k];
        ddp = ddp * s + T::lit(2.0) * dp;
        dp = dp * s + p;
        p = p * s + coef[k];
    }
    ddp
}
