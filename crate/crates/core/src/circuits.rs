//! Builders for the experiment circuits: thread superposition, random
//! injection, price-distribution loading, the LM rotation ladder, the PF
//! mixed-signal switch, strike shifting, and the Grover operator used for
//! amplitude estimation.

use crate::error::{Error, Result};
use crate::sim::{Circuit, GateOp};

pub const PRICE_BITS: usize = 5;
pub const PRICE_LEVELS: usize = 1 << PRICE_BITS;
/// Strike threshold hard-wired into the switch: prices with AB=11 are >= 24.
pub const STRIKE_BASE: u32 = 24;

/// Assignment of register roles to qubit indices. Qubit 0 is the
/// least-significant bit of the basis index; the price string ABCDE maps A to
/// the most-significant price bit (price x = 16A+8B+4C+2D+E).
#[derive(Debug, Clone)]
pub struct RegisterLayout {
    /// Price bits ordered A,B,C,D,E (A most significant).
    pub price_bits: Option<[usize; PRICE_BITS]>,
    /// Random bits ordered r1,r0 (r = 2*r1 + r0).
    pub rand_bits: Option<[usize; 2]>,
    pub lm_qubit: Option<usize>,
    pub pf_qubit: Option<usize>,
    /// Thread register bits, most significant first.
    pub thread_bits: Vec<usize>,
    /// Output bit carrying g(x) in the injection experiments.
    pub out_qubit: Option<usize>,
    pub n_qubits: usize,
}

impl RegisterLayout {
    /// Width-7 payoff layout: price E..A on qubits 0..4, LM on 5, PF on 6.
    pub fn payoff() -> Self {
        RegisterLayout {
            price_bits: Some([4, 3, 2, 1, 0]),
            rand_bits: None,
            lm_qubit: Some(5),
            pf_qubit: Some(6),
            thread_bits: Vec::new(),
            out_qubit: None,
            n_qubits: 7,
        }
    }

    /// Injection layout with `t` thread bits on qubits 0..t, the output bit
    /// next, and the two random bits on top.
    pub fn injection(t: usize) -> Self {
        let thread_bits = (0..t).rev().collect();
        RegisterLayout {
            price_bits: None,
            rand_bits: Some([t + 2, t + 1]),
            lm_qubit: None,
            pf_qubit: None,
            thread_bits,
            out_qubit: Some(t),
            n_qubits: t + 3,
        }
    }

    fn assigned(&self) -> Vec<usize> {
        let mut v = Vec::new();
        if let Some(p) = self.price_bits {
            v.extend(p);
        }
        if let Some(r) = self.rand_bits {
            v.extend(r);
        }
        v.extend(self.lm_qubit);
        v.extend(self.pf_qubit);
        v.extend(&self.thread_bits);
        v.extend(self.out_qubit);
        v
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = vec![false; self.n_qubits];
        for q in self.assigned() {
            if q >= self.n_qubits {
                return Err(Error::Layout(format!(
                    "qubit {q} outside width {}",
                    self.n_qubits
                )));
            }
            if seen[q] {
                return Err(Error::Layout(format!("qubit {q} assigned twice")));
            }
            seen[q] = true;
        }
        Ok(())
    }

    fn price(&self) -> Result<[usize; PRICE_BITS]> {
        self.price_bits
            .ok_or_else(|| Error::Layout("price bits not assigned".into()))
    }

    fn rand(&self) -> Result<[usize; 2]> {
        self.rand_bits
            .ok_or_else(|| Error::Layout("random bits not assigned".into()))
    }

    fn lm(&self) -> Result<usize> {
        self.lm_qubit
            .ok_or_else(|| Error::Layout("LM qubit not assigned".into()))
    }

    fn pf(&self) -> Result<usize> {
        self.pf_qubit
            .ok_or_else(|| Error::Layout("PF qubit not assigned".into()))
    }

    /// Price value encoded by basis index `i`.
    pub fn price_of_index(&self, i: usize) -> Result<u32> {
        let bits = self.price()?;
        let mut v = 0u32;
        for &q in &bits {
            v = (v << 1) | ((i >> q) & 1) as u32;
        }
        Ok(v)
    }

    /// Thread value encoded by basis index `i`.
    pub fn thread_of_index(&self, i: usize) -> u32 {
        let mut v = 0u32;
        for &q in &self.thread_bits {
            v = (v << 1) | ((i >> q) & 1) as u32;
        }
        v
    }
}

/// Probability mass over the 32 price levels.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceDistribution {
    probs: [f64; PRICE_LEVELS],
}

impl PriceDistribution {
    pub fn new(probs: [f64; PRICE_LEVELS]) -> Result<Self> {
        for (v, &p) in probs.iter().enumerate() {
            if p < 0.0 || !p.is_finite() {
                return Err(Error::Distribution(format!("negative mass {p} at price {v}")));
            }
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Distribution(format!("mass sums to {total}, not 1")));
        }
        Ok(PriceDistribution { probs })
    }

    pub fn probs(&self) -> &[f64; PRICE_LEVELS] {
        &self.probs
    }

    pub fn uniform() -> Self {
        PriceDistribution { probs: [1.0 / PRICE_LEVELS as f64; PRICE_LEVELS] }
    }

    /// Uniform over the 16 even prices; the default stand-in for the 16-of-32
    /// support seen in the reference experiments.
    pub fn even16() -> Self {
        let mut probs = [0.0; PRICE_LEVELS];
        for v in (0..PRICE_LEVELS).step_by(2) {
            probs[v] = 1.0 / 16.0;
        }
        PriceDistribution { probs }
    }

    pub fn point(v: usize) -> Result<Self> {
        if v >= PRICE_LEVELS {
            return Err(Error::Distribution(format!("price {v} out of range")));
        }
        let mut probs = [0.0; PRICE_LEVELS];
        probs[v] = 1.0;
        Ok(PriceDistribution { probs })
    }

    pub fn range(lo: usize, hi: usize) -> Result<Self> {
        if lo > hi || hi >= PRICE_LEVELS {
            return Err(Error::Distribution(format!("bad price range {lo}..={hi}")));
        }
        let mut probs = [0.0; PRICE_LEVELS];
        let w = 1.0 / (hi - lo + 1) as f64;
        for p in &mut probs[lo..=hi] {
            *p = w;
        }
        Ok(PriceDistribution { probs })
    }
}

/// Boolean function of the thread value, given as a truth table of 2^t bits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BooleanThreadFunction {
    table: Vec<bool>,
}

impl BooleanThreadFunction {
    pub fn new(table: Vec<bool>) -> Result<Self> {
        if !table.len().is_power_of_two() {
            return Err(Error::InvalidArgument(format!(
                "truth table length {} is not a power of two",
                table.len()
            )));
        }
        Ok(BooleanThreadFunction { table })
    }

    /// Table from the low bits of `mask`: thread v maps to bit v of `mask`.
    pub fn from_mask(t: usize, mask: u64) -> Self {
        let table = (0..1u64 << t).map(|v| (mask >> v) & 1 == 1).collect();
        BooleanThreadFunction { table }
    }

    pub fn constant(t: usize, value: bool) -> Self {
        BooleanThreadFunction { table: vec![value; 1 << t] }
    }

    pub fn thread_count(&self) -> usize {
        self.table.len().trailing_zeros() as usize
    }

    pub fn eval(&self, thread: usize) -> bool {
        self.table[thread]
    }

    /// Thread-uniform mean of f.
    pub fn mean(&self) -> f64 {
        self.table.iter().filter(|&&b| b).count() as f64 / self.table.len() as f64
    }
}

/// H on every thread bit: uniform superposition over 2^t threads.
pub fn build_thread_superposition(layout: &RegisterLayout, t: usize) -> Result<Circuit> {
    if t != layout.thread_bits.len() {
        return Err(Error::Layout(format!(
            "thread count {t} does not match layout ({} bits)",
            layout.thread_bits.len()
        )));
    }
    let mut c = Circuit::new(layout.n_qubits);
    for &q in &layout.thread_bits {
        c.push(GateOp::h(q));
    }
    Ok(c)
}

/// Writes f(thread) onto `out`: one multi-controlled X per thread value with
/// f(v)=1, with negative controls on the 0-bits of v.
pub fn build_thread_function(
    layout: &RegisterLayout,
    f: &BooleanThreadFunction,
    out: usize,
) -> Result<Circuit> {
    let t = layout.thread_bits.len();
    if f.thread_count() != t {
        return Err(Error::InvalidArgument(format!(
            "truth table is over {} bits, layout has {t} thread bits",
            f.thread_count()
        )));
    }
    if layout.thread_bits.contains(&out) {
        return Err(Error::Layout(format!("output qubit {out} is a thread bit")));
    }
    let mut c = Circuit::new(layout.n_qubits);
    for v in 0..1usize << t {
        if !f.eval(v) {
            continue;
        }
        let controls: Vec<(usize, bool)> = layout
            .thread_bits
            .iter()
            .enumerate()
            .map(|(j, &q)| (q, (v >> (t - 1 - j)) & 1 == 1))
            .collect();
        c.push(GateOp::x(out).with_controls(&controls));
    }
    Ok(c)
}

/// Random injection: H on both random bits, then X on `target` controlled on
/// r1=1 and r0=1. Flips the target with probability exactly 1/4 on every
/// branch.
pub fn build_random_injection(layout: &RegisterLayout, target: usize) -> Result<Circuit> {
    let [r1, r0] = layout.rand()?;
    if target == r1 || target == r0 {
        return Err(Error::Layout(format!("target {target} overlaps the random bits")));
    }
    let mut c = Circuit::new(layout.n_qubits);
    c.push(GateOp::h(r1));
    c.push(GateOp::h(r0));
    c.push(GateOp::x(target).with_controls(&[(r1, true), (r0, true)]));
    Ok(c)
}

/// Loads a price distribution onto the 5 price bits with the binary-tree
/// method: an RY on A splitting the total mass, then for each assigned prefix
/// a controlled RY on the next bit with the conditional mass split. Prefixes
/// with zero mass are skipped.
pub fn load_distribution(layout: &RegisterLayout, dist: &PriceDistribution) -> Result<Circuit> {
    let bits = layout.price()?;
    let mut c = Circuit::new(layout.n_qubits);
    for level in 0..PRICE_BITS {
        // prefix = values of bits A..(level-1)
        for prefix in 0..1usize << level {
            let lo_width = PRICE_BITS - level;
            let base = prefix << lo_width;
            let half = 1 << (lo_width - 1);
            let mass: f64 = dist.probs[base..base + (1 << lo_width)].iter().sum();
            if mass <= 0.0 {
                continue;
            }
            let mass_one: f64 = dist.probs[base + half..base + (1 << lo_width)].iter().sum();
            let frac = (mass_one / mass).clamp(0.0, 1.0);
            let y = frac.sqrt().asin();
            let controls: Vec<(usize, bool)> = (0..level)
                .map(|j| (bits[j], (prefix >> (level - 1 - j)) & 1 == 1))
                .collect();
            c.push(GateOp::ry(bits[level], 2.0 * y).with_controls(&controls));
        }
    }
    Ok(c)
}

/// Classical re-indexing that realizes strike K as the fixed-24 circuit:
/// probs'[v - delta] = probs[v].
pub fn shift_distribution(dist: &PriceDistribution, delta: i32) -> Result<PriceDistribution> {
    let mut probs = [0.0; PRICE_LEVELS];
    for (v, &p) in dist.probs().iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        let shifted = v as i32 - delta;
        if !(0..PRICE_LEVELS as i32).contains(&shifted) {
            return Err(Error::ShiftOutOfRange { delta });
        }
        probs[shifted as usize] = p;
    }
    Ok(PriceDistribution { probs })
}

fn rotation_ladder(
    layout: &RegisterLayout,
    target: usize,
    theta: f64,
    base: f64,
    extra_controls: &[(usize, bool)],
) -> Result<Circuit> {
    let bits = layout.price()?;
    let mut c = Circuit::new(layout.n_qubits);
    c.push(GateOp::ry(target, 2.0 * base).with_controls(extra_controls));
    // binary-weighted rotations on the low price bits C, D, E
    for (bit, weight) in [(bits[2], 4.0), (bits[3], 2.0), (bits[4], 1.0)] {
        let mut controls = extra_controls.to_vec();
        controls.push((bit, true));
        c.push(GateOp::ry(target, 2.0 * theta * weight).with_controls(&controls));
    }
    Ok(c)
}

/// LM rotation ladder: on a branch with low-bit value i = 4C+2D+E,
/// P(lm=1) = sin^2(base + i*theta).
pub fn build_lm_rotations(layout: &RegisterLayout, theta: f64, base: f64) -> Result<Circuit> {
    let lm = layout.lm()?;
    rotation_ladder(layout, lm, theta, base, &[])
}

/// The same ladder targeting the PF qubit, gated on the digital switch AB=11:
/// P(pf=1 | price v) = sin^2(base + (v-24)*theta) for v >= 24, else 0.
pub fn build_pf_switch(layout: &RegisterLayout, theta: f64, base: f64) -> Result<Circuit> {
    let pf = layout.pf()?;
    let bits = layout.price()?;
    let switch = [(bits[0], true), (bits[1], true)];
    rotation_ladder(layout, pf, theta, base, &switch)
}

/// Full payoff circuit: distribution loader, LM ladder, PF switch.
pub fn build_payoff_circuit(
    layout: &RegisterLayout,
    dist: &PriceDistribution,
    theta: f64,
    base: f64,
) -> Result<Circuit> {
    let mut c = load_distribution(layout, dist)?;
    c.extend(&build_lm_rotations(layout, theta, base)?);
    c.extend(&build_pf_switch(layout, theta, base)?);
    Ok(c)
}

/// Grover operator Q for the amplitude-amplification identity
/// P(good after prep . Q^k) = sin^2((2k+1) * asin(sqrt(a))), up to a global
/// phase. Built as S_good, prep^-1, S_0, prep where S_good flips the sign of
/// good=1 branches (Z via H.X.H) and S_0 flips the sign of the all-zeros
/// state (X-conjugated controlled-Z with negative controls).
pub fn build_grover_operator(prep: &Circuit, good_qubit: usize) -> Result<Circuit> {
    let n = prep.n_qubits;
    if good_qubit >= n {
        return Err(Error::IndexOutOfRange { index: good_qubit, n_qubits: n });
    }
    let mut q = Circuit::new(n);
    // S_good: Z on the good qubit
    q.push(GateOp::h(good_qubit));
    q.push(GateOp::x(good_qubit));
    q.push(GateOp::h(good_qubit));
    // prep^-1
    q.extend(&prep.inverse());
    // S_0: sign flip on |0...0>
    let zero_controls: Vec<(usize, bool)> = (1..n).map(|j| (j, false)).collect();
    q.push(GateOp::x(0));
    q.push(GateOp::h(0));
    q.push(GateOp::x(0).with_controls(&zero_controls));
    q.push(GateOp::h(0));
    q.push(GateOp::x(0));
    // prep
    q.extend(prep);
    Ok(q)
}
