use crate::error::{Error, Result};

fn check_lengths(context: &'static str, n: usize, others: &[usize]) -> Result<()> {
    if let Some(&bad) = others.iter().find(|&&m| m != n) {
        return Err(Error::shape(context, n, bad));
    }
    Ok(())
}

fn check_positive(context: &str, v: &[f64]) -> Result<()> {
    if let Some(i) = v.iter().position(|x| !(*x > 0.0) || !x.is_finite()) {
        return Err(Error::Domain(format!("{context} at row {i} must be positive, got {}", v[i])));
    }
    Ok(())
}

/// Binary indexed tree of counts.
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick { tree: vec![0; n + 1] }
    }

    fn add(&mut self, i: usize) {
        let mut i = i + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Count of inserted ranks `< i`.
    fn prefix(&self, i: usize) -> u64 {
        let mut i = i;
        let mut s = 0;
        while i > 0 {
            s += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        s
    }
}

/// Fraction of admissible pairs (`t_j < t_i`, `delta_j = 1`) whose risks are
/// ordered `eta_j > eta_i`. Risk ties count as discordant. `None` when no
/// pair is admissible.
pub fn concordance_index(times: &[f64], events: &[bool], risk: &[f64]) -> Result<Option<f64>> {
    let n = times.len();
    check_lengths("concordance_index", n, &[events.len(), risk.len()])?;
    if times.iter().chain(risk).any(|v| v.is_nan()) {
        return Err(Error::Domain("concordance_index inputs contain NaN".into()));
    }
    let mut ranks: Vec<f64> = risk.to_vec();
    ranks.sort_by(f64::total_cmp);
    ranks.dedup();
    let rank_of = |v: f64| ranks.partition_point(|r| *r < v);

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| times[b].total_cmp(&times[a]));
    let mut tree = Fenwick::new(ranks.len());
    let (mut concordant, mut admissible) = (0u64, 0u64);
    let mut inserted = 0u64;
    let mut g = 0;
    while g < n {
        let mut end = g;
        while end < n && times[order[end]] == times[order[g]] {
            end += 1;
        }
        for &j in &order[g..end] {
            if events[j] {
                admissible += inserted;
                concordant += tree.prefix(rank_of(risk[j]));
            }
        }
        for &i in &order[g..end] {
            tree.add(rank_of(risk[i]));
            inserted += 1;
        }
        g = end;
    }
    Ok((admissible > 0).then(|| concordant as f64 / admissible as f64))
}

/// Mean relative deviation `|t_hat - t| / t_hat` over event rows.
pub fn rae_nc(times: &[f64], predicted: &[f64], events: &[bool]) -> Result<Option<f64>> {
    check_lengths("rae_nc", times.len(), &[predicted.len(), events.len()])?;
    check_positive("predicted time", predicted)?;
    let (mut num, mut den) = (0.0, 0usize);
    for ((t, p), e) in times.iter().zip(predicted).zip(events) {
        if *e {
            num += ((p - t) / p).abs();
            den += 1;
        }
    }
    Ok((den > 0).then(|| num / den as f64))
}

/// Relative deviation on censored rows, counting only predictions at or
/// below the censoring time.
pub fn rae_c(times: &[f64], predicted: &[f64], events: &[bool]) -> Result<Option<f64>> {
    check_lengths("rae_c", times.len(), &[predicted.len(), events.len()])?;
    check_positive("predicted time", predicted)?;
    let (mut num, mut den) = (0.0, 0usize);
    for ((t, p), e) in times.iter().zip(predicted).zip(events) {
        if !*e {
            if p <= t {
                num += ((p - t) / p).abs();
            }
            den += 1;
        }
    }
    Ok((den > 0).then(|| num / den as f64))
}

/// Through-origin least-squares slope of sorted observed event times on
/// sorted predicted times, over event rows. Ideal value 1.
pub fn calibration_slope(times: &[f64], predicted: &[f64], events: &[bool]) -> Result<Option<f64>> {
    check_lengths("calibration_slope", times.len(), &[predicted.len(), events.len()])?;
    check_positive("predicted time", predicted)?;
    let mut obs: Vec<f64> = Vec::new();
    let mut pred: Vec<f64> = Vec::new();
    for ((t, p), e) in times.iter().zip(predicted).zip(events) {
        if *e {
            obs.push(*t);
            pred.push(*p);
        }
    }
    if obs.len() < 2 {
        return Ok(None);
    }
    obs.sort_by(f64::total_cmp);
    pred.sort_by(f64::total_cmp);
    let num: f64 = pred.iter().zip(&obs).map(|(p, o)| p * o).sum();
    let den: f64 = pred.iter().map(|p| p * p).sum();
    Ok(Some(num / den))
}

/// Product-limit estimate as a right-continuous step function.
#[derive(Debug, Clone, PartialEq)]
pub struct KaplanMeier {
    /// Distinct event times, increasing.
    pub times: Vec<f64>,
    /// Survival just after each time.
    pub survival: Vec<f64>,
    pub at_risk: Vec<usize>,
    pub deaths: Vec<usize>,
}

impl KaplanMeier {
    /// `S(t)`; 1 before the first event.
    pub fn survival_at(&self, t: f64) -> f64 {
        let idx = self.times.partition_point(|x| *x <= t);
        if idx == 0 {
            1.0
        } else {
            self.survival[idx - 1]
        }
    }
}

pub fn kaplan_meier(times: &[f64], events: &[bool]) -> Result<KaplanMeier> {
    check_lengths("kaplan_meier", times.len(), &[events.len()])?;
    if times.is_empty() {
        return Err(Error::Domain("kaplan_meier needs at least one observation".into()));
    }
    if times.iter().any(|t| t.is_nan()) {
        return Err(Error::Domain("kaplan_meier times contain NaN".into()));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    let mut out = KaplanMeier {
        times: Vec::new(),
        survival: Vec::new(),
        at_risk: Vec::new(),
        deaths: Vec::new(),
    };
    let mut remaining = times.len();
    let mut s = 1.0;
    let mut g = 0;
    while g < order.len() {
        let t = times[order[g]];
        let mut end = g;
        let mut d = 0;
        while end < order.len() && times[order[end]] == t {
            if events[order[end]] {
                d += 1;
            }
            end += 1;
        }
        if d > 0 {
            s *= 1.0 - d as f64 / remaining as f64;
            out.times.push(t);
            out.survival.push(s);
            out.at_risk.push(remaining);
            out.deaths.push(d);
        }
        remaining -= end - g;
        g = end;
    }
    Ok(out)
}
