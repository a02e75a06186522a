//! Building, validating and (de)serializing refined input series.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::curve::{ChainCurve, Component};
use crate::error::{Error, Result};
use crate::kernel::RefinedSeries;
use crate::matrix::{parse_rows, Matrix, Vector};
use crate::report::{CheckRecord, Report};
use crate::rng::{random_scalar, stream_rng};
use crate::scalar::Field;
use crate::subspace::{map_image, map_preimage, Subspace};
use crate::transfer::{extreme_path, PathStep, TransferTable};

/// Prescribed orders of V_X2 at A (b) and at B (b′). The sequences of V_X1
/// at A and V_X3 at B follow from refinedness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceSpec {
    pub d: usize,
    pub r: usize,
    pub b: Vec<usize>,
    pub bprime: Vec<usize>,
}

fn strictly_increasing_within(seq: &[usize], d: usize) -> bool {
    seq.windows(2).all(|w| w[0] < w[1]) && seq.iter().all(|&x| x <= d)
}

impl SequenceSpec {
    pub fn new(d: usize, b: Vec<usize>, bprime: Vec<usize>) -> Result<SequenceSpec> {
        if b.is_empty() {
            return Err(Error::InvalidInstance("empty vanishing sequence".into()));
        }
        let spec = SequenceSpec { d, r: b.len() - 1, b, bprime };
        spec.validate()?;
        Ok(spec)
    }

    /// The spec realized by span{t^{m_0}, …, t^{m_r}}.
    pub fn monomial(d: usize, exponents: &[usize]) -> Result<SequenceSpec> {
        let bprime = exponents.iter().rev().map(|&m| d.saturating_sub(m)).collect();
        SequenceSpec::new(d, exponents.to_vec(), bprime)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidInstance(msg));
        if self.d == 0 {
            return bad("d must be positive".into());
        }
        if self.b.len() != self.r + 1 || self.bprime.len() != self.r + 1 {
            return bad(format!("sequences must have r+1 = {} entries", self.r + 1));
        }
        if !strictly_increasing_within(&self.b, self.d) || !strictly_increasing_within(&self.bprime, self.d) {
            return bad(format!("sequences must increase strictly within 0..={}", self.d));
        }
        for j in 0..=self.r {
            for k in 0..=self.r - j {
                if self.b[j] + self.bprime[k] > self.d {
                    return bad(format!("b_{j} + b'_{k} = {} > d", self.b[j] + self.bprime[k]));
                }
            }
        }
        Ok(())
    }

    /// a_j = d − b_{r−j}.
    pub fn a(&self) -> Vec<usize> {
        (0..=self.r).map(|j| self.d - self.b[self.r - j]).collect()
    }

    /// c_k = d − b′_{r−k}.
    pub fn c(&self) -> Vec<usize> {
        (0..=self.r).map(|k| self.d - self.bprime[self.r - k]).collect()
    }
}

fn monomials(field: Field, d: usize, exps: &[usize]) -> Subspace {
    let rows = exps
        .iter()
        .map(|&e| {
            let mut v = vec![field.zero(); d + 1];
            v[e] = field.one();
            v
        })
        .collect();
    Subspace::span(field, d + 1, rows).expect("unit rows")
}

/// V_X2 = span{t^{m_j}}, V_X1 and V_X3 the monomial series with the
/// complementary orders.
pub fn monomial_instance(spec: &SequenceSpec, exponents: &[usize], field: Field) -> Result<RefinedSeries> {
    let derived = SequenceSpec::monomial(spec.d, exponents)?;
    if derived.b != spec.b || derived.bprime != spec.bprime {
        return Err(Error::InvalidInstance(format!(
            "exponents {exponents:?} realize b = {:?}, b' = {:?}, not the requested spec",
            derived.b, derived.bprime
        )));
    }
    let curve = ChainCurve::new(spec.d, field)?;
    let h = RefinedSeries::new(
        curve,
        monomials(field, spec.d, &spec.a()),
        monomials(field, spec.d, exponents),
        monomials(field, spec.d, &spec.c()),
    )?;
    require_valid(&h)?;
    Ok(h)
}

/// t^{low}·(1 + random terms) + t^{high}, with the random terms strictly
/// between low and high.
fn shaped_section<R: Rng>(field: Field, d: usize, low: usize, high: usize, rng: &mut R) -> Vector {
    let mut v = vec![field.zero(); d + 1];
    v[low] = field.one();
    for x in v.iter_mut().take(high).skip(low + 1) {
        *x = random_scalar(field, rng);
    }
    v[high] = field.one();
    v
}

/// A pairing σ with b_j + b′_{σ(j)} ≤ d, drawn at random with the
/// anti-diagonal pairing as fallback.
fn pairing<R: Rng>(spec: &SequenceSpec, rng: &mut R) -> Vec<usize> {
    let r = spec.r;
    let mut perm: Vec<usize> = (0..=r).collect();
    for _ in 0..32 {
        perm.shuffle(rng);
        if (0..=r).all(|j| spec.b[j] + spec.bprime[perm[j]] <= spec.d) {
            return perm;
        }
    }
    (0..=r).rev().collect()
}

const MAX_ATTEMPTS: u64 = 8;

/// A random refined series with the prescribed sequences.
pub fn random_refined(spec: &SequenceSpec, field: Field, seed: u64) -> Result<RefinedSeries> {
    spec.validate()?;
    let d = spec.d;
    let curve = ChainCurve::new(d, field)?;
    let mut last = String::new();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = stream_rng(seed, attempt);
        let sigma = pairing(spec, &mut rng);
        let v2 = (0..=spec.r)
            .map(|j| shaped_section(field, d, spec.b[j], d - spec.bprime[sigma[j]], &mut rng))
            .collect();
        let side = |orders: Vec<usize>, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<Vector> {
            orders
                .into_iter()
                .map(|o| {
                    let mut v = vec![field.zero(); d + 1];
                    v[o] = field.one();
                    for x in v.iter_mut().skip(o + 1) {
                        *x = random_scalar(field, rng);
                    }
                    v
                })
                .collect()
        };
        let v1 = side(spec.a(), &mut rng);
        let v3 = side(spec.c(), &mut rng);
        let built = RefinedSeries::new(
            curve,
            Subspace::span(field, d + 1, v1)?,
            Subspace::span(field, d + 1, v2)?,
            Subspace::span(field, d + 1, v3)?,
        );
        match built {
            Ok(h) if h.b() == spec.b && h.bprime() == spec.bprime && validate(&h).all_pass() => return Ok(h),
            Ok(h) => last = format!("got b = {:?}, b' = {:?}", h.b(), h.bprime()),
            Err(e) => last = e.to_string(),
        }
    }
    Err(Error::Unrealizable(format!("{spec:?} after {MAX_ATTEMPTS} attempts: {last}")))
}

/// A random realizable spec: b uniform among (r+1)-subsets of 0..=d, b′ by
/// rejection with the complementary sequence as fallback.
pub fn random_spec(d: usize, r: usize, seed: u64) -> Result<SequenceSpec> {
    if r > d {
        return Err(Error::InvalidInstance(format!("r = {r} exceeds d = {d}")));
    }
    let mut rng = stream_rng(seed, u64::MAX);
    let mut pool: Vec<usize> = (0..=d).collect();
    pool.shuffle(&mut rng);
    let mut b = pool[..=r].to_vec();
    b.sort_unstable();
    for _ in 0..64 {
        pool.shuffle(&mut rng);
        let mut bp = pool[..=r].to_vec();
        bp.sort_unstable();
        if let Ok(spec) = SequenceSpec::new(d, b.clone(), bp) {
            return Ok(spec);
        }
    }
    let bp = (0..=r).map(|k| d - b[r - k]).collect();
    SequenceSpec::new(d, b, bp)
}

/// A named corpus: the fixtures, a few monomial instances, then random
/// instances with d cycling through 2..=10 and r ≤ min(4, d) until `size`
/// entries are reached. Unrealizable draws are skipped.
pub fn corpus(size: usize, seed: u64, field: Field) -> Result<Vec<(String, RefinedSeries)>> {
    let mut out = vec![
        ("unique_d4".to_string(), fixtures::unique_d4(field)?),
        ("witness_d4".to_string(), fixtures::witness_d4(field)?),
        ("double_vanishing_d5".to_string(), fixtures::double_vanishing(5, &[2], field)?),
        ("double_vanishing_d6".to_string(), fixtures::double_vanishing(6, &[1, 4], field)?),
    ];
    for (d, exps) in [(4usize, &[1usize, 3][..]), (2, &[1]), (6, &[0, 2, 3, 6]), (8, &[0, 3, 5, 8])] {
        let spec = SequenceSpec::monomial(d, exps)?;
        out.push((format!("monomial_d{d}_{}", join(exps)), monomial_instance(&spec, exps, field)?));
    }
    let mut k = 0u64;
    while out.len() < size {
        let d = 2 + (k % 9) as usize;
        let r = (k / 9 % 5) as usize % (d.min(4) + 1);
        let s = seed.wrapping_add(k);
        k += 1;
        let spec = random_spec(d, r, s)?;
        if let Ok(h) = random_refined(&spec, field, s) {
            out.push((format!("random_d{d}_r{r}_s{s}"), h));
        }
    }
    Ok(out)
}

fn join(v: &[usize]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("-")
}

/// The extreme space at the multidegree concentrated on X_q.
fn extreme_space(table: &TransferTable, h: &RefinedSeries, q: Component) -> Result<Subspace> {
    let md = h.curve().extreme(q);
    map_preimage(&table.ambient(md.cell())?.alpha(q), h.v(q))
}

fn path_between(d: usize, from: Component, to: Component) -> ((usize, usize), Vec<PathStep>) {
    if let Some(p) = extreme_path(d, from, to) {
        return p;
    }
    let (start, mut first) = extreme_path(d, from, Component::X2).expect("boundary path");
    let (_, second) = extreme_path(d, Component::X2, to).expect("boundary path");
    first.extend(second);
    (start, first)
}

/// Dimensions, refinedness, and linking of the extreme spaces along the
/// boundary paths in both directions.
pub fn validate(h: &RefinedSeries) -> Report {
    let mut report = Report::new();
    let r = h.r();
    for q in Component::ALL {
        report.push(CheckRecord::new((0, 0), "series_dimension", h.v(q).dim() == r + 1).with("component", q.to_string()));
    }
    let violations = h.refinedness_violations();
    report.push(
        CheckRecord::new((0, 0), "refinedness", violations.is_empty()).with("violations", violations),
    );
    let d = h.d();
    let Ok(table) = TransferTable::new(h.curve()) else {
        report.push(CheckRecord::new((0, 0), "extreme_linking", false));
        return report;
    };
    let ext: Vec<Subspace> = Component::ALL
        .iter()
        .map(|&q| extreme_space(&table, h, q).expect("extreme cell"))
        .collect();
    for from in Component::ALL {
        for to in Component::ALL {
            if from == to {
                continue;
            }
            let (start, path) = path_between(d, from, to);
            let ok = table
                .composite(start, &path)
                .and_then(|m| map_image(&m, &ext[from.index() - 1]))
                .map(|img| img.is_subspace_of(&ext[to.index() - 1]))
                .unwrap_or(false);
            report.push(
                CheckRecord::new(start, "extreme_linking", ok)
                    .with("from", from.to_string())
                    .with("to", to.to_string()),
            );
        }
    }
    report
}

fn require_valid(h: &RefinedSeries) -> Result<()> {
    let report = validate(h);
    match report.failures().first() {
        None => Ok(()),
        Some(f) => Err(Error::InvalidInstance(format!("{} fails: {:?}", f.check, f.details))),
    }
}

/// The JSON instance schema.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InstanceFile {
    pub d: usize,
    pub r: usize,
    pub field: Field,
    #[serde(rename = "V_X1")]
    pub v_x1: Vec<Vec<String>>,
    #[serde(rename = "V_X2")]
    pub v_x2: Vec<Vec<String>>,
    #[serde(rename = "V_X3")]
    pub v_x3: Vec<Vec<String>>,
}

fn rows_of(m: &Matrix) -> Vec<Vec<String>> {
    m.rows().iter().map(|r| r.iter().map(ToString::to_string).collect()).collect()
}

impl InstanceFile {
    pub fn from_series(h: &RefinedSeries) -> InstanceFile {
        InstanceFile {
            d: h.d(),
            r: h.r(),
            field: h.curve().field(),
            v_x1: rows_of(h.v(Component::X1).basis()),
            v_x2: rows_of(h.v(Component::X2).basis()),
            v_x3: rows_of(h.v(Component::X3).basis()),
        }
    }

    /// Builds and validates the series. `field` overrides the file's field;
    /// prime fields must have p > d.
    pub fn to_series(&self, field: Option<Field>) -> Result<RefinedSeries> {
        let field = field.unwrap_or(self.field);
        if let Field::Prime(p) = field {
            Field::prime(p)?;
            if p as usize <= self.d {
                return Err(Error::InvalidField(format!("prime {p} must exceed d = {}", self.d)));
            }
        }
        let n = self.d + 1;
        let parse = |rows: &Vec<Vec<String>>, name: &str| -> Result<Subspace> {
            if rows.len() != self.r + 1 {
                return Err(Error::InvalidInstance(format!(
                    "{name} has {} rows, expected r+1 = {}",
                    rows.len(),
                    self.r + 1
                )));
            }
            Ok(Subspace::row_space(&parse_rows(field, n, rows)?))
        };
        let curve = ChainCurve::new(self.d, field)?;
        let h = RefinedSeries::new(
            curve,
            parse(&self.v_x1, "V_X1")?,
            parse(&self.v_x2, "V_X2")?,
            parse(&self.v_x3, "V_X3")?,
        )?;
        require_valid(&h)?;
        Ok(h)
    }
}

pub fn instance_to_json(h: &RefinedSeries) -> String {
    serde_json::to_string_pretty(&InstanceFile::from_series(h)).expect("instance serializes") + "\n"
}

pub fn load_instance(json: &str, field: Option<Field>) -> Result<RefinedSeries> {
    let file: InstanceFile = serde_json::from_str(json)?;
    file.to_series(field)
}

/// The engineered instances shipped with the test corpus.
pub mod fixtures {
    use super::*;

    fn poly(field: Field, d: usize, terms: &[(usize, i64)]) -> Vector {
        let mut v = vec![field.zero(); d + 1];
        for &(e, c) in terms {
            v[e] = field.from_i64(c);
        }
        v
    }

    /// d = 4, r = 1, V_X2 = span{1, t⁴}, monomial sides: unique extension.
    pub fn unique_d4(field: Field) -> Result<RefinedSeries> {
        monomial_instance(&SequenceSpec::monomial(4, &[0, 4])?, &[0, 4], field)
    }

    /// V_X2 = span{t^e : e ∈ inner} + ⟨1 + t^d⟩ with monomial sides. Not
    /// chain adaptable as soon as some inner exponent lies in 1..d.
    pub fn double_vanishing(d: usize, inner: &[usize], field: Field) -> Result<RefinedSeries> {
        let mut b: Vec<usize> = std::iter::once(0).chain(inner.iter().copied()).collect();
        b.sort_unstable();
        let bprime: Vec<usize> = std::iter::once(0).chain(inner.iter().rev().map(|&e| d - e)).collect();
        let spec = SequenceSpec::new(d, b, bprime)?;
        let mut rows: Vec<Vector> = inner.iter().map(|&e| poly(field, d, &[(e, 1)])).collect();
        rows.push(poly(field, d, &[(0, 1), (d, 1)]));
        let curve = ChainCurve::new(d, field)?;
        let h = RefinedSeries::new(
            curve,
            monomials(field, d, &spec.a()),
            Subspace::span(field, d + 1, rows)?,
            monomials(field, d, &spec.c()),
        )?;
        require_valid(&h)?;
        Ok(h)
    }

    /// d = 4, r = 1, V_X2 = span{t², 1 + t⁴}: witness cell (1, 1).
    pub fn witness_d4(field: Field) -> Result<RefinedSeries> {
        double_vanishing(4, &[2], field)
    }
}
