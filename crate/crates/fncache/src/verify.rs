//! Randomized property suites with counterexample shrinking.

use fncache_core::combinat::{choose, subsets_of, UserSubset};
use fncache_core::decoder::{
    beta, beta_oracle, coefficient_identity, lemma1_check, reconstruct_missing,
    reconstruct_missing_xor, verify_delivery, SubfileCase,
};
use fncache_core::encoder::{build_message, build_plan};
use fncache_core::gf::Field;
use fncache_core::linalg::{DemandBasis, GfMatrix};
use fncache_core::placement::{generate_library, man_place, FileLibrary};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

pub const MAX_USERS: usize = 10;
pub const MAX_FILES: usize = 8;
const DEFAULT_FIELDS: [u32; 6] = [2, 3, 4, 5, 7, 8];

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Beta,
    Lemma1,
    #[value(name = "f2-equiv")]
    F2Equiv,
    Reconstruct,
    Decode,
    Identity,
    All,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Beta => "beta",
            Suite::Lemma1 => "lemma1",
            Suite::F2Equiv => "f2-equiv",
            Suite::Reconstruct => "reconstruct",
            Suite::Decode => "decode",
            Suite::Identity => "identity",
            Suite::All => "all",
        }
    }

    pub fn expand(self) -> Vec<Suite> {
        match self {
            Suite::All => vec![
                Suite::Beta,
                Suite::Lemma1,
                Suite::F2Equiv,
                Suite::Reconstruct,
                Suite::Decode,
                Suite::Identity,
            ],
            s => vec![s],
        }
    }

    fn binary_only(self) -> bool {
        matches!(self, Suite::Lemma1 | Suite::F2Equiv)
    }
}

/// Optional pins on the instance shape; unset fields are drawn per trial.
#[derive(Debug, Clone, Default)]
pub struct Shape {
    pub k: Option<usize>,
    pub n: Option<usize>,
    pub q: Option<u32>,
    pub t: Option<usize>,
}

impl Shape {
    pub fn validate(&self, suites: &[Suite]) -> Result<(), String> {
        if let Some(k) = self.k {
            if !(1..=MAX_USERS).contains(&k) {
                return Err(format!("--k must lie in 1..={MAX_USERS}"));
            }
        }
        if let Some(n) = self.n {
            if !(1..=MAX_FILES).contains(&n) {
                return Err(format!("--n must lie in 1..={MAX_FILES}"));
            }
        }
        if let Some(q) = self.q {
            Field::new(q as u64).map_err(|e| format!("--q: {e}"))?;
            if q != 2 && suites.iter().any(|s| s.binary_only()) {
                return Err("the lemma1 and f2-equiv suites run over GF(2) only".into());
            }
        }
        if let Some(t) = self.t {
            if t > self.k.unwrap_or(MAX_USERS) {
                return Err("--t must not exceed the number of users".into());
            }
        }
        Ok(())
    }
}

/// A concrete instance: field, demand rows and library parameters.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Instance {
    pub q: u32,
    pub k: usize,
    pub n: usize,
    pub t: usize,
    pub demand: Vec<Vec<u32>>,
    pub library_seed: u64,
}

impl Instance {
    fn draw(shape: &Shape, suite: Suite, rng: &mut ChaCha8Rng) -> Instance {
        let q = if suite.binary_only() {
            2
        } else {
            shape
                .q
                .unwrap_or_else(|| DEFAULT_FIELDS[rng.random_range(0..DEFAULT_FIELDS.len())])
        };
        let k = shape.k.unwrap_or_else(|| rng.random_range(1..=7));
        let n = shape.n.unwrap_or_else(|| rng.random_range(1..=4));
        let t = shape.t.unwrap_or_else(|| rng.random_range(0..=k)).min(k);
        let demand = (0..k)
            .map(|_| (0..n).map(|_| rng.random_range(0..q)).collect())
            .collect();
        Instance {
            q,
            k,
            n,
            t,
            demand,
            library_seed: rng.random(),
        }
    }

    fn field(&self) -> Field {
        Field::new(self.q as u64).expect("validated field")
    }

    fn matrix(&self) -> GfMatrix {
        GfMatrix::from_rows(&self.field(), &self.demand).expect("entries below q")
    }

    fn library(&self) -> FileLibrary {
        let b = choose(self.k, self.t) as usize;
        generate_library(&self.field(), self.n, b, self.k, self.t, self.library_seed)
            .expect("valid library shape")
    }

    fn size(&self) -> (usize, usize, usize, usize, u64) {
        let nonzero = self.demand.iter().flatten().filter(|&&v| v != 0).count();
        let total = self.demand.iter().flatten().map(|&v| v as u64).sum();
        (self.k, self.n, self.t, nonzero, total)
    }

    fn shrink_candidates(&self) -> Vec<Instance> {
        let mut out = Vec::new();
        if self.k > 1 {
            for drop in 0..self.k {
                let mut c = self.clone();
                c.demand.remove(drop);
                c.k -= 1;
                c.t = c.t.min(c.k);
                out.push(c);
            }
        }
        if self.n > 1 {
            for col in 0..self.n {
                let mut c = self.clone();
                for row in &mut c.demand {
                    row.remove(col);
                }
                c.n -= 1;
                out.push(c);
            }
        }
        if self.t > 0 {
            let mut c = self.clone();
            c.t -= 1;
            out.push(c);
        }
        for r in 0..self.k {
            for col in 0..self.n {
                let v = self.demand[r][col];
                for smaller in [0, 1] {
                    if smaller < v {
                        let mut c = self.clone();
                        c.demand[r][col] = smaller;
                        out.push(c);
                    }
                }
            }
        }
        out
    }
}

fn nonleader_sets(basis: &DemandBasis, size: usize) -> impl Iterator<Item = UserSubset> {
    let others = UserSubset::full(basis.users()).difference(basis.leaders().as_subset());
    subsets_of(others, size)
}

fn basis_of(inst: &Instance) -> Result<DemandBasis, String> {
    DemandBasis::new(inst.matrix()).map_err(|e| e.to_string())
}

/// Runs one suite on one instance; returns the number of checks performed
/// or a description of the first violated check.
pub fn check(suite: Suite, inst: &Instance) -> Result<u64, String> {
    let mut checks = 0u64;
    match suite {
        Suite::Beta => {
            let basis = basis_of(inst)?;
            for a in nonleader_sets(&basis, inst.t + 1) {
                let ground = a.union(basis.leaders().as_subset());
                for s in subsets_of(ground, inst.t + 1).filter(|&s| s != a) {
                    let det = beta(&basis, a, s).map_err(|e| e.to_string())?;
                    let perm = beta_oracle(&basis, a, s).map_err(|e| e.to_string())?;
                    checks += 1;
                    if det != perm {
                        return Err(format!(
                            "beta(A={a}, S={s}) = {} by determinant but {} by permutation expansion",
                            det.value(),
                            perm.value()
                        ));
                    }
                }
            }
        }
        Suite::Lemma1 => {
            let basis = basis_of(inst)?;
            for a in nonleader_sets(&basis, inst.t + 1) {
                let b = a.union(basis.leaders().as_subset());
                for w in subsets_of(b, inst.t) {
                    for file in 0..inst.n {
                        let r = lemma1_check(b, &basis, file, w).map_err(|e| e.to_string())?;
                        checks += 1;
                        if !r.even {
                            return Err(format!(
                                "subfile F_{},{w} appears {} times in the family of B={b}",
                                file + 1,
                                r.count
                            ));
                        }
                    }
                }
            }
        }
        Suite::F2Equiv | Suite::Reconstruct => {
            let lib = inst.library();
            let plan = build_plan(&lib, inst.matrix()).map_err(|e| e.to_string())?;
            for a in nonleader_sets(plan.basis(), inst.t + 1) {
                let beta_path = reconstruct_missing(&plan, a).map_err(|e| e.to_string())?;
                let other = if suite == Suite::F2Equiv {
                    reconstruct_missing_xor(&plan, a).map_err(|e| e.to_string())?
                } else {
                    build_message(&lib, plan.basis(), inst.t, a).map_err(|e| e.to_string())?
                };
                checks += 1;
                if beta_path != other {
                    let what = if suite == Suite::F2Equiv {
                        "XOR path"
                    } else {
                        "direct encoding"
                    };
                    return Err(format!("reconstructed W_{a} differs from the {what}"));
                }
            }
        }
        Suite::Decode => {
            let lib = inst.library();
            let d = inst.matrix();
            let r = d.rank();
            let plan = build_plan(&lib, d).map_err(|e| e.to_string())?;
            let expected = choose(inst.k, inst.t + 1) - choose(inst.k - r, inst.t + 1);
            checks += 1;
            if plan.messages().len() as u128 != expected {
                return Err(format!(
                    "{} messages sent, expected {expected}",
                    plan.messages().len()
                ));
            }
            let report =
                verify_delivery(&lib, &plan, &man_place(&lib)).map_err(|e| e.to_string())?;
            for u in &report.users {
                checks += 1;
                if !u.matches {
                    return Err(format!("user {} decoded the wrong function", u.user));
                }
            }
            for res in &report.residuals {
                checks += 1;
                if !res.is_zero() {
                    return Err(format!(
                        "reconstruction residual for {} is nonzero",
                        res.subset
                    ));
                }
            }
        }
        Suite::Identity => {
            let basis = basis_of(inst)?;
            for a in nonleader_sets(&basis, inst.t + 1) {
                for c in coefficient_identity(&basis, a).map_err(|e| e.to_string())? {
                    checks += 1;
                    if c.lhs != c.rhs || (c.case != SubfileCase::NoLeader && !c.rhs.is_zero()) {
                        return Err(format!(
                            "coefficient of transformed subfile {} on window {} ({:?}) is {} but should be {}",
                            c.leader_index + 1,
                            c.window,
                            c.case,
                            c.lhs.value(),
                            c.rhs.value()
                        ));
                    }
                }
            }
        }
        Suite::All => unreachable!("expanded before checking"),
    }
    Ok(checks)
}

/// Greedily applies size-reducing edits while the suite still fails.
pub fn shrink(suite: Suite, failing: Instance) -> (Instance, String) {
    let mut current = failing;
    let mut reason = check(suite, &current).err().unwrap_or_default();
    loop {
        let next = current
            .shrink_candidates()
            .into_iter()
            .filter(|c| c.size() < current.size())
            .find_map(|c| check(suite, &c).err().map(|r| (c, r)));
        match next {
            Some((c, r)) => {
                current = c;
                reason = r;
            }
            None => return (current, reason),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Counterexample {
    pub instance: Instance,
    pub reason: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SuiteResult {
    pub suite: &'static str,
    pub trials: usize,
    pub checks: u64,
    pub failures: usize,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Counterexample>,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifySummary {
    pub seed: u64,
    pub passed: bool,
    pub suites: Vec<SuiteResult>,
}

/// Runs `trials` random instances per suite. Each suite draws from its own
/// ChaCha8 stream so adding suites does not perturb the others.
pub fn run_suites(suite: Suite, shape: &Shape, trials: usize, seed: u64) -> VerifySummary {
    let mut results = Vec::new();
    for (idx, s) in suite.expand().into_iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(idx as u64 + 1);
        let mut checks = 0;
        let mut failures = Vec::new();
        for _ in 0..trials {
            let inst = Instance::draw(shape, s, &mut rng);
            match check(s, &inst) {
                Ok(c) => checks += c,
                Err(_) => failures.push(inst),
            }
        }
        let counterexample = failures
            .iter()
            .min_by_key(|i| i.size())
            .cloned()
            .map(|inst| {
                let (instance, reason) = shrink(s, inst);
                Counterexample { instance, reason }
            });
        results.push(SuiteResult {
            suite: s.name(),
            trials,
            checks,
            failures: failures.len(),
            passed: failures.is_empty(),
            counterexample,
        });
    }
    VerifySummary {
        seed,
        passed: results.iter().all(|r| r.passed),
        suites: results,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shrinking_reduces_a_synthetic_failure() {
        let inst = Instance {
            q: 3,
            k: 4,
            n: 3,
            t: 2,
            demand: vec![vec![1, 2, 0], vec![2, 1, 1], vec![0, 0, 2], vec![1, 1, 1]],
            library_seed: 5,
        };
        for c in inst.shrink_candidates() {
            assert!(c.size() < inst.size());
            assert_eq!(c.demand.len(), c.k);
            assert!(c.demand.iter().all(|r| r.len() == c.n));
            assert!(c.t <= c.k);
        }
    }

    #[test]
    fn suites_pass_on_small_runs() {
        let summary = run_suites(Suite::All, &Shape::default(), 15, 3);
        assert!(summary.passed, "{summary:?}");
        assert_eq!(summary.suites.len(), 6);
        assert!(summary.suites.iter().all(|s| s.checks > 0));
    }

    #[test]
    fn shape_validation() {
        let mut s = Shape {
            q: Some(3),
            ..Shape::default()
        };
        assert!(s.validate(&[Suite::Beta]).is_ok());
        assert!(s.validate(&Suite::All.expand()).is_err());
        s.q = Some(6);
        assert!(s.validate(&[Suite::Beta]).is_err());
        let s = Shape {
            k: Some(3),
            t: Some(4),
            ..Shape::default()
        };
        assert!(s.validate(&[Suite::Decode]).is_err());
    }
}
