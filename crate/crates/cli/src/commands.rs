use bclab::class_group::{ClassGroup, ClassKind};
use bclab::hecke::{double_coset_decompose, AffineElement};
use bclab::induction::{balanced_product_suite, involution_suite, stages_suite, SuiteSummary};
use bclab::kms::{kms_eval, KmsPoint, LevelModel};
use bclab::parse::{parse_beta, parse_element, parse_function, parse_ideal, parse_suite, SuiteChecks};
use bclab::precision::{float_to_fixed, fixed_to_decimal, Beta, Float, FRAC_BITS};
use bclab::quad_field::QuadField;
use bclab::zeta::{dedekind_zeta, divergence_product, format_bound, induced_ratio, monotone_factor_check, partial_zetas};
use bclab::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::report::{Report, Table};

/// Settings shared by every command.
pub struct Config {
    pub field: QuadField,
    pub beta: Option<String>,
    pub cutoff: u64,
    pub modulus: u64,
    pub digits: usize,
    pub seed: u64,
}

impl Config {
    fn beta_or(&self, default: &str) -> Result<Beta> {
        parse_beta(self.beta.as_deref().unwrap_or(default))
    }

    /// Beta for a convergent series.
    fn beta_convergent(&self) -> Result<Beta> {
        let beta = self.beta_or("2")?;
        if !beta.gt_one() {
            return Err(Error::Validation(format!("the series diverges at beta = {beta}; need beta > 1")));
        }
        Ok(beta)
    }
}

fn float_decimal(x: &Float, digits: usize) -> String {
    fixed_to_decimal(&float_to_fixed(x, FRAC_BITS), digits)
}

pub fn field(cfg: &Config) -> Result<Report> {
    let k = cfg.field;
    let info = k.unit_info();
    let mut r = Report::new("field");
    r.set("field", k).set("d", k.d()).set("disc", k.disc()).set("degree", k.degree());
    r.set("real_embeddings", k.signature());
    if !k.is_rational() {
        r.set("omega", k.omega_symbol());
        r.set("omega_min_poly", format!("x^2 - ({})x + ({})", k.omega_trace(), k.omega_norm()));
    }
    r.set_opt("fundamental_unit", info.fundamental_unit.as_ref());
    r.set_opt("fundamental_unit_norm", info.fu_norm);
    r.set("torsion_order", info.torsion_order).set("index_plus", info.index_plus);
    r.set_opt("tp_unit_generator", k.tp_unit_generator());
    r.set("minkowski_bound", format!("{:.6}", k.minkowski_bound()));
    Ok(r)
}

pub fn classgroup(cfg: &Config) -> Result<Report> {
    let k = cfg.field;
    let mut r = Report::new("classgroup");
    r.set("field", k);
    let mut rows = Vec::new();
    for (kind, label) in [(ClassKind::Wide, "wide"), (ClassKind::Narrow, "narrow")] {
        let g = ClassGroup::build(k, kind)?;
        r.set(&format!("{label}_order"), g.order());
        r.set_list(&format!("{label}_invariants"), g.invariants());
        r.set_list(&format!("{label}_generators"), g.generators());
        for (i, rep) in g.representatives().iter().enumerate() {
            rows.push(vec![label.to_string(), i.to_string(), rep.to_string(), rep.norm().to_string(), g.element_order(i).to_string()]);
        }
    }
    r.table(Table { name: "classes", columns: vec!["group", "class", "representative", "norm", "order"], rows });
    Ok(r)
}

pub fn zeta(cfg: &Config) -> Result<Report> {
    let beta = cfg.beta_convergent()?;
    let z = dedekind_zeta(cfg.field, &beta, cfg.cutoff)?;
    let mut r = Report::new("zeta");
    r.set("field", cfg.field).set("beta", beta).set("cutoff", cfg.cutoff);
    r.set("value", z.to_decimal(cfg.digits)).set("tail_bound", z.tail_decimal());
    Ok(r)
}

pub fn partial_zeta(cfg: &Config, class: Option<usize>) -> Result<Report> {
    let beta = cfg.beta_convergent()?;
    let group = ClassGroup::narrow(cfg.field)?;
    if let Some(c) = class {
        if c >= group.order() {
            return Err(Error::Validation(format!("class {c} out of range; the narrow class group has order {}", group.order())));
        }
    }
    let parts = partial_zetas(&group, &beta, cfg.cutoff)?;
    let total: BigInt = parts.iter().map(|p| &p.raw).sum();
    let whole = dedekind_zeta(cfg.field, &beta, cfg.cutoff)?;
    let mut r = Report::new("partial-zeta");
    r.set("field", cfg.field).set("beta", &beta).set("cutoff", cfg.cutoff);
    r.set("narrow_class_number", group.order());
    let rows = parts
        .iter()
        .enumerate()
        .filter(|(i, _)| class.is_none_or(|c| c == *i))
        .map(|(i, p)| vec![i.to_string(), group.representatives()[i].to_string(), p.to_decimal(cfg.digits)])
        .collect();
    r.table(Table { name: "classes", columns: vec!["class", "representative", "value"], rows });
    r.set("sum", fixed_to_decimal(&total, cfg.digits));
    r.set("dedekind_zeta", whole.to_decimal(cfg.digits));
    r.set_bool("partition_identity", total == whole.raw);
    if total != whole.raw {
        r.fail("partial zetas do not sum to the Dedekind zeta");
    }
    Ok(r)
}

pub fn hecke_delta(cfg: &Config, y: &str, x: &str, reps: bool) -> Result<Report> {
    let k = cfg.field;
    let g = AffineElement::new(parse_element(k, y)?, parse_element(k, x)?)?;
    let dec = double_coset_decompose(&g)?;
    let formula = BigRational::one() / g.x().norm().abs();
    let mut r = Report::new("hecke-delta");
    r.set("field", k).set("g", &g);
    r.set("L", dec.l()).set("R", dec.r());
    r.set("delta", dec.delta()).set("norm_formula", &formula);
    r.set_bool("match", dec.delta() == formula);
    if reps {
        r.set_list("left_reps", &dec.left_reps);
        r.set_list("right_reps", &dec.right_reps);
    }
    if dec.delta() != formula {
        r.fail(format!("L/R = {} but 1/|N(x)| = {formula}", dec.delta()));
    }
    Ok(r)
}

pub fn kms(cfg: &Config, ideal: &str, omega: &str, function: &str) -> Result<Report> {
    let k = cfg.field;
    let beta = cfg.beta_or("2")?;
    let group = ClassGroup::narrow(k)?;
    let model = LevelModel::new(k, cfg.modulus)?;
    let x = KmsPoint::new(&group, &model, parse_ideal(k, ideal)?, parse_element(k, omega)?)?;
    let spec = parse_function(function)?;
    let f = spec.resolve(&model)?;
    let v = kms_eval(&model, &x, &f, &beta, cfg.cutoff)?;
    let mut r = Report::new("kms-eval");
    r.set("field", k).set("beta", &beta).set("cutoff", cfg.cutoff).set("modulus", cfg.modulus);
    r.set("model_points", model.len()).set("ideal", &x.g).set("omega", &x.omega).set("class", x.class);
    r.set("function", &f.name);
    let value = bclab::arith::format_decimal(v.value.numer(), v.value.denom(), cfg.digits);
    r.set("value", value).set("partition_function", fixed_to_decimal(&v.partition, cfg.digits));
    Ok(r)
}

pub fn induce_ratio(cfg: &Config) -> Result<Report> {
    let beta = cfg.beta_or("2")?;
    let ir = induced_ratio(cfg.field, &beta, cfg.cutoff)?;
    let mut r = Report::new("induce-ratio");
    r.set("field", cfg.field).set("beta", &beta).set("cutoff", cfg.cutoff);
    r.set("value", float_decimal(&ir.value, cfg.digits));
    r.set("lower", float_decimal(&ir.lower, cfg.digits)).set("upper", float_decimal(&ir.upper, cfg.digits));
    r.set("zeta_l", ir.zeta_l.to_decimal(cfg.digits)).set("zeta_l_tail", ir.zeta_l.tail_decimal());
    r.set("zeta_k", ir.zeta_k.to_decimal(cfg.digits)).set("zeta_k_tail", ir.zeta_k.tail_decimal());
    Ok(r)
}

pub fn divergence(cfg: &Config, prime_bound: u64) -> Result<Report> {
    let beta = cfg.beta_or("1")?;
    let rep = divergence_product(cfg.field, &beta, prime_bound)?;
    let mut r = Report::new("divergence");
    r.set("field", cfg.field).set("beta", &beta).set("prime_bound", prime_bound);
    let one = bclab::precision::fixed_one();
    let below_one: Vec<u64> = rep.iter().filter(|e| e.factor_raw < one && e.factor_exact.as_ref().is_none_or(|q| q < &BigRational::one())).map(|e| e.p).collect();
    r.set("primes", rep.len());
    r.set_opt("product", rep.last().map(|e| e.running_decimal(cfg.digits)));
    r.set_bool("factors_at_least_one", below_one.is_empty());
    let rows = rep
        .iter()
        .map(|e| {
            let exact = e.factor_exact.as_ref().map_or_else(|| "-".to_string(), |q| q.to_string());
            vec![e.p.to_string(), format!("{:?}", e.kind).to_lowercase(), exact, e.factor_decimal(cfg.digits), e.running_decimal(cfg.digits)]
        })
        .collect();
    r.table(Table { name: "factors", columns: vec!["p", "kind", "factor_exact", "factor", "running_product"], rows });
    if let Some(p) = below_one.first() {
        r.fail(format!("Euler factor at p = {p} is below 1"));
    }
    Ok(r)
}

pub fn finite_induction(suite: &str) -> Result<Report> {
    let spec = parse_suite(suite)?;
    let mut r = Report::new("finite-induction");
    r.set("max_order", spec.max_order).set("max_x", spec.max_x);
    type Runner = fn(usize, usize) -> Result<SuiteSummary>;
    let all: [(&str, SuiteChecks, Runner); 3] = [
        ("balanced_product", SuiteChecks::BalancedProduct, balanced_product_suite),
        ("involution", SuiteChecks::Involution, involution_suite),
        ("stages", SuiteChecks::Stages, stages_suite),
    ];
    let mut rows = Vec::new();
    let mut first_failure = None;
    for (name, which, run) in all {
        if spec.checks != SuiteChecks::All && spec.checks != which {
            continue;
        }
        let s = run(spec.max_order, spec.max_x)?;
        rows.push(vec![name.to_string(), s.groups.to_string(), s.instances.to_string(), s.checks.to_string(), s.failures.len().to_string()]);
        if first_failure.is_none() {
            first_failure = s.failures.first().cloned();
        }
    }
    r.table(Table { name: "suites", columns: vec!["suite", "groups", "instances", "checks", "failures"], rows });
    match first_failure {
        Some(f) => {
            r.set_value("first_failure", serde_json::to_value(&f).expect("serializable"));
            r.fail(format!("{} failed on {} with H = {:?}", f.report.check, f.group, f.subgroup));
        }
        None => {
            r.set_bool("passed", true);
        }
    }
    Ok(r)
}

pub fn monotone(cfg: &Config, instances: usize, grid_points: usize) -> Result<Report> {
    if instances == 0 || grid_points < 2 {
        return Err(Error::Validation("need at least one instance and two grid points".into()));
    }
    let tol = 1e-12;
    let grid: Vec<f64> = (1..=grid_points).map(|i| i as f64 / grid_points as f64).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut worst = f64::NEG_INFINITY;
    let mut failures = Vec::new();
    for i in 0..instances {
        let n = rng.gen_range(1..=3);
        let xs: Vec<f64> = (0..n).map(|_| rng.gen_range(1.01..50.0)).collect();
        let ss: Vec<f64> = (0..n).map(|_| rng.gen_range(1.0..6.0)).collect();
        let rep = monotone_factor_check(&xs, &ss, &grid, tol)?;
        worst = worst.max(rep.max_increase);
        if !rep.passed {
            failures.push(format!("instance {i}: xs = {xs:?}, ss = {ss:?}"));
        }
    }
    let mut r = Report::new("monotone");
    r.set("seed", cfg.seed).set("instances", instances).set("grid_points", grid_points);
    r.set("tolerance", format_bound(tol)).set("max_increase", format!("{worst:.6e}"));
    r.set_list("failures", &failures);
    if let Some(f) = failures.first() {
        r.fail(format!("factor increases along the grid: {f}"));
    }
    Ok(r)
}
