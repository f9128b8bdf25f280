//! End-to-end check: `#VC(G)` recovered from oracle access to
//! `#CSP(𝓕)` only, through a verified reduction plan.

use std::collections::BTreeMap;
use std::sync::Mutex;

use serde_json::json;

use crate::classify::{family_verdict, in_a, in_p, support_affine, FamilyClass};
use crate::instance::{brute_force, eval_ve, CspInstance, Stats, DEFAULT_BRUTE_CAP, DEFAULT_WIDTH_CAP};
use crate::io::json::exact_to_json;
use crate::numeric::{ExactComplex, Field};
use crate::signature::Signature;

use super::arity::{reduce_arity_search, Property};
use super::chain::{rename_gadget, PlanBuilder, PlanStep, ReductionPlan, IS, VC};
use super::gadgets::substitute_gadget_scaled;
use super::interp::interpolate_thickening;
use super::oracle::CountingOracle;
use super::pins::{eliminate_pins_blackbox, eliminate_pins_blockinterp, merge_pinned_variables};
use super::trace::{max_stats, ReductionTrace, TraceStep};
use super::ReduceError;

type E = ExactComplex;
type Sig = Signature<E>;

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Block size of the top-level interpolation.
    pub block_size: usize,
    /// Candidate budget for gadget searches.
    pub budget: usize,
    /// Relaxes 𝒜 membership to "up to a nonzero scalar" in the verdict.
    pub modulo_scalar: bool,
    /// Treewidth cap of the evaluator behind every oracle.
    pub width_cap: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            block_size: 2,
            budget: 10_000,
            modulo_scalar: false,
            width_cap: DEFAULT_WIDTH_CAP,
        }
    }
}

#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub recovered: E,
    pub expected: E,
    /// Queries made to the `#CSP(𝓕)` oracle.
    pub oracle_calls: usize,
    /// Stage results checked against direct evaluation.
    pub stage_checks: usize,
    pub plan: ReductionPlan,
}

impl PipelineReport {
    pub fn matches(&self) -> bool {
        self.recovered == self.expected
    }
}

fn outside_a_p(f: &Sig) -> bool {
    in_a(f, true).is_none() && in_p(f).is_none()
}

/// Builds the plan from `{[0,1,1]}` down to `𝓕 ∪ {δ₀, δ₁}` and, when pins
/// remain, a final pin-elimination stage.
pub fn build_plan(family: &[Sig], config: &PipelineConfig) -> Result<ReductionPlan, ReduceError> {
    let verdict = family_verdict(family, config.modulo_scalar);
    if verdict.class != FamilyClass::Hard {
        return Err(ReduceError::Precondition(format!(
            "family is tractable ({:?})",
            verdict.class
        )));
    }
    let mut b = PlanBuilder::new();
    let names: Vec<String> = family
        .iter()
        .enumerate()
        .map(|(i, f)| b.add(&format!("F{i}"), f.clone()))
        .collect();
    let rename_f = |i: usize| BTreeMap::from([("F".to_string(), names[i].clone())]);

    if let Some(i) = family.iter().position(|f| support_affine(f, false).is_none()) {
        let r = reduce_arity_search(&family[i], Property::NonaffineSupport, config.budget, false)?;
        b.notes.push(format!("arity reduction of {}: {:?}", names[i], r.steps));
        let fb = b.add("Fb", r.signature.clone());
        b.nonaffine(&fb)?;
        b.gadget(&fb, rename_gadget(&r.gadget, &rename_f(i))?, "arity reduction")?;
    } else {
        let ia = family
            .iter()
            .position(|f| in_a(f, true).is_none())
            .ok_or_else(|| ReduceError::Precondition("every member is in A up to a scalar".into()))?;
        let ip = verdict.not_in_p.expect("hard family has a member outside P");
        let ru = reduce_arity_search(&family[ia], Property::NotA, config.budget, true)?;
        let [u0, u1] = [ru.signature.value(0).clone(), ru.signature.value(1).clone()];
        let lambda = u1.checked_div(&u0).expect("unary outside A has no zero");
        let fu = b.add("Fu", Sig::unary(E::one(), lambda));
        let rg = reduce_arity_search(&family[ip], Property::NotP, config.budget, false)?;
        let fp = b.add("Fp", rg.signature.clone());
        b.notes.push(format!(
            "unary {:?} from {}; {:?} from {}",
            ru.signature, names[ia], rg.signature, names[ip]
        ));
        let candidates: Vec<(usize, Vec<(&str, Vec<usize>)>)> = if rg.signature.arity() == 3 {
            vec![
                (3, vec![(fp.as_str(), vec![0, 1, 2])]),
                (3, vec![(fp.as_str(), vec![0, 1, 2]), (fu.as_str(), vec![2])]),
            ]
        } else {
            vec![
                (2, vec![(fp.as_str(), vec![0, 1])]),
                (3, vec![(fp.as_str(), vec![0, 2]), (fp.as_str(), vec![1, 2])]),
                (3, vec![(fp.as_str(), vec![0, 2]), (fp.as_str(), vec![1, 2]), (fu.as_str(), vec![2])]),
            ]
        };
        let mut chosen = None;
        for (nvars, cons) in candidates {
            let g = b.build(nvars, vec![0, 1], &cons)?;
            let q = crate::signature::gadget_signature(&g, crate::signature::DEFAULT_DANGLING_LIMIT)?;
            if q.is_zero() || !outside_a_p(&q) {
                b.notes.push(format!("candidate {q:?} rejected"));
                continue;
            }
            chosen = Some((g, q));
            break;
        }
        let (g, q) = chosen.ok_or_else(|| {
            ReduceError::verification("binary construction", "no candidate lies outside A ∪ P")
        })?;
        let qn = b.add("Q", q);
        b.chain(&qn, 0)?;
        b.gadget(&qn, g, "binary from the family")?;
        b.gadget(&fp, rename_gadget(&rg.gadget, &rename_f(ip))?, "arity reduction")?;
        b.gadget(&fu, rename_gadget(&ru.gadget, &rename_f(ia))?, "arity reduction")?;
    }

    let mut plan = b.finish();
    let last = plan.families().pop().unwrap_or_default();
    if last.iter().any(|n| n.starts_with("DELTA")) {
        plan.steps.push(PlanStep::Pins);
    }
    let last = plan.families().pop().unwrap_or_default();
    for n in &last {
        if !family.contains(&plan.functions[n]) {
            return Err(ReduceError::verification(
                "plan",
                format!("final family contains {n} = {:?}, outside F", plan.functions[n]),
            ));
        }
    }
    Ok(plan)
}

#[derive(Default)]
struct StageAgg {
    runs: usize,
    before: Stats,
    ledger: Option<E>,
}

struct Executor<'a> {
    plan: &'a ReductionPlan,
    family: &'a [Sig],
    config: &'a PipelineConfig,
    bottom: CountingOracle<E>,
    stages: Vec<Mutex<StageAgg>>,
    checks: Mutex<usize>,
}

impl Executor<'_> {
    fn note(&self, level: usize, inst: &CspInstance<E>, ledger: Option<&E>) {
        let mut agg = self.stages[level].lock().unwrap();
        if let Some(l) = ledger {
            agg.ledger.get_or_insert_with(|| l.clone());
        } else {
            agg.runs += 1;
            agg.before = max_stats(agg.before, inst.stats());
        }
    }

    fn run(&self, level: usize, inst: &CspInstance<E>) -> Result<E, ReduceError> {
        self.note(level, inst, None);
        let Some(step) = self.plan.steps.get(level) else {
            return self.bottom.eval(inst);
        };
        let next = |i: &CspInstance<E>| self.run(level + 1, i);
        let scratch = ReductionTrace::new();
        let z = match step {
            PlanStep::Gadget { target, gadget, .. } => {
                if inst.occurrences(target) == 0 {
                    let mut plain = inst.clone();
                    plain.functions.remove(target);
                    next(&plain)?
                } else {
                    let (out, ledger) = substitute_gadget_scaled(inst, target, gadget, &scratch)?;
                    self.note(level, inst, Some(&ledger));
                    ledger * next(&out)?
                }
            }
            PlanStep::Interpolate { target, base, top } => {
                let d = if *top {
                    self.config.block_size
                } else {
                    inst.occurrences(target).max(1)
                };
                interpolate_thickening(
                    step.op(),
                    inst,
                    target,
                    base,
                    &self.plan.functions[base],
                    d,
                    &next,
                    &scratch,
                )?
            }
            PlanStep::Complement => {
                let mut out = CspInstance::new(inst.num_vars);
                out.add_function(IS, self.plan.functions[IS].clone())?;
                for c in &inst.constraints {
                    if c.func != VC {
                        return Err(ReduceError::verification("complement", "instance has other functions"));
                    }
                    out.add_constraint(IS, c.vars.clone())?;
                }
                next(&out)?
            }
            PlanStep::Pins => self.eliminate_pins(inst, &next, &scratch)?,
        };
        let direct = eval_ve(inst, self.config.width_cap)?;
        if z != direct {
            return Err(ReduceError::verification(
                format!("stage {level} ({})", step.op()),
                format!("recovered {z}, direct evaluation {direct}"),
            ));
        }
        *self.checks.lock().unwrap() += 1;
        Ok(z)
    }

    fn eliminate_pins(
        &self,
        inst: &CspInstance<E>,
        next: &(dyn Fn(&CspInstance<E>) -> Result<E, ReduceError> + Sync),
        scratch: &ReductionTrace,
    ) -> Result<E, ReduceError> {
        let merged = merge_pinned_variables(inst);
        let pins = merged
            .constraints
            .iter()
            .filter(|c| c.func.starts_with("DELTA"))
            .count();
        let qualifies = |f: &&Sig| {
            let all = f.len() - 1;
            f.arity() > 0
                && f.value(0) != f.value(all)
                && (0..=all).any(|t| f.value(t) != f.value(t ^ all))
        };
        match self.family.iter().find(qualifies) {
            Some(f) => eliminate_pins_blockinterp(&merged, f, pins.max(1), next, scratch),
            None => eliminate_pins_blackbox(&merged, self.family, self.config.budget, next, scratch),
        }
    }
}

/// Builds the plan for `family`, runs it on the vertex-cover instance of
/// the graph with every stage checked against direct evaluation, and
/// compares the result with exhaustive counting.
pub fn verify_pipeline(
    family: &[Sig],
    num_vertices: usize,
    edges: &[(usize, usize)],
    config: &PipelineConfig,
    trace: &ReductionTrace,
) -> Result<PipelineReport, ReduceError> {
    let plan = build_plan(family, config)?;
    let inst = CspInstance::from_graph(num_vertices, edges, VC, Sig::or2())?;
    let expected = brute_force(&inst, DEFAULT_BRUTE_CAP)?;
    let exec = Executor {
        plan: &plan,
        family,
        config,
        bottom: CountingOracle::restricted(family.to_vec()),
        stages: (0..=plan.steps.len()).map(|_| Mutex::default()).collect(),
        checks: Mutex::new(0),
    };
    let result = exec.run(0, &inst);
    let stages: Vec<StageAgg> = exec
        .stages
        .into_iter()
        .map(|m| m.into_inner().unwrap())
        .collect();
    for (i, step) in plan.steps.iter().enumerate() {
        let ledger = stages[i].ledger.clone().unwrap_or_else(E::one);
        trace.record(
            TraceStep::new(
                step.op(),
                stages[i].before,
                stages[i + 1].before,
                stages[i + 1].runs,
                ledger.to_scalar(),
            )
            .with_detail(step.describe()),
        );
    }
    let recovered = match result {
        Ok(z) => z,
        Err(e) => {
            trace.record(
                TraceStep::new("verify_pipeline", inst.stats(), inst.stats(), 0, E::one().to_scalar())
                    .failed(&e.to_string()),
            );
            return Err(e);
        }
    };
    let oracle_calls = exec.bottom.calls();
    trace.record(
        TraceStep::new("verify_pipeline", inst.stats(), stages[plan.steps.len()].before, oracle_calls, E::one().to_scalar())
            .with_detail(json!({
                "recovered": exact_to_json(&recovered),
                "expected": exact_to_json(&expected),
            })),
    );
    let stage_checks = *exec.checks.lock().unwrap();
    Ok(PipelineReport {
        recovered,
        expected,
        oracle_calls,
        stage_checks,
        plan,
    })
}
