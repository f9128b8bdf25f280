//! Constructive case analysis turning a binary function outside 𝒜 ∪ 𝒫
//! into a verified plan for counting vertex covers.

use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::classify::{in_a, in_p};
use crate::instance::CspInstance;
use crate::io::json::{exact_to_json, signature_to_json};
use crate::numeric::{ExactComplex, Field, Tolerance};
use crate::signature::{gadget_signature, Gadget, Signature, DEFAULT_DANGLING_LIMIT};

use super::gadgets::{parallel_gadget, sig_ratio};
use super::ReduceError;

type E = ExactComplex;
type Sig = Signature<E>;

/// Name of the vertex-cover function `[0,1,1]` every plan starts from.
pub const VC: &str = "VC";
/// Name of the independent-set function `[1,1,0]`.
pub const IS: &str = "IS";

/// Recursion bound for the case analysis.
const MAX_DEPTH: usize = 6;

fn q(n: i64, d: i64) -> E {
    E::from_ratio(n, d)
}

fn outside_a_p(f: &Sig) -> bool {
    in_a(f, true).is_none() && in_p(f).is_none()
}

fn is_root(x: &E) -> Option<u32> {
    Field::root_of_unity_order(x, &Tolerance::default())
}

fn div(a: &E, b: &E) -> E {
    a.checked_div(b).expect("nonzero divisor")
}

/// One stage of a plan. Each stage maps instances over the current family
/// to instances over the next one.
#[derive(Debug, Clone)]
pub enum PlanStep {
    /// Occurrences of `target` are replaced by `gadget`, which realizes
    /// `scale · target`.
    Gadget {
        target: String,
        gadget: Gadget<E>,
        scale: E,
        note: String,
    },
    /// `target` is recovered by thickening interpolation from `base`. The
    /// `top` stage uses the configured block size, others a single block.
    Interpolate { target: String, base: String, top: bool },
    /// `[0,1,1]` becomes `[1,1,0]`: complementing every variable preserves
    /// the count of an instance over the vertex-cover function alone.
    Complement,
    /// `δ₀`/`δ₁` constraints are eliminated.
    Pins,
}

impl PlanStep {
    pub fn op(&self) -> &'static str {
        match self {
            PlanStep::Gadget { .. } => "substitute_gadget",
            PlanStep::Interpolate { top: true, .. } => "interpolate_block",
            PlanStep::Interpolate { .. } => "interpolate_unary",
            PlanStep::Complement => "complement",
            PlanStep::Pins => "eliminate_pins",
        }
    }

    pub fn describe(&self) -> Value {
        match self {
            PlanStep::Gadget { target, gadget, scale, note } => json!({
                "op": self.op(),
                "target": target,
                "gadget_functions": gadget.instance.functions.keys().collect::<Vec<_>>(),
                "gadget_constraints": gadget.instance.constraints.len(),
                "scale": exact_to_json(scale),
                "note": note,
            }),
            PlanStep::Interpolate { target, base, .. } => json!({
                "op": self.op(), "target": target, "base": base,
            }),
            PlanStep::Complement | PlanStep::Pins => json!({ "op": self.op() }),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ReductionPlan {
    pub functions: BTreeMap<String, Sig>,
    pub steps: Vec<PlanStep>,
    pub notes: Vec<String>,
}

impl ReductionPlan {
    /// The family after each step, starting from `{VC}`.
    pub fn families(&self) -> Vec<Vec<String>> {
        let mut cur: Vec<String> = vec![VC.to_string()];
        let mut out = vec![cur.clone()];
        for s in &self.steps {
            match s {
                PlanStep::Gadget { target, gadget, .. } => {
                    cur.retain(|n| n != target);
                    cur.extend(gadget.instance.functions.keys().cloned());
                }
                PlanStep::Interpolate { target, base, .. } => {
                    cur.retain(|n| n != target);
                    cur.push(base.clone());
                }
                PlanStep::Complement => {
                    cur.retain(|n| n != VC);
                    cur.push(IS.to_string());
                }
                PlanStep::Pins => cur.retain(|n| !n.starts_with("DELTA")),
            }
            cur.sort();
            cur.dedup();
            out.push(cur.clone());
        }
        out
    }

    pub fn to_json(&self) -> Value {
        json!({
            "functions": self.functions.iter()
                .map(|(k, v)| (k.clone(), signature_to_json(v)))
                .collect::<serde_json::Map<_, _>>(),
            "steps": self.steps.iter().map(PlanStep::describe).collect::<Vec<_>>(),
            "notes": self.notes,
        })
    }
}

/// Result of the two-branch gadget construction for a normalized binary.
#[derive(Debug, Clone)]
pub struct Lemma43 {
    /// `"H'"` when `d ≠ −bc`, otherwise `"H''"`.
    pub branch: &'static str,
    pub signature: Sig,
    /// Gadget over the functions `H`, `Ux` (and `Uy`).
    pub gadget: Gadget<E>,
    pub unaries: Vec<(String, Sig)>,
}

/// Builds `H' = Σ H(x₁,x₃)H(x₃,x₂)U_x(x₃)` with `U_x = [1,−1/(bc)]`, or
/// for `d = −bc` the two-level `H''` with `U_x = [1,−2/(bc)]`,
/// `U_y = [1,−1/(9bc)]`, and checks the result against its closed form.
pub fn lemma43_gadgets(h: &Sig) -> Result<Lemma43, ReduceError> {
    let [[a, b], [c, d]] = h.matrix()?;
    if !a.is_one() || b.is_zero() || c.is_zero() || d.is_zero() {
        return Err(ReduceError::Precondition("need H(0,0) = 1 and bcd ≠ 0".into()));
    }
    let bc = b.clone() * c.clone();
    if d == bc {
        return Err(ReduceError::Precondition("need d ≠ bc".into()));
    }
    let mut inst = CspInstance::new(3);
    inst.add_function("H", h.clone())?;
    let neg_inv_bc = E::zero() - bc.inv().expect("nonzero");
    let (branch, closed, unaries) = if d != E::zero() - bc.clone() {
        let ux = Sig::unary(E::one(), neg_inv_bc);
        inst.add_function("Ux", ux.clone())?;
        inst.add_constraint("H", vec![0, 2])?;
        inst.add_constraint("H", vec![2, 1])?;
        inst.add_constraint("Ux", vec![2])?;
        let closed = Sig::binary(
            E::zero(),
            div(&(bc.clone() - d.clone()), &c),
            div(&(bc.clone() - d.clone()), &b),
            div(&(bc.clone() * bc.clone() - d.clone() * d.clone()), &bc),
        );
        ("H'", closed, vec![("Ux".to_string(), ux)])
    } else {
        let ux = Sig::unary(E::one(), neg_inv_bc.clone() * E::from_int(2));
        let uy = Sig::unary(E::one(), neg_inv_bc * q(1, 9));
        inst = CspInstance::new(5);
        inst.add_function("H", h.clone())?;
        inst.add_function("Ux", ux.clone())?;
        inst.add_function("Uy", uy.clone())?;
        // x1 = 0, x2 = 1, x3 = 2, x4 = 3, x5 = 4
        for (f, vs) in [
            ("H", vec![0, 3]),
            ("H", vec![3, 2]),
            ("Ux", vec![3]),
            ("H", vec![2, 4]),
            ("H", vec![4, 1]),
            ("Ux", vec![4]),
            ("Uy", vec![2]),
        ] {
            inst.add_constraint(f, vs)?;
        }
        let closed = Sig::binary(
            E::zero(),
            q(-8, 3) * b.clone(),
            q(-8, 3) * c.clone(),
            q(80, 9) * bc.clone(),
        );
        (
            "H''",
            closed,
            vec![("Ux".to_string(), ux), ("Uy".to_string(), uy)],
        )
    };
    let gadget = Gadget::new(inst, vec![0, 1])?;
    let realized = gadget_signature(&gadget, DEFAULT_DANGLING_LIMIT)?;
    if realized != closed {
        return Err(ReduceError::verification(
            format!("lemma43 {branch}"),
            format!("contraction gives {realized:?}, closed form {closed:?}"),
        ));
    }
    Ok(Lemma43 {
        branch,
        signature: realized,
        gadget,
        unaries,
    })
}

/// Copy of `g` with its functions renamed; unmapped names are kept.
pub(crate) fn rename_gadget(g: &Gadget<E>, map: &BTreeMap<String, String>) -> Result<Gadget<E>, ReduceError> {
    let name = |k: &String| map.get(k).cloned().unwrap_or_else(|| k.clone());
    let mut inst = CspInstance::new(g.instance.num_vars);
    for (k, sig) in &g.instance.functions {
        inst.add_function(&name(k), sig.clone())?;
    }
    for con in &g.instance.constraints {
        inst.add_constraint(&name(&con.func), con.vars.clone())?;
    }
    Ok(Gadget::new(inst, g.dangling.clone())?)
}

/// Accumulates plan steps top-down.
pub(crate) struct PlanBuilder {
    pub functions: BTreeMap<String, Sig>,
    pub steps: Vec<PlanStep>,
    pub notes: Vec<String>,
}

impl PlanBuilder {
    pub fn new() -> Self {
        let mut functions = BTreeMap::new();
        functions.insert(VC.to_string(), Sig::or2());
        functions.insert(IS.to_string(), Sig::or2().flip());
        functions.insert("DELTA0".to_string(), Sig::pin_unary(0));
        functions.insert("DELTA1".to_string(), Sig::pin_unary(1));
        PlanBuilder {
            functions,
            steps: Vec::new(),
            notes: Vec::new(),
        }
    }

    pub fn finish(self) -> ReductionPlan {
        ReductionPlan {
            functions: self.functions,
            steps: self.steps,
            notes: self.notes,
        }
    }

    /// Registers `sig` under a fresh name derived from `base`.
    pub fn add(&mut self, base: &str, sig: Sig) -> String {
        let mut name = base.to_string();
        let mut k = 1;
        while self.functions.contains_key(&name) {
            k += 1;
            name = format!("{base}{k}");
        }
        self.functions.insert(name.clone(), sig);
        name
    }

    pub fn sig(&self, name: &str) -> &Sig {
        &self.functions[name]
    }

    /// Builds a gadget from named functions of the plan.
    pub fn build(
        &self,
        nvars: usize,
        dangling: Vec<usize>,
        cons: &[(&str, Vec<usize>)],
    ) -> Result<Gadget<E>, ReduceError> {
        let mut inst = CspInstance::new(nvars);
        for (f, vs) in cons {
            inst.add_function(f, self.sig(f).clone())?;
            inst.add_constraint(f, vs.clone())?;
        }
        Ok(Gadget::new(inst, dangling)?)
    }

    /// Appends a gadget step and returns its verified scale.
    pub fn gadget(&mut self, target: &str, gadget: Gadget<E>, note: &str) -> Result<E, ReduceError> {
        let realized = gadget_signature(&gadget, DEFAULT_DANGLING_LIMIT)?;
        let scale = sig_ratio(&realized, self.sig(target)).ok_or_else(|| {
            ReduceError::verification(
                note,
                format!("gadget realizes {realized:?}, not a multiple of {target} = {:?}", self.sig(target)),
            )
        })?;
        self.steps.push(PlanStep::Gadget {
            target: target.to_string(),
            gadget,
            scale: scale.clone(),
            note: note.to_string(),
        });
        Ok(scale)
    }

    fn gadget_exact(&mut self, target: &str, gadget: Gadget<E>, note: &str) -> Result<(), ReduceError> {
        let scale = self.gadget(target, gadget, note)?;
        if scale.is_one() {
            Ok(())
        } else {
            Err(ReduceError::verification(note, format!("closed form off by factor {scale}")))
        }
    }

    fn require_outside(&self, name: &str, stage: &str) -> Result<(), ReduceError> {
        if outside_a_p(self.sig(name)) {
            Ok(())
        } else {
            Err(ReduceError::verification(
                stage,
                format!("{name} = {:?} is not outside A ∪ P", self.sig(name)),
            ))
        }
    }

    /// Plan from `{VC}` down to `{h}` for a binary `h ∉ 𝒜 ∪ 𝒫`.
    pub fn chain(&mut self, h: &str, depth: usize) -> Result<(), ReduceError> {
        if depth > MAX_DEPTH {
            return Err(ReduceError::verification("lemma41", "case analysis did not terminate"));
        }
        self.require_outside(h, "lemma41 precondition")?;
        let [[a, _], [_, d]] = self.sig(h).matrix()?;
        if a.is_zero() || d.is_zero() {
            return self.interpolate_vc(h);
        }
        if a.is_one() {
            return self.normalized(h, depth);
        }
        let hn = self.add("Hn", self.sig(h).scale(&a.inv().expect("nonzero")));
        self.normalized(&hn, depth)?;
        let g = self.build(2, vec![0, 1], &[(h, vec![0, 1])])?;
        self.gadget(&hn, g, "normalize H(0,0) to 1")?;
        Ok(())
    }

    /// `H(0,0) = 0` (or `H(1,1) = 0`, handled through complementation):
    /// `H'(x₁,x₂) = H(x₁,x₂)H(x₂,x₁)` is thickened into `[0,1,1]`.
    fn interpolate_vc(&mut self, h: &str) -> Result<(), ReduceError> {
        let [[a, b], [c, d]] = self.sig(h).matrix()?;
        let complemented = !a.is_zero();
        let (edge, far) = if complemented { (a, d) } else { (d, a) };
        if b.is_zero() || c.is_zero() || edge.is_zero() || !far.is_zero() {
            return Err(ReduceError::verification(
                "vc from h",
                format!("{h} does not have exactly one zero on the diagonal"),
            ));
        }
        let bc = b * c;
        let sq = edge.clone() * edge;
        let hp_sig = if complemented {
            Sig::symmetric(vec![sq.clone(), bc.clone(), E::zero()])?
        } else {
            Sig::symmetric(vec![E::zero(), bc.clone(), sq.clone()])?
        };
        let target = if complemented {
            self.steps.push(PlanStep::Complement);
            IS
        } else {
            VC
        };
        let hp = self.add("Hsq", hp_sig);
        let ratio = div(&sq, &bc);
        match is_root(&ratio) {
            Some(k) => {
                self.notes.push(format!(
                    "ratio {ratio} has order {k}; {k} parallel copies realize the target exactly"
                ));
                let g = parallel_gadget(&hp, self.sig(&hp), k as usize);
                self.gadget(target, g, "thicken to the target")?;
            }
            None => self.steps.push(PlanStep::Interpolate {
                target: target.to_string(),
                base: hp.clone(),
                top: true,
            }),
        }
        let g = self.build(2, vec![0, 1], &[(h, vec![0, 1]), (h, vec![1, 0])])?;
        self.gadget_exact(&hp, g, "H(x1,x2)·H(x2,x1)")
    }

    /// `H(0,0) = 1`, `H(1,1) ≠ 0`.
    fn normalized(&mut self, h: &str, depth: usize) -> Result<(), ReduceError> {
        let [[_, b], [c, _]] = self.sig(h).matrix()?;
        if !b.is_zero() && !c.is_zero() {
            return self.case_bc(h);
        }
        if b.is_zero() {
            return self.case_b0(h, depth);
        }
        let ht = self.add("Ht", self.sig(h).transpose()?);
        self.case_b0(&ht, depth)?;
        let g = self.build(2, vec![0, 1], &[(h, vec![1, 0])])?;
        self.gadget_exact(&ht, g, "transpose")
    }

    /// `bc ≠ 0`: pick a unary `[1,x]` with `x` not a root of unity and
    /// apply `lemma43_route`; if none exists use the `G = bc[1,1,d/(bc)]` route.
    fn case_bc(&mut self, h: &str) -> Result<(), ReduceError> {
        let [[_, b], [c, d]] = self.sig(h).matrix()?;
        if is_root(&d).is_none() {
            let dn = self.add("D", Sig::unary(E::one(), d));
            let g = self.build(1, vec![0], &[(h, vec![0, 0])])?;
            return self.lemma43_route(h, &dn, g, "H(x,x)");
        }
        if is_root(&b).is_none() {
            let dn = self.add("D", Sig::unary(E::one(), b));
            let g = self.build(2, vec![0], &[(h, vec![1, 0]), ("DELTA0", vec![1])])?;
            return self.lemma43_route(h, &dn, g, "H(0,x)");
        }
        if is_root(&c).is_none() {
            let dn = self.add("D", Sig::unary(E::one(), c));
            let g = self.build(2, vec![0], &[(h, vec![0, 1]), ("DELTA0", vec![1])])?;
            return self.lemma43_route(h, &dn, g, "H(x,0)");
        }
        self.case_roots(h)
    }

    /// The closed-form gadget on `h` (with `h(0,0) = 1`), the unaries it needs being
    /// interpolated from `dn`, which `dn_gadget` realizes.
    fn lemma43_route(&mut self, h: &str, dn: &str, dn_gadget: Gadget<E>, dn_note: &str) -> Result<(), ReduceError> {
        if is_root(&self.sig(dn).value(1).clone()).is_some() {
            return Err(ReduceError::verification(
                "lemma43 route",
                format!("{dn} = {:?} has a root-of-unity ratio", self.sig(dn)),
            ));
        }
        let l = lemma43_gadgets(self.sig(h))?;
        let mut rename = BTreeMap::from([("H".to_string(), h.to_string())]);
        for (u, sig) in &l.unaries {
            rename.insert(u.clone(), self.add(u, sig.clone()));
        }
        let hp = self.add(if l.branch == "H'" { "Hp" } else { "Hpp" }, l.signature.clone());
        self.require_outside(&hp, "lemma43 output")?;
        self.interpolate_vc(&hp)?;
        let g = rename_gadget(&l.gadget, &rename)?;
        self.gadget_exact(&hp, g, l.branch)?;
        for (u, _) in &l.unaries {
            self.steps.push(PlanStep::Interpolate {
                target: rename[u].clone(),
                base: dn.to_string(),
                top: false,
            });
        }
        self.gadget(dn, dn_gadget, dn_note)?;
        Ok(())
    }

    /// `b`, `c`, `d` all roots of unity.
    fn case_roots(&mut self, h: &str) -> Result<(), ReduceError> {
        let [[_, b], [c, d]] = self.sig(h).matrix()?;
        let (kb, kc) = (is_root(&b).unwrap() as usize, is_root(&c).unwrap() as usize);
        let bc = b.clone() * c.clone();
        let u1 = self.add("U1", Sig::unary(E::one(), b));
        let u2 = self.add("U2", Sig::unary(E::one(), c));
        let dg = div(&d, &bc);
        let gn = self.add("G", Sig::symmetric(vec![E::one(), E::one(), dg.clone()])?);
        if in_p(self.sig(&gn)).is_some() {
            return Err(ReduceError::verification("lemma41 roots", "G = bc[1,1,d/(bc)] lies in P"));
        }
        if in_a(self.sig(&gn), true).is_none() {
            let half = div(&(E::one() + dg), &E::from_int(2));
            let dn = self.add("D", Sig::unary(E::one(), half));
            let g = self.build(2, vec![0], &[(&gn, vec![0, 1])])?;
            self.lemma43_route(&gn, &dn, g, "sum over x2 of G")?;
        } else {
            let (u, v) = [(&u1, self.sig(&u1).value(1).clone()), (&u2, self.sig(&u2).value(1).clone())]
                .into_iter()
                .find(|(_, v)| v.is_power_of_i().is_none())
                .map(|(u, v)| (u.clone(), v))
                .ok_or_else(|| {
                    ReduceError::verification("lemma41 roots", "G ∈ A and both unaries lie in A")
                })?;
            let gp_sig = Sig::symmetric(vec![E::one(), v.clone(), E::zero() - v.clone() * v.clone()])?;
            let gp = self.add("Gp", gp_sig);
            self.require_outside(&gp, "lemma41 roots G'")?;
            let ratio = div(&(v.clone() - v.clone() * v.clone()), &(E::one() + v));
            let dn = self.add("D", Sig::unary(E::one(), ratio));
            let g = self.build(2, vec![0], &[(&gp, vec![0, 1])])?;
            self.lemma43_route(&gp, &dn, g, "sum over x2 of G'")?;
            let g = self.build(2, vec![0, 1], &[(&gn, vec![0, 1]), (&u, vec![0]), (&u, vec![1])])?;
            self.gadget_exact(&gp, g, "G(x1,x2)U(x1)U(x2)")?;
        }
        let mut cons: Vec<(&str, Vec<usize>)> = vec![(h, vec![0, 1])];
        cons.extend(std::iter::repeat((u1.as_str(), vec![1])).take(kb - 1));
        cons.extend(std::iter::repeat((u2.as_str(), vec![0])).take(kc - 1));
        let g = self.build(2, vec![0, 1], &cons)?;
        self.gadget(&gn, g, "H·U1^(k-1)·U2^(k-1)")?;
        let g = self.build(2, vec![0], &[(h, vec![1, 0]), ("DELTA0", vec![1])])?;
        self.gadget_exact(&u1, g, "H(0,x)")?;
        let g = self.build(2, vec![0], &[(h, vec![0, 1]), ("DELTA0", vec![1])])?;
        self.gadget_exact(&u2, g, "H(x,0)")
    }

    /// `H(0,1) = 0`: `H' = Σ_{x₃} H(x₁,x₃)H(x₂,x₃) = [1, c, c²+d²]`.
    fn case_b0(&mut self, h: &str, depth: usize) -> Result<(), ReduceError> {
        let [[_, _], [c, d]] = self.sig(h).matrix()?;
        if c.is_zero() || d.is_zero() {
            return Err(ReduceError::verification("lemma41 b=0", format!("{h} is degenerate")));
        }
        let hp_sig = Sig::symmetric(vec![
            E::one(),
            c.clone(),
            c.clone() * c.clone() + d.clone() * d.clone(),
        ])?;
        if outside_a_p(&hp_sig) {
            let hp = self.add("Hb", hp_sig);
            self.chain(&hp, depth + 1)?;
            let g = self.build(3, vec![0, 1], &[(h, vec![0, 2]), (h, vec![1, 2])])?;
            return self.gadget_exact(&hp, g, "sum over x3 of H(x1,x3)H(x2,x3)");
        }
        // H' ∈ 𝒜: use the other Gram product instead
        let k_sig = Sig::symmetric(vec![
            E::one() + c.clone() * c.clone(),
            c.clone() * d.clone(),
            d.clone() * d,
        ])?;
        if !outside_a_p(&k_sig) {
            return Err(ReduceError::verification(
                "lemma41 b=0",
                "both Gram products of H lie in A ∪ P",
            ));
        }
        self.notes.push(format!(
            "H' = [1,c,c^2+d^2] lies in A; used sum over x3 of H(x3,x1)H(x3,x2) = {k_sig:?}"
        ));
        let kn = self.add("Hk", k_sig);
        self.chain(&kn, depth + 1)?;
        let g = self.build(3, vec![0, 1], &[(h, vec![2, 0]), (h, vec![2, 1])])?;
        self.gadget_exact(&kn, g, "sum over x3 of H(x3,x1)H(x3,x2)")
    }

    /// Hardness route for a binary `f` with non-affine support: `F·Fᵀ` when it
    /// lies outside 𝒜 ∪ 𝒫, otherwise `f` itself.
    pub fn nonaffine(&mut self, f: &str) -> Result<(), ReduceError> {
        let g = self.build(3, vec![0, 1], &[(f, vec![0, 2]), (f, vec![1, 2])])?;
        let gram = gadget_signature(&g, DEFAULT_DANGLING_LIMIT)?;
        if outside_a_p(&gram) {
            let h = self.add("H", gram);
            self.chain(&h, 0)?;
            return self.gadget_exact(&h, g, "sum over x3 of F(x1,x3)F(x2,x3)");
        }
        self.notes.push(format!("F·F^T = {gram:?} lies in A ∪ P; using F directly"));
        self.chain(f, 0)
    }
}

/// Plan reducing `#CSP([0,1,1])` to `#CSP({H, δ₀, δ₁})` for a binary
/// `H ∉ 𝒜 ∪ 𝒫`, with every intermediate signature verified.
pub fn lemma41_chain(h: &Sig) -> Result<ReductionPlan, ReduceError> {
    if h.arity() != 2 {
        return Err(ReduceError::Precondition("H must be binary".into()));
    }
    if !outside_a_p(h) {
        return Err(ReduceError::Precondition(format!("{h:?} is in A ∪ P")));
    }
    let mut b = PlanBuilder::new();
    let name = b.add("H", h.clone());
    b.chain(&name, 0)?;
    Ok(b.finish())
}
