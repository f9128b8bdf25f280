//! Gadgets: instance fragments with designated external variables.

use crate::instance::{contract, CspInstance, DEFAULT_WIDTH_CAP};
use crate::numeric::Field;

use super::{Signature, SignatureError};

/// Default limit on the number of dangling variables.
pub const DEFAULT_DANGLING_LIMIT: usize = 6;

#[derive(Debug, Clone, PartialEq)]
pub struct Gadget<S> {
    pub instance: CspInstance<S>,
    pub dangling: Vec<usize>,
}

impl<S: Field> Gadget<S> {
    pub fn new(instance: CspInstance<S>, dangling: Vec<usize>) -> Result<Self, SignatureError> {
        let g = Gadget { instance, dangling };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SignatureError> {
        self.instance
            .validate()
            .map_err(|e| SignatureError::InvalidGadget(e.to_string()))?;
        let degrees = self.instance.degrees();
        for (i, &v) in self.dangling.iter().enumerate() {
            if v >= self.instance.num_vars {
                return Err(SignatureError::InvalidGadget(format!(
                    "dangling variable {v} out of range"
                )));
            }
            if self.dangling[..i].contains(&v) {
                return Err(SignatureError::InvalidGadget(format!(
                    "dangling variable {v} listed twice"
                )));
            }
            if degrees[v] == 0 {
                return Err(SignatureError::InvalidGadget(format!(
                    "dangling variable {v} occurs in no constraint"
                )));
            }
        }
        Ok(())
    }

    /// Gadget consisting of one constraint with every input dangling.
    pub fn single(name: &str, sig: Signature<S>) -> Self {
        let k = sig.arity();
        let mut inst = CspInstance::new(k);
        inst.add_function(name, sig).expect("fresh instance");
        inst.add_constraint(name, (0..k).collect())
            .expect("arity matches");
        Gadget {
            instance: inst,
            dangling: (0..k).collect(),
        }
    }

    pub fn internal_count(&self) -> usize {
        self.instance.num_vars - self.dangling.len()
    }
}

/// The function a gadget realizes on its dangling variables.
pub fn gadget_signature<S: Field>(g: &Gadget<S>, limit: usize) -> Result<Signature<S>, SignatureError> {
    if g.dangling.len() > limit {
        return Err(SignatureError::TooManyDangling {
            got: g.dangling.len(),
            limit,
        });
    }
    g.validate()?;
    contract(&g.instance, &g.dangling, DEFAULT_WIDTH_CAP)
        .map_err(|e| SignatureError::InvalidGadget(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::ExactComplex;

    type Sig = Signature<ExactComplex>;

    fn q(n: i64, d: i64) -> ExactComplex {
        ExactComplex::from_ratio(n, d)
    }

    #[test]
    fn single_constraint_gadget_is_identity() {
        let h = Sig::from_ints(2, &[1, 2, 3, 4]).unwrap();
        let g = Gadget::single("H", h.clone());
        assert_eq!(gadget_signature(&g, 6).unwrap(), h);
    }

    #[test]
    fn weighted_chain_gadget() {
        // H'(x1,x2) = Σ_{x3} H(x1,x3) H(x3,x2) U(x3), H = ((1,1),(1,2)), U = [1,-1]
        let mut inst = CspInstance::new(3);
        inst.add_function("H", Sig::from_ints(2, &[1, 1, 1, 2]).unwrap())
            .unwrap();
        inst.add_function("U", Sig::from_ints(1, &[1, -1]).unwrap())
            .unwrap();
        inst.add_constraint("H", vec![0, 2]).unwrap();
        inst.add_constraint("H", vec![2, 1]).unwrap();
        inst.add_constraint("U", vec![2]).unwrap();
        let g = Gadget::new(inst, vec![0, 1]).unwrap();
        let (b, c, d) = (q(1, 1), q(1, 1), q(2, 1));
        let bc = b.clone() * c.clone();
        let closed = Sig::binary(
            q(0, 1),
            (bc.clone() - d.clone()).checked_div(&c).unwrap(),
            (bc.clone() - d.clone()).checked_div(&b).unwrap(),
            (bc.clone() * bc.clone() - d.clone() * d).checked_div(&bc).unwrap(),
        );
        assert_eq!(closed, Sig::from_ints(2, &[0, -1, -1, -3]).unwrap());
        assert_eq!(gadget_signature(&g, 6).unwrap(), closed);
    }

    #[test]
    fn product_with_transpose() {
        // H(x1,x2) H(x2,x1) for H = ((0,1),(c,d)) is [0, c, d^2]
        let (c, d) = (3, 5);
        let mut inst = CspInstance::new(2);
        inst.add_function("H", Sig::from_ints(2, &[0, 1, c, d]).unwrap())
            .unwrap();
        inst.add_constraint("H", vec![0, 1]).unwrap();
        inst.add_constraint("H", vec![1, 0]).unwrap();
        let g = Gadget::new(inst, vec![0, 1]).unwrap();
        assert_eq!(
            gadget_signature(&g, 6).unwrap(),
            Sig::symmetric_ints(&[0, c, d * d]).unwrap()
        );
    }

    #[test]
    fn dangling_limit_enforced() {
        let g = Gadget::single("E", Sig::equality(7));
        assert!(matches!(
            gadget_signature(&g, 6),
            Err(SignatureError::TooManyDangling { .. })
        ));
    }

    #[test]
    fn dangling_must_be_constrained() {
        let inst = CspInstance::<ExactComplex>::new(2);
        assert!(Gadget::new(inst, vec![0]).is_err());
    }
}
