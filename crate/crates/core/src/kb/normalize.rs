use std::collections::BTreeSet;

use super::{name, AnnotatedAxiom, Axiom, Name, Role, RoleExpr};
use crate::semiring::Monomial;

/// Name of the fresh role standing for the inverse of `role`.
pub fn inverse_name(role: &str) -> Name {
    name(&format!("{role}__inv"))
}

fn is_bridge(ax: &AnnotatedAxiom) -> bool {
    match &ax.axiom {
        Axiom::Role {
            lhs,
            rhs: RoleExpr::Basic(rhs),
        } => {
            (lhs.inverse && !rhs.inverse && rhs.name == inverse_name(&lhs.name))
                || (!lhs.inverse && rhs.inverse && lhs.name == inverse_name(&rhs.name))
        }
        _ => false,
    }
}

/// Confines inverse roles to the pair `R⁻ ⊑ R̄`, `R̄ ⊑ R⁻` for every role `R`
/// used inversely, replacing all other occurrences of `R⁻` by `R̄`.
///
/// The two bridging inclusions carry the identity annotation, so an inverse
/// step contributes nothing to provenance. Idempotent.
pub fn normalize_inverses(onto: &[AnnotatedAxiom]) -> Vec<AnnotatedAxiom> {
    let mut inverted: BTreeSet<Name> = BTreeSet::new();
    for ax in onto {
        for r in ax.axiom.roles() {
            if r.inverse {
                inverted.insert(r.name.clone());
            }
        }
    }
    if inverted.is_empty() {
        return onto.to_vec();
    }
    let mut out = Vec::new();
    for ax in onto {
        if is_bridge(ax) {
            continue;
        }
        let axiom = ax.axiom.map_roles(|r| {
            if r.inverse {
                Role::named(inverse_name(&r.name))
            } else {
                r.clone()
            }
        });
        let rewritten = AnnotatedAxiom::new(axiom, ax.annotation.clone());
        if !out.contains(&rewritten) {
            out.push(rewritten);
        }
    }
    for r in inverted {
        let bar = Role::named(inverse_name(&r));
        out.push(AnnotatedAxiom::new(
            Axiom::Role {
                lhs: Role::inv(r.clone()),
                rhs: RoleExpr::Basic(bar.clone()),
            },
            Monomial::one(),
        ));
        out.push(AnnotatedAxiom::new(
            Axiom::Role {
                lhs: bar,
                rhs: RoleExpr::Basic(Role::inv(r)),
            },
            Monomial::one(),
        ));
    }
    out
}
