//! Finite representations of linear term functions of the regular languages.
//!
//! If the parameter is not below a star the function is `x ↦ a x b + c`
//! ([`KleeneForm::Linear`]); otherwise it is `x ↦ α (a x b + c)* γ + δ`
//! ([`KleeneForm::Starred`]). Both shapes are closed under composition; the
//! starred one needs the identity
//! `(α β* γ + δ)* = δ* α (β + γ δ* α)* γ δ* + δ*`.

/// Operations of the regular languages over some representation `E`.
pub trait KleeneOps {
    type E: Clone;

    fn empty(&mut self) -> Self::E;
    fn epsilon(&mut self) -> Self::E;
    fn union(&mut self, x: &Self::E, y: &Self::E) -> Self::E;
    fn concat(&mut self, x: &Self::E, y: &Self::E) -> Self::E;
    fn star(&mut self, x: &Self::E) -> Self::E;
    /// The same value, taken over unchanged into a new position.
    fn copy(&mut self, x: &Self::E) -> Self::E {
        x.clone()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum KleeneForm<E> {
    /// `x ↦ a x b + c`.
    Linear { a: E, b: E, c: E },
    /// `x ↦ alpha (a x b + c)* gamma + delta`.
    Starred {
        a: E,
        b: E,
        c: E,
        alpha: E,
        gamma: E,
        delta: E,
    },
}

impl<E> KleeneForm<E> {
    pub fn is_starred(&self) -> bool {
        matches!(self, KleeneForm::Starred { .. })
    }

    /// Coefficients in the order `a, b, c` or `a, b, c, alpha, gamma, delta`.
    pub fn coefficients(&self) -> Vec<&E> {
        match self {
            KleeneForm::Linear { a, b, c } => vec![a, b, c],
            KleeneForm::Starred { a, b, c, alpha, gamma, delta } => vec![a, b, c, alpha, gamma, delta],
        }
    }
}

fn cat3<K: KleeneOps>(k: &mut K, x: &K::E, y: &K::E, z: &K::E) -> K::E {
    let xy = k.concat(x, y);
    k.concat(&xy, z)
}

/// `x ↦ x`.
pub fn identity<K: KleeneOps>(k: &mut K) -> KleeneForm<K::E> {
    let (a, b, c) = (k.epsilon(), k.epsilon(), k.empty());
    KleeneForm::Linear { a, b, c }
}

/// `x ↦ x + c`; union is commutative, so also `x ↦ c + x`.
pub fn union_with<K: KleeneOps>(k: &mut K, c: &K::E) -> KleeneForm<K::E> {
    let (a, b) = (k.epsilon(), k.epsilon());
    KleeneForm::Linear { a, b, c: k.copy(c) }
}

/// `x ↦ x b`.
pub fn concat_right<K: KleeneOps>(k: &mut K, b: &K::E) -> KleeneForm<K::E> {
    let (a, c) = (k.epsilon(), k.empty());
    KleeneForm::Linear { a, b: k.copy(b), c }
}

/// `x ↦ a x`.
pub fn concat_left<K: KleeneOps>(k: &mut K, a: &K::E) -> KleeneForm<K::E> {
    let (b, c) = (k.epsilon(), k.empty());
    KleeneForm::Linear { a: k.copy(a), b, c }
}

/// `(a x b + c)*` as `ε (a x b + c)* ε + ε`.
pub fn star_linear<K: KleeneOps>(k: &mut K, a: &K::E, b: &K::E, c: &K::E) -> KleeneForm<K::E> {
    KleeneForm::Starred {
        a: k.copy(a),
        b: k.copy(b),
        c: k.copy(c),
        alpha: k.epsilon(),
        gamma: k.epsilon(),
        delta: k.epsilon(),
    }
}

/// `(α (a x b + c)* γ + δ)* = δ* α (a x b + c + γ δ* α)* γ δ* + δ*`.
#[allow(clippy::too_many_arguments)]
pub fn dagger_star<K: KleeneOps>(
    k: &mut K,
    a: &K::E,
    b: &K::E,
    c: &K::E,
    alpha: &K::E,
    gamma: &K::E,
    delta: &K::E,
) -> KleeneForm<K::E> {
    let ds = k.star(delta);
    let new_alpha = k.concat(&ds, alpha);
    let loop_back = cat3(k, gamma, &ds, alpha);
    let new_c = k.union(c, &loop_back);
    let new_gamma = k.concat(gamma, &ds);
    KleeneForm::Starred {
        a: k.copy(a),
        b: k.copy(b),
        c: new_c,
        alpha: new_alpha,
        gamma: new_gamma,
        delta: k.copy(&ds),
    }
}

/// Star of any form.
pub fn star_form<K: KleeneOps>(k: &mut K, f: &KleeneForm<K::E>) -> KleeneForm<K::E> {
    match f {
        KleeneForm::Linear { a, b, c } => star_linear(k, a, b, c),
        KleeneForm::Starred { a, b, c, alpha, gamma, delta } => dagger_star(k, a, b, c, alpha, gamma, delta),
    }
}

/// `x ↦ outer(inner(x))`.
pub fn compose_forms<K: KleeneOps>(
    k: &mut K,
    outer: &KleeneForm<K::E>,
    inner: &KleeneForm<K::E>,
) -> KleeneForm<K::E> {
    use KleeneForm::*;
    match (outer, inner) {
        (Linear { a: a1, b: b1, c: c1 }, Linear { a: a2, b: b2, c: c2 }) => {
            let a = k.concat(a1, a2);
            let b = k.concat(b2, b1);
            let moved = cat3(k, a1, c2, b1);
            let c = k.union(&moved, c1);
            Linear { a, b, c }
        }
        // a (α β* γ + δ) b + c = (a α) β* (γ b) + (a δ b + c)
        (Linear { a, b, c }, Starred { a: ai, b: bi, c: ci, alpha, gamma, delta }) => {
            let new_alpha = k.concat(a, alpha);
            let new_gamma = k.concat(gamma, b);
            let moved = cat3(k, a, delta, b);
            let new_delta = k.union(&moved, c);
            Starred {
                a: k.copy(ai),
                b: k.copy(bi),
                c: k.copy(ci),
                alpha: new_alpha,
                gamma: new_gamma,
                delta: new_delta,
            }
        }
        // α (a (a' x b' + c') b + c)* γ + δ
        (Starred { a, b, c, alpha, gamma, delta }, Linear { a: ai, b: bi, c: ci }) => {
            let new_a = k.concat(a, ai);
            let new_b = k.concat(bi, b);
            let moved = cat3(k, a, ci, b);
            let new_c = k.union(&moved, c);
            Starred {
                a: new_a,
                b: new_b,
                c: new_c,
                alpha: k.copy(alpha),
                gamma: k.copy(gamma),
                delta: k.copy(delta),
            }
        }
        (
            Starred { a: a2, b: b2, c: c2, alpha: alpha2, gamma: gamma2, delta: delta2 },
            Starred { a: a1, b: b1, c: c1, alpha: alpha1, gamma: gamma1, delta: delta1 },
        ) => {
            // a2 t1(x) b2 + c2 = α' β'* γ' + δ' with β' = a1 x b1 + c1
            let alpha_p = k.concat(a2, alpha1);
            let gamma_p = k.concat(gamma1, b2);
            let inner_delta = cat3(k, a2, delta1, b2);
            let delta_p = k.union(&inner_delta, c2);
            let ds = k.star(&delta_p);
            let alpha = cat3(k, alpha2, &ds, &alpha_p);
            let loop_back = cat3(k, &gamma_p, &ds, &alpha_p);
            let c = k.union(c1, &loop_back);
            let gamma = cat3(k, &gamma_p, &ds, gamma2);
            let skip = cat3(k, alpha2, &ds, gamma2);
            let delta = k.union(&skip, delta2);
            Starred {
                a: k.copy(a1),
                b: k.copy(b1),
                c,
                alpha,
                gamma,
                delta,
            }
        }
    }
}

/// `F(v)`.
pub fn apply_form<K: KleeneOps>(k: &mut K, f: &KleeneForm<K::E>, v: &K::E) -> K::E {
    match f {
        KleeneForm::Linear { a, b, c } => {
            let avb = cat3(k, a, v, b);
            k.union(&avb, c)
        }
        KleeneForm::Starred { a, b, c, alpha, gamma, delta } => {
            let avb = cat3(k, a, v, b);
            let beta = k.union(&avb, c);
            let bs = k.star(&beta);
            let body = cat3(k, alpha, &bs, gamma);
            k.union(&body, delta)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regex::equiv::{Arena, ReId, DEFAULT_STATE_BUDGET};

    fn letters(a: &mut Arena, names: &str) -> Vec<ReId> {
        names.chars().map(|c| a.letter(&c.to_string())).collect()
    }

    fn same(a: &mut Arena, x: ReId, y: ReId) -> bool {
        a.equivalent(x, y, DEFAULT_STATE_BUDGET).unwrap()
    }

    #[test]
    fn composition_of_linear_forms() {
        let mut k = Arena::new();
        let l = letters(&mut k, "abcdefg");
        let f = KleeneForm::Linear { a: l[0], b: l[1], c: l[2] };
        let g = KleeneForm::Linear { a: l[3], b: l[4], c: l[5] };
        let fg = compose_forms(&mut k, &f, &g);
        let KleeneForm::Linear { a, b, c } = fg else { panic!() };
        assert_eq!(a, k.concat(l[0], l[3]));
        assert_eq!(b, k.concat(l[4], l[1]));
        let x = l[6];
        let direct = {
            let inner = apply_form(&mut k, &g, &x);
            apply_form(&mut k, &f, &inner)
        };
        let composed = apply_form(&mut k, &fg, &x);
        assert!(same(&mut k, direct, composed));
        let _ = c;
    }

    #[test]
    fn identity_is_neutral() {
        let mut k = Arena::new();
        let l = letters(&mut k, "abcx");
        let f = KleeneForm::Linear { a: l[0], b: l[1], c: l[2] };
        let id = identity(&mut k);
        let left = compose_forms(&mut k, &id, &f);
        let v1 = apply_form(&mut k, &left, &l[3]);
        let v2 = apply_form(&mut k, &f, &l[3]);
        assert!(same(&mut k, v1, v2));
    }

    #[test]
    fn starring_matches_closure() {
        let mut k = Arena::new();
        let l = letters(&mut k, "abcdefghx");
        let lin = KleeneForm::Linear { a: l[0], b: l[1], c: l[2] };
        let st = KleeneForm::Starred { a: l[0], b: l[1], c: l[2], alpha: l[3], gamma: l[4], delta: l[5] };
        for f in [lin, st] {
            let sf = star_form(&mut k, &f);
            assert!(sf.is_starred());
            for v in [l[8], l[6], Arena::EPSILON] {
                let fv = apply_form(&mut k, &f, &v);
                let direct = k.star(fv);
                let via = apply_form(&mut k, &sf, &v);
                assert!(same(&mut k, direct, via));
            }
        }
    }

    #[test]
    fn all_composition_pairs() {
        let mut k = Arena::new();
        let l = letters(&mut k, "abcdefghijklx");
        let lin1 = KleeneForm::Linear { a: l[0], b: l[1], c: l[2] };
        let st1 = KleeneForm::Starred { a: l[0], b: l[1], c: l[2], alpha: l[3], gamma: l[4], delta: l[5] };
        let lin2 = KleeneForm::Linear { a: l[6], b: l[7], c: l[8] };
        let st2 = KleeneForm::Starred { a: l[6], b: l[7], c: l[8], alpha: l[9], gamma: l[10], delta: l[11] };
        for outer in [lin2, st2] {
            for inner in [lin1, st1] {
                let fg = compose_forms(&mut k, &outer, &inner);
                assert_eq!(fg.is_starred(), outer.is_starred() || inner.is_starred());
                for v in [l[12], Arena::EPSILON, Arena::EMPTY] {
                    let iv = apply_form(&mut k, &inner, &v);
                    let direct = apply_form(&mut k, &outer, &iv);
                    let via = apply_form(&mut k, &fg, &v);
                    assert!(same(&mut k, direct, via));
                }
            }
        }
    }
}
