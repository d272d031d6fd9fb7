use std::collections::HashMap;
use std::fmt;

use super::Coeff;
use num_traits::One;

/// Handle of a variable in a [`Catalog`].
///
/// The handle packs the canonical ordinal together with the Grassmann parity
/// so monomial arithmetic never has to consult the catalog.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Var(u32);

impl Var {
    pub fn new(ordinal: u32, odd: bool) -> Self {
        Var((ordinal << 1) | odd as u32)
    }

    pub fn ordinal(self) -> usize {
        (self.0 >> 1) as usize
    }

    pub fn is_odd(self) -> bool {
        self.0 & 1 == 1
    }
}

/// Variable families of the extended phase space, listed in canonical order.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarKind {
    /// Original canonical pair `(p_i, q^i)`.
    Xi,
    /// Ghost momentum `P_{alpha_s|a_1..a_{s+1}}`.
    MomentumP,
    /// Ghost `c^{alpha_s|a_1..a_{s+1}}`.
    GhostC,
    /// `lambda_{alpha_s|a_1..a_s}`.
    Lambda,
    /// `pi^{alpha_s|a_1..a_s}`.
    Pi,
    XiPrime,
    MomentumPPrime,
    LambdaPrime,
}

/// Position of a variable inside its canonical pair.
#[derive(Copy, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Role {
    /// Generalized momentum; derivatives are left-handed.
    P,
    /// Generalized coordinate; derivatives are right-handed.
    Q,
    /// Primed resolution coordinate, not part of a canonical pair.
    Primed,
}

#[derive(Copy, Clone, PartialEq, Eq, Debug)]
pub enum Sector {
    /// Original phase space.
    Xi,
    /// Ghost sector `(P, c; lambda, pi)`.
    Ghost,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VariableDescriptor {
    pub name: String,
    pub kind: VarKind,
    pub stage: u32,
    pub base: u32,
    /// Multiplicity `(r, t)` of the Sp(2) indices 1 and 2.
    pub sp2: (u32, u32),
    pub role: Role,
    pub odd: bool,
    pub ngh: i32,
    pub conjugate: Option<Var>,
}

impl VariableDescriptor {
    fn sort_key(&self) -> (VarKind, u32, u32, std::cmp::Reverse<u32>, u32, Role) {
        (
            self.kind,
            self.stage,
            self.base,
            std::cmp::Reverse(self.sp2.0),
            self.sp2.1,
            self.role,
        )
    }

    pub fn rank(&self) -> u32 {
        self.sp2.0 + self.sp2.1
    }
}

/// A canonical pair `(Q, P)` with the weight it carries in the bracket.
///
/// Ghost-sector variables are symmetric-tensor components: the component
/// `(r, t)` of a rank-`n` tensor stands for `C(n, r)` index tuples, so its
/// pair contributes `1 / C(n, r)` to the bracket.
#[derive(Clone, Debug)]
pub struct CanonicalPair {
    pub q: Var,
    pub p: Var,
    pub weight: Coeff,
    pub sector: Sector,
}

/// Lookup key used by the typed accessors of [`Catalog`].
#[derive(Copy, Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarKey {
    pub kind: VarKind,
    pub stage: u32,
    pub base: u32,
    pub sp2: (u32, u32),
    pub role: Role,
}

/// Ordered table of all variables in play.
#[derive(Clone, Debug)]
pub struct Catalog {
    vars: Vec<VariableDescriptor>,
    by_name: HashMap<String, Var>,
    by_key: HashMap<VarKey, Var>,
    pairs: Vec<CanonicalPair>,
    pair_of_q: HashMap<Var, usize>,
    pair_of_p: HashMap<Var, usize>,
}

pub fn binomial(n: u32, k: u32) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k as u64 {
        acc = acc * (n as u64 - i) / (i + 1);
    }
    acc
}

impl Catalog {
    /// Builds a catalog from unordered descriptors. `conjugate` fields are
    /// ignored; pairs are given as `(q_key, p_key)` descriptor indices.
    pub fn from_descriptors(
        mut descs: Vec<VariableDescriptor>,
        pairs: &[(usize, usize, Sector)],
    ) -> Self {
        let mut order: Vec<usize> = (0..descs.len()).collect();
        order.sort_by(|&a, &b| descs[a].sort_key().cmp(&descs[b].sort_key()));
        let mut handle = vec![Var(0); descs.len()];
        for (ordinal, &i) in order.iter().enumerate() {
            handle[i] = Var::new(ordinal as u32, descs[i].odd);
        }
        let mut canon = Vec::new();
        for &(qi, pi, sector) in pairs {
            descs[qi].conjugate = Some(handle[pi]);
            descs[pi].conjugate = Some(handle[qi]);
            let d = &descs[qi];
            let weight = match sector {
                Sector::Xi => Coeff::one(),
                Sector::Ghost => Coeff::new(1.into(), binomial(d.rank(), d.sp2.0).into()),
            };
            canon.push(CanonicalPair {
                q: handle[qi],
                p: handle[pi],
                weight,
                sector,
            });
        }
        canon.sort_by_key(|p| p.q);
        let mut vars = vec![None; descs.len()];
        for (i, d) in descs.into_iter().enumerate() {
            vars[handle[i].ordinal()] = Some(d);
        }
        let vars: Vec<VariableDescriptor> = vars.into_iter().map(Option::unwrap).collect();
        let mut by_name = HashMap::new();
        let mut by_key = HashMap::new();
        for (i, d) in vars.iter().enumerate() {
            let v = Var::new(i as u32, d.odd);
            by_name.insert(d.name.clone(), v);
            by_key.insert(
                VarKey {
                    kind: d.kind,
                    stage: d.stage,
                    base: d.base,
                    sp2: d.sp2,
                    role: d.role,
                },
                v,
            );
        }
        let pair_of_q = canon.iter().enumerate().map(|(i, p)| (p.q, i)).collect();
        let pair_of_p = canon.iter().enumerate().map(|(i, p)| (p.p, i)).collect();
        Catalog {
            vars,
            by_name,
            by_key,
            pairs: canon,
            pair_of_q,
            pair_of_p,
        }
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn vars(&self) -> impl Iterator<Item = Var> + '_ {
        self.vars
            .iter()
            .enumerate()
            .map(|(i, d)| Var::new(i as u32, d.odd))
    }

    pub fn descriptor(&self, v: Var) -> &VariableDescriptor {
        &self.vars[v.ordinal()]
    }

    pub fn name(&self, v: Var) -> &str {
        &self.vars[v.ordinal()].name
    }

    pub fn by_name(&self, name: &str) -> Option<Var> {
        self.by_name.get(name).copied()
    }

    pub fn lookup(&self, key: VarKey) -> Option<Var> {
        self.by_key.get(&key).copied()
    }

    pub fn pairs(&self) -> &[CanonicalPair] {
        &self.pairs
    }

    pub fn pair_with_q(&self, q: Var) -> Option<&CanonicalPair> {
        self.pair_of_q.get(&q).map(|&i| &self.pairs[i])
    }

    pub fn pair_with_p(&self, p: Var) -> Option<&CanonicalPair> {
        self.pair_of_p.get(&p).map(|&i| &self.pairs[i])
    }

    pub fn ngh(&self, v: Var) -> i32 {
        self.vars[v.ordinal()].ngh
    }

    fn get(&self, kind: VarKind, stage: u32, base: u32, sp2: (u32, u32), role: Role) -> Var {
        self.lookup(VarKey {
            kind,
            stage,
            base,
            sp2,
            role,
        })
        .unwrap_or_else(|| {
            panic!("no variable {kind:?} stage {stage} index {base} component {sp2:?}")
        })
    }

    pub fn p(&self, i: u32) -> Var {
        self.get(VarKind::Xi, 0, i, (0, 0), Role::P)
    }

    pub fn q(&self, i: u32) -> Var {
        self.get(VarKind::Xi, 0, i, (0, 0), Role::Q)
    }

    pub fn ghost_p(&self, stage: u32, alpha: u32, r: u32) -> Var {
        self.get(VarKind::MomentumP, stage, alpha, (r, stage + 1 - r), Role::P)
    }

    pub fn ghost_c(&self, stage: u32, alpha: u32, r: u32) -> Var {
        self.get(VarKind::GhostC, stage, alpha, (r, stage + 1 - r), Role::Q)
    }

    pub fn lambda(&self, stage: u32, alpha: u32, r: u32) -> Var {
        self.get(VarKind::Lambda, stage, alpha, (r, stage - r), Role::P)
    }

    pub fn pi(&self, stage: u32, alpha: u32, r: u32) -> Var {
        self.get(VarKind::Pi, stage, alpha, (r, stage - r), Role::Q)
    }

    pub fn xi_prime(&self, j: u32) -> Var {
        self.get(VarKind::XiPrime, 0, j, (0, 0), Role::Primed)
    }

    pub fn ghost_p_prime(&self, stage: u32, alpha: u32, r: u32) -> Var {
        self.get(VarKind::MomentumPPrime, stage, alpha, (r, stage + 1 - r), Role::Primed)
    }

    pub fn lambda_prime(&self, stage: u32, alpha: u32, r: u32) -> Var {
        self.get(VarKind::LambdaPrime, stage, alpha, (r, stage - r), Role::Primed)
    }

    pub fn has_primed(&self) -> bool {
        self.vars.iter().any(|d| d.role == Role::Primed)
    }

    pub fn is_ghost(&self, v: Var) -> bool {
        matches!(self.descriptor(v).kind, VarKind::GhostC | VarKind::Pi)
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.ordinal())
    }
}

/// Description of the extended phase space: original pairs and the sizes and
/// parities of the constraint families at every stage.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhaseSpaceLayout {
    /// `(p name, q name, odd)` per original pair.
    pub pairs: Vec<(String, String, bool)>,
    /// Parities `epsilon_{alpha_k}` of every stage `k = 0..=L`.
    pub stage_parities: Vec<Vec<bool>>,
}

impl PhaseSpaceLayout {
    pub fn stages(&self) -> usize {
        self.stage_parities.len()
    }

    /// Reducibility order `L`; `None` when there are no constraints.
    pub fn order(&self) -> Option<u32> {
        self.stage_parities.len().checked_sub(1).map(|l| l as u32)
    }

    pub fn stage_size(&self, k: usize) -> usize {
        self.stage_parities.get(k).map_or(0, Vec::len)
    }

    fn ghost_descriptors(&self, descs: &mut Vec<VariableDescriptor>, primed: bool) -> Vec<(usize, usize, Sector)> {
        let mut pairs = Vec::new();
        for (s, parities) in self.stage_parities.iter().enumerate() {
            let s32 = s as u32;
            for (alpha, &eps) in parities.iter().enumerate() {
                let alpha = alpha as u32;
                let odd_pc = eps ^ ((s + 1) % 2 == 1);
                let odd_lp = eps ^ (s % 2 == 1);
                for r in 0..=s32 + 1 {
                    let t = s32 + 1 - r;
                    if primed {
                        descs.push(VariableDescriptor {
                            name: format!("P'{s}_{}_{r}{t}", alpha + 1),
                            kind: VarKind::MomentumPPrime,
                            stage: s32,
                            base: alpha,
                            sp2: (r, t),
                            role: Role::Primed,
                            odd: odd_pc,
                            ngh: -(s32 as i32 + 1),
                            conjugate: None,
                        });
                        continue;
                    }
                    let pi = descs.len();
                    descs.push(VariableDescriptor {
                        name: format!("P{s}_{}_{r}{t}", alpha + 1),
                        kind: VarKind::MomentumP,
                        stage: s32,
                        base: alpha,
                        sp2: (r, t),
                        role: Role::P,
                        odd: odd_pc,
                        ngh: -(s32 as i32 + 1),
                        conjugate: None,
                    });
                    let qi = descs.len();
                    descs.push(VariableDescriptor {
                        name: format!("c{s}_{}_{r}{t}", alpha + 1),
                        kind: VarKind::GhostC,
                        stage: s32,
                        base: alpha,
                        sp2: (r, t),
                        role: Role::Q,
                        odd: odd_pc,
                        ngh: s32 as i32 + 1,
                        conjugate: None,
                    });
                    pairs.push((qi, pi, Sector::Ghost));
                }
                for r in 0..=s32 {
                    let t = s32 - r;
                    if primed {
                        descs.push(VariableDescriptor {
                            name: format!("l'{s}_{}_{r}{t}", alpha + 1),
                            kind: VarKind::LambdaPrime,
                            stage: s32,
                            base: alpha,
                            sp2: (r, t),
                            role: Role::Primed,
                            odd: odd_lp,
                            ngh: -(s32 as i32 + 2),
                            conjugate: None,
                        });
                        continue;
                    }
                    let pi = descs.len();
                    descs.push(VariableDescriptor {
                        name: format!("l{s}_{}_{r}{t}", alpha + 1),
                        kind: VarKind::Lambda,
                        stage: s32,
                        base: alpha,
                        sp2: (r, t),
                        role: Role::P,
                        odd: odd_lp,
                        ngh: -(s32 as i32 + 2),
                        conjugate: None,
                    });
                    let qi = descs.len();
                    descs.push(VariableDescriptor {
                        name: format!("pi{s}_{}_{r}{t}", alpha + 1),
                        kind: VarKind::Pi,
                        stage: s32,
                        base: alpha,
                        sp2: (r, t),
                        role: Role::Q,
                        odd: odd_lp,
                        ngh: s32 as i32 + 2,
                        conjugate: None,
                    });
                    pairs.push((qi, pi, Sector::Ghost));
                }
            }
        }
        pairs
    }

    fn descriptors(&self) -> (Vec<VariableDescriptor>, Vec<(usize, usize, Sector)>) {
        let mut descs = Vec::new();
        let mut pairs = Vec::new();
        for (i, (p, q, odd)) in self.pairs.iter().enumerate() {
            let pi = descs.len();
            descs.push(VariableDescriptor {
                name: p.clone(),
                kind: VarKind::Xi,
                stage: 0,
                base: i as u32,
                sp2: (0, 0),
                role: Role::P,
                odd: *odd,
                ngh: 0,
                conjugate: None,
            });
            let qi = descs.len();
            descs.push(VariableDescriptor {
                name: q.clone(),
                kind: VarKind::Xi,
                stage: 0,
                base: i as u32,
                sp2: (0, 0),
                role: Role::Q,
                odd: *odd,
                ngh: 0,
                conjugate: None,
            });
            pairs.push((qi, pi, Sector::Xi));
        }
        pairs.extend(self.ghost_descriptors(&mut descs, false));
        (descs, pairs)
    }

    /// Catalog of the extended phase space `(xi; P, c; lambda, pi)`.
    pub fn catalog(&self) -> Catalog {
        let (descs, pairs) = self.descriptors();
        Catalog::from_descriptors(descs, &pairs)
    }

    /// Catalog extended by the primed resolution coordinates. `xi_prime`
    /// lists `(name, odd)` for each new original-space coordinate.
    ///
    /// Primed variables sort after every unprimed family, so handles of
    /// unprimed variables coincide with those of [`Self::catalog`].
    pub fn primed_catalog(&self, xi_prime: &[(String, bool)]) -> Catalog {
        let (mut descs, pairs) = self.descriptors();
        for (j, (name, odd)) in xi_prime.iter().enumerate() {
            descs.push(VariableDescriptor {
                name: name.clone(),
                kind: VarKind::XiPrime,
                stage: 0,
                base: j as u32,
                sp2: (0, 0),
                role: Role::Primed,
                odd: *odd,
                ngh: 0,
                conjugate: None,
            });
        }
        self.ghost_descriptors(&mut descs, true);
        Catalog::from_descriptors(descs, &pairs)
    }
}
