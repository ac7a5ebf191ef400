//! Particle and pair bookkeeping for protocol runs.
//!
//! Every photon in a run lives here: data-pair halves, check-pair halves
//! and decoy photons. Pairs that stay within the Bell family are tracked by
//! their two-bit code and swapped with the XOR algebra; anything an
//! attacker collapses out of the family drops to explicit eigenstates and
//! is handled through the statevector engine, so the physics stays honest
//! on every path.

use rand::Rng;

use crate::bell::{swap_sample, BellCode};
use crate::params::PartyId;
use crate::statevector::{bell_measure_pure, measure_decoy, Basis, DecoyState, Statevector};

/// Handle to one photon in the registry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ParticleId(usize);

/// What a particle ended up as. Every particle must leave `Pending` by the
/// end of a run: measured somewhere, or discarded when the run aborted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fate {
    Pending,
    Measured,
    Discarded,
}

#[derive(Debug, Clone, Copy)]
enum Attachment {
    /// Member `slot` (0 or 1) of the pair at `pair_index`.
    Pair { pair_index: usize, slot: u8 },
    /// Definite single-qubit eigenstate, no entanglement left.
    Lone(DecoyState),
}

#[derive(Debug)]
struct ParticleInfo {
    attach: Attachment,
    fate: Fate,
    holder: Option<PartyId>,
}

#[derive(Debug)]
struct PairInfo {
    members: [ParticleId; 2],
    code: BellCode,
    live: bool,
}

/// Tallies from [`PairRegistry::audit`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegistryAudit {
    pub total: usize,
    pub measured: usize,
    pub discarded: usize,
    pub pending: usize,
}

/// Arena of particles and Bell pairs for one protocol run.
#[derive(Debug, Default)]
pub struct PairRegistry {
    particles: Vec<ParticleInfo>,
    pairs: Vec<PairInfo>,
}

impl PairRegistry {
    pub fn new() -> PairRegistry {
        PairRegistry::default()
    }

    fn add_particle(&mut self, attach: Attachment, holder: PartyId) -> ParticleId {
        let id = ParticleId(self.particles.len());
        self.particles.push(ParticleInfo {
            attach,
            fate: Fate::Pending,
            holder: Some(holder),
        });
        id
    }

    /// Prepare a fresh entangled pair in the Bell state `code`, held by
    /// `holder`. Returns the two halves in order.
    pub fn new_pair(&mut self, code: BellCode, holder: PartyId) -> [ParticleId; 2] {
        let pair_index = self.pairs.len();
        let a = self.add_particle(
            Attachment::Pair {
                pair_index,
                slot: 0,
            },
            holder,
        );
        let b = self.add_particle(
            Attachment::Pair {
                pair_index,
                slot: 1,
            },
            holder,
        );
        self.pairs.push(PairInfo {
            members: [a, b],
            code,
            live: true,
        });
        [a, b]
    }

    /// Prepare a single decoy photon.
    pub fn new_decoy(&mut self, state: DecoyState, holder: PartyId) -> ParticleId {
        self.add_particle(Attachment::Lone(state), holder)
    }

    pub fn holder(&self, p: ParticleId) -> Option<PartyId> {
        self.particles[p.0].holder
    }

    pub fn set_holder(&mut self, p: ParticleId, holder: Option<PartyId>) {
        self.particles[p.0].holder = holder;
    }

    pub fn fate(&self, p: ParticleId) -> Fate {
        self.particles[p.0].fate
    }

    /// Bell code of the live pair `p` belongs to, if it is still entangled.
    pub fn pair_code(&self, p: ParticleId) -> Option<BellCode> {
        match self.particles[p.0].attach {
            Attachment::Pair { pair_index, .. } => Some(self.pairs[pair_index].code),
            Attachment::Lone(_) => None,
        }
    }

    /// Eigenstate of `p` if it has collapsed out of its pair.
    pub fn lone_state(&self, p: ParticleId) -> Option<DecoyState> {
        match self.particles[p.0].attach {
            Attachment::Lone(state) => Some(state),
            Attachment::Pair { .. } => None,
        }
    }

    pub fn same_pair(&self, p: ParticleId, q: ParticleId) -> bool {
        match (self.particles[p.0].attach, self.particles[q.0].attach) {
            (Attachment::Pair { pair_index: a, .. }, Attachment::Pair { pair_index: b, .. }) => {
                a == b
            }
            _ => false,
        }
    }

    /// The other half of `p`'s pair, if `p` is still paired.
    pub fn partner(&self, p: ParticleId) -> Option<ParticleId> {
        match self.particles[p.0].attach {
            Attachment::Pair { pair_index, slot } => {
                Some(self.pairs[pair_index].members[1 - slot as usize])
            }
            Attachment::Lone(_) => None,
        }
    }

    fn dissolve(&mut self, pair_index: usize) {
        self.pairs[pair_index].live = false;
    }

    fn repair(&mut self, a: ParticleId, b: ParticleId, code: BellCode) {
        let pair_index = self.pairs.len();
        self.pairs.push(PairInfo {
            members: [a, b],
            code,
            live: true,
        });
        self.particles[a.0].attach = Attachment::Pair {
            pair_index,
            slot: 0,
        };
        self.particles[b.0].attach = Attachment::Pair {
            pair_index,
            slot: 1,
        };
    }

    fn make_lone(&mut self, p: ParticleId, state: DecoyState) {
        self.particles[p.0].attach = Attachment::Lone(state);
    }

    /// Bell-basis measurement of particles `p` and `q`.
    ///
    /// Halves of the same collapsed pair read out their code without
    /// disturbing anything (the idempotence the third party exploits when
    /// relabelling its sequences). Halves of two distinct Bell pairs swap
    /// entanglement by the XOR law, re-pairing the leftover partners. Any
    /// configuration involving collapsed photons falls back to an explicit
    /// statevector projection.
    pub fn bell_measure<R: Rng + ?Sized>(
        &mut self,
        p: ParticleId,
        q: ParticleId,
        rng: &mut R,
    ) -> BellCode {
        assert_ne!(p, q, "cannot Bell-measure a particle against itself");
        let outcome = match (self.particles[p.0].attach, self.particles[q.0].attach) {
            (Attachment::Pair { pair_index: ia, .. }, Attachment::Pair { pair_index: ib, .. })
                if ia == ib =>
            {
                self.pairs[ia].code
            }
            (Attachment::Pair { pair_index: ia, .. }, Attachment::Pair { pair_index: ib, .. }) => {
                let (a, b) = (self.pairs[ia].code, self.pairs[ib].code);
                let p_partner = self.partner(p).unwrap();
                let q_partner = self.partner(q).unwrap();
                let (m, n) = swap_sample(a, b, rng);
                self.dissolve(ia);
                self.dissolve(ib);
                self.repair(p, q, m);
                self.repair(p_partner, q_partner, n);
                m
            }
            (Attachment::Pair { pair_index, slot }, Attachment::Lone(e)) => {
                let partner = self.pairs[pair_index].members[1 - slot as usize];
                let code = self.pairs[pair_index].code;
                let m = self.project_pair_with_lone(code, slot, e, partner, rng);
                self.dissolve(pair_index);
                self.repair(p, q, m);
                m
            }
            (Attachment::Lone(e), Attachment::Pair { pair_index, slot }) => {
                let partner = self.pairs[pair_index].members[1 - slot as usize];
                let code = self.pairs[pair_index].code;
                // Bell outcomes are symmetric in the measured pair, so reuse
                // the same projection with the lone photon on the other side.
                let m = self.project_pair_with_lone(code, slot, e, partner, rng);
                self.dissolve(pair_index);
                self.repair(p, q, m);
                m
            }
            (Attachment::Lone(ep), Attachment::Lone(eq)) => {
                let joint = ep
                    .to_statevector()
                    .tensor(&eq.to_statevector())
                    .expect("two qubits fit");
                let (m, _) = bell_measure_pure(&joint, rng).expect("product state is normalized");
                self.repair(p, q, m);
                m
            }
        };
        self.particles[p.0].fate = Fate::Measured;
        self.particles[q.0].fate = Fate::Measured;
        outcome
    }

    /// Bell-measure one half of the pair `code` against a lone photon in
    /// state `e`; the pair's other half collapses to an eigenstate.
    fn project_pair_with_lone<R: Rng + ?Sized>(
        &mut self,
        code: BellCode,
        measured_slot: u8,
        e: DecoyState,
        partner: ParticleId,
        rng: &mut R,
    ) -> BellCode {
        // Qubit layout: pair members in slot order (0, 1), lone photon last.
        let joint = Statevector::bell(code)
            .tensor(&e.to_statevector())
            .expect("three qubits fit");
        let measured_qubit = measured_slot as usize;
        let partner_qubit = 1 - measured_qubit;
        let mut draw = rng.random::<f64>();
        let mut picked = None;
        for m in BellCode::ALL {
            let (prob, residual) = joint.project_bell(measured_qubit, 2, m, &[partner_qubit]);
            if draw < prob || m == BellCode::new(3) {
                let residual = residual.expect("outcome with nonzero probability has a residual");
                let state = residual
                    .as_eigenstate()
                    .expect("partner of a swapped lone photon is an eigenstate");
                picked = Some((m, state));
                break;
            }
            draw -= prob;
        }
        let (m, state) = picked.expect("Bell outcomes cover the distribution");
        self.make_lone(partner, state);
        m
    }

    /// Measure a single photon in `basis`, collapsing whatever entanglement
    /// it still had. Returns the observed bit.
    pub fn measure_single<R: Rng + ?Sized>(
        &mut self,
        p: ParticleId,
        basis: Basis,
        rng: &mut R,
    ) -> bool {
        let bit = match self.particles[p.0].attach {
            Attachment::Lone(e) => {
                let bit = measure_decoy(e, basis, rng);
                self.make_lone(p, DecoyState::from_basis_bit(basis, bit));
                bit
            }
            Attachment::Pair { pair_index, slot } => {
                let code = self.pairs[pair_index].code;
                let members = self.pairs[pair_index].members;
                let mut sv = Statevector::bell(code);
                let bit = sv.measure_qubit(slot as usize, basis, rng);
                let (s0, s1) = factor_product_pair(&sv)
                    .expect("measuring half a Bell pair leaves an eigenstate product");
                self.dissolve(pair_index);
                self.make_lone(members[0], s0);
                self.make_lone(members[1], s1);
                bit
            }
        };
        self.particles[p.0].fate = Fate::Measured;
        bit
    }

    /// Mark every still-pending particle as discarded (abort path).
    pub fn discard_pending(&mut self) {
        for info in &mut self.particles {
            if info.fate == Fate::Pending {
                info.fate = Fate::Discarded;
            }
        }
    }

    pub fn audit(&self) -> RegistryAudit {
        let mut audit = RegistryAudit {
            total: self.particles.len(),
            measured: 0,
            discarded: 0,
            pending: 0,
        };
        for info in &self.particles {
            match info.fate {
                Fate::Measured => audit.measured += 1,
                Fate::Discarded => audit.discarded += 1,
                Fate::Pending => audit.pending += 1,
            }
        }
        audit
    }
}

/// Split a two-qubit product state into its single-qubit eigenstate
/// factors, if it is such a product.
fn factor_product_pair(sv: &Statevector) -> Option<(DecoyState, DecoyState)> {
    for a in DecoyState::ALL {
        for b in DecoyState::ALL {
            let product = a.to_statevector().tensor(&b.to_statevector()).ok()?;
            if sv.fidelity(&product) >= 1.0 - 1e-9 {
                return Some((a, b));
            }
        }
    }
    None
}
