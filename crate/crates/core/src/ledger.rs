// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Resource balances, channel-use meters and resource-inequality checks.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::network::NodeId;
use crate::trace::EventId;

/// A resource kind. Stocks are held as balances; channel uses are metered.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum Species {
    /// Shared Bell pair.
    Qq,
    /// Shared random bit.
    Cc,
    /// One use of a classical bit channel.
    ClassicalBit,
    /// One use of a qubit channel.
    QuantumBit,
    /// Multiparty or derived species such as GHZ, W or a nonlocal gate.
    Named(String),
}

impl Species {
    pub fn named(name: &str) -> Self {
        Species::Named(name.to_owned())
    }

    /// Channel uses carry a direction and are never stocked.
    pub fn is_channel(&self) -> bool {
        matches!(self, Species::ClassicalBit | Species::QuantumBit)
    }

    pub fn label(&self) -> &str {
        match self {
            Species::Qq => "[qq]",
            Species::Cc => "[cc]",
            Species::ClassicalBit => "[c→c]",
            Species::QuantumBit => "[q→q]",
            Species::Named(s) => s,
        }
    }
}

impl fmt::Display for Species {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl From<Species> for String {
    fn from(s: Species) -> String {
        s.label().to_owned()
    }
}

impl TryFrom<String> for Species {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        Ok(match s.as_str() {
            "[qq]" | "qq" => Species::Qq,
            "[cc]" | "cc" => Species::Cc,
            "[c→c]" | "[c->c]" | "c->c" => Species::ClassicalBit,
            "[q→q]" | "[q->q]" | "q->q" => Species::QuantumBit,
            "" => return Err("empty species label".into()),
            _ => Species::Named(s),
        })
    }
}

/// Party set in canonical form: sorted for stocks, ordered for channels.
pub fn party_key(species: &Species, parties: &[NodeId]) -> Vec<NodeId> {
    let mut p = parties.to_vec();
    if !species.is_channel() {
        p.sort_unstable();
        p.dedup();
    }
    p
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// Stock handed out by the network endowment.
    Endowment,
    /// Stock generated by a protocol.
    Produced,
    /// Stock used up.
    Debit,
    /// Metered channel use.
    ChannelUse,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub event: EventId,
    pub species: Species,
    pub parties: Vec<NodeId>,
    pub kind: EntryKind,
    pub amount: u64,
}

/// A non-stock effect achieved by a protocol, e.g. one qubit moved.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Effect {
    pub event: EventId,
    pub species: Species,
    pub parties: Vec<NodeId>,
    pub amount: u64,
}

type Key = (Species, Vec<NodeId>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Ledger {
    balances: BTreeMap<Key, u64>,
    history: Vec<LedgerEntry>,
    effects: Vec<Effect>,
    exempt: Vec<Species>,
}

impl Ledger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Debits of `species` never fail (infinite endowment).
    pub fn exempt(&mut self, species: Species) {
        if !self.exempt.contains(&species) {
            self.exempt.push(species);
        }
    }

    pub fn is_exempt(&self, species: &Species) -> bool {
        self.exempt.contains(species)
    }

    fn check_amount(amount: u64) -> Result<()> {
        if amount == 0 {
            Err(Error::BadParams("ledger amounts must be at least 1".into()))
        } else {
            Ok(())
        }
    }

    pub fn credit(
        &mut self,
        species: Species,
        parties: &[NodeId],
        amount: u64,
        event: EventId,
        kind: EntryKind,
    ) -> Result<()> {
        Self::check_amount(amount)?;
        if species.is_channel() || !matches!(kind, EntryKind::Endowment | EntryKind::Produced) {
            return Err(Error::BadParams(format!(
                "cannot credit {species} as {kind:?}"
            )));
        }
        let parties = party_key(&species, parties);
        *self
            .balances
            .entry((species.clone(), parties.clone()))
            .or_default() += amount;
        if kind == EntryKind::Produced {
            self.effects.push(Effect {
                event,
                species: species.clone(),
                parties: parties.clone(),
                amount,
            });
        }
        self.history.push(LedgerEntry {
            event,
            species,
            parties,
            kind,
            amount,
        });
        Ok(())
    }

    pub fn debit(
        &mut self,
        species: Species,
        parties: &[NodeId],
        amount: u64,
        event: EventId,
    ) -> Result<()> {
        Self::check_amount(amount)?;
        let parties = party_key(&species, parties);
        let key = (species.clone(), parties.clone());
        let have = self.balances.get(&key).copied().unwrap_or(0);
        if have < amount && !self.is_exempt(&species) {
            return Err(Error::InsufficientBalance {
                species: format!("{species}{}", party_string(&parties, &|n| n.to_string())),
                have,
                need: amount,
            });
        }
        self.balances.insert(key, have.saturating_sub(amount));
        self.history.push(LedgerEntry {
            event,
            species,
            parties,
            kind: EntryKind::Debit,
            amount,
        });
        Ok(())
    }

    /// Meter `amount` uses of a directed channel from `from` to `to`.
    pub fn channel_use(
        &mut self,
        species: Species,
        from: NodeId,
        to: NodeId,
        amount: u64,
        event: EventId,
    ) -> Result<()> {
        Self::check_amount(amount)?;
        if !species.is_channel() {
            return Err(Error::BadParams(format!("{species} is not a channel")));
        }
        self.history.push(LedgerEntry {
            event,
            species,
            parties: vec![from, to],
            kind: EntryKind::ChannelUse,
            amount,
        });
        Ok(())
    }

    /// Record an achieved effect that is not a stock.
    pub fn produce(
        &mut self,
        species: Species,
        parties: &[NodeId],
        amount: u64,
        event: EventId,
    ) -> Result<()> {
        Self::check_amount(amount)?;
        self.effects.push(Effect {
            event,
            parties: party_key(&species, parties),
            species,
            amount,
        });
        Ok(())
    }

    pub fn balance(&self, species: &Species, parties: &[NodeId]) -> u64 {
        let key = (species.clone(), party_key(species, parties));
        self.balances.get(&key).copied().unwrap_or(0)
    }

    pub fn balances(&self) -> impl Iterator<Item = (&Species, &[NodeId], u64)> {
        self.balances
            .iter()
            .map(|((s, p), &v)| (s, p.as_slice(), v))
    }

    pub fn history(&self) -> &[LedgerEntry] {
        &self.history
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    /// Balances rebuilt from the history alone.
    pub fn replay_balances(&self) -> BTreeMap<(Species, Vec<NodeId>), i128> {
        let mut out: BTreeMap<_, i128> = BTreeMap::new();
        for e in &self.history {
            let key = (e.species.clone(), e.parties.clone());
            match e.kind {
                EntryKind::Endowment | EntryKind::Produced => {
                    *out.entry(key).or_default() += i128::from(e.amount)
                }
                EntryKind::Debit => *out.entry(key).or_default() -= i128::from(e.amount),
                EntryKind::ChannelUse => {}
            }
        }
        out
    }

    /// Total consumed (debits plus channel uses) matching a term.
    pub fn consumed(&self, species: &Species, parties: Option<&[NodeId]>) -> u64 {
        let want = parties.map(|p| party_key(species, p));
        self.history
            .iter()
            .filter(|e| matches!(e.kind, EntryKind::Debit | EntryKind::ChannelUse))
            .filter(|e| &e.species == species && want.as_ref().is_none_or(|w| w == &e.parties))
            .map(|e| e.amount)
            .sum()
    }

    /// Total produced matching a term.
    pub fn produced(&self, species: &Species, parties: Option<&[NodeId]>) -> u64 {
        let want = parties.map(|p| party_key(species, p));
        self.effects
            .iter()
            .filter(|e| &e.species == species && want.as_ref().is_none_or(|w| w == &e.parties))
            .map(|e| e.amount)
            .sum()
    }

    fn consumed_species(&self) -> BTreeMap<Species, u64> {
        let mut m = BTreeMap::new();
        for e in &self.history {
            if matches!(e.kind, EntryKind::Debit | EntryKind::ChannelUse) {
                *m.entry(e.species.clone()).or_default() += e.amount;
            }
        }
        m
    }

    fn produced_species(&self) -> BTreeMap<Species, u64> {
        let mut m = BTreeMap::new();
        for e in &self.effects {
            *m.entry(e.species.clone()).or_default() += e.amount;
        }
        m
    }

    /// Summary for the run report.
    pub fn summary(&self, label: &dyn Fn(NodeId) -> String) -> LedgerSummary {
        let row = |s: &Species, p: &[NodeId], count: u64| SpeciesCount {
            species: s.clone(),
            parties: party_string(p, label),
            count,
        };
        let mut consumed: BTreeMap<Key, u64> = BTreeMap::new();
        for e in &self.history {
            if matches!(e.kind, EntryKind::Debit | EntryKind::ChannelUse) {
                *consumed
                    .entry((e.species.clone(), e.parties.clone()))
                    .or_default() += e.amount;
            }
        }
        let mut produced: BTreeMap<Key, u64> = BTreeMap::new();
        for e in &self.effects {
            *produced
                .entry((e.species.clone(), e.parties.clone()))
                .or_default() += e.amount;
        }
        LedgerSummary {
            notation: self.species_report(label),
            balances: self
                .balances()
                .filter(|b| b.2 > 0)
                .map(|(s, p, c)| row(s, p, c))
                .collect(),
            consumed: consumed.iter().map(|((s, p), &c)| row(s, p, c)).collect(),
            produced: produced.iter().map(|((s, p), &c)| row(s, p, c)).collect(),
            entries: self.history.len(),
        }
    }

    /// Nonzero balances in ((count,species,parties),…) notation.
    pub fn species_report(&self, label: &dyn Fn(NodeId) -> String) -> String {
        let items: Vec<String> = self
            .balances()
            .filter(|b| b.2 > 0)
            .map(|(s, p, c)| format!("({c},{s},{})", party_string(p, label)))
            .collect();
        format!("({})", items.join(","))
    }
}

fn party_string(parties: &[NodeId], label: &dyn Fn(NodeId) -> String) -> String {
    parties.iter().map(|&p| label(p)).collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SpeciesCount {
    pub species: Species,
    pub parties: String,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LedgerSummary {
    pub notation: String,
    pub balances: Vec<SpeciesCount>,
    pub consumed: Vec<SpeciesCount>,
    pub produced: Vec<SpeciesCount>,
    pub entries: usize,
}

/// `count` units of `species`, optionally pinned to a party set.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub count: u64,
    pub species: Species,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parties: Option<Vec<NodeId>>,
}

impl Term {
    pub fn new(count: u64, species: Species) -> Self {
        Self {
            count,
            species,
            parties: None,
        }
    }

    pub fn between(count: u64, species: Species, parties: &[NodeId]) -> Self {
        Self {
            count,
            species,
            parties: Some(parties.to_vec()),
        }
    }
}

/// consumed ≥ produced, read as: a run consumes exactly the left side and
/// achieves exactly the right side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceInequality {
    pub name: String,
    pub consumed: Vec<Term>,
    pub produced: Vec<Term>,
}

impl ResourceInequality {
    pub fn new(name: &str, consumed: Vec<Term>, produced: Vec<Term>) -> Self {
        Self {
            name: name.to_owned(),
            consumed,
            produced,
        }
    }

    /// [qq] + 2[c→c] ≥ [q→q], scaled by `k` qubits.
    pub fn teleportation(k: u64) -> Self {
        Self::new(
            "teleportation",
            vec![
                Term::new(k, Species::Qq),
                Term::new(2 * k, Species::ClassicalBit),
            ],
            vec![Term::new(k, Species::QuantumBit)],
        )
    }

    /// [qq] + [q→q] ≥ 2[c→c].
    pub fn superdense() -> Self {
        Self::new(
            "superdense_coding",
            vec![Term::new(1, Species::Qq), Term::new(1, Species::QuantumBit)],
            vec![Term::new(2, Species::ClassicalBit)],
        )
    }

    pub fn render(&self) -> String {
        let side = |terms: &[Term]| {
            terms
                .iter()
                .map(|t| {
                    if t.count == 1 {
                        t.species.to_string()
                    } else {
                        format!("{}{}", t.count, t.species)
                    }
                })
                .collect::<Vec<_>>()
                .join(" + ")
        };
        format!("{} ≥ {}", side(&self.consumed), side(&self.produced))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermCheck {
    pub species: Species,
    pub parties: Option<Vec<NodeId>>,
    pub expected: u64,
    pub actual: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InequalityReport {
    pub name: String,
    pub inequality: String,
    pub pass: bool,
    pub consumed: Vec<TermCheck>,
    pub produced: Vec<TermCheck>,
    /// Species consumed or produced by the run but absent from the
    /// inequality.
    pub unlisted: Vec<TermCheck>,
}

/// Compare a finished run against an inequality.
pub fn check_inequality(ledger: &Ledger, ineq: &ResourceInequality) -> InequalityReport {
    let terms = |list: &[Term], f: &dyn Fn(&Species, Option<&[NodeId]>) -> u64| -> Vec<TermCheck> {
        list.iter()
            .map(|t| TermCheck {
                species: t.species.clone(),
                parties: t.parties.clone(),
                expected: t.count,
                actual: f(&t.species, t.parties.as_deref()),
            })
            .collect()
    };
    let consumed = terms(&ineq.consumed, &|s, p| ledger.consumed(s, p));
    let produced = terms(&ineq.produced, &|s, p| ledger.produced(s, p));

    let mut unlisted = Vec::new();
    let mut side_totals = |actual: BTreeMap<Species, u64>, listed: &[Term]| {
        for (species, total) in actual {
            let expected: u64 = listed
                .iter()
                .filter(|t| t.species == species)
                .map(|t| t.count)
                .sum();
            if expected != total {
                unlisted.push(TermCheck {
                    species,
                    parties: None,
                    expected,
                    actual: total,
                });
            }
        }
    };
    side_totals(ledger.consumed_species(), &ineq.consumed);
    side_totals(ledger.produced_species(), &ineq.produced);

    let pass = consumed
        .iter()
        .chain(&produced)
        .all(|t| t.expected == t.actual)
        && unlisted.is_empty();
    InequalityReport {
        name: ineq.name.clone(),
        inequality: ineq.render(),
        pass,
        consumed,
        produced,
        unlisted,
    }
}
