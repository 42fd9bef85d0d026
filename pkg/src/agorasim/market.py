"""Ownership, transactions and the round-based exchange simulation.

Ownership is an ordinary property of the object. A sale is a property
rewrite changing the owner label; each party measures the value difference
that rewrite makes through their own functor and metric, and the trade
happens exactly when the buyer's difference is at least the seller's. The
price sits inside that interval at a configurable surplus split.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Sequence

from .errors import NotOwner
from .functors import AgentAttributeSet, ValueFunctor, evaluate
from .properties import PropertyMorphism, PropertySet, PropertyValue, apply_morphism, rewrite
from .valuations import ValueMetric, distance

LOG_SCHEMA = 1


@dataclass
class Agent:
    """A participant: identity, attributes, a value functor, a metric, holdings."""

    id: str
    functor: ValueFunctor
    metric: ValueMetric
    attributes: AgentAttributeSet = field(default_factory=AgentAttributeSet)
    holdings: set[str] = field(default_factory=set)


@dataclass(frozen=True)
class OwnershipTransfer:
    """A property rewrite moving one owner label to another."""

    property_name: str
    from_id: str
    to_id: str
    morphism: PropertyMorphism

    @property
    def name(self) -> str:
        return self.morphism.name


def ownership_transfer(from_id: str, to_id: str, property_name: str = "owner") -> OwnershipTransfer:
    """Build the transfer rewriting ``property_name`` from one agent id to another."""
    current = PropertyValue.label(from_id)

    def pattern(p: PropertySet) -> bool:
        return p.get(property_name) == current

    morphism = rewrite(
        f"transfer[{property_name}:{from_id}->{to_id}]",
        requires=pattern,
        set_values={property_name: PropertyValue.label(to_id)},
    )
    return OwnershipTransfer(property_name, from_id, to_id, morphism)


def ownership_deltas(
    seller: Agent,
    buyer: Agent,
    obj: PropertySet,
    transfer: OwnershipTransfer,
) -> tuple[float, float]:
    """How much each party's valuation moves when the owner label flips.

    Both deltas are distances between the valuation of the object as-is and
    as-rewritten, each measured with that party's own functor and metric.
    """
    rewritten = apply_morphism(transfer.morphism, obj)
    d_seller = distance(seller.metric, evaluate(seller.functor, obj),
                        evaluate(seller.functor, rewritten))
    d_buyer = distance(buyer.metric, evaluate(buyer.functor, obj),
                       evaluate(buyer.functor, rewritten))
    return d_seller, d_buyer


def settle(d_seller: float, d_buyer: float, split: float, strict: bool = False) -> float | None:
    """The trade price, or None when the threshold fails.

    Trades when the buyer values the ownership change at least as much as
    the seller (strictly more, if ``strict``). The price interpolates the
    surplus interval at ``split`` and is clamped into [d_seller, d_buyer]
    to guard float rounding at the endpoints; at equality both parties agree
    on the value, which *is* the price.
    """
    if not 0.0 <= split <= 1.0:
        raise ValueError(f"split must lie in [0, 1], got {split}")
    if d_buyer < d_seller or (strict and d_buyer == d_seller):
        return None
    price = d_seller + split * (d_buyer - d_seller)
    return min(max(price, d_seller), d_buyer)


@dataclass(frozen=True)
class TradeEvent:
    round: int
    seller: str
    buyer: str
    object: str
    d_seller: float
    d_buyer: float
    price: float

    def __post_init__(self):
        if self.d_buyer < self.d_seller:
            raise ValueError("trades require d_seller <= d_buyer")
        if not (self.d_seller <= self.price <= self.d_buyer):
            raise ValueError("price must lie within [d_seller, d_buyer]")

    def to_line(self) -> str:
        return (
            '{"type":"trade","round":%d,"seller":%s,"buyer":%s,"object":%s,'
            '"d_seller":%.9f,"d_buyer":%.9f,"price":%.9f}'
            % (self.round, json.dumps(self.seller), json.dumps(self.buyer),
               json.dumps(self.object), self.d_seller, self.d_buyer, self.price)
        )


@dataclass(frozen=True)
class NoTradeEvent:
    """A considered-but-rejected trade; keeps the near-miss deltas for analysis."""

    round: int
    seller: str
    buyer: str
    object: str
    d_seller: float
    d_buyer: float

    def to_line(self) -> str:
        return (
            '{"type":"no_trade","round":%d,"seller":%s,"buyer":%s,"object":%s,'
            '"d_seller":%.9f,"d_buyer":%.9f}'
            % (self.round, json.dumps(self.seller), json.dumps(self.buyer),
               json.dumps(self.object), self.d_seller, self.d_buyer)
        )


MarketEvent = TradeEvent | NoTradeEvent


@dataclass
class EventLog:
    """Append-only record of one simulation run; replays byte-identically."""

    seed: int
    rounds: int
    split: float
    strict: bool
    events: list[MarketEvent] = field(default_factory=list)

    def trades(self) -> list[TradeEvent]:
        return [e for e in self.events if isinstance(e, TradeEvent)]

    def to_lines(self) -> list[str]:
        header = (
            '{"type":"header","schema":%d,"seed":%d,"rounds":%d,"split":%.9f,"strict":%s}'
            % (LOG_SCHEMA, self.seed, self.rounds, self.split,
               "true" if self.strict else "false")
        )
        return [header] + [e.to_line() for e in self.events]

    def to_text(self) -> str:
        return "\n".join(self.to_lines()) + "\n"

    @staticmethod
    def from_lines(lines: Sequence[str]) -> "EventLog":
        records = [json.loads(line) for line in lines if line.strip()]
        if not records or records[0].get("type") != "header":
            raise ValueError("event log must start with a header record")
        head = records[0]
        if head.get("schema") != LOG_SCHEMA:
            raise ValueError(f"unsupported log schema: {head.get('schema')!r}")
        log = EventLog(seed=head["seed"], rounds=head["rounds"],
                       split=head["split"], strict=head["strict"])
        for rec in records[1:]:
            if rec["type"] == "trade":
                log.events.append(TradeEvent(
                    round=rec["round"], seller=rec["seller"], buyer=rec["buyer"],
                    object=rec["object"], d_seller=rec["d_seller"],
                    d_buyer=rec["d_buyer"], price=rec["price"],
                ))
            elif rec["type"] == "no_trade":
                log.events.append(NoTradeEvent(
                    round=rec["round"], seller=rec["seller"], buyer=rec["buyer"],
                    object=rec["object"], d_seller=rec["d_seller"],
                    d_buyer=rec["d_buyer"],
                ))
            else:
                raise ValueError(f"unknown event type: {rec['type']!r}")
        return log


def evaluate_transaction(
    seller: Agent,
    buyer: Agent,
    obj: PropertySet,
    transfer: OwnershipTransfer,
    split: float = 0.5,
    strict: bool = False,
    round: int = 0,
    object_id: str = "",
) -> TradeEvent | None:
    """Price one candidate sale, or None when the threshold fails.

    Raises NotOwner unless the object's owner property carries the seller's
    id (and the transfer moves ownership away from that same id).
    """
    owner = obj.get(transfer.property_name)
    if owner != PropertyValue.label(seller.id) or transfer.from_id != seller.id:
        raise NotOwner(f"{seller.id} does not own {object_id or repr(obj)}")
    d_seller, d_buyer = ownership_deltas(seller, buyer, obj, transfer)
    price = settle(d_seller, d_buyer, split, strict)
    if price is None:
        return None
    return TradeEvent(round=round, seller=seller.id, buyer=buyer.id,
                      object=object_id, d_seller=d_seller, d_buyer=d_buyer, price=price)


@dataclass
class MarketState:
    """Mutable simulation state: current property sets and derived holdings."""

    objects: dict[str, PropertySet]
    agents: dict[str, Agent]
    ownership_property: str = "owner"

    def owner_of(self, object_id: str) -> str | None:
        value = self.objects[object_id].get(self.ownership_property)
        if value is None or not value.is_label:
            return None
        owner = str(value)
        return owner if owner in self.agents else None

    def assert_single_owner(self) -> None:
        claimed: dict[str, str] = {}
        for agent in self.agents.values():
            for object_id in agent.holdings:
                if object_id in claimed:
                    raise AssertionError(
                        f"{object_id} held by both {claimed[object_id]} and {agent.id}"
                    )
                claimed[object_id] = agent.id


def run_rounds(
    state: MarketState,
    rounds: int,
    seed: int,
    split: float = 0.5,
    strict: bool = False,
) -> EventLog:
    """Deterministic seeded exchange simulation over ``rounds`` rounds.

    Each round walks the objects in name order; for each owned object a
    prospective buyer is drawn uniformly from the other agents, the
    candidate sale is priced, and accepted transfers are applied
    immediately (later objects in the same round see the new owner).
    Identical (state, seed) inputs reproduce the identical log.
    """
    rng = random.Random(seed)
    log = EventLog(seed=seed, rounds=rounds, split=split, strict=strict)
    agent_ids = sorted(state.agents)
    for round_no in range(1, rounds + 1):
        for object_id in sorted(state.objects):
            owner = state.owner_of(object_id)
            if owner is None:
                continue
            candidates = [a for a in agent_ids if a != owner]
            if not candidates:
                continue
            buyer_id = rng.choice(candidates)
            seller, buyer = state.agents[owner], state.agents[buyer_id]
            obj = state.objects[object_id]
            transfer = ownership_transfer(owner, buyer_id, state.ownership_property)
            d_seller, d_buyer = ownership_deltas(seller, buyer, obj, transfer)
            price = settle(d_seller, d_buyer, split, strict)
            if price is None:
                log.events.append(NoTradeEvent(
                    round=round_no, seller=owner, buyer=buyer_id, object=object_id,
                    d_seller=d_seller, d_buyer=d_buyer,
                ))
                continue
            state.objects[object_id] = apply_morphism(transfer.morphism, obj)
            seller.holdings.discard(object_id)
            buyer.holdings.add(object_id)
            log.events.append(TradeEvent(
                round=round_no, seller=owner, buyer=buyer_id, object=object_id,
                d_seller=d_seller, d_buyer=d_buyer, price=price,
            ))
        state.assert_single_owner()
    return log
