"""Authoritative trust accounting.

Trust is a raw cumulative sum of events: volunteering earns +1, a failed
delivery by a selected volunteer costs the configured penalty, and no
score ever falls below the floor (rejoining under a fresh identity starts
at the floor, so whitewashing gains nothing).  The service gate is an
inclusive comparison against the threshold.

A ledger instance is single-writer; concurrent readers are fine between
writes.  The simulation engine owns one ledger and serializes mutations.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable


class UnknownPeerError(KeyError):
    """Raised for operations on a peer id that was never registered."""


class EventKind(Enum):
    VOLUNTEER_CREDIT = "volunteer_credit"
    SELECTED_TRUTHFUL_CREDIT = "selected_truthful_credit"
    PENALTY = "penalty"


EVENT_CSV_HEADER = "round,peer_id,kind,delta,new_value"


@dataclass(frozen=True)
class TrustEvent:
    """One applied trust change.

    ``delta`` is the change actually applied (a penalty clamped at the
    floor shows the clamped delta); ``penalty`` carries the full penalty in
    force that round for PENALTY events and is None for credits.
    """

    round_index: int
    peer_id: int
    kind: EventKind
    delta: float
    new_value: float
    penalty: float | None = None


@dataclass(frozen=True)
class LedgerConfig:
    penalty: float
    threshold: float
    floor: float = 0.0

    def __post_init__(self):
        if self.penalty <= 0.0:
            raise ValueError("penalty must be > 0")
        if self.threshold < self.floor:
            raise ValueError("threshold must be >= floor")


class TrustLedger:
    """Single-writer trust scores with an optional event record.

    ``keep_events`` retains every event in memory for replay checks;
    ``event_sink`` streams each event to a callable (used for round-level
    trace export) without retaining it.
    """

    def __init__(
        self,
        config: LedgerConfig,
        keep_events: bool = False,
        event_sink: Callable[[TrustEvent], None] | None = None,
    ):
        self.config = config
        self._scores: dict[int, float] = {}
        self._events: list[TrustEvent] | None = [] if keep_events else None
        self._event_sink = event_sink

    def register(self, peer_id: int, trust: float | None = None) -> None:
        """Add a peer; newcomers start at the floor."""
        if peer_id in self._scores:
            raise ValueError(f"peer {peer_id!r} already registered")
        value = self.config.floor if trust is None else trust
        if value < self.config.floor:
            raise ValueError("initial trust below floor")
        self._scores[peer_id] = value

    def trust(self, peer_id: int) -> float:
        try:
            return self._scores[peer_id]
        except KeyError:
            raise UnknownPeerError(peer_id) from None

    def peer_ids(self) -> tuple[int, ...]:
        return tuple(self._scores)

    def snapshot(self) -> dict[int, float]:
        return dict(self._scores)

    def credit(
        self,
        peer_id: int,
        round_index: int = 0,
        kind: EventKind = EventKind.VOLUNTEER_CREDIT,
    ) -> float:
        """Apply a +1 credit; returns the updated trust."""
        if kind is EventKind.PENALTY:
            raise ValueError("credit cannot record a PENALTY event")
        scores = self._scores
        try:
            new_value = scores[peer_id] + 1.0
        except KeyError:
            raise UnknownPeerError(peer_id) from None
        scores[peer_id] = new_value
        if self._events is not None or self._event_sink is not None:
            self._record(TrustEvent(round_index, peer_id, kind, 1.0, new_value))
        return new_value

    def credit_many(
        self,
        peer_ids: Iterable[int],
        round_index: int = 0,
        kind: EventKind = EventKind.VOLUNTEER_CREDIT,
    ) -> None:
        """Bulk +1 credits (the engine's hot path)."""
        if kind is EventKind.PENALTY:
            raise ValueError("credit cannot record a PENALTY event")
        scores = self._scores
        if self._events is None and self._event_sink is None:
            try:
                for pid in peer_ids:
                    scores[pid] = scores[pid] + 1.0
            except KeyError:
                raise UnknownPeerError(pid) from None
            return
        for pid in peer_ids:
            try:
                new_value = scores[pid] + 1.0
            except KeyError:
                raise UnknownPeerError(pid) from None
            scores[pid] = new_value
            self._record(TrustEvent(round_index, pid, kind, 1.0, new_value))

    def penalize(self, peer_id: int, round_index: int = 0) -> float:
        """Apply the penalty, clamped at the floor; returns the updated trust."""
        scores = self._scores
        try:
            old = scores[peer_id]
        except KeyError:
            raise UnknownPeerError(peer_id) from None
        new_value = old - self.config.penalty
        floor = self.config.floor
        if new_value < floor:
            new_value = floor
        scores[peer_id] = new_value
        if self._events is not None or self._event_sink is not None:
            self._record(
                TrustEvent(
                    round_index,
                    peer_id,
                    EventKind.PENALTY,
                    new_value - old,
                    new_value,
                    penalty=self.config.penalty,
                )
            )
        return new_value

    def passes_threshold(self, peer_id: int) -> bool:
        """Inclusive service gate: trust >= threshold."""
        return self.trust(peer_id) >= self.config.threshold

    @property
    def events(self) -> tuple[TrustEvent, ...]:
        if self._events is None:
            raise ValueError("ledger was created without keep_events")
        return tuple(self._events)

    def write_event_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            write_events(fh, self.events)

    @staticmethod
    def replay(
        events: Iterable[TrustEvent],
        config: LedgerConfig,
        peer_ids: Iterable[int],
    ) -> dict[int, float]:
        """Fold an event log under the update rule from floor-initialized
        scores; must reproduce the live scores exactly."""
        scores = {pid: config.floor for pid in peer_ids}
        for event in events:
            if event.kind is EventKind.PENALTY:
                scores[event.peer_id] = max(
                    config.floor, scores[event.peer_id] - event.penalty
                )
            else:
                scores[event.peer_id] += 1.0
        return scores

    def _record(self, event: TrustEvent) -> None:
        if self._events is not None:
            self._events.append(event)
        if self._event_sink is not None:
            self._event_sink(event)


def write_events(fh, events: Iterable[TrustEvent]) -> None:
    """Write events as CSV: round,peer_id,kind,delta,new_value."""
    writer = csv.writer(fh)
    writer.writerow(EVENT_CSV_HEADER.split(","))
    for event in events:
        writer.writerow(
            [
                event.round_index,
                event.peer_id,
                event.kind.value,
                f"{event.delta:.6f}",
                f"{event.new_value:.6f}",
            ]
        )


class EventCsvSink:
    """Streams trust events straight to a CSV file as they happen."""

    def __init__(self, fh):
        self._writer = csv.writer(fh)
        self._writer.writerow(EVENT_CSV_HEADER.split(","))

    def __call__(self, event: TrustEvent) -> None:
        self._writer.writerow(
            [
                event.round_index,
                event.peer_id,
                event.kind.value,
                f"{event.delta:.6f}",
                f"{event.new_value:.6f}",
            ]
        )
