"""Round-based simulation of the volunteer-credit trust mechanism.

A population of behaviorally fixed peers plays repeated query rounds.
Each round:

1. A requester, drawn uniformly from the joined peers, picks a uniformly
   random file it does not hold.
2. The query floods to a uniform ``reach``-sized sample of the other
   peers; volunteers are every sampled liar plus every sampled truthful
   peer holding the file.
3. No volunteers: nothing changes.
4. Requester below the service threshold: reputation-only round — every
   volunteer is credited +1 for its willingness, but nobody is served.
5. Otherwise a server is selected (by trust with probability p, uniformly
   at random with probability 1-p).  A good server means success and every
   volunteer is credited; a liar or bad server means failure, the selected
   peer pays the penalty (clamped at the floor) and the other volunteers
   are credited.

The flooding sample itself is never materialized: volunteer counts are
drawn from the exact sample-intersection distribution (multivariate
hypergeometric) and members uniformly within each class, which is
distributionally identical to sampling ``reach`` peers and filtering, and
is what keeps desk-scale runs fast.  Cycles are a fixed batch of
``queries_per_cycle`` rounds; metrics are recorded per cycle.

Determinism: all randomness derives from ``rng_seed`` via counter-based
stream splitting (see :mod:`trustsim.rng`) — one stream per peer for
holdings, one stream per round for everything in that round — so a run is
byte-reproducible from its configuration.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable

from .game import Selection
from .ledger import EventKind, LedgerConfig, TrustEvent, TrustLedger, UnknownPeerError
from .rng import Stream, draw_hypergeom, hypergeom_cdf

DEFAULT_VOLUNTEER_TARGET = 30.0


class ConfigError(ValueError):
    """Invalid configuration; ``key`` names the offending field."""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class SchemaError(ValueError):
    """CSV does not match the metrics schema."""


class Behavior(Enum):
    GOOD_SERVER = "good"
    BAD_SERVER = "bad"
    LIAR = "liar"

    @property
    def truthful(self) -> bool:
        """Truthful peers answer a query only when they hold the file."""
        return self is not Behavior.LIAR

    @classmethod
    def parse(cls, text: str) -> "Behavior":
        try:
            return cls(text.strip().lower())
        except ValueError:
            raise ValueError(f"unknown behavior {text!r} (expected good/bad/liar)") from None


class Gate(Enum):
    SERVED = "served"
    REPUTATION_ONLY = "reputation_only"
    NO_VOLUNTEERS = "no_volunteers"


class Outcome(Enum):
    SUCCESS = "success"
    FAILURE = "failure"


@dataclass(frozen=True)
class Peer:
    peer_id: int
    behavior: Behavior
    holdings: frozenset[int]
    join_cycle: int


@dataclass(frozen=True)
class Injection:
    """Scheduled newcomer arrivals: ``count`` peers of one behavior at the
    start of ``cycle``."""

    cycle: int
    count: int
    behavior: Behavior


@dataclass(frozen=True)
class SimConfig:
    good_founders: int
    bad_founders: int
    liar_founders: int
    catalog_size: int
    n: int
    p: float
    penalty: float
    threshold: float
    total_cycles: int
    rng_seed: int
    floor: float = 0.0
    queries_per_cycle: int | None = None  # default: founder population // 10
    reach: int | None = None  # default: calibrated for ~30 expected volunteers
    newcomers: tuple[Injection, ...] = ()
    acquire_files: bool = False
    reward: float = 10.0
    cost: float = 1.0

    @property
    def founder_population(self) -> int:
        return self.good_founders + self.bad_founders + self.liar_founders

    def validate(self) -> "SimConfig":
        """Check invariants and resolve defaulted fields; returns the
        fully concrete config this run will use."""
        for key in ("good_founders", "bad_founders", "liar_founders"):
            if getattr(self, key) < 0:
                raise ConfigError(key, "must be >= 0")
        if self.founder_population < 2:
            raise ConfigError("good_founders", "need at least 2 founders in total")
        if self.catalog_size < 1:
            raise ConfigError("catalog_size", "must be >= 1")
        if self.n < 1:
            raise ConfigError("n", "must be >= 1")
        if self.catalog_size < self.n:
            raise ConfigError("catalog_size", "must be >= n (holdings would be empty)")
        if holdings_size(self.catalog_size, self.n) >= self.catalog_size:
            raise ConfigError(
                "n", "peers would hold the entire catalog; nothing left to request"
            )
        if not 0.0 <= self.p <= 1.0:
            raise ConfigError("p", "must be within [0, 1]")
        if self.penalty <= 0.0:
            raise ConfigError("penalty", "must be > 0")
        if self.threshold < self.floor:
            raise ConfigError("threshold", "must be >= floor")
        if self.total_cycles < 1:
            raise ConfigError("total_cycles", "must be >= 1")
        if self.cost <= 0.0:
            raise ConfigError("cost", "must be > 0")
        if self.reward <= self.cost:
            raise ConfigError("reward", "must exceed cost")
        for injection in self.newcomers:
            if injection.cycle < 0:
                raise ConfigError("newcomers", "cycle must be >= 0")
            if injection.count < 1:
                raise ConfigError("newcomers", "count must be >= 1")

        queries = self.queries_per_cycle
        if queries is None:
            queries = max(1, self.founder_population // 10)
        if queries < 1:
            raise ConfigError("queries_per_cycle", "must be >= 1")

        reach = self.reach
        if reach is None:
            reach = calibrated_reach(
                self.good_founders, self.bad_founders, self.liar_founders, self.n
            )
        if reach < 1:
            raise ConfigError("reach", "must be >= 1")
        if reach > self.founder_population - 1:
            raise ConfigError(
                "reach", "must be <= population - 1 (a query cannot reach more peers)"
            )
        return dataclasses.replace(self, queries_per_cycle=queries, reach=reach)


def holdings_size(catalog_size: int, n: int) -> int:
    return round(catalog_size / n)


def calibrated_reach(
    good: int,
    bad: int,
    liars: int,
    n: int,
    target_volunteers: float = DEFAULT_VOLUNTEER_TARGET,
) -> int:
    """Reach giving ~``target_volunteers`` expected volunteers per query:
    every sampled liar volunteers, a sampled truthful peer does so with
    probability 1/n."""
    population = good + bad + liars
    if population < 2:
        raise ConfigError("reach", "population too small to calibrate reach")
    rate = (liars + (good + bad) / n) / population
    if rate <= 0.0:
        raise ConfigError("reach", "no peer can ever volunteer; cannot calibrate")
    return max(1, min(population - 1, round(target_volunteers / rate)))


@dataclass(frozen=True, slots=True)
class RoundRecord:
    """What one round did.

    Trust deltas: every id in ``volunteer_ids`` was credited +1 except a
    penalized ``selected_id``, whose applied (floor-clamped) change is
    ``penalty_delta``.
    """

    round_index: int
    requester_id: int
    file_id: int
    volunteer_ids: tuple[int, ...]
    gate: Gate
    mode: Selection | None
    selected_id: int | None
    outcome: Outcome | None
    requester_utility: float | None
    penalty_delta: float


class Population:
    """Peers, their holdings, and the per-file truthful-holder index."""

    def __init__(self, config: SimConfig):
        self.config = config
        self.holdings_size = holdings_size(config.catalog_size, config.n)
        self.behaviors: list[Behavior] = []
        self.holdings: list[frozenset[int]] = []
        self.join_cycle: list[int] = []
        self.joined: list[int] = []
        self.liar_pool: list[int] = []
        self.liar_index: dict[int, int] = {}
        self.holders_by_file: list[list[int]] = [[] for _ in range(config.catalog_size)]
        self.good_founder_ids: list[int] = []
        self.bad_founder_ids: list[int] = []
        self.liar_founder_ids: list[int] = []
        self.newcomer_good_ids: list[int] = []

    @property
    def size(self) -> int:
        return len(self.behaviors)

    @property
    def liar_count(self) -> int:
        return len(self.liar_pool)

    def peer(self, peer_id: int) -> Peer:
        return Peer(
            peer_id,
            self.behaviors[peer_id],
            self.holdings[peer_id],
            self.join_cycle[peer_id],
        )

    def add_peer(
        self, behavior: Behavior, cycle: int, seed: int, founder: bool
    ) -> int:
        peer_id = len(self.behaviors)
        stream = Stream.from_path(seed, "holdings", peer_id)
        catalog = self.config.catalog_size
        files: set[int] = set()
        while len(files) < self.holdings_size:
            files.add(stream.randbelow(catalog))
        self.behaviors.append(behavior)
        self.holdings.append(frozenset(files))
        self.join_cycle.append(cycle)
        self.joined.append(peer_id)
        if behavior.truthful:
            for file_id in files:
                self.holders_by_file[file_id].append(peer_id)
        else:
            self.liar_index[peer_id] = len(self.liar_pool)
            self.liar_pool.append(peer_id)
        if founder:
            {
                Behavior.GOOD_SERVER: self.good_founder_ids,
                Behavior.BAD_SERVER: self.bad_founder_ids,
                Behavior.LIAR: self.liar_founder_ids,
            }[behavior].append(peer_id)
        elif behavior is Behavior.GOOD_SERVER:
            self.newcomer_good_ids.append(peer_id)
        return peer_id

    def acquire(self, peer_id: int, file_id: int) -> None:
        """Add a transferred file to a peer's holdings (never the last
        missing one, so every peer always has something left to request)."""
        holdings = self.holdings[peer_id]
        if len(holdings) + 1 >= self.config.catalog_size or file_id in holdings:
            return
        self.holdings[peer_id] = holdings | {file_id}
        if self.behaviors[peer_id].truthful:
            self.holders_by_file[file_id].append(peer_id)


def build_population(config: SimConfig, seed: int | None = None) -> Population:
    """Founders with uniformly random holdings; deterministic in the seed."""
    config = config.validate()
    seed = config.rng_seed if seed is None else seed
    population = Population(config)
    for behavior, count in (
        (Behavior.GOOD_SERVER, config.good_founders),
        (Behavior.BAD_SERVER, config.bad_founders),
        (Behavior.LIAR, config.liar_founders),
    ):
        for _ in range(count):
            population.add_peer(behavior, 0, seed, founder=True)
    return population


def select_server(
    volunteers: list[int] | tuple[int, ...],
    ledger: TrustLedger,
    p: float,
    stream: Stream,
) -> tuple[int, Selection]:
    """Pick the server: with probability p the volunteer of maximal trust
    (uniform among ties), otherwise a uniformly random volunteer."""
    if not volunteers:
        raise ValueError("empty volunteer set")
    if stream.random() < p:
        scores = ledger._scores
        best = -math.inf
        ties: list[int] = []
        for pid in volunteers:
            value = scores[pid]
            if value > best:
                best = value
                ties = [pid]
            elif value == best:
                ties.append(pid)
        if len(ties) == 1:
            return ties[0], Selection.BY_TRUST
        return ties[stream.randbelow(len(ties))], Selection.BY_TRUST
    return volunteers[stream.randbelow(len(volunteers))], Selection.RANDOM


class _VolunteerSampler:
    """Draws one query's volunteer set.

    Equivalent in distribution to sampling ``reach`` of the other peers
    uniformly without replacement and keeping all liars plus truthful
    holders of the file: the class counts follow the multivariate
    hypergeometric law (liar count from a precomputed CDF, holder count by
    sequential conditional draws over the file's holder list, which also
    picks the members), and liar members are a partial Fisher-Yates sample.
    """

    def __init__(self, population: Population, reach: int):
        self.population = population
        self.reach = reach
        self._built_for: tuple[int, int] = (-1, -1)
        self._cdf_plain: tuple[int, list[float]] | None = None
        self._cdf_liar_requester: tuple[int, list[float]] | None = None

    def refresh(self) -> None:
        shape = (self.population.size, self.population.liar_count)
        if shape == self._built_for:
            return
        others, liars = shape[0] - 1, shape[1]
        self._cdf_plain = hypergeom_cdf(others, liars, self.reach)
        if liars > 0:
            self._cdf_liar_requester = hypergeom_cdf(others, liars - 1, self.reach)
        self._built_for = shape

    def draw(self, stream: Stream, requester_id: int, file_id: int) -> list[int]:
        population = self.population
        pool = population.liar_pool
        requester_is_liar = population.behaviors[requester_id] is Behavior.LIAR
        liar_limit = len(pool) - 1 if requester_is_liar else len(pool)

        moved = False
        if requester_is_liar:
            # Park the requester at the end of the pool so the sample prefix
            # never contains it; undone below.
            pos = population.liar_index[requester_id]
            if pos != liar_limit:
                pool[pos], pool[liar_limit] = pool[liar_limit], pool[pos]
                moved = True
        cdf = self._cdf_liar_requester if requester_is_liar else self._cdf_plain
        liar_draws = draw_hypergeom(stream, cdf) if liar_limit > 0 else 0

        randbelow = stream.randbelow
        swaps: list[tuple[int, int]] = []
        for i in range(liar_draws):
            k = i + randbelow(liar_limit - i)
            if k != i:
                pool[i], pool[k] = pool[k], pool[i]
                swaps.append((i, k))
        volunteers = pool[:liar_draws]
        for i, k in reversed(swaps):
            pool[i], pool[k] = pool[k], pool[i]
        if moved:
            pool[pos], pool[liar_limit] = pool[liar_limit], pool[pos]

        # Truthful holders: each is in the sample's remaining slots with the
        # exact conditional probability given how many slots are left among
        # the non-liar peers.
        slots = self.reach - liar_draws
        available = population.size - 1 - liar_limit
        rand = stream.random
        for pid in population.holders_by_file[file_id]:
            if slots <= 0:
                break
            if rand() * available < slots:
                volunteers.append(pid)
                slots -= 1
            available -= 1
        return volunteers


class Simulation:
    """One run: owns the population, the ledger, and the round counter."""

    def __init__(self, config: SimConfig, event_sink: Callable[[TrustEvent], None] | None = None):
        self.config = config.validate()
        self.population = build_population(self.config)
        self.ledger = TrustLedger(
            LedgerConfig(
                penalty=self.config.penalty,
                threshold=self.config.threshold,
                floor=self.config.floor,
            ),
            event_sink=event_sink,
        )
        for peer_id in self.population.joined:
            self.ledger.register(peer_id)
        self._sampler = _VolunteerSampler(self.population, self.config.reach)
        self._sampler.refresh()
        self._pending = sorted(self.config.newcomers, key=lambda i: i.cycle)
        self.round_index = 0

    def run(self) -> "MetricsSeries":
        rows = [self.run_cycle(cycle) for cycle in range(self.config.total_cycles)]
        return MetricsSeries(rows)

    def run_cycle(self, cycle: int) -> "MetricsRow":
        self._inject(cycle)
        config = self.config
        seed = config.rng_seed
        joined = self.population.joined
        successes = failures = penalties = 0
        for _ in range(config.queries_per_cycle):
            stream = Stream.from_path(seed, "round", self.round_index)
            requester = joined[stream.randbelow(len(joined))]
            record = self.run_round(requester, stream)
            if record.outcome is Outcome.SUCCESS:
                successes += 1
            elif record.outcome is Outcome.FAILURE:
                failures += 1
                penalties += 1
        return self._metrics_row(cycle, successes, failures, penalties)

    def run_round(self, requester_id: int, stream: Stream | None = None) -> RoundRecord:
        config = self.config
        population = self.population
        ledger = self.ledger
        scores = ledger._scores
        if requester_id not in scores:
            raise UnknownPeerError(requester_id)
        if stream is None:
            stream = Stream.from_path(config.rng_seed, "round", self.round_index)
        round_index = self.round_index
        self.round_index = round_index + 1

        holdings = population.holdings[requester_id]
        catalog = config.catalog_size
        while True:
            file_id = stream.randbelow(catalog)
            if file_id not in holdings:
                break

        volunteers = self._sampler.draw(stream, requester_id, file_id)
        if not volunteers:
            return RoundRecord(
                round_index, requester_id, file_id, (), Gate.NO_VOLUNTEERS,
                None, None, None, None, 0.0,
            )

        if scores[requester_id] < config.threshold:
            ledger.credit_many(volunteers, round_index, EventKind.VOLUNTEER_CREDIT)
            return RoundRecord(
                round_index, requester_id, file_id, tuple(volunteers),
                Gate.REPUTATION_ONLY, None, None, None, None, 0.0,
            )

        selected, mode = select_server(volunteers, ledger, config.p, stream)
        if population.behaviors[selected] is Behavior.GOOD_SERVER:
            ledger.credit(selected, round_index, EventKind.SELECTED_TRUTHFUL_CREDIT)
            ledger.credit_many(
                (pid for pid in volunteers if pid != selected),
                round_index,
                EventKind.VOLUNTEER_CREDIT,
            )
            if config.acquire_files:
                population.acquire(requester_id, file_id)
            return RoundRecord(
                round_index, requester_id, file_id, tuple(volunteers), Gate.SERVED,
                mode, selected, Outcome.SUCCESS, config.reward - config.cost, 0.0,
            )
        before = scores[selected]
        after = ledger.penalize(selected, round_index)
        ledger.credit_many(
            (pid for pid in volunteers if pid != selected),
            round_index,
            EventKind.VOLUNTEER_CREDIT,
        )
        return RoundRecord(
            round_index, requester_id, file_id, tuple(volunteers), Gate.SERVED,
            mode, selected, Outcome.FAILURE, -config.cost, after - before,
        )

    def _inject(self, cycle: int) -> None:
        injected = False
        while self._pending and self._pending[0].cycle <= cycle:
            injection = self._pending.pop(0)
            for _ in range(injection.count):
                peer_id = self.population.add_peer(
                    injection.behavior, cycle, self.config.rng_seed, founder=False
                )
                self.ledger.register(peer_id)
            injected = True
        if injected:
            self._sampler.refresh()

    def _metrics_row(
        self, cycle: int, successes: int, failures: int, penalties: int
    ) -> "MetricsRow":
        scores = self.ledger._scores

        def average(ids: list[int]) -> float | None:
            if not ids:
                return None
            return math.fsum(map(scores.__getitem__, ids)) / len(ids)

        population = self.population
        transactions = successes + failures
        return MetricsRow(
            cycle=cycle,
            avg_trust_good=average(population.good_founder_ids),
            avg_trust_bad=average(population.bad_founder_ids),
            avg_trust_liar=average(population.liar_founder_ids),
            avg_trust_newcomer_good=average(population.newcomer_good_ids),
            success_rate=successes / transactions if transactions else None,
            penalties=penalties,
        )


def run_simulation(
    config: SimConfig, event_sink: Callable[[TrustEvent], None] | None = None
) -> "MetricsSeries":
    """Run the full schedule and return the per-cycle metrics."""
    return Simulation(config, event_sink=event_sink).run()


METRICS_CSV_HEADER = (
    "cycle,avg_trust_good,avg_trust_bad,avg_trust_liar,"
    "avg_trust_newcomer_good,success_rate,penalties"
)


@dataclass(frozen=True)
class MetricsRow:
    cycle: int
    avg_trust_good: float | None
    avg_trust_bad: float | None
    avg_trust_liar: float | None
    avg_trust_newcomer_good: float | None
    success_rate: float | None
    penalties: int


class MetricsSeries:
    """Per-cycle category averages and transaction outcomes.

    CSV format: fixed header, ``.`` decimal separator, reals at 6 decimals,
    missing categories as empty fields.
    """

    def __init__(self, rows: list[MetricsRow]):
        self.rows = list(rows)

    def __len__(self) -> int:
        return len(self.rows)

    def __iter__(self):
        return iter(self.rows)

    def __eq__(self, other):
        return isinstance(other, MetricsSeries) and self.rows == other.rows

    def to_csv(self) -> str:
        def fmt(value: float | None) -> str:
            return "" if value is None else f"{value:.6f}"

        lines = [METRICS_CSV_HEADER]
        for row in self.rows:
            lines.append(
                f"{row.cycle},{fmt(row.avg_trust_good)},{fmt(row.avg_trust_bad)},"
                f"{fmt(row.avg_trust_liar)},{fmt(row.avg_trust_newcomer_good)},"
                f"{fmt(row.success_rate)},{row.penalties}"
            )
        return "\n".join(lines) + "\n"

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())

    @classmethod
    def from_csv_text(cls, text: str) -> "MetricsSeries":
        lines = [line for line in text.splitlines() if line.strip()]
        if not lines or lines[0] != METRICS_CSV_HEADER:
            raise SchemaError(
                f"bad metrics header: expected {METRICS_CSV_HEADER!r}"
            )

        def parse_real(field: str) -> float | None:
            return None if field == "" else float(field)

        rows = []
        for number, line in enumerate(lines[1:], start=2):
            fields = line.split(",")
            if len(fields) != 7:
                raise SchemaError(f"line {number}: expected 7 fields, got {len(fields)}")
            try:
                rows.append(
                    MetricsRow(
                        cycle=int(fields[0]),
                        avg_trust_good=parse_real(fields[1]),
                        avg_trust_bad=parse_real(fields[2]),
                        avg_trust_liar=parse_real(fields[3]),
                        avg_trust_newcomer_good=parse_real(fields[4]),
                        success_rate=parse_real(fields[5]),
                        penalties=int(fields[6]),
                    )
                )
            except ValueError as exc:
                raise SchemaError(f"line {number}: {exc}") from None
        return cls(rows)

    @classmethod
    def from_csv(cls, path) -> "MetricsSeries":
        with open(path, "r", newline="") as fh:
            return cls.from_csv_text(fh.read())


def parse_injections(text: str) -> tuple[Injection, ...]:
    """Parse ``cycle:count:behavior[,cycle:count:behavior...]``."""
    items = []
    for chunk in text.split(","):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = chunk.split(":")
        if len(parts) != 3:
            raise ValueError(f"bad newcomer entry {chunk!r} (want cycle:count:behavior)")
        items.append(Injection(int(parts[0]), int(parts[1]), Behavior.parse(parts[2])))
    return tuple(items)
