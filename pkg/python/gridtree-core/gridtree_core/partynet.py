"""Deterministic simulated multi-party runtime.

Parties are addressable state machines with a private store. Every value that
moves from one party to another goes through :meth:`Network.send`, which
appends an entry to the run's :class:`Transcript`. The scheduler is single
threaded and advances a synchronous round counter.
"""

import json
import random
from collections import Counter, defaultdict, deque
from contextlib import contextmanager
from dataclasses import dataclass
from typing import Any, Callable, Dict, Iterable, List, NamedTuple, Optional, Tuple

from traitlets.config import LoggingConfigurable

from .errors import ProtocolHang


@dataclass(frozen=True, order=True)
class PartyId:
    """Grid coordinate of a party: vertical group ``i`` and horizontal group ``j``."""

    i: int
    j: int

    def __str__(self):
        return f"P{self.i}.{self.j}"

    def to_json(self):
        return {"i": self.i, "j": self.j}

    @classmethod
    def from_json(cls, data):
        return cls(int(data["i"]), int(data["j"]))


# Address of the ideal functionality that stands in for circuit evaluation.
IDEAL = PartyId(0, 0)


class TranscriptEntry(NamedTuple):
    round: int
    sender: PartyId
    receiver: PartyId
    nbits: int
    tag: str

    @property
    def nbytes(self):
        return (self.nbits + 7) // 8

    def to_json(self):
        return {
            "round": self.round,
            "from": str(self.sender),
            "to": str(self.receiver),
            "bits": self.nbits,
            "bytes": self.nbytes,
            "tag": self.tag,
        }


class Message(NamedTuple):
    sender: PartyId
    receiver: PartyId
    tag: str
    payload: Any


@dataclass(frozen=True)
class CostCounters:
    messages: int = 0
    bytes: int = 0
    cipher_ops: int = 0
    circuit_units: int = 0

    def to_json(self):
        return {
            "messages": self.messages,
            "bytes": self.bytes,
            "cipher_ops": self.cipher_ops,
            "circuit_units": self.circuit_units,
        }


def _parse_party(text):
    i, j = text[1:].split(".")
    return PartyId(int(i), int(j))


class Transcript:
    """Append-only log of messages plus per-party computation counters."""

    def __init__(self):
        self.entries: List[TranscriptEntry] = []
        self.counters: Dict[PartyId, Counter] = defaultdict(Counter)

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other):
        if not isinstance(other, Transcript):
            return NotImplemented
        return self.entries == other.entries and dict(self.counters) == dict(other.counters)

    def append(self, round_, sender, receiver, nbits, tag):
        if nbits <= 0:
            raise ValueError(f"message {tag!r} has no content")
        if self.entries and round_ < self.entries[-1].round:
            raise ValueError("transcript rounds must not decrease")
        entry = TranscriptEntry(round_, sender, receiver, nbits, tag)
        self.entries.append(entry)
        return entry

    def charge(self, party, cipher_ops=0, circuit_units=0):
        if cipher_ops:
            self.counters[party]["cipher_ops"] += cipher_ops
        if circuit_units:
            self.counters[party]["circuit_units"] += circuit_units

    def for_party(self, party):
        """Entries a party took part in, as sender or receiver."""
        return [e for e in self.entries if party in (e.sender, e.receiver)]

    def with_tag(self, fragment):
        return [e for e in self.entries if fragment in e.tag]

    def to_jsonl(self):
        return "".join(json.dumps(e.to_json(), sort_keys=True) + "\n" for e in self.entries)

    @classmethod
    def from_jsonl(cls, text):
        transcript = cls()
        for line in text.splitlines():
            if not line.strip():
                continue
            data = json.loads(line)
            transcript.append(
                data["round"],
                _parse_party(data["from"]),
                _parse_party(data["to"]),
                data.get("bits", data["bytes"] * 8),
                data["tag"],
            )
        return transcript


def snapshot_counters(transcript: Transcript) -> CostCounters:
    totals = Counter()
    for counter in transcript.counters.values():
        totals.update(counter)
    return CostCounters(
        messages=len(transcript.entries),
        bytes=sum(e.nbytes for e in transcript.entries),
        cipher_ops=totals["cipher_ops"],
        circuit_units=totals["circuit_units"],
    )


def payload_bits(payload):
    """Size of a plain payload in bits, measured on its JSON encoding."""
    return 8 * len(json.dumps(payload, default=str, sort_keys=True).encode("utf-8"))


class Party:
    """An isolated party: private store, inbox and everything it ever received."""

    def __init__(self, pid: PartyId, rng: random.Random):
        self.pid = pid
        self.rng = rng
        self.store: Dict[str, Any] = {}
        self.inbox: deque = deque()
        self.view: List[Message] = []

    def __repr__(self):
        return f"<Party {self.pid}>"


class Network(LoggingConfigurable):
    """Message bus and scheduler state of one protocol run."""

    def __init__(
        self,
        parties: Iterable[PartyId],
        seed: int = 0,
        key_bits: int = 128,
        tuple_bound: int = 1,
        circuit_backend=None,
        **kwargs,
    ):
        super().__init__(**kwargs)
        self.seed = seed
        self.key_bits = key_bits
        self.tuple_bound = tuple_bound
        self.circuit_backend = circuit_backend
        self.transcript = Transcript()
        self.round = 0
        self.rng = random.Random(f"{seed}/scheduler")
        self.functionality_rng = random.Random(f"{seed}/ideal")
        self.parties: Dict[PartyId, Party] = {
            pid: Party(pid, random.Random(f"{seed}/{pid.i}/{pid.j}"))
            for pid in sorted(set(parties))
        }
        self._sections: List[str] = []

    def party(self, pid: PartyId) -> Party:
        return self.parties[pid]

    @property
    def log_bound(self):
        """Bit length of the largest count a protocol handles, log |T|."""
        return max(1, int(self.tuple_bound).bit_length())

    def tick(self):
        self.round += 1

    @contextmanager
    def section(self, name):
        self._sections.append(name)
        try:
            yield
        finally:
            self._sections.pop()

    def _tag(self, tag):
        return "/".join(self._sections + [tag])

    def send(self, sender: PartyId, receiver: PartyId, payload, nbits: int, tag: str):
        """Deliver ``payload`` into the receiver's inbox and log it.

        Sending to oneself is a local step and leaves no trace.
        """
        if sender == receiver:
            return
        if receiver not in self.parties or (sender != IDEAL and sender not in self.parties):
            raise KeyError(f"unknown party in {sender} -> {receiver}")
        full_tag = self._tag(tag)
        self.transcript.append(self.round, sender, receiver, max(1, int(nbits)), full_tag)
        message = Message(sender, receiver, full_tag, payload)
        target = self.parties[receiver]
        target.inbox.append(message)
        target.view.append(message)

    def recv(self, receiver: PartyId, tag: Optional[str] = None):
        inbox = self.parties[receiver].inbox
        for position, message in enumerate(inbox):
            if tag is None or message.tag.endswith(tag):
                del inbox[position]
                return message.payload
        raise ProtocolHang(f"{receiver} waits for {tag!r} but nothing was sent")

    def transfer(self, sender: PartyId, receiver: PartyId, payload, nbits: int, tag: str):
        """Send and immediately deliver; returns what the receiver now holds."""
        if sender == receiver:
            return payload
        self.send(sender, receiver, payload, nbits, tag)
        return self.recv(receiver, self._tag(tag))

    def charge(self, party: PartyId, cipher_ops=0, circuit_units=0):
        self.transcript.charge(party, cipher_ops=cipher_ops, circuit_units=circuit_units)

    def pending(self) -> List[Message]:
        return [m for party in self.parties.values() for m in party.inbox]

    def close(self):
        undelivered = self.pending()
        if undelivered:
            first = undelivered[0]
            raise ProtocolHang(
                f"{len(undelivered)} undelivered message(s), first {first.tag!r} "
                f"from {first.sender} to {first.receiver}"
            )


def run_protocol(
    topology, program: Callable[[Network], Any], seed: int = 0, **kwargs
) -> Tuple[Any, Transcript]:
    """Run ``program`` over a fresh network of the topology's parties.

    ``topology`` is a grid partition (anything with ``party_ids()``) or an
    iterable of party ids.
    """
    parties = topology.party_ids() if hasattr(topology, "party_ids") else list(topology)
    net = Network(parties, seed=seed, **kwargs)
    net.log.debug("running protocol over %d parties with seed %s", len(net.parties), seed)
    result = program(net)
    net.close()
    return result, net.transcript
